#pragma once

namespace leakhound {

// Global worker-count knob, default 1. Parallel kernels fall back to their
// serial reference path when this is 1, and results are identical either way:
// every kernel writes disjoint, index-addressed output slots.
int thread_count();
void set_thread_count(int n);
bool parallel_enabled();

}  // namespace leakhound
