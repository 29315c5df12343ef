#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "leakhound/pii.hpp"

namespace leakhound {

struct AppProfile {
    std::string name;
    AppCategory category = AppCategory::Others;
    OsKind os = OsKind::unknown;
    std::vector<std::string> domains;
};

std::vector<AppProfile> default_app_mix();

struct SynthSpec {
    std::size_t n_flows = 0;
    double pii_rate = 0.0;  // in [0, 1]
    std::uint64_t seed = 0;
    std::vector<AppProfile> app_mix = default_app_mix();
};

struct SynthResult {
    Corpus corpus;
    std::vector<LabeledFlow> labeled;  // ground truth, source = external
};

// Deterministic synthetic HTTP traffic with exactly round(pii_rate * n_flows)
// positive flows. Positive flows plant 1-3 PII values behind key names drawn
// from a small fixed dictionary ("email", "uid", "ll", ...) so key tokens have
// learnable structure; negative flows avoid every default-rule shape, and some
// of their path vocabulary never appears in positive flows.
SynthResult generate_synthetic_corpus(const SynthSpec& spec);

}  // namespace leakhound
