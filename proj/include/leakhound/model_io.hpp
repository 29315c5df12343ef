#pragma once

#include <string>

#include "leakhound/mlp.hpp"
#include "leakhound/tree.hpp"

namespace leakhound {

enum class ModelKind : std::uint8_t { tree = 1, network = 2 };

// Binary container, magic "LHMD", version 1, little-endian integers and
// IEEE-754 doubles. Saving the result of a load reproduces the bytes.
void save_model(const DecisionTree& tree, const std::string& path);
void save_model(const MlpModel& model, const std::string& path);

ModelKind peek_model_kind(const std::string& path);
DecisionTree load_tree(const std::string& path);
MlpModel load_network(const std::string& path);

// Human-readable dump for debugging and reports.
std::string model_to_text(const DecisionTree& tree);
std::string model_to_text(const MlpModel& model);

}  // namespace leakhound
