#pragma once

#include <filesystem>
#include <string>

#include "apd/models.hpp"
#include "json.hpp"

namespace apd {

/// Probability lists may be off by at most this much before renormalization.
inline constexpr double kLoadSumTolerance = 1e-6;

/// Builds a model from its JSON description. A "perturbed" model whose
/// "base" is a string loads that path relative to `base_dir`.
///
///   {"type": "tabular", "vocab": ["A","B"], "n": 2, "eos": "B",
///    "table": [{"seq": ["A","A"], "p": 0.4}, ...]}
///   {"type": "markov", "vocab": [...], "order": 1, "n": 4,
///    "initial": [{"seq": ["A"], "p": 0.5}, ...],
///    "transitions": [{"context": ["A"], "probs": [0.9, 0.1]}, ...]}
///   {"type": "perturbed", "base": {...} | "base.json", "delta": 0.3, "seed": 7}
ModelPtr model_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

ModelPtr load_model_file(const std::filesystem::path& path);

/// "builtin:<name>" or a filesystem path.
ModelPtr resolve_model(const std::string& spec);

/// Hex SHA-256 of a model file, or "builtin:<name>" for built-in models.
std::string model_digest(const std::string& spec);

}  // namespace apd
