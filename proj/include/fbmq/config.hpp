#pragma once

#include <string>

#include "fbmq/experiments.hpp"

namespace fbmq {

enum class OutputFormat { csv, json };

/// Validated run configuration parsed from a flat JSON object. Recognized
/// keys: H, theta, lambda, c, b_grid, n_target, dt_rule, window_rule,
/// sampler, r, seed. Unknown and duplicate keys are rejected.
struct RunConfig {
    ExperimentConfig experiment;
    std::string output_dir = "out";
    OutputFormat format = OutputFormat::csv;

    const ModelParams& model() const { return experiment.params; }
};

class config_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

RunConfig parse_config(const std::string& text);

/// Canonical serialization of the validated configuration (sorted keys),
/// the input to config hashing.
std::string canonical_config(const RunConfig& config);

/// FNV-1a 64-bit digest of the canonical configuration, as fixed-width hex.
std::string config_hash(const RunConfig& config);

}  // namespace fbmq
