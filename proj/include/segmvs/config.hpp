#pragma once

#include "segmvs/engine.hpp"
#include "segmvs/fusion.hpp"

#include <string>
#include <vector>

namespace segmvs {

/// Run-wide configuration: the engine parameters, the fusion thresholds and
/// the ablation toggles. Serializes to key=value text; dump/parse round-trips
/// to an identical config.
struct RunConfig {
  EngineParams engine;
  FusionParams fusion;
};

/// Parses key=value lines ('#' comments allowed); unknown keys are an error.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config_file(const std::string& path, RunConfig base = {});
std::string dump_config(const RunConfig& config);

/// Ablation names from the CLI: no-deformation, no-restoration-init,
/// no-restoration-supervision, no-occlusion, no-strict-edges.
void apply_ablation(RunConfig& config, const std::string& name);

}  // namespace segmvs
