#include "segmvs/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace segmvs {

namespace {

struct KeyBinding {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <typename T>
std::string to_text(T v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

const std::map<std::string, KeyBinding>& bindings() {
  static const std::map<std::string, KeyBinding> table = [] {
    std::map<std::string, KeyBinding> b;
    auto def = [&b](const std::string& key, auto getter, auto setter) {
      b[key] = {getter, setter};
    };

    def(
        "x", [](const RunConfig& c) { return to_text(c.engine.rayCount); },
        [](RunConfig& c, const std::string& v) { c.engine.rayCount = std::stoi(v); });
    def(
        "window", [](const RunConfig& c) { return to_text(c.engine.window); },
        [](RunConfig& c, const std::string& v) { c.engine.window = std::stoi(v); });
    def(
        "gamma", [](const RunConfig& c) { return to_text(c.engine.gamma); },
        [](RunConfig& c, const std::string& v) { c.engine.gamma = std::stod(v); });
    def(
        "kappa", [](const RunConfig& c) { return to_text(c.engine.kappa); },
        [](RunConfig& c, const std::string& v) { c.engine.kappa = std::stod(v); });
    def(
        "tau", [](const RunConfig& c) { return to_text(c.engine.tau); },
        [](RunConfig& c, const std::string& v) { c.engine.tau = std::stod(v); });
    def(
        "eta", [](const RunConfig& c) { return to_text(c.engine.eta); },
        [](RunConfig& c, const std::string& v) { c.engine.eta = std::stod(v); });
    def(
        "delta", [](const RunConfig& c) { return to_text(c.engine.delta); },
        [](RunConfig& c, const std::string& v) { c.engine.delta = std::stod(v); });
    def(
        "sigma", [](const RunConfig& c) { return to_text(c.engine.sigma); },
        [](RunConfig& c, const std::string& v) { c.engine.sigma = std::stoi(v); });
    def(
        "layers", [](const RunConfig& c) { return to_text(c.engine.layers); },
        [](RunConfig& c, const std::string& v) { c.engine.layers = std::stoi(v); });
    def(
        "sweeps", [](const RunConfig& c) { return to_text(c.engine.sweeps); },
        [](RunConfig& c, const std::string& v) { c.engine.sweeps = std::stoi(v); });
    def(
        "passes", [](const RunConfig& c) { return to_text(c.engine.passes); },
        [](RunConfig& c, const std::string& v) { c.engine.passes = std::stoi(v); });
    def(
        "mu_base", [](const RunConfig& c) { return to_text(c.engine.muBase); },
        [](RunConfig& c, const std::string& v) { c.engine.muBase = std::stod(v); });
    def(
        "epsilon_base", [](const RunConfig& c) { return to_text(c.engine.epsilonBase); },
        [](RunConfig& c, const std::string& v) { c.engine.epsilonBase = std::stoi(v); });
    def(
        "seed", [](const RunConfig& c) { return to_text(c.engine.seed); },
        [](RunConfig& c, const std::string& v) { c.engine.seed = std::stoull(v); });
    def(
        "threads", [](const RunConfig& c) { return to_text(c.engine.threads); },
        [](RunConfig& c, const std::string& v) { c.engine.threads = std::stoi(v); });
    def(
        "weight_m", [](const RunConfig& c) { return to_text(c.engine.initialWeights[0]); },
        [](RunConfig& c, const std::string& v) { c.engine.initialWeights[0] = std::stod(v); });
    def(
        "weight_r", [](const RunConfig& c) { return to_text(c.engine.initialWeights[1]); },
        [](RunConfig& c, const std::string& v) { c.engine.initialWeights[1] = std::stod(v); });
    def(
        "weight_c", [](const RunConfig& c) { return to_text(c.engine.initialWeights[2]); },
        [](RunConfig& c, const std::string& v) { c.engine.initialWeights[2] = std::stod(v); });
    def(
        "weight_d", [](const RunConfig& c) { return to_text(c.engine.initialWeights[3]); },
        [](RunConfig& c, const std::string& v) { c.engine.initialWeights[3] = std::stod(v); });
    def(
        "fusion_min_views", [](const RunConfig& c) { return to_text(c.fusion.minConsistentViews); },
        [](RunConfig& c, const std::string& v) { c.fusion.minConsistentViews = std::stoi(v); });
    def(
        "fusion_depth_tol", [](const RunConfig& c) { return to_text(c.fusion.relDepthTol); },
        [](RunConfig& c, const std::string& v) { c.fusion.relDepthTol = std::stod(v); });
    def(
        "fusion_reproj_px", [](const RunConfig& c) { return to_text(c.fusion.reprojPxTol); },
        [](RunConfig& c, const std::string& v) { c.fusion.reprojPxTol = std::stod(v); });
    def(
        "stage_deformation", [](const RunConfig& c) { return to_text(int(c.engine.stages.deformation)); },
        [](RunConfig& c, const std::string& v) { c.engine.stages.deformation = std::stoi(v) != 0; });
    def(
        "stage_restoration_init",
        [](const RunConfig& c) { return to_text(int(c.engine.stages.restorationInit)); },
        [](RunConfig& c, const std::string& v) { c.engine.stages.restorationInit = std::stoi(v) != 0; });
    def(
        "stage_restoration_supervision",
        [](const RunConfig& c) { return to_text(int(c.engine.stages.restorationSupervision)); },
        [](RunConfig& c, const std::string& v) {
          c.engine.stages.restorationSupervision = std::stoi(v) != 0;
        });
    def(
        "stage_occlusion", [](const RunConfig& c) { return to_text(int(c.engine.stages.occlusion)); },
        [](RunConfig& c, const std::string& v) { c.engine.stages.occlusion = std::stoi(v) != 0; });
    def(
        "stage_strict_edges", [](const RunConfig& c) { return to_text(int(c.engine.stages.strictEdges)); },
        [](RunConfig& c, const std::string& v) { c.engine.stages.strictEdges = std::stoi(v) != 0; });
    return b;
  }();
  return table;
}

}  // namespace

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw std::runtime_error("config line " + std::to_string(lineNo) + ": expected key=value");
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = bindings().find(key);
    if (it == bindings().end()) throw std::runtime_error("config: unknown key '" + key + "'");
    it->second.set(base, value);
  }
  return base;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config '" + path + "': cannot open");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), base);
}

std::string dump_config(const RunConfig& config) {
  std::ostringstream out;
  for (const auto& [key, binding] : bindings()) out << key << "=" << binding.get(config) << "\n";
  return out.str();
}

void apply_ablation(RunConfig& config, const std::string& name) {
  StageToggles& s = config.engine.stages;
  if (name == "no-deformation")
    s.deformation = false;
  else if (name == "no-restoration-init")
    s.restorationInit = false;
  else if (name == "no-restoration-supervision")
    s.restorationSupervision = false;
  else if (name == "no-occlusion")
    s.occlusion = false;
  else if (name == "no-strict-edges")
    s.strictEdges = false;
  else
    throw std::runtime_error("unknown ablation '" + name +
                             "' (expected no-deformation, no-restoration-init, "
                             "no-restoration-supervision, no-occlusion, no-strict-edges)");
}

}  // namespace segmvs
