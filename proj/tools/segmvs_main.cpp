#include "segmvs/config.hpp"
#include "segmvs/deformation.hpp"
#include "segmvs/engine.hpp"
#include "segmvs/eval.hpp"
#include "segmvs/fusion.hpp"
#include "segmvs/guidance.hpp"
#include "segmvs/pfm.hpp"
#include "segmvs/ply.hpp"
#include "segmvs/png_io.hpp"
#include "segmvs/scene.hpp"
#include "segmvs/synthetic.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace segmvs;

namespace {

struct GlobalOptions {
  std::string configPath;
  std::vector<std::string> ablations;
  std::vector<std::string> overrides;  // key=value pairs collected from flags
  bool printConfig = false;
};

RunConfig resolve_config(const GlobalOptions& opts) {
  RunConfig config;
  if (!opts.configPath.empty()) config = load_config_file(opts.configPath, config);
  for (const std::string& kv : opts.overrides) config = parse_config(kv, config);
  for (const std::string& name : opts.ablations) apply_ablation(config, name);
  return config;
}

void add_override_flags(CLI::App* cmd, GlobalOptions& opts) {
  cmd->add_option("--config", opts.configPath, "key=value config file");
  cmd->add_option("--ablate", opts.ablations, "disable a stage (repeatable)")->take_all();
  cmd->add_flag("--print-config", opts.printConfig, "print the resolved config and exit");
  auto addKey = [cmd, &opts](const std::string& flag, const std::string& key, const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [key, &opts](const std::string& v) { opts.overrides.push_back(key + "=" + v); }, help);
  };
  addKey("--seed", "seed", "random seed (all stochastic choices)");
  addKey("--threads", "threads", "worker cap (0 = hardware)");
  addKey("--x", "x", "diffusion ray count");
  addKey("--window", "window", "texture/mapping/occlusion window");
  addKey("--gamma", "gamma", "RANSAC residual threshold");
  addKey("--kappa", "kappa", "planar inlier-ratio threshold");
  addKey("--tau", "tau", "E_re / E_cl truncation");
  addKey("--eta", "eta", "EM weight floor");
  addKey("--delta", "delta", "occlusion gradient threshold");
  addKey("--sigma", "sigma", "minimum occlusion cluster size");
  addKey("--layers", "layers", "pyramid depth");
  addKey("--sweeps", "sweeps", "checkerboard sweeps per layer");
  addKey("--passes", "passes", "reconstruction passes");
  addKey("--mu-base", "mu_base", "depth-difference truncation base");
  addKey("--epsilon-base", "epsilon_base", "continuous-edge crossing budget base");
  addKey("--weight-m", "weight_m", "initial matching weight");
  addKey("--weight-r", "weight_r", "initial reprojection weight");
  addKey("--weight-c", "weight_c", "initial color-gradient weight");
  addKey("--weight-d", "weight_d", "initial depth-difference weight");
  addKey("--fusion-min-views", "fusion_min_views", "consistent views required by fusion");
  addKey("--fusion-depth-tol", "fusion_depth_tol", "fusion relative depth agreement");
  addKey("--fusion-reproj-px", "fusion_reproj_px", "fusion reprojection tolerance (px)");
}

bool handle_print_config(const GlobalOptions& opts) {
  if (!opts.printConfig) return false;
  std::cout << dump_config(resolve_config(opts));
  return true;
}

void write_view_outputs(const std::string& outDir, const SceneBundle& scene,
                        const ReconstructionResult& result) {
  fs::create_directories(fs::path(outDir) / "depth");
  fs::create_directories(fs::path(outDir) / "normal");
  for (size_t v = 0; v < scene.views.size(); ++v) {
    const std::string& name = scene.views[v].name;
    write_pfm((fs::path(outDir) / "depth" / (name + ".pfm")).string(), result.views[v].depth);
    write_pfm3((fs::path(outDir) / "normal" / (name + ".pfm")).string(), result.views[v].normal);
  }
}

void write_stats(const std::string& outDir, const ReconstructionResult& result) {
  std::ofstream stats(fs::path(outDir) / "stats.txt");
  stats.precision(6);
  stats << "runtime_seconds=" << result.runtimeSeconds << "\n";
  stats << "peak_raster_bytes=" << result.rasterBytes << "\n";
}

std::array<Rasteru8, 3> occlusion_png(const OcclusionMap& occ) {
  const Index rows = occ.label.rows(), cols = occ.label.cols();
  std::array<Rasteru8, 3> rgb{Rasteru8::Zero(rows, cols), Rasteru8::Zero(rows, cols),
                              Rasteru8::Zero(rows, cols)};
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      if (occ.label(r, c) == uint8_t(EdgeLabel::Continuous))
        rgb[2](r, c) = 255;  // blue
      else if (occ.label(r, c) == uint8_t(EdgeLabel::Discontinuous))
        rgb[0](r, c) = 255;  // red
    }
  return rgb;
}

std::array<Rasteru8, 3> provenance_png(const RestoredDepthMap& restored) {
  const Index rows = restored.tag.rows(), cols = restored.tag.cols();
  std::array<Rasteru8, 3> rgb{Rasteru8::Zero(rows, cols), Rasteru8::Zero(rows, cols),
                              Rasteru8::Zero(rows, cols)};
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      switch (DepthProvenance(restored.tag(r, c))) {
        case DepthProvenance::TriangleInterp:
          rgb[1](r, c) = 200;
          break;
        case DepthProvenance::PlaneProject:
          rgb[2](r, c) = 220;
          break;
        case DepthProvenance::GeomRefined:
          rgb[0](r, c) = 230;
          rgb[1](r, c) = 140;
          break;
        case DepthProvenance::ProportionalMap:
          rgb[0](r, c) = 200;
          rgb[2](r, c) = 200;
          break;
        case DepthProvenance::Invalid:
        default:
          break;
      }
    }
  return rgb;
}

int cmd_reconstruct(const GlobalOptions& opts, const std::string& scenePath, const std::string& outPath) {
  const RunConfig config = resolve_config(opts);
  const SceneBundle scene = load_scene(scenePath);
  const ReconstructionResult result = reconstruct(scene, config.engine);

  fs::create_directories(outPath);
  write_view_outputs(outPath, scene, result);
  write_stats(outPath, result);

  std::vector<FusionView> fusionViews;
  for (size_t v = 0; v < scene.views.size(); ++v)
    fusionViews.push_back(
        {result.views[v].depth, result.views[v].normal, scene.views[v].image, scene.views[v].camera});
  const std::vector<PlyPoint> cloud = export_point_cloud(fusionViews, config.fusion);
  write_ply((fs::path(outPath) / "fused.ply").string(), cloud);

  std::cout << "reconstructed " << scene.views.size() << " views, fused " << cloud.size() << " points in "
            << result.runtimeSeconds << " s\n";
  return 0;
}

int cmd_restore(const GlobalOptions& opts, const std::string& scenePath, const std::string& outPath) {
  const RunConfig config = resolve_config(opts);
  const SceneBundle scene = load_scene(scenePath);
  RestorationParams rp;
  rp.gamma = config.engine.gamma;
  rp.kappa = config.engine.kappa;
  rp.seed = config.engine.seed;
  fs::create_directories(fs::path(outPath) / "restored");
  for (size_t v = 0; v < scene.views.size(); ++v) {
    const RestoredDepthMap restored = restore(scene.views[v], scene.sparse, int(v), rp);
    const std::string& name = scene.views[v].name;
    write_pfm((fs::path(outPath) / "restored" / (name + ".pfm")).string(), restored.depth);
    write_png_rgb8((fs::path(outPath) / "restored" / (name + "_provenance.png")).string(),
                   provenance_png(restored));
  }
  std::cout << "restored " << scene.views.size() << " views\n";
  return 0;
}

int cmd_occlusion(const GlobalOptions& opts, const std::string& scenePath, const std::string& outPath) {
  const RunConfig config = resolve_config(opts);
  const SceneBundle scene = load_scene(scenePath);
  fs::create_directories(fs::path(outPath) / "occlusion");
  for (const ViewBundle& view : scene.views) {
    const Rasteru8 boundary = extract_boundary(view.segmentation);
    const OcclusionMap occ =
        compute_occlusion_map(boundary, normalize_range(view.monoDepth, 255.0), config.engine.window,
                              config.engine.delta, config.engine.sigma);
    write_png_rgb8((fs::path(outPath) / "occlusion" / (view.name + ".png")).string(), occlusion_png(occ));
  }
  std::cout << "wrote occlusion maps for " << scene.views.size() << " views\n";
  return 0;
}

int cmd_patch_debug(const GlobalOptions& opts, const std::string& scenePath, const std::string& outPath,
                    const std::string& viewName, int px, int py) {
  const RunConfig config = resolve_config(opts);
  const SceneBundle scene = load_scene(scenePath);
  const auto it = std::find_if(scene.views.begin(), scene.views.end(),
                               [&](const ViewBundle& v) { return v.name == viewName; });
  if (it == scene.views.end()) throw std::runtime_error("patch-debug: unknown view '" + viewName + "'");
  const ViewBundle& view = *it;
  if (px < 0 || py < 0 || px >= view.camera.width || py >= view.camera.height)
    throw std::runtime_error("patch-debug: pixel outside raster");

  const EngineParams& P = config.engine;
  const Rasteru8 boundary = extract_boundary(view.segmentation);
  OcclusionMap occ = compute_occlusion_map(boundary, normalize_range(view.monoDepth, 255.0), P.window,
                                           P.delta, P.sigma);
  if (!P.stages.occlusion) {
    for (Index r = 0; r < occ.label.rows(); ++r)
      for (Index c = 0; c < occ.label.cols(); ++c)
        if (boundary(r, c)) occ.label(r, c) = uint8_t(EdgeLabel::Discontinuous);
  }
  const EdgePolicy policy{P.epsilonBase};
  const Rasterf image = view.image.cast<float>();
  const Rasterf texture = compute_textureness(image, P.window);
  const Rasteri32 mapping = compute_mapping_field(texture, occ, policy, P.window, 0);
  const int maxRadius = std::max(1, int(std::min(view.image.rows(), view.image.cols()) / 4));

  const Pixel center{Index(py), Index(px)};
  const auto trajectories = diffuse_trajectories(center, P.rayCount, occ, policy, maxRadius, 0);
  const Rasterf uniformCost = Rasterf::Zero(view.image.rows(), view.image.cols());
  const auto samples = allocate_samples(trajectories, uniformCost, mapping);

  std::array<Rasteru8, 3> rgb{view.image, view.image, view.image};
  for (Index r = 0; r < occ.label.rows(); ++r)
    for (Index c = 0; c < occ.label.cols(); ++c) {
      if (occ.label(r, c) == uint8_t(EdgeLabel::Continuous)) {
        rgb[0](r, c) = 0;
        rgb[1](r, c) = 0;
        rgb[2](r, c) = 255;
      } else if (occ.label(r, c) == uint8_t(EdgeLabel::Discontinuous)) {
        rgb[0](r, c) = 255;
        rgb[1](r, c) = 0;
        rgb[2](r, c) = 0;
      }
    }
  for (const Trajectory& t : trajectories) {
    for (const Pixel& p : t.pixels) {
      rgb[0](p.row, p.col) = 90;
      rgb[1](p.row, p.col) = 90;
      rgb[2](p.row, p.col) = 90;
    }
    const Pixel& e = t.endpoint();
    rgb[0](e.row, e.col) = 255;
    rgb[1](e.row, e.col) = 120;
    rgb[2](e.row, e.col) = 0;
  }
  for (const PatchSample& s : samples) {
    rgb[0](s.pixel.row, s.pixel.col) = 0;
    rgb[1](s.pixel.row, s.pixel.col) = 200;
    rgb[2](s.pixel.row, s.pixel.col) = 255;
  }
  rgb[0](center.row, center.col) = 0;
  rgb[1](center.row, center.col) = 255;
  rgb[2](center.row, center.col) = 0;

  fs::create_directories(outPath);
  const std::string file =
      (fs::path(outPath) / ("patch_" + viewName + "_" + std::to_string(px) + "_" + std::to_string(py) + ".png"))
          .string();
  write_png_rgb8(file, rgb);

  std::cout << "patch at (" << px << ", " << py << "): " << trajectories.size() << " trajectories, "
            << samples.size() << " samples\n";
  for (const PatchSample& s : samples)
    std::cout << "sample t" << s.trajectory << " f" << s.fragment << " -> (" << s.pixel.col << ", "
              << s.pixel.row << ")\n";
  std::cout << "wrote " << file << "\n";
  return 0;
}

int cmd_synth(const GlobalOptions& opts, const std::string& outPath, const std::string& specPath,
              const std::string& preset) {
  const RunConfig config = resolve_config(opts);
  SynthSpec spec;
  if (!specPath.empty())
    spec = parse_synth_spec(specPath);
  else if (preset == "two-plane")
    spec = two_plane_preset();
  else
    throw std::runtime_error("synth: give --spec FILE or --preset two-plane");
  spec.seed = config.engine.seed;

  const SyntheticScene synth = generate_synthetic_scene(spec);
  save_scene(outPath, synth.scene);
  fs::create_directories(fs::path(outPath) / "gt");
  for (size_t v = 0; v < synth.scene.views.size(); ++v)
    write_pfm((fs::path(outPath) / "gt" / (synth.scene.views[v].name + ".pfm")).string(), synth.gtDepth[v]);
  std::cout << "wrote synthetic scene with " << synth.scene.views.size() << " views and "
            << synth.scene.sparse.points.size() << " sparse points to " << outPath << "\n";
  return 0;
}

int cmd_eval(const std::string& resultDir, const std::string& gtDir) {
  std::vector<std::string> names;
  std::vector<Rasterf> estimates, gts;
  const fs::path depthDir = fs::path(resultDir) / "depth";
  if (!fs::exists(depthDir)) throw std::runtime_error("eval: missing '" + depthDir.string() + "'");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(depthDir))
    if (entry.path().extension() == ".pfm") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const fs::path& file : files) {
    const std::string name = file.stem().string();
    fs::path gtFile = fs::path(gtDir) / (name + ".pfm");
    if (!fs::exists(gtFile)) gtFile = fs::path(gtDir) / "gt" / (name + ".pfm");
    if (!fs::exists(gtFile))
      throw std::runtime_error("eval: view '" + name + "' has no ground-truth raster under '" + gtDir + "'");
    names.push_back(name);
    estimates.push_back(read_pfm(file.string()));
    gts.push_back(read_pfm(gtFile.string()));
  }
  if (names.empty()) throw std::runtime_error("eval: no depth maps found");

  EvalReport report = evaluate_depth_maps(names, estimates, gts);
  const fs::path stats = fs::path(resultDir) / "stats.txt";
  if (fs::exists(stats)) {
    std::ifstream in(stats);
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind("runtime_seconds=", 0) == 0) report.runtimeSeconds = std::stod(line.substr(16));
      if (line.rfind("peak_raster_bytes=", 0) == 0)
        report.peakRasterBytes = size_t(std::stoull(line.substr(18)));
    }
  }
  std::cout << format_report(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"segmentation-guided multi-view stereo"};
  app.require_subcommand(1);

  GlobalOptions opts;
  std::string scenePath, outPath, gtPath, viewName, specPath, preset, pixelSpec;

  CLI::App* reconstruct = app.add_subcommand("reconstruct", "depth/normal maps + fused point cloud");
  reconstruct->add_option("--scene", scenePath, "scene directory")->required();
  reconstruct->add_option("--out", outPath, "output directory")->required();
  add_override_flags(reconstruct, opts);

  CLI::App* restoreCmd = app.add_subcommand("restore", "restored depth maps only");
  restoreCmd->add_option("--scene", scenePath)->required();
  restoreCmd->add_option("--out", outPath)->required();
  add_override_flags(restoreCmd, opts);

  CLI::App* occlusionCmd = app.add_subcommand("occlusion", "occlusion maps only");
  occlusionCmd->add_option("--scene", scenePath)->required();
  occlusionCmd->add_option("--out", outPath)->required();
  add_override_flags(occlusionCmd, opts);

  CLI::App* patchCmd = app.add_subcommand("patch-debug", "deformed-patch overlay for one pixel");
  patchCmd->add_option("--scene", scenePath)->required();
  patchCmd->add_option("--out", outPath)->required();
  patchCmd->add_option("--view", viewName, "view name")->required();
  patchCmd->add_option("--pixel", pixelSpec, "x,y")->required();
  add_override_flags(patchCmd, opts);

  CLI::App* synthCmd = app.add_subcommand("synth", "generate a synthetic scene with ground truth");
  synthCmd->add_option("--out", outPath)->required();
  synthCmd->add_option("--spec", specPath, "synth spec file");
  synthCmd->add_option("--preset", preset, "built-in preset (two-plane)");
  add_override_flags(synthCmd, opts);

  CLI::App* evalCmd = app.add_subcommand("eval", "depth metrics against ground truth");
  evalCmd->add_option("--result", scenePath, "reconstruction output directory")->required();
  evalCmd->add_option("--gt", gtPath, "ground-truth directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (handle_print_config(opts)) return 0;
    if (reconstruct->parsed()) return cmd_reconstruct(opts, scenePath, outPath);
    if (restoreCmd->parsed()) return cmd_restore(opts, scenePath, outPath);
    if (occlusionCmd->parsed()) return cmd_occlusion(opts, scenePath, outPath);
    if (patchCmd->parsed()) {
      const auto comma = pixelSpec.find(',');
      if (comma == std::string::npos) throw std::runtime_error("patch-debug: --pixel expects x,y");
      const int px = std::stoi(pixelSpec.substr(0, comma));
      const int py = std::stoi(pixelSpec.substr(comma + 1));
      return cmd_patch_debug(opts, scenePath, outPath, viewName, px, py);
    }
    if (synthCmd->parsed()) return cmd_synth(opts, outPath, specPath, preset);
    if (evalCmd->parsed()) return cmd_eval(scenePath, gtPath);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
