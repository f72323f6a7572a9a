#pragma once

#include "segmvs/cost.hpp"
#include "segmvs/restoration.hpp"
#include "segmvs/scene.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace segmvs {

/// Feature removals mirroring the ablation switches; all default on.
struct StageToggles {
  bool deformation = true;             // off: fixed 11x11 square patch, 8-neighbor propagation
  bool restorationInit = true;         // off: random initialization
  bool restorationSupervision = true;  // off: depth-difference term disabled
  bool occlusion = true;               // off: every boundary treated as strict
  bool strictEdges = true;             // off: every boundary treated as flexible
};

struct EngineParams {
  int rayCount = 16;    // X
  int window = 11;      // w (texture, mapping, occlusion windows)
  double gamma = 5e-3;  // RANSAC residual threshold
  double kappa = 0.7;   // planar inlier-ratio threshold
  double tau = 3.0;     // truncation for E_re / E_cl
  double eta = 0.1;     // weight floor
  double delta = 1.8;   // occlusion gradient threshold on [0,255]
  int sigma = 12;       // minimum occlusion cluster size
  int layers = 4;
  int sweeps = 3;
  int passes = 2;
  double muBase = 0.05;  // mu(n) = muBase * 2^n
  int epsilonBase = 8;   // epsilon(n) = epsilonBase * 2^n
  std::array<double, 4> initialWeights{1.0, 0.2, 0.2, 0.2};  // pre-normalization {m, r, c, d}
  uint64_t seed = 7;
  int threads = 0;  // 0: hardware concurrency
  StageToggles stages;
};

/// Per-layer derived quantities; the doubling of mu and epsilon per coarser
/// layer is established here.
struct LayerParams {
  int index = 0;
  Index rows = 0, cols = 0;
  double mu = 0.05;
  int epsilon = 8;
  int maxRadius = 1;
};

LayerParams make_layer_params(int index, Index fullRows, Index fullCols, double muBase, int epsilonBase);

struct MStepRecord {
  int view = 0, pass = 0, layer = 0, sweep = 0;
  CostWeights weights;
  std::array<bool, 4> active{};
  std::array<double, 4> meanTerms{};
};

struct SweepRecord {
  int view = 0, pass = 0, layer = 0, sweep = 0;
  // Both means are taken under the sweep's weights and sample sets, so
  // adopted <= previous is the cross-sweep non-increase statement.
  double meanPrevious = 0.0;
  double meanAdopted = 0.0;
};

struct ViewResult {
  Rasterf depth;
  std::array<Rasterf, 3> normal;  // camera-frame unit normals
};

struct ReconstructionResult {
  std::vector<ViewResult> views;
  std::vector<RestoredDepthMap> restored;
  std::vector<MStepRecord> mSteps;
  std::vector<SweepRecord> sweepLog;
  double runtimeSeconds = 0.0;
  size_t rasterBytes = 0;
};

/// Full multi-scale PatchMatch over every view: pass 1 runs without the
/// reprojection term, later passes feed the previous pass's depth maps into
/// it. Deterministic for a fixed seed, independent of the thread count.
ReconstructionResult reconstruct(const SceneBundle& scene, const EngineParams& params);

}  // namespace segmvs
