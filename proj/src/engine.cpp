#include "segmvs/engine.hpp"

#include "segmvs/deformation.hpp"
#include "segmvs/em.hpp"
#include "segmvs/guidance.hpp"
#include "segmvs/parallel.hpp"
#include "segmvs/pfm.hpp"
#include "segmvs/refine.hpp"
#include "segmvs/rng.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace segmvs {

LayerParams make_layer_params(int index, Index fullRows, Index fullCols, double muBase, int epsilonBase) {
  LayerParams lp;
  lp.index = index;
  lp.rows = fullRows;
  lp.cols = fullCols;
  for (int k = 0; k < index; ++k) {
    lp.rows = (lp.rows + 1) / 2;
    lp.cols = (lp.cols + 1) / 2;
  }
  lp.mu = muBase * double(1 << index);
  lp.epsilon = epsilonBase << index;
  lp.maxRadius = std::max<int>(1, int(std::min(lp.rows, lp.cols) / 4));
  return lp;
}

namespace {

CameraModel halve_camera(const CameraModel& cam) {
  CameraModel out = cam;
  out.width = (cam.width + 1) / 2;
  out.height = (cam.height + 1) / 2;
  out.K(0, 0) = cam.K(0, 0) / 2.0;
  out.K(1, 1) = cam.K(1, 1) / 2.0;
  out.K(0, 1) = cam.K(0, 1) / 2.0;
  out.K(0, 2) = (cam.K(0, 2) - 0.5) / 2.0;  // pixel centers of 2x2 boxes
  out.K(1, 2) = (cam.K(1, 2) - 0.5) / 2.0;
  return out;
}

struct LayerViewData {
  CameraModel cam;
  Eigen::Matrix3d Kri = Eigen::Matrix3d::Identity();  // K^-1, rescaled so ray.z() == 1
  LayerParams lp;
  Rasterf image;
  Rasterf lap;
  Rasterf texture;
  Rasteru16 seg;
  Rasterf mono;
  OcclusionMap occ;
  Rasteri32 mapping;  // empty when deformation is off
  Rasterf restored;   // kInvalidDepth where invalid
};

struct HypMaps {
  Rasterf depth, nx, ny, nz, cost;

  void resize(Index rows, Index cols) {
    depth.resize(rows, cols);
    nx.resize(rows, cols);
    ny.resize(rows, cols);
    nz.resize(rows, cols);
    cost.resize(rows, cols);
  }

  Hypothesis get(Index r, Index c) const {
    return {double(depth(r, c)), {double(nx(r, c)), double(ny(r, c)), double(nz(r, c))}};
  }

  void set(Index r, Index c, const Hypothesis& h) {
    depth(r, c) = float(h.depth);
    nx(r, c) = float(h.normal.x());
    ny(r, c) = float(h.normal.y());
    nz(r, c) = float(h.normal.z());
  }
};

struct SrcRef {
  const LayerViewData* data = nullptr;
  WarpContext warp;
  const Rasterf* prevDepth = nullptr;  // layer-matched previous-pass depth
};

struct Evaluation {
  double cost = 0.0;
  CostTerms terms;
  bool edpValid = false;
  double photo = 2.0;
};

struct Workspace {
  std::vector<Pixel> uniquePixels;
  std::vector<Pixel> candidates;
  std::vector<double> srcCosts;
  std::vector<int> srcOrder;
  std::vector<CostTerms> srcTerms;
  std::vector<double> srcPhoto;
  std::vector<uint8_t> srcValid;
  std::vector<int> subset;
  std::vector<Hypothesis> triedHypotheses;
};

size_t raster_bytes(Index rows, Index cols, size_t bytesPerPixel) {
  return size_t(rows) * size_t(cols) * bytesPerPixel;
}

class Engine {
 public:
  Engine(const SceneBundle& scene, const EngineParams& params) : scene_(scene), P_(params) {
    if (scene.views.size() < 2)
      throw std::runtime_error("reconstruct: multi-view stereo needs at least 2 views");
    if (P_.eta * 4.0 > 1.0)
      throw std::runtime_error("reconstruct: eta * 4 > 1 leaves no feasible weight simplex");
    if (P_.layers < 1 || P_.passes < 1 || P_.sweeps < 0)
      throw std::runtime_error("reconstruct: layers/passes/sweeps out of range");
    if (P_.rayCount % 2 != 0 || P_.rayCount < 4)
      throw std::runtime_error("reconstruct: ray count must be even and >= 4");
  }

  ReconstructionResult run() {
    const auto t0 = std::chrono::steady_clock::now();
    build_restoration();
    build_pyramids();

    const size_t nViews = scene_.views.size();
    result_.views.resize(nViews);
    std::vector<Rasterf> prevDepth(nViews);  // full-res maps from the previous pass

    for (int pass = 1; pass <= P_.passes; ++pass) {
      prevLayerDepth_.assign(nViews, {});
      if (pass >= 2) {
        for (size_t v = 0; v < nViews; ++v) {
          prevLayerDepth_[v].resize(size_t(P_.layers));
          Rasterf current = prevDepth[v];
          for (int n = 0; n < P_.layers; ++n) {
            prevLayerDepth_[v][size_t(n)] = current;
            current = downsample_nearest(current);
          }
        }
      }
      std::vector<Rasterf> pending(nViews);
      for (size_t v = 0; v < nViews; ++v) {
        ViewResult res = solve_view(int(v), pass);
        pending[v] = res.depth;
        result_.views[v] = std::move(res);
      }
      prevDepth = std::move(pending);
    }

    result_.runtimeSeconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result_.rasterBytes = rasterBytes_;
    return std::move(result_);
  }

 private:
  void build_restoration() {
    const size_t nViews = scene_.views.size();
    result_.restored.resize(nViews);
    if (!P_.stages.restorationInit && !P_.stages.restorationSupervision) {
      for (size_t v = 0; v < nViews; ++v) {
        const ViewBundle& view = scene_.views[v];
        result_.restored[v].depth =
            Rasterf::Constant(view.camera.height, view.camera.width, kInvalidDepth);
        result_.restored[v].tag = Raster<uint8_t>::Zero(view.camera.height, view.camera.width);
      }
      return;
    }
    RestorationParams rp;
    rp.gamma = P_.gamma;
    rp.kappa = P_.kappa;
    rp.seed = P_.seed;
    parallel_for(0, long(nViews), P_.threads, [&](long v) {
      result_.restored[size_t(v)] = restore(scene_.views[size_t(v)], scene_.sparse, int(v), rp);
    });
  }

  void build_pyramids() {
    const size_t nViews = scene_.views.size();
    data_.assign(nViews, {});
    const EdgePolicy policy{P_.epsilonBase};
    for (size_t v = 0; v < nViews; ++v) data_[v].resize(size_t(P_.layers));

    parallel_for(0, long(nViews), P_.threads, [&](long vi) {
      const size_t v = size_t(vi);
      const ViewBundle& view = scene_.views[v];
      Rasterf image = view.image.cast<float>();
      Rasterf mono = view.monoDepth;
      Rasteru16 seg = view.segmentation;
      Rasterf restored = result_.restored[v].depth;
      CameraModel cam = view.camera;

      for (int n = 0; n < P_.layers; ++n) {
        LayerViewData& d = data_[v][size_t(n)];
        d.cam = cam;
        d.Kri = cam.K.inverse();
        d.Kri /= d.Kri(2, 2);
        d.lp = make_layer_params(n, view.segmentation.rows(), view.segmentation.cols(), P_.muBase,
                                 P_.epsilonBase);
        d.image = image;
        d.lap = laplacian_filter(image);
        d.texture = compute_textureness(image, P_.window);
        d.seg = seg;
        d.mono = mono;
        d.restored = restored;

        const Rasteru8 boundary = extract_boundary(seg);
        if (P_.stages.occlusion) {
          d.occ = compute_occlusion_map(boundary, normalize_range(mono, 255.0), P_.window, P_.delta,
                                        P_.sigma);
        } else {
          // Single strict constraint: every boundary pixel impassable.
          d.occ.label = Raster<uint8_t>::Zero(seg.rows(), seg.cols());
          for (Index r = 0; r < seg.rows(); ++r)
            for (Index c = 0; c < seg.cols(); ++c)
              if (boundary(r, c)) d.occ.label(r, c) = uint8_t(EdgeLabel::Discontinuous);
          d.occ.cluster = Rasteri32::Constant(seg.rows(), seg.cols(), -1);
        }
        if (!P_.stages.strictEdges) {
          for (Index r = 0; r < seg.rows(); ++r)
            for (Index c = 0; c < seg.cols(); ++c)
              if (d.occ.label(r, c) == uint8_t(EdgeLabel::Discontinuous))
                d.occ.label(r, c) = uint8_t(EdgeLabel::Continuous);
        }
        if (P_.stages.deformation)
          d.mapping = compute_mapping_field(d.texture, d.occ, policy, P_.window, n);

        if (n + 1 < P_.layers) {
          image = downsample_mean(image);
          mono = downsample_mean(mono);
          seg = downsample_nearest(seg);
          restored = downsample_nearest(restored);
          cam = halve_camera(cam);
        }
      }
    });

    for (size_t v = 0; v < nViews; ++v)
      for (const LayerViewData& d : data_[v])
        rasterBytes_ += raster_bytes(d.lp.rows, d.lp.cols, 4 * 5 + 2 + 1 + 4 + 4 + 4);
  }

  // --- per-view solving ---------------------------------------------------

  struct LayerCtx {
    const LayerViewData* ref = nullptr;
    std::vector<SrcRef> srcs;
    std::vector<const Rasterf*> coarsePhoto;  // photoAgg of coarser layers, nearest first
    const EngineParams* P = nullptr;
    CostWeights weights;
    int kBestViews = 1;
    int pass = 1;
    double depthMin = 0.0, depthMax = 0.0;
    EdgePolicy policy;
  };

  static Eigen::Vector3d pixel_ray(const LayerViewData& d, double u, double v) {
    return d.Kri * Eigen::Vector3d(u, v, 1.0);
  }

  double coarse_matching_sum(const LayerCtx& ctx, Index r, Index c) const {
    double coarseSum = 0.0;
    for (size_t k = 0; k < ctx.coarsePhoto.size(); ++k) {
      const Rasterf& coarse = *ctx.coarsePhoto[k];
      const Index cr = std::min<Index>(r >> (k + 1), coarse.rows() - 1);
      const Index cc = std::min<Index>(c >> (k + 1), coarse.cols() - 1);
      coarseSum += double(coarse(cr, cc));
    }
    return coarseSum;
  }

  /// Terms of one source view; invisible sources carry maximal matching terms.
  void eval_one_source(const LayerCtx& ctx, size_t j, Index r, Index c, const Hypothesis& h,
                       const Eigen::Vector3d& Xc, const PatchSampleValues& samples, double edp,
                       double coarseSum, Workspace& ws) const {
    const LayerViewData& ref = *ctx.ref;
    const double tau = ctx.P->tau;
    const int nCoarse = int(ctx.coarsePhoto.size());
    const SrcRef& src = ctx.srcs[j];

    // A source view only measures when it can see the hypothesized point.
    const Eigen::Vector3d Xs = src.warp.Rrel * Xc + src.warp.trel;
    bool visible = Xs.z() > 0.0;
    double sx = 0.0, sy = 0.0;
    if (visible) {
      const Eigen::Vector3d proj = src.warp.Ks * Xs;
      sx = proj.x() / proj.z();
      sy = proj.y() / proj.z();
      visible = sx >= 0.0 && sy >= 0.0 && sx <= double(src.data->image.cols() - 1) &&
                sy <= double(src.data->image.rows() - 1);
    }
    if (!visible) {
      ws.srcTerms[j] = {1.0, ctx.pass >= 2 ? 1.0 : 0.0, 1.0, edp};
      ws.srcPhoto[j] = 2.0;
      ws.srcValid[j] = 0;
      return;
    }

    const Eigen::Matrix3d H = plane_homography(src.warp, double(c), double(r), h);
    const double photo = photometric_cost(src.data->image, H, samples);
    const double cm = (photo + coarseSum) / (1 + nCoarse);
    const double ecl = color_gradient_error(ref.lap, src.data->lap, {r, c}, sx, sy, tau);
    double ere = 0.0;
    if (src.prevDepth != nullptr)
      ere = reprojection_error(ref.cam, src.data->cam, double(c), double(r), h.depth, *src.prevDepth, tau);
    ws.srcTerms[j] = normalized_terms(cm, ere, ecl, edp, tau);
    ws.srcPhoto[j] = photo;
    ws.srcValid[j] = 1;
  }

  /// Per-source terms of a hypothesis over the full source list.
  void evaluate_per_source(const LayerCtx& ctx, Index r, Index c, const Hypothesis& h,
                           const PatchSampleValues& samples, double edp, Workspace& ws) const {
    const size_t nsrc = ctx.srcs.size();
    ws.srcTerms.resize(nsrc);
    ws.srcPhoto.resize(nsrc);
    ws.srcValid.resize(nsrc);
    const double coarseSum = coarse_matching_sum(ctx, r, c);
    const Eigen::Vector3d Xc = pixel_ray(*ctx.ref, double(c), double(r)) * h.depth;
    for (size_t j = 0; j < nsrc; ++j) eval_one_source(ctx, j, r, c, h, Xc, samples, edp, coarseSum, ws);
  }

  Evaluation combine_subset(const LayerCtx& ctx, const Workspace& ws, double edp, bool edpValid) const {
    Evaluation out;
    out.edpValid = edpValid;
    if (ws.subset.empty()) {
      out.terms = {1.0, ctx.pass >= 2 ? 1.0 : 0.0, 1.0, edp};
      out.photo = 2.0;
      out.cost = aggregated_cost(out.terms, ctx.weights);
      return out;
    }
    CostTerms combined;
    double photoSum = 0.0;
    for (const int j : ws.subset) {
      const CostTerms& t = ws.srcTerms[size_t(j)];
      combined.matching += t.matching;
      combined.reprojection += t.reprojection;
      combined.colorGradient += t.colorGradient;
      combined.depthDifference += t.depthDifference;
      photoSum += ws.srcPhoto[size_t(j)];
    }
    const double n = double(ws.subset.size());
    combined.matching /= n;
    combined.reprojection /= n;
    combined.colorGradient /= n;
    combined.depthDifference /= n;
    out.terms = combined;
    out.photo = photoSum / n;
    out.cost = aggregated_cost(combined, ctx.weights);
    return out;
  }

  double edp_term(const LayerCtx& ctx, Index r, Index c, const Hypothesis& h, bool& valid) const {
    const float restoredDepth = ctx.ref->restored(r, c);
    valid = ctx.P->stages.restorationSupervision && restoredDepth > 0.0f;
    return valid ? double(depth_difference_error(h.depth, double(restoredDepth), ctx.ref->lp.mu)) : 0.0;
  }

  /// View selection per pixel: the best ceil(60%) visible sources under the
  /// incumbent hypothesis; every candidate is then judged on this subset.
  void select_views(const LayerCtx& ctx, Workspace& ws) const {
    ws.srcOrder.clear();
    ws.srcCosts.resize(ctx.srcs.size());
    for (size_t j = 0; j < ctx.srcs.size(); ++j) {
      if (!ws.srcValid[j]) continue;
      ws.srcCosts[j] = aggregated_cost(ws.srcTerms[j], ctx.weights);
      ws.srcOrder.push_back(int(j));
    }
    std::sort(ws.srcOrder.begin(), ws.srcOrder.end(), [&](int a, int b) {
      return ws.srcCosts[size_t(a)] < ws.srcCosts[size_t(b)] ||
             (ws.srcCosts[size_t(a)] == ws.srcCosts[size_t(b)] && a < b);
    });
    const int kBest = std::min<int>(ctx.kBestViews, int(ws.srcOrder.size()));
    ws.subset.assign(ws.srcOrder.begin(), ws.srcOrder.begin() + kBest);
    std::sort(ws.subset.begin(), ws.subset.end());
  }

  /// Evaluation of a candidate on the pixel's fixed view subset.
  Evaluation evaluate_on_subset(const LayerCtx& ctx, Index r, Index c, const Hypothesis& h,
                                const PatchSampleValues& samples, Workspace& ws) const {
    bool edpValid = false;
    const double edp = edp_term(ctx, r, c, h, edpValid);
    const double coarseSum = coarse_matching_sum(ctx, r, c);
    const Eigen::Vector3d Xc = pixel_ray(*ctx.ref, double(c), double(r)) * h.depth;
    for (const int j : ws.subset)
      eval_one_source(ctx, size_t(j), r, c, h, Xc, samples, edp, coarseSum, ws);
    return combine_subset(ctx, ws, edp, edpValid);
  }

  /// Depth induced at pixel p by the plane of the hypothesis at q.
  Hypothesis propagate_plane(const LayerCtx& ctx, const Hypothesis& atQ, Index qr, Index qc, Index pr,
                             Index pc) const {
    const LayerViewData& ref = *ctx.ref;
    const Eigen::Vector3d rayQ = pixel_ray(ref, double(qc), double(qr));
    const Eigen::Vector3d rayP = pixel_ray(ref, double(pc), double(pr));
    const double offset = atQ.normal.dot(rayQ * atQ.depth);
    const double denom = atQ.normal.dot(rayP);
    double depth = atQ.depth;
    if (std::abs(denom) > 1e-12) {
      const double induced = offset / denom;
      if (std::isfinite(induced) && induced > 0.0) depth = induced;
    }
    depth = std::clamp(depth, ctx.depthMin, ctx.depthMax);
    return {depth, atQ.normal};
  }

  void build_square_patch(const LayerViewData& ref, Index r, Index c, std::vector<Pixel>& pixels) const {
    const Index radius = P_.window / 2;
    pixels.clear();
    for (Index rr = std::max<Index>(0, r - radius); rr <= std::min(ref.lp.rows - 1, r + radius); ++rr)
      for (Index cc = std::max<Index>(0, c - radius); cc <= std::min(ref.lp.cols - 1, c + radius); ++cc)
        pixels.push_back({rr, cc});
  }

  void square_neighbors(const LayerViewData& ref, Index r, Index c, std::vector<Pixel>& out) const {
    out.clear();
    for (Index dr = -1; dr <= 1; ++dr)
      for (Index dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const Index rr = r + dr, cc = c + dc;
        if (rr >= 0 && rr < ref.lp.rows && cc >= 0 && cc < ref.lp.cols) out.push_back({rr, cc});
      }
  }

  ViewResult solve_view(int viewIdx, int pass) {
    const size_t nViews = scene_.views.size();
    const size_t nsrc = nViews - 1;
    const int kBest = int((3 * nsrc + 4) / 5);  // ceil(0.6 * nsrc)

    HypMaps hyp;
    Rasterf termM, termR, termC, termD, photoAgg, prevCost, adoptCost;
    Rasteru8 edpValid;
    std::vector<Rasterf> frozenPhoto;  // per completed coarser layer, finest-first

    CostWeights weights;
    std::array<bool, 4> active{};
    bool weightsReady = false;

    for (int layer = P_.layers - 1; layer >= 0; --layer) {
      const LayerViewData& ref = data_[size_t(viewIdx)][size_t(layer)];
      const Index rows = ref.lp.rows, cols = ref.lp.cols;

      LayerCtx ctx;
      ctx.ref = &ref;
      ctx.P = &P_;
      ctx.pass = pass;
      ctx.kBestViews = kBest;
      ctx.depthMin = scene_.depthMin;
      ctx.depthMax = scene_.depthMax;
      ctx.policy = EdgePolicy{P_.epsilonBase};
      for (size_t s = 0; s < nViews; ++s) {
        if (int(s) == viewIdx) continue;
        SrcRef src;
        src.data = &data_[s][size_t(layer)];
        src.warp = make_warp_context(ref.cam, src.data->cam);
        src.prevDepth =
            pass >= 2 && !prevLayerDepth_[s].empty() ? &prevLayerDepth_[s][size_t(layer)] : nullptr;
        ctx.srcs.push_back(src);
      }
      for (const Rasterf& f : frozenPhoto) ctx.coarsePhoto.push_back(&f);

      // Active terms: E_re needs previous-pass maps; E_dp needs any valid
      // restored depth under supervision.
      bool anyRestored = false;
      if (P_.stages.restorationSupervision)
        for (Index r = 0; r < rows && !anyRestored; ++r)
          for (Index c = 0; c < cols && !anyRestored; ++c) anyRestored = ref.restored(r, c) > 0.0f;
      active = {true, pass >= 2, true, anyRestored};

      if (!weightsReady) {
        weights = initial_weights(active);
        weightsReady = true;
      } else {
        weights = remask_weights(weights, active);
      }
      ctx.weights = weights;

      // Initialization: coarsest layer from the restored map (or random),
      // finer layers from the coarser result.
      const bool fresh = layer == P_.layers - 1;
      HypMaps next;
      next.resize(rows, cols);
      next.cost.setConstant(1.0f);  // placeholder until the evaluation pass runs
      if (fresh) {
        init_hypotheses(ref, viewIdx, pass, next);
      } else {
        for (Index r = 0; r < rows; ++r)
          for (Index c = 0; c < cols; ++c) {
            Hypothesis h = hyp.get(std::min(r / 2, hyp.depth.rows() - 1),
                                   std::min(c / 2, hyp.depth.cols() - 1));
            const Eigen::Vector3d ray = pixel_ray(ref, double(c), double(r));
            if (!(h.normal.dot(ray) < 0.0)) h.normal = -ray.normalized();
            next.set(r, c, h);
          }
      }
      hyp = std::move(next);

      termM.resize(rows, cols);
      termR.resize(rows, cols);
      termC.resize(rows, cols);
      termD.resize(rows, cols);
      photoAgg.resize(rows, cols);
      prevCost.resize(rows, cols);
      adoptCost.resize(rows, cols);
      edpValid.resize(rows, cols);

      // Evaluation-only pass: costs and term statistics of the initialization.
      {
        HypMaps snapshot = hyp;
        parallel_for(0, long(rows), P_.threads, [&](long r) {
          static thread_local Workspace ws;
          for (Index c = 0; c < cols; ++c)
            update_pixel(ctx, snapshot, hyp, termM, termR, termC, termD, edpValid, photoAgg, prevCost,
                         adoptCost, Index(r), c, pass, layer, 0, viewIdx, ws, /*evaluateOnly=*/true);
        });
      }

      for (int sweep = 1; sweep <= P_.sweeps; ++sweep) {
        ctx.weights = weights;
        for (int color = 0; color < 2; ++color) {
          HypMaps snapshot = hyp;
          parallel_for(0, long(rows), P_.threads, [&](long r) {
            static thread_local Workspace ws;
            const Index start = (Index(r) % 2 == color) ? 0 : 1;
            for (Index c = start; c < cols; c += 2)
              update_pixel(ctx, snapshot, hyp, termM, termR, termC, termD, edpValid, photoAgg, prevCost,
                           adoptCost, Index(r), c, pass, layer, sweep, viewIdx, ws,
                           /*evaluateOnly=*/false);
          });
        }

        // Deterministic row-major reductions.
        double sumPrev = 0.0, sumAdopt = 0.0;
        double sumM = 0.0, sumR = 0.0, sumC = 0.0, sumD = 0.0;
        long nPixels = 0, nEdp = 0;
        for (Index r = 0; r < rows; ++r)
          for (Index c = 0; c < cols; ++c) {
            sumPrev += double(prevCost(r, c));
            sumAdopt += double(adoptCost(r, c));
            sumM += double(termM(r, c));
            sumR += double(termR(r, c));
            sumC += double(termC(r, c));
            if (edpValid(r, c)) {
              sumD += double(termD(r, c));
              ++nEdp;
            }
            ++nPixels;
          }
        result_.sweepLog.push_back(
            {viewIdx, pass, layer, sweep, sumPrev / double(nPixels), sumAdopt / double(nPixels)});

        std::array<double, 4> means{sumM / double(nPixels), sumR / double(nPixels),
                                    sumC / double(nPixels), nEdp > 0 ? sumD / double(nEdp) : 0.0};
        std::array<bool, 4> mActive = active;
        mActive[3] = active[3] && nEdp > 0;
        weights = em_update_weights(means, mActive, P_.eta);
        result_.mSteps.push_back({viewIdx, pass, layer, sweep, weights, mActive, means});
      }

      frozenPhoto.insert(frozenPhoto.begin(), photoAgg);
    }

    ViewResult res;
    res.depth = hyp.depth;
    res.normal = {hyp.nx, hyp.ny, hyp.nz};
    return res;
  }

  CostWeights initial_weights(const std::array<bool, 4>& active) const {
    std::array<double, 4> w = P_.initialWeights;
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) {
      if (!active[size_t(k)]) w[size_t(k)] = 0.0;
      sum += w[size_t(k)];
    }
    if (sum <= 0.0) throw std::runtime_error("reconstruct: initial weights sum to zero");
    return {w[0] / sum, w[1] / sum, w[2] / sum, w[3] / sum};
  }

  static CostWeights remask_weights(const CostWeights& weights, const std::array<bool, 4>& active) {
    std::array<double, 4> w{weights.m, weights.r, weights.c, weights.d};
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) {
      if (!active[size_t(k)]) w[size_t(k)] = 0.0;
      if (active[size_t(k)] && w[size_t(k)] <= 0.0) w[size_t(k)] = 1e-3;  // term just became active
      sum += w[size_t(k)];
    }
    return {w[0] / sum, w[1] / sum, w[2] / sum, w[3] / sum};
  }

  void init_hypotheses(const LayerViewData& ref, int viewIdx, int pass, HypMaps& maps) const {
    const Index rows = ref.lp.rows, cols = ref.lp.cols;
    parallel_for(0, long(rows), P_.threads, [&](long ri) {
      const Index r = Index(ri);
      for (Index c = 0; c < cols; ++c) {
        const Eigen::Vector3d ray = pixel_ray(ref, double(c), double(r));
        const float restored = P_.stages.restorationInit ? ref.restored(r, c) : kInvalidDepth;
        Hypothesis h;
        if (restored > 0.0f) {
          h.depth = std::clamp(double(restored), scene_.depthMin, scene_.depthMax);
          h.normal = restored_normal(ref, r, c, ray);
        } else {
          SplitMix64 rng(hash_mix(P_.seed, 0xA11Cu, uint64_t(viewIdx), uint64_t(pass),
                                  uint64_t(ref.lp.index), uint64_t(r), uint64_t(c)));
          h.depth = rng.uniform(scene_.depthMin, scene_.depthMax);
          h.normal = random_facing_normal(rng, ray);
        }
        maps.set(r, c, h);
      }
    });
  }

  Eigen::Vector3d restored_normal(const LayerViewData& ref, Index r, Index c,
                                  const Eigen::Vector3d& ray) const {
    auto camPoint = [&](Index rr, Index cc) -> std::pair<bool, Eigen::Vector3d> {
      if (!in_bounds(ref.restored, rr, cc) || !(ref.restored(rr, cc) > 0.0f)) return {false, {}};
      const Eigen::Vector3d p = pixel_ray(ref, double(cc), double(rr)) * double(ref.restored(rr, cc));
      return {true, p};
    };
    const auto left = camPoint(r, c - 1), right = camPoint(r, c + 1);
    const auto up = camPoint(r - 1, c), down = camPoint(r + 1, c);
    const auto center = camPoint(r, c);
    const Eigen::Vector3d fronto = -ray.normalized();
    if (!center.first) return fronto;
    const Eigen::Vector3d dx = (right.first ? right.second : center.second) -
                               (left.first ? left.second : center.second);
    const Eigen::Vector3d dy = (down.first ? down.second : center.second) -
                               (up.first ? up.second : center.second);
    Eigen::Vector3d n = dx.cross(dy);
    if (n.norm() < 1e-12) return fronto;
    n.normalize();
    if (n.dot(ray) > 0.0) n = -n;
    if (!(n.dot(ray) < -1e-3)) return fronto;  // grazing fit, keep it stable
    return n;
  }

  static Eigen::Vector3d random_facing_normal(SplitMix64& rng, const Eigen::Vector3d& ray) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      const double z = rng.uniform(-1.0, 1.0);
      const double phi = rng.uniform(0.0, 2.0 * M_PI);
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      Eigen::Vector3d n(s * std::cos(phi), s * std::sin(phi), z);
      if (n.dot(ray) > 0.0) n = -n;
      if (n.dot(ray) < -0.05) return n;
    }
    return -ray.normalized();
  }

  void update_pixel(const LayerCtx& ctx, const HypMaps& snapshot, HypMaps& live, Rasterf& termM,
                    Rasterf& termR, Rasterf& termC, Rasterf& termD, Rasteru8& edpValid, Rasterf& photoAgg,
                    Rasterf& prevCost, Rasterf& adoptCost, Index r, Index c, int pass, int layer,
                    int sweep, int viewIdx, Workspace& ws, bool evaluateOnly) {
    const LayerViewData& ref = *ctx.ref;

    // Patch construction (sample set and propagation sources).
    std::vector<Trajectory> trajectories;
    double sigmaSpatial = P_.window / 4.0;
    if (P_.stages.deformation) {
      trajectories =
          diffuse_trajectories({r, c}, P_.rayCount, ref.occ, ctx.policy, ref.lp.maxRadius, layer);
      const auto samples = allocate_samples(trajectories, snapshot.cost, ref.mapping);
      ws.uniquePixels.clear();
      for (const PatchSample& s : samples) {
        bool seen = false;
        for (const Pixel& p : ws.uniquePixels)
          if (p == s.pixel) {
            seen = true;
            break;
          }
        if (!seen) ws.uniquePixels.push_back(s.pixel);
      }
      double meanLen = 0.0;
      for (const Trajectory& t : trajectories) meanLen += double(t.length());
      meanLen /= double(trajectories.size());
      sigmaSpatial = std::max(0.5, meanLen / 2.0);
    } else {
      build_square_patch(ref, r, c, ws.uniquePixels);
    }
    const PatchSampleValues sampleValues =
        build_sample_values(ref.image, {r, c}, ws.uniquePixels, sigmaSpatial, 10.0);

    // View selection under the incumbent, then every candidate is judged on
    // the same subset.
    const Hypothesis incumbent = snapshot.get(r, c);
    bool edpValidInc = false;
    const double edpInc = edp_term(ctx, r, c, incumbent, edpValidInc);
    evaluate_per_source(ctx, r, c, incumbent, sampleValues, edpInc, ws);
    select_views(ctx, ws);
    Evaluation bestEval = combine_subset(ctx, ws, edpInc, edpValidInc);
    Hypothesis best = incumbent;
    prevCost(r, c) = float(bestEval.cost);

    if (!evaluateOnly) {
      // Propagation: adopt the lowest-cost candidate plane, incumbent included.
      if (P_.stages.deformation)
        ws.candidates = propagation_candidates(trajectories, snapshot.cost);
      else
        square_neighbors(ref, r, c, ws.candidates);

      const Eigen::Vector3d rayP = pixel_ray(ref, double(c), double(r));
      ws.triedHypotheses.clear();
      ws.triedHypotheses.push_back(incumbent);
      for (const Pixel& q : ws.candidates) {
        if (q.row == r && q.col == c) continue;
        const Hypothesis h =
            propagate_plane(ctx, snapshot.get(q.row, q.col), q.row, q.col, r, c);
        if (!hypothesis_valid(h, ctx.depthMin, ctx.depthMax, rayP)) continue;
        bool dup = false;
        for (const Hypothesis& t : ws.triedHypotheses)
          if (t.depth == h.depth && t.normal == h.normal) {
            dup = true;
            break;
          }
        if (dup) continue;
        ws.triedHypotheses.push_back(h);
        const Evaluation e = evaluate_on_subset(ctx, r, c, h, sampleValues, ws);
        if (e.cost < bestEval.cost) {
          bestEval = e;
          best = h;
        }
      }

      // Spherical gradient refinement around the winner.
      SplitMix64 rng(hash_mix(P_.seed, 0x5eedu, uint64_t(viewIdx), uint64_t(pass), uint64_t(layer),
                              uint64_t(sweep), uint64_t(r), uint64_t(c)));
      const std::pair<double, double> interval{best.depth * (1.0 - ref.lp.mu),
                                               best.depth * (1.0 + ref.lp.mu)};
      const RefineResult refined = spherical_gradient_refine(
          best,
          [&](const Hypothesis& h) { return evaluate_on_subset(ctx, r, c, h, sampleValues, ws).cost; },
          interval, rayP, ctx.depthMin, ctx.depthMax, rng);
      if (refined.improved) {
        best = refined.hypothesis;
        bestEval = evaluate_on_subset(ctx, r, c, best, sampleValues, ws);
      }
    }

    live.set(r, c, best);
    live.cost(r, c) = float(bestEval.cost);
    adoptCost(r, c) = float(bestEval.cost);
    termM(r, c) = float(bestEval.terms.matching);
    termR(r, c) = float(bestEval.terms.reprojection);
    termC(r, c) = float(bestEval.terms.colorGradient);
    termD(r, c) = float(bestEval.terms.depthDifference);
    edpValid(r, c) = bestEval.edpValid ? 1 : 0;
    photoAgg(r, c) = float(bestEval.photo);
  }

  const SceneBundle& scene_;
  const EngineParams& P_;
  std::vector<std::vector<LayerViewData>> data_;  // [view][layer]
  std::vector<std::vector<Rasterf>> prevLayerDepth_;
  ReconstructionResult result_;
  size_t rasterBytes_ = 0;
};

}  // namespace

ReconstructionResult reconstruct(const SceneBundle& scene, const EngineParams& params) {
  Engine engine(scene, params);
  return engine.run();
}

}  // namespace segmvs
