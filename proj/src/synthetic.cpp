#include "segmvs/synthetic.hpp"

#include "segmvs/pfm.hpp"
#include "segmvs/rng.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace segmvs {

namespace {

double lattice_hash(uint64_t seed, int64_t ix, int64_t iy) {
  SplitMix64 g(hash_mix(seed, uint64_t(ix) * 0x100000001b3ULL + uint64_t(iy)));
  return g.uniform();
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

/// Smooth value noise in [0, 1]; a view-independent function of the surface
/// point, so renderings stay photo-consistent across the ring.
double value_noise(uint64_t seed, double x, double y) {
  const double fx = std::floor(x), fy = std::floor(y);
  const int64_t ix = int64_t(fx), iy = int64_t(fy);
  const double tx = smoothstep(x - fx), ty = smoothstep(y - fy);
  const double v00 = lattice_hash(seed, ix, iy), v01 = lattice_hash(seed, ix + 1, iy);
  const double v10 = lattice_hash(seed, ix, iy + 1), v11 = lattice_hash(seed, ix + 1, iy + 1);
  return (1.0 - ty) * ((1.0 - tx) * v00 + tx * v01) + ty * ((1.0 - tx) * v10 + tx * v11);
}

double surface_intensity(const SynthSpec& spec, size_t surfaceIdx, double x, double y) {
  const SynthSurface& s = spec.surfaces[surfaceIdx];
  if (s.textureDensity <= 0.0) return 128.0;
  const uint64_t seed = hash_mix(spec.seed, 0x7e57u, surfaceIdx);
  const double f = spec.textureFrequency;
  const double n = 0.72 * value_noise(seed, x * f, y * f) +
                   0.28 * value_noise(seed ^ 0xabcd, x * 2.0 * f, y * 2.0 * f);
  return std::clamp(128.0 + s.textureDensity * 240.0 * (n - 0.5), 0.0, 255.0);
}

bool on_surface(const SynthSurface& s, double x, double y) {
  return std::abs(x - s.centerX) <= s.halfWidth && std::abs(y - s.centerY) <= s.halfHeight;
}

/// Index of the front-most surface hit by the ray through pixel (u, v); -1 if none.
int trace(const SynthSpec& spec, const CameraModel& cam, const Eigen::Vector3d& camCenter, double u,
          double v) {
  const double dx = (u - cam.K(0, 2)) / cam.K(0, 0);
  const double dy = (v - cam.K(1, 2)) / cam.K(1, 1);
  int best = -1;
  double bestZ = std::numeric_limits<double>::max();
  for (size_t s = 0; s < spec.surfaces.size(); ++s) {
    const double z = spec.surfaces[s].depth;  // camera z = 0, so depth along ray = plane z
    if (z <= 0.0 || z >= bestZ) continue;
    const double x = camCenter.x() + dx * z;
    const double y = camCenter.y() + dy * z;
    if (on_surface(spec.surfaces[s], x, y)) {
      best = int(s);
      bestZ = z;
    }
  }
  return best;
}

double mono_of_depth(const SynthSpec& spec, int surfaceIdx, double gtDepth) {
  double a = spec.monoA, b = spec.monoB;
  if (spec.monoMode == MonoMode::PerInstanceAffine && surfaceIdx >= 0) {
    a += 0.1 * (surfaceIdx + 1);
    b += 0.2 * (surfaceIdx + 1);
  }
  return a * gtDepth + b;
}

}  // namespace

SyntheticScene generate_synthetic_scene(const SynthSpec& spec) {
  if (spec.surfaces.empty()) throw std::runtime_error("synthetic scene: no surfaces given");
  if (spec.views < 2) throw std::runtime_error("synthetic scene: need at least 2 views");
  if (spec.width < 2 || spec.height < 2) throw std::runtime_error("synthetic scene: raster too small");
  for (size_t i = 0; i < spec.surfaces.size(); ++i) {
    if (spec.surfaces[i].depth <= 0.0) throw std::runtime_error("synthetic scene: surface depth must be > 0");
    for (size_t j = i + 1; j < spec.surfaces.size(); ++j) {
      const SynthSurface &a = spec.surfaces[i], &b = spec.surfaces[j];
      const bool overlap = std::abs(a.centerX - b.centerX) < a.halfWidth + b.halfWidth &&
                           std::abs(a.centerY - b.centerY) < a.halfHeight + b.halfHeight;
      if (overlap && std::abs(a.depth - b.depth) < 1e-12)
        throw std::runtime_error("synthetic scene: surfaces " + std::to_string(i) + " and " +
                                 std::to_string(j) + " overlap at the same depth (ambiguous front face)");
    }
  }

  SyntheticScene out;
  SceneBundle& scene = out.scene;

  std::vector<Eigen::Vector3d> centers;
  for (int v = 0; v < spec.views; ++v) {
    const double angle = 2.0 * M_PI * v / spec.views;
    centers.emplace_back(spec.ringRadius * std::cos(angle), spec.ringRadius * std::sin(angle), 0.0);
  }

  for (int v = 0; v < spec.views; ++v) {
    ViewBundle view;
    view.name = "view" + std::to_string(v);
    CameraModel& cam = view.camera;
    cam.width = spec.width;
    cam.height = spec.height;
    cam.K << spec.focal, 0, (spec.width - 1) / 2.0, 0, spec.focal, (spec.height - 1) / 2.0, 0, 0, 1;
    cam.R = Eigen::Matrix3d::Identity();
    cam.T = -centers[size_t(v)];

    view.image.resize(spec.height, spec.width);
    view.segmentation.resize(spec.height, spec.width);
    view.monoDepth.resize(spec.height, spec.width);
    Rasterf gt(spec.height, spec.width);

    double maxDepth = 0.0;
    for (const SynthSurface& s : spec.surfaces) maxDepth = std::max(maxDepth, s.depth);

    for (Index r = 0; r < spec.height; ++r) {
      for (Index c = 0; c < spec.width; ++c) {
        const int hit = trace(spec, cam, centers[size_t(v)], double(c), double(r));
        if (hit < 0) {
          view.image(r, c) = 0;
          view.segmentation(r, c) = 0;
          gt(r, c) = kInvalidDepth;
          view.monoDepth(r, c) = float(mono_of_depth(spec, -1, maxDepth));
          continue;
        }
        const SynthSurface& s = spec.surfaces[size_t(hit)];
        // 3x3 supersampling keeps the rendering close to band-limited, so
        // bilinear resampling during matching stays photo-consistent.
        double intensity = 0.0;
        for (int sr = -1; sr <= 1; ++sr)
          for (int sc = -1; sc <= 1; ++sc) {
            const double u = double(c) + sc / 3.0, vv = double(r) + sr / 3.0;
            const int sub = trace(spec, cam, centers[size_t(v)], u, vv);
            const size_t sIdx = sub >= 0 ? size_t(sub) : size_t(hit);
            const double z = spec.surfaces[sIdx].depth;
            const double x = centers[size_t(v)].x() + (u - cam.K(0, 2)) / spec.focal * z;
            const double y = centers[size_t(v)].y() + (vv - cam.K(1, 2)) / spec.focal * z;
            intensity += sub >= 0 ? surface_intensity(spec, sIdx, x, y) : 0.0;
          }
        view.image(r, c) = uint8_t(std::lround(intensity / 9.0));
        view.segmentation(r, c) = uint16_t(hit + 1);
        gt(r, c) = float(s.depth);
        view.monoDepth(r, c) = float(mono_of_depth(spec, hit, s.depth));
      }
    }
    scene.views.push_back(std::move(view));
    out.gtDepth.push_back(std::move(gt));
  }

  // Sparse points: explicit per-surface counts, plus a texture-weighted global
  // pool distributed over textured surfaces.
  std::vector<int> counts(spec.surfaces.size(), 0);
  double weightSum = 0.0;
  for (const SynthSurface& s : spec.surfaces)
    if (s.sparsePoints < 0 && s.textureDensity > 0.0)
      weightSum += s.textureDensity * s.halfWidth * s.halfHeight;
  int assigned = 0;
  int lastWeighted = -1;
  for (size_t i = 0; i < spec.surfaces.size(); ++i) {
    const SynthSurface& s = spec.surfaces[i];
    if (s.sparsePoints >= 0) {
      counts[i] = s.sparsePoints;
    } else if (s.textureDensity > 0.0 && weightSum > 0.0 && spec.globalSparsePoints > 0) {
      counts[i] = int(std::floor(spec.globalSparsePoints * s.textureDensity * s.halfWidth * s.halfHeight /
                                 weightSum));
      assigned += counts[i];
      lastWeighted = int(i);
    }
  }
  if (lastWeighted >= 0) counts[size_t(lastWeighted)] += spec.globalSparsePoints - assigned;

  for (size_t sIdx = 0; sIdx < spec.surfaces.size(); ++sIdx) {
    const SynthSurface& s = spec.surfaces[sIdx];
    SplitMix64 rng(hash_mix(spec.seed, 0x5a5au, sIdx));
    for (int k = 0; k < counts[sIdx]; ++k) {
      SparsePoint point;
      bool placed = false;
      for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
        const double x = rng.uniform(s.centerX - s.halfWidth, s.centerX + s.halfWidth);
        const double y = rng.uniform(s.centerY - s.halfHeight, s.centerY + s.halfHeight);
        point.position = {x, y, s.depth};
        point.observations.clear();
        for (int v = 0; v < spec.views; ++v) {
          const CameraModel& cam = scene.views[size_t(v)].camera;
          const Eigen::Vector3d proj = project(cam, point.position);
          if (proj.x() < 1.0 || proj.y() < 1.0 || proj.x() > spec.width - 2.0 ||
              proj.y() > spec.height - 2.0)
            continue;
          // Occlusion: the rendered surface at this pixel must be this one,
          // also at the rounded pixel so label lookups stay consistent.
          if (trace(spec, cam, centers[size_t(v)], proj.x(), proj.y()) != int(sIdx)) continue;
          if (trace(spec, cam, centers[size_t(v)], double(std::llround(proj.x())),
                    double(std::llround(proj.y()))) != int(sIdx))
            continue;
          point.observations.push_back({v, proj.x(), proj.y()});
        }
        placed = point.observations.size() >= 2;
      }
      if (!placed)
        throw std::runtime_error("synthetic scene: cannot place a visible sparse point on surface " +
                                 std::to_string(sIdx));
      scene.sparse.points.push_back(std::move(point));
    }
  }

  double lo = std::numeric_limits<double>::max(), hi = 0.0;
  for (const SynthSurface& s : spec.surfaces) {
    lo = std::min(lo, s.depth);
    hi = std::max(hi, s.depth);
  }
  scene.depthMin = 0.8 * lo;
  scene.depthMax = 1.25 * hi;
  return out;
}

SynthSpec two_plane_preset() {
  SynthSpec spec;
  spec.width = 640;
  spec.height = 480;
  spec.views = 5;
  spec.focal = 700.0;
  spec.ringRadius = 0.35;
  spec.monoMode = MonoMode::Affine;
  spec.monoA = 0.5;
  spec.monoB = 1.0;
  spec.seed = 7;
  SynthSurface far;
  far.depth = 4.0;
  far.centerX = 0.0;
  far.centerY = 0.0;
  far.halfWidth = 3.2;
  far.halfHeight = 2.6;
  far.textureDensity = 0.9;
  far.sparsePoints = 160;
  SynthSurface near;
  near.depth = 2.0;
  near.centerX = 0.0;
  near.centerY = 0.0;
  near.halfWidth = 0.75;
  near.halfHeight = 0.6;
  near.textureDensity = 0.0;  // fully textureless
  near.sparsePoints = 70;
  spec.surfaces = {far, near};
  return spec;
}

SynthSpec parse_synth_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("synth spec '" + path + "': cannot open");
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  SynthSpec spec;
  spec.surfaces.clear();
  auto geti = [&](const std::string& k, int dflt) { return kv.count(k) ? std::stoi(kv[k]) : dflt; };
  auto getd = [&](const std::string& k, double dflt) { return kv.count(k) ? std::stod(kv[k]) : dflt; };
  spec.width = geti("width", spec.width);
  spec.height = geti("height", spec.height);
  spec.views = geti("views", spec.views);
  spec.focal = getd("focal", spec.focal);
  spec.ringRadius = getd("ring_radius", spec.ringRadius);
  spec.monoA = getd("mono_a", spec.monoA);
  spec.monoB = getd("mono_b", spec.monoB);
  spec.globalSparsePoints = geti("sparse_points", spec.globalSparsePoints);
  spec.textureFrequency = getd("texture_frequency", spec.textureFrequency);
  spec.seed = uint64_t(std::stoull(kv.count("seed") ? kv["seed"] : "7"));
  if (kv.count("mono_mode")) {
    const std::string& mode = kv["mono_mode"];
    if (mode == "affine")
      spec.monoMode = MonoMode::Affine;
    else if (mode == "per_instance_affine")
      spec.monoMode = MonoMode::PerInstanceAffine;
    else
      throw std::runtime_error("synth spec: unknown mono_mode '" + mode + "'");
  }
  for (int i = 0;; ++i) {
    const std::string prefix = "surface" + std::to_string(i) + ".";
    if (!kv.count(prefix + "depth")) break;
    SynthSurface s;
    s.depth = getd(prefix + "depth", s.depth);
    s.centerX = getd(prefix + "cx", s.centerX);
    s.centerY = getd(prefix + "cy", s.centerY);
    s.halfWidth = getd(prefix + "hw", s.halfWidth);
    s.halfHeight = getd(prefix + "hh", s.halfHeight);
    s.textureDensity = getd(prefix + "texture", s.textureDensity);
    s.sparsePoints = geti(prefix + "points", s.sparsePoints);
    spec.surfaces.push_back(s);
  }
  if (spec.surfaces.empty()) throw std::runtime_error("synth spec '" + path + "': no surfaces defined");
  return spec;
}

}  // namespace segmvs
