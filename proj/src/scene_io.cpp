#include "segmvs/scene.hpp"

#include "segmvs/pfm.hpp"
#include "segmvs/png_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace segmvs {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void load_fail(const std::string& what) {
  throw std::runtime_error("scene load: " + what);
}

void require_file(const fs::path& p) {
  if (!fs::exists(p)) load_fail("missing file '" + p.string() + "'");
}

}  // namespace

SceneBundle load_scene(const std::string& rootPath) {
  const fs::path root(rootPath);
  const fs::path camerasPath = root / "cameras.txt";
  require_file(camerasPath);

  SceneBundle scene;
  bool haveRange = false;

  std::ifstream cams(camerasPath);
  std::string line;
  while (std::getline(cams, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream comment(line.substr(1));
      std::string key;
      if (comment >> key && key == "depth_range") {
        if (!(comment >> scene.depthMin >> scene.depthMax))
          load_fail("malformed depth_range header in '" + camerasPath.string() + "'");
        haveRange = true;
      }
      continue;
    }
    std::istringstream ss(line);
    ViewBundle view;
    CameraModel& cam = view.camera;
    ss >> view.name >> cam.width >> cam.height;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) ss >> cam.K(r, c);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) ss >> cam.R(r, c);
    for (int r = 0; r < 3; ++r) ss >> cam.T(r);
    if (!ss) load_fail("malformed camera line in '" + camerasPath.string() + "': " + line);
    validate_camera(cam, view.name);
    scene.views.push_back(std::move(view));
  }
  if (scene.views.size() < 2) load_fail("a scene needs at least 2 views");

  for (ViewBundle& view : scene.views) {
    const fs::path imagePath = root / "images" / (view.name + ".png");
    const fs::path segPath = root / "seg" / (view.name + ".png");
    const fs::path monoPath = root / "mono" / (view.name + ".pfm");
    require_file(imagePath);
    require_file(segPath);
    require_file(monoPath);
    view.image = read_png_gray8(imagePath.string());
    view.segmentation = read_png_gray16(segPath.string());
    view.monoDepth = read_pfm(monoPath.string());
    const Index rows = view.camera.height, cols = view.camera.width;
    auto check_dims = [&](Index r, Index c, const char* what) {
      if (r != rows || c != cols)
        load_fail("view '" + view.name + "': " + what + " dimensions " + std::to_string(c) + "x" +
                  std::to_string(r) + " do not match camera " + std::to_string(cols) + "x" +
                  std::to_string(rows));
    };
    check_dims(view.image.rows(), view.image.cols(), "image");
    check_dims(view.segmentation.rows(), view.segmentation.cols(), "segmentation");
    check_dims(view.monoDepth.rows(), view.monoDepth.cols(), "monocular depth");
    if (!view.monoDepth.isFinite().all())
      load_fail("view '" + view.name + "': monocular depth contains non-finite values");
  }

  const fs::path pointsPath = root / "sparse" / "points.txt";
  require_file(pointsPath);
  std::ifstream pts(pointsPath);
  size_t lineNo = 0;
  while (std::getline(pts, line)) {
    ++lineNo;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    SparsePoint point;
    int nObs = 0;
    ss >> point.position.x() >> point.position.y() >> point.position.z() >> nObs;
    if (!ss) load_fail("malformed sparse point at '" + pointsPath.string() + "' line " + std::to_string(lineNo));
    for (int i = 0; i < nObs; ++i) {
      Observation obs;
      ss >> obs.viewId >> obs.u >> obs.v;
      if (!ss)
        load_fail("malformed observation at '" + pointsPath.string() + "' line " + std::to_string(lineNo));
      if (obs.viewId < 0 || size_t(obs.viewId) >= scene.views.size())
        load_fail("observation references unknown view id " + std::to_string(obs.viewId) + " at line " +
                  std::to_string(lineNo));
      const ViewBundle& view = scene.views[size_t(obs.viewId)];
      if (obs.u < 0 || obs.v < 0 || obs.u > view.camera.width - 1 || obs.v > view.camera.height - 1)
        load_fail("observation outside raster of view '" + view.name + "' at line " + std::to_string(lineNo));
      const Eigen::Vector3d proj = project(view.camera, point.position);
      if (proj.z() <= 0.0)
        load_fail("sparse point at line " + std::to_string(lineNo) + " projects behind camera of view '" +
                  view.name + "'");
      const double err = std::hypot(proj.x() - obs.u, proj.y() - obs.v);
      if (err > 0.5)
        load_fail("sparse point at line " + std::to_string(lineNo) + " reprojects " + std::to_string(err) +
                  " px from its observation in view '" + view.name + "'");
      point.observations.push_back(obs);
    }
    scene.sparse.points.push_back(std::move(point));
  }

  if (!haveRange) {
    // COLMAP-style fallback: pad the span of observed sparse depths.
    double lo = std::numeric_limits<double>::max(), hi = 0.0;
    for (const SparsePoint& p : scene.sparse.points)
      for (const Observation& obs : p.observations) {
        const double d = observation_depth(p, scene.views[size_t(obs.viewId)].camera);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
      }
    if (hi <= 0.0)
      load_fail("no depth_range header and no sparse observations to derive a depth range from");
    scene.depthMin = 0.8 * lo;
    scene.depthMax = 1.25 * hi;
  }
  if (!(scene.depthMin > 0.0 && scene.depthMin < scene.depthMax))
    load_fail("invalid depth range [" + std::to_string(scene.depthMin) + ", " +
              std::to_string(scene.depthMax) + "]");
  return scene;
}

void save_scene(const std::string& rootPath, const SceneBundle& scene) {
  const fs::path root(rootPath);
  fs::create_directories(root / "images");
  fs::create_directories(root / "seg");
  fs::create_directories(root / "mono");
  fs::create_directories(root / "sparse");

  std::ofstream cams(root / "cameras.txt");
  if (!cams) throw std::runtime_error("scene save: cannot write cameras.txt under '" + rootPath + "'");
  cams << "# view width height K(row-major,9) R(row-major,9) T(3)\n";
  cams.precision(17);
  cams << "# depth_range " << scene.depthMin << " " << scene.depthMax << "\n";
  for (const ViewBundle& view : scene.views) {
    cams << view.name << " " << view.camera.width << " " << view.camera.height;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) cams << " " << view.camera.K(r, c);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) cams << " " << view.camera.R(r, c);
    for (int r = 0; r < 3; ++r) cams << " " << view.camera.T(r);
    cams << "\n";
  }

  for (const ViewBundle& view : scene.views) {
    write_png_gray8((root / "images" / (view.name + ".png")).string(), view.image);
    write_png_gray16((root / "seg" / (view.name + ".png")).string(), view.segmentation);
    write_pfm((root / "mono" / (view.name + ".pfm")).string(), view.monoDepth);
  }

  std::ofstream pts(root / "sparse" / "points.txt");
  pts << "# x y z nObs [viewId u v]...\n";
  pts.precision(17);
  for (const SparsePoint& point : scene.sparse.points) {
    pts << point.position.x() << " " << point.position.y() << " " << point.position.z() << " "
        << point.observations.size();
    for (const Observation& obs : point.observations)
      pts << " " << obs.viewId << " " << obs.u << " " << obs.v;
    pts << "\n";
  }
}

}  // namespace segmvs
