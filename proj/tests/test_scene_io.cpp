#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "segmvs/fusion.hpp"
#include "segmvs/pfm.hpp"
#include "segmvs/ply.hpp"
#include "segmvs/png_io.hpp"
#include "segmvs/scene.hpp"
#include "segmvs/synthetic.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace segmvs;
namespace fs = std::filesystem;

TEST_CASE("pfm round trip is bit exact") {
  const std::string dir = test::temp_dir("pfm");
  Rasterf raster(2, 2);
  raster << 1.0f, 2.0f, 3.0f, kInvalidDepth;
  write_pfm(dir + "/a.pfm", raster);
  const Rasterf back = read_pfm(dir + "/a.pfm");
  REQUIRE(back.rows() == 2);
  CHECK((back == raster).all());

  SUBCASE("NaN rejected on write") {
    raster(0, 0) = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS(write_pfm(dir + "/bad.pfm", raster));
  }

  SUBCASE("large random raster round trips bitwise") {
    SplitMix64 rng(42);
    Rasterf big(480, 640);
    for (Index r = 0; r < big.rows(); ++r)
      for (Index c = 0; c < big.cols(); ++c) big(r, c) = float(rng.uniform(-100.0, 100.0));
    write_pfm(dir + "/big.pfm", big);
    const Rasterf back2 = read_pfm(dir + "/big.pfm");
    CHECK(std::memcmp(big.data(), back2.data(), sizeof(float) * size_t(big.size())) == 0);
  }

  SUBCASE("unwritable path fails") { CHECK_THROWS(write_pfm("/nonexistent/dir/x.pfm", raster)); }
}

TEST_CASE("three-channel pfm round trip") {
  const std::string dir = test::temp_dir("pfm3");
  SplitMix64 rng(9);
  std::array<Rasterf, 3> channels;
  for (auto& ch : channels) {
    ch.resize(17, 23);
    for (Index r = 0; r < ch.rows(); ++r)
      for (Index c = 0; c < ch.cols(); ++c) ch(r, c) = float(rng.uniform(-2.0, 2.0));
  }
  write_pfm3(dir + "/n.pfm", channels);
  const auto back = read_pfm3(dir + "/n.pfm");
  for (int k = 0; k < 3; ++k) CHECK((back[size_t(k)] == channels[size_t(k)]).all());
}

TEST_CASE("png round trips") {
  const std::string dir = test::temp_dir("png");
  SplitMix64 rng(7);

  Rasteru8 gray(13, 19);
  for (Index r = 0; r < gray.rows(); ++r)
    for (Index c = 0; c < gray.cols(); ++c) gray(r, c) = uint8_t(rng.below(256));
  write_png_gray8(dir + "/g8.png", gray);
  CHECK((read_png_gray8(dir + "/g8.png") == gray).all());

  Rasteru16 labels(11, 8);
  for (Index r = 0; r < labels.rows(); ++r)
    for (Index c = 0; c < labels.cols(); ++c) labels(r, c) = uint16_t(rng.below(65536));
  write_png_gray16(dir + "/g16.png", labels);
  CHECK((read_png_gray16(dir + "/g16.png") == labels).all());

  std::array<Rasteru8, 3> rgb;
  for (auto& ch : rgb) {
    ch.resize(9, 14);
    for (Index r = 0; r < ch.rows(); ++r)
      for (Index c = 0; c < ch.cols(); ++c) ch(r, c) = uint8_t(rng.below(256));
  }
  write_png_rgb8(dir + "/rgb.png", rgb);
  const auto backRgb = read_png_rgb8(dir + "/rgb.png");
  for (int k = 0; k < 3; ++k) CHECK((backRgb[size_t(k)] == rgb[size_t(k)]).all());
}

TEST_CASE("synthetic scene basics") {
  SynthSpec spec = test::small_two_plane_spec(96, 72, 3, false);

  SUBCASE("two fronto-parallel planes give exactly two gt values") {
    const SyntheticScene synth = generate_synthetic_scene(spec);
    REQUIRE(synth.scene.views.size() == 3);
    for (const Rasterf& gt : synth.gtDepth) {
      std::set<float> values;
      for (Index r = 0; r < gt.rows(); ++r)
        for (Index c = 0; c < gt.cols(); ++c)
          if (gt(r, c) > 0) values.insert(gt(r, c));
      CHECK(values == std::set<float>{2.0f, 4.0f});
    }
  }

  SUBCASE("affine mono depth holds everywhere") {
    spec.monoA = 0.5;
    spec.monoB = 1.0;
    const SyntheticScene synth = generate_synthetic_scene(spec);
    for (size_t v = 0; v < synth.scene.views.size(); ++v) {
      const auto& view = synth.scene.views[v];
      for (Index r = 0; r < view.monoDepth.rows(); ++r)
        for (Index c = 0; c < view.monoDepth.cols(); ++c) {
          if (synth.gtDepth[v](r, c) <= 0) continue;
          CHECK(view.monoDepth(r, c) ==
                doctest::Approx(0.5 * synth.gtDepth[v](r, c) + 1.0).epsilon(1e-6));
        }
    }
  }

  SUBCASE("sparse points reproject onto their surfaces") {
    spec.surfaces[0].sparsePoints = -1;
    spec.surfaces[1].sparsePoints = -1;
    spec.globalSparsePoints = 100;
    const SyntheticScene synth = generate_synthetic_scene(spec);
    CHECK(synth.scene.sparse.points.size() == 100);
    for (const SparsePoint& p : synth.scene.sparse.points) {
      CHECK(p.observations.size() >= 2);
      for (const Observation& obs : p.observations) {
        const auto& view = synth.scene.views[size_t(obs.viewId)];
        const Eigen::Vector3d proj = project(view.camera, p.position);
        CHECK(std::hypot(proj.x() - obs.u, proj.y() - obs.v) < 0.5);
        const Index pr = Index(std::llround(obs.v)), pc = Index(std::llround(obs.u));
        CHECK(double(synth.gtDepth[size_t(obs.viewId)](pr, pc)) ==
              doctest::Approx(p.position.z()).epsilon(1e-9));
      }
    }
  }

  SUBCASE("gt satisfies the plane equations exactly") {
    const SyntheticScene synth = generate_synthetic_scene(spec);
    for (size_t v = 0; v < synth.scene.views.size(); ++v)
      for (Index r = 0; r < synth.gtDepth[v].rows(); ++r)
        for (Index c = 0; c < synth.gtDepth[v].cols(); ++c) {
          const float gt = synth.gtDepth[v](r, c);
          if (gt <= 0) continue;
          const uint16_t label = synth.scene.views[v].segmentation(r, c);
          REQUIRE(label >= 1);
          const double planeDepth = spec.surfaces[size_t(label - 1)].depth;
          CHECK(std::abs(double(gt) - planeDepth) / planeDepth < 1e-9);
        }
  }

  SUBCASE("overlapping surfaces at the same depth are rejected") {
    spec.surfaces[1].depth = spec.surfaces[0].depth;
    CHECK_THROWS_WITH_AS(static_cast<void>(generate_synthetic_scene(spec)),
                         doctest::Contains("ambiguous"), std::runtime_error);
  }
}

TEST_CASE("scene save/load round trip and validation") {
  const std::string dir = test::temp_dir("scene");
  const SynthSpec spec = test::small_two_plane_spec(64, 48, 2, false, 20, 10);
  const SyntheticScene synth = generate_synthetic_scene(spec);
  save_scene(dir, synth.scene);

  SUBCASE("round trip") {
    const SceneBundle loaded = load_scene(dir);
    REQUIRE(loaded.views.size() == 2);
    CHECK(loaded.depthMin == doctest::Approx(synth.scene.depthMin));
    CHECK((loaded.views[0].image == synth.scene.views[0].image).all());
    CHECK((loaded.views[0].segmentation == synth.scene.views[0].segmentation).all());
    CHECK((loaded.views[1].monoDepth == synth.scene.views[1].monoDepth).all());
    CHECK(loaded.sparse.points.size() == synth.scene.sparse.points.size());
  }

  SUBCASE("missing segmentation raster is named") {
    fs::remove(fs::path(dir) / "seg" / "view1.png");
    CHECK_THROWS_WITH_AS(static_cast<void>(load_scene(dir)), doctest::Contains("seg/view1.png"),
                         std::runtime_error);
  }

  SUBCASE("behind-camera observation is rejected") {
    std::ofstream pts(fs::path(dir) / "sparse" / "points.txt");
    pts << "0 0 -5 1 0 32 24\n";  // z = -5 sits behind every camera
    pts.close();
    CHECK_THROWS_WITH_AS(static_cast<void>(load_scene(dir)), doctest::Contains("behind"),
                         std::runtime_error);
  }

  SUBCASE("non-orthonormal rotation is rejected") {
    std::ifstream in(fs::path(dir) / "cameras.txt");
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    std::istringstream stream(content);
    std::ostringstream rewritten;
    std::string line;
    while (std::getline(stream, line)) {
      if (!line.empty() && line[0] != '#') {
        std::istringstream tokens(line);
        std::vector<std::string> parts;
        std::string tok;
        while (tokens >> tok) parts.push_back(tok);
        parts[12] = "2.0";  // R(0,0)
        std::string rebuilt;
        for (const auto& p : parts) rebuilt += p + " ";
        rewritten << rebuilt << "\n";
        while (std::getline(stream, line)) rewritten << line << "\n";
        break;
      }
      rewritten << line << "\n";
    }
    std::ofstream out(fs::path(dir) / "cameras.txt");
    out << rewritten.str();
    out.close();
    CHECK_THROWS_WITH_AS(static_cast<void>(load_scene(dir)), doctest::Contains("orthonormal"),
                         std::runtime_error);
  }

  SUBCASE("dimension mismatch names the view") {
    write_png_gray8((fs::path(dir) / "images" / "view0.png").string(), Rasteru8::Zero(10, 10));
    CHECK_THROWS_WITH_AS(static_cast<void>(load_scene(dir)), doctest::Contains("view0"),
                         std::runtime_error);
  }
}

TEST_CASE("point cloud export") {
  SynthSpec spec = test::small_two_plane_spec(64, 48, 3, false, 30, 0);
  spec.surfaces.pop_back();  // single plane
  const SyntheticScene synth = generate_synthetic_scene(spec);

  std::vector<FusionView> views;
  for (size_t v = 0; v < synth.scene.views.size(); ++v) {
    FusionView fv;
    fv.depth = synth.gtDepth[v];
    const Index rows = fv.depth.rows(), cols = fv.depth.cols();
    fv.normal = {Rasterf::Zero(rows, cols), Rasterf::Zero(rows, cols),
                 Rasterf::Constant(rows, cols, -1.0f)};
    fv.image = synth.scene.views[v].image;
    fv.camera = synth.scene.views[v].camera;
    views.push_back(std::move(fv));
  }

  SUBCASE("identical plane depths fuse onto the plane") {
    FusionParams params;
    params.minConsistentViews = 2;
    const auto cloud = export_point_cloud(views, params);
    CHECK(cloud.size() > size_t(0.9 * double(views[0].depth.size())));
    for (const PlyPoint& p : cloud) CHECK(std::abs(p.position.z() - 4.0f) < 1e-4f);
  }

  SUBCASE("perturbed view contributes no points") {
    views[2].depth = (views[2].depth * 1.5f).eval();
    FusionParams params;
    params.minConsistentViews = 2;
    const auto cloud = export_point_cloud(views, params);
    for (const PlyPoint& p : cloud) CHECK(std::abs(p.position.z() - 4.0f) < 1e-4f);
  }

  SUBCASE("requiring as many other views as exist empties the cloud") {
    FusionParams params;
    params.minConsistentViews = int(views.size());
    CHECK(export_point_cloud(views, params).empty());
  }

  SUBCASE("ply round trip") {
    const std::string dir = test::temp_dir("ply");
    FusionParams params;
    const auto cloud = export_point_cloud(views, params);
    write_ply(dir + "/c.ply", cloud);
    const auto back = read_ply(dir + "/c.ply");
    REQUIRE(back.size() == cloud.size());
    CHECK(back.front().position == cloud.front().position);
    CHECK(back.back().color == cloud.back().color);
  }
}
