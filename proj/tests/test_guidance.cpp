#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "segmvs/guidance.hpp"
#include "segmvs/rng.hpp"

#include <map>

using namespace segmvs;

namespace {

/// Brute-force 4-neighbor label-difference scan.
Rasteru8 boundary_oracle(const Rasteru16& seg) {
  Rasteru8 out = Rasteru8::Zero(seg.rows(), seg.cols());
  const Index dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
  for (Index r = 0; r < seg.rows(); ++r)
    for (Index c = 0; c < seg.cols(); ++c)
      for (int k = 0; k < 4; ++k) {
        const Index rr = r + dr[k], cc = c + dc[k];
        if (in_bounds(seg, rr, cc) && seg(rr, cc) != seg(r, c)) out(r, c) = 1;
      }
  return out;
}

}  // namespace

TEST_CASE("boundary extraction") {
  SUBCASE("uniform raster has no boundary") {
    const Rasteru16 seg = Rasteru16::Constant(8, 8, 3);
    CHECK((extract_boundary(seg) == 0).all());
  }

  SUBCASE("half split yields the two columns astride the split") {
    Rasteru16 seg(6, 8);
    for (Index r = 0; r < 6; ++r)
      for (Index c = 0; c < 8; ++c) seg(r, c) = c < 4 ? 1 : 2;
    const Rasteru8 b = extract_boundary(seg);
    for (Index r = 0; r < 6; ++r)
      for (Index c = 0; c < 8; ++c) CHECK(b(r, c) == ((c == 3 || c == 4) ? 1 : 0));
  }

  SUBCASE("random voronoi rasters match the brute-force oracle") {
    for (uint64_t seed = 0; seed < 12; ++seed) {
      const auto g = test::random_guidance(37 + Index(seed % 3) * 9, 41, 3 + int(seed % 4), seed);
      CHECK((extract_boundary(g.seg) == boundary_oracle(g.seg)).all());
    }
  }
}

TEST_CASE("occlusion map classification") {
  SUBCASE("constant mono depth labels every boundary pixel continuous") {
    Rasteru16 seg(16, 16);
    for (Index r = 0; r < 16; ++r)
      for (Index c = 0; c < 16; ++c) seg(r, c) = c < 8 ? 1 : 2;
    const Rasteru8 b = extract_boundary(seg);
    const OcclusionMap occ = compute_occlusion_map(b, Rasterf::Constant(16, 16, 42.0f), 5, 1.8, 1);
    for (Index r = 0; r < 16; ++r)
      for (Index c = 0; c < 16; ++c)
        CHECK(occ.label(r, c) == (b(r, c) ? uint8_t(EdgeLabel::Continuous) : uint8_t(EdgeLabel::None)));
  }

  SUBCASE("a large step labels the boundary discontinuous") {
    Rasteru16 seg(20, 20);
    Rasterf mono(20, 20);
    for (Index r = 0; r < 20; ++r)
      for (Index c = 0; c < 20; ++c) {
        seg(r, c) = r < 10 ? 1 : 2;
        mono(r, c) = r < 10 ? 10.0f : 200.0f;
      }
    const Rasteru8 b = extract_boundary(seg);
    const OcclusionMap occ = compute_occlusion_map(b, mono, 5, 1.8, 1);
    for (Index r = 0; r < 20; ++r)
      for (Index c = 0; c < 20; ++c)
        if (b(r, c)) CHECK(occ.label(r, c) == uint8_t(EdgeLabel::Discontinuous));
  }

  SUBCASE("small flipped run gets reassigned to the surrounding label") {
    // One long horizontal boundary with constant mono (all Continuous) except
    // a 5-pixel bump forced Discontinuous by a local gradient spike.
    Rasteru16 seg(24, 64);
    Rasterf mono = Rasterf::Constant(24, 64, 100.0f);
    for (Index r = 0; r < 24; ++r)
      for (Index c = 0; c < 64; ++c) seg(r, c) = r < 12 ? 1 : 2;
    for (Index c = 30; c < 35; ++c) mono(12, c) = 160.0f;  // spike near the boundary row

    const Rasteru8 b = extract_boundary(seg);
    const OcclusionMap before = compute_occlusion_map(b, mono, 3, 1.8, 1);
    bool sawDiscontinuous = false;
    for (Index c = 0; c < 64; ++c)
      sawDiscontinuous |= before.label(11, c) == uint8_t(EdgeLabel::Discontinuous);
    REQUIRE(sawDiscontinuous);

    const OcclusionMap after = compute_occlusion_map(b, mono, 3, 1.8, 12);
    for (Index r = 0; r < 24; ++r)
      for (Index c = 0; c < 64; ++c)
        if (b(r, c)) CHECK(after.label(r, c) == uint8_t(EdgeLabel::Continuous));
  }

  SUBCASE("delta extremes") {
    const auto g = test::random_guidance(32, 32, 4, 5, 5, 1.8, 1);
    const Rasteru8 b = extract_boundary(g.seg);
    const OcclusionMap loose = compute_occlusion_map(b, g.mono, 5, 1e12, 1);
    for (Index r = 0; r < 32; ++r)
      for (Index c = 0; c < 32; ++c)
        if (b(r, c)) CHECK(loose.label(r, c) == uint8_t(EdgeLabel::Continuous));

    const OcclusionMap tight = compute_occlusion_map(b, g.mono, 5, 1e-12, 1);
    const Rasterf grad = sobel_magnitude(g.mono);
    for (Index r = 0; r < 32; ++r)
      for (Index c = 0; c < 32; ++c) {
        if (!b(r, c)) continue;
        const Index r0 = std::max<Index>(0, r - 2), r1 = std::min<Index>(31, r + 2);
        const Index c0 = std::max<Index>(0, c - 2), c1 = std::min<Index>(31, c + 2);
        if (grad.block(r0, c0, r1 - r0 + 1, c1 - c0 + 1).maxCoeff() > 0.0f)
          CHECK(tight.label(r, c) == uint8_t(EdgeLabel::Discontinuous));
      }
  }

  SUBCASE("no undersized cluster survives unless its neighbors are undersized too") {
    for (uint64_t seed = 100; seed < 112; ++seed) {
      const int sigma = 6;
      const auto g = test::random_guidance(48, 48, 5, seed, 5, 1.8, sigma);
      std::map<int32_t, int> clusterSize;
      for (Index r = 0; r < 48; ++r)
        for (Index c = 0; c < 48; ++c)
          if (g.occ.cluster(r, c) >= 0) clusterSize[g.occ.cluster(r, c)]++;
      for (Index r = 0; r < 48; ++r)
        for (Index c = 0; c < 48; ++c) {
          const int32_t id = g.occ.cluster(r, c);
          if (id < 0 || clusterSize[id] >= sigma) continue;
          // Undersized survivor: every adjacent opposite cluster must be undersized.
          for (Index dr = -1; dr <= 1; ++dr)
            for (Index dc = -1; dc <= 1; ++dc) {
              const Index rr = r + dr, cc = c + dc;
              if (!in_bounds(g.occ.label, rr, cc) || g.occ.cluster(rr, cc) < 0) continue;
              if (g.occ.label(rr, cc) != g.occ.label(r, c))
                CHECK(clusterSize[g.occ.cluster(rr, cc)] < sigma);
            }
        }
    }
  }

  SUBCASE("even window size is rejected") {
    CHECK_THROWS_AS(
        static_cast<void>(compute_occlusion_map(Rasteru8::Zero(4, 4), Rasterf::Zero(4, 4), 4, 1.8, 1)),
        std::invalid_argument);
  }
}

TEST_CASE("crossing allowance") {
  Rasteru16 seg(8, 8);
  Rasterf mono(8, 8);
  for (Index r = 0; r < 8; ++r)
    for (Index c = 0; c < 8; ++c) {
      seg(r, c) = c < 4 ? 1 : 2;
      mono(r, c) = c < 4 ? 10.0f : 200.0f;  // discontinuous split
    }
  OcclusionMap occ = compute_occlusion_map(extract_boundary(seg), mono, 3, 1.8, 1);
  const EdgePolicy policy;

  SUBCASE("step with no boundary is allowed") {
    const Crossing x = crossing_allowance(policy, occ, {1, 1}, {1, 2}, 0);
    CHECK(x.kind == CrossKind::Allowed);
  }

  SUBCASE("step onto a discontinuous pixel blocks either direction") {
    CHECK(crossing_allowance(policy, occ, {1, 2}, {1, 3}, 0).kind == CrossKind::Blocked);
    CHECK(crossing_allowance(policy, occ, {1, 4}, {1, 3}, 0).kind == CrossKind::Blocked);
  }

  SUBCASE("step onto a continuous pixel grants the layer budget") {
    // Flatten the depth: same boundary, now continuous.
    const OcclusionMap cont =
        compute_occlusion_map(extract_boundary(seg), Rasterf::Constant(8, 8, 5.0f), 3, 1.8, 1);
    const Crossing x0 = crossing_allowance(policy, cont, {1, 2}, {1, 3}, 0);
    CHECK(x0.kind == CrossKind::AllowedWithinBudget);
    CHECK(x0.budget == 8);
    const Crossing x2 = crossing_allowance(policy, cont, {1, 2}, {1, 3}, 2);
    CHECK(x2.budget == 32);
  }

  SUBCASE("non-adjacent pixels violate the contract") {
    CHECK_THROWS_AS(static_cast<void>(crossing_allowance(policy, occ, {1, 1}, {1, 3}, 0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(static_cast<void>(crossing_allowance(policy, occ, {1, 1}, {1, 1}, 0)),
                    std::invalid_argument);
  }
}
