#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

#include "doctest.h"
#include "latcas/experiments.hpp"
#include "latcas/operators.hpp"
#include "latcas/scenes.hpp"

using namespace latcas;
using namespace latcas::scenes;

namespace {

using Key = std::tuple<long, long, long>;

Key doubled(const Point& p) {
  return {std::lround(2 * p.x), std::lround(2 * p.y), std::lround(2 * p.z)};
}

Index count_occupied(const MaterialMap& m) { return static_cast<Index>(m.occupied_links().size()); }

}  // namespace

TEST_CASE("disk at azimuth 10 degrees of the unrotated upper disk is quadrant a") {
  CHECK(quadrant(10.0 * std::numbers::pi / 180.0, 0.0) == 0);
  CHECK(quadrant(100.0 * std::numbers::pi / 180.0, 0.0) == 1);
  CHECK(quadrant(-10.0 * std::numbers::pi / 180.0, 0.0) == 1);
  CHECK(quadrant(190.0 * std::numbers::pi / 180.0, 0.0) == 0);

  DiskPairScene s;
  const Lattice lat = s.lattice();
  const auto map = build_disk_pair(s, lat);
  const double c = static_cast<double>(s.axis());
  const double phi = 10.0 * std::numbers::pi / 180.0;
  // a link midpoint near that azimuth in the upper disk: x-link at (c+5, c+1, z) has midpoint (c+5.5, c+1)
  const Index z = s.upper_z().first;
  const LinkId l = lat.link({s.axis() + 5, s.axis() + 1, z}, 0);
  const Point p = lat.midpoint(l);
  CHECK(std::abs(std::atan2(p.y - c, p.x - c) - phi) < 0.1);
  CHECK(map.model_at(l) == s.eps_a);
}

TEST_CASE("rotation by pi gives the identical map") {
  DiskPairScene s;
  const Lattice lat = s.lattice();
  for (const double t : {0.0, 0.125, 0.3, 0.5, 0.875}) {
    DiskPairScene a = s, b = s;
    a.set_theta_pi(t);
    b.set_theta_pi(t + 1.0);
    CHECK(a.theta_pi == doctest::Approx(b.theta_pi).epsilon(1e-15));
    CHECK(build_disk_pair(a, lat).same_materials(build_disk_pair(b, lat)));
    CHECK(build_single_disk(a, lat).same_materials(build_single_disk(b, lat)));
  }
}

TEST_CASE("single disk stamps exactly the upper disk of the pair") {
  DiskPairScene s;
  const Lattice lat = s.lattice();
  const auto pair = build_disk_pair(s, lat);
  const auto single = build_single_disk(s, lat);
  const auto uz = s.upper_z();
  Index upper = 0;
  for (const LinkId l : pair.occupied_links()) {
    const double z = lat.midpoint(l).z;
    if (z >= uz.first && z < uz.second) ++upper;
  }
  CHECK(count_occupied(single) == upper);
  for (const LinkId l : single.occupied_links()) CHECK(pair.model_at(l) == single.model_at(l));
  // everything else vacuum
  Index vac = 0;
  for (Index l = 0; l < lat.link_count(); ++l) {
    if (std::holds_alternative<Vacuum>(single.model_at(LinkId{l}))) ++vac;
  }
  CHECK(vac + count_occupied(single) == lat.link_count());
}

TEST_CASE("disk body does not depend on the rotation angle") {
  DiskPairScene s;
  const Lattice lat = s.lattice();
  DiskPairScene r = s;
  r.set_theta_pi(0.5);
  CHECK(build_single_disk(s, lat).occupied_links() == build_single_disk(r, lat).occupied_links());
  r.set_theta_pi(0.3);
  CHECK(build_disk_pair(s, lat).occupied_links() == build_disk_pair(r, lat).occupied_links());
}

TEST_CASE("quarter turn of the box maps the stamped set onto itself with swapped quadrants") {
  DiskPairScene s;
  const Lattice lat = s.lattice();
  const auto map = build_disk_pair(s, lat);
  std::map<Key, LinkId> by_mid;
  for (Index l = 0; l < lat.link_count(); ++l) by_mid[doubled(lat.midpoint(LinkId{l}))] = LinkId{l};
  const double c = static_cast<double>(s.axis());
  const auto occ = map.occupied_links();
  REQUIRE(!occ.empty());
  for (const LinkId l : occ) {
    const Point p = lat.midpoint(l);
    const Point q{2 * c - p.y, p.x, p.z};
    const auto it = by_mid.find(doubled(q));
    REQUIRE(it != by_mid.end());
    const auto& here = map.model_at(l);
    const auto& there = map.model_at(it->second);
    CHECK(!std::holds_alternative<Vacuum>(there));
    // links on a quadrant boundary carry the blend on both sides; all others swap
    if (on_quadrant_boundary(p.x - c, p.y - c, 0.0)) {
      CHECK(here == blend(s.eps_a, s.eps_b));
      CHECK(here == there);
    } else {
      CHECK(!(here == there));
    }
  }
}

TEST_CASE("boundary detection on the axis, the quadrant lines and nowhere else") {
  CHECK(on_quadrant_boundary(0.0, 0.0, 0.3));
  CHECK(on_quadrant_boundary(3.5, 0.0, 0.0));
  CHECK(on_quadrant_boundary(0.0, -2.0, 0.0));
  CHECK(on_quadrant_boundary(-4.0, 0.0, 0.5));
  CHECK(on_quadrant_boundary(2.0, 2.0, 0.25));
  CHECK(on_quadrant_boundary(-1.5, 1.5, 0.25));
  CHECK(!on_quadrant_boundary(2.0, 2.0, 0.0));
  CHECK(!on_quadrant_boundary(3.5, 0.5, 0.0));
  CHECK(!on_quadrant_boundary(3.5, 0.0, 0.125));
  for (double x = -10; x <= 10; x += 0.5) {
    for (double y = -10; y <= 10; y += 0.5) {
      if (x != 0.0 || y != 0.0) CHECK(!on_quadrant_boundary(x, y, 0.125));
    }
  }
}

TEST_CASE("diagonal mirror maps the map at theta onto the map at pi - theta") {
  DiskPairScene s;
  const Lattice lat = s.lattice();
  std::map<Key, LinkId> by_mid;
  for (Index l = 0; l < lat.link_count(); ++l) by_mid[doubled(lat.midpoint(LinkId{l}))] = LinkId{l};
  for (const double t : {0.0, 0.125, 0.25, 0.375, 0.5}) {
    DiskPairScene a = s, b = s;
    a.set_theta_pi(t);
    b.set_theta_pi(1.0 - t);
    for (const bool pair : {true, false}) {
      const auto ma = pair ? build_disk_pair(a, lat) : build_single_disk(a, lat);
      const auto mb = pair ? build_disk_pair(b, lat) : build_single_disk(b, lat);
      Index mismatches = 0;
      for (Index l = 0; l < lat.link_count(); ++l) {
        const Point p = lat.midpoint(LinkId{l});
        const auto it = by_mid.find(doubled(Point{p.y, p.x, p.z}));
        REQUIRE(it != by_mid.end());
        if (!(ma.model_at(LinkId{l}) == mb.model_at(it->second))) ++mismatches;
      }
      CHECK(mismatches == 0);
    }
  }
}

TEST_CASE("disks that do not fit are rejected") {
  DiskPairScene s;
  s.diameter = 24;
  CHECK_THROWS_AS(s.validate(), Error);
  DiskPairScene t;
  t.gap = 20;
  CHECK_THROWS_AS(t.validate(), Error);
}

TEST_CASE("large scene parameters validate") {
  DiskPairScene s;
  s.box = 55;
  s.diameter = 36;
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("walk (+1,-1,+1,-1) gives relative heights (1,0,1,0)") {
  CHECK(relative_heights({1, -1, 1, -1}) == std::vector<Index>{1, 0, 1, 0});
}

TEST_CASE("odd widths are rejected") {
  CHECK_THROWS_AS(balanced_steps(5, 1), Error);
  CHECK_THROWS_AS(generate_rough_surface(7, 1), Error);
}

TEST_CASE("balanced steps close the walk for any seed") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto steps = balanced_steps(64, seed);
    CHECK(std::count(steps.begin(), steps.end(), 1) == 32);
    CHECK(relative_heights(steps).back() == 0);
    const auto s = generate_rough_surface(64, seed);
    CHECK(s.heights[s.anchor()] == s.fill);
  }
}

TEST_CASE("same seed reproduces the surface") {
  CHECK(generate_rough_surface(128, 99).heights == generate_rough_surface(128, 99).heights);
  CHECK(generate_rough_surface(128, 99).heights != generate_rough_surface(128, 100).heights);
}

TEST_CASE("bridge variance follows k(L-k)/(L-1)") {
  const Index L = 1000;
  const int seeds = 1000;
  const std::vector<Index> ks = {10, 100, 250, 500, 750, 900};
  std::vector<experiments::OnlineMoments> acc(ks.size());
  for (int s = 0; s < seeds; ++s) {
    const auto rel = relative_heights(balanced_steps(L, static_cast<std::uint64_t>(s)));
    for (std::size_t i = 0; i < ks.size(); ++i) acc[i].add(static_cast<double>(rel[ks[i] - 1]));
  }
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const double k = static_cast<double>(ks[i]);
    const double expect = k * (L - k) / (L - 1);
    // sampling error of a variance from 1000 normal draws is about 4.5%
    CHECK(std::abs(acc[i].variance() / expect - 1.0) < 0.2);
  }
  // before the closure correction matters the growth is linear in k
  CHECK(acc[1].variance() / acc[0].variance() == doctest::Approx(10.0).epsilon(0.3));
}

TEST_CASE("ensemble mean height equals the fill level within 3 sigma") {
  const Index L = 128;
  experiments::OnlineMoments m;
  for (std::uint64_t s = 0; s < 400; ++s) m.add(generate_rough_surface(L, s).mean_height());
  CHECK(std::abs(m.mean() - L / 2) < 3.0 * m.stddev() / std::sqrt(400.0));
}

TEST_CASE("surface stamping puts material below the interface") {
  const auto s = flat_surface(16);
  const Lattice lat = s.lattice();
  const auto map = build_surface(s, lat);
  for (Index l = 0; l < lat.link_count(); ++l) {
    const Point p = lat.midpoint(LinkId{l});
    CHECK(std::holds_alternative<Vacuum>(map.model_at(LinkId{l})) == !(p.y < 8.0));
  }
}

TEST_CASE("probe at r = 10 above a flat surface") {
  const auto s = flat_surface(64);
  const Lattice lat = s.lattice();
  const auto surf = build_surface(s, lat);
  const auto map = place_probe_particle(s, surf, 10, ConstantDielectric{8.0});
  const auto fp = particle_footprint(lat, probe_plaquette(s, 10));
  REQUIRE(fp.size() == 4);
  double lo = 1e9, hi = -1e9;
  for (const LinkId l : fp) {
    CHECK(map.model_at(l) == DielectricModel{ConstantDielectric{8.0}});
    lo = std::min(lo, lat.midpoint(l).y);
    hi = std::max(hi, lat.midpoint(l).y);
  }
  // plaquette spans [fill + 9, fill + 10]; its centre sits 9.5 above the top material link row
  CHECK(lo == doctest::Approx(s.fill + 9));
  CHECK(hi == doctest::Approx(s.fill + 10));
  CHECK_THROWS_AS(probe_plaquette(s, 1), Error);
  CHECK_THROWS_AS(probe_plaquette(s, max_probe_distance(s) + 1), Error);
  CHECK(reference_probe_distance(s) == 16);
}

TEST_CASE("footprint closure is the plaquette and its four neighbours") {
  const Lattice lat({16, 16});
  const WaveOperatorBuilder b(lat, Formulation::magnetic);
  const auto fp = particle_footprint(lat, {5, 7, 0});
  const auto z = b.closure(fp);
  CHECK(z.size() == 5);
  const WaveOperatorBuilder e(lat, Formulation::vector_potential);
  CHECK(e.closure(fp).size() == 4);
}

TEST_CASE("overlapping particles are rejected") {
  const Lattice lat({16, 16});
  const auto one = place_particle(MaterialMap(lat), {3, 3, 0}, ConstantDielectric{8.0});
  CHECK_THROWS_AS(place_particle(one, {4, 3, 0}, ConstantDielectric{8.0}), Error);
  CHECK_NOTHROW(place_particle(one, {5, 3, 0}, ConstantDielectric{8.0}));
}

TEST_CASE("pair scene places the partner on the diagonal") {
  ParticlePairScene s;
  s.L = 32;
  const Lattice lat = s.lattice();
  const auto map = build_pair(s, lat, 4);
  CHECK(map.occupied_links().size() == 8);
  CHECK(s.reference_offset() == 16);
}
