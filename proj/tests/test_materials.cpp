#include <cmath>

#include "doctest.h"
#include "latcas/materials.hpp"

using namespace latcas;

TEST_CASE("single pole and constant permittivities") {
  const auto sp = make_single_pole(7.0, 1.0);
  CHECK(eval_epsilon(sp, 0.0) == doctest::Approx(8.0));
  CHECK(eval_epsilon(sp, 1.0) == doctest::Approx(4.5));
  CHECK(eval_epsilon(make_constant(5.0), 0.3) == 5.0);
  CHECK(eval_epsilon(make_constant(5.0), 300.0) == 5.0);
  CHECK(eval_epsilon(Vacuum{}, 2.0) == 1.0);
  CHECK(eval_epsilon(SinglePole{7.0}, 1e6) == 8.0);
  CHECK_THROWS_AS(eval_epsilon(sp, -1.0), Error);
  CHECK_THROWS_AS(make_constant(0.0), Error);
  CHECK_THROWS_AS(make_single_pole(-1.0, 1.0), Error);
  CHECK_THROWS_AS(make_single_pole(1.0, 0.0), Error);
}

TEST_CASE("single pole is monotone, continuous and tends to 1") {
  const auto sp = make_single_pole(7.0, 0.3);
  double prev = eval_epsilon(sp, 0.0);
  for (int k = 1; k <= 2000; ++k) {
    const double e = eval_epsilon(sp, 0.005 * k);
    CHECK(e <= prev);
    CHECK(prev - e < 0.1);
    CHECK(e >= 1.0);
    prev = e;
  }
  CHECK(eval_epsilon(sp, 1e9) == doctest::Approx(1.0));
  CHECK(resonance(sp) == 0.3);
  CHECK(std::isinf(resonance(make_constant(2.0))));
}

TEST_CASE("stamp_region") {
  const Lattice lat({8, 8});
  const MaterialMap vac(lat);
  CHECK(vac.stamp_region([](const Point&) { return false; }, make_constant(3.0))
            .same_materials(vac));

  const auto half = vac.stamp_region([](const Point& p) { return p.y < 4.0; }, make_constant(8.0));
  for (Index l = 0; l < lat.link_count(); ++l) {
    const bool inside = lat.midpoint(LinkId{l}).y < 4.0;
    CHECK((half.model_at(LinkId{l}) == make_constant(8.0)) == inside);
    CHECK((half.model_at(LinkId{l}) == DielectricModel{Vacuum{}}) == !inside);
  }
  const auto twice = half.stamp_region([](const Point& p) { return p.y < 4.0; }, make_constant(8.0));
  CHECK(twice.same_materials(half));

  const auto cleared = half.stamp_region([](const Point&) { return true; }, Vacuum{});
  CHECK(cleared.occupied_links().empty());
  CHECK(MaterialMap::differing_links(half, vac).size() == half.occupied_links().size());
}

TEST_CASE("epsilon evaluates per link") {
  const Lattice lat({4, 4});
  MaterialMap m(lat);
  m.assign(LinkId{3}, make_single_pole(7.0, 1.0));
  const auto eps = m.epsilon(1.0);
  CHECK(eps[3] == doctest::Approx(4.5));
  CHECK(eps[0] == 1.0);
  CHECK_THROWS_AS(m.assign(LinkId{32}, Vacuum{}), Error);
}

TEST_CASE("blend averages the two responses at every frequency") {
  CHECK(blend(make_constant(5.0), make_constant(10.0)) == DielectricModel{ConstantDielectric{7.5}});
  CHECK(blend(make_constant(4.0), make_constant(4.0)) == make_constant(4.0));
  CHECK(blend(Vacuum{}, make_constant(3.0)) == DielectricModel{ConstantDielectric{2.0}});
  const auto a = make_single_pole(7.0, 0.3), b = make_constant(5.0);
  const auto m = blend(a, b);
  CHECK(m == blend(b, a));
  CHECK(resonance(m) == 0.3);
  for (const double w : {0.0, 0.1, 0.3, 2.0, 50.0}) {
    CHECK(eval_epsilon(m, w) == doctest::Approx(0.5 * (eval_epsilon(a, w) + eval_epsilon(b, w))).epsilon(1e-15));
  }
  CHECK_THROWS_AS(blend(m, b), Error);
}
