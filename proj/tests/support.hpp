#pragma once

#include <random>

#include "latcas/materials.hpp"

namespace latcas::testing {

/// Every link gets an independent constant permittivity in [lo, hi].
inline MaterialMap random_map(const Lattice& lat, std::mt19937_64& rng, double lo = 1.0,
                              double hi = 10.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  MaterialMap m(lat);
  for (Index l = 0; l < lat.link_count(); ++l) m.assign(LinkId{l}, make_constant(u(rng)));
  return m;
}

inline double rel_err(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace latcas::testing
