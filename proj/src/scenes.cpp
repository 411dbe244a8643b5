#include "latcas/scenes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace latcas::scenes {

void DiskPairScene::set_theta_pi(double t) {
  if (!std::isfinite(t)) throw Error("rotation angle must be finite");
  theta_pi = t - std::floor(t);
  if (theta_pi >= 1.0) theta_pi = 0.0;
}

double DiskPairScene::theta() const { return theta_pi * std::numbers::pi; }

std::pair<Index, Index> DiskPairScene::lower_z() const {
  const Index lo = axis() - gap / 2 - thickness;
  return {lo, lo + thickness};
}

std::pair<Index, Index> DiskPairScene::upper_z() const {
  const Index lo = lower_z().second + gap;
  return {lo, lo + thickness};
}

void DiskPairScene::validate() const {
  if (box < 4) throw Error("disk box must be at least 4 sites");
  if (!(diameter > 0.0) || thickness <= 0 || gap <= 0) {
    throw Error("disk diameter, thickness and gap must be positive");
  }
  const double r = diameter / 2.0;
  const double c = static_cast<double>(axis());
  if (c - r < 2.0 || c + r > static_cast<double>(box) - 2.0) {
    throw Error("disks do not fit laterally in the box with clearance 2");
  }
  if (lower_z().first < 2 || upper_z().second > box - 2) {
    throw Error("disks do not fit vertically in the box with clearance 2");
  }
}

int quadrant(double phi, double theta_pi) {
  const double u = 2.0 * (phi / std::numbers::pi - theta_pi);
  const auto q = static_cast<long long>(std::floor(u));
  return static_cast<int>(((q % 2) + 2) % 2);
}

bool on_quadrant_boundary(double dx, double dy, double theta_pi) {
  if (dx == 0.0 && dy == 0.0) return true;
  const double u = 2.0 * (std::atan2(dy, dx) / std::numbers::pi - theta_pi);
  const double beta = std::numbers::pi * (theta_pi + 0.5 * std::round(u));
  const double off_line = std::abs(dx * std::sin(beta) - dy * std::cos(beta));
  return off_line < 1e-9 * (1.0 + std::abs(dx) + std::abs(dy));
}

namespace {

enum class Which { lower, upper, both };

MaterialMap stamp_disks(const DiskPairScene& s, const Lattice& lat, Which which) {
  s.validate();
  if (lat.dim() != 3 || lat.extent(0) != s.box || lat.extent(1) != s.box || lat.extent(2) != s.box) {
    throw Error("disk scene requires a cubic lattice matching the box");
  }
  const double c = static_cast<double>(s.axis());
  const double r2 = s.diameter * s.diameter / 4.0;
  const auto lz = s.lower_z(), uz = s.upper_z();
  const DielectricModel shared = blend(s.eps_a, s.eps_b);
  MaterialMap map(lat);
  for (Index l = 0; l < lat.link_count(); ++l) {
    const Point p = lat.midpoint(LinkId{l});
    const double dx = p.x - c, dy = p.y - c;
    if (dx * dx + dy * dy >= r2) continue;
    double theta_pi = 0.0;
    bool inside = false;
    if (which != Which::upper && p.z >= lz.first && p.z < lz.second) inside = true;
    if (which != Which::lower && p.z >= uz.first && p.z < uz.second) {
      inside = true;
      theta_pi = s.theta_pi;
    }
    if (!inside) continue;
    if (on_quadrant_boundary(dx, dy, theta_pi)) {
      map.assign(LinkId{l}, shared);
      continue;
    }
    const int q = quadrant(std::atan2(dy, dx), theta_pi);
    map.assign(LinkId{l}, q == 0 ? s.eps_a : s.eps_b);
  }
  return map;
}

}  // namespace

MaterialMap build_disk_pair(const DiskPairScene& scene, const Lattice& lat) {
  return stamp_disks(scene, lat, Which::both);
}

MaterialMap build_single_disk(const DiskPairScene& scene, const Lattice& lat) {
  return stamp_disks(scene, lat, Which::upper);
}

double RoughSurfaceScene::mean_height() const {
  if (heights.empty()) return 0.0;
  return static_cast<double>(std::accumulate(heights.begin(), heights.end(), Index{0})) /
         static_cast<double>(heights.size());
}

std::vector<int> balanced_steps(Index L, std::uint64_t seed) {
  if (L <= 0 || L % 2 != 0) throw Error("rough surface width must be even and positive");
  std::vector<int> steps(static_cast<std::size_t>(L), -1);
  std::fill(steps.begin(), steps.begin() + L / 2, 1);
  std::mt19937_64 rng(seed);
  std::shuffle(steps.begin(), steps.end(), rng);
  return steps;
}

std::vector<Index> relative_heights(const std::vector<int>& steps) {
  std::vector<Index> rel(steps.size());
  Index h = 0;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    h += steps[k];
    rel[k] = h;
  }
  return rel;
}

RoughSurfaceScene surface_from_walk(Index L, const std::vector<Index>& relative,
                                    DielectricModel material, Index fill) {
  if (L < 4 || L % 2 != 0) throw Error("rough surface width must be even and at least 4");
  if (static_cast<Index>(relative.size()) != L) throw Error("walk length must equal the width");
  if (relative.back() != 0) throw Error("walk does not close periodically");
  if (fill < 0) fill = L / 2;
  RoughSurfaceScene s;
  s.L = L;
  s.fill = fill;
  s.material = std::move(material);
  s.heights.resize(static_cast<std::size_t>(L));
  const Index anchor = s.anchor();
  for (Index x = 0; x < L; ++x) {
    const Index k = ((x - anchor - 1) % L + L) % L;
    const Index h = fill + relative[k];
    if (h < 1 || h > L - 1) throw Error("interface leaves the box");
    s.heights[x] = h;
  }
  return s;
}

RoughSurfaceScene generate_rough_surface(Index L, std::uint64_t seed, DielectricModel material,
                                         Index fill) {
  auto s = surface_from_walk(L, relative_heights(balanced_steps(L, seed)), std::move(material), fill);
  s.seed = seed;
  return s;
}

RoughSurfaceScene flat_surface(Index L, DielectricModel material, Index fill) {
  return surface_from_walk(L, std::vector<Index>(static_cast<std::size_t>(L), 0), std::move(material),
                           fill);
}

MaterialMap build_surface(const RoughSurfaceScene& scene, const Lattice& lat) {
  if (lat.dim() != 2 || lat.extent(0) != scene.L || lat.extent(1) != scene.L) {
    throw Error("surface scene requires a square lattice matching its width");
  }
  MaterialMap map(lat);
  const auto& h = scene.heights;
  return map.stamp_region(
      [&](const Point& p) {
        const auto x = static_cast<Index>(std::floor(p.x));
        return p.y < static_cast<double>(h[static_cast<std::size_t>(((x % scene.L) + scene.L) % scene.L)]);
      },
      scene.material);
}

std::vector<LinkId> particle_footprint(const Lattice& lat, Coord at) {
  if (lat.dim() != 2) throw Error("particle footprints are defined on 2D lattices");
  std::vector<LinkId> out;
  for (const auto& inc : lat.links_of_face(lat.face(at, 2))) out.push_back(inc.id);
  std::sort(out.begin(), out.end());
  return out;
}

MaterialMap place_particle(const MaterialMap& map, Coord at, const DielectricModel& model) {
  MaterialMap out = map;
  for (const LinkId l : particle_footprint(map.lattice(), at)) {
    if (!std::holds_alternative<Vacuum>(map.model_at(l))) {
      throw Error("particle footprint intersects existing material");
    }
    out.assign(l, model);
  }
  return out;
}

Coord probe_plaquette(const RoughSurfaceScene& s, Index r) {
  if (r < 2) throw Error("probe distance must be at least 2");
  if (r > max_probe_distance(s)) throw Error("probe distance too close to the box top");
  return {s.anchor(), s.fill - 1 + r, 0};
}

Index max_probe_distance(const RoughSurfaceScene& s) { return s.L - 3 - s.fill; }

Index reference_probe_distance(const RoughSurfaceScene& s) { return (s.L - s.fill) / 2; }

MaterialMap place_probe_particle(const RoughSurfaceScene& scene, const MaterialMap& surface,
                                 Index r, const DielectricModel& model) {
  return place_particle(surface, probe_plaquette(scene, r), model);
}

MaterialMap build_pair(const ParticlePairScene& scene, const Lattice& lat, Index d) {
  if (lat.dim() != 2 || lat.extent(0) != scene.L) throw Error("pair scene lattice mismatch");
  const MaterialMap one = place_particle(MaterialMap(lat), scene.origin, scene.particle);
  return place_particle(one, scene.partner(d), scene.particle);
}

}  // namespace latcas::scenes
