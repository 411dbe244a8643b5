#pragma once

// Geometries of the three measurements as material maps.
//
// Angles are carried in units of pi and reduced modulo 1, so a rotation by
// pi maps onto the same stored value and the same link assignment.

#include <cstdint>
#include <vector>

#include "latcas/lattice.hpp"
#include "latcas/materials.hpp"

namespace latcas::scenes {

/// Two coaxial solid disks split into quadrants of alternating material.
/// The upper disk is rotated by theta about the common axis.
struct DiskPairScene {
  Index box = 25;          // cubic box edge
  double diameter = 16.0;
  Index thickness = 2;
  Index gap = 2;
  DielectricModel eps_a = ConstantDielectric{5.0};
  DielectricModel eps_b = ConstantDielectric{10.0};
  double theta_pi = 0.0;   // rotation in units of pi, in [0, 1)

  void set_theta_pi(double t);
  double theta() const;  // radians

  Index axis() const { return box / 2; }
  /// z ranges [lo, hi) of the lower and upper disks.
  std::pair<Index, Index> lower_z() const;
  std::pair<Index, Index> upper_z() const;
  /// Throws unless both disks fit with clearance >= 2.
  void validate() const;
  Lattice lattice() const { return Lattice({box, box, box}); }
};

/// Quadrant index (0 -> eps_a, 1 -> eps_b) of a point at azimuth phi
/// (radians) for a disk rotated by theta_pi.
int quadrant(double phi, double theta_pi);

/// True when the offset (dx, dy) from the axis lies on a quadrant boundary of
/// a disk rotated by theta_pi, or on the axis itself. Such links belong to two
/// quadrants and are stamped with the blend of both materials, which keeps
/// the stamped map symmetric under the lattice reflections of the box.
bool on_quadrant_boundary(double dx, double dy, double theta_pi);

MaterialMap build_disk_pair(const DiskPairScene& scene, const Lattice& lat);
MaterialMap build_single_disk(const DiskPairScene& scene, const Lattice& lat);

/// Solid-on-solid interface: column X carries material on links whose
/// midpoint lies below heights[X]. The walk is anchored at the lateral centre
/// column, whose height equals the fill level.
struct RoughSurfaceScene {
  Index L = 0;
  Index fill = 0;
  std::vector<Index> heights;  // absolute, one per column
  DielectricModel material = ConstantDielectric{8.0};
  std::uint64_t seed = 0;

  Index anchor() const { return L / 2; }
  Lattice lattice() const { return Lattice({L, L}); }
  double mean_height() const;
};

/// Exactly L/2 up and L/2 down steps in random order.
std::vector<int> balanced_steps(Index L, std::uint64_t seed);
/// Cumulative sums of the steps: (+1, -1, +1, -1) -> (1, 0, 1, 0).
std::vector<Index> relative_heights(const std::vector<int>& steps);

RoughSurfaceScene generate_rough_surface(Index L, std::uint64_t seed,
                                         DielectricModel material = ConstantDielectric{8.0},
                                         Index fill = -1);
RoughSurfaceScene flat_surface(Index L, DielectricModel material = ConstantDielectric{8.0},
                               Index fill = -1);
/// Surface heights from an explicit relative walk (length L, closing at 0).
RoughSurfaceScene surface_from_walk(Index L, const std::vector<Index>& relative,
                                    DielectricModel material, Index fill);

MaterialMap build_surface(const RoughSurfaceScene& scene, const Lattice& lat);

/// The 4 links bounding the plaquette with base site `at` (2D).
std::vector<LinkId> particle_footprint(const Lattice& lat, Coord at);

/// Stamps a particle; throws if its footprint touches non-vacuum links.
MaterialMap place_particle(const MaterialMap& map, Coord at, const DielectricModel& model);

/// Plaquette of a probe at distance r above the interface at the anchor
/// column. Centre at height fill - 0.5 + r.
Coord probe_plaquette(const RoughSurfaceScene& scene, Index r);
/// Largest admissible probe distance for the box.
Index max_probe_distance(const RoughSurfaceScene& scene);
/// Reference distance: the middle of the vacuum gap.
Index reference_probe_distance(const RoughSurfaceScene& scene);

MaterialMap place_probe_particle(const RoughSurfaceScene& scene, const MaterialMap& surface,
                                 Index r, const DielectricModel& model);

/// Pair geometry for the separation sweep: a fixed particle at `origin`
/// and a second one offset by (d, d) along the diagonal.
struct ParticlePairScene {
  Index L = 256;
  DielectricModel particle = ConstantDielectric{8.0};
  Coord origin{0, 0, 0};

  Lattice lattice() const { return Lattice({L, L}); }
  Coord partner(Index d) const { return {origin[0] + d, origin[1] + d, 0}; }
  /// Offset of the reference placement (L/2, L/2).
  Index reference_offset() const { return L / 2; }
};

MaterialMap build_pair(const ParticlePairScene& scene, const Lattice& lat, Index d);

}  // namespace latcas::scenes
