#pragma once

// Periodic Yee lattice index arithmetic.
//
// Sites are numbered x-fastest. Electric unknowns live on links (one per site
// and axis), magnetic unknowns on faces (one per site in 2D, one per site and
// normal axis in 3D). Link and face numbering is site-major:
//   link = site * dim + axis
//   face = site (2D)  |  site * 3 + normal (3D)
//
// A face with normal k spans the plane of axes (i, j) = (k+1, k+2) mod 3 and
// its boundary circulation, starting at the face's base site s, is
//   +E_i(s) + E_j(s + e_i) - E_i(s + e_j) - E_j(s).
// In 2D the only face orientation is the z normal (i = x, j = y).

#include <array>
#include <compare>
#include <span>
#include <vector>

#include "latcas/error.hpp"

namespace latcas {

struct LinkId {
  Index value = 0;
  auto operator<=>(const LinkId&) const = default;
};

struct FaceId {
  Index value = 0;
  auto operator<=>(const FaceId&) const = default;
};

using Coord = std::array<Index, 3>;

struct Point {
  double x = 0, y = 0, z = 0;
};

template <class Id>
struct Incidence {
  Id id;
  int sign;  // +1 or -1
  bool operator==(const Incidence&) const = default;
};

struct LinkInfo {
  Coord site;
  int axis;
};

struct FaceInfo {
  Coord site;
  int normal;  // always 2 for dim == 2
};

class Lattice {
 public:
  /// Extents per axis; size 2 or 3, each at least 4 (3 allowed for
  /// enumeration-only use with `allow_small`).
  explicit Lattice(std::vector<Index> extents, bool allow_small = false);

  static Lattice square(Index lx, Index ly) { return Lattice({lx, ly}); }
  static Lattice cubic(Index lx, Index ly, Index lz) { return Lattice({lx, ly, lz}); }

  int dim() const { return dim_; }
  Index extent(int axis) const { return extent_[axis]; }
  const Coord& extents() const { return extent_; }

  Index site_count() const { return sites_; }
  Index link_count() const { return sites_ * dim_; }
  Index face_count() const { return dim_ == 2 ? sites_ : 3 * sites_; }

  /// Periodic wrap of arbitrary (possibly negative) coordinates.
  Coord wrap(Coord c) const;
  Index site_index(Coord c) const;
  Coord site_coord(Index site) const;

  LinkId link(Coord site, int axis) const;
  FaceId face(Coord site, int normal) const;
  LinkInfo decode(LinkId l) const;
  FaceInfo decode(FaceId f) const;

  /// All links in canonical order (0 .. link_count-1).
  std::vector<LinkId> links() const;

  /// Faces bounded by a link with the link's sign in each face's circulation.
  /// 2 entries in 2D, 4 in 3D, sorted by face id.
  std::vector<Incidence<FaceId>> faces_of_link(LinkId l) const;
  /// The 4 boundary links of a face in circulation order: signs (+, +, -, -).
  std::array<Incidence<LinkId>, 4> links_of_face(FaceId f) const;

  /// Geometric midpoint of a link in lattice units (a = 1), unwrapped.
  Point midpoint(LinkId l) const;

  /// Plane axes (i, j) of a face with the given normal.
  std::pair<int, int> plane_axes(int normal) const;

  bool operator==(const Lattice& o) const { return dim_ == o.dim_ && extent_ == o.extent_; }

 private:
  void check(LinkId l) const;
  void check(FaceId f) const;

  int dim_;
  Coord extent_{1, 1, 1};
  Index sites_;
};

}  // namespace latcas
