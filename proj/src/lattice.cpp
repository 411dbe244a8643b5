#include "latcas/lattice.hpp"

#include <algorithm>
#include <string>

namespace latcas {

Lattice::Lattice(std::vector<Index> extents, bool allow_small) {
  if (extents.size() != 2 && extents.size() != 3) {
    throw Error("lattice dimension must be 2 or 3, got " + std::to_string(extents.size()));
  }
  dim_ = static_cast<int>(extents.size());
  const Index min_extent = allow_small ? 3 : 4;
  sites_ = 1;
  for (int a = 0; a < dim_; ++a) {
    if (extents[a] < min_extent) {
      throw Error("lattice extent along axis " + std::to_string(a) + " must be >= " +
                  std::to_string(min_extent) + ", got " + std::to_string(extents[a]));
    }
    extent_[a] = extents[a];
    sites_ *= extents[a];
  }
}

Coord Lattice::wrap(Coord c) const {
  for (int a = 0; a < 3; ++a) {
    if (a >= dim_) {
      c[a] = 0;
      continue;
    }
    Index m = c[a] % extent_[a];
    c[a] = m < 0 ? m + extent_[a] : m;
  }
  return c;
}

Index Lattice::site_index(Coord c) const {
  c = wrap(c);
  return c[0] + extent_[0] * (c[1] + extent_[1] * c[2]);
}

Coord Lattice::site_coord(Index site) const {
  Coord c{0, 0, 0};
  c[0] = site % extent_[0];
  site /= extent_[0];
  c[1] = site % extent_[1];
  c[2] = site / extent_[1];
  return c;
}

LinkId Lattice::link(Coord site, int axis) const {
  return LinkId{site_index(site) * dim_ + axis};
}

FaceId Lattice::face(Coord site, int normal) const {
  if (dim_ == 2) return FaceId{site_index(site)};
  return FaceId{site_index(site) * 3 + normal};
}

void Lattice::check(LinkId l) const {
  if (l.value < 0 || l.value >= link_count()) {
    throw Error("link id " + std::to_string(l.value) + " out of range [0, " +
                std::to_string(link_count()) + ")");
  }
}

void Lattice::check(FaceId f) const {
  if (f.value < 0 || f.value >= face_count()) {
    throw Error("face id " + std::to_string(f.value) + " out of range [0, " +
                std::to_string(face_count()) + ")");
  }
}

LinkInfo Lattice::decode(LinkId l) const {
  check(l);
  return LinkInfo{site_coord(l.value / dim_), static_cast<int>(l.value % dim_)};
}

FaceInfo Lattice::decode(FaceId f) const {
  check(f);
  if (dim_ == 2) return FaceInfo{site_coord(f.value), 2};
  return FaceInfo{site_coord(f.value / 3), static_cast<int>(f.value % 3)};
}

std::vector<LinkId> Lattice::links() const {
  std::vector<LinkId> out(static_cast<std::size_t>(link_count()));
  for (Index i = 0; i < link_count(); ++i) out[i] = LinkId{i};
  return out;
}

std::pair<int, int> Lattice::plane_axes(int normal) const {
  if (dim_ == 2) return {0, 1};
  return {(normal + 1) % 3, (normal + 2) % 3};
}

namespace {
Coord shifted(Coord c, int axis, Index by) {
  c[axis] += by;
  return c;
}
}  // namespace

std::array<Incidence<LinkId>, 4> Lattice::links_of_face(FaceId f) const {
  const FaceInfo info = decode(f);
  const auto [i, j] = plane_axes(info.normal);
  const Coord s = info.site;
  return {Incidence<LinkId>{link(s, i), +1}, Incidence<LinkId>{link(shifted(s, i, 1), j), +1},
          Incidence<LinkId>{link(shifted(s, j, 1), i), -1}, Incidence<LinkId>{link(s, j), -1}};
}

std::vector<Incidence<FaceId>> Lattice::faces_of_link(LinkId l) const {
  const LinkInfo info = decode(l);
  const Coord s = info.site;
  std::vector<Incidence<FaceId>> out;
  out.reserve(4);
  const int first_normal = dim_ == 2 ? 2 : 0;
  for (int k = first_normal; k < 3; ++k) {
    const auto [i, j] = plane_axes(k);
    if (dim_ == 3 && k == info.axis) continue;
    if (info.axis == i) {
      out.push_back({face(s, k), +1});
      out.push_back({face(shifted(s, j, -1), k), -1});
    } else if (info.axis == j) {
      out.push_back({face(shifted(s, i, -1), k), +1});
      out.push_back({face(s, k), -1});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

Point Lattice::midpoint(LinkId l) const {
  const LinkInfo info = decode(l);
  Point p{static_cast<double>(info.site[0]), static_cast<double>(info.site[1]),
          static_cast<double>(info.site[2])};
  if (info.axis == 0) p.x += 0.5;
  if (info.axis == 1) p.y += 0.5;
  if (info.axis == 2) p.z += 0.5;
  return p;
}

}  // namespace latcas
