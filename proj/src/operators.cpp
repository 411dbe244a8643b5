#include "latcas/operators.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace latcas {

std::string to_string(Formulation f) {
  return f == Formulation::magnetic ? "magnetic" : "vector_potential";
}

Formulation formulation_from_string(const std::string& s) {
  if (s == "magnetic" || s == "DG" || s == "G") return Formulation::magnetic;
  if (s == "vector_potential" || s == "DA" || s == "A") return Formulation::vector_potential;
  throw Error("unknown formulation '" + s + "' (expected magnetic or vector_potential)");
}

SparseOperator assemble_curl(const Lattice& lat) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(lat.face_count()) * 4);
  for (Index f = 0; f < lat.face_count(); ++f) {
    for (const auto& inc : lat.links_of_face(FaceId{f})) {
      t.push_back({f, inc.id.value, static_cast<double>(inc.sign)});
    }
  }
  return SparseOperator::from_triplets(lat.face_count(), lat.link_count(), std::move(t));
}

SparseOperator assemble_curl_star(const Lattice& lat) {
  // Built from the link-side incidence so that the transpose identity is a
  // real check of the two incidence tables.
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(lat.face_count()) * 4);
  for (Index l = 0; l < lat.link_count(); ++l) {
    for (const auto& inc : lat.faces_of_link(LinkId{l})) {
      t.push_back({l, inc.id.value, static_cast<double>(inc.sign)});
    }
  }
  return SparseOperator::from_triplets(lat.link_count(), lat.face_count(), std::move(t));
}

SparseOperator assemble_gradient(const Lattice& lat) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(lat.link_count()) * 2);
  for (Index s = 0; s < lat.site_count(); ++s) {
    const Coord c = lat.site_coord(s);
    for (int a = 0; a < lat.dim(); ++a) {
      Coord n = c;
      ++n[a];
      const Index l = lat.link(c, a).value;
      t.push_back({l, lat.site_index(n), 1.0});
      t.push_back({l, s, -1.0});
    }
  }
  return SparseOperator::from_triplets(lat.link_count(), lat.site_count(), std::move(t));
}

SparseOperator assemble_DA(const Lattice& lat, const MaterialMap& map, double omega, double c) {
  return WaveOperatorBuilder(lat, Formulation::vector_potential, c).assemble(map, omega);
}

SparseOperator assemble_DG(const Lattice& lat, const MaterialMap& map, double omega, double c) {
  return WaveOperatorBuilder(lat, Formulation::magnetic, c).assemble(map, omega);
}

WaveOperatorBuilder::WaveOperatorBuilder(Lattice lat, Formulation f, double c)
    : lat_(std::move(lat)), formulation_(f), c_(c) {
  if (!(c_ > 0.0)) throw Error("speed of light must be positive");

  // (row, col, link, coefficient) contributions of the curl sandwich.
  struct Contribution {
    Index row, col, link;
    double coef;
  };
  std::vector<Contribution> contrib;
  Index n = 0;
  if (formulation_ == Formulation::magnetic) {
    n = lat_.face_count();
    contrib.reserve(static_cast<std::size_t>(lat_.link_count()) * (lat_.dim() == 2 ? 4 : 16));
    for (Index l = 0; l < lat_.link_count(); ++l) {
      const auto faces = lat_.faces_of_link(LinkId{l});
      for (const auto& a : faces) {
        for (const auto& b : faces) {
          contrib.push_back({a.id.value, b.id.value, l, static_cast<double>(a.sign * b.sign)});
        }
      }
    }
  } else {
    n = lat_.link_count();
    contrib.reserve(static_cast<std::size_t>(lat_.face_count()) * 16);
    for (Index f = 0; f < lat_.face_count(); ++f) {
      const auto links = lat_.links_of_face(FaceId{f});
      for (const auto& a : links) {
        for (const auto& b : links) {
          contrib.push_back({a.id.value, b.id.value, -1, static_cast<double>(a.sign * b.sign)});
        }
      }
    }
  }

  std::vector<Triplet> t;
  t.reserve(contrib.size() + static_cast<std::size_t>(n));
  for (const auto& x : contrib) t.push_back({x.row, x.col, 1.0});
  for (Index i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  pattern_ = SparseOperator::from_triplets(n, n, std::move(t), true);
  std::fill(pattern_.values_mut().begin(), pattern_.values_mut().end(), 1.0);

  const auto cp = pattern_.col_ptr();
  const auto ri = pattern_.row_idx();
  auto position = [&](Index row, Index col) {
    const auto first = ri.begin() + cp[col];
    const auto last = ri.begin() + cp[col + 1];
    return static_cast<Index>(std::lower_bound(first, last, row) - ri.begin());
  };

  const Index nnz = pattern_.nonzeros();
  constant_.assign(static_cast<std::size_t>(nnz), 0.0);
  diagonal_.assign(static_cast<std::size_t>(nnz), 0);
  for (Index col = 0; col < n; ++col) diagonal_[position(col, col)] = 1;

  if (formulation_ == Formulation::magnetic) {
    term_ptr_.assign(static_cast<std::size_t>(nnz) + 1, 0);
    for (const auto& x : contrib) ++term_ptr_[position(x.row, x.col) + 1];
    for (Index k = 0; k < nnz; ++k) term_ptr_[k + 1] += term_ptr_[k];
    term_link_.resize(contrib.size());
    term_coef_.resize(contrib.size());
    std::vector<Index> fill(term_ptr_.begin(), term_ptr_.end() - 1);
    for (const auto& x : contrib) {
      const Index k = fill[position(x.row, x.col)]++;
      term_link_[k] = x.link;
      term_coef_[k] = x.coef;
    }
  } else {
    term_ptr_.assign(static_cast<std::size_t>(nnz) + 1, 0);
    for (const auto& x : contrib) constant_[position(x.row, x.col)] += x.coef;
  }
}

void WaveOperatorBuilder::check_frequency(double omega) const {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw Error("wave operator requires a positive finite frequency, got " + std::to_string(omega));
  }
}

SparseOperator WaveOperatorBuilder::assemble(const MaterialMap& map, double omega) const {
  if (!(map.lattice() == lat_)) throw Error("material map does not match the operator lattice");
  check_frequency(omega);
  const auto eps = map.epsilon(omega);
  return assemble(eps, omega);
}

SparseOperator WaveOperatorBuilder::assemble(std::span<const double> eps, double omega) const {
  check_frequency(omega);
  if (static_cast<Index>(eps.size()) != lat_.link_count()) {
    throw Error("permittivity array size does not match the link count");
  }
  std::vector<double> inv_eps;
  if (formulation_ == Formulation::magnetic) {
    inv_eps.resize(eps.size());
    for (std::size_t l = 0; l < eps.size(); ++l) {
      if (!(eps[l] > 0.0)) throw Error("non-positive permittivity on link " + std::to_string(l));
      inv_eps[l] = 1.0 / eps[l];
    }
  }
  const double w2 = omega * omega / (c_ * c_);
  const auto cp = pattern_.col_ptr();
  const auto ri = pattern_.row_idx();
  std::vector<double> values(static_cast<std::size_t>(pattern_.nonzeros()));
  for (Index col = 0; col < pattern_.cols(); ++col) {
    for (Index k = cp[col]; k < cp[col + 1]; ++k) {
      double v = constant_[k];
      if (diagonal_[k]) v += formulation_ == Formulation::magnetic ? w2 : w2 * eps[ri[k]];
      for (Index t = term_ptr_[k]; t < term_ptr_[k + 1]; ++t) {
        v += term_coef_[t] * inv_eps[term_link_[t]];
      }
      values[k] = v;
    }
  }
  return SparseOperator(pattern_.rows(), pattern_.cols(),
                        std::vector<Index>(cp.begin(), cp.end()),
                        std::vector<Index>(ri.begin(), ri.end()), std::move(values), true);
}

std::vector<std::array<double, 3>> WaveOperatorBuilder::dof_positions() const {
  std::vector<std::array<double, 3>> out;
  out.reserve(static_cast<std::size_t>(dof_count()));
  if (formulation_ == Formulation::vector_potential) {
    for (Index l = 0; l < lat_.link_count(); ++l) {
      const Point p = lat_.midpoint(LinkId{l});
      out.push_back({p.x, p.y, p.z});
    }
  } else {
    for (Index f = 0; f < lat_.face_count(); ++f) {
      const FaceInfo info = lat_.decode(FaceId{f});
      const auto [i, j] = lat_.plane_axes(info.normal);
      std::array<double, 3> c{static_cast<double>(info.site[0]), static_cast<double>(info.site[1]),
                              static_cast<double>(info.site[2])};
      c[i] += 0.5;
      c[j] += 0.5;
      out.push_back(c);
    }
  }
  return out;
}

std::vector<Index> WaveOperatorBuilder::closure(std::span<const LinkId> links) const {
  std::vector<Index> out;
  for (const LinkId l : links) {
    if (formulation_ == Formulation::vector_potential) {
      out.push_back(l.value);
    } else {
      for (const auto& inc : lat_.faces_of_link(l)) out.push_back(inc.id.value);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<EntryDelta> WaveOperatorBuilder::delta_from_eps(std::span<const LinkId> links,
                                                            std::span<const double> eps_from,
                                                            std::span<const double> eps_to,
                                                            double omega) const {
  check_frequency(omega);
  std::map<std::pair<Index, Index>, double> acc;
  const double w2 = omega * omega / (c_ * c_);
  for (std::size_t k = 0; k < links.size(); ++k) {
    const LinkId l = links[k];
    if (formulation_ == Formulation::vector_potential) {
      acc[{l.value, l.value}] += (eps_to[k] - eps_from[k]) * w2;
    } else {
      const double d = 1.0 / eps_to[k] - 1.0 / eps_from[k];
      const auto faces = lat_.faces_of_link(l);
      for (std::size_t a = 0; a < faces.size(); ++a) {
        for (std::size_t b = a; b < faces.size(); ++b) {
          const Index r = std::min(faces[a].id.value, faces[b].id.value);
          const Index c = std::max(faces[a].id.value, faces[b].id.value);
          acc[{r, c}] += faces[a].sign * faces[b].sign * d;
        }
      }
    }
  }
  std::vector<EntryDelta> out;
  out.reserve(acc.size());
  for (const auto& [rc, v] : acc) {
    if (v != 0.0) out.push_back({rc.first, rc.second, v});
  }
  return out;
}

std::vector<EntryDelta> WaveOperatorBuilder::delta(const MaterialMap& base,
                                                   std::span<const LinkId> links,
                                                   const DielectricModel& model,
                                                   double omega) const {
  std::vector<double> from(links.size()), to(links.size());
  const double target = eval_epsilon(model, omega);
  for (std::size_t k = 0; k < links.size(); ++k) {
    from[k] = eval_epsilon(base.model_at(links[k]), omega);
    to[k] = target;
  }
  return delta_from_eps(links, from, to, omega);
}

std::vector<EntryDelta> WaveOperatorBuilder::delta(const MaterialMap& from, const MaterialMap& to,
                                                   std::span<const LinkId> links,
                                                   double omega) const {
  std::vector<double> ef(links.size()), et(links.size());
  for (std::size_t k = 0; k < links.size(); ++k) {
    ef[k] = eval_epsilon(from.model_at(links[k]), omega);
    et[k] = eval_epsilon(to.model_at(links[k]), omega);
  }
  return delta_from_eps(links, ef, et, omega);
}

}  // namespace latcas
