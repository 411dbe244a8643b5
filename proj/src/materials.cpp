#include "latcas/materials.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace latcas {

DielectricModel make_constant(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error("constant permittivity must be positive and finite");
  }
  return ConstantDielectric{epsilon};
}

DielectricModel make_single_pole(double chi, double omega0) {
  if (!(chi >= 0.0) || !std::isfinite(chi)) throw Error("susceptibility chi must be >= 0");
  if (!(omega0 > 0.0)) throw Error("resonance omega0 must be > 0");
  return SinglePole{chi, omega0};
}

namespace {

double pole_epsilon(const SinglePole& p, double w) {
  if (std::isinf(p.omega0)) return 1.0 + p.chi;
  const double r = w / p.omega0;
  return 1.0 + p.chi / (1.0 + r * r);
}

SinglePole as_pole(const DielectricModel& m) {
  if (std::holds_alternative<Vacuum>(m)) return SinglePole{0.0};
  if (const auto* c = std::get_if<ConstantDielectric>(&m)) return SinglePole{c->epsilon - 1.0};
  if (const auto* p = std::get_if<SinglePole>(&m)) return *p;
  throw Error("cannot blend an already blended material");
}

}  // namespace

DielectricModel blend(const DielectricModel& a, const DielectricModel& b) {
  if (a == b) return a;
  const SinglePole pa = as_pole(a), pb = as_pole(b);
  if (std::isinf(pa.omega0) && std::isinf(pb.omega0)) {
    return ConstantDielectric{1.0 + 0.5 * (pa.chi + pb.chi)};
  }
  return EqualBlend{std::min(pa, pb), std::max(pa, pb)};
}

double eval_epsilon(const DielectricModel& m, double omega) {
  if (!(omega >= 0.0)) throw Error("permittivity requested at negative frequency");
  struct Visitor {
    double w;
    double operator()(const Vacuum&) const { return 1.0; }
    double operator()(const ConstantDielectric& c) const { return c.epsilon; }
    double operator()(const SinglePole& p) const { return pole_epsilon(p, w); }
    double operator()(const EqualBlend& b) const {
      return 0.5 * (pole_epsilon(b.first, w) + pole_epsilon(b.second, w));
    }
  };
  return std::visit(Visitor{omega}, m);
}

std::string describe(const DielectricModel& m) {
  std::ostringstream os;
  os.precision(17);
  struct Visitor {
    std::ostringstream& os;
    void operator()(const Vacuum&) const { os << "vacuum"; }
    void operator()(const ConstantDielectric& c) const { os << "constant(" << c.epsilon << ")"; }
    void operator()(const SinglePole& p) const {
      os << "single_pole(" << p.chi << ", " << p.omega0 << ")";
    }
    void operator()(const EqualBlend& b) const {
      os << "blend(single_pole(" << b.first.chi << ", " << b.first.omega0 << "), single_pole(" << b.second.chi
         << ", " << b.second.omega0 << "))";
    }
  };
  std::visit(Visitor{os}, m);
  return os.str();
}

double resonance(const DielectricModel& m) {
  if (const auto* p = std::get_if<SinglePole>(&m)) return p->omega0;
  if (const auto* b = std::get_if<EqualBlend>(&m)) return std::min(b->first.omega0, b->second.omega0);
  return std::numeric_limits<double>::infinity();
}

MaterialMap::MaterialMap(Lattice lattice)
    : lattice_(std::move(lattice)),
      models_{Vacuum{}},
      link_model_(static_cast<std::size_t>(lattice_.link_count()), 0) {}

MaterialMap::ModelId MaterialMap::intern(const DielectricModel& m) {
  const auto it = std::find(models_.begin(), models_.end(), m);
  if (it != models_.end()) return static_cast<ModelId>(it - models_.begin());
  if (models_.size() >= std::numeric_limits<ModelId>::max()) throw Error("too many materials");
  models_.push_back(m);
  return static_cast<ModelId>(models_.size() - 1);
}

void MaterialMap::assign(LinkId l, const DielectricModel& m) {
  if (l.value < 0 || l.value >= lattice_.link_count()) throw Error("link id out of range");
  link_model_[l.value] = intern(m);
}

void MaterialMap::stamp(const Region& region, const DielectricModel& m) {
  const ModelId id = intern(m);
  for (Index l = 0; l < lattice_.link_count(); ++l) {
    if (region(lattice_.midpoint(LinkId{l}))) link_model_[l] = id;
  }
}

MaterialMap MaterialMap::stamp_region(const Region& region, const DielectricModel& m) const {
  MaterialMap out = *this;
  out.stamp(region, m);
  return out;
}

std::vector<double> MaterialMap::epsilon(double omega) const {
  std::vector<double> table(models_.size());
  for (std::size_t i = 0; i < models_.size(); ++i) table[i] = eval_epsilon(models_[i], omega);
  std::vector<double> out(link_model_.size());
  for (std::size_t l = 0; l < link_model_.size(); ++l) out[l] = table[link_model_[l]];
  return out;
}

std::vector<LinkId> MaterialMap::differing_links(const MaterialMap& a, const MaterialMap& b) {
  if (!(a.lattice_ == b.lattice_)) throw Error("material maps live on different lattices");
  std::vector<LinkId> out;
  for (std::size_t l = 0; l < a.link_model_.size(); ++l) {
    if (a.models_[a.link_model_[l]] != b.models_[b.link_model_[l]]) {
      out.push_back(LinkId{static_cast<Index>(l)});
    }
  }
  return out;
}

std::vector<LinkId> MaterialMap::occupied_links() const {
  std::vector<LinkId> out;
  for (std::size_t l = 0; l < link_model_.size(); ++l) {
    if (!std::holds_alternative<Vacuum>(models_[link_model_[l]])) {
      out.push_back(LinkId{static_cast<Index>(l)});
    }
  }
  return out;
}

bool MaterialMap::same_materials(const MaterialMap& o) const {
  return lattice_ == o.lattice_ && differing_links(*this, o).empty();
}

}  // namespace latcas
