#pragma once

#include <compare>
#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "latcas/lattice.hpp"

namespace latcas {

struct Vacuum {
  auto operator<=>(const Vacuum&) const = default;
};

/// Frequency-independent permittivity (the fully retarded limit).
struct ConstantDielectric {
  double epsilon = 1.0;
  auto operator<=>(const ConstantDielectric&) const = default;
};

/// eps(w) = 1 + chi / (1 + w^2 / w0^2), evaluated at imaginary frequency w.
/// An infinite w0 is the constant 1 + chi.
struct SinglePole {
  double chi = 0.0;
  double omega0 = std::numeric_limits<double>::infinity();
  auto operator<=>(const SinglePole&) const = default;
};

/// Equal-weight average of two single-pole responses, eps = (eps_1 + eps_2) / 2.
/// Used for links shared by two materials.
struct EqualBlend {
  SinglePole first;
  SinglePole second;
  auto operator<=>(const EqualBlend&) const = default;
};

using DielectricModel = std::variant<Vacuum, ConstantDielectric, SinglePole, EqualBlend>;

/// Validates parameters; throws on eps_c <= 0, chi < 0 or omega0 <= 0.
DielectricModel make_constant(double epsilon);
DielectricModel make_single_pole(double chi, double omega0);

/// (a + b) / 2 pointwise in frequency; a constant when neither disperses.
/// Nested blends are rejected.
DielectricModel blend(const DielectricModel& a, const DielectricModel& b);

double eval_epsilon(const DielectricModel& m, double omega);
std::string describe(const DielectricModel& m);
/// Smallest finite resonance frequency, or +inf for non-dispersive models.
double resonance(const DielectricModel& m);

/// Assignment of a dielectric model to every link of a lattice.
///
/// Models are interned in a small table; links store table ids. Model 0 is
/// always vacuum, which is also the default for every link.
class MaterialMap {
 public:
  using ModelId = std::uint16_t;
  using Region = std::function<bool(const Point&)>;

  explicit MaterialMap(Lattice lattice);

  const Lattice& lattice() const { return lattice_; }
  const std::vector<DielectricModel>& models() const { return models_; }
  std::span<const ModelId> link_models() const { return link_model_; }

  ModelId intern(const DielectricModel& m);
  const DielectricModel& model_at(LinkId l) const { return models_[link_model_[l.value]]; }
  void assign(LinkId l, const DielectricModel& m);

  /// Reassigns exactly the links whose midpoint satisfies `region`.
  MaterialMap stamp_region(const Region& region, const DielectricModel& m) const;
  void stamp(const Region& region, const DielectricModel& m);

  /// Per-link permittivity at frequency omega; each table entry evaluated once.
  std::vector<double> epsilon(double omega) const;

  /// Links whose model differs between two maps on the same lattice.
  static std::vector<LinkId> differing_links(const MaterialMap& a, const MaterialMap& b);
  /// Links carrying a non-vacuum model.
  std::vector<LinkId> occupied_links() const;

  bool same_materials(const MaterialMap& o) const;

 private:
  Lattice lattice_;
  std::vector<DielectricModel> models_;
  std::vector<ModelId> link_model_;
};

}  // namespace latcas
