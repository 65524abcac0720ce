#pragma once

// Interior second-derivative estimate machinery for convex solutions of
// det hess u = f (1 + |grad u|^2)^2 on B_R:
//
//   tau(x)  unit eigenvector of hess u(x) for the larger eigenvalue
//   Sigma   = { |x| < R : r^2 - |x|^2 + <x,tau>^2 > 0, r^2 - <x,tau>^2 > 0 }
//   eta(x)  = (r^2 - |x|^2 + <x,tau>^2) (r^2 - <x,tau>^2),  r^2 = R^2 / 2
//   g(t)    = exp(c0 t / r^2),  c0 = 32 / m
//   phi(x)  = eta^beta g(|grad u|^2 / 2) u_tau_tau
//
// and the identity checks that the maximum-principle argument relies on.

#include "gclab/fieldcalc.hpp"
#include "gclab/grid.hpp"
#include "gclab/manufactured.hpp"
#include "gclab/solver.hpp"

#include <Eigen/Dense>

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gclab {

struct AuxiliaryConfig {
  double R = 1.0;
  double r_squared = 0.5;
  double beta = 4.0;
  double m = 1.0;
  double M = 1.0;
  double c0 = 32.0;
  double gap_floor = 1e-9;

  /// The standard constants: r^2 = R^2 / 2, beta = 4, c0 = 32 / m.
  static AuxiliaryConfig standard(double R, double m, double M);

  /// g'/g = c0 / r^2.
  double weight_rate() const { return c0 / r_squared; }
  void validate() const;
};

/// g(t) = exp(c0 t / r^2) and its derivatives. Every accessor throws
/// RangeError once the exponent exceeds 700.
class ExponentialWeight {
 public:
  explicit ExponentialWeight(const AuxiliaryConfig& config) : rate_(config.weight_rate()) {}

  static constexpr double max_exponent = 700.0;

  double value(double t) const;
  double derivative(double t) const { return rate_ * value(t); }
  double second(double t) const { return rate_ * rate_ * value(t); }
  double log_derivative() const noexcept { return rate_; }

 private:
  double rate_;
};

double weight_g(double t, const AuxiliaryConfig& config);

/// Top eigenvector of a 2 x 2 symmetric matrix with the field orientation
/// tau_1 > 0, or tau_1 = 0 and tau_2 > 0. When the eigenvalue gap is below
/// `gap_floor` the reference direction (1, 0) is returned and `degenerate`
/// is set.
struct TauNode {
  Eigen::Vector2d tau{1.0, 0.0};
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  bool degenerate = false;

  double gap() const noexcept { return lambda1 - lambda2; }
};

TauNode top_eigenvector(const Eigen::Matrix2d& hessian, double gap_floor);

class TauField {
 public:
  TauField(const HessianField& hessians, const AuxiliaryConfig& config);

  const Grid2D& grid() const noexcept { return grid_; }
  bool defined(int i, int j) const noexcept { return grid_.margin(i, j) >= 1; }
  /// Throws DomainError on the outermost ring.
  const TauNode& at(int i, int j) const;
  int degenerate_count() const noexcept { return degenerate_count_; }

 private:
  Grid2D grid_;
  std::vector<TauNode> nodes_;
  int degenerate_count_ = 0;
};

TauField tau_field(const ScalarField& u, const AuxiliaryConfig& config);

bool sigma_membership(const Eigen::Vector2d& x, const Eigen::Vector2d& tau, const AuxiliaryConfig& config);
double eta_eval(const Eigen::Vector2d& x, const Eigen::Vector2d& tau, const AuxiliaryConfig& config);

bool sigma_membership(const TauField& tau, int i, int j, const AuxiliaryConfig& config);
double eta_eval(const TauField& tau, int i, int j, const AuxiliaryConfig& config);

/// A field defined only on Sigma-nodes.
struct PhiField {
  Grid2D grid;
  std::vector<double> values;
  std::vector<char> present;

  explicit PhiField(const Grid2D& g) : grid(g), values(g.node_count(), 0.0), present(g.node_count(), 0) {}

  bool has(int i, int j) const { return present[grid.index(i, j)] != 0; }
  double operator()(int i, int j) const { return values[grid.index(i, j)]; }
  int count() const;
};

/// Throws RangeError naming the first node, in node order, whose weight
/// overflows.
PhiField phi_eval(const HessianField& hessians, const TauField& tau, const AuxiliaryConfig& config);

struct InteriorMax {
  int i = -1;
  int j = -1;
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  double value = 0.0;
  /// Some 4-neighbour of the argmax lies outside Sigma.
  bool rim_adjacent = false;
};

/// Argmax over Sigma-nodes; ties go to the lexicographically first (i, j).
/// Throws EmptySetError if Sigma has no nodes.
InteriorMax locate_interior_max(const PhiField& phi);

/// Ingredients of the first-order condition at a maximum of
/// log phi = beta log eta + log g + log u_11, in a frame where the Hessian is
/// diagonal with the larger eigenvalue first. Index c runs over the two frame
/// directions.
struct CriticalPointData {
  double u11 = 0.0;                                      ///< lambda_1
  Eigen::Vector2d u11_c = Eigen::Vector2d::Zero();       ///< d u_11 / d x_c
  double eta = 0.0;
  Eigen::Vector2d eta_c = Eigen::Vector2d::Zero();       ///< d eta / d x_c
  Eigen::Vector2d u_c = Eigen::Vector2d::Zero();         ///< gradient
  Eigen::Vector2d u_cc = Eigen::Vector2d::Zero();        ///< diagonal Hessian entries
};

/// |u_11c / u_11 + beta eta_c / eta + (g'/g) u_c u_cc| for c = 1, 2.
Eigen::Vector2d critical_point_residual(const CriticalPointData& data, const AuxiliaryConfig& config);

struct CriticalPointResult {
  bool skipped = false;
  std::string reason;
  Eigen::Vector2d residual = Eigen::Vector2d::Zero();
  CriticalPointData data;

  double max() const { return residual.maxCoeff(); }
};

/// Evaluates the first-order condition at node (i, j) with centered
/// differences of the Hessian and eta fields projected onto the eigenframe of
/// hess u(i, j). Skipped at degenerate or rim-adjacent nodes.
CriticalPointResult critical_point_check(const HessianField& hessians, const TauField& tau,
                                         const AuxiliaryConfig& config, const InteriorMax& x0);

/// Sup-norm summary of a pointwise identity residual.
struct IdentityCheck {
  double sup = 0.0;
  int worst_i = -1;
  int worst_j = -1;
  int nodes = 0;
  /// Roundoff level below which the residual carries no information.
  double floor = 0.0;
};

/// |lambda_1 lambda_2 - f (1 + |grad u|^2)^2| over nodes with margin >= 2.
IdentityCheck equation_identity_check(const HessianField& hessians, const ProblemSpec& spec);

/// d_i det hess u = sum_pq F^pq u_pqi against d_i [f (1 + |grad u|^2)^2],
/// with analytic f and grad f, over nodes with margin >= 3 (stencils never
/// touch the outermost ring, which holds data rather than solution values).
IdentityCheck differentiated_equation_check(const HessianField& hessians, const ManufacturedSolution& data);

/// The second-variation part of d_ij det hess u for n = 2:
/// u_11i u_22j + u_22i u_11j - u_12i u_21j - u_21i u_12j.
double det_second_variation_terms(const ThirdDerivatives& third, int i, int j);

/// d_ij det hess u = sum F^pq u_pqij + second-variation terms, against
/// d_ij [f (1 + |grad u|^2)^2] with analytic f and its derivatives, over
/// nodes with margin >= 4. `floor` is eps sup|u| sup|F| 16 / h^4.
IdentityCheck det_second_variation_check(const ScalarField& u, const HessianField& hessians,
                                         const ManufacturedSolution& data);

struct TauDirectionalCheck {
  bool skipped = false;
  std::string reason;
  /// |<x, d_c tau> - x'_2 u'_12c / (lambda_1 - lambda_2)| in the local frame.
  IdentityCheck identity;
  /// |finite-difference d_c tau - chain rule through eigen_derivatives|.
  IdentityCheck chain_rule;
};

/// Nodes with margin >= 3 whose own gap and whose 4-neighbours' gaps are at
/// least `min_gap` (default 10 gap_floor) and, when `radius` > 0, that lie
/// in the open ball of that radius.
TauDirectionalCheck tau_directional_check(const HessianField& hessians, const TauField& tau,
                                          const AuxiliaryConfig& config, double min_gap = -1.0,
                                          double radius = 0.0);

struct ConstantsDigest {
  double m = 0.0;
  double M = 0.0;
  double R = 0.0;
  double sup_grad_f = 0.0;
  double sup_hess_f = 0.0;
  double sup_grad_u = 0.0;
};

/// Data constants measured over nodes of the closed ball: m, M from the
/// problem, derivative sups of the analytic f, and the discrete |grad u|.
ConstantsDigest constants_digest(const ProblemSpec& spec, const HessianField& hessians);

struct EstimateReport {
  AuxiliaryConfig config;
  int sigma_nodes = 0;
  int degenerate_nodes = 0;
  InteriorMax x0;
  double phi_max = 0.0;
  double eta_lambda1_max = 0.0;
  Eigen::Vector2d tau_origin{1.0, 0.0};
  bool origin_degenerate = false;
  double u_tau_tau_origin = 0.0;
  double bound_at_origin = 0.0;  ///< phi_max / r^(4 beta)
  std::array<double, 16> directional{};  ///< u_xi_xi(0), xi at angles k pi / 16
  bool directional_chain_holds = false;  ///< every u_xi_xi(0) <= u_tau_tau(0) + 1e-12
  bool origin_chain_holds = false;       ///< u_tau_tau(0) <= bound_at_origin + 1e-12
  CriticalPointResult critical_point;
  std::map<std::string, double> identity_residuals;
  double det_second_variation_floor = 0.0;
  ConstantsDigest constants;

  bool chain_holds() const { return directional_chain_holds && origin_chain_holds; }
};

/// Assembles the full report. Throws RangeError on weight overflow and
/// EmptySetError if Sigma is empty. Needs manufactured data in `spec`.
EstimateReport bound_report(const ProblemSpec& spec, const ScalarField& u, const AuxiliaryConfig& config);

struct SweepInstance {
  std::string family;
  double radius = 1.0;
  int n_cells = 64;
  /// f is multiplied by `scale` through the homothety u -> mu u(x / mu) with
  /// mu = 1 / sqrt(scale); the ball radius shrinks to mu R accordingly.
  double scale = 1.0;
};

struct SweepRow {
  SweepInstance instance;
  double radius = 0.0;  ///< effective radius after the homothety
  bool ok = false;
  std::string failure;
  int iterations = 0;
  double r_squared = 0.0;
  double c0 = 0.0;
  ConstantsDigest constants;
  double phi_max = 0.0;
  double eta_lambda1_max = 0.0;
  double u_tau_tau_origin = 0.0;
  double bound_at_origin = 0.0;
};

/// Solves and reports every instance; failures are recorded, not thrown.
/// `beta` and `gap_floor` come from `aux_template`; R, m, M, c0 and r^2 are
/// recomputed per instance.
std::vector<SweepRow> parameter_sweep(const std::vector<SweepInstance>& instances, const SolverConfig& solver,
                                      const AuxiliaryConfig& aux_template);

}  // namespace gclab
