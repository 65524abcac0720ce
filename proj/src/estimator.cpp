#include "gclab/estimator.hpp"

#include "gclab/eigensys.hpp"
#include "gclab/error.hpp"
#include "gclab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace gclab {

namespace {

using Vec = Eigen::Vector2d;
using Mat = Eigen::Matrix2d;

constexpr double kEps = std::numeric_limits<double>::epsilon();

// The outermost ring carries boundary data that the discrete equation does not
// govern, so a difference stencil touching it sees an O(h^3) inconsistency.
// Third differences reach two nodes and fourth differences are kept one node
// further in.
constexpr int kThirdMargin = 3;
constexpr int kFourthMargin = 4;

Mat frame_of(const Vec& tau) {
  Mat q;
  q.col(0) = tau;
  q.col(1) = Vec(-tau(1), tau(0));
  return q;
}

void record(IdentityCheck& check, double value, int i, int j) {
  ++check.nodes;
  if (check.worst_i < 0 || value > check.sup) {
    check.sup = value;
    check.worst_i = i;
    check.worst_j = j;
  }
}

std::string node_name(int i, int j, const Vec& x) {
  std::ostringstream msg;
  msg << "node (" << i << ", " << j << ") at x = (" << x(0) << ", " << x(1) << ")";
  return msg.str();
}

}  // namespace

AuxiliaryConfig AuxiliaryConfig::standard(double R, double m, double M) {
  AuxiliaryConfig c;
  c.R = R;
  c.r_squared = R * R / 2.0;
  c.m = m;
  c.M = M;
  c.c0 = 32.0 / m;
  return c;
}

void AuxiliaryConfig::validate() const {
  if (!(R > 0.0) || !std::isfinite(R)) throw InputError("R must be positive");
  if (!(r_squared > 0.0)) throw InputError("r^2 must be positive");
  if (!(beta > 0.0)) throw InputError("beta must be positive");
  if (!(m > 0.0) || !std::isfinite(m)) throw InputError("m must be positive");
  if (!(M >= m)) throw InputError("M must be at least m");
  if (!(c0 > 0.0) || !std::isfinite(c0)) throw InputError("c0 must be positive and finite");
  if (!(gap_floor >= 0.0)) throw InputError("gap_floor must be non-negative");
}

double ExponentialWeight::value(double t) const {
  const double exponent = rate_ * t;
  if (!(exponent <= max_exponent)) {
    std::ostringstream msg;
    msg << "weight exponent c0 t / r^2 = " << exponent << " exceeds " << max_exponent;
    throw RangeError(msg.str());
  }
  return std::exp(exponent);
}

double weight_g(double t, const AuxiliaryConfig& config) { return ExponentialWeight(config).value(t); }

TauNode top_eigenvector(const Mat& hessian, double gap_floor) {
  const EigenSystem es = eigen_system(SymMatrix(Eigen::MatrixXd(hessian)));
  TauNode node;
  node.lambda1 = es.values(0);
  node.lambda2 = es.values(1);
  if (node.gap() < gap_floor) {
    node.degenerate = true;
    node.tau = Vec(1.0, 0.0);
    return node;
  }
  node.tau = es.vectors.col(0);
  if (node.tau(0) < 0.0 || (node.tau(0) == 0.0 && node.tau(1) < 0.0)) node.tau = -node.tau;
  return node;
}

TauField::TauField(const HessianField& hessians, const AuxiliaryConfig& config)
    : grid_(hessians.grid()), nodes_(hessians.grid().node_count()) {
  const int n = grid_.n_cells();
  parallel_for(1, n, [&](int j) {
    for (int i = 1; i < n; ++i) nodes_[grid_.index(i, j)] = top_eigenvector(hessians.at(i, j).hessian, config.gap_floor);
  });
  for (int j = 1; j < n; ++j)
    for (int i = 1; i < n; ++i)
      if (nodes_[grid_.index(i, j)].degenerate) ++degenerate_count_;
}

const TauNode& TauField::at(int i, int j) const {
  if (i < 0 || j < 0 || i > grid_.n_cells() || j > grid_.n_cells() || !defined(i, j))
    throw DomainError("TauField: node outside the one-node margin");
  return nodes_[grid_.index(i, j)];
}

TauField tau_field(const ScalarField& u, const AuxiliaryConfig& config) { return TauField(HessianField(u), config); }

bool sigma_membership(const Vec& x, const Vec& tau, const AuxiliaryConfig& config) {
  const double along = x.dot(tau);
  const double first = config.r_squared - x.squaredNorm() + along * along;
  const double second = config.r_squared - along * along;
  return x.squaredNorm() < config.R * config.R && first > 0.0 && second > 0.0;
}

double eta_eval(const Vec& x, const Vec& tau, const AuxiliaryConfig& config) {
  const double along = x.dot(tau);
  return (config.r_squared - x.squaredNorm() + along * along) * (config.r_squared - along * along);
}

bool sigma_membership(const TauField& tau, int i, int j, const AuxiliaryConfig& config) {
  return sigma_membership(tau.grid().point(i, j), tau.at(i, j).tau, config);
}

double eta_eval(const TauField& tau, int i, int j, const AuxiliaryConfig& config) {
  return eta_eval(tau.grid().point(i, j), tau.at(i, j).tau, config);
}

int PhiField::count() const { return static_cast<int>(std::count(present.begin(), present.end(), char{1})); }

PhiField phi_eval(const HessianField& hessians, const TauField& tau, const AuxiliaryConfig& config) {
  const Grid2D& grid = hessians.grid();
  const ExponentialWeight weight(config);
  PhiField phi(grid);
  const int n = grid.n_cells();
  for (int j = 1; j < n; ++j)
    for (int i = 1; i < n; ++i) {
      const Vec x = grid.point(i, j);
      const TauNode& node = tau.at(i, j);
      if (!sigma_membership(x, node.tau, config)) continue;
      const NodeDerivatives& d = hessians.at(i, j);
      double w = 0.0;
      try {
        w = weight.value(0.5 * d.gradient.squaredNorm());
      } catch (const RangeError& e) {
        throw RangeError(std::string(e.what()) + " at " + node_name(i, j, x));
      }
      const double eta = eta_eval(x, node.tau, config);
      const double u_tt = node.tau.dot(d.hessian * node.tau);
      const std::size_t k = grid.index(i, j);
      phi.values[k] = std::pow(eta, config.beta) * w * u_tt;
      phi.present[k] = 1;
    }
  return phi;
}

InteriorMax locate_interior_max(const PhiField& phi) {
  const Grid2D& grid = phi.grid;
  const int n = grid.n_cells();
  InteriorMax best;
  bool found = false;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      if (!phi.has(i, j)) continue;
      if (!found || phi(i, j) > best.value) {
        best.i = i;
        best.j = j;
        best.value = phi(i, j);
        found = true;
      }
    }
  if (!found) throw EmptySetError("the localization set contains no grid nodes");
  best.x = grid.point(best.i, best.j);
  auto outside = [&](int a, int b) { return a < 0 || b < 0 || a > n || b > n || !phi.has(a, b); };
  best.rim_adjacent = outside(best.i + 1, best.j) || outside(best.i - 1, best.j) || outside(best.i, best.j + 1) ||
                      outside(best.i, best.j - 1);
  return best;
}

Vec critical_point_residual(const CriticalPointData& data, const AuxiliaryConfig& config) {
  Vec out;
  for (int c = 0; c < 2; ++c)
    out(c) = std::abs(data.u11_c(c) / data.u11 + config.beta * data.eta_c(c) / data.eta +
                      config.weight_rate() * data.u_c(c) * data.u_cc(c));
  return out;
}

CriticalPointResult critical_point_check(const HessianField& hessians, const TauField& tau,
                                         const AuxiliaryConfig& config, const InteriorMax& x0) {
  CriticalPointResult result;
  const int i = x0.i;
  const int j = x0.j;
  const Grid2D& grid = hessians.grid();
  if (x0.rim_adjacent) {
    result.skipped = true;
    result.reason = "argmax is adjacent to the rim of the localization set";
    return result;
  }
  if (grid.margin(i, j) < kThirdMargin) {
    result.skipped = true;
    result.reason = "argmax is too close to the grid boundary for third differences";
    return result;
  }
  const std::array<std::array<int, 2>, 5> stencil{{{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  for (const auto& o : stencil)
    if (tau.at(i + o[0], j + o[1]).degenerate) {
      result.skipped = true;
      result.reason = "degenerate eigenvalue gap at or next to the argmax";
      return result;
    }

  const double h = grid.spacing();
  const Mat q = frame_of(tau.at(i, j).tau);
  const NodeDerivatives& d = hessians.at(i, j);
  const ThirdDerivatives third = third_fd(hessians, i, j);
  const Vec e1 = q.col(0);

  Vec grid_u11(e1.dot(third[0] * e1), e1.dot(third[1] * e1));
  Vec grid_eta((eta_eval(tau, i + 1, j, config) - eta_eval(tau, i - 1, j, config)) / (2.0 * h),
               (eta_eval(tau, i, j + 1, config) - eta_eval(tau, i, j - 1, config)) / (2.0 * h));

  CriticalPointData& data = result.data;
  const Mat rotated = q.transpose() * d.hessian * q;
  data.u11 = rotated(0, 0);
  data.u11_c = q.transpose() * grid_u11;
  data.eta = eta_eval(tau, i, j, config);
  data.eta_c = q.transpose() * grid_eta;
  data.u_c = q.transpose() * d.gradient;
  data.u_cc = Vec(rotated(0, 0), rotated(1, 1));
  result.residual = critical_point_residual(data, config);
  return result;
}

IdentityCheck equation_identity_check(const HessianField& hessians, const ProblemSpec& spec) {
  IdentityCheck check;
  const int n = spec.grid.n_cells();
  for (int j = 2; j <= n - 2; ++j)
    for (int i = 2; i <= n - 2; ++i) {
      const NodeDerivatives& d = hessians.at(i, j);
      const Mat& hs = d.hessian;
      const double mean = 0.5 * (hs(0, 0) + hs(1, 1));
      const double radius = std::hypot(0.5 * (hs(0, 0) - hs(1, 1)), hs(0, 1));
      const double q = 1.0 + d.gradient.squaredNorm();
      record(check, std::abs((mean + radius) * (mean - radius) - spec.f(i, j) * q * q), i, j);
    }
  return check;
}

IdentityCheck differentiated_equation_check(const HessianField& hessians, const ManufacturedSolution& data) {
  IdentityCheck check;
  const Grid2D& grid = hessians.grid();
  const int n = grid.n_cells();
  double sup_cof = 0.0;
  for (int j = kThirdMargin; j <= n - kThirdMargin; ++j)
    for (int i = kThirdMargin; i <= n - kThirdMargin; ++i) {
      const Vec x = grid.point(i, j);
      const NodeDerivatives& d = hessians.at(i, j);
      const ThirdDerivatives third = third_fd(hessians, i, j);
      const double f = data.f(x);
      const Vec grad_f = data.grad_f(x);
      const double q = 1.0 + d.gradient.squaredNorm();
      const Vec dq = 2.0 * d.hessian * d.gradient;
      double worst = 0.0;
      for (int c = 0; c < 2; ++c) {
        const double lhs = d.cofactor.cwiseProduct(third[c]).sum();
        const double rhs = grad_f(c) * q * q + 2.0 * f * q * dq(c);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
      sup_cof = std::max(sup_cof, d.cofactor.cwiseAbs().maxCoeff());
      record(check, worst, i, j);
    }
  const double h = grid.spacing();
  check.floor = kEps * sup_cof * 4.0 / (h * h * h);
  return check;
}

double det_second_variation_terms(const ThirdDerivatives& third, int i, int j) {
  return third[i](0, 0) * third[j](1, 1) + third[i](1, 1) * third[j](0, 0) - third[i](0, 1) * third[j](1, 0) -
         third[i](1, 0) * third[j](0, 1);
}

IdentityCheck det_second_variation_check(const ScalarField& u, const HessianField& hessians,
                                         const ManufacturedSolution& data) {
  const Grid2D& grid = hessians.grid();
  const int n = grid.n_cells();
  if (n < 2 * kFourthMargin + 2) throw DomainError("grid too coarse for the second-variation check");
  IdentityCheck check;
  double sup_cof = 0.0;
  for (int j = kFourthMargin; j <= n - kFourthMargin; ++j)
    for (int i = kFourthMargin; i <= n - kFourthMargin; ++i) {
      const Vec x = grid.point(i, j);
      const NodeDerivatives& d = hessians.at(i, j);
      const ThirdDerivatives third = third_fd(hessians, i, j);
      const FourthDerivatives fourth = fourth_fd(hessians, i, j);
      const double f = data.f(x);
      const Vec grad_f = data.grad_f(x);
      const Mat hess_f = data.hess_f(x);
      const Vec& g = d.gradient;
      const Mat& hs = d.hessian;
      const double q = 1.0 + g.squaredNorm();
      const Vec dq = 2.0 * hs * g;
      double worst = 0.0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const double lhs = d.cofactor.cwiseProduct(fourth[a][b]).sum() + det_second_variation_terms(third, a, b);
          // Q_ab = 2 sum_k (u_ka u_kb + u_k u_kab), with u_kab = third[b](k, a).
          double dqq = 0.0;
          for (int k = 0; k < 2; ++k) dqq += hs(k, a) * hs(k, b) + g(k) * third[b](k, a);
          dqq *= 2.0;
          const double rhs = hess_f(a, b) * q * q + 2.0 * q * (grad_f(a) * dq(b) + grad_f(b) * dq(a)) +
                             f * (2.0 * dq(a) * dq(b) + 2.0 * q * dqq);
          worst = std::max(worst, std::abs(lhs - rhs));
        }
      sup_cof = std::max(sup_cof, d.cofactor.cwiseAbs().maxCoeff());
      record(check, worst, i, j);
    }
  double sup_u = 0.0;
  for (double v : u.values()) sup_u = std::max(sup_u, std::abs(v));
  const double h = grid.spacing();
  check.floor = kEps * sup_u * sup_cof * 16.0 / (h * h * h * h);
  return check;
}

TauDirectionalCheck tau_directional_check(const HessianField& hessians, const TauField& tau,
                                          const AuxiliaryConfig& config, double min_gap, double radius) {
  if (min_gap < 0.0) min_gap = 10.0 * config.gap_floor;
  TauDirectionalCheck out;
  const Grid2D& grid = hessians.grid();
  const int n = grid.n_cells();
  const double h = grid.spacing();
  const std::array<std::array<int, 2>, 5> stencil{{{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

  for (int j = kThirdMargin; j <= n - kThirdMargin; ++j)
    for (int i = kThirdMargin; i <= n - kThirdMargin; ++i) {
      const Vec x = grid.point(i, j);
      if (radius > 0.0 && !(x.norm() < radius)) continue;
      bool admissible = true;
      for (const auto& o : stencil) {
        const TauNode& nb = tau.at(i + o[0], j + o[1]);
        if (nb.degenerate || nb.gap() < min_gap) admissible = false;
      }
      if (!admissible) continue;

      const TauNode& centre = tau.at(i, j);
      const Vec t0 = centre.tau;
      auto aligned = [&](int a, int b) {
        const Vec t = tau.at(a, b).tau;
        return t.dot(t0) < 0.0 ? Vec(-t) : t;
      };
      std::array<Vec, 2> grid_dtau{(aligned(i + 1, j) - aligned(i - 1, j)) / (2.0 * h),
                                   (aligned(i, j + 1) - aligned(i, j - 1)) / (2.0 * h)};
      const ThirdDerivatives third = third_fd(hessians, i, j);
      const Mat q = frame_of(t0);
      const double gap = centre.gap();

      double identity = 0.0;
      for (int c = 0; c < 2; ++c) {
        const Vec dtau = q(0, c) * grid_dtau[0] + q(1, c) * grid_dtau[1];
        const Mat dh = q(0, c) * third[0] + q(1, c) * third[1];
        const double lhs = x.dot(dtau);
        const double rhs = q.col(1).dot(x) * q.col(0).dot(dh * q.col(1)) / gap;
        identity = std::max(identity, std::abs(lhs - rhs));
      }
      record(out.identity, identity, i, j);

      // Chain rule: d_c tau_m = sum_pq (d tau_m / d W_pq) u_pqc.
      const SymMatrix w(Eigen::MatrixXd(hessians.at(i, j).hessian));
      const EigenDerivatives deriv = eigen_derivatives(w, 0, 0.5 * min_gap);
      const double sign = eigen_system(w).vectors.col(0).dot(t0) < 0.0 ? -1.0 : 1.0;
      double chain = 0.0;
      for (int c = 0; c < 2; ++c)
        for (int m = 0; m < 2; ++m) {
          double value = 0.0;
          for (int p = 0; p < 2; ++p)
            for (int s = 0; s < 2; ++s) value += deriv.d_tau(m, p, s) * third[c](p, s);
          chain = std::max(chain, std::abs(sign * value - grid_dtau[c](m)));
        }
      record(out.chain_rule, chain, i, j);
    }

  if (out.identity.nodes == 0) {
    out.skipped = true;
    out.reason = "no node with a sufficient eigenvalue gap";
  }
  return out;
}

ConstantsDigest constants_digest(const ProblemSpec& spec, const HessianField& hessians) {
  if (!spec.exact) throw InputError("constants digest needs manufactured data");
  ConstantsDigest c;
  c.m = spec.m;
  c.M = spec.M;
  c.R = spec.radius;
  const Grid2D& grid = spec.grid;
  const int n = grid.n_cells();
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      const Vec x = grid.point(i, j);
      if (x.norm() > spec.radius) continue;
      c.sup_grad_f = std::max(c.sup_grad_f, spec.exact->grad_f(x).norm());
      const Mat hf = spec.exact->hess_f(x);
      const double mean = 0.5 * (hf(0, 0) + hf(1, 1));
      const double rad = std::hypot(0.5 * (hf(0, 0) - hf(1, 1)), hf(0, 1));
      c.sup_hess_f = std::max(c.sup_hess_f, std::abs(mean) + rad);
      if (hessians.defined(i, j)) c.sup_grad_u = std::max(c.sup_grad_u, hessians.at(i, j).gradient.norm());
    }
  return c;
}

EstimateReport bound_report(const ProblemSpec& spec, const ScalarField& u, const AuxiliaryConfig& config) {
  config.validate();
  if (!spec.exact) throw InputError("the estimate report needs manufactured data");
  if (!(u.grid() == spec.grid)) throw InputError("solution and problem grids differ");

  EstimateReport report;
  report.config = config;
  const HessianField hessians(u);
  const TauField tau(hessians, config);
  report.degenerate_nodes = tau.degenerate_count();

  const PhiField phi = phi_eval(hessians, tau, config);
  report.sigma_nodes = phi.count();
  report.x0 = locate_interior_max(phi);
  report.phi_max = report.x0.value;

  const Grid2D& grid = spec.grid;
  const int n = grid.n_cells();
  for (int j = 1; j < n; ++j)
    for (int i = 1; i < n; ++i)
      if (phi.has(i, j))
        report.eta_lambda1_max = std::max(report.eta_lambda1_max, eta_eval(tau, i, j, config) * tau.at(i, j).lambda1);

  const int c = grid.center();
  const TauNode& origin = tau.at(c, c);
  const Mat& h0 = hessians.at(c, c).hessian;
  report.tau_origin = origin.tau;
  report.origin_degenerate = origin.degenerate;
  report.u_tau_tau_origin = origin.tau.dot(h0 * origin.tau);
  report.bound_at_origin = report.phi_max / std::pow(config.r_squared, 2.0 * config.beta);
  report.directional_chain_holds = true;
  for (int k = 0; k < 16; ++k) {
    const double angle = k * std::numbers::pi / 16.0;
    const Vec xi(std::cos(angle), std::sin(angle));
    report.directional[static_cast<std::size_t>(k)] = xi.dot(h0 * xi);
    if (!(report.directional[static_cast<std::size_t>(k)] <= report.u_tau_tau_origin + 1e-12))
      report.directional_chain_holds = false;
  }
  report.origin_chain_holds = report.u_tau_tau_origin <= report.bound_at_origin + 1e-12;

  report.critical_point = critical_point_check(hessians, tau, config, report.x0);
  if (!report.critical_point.skipped) report.identity_residuals["critical_point"] = report.critical_point.max();

  report.identity_residuals["equation"] = equation_identity_check(hessians, spec).sup;
  report.identity_residuals["differentiated_equation"] = differentiated_equation_check(hessians, *spec.exact).sup;
  const IdentityCheck second = det_second_variation_check(u, hessians, *spec.exact);
  report.identity_residuals["det_second_variation"] = second.sup;
  report.det_second_variation_floor = second.floor;
  const TauDirectionalCheck directional = tau_directional_check(hessians, tau, config, -1.0, config.R);
  if (!directional.skipped) {
    report.identity_residuals["tau_directional"] = directional.identity.sup;
    report.identity_residuals["tau_chain_rule"] = directional.chain_rule.sup;
  }
  report.constants = constants_digest(spec, hessians);
  return report;
}

std::vector<SweepRow> parameter_sweep(const std::vector<SweepInstance>& instances, const SolverConfig& solver,
                                      const AuxiliaryConfig& aux_template) {
  std::vector<SweepRow> rows;
  rows.reserve(instances.size());
  for (const SweepInstance& instance : instances) {
    SweepRow row;
    row.instance = instance;
    try {
      if (!(instance.scale > 0.0)) throw InputError("sweep scale must be positive");
      const double mu = 1.0 / std::sqrt(instance.scale);
      const ManufacturedSolution base = manufactured(instance.family);
      const ManufacturedSolution data = instance.scale == 1.0 ? base : base.homothety(mu);
      row.radius = mu * instance.radius;
      const ProblemSpec spec = make_problem(data, row.radius, instance.n_cells);
      const SolutionState state = newton_solve(spec, solver);
      row.iterations = state.iterations;
      if (!state.converged) throw Error("solver: " + to_string(state.status) + ": " + state.detail);

      AuxiliaryConfig aux = AuxiliaryConfig::standard(row.radius, spec.m, spec.M);
      aux.beta = aux_template.beta;
      aux.gap_floor = aux_template.gap_floor;
      row.r_squared = aux.r_squared;
      row.c0 = aux.c0;
      const EstimateReport report = bound_report(spec, state.u, aux);
      row.constants = report.constants;
      row.phi_max = report.phi_max;
      row.eta_lambda1_max = report.eta_lambda1_max;
      row.u_tau_tau_origin = report.u_tau_tau_origin;
      row.bound_at_origin = report.bound_at_origin;
      row.ok = true;
    } catch (const Error& e) {
      row.ok = false;
      row.failure = e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gclab
