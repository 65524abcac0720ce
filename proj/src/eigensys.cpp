#include "gclab/eigensys.hpp"

#include "gclab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

namespace gclab {

namespace {

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kOrientationTie = 1e-12;
constexpr double kDiagonalThreshold = 1e-14;

double min_gap(const Eigen::VectorXd& values) {
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    for (Eigen::Index j = i + 1; j < values.size(); ++j) {
      gap = std::min(gap, std::abs(values(i) - values(j)));
    }
  }
  return gap;
}

// Throws if lambda_k is within `tolerance` of another eigenvalue.
void require_simple(const Eigen::VectorXd& values, int k, double tolerance) {
  for (int j = 0; j < values.size(); ++j) {
    if (j == k) continue;
    const double gap = std::abs(values(k) - values(j));
    if (gap <= tolerance) {
      std::ostringstream msg;
      msg << "eigenvalues " << k << " and " << j << " are separated by " << gap
          << " (tolerance " << tolerance << ")";
      throw DegenerateGapError(msg.str(), k, j, gap);
    }
  }
}

// The tabulated derivatives at W = diag(lambda), eigenvector tau^k = e_k.
// `lambda` is indexed by coordinate; `label` is the descending-order index
// recorded in the result.
EigenDerivatives diagonal_tables(const Eigen::VectorXd& lambda, int k, int label) {
  const int n = static_cast<int>(lambda.size());
  EigenDerivatives d(n, label, DerivativeConvention::independent_entries);
  const double lk = lambda(k);

  d.d_lambda(k, k) = 1.0;

  for (int i = 0; i < n; ++i) {
    if (i == k) continue;
    const double gi = lk - lambda(i);

    d.d_tau(i, i, k) = 1.0 / gi;

    d.d2_lambda(k, i, i, k) = 1.0 / gi;
    d.d2_lambda(i, k, k, i) = 1.0 / gi;

    // Unit normalization: d^2 tau_k / dW_ik^2.
    d.d2_tau(k, i, k, i, k) = -1.0 / (gi * gi);

    d.d2_tau(i, i, k, i, i) = 1.0 / (gi * gi);
    d.d2_tau(i, i, i, i, k) = 1.0 / (gi * gi);
    d.d2_tau(i, i, k, k, k) = -1.0 / (gi * gi);
    d.d2_tau(i, k, k, i, k) = -1.0 / (gi * gi);

    for (int q = 0; q < n; ++q) {
      if (q == k || q == i) continue;
      const double value = 1.0 / (gi * (lk - lambda(q)));
      d.d2_tau(i, i, q, q, k) = value;
      d.d2_tau(i, q, k, i, q) = value;
    }
  }
  return d;
}

// Pulls frame-coordinate tables back to the original coordinates through
// W = Q D Q^T.
EigenDerivatives pull_back(const EigenDerivatives& t, const Eigen::MatrixXd& q) {
  const int n = t.dim();
  EigenDerivatives out(n, t.index(), DerivativeConvention::independent_entries);

  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const double v = t.d_lambda(a, b);
      if (v == 0.0) continue;
      for (int p = 0; p < n; ++p)
        for (int r = 0; r < n; ++r) out.d_lambda(p, r) += v * q(p, a) * q(r, b);
    }
  }

  for (int m = 0; m < n; ++m) {
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        const double v = t.d_tau(m, a, b);
        if (v == 0.0) continue;
        for (int i = 0; i < n; ++i)
          for (int p = 0; p < n; ++p)
            for (int r = 0; r < n; ++r) out.d_tau(i, p, r) += v * q(i, m) * q(p, a) * q(r, b);
      }
    }
  }

  auto pull4 = [&](double v, int a, int b, int c, int e, auto&& sink) {
    for (int p = 0; p < n; ++p) {
      const double wp = v * q(p, a);
      for (int r = 0; r < n; ++r) {
        const double wr = wp * q(r, b);
        for (int s = 0; s < n; ++s) {
          const double ws = wr * q(s, c);
          for (int u = 0; u < n; ++u) sink(p, r, s, u, ws * q(u, e));
        }
      }
    }
  };

  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int e = 0; e < n; ++e) {
          const double v = t.d2_lambda(a, b, c, e);
          if (v == 0.0) continue;
          pull4(v, a, b, c, e, [&](int p, int r, int s, int u, double w) { out.d2_lambda(p, r, s, u) += w; });
        }

  for (int m = 0; m < n; ++m)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          for (int e = 0; e < n; ++e) {
            const double v = t.d2_tau(m, a, b, c, e);
            if (v == 0.0) continue;
            for (int i = 0; i < n; ++i) {
              const double vi = v * q(i, m);
              if (vi == 0.0) continue;
              pull4(vi, a, b, c, e,
                    [&](int p, int r, int s, int u, double w) { out.d2_tau(i, p, r, s, u) += w; });
            }
          }
  return out;
}

// Members of the symmetric direction for the pair (p, q).
std::vector<std::pair<int, int>> pair_members(int p, int q) {
  if (p == q) return {{p, p}};
  return {{p, q}, {q, p}};
}

}  // namespace

// ---------------------------------------------------------------------------
// SymMatrix

SymMatrix::SymMatrix(const Eigen::MatrixXd& entries) {
  if (entries.rows() != entries.cols()) throw InputError("SymMatrix: matrix is not square");
  if (entries.rows() < 2) throw InputError("SymMatrix: dimension must be at least 2");
  if (!entries.allFinite()) throw InputError("SymMatrix: non-finite entry");
  const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance * (1.0 + entries.norm())) {
    std::ostringstream msg;
    msg << "SymMatrix: matrix is not symmetric (max |W_pq - W_qp| = " << asym << ")";
    throw InputError(msg.str());
  }
  entries_ = 0.5 * (entries + entries.transpose());
}

SymMatrix SymMatrix::diagonal(std::initializer_list<double> values) {
  const auto n = static_cast<Eigen::Index>(values.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  Eigen::Index i = 0;
  for (double v : values) m(i, i) = v, ++i;
  return SymMatrix(m);
}

SymMatrix SymMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(n, n);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Eigen::Index>(row.size()) != n) throw InputError("SymMatrix: ragged rows");
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return SymMatrix(m);
}

double SymMatrix::max_off_diagonal() const {
  double worst = 0.0;
  for (int p = 0; p < dim(); ++p)
    for (int q = 0; q < dim(); ++q)
      if (p != q) worst = std::max(worst, std::abs(entries_(p, q)));
  return worst;
}

SymMatrix SymMatrix::scaled(double c) const { return SymMatrix(c * entries_); }

// ---------------------------------------------------------------------------
// Eigen-decomposition

void orient_eigenvector(Eigen::Ref<Eigen::VectorXd> v) {
  const double largest = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= largest * (1.0 - kOrientationTie)) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

EigenSystem eigen_system(const SymMatrix& w) {
  const int n = w.dim();
  EigenSystem es;
  es.values.resize(n);
  es.vectors = Eigen::MatrixXd::Zero(n, n);

  if (w.max_off_diagonal() == 0.0) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return w(a, a) > w(b, b); });
    for (int k = 0; k < n; ++k) {
      es.values(k) = w(order[k], order[k]);
      es.vectors(order[k], k) = 1.0;
    }
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(w.matrix());
    if (solver.info() != Eigen::Success) throw InputError("eigen_system: decomposition failed");
    for (int k = 0; k < n; ++k) {
      es.values(k) = solver.eigenvalues()(n - 1 - k);
      es.vectors.col(k) = solver.eigenvectors().col(n - 1 - k);
      orient_eigenvector(es.vectors.col(k));
    }
  }
  es.gap = min_gap(es.values);
  return es;
}

EigenSystem closed_form_2x2(const SymMatrix& w) {
  if (w.dim() != 2) throw InputError("closed_form_2x2: matrix must be 2 x 2");
  const double a = w(0, 0);
  const double b = w(0, 1);
  const double d = w(1, 1);

  // sqrt((a - d)^2 + 4 b^2) without overflow or needless cancellation.
  const double root = std::hypot(a - d, 2.0 * b);
  if (root == 0.0) throw DegenerateGapError("closed_form_2x2: repeated eigenvalue", 0, 1, 0.0);

  EigenSystem es;
  es.values.resize(2);
  es.values(0) = ((a + d) + root) / 2.0;
  es.values(1) = ((a + d) - root) / 2.0;
  es.gap = root;

  // Two null vectors of (W - lambda_1 I): from its second row (the classical
  // choice, (lambda_1 - d, b)) and from its first row, (b, lambda_1 - a).
  // Each is written without subtracting lambda_1; keep the longer one.
  Eigen::Vector2d from_second_row(((a - d) + root) / 2.0, b);
  Eigen::Vector2d from_first_row(b, ((d - a) + root) / 2.0);
  Eigen::Vector2d tau = from_second_row.norm() >= from_first_row.norm() ? from_second_row : from_first_row;
  tau.normalize();
  Eigen::VectorXd top = tau;
  orient_eigenvector(top);

  Eigen::VectorXd bottom(2);
  bottom << -top(1), top(0);
  orient_eigenvector(bottom);

  es.vectors.resize(2, 2);
  es.vectors.col(0) = top;
  es.vectors.col(1) = bottom;
  return es;
}

// ---------------------------------------------------------------------------
// Derivatives

EigenDerivatives::EigenDerivatives(int n, int k, DerivativeConvention convention)
    : n_(n), k_(k), convention_(convention) {
  const auto n2 = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  d_lambda_.assign(n2, 0.0);
  d_tau_.assign(n2 * n, 0.0);
  d2_lambda_.assign(n2 * n2, 0.0);
  d2_tau_.assign(n2 * n2 * n, 0.0);
  frame = Eigen::MatrixXd::Identity(n, n);
  frame_eigenvalues = Eigen::VectorXd::Zero(n);
}

Eigen::MatrixXd EigenDerivatives::d_lambda_matrix() const {
  Eigen::MatrixXd m(n_, n_);
  for (int p = 0; p < n_; ++p)
    for (int q = 0; q < n_; ++q) m(p, q) = d_lambda(p, q);
  return m;
}

double default_gap_tolerance(const SymMatrix& w) { return 1e-8 * (1.0 + w.norm()); }

EigenDerivatives eigen_derivatives(const SymMatrix& w, int k, double gap_tolerance) {
  const int n = w.dim();
  if (k < 0 || k >= n) throw InputError("eigen_derivatives: eigenvalue index out of range");
  if (gap_tolerance < 0.0) gap_tolerance = default_gap_tolerance(w);

  if (w.max_off_diagonal() < kDiagonalThreshold) {
    Eigen::VectorXd lambda = w.matrix().diagonal();
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return lambda(a) > lambda(b); });
    const int coord = order[static_cast<std::size_t>(k)];
    require_simple(lambda, coord, gap_tolerance);

    EigenDerivatives out = diagonal_tables(lambda, coord, k);
    out.frame_eigenvalues = lambda;
    return out;
  }

  const EigenSystem es = eigen_system(w);
  require_simple(es.values, k, gap_tolerance);
  EigenDerivatives out = pull_back(diagonal_tables(es.values, k, k), es.vectors);
  out.frame = es.vectors;
  out.frame_eigenvalues = es.values;
  return out;
}

EigenDerivatives symmetric_pair_view(const EigenDerivatives& d) {
  if (d.convention() == DerivativeConvention::symmetric_pair) return d;
  const int n = d.dim();
  EigenDerivatives out(n, d.index(), DerivativeConvention::symmetric_pair);
  out.frame = d.frame;
  out.frame_eigenvalues = d.frame_eigenvalues;

  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      const auto pq = pair_members(p, q);
      for (auto [a, b] : pq) {
        out.d_lambda(p, q) += d.d_lambda(a, b);
        for (int i = 0; i < n; ++i) out.d_tau(i, p, q) += d.d_tau(i, a, b);
      }
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          const auto rs = pair_members(r, s);
          for (auto [a, b] : pq)
            for (auto [c, e] : rs) {
              out.d2_lambda(p, q, r, s) += d.d2_lambda(a, b, c, e);
              for (int i = 0; i < n; ++i) out.d2_tau(i, p, q, r, s) += d.d2_tau(i, a, b, c, e);
            }
        }
    }
  return out;
}

EigenDerivatives perturbation_oracle(const SymMatrix& w, int k, double h) {
  const int n = w.dim();
  if (k < 0 || k >= n) throw InputError("perturbation_oracle: eigenvalue index out of range");
  if (!(h >= 1e-7 && h <= 1e-3)) throw InputError("perturbation_oracle: step must lie in [1e-7, 1e-3]");

  const EigenSystem base = eigen_system(w);
  require_simple(base.values, k, 10.0 * h);
  const Eigen::VectorXd tau0 = base.vector(k);

  struct Sample {
    double lambda;
    Eigen::VectorXd tau;
  };
  auto sample = [&](const Eigen::MatrixXd& m) {
    const EigenSystem es = eigen_system(SymMatrix(m));
    Eigen::VectorXd tau = es.vector(k);
    if (tau.dot(tau0) < 0.0) tau = -tau;
    return Sample{es.values(k), std::move(tau)};
  };

  std::vector<std::pair<int, int>> dirs;
  for (int p = 0; p < n; ++p)
    for (int q = p; q < n; ++q) dirs.emplace_back(p, q);
  auto direction = [&](std::pair<int, int> pq) {
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
    e(pq.first, pq.second) = 1.0;
    e(pq.second, pq.first) = 1.0;
    return e;
  };

  EigenDerivatives out(n, k, DerivativeConvention::symmetric_pair);
  out.frame = base.vectors;
  out.frame_eigenvalues = base.values;

  const Eigen::MatrixXd& w0 = w.matrix();
  for (auto pq : dirs) {
    const Eigen::MatrixXd e = direction(pq);
    const Sample plus = sample(w0 + h * e);
    const Sample minus = sample(w0 - h * e);
    const double dl = (plus.lambda - minus.lambda) / (2.0 * h);
    const Eigen::VectorXd dt = (plus.tau - minus.tau) / (2.0 * h);
    for (auto [p, q] : pair_members(pq.first, pq.second)) {
      out.d_lambda(p, q) = dl;
      for (int i = 0; i < n; ++i) out.d_tau(i, p, q) = dt(i);
    }
  }

  for (std::size_t a = 0; a < dirs.size(); ++a) {
    const Eigen::MatrixXd ea = direction(dirs[a]);
    for (std::size_t b = a; b < dirs.size(); ++b) {
      const Eigen::MatrixXd eb = direction(dirs[b]);
      const Sample pp = sample(w0 + h * ea + h * eb);
      const Sample pm = sample(w0 + h * ea - h * eb);
      const Sample mp = sample(w0 - h * ea + h * eb);
      const Sample mm = sample(w0 - h * ea - h * eb);
      const double scale = 1.0 / (4.0 * h * h);
      const double d2l = (pp.lambda - pm.lambda - mp.lambda + mm.lambda) * scale;
      const Eigen::VectorXd d2t = (pp.tau - pm.tau - mp.tau + mm.tau) * scale;
      for (auto [p, q] : pair_members(dirs[a].first, dirs[a].second))
        for (auto [r, s] : pair_members(dirs[b].first, dirs[b].second)) {
          out.d2_lambda(p, q, r, s) = d2l;
          out.d2_lambda(r, s, p, q) = d2l;
          for (int i = 0; i < n; ++i) {
            out.d2_tau(i, p, q, r, s) = d2t(i);
            out.d2_tau(i, r, s, p, q) = d2t(i);
          }
        }
    }
  }
  return out;
}

DerivativeDiscrepancy compare(const EigenDerivatives& a, const EigenDerivatives& b) {
  if (a.dim() != b.dim() || a.convention() != b.convention())
    throw InputError("compare: derivative sets differ in shape or convention");
  const int n = a.dim();
  DerivativeDiscrepancy out;
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      out.first = std::max(out.first, std::abs(a.d_lambda(p, q) - b.d_lambda(p, q)));
      for (int i = 0; i < n; ++i) out.first = std::max(out.first, std::abs(a.d_tau(i, p, q) - b.d_tau(i, p, q)));
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          out.second = std::max(out.second, std::abs(a.d2_lambda(p, q, r, s) - b.d2_lambda(p, q, r, s)));
          for (int i = 0; i < n; ++i)
            out.second = std::max(out.second, std::abs(a.d2_tau(i, p, q, r, s) - b.d2_tau(i, p, q, r, s)));
        }
    }
  return out;
}

}  // namespace gclab
