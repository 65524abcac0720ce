#pragma once

// Eigen-structure of small symmetric matrices and the first and second
// derivatives of an eigenvalue and its unit eigenvector with respect to the
// matrix entries.
//
// Index conventions: all indices are 0-based. Eigenvalues are sorted in
// descending order, so `k = 0` is the largest eigenvalue. Derivative tensors
// treat W(p,q) and W(q,p) as independent parameters; use
// `symmetric_pair_view` to obtain derivatives along symmetric perturbations
// E_pq + E_qp, which is what a finite-difference oracle can observe.

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace gclab {

/// Dense symmetric n x n matrix (n >= 2) with finite entries.
class SymMatrix {
 public:
  /// Throws InputError if `entries` is not square, has n < 2, contains a
  /// non-finite value, or is not symmetric to 1e-12 (1 + |W|). The stored
  /// matrix is the exact average of `entries` and its transpose.
  explicit SymMatrix(const Eigen::MatrixXd& entries);

  static SymMatrix diagonal(std::initializer_list<double> values);
  static SymMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  int dim() const noexcept { return static_cast<int>(entries_.rows()); }
  double operator()(int p, int q) const { return entries_(p, q); }
  const Eigen::MatrixXd& matrix() const noexcept { return entries_; }

  /// Frobenius norm.
  double norm() const { return entries_.norm(); }
  double max_off_diagonal() const;
  SymMatrix scaled(double c) const;

 private:
  Eigen::MatrixXd entries_;
};

/// Eigenvalues (descending) and oriented unit eigenvectors (columns).
///
/// Orientation: the largest-magnitude component of each eigenvector is
/// positive; components within a relative 1e-12 of the maximum count as tied
/// and the lowest index wins.
struct EigenSystem {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  double gap = 0.0;  ///< min over i != j of |lambda_i - lambda_j|

  int dim() const noexcept { return static_cast<int>(values.size()); }
  Eigen::VectorXd vector(int k) const { return vectors.col(k); }
};

/// Flips `v` in place so that it follows the EigenSystem orientation rule.
void orient_eigenvector(Eigen::Ref<Eigen::VectorXd> v);

EigenSystem eigen_system(const SymMatrix& w);

/// Closed-form 2 x 2 eigen-decomposition. Throws DegenerateGapError when the
/// two eigenvalues coincide.
EigenSystem closed_form_2x2(const SymMatrix& w);

enum class DerivativeConvention {
  /// W(p,q) and W(q,p) are independent parameters.
  independent_entries,
  /// Entry (p,q) holds the derivative along E_pq + E_qp (E_pp on the
  /// diagonal); the tensor is symmetric in (p,q) and in (r,s).
  symmetric_pair,
};

/// First and second derivatives of lambda_k and tau^k at one matrix.
class EigenDerivatives {
 public:
  EigenDerivatives() = default;
  EigenDerivatives(int n, int k, DerivativeConvention convention);

  int dim() const noexcept { return n_; }
  int index() const noexcept { return k_; }
  DerivativeConvention convention() const noexcept { return convention_; }

  double d_lambda(int p, int q) const { return d_lambda_[idx2(p, q)]; }
  double d_tau(int i, int p, int q) const { return d_tau_[idx3(i, p, q)]; }
  double d2_lambda(int p, int q, int r, int s) const { return d2_lambda_[idx4(p, q, r, s)]; }
  double d2_tau(int i, int p, int q, int r, int s) const { return d2_tau_[idx5(i, p, q, r, s)]; }

  double& d_lambda(int p, int q) { return d_lambda_[idx2(p, q)]; }
  double& d_tau(int i, int p, int q) { return d_tau_[idx3(i, p, q)]; }
  double& d2_lambda(int p, int q, int r, int s) { return d2_lambda_[idx4(p, q, r, s)]; }
  double& d2_tau(int i, int p, int q, int r, int s) { return d2_tau_[idx5(i, p, q, r, s)]; }

  /// d lambda_k / d W as an n x n matrix.
  Eigen::MatrixXd d_lambda_matrix() const;

  /// The orthogonal matrix diagonalizing W at which the formulas were applied
  /// (identity when W was already diagonal).
  Eigen::MatrixXd frame;
  /// Eigenvalues in the frame's column order.
  Eigen::VectorXd frame_eigenvalues;

 private:
  std::size_t idx2(int p, int q) const { return static_cast<std::size_t>(p * n_ + q); }
  std::size_t idx3(int i, int p, int q) const { return static_cast<std::size_t>(i) * n_ * n_ + idx2(p, q); }
  std::size_t idx4(int p, int q, int r, int s) const {
    return idx2(p, q) * static_cast<std::size_t>(n_ * n_) + idx2(r, s);
  }
  std::size_t idx5(int i, int p, int q, int r, int s) const {
    return static_cast<std::size_t>(i) * n_ * n_ * n_ * n_ + idx4(p, q, r, s);
  }

  int n_ = 0;
  int k_ = 0;
  DerivativeConvention convention_ = DerivativeConvention::independent_entries;
  std::vector<double> d_lambda_;
  std::vector<double> d_tau_;
  std::vector<double> d2_lambda_;
  std::vector<double> d2_tau_;
};

/// Default minimum eigenvalue separation: 1e-8 (1 + |W|).
double default_gap_tolerance(const SymMatrix& w);

/// Derivatives of lambda_k and tau^k (k into the descending order) in the
/// independent-entries convention.
///
/// If every off-diagonal entry is below 1e-14 in magnitude the tabulated
/// diagonal-matrix values are returned directly in the coordinate frame.
/// Otherwise the same tables are evaluated in the eigenframe of W and pulled
/// back through the orthogonal change of basis. Throws DegenerateGapError if
/// lambda_k is within `gap_tolerance` of another eigenvalue (a negative
/// tolerance selects `default_gap_tolerance`).
EigenDerivatives eigen_derivatives(const SymMatrix& w, int k, double gap_tolerance = -1.0);

/// Sums the independent-entry derivatives into derivatives along symmetric
/// perturbation directions.
EigenDerivatives symmetric_pair_view(const EigenDerivatives& d);

/// Central finite differences of `eigen_system` under symmetric
/// perturbations, in the symmetric-pair convention. Perturbed eigenvectors are
/// sign-aligned with the unperturbed tau^k before differencing.
///
/// Requires h in [1e-7, 1e-3] and a gap of at least 10 h around lambda_k.
EigenDerivatives perturbation_oracle(const SymMatrix& w, int k, double h);

/// Largest absolute discrepancies between two derivative sets of the same
/// shape and convention.
struct DerivativeDiscrepancy {
  double first = 0.0;
  double second = 0.0;
};
DerivativeDiscrepancy compare(const EigenDerivatives& a, const EigenDerivatives& b);

}  // namespace gclab
