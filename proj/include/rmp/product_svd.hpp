// Incrementally maintained SVD of a long matrix product in log scale.
//
// A product of n random matrices has singular values spread over e^{O(n)},
// far beyond what double-precision storage (or a plain SVD of the
// accumulated product) can resolve: everything below sigma_1 * 1e-16 is
// noise.  This class keeps the product factored as
//
//     P = U * diag(exp(logsig)) * V^T
//
// with U, V orthogonal held as ordinary doubles and the singular value
// magnitudes held as logarithms, so every exponent stays accurate for
// n in the thousands.  Updates use a one-sided Jacobi pass whose rotations
// are evaluated with scale differences factored out; Jacobi on column-scaled
// matrices preserves high relative accuracy of all singular values.
#pragma once

#include <Eigen/Dense>

#include "rmp/linalg.hpp"

namespace rmp::linalg {

class ProductSvd {
 public:
  explicit ProductSvd(int dim);

  // Replaces the tracked product P by B * P.  B must be well-conditioned
  // relative to double precision (callers batch raw factors and flush on a
  // condition budget; kappa(B) up to ~1e8 is fine).
  void update(const Mat& b);

  int dim() const { return static_cast<int>(u_.rows()); }
  const Mat& matrix_u() const { return u_; }
  const Mat& matrix_v() const { return v_; }
  // Nonincreasing log singular values of the tracked product.
  const Vec& log_sigma() const { return logsig_; }

  // log ||P x|| for a nonzero vector x.
  double log_apply_norm(const Vec& x) const;

  // log |f^T P x| and its sign; returns -inf when the sum cancels exactly.
  double log_form_value(const Vec& f, const Vec& x) const;

  // The product scaled by e^{-logsig_1}: U * diag(exp(logsig - logsig_1)) * V^T.
  Mat scaled_matrix() const;

  // Orthonormal frame of P * S for a subspace frame S (d x r), valid when the
  // top-r block dominates; relies on log-scaled column combination.
  Mat image_frame(const Mat& s) const;

  // log of the Hausdorff distance (sine of largest principal angle) between
  // P*span(S) and the top-r left singular subspace of P.  Exact in log scale
  // even when the distance is far below 1e-300.
  double log_dist_to_top(const Mat& s, int r) const;

 private:
  void jacobi_pass();

  Mat u_;       // columns: left singular directions
  Mat v_;       // columns: right singular directions
  Vec logsig_;  // log singular values, kept sorted nonincreasing
};

// Accumulates left factors raw and flushes them into the SVD once the
// running condition-number budget is spent.  Cuts the Jacobi work roughly by
// the batch length without losing relative accuracy.
class ProductChain {
 public:
  explicit ProductChain(int dim, double log_kappa_budget = 18.0)
      : svd_(dim), pending_(Mat::Identity(dim, dim)), budget_(log_kappa_budget) {}

  // a is the next left factor; log_kappa_a bounds log(sigma_1/sigma_d) of a.
  void push(const Mat& a, double log_kappa_a) {
    if (pending_log_kappa_ + log_kappa_a > budget_ && dirty_) {
      svd_.update(pending_);
      pending_ = a;
      pending_log_kappa_ = log_kappa_a;
    } else {
      pending_ = a * pending_;
      pending_log_kappa_ += log_kappa_a;
    }
    dirty_ = true;
  }

  const ProductSvd& finish() {
    if (dirty_) {
      svd_.update(pending_);
      pending_ = Mat::Identity(svd_.dim(), svd_.dim());
      pending_log_kappa_ = 0.0;
      dirty_ = false;
    }
    return svd_;
  }

 private:
  ProductSvd svd_;
  Mat pending_;
  double pending_log_kappa_ = 0.0;
  double budget_;
  bool dirty_ = false;
};

}  // namespace rmp::linalg
