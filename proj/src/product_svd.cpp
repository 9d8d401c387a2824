#include "rmp/product_svd.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rmp::linalg {

namespace {
constexpr double kOrthoTol = 1e-13;
constexpr int kMaxSweeps = 60;

double log1p_exp(double t) {  // log(1 + e^t) without overflow
  if (t > 36.0) return t;
  return std::log1p(std::exp(t));
}
}  // namespace

ProductSvd::ProductSvd(int dim)
    : u_(Mat::Identity(dim, dim)), v_(Mat::Identity(dim, dim)), logsig_(Vec::Zero(dim)) {}

void ProductSvd::update(const Mat& b) {
  if (b.rows() != u_.rows() || b.cols() != u_.rows())
    throw std::invalid_argument("ProductSvd::update: dimension mismatch");
  Mat w = b * u_;
  for (int j = 0; j < w.cols(); ++j) {
    const double n = w.col(j).norm();
    if (!(n > 0.0) || !std::isfinite(n))
      throw std::runtime_error("ProductSvd::update: singular or non-finite factor");
    u_.col(j) = w.col(j) / n;
    logsig_(j) += std::log(n);
  }
  jacobi_pass();
}

void ProductSvd::jacobi_pass() {
  const int d = dim();
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < d - 1; ++p) {
      for (int q = p + 1; q < d; ++q) {
        // keep the larger column at index p
        if (logsig_(q) > logsig_(p)) {
          u_.col(p).swap(u_.col(q));
          v_.col(p).swap(v_.col(q));
          std::swap(logsig_(p), logsig_(q));
        }
        const double zeta = u_.col(p).dot(u_.col(q));
        if (std::abs(zeta) <= kOrthoTol) continue;
        off = std::max(off, std::abs(zeta));

        const double bigd = logsig_(p) - logsig_(q);  // >= 0
        // Jacobi rotation for the 2x2 Gram block of the scaled columns
        // [[e^{2Lp}, z e^{Lp+Lq}], [., e^{2Lq}]], evaluated with the scale
        // difference factored out so nothing overflows.
        const double em2d = (bigd > 350.0) ? 0.0 : std::exp(-2.0 * bigd);
        // With tau = -sinh(D)/zeta the stable small root of t^2 + 2 tau t = 1,
        // rescaled by e^D so huge scale gaps never overflow:
        //   t * e^D = sign(tau) / (|tau| e^{-D} + sqrt(e^{-2D} + (tau e^{-D})^2))
        // where tau * e^{-D} = -(1 - e^{-2D}) / (2 zeta).
        const double w_ = (1.0 - em2d) / (2.0 * zeta);
        const double mag = 1.0 / (std::abs(w_) + std::sqrt(em2d + w_ * w_));
        const double t_scaled = (zeta > 0 ? -mag : mag);  // t * e^{bigd}
        const double t_plain = t_scaled * ((bigd > 700.0) ? 0.0 : std::exp(-bigd));
        const double c = 1.0 / std::sqrt(1.0 + t_plain * t_plain);
        const double s_plain = c * t_plain;

        const Vec up = u_.col(p);
        const Vec uq = u_.col(q);
        // scaled units: column p in units of e^{Lp}, column q in units of e^{Lq}
        Vec np_vec = c * up - (c * t_scaled * em2d) * uq;
        Vec nq_vec = (c * t_scaled) * up + c * uq;
        const double np = np_vec.norm();
        const double nq = nq_vec.norm();
        if (!(np > 0.0) || !(nq > 0.0))
          throw std::runtime_error("ProductSvd: degenerate rotation");
        u_.col(p) = np_vec / np;
        u_.col(q) = nq_vec / nq;
        logsig_(p) += std::log(np);
        logsig_(q) += std::log(nq);

        const Vec vp = v_.col(p);
        const Vec vq = v_.col(q);
        v_.col(p) = c * vp - s_plain * vq;
        v_.col(q) = s_plain * vp + c * vq;

        if (logsig_(q) > logsig_(p)) {
          u_.col(p).swap(u_.col(q));
          v_.col(p).swap(v_.col(q));
          std::swap(logsig_(p), logsig_(q));
        }
      }
    }
    if (off <= kOrthoTol) break;
  }
  // final ordering pass
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return logsig_(a) > logsig_(b); });
  Mat u2(d, d), v2(d, d);
  Vec l2(d);
  for (int j = 0; j < d; ++j) {
    u2.col(j) = u_.col(idx[j]);
    v2.col(j) = v_.col(idx[j]);
    l2(j) = logsig_(idx[j]);
  }
  u_ = std::move(u2);
  v_ = std::move(v2);
  logsig_ = std::move(l2);
}

double ProductSvd::log_apply_norm(const Vec& x) const {
  const Vec s = v_.transpose() * x;
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < s.size(); ++k) {
    if (s(k) == 0.0) continue;
    best = std::max(best, logsig_(k) + std::log(std::abs(s(k))));
  }
  if (!std::isfinite(best)) return best;
  double acc = 0.0;
  for (int k = 0; k < s.size(); ++k) {
    if (s(k) == 0.0) continue;
    const double t = 2.0 * (logsig_(k) + std::log(std::abs(s(k))) - best);
    acc += std::exp(t);
  }
  return best + 0.5 * std::log(acc);
}

double ProductSvd::log_form_value(const Vec& f, const Vec& x) const {
  const Vec a = u_.transpose() * f;
  const Vec b = v_.transpose() * x;
  double m = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < a.size(); ++k) {
    const double prod = a(k) * b(k);
    if (prod == 0.0) continue;
    m = std::max(m, logsig_(k) + std::log(std::abs(prod)));
  }
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (int k = 0; k < a.size(); ++k) {
    const double prod = a(k) * b(k);
    if (prod == 0.0) continue;
    acc += (prod > 0 ? 1.0 : -1.0) * std::exp(logsig_(k) + std::log(std::abs(prod)) - m);
  }
  if (acc == 0.0) return -std::numeric_limits<double>::infinity();
  return m + std::log(std::abs(acc));
}

Mat ProductSvd::scaled_matrix() const {
  Vec w(logsig_.size());
  for (int k = 0; k < logsig_.size(); ++k) w(k) = std::exp(logsig_(k) - logsig_(0));
  return u_ * w.asDiagonal() * v_.transpose();
}

Mat ProductSvd::image_frame(const Mat& s) const {
  const int r = static_cast<int>(s.cols());
  Mat z = v_.transpose() * s;
  for (int i = 0; i < z.rows(); ++i) {
    const double w = logsig_(i) - logsig_(0);
    z.row(i) *= (w < -745.0) ? 0.0 : std::exp(w);
  }
  Mat y = u_ * z;
  Eigen::HouseholderQR<Mat> qr(y);
  const Mat rr = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  const double lead = rr.diagonal().cwiseAbs().maxCoeff();
  if (lead == 0.0 || rr.diagonal().cwiseAbs().minCoeff() < 1e-13 * lead)
    throw std::runtime_error("ProductSvd::image_frame: image numerically degenerate");
  return qr.householderQ() * Mat::Identity(y.rows(), r);
}

double ProductSvd::log_dist_to_top(const Mat& s, int r) const {
  const int d = dim();
  if (s.cols() != r) throw std::invalid_argument("log_dist_to_top: frame width != r");
  const Mat y = v_.transpose() * s;
  const Mat a = y.topRows(r);
  const Mat bot = y.bottomRows(d - r);
  Eigen::JacobiSVD<Mat> asvd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (asvd.singularValues()(r - 1) < 1e-13 * std::max(1.0, asvd.singularValues()(0)))
    return 0.0;  // subspace grazes the contracted directions; distance is O(1)
  const Mat z = bot * asvd.solve(Mat::Identity(r, r));
  // entries of D_bot * z * D_top^{-1} in log scale
  Mat lg(d - r, r);
  double kmax = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < d - r; ++i)
    for (int j = 0; j < r; ++j) {
      if (z(i, j) == 0.0) {
        lg(i, j) = -std::numeric_limits<double>::infinity();
        continue;
      }
      lg(i, j) = std::log(std::abs(z(i, j))) + logsig_(r + i) - logsig_(j);
      kmax = std::max(kmax, lg(i, j));
    }
  if (!std::isfinite(kmax)) return -std::numeric_limits<double>::infinity();
  Mat scaled(d - r, r);
  for (int i = 0; i < d - r; ++i)
    for (int j = 0; j < r; ++j) {
      if (!std::isfinite(lg(i, j)) || lg(i, j) - kmax < -745.0) {
        scaled(i, j) = 0.0;
      } else {
        scaled(i, j) = (z(i, j) > 0 ? 1.0 : -1.0) * std::exp(lg(i, j) - kmax);
      }
    }
  Eigen::JacobiSVD<Mat> zsvd(scaled);
  const double lt = kmax + std::log(zsvd.singularValues()(0));  // log tan(theta_max)
  // log sin = log tan - 0.5*log(1 + tan^2)
  if (lt > 0)
    return -0.5 * log1p_exp(-2.0 * lt);
  return lt - 0.5 * log1p_exp(2.0 * lt);
}

}  // namespace rmp::linalg
