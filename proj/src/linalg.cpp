#include "rmp/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace rmp::linalg {

namespace {

void ensure_finite(const Mat& g, const char* who) {
  if (!g.allFinite()) throw std::invalid_argument(std::string(who) + ": non-finite entries");
}

}  // namespace

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t c = 1;
  for (int i = 1; i <= k; ++i) c = c * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return c;
}

std::vector<std::vector<int>> k_subsets(int d, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > d) return out;
  std::vector<int> cur(k);
  for (int i = 0; i < k; ++i) cur[i] = i;
  while (true) {
    out.push_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[i] == d - k + i) --i;
    if (i < 0) break;
    ++cur[i];
    for (int j = i + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

Subspace::Subspace(Mat frame) : frame_(std::move(frame)) {
  const int d = static_cast<int>(frame_.rows());
  const int k = static_cast<int>(frame_.cols());
  if (k < 1 || k > d) throw std::invalid_argument("Subspace: need 1 <= dim <= ambient dim");
  ensure_finite(frame_, "Subspace");
  const Mat gram = frame_.transpose() * frame_;
  if ((gram - Mat::Identity(k, k)).cwiseAbs().maxCoeff() > kFrameTol)
    throw std::invalid_argument("Subspace: frame not orthonormal");
}

Subspace Subspace::span_of(const Mat& vectors) {
  const int k = static_cast<int>(vectors.cols());
  Eigen::HouseholderQR<Mat> qr(vectors);
  Mat q = qr.householderQ() * Mat::Identity(vectors.rows(), k);
  // Column rank check through the R diagonal.
  const Mat r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const double lead = r.diagonal().cwiseAbs().maxCoeff();
  if (lead == 0.0 || r.diagonal().cwiseAbs().minCoeff() < 1e-12 * lead)
    throw std::invalid_argument("Subspace::span_of: rank-deficient frame");
  return Subspace(std::move(q));
}

Subspace span_of_union(const std::vector<Subspace>& parts, double tol) {
  if (parts.empty()) throw std::invalid_argument("span_of_union: empty list");
  const int d = parts.front().ambient_dim();
  int total = 0;
  for (const auto& p : parts) {
    if (p.ambient_dim() != d) throw std::invalid_argument("span_of_union: ambient dim mismatch");
    total += p.dim();
  }
  Mat m(d, total);
  int c = 0;
  for (const auto& p : parts) {
    m.middleCols(c, p.dim()) = p.frame();
    c += p.dim();
  }
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
  const double lead = svd.singularValues()(0);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol * lead) ++rank;
  rank = std::min(rank, d);
  return Subspace(svd.matrixU().leftCols(rank));
}

Mat random_gaussian_matrix(int rows, int cols, Rng& rng) {
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.gaussian();
  return m;
}

Subspace random_subspace(int d, int k, Rng& rng) {
  while (true) {
    Mat m = random_gaussian_matrix(d, k, rng);
    Eigen::HouseholderQR<Mat> qr(m);
    const Mat r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    const double lead = r.diagonal().cwiseAbs().maxCoeff();
    if (lead == 0.0 || r.diagonal().cwiseAbs().minCoeff() < 1e-10 * lead) continue;
    return Subspace(qr.householderQ() * Mat::Identity(d, k));
  }
}

CartanFrame cartan(const Mat& g, int r) {
  ensure_finite(g, "cartan");
  const int d = static_cast<int>(g.rows());
  if (g.cols() != d) throw std::invalid_argument("cartan: matrix not square");
  if (r < 1 || r >= d) throw std::invalid_argument("cartan: need 1 <= r < d");
  Eigen::JacobiSVD<Mat> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  if (s(0) <= 0.0 || s(d - 1) < 1e-14 * s(0))
    throw std::invalid_argument("cartan: non-invertible");
  CartanFrame f;
  f.sigma = s;
  f.left = svd.matrixU();
  f.right = svd.matrixV().transpose();
  f.r = r;
  f.degenerate = (s(r - 1) - s(r)) <= 1e-12 * s(0);
  return f;
}

Subspace v_plus(const CartanFrame& f) { return Subspace(f.left.leftCols(f.r)); }

Subspace v_minus(const CartanFrame& f) {
  const int d = static_cast<int>(f.sigma.size());
  // right = l, so l^{-1} = right^T; its trailing columns span the preimage
  // of span(e_{r+1},...,e_d).
  return Subspace(f.right.transpose().rightCols(d - f.r));
}

double gap(const Subspace& V, const Subspace& W) {
  const int d = V.ambient_dim();
  if (W.ambient_dim() != d) throw std::invalid_argument("gap: ambient dim mismatch");
  if (V.dim() + W.dim() > d) throw std::invalid_argument("gap: overfull");
  // Singular values of (I - P_W) Q_V are the sines of the principal angles
  // (padded with ones); their product is the wedge norm.
  const Mat b = V.frame() - W.frame() * (W.frame().transpose() * V.frame());
  Eigen::JacobiSVD<Mat> svd(b);
  double p = 1.0;
  for (int i = 0; i < svd.singularValues().size(); ++i) p *= svd.singularValues()(i);
  return std::min(1.0, p);
}

double gap_multi(const std::vector<Subspace>& subspaces) {
  if (subspaces.empty()) throw std::invalid_argument("gap_multi: empty list");
  const int d = subspaces.front().ambient_dim();
  int total = 0;
  for (const auto& s : subspaces) {
    if (s.ambient_dim() != d) throw std::invalid_argument("gap_multi: ambient dim mismatch");
    total += s.dim();
  }
  if (total > d) throw std::invalid_argument("gap_multi: overfull");
  Mat m(d, total);
  int c = 0;
  for (const auto& s : subspaces) {
    m.middleCols(c, s.dim()) = s.frame();
    c += s.dim();
  }
  Eigen::JacobiSVD<Mat> svd(m);
  double p = 1.0;
  for (int i = 0; i < svd.singularValues().size(); ++i) p *= svd.singularValues()(i);
  return std::min(1.0, p);
}

double gap_multi_telescoping(const std::vector<Subspace>& subspaces) {
  if (subspaces.empty()) throw std::invalid_argument("gap_multi_telescoping: empty list");
  double prod = 1.0;
  std::vector<Subspace> acc{subspaces.front()};
  for (std::size_t j = 1; j < subspaces.size(); ++j) {
    Subspace partial = span_of_union(acc, 1e-12);
    if (partial.dim() < static_cast<int>([&] {
          int t = 0;
          for (const auto& s : acc) t += s.dim();
          return t;
        }()))
      return 0.0;  // earlier sum already degenerate
    prod *= gap(subspaces[j], partial);
    acc.push_back(subspaces[j]);
  }
  return prod;
}

double hausdorff(const Subspace& V, const Subspace& V2) {
  if (V.ambient_dim() != V2.ambient_dim())
    throw std::invalid_argument("hausdorff: ambient dim mismatch");
  if (V.dim() != V2.dim()) throw std::invalid_argument("hausdorff: unequal dims");
  const Mat b = V.frame() - V2.frame() * (V2.frame().transpose() * V.frame());
  Eigen::JacobiSVD<Mat> svd(b);
  return std::min(1.0, svd.singularValues()(0));
}

PluckerVector plucker(const Subspace& V) {
  const int d = V.ambient_dim();
  const int r = V.dim();
  const std::uint64_t n = binomial(d, r);
  if (n > 2'000'000) throw std::invalid_argument("plucker: C(d,r) too large");
  PluckerVector pv;
  pv.d = d;
  pv.r = r;
  pv.coords = Vec(static_cast<Eigen::Index>(n));
  const auto subsets = k_subsets(d, r);
  Mat minor(r, r);
  for (std::size_t idx = 0; idx < subsets.size(); ++idx) {
    for (int i = 0; i < r; ++i) minor.row(i) = V.frame().row(subsets[idx][i]);
    pv.coords(static_cast<Eigen::Index>(idx)) = (r == 1) ? minor(0, 0) : minor.determinant();
  }
  // Sign convention: first coordinate clear of the noise floor is positive.
  for (Eigen::Index i = 0; i < pv.coords.size(); ++i) {
    if (std::abs(pv.coords(i)) > 1e-8) {
      if (pv.coords(i) < 0) pv.coords = -pv.coords;
      break;
    }
  }
  const double nrm = pv.coords.norm();
  if (nrm > 0) pv.coords /= nrm;
  return pv;
}

ExteriorOperator exterior_power(const Mat& g, int k) {
  ensure_finite(g, "exterior_power");
  const int d = static_cast<int>(g.rows());
  if (g.cols() != d) throw std::invalid_argument("exterior_power: matrix not square");
  if (k < 1 || k > d) throw std::invalid_argument("exterior_power: k out of range");
  const std::uint64_t n = binomial(d, k);
  if (n * n > 10'000'000) throw std::invalid_argument("exterior_power: C(d,k) too large");
  ExteriorOperator op;
  op.d = d;
  op.k = k;
  op.entries = Mat(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const auto subsets = k_subsets(d, k);
  Mat minor(k, k);
  for (std::size_t a = 0; a < subsets.size(); ++a) {
    for (std::size_t b = 0; b < subsets.size(); ++b) {
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) minor(i, j) = g(subsets[a][i], subsets[b][j]);
      op.entries(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          (k == 1) ? minor(0, 0) : minor.determinant();
    }
  }
  return op;
}

IMat exterior_power_int(const IMat& g, int k) {
  const int d = static_cast<int>(g.rows());
  if (g.cols() != d) throw std::invalid_argument("exterior_power_int: matrix not square");
  if (k < 1 || k > 3) throw std::invalid_argument("exterior_power_int: k must be 1..3");
  const std::uint64_t n = binomial(d, k);
  IMat out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const auto subsets = k_subsets(d, k);
  for (std::size_t a = 0; a < subsets.size(); ++a) {
    for (std::size_t b = 0; b < subsets.size(); ++b) {
      const auto& I = subsets[a];
      const auto& J = subsets[b];
      std::int64_t det = 0;
      if (k == 1) {
        det = g(I[0], J[0]);
      } else if (k == 2) {
        det = g(I[0], J[0]) * g(I[1], J[1]) - g(I[0], J[1]) * g(I[1], J[0]);
      } else {
        det = g(I[0], J[0]) * (g(I[1], J[1]) * g(I[2], J[2]) - g(I[1], J[2]) * g(I[2], J[1])) -
              g(I[0], J[1]) * (g(I[1], J[0]) * g(I[2], J[2]) - g(I[1], J[2]) * g(I[2], J[0])) +
              g(I[0], J[2]) * (g(I[1], J[0]) * g(I[2], J[1]) - g(I[1], J[1]) * g(I[2], J[0]));
      }
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = det;
    }
  }
  return out;
}

VectorInequalityReport check_vector_inequalities(const Mat& g, int r, const Vec& x,
                                                 double rel_slack) {
  if (x.norm() == 0.0) throw std::invalid_argument("check_vector_inequalities: zero vector");
  const CartanFrame f = cartan(g, r);
  VectorInequalityReport rep;
  const Subspace xline = Subspace(x.normalized());
  const Subspace vm = v_minus(f);
  const Subspace vp = v_plus(f);
  rep.ratio = (g * x).norm() / x.norm();
  rep.gap_x_vminus = gap(xline, vm);
  rep.lower = f.sigma(r - 1) * rep.gap_x_vminus;
  rep.upper = f.sigma(0) * rep.gap_x_vminus + f.sigma(r);
  const Vec gx = g * x;
  const double gap_gx_vplus = gap(Subspace(gx.normalized()), vp);
  rep.product_lhs = rep.gap_x_vminus * gap_gx_vplus;
  rep.product_rhs = f.sigma(r) / f.sigma(r - 1);
  const double slack_ratio = rel_slack * std::max(1.0, std::abs(rep.ratio));
  rep.ratio_bounds_hold =
      rep.lower <= rep.ratio + slack_ratio && rep.ratio <= rep.upper + slack_ratio;
  rep.product_bound_holds = rep.product_lhs <= rep.product_rhs + rel_slack;
  return rep;
}

}  // namespace rmp::linalg
