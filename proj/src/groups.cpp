#include "rmp/groups.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <stdexcept>

namespace rmp::groups {

namespace {

using boost::multiprecision::cpp_int;

// Gaussian integer, just enough ring structure for fraction-free elimination.
struct Gint {
  cpp_int re, im;
  bool is_zero() const { return re == 0 && im == 0; }
};

Gint operator*(const Gint& x, const Gint& y) {
  return {x.re * y.re - x.im * y.im, x.re * y.im + x.im * y.re};
}
Gint operator-(const Gint& x, const Gint& y) { return {x.re - y.re, x.im - y.im}; }

Gint div_exact(const Gint& num, const Gint& den) {
  const cpp_int n = den.re * den.re + den.im * den.im;
  const Gint t = num * Gint{den.re, -den.im};
  if (t.re % n != 0 || t.im % n != 0)
    throw std::logic_error("gaussian integer division not exact");
  return {t.re / n, t.im / n};
}

cpp_int div_exact(const cpp_int& num, const cpp_int& den) {
  if (num % den != 0) throw std::logic_error("integer division not exact");
  return num / den;
}

// Fraction-free (Bareiss) determinant over an integral domain.
template <typename T>
T bareiss_det(std::vector<std::vector<T>> m, const T& one) {
  const int n = static_cast<int>(m.size());
  if (n == 0) throw std::invalid_argument("bareiss_det: empty matrix");
  T prev = one;
  int sign = 1;
  for (int k = 0; k + 1 < n; ++k) {
    if (m[k][k].is_zero()) {
      int piv = -1;
      for (int i = k + 1; i < n; ++i)
        if (!m[i][k].is_zero()) {
          piv = i;
          break;
        }
      if (piv < 0) return T{};  // zero column -> zero determinant
      std::swap(m[k], m[piv]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j)
        m[i][j] = div_exact(m[i][j] * m[k][k] - m[i][k] * m[k][j], prev);
    prev = m[k][k];
  }
  T det = m[n - 1][n - 1];
  if (sign < 0) det = det * T{-1};
  return det;
}

// cpp_int does not expose is_zero() as needed above; wrap it.
struct ZInt {
  cpp_int v;
  bool is_zero() const { return v == 0; }
};
ZInt operator*(const ZInt& a, const ZInt& b) { return {a.v * b.v}; }
ZInt operator-(const ZInt& a, const ZInt& b) { return {a.v - b.v}; }
ZInt div_exact(const ZInt& a, const ZInt& b) { return {div_exact(a.v, b.v)}; }
struct ZIntTag {};

cpp_int int_det(const IMat& m) {
  std::vector<std::vector<ZInt>> w(m.rows(), std::vector<ZInt>(m.cols()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) w[i][j] = ZInt{cpp_int(m(i, j))};
  return bareiss_det(std::move(w), ZInt{cpp_int(1)}).v;
}

Gint gaussian_det(const ComplexIntMatrix& m) {
  if (m.re.rows() != m.re.cols() || m.im.rows() != m.im.cols() || m.re.rows() != m.im.rows())
    throw std::invalid_argument("gaussian_det: shape mismatch");
  std::vector<std::vector<Gint>> w(m.re.rows(), std::vector<Gint>(m.re.cols()));
  for (int i = 0; i < m.re.rows(); ++i)
    for (int j = 0; j < m.re.cols(); ++j) w[i][j] = Gint{cpp_int(m.re(i, j)), cpp_int(m.im(i, j))};
  return bareiss_det(std::move(w), Gint{1, 0});
}

bool is_integral(double x) { return std::abs(x - std::round(x)) < 1e-9 && std::abs(x) < 4.5e15; }

struct Quat {
  std::int64_t a, b, c, d;
};
Quat qmul(const Quat& x, const Quat& y) {
  return {x.a * y.a - x.b * y.b - x.c * y.c - x.d * y.d,
          x.a * y.b + x.b * y.a + x.c * y.d - x.d * y.c,
          x.a * y.c - x.b * y.d + x.c * y.a + x.d * y.b,
          x.a * y.d + x.b * y.c - x.c * y.b + x.d * y.a};
}

// 4x4 block of left multiplication by q on basis (1,i,j,k): columns are q * e_b.
void put_left_block(IMat& out, int bi, int bj, const Quat& q) {
  const Quat basis[4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
  for (int col = 0; col < 4; ++col) {
    const Quat r = qmul(q, basis[col]);
    out(4 * bi + 0, 4 * bj + col) = r.a;
    out(4 * bi + 1, 4 * bj + col) = r.b;
    out(4 * bi + 2, 4 * bj + col) = r.c;
    out(4 * bi + 3, 4 * bj + col) = r.d;
  }
}

Mat to_real(const IMat& m) {
  Mat out(m.rows(), m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) = static_cast<double>(m(i, j));
  return out;
}

}  // namespace

std::string integer_determinant(const IMat& m) { return int_det(m).str(); }

GroupMeasure::GroupMeasure(int dim, std::vector<Mat> atoms, std::vector<double> weights,
                           std::string label)
    : dim_(dim), label_(std::move(label)), atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (atoms_.empty()) throw std::invalid_argument("GroupMeasure: no atoms");
  if (atoms_.size() != weights_.size())
    throw std::invalid_argument("GroupMeasure: atoms/weights size mismatch");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0)) throw std::invalid_argument("GroupMeasure: weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("GroupMeasure: weights must sum to 1");
  cumulative_.resize(weights_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    acc += weights_[i];
    cumulative_[i] = acc;
  }
  cumulative_.back() = 1.0;

  bool all_integral = true;
  for (const Mat& a : atoms_) {
    if (a.rows() != dim_ || a.cols() != dim_)
      throw std::invalid_argument("GroupMeasure: atom dimension mismatch");
    if (!a.allFinite()) throw std::invalid_argument("GroupMeasure: non-finite atom");
    for (int i = 0; i < a.rows() && all_integral; ++i)
      for (int j = 0; j < a.cols(); ++j)
        if (!is_integral(a(i, j))) {
          all_integral = false;
          break;
        }
  }

  if (all_integral) {
    // integer_flag additionally requires |det| = 1 exactly; integral atoms
    // with other determinants are kept as plain real atoms
    std::vector<IMat> ints;
    bool unimodular = true;
    for (const Mat& a : atoms_) {
      IMat m(dim_, dim_);
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) m(i, j) = static_cast<std::int64_t>(std::llround(a(i, j)));
      const cpp_int det = int_det(m);
      if (det == 0) throw std::invalid_argument("GroupMeasure: non-invertible atom");
      if (det != 1 && det != -1) unimodular = false;
      ints.push_back(std::move(m));
    }
    if (unimodular) {
      atoms_int_ = std::move(ints);
      integer_flag_ = true;
    }
  } else {
    for (const Mat& a : atoms_) {
      Eigen::JacobiSVD<Mat> svd(a);
      const auto& s = svd.singularValues();
      if (s(s.size() - 1) < 1e-13 * s(0))
        throw std::invalid_argument("GroupMeasure: non-invertible atom");
    }
  }

  atom_log_kappa_.reserve(atoms_.size());
  for (const Mat& a : atoms_) {
    Eigen::JacobiSVD<Mat> svd(a);
    const auto& s = svd.singularValues();
    atom_log_kappa_.push_back(std::log(s(0)) - std::log(s(s.size() - 1)));
  }
}

std::size_t GroupMeasure::sample_index(Rng& rng) const {
  const double u = rng.uniform();
  // cumulative_ is short (presets have <= 8 atoms); linear scan is fine
  for (std::size_t i = 0; i < cumulative_.size(); ++i)
    if (u < cumulative_[i]) return i;
  return cumulative_.size() - 1;
}

QuatIntMatrix quaternion_transvection(int m, int i, int j, std::int64_t qa, std::int64_t qb,
                                      std::int64_t qc, std::int64_t qd) {
  if (i == j || i < 0 || j < 0 || i >= m || j >= m)
    throw std::invalid_argument("quaternion_transvection: need distinct indices in range");
  QuatIntMatrix t;
  t.a = IMat::Identity(m, m);
  t.b = IMat::Zero(m, m);
  t.c = IMat::Zero(m, m);
  t.d = IMat::Zero(m, m);
  t.a(i, j) += qa;
  t.b(i, j) += qb;
  t.c(i, j) += qc;
  t.d(i, j) += qd;
  return t;
}

GroupMeasure realify_complex(const std::vector<ComplexIntMatrix>& atoms,
                             const std::vector<double>& weights, std::string label) {
  if (atoms.empty()) throw std::invalid_argument("realify_complex: no atoms");
  const int m = static_cast<int>(atoms.front().re.rows());
  std::vector<Mat> real_atoms;
  real_atoms.reserve(atoms.size());
  for (const auto& z : atoms) {
    if (z.re.rows() != m || z.re.cols() != m || z.im.rows() != m || z.im.cols() != m)
      throw std::invalid_argument("realify_complex: atom shape mismatch");
    const Gint det = gaussian_det(z);
    if (det.re != 1 || det.im != 0)
      throw std::invalid_argument("realify_complex: atom determinant != 1");
    IMat r(2 * m, 2 * m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        r(2 * i, 2 * j) = z.re(i, j);
        r(2 * i, 2 * j + 1) = -z.im(i, j);
        r(2 * i + 1, 2 * j) = z.im(i, j);
        r(2 * i + 1, 2 * j + 1) = z.re(i, j);
      }
    real_atoms.push_back(to_real(r));
  }
  GroupMeasure mu(2 * m, std::move(real_atoms), weights, std::move(label));
  mu.set_structures({complex_structure(m)});
  return mu;
}

GroupMeasure realify_quaternion(const std::vector<QuatIntMatrix>& atoms,
                                const std::vector<double>& weights, std::string label) {
  if (atoms.empty()) throw std::invalid_argument("realify_quaternion: no atoms");
  const int m = static_cast<int>(atoms.front().a.rows());
  std::vector<Mat> real_atoms;
  real_atoms.reserve(atoms.size());
  for (const auto& q : atoms) {
    if (q.a.rows() != m || q.b.rows() != m || q.c.rows() != m || q.d.rows() != m)
      throw std::invalid_argument("realify_quaternion: atom shape mismatch");
    IMat r = IMat::Zero(4 * m, 4 * m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        put_left_block(r, i, j, Quat{q.a(i, j), q.b(i, j), q.c(i, j), q.d(i, j)});
    // Reduced norm is nonnegative and det(realification) is its 4th power,
    // so exact determinant 1 certifies reduced norm 1.
    if (int_det(r) != 1) throw std::invalid_argument("realify_quaternion: unsupported atom");
    real_atoms.push_back(to_real(r));
  }
  GroupMeasure mu(4 * m, std::move(real_atoms), weights, std::move(label));
  mu.set_structures(
      {quaternion_structure(m, 'i'), quaternion_structure(m, 'j'), quaternion_structure(m, 'k')});
  return mu;
}

GroupMeasure so1d_exterior_square(const std::vector<IMat>& generators,
                                  const std::vector<double>& weights, std::string label) {
  if (generators.empty()) throw std::invalid_argument("so1d_exterior_square: no generators");
  const int n = static_cast<int>(generators.front().rows());  // = 1 + d
  IMat J = IMat::Identity(n, n);
  for (int i = 1; i < n; ++i) J(i, i) = -1;
  std::vector<Mat> atoms;
  atoms.reserve(generators.size());
  for (const IMat& g : generators) {
    if (g.rows() != n || g.cols() != n)
      throw std::invalid_argument("so1d_exterior_square: generator shape mismatch");
    if (((g.transpose() * J * g) - J).cwiseAbs().maxCoeff() != 0)
      throw std::invalid_argument("so1d_exterior_square: form not preserved");
    atoms.push_back(to_real(linalg::exterior_power_int(g, 2)));
  }
  const auto dim = static_cast<int>(linalg::binomial(n, 2));
  return GroupMeasure(dim, std::move(atoms), weights, std::move(label));
}

GroupMeasure baseline_proximal_sl2z() {
  Mat a(2, 2), b(2, 2), ai(2, 2), bi(2, 2);
  a << 1, 2, 0, 1;
  b << 1, 0, 2, 1;
  ai << 1, -2, 0, 1;
  bi << 1, 0, -2, 1;
  return GroupMeasure(2, {a, b, ai, bi}, {0.25, 0.25, 0.25, 0.25}, "sl2z");
}

IMat complex_structure(int half_dim) {
  IMat j = IMat::Zero(2 * half_dim, 2 * half_dim);
  for (int i = 0; i < half_dim; ++i) {
    j(2 * i, 2 * i + 1) = -1;
    j(2 * i + 1, 2 * i) = 1;
  }
  return j;
}

IMat quaternion_structure(int m, char unit) {
  Quat p{};
  switch (unit) {
    case 'i': p = {0, 1, 0, 0}; break;
    case 'j': p = {0, 0, 1, 0}; break;
    case 'k': p = {0, 0, 0, 1}; break;
    default: throw std::invalid_argument("quaternion_structure: unit must be i, j or k");
  }
  // right multiplication by p: columns are (basis_b * p)
  const Quat basis[4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
  IMat block(4, 4);
  for (int col = 0; col < 4; ++col) {
    const Quat r = qmul(basis[col], p);
    block(0, col) = r.a;
    block(1, col) = r.b;
    block(2, col) = r.c;
    block(3, col) = r.d;
  }
  IMat out = IMat::Zero(4 * m, 4 * m);
  for (int i = 0; i < m; ++i) out.block(4 * i, 4 * i, 4, 4) = block;
  return out;
}

namespace {

GroupMeasure make_slc2_in_sl4() {
  const IMat z = IMat::Zero(2, 2);
  auto cmat = [&](std::int64_t re00, std::int64_t re01, std::int64_t re10, std::int64_t re11,
                  std::int64_t im00, std::int64_t im01, std::int64_t im10, std::int64_t im11) {
    ComplexIntMatrix m{IMat(2, 2), IMat(2, 2)};
    m.re << re00, re01, re10, re11;
    m.im << im00, im01, im10, im11;
    return m;
  };
  (void)z;
  // transvections in both corners, real and imaginary directions; the
  // generated group is Zariski dense and the walk has a solid top exponent
  std::vector<ComplexIntMatrix> atoms = {
      cmat(1, 2, 0, 1, 0, 0, 0, 0),    // [[1,2],[0,1]]
      cmat(1, -2, 0, 1, 0, 0, 0, 0),   // inverse
      cmat(1, 0, 2, 1, 0, 0, 0, 0),    // [[1,0],[2,1]]
      cmat(1, 0, -2, 1, 0, 0, 0, 0),   // inverse
      cmat(1, 0, 0, 1, 0, 2, 0, 0),    // [[1,2i],[0,1]]
      cmat(1, 0, 0, 1, 0, -2, 0, 0),   // inverse
      cmat(1, 0, 0, 1, 0, 0, 2, 0),    // [[1,0],[2i,1]]
      cmat(1, 0, 0, 1, 0, 0, -2, 0),   // inverse
  };
  const double w = 1.0 / 8.0;
  return realify_complex(atoms, {w, w, w, w, w, w, w, w}, "slc2-in-sl4");
}

GroupMeasure make_slh2_in_sl8() {
  std::vector<QuatIntMatrix> atoms = {
      quaternion_transvection(2, 0, 1, 1, 0, 0, 0),   // I + E12
      quaternion_transvection(2, 0, 1, -1, 0, 0, 0),  // inverse
      quaternion_transvection(2, 0, 1, 0, 1, 0, 0),   // I + i E12
      quaternion_transvection(2, 0, 1, 0, -1, 0, 0),
      quaternion_transvection(2, 1, 0, 0, 0, 1, 0),   // I + j E21
      quaternion_transvection(2, 1, 0, 0, 0, -1, 0),
      quaternion_transvection(2, 1, 0, 0, 0, 0, 1),   // I + k E21
      quaternion_transvection(2, 1, 0, 0, 0, 0, -1),
  };
  const double w = 1.0 / 8.0;
  return realify_quaternion(atoms, std::vector<double>(8, w), "slh2-in-sl8");
}

GroupMeasure make_so1_7_ext2() {
  const int n = 8;  // 1 + d with d = 7
  // integer Lorentz boost mixing x0, x1, x2, with a sign flip on x7 so the
  // determinant is +1
  IMat g1 = IMat::Identity(n, n);
  g1(0, 0) = 3; g1(0, 1) = 2; g1(0, 2) = 2;
  g1(1, 0) = 2; g1(1, 1) = 1; g1(1, 2) = 2;
  g1(2, 0) = 2; g1(2, 1) = 2; g1(2, 2) = 1;
  g1(7, 7) = -1;
  // inverse of the 3x3 block via B^{-1} = J3 B^T J3
  IMat g1i = IMat::Identity(n, n);
  g1i(0, 0) = 3; g1i(0, 1) = -2; g1i(0, 2) = -2;
  g1i(1, 0) = -2; g1i(1, 1) = 1; g1i(1, 2) = 2;
  g1i(2, 0) = -2; g1i(2, 1) = 2; g1i(2, 2) = 1;
  g1i(7, 7) = -1;
  // spatial 7-cycle x1 -> x2 -> ... -> x7 -> x1 (even permutation)
  IMat g2 = IMat::Zero(n, n);
  g2(0, 0) = 1;
  for (int i = 1; i <= 7; ++i) g2(i % 7 + 1, i) = 1;
  IMat g2i = g2.transpose();
  const double w = 0.25;
  return so1d_exterior_square({g1, g1i, g2, g2i}, {w, w, w, w}, "so1-7-ext2");
}

}  // namespace

GroupMeasure preset(const std::string& name) {
  if (name == "sl2z") return baseline_proximal_sl2z();
  if (name == "slc2-in-sl4") return make_slc2_in_sl4();
  if (name == "slh2-in-sl8") return make_slh2_in_sl8();
  if (name == "so1-7-ext2") return make_so1_7_ext2();
  if (name == "slh1-in-sl4")
    throw std::invalid_argument(
        "preset slh1-in-sl4 is deliberately not shipped: the realified group of norm-1 "
        "quaternions is compact, so the walk has no spectral gap to study");
  std::string msg = "unknown preset '" + name + "'; available:";
  for (const auto& p : preset_names()) msg += " " + p;
  throw std::invalid_argument(msg);
}

std::vector<std::string> preset_names() {
  return {"sl2z", "slc2-in-sl4", "slh2-in-sl8", "so1-7-ext2"};
}

GroupMeasure transpose_inverse_measure(const GroupMeasure& mu) {
  std::vector<Mat> atoms;
  std::vector<double> weights;
  for (std::size_t i = 0; i < mu.atom_count(); ++i) {
    const Mat& a = mu.atom(i);
    Mat inv = a.inverse().transpose();
    if (mu.integer_flag()) {
      // |det| = 1, so the inverse is an integer matrix; snap away roundoff
      for (int r = 0; r < inv.rows(); ++r)
        for (int c = 0; c < inv.cols(); ++c) inv(r, c) = std::round(inv(r, c));
      if (((a.transpose() * inv) - Mat::Identity(a.rows(), a.cols())).cwiseAbs().maxCoeff() >
          1e-9)
        throw std::logic_error("transpose_inverse_measure: exact inverse check failed");
    }
    atoms.push_back(std::move(inv));
    weights.push_back(mu.weight(i));
  }
  return GroupMeasure(mu.dim(), std::move(atoms), std::move(weights),
                      mu.label() + "-dual");
}

}  // namespace rmp::groups
