// Random walks on the d-torus for integer step measures, in two exact
// arithmetic modes: big-rational points (the orbit of p/q stays q-torsion)
// and B-bit fixed point with a rigorous accumulated-error ledger.  On top of
// that: Fourier coefficients, sets of large coefficients, covering numbers,
// the rational-persistence / generic-decay experiment, and the invertibility
// check for combinations h = sum c_i g_i.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rmp/groups.hpp"
#include "rmp/linalg.hpp"

namespace rmp::torus {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;
using groups::GroupMeasure;
using linalg::IMat;
using linalg::Mat;
using linalg::Vec;

class TorusPoint {
 public:
  // x = p/q reduced, coordinates normalized into [0, q).
  static TorusPoint exact_rational(std::vector<cpp_int> p, cpp_int q);
  // fixed-point coordinates given as integers in [0, 2^bits)
  static TorusPoint fixed_from_bits(std::vector<cpp_int> x, int bits = 512);
  // frac(sqrt(m)) per coordinate, truncated to `bits` bits: an algebraic
  // surrogate for a generic point (any B-bit point is rational with huge q,
  // which is harmless at the horizons studied here).
  static TorusPoint sqrt_surrogate(const std::vector<int>& radicands, int bits = 512);

  bool exact() const { return exact_; }
  int dim() const { return static_cast<int>(coords_.size()); }
  const std::vector<cpp_int>& coords() const { return coords_; }
  const cpp_int& denominator() const { return q_; }  // exact mode only
  int bits() const { return bits_; }                 // fixed-point mode only
  double error_bound() const { return eps_; }
  bool precision_exhausted() const { return !exact_ && eps_ >= 0x1p-32; }

  // coordinate as a double in [0,1)
  double coordinate(int i) const;
  // fractional part of <a, x> in [0,1), exact to the arithmetic mode
  double character_phase(const std::vector<std::int64_t>& a) const;

  // image under an integer matrix, mod 1
  TorusPoint step(const IMat& g) const;

 private:
  TorusPoint() = default;
  bool exact_ = true;
  std::vector<cpp_int> coords_;  // numerators (exact) or fixed-point words
  cpp_int q_ = 1;
  int bits_ = 0;
  double eps_ = 0.0;
};

// Law of the walk at a fixed time: exact finitely-supported distribution on
// (1/q)Z^d / Z^d, or an empirical cloud of trajectory endpoints.
struct TorusDistribution {
  bool exact = false;
  int dim = 0;
  int n = 0;  // step count
  // exact mode
  std::uint64_t q = 0;
  std::map<std::uint64_t, cpp_rational> masses;  // key: sum_i p_i q^i
  // empirical mode
  std::vector<TorusPoint> points;

  std::size_t support_size() const { return exact ? masses.size() : points.size(); }
};

// Exact pushforward of delta_{x0} through n convolution steps.  Requires an
// exact rational start and q^dim <= 1e6; otherwise throws with a pointer to
// the empirical mode.  Atom weights are used as exact rationals (reconstructed
// from the stored doubles and renormalized to sum to exactly 1).
TorusDistribution exact_distribution(const GroupMeasure& mu, const TorusPoint& x0, int n);

// Endpoints of `trials` independent length-n trajectories from x0.
TorusDistribution empirical_distribution(const GroupMeasure& mu, const TorusPoint& x0, int n,
                                         int trials, std::uint64_t seed, int threads = 1);

struct FourierReport {
  std::vector<std::int64_t> frequency;
  std::complex<double> value;
  double stderr_ = 0.0;  // 1/sqrt(T) in empirical mode, 0 in exact mode
  bool exact = false;
};

FourierReport fourier(const TorusDistribution& dist, const std::vector<std::int64_t>& a);

// All frequencies with sup-norm at most N whose coefficient magnitude is at
// least t.  Throws when the scan grid exceeds 1e7 points, or when an
// empirical distribution is too small for the requested level (trials >=
// 100/t^2).
std::vector<std::vector<std::int64_t>> large_coefficient_set(const TorusDistribution& dist,
                                                             double t, int N);

struct CoveringNumbers {
  long greedy_cover = 0;     // upper bound for N_cov(A, M)
  long separated_lower = 0;  // disjoint-ball packing lower bound
};

// Balls of radius M (Euclidean).  The packing uses pairwise distances > 2M so
// that no cover ball can hold two packing centers.
CoveringNumbers covering_number(const std::vector<Vec>& points, double M);

struct DichotomyRow {
  int n = 0;
  std::vector<std::int64_t> a;
  std::complex<double> value;
  double abs = 0.0;
  double stderr_ = 0.0;
};

struct DichotomyReport {
  std::vector<DichotomyRow> rows;                            // full scan per n
  std::vector<std::vector<std::int64_t>> persistent_frequencies;  // |coef| = 1 for all n
  std::vector<double> max_nonzero_abs;                       // per schedule entry
  std::vector<int> schedule;
  std::vector<std::size_t> large_set_sizes;                  // |A_{t,n} cap B(0,N)|
  int decay_threshold_n = -1;  // first n with max coefficient below t
  bool persistence_flat = false;
  std::string mode;  // "exact" or "empirical"
  std::string note;
};

// For rational starts the coefficient at every frequency in q Z^d stays at 1
// for all n (persistence); for generic surrogates the largest nontrivial
// coefficient is expected to fall below t once n is large enough (decay).
DichotomyReport dichotomy_experiment(const GroupMeasure& mu, const TorusPoint& x0, double t,
                                     const std::vector<int>& schedule, int N, int trials,
                                     std::uint64_t seed, int threads = 1);

struct InvertibilityReport {
  double rho = 0.0;      // max sigma_{r+1}(g_i) / sigma_r(g_i)
  double c_ratio = 0.0;  // max |c_i| / |c_j|
  double l_ratio = 0.0;  // max sigma_1(g_i) / sigma_r(g_j)
  double v1 = 0.0;       // gap_multi of the top subspaces
  double v2 = 0.0;       // same for the transposes
  double v = 0.0;        // min(v1, v2)
  bool hypothesis_holds = false;  // rho < v^3 / (40 k^3 C L)
  double det_h = 0.0;
  double h_norm = 0.0;
  bool h_invertible = false;  // |det h| > 1e-12 * ||h||^d
};

// Requires d = k r, invertible g_i, nonzero c_i.
InvertibilityReport invertibility_lemma_check(const std::vector<Mat>& gs,
                                              const std::vector<double>& cs, int r);

struct InvertibilitySweep {
  long total = 0;
  long hypothesis_count = 0;
  long singular_among_hypothesis = 0;
  long singular_total = 0;  // unfiltered rate, for context
};

// Seeded random tuples with singular-value profiles spread enough that the
// hypothesis holds for a sizable fraction.
InvertibilitySweep invertibility_sweep(int k, int d, int r, long count, std::uint64_t seed);

}  // namespace rmp::torus
