// Monte Carlo engine for random matrix products: product sampling, Lyapunov
// spectra, proximal-dimension detection, limit sets in the Grassmannian, the
// transversality search over Schubert data, minimal-rank limit operators and
// the invariant split of the exterior power.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rmp/groups.hpp"
#include "rmp/linalg.hpp"
#include "rmp/product_svd.hpp"

namespace rmp::walk {

using groups::GroupMeasure;
using linalg::Mat;
using linalg::ProductSvd;
using linalg::Subspace;
using linalg::Vec;

// Product of n i.i.d. atoms kept at unit max-entry scale; the true product
// is m * exp(log_scale).
struct ScaledMatrix {
  Mat m;
  double log_scale = 0.0;
};

ScaledMatrix sample_product(const GroupMeasure& mu, int n, std::uint64_t seed);
// The atom indices the above draws for a given seed (replay support).
std::vector<std::size_t> sample_atom_indices(const GroupMeasure& mu, int n, std::uint64_t seed);

// Runs the log-scaled SVD chain over n sampled steps.
ProductSvd sample_product_svd(const GroupMeasure& mu, int n, std::uint64_t seed);

struct SpectralProfile {
  Vec lambda;   // nonincreasing estimates, nats per step
  Vec stderr_;  // per-entry standard error
  int n = 0;
  int trials = 0;

  double sum_lambda() const { return lambda.sum(); }
  // root-sum-square of the per-entry standard errors
  double stderr_total() const { return std::sqrt(stderr_.squaredNorm()); }
};

// lambda_k = mean over trials of (1/n) log sigma_k(g_n ... g_1).
SpectralProfile estimate_lyapunov(const GroupMeasure& mu, int n, int trials, std::uint64_t seed,
                                  int threads = 1);

struct ProximalDetection {
  std::optional<int> r;
  std::string note;
};

// Largest r with lambda_1 - lambda_r <= equal_tol and
// lambda_r - lambda_{r+1} >= gap_min; explicit inconclusive state otherwise.
ProximalDetection detect_proximal_dimension(const SpectralProfile& profile,
                                            double equal_tol = 0.05, double gap_min = 0.1);

struct LimitSetSample {
  int r = 0;
  std::vector<Subspace> points;  // top singular subspaces of long products
  int horizon = 0;
  int degenerate_excluded = 0;
};

// Collects V^+ of independent products; products whose sigma_r/sigma_{r+1}
// falls below sep_ratio are excluded.  Throws if more than half are excluded.
LimitSetSample sample_limit_set(const GroupMeasure& mu, int r, int n, int trials,
                                std::uint64_t seed, int threads = 1, double sep_ratio = 1e3);

struct PropertySBudget {
  int starts = 64;
  int steps = 200;
};

struct PropertySReport {
  double min_max_gap = 1.0;         // min over searched W of max_V gap(V, W)
  Mat witness_frame;                // the minimizing W found
  std::string verdict;              // "consistent with (S)" or "violation witness"
  double pass_threshold = 0.05;
};

// Adversarial minimization of f(W) = max over limit points of gap(V, W) over
// W in Gr(d-r, d): multi-start; each start alternates worst-point absorption
// with Gaussian tangent kicks whose step halves on stagnation.
PropertySReport test_property_s(const LimitSetSample& limits, PropertySBudget budget,
                                std::uint64_t seed, double pass_threshold = 0.05,
                                int threads = 1);

struct PiGammaSample {
  int r = 0;
  std::vector<Mat> operators;  // unit top singular value, exact rank r
};

// g / sigma_1(g) with singular values beyond index r zeroed.
PiGammaSample estimate_pi_gamma(const GroupMeasure& mu, int r, int n, int trials,
                                std::uint64_t seed, int threads = 1, double sep_ratio = 1e3);

struct LambdaSplit {
  int dim_total = 0;   // C(d, r)
  Mat plus_frame;      // orthonormal basis of the span of limit Plucker lines
  Mat zero_frame;      // orthonormal basis of the common kernel of r-compounds
  double residual = 0; // worst relative invariance defect over atoms
  bool reducible_suspect = false;
  bool inconclusive = false;
  std::string note;
};

LambdaSplit compute_lambda_split(const PiGammaSample& pis, int r, const GroupMeasure& mu,
                                 std::uint64_t seed);

struct SplitRates {
  double rate_plus = 0;  // growth rate of the r-compound restricted to plus
  double rate_zero = 0;
};

SplitRates split_growth_rates(const GroupMeasure& mu, const LambdaSplit& split, int r, int n,
                              int trials, std::uint64_t seed, int threads = 1);

// Image of a start plane under independent length-burn_in products.
std::vector<Subspace> stationary_sample(const GroupMeasure& mu, int r, int burn_in, int trials,
                                        const Subspace& start, std::uint64_t seed,
                                        int threads = 1);

}  // namespace rmp::walk
