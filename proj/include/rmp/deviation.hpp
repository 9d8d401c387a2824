// Empirical verification of the quantitative walk estimates: exponential
// non-concentration near Schubert data, contraction of the Grassmannian walk
// onto top singular subspaces, large-deviation bounds for singular values,
// vector growth and linear forms, and Holder regularity of the stationary
// distribution.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rmp/groups.hpp"
#include "rmp/linalg.hpp"
#include "rmp/walk.hpp"

namespace rmp::deviation {

using groups::GroupMeasure;
using linalg::Mat;
using linalg::Subspace;
using linalg::Vec;

struct DeviationConfig {
  double omega = 0.2;
  int n = 120;                   // horizon
  std::vector<int> l_values;     // thresholds e^{-omega l} (or an n-schedule)
  int trials = 1000;
  std::optional<Subspace> V;
  std::optional<Subspace> W;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

struct DecayReport {
  std::vector<int> l_values;
  std::vector<long> hits;
  int trials = 0;
  std::vector<double> p_hat;
  std::vector<double> wilson_lo;
  std::vector<double> wilson_hi;
  // least squares of -log p_hat against l over points with >= 10 hits
  double fitted_c = 0.0;
  double fit_intercept = 0.0;
  double r_squared = 0.0;
  int fit_points = 0;
  std::string note;
};

// Fills the fit fields of a report from its counts.
void fit_decay(DecayReport& rep, long min_hits = 10);

// P{ gap(gV, W) <= e^{-omega l} } as a function of l at fixed horizon n.
DecayReport verify_gap_nonconcentration(const GroupMeasure& mu, const DeviationConfig& cfg);

// P{ gap(V^+_g, W) <= e^{-omega l} }.
DecayReport verify_vplus_nonconcentration(const GroupMeasure& mu, const DeviationConfig& cfg);

// P{ d_H(gV, V^+_g) <= e^{-(lambda_1 - lambda_{r+1} - omega) n} } over the
// n-schedule in cfg.l_values; expected to tend to 1.  Distances are computed
// in log scale so horizons far beyond double range still resolve.
DecayReport verify_contraction(const GroupMeasure& mu, const DeviationConfig& cfg,
                               const walk::SpectralProfile& profile, int r);

struct ContractionLemmaReport {
  double lhs = 0.0;  // d_H(gV, V^+_g)
  double rhs = 0.0;  // r sigma_1^{r-1} sigma_{r+1} / ||(wedge^r g) v||
  bool holds = false;
};

// Deterministic bound relating the Grassmannian displacement of a single
// matrix to its singular values; holds for every invertible g.
ContractionLemmaReport check_contraction_lemma(const Mat& g, int r, const Subspace& V,
                                               double rel_slack = 1e-6);

struct LargeDeviationSuite {
  DecayReport singular_values;  // (i): all k, |1/n log sigma_k - lambda_k| >= omega
  DecayReport vector_growth;    // (ii): |1/n log ||gx||/||x|| - lambda_1| >= omega
  DecayReport form_alignment;   // (iii): |f(gx)| <= e^{-omega l} ||gx|| ||f||
  std::string form_note;        // how (iii) was run (direct or on the plus block)
};

// cfg.l_values doubles as the n-schedule for (i)/(ii); (iii) runs at fixed
// cfg.n over the same l grid.  For (iii) the walk must be proximal (r = 1);
// otherwise supply a lambda split and the suite runs it on the plus block.
LargeDeviationSuite verify_large_deviation_suite(const GroupMeasure& mu,
                                                 const DeviationConfig& cfg,
                                                 const walk::SpectralProfile& profile,
                                                 const walk::LambdaSplit* split = nullptr);

struct HolderReport {
  double kappa_hat = 0.0;
  double moment_value = 0.0;  // (1/T) sum gap^{-kappa_hat} at the worst probe
  std::vector<double> kappa_grid;
  std::string note;
};

// Largest kappa on a 0.05 grid such that the Wilson upper confidence of the
// empirical CDF of gap(., W) stays below rho^kappa for every probe W and
// every rho in rho_grid.
HolderReport verify_holder_regularity(const std::vector<Subspace>& points,
                                      const std::vector<Subspace>& w_probes,
                                      const std::vector<double>& rho_grid);

}  // namespace rmp::deviation
