#include "rmp/walk.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rmp/parallel.hpp"
#include "rmp/prng.hpp"
#include "rmp/stats.hpp"

namespace rmp::walk {

std::vector<std::size_t> sample_atom_indices(const GroupMeasure& mu, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = mu.sample_index(rng);
  return idx;
}

ScaledMatrix sample_product(const GroupMeasure& mu, int n, std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("sample_product: n must be >= 0");
  ScaledMatrix out{Mat::Identity(mu.dim(), mu.dim()), 0.0};
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    out.m = mu.atom(mu.sample_index(rng)) * out.m;
    const double s = out.m.cwiseAbs().maxCoeff();
    if (!(s > 0.0) || !std::isfinite(s))
      throw std::runtime_error("sample_product: overflow despite renormalization");
    out.m /= s;
    out.log_scale += std::log(s);
  }
  return out;
}

ProductSvd sample_product_svd(const GroupMeasure& mu, int n, std::uint64_t seed) {
  Rng rng(seed);
  linalg::ProductChain chain(mu.dim());
  for (int i = 0; i < n; ++i) {
    const std::size_t k = mu.sample_index(rng);
    chain.push(mu.atom(k), mu.atom_log_kappa(k));
  }
  return chain.finish();
}

SpectralProfile estimate_lyapunov(const GroupMeasure& mu, int n, int trials, std::uint64_t seed,
                                  int threads) {
  if (n < 1 || trials < 2)
    throw std::invalid_argument("estimate_lyapunov: need n >= 1 and trials >= 2");
  const int d = mu.dim();
  std::vector<Vec> per_trial(static_cast<std::size_t>(trials));
  parallel_trials(trials, threads, [&](int t) {
    const ProductSvd svd =
        sample_product_svd(mu, n, derive_seed(seed, static_cast<std::uint64_t>(t)));
    per_trial[static_cast<std::size_t>(t)] = svd.log_sigma() / static_cast<double>(n);
  });
  SpectralProfile p;
  p.n = n;
  p.trials = trials;
  p.lambda = Vec::Zero(d);
  p.stderr_ = Vec::Zero(d);
  for (int k = 0; k < d; ++k) {
    std::vector<double> vals(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t) vals[static_cast<std::size_t>(t)] = per_trial[static_cast<std::size_t>(t)](k);
    p.lambda(k) = mean_of(vals);
    p.stderr_(k) = sample_std(vals) / std::sqrt(static_cast<double>(trials));
  }
  return p;
}

ProximalDetection detect_proximal_dimension(const SpectralProfile& profile, double equal_tol,
                                            double gap_min) {
  const int d = static_cast<int>(profile.lambda.size());
  ProximalDetection out;
  for (int r = d - 1; r >= 1; --r) {
    const bool equal_top = (profile.lambda(0) - profile.lambda(r - 1)) <= equal_tol;
    const bool gapped = (profile.lambda(r - 1) - profile.lambda(r)) >= gap_min;
    if (equal_top && gapped) {
      out.r = r;
      out.note = "ok";
      return out;
    }
  }
  out.note = "inconclusive: no rank satisfies the equality/gap rule";
  return out;
}

LimitSetSample sample_limit_set(const GroupMeasure& mu, int r, int n, int trials,
                                std::uint64_t seed, int threads, double sep_ratio) {
  if (r < 1 || r >= mu.dim()) throw std::invalid_argument("sample_limit_set: bad r");
  const double log_ratio_needed = std::log(sep_ratio);
  std::vector<std::optional<Mat>> frames(static_cast<std::size_t>(trials));
  parallel_trials(trials, threads, [&](int t) {
    const ProductSvd svd =
        sample_product_svd(mu, n, derive_seed(seed, static_cast<std::uint64_t>(t)));
    if (svd.log_sigma()(r - 1) - svd.log_sigma()(r) >= log_ratio_needed)
      frames[static_cast<std::size_t>(t)] = svd.matrix_u().leftCols(r);
  });
  LimitSetSample out;
  out.r = r;
  out.horizon = n;
  for (auto& f : frames) {
    if (f.has_value())
      out.points.emplace_back(std::move(*f));
    else
      ++out.degenerate_excluded;
  }
  if (out.degenerate_excluded * 2 > trials)
    throw std::runtime_error("sample_limit_set: spectrum gap too small at this horizon");
  return out;
}

namespace {

// max over limit points of gap(V, W); aborts once the running max exceeds
// abort_above.  argmax is valid only when no abort happened.
struct MaxGap {
  double value = 0.0;
  std::size_t argmax = 0;
  bool aborted = false;
};

MaxGap max_gap_over(const std::vector<Subspace>& points, const Subspace& w, double abort_above) {
  MaxGap m;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double g = linalg::gap(points[i], w);
    if (g > m.value) {
      m.value = g;
      m.argmax = i;
    }
    if (m.value >= abort_above) {
      m.aborted = true;
      return m;
    }
  }
  return m;
}

// Minimal rotation of W toward containing the nearest direction of V.
Mat absorb_worst(const Mat& w_frame, const Subspace& v, double t) {
  const Mat c = v.frame().transpose() * w_frame;  // r x m
  Eigen::JacobiSVD<Mat> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double cosang = std::min(1.0, svd.singularValues()(0));
  const Vec a = svd.matrixU().col(0);
  const Vec b = svd.matrixV().col(0);
  const Vec xstar = v.frame() * a;
  const Vec wstar = w_frame * b;
  Vec y = xstar - cosang * wstar;
  const double ynorm = y.norm();
  if (ynorm < 1e-15) return w_frame;  // already touching
  y /= ynorm;
  const double theta = std::acos(std::max(-1.0, std::min(1.0, cosang)));
  const Vec wnew = std::cos(t * theta) * wstar + std::sin(t * theta) * y;
  Mat m = w_frame + (wnew - wstar) * b.transpose();
  Eigen::HouseholderQR<Mat> qr(m);
  return qr.householderQ() * Mat::Identity(m.rows(), m.cols());
}

}  // namespace

PropertySReport test_property_s(const LimitSetSample& limits, PropertySBudget budget,
                                std::uint64_t seed, double pass_threshold, int threads) {
  if (budget.starts < 10) throw std::invalid_argument("test_property_s: budget < 10 starts");
  if (limits.points.size() < 200)
    throw std::invalid_argument("test_property_s: need at least 200 limit points");
  const int d = limits.points.front().ambient_dim();
  const int m = d - limits.r;
  if (m < 1) throw std::invalid_argument("test_property_s: r must be < d");

  std::vector<double> best_val(static_cast<std::size_t>(budget.starts));
  std::vector<Mat> best_frame(static_cast<std::size_t>(budget.starts));

  parallel_trials(budget.starts, threads, [&](int s) {
    Rng rng(derive_seed(seed, 0xabc0de ^ static_cast<std::uint64_t>(s)));
    Subspace w = linalg::random_subspace(d, m, rng);
    MaxGap cur = max_gap_over(limits.points, w, 2.0);
    double best = cur.value;
    Mat best_w = w.frame();
    double step = 0.5;
    int stall = 0;
    for (int it = 0; it < budget.steps; ++it) {
      // worst-point absorption, taken unconditionally; the best iterate is
      // tracked separately so excursions upward are free exploration
      Mat absorbed = absorb_worst(w.frame(), limits.points[cur.argmax], 1.0);
      Subspace wa(absorbed);
      MaxGap fa = max_gap_over(limits.points, wa, 2.0);
      w = wa;
      cur = fa;
      if (fa.value < best) {
        best = fa.value;
        best_w = absorbed;
        stall = 0;
      } else if (++stall >= 8) {
        // restart from the best point with a Gaussian tangent kick
        Mat q = best_w;
        Mat noise = linalg::random_gaussian_matrix(d, m, rng);
        noise -= q * (q.transpose() * noise);
        const double nn = noise.norm();
        if (nn > 0) q += (step / nn) * noise;
        Eigen::HouseholderQR<Mat> qr(q);
        w = Subspace(qr.householderQ() * Mat::Identity(d, m));
        cur = max_gap_over(limits.points, w, 2.0);
        step *= 0.5;
        stall = 0;
        if (step < 1e-12) break;
      }
      if (best < 1e-10) break;
    }
    best_val[static_cast<std::size_t>(s)] = best;
    best_frame[static_cast<std::size_t>(s)] = best_w;
  });

  PropertySReport rep;
  rep.pass_threshold = pass_threshold;
  std::size_t arg = 0;
  for (std::size_t s = 1; s < best_val.size(); ++s)
    if (best_val[s] < best_val[arg]) arg = s;
  rep.min_max_gap = best_val[arg];
  rep.witness_frame = best_frame[arg];
  rep.verdict = rep.min_max_gap > pass_threshold ? "consistent with (S)" : "violation witness";
  return rep;
}

PiGammaSample estimate_pi_gamma(const GroupMeasure& mu, int r, int n, int trials,
                                std::uint64_t seed, int threads, double sep_ratio) {
  if (r < 1 || r >= mu.dim()) throw std::invalid_argument("estimate_pi_gamma: bad r");
  const double log_ratio_needed = std::log(sep_ratio);
  std::vector<std::optional<Mat>> ops(static_cast<std::size_t>(trials));
  parallel_trials(trials, threads, [&](int t) {
    const ProductSvd svd =
        sample_product_svd(mu, n, derive_seed(seed, static_cast<std::uint64_t>(t)));
    const Vec& ls = svd.log_sigma();
    if (ls(r - 1) - ls(r) < log_ratio_needed) return;
    Vec w = Vec::Zero(mu.dim());
    for (int k = 0; k < r; ++k) w(k) = std::exp(ls(k) - ls(0));
    ops[static_cast<std::size_t>(t)] =
        svd.matrix_u() * w.asDiagonal() * svd.matrix_v().transpose();
  });
  PiGammaSample out;
  out.r = r;
  int degenerate = 0;
  for (auto& o : ops) {
    if (o.has_value())
      out.operators.push_back(std::move(*o));
    else
      ++degenerate;
  }
  if (degenerate * 2 > trials)
    throw std::runtime_error("estimate_pi_gamma: spectrum gap too small at this horizon");
  return out;
}

namespace {

int stable_rank(const Vec& singular_values, const std::vector<double>& rel_thresholds) {
  const double lead = singular_values(0);
  int rank = -1;
  for (double th : rel_thresholds) {
    int r = 0;
    for (int i = 0; i < singular_values.size(); ++i)
      if (singular_values(i) > th * lead) ++r;
    if (rank < 0)
      rank = r;
    else if (rank != r)
      return -1;  // threshold sweep disagrees
  }
  return rank;
}

}  // namespace

LambdaSplit compute_lambda_split(const PiGammaSample& pis, int r, const GroupMeasure& mu,
                                 std::uint64_t seed) {
  const int d = mu.dim();
  const auto dim_total = static_cast<int>(linalg::binomial(d, r));
  LambdaSplit out;
  out.dim_total = dim_total;
  if (pis.operators.empty()) {
    out.inconclusive = true;
    out.note = "no operators";
    return out;
  }
  const auto n_ops = pis.operators.size();

  Mat plus_cols(dim_total, static_cast<Eigen::Index>(n_ops));
  Mat coim_cols(dim_total, static_cast<Eigen::Index>(n_ops));
  for (std::size_t i = 0; i < n_ops; ++i) {
    Eigen::JacobiSVD<Mat> svd(pis.operators[i], Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Subspace im(svd.matrixU().leftCols(r));
    const Subspace coim(svd.matrixV().leftCols(r));
    plus_cols.col(static_cast<Eigen::Index>(i)) = linalg::plucker(im).coords;
    coim_cols.col(static_cast<Eigen::Index>(i)) = linalg::plucker(coim).coords;
  }

  const std::vector<double> sweeps{1e-2, 1e-3, 1e-4};
  Eigen::JacobiSVD<Mat> plus_svd(plus_cols, Eigen::ComputeFullU);
  Eigen::JacobiSVD<Mat> coim_svd(coim_cols, Eigen::ComputeFullU);
  const int rank_plus = stable_rank(plus_svd.singularValues(), sweeps);
  const int rank_coim = stable_rank(coim_svd.singularValues(), sweeps);
  if (rank_plus < 0 || rank_coim < 0) {
    out.inconclusive = true;
    out.note = "rank threshold sweep unstable";
    return out;
  }

  // bootstrap resamples must reproduce the same ranks
  Rng rng(derive_seed(seed, 0xb0075));
  for (int b = 0; b < 20; ++b) {
    Mat bp(dim_total, static_cast<Eigen::Index>(n_ops));
    Mat bc(dim_total, static_cast<Eigen::Index>(n_ops));
    for (std::size_t i = 0; i < n_ops; ++i) {
      const auto j = static_cast<Eigen::Index>(rng.index(n_ops));
      bp.col(static_cast<Eigen::Index>(i)) = plus_cols.col(j);
      bc.col(static_cast<Eigen::Index>(i)) = coim_cols.col(j);
    }
    Eigen::JacobiSVD<Mat> bps(bp);
    Eigen::JacobiSVD<Mat> bcs(bc);
    if (stable_rank(bps.singularValues(), sweeps) != rank_plus ||
        stable_rank(bcs.singularValues(), sweeps) != rank_coim) {
      out.inconclusive = true;
      out.note = "rank estimate oscillates across bootstrap resamples";
      return out;
    }
  }

  out.plus_frame = plus_svd.matrixU().leftCols(rank_plus);
  out.zero_frame = coim_svd.matrixU().rightCols(dim_total - rank_coim);
  out.reducible_suspect = (r == 1 && rank_plus < dim_total);
  if (rank_plus + (dim_total - rank_coim) != dim_total)
    out.note = "split dimensions do not add up to C(d,r)";

  double worst = 0.0;
  for (std::size_t i = 0; i < mu.atom_count(); ++i) {
    const Mat t = linalg::exterior_power(mu.atom(i), r).entries;
    const double tnorm = t.operatorNorm();
    const double def_plus = (out.zero_frame.transpose() * t * out.plus_frame).norm() / tnorm;
    const double def_zero = (out.plus_frame.transpose() * t * out.zero_frame).norm() / tnorm;
    worst = std::max({worst, def_plus, def_zero});
  }
  out.residual = worst;
  return out;
}

SplitRates split_growth_rates(const GroupMeasure& mu, const LambdaSplit& split, int r, int n,
                              int trials, std::uint64_t seed, int threads) {
  if (split.inconclusive) throw std::invalid_argument("split_growth_rates: inconclusive split");
  const bool have_zero = split.zero_frame.cols() > 0;
  auto log_kappa = [](const Mat& a) {
    Eigen::JacobiSVD<Mat> svd(a);
    const auto& s = svd.singularValues();
    return std::log(s(0)) - std::log(std::max(s(s.size() - 1), 1e-300));
  };
  std::vector<Mat> plus_atoms, zero_atoms;
  std::vector<double> plus_kappa, zero_kappa;
  for (std::size_t i = 0; i < mu.atom_count(); ++i) {
    const Mat t = linalg::exterior_power(mu.atom(i), r).entries;
    plus_atoms.push_back(split.plus_frame.transpose() * t * split.plus_frame);
    plus_kappa.push_back(log_kappa(plus_atoms.back()));
    if (have_zero) {
      zero_atoms.push_back(split.zero_frame.transpose() * t * split.zero_frame);
      zero_kappa.push_back(log_kappa(zero_atoms.back()));
    }
  }
  std::vector<double> rp(static_cast<std::size_t>(trials)), rz(static_cast<std::size_t>(trials));
  parallel_trials(trials, threads, [&](int t) {
    Rng rng(derive_seed(seed, 0x5b11 ^ static_cast<std::uint64_t>(t)));
    linalg::ProductChain cp(static_cast<int>(plus_atoms.front().rows()));
    linalg::ProductChain cz(have_zero ? static_cast<int>(zero_atoms.front().rows()) : 1);
    for (int i = 0; i < n; ++i) {
      const std::size_t k = mu.sample_index(rng);
      cp.push(plus_atoms[k], plus_kappa[k]);
      if (have_zero) cz.push(zero_atoms[k], zero_kappa[k]);
    }
    rp[static_cast<std::size_t>(t)] = cp.finish().log_sigma()(0) / static_cast<double>(n);
    rz[static_cast<std::size_t>(t)] =
        have_zero ? cz.finish().log_sigma()(0) / static_cast<double>(n)
                  : -std::numeric_limits<double>::infinity();
  });
  return {mean_of(rp), mean_of(rz)};
}

std::vector<Subspace> stationary_sample(const GroupMeasure& mu, int r, int burn_in, int trials,
                                        const Subspace& start, std::uint64_t seed, int threads) {
  if (start.ambient_dim() != mu.dim() || start.dim() != r)
    throw std::invalid_argument("stationary_sample: start must be an r-plane in the walk space");
  std::vector<std::optional<Subspace>> pts(static_cast<std::size_t>(trials));
  parallel_trials(trials, threads, [&](int t) {
    const ProductSvd svd =
        sample_product_svd(mu, burn_in, derive_seed(seed, static_cast<std::uint64_t>(t)));
    pts[static_cast<std::size_t>(t)] = Subspace(svd.image_frame(start.frame()));
  });
  std::vector<Subspace> out;
  out.reserve(static_cast<std::size_t>(trials));
  for (auto& p : pts) out.push_back(std::move(*p));
  return out;
}

}  // namespace rmp::walk
