#include "rmp/deviation.hpp"

#include <cmath>
#include <stdexcept>

#include "rmp/parallel.hpp"
#include "rmp/prng.hpp"
#include "rmp/stats.hpp"

namespace rmp::deviation {

void DeviationConfig::validate() const {
  if (!(omega > 0)) throw std::invalid_argument("DeviationConfig: omega must be positive");
  if (trials < 100) throw std::invalid_argument("DeviationConfig: trials must be >= 100");
  if (l_values.empty()) throw std::invalid_argument("DeviationConfig: empty l schedule");
  for (int l : l_values)
    if (l > n) throw std::invalid_argument("DeviationConfig: l exceeds horizon n");
}

void fit_decay(DecayReport& rep, long min_hits) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < rep.l_values.size(); ++i) {
    if (rep.hits[i] >= min_hits) {
      xs.push_back(static_cast<double>(rep.l_values[i]));
      ys.push_back(-std::log(rep.p_hat[i]));
    }
  }
  const LineFit f = fit_line(xs, ys);
  rep.fitted_c = f.slope;
  rep.fit_intercept = f.intercept;
  rep.r_squared = f.r_squared;
  rep.fit_points = static_cast<int>(f.points);
}

namespace {

DecayReport counts_to_report(std::vector<int> l_values, const std::vector<long>& hits,
                             int trials) {
  DecayReport rep;
  rep.l_values = std::move(l_values);
  rep.hits = hits;
  rep.trials = trials;
  for (std::size_t i = 0; i < rep.l_values.size(); ++i) {
    rep.p_hat.push_back(static_cast<double>(hits[i]) / trials);
    const WilsonInterval w = wilson_interval(hits[i], trials);
    rep.wilson_lo.push_back(w.lo);
    rep.wilson_hi.push_back(w.hi);
  }
  fit_decay(rep);
  return rep;
}

// shared core of the two non-concentration checks: per trial produce one gap
// value, then count threshold crossings for each l
template <typename GapFn>
DecayReport nonconcentration_run(const DeviationConfig& cfg, GapFn&& gap_of_trial) {
  std::vector<double> gaps(static_cast<std::size_t>(cfg.trials));
  parallel_trials(cfg.trials, cfg.threads, [&](int t) {
    gaps[static_cast<std::size_t>(t)] = gap_of_trial(derive_seed(cfg.seed, t));
  });
  std::vector<long> hits(cfg.l_values.size(), 0);
  for (double g : gaps)
    for (std::size_t i = 0; i < cfg.l_values.size(); ++i)
      if (g <= std::exp(-cfg.omega * cfg.l_values[i])) ++hits[i];
  return counts_to_report(cfg.l_values, hits, cfg.trials);
}

}  // namespace

DecayReport verify_gap_nonconcentration(const GroupMeasure& mu, const DeviationConfig& cfg) {
  cfg.validate();
  if (!cfg.V || !cfg.W)
    throw std::invalid_argument("verify_gap_nonconcentration: needs both V and W");
  const Subspace& v = *cfg.V;
  const Subspace& w = *cfg.W;
  return nonconcentration_run(cfg, [&](std::uint64_t s) {
    const walk::ScaledMatrix p = walk::sample_product(mu, cfg.n, s);
    return linalg::gap(Subspace::span_of(p.m * v.frame()), w);
  });
}

DecayReport verify_vplus_nonconcentration(const GroupMeasure& mu, const DeviationConfig& cfg) {
  cfg.validate();
  if (!cfg.W) throw std::invalid_argument("verify_vplus_nonconcentration: needs W");
  const Subspace& w = *cfg.W;
  const int r = mu.dim() - w.dim();
  return nonconcentration_run(cfg, [&](std::uint64_t s) {
    const linalg::ProductSvd svd = walk::sample_product_svd(mu, cfg.n, s);
    return linalg::gap(Subspace(svd.matrix_u().leftCols(r)), w);
  });
}

DecayReport verify_contraction(const GroupMeasure& mu, const DeviationConfig& cfg,
                               const walk::SpectralProfile& profile, int r) {
  cfg.validate();
  if (!cfg.V) throw std::invalid_argument("verify_contraction: needs V");
  const Subspace& v = *cfg.V;
  const double lambda_gap = profile.lambda(0) - profile.lambda(r);
  if (lambda_gap <= 2.0 * (profile.stderr_(0) + profile.stderr_(r))) {
    DecayReport rep;
    rep.trials = cfg.trials;
    rep.note = "no gap, vacuous";
    return rep;
  }
  const double rate = lambda_gap - cfg.omega;
  std::vector<int> schedule = cfg.l_values;  // doubles as the n-schedule
  std::vector<std::vector<long>> hit_slots(static_cast<std::size_t>(cfg.trials));
  parallel_trials(cfg.trials, cfg.threads, [&](int t) {
    std::vector<long> mine(schedule.size(), 0);
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      const int n = schedule[i];
      const linalg::ProductSvd svd =
          walk::sample_product_svd(mu, n, derive_seed(cfg.seed, ((static_cast<std::uint64_t>(i) + 1) << 32) ^ static_cast<std::uint64_t>(t)));
      const double log_dh = svd.log_dist_to_top(v.frame(), r);
      if (log_dh <= -rate * n) mine[i] = 1;
    }
    hit_slots[static_cast<std::size_t>(t)] = std::move(mine);
  });
  std::vector<long> hits(schedule.size(), 0);
  for (const auto& mine : hit_slots)
    for (std::size_t i = 0; i < schedule.size(); ++i) hits[i] += mine[i];
  DecayReport rep = counts_to_report(schedule, hits, cfg.trials);
  rep.note = "threshold rate lambda_1 - lambda_{r+1} - omega = " + std::to_string(rate);
  return rep;
}

ContractionLemmaReport check_contraction_lemma(const Mat& g, int r, const Subspace& V,
                                               double rel_slack) {
  ContractionLemmaReport rep;
  const linalg::CartanFrame f = linalg::cartan(g, r);
  rep.lhs = linalg::hausdorff(Subspace::span_of(g * V.frame()), linalg::v_plus(f));
  const linalg::ExteriorOperator wg = linalg::exterior_power(g, r);
  const Vec image = wg.apply(linalg::plucker(V).coords);
  rep.rhs = r * std::pow(f.sigma(0), r - 1) * f.sigma(r) / image.norm();
  rep.holds = rep.lhs <= rep.rhs * (1.0 + rel_slack) + 1e-14;
  return rep;
}

LargeDeviationSuite verify_large_deviation_suite(const GroupMeasure& mu,
                                                 const DeviationConfig& cfg,
                                                 const walk::SpectralProfile& profile,
                                                 const walk::LambdaSplit* split) {
  cfg.validate();
  LargeDeviationSuite suite;
  const int d = mu.dim();

  // (i) singular values: one walk per (n, trial); event is a deviation of
  // any exponent
  {
    std::vector<std::vector<long>> slots(static_cast<std::size_t>(cfg.trials));
    parallel_trials(cfg.trials, cfg.threads, [&](int t) {
      std::vector<long> mine(cfg.l_values.size(), 0);
      for (std::size_t i = 0; i < cfg.l_values.size(); ++i) {
        const int n = cfg.l_values[i];
        const linalg::ProductSvd svd =
            walk::sample_product_svd(mu, n, derive_seed(cfg.seed, ((static_cast<std::uint64_t>(i) + 101) << 32) ^ static_cast<std::uint64_t>(t)));
        for (int k = 0; k < d; ++k) {
          if (std::abs(svd.log_sigma()(k) / n - profile.lambda(k)) >= cfg.omega) {
            mine[i] = 1;
            break;
          }
        }
      }
      slots[static_cast<std::size_t>(t)] = std::move(mine);
    });
    std::vector<long> hits(cfg.l_values.size(), 0);
    for (const auto& mine : slots)
      for (std::size_t i = 0; i < cfg.l_values.size(); ++i) hits[i] += mine[i];
    suite.singular_values = counts_to_report(cfg.l_values, hits, cfg.trials);
  }

  // (ii) vector growth for a fixed deterministic direction
  {
    Vec x = Vec::Zero(d);
    x(0) = 1.0;
    std::vector<std::vector<long>> slots(static_cast<std::size_t>(cfg.trials));
    parallel_trials(cfg.trials, cfg.threads, [&](int t) {
      std::vector<long> mine(cfg.l_values.size(), 0);
      for (std::size_t i = 0; i < cfg.l_values.size(); ++i) {
        const int n = cfg.l_values[i];
        const linalg::ProductSvd svd =
            walk::sample_product_svd(mu, n, derive_seed(cfg.seed, ((static_cast<std::uint64_t>(i) + 201) << 32) ^ static_cast<std::uint64_t>(t)));
        if (std::abs(svd.log_apply_norm(x) / n - profile.lambda(0)) >= cfg.omega) mine[i] = 1;
      }
      slots[static_cast<std::size_t>(t)] = std::move(mine);
    });
    std::vector<long> hits(cfg.l_values.size(), 0);
    for (const auto& mine : slots)
      for (std::size_t i = 0; i < cfg.l_values.size(); ++i) hits[i] += mine[i];
    suite.vector_growth = counts_to_report(cfg.l_values, hits, cfg.trials);
  }

  // (iii) alignment of the image with a fixed linear form, run either on the
  // ambient walk (proximal case) or on the plus block of the exterior power
  {
    std::vector<Mat> atoms;
    std::vector<double> kappas;
    int dim3 = 0;
    const walk::ProximalDetection det = walk::detect_proximal_dimension(profile);
    if (det.r && *det.r == 1) {
      for (std::size_t i = 0; i < mu.atom_count(); ++i) {
        atoms.push_back(mu.atom(i));
        kappas.push_back(mu.atom_log_kappa(i));
      }
      dim3 = d;
      suite.form_note = "direct (proximal walk)";
    } else if (split != nullptr && !split->inconclusive && split->plus_frame.cols() > 0) {
      const int r = det.r ? *det.r : 0;
      if (r == 0) {
        suite.form_note = "skipped: proximal dimension inconclusive";
      } else {
        for (std::size_t i = 0; i < mu.atom_count(); ++i) {
          const Mat t = linalg::exterior_power(mu.atom(i), r).entries;
          atoms.push_back(split->plus_frame.transpose() * t * split->plus_frame);
          Eigen::JacobiSVD<Mat> svd(atoms.back());
          const auto& s = svd.singularValues();
          kappas.push_back(std::log(s(0)) - std::log(std::max(s(s.size() - 1), 1e-300)));
        }
        dim3 = static_cast<int>(split->plus_frame.cols());
        suite.form_note = "on the invariant plus block of the exterior power";
      }
    } else {
      suite.form_note = "skipped: non-proximal walk and no invariant split supplied";
    }
    if (!atoms.empty()) {
      Rng dir_rng(derive_seed(cfg.seed, 0xf0f0));
      Vec x = linalg::random_gaussian_matrix(dim3, 1, dir_rng).col(0).normalized();
      Vec f = linalg::random_gaussian_matrix(dim3, 1, dir_rng).col(0).normalized();
      std::vector<double> log_ratios(static_cast<std::size_t>(cfg.trials));
      parallel_trials(cfg.trials, cfg.threads, [&](int t) {
        Rng rng(derive_seed(cfg.seed, (301ULL << 32) ^ static_cast<std::uint64_t>(t)));
        linalg::ProductChain chain(dim3);
        for (int i = 0; i < cfg.n; ++i) {
          const std::size_t k = mu.sample_index(rng);
          chain.push(atoms[k], kappas[k]);
        }
        const linalg::ProductSvd& svd = chain.finish();
        // log |f(gx)| - log ||gx||  (||f|| = 1)
        log_ratios[static_cast<std::size_t>(t)] =
            svd.log_form_value(f, x) - svd.log_apply_norm(x);
      });
      std::vector<long> hits(cfg.l_values.size(), 0);
      for (double lr : log_ratios)
        for (std::size_t i = 0; i < cfg.l_values.size(); ++i)
          if (lr <= -cfg.omega * cfg.l_values[i]) ++hits[i];
      suite.form_alignment = counts_to_report(cfg.l_values, hits, cfg.trials);
    }
  }
  return suite;
}

HolderReport verify_holder_regularity(const std::vector<Subspace>& points,
                                      const std::vector<Subspace>& w_probes,
                                      const std::vector<double>& rho_grid) {
  if (points.size() < 2000)
    throw std::invalid_argument("verify_holder_regularity: need at least 2000 samples");
  if (w_probes.empty() || rho_grid.empty())
    throw std::invalid_argument("verify_holder_regularity: need probes and a rho grid");
  for (double rho : rho_grid)
    if (rho < 1e-4 || rho > 0.5)
      throw std::invalid_argument("verify_holder_regularity: rho grid must lie in [1e-4, 0.5]");

  HolderReport rep;
  for (int i = 1; i <= 20; ++i) rep.kappa_grid.push_back(0.05 * i);

  const auto t_count = static_cast<long>(points.size());
  std::vector<std::vector<double>> gaps(w_probes.size());
  for (std::size_t p = 0; p < w_probes.size(); ++p) {
    gaps[p].reserve(points.size());
    for (const auto& v : points) gaps[p].push_back(linalg::gap(v, w_probes[p]));
  }

  double best_kappa = 0.0;
  for (double kappa : rep.kappa_grid) {
    bool ok = true;
    for (std::size_t p = 0; p < w_probes.size() && ok; ++p) {
      for (double rho : rho_grid) {
        long hits = 0;
        for (double g : gaps[p])
          if (g <= rho) ++hits;
        if (wilson_interval(hits, t_count).hi > std::pow(rho, kappa)) {
          ok = false;
          break;
        }
      }
    }
    if (ok)
      best_kappa = kappa;
    else
      break;
  }
  rep.kappa_hat = best_kappa;

  if (best_kappa > 0) {
    double worst = 0.0;
    for (std::size_t p = 0; p < w_probes.size(); ++p) {
      double acc = 0.0;
      for (double g : gaps[p]) acc += std::pow(std::max(g, 1e-300), -best_kappa);
      worst = std::max(worst, acc / static_cast<double>(t_count));
    }
    rep.moment_value = worst;
  } else {
    rep.note = "regularity fails at every grid kappa";
    rep.moment_value = 1.0;  // gap^0
  }
  return rep;
}

}  // namespace rmp::deviation
