#include "rmp/torus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rmp/parallel.hpp"
#include "rmp/prng.hpp"

namespace rmp::torus {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

cpp_int gcd_all(const std::vector<cpp_int>& p, const cpp_int& q) {
  cpp_int g = q;
  for (const auto& x : p) g = boost::multiprecision::gcd(g, x);
  return g;
}

cpp_int mod_into(const cpp_int& v, const cpp_int& m) {
  cpp_int r = v % m;
  if (r < 0) r += m;
  return r;
}

// best rational approximation with bounded denominator (continued fractions)
cpp_rational to_exact_weight(double w, std::uint64_t max_den = 1'000'000) {
  if (!(w > 0.0) || !(w < 1.0 + 1e-12))
    throw std::invalid_argument("to_exact_weight: weight out of range");
  std::uint64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double x = w;
  for (int it = 0; it < 64; ++it) {
    const double fl = std::floor(x);
    const auto a = static_cast<std::uint64_t>(fl);
    if (q1 > 0 && a > (max_den - q0) / q1) break;
    const std::uint64_t p2 = a * p1 + p0;
    const std::uint64_t q2 = a * q1 + q0;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double frac = x - fl;
    if (frac < 1e-15 || std::abs(w - static_cast<double>(p1) / static_cast<double>(q1)) < 1e-15)
      break;
    x = 1.0 / frac;
  }
  return cpp_rational(cpp_int(p1), cpp_int(q1));
}

}  // namespace

TorusPoint TorusPoint::exact_rational(std::vector<cpp_int> p, cpp_int q) {
  if (q <= 0) throw std::invalid_argument("TorusPoint: denominator must be positive");
  if (p.empty()) throw std::invalid_argument("TorusPoint: empty coordinates");
  TorusPoint t;
  t.exact_ = true;
  for (auto& x : p) x = mod_into(x, q);
  const cpp_int g = gcd_all(p, q);
  if (g > 1) {
    for (auto& x : p) x /= g;
    q /= g;
  }
  t.coords_ = std::move(p);
  t.q_ = std::move(q);
  return t;
}

TorusPoint TorusPoint::fixed_from_bits(std::vector<cpp_int> x, int bits) {
  if (bits < 64 || bits > 4096) throw std::invalid_argument("TorusPoint: bits out of range");
  if (x.empty()) throw std::invalid_argument("TorusPoint: empty coordinates");
  TorusPoint t;
  t.exact_ = false;
  t.bits_ = bits;
  const cpp_int m = cpp_int(1) << bits;
  for (auto& v : x) v = mod_into(v, m);
  t.coords_ = std::move(x);
  t.eps_ = std::ldexp(1.0, -bits);
  return t;
}

TorusPoint TorusPoint::sqrt_surrogate(const std::vector<int>& radicands, int bits) {
  std::vector<cpp_int> x;
  const cpp_int one = cpp_int(1) << bits;
  for (int m : radicands) {
    if (m <= 0) throw std::invalid_argument("sqrt_surrogate: radicand must be positive");
    // floor(sqrt(m) * 2^bits) mod 2^bits
    const cpp_int v = boost::multiprecision::sqrt(cpp_int(m) << (2 * bits));
    x.push_back(v % one);
  }
  return fixed_from_bits(std::move(x), bits);
}

double TorusPoint::coordinate(int i) const {
  if (exact_) {
    return static_cast<double>(cpp_rational(coords_[static_cast<std::size_t>(i)], q_));
  }
  return std::ldexp(static_cast<double>(coords_[static_cast<std::size_t>(i)] >> (bits_ - 53)),
                    -53);
}

double TorusPoint::character_phase(const std::vector<std::int64_t>& a) const {
  if (a.size() != coords_.size())
    throw std::invalid_argument("character_phase: frequency dimension mismatch");
  cpp_int dot = 0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += cpp_int(a[i]) * coords_[i];
  if (exact_) {
    const cpp_int m = mod_into(dot, q_);
    return static_cast<double>(cpp_rational(m, q_));
  }
  const cpp_int modulus = cpp_int(1) << bits_;
  const cpp_int m = mod_into(dot, modulus);
  return std::ldexp(static_cast<double>(m >> (bits_ - 53)), -53);
}

TorusPoint TorusPoint::step(const IMat& g) const {
  const int d = dim();
  if (g.rows() != d || g.cols() != d)
    throw std::invalid_argument("TorusPoint::step: matrix dimension mismatch");
  if (!exact_ && precision_exhausted())
    throw std::runtime_error("TorusPoint::step: fixed-point error budget exhausted");
  TorusPoint out;
  out.exact_ = exact_;
  out.q_ = q_;
  out.bits_ = bits_;
  out.coords_.resize(static_cast<std::size_t>(d));
  const cpp_int modulus = exact_ ? q_ : (cpp_int(1) << bits_);
  for (int i = 0; i < d; ++i) {
    cpp_int acc = 0;
    for (int j = 0; j < d; ++j) acc += cpp_int(g(i, j)) * coords_[static_cast<std::size_t>(j)];
    out.coords_[static_cast<std::size_t>(i)] = mod_into(acc, modulus);
  }
  if (!exact_) {
    double gmax = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) gmax = std::max(gmax, std::abs(static_cast<double>(g(i, j))));
    out.eps_ = gmax * d * eps_ + std::ldexp(1.0, -bits_);
  }
  return out;
}

TorusDistribution exact_distribution(const GroupMeasure& mu, const TorusPoint& x0, int n) {
  if (!mu.integer_flag())
    throw std::invalid_argument("exact_distribution: measure must have integer atoms");
  if (!x0.exact())
    throw std::invalid_argument("exact_distribution: start must be exact rational");
  if (n < 0) throw std::invalid_argument("exact_distribution: n must be >= 0");
  const int d = x0.dim();
  if (d != mu.dim()) throw std::invalid_argument("exact_distribution: dimension mismatch");
  const cpp_int qbig = x0.denominator();
  cpp_int cap = 1;
  for (int i = 0; i < d; ++i) {
    cap *= qbig;
    if (cap > 1'000'000)
      throw std::invalid_argument(
          "exact_distribution: state space q^d exceeds 1e6; use empirical mode");
  }
  const auto q = static_cast<std::uint64_t>(qbig);

  // exact atom weights, renormalized to sum to exactly 1
  std::vector<cpp_rational> weights;
  cpp_rational total = 0;
  for (std::size_t i = 0; i < mu.atom_count(); ++i) {
    weights.push_back(to_exact_weight(mu.weight(i)));
    total += weights.back();
  }
  for (auto& w : weights) w /= total;

  auto encode = [&](const std::vector<std::uint64_t>& p) {
    std::uint64_t idx = 0;
    for (int i = d - 1; i >= 0; --i) idx = idx * q + p[static_cast<std::size_t>(i)];
    return idx;
  };

  TorusDistribution dist;
  dist.exact = true;
  dist.dim = d;
  dist.n = n;
  dist.q = q;
  {
    std::vector<std::uint64_t> p0(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i)
      p0[static_cast<std::size_t>(i)] = static_cast<std::uint64_t>(x0.coords()[static_cast<std::size_t>(i)]);
    dist.masses[encode(p0)] = 1;
  }

  std::vector<std::uint64_t> p(static_cast<std::size_t>(d)), pn(static_cast<std::size_t>(d));
  for (int s = 0; s < n; ++s) {
    std::map<std::uint64_t, cpp_rational> next;
    for (const auto& [idx, mass] : dist.masses) {
      std::uint64_t rem = idx;
      for (int i = 0; i < d; ++i) {
        p[static_cast<std::size_t>(i)] = rem % q;
        rem /= q;
      }
      for (std::size_t ai = 0; ai < mu.atom_count(); ++ai) {
        const IMat& g = mu.atom_int(ai);
        for (int i = 0; i < d; ++i) {
          std::int64_t acc = 0;
          for (int j = 0; j < d; ++j)
            acc += g(i, j) * static_cast<std::int64_t>(p[static_cast<std::size_t>(j)]);
          std::int64_t m = acc % static_cast<std::int64_t>(q);
          if (m < 0) m += static_cast<std::int64_t>(q);
          pn[static_cast<std::size_t>(i)] = static_cast<std::uint64_t>(m);
        }
        next[encode(pn)] += weights[ai] * mass;
      }
    }
    dist.masses = std::move(next);
  }
  return dist;
}

TorusDistribution empirical_distribution(const GroupMeasure& mu, const TorusPoint& x0, int n,
                                         int trials, std::uint64_t seed, int threads) {
  if (!mu.integer_flag())
    throw std::invalid_argument("empirical_distribution: measure must have integer atoms");
  if (trials < 1) throw std::invalid_argument("empirical_distribution: trials must be >= 1");
  TorusDistribution dist;
  dist.exact = false;
  dist.dim = x0.dim();
  dist.n = n;
  std::vector<std::optional<TorusPoint>> pts(static_cast<std::size_t>(trials));
  parallel_trials(trials, threads, [&](int t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    TorusPoint x = x0;
    for (int s = 0; s < n; ++s) x = x.step(mu.atom_int(mu.sample_index(rng)));
    pts[static_cast<std::size_t>(t)] = std::move(x);
  });
  dist.points.reserve(static_cast<std::size_t>(trials));
  for (auto& p : pts) dist.points.push_back(std::move(*p));
  return dist;
}

FourierReport fourier(const TorusDistribution& dist, const std::vector<std::int64_t>& a) {
  if (static_cast<int>(a.size()) != dist.dim)
    throw std::invalid_argument("fourier: frequency dimension mismatch");
  FourierReport rep;
  rep.frequency = a;
  if (dist.exact) {
    rep.exact = true;
    std::complex<double> acc(0.0, 0.0);
    const auto q = static_cast<std::int64_t>(dist.q);
    std::vector<std::int64_t> p(a.size());
    for (const auto& [idx, mass] : dist.masses) {
      std::uint64_t rem = idx;
      for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = static_cast<std::int64_t>(rem % dist.q);
        rem /= dist.q;
      }
      std::int64_t dot = 0;
      for (std::size_t i = 0; i < p.size(); ++i) dot = (dot + a[i] % q * p[i]) % q;
      if (dot < 0) dot += q;
      const double phase = kTwoPi * static_cast<double>(dot) / static_cast<double>(q);
      acc += static_cast<double>(mass) * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    rep.value = acc;
  } else {
    if (dist.points.empty()) throw std::invalid_argument("fourier: empty empirical distribution");
    std::complex<double> acc(0.0, 0.0);
    for (const auto& pt : dist.points) {
      const double phase = kTwoPi * pt.character_phase(a);
      acc += std::complex<double>(std::cos(phase), std::sin(phase));
    }
    rep.value = acc / static_cast<double>(dist.points.size());
    rep.stderr_ = 1.0 / std::sqrt(static_cast<double>(dist.points.size()));
  }
  return rep;
}

std::vector<std::vector<std::int64_t>> large_coefficient_set(const TorusDistribution& dist,
                                                             double t, int N) {
  if (!(t > 0.0)) throw std::invalid_argument("large_coefficient_set: t must be positive");
  if (N < 0) throw std::invalid_argument("large_coefficient_set: N must be >= 0");
  const int d = dist.dim;
  double grid = 1.0;
  for (int i = 0; i < d; ++i) grid *= (2.0 * N + 1.0);
  if (grid > 1e7) throw std::invalid_argument("large_coefficient_set: scan too large");
  if (!dist.exact &&
      static_cast<double>(dist.points.size()) < 100.0 / (t * t))
    throw std::invalid_argument("large_coefficient_set: too few trials for this level");

  std::vector<std::vector<std::int64_t>> out;
  std::vector<std::int64_t> a(static_cast<std::size_t>(d), -N);
  while (true) {
    if (std::abs(fourier(dist, a).value) >= t) out.push_back(a);
    int i = 0;
    while (i < d && a[static_cast<std::size_t>(i)] == N) {
      a[static_cast<std::size_t>(i)] = -N;
      ++i;
    }
    if (i == d) break;
    ++a[static_cast<std::size_t>(i)];
  }
  return out;
}

CoveringNumbers covering_number(const std::vector<Vec>& points, double M) {
  if (!(M > 0.0)) throw std::invalid_argument("covering_number: M must be positive");
  CoveringNumbers out;
  if (points.empty()) return out;
  std::vector<bool> covered(points.size(), false);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (covered[i]) continue;
    ++out.greedy_cover;
    for (std::size_t j = i; j < points.size(); ++j)
      if (!covered[j] && (points[j] - points[i]).norm() <= M) covered[j] = true;
  }
  std::vector<std::size_t> packing;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool far = true;
    for (std::size_t c : packing)
      if ((points[i] - points[c]).norm() <= 2.0 * M) {
        far = false;
        break;
      }
    if (far) packing.push_back(i);
  }
  out.separated_lower = static_cast<long>(packing.size());
  return out;
}

DichotomyReport dichotomy_experiment(const GroupMeasure& mu, const TorusPoint& x0, double t,
                                     const std::vector<int>& schedule, int N, int trials,
                                     std::uint64_t seed, int threads) {
  if (!mu.integer_flag())
    throw std::invalid_argument("dichotomy_experiment: measure must have integer atoms");
  if (schedule.empty()) throw std::invalid_argument("dichotomy_experiment: empty schedule");
  DichotomyReport rep;
  rep.schedule = schedule;

  bool use_exact = false;
  if (x0.exact()) {
    cpp_int cap = 1;
    bool small = true;
    for (int i = 0; i < x0.dim() && small; ++i) {
      cap *= x0.denominator();
      if (cap > 1'000'000) small = false;
    }
    use_exact = small;
  }
  rep.mode = use_exact ? "exact" : "empirical";

  const int d = x0.dim();
  std::map<std::vector<std::int64_t>, int> persist_count;
  for (std::size_t si = 0; si < schedule.size(); ++si) {
    const int n = schedule[si];
    TorusDistribution dist;
    try {
      dist = use_exact ? exact_distribution(mu, x0, n)
                       : empirical_distribution(mu, x0, n, trials,
                                                derive_seed(seed, 1000 + si), threads);
    } catch (const std::runtime_error& e) {
      rep.note = std::string("partial report: ") + e.what();
      rep.schedule.resize(si);
      break;
    }

    double max_nonzero = 0.0;
    std::size_t large = 0;
    std::vector<std::int64_t> a(static_cast<std::size_t>(d), -N);
    while (true) {
      const FourierReport fr = fourier(dist, a);
      DichotomyRow row;
      row.n = n;
      row.a = a;
      row.value = fr.value;
      row.abs = std::abs(fr.value);
      row.stderr_ = fr.stderr_;
      rep.rows.push_back(row);
      if (row.abs >= t) ++large;
      bool zero = true;
      for (auto c : a)
        if (c != 0) zero = false;
      if (!zero) {
        max_nonzero = std::max(max_nonzero, row.abs);
        if (row.abs > 1.0 - 1e-9) ++persist_count[a];
      }
      int i = 0;
      while (i < d && a[static_cast<std::size_t>(i)] == N) {
        a[static_cast<std::size_t>(i)] = -N;
        ++i;
      }
      if (i == d) break;
      ++a[static_cast<std::size_t>(i)];
    }
    rep.max_nonzero_abs.push_back(max_nonzero);
    rep.large_set_sizes.push_back(large);
    if (rep.decay_threshold_n < 0 && max_nonzero < t) rep.decay_threshold_n = n;
  }

  for (const auto& [a, c] : persist_count)
    if (c == static_cast<int>(rep.schedule.size())) rep.persistent_frequencies.push_back(a);
  rep.persistence_flat = !rep.persistent_frequencies.empty();
  return rep;
}

InvertibilityReport invertibility_lemma_check(const std::vector<Mat>& gs,
                                              const std::vector<double>& cs, int r) {
  const auto k = gs.size();
  if (k == 0 || cs.size() != k)
    throw std::invalid_argument("invertibility_lemma_check: need matching g and c lists");
  const int d = static_cast<int>(gs.front().rows());
  if (d != static_cast<int>(k) * r)
    throw std::invalid_argument("invertibility_lemma_check: requires d = k * r");
  for (double c : cs)
    if (c == 0.0) throw std::invalid_argument("invertibility_lemma_check: zero coefficient");

  InvertibilityReport rep;
  std::vector<linalg::CartanFrame> frames, frames_t;
  for (const Mat& g : gs) {
    frames.push_back(linalg::cartan(g, r));
    frames_t.push_back(linalg::cartan(g.transpose(), r));
  }
  rep.rho = 0.0;
  rep.l_ratio = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    rep.rho = std::max(rep.rho, frames[i].sigma(r) / frames[i].sigma(r - 1));
    for (std::size_t j = 0; j < k; ++j)
      rep.l_ratio = std::max(rep.l_ratio, frames[i].sigma(0) / frames[j].sigma(r - 1));
  }
  rep.c_ratio = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      rep.c_ratio = std::max(rep.c_ratio, std::abs(cs[i]) / std::abs(cs[j]));

  std::vector<linalg::Subspace> tops, tops_t;
  for (std::size_t i = 0; i < k; ++i) {
    tops.push_back(linalg::v_plus(frames[i]));
    tops_t.push_back(linalg::v_plus(frames_t[i]));
  }
  rep.v1 = linalg::gap_multi(tops);
  rep.v2 = linalg::gap_multi(tops_t);
  rep.v = std::min(rep.v1, rep.v2);

  const double kk = static_cast<double>(k);
  rep.hypothesis_holds =
      rep.rho < (rep.v * rep.v * rep.v) / (40.0 * kk * kk * kk * rep.c_ratio * rep.l_ratio);

  Mat h = Mat::Zero(d, d);
  for (std::size_t i = 0; i < k; ++i) h += cs[i] * gs[i];
  rep.det_h = h.determinant();
  rep.h_norm = h.operatorNorm();
  rep.h_invertible = std::abs(rep.det_h) > 1e-12 * std::pow(rep.h_norm, d);
  return rep;
}

InvertibilitySweep invertibility_sweep(int k, int d, int r, long count, std::uint64_t seed) {
  if (d != k * r) throw std::invalid_argument("invertibility_sweep: requires d = k * r");
  InvertibilitySweep sweep;
  Rng rng(seed);
  for (long it = 0; it < count; ++it) {
    std::vector<Mat> gs;
    std::vector<double> cs;
    for (int i = 0; i < k; ++i) {
      // top block near scale 1, tail far below: spread out so the hypothesis
      // holds for a sizable fraction of draws
      Vec logs(d);
      for (int j = 0; j < r; ++j) logs(j) = rng.uniform(0.0, 1.0);
      for (int j = r; j < d; ++j) logs(j) = rng.uniform(-20.0, -2.0);
      std::sort(logs.data(), logs.data() + d, std::greater<double>());
      const linalg::Subspace qu = linalg::random_subspace(d, d, rng);
      const linalg::Subspace qv = linalg::random_subspace(d, d, rng);
      Vec sig(d);
      for (int j = 0; j < d; ++j) sig(j) = std::exp(logs(j));
      gs.push_back(qu.frame() * sig.asDiagonal() * qv.frame().transpose());
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      cs.push_back(sign * rng.uniform(0.5, 2.0));
    }
    const InvertibilityReport rep = invertibility_lemma_check(gs, cs, r);
    ++sweep.total;
    if (!rep.h_invertible) ++sweep.singular_total;
    if (rep.hypothesis_holds) {
      ++sweep.hypothesis_count;
      if (!rep.h_invertible) ++sweep.singular_among_hypothesis;
    }
  }
  return sweep;
}

}  // namespace rmp::torus
