// Test-only oracles, kept independent of the library's computation paths:
// cofactor determinants instead of LU, explicit wedge coordinates, grid
// search instead of principal angles, exhaustive set cover, and brute-force
// walk enumeration.
#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <map>
#include <vector>

#include "rmp/linalg.hpp"

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// determinant by cofactor expansion (exponential, n <= 8)
inline double cofactor_det(const Mat& m) {
  const int n = static_cast<int>(m.rows());
  if (n == 1) return m(0, 0);
  double acc = 0.0;
  double sign = 1.0;
  for (int j = 0; j < n; ++j) {
    Mat minor(n - 1, n - 1);
    for (int r = 1; r < n; ++r) {
      int cc = 0;
      for (int c = 0; c < n; ++c) {
        if (c == j) continue;
        minor(r - 1, cc++) = m(r, c);
      }
    }
    acc += sign * m(0, j) * cofactor_det(minor);
    sign = -sign;
  }
  return acc;
}

// coordinates of v_1 ^ ... ^ v_k over lexicographic k-subsets
inline Vec wedge_coords(const std::vector<Vec>& vs) {
  const int d = static_cast<int>(vs.front().size());
  const int k = static_cast<int>(vs.size());
  const auto subsets = rmp::linalg::k_subsets(d, k);
  Vec out(static_cast<Eigen::Index>(subsets.size()));
  for (std::size_t idx = 0; idx < subsets.size(); ++idx) {
    Mat minor(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) minor(i, j) = vs[static_cast<std::size_t>(j)](subsets[idx][static_cast<std::size_t>(i)]);
    out(static_cast<Eigen::Index>(idx)) = cofactor_det(minor);
  }
  return out;
}

// max over unit vectors of V of the distance to V2, by grid + refinement
// (supports dim V in {1, 2})
inline double hausdorff_grid(const Mat& v_frame, const Mat& v2_frame) {
  const auto dist_to_v2 = [&](const Vec& x) {
    const Vec proj = v2_frame * (v2_frame.transpose() * x);
    return (x - proj).norm();
  };
  if (v_frame.cols() == 1) return dist_to_v2(v_frame.col(0));
  auto at = [&](double theta) {
    return dist_to_v2(std::cos(theta) * v_frame.col(0) + std::sin(theta) * v_frame.col(1));
  };
  double best_theta = 0.0, best = -1.0;
  const int grid = 2000;
  for (int i = 0; i < grid; ++i) {
    const double theta = M_PI * i / grid;
    const double v = at(theta);
    if (v > best) {
      best = v;
      best_theta = theta;
    }
  }
  double lo = best_theta - M_PI / grid, hi = best_theta + M_PI / grid;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if (at(m1) < at(m2))
      lo = m1;
    else
      hi = m2;
  }
  return at(0.5 * (lo + hi));
}

// exact minimal number of radius-M balls centered at the points needed to
// cover them (n <= 20; exponential set cover)
inline int exhaustive_min_cover(const std::vector<Vec>& pts, double M) {
  const int n = static_cast<int>(pts.size());
  std::vector<unsigned> ball(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if ((pts[static_cast<std::size_t>(i)] - pts[static_cast<std::size_t>(j)]).norm() <= M)
        ball[static_cast<std::size_t>(i)] |= 1u << j;
  const unsigned full = (n == 32) ? ~0u : ((1u << n) - 1);
  // breadth over cover sizes
  for (int size = 1; size <= n; ++size) {
    std::vector<int> pick(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) pick[static_cast<std::size_t>(i)] = i;
    while (true) {
      unsigned covered = 0;
      for (int i : pick) covered |= ball[static_cast<std::size_t>(i)];
      if (covered == full) return size;
      int i = size - 1;
      while (i >= 0 && pick[static_cast<std::size_t>(i)] == n - size + i) --i;
      if (i < 0) break;
      ++pick[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < size; ++j)
        pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return n;
}

// all length-n atom sequences of the walk applied to p/q, exact masses
using Rational = boost::multiprecision::cpp_rational;

inline std::map<std::vector<std::int64_t>, Rational> brute_force_torus(
    const std::vector<rmp::linalg::IMat>& atoms, const std::vector<Rational>& weights,
    std::vector<std::int64_t> p, std::int64_t q, int n) {
  std::map<std::vector<std::int64_t>, Rational> dist;
  dist[p] = 1;
  for (int s = 0; s < n; ++s) {
    std::map<std::vector<std::int64_t>, Rational> next;
    for (const auto& [pt, mass] : dist) {
      for (std::size_t a = 0; a < atoms.size(); ++a) {
        std::vector<std::int64_t> im(pt.size());
        for (std::size_t i = 0; i < pt.size(); ++i) {
          std::int64_t acc = 0;
          for (std::size_t j = 0; j < pt.size(); ++j)
            acc += atoms[a](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * pt[j];
          acc %= q;
          if (acc < 0) acc += q;
          im[i] = acc;
        }
        next[im] += weights[a] * mass;
      }
    }
    dist = std::move(next);
  }
  return dist;
}

}  // namespace oracle
