// Deterministic numerical linear algebra: SVD frames, exterior powers,
// Plucker coordinates and the transversality gap / subspace metrics that the
// random-walk experiments consume.  Everything here is a pure function on
// immutable values.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "rmp/prng.hpp"

namespace rmp::linalg {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using IMat = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// Orthonormality tolerance for subspace frames.
inline constexpr double kFrameTol = 1e-10;
// A subspace intersection is declared nontrivial below this gap value.
inline constexpr double kRankTol = 1e-10;

std::uint64_t binomial(int n, int k);

// Lexicographically ordered k-element subsets of {0,...,d-1}.
std::vector<std::vector<int>> k_subsets(int d, int k);

// A k-dimensional subspace of R^d stored as an orthonormal frame.
class Subspace {
 public:
  // frame must have orthonormal columns within kFrameTol.
  explicit Subspace(Mat frame);

  // Orthonormalizes the columns (which must be full rank) and wraps them.
  static Subspace span_of(const Mat& vectors);

  int ambient_dim() const { return static_cast<int>(frame_.rows()); }
  int dim() const { return static_cast<int>(frame_.cols()); }
  const Mat& frame() const { return frame_; }

 private:
  Mat frame_;
};

// Rank-revealing span of an arbitrary set of column vectors; columns whose
// residual falls below tol * leading are dropped.
Subspace span_of_union(const std::vector<Subspace>& parts, double tol = 1e-9);

// Haar-ish random k-plane (orthonormalized Gaussian frame).
Subspace random_subspace(int d, int k, Rng& rng);
Mat random_gaussian_matrix(int rows, int cols, Rng& rng);

// SVD written multiplicatively: g = left * diag(sigma) * right with
// left, right orthogonal and sigma nonincreasing.  r marks where the
// top/bottom singular subspaces are cut.
struct CartanFrame {
  Vec sigma;
  Mat left;    // the "k" factor
  Mat right;   // the "l" factor
  int r = 1;
  bool degenerate = false;  // sigma_r == sigma_{r+1} within tolerance

  Mat reconstruct() const { return left * sigma.asDiagonal() * right; }
};

// Throws std::invalid_argument on non-finite entries, singular g, or r out
// of range (1 <= r < d).
CartanFrame cartan(const Mat& g, int r);

Subspace v_plus(const CartanFrame& f);   // top-r left singular subspace
Subspace v_minus(const CartanFrame& f);  // bottom-(d-r) right singular subspace

// Transversality gap: norm of the wedge of the two orthonormal frames.
// 0 iff the subspaces intersect, 1 iff they are orthogonal.
// Requires dim V + dim W <= d.
double gap(const Subspace& V, const Subspace& W);

// Multi-subspace gap: normalized volume of the concatenated frames.
// Requires sum of dims <= d.
double gap_multi(const std::vector<Subspace>& subspaces);

// Telescoping form prod_j gap(V_j, V_1 + ... + V_{j-1}); agrees with
// gap_multi within roundoff and is kept as an independent evaluation route.
double gap_multi_telescoping(const std::vector<Subspace>& subspaces);

// Hausdorff distance between unit balls = sine of the largest principal
// angle.  Requires equal dimensions.
double hausdorff(const Subspace& V, const Subspace& V2);

// Unit Plucker vector of a subspace: the r x r minors of its frame over
// lexicographic row subsets, sign-fixed so the first nonzero coordinate is
// positive.
struct PluckerVector {
  int d = 0;
  int r = 0;
  Vec coords;  // length C(d,r), unit norm
};

PluckerVector plucker(const Subspace& V);

// k-th compound matrix: entry (I,J) is the k x k minor det g[I,J] over
// lexicographic k-subsets.
struct ExteriorOperator {
  int d = 0;
  int k = 0;
  Mat entries;  // C(d,k) x C(d,k)

  Vec apply(const Vec& plucker_coords) const { return entries * plucker_coords; }
};

ExteriorOperator exterior_power(const Mat& g, int k);

// Exact integer compound matrix (k <= 3).
IMat exterior_power_int(const IMat& g, int k);

// Both sides of the singular-value / gap inequalities relating ||gx||/||x||
// to the Cartan data of g at rank r.
struct VectorInequalityReport {
  double ratio = 0;          // ||gx|| / ||x||
  double gap_x_vminus = 0;   // gap(line x, V^-_g)
  double lower = 0;          // sigma_r * gap(x, V^-)
  double upper = 0;          // sigma_1 * gap(x, V^-) + sigma_{r+1}
  double product_lhs = 0;    // gap(x, V^-) * gap(gx, V^+)
  double product_rhs = 0;    // sigma_{r+1} / sigma_r
  bool ratio_bounds_hold = false;
  bool product_bound_holds = false;
};

// Throws on x == 0.  Slack is relative.
VectorInequalityReport check_vector_inequalities(const Mat& g, int r, const Vec& x,
                                                 double rel_slack = 1e-8);

}  // namespace rmp::linalg
