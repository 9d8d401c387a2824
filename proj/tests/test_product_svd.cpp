#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rmp/groups.hpp"
#include "rmp/prng.hpp"
#include "rmp/product_svd.hpp"
#include "rmp/walk.hpp"

using namespace rmp::linalg;
using rmp::Rng;

namespace {

Mat random_entries(int d, Rng& rng) {
  Mat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  return m;
}

}  // namespace

TEST_CASE("identity and exact diagonal powers") {
  ProductSvd svd(3);
  CHECK(svd.log_sigma().norm() == 0.0);

  Mat d = Mat::Zero(2, 2);
  d.diagonal() << 2.0, 0.5;
  ProductSvd chain(2);
  for (int i = 0; i < 50; ++i) chain.update(d);
  CHECK(chain.log_sigma()(0) == doctest::Approx(50 * std::log(2.0)).epsilon(1e-13));
  CHECK(chain.log_sigma()(1) == doctest::Approx(-50 * std::log(2.0)).epsilon(1e-13));
}

TEST_CASE("agrees with a direct SVD on moderate products") {
  Rng rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const int d = 5;
    ProductSvd chain(d);
    Mat product = Mat::Identity(d, d);
    for (int i = 0; i < 12; ++i) {
      const Mat a = random_entries(d, rng) + 2.0 * Mat::Identity(d, d);
      chain.update(a);
      product = a * product;
    }
    Eigen::JacobiSVD<Mat> direct(product, Eigen::ComputeFullU);
    for (int k = 0; k < d; ++k) {
      CHECK(chain.log_sigma()(k) ==
            doctest::Approx(std::log(direct.singularValues()(k))).epsilon(1e-9));
    }
    // left singular subspaces agree where the spectrum separates
    double best_gap = 0.0;
    int best_r = 1;
    for (int r = 1; r < d; ++r) {
      const double g = chain.log_sigma()(r - 1) - chain.log_sigma()(r);
      if (g > best_gap) {
        best_gap = g;
        best_r = r;
      }
    }
    if (best_gap > 0.5) {
      const Subspace ours(chain.matrix_u().leftCols(best_r));
      const Subspace theirs(direct.matrixU().leftCols(best_r));
      CHECK(hausdorff(ours, theirs) < 1e-8);
    }
  }
}

TEST_CASE("ProductChain batching matches per-step updates") {
  Rng rng(6);
  const int d = 4;
  std::vector<Mat> atoms;
  for (int i = 0; i < 30; ++i) atoms.push_back(random_entries(d, rng) + 1.5 * Mat::Identity(d, d));
  ProductSvd stepwise(d);
  ProductChain batched(d);
  for (const Mat& a : atoms) {
    stepwise.update(a);
    Eigen::JacobiSVD<Mat> svd(a);
    batched.push(a, std::log(svd.singularValues()(0) / svd.singularValues()(d - 1)));
  }
  const ProductSvd& b = batched.finish();
  CHECK((stepwise.log_sigma() - b.log_sigma()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("determinant conservation over long unimodular products") {
  const auto mu = rmp::groups::preset("sl2z");
  const ProductSvd svd = rmp::walk::sample_product_svd(mu, 400, 99);
  // det = +-1 throughout, so the log singular values must cancel exactly
  CHECK(std::abs(svd.log_sigma().sum()) < 1e-8);
  CHECK(svd.log_sigma()(0) > 100.0);  // far beyond double range as a plain product
}

TEST_CASE("log_apply_norm and log_form_value match direct evaluation") {
  Rng rng(8);
  const int d = 4;
  ProductSvd chain(d);
  Mat product = Mat::Identity(d, d);
  for (int i = 0; i < 10; ++i) {
    const Mat a = random_entries(d, rng) + 2.0 * Mat::Identity(d, d);
    chain.update(a);
    product = a * product;
  }
  for (int rep = 0; rep < 10; ++rep) {
    Vec x(d), f(d);
    for (int i = 0; i < d; ++i) {
      x(i) = rng.gaussian();
      f(i) = rng.gaussian();
    }
    CHECK(chain.log_apply_norm(x) == doctest::Approx(std::log((product * x).norm())).epsilon(1e-9));
    CHECK(chain.log_form_value(f, x) ==
          doctest::Approx(std::log(std::abs(f.dot(product * x)))).epsilon(1e-7));
  }
}

TEST_CASE("image_frame matches direct orthonormalization") {
  Rng rng(9);
  const int d = 5, r = 2;
  ProductSvd chain(d);
  Mat product = Mat::Identity(d, d);
  for (int i = 0; i < 8; ++i) {
    const Mat a = random_entries(d, rng) + 2.0 * Mat::Identity(d, d);
    chain.update(a);
    product = a * product;
  }
  const Subspace s = random_subspace(d, r, rng);
  const Subspace direct = Subspace::span_of(product * s.frame());
  const Subspace ours(chain.image_frame(s.frame()));
  CHECK(hausdorff(direct, ours) < 1e-9);
}

TEST_CASE("log_dist_to_top matches hausdorff in the representable regime") {
  Rng rng(10);
  const int d = 4, r = 1;
  for (int rep = 0; rep < 10; ++rep) {
    ProductSvd chain(d);
    Mat product = Mat::Identity(d, d);
    for (int i = 0; i < 6; ++i) {
      const Mat a = random_entries(d, rng) + 2.5 * Mat::Identity(d, d);
      chain.update(a);
      product = a * product;
    }
    const Subspace s = random_subspace(d, r, rng);
    const Subspace image = Subspace::span_of(product * s.frame());
    const Subspace top(chain.matrix_u().leftCols(r));
    const double direct = hausdorff(image, top);
    if (direct > 1e-12) {
      CHECK(chain.log_dist_to_top(s.frame(), r) ==
            doctest::Approx(std::log(direct)).epsilon(1e-6));
    }
  }
}

TEST_CASE("log_dist_to_top resolves distances far below double range") {
  // Dirac at diag(3, 2, 1): gV converges to e1 at rate (2/3)^n; the log
  // distance must track n log(2/3) long after doubles would underflow
  Mat d3 = Mat::Zero(3, 3);
  d3.diagonal() << 3, 2, 1;
  Mat start(3, 1);
  start << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;
  ProductSvd chain(3);
  const int n = 3000;
  for (int i = 0; i < n; ++i) chain.update(d3);
  const double expected = n * std::log(2.0 / 3.0);  // tangent slope in log scale
  const double got = chain.log_dist_to_top(start, 1);
  CHECK(got == doctest::Approx(expected).epsilon(1e-6));
}
