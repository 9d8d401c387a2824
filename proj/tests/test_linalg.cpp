#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracle_helpers.hpp"
#include "rmp/linalg.hpp"
#include "rmp/prng.hpp"

using namespace rmp::linalg;
using rmp::Rng;

namespace {

Subspace axis_span(int d, std::initializer_list<int> axes) {
  Mat f = Mat::Zero(d, static_cast<Eigen::Index>(axes.size()));
  int c = 0;
  for (int a : axes) f(a, c++) = 1.0;
  return Subspace(f);
}

Mat random_entries(int d, Rng& rng) {
  Mat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  return m;
}

}  // namespace

TEST_CASE("cartan: identity and diagonal cases") {
  const CartanFrame id = cartan(Mat::Identity(3, 3), 1);
  CHECK(id.sigma.isApproxToConstant(1.0, 1e-14));
  CHECK((id.reconstruct() - Mat::Identity(3, 3)).norm() < 1e-12);
  CHECK(id.degenerate);

  Mat d3(3, 3);
  d3.setZero();
  d3.diagonal() << 3, 2, 1;
  const CartanFrame f = cartan(d3, 1);
  CHECK(f.sigma(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(f.sigma(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(f.sigma(2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_FALSE(f.degenerate);
  CHECK((f.reconstruct() - d3).norm() < 1e-12);
}

TEST_CASE("cartan: random reconstruction residual") {
  Rng rng(42);
  for (int rep = 0; rep < 20; ++rep) {
    const Mat g = random_entries(4, rng);
    const CartanFrame f = cartan(g, 2);
    CHECK((f.reconstruct() - g).norm() < 1e-8 * f.sigma(0));
    // frames orthogonal
    CHECK((f.left * f.left.transpose() - Mat::Identity(4, 4)).norm() < 1e-12);
    CHECK((f.right * f.right.transpose() - Mat::Identity(4, 4)).norm() < 1e-12);
  }
}

TEST_CASE("cartan: rejects bad input") {
  CHECK_THROWS_AS(cartan(Mat::Zero(3, 3), 1), std::invalid_argument);
  Mat nan3 = Mat::Identity(3, 3);
  nan3(1, 1) = std::nan("");
  CHECK_THROWS_AS(cartan(nan3, 1), std::invalid_argument);
  CHECK_THROWS_AS(cartan(Mat::Identity(3, 3), 0), std::invalid_argument);
  CHECK_THROWS_AS(cartan(Mat::Identity(3, 3), 3), std::invalid_argument);
  Mat sing(2, 2);
  sing << 1, 1, 1, 1;
  CHECK_THROWS_WITH_AS(cartan(sing, 1), doctest::Contains("non-invertible"),
                       std::invalid_argument);
}

TEST_CASE("v_plus / v_minus on diagonal matrices") {
  Mat d3 = Mat::Zero(3, 3);
  d3.diagonal() << 3, 2, 1;
  const CartanFrame f = cartan(d3, 1);
  CHECK(gap(v_plus(f), axis_span(3, {1, 2})) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(hausdorff(v_plus(f), axis_span(3, {0})) < 1e-12);
  CHECK(hausdorff(v_minus(f), axis_span(3, {1, 2})) < 1e-12);

  Mat d55 = Mat::Zero(3, 3);
  d55.diagonal() << 5, 5, 1;
  const CartanFrame f2 = cartan(d55, 2);
  CHECK(hausdorff(v_plus(f2), axis_span(3, {0, 1})) < 1e-12);
  CHECK(f2.degenerate == false);

  // orthogonal matrix: all singular values equal, flagged degenerate
  Mat rot(2, 2);
  const double th = 0.7;
  rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  CHECK(cartan(rot, 1).degenerate);
}

TEST_CASE("gap: closed forms") {
  CHECK(gap(axis_span(2, {0}), axis_span(2, {1})) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gap(axis_span(2, {0}), axis_span(2, {0})) < 1e-12);
  Mat diag_line(2, 1);
  diag_line << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  CHECK(gap(Subspace(diag_line), axis_span(2, {1})) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_WITH_AS(gap(axis_span(3, {0, 1}), axis_span(3, {1, 2})),
                       doctest::Contains("overfull"), std::invalid_argument);
}

TEST_CASE("gap matches the wedge-norm oracle") {
  Rng rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    const int d = 5;
    const Subspace v = random_subspace(d, 2, rng);
    const Subspace w = random_subspace(d, 2, rng);
    std::vector<Vec> vecs{v.frame().col(0), v.frame().col(1), w.frame().col(0), w.frame().col(1)};
    const double expected = oracle::wedge_coords(vecs).norm();
    CHECK(gap(v, w) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("gap_multi: examples and telescoping") {
  CHECK(gap_multi({axis_span(3, {0}), axis_span(3, {1}), axis_span(3, {2})}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  Mat diag_line(3, 1);
  diag_line << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;
  CHECK(gap_multi({axis_span(3, {0}), Subspace(diag_line)}) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(gap_multi({axis_span(3, {0}), axis_span(3, {0})}) < 1e-12);

  Rng rng(11);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<Subspace> parts{random_subspace(6, 2, rng), random_subspace(6, 1, rng),
                                random_subspace(6, 2, rng)};
    CHECK(gap_multi(parts) == doctest::Approx(gap_multi_telescoping(parts)).epsilon(1e-8));
  }
}

TEST_CASE("hausdorff: examples and grid oracle") {
  CHECK(hausdorff(axis_span(3, {0, 1}), axis_span(3, {0, 1})) < 1e-12);
  CHECK(hausdorff(axis_span(2, {0}), axis_span(2, {1})) == doctest::Approx(1.0).epsilon(1e-12));
  Mat diag_line(2, 1);
  diag_line << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  CHECK(hausdorff(axis_span(2, {0}), Subspace(diag_line)) ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(hausdorff(axis_span(3, {0}), axis_span(3, {1, 2})), std::invalid_argument);

  Rng rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    const Subspace v = random_subspace(4, 2, rng);
    const Subspace w = random_subspace(4, 2, rng);
    CHECK(hausdorff(v, w) ==
          doctest::Approx(oracle::hausdorff_grid(v.frame(), w.frame())).epsilon(1e-6));
  }
}

TEST_CASE("exterior_power: identities") {
  Rng rng(17);
  const Mat g = random_entries(3, rng);
  CHECK((exterior_power(g, 1).entries - g).norm() < 1e-14);
  const ExteriorOperator top = exterior_power(g, 3);
  CHECK(top.entries.rows() == 1);
  CHECK(top.entries(0, 0) == doctest::Approx(oracle::cofactor_det(g)).epsilon(1e-12));

  Mat d235 = Mat::Zero(3, 3);
  d235.diagonal() << 2, 3, 5;
  const Mat e2 = exterior_power(d235, 2).entries;
  Mat expect = Mat::Zero(3, 3);
  expect.diagonal() << 6, 10, 15;  // basis order {12, 13, 23}
  CHECK((e2 - expect).norm() < 1e-12);
  CHECK_THROWS_AS(exterior_power(d235, 4), std::invalid_argument);
}

TEST_CASE("exterior_power: functoriality sample") {
  Rng rng(19);
  for (int rep = 0; rep < 10; ++rep) {
    const Mat a = random_entries(5, rng);
    const Mat b = random_entries(5, rng);
    for (int k = 1; k <= 5; ++k) {
      const Mat lhs = exterior_power(a * b, k).entries;
      const Mat ea = exterior_power(a, k).entries;
      const Mat eb = exterior_power(b, k).entries;
      CHECK((lhs - ea * eb).norm() <= 1e-9 * ea.norm() * eb.norm());
    }
  }
}

TEST_CASE("plucker: examples, sign and frame independence") {
  const PluckerVector p12 = plucker(axis_span(3, {0, 1}));
  CHECK(p12.coords(0) == doctest::Approx(1.0));
  CHECK(std::abs(p12.coords(1)) < 1e-14);
  CHECK(std::abs(p12.coords(2)) < 1e-14);
  const PluckerVector p23 = plucker(axis_span(3, {1, 2}));
  CHECK(p23.coords(2) == doctest::Approx(1.0));

  Rng rng(23);
  const Subspace v = random_subspace(4, 2, rng);
  const PluckerVector pv = plucker(v);
  CHECK(pv.coords.norm() == doctest::Approx(1.0).epsilon(1e-12));
  // coordinates match 2x2 minors of the frame
  const Vec direct = oracle::wedge_coords({v.frame().col(0), v.frame().col(1)});
  const double flip = (direct.dot(pv.coords) < 0) ? -1.0 : 1.0;
  CHECK((pv.coords - flip * direct).norm() < 1e-10);

  // a rotated basis of the same plane gives the same vector
  Mat rot(2, 2);
  rot << std::cos(0.9), -std::sin(0.9), std::sin(0.9), std::cos(0.9);
  const Subspace v2 = Subspace(v.frame() * rot);
  CHECK((plucker(v2).coords - pv.coords).norm() < 1e-10);
}

TEST_CASE("check_vector_inequalities: axis cases and random sweep") {
  Mat d31 = Mat::Zero(2, 2);
  d31.diagonal() << 3, 1;
  Vec e1 = Vec::Zero(2);
  e1(0) = 1;
  const auto rep1 = check_vector_inequalities(d31, 1, e1);
  CHECK(rep1.gap_x_vminus == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep1.ratio == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(rep1.lower == doctest::Approx(3.0).epsilon(1e-12));  // equality case
  CHECK(rep1.ratio_bounds_hold);
  CHECK(rep1.product_bound_holds);

  Vec e2 = Vec::Zero(2);
  e2(1) = 1;
  const auto rep2 = check_vector_inequalities(d31, 1, e2);
  CHECK(rep2.gap_x_vminus < 1e-12);
  CHECK(rep2.ratio_bounds_hold);

  CHECK_THROWS_AS(check_vector_inequalities(d31, 1, Vec::Zero(2)), std::invalid_argument);

  Rng rng(29);
  int held = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const Mat g = random_entries(4, rng);
    Vec x(4);
    for (int i = 0; i < 4; ++i) x(i) = rng.gaussian();
    const auto r = check_vector_inequalities(g, 2, x);
    if (r.ratio_bounds_hold && r.product_bound_holds) ++held;
  }
  CHECK(held == 100);
}

TEST_CASE("gap Lipschitz bound against hausdorff") {
  Rng rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    const int d = 5, r = 2;
    const Subspace v = random_subspace(d, r, rng);
    const Subspace w = random_subspace(d, d - r, rng);
    // a nearby perturbation of v
    Mat pert = v.frame() + 0.05 * random_gaussian_matrix(d, r, rng);
    const Subspace v2 = Subspace::span_of(pert);
    const double lhs = std::abs(gap(v, w) - gap(v2, w));
    CHECK(lhs <= 2.0 * r * hausdorff(v, v2) + 1e-12);
  }
}

TEST_CASE("multi-gap perturbation bound for line tuples") {
  Rng rng(37);
  for (int rep = 0; rep < 200; ++rep) {
    const int d = 5, l = 3;
    std::vector<Subspace> xs, ys;
    for (int i = 0; i < l; ++i) {
      const Subspace x = random_subspace(d, 1, rng);
      Mat pert = x.frame() + 0.1 * random_gaussian_matrix(d, 1, rng);
      xs.push_back(x);
      ys.push_back(Subspace::span_of(pert));
    }
    double sum_gaps = 0.0;
    for (int i = 0; i < l; ++i) sum_gaps += gap(xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(i)]);
    CHECK(std::abs(gap_multi(xs) - gap_multi(ys)) <= 2.0 * sum_gaps + 1e-12);
  }
}

TEST_CASE("subspace validation") {
  Mat bad(3, 2);
  bad << 1, 1, 0, 1, 0, 0;
  CHECK_THROWS_AS((void)Subspace{bad}, std::invalid_argument);
  CHECK_NOTHROW(Subspace::span_of(bad));
  Mat rank_deficient(3, 2);
  rank_deficient << 1, 2, 0, 0, 0, 0;
  CHECK_THROWS_AS(Subspace::span_of(rank_deficient), std::invalid_argument);
}
