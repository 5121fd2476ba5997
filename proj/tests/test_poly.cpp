#include <algorithm>
#include <cmath>

#include "smdiff/poly.hpp"
#include "support.hpp"

using namespace smdiff;

TEST_SUITE("poly") {

TEST_CASE("coeffs_from_roots on hand examples") {
  const RealPolynomial a = coeffs_from_roots(RootSet({1.0, 2.0}));
  REQUIRE(a.degree() == 2);
  CHECK(a[0] == doctest::Approx(2.0));
  CHECK(a[1] == doctest::Approx(-3.0));
  CHECK(a[2] == 1.0);

  const double s = std::sqrt(3.0) / 2.0;
  const RealPolynomial b = coeffs_from_roots(RootSet({{-0.5, s}, {-0.5, -s}}));
  CHECK(b[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(b[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(b.is_monic());

  const RealPolynomial empty = coeffs_from_roots(RootSet{});
  CHECK(empty.degree() == 0);
  CHECK(empty[0] == 1.0);
}

TEST_CASE("coeffs_from_roots rejects unpaired complex roots") {
  CHECK_CODE(coeffs_from_roots(RootSet({{1.0, 1.0}, {2.0, 0.0}})), ErrorCode::NotConjugateClosed);
  CHECK_CODE(coeffs_from_roots(RootSet({{1.0, 1.0}, {1.0, 1.0}})), ErrorCode::NotConjugateClosed);
}

TEST_CASE("coeffs_from_roots matches an independent complex product") {
  for (int trial = 0; trial < 200; ++trial) {
    const int count = 1 + static_cast<int>(testing::uniform(0.0, 8.0));
    const RootSet r = testing::random_disc_roots(count, 3.0);
    const RealPolynomial p = coeffs_from_roots(r);
    const auto ref = testing::naive_poly(r);
    for (int j = 0; j <= p.degree(); ++j) {
      CHECK(std::abs(p[j] - ref[static_cast<std::size_t>(j)].real()) < 1e-12 * (1.0 + std::abs(ref[static_cast<std::size_t>(j)])));
    }
  }
}

TEST_CASE("roots of b^2 + b + 1") {
  const RootSet r = roots_from_coeffs(RealPolynomial({1.0, 1.0, 1.0}));
  REQUIRE(r.size() == 2);
  CHECK(r[0].real() == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(std::abs(r[0].imag()) == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
  CHECK(r[0] == std::conj(r[1]));
  CHECK(r.is_conjugate_closed());
}

TEST_CASE("exact zero roots and sorting") {
  const RootSet r = roots_from_coeffs(RealPolynomial({0.0, -1.0, 0.0, 1.0}));
  REQUIRE(r.size() == 3);
  CHECK(r[0].real() == doctest::Approx(-1.0));
  CHECK(r[1] == Complex(0.0, 0.0));
  CHECK(r[2].real() == doctest::Approx(1.0));
}

TEST_CASE("non-monic input is normalised") {
  const RootSet r = roots_from_coeffs(RealPolynomial({6.0, -10.0, 4.0}));  // 2(x-1)(2x-3)
  CHECK(r[0].real() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(r[1].real() == doctest::Approx(1.5).epsilon(1e-13));
}

TEST_CASE("roots_from_coeffs rejects degenerate input") {
  CHECK_CODE(roots_from_coeffs(RealPolynomial({1.0})), ErrorCode::InvalidArgument);
  CHECK_CODE(roots_from_coeffs(RealPolynomial({1.0, 0.0})), ErrorCode::InvalidArgument);
  CHECK_CODE(RealPolynomial(std::vector<double>{}), ErrorCode::InvalidArgument);
  CHECK_CODE(RealPolynomial({1.0, std::nan("")}), ErrorCode::InvalidArgument);
}

TEST_CASE("round trip roots -> coeffs -> roots") {
  for (int trial = 0; trial < 300; ++trial) {
    const int count = 1 + static_cast<int>(testing::uniform(0.0, 7.0));
    RootSet r = testing::random_disc_roots(count, 2.0);
    // keep roots separated so that the round trip is well conditioned
    bool separated = true;
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t j = i + 1; j < r.size(); ++j)
        if (std::abs(r[i] - r[j]) < 0.05) separated = false;
    if (!separated) continue;
    const RootSet back = roots_from_coeffs(coeffs_from_roots(r));
    CHECK(max_matched_error(r, back, 1.0) < 1e-8);
  }
}

TEST_CASE("Q(b) coefficients follow lambda_j L^{(m+1-j)/(m+1)}") {
  const std::vector<double> lambda{1.1, 6.75, 20.26, 32.24, 23.72, 7.0};
  const RealPolynomial q = build_char_poly_q(lambda, 2.0, 5);
  REQUIRE(q.degree() == 6);
  CHECK(q[6] == 1.0);
  // 2^{1/6}, 2^{2/6}, ... by repeated multiplication with an independent root
  const double r6 = std::cbrt(std::sqrt(2.0));
  double scale = 1.0;
  for (int j = 5; j >= 0; --j) {
    scale *= r6;
    CHECK(q[j] == doctest::Approx(lambda[static_cast<std::size_t>(j)] * scale).epsilon(1e-14));
  }
  CHECK(q[0] == doctest::Approx(2.2).epsilon(1e-14));
}

TEST_CASE("build_char_poly_q input checks") {
  const std::vector<double> two{1.0, 1.0};
  CHECK_CODE(build_char_poly_q(two, 1.0, 2), ErrorCode::DimensionMismatch);
  CHECK_CODE(build_char_poly_q(two, 0.0, 1), ErrorCode::InvalidArgument);
  const std::vector<double> neg{1.0, -1.0};
  CHECK_CODE(build_char_poly_q(neg, 1.0, 1), ErrorCode::InvalidArgument);
}

TEST_CASE("root scaling law under L") {
  const std::vector<double> lambda{1.1, 6.75, 20.26, 32.24, 23.72, 7.0};
  const RootSet base = roots_from_coeffs(build_char_poly_q(lambda, 2.0, 5));
  for (double factor : {160.0, 3.0, 1e-3}) {
    const RootSet scaled = roots_from_coeffs(build_char_poly_q(lambda, 2.0 * factor, 5));
    const double c = std::pow(factor, 1.0 / 6.0);
    std::vector<Complex> expected;
    for (Complex r : base) expected.push_back(r * c);
    CHECK(max_matched_error(RootSet(expected), scaled) < 1e-9);
  }
}

TEST_CASE("polynomial evaluation and derivative") {
  const RealPolynomial p({1.0, -2.0, 0.5, 3.0});
  for (double x : {-2.0, 0.0, 0.3, 5.0}) {
    CHECK(p(x) == doctest::Approx(1.0 - 2.0 * x + 0.5 * x * x + 3.0 * x * x * x));
  }
  const Complex z(0.2, -1.1);
  const Complex expected = 1.0 - 2.0 * z + 0.5 * z * z + 3.0 * z * z * z;
  CHECK(std::abs(p(z) - expected) < 1e-14);
  const RealPolynomial d = p.derivative();
  CHECK(d.degree() == 2);
  CHECK(d[0] == -2.0);
  CHECK(d[1] == 1.0);
  CHECK(d[2] == 9.0);
}

TEST_CASE("eval_poly_at_matrix against a direct sum") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0, -0.5, 0.25;
  const std::vector<Eigen::MatrixXd> powers{Eigen::MatrixXd::Identity(2, 2), m, m * m};
  const RealPolynomial p({3.0, -1.0, 2.0});
  const Eigen::MatrixXd got = eval_poly_at_matrix(p, powers);
  const Eigen::MatrixXd want = 3.0 * Eigen::MatrixXd::Identity(2, 2) - m + 2.0 * m * m;
  CHECK((got - want).norm() < 1e-14);
  const std::vector<Eigen::MatrixXd> short_powers{Eigen::MatrixXd::Identity(2, 2)};
  CHECK_CODE(eval_poly_at_matrix(p, short_powers), ErrorCode::DimensionMismatch);
}

TEST_CASE("RootSet predicates") {
  const RootSet rep = RootSet::repeated(-2.5, 4);
  CHECK(rep.size() == 4);
  CHECK(rep.is_repeated_real());
  CHECK(rep.is_conjugate_closed());
  CHECK(rep.max_real_part() == -2.5);
  const RootSet mixed({{-1.0, 1.0}, {-1.0, -1.0}, {-3.0, 0.0}});
  CHECK_FALSE(mixed.is_repeated_real());
  CHECK(mixed.is_conjugate_closed());
  CHECK(mixed.max_real_part() == -1.0);
  CHECK_FALSE(RootSet(std::vector<Complex>{{-1.0, 1.0}}).is_conjugate_closed());
}

}
