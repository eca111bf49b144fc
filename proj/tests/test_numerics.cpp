#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <random>

#include "cldmd/errors.hpp"
#include "cldmd/numerics.hpp"

using namespace cldmd;

namespace {

Eigen::VectorXd sample_function(int n, double a, double b,
                                double (*f)(double)) {
  Eigen::VectorXd v(n);
  for (int k = 0; k < n; ++k) {
    v[k] = f(a + (b - a) * static_cast<double>(k) / (n - 1));
  }
  return v;
}

}  // namespace

TEST_CASE("simpson weights: textbook coefficients") {
  const auto w3 = simpson_weights(3, 1.0);
  CHECK(w3.weights[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(w3.weights[1] == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(w3.weights[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  // composite rule on 5 points: effective coefficients (1,4,2,4,1) * h/3
  const auto w5 = simpson_weights(5, 0.5);
  const Eigen::VectorXd coef = w5.coefficients();
  const double h3 = 0.5 / 3.0;
  CHECK(coef[0] == doctest::Approx(1.0 * h3).epsilon(1e-15));
  CHECK(coef[1] == doctest::Approx(4.0 * h3).epsilon(1e-15));
  CHECK(coef[2] == doctest::Approx(2.0 * h3).epsilon(1e-15));
  CHECK(coef[3] == doctest::Approx(4.0 * h3).epsilon(1e-15));
  CHECK(coef[4] == doctest::Approx(1.0 * h3).epsilon(1e-15));
}

TEST_CASE("simpson weights: weight sum equals interval length") {
  for (int n : {2, 3, 4, 5, 6, 7, 8, 21, 40, 101}) {
    const double h = 0.05;
    const auto w = simpson_weights(n, h);
    CHECK(w.weights.sum() * h ==
          doctest::Approx((n - 1) * h).epsilon(1e-12));
    CHECK(w.weights.minCoeff() >= 0.0);
  }
}

TEST_CASE("simpson weights: cubic integrated exactly on a 4-point grid") {
  // int_0^0.3 t^3 dt = 0.3^4 / 4 = 0.002025
  const auto w = simpson_weights(4, 0.1);
  Eigen::VectorXd samples(4);
  for (int k = 0; k < 4; ++k) {
    const double t = 0.1 * k;
    samples[k] = t * t * t;
  }
  CHECK(std::abs(quad_1d(samples, w) - 0.002025) <= 1e-14);
}

TEST_CASE("simpson exactness for cubics on every grid size") {
  // both the 1/3 and 3/8 pieces are exact for polynomials up to degree 3
  for (int n = 4; n <= 101; ++n) {
    const double h = 1.0 / (n - 1);
    const auto w = simpson_weights(n, h);
    Eigen::VectorXd samples(n);
    for (int k = 0; k < n; ++k) {
      const double t = h * k;
      samples[k] = 2.0 * t * t * t - t * t + 3.0 * t - 0.5;
    }
    const double exact = 2.0 / 4.0 - 1.0 / 3.0 + 3.0 / 2.0 - 0.5;
    CHECK(std::abs(quad_1d(samples, w) - exact) <= 1e-13 * std::abs(exact));
  }
}

TEST_CASE("quad_1d basics") {
  const auto w = simpson_weights(5, 0.25);
  CHECK(quad_1d(Eigen::VectorXd::Zero(5), w) == 0.0);

  Eigen::VectorXd sq(5);
  for (int k = 0; k < 5; ++k) {
    const double t = 0.25 * k;
    sq[k] = t * t;
  }
  CHECK(std::abs(quad_1d(sq, w) - 1.0 / 3.0) <= 1e-14);

  // composite Simpson on 20 intervals: |error| <= (b-a) h^4 max|f''''| / 180,
  // which is 9.5e-8 for exp on [0,1] (the actual error is 5.96e-8)
  const auto w21 = simpson_weights(21, 1.0 / 20.0);
  const Eigen::VectorXd ex = sample_function(21, 0.0, 1.0, std::exp);
  CHECK(std::abs(quad_1d(ex, w21) - (std::exp(1.0) - 1.0)) <= 1e-7);

  CHECK_THROWS_AS(quad_1d(Eigen::VectorXd::Zero(4), w), std::invalid_argument);
}

TEST_CASE("quad_1d complex samples") {
  const auto w = simpson_weights(21, 1.0 / 20.0);
  Eigen::VectorXcd s(21);
  for (int k = 0; k < 21; ++k) {
    const double t = k / 20.0;
    s[k] = std::complex<double>(t * t, -t);
  }
  const std::complex<double> v = quad_1d(s, w);
  CHECK(std::abs(v.real() - 1.0 / 3.0) <= 1e-12);
  CHECK(std::abs(v.imag() + 0.5) <= 1e-12);
}

TEST_CASE("quad_2d: unit square and separable integrands") {
  const auto w5 = simpson_weights(5, 0.25);
  CHECK(std::abs(quad_2d(Eigen::MatrixXd::Ones(5, 5), w5, w5) - 1.0) <= 1e-14);

  Eigen::MatrixXd tt(5, 5);
  for (int k = 0; k < 5; ++k) {
    for (int l = 0; l < 5; ++l) tt(k, l) = (0.25 * k) * (0.25 * l);
  }
  CHECK(std::abs(quad_2d(tt, w5, w5) - 0.25) <= 1e-14);

  CHECK_THROWS_AS(quad_2d(Eigen::MatrixXd::Ones(4, 5), w5, w5),
                  std::invalid_argument);
}

TEST_CASE("quad_2d: gaussian integrand vs fine trapezoid oracle") {
  auto f = [](double t, double tau) { return std::exp(-(t - tau) * (t - tau)); };

  const int n = 21;
  const auto w = simpson_weights(n, 1.0 / (n - 1));
  Eigen::MatrixXd samples(n, n);
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      samples(k, l) = f(k / double(n - 1), l / double(n - 1));
    }
  }
  const double value = quad_2d(samples, w, w);

  auto trapezoid_2d = [&](int nf) {
    const double hf = 1.0 / (nf - 1);
    double acc = 0.0;
    for (int k = 0; k < nf; ++k) {
      const double wk = (k == 0 || k == nf - 1) ? 0.5 : 1.0;
      for (int l = 0; l < nf; ++l) {
        const double wl = (l == 0 || l == nf - 1) ? 0.5 : 1.0;
        acc += wk * wl * f(k * hf, l * hf);
      }
    }
    return acc * hf * hf;
  };

  // the 401-point trapezoid oracle carries its own O(h^2) error of about
  // 1.3e-6 here, so the achievable agreement is 2e-6; against the much finer
  // 4001-point oracle the Simpson error itself (3.8e-7) is what remains
  CHECK(std::abs(value - trapezoid_2d(401)) <= 2e-6);
  CHECK(std::abs(value - trapezoid_2d(4001)) <= 5e-7);
}

TEST_CASE("quad_2d separates for product integrands") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int nt = 5 + 2 * (trial % 4);
    const int ntau = 7 + 2 * (trial % 3);
    Eigen::VectorXd f(nt), g(ntau);
    for (int k = 0; k < nt; ++k) f[k] = unif(rng);
    for (int l = 0; l < ntau; ++l) g[l] = unif(rng);
    const auto wt = simpson_weights(nt, 0.1);
    const auto wtau = simpson_weights(ntau, 0.2);
    const Eigen::MatrixXd outer = f * g.transpose();
    const double lhs = quad_2d(outer, wt, wtau);
    const double rhs = quad_1d(f, wt) * quad_1d(g, wtau);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("eig_general: diagonal matrix") {
  Eigen::MatrixXd a(2, 2);
  a << 2.0, 0.0, 0.0, 3.0;
  const auto eig = eig_general(a);
  CHECK(eig.values[0] == std::complex<double>(3.0, 0.0));
  CHECK(eig.values[1] == std::complex<double>(2.0, 0.0));
  CHECK(std::abs(eig.vectors(1, 0) - 1.0) <= 1e-15);
  CHECK(std::abs(eig.vectors(0, 1) - 1.0) <= 1e-15);
}

TEST_CASE("eig_general: rotation generator orders +i first") {
  Eigen::MatrixXd a(2, 2);
  a << 0.0, 1.0, -1.0, 0.0;
  const auto eig = eig_general(a);
  CHECK(std::abs(eig.values[0] - std::complex<double>(0.0, 1.0)) <= 1e-12);
  CHECK(std::abs(eig.values[1] - std::complex<double>(0.0, -1.0)) <= 1e-12);
}

TEST_CASE("eig_general: characteristic roots of a companion-style matrix") {
  Eigen::MatrixXd a(2, 2);
  a << 0.0, 1.0, -2.0, -3.0;  // lambda^2 + 3 lambda + 2 = 0
  const auto eig = eig_general(a);
  CHECK(std::abs(eig.values[0] - std::complex<double>(-1.0, 0.0)) <= 1e-12);
  CHECK(std::abs(eig.values[1] - std::complex<double>(-2.0, 0.0)) <= 1e-12);
}

TEST_CASE("eig_general: residuals, determinism, conjugate adjacency") {
  std::mt19937 rng(11);
  std::normal_distribution<double> normal;
  const int n = 12;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
  }

  const auto e1 = eig_general(a);
  const auto e2 = eig_general(a);
  CHECK(std::memcmp(e1.values.data(), e2.values.data(),
                    sizeof(std::complex<double>) * n) == 0);
  CHECK(std::memcmp(e1.vectors.data(), e2.vectors.data(),
                    sizeof(std::complex<double>) * n * n) == 0);

  for (int j = 0; j < n; ++j) {
    CHECK((a * e1.vectors.col(j) - e1.values[j] * e1.vectors.col(j)).norm() <=
          1e-8 * a.norm());
    CHECK(e1.vectors.col(j).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }

  // complex values appear as adjacent conjugate pairs, +Im first
  for (int j = 0; j < n; ++j) {
    if (e1.values[j].imag() > 0.0) {
      REQUIRE(j + 1 < n);
      CHECK(e1.values[j + 1] == std::conj(e1.values[j]));
    }
  }

  // phase convention: largest-magnitude entry real positive
  for (int j = 0; j < n; ++j) {
    Eigen::Index imax = 0;
    e1.vectors.col(j).cwiseAbs().maxCoeff(&imax);
    CHECK(e1.vectors(imax, j).imag() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(e1.vectors(imax, j).real() > 0.0);
  }
}

TEST_CASE("eig_general: repeated eigenvalues order by component index") {
  const auto eig = eig_general(Eigen::MatrixXd::Identity(3, 3));
  for (int j = 0; j < 3; ++j) {
    CHECK(eig.values[j] == std::complex<double>(1.0, 0.0));
    Eigen::Index imax = 0;
    eig.vectors.col(j).cwiseAbs().maxCoeff(&imax);
    CHECK(imax == j);
  }
}

TEST_CASE("eig_general: symmetric input gives real eigenvalues") {
  std::mt19937 rng(23);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 6 + trial;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = normal(rng);
    }
    a = ((a + a.transpose()) / 2.0).eval();
    const auto eig = eig_general(a);
    for (int j = 0; j < n; ++j) {
      CHECK(std::abs(eig.values[j].imag()) <= 1e-10 * a.norm());
    }
  }
}

TEST_CASE("eig_general rejects bad input") {
  CHECK_THROWS_AS(eig_general(Eigen::MatrixXd::Zero(2, 3)),
                  std::invalid_argument);
  Eigen::MatrixXd nan2 = Eigen::MatrixXd::Zero(2, 2);
  nan2(0, 0) = std::nan("");
  CHECK_THROWS_AS(eig_general(nan2), std::invalid_argument);
}

TEST_CASE("solve_regularized: identity, pure regularizer, analytic 2x2") {
  const Eigen::MatrixXd id3 = Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd b3(3);
  b3 << 1.0, -2.0, 0.5;
  CHECK((solve_regularized(id3, b3, 0.0) - b3).norm() <= 1e-14);

  const Eigen::MatrixXd z2 = Eigen::MatrixXd::Zero(2, 2);
  const Eigen::MatrixXd x =
      solve_regularized(z2, Eigen::MatrixXd::Identity(2, 2), 1e-6);
  CHECK((x - 1e6 * Eigen::MatrixXd::Identity(2, 2)).norm() <= 1e-6 * 1e6);

  Eigen::MatrixXd g(2, 2);
  g << 2.0, 1.0, 1.0, 2.0;
  Eigen::VectorXd b(2);
  b << 1.0, 1.0;
  const Eigen::VectorXd sol = solve_regularized(g, b, 0.0);
  CHECK(std::abs(sol[0] - 1.0 / 3.0) <= 1e-14);
  CHECK(std::abs(sol[1] - 1.0 / 3.0) <= 1e-14);
}

TEST_CASE("solve_regularized: residual contract and failure modes") {
  std::mt19937 rng(5);
  std::normal_distribution<double> normal;
  const int n = 20;
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = normal(rng);
  }
  Eigen::MatrixXd g = m * m.transpose();
  Eigen::MatrixXd b(n, 3);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) b(i, j) = normal(rng);
  }
  const Eigen::MatrixXd x = solve_regularized(g, b, 1e-8);
  Eigen::MatrixXd greg = g;
  greg.diagonal().array() += 1e-8;
  CHECK((greg * x - b).norm() <= 1e-10 * b.norm());

  // not symmetric
  Eigen::MatrixXd asym = g;
  asym(0, 1) += 1.0;
  CHECK_THROWS_AS(solve_regularized(asym, b, 0.0), std::invalid_argument);

  // indefinite even after regularization
  Eigen::MatrixXd neg = -Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(
      solve_regularized(neg, Eigen::MatrixXd::Identity(2, 2), 1e-6),
      singular_matrix_error);
}

TEST_CASE("solve_complex: identity, scalar inverse, back substitution") {
  using cd = std::complex<double>;
  const Eigen::MatrixXcd id2 = Eigen::MatrixXcd::Identity(2, 2);
  Eigen::MatrixXcd b(2, 1);
  b << cd(1.0, 2.0), cd(-3.0, 0.5);
  CHECK((solve_complex(id2, b) - b).norm() <= 1e-14);

  const Eigen::MatrixXcd mi = cd(0.0, 1.0) * id2;
  const Eigen::MatrixXcd xi = solve_complex(mi, id2);
  CHECK((xi - cd(0.0, -1.0) * id2).norm() <= 1e-14);

  Eigen::MatrixXcd tri(2, 2);
  tri << cd(1.0, 0.0), cd(0.0, 1.0), cd(0.0, 0.0), cd(2.0, 0.0);
  Eigen::MatrixXcd rhs(2, 1);
  rhs << cd(1.0, 0.0), cd(0.0, 0.0);
  const Eigen::MatrixXcd sol = solve_complex(tri, rhs);
  CHECK(std::abs(sol(0, 0) - cd(1.0, 0.0)) <= 1e-14);
  CHECK(std::abs(sol(1, 0)) <= 1e-14);

  CHECK_THROWS_AS(solve_complex(Eigen::MatrixXcd::Zero(2, 2), b),
                  singular_matrix_error);
}
