#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "subdetect/combinatorics.hpp"
#include "test_support.hpp"

using namespace subdetect;

namespace {

// Pascal's triangle in exact 64-bit arithmetic; C(60, 30) < 2^63.
std::vector<std::vector<std::uint64_t>> pascal(std::size_t rows) {
  std::vector<std::vector<std::uint64_t>> c(rows + 1);
  for (std::size_t n = 0; n <= rows; ++n) {
    c[n].assign(n + 1, 1);
    for (std::size_t k = 1; k < n; ++k) c[n][k] = c[n - 1][k - 1] + c[n - 1][k];
  }
  return c;
}

long double lgamma_binomial(std::uint64_t n, std::uint64_t k) {
  const auto ln = static_cast<long double>(n);
  const auto lk = static_cast<long double>(k);
  return lgammal(ln + 1.0L) - lgammal(lk + 1.0L) - lgammal(ln - lk + 1.0L);
}

}  // namespace

TEST_CASE("log_binomial matches exact integer coefficients") {
  const auto c = pascal(60);
  for (std::size_t n = 0; n <= 60; ++n) {
    for (std::size_t k = 0; k <= n; ++k) {
      const double expected = std::log(static_cast<double>(c[n][k]));
      CHECK(log_binomial(n, k) == doctest::Approx(expected).epsilon(1e-13).scale(1.0));
    }
  }
  CHECK(log_binomial(10, 2) == doctest::Approx(std::log(45.0)).epsilon(1e-15));
  CHECK(log_binomial(10, 2) == doctest::Approx(3.8066625).epsilon(1e-7));
}

TEST_CASE("log_binomial on large arguments agrees with extended-precision lgamma") {
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 300; ++rep) {
    const std::uint64_t n = testing::uniform_size(gen, 61, 5'000'000);
    const std::uint64_t k = testing::uniform_size(gen, 0, n);
    const double expected = static_cast<double>(lgamma_binomial(n, k));
    CHECK(std::abs(log_binomial(n, k) - expected) <= 1e-12 * (1.0 + std::abs(expected)));
  }
}

TEST_CASE("log_binomial identities") {
  CHECK(log_binomial(200, 10) == log_binomial(200, 190));
  for (std::uint64_t n : {0ULL, 1ULL, 17ULL, 1000ULL, 123456789ULL}) {
    CHECK(log_binomial(n, 0) == 0.0);
    CHECK(log_binomial(n, n) == 0.0);
  }
  std::mt19937_64 gen(9);
  for (int rep = 0; rep < 200; ++rep) {
    const std::uint64_t n = testing::uniform_size(gen, 2, 100000);
    const std::uint64_t k = testing::uniform_size(gen, 1, n - 1);
    // Pascal's rule in log space.
    const double lhs = log_binomial(n, k);
    const double a = log_binomial(n - 1, k - 1);
    const double b = log_binomial(n - 1, k);
    const double rhs = std::max(a, b) + std::log1p(std::exp(-std::abs(a - b)));
    CHECK(std::abs(lhs - rhs) <= 1e-11 * (1.0 + lhs));
    CHECK(log_binomial(n, k) == doctest::Approx(log_binomial(n, n - k)).epsilon(1e-14));
  }
  CHECK_THROWS_AS((void)log_binomial(3, 4), DetectionError);
}

TEST_CASE("submatrix count and scan thresholds") {
  const ProblemShape small(10, 10, 2, 2);
  CHECK(log_submatrix_count(small) == doctest::Approx(std::log(2025.0)).epsilon(1e-14));
  CHECK(log_submatrix_count(ProblemShape(7, 9, 7, 9)) == 0.0);
  CHECK(scan_threshold(small) == doctest::Approx(std::sqrt(2.0 * std::log(2025.0))).epsilon(1e-14));
  CHECK(scan_threshold(small) == doctest::Approx(3.90213).epsilon(1e-5));
  CHECK(scan_threshold(small, 0.1) == doctest::Approx(3.99849).epsilon(1e-5));
  CHECK(scan_threshold(ProblemShape(7, 9, 7, 9)) == 0.0);
  CHECK_THROWS_AS((void)scan_threshold(small, -0.1), DetectionError);

  CHECK(adaptive_threshold(small) == doctest::Approx(std::sqrt(2.0 * std::log(202500.0))).epsilon(1e-14));
  CHECK(adaptive_threshold(small) == doctest::Approx(4.94343).epsilon(1e-5));
  CHECK(adaptive_threshold(ProblemShape(7, 9, 7, 9)) == doctest::Approx(std::sqrt(2.0 * std::log(63.0))));

  // ln G ~ n ln(1/p) + m ln(1/q); the ratio carries a 1 + 1/ln(1/p) Stirling
  // factor, so it tends to 1 only as p -> 0.
  auto ratio = [](std::size_t N, std::size_t n) {
    const double expected = 2.0 * static_cast<double>(lgamma_binomial(N, n));
    const double lead = 2.0 * n * std::log(static_cast<double>(N) / n);
    const double r = log_submatrix_count(ProblemShape(N, N, n, n)) / lead;
    CHECK(r == doctest::Approx(expected / lead).epsilon(1e-12));
    return r;
  };
  CHECK(ratio(200, 10) == doctest::Approx(1.2568).epsilon(1e-4));
  double prev = ratio(200, 10);
  for (std::size_t N : {2000, 20000, 200000, 2000000}) {
    const double r = ratio(N, 10);
    CHECK(r < prev);
    CHECK(r > 1.0);
    prev = r;
  }
  CHECK(ratio(20000, 10) >= 0.8);
  CHECK(ratio(20000, 10) <= 1.2);
}

TEST_CASE("adaptive threshold exceeds scan threshold") {
  std::mt19937_64 gen(3);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t N = testing::uniform_size(gen, 2, 500);
    const std::size_t M = testing::uniform_size(gen, 2, 500);
    const ProblemShape shape(N, M, testing::uniform_size(gen, 1, N), testing::uniform_size(gen, 1, M));
    CHECK(adaptive_threshold(shape) > scan_threshold(shape));
  }
}

TEST_CASE("detection boundary closed form") {
  const auto b = detection_boundary(ProblemShape(200, 200, 10, 10));
  CHECK(b.dense_term == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(b.sparse_term == doctest::Approx(std::sqrt(0.4 * std::log(20.0))).epsilon(1e-15));
  CHECK(b.sparse_term == doctest::Approx(1.09466).epsilon(1e-5));
  CHECK(b.a_star == b.sparse_term);
  CHECK(b.regime == Regime::sparse);

  // Large nmpq: the dense term is the smaller one.
  const auto dense = detection_boundary(ProblemShape(1000, 1000, 300, 300));
  CHECK(dense.a_star == dense.dense_term);
  CHECK(dense.regime == Regime::dense);

  CHECK(detection_boundary(ProblemShape(200, 200, 20, 20)).a_star <
        detection_boundary(ProblemShape(200, 200, 10, 10)).a_star);
  CHECK_THROWS_AS((void)detection_boundary(ProblemShape(10, 10, 10, 2)), DetectionError);
  CHECK_THROWS_AS((void)detection_boundary(ProblemShape(10, 10, 2, 10)), DetectionError);
}

TEST_CASE("detection boundary terms against direct evaluation") {
  std::mt19937_64 gen(21);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t N = testing::uniform_size(gen, 2, 2000);
    const std::size_t M = testing::uniform_size(gen, 2, 2000);
    const std::size_t n = testing::uniform_size(gen, 1, N - 1);
    const std::size_t m = testing::uniform_size(gen, 1, M - 1);
    const double p = static_cast<double>(n) / N;
    const double q = static_cast<double>(m) / M;
    const double nm = static_cast<double>(n) * m;
    const double dense = 1.0 / std::sqrt(nm * p * q);
    const double sparse = std::sqrt(2.0 * (n * std::log(1.0 / p) + m * std::log(1.0 / q)) / nm);
    const auto b = detection_boundary(ProblemShape(N, M, n, m));
    CHECK(b.dense_term == doctest::Approx(dense).epsilon(1e-12));
    CHECK(b.sparse_term == doctest::Approx(sparse).epsilon(1e-12));
    CHECK(b.a_star == std::min(b.dense_term, b.sparse_term));
    CHECK((b.regime == Regime::dense) == (b.dense_term <= b.sparse_term));
    CHECK(rectangle_boundary(ProblemShape(N, M, n, m)) <= b.sparse_term * (1.0 + 1e-12));
  }
}

TEST_CASE("phi_beta") {
  CHECK(phi_beta(0.75) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(std::sqrt(2.0 * 0.75 - 1.0) == doctest::Approx(std::sqrt(2.0) * (1.0 - std::sqrt(0.25))).epsilon(1e-15));
  CHECK(phi_beta(0.5 + 1e-12) < 2e-6);
  CHECK(phi_beta(0.9) == doctest::Approx(std::sqrt(2.0) * (1.0 - std::sqrt(0.1))).epsilon(1e-15));
  CHECK(phi_beta(0.9) == doctest::Approx(0.96709).epsilon(2e-4));
  double prev = 0.0;
  for (double beta = 0.51; beta < 1.0; beta += 0.01) {
    CHECK(phi_beta(beta) > prev);
    prev = phi_beta(beta);
  }
  CHECK_THROWS_AS((void)phi_beta(0.5), DetectionError);
  CHECK_THROWS_AS((void)phi_beta(1.0), DetectionError);
}

TEST_CASE("no-structure boundary") {
  const ProblemShape shape(200, 200, 10, 10);
  const double beta = 1.0 - std::log(100.0) / std::log(40000.0);
  CHECK(sparsity_exponent(shape) == doctest::Approx(beta).epsilon(1e-15));
  CHECK(no_structure_boundary(shape) ==
        doctest::Approx(std::sqrt(2.0 * beta - 1.0) * std::sqrt(std::log(40000.0))).epsilon(1e-14));
  CHECK_THROWS_AS((void)no_structure_boundary(ProblemShape(100, 100, 10, 10)), DetectionError);
  double prev = 2.0;
  for (std::size_t n = 1; n <= 10; ++n) {
    const double b = sparsity_exponent(ProblemShape(100, 100, n, n));
    CHECK(b < prev);
    prev = b;
  }
}

TEST_CASE("rectangle boundary") {
  CHECK(rectangle_boundary(ProblemShape(200, 200, 10, 10)) ==
        doctest::Approx(std::sqrt(4.0 * std::log(20.0) / 100.0)).epsilon(1e-15));
  CHECK(rectangle_boundary(ProblemShape(200, 200, 10, 10)) == doctest::Approx(0.34617).epsilon(1e-5));
  // Square case with n = N^(1 - beta): N^-(1 - beta) sqrt(4 beta ln N).
  for (const auto& [N, beta] : {std::pair<std::size_t, double>{10000, 0.5}, {4096, 0.25}, {4096, 0.5}}) {
    const auto n = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(N), 1.0 - beta)));
    const double expected = std::pow(static_cast<double>(N), -(1.0 - beta)) * std::sqrt(4.0 * beta * std::log(N));
    CHECK(rectangle_boundary(ProblemShape(N, N, n, n)) == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK_THROWS_AS((void)rectangle_boundary(ProblemShape(10, 10, 10, 2)), DetectionError);
}
