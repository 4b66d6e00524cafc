#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "subdetect/combinatorics.hpp"
#include "subdetect/extensions.hpp"
#include "test_support.hpp"

using namespace subdetect;

namespace {

SearchConfig config(std::size_t restarts, std::uint64_t seed) {
  SearchConfig cfg;
  cfg.restarts = restarts;
  cfg.seed = seed;
  return cfg;
}

ObservationMatrix add_block(const ObservationMatrix& Y, std::size_t n, std::size_t m, double a) {
  std::vector<double> v = Y.to_vector();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) v[i * Y.cols() + j] += a;
  }
  return ObservationMatrix(Y.rows(), Y.cols(), std::move(v));
}

const std::vector<LawDescriptor>& laws() {
  static const std::vector<LawDescriptor> all{
      {Law::poisson, 4.0},     {Law::poisson, 0.3},          {Law::bernoulli, 0.5},
      {Law::bernoulli, 0.1},   {Law::exponential, 2.0},      {Law::exponential, 0.25},
      {Law::gaussian_variance, 1.0}, {Law::gaussian_variance, 2.5}};
  return all;
}

// Draw from the law with <random> distributions, independent of the library.
double draw(const LawDescriptor& law, double theta, std::mt19937_64& gen) {
  switch (law.law()) {
    case Law::poisson: return static_cast<double>(std::poisson_distribution<int>(theta)(gen));
    case Law::bernoulli: return std::bernoulli_distribution(theta)(gen) ? 1.0 : 0.0;
    case Law::exponential: return std::exponential_distribution<double>(1.0 / theta)(gen);
    case Law::gaussian_variance: return std::normal_distribution<double>(0.0, theta)(gen);
  }
  return 0.0;
}

ObservationMatrix law_matrix(const LawDescriptor& law, std::size_t N, std::size_t M, std::size_t n, std::size_t m,
                             double theta1, std::mt19937_64& gen) {
  std::vector<double> v(N * M);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < M; ++j) v[i * M + j] = draw(law, (i < n && j < m) ? theta1 : law.theta0(), gen);
  }
  return ObservationMatrix(N, M, std::move(v));
}

}  // namespace

TEST_CASE("variance estimate") {
  CHECK(estimate_variance(ObservationMatrix::filled(3, 4, -1.5)).sigma2_hat == 2.25);
  CHECK(estimate_variance(ObservationMatrix(2, 2, {1, -1, 1, -1})).sigma2_hat == 1.0);
  CHECK(estimate_variance(ObservationMatrix(1, 2, {3, 4})).sigma_hat() == doctest::Approx(std::sqrt(12.5)));
  try {
    (void)estimate_variance(ObservationMatrix::zeros(2, 2));
    FAIL("expected AllZero");
  } catch (const DetectionError& e) {
    CHECK(e.kind() == ErrorKind::AllZero);
  }
  std::mt19937_64 gen(21);
  const int reps = 1000;
  double sum = 0.0;
  for (int r = 0; r < reps; ++r) sum += estimate_variance(testing::gaussian_matrix(50, 50, gen)).sigma2_hat;
  CHECK(std::abs(sum / reps - 1.0) <= 4.0 * std::sqrt(2.0 / (2500.0 * reps)));
}

TEST_CASE("studentized decisions are scale invariant") {
  std::mt19937_64 gen(22);
  const ProblemShape shape(10, 10, 2, 2);
  for (int rep = 0; rep < 100; ++rep) {
    const auto Y = add_block(testing::gaussian_matrix(10, 10, gen), 2, 2, 0.7 * (rep % 4));
    const double lambda = std::exp(std::uniform_real_distribution<double>(-5.0, 5.0)(gen));
    const auto base = studentized_combined_test(Y, shape, 2.3262, 0.1, config(10, 1), ScanMode::exact);
    const auto scaled = studentized_combined_test(Y.map([lambda](double v) { return lambda * v; }), shape, 2.3262, 0.1,
                                                  config(10, 1), ScanMode::exact);
    CHECK(base.reject == scaled.reject);
    CHECK(base.components[0].reject == scaled.components[0].reject);
    CHECK(base.components[1].reject == scaled.components[1].reject);
    CHECK(scaled.components[0].statistic == doctest::Approx(base.components[0].statistic).epsilon(1e-10));
    CHECK(scaled.components[1].statistic == doctest::Approx(base.components[1].statistic).epsilon(1e-10));
  }
}

TEST_CASE("studentized test size and power with unknown sigma") {
  const ProblemShape shape(100, 100, 10, 10);
  std::mt19937_64 gen(23);
  int null_rejections = 0;
  for (int r = 0; r < 200; ++r) {
    null_rejections += studentized_combined_test(testing::gaussian_matrix(100, 100, gen, 3.0), shape, 2.3262, 0.1,
                                                 config(200, static_cast<std::uint64_t>(r)))
                           .reject;
  }
  CHECK(null_rejections <= 10);

  const double a = 2.0 * 2.0 * detection_boundary(shape).a_star;
  int rejections = 0;
  for (int r = 0; r < 100; ++r) {
    const auto Y = add_block(testing::gaussian_matrix(100, 100, gen, 2.0), 10, 10, a);
    rejections += studentized_combined_test(Y, shape, 2.3262, 0.1, config(200, static_cast<std::uint64_t>(r))).reject;
  }
  CHECK(rejections >= 80);
}

TEST_CASE("law names") {
  for (Law law : {Law::poisson, Law::bernoulli, Law::exponential, Law::gaussian_variance}) {
    CHECK(parse_law(to_string(law)) == law);
  }
  CHECK(std::string(to_string(Law::gaussian_variance)) == "gaussian-variance");
  CHECK_THROWS_AS((void)parse_law("gamma"), DetectionError);
  CHECK_THROWS_AS(LawDescriptor(Law::bernoulli, 1.0), DetectionError);
  CHECK_THROWS_AS(LawDescriptor(Law::poisson, 0.0), DetectionError);
  CHECK_THROWS_AS(LawDescriptor(Law::exponential, -1.0), DetectionError);
}

TEST_CASE("tabulated Fisher information") {
  CHECK(LawDescriptor(Law::poisson, 4.0).sqrt_fisher() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(LawDescriptor(Law::bernoulli, 0.5).sqrt_fisher() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(LawDescriptor(Law::exponential, 2.0).sqrt_fisher() == doctest::Approx(0.5).epsilon(1e-15));
  // N(0, theta^2): I(theta) = 2 / theta^2.
  CHECK(LawDescriptor(Law::gaussian_variance, 1.0).sqrt_fisher() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("Fisher information equals eta'(theta) times dm/dtheta") {
  for (const auto& law : laws()) {
    const double t = law.theta0();
    const double h = 1e-5 * t;
    const double dm = (law.mean_of_statistic(t + h) - law.mean_of_statistic(t - h)) / (2.0 * h);
    const double info = law.eta_prime(t) * dm;
    CHECK(law.sqrt_fisher() == doctest::Approx(std::sqrt(info)).epsilon(1e-8));
    // eta' by central differences.
    CHECK(law.eta_prime(t) == doctest::Approx((law.eta(t + h) - law.eta(t - h)) / (2.0 * h)).epsilon(1e-8));
    CHECK(law.theta_from_eta(law.eta(t)) == doctest::Approx(t).epsilon(1e-13));
  }
}

TEST_CASE("fisher boundary") {
  const ProblemShape shape(200, 200, 10, 10);
  const double a_star = detection_boundary(shape).a_star;
  CHECK(fisher_boundary(LawDescriptor(Law::poisson, 4.0), shape) == doctest::Approx(2.0 * a_star).epsilon(1e-14));
  CHECK(fisher_boundary(LawDescriptor(Law::exponential, 2.0), shape) == doctest::Approx(2.0 * a_star).epsilon(1e-14));
  CHECK(fisher_boundary(LawDescriptor(Law::gaussian_variance, 1.0), shape) ==
        doctest::Approx(a_star / std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("standardised cumulant function has A'(s0) = 0 and A''(s0) = 1") {
  for (const auto& law : laws()) {
    const double s0 = law.s0();
    const double h1 = 1e-5;
    const double h2 = 1e-4;
    const double d1 = (law.log_partition(s0 + h1) - law.log_partition(s0 - h1)) / (2.0 * h1);
    const double d2 =
        (law.log_partition(s0 + h2) - 2.0 * law.log_partition(s0) + law.log_partition(s0 - h2)) / (h2 * h2);
    CHECK(std::abs(d1) < 1e-6);
    CHECK(std::abs(d2 - 1.0) < 1e-6);
  }
}

TEST_CASE("canonical shift and standardised mean agree with the cumulant function") {
  for (const auto& law : laws()) {
    for (double a : {-0.3, 0.1, 0.4}) {
      double theta = 0.0;
      try {
        theta = law.theta_for_canonical_shift(a);
      } catch (const DetectionError&) {
        continue;
      }
      CHECK(law.canonical_shift(theta) == doctest::Approx(a).epsilon(1e-10));
      const double s = law.s0() + a;
      const double h = 1e-5;
      const double slope = (law.log_partition(s + h) - law.log_partition(s - h)) / (2.0 * h);
      CHECK(law.standardized_mean(theta) == doctest::Approx(slope).epsilon(1e-6));
    }
  }
}

TEST_CASE("standardise observations") {
  const LawDescriptor poisson(Law::poisson, 4.0);
  const auto P = standardize_observations(ObservationMatrix(1, 2, {4, 6}), poisson);
  CHECK(P(0, 0) == 0.0);
  CHECK(P(0, 1) == 1.0);
  const LawDescriptor bernoulli(Law::bernoulli, 0.5);
  const auto B = standardize_observations(ObservationMatrix(1, 2, {1, 0}), bernoulli);
  CHECK(B(0, 0) == 1.0);
  CHECK(B(0, 1) == -1.0);
  try {
    (void)standardize_observations(ObservationMatrix(2, 2, {0, 1, 2, 0}), bernoulli);
    FAIL("expected SupportViolation");
  } catch (const DetectionError& e) {
    CHECK(e.kind() == ErrorKind::SupportViolation);
    CHECK(std::string(e.what()).find("row 2, column 1") != std::string::npos);
  }
  CHECK_THROWS_AS((void)standardize_observations(ObservationMatrix(1, 1, {1.5}), poisson), DetectionError);
  CHECK_THROWS_AS((void)standardize_observations(ObservationMatrix(1, 1, {-1.0}), LawDescriptor(Law::exponential, 1.0)),
                  DetectionError);
  CHECK(standardize_observations(ObservationMatrix(1, 1, {-2.0}), LawDescriptor(Law::gaussian_variance, 1.0))(0, 0) ==
        doctest::Approx(3.0 / std::sqrt(2.0)));
}

TEST_CASE("standardised null observations have mean 0 and variance 1") {
  std::mt19937_64 gen(24);
  for (const auto& law : laws()) {
    const int reps = 20;
    const double cells = 50.0 * 50.0 * reps;
    double s1 = 0.0;
    double s2 = 0.0;
    for (int r = 0; r < reps; ++r) {
      const auto Y = standardize_observations(law_matrix(law, 50, 50, 0, 0, law.theta0(), gen), law);
      for (double v : Y.entries()) {
        s1 += v;
        s2 += v * v;
      }
    }
    const double mean = s1 / cells;
    CHECK(std::abs(mean) <= 4.0 / std::sqrt(cells));
    // Fourth moments vary by law; 0.08 covers the heaviest tail here.
    CHECK(std::abs(s2 / cells - mean * mean - 1.0) <= 0.08);
  }
}

TEST_CASE("exponential family detector") {
  const ProblemShape shape(100, 100, 10, 10);
  std::mt19937_64 gen(25);

  const LawDescriptor poisson(Law::poisson, 4.0);
  int null_rejections = 0;
  for (int r = 0; r < 200; ++r) {
    const auto X = law_matrix(poisson, 100, 100, 0, 0, 4.0, gen);
    null_rejections += expfam_combined_test(X, poisson, shape, 2.3262, 0.1, config(200, static_cast<std::uint64_t>(r))).reject;
  }
  CHECK(null_rejections <= 10);

  // At theta0 = 0.5 the shift 1.5 d* leaves the Bernoulli parameter space.
  const LawDescriptor fair(Law::bernoulli, 0.5);
  CHECK(fair.theta0() + 1.5 * fisher_boundary(fair, shape) > 1.0);
  CHECK_FALSE(fair.in_domain(fair.theta0() + 1.5 * fisher_boundary(fair, shape)));
}

TEST_CASE("two-sided statistics") {
  CHECK(two_sided_linear(ObservationMatrix::filled(6, 7, 1.0)) == 0.0);
  CHECK(two_sided_linear(ObservationMatrix::zeros(6, 7)) == doctest::Approx(-std::sqrt(21.0)).epsilon(1e-15));
  const ProblemShape shape(6, 7, 2, 3);
  const auto zero = two_sided_test(ObservationMatrix::zeros(6, 7), shape, {}, config(10, 1), ScanMode::exact);
  CHECK(zero.components[0].statistic == doctest::Approx(-std::sqrt(21.0)).epsilon(1e-15));
  CHECK(zero.components[1].statistic == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-15));
  CHECK_FALSE(zero.reject);
  CHECK_THROWS_AS((void)two_sided_test(ObservationMatrix::zeros(6, 7), shape, {0.0, 0.0}, config(10, 1)), DetectionError);
}

TEST_CASE("two-sided statistics are invariant under sign flips") {
  std::mt19937_64 gen(26);
  const ProblemShape shape(8, 7, 2, 2);
  for (int rep = 0; rep < 100; ++rep) {
    const auto Y = testing::gaussian_matrix(8, 7, gen);
    std::vector<double> flipped = Y.to_vector();
    for (double& v : flipped) {
      if (std::bernoulli_distribution(0.5)(gen)) v = -v;
    }
    const ObservationMatrix F(8, 7, flipped);
    CHECK(two_sided_linear(F) == two_sided_linear(Y));
    const auto a = two_sided_test(Y, shape, {}, config(10, 1), ScanMode::exact);
    const auto b = two_sided_test(F, shape, {}, config(10, 1), ScanMode::exact);
    CHECK(a.components[1].statistic == b.components[1].statistic);
    CHECK(a.reject == b.reject);
    // z_max is the scan of the transformed matrix.
    CHECK(a.components[1].statistic ==
          doctest::Approx(brute_force_max(two_sided_transform(Y), shape).score).epsilon(1e-14));
  }
}
