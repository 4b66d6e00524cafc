#pragma once
// Monte Carlo harness: null and planted data, empirical calibration, power
// curves, heuristic-vs-exact comparison, and the exact mixture likelihood
// ratio over uniformly placed supports.
//
// Every random quantity is drawn from a stream derived from the master seed
// and the task index, so results do not depend on the worker count.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "subdetect/combinatorics.hpp"
#include "subdetect/core_model.hpp"
#include "subdetect/detectors.hpp"
#include "subdetect/extensions.hpp"
#include "subdetect/random.hpp"
#include "subdetect/search.hpp"

namespace subdetect {

// --- data generation ------------------------------------------------------

struct GaussianNoise {
  double sigma = 1.0;
};

using NoiseModel = std::variant<GaussianNoise, LawDescriptor>;

/// One draw of X under `law` at parameter theta.
[[nodiscard]] double sample_law(const LawDescriptor& law, double theta, Philox4x32& rng);

/// i.i.d. N x M draws from the null noise model; deterministic in `seed`.
[[nodiscard]] ObservationMatrix generate_null(std::size_t N, std::size_t M, const NoiseModel& noise,
                                              std::uint64_t seed);

/// Y + S for the signal's S matrix.
[[nodiscard]] ObservationMatrix plant_signal(const ObservationMatrix& matrix, const SignalSpec& spec);

/// Signal with values +a or -a, each sign with probability 1/2.
[[nodiscard]] SignalSpec random_sign_signal(SubmatrixSupport support, double amplitude, Philox4x32& rng);

/// Redraws the in-support cells from `law` at parameter theta1.
[[nodiscard]] ObservationMatrix plant_law_signal(const ObservationMatrix& raw, const LawDescriptor& law,
                                                 const SubmatrixSupport& support, double theta1,
                                                 std::uint64_t seed);

// --- detector dispatch ----------------------------------------------------

enum class DetectorKind { linear, scan, combined, adaptive, rectangle, high_criticism, studentized, expfam, two_sided };

[[nodiscard]] const char* to_string(DetectorKind kind) noexcept;
[[nodiscard]] DetectorKind parse_detector(std::string_view name);

/// Detector choice plus every knob it may need.
///
/// The calibration statistic of a detector is its scan-type component:
/// t_max for scan/combined, the studentised t_max, the standardised t_max,
/// z_max for two-sided; the full statistic for the single-statistic
/// detectors. A calibrated threshold replaces exactly that component's
/// threshold; the linear component keeps H.
struct DetectorSpec {
  DetectorKind kind = DetectorKind::combined;
  double H = 2.3262;
  double delta = kDefaultInflation;
  double eta = 0.25;
  double t0 = kDefaultHcStart;
  double hc_c = kDefaultHcConstant;
  ScanMode mode = ScanMode::heuristic;
  SearchConfig search;  // the seed is replaced per replication
  std::optional<AdaptiveGrid> grid;
  std::optional<LawDescriptor> law;
  std::optional<double> threshold_override;
  std::string threshold_source = "analytic";
};

[[nodiscard]] double calibration_statistic(const DetectorSpec& spec, const ObservationMatrix& matrix,
                                           const ProblemShape& shape, std::uint64_t search_seed);

[[nodiscard]] TestReport run_detector(const DetectorSpec& spec, const ObservationMatrix& matrix,
                                      const ProblemShape& shape, std::uint64_t search_seed);

// --- calibration ----------------------------------------------------------

/// Order statistic of rank ceil((1 - alpha) * count) (at least 1).
[[nodiscard]] double empirical_quantile(std::vector<double> values, double alpha);

/// (1 - alpha) empirical quantile of the calibration statistic over
/// `samples` null matrices. Needs samples >= 20.
[[nodiscard]] double calibrate_threshold(const DetectorSpec& spec, const ProblemShape& shape,
                                         const NoiseModel& noise, std::size_t samples, double alpha,
                                         std::uint64_t seed, unsigned workers = 1);

// --- power ----------------------------------------------------------------

enum class Placement { upper_left, random };

/// How an amplitude becomes a planted signal. `additive` adds a (Gaussian
/// noise); `theta_shift` plants theta0 + a and `canonical_shift` plants the
/// parameter whose standardised canonical parameter is s0 + a (law noise).
enum class AmplitudeScale { additive, theta_shift, canonical_shift };

struct ExperimentPlan {
  ProblemShape shape{2, 2, 1, 1};
  std::vector<double> amplitudes;
  std::size_t replications = 100;
  std::size_t calibration_samples = 0;  // 0 keeps analytic thresholds
  double alpha_target = 0.01;
  std::uint64_t seed = 0;
  DetectorSpec detector;
  NoiseModel noise = GaussianNoise{};
  Sidedness sidedness = Sidedness::one_sided;
  Placement placement = Placement::upper_left;
  AmplitudeScale scale = AmplitudeScale::additive;
  unsigned workers = 1;

  void validate() const;
};

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval; z defaults to the two-sided 95% normal quantile.
[[nodiscard]] WilsonInterval wilson_interval(std::size_t successes, std::size_t trials,
                                             double z = 1.959963984540054);

struct PowerPoint {
  double amplitude = 0.0;
  double power = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 1.0;
  std::size_t rejections = 0;
  std::size_t replications = 0;
  double mean_statistic = 0.0;
  /// Mean of a standardised in-support cell, A'(s0 + a); a / sigma for Gaussian noise.
  double mean_shift = 0.0;
  /// Canonical shift a = s - s0; equals mean_shift for Gaussian noise.
  double canonical_shift = 0.0;
};

struct PowerCurve {
  std::string detector;
  ProblemShape shape{2, 2, 1, 1};
  std::uint64_t seed = 0;
  std::vector<PowerPoint> points;
  std::optional<BoundaryReport> boundary;
  std::optional<double> calibrated_threshold;
  std::string threshold_source = "analytic";
};

[[nodiscard]] PowerCurve estimate_power(const ExperimentPlan& plan);

/// Columns: detector,N,M,n,m,a,a_star,power,ci_lo,ci_hi,reps,seed.
void write_power_csv(std::ostream& out, const PowerCurve& curve);

// --- heuristic vs exact ---------------------------------------------------

struct OracleComparison {
  std::size_t index = 0;
  double heuristic_score = 0.0;
  double exact_score = 0.0;
  [[nodiscard]] bool matches() const noexcept;
};

/// Runs alternating search and enumeration on `count` seeded N(0,1) matrices.
[[nodiscard]] std::vector<OracleComparison> oracle_compare(const ProblemShape& shape, std::size_t count,
                                                           const SearchConfig& search, std::uint64_t seed,
                                                           unsigned workers = 1);

// --- likelihood ratio -----------------------------------------------------

/// ln L_pi with L_pi = G^{-1} sum_C exp(-b^2/2 + b Y_C), b = a sqrt(nm).
[[nodiscard]] double log_exact_likelihood_ratio(const ObservationMatrix& matrix, const ProblemShape& shape,
                                                double a, double budget = kDefaultEnumerationBudget);

[[nodiscard]] double exact_likelihood_ratio(const ObservationMatrix& matrix, const ProblemShape& shape, double a,
                                            double budget = kDefaultEnumerationBudget);

struct ProbeSummary {
  std::size_t reps = 0;
  double mean = 0.0;
  double variance = 0.0;         // unbiased sample variance of L_pi
  double fraction_within = 0.0;  // share of L_pi in [1 - epsilon, 1 + epsilon]
  double epsilon = 0.0;
};

[[nodiscard]] ProbeSummary indistinguishability_probe(const ProblemShape& shape, double a, std::size_t reps,
                                                      std::uint64_t seed, double epsilon = 0.1,
                                                      unsigned workers = 1);

}  // namespace subdetect
