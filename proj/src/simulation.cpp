#include "subdetect/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "subdetect/matrix_io.hpp"
#include "subdetect/parallel.hpp"

namespace subdetect {

namespace {

// Stream tags for derive_seed.
enum : std::uint64_t {
  kTagCalibrationData = 1,
  kTagCalibrationSearch = 2,
  kTagPowerData = 3,
  kTagPowerSearch = 4,
  kTagPowerPlant = 5,
  kTagOracleData = 6,
  kTagProbeData = 7,
};

}  // namespace

// ---------------------------------------------------------------------------
// Data generation
// ---------------------------------------------------------------------------

double sample_law(const LawDescriptor& law, double theta, Philox4x32& rng) {
  if (!law.in_domain(theta)) {
    std::ostringstream msg;
    msg << "cannot sample " << to_string(law.law()) << " at theta = " << theta;
    throw DetectionError(ErrorKind::OutOfRange, msg.str());
  }
  switch (law.law()) {
    case Law::poisson: return static_cast<double>(std::poisson_distribution<long>(theta)(rng));
    case Law::bernoulli: return rng.uniform() < theta ? 1.0 : 0.0;
    case Law::exponential: return -theta * std::log1p(-rng.uniform());
    case Law::gaussian_variance: return theta * standard_normal(rng);
  }
  return 0.0;
}

ObservationMatrix generate_null(std::size_t N, std::size_t M, const NoiseModel& noise, std::uint64_t seed) {
  Philox4x32 rng(seed);
  std::vector<double> entries(N * M);
  if (const auto* g = std::get_if<GaussianNoise>(&noise)) {
    if (!(g->sigma > 0.0)) throw DetectionError(ErrorKind::InvalidArgument, "noise sigma must be > 0");
    for (double& v : entries) v = g->sigma * standard_normal(rng);
  } else {
    const auto& law = std::get<LawDescriptor>(noise);
    for (double& v : entries) v = sample_law(law, law.theta0(), rng);
  }
  return ObservationMatrix(N, M, std::move(entries));
}

ObservationMatrix plant_signal(const ObservationMatrix& matrix, const SignalSpec& spec) {
  spec.support().check_within(matrix.rows(), matrix.cols());
  std::vector<double> entries = matrix.to_vector();
  const auto& rows = spec.support().rows();
  const auto& cols = spec.support().cols();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t l = 0; l < cols.size(); ++l) entries[rows[k] * matrix.cols() + cols[l]] += spec.value_at(k, l);
  }
  return ObservationMatrix(matrix.rows(), matrix.cols(), std::move(entries));
}

SignalSpec random_sign_signal(SubmatrixSupport support, double amplitude, Philox4x32& rng) {
  std::vector<double> values(support.n() * support.m());
  for (double& v : values) v = (rng() & 1u) ? amplitude : -amplitude;
  return SignalSpec(std::move(support), amplitude, Sidedness::two_sided, std::move(values));
}

ObservationMatrix plant_law_signal(const ObservationMatrix& raw, const LawDescriptor& law,
                                   const SubmatrixSupport& support, double theta1, std::uint64_t seed) {
  support.check_within(raw.rows(), raw.cols());
  Philox4x32 rng(seed);
  std::vector<double> entries = raw.to_vector();
  for (std::size_t i : support.rows()) {
    for (std::size_t j : support.cols()) entries[i * raw.cols() + j] = sample_law(law, theta1, rng);
  }
  return ObservationMatrix(raw.rows(), raw.cols(), std::move(entries));
}

// ---------------------------------------------------------------------------
// Detector dispatch
// ---------------------------------------------------------------------------

const char* to_string(DetectorKind kind) noexcept {
  switch (kind) {
    case DetectorKind::linear: return "linear";
    case DetectorKind::scan: return "scan";
    case DetectorKind::combined: return "combined";
    case DetectorKind::adaptive: return "adaptive";
    case DetectorKind::rectangle: return "rectangle";
    case DetectorKind::high_criticism: return "hc";
    case DetectorKind::studentized: return "studentized";
    case DetectorKind::expfam: return "expfam";
    case DetectorKind::two_sided: return "two-sided";
  }
  return "unknown";
}

DetectorKind parse_detector(std::string_view name) {
  for (DetectorKind kind :
       {DetectorKind::linear, DetectorKind::scan, DetectorKind::combined, DetectorKind::adaptive,
        DetectorKind::rectangle, DetectorKind::high_criticism, DetectorKind::studentized, DetectorKind::expfam,
        DetectorKind::two_sided}) {
    if (name == to_string(kind)) return kind;
  }
  throw DetectionError(ErrorKind::InvalidArgument, "unknown detector '" + std::string(name) + "'");
}

namespace {

bool has_linear_component(DetectorKind kind) {
  return kind == DetectorKind::combined || kind == DetectorKind::studentized || kind == DetectorKind::expfam ||
         kind == DetectorKind::two_sided;
}

// Report produced with analytic thresholds; the override is applied after.
TestReport run_analytic(const DetectorSpec& spec, const ObservationMatrix& matrix, const ProblemShape& shape,
                        const SearchConfig& search) {
  switch (spec.kind) {
    case DetectorKind::linear: return linear_test(matrix, spec.H);
    case DetectorKind::scan: return scan_test(matrix, shape, scan_threshold(shape), search, spec.mode);
    case DetectorKind::combined:
      return combined_test(matrix, shape, spec.H, scan_threshold(shape), search, spec.mode);
    case DetectorKind::adaptive:
      return adaptive_scan_test(matrix, spec.grid ? *spec.grid : AdaptiveGrid::dyadic(shape.N(), shape.M()), search,
                                spec.mode);
    case DetectorKind::rectangle: return rectangle_scan_test(matrix, shape, spec.eta);
    case DetectorKind::high_criticism: return high_criticism_test(matrix, spec.t0, spec.hc_c);
    case DetectorKind::studentized:
      return studentized_combined_test(matrix, shape, spec.H, spec.delta, search, spec.mode);
    case DetectorKind::expfam:
      if (!spec.law) throw DetectionError(ErrorKind::InvalidArgument, "expfam detector needs a law");
      return expfam_combined_test(matrix, *spec.law, shape, spec.H, spec.delta, search, spec.mode);
    case DetectorKind::two_sided:
      return two_sided_test(matrix, shape, TwoSidedConfig{spec.H, spec.delta}, search, spec.mode);
  }
  throw DetectionError(ErrorKind::InvalidArgument, "unhandled detector");
}

TestReport apply_threshold(TestReport report, DetectorKind kind, double threshold, const std::string& source) {
  report.threshold_source = source;
  if (has_linear_component(kind)) {
    ComponentResult& lin = report.components.at(0);
    ComponentResult& scan = report.components.at(1);
    scan.threshold = threshold;
    scan.reject = scan.statistic > threshold;
    report.statistic = std::max(lin.statistic - lin.threshold, scan.statistic - threshold);
    report.threshold = 0.0;
  } else {
    report.threshold = threshold;
  }
  report.reject = report.statistic > report.threshold;
  return report;
}

SearchConfig seeded(const SearchConfig& base, std::uint64_t seed) {
  SearchConfig cfg = base;
  cfg.seed = seed;
  cfg.workers = 1;
  return cfg;
}

}  // namespace

TestReport run_detector(const DetectorSpec& spec, const ObservationMatrix& matrix, const ProblemShape& shape,
                        std::uint64_t search_seed) {
  TestReport report = run_analytic(spec, matrix, shape, seeded(spec.search, search_seed));
  if (spec.threshold_override) {
    return apply_threshold(std::move(report), spec.kind, *spec.threshold_override, spec.threshold_source);
  }
  return report;
}

double calibration_statistic(const DetectorSpec& spec, const ObservationMatrix& matrix, const ProblemShape& shape,
                             std::uint64_t search_seed) {
  const TestReport report = run_analytic(spec, matrix, shape, seeded(spec.search, search_seed));
  return has_linear_component(spec.kind) ? report.components.at(1).statistic : report.statistic;
}

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

double empirical_quantile(std::vector<double> values, double alpha) {
  if (values.empty()) throw DetectionError(ErrorKind::InvalidArgument, "no values to take a quantile of");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DetectionError(ErrorKind::OutOfRange, "alpha must lie in (0, 1]");
  const double count = static_cast<double>(values.size());
  // Guard the ceiling against (1 - alpha) * count landing a hair above an integer.
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * count - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1), values.end());
  return values[rank - 1];
}

double calibrate_threshold(const DetectorSpec& spec, const ProblemShape& shape, const NoiseModel& noise,
                           std::size_t samples, double alpha, std::uint64_t seed, unsigned workers) {
  if (samples < 20) throw DetectionError(ErrorKind::InvalidArgument, "calibration needs at least 20 samples");
  std::vector<double> stats(samples);
  parallel_for(samples, workers, [&](std::size_t i) {
    const ObservationMatrix null = generate_null(shape.N(), shape.M(), noise, derive_seed(seed, kTagCalibrationData, i));
    stats[i] = calibration_statistic(spec, null, shape, derive_seed(seed, kTagCalibrationSearch, i));
  });
  return empirical_quantile(std::move(stats), alpha);
}

// ---------------------------------------------------------------------------
// Power
// ---------------------------------------------------------------------------

void ExperimentPlan::validate() const {
  if (replications < 1) throw DetectionError(ErrorKind::InvalidArgument, "replications L must be >= 1");
  if (amplitudes.empty()) throw DetectionError(ErrorKind::InvalidArgument, "amplitude grid is empty");
  for (std::size_t k = 0; k < amplitudes.size(); ++k) {
    if (!(amplitudes[k] >= 0.0) || !std::isfinite(amplitudes[k])) {
      throw DetectionError(ErrorKind::InvalidArgument, "amplitudes must be finite and >= 0");
    }
    if (k > 0 && !(amplitudes[k] > amplitudes[k - 1])) {
      throw DetectionError(ErrorKind::InvalidArgument, "amplitude grid must be strictly increasing");
    }
  }
  if (!(alpha_target > 0.0 && alpha_target < 1.0)) {
    throw DetectionError(ErrorKind::OutOfRange, "alpha_target must lie in (0, 1)");
  }
  if (calibration_samples != 0 && calibration_samples < 20) {
    throw DetectionError(ErrorKind::InvalidArgument, "calibration needs at least 20 samples");
  }
  const bool gaussian = std::holds_alternative<GaussianNoise>(noise);
  if (gaussian != (scale == AmplitudeScale::additive)) {
    throw DetectionError(ErrorKind::InvalidArgument,
                         "additive amplitudes go with Gaussian noise; theta/canonical shifts with a law");
  }
  if (!gaussian && sidedness == Sidedness::two_sided) {
    throw DetectionError(ErrorKind::InvalidArgument, "two-sided planting is defined for Gaussian noise only");
  }
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {};
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (phat + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  return {std::max(0.0, std::min(centre - half, phat)), std::min(1.0, std::max(centre + half, phat))};
}

namespace {

struct Replicate {
  bool reject = false;
  double statistic = 0.0;
};

SubmatrixSupport planted_support(const ExperimentPlan& plan, std::uint64_t seed) {
  const ProblemShape& s = plan.shape;
  if (plan.placement == Placement::upper_left) return SubmatrixSupport::block(0, s.n(), 0, s.m());
  Philox4x32 rng(seed, 1);
  auto rows = sample_without_replacement(rng, s.N(), s.n());
  auto cols = sample_without_replacement(rng, s.M(), s.m());
  return {std::move(rows), std::move(cols)};
}

}  // namespace

PowerCurve estimate_power(const ExperimentPlan& plan) {
  plan.validate();
  const ProblemShape& shape = plan.shape;

  PowerCurve curve;
  curve.detector = to_string(plan.detector.kind);
  curve.shape = shape;
  curve.seed = plan.seed;
  if (shape.n() < shape.N() && shape.m() < shape.M()) curve.boundary = detection_boundary(shape);

  DetectorSpec detector = plan.detector;
  if (plan.calibration_samples > 0) {
    const double t = calibrate_threshold(detector, shape, plan.noise, plan.calibration_samples, plan.alpha_target,
                                         plan.seed, plan.workers);
    detector.threshold_override = t;
    detector.threshold_source = "empirical";
    curve.calibrated_threshold = t;
  }
  curve.threshold_source = detector.threshold_override ? detector.threshold_source : "analytic";

  const std::size_t L = plan.replications;
  const std::size_t tasks = plan.amplitudes.size() * L;
  std::vector<Replicate> results(tasks);

  // Replication r reuses the same noise, placement and search streams at
  // every amplitude (common random numbers across the grid).
  parallel_for(tasks, plan.workers, [&](std::size_t t) {
    const std::size_t k = t / L;
    const std::size_t r = t % L;
    const double a = plan.amplitudes[k];
    const std::uint64_t data_seed = derive_seed(plan.seed, kTagPowerData, r);
    const std::uint64_t plant_seed = derive_seed(plan.seed, kTagPowerPlant, r);
    ObservationMatrix Y = generate_null(shape.N(), shape.M(), plan.noise, data_seed);
    if (a > 0.0) {
      SubmatrixSupport support = planted_support(plan, plant_seed);
      if (const auto* law = std::get_if<LawDescriptor>(&plan.noise)) {
        const double theta1 = plan.scale == AmplitudeScale::theta_shift ? law->theta0() + a
                                                                        : law->theta_for_canonical_shift(a);
        Y = plant_law_signal(Y, *law, support, theta1, plant_seed);
      } else if (plan.sidedness == Sidedness::two_sided) {
        Philox4x32 rng(plant_seed, 2);
        Y = plant_signal(Y, random_sign_signal(std::move(support), a, rng));
      } else {
        Y = plant_signal(Y, SignalSpec::constant(std::move(support), a));
      }
    }
    const TestReport report = run_detector(detector, Y, shape, derive_seed(plan.seed, kTagPowerSearch, r));
    results[t] = {report.reject, report.statistic};
  });

  for (std::size_t k = 0; k < plan.amplitudes.size(); ++k) {
    PowerPoint point;
    point.amplitude = plan.amplitudes[k];
    point.replications = L;
    double stat_sum = 0.0;
    for (std::size_t r = 0; r < L; ++r) {
      const Replicate& rep = results[k * L + r];
      point.rejections += rep.reject ? 1 : 0;
      stat_sum += rep.statistic;
    }
    point.power = static_cast<double>(point.rejections) / static_cast<double>(L);
    const WilsonInterval ci = wilson_interval(point.rejections, L);
    point.ci_lo = ci.lo;
    point.ci_hi = ci.hi;
    point.mean_statistic = stat_sum / static_cast<double>(L);
    if (const auto* law = std::get_if<LawDescriptor>(&plan.noise)) {
      const double a = point.amplitude;
      const double theta1 = plan.scale == AmplitudeScale::theta_shift ? law->theta0() + a
                                                                      : law->theta_for_canonical_shift(a);
      point.mean_shift = law->standardized_mean(theta1);
      point.canonical_shift = law->canonical_shift(theta1);
    } else {
      point.mean_shift = point.amplitude / std::get<GaussianNoise>(plan.noise).sigma;
      point.canonical_shift = point.mean_shift;
    }
    curve.points.push_back(point);
  }
  return curve;
}

void write_power_csv(std::ostream& out, const PowerCurve& curve) {
  out << "detector,N,M,n,m,a,a_star,power,ci_lo,ci_hi,reps,seed\n";
  const std::string a_star = curve.boundary ? format_double(curve.boundary->a_star) : "NA";
  for (const PowerPoint& p : curve.points) {
    out << curve.detector << ',' << curve.shape.N() << ',' << curve.shape.M() << ',' << curve.shape.n() << ','
        << curve.shape.m() << ',' << format_double(p.amplitude) << ',' << a_star << ',' << format_double(p.power)
        << ',' << format_double(p.ci_lo) << ',' << format_double(p.ci_hi) << ',' << p.replications << ','
        << curve.seed << '\n';
  }
}

// ---------------------------------------------------------------------------
// Heuristic vs exact
// ---------------------------------------------------------------------------

bool OracleComparison::matches() const noexcept {
  return std::abs(heuristic_score - exact_score) <= 1e-12 * (1.0 + std::abs(exact_score));
}

std::vector<OracleComparison> oracle_compare(const ProblemShape& shape, std::size_t count, const SearchConfig& search,
                                             std::uint64_t seed, unsigned workers) {
  std::vector<OracleComparison> rows(count);
  parallel_for(count, workers, [&](std::size_t i) {
    const ObservationMatrix Y = generate_null(shape.N(), shape.M(), GaussianNoise{}, derive_seed(seed, kTagOracleData, i));
    const SearchResult heuristic = alternating_search(Y, shape, seeded(search, search.seed + i));
    const SearchResult exact = brute_force_max(Y, shape);
    rows[i] = {i, heuristic.score, exact.score};
  });
  return rows;
}

// ---------------------------------------------------------------------------
// Likelihood ratio
// ---------------------------------------------------------------------------

double log_exact_likelihood_ratio(const ObservationMatrix& matrix, const ProblemShape& shape, double a, double budget) {
  if (!(a >= 0.0) || !std::isfinite(a)) throw DetectionError(ErrorKind::InvalidArgument, "amplitude must be >= 0");
  // b Y_C = a * block_sum, so the terms are -b^2/2 + a * block_sum.
  const double b2 = a * a * static_cast<double>(shape.n()) * static_cast<double>(shape.m());
  double shift = -std::numeric_limits<double>::infinity();
  double scaled_sum = 0.0;
  double count = 0.0;
  enumerate_supports(matrix, shape, budget,
                     [&](std::span<const std::size_t>, std::span<const std::size_t>, double block_sum) {
                       const double term = a * block_sum;
                       count += 1.0;
                       if (term > shift) {
                         scaled_sum = scaled_sum * std::exp(shift - term) + 1.0;
                         shift = term;
                       } else {
                         scaled_sum += std::exp(term - shift);
                       }
                     });
  return -0.5 * b2 + shift + std::log(scaled_sum) - std::log(count);
}

double exact_likelihood_ratio(const ObservationMatrix& matrix, const ProblemShape& shape, double a, double budget) {
  return std::exp(log_exact_likelihood_ratio(matrix, shape, a, budget));
}

ProbeSummary indistinguishability_probe(const ProblemShape& shape, double a, std::size_t reps, std::uint64_t seed,
                                        double epsilon, unsigned workers) {
  if (reps < 2) throw DetectionError(ErrorKind::InvalidArgument, "probe needs at least 2 replications");
  check_enumeration_budget(shape, kDefaultEnumerationBudget);
  std::vector<double> values(reps);
  parallel_for(reps, workers, [&](std::size_t i) {
    const ObservationMatrix Y = generate_null(shape.N(), shape.M(), GaussianNoise{}, derive_seed(seed, kTagProbeData, i));
    values[i] = exact_likelihood_ratio(Y, shape, a);
  });

  ProbeSummary summary;
  summary.reps = reps;
  summary.epsilon = epsilon;
  double sum = 0.0;
  std::size_t within = 0;
  for (double v : values) {
    sum += v;
    within += std::abs(v - 1.0) <= epsilon ? 1 : 0;
  }
  summary.mean = sum / static_cast<double>(reps);
  double ss = 0.0;
  for (double v : values) ss += (v - summary.mean) * (v - summary.mean);
  summary.variance = ss / static_cast<double>(reps - 1);
  summary.fraction_within = static_cast<double>(within) / static_cast<double>(reps);
  return summary;
}

}  // namespace subdetect
