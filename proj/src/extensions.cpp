#include "subdetect/extensions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace subdetect {

// ---------------------------------------------------------------------------
// Unknown variance
// ---------------------------------------------------------------------------

double VarianceEstimate::sigma_hat() const { return std::sqrt(sigma2_hat); }

VarianceEstimate estimate_variance(const ObservationMatrix& matrix) {
  double sum = 0.0;
  for (double v : matrix.entries()) sum += v * v;
  if (sum == 0.0) throw DetectionError(ErrorKind::AllZero, "cannot estimate the variance of a zero matrix");
  return VarianceEstimate{sum / static_cast<double>(matrix.size())};
}

TestReport studentized_combined_test(const ObservationMatrix& matrix, const ProblemShape& shape, double H,
                                     double delta, const SearchConfig& cfg, ScanMode mode) {
  validate_shape(matrix, shape);
  const double sigma = estimate_variance(matrix).sigma_hat();
  const ObservationMatrix scaled = matrix.map([sigma](double v) { return v / sigma; });
  TestReport report = combined_test(scaled, shape, H, scan_threshold(shape, delta), cfg, mode);
  report.detector_name = "studentized";
  return report;
}

// ---------------------------------------------------------------------------
// Exponential families
// ---------------------------------------------------------------------------

const char* to_string(Law law) noexcept {
  switch (law) {
    case Law::poisson: return "poisson";
    case Law::bernoulli: return "bernoulli";
    case Law::exponential: return "exponential";
    case Law::gaussian_variance: return "gaussian-variance";
  }
  return "unknown";
}

Law parse_law(std::string_view name) {
  for (Law law : {Law::poisson, Law::bernoulli, Law::exponential, Law::gaussian_variance}) {
    if (name == to_string(law)) return law;
  }
  throw DetectionError(ErrorKind::InvalidArgument, "unknown law '" + std::string(name) + "'");
}

LawDescriptor::LawDescriptor(Law law, double theta0) : law_(law), theta0_(theta0) {
  if (!in_domain(theta0)) {
    std::ostringstream msg;
    msg << "theta0 = " << theta0 << " is outside the parameter domain of " << to_string(law);
    throw DetectionError(ErrorKind::OutOfRange, msg.str());
  }
}

bool LawDescriptor::in_domain(double theta) const noexcept {
  if (!std::isfinite(theta)) return false;
  if (law_ == Law::bernoulli) return theta > 0.0 && theta < 1.0;
  return theta > 0.0;
}

namespace {

void require_domain(const LawDescriptor& law, double theta) {
  if (!law.in_domain(theta)) {
    std::ostringstream msg;
    msg << "theta = " << theta << " is outside the parameter domain of " << to_string(law.law());
    throw DetectionError(ErrorKind::OutOfRange, msg.str());
  }
}

}  // namespace

double LawDescriptor::eta(double theta) const {
  require_domain(*this, theta);
  switch (law_) {
    case Law::poisson: return std::log(theta);
    case Law::bernoulli: return std::log(theta / (1.0 - theta));
    case Law::exponential: return -1.0 / theta;
    case Law::gaussian_variance: return -1.0 / (2.0 * theta * theta);
  }
  return 0.0;
}

double LawDescriptor::eta_prime(double theta) const {
  require_domain(*this, theta);
  switch (law_) {
    case Law::poisson: return 1.0 / theta;
    case Law::bernoulli: return 1.0 / (theta * (1.0 - theta));
    case Law::exponential: return 1.0 / (theta * theta);
    case Law::gaussian_variance: return 1.0 / (theta * theta * theta);
  }
  return 0.0;
}

double LawDescriptor::theta_from_eta(double eta) const {
  double theta = 0.0;
  switch (law_) {
    case Law::poisson: theta = std::exp(eta); break;
    case Law::bernoulli: theta = 1.0 / (1.0 + std::exp(-eta)); break;
    case Law::exponential: theta = -1.0 / eta; break;
    case Law::gaussian_variance: theta = std::sqrt(-1.0 / (2.0 * eta)); break;
  }
  require_domain(*this, theta);
  return theta;
}

double LawDescriptor::mean_of_statistic(double theta) const {
  require_domain(*this, theta);
  return law_ == Law::gaussian_variance ? theta * theta : theta;
}

double LawDescriptor::sigma0() const {
  const double t = theta0_;
  switch (law_) {
    case Law::poisson: return std::sqrt(t);
    case Law::bernoulli: return std::sqrt(t * (1.0 - t));
    case Law::exponential: return t;
    // Var(X^2) = 2 theta^4 under N(0, theta^2).
    case Law::gaussian_variance: return std::numbers::sqrt2 * t * t;
  }
  return 0.0;
}

double LawDescriptor::natural_log_partition(double eta) const {
  switch (law_) {
    case Law::poisson: return std::exp(eta);
    case Law::bernoulli: return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
    case Law::exponential:
      if (!(eta < 0.0)) throw DetectionError(ErrorKind::OutOfRange, "exponential natural parameter must be < 0");
      return -std::log(-eta);
    case Law::gaussian_variance:
      if (!(eta < 0.0)) throw DetectionError(ErrorKind::OutOfRange, "N(0, theta^2) natural parameter must be < 0");
      return -0.5 * std::log(-2.0 * eta);
  }
  return 0.0;
}

double LawDescriptor::log_partition(double s) const {
  const double sd = sigma0();
  return natural_log_partition(s / sd) - s * m0() / sd;
}

double LawDescriptor::theta_for_canonical_shift(double a) const {
  return theta_from_eta(eta(theta0_) + a / sigma0());
}

bool LawDescriptor::in_support(double x) const noexcept {
  if (!std::isfinite(x)) return false;
  switch (law_) {
    case Law::poisson: return x > -1e-9 && std::abs(x - std::round(x)) <= 1e-9;
    case Law::bernoulli: return std::abs(x) <= 1e-9 || std::abs(x - 1.0) <= 1e-9;
    case Law::exponential: return x > 0.0;
    case Law::gaussian_variance: return true;
  }
  return false;
}

double LawDescriptor::sufficient_statistic(double x) const noexcept {
  switch (law_) {
    case Law::poisson:
    case Law::bernoulli: return std::round(x);
    case Law::exponential: return x;
    case Law::gaussian_variance: return x * x;
  }
  return x;
}

double LawDescriptor::invert_sufficient_statistic(double t) const {
  if (law_ == Law::gaussian_variance) {
    throw DetectionError(ErrorKind::InvalidArgument, "T(x) = x^2 is not invertible");
  }
  return t;
}

ObservationMatrix standardize_observations(const ObservationMatrix& raw, const LawDescriptor& law) {
  const double m0 = law.m0();
  const double sd = law.sigma0();
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    const auto row = raw.row(i);
    for (std::size_t j = 0; j < raw.cols(); ++j) {
      if (!law.in_support(row[j])) {
        std::ostringstream msg;
        msg << "value " << row[j] << " at row " << i + 1 << ", column " << j + 1 << " is outside the support of "
            << to_string(law.law());
        throw DetectionError(ErrorKind::SupportViolation, msg.str());
      }
      out[i * raw.cols() + j] = (law.sufficient_statistic(row[j]) - m0) / sd;
    }
  }
  return ObservationMatrix(raw.rows(), raw.cols(), std::move(out));
}

double fisher_boundary(const LawDescriptor& law, const ProblemShape& shape) {
  return detection_boundary(shape).a_star / law.sqrt_fisher();
}

TestReport expfam_combined_test(const ObservationMatrix& raw, const LawDescriptor& law, const ProblemShape& shape,
                                double H, double delta, const SearchConfig& cfg, ScanMode mode) {
  validate_shape(raw, shape);
  const ObservationMatrix standardized = standardize_observations(raw, law);
  TestReport report = combined_test(standardized, shape, H, scan_threshold(shape, delta), cfg, mode);
  report.detector_name = std::string("expfam-") + to_string(law.law());
  return report;
}

// ---------------------------------------------------------------------------
// Two-sided
// ---------------------------------------------------------------------------

void TwoSidedConfig::validate() const {
  if (!(delta > 0.0)) throw DetectionError(ErrorKind::InvalidArgument, "two-sided inflation delta must be > 0");
}

double two_sided_linear(const ObservationMatrix& matrix) noexcept {
  double sum = 0.0;
  for (double v : matrix.entries()) sum += v * v - 1.0;
  return sum / std::sqrt(2.0 * static_cast<double>(matrix.size()));
}

ObservationMatrix two_sided_transform(const ObservationMatrix& matrix) {
  return matrix.map([](double v) { return (v * v - 1.0) / std::numbers::sqrt2; });
}

TestReport two_sided_test(const ObservationMatrix& matrix, const ProblemShape& shape, const TwoSidedConfig& config,
                          const SearchConfig& cfg, ScanMode mode) {
  validate_shape(matrix, shape);
  config.validate();
  const double z_lin = two_sided_linear(matrix);
  SearchResult found = scan_maximum(two_sided_transform(matrix), shape, cfg, mode);
  const double T = scan_threshold(shape, config.delta);

  TestReport report = make_report("two_sided", std::max(z_lin - config.H, found.score - T), 0.0);
  report.located_support = std::move(found.support);
  report.components = {{"z_lin", z_lin, config.H, z_lin > config.H}, {"z_max", found.score, T, found.score > T}};
  return report;
}

}  // namespace subdetect
