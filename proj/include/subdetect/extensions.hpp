#pragma once
// Detector variants beyond known-variance Gaussian noise: studentised tests
// for unknown variance, reduction of one-parameter exponential families to
// standardised observations, and chi-square type tests for two-sided signals.

#include <string_view>

#include "subdetect/combinatorics.hpp"
#include "subdetect/core_model.hpp"
#include "subdetect/detectors.hpp"
#include "subdetect/search.hpp"

namespace subdetect {

// --- unknown variance -----------------------------------------------------

struct VarianceEstimate {
  double sigma2_hat = 0.0;  // (1/NM) sum Y_ij^2
  [[nodiscard]] double sigma_hat() const;
};

/// Mean of squares; throws AllZero for the zero matrix.
[[nodiscard]] VarianceEstimate estimate_variance(const ObservationMatrix& matrix);

/// psi* on Y / sigma_hat, scan threshold sqrt((2 + delta) ln G).
[[nodiscard]] TestReport studentized_combined_test(const ObservationMatrix& matrix, const ProblemShape& shape,
                                                   double H, double delta, const SearchConfig& cfg,
                                                   ScanMode mode = ScanMode::heuristic);

// --- exponential families -------------------------------------------------

enum class Law { poisson, bernoulli, exponential, gaussian_variance };

[[nodiscard]] const char* to_string(Law law) noexcept;
/// "poisson", "bernoulli", "exponential", "gaussian-variance".
[[nodiscard]] Law parse_law(std::string_view name);

/// One-parameter family g_theta(x) = exp(eta(theta) T(x) - C(theta)) h(x),
/// linearised at theta0. Poisson(theta), Bernoulli(theta), Exponential with
/// mean theta, and N(0, theta^2) with T(x) = x^2.
class LawDescriptor {
public:
  LawDescriptor(Law law, double theta0);

  [[nodiscard]] Law law() const noexcept { return law_; }
  [[nodiscard]] double theta0() const noexcept { return theta0_; }

  [[nodiscard]] bool in_domain(double theta) const noexcept;
  [[nodiscard]] double eta(double theta) const;
  [[nodiscard]] double eta_prime(double theta) const;
  [[nodiscard]] double theta_from_eta(double eta) const;

  /// E_theta T(X).
  [[nodiscard]] double mean_of_statistic(double theta) const;

  [[nodiscard]] double m0() const { return mean_of_statistic(theta0_); }
  /// Standard deviation of T(X) at theta0.
  [[nodiscard]] double sigma0() const;
  /// sqrt(I(theta0)) = sigma0 * eta'(theta0).
  [[nodiscard]] double sqrt_fisher() const { return sigma0() * eta_prime(theta0_); }

  /// B(eta) = log integral exp(eta T(x)) h(x) dmu(x).
  [[nodiscard]] double natural_log_partition(double eta) const;
  /// Cumulant function of Y = (T(X) - m0)/sigma0: A(s) = B(s/sigma0) - s m0/sigma0.
  [[nodiscard]] double log_partition(double s) const;
  /// Canonical parameter of the standardised family at theta0.
  [[nodiscard]] double s0() const { return eta(theta0_) * sigma0(); }

  /// Canonical shift a = s - s0 produced by moving theta0 to theta.
  [[nodiscard]] double canonical_shift(double theta) const { return (eta(theta) - eta(theta0_)) * sigma0(); }
  [[nodiscard]] double theta_for_canonical_shift(double a) const;
  /// E_theta of the standardised observation, i.e. A'(s0 + a).
  [[nodiscard]] double standardized_mean(double theta) const { return (mean_of_statistic(theta) - m0()) / sigma0(); }

  /// Whether x is a possible observation (integer checks with tolerance 1e-9).
  [[nodiscard]] bool in_support(double x) const noexcept;
  /// T(x); integer-valued laws use the rounded value.
  [[nodiscard]] double sufficient_statistic(double x) const noexcept;
  /// Inverse of T where T is one-to-one on the support (not gaussian_variance).
  [[nodiscard]] double invert_sufficient_statistic(double t) const;

private:
  Law law_;
  double theta0_;
};

/// (T(x) - m0) / sigma0 elementwise; throws SupportViolation naming the cell.
[[nodiscard]] ObservationMatrix standardize_observations(const ObservationMatrix& raw, const LawDescriptor& law);

/// d* = a* / sqrt(I(theta0)).
[[nodiscard]] double fisher_boundary(const LawDescriptor& law, const ProblemShape& shape);

/// psi* on standardised observations with scan threshold sqrt((2 + delta) ln G).
[[nodiscard]] TestReport expfam_combined_test(const ObservationMatrix& raw, const LawDescriptor& law,
                                              const ProblemShape& shape, double H, double delta,
                                              const SearchConfig& cfg, ScanMode mode = ScanMode::heuristic);

// --- two-sided ------------------------------------------------------------

struct TwoSidedConfig {
  double H = 2.3262;  // z_lin is N(0, 1) under the null
  double delta = kDefaultInflation;
  void validate() const;
};

/// z_lin = sum (Y_ij^2 - 1) / sqrt(2NM).
[[nodiscard]] double two_sided_linear(const ObservationMatrix& matrix) noexcept;

/// W_ij = (Y_ij^2 - 1)/sqrt(2); Z_C is then the block score of W.
[[nodiscard]] ObservationMatrix two_sided_transform(const ObservationMatrix& matrix);

/// max(psi_lin^z, psi_max^z) with scan threshold sqrt((2 + delta) ln G).
[[nodiscard]] TestReport two_sided_test(const ObservationMatrix& matrix, const ProblemShape& shape,
                                        const TwoSidedConfig& config, const SearchConfig& cfg,
                                        ScanMode mode = ScanMode::heuristic);

}  // namespace subdetect
