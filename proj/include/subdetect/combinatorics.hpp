#pragma once
// Log-combinatorial counts, detection thresholds and closed-form detection
// boundaries.

#include <cstdint>

#include "subdetect/core_model.hpp"

namespace subdetect {

/// Default inflation used by the unknown-variance, exponential-family and
/// two-sided scan thresholds sqrt((2 + delta) log G).
inline constexpr double kDefaultInflation = 0.1;

/// ln C(n, k). Throws OutOfRange when k > n.
[[nodiscard]] double log_binomial(std::uint64_t n, std::uint64_t k);

/// ln G_nm = ln C(N, n) + ln C(M, m), the log number of n x m submatrices.
[[nodiscard]] double log_submatrix_count(const ProblemShape& shape);

/// sqrt((2 + delta) ln G_nm). delta = 0 is the known-variance Gaussian threshold.
[[nodiscard]] double scan_threshold(const ProblemShape& shape, double delta = 0.0);

/// V_nm = sqrt(2 ln(N M G_nm)), the per-size threshold of the adaptive scan.
[[nodiscard]] double adaptive_threshold(const ProblemShape& shape);

enum class Regime { dense, sparse };

[[nodiscard]] const char* to_string(Regime regime) noexcept;

struct BoundaryReport {
  double dense_term = 0.0;   // 1 / sqrt(n m p q)
  double sparse_term = 0.0;  // sqrt(2 (n ln 1/p + m ln 1/q) / (n m))
  double a_star = 0.0;       // min of the two
  Regime regime = Regime::dense;
};

/// Sharp detection boundary for the n x m submatrix problem. Requires p < 1
/// and q < 1 (DegenerateShape otherwise). Ties report the dense regime.
[[nodiscard]] BoundaryReport detection_boundary(const ProblemShape& shape);

/// phi(beta) for the unstructured sparse-vector boundary, beta in (1/2, 1).
[[nodiscard]] double phi_beta(double beta);

/// beta = 1 - ln(nm) / ln(NM).
[[nodiscard]] double sparsity_exponent(const ProblemShape& shape);

/// phi(beta) sqrt(ln(NM)); throws DenseRegime when beta <= 1/2.
[[nodiscard]] double no_structure_boundary(const ProblemShape& shape);

/// sqrt(2 (ln 1/p + ln 1/q) / (n m)), the boundary for contiguous rectangles.
[[nodiscard]] double rectangle_boundary(const ProblemShape& shape);

}  // namespace subdetect
