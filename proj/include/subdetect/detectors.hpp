#pragma once
// Known-variance Gaussian detectors: linear, scan, combined, adaptive scan,
// rectangle-grid scan and higher criticism.

#include <cstddef>
#include <utility>
#include <vector>

#include "subdetect/core_model.hpp"
#include "subdetect/search.hpp"

namespace subdetect {

/// Standard normal CDF.
[[nodiscard]] double normal_cdf(double x) noexcept;
/// Phi^{-1}(1 - alpha), alpha in (0, 1).
[[nodiscard]] double normal_upper_quantile(double alpha);

/// How the scan maximum t_max is obtained.
enum class ScanMode { heuristic, exact };

// --- linear ---------------------------------------------------------------

/// t_lin = sum_ij Y_ij / sqrt(NM).
[[nodiscard]] double linear_statistic(const ObservationMatrix& matrix) noexcept;
[[nodiscard]] TestReport linear_test(const ObservationMatrix& matrix, double H);

// --- scan -----------------------------------------------------------------

/// t_max by the alternating heuristic or by full enumeration.
[[nodiscard]] SearchResult scan_maximum(const ObservationMatrix& matrix, const ProblemShape& shape,
                                        const SearchConfig& cfg, ScanMode mode,
                                        double budget = kDefaultEnumerationBudget);

[[nodiscard]] TestReport scan_test(const ObservationMatrix& matrix, const ProblemShape& shape, double threshold,
                                   const SearchConfig& cfg, ScanMode mode,
                                   std::string threshold_source = "analytic");

/// psi* = max(psi_lin_H, psi_max_T). The report statistic is the larger of
/// the two margins t_lin - H and t_max - T against threshold 0.
[[nodiscard]] TestReport combined_test(const ObservationMatrix& matrix, const ProblemShape& shape, double H,
                                       double T, const SearchConfig& cfg, ScanMode mode = ScanMode::heuristic,
                                       std::string threshold_source = "analytic");

// --- adaptive -------------------------------------------------------------

/// Candidate (n, m) sizes for an N x M matrix; stored in lexicographic order.
class AdaptiveGrid {
public:
  AdaptiveGrid(std::size_t N, std::size_t M, std::vector<std::pair<std::size_t, std::size_t>> pairs);

  /// Powers of two n = 2^i, m = 2^j with n <= N/4, m <= M/4 and
  /// ln N / (n ln(N/n)) <= 1/2 (likewise for m), a finite-size stand-in for
  /// the requirement that this ratio vanish.
  static AdaptiveGrid dyadic(std::size_t N, std::size_t M);

  [[nodiscard]] std::size_t N() const noexcept { return N_; }
  [[nodiscard]] std::size_t M() const noexcept { return M_; }
  [[nodiscard]] const std::vector<std::pair<std::size_t, std::size_t>>& pairs() const noexcept { return pairs_; }

private:
  std::size_t N_;
  std::size_t M_;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
};

/// t_NM = max over the grid of t_max(n, m) / V_nm; rejects when t_NM > 1.
[[nodiscard]] TestReport adaptive_scan_test(const ObservationMatrix& matrix, const AdaptiveGrid& grid,
                                            const SearchConfig& cfg, ScanMode mode = ScanMode::heuristic);

// --- rectangles -----------------------------------------------------------

/// Anchors of the contiguous n x m blocks scanned by the rectangle test:
/// offsets 0, s, 2s, ... with s = max(1, floor(n eta)), stopping at the first
/// offset >= N - n(1 + eta).
struct RectangleGrid {
  double eta = 0.0;
  std::vector<std::size_t> row_anchors;  // n_1 .. n_K
  std::vector<std::size_t> col_anchors;  // m_1 .. m_L

  static RectangleGrid build(const ProblemShape& shape, double eta);
};

/// Z = max over anchored blocks of the block score; threshold sqrt(2 ln(KL)).
[[nodiscard]] TestReport rectangle_scan_test(const ObservationMatrix& matrix, const ProblemShape& shape,
                                             double eta);

// --- higher criticism -----------------------------------------------------

inline constexpr double kDefaultHcStart = 0.5;
inline constexpr double kDefaultHcConstant = 2.5;

/// sqrt(c ln ln(P)).
[[nodiscard]] double high_criticism_threshold(std::size_t cell_count, double c);

/// L(t) = sum(1{Y > t} - Phi(-t)) / sqrt(P Phi(t) Phi(-t)) maximised over
/// t0 and the distinct observed values above t0.
[[nodiscard]] TestReport high_criticism_test(const ObservationMatrix& matrix, double t0 = kDefaultHcStart,
                                             double c = kDefaultHcConstant);

}  // namespace subdetect
