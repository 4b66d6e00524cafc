#pragma once
// Maximisation of the normalised block sum Y_C = sum_{C} Y_ij / sqrt(nm)
// over all n x m product supports C.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "subdetect/core_model.hpp"

namespace subdetect {

inline constexpr double kDefaultEnumerationBudget = 1e7;

enum class TieBreak { lowest_index_first };

struct SearchConfig {
  std::size_t restarts = 1000;       // K
  std::size_t max_iterations = 1000; // per restart; a guard, never reached in practice
  std::uint64_t seed = 0;
  TieBreak tie_break = TieBreak::lowest_index_first;
  unsigned workers = 1;              // 0 = all hardware threads

  void validate() const;
};

struct SearchResult {
  SubmatrixSupport support;
  double score = 0.0;
  std::size_t restarts_used = 0;
  bool converged = true;  // every restart stopped before the iteration guard
};

/// Y_C for the given support. Throws IndexOutOfBounds.
[[nodiscard]] double submatrix_score(const ObservationMatrix& matrix, const SubmatrixSupport& support);

/// Indices of the k largest values, ties resolved towards the lower index,
/// returned in increasing index order.
[[nodiscard]] std::vector<std::size_t> top_k_indices(std::span<const double> values, std::size_t k);

/// One restart of the alternating heuristic from a given row set.
struct ClimbTrace {
  SubmatrixSupport support;
  double score = 0.0;
  std::vector<double> block_sums;  // block sum after each full (columns, rows) step
  std::size_t iterations = 0;
  bool converged = false;
};

[[nodiscard]] ClimbTrace alternating_climb(const ObservationMatrix& matrix, const ProblemShape& shape,
                                           std::vector<std::size_t> initial_rows,
                                           std::size_t max_iterations);

/// K random restarts of the alternating heuristic; best score wins, ties go
/// to the lowest restart index. Deterministic in cfg.seed for any worker count.
[[nodiscard]] SearchResult alternating_search(const ObservationMatrix& matrix, const ProblemShape& shape,
                                              const SearchConfig& cfg);

/// C(N, n) * C(M, m) as a double (exact below 2^53).
[[nodiscard]] double support_count(const ProblemShape& shape);

/// Throws BudgetExceeded when the number of supports is above `budget`.
void check_enumeration_budget(const ProblemShape& shape, double budget);

/// Visits every support in lexicographic (rows, then columns) order with its
/// block sum (not normalised).
using SupportVisitor =
    std::function<void(std::span<const std::size_t> rows, std::span<const std::size_t> cols, double block_sum)>;

void enumerate_supports(const ObservationMatrix& matrix, const ProblemShape& shape, double budget,
                        const SupportVisitor& visit);

/// Exact maximiser by enumeration; ties go to the lexicographically first support.
[[nodiscard]] SearchResult brute_force_max(const ObservationMatrix& matrix, const ProblemShape& shape,
                                           double budget = kDefaultEnumerationBudget);

}  // namespace subdetect
