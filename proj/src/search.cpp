#include "subdetect/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "subdetect/parallel.hpp"
#include "subdetect/random.hpp"

namespace subdetect {

void SearchConfig::validate() const {
  if (restarts < 1) throw DetectionError(ErrorKind::InvalidArgument, "restarts K must be >= 1");
  if (max_iterations < 1) {
    throw DetectionError(ErrorKind::InvalidArgument, "max_iterations must be >= 1");
  }
}

double submatrix_score(const ObservationMatrix& matrix, const SubmatrixSupport& support) {
  support.check_within(matrix.rows(), matrix.cols());
  double sum = 0.0;
  for (std::size_t i : support.rows()) {
    const auto row = matrix.row(i);
    for (std::size_t j : support.cols()) sum += row[j];
  }
  return sum / std::sqrt(static_cast<double>(support.n()) * static_cast<double>(support.m()));
}

namespace {

// Writes the k best indices into `out` (ascending); `scratch` is reused.
void select_top_k(std::span<const double> values, std::size_t k, std::vector<std::size_t>& scratch,
                  std::vector<std::size_t>& out) {
  scratch.resize(values.size());
  std::iota(scratch.begin(), scratch.end(), std::size_t{0});
  auto better = [values](std::size_t a, std::size_t b) {
    return values[a] > values[b] || (values[a] == values[b] && a < b);
  };
  if (k < scratch.size()) {
    std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     scratch.end(), better);
  }
  out.assign(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(out.begin(), out.end());
}

struct ClimbWorkspace {
  std::vector<double> col_sums;
  std::vector<double> row_sums;
  std::vector<std::size_t> scratch;
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
};

struct ClimbOutcome {
  double block_sum = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Alternates column and row selection starting from ws.rows until the block
// sum stops increasing strictly. On return ws.rows/ws.cols hold the support.
ClimbOutcome climb(const ObservationMatrix& Y, std::size_t n, std::size_t m, std::size_t max_iterations,
                   ClimbWorkspace& ws, std::vector<double>* trace) {
  const std::size_t N = Y.rows();
  const std::size_t M = Y.cols();
  ws.col_sums.assign(M, 0.0);
  ws.row_sums.assign(N, 0.0);

  ClimbOutcome outcome;
  double previous = -std::numeric_limits<double>::infinity();
  while (outcome.iterations < max_iterations) {
    ++outcome.iterations;

    std::fill(ws.col_sums.begin(), ws.col_sums.end(), 0.0);
    for (std::size_t i : ws.rows) {
      const auto row = Y.row(i);
      for (std::size_t j = 0; j < M; ++j) ws.col_sums[j] += row[j];
    }
    select_top_k(ws.col_sums, m, ws.scratch, ws.cols);

    for (std::size_t i = 0; i < N; ++i) {
      const auto row = Y.row(i);
      double s = 0.0;
      for (std::size_t j : ws.cols) s += row[j];
      ws.row_sums[i] = s;
    }
    select_top_k(ws.row_sums, n, ws.scratch, ws.rows);

    double block = 0.0;
    for (std::size_t i : ws.rows) block += ws.row_sums[i];
    if (trace) trace->push_back(block);
    outcome.block_sum = block;

    // Each half-step can only keep or raise the sum; equality (up to
    // rounding in the summation order) means a fixed point.
    const double tolerance = 1e-12 * (1.0 + std::abs(block));
    if (!(block > previous + tolerance)) {
      outcome.converged = true;
      break;
    }
    previous = block;
  }
  return outcome;
}

}  // namespace

std::vector<std::size_t> top_k_indices(std::span<const double> values, std::size_t k) {
  if (k > values.size()) throw DetectionError(ErrorKind::OutOfRange, "top_k: k exceeds size");
  std::vector<std::size_t> scratch;
  std::vector<std::size_t> out;
  if (k == 0) return out;
  select_top_k(values, k, scratch, out);
  return out;
}

ClimbTrace alternating_climb(const ObservationMatrix& matrix, const ProblemShape& shape,
                             std::vector<std::size_t> initial_rows, std::size_t max_iterations) {
  validate_shape(matrix, shape);
  // Validates ordering and bounds of the starting rows.
  SubmatrixSupport(initial_rows, {0}).check_within(shape.N(), 1);
  if (initial_rows.size() != shape.n()) {
    throw DetectionError(ErrorKind::InvalidArgument, "initial row set must have n rows");
  }
  ClimbWorkspace ws;
  ws.rows = std::move(initial_rows);
  std::vector<double> sums;
  const ClimbOutcome outcome = climb(matrix, shape.n(), shape.m(), max_iterations, ws, &sums);
  SubmatrixSupport support(ws.rows, ws.cols);
  const double score = submatrix_score(matrix, support);
  return ClimbTrace{std::move(support), score, std::move(sums), outcome.iterations, outcome.converged};
}

SearchResult alternating_search(const ObservationMatrix& matrix, const ProblemShape& shape,
                                const SearchConfig& cfg) {
  validate_shape(matrix, shape);
  cfg.validate();

  struct RestartBest {
    std::vector<std::size_t> rows;
    std::vector<std::size_t> cols;
    double score = -std::numeric_limits<double>::infinity();
    bool converged = true;
  };

  const std::size_t n = shape.n();
  const std::size_t m = shape.m();
  const double norm = std::sqrt(static_cast<double>(n) * static_cast<double>(m));

  auto run_restart = [&](std::size_t r, ClimbWorkspace& ws) {
    Philox4x32 rng(cfg.seed, r);
    ws.rows = sample_without_replacement(rng, shape.N(), n);
    const ClimbOutcome outcome = climb(matrix, n, m, cfg.max_iterations, ws, nullptr);
    // Canonical block sum so equal supports compare equal across restarts.
    double sum = 0.0;
    for (std::size_t i : ws.rows) {
      const auto row = matrix.row(i);
      for (std::size_t j : ws.cols) sum += row[j];
    }
    return RestartBest{ws.rows, ws.cols, sum / norm, outcome.converged};
  };

  RestartBest best;
  bool all_converged = true;
  auto consider = [&](RestartBest&& candidate) {
    all_converged = all_converged && candidate.converged;
    if (candidate.score > best.score) best = std::move(candidate);
  };

  const unsigned workers = resolve_workers(cfg.workers);
  if (workers <= 1 || cfg.restarts == 1) {
    ClimbWorkspace ws;
    for (std::size_t r = 0; r < cfg.restarts; ++r) consider(run_restart(r, ws));
  } else {
    std::vector<RestartBest> results(cfg.restarts);
    parallel_for(cfg.restarts, workers, [&](std::size_t r) {
      thread_local ClimbWorkspace ws;
      results[r] = run_restart(r, ws);
    });
    for (auto& res : results) consider(std::move(res));
  }

  SubmatrixSupport support(std::move(best.rows), std::move(best.cols));
  const double score = submatrix_score(matrix, support);
  return SearchResult{std::move(support), score, cfg.restarts, all_converged};
}

namespace {

double binomial_count(std::size_t n, std::size_t k) {
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(c);
}

// Advances a strictly increasing combination of [0, n) in lexicographic order.
bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t k = idx.size();
  std::size_t pos = k;
  while (pos > 0) {
    --pos;
    if (idx[pos] < n - k + pos) {
      ++idx[pos];
      for (std::size_t t = pos + 1; t < k; ++t) idx[t] = idx[t - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

double support_count(const ProblemShape& shape) {
  return binomial_count(shape.N(), shape.n()) * binomial_count(shape.M(), shape.m());
}

void check_enumeration_budget(const ProblemShape& shape, double budget) {
  const double count = support_count(shape);
  if (count > budget) {
    std::ostringstream msg;
    msg << "enumeration needs " << count << " supports, budget is " << budget;
    throw DetectionError(ErrorKind::BudgetExceeded, msg.str());
  }
}

void enumerate_supports(const ObservationMatrix& matrix, const ProblemShape& shape, double budget,
                        const SupportVisitor& visit) {
  validate_shape(matrix, shape);
  check_enumeration_budget(shape, budget);

  const std::size_t M = shape.M();
  std::vector<std::size_t> rows(shape.n());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::vector<double> col_sums(M);
  std::vector<std::size_t> cols(shape.m());
  do {
    std::fill(col_sums.begin(), col_sums.end(), 0.0);
    for (std::size_t i : rows) {
      const auto row = matrix.row(i);
      for (std::size_t j = 0; j < M; ++j) col_sums[j] += row[j];
    }
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    do {
      double sum = 0.0;
      for (std::size_t j : cols) sum += col_sums[j];
      visit(rows, cols, sum);
    } while (next_combination(cols, M));
  } while (next_combination(rows, shape.N()));
}

SearchResult brute_force_max(const ObservationMatrix& matrix, const ProblemShape& shape, double budget) {
  std::vector<std::size_t> best_rows;
  std::vector<std::size_t> best_cols;
  double best = -std::numeric_limits<double>::infinity();
  enumerate_supports(matrix, shape, budget,
                     [&](std::span<const std::size_t> rows, std::span<const std::size_t> cols, double sum) {
                       if (sum > best) {
                         best = sum;
                         best_rows.assign(rows.begin(), rows.end());
                         best_cols.assign(cols.begin(), cols.end());
                       }
                     });
  SubmatrixSupport support(std::move(best_rows), std::move(best_cols));
  const double score = submatrix_score(matrix, support);
  return SearchResult{std::move(support), score, 0, true};
}

}  // namespace subdetect
