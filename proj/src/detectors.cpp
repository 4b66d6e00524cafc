#include "subdetect/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "subdetect/combinatorics.hpp"

namespace subdetect {

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_upper_quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DetectionError(ErrorKind::OutOfRange, "alpha must lie in (0, 1)");
  }
  return boost::math::quantile(boost::math::complement(boost::math::normal_distribution<double>(), alpha));
}

// ---------------------------------------------------------------------------

double linear_statistic(const ObservationMatrix& matrix) noexcept {
  double sum = 0.0;
  for (double v : matrix.entries()) sum += v;
  return sum / std::sqrt(static_cast<double>(matrix.size()));
}

TestReport linear_test(const ObservationMatrix& matrix, double H) {
  return make_report("linear", linear_statistic(matrix), H);
}

SearchResult scan_maximum(const ObservationMatrix& matrix, const ProblemShape& shape, const SearchConfig& cfg,
                          ScanMode mode, double budget) {
  return mode == ScanMode::exact ? brute_force_max(matrix, shape, budget)
                                 : alternating_search(matrix, shape, cfg);
}

TestReport scan_test(const ObservationMatrix& matrix, const ProblemShape& shape, double threshold,
                     const SearchConfig& cfg, ScanMode mode, std::string threshold_source) {
  SearchResult found = scan_maximum(matrix, shape, cfg, mode);
  TestReport report = make_report("scan", found.score, threshold);
  report.located_support = std::move(found.support);
  report.threshold_source = std::move(threshold_source);
  return report;
}

TestReport combined_test(const ObservationMatrix& matrix, const ProblemShape& shape, double H, double T,
                         const SearchConfig& cfg, ScanMode mode, std::string threshold_source) {
  validate_shape(matrix, shape);
  const TestReport lin = linear_test(matrix, H);
  TestReport scan = scan_test(matrix, shape, T, cfg, mode, threshold_source);

  const double margin = std::max(lin.statistic - H, scan.statistic - T);
  TestReport report = make_report("combined", margin, 0.0);
  report.located_support = std::move(scan.located_support);
  report.threshold_source = std::move(threshold_source);
  report.components = {{"linear", lin.statistic, H, lin.reject}, {"scan", scan.statistic, T, scan.reject}};
  return report;
}

// ---------------------------------------------------------------------------

AdaptiveGrid::AdaptiveGrid(std::size_t N, std::size_t M, std::vector<std::pair<std::size_t, std::size_t>> pairs)
    : N_(N), M_(M), pairs_(std::move(pairs)) {
  if (pairs_.empty()) throw DetectionError(ErrorKind::EmptyGrid, "adaptive grid has no (n, m) pairs");
  std::sort(pairs_.begin(), pairs_.end());
  if (std::adjacent_find(pairs_.begin(), pairs_.end()) != pairs_.end()) {
    throw DetectionError(ErrorKind::InvalidArgument, "adaptive grid pairs must be distinct");
  }
  for (const auto& [n, m] : pairs_) ProblemShape(N_, M_, n, m);
}

namespace {

std::vector<std::size_t> dyadic_sizes(std::size_t total) {
  std::vector<std::size_t> sizes;
  const double log_total = std::log(static_cast<double>(total));
  for (std::size_t s = 2; 4 * s <= total; s *= 2) {
    const double ratio = log_total / (static_cast<double>(s) * std::log(static_cast<double>(total) / s));
    if (ratio <= 0.5) sizes.push_back(s);
  }
  if (sizes.empty()) sizes.push_back(std::max<std::size_t>(1, total / 4));
  return sizes;
}

}  // namespace

AdaptiveGrid AdaptiveGrid::dyadic(std::size_t N, std::size_t M) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t n : dyadic_sizes(N)) {
    for (std::size_t m : dyadic_sizes(M)) pairs.emplace_back(n, m);
  }
  return AdaptiveGrid(N, M, std::move(pairs));
}

TestReport adaptive_scan_test(const ObservationMatrix& matrix, const AdaptiveGrid& grid, const SearchConfig& cfg,
                              ScanMode mode) {
  if (matrix.rows() != grid.N() || matrix.cols() != grid.M()) {
    throw DetectionError(ErrorKind::DimensionMismatch, "matrix does not match the adaptive grid dimensions");
  }
  double best = -std::numeric_limits<double>::infinity();
  std::optional<SubmatrixSupport> best_support;
  std::pair<std::size_t, std::size_t> best_pair{};
  std::vector<ComponentResult> components;
  for (const auto& [n, m] : grid.pairs()) {
    const ProblemShape shape(grid.N(), grid.M(), n, m);
    SearchResult found = scan_maximum(matrix, shape, cfg, mode);
    const double V = adaptive_threshold(shape);
    const double ratio = found.score / V;
    std::ostringstream name;
    name << "scan(" << n << "," << m << ")";
    components.push_back({name.str(), found.score, V, found.score > V});
    if (ratio > best) {
      best = ratio;
      best_support = std::move(found.support);
      best_pair = {n, m};
    }
  }
  TestReport report = make_report("adaptive", best, 1.0);
  report.located_support = std::move(best_support);
  report.selected_shape = best_pair;
  report.components = std::move(components);
  return report;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::size_t> anchors(std::size_t total, std::size_t size, double eta) {
  const std::size_t step = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(size * eta)));
  const double lower = static_cast<double>(total) - static_cast<double>(size) * (1.0 + eta);
  std::vector<std::size_t> out{0};
  while (static_cast<double>(out.back()) < lower) out.push_back(out.back() + step);
  if (out.back() > total - size) {
    std::ostringstream msg;
    msg << "no anchor lands in [" << lower << ", " << total - size << "] with step " << step;
    throw DetectionError(ErrorKind::GridInfeasible, msg.str());
  }
  return out;
}

}  // namespace

RectangleGrid RectangleGrid::build(const ProblemShape& shape, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) {
    throw DetectionError(ErrorKind::GridInfeasible, "rectangle grid needs eta in (0, 1)");
  }
  return RectangleGrid{eta, anchors(shape.N(), shape.n(), eta), anchors(shape.M(), shape.m(), eta)};
}

TestReport rectangle_scan_test(const ObservationMatrix& matrix, const ProblemShape& shape, double eta) {
  validate_shape(matrix, shape);
  const RectangleGrid grid = RectangleGrid::build(shape, eta);
  const std::size_t N = shape.N();
  const std::size_t M = shape.M();
  const std::size_t n = shape.n();
  const std::size_t m = shape.m();

  // prefix[(i)(M+1) + j] = sum of Y over rows < i, cols < j.
  std::vector<double> prefix((N + 1) * (M + 1), 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    double run = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      run += matrix(i, j);
      prefix[(i + 1) * (M + 1) + j + 1] = prefix[i * (M + 1) + j + 1] + run;
    }
  }
  auto block_sum = [&](std::size_t r, std::size_t c) {
    return prefix[(r + n) * (M + 1) + c + m] - prefix[r * (M + 1) + c + m] - prefix[(r + n) * (M + 1) + c] +
           prefix[r * (M + 1) + c];
  };

  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_r = 0;
  std::size_t best_c = 0;
  for (std::size_t r : grid.row_anchors) {
    for (std::size_t c : grid.col_anchors) {
      const double s = block_sum(r, c);
      if (s > best) {
        best = s;
        best_r = r;
        best_c = c;
      }
    }
  }
  const double KL = static_cast<double>(grid.row_anchors.size() * grid.col_anchors.size());
  const double threshold = std::sqrt(2.0 * std::log(KL));
  TestReport report =
      make_report("rectangle", best / std::sqrt(static_cast<double>(n) * static_cast<double>(m)), threshold);
  report.located_support = SubmatrixSupport::block(best_r, n, best_c, m);
  return report;
}

// ---------------------------------------------------------------------------

double high_criticism_threshold(std::size_t cell_count, double c) {
  if (cell_count < 16) {
    throw DetectionError(ErrorKind::DegenerateInput, "higher criticism needs N M >= 16");
  }
  if (!(c > 2.0)) throw DetectionError(ErrorKind::InvalidArgument, "higher criticism constant c must exceed 2");
  return std::sqrt(c * std::log(std::log(static_cast<double>(cell_count))));
}

TestReport high_criticism_test(const ObservationMatrix& matrix, double t0, double c) {
  const std::size_t P = matrix.size();
  const double threshold = high_criticism_threshold(P, c);
  if (!(t0 > 0.0)) throw DetectionError(ErrorKind::InvalidArgument, "higher criticism start t0 must be > 0");

  std::vector<double> sorted(matrix.entries().begin(), matrix.entries().end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double total = static_cast<double>(P);

  auto criticism = [total](double t, double exceed) {
    const double upper = 0.5 * std::erfc(t / std::numbers::sqrt2);
    const double lower = 1.0 - upper;
    const double centred = exceed - total * upper;
    const double scale = std::sqrt(total * lower * upper);
    if (scale == 0.0) {
      return centred > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    }
    return centred / scale;
  };

  // Walking the descending values: entries before position k exceed sorted[k]
  // strictly once duplicates are skipped.
  std::size_t above_t0 = 0;
  while (above_t0 < P && sorted[above_t0] > t0) ++above_t0;
  double best = criticism(t0, static_cast<double>(above_t0));
  for (std::size_t k = 0; k < above_t0; ++k) {
    if (k > 0 && sorted[k] == sorted[k - 1]) continue;
    best = std::max(best, criticism(sorted[k], static_cast<double>(k)));
  }
  return make_report("high_criticism", best, threshold);
}

}  // namespace subdetect
