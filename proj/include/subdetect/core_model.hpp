#pragma once
// Domain types shared by every detector and by the simulator.
//
// Indices are 0-based everywhere inside the library. The CSV readers and
// writers in matrix_io.hpp translate to and from 1-based indices.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace subdetect {

enum class ErrorKind {
  DimensionMismatch,
  SubmatrixTooLarge,
  NonFiniteEntry,
  InvalidArgument,
  OutOfRange,
  DegenerateShape,
  DenseRegime,
  IndexOutOfBounds,
  BudgetExceeded,
  EmptyGrid,
  GridInfeasible,
  DegenerateInput,
  AllZero,
  SupportViolation,
  ParseError,
};

[[nodiscard]] const char* to_string(ErrorKind kind) noexcept;

/// Every contract violation in the library is reported with this type; the
/// kind lets callers (the CLI in particular) map failures to exit codes.
class DetectionError : public std::runtime_error {
public:
  DetectionError(ErrorKind kind, const std::string& message);

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

/// Dense row-major N x M matrix of finite doubles. Immutable once built.
class ObservationMatrix {
public:
  ObservationMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static ObservationMatrix filled(std::size_t rows, std::size_t cols, double value);
  static ObservationMatrix zeros(std::size_t rows, std::size_t cols) {
    return filled(rows, cols, 0.0);
  }

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

  [[nodiscard]] double operator()(std::size_t i, std::size_t j) const noexcept {
    return entries_[i * cols_ + j];
  }
  [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
    return {entries_.data() + i * cols_, cols_};
  }
  [[nodiscard]] std::span<const double> entries() const noexcept { return entries_; }

  /// Copy of the entries, for callers that build a modified matrix.
  [[nodiscard]] std::vector<double> to_vector() const { return entries_; }

  /// Elementwise image under `f`; the result is re-validated for finiteness.
  template <class F>
  [[nodiscard]] ObservationMatrix map(F&& f) const {
    std::vector<double> out(entries_.size());
    for (std::size_t k = 0; k < entries_.size(); ++k) out[k] = f(entries_[k]);
    return ObservationMatrix(rows_, cols_, std::move(out));
  }

  friend bool operator==(const ObservationMatrix&, const ObservationMatrix&) = default;

private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> entries_;
};

/// Product support C = A x B given by strictly increasing row and column
/// index lists.
class SubmatrixSupport {
public:
  SubmatrixSupport(std::vector<std::size_t> rows, std::vector<std::size_t> cols);

  /// Contiguous block rows [row0, row0+n) x cols [col0, col0+m).
  static SubmatrixSupport block(std::size_t row0, std::size_t n, std::size_t col0, std::size_t m);

  [[nodiscard]] const std::vector<std::size_t>& rows() const noexcept { return rows_; }
  [[nodiscard]] const std::vector<std::size_t>& cols() const noexcept { return cols_; }
  [[nodiscard]] std::size_t n() const noexcept { return rows_.size(); }
  [[nodiscard]] std::size_t m() const noexcept { return cols_.size(); }

  [[nodiscard]] bool contains(std::size_t i, std::size_t j) const noexcept;

  /// Throws IndexOutOfBounds unless every index fits an N x M matrix.
  void check_within(std::size_t N, std::size_t M) const;

  friend bool operator==(const SubmatrixSupport&, const SubmatrixSupport&) = default;

private:
  std::vector<std::size_t> rows_;
  std::vector<std::size_t> cols_;
};

/// (N, M, n, m) with 1 <= n <= N and 1 <= m <= M.
class ProblemShape {
public:
  ProblemShape(std::size_t N, std::size_t M, std::size_t n, std::size_t m);

  [[nodiscard]] std::size_t N() const noexcept { return N_; }
  [[nodiscard]] std::size_t M() const noexcept { return M_; }
  [[nodiscard]] std::size_t n() const noexcept { return n_; }
  [[nodiscard]] std::size_t m() const noexcept { return m_; }
  [[nodiscard]] double p() const noexcept { return static_cast<double>(n_) / static_cast<double>(N_); }
  [[nodiscard]] double q() const noexcept { return static_cast<double>(m_) / static_cast<double>(M_); }

  [[nodiscard]] ProblemShape transposed() const { return {M_, N_, m_, n_}; }

  friend bool operator==(const ProblemShape&, const ProblemShape&) = default;

private:
  std::size_t N_;
  std::size_t M_;
  std::size_t n_;
  std::size_t m_;
};

enum class Sidedness { one_sided, two_sided };

/// Elevated-mean signal on a support. Per-cell values, when present, are
/// row-major over the support (n*m entries); otherwise every cell is `a`.
class SignalSpec {
public:
  SignalSpec(SubmatrixSupport support, double amplitude, Sidedness sidedness = Sidedness::one_sided,
             std::optional<std::vector<double>> per_cell_values = std::nullopt);

  static SignalSpec constant(SubmatrixSupport support, double amplitude) {
    return SignalSpec(std::move(support), amplitude);
  }

  [[nodiscard]] const SubmatrixSupport& support() const noexcept { return support_; }
  [[nodiscard]] double amplitude() const noexcept { return amplitude_; }
  [[nodiscard]] Sidedness sidedness() const noexcept { return sidedness_; }
  [[nodiscard]] bool has_per_cell_values() const noexcept { return per_cell_.has_value(); }

  /// s value at the k-th support row and l-th support column.
  [[nodiscard]] double value_at(std::size_t k, std::size_t l) const noexcept;

  /// Full N x M signal matrix S, zero off the support.
  [[nodiscard]] ObservationMatrix materialize(std::size_t N, std::size_t M) const;

private:
  SubmatrixSupport support_;
  double amplitude_;
  Sidedness sidedness_;
  std::optional<std::vector<double>> per_cell_;
};

struct ComponentResult {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool reject = false;
};

/// Outcome of one detector run. `reject` is always `statistic > threshold`;
/// combined detectors report the largest component margin against zero and
/// list the raw component statistics in `components`.
struct TestReport {
  std::string detector_name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool reject = false;
  std::optional<SubmatrixSupport> located_support;
  std::vector<ComponentResult> components;
  std::string threshold_source = "analytic";
  /// (n, m) of the winning grid pair for the adaptive detector.
  std::optional<std::pair<std::size_t, std::size_t>> selected_shape;
};

[[nodiscard]] TestReport make_report(std::string detector_name, double statistic, double threshold);

/// Succeeds iff the matrix dimensions equal (N, M). Sub-size limits are
/// enforced when the ProblemShape itself is built.
void validate_shape(const ObservationMatrix& matrix, const ProblemShape& shape);

}  // namespace subdetect
