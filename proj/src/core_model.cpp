#include "subdetect/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace subdetect {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::SubmatrixTooLarge: return "SubmatrixTooLarge";
    case ErrorKind::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::DegenerateShape: return "DegenerateShape";
    case ErrorKind::DenseRegime: return "DenseRegime";
    case ErrorKind::IndexOutOfBounds: return "IndexOutOfBounds";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::EmptyGrid: return "EmptyGrid";
    case ErrorKind::GridInfeasible: return "GridInfeasible";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::AllZero: return "AllZero";
    case ErrorKind::SupportViolation: return "SupportViolation";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

DetectionError::DetectionError(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

// ---------------------------------------------------------------------------
// ObservationMatrix
// ---------------------------------------------------------------------------

ObservationMatrix::ObservationMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (rows_ == 0 || cols_ == 0) {
    throw DetectionError(ErrorKind::InvalidArgument, "matrix must have at least one row and column");
  }
  if (rows_ * cols_ != entries_.size()) {
    std::ostringstream msg;
    msg << "expected " << rows_ << "x" << cols_ << " = " << rows_ * cols_ << " entries, got "
        << entries_.size();
    throw DetectionError(ErrorKind::DimensionMismatch, msg.str());
  }
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    if (!std::isfinite(entries_[k])) {
      std::ostringstream msg;
      msg << "entry at row " << k / cols_ + 1 << ", column " << k % cols_ + 1 << " is not finite";
      throw DetectionError(ErrorKind::NonFiniteEntry, msg.str());
    }
  }
}

ObservationMatrix ObservationMatrix::filled(std::size_t rows, std::size_t cols, double value) {
  return ObservationMatrix(rows, cols, std::vector<double>(rows * cols, value));
}

// ---------------------------------------------------------------------------
// SubmatrixSupport
// ---------------------------------------------------------------------------

namespace {

void check_strictly_increasing(const std::vector<std::size_t>& idx, const char* what) {
  if (idx.empty()) {
    throw DetectionError(ErrorKind::InvalidArgument, std::string(what) + " set must be nonempty");
  }
  for (std::size_t k = 1; k < idx.size(); ++k) {
    if (idx[k] <= idx[k - 1]) {
      throw DetectionError(ErrorKind::InvalidArgument,
                           std::string(what) + " indices must be strictly increasing");
    }
  }
}

}  // namespace

SubmatrixSupport::SubmatrixSupport(std::vector<std::size_t> rows, std::vector<std::size_t> cols)
    : rows_(std::move(rows)), cols_(std::move(cols)) {
  check_strictly_increasing(rows_, "row");
  check_strictly_increasing(cols_, "column");
}

SubmatrixSupport SubmatrixSupport::block(std::size_t row0, std::size_t n, std::size_t col0,
                                         std::size_t m) {
  std::vector<std::size_t> r(n);
  std::vector<std::size_t> c(m);
  for (std::size_t k = 0; k < n; ++k) r[k] = row0 + k;
  for (std::size_t k = 0; k < m; ++k) c[k] = col0 + k;
  return {std::move(r), std::move(c)};
}

bool SubmatrixSupport::contains(std::size_t i, std::size_t j) const noexcept {
  return std::binary_search(rows_.begin(), rows_.end(), i) &&
         std::binary_search(cols_.begin(), cols_.end(), j);
}

void SubmatrixSupport::check_within(std::size_t N, std::size_t M) const {
  if (rows_.back() >= N || cols_.back() >= M) {
    std::ostringstream msg;
    msg << "support reaches row " << rows_.back() + 1 << ", column " << cols_.back() + 1
        << " but the matrix is " << N << "x" << M;
    throw DetectionError(ErrorKind::IndexOutOfBounds, msg.str());
  }
}

// ---------------------------------------------------------------------------
// ProblemShape
// ---------------------------------------------------------------------------

ProblemShape::ProblemShape(std::size_t N, std::size_t M, std::size_t n, std::size_t m)
    : N_(N), M_(M), n_(n), m_(m) {
  if (N == 0 || M == 0 || n == 0 || m == 0) {
    throw DetectionError(ErrorKind::InvalidArgument, "N, M, n, m must all be at least 1");
  }
  if (n > N || m > M) {
    std::ostringstream msg;
    msg << "submatrix " << n << "x" << m << " does not fit in " << N << "x" << M;
    throw DetectionError(ErrorKind::SubmatrixTooLarge, msg.str());
  }
}

// ---------------------------------------------------------------------------
// SignalSpec
// ---------------------------------------------------------------------------

SignalSpec::SignalSpec(SubmatrixSupport support, double amplitude, Sidedness sidedness,
                       std::optional<std::vector<double>> per_cell_values)
    : support_(std::move(support)),
      amplitude_(amplitude),
      sidedness_(sidedness),
      per_cell_(std::move(per_cell_values)) {
  if (!(amplitude_ > 0.0) || !std::isfinite(amplitude_)) {
    throw DetectionError(ErrorKind::InvalidArgument, "signal amplitude must be finite and > 0");
  }
  if (!per_cell_) return;
  if (per_cell_->size() != support_.n() * support_.m()) {
    throw DetectionError(ErrorKind::DimensionMismatch,
                         "per-cell values must have n*m entries for the support");
  }
  for (double s : *per_cell_) {
    const double magnitude = sidedness_ == Sidedness::one_sided ? s : std::abs(s);
    if (!std::isfinite(s) || magnitude < amplitude_) {
      throw DetectionError(ErrorKind::InvalidArgument,
                           sidedness_ == Sidedness::one_sided
                               ? "one-sided signal values must satisfy s_ij >= a"
                               : "two-sided signal values must satisfy |s_ij| >= a");
    }
  }
}

double SignalSpec::value_at(std::size_t k, std::size_t l) const noexcept {
  return per_cell_ ? (*per_cell_)[k * support_.m() + l] : amplitude_;
}

ObservationMatrix SignalSpec::materialize(std::size_t N, std::size_t M) const {
  support_.check_within(N, M);
  std::vector<double> s(N * M, 0.0);
  const auto& rows = support_.rows();
  const auto& cols = support_.cols();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t l = 0; l < cols.size(); ++l) s[rows[k] * M + cols[l]] = value_at(k, l);
  }
  return ObservationMatrix(N, M, std::move(s));
}

// ---------------------------------------------------------------------------

TestReport make_report(std::string detector_name, double statistic, double threshold) {
  TestReport r;
  r.detector_name = std::move(detector_name);
  r.statistic = statistic;
  r.threshold = threshold;
  r.reject = statistic > threshold;
  return r;
}

void validate_shape(const ObservationMatrix& matrix, const ProblemShape& shape) {
  if (matrix.rows() != shape.N() || matrix.cols() != shape.M()) {
    std::ostringstream msg;
    msg << "matrix is " << matrix.rows() << "x" << matrix.cols() << " but the shape declares "
        << shape.N() << "x" << shape.M();
    throw DetectionError(ErrorKind::DimensionMismatch, msg.str());
  }
}

}  // namespace subdetect
