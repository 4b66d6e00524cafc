#include "subdetect/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace subdetect {

namespace {

// lgamma(x + 1) - (x ln x - x + ln(2 pi x) / 2), x >= 1.
double stirling_remainder(double x) {
  if (x < 15.0) {
    return std::lgamma(x + 1.0) - (x * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi * x));
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  return inv * (1.0 / 12.0 -
                inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
}

void require_proper(const ProblemShape& shape) {
  if (shape.n() == shape.N() || shape.m() == shape.M()) {
    throw DetectionError(ErrorKind::DegenerateShape,
                         "boundary needs p = n/N < 1 and q = m/M < 1");
  }
}

}  // namespace

double log_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) {
    std::ostringstream msg;
    msg << "log_binomial(" << n << ", " << k << "): k exceeds n";
    throw DetectionError(ErrorKind::OutOfRange, msg.str());
  }
  const std::uint64_t r = std::min(k, n - k);
  if (r == 0) return 0.0;
  if (r <= 20) {
    // Product of (n - r + i) / i, summed in log space; every term is positive.
    double sum = 0.0;
    for (std::uint64_t i = 1; i <= r; ++i) {
      sum += std::log(static_cast<double>(n - r + i) / static_cast<double>(i));
    }
    return sum;
  }
  // Stirling split: the leading terms are a sum of positive quantities, the
  // remainders are small, so nothing cancels catastrophically.
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(r);
  const double rest = nn - kk;
  return kk * std::log(nn / kk) - rest * std::log1p(-kk / nn) +
         0.5 * std::log(nn / (2.0 * std::numbers::pi * kk * rest)) + stirling_remainder(nn) -
         stirling_remainder(kk) - stirling_remainder(rest);
}

double log_submatrix_count(const ProblemShape& shape) {
  return log_binomial(shape.N(), shape.n()) + log_binomial(shape.M(), shape.m());
}

double scan_threshold(const ProblemShape& shape, double delta) {
  if (!(delta >= 0.0)) throw DetectionError(ErrorKind::InvalidArgument, "inflation delta must be >= 0");
  return std::sqrt((2.0 + delta) * log_submatrix_count(shape));
}

double adaptive_threshold(const ProblemShape& shape) {
  return std::sqrt(2.0 * (std::log(static_cast<double>(shape.N())) +
                          std::log(static_cast<double>(shape.M())) + log_submatrix_count(shape)));
}

const char* to_string(Regime regime) noexcept {
  return regime == Regime::dense ? "dense" : "sparse";
}

BoundaryReport detection_boundary(const ProblemShape& shape) {
  require_proper(shape);
  const double n = static_cast<double>(shape.n());
  const double m = static_cast<double>(shape.m());
  BoundaryReport r;
  r.dense_term = 1.0 / std::sqrt(n * m * shape.p() * shape.q());
  r.sparse_term = std::sqrt(2.0 * (n * -std::log(shape.p()) + m * -std::log(shape.q())) / (n * m));
  r.regime = r.dense_term <= r.sparse_term ? Regime::dense : Regime::sparse;
  r.a_star = r.regime == Regime::dense ? r.dense_term : r.sparse_term;
  return r;
}

double phi_beta(double beta) {
  if (!(beta > 0.5 && beta < 1.0)) {
    throw DetectionError(ErrorKind::OutOfRange, "phi_beta needs 1/2 < beta < 1");
  }
  if (beta <= 0.75) return std::sqrt(2.0 * beta - 1.0);
  return std::numbers::sqrt2 * (1.0 - std::sqrt(1.0 - beta));
}

double sparsity_exponent(const ProblemShape& shape) {
  const double nm = static_cast<double>(shape.n()) * static_cast<double>(shape.m());
  const double NM = static_cast<double>(shape.N()) * static_cast<double>(shape.M());
  if (NM <= 1.0) throw DetectionError(ErrorKind::DegenerateShape, "need N M > 1");
  return 1.0 - std::log(nm) / std::log(NM);
}

double no_structure_boundary(const ProblemShape& shape) {
  const double beta = sparsity_exponent(shape);
  if (beta <= 0.5) {
    throw DetectionError(ErrorKind::DenseRegime,
                         "beta <= 1/2: use the dense term of detection_boundary");
  }
  if (beta >= 1.0) throw DetectionError(ErrorKind::OutOfRange, "beta >= 1 (nm = 1)");
  const double NM = static_cast<double>(shape.N()) * static_cast<double>(shape.M());
  return phi_beta(beta) * std::sqrt(std::log(NM));
}

double rectangle_boundary(const ProblemShape& shape) {
  require_proper(shape);
  const double nm = static_cast<double>(shape.n()) * static_cast<double>(shape.m());
  return std::sqrt(2.0 * (-std::log(shape.p()) - std::log(shape.q())) / nm);
}

}  // namespace subdetect
