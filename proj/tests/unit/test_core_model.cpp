#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>

#include "subdetect/core_model.hpp"

using namespace subdetect;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const DetectionError& e) {
    return e.kind();
  }
  FAIL("expected a DetectionError");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("observation matrix stores row-major entries") {
  const ObservationMatrix Y(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(Y.rows() == 2);
  CHECK(Y.cols() == 3);
  CHECK(Y.size() == 6);
  CHECK(Y(1, 0) == 4);
  CHECK(Y.row(1)[2] == 6);
  CHECK(ObservationMatrix::zeros(2, 2) == ObservationMatrix(2, 2, {0, 0, 0, 0}));
  CHECK(Y.map([](double v) { return -v; })(0, 2) == -3);
}

TEST_CASE("observation matrix rejects bad input") {
  CHECK(kind_of([] { ObservationMatrix(2, 2, {1, 2, 3}); }) == ErrorKind::DimensionMismatch);
  CHECK(kind_of([] { ObservationMatrix(0, 2, {}); }) == ErrorKind::InvalidArgument);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK(kind_of([&] { ObservationMatrix(2, 2, {1, 2, nan, 4}); }) == ErrorKind::NonFiniteEntry);
  try {
    ObservationMatrix(2, 2, {1, 2, 3, std::numeric_limits<double>::infinity()});
  } catch (const DetectionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("column 2") != std::string::npos);
  }
}

TEST_CASE("submatrix support requires strictly increasing nonempty sets") {
  const SubmatrixSupport s({0, 2}, {1});
  CHECK(s.n() == 2);
  CHECK(s.m() == 1);
  CHECK(s.contains(2, 1));
  CHECK_FALSE(s.contains(1, 1));
  CHECK(SubmatrixSupport::block(1, 2, 3, 2) == SubmatrixSupport({1, 2}, {3, 4}));
  CHECK(kind_of([] { SubmatrixSupport({}, {0}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { SubmatrixSupport({1, 1}, {0}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { SubmatrixSupport({2, 1}, {0}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { s.check_within(2, 2); }) == ErrorKind::IndexOutOfBounds);
  CHECK_NOTHROW(s.check_within(3, 2));
}

TEST_CASE("problem shape validation") {
  const ProblemShape shape(200, 100, 10, 5);
  CHECK(shape.p() == doctest::Approx(0.05));
  CHECK(shape.q() == doctest::Approx(0.05));
  CHECK(shape.transposed() == ProblemShape(100, 200, 5, 10));
  CHECK(kind_of([] { ProblemShape(4, 4, 0, 1); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { ProblemShape(4, 4, 5, 2); }) == ErrorKind::SubmatrixTooLarge);
  CHECK(kind_of([] { ProblemShape(4, 4, 2, 5); }) == ErrorKind::SubmatrixTooLarge);
}

TEST_CASE("validate_shape matches matrix and shape") {
  const auto Y = ObservationMatrix::zeros(4, 4);
  CHECK_NOTHROW(validate_shape(Y, ProblemShape(4, 4, 2, 2)));
  CHECK(kind_of([&] { validate_shape(Y, ProblemShape(5, 4, 2, 2)); }) == ErrorKind::DimensionMismatch);
  CHECK(kind_of([&] { validate_shape(Y, ProblemShape(4, 4, 5, 2)); }) == ErrorKind::SubmatrixTooLarge);
}

TEST_CASE("signal spec") {
  const auto support = SubmatrixSupport::block(1, 2, 0, 2);
  const auto S = SignalSpec::constant(support, 1.5).materialize(3, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(S(i, j) == (support.contains(i, j) ? 1.5 : 0.0));
  }
  CHECK(kind_of([&] { SignalSpec(support, 0.0); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { SignalSpec(support, 1.0, Sidedness::one_sided, std::vector<double>{1, 1, 1}); }) ==
        ErrorKind::DimensionMismatch);
  CHECK(kind_of([&] { SignalSpec(support, 1.0, Sidedness::one_sided, std::vector<double>{1, 1, 1, 0.5}); }) ==
        ErrorKind::InvalidArgument);
  const SignalSpec two(support, 1.0, Sidedness::two_sided, std::vector<double>{1, -1, -2, 1});
  CHECK(two.value_at(1, 0) == -2);
  CHECK(kind_of([&] { SignalSpec(support, 1.0, Sidedness::two_sided, std::vector<double>{1, -1, -0.5, 1}); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("make_report rejects strictly above threshold") {
  CHECK(make_report("x", 1.0, 1.0).reject == false);
  CHECK(make_report("x", std::nextafter(1.0, 2.0), 1.0).reject == true);
  CHECK(make_report("x", 0.0, 1.0).threshold_source == "analytic");
}
