#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "approxmax/metrics.hpp"
#include "approxmax/rng.hpp"

using namespace approxmax;

TEST_CASE("rmse basics") {
  CHECK(rmse({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
  CHECK_THAT(rmse({1.0, 0.0}, {0.0, 0.0}),
             Catch::Matchers::WithinRel(std::sqrt(0.5), 1e-15));
  CHECK(rmse({2.0}, {-1.0}) == 3.0);

  // Symmetric in the argument order, scales linearly with a common factor.
  const std::vector<double> a = {0.1, -0.4, 0.9};
  const std::vector<double> b = {0.3, 0.2, -0.1};
  CHECK(rmse(a, b) == rmse(b, a));
  std::vector<double> a4(a), b4(b);
  for (double& v : a4) v *= 4.0;
  for (double& v : b4) v *= 4.0;
  CHECK_THAT(rmse(a4, b4), Catch::Matchers::WithinRel(4.0 * rmse(a, b), 1e-15));

  CHECK_THROWS_AS(rmse({1.0}, {1.0, 2.0}), config_error);
  CHECK_THROWS_AS(rmse({}, {}), config_error);
}

TEST_CASE("constant error has zero variance and rmse |c|") {
  const std::vector<double> exact = {0.5, 1.5, -2.0, 3.25};
  std::vector<double> approx(exact);
  for (double& v : approx) v -= 0.125;
  ErrorReport r = error_moments(exact, approx);
  CHECK(r.variance == 0.0);
  CHECK(r.stddev == 0.0);
  CHECK_THAT(r.rmse, Catch::Matchers::WithinRel(0.125, 1e-15));
  CHECK(r.max_abs_err == 0.125);
  CHECK(r.n == 4);
}

TEST_CASE("rmse squared equals variance plus squared mean") {
  Xoshiro256pp g(404, 0);
  std::vector<double> exact(5000), approx(5000);
  for (std::size_t i = 0; i < exact.size(); ++i) {
    exact[i] = g.uniform_open(-1.0, 1.0);
    approx[i] = exact[i] + 0.01 * g.uniform_open(-1.0, 1.0) + 0.002;
  }
  ErrorReport r = error_moments(exact, approx);
  double mean = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    mean += (exact[i] - approx[i]);
  }
  mean /= double(exact.size());
  CHECK_THAT(r.rmse * r.rmse,
             Catch::Matchers::WithinRel(r.variance + mean * mean, 1e-12));
  CHECK(r.rmse <= r.max_abs_err);
  CHECK(r.max_abs_err <= std::sqrt(double(r.n)) * r.rmse);
  CHECK(rmse(exact, approx) == r.rmse);
}

TEST_CASE("one-pass moments match the two-pass formulas") {
  Xoshiro256pp g(808, 3);
  const std::size_t n = 1000000;
  std::vector<double> exact(n), approx(n);
  for (std::size_t i = 0; i < n; ++i) {
    exact[i] = g.uniform_open(-1.0, 1.0);
    approx[i] = g.uniform_open(-1.0, 1.0);
  }
  ErrorReport r = error_moments(exact, approx);

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += (exact[i] - approx[i]);
  mean /= double(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (exact[i] - approx[i]) - mean;
    var += d * d;
  }
  var /= double(n);
  CHECK_THAT(r.variance, Catch::Matchers::WithinRel(var, 1e-12));
  CHECK_THAT(r.stddev, Catch::Matchers::WithinRel(std::sqrt(var), 1e-12));
}

TEST_CASE("moments input validation") {
  CHECK_THROWS_AS(error_moments({1.0}, {1.0}), config_error);
  CHECK_THROWS_AS(error_moments({1.0, 2.0}, {1.0}), config_error);
}

TEST_CASE("argmax agreement counts exact matches") {
  const std::vector<std::size_t> exact = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<std::size_t> approx(exact);
  approx[3] = 0;
  CHECK(argmax_agreement(exact, approx) == 0.9);
  CHECK(argmax_agreement(exact, exact) == 1.0);
  CHECK_THROWS_AS(argmax_agreement({0, 1}, {0}), config_error);
  CHECK_THROWS_AS(argmax_agreement({}, {}), config_error);
}

TEST_CASE("csv row layout is stable") {
  CHECK(error_report_csv_header() ==
        "method,config,mode,n,seed,rmse,variance,stddev,max_abs_err,"
        "argmax_agreement");
  ErrorReport r;
  r.rmse = 0.5;
  r.variance = 0.25;
  r.stddev = 0.5;
  r.max_abs_err = 1.0;
  r.argmax_agreement = 1.0;
  r.n = 42;
  r.mode = MeasurementMode::method_error;
  CHECK(error_report_csv_row("taylor-3", "q16.15", 99, r) ==
        "taylor-3,q16.15,method-error,42,99,0.5,0.25,0.5,1,1");
}
