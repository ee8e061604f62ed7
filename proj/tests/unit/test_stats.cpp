#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "pimd_kubo/errors.hpp"
#include "pimd_kubo/rng.hpp"
#include "pimd_kubo/stats.hpp"

using namespace pimd_kubo;

namespace {

std::vector<double> gaussians(std::size_t n, std::uint64_t seed) {
  RandomStream r(seed, StreamTag::Test, 0);
  std::vector<double> v(n);
  for (auto& x : v) x = r.normal();
  return v;
}

}  // namespace

TEST_SUITE("stats") {
  TEST_CASE("compensated and pairwise sums") {
    CompensatedSum s;
    for (double x : {1.0, 1e100, 1.0, -1e100}) s.add(x);
    CHECK(s.value() == 2.0);
    std::vector<double> ints(1001);
    for (std::size_t i = 0; i < ints.size(); ++i) ints[i] = static_cast<double>(i);
    CHECK(pairwise_sum(ints) == 500500.0);
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
  }

  TEST_CASE("block error of constant samples is zero") {
    const std::vector<double> c(64, 3.25);
    CHECK(block_error(c) == 0.0);
    const auto m = block_average(c);
    CHECK(m.mean == 3.25);
    CHECK(m.std_error == 0.0);
  }

  TEST_CASE("block error of i.i.d. unit Gaussians") {
    const auto v = gaussians(1600, 5);
    // 1 / sqrt(n)
    CHECK(block_error(v) == doctest::Approx(0.025).epsilon(0.3));
  }

  TEST_CASE("block error scales as 1/sqrt(n)") {
    const double e400 = block_error(gaussians(400, 21));
    const double e1600 = block_error(gaussians(1600, 22));
    const double e6400 = block_error(gaussians(6400, 23));
    CHECK(e400 == doctest::Approx(1.0 / 20.0).epsilon(0.3));
    CHECK(e1600 == doctest::Approx(1.0 / 40.0).epsilon(0.3));
    CHECK(e6400 == doctest::Approx(1.0 / 80.0).epsilon(0.3));
  }

  TEST_CASE("too few samples") {
    CHECK_THROWS_AS(block_error(std::vector<double>(31, 1.0)), InsufficientSamples);
    CHECK_THROWS_AS(block_average(std::vector<double>(10, 1.0)), InsufficientSamples);
  }

  TEST_CASE("block bounds cover the samples contiguously") {
    const auto b = block_bounds(103, 16);
    REQUIRE(b.size() == 17);
    CHECK(b.front() == 0);
    CHECK(b.back() == 103);
    for (std::size_t i = 1; i < b.size(); ++i) CHECK(b[i] - b[i - 1] >= 6);
  }

  TEST_CASE("two-sample KS") {
    const auto far = ks_two_sample({1, 2, 3, 4, 5}, {6, 7, 8, 9, 10});
    CHECK(far.statistic == 1.0);
    const auto same = ks_two_sample(gaussians(2000, 1), gaussians(2000, 2));
    CHECK(same.p_value > 0.01);
    auto shifted = gaussians(2000, 3);
    for (auto& x : shifted) x += 0.5;
    CHECK(ks_two_sample(gaussians(2000, 4), shifted).p_value < 1e-6);
    CHECK(kolmogorov_q(0.0) == 1.0);
    // Q(1.36) is the familiar 5% critical value.
    CHECK(kolmogorov_q(1.358) == doctest::Approx(0.05).epsilon(0.01));
  }

  TEST_CASE("skewness of a symmetric sample is zero") {
    CHECK(sample_skewness(std::vector<double>{-2, -1, 0, 1, 2}) == doctest::Approx(0.0));
    CHECK(sample_skewness(std::vector<double>{0, 0, 0, 0, 10}) > 1.0);
  }

  TEST_CASE("series average is independent of the worker count") {
    const std::size_t n = 500, nt = 7;
    auto fill = [](std::size_t i, std::span<double> out) {
      RandomStream r(99, StreamTag::Test, i);
      for (auto& v : out) v = r.normal();
    };
    const auto one = block_series_average(n, nt, fill, Parallelism{1});
    const auto four = block_series_average(n, nt, fill, Parallelism{4});
    REQUIRE(one.mean.size() == nt);
    CHECK(std::memcmp(one.mean.data(), four.mean.data(), nt * sizeof(double)) == 0);
    CHECK(std::memcmp(one.std_error.data(), four.std_error.data(), nt * sizeof(double)) == 0);
    // Each column agrees with the scalar block average of the same samples.
    for (std::size_t t = 0; t < nt; ++t) {
      std::vector<double> col(n);
      std::vector<double> row(nt);
      for (std::size_t i = 0; i < n; ++i) {
        fill(i, row);
        col[i] = row[t];
      }
      const auto m = block_average(col);
      CHECK(one.mean[t] == doctest::Approx(m.mean).epsilon(1e-12));
      CHECK(one.std_error[t] == doctest::Approx(m.std_error).epsilon(1e-9));
    }
  }
}
