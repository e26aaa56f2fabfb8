#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "rv/numerics.hpp"

using namespace rv;

namespace {
std::vector<double> random_values(Rng& rng, std::size_t n, double lo,
                                  double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}
}  // namespace

TEST_SUITE("logsumexp") {
  TEST_CASE("frozen values") {
    std::vector<double> v{1.0, 0.0, -1.0};
    CHECK(logsumexp(0.5, v) == doctest::Approx(1.0714658142499498).epsilon(1e-12));

    // near-greedy temperature collapses to max + beta*ln(multiplicity)
    std::vector<double> w{5.0, 5.0, 1.0};
    CHECK(std::abs(logsumexp(1e-3, w) - (5.0 + 1e-3 * std::log(2.0))) < 1e-9);
  }

  TEST_CASE("single value is returned unchanged") {
    for (double c : {-1e6, -3.25, 0.0, 1.0, 3.7, 1e6}) {
      std::vector<double> v{c};
      CHECK(logsumexp(0.5, v) == c);
      CHECK(logsumexp(100.0, v) == c);
    }
  }

  TEST_CASE("equal entries give m + beta*ln(n)") {
    std::vector<double> v{2.5, 2.5, 2.5, 2.5};
    CHECK(logsumexp(2.0, v) ==
          doctest::Approx(2.5 + 2.0 * std::log(4.0)).epsilon(1e-12));
  }

  TEST_CASE("bounded between max and max + beta*ln(n)") {
    Rng rng(11);
    for (int t = 0; t < 2000; ++t) {
      const std::size_t n = 1 + rng.below(8);
      const double beta = std::exp(rng.uniform(std::log(1e-3), std::log(100.0)));
      auto v = random_values(rng, n, -50.0, 50.0);
      const double lse = logsumexp(beta, v);
      const double m = max_value(v);
      CHECK(lse >= m - 1e-12);
      CHECK(lse <= m + beta * std::log(double(n)) + 1e-12);
    }
  }

  TEST_CASE("shift invariance") {
    Rng rng(12);
    for (int t = 0; t < 2000; ++t) {
      const std::size_t n = 1 + rng.below(8);
      const double beta = rng.uniform(0.05, 10.0);
      const double c = rng.uniform(-100.0, 100.0);
      auto v = random_values(rng, n, -20.0, 20.0);
      auto shifted = v;
      for (auto& x : shifted) x += c;
      const double a = logsumexp(beta, v) + c;
      const double b = logsumexp(beta, shifted);
      CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)));
    }
  }

  TEST_CASE("no overflow at extreme magnitudes") {
    std::vector<double> v{1e6, -1e6, 0.0};
    CHECK(std::isfinite(logsumexp(1e-3, v)));
    CHECK(logsumexp(1e-3, v) == doctest::Approx(1e6));
  }

  TEST_CASE("increasing one entry strictly increases the result") {
    Rng rng(13);
    for (int t = 0; t < 2000; ++t) {
      const std::size_t n = 2 + rng.below(6);
      const double beta = rng.uniform(0.5, 10.0);
      auto v = random_values(rng, n, -3.0, 3.0);
      const std::size_t i = rng.below(n);
      const double before = logsumexp(beta, v);
      v[i] += rng.uniform(1.0, 3.0);
      CHECK(logsumexp(beta, v) > before);
    }
  }

  TEST_CASE("rejects empty input and bad temperature") {
    std::vector<double> v{1.0};
    CHECK_THROWS_AS(logsumexp(1.0, std::span<const double>{}),
                    std::invalid_argument);
    CHECK_THROWS_AS(logsumexp(0.0, v), std::invalid_argument);
    CHECK_THROWS_AS(logsumexp(-1.0, v), std::invalid_argument);
  }
}

TEST_SUITE("softmax") {
  TEST_CASE("frozen value at sharp temperature") {
    std::vector<double> v{1.0, 0.0};
    auto p = softmax(0.05, v);
    CHECK(p[0] == doctest::Approx(0.99999999793884638).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(1.0 - 0.99999999793884638).epsilon(1e-4));
  }

  TEST_CASE("normalization, positivity, order preservation") {
    Rng rng(21);
    for (int t = 0; t < 2000; ++t) {
      const std::size_t n = 1 + rng.below(8);
      const double beta = std::exp(rng.uniform(std::log(1e-3), std::log(100.0)));
      auto v = random_values(rng, n, -40.0, 40.0);
      auto p = softmax(beta, v);
      double sum = 0.0;
      for (double x : p) {
        CHECK(x >= 0.0);
        sum += x;
      }
      CHECK(std::abs(sum - 1.0) < 1e-12);
      for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (v[i] > v[j]) CHECK(p[i] >= p[j]);
    }
  }

  TEST_CASE("equal inputs give the uniform distribution") {
    std::vector<double> v{3.0, 3.0, 3.0, 3.0, 3.0};
    for (double p : softmax(0.7, v))
      CHECK(p == doctest::Approx(0.2).epsilon(1e-12));
  }

  TEST_CASE("softmax is the gradient of logsumexp") {
    Rng rng(22);
    const double h = 1e-5;
    for (int t = 0; t < 200; ++t) {
      const std::size_t n = 2 + rng.below(5);
      const double beta = rng.uniform(0.2, 5.0);
      auto v = random_values(rng, n, -5.0, 5.0);
      auto p = softmax(beta, v);
      for (std::size_t i = 0; i < n; ++i) {
        auto hi = v, lo = v;
        hi[i] += h;
        lo[i] -= h;
        const double fd = (logsumexp(beta, hi) - logsumexp(beta, lo)) / (2 * h);
        CHECK(std::abs(fd - p[i]) < 1e-6);
      }
    }
  }
}

TEST_SUITE("argmax_tiebreak") {
  TEST_CASE("ties resolve to the lowest index") {
    std::vector<double> v{1.0, 3.0, 3.0};
    CHECK(argmax_tiebreak(v) == 1);
    std::vector<double> w{2.0, 2.0, 2.0};
    CHECK(argmax_tiebreak(w) == 0);
    std::vector<double> u{-5.0};
    CHECK(argmax_tiebreak(u) == 0);
  }

  TEST_CASE("rejects empty input") {
    CHECK_THROWS_AS(argmax_tiebreak(std::span<const double>{}),
                    std::invalid_argument);
  }
}

TEST_SUITE("entropy") {
  TEST_CASE("uniform and one-hot extremes") {
    std::vector<double> u{0.25, 0.25, 0.25, 0.25};
    CHECK(entropy(u) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    std::vector<double> d{1.0, 0.0, 0.0};
    CHECK(entropy(d) == 0.0);
  }
}

TEST_SUITE("rng") {
  TEST_CASE("same seed reproduces the stream") {
    Rng a = rng_stream(1234, 0);
    Rng b = rng_stream(1234, 0);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  }

  TEST_CASE("different stream tags diverge immediately") {
    Rng a = rng_stream(1234, 0);
    Rng b = rng_stream(1234, 1);
    bool differ = false;
    for (int i = 0; i < 10; ++i) differ |= (a.next_u64() != b.next_u64());
    CHECK(differ);
  }

  TEST_CASE("uniform01 stays in [0,1) and fills buckets evenly") {
    Rng rng(99);
    const int kDraws = 10000, kBuckets = 16;
    std::vector<int> counts(kBuckets, 0);
    for (int i = 0; i < kDraws; ++i) {
      const double u = rng.uniform01();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
      ++counts[static_cast<int>(u * kBuckets)];
    }
    const double expected = double(kDraws) / kBuckets;
    const double sigma = std::sqrt(kDraws * (1.0 / kBuckets) * (15.0 / 16.0));
    for (int c : counts) CHECK(std::abs(c - expected) <= 3.0 * sigma);
  }

  TEST_CASE("below(n) is in range and roughly uniform") {
    Rng rng(7);
    const int kDraws = 10000;
    std::vector<int> counts(5, 0);
    for (int i = 0; i < kDraws; ++i) {
      const std::size_t k = rng.below(5);
      REQUIRE(k < 5);
      ++counts[k];
    }
    const double expected = kDraws / 5.0;
    const double sigma = std::sqrt(kDraws * 0.2 * 0.8);
    for (int c : counts) CHECK(std::abs(c - expected) <= 3.0 * sigma);
  }

  TEST_CASE("categorical matches its probabilities") {
    Rng rng(8);
    std::vector<double> p{0.3, 0.7};
    int ones = 0;
    const int kDraws = 10000;
    for (int i = 0; i < kDraws; ++i) ones += (rng.categorical(p) == 1);
    const double sigma = std::sqrt(kDraws * 0.7 * 0.3);
    CHECK(std::abs(ones - 7000.0) <= 3.0 * sigma);
  }
}
