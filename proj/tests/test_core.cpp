#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "actdiag/core.hpp"
#include "actdiag/rng.hpp"

using namespace actdiag;

namespace {

// Direct count over all item pairs, independent of the library's implementation.
double kendall_oracle(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  std::vector<std::size_t> pa(n), pb(n);
  for (std::size_t p = 0; p < n; ++p) {
    pa[static_cast<std::size_t>(a[p])] = p;
    pb[static_cast<std::size_t>(b[p])] = p;
  }
  int score = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) score += ((pa[i] < pa[j]) == (pb[i] < pb[j])) ? 1 : -1;
  return static_cast<double>(score) / static_cast<double>(n * (n - 1) / 2);
}

}  // namespace

TEST_CASE("binary entropy values") {
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  const double direct = -(0.25 * std::log2(0.25) + 0.75 * std::log2(0.75));
  CHECK(binary_entropy(0.25) == doctest::Approx(direct).epsilon(1e-14));
  CHECK(binary_entropy(0.25) == doctest::Approx(0.811278124459).epsilon(1e-11));
}

TEST_CASE("binary entropy is symmetric and peaks at one half") {
  for (int k = 0; k <= 1000; ++k) {
    const double p = k / 1000.0;
    CHECK(std::abs(binary_entropy(p) - binary_entropy(1.0 - p)) < 1e-12);
    if (k != 500) CHECK(binary_entropy(p) < binary_entropy(0.5));
  }
}

TEST_CASE("binary entropy rejects NaN") { CHECK_THROWS_AS(binary_entropy(std::nan("")), Error); }

TEST_CASE("kendall correlation examples") {
  const Ranking id = Ranking::identity(10);
  CHECK(kendall_correlation(id, id) == 1.0);
  CHECK(kendall_correlation(id, id.reversed()) == -1.0);
  std::vector<int> swapped = id.order();
  std::swap(swapped[4], swapped[5]);
  CHECK(kendall_correlation(id, Ranking(swapped)) == doctest::Approx(1.0 - 2.0 / 45.0).epsilon(1e-12));
  CHECK(kendall_correlation(id, Ranking(swapped)) == doctest::Approx(kendall_oracle(id.order(), swapped)).epsilon(1e-12));
}

TEST_CASE("kendall correlation on random permutations") {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    std::vector<int> a = Ranking::identity(10).order();
    std::vector<int> b = a;
    shuffle(a, rng);
    shuffle(b, rng);
    const Ranking ra(a);
    CHECK(kendall_correlation(ra, ra) == 1.0);
    CHECK(kendall_correlation(ra, ra.reversed()) == -1.0);
    CHECK(kendall_correlation(ra, Ranking(b)) == doctest::Approx(kendall_oracle(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("kendall correlation rejects mismatched or tiny rankings") {
  CHECK_THROWS_AS(kendall_correlation(Ranking::identity(3), Ranking::identity(4)), Error);
  CHECK_THROWS_AS(kendall_correlation(Ranking::identity(1), Ranking::identity(1)), Error);
}

TEST_CASE("pair index is lexicographic") {
  CHECK(pair_index(0, 1, 10) == 0);
  CHECK(pair_index(8, 9, 10) == 44);
  CHECK(pair_index(0, 1, 2) == 0);
  std::size_t expected = 0;
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = i + 1; j < 10; ++j) CHECK(pair_index(i, j, 10) == expected++);
  CHECK(expected == pair_count(10));
  CHECK_THROWS_AS(pair_index(3, 3, 10), Error);
  CHECK_THROWS_AS(pair_index(4, 3, 10), Error);
  CHECK_THROWS_AS(pair_index(3, 10, 10), Error);
}

TEST_CASE("ranking validates permutations") {
  CHECK_THROWS_AS(Ranking({0, 0, 1}), Error);
  CHECK_THROWS_AS(Ranking({0, 3, 1}), Error);
  CHECK_THROWS_AS(Ranking({-1, 0}), Error);
  const Ranking r({2, 0, 1});
  CHECK(r.positions() == std::vector<int>{1, 2, 0});
  CHECK(r.reversed().order() == std::vector<int>{1, 0, 2});
}

TEST_CASE("observation vector basics") {
  auto v = ObservationVector::unknown(4);
  CHECK(v.observed_count() == 0);
  CHECK_FALSE(v.is_full());
  v.set(2, ObservationValue::One);
  CHECK(v.is_observed(2));
  CHECK(v.unobserved_indices() == std::vector<std::size_t>{0, 1, 3});
  CHECK_THROWS_AS(v.at(4), Error);
  const int bits[] = {1, 0, 1};
  const auto f = ObservationVector::from_bits(bits);
  CHECK(f.is_full());
  CHECK(f[1] == ObservationValue::Zero);
  const int bad[] = {1, 2};
  CHECK_THROWS_AS(ObservationVector::from_bits(bad), Error);
  CHECK(flip(ObservationValue::One) == ObservationValue::Zero);
  CHECK(flip(ObservationValue::Unknown) == ObservationValue::Unknown);
}

TEST_CASE("belief vector rejects out-of-range probabilities") {
  CHECK_THROWS_AS(BeliefVector({0.5, 1.5}), Error);
  CHECK_THROWS_AS(BeliefVector({-0.1}), Error);
  CHECK_THROWS_AS(BeliefVector({std::nan("")}), Error);
  CHECK_NOTHROW(BeliefVector({0.0, 1.0}));
}

TEST_CASE("observation log rejects duplicates and unknown values") {
  ObservationLog log;
  log.append(3, ObservationValue::One);
  log.append(1, ObservationValue::Zero);
  CHECK_THROWS_AS(log.append(3, ObservationValue::Zero), Error);
  CHECK_THROWS_AS(log.append(2, ObservationValue::Unknown), Error);
  CHECK(log.contains(1));
  CHECK(log.prefix(1).size() == 1);
  const auto v = log.to_vector(4);
  CHECK(v[3] == ObservationValue::One);
  CHECK(v[1] == ObservationValue::Zero);
  CHECK(v[0] == ObservationValue::Unknown);
  CHECK_THROWS_AS(log.to_vector(3), Error);
}

TEST_CASE("rng helpers are deterministic and in range") {
  Rng a(5), b(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform01(a);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == uniform01(b));
    CHECK(uniform_below(a, 7) < 7);
    uniform_below(b, 7);
  }
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(9, 4) == derive_seed(9, 4));
}
