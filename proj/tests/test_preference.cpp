#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "actdiag/preference.hpp"

using namespace actdiag;
using namespace actdiag::preference;

namespace {

Ranking random_ranking(Rng& rng) {
  std::vector<int> v = Ranking::identity(kItems).order();
  shuffle(v, rng);
  return Ranking(v);
}

}  // namespace

TEST_CASE("uniform rankings fill every position evenly") {
  Rng rng(1);
  const auto dist = RankingDistribution::uniform(kItems);
  std::array<std::array<int, kItems>, kItems> count{};
  for (int t = 0; t < 10000; ++t) {
    const Ranking r = sample_ranking(dist, rng);
    for (std::size_t p = 0; p < kItems; ++p) ++count[static_cast<std::size_t>(r[p])][p];
  }
  for (const auto& row : count)
    for (int c : row) CHECK(std::abs(c / 10000.0 - 0.1) < 0.02);
}

TEST_CASE("mallows concentrates on its center") {
  Rng rng(2);
  const Ranking center = default_center();
  const auto sharp = RankingDistribution::mallows(center, 50.0);
  int hits = 0;
  for (int t = 0; t < 1000; ++t) hits += sample_ranking(sharp, rng) == center ? 1 : 0;
  CHECK(hits > 990);

  const auto soft = RankingDistribution::mallows(center, 0.7);
  double total = 0.0;
  for (int t = 0; t < 10000; ++t) total += kendall_correlation(sample_ranking(soft, rng), center);
  CHECK(total / 10000.0 > 0.2);
}

TEST_CASE("mallows insertion probabilities match the closed form for three items") {
  // P(r) is proportional to exp(-theta * inversions(r, center)).
  Rng rng(3);
  const double theta = 0.9;
  const auto dist = RankingDistribution::mallows(Ranking::identity(3), theta);
  std::map<std::vector<int>, int> freq;
  const int n = 200000;
  for (int t = 0; t < n; ++t) ++freq[sample_ranking(dist, rng).order()];
  std::vector<int> perm{0, 1, 2};
  double z = 0.0;
  std::map<std::vector<int>, double> weight;
  do {
    int inv = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) inv += perm[static_cast<std::size_t>(i)] > perm[static_cast<std::size_t>(j)];
    weight[perm] = std::exp(-theta * inv);
    z += weight[perm];
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (const auto& [p, w] : weight) CHECK(std::abs(freq[p] / static_cast<double>(n) - w / z) < 0.005);
}

TEST_CASE("distribution validation") {
  CHECK_THROWS_AS(RankingDistribution::mallows(default_center(), 0.0), Error);
  CHECK_THROWS_AS(RankingDistribution::uniform(1), Error);
  std::vector<std::pair<double, RankingDistribution>> parts;
  parts.emplace_back(0.5, RankingDistribution::uniform(10));
  CHECK_THROWS_AS(RankingDistribution::mixture(parts), Error);
  parts.emplace_back(0.5, RankingDistribution::uniform(9));
  CHECK_THROWS_AS(RankingDistribution::mixture(parts), Error);
}

TEST_CASE("default center is nearly uncorrelated with the identity") {
  CHECK(std::abs(kendall_correlation(default_center(), Ranking::identity(kItems))) < 0.1);
}

TEST_CASE("ranking observations") {
  const auto id = ranking_observations(Ranking::identity(kItems));
  for (std::size_t k = 0; k < kPairs; ++k) CHECK(id[k] == ObservationValue::One);
  const auto rev = ranking_observations(Ranking::identity(kItems).reversed());
  for (std::size_t k = 0; k < kPairs; ++k) CHECK(rev[k] == ObservationValue::Zero);
  std::vector<int> sw = Ranking::identity(kItems).order();
  std::swap(sw[3], sw[4]);
  const auto one = ranking_observations(Ranking(sw));
  for (std::size_t k = 0; k < kPairs; ++k)
    CHECK((one[k] == ObservationValue::Zero) == (k == pair_index(3, 4, kItems)));
}

TEST_CASE("ranking observations are injective") {
  Rng rng(4);
  std::set<std::vector<int>> rankings;
  std::set<std::vector<ObservationValue>> vectors;
  for (int t = 0; t < 2000; ++t) {
    const Ranking r = random_ranking(rng);
    rankings.insert(r.order());
    vectors.insert(ranking_observations(r).values());
  }
  CHECK(rankings.size() == vectors.size());
}

TEST_CASE("bubble sort on an already sorted array") {
  Rng rng(5);
  const auto trace = sort_baseline_trace(SortAlgorithm::Bubble, Ranking::identity(kItems), 0.0, rng);
  REQUIRE(trace.size() == 9);
  for (std::size_t k = 0; k < trace.size(); ++k) {
    CHECK(trace[k].comparisons == k + 1);
    CHECK(trace[k].kendall == 1.0);
  }
}

TEST_CASE("quicksort worst case uses n(n-1)/2 comparisons") {
  Rng rng(6);
  const auto trace = sort_baseline_trace(SortAlgorithm::Quick, Ranking::identity(kItems), 0.0, rng);
  CHECK(trace.size() == 45);
  CHECK(trace.back().kendall == 1.0);
}

TEST_CASE("noiseless sorts always finish sorted") {
  Rng rng(7);
  for (int t = 0; t < 200; ++t) {
    const Ranking hidden = random_ranking(rng);
    for (auto alg : {SortAlgorithm::Bubble, SortAlgorithm::Quick, SortAlgorithm::Merge}) {
      const auto trace = sort_baseline_trace(alg, hidden, 0.0, rng);
      REQUIRE_FALSE(trace.empty());
      CHECK(trace.back().kendall == 1.0);
      CHECK(trace.size() <= 45);
      CHECK(trace_kendall_at(trace, hidden, 45) == 1.0);
      CHECK(trace_kendall_at(trace, hidden, 0) == kendall_correlation(Ranking::identity(kItems), hidden));
    }
  }
}

TEST_CASE("merge sort comparison count is bounded") {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    const auto trace = sort_baseline_trace(SortAlgorithm::Merge, random_ranking(rng), 0.0, rng);
    CHECK(trace.size() <= 25);  // worst case for top-down merge sort on 10 items
    CHECK(trace.size() >= 15);
  }
}

TEST_CASE("noisy sorts may end unsorted") {
  Rng rng(9);
  int unsorted = 0;
  for (int t = 0; t < 100; ++t) {
    const auto trace = sort_baseline_trace(SortAlgorithm::Quick, random_ranking(rng), 0.3, rng);
    unsorted += trace.back().kendall < 1.0 ? 1 : 0;
  }
  CHECK(unsorted > 0);
  CHECK_THROWS_AS(sort_baseline_trace(SortAlgorithm::Quick, Ranking::identity(3), 1.5, rng), Error);
}

TEST_CASE("sort algorithm names") {
  CHECK(parse_sort_algorithm("qsort") == SortAlgorithm::Quick);
  CHECK(parse_sort_algorithm("msort") == SortAlgorithm::Merge);
  CHECK(parse_sort_algorithm("bsort") == SortAlgorithm::Bubble);
  CHECK_THROWS_AS(parse_sort_algorithm("heap"), Error);
}

TEST_CASE("ranking csv round trip and errors") {
  Rng rng(10);
  std::vector<Ranking> rankings;
  for (int t = 0; t < 20; ++t) rankings.push_back(random_ranking(rng));
  const auto path = std::filesystem::temp_directory_path() / "actdiag_test_rankings.csv";
  write_rankings_csv(path, rankings);
  CHECK(read_rankings_csv(path) == rankings);
  std::ofstream(path) << "0,1,1\n";
  CHECK_THROWS_AS(read_rankings_csv(path), Error);
  std::ofstream(path) << "0,1,2\n0,1\n";
  CHECK_THROWS_AS(read_rankings_csv(path), Error);
  std::ofstream(path) << "0,x,2\n";
  CHECK_THROWS_AS(read_rankings_csv(path), Error);
  std::filesystem::remove(path);
}
