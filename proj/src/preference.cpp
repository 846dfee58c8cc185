#include "actdiag/preference.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <sstream>

namespace actdiag::preference {

RankingDistribution RankingDistribution::uniform(std::size_t n_items) {
  if (n_items < 2) throw Error("ranking distributions need at least two items");
  RankingDistribution d;
  d.kind_ = Kind::Uniform;
  d.n_items_ = n_items;
  return d;
}

RankingDistribution RankingDistribution::mallows(Ranking center, double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw Error(fmt::format("Mallows theta must be > 0, got {}", theta));
  if (center.size() < 2) throw Error("ranking distributions need at least two items");
  RankingDistribution d;
  d.kind_ = Kind::Mallows;
  d.n_items_ = center.size();
  d.center_ = std::move(center);
  d.theta_ = theta;
  return d;
}

RankingDistribution RankingDistribution::mixture(std::vector<std::pair<double, RankingDistribution>> components) {
  if (components.empty()) throw Error("mixture needs at least one component");
  double total = 0.0;
  for (const auto& [w, c] : components) {
    if (!(w >= 0.0)) throw Error("mixture weights must be non-negative");
    if (c.n_items() != components.front().second.n_items()) throw Error("mixture components disagree on item count");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(fmt::format("mixture weights sum to {}, not 1", total));
  RankingDistribution d;
  d.kind_ = Kind::Mixture;
  d.n_items_ = components.front().second.n_items();
  d.components_ = std::move(components);
  return d;
}

Ranking default_center() { return Ranking({4, 1, 9, 0, 6, 8, 3, 5, 7, 2}); }

RankingDistribution default_distribution() {
  std::vector<std::pair<double, RankingDistribution>> parts;
  parts.emplace_back(0.8, RankingDistribution::mallows(default_center(), 0.7));
  parts.emplace_back(0.2, RankingDistribution::uniform(kItems));
  return RankingDistribution::mixture(std::move(parts));
}

Ranking sample_ranking(const RankingDistribution& dist, Rng& rng) {
  switch (dist.kind()) {
    case RankingDistribution::Kind::Uniform: {
      std::vector<int> order = Ranking::identity(dist.n_items()).order();
      shuffle(order, rng);
      return Ranking(std::move(order));
    }
    case RankingDistribution::Kind::Mallows: {
      // repeated insertion: the k-th center item lands `d` slots before the
      // end with probability proportional to phi^d
      const double phi = std::exp(-dist.theta());
      std::vector<int> order;
      for (std::size_t k = 0; k < dist.n_items(); ++k) {
        double norm = 0.0;
        for (std::size_t d = 0; d <= k; ++d) norm += std::pow(phi, static_cast<double>(d));
        double u = uniform01(rng) * norm;
        std::size_t back = 0;
        for (; back < k; ++back) {
          u -= std::pow(phi, static_cast<double>(back));
          if (u < 0.0) break;
        }
        order.insert(order.end() - static_cast<std::ptrdiff_t>(back), dist.center()[k]);
      }
      return Ranking(std::move(order));
    }
    case RankingDistribution::Kind::Mixture: {
      double u = uniform01(rng);
      const auto& parts = dist.components();
      for (std::size_t c = 0; c + 1 < parts.size(); ++c) {
        u -= parts[c].first;
        if (u < 0.0) return sample_ranking(parts[c].second, rng);
      }
      return sample_ranking(parts.back().second, rng);
    }
  }
  throw Error("unknown ranking distribution kind");
}

ObservationVector ranking_observations(const Ranking& r) {
  const std::size_t n = r.size();
  const auto pos = r.positions();
  ObservationVector v(pair_count(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) v.set(pair_index(i, j, n), from_bool(pos[i] < pos[j]));
  }
  return v;
}

SortAlgorithm parse_sort_algorithm(std::string_view name) {
  if (name == "bubble" || name == "bsort") return SortAlgorithm::Bubble;
  if (name == "quick" || name == "qsort") return SortAlgorithm::Quick;
  if (name == "merge" || name == "msort") return SortAlgorithm::Merge;
  throw Error(fmt::format("unknown sort algorithm '{}'", name));
}

namespace {

class InstrumentedSort {
 public:
  InstrumentedSort(const Ranking& hidden, double noise_rate, Rng& rng)
      : hidden_(hidden), pos_(hidden.positions()), noise_rate_(noise_rate), rng_(rng),
        array_(Ranking::identity(hidden.size()).order()) {}

  // Does the oracle say `a` should come before `b`?
  bool prefers(int a, int b) {
    bool answer = pos_[static_cast<std::size_t>(a)] < pos_[static_cast<std::size_t>(b)];
    if (uniform01(rng_) < noise_rate_) answer = !answer;
    ++comparisons_;
    trace_.push_back({comparisons_, 0.0});
    return answer;
  }

  // Re-scores the latest snapshot after the array moves that follow a comparison.
  void settle() {
    if (!trace_.empty()) trace_.back().kendall = kendall_correlation(Ranking(array_), hidden_);
  }

  std::vector<int>& array() { return array_; }
  std::vector<SortSnapshot> take() {
    settle();
    return std::move(trace_);
  }

 private:
  const Ranking& hidden_;
  std::vector<int> pos_;
  double noise_rate_;
  Rng& rng_;
  std::vector<int> array_;
  std::vector<SortSnapshot> trace_;
  std::size_t comparisons_ = 0;
};

void bubble_sort(InstrumentedSort& s) {
  auto& a = s.array();
  const std::size_t n = a.size();
  for (std::size_t pass = 0; pass + 1 < n; ++pass) {
    bool swapped = false;
    for (std::size_t j = 0; j + 1 < n - pass; ++j) {
      if (s.prefers(a[j + 1], a[j])) {
        std::swap(a[j], a[j + 1]);
        swapped = true;
      }
      s.settle();
    }
    if (!swapped) break;
  }
}

// Lomuto partition, last element as pivot.
void quick_sort(InstrumentedSort& s, std::ptrdiff_t lo, std::ptrdiff_t hi) {
  if (lo >= hi) return;
  auto& a = s.array();
  const int pivot = a[static_cast<std::size_t>(hi)];
  std::ptrdiff_t i = lo;
  for (std::ptrdiff_t j = lo; j < hi; ++j) {
    if (s.prefers(a[static_cast<std::size_t>(j)], pivot)) {
      std::swap(a[static_cast<std::size_t>(i)], a[static_cast<std::size_t>(j)]);
      ++i;
    }
    s.settle();
  }
  std::swap(a[static_cast<std::size_t>(i)], a[static_cast<std::size_t>(hi)]);
  s.settle();
  quick_sort(s, lo, i - 1);
  quick_sort(s, i + 1, hi);
}

// Top-down merge sort over [lo, hi). During a merge the array shows the merged
// prefix followed by the unmerged rest of both runs.
void merge_sort(InstrumentedSort& s, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return;
  const std::size_t mid = lo + (hi - lo) / 2;
  merge_sort(s, lo, mid);
  merge_sort(s, mid, hi);
  auto& a = s.array();
  const std::vector<int> left(a.begin() + static_cast<std::ptrdiff_t>(lo), a.begin() + static_cast<std::ptrdiff_t>(mid));
  const std::vector<int> right(a.begin() + static_cast<std::ptrdiff_t>(mid), a.begin() + static_cast<std::ptrdiff_t>(hi));
  std::size_t l = 0;
  std::size_t r = 0;
  std::size_t out = lo;
  auto write_view = [&] {
    std::size_t k = out;
    for (std::size_t x = l; x < left.size(); ++x) a[k++] = left[x];
    for (std::size_t x = r; x < right.size(); ++x) a[k++] = right[x];
  };
  while (l < left.size() && r < right.size()) {
    if (s.prefers(right[r], left[l])) {
      a[out++] = right[r++];
    } else {
      a[out++] = left[l++];
    }
    write_view();
    s.settle();
  }
  write_view();
}

}  // namespace

std::vector<SortSnapshot> sort_baseline_trace(SortAlgorithm algorithm, const Ranking& hidden, double noise_rate,
                                              Rng& rng) {
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw Error("noise_rate must lie in [0,1]");
  InstrumentedSort s(hidden, noise_rate, rng);
  switch (algorithm) {
    case SortAlgorithm::Bubble: bubble_sort(s); break;
    case SortAlgorithm::Quick: quick_sort(s, 0, static_cast<std::ptrdiff_t>(hidden.size()) - 1); break;
    case SortAlgorithm::Merge: merge_sort(s, 0, hidden.size()); break;
  }
  return s.take();
}

double trace_kendall_at(const std::vector<SortSnapshot>& trace, const Ranking& hidden, std::size_t budget) {
  if (budget == 0 || trace.empty()) return kendall_correlation(Ranking::identity(hidden.size()), hidden);
  return trace[std::min(budget, trace.size()) - 1].kendall;
}

std::vector<Ranking> read_rankings_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open ranking file '{}'", path.string()));
  std::vector<Ranking> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<int> order;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        order.push_back(std::stoi(cell, &used));
      } catch (const std::exception&) {
        throw Error(fmt::format("{}:{}: '{}' is not an item id", path.string(), line_no, cell));
      }
    }
    try {
      out.emplace_back(std::move(order));
    } catch (const Error& e) {
      throw Error(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
    if (out.back().size() != out.front().size()) {
      throw Error(fmt::format("{}:{}: ranking length differs from the first row", path.string(), line_no));
    }
  }
  return out;
}

void write_rankings_csv(const std::filesystem::path& path, const std::vector<Ranking>& rankings) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
  for (const auto& r : rankings) {
    for (std::size_t p = 0; p < r.size(); ++p) out << (p ? "," : "") << r[p];
    out << '\n';
  }
}

}  // namespace actdiag::preference
