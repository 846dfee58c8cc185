#include "actdiag/core.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace actdiag {

ObservationVector ObservationVector::from_bits(std::span<const int> bits) {
  std::vector<ObservationValue> values;
  values.reserve(bits.size());
  for (int b : bits) {
    if (b != 0 && b != 1) throw Error(fmt::format("observation bit must be 0 or 1, got {}", b));
    values.push_back(from_bool(b == 1));
  }
  return ObservationVector(std::move(values));
}

ObservationValue ObservationVector::at(std::size_t i) const {
  if (i >= values_.size()) {
    throw Error(fmt::format("observation index {} out of range (N = {})", i, values_.size()));
  }
  return values_[i];
}

void ObservationVector::set(std::size_t i, ObservationValue v) {
  if (i >= values_.size()) {
    throw Error(fmt::format("observation index {} out of range (N = {})", i, values_.size()));
  }
  values_[i] = v;
}

bool ObservationVector::is_full() const {
  return std::none_of(values_.begin(), values_.end(),
                      [](ObservationValue v) { return v == ObservationValue::Unknown; });
}

std::size_t ObservationVector::observed_count() const {
  return static_cast<std::size_t>(std::count_if(
      values_.begin(), values_.end(), [](ObservationValue v) { return v != ObservationValue::Unknown; }));
}

std::vector<std::size_t> ObservationVector::unobserved_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] == ObservationValue::Unknown) out.push_back(i);
  }
  return out;
}

BeliefVector::BeliefVector(std::vector<double> p) : probs(std::move(p)) {
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0 && probs[i] <= 1.0)) {
      throw Error(fmt::format("belief[{}] = {} is not a probability", i, probs[i]));
    }
  }
}

void ObservationLog::append(std::size_t index, ObservationValue value) {
  if (value == ObservationValue::Unknown) throw Error("cannot log an Unknown observation");
  if (!seen_.insert(index).second) throw Error(fmt::format("observation {} already logged", index));
  entries_.push_back({index, value});
}

ObservationLog ObservationLog::prefix(std::size_t count) const {
  ObservationLog out;
  const std::size_t n = std::min(count, entries_.size());
  for (std::size_t i = 0; i < n; ++i) out.append(entries_[i].index, entries_[i].value);
  return out;
}

ObservationVector ObservationLog::to_vector(std::size_t n) const {
  ObservationVector v(n);
  for (const auto& e : entries_) v.set(e.index, e.value);
  return v;
}

Ranking::Ranking(std::vector<int> order) : order_(std::move(order)) {
  std::vector<bool> seen(order_.size(), false);
  for (int item : order_) {
    if (item < 0 || static_cast<std::size_t>(item) >= order_.size() || seen[static_cast<std::size_t>(item)]) {
      throw Error("ranking is not a permutation");
    }
    seen[static_cast<std::size_t>(item)] = true;
  }
}

Ranking Ranking::identity(std::size_t n) {
  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  return Ranking(std::move(order));
}

std::vector<int> Ranking::positions() const {
  std::vector<int> pos(order_.size());
  for (std::size_t p = 0; p < order_.size(); ++p) pos[static_cast<std::size_t>(order_[p])] = static_cast<int>(p);
  return pos;
}

Ranking Ranking::reversed() const { return Ranking(std::vector<int>(order_.rbegin(), order_.rend())); }

double binary_entropy(double p) {
  if (std::isnan(p)) throw Error("binary_entropy of NaN");
  if (p <= 0.0 || p >= 1.0) return 0.0;
  const double q = std::clamp(p, kProbFloor, 1.0 - kProbFloor);
  return -q * std::log2(q) - (1.0 - q) * std::log2(1.0 - q);
}

double kendall_correlation(const Ranking& a, const Ranking& b) {
  if (a.size() != b.size()) {
    throw Error(fmt::format("kendall_correlation: length mismatch ({} vs {})", a.size(), b.size()));
  }
  const std::size_t n = a.size();
  if (n < 2) throw Error("kendall_correlation needs at least two items");
  const auto pa = a.positions();
  const auto pb = b.positions();
  long long score = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool sa = pa[i] < pa[j];
      const bool sb = pb[i] < pb[j];
      score += (sa == sb) ? 1 : -1;
    }
  }
  return static_cast<double>(score) / static_cast<double>(pair_count(n));
}

std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n_items) {
  if (i >= j || j >= n_items) {
    throw Error(fmt::format("pair_index needs i < j < L, got ({}, {}, L = {})", i, j, n_items));
  }
  // pairs before row i: sum_{r<i} (L - 1 - r)
  return i * (2 * n_items - i - 1) / 2 + (j - i - 1);
}

}  // namespace actdiag
