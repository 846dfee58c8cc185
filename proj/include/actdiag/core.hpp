#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace actdiag {

/// Raised for every contract violation and malformed input in the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Probabilities are clamped to [kProbFloor, 1 - kProbFloor] before logs.
inline constexpr double kProbFloor = 1e-9;

enum class ObservationValue : std::uint8_t { Zero = 0, One = 1, Unknown = 2 };

inline ObservationValue flip(ObservationValue v) {
  switch (v) {
    case ObservationValue::Zero: return ObservationValue::One;
    case ObservationValue::One: return ObservationValue::Zero;
    default: return v;
  }
}

inline ObservationValue from_bool(bool b) { return b ? ObservationValue::One : ObservationValue::Zero; }

/// Fixed-length vector over {Zero, One, Unknown}. Holds both full observation
/// vectors and the partial state built up during collection.
class ObservationVector {
 public:
  ObservationVector() = default;
  explicit ObservationVector(std::size_t n, ObservationValue fill = ObservationValue::Unknown)
      : values_(n, fill) {}
  explicit ObservationVector(std::vector<ObservationValue> values) : values_(std::move(values)) {}
  ObservationVector(std::initializer_list<ObservationValue> values) : values_(values) {}

  static ObservationVector unknown(std::size_t n) { return ObservationVector(n); }
  /// Builds a full vector from 0/1 flags.
  static ObservationVector from_bits(std::span<const int> bits);

  std::size_t size() const { return values_.size(); }
  ObservationValue operator[](std::size_t i) const { return values_[i]; }
  ObservationValue at(std::size_t i) const;
  void set(std::size_t i, ObservationValue v);

  bool is_full() const;
  bool is_observed(std::size_t i) const { return values_[i] != ObservationValue::Unknown; }
  std::size_t observed_count() const;
  std::vector<std::size_t> unobserved_indices() const;
  const std::vector<ObservationValue>& values() const { return values_; }

  friend bool operator==(const ObservationVector&, const ObservationVector&) = default;

 private:
  std::vector<ObservationValue> values_;
};

/// Per-dimension P(O_i = 1 | observed).
struct BeliefVector {
  std::vector<double> probs;

  BeliefVector() = default;
  explicit BeliefVector(std::vector<double> p);

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }
};

struct LogEntry {
  std::size_t index = 0;
  ObservationValue value = ObservationValue::Zero;

  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

/// Ordered record of queries actually made; indices are distinct.
class ObservationLog {
 public:
  void append(std::size_t index, ObservationValue value);
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool contains(std::size_t index) const { return seen_.contains(index); }
  const std::vector<LogEntry>& entries() const { return entries_; }
  const LogEntry& operator[](std::size_t i) const { return entries_[i]; }

  /// The first `count` entries.
  ObservationLog prefix(std::size_t count) const;
  /// Writes the logged values into an all-Unknown vector of length n.
  ObservationVector to_vector(std::size_t n) const;

 private:
  std::vector<LogEntry> entries_;
  std::unordered_set<std::size_t> seen_;
};

/// A full ranking: order()[p] is the item ranked p-th (0 is best).
class Ranking {
 public:
  Ranking() = default;
  explicit Ranking(std::vector<int> order);

  static Ranking identity(std::size_t n);

  std::size_t size() const { return order_.size(); }
  int operator[](std::size_t p) const { return order_[p]; }
  const std::vector<int>& order() const { return order_; }
  /// positions()[item] is the rank of the item.
  std::vector<int> positions() const;
  Ranking reversed() const;

  friend bool operator==(const Ranking&, const Ranking&) = default;

 private:
  std::vector<int> order_;
};

/// Entropy in bits of a Bernoulli(p) variable.
double binary_entropy(double p);

/// (concordant - discordant) / (L(L-1)/2) over all item pairs.
double kendall_correlation(const Ranking& a, const Ranking& b);

/// Lexicographic flattening of pairs i < j over L items.
std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n_items);
inline constexpr std::size_t pair_count(std::size_t n_items) { return n_items * (n_items - 1) / 2; }

}  // namespace actdiag
