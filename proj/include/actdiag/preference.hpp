#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string_view>
#include <utility>
#include <vector>

#include "actdiag/core.hpp"
#include "actdiag/rng.hpp"

namespace actdiag::preference {

inline constexpr std::size_t kItems = 10;
inline constexpr std::size_t kPairs = pair_count(kItems);  // 45

/// Synthetic ranking source: uniform, Mallows around a center, or a mixture.
class RankingDistribution {
 public:
  enum class Kind { Uniform, Mallows, Mixture };

  static RankingDistribution uniform(std::size_t n_items);
  static RankingDistribution mallows(Ranking center, double theta);
  static RankingDistribution mixture(std::vector<std::pair<double, RankingDistribution>> components);

  Kind kind() const { return kind_; }
  std::size_t n_items() const { return n_items_; }
  const Ranking& center() const { return center_; }
  double theta() const { return theta_; }
  const std::vector<std::pair<double, RankingDistribution>>& components() const { return components_; }

 private:
  Kind kind_ = Kind::Uniform;
  std::size_t n_items_ = 0;
  Ranking center_;
  double theta_ = 0.0;
  std::vector<std::pair<double, RankingDistribution>> components_;
};

/// Center of the default Mallows component; Kendall 1/45 against 0..9.
Ranking default_center();

/// 0.8 * Mallows(default_center, 0.7) + 0.2 * uniform over 10 items.
RankingDistribution default_distribution();

Ranking sample_ranking(const RankingDistribution& dist, Rng& rng);

/// Entry pair_index(i, j) is One iff item i is ranked above item j.
ObservationVector ranking_observations(const Ranking& r);

enum class SortAlgorithm { Bubble, Quick, Merge };

SortAlgorithm parse_sort_algorithm(std::string_view name);

struct SortSnapshot {
  std::size_t comparisons = 0;
  double kendall = 0.0;
};

/// Sorts an array starting at 0..L-1, answering each comparison from the
/// hidden ranking (flipped with probability noise_rate). Records the Kendall
/// correlation of the current array after every comparison.
std::vector<SortSnapshot> sort_baseline_trace(SortAlgorithm algorithm, const Ranking& hidden, double noise_rate,
                                              Rng& rng);

/// Kendall correlation of a sort trace after `budget` comparisons; the
/// initial array's correlation when budget is 0.
double trace_kendall_at(const std::vector<SortSnapshot>& trace, const Ranking& hidden, std::size_t budget);

/// One ranking per row, item ids best first, comma separated.
std::vector<Ranking> read_rankings_csv(const std::filesystem::path& path);
void write_rankings_csv(const std::filesystem::path& path, const std::vector<Ranking>& rankings);

}  // namespace actdiag::preference
