#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "actdiag/core.hpp"
#include "actdiag/model.hpp"
#include "actdiag/rng.hpp"

namespace actdiag {

/// query_s(O): the value of observation `index` under a fixed hidden hypothesis.
using QueryOracle = std::function<ObservationValue(std::size_t index)>;

/// Anything that maps the current partial state to P(O_i = 1 | state).
using BeliefFunction = std::function<BeliefVector(const ObservationVector&)>;

struct CollectorConfig {
  std::size_t budget = 0;
  double noise_rate = 0.0;
  std::uint64_t rng_seed = kDefaultSeed;
  /// Queryable indices; all indices when empty.
  std::optional<std::vector<std::size_t>> candidates;

  void validate(std::size_t n_obs) const;
};

struct TraceRow {
  std::size_t step = 0;
  std::size_t index = 0;
  ObservationValue value = ObservationValue::Zero;
  double entropy = 0.0;  // of the selected index at selection time
  double prob = 0.0;     // P(O_index = 1) at selection time
};

struct CollectResult {
  ObservationLog log;
  ObservationVector observed;
  std::vector<TraceRow> trace;
};

/// Candidate with the largest binary entropy; ties go to the lowest index.
std::size_t select_next(const BeliefVector& beliefs, std::span<const std::size_t> candidates);

/// Entropy-greedy choice from the model's beliefs. Candidates must be
/// non-empty and unobserved.
std::size_t select_next(const ImplicationModel& model, const ObservationVector& observed,
                        std::span<const std::size_t> candidates);

/// Observation collection: repeatedly query the max-entropy unobserved index.
/// Each answer is flipped with probability cfg.noise_rate; the possibly
/// corrupted value is what gets logged and fed back.
CollectResult collect(const BeliefFunction& beliefs, std::size_t n_obs, const QueryOracle& oracle,
                      const CollectorConfig& cfg);
CollectResult collect(const ImplicationModel& model, const QueryOracle& oracle, const CollectorConfig& cfg);

/// Oracle answering from a full observation vector.
QueryOracle truth_oracle(ObservationVector truth);

/// Wraps `oracle` so each answer is flipped with probability `rate`. The
/// returned oracle owns its own generator seeded with `seed`.
QueryOracle noisy_oracle(QueryOracle oracle, double rate, std::uint64_t seed);

/// "step,index,value,entropy,prob" with one row per query.
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);

}  // namespace actdiag
