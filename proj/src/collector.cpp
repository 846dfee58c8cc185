#include "actdiag/collector.hpp"

#include <fmt/format.h>
#include <memory>
#include <numeric>
#include <ostream>

namespace actdiag {

void CollectorConfig::validate(std::size_t n_obs) const {
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw Error(fmt::format("noise_rate {} not in [0,1]", noise_rate));
  const std::size_t pool = candidates ? candidates->size() : n_obs;
  if (budget > pool) throw Error(fmt::format("budget {} exceeds the {} queryable observations", budget, pool));
  if (candidates) {
    for (std::size_t c : *candidates) {
      if (c >= n_obs) throw Error(fmt::format("candidate index {} out of range (N = {})", c, n_obs));
    }
  }
}

std::size_t select_next(const BeliefVector& beliefs, std::span<const std::size_t> candidates) {
  if (candidates.empty()) throw Error("select_next: empty candidate set");
  std::size_t best = candidates[0];
  double best_h = -1.0;
  for (std::size_t j : candidates) {
    if (j >= beliefs.size()) throw Error(fmt::format("candidate index {} out of range", j));
    const double h = binary_entropy(beliefs[j]);
    if (h > best_h || (h == best_h && j < best)) {
      best = j;
      best_h = h;
    }
  }
  return best;
}

std::size_t select_next(const ImplicationModel& model, const ObservationVector& observed,
                        std::span<const std::size_t> candidates) {
  for (std::size_t j : candidates) {
    if (j < observed.size() && observed.is_observed(j)) {
      throw Error(fmt::format("select_next: candidate {} is already observed", j));
    }
  }
  return select_next(forward(model, observed), candidates);
}

CollectResult collect(const BeliefFunction& beliefs, std::size_t n_obs, const QueryOracle& oracle,
                      const CollectorConfig& cfg) {
  cfg.validate(n_obs);
  std::vector<std::size_t> pool;
  if (cfg.candidates) {
    pool = *cfg.candidates;
  } else {
    pool.resize(n_obs);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
  }
  Rng noise_rng(cfg.rng_seed);
  CollectResult result{{}, ObservationVector(n_obs), {}};

  for (std::size_t step = 0; step < cfg.budget; ++step) {
    std::vector<std::size_t> open;
    open.reserve(pool.size());
    for (std::size_t j : pool) {
      if (!result.observed.is_observed(j)) open.push_back(j);
    }
    const BeliefVector b = beliefs(result.observed);
    if (b.size() != n_obs) throw Error("belief function returned the wrong length");
    const std::size_t pick = select_next(b, open);

    ObservationValue value = oracle(pick);
    if (value == ObservationValue::Unknown) throw Error(fmt::format("oracle returned Unknown for index {}", pick));
    // one draw per query keeps the noise stream aligned across noise rates
    if (uniform01(noise_rng) < cfg.noise_rate) value = flip(value);

    result.observed.set(pick, value);
    result.log.append(pick, value);
    result.trace.push_back({step, pick, value, binary_entropy(b[pick]), b[pick]});
  }
  return result;
}

CollectResult collect(const ImplicationModel& model, const QueryOracle& oracle, const CollectorConfig& cfg) {
  return collect([&model](const ObservationVector& obs) { return forward(model, obs); }, model.n_obs(), oracle,
                 cfg);
}

QueryOracle truth_oracle(ObservationVector truth) {
  return [truth = std::move(truth)](std::size_t index) { return truth.at(index); };
}

QueryOracle noisy_oracle(QueryOracle oracle, double rate, std::uint64_t seed) {
  auto rng = std::make_shared<Rng>(seed);
  return [oracle = std::move(oracle), rate, rng](std::size_t index) {
    ObservationValue v = oracle(index);
    if (uniform01(*rng) < rate) v = flip(v);
    return v;
  };
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << "step,index,value,entropy,prob\n";
  for (const auto& row : trace) {
    out << fmt::format("{},{},{},{:.9f},{:.9f}\n", row.step, row.index,
                       row.value == ObservationValue::One ? 1 : 0, row.entropy, row.prob);
  }
}

}  // namespace actdiag
