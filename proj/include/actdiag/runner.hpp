#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "actdiag/model.hpp"
#include "actdiag/network.hpp"
#include "actdiag/preference.hpp"
#include "actdiag/tiny.hpp"

namespace actdiag::runner {

enum class Domain { Battleship, Preference, Network, Tiny };
enum class Strategy { Oc, Rand, Sink, RandLink, Bsort, Qsort, Msort };
/// Battleship only: ML guess per coordinate, or the constraint solver.
enum class Delivery { Ml, Solver };

Domain parse_domain(std::string_view s);
Strategy parse_strategy(std::string_view s);
Delivery parse_delivery(std::string_view s);
std::string to_string(Domain d);
std::string to_string(Strategy s);

/// Observation count of a domain (tiny problems use 6).
std::size_t domain_observations(Domain d);
std::size_t default_train_size(Domain d);

inline constexpr std::size_t kTinyObservations = 6;
inline constexpr std::size_t kTinyHypotheses = 16;

struct ExperimentConfig {
  Domain domain = Domain::Battleship;
  Strategy strategy = Strategy::Oc;
  Delivery delivery = Delivery::Ml;
  std::vector<std::size_t> budget_grid;
  std::size_t trials = 200;
  double noise_rate = 0.0;
  double p_fail = 0.02;
  std::uint64_t data_seed = kDefaultSeed;
  std::uint64_t train_seed = kDefaultSeed + 1;
  std::uint64_t eval_seed = kDefaultSeed + 2;
  std::uint64_t topology_seed = kDefaultSeed + 3;
  std::size_t train_size = 0;  // 0 selects default_train_size(domain)
  TrainingConfig training;
  std::size_t workers = 1;
  std::size_t solver_limit = 10'000'000;

  /// Rejects invalid domain/strategy pairings and out-of-range budgets.
  void validate() const;
};

/// Budgets 0, step, 2*step, ... up to and including max_budget.
std::vector<std::size_t> budget_range(std::size_t max_budget, std::size_t step);

struct CurvePoint {
  std::size_t budget = 0;
  double mean = 0.0;
  double stderr_of_mean = 0.0;
  std::size_t trials = 0;
};

struct TrialRow {
  std::size_t trial = 0;
  std::size_t budget = 0;
  double metric = 0.0;
};

struct ExperimentResult {
  std::vector<CurvePoint> curve;
  std::vector<TrialRow> rows;  // ordered by trial, then budget
};

/// Shared, read-only inputs of a domain: the topology, the tiny problem and,
/// for oc, the trained model.
struct DomainContext {
  std::optional<network::TreeTopology> topology;
  std::optional<TinyProblem> tiny;
  std::optional<ImplicationModel> model;
};

ObservationDataset battleship_dataset(std::size_t count, std::uint64_t seed);
std::vector<Ranking> sample_rankings(const preference::RankingDistribution& dist, std::size_t count,
                                     std::uint64_t seed);
/// Pairwise observation rows for `base`, plus `uniform_extra` uniformly random
/// permutations.
ObservationDataset preference_dataset(const std::vector<Ranking>& base, std::size_t uniform_extra,
                                      std::uint64_t seed);
ObservationDataset network_dataset(const network::TreeTopology& topo, std::size_t count, double p_fail,
                                   std::uint64_t seed);
network::TreeTopology default_topology(std::uint64_t seed);
TinyProblem default_tiny_problem(std::uint64_t seed);

/// Training rows for cfg.domain generated from cfg.data_seed.
ObservationDataset training_dataset(const ExperimentConfig& cfg, const DomainContext& ctx);

/// Fills in topology / tiny problem from seeds when absent, and trains a model
/// for oc when none was supplied.
DomainContext prepare_context(const ExperimentConfig& cfg, DomainContext ctx = {});

ExperimentResult run_experiment(const ExperimentConfig& cfg, const DomainContext& ctx);
ExperimentResult run_experiment(const ExperimentConfig& cfg);

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve);
void write_trials_csv(std::ostream& out, const std::vector<TrialRow>& rows);

struct DependencyBin {
  double lo = 0.0;
  double hi = 0.0;
  double center = 0.0;
  std::size_t links = 0;
  double accuracy = 0.0;
};

/// Per-link diagnosis accuracy at a fixed budget, averaged over `trials` fault
/// instances and grouped into 10 equal-width dependency-coefficient bins.
/// Empty bins are dropped. `strategy` is oc or rand_link.
std::vector<DependencyBin> dependency_report(const ImplicationModel* model, const network::TreeTopology& topo,
                                             std::size_t trials, std::size_t budget, double p_fail,
                                             std::uint64_t seed, Strategy strategy = Strategy::Oc,
                                             std::size_t workers = 1);

void write_dependency_csv(std::ostream& out, const std::vector<DependencyBin>& bins);

/// Spearman rank correlation with average ranks for ties; 0 when either
/// side is constant.
double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace actdiag::runner
