#include "actdiag/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fmt/format.h>
#include <functional>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "actdiag/battleship.hpp"
#include "actdiag/collector.hpp"
#include "actdiag/delivery.hpp"

namespace actdiag::runner {

namespace {

// Runs body(i) for i in [0, n) on up to `workers` threads; rethrows the first failure.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

bool is_sort(Strategy s) { return s == Strategy::Bsort || s == Strategy::Qsort || s == Strategy::Msort; }

preference::SortAlgorithm sort_algorithm(Strategy s) {
  switch (s) {
    case Strategy::Bsort: return preference::SortAlgorithm::Bubble;
    case Strategy::Qsort: return preference::SortAlgorithm::Quick;
    default: return preference::SortAlgorithm::Merge;
  }
}

BeliefVector uniform_beliefs(std::size_t n) { return BeliefVector(std::vector<double>(n, 0.5)); }

struct TrialSeeds {
  std::uint64_t hypothesis;
  std::uint64_t strategy;
  std::uint64_t noise;
};

TrialSeeds trial_seeds(std::uint64_t eval_seed, std::size_t trial) {
  const std::uint64_t base = derive_seed(eval_seed, trial);
  return {derive_seed(base, 0), derive_seed(base, 1), derive_seed(base, 2)};
}

std::size_t max_budget(const ExperimentConfig& cfg) {
  return *std::max_element(cfg.budget_grid.begin(), cfg.budget_grid.end());
}

// Log of the chosen strategy run to the largest grid budget.
ObservationLog run_queries(const ExperimentConfig& cfg, const DomainContext& ctx, const ObservationVector& truth,
                           const TrialSeeds& seeds) {
  const std::size_t budget = max_budget(cfg);
  Rng rng(seeds.strategy);
  if (cfg.strategy == Strategy::Oc) {
    CollectorConfig cc;
    cc.budget = budget;
    cc.noise_rate = cfg.noise_rate;
    cc.rng_seed = seeds.noise;
    if (cfg.domain == Domain::Tiny) {
      const TinyProblem& tiny = *ctx.tiny;
      return collect([&tiny](const ObservationVector& s) { return exact_conditional(tiny, s); }, tiny.n_obs(),
                     truth_oracle(truth), cc)
          .log;
    }
    return collect(*ctx.model, truth_oracle(truth), cc).log;
  }
  const QueryOracle oracle = noisy_oracle(truth_oracle(truth), cfg.noise_rate, seeds.noise);
  switch (cfg.strategy) {
    case Strategy::Sink: return battleship::sink_baseline(oracle, budget, rng);
    case Strategy::RandLink: return network::rand_link_baseline(oracle, budget, rng, ctx.topology->n_links());
    default: {
      std::vector<std::size_t> order(truth.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      shuffle(order, rng);
      ObservationLog log;
      for (std::size_t k = 0; k < budget; ++k) log.append(order[k], oracle(order[k]));
      return log;
    }
  }
}

std::vector<double> run_trial(const ExperimentConfig& cfg, const DomainContext& ctx, std::size_t trial) {
  const TrialSeeds seeds = trial_seeds(cfg.eval_seed, trial);
  Rng hyp_rng(seeds.hypothesis);
  std::vector<double> metrics;
  metrics.reserve(cfg.budget_grid.size());

  switch (cfg.domain) {
    case Domain::Battleship: {
      const auto board = battleship::generate_board(hyp_rng);
      const auto truth = battleship::board_observations(board);
      const auto log = run_queries(cfg, ctx, truth, seeds);
      for (std::size_t b : cfg.budget_grid) {
        const auto prefix = log.prefix(b);
        if (cfg.delivery == Delivery::Solver) {
          const auto solved = battleship::battleship_solve(prefix, cfg.solver_limit);
          metrics.push_back(solved.board ? battleship::ships_correct(*solved.board, board) : 0.0);
        } else if (cfg.strategy == Strategy::Oc) {
          const auto belief = deliver(forward(*ctx.model, prefix.to_vector(battleship::kCells)), prefix);
          metrics.push_back(battleship::coordinate_accuracy(ml_guess(belief), board));
        } else {
          metrics.push_back(battleship::coordinate_accuracy(battleship::default_miss_guess(prefix), board));
        }
      }
      break;
    }
    case Domain::Preference: {
      const auto hidden = sample_ranking(preference::default_distribution(), hyp_rng);
      if (is_sort(cfg.strategy)) {
        Rng noise_rng(seeds.noise);
        const auto trace =
            preference::sort_baseline_trace(sort_algorithm(cfg.strategy), hidden, cfg.noise_rate, noise_rng);
        for (std::size_t b : cfg.budget_grid) metrics.push_back(preference::trace_kendall_at(trace, hidden, b));
        break;
      }
      const auto truth = preference::ranking_observations(hidden);
      const auto log = run_queries(cfg, ctx, truth, seeds);
      for (std::size_t b : cfg.budget_grid) {
        const auto prefix = log.prefix(b);
        const BeliefVector raw = cfg.strategy == Strategy::Oc
                                     ? forward(*ctx.model, prefix.to_vector(preference::kPairs))
                                     : uniform_beliefs(preference::kPairs);
        const Ranking guess = ranking_from_beliefs(deliver(raw, prefix), preference::kItems);
        metrics.push_back(kendall_correlation(guess, hidden));
      }
      break;
    }
    case Domain::Network: {
      const auto& topo = *ctx.topology;
      const auto fault = network::sample_fault(topo, cfg.p_fail, hyp_rng);
      const auto truth = network::fault_observations(topo, fault);
      const auto log = run_queries(cfg, ctx, truth, seeds);
      for (std::size_t b : cfg.budget_grid) {
        const auto prefix = log.prefix(b);
        const std::vector<bool> predicted =
            cfg.strategy == Strategy::Oc
                ? network_diagnosis(deliver(forward(*ctx.model, prefix.to_vector(topo.n_observations())), prefix),
                                    topo)
                : network::default_functional_guess(prefix, topo.n_links());
        metrics.push_back(network::link_accuracy(predicted, fault));
      }
      break;
    }
    case Domain::Tiny: {
      const auto& tiny = *ctx.tiny;
      double u = uniform01(hyp_rng);
      std::size_t pick = 0;
      for (; pick + 1 < tiny.hypotheses().size(); ++pick) {
        u -= tiny.hypotheses()[pick].prior;
        if (u < 0.0) break;
      }
      const auto& truth = tiny.hypotheses()[pick].observations;
      const auto log = run_queries(cfg, ctx, truth, seeds);
      for (std::size_t b : cfg.budget_grid) {
        const auto prefix = log.prefix(b);
        const auto guess = ml_guess(deliver(exact_conditional(tiny, prefix.to_vector(tiny.n_obs())), prefix));
        std::size_t correct = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) correct += guess[i] == truth[i] ? 1 : 0;
        metrics.push_back(static_cast<double>(correct) / static_cast<double>(truth.size()));
      }
      break;
    }
  }
  return metrics;
}

std::vector<double> ranks_of(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

Domain parse_domain(std::string_view s) {
  if (s == "battleship") return Domain::Battleship;
  if (s == "preference" || s == "sushi") return Domain::Preference;
  if (s == "network") return Domain::Network;
  if (s == "tiny") return Domain::Tiny;
  throw Error(fmt::format("unknown domain '{}'", s));
}

Strategy parse_strategy(std::string_view s) {
  if (s == "oc") return Strategy::Oc;
  if (s == "rand") return Strategy::Rand;
  if (s == "sink") return Strategy::Sink;
  if (s == "rand_link") return Strategy::RandLink;
  if (s == "bsort") return Strategy::Bsort;
  if (s == "qsort") return Strategy::Qsort;
  if (s == "msort") return Strategy::Msort;
  throw Error(fmt::format("unknown strategy '{}'", s));
}

Delivery parse_delivery(std::string_view s) {
  if (s == "ml") return Delivery::Ml;
  if (s == "solver") return Delivery::Solver;
  throw Error(fmt::format("unknown delivery '{}'", s));
}

std::string to_string(Domain d) {
  switch (d) {
    case Domain::Battleship: return "battleship";
    case Domain::Preference: return "preference";
    case Domain::Network: return "network";
    case Domain::Tiny: return "tiny";
  }
  return "?";
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Oc: return "oc";
    case Strategy::Rand: return "rand";
    case Strategy::Sink: return "sink";
    case Strategy::RandLink: return "rand_link";
    case Strategy::Bsort: return "bsort";
    case Strategy::Qsort: return "qsort";
    case Strategy::Msort: return "msort";
  }
  return "?";
}

std::size_t domain_observations(Domain d) {
  switch (d) {
    case Domain::Battleship: return battleship::kCells;
    case Domain::Preference: return preference::kPairs;
    case Domain::Network: return network::kObservations;
    case Domain::Tiny: return kTinyObservations;
  }
  return 0;
}

std::size_t default_train_size(Domain d) {
  switch (d) {
    case Domain::Battleship: return 20000;
    case Domain::Preference: return 2500;
    case Domain::Network: return 20000;
    case Domain::Tiny: return 0;
  }
  return 0;
}

void ExperimentConfig::validate() const {
  const bool ok = [&] {
    switch (strategy) {
      case Strategy::Oc: return true;
      case Strategy::Rand: return domain != Domain::Network;
      case Strategy::Sink: return domain == Domain::Battleship;
      case Strategy::RandLink: return domain == Domain::Network;
      default: return domain == Domain::Preference;
    }
  }();
  if (!ok) {
    throw Error(fmt::format("strategy '{}' is not available for domain '{}'", to_string(strategy), to_string(domain)));
  }
  if (delivery == Delivery::Solver && domain != Domain::Battleship) {
    throw Error("solver delivery is only defined for battleship");
  }
  if (budget_grid.empty()) throw Error("budget grid is empty");
  if (trials < 1) throw Error("trials must be >= 1");
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw Error("noise rate must lie in [0,1]");
  if (!(p_fail >= 0.0 && p_fail <= 1.0)) throw Error("p_fail must lie in [0,1]");
  if (domain == Domain::Tiny && noise_rate > 0.0) throw Error("the tiny domain is noiseless by construction");
  const std::size_t limit = strategy == Strategy::RandLink ? network::kLinks : domain_observations(domain);
  for (std::size_t b : budget_grid) {
    if (b > limit) {
      throw Error(fmt::format("budget {} exceeds the {} queries available to {} on {}", b, limit,
                              to_string(strategy), to_string(domain)));
    }
  }
  if (strategy == Strategy::Oc && domain != Domain::Tiny) training.validate();
}

std::vector<std::size_t> budget_range(std::size_t max_budget, std::size_t step) {
  if (step == 0) throw Error("budget step must be positive");
  std::vector<std::size_t> out;
  for (std::size_t b = 0; b <= max_budget; b += step) out.push_back(b);
  if (out.back() != max_budget) out.push_back(max_budget);
  return out;
}

ObservationDataset battleship_dataset(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  ObservationDataset data(battleship::kCells);
  for (std::size_t i = 0; i < count; ++i) data.add(battleship::board_observations(battleship::generate_board(rng)));
  return data;
}

std::vector<Ranking> sample_rankings(const preference::RankingDistribution& dist, std::size_t count,
                                     std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Ranking> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_ranking(dist, rng));
  return out;
}

ObservationDataset preference_dataset(const std::vector<Ranking>& base, std::size_t uniform_extra,
                                      std::uint64_t seed) {
  const std::size_t n_items = base.empty() ? preference::kItems : base.front().size();
  ObservationDataset data(pair_count(n_items));
  for (const auto& r : base) data.add(preference::ranking_observations(r));
  Rng rng(seed);
  const auto uniform = preference::RankingDistribution::uniform(n_items);
  for (std::size_t i = 0; i < uniform_extra; ++i) {
    data.add(preference::ranking_observations(sample_ranking(uniform, rng)));
  }
  return data;
}

ObservationDataset network_dataset(const network::TreeTopology& topo, std::size_t count, double p_fail,
                                   std::uint64_t seed) {
  Rng rng(seed);
  ObservationDataset data(topo.n_observations());
  for (std::size_t i = 0; i < count; ++i) {
    data.add(network::fault_observations(topo, network::sample_fault(topo, p_fail, rng)));
  }
  return data;
}

network::TreeTopology default_topology(std::uint64_t seed) {
  Rng rng(seed);
  return network::generate_topology(rng);
}

TinyProblem default_tiny_problem(std::uint64_t seed) {
  Rng rng(seed);
  return random_tiny_problem(rng, kTinyObservations, kTinyHypotheses, true);
}

ObservationDataset training_dataset(const ExperimentConfig& cfg, const DomainContext& ctx) {
  const std::size_t count = cfg.train_size ? cfg.train_size : default_train_size(cfg.domain);
  switch (cfg.domain) {
    case Domain::Battleship: return battleship_dataset(count, cfg.data_seed);
    case Domain::Preference: {
      const auto base = sample_rankings(preference::default_distribution(), count, cfg.data_seed);
      return preference_dataset(base, count, derive_seed(cfg.data_seed, 1));
    }
    case Domain::Network:
      if (!ctx.topology) throw Error("network training data needs a topology");
      return network_dataset(*ctx.topology, count, cfg.p_fail, cfg.data_seed);
    case Domain::Tiny: throw Error("the tiny domain uses exact beliefs and has no training data");
  }
  throw Error("unknown domain");
}

DomainContext prepare_context(const ExperimentConfig& cfg, DomainContext ctx) {
  if (cfg.domain == Domain::Network && !ctx.topology) ctx.topology = default_topology(cfg.topology_seed);
  if (cfg.domain == Domain::Tiny && !ctx.tiny) ctx.tiny = default_tiny_problem(cfg.data_seed);
  if (cfg.strategy == Strategy::Oc && cfg.domain != Domain::Tiny && !ctx.model) {
    ctx.model = fit(training_dataset(cfg, ctx), cfg.training);
  }
  return ctx;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const DomainContext& ctx) {
  cfg.validate();
  if (cfg.domain == Domain::Network && !ctx.topology) throw Error("network experiments need a topology");
  if (cfg.domain == Domain::Tiny && !ctx.tiny) throw Error("tiny experiments need a tiny problem");
  if (cfg.strategy == Strategy::Oc && cfg.domain != Domain::Tiny) {
    if (!ctx.model) throw Error("oc needs a trained implication model");
    const std::size_t expected =
        cfg.domain == Domain::Network ? ctx.topology->n_observations() : domain_observations(cfg.domain);
    if (ctx.model->n_obs() != expected) {
      throw Error(fmt::format("model has n_obs {}, domain '{}' needs {}", ctx.model->n_obs(), to_string(cfg.domain),
                              expected));
    }
  }

  std::vector<std::vector<double>> per_trial(cfg.trials);
  parallel_for(cfg.trials, cfg.workers, [&](std::size_t t) { per_trial[t] = run_trial(cfg, ctx, t); });

  ExperimentResult result;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    for (std::size_t g = 0; g < cfg.budget_grid.size(); ++g) {
      result.rows.push_back({t, cfg.budget_grid[g], per_trial[t][g]});
    }
  }
  for (std::size_t g = 0; g < cfg.budget_grid.size(); ++g) {
    double sum = 0.0;
    for (const auto& m : per_trial) sum += m[g];
    const double n = static_cast<double>(cfg.trials);
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& m : per_trial) ss += (m[g] - mean) * (m[g] - mean);
    const double se = cfg.trials > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    result.curve.push_back({cfg.budget_grid[g], mean, se, cfg.trials});
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_experiment(cfg, prepare_context(cfg));
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve) {
  out << "budget,mean,stderr,trials\n";
  for (const auto& p : curve) out << fmt::format("{},{:.9f},{:.9f},{}\n", p.budget, p.mean, p.stderr_of_mean, p.trials);
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRow>& rows) {
  out << "trial,budget,metric\n";
  for (const auto& r : rows) out << fmt::format("{},{},{:.9f}\n", r.trial, r.budget, r.metric);
}

std::vector<DependencyBin> dependency_report(const ImplicationModel* model, const network::TreeTopology& topo,
                                             std::size_t trials, std::size_t budget, double p_fail,
                                             std::uint64_t seed, Strategy strategy, std::size_t workers) {
  if (strategy != Strategy::Oc && strategy != Strategy::RandLink) {
    throw Error("dependency_report supports the oc and rand_link strategies");
  }
  if (strategy == Strategy::Oc && model == nullptr) throw Error("dependency_report with oc needs a model");
  if (trials < 1) throw Error("trials must be >= 1");

  ExperimentConfig cfg;
  cfg.domain = Domain::Network;
  cfg.strategy = strategy;
  cfg.budget_grid = {budget};
  cfg.p_fail = p_fail;
  cfg.eval_seed = seed;
  cfg.validate();
  DomainContext ctx;
  ctx.topology = topo;
  if (model != nullptr) ctx.model = *model;

  const std::size_t links = topo.n_links();
  std::vector<std::vector<bool>> correct(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    const TrialSeeds seeds = trial_seeds(seed, t);
    Rng hyp_rng(seeds.hypothesis);
    const auto fault = network::sample_fault(topo, p_fail, hyp_rng);
    const auto truth = network::fault_observations(topo, fault);
    const auto log = run_queries(cfg, ctx, truth, seeds);
    const std::vector<bool> predicted =
        strategy == Strategy::Oc
            ? network_diagnosis(deliver(forward(*ctx.model, log.to_vector(topo.n_observations())), log), topo)
            : network::default_functional_guess(log, links);
    correct[t].resize(links);
    for (std::size_t e = 0; e < links; ++e) correct[t][e] = predicted[e] == fault.failed[e];
  });

  std::vector<double> coef(links);
  for (std::size_t e = 0; e < links; ++e) coef[e] = network::dependency_coefficient(topo, e);
  const double lo = *std::min_element(coef.begin(), coef.end());
  const double hi = *std::max_element(coef.begin(), coef.end());
  constexpr std::size_t kBins = 10;
  const double width = hi > lo ? (hi - lo) / kBins : 1.0;

  std::vector<std::size_t> bin_links(kBins, 0);
  std::vector<std::size_t> bin_correct(kBins, 0);
  for (std::size_t e = 0; e < links; ++e) {
    const auto b = std::min(kBins - 1, static_cast<std::size_t>((coef[e] - lo) / width));
    ++bin_links[b];
    for (std::size_t t = 0; t < trials; ++t) bin_correct[b] += correct[t][e] ? 1 : 0;
  }
  std::vector<DependencyBin> bins;
  for (std::size_t b = 0; b < kBins; ++b) {
    if (bin_links[b] == 0) continue;
    const double b_lo = lo + width * static_cast<double>(b);
    const double b_hi = b_lo + width;
    bins.push_back({b_lo, b_hi, 0.5 * (b_lo + b_hi), bin_links[b],
                    static_cast<double>(bin_correct[b]) / static_cast<double>(bin_links[b] * trials)});
  }
  return bins;
}

void write_dependency_csv(std::ostream& out, const std::vector<DependencyBin>& bins) {
  out << "bin_lo,bin_hi,links,accuracy\n";
  for (const auto& b : bins) out << fmt::format("{:.9f},{:.9f},{},{:.9f}\n", b.lo, b.hi, b.links, b.accuracy);
}

double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error("spearman_correlation: length mismatch");
  if (x.size() < 2) return 0.0;
  const auto rx = ranks_of(x);
  const auto ry = ranks_of(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace actdiag::runner
