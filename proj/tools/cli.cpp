#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "actdiag/battleship.hpp"
#include "actdiag/collector.hpp"
#include "actdiag/model.hpp"
#include "actdiag/network.hpp"
#include "actdiag/preference.hpp"
#include "actdiag/runner.hpp"
#include "actdiag/tiny.hpp"

namespace actdiag::cli {

namespace {

constexpr const char* kConfigHelp =
    "Config file: plain text, one 'key = value' per line, '#' comments. Keys are\n"
    "long flag names without the dashes (e.g. 'trials = 500'). Flags given on the\n"
    "command line override the file. Unset seeds default to documented constants,\n"
    "never to the clock.";

struct Options {
  std::string domain = "battleship";
  std::string strategy = "oc";
  std::string delivery = "ml";
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t data_seed = kDefaultSeed;
  std::uint64_t train_seed = kDefaultSeed + 1;
  std::uint64_t topology_seed = kDefaultSeed + 3;
  std::size_t workers = 1;
  std::string out;
  std::string per_trial_out;
  std::string config;
  std::string data;
  std::string model;
  std::string topology;
  std::size_t count = 0;
  std::size_t augment = 0;
  bool augment_set = false;
  std::size_t budget = 0;
  std::string budget_grid;
  std::size_t budget_step = 5;
  std::size_t trials = 200;
  std::size_t train_size = 0;
  std::size_t problems = 5;
  double noise = 0.0;
  double p_fail = 0.02;
  TrainingConfig training;
};

std::vector<std::size_t> parse_grid(const std::string& text) {
  std::vector<std::size_t> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      grid.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw Error(fmt::format("--budget-grid: '{}' is not a non-negative integer", item));
    }
  }
  if (grid.empty()) throw Error("--budget-grid is empty");
  return grid;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(fmt::format("cannot open '{}' for writing", path));
  f << text;
}

network::TreeTopology load_or_generate_topology(const Options& o) {
  if (!o.topology.empty()) return network::read_topology(o.topology);
  return runner::default_topology(o.topology_seed);
}

runner::ExperimentConfig experiment_config(const Options& o) {
  runner::ExperimentConfig cfg;
  cfg.domain = runner::parse_domain(o.domain);
  cfg.strategy = runner::parse_strategy(o.strategy);
  cfg.delivery = runner::parse_delivery(o.delivery);
  cfg.trials = o.trials;
  cfg.noise_rate = o.noise;
  cfg.p_fail = o.p_fail;
  cfg.data_seed = o.data_seed;
  cfg.train_seed = o.train_seed;
  cfg.eval_seed = o.seed;
  cfg.topology_seed = o.topology_seed;
  cfg.train_size = o.train_size;
  cfg.training = o.training;
  cfg.training.rng_seed = o.train_seed;
  cfg.workers = o.workers;
  if (!o.budget_grid.empty()) {
    cfg.budget_grid = parse_grid(o.budget_grid);
  } else {
    const std::size_t cap = cfg.strategy == runner::Strategy::RandLink ? network::kLinks
                                                                        : runner::domain_observations(cfg.domain);
    cfg.budget_grid = runner::budget_range(cap, o.budget_step);
  }
  return cfg;
}

int cmd_gen_data(const Options& o, std::ostream& out) {
  const auto domain = runner::parse_domain(o.domain);
  const std::size_t count = o.count ? o.count : runner::default_train_size(domain);
  switch (domain) {
    case runner::Domain::Battleship:
      write_dataset_csv(o.out, runner::battleship_dataset(count, o.seed));
      break;
    case runner::Domain::Preference:
      preference::write_rankings_csv(o.out,
                                     runner::sample_rankings(preference::default_distribution(), count, o.seed));
      break;
    case runner::Domain::Network:
      write_dataset_csv(o.out, runner::network_dataset(load_or_generate_topology(o), count, o.p_fail, o.seed));
      break;
    case runner::Domain::Tiny: throw Error("the tiny domain has no dataset");
  }
  out << fmt::format("wrote {} {} rows to {}\n", count, o.domain, o.out);
  return 0;
}

int cmd_gen_topology(const Options& o, std::ostream& out) {
  const auto topo = runner::default_topology(o.seed);
  network::write_topology(o.out, topo);
  out << fmt::format("wrote topology ({} nodes, {} links, {} extra pairs) to {}\n", topo.n_nodes(), topo.n_links(),
                     topo.extra_pairs().size(), o.out);
  return 0;
}

int cmd_train(const Options& o, std::ostream& out) {
  const auto domain = runner::parse_domain(o.domain);
  std::optional<ObservationDataset> data;
  if (domain == runner::Domain::Preference) {
    const auto rankings = preference::read_rankings_csv(o.data);
    data = runner::preference_dataset(rankings, o.augment_set ? o.augment : rankings.size(),
                                      derive_seed(o.seed, 1));
  } else if (domain == runner::Domain::Tiny) {
    throw Error("the tiny domain uses exact beliefs and is not trained");
  } else {
    data = read_dataset_csv(o.data);
  }
  TrainingConfig cfg = o.training;
  cfg.rng_seed = o.seed;
  const auto model = fit(*data, cfg);
  save_model(model, o.out);
  out << fmt::format("trained n_obs={} n_hidden={} on {} rows for {} epochs; saved {}\n", model.n_obs(),
                     model.n_hidden(), data->size(), cfg.epochs, o.out);
  return 0;
}

int cmd_collect(const Options& o, std::ostream& out) {
  const auto domain = runner::parse_domain(o.domain);
  Rng rng(o.seed);
  ObservationVector truth;
  std::optional<ImplicationModel> model;
  std::optional<TinyProblem> tiny;
  if (domain == runner::Domain::Tiny) {
    tiny = runner::default_tiny_problem(o.data_seed);
    truth = tiny->hypotheses()[uniform_below(rng, tiny->hypotheses().size())].observations;
  } else {
    if (o.model.empty()) throw Error("--model is required for this domain");
    model = load_model(o.model);
    switch (domain) {
      case runner::Domain::Battleship: truth = battleship::board_observations(battleship::generate_board(rng)); break;
      case runner::Domain::Preference:
        truth = preference::ranking_observations(sample_ranking(preference::default_distribution(), rng));
        break;
      default: {
        const auto topo = load_or_generate_topology(o);
        truth = network::fault_observations(topo, network::sample_fault(topo, o.p_fail, rng));
      }
    }
    if (model->n_obs() != truth.size()) {
      throw Error(fmt::format("model n_obs {} does not match the {} domain ({})", model->n_obs(), o.domain,
                              truth.size()));
    }
  }
  CollectorConfig cc;
  cc.budget = o.budget;
  cc.noise_rate = o.noise;
  cc.rng_seed = derive_seed(o.seed, 2);
  const CollectResult result =
      tiny ? collect([&](const ObservationVector& s) { return exact_conditional(*tiny, s); }, tiny->n_obs(),
                     truth_oracle(truth), cc)
           : collect(*model, truth_oracle(truth), cc);
  std::ostringstream csv;
  write_trace_csv(csv, result.trace);
  out << csv.str();
  if (!o.out.empty()) write_text(o.out, csv.str());
  return 0;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const auto cfg = experiment_config(o);
  cfg.validate();
  runner::DomainContext ctx;
  if (cfg.domain == runner::Domain::Network) ctx.topology = load_or_generate_topology(o);
  if (!o.model.empty()) ctx.model = load_model(o.model);
  ctx = runner::prepare_context(cfg, std::move(ctx));
  const auto result = runner::run_experiment(cfg, ctx);

  std::ostringstream csv;
  runner::write_curve_csv(csv, result.curve);
  if (!o.out.empty()) write_text(o.out, csv.str());
  if (!o.per_trial_out.empty()) {
    std::ostringstream rows;
    runner::write_trials_csv(rows, result.rows);
    write_text(o.per_trial_out, rows.str());
  }
  out << fmt::format("{} / {} / {} delivery, noise {}, {} trials\n", o.domain, o.strategy, o.delivery, o.noise,
                     cfg.trials);
  for (const auto& p : result.curve) {
    out << fmt::format("  budget {:>3}: {:.4f} +- {:.4f}\n", p.budget, p.mean, p.stderr_of_mean);
  }
  return 0;
}

int cmd_dep_report(const Options& o, std::ostream& out) {
  const auto strategy = runner::parse_strategy(o.strategy);
  const auto topo = load_or_generate_topology(o);
  std::optional<ImplicationModel> model;
  if (strategy == runner::Strategy::Oc) {
    if (o.model.empty()) throw Error("--model is required for the oc strategy");
    model = load_model(o.model);
  }
  const auto bins = runner::dependency_report(model ? &*model : nullptr, topo, o.trials, o.budget, o.p_fail, o.seed,
                                              strategy, o.workers);
  std::ostringstream csv;
  runner::write_dependency_csv(csv, bins);
  if (!o.out.empty()) write_text(o.out, csv.str());
  std::vector<double> centers;
  std::vector<double> accuracy;
  for (const auto& b : bins) {
    out << fmt::format("  dep [{:.4f}, {:.4f}) links {:>3}: accuracy {:.5f}\n", b.lo, b.hi, b.links, b.accuracy);
    centers.push_back(b.center);
    accuracy.push_back(b.accuracy);
  }
  out << fmt::format("spearman(dependency, accuracy) = {:.4f}\n", runner::spearman_correlation(centers, accuracy));
  return 0;
}

int cmd_verify_theorem(const Options& o, std::ostream& out) {
  Rng rng(o.seed);
  std::ostringstream csv;
  csv << "problem,state,entropy_argmax,gain_argmax,result\n";
  std::size_t failures = 0;
  for (std::size_t p = 0; p < o.problems; ++p) {
    const std::size_t n_obs = 3 + uniform_below(rng, 4);   // 3..6
    const std::size_t n_hyp = 2 + uniform_below(rng, 15);  // 2..16
    const bool weighted = p % 2 == 1;
    const auto problem = random_tiny_problem(rng, n_obs, n_hyp, weighted);
    const auto cases = check_entropy_gain_equivalence(problem);
    std::size_t passed = 0;
    for (const auto& c : cases) {
      const auto set_str = [](const std::vector<std::size_t>& s) { return fmt::format("{}", fmt::join(s, " ")); };
      const char* verdict = c.pass ? "PASS" : "FAIL";
      out << fmt::format("{} problem={} state={} argmax={{{}}}\n", verdict, p, describe_state(c.state),
                         set_str(c.entropy_argmax));
      csv << fmt::format("{},{},{},{},{}\n", p, describe_state(c.state), set_str(c.entropy_argmax),
                         set_str(c.gain_argmax), verdict);
      passed += c.pass ? 1 : 0;
    }
    failures += cases.size() - passed;
    out << fmt::format("problem {}: N={} hypotheses={} {} priors: {}/{} states agree\n", p, n_obs, n_hyp,
                       weighted ? "weighted" : "uniform", passed, cases.size());
  }
  if (!o.out.empty()) write_text(o.out, csv.str());
  out << (failures == 0 ? "ALL PASS\n" : fmt::format("{} FAILURES\n", failures));
  return failures == 0 ? 0 : 1;
}

void add_common(CLI::App* cmd, Options& o, bool out_required) {
  cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  cmd->add_option("--workers", o.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  auto* out = cmd->add_option("--out", o.out, "Output file (CSV or model)");
  if (out_required) out->required();
  cmd->add_option("--config", o.config, "Key-value config file (flags win)");
}

void add_training(CLI::App* cmd, Options& o) {
  cmd->add_option("--epochs", o.training.epochs, "Training epochs")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--lr", o.training.learning_rate, "SGD learning rate")->capture_default_str();
  cmd->add_option("--batch-size", o.training.batch_size, "Mini-batch size")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--hidden", o.training.hidden_units, "Hidden ReLU units")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

}  // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("--config: cannot open '{}'", path));
  auto given = [&args](const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> expanded = args;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = line.substr(0, line.find('#'));
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(fmt::format("{}:{}: expected 'key = value'", path, line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key == "config") throw Error(fmt::format("{}:{}: invalid key", path, line_no));
    const std::string flag = "--" + key;
    if (given(flag)) continue;
    expanded.push_back(flag);
    expanded.push_back(value);
  }
  return expanded;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Active diagnosis with learned implication models", "actdiag"};
  app.footer(kConfigHelp);
  app.require_subcommand(1);
  Options o;

  auto* gen_data = app.add_subcommand("gen-data", "Write a training dataset (observation CSV, or ranking CSV for preference)");
  gen_data->add_option("--domain", o.domain, "battleship | preference | network")->capture_default_str();
  gen_data->add_option("--count", o.count, "Rows to generate (default: domain training size)");
  gen_data->add_option("--topology", o.topology, "Topology file (network)")->check(CLI::ExistingFile);
  gen_data->add_option("--topology-seed", o.topology_seed, "Seed of the generated topology")->capture_default_str();
  gen_data->add_option("--p-fail", o.p_fail, "Link failure probability")->capture_default_str();
  add_common(gen_data, o, true);

  auto* gen_topology = app.add_subcommand("gen-topology", "Write a random 100-node tree topology with 300 extra pairs");
  add_common(gen_topology, o, true);

  auto* train = app.add_subcommand("train", "Train an implication model and save it");
  train->add_option("--domain", o.domain, "battleship | preference | network")->capture_default_str();
  train->add_option("--data", o.data, "Dataset (observation CSV, or ranking CSV for preference)")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--augment", o.augment, "Uniform permutations added to preference data (default 1:1)")
      ->each([&o](const std::string&) { o.augment_set = true; });
  add_training(train, o);
  add_common(train, o, true);

  auto* collect_cmd = app.add_subcommand("collect", "Run one observation-collection trace and print it as CSV");
  collect_cmd->add_option("--domain", o.domain, "battleship | preference | network | tiny")->capture_default_str();
  collect_cmd->add_option("--model", o.model, "Model file")->check(CLI::ExistingFile);
  collect_cmd->add_option("--budget", o.budget, "Number of queries")->required();
  collect_cmd->add_option("--noise", o.noise, "Observation flip probability")->capture_default_str();
  collect_cmd->add_option("--topology", o.topology, "Topology file (network)")->check(CLI::ExistingFile);
  collect_cmd->add_option("--topology-seed", o.topology_seed, "Seed of the generated topology")->capture_default_str();
  collect_cmd->add_option("--p-fail", o.p_fail, "Link failure probability")->capture_default_str();
  collect_cmd->add_option("--data-seed", o.data_seed, "Seed of the tiny problem")->capture_default_str();
  add_common(collect_cmd, o, false);

  auto* eval = app.add_subcommand("eval", "Evaluate a strategy over a budget grid; writes budget,mean,stderr,trials");
  eval->add_option("--domain", o.domain, "battleship | preference | network | tiny")->capture_default_str();
  eval->add_option("--strategy", o.strategy, "oc | rand | sink | rand_link | bsort | qsort | msort")
      ->capture_default_str();
  eval->add_option("--delivery", o.delivery, "ml | solver (battleship)")->capture_default_str();
  eval->add_option("--budget-grid", o.budget_grid, "Comma-separated budgets (default: every --budget-step)");
  eval->add_option("--budget-step", o.budget_step, "Grid spacing when --budget-grid is absent")->capture_default_str();
  eval->add_option("--trials", o.trials, "Evaluation trials")->capture_default_str();
  eval->add_option("--noise", o.noise, "Observation flip probability")->capture_default_str();
  eval->add_option("--p-fail", o.p_fail, "Link failure probability")->capture_default_str();
  eval->add_option("--model", o.model, "Model file (oc); trained from seeds when absent")->check(CLI::ExistingFile);
  eval->add_option("--topology", o.topology, "Topology file (network)")->check(CLI::ExistingFile);
  eval->add_option("--topology-seed", o.topology_seed, "Seed of the generated topology")->capture_default_str();
  eval->add_option("--data-seed", o.data_seed, "Training data seed")->capture_default_str();
  eval->add_option("--train-seed", o.train_seed, "Training seed")->capture_default_str();
  eval->add_option("--train-size", o.train_size, "Training rows (default: per domain)");
  eval->add_option("--per-trial-out", o.per_trial_out, "Per-trial CSV (trial,budget,metric)");
  add_training(eval, o);
  add_common(eval, o, false);

  auto* dep = app.add_subcommand("dep-report", "Network link accuracy binned by dependency coefficient");
  dep->add_option("--model", o.model, "Model file (oc)")->check(CLI::ExistingFile);
  dep->add_option("--strategy", o.strategy, "oc | rand_link")->capture_default_str();
  dep->add_option("--topology", o.topology, "Topology file")->check(CLI::ExistingFile);
  dep->add_option("--topology-seed", o.topology_seed, "Seed of the generated topology")->capture_default_str();
  dep->add_option("--trials", o.trials, "Fault instances")->capture_default_str();
  dep->add_option("--budget", o.budget, "Queries per instance")->required();
  dep->add_option("--p-fail", o.p_fail, "Link failure probability")->capture_default_str();
  add_common(dep, o, false);

  auto* verify = app.add_subcommand("verify-theorem",
                                    "Check argmax entropy == argmax information gain on random tiny problems");
  verify->add_option("--problems", o.problems, "Number of tiny problems")->capture_default_str();
  add_common(verify, o, false);

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*gen_data) return cmd_gen_data(o, out);
    if (*gen_topology) return cmd_gen_topology(o, out);
    if (*train) return cmd_train(o, out);
    if (*collect_cmd) return cmd_collect(o, out);
    if (*eval) return cmd_eval(o, out);
    if (*dep) return cmd_dep_report(o, out);
    if (*verify) return cmd_verify_theorem(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace actdiag::cli
