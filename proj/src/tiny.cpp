#include "actdiag/tiny.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <set>

namespace actdiag {

namespace {

bool consistent(const ObservationVector& truth, const ObservationVector& observed) {
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (observed.is_observed(i) && observed[i] != truth[i]) return false;
  }
  return true;
}

// Normalised posterior over hypotheses; zero for inconsistent ones.
std::vector<double> posterior(const TinyProblem& problem, const ObservationVector& observed) {
  if (observed.size() != problem.n_obs()) {
    throw Error(fmt::format("observed length {} does not match tiny problem N = {}", observed.size(),
                            problem.n_obs()));
  }
  std::vector<double> post;
  double mass = 0.0;
  for (const auto& h : problem.hypotheses()) {
    const double w = consistent(h.observations, observed) ? h.prior : 0.0;
    post.push_back(w);
    mass += w;
  }
  if (mass <= 0.0) throw Error("no hypothesis is consistent with the observed values");
  for (double& w : post) w /= mass;
  return post;
}

double entropy_bits(const std::vector<double>& dist) {
  double h = 0.0;
  for (double p : dist) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

std::vector<std::size_t> argmax_set(const std::vector<std::pair<std::size_t, double>>& scored) {
  std::vector<std::size_t> out;
  double best = -1.0;
  for (const auto& [j, v] : scored) {
    const double r = std::round(v * 1e9) / 1e9;
    if (r > best) {
      best = r;
      out.assign(1, j);
    } else if (r == best) {
      out.push_back(j);
    }
  }
  return out;
}

}  // namespace

TinyProblem::TinyProblem(std::vector<TinyHypothesis> hypotheses) : hypotheses_(std::move(hypotheses)) {
  if (hypotheses_.empty() || hypotheses_.size() > kMaxHypotheses) {
    throw Error(fmt::format("tiny problem needs 1..{} hypotheses", kMaxHypotheses));
  }
  n_obs_ = hypotheses_.front().observations.size();
  if (n_obs_ == 0 || n_obs_ > kMaxObservations) {
    throw Error(fmt::format("tiny problem needs 1..{} observations", kMaxObservations));
  }
  double total = 0.0;
  for (const auto& h : hypotheses_) {
    if (h.observations.size() != n_obs_ || !h.observations.is_full()) {
      throw Error("tiny problem hypotheses must carry full observation vectors of equal length");
    }
    if (!(h.prior >= 0.0)) throw Error("tiny problem priors must be non-negative");
    total += h.prior;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error(fmt::format("tiny problem priors sum to {}, not 1", total));
}

BeliefVector exact_conditional(const TinyProblem& problem, const ObservationVector& observed) {
  const auto post = posterior(problem, observed);
  // Ratio of the two outcome masses, so determined dimensions come out exactly 0 or 1.
  std::vector<double> one(problem.n_obs(), 0.0);
  std::vector<double> zero(problem.n_obs(), 0.0);
  for (std::size_t s = 0; s < post.size(); ++s) {
    const auto& obs = problem.hypotheses()[s].observations;
    for (std::size_t j = 0; j < one.size(); ++j) (obs[j] == ObservationValue::One ? one : zero)[j] += post[s];
  }
  std::vector<double> probs(problem.n_obs());
  for (std::size_t j = 0; j < probs.size(); ++j) probs[j] = one[j] / (one[j] + zero[j]);
  return BeliefVector(std::move(probs));
}

double posterior_entropy(const TinyProblem& problem, const ObservationVector& observed) {
  return entropy_bits(posterior(problem, observed));
}

double exact_information_gain(const TinyProblem& problem, const ObservationVector& observed, std::size_t j) {
  if (j >= problem.n_obs()) throw Error(fmt::format("index {} out of range", j));
  if (observed.is_observed(j)) throw Error(fmt::format("index {} is already observed", j));
  const auto post = posterior(problem, observed);
  const double before = entropy_bits(post);

  double after = 0.0;
  for (ObservationValue o : {ObservationValue::Zero, ObservationValue::One}) {
    std::vector<double> branch(post.size(), 0.0);
    double p_o = 0.0;
    for (std::size_t s = 0; s < post.size(); ++s) {
      if (problem.hypotheses()[s].observations[j] == o) {
        branch[s] = post[s];
        p_o += post[s];
      }
    }
    if (p_o <= 0.0) continue;
    for (double& w : branch) w /= p_o;
    after += p_o * entropy_bits(branch);
  }
  return before - after;
}

TinyProblem random_tiny_problem(Rng& rng, std::size_t n_obs, std::size_t n_hyp, bool weighted) {
  std::vector<TinyHypothesis> hyps(n_hyp);
  double total = 0.0;
  for (auto& h : hyps) {
    h.observations = ObservationVector(n_obs);
    for (std::size_t i = 0; i < n_obs; ++i) h.observations.set(i, from_bool(bernoulli(rng, 0.5)));
    h.prior = weighted ? 0.05 + uniform01(rng) : 1.0;
    total += h.prior;
  }
  for (auto& h : hyps) h.prior /= total;
  return TinyProblem(std::move(hyps));
}

std::vector<ObservationVector> consistent_states(const TinyProblem& problem) {
  const std::size_t n = problem.n_obs();
  std::set<std::vector<ObservationValue>> seen;
  std::vector<ObservationVector> out;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    for (const auto& h : problem.hypotheses()) {
      ObservationVector state(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (1u << i)) state.set(i, h.observations[i]);
      }
      if (seen.insert(state.values()).second) out.push_back(std::move(state));
    }
  }
  return out;
}

std::vector<TheoremCase> check_entropy_gain_equivalence(const TinyProblem& problem) {
  std::vector<TheoremCase> cases;
  for (auto& state : consistent_states(problem)) {
    const auto open = state.unobserved_indices();
    if (open.empty()) continue;
    const BeliefVector cond = exact_conditional(problem, state);
    std::vector<std::pair<std::size_t, double>> by_entropy;
    std::vector<std::pair<std::size_t, double>> by_gain;
    for (std::size_t j : open) {
      by_entropy.emplace_back(j, binary_entropy(cond[j]));
      by_gain.emplace_back(j, exact_information_gain(problem, state, j));
    }
    TheoremCase c{std::move(state), argmax_set(by_entropy), argmax_set(by_gain), false};
    c.pass = c.entropy_argmax == c.gain_argmax;
    cases.push_back(std::move(c));
  }
  return cases;
}

std::string describe_state(const ObservationVector& state) {
  std::string s;
  for (std::size_t i = 0; i < state.size(); ++i) {
    switch (state[i]) {
      case ObservationValue::Zero: s += '0'; break;
      case ObservationValue::One: s += '1'; break;
      case ObservationValue::Unknown: s += '?'; break;
    }
  }
  return s;
}

}  // namespace actdiag
