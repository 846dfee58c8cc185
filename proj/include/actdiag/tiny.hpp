#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "actdiag/core.hpp"
#include "actdiag/rng.hpp"

namespace actdiag {

struct TinyHypothesis {
  double prior = 0.0;
  ObservationVector observations;  // full, deterministic given the hypothesis
};

/// Small enumerable problem used as a brute-force oracle: N <= 16
/// observations, at most 64 hypotheses, priors summing to one.
class TinyProblem {
 public:
  static constexpr std::size_t kMaxObservations = 16;
  static constexpr std::size_t kMaxHypotheses = 64;

  explicit TinyProblem(std::vector<TinyHypothesis> hypotheses);

  std::size_t n_obs() const { return n_obs_; }
  const std::vector<TinyHypothesis>& hypotheses() const { return hypotheses_; }

 private:
  std::vector<TinyHypothesis> hypotheses_;
  std::size_t n_obs_ = 0;
};

/// P(O_j = 1 | observed) by summing over the consistent hypotheses.
BeliefVector exact_conditional(const TinyProblem& problem, const ObservationVector& observed);

/// H(S | observed) in bits.
double posterior_entropy(const TinyProblem& problem, const ObservationVector& observed);

/// I(S; O_j | observed) = H(S | observed) - H(S | O_j, observed), by enumeration.
double exact_information_gain(const TinyProblem& problem, const ObservationVector& observed, std::size_t j);

/// Random problem with `n_hyp` hypotheses over `n_obs` fair-coin observations.
/// Priors are uniform or, when `weighted`, drawn at random and normalised.
TinyProblem random_tiny_problem(Rng& rng, std::size_t n_obs, std::size_t n_hyp, bool weighted);

/// Every distinct partial state obtained by revealing any subset of some
/// hypothesis's observations, in a deterministic order.
std::vector<ObservationVector> consistent_states(const TinyProblem& problem);

struct TheoremCase {
  ObservationVector state;
  std::vector<std::size_t> entropy_argmax;
  std::vector<std::size_t> gain_argmax;
  bool pass = false;
};

/// For every consistent state with an unobserved index, compares the argmax
/// set of exact observation entropy with the argmax set of exact information
/// gain (values rounded to 1e-9 before comparison).
std::vector<TheoremCase> check_entropy_gain_equivalence(const TinyProblem& problem);

std::string describe_state(const ObservationVector& state);

}  // namespace actdiag
