#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "actdiag/battleship.hpp"
#include "actdiag/delivery.hpp"
#include "actdiag/network.hpp"
#include "actdiag/preference.hpp"

using namespace actdiag;
using namespace actdiag::battleship;

namespace {

ObservationLog full_log(const ObservationVector& truth) {
  ObservationLog log;
  for (std::size_t i = 0; i < truth.size(); ++i) log.append(i, truth[i]);
  return log;
}

}  // namespace

TEST_CASE("deliver overrides observed positions") {
  ObservationLog log;
  log.append(1, ObservationValue::Zero);
  const auto d = deliver(BeliefVector({0.9, 0.8, 0.1}), log);
  CHECK(d.merged.probs == std::vector<double>{0.9, 0.0, 0.1});
  CHECK(d.forced == std::vector<bool>{false, true, false});
  const auto g = ml_guess(d);
  CHECK(g[0] == ObservationValue::One);
  CHECK(g[1] == ObservationValue::Zero);
  CHECK(g[2] == ObservationValue::Zero);
  ObservationLog bad;
  bad.append(5, ObservationValue::One);
  CHECK_THROWS_AS(deliver(BeliefVector({0.5}), bad), Error);
}

TEST_CASE("ml guess tie goes to One") {
  CHECK(ml_guess(deliver(BeliefVector({0.5}), {}))[0] == ObservationValue::One);
  const auto g = ml_guess(deliver(BeliefVector({0.9, 0.1}), {}));
  CHECK(g[0] == ObservationValue::One);
  CHECK(g[1] == ObservationValue::Zero);
}

TEST_CASE("ranking from beliefs") {
  using preference::kPairs;
  const auto identity = preference::ranking_observations(Ranking::identity(10));
  CHECK(ranking_from_beliefs(deliver(BeliefVector(std::vector<double>(kPairs, 0.5)), full_log(identity))) ==
        Ranking::identity(10));
  CHECK(ranking_from_beliefs(deliver(BeliefVector(std::vector<double>(kPairs, 0.5)), {})) == Ranking::identity(10));
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    std::vector<int> order = Ranking::identity(10).order();
    shuffle(order, rng);
    const Ranking r(order);
    const auto d = deliver(BeliefVector(std::vector<double>(kPairs, 0.3)), full_log(preference::ranking_observations(r)));
    CHECK(ranking_from_beliefs(d) == r);
  }
  CHECK_THROWS_AS(ranking_from_beliefs(deliver(BeliefVector({0.5, 0.5}), {})), Error);
}

TEST_CASE("network diagnosis") {
  Rng rng(4);
  const auto topo = network::generate_topology(rng);
  const auto fault = network::sample_fault(topo, 0.2, rng);
  const auto truth = network::fault_observations(topo, fault);
  ObservationLog direct;
  for (std::size_t e = 0; e < topo.n_links(); ++e) direct.append(e, truth[e]);
  const BeliefVector confident(std::vector<double>(topo.n_observations(), 0.99));
  CHECK(network::link_accuracy(network_diagnosis(deliver(confident, direct), topo), fault) == 1.0);
  const auto none = network_diagnosis(deliver(confident, {}), topo);
  CHECK(std::none_of(none.begin(), none.end(), [](bool b) { return b; }));
  ObservationLog one;
  one.append(7, ObservationValue::Zero);
  const auto forced = network_diagnosis(deliver(confident, one), topo);
  CHECK(forced[7]);
  CHECK(std::count(forced.begin(), forced.end(), true) == 1);
}

TEST_CASE("solver with no observations returns the first canonical board") {
  const auto r = battleship_solve(ObservationLog{});
  REQUIRE(r.status == SolveStatus::Solved);
  REQUIRE(r.board.has_value());
  CHECK(r.board->is_valid());
  const std::vector<Placement> expected{{0, 0, 0, Orientation::Horizontal},
                                        {1, 4, 0, Orientation::Horizontal},
                                        {2, 9, 0, Orientation::Vertical},
                                        {3, 4, 1, Orientation::Horizontal},
                                        {4, 7, 1, Orientation::Vertical}};
  CHECK(r.board->placements() == expected);
}

TEST_CASE("solver reproduces the occupancy grid from full observations") {
  Rng rng(5);
  for (int t = 0; t < 30; ++t) {
    const Board b = generate_board(rng);
    const auto r = battleship_solve(full_log(board_observations(b)));
    REQUIRE(r.status == SolveStatus::Solved);
    CHECK(r.board->is_valid());
    CHECK(r.board->grid() == b.grid());
  }
}

TEST_CASE("solver output is valid and consistent with partial observations") {
  Rng rng(6);
  for (int t = 0; t < 30; ++t) {
    const Board b = generate_board(rng);
    const auto truth = board_observations(b);
    ObservationLog log;
    std::vector<std::size_t> order(kCells);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, rng);
    for (std::size_t k = 0; k < 40; ++k) log.append(order[k], truth[order[k]]);
    const auto r = battleship_solve(log);
    REQUIRE(r.status == SolveStatus::Solved);
    CHECK(r.board->is_valid());
    for (const auto& e : log.entries()) CHECK(r.board->occupied(e.index) == (e.value == ObservationValue::One));
  }
}

TEST_CASE("solver reports UNSAT and timeouts") {
  ObservationLog log;
  for (std::size_t c = 0; c < 23; ++c) log.append(c, ObservationValue::One);
  CHECK(battleship_solve(log).status == SolveStatus::Unsat);
  CHECK_FALSE(battleship_solve(log).board.has_value());

  ObservationLog misses;  // every cell a miss: nothing fits
  for (std::size_t c = 0; c < kCells; ++c) misses.append(c, ObservationValue::Zero);
  CHECK(battleship_solve(misses).status == SolveStatus::Unsat);

  CHECK(battleship_solve(ObservationLog{}, 2).status == SolveStatus::Timeout);
}

TEST_CASE("ships correct") {
  Rng rng(7);
  const Board b = generate_board(rng);
  CHECK(ships_correct(b, b) == 5);
  auto swapped = b.placements();
  std::swap(swapped[2].ship, swapped[3].ship);
  CHECK(ships_correct(Board(swapped), b) == 5);
  const Board left({{2, 0, 0, Orientation::Horizontal}});
  const Board right({{2, 5, 5, Orientation::Horizontal}});
  CHECK(ships_correct(left, right) == 0);
  const Board different_kind({{1, 0, 0, Orientation::Horizontal}});
  CHECK(ships_correct(different_kind, left) == 0);
}
