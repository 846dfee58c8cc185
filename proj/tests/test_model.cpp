#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "actdiag/model.hpp"
#include "oracles.hpp"

using namespace actdiag;

namespace {

ObservationVector random_partial(std::size_t n, Rng& rng) {
  ObservationVector v = ObservationVector::unknown(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = uniform_below(rng, 3);
    if (r < 2) v.set(i, r == 0 ? ObservationValue::Zero : ObservationValue::One);
  }
  return v;
}

ObservationVector random_full(std::size_t n, Rng& rng) {
  ObservationVector v = ObservationVector::unknown(n);
  for (std::size_t i = 0; i < n; ++i) v.set(i, from_bool(uniform01(rng) < 0.5));
  return v;
}

// Random model with non-zero biases so every parameter is exercised.
ImplicationModel random_model(std::size_t n, std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  ImplicationModel model = make_model(n, m, rng);
  for (Eigen::Index k = 0; k < model.b1.size(); ++k) model.b1(k) = 0.2 * (uniform01(rng) - 0.5);
  for (Eigen::Index k = 0; k < model.b2.size(); ++k) model.b2(k) = 0.2 * (uniform01(rng) - 0.5);
  return model;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("actdiag_test_model_" + name);
}

}  // namespace

TEST_CASE("encode uses the (One, Zero) slot pair") {
  ObservationVector v = ObservationVector::unknown(3);
  v.set(0, ObservationValue::One);
  v.set(1, ObservationValue::Zero);
  const Vector x = encode(v);
  REQUIRE(x.size() == 6);
  CHECK(x(0) == 1.0);
  CHECK(x(1) == 0.0);
  CHECK(x(2) == 0.0);
  CHECK(x(3) == 1.0);
  CHECK(x(4) == 0.0);
  CHECK(x(5) == 0.0);
}

TEST_CASE("forward with zero weights gives one half everywhere") {
  const ImplicationModel model(5, 4);
  Rng rng(3);
  const auto p = forward(model, random_partial(5, rng));
  for (double v : p.probs) CHECK(v == 0.5);
}

TEST_CASE("forward saturates towards the clamp") {
  ImplicationModel model(2, 3);
  model.b2(0) = 1000.0;  // One logit of pair 0
  const auto p = forward(model, ObservationVector::unknown(2));
  CHECK(p[0] == doctest::Approx(1.0 - kProbFloor).epsilon(1e-15));
  CHECK(p[0] < 1.0);
  CHECK(p[1] == 0.5);
}

TEST_CASE("forward matches the scalar oracle") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto model = random_model(6, 8, seed);
    const auto net = oracle::ScalarNet::from_flat(model.flatten(), 6, 8);
    Rng rng(seed + 100);
    for (int t = 0; t < 20; ++t) {
      const auto obs = random_partial(6, rng);
      const auto got = forward(model, obs);
      const auto want = net.probs(obs);
      for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-10);
    }
  }
}

TEST_CASE("pair softmax sums to one and forward never returns 0 or 1") {
  for (double y1 : {-50.0, -1.0, 0.0, 0.3, 40.0}) {
    for (double y0 : {-30.0, 0.0, 2.5, 60.0}) {
      const auto [p1, p0] = pair_softmax(y1, y0);
      CHECK(std::abs(p1 + p0 - 1.0) < 1e-12);
    }
  }
  ImplicationModel model(3, 2);
  model.b2(0) = 800.0;
  model.b2(3) = 800.0;
  for (double p : forward(model, ObservationVector::unknown(3)).probs) {
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
}

TEST_CASE("ablation edge rates") {
  Rng rng(4);
  const auto full = random_full(12, rng);
  CHECK(ablate_with_rate(full, 0.0, rng) == full);
  CHECK(ablate_with_rate(full, 1.0, rng) == ObservationVector::unknown(12));
  CHECK_THROWS_AS(ablate(ObservationVector::unknown(3), rng), Error);
}

TEST_CASE("ablation hides half the positions on average") {
  Rng rng(17);
  const auto full = random_full(20, rng);
  double hidden = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const auto a = ablate(full, rng);
    hidden += static_cast<double>(20 - a.observed_count()) / 20.0;
    for (std::size_t i = 0; i < 20; ++i) {
      if (a.is_observed(i)) CHECK(a[i] == full[i]);
    }
  }
  CHECK(std::abs(hidden / 10000.0 - 0.5) < 0.02);
}

TEST_CASE("loss with zero weights is N log 2") {
  Rng rng(8);
  const ImplicationModel model(7, 3);
  const auto out = loss_and_gradient(model, random_partial(7, rng), random_full(7, rng));
  CHECK(out.loss == doctest::Approx(7.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("loss matches the scalar oracle") {
  const auto model = random_model(6, 8, 42);
  const auto net = oracle::ScalarNet::from_flat(model.flatten(), 6, 8);
  Rng rng(43);
  for (int t = 0; t < 10; ++t) {
    const auto target = random_full(6, rng);
    const auto in = random_partial(6, rng);
    CHECK(loss_and_gradient(model, in, target).loss == doctest::Approx(net.loss(in, target)).epsilon(1e-12));
  }
}

TEST_CASE("analytic gradient matches finite differences on 10 seeds") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto model = random_model(6, 8, seed * 7919);
    Rng rng(seed);
    const auto target = random_full(6, rng);
    const auto in = ablate_with_rate(target, 0.5, rng);
    const double err = oracle::max_gradient_error(model, in, target);
    INFO("seed " << seed << " max relative error " << err);
    CHECK(err < 1e-4);
  }
}

TEST_CASE("one small SGD step lowers the loss on a fixed example") {
  auto model = random_model(6, 8, 5);
  Rng rng(6);
  const auto target = random_full(6, rng);
  const auto in = ablate_with_rate(target, 0.5, rng);
  const auto before = loss_and_gradient(model, in, target);
  auto step = before.gradient;
  step *= -0.01;
  model += step;
  CHECK(loss_and_gradient(model, in, target).loss < before.loss);
}

TEST_CASE("training config validation") {
  TrainingConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.epochs = 1;
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.batch_size = 4;
  cfg.learning_rate = -0.1;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("zero learning rate leaves weights unchanged") {
  Rng rng(9);
  ObservationDataset data(5);
  for (int r = 0; r < 50; ++r) data.add(random_full(5, rng));
  const auto model = random_model(5, 6, 10);
  TrainingConfig cfg;
  cfg.epochs = 1;
  cfg.learning_rate = 0.0;
  CHECK(train(model, data, cfg) == model);
}

TEST_CASE("training is deterministic for a seed") {
  Rng rng(12);
  ObservationDataset data(5);
  for (int r = 0; r < 64; ++r) data.add(random_full(5, rng));
  TrainingConfig cfg;
  cfg.hidden_units = 6;
  cfg.rng_seed = 99;
  const auto first = fit(data, cfg);
  CHECK(fit(data, cfg) == first);
  cfg.rng_seed = 100;
  CHECK_FALSE(fit(data, cfg) == first);
}

TEST_CASE("a single constant row is memorised") {
  const int bits[] = {1, 0, 0, 1};
  ObservationDataset data(4);
  for (int r = 0; r < 2000; ++r) data.add(ObservationVector::from_bits(bits));
  TrainingConfig cfg;
  cfg.hidden_units = 16;
  const auto model = fit(data, cfg);
  const auto p = forward(model, ObservationVector::unknown(4));
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(p[i] - bits[i]) < 0.05);
}

TEST_CASE("a copied dimension is learned") {
  Rng rng(2024);
  const auto data = oracle::copied_dimension_dataset(10000, 8, rng);
  const auto model = fit(data, TrainingConfig{});
  auto obs = ObservationVector::unknown(8);
  obs.set(1, ObservationValue::One);
  const auto p = forward(model, obs);
  CHECK(p[2] > 0.9);
  CHECK(p[3] >= 0.4);
  CHECK(p[3] <= 0.6);
}

TEST_CASE("dataset rejects bad rows") {
  ObservationDataset data(3);
  CHECK_THROWS_AS(data.add(ObservationVector::unknown(3)), Error);
  const int two[] = {1, 0};
  CHECK_THROWS_AS(data.add(ObservationVector::from_bits(two)), Error);
  CHECK_THROWS_AS(train(ImplicationModel(3, 2), data, TrainingConfig{}), Error);
}

TEST_CASE("model file round trip") {
  const auto model = random_model(6, 8, 77);
  const auto path = temp_file("roundtrip.bin");
  save_model(model, path);
  const auto loaded = load_model(path);
  CHECK(loaded == model);
  Rng rng(78);
  for (int t = 0; t < 100; ++t) {
    const auto obs = random_partial(6, rng);
    CHECK(forward(loaded, obs).probs == forward(model, obs).probs);
  }
  std::filesystem::remove(path);
}

TEST_CASE("model file errors") {
  const auto model = random_model(3, 2, 1);
  const auto path = temp_file("bad.bin");
  save_model(model, path);
  const auto size = std::filesystem::file_size(path);

  SUBCASE("truncated") {
    std::filesystem::resize_file(path, size - 8);
    CHECK_THROWS_AS(load_model(path), Error);
    std::filesystem::resize_file(path, 6);
    CHECK_THROWS_AS(load_model(path), Error);
  }
  SUBCASE("wrong magic") {
    {
      std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
      f.write("XXXX", 4);
    }
    try {
      load_model(path);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("IMPM") != std::string::npos);
    }
  }
  SUBCASE("trailing bytes") {
    std::ofstream(path, std::ios::app | std::ios::binary) << "junk";
    CHECK_THROWS_AS(load_model(path), Error);
  }
  SUBCASE("missing file") {
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_model(path), Error);
  }
  std::filesystem::remove(path);
}

TEST_CASE("dataset csv round trip") {
  Rng rng(5);
  ObservationDataset data(6);
  for (int r = 0; r < 30; ++r) data.add(random_full(6, rng));
  const auto path = temp_file("data.csv");
  write_dataset_csv(path, data);
  const auto back = read_dataset_csv(path);
  REQUIRE(back.size() == data.size());
  for (std::size_t r = 0; r < data.size(); ++r) CHECK(back[r] == data[r]);
  std::ofstream(path) << "1,0,1\n1,0\n";
  CHECK_THROWS_AS(read_dataset_csv(path), Error);
  std::ofstream(path) << "1,0,2\n";
  CHECK_THROWS_AS(read_dataset_csv(path), Error);
  std::filesystem::remove(path);
}
