#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "actdiag/core.hpp"
#include "actdiag/rng.hpp"

namespace actdiag {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// One-hidden-layer network mapping an encoded partial observation vector
/// (2N inputs) to N pairwise softmax outputs (2N logits).
///
/// Pair i occupies slots (2i, 2i+1) as (One, Zero) on both sides.
struct ImplicationModel {
  RowMatrix w1;  // 2N x M
  Vector b1;     // M
  RowMatrix w2;  // M x 2N
  Vector b2;     // 2N

  ImplicationModel() = default;
  /// All-zero weights.
  ImplicationModel(std::size_t n_obs, std::size_t n_hidden);

  std::size_t n_obs() const { return static_cast<std::size_t>(b2.size()) / 2; }
  std::size_t n_hidden() const { return static_cast<std::size_t>(b1.size()); }
  std::size_t parameter_count() const;

  /// Throws unless all shapes agree and every weight is finite.
  void validate() const;

  /// Flat view over all parameters in file order (w1, b1, w2, b2).
  std::vector<double> flatten() const;
  void unflatten(const std::vector<double>& flat);

  ImplicationModel& operator+=(const ImplicationModel& other);
  ImplicationModel& operator*=(double s);

  friend bool operator==(const ImplicationModel& a, const ImplicationModel& b);
};

/// Gradients share the model's shape.
using ModelGradient = ImplicationModel;

struct TrainingConfig {
  std::size_t epochs = 5;
  double learning_rate = 0.05;
  std::size_t batch_size = 32;
  std::size_t hidden_units = 200;
  std::uint64_t rng_seed = kDefaultSeed;

  void validate() const;
};

/// Unlabeled training rows: full observation vectors only.
class ObservationDataset {
 public:
  explicit ObservationDataset(std::size_t n_obs) : n_obs_(n_obs) {}

  void add(ObservationVector row);
  std::size_t n_obs() const { return n_obs_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const ObservationVector& operator[](std::size_t i) const { return rows_[i]; }
  const std::vector<ObservationVector>& rows() const { return rows_; }

 private:
  std::size_t n_obs_;
  std::vector<ObservationVector> rows_;
};

/// Glorot-uniform initialisation, seeded.
ImplicationModel make_model(std::size_t n_obs, std::size_t n_hidden, Rng& rng);

Vector encode(const ObservationVector& obs);

/// (P(One), P(Zero)) from the logit pair.
std::pair<double, double> pair_softmax(double y_one, double y_zero);

/// Raw logits y (length 2N).
Vector output_logits(const ImplicationModel& model, const ObservationVector& obs);

/// P(O_i = 1 | obs) for every i, clamped to [1e-9, 1 - 1e-9].
BeliefVector forward(const ImplicationModel& model, const ObservationVector& obs);

/// Draws one epsilon ~ U(0,1) and hides each position with that probability.
ObservationVector ablate(const ObservationVector& full, Rng& rng);
/// Hides each position independently with probability `epsilon`.
ObservationVector ablate_with_rate(const ObservationVector& full, double epsilon, Rng& rng);

struct LossAndGradient {
  double loss = 0.0;
  ModelGradient gradient;
};

/// Summed cross-entropy over the N outputs and its exact gradient.
LossAndGradient loss_and_gradient(const ImplicationModel& model, const ObservationVector& input,
                                  const ObservationVector& target);

/// Plain mini-batch SGD on ablated copies of the dataset rows. Deterministic
/// given cfg.rng_seed.
ImplicationModel train(ImplicationModel model, const ObservationDataset& data, const TrainingConfig& cfg);

/// make_model + train, both seeded from cfg.rng_seed.
ImplicationModel fit(const ObservationDataset& data, const TrainingConfig& cfg);

// Model file: "IMPM", u32 version, u32 n_obs, u32 n_hidden, then w1 b1 w2 b2 as
// little-endian IEEE-754 doubles, row-major.
inline constexpr char kModelMagic[4] = {'I', 'M', 'P', 'M'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const ImplicationModel& model, const std::filesystem::path& path);
ImplicationModel load_model(const std::filesystem::path& path);

/// One row per full observation vector, N comma-separated 0/1 values.
void write_dataset_csv(const std::filesystem::path& path, const ObservationDataset& data);
ObservationDataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace actdiag
