#include "actdiag/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <iterator>
#include <numeric>

namespace actdiag {

namespace {

// Upper bound on either dimension accepted from a model file.
constexpr std::uint64_t kMaxDimension = 1u << 20;

void check_dims(const ImplicationModel& model, const ObservationVector& obs) {
  if (obs.size() != model.n_obs()) {
    throw Error(fmt::format("observation length {} does not match model n_obs {}", obs.size(), model.n_obs()));
  }
}

void encode_into(const ObservationVector& obs, Eigen::Ref<Eigen::RowVectorXd> out) {
  out.setZero();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(2 * i);
    switch (obs[i]) {
      case ObservationValue::One: out(k) = 1.0; break;
      case ObservationValue::Zero: out(k + 1) = 1.0; break;
      case ObservationValue::Unknown: break;
    }
  }
}

// Summed loss over every row and output; accumulates the summed gradient into
// `grad` when non-null. `targets` holds one-hot (One, Zero) pairs.
double batch_loss(const ImplicationModel& m, const RowMatrix& inputs, const RowMatrix& targets,
                  ModelGradient* grad) {
  RowMatrix hidden = (inputs * m.w1).rowwise() + m.b1.transpose();
  hidden = hidden.cwiseMax(0.0);
  RowMatrix logits = (hidden * m.w2).rowwise() + m.b2.transpose();

  const Eigen::Index rows = logits.rows();
  const Eigen::Index pairs = logits.cols() / 2;
  double loss = 0.0;
  RowMatrix d_logits(rows, logits.cols());
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index i = 0; i < pairs; ++i) {
      const double y1 = logits(r, 2 * i);
      const double y0 = logits(r, 2 * i + 1);
      const double hi = std::max(y1, y0);
      const double lse = hi + std::log(std::exp(y1 - hi) + std::exp(y0 - hi));
      const double t1 = targets(r, 2 * i);
      const double t0 = targets(r, 2 * i + 1);
      loss += t1 * (lse - y1) + t0 * (lse - y0);
      d_logits(r, 2 * i) = std::exp(y1 - lse) - t1;
      d_logits(r, 2 * i + 1) = std::exp(y0 - lse) - t0;
    }
  }
  if (grad != nullptr) {
    grad->w2.noalias() += hidden.transpose() * d_logits;
    grad->b2 += d_logits.colwise().sum().transpose();
    RowMatrix d_hidden = d_logits * m.w2.transpose();
    d_hidden = d_hidden.cwiseProduct((hidden.array() > 0.0).cast<double>().matrix());
    grad->w1.noalias() += inputs.transpose() * d_hidden;
    grad->b1 += d_hidden.colwise().sum().transpose();
  }
  return loss;
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<unsigned char>((v >> (8 * k)) & 0xffu));
}

void put_f64(std::vector<unsigned char>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<unsigned char>((bits >> (8 * k)) & 0xffu));
}

std::uint64_t get_le(const std::vector<unsigned char>& in, std::size_t offset, int bytes) {
  std::uint64_t v = 0;
  for (int k = 0; k < bytes; ++k) v |= static_cast<std::uint64_t>(in[offset + static_cast<std::size_t>(k)]) << (8 * k);
  return v;
}

}  // namespace

ImplicationModel::ImplicationModel(std::size_t n_obs, std::size_t n_hidden)
    : w1(RowMatrix::Zero(static_cast<Eigen::Index>(2 * n_obs), static_cast<Eigen::Index>(n_hidden))),
      b1(Vector::Zero(static_cast<Eigen::Index>(n_hidden))),
      w2(RowMatrix::Zero(static_cast<Eigen::Index>(n_hidden), static_cast<Eigen::Index>(2 * n_obs))),
      b2(Vector::Zero(static_cast<Eigen::Index>(2 * n_obs))) {}

std::size_t ImplicationModel::parameter_count() const {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size());
}

void ImplicationModel::validate() const {
  const auto two_n = b2.size();
  const auto m = b1.size();
  if (two_n == 0 || two_n % 2 != 0 || m == 0) throw Error("implication model has empty or odd dimensions");
  if (w1.rows() != two_n || w1.cols() != m || w2.rows() != m || w2.cols() != two_n) {
    throw Error("implication model weight shapes are inconsistent");
  }
  if (!w1.allFinite() || !b1.allFinite() || !w2.allFinite() || !b2.allFinite()) {
    throw Error("implication model contains non-finite weights");
  }
}

std::vector<double> ImplicationModel::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  flat.insert(flat.end(), w1.data(), w1.data() + w1.size());
  flat.insert(flat.end(), b1.data(), b1.data() + b1.size());
  flat.insert(flat.end(), w2.data(), w2.data() + w2.size());
  flat.insert(flat.end(), b2.data(), b2.data() + b2.size());
  return flat;
}

void ImplicationModel::unflatten(const std::vector<double>& flat) {
  if (flat.size() != parameter_count()) throw Error("flat parameter vector has the wrong length");
  auto it = flat.begin();
  auto fill = [&it](double* dst, Eigen::Index n) {
    std::copy(it, it + n, dst);
    it += n;
  };
  fill(w1.data(), w1.size());
  fill(b1.data(), b1.size());
  fill(w2.data(), w2.size());
  fill(b2.data(), b2.size());
}

ImplicationModel& ImplicationModel::operator+=(const ImplicationModel& other) {
  w1 += other.w1;
  b1 += other.b1;
  w2 += other.w2;
  b2 += other.b2;
  return *this;
}

ImplicationModel& ImplicationModel::operator*=(double s) {
  w1 *= s;
  b1 *= s;
  w2 *= s;
  b2 *= s;
  return *this;
}

bool operator==(const ImplicationModel& a, const ImplicationModel& b) {
  return a.w1.rows() == b.w1.rows() && a.w1.cols() == b.w1.cols() && a.b1.size() == b.b1.size() &&
         a.w2.rows() == b.w2.rows() && a.b2.size() == b.b2.size() && a.w1 == b.w1 && a.b1 == b.b1 &&
         a.w2 == b.w2 && a.b2 == b.b2;
}

void TrainingConfig::validate() const {
  if (epochs < 1) throw Error("training needs epochs >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw Error("learning_rate must be finite and >= 0");
  if (batch_size < 1) throw Error("batch_size must be >= 1");
  if (hidden_units < 1) throw Error("hidden_units must be >= 1");
}

void ObservationDataset::add(ObservationVector row) {
  if (row.size() != n_obs_) {
    throw Error(fmt::format("dataset row has length {}, expected {}", row.size(), n_obs_));
  }
  if (!row.is_full()) throw Error("dataset rows must not contain Unknown values");
  rows_.push_back(std::move(row));
}

ImplicationModel make_model(std::size_t n_obs, std::size_t n_hidden, Rng& rng) {
  ImplicationModel m(n_obs, n_hidden);
  const double fan = static_cast<double>(2 * n_obs + n_hidden);
  const double a = std::sqrt(6.0 / fan);
  for (Eigen::Index k = 0; k < m.w1.size(); ++k) m.w1.data()[k] = a * (2.0 * uniform01(rng) - 1.0);
  for (Eigen::Index k = 0; k < m.w2.size(); ++k) m.w2.data()[k] = a * (2.0 * uniform01(rng) - 1.0);
  return m;
}

Vector encode(const ObservationVector& obs) {
  Eigen::RowVectorXd row(static_cast<Eigen::Index>(2 * obs.size()));
  encode_into(obs, row);
  return row.transpose();
}

std::pair<double, double> pair_softmax(double y_one, double y_zero) {
  const double p_one = 1.0 / (1.0 + std::exp(y_zero - y_one));
  const double p_zero = 1.0 / (1.0 + std::exp(y_one - y_zero));
  return {p_one, p_zero};
}

Vector output_logits(const ImplicationModel& model, const ObservationVector& obs) {
  check_dims(model, obs);
  const Vector x = encode(obs);
  Vector hidden = (model.w1.transpose() * x + model.b1).cwiseMax(0.0);
  return model.w2.transpose() * hidden + model.b2;
}

BeliefVector forward(const ImplicationModel& model, const ObservationVector& obs) {
  const Vector y = output_logits(model, obs);
  std::vector<double> probs(model.n_obs());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(2 * i);
    probs[i] = std::clamp(pair_softmax(y(k), y(k + 1)).first, kProbFloor, 1.0 - kProbFloor);
  }
  return BeliefVector(std::move(probs));
}

ObservationVector ablate(const ObservationVector& full, Rng& rng) {
  const double epsilon = uniform01(rng);
  return ablate_with_rate(full, epsilon, rng);
}

ObservationVector ablate_with_rate(const ObservationVector& full, double epsilon, Rng& rng) {
  if (!full.is_full()) throw Error("ablate expects a full observation vector");
  ObservationVector out = full;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (uniform01(rng) < epsilon) out.set(i, ObservationValue::Unknown);
  }
  return out;
}

LossAndGradient loss_and_gradient(const ImplicationModel& model, const ObservationVector& input,
                                  const ObservationVector& target) {
  check_dims(model, input);
  check_dims(model, target);
  if (!target.is_full()) throw Error("loss target must be a full observation vector");
  const auto width = static_cast<Eigen::Index>(2 * model.n_obs());
  RowMatrix x(1, width);
  RowMatrix t(1, width);
  encode_into(input, x.row(0));
  encode_into(target, t.row(0));
  LossAndGradient out{0.0, ImplicationModel(model.n_obs(), model.n_hidden())};
  out.loss = batch_loss(model, x, t, &out.gradient);
  return out;
}

ImplicationModel train(ImplicationModel model, const ObservationDataset& data, const TrainingConfig& cfg) {
  cfg.validate();
  model.validate();
  if (data.empty()) throw Error("cannot train on an empty dataset");
  if (data.n_obs() != model.n_obs()) {
    throw Error(fmt::format("dataset n_obs {} does not match model n_obs {}", data.n_obs(), model.n_obs()));
  }
  Rng rng(derive_seed(cfg.rng_seed, 1));
  const auto width = static_cast<Eigen::Index>(2 * model.n_obs());
  std::vector<std::size_t> order(data.size());
  ModelGradient grad(model.n_obs(), model.n_hidden());
  RowMatrix inputs;
  RowMatrix targets;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, order.size() - start);
      inputs.resize(static_cast<Eigen::Index>(count), width);
      targets.resize(static_cast<Eigen::Index>(count), width);
      for (std::size_t r = 0; r < count; ++r) {
        const auto& row = data[order[start + r]];
        encode_into(ablate(row, rng), inputs.row(static_cast<Eigen::Index>(r)));
        encode_into(row, targets.row(static_cast<Eigen::Index>(r)));
      }
      grad *= 0.0;
      batch_loss(model, inputs, targets, &grad);
      grad *= -cfg.learning_rate / static_cast<double>(count);
      model += grad;
    }
  }
  return model;
}

ImplicationModel fit(const ObservationDataset& data, const TrainingConfig& cfg) {
  cfg.validate();
  Rng init_rng(derive_seed(cfg.rng_seed, 0));
  return train(make_model(data.n_obs(), cfg.hidden_units, init_rng), data, cfg);
}

void save_model(const ImplicationModel& model, const std::filesystem::path& path) {
  model.validate();
  std::vector<unsigned char> bytes(std::begin(kModelMagic), std::end(kModelMagic));
  put_u32(bytes, kModelFormatVersion);
  put_u32(bytes, static_cast<std::uint32_t>(model.n_obs()));
  put_u32(bytes, static_cast<std::uint32_t>(model.n_hidden()));
  for (double w : model.flatten()) put_f64(bytes, w);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot open model file '{}' for writing", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(fmt::format("failed writing model file '{}'", path.string()));
}

ImplicationModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open model file '{}'", path.string()));
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  constexpr std::size_t kHeader = 16;
  if (bytes.size() < kHeader) throw Error(fmt::format("model file '{}' is truncated (no header)", path.string()));
  if (!std::equal(std::begin(kModelMagic), std::end(kModelMagic), bytes.begin(),
                  [](char a, unsigned char b) { return static_cast<unsigned char>(a) == b; })) {
    throw Error(fmt::format("model file '{}' has bad magic bytes, expected \"IMPM\"", path.string()));
  }
  const auto version = get_le(bytes, 4, 4);
  if (version != kModelFormatVersion) {
    throw Error(fmt::format("model file '{}' has unsupported format version {}", path.string(), version));
  }
  const auto n_obs = get_le(bytes, 8, 4);
  const auto n_hidden = get_le(bytes, 12, 4);
  if (n_obs == 0 || n_hidden == 0 || n_obs > kMaxDimension || n_hidden > kMaxDimension) {
    throw Error(fmt::format("model file '{}' declares invalid dimensions n_obs={} n_hidden={}", path.string(), n_obs,
                            n_hidden));
  }
  const std::uint64_t params = 4 * n_obs * n_hidden + n_hidden + 2 * n_obs;
  if (bytes.size() != kHeader + 8 * params) {
    throw Error(fmt::format("model file '{}' has {} bytes, expected {} for n_obs={} n_hidden={}", path.string(),
                            bytes.size(), kHeader + 8 * params, n_obs, n_hidden));
  }
  ImplicationModel model(n_obs, n_hidden);
  std::vector<double> flat(params);
  for (std::size_t k = 0; k < params; ++k) flat[k] = std::bit_cast<double>(get_le(bytes, kHeader + 8 * k, 8));
  model.unflatten(flat);
  model.validate();
  return model;
}

}  // namespace actdiag
