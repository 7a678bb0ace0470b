#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "sqnz/errors.hpp"
#include "sqnz/model.hpp"
#include "sqnz/train.hpp"

namespace sqnz {

struct QuantConfig {
  unsigned bits = 3;               // exponent-magnitude bit-width b
  double clip_margin = 0.5;        // log-domain rounding boundary

  void validate() const {
    if (bits < 2) throw validation_error("quant bits must be >= 2");
    if (bits > 16) throw validation_error("quant bits must be <= 16");
  }
  std::uint32_t emax() const { return (1u << bits) - 1u; }
};

// A weight is either exactly zero or sign * 2^(-exponent).
struct QuantCode {
  enum class Kind : std::uint8_t { zero = 0, pow2 = 1 };
  Kind kind = Kind::zero;
  bool negative = false;
  std::uint32_t exponent = 0;

  template <typename T>
  T value() const {
    if (kind == Kind::zero) return T{0};
    const T mag = static_cast<T>(std::ldexp(1.0, -static_cast<int>(exponent)));
    return negative ? -mag : mag;
  }

  bool operator==(const QuantCode& o) const {
    if (kind != o.kind) return false;
    if (kind == Kind::zero) return true;
    return negative == o.negative && exponent == o.exponent;
  }
};

namespace detail {

// Exact -log2|w| via frexp: |w| = m * 2^exp with m in [0.5, 1), so
// -log2|w| = (1 - exp) - log2(2m). Exact powers of two give exact integers.
inline double neg_log2_abs(double w) {
  int exp = 0;
  const double m = std::frexp(std::fabs(w), &exp);
  return (1.0 - static_cast<double>(exp)) - std::log2(2.0 * m);
}

}  // namespace detail

// Rounds in the log domain (half away from zero); magnitudes past the last
// grid point by more than clip_margin collapse to zero, magnitudes above 1
// clamp to E=0.
template <typename T>
QuantCode log_quantize_value(T w, const QuantConfig& cfg) {
  QuantCode code;
  if (w == T{0}) return code;
  if (!std::isfinite(static_cast<double>(w)))
    throw numeric_error("log_quantize_value: non-finite weight");
  const double e = detail::neg_log2_abs(static_cast<double>(w));
  const double emax = static_cast<double>(cfg.emax());
  if (e > emax + cfg.clip_margin) return code;  // clip to zero
  double rounded = std::round(e);  // half away from zero
  if (rounded < 0.0) rounded = 0.0;
  if (rounded > emax) rounded = emax;
  code.kind = QuantCode::Kind::pow2;
  code.negative = (w < T{0});
  code.exponent = static_cast<std::uint32_t>(rounded);
  return code;
}

struct QuantizedTensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<QuantCode> codes;
};

// Replaces every weight and bias with its grid value; emits parallel codes in
// params() order. Masked zeros stay exactly zero.
template <typename T>
std::vector<QuantizedTensor> quantize_model(Model<T>& m, const QuantConfig& cfg) {
  cfg.validate();
  std::vector<QuantizedTensor> out;
  for (auto& p : m.params()) {
    QuantizedTensor qt;
    qt.name = p.name;
    qt.shape = p.value->shape;
    qt.codes.reserve(p.value->size());
    for (std::size_t i = 0; i < p.value->size(); ++i) {
      QuantCode c = log_quantize_value((*p.value)[i], cfg);
      (*p.value)[i] = c.template value<T>();
      qt.codes.push_back(c);
    }
    out.push_back(std::move(qt));
  }
  return out;
}

namespace detail {

template <typename T>
Model<T> project_to_grid(const Model<T>& shadow, const QuantConfig& cfg) {
  Model<T> proj = shadow;
  quantize_model(proj, cfg);
  return proj;
}

}  // namespace detail

// Quantisation-aware training: full-precision shadow weights, forward and
// backward on the projected model, straight-through gradient into the shadows.
// Returns the projection of the best-validation-loss shadows, so every value
// lies on the grid.
template <typename T>
TrainResult<T> qat_train(Model<T> model, const QuantConfig& cfg,
                         const std::vector<Tensor<T>>& train_x,
                         const std::vector<std::size_t>& train_y,
                         const std::vector<Tensor<T>>& val_x,
                         const std::vector<std::size_t>& val_y, const Hyperparams& hp,
                         std::uint64_t seed) {
  hp.validate();
  cfg.validate();
  if (train_x.empty() || val_x.empty()) throw validation_error("qat_train: empty set");

  SplitMix64 rng(derive_seed(seed, "qat"));
  Model<T> shadow = std::move(model);
  TrainResult<T> result;
  result.model = detail::project_to_grid(shadow, cfg);
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t epochs_since_improvement = 0;

  std::vector<std::size_t> order(train_x.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < hp.max_epochs; ++epoch) {
    shuffle(order, rng);
    double epoch_loss = 0;
    std::size_t epoch_correct = 0;

    for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
      const std::size_t end = std::min(order.size(), start + hp.batch_size);
      std::vector<Tensor<T>> bx;
      std::vector<std::size_t> by;
      for (std::size_t i = start; i < end; ++i) {
        bx.push_back(train_x[order[i]]);
        by.push_back(train_y[order[i]]);
      }
      const Model<T> proj = detail::project_to_grid(shadow, cfg);
      for (std::size_t i = 0; i < bx.size(); ++i) {
        const Tensor<T> probs = model_forward(proj, bx[i]);
        const double l = static_cast<double>(cross_entropy_loss(probs, by[i]));
        if (!std::isfinite(l)) throw numeric_error("non-finite training loss");
        epoch_loss += l;
        std::size_t best = 0;
        for (std::size_t j = 1; j < probs.size(); ++j)
          if (probs[j] > probs[best]) best = j;
        epoch_correct += (best == by[i]);
      }
      const GradientSet<T> grads = backprop_grads(proj, bx, by);
      sgd_step(shadow, grads, hp.learning_rate, hp.weight_decay);
    }

    const Model<T> proj = detail::project_to_grid(shadow, cfg);
    const auto val = evaluate_loss_accuracy(proj, val_x, val_y);
    if (!std::isfinite(val.loss)) throw numeric_error("non-finite validation loss");
    EpochStats st;
    st.train_loss = epoch_loss / train_x.size();
    st.train_acc = static_cast<double>(epoch_correct) / train_x.size();
    st.val_loss = val.loss;
    st.val_acc = val.accuracy;
    result.history.push_back(st);

    if (val.loss < best_val_loss) {
      best_val_loss = val.loss;
      result.model = proj;
      result.best_epoch = epoch;
      epochs_since_improvement = 0;
    } else {
      ++epochs_since_improvement;
      if (epochs_since_improvement >= hp.patience) break;
    }
  }
  return result;
}

struct SweepRow {
  unsigned bits = 0;
  double accuracy = 0;
  double model_sparsity = 0;
  std::uint64_t packed_bytes = 0;
};

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string s = "bits,accuracy,model_sparsity,packed_bytes\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%u,%.6f,%.6f,%llu\n", r.bits, r.accuracy, r.model_sparsity,
                  static_cast<unsigned long long>(r.packed_bytes));
    s += buf;
  }
  return s;
}

}  // namespace sqnz
