#pragma once

#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "sqnz/errors.hpp"
#include "sqnz/metrics.hpp"
#include "sqnz/model.hpp"
#include "sqnz/preprocess.hpp"
#include "sqnz/prng.hpp"

namespace sqnz {

struct Hyperparams {
  double learning_rate = 0.05;
  double weight_decay = 1e-4;
  std::size_t batch_size = 128;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;

  void validate() const {
    if (learning_rate <= 0 || weight_decay < 0 || batch_size < 1 || max_epochs < 1 || patience < 1)
      throw validation_error("hyperparams must be positive");
    if (patience > max_epochs) throw validation_error("patience must be <= max_epochs");
  }
};

struct EpochStats {
  double train_loss = 0, train_acc = 0, val_loss = 0, val_acc = 0;
};

using TrainHistory = std::vector<EpochStats>;

inline std::string history_csv(const TrainHistory& h) {
  std::string s = "epoch,train_loss,train_acc,val_loss,val_acc\n";
  char buf[160];
  for (std::size_t i = 0; i < h.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.6f,%.6f\n", i + 1, h[i].train_loss,
                  h[i].train_acc, h[i].val_loss, h[i].val_acc);
    s += buf;
  }
  return s;
}

template <typename T>
std::size_t predict(const Model<T>& m, const Tensor<T>& input) {
  const Tensor<T> probs = model_forward(m, input);
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[best]) best = i;
  return best;
}

template <typename T>
struct EvalStats {
  double loss = 0, accuracy = 0;
};

template <typename T>
EvalStats<T> evaluate_loss_accuracy(const Model<T>& m, const std::vector<Tensor<T>>& inputs,
                                    const std::vector<std::size_t>& labels) {
  if (inputs.empty()) throw validation_error("evaluate: empty set");
  double loss = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Tensor<T> probs = model_forward(m, inputs[i]);
    loss += static_cast<double>(cross_entropy_loss(probs, labels[i]));
    std::size_t best = 0;
    for (std::size_t j = 1; j < probs.size(); ++j)
      if (probs[j] > probs[best]) best = j;
    correct += (best == labels[i]);
  }
  return {loss / inputs.size(), static_cast<double>(correct) / inputs.size()};
}

template <typename T>
struct TrainResult {
  Model<T> model;
  TrainHistory history;
  std::size_t best_epoch = 0;  // 0-based index into history
};

// Mini-batch SGD with seeded epoch shuffles; stops after `patience` epochs
// without a validation-loss improvement and restores the best-epoch weights.
// The last partial batch is kept.
template <typename T>
TrainResult<T> train(Model<T> model, const std::vector<Tensor<T>>& train_x,
                     const std::vector<std::size_t>& train_y, const std::vector<Tensor<T>>& val_x,
                     const std::vector<std::size_t>& val_y, const Hyperparams& hp,
                     std::uint64_t seed) {
  hp.validate();
  if (train_x.empty() || val_x.empty()) throw validation_error("train: empty set");

  SplitMix64 rng(derive_seed(seed, "train"));
  TrainResult<T> result;
  result.model = model;
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
      bx.reserve(end - start);
      by.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        bx.push_back(train_x[order[i]]);
        by.push_back(train_y[order[i]]);
      }
      // batch statistics at the pre-update parameters
      for (std::size_t i = 0; i < bx.size(); ++i) {
        const Tensor<T> probs = model_forward(model, bx[i]);
        const double l = static_cast<double>(cross_entropy_loss(probs, by[i]));
        if (!std::isfinite(l)) throw numeric_error("non-finite training loss");
        epoch_loss += l;
        std::size_t best = 0;
        for (std::size_t j = 1; j < probs.size(); ++j)
          if (probs[j] > probs[best]) best = j;
        epoch_correct += (best == by[i]);
      }
      const GradientSet<T> grads = backprop_grads(model, bx, by);
      sgd_step(model, grads, hp.learning_rate, hp.weight_decay);
    }

    const auto val = evaluate_loss_accuracy(model, val_x, val_y);
    if (!std::isfinite(val.loss)) throw numeric_error("non-finite validation loss");
    EpochStats st;
    st.train_loss = epoch_loss / train_x.size();
    st.train_acc = static_cast<double>(epoch_correct) / train_x.size();
    st.val_loss = val.loss;
    st.val_acc = val.accuracy;
    result.history.push_back(st);

    if (val.loss < best_val_loss) {
      best_val_loss = val.loss;
      result.model = model;
      result.best_epoch = epoch;
      epochs_since_improvement = 0;
    } else {
      ++epochs_since_improvement;
      if (epochs_since_improvement >= hp.patience) break;
    }
  }
  return result;
}

// Trains a fresh model per fold for every config and picks the best mean
// fold-test accuracy; ties go to the earlier grid entry.
struct GridSearchResult {
  Hyperparams best;
  std::size_t best_index = 0;
  std::vector<double> mean_accuracy;  // per grid entry
};

template <typename T>
GridSearchResult grid_search(const ArchConfig& arch, const std::vector<Hyperparams>& grid,
                             const std::vector<Tensor<T>>& inputs,
                             const std::vector<std::size_t>& labels, std::size_t k,
                             std::uint64_t seed) {
  if (grid.empty()) throw validation_error("grid_search: empty grid");
  const std::vector<Fold> folds = kfold_indices(labels, k, seed);
  GridSearchResult res;
  res.mean_accuracy.assign(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double acc_sum = 0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      std::vector<Tensor<T>> tx, ex;
      std::vector<std::size_t> ty, ey;
      for (std::size_t i : folds[f].train) {
        tx.push_back(inputs[i]);
        ty.push_back(labels[i]);
      }
      for (std::size_t i : folds[f].test) {
        ex.push_back(inputs[i]);
        ey.push_back(labels[i]);
      }
      Model<T> m = build_model<T>(arch, derive_seed(seed, "grid-fold-" + std::to_string(f)));
      TrainResult<T> tr;
      try {
        tr = train(std::move(m), tx, ty, ex, ey, grid[g], seed + f);
      } catch (const compute_error& e) {
        throw numeric_error("grid config " + std::to_string(g) + ": " + e.what());
      }
      acc_sum += evaluate_loss_accuracy(tr.model, ex, ey).accuracy;
    }
    res.mean_accuracy[g] = acc_sum / folds.size();
    if (g == 0 || res.mean_accuracy[g] > res.mean_accuracy[res.best_index]) res.best_index = g;
  }
  res.best = grid[res.best_index];
  return res;
}

}  // namespace sqnz
