#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <tuple>
#include <vector>

#include "sqnz/errors.hpp"
#include "sqnz/model.hpp"
#include "sqnz/train.hpp"

namespace sqnz {

struct PruneSchedule {
  std::vector<double> sparsity_steps = {0.5, 0.7, 0.8, 0.9};
  Hyperparams fine_tune_hp;

  PruneSchedule() {
    fine_tune_hp.learning_rate = 0.02;
    fine_tune_hp.max_epochs = 12;
    fine_tune_hp.patience = 12;
  }

  void validate() const {
    if (sparsity_steps.empty()) throw validation_error("prune schedule is empty");
    double prev = 0.0;
    for (double s : sparsity_steps) {
      if (s <= prev || s >= 1.0) throw validation_error("sparsity steps must be strictly increasing in (0,1)");
      prev = s;
    }
    if (sparsity_steps.back() > 0.99) throw validation_error("final sparsity target must be <= 0.99");
    fine_tune_hp.validate();
  }
};

namespace detail {

template <typename T>
std::vector<Tensor<T>*> weight_tensors(Model<T>& m) {
  std::vector<Tensor<T>*> out;
  for (auto& t : m.conv_w) out.push_back(&t);
  for (auto& t : m.dense_w) out.push_back(&t);
  return out;
}

template <typename T>
std::vector<Tensor<std::uint8_t>*> weight_masks(Model<T>& m) {
  std::vector<Tensor<std::uint8_t>*> out;
  for (auto& t : m.conv_w_mask) out.push_back(&t);
  for (auto& t : m.dense_w_mask) out.push_back(&t);
  return out;
}

}  // namespace detail

// Zero fraction over conv and dense weight tensors only (the population the
// magnitude ranking operates on; biases are exempt).
template <typename T>
double weight_tensor_sparsity(const Model<T>& m) {
  std::size_t zeros = 0, total = 0;
  for (const auto& p : m.params()) {
    if (p.is_bias) continue;
    zeros += count_zeros(*p.value);
    total += p.value->size();
  }
  return total ? static_cast<double>(zeros) / static_cast<double>(total) : 0.0;
}

// Global magnitude ranking across all conv/dense weight tensors; the smallest
// ceil(target*N) magnitudes are zeroed and masked. Ties break on
// (tensor order, flat index), so existing zeros are always re-selected and
// masks only grow.
template <typename T>
void magnitude_prune_step(Model<T>& m, double target_sparsity) {
  if (target_sparsity < 0.0 || target_sparsity >= 1.0)
    throw validation_error("target sparsity must be in [0,1)");
  const double current = weight_tensor_sparsity(m);
  if (target_sparsity < current)
    throw validation_error("target sparsity below current sparsity");

  auto tensors = detail::weight_tensors(m);
  auto masks = detail::weight_masks(m);
  std::size_t total = 0;
  for (auto* t : tensors) total += t->size();

  const std::size_t k = static_cast<std::size_t>(
      std::ceil(target_sparsity * static_cast<double>(total)));
  if (k == 0) return;

  struct Entry {
    double mag;
    std::size_t tensor, index;
  };
  std::vector<Entry> entries;
  entries.reserve(total);
  for (std::size_t ti = 0; ti < tensors.size(); ++ti)
    for (std::size_t i = 0; i < tensors[ti]->size(); ++i)
      entries.push_back({std::fabs(static_cast<double>((*tensors[ti])[i])), ti, i});

  std::nth_element(entries.begin(), entries.begin() + (k - 1), entries.end(),
                   [](const Entry& a, const Entry& b) {
                     return std::tie(a.mag, a.tensor, a.index) < std::tie(b.mag, b.tensor, b.index);
                   });
  // nth_element leaves an arbitrary order below the pivot; the selection set
  // itself is exactly the bottom-k under the total order above.
  for (std::size_t i = 0; i < k; ++i) {
    const Entry& e = entries[i];
    (*tensors[e.tensor])[e.index] = T{0};
    (*masks[e.tensor])[e.index] = 0;
  }
}

struct PruneStepReport {
  double target = 0;
  double weight_sparsity = 0;  // over weight tensors
  double total_sparsity = 0;   // over weights and biases
  double val_accuracy = 0;
};

inline std::string prune_report_csv(const std::vector<PruneStepReport>& rows) {
  std::string s = "step,target,weight_sparsity,total_sparsity,val_accuracy\n";
  char buf[160];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.4f,%.6f,%.6f,%.6f\n", i + 1, rows[i].target,
                  rows[i].weight_sparsity, rows[i].total_sparsity, rows[i].val_accuracy);
    s += buf;
  }
  return s;
}

template <typename T>
struct IterativePruneResult {
  Model<T> model;
  std::vector<PruneStepReport> report;
};

// Alternates a magnitude step with global fine-tuning under the masks.
template <typename T>
IterativePruneResult<T> iterative_prune(Model<T> model, const PruneSchedule& schedule,
                                        const std::vector<Tensor<T>>& train_x,
                                        const std::vector<std::size_t>& train_y,
                                        const std::vector<Tensor<T>>& val_x,
                                        const std::vector<std::size_t>& val_y,
                                        std::uint64_t seed) {
  schedule.validate();
  IterativePruneResult<T> res;
  res.model = std::move(model);
  for (std::size_t step = 0; step < schedule.sparsity_steps.size(); ++step) {
    const double target = schedule.sparsity_steps[step];
    magnitude_prune_step(res.model, target);
    auto ft = train(std::move(res.model), train_x, train_y, val_x, val_y, schedule.fine_tune_hp,
                    derive_seed(seed, "finetune-" + std::to_string(step)));
    res.model = std::move(ft.model);
    PruneStepReport row;
    row.target = target;
    row.weight_sparsity = weight_tensor_sparsity(res.model);
    row.total_sparsity = weight_sparsity(res.model);
    row.val_accuracy = ft.history.empty() ? 0.0 : ft.history[ft.best_epoch].val_acc;
    res.report.push_back(row);
  }
  return res;
}

namespace detail {

// Plain Lloyd iterations with k-means++ seeding over the supplied rows.
inline std::vector<std::size_t> kmeans_assign(const std::vector<std::vector<double>>& rows,
                                              std::size_t k, SplitMix64& rng,
                                              std::size_t max_iters = 50) {
  const std::size_t n = rows.size();
  std::vector<std::vector<double>> centers;
  centers.reserve(k);

  auto dist2 = [](const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double t = a[i] - b[i];
      d += t * t;
    }
    return d;
  };

  centers.push_back(rows[rng.next_below(n)]);
  std::vector<double> d2(n);
  while (centers.size() < k) {
    double sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = dist2(rows[i], centers[0]);
      for (std::size_t c = 1; c < centers.size(); ++c) best = std::min(best, dist2(rows[i], centers[c]));
      d2[i] = best;
      sum += best;
    }
    std::size_t pick = 0;
    if (sum > 0) {
      const double r = rng.next_unit() * sum;
      double acc = 0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= r) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.next_below(n);
    }
    centers.push_back(rows[pick]);
  }

  std::vector<std::size_t> assign(n, 0);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double bd = dist2(rows[i], centers[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = dist2(rows[i], centers[c]);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<double> mean(rows[0].size(), 0.0);
      std::size_t cnt = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (assign[i] == c) {
          for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += rows[i][j];
          ++cnt;
        }
      if (cnt) {
        for (auto& v : mean) v /= static_cast<double>(cnt);
        centers[c] = std::move(mean);
      }
    }
  }
  return assign;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    da += (a[i] - ma) * (a[i] - ma);
    db += (b[i] - mb) * (b[i] - mb);
  }
  if (da == 0 || db == 0) return 0;
  return num / std::sqrt(da * db);
}

}  // namespace detail

struct FilterPruneReport {
  struct Removal {
    std::size_t layer;   // conv layer index
    std::size_t filter;  // removed output channel
    std::size_t kept;    // correlated earlier channel it duplicates
    double correlation;
  };
  std::vector<Removal> removals;
  std::vector<std::pair<std::size_t, std::size_t>> degenerate;  // (layer, filter) zero-variance
};

// Collects each filter's post-ReLU activations over the calibration set,
// clusters the activation vectors (k-means++ seeding), and inside a cluster
// zeroes the later filter of any pair whose |Pearson correlation| exceeds tau.
// Zero-variance activation vectors are excluded from correlation and reported.
template <typename T>
FilterPruneReport filter_correlation_prune(Model<T>& m, const std::vector<Tensor<T>>& calibration,
                                           std::size_t clusters_k, double tau,
                                           std::uint64_t seed = 0) {
  if (calibration.empty()) throw validation_error("filter_correlation_prune: empty calibration set");
  FilterPruneReport report;
  SplitMix64 rng(derive_seed(seed, "filter-prune"));

  // gather activations per layer/filter
  std::vector<std::vector<std::vector<double>>> acts(m.conv_w.size());
  for (std::size_t li = 0; li < m.conv_w.size(); ++li)
    acts[li].assign(m.arch.conv[li].channels, {});
  for (const auto& input : calibration) {
    ForwardTrace<T> tr;
    model_forward(m, input, &tr);
    for (std::size_t li = 0; li < m.conv_w.size(); ++li) {
      const Tensor<T>& map = tr.conv_postrelu[li];
      const std::size_t C = map.dim(0), L = map.dim(1);
      for (std::size_t c = 0; c < C; ++c)
        for (std::size_t t = 0; t < L; ++t)
          acts[li][c].push_back(static_cast<double>(map.at2(c, t)));
    }
  }

  for (std::size_t li = 0; li < m.conv_w.size(); ++li) {
    const std::size_t C = m.arch.conv[li].channels;
    const std::size_t k = std::min(std::max<std::size_t>(clusters_k, 1), C);

    std::vector<std::size_t> live;
    for (std::size_t c = 0; c < C; ++c) {
      double mean = 0;
      for (double v : acts[li][c]) mean += v;
      mean /= acts[li][c].size();
      double var = 0;
      for (double v : acts[li][c]) var += (v - mean) * (v - mean);
      if (var == 0)
        report.degenerate.emplace_back(li, c);
      else
        live.push_back(c);
    }
    if (live.size() < 2) continue;

    std::vector<std::vector<double>> rows;
    rows.reserve(live.size());
    for (std::size_t c : live) rows.push_back(acts[li][c]);
    const auto assign = detail::kmeans_assign(rows, std::min(k, live.size()), rng);

    std::vector<bool> removed(C, false);
    for (std::size_t i = 0; i < live.size(); ++i) {
      for (std::size_t j = i + 1; j < live.size(); ++j) {
        if (assign[i] != assign[j]) continue;
        if (removed[live[i]] || removed[live[j]]) continue;
        const double rho = detail::pearson(rows[i], rows[j]);
        if (std::fabs(rho) > tau) {
          const std::size_t victim = live[j];
          removed[victim] = true;
          report.removals.push_back({li, victim, live[i], rho});
        }
      }
    }

    for (std::size_t c = 0; c < C; ++c) {
      if (!removed[c]) continue;
      const std::size_t c_in = m.conv_w[li].dim(1), K = m.conv_w[li].dim(2);
      for (std::size_t ci = 0; ci < c_in; ++ci)
        for (std::size_t kk = 0; kk < K; ++kk) {
          m.conv_w[li].at3(c, ci, kk) = T{0};
          m.conv_w_mask[li].at3(c, ci, kk) = 0;
        }
      m.conv_b[li][c] = T{0};
      m.conv_b_mask[li][c] = 0;
    }
  }
  return report;
}

}  // namespace sqnz
