#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sqnz/errors.hpp"
#include "sqnz/signal.hpp"

namespace sqnz {

// Rows = true class, columns = predicted, both in (N, A, O, ~) order.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& row : counts)
      for (std::uint64_t c : row) t += c;
    return t;
  }
  std::uint64_t trace() const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < kNumClasses; ++i) t += counts[i][i];
    return t;
  }
};

inline ConfusionMatrix confusion_matrix(const std::vector<std::size_t>& predictions,
                                        const std::vector<std::size_t>& labels) {
  if (predictions.size() != labels.size())
    throw validation_error("confusion_matrix: length mismatch");
  if (predictions.empty()) throw validation_error("confusion_matrix: empty input");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < predictions.size(); ++i) cm.counts[labels[i]][predictions[i]]++;
  return cm;
}

struct MacroMetrics {
  double accuracy = 0, precision = 0, sensitivity = 0, specificity = 0, f1 = 0;
};

enum class Averaging { macro, micro };

namespace detail {

struct OneVsRest {
  double tp = 0, fp = 0, fn = 0, tn = 0;
};

inline OneVsRest one_vs_rest(const ConfusionMatrix& cm, std::size_t c) {
  OneVsRest r;
  const double total = static_cast<double>(cm.total());
  for (std::size_t i = 0; i < kNumClasses; ++i)
    for (std::size_t j = 0; j < kNumClasses; ++j) {
      const double v = static_cast<double>(cm.counts[i][j]);
      if (i == c && j == c) r.tp += v;
      else if (j == c) r.fp += v;
      else if (i == c) r.fn += v;
    }
  r.tn = total - r.tp - r.fp - r.fn;
  return r;
}

inline double safe_div(double num, double den) { return den > 0 ? num / den : 0.0; }

}  // namespace detail

// One-vs-rest metrics, unweighted mean over the four classes (micro behind
// the flag). Divisions by zero yield 0, so a never-predicted class scores
// precision 0.
inline MacroMetrics macro_metrics(const ConfusionMatrix& cm, Averaging avg = Averaging::macro) {
  if (cm.total() == 0) throw validation_error("macro_metrics: empty confusion matrix");
  MacroMetrics m;
  m.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
  if (avg == Averaging::macro) {
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const auto r = detail::one_vs_rest(cm, c);
      const double prec = detail::safe_div(r.tp, r.tp + r.fp);
      const double sens = detail::safe_div(r.tp, r.tp + r.fn);
      const double spec = detail::safe_div(r.tn, r.tn + r.fp);
      const double f1 = detail::safe_div(2.0 * prec * sens, prec + sens);
      m.precision += prec / kNumClasses;
      m.sensitivity += sens / kNumClasses;
      m.specificity += spec / kNumClasses;
      m.f1 += f1 / kNumClasses;
    }
  } else {
    double tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      const auto r = detail::one_vs_rest(cm, c);
      tp += r.tp;
      fp += r.fp;
      fn += r.fn;
      tn += r.tn;
    }
    m.precision = detail::safe_div(tp, tp + fp);
    m.sensitivity = detail::safe_div(tp, tp + fn);
    m.specificity = detail::safe_div(tn, tn + fp);
    m.f1 = detail::safe_div(2.0 * m.precision * m.sensitivity, m.precision + m.sensitivity);
  }
  return m;
}

// Challenge convention: mean per-class F1 over N, A and O; noisy excluded.
inline double cinc_overall_f1(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw validation_error("cinc_overall_f1: empty confusion matrix");
  double sum = 0;
  const std::size_t scored[3] = {static_cast<std::size_t>(Label::N),
                                 static_cast<std::size_t>(Label::A),
                                 static_cast<std::size_t>(Label::O)};
  for (std::size_t c : scored) {
    const auto r = detail::one_vs_rest(cm, c);
    const double prec = detail::safe_div(r.tp, r.tp + r.fp);
    const double sens = detail::safe_div(r.tp, r.tp + r.fn);
    sum += detail::safe_div(2.0 * prec * sens, prec + sens);
  }
  return sum / 3.0;
}

struct EvalReport {
  ConfusionMatrix cm;
  MacroMetrics macro;
  double cinc_f1 = 0;
  double model_sparsity = 0;
  double feature_map_sparsity = 0;
};

}  // namespace sqnz
