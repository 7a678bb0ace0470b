#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sqnz/config.hpp"
#include "sqnz/metrics.hpp"
#include "sqnz/model.hpp"
#include "sqnz/packfmt.hpp"
#include "sqnz/preprocess.hpp"
#include "sqnz/prune.hpp"
#include "sqnz/quantize.hpp"
#include "sqnz/shift_infer.hpp"
#include "sqnz/signal.hpp"
#include "sqnz/train.hpp"

namespace sqnz {

// Standardise, then force length L; returns [1, L] tensors plus class indices.
template <typename T>
std::pair<std::vector<Tensor<T>>, std::vector<std::size_t>> dataset_to_inputs(
    const Dataset& ds, std::size_t L) {
  std::vector<Tensor<T>> inputs;
  std::vector<std::size_t> labels;
  inputs.reserve(ds.records.size());
  labels.reserve(ds.records.size());
  for (const auto& rec : ds.records) {
    auto z = standardize<T>(rec.samples);
    auto fixed = fit_length(std::move(z), L);
    inputs.push_back(Tensor<T>::from({1, L}, std::move(fixed.values)));
    labels.push_back(static_cast<std::size_t>(rec.label));
  }
  return {std::move(inputs), std::move(labels)};
}

template <typename T>
std::vector<Tensor<T>> select(const std::vector<Tensor<T>>& xs, const std::vector<std::size_t>& idx) {
  std::vector<Tensor<T>> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(xs[i]);
  return out;
}

inline std::vector<std::size_t> select(const std::vector<std::size_t>& xs,
                                       const std::vector<std::size_t>& idx) {
  std::vector<std::size_t> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(xs[i]);
  return out;
}

template <typename T>
ConfusionMatrix evaluate_confusion(const Model<T>& m, const std::vector<Tensor<T>>& inputs,
                                   const std::vector<std::size_t>& labels) {
  std::vector<std::size_t> preds(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) preds[i] = predict(m, inputs[i]);
  return confusion_matrix(preds, labels);
}

template <typename T>
EvalReport make_eval_report(const Model<T>& m, const std::vector<Tensor<T>>& inputs,
                            const std::vector<std::size_t>& labels) {
  EvalReport rep;
  rep.cm = evaluate_confusion(m, inputs, labels);
  rep.macro = macro_metrics(rep.cm);
  rep.cinc_f1 = cinc_overall_f1(rep.cm);
  rep.model_sparsity = weight_sparsity(m);
  rep.feature_map_sparsity = feature_map_sparsity(m, inputs);
  return rep;
}

inline json eval_report_json(const EvalReport& r) {
  json j;
  json cm = json::array();
  for (const auto& row : r.cm.counts) {
    json rj = json::array();
    for (auto v : row) rj.push_back(v);
    cm.push_back(rj);
  }
  j["confusion_matrix"] = cm;
  j["accuracy"] = r.macro.accuracy;
  j["precision"] = r.macro.precision;
  j["sensitivity"] = r.macro.sensitivity;
  j["specificity"] = r.macro.specificity;
  j["f1"] = r.macro.f1;
  j["cinc_f1"] = r.cinc_f1;
  j["model_sparsity"] = r.model_sparsity;
  j["feature_map_sparsity"] = r.feature_map_sparsity;
  return j;
}

inline EvalReport eval_report_from_json(const json& j) {
  EvalReport r;
  const auto& cm = j.at("confusion_matrix");
  for (std::size_t i = 0; i < kNumClasses; ++i)
    for (std::size_t k = 0; k < kNumClasses; ++k)
      r.cm.counts[i][k] = cm.at(i).at(k).get<std::uint64_t>();
  r.macro.accuracy = j.at("accuracy").get<double>();
  r.macro.precision = j.at("precision").get<double>();
  r.macro.sensitivity = j.at("sensitivity").get<double>();
  r.macro.specificity = j.at("specificity").get<double>();
  r.macro.f1 = j.at("f1").get<double>();
  r.cinc_f1 = j.at("cinc_f1").get<double>();
  r.model_sparsity = j.at("model_sparsity").get<double>();
  r.feature_map_sparsity = j.at("feature_map_sparsity").get<double>();
  return r;
}

// Packs with RLE4 when the codes fit a nibble (b <= 3), dense floats otherwise.
inline std::vector<std::uint8_t> pack_model_auto(const Model<float>& m, unsigned quant_bits) {
  if (quant_bits >= 2 && quant_bits <= 3) {
    QuantConfig q;
    q.bits = quant_bits;
    Model<float> copy = m;
    const auto codes = quantize_model(copy, q);  // grid values quantise to themselves
    return pack(copy, &codes, Scheme::sparse_rle4, &q);
  }
  return pack(m, nullptr, Scheme::dense_f32, nullptr);
}

// Runs QAT + evaluation once per bit-width.
template <typename T>
std::vector<SweepRow> sweep_bitwidths(const Model<T>& base, const std::vector<unsigned>& bits_list,
                                      const std::vector<Tensor<T>>& train_x,
                                      const std::vector<std::size_t>& train_y,
                                      const std::vector<Tensor<T>>& val_x,
                                      const std::vector<std::size_t>& val_y,
                                      const std::vector<Tensor<T>>& test_x,
                                      const std::vector<std::size_t>& test_y,
                                      const Hyperparams& hp, std::uint64_t seed) {
  if (bits_list.empty()) throw validation_error("sweep_bitwidths: empty bit list");
  std::vector<SweepRow> rows;
  for (unsigned b : bits_list) {
    QuantConfig cfg;
    cfg.bits = b;
    auto r = qat_train(base, cfg, train_x, train_y, val_x, val_y, hp,
                       derive_seed(seed, "sweep-b" + std::to_string(b)));
    SweepRow row;
    row.bits = b;
    row.accuracy = evaluate_loss_accuracy(r.model, test_x, test_y).accuracy;
    row.model_sparsity = weight_sparsity(r.model);
    const Model<float> mf = r.model.template cast<float>();
    row.packed_bytes = pack_model_auto(mf, b).size();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sqnz
