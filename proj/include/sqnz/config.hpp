#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqnz/errors.hpp"
#include "sqnz/model.hpp"
#include "sqnz/preprocess.hpp"
#include "sqnz/prune.hpp"
#include "sqnz/quantize.hpp"
#include "sqnz/train.hpp"

namespace sqnz {

using json = nlohmann::ordered_json;

namespace detail {

inline void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed,
                                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) throw validation_error("unknown key '" + it.key() + "' in " + where);
  }
}

}  // namespace detail

inline json arch_to_json(const ArchConfig& a) {
  json j;
  j["input_length"] = a.input_length;
  j["conv_padding"] = (a.conv_padding == Padding::same_zero) ? "same_zero" : "valid";
  j["conv"] = json::array();
  for (const auto& c : a.conv) {
    json cj;
    cj["channels"] = c.channels;
    cj["kernel"] = c.kernel;
    cj["pool_after"] = c.pool_after;
    cj["pool_window"] = c.pool_window;
    j["conv"].push_back(cj);
  }
  j["dense"] = a.dense_units;
  j["n_classes"] = a.n_classes;
  return j;
}

inline ArchConfig arch_from_json(const json& j) {
  detail::reject_unknown_keys(j, {"input_length", "conv_padding", "conv", "dense", "n_classes"},
                              "arch");
  ArchConfig a;
  a.input_length = j.at("input_length").get<std::size_t>();
  if (j.contains("conv_padding")) {
    const std::string p = j.at("conv_padding").get<std::string>();
    if (p == "same_zero") a.conv_padding = Padding::same_zero;
    else if (p == "valid") a.conv_padding = Padding::valid;
    else throw validation_error("arch.conv_padding must be same_zero or valid");
  }
  a.conv.clear();
  for (const auto& cj : j.at("conv")) {
    detail::reject_unknown_keys(cj, {"channels", "kernel", "pool_after", "pool_window"},
                                "arch.conv[]");
    ConvLayerSpec c;
    c.channels = cj.at("channels").get<std::size_t>();
    c.kernel = cj.at("kernel").get<std::size_t>();
    c.pool_after = cj.value("pool_after", false);
    c.pool_window = cj.value("pool_window", std::size_t{5});
    a.conv.push_back(c);
  }
  a.dense_units = j.at("dense").get<std::vector<std::size_t>>();
  if (j.contains("n_classes")) a.n_classes = j.at("n_classes").get<std::size_t>();
  a.validate();
  return a;
}

inline json hyperparams_to_json(const Hyperparams& h) {
  json j;
  j["learning_rate"] = h.learning_rate;
  j["weight_decay"] = h.weight_decay;
  j["batch_size"] = h.batch_size;
  j["max_epochs"] = h.max_epochs;
  j["patience"] = h.patience;
  return j;
}

inline Hyperparams hyperparams_from_json(const json& j, const std::string& where) {
  detail::reject_unknown_keys(
      j, {"learning_rate", "weight_decay", "batch_size", "max_epochs", "patience"}, where);
  Hyperparams h;
  h.learning_rate = j.value("learning_rate", h.learning_rate);
  h.weight_decay = j.value("weight_decay", h.weight_decay);
  h.batch_size = j.value("batch_size", h.batch_size);
  h.max_epochs = j.value("max_epochs", h.max_epochs);
  h.patience = j.value("patience", h.patience);
  h.validate();
  return h;
}

// Everything one batch run needs: architecture, training knobs, stage paths
// and the single seed every stage derives from.
struct RunConfig {
  ArchConfig arch;
  Hyperparams hp;
  PruneSchedule prune;
  QuantConfig quant;
  SplitSpec split;
  std::size_t synth_n_per_class = 150;
  std::size_t synth_len_min = 450;
  std::size_t synth_len_max = 750;
  std::uint64_t seed = 1;
  unsigned frac_bits = 12;
  std::string data_dir;

  static RunConfig desk_default() {
    RunConfig c;
    c.arch.input_length = 600;
    c.arch.conv = {{16, 7, true, 5}, {16, 7, true, 5}, {16, 7, false, 5}, {16, 7, false, 5}};
    c.arch.dense_units = {64, 4};
    c.hp.learning_rate = 0.05;
    c.hp.weight_decay = 1e-4;
    c.hp.batch_size = 32;
    c.hp.max_epochs = 60;
    c.hp.patience = 10;
    return c;
  }
};

inline json runconfig_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["arch"] = arch_to_json(c.arch);
  j["hyperparams"] = hyperparams_to_json(c.hp);
  json pj;
  pj["sparsity_steps"] = c.prune.sparsity_steps;
  pj["fine_tune"] = hyperparams_to_json(c.prune.fine_tune_hp);
  j["prune"] = pj;
  json qj;
  qj["bits"] = c.quant.bits;
  j["quant"] = qj;
  json sj;
  sj["train"] = c.split.train;
  sj["val"] = c.split.val;
  sj["test"] = c.split.test;
  j["split"] = sj;
  json yj;
  yj["n_per_class"] = c.synth_n_per_class;
  yj["length_min"] = c.synth_len_min;
  yj["length_max"] = c.synth_len_max;
  j["synth"] = yj;
  j["frac_bits"] = c.frac_bits;
  j["data_dir"] = c.data_dir;
  return j;
}

inline RunConfig runconfig_from_json(const json& j) {
  detail::reject_unknown_keys(
      j, {"seed", "arch", "hyperparams", "prune", "quant", "split", "synth", "frac_bits", "data_dir"},
      "config");
  RunConfig c = RunConfig::desk_default();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("arch")) c.arch = arch_from_json(j.at("arch"));
  if (j.contains("hyperparams")) c.hp = hyperparams_from_json(j.at("hyperparams"), "hyperparams");
  if (j.contains("prune")) {
    const auto& pj = j.at("prune");
    detail::reject_unknown_keys(pj, {"sparsity_steps", "fine_tune"}, "prune");
    if (pj.contains("sparsity_steps"))
      c.prune.sparsity_steps = pj.at("sparsity_steps").get<std::vector<double>>();
    if (pj.contains("fine_tune"))
      c.prune.fine_tune_hp = hyperparams_from_json(pj.at("fine_tune"), "prune.fine_tune");
    c.prune.validate();
  }
  if (j.contains("quant")) {
    const auto& qj = j.at("quant");
    detail::reject_unknown_keys(qj, {"bits"}, "quant");
    if (qj.contains("bits")) c.quant.bits = qj.at("bits").get<unsigned>();
    c.quant.validate();
  }
  if (j.contains("split")) {
    const auto& sj = j.at("split");
    detail::reject_unknown_keys(sj, {"train", "val", "test"}, "split");
    c.split.train = sj.value("train", c.split.train);
    c.split.val = sj.value("val", c.split.val);
    c.split.test = sj.value("test", c.split.test);
    c.split.validate();
  }
  if (j.contains("synth")) {
    const auto& yj = j.at("synth");
    detail::reject_unknown_keys(yj, {"n_per_class", "length_min", "length_max"}, "synth");
    c.synth_n_per_class = yj.value("n_per_class", c.synth_n_per_class);
    c.synth_len_min = yj.value("length_min", c.synth_len_min);
    c.synth_len_max = yj.value("length_max", c.synth_len_max);
  }
  if (j.contains("frac_bits")) c.frac_bits = j.at("frac_bits").get<unsigned>();
  if (j.contains("data_dir")) c.data_dir = j.at("data_dir").get<std::string>();
  return c;
}

inline json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw parse_error("bad JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw parse_error("cannot open for writing: " + path.string());
  out << content;
}

// Model JSON container: arch + per-tensor values and masks, plus an optional
// quantisation tag for grid-valued models.
template <typename T>
json model_to_json(const Model<T>& m, const QuantConfig* quant = nullptr) {
  json j;
  j["arch"] = arch_to_json(m.arch);
  if (quant) j["quant_bits"] = quant->bits;
  j["tensors"] = json::array();
  for (const auto& p : m.params()) {
    json tj;
    tj["name"] = p.name;
    tj["shape"] = p.value->shape;
    json vals = json::array();
    for (T v : p.value->data) vals.push_back(static_cast<double>(v));
    tj["values"] = std::move(vals);
    bool any_masked = false;
    for (auto u : p.mask->data)
      if (!u) {
        any_masked = true;
        break;
      }
    if (any_masked) {
      json ms = json::array();
      for (auto u : p.mask->data) ms.push_back(static_cast<int>(u));
      tj["mask"] = std::move(ms);
    }
    j["tensors"].push_back(std::move(tj));
  }
  return j;
}

template <typename T>
Model<T> model_from_json(const json& j, unsigned* quant_bits_out = nullptr) {
  detail::reject_unknown_keys(j, {"arch", "quant_bits", "tensors"}, "model");
  const ArchConfig arch = arch_from_json(j.at("arch"));
  Model<T> m = build_model<T>(arch, 0);
  if (quant_bits_out)
    *quant_bits_out = j.contains("quant_bits") ? j.at("quant_bits").get<unsigned>() : 0;
  auto params = m.params();
  const auto& tensors = j.at("tensors");
  if (tensors.size() != params.size())
    throw format_error("model tensor count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& tj = tensors[i];
    if (tj.at("name").get<std::string>() != params[i].name)
      throw format_error("model tensor order mismatch at " + params[i].name);
    const auto shape = tj.at("shape").get<std::vector<std::size_t>>();
    if (shape != params[i].value->shape)
      throw dimension_error("model tensor shape mismatch at " + params[i].name);
    const auto& vals = tj.at("values");
    if (vals.size() != params[i].value->size())
      throw dimension_error("model tensor length mismatch at " + params[i].name);
    for (std::size_t v = 0; v < vals.size(); ++v)
      (*params[i].value)[v] = static_cast<T>(vals[v].get<double>());
    if (tj.contains("mask")) {
      const auto& ms = tj.at("mask");
      if (ms.size() != params[i].mask->size())
        throw dimension_error("model mask length mismatch at " + params[i].name);
      for (std::size_t v = 0; v < ms.size(); ++v)
        (*params[i].mask)[v] = static_cast<std::uint8_t>(ms[v].get<int>());
    }
  }
  return m;
}

}  // namespace sqnz
