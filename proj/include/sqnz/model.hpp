#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sqnz/errors.hpp"
#include "sqnz/nn.hpp"
#include "sqnz/prng.hpp"
#include "sqnz/tensor.hpp"

namespace sqnz {

struct ConvLayerSpec {
  std::size_t channels = 128;
  std::size_t kernel = 7;
  bool pool_after = false;
  std::size_t pool_window = 5;
};

struct ArchConfig {
  std::size_t input_length = 18000;
  std::vector<ConvLayerSpec> conv;
  std::vector<std::size_t> dense_units;  // last entry must equal n_classes
  std::size_t n_classes = 4;
  Padding conv_padding = Padding::same_zero;

  // Four 128-channel conv layers, pooling by 5 after the first two, two dense
  // layers.
  static ArchConfig paper_default() {
    ArchConfig a;
    a.input_length = 18000;
    a.conv = {{128, 7, true, 5}, {128, 7, true, 5}, {128, 7, false, 5}, {128, 7, false, 5}};
    a.dense_units = {64, 4};
    return a;
  }

  void validate() const {
    if (conv.empty() || dense_units.empty())
      throw architecture_error("need at least one conv and one dense layer");
    if (dense_units.back() != n_classes)
      throw architecture_error("last dense layer must have n_classes units");
    if (input_length < 1) throw architecture_error("input_length must be >= 1");
    for (const auto& c : conv) {
      if (c.channels < 1 || c.kernel < 1) throw architecture_error("bad conv layer spec");
      if (c.pool_after && c.pool_window < 1) throw architecture_error("pool_window must be >= 1");
    }
  }

  // Sequence length after each conv (+pool) stage; throws if any stage empties.
  std::vector<std::size_t> layer_lengths() const {
    std::vector<std::size_t> lengths;
    std::size_t L = input_length;
    for (std::size_t i = 0; i < conv.size(); ++i) {
      if (L == 0) throw architecture_error("intermediate length reaches 0 at conv layer " +
                                           std::to_string(i + 1));
      L = conv_out_len(L, conv[i].kernel);
      if (conv[i].pool_after) L = L / conv[i].pool_window;
      lengths.push_back(L);
    }
    if (L == 0) throw architecture_error("flattened length is 0");
    return lengths;
  }

  std::size_t flatten_dim() const {
    auto lengths = layer_lengths();
    return conv.back().channels * lengths.back();
  }

private:
  std::size_t conv_out_len(std::size_t L, std::size_t K) const {
    if (conv_padding == Padding::same_zero) return L;
    if (K > L) throw architecture_error("valid conv kernel longer than input");
    return L - K + 1;
  }
};

// Parameter container. Masks are 1 = trainable, 0 = frozen at zero; a masked
// element always holds the value 0.
template <typename T>
struct Model {
  ArchConfig arch;
  std::vector<Tensor<T>> conv_w, conv_b;
  std::vector<Tensor<T>> dense_w, dense_b;
  std::vector<Tensor<std::uint8_t>> conv_w_mask, conv_b_mask, dense_w_mask, dense_b_mask;

  struct ParamRef {
    std::string name;
    Tensor<T>* value;
    Tensor<std::uint8_t>* mask;
    bool is_bias;
  };
  struct ConstParamRef {
    std::string name;
    const Tensor<T>* value;
    const Tensor<std::uint8_t>* mask;
    bool is_bias;
  };

  std::vector<ParamRef> params() {
    std::vector<ParamRef> out;
    for (std::size_t i = 0; i < conv_w.size(); ++i) {
      out.push_back({"conv" + std::to_string(i + 1) + ".weight", &conv_w[i], &conv_w_mask[i], false});
      out.push_back({"conv" + std::to_string(i + 1) + ".bias", &conv_b[i], &conv_b_mask[i], true});
    }
    for (std::size_t i = 0; i < dense_w.size(); ++i) {
      out.push_back({"dense" + std::to_string(i + 1) + ".weight", &dense_w[i], &dense_w_mask[i], false});
      out.push_back({"dense" + std::to_string(i + 1) + ".bias", &dense_b[i], &dense_b_mask[i], true});
    }
    return out;
  }
  std::vector<ConstParamRef> params() const {
    std::vector<ConstParamRef> out;
    for (std::size_t i = 0; i < conv_w.size(); ++i) {
      out.push_back({"conv" + std::to_string(i + 1) + ".weight", &conv_w[i], &conv_w_mask[i], false});
      out.push_back({"conv" + std::to_string(i + 1) + ".bias", &conv_b[i], &conv_b_mask[i], true});
    }
    for (std::size_t i = 0; i < dense_w.size(); ++i) {
      out.push_back({"dense" + std::to_string(i + 1) + ".weight", &dense_w[i], &dense_w_mask[i], false});
      out.push_back({"dense" + std::to_string(i + 1) + ".bias", &dense_b[i], &dense_b_mask[i], true});
    }
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params()) n += p.value->size();
    return n;
  }

  template <typename U>
  Model<U> cast() const {
    Model<U> m;
    m.arch = arch;
    auto conv_tensors = [&](const std::vector<Tensor<T>>& src, std::vector<Tensor<U>>& dst) {
      for (const auto& t : src) {
        Tensor<U> u(t.shape);
        for (std::size_t i = 0; i < t.size(); ++i) u[i] = static_cast<U>(t[i]);
        dst.push_back(std::move(u));
      }
    };
    conv_tensors(conv_w, m.conv_w);
    conv_tensors(conv_b, m.conv_b);
    conv_tensors(dense_w, m.dense_w);
    conv_tensors(dense_b, m.dense_b);
    m.conv_w_mask = conv_w_mask;
    m.conv_b_mask = conv_b_mask;
    m.dense_w_mask = dense_w_mask;
    m.dense_b_mask = dense_b_mask;
    return m;
  }
};

// Seeded uniform init in +-sqrt(6/(fan_in+fan_out)); biases start at zero.
template <typename T>
Model<T> build_model(const ArchConfig& arch, std::uint64_t seed) {
  arch.validate();
  arch.layer_lengths();  // architecture_error on degenerate configs
  Model<T> m;
  m.arch = arch;
  SplitMix64 rng(derive_seed(seed, "init"));
  auto init_uniform = [&](Tensor<T>& t, double bound) {
    for (auto& v : t.data) v = static_cast<T>((2.0 * rng.next_unit() - 1.0) * bound);
  };

  std::size_t c_in = 1;
  for (const auto& spec : arch.conv) {
    Tensor<T> w({spec.channels, c_in, spec.kernel});
    const double fan_in = static_cast<double>(c_in * spec.kernel);
    const double fan_out = static_cast<double>(spec.channels * spec.kernel);
    init_uniform(w, std::sqrt(6.0 / (fan_in + fan_out)));
    m.conv_w.push_back(std::move(w));
    m.conv_b.emplace_back(std::vector<std::size_t>{spec.channels});
    c_in = spec.channels;
  }
  std::size_t d = arch.flatten_dim();
  for (std::size_t units : arch.dense_units) {
    Tensor<T> w({units, d});
    init_uniform(w, std::sqrt(6.0 / (static_cast<double>(d) + static_cast<double>(units))));
    m.dense_w.push_back(std::move(w));
    m.dense_b.emplace_back(std::vector<std::size_t>{units});
    d = units;
  }
  for (const auto& t : m.conv_w) m.conv_w_mask.emplace_back(t.shape, std::uint8_t{1});
  for (const auto& t : m.conv_b) m.conv_b_mask.emplace_back(t.shape, std::uint8_t{1});
  for (const auto& t : m.dense_w) m.dense_w_mask.emplace_back(t.shape, std::uint8_t{1});
  for (const auto& t : m.dense_b) m.dense_b_mask.emplace_back(t.shape, std::uint8_t{1});
  return m;
}

template <typename T>
struct ForwardTrace {
  std::vector<Tensor<T>> conv_inputs;    // per conv layer
  std::vector<Tensor<T>> conv_preacts;   // pre-ReLU
  std::vector<Tensor<T>> conv_postrelu;  // post-ReLU (pre-pool)
  std::vector<std::vector<std::size_t>> pool_argmax;
  std::vector<Tensor<T>> dense_inputs;
  std::vector<Tensor<T>> dense_preacts;
  Tensor<T> probs;
};

// input: [1, L] (single-lead series). Returns class probabilities, length 4.
template <typename T>
Tensor<T> model_forward(const Model<T>& m, const Tensor<T>& input, ForwardTrace<T>* trace = nullptr) {
  if (input.shape.size() != 2 || input.dim(0) != 1 || input.dim(1) != m.arch.input_length)
    throw dimension_error("model_forward: input must be [1, input_length]");
  Tensor<T> x = input;
  for (std::size_t i = 0; i < m.conv_w.size(); ++i) {
    if (trace) trace->conv_inputs.push_back(x);
    Tensor<T> pre = conv1d_forward(x, m.conv_w[i], m.conv_b[i], m.arch.conv_padding);
    if (!all_finite(pre))
      throw numeric_error("non-finite value in conv layer " + std::to_string(i + 1));
    Tensor<T> post = relu(pre);
    if (trace) {
      trace->conv_preacts.push_back(pre);
      trace->conv_postrelu.push_back(post);
    }
    if (m.arch.conv[i].pool_after) {
      auto pooled = maxpool1d_forward(post, m.arch.conv[i].pool_window);
      if (trace) trace->pool_argmax.push_back(std::move(pooled.argmax));
      x = std::move(pooled.out);
    } else {
      if (trace) trace->pool_argmax.emplace_back();
      x = std::move(post);
    }
  }
  // flatten [C, L] -> [C*L], channel-major
  const std::size_t flat_n = x.size();
  Tensor<T> flat = Tensor<T>::from({flat_n}, std::move(x.data));
  for (std::size_t i = 0; i < m.dense_w.size(); ++i) {
    if (trace) trace->dense_inputs.push_back(flat);
    Tensor<T> pre = dense_forward(flat, m.dense_w[i], m.dense_b[i]);
    if (!all_finite(pre))
      throw numeric_error("non-finite value in dense layer " + std::to_string(i + 1));
    if (trace) trace->dense_preacts.push_back(pre);
    flat = (i + 1 < m.dense_w.size()) ? relu(pre) : std::move(pre);
  }
  Tensor<T> probs = softmax(flat);
  if (trace) trace->probs = probs;
  return probs;
}

template <typename T>
struct GradientSet {
  std::vector<Tensor<T>> conv_dw, conv_db, dense_dw, dense_db;

  static GradientSet zeros_like(const Model<T>& m) {
    GradientSet g;
    for (const auto& t : m.conv_w) g.conv_dw.emplace_back(t.shape);
    for (const auto& t : m.conv_b) g.conv_db.emplace_back(t.shape);
    for (const auto& t : m.dense_w) g.dense_dw.emplace_back(t.shape);
    for (const auto& t : m.dense_b) g.dense_db.emplace_back(t.shape);
    return g;
  }

  void scale(T f) {
    auto sc = [f](std::vector<Tensor<T>>& ts) {
      for (auto& t : ts)
        for (auto& v : t.data) v *= f;
    };
    sc(conv_dw);
    sc(conv_db);
    sc(dense_dw);
    sc(dense_db);
  }
};

// Mean-over-batch gradients of the cross-entropy through softmax; masked-out
// parameters get gradient 0.
template <typename T>
GradientSet<T> backprop_grads(const Model<T>& m, const std::vector<Tensor<T>>& inputs,
                              const std::vector<std::size_t>& labels) {
  if (inputs.empty() || inputs.size() != labels.size())
    throw validation_error("backprop_grads: empty or mismatched batch");
  GradientSet<T> acc = GradientSet<T>::zeros_like(m);

  for (std::size_t s = 0; s < inputs.size(); ++s) {
    ForwardTrace<T> tr;
    Tensor<T> probs = model_forward(m, inputs[s], &tr);

    // d(cross-entropy)/d(logits) = probs - onehot
    Tensor<T> d = probs;
    d[labels[s]] -= T{1};

    for (std::size_t i = m.dense_w.size(); i-- > 0;) {
      auto g = dense_backward(tr.dense_inputs[i], m.dense_w[i], d);
      for (std::size_t j = 0; j < g.d_weights.size(); ++j) acc.dense_dw[i][j] += g.d_weights[j];
      for (std::size_t j = 0; j < g.d_bias.size(); ++j) acc.dense_db[i][j] += g.d_bias[j];
      d = std::move(g.d_input);
      if (i > 0) d = relu_backward(tr.dense_preacts[i - 1], d);
    }

    // unflatten into the last conv stage's output shape
    const auto lengths = m.arch.layer_lengths();
    std::size_t C = m.arch.conv.back().channels;
    Tensor<T> dmap = Tensor<T>::from({C, lengths.back()}, std::move(d.data));

    for (std::size_t i = m.conv_w.size(); i-- > 0;) {
      const Tensor<T>& post = tr.conv_postrelu[i];
      if (m.arch.conv[i].pool_after)
        dmap = maxpool1d_backward(tr.pool_argmax[i], post.dim(0), post.dim(1), dmap);
      dmap = relu_backward(tr.conv_preacts[i], dmap);
      auto g = conv1d_backward(tr.conv_inputs[i], m.conv_w[i], dmap, m.arch.conv_padding);
      for (std::size_t j = 0; j < g.d_weights.size(); ++j) acc.conv_dw[i][j] += g.d_weights[j];
      for (std::size_t j = 0; j < g.d_bias.size(); ++j) acc.conv_db[i][j] += g.d_bias[j];
      dmap = std::move(g.d_input);
    }
  }

  acc.scale(T{1} / static_cast<T>(inputs.size()));

  auto apply_mask = [](std::vector<Tensor<T>>& grads, const std::vector<Tensor<std::uint8_t>>& masks) {
    for (std::size_t i = 0; i < grads.size(); ++i)
      for (std::size_t j = 0; j < grads[i].size(); ++j)
        if (!masks[i][j]) grads[i][j] = T{0};
  };
  apply_mask(acc.conv_dw, m.conv_w_mask);
  apply_mask(acc.conv_db, m.conv_b_mask);
  apply_mask(acc.dense_dw, m.dense_w_mask);
  apply_mask(acc.dense_db, m.dense_b_mask);
  return acc;
}

// w <- w - lr*(g + wd*w), then w <- w*mask. Biases are exempt from decay.
template <typename T>
void sgd_step(Model<T>& m, const GradientSet<T>& g, double lr, double weight_decay) {
  if (lr <= 0) throw validation_error("sgd_step: lr must be > 0");
  if (weight_decay < 0) throw validation_error("sgd_step: weight_decay must be >= 0");
  auto upd = [&](std::vector<Tensor<T>>& ws, const std::vector<Tensor<T>>& gs,
                 const std::vector<Tensor<std::uint8_t>>& masks, bool decay) {
    for (std::size_t i = 0; i < ws.size(); ++i) {
      for (std::size_t j = 0; j < ws[i].size(); ++j) {
        T w = ws[i][j];
        T grad = gs[i][j];
        if (decay) grad += static_cast<T>(weight_decay) * w;
        w -= static_cast<T>(lr) * grad;
        ws[i][j] = masks[i][j] ? w : T{0};
      }
    }
  };
  upd(m.conv_w, g.conv_dw, m.conv_w_mask, true);
  upd(m.conv_b, g.conv_db, m.conv_b_mask, false);
  upd(m.dense_w, g.dense_dw, m.dense_w_mask, true);
  upd(m.dense_b, g.dense_db, m.dense_b_mask, false);
}

struct SizeReportEntry {
  std::string name;
  std::size_t elements = 0;
  std::size_t zeros = 0;
  std::uint64_t bytes = 0;
};

struct SizeReport {
  std::vector<SizeReportEntry> entries;
  std::size_t total_elements = 0;
  std::size_t total_zeros = 0;
  std::uint64_t total_bytes = 0;
};

// bytes = ceil(elements * bits / 8) per tensor and in total.
template <typename T>
SizeReport model_size_bytes(const Model<T>& m, unsigned bits_per_value) {
  if (bits_per_value != 4 && bits_per_value != 32)
    throw validation_error("model_size_bytes: precision must be 4 or 32 bits");
  SizeReport rep;
  for (const auto& p : m.params()) {
    SizeReportEntry e;
    e.name = p.name;
    e.elements = p.value->size();
    e.zeros = count_zeros(*p.value);
    e.bytes = (static_cast<std::uint64_t>(e.elements) * bits_per_value + 7) / 8;
    rep.total_elements += e.elements;
    rep.total_zeros += e.zeros;
    rep.entries.push_back(std::move(e));
  }
  rep.total_bytes = (static_cast<std::uint64_t>(rep.total_elements) * bits_per_value + 7) / 8;
  return rep;
}

// Zero fraction across all weights and biases.
template <typename T>
double weight_sparsity(const Model<T>& m) {
  std::size_t zeros = 0, total = 0;
  for (const auto& p : m.params()) {
    zeros += count_zeros(*p.value);
    total += p.value->size();
  }
  return total ? static_cast<double>(zeros) / static_cast<double>(total) : 0.0;
}

// Mean zero fraction over records and over every post-ReLU activation map
// (conv stages and hidden dense stages).
template <typename T>
double feature_map_sparsity(const Model<T>& m, const std::vector<Tensor<T>>& inputs) {
  if (inputs.empty()) throw validation_error("feature_map_sparsity: empty dataset");
  double total_ratio = 0.0;
  for (const auto& in : inputs) {
    ForwardTrace<T> tr;
    model_forward(m, in, &tr);
    std::size_t zeros = 0, count = 0;
    for (const auto& map : tr.conv_postrelu) {
      zeros += count_zeros(map);
      count += map.size();
    }
    // hidden dense layers only; the final layer feeds softmax, not ReLU
    for (std::size_t i = 0; i + 1 < m.dense_w.size(); ++i) {
      const auto& pre = tr.dense_preacts[i];
      for (std::size_t j = 0; j < pre.size(); ++j) {
        zeros += (pre[j] <= T{0});
        ++count;
      }
    }
    total_ratio += static_cast<double>(zeros) / static_cast<double>(count);
  }
  return total_ratio / static_cast<double>(inputs.size());
}

}  // namespace sqnz
