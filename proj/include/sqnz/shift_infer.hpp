#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "sqnz/errors.hpp"
#include "sqnz/nn.hpp"
#include "sqnz/packfmt.hpp"
#include "sqnz/quantize.hpp"

namespace sqnz {

// Fixed-point vector: real value = v / 2^frac_bits.
struct FixedVec {
  std::vector<std::int64_t> v;
  unsigned frac_bits = 8;
};

namespace detail {

inline std::int64_t checked_shl(std::int64_t x, unsigned s, const std::string& where) {
  if (s >= 62) throw range_error("shift overflow in " + where);
  const std::int64_t r = x << s;
  if ((r >> s) != x) throw range_error("accumulator overflow in " + where);
  return r;
}

inline std::int64_t checked_add(std::int64_t a, std::int64_t b, const std::string& where) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw range_error("accumulator overflow in " + where);
  return r;
}

}  // namespace detail

// Round half to even at 2^frac_bits scale.
template <typename T>
FixedVec to_fixed(const std::vector<T>& x, unsigned frac_bits) {
  FixedVec f;
  f.frac_bits = frac_bits;
  f.v.resize(x.size());
  const double scale = std::ldexp(1.0, static_cast<int>(frac_bits));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double scaled = static_cast<double>(x[i]) * scale;
    if (!(std::fabs(scaled) < 9.0e18)) throw range_error("to_fixed: value out of range");
    f.v[i] = static_cast<std::int64_t>(std::nearbyint(scaled));
  }
  return f;
}

template <typename T = double>
std::vector<T> to_real(const FixedVec& f) {
  std::vector<T> out(f.v.size());
  const double inv = std::ldexp(1.0, -static_cast<int>(f.frac_bits));
  for (std::size_t i = 0; i < f.v.size(); ++i) out[i] = static_cast<T>(f.v[i] * inv);
  return out;
}

// One multiply-accumulate with the multiply replaced by a shift. The layer
// accumulates at frac_bits + emax scale; each term contributes
// x << (emax - E), i.e. exactly x * 2^(-E) after the single closing shift.
// Zero codes leave the accumulator untouched.
inline std::int64_t shift_mac(std::int64_t acc, std::int64_t x, const QuantCode& code,
                              unsigned emax, const std::string& where = "shift_mac") {
  if (code.kind == QuantCode::Kind::zero) return acc;
  if (code.exponent > emax) throw range_error("exponent above emax in " + where);
  const std::int64_t term = detail::checked_shl(x, emax - code.exponent, where);
  return detail::checked_add(acc, code.negative ? -term : term, where);
}

struct OpCounts {
  std::uint64_t executed = 0;
  std::uint64_t skipped = 0;
};

struct LayerOpReport {
  std::string name;
  OpCounts ops;
};

struct ShiftInferResult {
  Tensor<float> probs;
  std::vector<LayerOpReport> layers;
  OpCounts total;
};

namespace detail {

// Closing shift: add the half offset, then arithmetic shift right.
inline std::int64_t rescale(std::int64_t acc, unsigned emax, const std::string& where) {
  if (emax == 0) return acc;
  const std::int64_t offset = std::int64_t{1} << (emax - 1);
  return checked_add(acc, offset, where) >> emax;
}

}  // namespace detail

// Integer-only forward pass over a sparse quantised pack: feature maps in
// fixed point, weight multiplies as arithmetic shifts, zero weights skipped.
// Softmax runs in real arithmetic on the de-scaled logits.
inline ShiftInferResult quantized_forward(const Unpacked& packed, const std::vector<float>& input,
                                          unsigned frac_bits = 8) {
  if (!packed.quant.has_value() || packed.codes.empty())
    throw validation_error("quantized_forward: pack carries no quantised codes");
  const ArchConfig& arch = packed.arch;
  if (input.size() != arch.input_length)
    throw dimension_error("quantized_forward: input length mismatch");
  const unsigned emax = packed.quant->emax();
  if (frac_bits + emax >= 48) throw range_error("frac_bits + emax too large for the accumulator");

  // codes per tensor, in params() order: conv w/b pairs then dense w/b pairs
  const auto& codes = packed.codes;
  const double in_scale = std::ldexp(1.0, static_cast<int>(frac_bits));
  const double bias_scale = std::ldexp(1.0, static_cast<int>(frac_bits + emax));

  ShiftInferResult res;
  std::vector<std::int64_t> x(input.size());
  for (std::size_t i = 0; i < input.size(); ++i)
    x[i] = static_cast<std::int64_t>(std::nearbyint(static_cast<double>(input[i]) * in_scale));

  std::size_t c_in = 1;
  std::size_t L = arch.input_length;

  for (std::size_t li = 0; li < arch.conv.size(); ++li) {
    const std::string lname = "conv" + std::to_string(li + 1);
    const QuantizedTensor& wq = codes[2 * li];
    const QuantizedTensor& bq = codes[2 * li + 1];
    const std::size_t c_out = arch.conv[li].channels;
    const std::size_t K = arch.conv[li].kernel;
    const std::size_t L_out = (arch.conv_padding == Padding::same_zero) ? L : L - K + 1;
    const std::ptrdiff_t left =
        (arch.conv_padding == Padding::same_zero) ? static_cast<std::ptrdiff_t>((K - 1) / 2) : 0;

    LayerOpReport rep;
    rep.name = lname;
    std::vector<std::int64_t> y(c_out * L_out, 0);
    for (std::size_t co = 0; co < c_out; ++co) {
      const std::int64_t bias_fixed = static_cast<std::int64_t>(
          std::nearbyint(static_cast<double>(bq.codes[co].value<float>()) * bias_scale));
      for (std::size_t t = 0; t < L_out; ++t) {
        std::int64_t acc = bias_fixed;
        for (std::size_t ci = 0; ci < c_in; ++ci) {
          for (std::size_t k = 0; k < K; ++k) {
            const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t + k) - left;
            if (s < 0 || s >= static_cast<std::ptrdiff_t>(L)) continue;
            const QuantCode& c = wq.codes[(co * c_in + ci) * K + k];
            if (c.kind == QuantCode::Kind::zero) {
              rep.ops.skipped++;
              continue;
            }
            rep.ops.executed++;
            acc = shift_mac(acc, x[ci * L + s], c, emax, lname);
          }
        }
        // ReLU directly on the integer map
        const std::int64_t scaled = detail::rescale(acc, emax, lname);
        y[co * L_out + t] = scaled > 0 ? scaled : 0;
      }
    }

    if (arch.conv[li].pool_after) {
      const std::size_t W = arch.conv[li].pool_window;
      const std::size_t Lp = L_out / W;
      std::vector<std::int64_t> pooled(c_out * Lp);
      for (std::size_t c = 0; c < c_out; ++c)
        for (std::size_t t = 0; t < Lp; ++t) {
          std::int64_t best = y[c * L_out + t * W];
          for (std::size_t k = 1; k < W; ++k)
            best = std::max(best, y[c * L_out + t * W + k]);
          pooled[c * Lp + t] = best;
        }
      x = std::move(pooled);
      L = Lp;
    } else {
      x = std::move(y);
      L = L_out;
    }
    c_in = c_out;
    res.layers.push_back(std::move(rep));
  }

  // dense stages on the flattened integer map
  std::size_t D = c_in * L;
  for (std::size_t di = 0; di < arch.dense_units.size(); ++di) {
    const std::string lname = "dense" + std::to_string(di + 1);
    const QuantizedTensor& wq = codes[2 * arch.conv.size() + 2 * di];
    const QuantizedTensor& bq = codes[2 * arch.conv.size() + 2 * di + 1];
    const std::size_t U = arch.dense_units[di];

    LayerOpReport rep;
    rep.name = lname;
    std::vector<std::int64_t> y(U, 0);
    for (std::size_t u = 0; u < U; ++u) {
      std::int64_t acc = static_cast<std::int64_t>(
          std::nearbyint(static_cast<double>(bq.codes[u].value<float>()) * bias_scale));
      for (std::size_t d = 0; d < D; ++d) {
        const QuantCode& c = wq.codes[u * D + d];
        if (c.kind == QuantCode::Kind::zero) {
          rep.ops.skipped++;
          continue;
        }
        rep.ops.executed++;
        acc = shift_mac(acc, x[d], c, emax, lname);
      }
      std::int64_t scaled = detail::rescale(acc, emax, lname);
      if (di + 1 < arch.dense_units.size() && scaled < 0) scaled = 0;  // hidden ReLU
      y[u] = scaled;
    }
    x = std::move(y);
    D = U;
    res.layers.push_back(std::move(rep));
  }

  // de-scale the logits and close with a real softmax
  Tensor<float> logits({x.size()});
  const double inv = std::ldexp(1.0, -static_cast<int>(frac_bits));
  for (std::size_t i = 0; i < x.size(); ++i) logits[i] = static_cast<float>(x[i] * inv);
  res.probs = softmax(logits);

  for (const auto& l : res.layers) {
    res.total.executed += l.ops.executed;
    res.total.skipped += l.ops.skipped;
  }
  return res;
}

inline nlohmann::ordered_json op_report_json(const ShiftInferResult& r) {
  nlohmann::ordered_json j;
  j["macs_executed"] = r.total.executed;
  j["macs_skipped_zero_weight"] = r.total.skipped;
  j["per_layer"] = nlohmann::ordered_json::array();
  for (const auto& l : r.layers) {
    nlohmann::ordered_json lj;
    lj["layer"] = l.name;
    lj["macs_executed"] = l.ops.executed;
    lj["macs_skipped_zero_weight"] = l.ops.skipped;
    j["per_layer"].push_back(lj);
  }
  return j;
}

}  // namespace sqnz
