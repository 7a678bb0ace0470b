#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "sqnz/config.hpp"
#include "sqnz/errors.hpp"
#include "sqnz/model.hpp"
#include "sqnz/quantize.hpp"

namespace sqnz {

// Container layout (all multi-byte integers little-endian):
//   "SQNZ" | version u8 | meta_len u32 | meta JSON | tensor_count u16
//   per tensor: name_len u16 | name | rank u8 | dims u32 each
//               | scheme u8 | payload_len u32 | payload
// DENSE_F32 payload: 4 bytes per element, IEEE-754 float bit patterns.
// SPARSE_RLE4 payload: nibble stream of (run, code) groups. A run nibble of
// 0-14 counts zeros before the next code; 15 adds 15 zeros and is followed by
// another run nibble. A trailing zero run is emitted the same way, ending in
// its 0-14 remainder nibble with no code. Code nibble = sign bit (MSB, 1 =
// negative) | 3-bit exponent magnitude. First nibble of each byte is the low
// half; odd streams pad with one zero nibble.
enum class Scheme : std::uint8_t { dense_f32 = 0, sparse_rle4 = 1 };

inline constexpr char kPackMagic[4] = {'S', 'Q', 'N', 'Z'};
inline constexpr std::uint8_t kPackVersion = 1;

namespace detail {

struct ByteWriter {
  std::vector<std::uint8_t> bytes;

  void u8(std::uint8_t v) { bytes.push_back(v); }
  void u16(std::uint16_t v) {
    bytes.push_back(static_cast<std::uint8_t>(v & 0xFF));
    bytes.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes.insert(bytes.end(), b, b + n);
  }
};

struct ByteReader {
  const std::uint8_t* p;
  std::size_t size;
  std::size_t pos = 0;

  void need(std::size_t n, const char* what) const {
    if (pos + n > size) throw format_error(std::string("truncated ") + what);
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return p[pos++];
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = static_cast<std::uint16_t>(p[pos]) |
                      (static_cast<std::uint16_t>(p[pos + 1]) << 8);
    pos += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  const std::uint8_t* raw(std::size_t n, const char* what) {
    need(n, what);
    const std::uint8_t* r = p + pos;
    pos += n;
    return r;
  }
};

struct NibbleWriter {
  std::vector<std::uint8_t>& out;
  bool half = false;  // true when the low nibble of the last byte is filled

  void push(std::uint8_t nib) {
    if (!half) {
      out.push_back(nib & 0x0F);
      half = true;
    } else {
      out.back() |= static_cast<std::uint8_t>((nib & 0x0F) << 4);
      half = false;
    }
  }
};

struct NibbleReader {
  const std::uint8_t* p;
  std::size_t byte_count;
  std::size_t idx = 0;  // nibble index

  bool done() const { return idx >= 2 * byte_count; }
  std::uint8_t next(const char* what) {
    if (done()) throw format_error(std::string("truncated ") + what);
    const std::uint8_t b = p[idx / 2];
    const std::uint8_t nib = (idx % 2 == 0) ? (b & 0x0F) : (b >> 4);
    ++idx;
    return nib;
  }
};

inline std::uint8_t code_nibble(const QuantCode& c) {
  return static_cast<std::uint8_t>((c.negative ? 0x8 : 0x0) | (c.exponent & 0x7));
}

inline QuantCode nibble_code(std::uint8_t nib) {
  QuantCode c;
  c.kind = QuantCode::Kind::pow2;
  c.negative = (nib & 0x8) != 0;
  c.exponent = nib & 0x7;
  return c;
}

inline std::vector<std::uint8_t> encode_rle4(const std::vector<QuantCode>& codes,
                                             const std::string& tensor_name) {
  std::vector<std::uint8_t> payload;
  NibbleWriter w{payload};
  std::size_t zero_run = 0;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const QuantCode& c = codes[i];
    if (c.kind == QuantCode::Kind::zero) {
      ++zero_run;
      continue;
    }
    if (c.exponent > 7)
      throw encoding_error("value off the 3-bit grid in " + tensor_name + " at index " +
                           std::to_string(i));
    while (zero_run >= 15) {
      w.push(15);
      zero_run -= 15;
    }
    w.push(static_cast<std::uint8_t>(zero_run));
    zero_run = 0;
    w.push(code_nibble(c));
  }
  if (zero_run > 0) {
    while (zero_run >= 15) {
      w.push(15);
      zero_run -= 15;
    }
    w.push(static_cast<std::uint8_t>(zero_run));
  }
  return payload;  // NibbleWriter already leaves a zero pad nibble when odd
}

inline std::vector<QuantCode> decode_rle4(const std::uint8_t* payload, std::size_t payload_len,
                                          std::size_t element_count,
                                          const std::string& tensor_name) {
  std::vector<QuantCode> codes;
  codes.reserve(element_count);
  NibbleReader r{payload, payload_len};
  while (codes.size() < element_count) {
    const std::uint8_t run = r.next("tensor payload");
    if (run == 15) {
      if (codes.size() + 15 > element_count)
        throw format_error("zero run overflows tensor " + tensor_name);
      for (int i = 0; i < 15; ++i) codes.emplace_back();
      continue;
    }
    if (codes.size() + run > element_count)
      throw format_error("zero run overflows tensor " + tensor_name);
    for (std::uint8_t i = 0; i < run; ++i) codes.emplace_back();
    if (codes.size() >= element_count) break;
    codes.push_back(nibble_code(r.next("tensor payload")));
  }
  // leftover nibbles may only be the remainder of a closing escape chain plus
  // byte padding, which are all zero
  while (!r.done()) {
    if (r.next("tensor payload") != 0)
      throw format_error("trailing data in tensor " + tensor_name);
  }
  return codes;
}

}  // namespace detail

// Closed-form nibble count of the canonical RLE4 encoding.
inline std::uint64_t rle4_nibble_count(const std::vector<QuantCode>& codes) {
  std::uint64_t nibbles = 0;
  std::size_t zero_run = 0;
  for (const auto& c : codes) {
    if (c.kind == QuantCode::Kind::zero) {
      ++zero_run;
      continue;
    }
    nibbles += zero_run / 15 + 1 + 1;  // escapes + remainder + code
    zero_run = 0;
  }
  if (zero_run > 0) nibbles += zero_run / 15 + 1;
  return nibbles;
}

inline std::uint64_t rle4_payload_bytes(const std::vector<QuantCode>& codes) {
  return (rle4_nibble_count(codes) + 1) / 2;
}

// Serialises the model. SPARSE_RLE4 requires codes whose real values match the
// model values exactly (the 3-bit grid); DENSE_F32 ignores `codes`.
inline std::vector<std::uint8_t> pack(const Model<float>& model,
                                      const std::vector<QuantizedTensor>* codes, Scheme scheme,
                                      const QuantConfig* quant = nullptr) {
  detail::ByteWriter w;
  w.raw(kPackMagic, 4);
  w.u8(kPackVersion);
  json meta;
  meta["arch"] = arch_to_json(model.arch);
  if (quant) meta["quant_bits"] = quant->bits;
  const std::string meta_str = meta.dump();
  w.u32(static_cast<std::uint32_t>(meta_str.size()));
  w.raw(meta_str.data(), meta_str.size());

  const auto params = model.params();
  if (scheme == Scheme::sparse_rle4 && (!codes || codes->size() != params.size()))
    throw encoding_error("sparse packing requires codes for every tensor");
  w.u16(static_cast<std::uint16_t>(params.size()));

  for (std::size_t ti = 0; ti < params.size(); ++ti) {
    const auto& p = params[ti];
    w.u16(static_cast<std::uint16_t>(p.name.size()));
    w.raw(p.name.data(), p.name.size());
    w.u8(static_cast<std::uint8_t>(p.value->shape.size()));
    for (std::size_t d : p.value->shape) w.u32(static_cast<std::uint32_t>(d));
    w.u8(static_cast<std::uint8_t>(scheme));

    std::vector<std::uint8_t> payload;
    if (scheme == Scheme::dense_f32) {
      payload.resize(4 * p.value->size());
      for (std::size_t i = 0; i < p.value->size(); ++i) {
        const float f = (*p.value)[i];
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        for (int b = 0; b < 4; ++b)
          payload[4 * i + b] = static_cast<std::uint8_t>((bits >> (8 * b)) & 0xFF);
      }
    } else {
      const auto& qt = (*codes)[ti];
      if (qt.codes.size() != p.value->size())
        throw encoding_error("code count mismatch for tensor " + p.name);
      for (std::size_t i = 0; i < qt.codes.size(); ++i)
        if (qt.codes[i].value<float>() != (*p.value)[i])
          throw encoding_error("value off the 3-bit grid in " + p.name + " at index " +
                               std::to_string(i));
      payload = detail::encode_rle4(qt.codes, p.name);
    }
    w.u32(static_cast<std::uint32_t>(payload.size()));
    w.raw(payload.data(), payload.size());
  }
  return w.bytes;
}

struct Unpacked {
  ArchConfig arch;
  std::optional<QuantConfig> quant;
  Model<float> model;
  std::vector<QuantizedTensor> codes;  // empty for dense packs
  Scheme scheme = Scheme::dense_f32;
};

inline Unpacked unpack(const std::vector<std::uint8_t>& bytes) {
  detail::ByteReader r{bytes.data(), bytes.size()};
  const std::uint8_t* magic = r.raw(4, "header");
  if (std::memcmp(magic, kPackMagic, 4) != 0) throw format_error("bad magic");
  const std::uint8_t version = r.u8("header");
  if (version != kPackVersion)
    throw format_error("unsupported version " + std::to_string(version));
  const std::uint32_t meta_len = r.u32("header");
  const std::uint8_t* meta_p = r.raw(meta_len, "metadata");
  json meta;
  try {
    meta = json::parse(meta_p, meta_p + meta_len);
  } catch (const std::exception& e) {
    throw format_error(std::string("bad metadata JSON: ") + e.what());
  }

  Unpacked out;
  out.arch = arch_from_json(meta.at("arch"));
  if (meta.contains("quant_bits")) {
    QuantConfig q;
    q.bits = meta.at("quant_bits").get<unsigned>();
    q.validate();
    out.quant = q;
  }
  out.model = build_model<float>(out.arch, 0);

  const std::uint16_t tensor_count = r.u16("header");
  auto params = out.model.params();
  if (tensor_count != params.size())
    throw format_error("tensor count " + std::to_string(tensor_count) +
                       " does not match architecture");

  for (std::size_t ti = 0; ti < params.size(); ++ti) {
    auto& p = params[ti];
    const std::uint16_t name_len = r.u16("tensor name");
    const std::uint8_t* name_p = r.raw(name_len, "tensor name");
    const std::string name(reinterpret_cast<const char*>(name_p), name_len);
    if (name != p.name) throw format_error("unexpected tensor '" + name + "'");
    const std::uint8_t rank = r.u8("tensor shape");
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = r.u32("tensor shape");
    if (shape != p.value->shape) throw format_error("shape mismatch for tensor " + name);
    const std::uint8_t scheme_b = r.u8("tensor scheme");
    if (scheme_b > 1) throw format_error("unknown scheme in tensor " + name);
    const Scheme scheme = static_cast<Scheme>(scheme_b);
    out.scheme = scheme;
    const std::uint32_t payload_len = r.u32("tensor payload");
    const std::uint8_t* payload = r.raw(payload_len, "tensor payload");

    if (scheme == Scheme::dense_f32) {
      if (payload_len != 4 * p.value->size())
        throw format_error("payload length mismatch for tensor " + name);
      for (std::size_t i = 0; i < p.value->size(); ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b)
          bits |= static_cast<std::uint32_t>(payload[4 * i + b]) << (8 * b);
        float f;
        std::memcpy(&f, &bits, 4);
        (*p.value)[i] = f;
      }
    } else {
      QuantizedTensor qt;
      qt.name = name;
      qt.shape = shape;
      qt.codes = detail::decode_rle4(payload, payload_len, p.value->size(), name);
      for (std::size_t i = 0; i < qt.codes.size(); ++i)
        (*p.value)[i] = qt.codes[i].value<float>();
      out.codes.push_back(std::move(qt));
    }
  }
  if (r.pos != bytes.size()) throw format_error("trailing bytes after last tensor");
  return out;
}

struct PackSizeReport {
  std::uint64_t dense_f32_bytes = 0;
  std::uint64_t packed_bytes = 0;
  std::uint64_t value_only_bytes = 0;  // 4 bits per surviving weight, indices ignored
  double ratio_packed = 0;
  double ratio_value_only = 0;
};

template <typename T>
PackSizeReport size_report(const Model<T>& model, std::uint64_t packed_bytes) {
  PackSizeReport r;
  std::uint64_t total = 0, nnz = 0;
  for (const auto& p : model.params()) {
    total += p.value->size();
    nnz += p.value->size() - count_zeros(*p.value);
  }
  r.dense_f32_bytes = 4 * total;
  r.packed_bytes = packed_bytes;
  r.value_only_bytes = (4 * nnz + 7) / 8;
  r.ratio_packed =
      packed_bytes ? static_cast<double>(r.dense_f32_bytes) / static_cast<double>(packed_bytes) : 0;
  r.ratio_value_only = r.value_only_bytes ? static_cast<double>(r.dense_f32_bytes) /
                                                static_cast<double>(r.value_only_bytes)
                                          : 0;
  return r;
}

inline json size_report_json(const PackSizeReport& r) {
  json j;
  j["dense_f32_bytes"] = r.dense_f32_bytes;
  j["packed_bytes"] = r.packed_bytes;
  j["value_only_bytes"] = r.value_only_bytes;
  j["ratio_packed"] = r.ratio_packed;
  j["ratio_value_only"] = r.ratio_value_only;
  return j;
}

inline void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw parse_error("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open: " + path.string());
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

}  // namespace sqnz
