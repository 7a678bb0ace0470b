#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sqnz/errors.hpp"
#include "sqnz/prng.hpp"

namespace sqnz {

// Four-class rhythm label set: normal, atrial fibrillation, other, noisy.
enum class Label : std::uint8_t { N = 0, A = 1, O = 2, Noisy = 3 };
inline constexpr std::size_t kNumClasses = 4;

inline char label_char(Label l) {
  switch (l) {
    case Label::N: return 'N';
    case Label::A: return 'A';
    case Label::O: return 'O';
    case Label::Noisy: return '~';
  }
  return '?';
}

inline Label label_from_char(char c) {
  switch (c) {
    case 'N': return Label::N;
    case 'A': return Label::A;
    case 'O': return Label::O;
    case '~': return Label::Noisy;
    default:
      throw validation_error(std::string("unknown label '") + c + "'");
  }
}

struct LabeledSignal {
  std::string record_id;
  std::vector<std::int16_t> samples;  // raw ADC units
  Label label = Label::N;
};

struct Dataset {
  enum class Source { real, synthetic };
  std::vector<LabeledSignal> records;
  Source source = Source::real;
};

// Parses `id,label_char` lines; order preserved.
inline std::vector<std::pair<std::string, Label>> load_reference_labels(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open label file: " + path.string());
  std::vector<std::pair<std::string, Label>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos || comma == 0 || comma + 1 >= line.size())
      throw parse_error("malformed label line " + std::to_string(lineno) + ": '" + line + "'");
    std::string id = line.substr(0, comma);
    std::string rest = line.substr(comma + 1);
    if (rest.size() != 1)
      throw validation_error("unknown label '" + rest + "' at line " + std::to_string(lineno));
    Label lab;
    try {
      lab = label_from_char(rest[0]);
    } catch (const validation_error&) {
      throw validation_error(std::string("unknown label '") + rest[0] + "' at line " +
                             std::to_string(lineno));
    }
    out.emplace_back(std::move(id), lab);
  }
  return out;
}

enum class SignalFormat { csv_int, raw_i16le };

namespace detail {

inline std::vector<std::int16_t> parse_csv_int(std::istream& in, const std::string& origin) {
  std::vector<std::int16_t> samples;
  std::string token;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::stringstream ls(line);
    while (std::getline(ls, token, ',')) {
      // trim surrounding whitespace
      auto b = token.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      auto e = token.find_last_not_of(" \t\r");
      std::string t = token.substr(b, e - b + 1);
      std::size_t pos = 0;
      long v = 0;
      try {
        v = std::stol(t, &pos);
      } catch (const std::exception&) {
        throw parse_error("non-integer token '" + t + "' at line " + std::to_string(lineno) +
                          " in " + origin);
      }
      if (pos != t.size())
        throw parse_error("non-integer token '" + t + "' at line " + std::to_string(lineno) +
                          " in " + origin);
      samples.push_back(static_cast<std::int16_t>(v));
    }
  }
  return samples;
}

}  // namespace detail

inline std::vector<std::int16_t> load_signal(const std::filesystem::path& path,
                                             SignalFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open signal file: " + path.string());
  if (format == SignalFormat::csv_int) return detail::parse_csv_int(in, path.string());

  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % 2 != 0)
    throw format_error("truncated sample in " + path.string());
  std::vector<std::int16_t> samples(bytes.size() / 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto lo = static_cast<std::uint8_t>(bytes[2 * i]);
    const auto hi = static_cast<std::uint8_t>(bytes[2 * i + 1]);
    samples[i] = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo) |
                                           (static_cast<std::uint16_t>(hi) << 8));
  }
  return samples;
}

inline void write_signal_raw_i16le(const std::filesystem::path& path,
                                   const std::vector<std::int16_t>& samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw parse_error("cannot open for writing: " + path.string());
  for (std::int16_t s : samples) {
    const auto u = static_cast<std::uint16_t>(s);
    char b[2] = {static_cast<char>(u & 0xFF), static_cast<char>(u >> 8)};
    out.write(b, 2);
  }
}

inline void write_reference_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw parse_error("cannot open for writing: " + path.string());
  for (const auto& r : ds.records) out << r.record_id << ',' << label_char(r.label) << '\n';
}

// Loads `REFERENCE.csv` plus one `<id>.i16` or `<id>.csv` per record, in label-file order.
inline Dataset load_dataset(const std::filesystem::path& dir) {
  auto labels = load_reference_labels(dir / "REFERENCE.csv");
  Dataset ds;
  ds.source = Dataset::Source::real;
  ds.records.reserve(labels.size());
  for (auto& [id, lab] : labels) {
    LabeledSignal rec;
    rec.record_id = id;
    rec.label = lab;
    auto raw = dir / (id + ".i16");
    auto csv = dir / (id + ".csv");
    if (std::filesystem::exists(raw)) {
      rec.samples = load_signal(raw, SignalFormat::raw_i16le);
    } else if (std::filesystem::exists(csv)) {
      rec.samples = load_signal(csv, SignalFormat::csv_int);
    } else {
      throw parse_error("no signal file for record " + id + " in " + dir.string());
    }
    if (rec.samples.empty()) throw validation_error("record " + id + " has no samples");
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

namespace detail {

inline std::int16_t clamp_i16(double v) {
  if (v > 32767.0) return 32767;
  if (v < -32768.0) return -32768;
  return static_cast<std::int16_t>(std::lround(v));
}

// Triangular deflection centred at `center`; `half` samples to each side.
inline void add_bump(std::vector<double>& sig, long center, long half, double amp) {
  const long n = static_cast<long>(sig.size());
  for (long t = center - half; t <= center + half; ++t) {
    if (t < 0 || t >= n) continue;
    const double w = 1.0 - static_cast<double>(std::abs(t - center)) / (half + 1);
    sig[static_cast<std::size_t>(t)] += amp * w;
  }
}

inline std::vector<std::int16_t> synth_record(Label cls, std::size_t length, SplitMix64& rng) {
  std::vector<double> sig(length, 0.0);

  const double noise_std = (cls == Label::Noisy) ? 260.0 : 25.0;
  for (auto& v : sig) v += noise_std * rng.next_gaussian();

  if (cls != Label::Noisy) {
    // Spike train; classes differ in interval statistics and in whether the
    // smaller trailing deflection is present.
    const bool with_secondary = (cls != Label::A);
    long pos = rng.next_int(5, 50);
    bool long_gap = false;
    while (pos < static_cast<long>(length)) {
      const double amp = 950.0 + static_cast<double>(rng.next_int(-60, 60));
      add_bump(sig, pos, 3, amp);
      if (with_secondary) add_bump(sig, pos + 13, 2, 0.38 * amp);

      long gap = 0;
      switch (cls) {
        case Label::N:
          gap = 55 + rng.next_int(-2, 2);
          break;
        case Label::A:
          gap = rng.next_int(25, 95);
          break;
        case Label::O:
          gap = (long_gap ? 76 + rng.next_int(-2, 2) : 38 + rng.next_int(-1, 1));
          long_gap = !long_gap;
          break;
        case Label::Noisy:
          break;
      }
      pos += gap;
    }
  }

  std::vector<std::int16_t> out(length);
  for (std::size_t i = 0; i < length; ++i) out[i] = clamp_i16(sig[i]);
  return out;
}

}  // namespace detail

// Deterministic four-class generator; a desk-scale stand-in corpus. Record ids
// are R00001, R00002, ... in generation order (class-major).
inline Dataset generate_synthetic_dataset(std::size_t n_per_class, std::size_t len_min,
                                          std::size_t len_max, std::uint64_t seed) {
  if (n_per_class < 1) throw validation_error("n_per_class must be >= 1");
  if (len_min < 1 || len_min > len_max) throw validation_error("bad length range");
  SplitMix64 rng(derive_seed(seed, "synth"));
  Dataset ds;
  ds.source = Dataset::Source::synthetic;
  const Label classes[4] = {Label::N, Label::A, Label::O, Label::Noisy};
  std::size_t serial = 0;
  for (Label cls : classes) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      const std::size_t len =
          len_min + static_cast<std::size_t>(rng.next_below(len_max - len_min + 1));
      LabeledSignal rec;
      char buf[16];
      std::snprintf(buf, sizeof buf, "R%05zu", ++serial);
      rec.record_id = buf;
      rec.label = cls;
      rec.samples = detail::synth_record(cls, len, rng);
      ds.records.push_back(std::move(rec));
    }
  }
  return ds;
}

}  // namespace sqnz
