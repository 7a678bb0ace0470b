#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "sqnz/errors.hpp"
#include "sqnz/prng.hpp"
#include "sqnz/signal.hpp"

namespace sqnz {

// Per-record zero-mean / unit-variance (population) scaling. A constant input
// maps to all zeros.
template <typename T, typename In>
std::vector<T> standardize(const std::vector<In>& samples) {
  if (samples.empty()) throw validation_error("standardize: empty input");
  double mean = 0.0;
  for (In v : samples) mean += static_cast<double>(v);
  mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (In v : samples) {
    const double d = static_cast<double>(v) - mean;
    var += d * d;
  }
  var /= static_cast<double>(samples.size());
  std::vector<T> out(samples.size());
  if (var == 0.0) return out;
  const double inv = 1.0 / std::sqrt(var);
  for (std::size_t i = 0; i < samples.size(); ++i)
    out[i] = static_cast<T>((static_cast<double>(samples[i]) - mean) * inv);
  return out;
}

template <typename T>
struct FixedInput {
  std::vector<T> values;
  bool was_padded = false;
  bool was_trimmed = false;
};

// Zero-pad the tail or keep the first L samples.
template <typename T>
FixedInput<T> fit_length(std::vector<T> values, std::size_t L) {
  if (L < 1) throw validation_error("fit_length: L must be >= 1");
  FixedInput<T> out;
  if (values.size() < L) {
    out.was_padded = true;
    values.resize(L, T{0});
  } else if (values.size() > L) {
    out.was_trimmed = true;
    values.resize(L);
  }
  out.values = std::move(values);
  return out;
}

struct PaddingReportRow {
  Label cls;
  std::size_t padded_count = 0;
  std::size_t total_count = 0;
  double padded_share_pct = 0.0;  // of padded subtotal
  double total_share_pct = 0.0;   // of grand total
};

struct PaddingReport {
  std::array<PaddingReportRow, kNumClasses> rows;  // column order A, N, O, ~
  std::size_t padded_total = 0;
  std::size_t grand_total = 0;
  double padded_total_share_pct = 0.0;  // padded subtotal vs grand total
};

inline PaddingReport padding_report(const Dataset& ds, std::size_t L) {
  if (ds.records.empty()) throw validation_error("padding_report: empty dataset");
  PaddingReport rep;
  const Label order[kNumClasses] = {Label::A, Label::N, Label::O, Label::Noisy};
  for (std::size_t i = 0; i < kNumClasses; ++i) rep.rows[i].cls = order[i];
  auto row_of = [&](Label l) -> PaddingReportRow& {
    for (auto& r : rep.rows)
      if (r.cls == l) return r;
    return rep.rows[0];
  };
  for (const auto& r : ds.records) {
    auto& row = row_of(r.label);
    row.total_count++;
    if (r.samples.size() < L) row.padded_count++;
  }
  for (const auto& r : rep.rows) {
    rep.padded_total += r.padded_count;
    rep.grand_total += r.total_count;
  }
  for (auto& r : rep.rows) {
    r.padded_share_pct =
        rep.padded_total ? 100.0 * static_cast<double>(r.padded_count) / rep.padded_total : 0.0;
    r.total_share_pct = 100.0 * static_cast<double>(r.total_count) / rep.grand_total;
  }
  rep.padded_total_share_pct = 100.0 * static_cast<double>(rep.padded_total) / rep.grand_total;
  return rep;
}

// Four rows: padded counts, totals, padded shares, total shares.
inline std::string padding_report_csv(const PaddingReport& rep) {
  std::string s = "row,A,N,O,~,total\n";
  char buf[64];
  s += "padded_count";
  for (const auto& r : rep.rows) s += "," + std::to_string(r.padded_count);
  s += "," + std::to_string(rep.padded_total) + "\n";
  s += "total_count";
  for (const auto& r : rep.rows) s += "," + std::to_string(r.total_count);
  s += "," + std::to_string(rep.grand_total) + "\n";
  s += "padded_share_pct";
  for (const auto& r : rep.rows) {
    std::snprintf(buf, sizeof buf, ",%.2f", r.padded_share_pct);
    s += buf;
  }
  std::snprintf(buf, sizeof buf, ",%.2f\n", rep.padded_total_share_pct);
  s += buf;
  s += "total_share_pct";
  for (const auto& r : rep.rows) {
    std::snprintf(buf, sizeof buf, ",%.2f", r.total_share_pct);
    s += buf;
  }
  s += ",100.00\n";
  return s;
}

struct SplitSpec {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
  std::uint64_t seed = 0;

  void validate() const {
    if (train <= 0 || val <= 0 || test <= 0)
      throw validation_error("split fractions must be positive");
    if (std::abs(train + val + test - 1.0) > 1e-9)
      throw validation_error("split fractions must sum to 1");
  }
};

// Largest-remainder apportionment of `count` items across `fracs`; ties go to
// the earlier bucket.
inline std::vector<std::size_t> largest_remainder_alloc(std::size_t count,
                                                        const std::vector<double>& fracs) {
  std::vector<std::size_t> alloc(fracs.size());
  std::vector<double> remainder(fracs.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < fracs.size(); ++i) {
    const double ideal = static_cast<double>(count) * fracs[i];
    alloc[i] = static_cast<std::size_t>(std::floor(ideal));
    remainder[i] = ideal - std::floor(ideal);
    assigned += alloc[i];
  }
  std::vector<std::size_t> order(fracs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < count; ++i, ++assigned) alloc[order[i % order.size()]]++;
  return alloc;
}

struct Split {
  std::vector<std::size_t> train, val, test;  // indices into the dataset
};

inline Split stratified_split(const Dataset& ds, const SplitSpec& spec) {
  spec.validate();
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < ds.records.size(); ++i)
    by_class[static_cast<std::size_t>(ds.records[i].label)].push_back(i);
  for (std::size_t c = 0; c < kNumClasses; ++c)
    if (by_class[c].size() < 3)
      throw stratification_error("class " + std::string(1, label_char(static_cast<Label>(c))) +
                                 " has fewer than 3 records");
  SplitMix64 rng(derive_seed(spec.seed, "split"));
  Split out;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto idx = by_class[c];
    shuffle(idx, rng);
    const auto alloc = largest_remainder_alloc(idx.size(), {spec.train, spec.val, spec.test});
    std::size_t p = 0;
    for (std::size_t i = 0; i < alloc[0]; ++i) out.train.push_back(idx[p++]);
    for (std::size_t i = 0; i < alloc[1]; ++i) out.val.push_back(idx[p++]);
    for (std::size_t i = 0; i < alloc[2]; ++i) out.test.push_back(idx[p++]);
  }
  return out;
}

struct Fold {
  std::vector<std::size_t> train, test;
};

// Stratified k folds over a label vector; every index lands in exactly one
// test fold.
inline std::vector<Fold> kfold_indices(const std::vector<std::size_t>& labels, std::size_t k,
                                       std::uint64_t seed) {
  if (k < 2) throw validation_error("kfold: k must be >= 2");
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (std::size_t c = 0; c < kNumClasses; ++c)
    if (by_class[c].size() < k)
      throw stratification_error("class " + std::string(1, label_char(static_cast<Label>(c))) +
                                 " has fewer than k records");
  SplitMix64 rng(derive_seed(seed, "kfold"));
  std::vector<Fold> folds(k);
  std::size_t offset = 0;  // rotates so per-class remainders spread over folds
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto idx = by_class[c];
    shuffle(idx, rng);
    for (std::size_t i = 0; i < idx.size(); ++i) folds[(i + offset) % k].test.push_back(idx[i]);
    offset = (offset + idx.size()) % k;
  }
  for (std::size_t f = 0; f < k; ++f)
    for (std::size_t g = 0; g < k; ++g)
      if (g != f)
        folds[f].train.insert(folds[f].train.end(), folds[g].test.begin(), folds[g].test.end());
  return folds;
}

inline std::vector<Fold> kfold_split(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> labels(ds.records.size());
  for (std::size_t i = 0; i < ds.records.size(); ++i)
    labels[i] = static_cast<std::size_t>(ds.records[i].label);
  return kfold_indices(labels, k, seed);
}

}  // namespace sqnz
