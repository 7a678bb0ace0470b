// Acceptance suite: one test per criterion, one PASS/FAIL line each on exit.

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <set>

#include "gradcheck_util.hpp"
#include "sqnz/pipeline.hpp"

using namespace sqnz;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------- desk-scale pipeline shared by criteria 4 and 6 ----------

struct DeskPipeline {
  ArchConfig arch;
  std::vector<Tensor<float>> inputs;
  std::vector<std::size_t> labels;
  Split split;
  Model<float> baseline;
  double baseline_acc = 0;
  Model<float> pruned;
  std::vector<PruneStepReport> prune_report;
  double q3_acc = 0;
  double q2_acc = 0;
  Model<float> q3_model;
  double elapsed_seconds = 0;
};

DeskPipeline run_desk_pipeline() {
  const auto t0 = std::chrono::steady_clock::now();
  DeskPipeline p;
  const RunConfig cfg = RunConfig::desk_default();
  p.arch = cfg.arch;

  const Dataset ds = generate_synthetic_dataset(150, 450, 750, 42);
  auto [inputs, labels] = dataset_to_inputs<float>(ds, p.arch.input_length);
  p.inputs = std::move(inputs);
  p.labels = std::move(labels);
  SplitSpec spec = cfg.split;
  spec.seed = 42;
  p.split = stratified_split(ds, spec);

  const auto train_x = select(p.inputs, p.split.train);
  const auto train_y = select(p.labels, p.split.train);
  const auto val_x = select(p.inputs, p.split.val);
  const auto val_y = select(p.labels, p.split.val);
  const auto test_x = select(p.inputs, p.split.test);
  const auto test_y = select(p.labels, p.split.test);

  auto base = train(build_model<float>(p.arch, 42), train_x, train_y, val_x, val_y, cfg.hp, 42);
  p.baseline = base.model;
  p.baseline_acc = evaluate_loss_accuracy(p.baseline, test_x, test_y).accuracy;

  PruneSchedule schedule = cfg.prune;
  auto pruned = iterative_prune(p.baseline, schedule, train_x, train_y, val_x, val_y, 42);
  p.pruned = std::move(pruned.model);
  p.prune_report = std::move(pruned.report);

  Hyperparams qhp = cfg.hp;
  qhp.learning_rate = 0.02;
  qhp.max_epochs = 20;
  qhp.patience = 20;
  QuantConfig q3;
  q3.bits = 3;
  auto r3 = qat_train(p.pruned, q3, train_x, train_y, val_x, val_y, qhp, 42);
  p.q3_model = r3.model;
  p.q3_acc = evaluate_loss_accuracy(r3.model, test_x, test_y).accuracy;

  QuantConfig q2;
  q2.bits = 2;
  auto r2 = qat_train(p.pruned, q2, train_x, train_y, val_x, val_y, qhp, 42);
  p.q2_acc = evaluate_loss_accuracy(r2.model, test_x, test_y).accuracy;

  p.elapsed_seconds = seconds_since(t0);
  return p;
}

const DeskPipeline& desk() {
  static DeskPipeline p = run_desk_pipeline();
  return p;
}

// ---------- helpers ----------

template <typename T>
std::vector<Tensor<T>> gaussian_batch(std::size_t n, std::size_t L, SplitMix64& rng) {
  std::vector<Tensor<T>> out;
  for (std::size_t i = 0; i < n; ++i) {
    Tensor<T> t({1, L});
    for (auto& v : t.data) v = static_cast<T>(rng.next_gaussian());
    out.push_back(std::move(t));
  }
  return out;
}


QuantCode oracle_quantize(double w, const QuantConfig& cfg) {
  QuantCode out;
  if (w == 0) return out;
  const double e = -std::log2(std::fabs(w));
  if (e > static_cast<double>(cfg.emax()) + 0.5) return out;
  // no representable nonzero double sits past e = 1074, so larger exponents
  // can never be nearest; capping keeps the b=16 scan inside the time budget
  const std::uint64_t scan_max = std::min<std::uint64_t>(cfg.emax(), 1100);
  std::uint32_t best_E = 0;
  double best_d = std::fabs(e);
  for (std::uint64_t E = 1; E <= scan_max; ++E) {
    const double d = std::fabs(e - static_cast<double>(E));
    if (d < best_d || (d == best_d && e >= 0)) {
      best_d = d;
      best_E = static_cast<std::uint32_t>(E);
    }
  }
  out.kind = QuantCode::Kind::pow2;
  out.negative = (w < 0);
  out.exponent = best_E;
  return out;
}

}  // namespace

TEST(Acceptance, C1_GradientCorrectness) {
  const auto t0 = std::chrono::steady_clock::now();
  SplitMix64 seeds(2024);
  double worst = 0;
  int checked = 0;
  for (int model_i = 0; model_i < 20; ++model_i) {
    ArchConfig a;
    a.input_length = 20;
    const bool pool = (model_i % 2 == 0);
    const std::size_t K = (model_i % 3 == 0) ? 5 : 3;
    a.conv = {{2, K, pool, 2}, {2, 3, false, 2}};
    a.dense_units = {6, 4};
    a.conv_padding = (model_i % 4 < 2) ? Padding::same_zero : Padding::valid;
    // draw until the instance clears the finite-difference safety margin
    // (no activation near a ReLU/pool boundary); the check then covers every
    // parameter of the accepted model
    for (int attempt = 0; attempt < 3000; ++attempt) {
      auto m = build_model<double>(a, seeds.next());
      SplitMix64 rng(seeds.next());
      const auto xs = gaussian_batch<double>(1, a.input_length, rng);
      std::vector<std::size_t> ys{rng.next_below(4)};
      if (!testutil::fd_safe_instance(m, xs)) continue;
      worst = std::max(worst, testutil::grad_check_worst(m, xs, ys));
      ++checked;
      break;
    }
  }
  EXPECT_EQ(checked, 20);
  EXPECT_LT(worst, 1e-4);
  EXPECT_LT(seconds_since(t0), 60.0);
}

TEST(Acceptance, C2_QuantizerProperties) {
  const auto t0 = std::chrono::steady_clock::now();
  SplitMix64 rng(77);
  for (unsigned b : {2u, 3u, 4u, 8u, 16u}) {
    QuantConfig cfg;
    cfg.bits = b;
    const double emax = static_cast<double>(cfg.emax());
    for (int i = 0; i < 100000; ++i) {
      // log-uniform magnitudes spanning the grid and both overflow directions
      const double u = -(emax + 3.0) * rng.next_unit() + 2.0;
      const double w = (rng.next() & 1 ? -1.0 : 1.0) * std::pow(2.0, u);
      const auto code = log_quantize_value(w, cfg);

      if (code.kind == QuantCode::Kind::zero) {
        // clip rule: e must be past emax + 0.5
        EXPECT_GT(-std::log2(std::fabs(w)), emax + 0.5 - 1e-9);
      } else {
        EXPECT_LE(code.exponent, cfg.emax());  // grid membership
        const auto oracle = oracle_quantize(w, cfg);
        ASSERT_EQ(oracle.kind, QuantCode::Kind::pow2);
        ASSERT_EQ(code.exponent, oracle.exponent) << "w=" << w << " b=" << b;
        ASSERT_EQ(code.negative, oracle.negative);
      }

      // idempotence on the already-quantised value
      const double qv = code.value<double>();
      const auto code2 = log_quantize_value(qv, cfg);
      ASSERT_TRUE(code == code2);

      // order preservation against a second draw
      const double w2 = (rng.next() & 1 ? -1.0 : 1.0) *
                        std::pow(2.0, -(emax + 3.0) * rng.next_unit() + 2.0);
      const double lo = std::min(std::fabs(w), std::fabs(w2));
      const double hi = std::max(std::fabs(w), std::fabs(w2));
      const double qlo = std::fabs(log_quantize_value(lo, cfg).value<double>());
      const double qhi = std::fabs(log_quantize_value(hi, cfg).value<double>());
      ASSERT_LE(qlo, qhi);
    }
  }
  EXPECT_LT(seconds_since(t0), 60.0);
}

TEST(Acceptance, C3_ShiftArithmeticExactness) {
  // part 1: 1000 random dot products, exact against a 128-bit oracle
  SplitMix64 rng(31);
  const unsigned emax = 7;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.next_below(256);
    std::int64_t acc = 0;
    __int128 oracle = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::int64_t x = rng.next_int(-(1 << 14), 1 << 14);
      QuantCode c;
      if (rng.next_unit() < 0.4) {
        c.kind = QuantCode::Kind::zero;
      } else {
        c = {QuantCode::Kind::pow2, rng.next_unit() < 0.5,
             static_cast<std::uint32_t>(rng.next_below(emax + 1))};
        const __int128 term = static_cast<__int128>(x) << (emax - c.exponent);
        oracle += c.negative ? -term : term;
      }
      acc = shift_mac(acc, x, c, emax);
    }
    ASSERT_EQ(static_cast<__int128>(acc), oracle);
  }

  // part 2: end-to-end argmax agreement with the float-on-quantised-weights
  // oracle on 500 random inputs at frac_bits = 12
  ArchConfig a;
  a.input_length = 60;
  a.conv = {{4, 5, true, 5}};
  a.dense_units = {8, 4};
  std::size_t agree = 0;
  const int kTrials = 500;
  for (int batch = 0; batch < 5; ++batch) {
    auto m = build_model<float>(a, 100 + batch);
    SplitMix64 wrng(200 + batch);
    for (auto& p : m.params())
      for (auto& v : p.value->data) {
        if (wrng.next_unit() < 0.6) {
          v = 0.0f;
        } else {
          const int E = static_cast<int>(wrng.next_below(8));
          v = (wrng.next_unit() < 0.5 ? -1.0f : 1.0f) * static_cast<float>(std::ldexp(1.0, -E));
        }
      }
    QuantConfig q;
    q.bits = 3;
    Model<float> copy = m;
    const auto codes = quantize_model(copy, q);
    const auto packed = unpack(pack(copy, &codes, Scheme::sparse_rle4, &q));
    for (int i = 0; i < kTrials / 5; ++i) {
      Tensor<float> in({1, a.input_length});
      for (auto& v : in.data) v = static_cast<float>(rng.next_gaussian());
      const auto pf = model_forward(m, in);
      std::vector<float> sig(in.data.begin(), in.data.end());
      const auto r = quantized_forward(packed, sig, 12);
      std::size_t af = 0, aq = 0;
      for (std::size_t j = 1; j < 4; ++j) {
        if (pf[j] > pf[af]) af = j;
        if (r.probs[j] > r.probs[aq]) aq = j;
      }
      agree += (af == aq);
    }
  }
  EXPECT_GE(static_cast<double>(agree) / kTrials, 0.99);
}

TEST(Acceptance, C4_PruningExactness) {
  // part 1: zero-set equals the sort-oracle bottom-k on 50 random models
  SplitMix64 seeds(404);
  for (int trial = 0; trial < 50; ++trial) {
    ArchConfig a;
    a.input_length = 60;
    a.conv = {{4, 5, true, 5}, {4, 3, false, 5}};
    a.dense_units = {8, 4};
    auto m = build_model<float>(a, seeds.next());
    const double target = 0.2 + 0.75 * seeds.next_unit();

    struct E {
      double mag;
      std::size_t t, i;
    };
    std::vector<Tensor<float>*> tensors;
    for (auto& t : m.conv_w) tensors.push_back(&t);
    for (auto& t : m.dense_w) tensors.push_back(&t);
    std::vector<E> all;
    std::size_t total = 0;
    for (std::size_t t = 0; t < tensors.size(); ++t) {
      total += tensors[t]->size();
      for (std::size_t i = 0; i < tensors[t]->size(); ++i)
        all.push_back({std::fabs(static_cast<double>((*tensors[t])[i])), t, i});
    }
    std::sort(all.begin(), all.end(), [](const E& x, const E& y) {
      if (x.mag != y.mag) return x.mag < y.mag;
      if (x.t != y.t) return x.t < y.t;
      return x.i < y.i;
    });
    const auto k = static_cast<std::size_t>(std::ceil(target * static_cast<double>(total)));
    std::set<std::pair<std::size_t, std::size_t>> oracle;
    for (std::size_t i = 0; i < k; ++i) oracle.insert({all[i].t, all[i].i});

    magnitude_prune_step(m, target);
    std::set<std::pair<std::size_t, std::size_t>> got;
    for (std::size_t t = 0; t < tensors.size(); ++t)
      for (std::size_t i = 0; i < tensors[t]->size(); ++i)
        if ((*tensors[t])[i] == 0.0f) got.insert({t, i});
    ASSERT_EQ(got, oracle) << "trial " << trial;
  }

  // part 2: the desk pipeline achieves 0.90 +- 0.005 sparsity over weights and
  // biases, and exactly ceil(0.9 N)/N over the ranked weight tensors
  const auto& p = desk();
  EXPECT_NEAR(weight_sparsity(p.pruned), 0.90, 0.005);
  std::size_t wtotal = 0;
  for (const auto& pr : p.pruned.params())
    if (!pr.is_bias) wtotal += pr.value->size();
  const double exact = std::ceil(0.9 * static_cast<double>(wtotal)) / static_cast<double>(wtotal);
  EXPECT_DOUBLE_EQ(weight_tensor_sparsity(p.pruned), exact);

  // part 3: masks never regrow through fine-tuning (mask-zero set is a
  // superset chain across steps, values stay exactly zero)
  {
    ArchConfig a;
    a.input_length = 60;
    a.conv = {{4, 5, true, 5}};
    a.dense_units = {8, 4};
    SplitMix64 rng(9);
    std::vector<Tensor<float>> xs;
    std::vector<std::size_t> ys;
    for (std::size_t c = 0; c < 4; ++c)
      for (int i = 0; i < 6; ++i) {
        Tensor<float> x({1, 60});
        for (auto& v : x.data) v = static_cast<float>(0.1 * rng.next_gaussian());
        for (std::size_t k = 0; k < 5; ++k) x[60 / 8 + c * 15 + k] += 3.0f;
        xs.push_back(std::move(x));
        ys.push_back(c);
      }
    auto m = build_model<float>(a, 5);
    Hyperparams hp;
    hp.learning_rate = 0.05;
    hp.batch_size = 8;
    hp.max_epochs = 5;
    hp.patience = 5;
    std::set<std::pair<std::size_t, std::size_t>> prev_masked;
    for (double target : {0.5, 0.7, 0.8, 0.9}) {
      magnitude_prune_step(m, target);
      std::set<std::pair<std::size_t, std::size_t>> masked;
      std::vector<Tensor<std::uint8_t>*> masks;
      for (auto& t : m.conv_w_mask) masks.push_back(&t);
      for (auto& t : m.dense_w_mask) masks.push_back(&t);
      for (std::size_t t = 0; t < masks.size(); ++t)
        for (std::size_t i = 0; i < masks[t]->size(); ++i)
          if (!(*masks[t])[i]) masked.insert({t, i});
      for (const auto& e : prev_masked) ASSERT_TRUE(masked.count(e)) << "mask regrew";
      prev_masked = masked;

      auto ft = train(std::move(m), xs, ys, xs, ys, hp, 7);
      m = std::move(ft.model);
      std::vector<Tensor<float>*> tensors;
      for (auto& t : m.conv_w) tensors.push_back(&t);
      for (auto& t : m.dense_w) tensors.push_back(&t);
      for (const auto& e : prev_masked)
        ASSERT_EQ((*tensors[e.first])[e.second], 0.0f) << "masked weight moved";
    }
  }
}

TEST(Acceptance, C5_PackFormat) {
  SplitMix64 seeds(505);
  ArchConfig a;
  a.input_length = 60;
  a.conv = {{4, 5, true, 5}};
  a.dense_units = {8, 4};
  QuantConfig q;
  q.bits = 3;

  for (int trial = 0; trial < 100; ++trial) {
    auto m = build_model<float>(a, seeds.next());
    SplitMix64 rng(seeds.next());
    const double sparsity = (trial < 50) ? 0.9 : 0.5 + 0.45 * rng.next_unit();
    for (auto& p : m.params())
      for (auto& v : p.value->data) {
        if (rng.next_unit() < sparsity) {
          v = 0.0f;
        } else {
          const int E = static_cast<int>(rng.next_below(8));
          v = (rng.next_unit() < 0.5 ? -1.0f : 1.0f) * static_cast<float>(std::ldexp(1.0, -E));
        }
      }
    Model<float> copy = m;
    const auto codes = quantize_model(copy, q);
    const auto bytes = pack(copy, &codes, Scheme::sparse_rle4, &q);

    // round-trip identity
    const auto back = unpack(bytes);
    const auto pa = copy.params();
    const auto pb = back.model.params();
    for (std::size_t i = 0; i < pa.size(); ++i)
      ASSERT_EQ(pa[i].value->data, pb[i].value->data) << "trial " << trial;

    // packed_bytes equals the closed-form nibble arithmetic
    json meta;
    meta["arch"] = arch_to_json(copy.arch);
    meta["quant_bits"] = q.bits;
    std::uint64_t expect = 4 + 1 + 4 + meta.dump().size() + 2;
    for (std::size_t ti = 0; ti < codes.size(); ++ti) {
      const auto& pr = pa[ti];
      expect += 2 + pr.name.size() + 1 + 4 * pr.value->shape.size() + 1 + 4;
      expect += rle4_payload_bytes(codes[ti].codes);
    }
    ASSERT_EQ(bytes.size(), expect) << "trial " << trial;
  }

  // ratios on an exactly-90%-sparse population; a 30k-parameter model keeps
  // the byte-ceil rounding below half a point
  {
    auto m = build_model<float>(RunConfig::desk_default().arch, 9090);
    std::size_t total = 0;
    for (const auto& p : m.params()) total += p.value->size();
    const std::size_t keep = total - static_cast<std::size_t>(std::ceil(0.9 * total));
    std::size_t idx = 0, kept = 0;
    SplitMix64 rng(11);
    for (auto& p : m.params())
      for (auto& v : p.value->data) {
        if (kept < keep && idx % 10 == 0) {
          const int E = static_cast<int>(rng.next_below(8));
          v = (rng.next_unit() < 0.5 ? -1.0f : 1.0f) * static_cast<float>(std::ldexp(1.0, -E));
          ++kept;
        } else {
          v = 0.0f;
        }
        ++idx;
      }
    Model<float> copy = m;
    const auto codes = quantize_model(copy, q);
    const auto bytes = pack(copy, &codes, Scheme::sparse_rle4, &q);
    const auto rep = size_report(copy, bytes.size());
    // 4 bits per survivor: 32/(4*0.1) = 80, up to the ceil-to-bytes rounding
    EXPECT_NEAR(rep.ratio_value_only, 80.0, 0.5);
  }

  // i.i.d.-random 90%-sparse tensors at a size where framing amortises
  {
    ArchConfig big;
    big.input_length = 1200;
    big.conv = {{32, 7, true, 5}, {32, 7, true, 5}, {32, 7, false, 5}, {32, 7, false, 5}};
    big.dense_units = {64, 4};
    auto m = build_model<float>(big, 3131);
    SplitMix64 rng(3131);
    for (auto& p : m.params())
      for (auto& v : p.value->data) {
        if (rng.next_unit() < 0.9) {
          v = 0.0f;
        } else {
          const int E = static_cast<int>(rng.next_below(8));
          v = (rng.next_unit() < 0.5 ? -1.0f : 1.0f) * static_cast<float>(std::ldexp(1.0, -E));
        }
      }
    Model<float> copy = m;
    const auto codes = quantize_model(copy, q);
    const auto bytes = pack(copy, &codes, Scheme::sparse_rle4, &q);
    const auto rep = size_report(copy, bytes.size());
    EXPECT_GE(rep.ratio_packed, 30.0);
  }
}

TEST(Acceptance, C6_EndToEndDeskScale) {
  const auto& p = desk();
  EXPECT_GE(p.baseline_acc, 0.90) << "baseline test accuracy";
  EXPECT_GE(p.q3_acc, p.baseline_acc - 0.02) << "b=3 accuracy drop";
  EXPECT_LE(p.q2_acc, p.q3_acc + 1e-12) << "b=2 must not beat b=3";
  EXPECT_LT(p.elapsed_seconds, 900.0);
  // the quantised model really is 90 % sparse and on the grid
  EXPECT_GE(weight_sparsity(p.q3_model), 0.88);
}

TEST(Acceptance, C7_RealCorpusPaddingAudit) {
  const char* dir = std::getenv("SQNZ_CINC_DIR");
  if (!dir || !*dir)
    GTEST_SKIP() << "SQNZ_CINC_DIR not set; real-corpus audit skipped";
  const Dataset ds = load_dataset(dir);
  const auto rep = padding_report(ds, 18000);
  auto row = [&](Label l) -> const PaddingReportRow& {
    for (const auto& r : rep.rows)
      if (r.cls == l) return r;
    throw std::runtime_error("missing row");
  };
  EXPECT_EQ(row(Label::A).padded_count, 662u);
  EXPECT_EQ(row(Label::N).padded_count, 4665u);
  EXPECT_EQ(row(Label::O).padded_count, 2081u);
  EXPECT_EQ(row(Label::Noisy).padded_count, 272u);
  EXPECT_EQ(rep.padded_total, 7680u);
  EXPECT_NEAR(rep.padded_total_share_pct, 90.06, 0.005);
}

TEST(Acceptance, C8_MetricsOracle) {
  SplitMix64 rng(808);
  for (int trial = 0; trial < 20; ++trial) {
    ConfusionMatrix cm;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) cm.counts[i][j] = rng.next_below(40);
    if (cm.total() == 0) cm.counts[1][1] = 3;

    // independent formula oracle
    double total = 0, diag = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) total += static_cast<double>(cm.counts[i][j]);
    for (int i = 0; i < 4; ++i) diag += static_cast<double>(cm.counts[i][i]);
    double mp = 0, ms = 0, msp = 0, mf = 0;
    for (int c = 0; c < 4; ++c) {
      double tp = static_cast<double>(cm.counts[c][c]), row = 0, col = 0;
      for (int j = 0; j < 4; ++j) row += static_cast<double>(cm.counts[c][j]);
      for (int i = 0; i < 4; ++i) col += static_cast<double>(cm.counts[i][c]);
      const double fp = col - tp, fn = row - tp, tn = total - tp - fp - fn;
      const double prec = (tp + fp) > 0 ? tp / (tp + fp) : 0;
      const double sens = (tp + fn) > 0 ? tp / (tp + fn) : 0;
      const double spec = (tn + fp) > 0 ? tn / (tn + fp) : 0;
      const double f1 = (prec + sens) > 0 ? 2 * prec * sens / (prec + sens) : 0;
      mp += prec / 4;
      ms += sens / 4;
      msp += spec / 4;
      mf += f1 / 4;
    }

    const auto got = macro_metrics(cm);
    ASSERT_NEAR(got.accuracy, diag / total, 1e-12);
    ASSERT_NEAR(got.precision, mp, 1e-12);
    ASSERT_NEAR(got.sensitivity, ms, 1e-12);
    ASSERT_NEAR(got.specificity, msp, 1e-12);
    ASSERT_NEAR(got.f1, mf, 1e-12);
  }

  // conventions: perfect classifier and never-predicted class
  ConfusionMatrix perfect;
  for (int i = 0; i < 4; ++i) perfect.counts[i][i] = 9;
  const auto mm = macro_metrics(perfect);
  EXPECT_DOUBLE_EQ(mm.precision, 1.0);
  EXPECT_DOUBLE_EQ(mm.f1, 1.0);
  EXPECT_DOUBLE_EQ(cinc_overall_f1(perfect), 1.0);

  ConfusionMatrix all_n;
  for (int i = 0; i < 4; ++i) all_n.counts[i][0] = 5;
  EXPECT_NEAR(macro_metrics(all_n).precision, 0.25 / 4.0, 1e-12);
}

namespace {

class AcceptancePrinter : public ::testing::EmptyTestEventListener {
  void OnTestEnd(const ::testing::TestInfo& info) override {
    const char* verdict = info.result()->Skipped()
                              ? "SKIP"
                              : (info.result()->Passed() ? "PASS" : "FAIL");
    std::printf("ACCEPTANCE %s: %s\n", info.name(), verdict);
    std::fflush(stdout);
  }
};

}  // namespace

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  ::testing::UnitTest::GetInstance()->listeners().Append(new AcceptancePrinter);
  return RUN_ALL_TESTS();
}
