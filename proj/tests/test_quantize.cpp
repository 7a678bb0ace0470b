#include <gtest/gtest.h>

#include <cmath>

#include "sqnz/pipeline.hpp"
#include "sqnz/quantize.hpp"

using namespace sqnz;

namespace {

// brute force over the grid: nearest E in log distance, ties to the larger E;
// clip strictly past emax + 0.5
QuantCode grid_oracle(double w, const QuantConfig& cfg) {
  QuantCode out;
  if (w == 0) return out;
  const double e = -std::log2(std::fabs(w));
  if (e > cfg.emax() + cfg.clip_margin) return out;
  std::uint32_t best_E = 0;
  double best_d = std::fabs(e - 0.0);
  for (std::uint32_t E = 1; E <= cfg.emax(); ++E) {
    const double d = std::fabs(e - static_cast<double>(E));
    if (d < best_d || (d == best_d && e >= 0)) {
      best_d = d;
      best_E = E;
    }
  }
  out.kind = QuantCode::Kind::pow2;
  out.negative = (w < 0);
  out.exponent = best_E;
  return out;
}

ArchConfig small_arch(std::size_t L = 60) {
  ArchConfig a;
  a.input_length = L;
  a.conv = {{4, 5, true, 5}};
  a.dense_units = {8, 4};
  return a;
}

void separable_toy(std::size_t n_per_class, std::size_t L, std::uint64_t seed,
                   std::vector<Tensor<float>>& xs, std::vector<std::size_t>& ys) {
  SplitMix64 rng(seed);
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t i = 0; i < n_per_class; ++i) {
      Tensor<float> x({1, L});
      for (auto& v : x.data) v = static_cast<float>(0.1 * rng.next_gaussian());
      const std::size_t pos = L / 8 + c * (L / 4);
      for (std::size_t k = 0; k < 5 && pos + k < L; ++k) x[pos + k] += 3.0f;
      xs.push_back(std::move(x));
      ys.push_back(c);
    }
  }
}

}  // namespace

TEST(LogQuantize, ExactPowerOfTwo) {
  QuantConfig cfg;
  cfg.bits = 3;
  const auto c = log_quantize_value(0.25, cfg);
  EXPECT_EQ(c.kind, QuantCode::Kind::pow2);
  EXPECT_FALSE(c.negative);
  EXPECT_EQ(c.exponent, 2u);
  EXPECT_DOUBLE_EQ(c.value<double>(), 0.25);
}

TEST(LogQuantize, NearestLogGridPoint) {
  QuantConfig cfg;
  cfg.bits = 3;
  // e(0.3) = 1.737; grid candidates E=1 (0.5) and E=2 (0.25); E=2 is nearer
  const auto c = log_quantize_value(0.3, cfg);
  EXPECT_EQ(c.exponent, 2u);
  EXPECT_DOUBLE_EQ(c.value<double>(), 0.25);
  EXPECT_EQ(grid_oracle(0.3, cfg).exponent, 2u);
}

TEST(LogQuantize, ClipToZero) {
  QuantConfig cfg;
  cfg.bits = 3;
  // e(0.001) = 9.97 > 7.5
  EXPECT_EQ(log_quantize_value(0.001, cfg).kind, QuantCode::Kind::zero);
  // just inside the boundary rounds to the last grid point
  const auto inside = log_quantize_value(std::pow(2.0, -7.49), cfg);
  EXPECT_EQ(inside.kind, QuantCode::Kind::pow2);
  EXPECT_EQ(inside.exponent, 7u);
  // just past the boundary clips
  EXPECT_EQ(log_quantize_value(std::pow(2.0, -7.51), cfg).kind, QuantCode::Kind::zero);
}

TEST(LogQuantize, LargeMagnitudesClampToOne) {
  QuantConfig cfg;
  cfg.bits = 3;
  const auto c = log_quantize_value(1.5, cfg);
  EXPECT_EQ(c.exponent, 0u);
  EXPECT_DOUBLE_EQ(c.value<double>(), 1.0);
  const auto d = log_quantize_value(-100.0, cfg);
  EXPECT_TRUE(d.negative);
  EXPECT_DOUBLE_EQ(d.value<double>(), -1.0);
}

TEST(LogQuantize, ZeroStaysZero) {
  QuantConfig cfg;
  EXPECT_EQ(log_quantize_value(0.0, cfg).kind, QuantCode::Kind::zero);
}

TEST(LogQuantize, AgreesWithBruteForceOracle) {
  SplitMix64 rng(3);
  for (unsigned b : {2u, 3u, 4u, 8u}) {
    QuantConfig cfg;
    cfg.bits = b;
    for (int i = 0; i < 5000; ++i) {
      // log-uniform magnitudes straddling the grid and the clip region
      const double u = -(static_cast<double>(cfg.emax()) + 3.0) * rng.next_unit() + 2.0;
      const double w = (rng.next_unit() < 0.5 ? -1 : 1) * std::pow(2.0, u);
      const auto got = log_quantize_value(w, cfg);
      const auto want = grid_oracle(w, cfg);
      ASSERT_TRUE(got == want) << "w=" << w << " b=" << b;
    }
  }
}

TEST(LogQuantize, Idempotent) {
  SplitMix64 rng(4);
  QuantConfig cfg;
  cfg.bits = 3;
  for (int i = 0; i < 2000; ++i) {
    const double w = rng.next_gaussian();
    const auto once = log_quantize_value(w, cfg);
    const auto twice = log_quantize_value(once.value<double>(), cfg);
    EXPECT_TRUE(once == twice);
  }
}

TEST(LogQuantize, OrderPreservingOnMagnitudes) {
  SplitMix64 rng(5);
  QuantConfig cfg;
  cfg.bits = 3;
  for (int i = 0; i < 2000; ++i) {
    const double w1 = rng.next_gaussian() * 0.3;
    const double w2 = rng.next_gaussian() * 0.3;
    const double a = std::min(std::fabs(w1), std::fabs(w2));
    const double b = std::max(std::fabs(w1), std::fabs(w2));
    const double qa = std::fabs(log_quantize_value(a, cfg).value<double>());
    const double qb = std::fabs(log_quantize_value(b, cfg).value<double>());
    EXPECT_LE(qa, qb);
  }
}

TEST(QuantizeModel, IdempotentOnGridModel) {
  auto m = build_model<float>(small_arch(), 7);
  QuantConfig cfg;
  cfg.bits = 3;
  quantize_model(m, cfg);
  auto copy = m;
  quantize_model(copy, cfg);
  const auto pa = m.params();
  const auto pb = copy.params();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i].value->data, pb[i].value->data);
}

TEST(QuantizeModel, SparsityNeverDecreases) {
  auto m = build_model<float>(small_arch(), 8);
  // push some weights into the clip region
  for (std::size_t i = 0; i < m.dense_w[0].size(); i += 3) m.dense_w[0][i] *= 1e-4f;
  const double before = weight_sparsity(m);
  QuantConfig cfg;
  cfg.bits = 3;
  quantize_model(m, cfg);
  EXPECT_GE(weight_sparsity(m), before);
}

TEST(QuantizeModel, GridMembership) {
  auto m = build_model<float>(small_arch(), 9);
  QuantConfig cfg;
  cfg.bits = 2;
  quantize_model(m, cfg);
  for (const auto& p : m.params())
    for (float v : p.value->data) {
      if (v == 0.0f) continue;
      const float mag = std::fabs(v);
      bool on_grid = false;
      for (std::uint32_t E = 0; E <= cfg.emax(); ++E)
        on_grid |= (mag == static_cast<float>(std::ldexp(1.0, -static_cast<int>(E))));
      EXPECT_TRUE(on_grid) << v;
    }
}

TEST(QuantizeModel, MaskedZerosStayZero) {
  auto m = build_model<float>(small_arch(), 10);
  m.conv_w[0][0] = 0.0f;
  m.conv_w_mask[0][0] = 0;
  QuantConfig cfg;
  quantize_model(m, cfg);
  EXPECT_EQ(m.conv_w[0][0], 0.0f);
}

TEST(QatTrain, AllWeightsOnGrid) {
  const std::size_t L = 60;
  std::vector<Tensor<float>> xs;
  std::vector<std::size_t> ys;
  separable_toy(6, L, 61, xs, ys);
  Hyperparams hp;
  hp.learning_rate = 0.05;
  hp.batch_size = 8;
  hp.max_epochs = 6;
  hp.patience = 6;
  QuantConfig cfg;
  cfg.bits = 3;
  auto r = qat_train(build_model<float>(small_arch(L), 5), cfg, xs, ys, xs, ys, hp, 13);
  for (const auto& p : r.model.params())
    for (float v : p.value->data) {
      if (v == 0.0f) continue;
      const auto code = log_quantize_value(v, cfg);
      EXPECT_EQ(code.value<float>(), v);
    }
}

TEST(QatTrain, AccuracyNearFloatBaseline) {
  const std::size_t L = 60;
  std::vector<Tensor<float>> xs;
  std::vector<std::size_t> ys;
  separable_toy(8, L, 67, xs, ys);
  Hyperparams hp;
  hp.learning_rate = 0.1;
  hp.batch_size = 8;
  hp.max_epochs = 20;
  hp.patience = 20;
  auto base = train(build_model<float>(small_arch(L), 5), xs, ys, xs, ys, hp, 13);
  const double base_acc = evaluate_loss_accuracy(base.model, xs, ys).accuracy;

  QuantConfig cfg;
  cfg.bits = 3;
  hp.learning_rate = 0.05;
  auto q = qat_train(base.model, cfg, xs, ys, xs, ys, hp, 17);
  const double q_acc = evaluate_loss_accuracy(q.model, xs, ys).accuracy;
  EXPECT_GE(q_acc, base_acc - 0.02);
}

TEST(QatTrain, WideBitWidthsSaturate) {
  const std::size_t L = 60;
  std::vector<Tensor<float>> xs;
  std::vector<std::size_t> ys;
  separable_toy(5, L, 71, xs, ys);
  Hyperparams hp;
  hp.learning_rate = 0.05;
  hp.batch_size = 8;
  hp.max_epochs = 6;
  hp.patience = 6;
  QuantConfig c8, c16;
  c8.bits = 8;
  c16.bits = 16;
  auto r8 = qat_train(build_model<float>(small_arch(L), 5), c8, xs, ys, xs, ys, hp, 19);
  auto r16 = qat_train(build_model<float>(small_arch(L), 5), c16, xs, ys, xs, ys, hp, 19);
  const double a8 = evaluate_loss_accuracy(r8.model, xs, ys).accuracy;
  const double a16 = evaluate_loss_accuracy(r16.model, xs, ys).accuracy;
  EXPECT_NEAR(a8, a16, 0.01);
}

TEST(QatTrain, NarrowGridMembership) {
  const std::size_t L = 60;
  std::vector<Tensor<float>> xs;
  std::vector<std::size_t> ys;
  separable_toy(4, L, 73, xs, ys);
  Hyperparams hp;
  hp.learning_rate = 0.05;
  hp.batch_size = 8;
  hp.max_epochs = 4;
  hp.patience = 4;
  QuantConfig cfg;
  cfg.bits = 2;
  auto r = qat_train(build_model<float>(small_arch(L), 5), cfg, xs, ys, xs, ys, hp, 23);
  for (const auto& p : r.model.params())
    for (float v : p.value->data) {
      const float mag = std::fabs(v);
      EXPECT_TRUE(mag == 0.0f || mag == 1.0f || mag == 0.5f || mag == 0.25f || mag == 0.125f)
          << v;
    }
}

TEST(SweepCsv, Shape) {
  std::vector<SweepRow> rows{{2, 0.5, 0.3, 100}, {3, 0.9, 0.35, 120}};
  const auto csv = sweep_csv(rows);
  EXPECT_NE(csv.find("bits,accuracy,model_sparsity,packed_bytes"), std::string::npos);
  EXPECT_NE(csv.find("\n2,"), std::string::npos);
  EXPECT_NE(csv.find("\n3,"), std::string::npos);
}

TEST(SweepBitwidths, RowsPerBitAndSaneFields) {
  const std::size_t L = 60;
  std::vector<Tensor<float>> xs;
  std::vector<std::size_t> ys;
  separable_toy(5, L, 81, xs, ys);
  Hyperparams hp;
  hp.learning_rate = 0.05;
  hp.batch_size = 8;
  hp.max_epochs = 4;
  hp.patience = 4;
  const auto base = build_model<float>(small_arch(L), 5);
  const auto rows = sweep_bitwidths(base, {2u, 3u, 4u}, xs, ys, xs, ys, xs, ys, hp, 7);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].bits, 2u);
  EXPECT_EQ(rows[1].bits, 3u);
  EXPECT_EQ(rows[2].bits, 4u);
  for (const auto& r : rows) {
    EXPECT_GE(r.accuracy, 0.0);
    EXPECT_LE(r.accuracy, 1.0);
    EXPECT_GT(r.packed_bytes, 0u);
  }
  // b <= 3 packs sparse nibbles; b = 4 falls back to dense floats
  EXPECT_LT(rows[1].packed_bytes, rows[2].packed_bytes);
}
