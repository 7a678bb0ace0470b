#include <gtest/gtest.h>

#include <cmath>

#include "sqnz/nn.hpp"
#include "sqnz/prng.hpp"

using namespace sqnz;

namespace {

template <typename T>
Tensor<T> random_tensor(std::vector<std::size_t> shape, SplitMix64& rng, double scale = 1.0) {
  Tensor<T> t(shape);
  for (auto& v : t.data) v = static_cast<T>((2.0 * rng.next_unit() - 1.0) * scale);
  return t;
}

// independently written nested-loop cross-correlation
template <typename T>
Tensor<T> conv_oracle(const Tensor<T>& in, const Tensor<T>& w, const Tensor<T>& b, Padding pad) {
  const std::size_t c_in = in.dim(0), L = in.dim(1);
  const std::size_t c_out = w.dim(0), K = w.dim(2);
  const std::size_t L_out = (pad == Padding::same_zero) ? L : L - K + 1;
  const long left = (pad == Padding::same_zero) ? static_cast<long>((K - 1) / 2) : 0;
  Tensor<T> out({c_out, L_out});
  for (std::size_t co = 0; co < c_out; ++co)
    for (std::size_t t = 0; t < L_out; ++t) {
      T s = b[co];
      for (std::size_t ci = 0; ci < c_in; ++ci)
        for (std::size_t k = 0; k < K; ++k) {
          const long src = static_cast<long>(t) + static_cast<long>(k) - left;
          if (src >= 0 && src < static_cast<long>(L))
            s += w.at3(co, ci, k) * in.at2(ci, static_cast<std::size_t>(src));
        }
      out.at2(co, t) = s;
    }
  return out;
}

}  // namespace

TEST(Conv1d, DeltaKernelIdentity) {
  const auto in = Tensor<double>::from({1, 3}, {1, 2, 3});
  const auto w = Tensor<double>::from({1, 1, 3}, {0, 1, 0});
  const auto b = Tensor<double>::from({1}, {0});
  const auto out = conv1d_forward(in, w, b, Padding::valid);
  ASSERT_EQ(out.shape, (std::vector<std::size_t>{1, 1}));
  EXPECT_DOUBLE_EQ(out[0], 2.0);
}

TEST(Conv1d, HandDotProduct) {
  const auto in = Tensor<double>::from({1, 3}, {1, 2, 3});
  const auto w = Tensor<double>::from({1, 1, 3}, {1, 0, -1});
  const auto b = Tensor<double>::from({1}, {0});
  const auto out = conv1d_forward(in, w, b, Padding::valid);
  EXPECT_DOUBLE_EQ(out[0], -2.0);
}

TEST(Conv1d, MatchesOracleExactly) {
  SplitMix64 rng(101);
  for (Padding pad : {Padding::valid, Padding::same_zero}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto in = random_tensor<double>({2, 9}, rng);
      const auto w = random_tensor<double>({3, 2, 3}, rng);
      const auto b = random_tensor<double>({3}, rng);
      const auto got = conv1d_forward(in, w, b, pad);
      const auto want = conv_oracle(in, w, b, pad);
      ASSERT_EQ(got.shape, want.shape);
      for (std::size_t i = 0; i < got.size(); ++i) EXPECT_DOUBLE_EQ(got[i], want[i]);
    }
  }
}

TEST(Conv1d, SameZeroKeepsLength) {
  SplitMix64 rng(7);
  const auto in = random_tensor<double>({1, 11}, rng);
  const auto w = random_tensor<double>({2, 1, 5}, rng);
  const auto b = random_tensor<double>({2}, rng);
  EXPECT_EQ(conv1d_forward(in, w, b, Padding::same_zero).dim(1), 11u);
  EXPECT_EQ(conv1d_forward(in, w, b, Padding::valid).dim(1), 7u);
}

TEST(Conv1d, ShapeMismatchRejected) {
  const auto in = Tensor<double>::from({2, 4}, {1, 2, 3, 4, 5, 6, 7, 8});
  const auto w = Tensor<double>::from({1, 1, 3}, {1, 1, 1});  // wrong c_in
  const auto b = Tensor<double>::from({1}, {0});
  EXPECT_THROW(conv1d_forward(in, w, b, Padding::valid), dimension_error);
}

TEST(MaxPool, SingleWindow) {
  const auto in = Tensor<double>::from({1, 5}, {1, 3, 2, 5, 4});
  const auto r = maxpool1d_forward(in, 5);
  ASSERT_EQ(r.out.size(), 1u);
  EXPECT_DOUBLE_EQ(r.out[0], 5.0);
  EXPECT_EQ(r.argmax[0], 3u);
}

TEST(MaxPool, FirstTieWins) {
  const auto in = Tensor<double>::from({1, 4}, {1, 1, 1, 1});
  const auto r = maxpool1d_forward(in, 2);
  EXPECT_EQ(r.out.size(), 2u);
  EXPECT_EQ(r.argmax[0], 0u);
  EXPECT_EQ(r.argmax[1], 2u);
}

TEST(MaxPool, RemainderDropped) {
  Tensor<double> in({1, 12});
  for (std::size_t i = 0; i < 12; ++i) in[i] = static_cast<double>(i);
  const auto r = maxpool1d_forward(in, 5);
  EXPECT_EQ(r.out.dim(1), 2u);
}

TEST(MaxPool, ShorterThanWindowGivesEmpty) {
  const auto in = Tensor<double>::from({1, 3}, {1, 2, 3});
  const auto r = maxpool1d_forward(in, 5);
  EXPECT_EQ(r.out.dim(1), 0u);
}

TEST(Dense, IdentityWeights) {
  const auto x = Tensor<double>::from({3}, {4, 5, 6});
  const auto w = Tensor<double>::from({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  const auto b = Tensor<double>::from({3}, {0, 0, 0});
  const auto out = dense_forward(x, w, b);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(out[i], x[i]);
}

TEST(Dense, HandComputation) {
  const auto x = Tensor<double>::from({2}, {1, 2});
  const auto w = Tensor<double>::from({2, 2}, {1, 1, 0, -1});
  const auto b = Tensor<double>::from({2}, {0, 1});
  const auto out = dense_forward(x, w, b);
  EXPECT_DOUBLE_EQ(out[0], 3.0);
  EXPECT_DOUBLE_EQ(out[1], -1.0);
}

TEST(Dense, MatchesMatvecOracle) {
  SplitMix64 rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t U = 1 + rng.next_below(8), D = 1 + rng.next_below(12);
    const auto x = random_tensor<double>({D}, rng);
    const auto w = random_tensor<double>({U, D}, rng);
    const auto b = random_tensor<double>({U}, rng);
    const auto got = dense_forward(x, w, b);
    for (std::size_t u = 0; u < U; ++u) {
      double want = b[u];
      for (std::size_t d = 0; d < D; ++d) want += w.at2(u, d) * x[d];
      EXPECT_DOUBLE_EQ(got[u], want);
    }
  }
}

TEST(Dense, ShapeMismatchRejected) {
  const auto x = Tensor<double>::from({3}, {1, 2, 3});
  const auto w = Tensor<double>::from({2, 2}, {1, 1, 0, -1});
  const auto b = Tensor<double>::from({2}, {0, 0});
  EXPECT_THROW(dense_forward(x, w, b), dimension_error);
}

TEST(ActivationOps, Relu) {
  const auto out = activation(Tensor<double>::from({3}, {-1, 0, 2}), Activation::relu);
  EXPECT_EQ(out.data, (std::vector<double>{0, 0, 2}));
}

TEST(ActivationOps, SoftmaxUniform) {
  const auto out = activation(Tensor<double>::from({4}, {0, 0, 0, 0}), Activation::softmax);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(out[i], 0.25, 1e-12);
}

TEST(ActivationOps, SoftmaxStableUnderLargeInput) {
  const auto out = activation(Tensor<double>::from({4}, {1000, 0, 0, 0}), Activation::softmax);
  EXPECT_TRUE(all_finite(out));
  EXPECT_NEAR(out[0], 1.0, 1e-9);
}

TEST(ActivationOps, SoftmaxSumsToOne) {
  SplitMix64 rng(66);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = random_tensor<double>({4}, rng, 20.0);
    const auto p = softmax(x);
    double sum = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_GE(p[i], 0.0);
      EXPECT_LE(p[i], 1.0);
      sum += p[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
}

TEST(CrossEntropy, KnownValues) {
  EXPECT_DOUBLE_EQ(cross_entropy_loss(Tensor<double>::from({4}, {1, 0, 0, 0}), 0), 0.0);
  EXPECT_NEAR(cross_entropy_loss(Tensor<double>::from({4}, {0.25, 0.25, 0.25, 0.25}), 2),
              std::log(4.0), 1e-12);
  EXPECT_NEAR(cross_entropy_loss(Tensor<double>::from({4}, {0, 1, 0, 0}), 0),
              -std::log(1e-12), 1e-6);
}
