#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "tech/tokenizer.hpp"

using namespace tech;

TEST_CASE("patch arithmetic follows the ceiling rule") {
  std::mt19937_64 rng(91);
  for (int t = 1; t <= 12; ++t) {
    for (int l = 1; l <= t; ++l) {
      auto tk = TemporalTokenizer::init(t, 3, l, 8, rng);
      CHECK(tk.num_patches == (t + l - 1) / l);
      CHECK(tk.num_patches * l >= t);
      CHECK((tk.num_patches - 1) * l < t);
      Tensor x = Tensor::uniform({t, 3}, -1.0, 1.0, rng);
      Graph g;
      Tensor tokens = temporal_embed(g, tk, x);
      CHECK(tokens.shape() == std::vector<std::int64_t>{tk.num_patches, 8});
    }
  }
}

TEST_CASE("whole-series patch gives a single token") {
  std::mt19937_64 rng(92);
  auto tk = TemporalTokenizer::init(6, 2, 6, 4, rng);
  CHECK(tk.num_patches == 1);
}

TEST_CASE("trailing patch is zero-padded") {
  std::mt19937_64 rng(93);
  Tensor x = Tensor::uniform({5, 2}, 1.0, 2.0, rng);  // strictly positive entries
  Graph g;
  Tensor patches = extract_patches(g, x, 2);
  CHECK(patches.shape() == std::vector<std::int64_t>{3, 4});
  // last patch holds row 4 then padding
  CHECK(patches.at(2, 0) == x.at(4, 0));
  CHECK(patches.at(2, 1) == x.at(4, 1));
  CHECK(patches.at(2, 2) == 0.0);
  CHECK(patches.at(2, 3) == 0.0);
}

TEST_CASE("zero input isolates the position table") {
  std::mt19937_64 rng(94);
  auto tk = TemporalTokenizer::init(6, 3, 2, 8, rng);
  Tensor zero = Tensor::zeros({6, 3});
  Graph g;
  Tensor tokens = temporal_embed(g, tk, zero);
  for (std::int64_t i = 0; i < tk.num_patches; ++i) {
    for (std::int64_t j = 0; j < 8; ++j) CHECK(tokens.at(i, j) == tk.position.at(i, j));
  }

  auto ck = ChannelTokenizer::init(6, 3, 8, rng);
  Graph g2;
  Tensor ch_tokens = channel_embed(g2, ck, zero);
  for (std::int64_t i = 0; i < 3; ++i) {
    for (std::int64_t j = 0; j < 8; ++j) CHECK(ch_tokens.at(i, j) == ck.position.at(i, j));
  }
}

TEST_CASE("duplicated channels differ only by their position rows") {
  std::mt19937_64 rng(95);
  auto tk = ChannelTokenizer::init(10, 4, 6, rng);
  Tensor x = Tensor::uniform({10, 4}, -1.0, 1.0, rng);
  for (std::int64_t t = 0; t < 10; ++t) x.at(t, 2) = x.at(t, 0);  // copy channel 0 into 2
  Graph g;
  Tensor tokens = channel_embed(g, tk, x);
  for (std::int64_t j = 0; j < 6; ++j) {
    const double diff = tokens.at(0, j) - tokens.at(2, j);
    const double pos_diff = tk.position.at(0, j) - tk.position.at(2, j);
    CHECK(diff == doctest::Approx(pos_diff).epsilon(1e-13));
  }
}

TEST_CASE("channel tokens match a scalar dot-product oracle") {
  std::mt19937_64 rng(96);
  auto tk = ChannelTokenizer::init(12, 3, 5, rng);
  Tensor x = Tensor::uniform({12, 3}, -1.0, 1.0, rng);
  Graph g;
  Tensor tokens = channel_embed(g, tk, x);
  for (std::int64_t j = 0; j < 3; ++j) {
    for (std::int64_t d = 0; d < 5; ++d) {
      double acc = tk.bias.at(d) + tk.position.at(j, d);
      for (std::int64_t t = 0; t < 12; ++t) acc += x.at(t, j) * tk.weight.at(t, d);
      CHECK(std::abs(tokens.at(j, d) - acc) < 1e-12);
    }
  }
}

TEST_CASE("embeddings are affine in the sample") {
  std::mt19937_64 rng(97);
  auto tk = TemporalTokenizer::init(7, 3, 3, 6, rng);
  auto ck = ChannelTokenizer::init(7, 3, 6, rng);
  Tensor x1 = Tensor::uniform({7, 3}, -1.0, 1.0, rng);
  Tensor x2 = Tensor::uniform({7, 3}, -1.0, 1.0, rng);
  const double alpha = 0.3;
  Tensor blend = Tensor::zeros({7, 3});
  for (std::size_t i = 0; i < blend.data().size(); ++i) {
    blend.data()[i] = alpha * x1.data()[i] + (1.0 - alpha) * x2.data()[i];
  }

  Graph g;
  Tensor e1 = temporal_embed(g, tk, x1);
  Tensor e2 = temporal_embed(g, tk, x2);
  Tensor eb = temporal_embed(g, tk, blend);
  Tensor h1 = channel_embed(g, ck, x1);
  Tensor h2 = channel_embed(g, ck, x2);
  Tensor hb = channel_embed(g, ck, blend);

  // affine: e(blend) = alpha*e(x1) + (1-alpha)*e(x2) once the constant
  // (bias + position, i.e. the embedding of zero) is subtracted
  Tensor zero = Tensor::zeros({7, 3});
  Tensor e0 = temporal_embed(g, tk, zero);
  Tensor h0 = channel_embed(g, ck, zero);
  for (std::size_t i = 0; i < eb.data().size(); ++i) {
    const double lhs = eb.data()[i] - e0.data()[i];
    const double rhs = alpha * (e1.data()[i] - e0.data()[i]) + (1 - alpha) * (e2.data()[i] - e0.data()[i]);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
  for (std::size_t i = 0; i < hb.data().size(); ++i) {
    const double lhs = hb.data()[i] - h0.data()[i];
    const double rhs = alpha * (h1.data()[i] - h0.data()[i]) + (1 - alpha) * (h2.data()[i] - h0.data()[i]);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("channel permutation moves data parts but not positions") {
  std::mt19937_64 rng(98);
  auto ck = ChannelTokenizer::init(9, 4, 5, rng);
  Tensor x = Tensor::uniform({9, 4}, -1.0, 1.0, rng);
  std::vector<int> perm = {2, 0, 3, 1};
  Tensor shuffled = Tensor::zeros({9, 4});
  for (std::int64_t t = 0; t < 9; ++t) {
    for (std::int64_t c = 0; c < 4; ++c) {
      shuffled.at(t, c) = x.at(t, perm[static_cast<std::size_t>(c)]);
    }
  }
  Graph g;
  Tensor base = channel_embed(g, ck, x);
  Tensor moved = channel_embed(g, ck, shuffled);
  for (std::int64_t c = 0; c < 4; ++c) {
    const std::int64_t src = perm[static_cast<std::size_t>(c)];
    for (std::int64_t d = 0; d < 5; ++d) {
      const double data_moved = moved.at(c, d) - ck.position.at(c, d);
      const double data_base = base.at(src, d) - ck.position.at(src, d);
      CHECK(data_moved == doctest::Approx(data_base).epsilon(1e-13));
    }
  }
}

TEST_CASE("tokenizer gradients match finite differences") {
  std::mt19937_64 rng(99);
  auto tk = TemporalTokenizer::init(5, 2, 2, 4, rng);
  auto ck = ChannelTokenizer::init(5, 2, 4, rng);
  Tensor x = Tensor::uniform({5, 2}, -1.0, 1.0, rng, true);

  std::vector<Tensor> inputs = tk.parameters();
  for (Tensor& t : ck.parameters()) inputs.push_back(t);
  inputs.push_back(x);
  auto f = [&](Graph& g) {
    Tensor e = temporal_embed(g, tk, x);
    Tensor h = channel_embed(g, ck, x);
    Tensor se = reduce_sum(g, reduce_sum(g, mul(g, e, e), 0), 0);
    Tensor sh = reduce_sum(g, reduce_sum(g, mul(g, h, h), 0), 0);
    return add(g, se, sh);
  };
  auto report = grad_check(f, inputs, 1e-5, 1e-5);
  CHECK(report.passed);
}

TEST_CASE("sample shape is validated") {
  std::mt19937_64 rng(100);
  auto tk = TemporalTokenizer::init(6, 3, 2, 8, rng);
  Graph g;
  Tensor wrong = Tensor::zeros({6, 4});
  CHECK_THROWS_AS(temporal_embed(g, tk, wrong), std::invalid_argument);
  CHECK_THROWS_AS(TemporalTokenizer::init(6, 3, 7, 8, rng), std::invalid_argument);
}
