#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tech/encoder.hpp"

using namespace tech;

namespace {

Tensor standardized_rows(std::int64_t rows, std::int64_t cols, std::mt19937_64& rng) {
  Tensor x = Tensor::uniform({rows, cols}, -1.0, 1.0, rng);
  for (std::int64_t r = 0; r < rows; ++r) {
    double mean = 0.0;
    for (std::int64_t c = 0; c < cols; ++c) mean += x.at(r, c);
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (std::int64_t c = 0; c < cols; ++c) var += (x.at(r, c) - mean) * (x.at(r, c) - mean);
    var /= static_cast<double>(cols);
    const double inv = 1.0 / std::sqrt(var);
    for (std::int64_t c = 0; c < cols; ++c) x.at(r, c) = (x.at(r, c) - mean) * inv;
  }
  return x;
}

}  // namespace

TEST_CASE("pass-through block reduces to the residual identity path") {
  std::mt19937_64 rng(71);
  EncoderBlock b = EncoderBlock::init(Mixer::none(), 8, 16, 0.0, false, rng);
  std::ranges::fill(b.ffn1_w.data(), 0.0);
  std::ranges::fill(b.ffn2_w.data(), 0.0);
  // already-standardized rows are fixed points of the norm sublayers
  Tensor x = standardized_rows(4, 8, rng);
  Graph g;
  Tensor out = block_forward(g, b, x, false);
  for (std::size_t i = 0; i < x.data().size(); ++i) {
    CHECK(out.data()[i] == doctest::Approx(x.data()[i]).epsilon(1e-4));
  }
}

TEST_CASE("inference forward is deterministic") {
  std::mt19937_64 rng(72);
  EncoderBlock b = EncoderBlock::init(Mixer::make_cotar(8, 2, rng), 8, 16, 0.3, false, rng);
  Tensor x = Tensor::uniform({5, 8}, -1.0, 1.0, rng);
  Graph g1, g2;
  Tensor a = block_forward(g1, b, x, false);
  Tensor c = block_forward(g2, b, x, false);
  for (std::size_t i = 0; i < a.data().size(); ++i) CHECK(a.data()[i] == c.data()[i]);
}

TEST_CASE("training dropout is reproducible from the generator seed") {
  std::mt19937_64 rng(73);
  EncoderBlock b = EncoderBlock::init(Mixer::make_cotar(8, 2, rng), 8, 16, 0.2, false, rng);
  Tensor x = Tensor::uniform({5, 8}, -1.0, 1.0, rng);
  std::mt19937_64 d1(7), d2(7), d3(8);
  Graph g1, g2, g3;
  Tensor a = block_forward(g1, b, x, true, &d1);
  Tensor c = block_forward(g2, b, x, true, &d2);
  Tensor e = block_forward(g3, b, x, true, &d3);
  bool same_seed_equal = true, diff_seed_equal = true;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    same_seed_equal = same_seed_equal && a.data()[i] == c.data()[i];
    diff_seed_equal = diff_seed_equal && a.data()[i] == e.data()[i];
  }
  CHECK(same_seed_equal);
  CHECK(!diff_seed_equal);
}

TEST_CASE("block gradients match finite differences") {
  std::mt19937_64 rng(74);
  EncoderBlock b = EncoderBlock::init(Mixer::make_cotar(8, 2, rng), 8, 16, 0.0, false, rng);
  Tensor x = Tensor::uniform({3, 8}, -1.0, 1.0, rng, true);
  std::vector<Tensor> inputs = b.parameters();
  inputs.push_back(x);
  auto f = [&](Graph& g) {
    Tensor out = block_forward(g, b, x, false);
    return reduce_sum(g, reduce_sum(g, mul(g, out, out), 0), 0);
  };
  auto report = grad_check(f, inputs, 1e-5, 1e-5);
  CHECK(report.passed);
}

TEST_CASE("stack of depth zero is the identity") {
  std::mt19937_64 rng(75);
  EncoderStack s = make_stack(0, MixerKind::kCoTAR, 8, 2, 16, 0.1, false, rng);
  Tensor x = Tensor::uniform({4, 8}, -1.0, 1.0, rng);
  Graph g;
  Tensor out = stack_forward(g, s, x, false);
  CHECK(out.same_storage(x));
}

TEST_CASE("stack composes blocks in order") {
  std::mt19937_64 rng(76);
  EncoderStack s = make_stack(2, MixerKind::kCoTAR, 8, 2, 16, 0.0, false, rng);
  Tensor x = Tensor::uniform({4, 8}, -1.0, 1.0, rng);
  Graph g1, g2;
  Tensor whole = stack_forward(g1, s, x, false);
  Tensor manual = block_forward(g2, s.blocks[1], block_forward(g2, s.blocks[0], x, false), false);
  for (std::size_t i = 0; i < whole.data().size(); ++i) {
    CHECK(whole.data()[i] == manual.data()[i]);
  }
  CHECK(whole.shape() == x.shape());
}

TEST_CASE("deep stack gradients match finite differences") {
  std::mt19937_64 rng(77);
  EncoderStack s = make_stack(3, MixerKind::kCoTAR, 8, 2, 16, 0.0, false, rng);
  Tensor x = Tensor::uniform({4, 8}, -1.0, 1.0, rng, true);
  std::vector<Tensor> inputs = s.parameters();
  inputs.push_back(x);
  auto f = [&](Graph& g) {
    Tensor out = stack_forward(g, s, x, false);
    return reduce_sum(g, reduce_sum(g, mul(g, out, out), 0), 0);
  };
  auto report = grad_check(f, inputs, 1e-5, 1e-5);
  CHECK(report.passed);
}

TEST_CASE("cotar stack is permutation equivariant") {
  std::mt19937_64 rng(78);
  EncoderStack s = make_stack(3, MixerKind::kCoTAR, 8, 2, 16, 0.0, false, rng);
  Tensor x = Tensor::uniform({6, 8}, -1.0, 1.0, rng);
  Graph g;
  Tensor base = stack_forward(g, s, x, false);

  std::vector<std::int64_t> perm(6);
  std::iota(perm.begin(), perm.end(), 0);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(perm.begin(), perm.end(), rng);
    Tensor shuffled = Tensor::zeros({6, 8});
    Tensor expected = Tensor::zeros({6, 8});
    for (std::int64_t r = 0; r < 6; ++r) {
      for (std::int64_t c = 0; c < 8; ++c) {
        shuffled.at(r, c) = x.at(perm[static_cast<std::size_t>(r)], c);
        expected.at(r, c) = base.at(perm[static_cast<std::size_t>(r)], c);
      }
    }
    Graph g2;
    Tensor out = stack_forward(g2, s, shuffled, false);
    double worst = 0.0;
    for (std::size_t i = 0; i < out.data().size(); ++i) {
      worst = std::max(worst, std::abs(out.data()[i] - expected.data()[i]));
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("pre-norm variant also passes finite differences") {
  std::mt19937_64 rng(79);
  EncoderBlock b = EncoderBlock::init(Mixer::make_attention(8, rng), 8, 16, 0.0, true, rng);
  Tensor x = Tensor::uniform({3, 8}, -1.0, 1.0, rng, true);
  std::vector<Tensor> inputs = b.parameters();
  inputs.push_back(x);
  auto f = [&](Graph& g) {
    Tensor out = block_forward(g, b, x, false);
    return reduce_sum(g, reduce_sum(g, mul(g, out, out), 0), 0);
  };
  CHECK(grad_check(f, inputs, 1e-5, 1e-5).passed);
}
