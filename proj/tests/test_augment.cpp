#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "tech/augment.hpp"

using namespace tech;

namespace {

Tensor random_sample(std::int64_t t, std::int64_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return Tensor::uniform({t, c}, 0.5, 1.5, rng);  // strictly positive entries
}

double energy(const Tensor& x) {
  double e = 0.0;
  for (double v : x.data()) e += v * v;
  return e;
}

}  // namespace

TEST_CASE("empty bank is the identity") {
  std::mt19937_64 rng(1);
  AugmentBank bank;
  Tensor x = random_sample(8, 3, 2);
  Tensor out = apply(bank, x, rng);
  CHECK(out.same_storage(x));
}

TEST_CASE("temporal flip is an involution") {
  Tensor x = random_sample(16, 4, 3);
  Tensor twice = temporal_flip(temporal_flip(x));
  for (std::int64_t i = 0; i < x.size(); ++i) CHECK(twice.data()[i] == x.data()[i]);

  // forced flip through the bank: prob 1 guarantees the flip fires
  AugmentBank bank;
  bank.enabled = {Augmentation::kTemporalFlip};
  bank.flip_prob = 1.0;
  std::mt19937_64 rng(4);
  Tensor once = apply(bank, x, rng);
  Tensor back = apply(bank, once, rng);
  for (std::int64_t i = 0; i < x.size(); ++i) CHECK(back.data()[i] == x.data()[i]);
}

TEST_CASE("channel shuffle permutes columns") {
  std::mt19937_64 rng(5);
  Tensor x = random_sample(12, 5, 6);
  Tensor out = channel_shuffle(x, rng);
  CHECK(out.shape() == x.shape());

  auto column_sums = [](const Tensor& m) {
    std::vector<double> sums(static_cast<std::size_t>(m.extent(1)), 0.0);
    for (std::int64_t i = 0; i < m.extent(0); ++i) {
      for (std::int64_t j = 0; j < m.extent(1); ++j) sums[static_cast<std::size_t>(j)] += m.at(i, j);
    }
    std::sort(sums.begin(), sums.end());
    return sums;
  };
  CHECK(column_sums(out) == column_sums(x));
}

TEST_CASE("temporal mask zeroes exactly floor(ratio*T) rows") {
  std::mt19937_64 rng(7);
  Tensor x = random_sample(256, 3, 8);
  Tensor out = temporal_mask(x, 0.1, rng);
  std::int64_t zero_rows = 0;
  for (std::int64_t i = 0; i < 256; ++i) {
    bool all_zero = true;
    for (std::int64_t j = 0; j < 3; ++j) all_zero = all_zero && out.at(i, j) == 0.0;
    zero_rows += all_zero ? 1 : 0;
  }
  CHECK(zero_rows == 25);
}

TEST_CASE("frequency mask with ratio 0 reconstructs the input") {
  std::mt19937_64 rng(9);
  Tensor x = random_sample(64, 2, 10);
  Tensor out = frequency_mask(x, 0.0, rng);
  for (std::int64_t i = 0; i < x.size(); ++i) {
    CHECK(std::abs(out.data()[i] - x.data()[i]) < 1e-9);
  }
}

TEST_CASE("masking every bin of a constant channel gives zero") {
  std::mt19937_64 rng(11);
  Tensor x = Tensor::full({32, 2}, 4.2);
  // a constant channel lives entirely in the DC bin
  Tensor out = frequency_mask(x, 1.0, rng);
  for (double v : out.data()) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("removing bins cannot add energy") {
  std::mt19937_64 rng(13);
  Tensor x = random_sample(48, 3, 14);
  for (double ratio : {0.1, 0.3, 0.7}) {
    Tensor out = frequency_mask(x, ratio, rng);
    CHECK(energy(out) <= energy(x) + 1e-9);
  }
}

TEST_CASE("jitter adds bounded positive noise") {
  std::mt19937_64 rng(15);
  Tensor x = random_sample(20, 2, 16);
  Tensor out = jitter(x, 0.1, rng);
  for (std::int64_t i = 0; i < x.size(); ++i) {
    const double delta = out.data()[i] - x.data()[i];
    CHECK(delta >= 0.0);
    CHECK(delta <= 0.1);
  }
}

TEST_CASE("value dropout only zeroes entries") {
  std::mt19937_64 rng(17);
  Tensor x = random_sample(30, 4, 18);
  Tensor out = value_dropout(x, 0.3, rng);
  std::int64_t zeros = 0;
  for (std::int64_t i = 0; i < x.size(); ++i) {
    const bool untouched = out.data()[i] == x.data()[i];
    const bool zeroed = out.data()[i] == 0.0;
    CHECK((untouched || zeroed));
    zeros += zeroed ? 1 : 0;
  }
  CHECK(zeros > 0);
}

TEST_CASE("selection among enabled augmentations is uniform") {
  AugmentBank bank;
  bank.enabled = {Augmentation::kTemporalMask, Augmentation::kJitter,
                  Augmentation::kValueDropout};
  bank.temporal_mask_ratio = 1.0;  // all rows zero: marker for "mask chosen"
  bank.jitter_scale = 0.5;         // shifts every entry: marker for "jitter chosen"
  bank.dropout_ratio = 0.0;        // exact copy: marker for "dropout chosen"

  Tensor x = Tensor::full({4, 2}, 1.0);
  std::mt19937_64 rng(19);
  int mask_count = 0, jitter_count = 0, dropout_count = 0;
  for (int i = 0; i < 10000; ++i) {
    Tensor out = apply(bank, x, rng);
    if (out.data()[0] == 0.0) ++mask_count;
    else if (out.data()[0] == 1.0) ++dropout_count;
    else ++jitter_count;
  }
  for (int count : {mask_count, jitter_count, dropout_count}) {
    CHECK(count > 3333 - 150);
    CHECK(count < 3333 + 150);
  }
}

TEST_CASE("apply preserves shape and is deterministic per seed") {
  AugmentBank bank = AugmentBank::all_defaults();
  Tensor x = random_sample(40, 5, 20);
  for (int trial = 0; trial < 20; ++trial) {
    std::mt19937_64 a(static_cast<std::uint64_t>(trial)), b(static_cast<std::uint64_t>(trial));
    Tensor out1 = apply(bank, x, a);
    Tensor out2 = apply(bank, x, b);
    CHECK(out1.shape() == x.shape());
    for (std::int64_t i = 0; i < out1.size(); ++i) CHECK(out1.data()[i] == out2.data()[i]);
  }
}

TEST_CASE("bank parameters are validated") {
  AugmentBank bank = AugmentBank::all_defaults();
  bank.dropout_ratio = 1.5;
  std::mt19937_64 rng(21);
  Tensor x = random_sample(8, 2, 22);
  CHECK_THROWS_AS(apply(bank, x, rng), std::invalid_argument);
}
