#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <functional>
#include <random>

#include "oracles.hpp"
#include "tech/centrality.hpp"
#include "tech/datagen.hpp"

using namespace tech;

namespace {

SeriesMatrix make_series(std::int64_t s, std::int64_t t,
                         const std::function<double(std::int64_t, std::int64_t)>& f) {
  Tensor values = Tensor::zeros({s, t});
  for (std::int64_t i = 0; i < s; ++i) {
    for (std::int64_t j = 0; j < t; ++j) values.at(i, j) = f(i, j);
  }
  return {values};
}

// Rows made exactly orthonormal (after centering) by Gram-Schmidt.
SeriesMatrix orthonormal_rows(std::int64_t s, std::int64_t t) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(s),
                                        std::vector<double>(static_cast<std::size_t>(t)));
  for (auto& row : rows) {
    double mean = 0.0;
    for (double& v : row) {
      v = dist(rng);
      mean += v;
    }
    mean /= static_cast<double>(t);
    for (double& v : row) v -= mean;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < rows[i].size(); ++k) dot += rows[i][k] * rows[j][k];
      for (std::size_t k = 0; k < rows[i].size(); ++k) rows[i][k] -= dot * rows[j][k];
    }
    double norm = 0.0;
    for (double v : rows[i]) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : rows[i]) v /= norm;
  }
  return make_series(s, t, [&](std::int64_t i, std::int64_t j) {
    return rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  });
}

}  // namespace

TEST_CASE("sci is 1 for rank-1 series") {
  SeriesMatrix series = make_series(4, 100, [](std::int64_t i, std::int64_t j) {
    const double z = std::sin(0.17 * static_cast<double>(j));
    return (1.0 + 0.5 * static_cast<double>(i)) * z;
  });
  CHECK(sci(series) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("sci is 1/S for isotropic covariance") {
  SeriesMatrix series = orthonormal_rows(4, 100);
  CHECK(sci(series) == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("sci is invariant under global scaling") {
  std::mt19937_64 rng(7);
  SeriesMatrix series = make_series(3, 60, [&](std::int64_t, std::int64_t) {
    return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
  });
  const double base = sci(series);
  Tensor scaled = series.values.clone();
  for (double& v : scaled.data()) v *= -37.5;
  CHECK(sci({scaled}) == doctest::Approx(base).epsilon(1e-12));
  CHECK(base >= 1.0 / 3.0 - 1e-12);
  CHECK(base <= 1.0 + 1e-12);
}

TEST_CASE("sci matches a Jacobi eigendecomposition") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  SeriesMatrix series = make_series(4, 200, [&](std::int64_t i, std::int64_t j) {
    const double shared = std::sin(0.05 * static_cast<double>(j));
    return shared * (1.0 + 0.3 * static_cast<double>(i)) + 0.4 * dist(rng);
  });
  const double via_power = sci(series);

  // re-derive the covariance and feed the full symmetric eigensolver
  const std::int64_t s = 4, t = 200;
  oracle::Mat cov(s, s);
  std::vector<double> means(4, 0.0);
  for (std::int64_t i = 0; i < s; ++i) {
    for (std::int64_t j = 0; j < t; ++j) means[static_cast<std::size_t>(i)] += series.values.at(i, j);
    means[static_cast<std::size_t>(i)] /= static_cast<double>(t);
  }
  for (std::int64_t a = 0; a < s; ++a) {
    for (std::int64_t b = 0; b < s; ++b) {
      double acc = 0.0;
      for (std::int64_t j = 0; j < t; ++j) {
        acc += (series.values.at(a, j) - means[static_cast<std::size_t>(a)]) *
               (series.values.at(b, j) - means[static_cast<std::size_t>(b)]);
      }
      cov.at(a, b) = acc / static_cast<double>(t - 1);
    }
  }
  auto eig = oracle::jacobi_eigenvalues(cov);
  double trace = 0.0;
  for (double e : eig) trace += e;
  const double via_jacobi = eig.back() / trace;
  CHECK(std::abs(via_power - via_jacobi) < 1e-8);
}

TEST_CASE("sci rejects zero input") {
  SeriesMatrix zero = make_series(3, 10, [](std::int64_t, std::int64_t) { return 0.0; });
  CHECK_THROWS_AS(sci(zero), std::invalid_argument);
}

TEST_CASE("dic recovers an exact linear system") {
  // x_{t+1} = A x_t, noise-free
  const double a00 = 0.5, a01 = 0.0, a10 = 0.8, a11 = 0.1;
  std::vector<std::array<double, 2>> states = {{1.0, 1.0}};
  for (int t = 0; t < 4; ++t) {
    auto [x, y] = states.back();
    states.push_back({a00 * x + a01 * y, a10 * x + a11 * y});
  }
  SeriesMatrix series = make_series(2, static_cast<std::int64_t>(states.size()),
                                    [&](std::int64_t i, std::int64_t j) {
                                      return states[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
                                    });
  auto result = dic(series);
  CHECK(result.model.transition.at(0, 0) == doctest::Approx(a00).epsilon(1e-6));
  CHECK(result.model.transition.at(0, 1) == doctest::Approx(a01).epsilon(1e-6));
  CHECK(result.model.transition.at(1, 0) == doctest::Approx(a10).epsilon(1e-6));
  CHECK(result.model.transition.at(1, 1) == doctest::Approx(a11).epsilon(1e-6));
  // hand value: s_0 = |0.5|+|0.8| = 1.3, s_1 = |0|+|0.1| = 0.1
  CHECK(result.value == doctest::Approx((1.3 - 0.7) / 0.7).epsilon(1e-5));
}

TEST_CASE("dic is near zero for balanced circulant dynamics") {
  // x_{t+1} = rho * shift(x_t) + small noise: every column strength is rho
  const std::int64_t s = 5, t = 600;
  std::mt19937_64 rng(13);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<std::vector<double>> xs;
  xs.push_back({1.0, -0.5, 0.3, 0.8, -0.2});
  for (std::int64_t step = 1; step < t; ++step) {
    const auto& prev = xs.back();
    std::vector<double> next(static_cast<std::size_t>(s));
    for (std::int64_t i = 0; i < s; ++i) {
      next[static_cast<std::size_t>(i)] =
          0.9 * prev[static_cast<std::size_t>((i + 1) % s)] + noise(rng);
    }
    xs.push_back(std::move(next));
  }
  SeriesMatrix series = make_series(s, t, [&](std::int64_t i, std::int64_t j) {
    return xs[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
  });
  auto result = dic(series);
  CHECK(result.value < 0.05);
}

TEST_CASE("dic flags the driving channel of a star system") {
  const std::int64_t s = 5, t = 800;
  std::mt19937_64 rng(17);
  std::normal_distribution<double> drive(0.0, 1.0), jitter(0.0, 0.05);
  std::vector<std::vector<double>> xs(static_cast<std::size_t>(t),
                                      std::vector<double>(static_cast<std::size_t>(s), 0.0));
  for (std::int64_t step = 0; step < t; ++step) {
    xs[static_cast<std::size_t>(step)][0] = drive(rng);
    if (step > 0) {
      for (std::int64_t i = 1; i < s; ++i) {
        xs[static_cast<std::size_t>(step)][static_cast<std::size_t>(i)] =
            0.9 * xs[static_cast<std::size_t>(step - 1)][0] + jitter(rng);
      }
    }
  }
  SeriesMatrix series = make_series(s, t, [&](std::int64_t i, std::int64_t j) {
    return xs[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
  });
  auto result = dic(series);
  CHECK(result.value > 0.5);
  const auto& strengths = result.model.out_strengths;
  for (std::size_t i = 1; i < strengths.size(); ++i) CHECK(strengths[0] > strengths[i]);
}

TEST_CASE("dic is invariant under global scaling") {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> noise(0.0, 1.0);
  SeriesMatrix series = make_series(3, 300, [&](std::int64_t, std::int64_t) { return noise(rng); });
  const double base = dic(series).value;
  Tensor scaled = series.values.clone();
  for (double& v : scaled.data()) v *= 250.0;
  CHECK(dic({scaled}).value == doctest::Approx(base).epsilon(1e-6));
}

TEST_CASE("dic error paths") {
  SeriesMatrix tiny = make_series(4, 5, [](std::int64_t i, std::int64_t j) {
    return static_cast<double>(i + j);
  });
  CHECK_THROWS_AS(dic(tiny), std::invalid_argument);  // T < S + 2
  SeriesMatrix zero = make_series(2, 10, [](std::int64_t, std::int64_t) { return 0.0; });
  CHECK_THROWS_AS(dic(zero), std::invalid_argument);  // no energy
}

TEST_CASE("centralized draws score higher than decentralized on both metrics") {
  double sci_cen = 0.0, sci_dec = 0.0, dic_cen = 0.0, dic_dec = 0.0;
  for (int draw = 0; draw < 10; ++draw) {
    GeneratorSpec spec;
    spec.subjects = 1;
    spec.trials_per_subject = 1;
    spec.timesteps = 256;
    spec.channels = 8;
    spec.seed = 1000 + static_cast<std::uint64_t>(draw);

    spec.mode = GeneratorMode::kCentralized;
    Dataset cen = generate(spec);
    auto series_c = SeriesMatrix::from_sample(cen.samples[0].x);
    sci_cen += sci(series_c);
    dic_cen += dic(series_c).value;

    spec.mode = GeneratorMode::kDecentralized;
    Dataset dec = generate(spec);
    auto series_d = SeriesMatrix::from_sample(dec.samples[0].x);
    sci_dec += sci(series_d);
    dic_dec += dic(series_d).value;
  }
  CHECK(sci_cen / 10.0 > sci_dec / 10.0);
  CHECK(dic_cen / 10.0 > dic_dec / 10.0);
}

TEST_CASE("noise sweep shares one perturbation per beta across mixers") {
  GeneratorSpec spec;
  spec.subjects = 2;
  spec.trials_per_subject = 2;
  spec.timesteps = 16;
  spec.channels = 3;
  Dataset data = generate(spec);

  std::vector<std::vector<double>> trace;
  auto record = [&](const Dataset& d, MixerKind) {
    std::vector<double> flat;
    for (const auto& s : d.samples) flat.insert(flat.end(), s.x.data().begin(), s.x.data().end());
    trace.push_back(std::move(flat));
    return 0.0;
  };

  const std::vector<double> betas = {0.0, 5.0};
  const std::vector<MixerKind> mixers = {MixerKind::kAttention, MixerKind::kCoTAR};
  auto points = noise_sweep(record, data, betas, mixers);
  REQUIRE(points.size() == 4);
  CHECK(points[0].beta == 0.0);
  CHECK(points[3].beta == 5.0);
  CHECK(trace[0] == trace[1]);  // same data for both mixers at beta 0
  CHECK(trace[2] == trace[3]);  // and at beta 5
  CHECK(trace[0] != trace[2]);

  // beta 0 leaves the data untouched
  std::vector<double> clean;
  for (const auto& s : data.samples) clean.insert(clean.end(), s.x.data().begin(), s.x.data().end());
  CHECK(trace[0] == clean);

  const std::vector<double> empty;
  CHECK_THROWS_AS(noise_sweep(record, data, empty, mixers), std::invalid_argument);
  const std::vector<double> not_sorted = {0.0, 5.0, 2.0};
  CHECK_THROWS_AS(noise_sweep(record, data, not_sorted, mixers), std::invalid_argument);
}

TEST_CASE("default beta grid spans 0 to 20") {
  auto grid = default_beta_grid();
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 20.0);
  CHECK(std::is_sorted(grid.begin(), grid.end()));
}
