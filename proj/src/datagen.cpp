#include "tech/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "tech/rng.hpp"

namespace tech {

void GeneratorSpec::validate() const {
  if (subjects < 1 || trials_per_subject < 1) {
    throw std::invalid_argument("generator: subjects and trials must be >= 1");
  }
  if (timesteps < 2 || channels < 1) {
    throw std::invalid_argument("generator: timesteps >= 2 and channels >= 1 required");
  }
  if (classes < 2) throw std::invalid_argument("generator: classes must be >= 2");
  if (static_cast<int>(class_frequencies.size()) != classes) {
    throw std::invalid_argument("generator: one frequency per class required");
  }
  std::set<double> distinct(class_frequencies.begin(), class_frequencies.end());
  if (static_cast<int>(distinct.size()) != classes) {
    throw std::invalid_argument("generator: class frequencies must be distinct");
  }
  for (double f : class_frequencies) {
    if (f <= 0.0 || f >= 0.5) {
      throw std::invalid_argument("generator: frequencies must lie in (0, 0.5) cycles/step");
    }
  }
  if (mode == GeneratorMode::kDecentralized) {
    // per-channel offsets stretch the top frequency; keep it below Nyquist
    const double top = *std::max_element(class_frequencies.begin(), class_frequencies.end());
    if (top * (1.0 + 0.15 * (channels - 1)) >= 0.5) {
      throw std::invalid_argument("generator: channel frequency offsets exceed Nyquist");
    }
  }
  if (coupling < 0.0 || coupling > 1.0) {
    throw std::invalid_argument("generator: coupling must be in [0,1]");
  }
  if (noise_sigma < 0.0) throw std::invalid_argument("generator: noise_sigma must be >= 0");
}

void standardize_per_channel(Tensor& x) {
  const std::int64_t t = x.extent(0), c = x.extent(1);
  for (std::int64_t j = 0; j < c; ++j) {
    double mean = 0.0;
    for (std::int64_t i = 0; i < t; ++i) mean += x.at(i, j);
    mean /= static_cast<double>(t);
    double var = 0.0;
    for (std::int64_t i = 0; i < t; ++i) {
      const double d = x.at(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<double>(t);
    const double inv = var > 1e-24 ? 1.0 / std::sqrt(var) : 0.0;
    for (std::int64_t i = 0; i < t; ++i) x.at(i, j) = (x.at(i, j) - mean) * inv;
  }
}

namespace {

constexpr double kTau = 6.283185307179586;

Tensor centralized_trial(const GeneratorSpec& spec, int label, double subject_amp,
                         const std::vector<double>& gains, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> phase_dist(0.0, kTau);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma);
  const double phase = phase_dist(rng);
  const double freq = spec.class_frequencies[static_cast<std::size_t>(label)];

  Tensor x = Tensor::zeros({spec.timesteps, spec.channels});
  for (int t = 0; t < spec.timesteps; ++t) {
    const double core = subject_amp * std::sin(kTau * freq * t + phase);
    for (int c = 0; c < spec.channels; ++c) {
      x.at(t, c) = spec.coupling * gains[static_cast<std::size_t>(c)] * core +
                   (1.0 - spec.coupling) * noise(rng);
    }
  }
  standardize_per_channel(x);
  return x;
}

Tensor decentralized_trial(const GeneratorSpec& spec, int label, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> phase_dist(0.0, kTau);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma);
  const double base_freq = spec.class_frequencies[static_cast<std::size_t>(label)];
  const double ar_coeff = 0.65;  // shared by all channels: balanced out-strengths

  Tensor x = Tensor::zeros({spec.timesteps, spec.channels});
  for (int c = 0; c < spec.channels; ++c) {
    const double freq = base_freq * (1.0 + 0.15 * c);  // orthogonal-ish across channels
    const double phase = phase_dist(rng);
    double state = noise(rng);
    for (int t = 0; t < spec.timesteps; ++t) {
      state = ar_coeff * state + noise(rng);
      x.at(t, c) = state + 0.8 * std::sin(kTau * freq * t + phase);
    }
  }
  standardize_per_channel(x);
  return x;
}

}  // namespace

Dataset generate(const GeneratorSpec& spec) {
  spec.validate();
  Dataset data;
  data.timesteps = spec.timesteps;
  data.channels = spec.channels;
  data.classes = spec.classes;
  data.samples.reserve(static_cast<std::size_t>(spec.subjects * spec.trials_per_subject));

  for (int subject = 0; subject < spec.subjects; ++subject) {
    auto subject_rng = make_rng(spec.seed, static_cast<std::uint64_t>(subject));
    std::uniform_real_distribution<double> amp_dist(0.8, 1.2);
    std::uniform_real_distribution<double> gain_dist(0.5, 1.5);
    const double subject_amp = amp_dist(subject_rng);
    std::vector<double> gains(static_cast<std::size_t>(spec.channels));
    for (double& gn : gains) gn = gain_dist(subject_rng);

    for (int trial = 0; trial < spec.trials_per_subject; ++trial) {
      auto trial_rng = make_rng(spec.seed, static_cast<std::uint64_t>(subject),
                                static_cast<std::uint64_t>(trial) + 1);
      LabeledSample s;
      s.subject_id = subject;
      s.label = trial % spec.classes;  // balanced classes per subject
      s.x = spec.mode == GeneratorMode::kCentralized
                ? centralized_trial(spec, s.label, subject_amp, gains, trial_rng)
                : decentralized_trial(spec, s.label, trial_rng);
      data.samples.push_back(std::move(s));
    }
  }
  return data;
}

}  // namespace tech
