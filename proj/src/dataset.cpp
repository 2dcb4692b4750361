#include "tech/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tech {

std::vector<int> Dataset::subject_ids() const {
  std::set<int> ids;
  for (const LabeledSample& s : samples) ids.insert(s.subject_id);
  return {ids.begin(), ids.end()};
}

void SplitSpec::validate() const {
  if (train_frac <= 0 || val_frac <= 0 || test_frac <= 0) {
    throw std::invalid_argument("SplitSpec: every fraction must be positive");
  }
  if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
    throw std::invalid_argument("SplitSpec: fractions must sum to 1");
  }
}

namespace {

Dataset like(const Dataset& d) {
  Dataset out;
  out.timesteps = d.timesteps;
  out.channels = d.channels;
  out.classes = d.classes;
  return out;
}

Dataset take_subjects(const Dataset& d, const std::set<int>& subjects) {
  Dataset out = like(d);
  for (const LabeledSample& s : d.samples) {
    if (subjects.contains(s.subject_id)) out.samples.push_back(s);
  }
  return out;
}

}  // namespace

DatasetSplits split_by_subject(const Dataset& data, const SplitSpec& spec) {
  spec.validate();
  std::vector<int> subjects = data.subject_ids();
  const std::size_t n = subjects.size();
  if (n < 3) throw std::invalid_argument("split_by_subject: need at least 3 subjects");

  std::mt19937_64 rng(spec.seed);
  std::shuffle(subjects.begin(), subjects.end(), rng);

  const std::size_t n_val = static_cast<std::size_t>(spec.val_frac * static_cast<double>(n));
  const std::size_t n_test = static_cast<std::size_t>(spec.test_frac * static_cast<double>(n));
  const std::size_t n_train = n - n_val - n_test;
  if (n_val == 0 || n_test == 0 || n_train == 0) {
    throw std::invalid_argument("split_by_subject: fewer subjects than splits");
  }

  std::set<int> train(subjects.begin(), subjects.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::set<int> val(subjects.begin() + static_cast<std::ptrdiff_t>(n_train),
                    subjects.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  std::set<int> test(subjects.begin() + static_cast<std::ptrdiff_t>(n_train + n_val),
                     subjects.end());
  return {take_subjects(data, train), take_subjects(data, val), take_subjects(data, test)};
}

std::vector<std::pair<Dataset, Dataset>> kfold_by_subject(const Dataset& data, int k,
                                                          std::uint64_t seed) {
  std::vector<int> subjects = data.subject_ids();
  if (k < 2) throw std::invalid_argument("kfold_by_subject: k must be >= 2");
  if (static_cast<std::size_t>(k) > subjects.size()) {
    throw std::invalid_argument("kfold_by_subject: more folds than subjects");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(subjects.begin(), subjects.end(), rng);

  std::vector<std::set<int>> folds(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    folds[i % static_cast<std::size_t>(k)].insert(subjects[i]);
  }
  std::vector<std::pair<Dataset, Dataset>> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    std::set<int> rest;
    for (int s : subjects) {
      if (!folds[static_cast<std::size_t>(f)].contains(s)) rest.insert(s);
    }
    out.emplace_back(take_subjects(data, rest),
                     take_subjects(data, folds[static_cast<std::size_t>(f)]));
  }
  return out;
}

// --- File I/O --------------------------------------------------------------

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_dataset: cannot open " + path.string());
  out << "#medts v1 T=" << data.timesteps << " C=" << data.channels << " K=" << data.classes
      << "\n";
  char buf[32];
  for (const LabeledSample& s : data.samples) {
    out << s.subject_id << ',' << s.label << "\n";
    for (int t = 0; t < data.timesteps; ++t) {
      for (int c = 0; c < data.channels; ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", s.x.at(t, c));
        out << (c ? "," : "") << buf;
      }
      out << "\n";
    }
  }
  if (!out) throw std::runtime_error("save_dataset: write failed for " + path.string());
}

namespace {

[[noreturn]] void parse_error(const std::filesystem::path& path, std::size_t line,
                              const std::string& what) {
  throw std::runtime_error("load_dataset: " + path.string() + ":" + std::to_string(line) + ": " +
                           what);
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + path.string());

  Dataset data;
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) parse_error(path, 1, "empty file");
  ++lineno;
  if (std::sscanf(line.c_str(), "#medts v1 T=%d C=%d K=%d", &data.timesteps, &data.channels,
                  &data.classes) != 3) {
    parse_error(path, lineno, "bad header, expected '#medts v1 T=<T> C=<C> K=<K>'");
  }
  if (data.timesteps < 1 || data.channels < 1 || data.classes < 1) {
    parse_error(path, lineno, "non-positive dimensions in header");
  }

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    LabeledSample s;
    if (std::sscanf(line.c_str(), "%d,%d", &s.subject_id, &s.label) != 2) {
      parse_error(path, lineno, "expected '<subject_id>,<label>'");
    }
    if (s.label < 0 || s.label >= data.classes) parse_error(path, lineno, "label out of range");
    if (s.subject_id < 0) parse_error(path, lineno, "negative subject id");

    s.x = Tensor::zeros({data.timesteps, data.channels});
    for (int t = 0; t < data.timesteps; ++t) {
      if (!std::getline(in, line)) parse_error(path, lineno + 1, "truncated sample");
      ++lineno;
      const char* p = line.c_str();
      const char* end = p + line.size();
      for (int c = 0; c < data.channels; ++c) {
        double v = 0.0;
        auto [next, ec] = std::from_chars(p, end, v);
        if (ec != std::errc{}) parse_error(path, lineno, "bad number in column " + std::to_string(c));
        s.x.at(t, c) = v;
        p = next;
        if (c + 1 < data.channels) {
          if (p >= end || *p != ',') parse_error(path, lineno, "expected comma after column " + std::to_string(c));
          ++p;
        }
      }
      if (p != end) parse_error(path, lineno, "trailing characters");
    }
    data.samples.push_back(std::move(s));
  }
  return data;
}

}  // namespace tech
