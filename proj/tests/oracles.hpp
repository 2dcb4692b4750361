// Test-only reference implementations, written as plain scalar loops with no
// dependence on the library's tensor or graph machinery. These act as
// independent oracles for the layer equations, the eigenvalue path, and the
// ranking metrics.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

namespace oracle {

struct Mat {
  std::int64_t rows = 0, cols = 0;
  std::vector<double> v;

  Mat() = default;
  Mat(std::int64_t r, std::int64_t c) : rows(r), cols(c), v(static_cast<std::size_t>(r * c), 0.0) {}
  double& at(std::int64_t r, std::int64_t c) { return v[static_cast<std::size_t>(r * cols + c)]; }
  double at(std::int64_t r, std::int64_t c) const {
    return v[static_cast<std::size_t>(r * cols + c)];
  }
};

inline double gelu(double x) {
  const double u = std::sqrt(2.0 / M_PI) * (x + 0.044715 * x * x * x);
  return 0.5 * x * (1.0 + std::tanh(u));
}

struct AttentionWeights {
  Mat wq, wk, wv;                     // D x D each
  std::vector<double> bq, bk, bv;     // D each
};

// Single-head attention, one formula at a time.
inline Mat attention_reference(const AttentionWeights& p, const Mat& x) {
  const std::int64_t s = x.rows, d = x.cols;
  Mat q(s, d), k(s, d), vv(s, d);
  for (std::int64_t i = 0; i < s; ++i) {
    for (std::int64_t j = 0; j < d; ++j) {
      double aq = p.bq[static_cast<std::size_t>(j)];
      double ak = p.bk[static_cast<std::size_t>(j)];
      double av = p.bv[static_cast<std::size_t>(j)];
      for (std::int64_t t = 0; t < d; ++t) {
        aq += x.at(i, t) * p.wq.at(t, j);
        ak += x.at(i, t) * p.wk.at(t, j);
        av += x.at(i, t) * p.wv.at(t, j);
      }
      q.at(i, j) = aq;
      k.at(i, j) = ak;
      vv.at(i, j) = av;
    }
  }
  Mat weights(s, s);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::int64_t i = 0; i < s; ++i) {
    double denom = 0.0;
    for (std::int64_t j = 0; j < s; ++j) {
      double dot = 0.0;
      for (std::int64_t t = 0; t < d; ++t) dot += q.at(i, t) * k.at(j, t);
      weights.at(i, j) = std::exp(dot * inv_sqrt_d);
      denom += weights.at(i, j);
    }
    for (std::int64_t j = 0; j < s; ++j) weights.at(i, j) /= denom;
  }
  Mat out(s, d);
  for (std::int64_t i = 0; i < s; ++i) {
    for (std::int64_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::int64_t t = 0; t < s; ++t) acc += weights.at(i, t) * vv.at(t, j);
      out.at(i, j) = acc;
    }
  }
  return out;
}

struct CotarWeights {
  Mat w1, w2, w3, w4;
  std::vector<double> b1, b2, b3, b4;
};

struct CotarReference {
  Mat out;                    // S x D
  std::vector<double> core;   // Dc
  Mat features;               // S x Dc, pre-softmax scores
};

// The aggregation-redistribution steps in order, scalar arithmetic only.
inline CotarReference cotar_reference(const CotarWeights& p, const Mat& x) {
  const std::int64_t s = x.rows, d = x.cols;
  const std::int64_t dc = p.w2.cols;

  Mat hidden(s, d);
  for (std::int64_t i = 0; i < s; ++i) {
    for (std::int64_t j = 0; j < d; ++j) {
      double acc = p.b1[static_cast<std::size_t>(j)];
      for (std::int64_t t = 0; t < d; ++t) acc += x.at(i, t) * p.w1.at(t, j);
      hidden.at(i, j) = gelu(acc);
    }
  }
  Mat features(s, dc);
  for (std::int64_t i = 0; i < s; ++i) {
    for (std::int64_t j = 0; j < dc; ++j) {
      double acc = p.b2[static_cast<std::size_t>(j)];
      for (std::int64_t t = 0; t < d; ++t) acc += hidden.at(i, t) * p.w2.at(t, j);
      features.at(i, j) = acc;
    }
  }
  // softmax over the token axis, one distribution per core dimension
  Mat weights(s, dc);
  for (std::int64_t j = 0; j < dc; ++j) {
    double denom = 0.0;
    for (std::int64_t i = 0; i < s; ++i) {
      weights.at(i, j) = std::exp(features.at(i, j));
      denom += weights.at(i, j);
    }
    for (std::int64_t i = 0; i < s; ++i) weights.at(i, j) /= denom;
  }
  std::vector<double> core(static_cast<std::size_t>(dc), 0.0);
  for (std::int64_t j = 0; j < dc; ++j) {
    for (std::int64_t i = 0; i < s; ++i) {
      core[static_cast<std::size_t>(j)] += features.at(i, j) * weights.at(i, j);
    }
  }
  Mat out(s, d);
  for (std::int64_t i = 0; i < s; ++i) {
    std::vector<double> fused(static_cast<std::size_t>(d));
    for (std::int64_t j = 0; j < d; ++j) {
      double acc = p.b3[static_cast<std::size_t>(j)];
      for (std::int64_t t = 0; t < d; ++t) acc += x.at(i, t) * p.w3.at(t, j);
      for (std::int64_t t = 0; t < dc; ++t) {
        acc += core[static_cast<std::size_t>(t)] * p.w3.at(d + t, j);
      }
      fused[static_cast<std::size_t>(j)] = gelu(acc);
    }
    for (std::int64_t j = 0; j < d; ++j) {
      double acc = p.b4[static_cast<std::size_t>(j)];
      for (std::int64_t t = 0; t < d; ++t) acc += fused[static_cast<std::size_t>(t)] * p.w4.at(t, j);
      out.at(i, j) = acc;
    }
  }
  return {std::move(out), std::move(core), std::move(features)};
}

// Cyclic Jacobi eigensolver for small symmetric matrices; returns all
// eigenvalues. Used as the reference for the power-iteration path.
inline std::vector<double> jacobi_eigenvalues(Mat a, int sweeps = 100, double tol = 1e-14) {
  if (a.rows != a.cols) throw std::invalid_argument("jacobi: matrix must be square");
  const std::int64_t n = a.rows;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double off = 0.0;
    for (std::int64_t p = 0; p < n; ++p) {
      for (std::int64_t q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
    }
    if (off < tol * tol) break;
    for (std::int64_t p = 0; p < n; ++p) {
      for (std::int64_t q = p + 1; q < n; ++q) {
        if (a.at(p, q) == 0.0) continue;
        const double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * a.at(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::int64_t i = 0; i < n; ++i) {
          const double aip = a.at(i, p), aiq = a.at(i, q);
          a.at(i, p) = c * aip - s * aiq;
          a.at(i, q) = s * aip + c * aiq;
        }
        for (std::int64_t i = 0; i < n; ++i) {
          const double api = a.at(p, i), aqi = a.at(q, i);
          a.at(p, i) = c * api - s * aqi;
          a.at(q, i) = s * api + c * aqi;
        }
      }
    }
  }
  std::vector<double> eig(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) eig[static_cast<std::size_t>(i)] = a.at(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

// AUROC by explicit enumeration of positive/negative pairs.
inline double auroc_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
  double concordant = 0.0, tied = 0.0;
  std::int64_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) continue;
    ++pos;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] == 1) continue;
      if (scores[i] > scores[j]) concordant += 1.0;
      else if (scores[i] == scores[j]) tied += 1.0;
    }
  }
  for (int l : labels) neg += l == 1 ? 0 : 1;
  if (pos == 0 || neg == 0) throw std::invalid_argument("auroc_pairs: needs both classes");
  return (concordant + 0.5 * tied) / (static_cast<double>(pos) * static_cast<double>(neg));
}

// Average precision via a fresh scan per distinct threshold (descending),
// AP = sum over thresholds of (R_t - R_{t-1}) * P_t.
inline double auprc_stepwise(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::int64_t total_pos = 0;
  for (int l : labels) total_pos += l == 1 ? 1 : 0;
  if (total_pos == 0 || total_pos == static_cast<std::int64_t>(labels.size())) {
    throw std::invalid_argument("auprc_stepwise: needs both classes");
  }
  std::set<double, std::greater<double>> thresholds(scores.begin(), scores.end());
  double ap = 0.0, prev_recall = 0.0;
  for (double th : thresholds) {
    std::int64_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= th) {
        if (labels[i] == 1) ++tp;
        else ++fp;
      }
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

}  // namespace oracle
