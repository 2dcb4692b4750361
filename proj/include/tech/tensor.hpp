#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace tech {

/// Dense row-major tensor of 64-bit floats. Copies are shallow (shared
/// storage); use clone() for an independent buffer. A tensor either is a
/// leaf (parameter or input, created through the factories below) or the
/// output of an op recorded on a Graph.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<std::int64_t> shape, bool requires_grad = false);
  static Tensor full(std::vector<std::int64_t> shape, double value, bool requires_grad = false);
  static Tensor from_data(std::vector<std::int64_t> shape, std::vector<double> values,
                          bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  /// Uniform on [lo, hi); the initializer used for all learned weights.
  static Tensor uniform(std::vector<std::int64_t> shape, double lo, double hi,
                        std::mt19937_64& rng, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(d_); }
  const std::vector<std::int64_t>& shape() const;
  std::int64_t rank() const;
  std::int64_t size() const;
  /// Extent along one axis.
  std::int64_t extent(std::int64_t axis) const;

  std::span<const double> data() const;
  std::span<double> data();

  bool requires_grad() const;
  bool has_grad() const;
  std::span<const double> grad() const;
  std::span<double> grad();
  /// Allocates the gradient buffer if absent; zeroes it otherwise.
  void zero_grad();
  /// Accumulates into the gradient buffer, allocating it on first use.
  void accumulate_grad(std::span<const double> g);

  double item() const;                              // scalar tensors only
  double at(std::int64_t i) const;                  // rank 1
  double at(std::int64_t i, std::int64_t j) const;  // rank 2
  double& at(std::int64_t i);
  double& at(std::int64_t i, std::int64_t j);

  Tensor clone() const;
  /// True when both handles refer to the same storage.
  bool same_storage(const Tensor& other) const { return d_ == other.d_; }

 private:
  struct Data {
    std::vector<std::int64_t> shape;
    std::vector<double> values;
    std::vector<double> grad;  // same length as values once allocated
    bool requires_grad = false;
  };
  explicit Tensor(std::shared_ptr<Data> d) : d_(std::move(d)) {}
  std::shared_ptr<Data> d_;
};

/// Renders a shape as e.g. "[3x4]" for error messages.
std::string shape_str(const std::vector<std::int64_t>& shape);

/// Book-keeping collected while ops execute on a Graph. Element counts
/// cover op outputs only (leaves are owned by the caller); the MAC count
/// covers forward matrix products (m*k*n per matmul).
struct GraphStats {
  std::int64_t live_elements = 0;
  std::int64_t peak_live_elements = 0;
  std::int64_t max_single_tensor = 0;
  std::int64_t forward_macs = 0;
};

/// Dynamic tape for one forward trace. Ops append themselves in execution
/// order, which is automatically topological; backward() replays the
/// adjoints once, in reverse. A Graph and the tensors recorded on it belong
/// to a single thread; independent Graphs may run concurrently.
class Graph {
 public:
  explicit Graph(bool recording = true) : recording_(recording) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Seeds d(loss)/d(loss) = 1 and accumulates adjoints into every
  /// requires-grad tensor reachable from the trace. The loss must be a
  /// scalar recorded on this graph; a second call without a new trace
  /// throws.
  void backward(const Tensor& loss);

  bool recording() const { return recording_; }
  const GraphStats& stats() const { return stats_; }
  std::int64_t mac_count() const { return stats_.forward_macs; }

  // Used by op implementations.
  void record(std::function<void()> adjoint);
  void track_output(const Tensor& t);
  void add_macs(std::int64_t n) { stats_.forward_macs += n; }

 private:
  std::vector<std::function<void()>> tape_;
  GraphStats stats_;
  bool recording_ = true;
  bool backward_done_ = false;
};

// --- Ops -------------------------------------------------------------
// Free functions; each validates shapes, computes the forward value,
// tracks the output with the graph's accountant, and (when recording and
// at least one input requires grad) appends its adjoint to the tape.

Tensor matmul(Graph& g, const Tensor& a, const Tensor& b);
Tensor transpose(Graph& g, const Tensor& x);
/// Elementwise product; shapes must match.
Tensor mul(Graph& g, const Tensor& a, const Tensor& b);
/// Elementwise sum; shapes must match.
Tensor add(Graph& g, const Tensor& a, const Tensor& b);
/// Adds a length-D bias to every row of an SxD matrix.
Tensor add_bias(Graph& g, const Tensor& x, const Tensor& bias);
Tensor scale(Graph& g, const Tensor& x, double factor);
/// tanh-approximation GELU: 0.5*x*(1 + tanh(sqrt(2/pi)*(x + 0.044715*x^3))).
Tensor gelu(Graph& g, const Tensor& x);
/// Softmax along `axis` with max-subtraction; every slice sums to 1.
Tensor softmax(Graph& g, const Tensor& x, std::int64_t axis);

enum class ReduceKind { kSum, kMean };
/// Removes `axis`; rank 2 -> rank 1, rank 1 -> scalar.
Tensor reduce(Graph& g, const Tensor& x, std::int64_t axis, ReduceKind kind);
Tensor reduce_sum(Graph& g, const Tensor& x, std::int64_t axis);
Tensor reduce_mean(Graph& g, const Tensor& x, std::int64_t axis);

/// Concatenates two rank-2 tensors along axis 0 or 1.
Tensor concat(Graph& g, const Tensor& a, const Tensor& b, std::int64_t axis);
/// Tiles a length-d vector into a times x d matrix; the adjoint sums over copies.
Tensor repeat_rows(Graph& g, const Tensor& v, std::int64_t times);
/// Stacks equal-length vectors into a matrix, one per row.
Tensor stack_rows(Graph& g, std::span<const Tensor> rows);
/// Same data, new shape (sizes must agree).
Tensor reshape(Graph& g, const Tensor& x, std::vector<std::int64_t> shape);

/// Per-row standardization then affine map, sigma = sqrt(var + eps) with
/// eps treated as a constant by the adjoint.
Tensor layer_norm(Graph& g, const Tensor& x, const Tensor& gain, const Tensor& shift,
                  double eps = 1e-5);

/// Mean negative log-softmax of the true class over the batch, computed
/// via log-sum-exp. logits: BxK, labels: B class indices < K.
Tensor softmax_cross_entropy(Graph& g, const Tensor& logits, std::span<const int> labels);

/// Inverted dropout: keeps entries with probability 1-rate and rescales by
/// 1/(1-rate) so the eval path is the identity.
Tensor dropout(Graph& g, const Tensor& x, double rate, std::mt19937_64& rng);

struct GradCheckReport {
  double max_rel_err = 0.0;
  bool passed = false;
};

/// Compares analytic gradients of a scalar-valued trace against central
/// finite differences, entry by entry, over every tensor in `inputs`.
/// Relative error uses max(1, |analytic|, |numeric|) as the denominator.
GradCheckReport grad_check(const std::function<Tensor(Graph&)>& f, std::span<Tensor> inputs,
                           double h = 1e-5, double tol = 1e-5);

bool all_finite(std::span<const double> xs);

}  // namespace tech
