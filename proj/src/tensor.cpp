#include "tech/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tech {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatView = Eigen::Map<RowMat>;
using ConstMatView = Eigen::Map<const RowMat>;

constexpr double kGeluScale = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluCubic = 0.044715;

std::int64_t shape_size(const std::vector<std::int64_t>& shape) {
  std::int64_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

void check_positive_extents(const std::vector<std::int64_t>& shape) {
  for (auto e : shape) {
    if (e <= 0) {
      throw std::invalid_argument("tensor extents must be positive, got " + shape_str(shape));
    }
  }
}

[[noreturn]] void shape_error(const std::string& op, const std::vector<std::int64_t>& a,
                              const std::vector<std::int64_t>& b) {
  throw std::invalid_argument(op + ": incompatible shapes " + shape_str(a) + " and " +
                              shape_str(b));
}

void require_rank(const std::string& op, const Tensor& t, std::int64_t r) {
  if (t.rank() != r) {
    throw std::invalid_argument(op + ": expected rank " + std::to_string(r) + " tensor, got " +
                                shape_str(t.shape()));
  }
}

std::span<double> ensure_grad(Tensor& t) {
  if (!t.has_grad()) t.zero_grad();
  return t.grad();
}

ConstMatView mat_view(const Tensor& t) {
  return ConstMatView(t.data().data(), t.extent(0), t.extent(1));
}

MatView grad_mat_view(Tensor& t) {
  auto g = ensure_grad(t);
  return MatView(g.data(), t.extent(0), t.extent(1));
}

ConstMatView grad_as_mat(const Tensor& t) {
  return ConstMatView(t.grad().data(), t.extent(0), t.extent(1));
}

bool track(Graph& g, Tensor& out, std::initializer_list<const Tensor*> inputs) {
  g.track_output(out);
  if (!g.recording()) return false;
  bool any = false;
  for (const Tensor* in : inputs) any = any || in->requires_grad();
  return any;
}

Tensor make_output(std::vector<std::int64_t> shape, bool requires_grad) {
  return Tensor::zeros(std::move(shape), requires_grad);
}

}  // namespace

std::string shape_str(const std::vector<std::int64_t>& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

// --- Tensor ----------------------------------------------------------

Tensor Tensor::zeros(std::vector<std::int64_t> shape, bool requires_grad) {
  check_positive_extents(shape);
  auto d = std::make_shared<Data>();
  d->values.assign(static_cast<std::size_t>(shape_size(shape)), 0.0);
  d->shape = std::move(shape);
  d->requires_grad = requires_grad;
  return Tensor(std::move(d));
}

Tensor Tensor::full(std::vector<std::int64_t> shape, double value, bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  std::ranges::fill(t.data(), value);
  return t;
}

Tensor Tensor::from_data(std::vector<std::int64_t> shape, std::vector<double> values,
                         bool requires_grad) {
  check_positive_extents(shape);
  if (shape_size(shape) != static_cast<std::int64_t>(values.size())) {
    throw std::invalid_argument("from_data: " + shape_str(shape) + " needs " +
                                std::to_string(shape_size(shape)) + " values, got " +
                                std::to_string(values.size()));
  }
  auto d = std::make_shared<Data>();
  d->shape = std::move(shape);
  d->values = std::move(values);
  d->requires_grad = requires_grad;
  return Tensor(std::move(d));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from_data({}, {value}, requires_grad);
}

Tensor Tensor::uniform(std::vector<std::int64_t> shape, double lo, double hi, std::mt19937_64& rng,
                       bool requires_grad) {
  Tensor t = zeros(std::move(shape), requires_grad);
  std::uniform_real_distribution<double> dist(lo, hi);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

const std::vector<std::int64_t>& Tensor::shape() const { return d_->shape; }
std::int64_t Tensor::rank() const { return static_cast<std::int64_t>(d_->shape.size()); }
std::int64_t Tensor::size() const { return static_cast<std::int64_t>(d_->values.size()); }

std::int64_t Tensor::extent(std::int64_t axis) const {
  if (axis < 0 || axis >= rank()) throw std::invalid_argument("extent: axis out of range");
  return d_->shape[static_cast<std::size_t>(axis)];
}

std::span<const double> Tensor::data() const { return d_->values; }
std::span<double> Tensor::data() { return d_->values; }

bool Tensor::requires_grad() const { return d_ && d_->requires_grad; }
bool Tensor::has_grad() const { return d_ && !d_->grad.empty(); }

std::span<const double> Tensor::grad() const {
  if (!has_grad()) throw std::runtime_error("grad(): no gradient buffer present");
  return d_->grad;
}

std::span<double> Tensor::grad() {
  if (!has_grad()) throw std::runtime_error("grad(): no gradient buffer present");
  return d_->grad;
}

void Tensor::zero_grad() { d_->grad.assign(d_->values.size(), 0.0); }

void Tensor::accumulate_grad(std::span<const double> g) {
  if (g.size() != d_->values.size()) throw std::invalid_argument("accumulate_grad: size mismatch");
  if (d_->grad.empty()) d_->grad.assign(d_->values.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) d_->grad[i] += g[i];
}

double Tensor::item() const {
  if (size() != 1) {
    throw std::invalid_argument("item(): tensor has " + std::to_string(size()) + " elements");
  }
  return d_->values[0];
}

double Tensor::at(std::int64_t i) const { return d_->values[static_cast<std::size_t>(i)]; }
double& Tensor::at(std::int64_t i) { return d_->values[static_cast<std::size_t>(i)]; }

double Tensor::at(std::int64_t i, std::int64_t j) const {
  return d_->values[static_cast<std::size_t>(i * d_->shape[1] + j)];
}

double& Tensor::at(std::int64_t i, std::int64_t j) {
  return d_->values[static_cast<std::size_t>(i * d_->shape[1] + j)];
}

Tensor Tensor::clone() const {
  auto d = std::make_shared<Data>(*d_);
  return Tensor(std::move(d));
}

// --- Graph ------------------------------------------------------------

void Graph::record(std::function<void()> adjoint) {
  if (!recording_) return;
  tape_.push_back(std::move(adjoint));
}

void Graph::track_output(const Tensor& t) {
  stats_.live_elements += t.size();
  stats_.peak_live_elements = std::max(stats_.peak_live_elements, stats_.live_elements);
  stats_.max_single_tensor = std::max(stats_.max_single_tensor, t.size());
}

void Graph::backward(const Tensor& loss) {
  if (!recording_) throw std::runtime_error("backward: graph was created non-recording");
  if (backward_done_) throw std::runtime_error("backward: already run for this trace");
  if (!loss.defined() || loss.size() != 1) {
    throw std::invalid_argument("backward: loss must be a scalar tensor");
  }
  backward_done_ = true;
  Tensor seed = loss;
  seed.zero_grad();
  seed.grad()[0] = 1.0;
  for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) (*it)();
}

// --- Ops ----------------------------------------------------------------

Tensor matmul(Graph& g, const Tensor& a, const Tensor& b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  if (a.extent(1) != b.extent(0)) shape_error("matmul", a.shape(), b.shape());
  const std::int64_t m = a.extent(0), k = a.extent(1), n = b.extent(1);

  Tensor out = make_output({m, n}, g.recording() && (a.requires_grad() || b.requires_grad()));
  MatView(out.data().data(), m, n).noalias() = mat_view(a) * mat_view(b);
  g.add_macs(m * k * n);

  if (track(g, out, {&a, &b})) {
    g.record([a = a, b = b, out]() mutable {
      if (!out.has_grad()) return;
      auto go = grad_as_mat(out);
      if (a.requires_grad()) grad_mat_view(a).noalias() += go * mat_view(b).transpose();
      if (b.requires_grad()) grad_mat_view(b).noalias() += mat_view(a).transpose() * go;
    });
  }
  return out;
}

Tensor transpose(Graph& g, const Tensor& x) {
  require_rank("transpose", x, 2);
  const std::int64_t r = x.extent(0), c = x.extent(1);
  Tensor out = make_output({c, r}, g.recording() && x.requires_grad());
  MatView(out.data().data(), c, r).noalias() = mat_view(x).transpose();

  if (track(g, out, {&x})) {
    g.record([x = x, out]() mutable {
      if (!out.has_grad()) return;
      grad_mat_view(x).noalias() += grad_as_mat(out).transpose();
    });
  }
  return out;
}

Tensor mul(Graph& g, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("mul", a.shape(), b.shape());
  Tensor out = make_output(a.shape(), g.recording() && (a.requires_grad() || b.requires_grad()));
  auto av = a.data(), bv = b.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];

  if (track(g, out, {&a, &b})) {
    g.record([a = a, b = b, out]() mutable {
      if (!out.has_grad()) return;
      auto go = out.grad();
      if (a.requires_grad()) {
        auto ga = ensure_grad(a);
        auto bv2 = b.data();
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += go[i] * bv2[i];
      }
      if (b.requires_grad()) {
        auto gb = ensure_grad(b);
        auto av2 = a.data();
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += go[i] * av2[i];
      }
    });
  }
  return out;
}

Tensor add(Graph& g, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("add", a.shape(), b.shape());
  Tensor out = make_output(a.shape(), g.recording() && (a.requires_grad() || b.requires_grad()));
  auto av = a.data(), bv = b.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] + bv[i];

  if (track(g, out, {&a, &b})) {
    g.record([a = a, b = b, out]() mutable {
      if (!out.has_grad()) return;
      auto go = out.grad();
      if (a.requires_grad()) a.accumulate_grad(go);
      if (b.requires_grad()) b.accumulate_grad(go);
    });
  }
  return out;
}

Tensor add_bias(Graph& g, const Tensor& x, const Tensor& bias) {
  require_rank("add_bias", x, 2);
  require_rank("add_bias", bias, 1);
  if (x.extent(1) != bias.extent(0)) shape_error("add_bias", x.shape(), bias.shape());
  const std::int64_t rows = x.extent(0), cols = x.extent(1);

  Tensor out = make_output(x.shape(), g.recording() && (x.requires_grad() || bias.requires_grad()));
  auto xv = x.data(), bv = bias.data();
  auto ov = out.data();
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t c = 0; c < cols; ++c) ov[r * cols + c] = xv[r * cols + c] + bv[c];
  }

  if (track(g, out, {&x, &bias})) {
    g.record([x = x, bias = bias, out, rows, cols]() mutable {
      if (!out.has_grad()) return;
      auto go = out.grad();
      if (x.requires_grad()) x.accumulate_grad(go);
      if (bias.requires_grad()) {
        auto gb = ensure_grad(bias);
        for (std::int64_t r = 0; r < rows; ++r) {
          for (std::int64_t c = 0; c < cols; ++c) gb[c] += go[r * cols + c];
        }
      }
    });
  }
  return out;
}

Tensor scale(Graph& g, const Tensor& x, double factor) {
  Tensor out = make_output(x.shape(), g.recording() && x.requires_grad());
  auto xv = x.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = factor * xv[i];

  if (track(g, out, {&x})) {
    g.record([x = x, out, factor]() mutable {
      if (!out.has_grad()) return;
      auto go = out.grad();
      auto gx = ensure_grad(x);
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += factor * go[i];
    });
  }
  return out;
}

Tensor gelu(Graph& g, const Tensor& x) {
  Tensor out = make_output(x.shape(), g.recording() && x.requires_grad());
  auto xv = x.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) {
    const double v = xv[i];
    const double u = kGeluScale * (v + kGeluCubic * v * v * v);
    ov[i] = 0.5 * v * (1.0 + std::tanh(u));
  }

  if (track(g, out, {&x})) {
    g.record([x = x, out]() mutable {
      if (!out.has_grad()) return;
      auto go = out.grad();
      auto gx = ensure_grad(x);
      auto xv2 = x.data();
      for (std::size_t i = 0; i < gx.size(); ++i) {
        const double v = xv2[i];
        const double u = kGeluScale * (v + kGeluCubic * v * v * v);
        const double t = std::tanh(u);
        const double du = kGeluScale * (1.0 + 3.0 * kGeluCubic * v * v);
        gx[i] += go[i] * (0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * du);
      }
    });
  }
  return out;
}

namespace {

// Shared slice walker: softmax over `axis` of a rank-1 or rank-2 tensor.
// Calls fn(offset, stride, len) for each slice.
template <typename Fn>
void for_each_slice(const std::vector<std::int64_t>& shape, std::int64_t axis, Fn&& fn) {
  if (shape.size() == 1) {
    fn(0, 1, shape[0]);
    return;
  }
  const std::int64_t rows = shape[0], cols = shape[1];
  if (axis == 0) {
    for (std::int64_t c = 0; c < cols; ++c) fn(c, cols, rows);
  } else {
    for (std::int64_t r = 0; r < rows; ++r) fn(r * cols, 1, cols);
  }
}

}  // namespace

Tensor softmax(Graph& g, const Tensor& x, std::int64_t axis) {
  if (x.rank() != 1 && x.rank() != 2) {
    throw std::invalid_argument("softmax: expected rank 1 or 2, got " + shape_str(x.shape()));
  }
  if (axis < 0 || axis >= x.rank()) {
    throw std::invalid_argument("softmax: axis " + std::to_string(axis) + " out of range for " +
                                shape_str(x.shape()));
  }

  Tensor out = make_output(x.shape(), g.recording() && x.requires_grad());
  auto xv = x.data();
  auto ov = out.data();
  for_each_slice(x.shape(), axis, [&](std::int64_t off, std::int64_t stride, std::int64_t len) {
    double mx = xv[off];
    for (std::int64_t i = 1; i < len; ++i) mx = std::max(mx, xv[off + i * stride]);
    double denom = 0.0;
    for (std::int64_t i = 0; i < len; ++i) {
      const double e = std::exp(xv[off + i * stride] - mx);
      ov[off + i * stride] = e;
      denom += e;
    }
    for (std::int64_t i = 0; i < len; ++i) ov[off + i * stride] /= denom;
  });

  if (track(g, out, {&x})) {
    g.record([x = x, out, axis]() mutable {
      if (!out.has_grad()) return;
      auto go = out.grad();
      auto yv = out.data();
      auto gx = ensure_grad(x);
      for_each_slice(out.shape(), axis,
                     [&](std::int64_t off, std::int64_t stride, std::int64_t len) {
                       double dot = 0.0;
                       for (std::int64_t i = 0; i < len; ++i) {
                         dot += go[off + i * stride] * yv[off + i * stride];
                       }
                       for (std::int64_t i = 0; i < len; ++i) {
                         const auto k = off + i * stride;
                         gx[k] += yv[k] * (go[k] - dot);
                       }
                     });
    });
  }
  return out;
}

Tensor reduce(Graph& g, const Tensor& x, std::int64_t axis, ReduceKind kind) {
  if (x.rank() != 1 && x.rank() != 2) {
    throw std::invalid_argument("reduce: expected rank 1 or 2, got " + shape_str(x.shape()));
  }
  if (axis < 0 || axis >= x.rank()) {
    throw std::invalid_argument("reduce: axis " + std::to_string(axis) + " out of range for " +
                                shape_str(x.shape()));
  }
  const std::int64_t extent = x.extent(axis);
  const double weight = kind == ReduceKind::kMean ? 1.0 / static_cast<double>(extent) : 1.0;

  std::vector<std::int64_t> out_shape;
  if (x.rank() == 2) out_shape.push_back(x.extent(axis == 0 ? 1 : 0));

  Tensor out = make_output(out_shape, g.recording() && x.requires_grad());
  auto xv = x.data();
  auto ov = out.data();
  if (x.rank() == 1) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < extent; ++i) acc += xv[i];
    ov[0] = acc * weight;
  } else {
    const std::int64_t rows = x.extent(0), cols = x.extent(1);
    if (axis == 0) {
      for (std::int64_t c = 0; c < cols; ++c) {
        double acc = 0.0;
        for (std::int64_t r = 0; r < rows; ++r) acc += xv[r * cols + c];
        ov[c] = acc * weight;
      }
    } else {
      for (std::int64_t r = 0; r < rows; ++r) {
        double acc = 0.0;
        for (std::int64_t c = 0; c < cols; ++c) acc += xv[r * cols + c];
        ov[r] = acc * weight;
      }
    }
  }

  if (track(g, out, {&x})) {
    g.record([x = x, out, axis, weight]() mutable {
      if (!out.has_grad()) return;
      auto go = out.grad();
      auto gx = ensure_grad(x);
      if (x.rank() == 1) {
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go[0] * weight;
      } else {
        const std::int64_t rows = x.extent(0), cols = x.extent(1);
        for (std::int64_t r = 0; r < rows; ++r) {
          for (std::int64_t c = 0; c < cols; ++c) {
            gx[r * cols + c] += go[axis == 0 ? c : r] * weight;
          }
        }
      }
    });
  }
  return out;
}

Tensor reduce_sum(Graph& g, const Tensor& x, std::int64_t axis) {
  return reduce(g, x, axis, ReduceKind::kSum);
}

Tensor reduce_mean(Graph& g, const Tensor& x, std::int64_t axis) {
  return reduce(g, x, axis, ReduceKind::kMean);
}

Tensor concat(Graph& g, const Tensor& a, const Tensor& b, std::int64_t axis) {
  require_rank("concat", a, 2);
  require_rank("concat", b, 2);
  if (axis != 0 && axis != 1) throw std::invalid_argument("concat: axis must be 0 or 1");
  const std::int64_t other = axis == 0 ? 1 : 0;
  if (a.extent(other) != b.extent(other)) shape_error("concat", a.shape(), b.shape());

  std::vector<std::int64_t> out_shape = a.shape();
  out_shape[static_cast<std::size_t>(axis)] += b.extent(axis);
  Tensor out = make_output(out_shape, g.recording() && (a.requires_grad() || b.requires_grad()));

  const std::int64_t rows = out.extent(0), cols = out.extent(1);
  auto av = a.data(), bv = b.data();
  auto ov = out.data();
  if (axis == 0) {
    std::ranges::copy(av, ov.begin());
    std::ranges::copy(bv, ov.begin() + av.size());
  } else {
    const std::int64_t ca = a.extent(1);
    for (std::int64_t r = 0; r < rows; ++r) {
      for (std::int64_t c = 0; c < ca; ++c) ov[r * cols + c] = av[r * ca + c];
      for (std::int64_t c = ca; c < cols; ++c) ov[r * cols + c] = bv[r * (cols - ca) + c - ca];
    }
  }

  if (track(g, out, {&a, &b})) {
    g.record([a = a, b = b, out, axis]() mutable {
      if (!out.has_grad()) return;
      auto go = out.grad();
      const std::int64_t rows = out.extent(0), cols = out.extent(1);
      if (axis == 0) {
        const std::size_t na = a.data().size();
        if (a.requires_grad()) a.accumulate_grad(go.subspan(0, na));
        if (b.requires_grad()) b.accumulate_grad(go.subspan(na));
      } else {
        const std::int64_t ca = a.extent(1);
        if (a.requires_grad()) {
          auto ga = ensure_grad(a);
          for (std::int64_t r = 0; r < rows; ++r) {
            for (std::int64_t c = 0; c < ca; ++c) ga[r * ca + c] += go[r * cols + c];
          }
        }
        if (b.requires_grad()) {
          auto gb = ensure_grad(b);
          const std::int64_t cb = cols - ca;
          for (std::int64_t r = 0; r < rows; ++r) {
            for (std::int64_t c = 0; c < cb; ++c) gb[r * cb + c] += go[r * cols + ca + c];
          }
        }
      }
    });
  }
  return out;
}

Tensor repeat_rows(Graph& g, const Tensor& v, std::int64_t times) {
  require_rank("repeat_rows", v, 1);
  if (times < 1) throw std::invalid_argument("repeat_rows: times must be >= 1");
  const std::int64_t d = v.extent(0);

  Tensor out = make_output({times, d}, g.recording() && v.requires_grad());
  auto vv = v.data();
  auto ov = out.data();
  for (std::int64_t r = 0; r < times; ++r) {
    std::ranges::copy(vv, ov.begin() + r * d);
  }

  if (track(g, out, {&v})) {
    g.record([v = v, out, times, d]() mutable {
      if (!out.has_grad()) return;
      auto go = out.grad();
      auto gv = ensure_grad(v);
      for (std::int64_t r = 0; r < times; ++r) {
        for (std::int64_t c = 0; c < d; ++c) gv[c] += go[r * d + c];
      }
    });
  }
  return out;
}

Tensor stack_rows(Graph& g, std::span<const Tensor> rows) {
  if (rows.empty()) throw std::invalid_argument("stack_rows: need at least one row");
  const std::int64_t d = rows[0].extent(0);
  bool any_grad = false;
  for (const Tensor& r : rows) {
    require_rank("stack_rows", r, 1);
    if (r.extent(0) != d) shape_error("stack_rows", rows[0].shape(), r.shape());
    any_grad = any_grad || r.requires_grad();
  }
  const std::int64_t n = static_cast<std::int64_t>(rows.size());

  Tensor out = make_output({n, d}, g.recording() && any_grad);
  auto ov = out.data();
  for (std::int64_t r = 0; r < n; ++r) {
    std::ranges::copy(rows[static_cast<std::size_t>(r)].data(), ov.begin() + r * d);
  }

  g.track_output(out);
  if (g.recording() && any_grad) {
    std::vector<Tensor> captured(rows.begin(), rows.end());
    g.record([captured = std::move(captured), out, d]() mutable {
      if (!out.has_grad()) return;
      auto go = out.grad();
      for (std::size_t r = 0; r < captured.size(); ++r) {
        if (captured[r].requires_grad()) {
          captured[r].accumulate_grad(go.subspan(r * static_cast<std::size_t>(d),
                                                 static_cast<std::size_t>(d)));
        }
      }
    });
  }
  return out;
}

Tensor reshape(Graph& g, const Tensor& x, std::vector<std::int64_t> shape) {
  check_positive_extents(shape);
  if (shape_size(shape) != x.size()) {
    shape_error("reshape", x.shape(), shape);
  }
  Tensor out = make_output(shape, g.recording() && x.requires_grad());
  std::ranges::copy(x.data(), out.data().begin());

  if (track(g, out, {&x})) {
    g.record([x = x, out]() mutable {
      if (!out.has_grad()) return;
      x.accumulate_grad(out.grad());
    });
  }
  return out;
}

Tensor layer_norm(Graph& g, const Tensor& x, const Tensor& gain, const Tensor& shift, double eps) {
  require_rank("layer_norm", x, 2);
  require_rank("layer_norm", gain, 1);
  require_rank("layer_norm", shift, 1);
  if (eps <= 0) throw std::invalid_argument("layer_norm: eps must be positive");
  const std::int64_t rows = x.extent(0), cols = x.extent(1);
  if (gain.extent(0) != cols || shift.extent(0) != cols) {
    shape_error("layer_norm", x.shape(), gain.shape());
  }

  const bool rec =
      g.recording() && (x.requires_grad() || gain.requires_grad() || shift.requires_grad());
  Tensor out = make_output(x.shape(), rec);
  // Standardized values and the inverse sigma per row, kept for the adjoint.
  auto normed = std::make_shared<std::vector<double>>(static_cast<std::size_t>(rows * cols));
  auto inv_sigma = std::make_shared<std::vector<double>>(static_cast<std::size_t>(rows));

  auto xv = x.data();
  auto gv = gain.data();
  auto sv = shift.data();
  auto ov = out.data();
  for (std::int64_t r = 0; r < rows; ++r) {
    double mean = 0.0;
    for (std::int64_t c = 0; c < cols; ++c) mean += xv[r * cols + c];
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (std::int64_t c = 0; c < cols; ++c) {
      const double d = xv[r * cols + c] - mean;
      var += d * d;
    }
    var /= static_cast<double>(cols);
    const double inv = 1.0 / std::sqrt(var + eps);
    (*inv_sigma)[static_cast<std::size_t>(r)] = inv;
    for (std::int64_t c = 0; c < cols; ++c) {
      const double n = (xv[r * cols + c] - mean) * inv;
      (*normed)[static_cast<std::size_t>(r * cols + c)] = n;
      ov[r * cols + c] = n * gv[c] + sv[c];
    }
  }

  if (track(g, out, {&x, &gain, &shift})) {
    g.record([x = x, gain = gain, shift = shift, out, normed, inv_sigma, rows, cols]() mutable {
      if (!out.has_grad()) return;
      auto go = out.grad();
      auto gv2 = gain.data();
      if (gain.requires_grad()) {
        auto gg = ensure_grad(gain);
        for (std::int64_t r = 0; r < rows; ++r) {
          for (std::int64_t c = 0; c < cols; ++c) {
            gg[c] += go[r * cols + c] * (*normed)[static_cast<std::size_t>(r * cols + c)];
          }
        }
      }
      if (shift.requires_grad()) {
        auto gs = ensure_grad(shift);
        for (std::int64_t r = 0; r < rows; ++r) {
          for (std::int64_t c = 0; c < cols; ++c) gs[c] += go[r * cols + c];
        }
      }
      if (x.requires_grad()) {
        auto gx = ensure_grad(x);
        for (std::int64_t r = 0; r < rows; ++r) {
          const double inv = (*inv_sigma)[static_cast<std::size_t>(r)];
          double mean_h = 0.0, mean_hn = 0.0;
          for (std::int64_t c = 0; c < cols; ++c) {
            const double h = go[r * cols + c] * gv2[c];
            mean_h += h;
            mean_hn += h * (*normed)[static_cast<std::size_t>(r * cols + c)];
          }
          mean_h /= static_cast<double>(cols);
          mean_hn /= static_cast<double>(cols);
          for (std::int64_t c = 0; c < cols; ++c) {
            const double h = go[r * cols + c] * gv2[c];
            const double n = (*normed)[static_cast<std::size_t>(r * cols + c)];
            gx[r * cols + c] += inv * (h - mean_h - n * mean_hn);
          }
        }
      }
    });
  }
  return out;
}

Tensor softmax_cross_entropy(Graph& g, const Tensor& logits, std::span<const int> labels) {
  require_rank("softmax_cross_entropy", logits, 2);
  const std::int64_t batch = logits.extent(0), classes = logits.extent(1);
  if (static_cast<std::int64_t>(labels.size()) != batch) {
    throw std::invalid_argument("softmax_cross_entropy: expected " + std::to_string(batch) +
                                " labels, got " + std::to_string(labels.size()));
  }
  for (int y : labels) {
    if (y < 0 || y >= classes) {
      throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(y) +
                                  " out of range for " + std::to_string(classes) + " classes");
    }
  }

  Tensor out = make_output({}, g.recording() && logits.requires_grad());
  auto probs = std::make_shared<std::vector<double>>(static_cast<std::size_t>(batch * classes));
  auto zv = logits.data();
  double loss = 0.0;
  for (std::int64_t b = 0; b < batch; ++b) {
    double mx = zv[b * classes];
    for (std::int64_t k = 1; k < classes; ++k) mx = std::max(mx, zv[b * classes + k]);
    double denom = 0.0;
    for (std::int64_t k = 0; k < classes; ++k) denom += std::exp(zv[b * classes + k] - mx);
    const double lse = mx + std::log(denom);
    loss += lse - zv[b * classes + labels[static_cast<std::size_t>(b)]];
    for (std::int64_t k = 0; k < classes; ++k) {
      (*probs)[static_cast<std::size_t>(b * classes + k)] = std::exp(zv[b * classes + k] - lse);
    }
  }
  out.data()[0] = loss / static_cast<double>(batch);

  if (track(g, out, {&logits})) {
    std::vector<int> ys(labels.begin(), labels.end());
    g.record([logits = logits, out, probs, ys = std::move(ys), batch, classes]() mutable {
      if (!out.has_grad()) return;
      const double gs = out.grad()[0] / static_cast<double>(batch);
      auto gz = ensure_grad(logits);
      for (std::int64_t b = 0; b < batch; ++b) {
        for (std::int64_t k = 0; k < classes; ++k) {
          const double onehot = k == ys[static_cast<std::size_t>(b)] ? 1.0 : 0.0;
          gz[b * classes + k] +=
              gs * ((*probs)[static_cast<std::size_t>(b * classes + k)] - onehot);
        }
      }
    });
  }
  return out;
}

Tensor dropout(Graph& g, const Tensor& x, double rate, std::mt19937_64& rng) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout: rate must be in [0,1)");
  if (rate == 0.0) return x;

  const double keep = 1.0 - rate;
  auto mask = std::make_shared<std::vector<double>>(static_cast<std::size_t>(x.size()));
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (double& m : *mask) m = dist(rng) < keep ? 1.0 / keep : 0.0;

  Tensor out = make_output(x.shape(), g.recording() && x.requires_grad());
  auto xv = x.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = xv[i] * (*mask)[i];

  if (track(g, out, {&x})) {
    g.record([x = x, out, mask]() mutable {
      if (!out.has_grad()) return;
      auto go = out.grad();
      auto gx = ensure_grad(x);
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go[i] * (*mask)[i];
    });
  }
  return out;
}

GradCheckReport grad_check(const std::function<Tensor(Graph&)>& f, std::span<Tensor> inputs,
                           double h, double tol) {
  for (Tensor& t : inputs) {
    if (!t.requires_grad()) {
      throw std::invalid_argument("grad_check: every checked input must require grad");
    }
    t.zero_grad();
  }

  std::vector<std::vector<double>> analytic;
  {
    Graph g;
    Tensor loss = f(g);
    g.backward(loss);
    for (Tensor& t : inputs) {
      analytic.emplace_back(t.has_grad() ? std::vector<double>(t.grad().begin(), t.grad().end())
                                         : std::vector<double>(t.data().size(), 0.0));
    }
  }

  auto eval = [&]() {
    Graph g(false);
    return f(g).item();
  };

  GradCheckReport report;
  for (std::size_t ti = 0; ti < inputs.size(); ++ti) {
    auto xs = inputs[ti].data();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double saved = xs[i];
      xs[i] = saved + h;
      const double up = eval();
      xs[i] = saved - h;
      const double down = eval();
      xs[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic[ti][i];
      const double rel =
          std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
      report.max_rel_err = std::max(report.max_rel_err, rel);
    }
  }
  report.passed = report.max_rel_err < tol;
  return report;
}

bool all_finite(std::span<const double> xs) {
  return std::ranges::all_of(xs, [](double v) { return std::isfinite(v); });
}

}  // namespace tech
