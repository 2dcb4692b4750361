#include "tech/tokenizer.hpp"

#include <stdexcept>
#include <string>

#include "tech/layers.hpp"

namespace tech {

TemporalTokenizer TemporalTokenizer::init(int timesteps, int channels, int patch_len,
                                          int model_dim, std::mt19937_64& rng) {
  if (timesteps < 1 || channels < 1 || model_dim < 1) {
    throw std::invalid_argument("TemporalTokenizer: dims must be >= 1");
  }
  if (patch_len < 1 || patch_len > timesteps) {
    throw std::invalid_argument("TemporalTokenizer: patch_len must be in [1, T]");
  }
  TemporalTokenizer tk;
  tk.timesteps = timesteps;
  tk.channels = channels;
  tk.patch_len = patch_len;
  tk.num_patches = (timesteps + patch_len - 1) / patch_len;
  const std::int64_t in = static_cast<std::int64_t>(patch_len) * channels;
  tk.weight = init_weight({in, model_dim}, in, rng);
  tk.bias = Tensor::zeros({model_dim}, true);
  tk.position = init_weight({tk.num_patches, model_dim}, model_dim, rng);
  return tk;
}

ChannelTokenizer ChannelTokenizer::init(int timesteps, int channels, int model_dim,
                                        std::mt19937_64& rng) {
  if (timesteps < 1 || channels < 1 || model_dim < 1) {
    throw std::invalid_argument("ChannelTokenizer: dims must be >= 1");
  }
  ChannelTokenizer tk;
  tk.timesteps = timesteps;
  tk.channels = channels;
  tk.weight = init_weight({timesteps, model_dim}, timesteps, rng);
  tk.bias = Tensor::zeros({model_dim}, true);
  tk.position = init_weight({channels, model_dim}, model_dim, rng);
  return tk;
}

Tensor extract_patches(Graph& g, const Tensor& x, int patch_len) {
  if (x.rank() != 2) {
    throw std::invalid_argument("extract_patches: expected [TxC] input, got " +
                                shape_str(x.shape()));
  }
  const std::int64_t t = x.extent(0), c = x.extent(1);
  if (patch_len < 1 || patch_len > t) {
    throw std::invalid_argument("extract_patches: patch_len must be in [1, T]");
  }
  const std::int64_t p = (t + patch_len - 1) / patch_len;
  const std::int64_t width = patch_len * c;

  Tensor out = Tensor::zeros({p, width}, g.recording() && x.requires_grad());
  auto xv = x.data();
  auto ov = out.data();
  for (std::int64_t i = 0; i < p; ++i) {
    for (std::int64_t l = 0; l < patch_len; ++l) {
      const std::int64_t row = i * patch_len + l;
      if (row >= t) break;  // tail stays zero
      for (std::int64_t ch = 0; ch < c; ++ch) ov[i * width + l * c + ch] = xv[row * c + ch];
    }
  }

  g.track_output(out);
  if (g.recording() && x.requires_grad()) {
    g.record([x = x, out, t, c, p, patch_len, width]() mutable {
      if (!out.has_grad()) return;
      auto go = out.grad();
      if (!x.has_grad()) x.zero_grad();
      auto gx = x.grad();
      for (std::int64_t i = 0; i < p; ++i) {
        for (std::int64_t l = 0; l < patch_len; ++l) {
          const std::int64_t row = i * patch_len + l;
          if (row >= t) break;
          for (std::int64_t ch = 0; ch < c; ++ch) {
            gx[row * c + ch] += go[i * width + l * c + ch];
          }
        }
      }
    });
  }
  return out;
}

namespace {

void require_sample(const char* op, const Tensor& x, int timesteps, int channels) {
  if (x.rank() != 2 || x.extent(0) != timesteps || x.extent(1) != channels) {
    throw std::invalid_argument(std::string(op) + ": expected [" + std::to_string(timesteps) +
                                "x" + std::to_string(channels) + "] sample, got " +
                                shape_str(x.shape()));
  }
}

}  // namespace

Tensor temporal_embed(Graph& g, const TemporalTokenizer& tk, const Tensor& x) {
  require_sample("temporal_embed", x, tk.timesteps, tk.channels);
  Tensor patches = extract_patches(g, x, tk.patch_len);
  return add(g, add_bias(g, matmul(g, patches, tk.weight), tk.bias), tk.position);
}

Tensor channel_embed(Graph& g, const ChannelTokenizer& tk, const Tensor& x) {
  require_sample("channel_embed", x, tk.timesteps, tk.channels);
  Tensor series = transpose(g, x);  // C x T, one row per channel
  return add(g, add_bias(g, matmul(g, series, tk.weight), tk.bias), tk.position);
}

}  // namespace tech
