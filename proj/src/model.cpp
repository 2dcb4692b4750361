#include "tech/model.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace tech {

using nlohmann::json;

int TeChConfig::resolved_core_dim() const { return core_dim > 0 ? core_dim : default_core_dim(model_dim); }
int TeChConfig::resolved_ffn_hidden() const { return ffn_hidden > 0 ? ffn_hidden : 2 * model_dim; }
int TeChConfig::num_patches() const { return (timesteps + patch_len - 1) / patch_len; }

void TeChConfig::validate() const {
  if (timesteps < 1) throw std::invalid_argument("config: timesteps must be >= 1");
  if (channels < 1) throw std::invalid_argument("config: channels must be >= 1");
  if (classes < 2) throw std::invalid_argument("config: classes must be >= 2");
  if (model_dim < 1) throw std::invalid_argument("config: model_dim must be >= 1");
  if (core_dim < 0) throw std::invalid_argument("config: core_dim must be >= 0");
  if (ffn_hidden < 0) throw std::invalid_argument("config: ffn_hidden must be >= 0");
  if (patch_len < 1 || patch_len > timesteps) {
    throw std::invalid_argument("config: patch_len must be in [1, timesteps]");
  }
  if (temporal_depth < 0 || channel_depth < 0) {
    throw std::invalid_argument("config: depths must be >= 0");
  }
  if (temporal_depth + channel_depth < 1) {
    throw std::invalid_argument(
        "config: temporal_depth + channel_depth must be >= 1; the depth-free "
        "ablation is LinearProbe, not a degenerate model");
  }
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("config: dropout must be in [0,1)");
}

TeChModel TeChModel::init(const TeChConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  TeChModel m;
  m.config = config;
  const int d = config.model_dim;
  const int dc = config.resolved_core_dim();
  const int h = config.resolved_ffn_hidden();
  if (config.temporal_depth > 0) {
    m.temporal_tokenizer =
        TemporalTokenizer::init(config.timesteps, config.channels, config.patch_len, d, rng);
    m.temporal_stack = make_stack(config.temporal_depth, config.mixer, d, dc, h, config.dropout,
                                  config.pre_norm, rng);
  }
  if (config.channel_depth > 0) {
    m.channel_tokenizer = ChannelTokenizer::init(config.timesteps, config.channels, d, rng);
    m.channel_stack = make_stack(config.channel_depth, config.mixer, d, dc, h, config.dropout,
                                 config.pre_norm, rng);
  }
  m.head_w = init_weight({d, config.classes}, d, rng);
  m.head_b = Tensor::zeros({config.classes}, true);
  return m;
}

std::vector<Tensor> TeChModel::parameters() const {
  std::vector<Tensor> ps;
  if (temporal_tokenizer) {
    for (Tensor& t : temporal_tokenizer->parameters()) ps.push_back(std::move(t));
    for (Tensor& t : temporal_stack.parameters()) ps.push_back(std::move(t));
  }
  if (channel_tokenizer) {
    for (Tensor& t : channel_tokenizer->parameters()) ps.push_back(std::move(t));
    for (Tensor& t : channel_stack.parameters()) ps.push_back(std::move(t));
  }
  ps.push_back(head_w);
  ps.push_back(head_b);
  return ps;
}

std::int64_t TeChModel::parameter_count() const {
  std::int64_t n = 0;
  for (const Tensor& t : parameters()) n += t.size();
  return n;
}

Tensor pooled_branch_output(Graph& g, const TeChModel& m, const Tensor& x, bool temporal_branch,
                            bool training, std::mt19937_64* rng) {
  if (temporal_branch) {
    if (!m.temporal_tokenizer) throw std::invalid_argument("temporal branch is absent");
    Tensor tokens = temporal_embed(g, *m.temporal_tokenizer, x);
    return reduce_mean(g, stack_forward(g, m.temporal_stack, tokens, training, rng), 0);
  }
  if (!m.channel_tokenizer) throw std::invalid_argument("channel branch is absent");
  Tensor tokens = channel_embed(g, *m.channel_tokenizer, x);
  return reduce_mean(g, stack_forward(g, m.channel_stack, tokens, training, rng), 0);
}

Tensor TeChModel::forward(Graph& g, const Tensor& x, bool training, std::mt19937_64* rng) const {
  Tensor fused;
  if (temporal_tokenizer) fused = pooled_branch_output(g, *this, x, true, training, rng);
  if (channel_tokenizer) {
    Tensor ch = pooled_branch_output(g, *this, x, false, training, rng);
    fused = fused.defined() ? add(g, fused, ch) : ch;
  }
  Tensor row = reshape(g, fused, {1, config.model_dim});
  Tensor logits = add_bias(g, matmul(g, row, head_w), head_b);
  return reshape(g, logits, {config.classes});
}

Tensor TeChModel::forward_batch(Graph& g, std::span<const Tensor> xs, bool training,
                                std::mt19937_64* rng) const {
  if (xs.empty()) throw std::invalid_argument("forward_batch: empty batch");
  for (const Tensor& x : xs) {
    if (x.shape() != xs[0].shape()) {
      throw std::invalid_argument("forward_batch: ragged batch, " + shape_str(xs[0].shape()) +
                                  " vs " + shape_str(x.shape()));
    }
  }
  std::vector<Tensor> rows;
  rows.reserve(xs.size());
  for (const Tensor& x : xs) rows.push_back(forward(g, x, training, rng));
  return stack_rows(g, rows);
}

// --- Parameter count ------------------------------------------------------

namespace {

std::int64_t mixer_param_count(MixerKind kind, std::int64_t d, std::int64_t dc) {
  switch (kind) {
    case MixerKind::kAttention: return 3 * d * d + 3 * d;
    case MixerKind::kCoTAR:
      return (d * d + d) + (d * dc + dc) + ((d + dc) * d + d) + (d * d + d);
    case MixerKind::kNone: return 0;
  }
  return 0;
}

std::int64_t block_param_count(MixerKind kind, std::int64_t d, std::int64_t dc, std::int64_t h) {
  const std::int64_t ffn = d * h + h + h * d + d;
  const std::int64_t norms = 4 * d;
  return mixer_param_count(kind, d, dc) + ffn + norms;
}

}  // namespace

std::int64_t tech_parameter_count(const TeChConfig& c) {
  const std::int64_t d = c.model_dim, dc = c.resolved_core_dim(), h = c.resolved_ffn_hidden();
  const std::int64_t t = c.timesteps, ch = c.channels, k = c.classes, p = c.num_patches();
  const std::int64_t l = c.patch_len;
  std::int64_t n = 0;
  if (c.temporal_depth > 0) {
    n += l * ch * d + d + p * d;  // tokenizer: weight, bias, positions
    n += c.temporal_depth * block_param_count(c.mixer, d, dc, h);
  }
  if (c.channel_depth > 0) {
    n += t * d + d + ch * d;
    n += c.channel_depth * block_param_count(c.mixer, d, dc, h);
  }
  n += d * k + k;  // head
  return n;
}

// --- Checkpoint I/O ---------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'T', 'E', 'C', 'H', 'C', 'K', 'P', '1'};

json config_to_json(const TeChConfig& c) {
  return json{{"timesteps", c.timesteps},
              {"channels", c.channels},
              {"classes", c.classes},
              {"model_dim", c.model_dim},
              {"core_dim", c.core_dim},
              {"patch_len", c.patch_len},
              {"temporal_depth", c.temporal_depth},
              {"channel_depth", c.channel_depth},
              {"ffn_hidden", c.ffn_hidden},
              {"mixer", mixer_name(c.mixer)},
              {"dropout", c.dropout},
              {"pre_norm", c.pre_norm}};
}

TeChConfig config_from_json(const json& j) {
  TeChConfig c;
  c.timesteps = j.at("timesteps").get<int>();
  c.channels = j.at("channels").get<int>();
  c.classes = j.at("classes").get<int>();
  c.model_dim = j.at("model_dim").get<int>();
  c.core_dim = j.at("core_dim").get<int>();
  c.patch_len = j.at("patch_len").get<int>();
  c.temporal_depth = j.at("temporal_depth").get<int>();
  c.channel_depth = j.at("channel_depth").get<int>();
  c.ffn_hidden = j.at("ffn_hidden").get<int>();
  c.mixer = mixer_from_name(j.at("mixer").get<std::string>());
  c.dropout = j.at("dropout").get<double>();
  c.pre_norm = j.at("pre_norm").get<bool>();
  return c;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const TeChModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const std::string cfg = config_to_json(model.config).dump();
  const std::uint32_t cfg_len = static_cast<std::uint32_t>(cfg.size());
  out.write(reinterpret_cast<const char*>(&cfg_len), sizeof(cfg_len));
  out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
  const std::uint64_t total = static_cast<std::uint64_t>(model.parameter_count());
  out.write(reinterpret_cast<const char*>(&total), sizeof(total));
  for (const Tensor& t : model.parameters()) {
    out.write(reinterpret_cast<const char*>(t.data().data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path.string());
}

TeChModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("load_checkpoint: " + path.string() + " is not a TECHCKP1 file");
  }
  std::uint32_t cfg_len = 0;
  in.read(reinterpret_cast<char*>(&cfg_len), sizeof(cfg_len));
  std::string cfg(cfg_len, '\0');
  in.read(cfg.data(), cfg_len);
  if (!in) throw std::runtime_error("load_checkpoint: truncated config block");
  TeChConfig config = config_from_json(json::parse(cfg));

  TeChModel model = TeChModel::init(config, 0);
  std::uint64_t total = 0;
  in.read(reinterpret_cast<char*>(&total), sizeof(total));
  if (total != static_cast<std::uint64_t>(model.parameter_count())) {
    throw std::runtime_error("load_checkpoint: parameter count mismatch");
  }
  for (Tensor& t : model.parameters()) {
    in.read(reinterpret_cast<char*>(t.data().data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!in) throw std::runtime_error("load_checkpoint: truncated parameter block");
  return model;
}

// --- Linear probe --------------------------------------------------------------

LinearProbe LinearProbe::init(int timesteps, int channels, int classes, std::uint64_t seed) {
  if (timesteps < 1 || channels < 1 || classes < 2) {
    throw std::invalid_argument("LinearProbe: bad dimensions");
  }
  std::mt19937_64 rng(seed);
  LinearProbe p;
  p.timesteps = timesteps;
  p.channels = channels;
  p.classes = classes;
  const std::int64_t in = static_cast<std::int64_t>(timesteps) * channels;
  p.weight = init_weight({in, classes}, in, rng);
  p.bias = Tensor::zeros({classes}, true);
  return p;
}

Tensor LinearProbe::forward(Graph& g, const Tensor& x, bool, std::mt19937_64*) const {
  if (x.rank() != 2 || x.extent(0) != timesteps || x.extent(1) != channels) {
    throw std::invalid_argument("LinearProbe: expected [" + std::to_string(timesteps) + "x" +
                                std::to_string(channels) + "] sample, got " +
                                shape_str(x.shape()));
  }
  Tensor flat = reshape(g, x, {1, static_cast<std::int64_t>(timesteps) * channels});
  Tensor logits = add_bias(g, matmul(g, flat, weight), bias);
  return reshape(g, logits, {classes});
}

Tensor LinearProbe::forward_batch(Graph& g, std::span<const Tensor> xs, bool training,
                                  std::mt19937_64* rng) const {
  if (xs.empty()) throw std::invalid_argument("forward_batch: empty batch");
  std::vector<Tensor> rows;
  rows.reserve(xs.size());
  for (const Tensor& x : xs) rows.push_back(forward(g, x, training, rng));
  return stack_rows(g, rows);
}

}  // namespace tech
