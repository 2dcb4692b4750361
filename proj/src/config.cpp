#include "tech/config.hpp"

#include <json.hpp>

#include <fstream>
#include <functional>
#include <stdexcept>

namespace tech {

using nlohmann::json;

namespace {

Augmentation augmentation_from_name(const std::string& name) {
  if (name == "temporal_flip") return Augmentation::kTemporalFlip;
  if (name == "channel_shuffle") return Augmentation::kChannelShuffle;
  if (name == "temporal_mask") return Augmentation::kTemporalMask;
  if (name == "frequency_mask") return Augmentation::kFrequencyMask;
  if (name == "jitter") return Augmentation::kJitter;
  if (name == "value_dropout") return Augmentation::kValueDropout;
  throw std::invalid_argument("config: unknown augmentation '" + name + "'");
}

// Field table: one lambda pair per key keeps load/dump/override in sync.
struct Field {
  const char* key;
  std::function<void(RunConfig&, const json&)> load;
  std::function<json(const RunConfig&)> dump;
};

template <typename T, typename M>
Field field(const char* key, M T::* member) {
  return {key,
          [member](RunConfig& c, const json& v) { c.*member = v.get<M>(); },
          [member](const RunConfig& c) { return json(c.*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      field("mode", &RunConfig::mode),
      field("subjects", &RunConfig::subjects),
      field("trials_per_subject", &RunConfig::trials_per_subject),
      field("timesteps", &RunConfig::timesteps),
      field("channels", &RunConfig::channels),
      field("classes", &RunConfig::classes),
      field("coupling", &RunConfig::coupling),
      field("noise_sigma", &RunConfig::noise_sigma),
      field("class_frequencies", &RunConfig::class_frequencies),
      field("gen_seed", &RunConfig::gen_seed),
      field("train_frac", &RunConfig::train_frac),
      field("val_frac", &RunConfig::val_frac),
      field("test_frac", &RunConfig::test_frac),
      field("split_seed", &RunConfig::split_seed),
      field("model_dim", &RunConfig::model_dim),
      field("core_dim", &RunConfig::core_dim),
      field("patch_len", &RunConfig::patch_len),
      field("temporal_depth", &RunConfig::temporal_depth),
      field("channel_depth", &RunConfig::channel_depth),
      field("ffn_hidden", &RunConfig::ffn_hidden),
      field("mixer", &RunConfig::mixer),
      field("dropout", &RunConfig::dropout),
      field("pre_norm", &RunConfig::pre_norm),
      field("lr", &RunConfig::lr),
      field("batch_size", &RunConfig::batch_size),
      field("max_epochs", &RunConfig::max_epochs),
      field("patience", &RunConfig::patience),
      field("seeds", &RunConfig::seeds),
      field("augment", &RunConfig::augment),
      field("augmentations", &RunConfig::augmentations),
      field("aug_flip_prob", &RunConfig::aug_flip_prob),
      field("aug_shuffle_prob", &RunConfig::aug_shuffle_prob),
      field("aug_temporal_mask_ratio", &RunConfig::aug_temporal_mask_ratio),
      field("aug_frequency_mask_ratio", &RunConfig::aug_frequency_mask_ratio),
      field("aug_jitter_scale", &RunConfig::aug_jitter_scale),
      field("aug_dropout_ratio", &RunConfig::aug_dropout_ratio),
      field("bench_tokens", &RunConfig::bench_tokens),
      field("bench_dim", &RunConfig::bench_dim),
      field("bench_reps", &RunConfig::bench_reps),
      field("analyze_sweep", &RunConfig::analyze_sweep),
      field("sweep_betas", &RunConfig::sweep_betas),
      field("data_path", &RunConfig::data_path),
      field("checkpoint_path", &RunConfig::checkpoint_path),
  };
  return table;
}

void load_document(RunConfig& config, const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config: expected a JSON object");
  for (const auto& [key, value] : doc.items()) {
    bool known = false;
    for (const Field& f : fields()) {
      if (key == f.key) {
        try {
          f.load(config, value);
        } catch (const json::exception& e) {
          throw std::invalid_argument("config: bad value for '" + key + "': " + e.what());
        }
        known = true;
        break;
      }
    }
    if (!known) throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

}  // namespace

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

RunConfig RunConfig::from_json_text(const std::string& text) {
  RunConfig config;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  load_document(config, doc);
  return config;
}

void RunConfig::apply_overrides(const std::vector<std::string>& overrides) {
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: --set expects key=value, got '" + kv + "'");
    }
    const std::string key = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;  // plain strings need no quotes
    json doc;
    doc[key] = value;
    load_document(*this, doc);
  }
}

std::string RunConfig::to_json_text() const {
  json doc;
  for (const Field& f : fields()) doc[f.key] = f.dump(*this);
  return doc.dump(2) + "\n";
}

GeneratorSpec RunConfig::generator_spec() const {
  GeneratorSpec spec;
  if (mode == "centralized") spec.mode = GeneratorMode::kCentralized;
  else if (mode == "decentralized") spec.mode = GeneratorMode::kDecentralized;
  else throw std::invalid_argument("config: mode must be centralized|decentralized");
  spec.subjects = subjects;
  spec.trials_per_subject = trials_per_subject;
  spec.timesteps = timesteps;
  spec.channels = channels;
  spec.classes = classes;
  spec.coupling = coupling;
  spec.noise_sigma = noise_sigma;
  spec.class_frequencies = class_frequencies;
  spec.seed = gen_seed;
  return spec;
}

SplitSpec RunConfig::split_spec() const {
  return {train_frac, val_frac, test_frac, split_seed};
}

TeChConfig RunConfig::model_config() const {
  TeChConfig c;
  c.timesteps = timesteps;
  c.channels = channels;
  c.classes = classes;
  c.model_dim = model_dim;
  c.core_dim = core_dim;
  c.patch_len = patch_len;
  c.temporal_depth = temporal_depth;
  c.channel_depth = channel_depth;
  c.ffn_hidden = ffn_hidden;
  c.mixer = mixer_from_name(mixer);
  c.dropout = dropout;
  c.pre_norm = pre_norm;
  return c;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig c;
  c.lr = lr;
  c.batch_size = batch_size;
  c.max_epochs = max_epochs;
  c.patience = patience;
  c.seeds = seeds;
  c.augment = augment;
  c.bank = augment_bank();
  return c;
}

AugmentBank RunConfig::augment_bank() const {
  AugmentBank bank;
  for (const std::string& name : augmentations) bank.enabled.push_back(augmentation_from_name(name));
  bank.flip_prob = aug_flip_prob;
  bank.shuffle_prob = aug_shuffle_prob;
  bank.temporal_mask_ratio = aug_temporal_mask_ratio;
  bank.frequency_mask_ratio = aug_frequency_mask_ratio;
  bank.jitter_scale = aug_jitter_scale;
  bank.dropout_ratio = aug_dropout_ratio;
  return bank;
}

}  // namespace tech
