#include "lfl/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lfl {

namespace {

using nlohmann::json;

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

DatasetConfig dataset_from_json(const json& j) {
  DatasetConfig dc;
  const std::string type = j.at("type").get<std::string>();
  if (type == "idx") {
    dc.type = DatasetConfig::Type::Idx;
    dc.images = j.at("images").get<std::string>();
    dc.labels = j.at("labels").get<std::string>();
  } else if (type == "synthetic") {
    dc.type = DatasetConfig::Type::Synthetic;
    dc.class_count = get_or(j, "class_count", dc.class_count);
    dc.dim = get_or(j, "dim", dc.dim);
    dc.per_class = get_or(j, "per_class", dc.per_class);
    dc.separation = get_or(j, "separation", dc.separation);
    dc.seed = get_or(j, "seed", dc.seed);
  } else {
    throw ConfigError("dataset.type must be 'idx' or 'synthetic'");
  }
  return dc;
}

json dataset_to_json(const DatasetConfig& dc) {
  if (dc.type == DatasetConfig::Type::Idx)
    return {{"type", "idx"}, {"images", dc.images}, {"labels", dc.labels}};
  return {{"type", "synthetic"}, {"class_count", dc.class_count},   {"dim", dc.dim},
          {"per_class", dc.per_class}, {"separation", dc.separation}, {"seed", dc.seed}};
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  try {
    ExperimentConfig c;
    c.version = j.at("version").get<int>();
    if (c.version != 1) throw ConfigError("unsupported config version");
    c.method = method_from_string(j.at("method").get<std::string>());
    c.dataset = dataset_from_json(j.at("dataset"));

    const json& p = j.at("partition");
    c.partition.mode = partition_mode_from_string(p.at("mode").get<std::string>());
    c.partition.num_clients = p.at("num_clients").get<int>();
    c.partition.classes_per_client = get_or(p, "classes_per_client", 2);
    c.partition.samples_per_class = get_or(p, "samples_per_class", 20);
    c.partition.balance_rate = get_or(p, "balance_rate", 1.0);
    c.partition.val_fraction = get_or(p, "val_fraction", 0.2);
    c.partition.test_fraction = get_or(p, "test_fraction", 1.0);
    c.partition.seed = get_or<std::uint64_t>(p, "seed", 0);
    c.group_file = get_or<std::string>(p, "group_file", "");
    c.group_train_fraction = get_or(p, "train_fraction", 0.6);
    if (c.partition.mode == PartitionMode::ByGroup && c.group_file.empty())
      throw ConfigError("by_group partition requires partition.group_file");

    if (j.contains("arch")) c.arch_layers = j.at("arch").get<std::vector<int>>();

    if (j.contains("hyper")) {
      const json& h = j.at("hyper");
      c.hp.epochs = get_or(h, "epochs", c.hp.epochs);
      c.hp.batch_size = get_or(h, "batch_size", c.hp.batch_size);
      c.hp.eta = get_or(h, "eta", c.hp.eta);
      c.hp.prune_rate = get_or(h, "prune_rate", c.hp.prune_rate);
      c.hp.target_fraction = get_or(h, "target_fraction", c.hp.target_fraction);
      c.hp.acc_threshold = get_or(h, "acc_threshold", c.hp.acc_threshold);
      c.hp.sample_rate = get_or(h, "sample_rate", c.hp.sample_rate);
    }
    if (j.contains("lg")) {
      c.method_cfg.lg_split_index = get_or(j.at("lg"), "split_index", 1);
      c.method_cfg.fine_tune_epochs = get_or(j.at("lg"), "fine_tune_epochs", 10);
    }
    c.method_cfg.method = c.method;
    if (j.contains("encoder")) {
      const json& e = j.at("encoder");
      const std::string type = get_or<std::string>(e, "type", "identity");
      if (type == "identity") c.encoder.type = Encoder::Type::Identity;
      else if (type == "random_projection") c.encoder.type = Encoder::Type::RandomProjection;
      else throw ConfigError("encoder.type must be 'identity' or 'random_projection'");
      c.encoder.proj_dim = get_or(e, "dim", c.encoder.proj_dim);
      c.encoder.proj_seed = get_or<std::uint64_t>(e, "seed", 0);
    }
    c.rounds = j.at("rounds").get<int>();
    if (c.rounds < 0) throw ConfigError("rounds must be >= 0");
    c.seed = get_or<std::uint64_t>(j, "seed", 1);
    c.out_dir = get_or<std::string>(j, "out_dir", "out");
    c.workers = get_or(j, "workers", 1);
    if (c.workers < 1) throw ConfigError("workers must be >= 1");
    try {
      c.hp.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  } catch (const PartitionError& e) {
    throw ConfigError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return config_from_json_text(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["version"] = c.version;
  j["method"] = to_string(c.method);
  j["dataset"] = dataset_to_json(c.dataset);
  j["partition"] = {{"mode", to_string(c.partition.mode)},
                    {"num_clients", c.partition.num_clients},
                    {"classes_per_client", c.partition.classes_per_client},
                    {"samples_per_class", c.partition.samples_per_class},
                    {"balance_rate", c.partition.balance_rate},
                    {"val_fraction", c.partition.val_fraction},
                    {"test_fraction", c.partition.test_fraction},
                    {"seed", c.partition.seed},
                    {"group_file", c.group_file},
                    {"train_fraction", c.group_train_fraction}};
  if (!c.arch_layers.empty()) j["arch"] = c.arch_layers;
  j["hyper"] = {{"epochs", c.hp.epochs},
                {"batch_size", c.hp.batch_size},
                {"eta", c.hp.eta},
                {"prune_rate", c.hp.prune_rate},
                {"target_fraction", c.hp.target_fraction},
                {"acc_threshold", c.hp.acc_threshold},
                {"sample_rate", c.hp.sample_rate}};
  j["lg"] = {{"split_index", c.method_cfg.lg_split_index},
             {"fine_tune_epochs", c.method_cfg.fine_tune_epochs}};
  j["encoder"] = {{"type", c.encoder.type == Encoder::Type::Identity ? "identity"
                                                                     : "random_projection"},
                  {"dim", c.encoder.proj_dim},
                  {"seed", c.encoder.proj_seed}};
  j["rounds"] = c.rounds;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["workers"] = c.workers;
  return j.dump(1);
}

std::uint64_t config_digest(const ExperimentConfig& c) {
  // Worker count and output location do not change results, so they stay out
  // of the reproduction identity.
  json j = json::parse(config_to_json(c));
  j.erase("workers");
  j.erase("out_dir");
  const std::string s = j.dump();
  return fnv1a64(s.data(), s.size());
}

Dataset load_dataset(const DatasetConfig& dc) {
  if (dc.type == DatasetConfig::Type::Idx) return load_idx(dc.images, dc.labels);
  return make_synthetic(dc.class_count, dc.dim, dc.per_class, dc.separation, dc.seed);
}

ModelArch resolve_arch(const ExperimentConfig& c, const Dataset& d) {
  ModelArch arch;
  if (!c.arch_layers.empty()) {
    arch.layer_sizes = c.arch_layers;
    arch.validate();
    require(arch.input_dim() == d.dim(), "arch input dim does not match dataset");
    require(arch.class_count() == d.class_count, "arch class count does not match dataset");
    return arch;
  }
  if (d.dim() == 784) arch.layer_sizes = {784, 300, 100, d.class_count};
  else arch.layer_sizes = {d.dim(), 64, 64, d.class_count};
  return arch;
}

Encoder resolve_encoder(const EncoderConfig& ec, int input_dim) {
  if (ec.type == Encoder::Type::Identity) return identity_encoder();
  return random_projection_encoder(input_dim, ec.proj_dim, ec.proj_seed);
}

}  // namespace lfl
