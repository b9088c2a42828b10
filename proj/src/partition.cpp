#include "lfl/partition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <json.hpp>

#include "lfl/rng.hpp"

namespace lfl {

std::string to_string(PartitionMode m) {
  switch (m) {
    case PartitionMode::NClassBalanced: return "nclass_balanced";
    case PartitionMode::NClassUnbalanced: return "nclass_unbalanced";
    case PartitionMode::ByGroup: return "by_group";
  }
  return "?";
}

PartitionMode partition_mode_from_string(const std::string& s) {
  if (s == "nclass_balanced") return PartitionMode::NClassBalanced;
  if (s == "nclass_unbalanced") return PartitionMode::NClassUnbalanced;
  if (s == "by_group") return PartitionMode::ByGroup;
  throw PartitionError("unknown partition mode: " + s);
}

namespace {

// Largest-remainder apportionment of `total` over `weights`; guarantees
// |share_k - weight_k/sum| < 1/total per class. Ties go to the lower slot.
std::vector<int> apportion(int total, const std::vector<int>& weights) {
  const double sum = static_cast<double>(std::accumulate(weights.begin(), weights.end(), 0LL));
  std::vector<int> out(weights.size(), 0);
  if (total <= 0 || sum <= 0) return out;
  std::vector<std::pair<double, int>> rema;
  int assigned = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double quota = total * (weights[k] / sum);
    out[k] = static_cast<int>(quota);
    assigned += out[k];
    rema.emplace_back(-(quota - out[k]), static_cast<int>(k));
  }
  std::sort(rema.begin(), rema.end());
  for (int i = 0; i < total - assigned; ++i) out[rema[i].second] += 1;
  return out;
}

}  // namespace

PartitionManifest partition_nclass(const Dataset& d, const PartitionSpec& spec) {
  d.validate();
  if (spec.num_clients < 1) throw PartitionError("partition: num_clients must be >= 1");
  if (spec.classes_per_client < 1 || spec.classes_per_client > d.class_count)
    throw PartitionError("partition: classes_per_client out of range");
  if (spec.samples_per_class < 1) throw PartitionError("partition: samples_per_class must be >= 1");
  if (!(spec.balance_rate > 0.0 && spec.balance_rate <= 1.0))
    throw PartitionError("partition: balance_rate must be in (0,1]");
  if (spec.mode == PartitionMode::NClassUnbalanced && spec.classes_per_client != 2)
    throw PartitionError("partition: unbalanced mode requires classes_per_client == 2");
  if (spec.mode == PartitionMode::ByGroup)
    throw PartitionError("partition: by_group spec needs partition_by_group");

  std::vector<std::vector<int>> pools(d.class_count);
  for (Eigen::Index i = 0; i < d.size(); ++i) pools[d.labels[i]].push_back(static_cast<int>(i));

  PartitionManifest m;
  m.spec = spec;
  m.dataset_digest = dataset_digest(d);
  m.clients.resize(spec.num_clients);

  for (int ci = 0; ci < spec.num_clients; ++ci) {
    auto class_rng = rng::make_engine(
        rng::stream_seed(spec.seed, {rng::kPartitionClasses, (std::uint64_t)ci}));
    // Draw order matters: in unbalanced mode the first class is the major one.
    std::vector<int> classes =
        rng::sample_without_replacement(d.class_count, spec.classes_per_client, class_rng);

    std::vector<int> train_counts(classes.size());
    for (std::size_t k = 0; k < classes.size(); ++k) {
      if (spec.mode == PartitionMode::NClassUnbalanced && k == 1)
        train_counts[k] = std::max<int>(
            1, static_cast<int>(std::llround(spec.samples_per_class * spec.balance_rate)));
      else
        train_counts[k] = spec.samples_per_class;
    }
    const int train_total = std::accumulate(train_counts.begin(), train_counts.end(), 0);
    const int val_total =
        spec.val_fraction > 0 ? std::max<int>(1, static_cast<int>(std::llround(
                                                     spec.val_fraction * train_total)))
                              : 0;
    const int test_total =
        spec.test_fraction > 0 ? std::max<int>(1, static_cast<int>(std::llround(
                                                      spec.test_fraction * train_total)))
                               : 0;
    const std::vector<int> val_counts = apportion(val_total, train_counts);
    const std::vector<int> test_counts = apportion(test_total, train_counts);

    ClientIndices& out = m.clients[ci];
    for (std::size_t k = 0; k < classes.size(); ++k) {
      const auto& pool = pools[classes[k]];
      const int need = train_counts[k] + val_counts[k] + test_counts[k];
      if (need > static_cast<int>(pool.size()))
        throw PartitionError("partition infeasible: class " + std::to_string(classes[k]) +
                             " has " + std::to_string(pool.size()) + " examples, client " +
                             std::to_string(ci) + " needs " + std::to_string(need));
      auto idx_rng = rng::make_engine(rng::stream_seed(
          spec.seed, {rng::kPartitionIndices, (std::uint64_t)ci, (std::uint64_t)classes[k]}));
      std::vector<int> picks =
          rng::sample_without_replacement(static_cast<int>(pool.size()), need, idx_rng);
      int at = 0;
      for (int t = 0; t < train_counts[k]; ++t) out.train.push_back(pool[picks[at++]]);
      for (int v = 0; v < val_counts[k]; ++v) out.val.push_back(pool[picks[at++]]);
      for (int s = 0; s < test_counts[k]; ++s) out.test.push_back(pool[picks[at++]]);
    }
  }
  return m;
}

PartitionManifest partition_by_group(const Dataset& d, const std::vector<int>& group_of_example,
                                     double train_fraction, double val_fraction,
                                     std::uint64_t seed) {
  d.validate();
  if (static_cast<Eigen::Index>(group_of_example.size()) != d.size())
    throw PartitionError("partition_by_group: every example needs a group id");

  std::map<int, std::vector<int>> groups;
  for (std::size_t i = 0; i < group_of_example.size(); ++i)
    groups[group_of_example[i]].push_back(static_cast<int>(i));

  PartitionManifest m;
  m.spec.mode = PartitionMode::ByGroup;
  m.spec.num_clients = static_cast<int>(groups.size());
  m.spec.val_fraction = val_fraction;
  m.spec.seed = seed;
  m.dataset_digest = dataset_digest(d);

  for (auto& [gid, members] : groups) {
    auto g = rng::make_engine(rng::stream_seed(seed, {rng::kPartitionIndices, (std::uint64_t)gid}));
    rng::shuffle(members, g);
    const int n = static_cast<int>(members.size());
    const int t = std::max<int>(1, static_cast<int>(std::llround(train_fraction * n)));
    const int v = std::min<int>(n - t, static_cast<int>(std::llround(val_fraction * n)));
    ClientIndices ci;
    ci.train.assign(members.begin(), members.begin() + t);
    ci.val.assign(members.begin() + t, members.begin() + t + v);
    ci.test.assign(members.begin() + t + v, members.end());
    m.clients.push_back(std::move(ci));
  }
  return m;
}

std::vector<int> load_group_manifest(const std::string& path, Eigen::Index dataset_size) {
  std::ifstream f(path);
  if (!f) throw PartitionError("cannot open group manifest: " + path);
  std::vector<int> groups(dataset_size, -1);
  long long idx, gid;
  while (f >> idx >> gid) {
    if (idx < 0 || idx >= dataset_size)
      throw PartitionError("group manifest: example index out of range: " + std::to_string(idx));
    groups[idx] = static_cast<int>(gid);
  }
  for (Eigen::Index i = 0; i < dataset_size; ++i)
    if (groups[i] < 0)
      throw PartitionError("group manifest: example " + std::to_string(i) + " missing a group");
  return groups;
}

namespace {

nlohmann::json spec_to_json(const PartitionSpec& s) {
  return {{"mode", to_string(s.mode)},
          {"num_clients", s.num_clients},
          {"classes_per_client", s.classes_per_client},
          {"samples_per_class", s.samples_per_class},
          {"balance_rate", s.balance_rate},
          {"val_fraction", s.val_fraction},
          {"test_fraction", s.test_fraction},
          {"seed", s.seed}};
}

PartitionSpec spec_from_json(const nlohmann::json& j) {
  PartitionSpec s;
  s.mode = partition_mode_from_string(j.at("mode").get<std::string>());
  s.num_clients = j.at("num_clients").get<int>();
  s.classes_per_client = j.at("classes_per_client").get<int>();
  s.samples_per_class = j.at("samples_per_class").get<int>();
  s.balance_rate = j.at("balance_rate").get<double>();
  s.val_fraction = j.at("val_fraction").get<double>();
  s.test_fraction = j.at("test_fraction").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

}  // namespace

void save_manifest(const PartitionManifest& m, const std::string& path) {
  nlohmann::json j;
  j["version"] = m.version;
  j["kind"] = "partition_manifest";
  j["dataset_digest"] = m.dataset_digest;
  j["spec"] = spec_to_json(m.spec);
  nlohmann::json clients = nlohmann::json::array();
  for (const auto& c : m.clients)
    clients.push_back({{"train", c.train}, {"val", c.val}, {"test", c.test}});
  j["clients"] = std::move(clients);
  std::ofstream f(path);
  if (!f) throw PartitionError("cannot write manifest: " + path);
  f << j.dump(1) << "\n";
}

PartitionManifest load_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw PartitionError("cannot read manifest: " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw PartitionError("manifest parse error: " + std::string(e.what()));
  }
  PartitionManifest m;
  m.version = j.at("version").get<int>();
  if (m.version != 1) throw PartitionError("unsupported manifest version");
  m.dataset_digest = j.at("dataset_digest").get<std::uint64_t>();
  m.spec = spec_from_json(j.at("spec"));
  for (const auto& c : j.at("clients")) {
    ClientIndices ci;
    ci.train = c.at("train").get<std::vector<int>>();
    ci.val = c.at("val").get<std::vector<int>>();
    ci.test = c.at("test").get<std::vector<int>>();
    m.clients.push_back(std::move(ci));
  }
  return m;
}

std::uint64_t manifest_digest(const PartitionManifest& m) {
  nlohmann::json j;
  j["version"] = m.version;
  j["dataset_digest"] = m.dataset_digest;
  j["spec"] = spec_to_json(m.spec);
  nlohmann::json clients = nlohmann::json::array();
  for (const auto& c : m.clients)
    clients.push_back({{"train", c.train}, {"val", c.val}, {"test", c.test}});
  j["clients"] = std::move(clients);
  const std::string s = j.dump();
  return fnv1a64(s.data(), s.size());
}

}  // namespace lfl
