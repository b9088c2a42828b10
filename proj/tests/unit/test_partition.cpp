#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "helpers.hpp"
#include "lfl/partition.hpp"

using namespace lfl;

namespace {

std::map<int, int> label_histogram(const Dataset& d, const std::vector<int>& idx) {
  std::map<int, int> h;
  for (int i : idx) h[d.labels[i]] += 1;
  return h;
}

PartitionSpec base_spec() {
  PartitionSpec s;
  s.mode = PartitionMode::NClassBalanced;
  s.num_clients = 12;
  s.classes_per_client = 2;
  s.samples_per_class = 20;
  s.seed = 5;
  return s;
}

}  // namespace

TEST_CASE("make_synthetic shapes, balance, and determinism") {
  const Dataset d = make_synthetic(10, 8, 100, 4.0, 3);
  CHECK(d.size() == 1000);
  CHECK(d.class_count == 10);
  std::map<int, int> h;
  for (Eigen::Index i = 0; i < d.size(); ++i) h[d.labels[i]] += 1;
  for (const auto& [cls, n] : h) CHECK(n == 100);

  const Dataset again = make_synthetic(10, 8, 100, 4.0, 3);
  CHECK(dataset_digest(d) == dataset_digest(again));
  const Dataset other = make_synthetic(10, 8, 100, 4.0, 4);
  CHECK(dataset_digest(d) != dataset_digest(other));
}

TEST_CASE("well-separated blobs are linearly learnable") {
  const Dataset d = make_synthetic(2, 2, 100, 10.0, 17);
  std::vector<int> all(d.size());
  for (int i = 0; i < static_cast<int>(all.size()); ++i) all[i] = i;
  const BatchF train = gather(d, all);

  const ModelArch arch{{2, 2}};  // linear classifier
  auto p = init_params<float>(arch, 17);
  const Mask full = full_mask(arch);
  std::mt19937 g = rng::make_engine(17);
  train_epochs(p, full, train, 60, 32, 0.05f, g);
  CHECK(evaluate(p, full, train) > 0.95);
}

TEST_CASE("balanced n-class partition sizes") {
  const Dataset d = make_synthetic(10, 4, 300, 4.0, 1);
  const PartitionSpec spec = base_spec();
  const PartitionManifest m = partition_nclass(d, spec);
  REQUIRE(m.num_clients() == 12);
  for (const auto& c : m.clients) {
    CHECK(c.train.size() == 40);  // 2 classes x 20
    CHECK(c.val.size() == 8);     // 20% of train
    CHECK(c.test.size() == 40);   // same size and distribution as train
    const auto h = label_histogram(d, c.train);
    CHECK(h.size() == 2);
    for (const auto& [cls, n] : h) CHECK(n == 20);
  }
}

TEST_CASE("unbalanced partition: minor class is max(1, round(spc * balance))") {
  const Dataset d = make_synthetic(10, 4, 300, 4.0, 1);
  PartitionSpec spec = base_spec();
  spec.mode = PartitionMode::NClassUnbalanced;
  spec.balance_rate = 0.25;
  const PartitionManifest m = partition_nclass(d, spec);
  for (const auto& c : m.clients) {
    const auto h = label_histogram(d, c.train);
    REQUIRE(h.size() == 2);
    std::vector<int> counts;
    for (const auto& [cls, n] : h) counts.push_back(n);
    std::sort(counts.begin(), counts.end());
    CHECK(counts[0] == 5);  // 20 * 0.25
    CHECK(counts[1] == 20);
  }

  spec.balance_rate = 0.02;  // rounds to 0, clamps to 1
  const PartitionManifest tiny = partition_nclass(d, spec);
  const auto h = label_histogram(d, tiny.clients[0].train);
  std::vector<int> counts;
  for (const auto& [cls, n] : h) counts.push_back(n);
  std::sort(counts.begin(), counts.end());
  CHECK(counts[0] == 1);
}

TEST_CASE("n = class_count balanced degenerates to IID") {
  const Dataset d = make_synthetic(5, 4, 200, 4.0, 2);
  PartitionSpec spec = base_spec();
  spec.num_clients = 6;
  spec.classes_per_client = 5;
  spec.samples_per_class = 10;
  const PartitionManifest m = partition_nclass(d, spec);
  for (const auto& c : m.clients) {
    const auto h = label_histogram(d, c.train);
    CHECK(h.size() == 5);
    for (const auto& [cls, n] : h) CHECK(n == 10);
  }
}

TEST_CASE("within a client the splits are disjoint; test tracks train distribution") {
  const Dataset d = make_synthetic(10, 4, 120, 4.0, 9);
  PartitionSpec spec = base_spec();
  spec.num_clients = 30;
  spec.mode = PartitionMode::NClassUnbalanced;
  spec.balance_rate = 0.5;
  const PartitionManifest m = partition_nclass(d, spec);
  for (const auto& c : m.clients) {
    std::set<int> seen;
    for (int i : c.train) CHECK(seen.insert(i).second);
    for (int i : c.val) CHECK(seen.insert(i).second);
    for (int i : c.test) CHECK(seen.insert(i).second);

    const auto train_h = label_histogram(d, c.train);
    const auto test_h = label_histogram(d, c.test);
    for (const auto& [cls, n] : train_h) {
      const double train_share = static_cast<double>(n) / c.train.size();
      const auto it = test_h.find(cls);
      const double test_share =
          it == test_h.end() ? 0.0 : static_cast<double>(it->second) / c.test.size();
      CHECK(std::abs(test_share - train_share) <= 1.0 / c.test.size() + 1e-12);
    }
  }
}

TEST_CASE("partition is a pure function of (dataset, spec)") {
  const Dataset d = make_synthetic(10, 4, 300, 4.0, 1);
  const PartitionSpec spec = base_spec();
  CHECK(manifest_digest(partition_nclass(d, spec)) ==
        manifest_digest(partition_nclass(d, spec)));
  PartitionSpec other = spec;
  other.seed += 1;
  CHECK(manifest_digest(partition_nclass(d, spec)) !=
        manifest_digest(partition_nclass(d, other)));
}

TEST_CASE("infeasible specs are rejected with a diagnostic") {
  const Dataset d = make_synthetic(4, 4, 30, 4.0, 1);
  PartitionSpec spec = base_spec();
  spec.samples_per_class = 20;  // needs 20 + 8-ish + 20 > 30 per class
  CHECK_THROWS_AS(partition_nclass(d, spec), PartitionError);

  PartitionSpec bad = base_spec();
  bad.classes_per_client = 99;
  CHECK_THROWS_AS(partition_nclass(d, bad), PartitionError);
}

TEST_CASE("group partition: one client per group") {
  const Dataset d = make_synthetic(2, 4, 10, 4.0, 8);  // 20 examples
  std::vector<int> groups(20);
  for (int i = 0; i < 20; ++i) groups[i] = i < 10 ? 7 : 3;
  const PartitionManifest m = partition_by_group(d, groups, 0.6, 0.2, 1);
  REQUIRE(m.num_clients() == 2);
  for (const auto& c : m.clients)
    CHECK(c.train.size() + c.val.size() + c.test.size() == 10);

  std::vector<int> singleton(20);
  for (int i = 0; i < 20; ++i) singleton[i] = i;
  CHECK(partition_by_group(d, singleton, 0.6, 0.2, 1).num_clients() == 20);

  std::vector<int> short_groups(19, 0);
  CHECK_THROWS_AS(partition_by_group(d, short_groups, 0.6, 0.2, 1), PartitionError);
}

TEST_CASE("manifest json round-trips") {
  const Dataset d = make_synthetic(6, 4, 100, 4.0, 13);
  PartitionSpec spec = base_spec();
  spec.num_clients = 4;
  const PartitionManifest m = partition_nclass(d, spec);
  const std::string path =
      (std::filesystem::temp_directory_path() / "lfl_manifest_test.json").string();
  save_manifest(m, path);
  const PartitionManifest back = load_manifest(path);
  CHECK(manifest_digest(m) == manifest_digest(back));
  CHECK(back.dataset_digest == dataset_digest(d));
  CHECK(back.clients[2].train == m.clients[2].train);
  std::filesystem::remove(path);
}

TEST_CASE("idx ingestion parses the format and scales to [0,1]") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path();
  const std::string img_path = (dir / "lfl_test_images").string();
  const std::string lbl_path = (dir / "lfl_test_labels").string();

  auto write_bytes = [](const std::string& path, const std::vector<unsigned char>& bytes) {
    std::ofstream f(path, std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  };
  // Two 2x2 images.
  std::vector<unsigned char> img = {0x00, 0x00, 0x08, 0x03, 0, 0, 0, 2, 0, 0, 0, 2,
                                    0,    0,    0,    2,   0, 255, 128, 64, 10, 20, 30, 40};
  std::vector<unsigned char> lbl = {0x00, 0x00, 0x08, 0x01, 0, 0, 0, 2, 1, 0};
  write_bytes(img_path, img);
  write_bytes(lbl_path, lbl);

  const Dataset d = load_idx(img_path, lbl_path);
  CHECK(d.size() == 2);
  CHECK(d.dim() == 4);
  CHECK(d.class_count == 2);
  CHECK(d.features(0, 0) == 0.0f);
  CHECK(d.features(0, 1) == 1.0f);
  CHECK(d.features(0, 2) == doctest::Approx(128.0f / 255.0f));
  CHECK(d.labels[0] == 1);
  CHECK(d.labels[1] == 0);

  SUBCASE("bad magic") {
    auto bad = img;
    bad[3] = 0x07;
    write_bytes(img_path, bad);
    CHECK_THROWS_WITH_AS(load_idx(img_path, lbl_path), doctest::Contains("bad image magic"),
                         IdxError);
  }
  SUBCASE("count mismatch") {
    auto bad = lbl;
    bad[7] = 3;
    write_bytes(lbl_path, bad);
    try {
      load_idx(img_path, lbl_path);
      FAIL("expected IdxError");
    } catch (const IdxError& e) {
      CHECK(e.kind == IdxError::Kind::CountMismatch);
    }
  }
  SUBCASE("truncated data") {
    auto bad = img;
    bad.resize(bad.size() - 3);
    write_bytes(img_path, bad);
    try {
      load_idx(img_path, lbl_path);
      FAIL("expected IdxError");
    } catch (const IdxError& e) {
      CHECK(e.kind == IdxError::Kind::Truncated);
    }
  }
  fs::remove(img_path);
  fs::remove(lbl_path);
}
