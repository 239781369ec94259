#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include <json.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "skelfreq/artifacts.hpp"
#include "skelfreq/data_io.hpp"
#include "skelfreq/error.hpp"

using namespace skelfreq;
namespace fs = std::filesystem;

namespace {

const fs::path kNtu = fs::path(SKELFREQ_FIXTURES) / "ntu";

fs::path scratch_dir(const char* name) {
  const auto dir = fs::temp_directory_path() / ("skelfreq-test-" + std::string(name));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("golden NTU fixtures parse exactly") {
  for (const char* stem : {"S001C001P001R001A001", "S002C003P004R001A010"}) {
    CAPTURE(stem);
    const auto seqs = load_ntu_file(kNtu / (std::string(stem) + ".skeleton"));
    const auto golden = nlohmann::json::parse(read_text_file(kNtu / (std::string(stem) + ".golden.json")));
    REQUIRE(seqs.size() == golden.size());
    for (std::size_t b = 0; b < seqs.size(); ++b) {
      const auto& g = golden[b];
      CHECK(seqs[b].nodes() == 25);
      CHECK(seqs[b].frames() == g["t"].get<std::size_t>());
      CHECK(seqs[b].meta.label == g["label"].get<int>());
      CHECK(seqs[b].meta.subject == g["subject"].get<int>());
      CHECK(seqs[b].meta.name == g["name"].get<std::string>());
      const auto expected = sequence_from_json(g.dump());
      CHECK(seqs[b].positions() == expected.positions());
    }
  }
}

TEST_CASE("malformed NTU fixtures report the offending line") {
  const auto cases = nlohmann::json::parse(read_text_file(kNtu / "malformed.json"));
  REQUIRE(cases.size() >= 3);
  for (const auto& c : cases) {
    const auto file = c["file"].get<std::string>();
    CAPTURE(file);
    try {
      (void)parse_ntu_skeleton(read_text_file(kNtu / file));
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.kind() == ErrorKind::parse);
      CHECK(e.line() == c["line"].get<std::size_t>());
    }
  }
}

TEST_CASE("NTU names") {
  const auto id = parse_ntu_name("/data/S017C003P020R002A060.skeleton");
  CHECK(id.setup == 17);
  CHECK(id.camera == 3);
  CHECK(id.subject == 20);
  CHECK(id.replication == 2);
  CHECK(id.action == 60);
  try {
    (void)parse_ntu_name("clip_0001.skeleton");
    FAIL("expected data-error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::data);
  }
}

TEST_CASE("cross-subject split is a partition matching a hand partition") {
  Dataset d;
  const int subjects[] = {1, 3, 2, 40, 38, 7, 8, 1, 39, 25};
  for (std::size_t i = 0; i < 10; ++i) {
    auto s = fixture::random_sequence(2, i);
    s.meta.subject = subjects[i];
    s.meta.name = std::to_string(i);
    d.push_back(s);
  }
  const auto split = split_cross_subject(d, ntu_cross_subject_training_ids());
  std::vector<std::string> train, test;
  for (const auto& s : split.train) train.push_back(s.meta.name);
  for (const auto& s : split.test) test.push_back(s.meta.name);
  CHECK(train == std::vector<std::string>{"0", "2", "4", "6", "7", "9"});
  CHECK(test == std::vector<std::string>{"1", "3", "5", "8"});

  const auto none = split_cross_subject(d, {});
  CHECK(none.train.empty());
  CHECK(none.test.size() == 10);
  CHECK(ntu_cross_subject_training_ids().size() == 20);

  auto anonymous = fixture::random_sequence(2, 1);
  anonymous.meta.subject = -1;
  anonymous.meta.name = "S001C001P005R001A001";
  CHECK(split_cross_subject(Dataset{anonymous}, ntu_cross_subject_training_ids()).train.size() == 1);
  anonymous.meta.name = "unnamed";
  CHECK_THROWS_AS(split_cross_subject(Dataset{anonymous}, {}), Error);
}

TEST_CASE("validation split") {
  const auto d = synthetic_actions(2, 50, 10, 1);
  const auto v = validation_split(d, 0.05, 3);
  CHECK(v.test.size() == 5);
  CHECK(v.train.size() == 95);
  std::set<std::string> names;
  for (const auto& s : v.train) names.insert(s.meta.name + std::to_string(s.meta.label));
  for (const auto& s : v.test) names.insert(s.meta.name + std::to_string(s.meta.label));
  CHECK(names.size() == 100);
  CHECK(validation_split(d, 0.05, 3).test == v.test);
}

TEST_CASE("synthetic actions: sizes, determinism, errors") {
  const auto d = synthetic_actions(2, 50, 30, 7);
  CHECK(d.size() == 100);
  CHECK(synthetic_actions(2, 50, 30, 7) == d);
  CHECK(synthetic_actions(2, 50, 30, 8) != d);
  CHECK(d[0].meta.name == "S001C001P001R001A001");
  CHECK(d[60].meta.subject == 11);
  CHECK(head_length(d[0]) == doctest::Approx(0.18).epsilon(0.05));
  CHECK_THROWS_AS(synthetic_actions(1, 5, 30, 1), Error);
  CHECK_THROWS_AS(synthetic_actions(2, 0, 30, 1), Error);
  CHECK_THROWS_AS(synthetic_actions(2, 5, 1, 1), Error);
}

TEST_CASE("synthetic classes separate in the reference embedding at noise 0") {
  SyntheticOptions quiet;
  quiet.noise = 0.0;
  const std::size_t K = 4;
  const auto d = synthetic_actions(K, 40, 60, 9, quiet);
  const ReferenceClassifier probe(25, K, 1, 0);  // identity standardisation
  std::vector<std::vector<std::vector<double>>> per_class(K);
  for (const auto& s : d)
    per_class[static_cast<std::size_t>(s.meta.label)].push_back(probe.embedding(probe.pipeline()(s)));

  const std::size_t D = probe.embedding_size();
  std::vector<std::vector<double>> mean(K, std::vector<double>(D, 0.0));
  double worst_spread = 0.0;
  for (std::size_t c = 0; c < K; ++c) {
    for (const auto& e : per_class[c])
      for (std::size_t j = 0; j < D; ++j) mean[c][j] += e[j] / static_cast<double>(per_class[c].size());
    double ss = 0.0;
    for (const auto& e : per_class[c])
      for (std::size_t j = 0; j < D; ++j) ss += std::pow(e[j] - mean[c][j], 2);
    worst_spread = std::max(worst_spread, std::sqrt(ss / static_cast<double>(per_class[c].size())));
  }
  double closest = 1e300;
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t b = a + 1; b < K; ++b) {
      double dd = 0.0;
      for (std::size_t j = 0; j < D; ++j) dd += std::pow(mean[a][j] - mean[b][j], 2);
      closest = std::min(closest, std::sqrt(dd));
    }
  CAPTURE(closest);
  CAPTURE(worst_spread);
  CHECK(closest > 5.0 * worst_spread);
}

TEST_CASE("JSON sequences round trip") {
  auto s = fixture::random_sequence(4, 3, 0.5, 7);
  s.meta.subject = 12;
  s.meta.name = "demo";
  const auto back = sequence_from_json(sequence_to_json(s));
  CHECK(back.positions() == s.positions());
  CHECK(back.meta.label == 7);
  CHECK(back.meta.subject == 12);
  CHECK_THROWS_AS(sequence_from_json(R"({"n":25,"t":2,"positions":[]})"), Error);
  CHECK_THROWS_AS(sequence_from_json(R"({"n":3,"t":1,"positions":[[[0,0,0],[0,0,0],[0,0,0]]]})"), Error);
  CHECK_THROWS_AS(sequence_from_json("[1,2"), Error);

  const auto dir = scratch_dir("dataset");
  write_text_file_atomic(dir / "b.json", sequence_to_json(s));
  write_text_file_atomic(dir / "a.json", sequence_to_json(back));
  fs::copy_file(kNtu / "S001C001P001R001A001.skeleton", dir / "S001C001P001R001A001.skeleton");
  const auto loaded = load_dataset(dir);
  CHECK(loaded.size() == 3);
  CHECK(loaded[2].meta.name == "demo");
  CHECK(!fs::exists(dir / "a.json.tmp"));
}

TEST_CASE("matrix artifacts round trip through CSV with identical checksums") {
  const auto dir = scratch_dir("artifacts");
  const auto m = oracle::random_matrix(25, 64, 5);
  write_matrix_artifact(dir / "grid", m, {{"note", "25x64 grid"}});
  const auto back = read_matrix_artifact(dir / "grid");
  CHECK(back.values == m);
  CHECK(matrix_checksum(back.values) == matrix_checksum(m));
  CHECK(back.metadata["note"] == "25x64 grid");
  CHECK(matrix_from_csv(matrix_to_csv(m)) == m);

  // a tampered payload fails its checksum
  auto csv = read_text_file(dir / "grid.csv");
  csv[0] = csv[0] == '0' ? '1' : '0';
  write_text_file_atomic(dir / "grid.csv", csv);
  CHECK_THROWS_AS(read_matrix_artifact(dir / "grid"), Error);
  CHECK_THROWS_AS(matrix_from_csv("1,2\n3\n"), Error);
}

TEST_CASE("heatmap artifacts round trip and reject incomplete metadata") {
  const auto dir = scratch_dir("heatmap");
  HeatmapGrid g;
  g.error_rates = oracle::random_matrix(25, 64, 11, 0.5);
  for (double& e : g.error_rates.values()) e += 0.5;
  g.feature_kind = FeatureKind::bone_motion;
  g.v = 1.5;
  g.sample_count = 100;
  g.requested_samples = 1000;
  g.base_seed = 0xfedcba9876543210ULL;
  g.basis_id = "gft-25-abc";
  g.model_id = "reference-123";
  write_heatmap(dir / "h", g, {{"seed", 7}});
  CHECK(read_heatmap(dir / "h") == g);

  for (const char* field : {"v", "model_id", "feature_kind", "checksum"}) {
    CAPTURE(field);
    auto meta = nlohmann::json::parse(read_text_file(dir / "h.json"));
    meta.erase(field);
    write_text_file_atomic(dir / "h.json", meta.dump());
    try {
      (void)read_heatmap(dir / "h");
      FAIL("expected format-error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::format);
    }
    write_heatmap(dir / "h", g);
  }
}

TEST_CASE("sweep tables serialise") {
  const auto dir = scratch_dir("sweep");
  SweepTable t;
  t.model_ids = {"a", "b"};
  t.scaled_norm = 17.0;
  t.subset_size = 3;
  t.rows.push_back({SweepMask::spatial_low, 2, 0.2, 1, 0.5});
  write_sweep_table(dir / "s", t);
  const auto csv = read_text_file(dir / "s.csv");
  CHECK(csv == "mask,bandwidth,fraction,model,model_id,accuracy\nspatial-low,2,0.20000000000000001,1,b,0.5\n");
  CHECK(sweep_table_json(t)["rows"][0]["accuracy"] == 0.5);
}
