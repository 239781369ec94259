#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "skelfreq/bridge.hpp"
#include "skelfreq/data_io.hpp"
#include "skelfreq/error.hpp"

using namespace skelfreq;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kBridge = fs::path(SKELFREQ_FIXTURES) / "bridge";

BridgeLaunchSpec stub(std::vector<std::string> args, int timeout_ms = 5000) {
  args.insert(args.begin(), SKELFREQ_BRIDGE_STUB);
  return {args, std::chrono::milliseconds(timeout_ms)};
}

std::string bridge_error_message(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::bridge);
    return e.what();
  }
  FAIL("expected bridge-error");
  return {};
}

std::vector<SignalTriple> shared_batch() {
  const auto j = json::parse(read_text_file(kBridge / "batch.json"));
  const auto shape = j["shape"].get<std::vector<std::size_t>>();
  const auto data = j["data"].get<std::vector<double>>();
  std::vector<SignalTriple> batch(shape[0]);
  std::size_t pos = 0;
  for (auto& item : batch)
    for (auto& ch : item) {
      ch = Matrix(shape[2], shape[3]);
      for (double& v : ch.values()) v = data[pos++];
    }
  return batch;
}

SignalTriple zeros(std::size_t T) { return {Matrix(25, T), Matrix(25, T), Matrix(25, T)}; }

}  // namespace

TEST_CASE("echo stub scores come back unchanged") {
  BridgeClassifier c(stub({"echo", "4"}));
  CHECK(c.class_count() == 4);
  CHECK(!c.differentiable());
  const std::vector<SignalTriple> batch = {zeros(8), zeros(8), zeros(8)};
  const auto scores = c.predict(batch);
  REQUIRE(scores.size() == 3);
  for (std::size_t b = 0; b < 3; ++b) CHECK(scores[b] == Scores{static_cast<double>(b), 1.0, -1.0, 0.0});
  CHECK(c.predict({}).empty());
  CHECK(c.predict_label(zeros(4)) == 1);
  CHECK_THROWS_AS(c.input_gradient(zeros(4), 0), Error);
}

TEST_CASE("protocol violations raise bridge-error with a diagnostic") {
  {
    BridgeClassifier c(stub({"malformed"}));
    CHECK(bridge_error_message([&] { c.predict_one(zeros(4)); }).find("malformed") != std::string::npos);
  }
  {
    BridgeClassifier c(stub({"error"}));
    CHECK(bridge_error_message([&] { c.predict_one(zeros(4)); }).find("model exploded") != std::string::npos);
  }
  {
    BridgeClassifier c(stub({"exit"}));
    CHECK(bridge_error_message([&] { c.predict_one(zeros(4)); }).find("status 3") != std::string::npos);
  }
  {
    BridgeClassifier c(stub({"slow"}, 300));
    CHECK(bridge_error_message([&] { c.predict_one(zeros(4)); }).find("timed out") != std::string::npos);
  }
  bridge_error_message([] { BridgeClassifier c(stub({"badhello"})); });
  bridge_error_message([] { BridgeClassifier c({{"/nonexistent/classifier-server"}, std::chrono::milliseconds(2000)}); });
}

TEST_CASE("reply decoding") {
  CHECK(BridgeClassifier::decode_scores(R"({"ok":true,"scores":[[1,2],[3,4]]})", 2, 2) ==
        std::vector<Scores>{{1, 2}, {3, 4}});
  for (const char* bad : {R"({"scores":[[1,2]]})", R"({"ok":true,"scores":[[1,2]],"x":1)", R"({"ok":true})",
                          R"({"ok":true,"scores":[[1,2,3]]})", R"({"ok":true,"scores":[[1,2],[3,4]]})",
                          R"({"ok":true,"scores":[[1,"a"]]})", R"({"ok":false,"error":"nope"})"}) {
    CAPTURE(bad);
    bridge_error_message([&] { (void)BridgeClassifier::decode_scores(bad, 1, 2); });
  }
  bridge_error_message([] { (void)BridgeClassifier::decode_scores(R"({"ok":true,"scores":[[1e999,0]]})", 1, 2); });
}

TEST_CASE("shared batch: the request encoding matches the fixture") {
  const auto batch = shared_batch();
  const auto fixture = json::parse(read_text_file(kBridge / "batch.json"));
  const auto request = json::parse(BridgeClassifier::encode_predict(batch));
  CHECK(request["op"] == "predict");
  CHECK(request["shape"] == fixture["shape"]);
  CHECK(request["data"] == fixture["data"]);
}

TEST_CASE("shared batch: the remote reference model agrees with the local forward pass") {
  const auto model = ReferenceClassifier::from_json(read_text_file(kBridge / "model.json"));
  BridgeClassifier remote(stub({"reference", (kBridge / "model.json").string()}));
  CHECK(remote.class_count() == model.class_count());
  const auto batch = shared_batch();
  const auto local = model.predict(batch);
  const auto got = remote.predict(batch);
  REQUIRE(got.size() == local.size());
  for (std::size_t b = 0; b < got.size(); ++b) {
    CHECK(got[b] == local[b]);
    CHECK(argmax(got[b]) == argmax(local[b]));
  }
}

TEST_CASE("protocol conformance vector, byte for byte") {
  const auto tmp = fs::temp_directory_path() / "skelfreq-bridge-conformance";
  fs::create_directories(tmp);
  std::istringstream vector(read_text_file(kBridge / "protocol.jsonl"));
  std::string requests, expected, line;
  std::size_t count = 0;
  while (std::getline(vector, line)) {
    const auto entry = json::parse(line);
    requests += (entry.contains("request_raw") ? entry["request_raw"].get<std::string>() : entry["request"].dump());
    requests += "\n";
    expected += entry["response"].dump() + "\n";
    ++count;
  }
  CHECK(count >= 5);
  write_text_file_atomic(tmp / "in.jsonl", requests);
  const std::string cmd = std::string(SKELFREQ_BRIDGE_STUB) + " reference '" + (kBridge / "model.json").string() +
                          "' < '" + (tmp / "in.jsonl").string() + "' > '" + (tmp / "out.jsonl").string() + "'";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(read_text_file(tmp / "out.jsonl") == expected);
}
