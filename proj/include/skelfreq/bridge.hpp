#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "skelfreq/classifier.hpp"

namespace skelfreq {

struct BridgeLaunchSpec {
  /// Program and arguments; argv[0] is looked up on PATH.
  std::vector<std::string> argv;
  std::chrono::milliseconds timeout{10000};
};

/// Adapter for an external classifier process speaking line-delimited JSON
/// over its standard streams:
///
///   → {"op":"hello"}                                  ← {"ok":true,"classes":K}
///   → {"op":"predict","shape":[B,3,N,T],"data":[...]} ← {"ok":true,"scores":[[...K...]×B]}
///
/// Any {"ok":false,...} reply, malformed line, timeout, or child exit raises
/// bridge-error. Requests are serialised; the child is shut down on
/// destruction. No gradients.
class BridgeClassifier final : public Classifier {
 public:
  explicit BridgeClassifier(BridgeLaunchSpec spec);
  ~BridgeClassifier() override;

  BridgeClassifier(const BridgeClassifier&) = delete;
  BridgeClassifier& operator=(const BridgeClassifier&) = delete;

  std::size_t class_count() const override { return classes_; }
  std::vector<Scores> predict(std::span<const SignalTriple> batch) const override;
  std::string id() const override;

  /// Encodes a predict request line (without the trailing newline).
  static std::string encode_predict(std::span<const SignalTriple> batch);
  /// Decodes a predict reply; throws bridge-error on protocol violations.
  static std::vector<Scores> decode_scores(const std::string& line, std::size_t batch, std::size_t classes);

 private:
  std::string exchange(const std::string& request) const;
  std::string read_line() const;
  std::string describe_exit() const;
  void shutdown() noexcept;

  BridgeLaunchSpec spec_;
  int fd_ = -1;
  int pid_ = -1;
  std::size_t classes_ = 0;
  mutable std::string buffer_;
  mutable std::mutex mutex_;
};

/// bridge_classifier(spec) from the contract: launches and handshakes.
std::unique_ptr<Classifier> bridge_classifier(BridgeLaunchSpec spec);

}  // namespace skelfreq
