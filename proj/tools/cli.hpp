#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "skelfreq/bridge.hpp"
#include "skelfreq/classifier.hpp"

namespace cli {

using nlohmann::json;

/// Per-run state shared by all subcommands.
struct Context {
  std::string command;
  json config;  ///< effective configuration, including "seed"
  std::filesystem::path out;
  std::string format = "json";
  std::size_t jobs = 1;
  bool gnuplot = false;

  std::uint64_t seed() const { return config.at("seed").get<std::uint64_t>(); }
  template <class T>
  T get(const std::string& key) const {
    return config.at(key).get<T>();
  }
  /// {"command", "config"} block embedded in every artifact.
  json metadata() const { return {{"command", command}, {"config", config}}; }
};

/// A subcommand whose parameters can come from defaults, a JSON config file,
/// or flags, in increasing priority.
class Command {
 public:
  using Runner = std::function<json(const Context&)>;

  Command(CLI::App& parent, const std::string& name, const std::string& description, Runner run);

  template <class T>
  Command& param(const std::string& key, T fallback, const std::string& help) {
    auto store = std::make_shared<T>(fallback);
    CLI::Option* opt = nullptr;
    if constexpr (std::is_same_v<T, bool>) {
      opt = app_->add_flag(flag_name(key), *store, help);
    } else {
      opt = app_->add_option(flag_name(key), *store, help);
      if constexpr (requires { fallback.begin(); } && !std::is_same_v<T, std::string>) opt->delimiter(',');
    }
    params_.push_back({key, json(fallback), opt, [store] { return json(*store); }});
    return *this;
  }

  const std::string& name() const { return name_; }
  CLI::App* app() const { return app_; }
  bool selected() const { return app_->parsed(); }

  /// Defaults, then `file_config` (already unwrapped), then explicit flags.
  json effective(const json& file_config) const;
  json run(const Context& ctx) const { return run_(ctx); }

 private:
  struct Param {
    std::string key;
    json fallback;
    CLI::Option* option;
    std::function<json()> value;
  };
  static std::string flag_name(const std::string& key);

  std::string name_;
  CLI::App* app_;
  Runner run_;
  std::vector<Param> params_;
};

/// Extracts the parameter block from a config file or a previous run's
/// metadata sidecar; rejects metadata written by a different subcommand.
json unwrap_config(const json& j, const std::string& command);

void register_commands(CLI::App& app, std::vector<std::unique_ptr<Command>>& commands);

// Shared parameter groups.
void add_data_params(Command& c);
void add_pipeline_params(Command& c);
/// The "model" list plus the training parameters used for "standard"/"free".
void add_model_params(Command& c, std::vector<std::string> default_models);
void add_training_params(Command& c);

struct Data {
  skelfreq::Dataset train;
  skelfreq::Dataset test;
};
Data load_data(const Context& ctx);
skelfreq::InputPipeline pipeline_from(const Context& ctx);

/// Models named by the "model" list: "standard" and "free" train on the
/// training split, "bridge:<command line>" launches an external classifier,
/// anything else is a saved reference model.
struct ModelSet {
  std::vector<std::unique_ptr<skelfreq::Classifier>> owned;
  std::vector<const skelfreq::Classifier*> pointers() const;
};
ModelSet load_models(const Context& ctx, const Data& data);

skelfreq::ReferenceClassifier train_model(const Context& ctx, const skelfreq::Dataset& train, const std::string& mode);

/// Writes a matrix artifact and, with --gnuplot, a `<stem>.dat` companion.
void write_matrix(const Context& ctx, const std::string& stem, const skelfreq::Matrix& m, json extra = json::object());

}  // namespace cli
