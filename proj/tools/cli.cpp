#include "cli.hpp"

#include <sstream>

#include "skelfreq/artifacts.hpp"
#include "skelfreq/data_io.hpp"
#include "skelfreq/error.hpp"
#include "skelfreq/rng.hpp"

namespace cli {

using namespace skelfreq;

Command::Command(CLI::App& parent, const std::string& name, const std::string& description, Runner run)
    : name_(name), app_(parent.add_subcommand(name, description)), run_(std::move(run)) {}

std::string Command::flag_name(const std::string& key) {
  std::string flag = "--" + key;
  std::replace(flag.begin(), flag.end(), '_', '-');
  return flag;
}

json Command::effective(const json& file_config) const {
  json out = json::object();
  for (const auto& p : params_) out[p.key] = p.fallback;
  for (const auto& [key, value] : file_config.items()) {
    if (key == "seed") continue;
    require(out.contains(key), ErrorKind::parameter, "config key '" + key + "' is not a parameter of " + name_);
    require(std::string(out[key].type_name()) == value.type_name() ||
                (out[key].is_number() && value.is_number()) || (out[key].is_array() && value.is_array()),
            ErrorKind::parameter, "config key '" + key + "' has the wrong type");
    out[key] = value;
  }
  for (const auto& p : params_)
    if (p.option->count() > 0) out[p.key] = p.value();
  return out;
}

json unwrap_config(const json& j, const std::string& command) {
  require(j.is_object(), ErrorKind::parameter, "config file must hold a JSON object");
  json cur = j;
  while (cur.contains("config") && cur["config"].is_object()) {
    if (cur.contains("command")) {
      require(cur["command"] == command, ErrorKind::parameter,
              "config was written by '" + cur["command"].get<std::string>() + "', not '" + command + "'");
    }
    cur = cur["config"];
  }
  return cur;
}

void add_data_params(Command& c) {
  c.param<std::string>("data", "", "dataset: directory of .json/.skeleton files or one file (default: synthetic)")
      .param<std::string>("topology", "", "edge-list file for a custom skeleton (default: NTU 25 joints)")
      .param<std::string>("topology_meta", "", "JSON sidecar for --topology")
      .param<std::string>("split", "cross-subject", "cross-subject | none (evaluate on everything)")
      .param<std::size_t>("classes", 4, "synthetic: number of classes")
      .param<std::size_t>("per_class", 200, "synthetic: sequences per class")
      .param<std::size_t>("length", 80, "synthetic: frames per sequence")
      .param<double>("noise", 0.005, "synthetic: per-coordinate noise (m)");
}

void add_pipeline_params(Command& c) {
  c.param<std::string>("feature", "joint", "joint | joint_motion | bone | bone_motion")
      .param<std::size_t>("frames", default_resampled_frames, "model input length T'");
}

void add_model_params(Command& c, std::vector<std::string> default_models) {
  c.param("model", std::move(default_models),
          "models: standard | free | saved model JSON | bridge:<command line> (comma separated)")
      .param<std::size_t>("bridge_timeout_ms", 10000, "reply timeout for bridge models");
  add_training_params(c);
}

void add_training_params(Command& c) {
  c.param<std::size_t>("hidden", 32, "hidden units of trained models")
      .param<std::size_t>("epochs", 30, "training epochs")
      .param<std::size_t>("batch", 32, "minibatch size")
      .param<double>("lr", 0.01, "learning rate")
      .param<double>("momentum", 0.9, "SGD momentum")
      .param<std::size_t>("hop_steps", 4, "free adversarial training: replays per minibatch")
      .param<double>("train_eps_head", 3.0, "free adversarial training: radius in head lengths");
}

InputPipeline pipeline_from(const Context& ctx) {
  InputPipeline p;
  p.kind = parse_feature_kind(ctx.get<std::string>("feature"));
  p.frames = ctx.get<std::size_t>("frames");
  require(p.frames >= 2, ErrorKind::parameter, "--frames must be at least 2");
  return p;
}

Data load_data(const Context& ctx) {
  TopologyPtr topology = ntu25_topology();
  if (const auto path = ctx.get<std::string>("topology"); !path.empty())
    topology = std::make_shared<const SkeletonTopology>(load_topology(path, ctx.get<std::string>("topology_meta")));

  Dataset all;
  if (const auto path = ctx.get<std::string>("data"); !path.empty()) {
    all = load_dataset(path, topology);
  } else {
    require(topology == ntu25_topology(), ErrorKind::parameter, "synthetic data needs the NTU topology");
    SyntheticOptions options;
    options.noise = ctx.get<double>("noise");
    all = synthetic_actions(ctx.get<std::size_t>("classes"), ctx.get<std::size_t>("per_class"),
                            ctx.get<std::size_t>("length"), ctx.seed(), options);
  }
  require(!all.empty(), ErrorKind::data, "dataset is empty");

  const auto split = ctx.get<std::string>("split");
  if (split == "none") return {all, all};
  require(split == "cross-subject", ErrorKind::parameter, "unknown split '" + split + "'");
  auto parts = split_cross_subject(all, ntu_cross_subject_training_ids());
  return {std::move(parts.train), std::move(parts.test)};
}

ReferenceClassifier train_model(const Context& ctx, const Dataset& train, const std::string& mode) {
  require(!train.empty(), ErrorKind::data, "training split is empty (try --split none)");
  int max_label = 0;
  for (const auto& s : train) max_label = std::max(max_label, s.meta.label);
  const auto pipeline = pipeline_from(ctx);
  ReferenceClassifier model(train.front().nodes(), static_cast<std::size_t>(max_label) + 1,
                            ctx.get<std::size_t>("hidden"), derive_seed(ctx.seed(), 1), pipeline);
  std::vector<SignalTriple> inputs;
  inputs.reserve(train.size());
  for (const auto& s : train) inputs.push_back(pipeline(s));
  model.fit_normalization(inputs);

  TrainConfig tc;
  tc.epochs = ctx.get<std::size_t>("epochs");
  tc.batch_size = ctx.get<std::size_t>("batch");
  tc.learning_rate = ctx.get<double>("lr");
  tc.momentum = ctx.get<double>("momentum");
  tc.seed = derive_seed(ctx.seed(), 2);
  if (mode == "standard") return train_standard(std::move(model), train, tc);
  require(mode == "free", ErrorKind::parameter, "unknown training mode '" + mode + "'");
  FreeConfig fc;
  fc.train = tc;
  fc.hop_steps = ctx.get<std::size_t>("hop_steps");
  fc.epsilon_head = ctx.get<double>("train_eps_head");
  return train_free(std::move(model), train, fc);
}

std::vector<const Classifier*> ModelSet::pointers() const {
  std::vector<const Classifier*> out;
  for (const auto& m : owned) out.push_back(m.get());
  return out;
}

ModelSet load_models(const Context& ctx, const Data& data) {
  const auto names = ctx.get<std::vector<std::string>>("model");
  require(!names.empty(), ErrorKind::parameter, "no model given");
  const auto pipeline = pipeline_from(ctx);
  ModelSet set;
  for (const auto& name : names) {
    if (name == "standard" || name == "free") {
      set.owned.push_back(std::make_unique<ReferenceClassifier>(train_model(ctx, data.train, name)));
    } else if (name.rfind("bridge:", 0) == 0) {
      BridgeLaunchSpec spec;
      std::istringstream words(name.substr(7));
      for (std::string w; words >> w;) spec.argv.push_back(w);
      spec.timeout = std::chrono::milliseconds(ctx.get<std::size_t>("bridge_timeout_ms"));
      set.owned.push_back(bridge_classifier(std::move(spec)));
    } else {
      auto model = ReferenceClassifier::load(name);
      require(model.pipeline() == pipeline, ErrorKind::parameter,
              "model " + name + " was trained with a different --feature/--frames");
      set.owned.push_back(std::make_unique<ReferenceClassifier>(std::move(model)));
    }
  }
  return set;
}

void write_matrix(const Context& ctx, const std::string& stem, const Matrix& m, json extra) {
  extra["command"] = ctx.command;
  extra["config"] = ctx.config;
  write_matrix_artifact(ctx.out / stem, m, std::move(extra));
  if (ctx.gnuplot) write_gnuplot_matrix(ctx.out / (stem + ".dat"), m);
}

}  // namespace cli
