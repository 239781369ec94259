#include <algorithm>
#include <cmath>
#include <numeric>

#include "cli.hpp"
#include "skelfreq/artifacts.hpp"
#include "skelfreq/data_io.hpp"
#include "skelfreq/error.hpp"
#include "skelfreq/harness.hpp"
#include "skelfreq/perturbations.hpp"
#include "skelfreq/rng.hpp"

namespace cli {

using namespace skelfreq;
namespace fs = std::filesystem;

namespace {

// Seed paths below the run seed; synthetic data uses the run seed itself.
enum SeedTag : std::uint64_t { kAttack = 3, kHeatmap = 4, kSweep = 5, kCorrupt = 6, kFilter = 8 };

json table(std::vector<std::string> columns, json rows) {
  return {{"columns", std::move(columns)}, {"rows", std::move(rows)}};
}

Dataset limited(const Dataset& data, std::size_t limit) {
  if (limit == 0 || limit >= data.size()) return data;
  return {data.begin(), data.begin() + static_cast<std::ptrdiff_t>(limit)};
}

std::vector<SignalTriple> model_inputs(const Dataset& data, const InputPipeline& pipeline) {
  std::vector<SignalTriple> out;
  out.reserve(data.size());
  for (const auto& s : data) out.push_back(pipeline(s));
  return out;
}

std::pair<std::optional<SpectralMask>, std::optional<SpectralMask>> masks_for(SweepMask mask, std::size_t bandwidth,
                                                                            std::size_t nodes, std::size_t frames) {
  const auto name = to_string(mask);
  const auto kind = name.ends_with("low") ? MaskKind::low : MaskKind::high;
  std::optional<SpectralMask> spatial;
  std::optional<SpectralMask> temporal;
  if (name.starts_with("spatial") || name.starts_with("spatiotemporal"))
    spatial = make_mask(MaskAxis::spatial, kind, bandwidth, nodes);
  if (name.starts_with("temporal") || name.starts_with("spatiotemporal"))
    temporal = make_mask(MaskAxis::temporal, kind, bandwidth, frames);
  return {spatial, temporal};
}

json run_spectrum(const Context& ctx) {
  const auto data = load_data(ctx);
  const auto pipeline = pipeline_from(ctx);
  Dataset all = data.test;
  if (ctx.get<std::string>("split") != "none") all.insert(all.end(), data.train.begin(), data.train.end());
  all = limited(all, ctx.get<std::size_t>("limit"));
  const auto basis = graph_basis(all.front().topology());
  const auto clean = model_inputs(all, pipeline);
  const auto mean = mean_amplitude_spectrum(clean, basis);
  write_matrix(ctx, "mean_spectrum", mean, {{"items", all.size()}, {"basis_id", basis.id()}});

  json rows = json::array({{"mean_spectrum", all.size(), checksum_hex(matrix_checksum(mean))}});
  if (const auto text = ctx.get<std::string>("corruption"); !text.empty()) {
    auto spec = CorruptionSpec::parse(text);
    std::vector<SignalTriple> corrupted;
    corrupted.reserve(all.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
      spec.seed = derive_seed(ctx.seed(), kCorrupt, i);
      corrupted.push_back(pipeline(apply_corruption(all[i], spec)));
    }
    const auto diff = difference_spectrum(clean, corrupted, basis, pipeline.frames);
    write_matrix(ctx, "difference_spectrum", diff,
                 {{"items", all.size()}, {"basis_id", basis.id()}, {"corruption", spec.describe()}});
    rows.push_back({"difference_spectrum", all.size(), checksum_hex(matrix_checksum(diff))});
  }
  return {{"table", table({"artifact", "items", "checksum"}, rows)}};
}

json run_filter(const Context& ctx) {
  const auto mask = parse_sweep_mask(ctx.get<std::string>("mask"));
  const auto bandwidth = ctx.get<std::size_t>("bandwidth");
  const auto frames = ctx.get<std::size_t>("frames");
  const auto norm = ctx.get<double>("norm");
  const auto& topology = SkeletonTopology::ntu25();
  const auto basis = graph_basis(topology);
  const auto [spatial, temporal] = masks_for(mask, bandwidth, topology.node_count, frames);
  const auto noise =
      band_limited_noise(topology.node_count, frames, basis, spatial, temporal, norm, derive_seed(ctx.seed(), kFilter));
  const auto spectrum = jft(noise, basis);
  const double leak = out_of_band_energy_fraction(spectrum, spatial, temporal);
  write_matrix(ctx, "noise", noise, {{"mask", to_string(mask)}, {"bandwidth", bandwidth}, {"norm", norm}});
  write_matrix(ctx, "noise_spectrum", spectrum.values.magnitude(), {{"basis_id", basis.id()}});
  return {{"table", table({"mask", "bandwidth", "norm", "out_of_band_fraction"},
                          json::array({{to_string(mask), bandwidth, frobenius_norm(noise), leak}}))}};
}

json run_heatmap(const Context& ctx) {
  const auto data = load_data(ctx);
  const auto models = load_models(ctx, data);
  require(models.owned.size() == 1, ErrorKind::parameter, "heatmap takes exactly one model");
  const auto pipeline = pipeline_from(ctx);
  const auto grid = fourier_heatmap(*models.owned.front(), data.test, pipeline, ctx.get<double>("v"),
                                    ctx.get<std::size_t>("samples"), derive_seed(ctx.seed(), kHeatmap),
                                    {.jobs = ctx.jobs});
  write_heatmap(ctx.out / "heatmap", grid, ctx.metadata());
  if (ctx.gnuplot) write_gnuplot_matrix(ctx.out / "heatmap.dat", grid.error_rates);
  const auto values = grid.error_rates.values();
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  const double peak = *std::max_element(values.begin(), values.end());
  return {{"table", table({"model_id", "v", "samples", "mean_error", "max_error", "checksum"},
                          json::array({{grid.model_id, grid.v, grid.sample_count, mean, peak,
                                        checksum_hex(matrix_checksum(grid.error_rates))}}))}};
}

json run_corrupt(const Context& ctx) {
  const auto data = load_data(ctx);
  const auto models = load_models(ctx, data);
  const auto pipeline = pipeline_from(ctx);
  const auto spec = CorruptionSpec::parse(ctx.get<std::string>("corruption"));
  const auto pointers = models.pointers();
  const auto seed = derive_seed(ctx.seed(), kCorrupt);
  const auto report = corruption_accuracy(pointers, data.test, pipeline, spec, seed);

  json rows = json::array();
  std::string csv = "model,model_id,accuracy\n";
  for (std::size_t m = 0; m < report.model_ids.size(); ++m) {
    rows.push_back({m, report.model_ids[m], report.accuracies[m]});
    char line[64];
    std::snprintf(line, sizeof(line), ",%.17g\n", report.accuracies[m]);
    csv += std::to_string(m) + "," + report.model_ids[m] + line;
  }
  write_text_file_atomic(ctx.out / "corruption.csv", csv);
  json meta = ctx.metadata();
  meta["corruption"] = spec.describe();
  meta["subset_size"] = report.subset_size;
  meta["model_ids"] = report.model_ids;
  meta["accuracies"] = report.accuracies;
  write_text_file_atomic(ctx.out / "corruption.json", meta.dump(2) + "\n");
  write_matrix(ctx, "difference_spectrum", report.difference_spectrum, {{"corruption", spec.describe()}});

  if (ctx.get<bool>("save_sequences")) {
    fs::create_directories(ctx.out / "corrupted");
    for (std::size_t i = 0; i < data.test.size(); ++i) {
      auto item_spec = spec;
      item_spec.seed = derive_seed(seed, i);
      const auto seq = apply_corruption(data.test[i], item_spec);
      const auto stem = seq.meta.name.empty() ? "item" + std::to_string(i) : seq.meta.name;
      write_text_file_atomic(ctx.out / "corrupted" / (stem + ".json"), sequence_to_json(seq));
    }
  }
  return {{"subset_size", report.subset_size}, {"table", table({"model", "model_id", "accuracy"}, rows)}};
}

json run_attack(const Context& ctx) {
  const auto data = load_data(ctx);
  const auto models = load_models(ctx, data);
  require(models.owned.size() == 1, ErrorKind::parameter, "attack takes exactly one model");
  const auto pipeline = pipeline_from(ctx);
  AttackSpec spec;
  spec.epsilon_head = ctx.get<double>("eps_head");
  spec.steps = ctx.get<std::size_t>("steps");
  spec.step_size = ctx.get<double>("step_size");
  spec.random_init = !ctx.get<bool>("no_random_init");
  spec.seed = derive_seed(ctx.seed(), kAttack);
  const auto items = limited(data.test, ctx.get<std::size_t>("limit"));
  const auto summary = attack_accuracy(*models.owned.front(), items, spec, pipeline);

  std::string csv = "index,name,label,clean_prediction,adversarial_prediction,success,delta_norm,epsilon\n";
  json rows = json::array();
  std::size_t successes = 0;
  for (std::size_t i = 0; i < summary.results.size(); ++i) {
    const auto& r = summary.results[i];
    successes += r.success ? 1 : 0;
    char line[512];
    std::snprintf(line, sizeof(line), "%zu,%s,%d,%d,%d,%d,%.17g,%.17g\n", i, items[i].meta.name.c_str(),
                  items[i].meta.label, r.clean_prediction, r.adversarial_prediction, r.success ? 1 : 0,
                  r.delta_norm, r.epsilon);
    csv += line;
    rows.push_back({i, items[i].meta.name, items[i].meta.label, r.clean_prediction, r.adversarial_prediction,
                    r.success, r.delta_norm, r.epsilon});
  }
  write_text_file_atomic(ctx.out / "attack_log.csv", csv);
  return {{"accuracy", summary.accuracy},
          {"success_rate", items.empty() ? 0.0 : static_cast<double>(successes) / static_cast<double>(items.size())},
          {"table", table({"index", "name", "label", "clean_prediction", "adversarial_prediction", "success",
                           "delta_norm", "epsilon"},
                          rows)}};
}

json run_train(const Context& ctx) {
  const auto data = load_data(ctx);
  const auto mode = ctx.get<std::string>("mode");
  const auto model = train_model(ctx, data.train, mode);
  model.save(ctx.out / "model.json");
  const auto pipeline = model.pipeline();
  const double train_acc = clean_accuracy(model, data.train, pipeline);
  const double test_acc = clean_accuracy(model, data.test, pipeline);
  return {{"model", (ctx.out / "model.json").string()},
          {"table", table({"mode", "train_items", "test_items", "train_accuracy", "test_accuracy"},
                          json::array({{mode, data.train.size(), data.test.size(), train_acc, test_acc}}))}};
}

json run_sweep(const Context& ctx) {
  const auto data = load_data(ctx);
  const auto models = load_models(ctx, data);
  const auto pipeline = pipeline_from(ctx);
  std::vector<SweepMask> masks;
  for (const auto& name : ctx.get<std::vector<std::string>>("mask")) masks.push_back(parse_sweep_mask(name));
  const auto fractions = ctx.get<std::vector<double>>("fractions");
  const auto bandwidths = ctx.get<std::vector<std::size_t>>("bandwidth");
  const auto pointers = models.pointers();
  const auto result = noise_robustness_sweep(pointers, data.test, pipeline, masks, ctx.get<double>("norm"), fractions,
                                             bandwidths, derive_seed(ctx.seed(), kSweep));
  write_sweep_table(ctx.out / "sweep", result, ctx.metadata());

  json rows = json::array();
  for (const auto& r : result.rows)
    rows.push_back({to_string(r.mask), r.bandwidth, r.fraction, r.model, result.model_ids[r.model], r.accuracy});
  return {{"subset_size", result.subset_size},
          {"table", table({"mask", "bandwidth", "fraction", "model", "model_id", "accuracy"}, rows)}};
}

json run_parse(const Context& ctx) {
  const fs::path input = ctx.get<std::string>("input");
  require(!input.empty(), ErrorKind::parameter, "--input is required");
  std::vector<fs::path> files;
  if (fs::is_directory(input)) {
    for (const auto& e : fs::directory_iterator(input))
      if (e.is_regular_file() && e.path().extension() == ".skeleton") files.push_back(e.path());
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(input);
  }
  require(!files.empty(), ErrorKind::data, "no .skeleton files under " + input.string());

  const bool convert = ctx.get<bool>("convert");
  if (convert) fs::create_directories(ctx.out / "sequences");
  json rows = json::array();
  std::size_t failures = 0;
  std::string first_error;
  for (const auto& file : files) {
    try {
      std::vector<SkeletonSequence> seqs;
      try {
        seqs = load_ntu_file(file);
      } catch (const Error& e) {
        // content is still worth validating when only the file name is non-standard
        if (e.kind() != ErrorKind::data) throw;
        seqs = parse_ntu_skeleton(read_text_file(file));
        for (std::size_t b = 0; b < seqs.size(); ++b)
          seqs[b].meta.name = file.stem().string() + (seqs.size() > 1 ? "#" + std::to_string(b) : "");
      }
      for (const auto& s : seqs) {
        rows.push_back({file.filename().string(), s.meta.name, s.frames(), s.meta.label, s.meta.subject, "ok"});
        if (convert) write_text_file_atomic(ctx.out / "sequences" / (s.meta.name + ".json"), sequence_to_json(s));
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::parse && e.kind() != ErrorKind::data) throw;
      ++failures;
      if (first_error.empty()) first_error = file.string() + ": " + e.what();
      rows.push_back({file.filename().string(), "", 0, -1, -1, e.what()});
    }
  }
  json out{{"files", files.size()}, {"failures", failures},
           {"table", table({"file", "name", "frames", "label", "subject", "status"}, rows)}};
  if (failures > 0) out["error"] = first_error;
  return out;
}

}  // namespace

void register_commands(CLI::App& app, std::vector<std::unique_ptr<Command>>& commands) {
  auto add = [&](const char* name, const char* description, Command::Runner run) -> Command& {
    commands.push_back(std::make_unique<Command>(app, name, description, std::move(run)));
    return *commands.back();
  };

  {
    auto& c = add("spectrum", "mean amplitude spectrum, optionally the difference spectrum of a corruption",
                  run_spectrum);
    add_data_params(c);
    add_pipeline_params(c);
    c.param<std::string>("corruption", "", "corruption spec, e.g. gaussian:0.05 (empty: none)")
        .param<std::size_t>("limit", 0, "use at most this many sequences (0: all)");
  }
  {
    auto& c = add("filter", "band-limited noise demo on the NTU skeleton", run_filter);
    c.param<std::string>("mask", "spatial-low", "spatial|temporal|spatiotemporal - low|high")
        .param<std::size_t>("bandwidth", default_sweep_bandwidth, "pass band width")
        .param<double>("norm", 17.0, "Frobenius norm of the noise")
        .param<std::size_t>("frames", default_resampled_frames, "frames T'");
  }
  {
    auto& c = add("heatmap", "Fourier heatmap of a model's error rate", run_heatmap);
    add_data_params(c);
    add_pipeline_params(c);
    add_model_params(c, {"standard"});
    c.param<double>("v", 1.5, "perturbation norm")
        .param<std::size_t>("samples", 100, "test items evaluated per cell");
  }
  {
    auto& c = add("corrupt", "accuracy under a corruption on the jointly-correct subset", run_corrupt);
    add_data_params(c);
    add_pipeline_params(c);
    add_model_params(c, {"standard", "free"});
    c.param<std::string>("corruption", "gaussian:0.05",
                         "none | gaussian:SIGMA | frame_loss:P | frame_loss:sample | occlusion:PART")
        .param<bool>("save_sequences", false, "also write the corrupted test sequences as JSON");
  }
  {
    auto& c = add("attack", "l2-PGD against one model, with a per-sample log", run_attack);
    add_data_params(c);
    add_pipeline_params(c);
    add_model_params(c, {"standard"});
    c.param<double>("eps_head", 3.0, "radius in head lengths")
        .param<std::size_t>("steps", 10, "PGD iterations")
        .param<double>("step_size", 0.0, "step length (0: 2 eps / steps)")
        .param<bool>("no_random_init", false, "start from the clean input")
        .param<std::size_t>("limit", 100, "attack at most this many test items (0: all)");
  }
  {
    auto& c = add("train", "train the reference classifier (standard or free adversarial)", run_train);
    add_data_params(c);
    add_pipeline_params(c);
    add_training_params(c);
    c.param<std::string>("mode", "standard", "standard | free");
  }
  {
    auto& c = add("sweep", "accuracy under band-limited noise across masks and noise levels", run_sweep);
    add_data_params(c);
    add_pipeline_params(c);
    add_model_params(c, {"standard", "free"});
    std::vector<std::string> masks;
    for (const auto m : all_sweep_masks()) masks.push_back(to_string(m));
    c.param("mask", masks, "masks (comma separated)")
        .param<double>("norm", 17.0, "scaled norm; noise norm is fraction x norm")
        .param("fractions", default_sweep_fractions(), "noise fractions (comma separated)")
        .param("bandwidth", std::vector<std::size_t>{default_sweep_bandwidth}, "pass band widths (comma separated)");
  }
  {
    auto& c = add("parse", "validate NTU .skeleton files and optionally convert them to JSON", run_parse);
    c.param<std::string>("input", "", ".skeleton file or directory")
        .param<bool>("convert", false, "write one JSON sequence per body under <out>/sequences");
  }
}

}  // namespace cli
