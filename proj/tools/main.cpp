#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "cli.hpp"
#include "skelfreq/data_io.hpp"
#include "skelfreq/error.hpp"

namespace {

constexpr int kExitParameter = 2;
constexpr int kExitData = 3;

bool use_color() {
  const char* no_color = std::getenv("NO_COLOR");
  return (no_color == nullptr || *no_color == '\0') && ::isatty(STDERR_FILENO) == 1;
}

void report_error(const std::string& message) {
  if (use_color())
    std::cerr << "\033[1;31merror:\033[0m " << message << "\n";
  else
    std::cerr << "error: " << message << "\n";
}

int exit_code(skelfreq::ErrorKind kind) {
  using skelfreq::ErrorKind;
  switch (kind) {
    case ErrorKind::parameter:
    case ErrorKind::shape:
    case ErrorKind::capability:
    case ErrorKind::topology:
      return kExitParameter;
    default:
      return kExitData;
  }
}

std::string csv_cell(const nlohmann::json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (const char c : s) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
    return quoted + "\"";
  }
  return v.dump();
}

void print_summary(const cli::Context& ctx, const nlohmann::json& summary) {
  if (ctx.format == "csv" && summary.contains("table")) {
    const auto& t = summary["table"];
    std::string line;
    for (const auto& c : t["columns"]) line += (line.empty() ? "" : ",") + csv_cell(c);
    std::cout << line << "\n";
    for (const auto& row : t["rows"]) {
      line.clear();
      for (std::size_t i = 0; i < row.size(); ++i) line += (i == 0 ? "" : ",") + csv_cell(row[i]);
      std::cout << line << "\n";
    }
  } else {
    std::cout << summary.dump(2) << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Joint graph-temporal Fourier analysis of skeleton sequences", "skelfreq");
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::uint64_t> seed;
  std::string config_path;
  cli::Context ctx;
  std::string out = ".";
  app.add_option("--seed", seed, "base seed for all randomness (required, or taken from --config)");
  app.add_option("--config", config_path, "JSON config or the metadata of a previous run");
  app.add_option("--out", out, "artifact directory")->capture_default_str();
  app.add_option("--format", ctx.format, "summary format on stdout")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  app.add_option("--jobs", ctx.jobs, "worker threads for the harness")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_flag("--gnuplot", ctx.gnuplot, "also write gnuplot matrix files");

  std::vector<std::unique_ptr<cli::Command>> commands;
  cli::register_commands(app, commands);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error(e.what());
    std::cerr << app.help();
    return kExitParameter;
  }

  const cli::Command* command = nullptr;
  for (const auto& c : commands)
    if (c->selected()) command = c.get();

  try {
    nlohmann::json file_config = nlohmann::json::object();
    if (!config_path.empty()) {
      nlohmann::json raw;
      try {
        raw = nlohmann::json::parse(skelfreq::read_text_file(config_path));
      } catch (const nlohmann::json::exception& e) {
        skelfreq::fail(skelfreq::ErrorKind::parameter, "config " + config_path + ": " + e.what());
      }
      file_config = cli::unwrap_config(raw, command->name());
    }
    ctx.command = command->name();
    ctx.config = command->effective(file_config);
    if (seed) {
      ctx.config["seed"] = *seed;
    } else if (file_config.contains("seed") && file_config["seed"].is_number_unsigned()) {
      ctx.config["seed"] = file_config["seed"];
    } else {
      report_error("--seed is required");
      return kExitParameter;
    }
    ctx.out = out;
    std::filesystem::create_directories(ctx.out);

    auto summary = command->run(ctx);
    nlohmann::json record = ctx.metadata();
    record["results"] = summary;
    skelfreq::write_text_file_atomic(ctx.out / (ctx.command + ".run.json"), record.dump(2) + "\n");
    print_summary(ctx, summary);
    if (summary.contains("error")) {
      report_error(summary["error"].get<std::string>());
      return kExitData;
    }
    return 0;
  } catch (const skelfreq::Error& e) {
    report_error(e.what());
    return exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    report_error(std::string("bad configuration value: ") + e.what());
    return kExitParameter;
  } catch (const std::filesystem::filesystem_error& e) {
    report_error(e.what());
    return kExitData;
  }
}
