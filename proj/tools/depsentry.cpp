// depsentry command-line entry point.
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "depsentry/errors.hpp"
#include "depsentry/fixtures.hpp"
#include "depsentry/pipeline.hpp"
#include "depsentry/report.hpp"

namespace {

using namespace depsentry;

constexpr int kExitError = 2;

struct Common {
  std::string config_file;
  std::string format = "text";
  std::string output;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
};

Config load_config(const Common& c, std::optional<int> max_archive_depth) {
  Config config = c.config_file.empty() ? Config::defaults() : Config::load(c.config_file);
  config.apply_process_env();
  if (max_archive_depth) config.set_max_archive_depth(*max_archive_depth);
  return config;
}

ReportFormat parse_format(const std::string& s) {
  auto f = report_format_from_string(s);
  if (!f) throw Error(ErrorCode::ConfigInvalid, "unknown format \"" + s + "\"");
  return *f;
}

void emit(const std::string& text, const std::string& output) {
  if (output.empty() || output == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(output, std::ios::binary | std::ios::trunc);
  if (!os || !(os << text)) throw Error(ErrorCode::IoError, "cannot write " + output);
}

void add_common(CLI::App* cmd, Common& c, bool with_jobs) {
  cmd->add_option("--config", c.config_file, "JSON configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--format,-f", c.format, "Output format")
      ->check(CLI::IsMember({"text", "json", "sarif"}))
      ->capture_default_str();
  cmd->add_option("--output,-o", c.output, "Write the report to a file instead of stdout");
  if (with_jobs)
    cmd->add_option("--jobs,-j", c.jobs, "Parallel package scans")->check(CLI::PositiveNumber)->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Static scanner for code-execution techniques and evasion in third-party packages",
               "depsentry"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Common common;
  std::string target;
  std::string deps_store;
  std::string fail_on = "high";
  bool fetch = false;
  std::optional<int> max_archive_depth;

  auto* scan = app.add_subcommand("scan", "Scan a package directory or archive");
  scan->add_option("path", target, "Package directory, archive, or eco:name@version with --fetch")->required();
  add_common(scan, common, true);
  scan->add_option("--fail-on", fail_on, "Exit 1 when a finding reaches this severity")
      ->check(CLI::IsMember({"info", "low", "medium", "high", "critical"}))
      ->capture_default_str();
  scan->add_option("--deps-store", deps_store, "Local store of dependency packages")->check(CLI::ExistingDirectory);
  scan->add_flag("--fetch", fetch, "Allow downloads from the package registry");
  scan->add_option("--max-archive-depth", max_archive_depth, "Nested archive extraction depth")
      ->check(CLI::NonNegativeNumber);

  std::string command = "install";
  bool ignore_scripts = false, only_binary_all = false, no_autoloader = false, lockfile_present = false;
  auto* simulate = app.add_subcommand("simulate", "Predict what an install command would execute");
  simulate->add_option("path", target, "Package directory or archive")->required();
  simulate->add_option("--command", command, "Package-manager command")
      ->required()
      ->check(CLI::IsMember({"install", "update", "build"}));
  simulate->add_flag("--ignore-scripts", ignore_scripts, "npm --ignore-scripts");
  simulate->add_flag("--only-binary-all", only_binary_all, "pip --only-binary :all:");
  simulate->add_flag("--no-autoloader", no_autoloader, "composer --no-autoloader");
  simulate->add_option("--lockfile-present", lockfile_present, "A composer.lock is present (true/false)");
  add_common(simulate, common, false);

  auto* tree = app.add_subcommand("tree", "Scan a package and its dependency tree");
  tree->add_option("path", target, "Package directory or archive")->required();
  tree->add_option("--deps-store", deps_store, "Local store of dependency packages")->check(CLI::ExistingDirectory);
  tree->add_flag("--fetch", fetch, "Allow downloads from the package registry");
  tree->add_option("--fail-on", fail_on, "Exit 1 when a finding reaches this severity")
      ->check(CLI::IsMember({"info", "low", "medium", "high", "critical"}))
      ->capture_default_str();
  add_common(tree, common, true);

  std::string outdir;
  auto* fixtures = app.add_subcommand("fixtures", "Write the inert fixture corpus");
  fixtures->add_option("outdir", outdir, "Output directory")->required();

  auto* rules = app.add_subcommand("rules", "Print the technique catalog");
  rules->add_option("--format,-f", common.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitError;
  }

  try {
    if (*scan || *tree) {
      const Config config = load_config(common, max_archive_depth);
      ScanOptions options;
      if (!deps_store.empty()) options.deps_store = deps_store;
      options.fetch = fetch;
      options.tree = static_cast<bool>(*tree);
      options.jobs = common.jobs;
      const Report report = scan_target(target, config, options);
      emit(render(report, parse_format(common.format)), common.output);
      return exit_code(report, *severity_from_string(fail_on));
    }
    if (*simulate) {
      const Config config = load_config(common, std::nullopt);
      InstallContext ctx;
      ctx.command = *install_command_from_string(command);
      ctx.ignore_scripts = ignore_scripts;
      ctx.only_binary_all = only_binary_all;
      ctx.no_autoloader = no_autoloader;
      ctx.lockfile_present = lockfile_present;
      const Report report = simulate_target(target, config, ctx);
      emit(render(report, parse_format(common.format)), common.output);
      return 0;
    }
    if (*fixtures) {
      const auto manifest = generate_fixtures(outdir);
      std::cout << "wrote " << manifest.at("fixtures").size() << " fixture packages to " << outdir << "\n";
      return 0;
    }
    if (*rules) {
      if (common.format == "json") {
        std::cout << catalog_json().dump(2) << "\n";
        return 0;
      }
      for (const auto& info : technique_catalog())
        std::cout << to_string(info.id) << "\t" << to_string(info.severity) << "\t" << to_string(info.confidence)
                  << "\t" << info.category << "\t" << info.title << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "depsentry: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "depsentry: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
