// Command-line front end. Every number printed here comes from hpcb::run; this file
// only maps flags onto an ExperimentConfig and exceptions onto exit codes.
#include <CLI11.hpp>
#include <iomanip>
#include <iostream>

#include "hpcb/hpcb.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitPrecondition = 3;

struct Subcommand {
  hpcb::Command command;
  CLI::App* app = nullptr;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  std::map<std::string, std::string> text;
  std::map<std::string, bool> flags;
  std::string config_file;
};

void print_corpus() {
  std::cout << std::left << std::setw(14) << "name" << std::setw(4) << "d" << std::setw(8) << "r" << std::setw(6)
            << "p" << std::setw(8) << "coeffs" << "description\n";
  for (const auto& f : hpcb::corpus()) {
    std::ostringstream r;
    r << f.tag().r;
    std::cout << std::setw(14) << f.name() << std::setw(4) << f.dim() << std::setw(8) << r.str() << std::setw(6)
              << f.tag().p << std::setw(8) << (f.has_closed_form_coefficients() ? "closed" : "grid")
              << f.description();
    if (!f.tag().regime.empty()) std::cout << " [" << f.tag().regime << "]";
    std::cout << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Half-period cosine Besov experiments"};
  app.require_subcommand(1);

  // a std::map keeps the Subcommand addresses stable for CLI11's bound references
  std::map<hpcb::Command, Subcommand> subs;
  for (const auto& [cmd, name] : hpcb::command_names()) {
    auto& sub = subs[cmd];
    sub.command = cmd;
    sub.app = app.add_subcommand(name, "run the " + name + " experiment");
    sub.app->add_option("--config", sub.config_file, "JSON file with parameters; flags override it");
    for (const auto& spec : hpcb::command_schema(cmd)) {
      CLI::Option* opt = nullptr;
      if (spec.type == hpcb::ParamType::Flag) {
        opt = sub.app->add_flag("--" + spec.name, sub.flags[spec.name], spec.help);
      } else {
        opt = sub.app->add_option("--" + spec.name, sub.text[spec.name], spec.help)
                  ->type_name(spec.type == hpcb::ParamType::Int    ? "INT"
                              : spec.type == hpcb::ParamType::Real ? "REAL"
                                                                   : "TEXT");
      }
      sub.options.emplace_back(spec.name, opt);
    }
  }
  auto* testfns = app.add_subcommand("testfns", "test function corpus");
  testfns->require_subcommand(1);
  testfns->add_subcommand("list", "list corpus members with smoothness tags");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (testfns->parsed()) {
    print_corpus();
    return 0;
  }

  try {
    for (auto& [cmd, sub] : subs) {
      if (!sub.app->parsed()) continue;
      hpcb::ExperimentConfig cfg(cmd);
      if (!sub.config_file.empty()) cfg.merge_json_file(sub.config_file);
      for (const auto& [name, opt] : sub.options) {
        if (opt->count() == 0) continue;
        if (sub.flags.count(name)) {
          cfg.set(name, sub.flags[name]);
        } else {
          cfg.set_from_string(name, sub.text[name]);
        }
      }
      const auto result = hpcb::run(cfg);
      for (const auto& path : hpcb::write_artifacts(result, cfg, std::cout)) std::cerr << "wrote " << path.string() << '\n';
      for (const auto& line : result.summary) std::cout << "# " << line << '\n';
    }
  } catch (const hpcb::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const hpcb::PreconditionError& e) {
    std::cerr << "numerical precondition violated: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
