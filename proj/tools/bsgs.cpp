// bsgs: simulate-grouped | simulate-midas | estimate | tune | nowcast

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bsgs/cli/commands.hpp"
#include "bsgs/cli/config.hpp"
#include "bsgs/cli/report.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<int> threads;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> formats;
};

std::vector<std::string> split_formats(const std::vector<std::string>& in) {
  std::vector<std::string> out;
  for (const auto& f : in) {
    std::stringstream ss(f);
    std::string part;
    while (std::getline(ss, part, ',')) if (!part.empty()) out.push_back(part);
  }
  return out;
}

int run(const std::string& verb, const Flags& flags) {
  using namespace bsgs::cli;
  std::ifstream in(flags.config);
  if (!in) throw std::invalid_argument("cannot open config " + flags.config);
  Json j = Json::parse(in);
  if (!j.contains("mode")) j["mode"] = verb;
  if (j.at("mode") != verb) {
    throw std::invalid_argument("config mode '" + j.at("mode").get<std::string>() + "' does not match verb '" + verb + "'");
  }
  RunConfig cfg = parse_config(j);
  if (!cfg.data.path.empty()) {
    const std::filesystem::path p(cfg.data.path);
    if (p.is_relative()) cfg.data.path = (std::filesystem::path(flags.config).parent_path() / p).string();
  }
  apply_environment(cfg);
  if (flags.threads) {
    if (*flags.threads < 1) throw std::invalid_argument("--threads must be >= 1");
    cfg.threads = *flags.threads;
  }
  if (flags.out) cfg.out_dir = *flags.out;
  if (flags.seed) cfg.seed = *flags.seed;
  if (!flags.formats.empty()) cfg.formats = split_formats(flags.formats);
  const Formats formats = parse_formats(cfg.formats);

  const Report report = run_mode(cfg);
  for (const auto& path : emit_report(report, cfg.out_dir, formats)) std::cout << path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian sparse group selection: simulation studies, estimation, tuning and nowcasting"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::string> verbs = {"simulate-grouped", "simulate-midas", "estimate", "tune", "nowcast"};
  for (const auto& v : verbs) {
    CLI::App* sub = app.add_subcommand(v, "run the " + v + " verb");
    sub->add_option("--config", flags.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--threads", flags.threads, "worker threads across replications, chains, grid points and origins");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--seed", flags.seed, "master seed (overrides the config)");
    sub->add_option("--format", flags.formats, "csv, json, svg; repeat or comma-separate")->delimiter(',');
  }
  CLI11_PARSE(app, argc, argv);
  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    return run(verb, flags);
  } catch (const std::exception& e) {
    std::cerr << "bsgs " << verb << ": " << e.what() << "\n";
    return 1;
  }
}
