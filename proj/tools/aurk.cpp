#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#ifdef AURK_CLI11_SINGLE_HEADER
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include "aurk/config.hpp"
#include "aurk/error.hpp"
#include "aurk/pipeline.hpp"

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool mean_box = false;
  std::string dynamic;
  bool print_config = false;
};

aurk::RunConfig resolve_config(const Options& opt) {
  aurk::RunConfig config = opt.config_path.empty() ? aurk::RunConfig{} : aurk::load_config(opt.config_path);
  if (opt.seed) config.seed = *opt.seed;
  if (opt.mean_box) config.mean_box = true;
  if (!opt.dynamic.empty()) config.dynamic = aurk::parse_dynamic_mode(opt.dynamic);
  aurk::validate_config(config);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Region-based facial action unit detection"};
  app.require_subcommand(0, 1);
  Options opt;
  app.add_option("--config", opt.config_path, "JSON run config")->check(CLI::ExistingFile);
  app.add_option("--seed", opt.seed, "override train.seed");
  app.add_flag("--mean-box", opt.mean_box, "use dataset mean boxes instead of per-frame boxes");
  app.add_option("--dynamic", opt.dynamic, "temporal extension")->check(CLI::IsMember({"convlstm", "two_stream"}));
  app.add_flag("--print-config", opt.print_config, "print the full effective config and exit");

  const char* commands[][2] = {
      {"partition", "compute AU boxes into the mask cache"},
      {"synth", "generate the synthetic dataset"},
      {"train", "train and write a checkpoint"},
      {"infer", "write per-frame predictions"},
      {"eval", "score predictions against labels"},
      {"stats", "durations, areas and F1/duration correlation"},
      {"mean-box", "write the training-split mean boxes"},
  };
  for (const auto& c : commands) app.add_subcommand(c[0], c[1])->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    const aurk::RunConfig config = resolve_config(opt);
    if (opt.print_config) {
      std::cout << aurk::format_config(config);
      return 0;
    }
    const auto chosen = app.get_subcommands();
    if (chosen.empty()) {
      std::cerr << app.help();
      return 2;
    }
    if (opt.config_path.empty()) {
      std::cerr << "error: --config is required\n";
      return 2;
    }
    const std::string cmd = chosen.front()->get_name();
    if (cmd == "partition")
      aurk::cmd_partition(config, std::cout);
    else if (cmd == "synth")
      aurk::cmd_synth(config, std::cout);
    else if (cmd == "train")
      aurk::cmd_train(config, std::cout);
    else if (cmd == "infer")
      aurk::cmd_infer(config, std::cout);
    else if (cmd == "eval")
      aurk::cmd_eval(config, std::cout);
    else if (cmd == "stats")
      aurk::cmd_stats(config, std::cout);
    else
      aurk::cmd_mean_box(config, std::cout);
  } catch (const aurk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
