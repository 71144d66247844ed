#include <exception>
#include <ostream>

#include <CLI11.hpp>

#include "tnp/cli/commands.hpp"
#include "tnp/cli/format.hpp"
#include "tnp/errors.hpp"

namespace tnp::cli {

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tensor-network image reconstruction and purification"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
  app.add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
  app.add_option("--set", overrides, "Override one key: section.key=value (repeatable)")
      ->allow_extra_args(false);
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--threads", threads, "Worker threads (one image per worker)");
  app.add_option("--out", out_dir, "Output directory");

  std::vector<std::string> inputs, references;
  auto* fit = app.add_subcommand("fit", "PuTT reconstruction of PNG images");
  fit->add_option("inputs", inputs, "PNG files")->required();
  auto* purify = app.add_subcommand("purify", "Tensor network purification of PNG images");
  purify->add_option("inputs", inputs, "PNG files")->required();
  purify->add_option("--reference", references, "Clean reference per input, same order (repeatable)")
      ->allow_extra_args(false);
  auto* analyze = app.add_subcommand("analyze", "KL-vs-Gaussian of noise fields under downsampling");
  auto* bench = app.add_subcommand("bench", "Denoising comparison of TT, QTT, PuTT and TNP");
  bench->add_option("inputs", inputs, "Clean PNG files; synthetic images when omitted");

  // CLI11 consumes a vector argument from the back.
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) apply_ini_file(cfg, config_path);
    for (const auto& o : overrides) apply_override(cfg, o);
    if (seed) cfg.run.seed = *seed;
    if (threads) cfg.run.threads = *threads;
    if (out_dir) cfg.run.out = *out_dir;
    cfg.validate();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  const PathList in(inputs.begin(), inputs.end()), refs(references.begin(), references.end());
  try {
    if (*fit) return cmd_fit(in, cfg, out);
    if (*purify) return cmd_purify(in, refs, cfg, out);
    if (*analyze) return cmd_analyze(cfg, out);
    if (*bench) return cmd_bench(in, cfg, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFileFailure;
  }
  return kExitConfigError;
}

}  // namespace tnp::cli
