#pragma once

// Run configuration: an INI file with one section per module, then
// `--set section.key=value` overrides, then the dedicated flags. Every key
// is registered with a parser; anything unregistered is a ConfigError.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tnp/noise.hpp"
#include "tnp/purify.hpp"
#include "tnp/putt.hpp"

namespace tnp::cli {

struct RunSection {
  std::uint64_t seed = 0;
  int threads = 1;
  std::filesystem::path out = "tnp_out";
};

struct AnalyzeSection {
  std::size_t size = 256;
  int levels = 3;
  std::size_t bins = kDefaultKlBins;
  std::vector<NoiseKind> kinds{NoiseKind::kMog, NoiseKind::kBeta, NoiseKind::kUniform,
                               NoiseKind::kGaussian};
  int seeds = 1;
};

enum class BenchMethod { kTt, kQtt, kPutt, kTnp };
std::string to_string(BenchMethod m);
std::optional<BenchMethod> parse_bench_method(const std::string& name);

struct BenchSection {
  std::vector<BenchMethod> methods{BenchMethod::kTt, BenchMethod::kQtt, BenchMethod::kPutt,
                                   BenchMethod::kTnp};
  /// Synthetic clean images generated when no inputs are given.
  int count = 4;
  std::size_t size = 256;
  /// Rank and descent settings of the order-2 TT (low-rank matrix) baseline.
  std::size_t tt_rank = 16;
  int tt_iterations = 600;
  double tt_learn_rate = 4096.0;
};

struct RunConfig {
  RunSection run;
  FitConfig fit;
  PurifyConfig purify;
  NoiseSpec noise{NoiseKind::kStructured};
  AnalyzeSection analyze;
  BenchSection bench;

  void validate() const;
};

/// Applies one `section.key=value` assignment.
void apply_setting(RunConfig& cfg, const std::string& section, const std::string& key,
                   const std::string& value);

/// Reads an INI file on top of cfg.
void apply_ini_file(RunConfig& cfg, const std::filesystem::path& path);
void apply_ini_text(RunConfig& cfg, const std::string& text);

/// Parses "section.key=value".
void apply_override(RunConfig& cfg, const std::string& assignment);

/// Every registered key with its current value, as INI text. The run.out
/// and run.threads keys are left out: they do not affect any output bytes.
std::string to_ini(const RunConfig& cfg);
nlohmann::json to_json(const RunConfig& cfg);

}  // namespace tnp::cli
