#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tnp/cli/config.hpp"
#include "tnp/image.hpp"
#include "tnp/putt.hpp"

namespace tnp::cli {

enum ExitCode : int { kExitOk = 0, kExitFileFailure = 1, kExitConfigError = 2 };

using PathList = std::vector<std::filesystem::path>;

/// PuTT reconstruction of an image of any size: resize to 2^D, fit every
/// channel with seed derive_seed(seed, {channel}), resize back, clamp.
ImageGrid fit_reconstruct(const ImageGrid& img, const FitConfig& cfg, std::uint64_t seed,
                          std::vector<FitTrace>* traces = nullptr);

/// Seed of one image of a run, from its output name (FNV-1a) so that it
/// does not depend on the order or subset of inputs.
std::uint64_t image_seed(const RunConfig& cfg, const std::string& name);

int cmd_fit(const PathList& inputs, const RunConfig& cfg, std::ostream& log);
int cmd_purify(const PathList& inputs, const PathList& references, const RunConfig& cfg,
               std::ostream& log);
int cmd_analyze(const RunConfig& cfg, std::ostream& log);
int cmd_bench(const PathList& inputs, const RunConfig& cfg, std::ostream& log);

/// Full command line, argv[0] excluded. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tnp::cli
