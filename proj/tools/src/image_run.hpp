#pragma once

// Shared bookkeeping of the per-image commands (fit, purify).

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tnp/cli/commands.hpp"
#include "tnp/metrics.hpp"

namespace tnp::cli {

struct ImageRecord {
  std::string input;
  std::optional<std::string> reference;
  std::string stem;
  bool ok = false;
  std::string error;
  std::vector<std::string> outputs;
  std::vector<MetricReport> groups;
  std::vector<std::string> flags;
  nlohmann::json details = nlohmann::json::object();  // merged into the manifest entry
  nlohmann::json stages = nlohmann::json::array();  // wall-clock, timing.json only
  double seconds = 0.0;
};

/// Output stems of the inputs; two inputs with the same stem are rejected.
std::vector<std::string> output_stems(const PathList& inputs);

/// The image exactly as it will be written to disk.
ImageGrid as_written(const ImageGrid& img);

/// Writes metrics.csv, manifest.json, timing.json and config.ini and
/// returns the exit code.
int finish_image_run(const std::string& command, const RunConfig& cfg,
                     const std::vector<ImageRecord>& records, std::ostream& log);

nlohmann::json manifest_header(const std::string& command, const RunConfig& cfg);

}  // namespace tnp::cli
