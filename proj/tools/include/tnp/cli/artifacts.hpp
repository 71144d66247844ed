#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tnp/metrics.hpp"
#include "tnp/noise.hpp"

namespace tnp::cli {

/// Comma-separated table with a header row. Cells containing a comma,
/// quote or newline are quoted.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(std::vector<std::string> cells);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

nlohmann::json metrics_json(const MetricReport& r);

/// Per-level histograms side by side with the fitted Gaussian density.
std::string histogram_svg(const std::string& title, const std::vector<LevelStats>& sweep);

/// Runs job(i) for i in [0, count) on `threads` workers. Jobs must not
/// throw; each one records its own failure.
void run_pool(std::size_t count, int threads, const std::function<void(std::size_t)>& job);

}  // namespace tnp::cli
