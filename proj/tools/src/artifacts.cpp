#include "tnp/cli/artifacts.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <thread>

#include "tnp/cli/format.hpp"
#include "tnp/errors.hpp"
#include "tnp/png_io.hpp"

namespace tnp::cli {

namespace {

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw StructuralError("csv row has the wrong number of cells");
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + csv_cell(cells[i]);
    out += "\n";
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, text);
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
}

nlohmann::json metrics_json(const MetricReport& r) {
  nlohmann::json j;
  j["nrmse"] = json_number(r.nrmse);
  j["ssim"] = json_number(r.ssim);
  j["psnr"] = json_number(r.psnr);
  if (r.nrmse_range_fallback) j["nrmse_range_fallback"] = true;
  if (r.ssim_global_fallback) j["ssim_global_fallback"] = true;
  return j;
}

std::string histogram_svg(const std::string& title, const std::vector<LevelStats>& sweep) {
  const double pw = 220, ph = 160, pad = 30, top = 40;
  const double width = pad + static_cast<double>(sweep.size()) * (pw + pad);
  const double height = top + ph + 50;
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width, 0) +
                  "\" height=\"" + fixed(height, 0) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + fixed(pad, 0) + "\" y=\"20\" font-size=\"14\">" + title + "</text>\n";
  for (std::size_t p = 0; p < sweep.size(); ++p) {
    const Histogram& h = sweep[p].histogram;
    const double x0 = pad + static_cast<double>(p) * (pw + pad), y0 = top + ph;
    const double bin_w = (h.hi - h.lo) / static_cast<double>(h.counts.size());
    // Densities, so histogram and Gaussian share the vertical scale.
    std::vector<double> dens(h.counts.size());
    for (std::size_t b = 0; b < dens.size(); ++b) {
      dens[b] = static_cast<double>(h.counts[b]) / (static_cast<double>(h.samples) * bin_w);
    }
    const double peak_gauss = 1.0 / (h.stddev * std::sqrt(2.0 * std::numbers::pi));
    const double ymax = std::max(peak_gauss, *std::max_element(dens.begin(), dens.end())) * 1.05;
    const double bw = pw / static_cast<double>(dens.size());
    s += "<g>\n<rect x=\"" + fixed(x0) + "\" y=\"" + fixed(top) + "\" width=\"" + fixed(pw) +
         "\" height=\"" + fixed(ph) + "\" fill=\"none\" stroke=\"#999\"/>\n";
    for (std::size_t b = 0; b < dens.size(); ++b) {
      const double bh = ph * dens[b] / ymax;
      s += "<rect x=\"" + fixed(x0 + static_cast<double>(b) * bw) + "\" y=\"" + fixed(y0 - bh) +
           "\" width=\"" + fixed(bw) + "\" height=\"" + fixed(bh) + "\" fill=\"#4a7fb5\"/>\n";
    }
    s += "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" points=\"";
    for (int i = 0; i <= 100; ++i) {
      const double v = h.lo + (h.hi - h.lo) * i / 100.0;
      const double z = (v - h.mean) / h.stddev;
      const double d = peak_gauss * std::exp(-0.5 * z * z);
      s += fixed(x0 + pw * i / 100.0) + "," + fixed(y0 - ph * d / ymax) + " ";
    }
    s += "\"/>\n";
    s += "<text x=\"" + fixed(x0) + "\" y=\"" + fixed(y0 + 16) + "\">level " +
         std::to_string(sweep[p].level) + "  KL " + format_double(sweep[p].kl) + "</text>\n";
    s += "<text x=\"" + fixed(x0) + "\" y=\"" + fixed(y0 + 30) + "\">" +
         std::to_string(h.samples) + " samples</text>\n</g>\n";
  }
  return s + "</svg>\n";
}

void run_pool(std::size_t count, int threads, const std::function<void(std::size_t)>& job) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
  }
}

}  // namespace tnp::cli
