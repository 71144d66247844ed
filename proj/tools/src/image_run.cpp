#include "image_run.hpp"

#include <ostream>
#include <set>

#include "tnp/cli/artifacts.hpp"
#include "tnp/cli/format.hpp"
#include "tnp/errors.hpp"
#include "tnp/png_io.hpp"
#include "tnp/rng.hpp"

namespace tnp::cli {

std::uint64_t image_seed(const RunConfig& cfg, const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) h = (h ^ c) * 0x100000001b3ULL;
  return derive_seed(cfg.run.seed, {h});
}

std::vector<std::string> output_stems(const PathList& inputs) {
  std::vector<std::string> stems;
  std::set<std::string> seen;
  for (const auto& p : inputs) {
    std::string s = p.stem().string();
    if (s.empty()) throw ConfigError("input '" + p.string() + "' has no file name");
    if (!seen.insert(s).second) {
      throw ConfigError("two inputs share the output name '" + s + "'");
    }
    stems.push_back(std::move(s));
  }
  return stems;
}

ImageGrid as_written(const ImageGrid& img) { return to_8bit_levels(img); }

nlohmann::json manifest_header(const std::string& command, const RunConfig& cfg) {
  nlohmann::json m;
  m["tool"] = "tnp";
  m["version"] = kToolVersion;
  m["command"] = command;
  m["seed"] = cfg.run.seed;
  m["config"] = to_json(cfg);
  return m;
}

int finish_image_run(const std::string& command, const RunConfig& cfg,
                     const std::vector<ImageRecord>& records, std::ostream& log) {
  const auto& out = cfg.run.out;
  CsvTable table({"image", "group", "nrmse", "ssim", "psnr"});
  nlohmann::json manifest = manifest_header(command, cfg);
  nlohmann::json timing;
  timing["command"] = command;
  timing["images"] = nlohmann::json::array();
  manifest["images"] = nlohmann::json::array();
  std::size_t failures = 0;
  for (const auto& r : records) {
    nlohmann::json e;
    e["input"] = r.input;
    if (r.reference) e["reference"] = *r.reference;
    e["status"] = r.ok ? "ok" : "error";
    if (!r.ok) {
      e["error"] = r.error;
      ++failures;
    }
    e["outputs"] = r.outputs;
    nlohmann::json groups = nlohmann::json::object();
    for (const auto& g : r.groups) {
      groups[std::string(to_string(g.role))] = metrics_json(g);
      table.add_row({r.stem, std::string(to_string(g.role)), format_double(g.nrmse),
                     format_double(g.ssim), format_double(g.psnr)});
    }
    e["metrics"] = groups;
    e["flags"] = r.flags;
    for (const auto& [k, v] : r.details.items()) e[k] = v;
    manifest["images"].push_back(e);
    timing["images"].push_back({{"input", r.input}, {"seconds", r.seconds}, {"stages", r.stages}});
    if (r.ok) {
      log << r.stem << ": ok";
      for (const auto& g : r.groups) {
        log << "  " << to_string(g.role) << " psnr=" << format_double(g.psnr)
            << " ssim=" << format_double(g.ssim);
      }
      log << "\n";
    } else {
      log << r.stem << ": FAILED " << r.error << "\n";
    }
  }
  manifest["failures"] = failures;
  write_text(out / "metrics.csv", table.str());
  write_text(out / "config.ini", to_ini(cfg));
  write_json(out / "timing.json", timing);
  write_json(out / "manifest.json", manifest);
  return failures == 0 ? kExitOk : kExitFileFailure;
}

}  // namespace tnp::cli
