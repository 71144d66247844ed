#include <array>
#include <chrono>
#include <filesystem>
#include <ostream>

#include "image_run.hpp"
#include "tnp/cli/artifacts.hpp"
#include "tnp/cli/commands.hpp"
#include "tnp/cli/format.hpp"
#include "tnp/noise.hpp"
#include "tnp/rng.hpp"

namespace tnp::cli {

int cmd_analyze(const RunConfig& cfg, std::ostream& log) {
  const AnalyzeSection& a = cfg.analyze;
  std::filesystem::create_directories(cfg.run.out);
  const std::size_t seeds = static_cast<std::size_t>(a.seeds);
  const DownsampleMethod methods[] = {DownsampleMethod::kAvgPool, DownsampleMethod::kStride};

  // sweeps[job][method], job = kind index * seeds + seed.
  std::vector<std::array<std::vector<LevelStats>, 2>> sweeps(a.kinds.size() * seeds);
  std::vector<double> seconds(sweeps.size());
  run_pool(sweeps.size(), cfg.run.threads, [&](std::size_t job) {
    const auto start = std::chrono::steady_clock::now();
    NoiseSpec spec = cfg.noise;
    spec.kind = a.kinds[job / seeds];
    spec.seed = derive_seed(cfg.run.seed, {static_cast<std::uint64_t>(spec.kind), job % seeds});
    const ImageGrid field = gen_noise(spec, a.size, a.size);
    for (std::size_t m = 0; m < 2; ++m) {
      sweeps[job][m] = downsample_distribution_sweep(field, a.levels, methods[m], a.bins);
    }
    seconds[job] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  CsvTable kl({"kind", "seed", "method", "level", "samples", "kl"});
  nlohmann::json manifest = manifest_header("analyze", cfg);
  nlohmann::json outputs = nlohmann::json::array({"kl.csv"});
  nlohmann::json trend = nlohmann::json::object();
  nlohmann::json timing = {{"command", "analyze"}, {"jobs", nlohmann::json::array()}};
  for (std::size_t k = 0; k < a.kinds.size(); ++k) {
    const std::string kind(to_string(a.kinds[k]));
    int pool_wins = 0, pool_below_level0 = 0;
    for (std::size_t s = 0; s < seeds; ++s) {
      const auto& job = sweeps[k * seeds + s];
      for (std::size_t m = 0; m < 2; ++m) {
        for (const auto& l : job[m]) {
          kl.add_row({kind, std::to_string(s), std::string(to_string(methods[m])),
                      std::to_string(l.level), std::to_string(l.histogram.samples),
                      format_double(l.kl)});
        }
      }
      pool_wins += job[0].back().kl < job[1].back().kl;
      pool_below_level0 += job[0].back().kl < job[0].front().kl;
      timing["jobs"].push_back({{"kind", kind}, {"seed", s}, {"seconds", seconds[k * seeds + s]}});
    }
    trend[kind] = {{"seeds", seeds},
                   {"avgpool_below_stride_at_last_level", pool_wins},
                   {"avgpool_last_below_level0", pool_below_level0}};
    log << kind << ": avgpool KL below stride at level " << a.levels << " in " << pool_wins << "/"
        << seeds << " seeds, below its level-0 KL in " << pool_below_level0 << "/" << seeds << "\n";
    for (std::size_t m = 0; m < 2; ++m) {
      const std::string name = "hist_" + kind + "_" + std::string(to_string(methods[m])) + ".svg";
      write_text(cfg.run.out / name,
                 histogram_svg(kind + " noise, " + std::string(to_string(methods[m])) + ", seed 0",
                               sweeps[k * seeds][m]));
      outputs.push_back(name);
    }
  }
  write_text(cfg.run.out / "kl.csv", kl.str());
  write_text(cfg.run.out / "config.ini", to_ini(cfg));
  manifest["outputs"] = outputs;
  manifest["trend"] = trend;
  write_json(cfg.run.out / "timing.json", timing);
  write_json(cfg.run.out / "manifest.json", manifest);
  return kExitOk;
}

}  // namespace tnp::cli
