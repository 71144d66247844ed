#include <chrono>
#include <exception>
#include <filesystem>
#include <ostream>

#include "image_run.hpp"
#include "tnp/cli/artifacts.hpp"
#include "tnp/cli/commands.hpp"
#include "tnp/cli/format.hpp"
#include "tnp/png_io.hpp"
#include "tnp/qtt_image.hpp"
#include "tnp/rng.hpp"

namespace tnp::cli {

ImageGrid fit_reconstruct(const ImageGrid& img, const FitConfig& cfg, std::uint64_t seed,
                          std::vector<FitTrace>* traces) {
  const ImageGrid x = resize_to_pow2(img, cfg.D);
  std::vector<ImageGrid> planes;
  for (std::size_t ch = 0; ch < x.channels(); ++ch) {
    FitConfig c = cfg;
    c.seed = derive_seed(seed, {ch});
    FitResult r = putt_fit(x.channel_image(ch), c);
    planes.push_back(clamp_unit(qtt_to_image(r.tt)));
    if (traces) traces->push_back(std::move(r.trace));
  }
  return resize_from_pow2(ImageGrid::stack(planes), PixelSize{img.height(), img.width()});
}

namespace {

std::string fit_trace_csv(const std::vector<FitTrace>& traces) {
  CsvTable t({"channel", "iteration", "resolution", "loss"});
  for (std::size_t ch = 0; ch < traces.size(); ++ch) {
    for (const auto& level : traces[ch].levels) {
      for (int k = 0; k < level.iterations; ++k) {
        const int it = level.first_iteration + k;
        t.add_row({std::to_string(ch), std::to_string(it), std::to_string(level.resolution),
                   format_double(traces[ch].loss[static_cast<std::size_t>(it - 1)])});
      }
    }
  }
  return t.str();
}

}  // namespace

int cmd_fit(const PathList& inputs, const RunConfig& cfg, std::ostream& log) {
  const auto stems = output_stems(inputs);
  std::filesystem::create_directories(cfg.run.out);
  std::vector<ImageRecord> records(inputs.size());
  run_pool(inputs.size(), cfg.run.threads, [&](std::size_t i) {
    ImageRecord& r = records[i];
    r.input = inputs[i].string();
    r.stem = stems[i];
    const auto start = std::chrono::steady_clock::now();
    try {
      const ImageGrid img = read_png(inputs[i]);
      std::vector<FitTrace> traces;
      const ImageGrid rec = as_written(fit_reconstruct(img, cfg.fit, image_seed(cfg, r.stem), &traces));
      r.groups.push_back(compare_images(img, rec, PairRole::kCln));

      const std::string png = r.stem + ".png", js = r.stem + ".metrics.json",
                        trace = r.stem + ".trace.csv";
      write_png(cfg.run.out / png, rec);
      write_json(cfg.run.out / js, {{"image", r.stem}, {"CLN", metrics_json(r.groups.front())}});
      write_text(cfg.run.out / trace, fit_trace_csv(traces));
      r.outputs = {png, js, trace};
      for (std::size_t ch = 0; ch < traces.size(); ++ch) {
        for (const auto& level : traces[ch].levels) {
          r.stages.push_back({{"channel", ch}, {"resolution", level.resolution},
                              {"seconds", level.seconds}});
        }
      }
      r.ok = true;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  return finish_image_run("fit", cfg, records, log);
}

}  // namespace tnp::cli
