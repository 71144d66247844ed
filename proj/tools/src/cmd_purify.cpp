#include <chrono>
#include <exception>
#include <filesystem>
#include <ostream>

#include "image_run.hpp"
#include "tnp/cli/artifacts.hpp"
#include "tnp/cli/commands.hpp"
#include "tnp/cli/format.hpp"
#include "tnp/errors.hpp"
#include "tnp/png_io.hpp"
#include "tnp/purify.hpp"

namespace tnp::cli {

namespace {

void add_trace_rows(CsvTable& t, const std::string& which, const PurifyTrace& trace) {
  for (std::size_t ch = 0; ch < trace.channels.size(); ++ch) {
    const ChannelTrace& c = trace.channels[ch];
    for (const auto& level : c.coarse.levels) {
      for (int k = 0; k < level.iterations; ++k) {
        const int it = level.first_iteration + k;
        t.add_row({which, std::to_string(ch), "coarse", std::to_string(level.resolution),
                   std::to_string(it), format_double(c.coarse.loss[static_cast<std::size_t>(it - 1)])});
      }
    }
    for (const auto& st : c.stages) {
      for (std::size_t k = 0; k < st.loss.size(); ++k) {
        t.add_row({which, std::to_string(ch), "adversarial", std::to_string(st.resolution),
                   std::to_string(k + 1), format_double(st.loss[k])});
      }
    }
  }
}

void add_stage_timing(nlohmann::json& stages, const std::string& which, const PurifyTrace& trace) {
  for (std::size_t ch = 0; ch < trace.channels.size(); ++ch) {
    double coarse = 0.0;
    for (const auto& level : trace.channels[ch].coarse.levels) coarse += level.seconds;
    stages.push_back({{"image", which}, {"channel", ch}, {"stage", "coarse"}, {"seconds", coarse}});
    for (const auto& st : trace.channels[ch].stages) {
      stages.push_back({{"image", which}, {"channel", ch}, {"stage", "adversarial"},
                        {"resolution", st.resolution}, {"seconds", st.seconds}});
    }
  }
}

nlohmann::json invariants_json(const InvariantCounts& c) {
  return {{"checks", c.checks},
          {"box_violations", c.box_violations},
          {"feasibility_violations", c.feasibility_violations},
          {"prior_mutations", c.prior_mutations}};
}

}  // namespace

int cmd_purify(const PathList& inputs, const PathList& references, const RunConfig& cfg,
               std::ostream& log) {
  if (!references.empty() && references.size() != inputs.size()) {
    throw ConfigError("--reference needs one clean image per input (" +
                      std::to_string(inputs.size()) + " inputs, " +
                      std::to_string(references.size()) + " references)");
  }
  const auto stems = output_stems(inputs);
  std::filesystem::create_directories(cfg.run.out);
  std::vector<ImageRecord> records(inputs.size());
  run_pool(inputs.size(), cfg.run.threads, [&](std::size_t i) {
    ImageRecord& r = records[i];
    r.input = inputs[i].string();
    r.stem = stems[i];
    const bool with_ref = !references.empty();
    if (with_ref) r.reference = references[i].string();
    const auto start = std::chrono::steady_clock::now();
    try {
      const ImageGrid img = read_png(inputs[i]);
      PurifyConfig pc = cfg.purify;
      pc.seed = image_seed(cfg, r.stem);

      CsvTable trace({"image", "channel", "phase", "resolution", "iteration", "loss"});
      const PurifyResult adv = tnp_purify(img, pc);
      const ImageGrid rec_adv = as_written(adv.purified);
      add_trace_rows(trace, "input", adv.trace);
      add_stage_timing(r.stages, "input", adv.trace);
      InvariantCounts inv = adv.trace.invariants();

      const std::string png = r.stem + ".png", js = r.stem + ".metrics.json",
                        trace_name = r.stem + ".trace.csv";
      if (with_ref) {
        const ImageGrid ref = read_png(references[i]);
        if (!ref.same_shape(img)) {
          throw StructuralError("reference " + references[i].string() + " does not match the input's shape");
        }
        const PurifyResult cln = tnp_purify(ref, pc);
        const ImageGrid rec_cln = as_written(cln.purified);
        add_trace_rows(trace, "reference", cln.trace);
        add_stage_timing(r.stages, "reference", cln.trace);
        inv += cln.trace.invariants();
        r.groups = {compare_images(ref, rec_cln, PairRole::kCln),
                    compare_images(img, rec_adv, PairRole::kAdv),
                    compare_images(rec_cln, rec_adv, PairRole::kRec)};
        const std::string ref_png = r.stem + ".reference.png";
        write_png(cfg.run.out / ref_png, rec_cln);
        r.outputs.push_back(ref_png);
      } else {
        r.groups = {compare_images(img, rec_adv, PairRole::kCln)};
        r.flags.push_back("no_reference: CLN compares the input with its purification; ADV and REC omitted");
      }

      nlohmann::json mj = {{"image", r.stem}};
      for (const auto& g : r.groups) mj[std::string(to_string(g.role))] = metrics_json(g);
      write_png(cfg.run.out / png, rec_adv);
      write_json(cfg.run.out / js, mj);
      write_text(cfg.run.out / trace_name, trace.str());
      r.outputs.insert(r.outputs.begin(), {png, js, trace_name});
      if (pc.check_invariants) {
        r.details["invariants"] = invariants_json(inv);
        if (inv.total_violations() != 0) throw NumericError("purify: invariant violations recorded");
      }
      r.ok = true;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  return finish_image_run("purify", cfg, records, log);
}

}  // namespace tnp::cli
