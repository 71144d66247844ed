#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "tnp/cli/artifacts.hpp"
#include "tnp/cli/commands.hpp"
#include "tnp/cli/config.hpp"
#include "tnp/cli/format.hpp"
#include "tnp/errors.hpp"
#include "tnp/metrics.hpp"
#include "tnp/noise.hpp"
#include "tnp/png_io.hpp"
#include "tnp/putt.hpp"
#include "tnp/rng.hpp"
#include "tnp/synthetic.hpp"

using namespace tnp;
using namespace tnp::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const char* env = std::getenv("TNP_TEST_TMP");
  fs::path dir = (env ? fs::path(env) : fs::temp_directory_path() / "tnp_cli_tests") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int code = -1;
  std::string out, err;
};

Run tnp_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Rows of a CSV with a header and no quoted cells, as header -> value maps.
std::vector<std::map<std::string, std::string>> read_csv(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  for (std::istringstream h(line); std::getline(h, line, ',');) header.push_back(line);
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    std::map<std::string, std::string> row;
    std::istringstream cells(line);
    for (const auto& col : header) {
      std::string cell;
      std::getline(cells, cell, ',');
      row[col] = cell;
    }
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_SUITE("cli config") {
  TEST_CASE("sections, overrides and round trip") {
    RunConfig c;
    apply_ini_text(c, "[run]\nseed = 42\n\n[fit]\nD = 6\nupsample_iters = 100, 300\ninit_scale = 0.05\n"
                      "[purify.fit]\nT = 90\n[noise]\nkind = mog\n[bench]\nmethods = putt,tnp\n");
    CHECK(c.run.seed == 42);
    CHECK(c.fit.D == 6);
    CHECK(c.fit.upsample_iters == std::vector<int>{100, 300});
    CHECK(c.fit.init_scale == 0.05);
    CHECK(c.purify.fit.T == 90);
    CHECK(c.noise.kind == NoiseKind::kMog);
    CHECK(c.bench.methods == std::vector<BenchMethod>{BenchMethod::kPutt, BenchMethod::kTnp});
    apply_override(c, "fit.init_scale=auto");
    CHECK_FALSE(c.fit.init_scale.has_value());
    apply_override(c, "purify.fit.learn_rate=3.5");
    CHECK(c.purify.fit.learn_rate == 3.5);

    RunConfig back;
    apply_ini_text(back, to_ini(c));
    CHECK(to_ini(back) == to_ini(c));
    CHECK(to_json(back) == to_json(c));
  }

  TEST_CASE("unknown keys, sections and bad values are rejected") {
    RunConfig c;
    CHECK_THROWS_AS(apply_ini_text(c, "[fit]\nDD = 3\n"), ConfigError);
    CHECK_THROWS_AS(apply_ini_text(c, "[nope]\nD = 3\n"), ConfigError);
    CHECK_THROWS_AS(apply_ini_text(c, "D = 3\n"), ConfigError);
    CHECK_THROWS_AS(apply_ini_text(c, "[fit]\nD = three\n"), ConfigError);
    CHECK_THROWS_AS(apply_ini_text(c, "[fit]\nD = 3\nD = 4\n"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "fit.D"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "noise.kind=pink"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "run.threads=-"), ConfigError);
  }

  TEST_CASE("validation runs before any work and exits with 2") {
    const fs::path dir = scratch("validate");
    CHECK(tnp_cli({"fit", "x.png", "--set", "fit.l=9", "--out", dir.string()}).code == kExitConfigError);
    CHECK(tnp_cli({"analyze", "--set", "analyze.bins=1", "--out", dir.string()}).code == kExitConfigError);
    CHECK(tnp_cli({"bench", "--set", "bench.methods=tt,tt", "--out", dir.string()}).code == kExitConfigError);
    CHECK(tnp_cli({"fit", "x.png", "--threads", "0", "--out", dir.string()}).code == kExitConfigError);
    CHECK(tnp_cli({"fit", "--bogus", "x.png"}).code == kExitConfigError);
    CHECK(tnp_cli({}).code == kExitConfigError);
    CHECK(fs::is_empty(dir));
  }

  TEST_CASE("config file, then --set, then flags") {
    const fs::path dir = scratch("layering");
    write_text(dir / "run.ini", "[run]\nseed = 5\nout = " + (dir / "from_file").string() + "\n[analyze]\nsize = 32\nlevels = 1\nkinds = gaussian\n");
    Run r = tnp_cli({"analyze", "--config", (dir / "run.ini").string(), "--set", "run.seed=6", "--seed", "7",
                     "--out", (dir / "from_flag").string()});
    REQUIRE(r.code == kExitOk);
    CHECK_FALSE(fs::exists(dir / "from_file"));
    CHECK(read_json(dir / "from_flag" / "manifest.json")["seed"] == 7);
  }
}

TEST_SUITE("cli fit") {
  TEST_CASE("constant image reconstructs with infinite PSNR") {
    const fs::path dir = scratch("fit_constant");
    write_png(dir / "flat.png", ImageGrid(16, 16, 1, 128.0 / 255.0));
    Run r = tnp_cli({"fit", (dir / "flat.png").string(), "--set", "fit.D=4", "--out", (dir / "out").string()});
    CHECK(r.code == kExitOk);
    auto rows = read_csv(dir / "out" / "metrics.csv");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0]["group"] == "CLN");
    CHECK(rows[0]["psnr"] == "inf");
    CHECK(read_json(dir / "out" / "manifest.json")["images"][0]["metrics"]["CLN"]["psnr"] == "inf");
    CHECK(read_png(dir / "out" / "flat.png") == read_png(dir / "flat.png"));
  }

  TEST_CASE("a missing file fails the run and is recorded") {
    const fs::path dir = scratch("fit_missing");
    write_png(dir / "ok.png", smooth_synthetic_image(16, 1));
    Run r = tnp_cli({"fit", (dir / "ok.png").string(), (dir / "absent.png").string(), "--set", "fit.D=4",
                     "--out", (dir / "out").string()});
    CHECK(r.code == kExitFileFailure);
    auto m = read_json(dir / "out" / "manifest.json");
    CHECK(m["failures"] == 1);
    CHECK(m["images"][0]["status"] == "ok");
    CHECK(m["images"][1]["status"] == "error");
    CHECK_FALSE(m["images"][1]["error"].get<std::string>().empty());
    CHECK(fs::exists(dir / "out" / "ok.png"));
    CHECK_FALSE(fs::exists(dir / "out" / "absent.png"));
  }

  TEST_CASE("PSNR column equals the library's putt_fit bit for bit") {
    const fs::path dir = scratch("fit_parity");
    std::vector<std::string> args = {"fit", "--set", "fit.D=6", "--seed", "11", "--threads", "2",
                                     "--out", (dir / "out").string()};
    for (int s = 0; s < 4; ++s) {
      const fs::path p = dir / ("img" + std::to_string(s) + ".png");
      write_png(p, smooth_synthetic_image(64, static_cast<std::uint64_t>(s)));
      args.push_back(p.string());
    }
    REQUIRE(tnp_cli(args).code == kExitOk);

    RunConfig cfg;
    cfg.run.seed = 11;
    cfg.fit.D = 6;
    auto rows = read_csv(dir / "out" / "metrics.csv");
    REQUIRE(rows.size() == 4);
    for (const auto& row : rows) {
      const ImageGrid img = read_png(dir / (row.at("image") + ".png"));
      FitConfig fc = cfg.fit;
      fc.seed = derive_seed(image_seed(cfg, row.at("image")), {0});
      const ImageGrid rec = to_8bit_levels(qtt_to_image(putt_fit(img, fc).tt));
      CHECK(parse_double(row.at("psnr")) == psnr(img, rec));
      CHECK(parse_double(row.at("ssim")) == ssim(img, rec).value);
      CHECK(parse_double(row.at("nrmse")) == nrmse(img, rec).value);
      CHECK(read_png(dir / "out" / (row.at("image") + ".png")) == rec);
    }
  }

  TEST_CASE("duplicate output names are a config error") {
    const fs::path dir = scratch("fit_dupe");
    fs::create_directories(dir / "a");
    fs::create_directories(dir / "b");
    CHECK(tnp_cli({"fit", (dir / "a" / "x.png").string(), (dir / "b" / "x.png").string(), "--out",
                   (dir / "out").string()})
              .code == kExitConfigError);
  }
}

TEST_SUITE("cli purify") {
  const std::vector<std::string> kSmall = {"--set", "purify.D=5", "--set", "purify.max_rank=16",
                                           "--set", "purify.fit.T=150", "--set", "purify.check_invariants=true"};

  std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  }

  TEST_CASE("a clean reference gives the CLN, ADV and REC groups") {
    const fs::path dir = scratch("purify_ref");
    const ImageGrid clean = smooth_synthetic_image(32, 3);
    write_png(dir / "clean.png", clean);
    write_png(dir / "adv.png", add_clamped(clean, gen_noise({NoiseKind::kStructured, 0.3, true, 8.0 / 255, 1, 3, 3}, 32, 32)));
    Run r = tnp_cli(with({"purify", (dir / "adv.png").string(), "--reference", (dir / "clean.png").string(),
                          "--out", (dir / "out").string()},
                         kSmall));
    REQUIRE(r.code == kExitOk);
    auto rows = read_csv(dir / "out" / "metrics.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0]["group"] == "CLN");
    CHECK(rows[1]["group"] == "ADV");
    CHECK(rows[2]["group"] == "REC");
    auto m = read_json(dir / "out" / "manifest.json")["images"][0];
    CHECK(m["flags"].empty());
    CHECK(m["invariants"]["checks"].get<int>() > 0);
    CHECK(m["invariants"]["box_violations"] == 0);
    CHECK(m["invariants"]["feasibility_violations"] == 0);
    const ImageGrid rec_cln = read_png(dir / "out" / "adv.reference.png");
    const ImageGrid rec_adv = read_png(dir / "out" / "adv.png");
    CHECK(parse_double(rows[2]["ssim"]) == ssim(rec_cln, rec_adv).value);
  }

  TEST_CASE("without a reference ADV and REC are omitted and flagged") {
    const fs::path dir = scratch("purify_noref");
    write_png(dir / "in.png", smooth_synthetic_image(32, 4));
    REQUIRE(tnp_cli(with({"purify", (dir / "in.png").string(), "--out", (dir / "out").string()}, kSmall)).code ==
            kExitOk);
    auto rows = read_csv(dir / "out" / "metrics.csv");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0]["group"] == "CLN");
    auto m = read_json(dir / "out" / "manifest.json")["images"][0];
    CHECK_FALSE(m["metrics"].contains("ADV"));
    CHECK_FALSE(m["metrics"].contains("REC"));
    REQUIRE(m["flags"].size() == 1);
    CHECK(m["flags"][0].get<std::string>().rfind("no_reference", 0) == 0);
  }

  TEST_CASE("same config and seed give byte-identical files under any thread count") {
    const fs::path dir = scratch("purify_determinism");
    std::vector<std::string> inputs;
    for (int s = 0; s < 3; ++s) {
      const fs::path p = dir / ("in" + std::to_string(s) + ".png");
      write_png(p, smooth_synthetic_image(24, static_cast<std::uint64_t>(s), 3));
      inputs.push_back(p.string());
    }
    auto run = [&](const std::string& out, const std::string& threads) {
      auto a = with({"purify", "--seed", "9", "--threads", threads, "--out", (dir / out).string()}, kSmall);
      a.insert(a.end(), inputs.begin(), inputs.end());
      return tnp_cli(a).code;
    };
    REQUIRE(run("a", "1") == kExitOk);
    REQUIRE(run("b", "3") == kExitOk);
    std::size_t compared = 0;
    for (const auto& e : fs::directory_iterator(dir / "a")) {
      const auto name = e.path().filename();
      if (name == "timing.json") continue;
      CHECK_MESSAGE(slurp(e.path()) == slurp(dir / "b" / name), name.string());
      ++compared;
    }
    CHECK(compared == 3 * 3 + 3);
    for (const auto& e : fs::directory_iterator(dir / "a")) {
      CHECK(e.path().extension() != ".tmp");
    }
  }
}

TEST_SUITE("cli analyze") {
  TEST_CASE("mixture noise: avgpool ends closer to Gaussian than stride") {
    const fs::path dir = scratch("analyze_mog");
    auto run = [&](const std::string& out) {
      return tnp_cli({"analyze", "--set", "analyze.kinds=mog,gaussian", "--set", "analyze.seeds=5", "--seed", "3",
                      "--out", (dir / out).string()})
          .code;
    };
    REQUIRE(run("a") == kExitOk);
    REQUIRE(run("b") == kExitOk);
    CHECK(slurp(dir / "a" / "kl.csv") == slurp(dir / "b" / "kl.csv"));

    std::map<std::string, double> level3;
    for (const auto& row : read_csv(dir / "a" / "kl.csv")) {
      const double kl = parse_double(row.at("kl"));
      if (row.at("kind") == "gaussian") CHECK(kl <= 0.1);
      if (row.at("kind") == "mog" && row.at("level") == "3") level3[row.at("seed") + row.at("method")] = kl;
    }
    int wins = 0;
    for (int s = 0; s < 5; ++s) {
      wins += level3.at(std::to_string(s) + "avgpool") < level3.at(std::to_string(s) + "stride");
    }
    CHECK(wins >= 4);
    CHECK(fs::exists(dir / "a" / "hist_mog_avgpool.svg"));
    CHECK(fs::exists(dir / "a" / "hist_gaussian_stride.svg"));
    CHECK(slurp(dir / "a" / "hist_mog_stride.svg").find("<svg") == 0);
  }
}

TEST_SUITE("cli bench") {
  TEST_CASE("methods column, REC ordering and timing") {
    const fs::path dir = scratch("bench");
    Run r = tnp_cli({"bench", "--set", "bench.methods=putt,tnp", "--set", "bench.count=2", "--out",
                     (dir / "out").string()});
    REQUIRE(r.code == kExitOk);
    auto rows = read_csv(dir / "out" / "bench.csv");
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i]["method"] == (i % 2 ? "tnp" : "putt"));

    auto summary = read_csv(dir / "out" / "bench_summary.csv");
    REQUIRE(summary.size() == 2);
    CHECK(summary[0]["method"] == "putt");
    CHECK(summary[1]["method"] == "tnp");
    CHECK(parse_double(summary[1]["rec_ssim"]) >= parse_double(summary[0]["rec_ssim"]));

    double putt_s = 0.0, tnp_s = 0.0;
    for (auto& row : read_csv(dir / "out" / "timing.csv")) {
      const double s = parse_double(row["clean_seconds"]) + parse_double(row["adv_seconds"]);
      CHECK(s > 0.0);
      (row["method"] == "tnp" ? tnp_s : putt_s) += s;
    }
    WARN_MESSAGE(tnp_s > putt_s, "TNP " << tnp_s << " s vs PuTT " << putt_s << " s");
  }
}
