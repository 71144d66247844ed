#include "tnp/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <type_traits>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "tnp/cli/format.hpp"
#include "tnp/errors.hpp"

namespace tnp::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

template <class Int>
Int parse_int(const std::string& text) {
  Int v{};
  const std::string t = trim(text);
  auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || end != t.data() + t.size() || t.empty()) {
    throw ConfigError("not an integer in range: '" + text + "'");
  }
  return v;
}

// parse/print pairs for every value type the registry knows.
template <class Int>
  requires(std::is_integral_v<Int> && !std::is_same_v<Int, bool>)
void parse_into(const std::string& s, Int& v) {
  v = parse_int<Int>(s);
}
void parse_into(const std::string& s, double& v) { v = parse_double(trim(s)); }
void parse_into(const std::string& s, std::filesystem::path& v) { v = trim(s); }

void parse_into(const std::string& s, bool& v) {
  const std::string t = trim(s);
  if (t == "true" || t == "1" || t == "yes" || t == "on") {
    v = true;
  } else if (t == "false" || t == "0" || t == "no" || t == "off") {
    v = false;
  } else {
    throw ConfigError("not a boolean: '" + s + "'");
  }
}

void parse_into(const std::string& s, std::optional<double>& v) {
  if (trim(s) == "auto") {
    v.reset();
  } else {
    v = parse_double(trim(s));
  }
}

void parse_into(const std::string& s, std::vector<int>& v) {
  v.clear();
  for (const auto& item : split_list(s)) v.push_back(parse_int<int>(item));
}

void parse_into(const std::string& s, NoiseKind& v) {
  auto k = parse_noise_kind(trim(s));
  if (!k) throw ConfigError("unknown noise kind '" + trim(s) + "'");
  v = *k;
}

void parse_into(const std::string& s, std::vector<NoiseKind>& v) {
  v.clear();
  for (const auto& item : split_list(s)) {
    NoiseKind k{};
    parse_into(item, k);
    v.push_back(k);
  }
}

void parse_into(const std::string& s, std::vector<BenchMethod>& v) {
  v.clear();
  for (const auto& item : split_list(s)) {
    auto m = parse_bench_method(item);
    if (!m) throw ConfigError("unknown bench method '" + item + "'");
    v.push_back(*m);
  }
}

template <class Int>
  requires(std::is_integral_v<Int> && !std::is_same_v<Int, bool>)
std::string print(Int v) {
  return std::to_string(v);
}
std::string print(double v) { return format_double(v); }
std::string print(bool v) { return v ? "true" : "false"; }
std::string print(const std::filesystem::path& v) { return v.string(); }
std::string print(const std::optional<double>& v) { return v ? format_double(*v) : "auto"; }
std::string print(NoiseKind v) { return std::string(to_string(v)); }

template <class T, class F>
std::string join(const std::vector<T>& items, F f) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + f(items[i]);
  return out;
}
std::string print(const std::vector<int>& v) { return join(v, [](int x) { return print(x); }); }
std::string print(const std::vector<NoiseKind>& v) { return join(v, [](NoiseKind x) { return print(x); }); }
std::string print(const std::vector<BenchMethod>& v) {
  return join(v, [](BenchMethod x) { return to_string(x); });
}

struct Entry {
  std::string section;
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
  bool affects_output = true;
};

template <class Access>
Entry entry(std::string section, std::string key, Access access, bool affects_output = true) {
  Entry e;
  e.section = std::move(section);
  e.key = std::move(key);
  e.set = [access](RunConfig& c, const std::string& v) { parse_into(v, access(c)); };
  e.get = [access](const RunConfig& c) { return print(access(const_cast<RunConfig&>(c))); };
  e.affects_output = affects_output;
  return e;
}

#define TNP_FIELD(section, key, expr) \
  entry(section, key, [](RunConfig& c) -> auto& { return expr; })

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> r;
    r.push_back(TNP_FIELD("run", "seed", c.run.seed));
    r.push_back(entry("run", "threads", [](RunConfig& c) -> auto& { return c.run.threads; }, false));
    r.push_back(entry("run", "out", [](RunConfig& c) -> auto& { return c.run.out; }, false));

    r.push_back(TNP_FIELD("fit", "D", c.fit.D));
    r.push_back(TNP_FIELD("fit", "l", c.fit.l));
    r.push_back(TNP_FIELD("fit", "T", c.fit.T));
    r.push_back(TNP_FIELD("fit", "upsample_iters", c.fit.upsample_iters));
    r.push_back(TNP_FIELD("fit", "max_rank", c.fit.max_rank));
    r.push_back(TNP_FIELD("fit", "learn_rate", c.fit.learn_rate));
    r.push_back(TNP_FIELD("fit", "init_scale", c.fit.init_scale));
    r.push_back(TNP_FIELD("fit", "init_gain", c.fit.init_gain));
    r.push_back(TNP_FIELD("fit", "round_tol", c.fit.round_tol));
    r.push_back(TNP_FIELD("fit", "max_halvings", c.fit.max_halvings));

    r.push_back(TNP_FIELD("purify", "D", c.purify.D));
    r.push_back(TNP_FIELD("purify", "l", c.purify.l));
    r.push_back(TNP_FIELD("purify", "T", c.purify.T));
    r.push_back(TNP_FIELD("purify", "N", c.purify.N));
    r.push_back(TNP_FIELD("purify", "alpha", c.purify.alpha));
    r.push_back(TNP_FIELD("purify", "eta", c.purify.eta));
    r.push_back(TNP_FIELD("purify", "beta", c.purify.beta));
    r.push_back(TNP_FIELD("purify", "max_rank", c.purify.max_rank));
    r.push_back(TNP_FIELD("purify", "prior_weight", c.purify.prior_weight));
    r.push_back(TNP_FIELD("purify", "round_tol", c.purify.round_tol));
    r.push_back(TNP_FIELD("purify", "max_halvings", c.purify.max_halvings));
    r.push_back(TNP_FIELD("purify", "check_invariants", c.purify.check_invariants));

    // Coarsest-stage PuTT settings; D and max_rank come from [purify].
    r.push_back(TNP_FIELD("purify.fit", "T", c.purify.fit.T));
    r.push_back(TNP_FIELD("purify.fit", "upsample_iters", c.purify.fit.upsample_iters));
    r.push_back(TNP_FIELD("purify.fit", "l", c.purify.fit.l));
    r.push_back(TNP_FIELD("purify.fit", "learn_rate", c.purify.fit.learn_rate));
    r.push_back(TNP_FIELD("purify.fit", "init_scale", c.purify.fit.init_scale));
    r.push_back(TNP_FIELD("purify.fit", "init_gain", c.purify.fit.init_gain));
    r.push_back(TNP_FIELD("purify.fit", "round_tol", c.purify.fit.round_tol));
    r.push_back(TNP_FIELD("purify.fit", "max_halvings", c.purify.fit.max_halvings));

    r.push_back(TNP_FIELD("noise", "kind", c.noise.kind));
    r.push_back(TNP_FIELD("noise", "sigma", c.noise.sigma));
    r.push_back(TNP_FIELD("noise", "match_snr", c.noise.match_snr));
    r.push_back(TNP_FIELD("noise", "epsilon", c.noise.epsilon));
    r.push_back(TNP_FIELD("noise", "band_low_sigma", c.noise.band_low_sigma));
    r.push_back(TNP_FIELD("noise", "band_high_sigma", c.noise.band_high_sigma));

    r.push_back(TNP_FIELD("analyze", "size", c.analyze.size));
    r.push_back(TNP_FIELD("analyze", "levels", c.analyze.levels));
    r.push_back(TNP_FIELD("analyze", "bins", c.analyze.bins));
    r.push_back(TNP_FIELD("analyze", "kinds", c.analyze.kinds));
    r.push_back(TNP_FIELD("analyze", "seeds", c.analyze.seeds));

    r.push_back(TNP_FIELD("bench", "methods", c.bench.methods));
    r.push_back(TNP_FIELD("bench", "count", c.bench.count));
    r.push_back(TNP_FIELD("bench", "size", c.bench.size));
    r.push_back(TNP_FIELD("bench", "tt_rank", c.bench.tt_rank));
    r.push_back(TNP_FIELD("bench", "tt_iterations", c.bench.tt_iterations));
    r.push_back(TNP_FIELD("bench", "tt_learn_rate", c.bench.tt_learn_rate));
    return r;
  }();
  return entries;
}

#undef TNP_FIELD

const Entry* find_entry(const std::string& section, const std::string& key) {
  for (const auto& e : registry()) {
    if (e.section == section && e.key == key) return &e;
  }
  return nullptr;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

std::string to_string(BenchMethod m) {
  switch (m) {
    case BenchMethod::kTt: return "tt";
    case BenchMethod::kQtt: return "qtt";
    case BenchMethod::kPutt: return "putt";
    case BenchMethod::kTnp: return "tnp";
  }
  return "?";
}

std::optional<BenchMethod> parse_bench_method(const std::string& name) {
  for (BenchMethod m : {BenchMethod::kTt, BenchMethod::kQtt, BenchMethod::kPutt, BenchMethod::kTnp}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

void RunConfig::validate() const {
  require(run.threads >= 1, "run.threads must be >= 1");
  require(!run.out.empty(), "run.out must not be empty");
  fit.validate();
  purify.validate();
  require(noise.sigma > 0.0, "noise.sigma must be > 0");
  require(noise.epsilon >= 0.0, "noise.epsilon must be >= 0");
  require(noise.band_low_sigma > 0.0 && noise.band_low_sigma < noise.band_high_sigma,
          "noise band sigmas must satisfy 0 < band_low_sigma < band_high_sigma");

  require(analyze.levels >= 0, "analyze.levels must be >= 0");
  require(is_pow2(analyze.size), "analyze.size must be a power of two");
  require(analyze.levels < 31 && (analyze.size >> analyze.levels) >= 4,
          "analyze.size must leave at least 4x4 pixels after analyze.levels poolings");
  require(analyze.bins >= 2, "analyze.bins must be >= 2");
  require(!analyze.kinds.empty(), "analyze.kinds must not be empty");
  require(analyze.seeds >= 1, "analyze.seeds must be >= 1");

  require(!bench.methods.empty(), "bench.methods must not be empty");
  std::set<BenchMethod> seen(bench.methods.begin(), bench.methods.end());
  require(seen.size() == bench.methods.size(), "bench.methods lists a method twice");
  require(bench.count >= 1, "bench.count must be >= 1");
  require(bench.size >= 2, "bench.size must be >= 2");
  require(bench.tt_rank >= 1, "bench.tt_rank must be >= 1");
  require(bench.tt_iterations >= 0, "bench.tt_iterations must be >= 0");
  require(bench.tt_learn_rate > 0.0, "bench.tt_learn_rate must be > 0");
}

void apply_setting(RunConfig& cfg, const std::string& section, const std::string& key,
                   const std::string& value) {
  const Entry* e = find_entry(section, key);
  if (!e) throw ConfigError("unknown config key '" + section + "." + key + "'");
  try {
    e->set(cfg, value);
  } catch (const ConfigError& err) {
    throw ConfigError(section + "." + key + ": " + err.what());
  }
}

void apply_ini_text(RunConfig& cfg, const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      const bool known = std::any_of(registry().begin(), registry().end(),
                                     [&](const Entry& e) { return e.section == section; });
      if (!known || !body.data().empty()) {
        throw ConfigError("config: '" + section + "' is not a known section");
      }
      continue;
    }
    for (const auto& [key, value] : body) apply_setting(cfg, section, key, value.data());
  }
}

void apply_ini_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_ini_text(cfg, ss.str());
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const std::string lhs = eq == std::string::npos ? "" : trim(assignment.substr(0, eq));
  const auto dot = lhs.rfind('.');
  if (eq == std::string::npos || dot == std::string::npos || dot == 0) {
    throw ConfigError("override must look like section.key=value: '" + assignment + "'");
  }
  apply_setting(cfg, lhs.substr(0, dot), lhs.substr(dot + 1), assignment.substr(eq + 1));
}

std::string to_ini(const RunConfig& cfg) {
  std::string out;
  std::string current;
  for (const auto& e : registry()) {
    if (!e.affects_output) continue;
    if (e.section != current) {
      out += (current.empty() ? "[" : "\n[") + e.section + "]\n";
      current = e.section;
    }
    out += e.key + " = " + e.get(cfg) + "\n";
  }
  return out;
}

nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& e : registry()) {
    if (e.affects_output) j[e.section][e.key] = e.get(cfg);
  }
  return j;
}

}  // namespace tnp::cli
