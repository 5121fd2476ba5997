#include "smdiff/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "smdiff/error.hpp"

namespace smdiff {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::Config, path + ": " + what);
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(join(path, key), "unknown key");
    }
  }
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

int get_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

std::uint64_t get_seed(const json& v, const std::string& path) {
  if (!v.is_number_unsigned()) fail(path, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_numbers(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

double parse_double(std::string_view s, const std::string& path) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) fail(path, "bad number '" + std::string(s) + "'");
  return v;
}

Complex parse_complex(std::string_view s) {
  if (s.empty()) fail("roots", "empty root");
  if (s.back() != 'i') return {parse_double(s, "roots"), 0.0};
  // Split at the last sign that is not part of an exponent or the leading sign.
  std::size_t split = std::string_view::npos;
  for (std::size_t i = s.size() - 1; i > 0; --i) {
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  if (split == std::string_view::npos) return {0.0, parse_double(s.substr(0, s.size() - 1), "roots")};
  const double re = parse_double(s.substr(0, split), "roots");
  std::string_view im = s.substr(split, s.size() - 1 - split);
  if (im.front() == '+') im.remove_prefix(1);
  return {re, parse_double(im, "roots")};
}

SignalModel parse_signal(const json& v, const std::string& path) {
  if (!v.is_object() || !v.contains("kind")) fail(path, "expected an object with \"kind\"");
  const std::string kind = get_string(v["kind"], join(path, "kind"));
  if (kind == "polynomial") {
    check_keys(v, path, {"kind", "coeffs"});
    if (!v.contains("coeffs")) fail(join(path, "coeffs"), "required");
    return PolynomialSignal{get_numbers(v["coeffs"], join(path, "coeffs"))};
  }
  if (kind == "t-cos-half") {
    check_keys(v, path, {"kind"});
    return TCosHalfSignal{};
  }
  if (kind == "harmonic-mix") {
    check_keys(v, path, {"kind"});
    return HarmonicMixSignal{};
  }
  if (kind == "custom") {
    check_keys(v, path, {"kind", "sinusoids", "polynomial"});
    CustomSignal c;
    if (v.contains("polynomial")) c.polynomial = get_numbers(v["polynomial"], join(path, "polynomial"));
    if (v.contains("sinusoids")) {
      const json& arr = v["sinusoids"];
      const std::string spath = join(path, "sinusoids");
      if (!arr.is_array()) fail(spath, "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string ip = spath + "[" + std::to_string(i) + "]";
        check_keys(arr[i], ip, {"amplitude", "frequency", "phase"});
        Sinusoid s;
        if (arr[i].contains("amplitude")) s.amplitude = get_number(arr[i]["amplitude"], join(ip, "amplitude"));
        if (arr[i].contains("frequency")) s.frequency = get_number(arr[i]["frequency"], join(ip, "frequency"));
        if (arr[i].contains("phase")) s.phase = get_number(arr[i]["phase"], join(ip, "phase"));
        c.sinusoids.push_back(s);
      }
    }
    return c;
  }
  fail(join(path, "kind"), "unknown signal kind '" + kind + "'");
}

NoiseModel parse_noise(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of noise terms");
  NoiseModel model;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string ip = path + "[" + std::to_string(i) + "]";
    const json& t = v[i];
    if (!t.is_object() || !t.contains("kind")) fail(ip, "expected an object with \"kind\"");
    const std::string kind = get_string(t["kind"], join(ip, "kind"));
    if (kind == "sinusoid") {
      check_keys(t, ip, {"kind", "amplitude", "frequency"});
      SinusoidNoise s;
      if (t.contains("amplitude")) s.amplitude = get_number(t["amplitude"], join(ip, "amplitude"));
      if (t.contains("frequency")) s.frequency = get_number(t["frequency"], join(ip, "frequency"));
      model.terms.emplace_back(s);
    } else if (kind == "gaussian") {
      check_keys(t, ip, {"kind", "sigma", "seed"});
      GaussianNoise g;
      if (t.contains("sigma")) g.sigma = get_number(t["sigma"], join(ip, "sigma"));
      if (t.contains("seed")) g.seed = get_seed(t["seed"], join(ip, "seed"));
      model.terms.emplace_back(g);
    } else {
      fail(join(ip, "kind"), "unknown noise kind '" + kind + "'");
    }
  }
  return model;
}

template <class Fn>
auto field(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    std::string msg = e.what();
    msg.erase(0, to_string(e.code()).size() + 2);
    if (e.code() == ErrorCode::Config) {
      // parse_root_spec reports against a bare "roots"; re-anchor at the real path.
      if (!msg.starts_with("roots: ")) throw;
      msg.erase(0, 7);
    }
    throw Error(ErrorCode::Config, path + ": " + msg);
  }
}

DifferentiatorParams parse_params(const json& v, const std::string& path) {
  check_keys(v, path, {"n", "n_f", "tau", "lambda", "L", "roots"});
  DifferentiatorParams p;
  if (!v.contains("n")) fail(join(path, "n"), "required");
  p.n = get_int(v["n"], join(path, "n"));
  if (v.contains("n_f")) p.n_f = get_int(v["n_f"], join(path, "n_f"));
  if (v.contains("tau")) p.tau = get_number(v["tau"], join(path, "tau"));
  if (v.contains("lambda")) p.lambda = get_numbers(v["lambda"], join(path, "lambda"));
  if (v.contains("L") && !v["L"].is_null()) p.lipschitz = get_number(v["L"], join(path, "L"));
  if (v.contains("roots")) {
    const std::string rp = join(path, "roots");
    const std::string text = get_string(v["roots"], rp);
    p.roots = field(rp, [&] { return parse_root_spec(text); });
  }
  return p;
}

PresetOverrides parse_overrides(const json& v, const std::string& path) {
  check_keys(v, path, {"tau", "t_end", "roots", "seed", "variant", "record_stride"});
  PresetOverrides o;
  if (v.contains("tau")) o.tau = get_number(v["tau"], join(path, "tau"));
  if (v.contains("t_end")) o.t_end = get_number(v["t_end"], join(path, "t_end"));
  if (v.contains("roots")) {
    const std::string text = get_string(v["roots"], join(path, "roots"));
    o.roots = field(join(path, "roots"), [&] { return parse_root_spec(text); });
  }
  if (v.contains("seed")) o.seed = get_seed(v["seed"], join(path, "seed"));
  if (v.contains("variant")) {
    const std::string text = get_string(v["variant"], join(path, "variant"));
    o.variant = field(join(path, "variant"), [&] { return parse_variant(text); });
  }
  if (v.contains("record_stride")) o.record_stride = get_int(v["record_stride"], join(path, "record_stride"));
  return o;
}

json signal_json(const SignalModel& s) {
  struct Visitor {
    json operator()(const PolynomialSignal& p) const { return {{"kind", "polynomial"}, {"coeffs", p.coeffs}}; }
    json operator()(const TCosHalfSignal&) const { return {{"kind", "t-cos-half"}}; }
    json operator()(const HarmonicMixSignal&) const { return {{"kind", "harmonic-mix"}}; }
    json operator()(const CustomSignal& c) const {
      json arr = json::array();
      for (const Sinusoid& s : c.sinusoids) {
        arr.push_back({{"amplitude", s.amplitude}, {"frequency", s.frequency}, {"phase", s.phase}});
      }
      return {{"kind", "custom"}, {"sinusoids", arr}, {"polynomial", c.polynomial}};
    }
  };
  return std::visit(Visitor{}, s);
}

json noise_json(const NoiseModel& n) {
  json arr = json::array();
  for (const NoiseTerm& t : n.terms) {
    if (const auto* s = std::get_if<SinusoidNoise>(&t)) {
      arr.push_back({{"kind", "sinusoid"}, {"amplitude", s->amplitude}, {"frequency", s->frequency}});
    } else {
      const auto& g = std::get<GaussianNoise>(t);
      arr.push_back({{"kind", "gaussian"}, {"sigma", g.sigma}, {"seed", g.seed}});
    }
  }
  return arr;
}

}  // namespace

RootSpec parse_root_spec(std::string_view text) {
  if (text == "from-charpoly") return FromCharPoly{};
  if (text.starts_with("repeated:")) return RepeatedRoot{parse_double(text.substr(9), "roots")};
  if (text.starts_with("explicit:")) {
    std::vector<Complex> roots;
    std::string_view rest = text.substr(9);
    while (!rest.empty()) {
      const std::size_t comma = rest.find(',');
      roots.push_back(parse_complex(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    return ExplicitRoots{RootSet(std::move(roots))};
  }
  throw Error(ErrorCode::Config,
              "roots: expected from-charpoly, repeated:<x> or explicit:<list>, got '" + std::string(text) + "'");
}

CliConfig parse_config(const json& doc) {
  check_keys(doc, "", {"preset", "overrides", "params", "signal", "noise", "t0", "t_end", "variant",
                       "record_stride", "initial_error", "output", "settle_fraction", "certify_grid"});
  CliConfig cfg;
  if (doc.contains("preset")) {
    for (const char* key : {"params", "signal", "noise", "t0", "t_end", "variant", "record_stride", "initial_error"}) {
      if (doc.contains(key)) fail(key, "not allowed together with \"preset\"; use \"overrides\"");
    }
    cfg.preset = get_string(doc["preset"], "preset");
    PresetOverrides o;
    if (doc.contains("overrides")) o = parse_overrides(doc["overrides"], "overrides");
    cfg.run = field("preset", [&] { return preset(*cfg.preset, o); });
  } else {
    if (doc.contains("overrides")) fail("overrides", "only valid together with \"preset\"");
    if (!doc.contains("params")) fail("params", "required");
    if (!doc.contains("t_end")) fail("t_end", "required");
    RunConfig& r = cfg.run;
    r.params = parse_params(doc["params"], "params");
    if (doc.contains("signal")) r.signal = parse_signal(doc["signal"], "signal");
    if (doc.contains("noise")) r.noise = parse_noise(doc["noise"], "noise");
    if (doc.contains("t0")) r.t0 = get_number(doc["t0"], "t0");
    r.t_end = get_number(doc["t_end"], "t_end");
    if (doc.contains("variant")) {
      const std::string text = get_string(doc["variant"], "variant");
      r.variant = parse_variant(text);
    }
    if (doc.contains("record_stride")) r.record_stride = get_int(doc["record_stride"], "record_stride");
    if (doc.contains("initial_error") && !doc["initial_error"].is_null()) {
      r.initial_error = get_numbers(doc["initial_error"], "initial_error");
    }
  }
  if (doc.contains("output")) {
    const json& o = doc["output"];
    check_keys(o, "output", {"trace", "metrics"});
    if (o.contains("trace")) cfg.trace_path = get_string(o["trace"], "output.trace");
    if (o.contains("metrics")) cfg.metrics_path = get_string(o["metrics"], "output.metrics");
  }
  if (doc.contains("settle_fraction")) {
    cfg.settle_fraction = get_number(doc["settle_fraction"], "settle_fraction");
    if (!(cfg.settle_fraction > 0.0 && cfg.settle_fraction < 1.0)) fail("settle_fraction", "must lie in (0, 1)");
  }
  if (doc.contains("certify_grid")) {
    const json& g = doc["certify_grid"];
    check_keys(g, "certify_grid", {"w1_min", "w1_max", "points"});
    if (g.contains("w1_min")) cfg.grid.w1_min = get_number(g["w1_min"], "certify_grid.w1_min");
    if (g.contains("w1_max")) cfg.grid.w1_max = get_number(g["w1_max"], "certify_grid.w1_max");
    if (g.contains("points")) cfg.grid.points = get_int(g["points"], "certify_grid.points");
    if (!(cfg.grid.w1_min > 0.0) || cfg.grid.w1_max < cfg.grid.w1_min || cfg.grid.points < 1) {
      fail("certify_grid", "need 0 < w1_min <= w1_max and points >= 1");
    }
  }
  // Surface range problems as Config errors now rather than at run time.
  field("params", [&] {
    validate(cfg.run);
    return 0;
  });
  return cfg;
}

CliConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i + 1 < byte; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw Error(ErrorCode::Config, "line " + std::to_string(line) + ", column " +
                                       std::to_string(column) + ": " + e.what());
  }
  return parse_config(doc);
}

CliConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

json to_json(const RunConfig& c) {
  json params = {{"n", c.params.n},
                 {"n_f", c.params.n_f},
                 {"tau", c.params.tau},
                 {"lambda", c.params.lambda},
                 {"roots", describe(c.params.roots)}};
  params["L"] = c.params.lipschitz ? json(*c.params.lipschitz) : json(nullptr);
  json out = {{"params", params},
              {"signal", signal_json(c.signal)},
              {"noise", noise_json(c.noise)},
              {"t0", c.t0},
              {"t_end", c.t_end},
              {"variant", std::string(to_string(c.variant))},
              {"record_stride", c.record_stride}};
  out["initial_error"] = c.initial_error ? json(*c.initial_error) : json(nullptr);
  return out;
}

json to_json(const GridSpec& g) {
  return {{"w1_min", g.w1_min}, {"w1_max", g.w1_max}, {"points", g.points}};
}

json to_json(const RootSet& roots) {
  json arr = json::array();
  for (Complex r : roots) arr.push_back({{"re", r.real()}, {"im", r.imag()}});
  return arr;
}

}  // namespace smdiff
