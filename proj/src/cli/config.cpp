#include "torus_stab/cli/config.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "torus_stab/errors.hpp"
#include "torus_stab/model.hpp"

namespace torus_stab::cli {

namespace {

std::string where(const YAML::Node& node) {
  const YAML::Mark m = node.Mark();
  if (m.is_null()) return "";
  return " (line " + std::to_string(m.line + 1) + ")";
}

void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError("field '" + path + "' must be a mapping" + where(node));
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      const std::string full = path.empty() ? key : path + "." + key;
      throw ConfigError("unknown field '" + full + "'" + where(kv.first));
    }
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& path) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("field '" + path + "' has an invalid value" + where(node));
  }
}

// Sentinel words such as "auto" stand for an unset optional value.
bool is_word(const YAML::Node& node, const char* word) {
  return node.IsScalar() && node.Scalar() == word;
}

double number(const YAML::Node& node, const std::string& path) {
  const auto v = scalar<double>(node, path);
  if (!std::isfinite(v)) throw ConfigError("field '" + path + "' must be finite" + where(node));
  return v;
}

template <typename T>
std::vector<T> list(const YAML::Node& node, const std::string& path) {
  if (!node.IsSequence()) throw ConfigError("field '" + path + "' must be a list" + where(node));
  std::vector<T> out;
  for (std::size_t i = 0; i < node.size(); ++i)
    out.push_back(scalar<T>(node[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

void read_double(const YAML::Node& sec, const char* key, const std::string& path, double& out) {
  if (sec[key]) out = number(sec[key], path + "." + key);
}

}  // namespace

ModelParams RunConfig::model_params() const {
  const TorusGrid g = grid();
  Field sigma = damping_samples.empty() ? make_bump(g, damping) : Field(g, damping_samples);
  return {a, a1, b, b1, gamma, std::move(sigma)};
}

SimConfig RunConfig::sim_config() const {
  if (!t_final) throw ConfigError("missing field 'time.T_final'");
  const ModelParams params = model_params();
  SimConfig cfg(params, make_initial(params.grid(), initial, params));
  cfg.t_final = *t_final;
  cfg.dt = dt;
  cfg.snapshot_stride = stride;
  cfg.rhs = rhs;
  cfg.alpha = alpha;
  if (rhs == RhsKind::Frozen) {
    if (frozen_preset == "pure_transport")
      cfg.frozen = FrozenCoefficients::pure_transport(params);
    else if (frozen_preset == "state")
      cfg.frozen = FrozenCoefficients::from_state(cfg.initial, params);
    else
      cfg.frozen = FrozenCoefficients::constant(params.grid(), frozen_q, frozen_p, frozen_r);
  }
  cfg.validate();
  return cfg;
}

nlohmann::json RunConfig::echo() const {
  using nlohmann::json;
  json j;
  j["grid"] = {{"n", n}};
  j["params"] = {{"a", a}, {"a1", a1}, {"b", b}, {"b1", b1}, {"gamma", gamma}};
  if (damping_samples.empty())
    j["damping"] = {{"center", damping.center}, {"width", damping.width},
                    {"amplitude", damping.amplitude}};
  else
    j["damping"] = {{"samples", damping_samples}};
  json init = {{"profile", initial.name}};
  if (initial.name == "random") {
    init["seed"] = initial.seed;
    init["modes"] = initial.modes;
    init["norm"] = initial.norm;
  } else if (initial.name == "bump") {
    init["center"] = initial.bump.center;
    init["width"] = initial.bump.width;
    init["amplitude"] = initial.bump.amplitude;
  } else if (initial.name == "sine") {
    init["mode"] = initial.mode;
    init["amplitude"] = initial.amplitude;
  } else {
    init["samples"] = initial.samples;
  }
  j["initial"] = init;
  json time = {{"stride", stride}};
  time["T_final"] = t_final ? json(*t_final) : json(nullptr);
  time["dt"] = dt ? json(*dt) : json("auto");
  j["time"] = time;
  j["rhs"] = to_string(rhs);
  if (rhs == RhsKind::Frozen) {
    json fr = {{"preset", frozen_preset}};
    if (frozen_preset == "constant") {
      fr["q"] = frozen_q;
      fr["p"] = frozen_p;
      fr["r"] = frozen_r;
    }
    j["frozen"] = fr;
  }
  j["alpha"] = alpha;
  json carl = {{"eta", carleman.eta}, {"delta", carleman.delta}, {"rho", carleman.rho},
               {"n_fine", carleman.n_fine}};
  carl["seam_slope"] = carleman.seam_slope ? json(*carleman.seam_slope) : json("default");
  j["carleman"] = carl;
  json sw = {{"amplitudes", sweep.amplitudes}, {"widths", sweep.widths},
             {"gammas", sweep.gammas}, {"speeds", sweep.speeds}, {"seeds", sweep.seeds}};
  sw["observe_T"] = sweep.observe_T ? json(*sweep.observe_T) : json("auto");
  j["sweep"] = sw;
  return j;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::string RunConfig::run_id() const { return sha256_hex(echo().dump()).substr(0, 16); }

RunConfig parse_config_text(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ": YAML syntax error at line " + std::to_string(e.mark.line + 1) +
                      ": " + e.msg);
  }
  RunConfig c;
  if (root.IsNull()) return c;
  check_keys(root, "", {"grid", "params", "damping", "initial", "time", "rhs", "frozen", "alpha",
                        "carleman", "sweep"});

  if (const auto g = root["grid"]) {
    check_keys(g, "grid", {"n"});
    if (g["n"]) {
      c.n = scalar<int>(g["n"], "grid.n");
      c.grid_given = true;
    }
  }
  TorusGrid checked(c.n);  // validates n early with the bound in the message
  (void)checked;

  if (const auto p = root["params"]) {
    check_keys(p, "params", {"a", "a1", "b", "b1", "gamma"});
    read_double(p, "a", "params", c.a);
    read_double(p, "a1", "params", c.a1);
    read_double(p, "b", "params", c.b);
    read_double(p, "b1", "params", c.b1);
    read_double(p, "gamma", "params", c.gamma);
  }
  if (!(c.b > 0.0)) throw ConfigError("field 'params.b' must be positive");
  if (!(c.b1 > 0.0)) throw ConfigError("field 'params.b1' must be positive");

  if (const auto d = root["damping"]) {
    check_keys(d, "damping", {"center", "width", "amplitude", "samples"});
    read_double(d, "center", "damping", c.damping.center);
    read_double(d, "width", "damping", c.damping.width);
    read_double(d, "amplitude", "damping", c.damping.amplitude);
    if (d["samples"]) {
      c.damping_samples = list<double>(d["samples"], "damping.samples");
      if (static_cast<int>(c.damping_samples.size()) != c.n)
        throw ConfigError("field 'damping.samples' needs " + std::to_string(c.n) + " values, got " +
                          std::to_string(c.damping_samples.size()) + where(d["samples"]));
    }
    if (!(c.damping.width > 0.0) || c.damping.width > kTwoPi)
      throw ConfigError("field 'damping.width' must lie in (0, 2π]");
  }

  if (const auto i = root["initial"]) {
    check_keys(i, "initial", {"profile", "seed", "modes", "norm", "center", "width", "amplitude",
                              "mode", "samples"});
    if (i["profile"]) c.initial.name = scalar<std::string>(i["profile"], "initial.profile");
    if (i["seed"]) c.initial.seed = scalar<std::uint64_t>(i["seed"], "initial.seed");
    if (i["modes"]) c.initial.modes = scalar<int>(i["modes"], "initial.modes");
    read_double(i, "norm", "initial", c.initial.norm);
    read_double(i, "center", "initial", c.initial.bump.center);
    read_double(i, "width", "initial", c.initial.bump.width);
    if (i["amplitude"]) {
      c.initial.amplitude = number(i["amplitude"], "initial.amplitude");
      c.initial.bump.amplitude = c.initial.amplitude;
    }
    if (i["mode"]) c.initial.mode = scalar<int>(i["mode"], "initial.mode");
    if (i["samples"]) c.initial.samples = list<double>(i["samples"], "initial.samples");
    const std::set<std::string> profiles{"random", "bump", "sine", "samples"};
    if (!profiles.count(c.initial.name))
      throw ConfigError("field 'initial.profile': unknown profile '" + c.initial.name +
                        "' (random, bump, sine, samples)" + where(i["profile"]));
    if (c.initial.name == "samples" && static_cast<int>(c.initial.samples.size()) != c.n)
      throw ConfigError("field 'initial.samples' needs " + std::to_string(c.n) + " values");
  }

  if (const auto t = root["time"]) {
    check_keys(t, "time", {"T_final", "dt", "stride"});
    if (t["T_final"] && !t["T_final"].IsNull()) {
      c.t_final = number(t["T_final"], "time.T_final");
      if (!(*c.t_final > 0.0)) throw ConfigError("field 'time.T_final' must be positive" + where(t["T_final"]));
    }
    if (t["dt"]) {
      if (is_word(t["dt"], "auto")) {
        c.dt.reset();
      } else {
        c.dt = number(t["dt"], "time.dt");
        if (!(*c.dt > 0.0)) throw ConfigError("field 'time.dt' must be positive or 'auto'" + where(t["dt"]));
      }
    }
    if (t["stride"]) {
      c.stride = scalar<int>(t["stride"], "time.stride");
      if (c.stride < 1) throw ConfigError("field 'time.stride' must be at least 1" + where(t["stride"]));
    }
  }

  if (const auto r = root["rhs"]) {
    const auto name = scalar<std::string>(r, "rhs");
    const auto kind = parse_rhs_kind(name);
    if (!kind)
      throw ConfigError("field 'rhs': unknown selector '" + name +
                        "' (closed_loop, linear_closed_loop, frozen, undamped)" + where(r));
    c.rhs = *kind;
  }
  if (const auto f = root["frozen"]) {
    check_keys(f, "frozen", {"preset", "q", "p", "r"});
    if (f["preset"]) c.frozen_preset = scalar<std::string>(f["preset"], "frozen.preset");
    if (c.frozen_preset != "pure_transport" && c.frozen_preset != "state" &&
        c.frozen_preset != "constant")
      throw ConfigError("field 'frozen.preset' must be pure_transport, state or constant" +
                        where(f["preset"]));
    read_double(f, "q", "frozen", c.frozen_q);
    read_double(f, "p", "frozen", c.frozen_p);
    read_double(f, "r", "frozen", c.frozen_r);
  }
  if (root["alpha"]) c.alpha = number(root["alpha"], "alpha");

  if (const auto k = root["carleman"]) {
    check_keys(k, "carleman", {"eta", "delta", "seam_slope", "rho", "n_fine"});
    read_double(k, "eta", "carleman", c.carleman.eta);
    read_double(k, "delta", "carleman", c.carleman.delta);
    read_double(k, "rho", "carleman", c.carleman.rho);
    if (k["seam_slope"] && !is_word(k["seam_slope"], "default"))
      c.carleman.seam_slope = number(k["seam_slope"], "carleman.seam_slope");
    if (k["n_fine"]) c.carleman.n_fine = scalar<int>(k["n_fine"], "carleman.n_fine");
  }

  if (const auto s = root["sweep"]) {
    check_keys(s, "sweep", {"amplitudes", "widths", "gammas", "speeds", "seeds", "observe_T"});
    if (s["amplitudes"]) c.sweep.amplitudes = list<double>(s["amplitudes"], "sweep.amplitudes");
    if (s["widths"]) c.sweep.widths = list<double>(s["widths"], "sweep.widths");
    if (s["gammas"]) c.sweep.gammas = list<double>(s["gammas"], "sweep.gammas");
    if (s["speeds"]) c.sweep.speeds = list<double>(s["speeds"], "sweep.speeds");
    if (s["seeds"]) c.sweep.seeds = list<std::uint64_t>(s["seeds"], "sweep.seeds");
    if (s["observe_T"] && !is_word(s["observe_T"], "auto"))
      c.sweep.observe_T = number(s["observe_T"], "sweep.observe_T");
  }
  return c;
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

}  // namespace torus_stab::cli
