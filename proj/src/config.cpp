#include "coolpinns/config.hpp"

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

namespace coolpinns {
namespace {

[[noreturn]] void bad(const std::string& msg, std::size_t line = 0) {
  if (line)
    throw ConfigError(msg + " (line " + std::to_string(line) + ")");
  throw ConfigError(msg);
}

// strips a # comment, honoring quotes
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_str) {
      if (c == '\\') ++i;
      else if (c == '"') in_str = false;
    } else if (c == '"') {
      in_str = true;
    } else if (c == '#') {
      return s.substr(0, i);
    }
  }
  return s;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

int bracket_depth(const std::string& s) {
  int d = 0;
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_str) {
      if (c == '\\') ++i;
      else if (c == '"') in_str = false;
    } else if (c == '"') {
      in_str = true;
    } else if (c == '[') {
      ++d;
    } else if (c == ']') {
      --d;
    }
  }
  return d;
}

void skip_ws(const std::string& s, std::size_t& i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
}

TomlValue parse_value(const std::string& s, std::size_t& i, std::size_t line);

TomlValue parse_string(const std::string& s, std::size_t& i,
                       std::size_t line) {
  TomlValue v;
  v.kind = TomlValue::Kind::Str;
  ++i;  // opening quote
  while (i < s.size() && s[i] != '"') {
    if (s[i] == '\\') {
      ++i;
      if (i >= s.size()) bad("unterminated escape in string", line);
      switch (s[i]) {
        case '"': v.s += '"'; break;
        case '\\': v.s += '\\'; break;
        case 'n': v.s += '\n'; break;
        case 't': v.s += '\t'; break;
        default: bad("unsupported escape in string", line);
      }
    } else {
      v.s += s[i];
    }
    ++i;
  }
  if (i >= s.size()) bad("unterminated string", line);
  ++i;  // closing quote
  return v;
}

TomlValue parse_array(const std::string& s, std::size_t& i,
                      std::size_t line) {
  TomlValue v;
  v.kind = TomlValue::Kind::Array;
  ++i;  // opening bracket
  skip_ws(s, i);
  if (i < s.size() && s[i] == ']') {
    ++i;
    return v;
  }
  for (;;) {
    v.arr.push_back(parse_value(s, i, line));
    skip_ws(s, i);
    if (i >= s.size()) bad("unterminated array", line);
    if (s[i] == ',') {
      ++i;
      skip_ws(s, i);
      if (i < s.size() && s[i] == ']') {  // trailing comma
        ++i;
        return v;
      }
      continue;
    }
    if (s[i] == ']') {
      ++i;
      return v;
    }
    bad("expected ',' or ']' in array", line);
  }
}

TomlValue parse_scalar_token(const std::string& tok, std::size_t line) {
  TomlValue v;
  if (tok == "true" || tok == "false") {
    v.kind = TomlValue::Kind::Bool;
    v.b = tok == "true";
    return v;
  }
  bool integral = !tok.empty();
  for (std::size_t k = 0; k < tok.size(); ++k) {
    const char c = tok[k];
    if (k == 0 && (c == '+' || c == '-')) continue;
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      integral = false;
      break;
    }
  }
  if (tok.empty() || tok == "+" || tok == "-") integral = false;
  errno = 0;
  if (integral) {
    v.kind = TomlValue::Kind::Int;
    char* end = nullptr;
    v.u = std::strtoull(tok.c_str(), &end, 10);
    v.i = static_cast<long long>(v.u);
    if (tok[0] == '-') {
      errno = 0;
      v.i = std::strtoll(tok.c_str(), &end, 10);
      v.u = static_cast<std::uint64_t>(v.i);
    }
    if (errno == ERANGE) bad("integer out of range: " + tok, line);
    return v;
  }
  v.kind = TomlValue::Kind::Float;
  char* end = nullptr;
  v.f = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || tok.empty())
    bad("bad value: '" + tok + "'", line);
  return v;
}

TomlValue parse_value(const std::string& s, std::size_t& i,
                      std::size_t line) {
  skip_ws(s, i);
  if (i >= s.size()) bad("missing value", line);
  if (s[i] == '"') return parse_string(s, i, line);
  if (s[i] == '[') return parse_array(s, i, line);
  std::size_t j = i;
  while (j < s.size() && s[j] != ',' && s[j] != ']' &&
         !std::isspace(static_cast<unsigned char>(s[j])))
    ++j;
  TomlValue v = parse_scalar_token(s.substr(i, j - i), line);
  i = j;
  return v;
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' &&
        c != '.')
      return false;
  return true;
}

}  // namespace

bool TomlValue::as_bool(const std::string& key) const {
  if (kind != Kind::Bool) bad("config key '" + key + "' expects true/false");
  return b;
}
long long TomlValue::as_int(const std::string& key) const {
  if (kind != Kind::Int) bad("config key '" + key + "' expects an integer");
  return i;
}
std::uint64_t TomlValue::as_u64(const std::string& key) const {
  if (kind != Kind::Int)
    bad("config key '" + key + "' expects a nonnegative integer");
  return u;
}
Scalar TomlValue::as_number(const std::string& key) const {
  if (kind == Kind::Int) return static_cast<Scalar>(i);
  if (kind != Kind::Float) bad("config key '" + key + "' expects a number");
  return f;
}
const std::string& TomlValue::as_str(const std::string& key) const {
  if (kind != Kind::Str) bad("config key '" + key + "' expects a string");
  return s;
}
const std::vector<TomlValue>& TomlValue::as_array(
    const std::string& key) const {
  if (kind != Kind::Array) bad("config key '" + key + "' expects an array");
  return arr;
}

TomlTable parse_toml(const std::string& text) {
  TomlTable table;
  std::vector<std::string> lines;
  {
    std::istringstream in(text);
    std::string l;
    while (std::getline(in, l)) lines.push_back(l);
  }
  std::string section;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string raw = trim(strip_comment(lines[n]));
    if (raw.empty()) continue;
    const std::size_t at = n + 1;
    if (raw.front() == '[' && raw.find('=') == std::string::npos) {
      if (raw.back() != ']') bad("malformed section header", at);
      section = trim(raw.substr(1, raw.size() - 2));
      if (!valid_key(section)) bad("malformed section name", at);
      continue;
    }
    // join physical lines until brackets balance
    while (bracket_depth(raw) > 0 && n + 1 < lines.size())
      raw += " " + trim(strip_comment(lines[++n]));
    if (bracket_depth(raw) != 0) bad("unbalanced brackets", at);
    const std::size_t eq = raw.find('=');
    if (eq == std::string::npos) bad("expected key = value", at);
    std::string key = trim(raw.substr(0, eq));
    if (!valid_key(key)) bad("malformed key '" + key + "'", at);
    if (!section.empty()) key = section + "." + key;
    std::size_t i = eq + 1;
    const TomlValue v = parse_value(raw, i, at);
    skip_ws(raw, i);
    if (i != raw.size()) bad("trailing characters after value", at);
    if (!table.emplace(key, v).second) bad("duplicate key '" + key + "'", at);
  }
  return table;
}

TomlTable parse_toml_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_toml(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

const char* vasc_kind_name(VascKind k) {
  switch (k) {
    case VascKind::StraightCenter: return "straight-center";
    case VascKind::StraightQuarter: return "straight-quarter";
    case VascKind::SineWave: return "sine";
    case VascKind::Stepped: return "stepped";
    case VascKind::SteppedMst: return "stepped-mst";
    case VascKind::Custom: return "custom";
    case VascKind::NoChannel: return "none";
  }
  return "none";
}

VascKind vasc_kind_from_name(const std::string& name) {
  for (VascKind k :
       {VascKind::StraightCenter, VascKind::StraightQuarter, VascKind::SineWave,
        VascKind::Stepped, VascKind::SteppedMst, VascKind::Custom,
        VascKind::NoChannel})
    if (name == vasc_kind_name(k)) return k;
  throw ConfigError("unknown geometry kind: '" + name + "'");
}

const char* command_name(Command c) {
  switch (c) {
    case Command::Forward: return "forward";
    case Command::Inverse: return "inverse";
    case Command::Oracle: return "oracle";
    case Command::VerifyMst: return "verify-mst";
    case Command::Sweep: return "sweep";
    case Command::Compare: return "compare";
  }
  return "forward";
}

Command command_from_name(const std::string& name) {
  for (Command c : {Command::Forward, Command::Inverse, Command::Oracle,
                    Command::VerifyMst, Command::Sweep, Command::Compare})
    if (name == command_name(c)) return c;
  throw ConfigError("unknown command: '" + name + "'");
}

namespace {

struct ForwardRow {
  const char* tag;
  VascKind kind;
  int interior;
  // selected hyperparameters per flow rate {1, 10, 100} mL/min
  int layers[3];
  int neurons[3];
  Scalar lr[3];
  int paper_adam[3];
  int paper_lbfgs[3];
};

constexpr ForwardRow kForward[] = {
    {"test1", VascKind::StraightCenter, 1849,
     {7, 4, 3}, {30, 30, 30}, {1e-3, 1e-4, 8e-4},
     {10000, 10000, 10000}, {15000, 15000, 15000}},
    {"test2", VascKind::StraightQuarter, 2025,
     {6, 4, 3}, {30, 30, 30}, {7e-4, 1e-4, 3e-4},
     {10000, 10000, 10000}, {15000, 15000, 15000}},
    {"test3", VascKind::SineWave, 1936,
     {3, 3, 8}, {30, 30, 40}, {1e-4, 5e-4, 1e-3},
     {10000, 10000, 10000}, {15000, 15000, 15000}},
    {"test4", VascKind::Stepped, 3942,
     {10, 5, 9}, {50, 30, 30}, {4e-4, 2e-4, 8e-4},
     {25000, 10000, 25000}, {25000, 250000, 250000}},
};

struct InverseRow {
  const char* tag;
  VascKind kind;
  int interior;
  int data_points;
  // per initial K {1.0, 6.25}
  int layers[2];
  int neurons[2];
  Scalar lr[2];
  int paper_adam[2];
};

constexpr InverseRow kInverse[] = {
    {"test1", VascKind::StraightCenter, 1849, 1804,
     {2, 3}, {30, 30}, {9e-4, 6e-4}, {150000, 150000}},
    {"test2", VascKind::StraightQuarter, 2025, 1754,
     {2, 3}, {30, 30}, {7e-4, 5e-4}, {200000, 150000}},
    {"test3", VascKind::SineWave, 1936, 2541,
     {4, 4}, {40, 40}, {1e-3, 3e-4}, {250000, 300000}},
    {"test4", VascKind::Stepped, 3942, 2102,
     {3, 3}, {30, 30}, {3e-4, 7e-4}, {300000, 300000}},
};

constexpr Scalar kFlows[3] = {1.0, 10.0, 100.0};
constexpr const char* kFlowTag[3] = {"v1", "v10", "v100"};
constexpr const char* kInitTag[2] = {"k1", "k6.25"};
constexpr Scalar kInitK[2] = {1.0, 6.25};

RunConfig forward_preset(const ForwardRow& r, int fi, bool paper) {
  RunConfig c;
  c.command = Command::Forward;
  c.geometry = r.kind;
  c.params.flow_ml_min = kFlows[fi];
  c.hidden_layers = r.layers[fi];
  c.neurons = r.neurons[fi];
  c.learning_rate = r.lr[fi];
  c.adam_epochs = paper ? r.paper_adam[fi] : 10000;
  c.lbfgs_epochs = paper ? r.paper_lbfgs[fi] : 2000;
  c.interior_points = r.interior;
  c.uniform_interior = true;
  return c;
}

RunConfig inverse_preset(const InverseRow& r, int ki, bool paper) {
  RunConfig c;
  c.command = Command::Inverse;
  c.inverse = true;
  c.geometry = r.kind;
  c.params.flow_ml_min = 10.0;
  c.hidden_layers = r.layers[ki];
  c.neurons = r.neurons[ki];
  c.learning_rate = r.lr[ki];
  c.adam_epochs = paper ? r.paper_adam[ki] : 50000;
  c.lbfgs_epochs = 0;
  c.interior_points = r.interior;
  c.uniform_interior = true;
  c.initial_K = kInitK[ki];
  c.data_points = r.data_points;
  return c;
}

RunConfig mst_preset(bool radiation) {
  RunConfig c;
  c.command = Command::VerifyMst;
  c.geometry = VascKind::SteppedMst;
  c.params.flow_ml_min = 10.0;
  c.params.radiation = radiation;
  c.hidden_layers = 5;
  c.neurons = 30;
  c.learning_rate = 2e-4;
  c.adam_epochs = 10000;
  c.lbfgs_epochs = 2000;
  c.interior_points = 2025;
  return c;
}

const std::map<std::string, RunConfig>& preset_map() {
  static const std::map<std::string, RunConfig> presets = [] {
    std::map<std::string, RunConfig> m;
    for (const ForwardRow& r : kForward)
      for (int fi = 0; fi < 3; ++fi) {
        const std::string base =
            std::string(r.tag) + "-" + kFlowTag[fi];
        m[base] = forward_preset(r, fi, false);
        m[base + "-paper"] = forward_preset(r, fi, true);
      }
    for (const InverseRow& r : kInverse)
      for (int ki = 0; ki < 2; ++ki) {
        const std::string base =
            "inv-" + std::string(r.tag) + "-" + kInitTag[ki];
        m[base] = inverse_preset(r, ki, false);
        m[base + "-paper"] = inverse_preset(r, ki, true);
      }
    m["mst-off"] = mst_preset(false);
    m["mst-on"] = mst_preset(true);
    for (auto& [name, cfg] : m) cfg.preset = name;
    return m;
  }();
  return presets;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, cfg] : preset_map()) v.push_back(name);
    return v;
  }();
  return names;
}

RunConfig preset_config(const std::string& name) {
  const auto& m = preset_map();
  const auto it = m.find(name);
  if (it == m.end()) throw ConfigError("unknown preset: '" + name + "'");
  return it->second;
}

void apply_config_table(RunConfig& c, const TomlTable& t) {
  for (const auto& [key, v] : t) {
    if (key == "command") c.command = command_from_name(v.as_str(key));
    else if (key == "preset") continue;  // handled by the loader
    else if (key == "engine") {
      const std::string& e = v.as_str(key);
      if (e == "pinn") c.engine = Engine::Pinn;
      else if (e == "oracle") c.engine = Engine::Oracle;
      else bad("engine must be 'pinn' or 'oracle'");
    } else if (key == "geometry.kind") {
      c.geometry = vasc_kind_from_name(v.as_str(key));
    } else if (key == "geometry.points_mm") {
      c.custom_vertices.clear();
      for (const TomlValue& pt : v.as_array(key)) {
        const auto& xy = pt.as_array(key);
        if (xy.size() != 2) bad("points_mm entries must be [x, y] pairs");
        c.custom_vertices.emplace_back(meters_from_mm(xy[0].as_number(key)),
                                       meters_from_mm(xy[1].as_number(key)));
      }
      c.geometry = VascKind::Custom;
    } else if (key == "geometry.reverse") {
      c.reverse_flow = v.as_bool(key);
    } else if (key == "model.thickness_mm") {
      c.params.thickness = meters_from_mm(v.as_number(key));
    } else if (key == "model.conductivity") {
      c.params.conductivity = v.as_number(key);
    } else if (key == "model.emissivity") {
      c.params.emissivity = v.as_number(key);
    } else if (key == "model.h_conv") {
      c.params.h_conv = v.as_number(key);
    } else if (key == "model.heat_flux") {
      c.params.heat_flux = v.as_number(key);
    } else if (key == "model.ambient_C") {
      c.params.theta_amb = kelvin_from_celsius(v.as_number(key));
    } else if (key == "model.c_f") {
      c.params.c_f = v.as_number(key);
    } else if (key == "model.rho_f") {
      c.params.rho_f = v.as_number(key);
    } else if (key == "model.flow_mL_min") {
      c.params.flow_ml_min = v.as_number(key);
    } else if (key == "model.inlet_C") {
      c.params.theta_in = kelvin_from_celsius(v.as_number(key));
    } else if (key == "model.radiation") {
      c.params.radiation = v.as_bool(key);
    } else if (key == "net.hidden_layers") {
      c.hidden_layers = static_cast<int>(v.as_int(key));
    } else if (key == "net.neurons") {
      c.neurons = static_cast<int>(v.as_int(key));
    } else if (key == "train.learning_rate") {
      c.learning_rate = v.as_number(key);
    } else if (key == "train.adam_epochs") {
      c.adam_epochs = static_cast<int>(v.as_int(key));
    } else if (key == "train.lbfgs_epochs") {
      c.lbfgs_epochs = static_cast<int>(v.as_int(key));
    } else if (key == "train.log_every") {
      c.log_every = static_cast<int>(v.as_int(key));
    } else if (key == "train.seed") {
      c.seed = v.as_u64(key);
    } else if (key == "inverse.initial_K") {
      c.initial_K = v.as_number(key);
    } else if (key == "inverse.ground_truth_K") {
      c.ground_truth_K = v.as_number(key);
    } else if (key == "inverse.data_points") {
      c.data_points = static_cast<int>(v.as_int(key));
    } else if (key == "inverse.noise_sigma") {
      c.noise_sigma = v.as_number(key);
    } else if (key == "inverse.data") {
      c.data_source = v.as_str(key);
    } else if (key == "sampling.interior") {
      c.interior_points = static_cast<int>(v.as_int(key));
    } else if (key == "sampling.uniform") {
      c.uniform_interior = v.as_bool(key);
    } else if (key == "sampling.per_edge") {
      c.sampler.per_edge = static_cast<int>(v.as_int(key));
    } else if (key == "sampling.curve_samples") {
      c.sampler.curve_samples = static_cast<int>(v.as_int(key));
    } else if (key == "sampling.band_halfwidth_mm") {
      c.sampler.band_halfwidth = meters_from_mm(v.as_number(key));
    } else if (key == "output.grid") {
      c.grid = static_cast<int>(v.as_int(key));
    } else {
      bad("unknown config key: '" + key + "'");
    }
  }
}

RunConfig load_config_file(const std::string& path) {
  const TomlTable t = parse_toml_file(path);
  RunConfig c;
  const auto p = t.find("preset");
  if (p != t.end()) c = preset_config(p->second.as_str("preset"));
  apply_config_table(c, t);
  return c;
}

SweepSpec load_sweep_file(const std::string& path) {
  const TomlTable t = parse_toml_file(path);
  SweepSpec spec;
  const auto p = t.find("preset");
  if (p != t.end()) spec.base = preset_config(p->second.as_str("preset"));
  TomlTable base_keys;
  for (const auto& [key, v] : t) {
    if (key == "sweep.hidden_layers") {
      for (const TomlValue& e : v.as_array(key))
        spec.hidden_layers.push_back(static_cast<int>(e.as_int(key)));
    } else if (key == "sweep.neurons") {
      for (const TomlValue& e : v.as_array(key))
        spec.neurons.push_back(static_cast<int>(e.as_int(key)));
    } else if (key == "sweep.learning_rate") {
      for (const TomlValue& e : v.as_array(key))
        spec.learning_rates.push_back(e.as_number(key));
    } else {
      base_keys.emplace(key, v);
    }
  }
  apply_config_table(spec.base, base_keys);
  if (spec.hidden_layers.empty())
    spec.hidden_layers.push_back(spec.base.hidden_layers);
  if (spec.neurons.empty()) spec.neurons.push_back(spec.base.neurons);
  if (spec.learning_rates.empty())
    spec.learning_rates.push_back(spec.base.learning_rate);
  return spec;
}

namespace {

std::string fmt_num(Scalar x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string snapshot_toml(const RunConfig& c) {
  std::ostringstream o;
  o << "command = \"" << command_name(c.command) << "\"\n";
  if (!c.preset.empty()) o << "preset = \"" << c.preset << "\"\n";
  if (c.command == Command::VerifyMst)
    o << "engine = \"" << (c.engine == Engine::Pinn ? "pinn" : "oracle")
      << "\"\n";
  o << "\n[geometry]\n";
  o << "kind = \"" << vasc_kind_name(c.geometry) << "\"\n";
  if (c.geometry == VascKind::Custom) {
    o << "points_mm = [";
    for (std::size_t i = 0; i < c.custom_vertices.size(); ++i) {
      if (i) o << ", ";
      o << "[" << fmt_num(c.custom_vertices[i].x() * 1e3) << ", "
        << fmt_num(c.custom_vertices[i].y() * 1e3) << "]";
    }
    o << "]\n";
  }
  o << "reverse = " << (c.reverse_flow ? "true" : "false") << "\n";
  o << "\n[model]\n";
  o << "thickness_mm = " << fmt_num(c.params.thickness * 1e3) << "\n";
  o << "conductivity = " << fmt_num(c.params.conductivity) << "\n";
  o << "emissivity = " << fmt_num(c.params.emissivity) << "\n";
  o << "h_conv = " << fmt_num(c.params.h_conv) << "\n";
  o << "heat_flux = " << fmt_num(c.params.heat_flux) << "\n";
  o << "ambient_C = " << fmt_num(c.params.theta_amb - 273.15) << "\n";
  o << "c_f = " << fmt_num(c.params.c_f) << "\n";
  o << "rho_f = " << fmt_num(c.params.rho_f) << "\n";
  o << "flow_mL_min = " << fmt_num(c.params.flow_ml_min) << "\n";
  o << "inlet_C = " << fmt_num(c.params.theta_in - 273.15) << "\n";
  o << "radiation = " << (c.params.radiation ? "true" : "false") << "\n";
  o << "\n[net]\n";
  o << "hidden_layers = " << c.hidden_layers << "\n";
  o << "neurons = " << c.neurons << "\n";
  o << "\n[train]\n";
  o << "learning_rate = " << fmt_num(c.learning_rate) << "\n";
  o << "adam_epochs = " << c.adam_epochs << "\n";
  o << "lbfgs_epochs = " << c.lbfgs_epochs << "\n";
  o << "log_every = " << c.log_every << "\n";
  o << "seed = " << c.seed << "\n";
  if (c.command == Command::Inverse || c.inverse) {
    o << "\n[inverse]\n";
    o << "initial_K = " << fmt_num(c.initial_K) << "\n";
    o << "ground_truth_K = " << fmt_num(c.ground_truth_K) << "\n";
    o << "data_points = " << c.data_points << "\n";
    o << "noise_sigma = " << fmt_num(c.noise_sigma) << "\n";
    o << "data = \"" << c.data_source << "\"\n";
  }
  o << "\n[sampling]\n";
  o << "interior = " << c.interior_points << "\n";
  o << "uniform = " << (c.uniform_interior ? "true" : "false") << "\n";
  o << "per_edge = " << c.sampler.per_edge << "\n";
  o << "curve_samples = " << c.sampler.curve_samples << "\n";
  o << "band_halfwidth_mm = " << fmt_num(c.sampler.band_halfwidth * 1e3)
    << "\n";
  o << "\n[output]\n";
  o << "grid = " << c.grid << "\n";
  return o.str();
}

void validate_config(const RunConfig& c) {
  const ModelParams& p = c.params;
  if (p.thickness <= 0) bad("thickness must be positive");
  if (p.conductivity <= 0) bad("conductivity must be positive");
  if (p.emissivity < 0 || p.emissivity > 1)
    bad("emissivity must lie in [0, 1]");
  if (p.h_conv < 0) bad("h_conv must be nonnegative");
  if (p.heat_flux <= 0) bad("heat_flux must be positive");
  if (p.theta_amb <= 0) bad("ambient temperature must be absolute-positive");
  if (p.theta_in <= 0) bad("inlet temperature must be absolute-positive");
  if (p.c_f <= 0) bad("coolant specific heat must be positive");
  if (p.rho_f <= 0) bad("coolant density must be positive");
  if (p.flow_ml_min < 0) bad("flow rate must be nonnegative");
  if (c.geometry == VascKind::NoChannel && p.flow_ml_min > 0)
    bad("no channel to carry coolant; set flow_mL_min = 0");
  if (c.hidden_layers < 1) bad("hidden_layers must be at least 1");
  if (c.neurons < 1) bad("neurons must be at least 1");
  if (c.learning_rate <= 0) bad("learning_rate must be positive");
  if (c.adam_epochs < 0 || c.lbfgs_epochs < 0) bad("epochs must be >= 0");
  if (c.log_every < 1) bad("log_every must be at least 1");
  if (c.interior_points < 1) bad("interior point count must be positive");
  if (c.uniform_interior && c.interior_points < 4)
    bad("uniform interior lattices need at least 4 points");
  if (c.sampler.per_edge < 2) bad("per_edge must be at least 2");
  if (c.sampler.curve_samples < 1 && c.geometry != VascKind::NoChannel)
    bad("curve_samples must be positive with a channel");
  if (c.sampler.band_halfwidth <= 0) bad("band halfwidth must be positive");
  if (c.grid < 4) bad("output grid must be at least 4 cells per side");
  if (c.geometry == VascKind::Custom && c.custom_vertices.size() < 2)
    bad("custom geometry needs at least two points_mm vertices");
  if (c.command == Command::Inverse || c.inverse) {
    if (c.initial_K <= 0) bad("initial_K must be positive");
    if (c.ground_truth_K < 0) bad("ground_truth_K must be nonnegative");
    if (c.data_points < 1) bad("inverse runs need data_points >= 1");
    if (c.noise_sigma < 0) bad("noise_sigma must be nonnegative");
    if (c.data_source.empty()) bad("inverse runs need a data source");
  }
}

Vasculature make_vasculature(const RunConfig& c, const Domain& dom) {
  Vasculature v = c.geometry == VascKind::Custom
                      ? Vasculature::polyline(c.custom_vertices, dom)
                      : Vasculature::build(c.geometry, dom);
  return c.reverse_flow ? v.reversed() : v;
}

}  // namespace coolpinns
