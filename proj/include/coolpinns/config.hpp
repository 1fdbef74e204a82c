#pragma once

#include <coolpinns/geometry.hpp>
#include <coolpinns/physics.hpp>
#include <coolpinns/sampler.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace coolpinns {

// Minimal TOML subset: [section] headers, key = value lines, values are
// strings, booleans, integers, floats, and (nested, possibly multi-line)
// arrays. Keys flatten to "section.key". Enough for run configs, snapshots,
// and sweep files; anything fancier is rejected loudly.
struct TomlValue {
  enum class Kind { Bool, Int, Float, Str, Array };
  Kind kind = Kind::Float;
  bool b = false;
  long long i = 0;
  std::uint64_t u = 0;  // unsigned reading of an Int token (seeds)
  Scalar f = 0.0;
  std::string s;
  std::vector<TomlValue> arr;

  bool as_bool(const std::string& key) const;
  long long as_int(const std::string& key) const;
  std::uint64_t as_u64(const std::string& key) const;
  Scalar as_number(const std::string& key) const;
  const std::string& as_str(const std::string& key) const;
  const std::vector<TomlValue>& as_array(const std::string& key) const;
};

using TomlTable = std::map<std::string, TomlValue>;

TomlTable parse_toml(const std::string& text);
TomlTable parse_toml_file(const std::string& path);

enum class Command { Forward, Inverse, Oracle, VerifyMst, Sweep, Compare };
enum class Engine { Pinn, Oracle };

// One run, fully specified. Config files take boundary units (mm, Celsius,
// mL/min) and convert here; everything downstream is SI and kelvin.
struct RunConfig {
  Command command = Command::Forward;
  std::string preset;  // provenance label, empty for ad hoc configs

  VascKind geometry = VascKind::StraightCenter;
  std::vector<Vec2> custom_vertices;  // meters, Custom only
  bool reverse_flow = false;

  ModelParams params;

  int hidden_layers = 4;
  int neurons = 30;
  Scalar learning_rate = 1e-3;
  int adam_epochs = 10000;
  int lbfgs_epochs = 2000;
  int log_every = 100;
  std::uint64_t seed = 0;

  bool inverse = false;
  Scalar initial_K = 1.0;
  Scalar ground_truth_K = 2.5247;  // 0 disables percent-error reporting
  int data_points = 0;
  Scalar noise_sigma = 0.0;          // kelvin
  std::string data_source = "oracle";  // "oracle" or a stored run directory

  int interior_points = 1849;
  bool uniform_interior = true;
  SamplerOptions sampler;

  int grid = 200;  // solver cells per side; exports use the node lattice

  Engine engine = Engine::Pinn;  // flow-reversal studies
};

// Hyperparameter grid around a base config. Lists default to the base value.
struct SweepSpec {
  RunConfig base;
  std::vector<int> hidden_layers;
  std::vector<int> neurons;
  std::vector<Scalar> learning_rates;
};

const std::vector<std::string>& preset_names();
RunConfig preset_config(const std::string& name);

// Applies file keys over c; unknown keys throw ConfigError.
void apply_config_table(RunConfig& c, const TomlTable& t);
RunConfig load_config_file(const std::string& path);
SweepSpec load_sweep_file(const std::string& path);

// Full explicit dump; feeding it back through load_config_file reproduces
// the run bit for bit.
std::string snapshot_toml(const RunConfig& c);

void validate_config(const RunConfig& c);

const char* vasc_kind_name(VascKind k);
VascKind vasc_kind_from_name(const std::string& name);
const char* command_name(Command c);
Command command_from_name(const std::string& name);

Vasculature make_vasculature(const RunConfig& c, const Domain& dom);

}  // namespace coolpinns
