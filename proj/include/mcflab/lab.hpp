#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mcflab/flow.hpp"
#include "mcflab/geometry.hpp"

namespace mcflab {

enum class ScenarioKind { sphere, perturbed_sphere, ellipsoid, dumbbell };
const char* to_string(ScenarioKind k);
ScenarioKind scenario_kind_from_string(const std::string& s);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::sphere;
  Backend backend = Backend::axi;
  int n = 2;
  double radius = 1.0;
  int mode = 2;            // perturbed_sphere: l
  double amplitude = 0.05; // perturbed_sphere: delta
  double a = 2.0, b = 1.0, c = 1.0;  // ellipsoid semi-axes
  double neck_radius = 0.2;
  double bulb_radius = 1.0;
  double bulb_separation = 3.0;
  int resolution = 512;
  std::uint64_t seed = 0;

  bool operator==(const ScenarioSpec&) const = default;
};

void validate_scenario(const ScenarioSpec& spec);
Hypersurface build_scenario(const ScenarioSpec& spec);

struct ChecksConfig {
  double monotone_rel_slack = 1e-3;   // per step, relative
  double monotone_abs_floor = 1e-12;
  double area_rate_tol = 0.05;
  double area_rate_dt = 1e-3;         // dt resolved for the area identity
  double kato_slack = 10.0;           // coefficient of h^2 max|grad Ao|
  double gradient_pinch_slack = 0.1;
  double identity_tol = 1e-10;        // |A|^2 >= H^2/n, relative
  double typeI_factor = 3.0;
  double typeII_growth = 10.0;
  double h_blowup_slope = 0.5;
  double h_bounded_slope = 0.1;
  int battery_resolution = 512;       // axi battery
  int battery_mesh_resolution = 2000; // mesh battery (target vertex count)

  bool operator==(const ChecksConfig&) const = default;
};

struct LabConfig {
  ScenarioSpec scenario;
  FlowConfig flow;
  ChecksConfig checks;
};

bool flow_config_equal(const FlowConfig& a, const FlowConfig& b);
bool operator==(const LabConfig& a, const LabConfig& b);

/// "key = value" lines under [scenario], [flow], [checks]; '#' starts a comment.
LabConfig parse_config_text(const std::string& text);
LabConfig parse_config(const std::filesystem::path& path);
/// Applies one key without validating the rest; unknown keys are parse errors.
void set_config_value(LabConfig& config, const std::string& section, const std::string& key,
                      const std::string& value);
void validate_config(const LabConfig& config);
/// Canonical text form; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const LabConfig& config);
/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const LabConfig& config);

/// Exit codes: 0 clean, 2 monitored invariant violated, 1 error.
struct CommandOptions {
  bool quiet = false;
  bool seed_set = false;
  std::uint64_t seed = 0;
};

int cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
            const CommandOptions& opts, std::ostream& log);
int cmd_run(const LabConfig& config, const std::filesystem::path& out_dir, const CommandOptions& opts,
            std::ostream& log);

int cmd_sweep(const std::filesystem::path& config_path, const std::string& sweep_key,
              const std::vector<double>& values, const std::filesystem::path& out_dir, const CommandOptions& opts,
              std::ostream& log);

int cmd_check(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
              const CommandOptions& opts, std::ostream& log);
int cmd_check(const LabConfig& config, const std::filesystem::path& out_dir, const CommandOptions& opts,
              std::ostream& log);

/// format: obj | profile-csv
int cmd_export(const std::filesystem::path& run_dir, const std::string& format, std::ostream& log);

/// Snapshot file formats shared by cmd_run and cmd_export.
void write_profile_csv(std::ostream& os, const AxiProfileSurface& p);
void write_obj(std::ostream& os, const Hypersurface& surface, int angular_samples = 64);
Hypersurface read_snapshot(const std::filesystem::path& path, Backend backend, int n);

}  // namespace mcflab
