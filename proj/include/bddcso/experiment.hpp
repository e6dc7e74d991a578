#pragma once

/** @file experiment.hpp
    @brief Config-driven experiment runner and CSV/JSON reports.

    A config is a JSON object. A file may hold one config, or a preset of the form
    {"name": ..., "defaults": {...}, "runs": [{...}, ...]} where each run overrides
    the defaults.
*/

#include "bddcso/krylov.hpp"
#include "bddcso/problems.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace bddcso {

struct ExperimentConfig
{
  enum class Mode
  {
    solve,
    count
  };
  enum class Split
  {
    uniform,
    coefficient
  };

  Mode mode = Mode::solve;
  int dim = 3;
  std::vector<int> cells{8, 8, 8};
  std::vector<int> subdomains{2, 2, 2};
  Split split_mode = Split::uniform;
  int split = 1;
  std::string coefficient = "constant"; ///< constant | channels
  double coefficient_value = 1.0;
  ChannelSpec channels;
  std::string preconditioner = "bddc-so"; ///< bddc | bddc-so
  std::string recipe = "vef";
  std::string weighting = "cardinality";
  double source = 1.0;
  double tol = 1e-6;
  int max_iters = 2000;

  /// Throws InvalidArgument on any inconsistency; allocates nothing.
  void validate() const;

  std::string mesh_label() const;
  std::string subdomain_label() const;
  std::string split_label() const;
};

ExperimentConfig config_from_json(nlohmann::json const& j);
nlohmann::json config_to_json(ExperimentConfig const& c);

/// Expands a single config or a defaults/runs preset into run configs.
std::vector<ExperimentConfig> load_configs(nlohmann::json const& j);
std::vector<ExperimentConfig> load_config_file(std::string const& path);

/// Directory searched for `<name>.json` presets.
std::string default_preset_dir();

struct ReportRow
{
  ExperimentConfig config;
  long dofs = 0;
  long coarse_size = 0;
  bool solved = false; ///< false for count-only rows
  int iterations = 0;
  double kappa = 0.0;
  double setup_seconds = 0.0;
  double solve_seconds = 0.0;
  bool converged = false;
  long path_violations = 0;
};

/// Runs the full pipeline. Errors are rethrown as bddcso::Error naming the failing phase.
ReportRow run(ExperimentConfig const& config);

enum class ReportFormat
{
  csv,
  json
};

ReportFormat parse_report_format(std::string const& text);

void emit_report(std::vector<ReportRow> const& rows, ReportFormat format, std::ostream& out);
void emit_report(std::vector<ReportRow> const& rows, ReportFormat format, std::string const& path);

} // namespace bddcso
