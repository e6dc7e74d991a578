// Experiment driver: run configs or shipped presets, or count coarse-space sizes.

#include "bddcso/errors.hpp"
#include "bddcso/experiment.hpp"
#include "bddcso/partition.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

std::vector<int> parse_grid(std::string const& text)
{
  std::vector<int> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, 'x')) {
    try {
      grid.push_back(std::stoi(item));
    } catch (std::exception const&) {
      throw bddcso::InvalidArgument("grid must look like 10x10x10, got '" + text + "'");
    }
  }
  if (grid.size() == 1)
    grid.assign(3, grid[0]);
  return grid;
}

struct RunFlags
{
  std::optional<double> tol;
  std::optional<int> max_iters;
  std::string format = "csv";
  std::string out;
};

int execute(std::vector<bddcso::ExperimentConfig> configs, RunFlags const& flags)
{
  auto const format = bddcso::parse_report_format(flags.format);
  std::vector<bddcso::ReportRow> rows;
  bool all_converged = true;
  for (auto& c : configs) {
    if (flags.tol)
      c.tol = *flags.tol;
    if (flags.max_iters)
      c.max_iters = *flags.max_iters;
    c.validate();
    std::cerr << "running " << c.mesh_label() << " / " << c.subdomain_label() << " "
              << c.preconditioner << "(" << c.recipe << ") split " << c.split_label() << " ...\n";
    auto row = bddcso::run(c);
    if (row.solved) {
      std::cerr << "  dofs " << row.dofs << ", coarse " << row.coarse_size << ", iterations "
                << row.iterations << ", kappa " << row.kappa
                << (row.converged ? "" : " (NOT converged)") << "\n";
      if (row.path_violations > 0)
        std::cerr << "  warning: " << row.path_violations
                  << " neighbouring subsubdomain pairs lack an acceptable path\n";
      all_converged = all_converged && row.converged;
    }
    rows.push_back(std::move(row));
  }
  if (flags.out.empty())
    bddcso::emit_report(rows, format, std::cout);
  else
    bddcso::emit_report(rows, format, flags.out);
  return all_converged ? 0 : 2;
}

void add_run_flags(CLI::App* cmd, RunFlags& flags)
{
  cmd->add_option("--tol", flags.tol, "Relative residual reduction (overrides configs)");
  cmd->add_option("--max-iters", flags.max_iters, "PCG iteration cap (overrides configs)");
  cmd->add_option("--format", flags.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--out", flags.out, "Report path (default: stdout)");
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"BDDC / BDDC-SO experiments for Q1 Poisson problems"};
  app.require_subcommand(1);

  RunFlags run_flags, preset_flags;
  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run every experiment in a config file");
  run_cmd->add_option("config", config_path, "JSON config or preset file")->required();
  add_run_flags(run_cmd, run_flags);

  std::string preset_name;
  std::string preset_dir = bddcso::default_preset_dir();
  auto* preset_cmd = app.add_subcommand("preset", "Run a shipped preset (homogeneous-sweep, channels-contrast, coarse-counts, ...)");
  preset_cmd->add_option("name", preset_name, "Preset name")->required();
  preset_cmd->add_option("--preset-dir", preset_dir, "Directory holding <name>.json presets");
  add_run_flags(preset_cmd, preset_flags);

  std::string grid_text, recipe_text;
  int split = 1;
  int lh = 4;
  auto* count_cmd = app.add_subcommand("count", "Print the coarse-space size of a uniform box partition");
  count_cmd->add_option("grid", grid_text, "Subdomain grid, e.g. 10x10x10 (a single number means a cube)")->required();
  count_cmd->add_option("split", split, "Subsubdomains per subdomain and axis")->required();
  count_cmd->add_option("recipe", recipe_text, "Constraint recipe: letters from v,e,f or 'full'")->required();
  count_cmd->add_option("--lh", lh, "Cells per subsubdomain and axis (L/h)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd)
      return execute(bddcso::load_config_file(config_path), run_flags);
    if (*preset_cmd) {
      auto const path = std::filesystem::path(preset_dir) / (preset_name + ".json");
      if (!std::filesystem::exists(path))
        throw bddcso::InvalidArgument("unknown preset '" + preset_name + "' (no " + path.string() + ")");
      return execute(bddcso::load_config_file(path.string()), preset_flags);
    }
    if (*count_cmd) {
      auto const grid = parse_grid(grid_text);
      std::vector<int> lhs(grid.size(), lh);
      std::cout << bddcso::count_coarse_dofs(grid, split, bddcso::ConstraintRecipe::parse(recipe_text), lhs)
                << "\n";
      return 0;
    }
  } catch (std::exception const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
