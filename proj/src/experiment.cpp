#include "bddcso/experiment.hpp"

#include "bddcso/bddc.hpp"
#include "bddcso/errors.hpp"
#include "bddcso/partition.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace bddcso {

using nlohmann::json;

namespace {

std::vector<int> int_list(json const& j, int dim, char const* key)
{
  if (j.is_number_integer())
    return std::vector<int>(static_cast<std::size_t>(dim), j.get<int>());
  if (!j.is_array())
    throw InvalidArgument(std::string("config key '") + key + "' must be an integer or an array");
  return j.get<std::vector<int>>();
}

std::string join(std::vector<int> const& v)
{
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? "x" : "") + std::to_string(v[i]);
  return s;
}

std::string fmt6(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

template <class F>
auto in_phase(char const* phase, F&& f) -> decltype(f())
{
  try {
    return f();
  } catch (std::exception const& e) {
    throw Error(std::string("phase '") + phase + "': " + e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const
{
  if (dim != 2 && dim != 3)
    throw InvalidArgument("dim must be 2 or 3");
  if (static_cast<int>(cells.size()) != dim || static_cast<int>(subdomains.size()) != dim)
    throw InvalidArgument("cells and subdomains need " + std::to_string(dim) + " entries");
  if (split < 1)
    throw InvalidArgument("split must be positive");
  for (int d = 0; d < dim; ++d) {
    if (cells[d] < 1 || subdomains[d] < 1)
      throw InvalidArgument("cell and subdomain counts must be positive");
    if (cells[d] % subdomains[d] != 0)
      throw InvalidArgument(std::to_string(subdomains[d]) + " subdomains do not divide " +
                            std::to_string(cells[d]) + " cells along axis " + std::to_string(d));
    int const block = cells[d] / subdomains[d];
    if (preconditioner == "bddc-so" && split_mode == Split::uniform && block % split != 0)
      throw InvalidArgument("split " + std::to_string(split) + " does not divide subdomain size " +
                            std::to_string(block));
    if (coefficient == "channels" && d != channels.axis && channels.cross_section > block)
      throw InvalidArgument("channel cross-section exceeds subdomain size");
  }
  if (preconditioner != "bddc" && preconditioner != "bddc-so")
    throw InvalidArgument("preconditioner must be 'bddc' or 'bddc-so'");
  if (coefficient != "constant" && coefficient != "channels")
    throw InvalidArgument("coefficient type must be 'constant' or 'channels'");
  if (coefficient == "constant" && !(coefficient_value > 0))
    throw InvalidArgument("coefficient value must be positive");
  if (coefficient == "channels" && (channels.axis < 0 || channels.axis >= dim))
    throw InvalidArgument("channel axis out of range");
  if (mode == Mode::count && split_mode != Split::uniform)
    throw InvalidArgument("count mode needs a uniform split");
  ConstraintRecipe::parse(recipe);
  parse_weighting(weighting);
  if (!(tol > 0 && tol < 1))
    throw InvalidArgument("tol must lie in (0, 1)");
  if (max_iters < 1)
    throw InvalidArgument("max_iters must be positive");
}

std::string ExperimentConfig::mesh_label() const { return join(cells); }
std::string ExperimentConfig::subdomain_label() const { return join(subdomains); }

std::string ExperimentConfig::split_label() const
{
  if (preconditioner == "bddc")
    return "none";
  if (split_mode == Split::coefficient)
    return "coefficient";
  return "s=" + std::to_string(split);
}

ExperimentConfig config_from_json(json const& j)
{
  if (!j.is_object())
    throw InvalidArgument("config must be a JSON object");
  ExperimentConfig c;
  c.mode = j.value("mode", std::string("solve")) == "count" ? ExperimentConfig::Mode::count
                                                            : ExperimentConfig::Mode::solve;
  if (j.contains("mode") && j["mode"] != "count" && j["mode"] != "solve")
    throw InvalidArgument("mode must be 'solve' or 'count'");
  c.dim = j.value("dim", 3);
  if (j.contains("subdomains"))
    c.subdomains = int_list(j["subdomains"], c.dim, "subdomains");
  else
    c.subdomains.assign(static_cast<std::size_t>(c.dim), 2);

  if (j.contains("split")) {
    auto const& s = j["split"];
    if (s.is_string() && s == "coefficient")
      c.split_mode = ExperimentConfig::Split::coefficient;
    else if (s.is_number_integer())
      c.split = s.get<int>();
    else
      throw InvalidArgument("split must be an integer or \"coefficient\"");
  }

  if (j.contains("cells"))
    c.cells = int_list(j["cells"], c.dim, "cells");
  else if (c.mode == ExperimentConfig::Mode::count) {
    c.cells.clear();
    for (int n : c.subdomains)
      c.cells.push_back(n * c.split * j.value("lh", 4));
  } else
    c.cells.assign(static_cast<std::size_t>(c.dim), 8);

  if (j.contains("coefficient")) {
    auto const& co = j["coefficient"];
    c.coefficient = co.value("type", std::string("constant"));
    c.coefficient_value = co.value("value", 1.0);
    c.channels.exponent = co.value("exponent", 0.0);
    c.channels.cross_section = co.value("cross_section", 2);
    c.channels.axis = co.value("axis", 0);
  }
  c.preconditioner = j.value("preconditioner", c.preconditioner);
  c.recipe = j.value("recipe", c.recipe);
  c.weighting = j.value("weighting", c.weighting);
  c.source = j.value("source", c.source);
  c.tol = j.value("tol", c.tol);
  c.max_iters = j.value("max_iters", c.max_iters);
  return c;
}

json config_to_json(ExperimentConfig const& c)
{
  json j;
  j["mode"] = c.mode == ExperimentConfig::Mode::count ? "count" : "solve";
  j["dim"] = c.dim;
  j["cells"] = c.cells;
  j["subdomains"] = c.subdomains;
  if (c.split_mode == ExperimentConfig::Split::coefficient)
    j["split"] = "coefficient";
  else
    j["split"] = c.split;
  j["coefficient"] = c.coefficient == "channels"
                         ? json{{"type", "channels"},
                                {"exponent", c.channels.exponent},
                                {"cross_section", c.channels.cross_section},
                                {"axis", c.channels.axis}}
                         : json{{"type", "constant"}, {"value", c.coefficient_value}};
  j["preconditioner"] = c.preconditioner;
  j["recipe"] = c.recipe;
  j["weighting"] = c.weighting;
  j["source"] = c.source;
  j["tol"] = c.tol;
  j["max_iters"] = c.max_iters;
  return j;
}

std::vector<ExperimentConfig> load_configs(json const& j)
{
  std::vector<ExperimentConfig> out;
  if (j.is_object() && j.contains("runs")) {
    json const defaults = j.value("defaults", json::object());
    for (auto const& r : j["runs"]) {
      json merged = defaults;
      merged.merge_patch(r);
      out.push_back(config_from_json(merged));
    }
  } else {
    out.push_back(config_from_json(j));
  }
  for (auto const& c : out)
    c.validate();
  return out;
}

std::vector<ExperimentConfig> load_config_file(std::string const& path)
{
  std::ifstream in(path);
  if (!in)
    throw InvalidArgument("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (json::exception const& e) {
    throw InvalidArgument("config file '" + path + "': " + e.what());
  }
  return load_configs(j);
}

std::string default_preset_dir()
{
  return BDDCSO_PRESET_DIR;
}

// ---------------------------------------------------------------------------
// Run

ReportRow run(ExperimentConfig const& config)
{
  in_phase("config", [&] { config.validate(); });
  ReportRow row;
  row.config = config;
  auto const recipe = ConstraintRecipe::parse(config.recipe);
  bool const standard = config.preconditioner == "bddc";
  int const split = standard ? 1 : config.split;

  if (config.mode == ExperimentConfig::Mode::count) {
    std::vector<int> lh;
    row.dofs = 1;
    for (int d = 0; d < config.dim; ++d) {
      lh.push_back(config.cells[d] / (config.subdomains[d] * split));
      row.dofs *= config.cells[d] - 1;
    }
    row.coarse_size = count_coarse_dofs(config.subdomains, split, recipe, lh);
    return row;
  }

  auto const t_setup = std::chrono::steady_clock::now();
  auto mesh = in_phase("mesh", [&] { return build_mesh(config.dim, config.cells); });
  auto const coeff = in_phase("coefficient", [&] {
    return config.coefficient == "channels" ? make_channels(mesh, config.subdomains, config.channels)
                                            : make_constant(mesh, config.coefficient_value);
  });
  auto const system = in_phase("assembly", [&] { return assemble(mesh, coeff, config.source); });
  row.dofs = system.dofs.size();

  auto dec = in_phase("partition", [&] {
    auto theta = partition_uniform(mesh, config.subdomains);
    std::vector<int> theta_hat;
    if (standard)
      theta_hat = theta;
    else if (config.split_mode == ExperimentConfig::Split::coefficient)
      theta_hat = refine_by_coefficient(mesh, theta, coeff);
    else
      theta_hat = refine_uniform(mesh, theta, split);
    auto pair = make_partition_pair(mesh, std::move(theta), std::move(theta_hat));
    return make_decomposition(mesh, std::move(pair));
  });
  auto const objects = in_phase("classification", [&] {
    return classify_objects(dec.mesh, dec.partition, dec.membership);
  });
  auto const constraints = in_phase("constraints", [&] {
    return select_constraints(dec, objects, recipe, &coeff);
  });
  row.path_violations = static_cast<long>(constraints.path_violations.size());
  auto const weights = in_phase("weights", [&] {
    return compute_weights(dec, parse_weighting(config.weighting), &coeff);
  });
  auto const op = in_phase("setup", [&] { return build_bddc(dec, coeff, constraints, weights); });
  row.coarse_size = op.coarse_size();
  row.setup_seconds = seconds_since(t_setup);

  if (config.split_mode == ExperimentConfig::Split::uniform || standard) {
    std::vector<int> lh;
    for (int d = 0; d < config.dim; ++d)
      lh.push_back(config.cells[d] / (config.subdomains[d] * split));
    long const expected = count_coarse_dofs(config.subdomains, split, recipe, lh);
    if (expected != row.coarse_size)
      throw Error("phase 'report': coarse size " + std::to_string(row.coarse_size) +
                  " disagrees with the combinatorial count " + std::to_string(expected));
  }

  auto const t_solve = std::chrono::steady_clock::now();
  auto const result = in_phase("solve", [&] {
    return pcg([&](Vector const& x, Vector& y) { system.matrix.multiply(x, y); },
               [&](Vector const& x, Vector& y) { op.apply(x, y); }, system.rhs,
               PcgOptions{config.tol, config.max_iters});
  });
  row.solve_seconds = seconds_since(t_solve);
  row.solved = true;
  row.iterations = result.report.iterations;
  row.kappa = result.report.kappa_estimate;
  row.converged = result.report.converged;
  return row;
}

// ---------------------------------------------------------------------------
// Reports

ReportFormat parse_report_format(std::string const& text)
{
  if (text == "csv")
    return ReportFormat::csv;
  if (text == "json")
    return ReportFormat::json;
  throw InvalidArgument("report format must be 'csv' or 'json'");
}

void emit_report(std::vector<ReportRow> const& rows, ReportFormat format, std::ostream& out)
{
  static char const* const columns[] = {"mesh", "subdomains", "split", "precond", "recipe",
                                        "weighting", "dofs", "coarse_size", "iters", "kappa",
                                        "setup_s", "solve_s", "converged"};
  if (format == ReportFormat::csv) {
    for (std::size_t k = 0; k < std::size(columns); ++k)
      out << (k ? "," : "") << columns[k];
    out << '\n';
    for (auto const& r : rows) {
      auto const& c = r.config;
      out << c.mesh_label() << ',' << c.subdomain_label() << ',' << c.split_label() << ','
          << c.preconditioner << ',' << c.recipe << ',' << c.weighting << ',' << r.dofs << ','
          << r.coarse_size << ',';
      if (r.solved)
        out << r.iterations << ',' << fmt6(r.kappa) << ',' << fmt6(r.setup_seconds) << ','
            << fmt6(r.solve_seconds) << ',' << (r.converged ? "true" : "false");
      else
        out << ",,,,";
      out << '\n';
    }
    return;
  }

  using ojson = nlohmann::ordered_json;
  ojson arr = ojson::array();
  for (auto const& r : rows) {
    auto const& c = r.config;
    // Floats go through the same 6-significant-digit rounding as the CSV.
    auto num = [](double v) { return ojson(std::stod(fmt6(v))); };
    ojson o = ojson::object();
    o["mesh"] = c.mesh_label();
    o["subdomains"] = c.subdomain_label();
    o["split"] = c.split_label();
    o["precond"] = c.preconditioner;
    o["recipe"] = c.recipe;
    o["weighting"] = c.weighting;
    o["dofs"] = r.dofs;
    o["coarse_size"] = r.coarse_size;
    o["iters"] = r.solved ? ojson(r.iterations) : ojson(nullptr);
    o["kappa"] = r.solved ? num(r.kappa) : ojson(nullptr);
    o["setup_s"] = r.solved ? num(r.setup_seconds) : ojson(nullptr);
    o["solve_s"] = r.solved ? num(r.solve_seconds) : ojson(nullptr);
    o["converged"] = r.solved ? ojson(r.converged) : ojson(nullptr);
    arr.push_back(std::move(o));
  }
  out << arr.dump(2) << '\n';
}

void emit_report(std::vector<ReportRow> const& rows, ReportFormat format, std::string const& path)
{
  std::ofstream out(path);
  if (!out)
    throw Error("cannot write report to '" + path + "'");
  emit_report(rows, format, out);
  if (!out)
    throw Error("failed while writing report to '" + path + "'");
}

} // namespace bddcso
