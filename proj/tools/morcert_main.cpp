// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "morcert/benchmark.hpp"
#include "morcert/errors.hpp"
#include "morcert/estimators.hpp"
#include "morcert/greedy.hpp"
#include "morcert/io.hpp"
#include "morcert/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace morcert;

namespace
{

// ------------------------------------------------------------ config files

// Accepts either key=value lines grouped under a [subcommand] section or a
// JSON object with one section object per subcommand; the resolved-config
// files written after every run use the JSON form, so a recorded run
// replays directly with `--config <file>`.
class DualConfig : public CLI::ConfigBase
{
public:
  std::vector<CLI::ConfigItem> from_config(std::istream &input) const override
  {
    std::string content{std::istreambuf_iterator<char>(input), std::istreambuf_iterator<char>()};
    const size_t first = content.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || content[first] != '{')
    {
      std::istringstream ini(content);
      return CLI::ConfigBase::from_config(ini);
    }
    json j;
    try
    {
      j = json::parse(content);
    }
    catch (const json::exception &e)
    {
      throw IoError(std::string("config file: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    for (const auto &[key, value] : j.items())
    {
      if (value.is_object())
      {
        for (const auto &[name, field] : value.items())
        {
          if (field.is_object())
          {
            throw IoError("config file: section \"" + key + "." + name +
                          "\" nests deeper than one subcommand level");
          }
          items.push_back(make_item({key}, name, field));
        }
      }
      else
      {
        items.push_back(make_item({}, key, value));
      }
    }
    return items;
  }

private:
  static CLI::ConfigItem make_item(std::vector<std::string> parents, const std::string &name,
                                   const json &value)
  {
    CLI::ConfigItem item;
    item.parents = std::move(parents);
    item.name = name;
    if (value.is_array())
    {
      for (const json &el : value)
      {
        item.inputs.push_back(el.is_string() ? el.get<std::string>() : el.dump());
      }
    }
    else
    {
      item.inputs.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
    return item;
  }
};

std::string bool_text(bool b) { return b ? "true" : "false"; }

// Report directory: flag value, else $MORCERT_REPORT_DIR, else the fallback.
std::string resolve_report_dir(const std::string &flag_value, const std::string &fallback)
{
  if (!flag_value.empty())
  {
    return flag_value;
  }
  if (const char *env = std::getenv("MORCERT_REPORT_DIR"); env != nullptr && env[0] != '\0')
  {
    return env;
  }
  return fallback;
}

void write_resolved_config(const std::string &report_dir, const std::string &subcommand,
                           json options)
{
  json root;
  root[subcommand] = std::move(options);
  io::write_text_file((fs::path(report_dir) / "resolved_config.json").string(),
                      root.dump(2) + "\n");
}

json effectivity_json(const EffectivitySummary &s)
{
  json j;
  j["count"] = s.count;
  j["sentinel_count"] = s.sentinel_count;
  j["max_estimate"] = s.max_estimate;
  j["max_true_error"] = s.max_true_error;
  j["effectivity"] = std::isfinite(s.effectivity) ? json(s.effectivity) : json();
  j["ratio_q10"] = std::isnan(s.ratio_q10) ? json() : json(s.ratio_q10);
  j["ratio_q50"] = std::isnan(s.ratio_q50) ? json() : json(s.ratio_q50);
  j["ratio_q90"] = std::isnan(s.ratio_q90) ? json() : json(s.ratio_q90);
  return j;
}

void print_warnings(const std::vector<std::string> &warnings)
{
  for (const std::string &w : warnings)
  {
    std::cerr << "warning: " << w << "\n";
  }
}

// --------------------------------------------------------- shared opt sets

struct RunOpts
{
  std::string report_dir;
  Index threads = 0;
  bool deterministic = false;

  Index effective_threads() const { return deterministic ? 1 : threads; }
};

void add_run_options(CLI::App *cmd, RunOpts &o, bool with_threads = true)
{
  cmd->add_option("--report-dir", o.report_dir,
                  "Directory for reports (default: $MORCERT_REPORT_DIR, then the output dir)");
  if (with_threads)
  {
    cmd->add_option("--threads", o.threads, "Worker threads; 0 uses every core")
        ->check(CLI::NonNegativeNumber);
    cmd->add_flag("--deterministic", o.deterministic,
                  "Force single-threaded evaluation order for bit-reproducible runs");
  }
}

void add_run_json(json &j, const RunOpts &o, bool with_threads = true)
{
  j["report-dir"] = o.report_dir;
  if (with_threads)
  {
    j["threads"] = std::to_string(o.threads);
    j["deterministic"] = bool_text(o.deterministic);
  }
}

struct GreedyOpts
{
  std::string estimator = "proposed";
  double tol = 1.0e-6;
  Index max_iterations = 60;
  Index train_points = 101;
  Index train_extra_points = 0;
  std::string grid_file;
  Index probes = 10;
  double tol_rd = 0.5;
  Index dual_max_iterations = 60;
  bool realify = true;
  uint64_t seed = 0;
  std::string initial = "random";
  Index svd_cap = linalg::kSvdDimCap;
  bool track_true_error = false;
};

void add_greedy_options(CLI::App *cmd, GreedyOpts &o)
{
  cmd->add_option("--estimator", o.estimator, "standard | residual | randomized | proposed")
      ->check(CLI::IsMember({"standard", "residual", "randomized", "proposed"}));
  cmd->add_option("--tol", o.tol, "Target state-error tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iterations", o.max_iterations, "Iteration budget")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--train-points", o.train_points, "Training-grid frequency count")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--train-extra-points", o.train_extra_points,
                  "Samples per auxiliary parameter (0 pins each at its lower bound)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--grid-file", o.grid_file, "Read the training grid from a point file instead");
  cmd->add_option("--probes", o.probes, "Randomized estimator: probe count")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tol-rd", o.tol_rd, "Randomized estimator: dual-space training tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--dual-max-iterations", o.dual_max_iterations,
                  "Randomized estimator: dual-space iteration budget")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--realify,!--no-realify", o.realify,
                "Split complex snapshots into real and imaginary basis columns");
  cmd->add_option("--seed", o.seed, "Seed for the initial-sample draws");
  cmd->add_option("--initial", o.initial, "Initial-sample policy: random | endpoints")
      ->check(CLI::IsMember({"random", "endpoints"}));
  cmd->add_option("--svd-cap", o.svd_cap,
                  "Largest dimension the standard estimator may factor densely")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--track-true-error", o.track_true_error,
                "Record true errors and effectivities every iteration (full solves)");
}

void add_greedy_json(json &j, const GreedyOpts &o)
{
  j["estimator"] = o.estimator;
  j["tol"] = io::format_double(o.tol);
  j["max-iterations"] = std::to_string(o.max_iterations);
  j["train-points"] = std::to_string(o.train_points);
  j["train-extra-points"] = std::to_string(o.train_extra_points);
  j["grid-file"] = o.grid_file;
  j["probes"] = std::to_string(o.probes);
  j["tol-rd"] = io::format_double(o.tol_rd);
  j["dual-max-iterations"] = std::to_string(o.dual_max_iterations);
  j["realify"] = bool_text(o.realify);
  j["seed"] = std::to_string(o.seed);
  j["initial"] = o.initial;
  j["svd-cap"] = std::to_string(o.svd_cap);
  j["track-true-error"] = bool_text(o.track_true_error);
}

GreedyConfig make_greedy_config(const GreedyOpts &o, const RunOpts &run)
{
  GreedyConfig cfg;
  cfg.kind = estimator_kind_from_string(o.estimator);
  cfg.tol = o.tol;
  cfg.max_iterations = o.max_iterations;
  cfg.probes = o.probes;
  cfg.tol_rd = o.tol_rd;
  cfg.dual_max_iterations = o.dual_max_iterations;
  cfg.realify = o.realify;
  cfg.seed = o.seed;
  cfg.initial = initial_sample_policy_from_string(o.initial);
  cfg.svd_cap = o.svd_cap;
  cfg.threads = run.effective_threads();
  cfg.track_true_error = o.track_true_error;
  return cfg;
}

ParameterGrid make_training_grid(const GreedyOpts &o, const ParameterDomain &domain)
{
  if (!o.grid_file.empty())
  {
    return io::read_grid(o.grid_file);
  }
  std::vector<Index> extras;
  if (o.train_extra_points > 0)
  {
    extras.assign(domain.extra_ranges.size(), o.train_extra_points);
  }
  return uniform_grid(domain, o.train_points, extras);
}

void refuse_oversized_standard(const GreedyConfig &cfg, Index n)
{
  if (cfg.kind == EstimatorKind::Standard && n > cfg.svd_cap)
  {
    throw InvalidSpec("the standard estimator computes a dense SVD of the assembled operator, "
                      "and n = " +
                      std::to_string(n) + " exceeds the cap " + std::to_string(cfg.svd_cap) +
                      "; raise --svd-cap or pick the residual, randomized, or proposed estimator");
  }
}

// One greedy run plus its convergence files; shared by greedy and compare.
struct GreedyArtifacts
{
  GreedyResult result;
  double max_test_error = std::numeric_limits<double>::quiet_NaN();
  double test_effectivity = std::numeric_limits<double>::quiet_NaN();
};

void write_greedy_files(const std::string &report_dir, const std::string &stem,
                        const GreedyReport &report)
{
  io::write_text_file((fs::path(report_dir) / (stem + ".csv")).string(), io::greedy_to_csv(report));
  io::write_text_file((fs::path(report_dir) / (stem + ".json")).string(),
                      io::greedy_report_json(report));
}

// ---------------------------------------------------------------- generate

struct GenerateOpts
{
  std::string out;
  std::string family = "damped_cavity";
  Index n = 200;
  Index ports = 1;
  Index dimension = 1;
  bool lumped_mass = false;
  double f_lo = 0.0;
  double f_hi = 0.0;
  Index min_resonances = 3;
  double eta = 1.0e-2;
  double d_rel_low = 0.9;
  double d_rel_high = 1.1;
  uint64_t seed = 1;
  RunOpts run;
};

int run_generate(const GenerateOpts &o)
{
  BenchmarkSpec spec;
  spec.family = benchmark_family_from_string(o.family);
  spec.n = o.n;
  spec.p = o.ports;
  spec.dimension = static_cast<int>(o.dimension);
  spec.lumped_mass = o.lumped_mass;
  spec.f_lo = o.f_lo;
  spec.f_hi = o.f_hi;
  spec.min_resonances = o.min_resonances;
  spec.eta = o.eta;
  spec.d_rel_low = o.d_rel_low;
  spec.d_rel_high = o.d_rel_high;
  spec.seed = o.seed;

  const AffineSystem sys = generate_benchmark(spec);
  io::write_system_bundle(o.out, sys);

  const std::string report_dir = resolve_report_dir(o.run.report_dir, o.out);
  json resolved;
  resolved["out"] = o.out;
  resolved["family"] = o.family;
  resolved["n"] = std::to_string(o.n);
  resolved["ports"] = std::to_string(o.ports);
  resolved["dimension"] = std::to_string(o.dimension);
  resolved["lumped-mass"] = bool_text(o.lumped_mass);
  resolved["f-lo"] = io::format_double(o.f_lo);
  resolved["f-hi"] = io::format_double(o.f_hi);
  resolved["min-resonances"] = std::to_string(o.min_resonances);
  resolved["eta"] = io::format_double(o.eta);
  resolved["d-rel-low"] = io::format_double(o.d_rel_low);
  resolved["d-rel-high"] = io::format_double(o.d_rel_high);
  resolved["seed"] = std::to_string(o.seed);
  add_run_json(resolved, o.run, false);
  resolved["report-dir"] = report_dir;
  write_resolved_config(report_dir, "generate", resolved);

  json summary;
  summary["schema_version"] = 1;
  summary["kind"] = "generate_summary";
  summary["family"] = o.family;
  summary["dimension"] = sys.dimension();
  summary["ports"] = sys.ports();
  summary["matrix_terms"] = sys.terms().size();
  summary["rhs_terms"] = sys.rhs_terms().size();
  summary["scale"] = sys.scale();
  summary["f_min"] = sys.domain().f_min;
  summary["f_max"] = sys.domain().f_max;
  if (spec.family != BenchmarkFamily::RandomDense)
  {
    BenchmarkSpec resolved_spec = spec;
    resolved_spec.f_lo = sys.domain().f_min;
    resolved_spec.f_hi = sys.domain().f_max;
    summary["resonances_in_band"] = reference_resonances(resolved_spec).size();
  }
  io::write_text_file((fs::path(report_dir) / "generate.json").string(), summary.dump(2) + "\n");

  std::cout << "generate: " << o.family << " n=" << sys.dimension() << " p=" << sys.ports()
            << ", " << sys.terms().size() << " matrix terms, band [" << sys.domain().f_min << ", "
            << sys.domain().f_max << "] -> " << o.out << "\n";
  return 0;
}

// ------------------------------------------------------------------ greedy

struct GreedyCmdOpts
{
  std::string system;
  std::string out;
  GreedyOpts greedy;
  RunOpts run;
};

int run_greedy(const GreedyCmdOpts &o)
{
  const AffineSystem sys = io::read_system_bundle(o.system);
  const GreedyConfig cfg = make_greedy_config(o.greedy, o.run);
  refuse_oversized_standard(cfg, sys.dimension());
  const ParameterGrid grid = make_training_grid(o.greedy, sys.domain());

  const GreedyResult result = greedy_build(sys, grid, cfg);
  print_warnings(result.report.warnings);

  io::write_rom_bundle(o.out, result.rom, &result.estimator);
  const std::string report_dir = resolve_report_dir(o.run.report_dir, o.out);
  write_greedy_files(report_dir, "greedy", result.report);

  json resolved;
  resolved["system"] = o.system;
  resolved["out"] = o.out;
  add_greedy_json(resolved, o.greedy);
  add_run_json(resolved, o.run);
  resolved["report-dir"] = report_dir;
  write_resolved_config(report_dir, "greedy", resolved);

  const bool converged = result.report.reason == TerminationReason::Converged;
  std::cout << "greedy: " << to_string(result.report.reason) << " after "
            << result.report.iterations.size() << " iterations, r=" << result.rom.order()
            << ", eps_est=" << io::format_double(result.report.final_estimate) << " (offline "
            << io::format_double(result.rom.offline_seconds()) << " s) -> " << o.out << "\n";
  return converged ? 0 : 4;
}

// ------------------------------------------------------------------- sweep

struct SweepCmdOpts
{
  std::string rom;
  std::string system;
  std::string grid_file;
  Index points = 201;
  Index extra_points = 0;
  bool midpoint = false;
  std::string outputs_file;
  bool true_errors = false;
  bool no_estimator = false;
  std::string out;
  RunOpts run;
};

ParameterGrid make_eval_grid(const std::string &grid_file, Index points, Index extra_points,
                             bool midpoint, const ParameterDomain &domain)
{
  ParameterGrid grid;
  if (!grid_file.empty())
  {
    grid = io::read_grid(grid_file);
  }
  else
  {
    std::vector<Index> extras;
    if (extra_points > 0)
    {
      extras.assign(domain.extra_ranges.size(), extra_points);
    }
    grid = uniform_grid(domain, points, extras);
  }
  return midpoint ? midpoint_grid(grid) : grid;
}

int run_sweep(const SweepCmdOpts &o)
{
  const io::RomBundle bundle = io::read_rom_bundle(o.rom);
  std::optional<AffineSystem> sys;
  if (!o.system.empty())
  {
    sys.emplace(io::read_system_bundle(o.system));
  }

  SweepConfig cfg;
  cfg.threads = o.run.effective_threads();
  cfg.true_errors = o.true_errors;
  if (sys.has_value())
  {
    cfg.sys = &*sys;
  }
  if (bundle.has_estimator && !o.no_estimator)
  {
    cfg.estimator = &bundle.estimator;
  }
  if (!o.outputs_file.empty())
  {
    cfg.outputs = io::read_matrix(o.outputs_file).to_dense();
  }

  const ParameterGrid grid =
      make_eval_grid(o.grid_file, o.points, o.extra_points, o.midpoint, bundle.rom.domain());
  const SweepResult result = sweep(bundle.rom, grid, cfg);
  print_warnings(result.warnings);

  const std::string report_dir = resolve_report_dir(o.run.report_dir, ".");
  const std::string csv_path =
      o.out.empty() ? (fs::path(report_dir) / "sweep.csv").string() : o.out;
  io::write_text_file(csv_path, io::sweep_to_csv(result));

  json summary;
  summary["schema_version"] = 1;
  summary["kind"] = "sweep_summary";
  summary["points"] = grid.points.size();
  summary["ports"] = result.ports;
  summary["outputs"] = result.output_count;
  summary["offline_seconds"] = result.offline_seconds;
  summary["online_seconds"] = result.online_seconds;
  summary["warnings"] = result.warnings.size();
  if (o.true_errors && cfg.estimator != nullptr)
  {
    summary["effectivity"] = effectivity_json(effectivity_table(result));
  }
  io::write_text_file((fs::path(report_dir) / "sweep.json").string(), summary.dump(2) + "\n");

  json resolved;
  resolved["rom"] = o.rom;
  resolved["system"] = o.system;
  resolved["grid-file"] = o.grid_file;
  resolved["points"] = std::to_string(o.points);
  resolved["extra-points"] = std::to_string(o.extra_points);
  resolved["midpoint"] = bool_text(o.midpoint);
  resolved["outputs"] = o.outputs_file;
  resolved["true-errors"] = bool_text(o.true_errors);
  resolved["no-estimator"] = bool_text(o.no_estimator);
  resolved["out"] = csv_path;
  add_run_json(resolved, o.run);
  resolved["report-dir"] = report_dir;
  write_resolved_config(report_dir, "sweep", resolved);

  std::cout << "sweep: " << grid.points.size() << " points x " << result.ports
            << " ports in " << io::format_double(result.online_seconds) << " s online -> "
            << csv_path << "\n";
  return 0;
}

// ---------------------------------------------------------------- validate

struct ValidateCmdOpts
{
  std::string rom;
  std::string system;
  std::string grid_file;
  Index points = 101;
  Index extra_points = 0;
  RunOpts run;
};

int run_validate(const ValidateCmdOpts &o)
{
  const io::RomBundle bundle = io::read_rom_bundle(o.rom);
  const AffineSystem sys = io::read_system_bundle(o.system);

  // Held out by construction: midpoints of the uniform training lattice.
  const ParameterGrid grid =
      make_eval_grid(o.grid_file, o.points, o.extra_points, o.grid_file.empty(),
                     bundle.rom.domain());

  SweepConfig cfg;
  cfg.threads = o.run.effective_threads();
  cfg.sys = &sys;
  cfg.true_errors = true;
  if (bundle.has_estimator)
  {
    cfg.estimator = &bundle.estimator;
  }
  const SweepResult result = sweep(bundle.rom, grid, cfg);
  print_warnings(result.warnings);

  const std::string report_dir = resolve_report_dir(o.run.report_dir, ".");
  io::write_text_file((fs::path(report_dir) / "validate.csv").string(), io::sweep_to_csv(result));

  double max_true = 0.0;
  for (const SweepRow &row : result.rows)
  {
    if (row.solved && std::isfinite(row.true_error))
    {
      max_true = std::max(max_true, row.true_error);
    }
  }

  json summary;
  summary["schema_version"] = 1;
  summary["kind"] = "validate_summary";
  summary["points"] = grid.points.size();
  summary["ports"] = result.ports;
  summary["max_true_error"] = max_true;
  if (cfg.estimator != nullptr)
  {
    summary["effectivity"] = effectivity_json(effectivity_table(result));
  }
  io::write_text_file((fs::path(report_dir) / "validate.json").string(), summary.dump(2) + "\n");

  json resolved;
  resolved["rom"] = o.rom;
  resolved["system"] = o.system;
  resolved["grid-file"] = o.grid_file;
  resolved["points"] = std::to_string(o.points);
  resolved["extra-points"] = std::to_string(o.extra_points);
  add_run_json(resolved, o.run);
  resolved["report-dir"] = report_dir;
  write_resolved_config(report_dir, "validate", resolved);

  std::cout << "validate: max true error " << io::format_double(max_true) << " over "
            << grid.points.size() << " held-out points -> " << report_dir << "/validate.csv\n";
  return 0;
}

// ----------------------------------------------------------------- compare

struct CompareCmdOpts
{
  std::string system;
  GreedyOpts greedy;
  Index test_points = 101;
  RunOpts run;
};

struct CompareRowOut
{
  std::string estimator;
  bool skipped = false;
  std::string note;
  GreedyArtifacts art;
};

int run_compare(const CompareCmdOpts &o)
{
  const AffineSystem sys = io::read_system_bundle(o.system);
  const std::string report_dir = resolve_report_dir(o.run.report_dir, ".");
  const ParameterGrid train = make_training_grid(o.greedy, sys.domain());
  const ParameterGrid test =
      midpoint_grid(o.greedy.grid_file.empty()
                        ? uniform_grid(sys.domain(), o.test_points,
                                       o.greedy.train_extra_points > 0
                                           ? std::vector<Index>(sys.domain().extra_ranges.size(),
                                                                o.greedy.train_extra_points)
                                           : std::vector<Index>{})
                        : train);

  const EstimatorKind kinds[] = {EstimatorKind::Standard, EstimatorKind::Residual,
                                 EstimatorKind::Randomized, EstimatorKind::Proposed};
  std::vector<CompareRowOut> rows;
  for (const EstimatorKind kind : kinds)
  {
    CompareRowOut row;
    row.estimator = to_string(kind);
    GreedyConfig cfg = make_greedy_config(o.greedy, o.run);
    cfg.kind = kind;
    if (kind == EstimatorKind::Standard && sys.dimension() > cfg.svd_cap)
    {
      row.skipped = true;
      row.note = "n = " + std::to_string(sys.dimension()) + " exceeds the SVD cap " +
                 std::to_string(cfg.svd_cap);
      rows.push_back(std::move(row));
      continue;
    }
    row.art.result = greedy_build(sys, train, cfg);
    print_warnings(row.art.result.report.warnings);
    write_greedy_files(report_dir, std::string("greedy_") + row.estimator,
                       row.art.result.report);

    SweepConfig scfg;
    scfg.threads = o.run.effective_threads();
    scfg.sys = &sys;
    scfg.true_errors = true;
    scfg.estimator = &row.art.result.estimator;
    const SweepResult res = sweep(row.art.result.rom, test, scfg);
    const EffectivitySummary eff = effectivity_table(res);
    row.art.max_test_error = eff.max_true_error;
    row.art.test_effectivity = eff.effectivity;
    rows.push_back(std::move(row));
  }

  // Summary table, one estimator per line.
  std::ostringstream csv;
  csv << "estimator,skipped,final_dimension,error_basis_dimension,iterations,reason,"
         "final_estimate,offline_seconds,dual_seconds,max_test_error,test_effectivity,note\n";
  for (const CompareRowOut &row : rows)
  {
    if (row.skipped)
    {
      csv << row.estimator << ",1,,,,,,,,,," << row.note << "\n";
      continue;
    }
    const GreedyReport &rep = row.art.result.report;
    const Index err_dim =
        rep.iterations.empty() ? 0 : rep.iterations.back().error_basis_size;
    csv << row.estimator << ",0," << row.art.result.rom.order() << ',' << err_dim << ','
        << rep.iterations.size() << ',' << to_string(rep.reason) << ','
        << io::format_double(rep.final_estimate) << ','
        << io::format_double(row.art.result.rom.offline_seconds()) << ','
        << io::format_double(rep.dual_seconds) << ','
        << io::format_double(row.art.max_test_error) << ','
        << io::format_double(row.art.test_effectivity) << ",\n";
  }
  io::write_text_file((fs::path(report_dir) / "compare.csv").string(), csv.str());

  json summary;
  summary["schema_version"] = 1;
  summary["kind"] = "compare_summary";
  summary["train_points"] = train.points.size();
  summary["test_points"] = test.points.size();
  json jrows = json::array();
  const CompareRowOut *proposed = nullptr;
  const CompareRowOut *residual = nullptr;
  for (const CompareRowOut &row : rows)
  {
    json jr;
    jr["estimator"] = row.estimator;
    jr["skipped"] = row.skipped;
    if (row.skipped)
    {
      jr["note"] = row.note;
    }
    else
    {
      const GreedyReport &rep = row.art.result.report;
      jr["final_dimension"] = row.art.result.rom.order();
      jr["error_basis_dimension"] =
          rep.iterations.empty() ? 0 : rep.iterations.back().error_basis_size;
      jr["iterations"] = rep.iterations.size();
      jr["reason"] = to_string(rep.reason);
      jr["final_estimate"] = rep.final_estimate;
      jr["offline_seconds"] = row.art.result.rom.offline_seconds();
      jr["dual_seconds"] = rep.dual_seconds;
      jr["max_test_error"] = row.art.max_test_error;
      jr["test_effectivity"] = std::isfinite(row.art.test_effectivity)
                                   ? json(row.art.test_effectivity)
                                   : json();
      if (row.estimator == "proposed")
      {
        proposed = &row;
      }
      if (row.estimator == "residual")
      {
        residual = &row;
      }
    }
    jrows.push_back(std::move(jr));
  }
  summary["rows"] = std::move(jrows);
  if (proposed != nullptr && residual != nullptr)
  {
    const Index rp = proposed->art.result.rom.order();
    const Index rr = residual->art.result.rom.order();
    json trend;
    trend["proposed_dimension"] = rp;
    trend["residual_dimension"] = rr;
    trend["ok"] = rp <= rr;
    if (rp > rr)
    {
      trend["note"] = "trend violation: proposed r=" + std::to_string(rp) +
                      " > residual r=" + std::to_string(rr);
    }
    summary["proposed_vs_residual"] = std::move(trend);
  }
  io::write_text_file((fs::path(report_dir) / "compare.json").string(), summary.dump(2) + "\n");

  json resolved;
  resolved["system"] = o.system;
  add_greedy_json(resolved, o.greedy);
  resolved["test-points"] = std::to_string(o.test_points);
  add_run_json(resolved, o.run);
  resolved["report-dir"] = report_dir;
  write_resolved_config(report_dir, "compare", resolved);

  std::cout << "compare: estimator  r   err_dim  iters  reason          max_test_error\n";
  for (const CompareRowOut &row : rows)
  {
    char line[160];
    if (row.skipped)
    {
      std::snprintf(line, sizeof(line), "compare: %-10s skipped (%s)", row.estimator.c_str(),
                    row.note.c_str());
    }
    else
    {
      const GreedyReport &rep = row.art.result.report;
      std::snprintf(line, sizeof(line), "compare: %-10s %-3lld %-8lld %-6zu %-15s %.3e",
                    row.estimator.c_str(),
                    static_cast<long long>(row.art.result.rom.order()),
                    static_cast<long long>(rep.iterations.empty()
                                               ? 0
                                               : rep.iterations.back().error_basis_size),
                    rep.iterations.size(), to_string(rep.reason), row.art.max_test_error);
    }
    std::cout << line << "\n";
  }
  return 0;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Certified greedy reduced-basis construction for affinely parametric "
               "complex linear systems"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<DualConfig>());
  app.set_config("--config", "",
                 "Options file: INI sections or a JSON object keyed by subcommand");
  app.allow_config_extras(CLI::config_extras_mode::error);

  GenerateOpts gen;
  CLI::App *generate = app.add_subcommand("generate", "Write a benchmark system bundle");
  generate->fallthrough();
  generate->add_option("--out", gen.out, "Bundle directory to create")->required();
  generate->add_option("--family", gen.family,
                       "resonant_cavity | damped_cavity | three_param_dielectric | random_dense")
      ->check(CLI::IsMember(
          {"resonant_cavity", "damped_cavity", "three_param_dielectric", "random_dense"}));
  generate->add_option("--n", gen.n, "State dimension")->check(CLI::PositiveNumber);
  generate->add_option("--ports", gen.ports, "Drive columns")->check(CLI::PositiveNumber);
  generate->add_option("--dimension", gen.dimension, "Cavity spatial dimension (1 or 2)")
      ->check(CLI::Range(static_cast<Index>(1), static_cast<Index>(2)));
  generate->add_flag("--lumped-mass", gen.lumped_mass, "Use the identity mass matrix");
  generate->add_option("--f-lo", gen.f_lo, "Band lower edge (0 = place automatically)");
  generate->add_option("--f-hi", gen.f_hi, "Band upper edge (0 = place automatically)");
  generate->add_option("--min-resonances", gen.min_resonances,
                       "Resonances the automatic band must cover")
      ->check(CLI::PositiveNumber);
  generate->add_option("--eta", gen.eta, "Boundary damping coefficient");
  generate->add_option("--d-rel-low", gen.d_rel_low, "Dielectric ratio range lower bound");
  generate->add_option("--d-rel-high", gen.d_rel_high, "Dielectric ratio range upper bound");
  generate->add_option("--seed", gen.seed, "Generator seed");
  add_run_options(generate, gen.run, false);

  GreedyCmdOpts gr;
  CLI::App *greedy = app.add_subcommand("greedy", "Build a certified reduced model");
  greedy->fallthrough();
  greedy->add_option("--system", gr.system, "System bundle directory")->required();
  greedy->add_option("--out", gr.out, "Reduced-model bundle directory to create")->required();
  add_greedy_options(greedy, gr.greedy);
  add_run_options(greedy, gr.run);

  SweepCmdOpts sw;
  CLI::App *sweep_cmd = app.add_subcommand("sweep", "Evaluate a reduced model over a grid");
  sweep_cmd->fallthrough();
  sweep_cmd->add_option("--rom", sw.rom, "Reduced-model bundle directory")->required();
  sweep_cmd->add_option("--system", sw.system,
                        "System bundle (needed for true errors or offline-only estimators)");
  sweep_cmd->add_option("--grid-file", sw.grid_file, "Read the evaluation grid from a point file");
  sweep_cmd->add_option("--points", sw.points, "Uniform frequency count")
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--extra-points", sw.extra_points,
                        "Samples per auxiliary parameter (0 pins each at its lower bound)")
      ->check(CLI::NonNegativeNumber);
  sweep_cmd->add_flag("--midpoint", sw.midpoint, "Evaluate at consecutive-pair midpoints");
  sweep_cmd->add_option("--outputs", sw.outputs_file,
                        "Matrix Market file with an output functional (q x n)");
  sweep_cmd->add_flag("--true-errors", sw.true_errors,
                      "Solve the full model per point and record true errors");
  sweep_cmd->add_flag("--no-estimator", sw.no_estimator, "Skip the bundled estimator");
  sweep_cmd->add_option("--out", sw.out, "CSV path (default <report-dir>/sweep.csv)");
  add_run_options(sweep_cmd, sw.run);

  ValidateCmdOpts va;
  CLI::App *validate = app.add_subcommand(
      "validate", "Check a reduced model against full solves on a held-out grid");
  validate->fallthrough();
  validate->add_option("--rom", va.rom, "Reduced-model bundle directory")->required();
  validate->add_option("--system", va.system, "System bundle directory")->required();
  validate->add_option("--grid-file", va.grid_file, "Read the held-out grid from a point file");
  validate->add_option("--points", va.points,
                       "Uniform lattice size whose midpoints form the held-out grid")
      ->check(CLI::PositiveNumber);
  validate->add_option("--extra-points", va.extra_points,
                       "Samples per auxiliary parameter (0 pins each at its lower bound)")
      ->check(CLI::NonNegativeNumber);
  add_run_options(validate, va.run);

  CompareCmdOpts cmp;
  CLI::App *compare = app.add_subcommand(
      "compare", "Run every estimator's greedy loop on one system and tabulate the results");
  compare->fallthrough();
  compare->add_option("--system", cmp.system, "System bundle directory")->required();
  add_greedy_options(compare, cmp.greedy);
  compare->add_option("--test-points", cmp.test_points,
                      "Uniform lattice size whose midpoints form the held-out test grid")
      ->check(CLI::PositiveNumber);
  add_run_options(compare, cmp.run);

  int code = 0;
  generate->callback([&] { code = run_generate(gen); });
  greedy->callback([&] { code = run_greedy(gr); });
  sweep_cmd->callback([&] { code = run_sweep(sw); });
  validate->callback([&] { code = run_validate(va); });
  compare->callback([&] { code = run_compare(cmp); });

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    return app.exit(e);
  }
  catch (const InvalidSpec &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  catch (const IoError &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  catch (const Error &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  }
  return code;
}
