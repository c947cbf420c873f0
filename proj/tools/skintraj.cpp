// skintraj: command-line driver for monitored free-fermion chains with
// feedback jumps.
//
//   skintraj <subcommand> [--config FILE] [--out DIR] [--format csv|json]
//            [--workers N] [key=value ...]
//
// key=value overrides take precedence over the config file. Exit status:
// 0 success, 1 invalid configuration, 2 runtime failure, 3 oracle mismatch.

#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "skintraj/config.hpp"
#include "skintraj/ed_oracle.hpp"
#include "skintraj/ensemble.hpp"
#include "skintraj/lattice.hpp"
#include "skintraj/output.hpp"
#include "skintraj/sweep.hpp"
#include "skintraj/trajectory.hpp"

namespace fs = std::filesystem;
using namespace skintraj;

namespace {

enum Exit : int { kOk = 0, kInvalid = 1, kRuntime = 2, kMismatch = 3 };

// Bad input data (as opposed to a bad config key) still counts as a
// validation failure.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void warn_pseudo_skin(const RunSpec& spec) {
  for (double g : spec.gamma) {
    for (double dt : spec.dt) {
      if (g * dt > kWarnGammaDt) {
        fmt::print(stderr,
                   "warning: gamma*dt = {:g} > {:g} (gamma = {:g}, dt = {:g}); coarse steps can produce a "
                   "spurious boundary accumulation (pseudo skin effect)\n",
                   g * dt, kWarnGammaDt, g, dt);
      }
    }
  }
}

int run_spectrum(const RunSpec& spec, const fs::path& out) {
  std::vector<io::SpectrumBlock> blocks;
  for (int L : spec.L)
    for (double p : spec.p)
      for (double g : spec.gamma)
        for (Boundary bc : spec.bc) {
          LatticeParams params{.L = L, .p = p, .t = spec.t, .gamma = g, .theta = spec.theta.front(), .bc = bc};
          params.validate();
          blocks.push_back({spectrum(build_h_eff(params, spec.drop_dissipation), bc), params});
        }
  if (spec.format == OutputFormat::Json) {
    io::write_file(out / "spectrum.json", io::spectrum_json(blocks));
  } else {
    io::write_file(out / "spectrum.csv", io::spectrum_csv(blocks));
  }
  return kOk;
}

int run_single_trajectory(const RunSpec& spec, const fs::path& out) {
  const TrajectoryRecord record = run_trajectory(spec.trajectory_config());
  const std::string echo = spec.echo();
  io::write_file(out / "observables.csv", io::observables_csv(record));
  if (spec.record_density) io::write_file(out / "density.csv", io::density_csv(record));
  if (spec.format == OutputFormat::Json) {
    io::write_file(out / "trajectory.json", io::trajectory_full_json(record, echo));
  } else {
    io::write_file(out / "trajectory.json", io::trajectory_json(record, echo));
  }
  fmt::print("trajectory: {} snapshots, {} jumps\n", record.snapshots.size(), record.jump_log.size());
  return kOk;
}

int run_single_ensemble(const RunSpec& spec, const fs::path& out, int workers) {
  const EnsembleRecord record = run_ensemble(spec.ensemble_config(spec.trajectory_config()), workers);
  write_ensemble_outputs(record, spec, out);
  fmt::print("ensemble: n_traj={} S_ent={:.6g}±{:.2g} S_cl={:.6g}±{:.2g} delta_n={:.6g}±{:.2g} J={:.6g}±{:.2g}\n",
             spec.n_traj, record.steady_S_ent.mean, record.steady_S_ent.err, record.steady_S_cl.mean,
             record.steady_S_cl.err, record.steady_delta_n.mean, record.steady_delta_n.err, record.steady_J.mean,
             record.steady_J.err);
  return kOk;
}

int run_grid(const RunSpec& spec, const fs::path& out, int workers) {
  const auto total = grid_points(spec).size();
  const SweepSummary summary = run_sweep(spec, out, workers, [&](const GridPoint& g) {
    fmt::print(stderr, "sweep: point {}/{}\n", g.index + 1, total);
  });
  fmt::print("sweep: {} computed, {} skipped, {} failed\n", summary.computed, summary.skipped, summary.failed);
  for (const ManifestRow& r : summary.rows) {
    if (r.status == "failed") fmt::print(stderr, "sweep: point {} failed: {}\n", r.index, r.message);
  }
  return summary.failed == 0 ? kOk : kRuntime;
}

int run_collapse(const RunSpec& spec, const fs::path& out) {
  std::vector<CollapsePoint> points;
  CollapseResult result;
  try {
    points = io::parse_collapse_points(io::read_file(spec.input));
    result = collapse_scan(points);
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
  io::write_file(out / "collapse.csv", io::collapse_csv(result));
  io::write_file(out / "fit.json", io::fit_json(result));
  if (result.tail) {
    fmt::print("collapse: tail slope {:.4f} ± {:.4f} over gamma*L in [{:g}, {:g}], c = {:.4g}\n",
               result.tail->loglog.slope, result.tail->loglog.slope_err, result.tail->x_min, result.tail->x_max,
               result.tail->c);
  } else {
    fmt::print("collapse: tail fit refused: {}\n", result.refusal);
  }
  return kOk;
}

int run_oracle_check(const RunSpec& spec, const fs::path& out) {
  const ed::OracleDeviation d = ed::oracle_check(spec.trajectory_config());
  const std::string report = fmt::format(
      "steps_compared={}\njumps_replayed={}\nG={:.3e}\nS_ent={:.3e}\nS_cl={:.3e}\ndelta_n={:.3e}\nJ={:.3e}\n"
      "max={:.3e}\ntolerance={:.3e}\n",
      d.steps_compared, d.jumps_replayed, d.G, d.S_ent, d.S_cl, d.delta_n, d.J, d.max(), spec.tolerance);
  fmt::print("{}", report);
  io::write_file(out / "oracle_check.txt", report);
  if (!(d.max() <= spec.tolerance)) {
    fmt::print(stderr, "oracle-check: deviation {:.3e} exceeds tolerance {:.3e}\n", d.max(), spec.tolerance);
    return kMismatch;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-trajectory simulator for monitored free-fermion chains with feedback"};
  app.require_subcommand(1);

  std::string config_file;
  std::string out_dir;
  std::string format;
  int workers = 0;
  std::vector<std::string> assignments;

  const std::pair<Subcommand, const char*> commands[] = {
      {Subcommand::Spectrum, "single-particle spectrum of the effective Hamiltonian"},
      {Subcommand::Trajectory, "one monitored trajectory with its jump log"},
      {Subcommand::Ensemble, "trajectory ensemble with steady-state averages"},
      {Subcommand::Sweep, "resumable ensemble grid over list-valued parameters"},
      {Subcommand::Collapse, "finite-size collapse and tail fit from a sweep table"},
      {Subcommand::OracleCheck, "replay a trajectory through exact diagonalisation"},
  };
  for (const auto& [cmd, about] : commands) {
    CLI::App* sub = app.add_subcommand(std::string(to_string(cmd)), about);
    sub->add_option("--config,-c", config_file, "key=value config file")->check(CLI::ExistingFile);
    sub->add_option("--out,-o", out_dir, "output directory (overrides output_dir)");
    sub->add_option("--format,-f", format, "csv or json (overrides format)")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--workers,-j", workers, "worker threads (default: SKINTRAJ_WORKERS or all cores)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("overrides", assignments, "key=value overrides");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();

  RunSpec spec;
  try {
    ConfigEntries overrides;
    for (const std::string& a : assignments) {
      const auto eq = a.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError(a, 0, "expected key=value");
      overrides[a.substr(0, eq)] = {a.substr(eq + 1), 0};
    }
    if (!out_dir.empty()) overrides["output_dir"] = {out_dir, 0};
    if (!format.empty()) overrides["format"] = {format, 0};
    overrides["subcommand"] = {subcommand, 0};
    spec = parse_config(config_file.empty() ? std::string() : io::read_file(config_file), overrides);
  } catch (const ConfigError& e) {
    if (e.line() > 0) {
      fmt::print(stderr, "config error: {}:{}: {}: {}\n", config_file, e.line(), e.key(), e.what());
    } else {
      fmt::print(stderr, "config error: {}: {}\n", e.key(), e.what());
    }
    return kInvalid;
  } catch (const std::exception& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kInvalid;
  }

  if (spec.subcommand != Subcommand::Spectrum && spec.subcommand != Subcommand::Collapse) warn_pseudo_skin(spec);
  if (workers == 0) workers = default_worker_count();

  const fs::path out = spec.output_dir;
  try {
    fs::create_directories(out);
    if (spec.subcommand != Subcommand::Sweep) io::write_file(out / "config.txt", spec.echo());
    switch (spec.subcommand) {
      case Subcommand::Spectrum: return run_spectrum(spec, out);
      case Subcommand::Trajectory: return run_single_trajectory(spec, out);
      case Subcommand::Ensemble: return run_single_ensemble(spec, out, workers);
      case Subcommand::Sweep: return run_grid(spec, out, workers);
      case Subcommand::Collapse: return run_collapse(spec, out);
      case Subcommand::OracleCheck: return run_oracle_check(spec, out);
    }
  } catch (const InputError& e) {
    fmt::print(stderr, "input error: {}\n", e.what());
    return kInvalid;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "invalid parameters: {}\n", e.what());
    return kInvalid;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kRuntime;
  }
  return kRuntime;
}
