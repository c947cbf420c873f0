#include "skintraj/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

namespace skintraj {

namespace {

// Per-trajectory reduction, kept instead of the full record.
struct TrajectorySummary {
  std::vector<double> times;
  std::vector<double> S_ent, S_cl, delta_n, J;
  double steady_S_ent = 0.0, steady_S_cl = 0.0, steady_delta_n = 0.0, steady_J = 0.0;
  std::vector<double> steady_density;
  std::size_t jumps = 0;
};

TrajectorySummary summarize_record(const TrajectoryRecord& rec, double window_fraction) {
  TrajectorySummary out;
  const std::size_t n = rec.snapshots.size();
  out.times.reserve(n);
  out.S_ent.reserve(n);
  out.S_cl.reserve(n);
  out.delta_n.reserve(n);
  out.J.reserve(n);
  for (const ObservableSet& o : rec.snapshots) {
    out.times.push_back(o.time);
    out.S_ent.push_back(o.S_ent);
    out.S_cl.push_back(o.S_cl);
    out.delta_n.push_back(o.delta_n);
    out.J.push_back(o.current_J);
  }
  const std::size_t w = steady_window_size(n, window_fraction);
  const std::size_t first = n - w;
  const auto window_mean = [&](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = first; i < n; ++i) s += v[i];
    return s / static_cast<double>(w);
  };
  out.steady_S_ent = window_mean(out.S_ent);
  out.steady_S_cl = window_mean(out.S_cl);
  out.steady_delta_n = window_mean(out.delta_n);
  out.steady_J = window_mean(out.J);
  out.steady_density.assign(rec.config.lattice.L, 0.0);
  for (std::size_t i = first; i < n; ++i) {
    for (std::size_t s = 0; s < out.steady_density.size(); ++s) out.steady_density[s] += rec.snapshots[i].density[s];
  }
  for (double& d : out.steady_density) d /= static_cast<double>(w);
  out.jumps = rec.jump_log.size();
  return out;
}

// Running mean / variance, fed in trajectory order.
struct Welford {
  std::vector<double> mean, m2;
  std::size_t count = 0;

  void add(const std::vector<double>& x) {
    if (count == 0) {
      mean.assign(x.size(), 0.0);
      m2.assign(x.size(), 0.0);
    }
    ++count;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - mean[i];
      mean[i] += d / static_cast<double>(count);
      m2[i] += d * (x[i] - mean[i]);
    }
  }

  SeriesStats stats() const {
    SeriesStats s;
    s.mean = mean;
    s.err.resize(mean.size(), 0.0);
    if (count > 1) {
      for (std::size_t i = 0; i < mean.size(); ++i) {
        const double var = std::max(0.0, m2[i] / static_cast<double>(count - 1));
        s.err[i] = std::sqrt(var / static_cast<double>(count));
      }
    }
    return s;
  }
};

}  // namespace

void EnsembleConfig::validate() const {
  base.validate();
  if (n_traj < 2) throw std::invalid_argument(fmt::format("n_traj must be >= 2, got {}", n_traj));
  if (!(steady_window_fraction > 0.0 && steady_window_fraction <= 1.0)) {
    throw std::invalid_argument(
        fmt::format("steady_window_fraction must lie in (0, 1], got {}", steady_window_fraction));
  }
}

std::size_t steady_window_size(std::size_t n_snapshots, double fraction) {
  if (n_snapshots == 0) return 0;
  const auto w = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n_snapshots) - 1e-9));
  return std::clamp<std::size_t>(w, 1, n_snapshots);
}

int default_worker_count() {
  if (const char* env = std::getenv("SKINTRAJ_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SteadyValue summarize(std::span<const double> values) {
  SteadyValue out;
  if (values.empty()) return out;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  out.mean = mean;
  if (values.size() > 1) out.err = std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  out.min = *lo;
  out.max = *hi;
  // Keep the mean inside [min, max] despite rounding.
  out.mean = std::clamp(out.mean, out.min, out.max);
  return out;
}

EnsembleRecord run_ensemble(const EnsembleConfig& config, int workers) {
  config.validate();
  if (workers <= 0) workers = default_worker_count();
  workers = std::min(workers, config.n_traj);

  std::vector<std::optional<TrajectorySummary>> results(config.n_traj);
  std::vector<std::exception_ptr> errors(config.n_traj);
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};

  const auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= config.n_traj || failed.load()) return;
      try {
        TrajectoryConfig tc = config.base;
        tc.trajectory_index = static_cast<std::uint64_t>(i);
        const TrajectoryRecord rec = TrajectoryEngine(std::move(tc)).run(JumpSchedule::stochastic());
        results[i] = summarize_record(rec, config.steady_window_fraction);
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  for (int i = 0; i < config.n_traj; ++i) {
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const TrajectoryError&) {
        throw;
      } catch (const std::exception& e) {
        throw TrajectoryError(static_cast<std::uint64_t>(i), -1, e.what());
      }
    }
  }

  EnsembleRecord out;
  out.config = config;
  Welford s_ent, s_cl, dn, cur, dens;
  for (int i = 0; i < config.n_traj; ++i) {
    const TrajectorySummary& t = *results[i];
    if (i == 0) out.times = t.times;
    s_ent.add(t.S_ent);
    s_cl.add(t.S_cl);
    dn.add(t.delta_n);
    cur.add(t.J);
    dens.add(t.steady_density);
    out.traj_S_ent.push_back(t.steady_S_ent);
    out.traj_S_cl.push_back(t.steady_S_cl);
    out.traj_delta_n.push_back(t.steady_delta_n);
    out.traj_J.push_back(t.steady_J);
    out.total_jumps += t.jumps;
  }
  out.S_ent = s_ent.stats();
  out.S_cl = s_cl.stats();
  out.delta_n = dn.stats();
  out.current_J = cur.stats();
  const SeriesStats d = dens.stats();
  out.density_mean = d.mean;
  out.density_err = d.err;
  out.steady_S_ent = summarize(out.traj_S_ent);
  out.steady_S_cl = summarize(out.traj_S_cl);
  out.steady_delta_n = summarize(out.traj_delta_n);
  out.steady_J = summarize(out.traj_J);
  return out;
}

}  // namespace skintraj
