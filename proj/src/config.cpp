#include "skintraj/config.hpp"

#include "skintraj/ed_oracle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace skintraj {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "subcommand", "L",      "p",        "t",           "gamma",          "theta",
      "dt",         "bc",     "t_max",    "initial",     "seed",           "trajectory_index",
      "record_every", "record_density", "n_traj", "steady_window_fraction", "drop_dissipation",
      "input",      "tolerance", "output_dir", "format"};
  return keys;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    out.emplace_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string fmt_double(double x) { return fmt::format("{:.17g}", x); }

double to_double(std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) throw std::invalid_argument(fmt::format("'{}' is not a number", text));
  return v;
}

template <typename Int>
Int to_integer(std::string_view text) {
  Int v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) throw std::invalid_argument(fmt::format("'{}' is not an integer", text));
  return v;
}

bool to_bool(std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw std::invalid_argument(fmt::format("'{}' is not a boolean", text));
}

// Holds merged entries and converts them with key-aware errors.
class Reader {
 public:
  explicit Reader(ConfigEntries entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  int line(const std::string& key) const { return has(key) ? entries_.at(key).line : 0; }

  template <typename F>
  auto convert(const std::string& key, F&& f) const {
    const ConfigEntry& e = entries_.at(key);
    try {
      return f(std::string_view(e.value));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& ex) {
      throw ConfigError(key, e.line, ex.what());
    }
  }

  template <typename T, typename F>
  void read(const std::string& key, T& target, F&& f) const {
    if (has(key)) target = convert(key, f);
  }

  template <typename T, typename F>
  void read_list(const std::string& key, std::vector<T>& target, F&& f) const {
    if (!has(key)) return;
    target = convert(key, [&](std::string_view v) {
      std::vector<T> out;
      for (const std::string& item : split_list(v)) out.push_back(f(std::string_view(item)));
      if (out.empty()) throw std::invalid_argument("empty list");
      return out;
    });
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    throw ConfigError(key, line(key), message);
  }

 private:
  ConfigEntries entries_;
};

}  // namespace

std::string_view to_string(Subcommand cmd) {
  switch (cmd) {
    case Subcommand::Spectrum: return "spectrum";
    case Subcommand::Trajectory: return "trajectory";
    case Subcommand::Ensemble: return "ensemble";
    case Subcommand::Sweep: return "sweep";
    case Subcommand::Collapse: return "collapse";
    case Subcommand::OracleCheck: return "oracle-check";
  }
  return "?";
}

Subcommand parse_subcommand(std::string_view text) {
  for (Subcommand c : {Subcommand::Spectrum, Subcommand::Trajectory, Subcommand::Ensemble, Subcommand::Sweep,
                       Subcommand::Collapse, Subcommand::OracleCheck}) {
    if (to_string(c) == text) return c;
  }
  throw std::invalid_argument(fmt::format("unknown subcommand '{}'", text));
}

ConfigError::ConfigError(std::string key, int line, const std::string& message)
    : std::invalid_argument(line > 0 ? fmt::format("{} (line {}): {}", key, line, message)
                                     : fmt::format("{}: {}", key, message)),
      key_(std::move(key)),
      line_(line) {}

ConfigEntries parse_entries(std::string_view text) {
  ConfigEntries out;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(line), line_no, "expected key=value");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("", line_no, "empty key");
    if (out.count(key)) throw ConfigError(key, line_no, "duplicate key");
    out.emplace(std::move(key), ConfigEntry{std::move(value), line_no});
  }
  return out;
}

double parse_angle(std::string_view text) {
  text = trim(text);
  const auto pi_pos = text.find("pi");
  if (pi_pos == std::string_view::npos) return to_double(text);
  double factor = 1.0;
  std::string_view before = trim(text.substr(0, pi_pos));
  std::string_view after = trim(text.substr(pi_pos + 2));
  if (!before.empty()) {
    if (before.back() != '*') throw std::invalid_argument(fmt::format("cannot parse angle '{}'", text));
    factor = to_double(trim(before.substr(0, before.size() - 1)));
  }
  if (!after.empty()) {
    if (after.front() != '/') throw std::invalid_argument(fmt::format("cannot parse angle '{}'", text));
    factor /= to_double(trim(after.substr(1)));
  }
  return factor * M_PI;
}

std::vector<int> initial_pattern(std::string_view spec, int L) {
  if (spec == "domainwall") return domain_wall_pattern(L);
  if (spec == "neel") return neel_pattern(L);
  if (static_cast<int>(spec.size()) != L || spec.find_first_not_of("01") != std::string_view::npos) {
    throw std::invalid_argument(fmt::format("initial must be 'domainwall', 'neel' or a 0/1 string of length {}", L));
  }
  if (spec.find('1') == std::string_view::npos) throw std::invalid_argument("initial pattern has no particles");
  std::vector<int> out(L);
  for (int i = 0; i < L; ++i) out[i] = spec[i] == '1';
  return out;
}

RunSpec parse_config(std::string_view text, const ConfigEntries& overrides) {
  ConfigEntries merged = parse_entries(text);
  for (const auto& [k, v] : overrides) merged[k] = v;
  for (const auto& [k, v] : merged) {
    if (!known_keys().count(k)) throw ConfigError(k, v.line, "unknown key");
  }
  const Reader r(std::move(merged));

  RunSpec spec;
  r.read("subcommand", spec.subcommand, parse_subcommand);
  r.read_list("L", spec.L, to_integer<int>);
  r.read_list("p", spec.p, to_double);
  r.read("t", spec.t, to_double);
  r.read_list("gamma", spec.gamma, to_double);
  r.read_list("theta", spec.theta, parse_angle);
  r.read_list("dt", spec.dt, to_double);
  r.read_list("bc", spec.bc, parse_boundary);
  r.read("t_max", spec.t_max, to_double);
  r.read("initial", spec.initial, [](std::string_view v) { return std::string(v); });
  r.read("seed", spec.seed, to_integer<std::uint64_t>);
  r.read("trajectory_index", spec.trajectory_index, to_integer<std::uint64_t>);
  r.read("record_every", spec.record_every, to_integer<int>);
  r.read("record_density", spec.record_density, to_bool);
  r.read("n_traj", spec.n_traj, to_integer<int>);
  r.read("steady_window_fraction", spec.steady_window_fraction, to_double);
  r.read("drop_dissipation", spec.drop_dissipation, to_bool);
  r.read("input", spec.input, [](std::string_view v) { return std::string(v); });
  r.read("tolerance", spec.tolerance, to_double);
  r.read("output_dir", spec.output_dir, [](std::string_view v) { return std::string(v); });
  r.read("format", spec.format, [](std::string_view v) {
    if (v == "csv") return OutputFormat::Csv;
    if (v == "json") return OutputFormat::Json;
    throw std::invalid_argument(fmt::format("format must be csv or json, got '{}'", v));
  });

  const bool grid_allowed = spec.subcommand == Subcommand::Sweep || spec.subcommand == Subcommand::Spectrum;
  const auto check_scalar = [&](const std::string& key, std::size_t n) {
    if (n != 1 && !grid_allowed) r.fail(key, fmt::format("lists are only accepted by sweep and spectrum"));
  };
  check_scalar("L", spec.L.size());
  check_scalar("p", spec.p.size());
  check_scalar("gamma", spec.gamma.size());
  check_scalar("theta", spec.theta.size());
  check_scalar("dt", spec.dt.size());
  check_scalar("bc", spec.bc.size());

  for (int L : spec.L) {
    if (L < 2) r.fail("L", fmt::format("L must be >= 2, got {}", L));
    if (spec.subcommand == Subcommand::OracleCheck && L > ed::kMaxSites) {
      r.fail("L", fmt::format("oracle-check supports L <= {}", ed::kMaxSites));
    }
    try {
      (void)initial_pattern(spec.initial, L);
    } catch (const std::exception& e) {
      r.fail("initial", e.what());
    }
  }
  for (double p : spec.p) {
    if (!(p > 0.0) || !std::isfinite(p)) r.fail("p", fmt::format("p must be finite and > 0, got {}", p));
  }
  if (!std::isfinite(spec.t)) r.fail("t", "t must be finite");
  for (double g : spec.gamma) {
    if (!(g >= 0.0) || !std::isfinite(g)) r.fail("gamma", fmt::format("gamma must be >= 0, got {}", g));
  }
  for (double th : spec.theta) {
    if (!(th >= 0.0 && th <= M_PI + 1e-12)) r.fail("theta", fmt::format("theta must lie in [0, pi], got {}", th));
  }
  if (!(spec.t_max >= 0.0) || !std::isfinite(spec.t_max)) r.fail("t_max", "t_max must be >= 0");
  for (double dt : spec.dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) r.fail("dt", fmt::format("dt must be > 0, got {}", dt));
    const double ratio = spec.t_max / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
      r.fail("t_max", fmt::format("t_max / dt = {} is not an integer step count", ratio));
    }
    for (double g : spec.gamma) {
      if (g * dt > kMaxGammaDt) {
        r.fail("dt", fmt::format("gamma * dt = {} exceeds the hard limit {} (gamma = {}, dt = {})", g * dt,
                                 kMaxGammaDt, g, dt));
      }
    }
  }
  if (spec.record_every < 1) r.fail("record_every", "record_every must be >= 1");
  if (spec.n_traj < 2) r.fail("n_traj", fmt::format("n_traj must be >= 2, got {}", spec.n_traj));
  if (!(spec.steady_window_fraction > 0.0 && spec.steady_window_fraction <= 1.0)) {
    r.fail("steady_window_fraction", "steady_window_fraction must lie in (0, 1]");
  }
  if (!(spec.tolerance > 0.0)) r.fail("tolerance", "tolerance must be > 0");
  if (spec.subcommand == Subcommand::Collapse && spec.input.empty()) {
    r.fail("input", "collapse needs input=<collapse points csv>");
  }
  if (spec.output_dir.empty()) r.fail("output_dir", "output_dir must not be empty");
  return spec;
}

std::string RunSpec::echo() const {
  const auto join = [](const auto& values, auto&& conv) {
    std::vector<std::string> parts;
    for (const auto& v : values) parts.push_back(conv(v));
    return fmt::format("{}", fmt::join(parts, ","));
  };
  const auto dbl = [](double x) { return fmt_double(x); };
  std::ostringstream os;
  os << "subcommand=" << to_string(subcommand) << '\n';
  os << "L=" << join(L, [](int v) { return std::to_string(v); }) << '\n';
  os << "p=" << join(p, dbl) << '\n';
  os << "t=" << fmt_double(t) << '\n';
  os << "gamma=" << join(gamma, dbl) << '\n';
  os << "theta=" << join(theta, dbl) << '\n';
  os << "dt=" << join(dt, dbl) << '\n';
  os << "bc=" << join(bc, [](Boundary b) { return std::string(to_string(b)); }) << '\n';
  os << "t_max=" << fmt_double(t_max) << '\n';
  os << "initial=" << initial << '\n';
  os << "seed=" << seed << '\n';
  os << "trajectory_index=" << trajectory_index << '\n';
  os << "record_every=" << record_every << '\n';
  os << "record_density=" << (record_density ? "true" : "false") << '\n';
  os << "n_traj=" << n_traj << '\n';
  os << "steady_window_fraction=" << fmt_double(steady_window_fraction) << '\n';
  os << "drop_dissipation=" << (drop_dissipation ? "true" : "false") << '\n';
  if (!input.empty()) os << "input=" << input << '\n';
  os << "tolerance=" << fmt_double(tolerance) << '\n';
  os << "output_dir=" << output_dir << '\n';
  os << "format=" << (format == OutputFormat::Csv ? "csv" : "json") << '\n';
  return os.str();
}

TrajectoryConfig RunSpec::trajectory_config(std::size_t iL, std::size_t ip, std::size_t ig, std::size_t ith,
                                            std::size_t idt, std::size_t ibc) const {
  TrajectoryConfig c;
  c.lattice.L = L.at(iL);
  c.lattice.p = p.at(ip);
  c.lattice.t = t;
  c.lattice.gamma = gamma.at(ig);
  c.lattice.theta = theta.at(ith);
  c.lattice.bc = bc.at(ibc);
  c.dt = dt.at(idt);
  c.t_max = t_max;
  c.initial_pattern = initial_pattern(initial, c.lattice.L);
  c.seed = seed;
  c.trajectory_index = trajectory_index;
  c.record_every = record_every;
  c.record_density = record_density;
  return c;
}

EnsembleConfig RunSpec::ensemble_config(const TrajectoryConfig& base) const {
  EnsembleConfig e;
  e.base = base;
  e.n_traj = n_traj;
  e.steady_window_fraction = steady_window_fraction;
  return e;
}

}  // namespace skintraj
