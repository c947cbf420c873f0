#include "skintraj/output.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"

namespace skintraj::io {

namespace {

using nlohmann::json;

json config_json(std::string_view echo) {
  json out = json::object();
  std::istringstream in{std::string(echo)};
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

json steady_value_json(const SteadyValue& v) {
  return {{"mean", v.mean}, {"err", v.err}, {"min", v.min}, {"max", v.max}};
}

json jump_log_json(const TrajectoryRecord& record) {
  json log = json::array();
  for (const JumpEvent& e : record.jump_log) log.push_back({e.step, e.bond});
  return log;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

std::string format_number(double x) { return fmt::format("{:.17g}", x); }

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error(fmt::format("failed writing '{}'", path.string()));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string spectrum_csv(const std::vector<SpectrumBlock>& blocks) {
  std::string out = "re,im,bc,L,p,gamma\n";
  for (const SpectrumBlock& b : blocks) {
    for (const Complex& z : b.spectrum.eigenvalues) {
      out += fmt::format("{},{},{},{},{},{}\n", format_number(z.real()), format_number(z.imag()),
                         to_string(b.spectrum.bc), b.params.L, format_number(b.params.p),
                         format_number(b.params.gamma));
    }
  }
  return out;
}

std::string spectrum_json(const std::vector<SpectrumBlock>& blocks) {
  json out = json::array();
  for (const SpectrumBlock& b : blocks) {
    json re = json::array(), im = json::array();
    for (const Complex& z : b.spectrum.eigenvalues) {
      re.push_back(z.real());
      im.push_back(z.imag());
    }
    out.push_back({{"bc", std::string(to_string(b.spectrum.bc))},
                   {"L", b.params.L},
                   {"p", b.params.p},
                   {"gamma", b.params.gamma},
                   {"re", re},
                   {"im", im}});
  }
  return out.dump(1) + "\n";
}

std::string observables_csv(const TrajectoryRecord& record) {
  std::string out = "time,S_ent,S_cl,delta_n,J\n";
  for (const ObservableSet& o : record.snapshots) {
    out += fmt::format("{},{},{},{},{}\n", format_number(o.time), format_number(o.S_ent), format_number(o.S_cl),
                       format_number(o.delta_n), format_number(o.current_J));
  }
  return out;
}

std::string density_csv(const TrajectoryRecord& record) {
  std::string out = "time";
  for (int i = 1; i <= record.config.lattice.L; ++i) out += fmt::format(",n{}", i);
  out += '\n';
  for (const ObservableSet& o : record.snapshots) {
    out += format_number(o.time);
    for (double n : o.density) {
      out += ',';
      out += format_number(n);
    }
    out += '\n';
  }
  return out;
}

std::string trajectory_json(const TrajectoryRecord& record, std::string_view config_echo) {
  json out = {{"config", config_json(config_echo)},
              {"trajectory_index", record.config.trajectory_index},
              {"steps", record.config.steps()},
              {"jump_log", jump_log_json(record)},
              {"expected_jumps", record.expected_jumps}};
  return out.dump(1) + "\n";
}

std::string trajectory_full_json(const TrajectoryRecord& record, std::string_view config_echo) {
  json out = json::parse(trajectory_json(record, config_echo));
  json snaps = json::array();
  for (const ObservableSet& o : record.snapshots) {
    json s = {{"time", o.time}, {"S_ent", o.S_ent}, {"S_cl", o.S_cl}, {"delta_n", o.delta_n}, {"J", o.current_J}};
    if (record.config.record_density) s["density"] = o.density;
    snaps.push_back(std::move(s));
  }
  out["snapshots"] = std::move(snaps);
  return out.dump(1) + "\n";
}

std::string ensemble_csv(const EnsembleRecord& record) {
  std::string out = "time,S_ent_mean,S_ent_err,S_cl_mean,S_cl_err,delta_n_mean,delta_n_err,J_mean,J_err\n";
  for (std::size_t i = 0; i < record.times.size(); ++i) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", format_number(record.times[i]),
                       format_number(record.S_ent.mean[i]), format_number(record.S_ent.err[i]),
                       format_number(record.S_cl.mean[i]), format_number(record.S_cl.err[i]),
                       format_number(record.delta_n.mean[i]), format_number(record.delta_n.err[i]),
                       format_number(record.current_J.mean[i]), format_number(record.current_J.err[i]));
  }
  return out;
}

std::string density_profile_csv(const EnsembleRecord& record) {
  std::string out = "site,mean,err\n";
  for (std::size_t i = 0; i < record.density_mean.size(); ++i) {
    out += fmt::format("{},{},{}\n", i + 1, format_number(record.density_mean[i]),
                       format_number(record.density_err[i]));
  }
  return out;
}

std::string steady_json(const EnsembleRecord& record, std::string_view config_echo) {
  json out = {{"config", config_json(config_echo)},
              {"n_traj", record.config.n_traj},
              {"steady_window_fraction", record.config.steady_window_fraction},
              {"total_jumps", record.total_jumps},
              {"S_ent", steady_value_json(record.steady_S_ent)},
              {"S_cl", steady_value_json(record.steady_S_cl)},
              {"delta_n", steady_value_json(record.steady_delta_n)},
              {"J", steady_value_json(record.steady_J)}};
  return out.dump(1) + "\n";
}

std::string ensemble_full_json(const EnsembleRecord& record, std::string_view config_echo) {
  json out = json::parse(steady_json(record, config_echo));
  out["time"] = record.times;
  for (const auto& [name, stats] : {std::pair<const char*, const SeriesStats*>{"S_ent", &record.S_ent},
                                    {"S_cl", &record.S_cl},
                                    {"delta_n", &record.delta_n},
                                    {"J", &record.current_J}}) {
    out["series"][name] = {{"mean", stats->mean}, {"err", stats->err}};
  }
  out["density_profile"] = {{"mean", record.density_mean}, {"err", record.density_err}};
  return out.dump(1) + "\n";
}

std::string collapse_points_csv(const std::vector<CollapsePoint>& points) {
  std::string out = "L,gamma,S_cl_mean,S_cl_err\n";
  for (const CollapsePoint& p : points) {
    out += fmt::format("{},{},{},{}\n", p.L, format_number(p.gamma), format_number(p.S_cl_mean),
                       format_number(p.S_cl_err));
  }
  return out;
}

std::vector<CollapsePoint> parse_collapse_points(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("collapse points: empty input");
  const auto header = split_csv_line(line);
  const std::vector<std::string> expected{"L", "gamma", "S_cl_mean", "S_cl_err"};
  for (const std::string& col : expected) {
    if (std::find(header.begin(), header.end(), col) == header.end()) {
      throw std::invalid_argument(fmt::format("collapse points: missing column '{}'", col));
    }
  }
  const auto column = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  };
  std::vector<CollapsePoint> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw std::invalid_argument(fmt::format("collapse points: row {} has {} cells", row, cells.size()));
    }
    try {
      out.push_back({std::stoi(cells[column("L")]), std::stod(cells[column("gamma")]),
                     std::stod(cells[column("S_cl_mean")]), std::stod(cells[column("S_cl_err")])});
    } catch (const std::exception&) {
      throw std::invalid_argument(fmt::format("collapse points: row {} is not numeric", row));
    }
  }
  return out;
}

std::string collapse_csv(const CollapseResult& result) {
  std::string out = "gammaL,Scl_over_L,err,L,gamma\n";
  for (const CollapseRow& r : result.table) {
    out += fmt::format("{},{},{},{},{}\n", format_number(r.x), format_number(r.y), format_number(r.err), r.L,
                       format_number(r.gamma));
  }
  return out;
}

std::string fit_json(const CollapseResult& result) {
  json out;
  if (result.tail) {
    const TailFit& t = *result.tail;
    out = {{"refused", false},
           {"slope", t.loglog.slope},
           {"stderr", t.loglog.slope_err},
           {"intercept", t.loglog.intercept},
           {"c", t.c},
           {"n_points", t.loglog.n_points},
           {"x_min", t.x_min},
           {"x_max", t.x_max}};
  } else {
    out = {{"refused", true}, {"reason", result.refusal}};
  }
  return out.dump(1) + "\n";
}

}  // namespace skintraj::io
