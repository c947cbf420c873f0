#include "skintraj/sweep.hpp"

#include <map>
#include <sstream>

#include <fmt/format.h>

#include "skintraj/output.hpp"

namespace skintraj {

namespace {

constexpr std::string_view kManifestHeader =
    "index,L,p,gamma,theta,dt,bc,status,dir,"
    "S_ent_mean,S_ent_err,S_cl_mean,S_cl_err,delta_n_mean,delta_n_err,J_mean,J_err,message";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Failure messages go into a CSV cell: keep them on one line and comma-free.
std::string sanitize(std::string text) {
  for (char& ch : text) {
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  }
  return text;
}

ManifestRow row_for(const RunSpec& spec, const GridPoint& g) {
  ManifestRow row;
  row.index = g.index;
  row.L = spec.L[g.iL];
  row.p = spec.p[g.ip];
  row.gamma = spec.gamma[g.ig];
  row.theta = spec.theta[g.ith];
  row.dt = spec.dt[g.idt];
  row.bc = spec.bc[g.ibc];
  row.dir = point_dir_name(g);
  return row;
}

bool same_point(const ManifestRow& a, const ManifestRow& b) {
  return a.index == b.index && a.L == b.L && a.p == b.p && a.gamma == b.gamma && a.theta == b.theta &&
         a.dt == b.dt && a.bc == b.bc;
}

}  // namespace

std::vector<GridPoint> grid_points(const RunSpec& spec) {
  std::vector<GridPoint> out;
  std::size_t index = 0;
  for (std::size_t iL = 0; iL < spec.L.size(); ++iL)
    for (std::size_t ip = 0; ip < spec.p.size(); ++ip)
      for (std::size_t ig = 0; ig < spec.gamma.size(); ++ig)
        for (std::size_t ith = 0; ith < spec.theta.size(); ++ith)
          for (std::size_t idt = 0; idt < spec.dt.size(); ++idt)
            for (std::size_t ibc = 0; ibc < spec.bc.size(); ++ibc)
              out.push_back({index++, iL, ip, ig, ith, idt, ibc});
  return out;
}

RunSpec point_spec(const RunSpec& spec, const GridPoint& g) {
  RunSpec s = spec;
  s.subcommand = Subcommand::Ensemble;
  s.L = {spec.L[g.iL]};
  s.p = {spec.p[g.ip]};
  s.gamma = {spec.gamma[g.ig]};
  s.theta = {spec.theta[g.ith]};
  s.dt = {spec.dt[g.idt]};
  s.bc = {spec.bc[g.ibc]};
  return s;
}

std::string point_dir_name(const GridPoint& point) { return fmt::format("point_{:04d}", point.index); }

std::string manifest_csv(const std::vector<ManifestRow>& rows) {
  using io::format_number;
  std::string out(kManifestHeader);
  out += '\n';
  for (const ManifestRow& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}", r.index, r.L, format_number(r.p), format_number(r.gamma),
                       format_number(r.theta), format_number(r.dt), to_string(r.bc), r.status, r.dir);
    for (const SteadyValue* v : {&r.S_ent, &r.S_cl, &r.delta_n, &r.J}) {
      out += fmt::format(",{},{}", format_number(v->mean), format_number(v->err));
    }
    out += fmt::format(",{}\n", sanitize(r.message));
  }
  return out;
}

std::vector<ManifestRow> parse_manifest(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line != kManifestHeader) {
    throw std::invalid_argument("manifest: unexpected header");
  }
  std::vector<ManifestRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 18) throw std::invalid_argument(fmt::format("manifest: malformed row '{}'", line));
    ManifestRow r;
    try {
      r.index = std::stoul(c[0]);
      r.L = std::stoi(c[1]);
      r.p = std::stod(c[2]);
      r.gamma = std::stod(c[3]);
      r.theta = std::stod(c[4]);
      r.dt = std::stod(c[5]);
      r.bc = parse_boundary(c[6]);
      r.status = c[7];
      r.dir = c[8];
      SteadyValue* values[] = {&r.S_ent, &r.S_cl, &r.delta_n, &r.J};
      for (int k = 0; k < 4; ++k) {
        values[k]->mean = std::stod(c[9 + 2 * k]);
        values[k]->err = std::stod(c[10 + 2 * k]);
      }
      r.message = c[17];
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument(fmt::format("manifest: malformed row '{}'", line));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_ensemble_outputs(const EnsembleRecord& record, const RunSpec& spec, const std::filesystem::path& dir) {
  const std::string echo = spec.echo();
  io::write_file(dir / "config.txt", echo);
  io::write_file(dir / "ensemble.csv", io::ensemble_csv(record));
  io::write_file(dir / "density_profile.csv", io::density_profile_csv(record));
  io::write_file(dir / "steady.json", io::steady_json(record, echo));
  if (spec.format == OutputFormat::Json) io::write_file(dir / "ensemble.json", io::ensemble_full_json(record, echo));
}

SweepSummary run_sweep(const RunSpec& spec, const std::filesystem::path& out, int workers,
                       const SweepObserver& observer) {
  std::filesystem::create_directories(out);
  io::write_file(out / "config.txt", spec.echo());

  const auto manifest_path = out / "manifest.csv";
  std::map<std::size_t, ManifestRow> previous;
  if (std::filesystem::exists(manifest_path)) {
    for (ManifestRow& r : parse_manifest(io::read_file(manifest_path))) previous[r.index] = std::move(r);
  }

  SweepSummary summary;
  const auto points = grid_points(spec);
  // Rows for points not yet reached keep their old status so an interrupt
  // mid-grid never forgets completed work.
  std::vector<ManifestRow> rows;
  for (const GridPoint& g : points) {
    ManifestRow fresh = row_for(spec, g);
    auto it = previous.find(g.index);
    if (it != previous.end() && same_point(it->second, fresh)) {
      rows.push_back(it->second);
    } else {
      fresh.status = "pending";
      rows.push_back(fresh);
    }
  }

  for (const GridPoint& g : points) {
    ManifestRow& row = rows[g.index];
    if (row.status == "ok" && std::filesystem::exists(out / row.dir / "steady.json")) {
      ++summary.skipped;
      continue;
    }
    row = row_for(spec, g);
    if (observer) observer(g);
    const RunSpec single = point_spec(spec, g);
    try {
      const EnsembleRecord record = run_ensemble(single.ensemble_config(single.trajectory_config()), workers);
      write_ensemble_outputs(record, single, out / row.dir);
      row.status = "ok";
      row.S_ent = record.steady_S_ent;
      row.S_cl = record.steady_S_cl;
      row.delta_n = record.steady_delta_n;
      row.J = record.steady_J;
      ++summary.computed;
    } catch (const std::exception& e) {
      row.status = "failed";
      row.message = e.what();
      ++summary.failed;
    }
    io::write_file(manifest_path, manifest_csv(rows));
  }
  io::write_file(manifest_path, manifest_csv(rows));

  std::vector<CollapsePoint> collapse;
  for (const ManifestRow& r : rows) {
    if (r.status == "ok") collapse.push_back({r.L, r.gamma, r.S_cl.mean, r.S_cl.err});
  }
  io::write_file(out / "collapse_points.csv", io::collapse_points_csv(collapse));

  summary.rows = std::move(rows);
  return summary;
}

}  // namespace skintraj
