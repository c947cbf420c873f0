#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>

#include <fmt/format.h>

#include "json.hpp"
#include "skintraj/config.hpp"
#include "skintraj/output.hpp"
#include "skintraj/sweep.hpp"

using namespace skintraj;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / fmt::format("skintraj_test_{}_{}", name, ::getpid());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Runs the command-line tool and returns its exit status.
int cli(const std::string& args) {
  const std::string cmd = fmt::format("\"{}\" {} >/dev/null 2>&1", SKINTRAJ_CLI_PATH, args);
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string expect_error_key(std::string_view text, const ConfigEntries& overrides = {}) {
  try {
    (void)parse_config(text, overrides);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("valid file") {
    const RunSpec s = parse_config("L=64\np=2.0\ngamma=0.5\nbc=obc\ntheta=pi\n");
    CHECK(s.L == std::vector<int>{64});
    CHECK(s.p == std::vector<double>{2.0});
    CHECK(s.gamma == std::vector<double>{0.5});
    CHECK(s.bc == std::vector<Boundary>{Boundary::Open});
    CHECK(s.theta.front() == doctest::Approx(pi).epsilon(1e-15));
  }
  SUBCASE("comments and whitespace") {
    const RunSpec s = parse_config("# header\n  L = 32  # trailing\n\nseed=9\n");
    CHECK(s.L.front() == 32);
    CHECK(s.seed == 9);
  }
  SUBCASE("constraint errors name the key and line") {
    CHECK(expect_error_key("gamma=-1") == "gamma");
    try {
      (void)parse_config("L=64\n\ngamma=-1\n");
      FAIL("expected an error");
    } catch (const ConfigError& e) {
      CHECK(e.line() == 3);
    }
    CHECK(expect_error_key("L=64\ndt=0.2\ngamma=3.0") == "dt");
    CHECK(expect_error_key("L=1") == "L");
    CHECK(expect_error_key("p=0") == "p");
    CHECK(expect_error_key("theta=4") == "theta");
    CHECK(expect_error_key("t_max=1.005\ndt=0.01") == "t_max");
    CHECK(expect_error_key("n_traj=1") == "n_traj");
    CHECK(expect_error_key("record_every=0") == "record_every");
    CHECK(expect_error_key("steady_window_fraction=0") == "steady_window_fraction");
    CHECK(expect_error_key("subcommand=collapse") == "input");
    CHECK(expect_error_key("subcommand=oracle-check\nL=16") == "L");
    CHECK(expect_error_key("initial=1100\nL=6") == "initial");
  }
  SUBCASE("strict parsing") {
    CHECK(expect_error_key("colour=blue") == "colour");
    CHECK(expect_error_key("L=sixty") == "L");
    CHECK(expect_error_key("L=64.5") == "L");
    CHECK(expect_error_key("gamma=0.5x") == "gamma");
    CHECK(expect_error_key("bc=mobius") == "bc");
    CHECK(expect_error_key("record_density=maybe") == "record_density");
    CHECK(expect_error_key("L=32\nL=64") == "L");
    CHECK_THROWS_AS(parse_config("just words"), ConfigError);
    CHECK(expect_error_key("L=32,64") == "L");  // lists only for sweep/spectrum
    CHECK_NOTHROW(parse_config("subcommand=sweep\nL=32,64\ngamma=0.1,0.2"));
  }
  SUBCASE("overrides win over file values") {
    ConfigEntries o;
    o["gamma"] = {"0.25", 0};
    const RunSpec s = parse_config("gamma=0.5\n", o);
    CHECK(s.gamma.front() == 0.25);
    ConfigEntries bad;
    bad["gamma"] = {"-2", 0};
    try {
      (void)parse_config("gamma=0.5\n", bad);
      FAIL("expected an error");
    } catch (const ConfigError& e) {
      CHECK(e.key() == "gamma");
      CHECK(e.line() == 0);
    }
  }
  SUBCASE("angles and initial states") {
    CHECK(parse_angle("pi") == doctest::Approx(pi));
    CHECK(parse_angle("0") == 0.0);
    CHECK(parse_angle("pi/2") == doctest::Approx(pi / 2));
    CHECK(parse_angle("3*pi/4") == doctest::Approx(0.75 * pi));
    CHECK(parse_angle("0.5*pi") == doctest::Approx(pi / 2));
    CHECK(parse_angle("1.25") == 1.25);
    CHECK_THROWS(parse_angle("tau"));
    CHECK(initial_pattern("domainwall", 4) == std::vector<int>{1, 1, 0, 0});
    CHECK(initial_pattern("neel", 4) == std::vector<int>{1, 0, 1, 0});
    CHECK(initial_pattern("0110", 4) == std::vector<int>{0, 1, 1, 0});
    CHECK_THROWS(initial_pattern("0000", 4));
    CHECK_THROWS(initial_pattern("01", 4));
  }
  SUBCASE("echo round-trips") {
    const RunSpec s = parse_config("subcommand=sweep\nL=32,64\ngamma=0.1,0.3\ntheta=pi/3\nbc=obc,pbc\nseed=5\n");
    const RunSpec again = parse_config(s.echo());
    CHECK(again.echo() == s.echo());
    CHECK(again.theta.front() == s.theta.front());
    CHECK(again.bc == s.bc);
  }
}

TEST_CASE("number format and serialisers") {
  CHECK(io::format_number(0.1) == "0.10000000000000001");
  CHECK(io::format_number(-2.0) == "-2");
  CHECK(io::format_number(1e-20) == "9.9999999999999995e-21");

  TrajectoryConfig c;
  c.lattice = {.L = 4, .p = 2.0, .t = 1.0, .gamma = 1.0, .theta = pi, .bc = Boundary::Open};
  c.dt = 0.1;
  c.t_max = 0.2;
  c.initial_pattern = {1, 1, 0, 0};
  c.record_density = true;
  const TrajectoryRecord r = run_trajectory(c);
  const std::string obs = io::observables_csv(r);
  CHECK(obs.rfind("time,S_ent,S_cl,delta_n,J\n", 0) == 0);
  CHECK(std::count(obs.begin(), obs.end(), '\n') == 4);
  CHECK(obs.find('\r') == std::string::npos);
  const std::string dens = io::density_csv(r);
  CHECK(dens.rfind("time,n1,n2,n3,n4\n0,1,1,0,0\n", 0) == 0);
  const auto json = nlohmann::json::parse(io::trajectory_json(r, "L=4\n"));
  CHECK(json["config"]["L"] == "4");
  CHECK(json["jump_log"].is_array());
  CHECK(json["expected_jumps"].size() == 3);

  io::SpectrumBlock block{spectrum(build_h_eff(c.lattice, true)), c.lattice};
  const std::string spec_csv = io::spectrum_csv({block});
  CHECK(spec_csv.rfind("re,im,bc,L,p,gamma\n", 0) == 0);
  CHECK(spec_csv.find(",obc,4,2,1\n") != std::string::npos);

  const std::vector<CollapsePoint> pts{{32, 0.5, 4.5, 0.1}, {64, 0.25, 9.0, 0.2}};
  CHECK(io::parse_collapse_points(io::collapse_points_csv(pts)).size() == 2);
  CHECK(io::parse_collapse_points(io::collapse_points_csv(pts))[1].S_cl_err == 0.2);
  CHECK_THROWS_AS(io::parse_collapse_points("L,gamma,S_cl_mean\n32,0.5,1\n"), std::invalid_argument);
  CHECK_THROWS_AS(io::parse_collapse_points("L,gamma,S_cl_mean,S_cl_err\n32,abc,1,0\n"), std::invalid_argument);
}

TEST_CASE("fit summary") {
  std::vector<CollapsePoint> pts;
  for (int L : {32, 64, 128})
    for (double g : {0.5, 1.0, 2.0}) pts.push_back({L, g, L * 3.0 / (g * L), 0.0});
  const auto ok = nlohmann::json::parse(io::fit_json(collapse_scan(pts)));
  CHECK(ok["refused"] == false);
  CHECK(ok["c"].get<double>() == doctest::Approx(3.0));
  CHECK(ok["slope"].get<double>() == doctest::Approx(-1.0));
  CHECK(ok.contains("stderr"));
  const std::vector<CollapsePoint> few{{10, 0.1, 2.0, 0.1}, {20, 0.1, 2.0, 0.1}, {40, 1.0, 2.0, 0.1}};
  const auto refused = nlohmann::json::parse(io::fit_json(collapse_scan(few)));
  CHECK(refused["refused"] == true);
  CHECK(!refused["reason"].get<std::string>().empty());
  CHECK(io::collapse_csv(collapse_scan(few)).rfind("gammaL,Scl_over_L,err,L,gamma\n", 0) == 0);
}

TEST_CASE("sweep manifest and resume") {
  const fs::path out = scratch("sweep");
  const RunSpec spec = parse_config(
      "subcommand=sweep\nL=8\np=2\ngamma=0.1,0.2\ntheta=pi\nt_max=0.5\ndt=0.01\nn_traj=2\nrecord_every=10\n");
  REQUIRE(grid_points(spec).size() == 2);

  std::vector<std::size_t> ran;
  const SweepSummary first = run_sweep(spec, out, 1, [&](const GridPoint& g) { ran.push_back(g.index); });
  CHECK(first.computed == 2);
  CHECK(first.skipped == 0);
  CHECK(ran == std::vector<std::size_t>{0, 1});
  const auto rows = parse_manifest(io::read_file(out / "manifest.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].status == "ok");
  CHECK(rows[1].gamma == 0.2);
  CHECK(fs::exists(out / rows[1].dir / "ensemble.csv"));
  CHECK(fs::exists(out / rows[1].dir / "config.txt"));
  CHECK(fs::exists(out / "collapse_points.csv"));
  const std::string manifest_before = io::read_file(out / "manifest.csv");
  const std::string steady_before = io::read_file(out / rows[1].dir / "steady.json");

  // Simulate an interrupt after the first point: drop the second point's outputs.
  fs::remove_all(out / rows[1].dir);
  ran.clear();
  const SweepSummary second = run_sweep(spec, out, 1, [&](const GridPoint& g) { ran.push_back(g.index); });
  CHECK(second.skipped == 1);
  CHECK(second.computed == 1);
  CHECK(ran == std::vector<std::size_t>{1});
  CHECK(io::read_file(out / "manifest.csv") == manifest_before);
  CHECK(io::read_file(out / rows[1].dir / "steady.json") == steady_before);

  ran.clear();
  const SweepSummary third = run_sweep(spec, out, 1, [&](const GridPoint& g) { ran.push_back(g.index); });
  CHECK(third.skipped == 2);
  CHECK(ran.empty());
  fs::remove_all(out);
}

TEST_CASE("sweep records failures and continues") {
  const fs::path out = scratch("sweep_fail");
  // A dt that collapses the propagator for the larger gamma is not reachable
  // through validated configs, so break one point's output directory instead.
  const RunSpec spec = parse_config(
      "subcommand=sweep\nL=8\ngamma=0.1,0.2,0.3\nt_max=0.2\ndt=0.01\nn_traj=2\nrecord_every=10\n");
  io::write_file(out / "point_0001", "a file where a directory should be");
  const SweepSummary s = run_sweep(spec, out, 1);
  CHECK(s.failed == 1);
  CHECK(s.computed == 2);
  const auto rows = parse_manifest(io::read_file(out / "manifest.csv"));
  CHECK(rows[0].status == "ok");
  CHECK(rows[1].status == "failed");
  CHECK(!rows[1].message.empty());
  CHECK(rows[2].status == "ok");
  CHECK(io::parse_collapse_points(io::read_file(out / "collapse_points.csv")).size() == 2);
  fs::remove_all(out);
}

TEST_CASE("command-line tool") {
  const fs::path dir = scratch("cli");
  const std::string base = "L=8 p=2 gamma=0.5 t_max=0.5 dt=0.01 n_traj=3 record_every=5";

  SUBCASE("exit codes") {
    CHECK(cli(fmt::format("trajectory {} --out {}", base, (dir / "t").string())) == 0);
    CHECK(cli(fmt::format("trajectory gamma=-1 --out {}", (dir / "bad").string())) == 1);
    CHECK(cli(fmt::format("trajectory L=64 dt=0.2 gamma=3.0 --out {}", (dir / "bad").string())) == 1);
    CHECK(cli(fmt::format("trajectory colour=red --out {}", (dir / "bad").string())) == 1);
    CHECK(cli("frobnicate") == 1);
    CHECK(cli(fmt::format("oracle-check {} --out {}", base, (dir / "o").string())) == 0);
    CHECK(cli(fmt::format("oracle-check {} tolerance=1e-30 --out {}", base, (dir / "o2").string())) == 3);
    CHECK(cli(fmt::format("collapse input={} --out {}", (dir / "missing.csv").string(), (dir / "c").string())) == 1);
  }
  SUBCASE("config file with overrides; echo written") {
    io::write_file(dir / "run.cfg", "L=8\ngamma=0.5\nt_max=0.5\nn_traj=3\n");
    CHECK(cli(fmt::format("ensemble --config {} gamma=0.25 --out {}", (dir / "run.cfg").string(),
                          (dir / "e").string())) == 0);
    const RunSpec echoed = parse_config(io::read_file(dir / "e" / "config.txt"));
    CHECK(echoed.gamma.front() == 0.25);
    CHECK(echoed.subcommand == Subcommand::Ensemble);
    CHECK(fs::exists(dir / "e" / "ensemble.csv"));
    CHECK(fs::exists(dir / "e" / "density_profile.csv"));
    CHECK(fs::exists(dir / "e" / "steady.json"));
  }
  SUBCASE("outputs are byte-identical across reruns") {
    for (const char* cmd : {"trajectory", "ensemble"}) {
      const std::string a = (dir / fmt::format("{}_a", cmd)).string();
      const std::string b = (dir / fmt::format("{}_b", cmd)).string();
      REQUIRE(cli(fmt::format("{} {} record_density=true --out {}", cmd, base, a)) == 0);
      REQUIRE(cli(fmt::format("{} {} record_density=true --out {} --workers 2", cmd, base, b)) == 0);
      for (const auto& entry : fs::directory_iterator(a)) {
        const fs::path other = fs::path(b) / entry.path().filename();
        CAPTURE(entry.path().string());
        REQUIRE(fs::exists(other));
        std::string lhs = io::read_file(entry.path()), rhs = io::read_file(other);
        // The echo records the output directory itself.
        if (entry.path().filename() == "config.txt" || entry.path().extension() == ".json") {
          const auto strip = [](std::string s) {
            const auto pos = s.find("output_dir");
            if (pos != std::string::npos) s.erase(pos, s.find('\n', pos) - pos);
            return s;
          };
          lhs = strip(lhs);
          rhs = strip(rhs);
        }
        CHECK(lhs == rhs);
      }
    }
  }
  SUBCASE("spectrum and collapse files") {
    REQUIRE(cli(fmt::format("spectrum L=20,50 p=2 gamma=2 bc=obc,pbc --out {}", (dir / "s").string())) == 0);
    const std::string csv = io::read_file(dir / "s" / "spectrum.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * (20 + 50));
    REQUIRE(cli(fmt::format("spectrum L=8 --format json --out {}", (dir / "sj").string())) == 0);
    CHECK(nlohmann::json::parse(io::read_file(dir / "sj" / "spectrum.json"))[0]["re"].size() == 8);

    std::vector<CollapsePoint> pts;
    for (int L : {32, 64, 128})
      for (double g : {0.5, 1.0, 2.0}) pts.push_back({L, g, 2.5 / g, 0.01});
    io::write_file(dir / "points.csv", io::collapse_points_csv(pts));
    REQUIRE(cli(fmt::format("collapse input={} --out {}", (dir / "points.csv").string(), (dir / "c").string())) ==
            0);
    const auto fit = nlohmann::json::parse(io::read_file(dir / "c" / "fit.json"));
    CHECK(fit["slope"].get<double>() == doctest::Approx(-1.0));
    CHECK(fit["c"].get<double>() == doctest::Approx(2.5));
  }
  SUBCASE("sweep from the command line") {
    REQUIRE(cli(fmt::format("sweep L=8 gamma=0.1,0.2 t_max=0.2 n_traj=2 --out {}", (dir / "w").string())) == 0);
    const auto rows = parse_manifest(io::read_file(dir / "w" / "manifest.csv"));
    CHECK(rows.size() == 2);
  }
  fs::remove_all(dir);
}
