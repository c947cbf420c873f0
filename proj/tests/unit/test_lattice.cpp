#include <doctest.h>

#include <cmath>
#include <numbers>

#include "skintraj/lattice.hpp"

using namespace skintraj;
using std::numbers::pi;

namespace {

LatticeParams chain(int L, double p, Boundary bc, double gamma = 0.0) {
  return LatticeParams{.L = L, .p = p, .t = 1.0, .gamma = gamma, .theta = pi, .bc = bc};
}

// Nearest-neighbour analogue of build_h_eff, built by hand: only |i-j| = 1
// couplings, so the closed-form dispersions apply.
CMatrix nearest_neighbour(int L, Boundary bc, double gamma) {
  CMatrix h = CMatrix::Zero(L, L);
  const int bonds = bc == Boundary::Open ? L - 1 : L;
  for (int i = 0; i < bonds; ++i) {
    const int j = (i + 1) % L;
    h(i, j) += 1.0 + gamma / 4.0;
    h(j, i) += 1.0 - gamma / 4.0;
  }
  return h;
}

}  // namespace

TEST_CASE("h0 matrix elements") {
  SUBCASE("L=3 p=1 open chain") {
    const CMatrix h = build_h0(chain(3, 1.0, Boundary::Open)).entries;
    Eigen::Matrix3d expected;
    expected << 0, 1, 0.5, 1, 0, 1, 0.5, 1, 0;
    CHECK((h - expected.cast<Complex>()).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("L=4 p=2 open: distance-two coupling") {
    CHECK(build_h0(chain(4, 2.0, Boundary::Open)).entries(0, 2) == Complex(0.25, 0.0));
  }
  SUBCASE("L=4 p=2 periodic: minimal image") {
    const CMatrix h = build_h0(chain(4, 2.0, Boundary::Periodic)).entries;
    CHECK(h(0, 3) == Complex(1.0, 0.0));
    // Antipodal pair counted once.
    CHECK(h(0, 2) == Complex(0.25, 0.0));
  }
  SUBCASE("exactly real symmetric with zero diagonal") {
    for (Boundary bc : {Boundary::Open, Boundary::Periodic}) {
      for (int L : {2, 5, 8, 13}) {
        for (double p : {0.7, 1.1, 2.0, 5.0}) {
          const SingleParticleMatrix h = build_h0(chain(L, p, bc));
          CHECK(h.hermitian);
          CHECK(h.dim() == L);
          CHECK((h.entries - h.entries.transpose()).cwiseAbs().maxCoeff() == 0.0);
          CHECK(h.entries.imag().cwiseAbs().maxCoeff() == 0.0);
          CHECK(h.entries.diagonal().cwiseAbs().maxCoeff() == 0.0);
        }
      }
    }
  }
  SUBCASE("hopping strength scales entries") {
    LatticeParams params = chain(6, 2.0, Boundary::Open);
    params.t = 0.3;
    CHECK(build_h0(params).entries(1, 4).real() == doctest::Approx(0.3 / 9.0).epsilon(1e-15));
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(chain(1, 2.0, Boundary::Open).validate(), std::invalid_argument);
  CHECK_THROWS_AS(chain(4, 0.0, Boundary::Open).validate(), std::invalid_argument);
  CHECK_THROWS_AS(chain(4, 2.0, Boundary::Open, -0.1).validate(), std::invalid_argument);
  LatticeParams bad_theta = chain(4, 2.0, Boundary::Open);
  bad_theta.theta = 4.0;
  CHECK_THROWS_AS(bad_theta.validate(), std::invalid_argument);
  CHECK(chain(4, 0.9, Boundary::Open).singular_dispersion());
  CHECK_FALSE(chain(4, 1.1, Boundary::Open).singular_dispersion());
  CHECK(parse_boundary("obc") == Boundary::Open);
  CHECK(parse_boundary("pbc") == Boundary::Periodic);
  CHECK_THROWS(parse_boundary("twisted"));
}

TEST_CASE("measurement bonds") {
  const auto open = measurement_bonds(5, Boundary::Open);
  REQUIRE(open.size() == 4);
  CHECK(open.back().left == 3);
  CHECK(open.back().right == 4);
  const auto ring = measurement_bonds(5, Boundary::Periodic);
  REQUIRE(ring.size() == 5);
  CHECK(ring.back().left == 4);
  CHECK(ring.back().right == 0);
}

TEST_CASE("effective generator") {
  SUBCASE("gamma = 0 reduces to h0") {
    for (Boundary bc : {Boundary::Open, Boundary::Periodic}) {
      const LatticeParams params = chain(7, 1.5, bc);
      for (bool drop : {true, false}) {
        const SingleParticleMatrix h = build_h_eff(params, drop);
        CHECK((h.entries - build_h0(params).entries).cwiseAbs().maxCoeff() == 0.0);
      }
    }
  }
  SUBCASE("L=3 open, gamma=2, shifted generator") {
    const CMatrix h = build_h_eff(chain(3, 60.0, Boundary::Open, 2.0), true).entries;
    CHECK(h(0, 1).real() == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(h(1, 0).real() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(h(0, 2).real() == doctest::Approx(std::pow(2.0, -60.0)).epsilon(1e-12));
    CHECK(h.diagonal().cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("L=4 open, gamma=2, dissipative diagonal") {
    const CMatrix h = build_h_eff(chain(4, 2.0, Boundary::Open, 2.0), false).entries;
    const Complex expected[] = {{0, -0.5}, {0, -1.0}, {0, -1.0}, {0, -0.5}};
    for (int i = 0; i < 4; ++i) CHECK(std::abs(h(i, i) - expected[i]) < 1e-15);
  }
  SUBCASE("difference supported on bonds, anti-Hermitian, with the bond incidence on the diagonal") {
    for (Boundary bc : {Boundary::Open, Boundary::Periodic}) {
      const LatticeParams params = chain(6, 2.0, bc, 0.8);
      const CMatrix d = build_h_eff(params, false).entries - build_h0(params).entries;
      Eigen::MatrixXi support = Eigen::MatrixXi::Zero(6, 6);
      Eigen::VectorXd incidence = Eigen::VectorXd::Zero(6);
      for (const Bond& b : measurement_bonds(6, bc)) {
        support(b.left, b.right) = support(b.right, b.left) = 1;
        support(b.left, b.left) = support(b.right, b.right) = 1;
        incidence(b.left) += 1;
        incidence(b.right) += 1;
      }
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
          if (!support(i, j)) CHECK(d(i, j) == Complex(0.0, 0.0));
      // The added terms are -i(gamma/2) times a Hermitian projector sum, so
      // the whole difference is anti-Hermitian.
      CHECK((d + d.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
      const CVector expected = Complex(0.0, -0.8 / 4.0) * incidence.cast<Complex>();
      CHECK((d.diagonal() - expected).cwiseAbs().maxCoeff() < 1e-15);
    }
  }
  SUBCASE("hermitian flag") {
    CHECK_FALSE(build_h_eff(chain(5, 2.0, Boundary::Open, 0.5), true).hermitian);
    CHECK(build_h_eff(chain(5, 2.0, Boundary::Open, 0.0), true).hermitian);
  }
}

TEST_CASE("spectra") {
  SUBCASE("nearest-neighbour open chain, L=5") {
    const ComplexSpectrum s = spectrum(SingleParticleMatrix{nearest_neighbour(5, Boundary::Open, 0.0), true});
    REQUIRE(s.eigenvalues.size() == 5);
    std::vector<double> expected;
    for (int k = 1; k <= 5; ++k) expected.push_back(2.0 * std::cos(k * pi / 6.0));
    std::sort(expected.begin(), expected.end());
    for (int i = 0; i < 5; ++i) {
      CHECK(s.eigenvalues[i].real() == doctest::Approx(expected[i]).epsilon(1e-12));
      CHECK(std::abs(s.eigenvalues[i].imag()) < 1e-12);
    }
  }
  SUBCASE("nearest-neighbour ring, L=8, lies on 2cos k + i(gamma/2) sin k") {
    const double gamma = 1.3;
    const ComplexSpectrum s =
        spectrum(SingleParticleMatrix{nearest_neighbour(8, Boundary::Periodic, gamma), false}, Boundary::Periodic);
    REQUIRE(s.eigenvalues.size() == 8);
    std::vector<Complex> curve;
    for (int m = 0; m < 8; ++m) {
      const double k = 2.0 * pi * m / 8.0;
      curve.emplace_back(2.0 * std::cos(k), gamma / 2.0 * std::sin(k));
    }
    for (const Complex& z : s.eigenvalues) {
      double best = 1e9;
      for (const Complex& c : curve) best = std::min(best, std::abs(z - c));
      CHECK(best < 1e-10);
    }
    CHECK(hausdorff_distance(ComplexSpectrum{curve, Boundary::Periodic}, s) < 1e-10);
  }
  SUBCASE("hermitian input gives a real spectrum; trace equals eigenvalue sum") {
    for (Boundary bc : {Boundary::Open, Boundary::Periodic}) {
      const SingleParticleMatrix h = build_h0(chain(11, 1.3, bc));
      const ComplexSpectrum s = spectrum(h, bc);
      Complex sum = 0.0;
      for (const Complex& z : s.eigenvalues) {
        CHECK(std::abs(z.imag()) < 1e-10);
        sum += z;
      }
      CHECK(std::abs(sum - h.entries.trace()) < 1e-8);
    }
    const SingleParticleMatrix g = build_h_eff(chain(9, 2.0, Boundary::Open, 0.7), false);
    Complex sum = 0.0;
    for (const Complex& z : spectrum(g).eigenvalues) sum += z;
    CHECK(std::abs(sum - g.entries.trace()) < 1e-8 * std::max(1.0, std::abs(g.entries.trace())));
  }
  SUBCASE("lexicographic order") {
    const ComplexSpectrum s = spectrum(build_h_eff(chain(12, 2.0, Boundary::Periodic, 2.0), true));
    for (std::size_t i = 1; i < s.eigenvalues.size(); ++i) {
      const Complex a = s.eigenvalues[i - 1], b = s.eigenvalues[i];
      CHECK((a.real() < b.real() || (a.real() == b.real() && a.imag() <= b.imag())));
    }
  }
  SUBCASE("non-finite input is rejected") {
    CMatrix bad = CMatrix::Identity(3, 3);
    bad(1, 2) = Complex(std::nan(""), 0.0);
    CHECK_THROWS_AS(spectrum(SingleParticleMatrix{bad, false}), std::invalid_argument);
  }
}

TEST_CASE("one-sided Hausdorff distance") {
  const ComplexSpectrum a{{{0, 0}, {1, 0}}, Boundary::Open};
  const ComplexSpectrum b{{{0, 0}, {1, 0}, {5, 0}}, Boundary::Periodic};
  CHECK(hausdorff_distance(a, b) == 0.0);
  CHECK(hausdorff_distance(b, a) == doctest::Approx(4.0));
}

TEST_CASE("mode velocity") {
  CHECK(mode_velocity(0.0, 2.0, 50) == 0.0);
  CHECK(std::abs(mode_velocity(pi, 2.0, 50)) < 1e-12);
  // Leibniz partial sums alternate around pi/4 with error below 1/(2M+1).
  for (int M : {1000, 10000, 100000}) {
    CHECK(std::abs(mode_velocity(pi / 2.0, 2.0, M) + pi / 2.0) <= 2.0 / (M + 1));
  }
  CHECK(mode_velocity(pi / 2.0, 2.0, 1) == doctest::Approx(-2.0));
  CHECK(default_velocity_cutoff(10, Boundary::Open) == 9);
  CHECK(default_velocity_cutoff(10, Boundary::Periodic) == 5);
}

TEST_CASE("quasi-mode weights") {
  CHECK(quasimode_weight(pi / 2.0, Mover::Right) == doctest::Approx(0.0));
  CHECK(quasimode_weight(pi / 2.0, Mover::Left) == doctest::Approx(1.0));
  CHECK(quasimode_weight(0.0, Mover::Right) == doctest::Approx(0.5));
  double mean = 0.0;
  for (int i = 0; i < 64; ++i) {
    const double k = -pi + 2.0 * pi * (i + 1) / 64.0;
    CHECK(quasimode_weight(k, Mover::Right) + quasimode_weight(k, Mover::Left) == doctest::Approx(1.0));
    mean += quasimode_weight(k, Mover::Right) / 64.0;
  }
  CHECK(mean == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("open spectrum approaches the periodic one") {
  double previous = std::numeric_limits<double>::infinity();
  for (int L : {20, 50, 100}) {
    const LatticeParams open = chain(L, 2.0, Boundary::Open, 2.0);
    const LatticeParams ring = chain(L, 2.0, Boundary::Periodic, 2.0);
    const double d = hausdorff_distance(spectrum(build_h_eff(open, true), Boundary::Open),
                                        spectrum(build_h_eff(ring, true), Boundary::Periodic));
    CHECK(d <= previous);
    previous = d;
  }
}
