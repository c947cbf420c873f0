#include "skintraj/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace skintraj {

std::string_view to_string(Boundary bc) { return bc == Boundary::Open ? "obc" : "pbc"; }

Boundary parse_boundary(std::string_view text) {
  if (text == "obc" || text == "OBC" || text == "open") return Boundary::Open;
  if (text == "pbc" || text == "PBC" || text == "periodic") return Boundary::Periodic;
  throw std::invalid_argument(fmt::format("unknown boundary condition '{}'", text));
}

void LatticeParams::validate() const {
  if (L < 2) throw std::invalid_argument(fmt::format("L must be >= 2, got {}", L));
  if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument(fmt::format("p must be finite and > 0, got {}", p));
  if (!std::isfinite(t)) throw std::invalid_argument("t must be finite");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument(fmt::format("gamma must be finite and >= 0, got {}", gamma));
  }
  if (!(theta >= 0.0 && theta <= M_PI + 1e-12)) {
    throw std::invalid_argument(fmt::format("theta must lie in [0, pi], got {}", theta));
  }
}

int hop_distance(int i, int j, int L, Boundary bc) {
  const int d = std::abs(i - j);
  return bc == Boundary::Periodic ? std::min(d, L - d) : d;
}

std::vector<Bond> measurement_bonds(int L, Boundary bc) {
  std::vector<Bond> bonds;
  const int count = bc == Boundary::Periodic ? L : L - 1;
  bonds.reserve(count);
  for (int i = 0; i < count; ++i) bonds.push_back({i, (i + 1) % L});
  return bonds;
}

SingleParticleMatrix build_h0(const LatticeParams& params) {
  params.validate();
  const int L = params.L;
  CMatrix h = CMatrix::Zero(L, L);
  // One coupling per unordered pair; the antipodal PBC pair is not doubled.
  for (int i = 0; i < L; ++i) {
    for (int j = i + 1; j < L; ++j) {
      const double d = hop_distance(i, j, L, params.bc);
      const double c = params.t / std::pow(d, params.p);
      h(i, j) = c;
      h(j, i) = c;
    }
  }
  return {std::move(h), true};
}

SingleParticleMatrix build_h_eff(const LatticeParams& params, bool drop_overall_dissipation) {
  SingleParticleMatrix h = build_h0(params);
  if (params.gamma == 0.0) return h;
  const double q = params.gamma / 4.0;
  for (const Bond& b : measurement_bonds(params.L, params.bc)) {
    h.entries(b.left, b.right) += q;
    h.entries(b.right, b.left) -= q;
    if (!drop_overall_dissipation) {
      h.entries(b.left, b.left) += Complex(0.0, -q);
      h.entries(b.right, b.right) += Complex(0.0, -q);
    }
  }
  h.hermitian = false;
  return h;
}

ComplexSpectrum spectrum(const SingleParticleMatrix& h, Boundary bc_tag) {
  if (h.entries.rows() != h.entries.cols()) throw std::invalid_argument("spectrum: matrix is not square");
  if (!h.entries.allFinite()) throw std::invalid_argument("spectrum: matrix has non-finite entries");

  ComplexSpectrum out;
  out.bc = bc_tag;
  if (h.hermitian) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.entries, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw EigenSolverError("Hermitian eigensolver did not converge");
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) out.eigenvalues.emplace_back(solver.eigenvalues()(i), 0.0);
  } else {
    Eigen::ComplexEigenSolver<CMatrix> solver(h.entries, false);
    if (solver.info() != Eigen::Success) throw EigenSolverError("complex eigensolver did not converge");
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) out.eigenvalues.push_back(solver.eigenvalues()(i));
  }
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

double hausdorff_distance(const ComplexSpectrum& from, const ComplexSpectrum& to) {
  if (to.eigenvalues.empty()) throw std::invalid_argument("hausdorff_distance: empty target spectrum");
  double worst = 0.0;
  for (const Complex& z : from.eigenvalues) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const Complex& w : to.eigenvalues) nearest = std::min(nearest, std::abs(z - w));
    worst = std::max(worst, nearest);
  }
  return worst;
}

double mode_velocity(double k, double p, int m_cutoff) {
  if (m_cutoff < 1) throw std::invalid_argument("mode_velocity: cutoff must be >= 1");
  double v = 0.0;
  for (int m = 1; m <= m_cutoff; ++m) v += m * std::sin(m * k) / std::pow(m, p);
  return -2.0 * v;
}

int default_velocity_cutoff(int L, Boundary bc) { return bc == Boundary::Open ? L - 1 : L / 2; }

double quasimode_weight(double k, Mover direction) {
  const double s = std::sin(k);
  return direction == Mover::Right ? 0.5 * (1.0 - s) : 0.5 * (1.0 + s);
}

}  // namespace skintraj
