#include "skintraj/ed_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <fmt/format.h>
#include <unsupported/Eigen/MatrixFunctions>

namespace skintraj::ed {

namespace {

constexpr Complex kI{0.0, 1.0};

bool occupied(std::uint32_t w, int site) { return (w >> site) & 1U; }

void check_sites(int L) {
  if (L < 1 || L > kMaxSites) {
    throw DimensionError(fmt::format("exact diagonalisation limited to 1..{} sites, got {}", kMaxSites, L));
  }
}

}  // namespace

FockBasis::FockBasis(int L, int N) : L_(L), N_(N) {
  check_sites(L);
  if (N < 0 || N > L) throw std::invalid_argument(fmt::format("FockBasis: N = {} outside [0, {}]", N, L));
  for (std::uint32_t w = 0; w < (1U << L); ++w) {
    if (std::popcount(w) == N) {
      index_.emplace(w, words_.size());
      words_.push_back(w);
    }
  }
}

FockBasis FockBasis::full(int L) {
  check_sites(L);
  FockBasis b;
  b.L_ = L;
  b.N_ = -1;
  for (std::uint32_t w = 0; w < (1U << L); ++w) {
    b.index_.emplace(w, b.words_.size());
    b.words_.push_back(w);
  }
  return b;
}

long FockBasis::index(std::uint32_t w) const {
  const auto it = index_.find(w);
  return it == index_.end() ? -1 : static_cast<long>(it->second);
}

int jordan_wigner_sign(std::uint32_t w, int site) {
  const std::uint32_t below = w & ((1U << site) - 1U);
  return (std::popcount(below) & 1) ? -1 : 1;
}

CMatrix lift_bilinear(const CMatrix& m, const FockBasis& basis) {
  const int L = basis.sites();
  if (m.rows() != L || m.cols() != L) throw std::invalid_argument("lift_bilinear: matrix size does not match basis");
  const auto dim = static_cast<Eigen::Index>(basis.size());
  CMatrix out = CMatrix::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const std::uint32_t w = basis.word(col);
    for (int b = 0; b < L; ++b) {
      if (!occupied(w, b)) continue;
      const std::uint32_t w1 = w ^ (1U << b);
      const int s1 = jordan_wigner_sign(w, b);
      for (int a = 0; a < L; ++a) {
        if (occupied(w1, a) || m(a, b) == Complex(0.0)) continue;
        const std::uint32_t w2 = w1 | (1U << a);
        const long row = basis.index(w2);
        if (row < 0) continue;
        out(row, col) += m(a, b) * static_cast<double>(s1 * jordan_wigner_sign(w1, a));
      }
    }
  }
  return out;
}

CMatrix lift_annihilator(int site, const FockBasis& basis) {
  const auto dim = static_cast<Eigen::Index>(basis.size());
  CMatrix out = CMatrix::Zero(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    const std::uint32_t w = basis.word(col);
    if (!occupied(w, site)) continue;
    const long row = basis.index(w ^ (1U << site));
    if (row < 0) throw std::invalid_argument("lift_annihilator: basis is not closed under c (use FockBasis::full)");
    out(row, col) = jordan_wigner_sign(w, site);
  }
  return out;
}

CMatrix lift_creator(int site, const FockBasis& basis) { return lift_annihilator(site, basis).adjoint(); }

CMatrix lift_number(int site, const FockBasis& basis) {
  const auto dim = static_cast<Eigen::Index>(basis.size());
  CMatrix out = CMatrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) out(i, i) = occupied(basis.word(i), site) ? 1.0 : 0.0;
  return out;
}

CMatrix lift_jump(const JumpOperator& jump, const FockBasis& basis) {
  const CVector a = jump.a_vector(basis.sites());
  const CMatrix projector = 0.5 * a * a.adjoint();
  CMatrix out = lift_bilinear(projector, basis);
  const Complex phase = std::polar(1.0, jump.theta);
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    if (occupied(basis.word(r), jump.right)) out.row(r) *= phase;
  }
  return out;
}

CMatrix sector_exponential(const CMatrix& H, double dt) {
  Eigen::ComplexEigenSolver<CMatrix> solver(H, true);
  if (solver.info() == Eigen::Success) {
    const CMatrix& V = solver.eigenvectors();
    Eigen::JacobiSVD<CMatrix> svd(V);
    const auto& sv = svd.singularValues();
    const double cond = sv(0) / sv(sv.size() - 1);
    if (std::isfinite(cond) && cond < 1e6) {
      CVector phases(H.rows());
      for (Eigen::Index i = 0; i < H.rows(); ++i) phases(i) = std::exp(Complex(0.0, -dt) * solver.eigenvalues()(i));
      const CMatrix scaled = V * phases.asDiagonal();
      return V.transpose().partialPivLu().solve(scaled.transpose()).transpose();
    }
  }
  const CMatrix generator = Complex(0.0, -dt) * H;
  return generator.exp();
}

FockVector from_slater(const SlaterState& state, const FockBasis& basis) {
  const int N = state.particles();
  if (basis.particles() != N || basis.sites() != state.sites()) {
    throw std::invalid_argument("from_slater: basis does not match the state's (L, N)");
  }
  FockVector psi(static_cast<Eigen::Index>(basis.size()));
  CMatrix minor(N, N);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const std::uint32_t w = basis.word(i);
    int r = 0;
    for (int s = 0; s < basis.sites(); ++s) {
      if (occupied(w, s)) minor.row(r++) = state.orbitals().row(s);
    }
    psi(static_cast<Eigen::Index>(i)) = minor.determinant();
  }
  return psi;
}

CorrelationMatrix correlation_matrix(const FockVector& psi, const FockBasis& basis) {
  const int L = basis.sites();
  CorrelationMatrix G = CorrelationMatrix::Zero(L, L);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const Complex amp = psi(static_cast<Eigen::Index>(i));
    if (amp == Complex(0.0)) continue;
    const std::uint32_t w = basis.word(i);
    for (int n = 0; n < L; ++n) {
      if (!occupied(w, n)) continue;
      const std::uint32_t w1 = w ^ (1U << n);
      const int s1 = jordan_wigner_sign(w, n);
      for (int m = 0; m < L; ++m) {
        if (occupied(w1, m)) continue;
        const long j = basis.index(w1 | (1U << m));
        G(m, n) += std::conj(psi(j)) * amp * static_cast<double>(s1 * jordan_wigner_sign(w1, m));
      }
    }
  }
  return G;
}

double prefix_entropy(const FockVector& psi, const FockBasis& basis, int length) {
  if (length <= 0) return 0.0;
  if (length > basis.sites()) throw std::out_of_range("prefix_entropy: subsystem longer than the chain");
  const std::uint32_t mask = (1U << length) - 1U;
  const Eigen::Index dimA = Eigen::Index{1} << length;
  // Group amplitudes by the configuration of the complement.
  std::map<std::uint32_t, std::vector<std::pair<std::uint32_t, Complex>>> by_rest;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const std::uint32_t w = basis.word(i);
    by_rest[w >> length].emplace_back(w & mask, psi(static_cast<Eigen::Index>(i)));
  }
  CMatrix rho = CMatrix::Zero(dimA, dimA);
  for (const auto& [rest, amps] : by_rest) {
    for (const auto& [a, x] : amps) {
      for (const auto& [b, y] : amps) rho(a, b) += x * std::conj(y);
    }
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw EigenSolverError("prefix_entropy: eigensolver failed");
  double s = 0.0;
  for (Eigen::Index k = 0; k < dimA; ++k) {
    const double p = solver.eigenvalues()(k);
    if (p > 0.0) s -= p * std::log(p);
  }
  return s;
}

ObservableSet observables(const FockVector& psi, const FockBasis& basis, double time) {
  const CorrelationMatrix G = correlation_matrix(psi, basis);
  ObservableSet obs;
  obs.time = time;
  obs.density.resize(basis.sites());
  for (int i = 0; i < basis.sites(); ++i) obs.density[i] = G(i, i).real();
  obs.S_ent = prefix_entropy(psi, basis, basis.sites() / 4);
  obs.S_cl = classical_entropy(obs.density);
  obs.delta_n = density_imbalance(obs.density);
  obs.current_J = particle_current(G);
  return obs;
}

Oracle::Oracle(const TrajectoryConfig& config) : config_(config), basis_(1, 0) {
  config_.validate();
  const int L = config_.lattice.L;
  check_sites(L);
  const int N = static_cast<int>(std::count_if(config_.initial_pattern.begin(), config_.initial_pattern.end(),
                                               [](int b) { return b != 0; }));
  basis_ = FockBasis(L, N);
  h_eff_ = lift_bilinear(build_h_eff(config_.lattice, false).entries, basis_);
  propagator_ = sector_exponential(h_eff_, config_.dt);
  for (const JumpOperator& j : jump_operators(config_.lattice)) jumps_.push_back(lift_jump(j, basis_));
}

FockVector Oracle::initial_state() const {
  std::uint32_t w = 0;
  for (int i = 0; i < config_.lattice.L; ++i) {
    if (config_.initial_pattern[i] != 0) w |= 1U << i;
  }
  FockVector psi = FockVector::Zero(static_cast<Eigen::Index>(basis_.size()));
  psi(basis_.index(w)) = 1.0;
  return psi;
}

void Oracle::step(FockVector& psi, std::span<const int> bonds) const {
  psi = propagator_ * psi;
  psi.normalize();
  for (int b : bonds) {
    if (b < 0 || b >= static_cast<int>(jumps_.size())) throw ScheduleMismatchError(fmt::format("no bond {}", b));
    FockVector next = jumps_[b] * psi;
    const double norm = next.norm();
    if (!(norm >= 1e-12)) {
      throw ScheduleMismatchError(fmt::format("forced jump at bond {} annihilates the state", b));
    }
    psi = next / norm;
  }
}

double OracleDeviation::max() const { return std::max({G, S_ent, S_cl, delta_n, J}); }

OracleDeviation oracle_check(const TrajectoryConfig& config) {
  const TrajectoryRecord recorded = run_trajectory(config, JumpSchedule::stochastic());
  const TrajectoryEngine engine(config);
  const Oracle oracle(config);

  OracleDeviation dev;
  SlaterState gauss = engine.initial_state();
  FockVector psi = oracle.initial_state();

  const auto compare = [&](double time) {
    const CorrelationMatrix Gg = skintraj::correlation_matrix(gauss);
    const CorrelationMatrix Ge = correlation_matrix(psi, oracle.basis());
    dev.G = std::max(dev.G, (Gg - Ge).cwiseAbs().maxCoeff());
    const ObservableSet og = measure(gauss, time);
    const ObservableSet oe = observables(psi, oracle.basis(), time);
    dev.S_ent = std::max(dev.S_ent, std::abs(og.S_ent - oe.S_ent));
    dev.S_cl = std::max(dev.S_cl, std::abs(og.S_cl - oe.S_cl));
    dev.delta_n = std::max(dev.delta_n, std::abs(og.delta_n - oe.delta_n));
    dev.J = std::max(dev.J, std::abs(og.current_J - oe.current_J));
    ++dev.steps_compared;
  };

  compare(0.0);
  std::size_t cursor = 0;
  std::vector<int> bonds;
  for (long s = 1; s <= config.steps(); ++s) {
    bonds.clear();
    while (cursor < recorded.jump_log.size() && recorded.jump_log[cursor].step == s) {
      bonds.push_back(recorded.jump_log[cursor++].bond);
    }
    engine.advance(gauss, s, std::span<const int>(bonds));
    oracle.step(psi, bonds);
    dev.jumps_replayed += bonds.size();
    compare(static_cast<double>(s) * config.dt);
  }
  return dev;
}

}  // namespace skintraj::ed
