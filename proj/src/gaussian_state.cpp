#include "skintraj/gaussian_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <fmt/format.h>

namespace skintraj {

namespace {

constexpr Complex kI{0.0, 1.0};

// 0 ln 0 = 0; inputs are clamped to [0, 1] first.
double xlogx(double x) { return x <= 0.0 ? 0.0 : x * std::log(x); }

double site_entropy(double n) {
  n = std::clamp(n, 0.0, 1.0);
  return -xlogx(n) - xlogx(1.0 - n);
}

// <a|U_j> for the quasi-mode a = e_left - i e_right.
Complex quasimode_overlap(const CMatrix& U, const JumpOperator& jump, Eigen::Index column) {
  return U(jump.left, column) + kI * U(jump.right, column);
}

}  // namespace

SlaterState::SlaterState(CMatrix orbitals) : orbitals_(std::move(orbitals)) {
  if (orbitals_.cols() > orbitals_.rows()) {
    throw std::invalid_argument(
        fmt::format("SlaterState: {} orbitals do not fit on {} sites", orbitals_.cols(), orbitals_.rows()));
  }
}

SlaterState SlaterState::from_occupation(std::span<const int> pattern) {
  const auto L = static_cast<Eigen::Index>(pattern.size());
  if (std::any_of(pattern.begin(), pattern.end(), [](int b) { return b != 0 && b != 1; })) {
    throw std::invalid_argument("from_occupation: pattern entries must be 0 or 1");
  }
  const auto N = std::count(pattern.begin(), pattern.end(), 1);
  if (N == 0) throw std::invalid_argument("from_occupation: pattern has no occupied site");
  CMatrix U = CMatrix::Zero(L, N);
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < L; ++i) {
    if (pattern[i] != 0) U(i, col++) = 1.0;
  }
  return SlaterState(std::move(U));
}

double SlaterState::orthonormality_error() const {
  const CMatrix overlap = orbitals_.adjoint() * orbitals_;
  return (overlap - CMatrix::Identity(overlap.rows(), overlap.cols())).cwiseAbs().maxCoeff();
}

void SlaterState::orthonormalize() {
  const Eigen::Index L = orbitals_.rows();
  const Eigen::Index N = orbitals_.cols();
  Eigen::HouseholderQR<CMatrix> qr(orbitals_);
  const auto r_diag = qr.matrixQR().diagonal().cwiseAbs();
  const double largest = r_diag.maxCoeff();
  const double smallest = r_diag.minCoeff();
  if (!std::isfinite(largest) || !(smallest > 1e-14 * largest) || !(smallest > std::numeric_limits<double>::min())) {
    throw RankDeficiencyError(fmt::format(
        "orbitals became rank deficient (|R_jj| ranges {:.3e}..{:.3e})", smallest, largest));
  }
  orbitals_ = qr.householderQ() * CMatrix::Identity(L, N);
}

void SlaterState::propagate(const CMatrix& K) {
  orbitals_ = K * orbitals_;
  orthonormalize();
}

JumpOperator JumpOperator::on_bond(const Bond& b, int bond_index, double theta) {
  return {bond_index, b.left, b.right, theta};
}

CVector JumpOperator::a_vector(int L) const {
  CVector a = CVector::Zero(L);
  a(left) = 1.0;
  a(right) = -kI;
  return a;
}

std::vector<JumpOperator> jump_operators(const LatticeParams& params) {
  std::vector<JumpOperator> out;
  const auto bonds = measurement_bonds(params.L, params.bc);
  out.reserve(bonds.size());
  for (std::size_t i = 0; i < bonds.size(); ++i) {
    out.push_back(JumpOperator::on_bond(bonds[i], static_cast<int>(i), params.theta));
  }
  return out;
}

CorrelationMatrix correlation_matrix(const SlaterState& state) {
  const CMatrix& U = state.orbitals();
  return U.conjugate() * U.transpose();
}

CorrelationMatrix correlation_block(const SlaterState& state, int first, int length) {
  const auto rows = state.orbitals().middleRows(first, length);
  return rows.conjugate() * rows.transpose();
}

std::vector<double> density(const SlaterState& state) {
  const CMatrix& U = state.orbitals();
  std::vector<double> n(U.rows());
  for (Eigen::Index i = 0; i < U.rows(); ++i) n[i] = U.row(i).squaredNorm();
  return n;
}

SlaterState apply_propagator(SlaterState state, const CMatrix& K) {
  state.propagate(K);
  return state;
}

double jump_expectation(const SlaterState& state, const JumpOperator& jump) {
  const CMatrix& U = state.orbitals();
  double sum = 0.0;
  for (Eigen::Index j = 0; j < U.cols(); ++j) sum += std::norm(quasimode_overlap(U, jump, j));
  return 0.5 * sum;
}

double jump_expectation(const CorrelationMatrix& G, const JumpOperator& jump) {
  const int i = jump.left;
  const int j = jump.right;
  const Complex value = G(i, i) + G(j, j) + kI * G(i, j) - kI * G(j, i);
  return 0.5 * value.real();
}

SlaterState apply_jump(SlaterState state, const JumpOperator& jump) {
  CMatrix U = std::move(state).take_orbitals();
  const Eigen::Index N = U.cols();

  Eigen::Index pivot = 0;
  double best = -1.0;
  for (Eigen::Index j = 0; j < N; ++j) {
    const double mag = std::abs(quasimode_overlap(U, jump, j));
    if (mag > best) {
      best = mag;
      pivot = j;
    }
  }
  if (!(best >= kPivotTolerance)) {
    throw UnoccupiedJumpError(
        fmt::format("jump on unoccupied quasi-mode at bond {} (max overlap {:.3e})", jump.bond, best));
  }
  if (pivot != 0) U.col(0).swap(U.col(pivot));

  const Complex o0 = quasimode_overlap(U, jump, 0);
  for (Eigen::Index j = 1; j < N; ++j) {
    const Complex oj = quasimode_overlap(U, jump, j);
    if (oj != Complex(0.0)) U.col(j) -= (oj / o0) * U.col(0);
  }
  U.col(0).setZero();
  U(jump.left, 0) = M_SQRT1_2;
  U(jump.right, 0) = -kI * M_SQRT1_2;

  if (jump.theta != 0.0) U.row(jump.right) *= std::polar(1.0, jump.theta);

  SlaterState out(std::move(U));
  out.orthonormalize();
  return out;
}

double binary_entropy(double lambda) {
  constexpr double eps = 1e-14;
  const double x = std::clamp(lambda, eps, 1.0 - eps);
  return -x * std::log(x) - (1.0 - x) * std::log(1.0 - x);
}

double entanglement_entropy(const CorrelationMatrix& G, SiteInterval subsystem) {
  if (subsystem.length <= 0) return 0.0;
  if (subsystem.first < 0 || subsystem.first + subsystem.length > G.rows()) {
    throw std::out_of_range("entanglement_entropy: subsystem outside the chain");
  }
  const CMatrix block = G.block(subsystem.first, subsystem.first, subsystem.length, subsystem.length);
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(block, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw EigenSolverError("entanglement_entropy: eigensolver failed");
  double s = 0.0;
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) s += binary_entropy(solver.eigenvalues()(k));
  return s;
}

double entanglement_entropy(const SlaterState& state, SiteInterval subsystem) {
  if (subsystem.length <= 0) return 0.0;
  if (subsystem.first < 0 || subsystem.first + subsystem.length > state.sites()) {
    throw std::out_of_range("entanglement_entropy: subsystem outside the chain");
  }
  const CorrelationMatrix block = correlation_block(state, subsystem.first, subsystem.length);
  return entanglement_entropy(block, {0, subsystem.length});
}

double classical_entropy(std::span<const double> occupations) {
  double s = 0.0;
  for (double n : occupations) s += site_entropy(n);
  return s;
}

double classical_entropy(const SlaterState& state) { return classical_entropy(density(state)); }

double density_imbalance(std::span<const double> occupations) {
  const std::size_t half = occupations.size() / 2;
  double left = 0.0;
  double right = 0.0;
  for (std::size_t i = 0; i < occupations.size(); ++i) (i < half ? left : right) += occupations[i];
  const double total = left + right;
  if (!(total > 0.0)) throw std::invalid_argument("density_imbalance: no particles");
  return std::abs(left - right) / total;
}

double density_imbalance(const SlaterState& state) { return density_imbalance(density(state)); }

double particle_current(const CorrelationMatrix& G) {
  const Eigen::Index L = G.rows();
  Complex sum = 0.0;
  for (Eigen::Index n = 0; n < L; ++n) {
    const Eigen::Index m = (n + 1) % L;
    sum += G(n, m) - G(m, n);
  }
  return (kI * sum).real() / static_cast<double>(L);
}

double particle_current(const SlaterState& state) {
  // Only the nearest-neighbour entries of G are needed: J = -(2/L) sum Im G_{n,n+1}.
  const CMatrix& U = state.orbitals();
  const Eigen::Index L = U.rows();
  double sum = 0.0;
  for (Eigen::Index n = 0; n < L; ++n) {
    const Eigen::Index m = (n + 1) % L;
    sum += U.row(n).dot(U.row(m)).imag();
  }
  return -2.0 * sum / static_cast<double>(L);
}

ObservableSet measure(const SlaterState& state, double time) {
  ObservableSet obs;
  obs.time = time;
  obs.density = density(state);
  obs.S_ent = entanglement_entropy(state, quarter_chain(state.sites()));
  obs.S_cl = classical_entropy(obs.density);
  obs.delta_n = density_imbalance(obs.density);
  obs.current_J = particle_current(state);
  return obs;
}

ObservableSet measure(const CorrelationMatrix& G, double time) {
  ObservableSet obs;
  obs.time = time;
  obs.density.resize(G.rows());
  for (Eigen::Index i = 0; i < G.rows(); ++i) obs.density[i] = G(i, i).real();
  obs.S_ent = entanglement_entropy(G, quarter_chain(static_cast<int>(G.rows())));
  obs.S_cl = classical_entropy(obs.density);
  obs.delta_n = density_imbalance(obs.density);
  obs.current_J = particle_current(G);
  return obs;
}

}  // namespace skintraj
