#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "skintraj/gaussian_state.hpp"
#include "skintraj/trajectory.hpp"

namespace skintraj::ed {

/// Largest chain the oracle accepts (C(14, 7) = 3432 at half filling).
inline constexpr int kMaxSites = 14;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ScheduleMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Occupation words; bit i is site i. Fock state |w> = c^dag_{s1} ... c^dag_{sN} |0>
/// with s1 < ... < sN.
class FockBasis {
 public:
  /// Fixed-N sector, words in increasing numeric order.
  FockBasis(int L, int N);
  /// All 2^L words (used for operators that change N).
  static FockBasis full(int L);

  int sites() const { return L_; }
  /// -1 for the full space.
  int particles() const { return N_; }
  std::size_t size() const { return words_.size(); }
  std::uint32_t word(std::size_t i) const { return words_[i]; }
  /// Position of `w`, or -1 if absent.
  long index(std::uint32_t w) const;

 private:
  FockBasis() = default;
  int L_ = 0;
  int N_ = -1;
  std::vector<std::uint32_t> words_;
  std::unordered_map<std::uint32_t, std::size_t> index_;
};

using FockVector = CVector;

/// Sign of moving an operator on `site` past the occupied sites below it.
int jordan_wigner_sign(std::uint32_t w, int site);

/// sum_ab m_ab c^dag_a c_b on the basis.
CMatrix lift_bilinear(const CMatrix& m, const FockBasis& basis);
/// c_site (requires the full basis).
CMatrix lift_annihilator(int site, const FockBasis& basis);
CMatrix lift_creator(int site, const FockBasis& basis);
CMatrix lift_number(int site, const FockBasis& basis);

/// (1/2) exp(i theta n_right) xi^dag xi.
CMatrix lift_jump(const JumpOperator& jump, const FockBasis& basis);

/// exp(-i H dt) from the eigendecomposition of H; falls back to Pade
/// scaling-and-squaring when the eigenvector matrix is ill-conditioned.
CMatrix sector_exponential(const CMatrix& H, double dt);

/// Amplitudes det(U[occupied rows, :]) of a Slater determinant.
FockVector from_slater(const SlaterState& state, const FockBasis& basis);

/// G_mn = <psi| c^dag_m c_n |psi> for a normalised sector vector.
CorrelationMatrix correlation_matrix(const FockVector& psi, const FockBasis& basis);

/// Von Neumann entropy of the first `length` sites via the exact reduced density matrix.
double prefix_entropy(const FockVector& psi, const FockBasis& basis, int length);

/// Observables from exact expectation values; S_ent from the partial trace over A = [1, L/4].
ObservableSet observables(const FockVector& psi, const FockBasis& basis, double time);

/// Exact replay of a trajectory configuration in the fixed-N sector.
class Oracle {
 public:
  explicit Oracle(const TrajectoryConfig& config);

  const FockBasis& basis() const { return basis_; }
  const CMatrix& hamiltonian() const { return h_eff_; }
  const CMatrix& propagator() const { return propagator_; }

  FockVector initial_state() const;

  /// Drift, normalise, then apply each forced bond's jump with normalisation.
  /// Throws ScheduleMismatchError when a forced jump annihilates the state.
  void step(FockVector& psi, std::span<const int> bonds) const;

 private:
  TrajectoryConfig config_;
  FockBasis basis_;
  CMatrix h_eff_;
  CMatrix propagator_;
  std::vector<CMatrix> jumps_;
};

struct OracleDeviation {
  double G = 0.0;
  double S_ent = 0.0;
  double S_cl = 0.0;
  double delta_n = 0.0;
  double J = 0.0;
  std::size_t steps_compared = 0;
  std::size_t jumps_replayed = 0;

  double max() const;
};

/// Runs the Gaussian trajectory stochastically, then replays its jump log
/// through both the Gaussian engine and the oracle, comparing every step.
OracleDeviation oracle_check(const TrajectoryConfig& config);

}  // namespace skintraj::ed
