#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "skintraj/lattice.hpp"

namespace skintraj {

class RankDeficiencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnoccupiedJumpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pure fermionic Gaussian state stored as an L x N matrix of orthonormal
/// orbitals. The state is invariant under column operations, so only the
/// column span matters physically.
class SlaterState {
 public:
  SlaterState() = default;
  /// Takes orbitals as given; callers are responsible for orthonormality
  /// (use `orthonormalize()` otherwise).
  explicit SlaterState(CMatrix orbitals);

  /// One standard-basis orbital per occupied site, in site order.
  static SlaterState from_occupation(std::span<const int> pattern);

  int sites() const { return static_cast<int>(orbitals_.rows()); }
  int particles() const { return static_cast<int>(orbitals_.cols()); }
  const CMatrix& orbitals() const { return orbitals_; }

  /// max |U^dagger U - I|.
  double orthonormality_error() const;

  /// Replaces the orbitals by the Q factor of a thin QR. Throws
  /// RankDeficiencyError when the columns have (numerically) collapsed.
  void orthonormalize();

  /// U <- K U followed by re-orthonormalisation.
  void propagate(const CMatrix& K);

  CMatrix take_orbitals() && { return std::move(orbitals_); }

 private:
  CMatrix orbitals_;
};

/// Measured quasi-mode xi^dagger_i = c^dagger_i - i c^dagger_{i+1} plus the
/// feedback phase exp(i theta n_{i+1}). Acting with the jump is
/// L_i = (1/2) exp(i theta n_{i+1}) xi^dagger_i xi_i, so <L^dagger L> = <P_i>
/// with P_i = xi^dagger xi / 2 a projector.
struct JumpOperator {
  int bond = 0;
  int left = 0;
  int right = 1;
  double theta = 0.0;

  static JumpOperator on_bond(const Bond& b, int bond_index, double theta);

  /// Length-L vector a with a_left = 1, a_right = -i.
  CVector a_vector(int L) const;
};

std::vector<JumpOperator> jump_operators(const LatticeParams& params);

using CorrelationMatrix = CMatrix;

/// G_mn = <c^dagger_m c_n> = sum_k conj(U_mk) U_nk.
CorrelationMatrix correlation_matrix(const SlaterState& state);

/// Block of G restricted to sites [first, first + length).
CorrelationMatrix correlation_block(const SlaterState& state, int first, int length);

/// Site occupations <n_i>.
std::vector<double> density(const SlaterState& state);

SlaterState apply_propagator(SlaterState state, const CMatrix& K);

/// <P_i> = (1/2) sum_j |<a|U_j>|^2, in [0, 1].
double jump_expectation(const SlaterState& state, const JumpOperator& jump);

/// Same quantity through the correlation matrix:
/// (1/2)(G_ii + G_jj + i G_ij - i G_ji) with j = i + 1.
double jump_expectation(const CorrelationMatrix& G, const JumpOperator& jump);

/// Overlaps below this magnitude count as zero in apply_jump.
inline constexpr double kPivotTolerance = 1e-12;

/// Normalised L_i |psi>. Pivots on the column with the largest overlap,
/// projects it onto a / |a|, removes the a-component from the remaining
/// columns, applies the feedback phase to row `right` and re-orthonormalises.
/// Throws UnoccupiedJumpError if every overlap is below kPivotTolerance.
SlaterState apply_jump(SlaterState state, const JumpOperator& jump);

/// Contiguous site range [first, first + length), 0-based.
struct SiteInterval {
  int first = 0;
  int length = 0;
};

/// Default bipartition A = [1, L/4].
inline SiteInterval quarter_chain(int L) { return {0, L / 4}; }

/// Binary entropy of an occupation with eigenvalue clamping to [1e-14, 1 - 1e-14].
double binary_entropy(double lambda);

/// Natural-log entanglement entropy of the interval, from the eigenvalues of the G block.
double entanglement_entropy(const SlaterState& state, SiteInterval subsystem);
double entanglement_entropy(const CorrelationMatrix& G, SiteInterval subsystem);

/// Site-wise binary entropy of the occupations, 0 ln 0 = 0.
double classical_entropy(std::span<const double> occupations);
double classical_entropy(const SlaterState& state);

/// |N_left - N_right| / N with left = first floor(L/2) sites.
double density_imbalance(std::span<const double> occupations);
double density_imbalance(const SlaterState& state);

/// J = (i/L) sum_n (G_{n,n+1} - G_{n+1,n}) with periodic indexing.
double particle_current(const CorrelationMatrix& G);
double particle_current(const SlaterState& state);

struct ObservableSet {
  double time = 0.0;
  double S_ent = 0.0;
  double S_cl = 0.0;
  double delta_n = 0.0;
  double current_J = 0.0;
  std::vector<double> density;
};

/// All observables of the state; S_ent uses A = [1, L/4].
ObservableSet measure(const SlaterState& state, double time);

/// Same from a full correlation matrix (used for the exact-diagonalisation side).
ObservableSet measure(const CorrelationMatrix& G, double time);

}  // namespace skintraj
