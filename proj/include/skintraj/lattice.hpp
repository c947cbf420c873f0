#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace skintraj {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

enum class Boundary { Open, Periodic };

std::string_view to_string(Boundary bc);
Boundary parse_boundary(std::string_view text);

/// Parameters of the monitored chain.
///
/// `p <= 1` is accepted but lies in the singular-dispersion regime where the
/// hopping sum does not converge as L grows; see `singular_dispersion()`.
struct LatticeParams {
  int L = 0;
  double p = 2.0;
  double t = 1.0;
  double gamma = 0.0;
  double theta = 0.0;
  Boundary bc = Boundary::Open;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  bool singular_dispersion() const { return p <= 1.0; }
};

struct SingleParticleMatrix {
  CMatrix entries;
  bool hermitian = true;

  int dim() const { return static_cast<int>(entries.rows()); }
};

struct ComplexSpectrum {
  std::vector<Complex> eigenvalues;
  Boundary bc = Boundary::Open;
};

class EigenSolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hopping distance between sites i and j (0-based). PBC uses the minimal image.
int hop_distance(int i, int j, int L, Boundary bc);

/// A nearest-neighbour measurement bond (left, right) with right = left + 1 mod L.
struct Bond {
  int left;
  int right;
};

/// OBC: L-1 bonds. PBC: L bonds, the last one wrapping from site L-1 to 0.
std::vector<Bond> measurement_bonds(int L, Boundary bc);

SingleParticleMatrix build_h0(const LatticeParams& params);

/// h0 plus the bond terms of the no-jump generator. With
/// `drop_overall_dissipation` the uniform -i gamma/4 (n_i + n_{i+1}) part is
/// omitted, leaving the Hatano-Nelson-like matrix whose spectrum is plotted.
///
/// For PBC with L = 2 the wrap bond is the reversed copy of bond 0, so the
/// antisymmetric gamma/4 terms cancel while the diagonal still counts both
/// bonds.
SingleParticleMatrix build_h_eff(const LatticeParams& params, bool drop_overall_dissipation);

/// Eigenvalues sorted lexicographically by (real, imag).
ComplexSpectrum spectrum(const SingleParticleMatrix& h, Boundary bc_tag = Boundary::Open);

/// One-sided Hausdorff distance: max over `from` of the distance to the nearest point of `to`.
double hausdorff_distance(const ComplexSpectrum& from, const ComplexSpectrum& to);

/// Truncated group velocity v_k = -2 sum_{m=1}^{cutoff} m sin(mk) / m^p.
/// For p <= 2 the partial sums converge slowly (or not at all), so the value
/// depends on the cutoff.
double mode_velocity(double k, double p, int m_cutoff);

/// L-1 for OBC, L/2 for PBC.
int default_velocity_cutoff(int L, Boundary bc);

enum class Mover { Right, Left };

/// Momentum weight |g(k)|^2 of the measured quasi-mode, normalised to average 1/2.
double quasimode_weight(double k, Mover direction);

}  // namespace skintraj
