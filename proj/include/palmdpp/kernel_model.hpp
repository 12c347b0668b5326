#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "palmdpp/quadrature.hpp"
#include "palmdpp/types.hpp"
#include "palmdpp/weight.hpp"

namespace palmdpp {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Finite-rank reproducing kernel. The space is spanned by the rows of an M x N
/// coefficient matrix C (orthonormal rows) acting on the normalized monomials
/// e_n(z) = z^n / c_n, n < N. A freshly built model has C = I (the radial case);
/// Palm downdates produce general C. Immutable and cheap to copy.
class KernelModel {
public:
  /// Orthonormal monomial truncation of rank N. Throws ConfigError when the
  /// weight does not fit the domain or the quadrature spec is invalid.
  static KernelModel build(Domain domain, Weight weight, int N, QuadratureSpec quadrature = {});

  /// Same space data, new coefficient matrix (rows must be orthonormal).
  KernelModel with_coefficients(CMatrix coefficients) const;

  Domain domain() const noexcept;
  const Weight& weight() const noexcept;
  const QuadratureSpec& quadrature() const noexcept;
  const IntegrationDomain& integration_domain() const noexcept;
  /// Number of basis functions (the rank of the projection).
  int rank() const noexcept;
  /// Number of monomials the basis is expanded over.
  int basis_size() const noexcept;
  bool radial() const noexcept;
  /// C; identity when radial().
  CMatrix coefficients() const;
  const std::vector<double>& log_norms_sq() const noexcept;

  /// -psi(z) on the plane, log sqrt(omega(z)) on the disc.
  double log_weight_factor(Complex z) const;

  /// Weighted normalized monomials e_n(z) * exp(log_weight_factor(z)), n < N.
  void features(Complex z, Complex* out) const;
  CVector features(Complex z) const;

  /// Weighted orthonormal basis values C * features(z), length rank().
  CVector basis(Complex z) const;
  /// Columns are basis(z_i).
  CMatrix basis_matrix(std::span<const Complex> points) const;

  /// Sum_j phi_j(z) conj(phi_j(w)) with the unweighted basis.
  Complex kernel(Complex z, Complex w) const;
  /// kernel(z, w) * exp(log_weight_factor(z) + log_weight_factor(w)).
  Complex weighted(Complex z, Complex w) const;
  /// One-point intensity with respect to Lebesgue measure.
  double intensity(Complex z) const;

  /// Expected number of points with |z| > r.
  double expected_beyond(double r) const;

private:
  struct State;
  explicit KernelModel(std::shared_ptr<const State> s) : s_(std::move(s)) {}
  void check_point(Complex z) const;
  std::shared_ptr<const State> s_;
};

/// sum_i w_i h(z_i) a(z_i) a(z_i)^* over the region, a = model.basis. This is
/// the matrix of the multiplication operator by h * chi_region compressed to
/// the range of the projection. Non-finite h values at nodes are an error.
CMatrix region_gram(const KernelModel& model, const Region& region, const std::function<double(Complex)>& h,
                    std::span<const SingularPoint> singular = {});

/// For radial models and radial h: integrals of h(r) against each mode density
/// |e_n|^2 over the region (the diagonal of region_gram).
std::vector<double> radial_mode_integrals(const KernelModel& model, const Region& region,
                                          const std::function<double(double)>& h);

/// Integral of the intensity over the region (expected point count).
double expected_count(const KernelModel& model, const Region& region);

/// ||z^n|| data exposed for reporting.
std::vector<double> kernel_monomial_norms(const KernelModel& model);

/// det[weighted(z_i, z_j)]: the k-point correlation function.
double k_correlation(const KernelModel& model, std::span<const Complex> points);

struct ChristScan {
  double maxDiagonal = 0.0;
  /// max over pairs of |K(z,w)|^2 exp(delta |z-w|) (weighted kernel).
  double christConstant = 0.0;
  /// log(christConstant / maxDiagonal^2): how far the off-diagonal envelope
  /// exceeds the diagonal bound.
  double maxOffDiagonalDecayViolation = 0.0;
  /// Least-squares rate c in |K(z,w)|^2 / (K(z,z) K(w,w)) ~ exp(-c |z-w|^2).
  double decayRate = 0.0;
  std::size_t pairs = 0;
};

ChristScan christ_bound_scan(const KernelModel& model, std::span<const Complex> grid, double delta = 0.5);

/// Square grid with spacing h inside |z| <= radius.
std::vector<Complex> square_grid(double radius, double h);

}  // namespace palmdpp
