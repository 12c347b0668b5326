#include "palmdpp/palm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "palmdpp/errors.hpp"

namespace palmdpp {

namespace {

constexpr double kDistinct = 1e-9;
constexpr double kZeroDiagonal = 1e-14;

// c_{n-1} / c_n for n >= 1.
std::vector<double> norm_ratios(const KernelModel& model) {
  const auto& l = model.log_norms_sq();
  std::vector<double> r(l.size(), 0.0);
  for (std::size_t n = 1; n < l.size(); ++n) r[n] = std::exp(0.5 * (l[n - 1] - l[n]));
  return r;
}

// Divides sum_n a_n z^n / c_n (degree a.size()-1) by (z - p) in the same
// normalized coefficients. Returns the quotient; `rem` gets c_0 * remainder.
CVector divide_linear(const CVector& a, Complex p, const std::vector<double>& ratio, Complex& rem) {
  const Eigen::Index d = a.size() - 1;
  CVector b = CVector::Zero(std::max<Eigen::Index>(d, 0));
  if (d == 0) {
    rem = a[0];
    return b;
  }
  b[d - 1] = ratio[static_cast<std::size_t>(d)] * a[d];
  for (Eigen::Index n = d - 1; n >= 1; --n) b[n - 1] = ratio[static_cast<std::size_t>(n)] * (a[n] + p * b[n]);
  rem = a[0] + p * b[0];
  return b;
}

// Multiplies by (s*z - t): h_n = s * (c_n / c_{n-1}) b_{n-1} - t b_n.
CVector multiply_linear(const CVector& b, Complex s, Complex t, const std::vector<double>& ratio) {
  CVector h = CVector::Zero(b.size() + 1);
  for (Eigen::Index n = 0; n <= b.size(); ++n) {
    Complex v(0.0, 0.0);
    if (n >= 1) v += s * b[n - 1] / ratio[static_cast<std::size_t>(n)];
    if (n < b.size()) v -= t * b[n];
    h[n] = v;
  }
  return h;
}

// Weighted value sum_n coef_n * features_n(z) for a coefficient vector that may
// be shorter than the basis.
Complex eval_coeffs(const KernelModel& model, const CVector& coef, Complex z) {
  const CVector f = model.features(z);
  Complex s(0.0, 0.0);
  for (Eigen::Index n = 0; n < coef.size(); ++n) s += coef[n] * f[n];
  return s;
}

// 0 when p and q are the same set; throws when they partly overlap; 1 otherwise.
int overlap_state(const PalmAnchor& p, const PalmAnchor& q) {
  std::size_t shared = 0;
  for (const auto& a : p.points)
    for (const auto& b : q.points)
      if (std::abs(a - b) <= kDistinct) ++shared;
  if (shared == 0) return 1;
  if (shared == p.size() && shared == q.size()) return 0;
  throw DegenerateInputError("zeros and poles of the relation coincide");
}

}  // namespace

void validate_anchor(const KernelModel& model, const PalmAnchor& anchor) {
  for (const auto& z : anchor.points) require_in_domain(model.domain(), z);
  for (std::size_t i = 0; i < anchor.size(); ++i)
    for (std::size_t j = i + 1; j < anchor.size(); ++j)
      if (std::abs(anchor.points[i] - anchor.points[j]) <= kDistinct) {
        std::ostringstream os;
        os << "anchor points " << i << " and " << j << " are not distinct";
        throw DegenerateInputError(os.str());
      }
  if (anchor.size() > static_cast<std::size_t>(model.rank()))
    throw PreconditionError("anchor has more points than the model's rank");
}

KernelModel palm_downdate_once(const KernelModel& model, Complex q) {
  require_in_domain(model.domain(), q);
  const CVector f = model.features(q);
  const CMatrix C = model.coefficients();
  const CVector c = C * f;
  const double cn2 = c.squaredNorm();
  if (!(cn2 >= kZeroDiagonal * f.squaredNorm())) return model;
  const Eigen::Index m = c.size();
  // Householder reflection sending c to a multiple of the last unit vector.
  const double cn = std::sqrt(cn2);
  const Complex last = c[m - 1];
  const Complex phase = std::abs(last) > 0.0 ? last / std::abs(last) : Complex(1.0, 0.0);
  CVector v = c;
  v[m - 1] += phase * cn;
  const double vn2 = v.squaredNorm();
  CMatrix HC = C;
  HC.noalias() -= (2.0 / vn2) * v * (v.adjoint() * C);
  return model.with_coefficients(HC.topRows(m - 1));
}

KernelModel palm_downdate(const KernelModel& model, const PalmAnchor& anchor) {
  validate_anchor(model, anchor);
  KernelModel out = model;
  for (const auto& q : anchor.points) out = palm_downdate_once(out, q);
  return out;
}

KernelModel vanishing_at_origin_subspace(const KernelModel& model, int l) {
  if (!model.radial()) throw PreconditionError("vanishing_at_origin_subspace needs a radial-basis model");
  if (l < 0 || l >= model.basis_size()) throw PreconditionError("vanishing order must satisfy 0 <= l < N");
  if (l == 0) return model;
  const int N = model.basis_size();
  CMatrix C = CMatrix::Zero(N - l, N);
  for (int i = 0; i < N - l; ++i) C(i, i + l) = 1.0;
  return model.with_coefficients(std::move(C));
}

double relation_check_fock(const KernelModel& model, const PalmAnchor& p, const PalmAnchor& q) {
  if (model.domain() != Domain::Plane) throw PreconditionError("Fock relation needs a plane model");
  if (p.size() != q.size()) throw PreconditionError("Fock relation needs tuples of the same length");
  validate_anchor(model, p);
  validate_anchor(model, q);
  if (overlap_state(p, q) == 0) return 0.0;

  const auto ratio = norm_ratios(model);
  const CMatrix Cp = palm_downdate(model, p).coefficients();
  const CMatrix Cq = palm_downdate(model, q).coefficients();
  const CMatrix Pq = Cq.transpose() * Cq.conjugate();
  double worst = 0.0;
  for (Eigen::Index row = 0; row < Cp.rows(); ++row) {
    CVector a = Cp.row(row).transpose();
    for (const auto& pj : p.points) {
      const double scale = a.norm() * model.features(pj).norm();
      Complex rem;
      CVector b = divide_linear(a, pj, ratio, rem);
      const double lw = std::exp(model.log_weight_factor(pj) - 0.5 * model.log_norms_sq()[0]);
      worst = std::max(worst, std::abs(rem) * lw / scale);
      a = std::move(b);
    }
    for (const auto& qj : q.points) a = multiply_linear(a, 1.0, qj, ratio);
    const double an = a.norm();
    for (const auto& qj : q.points)
      worst = std::max(worst, std::abs(eval_coeffs(model, a, qj)) / (an * model.features(qj).norm()));
    worst = std::max(worst, (a - Pq * a).norm() / an);
  }
  return worst;
}

double relation_check_bergman(const KernelModel& model, const PalmAnchor& p, const PalmAnchor& q) {
  if (model.domain() != Domain::UnitDisc) throw PreconditionError("Bergman relation needs a disc model");
  validate_anchor(model, p);
  validate_anchor(model, q);
  if (overlap_state(p, q) == 0) return 0.0;

  const auto ratio = norm_ratios(model);
  const CMatrix Cp = palm_downdate(model, p).coefficients();
  auto blaschke = [](const PalmAnchor& t, Complex z) {
    Complex b(1.0, 0.0);
    for (const auto& a : t.points) b *= (z - a) / (1.0 - std::conj(a) * z);
    return b;
  };
  double worst = 0.0;
  for (Eigen::Index row = 0; row < Cp.rows(); ++row) {
    const CVector f = Cp.row(row).transpose();
    CVector a = f;
    for (const auto& pj : p.points) {
      const double scale = a.norm() * model.features(pj).norm();
      Complex rem;
      CVector b = divide_linear(a, pj, ratio, rem);
      const double lw = std::exp(model.log_weight_factor(pj) - 0.5 * model.log_norms_sq()[0]);
      worst = std::max(worst, std::abs(rem) * lw / scale);
      a = std::move(b);
    }
    // a * prod(1 - conj(p_j) z) * b_q is the transformed function.
    for (const auto& pj : p.points) a = multiply_linear(a, -std::conj(pj), -1.0, ratio);
    const double an = a.norm();
    for (const auto& qj : q.points) {
      const Complex v = eval_coeffs(model, a, qj) * blaschke(q, qj);
      worst = std::max(worst, std::abs(v) / (an * model.features(qj).norm()));
    }
    // Directional limits of f * b_q / b_p at each p_j, first-order extrapolated.
    for (const auto& pj : p.points) {
      const double eps = 1e-5 * std::min(1.0, 1.0 - std::abs(pj));
      auto h = [&](Complex z) { return eval_coeffs(model, f, z) * blaschke(q, z) / blaschke(p, z); };
      std::vector<Complex> lims;
      double mag = 0.0;
      for (int k = 0; k < 4; ++k) {
        const Complex u = std::polar(1.0, 0.5 * kPi * k);
        const Complex l = 2.0 * h(pj + 0.5 * eps * u) - h(pj + eps * u);
        lims.push_back(l);
        mag = std::max(mag, std::abs(l));
      }
      double spread = 0.0;
      for (const auto& l : lims) spread = std::max(spread, std::abs(l - lims[0]));
      const double ref = std::max(mag, an * model.features(pj).norm());
      worst = std::max(worst, spread / ref);
    }
  }
  return worst;
}

}  // namespace palmdpp
