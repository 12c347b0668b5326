#include "palmdpp/kernel_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "palmdpp/errors.hpp"

namespace palmdpp {

struct KernelModel::State {
  Domain domain = Domain::Plane;
  Weight weight = Weight::fock_gaussian();
  QuadratureSpec quad;
  IntegrationDomain idom;
  int N = 0;
  int M = 0;
  bool radial = true;
  CMatrix C;
  std::vector<double> logc2;
  std::vector<double> ratio;   // c_{n-1} / c_n
  std::vector<double> ratio2;  // c_{n-1}^2 / c_n^2
  double c0sq = 0.0;
  std::vector<double> modeMass;  // diagonal of C^* C
};

namespace {

// 2*pi * int_a^b h(r) r^(2n+1) w(r) dr / c_n^2 for every n < count, with panels
// matching the 2-D rules.
std::vector<double> mode_integrals(const Weight& weight, const std::vector<double>& logc2, int count,
                                   const IntegrationDomain& dom, double a, double b, int nodes,
                                   const std::function<double(double)>& h) {
  std::vector<double> out(count, 0.0);
  a = std::max(a, 0.0);
  b = std::min(b, dom.edge);
  if (!(b > a)) return out;
  std::vector<double> breaks{a, b};
  if (dom.graded) {
    for (double r = 0.125; r < 0.5; r += 0.125) breaks.push_back(r);
    for (int k = 1; k <= dom.gradedLevels; ++k) breaks.push_back(dom.edge * (1.0 - std::ldexp(1.0, -k)));
  } else {
    for (double r = 0.5; r < dom.edge; r += 0.5) breaks.push_back(r);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(), [&](double r) { return r < a || r > b; }), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  const GaussRule& gl = gauss_legendre(nodes);
  const double l2pi = std::log(2.0 * kPi);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double half = 0.5 * (breaks[i + 1] - breaks[i]), mid = 0.5 * (breaks[i + 1] + breaks[i]);
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
      const double r = mid + half * gl.nodes[k];
      const double hv = h(r);
      if (hv == 0.0) continue;
      if (!std::isfinite(hv)) throw QuadratureError("integrand is not finite at a quadrature node");
      const double base = l2pi + weight.log_density(r) + std::log(r);
      const double lr2 = 2.0 * std::log(r);
      const double wk = gl.weights[k] * half * hv;
      for (int n = 0; n < count; ++n) out[n] += wk * std::exp(base + n * lr2 - logc2[n]);
    }
  }
  return out;
}

// Probability that mode n lies beyond radius R.
double mode_tail(const Weight& weight, const std::vector<double>& logc2, int n, double R,
                 const IntegrationDomain& /*dom*/) {
  if (const auto* f = std::get_if<FockRadialAlpha>(&weight.kind()))
    return boost::math::gamma_q((2.0 * n + 2.0) / f->alpha, std::pow(R, f->alpha));
  if (std::holds_alternative<FockGaussian>(weight.kind())) return boost::math::gamma_q(n + 1.0, R * R);
  if (const auto* b = std::get_if<BergmanClassical>(&weight.kind())) {
    if (R >= 1.0) return 0.0;
    return boost::math::ibetac(n + 1.0, b->alpha + 1.0, R * R);
  }
  const double end = weight.support_radius();
  if (R >= end) return 0.0;
  auto v = mode_integrals(weight, logc2, n + 1, {end, false, 0}, R, end, 24, [](double) { return 1.0; });
  return std::max(0.0, v[n]);
}

double total_tail(const Weight& weight, const std::vector<double>& logc2, int N, double R,
                  const IntegrationDomain& dom) {
  double t = 0.0;
  for (int n = 0; n < N; ++n) t += mode_tail(weight, logc2, n, R, dom);
  return t;
}

}  // namespace

KernelModel KernelModel::build(Domain domain, Weight weight, int N, QuadratureSpec quadrature) {
  if (N < 1) throw ConfigError("rank must be at least 1");
  if (quadrature.radialNodes < 8 || quadrature.angularNodes < 8)
    throw ConfigError("quadrature node counts must be at least 8");
  if (!weight.compatible_with(domain)) {
    throw ConfigError("weight '" + weight.name() + "' is not compatible with domain '" + std::string(to_string(domain)) +
                      "'");
  }
  auto s = std::make_shared<State>();
  s->domain = domain;
  s->weight = std::move(weight);
  s->quad = quadrature;
  s->N = N;
  s->M = N;
  s->radial = true;
  s->logc2 = log_monomial_norms_sq(s->weight, N);
  s->ratio.assign(N, 0.0);
  s->ratio2.assign(N, 0.0);
  for (int n = 1; n < N; ++n) {
    s->ratio2[n] = std::exp(s->logc2[n - 1] - s->logc2[n]);
    s->ratio[n] = std::exp(0.5 * (s->logc2[n - 1] - s->logc2[n]));
  }
  if (std::holds_alternative<FockGaussian>(s->weight.kind())) {
    s->c0sq = kPi;
  } else if (const auto* b = std::get_if<BergmanClassical>(&s->weight.kind())) {
    s->c0sq = kPi / (b->alpha + 1.0);
  } else if (const auto* f = std::get_if<FockRadialAlpha>(&s->weight.kind())) {
    s->c0sq = 2.0 * kPi / f->alpha * std::tgamma(2.0 / f->alpha);
  } else {
    s->c0sq = std::exp(s->logc2[0]);
  }
  s->modeMass.assign(N, 1.0);

  if (domain == Domain::UnitDisc) {
    const double edge = std::min(1.0, s->weight.support_radius());
    s->idom = {edge, true, static_cast<int>(std::ceil(std::log2(static_cast<double>(N)))) + 12};
  } else {
    const double support = s->weight.support_radius();
    IntegrationDomain probe{support, false, 0};
    if (quadrature.outerRadius > 0.0) {
      const double tail = total_tail(s->weight, s->logc2, N, quadrature.outerRadius, probe);
      if (!(tail < 1e-12)) {
        std::ostringstream os;
        os << "outerRadius " << quadrature.outerRadius << " leaves " << tail << " expected points outside";
        throw ConfigError(os.str());
      }
      s->idom = {std::min(quadrature.outerRadius, support), false, 0};
    } else if (std::isfinite(support)) {
      s->idom = {support, false, 0};
    } else {
      double R = 2.0;
      while (total_tail(s->weight, s->logc2, N, R, probe) >= 1e-12) R += 0.5;
      s->idom = {R, false, 0};
      s->quad.outerRadius = R;
    }
  }
  return KernelModel(std::move(s));
}

KernelModel KernelModel::with_coefficients(CMatrix coefficients) const {
  if (coefficients.cols() != s_->N) throw ConfigError("coefficient matrix has the wrong number of columns");
  if (coefficients.rows() > s_->N) throw ConfigError("coefficient matrix has more rows than monomials");
  if (coefficients.rows() > 0) {
    const CMatrix g = coefficients * coefficients.adjoint();
    const double err = (g - CMatrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
    if (err > 1e-8) throw ConfigError("coefficient matrix rows are not orthonormal");
  }
  auto s = std::make_shared<State>(*s_);
  s->M = static_cast<int>(coefficients.rows());
  s->radial = false;
  s->C = std::move(coefficients);
  for (int n = 0; n < s->N; ++n) s->modeMass[n] = s->C.col(n).squaredNorm();
  return KernelModel(std::move(s));
}

Domain KernelModel::domain() const noexcept { return s_->domain; }
const Weight& KernelModel::weight() const noexcept { return s_->weight; }
const QuadratureSpec& KernelModel::quadrature() const noexcept { return s_->quad; }
const IntegrationDomain& KernelModel::integration_domain() const noexcept { return s_->idom; }
int KernelModel::rank() const noexcept { return s_->M; }
int KernelModel::basis_size() const noexcept { return s_->N; }
bool KernelModel::radial() const noexcept { return s_->radial; }
const std::vector<double>& KernelModel::log_norms_sq() const noexcept { return s_->logc2; }

CMatrix KernelModel::coefficients() const {
  if (s_->radial) return CMatrix::Identity(s_->N, s_->N);
  return s_->C;
}

void KernelModel::check_point(Complex z) const { require_in_domain(s_->domain, z); }

double KernelModel::log_weight_factor(Complex z) const {
  check_point(z);
  if (std::holds_alternative<FockGaussian>(s_->weight.kind())) return -0.5 * std::norm(z);
  return 0.5 * s_->weight.log_density(std::abs(z));
}

void KernelModel::features(Complex z, Complex* out) const {
  const int N = s_->N;
  const double lw = log_weight_factor(z);
  const double l0 = lw - 0.5 * s_->logc2[0];
  if (l0 > -600.0) {
    out[0] = Complex(std::exp(l0), 0.0);
    for (int n = 1; n < N; ++n) out[n] = mul(out[n - 1], z) * s_->ratio[n];
    return;
  }
  // exp(-psi) underflows: build magnitudes in the log domain.
  const double r = std::abs(z);
  const double lr = std::log(r);
  const Complex u = z / r;
  Complex ph(1.0, 0.0);
  for (int n = 0; n < N; ++n) {
    out[n] = ph * std::exp(n * lr + lw - 0.5 * s_->logc2[n]);
    ph = mul(ph, u);
  }
}

CVector KernelModel::features(Complex z) const {
  CVector v(s_->N);
  features(z, v.data());
  return v;
}

CVector KernelModel::basis(Complex z) const {
  CVector f = features(z);
  if (s_->radial) return f;
  return s_->C * f;
}

CMatrix KernelModel::basis_matrix(std::span<const Complex> points) const {
  CMatrix F(s_->N, static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) features(points[i], F.col(static_cast<Eigen::Index>(i)).data());
  if (s_->radial) return F;
  return s_->C * F;
}

Complex KernelModel::weighted(Complex z, Complex w) const {
  const CVector a = basis(z);
  const CVector b = basis(w);
  Complex sum(0.0, 0.0);
  for (Eigen::Index j = 0; j < a.size(); ++j) sum += mul_conj(a[j], b[j]);
  return sum;
}

Complex KernelModel::kernel(Complex z, Complex w) const {
  if (!s_->radial) {
    const double lz = log_weight_factor(z), lwv = log_weight_factor(w);
    return weighted(z, w) * std::exp(-(lz + lwv));
  }
  check_point(z);
  check_point(w);
  const Complex u = mul_conj(z, w);
  Complex t(1.0 / s_->c0sq, 0.0);
  Complex sum = t;
  for (int n = 1; n < s_->N; ++n) {
    t = mul(t, u) * s_->ratio2[n];
    sum += t;
  }
  return sum;
}

double KernelModel::intensity(Complex z) const { return basis(z).squaredNorm(); }

double KernelModel::expected_beyond(double r) const {
  double t = 0.0;
  for (int n = 0; n < s_->N; ++n) {
    if (s_->modeMass[n] == 0.0) continue;
    t += s_->modeMass[n] * mode_tail(s_->weight, s_->logc2, n, r, s_->idom);
  }
  return t;
}

CMatrix region_gram(const KernelModel& model, const Region& region, const std::function<double(Complex)>& h,
                    std::span<const SingularPoint> singular) {
  const int M = model.rank();
  CMatrix G = CMatrix::Zero(M, M);
  if (M == 0) return G;
  const QuadratureRule rule = build_region_rule(model.integration_domain(), region, model.quadrature(),
                                                2 * model.basis_size() + 2, singular);
  constexpr std::size_t chunk = 4096;
  std::vector<Complex> pts;
  std::vector<double> wts;
  for (std::size_t start = 0; start < rule.size(); start += chunk) {
    const std::size_t end = std::min(rule.size(), start + chunk);
    pts.clear();
    wts.clear();
    for (std::size_t i = start; i < end; ++i) {
      const double hv = h(rule.nodes[i]);
      if (hv == 0.0) continue;
      const double w = rule.weights[i] * hv;
      if (!std::isfinite(w)) throw QuadratureError("integrand is not finite at a quadrature node");
      pts.push_back(rule.nodes[i]);
      wts.push_back(w);
    }
    if (pts.empty()) continue;
    const CMatrix A = model.basis_matrix(pts);
    CMatrix B = A;
    for (Eigen::Index j = 0; j < B.cols(); ++j) B.col(j) *= wts[static_cast<std::size_t>(j)];
    G.noalias() += B * A.adjoint();
  }
  return G;
}

std::vector<double> radial_mode_integrals(const KernelModel& model, const Region& region,
                                          const std::function<double(double)>& h) {
  return mode_integrals(model.weight(), model.log_norms_sq(), model.basis_size(), model.integration_domain(),
                        region.inner, region.outer, model.quadrature().radialNodes, h);
}

double expected_count(const KernelModel& model, const Region& region) {
  const auto m = radial_mode_integrals(model, region, [](double) { return 1.0; });
  const CMatrix C = model.coefficients();
  double t = 0.0;
  for (int n = 0; n < model.basis_size(); ++n) t += C.col(n).squaredNorm() * m[n];
  return t;
}

std::vector<double> kernel_monomial_norms(const KernelModel& model) {
  std::vector<double> out;
  for (double l : model.log_norms_sq()) out.push_back(std::exp(0.5 * l));
  return out;
}

double k_correlation(const KernelModel& model, std::span<const Complex> points) {
  const auto k = static_cast<Eigen::Index>(points.size());
  if (k == 0) return 1.0;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i + 1; j < k; ++j)
      if (points[i] == points[j]) throw DegenerateInputError("correlation points must be distinct");
  const CMatrix A = model.basis_matrix(points);
  CMatrix K(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) {
      Complex s(0.0, 0.0);
      for (Eigen::Index m = 0; m < A.rows(); ++m) s += mul_conj(A(m, i), A(m, j));
      K(i, j) = s;
    }
  if (k == 1) return K(0, 0).real();
  return Eigen::PartialPivLU<CMatrix>(K).determinant().real();
}

std::vector<Complex> square_grid(double radius, double h) {
  std::vector<Complex> out;
  const int n = static_cast<int>(std::floor(radius / h));
  for (int i = -n; i <= n; ++i)
    for (int j = -n; j <= n; ++j) {
      const Complex z(i * h, j * h);
      if (std::abs(z) <= radius) out.push_back(z);
    }
  return out;
}

ChristScan christ_bound_scan(const KernelModel& model, std::span<const Complex> grid, double delta) {
  ChristScan out;
  const CMatrix A = model.basis_matrix(grid);
  const auto P = A.cols();
  std::vector<double> diag(static_cast<std::size_t>(P));
  for (Eigen::Index i = 0; i < P; ++i) {
    diag[static_cast<std::size_t>(i)] = A.col(i).squaredNorm();
    out.maxDiagonal = std::max(out.maxDiagonal, diag[static_cast<std::size_t>(i)]);
  }
  const CMatrix K = A.adjoint() * A;
  double sxx = 0.0, sxy = 0.0;
  for (Eigen::Index i = 0; i < P; ++i)
    for (Eigen::Index j = i + 1; j < P; ++j) {
      const double d = std::abs(grid[i] - grid[j]);
      const double k2 = std::norm(K(i, j));
      out.christConstant = std::max(out.christConstant, k2 * std::exp(delta * d));
      const double denom = diag[static_cast<std::size_t>(i)] * diag[static_cast<std::size_t>(j)];
      if (k2 > 1e-250 && denom > 0.0) {
        const double y = -std::log(k2 / denom);
        sxx += d * d * d * d;
        sxy += d * d * y;
        ++out.pairs;
      }
    }
  if (out.maxDiagonal > 0.0) out.maxOffDiagonalDecayViolation = std::log(out.christConstant / (out.maxDiagonal * out.maxDiagonal));
  out.decayRate = sxx > 0.0 ? sxy / sxx : 0.0;
  return out;
}

}  // namespace palmdpp
