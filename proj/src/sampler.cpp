#include "palmdpp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "palmdpp/errors.hpp"
#include "palmdpp/format.hpp"
#include "palmdpp/parallel.hpp"

namespace palmdpp {

namespace {

constexpr long kMaxAngleTrials = 1000000;
// Angle proposals are generated and tested in groups; the first accepted one in
// order is used, so the result is still an exact draw.
constexpr int kBatch = 32;

}  // namespace

SamplerPlan::SamplerPlan(KernelModel model) : model_(std::move(model)) {
  const auto& ln = model_.log_norms_sq();
  ratio_.assign(ln.size(), 0.0);
  for (std::size_t n = 1; n < ln.size(); ++n) ratio_[n] = std::exp(0.5 * (ln[n - 1] - ln[n]));
  const auto* t = std::get_if<TabulatedRadial>(&model_.weight().kind());
  if (!t) return;
  // Segment masses of r^(2n+1) w(r) per mode, normalized to a CDF.
  const int N = model_.basis_size();
  const auto& l2 = model_.log_norms_sq();
  const GaussRule& gl = gauss_legendre(8);
  const std::size_t segs = t->radii.size() - 1;
  segmentCdf_.assign(static_cast<std::size_t>(N), std::vector<double>(segs, 0.0));
  const double edge = model_.integration_domain().edge;
  for (std::size_t s = 0; s < segs; ++s) {
    const double a = t->radii[s], b = std::min(t->radii[s + 1], edge);
    if (!(b > a)) continue;
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
      const double r = mid + half * gl.nodes[k];
      const double base = std::log(2.0 * kPi * r) + model_.weight().log_density(r);
      for (int n = 0; n < N; ++n)
        segmentCdf_[static_cast<std::size_t>(n)][s] += gl.weights[k] * half * std::exp(base + 2.0 * n * std::log(r) - l2[static_cast<std::size_t>(n)]);
    }
  }
  for (auto& cdf : segmentCdf_) {
    for (std::size_t s = 1; s < cdf.size(); ++s) cdf[s] += cdf[s - 1];
    const double total = cdf.back();
    if (!(total > 0.0)) throw NumericalError("tabulated weight has an empty mode");
    for (double& c : cdf) c /= total;
  }
}

double SamplerPlan::draw_mode_radius(int n, RngStream& rng) const {
  const Weight& w = model_.weight();
  const double edge = model_.integration_domain().edge;
  for (;;) {
    double r = 0.0;
    if (std::holds_alternative<FockGaussian>(w.kind())) {
      r = std::sqrt(rng.gamma(n + 1.0));
    } else if (const auto* f = std::get_if<FockRadialAlpha>(&w.kind())) {
      r = std::pow(rng.gamma((2.0 * n + 2.0) / f->alpha), 1.0 / f->alpha);
    } else if (const auto* b = std::get_if<BergmanClassical>(&w.kind())) {
      r = std::sqrt(rng.beta(n + 1.0, b->alpha + 1.0));
    } else {
      const auto& t = std::get<TabulatedRadial>(w.kind());
      const auto& cdf = segmentCdf_[static_cast<std::size_t>(n)];
      const double u = rng.uniform();
      const std::size_t s =
          std::min<std::size_t>(static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()),
                                cdf.size() - 1);
      const double a = t.radii[s], bnd = std::min(t.radii[s + 1], edge);
      // (2n+1) log r + slope * r is concave: its maximum is at the clamped
      // stationary point.
      const double slope = (t.logWeight[s + 1] - t.logWeight[s]) / (t.radii[s + 1] - t.radii[s]);
      auto logf = [&](double x) { return (x > 0.0 ? (2.0 * n + 1.0) * std::log(x) : -1e300) + slope * x; };
      double rs = slope < 0.0 ? -(2.0 * n + 1.0) / slope : bnd;
      rs = std::clamp(rs, a, bnd);
      const double top = logf(rs);
      for (long trial = 0;; ++trial) {
        if (trial > kMaxAngleTrials) throw EnvelopeError("tabulated radius rejection failed");
        const double x = a + (bnd - a) * rng.uniform();
        if (std::log(rng.uniform()) < logf(x) - top) {
          r = x;
          break;
        }
      }
    }
    if (r < edge) return r;
  }
}

void SamplerPlan::mode_moduli(double r, double* out) const {
  const int N = model_.basis_size();
  const auto& l2 = model_.log_norms_sq();
  const double lw = model_.log_weight_factor(Complex(r, 0.0));
  const double l0 = lw - 0.5 * l2[0];
  if (l0 > -600.0) {
    out[0] = std::exp(l0);
    for (int n = 1; n < N; ++n)
      out[n] = out[n - 1] * r * ratio_[static_cast<std::size_t>(n)];
    return;
  }
  const double lr = std::log(r);
  for (int n = 0; n < N; ++n) out[n] = std::exp(n * lr + lw - 0.5 * l2[static_cast<std::size_t>(n)]);
}

Configuration sample_projection_dpp(const SamplerPlan& plan, RngStream& rng) {
  const KernelModel& model = plan.model();
  const int N = model.basis_size();
  const int M = model.rank();
  Configuration cfg;
  cfg.modelRank = M;
  cfg.seed = rng.seed();
  cfg.stream = rng.stream_index();
  cfg.points.reserve(static_cast<std::size_t>(M));
  if (M == 0) return cfg;

  CMatrix Q = model.coefficients().adjoint();
  std::vector<double> cum(static_cast<std::size_t>(N)), mod(static_cast<std::size_t>(N));
  std::vector<double> are(static_cast<std::size_t>(N)), aim(static_cast<std::size_t>(N));
  CVector f(N);

  for (int m = M; m >= 1; --m) {
    const auto j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(m)));
    const Complex* q = Q.col(j).data();
    double acc = 0.0;
    for (int n = 0; n < N; ++n) {
      acc += std::norm(q[n]);
      cum[static_cast<std::size_t>(n)] = acc;
    }
    const double u = rng.uniform() * acc;
    int mode = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    mode = std::min(mode, N - 1);
    while (mode > 0 && std::norm(q[mode]) == 0.0) --mode;

    const double r = plan.draw_mode_radius(mode, rng);
    plan.mode_moduli(r, mod.data());
    // g(theta) = sum_n conj(q_n) |e_n(r)| e^{i n theta} over the modes [lo, hi].
    int lo = N, hi = -1;
    double bound = 0.0;
    for (int n = 0; n < N; ++n) {
      const double xr = q[n].real() * mod[static_cast<std::size_t>(n)], xi = -q[n].imag() * mod[static_cast<std::size_t>(n)];
      are[static_cast<std::size_t>(n)] = xr;
      aim[static_cast<std::size_t>(n)] = xi;
      const double ac = std::sqrt(xr * xr + xi * xi);
      if (ac > 0.0) {
        lo = std::min(lo, n);
        hi = n;
        bound += ac;
      }
    }
    bound *= bound;

    double theta = 0.0;
    bool accepted = false;
    for (long trial = 0; !accepted; trial += kBatch) {
      if (trial >= kMaxAngleTrials) {
        std::ostringstream os;
        os << "angle rejection exceeded " << kMaxAngleTrials << " proposals at radius " << r << " (rank left " << m
           << ")";
        throw EnvelopeError(os.str());
      }
      double th[kBatch], uu[kBatch], wr[kBatch], wi[kBatch], gr[kBatch], gi[kBatch];
      for (int k = 0; k < kBatch; ++k) {
        th[k] = 2.0 * kPi * rng.uniform();
        uu[k] = rng.uniform();
        wr[k] = std::cos(th[k]);
        wi[k] = std::sin(th[k]);
        gr[k] = 0.0;
        gi[k] = 0.0;
      }
      // Horner in e^{i theta}; the common factor e^{i lo theta} drops out of |g|.
      for (int n = hi; n >= lo; --n) {
        const double xr = are[static_cast<std::size_t>(n)], xi = aim[static_cast<std::size_t>(n)];
        for (int k = 0; k < kBatch; ++k) {
          const double t = gr[k] * wr[k] - gi[k] * wi[k] + xr;
          gi[k] = gr[k] * wi[k] + gi[k] * wr[k] + xi;
          gr[k] = t;
        }
      }
      for (int k = 0; k < kBatch; ++k) {
        if (uu[k] * bound < gr[k] * gr[k] + gi[k] * gi[k]) {
          theta = th[k];
          accepted = true;
          break;
        }
      }
    }
    const Complex z = std::polar(r, theta);
    cfg.points.push_back(z);
    if (m == 1) break;

    // Remove the direction Q^* f(z) from the span.
    model.features(z, f.data());
    auto Qm = Q.leftCols(m);
    CVector v = Qm.adjoint() * f;
    const double vn = v.norm();
    const Complex last = v[m - 1];
    const Complex phase = std::abs(last) > 0.0 ? last / std::abs(last) : Complex(1.0, 0.0);
    v[m - 1] += phase * vn;
    const double wn2 = v.squaredNorm();
    const CVector y = Qm * v;
    Qm.noalias() -= (2.0 / wn2) * y * v.adjoint();
  }
  return cfg;
}

Configuration sample_projection_dpp(const KernelModel& model, RngStream& rng) {
  return sample_projection_dpp(SamplerPlan(model), rng);
}

Configuration sample_palm(const KernelModel& model, const PalmAnchor& anchor, RngStream& rng) {
  return sample_projection_dpp(palm_downdate(model, anchor), rng);
}

std::vector<double> sample_moduli_hyperbolic(int K, RngStream& rng) {
  if (K < 1) throw PreconditionError("need K >= 1");
  std::vector<double> out(static_cast<std::size_t>(K));
  for (int k = 1; k <= K; ++k) {
    double u = rng.uniform();
    while (u == 0.0) u = rng.uniform();
    out[static_cast<std::size_t>(k - 1)] = std::pow(u, 1.0 / (2.0 * k));
  }
  return out;
}

std::vector<Configuration> batch_sample(const KernelModel& model, const PalmAnchor& anchor, std::size_t replicas,
                                        std::uint64_t baseSeed) {
  if (replicas < 1) throw ConfigError("replicas must be at least 1");
  const SamplerPlan plan(anchor.empty() ? model : palm_downdate(model, anchor));
  std::vector<Configuration> out(replicas);
  parallel_for(replicas, [&](std::size_t i) {
    RngStream rng(baseSeed, i);
    out[i] = sample_projection_dpp(plan, rng);
  });
  return out;
}

void write_jsonl(std::ostream& os, const std::vector<Configuration>& samples) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& c = samples[i];
    os << "{\"replica\":" << c.stream << ",\"seed\":" << c.seed << ",\"points\":[";
    for (std::size_t k = 0; k < c.points.size(); ++k) {
      if (k) os << ',';
      os << '[' << format_double(c.points[k].real()) << ',' << format_double(c.points[k].imag()) << ']';
    }
    os << "]}\n";
  }
}

std::vector<Configuration> read_jsonl(std::istream& is) {
  std::vector<Configuration> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    Configuration c;
    c.stream = j.at("replica").get<std::uint64_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& p : j.at("points")) c.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    c.modelRank = static_cast<int>(c.points.size());
    out.push_back(std::move(c));
  }
  return out;
}

void write_csv(std::ostream& os, const std::vector<Configuration>& samples) {
  os << "replica,re,im\n";
  for (const auto& c : samples)
    for (const auto& z : c.points) os << c.stream << ',' << format_double(z.real()) << ',' << format_double(z.imag()) << '\n';
}

}  // namespace palmdpp
