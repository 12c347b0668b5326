#include "palmdpp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "palmdpp/errors.hpp"
#include "palmdpp/format.hpp"
#include "palmdpp/parallel.hpp"
#include "palmdpp/stats.hpp"

namespace palmdpp {

using ojson = nlohmann::ordered_json;

namespace {

// Seeds of the independent passes of one experiment.
std::uint64_t pass_seed(std::uint64_t seed, std::uint64_t tag) { return splitmix64(seed + tag); }

std::string fmt(double x) { return format_double(x); }

ojson points_json(const std::vector<Complex>& pts) {
  ojson a = ojson::array();
  for (const auto& z : pts) a.push_back({z.real(), z.imag()});
  return a;
}

ojson vector_json(const std::vector<double>& v) {
  ojson a = ojson::array();
  for (double x : v) a.push_back(json_number(x));
  return a;
}

ojson thresholds_json(const Thresholds& t) {
  return {{"zScore", t.zScore}, {"pValue", t.pValue}, {"slopeRelative", t.slopeRelative},
          {"boundSlack", t.boundSlack}};
}

ojson model_summary(const KernelModel& m) {
  return {{"domain", std::string(to_string(m.domain()))}, {"weight", m.weight().name()}, {"rank", m.rank()}};
}

Verdict z_verdict(std::string criterion, std::string check, double z, const Thresholds& t) {
  return {std::move(criterion), std::move(check), std::abs(z) < t.zScore, "zScore", z, t.zScore};
}

Verdict p_verdict(std::string criterion, std::string check, double p, const Thresholds& t) {
  return {std::move(criterion), std::move(check), p > t.pValue, "pValue", p, t.pValue};
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

std::vector<double> slice(const std::vector<double>& v, std::size_t a, std::size_t b) {
  return {v.begin() + static_cast<std::ptrdiff_t>(a), v.begin() + static_cast<std::ptrdiff_t>(b)};
}

double mean_of(const std::vector<double>& v) { return pairwise_sum(v) / static_cast<double>(v.size()); }

// Sample covariance of (x, y) divided by n: the covariance of the two means.
void mean_covariance(const std::vector<double>& x, const std::vector<double>& y, double& vxx, double& vyy,
                     double& vxy) {
  const double n = static_cast<double>(x.size());
  const double mx = mean_of(x), my = mean_of(y);
  std::vector<double> a(x.size()), b(x.size()), c(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    a[i] = (x[i] - mx) * (x[i] - mx);
    b[i] = (y[i] - my) * (y[i] - my);
    c[i] = (x[i] - mx) * (y[i] - my);
  }
  vxx = pairwise_sum(a) / (n - 1.0) / n;
  vyy = pairwise_sum(b) / (n - 1.0) / n;
  vxy = pairwise_sum(c) / (n - 1.0) / n;
}

PalmAnchor anchor_of(const std::vector<Complex>& pts) { return PalmAnchor{pts}; }

GSpec rn_g(Domain d, const std::vector<Complex>& p, const std::vector<Complex>& q) {
  return d == Domain::Plane ? GSpec::rational(p, q) : GSpec::blaschke(p, q);
}

struct RnOutcome {
  std::vector<NamedEstimate> estimates;
  std::vector<Verdict> verdicts;
  ojson details = ojson::object();
  std::vector<std::vector<double>> rows;
};

RnOutcome rn_core(const KernelModel& base, const RnVerifyInput& in, bool keepRows) {
  const std::size_t R = in.replicas;
  if (R < 4) throw PreconditionError("rn-verify needs at least four replicas");
  validate_anchor(base, anchor_of(in.p));
  validate_anchor(base, anchor_of(in.q));
  const KernelModel Pp = palm_downdate(base, anchor_of(in.p));
  const KernelModel Pq = palm_downdate(base, anchor_of(in.q));
  const GSpec g = rn_g(base.domain(), in.p, in.q);
  const RadiusSchedule schedule = in.schedule ? *in.schedule : default_schedule(Pq, g.singular_radius());
  const CenteringPlan plan = make_centering(Pq, g, schedule);
  const auto stats = default_statistics(base.domain());
  const std::size_t K = stats.size();

  const std::uint64_t seedP = pass_seed(in.seed, 1);
  // With g == 1 both passes are the same draws, so the weights are exactly 1.
  const std::uint64_t seedQ = g.is_identity() ? seedP : pass_seed(in.seed, 2);

  std::vector<std::vector<double>> hp(K, std::vector<double>(R)), hq(K, std::vector<double>(R));
  std::vector<double> logw(R), lastInc(R);
  std::vector<char> conv(R);
  {
    const SamplerPlan sp(Pp);
    parallel_for(R, [&](std::size_t i) {
      RngStream rng(seedP, i);
      const Configuration c = sample_projection_dpp(sp, rng);
      for (std::size_t k = 0; k < K; ++k) hp[k][i] = additive_functional(c, stats[k].f);
    });
  }
  {
    const SamplerPlan sq(Pq);
    parallel_for(R, [&](std::size_t i) {
      RngStream rng(seedQ, i);
      const Configuration c = sample_projection_dpp(sq, rng);
      for (std::size_t k = 0; k < K; ++k) hq[k][i] = additive_functional(c, stats[k].f);
      const RegularizedValue v = regularized_log_functional(plan, c, g);
      logw[i] = 2.0 * v.value;
      lastInc[i] = v.increments.empty() ? 0.0 : v.increments.back();
      conv[i] = v.converged;
    });
  }

  // Cross-fitted normalizers: half A is weighted by half B's mean and vice versa.
  const std::size_t nA = R / 2;
  std::vector<double> w(R);
  for (std::size_t i = 0; i < R; ++i) w[i] = std::exp(logw[i]);
  const std::vector<double> wA = slice(w, 0, nA), wB = slice(w, nA, R);
  const MCEstimate zA = mc_estimate(wA, seedQ), zB = mc_estimate(wB, seedQ);
  if (!(zA.mean > 0.0) || !(zB.mean > 0.0) || !std::isfinite(zA.mean) || !std::isfinite(zB.mean))
    throw NumericalError("rn-verify normalizer is not a positive finite number");
  std::vector<double> nw(R);
  for (std::size_t i = 0; i < R; ++i) {
    const RegularizedValue v{0.5 * logw[i], {}, {}, true};
    nw[i] = normalized_rn_weight(v, i < nA ? zB : zA);
  }

  RnOutcome out;
  const std::string tag = "@N=" + std::to_string(base.rank());
  for (std::size_t k = 0; k < K; ++k) {
    const MCEstimate direct = mc_estimate(hp[k], seedP);
    std::vector<double> whA(nA), whB(R - nA);
    for (std::size_t i = 0; i < nA; ++i) whA[i] = wA[i] * hq[k][i];
    for (std::size_t i = nA; i < R; ++i) whB[i - nA] = wB[i - nA] * hq[k][i];
    const double xA = mean_of(whA), xB = mean_of(whB);
    const double yA = zA.mean, yB = zB.mean;
    const double T = 0.5 * (xA / yB + xB / yA);
    double axx, ayy, axy, bxx, byy, bxy;
    mean_covariance(whA, wA, axx, ayy, axy);
    mean_covariance(whB, wB, bxx, byy, bxy);
    // Delta method; half A enters through xA / yB and xB / yA.
    const double gxA = 0.5 / yB, gyA = -0.5 * xB / (yA * yA);
    const double gxB = 0.5 / yA, gyB = -0.5 * xA / (yB * yB);
    const double var = gxA * gxA * axx + 2.0 * gxA * gyA * axy + gyA * gyA * ayy + gxB * gxB * bxx +
                       2.0 * gxB * gyB * bxy + gyB * gyB * byy;
    const MCEstimate weighted{T, std::sqrt(std::max(0.0, var)), R, seedQ};
    out.estimates.push_back({"direct:" + stats[k].name + tag, direct});
    out.estimates.push_back({"weighted:" + stats[k].name + tag, weighted});
    const double z = z_score(weighted.mean, weighted.standardError, direct.mean, direct.standardError);
    out.verdicts.push_back(z_verdict("radon-nikodym", stats[k].name + " " + tag, z, in.thresholds));
  }
  out.estimates.push_back({"normalizer:A" + tag, zA});
  out.estimates.push_back({"normalizer:B" + tag, zB});

  double sw = 0.0, sw2 = 0.0, sumInc = 0.0, nmean = 0.0;
  std::size_t nonConv = 0;
  for (std::size_t i = 0; i < R; ++i) {
    sw += nw[i];
    sw2 += nw[i] * nw[i];
    sumInc += std::abs(lastInc[i]);
    nonConv += conv[i] ? 0 : 1;
  }
  nmean = sw / static_cast<double>(R);
  out.details["rank"] = base.rank();
  out.details["g"] = g.name();
  out.details["schedule"] = vector_json(schedule.radii);
  out.details["centering"] = vector_json(plan.expected);
  out.details["centeringTailMass"] = json_number(plan.tailMass);
  out.details["normalizedWeightMean"] = json_number(nmean);
  out.details["effectiveSampleSize"] = json_number(sw * sw / sw2);
  out.details["meanAbsLastIncrement"] = json_number(sumInc / static_cast<double>(R));
  out.details["nonConvergedFraction"] = json_number(static_cast<double>(nonConv) / static_cast<double>(R));

  if (keepRows) {
    for (std::size_t i = 0; i < R; ++i) {
      std::vector<double> row{0.0, static_cast<double>(i)};
      for (std::size_t k = 0; k < K; ++k) row.push_back(hp[k][i]);
      row.push_back(0.0);
      out.rows.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < R; ++i) {
      std::vector<double> row{1.0, static_cast<double>(i)};
      for (std::size_t k = 0; k < K; ++k) row.push_back(hq[k][i]);
      row.push_back(logw[i]);
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace

ojson json_number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

bool ExperimentReport::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

ojson ExperimentReport::to_json(bool includeRuntime) const {
  ojson j;
  j["name"] = name;
  j["inputs"] = inputs;
  ojson est = ojson::array();
  for (const auto& e : estimates)
    est.push_back({{"label", e.label},
                   {"mean", json_number(e.estimate.mean)},
                   {"standardError", json_number(e.estimate.standardError)},
                   {"replicas", e.estimate.replicas},
                   {"seed", e.estimate.seed}});
  j["estimates"] = est;
  ojson ver = ojson::array();
  for (const auto& v : verdicts)
    ver.push_back({{"criterion", v.criterion},
                   {"check", v.check},
                   {"pass", v.pass},
                   {"measure", v.measure},
                   {"value", json_number(v.value)},
                   {"threshold", json_number(v.threshold)}});
  j["verdicts"] = ver;
  j["pass"] = all_pass();
  j["details"] = details;
  if (includeRuntime) j["runtimeSeconds"] = runtimeSeconds;
  return j;
}

void ExperimentReport::write_table_csv(std::ostream& os) const {
  for (std::size_t c = 0; c < tableColumns.size(); ++c) os << (c ? "," : "") << tableColumns[c];
  os << '\n';
  for (const auto& row : tableRows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << fmt(row[c]);
    os << '\n';
  }
}

std::vector<LinearStatistic> default_statistics(Domain d) {
  const std::vector<double> edges = d == Domain::Plane ? std::vector<double>{0, 1, 2, 3, 4.5}
                                                       : std::vector<double>{0, 0.2, 0.4, 0.6, 0.8};
  const Complex c = d == Domain::Plane ? Complex(0.5, 0.0) : Complex(0.2, 0.0);
  const double rho = d == Domain::Plane ? 2.0 : 0.5;
  std::vector<LinearStatistic> out;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const Region reg = Region::annulus(edges[i], edges[i + 1]);
    out.push_back({"annulus[" + fmt(edges[i]) + "," + fmt(edges[i + 1]) + ")",
                   [reg](Complex z) { return reg.contains(z) ? 1.0 : 0.0; }});
  }
  out.push_back({"bump", [c, rho](Complex z) {
                   const double t = 1.0 - std::norm(z - c) / (rho * rho);
                   return t > 0.0 ? t * t * t : 0.0;
                 }});
  return out;
}

ExperimentReport rn_verify(const RnVerifyInput& in) {
  if (in.model.domain() == Domain::Plane && in.p.size() != in.q.size())
    throw PreconditionError("on the plane Palm measures of different orders are mutually singular; need |p| == |q|");
  ExperimentReport rep;
  rep.name = "rn-verify";
  rep.inputs = {{"model", model_summary(in.model)},
                {"p", points_json(in.p)},
                {"q", points_json(in.q)},
                {"replicas", in.replicas},
                {"seed", in.seed},
                {"stabilityRank", in.stabilityRank},
                {"thresholds", thresholds_json(in.thresholds)}};
  if (in.schedule) rep.inputs["schedule"] = vector_json(in.schedule->radii);

  RnOutcome first = rn_core(in.model, in, true);
  rep.estimates = first.estimates;
  rep.verdicts = first.verdicts;
  rep.details["runs"] = ojson::array({first.details});
  rep.tableColumns = {"pass", "replica"};
  for (const auto& s : default_statistics(in.model.domain())) rep.tableColumns.push_back(s.name);
  rep.tableColumns.push_back("logWeight");
  rep.tableRows = std::move(first.rows);

  if (in.stabilityRank > 0) {
    if (!in.model.radial())
      throw PreconditionError("the rank-stability rerun needs a radial model (no coefficient matrix)");
    const KernelModel other =
        KernelModel::build(in.model.domain(), in.model.weight(), in.stabilityRank, in.model.quadrature());
    RnOutcome second = rn_core(other, in, false);
    for (auto& e : second.estimates) rep.estimates.push_back(e);
    ojson pattern = ojson::array();
    bool same = second.verdicts.size() == first.verdicts.size();
    std::size_t changed = 0;
    for (std::size_t k = 0; k < second.verdicts.size(); ++k) {
      const auto& v = second.verdicts[k];
      pattern.push_back({{"check", v.check}, {"pass", v.pass}, {"zScore", json_number(v.value)}});
      if (!same || v.pass != first.verdicts[k].pass) ++changed;
    }
    second.details["verdicts"] = pattern;
    rep.details["runs"].push_back(second.details);
    rep.verdicts.push_back({"radon-nikodym", "rank stability N=" + std::to_string(in.model.rank()) + " vs N=" +
                                                 std::to_string(in.stabilityRank),
                            changed == 0, "changedVerdicts", static_cast<double>(changed), 0.0});
  }
  return rep;
}

// ---- rigidity bump ----

namespace {

constexpr double kLn2 = std::numbers::ln2;

// Quintic smoothstep and its antiderivative.
double smoothstep(double x) { return x * x * x * (10.0 + x * (-15.0 + 6.0 * x)); }
double smoothstep_integral(double x) { return x * x * x * x * (2.5 + x * (-3.0 + x)); }

}  // namespace

RigidityBump::RigidityBump(double epsilon, double r0) : eps_(epsilon), r0_(r0) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("rigidity epsilon must lie in (0, 1)");
  if (!(r0 > 0.0) || !std::isfinite(r0)) throw ConfigError("rigidity r0 must be positive");
  t0_ = std::log(r0) - kLn2;
  t1_ = std::log(r0);
  t3_ = t1_ + 1.0 / epsilon;
  t2_ = t3_ - kLn2;
}

double RigidityBump::support_end() const noexcept { return std::exp(t3_); }

// Integral over (-inf, t] of the profile s: ramp up on [t0, t1], 1 on [t1, t2],
// ramp down on [t2, t3].
double RigidityBump::ramp_integral(double t) const {
  if (t <= t0_) return 0.0;
  if (t <= t1_) return kLn2 * smoothstep_integral((t - t0_) / kLn2);
  const double up = 0.5 * kLn2;
  if (t <= t2_) return up + (t - t1_);
  const double flat = up + (t2_ - t1_);
  if (t <= t3_) return flat + kLn2 * (0.5 - smoothstep_integral((t3_ - t) / kLn2));
  return flat + 0.5 * kLn2;
}

double RigidityBump::value(double r) const {
  if (r <= 0.0) return 1.0;
  const double t = std::log(r);
  if (t <= t0_) return 1.0;
  if (t >= t3_) return 0.0;
  // The profile integrates to 1 / eps exactly, so the value reaches 0 at t3.
  return std::max(0.0, 1.0 - eps_ * ramp_integral(t));
}

double RigidityBump::derivative(double r) const {
  if (r <= 0.0) return 0.0;
  const double t = std::log(r);
  double s = 0.0;
  if (t <= t0_ || t >= t3_) s = 0.0;
  else if (t < t1_) s = smoothstep((t - t0_) / kLn2);
  else if (t <= t2_) s = 1.0;
  else s = smoothstep((t3_ - t) / kLn2);
  return -eps_ * s / r;
}

double RigidityBump::gradient_integral() const {
  // |phi'|^2 r dr = eps^2 s(t)^2 dt with t = log r; s^2 is a polynomial of
  // degree 10 on each ramp, so 8 Gauss nodes are exact there.
  const double e2 = eps_ * eps_;
  auto up = [&](double t) {
    const double s = smoothstep((t - t0_) / kLn2);
    return s * s;
  };
  auto down = [&](double t) {
    const double s = smoothstep((t3_ - t) / kLn2);
    return s * s;
  };
  return e2 * (integrate_gl(up, t0_, t1_, 8) + (t2_ - t1_) + integrate_gl(down, t2_, t3_, 8));
}

ExperimentReport rigidity_variance(const RigidityInput& in) {
  if (in.epsilons.empty()) throw ConfigError("rigidity needs at least one epsilon");
  ExperimentReport rep;
  rep.name = "rigidity";
  rep.inputs = {{"model", model_summary(in.model)},
                {"epsilons", in.epsilons},
                {"r0", in.r0},
                {"replicas", in.replicas},
                {"seed", in.seed},
                {"thresholds", thresholds_json(in.thresholds)}};
  std::vector<double> eps = in.epsilons;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  std::vector<RigidityBump> bumps;
  for (double e : eps) bumps.emplace_back(e, in.r0);

  std::vector<double> variances, grads;
  ojson rows = ojson::array();
  for (const auto& b : bumps) {
    const double grad = b.gradient_integral();
    const double bound = b.epsilon() + b.epsilon() * b.epsilon() * std::log(4.0);
    rep.verdicts.push_back({"rigidity", "gradient bound eps=" + fmt(b.epsilon()),
                            grad <= bound + in.thresholds.boundSlack, "residual", grad - bound,
                            in.thresholds.boundSlack});
    const double var = in.model.radial()
                           ? var_pi_f_radial(in.model, [&b](double r) { return b.value(r); })
                           : var_pi_f(in.model, [&b](Complex z) { return b.value(std::abs(z)); });
    variances.push_back(var);
    grads.push_back(grad);
    rows.push_back({{"epsilon", b.epsilon()},
                    {"gradientIntegral", grad},
                    {"bound", bound},
                    {"supportEnd", json_number(b.support_end())},
                    {"variance", json_number(var)},
                    {"varianceToDirichlet", json_number(var / (2.0 * std::numbers::pi * grad))}});
  }
  rep.verdicts.push_back({"rigidity", "variance strictly decreasing in epsilon", strictly_decreasing(variances),
                          "monotone", strictly_decreasing(variances) ? 1.0 : 0.0, 1.0});

  if (in.replicas > 0) {
    const std::size_t R = in.replicas;
    const std::uint64_t s = pass_seed(in.seed, 1);
    std::vector<std::vector<double>> S(bumps.size(), std::vector<double>(R));
    const SamplerPlan plan(in.model);
    parallel_for(R, [&](std::size_t i) {
      RngStream rng(s, i);
      const Configuration c = sample_projection_dpp(plan, rng);
      for (std::size_t k = 0; k < bumps.size(); ++k)
        S[k][i] = additive_functional(c, [&](Complex z) { return bumps[k].value(std::abs(z)); });
    });
    rep.tableColumns = {"replica"};
    for (const auto& b : bumps) rep.tableColumns.push_back("S_eps=" + fmt(b.epsilon()));
    for (std::size_t i = 0; i < R; ++i) {
      std::vector<double> row{static_cast<double>(i)};
      for (std::size_t k = 0; k < bumps.size(); ++k) row.push_back(S[k][i]);
      rep.tableRows.push_back(std::move(row));
    }
    for (std::size_t k = 0; k < bumps.size(); ++k) {
      const VarianceEstimate ve = sample_variance(S[k]);
      rep.estimates.push_back({"empirical variance eps=" + fmt(bumps[k].epsilon()),
                               {ve.variance, ve.standardError, R, s}});
      rows[k]["empiricalVariance"] = json_number(ve.variance);
      const double z = z_score(ve.variance, ve.standardError, variances[k], 0.0);
      rep.verdicts.push_back(z_verdict("rigidity", "empirical variance eps=" + fmt(bumps[k].epsilon()), z,
                                       in.thresholds));
    }
  }
  rep.details["sweep"] = rows;
  return rep;
}

// ---- Blaschke divergence ----

double blaschke_partial_sum(int K) {
  if (K < 0) throw PreconditionError("K must be non-negative");
  // Smallest terms first.
  double s = 0.0;
  for (int k = K; k >= 1; --k) s += 1.0 / (2.0 * k + 1.0);
  return s;
}

ExperimentReport blaschke_divergence(const BlaschkeInput& in) {
  if (in.K.empty()) throw ConfigError("blaschke needs at least one K");
  for (int k : in.K)
    if (k < 10) throw PreconditionError("blaschke needs K >= 10");
  if (in.replicas < 2) throw PreconditionError("blaschke needs at least two replicas");
  std::vector<int> Ks = in.K;
  std::sort(Ks.begin(), Ks.end());
  Ks.erase(std::unique(Ks.begin(), Ks.end()), Ks.end());
  ExperimentReport rep;
  rep.name = "blaschke";
  rep.inputs = {{"K", Ks}, {"replicas", in.replicas}, {"seed", in.seed},
                {"thresholds", thresholds_json(in.thresholds)}};

  const std::size_t R = in.replicas;
  const int Kmax = Ks.back();
  const std::uint64_t s = pass_seed(in.seed, 1);
  std::vector<std::vector<double>> partial(Ks.size(), std::vector<double>(R));
  parallel_for(R, [&](std::size_t i) {
    RngStream rng(s, i);
    const std::vector<double> m = sample_moduli_hyperbolic(Kmax, rng);
    double acc = 0.0;
    std::size_t next = 0;
    for (int k = 1; k <= Kmax; ++k) {
      acc += 1.0 - m[static_cast<std::size_t>(k - 1)];
      if (k == Ks[next]) partial[next++][i] = acc;
    }
  });

  std::vector<double> analytic;
  ojson rows = ojson::array();
  for (std::size_t j = 0; j < Ks.size(); ++j) {
    const double a = blaschke_partial_sum(Ks[j]);
    analytic.push_back(a);
    const MCEstimate mc = mc_estimate(partial[j], s);
    rep.estimates.push_back({"partial sum K=" + std::to_string(Ks[j]), mc});
    rep.verdicts.push_back(z_verdict("blaschke-divergence", "MC vs analytic K=" + std::to_string(Ks[j]),
                                     z_score(mc.mean, mc.standardError, a, 0.0), in.thresholds));
    rows.push_back({{"K", Ks[j]}, {"analytic", a}, {"mc", mc.mean}, {"mcStandardError", mc.standardError}});
  }
  rep.details["partialSums"] = rows;
  bool increasing = true;
  for (std::size_t j = 1; j < analytic.size(); ++j) increasing = increasing && analytic[j] > analytic[j - 1];
  rep.verdicts.push_back({"blaschke-divergence", "partial sums strictly increasing", increasing, "monotone",
                          increasing ? 1.0 : 0.0, 1.0});
  if (Ks.size() >= 2) {
    // Least-squares slope of S(K) against log K.
    double mx = 0.0, my = 0.0;
    for (std::size_t j = 0; j < Ks.size(); ++j) {
      mx += std::log(static_cast<double>(Ks[j]));
      my += analytic[j];
    }
    mx /= static_cast<double>(Ks.size());
    my /= static_cast<double>(Ks.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t j = 0; j < Ks.size(); ++j) {
      const double dx = std::log(static_cast<double>(Ks[j])) - mx;
      sxy += dx * (analytic[j] - my);
      sxx += dx * dx;
    }
    const double slope = sxy / sxx;
    const double rel = std::abs(slope - 0.5) / 0.5;
    rep.details["slope"] = slope;
    rep.verdicts.push_back({"blaschke-divergence", "slope against log K", rel <= in.thresholds.slopeRelative,
                            "relativeResidual", rel, in.thresholds.slopeRelative});
  }
  return rep;
}

// ---- moduli law ----

ExperimentReport moduli_law_check(const ModuliInput& in) {
  if (in.N < 1) throw PreconditionError("moduli check needs N >= 1");
  if (in.replicas < 2) throw PreconditionError("moduli check needs at least two replicas");
  ExperimentReport rep;
  rep.name = "moduli";
  rep.inputs = {{"N", in.N}, {"replicas", in.replicas}, {"seed", in.seed},
                {"thresholds", thresholds_json(in.thresholds)}};
  const std::size_t R = in.replicas, N = static_cast<std::size_t>(in.N);
  const KernelModel model = KernelModel::build(Domain::UnitDisc, Weight::bergman(0.0), in.N);
  const std::uint64_t sd = pass_seed(in.seed, 1), sh = pass_seed(in.seed, 2);
  std::vector<double> dpp(R * N), hyp(R * N);
  const SamplerPlan plan(model);
  parallel_for(R, [&](std::size_t i) {
    RngStream rng(sd, i);
    const Configuration c = sample_projection_dpp(plan, rng);
    std::vector<double> m;
    for (const auto& z : c.points) m.push_back(std::abs(z));
    std::sort(m.begin(), m.end());
    RngStream rh(sh, i);
    std::vector<double> h = sample_moduli_hyperbolic(in.N, rh);
    std::sort(h.begin(), h.end());
    for (std::size_t j = 0; j < N; ++j) {
      dpp[j * R + i] = m[j];
      hyp[j * R + i] = h[j];
    }
  });
  ojson orders = ojson::array();
  for (std::size_t j = 0; j < N; ++j) {
    const KsResult ks = ks_two_sample(slice(dpp, j * R, (j + 1) * R), slice(hyp, j * R, (j + 1) * R));
    orders.push_back({{"order", j + 1}, {"statistic", ks.statistic}, {"pValue", ks.pValue}});
  }
  const KsResult pooled = ks_two_sample(dpp, hyp);
  rep.details["perOrder"] = orders;
  rep.details["pooled"] = {{"statistic", pooled.statistic}, {"pValue", pooled.pValue}};
  rep.verdicts.push_back(p_verdict("moduli-law", "pooled two-sample KS", pooled.pValue, in.thresholds));
  if (in.N == 1) {
    const KsResult one = ks_one_sample(dpp, [](double r) { return std::clamp(r * r, 0.0, 1.0); });
    rep.details["analytic"] = {{"statistic", one.statistic}, {"pValue", one.pValue}};
    rep.verdicts.push_back(p_verdict("moduli-law", "one-sample KS against r^2", one.pValue, in.thresholds));
  }
  return rep;
}

// ---- order separation ----

ExperimentReport order_separation(const OrderSeparationInput& in) {
  if (in.p.size() == in.q.size()) throw PreconditionError("order separation needs anchors of different sizes");
  if (in.replicas < 1) throw PreconditionError("order separation needs at least one replica");
  validate_anchor(in.model, anchor_of(in.p));
  validate_anchor(in.model, anchor_of(in.q));
  ExperimentReport rep;
  rep.name = "order-separation";
  rep.inputs = {{"model", model_summary(in.model)},
                {"p", points_json(in.p)},
                {"q", points_json(in.q)},
                {"window", {{"inner", in.window.inner}, {"outer", json_number(in.window.outer)}}},
                {"replicas", in.replicas},
                {"seed", in.seed}};
  const std::size_t R = in.replicas;
  const int N = in.model.rank();
  auto run = [&](const std::vector<Complex>& anchor, std::uint64_t tag, const std::string& label) {
    const KernelModel m = palm_downdate(in.model, anchor_of(anchor));
    const std::uint64_t s = pass_seed(in.seed, tag);
    std::vector<double> total(R), window(R);
    const SamplerPlan plan(m);
    parallel_for(R, [&](std::size_t i) {
      RngStream rng(s, i);
      const Configuration c = sample_projection_dpp(plan, rng);
      total[i] = static_cast<double>(c.points.size());
      window[i] = static_cast<double>(std::count_if(c.points.begin(), c.points.end(),
                                                    [&](Complex z) { return in.window.contains(z); }));
    });
    const int expected = N - static_cast<int>(anchor.size());
    const auto bad = std::count_if(total.begin(), total.end(), [&](double t) { return t != expected; });
    rep.verdicts.push_back({"order-separation",
                            label + " total count " + std::to_string(expected),
                            bad == 0, "mismatches", static_cast<double>(bad), 0.0});
    std::map<int, std::size_t> hist;
    for (double w : window) ++hist[static_cast<int>(w)];
    ojson h = ojson::array();
    for (const auto& [count, n] : hist) h.push_back({count, n});
    rep.details[label] = {{"anchorSize", anchor.size()}, {"totalCount", expected}, {"windowHistogram", h}};
    if (R >= 2) rep.estimates.push_back({label + " window count", mc_estimate(window, s)});
  };
  run(in.p, 1, "p");
  run(in.q, 2, "q");
  return rep;
}

// ---- determinant identity ----

ExperimentReport det_identity_sweep(const DetSweepInput& in) {
  if (in.pairs.empty()) throw ConfigError("detcheck needs at least one (g, region) pair");
  if (in.replicas < 2) throw PreconditionError("detcheck needs at least two replicas");
  ExperimentReport rep;
  rep.name = "detcheck";
  ojson pairs = ojson::array();
  for (const auto& pr : in.pairs) {
    if (!(pr.g >= 0.0) || !std::isfinite(pr.g)) throw ConfigError("detcheck g must be finite and non-negative");
    if (!(pr.region.outer > pr.region.inner) || !std::isfinite(pr.region.outer))
      throw ConfigError("detcheck regions must be bounded and non-empty");
    pairs.push_back({{"g", pr.g}, {"inner", pr.region.inner}, {"outer", pr.region.outer}});
  }
  rep.inputs = {{"model", model_summary(in.model)},
                {"pairs", pairs},
                {"replicas", in.replicas},
                {"seed", in.seed},
                {"thresholds", thresholds_json(in.thresholds)}};
  const std::size_t R = in.replicas, P = in.pairs.size();
  const std::uint64_t s = pass_seed(in.seed, 1);
  std::vector<std::vector<double>> psi(P, std::vector<double>(R));
  const SamplerPlan plan(in.model);
  parallel_for(R, [&](std::size_t i) {
    RngStream rng(s, i);
    const Configuration c = sample_projection_dpp(plan, rng);
    for (std::size_t k = 0; k < P; ++k) {
      const auto n = std::count_if(c.points.begin(), c.points.end(),
                                   [&](Complex z) { return in.pairs[k].region.contains(z); });
      psi[k][i] = std::pow(in.pairs[k].g, static_cast<double>(n));
    }
  });
  rep.tableColumns = {"replica"};
  for (std::size_t k = 0; k < P; ++k) rep.tableColumns.push_back("psi" + std::to_string(k));
  for (std::size_t i = 0; i < R; ++i) {
    std::vector<double> row{static_cast<double>(i)};
    for (std::size_t k = 0; k < P; ++k) row.push_back(psi[k][i]);
    rep.tableRows.push_back(std::move(row));
  }
  ojson rows = ojson::array();
  for (std::size_t k = 0; k < P; ++k) {
    const DetPair& pr = in.pairs[k];
    const double det = fredholm_expectation(
        in.model, [&pr](Complex z) { return pr.region.contains(z) ? pr.g : 1.0; }, pr.region);
    const MCEstimate mc = mc_estimate(psi[k], s);
    const std::string label = "g=" + fmt(pr.g) + " on [" + fmt(pr.region.inner) + "," + fmt(pr.region.outer) + ")";
    rep.estimates.push_back({"E Psi " + label, mc});
    rep.verdicts.push_back(
        z_verdict("determinant-identity", label, z_score(mc.mean, mc.standardError, det, 0.0), in.thresholds));
    rows.push_back({{"g", pr.g}, {"fredholm", json_number(det)}, {"mc", mc.mean}});
  }
  rep.details["pairs"] = rows;
  return rep;
}

// ---- flat cut ----

ExperimentReport flat_cut_trend(const FlatCutInput& in) {
  ExperimentReport rep;
  rep.name = "flatcut";
  rep.inputs = {{"model", model_summary(in.model)}, {"g", in.g.name()}, {"schedule", vector_json(in.schedule.radii)}};
  const KernelModel palm = palm_downdate(in.model, anchor_of(in.g.poles()));
  const ConditionReport c = condition_integrals(palm, in.g, in.schedule);
  rep.details = {{"palmRank", palm.rank()},
                 {"L", json_number(c.L)},
                 {"V", json_number(c.V)},
                 {"radii", vector_json(c.radii)},
                 {"singularity", vector_json(c.singularity)},
                 {"decay", vector_json(c.decay)},
                 {"variance", vector_json(c.variance)},
                 {"flatcut", vector_json(c.flatcut)},
                 {"extra", c.extra}};
  const bool dec = strictly_decreasing(c.flatcut);
  rep.verdicts.push_back({"flat-cut", "flat-cut integral strictly decreasing over the schedule", dec, "monotone",
                          dec ? 1.0 : 0.0, 1.0});
  return rep;
}

}  // namespace palmdpp
