// Acceptance suite: one PASS/FAIL line per criterion, exit code = number of
// failures.  Every tolerance, seed, and runtime cap is pinned right here so a
// green run certifies the end-to-end numbers, not just unit behavior.
//
// Statistical criteria run at fixed seeds.  The identities under test are
// exact in expectation (each has a deterministic companion check in the unit
// suite); the pinned seed makes the finite-sample draw reproducible, and the
// margins printed alongside each line show how much headroom the draw has.
#include <levyq/levyq.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace levyq;

int g_failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("AC%-2d %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

class Stopwatch {
 public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

LevyExponentModel mm1_model() {
  LevyExponentModel m;
  m.cp_rate = 0.8;
  m.cp_shape = 1.0;
  m.cp_rate_param = 1.0;
  m.bm_drift = -1.0;
  m.bm_var = 0.0;
  m.gamma_shape = 0.0;
  m.gamma_rate = 1.0;
  return m;
}

LevyExponentModel three_component_model() {
  LevyExponentModel m;
  m.cp_rate = 0.2;
  m.cp_shape = 1.2;
  m.cp_rate_param = 0.5;
  m.bm_drift = -1.0;
  m.bm_var = 0.1;
  m.gamma_shape = 1.0;
  m.gamma_rate = 5.0;
  return m;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_var(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double sample_cov(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean_of(a), mb = mean_of(b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(a.size() - 1);
}

double median_abs(std::vector<double> v) {
  for (double& x : v) x = std::fabs(x);
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

ProbedSample prefix_of(const ProbedSample& full, std::size_t n) {
  ProbedSample out;
  out.xi = full.xi;
  out.event_exact = full.event_exact;
  out.values.assign(full.values.begin(), full.values.begin() + static_cast<std::ptrdiff_t>(n + 1));
  out.idle.assign(full.idle.begin(), full.idle.begin() + static_cast<std::ptrdiff_t>(n + 1));
  return out;
}

// ---------------------------------------------------------------------------
// AC1: exponent inversion |phi(psi(xi)) - xi| <= 1e-9 over random stable
// models, and the M/M/1 closed form psi(xi) = (xi+lam-mu+sqrt((xi+lam-mu)^2
// + 4 xi mu))/2 reproduced to 1e-5 at xi = 1.
void criterion1() {
  const Stopwatch sw;
  constexpr double kInversionTol = 1e-9;
  constexpr double kClosedFormTol = 1e-5;
  constexpr double kTimeCapMs = 1000.0;

  double max_err = 0.0;
  rng_stream g(42, 0);
  for (int i = 0; i < 50; ++i) {
    LevyExponentModel m;
    m.cp_rate = (i % 7 == 0) ? 0.0 : 2.0 * g.uniform();
    m.cp_shape = 0.3 + 2.7 * g.uniform();
    m.cp_rate_param = 0.3 + 2.7 * g.uniform();
    m.bm_var = (i % 3 == 0) ? 0.0 : 2.0 * g.uniform();
    m.gamma_shape = (i % 5 == 0) ? 0.0 : 2.0 * g.uniform();
    m.gamma_rate = 0.3 + 2.7 * g.uniform();
    const double jump_mass = m.cp_rate * m.cp_shape / m.cp_rate_param +
                             m.gamma_shape / m.gamma_rate;
    m.bm_drift = -jump_mass - (0.1 + 2.0 * g.uniform());  // net drift strictly negative
    for (const double xi : {0.1, 1.0, 5.0})
      max_err = std::max(max_err, std::fabs(phi(m, psi(m, xi)) - xi));
  }

  const double lam = 0.8, mu = 1.0, xi = 1.0;
  const double closed = 0.5 * (xi + lam - mu + std::sqrt((xi + lam - mu) * (xi + lam - mu) +
                                                         4.0 * xi * mu));
  const double psi_mm1 = psi(mm1_model(), xi);
  const double closed_err = std::fabs(psi_mm1 - closed);
  const double pinned_err = std::fabs(psi_mm1 - 1.477033);

  const double t = sw.ms();
  const bool ok = max_err <= kInversionTol && closed_err <= kClosedFormTol &&
                  pinned_err <= kClosedFormTol && t < kTimeCapMs;
  report(1, ok,
         fmt("inversion max|phi(psi(xi))-xi|=%.3g (tol %.0e); mm1 psi(1)=%.9f vs closed form "
             "%.9f (|d|=%.2g, tol %.0e); t=%.0fms (cap %.0fms)",
             max_err, kInversionTol, psi_mm1, closed, std::max(closed_err, pinned_err),
             kClosedFormTol, t, kTimeCapMs));
}

// ---------------------------------------------------------------------------
// AC2 + AC3 share one M/M/1(0.8,1) run: xi = 1, n = 2e5 probes after burn-in.
// AC2: empirical E e^{-V} = 1/3 +- 0.01 and empirical P(V=0) = 0.2 +- 0.01.
// AC3: conditional-identity residuals.  The conditional-mean residual must be
// 0 +- 3 SE.  The idle statistic Y_i e^{psi V_{i-1}} has expectation
// xi/psi(xi) exactly, but its summand has infinite variance whenever
// psi(xi) exceeds the stationary tail rate (here 1.477 vs 0.2), so no
// absolute finite-n tolerance is meaningful; it is checked in the
// self-normalized form |mean - xi/psi| <= 3 SE, plus the constant itself:
// |xi/psi(xi) - 0.677| <= 0.01.
void criterion2_3() {
  constexpr std::uint64_t kSeed = 10;
  constexpr double kMomentTol = 0.01;
  constexpr double kTimeCapMs = 30000.0;

  const Stopwatch sw;
  const auto mm1 = mm1_model();
  SimulationConfig sc;
  sc.model = mm1;
  sc.xi = 1.0;
  sc.n_probes = 200000;
  sc.burn_in = 1000;
  sc.seed = kSeed;
  const auto s = simulate_probed_workload(sc);

  const std::size_t n = s.n();
  double sum_lst = 0.0, idle_count = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    sum_lst += std::exp(-s.values[i]);
    if (s.idle[i]) idle_count += 1.0;
  }
  const double lst = sum_lst / static_cast<double>(n);
  const double p0 = idle_count / static_cast<double>(n);
  const double t2 = sw.ms();
  const bool ok2 = std::fabs(lst - 1.0 / 3.0) <= kMomentTol && std::fabs(p0 - 0.2) <= kMomentTol &&
                   t2 < kTimeCapMs;
  report(2, ok2,
         fmt("E e^{-V}=%.4f (target 1/3, tol %.2f); P(V=0)=%.4f (target 0.2, tol %.2f); "
             "n=%zu, t=%.0fms (cap %.0fms)",
             lst, kMomentTol, p0, kMomentTol, n, t2, kTimeCapMs));

  const Stopwatch sw3;
  const auto res = conditional_identity_residuals(s, mm1);
  const double idle_gap = res.idle_stat_mean - res.idle_stat_target;
  const double const_gap = std::fabs(res.idle_stat_target - 0.677);
  const bool ok3 = std::fabs(res.identity_mean) <= 3.0 * res.identity_se &&
                   std::fabs(idle_gap) <= 3.0 * res.idle_stat_se && const_gap <= 0.01;
  report(3, ok3,
         fmt("mean residual=%.2e (3SE=%.2e); idle stat gap=%.3f (3SE=%.3f, infinite-variance "
             "summand: self-normalized); xi/psi=%.6f vs 0.677 (tol 0.01); t=%.0fms",
             res.identity_mean, 3.0 * res.identity_se, idle_gap, 3.0 * res.idle_stat_se,
             res.idle_stat_target, sw3.ms()));
}

// ---------------------------------------------------------------------------
// AC4: the Z-estimator evaluated at alpha = psi_n returns xi exactly (up to
// floating-point summation), for 100 random samples and random psi_n.
void criterion4() {
  const Stopwatch sw;
  constexpr double kTol = 1e-12;
  double max_err = 0.0;
  for (int k = 0; k < 100; ++k) {
    rng_stream g(4242, static_cast<std::uint64_t>(k));
    LevyExponentModel m = mm1_model();
    m.cp_rate = 0.3 + 0.6 * g.uniform();
    SimulationConfig sc;
    sc.model = m;
    sc.xi = 0.3 + 2.7 * g.uniform();
    sc.n_probes = 50 + static_cast<std::size_t>(250.0 * g.uniform());
    sc.burn_in = 200;
    sc.seed = 9000 + static_cast<std::uint64_t>(k);
    const auto s = simulate_probed_workload(sc);
    const double psi_n = 0.3 + 4.0 * g.uniform();
    max_err = std::max(max_err, std::fabs(z_estimate_phi(s, psi_n, psi_n) - sc.xi));
  }
  report(4, max_err <= kTol,
         fmt("max |phi_hat(psi_n; psi_n) - xi| = %.3g over 100 random samples (tol %.0e); "
             "t=%.0fms",
             max_err, kTol, sw.ms()));
}

// ---------------------------------------------------------------------------
// AC5: consistency trend.  M/M/1, xi = 1, alpha in {0.5, 1, 2, 5}: the median
// |phi_hat_n(alpha) - phi(alpha)| over 50 replications strictly decreases
// across n in {30, 200, 2000} (common random numbers: smaller n are prefixes
// of the same trajectory), and the relative error at alpha = 5, n = 2000 is
// at most 5%.
void criterion5() {
  constexpr std::uint64_t kSeed = 1;
  constexpr double kRelTol = 0.05;
  constexpr double kTimeCapMs = 120000.0;

  const Stopwatch sw;
  const auto mm1 = mm1_model();
  const std::vector<double> alphas{0.5, 1.0, 2.0, 5.0};
  const std::vector<std::size_t> sizes{30, 200, 2000};
  const int reps = 50;
  std::vector<std::vector<std::vector<double>>> errs(
      sizes.size(), std::vector<std::vector<double>>(alphas.size()));
  for (int r = 0; r < reps; ++r) {
    SimulationConfig sc;
    sc.model = mm1;
    sc.xi = 1.0;
    sc.n_probes = sizes.back();
    sc.burn_in = 1000;
    sc.seed = kSeed;
    sc.stream_id = static_cast<std::uint64_t>(r);
    const auto full = simulate_probed_workload(sc);
    for (std::size_t ni = 0; ni < sizes.size(); ++ni) {
      const auto pre = prefix_of(full, sizes[ni]);
      const double psi_n = mle_psi(pre, mm1.cp_rate * 1.25 + 1.0).value;
      for (std::size_t ai = 0; ai < alphas.size(); ++ai)
        errs[ni][ai].push_back(z_estimate_phi(pre, psi_n, alphas[ai]) - phi(mm1, alphas[ai]));
    }
  }
  bool decreasing = true;
  std::string meds;
  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    const double m0 = median_abs(errs[0][ai]);
    const double m1 = median_abs(errs[1][ai]);
    const double m2 = median_abs(errs[2][ai]);
    decreasing = decreasing && m0 > m1 && m1 > m2;
    meds += fmt("%s a=%g: %.4f>%.4f>%.4f", ai ? ";" : "", alphas[ai], m0, m1, m2);
  }
  const double rel5 = median_abs(errs[2][3]) / phi(mm1, 5.0);
  const double t = sw.ms();
  const bool ok = decreasing && rel5 <= kRelTol && t < kTimeCapMs;
  report(5, ok,
         fmt("medians%s; rel err(a=5,n=2000)=%.4f (tol %.2f); t=%.0fms (cap %.0fms)", meds.c_str(),
             rel5, kRelTol, t, kTimeCapMs));
}

// ---------------------------------------------------------------------------
// AC6/AC7/AC8 share one study: 500 replications of n = 2000 M/M/1 samples at
// xi = 1, MLE psi_hat per replication, Z-estimates at alpha in {0.5, 1, 2}.
//   AC6: mean psi_hat within 0.02 of 1.477033; Var(sqrt(n)(psi_hat-psi))
//        within 15% of 1/I_xi from the exact M/M/1 quadrature; 95% CI
//        coverage (plug-in variance) within [91%, 99%].
//   AC7: Var(sqrt(n)(phi_hat(a)-phi(a))) within 15% of sigma_alpha_xi_sq at
//        each alpha; sigma_alpha_xi_sq increasing in alpha and in xi.
//   AC8: Cov of sqrt(n) errors at (0.5, 2) within 20% of sigma_alpha_beta_sq;
//        correlation(1,1) = 1 exactly.
void criterion6_7_8() {
  constexpr std::uint64_t kSeed = 555;
  constexpr int kReps = 500;
  constexpr std::size_t kN = 2000;
  constexpr double kPsiTrue = 1.4770329614269;
  constexpr double kMeanTol = 0.02;
  constexpr double kVarRelTol = 0.15;
  constexpr double kCovRelTol = 0.20;
  constexpr double kTimeCapMs = 300000.0;

  const Stopwatch sw;
  const auto mm1 = mm1_model();
  const auto backend = StationaryExpectationBackend::exact(Mm1Oracle{0.8, 1.0});
  const std::vector<double> alphas{0.5, 1.0, 2.0};

  std::vector<double> psi_hats(kReps);
  std::vector<std::vector<double>> zerr(alphas.size(), std::vector<double>(kReps));
  int cover = 0;
  const double z975 = normal_quantile(0.975);
  const double sqrt_n = std::sqrt(static_cast<double>(kN));
  for (int r = 0; r < kReps; ++r) {
    SimulationConfig sc;
    sc.model = mm1;
    sc.xi = 1.0;
    sc.n_probes = kN;
    sc.burn_in = 1000;
    sc.seed = kSeed;
    sc.stream_id = static_cast<std::uint64_t>(r);
    const auto s = simulate_probed_workload(sc);
    const auto pe = mle_psi(s, mm1.cp_rate * 1.25 + 1.0);
    psi_hats[r] = pe.value;
    if (pe.variance && std::fabs(pe.value - kPsiTrue) <= z975 * std::sqrt(*pe.variance)) ++cover;
    for (std::size_t ai = 0; ai < alphas.size(); ++ai)
      zerr[ai][r] = sqrt_n * (z_estimate_phi(s, pe.value, alphas[ai]) - phi(mm1, alphas[ai]));
  }
  const double study_ms = sw.ms();

  // AC6 -- MLE normality.
  const double inv_fisher = 1.0 / I_xi(backend, mm1, 1.0);
  std::vector<double> psi_err(kReps);
  for (int r = 0; r < kReps; ++r) psi_err[r] = sqrt_n * (psi_hats[r] - kPsiTrue);
  const double mean_psi = mean_of(psi_hats);
  const double nvar_psi = sample_var(psi_err);
  const double coverage = static_cast<double>(cover) / kReps;
  const bool ok6 = std::fabs(mean_psi - 1.477033) <= kMeanTol &&
                   std::fabs(nvar_psi / inv_fisher - 1.0) <= kVarRelTol && coverage >= 0.91 &&
                   coverage <= 0.99 && study_ms < kTimeCapMs;
  report(6, ok6,
         fmt("mean psi_hat=%.4f (tol %.2f around 1.477033); n*Var=%.3f vs 1/I_xi=%.3f "
             "(rel %+.1f%%, tol 15%%); coverage=%.3f (band [0.91,0.99]); t=%.0fms (cap %.0fms)",
             mean_psi, kMeanTol, nvar_psi, inv_fisher, 100.0 * (nvar_psi / inv_fisher - 1.0),
             coverage, study_ms, kTimeCapMs));

  // AC7 -- Z-estimator variance formula + monotonicity of sigma_alpha_xi_sq.
  bool var_ok = true;
  std::string var_detail;
  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    const double target = sigma_alpha_xi_sq(mm1, 1.0, alphas[ai], backend);
    const double got = sample_var(zerr[ai]);
    var_ok = var_ok && std::fabs(got / target - 1.0) <= kVarRelTol;
    var_detail += fmt("%s a=%g: %.3f/%.3f (%+.1f%%)", ai ? ";" : "", alphas[ai], got, target,
                      100.0 * (got / target - 1.0));
  }
  bool mono_alpha = true;
  for (const double* a = alphas.data(); a + 1 < alphas.data() + alphas.size(); ++a)
    mono_alpha = mono_alpha && sigma_alpha_xi_sq(mm1, 1.0, *a, backend) <
                                   sigma_alpha_xi_sq(mm1, 1.0, *(a + 1), backend);
  mono_alpha = mono_alpha && sigma_alpha_xi_sq(mm1, 1.0, 2.0, backend) <
                                 sigma_alpha_xi_sq(mm1, 1.0, 5.0, backend);
  const bool mono_xi = sigma_alpha_xi_sq(mm1, 0.1, 1.0, backend) <
                           sigma_alpha_xi_sq(mm1, 1.0, 1.0, backend) &&
                       sigma_alpha_xi_sq(mm1, 1.0, 1.0, backend) <
                           sigma_alpha_xi_sq(mm1, 5.0, 1.0, backend);
  const bool ok7 = var_ok && mono_alpha && mono_xi && study_ms < kTimeCapMs;
  report(7, ok7,
         fmt("n*Var vs sigma_alpha_xi_sq (tol 15%%):%s; increasing in alpha=%d, in xi=%d",
             var_detail.c_str(), mono_alpha, mono_xi));

  // AC8 -- multivariate covariance.
  const double cov_target = sigma_alpha_beta_sq(mm1, 1.0, 0.5, 2.0, backend);
  const double cov_got = sample_cov(zerr[0], zerr[2]);
  const double r11 = correlation(mm1, 1.0, 1.0, 1.0, backend);
  const bool ok8 = std::fabs(cov_got / cov_target - 1.0) <= kCovRelTol && r11 == 1.0;
  report(8, ok8,
         fmt("Cov(0.5,2): %.3f vs %.3f (rel %+.1f%%, tol 20%%); r(1,1)=%.17g (exactly 1: %d)",
             cov_got, cov_target, 100.0 * (cov_got / cov_target - 1.0), r11, r11 == 1.0));
}

// ---------------------------------------------------------------------------
// AC9: threshold estimator on the three-component model (0.2, 1.2, 0.5, -1,
// 0.1, 1, 5), xi = 1, tau = 2.
//   (a) over 200 replications of m = 200: mean(theta_hat) - EX(1) lies in
//       (0, bias_bound + 3 SE] with bias_bound = xi E[V(T)|V0=0] e^{-psi tau};
//   (b) at m = 1e4 theta_hat matches the plug-in theta(tau) within 3 SE;
//   (c) the plug-in bias b(tau) <= xi/psi(xi) for tau in {0.5, 1, 2, 5}.
void criterion9() {
  constexpr std::uint64_t kSeed = 1;
  constexpr int kReps = 200;
  constexpr std::size_t kM = 200;
  constexpr double kTau = 2.0;
  constexpr double kTimeCapMs = 300000.0;

  const Stopwatch sw;
  const auto m6 = three_component_model();
  const double xi = 1.0;
  const double psi6 = psi(m6, xi);
  const double drift0 = phi(m6, 0.0, 1);  // phi'(0) = -EX(1) = 0.32
  const double mean_from_zero = 1.0 / psi6 - drift0 / xi;  // E[V(T) | V0 = 0]
  const double bias_bound = xi * mean_from_zero * std::exp(-psi6 * kTau);

  std::vector<double> thetas(kReps);
  for (int r = 0; r < kReps; ++r) {
    SimulationConfig sc;
    sc.model = m6;
    sc.xi = xi;
    sc.burn_in = 1000;
    sc.seed = kSeed;
    sc.stream_id = static_cast<std::uint64_t>(r);
    thetas[r] = threshold_theta_streaming(sc, kM, kTau).first.theta_hat;
  }
  const double gap = mean_of(thetas) - (-drift0);  // mean theta_hat - EX(1)
  const double se3 = 3.0 * std::sqrt(sample_var(thetas) / kReps);
  const bool ok_a = gap > 0.0 && gap <= bias_bound + se3;

  // (b) one long run; SE from the qualifying pair increments themselves.
  SimulationConfig sc;
  sc.model = m6;
  sc.xi = xi;
  sc.burn_in = 1000;
  sc.seed = kSeed;
  sc.stream_id = 777001;
  const auto [big, consumed] = threshold_theta_streaming(sc, 10000, kTau);
  std::vector<double> statv(consumed.values.begin() + 1, consumed.values.end());
  const auto plug = StationaryExpectationBackend::plugin(statv, 500, 0, 1);
  const double theta_plug = theta_tau_asymptotic(m6, xi, kTau, plug).theta_tau;
  std::vector<double> inc;
  for (std::size_t i = 1; i < consumed.values.size(); ++i)
    if (consumed.values[i - 1] >= kTau)
      inc.push_back(xi * (consumed.values[i] - consumed.values[i - 1]));
  const double se3_big = 3.0 * std::sqrt(sample_var(inc) / static_cast<double>(inc.size()));
  const bool ok_b = std::fabs(big.theta_hat - theta_plug) <= se3_big;

  // (c) structural bound on the plug-in bias.
  bool ok_c = true;
  for (const double tv : {0.5, 1.0, 2.0, 5.0})
    ok_c = ok_c && theta_tau_asymptotic(m6, xi, tv, plug).bias <= xi / psi6;

  const double t = sw.ms();
  const bool ok = ok_a && ok_b && ok_c && t < kTimeCapMs;
  report(9, ok,
         fmt("mean theta_hat-EX(1)=%.4f in (0, %.4f]=%d; m=1e4 |theta_hat-plug-in|=%.4f "
             "(3SE=%.4f)=%d; b(tau)<=xi/psi for all tau=%d; t=%.0fms (cap %.0fms)",
             gap, bias_bound + se3, ok_a, std::fabs(big.theta_hat - theta_plug), se3_big, ok_b,
             ok_c, t, kTimeCapMs));
}

// ---------------------------------------------------------------------------
// AC10: threshold-psi pipeline on the three-component model.
//   (a) psi_tilde within 2% of the numeric psi(1) from one n = 1e5 sample,
//       using every qualifying pair above tau = 4.  (The tau = 2 root limit
//       carries a ~3.5% systematic offset from the theta(tau) bias at any n,
//       so the pipeline is exercised at a higher threshold where the offset
//       is ~0.3%.)
//   (b) over 50 replications of the m = 200 threshold scenario, the mean
//       |phi_hat - phi| across the alpha grid at tau = 2 is no worse than at
//       tau = 0.5: the low threshold is the less accurate one.
void criterion10() {
  constexpr std::uint64_t kSeedA = 4;
  constexpr double kTauA = 4.0;
  constexpr double kRelTol = 0.02;

  const Stopwatch sw;
  const auto m6 = three_component_model();
  const double psi6 = psi(m6, 1.0);

  SimulationConfig sc;
  sc.model = m6;
  sc.xi = 1.0;
  sc.n_probes = 100000;
  sc.burn_in = 1000;
  sc.seed = kSeedA;
  const auto s = simulate_probed_workload(sc);
  std::size_t pairs = 0;
  for (std::size_t i = 1; i <= s.n(); ++i)
    if (s.values[i - 1] >= kTauA) ++pairs;
  const auto est = threshold_theta(s, pairs, kTauA);
  const double rel = est.psi_tilde / psi6 - 1.0;
  const bool ok_a = std::fabs(rel) <= kRelTol && !est.fallback_used;

  // (b) the packaged threshold scenario, 50 replications, tau in {0.5,...,5}.
  ExperimentConfig cfg = ExperimentConfig::built_in("fig7");
  cfg.reps = 50;
  cfg.out_dir = (std::filesystem::temp_directory_path() / "levyq_acceptance" / "ac10").string();
  const auto res = run_scenario(cfg);
  std::map<double, std::pair<double, std::size_t>> acc;  // tau -> (sum |err|, count)
  for (const auto& row : res.rows) {
    auto& cell = acc[row.tau];
    cell.first += std::fabs(row.phi_hat - row.phi_true);
    cell.second += 1;
  }
  const double mean_low = acc[0.5].first / static_cast<double>(acc[0.5].second);
  const double mean_mid = acc[2.0].first / static_cast<double>(acc[2.0].second);
  const bool ok_b = mean_mid <= mean_low;

  const bool ok = ok_a && ok_b;
  report(10, ok,
         fmt("psi_tilde=%.4f vs psi=%.4f (rel %+.2f%%, tol 2%%, %zu pairs at tau=%g)=%d; "
             "mean|phi err| tau=2: %.4f <= tau=0.5: %.4f =%d; t=%.0fms",
             est.psi_tilde, psi6, 100.0 * rel, pairs, kTauA, ok_a, mean_mid, mean_low, ok_b,
             sw.ms()));
}

// ---------------------------------------------------------------------------
// AC11: identifiability.  M/M/1 sample of n = 1e5 probes, curve anchored at
// alpha_+ = 200: lambda_hat = 0.8 +- 0.02 and G*(1) = 0.5 +- 0.05.
void criterion11() {
  constexpr std::uint64_t kSeed = 8;
  constexpr double kLambdaTol = 0.02;
  constexpr double kGTol = 0.05;

  const Stopwatch sw;
  const auto mm1 = mm1_model();
  SimulationConfig sc;
  sc.model = mm1;
  sc.xi = 1.0;
  sc.n_probes = 100000;
  sc.burn_in = 1000;
  sc.seed = kSeed;
  const auto s = simulate_probed_workload(sc);
  const double psi_n = mle_psi(s, mm1.cp_rate * 1.25 + 1.0).value;
  const auto curve = phi_curve(s, psi_n, {1.0, 200.0});
  const auto id = identify_cp(curve, 200.0);
  const double g1 = id.g_star[0];
  const bool ok = std::fabs(id.lambda_hat - 0.8) <= kLambdaTol && std::fabs(g1 - 0.5) <= kGTol;
  report(11, ok,
         fmt("lambda_hat=%.4f (target 0.8, tol %.2f); G*(1)=%.4f (target 0.5, tol %.2f); "
             "t=%.0fms",
             id.lambda_hat, kLambdaTol, g1, kGTol, sw.ms()));
}

// ---------------------------------------------------------------------------
// AC12: determinism.  Rerunning a scenario with the same seed and thread
// count produces byte-identical files; covered for both the curve route
// (fig2) and the multi-threaded threshold route (fig6, 3 replications over
// 3 threads).
void criterion12() {
  const Stopwatch sw;
  const auto base = std::filesystem::temp_directory_path() / "levyq_acceptance";

  const auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  bool ok = true;
  std::string detail;
  int pair_id = 0;
  for (const char* name : {"fig2", "fig6"}) {
    ExperimentConfig cfg = ExperimentConfig::built_in(name);
    if (std::string(name) == "fig6") {
      cfg.reps = 3;
      cfg.threads = 3;
    }
    std::size_t compared = 0;
    bool same = true;
    ExperimentResult first;
    for (int run = 0; run < 2; ++run) {
      cfg.out_dir = (base / fmt("ac12_%d_%d", pair_id, run)).string();
      std::filesystem::remove_all(cfg.out_dir);
      const auto res = run_scenario(cfg);
      if (run == 0) {
        first = res;
        continue;
      }
      same = res.files == first.files;
      for (const auto& f : res.files) {
        same = same && slurp(std::filesystem::path(first.config.out_dir) / f) ==
                           slurp(std::filesystem::path(res.config.out_dir) / f);
        ++compared;
      }
    }
    ok = ok && same && compared > 0;
    detail += fmt("%s%s: %zu files byte-identical=%d", pair_id ? "; " : "", name, compared, same);
    ++pair_id;
  }
  report(12, ok, fmt("%s; t=%.0fms", detail.c_str(), sw.ms()));
}

}  // namespace

int main() {
  std::printf("levyq acceptance suite\n");
  const Stopwatch total;
  criterion1();
  criterion2_3();
  criterion4();
  criterion5();
  criterion6_7_8();
  criterion9();
  criterion10();
  criterion11();
  criterion12();
  std::printf("%d criterion(s) failed; total %.1fs\n", g_failures, total.ms() / 1000.0);
  return g_failures;
}
