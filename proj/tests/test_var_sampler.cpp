#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sbmvar/dgp_sim.hpp"
#include "sbmvar/model_core.hpp"
#include "sbmvar/stats.hpp"
#include "sbmvar/var_sampler.hpp"

using namespace sbmvar;

namespace {

TimeSeriesPanel make_panel(const MatrixXd& values) {
  TimeSeriesPanel p;
  p.values = values;
  for (int j = 0; j < values.cols(); ++j) p.names.push_back("v" + std::to_string(j));
  return p;
}

}  // namespace

TEST_CASE("equation_transform identity-factor reduction") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  const int t_eff = 4, m = 2, k = 3;
  MatrixXd y(t_eff, m), x(t_eff, k), a(k, m);
  for (int i = 0; i < t_eff; ++i) {
    for (int j = 0; j < m; ++j) y(i, j) = nd(gen);
    for (int j = 0; j < k; ++j) x(i, j) = nd(gen);
  }
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = nd(gen);
  MatrixXd b0 = MatrixXd::Identity(m, m);
  MatrixXd d = MatrixXd::Zero(t_eff, m);

  for (int j = 0; j < m; ++j) {
    MatrixXd a0 = a;
    a0.col(j).setZero();
    auto eq = equation_transform(j, y, x, a, b0, d);
    // with B0 = I only the j-th component row block is non-trivial for row j;
    // rows for k > j come from the residual columns of Y - X A^[j=0]
    REQUIRE(eq.y.size() == (m - j) * t_eff);
    REQUIRE(eq.x.rows() == (m - j) * t_eff);
    REQUIRE(eq.x.cols() == k);
    MatrixXd resid = y - x * a0;
    // first block equals column j of the residuals, design equals X
    CHECK((eq.y.head(t_eff) - resid.col(j)).norm() < 1e-13);
    CHECK((eq.x.topRows(t_eff) - x).norm() < 1e-13);
    // remaining blocks have zero design (B0 off-diagonals are zero)
    if (j + 1 < m) CHECK(eq.x.bottomRows((m - j - 1) * t_eff).norm() == 0.0);
  }
}

TEST_CASE("equation_transform matches the brute-force construction, M=2 T_eff=3") {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> nd;
  const int t_eff = 3, m = 2, k = 3;
  MatrixXd y(t_eff, m), x(t_eff, k), a(k, m), d(t_eff, m);
  for (int i = 0; i < t_eff; ++i) {
    for (int j = 0; j < m; ++j) {
      y(i, j) = nd(gen);
      d(i, j) = 0.5 * nd(gen);
    }
    for (int j = 0; j < k; ++j) x(i, j) = nd(gen);
  }
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = nd(gen);
  MatrixXd pd(m, m);
  pd << 2.0, 0.7, 0.7, 1.5;
  MatrixXd b0 = cholesky_lower(pd);

  for (int j = 0; j < m; ++j) {
    MatrixXd a0 = a;
    a0.col(j).setZero();
    MatrixXd resid = y - x * a0;  // T_eff x M
    // vec((resid) * B0_{j:M,.}') over columns q = j..M-1, divided elementwise
    auto eq = equation_transform(j, y, x, a, b0, d);
    int idx = 0;
    for (int q = j; q < m; ++q) {
      for (int t = 0; t < t_eff; ++t, ++idx) {
        double num = 0.0;
        for (int r = 0; r < m; ++r) num += resid(t, r) * b0(q, r);
        double div = std::exp(d(t, q) / 2.0);
        CHECK(eq.y[idx] == doctest::Approx(num / div).epsilon(1e-12));
        for (int c = 0; c < k; ++c)
          CHECK(eq.x(idx, c) == doctest::Approx(b0(q, j) * x(t, c) / div).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("coeff_posterior_moments: prior, OLS limit, scalar hand case") {
  VectorXd prior_mean(2);
  prior_mean << 0.5, -0.5;
  VectorXd prior_var(2);
  prior_var << 2.0, 3.0;
  MatrixXd x0(0, 2);
  VectorXd y0(0);
  auto prior_post = coeff_posterior_moments(y0, x0, prior_mean, prior_var);
  CHECK((prior_post.mean - prior_mean).norm() < 1e-12);
  CHECK(prior_post.cov(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(prior_post.cov(1, 1) == doctest::Approx(3.0).epsilon(1e-12));

  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  MatrixXd x(30, 2);
  VectorXd y(30);
  for (int i = 0; i < 30; ++i) {
    x(i, 0) = nd(gen);
    x(i, 1) = nd(gen);
    y(i) = nd(gen);
  }
  VectorXd huge = VectorXd::Constant(2, 1e12);
  VectorXd zero_mean = VectorXd::Zero(2);
  auto post = coeff_posterior_moments(y, x, zero_mean, huge);
  VectorXd ols = (x.transpose() * x).ldlt().solve(x.transpose() * y);
  CHECK((post.mean - ols).norm() < 1e-6);

  MatrixXd xs(2, 1);
  xs << 1, 1;
  VectorXd ys(2);
  ys << 1, 3;
  auto scalar = coeff_posterior_moments(ys, xs, VectorXd::Zero(1), VectorXd::Ones(1));
  CHECK(scalar.cov(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(scalar.mean[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("sample_coefficients is deterministic and consistent on strong data") {
  // strong-signal DGP: M=2, P=1, T=2000
  Rng gen(17);
  VarCoefficients truth = VarCoefficients::zero(2, 1, false);
  truth.lag[0] << 0.6, 0.2, -0.1, 0.4;
  TimeSeriesPanel panel = simulate_var(truth, MatrixXd::Identity(2, 2), 2000, 0.0, 0.0, gen);

  VarConfig config;
  config.lags = 1;
  config.include_intercept = false;
  VarData data = make_var_data(panel, config);
  ModelState state = initialize_state(data, config);

  Rng r1(5), r2(5);
  VarCoefficients d1 = sample_coefficients(state, data, config, r1);
  VarCoefficients d2 = sample_coefficients(state, data, config, r2);
  CHECK((d1.vec() - d2.vec()).norm() == 0.0);

  // average several draws; should sit near the truth
  Rng r3(7);
  VectorXd mean = VectorXd::Zero(4);
  const int n = 50;
  for (int i = 0; i < n; ++i) {
    state.coeffs = sample_coefficients(state, data, config, r3);
    mean += state.coeffs.vec();
  }
  mean /= n;
  CHECK((mean - truth.vec()).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("horseshoe_update zero-coefficient conditional is InvGa(1,1)") {
  const int k = 4;
  VectorXd a = VectorXd::Zero(k);
  Rng rng(23);
  int below_one = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    HorseshoeState st = HorseshoeState::ones(k);
    HorseshoeState out = horseshoe_update(a, st, rng);
    for (int j = 0; j < k; ++j) {
      CHECK(out.local_scale2[j] > 0.0);
    }
    CHECK(out.global_scale2 > 0.0);
    if (out.local_scale2[0] < 1.0) below_one++;
  }
  // c^2 ~ InvGa(1,1): P(c^2 < 1) = P(Exp(1) > 1) = e^-1
  CHECK(below_one / static_cast<double>(n) ==
        doctest::Approx(std::exp(-1.0)).epsilon(0.03));
}

TEST_CASE("logvol conditional: gradient matches finite differences") {
  std::mt19937_64 gen(29);
  std::normal_distribution<double> nd;
  const int t_eff = 10, m = 3;
  MatrixXd resid(t_eff, m);
  for (int t = 0; t < t_eff; ++t)
    for (int j = 0; j < m; ++j) resid(t, j) = nd(gen);
  MatrixXd am(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) am(i, j) = nd(gen);
  MatrixXd omega = am * am.transpose() + m * MatrixXd::Identity(m, m);
  VolatilityState vols;
  vols.log_vols = MatrixXd::Zero(t_eff, m);
  for (int t = 0; t < t_eff; ++t)
    for (int j = 0; j < m; ++j) vols.log_vols(t, j) = 0.3 * nd(gen);
  vols.persistence = VectorXd::Constant(m, 0.8);
  vols.innovation_var = VectorXd::Constant(m, 0.3);

  std::uniform_int_distribution<int> tpick(0, t_eff - 1), jpick(0, m - 1);
  for (int rep = 0; rep < 20; ++rep) {
    int t = tpick(gen), j = jpick(gen);
    double d = 0.5 * nd(gen);
    const double h = 1e-6;
    double fp = logvol_conditional_logdensity(j, t, d + h, vols, omega, resid);
    double fm = logvol_conditional_logdensity(j, t, d - h, vols, omega, resid);
    double fd = (fp - fm) / (2.0 * h);
    double an = logvol_conditional_gradient(j, t, d, vols, omega, resid);
    CHECK(fd == doctest::Approx(an).epsilon(1e-5));
  }
}

TEST_CASE("logvol conditional with diagonal precision reduces to the univariate form") {
  const int t_eff = 5, m = 2;
  MatrixXd resid = MatrixXd::Constant(t_eff, m, 0.7);
  MatrixXd omega = MatrixXd::Identity(m, m);
  VolatilityState vols;
  vols.log_vols = MatrixXd::Zero(t_eff, m);
  vols.persistence = VectorXd::Constant(m, 0.9);
  vols.innovation_var = VectorXd::Constant(m, 0.2);

  int t = 2, j = 0;
  for (double d : {-0.5, 0.0, 0.8}) {
    double got = logvol_conditional_logdensity(j, t, d, vols, omega, resid);
    double eps = resid(t, j);
    double rho = 0.9, s2 = 0.2;
    double expected = -d / 2.0 - 0.5 * std::exp(-d) * eps * eps -
                      (d - rho * vols.log_vols(t - 1, j)) * (d - rho * vols.log_vols(t - 1, j)) /
                          (2.0 * s2) -
                      (vols.log_vols(t + 1, j) - rho * d) * (vols.log_vols(t + 1, j) - rho * d) /
                          (2.0 * s2);
    CHECK(got == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("logvol conditional is maximized near ln(omega_jj * eps^2) with flat AR") {
  const int t_eff = 3, m = 2;
  MatrixXd resid = MatrixXd::Zero(t_eff, m);
  resid(1, 0) = 1.7;
  MatrixXd omega = MatrixXd::Identity(m, m) * 2.0;
  VolatilityState vols;
  vols.log_vols = MatrixXd::Zero(t_eff, m);
  vols.persistence = VectorXd::Constant(m, 0.0);
  vols.innovation_var = VectorXd::Constant(m, 1e8);  // flat AR terms
  double mode = std::log(2.0 * 1.7 * 1.7);
  double g = logvol_conditional_gradient(0, 1, mode, vols, omega, resid);
  CHECK(std::abs(g) < 1e-6);
}

TEST_CASE("sample_logvols: determinism and acceptance band on synthetic data") {
  Rng gen(31);
  const int t_eff = 300, m = 2;
  MatrixXd omega = MatrixXd::Identity(m, m);
  // generate SV data: d ~ AR(1), eps = exp(d/2) w
  MatrixXd d_true(t_eff, m), resid(t_eff, m);
  for (int j = 0; j < m; ++j) {
    double d = 0.0;
    for (int t = 0; t < t_eff; ++t) {
      d = 0.9 * d + std::sqrt(0.2) * gen.normal();
      d_true(t, j) = d;
      resid(t, j) = std::exp(d / 2.0) * gen.normal();
    }
  }
  VolatilityState vols;
  vols.log_vols = MatrixXd::Zero(t_eff, m);
  vols.persistence = VectorXd::Constant(m, 0.9);
  vols.innovation_var = VectorXd::Constant(m, 0.2);

  Rng r1(3), r2(3);
  auto s1 = sample_logvols(vols, omega, resid, r1);
  auto s2 = sample_logvols(vols, omega, resid, r2);
  CHECK((s1.state.log_vols - s2.state.log_vols).norm() == 0.0);

  Rng r3(5);
  VolatilityState cur = vols;
  double acc = 0.0;
  const int sweeps = 50;
  for (int it = 0; it < sweeps; ++it) {
    auto out = sample_logvols(cur, omega, resid, r3);
    cur = out.state;
    acc += out.acceptance_rate;
  }
  acc /= sweeps;
  CHECK(acc >= 0.5);
  CHECK(acc <= 0.99);
}

TEST_CASE("sample_ar_params: flat path returns the prior; recovery on synthetic path") {
  Rng rng(37);
  const int t_eff = 400;
  VolatilityState vols;
  vols.log_vols = MatrixXd::Zero(t_eff, 1);
  vols.persistence = VectorXd::Constant(1, 0.5);
  vols.innovation_var = VectorXd::Constant(1, 0.2);

  double sum = 0.0, sum2 = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    VolatilityState v = vols;
    sample_ar_params(v, rng);
    sum += v.persistence[0];
    sum2 += v.persistence[0] * v.persistence[0];
  }
  // prior N(0.7, 0.1) truncated to [-0.99, 0.99]: analytic truncated moments
  double mu = 0.7, sd = std::sqrt(0.1);
  double a = (-0.99 - mu) / sd, b = (0.99 - mu) / sd;
  auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); };
  double zmass = norm_cdf(b) - norm_cdf(a);
  double tmean = mu + sd * (phi(a) - phi(b)) / zmass;
  double tvar = sd * sd *
                (1.0 + (a * phi(a) - b * phi(b)) / zmass -
                 std::pow((phi(a) - phi(b)) / zmass, 2));
  double mean = sum / n;
  CHECK(mean == doctest::Approx(tmean).epsilon(0.01));
  CHECK(std::sqrt(sum2 / n - mean * mean) == doctest::Approx(std::sqrt(tvar)).epsilon(0.03));

  // long synthetic path with rho = 0.9
  VolatilityState syn;
  syn.log_vols.resize(2000, 1);
  double d = 0.0;
  for (int t = 0; t < 2000; ++t) {
    d = 0.9 * d + std::sqrt(0.2) * rng.normal();
    syn.log_vols(t, 0) = d;
  }
  syn.persistence = VectorXd::Constant(1, 0.5);
  syn.innovation_var = VectorXd::Constant(1, 0.2);
  double rsum = 0.0;
  for (int i = 0; i < 200; ++i) {
    VolatilityState v = syn;
    sample_ar_params(v, rng);
    rsum += v.persistence[0];
  }
  CHECK(rsum / 200 == doctest::Approx(0.9).epsilon(0.06));
}

TEST_CASE("precision_column_params hand case and limits") {
  MatrixXd s(2, 2);
  s << 1.0, 3.0, 3.0, 2.0;
  MatrixXd omega = MatrixXd::Identity(2, 2);
  VectorXd v(1);
  v << 1.0;
  auto cc = precision_column_params(1, s, omega, v, 200);
  CHECK(cc.gamma_shape == doctest::Approx(101.0));
  CHECK(cc.gamma_rate == doctest::Approx(1.0));  // s_jj/2 = 2/2
  CHECK(cc.normal_cov(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(cc.normal_mean[0] == doctest::Approx(-1.0).epsilon(1e-12));

  VectorXd tiny(1);
  tiny << 1e-14;
  auto shrunk = precision_column_params(1, s, omega, tiny, 200);
  CHECK(std::abs(shrunk.normal_mean[0]) < 1e-10);
  CHECK(shrunk.normal_cov(0, 0) < 1e-13);
}

TEST_CASE("sample_precision: symmetry, PD, and the spike limit") {
  std::mt19937_64 gen(41);
  std::normal_distribution<double> nd;
  const int m = 4, t_eff = 80;
  MatrixXd e(t_eff, m);
  for (int t = 0; t < t_eff; ++t)
    for (int j = 0; j < m; ++j) e(t, j) = nd(gen);
  MatrixXd s = e.transpose() * e;
  MatrixXd tau2 = MatrixXd::Ones(m, m);
  MatrixXi delta0 = MatrixXi::Zero(m, m);
  MatrixXi delta1 = MatrixXi::Ones(m, m) - MatrixXi::Identity(m, m);

  Rng rng(43);
  MatrixXd omega = MatrixXd::Identity(m, m);
  for (int it = 0; it < 200; ++it) {
    omega = sample_precision(s, omega, delta1, tau2, 0.01, t_eff, rng);
    CHECK((omega - omega.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::LLT<MatrixXd> llt(omega);
    CHECK(llt.info() == Eigen::Success);
  }

  // spike limit: with delta = 0 and small c the off-diagonals concentrate at 0
  auto max_offdiag = [&](double c) {
    Rng r(47);
    MatrixXd om = MatrixXd::Identity(m, m);
    double mx = 0.0;
    for (int it = 0; it < 100; ++it) {
      om = sample_precision(s, om, delta0, tau2, c, t_eff, r);
      for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) mx = std::max(mx, std::abs(om(i, j)));
    }
    return mx;
  };
  CHECK(max_offdiag(1e-6) < max_offdiag(0.5));
  CHECK(max_offdiag(1e-8) < 0.05);
}

TEST_CASE("gibbs_sweep preserves invariants and is seed-deterministic") {
  Rng gen(53);
  VarCoefficients truth = random_stable_coefficients(3, 1, gen);
  MatrixXd omega_true = MatrixXd::Identity(3, 3);
  TimeSeriesPanel panel = simulate_var(truth, omega_true, 120, 0.9, 0.1, gen);

  VarConfig config;
  config.lags = 1;
  VarData data = make_var_data(panel, config);
  ModelState s1 = initialize_state(data, config);
  ModelState s2 = initialize_state(data, config);

  Rng r1(7), r2(7);
  for (int it = 0; it < 30; ++it) {
    gibbs_sweep(s1, data, config, r1);
    gibbs_sweep(s2, data, config, r2);
    // determinism
    CHECK((s1.coeffs.vec() - s2.coeffs.vec()).norm() == 0.0);
    CHECK((s1.precision.omega - s2.precision.omega).norm() == 0.0);
    CHECK((s1.sbm.assignments - s2.sbm.assignments).cwiseAbs().sum() == 0);
    // invariants
    s1.vols.validate();
    s1.spike_slab.validate();
    s1.sbm.validate();
    s1.horseshoe.validate();
    CHECK((s1.precision.omega - s1.precision.omega.transpose()).cwiseAbs().maxCoeff() <
          1e-10);
  }
}

TEST_CASE("run_chain retention counts") {
  Rng gen(59);
  VarCoefficients truth = random_stable_coefficients(2, 1, gen);
  TimeSeriesPanel panel = simulate_var(truth, MatrixXd::Identity(2, 2), 60, 0.9, 0.1, gen);

  VarConfig config;
  config.lags = 1;
  config.n_draws = 30;
  config.burn_in = 10;
  config.thin = 2;
  config.seed = 61;
  DrawStore store = run_chain(panel, config);
  CHECK(store.size() == 10);

  config.n_draws = 8;
  config.burn_in = 7;
  config.thin = 1;
  DrawStore one = run_chain(panel, config);
  CHECK(one.size() == 1);
}

TEST_CASE("two chains with different seeds agree (Gelman-Rubin of omega_12 < 1.1)") {
  Rng gen(67);
  VarCoefficients truth = random_stable_coefficients(5, 1, gen);
  TrueNetwork net = sample_true_network(5, 2, {100.0, 1.0}, {1.0, 100.0}, gen);
  MatrixXd omega_true = precision_from_adjacency(net.adjacency, gen);
  TimeSeriesPanel panel = simulate_var(truth, omega_true, 150, 0.9, 0.1, gen);

  VarConfig config;
  config.lags = 1;
  config.n_draws = 1500;
  config.burn_in = 500;
  config.thin = 1;

  auto chain_draws = [&](std::uint64_t seed) {
    VarConfig c = config;
    c.seed = seed;
    DrawStore store = run_chain(panel, c);
    std::vector<double> w;
    for (const Draw& d : store.draws) w.push_back(d.omega(0, 1));
    return w;
  };
  auto c1 = chain_draws(101), c2 = chain_draws(202);
  auto stats = [](const std::vector<double>& v) {
    double m = 0.0, s2 = 0.0;
    for (double x : v) m += x;
    m /= v.size();
    for (double x : v) s2 += (x - m) * (x - m);
    return std::pair<double, double>(m, s2 / (v.size() - 1));
  };
  auto [m1, v1] = stats(c1);
  auto [m2, v2] = stats(c2);
  double n = static_cast<double>(c1.size());
  double w = 0.5 * (v1 + v2);
  double mbar = 0.5 * (m1 + m2);
  double b = n * ((m1 - mbar) * (m1 - mbar) + (m2 - mbar) * (m2 - mbar));  // 2 chains
  double var_plus = (n - 1) / n * w + b / n;
  double rhat = std::sqrt(var_plus / w);
  CHECK(rhat < 1.1);
}
