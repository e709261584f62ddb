#include "kyleot/filtering.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "kyleot/errors.hpp"
#include "kyleot/gauss_hermite.hpp"
#include "kyleot/rng.hpp"

namespace kyleot {

double linear_filter_var(const MarketParams& params, double t) {
  return params.signal_var_at(t) - t / params.T * params.signal_var_total();
}

double FilterLaw::mahalanobis2(double zt, double s) const {
  const Vec2 d{zt - mean[0], s - mean[1]};
  if (filtered[0] && filtered[1]) {
    const Vec2 x = cov.solve(d);
    return d[0] * x[0] + d[1] * x[1];
  }
  if (filtered[0]) return d[0] * d[0] / cov.xx;
  if (filtered[1]) return d[1] * d[1] / cov.yy;
  return 0.0;
}

Mat2 linquad_filter_cov(const MarketParams& params, double psi, double t) {
  const SurplusFamily fam = SurplusFamily::linear_quadratic(psi);
  const FamilyScalars sc = family_scalars(params, fam);
  const double sig2 = params.sigma * params.sigma;
  const double lam2 = sc.lambda * sc.lambda;
  const double lt2 = sc.lambda_tilde * sc.lambda_tilde;
  const double e2 = sc.eps * sc.eps;
  // Rearranged so that t = 0 reproduces the prior covariance exactly:
  // sigma^2 lt2 (T - e2 psi^2 lt2 t) - sigma^2 (T - t)
  //   = sigma_beta^2 + sigma^2 t (1 - e2 psi^2 lt2^2), and similarly for yy.
  Mat2 cov;
  cov.xx = params.sigma_beta * params.sigma_beta + sig2 * t * (1.0 - e2 * psi * psi * lt2 * lt2);
  cov.yy = params.signal_var_at(t) - sig2 * e2 * lam2 * lam2 * t;
  cov.xy = e2 * psi * lt2 * lam2 * sig2 * t;
  return cov;
}

FilterLaw closed_form_law(const MarketParams& params, const SurplusFamily& family, double t, double y) {
  if (t < 0.0 || t > params.T) throw std::invalid_argument("closed_form_law: t outside [0, T]");
  const FamilyScalars sc = family_scalars(params, family);
  FilterLaw law;
  law.family = family.tag;
  law.t = t;
  law.y = y;
  switch (family.tag) {
    case FamilyTag::kLinear: {
      const double v = linear_filter_var(params, t);
      if (v < -1e-12 * params.signal_var_total())
        throw PreconditionError("closed_form_law: negative filter variance (linear)");
      law.filtered[1] = true;
      law.mean = {-params.m_beta, sc.lambda * y};
      law.slope = {0.0, sc.lambda};
      law.cov = Mat2{params.shifted_noise_var(t), 0.0, std::max(v, 0.0)};
      break;
    }
    case FamilyTag::kActivist: {
      // sigma^2 (T - t)(lambda^2 - 1) written to give sigma_beta^2 exactly at t = 0.
      const double v = params.sigma_beta * params.sigma_beta * (params.T - t) / params.T;
      law.filtered[0] = true;
      law.mean = {-params.m_beta - sc.lambda * y, 0.0};
      law.slope = {-sc.lambda, 0.0};
      law.cov = Mat2{v, 0.0, params.signal_var_at(t)};
      break;
    }
    case FamilyTag::kLinearQuadratic: {
      const Mat2 cov = linquad_filter_cov(params, family.psi, t);
      if (!cov.psd(1e-10))
        throw PreconditionError("closed_form_law: filter covariance not PSD (linquad, K_t <= 0)");
      law.filtered[0] = law.filtered[1] = true;
      const double eps = sc.eps;
      law.mean = {-params.m_beta - eps * family.psi * sc.lambda_tilde * sc.lambda_tilde * y,
                  eps * sc.lambda * sc.lambda * y};
      law.slope = {-eps * family.psi * sc.lambda_tilde * sc.lambda_tilde, eps * sc.lambda * sc.lambda};
      law.cov = cov;
      break;
    }
  }
  return law;
}

double fourier_transform_check(const MarketParams& params, const SurplusFamily& family,
                               const TransportSolution& transport, double t, double y,
                               const std::vector<std::pair<double, double>>& freq_grid, int quad_order) {
  const double inc_var = params.sigma * params.sigma * (params.T - t);
  const double tail = params.signal_var_tail(t);
  const CouplingDisintegration& pi = transport.coupling_given_y;
  const FilterLaw law = closed_form_law(params, family, t, y);
  const GaussHermiteRule& rule = gauss_hermite(quad_order);
  const double scale = std::sqrt(2.0 * inc_var);

  double worst = 0.0;
  for (const auto& [u, v] : freq_grid) {
    const Vec2 theta{u, v};
    // Backward representation: growth factor times the smoothed terminal cf.
    std::complex<double> smoothed(0.0, 0.0);
    for (std::size_t i = 0; i < rule.node.size(); ++i) {
      const double w = y + scale * rule.node[i];
      const Vec2 mean{pi.mean0[0] + pi.slope[0] * w, pi.mean0[1] + pi.slope[1] * w};
      smoothed += rule.weight[i] * gaussian_cf(theta, mean, pi.cov);
    }
    smoothed /= 1.7724538509055160272981674833411;  // sqrt(pi)
    const double growth = std::exp(0.5 * (u * u * inc_var + v * v * tail));
    const std::complex<double> backward = growth * smoothed;
    const std::complex<double> closed = gaussian_cf(theta, law.mean, law.cov);
    worst = std::max(worst, std::abs(backward - closed));
  }
  return worst;
}

ParticleFilterResult kushner_particle_oracle(const MarketParams& params, const RateFn& strategy,
                                             const std::vector<double>& t_grid, const std::vector<double>& y_path,
                                             int n_particles, std::uint64_t seed) {
  if (n_particles < 1000) throw std::invalid_argument("particle oracle: need at least 1000 particles");
  if (t_grid.size() != y_path.size() || t_grid.size() < 2)
    throw std::invalid_argument("particle oracle: need matching time and observation grids");

  Rng rng(seed);
  const int n = n_particles;
  std::vector<double> zt(n), s(n), logw(n, 0.0), w(n), zt_new(n), s_new(n);
  for (int i = 0; i < n; ++i) {
    zt[i] = -(params.m_beta + params.sigma_beta * rng.normal());
    s[i] = params.Sigma0 * rng.normal();
  }

  const double sig2 = params.sigma * params.sigma;
  ParticleFilterResult out;
  out.trajectory.reserve(t_grid.size());

  auto snapshot = [&](double t) {
    double sw = 0.0, swz = 0.0, sws = 0.0;
    for (int i = 0; i < n; ++i) {
      sw += w[i];
      swz += w[i] * zt[i];
      sws += w[i] * s[i];
    }
    const double mz = swz / sw, ms = sws / sw;
    double czz = 0.0, czs = 0.0, css = 0.0, sw2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double dz = zt[i] - mz, ds = s[i] - ms;
      czz += w[i] * dz * dz;
      czs += w[i] * dz * ds;
      css += w[i] * ds * ds;
      sw2 += w[i] * w[i];
    }
    ParticleFilterResult::Snapshot snap;
    snap.t = t;
    snap.mean_zt = mz;
    snap.mean_s = ms;
    snap.cov_zz = czz / sw;
    snap.cov_zs = czs / sw;
    snap.cov_ss = css / sw;
    snap.ess = sw * sw / sw2;
    out.trajectory.push_back(snap);
  };

  for (int i = 0; i < n; ++i) w[i] = 1.0 / n;
  snapshot(t_grid[0]);

  for (std::size_t k = 0; k + 1 < t_grid.size(); ++k) {
    const double dt = t_grid[k + 1] - t_grid[k];
    if (!(dt > 0.0)) throw std::invalid_argument("particle oracle: time grid must increase");
    const double dy = y_path[k + 1] - y_path[k];
    const double sv = params.sigma_s.at(t_grid[k]);
    const double s_step = sv * std::sqrt(dt);
    double max_logw = -1e300;
    for (int i = 0; i < n; ++i) {
      const double a = strategy(t_grid[k], y_path[k], zt[i], s[i]);
      const double innov = dy - a * dt;
      // Shared-noise conditioning: the observed innovation IS the particle's
      // noise increment; the weight is the observation likelihood.
      logw[i] += -innov * innov / (2.0 * sig2 * dt);
      zt[i] += innov;
      s[i] += s_step * rng.normal();
      if (logw[i] > max_logw) max_logw = logw[i];
    }
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      w[i] = std::exp(logw[i] - max_logw);
      sum += w[i];
    }
    double sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      w[i] /= sum;
      sum2 += w[i] * w[i];
    }
    const double ess = 1.0 / sum2;
    if (ess < 10.0) throw FilterDegeneracyError("particle oracle: effective sample size collapsed");
    if (ess < 0.5 * n) {
      // Systematic resampling at equally spaced quantiles.
      const double u0 = rng.uniform01() / n;
      double cum = w[0];
      int j = 0;
      for (int i = 0; i < n; ++i) {
        const double pos = u0 + static_cast<double>(i) / n;
        while (cum < pos && j + 1 < n) cum += w[++j];
        zt_new[i] = zt[j];
        s_new[i] = s[j];
      }
      zt.swap(zt_new);
      s.swap(s_new);
      for (int i = 0; i < n; ++i) {
        w[i] = 1.0 / n;
        logw[i] = 0.0;
      }
    }
    snapshot(t_grid[k + 1]);
  }
  return out;
}

}  // namespace kyleot
