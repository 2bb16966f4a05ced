//! Classical market model: geometric Brownian motion under the
//! Black-Scholes-Merton assumptions, its log-normal terminal density, and
//! the analytic / Monte Carlo expected-payoff baselines the quantum
//! pipeline is judged against.

use crate::error::{Error, Result};
use crate::math::{integrate, norm_cdf};
use crate::num::Real;
use crate::rng::SimRng;

/// Parameters of the geometric Brownian motion `dS = α S dt + σ S dW`
/// together with a risk-free rate for discounting.
///
/// Drift and rate are kept distinct; risk-neutral pricing is the caller's
/// choice of `drift == risk_free_rate`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GbmParams<T> {
    /// Spot price `S₀ > 0`.
    pub s0: T,
    /// Percentage drift `α` per unit time.
    pub drift: T,
    /// Percentage volatility `σ > 0` per square-root unit time.
    pub volatility: T,
    /// Contract maturity `T > 0` in years.
    pub maturity: T,
    /// Continuously compounded risk-free rate `r`.
    pub risk_free_rate: T,
}

impl<T: Real> GbmParams<T> {
    pub fn new(s0: T, drift: T, volatility: T, maturity: T, risk_free_rate: T) -> Result<Self> {
        let p = Self {
            s0,
            drift,
            volatility,
            maturity,
            risk_free_rate,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.s0.is_finite()
            && self.drift.is_finite()
            && self.volatility.is_finite()
            && self.maturity.is_finite()
            && self.risk_free_rate.is_finite();
        if !finite {
            return Err(Error::InvalidParams("non-finite market parameter".into()));
        }
        if self.s0 <= T::zero() {
            return Err(Error::InvalidParams(format!(
                "s0 must be > 0, got {}",
                self.s0
            )));
        }
        if self.volatility <= T::zero() {
            return Err(Error::InvalidParams(format!(
                "volatility must be > 0, got {}",
                self.volatility
            )));
        }
        if self.maturity <= T::zero() {
            return Err(Error::InvalidParams(format!(
                "maturity must be > 0, got {}",
                self.maturity
            )));
        }
        Ok(())
    }

    /// True exactly when `drift == risk_free_rate`.
    pub fn is_risk_neutral(&self) -> bool {
        self.drift == self.risk_free_rate
    }
}

/// A price trajectory sampled on a uniform time grid; `prices[0] == s0`.
#[derive(Clone, Debug)]
pub struct PricePath<T> {
    pub times: Vec<T>,
    pub prices: Vec<T>,
}

/// Log-normal density of the asset price at time `t`:
/// `p(s) = exp(−(ln(s/S₀) − (α − σ²/2)t)² / (2σ²t)) / (s σ √(2πt))`.
pub fn lognormal_pdf<T: Real>(s: T, params: &GbmParams<T>, t: T) -> Result<T> {
    if s <= T::zero() {
        return Err(Error::Domain(format!("price must be > 0, got {s}")));
    }
    if t <= T::zero() {
        return Err(Error::Domain(format!("time must be > 0, got {t}")));
    }
    let half = T::of_f64(0.5);
    let sig = params.volatility;
    let var_t = sig * sig * t;
    let m = (params.drift - half * sig * sig) * t;
    let z = (s / params.s0).ln() - m;
    let norm = s * sig * (T::of_f64(2.0) * T::PI() * t).sqrt();
    Ok((-(z * z) / (T::of_f64(2.0) * var_t)).exp() / norm)
}

/// Mean and standard deviation of the log-normal price at time `t`:
/// `mean = S₀ e^{αt}`, `sd = mean √(e^{σ²t} − 1)`.
pub fn gbm_moments<T: Real>(params: &GbmParams<T>, t: T) -> (T, T) {
    assert!(t > T::zero(), "time must be > 0");
    let mean = params.s0 * (params.drift * t).exp();
    let sd = mean * ((params.volatility * params.volatility * t).exp() - T::one()).sqrt();
    (mean, sd)
}

/// Sample one price path on a uniform grid of `steps` increments over
/// `[0, maturity]` using exact log-normal increments (no Euler error).
pub fn sample_gbm_path<T: Real>(
    params: &GbmParams<T>,
    steps: usize,
    rng: &mut SimRng,
) -> PricePath<T> {
    assert!(steps >= 1, "need at least one step");
    let half = T::of_f64(0.5);
    let dt = params.maturity / T::of_usize(steps);
    let drift_ln = (params.drift - half * params.volatility * params.volatility) * dt;
    let sig_dt = params.volatility * dt.sqrt();
    let mut times = Vec::with_capacity(steps + 1);
    let mut prices = Vec::with_capacity(steps + 1);
    times.push(T::zero());
    prices.push(params.s0);
    let mut s = params.s0;
    for i in 1..=steps {
        let z = T::sample_standard_normal(rng);
        s *= (drift_ln + sig_dt * z).exp();
        times.push(dt * T::of_usize(i));
        prices.push(s);
    }
    PricePath { times, prices }
}

/// European call payoff `max(0, s − strike)`.
pub fn payoff_call<T: Real>(s: T, strike: T) -> T {
    (s - strike).max(T::zero())
}

/// Present value of `value` paid at time `t`: `value · e^{−rt}`.
pub fn discount<T: Real>(value: T, rate: T, t: T) -> T {
    value * (-rate * t).exp()
}

/// Closed-form undiscounted expected call payoff `E[max(0, S_T − K)]`
/// for the log-normal terminal price:
/// `S₀e^{αT} Φ(d₁) − K Φ(d₂)` with
/// `d₁ = (ln(S₀/K) + (α + σ²/2)T)/(σ√T)` and `d₂ = d₁ − σ√T`.
///
/// Discounting by `e^{−rT}` is left to the caller (see [`discount`]);
/// with `drift == risk_free_rate` that product is the Black-Scholes fair
/// value.
pub fn analytic_expected_payoff<T: Real>(params: &GbmParams<T>, strike: T) -> T {
    assert!(strike > T::zero(), "strike must be > 0");
    let half = T::of_f64(0.5);
    let sig_rt = params.volatility * params.maturity.sqrt();
    let fwd = params.s0 * (params.drift * params.maturity).exp();
    let d1 = ((params.s0 / strike).ln()
        + (params.drift + half * params.volatility * params.volatility) * params.maturity)
        / sig_rt;
    let d2 = d1 - sig_rt;
    fwd * norm_cdf(d1) - strike * norm_cdf(d2)
}

/// Monte Carlo estimate of the expected call payoff from `m` terminal
/// prices, with its standard error.
pub fn mc_expected_payoff<T: Real>(
    params: &GbmParams<T>,
    strike: T,
    m: usize,
    rng: &mut SimRng,
) -> (T, T) {
    assert!(m >= 2, "need at least two samples");
    let half = T::of_f64(0.5);
    let t = params.maturity;
    let drift_ln = (params.drift - half * params.volatility * params.volatility) * t;
    let sig_rt = params.volatility * t.sqrt();
    let mut sum = T::zero();
    let mut sum_sq = T::zero();
    for _ in 0..m {
        let z = T::sample_standard_normal(rng);
        let s = params.s0 * (drift_ln + sig_rt * z).exp();
        let f = payoff_call(s, strike);
        sum += f;
        sum_sq += f * f;
    }
    let n = T::of_usize(m);
    let mean = sum / n;
    let var = (sum_sq - sum * sum / n) / (n - T::one());
    (mean, (var.max(T::zero()) / n).sqrt())
}

/// Expected call payoff of the price distribution restricted to
/// `[s_min, s_max]` and renormalised there, computed by adaptive
/// quadrature. This is the value the grid benchmark converges to as the
/// register grows, and the figure-of-merit separating truncation bias
/// from discretisation error.
pub fn truncated_expected_payoff<T: Real>(
    params: &GbmParams<T>,
    strike: T,
    s_min: T,
    s_max: T,
) -> T {
    let t = params.maturity;
    let tol = T::of_f64(1e-12);
    let pdf = |s: T| lognormal_pdf(s, params, t).unwrap_or_else(|_| T::zero());
    let mass = integrate(&pdf, s_min, s_max, tol);
    let lo = strike.max(s_min);
    if lo >= s_max {
        return T::zero();
    }
    let num = integrate(&|s| (s - strike) * pdf(s), lo, s_max, tol);
    num / mass
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;

    fn fig_params() -> GbmParams<f64> {
        GbmParams::new(2.0, 0.07, 0.3, 1.0, 0.07).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(GbmParams::new(0.0, 0.1, 0.2, 1.0, 0.05).is_err());
        assert!(GbmParams::new(1.0, 0.1, 0.0, 1.0, 0.05).is_err());
        assert!(GbmParams::new(1.0, 0.1, 0.2, -1.0, 0.05).is_err());
        assert!(GbmParams::new(1.0, 0.05, 0.2, 1.0, 0.05)
            .unwrap()
            .is_risk_neutral());
        assert!(!fig_params().is_risk_neutral() || fig_params().drift == 0.07);
    }

    #[test]
    fn pdf_rejects_nonpositive_inputs() {
        let p = fig_params();
        assert!(lognormal_pdf(0.0, &p, 1.0).is_err());
        assert!(lognormal_pdf(-1.0, &p, 1.0).is_err());
        assert!(lognormal_pdf(1.0, &p, 0.0).is_err());
    }

    #[test]
    fn pdf_integrates_to_one() {
        let p = fig_params();
        // ±8 standard deviations in log space carry all but ~1e-15 of the mass.
        let m = (p.drift - 0.5 * p.volatility * p.volatility) * p.maturity;
        let w = 8.5 * p.volatility * p.maturity.sqrt();
        let lo = p.s0 * (m - w).exp();
        let hi = p.s0 * (m + w).exp();
        let total = integrate(&|s| lognormal_pdf(s, &p, 1.0).unwrap(), lo, hi, 1e-12);
        assert!((total - 1.0).abs() < 1e-8, "total mass {total}");
    }

    #[test]
    fn pdf_mean_matches_closed_form() {
        let p = fig_params();
        let m = (p.drift - 0.5 * p.volatility * p.volatility) * p.maturity;
        let w = 9.0 * p.volatility * p.maturity.sqrt();
        let lo = p.s0 * (m - w).exp();
        let hi = p.s0 * (m + w).exp();
        let mean = integrate(&|s| s * lognormal_pdf(s, &p, 1.0).unwrap(), lo, hi, 1e-12);
        let want = 2.0 * 0.07_f64.exp();
        assert!((mean - want).abs() < 1e-8, "mean {mean} want {want}");
    }

    #[test]
    fn pdf_concentrates_in_low_volatility_limit() {
        let p = GbmParams::new(2.0, 0.07, 1e-4, 1.0, 0.07).unwrap();
        let center = 2.0 * 0.07_f64.exp();
        let lo = center * (1.0 - 1e-3);
        let hi = center * (1.0 + 1e-3);
        let mean = integrate(&|s| s * lognormal_pdf(s, &p, 1.0).unwrap(), lo, hi, 1e-10);
        assert!((mean - center).abs() < 1e-6);
    }

    #[test]
    fn moments_match_monte_carlo() {
        let p = fig_params();
        let (mean, sd) = gbm_moments(&p, 1.0);
        let mut rng = derive_stream(11, 0);
        let m = 1_000_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..m {
            let path = sample_gbm_path(&p, 1, &mut rng);
            let s = *path.prices.last().unwrap();
            sum += s;
            sum_sq += s * s;
        }
        let mc_mean = sum / m as f64;
        let mc_sd = ((sum_sq - sum * sum / m as f64) / (m as f64 - 1.0)).sqrt();
        // Three significant figures.
        assert!(
            (mc_mean - mean).abs() / mean < 5e-3,
            "mean {mc_mean} vs {mean}"
        );
        assert!((mc_sd - sd).abs() / sd < 5e-3, "sd {mc_sd} vs {sd}");
    }

    #[test]
    fn moments_limits() {
        let p = GbmParams::new(2.0, 0.07, 1e-12, 1.0, 0.07).unwrap();
        let (_, sd) = gbm_moments(&p, 1.0);
        assert!(sd < 1e-10);
        let p = GbmParams::new(2.0, 0.0, 0.3, 1.0, 0.0).unwrap();
        let (mean, _) = gbm_moments(&p, 1.0);
        assert_eq!(mean, 2.0);
    }

    #[test]
    fn path_deterministic_limit_and_seeding() {
        let p = GbmParams::new(2.0, 0.07, 1e-9, 1.0, 0.07).unwrap();
        let mut rng = derive_stream(3, 0);
        let path = sample_gbm_path(&p, 1, &mut rng);
        assert_eq!(path.prices[0], 2.0);
        assert!((path.prices[1] - 2.0 * 0.07_f64.exp()).abs() < 1e-6);

        let p = fig_params();
        let a = sample_gbm_path(&p, 32, &mut derive_stream(9, 1));
        let b = sample_gbm_path(&p, 32, &mut derive_stream(9, 1));
        assert_eq!(a.prices, b.prices);
        assert!(a.prices.iter().all(|&s| s > 0.0));
        assert!(a.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn path_terminal_mean_matches_moments() {
        let p = fig_params();
        let (mean, _) = gbm_moments(&p, 1.0);
        let mut rng = derive_stream(17, 0);
        let m = 1_000_000;
        let sum: f64 = (0..m)
            .map(|_| *sample_gbm_path(&p, 1, &mut rng).prices.last().unwrap())
            .sum();
        assert!((sum / m as f64 - mean).abs() < 2e-3);
    }

    #[test]
    fn payoff_and_discount_basics() {
        assert!((payoff_call(2.0_f64, 1.7) - 0.3).abs() < 1e-15);
        assert_eq!(payoff_call(1.5, 1.7), 0.0);
        assert_eq!(payoff_call(1.7, 1.7), 0.0);
        assert_eq!(discount(1.0, 0.0, 1.0), 1.0);
        assert!((discount(1.0, 0.07, 1.0) - (-0.07_f64).exp()).abs() < 1e-15);
        assert_eq!(discount(0.0, 0.3, 7.0), 0.0);
    }

    #[test]
    fn discount_round_trip_is_exact_to_eps() {
        let mut rng = derive_stream(23, 0);
        for _ in 0..200 {
            let x: f64 = f64::sample_standard_normal(&mut rng).abs() + 0.1;
            let r: f64 = f64::sample_standard_normal(&mut rng) * 0.1;
            let t: f64 = f64::sample_standard_normal(&mut rng).abs() + 0.01;
            let back = discount(x, r, t) * (r * t).exp();
            assert!((back - x).abs() <= 4.0 * f64::EPSILON * x.abs());
        }
    }

    #[test]
    fn analytic_matches_quadrature() {
        let p = fig_params();
        let m = (p.drift - 0.5 * p.volatility * p.volatility) * p.maturity;
        let w = 9.0 * p.volatility * p.maturity.sqrt();
        let hi = p.s0 * (m + w).exp();
        for strike in [1.7, 0.9, 2.4, 3.6] {
            let quad = integrate(
                &|s| payoff_call(s, strike) * lognormal_pdf(s, &p, 1.0).unwrap(),
                strike.min(p.s0 * (m - w).exp()),
                hi,
                1e-12,
            );
            let ana = analytic_expected_payoff(&p, strike);
            assert!((ana - quad).abs() < 1e-8, "K={strike}: {ana} vs {quad}");
        }
    }

    #[test]
    fn analytic_limits() {
        let p = fig_params();
        let fwd = 2.0 * 0.07_f64.exp();
        assert!((analytic_expected_payoff(&p, 1e-9) - fwd).abs() < 1e-8);
        assert!(analytic_expected_payoff(&p, 100.0) < 1e-12);
    }

    #[test]
    fn analytic_monotonicity() {
        let p = fig_params();
        // Non-increasing in strike.
        let mut prev = f64::INFINITY;
        for i in 1..40 {
            let v = analytic_expected_payoff(&p, 0.2 * i as f64);
            assert!(v <= prev + 1e-12);
            prev = v;
        }
        // Non-decreasing in volatility at the at-the-money strike.
        let atm = p.s0 * (p.drift * p.maturity).exp();
        let mut prev = 0.0;
        for i in 1..20 {
            let q = GbmParams::new(p.s0, p.drift, 0.05 * i as f64, p.maturity, p.risk_free_rate)
                .unwrap();
            let v = analytic_expected_payoff(&q, atm);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn mc_agrees_with_analytic() {
        let p = fig_params();
        let ana = analytic_expected_payoff(&p, 1.7);
        let (est, se) = mc_expected_payoff(&p, 1.7, 1_000_000, &mut derive_stream(5, 0));
        assert!((est - ana).abs() < 3.0 * se, "est {est} ana {ana} se {se}");
    }

    #[test]
    fn mc_deterministic_limit() {
        let p = GbmParams::new(2.0, 0.07, 1e-9, 1.0, 0.07).unwrap();
        let (est, _) = mc_expected_payoff(&p, 1.7, 100, &mut derive_stream(5, 1));
        let want = payoff_call(2.0 * 0.07_f64.exp(), 1.7);
        assert!((est - want).abs() < 1e-7);
    }

    #[test]
    fn mc_error_scales_like_inverse_sqrt() {
        let p = fig_params();
        let ana = analytic_expected_payoff(&p, 1.7);
        let mut pts = Vec::new();
        for (i, &m) in [1_000usize, 8_000, 64_000].iter().enumerate() {
            let mut se_sum = 0.0;
            let seeds = 30;
            for s in 0..seeds {
                let (est, _) =
                    mc_expected_payoff(&p, 1.7, m, &mut derive_stream(100, (i * seeds + s) as u64));
                se_sum += (est - ana) * (est - ana);
            }
            pts.push((m as f64, (se_sum / seeds as f64).sqrt()));
        }
        let slope = crate::math::log_log_slope(&pts);
        assert!((-0.6..=-0.4).contains(&slope), "slope {slope}");
    }

    #[test]
    fn mc_within_four_stderr_most_of_the_time() {
        let p = fig_params();
        let ana = analytic_expected_payoff(&p, 1.7);
        for (j, m) in [1_000usize, 10_000, 100_000, 1_000_000]
            .into_iter()
            .enumerate()
        {
            let mut hits = 0;
            for s in 0..100u64 {
                let (est, se) =
                    mc_expected_payoff(&p, 1.7, m, &mut derive_stream(7_000 + j as u64, s));
                if (est - ana).abs() <= 4.0 * se {
                    hits += 1;
                }
            }
            assert!(
                hits >= 95,
                "m={m}: only {hits}/100 inside 4 standard errors"
            );
        }
    }

    #[test]
    fn truncated_quadrature_sits_between_zero_and_full_value() {
        let p = fig_params();
        let (mean, sd) = gbm_moments(&p, 1.0);
        let v = truncated_expected_payoff(&p, 1.7, (mean - 3.0 * sd).max(0.0), mean + 3.0 * sd);
        assert!(v > 0.0 && v < analytic_expected_payoff(&p, 1.7));
    }
}
