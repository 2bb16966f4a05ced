//! Truncation and discretisation of the asset-price domain onto the
//! `d^n` basis states of a qudit register.

use crate::engine::MAX_TOTAL_DIM;
use crate::error::{Error, Result};
use crate::market::{gbm_moments, lognormal_pdf, payoff_call, GbmParams};
use crate::num::Real;
use std::io::{self, Write};

/// Default truncation width in standard deviations around the mean.
pub const DEFAULT_TRUNC_SIGMAS: f64 = 3.0;

/// A truncated, discretised asset-price domain.
///
/// The domain `[s_min, s_max]` is split into `d^n` cells of width
/// `omega`; `points[i] = s_min + (i + 1/2)·omega` is the cell midpoint
/// and `probs[i]` the density sample there, normalised so the set sums
/// to one. `norm` keeps the raw normaliser the samples were divided by.
#[derive(Clone, Debug)]
pub struct AssetGrid<T> {
    pub s_min: T,
    pub s_max: T,
    pub omega: T,
    pub d: usize,
    pub n: usize,
    pub points: Vec<T>,
    pub probs: Vec<T>,
    pub norm: T,
}

impl<T: Real> AssetGrid<T> {
    /// Assemble a grid from raw (unnormalised, non-negative) weights.
    pub fn from_weights(s_min: T, s_max: T, d: usize, n: usize, weights: &[T]) -> Result<Self> {
        let size = checked_points(d, n)?;
        if weights.len() != size {
            return Err(Error::Layout(format!(
                "expected {size} weights for d={d}, n={n}, got {}",
                weights.len()
            )));
        }
        if s_max <= s_min {
            return Err(Error::Domain(format!("empty domain [{s_min}, {s_max}]")));
        }
        if weights.iter().any(|w| *w < T::zero() || !w.is_finite()) {
            return Err(Error::Domain(
                "weights must be finite and non-negative".into(),
            ));
        }
        let norm: T = weights.iter().copied().sum();
        if norm <= T::zero() {
            return Err(Error::Domain("weights sum to zero".into()));
        }
        let omega = (s_max - s_min) / T::of_usize(size);
        let half = T::of_f64(0.5);
        let points: Vec<T> = (0..size)
            .map(|i| s_min + (T::of_usize(i) + half) * omega)
            .collect();
        let probs: Vec<T> = weights.iter().map(|&w| w / norm).collect();
        Ok(Self {
            s_min,
            s_max,
            omega,
            d,
            n,
            points,
            probs,
            norm,
        })
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    /// CSV dump with columns `index,s_i,p_i`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "index,s_i,p_i")?;
        for (i, (s, p)) in self.points.iter().zip(&self.probs).enumerate() {
            writeln!(w, "{i},{s},{p}")?;
        }
        Ok(())
    }
}

fn checked_points(d: usize, n: usize) -> Result<usize> {
    if d < 2 {
        return Err(Error::InvalidParams(format!(
            "subsystem dimension must be >= 2, got {d}"
        )));
    }
    if n < 1 {
        return Err(Error::InvalidParams("need at least one qudit".into()));
    }
    let size = d.checked_pow(n as u32).ok_or(Error::Resource {
        requested: usize::MAX,
        cap: MAX_TOTAL_DIM,
    })?;
    if size > MAX_TOTAL_DIM {
        return Err(Error::Resource {
            requested: size,
            cap: MAX_TOTAL_DIM,
        });
    }
    Ok(size)
}

/// Truncate the terminal price distribution to `trunc_sigmas` standard
/// deviations around its mean (floored at zero) and sample the density at
/// the `d^n` cell midpoints.
pub fn build_grid<T: Real>(
    params: &GbmParams<T>,
    d: usize,
    n: usize,
    trunc_sigmas: T,
) -> Result<AssetGrid<T>> {
    params.validate()?;
    if trunc_sigmas <= T::zero() {
        return Err(Error::InvalidParams(format!(
            "truncation width must be > 0, got {trunc_sigmas}"
        )));
    }
    let size = checked_points(d, n)?;
    let (mean, sd) = gbm_moments(params, params.maturity);
    let s_min = (mean - trunc_sigmas * sd).max(T::zero());
    let s_max = mean + trunc_sigmas * sd;
    let omega = (s_max - s_min) / T::of_usize(size);
    let half = T::of_f64(0.5);
    let weights: Vec<T> = (0..size)
        .map(|i| {
            let s = s_min + (T::of_usize(i) + half) * omega;
            lognormal_pdf(s, params, params.maturity)
        })
        .collect::<Result<_>>()?;
    AssetGrid::from_weights(s_min, s_max, d, n, &weights)
}

/// Map a strike price to its register integer: the smallest `k` with
/// `points[k] >= strike` (the ceiling of `(strike − s_min)/ω − 1/2`),
/// clamped to the last index when the strike lies beyond every midpoint.
///
/// A strike exactly midway between two points maps to the higher index
/// (round half up). Rounding up rather than to nearest keeps the
/// comparator branch `{i >= k}` equal to the set of grid points that are
/// actually in the money, so the payoff rotations never encode a
/// negative moneyness.
pub fn strike_index<T: Real>(grid: &AssetGrid<T>, strike: T) -> Result<usize> {
    if strike < grid.s_min || strike > grid.s_max {
        return Err(Error::Domain(format!(
            "strike {strike} outside the truncated domain [{}, {}]",
            grid.s_min, grid.s_max
        )));
    }
    let k = grid
        .points
        .iter()
        .position(|&s| s >= strike)
        .unwrap_or(grid.size() - 1);
    Ok(k)
}

/// Expected payoff of the discretised distribution,
/// `Σᵢ pᵢ·max(0, sᵢ − strike)` — the finite-resource classical benchmark.
pub fn discretized_expected_payoff<T: Real>(grid: &AssetGrid<T>, strike: T) -> T {
    grid.points
        .iter()
        .zip(&grid.probs)
        .map(|(&s, &p)| p * payoff_call(s, strike))
        .sum()
}
