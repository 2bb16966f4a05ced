//! Amplitude estimation without phase estimation.
//!
//! The Grover operator `Q = −(A S₀ A†)·S₁` rotates the prepared state in
//! the plane spanned by its payoff-0 and payoff-1 components, so the
//! payoff qubit of `Q^m A|0⟩` reads 1 with probability
//! `sin²((2m+1)·θ)` where `sin²θ` is the oracle's own hit probability.
//! Running a geometric schedule of powers `m_ℓ = 0, 1, 2, 4, …` with `N`
//! shots each and maximising the joint binomial likelihood over θ
//! estimates the amplitude with error falling as 1/M in the total oracle
//! call count `M = Σ N(2m_ℓ + 1)`, against 1/√M for plain sampling.

use crate::engine::{CMatrix, MatrixOp, RegisterLayout, StateVector};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::rng::SimRng;
use num_complex::Complex;
use rand_distr::{Binomial, Distribution};
use std::io::{self, Write};

/// Grid resolution used by [`mle_estimate`]'s coarse scan.
pub const DEFAULT_MLE_GRID: usize = 100_000;

/// Probability clamp keeping the log-likelihood finite at θ ∈ {0, π/2}.
const LIKELIHOOD_EPS: f64 = 1e-15;

/// Measurement schedule: levels `ℓ = 0..=levels` with Grover powers
/// `m₀ = 0` and `m_ℓ = 2^{ℓ−1}`, each measured `shots_per_level` times.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub levels: usize,
    pub shots_per_level: usize,
}

impl Schedule {
    pub fn new(levels: usize, shots_per_level: usize) -> Result<Self> {
        if shots_per_level == 0 {
            return Err(Error::InvalidParams(
                "need at least one shot per level".into(),
            ));
        }
        if levels > 48 {
            return Err(Error::InvalidParams(format!(
                "schedule depth {levels} overflows the Grover power budget"
            )));
        }
        Ok(Self {
            levels,
            shots_per_level,
        })
    }

    /// `[0, 1, 2, 4, …, 2^{levels−1}]`.
    pub fn m_values(&self) -> Vec<u64> {
        std::iter::once(0)
            .chain((1..=self.levels).map(|l| 1u64 << (l - 1)))
            .collect()
    }

    /// Total oracle applications: one per state preparation plus two per
    /// Grover step, summed over shots, `Σ_ℓ N(2m_ℓ + 1)`.
    pub fn oracle_calls(&self) -> u64 {
        let n = self.shots_per_level as u64;
        self.m_values().iter().map(|&m| n * (2 * m + 1)).sum()
    }
}

/// Tally of one schedule level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShotRecord {
    pub level: usize,
    pub m: u64,
    pub shots: usize,
    pub hits: usize,
}

/// Outcome of the likelihood maximisation.
#[derive(Clone, Copy, Debug)]
pub struct MleResult<T> {
    /// Estimated angle in `[0, π/2]`.
    pub theta_hat: T,
    /// `sin²(theta_hat)`.
    pub p1_hat: T,
    /// Oracle applications consumed by the records.
    pub oracle_calls: u64,
    /// Log-likelihood at the optimum.
    pub log_likelihood: T,
}

/// Reflection about the composite ground state, `I − 2|0…0⟩⟨0…0|`,
/// over the full register including every ancilla.
pub fn ground_reflection<T: Real>(layout: &RegisterLayout) -> MatrixOp<T> {
    let mut m = CMatrix::identity(layout.total_dim());
    m.set(0, 0, Complex::new(-T::one(), T::zero()));
    MatrixOp::unchecked(layout.clone(), m)
}

/// Sign flip on every basis state whose payoff qubit reads 1,
/// `I − 2(I ⊗ |1⟩⟨1|_pay)`.
pub fn payoff_one_reflection<T: Real>(layout: &RegisterLayout) -> Result<MatrixOp<T>> {
    let pay = layout.payoff_index()?;
    let mut m = CMatrix::identity(layout.total_dim());
    for b in 0..layout.total_dim() {
        if layout.digit(b, pay) == 1 {
            m.set(b, b, Complex::new(-T::one(), T::zero()));
        }
    }
    Ok(MatrixOp::unchecked(layout.clone(), m))
}

/// Grover operator `Q = −(A S₀ A†)·S₁` on the oracle's register.
pub fn build_grover<T: Real>(a: &MatrixOp<T>) -> Result<MatrixOp<T>> {
    let layout = a.layout();
    let s0 = ground_reflection(layout);
    let s1 = payoff_one_reflection(layout)?;
    let reflect_prepared = a.matmul(&s0)?.matmul(&a.dagger())?;
    Ok(reflect_prepared.matmul(&s1)?.negate())
}

/// Closed-form hit probability after `j` Grover steps: `sin²((2j+1)·θ)`.
pub fn grover_power_probability<T: Real>(theta: T, j: u64) -> T {
    let a = T::of_f64((2 * j + 1) as f64) * theta;
    let s = a.sin();
    s * s
}

/// Run the schedule against the simulated statevector: for each level,
/// prepare `Q^{m_ℓ} A|0⟩` (powers built by repeated squaring, one square
/// per level) and draw `N` independent payoff-qubit shots.
///
/// Levels are processed in ascending order and shots sequentially, so a
/// fixed generator state reproduces the records exactly.
pub fn run_schedule<T: Real>(
    a: &MatrixOp<T>,
    q: &MatrixOp<T>,
    sched: &Schedule,
    rng: &mut SimRng,
) -> Result<Vec<ShotRecord>> {
    if a.layout() != q.layout() {
        return Err(Error::Layout(
            "oracle and Grover operator layouts differ".into(),
        ));
    }
    let pay_idx = a.layout().payoff_index()?;
    let pay = a.layout().subsystems()[pay_idx].name.clone();
    let prepared = StateVector::ground(a.layout().clone()).apply_matrix(a)?;
    let mut records = Vec::with_capacity(sched.levels + 1);
    let mut power: Option<MatrixOp<T>> = None;
    for (level, m) in sched.m_values().into_iter().enumerate() {
        let state = if m == 0 {
            prepared.clone()
        } else {
            let next = match power.take() {
                None => q.clone(),
                Some(p) => p.square(),
            };
            let s = prepared.apply_matrix(&next)?;
            power = Some(next);
            s
        };
        let mut hits = 0;
        for _ in 0..sched.shots_per_level {
            if state.sample(&pay, rng)? == 1 {
                hits += 1;
            }
        }
        records.push(ShotRecord {
            level,
            m,
            shots: sched.shots_per_level,
            hits,
        });
    }
    Ok(records)
}

/// Draw schedule records directly from the closed-form probabilities —
/// the synthetic data path used for estimator calibration experiments.
pub fn synthetic_records<T: Real>(theta: T, sched: &Schedule, rng: &mut SimRng) -> Vec<ShotRecord> {
    sched
        .m_values()
        .into_iter()
        .enumerate()
        .map(|(level, m)| {
            let p = grover_power_probability(theta, m).as_f64().clamp(0.0, 1.0);
            let bin =
                Binomial::new(sched.shots_per_level as u64, p).expect("probability in [0, 1]");
            let hits = bin.sample(rng) as usize;
            ShotRecord {
                level,
                m,
                shots: sched.shots_per_level,
                hits,
            }
        })
        .collect()
}

/// Joint log-likelihood of the records at angle θ:
/// `Σ_ℓ [ s_ℓ·ln sin²((2m_ℓ+1)θ) + (N−s_ℓ)·ln cos²((2m_ℓ+1)θ) ]`,
/// with the per-level probabilities clamped away from 0 and 1.
/// Binomial coefficients are θ-independent and dropped.
pub fn log_likelihood<T: Real>(theta: T, records: &[ShotRecord]) -> T {
    let eps = T::of_f64(LIKELIHOOD_EPS);
    let one = T::one();
    let mut total = T::zero();
    for r in records {
        let p = grover_power_probability(theta, r.m).max(eps).min(one - eps);
        total += T::of_usize(r.hits) * p.ln() + T::of_usize(r.shots - r.hits) * (one - p).ln();
    }
    total
}

/// Maximise the joint likelihood over `θ ∈ [0, π/2]`.
///
/// The objective is highly multi-modal once large Grover powers enter,
/// so a dense grid scan picks the right lobe first and a golden-section
/// refinement sharpens the maximum to 1e-12. Grid ties break toward the
/// smaller angle.
pub fn mle_estimate<T: Real>(records: &[ShotRecord], grid_points: usize) -> MleResult<T> {
    assert!(!records.is_empty(), "need at least one record");
    assert!(grid_points >= 2, "grid too coarse");
    let hi = T::FRAC_PI_2();
    let step = hi / T::of_usize(grid_points);
    let mut best_theta = T::zero();
    let mut best_ll = T::neg_infinity();
    for j in 0..=grid_points {
        let theta = (step * T::of_usize(j)).min(hi);
        let ll = log_likelihood(theta, records);
        if ll > best_ll {
            best_ll = ll;
            best_theta = theta;
        }
    }
    let (theta_hat, log_like) = golden_refine(
        |t| log_likelihood(t, records),
        (best_theta - step).max(T::zero()),
        (best_theta + step).min(hi),
        best_theta,
        best_ll,
    );
    let oracle_calls = records.iter().map(|r| r.shots as u64 * (2 * r.m + 1)).sum();
    MleResult {
        theta_hat,
        p1_hat: theta_hat.sin() * theta_hat.sin(),
        oracle_calls,
        log_likelihood: log_like,
    }
}

// Golden-section maximisation on [a, b]; falls back to the seed point if
// refinement does not beat it.
fn golden_refine<T: Real, F: Fn(T) -> T>(f: F, mut a: T, mut b: T, seed: T, seed_val: T) -> (T, T) {
    let ratio = T::of_f64(0.618_033_988_749_894_9);
    let tol = T::of_f64(1e-12).max(T::epsilon() * T::of_f64(4.0));
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let half = T::of_f64(0.5);
    let mid = (a + b) * half;
    let fm = f(mid);
    if fm > seed_val {
        (mid, fm)
    } else {
        (seed, seed_val)
    }
}

/// RMSE of the estimator against a known angle, per schedule depth:
/// for each `T` in `t_values`, draw `seeds` synthetic record sets at
/// `theta_star`, estimate, and report `(oracle calls, RMSE)`.
pub fn error_scaling_experiment<T: Real>(
    theta_star: T,
    shots: usize,
    t_values: &[usize],
    seeds: usize,
    rng: &mut SimRng,
) -> Result<Vec<(u64, T)>> {
    assert!(seeds >= 1);
    let mut table = Vec::with_capacity(t_values.len());
    for &levels in t_values {
        let sched = Schedule::new(levels, shots)?;
        let mut sq_err = T::zero();
        for _ in 0..seeds {
            let records = synthetic_records(theta_star, &sched, rng);
            let est: MleResult<T> = mle_estimate(&records, DEFAULT_MLE_GRID);
            let e = est.theta_hat - theta_star;
            sq_err += e * e;
        }
        table.push((sched.oracle_calls(), (sq_err / T::of_usize(seeds)).sqrt()));
    }
    Ok(table)
}

/// Classical baseline for the same experiment: no amplification
/// (`levels = 0`), growing shot counts.
pub fn classical_scaling_experiment<T: Real>(
    theta_star: T,
    shot_counts: &[usize],
    seeds: usize,
    rng: &mut SimRng,
) -> Result<Vec<(u64, T)>> {
    assert!(seeds >= 1);
    let mut table = Vec::with_capacity(shot_counts.len());
    for &shots in shot_counts {
        let sched = Schedule::new(0, shots)?;
        let mut sq_err = T::zero();
        for _ in 0..seeds {
            let records = synthetic_records(theta_star, &sched, rng);
            let est: MleResult<T> = mle_estimate(&records, DEFAULT_MLE_GRID);
            let e = est.theta_hat - theta_star;
            sq_err += e * e;
        }
        table.push((sched.oracle_calls(), (sq_err / T::of_usize(seeds)).sqrt()));
    }
    Ok(table)
}

/// CSV export with columns `ell,m,N,hits`.
pub fn write_shot_records_csv<W: Write>(records: &[ShotRecord], w: &mut W) -> io::Result<()> {
    writeln!(w, "ell,m,N,hits")?;
    for r in records {
        writeln!(w, "{},{},{},{}", r.level, r.m, r.shots, r.hits)?;
    }
    Ok(())
}
