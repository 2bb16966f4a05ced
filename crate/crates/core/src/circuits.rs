//! The three pricing subroutines and their composition into the pricing
//! oracle.
//!
//! * probability loader — a Householder reflection whose first column is
//!   `(√p₀, …, √p_{d^n−1})`, loading the discretised distribution into
//!   the asset qudits;
//! * comparator — a base-`d` ripple-carry circuit, built from the
//!   method of complements, that flips a comparator qubit exactly when
//!   the register integer `i` satisfies `i ≥ k`. Two ancilla budgets are
//!   provided: one carry qubit per digit boundary, or a single reused
//!   carry at the price of multi-controlled gates;
//! * payoff loader — comparator- and digit-controlled `R_Y` rotations
//!   that encode the shifted, scaled call payoff `c·f̃(i) + π/4` into the
//!   payoff qubit's amplitude.
//!
//! Applied to the ground state, the composed oracle leaves the payoff
//! qubit reading `1` with probability
//! `Σ_{i<k} pᵢ sin²(π/4 − c) + Σ_{i≥k} pᵢ sin²(2c(sᵢ−K)/(s_last−K) + π/4 − c)`,
//! which is linear in the expected payoff up to a cubic remainder.

use crate::engine::{
    apply_gate_to_columns, CMatrix, Control, ControlledGate, MatrixOp, RegisterLayout, Role,
    Subsystem,
};
use crate::error::{Error, Result};
use crate::grid::{strike_index, AssetGrid};
use crate::num::Real;
use num_complex::Complex;
use std::str::FromStr;

/// Default payoff scaling constant `c`.
pub const DEFAULT_SCALE_C: f64 = 0.05;

/// Ancilla budget for the comparator circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComparatorVariant {
    /// One carry qubit per digit boundary (`n − 1` carries), single- and
    /// double-controlled gates only, depth linear in `n`.
    LinearAncilla,
    /// One reused carry qubit; every carry chain becomes one
    /// multi-controlled gate, `2^{n−1}` of them.
    SingleAncilla,
}

impl FromStr for ComparatorVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::LinearAncilla),
            "single" => Ok(Self::SingleAncilla),
            other => Err(Error::InvalidParams(format!(
                "unknown comparator variant '{other}' (expected 'linear' or 'single')"
            ))),
        }
    }
}

impl ComparatorVariant {
    /// Carry qubits the variant needs for an `n`-qudit register.
    pub fn carries(&self, n: usize) -> usize {
        match (self, n) {
            (_, 0..=1) => 0,
            (Self::LinearAncilla, n) => n - 1,
            (Self::SingleAncilla, _) => 1,
        }
    }
}

/// Standard register for the pricing pipeline: `n` asset qudits `q0…`
/// (least significant first), the variant's carry qubits `a0…`, the
/// comparator qubit `cmp`, and the payoff qubit `pay`.
pub fn pricing_layout(d: usize, n: usize, variant: ComparatorVariant) -> Result<RegisterLayout> {
    let mut subs: Vec<Subsystem> = (0..n)
        .map(|j| Subsystem::new(format!("q{j}"), d, Role::Asset))
        .collect();
    for j in 0..variant.carries(n) {
        subs.push(Subsystem::new(format!("a{j}"), 2, Role::Carry));
    }
    subs.push(Subsystem::new("cmp", 2, Role::Comparator));
    subs.push(Subsystem::new("pay", 2, Role::Payoff));
    RegisterLayout::new(subs)
}

/// Base-`d` digits (least significant first) of `d^n − k`, i.e. the
/// digit-wise `(d−1)`-complement of `k` plus one.
///
/// Adding this to `i` produces a leading carry exactly when `i ≥ k`,
/// which is what the comparator circuit reads off.
pub fn complement_digits(k: usize, d: usize, n: usize) -> Result<Vec<usize>> {
    let size = d
        .checked_pow(n as u32)
        .ok_or_else(|| Error::Domain(format!("d^n overflows for d={d}, n={n}")))?;
    if k >= size {
        return Err(Error::Domain(format!("k={k} out of range for d^n={size}")));
    }
    if k == 0 {
        return Err(Error::Domain(
            "k=0 has no n-digit complement; the comparator degenerates to an unconditional flip"
                .into(),
        ));
    }
    let mut digits = Vec::with_capacity(n);
    let mut rest = k;
    for _ in 0..n {
        digits.push(d - 1 - rest % d);
        rest /= d;
    }
    let mut carry = 1usize;
    for v in digits.iter_mut() {
        *v += carry;
        carry = *v / d;
        *v %= d;
    }
    debug_assert_eq!(carry, 0);
    Ok(digits)
}

/// Householder reflection with first column `(√p₀, …, √p_{m−1})`:
/// `I − w w† / (1 − √p₀)` for `w = p − e₀`. Degenerate `p₀ = 1` yields
/// the identity.
pub fn householder_loader<T: Real>(probs: &[T]) -> CMatrix<T> {
    let m = probs.len();
    let amp: Vec<T> = probs.iter().map(|&p| p.sqrt()).collect();
    let denom = T::one() - amp[0];
    let mut out = CMatrix::identity(m);
    if denom <= T::epsilon() {
        return out;
    }
    let mut w = amp;
    w[0] -= T::one();
    for r in 0..m {
        for c in 0..m {
            let cur = out.get(r, c);
            out.set(r, c, cur - Complex::new(w[r] * w[c] / denom, T::zero()));
        }
    }
    out
}

/// Embed the Householder loader for `grid` into the full register,
/// acting as the identity on every non-asset subsystem.
pub fn build_probability_loader<T: Real>(
    grid: &AssetGrid<T>,
    layout: &RegisterLayout,
) -> Result<MatrixOp<T>> {
    let asset = asset_wires(layout, grid.d, grid.n)?;
    debug_assert_eq!(asset.len(), grid.n);
    let dn = grid.size();
    let block = householder_loader(&grid.probs);
    let dev = block.unitarity_deviation();
    let tol = T::op_unitary_tol();
    if dev > tol {
        return Err(Error::NonUnitary {
            deviation: dev.as_f64(),
            tol: tol.as_f64(),
        });
    }
    let total = layout.total_dim();
    let mut full = CMatrix::zeros(total);
    for anc in 0..total / dn {
        for r in 0..dn {
            for c in 0..dn {
                full.set(anc * dn + r, anc * dn + c, block.get(r, c));
            }
        }
    }
    Ok(MatrixOp::unchecked(layout.clone(), full))
}

// Asset subsystems must be the least-significant block for the loader
// embedding to be a plain block-diagonal write.
fn asset_wires(layout: &RegisterLayout, d: usize, n: usize) -> Result<Vec<String>> {
    let idx = layout.indices_with_role(Role::Asset);
    if idx.len() != n {
        return Err(Error::Layout(format!(
            "layout has {} asset qudits, expected {n}",
            idx.len()
        )));
    }
    for (want, &got) in idx.iter().enumerate() {
        if got != want {
            return Err(Error::Layout(
                "asset qudits must be the least significant subsystems".into(),
            ));
        }
        if layout.dim(got) != d {
            return Err(Error::Layout(format!(
                "asset qudit {got} has dimension {}, expected {d}",
                layout.dim(got)
            )));
        }
    }
    Ok(idx
        .iter()
        .map(|&i| layout.subsystems()[i].name.clone())
        .collect())
}

fn carry_wires(layout: &RegisterLayout, need: usize) -> Result<Vec<String>> {
    let idx = layout.indices_with_role(Role::Carry);
    if idx.len() < need {
        return Err(Error::Layout(format!(
            "layout has {} carry qubits, variant needs {need}",
            idx.len()
        )));
    }
    for &i in &idx[..need] {
        if layout.dim(i) != 2 {
            return Err(Error::Layout("carry ancillas must be qubits".into()));
        }
    }
    Ok(idx[..need]
        .iter()
        .map(|&i| layout.subsystems()[i].name.clone())
        .collect())
}

fn comparator_wire(layout: &RegisterLayout) -> Result<String> {
    let idx = layout.indices_with_role(Role::Comparator);
    match idx.as_slice() {
        [i] if layout.dim(*i) == 2 => Ok(layout.subsystems()[*i].name.clone()),
        _ => Err(Error::Layout(
            "layout needs exactly one comparator qubit".into(),
        )),
    }
}

fn payoff_wire(layout: &RegisterLayout) -> Result<String> {
    let i = layout.payoff_index()?;
    Ok(layout.subsystems()[i].name.clone())
}

// Digit values v with v + kc >= bound, as an accepted-value set.
fn at_least(d: usize, kc: usize, bound: usize) -> Vec<usize> {
    (0..d).filter(|v| v + kc >= bound).collect()
}

fn below(d: usize, kc: usize, bound: usize) -> Vec<usize> {
    (0..d).filter(|v| v + kc < bound).collect()
}

fn exactly(d: usize, kc: usize, target: usize) -> Vec<usize> {
    (0..d).filter(|v| v + kc == target).collect()
}

/// Build the comparator `|i⟩|0…0⟩|x⟩ → |i⟩|0…0⟩|x ⊕ (i ≥ k)⟩` as a gate
/// list, carries uncomputed back to `|0⟩`.
///
/// `k = 0` degenerates to an unconditional flip (every `i ≥ 0`); `n = 1`
/// needs no arithmetic and reduces to one controlled flip on the value
/// set `{v : v ≥ k}`.
pub fn build_comparator<T: Real>(
    k: usize,
    d: usize,
    n: usize,
    layout: &RegisterLayout,
    variant: ComparatorVariant,
) -> Result<Vec<ControlledGate<T>>> {
    let size = d
        .checked_pow(n as u32)
        .ok_or_else(|| Error::Domain(format!("d^n overflows for d={d}, n={n}")))?;
    if k >= size {
        return Err(Error::Domain(format!("k={k} out of range for d^n={size}")));
    }
    let asset = asset_wires(layout, d, n)?;
    let cmp = comparator_wire(layout)?;
    if k == 0 {
        return Ok(vec![ControlledGate::x(cmp, vec![])]);
    }
    if n == 1 {
        let set: Vec<usize> = (k..d).collect();
        return Ok(vec![ControlledGate::x(
            cmp,
            vec![Control::new(&asset[0], set)],
        )]);
    }
    let kc = complement_digits(k, d, n)?;
    match variant {
        ComparatorVariant::LinearAncilla => {
            let carries = carry_wires(layout, n - 1)?;
            // Forward pass: digit j either generates a carry outright
            // (sum >= d) or propagates an incoming one (sum == d−1).
            // The last digit writes straight onto the comparator qubit.
            let mut forward: Vec<ControlledGate<T>> = Vec::new();
            forward.push(ControlledGate::x(
                &carries[0],
                vec![Control::new(&asset[0], at_least(d, kc[0], d))],
            ));
            for j in 1..n {
                let target = if j < n - 1 {
                    carries[j].as_str()
                } else {
                    cmp.as_str()
                };
                forward.push(ControlledGate::x(
                    target,
                    vec![
                        Control::new(&asset[j], exactly(d, kc[j], d - 1)),
                        Control::new(&carries[j - 1], vec![1]),
                    ],
                ));
                forward.push(ControlledGate::x(
                    target,
                    vec![Control::new(&asset[j], at_least(d, kc[j], d))],
                ));
            }
            // Uncompute everything that touched a carry, in reverse.
            let mut gates = forward.clone();
            for g in forward.into_iter().rev() {
                if g.target != cmp {
                    gates.push(g);
                }
            }
            Ok(gates)
        }
        ComparatorVariant::SingleAncilla => {
            let carry = carry_wires(layout, 1)?.remove(0);
            // One multi-controlled flip per carry chain ending in 1:
            // enumerate the intermediate carry bits c_0 … c_{n−2}
            // (most significant position first, matching the two- and
            // three-qudit circuits), and condition each digit on the
            // (carry-in, carry-out) transition it must realise.
            let mut forward: Vec<ControlledGate<T>> = Vec::new();
            let prefixes = 1usize << (n - 1);
            for mask in (0..prefixes).rev() {
                let bit = |j: usize| (mask >> (n - 2 - j)) & 1 == 1;
                let mut controls = Vec::with_capacity(n);
                let set0 = if bit(0) {
                    at_least(d, kc[0], d)
                } else {
                    below(d, kc[0], d)
                };
                controls.push(Control::new(&asset[0], set0));
                for j in 1..n {
                    let cin = bit(j - 1);
                    let cout = if j == n - 1 { true } else { bit(j) };
                    let set = match (cin, cout) {
                        (true, true) => at_least(d, kc[j], d - 1),
                        (true, false) => below(d, kc[j], d - 1),
                        (false, true) => at_least(d, kc[j], d),
                        (false, false) => below(d, kc[j], d),
                    };
                    controls.push(Control::new(&asset[j], set));
                }
                forward.push(ControlledGate::x(&carry, controls));
            }
            let mut gates = forward.clone();
            gates.push(ControlledGate::x(&cmp, vec![Control::new(&carry, vec![1])]));
            gates.extend(forward.into_iter().rev());
            Ok(gates)
        }
    }
}

/// Shift-and-scale parameters for encoding the call payoff into rotation
/// angles: in-the-money points rotate by `c·f̃(i) + π/4` with
/// `f̃(i) = 2(sᵢ − K)/(s_last − K) − 1 ∈ [−1, 1]`; out-of-the-money points
/// all rotate by `π/4 − c`.
#[derive(Clone, Debug)]
pub struct PayoffEncoding<T> {
    scale_c: T,
    shift: T,
    strike: T,
    strike_idx: usize,
    s_min: T,
    omega: T,
    s_last: T,
    d: usize,
    n: usize,
}

impl<T: Real> PayoffEncoding<T> {
    pub fn new(grid: &AssetGrid<T>, strike: T, scale_c: T) -> Result<Self> {
        if scale_c <= T::zero() || scale_c > T::FRAC_PI_4() {
            return Err(Error::Domain(format!(
                "scale constant must lie in (0, π/4], got {scale_c}"
            )));
        }
        Self::with_any_scale(grid, strike, scale_c)
    }

    // Skips the positivity check on the scale constant; lets tests probe
    // the degenerate c = 0 encoding.
    pub(crate) fn with_any_scale(grid: &AssetGrid<T>, strike: T, scale_c: T) -> Result<Self> {
        let s_last = *grid.points.last().expect("grid is non-empty");
        if s_last - strike <= T::zero() {
            return Err(Error::DegenerateStrike {
                strike: strike.as_f64(),
                s_last: s_last.as_f64(),
            });
        }
        let strike_idx = strike_index(grid, strike)?;
        Ok(Self {
            scale_c,
            shift: T::FRAC_PI_4(),
            strike,
            strike_idx,
            s_min: grid.s_min,
            omega: grid.omega,
            s_last,
            d: grid.d,
            n: grid.n,
        })
    }

    pub fn scale(&self) -> T {
        self.scale_c
    }

    pub fn shift(&self) -> T {
        self.shift
    }

    pub fn strike(&self) -> T {
        self.strike
    }

    pub fn strike_index(&self) -> usize {
        self.strike_idx
    }

    /// `s_last − K`, the payoff normaliser.
    pub fn denominator(&self) -> T {
        self.s_last - self.strike
    }

    /// Rotation angle applied to the payoff qubit for basis state `i`.
    pub fn angle_for(&self, i: usize, s_i: T) -> T {
        let base = self.shift - self.scale_c;
        if i < self.strike_idx {
            base
        } else {
            T::of_f64(2.0) * self.scale_c * (s_i - self.strike) / self.denominator() + base
        }
    }
}

/// Build the payoff loader: one uncontrolled base rotation by `π/4 − c`,
/// one comparator-controlled offset rotation, and per asset digit `j` a
/// family of comparator-and-digit-controlled rotations carrying
/// `2cω d^j v/(s_last − K)` for each digit value `v`. The rotations
/// compose additively, so the net rotation on basis state `i` is exactly
/// [`PayoffEncoding::angle_for`].
pub fn build_payoff_loader<T: Real>(
    enc: &PayoffEncoding<T>,
    layout: &RegisterLayout,
) -> Result<Vec<ControlledGate<T>>> {
    let asset = asset_wires(layout, enc.d, enc.n)?;
    let cmp = comparator_wire(layout)?;
    let pay = payoff_wire(layout)?;
    let two = T::of_f64(2.0);
    let half = T::of_f64(0.5);
    let den = enc.denominator();
    let mut gates = Vec::with_capacity(2 + enc.n * (enc.d - 1));
    gates.push(ControlledGate::ry(&pay, enc.shift - enc.scale_c, vec![]));
    let offset = two * enc.scale_c * (enc.s_min + half * enc.omega - enc.strike) / den;
    gates.push(ControlledGate::ry(
        &pay,
        offset,
        vec![Control::new(&cmp, vec![1])],
    ));
    let mut place = T::one();
    for wire in asset.iter() {
        let coeff = two * enc.scale_c * enc.omega * place / den;
        for v in 1..enc.d {
            gates.push(ControlledGate::ry(
                &pay,
                coeff * T::of_usize(v),
                vec![Control::new(&cmp, vec![1]), Control::new(wire, vec![v])],
            ));
        }
        place *= T::of_usize(enc.d);
    }
    Ok(gates)
}

/// Compose loader, comparator and payoff loader into the dense pricing
/// oracle on its standard layout. Acting on the ground state it prepares
/// the full pricing superposition with carries uncomputed.
///
/// Gates are folded onto the loader's columns directly, so the build is
/// quadratic in the register dimension rather than cubic per gate.
pub fn build_pricing_oracle<T: Real>(
    grid: &AssetGrid<T>,
    strike: T,
    scale_c: T,
    variant: ComparatorVariant,
) -> Result<(RegisterLayout, MatrixOp<T>)> {
    let layout = pricing_layout(grid.d, grid.n, variant)?;
    let enc = PayoffEncoding::new(grid, strike, scale_c)?;
    let loader = build_probability_loader(grid, &layout)?;
    let comparator = build_comparator(enc.strike_index(), grid.d, grid.n, &layout, variant)?;
    let payoff = build_payoff_loader(&enc, &layout)?;
    let mut mat = loader.matrix().clone();
    for gate in comparator.iter().chain(payoff.iter()) {
        apply_gate_to_columns(&layout, gate, &mut mat)?;
    }
    Ok((layout.clone(), MatrixOp::unchecked(layout, mat)))
}

/// Probability that the payoff qubit reads 1 after the oracle acts on
/// the ground state, evaluated classically from the encoded angles:
/// `Σ_{i<k} pᵢ sin²(π/4 − c) + Σ_{i≥k} pᵢ sin²(2c(sᵢ−K)/(s_last−K) + π/4 − c)`.
pub fn payoff_one_probability<T: Real>(grid: &AssetGrid<T>, strike: T, scale_c: T) -> Result<T> {
    let enc = PayoffEncoding::new(grid, strike, scale_c)?;
    Ok(grid
        .points
        .iter()
        .zip(&grid.probs)
        .enumerate()
        .map(|(i, (&s, &p))| {
            let a = enc.angle_for(i, s).sin();
            p * a * a
        })
        .sum())
}

/// First-order version of [`payoff_one_probability`]:
/// `1/2 − c + 2c·E[f]/(s_last − K)` with `E[f]` the discretised expected
/// payoff. The two differ by at most [`encoding_cubic_bound`].
pub fn payoff_one_probability_linearized<T: Real>(
    grid: &AssetGrid<T>,
    strike: T,
    scale_c: T,
) -> Result<T> {
    let enc = PayoffEncoding::new(grid, strike, scale_c)?;
    let half = T::of_f64(0.5);
    let payoff = crate::grid::discretized_expected_payoff(grid, strike);
    Ok(half - enc.scale() + T::of_f64(2.0) * enc.scale() * payoff / enc.denominator())
}

/// Third-order remainder bound `Σᵢ pᵢ·|c·f̃(i)|³` on the gap between the
/// exact payoff-qubit probability and its linearisation.
pub fn encoding_cubic_bound<T: Real>(grid: &AssetGrid<T>, strike: T, scale_c: T) -> Result<T> {
    let enc = PayoffEncoding::new(grid, strike, scale_c)?;
    Ok(grid
        .points
        .iter()
        .zip(&grid.probs)
        .enumerate()
        .map(|(i, (&s, &p))| {
            let theta = enc.angle_for(i, s) - enc.shift();
            p * theta.abs().powi(3)
        })
        .sum())
}

/// Invert the linearised probability back to an expected payoff:
/// `E[f] = (p₁ − 1/2 + c)·(s_last − K)/(2c)`.
///
/// The cubic encoding error can push the result slightly negative for
/// deep out-of-the-money strikes; the value is returned as-is.
pub fn expected_payoff_from_p1<T: Real>(
    p1: T,
    grid: &AssetGrid<T>,
    strike: T,
    scale_c: T,
) -> Result<T> {
    if scale_c <= T::zero() {
        return Err(Error::Domain(format!(
            "scale constant must be > 0, got {scale_c}"
        )));
    }
    assert!(
        p1 >= T::zero() && p1 <= T::one(),
        "probability out of range"
    );
    let s_last = *grid.points.last().expect("grid is non-empty");
    let half = T::of_f64(0.5);
    Ok((p1 - half + scale_c) * (s_last - strike) / (T::of_f64(2.0) * scale_c))
}
