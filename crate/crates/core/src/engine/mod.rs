//! Dense statevector simulation over an ordered list of subsystems of
//! arbitrary dimension.
//!
//! Subsystem 0 is the least-significant digit of the composite basis
//! index: a register `[q0 (dim d), q1 (dim d), c (dim 2)]` stores basis
//! state `|i0, i1, x⟩` at index `i0 + d·i1 + d²·x`. States are immutable
//! values; every operation returns a new state. Measurement never
//! collapses — callers that need repeated shots rebuild or reuse the
//! state and draw independently.

mod matrix;

pub use matrix::{CMatrix, MatrixOp};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::rng::SimRng;
use num_complex::Complex;
use std::fmt;
use std::io::{self, Write};

/// Default cap on the composite Hilbert-space dimension. Dense operators
/// are `O(total_dim²)` memory, so this is deliberately conservative;
/// [`RegisterLayout::with_cap`] raises it for gate-only workloads.
pub const MAX_TOTAL_DIM: usize = 4096;

/// What a subsystem is for, in the pricing pipeline's vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Asset,
    Carry,
    Comparator,
    Payoff,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subsystem {
    pub name: String,
    pub dim: usize,
    pub role: Role,
}

impl Subsystem {
    pub fn new(name: impl Into<String>, dim: usize, role: Role) -> Self {
        Self {
            name: name.into(),
            dim,
            role,
        }
    }
}

/// Ordered list of subsystems spanning the composite space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    subs: Vec<Subsystem>,
    strides: Vec<usize>,
    total: usize,
}

impl RegisterLayout {
    pub fn new(subs: Vec<Subsystem>) -> Result<Self> {
        Self::with_cap(subs, MAX_TOTAL_DIM)
    }

    /// Build a layout with an explicit dimension cap.
    pub fn with_cap(subs: Vec<Subsystem>, cap: usize) -> Result<Self> {
        if subs.is_empty() {
            return Err(Error::Layout(
                "a register needs at least one subsystem".into(),
            ));
        }
        let mut strides = Vec::with_capacity(subs.len());
        let mut total: usize = 1;
        for s in &subs {
            if s.dim < 2 {
                return Err(Error::Layout(format!(
                    "subsystem '{}' has dimension {}, need >= 2",
                    s.name, s.dim
                )));
            }
            strides.push(total);
            total = total.checked_mul(s.dim).ok_or(Error::Resource {
                requested: usize::MAX,
                cap,
            })?;
        }
        if total > cap {
            return Err(Error::Resource {
                requested: total,
                cap,
            });
        }
        for (i, s) in subs.iter().enumerate() {
            if subs[..i].iter().any(|t| t.name == s.name) {
                return Err(Error::Layout(format!(
                    "duplicate subsystem name '{}'",
                    s.name
                )));
            }
        }
        Ok(Self {
            subs,
            strides,
            total,
        })
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subs
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.subs
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| Error::Layout(format!("no subsystem named '{name}'")))
    }

    pub fn dim(&self, sub: usize) -> usize {
        self.subs[sub].dim
    }

    pub fn stride(&self, sub: usize) -> usize {
        self.strides[sub]
    }

    /// Digit of `basis` belonging to subsystem `sub`.
    #[inline]
    pub fn digit(&self, basis: usize, sub: usize) -> usize {
        (basis / self.strides[sub]) % self.subs[sub].dim
    }

    /// Composite basis index from one digit per subsystem.
    pub fn basis_from_digits(&self, digits: &[usize]) -> usize {
        assert_eq!(digits.len(), self.subs.len());
        digits
            .iter()
            .zip(&self.strides)
            .zip(&self.subs)
            .map(|((&v, &st), s)| {
                assert!(v < s.dim, "digit {v} out of range for '{}'", s.name);
                v * st
            })
            .sum()
    }

    pub fn digits_of(&self, basis: usize) -> Vec<usize> {
        (0..self.subs.len()).map(|i| self.digit(basis, i)).collect()
    }

    pub fn indices_with_role(&self, role: Role) -> Vec<usize> {
        (0..self.subs.len())
            .filter(|&i| self.subs[i].role == role)
            .collect()
    }

    /// The unique payoff qubit, if the layout has one.
    pub fn payoff_index(&self) -> Result<usize> {
        let found = self.indices_with_role(Role::Payoff);
        match found.as_slice() {
            [i] if self.subs[*i].dim == 2 => Ok(*i),
            [] => Err(Error::Layout("layout has no payoff qubit".into())),
            _ => Err(Error::Layout(
                "layout needs exactly one payoff qubit of dimension 2".into(),
            )),
        }
    }
}

/// One control condition: the named subsystem's digit must lie in
/// `accepted`. An empty accepted set makes the whole gate fall away.
#[derive(Clone, Debug, PartialEq)]
pub struct Control {
    pub subsystem: String,
    pub accepted: Vec<usize>,
}

impl Control {
    pub fn new(subsystem: impl Into<String>, accepted: Vec<usize>) -> Self {
        Self {
            subsystem: subsystem.into(),
            accepted,
        }
    }
}

/// The single-subsystem operation a gate applies.
#[derive(Clone, Debug, PartialEq)]
pub enum GateAction<T> {
    /// `|0⟩ ↔ |1⟩` on a dimension-2 target.
    FlipX,
    /// Real rotation `|0⟩ → cos θ|0⟩ + sin θ|1⟩` on a dimension-2 target.
    /// Composes additively: `Ry(a)` then `Ry(b)` equals `Ry(a + b)`.
    RotateY(T),
    /// Arbitrary unitary on the target subsystem.
    Unitary(CMatrix<T>),
}

/// A controlled single-subsystem gate: apply `action` to `target` on
/// every basis state whose control digits all lie in their accepted sets.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlledGate<T> {
    pub controls: Vec<Control>,
    pub target: String,
    pub action: GateAction<T>,
}

impl<T: Real> ControlledGate<T> {
    pub fn x(target: impl Into<String>, controls: Vec<Control>) -> Self {
        Self {
            controls,
            target: target.into(),
            action: GateAction::FlipX,
        }
    }

    pub fn ry(target: impl Into<String>, theta: T, controls: Vec<Control>) -> Self {
        Self {
            controls,
            target: target.into(),
            action: GateAction::RotateY(theta),
        }
    }

    pub fn unitary(target: impl Into<String>, matrix: CMatrix<T>, controls: Vec<Control>) -> Self {
        Self {
            controls,
            target: target.into(),
            action: GateAction::Unitary(matrix),
        }
    }
}

impl<T: Real> fmt::Display for ControlledGate<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.action {
            GateAction::FlipX => write!(f, "X @ {}", self.target)?,
            GateAction::RotateY(th) => write!(f, "Ry({th}) @ {}", self.target)?,
            GateAction::Unitary(m) => write!(f, "U({0}x{0}) @ {1}", m.dim(), self.target)?,
        }
        for (i, c) in self.controls.iter().enumerate() {
            let sep = if i == 0 { " if " } else { " & " };
            write!(f, "{sep}{}∈{{", c.subsystem)?;
            for (j, v) in c.accepted.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

/// Dense statevector over a register layout.
#[derive(Clone, Debug)]
pub struct StateVector<T> {
    layout: RegisterLayout,
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// `|0…0⟩`: amplitude 1 on basis index 0.
    pub fn ground(layout: RegisterLayout) -> Self {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); layout.total_dim()];
        amps[0] = Complex::new(T::one(), T::zero());
        Self { layout, amps }
    }

    /// Basis state with the given composite index.
    pub fn basis(layout: RegisterLayout, index: usize) -> Result<Self> {
        if index >= layout.total_dim() {
            return Err(Error::Domain(format!(
                "basis index {index} out of range for dimension {}",
                layout.total_dim()
            )));
        }
        let mut amps = vec![Complex::new(T::zero(), T::zero()); layout.total_dim()];
        amps[index] = Complex::new(T::one(), T::zero());
        Ok(Self { layout, amps })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amps(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply_gate(&self, gate: &ControlledGate<T>) -> Result<Self> {
        let mut amps = self.amps.clone();
        apply_gate_to_amps(&self.layout, gate, &mut amps)?;
        Ok(Self {
            layout: self.layout.clone(),
            amps,
        })
    }

    pub fn apply_matrix(&self, op: &MatrixOp<T>) -> Result<Self> {
        if *op.layout() != self.layout {
            return Err(Error::Layout("operator layout does not match state".into()));
        }
        Ok(Self {
            layout: self.layout.clone(),
            amps: op.matrix().matvec(&self.amps),
        })
    }

    /// Probability of reading `value` on the named subsystem (Born rule).
    pub fn marginal_probability(&self, subsystem: &str, value: usize) -> Result<T> {
        let sub = self.layout.index_of(subsystem)?;
        if value >= self.layout.dim(sub) {
            return Err(Error::Domain(format!(
                "value {value} out of range for subsystem '{subsystem}'"
            )));
        }
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| self.layout.digit(*i, sub) == value)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Full marginal distribution of the named subsystem.
    pub fn marginals(&self, subsystem: &str) -> Result<Vec<T>> {
        let sub = self.layout.index_of(subsystem)?;
        let mut out = vec![T::zero(); self.layout.dim(sub)];
        for (i, a) in self.amps.iter().enumerate() {
            out[self.layout.digit(i, sub)] += a.norm_sqr();
        }
        Ok(out)
    }

    /// Draw one outcome for the named subsystem from its marginal
    /// distribution. Non-collapsing: the state is unchanged, and repeated
    /// draws are independent shots.
    pub fn sample(&self, subsystem: &str, rng: &mut SimRng) -> Result<usize> {
        let probs = self.marginals(subsystem)?;
        let u = T::sample_uniform(rng);
        let mut acc = T::zero();
        for (v, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return Ok(v);
            }
        }
        Ok(probs.len() - 1)
    }

    /// Debug dump with columns `index,re,im`.
    pub fn write_amplitudes_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "index,re,im")?;
        for (i, a) in self.amps.iter().enumerate() {
            writeln!(w, "{i},{},{}", a.re, a.im)?;
        }
        Ok(())
    }
}

struct ResolvedControl {
    sub: usize,
    mask: Vec<bool>,
}

fn resolve_controls<T: Real>(
    layout: &RegisterLayout,
    gate: &ControlledGate<T>,
    target: usize,
) -> Result<Vec<ResolvedControl>> {
    gate.controls
        .iter()
        .map(|c| {
            let sub = layout.index_of(&c.subsystem)?;
            if sub == target {
                return Err(Error::Layout(format!(
                    "subsystem '{}' cannot control itself",
                    c.subsystem
                )));
            }
            let dim = layout.dim(sub);
            let mut mask = vec![false; dim];
            for &v in &c.accepted {
                if v >= dim {
                    return Err(Error::Layout(format!(
                        "control value {v} out of range for subsystem '{}'",
                        c.subsystem
                    )));
                }
                mask[v] = true;
            }
            Ok(ResolvedControl { sub, mask })
        })
        .collect()
}

fn apply_gate_to_amps<T: Real>(
    layout: &RegisterLayout,
    gate: &ControlledGate<T>,
    amps: &mut [Complex<T>],
) -> Result<()> {
    let target = layout.index_of(&gate.target)?;
    let tdim = layout.dim(target);
    let tstride = layout.stride(target);
    let controls = resolve_controls(layout, gate, target)?;
    // An empty accepted set means the gate falls away entirely.
    if controls.iter().any(|c| c.mask.iter().all(|&b| !b)) {
        return Ok(());
    }
    match &gate.action {
        GateAction::FlipX | GateAction::RotateY(_) if tdim != 2 => {
            return Err(Error::Layout(format!(
                "action needs a dimension-2 target, '{}' has dimension {tdim}",
                gate.target
            )));
        }
        GateAction::Unitary(m) => {
            if m.dim() != tdim {
                return Err(Error::Layout(format!(
                    "action dimension {} does not match target dimension {tdim}",
                    m.dim()
                )));
            }
            let dev = m.unitarity_deviation();
            let tol = T::gate_unitary_tol();
            if dev > tol {
                return Err(Error::NonUnitary {
                    deviation: dev.as_f64(),
                    tol: tol.as_f64(),
                });
            }
        }
        _ => {}
    }

    let mut block = vec![Complex::new(T::zero(), T::zero()); tdim];
    for base in 0..amps.len() {
        if layout.digit(base, target) != 0 {
            continue;
        }
        if !controls.iter().all(|c| c.mask[layout.digit(base, c.sub)]) {
            continue;
        }
        match &gate.action {
            GateAction::FlipX => amps.swap(base, base + tstride),
            GateAction::RotateY(th) => {
                let (s, c) = th.sin_cos();
                let a0 = amps[base];
                let a1 = amps[base + tstride];
                amps[base] = a0 * c - a1 * s;
                amps[base + tstride] = a0 * s + a1 * c;
            }
            GateAction::Unitary(m) => {
                for (v, b) in block.iter_mut().enumerate() {
                    *b = amps[base + v * tstride];
                }
                for r in 0..tdim {
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for (v, &b) in block.iter().enumerate() {
                        acc += m.get(r, v) * b;
                    }
                    amps[base + r * tstride] = acc;
                }
            }
        }
    }
    Ok(())
}

// Left-multiply `mat` by the gate's action, column by column, without
// materialising the gate as a matrix. This keeps operator composition at
// O(dim²) per gate instead of O(dim³).
pub(crate) fn apply_gate_to_columns<T: Real>(
    layout: &RegisterLayout,
    gate: &ControlledGate<T>,
    mat: &mut CMatrix<T>,
) -> Result<()> {
    let n = mat.dim();
    if n != layout.total_dim() {
        return Err(Error::Layout(
            "matrix does not match register dimension".into(),
        ));
    }
    let mut col = vec![Complex::new(T::zero(), T::zero()); n];
    for b in 0..n {
        for (r, v) in col.iter_mut().enumerate() {
            *v = mat.get(r, b);
        }
        apply_gate_to_amps(layout, gate, &mut col)?;
        for (r, &v) in col.iter().enumerate() {
            mat.set(r, b, v);
        }
    }
    Ok(())
}

/// Dense full-space matrix with the same action as `apply_gate`, built
/// column by column from basis states.
pub fn gate_to_matrix<T: Real>(
    layout: &RegisterLayout,
    gate: &ControlledGate<T>,
) -> Result<MatrixOp<T>> {
    let n = layout.total_dim();
    let mut mat = CMatrix::zeros(n);
    let mut col = vec![Complex::new(T::zero(), T::zero()); n];
    for b in 0..n {
        for v in col.iter_mut() {
            *v = Complex::new(T::zero(), T::zero());
        }
        col[b] = Complex::new(T::one(), T::zero());
        apply_gate_to_amps(layout, gate, &mut col)?;
        for (r, &v) in col.iter().enumerate() {
            if v.re != T::zero() || v.im != T::zero() {
                mat.set(r, b, v);
            }
        }
    }
    Ok(MatrixOp::unchecked(layout.clone(), mat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;
    use rand::Rng;

    fn qudit_qubit_layout(d: usize) -> RegisterLayout {
        RegisterLayout::new(vec![
            Subsystem::new("q0", d, Role::Asset),
            Subsystem::new("pay", 2, Role::Payoff),
        ])
        .unwrap()
    }

    #[test]
    fn ground_state_basics() {
        let one_qubit = RegisterLayout::new(vec![Subsystem::new("pay", 2, Role::Payoff)]).unwrap();
        let s = StateVector::<f64>::ground(one_qubit);
        assert_eq!(s.amps().len(), 2);
        assert_eq!(s.amps()[0].re, 1.0);
        assert_eq!(s.amps()[1].re, 0.0);

        let s = StateVector::<f64>::ground(qudit_qubit_layout(5));
        assert_eq!(s.amps().len(), 10);
        assert_eq!(s.amps()[0].re, 1.0);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn layout_validation() {
        assert!(RegisterLayout::new(vec![Subsystem::new("a", 1, Role::Carry)]).is_err());
        assert!(RegisterLayout::new(vec![
            Subsystem::new("a", 2, Role::Carry),
            Subsystem::new("a", 2, Role::Carry),
        ])
        .is_err());
        let too_big: Vec<Subsystem> = (0..13)
            .map(|i| Subsystem::new(format!("q{i}"), 2, Role::Asset))
            .collect();
        match RegisterLayout::new(too_big) {
            Err(Error::Resource { requested, cap }) => {
                assert_eq!(requested, 8192);
                assert_eq!(cap, MAX_TOTAL_DIM);
            }
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn digit_round_trip() {
        let layout = RegisterLayout::new(vec![
            Subsystem::new("q0", 3, Role::Asset),
            Subsystem::new("q1", 3, Role::Asset),
            Subsystem::new("c", 2, Role::Comparator),
        ])
        .unwrap();
        for basis in 0..layout.total_dim() {
            let digits = layout.digits_of(basis);
            assert_eq!(layout.basis_from_digits(&digits), basis);
        }
        // Asset integer convention: subsystem 0 least significant.
        assert_eq!(layout.basis_from_digits(&[2, 1, 0]), 2 + 3);
    }

    #[test]
    fn empty_control_set_means_identity() {
        let layout = qudit_qubit_layout(3);
        let s = StateVector::<f64>::basis(layout.clone(), 4).unwrap();
        let g = ControlledGate::x("pay", vec![Control::new("q0", vec![])]);
        let t = s.apply_gate(&g).unwrap();
        assert_eq!(s.amps(), t.amps());
    }

    #[test]
    fn uncontrolled_ry_rotates_ground() {
        let layout = qudit_qubit_layout(2);
        let s = StateVector::<f64>::ground(layout);
        let th = 0.3_f64;
        let t = s
            .apply_gate(&ControlledGate::ry("pay", th, vec![]))
            .unwrap();
        assert!((t.amps()[0].re - th.cos()).abs() < 1e-15);
        assert!((t.amps()[2].re - th.sin()).abs() < 1e-15);
        // Homomorphism: Ry(a) then Ry(b) == Ry(a+b).
        let a = 0.7_f64;
        let b = -0.2_f64;
        let lhs = t
            .apply_gate(&ControlledGate::ry("pay", a, vec![]))
            .unwrap()
            .apply_gate(&ControlledGate::ry("pay", b, vec![]))
            .unwrap();
        let rhs = t
            .apply_gate(&ControlledGate::ry("pay", a + b, vec![]))
            .unwrap();
        for (x, y) in lhs.amps().iter().zip(rhs.amps()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn full_range_control_equals_uncontrolled() {
        let layout = qudit_qubit_layout(4);
        let mut rng = derive_stream(1, 0);
        // A random-ish superposition built from a few rotations.
        let mut s = StateVector::<f64>::ground(layout.clone());
        for _ in 0..4 {
            let th: f64 = rng.random::<f64>() * 2.0 - 1.0;
            s = s
                .apply_gate(&ControlledGate::ry("pay", th, vec![]))
                .unwrap();
        }
        let controlled = ControlledGate::x("pay", vec![Control::new("q0", vec![0, 1, 2, 3])]);
        let uncontrolled = ControlledGate::x("pay", vec![]);
        let a = s.apply_gate(&controlled).unwrap();
        let b = s.apply_gate(&uncontrolled).unwrap();
        assert_eq!(a.amps(), b.amps());
    }

    #[test]
    fn gate_error_paths() {
        let layout = qudit_qubit_layout(3);
        let s = StateVector::<f64>::ground(layout.clone());
        // Control value beyond the subsystem's range.
        let g = ControlledGate::x("pay", vec![Control::new("q0", vec![3])]);
        assert!(matches!(s.apply_gate(&g), Err(Error::Layout(_))));
        // A subsystem cannot control itself.
        let g = ControlledGate::x("pay", vec![Control::new("pay", vec![1])]);
        assert!(matches!(s.apply_gate(&g), Err(Error::Layout(_))));
        // Two-level actions need a two-level target.
        let g = ControlledGate::x("q0", vec![]);
        assert!(matches!(s.apply_gate(&g), Err(Error::Layout(_))));
        // Non-unitary action matrices are rejected.
        let mut m = CMatrix::<f64>::identity(2);
        m.set(1, 1, Complex::new(0.5, 0.0));
        let g = ControlledGate::unitary("pay", m, vec![]);
        assert!(matches!(s.apply_gate(&g), Err(Error::NonUnitary { .. })));
        // Operators from a different register are rejected.
        let other = qudit_qubit_layout(4);
        let id = MatrixOp::<f64>::identity(other);
        assert!(matches!(s.apply_matrix(&id), Err(Error::Layout(_))));
    }

    #[test]
    fn apply_matrix_identity_and_inverse() {
        let layout = qudit_qubit_layout(3);
        let s = StateVector::<f64>::ground(layout.clone())
            .apply_gate(&ControlledGate::ry("pay", 0.4, vec![]))
            .unwrap();
        let id = MatrixOp::identity(layout.clone());
        let t = s.apply_matrix(&id).unwrap();
        assert_eq!(s.amps(), t.amps());

        let g = ControlledGate::ry("pay", 0.9, vec![Control::new("q0", vec![0])]);
        let m = gate_to_matrix(&layout, &g).unwrap();
        let back = s
            .apply_matrix(&m)
            .unwrap()
            .apply_matrix(&m.dagger())
            .unwrap();
        for (x, y) in back.amps().iter().zip(s.amps()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn permutation_matrix_permutes_qudit_amplitudes() {
        let layout = RegisterLayout::new(vec![Subsystem::new("q0", 3, Role::Asset)]).unwrap();
        // Cyclic shift |v⟩ → |v+1 mod 3⟩.
        let mut p = CMatrix::<f64>::zeros(3);
        for v in 0..3 {
            p.set((v + 1) % 3, v, Complex::new(1.0, 0.0));
        }
        let op = MatrixOp::new(layout.clone(), p).unwrap();
        let s = StateVector::<f64>::basis(layout, 1).unwrap();
        let t = s.apply_matrix(&op).unwrap();
        assert_eq!(t.amps()[2].re, 1.0);
    }

    #[test]
    fn non_unitary_matrix_rejected() {
        let layout = RegisterLayout::new(vec![Subsystem::new("q0", 2, Role::Asset)]).unwrap();
        let mut m = CMatrix::<f64>::identity(2);
        m.set(0, 0, Complex::new(0.9, 0.0));
        assert!(matches!(
            MatrixOp::new(layout, m),
            Err(Error::NonUnitary { .. })
        ));
    }

    #[test]
    fn marginals_and_sampling() {
        let layout = qudit_qubit_layout(3);
        let s = StateVector::<f64>::ground(layout.clone());
        assert_eq!(s.marginal_probability("pay", 1).unwrap(), 0.0);
        assert!(s.marginal_probability("pay", 2).is_err());

        let rot = s
            .apply_gate(&ControlledGate::ry(
                "pay",
                std::f64::consts::FRAC_PI_4,
                vec![],
            ))
            .unwrap();
        assert!((rot.marginal_probability("pay", 1).unwrap() - 0.5).abs() < 1e-15);
        let m = rot.marginals("pay").unwrap();
        assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-12);

        // Deterministic outcome.
        let basis = StateVector::<f64>::basis(layout, 4).unwrap();
        let mut rng = derive_stream(2, 0);
        for _ in 0..32 {
            assert_eq!(basis.sample("q0", &mut rng).unwrap(), 1);
        }

        // Frequencies track the marginal.
        let mut rng = derive_stream(2, 1);
        let n = 100_000;
        let ones = (0..n)
            .filter(|_| rot.sample("pay", &mut rng).unwrap() == 1)
            .count();
        let freq = ones as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.01, "freq {freq}");

        // Same seed, same outcome sequence.
        let mut r1 = derive_stream(2, 2);
        let mut r2 = derive_stream(2, 2);
        let a: Vec<usize> = (0..64)
            .map(|_| rot.sample("pay", &mut r1).unwrap())
            .collect();
        let b: Vec<usize> = (0..64)
            .map(|_| rot.sample("pay", &mut r2).unwrap())
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn gate_matrix_agrees_with_direct_application() {
        let layout = RegisterLayout::new(vec![
            Subsystem::new("q0", 3, Role::Asset),
            Subsystem::new("q1", 3, Role::Asset),
            Subsystem::new("pay", 2, Role::Payoff),
        ])
        .unwrap();
        let gates = [
            ControlledGate::ry(
                "pay",
                0.37,
                vec![
                    Control::new("q0", vec![1, 2]),
                    Control::new("q1", vec![0, 2]),
                ],
            ),
            ControlledGate::x("pay", vec![Control::new("q1", vec![1])]),
        ];
        for g in &gates {
            let m = gate_to_matrix(&layout, g).unwrap();
            assert!(m.unitarity_deviation() < 1e-14);
            for b in 0..layout.total_dim() {
                let direct = StateVector::basis(layout.clone(), b)
                    .unwrap()
                    .apply_gate(g)
                    .unwrap();
                let via = StateVector::basis(layout.clone(), b)
                    .unwrap()
                    .apply_matrix(&m)
                    .unwrap();
                for (x, y) in direct.amps().iter().zip(via.amps()) {
                    assert!((x - y).norm() < 1e-13);
                }
            }
        }
        // Product of the matrices == sequential application.
        let m0 = gate_to_matrix(&layout, &gates[0]).unwrap();
        let m1 = gate_to_matrix(&layout, &gates[1]).unwrap();
        let seq = StateVector::<f64>::ground(layout.clone())
            .apply_gate(&gates[0])
            .unwrap()
            .apply_gate(&gates[1])
            .unwrap();
        let prod = m1.matmul(&m0).unwrap();
        let via = StateVector::ground(layout).apply_matrix(&prod).unwrap();
        for (x, y) in seq.amps().iter().zip(via.amps()) {
            assert!((x - y).norm() < 1e-13);
        }

        // Same equivalence near the top of the exhaustive-check range
        // (7 × 7 × 2 × 2 = 196 dimensions).
        let big = RegisterLayout::new(vec![
            Subsystem::new("q0", 7, Role::Asset),
            Subsystem::new("q1", 7, Role::Asset),
            Subsystem::new("c", 2, Role::Comparator),
            Subsystem::new("pay", 2, Role::Payoff),
        ])
        .unwrap();
        let gate = ControlledGate::ry(
            "pay",
            -0.81,
            vec![
                Control::new("q0", vec![0, 3, 6]),
                Control::new("c", vec![1]),
            ],
        );
        let m = gate_to_matrix(&big, &gate).unwrap();
        for b in 0..big.total_dim() {
            let direct = StateVector::basis(big.clone(), b)
                .unwrap()
                .apply_gate(&gate)
                .unwrap();
            let via = StateVector::basis(big.clone(), b)
                .unwrap()
                .apply_matrix(&m)
                .unwrap();
            for (x, y) in direct.amps().iter().zip(via.amps()) {
                assert!((x - y).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn norm_preserved_over_many_random_gates() {
        let layout = RegisterLayout::new(vec![
            Subsystem::new("q0", 4, Role::Asset),
            Subsystem::new("c", 2, Role::Comparator),
            Subsystem::new("pay", 2, Role::Payoff),
        ])
        .unwrap();
        let mut s = StateVector::<f64>::ground(layout.clone());
        let mut rng = derive_stream(8, 0);
        let names = ["q0", "c", "pay"];
        for _ in 0..1000 {
            let pick = rng.random::<u32>() as usize % 3;
            let tname = names[pick];
            let ctrl_name = names[(pick + 1 + rng.random::<u32>() as usize % 2) % 3];
            let ctrl_dim = layout.dim(layout.index_of(ctrl_name).unwrap());
            let accepted: Vec<usize> = (0..ctrl_dim).filter(|_| rng.random::<bool>()).collect();
            let controls = vec![Control::new(ctrl_name, accepted)];
            let g = if layout.dim(layout.index_of(tname).unwrap()) == 2 {
                if rng.random::<bool>() {
                    ControlledGate::x(tname, controls)
                } else {
                    ControlledGate::ry(tname, rng.random::<f64>() * 6.0 - 3.0, controls)
                }
            } else {
                // Random qudit permutation as the unitary action.
                let d = layout.dim(layout.index_of(tname).unwrap());
                let shift = 1 + rng.random::<u32>() as usize % (d - 1);
                let mut m = CMatrix::<f64>::zeros(d);
                for v in 0..d {
                    m.set((v + shift) % d, v, Complex::new(1.0, 0.0));
                }
                ControlledGate::unitary(tname, m, controls)
            };
            s = s.apply_gate(&g).unwrap();
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gate_display_format() {
        let g: ControlledGate<f64> = ControlledGate::x(
            "cmp",
            vec![Control::new("q0", vec![3, 4]), Control::new("a0", vec![1])],
        );
        assert_eq!(g.to_string(), "X @ cmp if q0∈{3,4} & a0∈{1}");
        let r: ControlledGate<f64> = ControlledGate::ry("pay", 0.5, vec![]);
        assert_eq!(r.to_string(), "Ry(0.5) @ pay");
    }

    #[test]
    fn amplitude_csv_dump() {
        let layout = RegisterLayout::new(vec![Subsystem::new("pay", 2, Role::Payoff)]).unwrap();
        let s = StateVector::<f64>::ground(layout)
            .apply_gate(&ControlledGate::ry("pay", 0.3, vec![]))
            .unwrap();
        let mut buf = Vec::new();
        s.write_amplitudes_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("index,re,im\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
