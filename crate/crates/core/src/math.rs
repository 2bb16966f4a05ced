//! Special functions and quadrature used by the market model.

use crate::num::Real;

/// Error function after W. J. Cody's rational Chebyshev approximations
/// (SPECFUN `calerf`), accurate to better than 1e-13 relative error in
/// `f64`. Accuracy in `f32` is limited by the scalar type itself.
pub fn erf<T: Real>(x: T) -> T {
    let y = x.abs();
    if y <= T::of_f64(0.46875) {
        erf_small(x)
    } else {
        let ec = erfc_large(y);
        let one = T::one();
        if x.is_sign_negative() {
            ec - one
        } else {
            one - ec
        }
    }
}

/// Complementary error function, same source and accuracy as [`erf`].
pub fn erfc<T: Real>(x: T) -> T {
    let y = x.abs();
    if y <= T::of_f64(0.46875) {
        T::one() - erf_small(x)
    } else if x.is_sign_negative() {
        T::of_f64(2.0) - erfc_large(y)
    } else {
        erfc_large(y)
    }
}

/// Standard normal cumulative distribution function, `Φ(x) = erfc(−x/√2)/2`.
pub fn norm_cdf<T: Real>(x: T) -> T {
    let half = T::of_f64(0.5);
    half * erfc(-x / T::SQRT_2())
}

// |x| ≤ 0.46875: erf(x) = x · P(x²)/Q(x²).
// Coefficients are quoted digit-for-digit from the reference tables.
#[allow(clippy::excessive_precision)]
fn erf_small<T: Real>(x: T) -> T {
    const A: [f64; 5] = [
        3.16112374387056560e0,
        1.13864154151050156e2,
        3.77485237685302021e2,
        3.20937758913846947e3,
        1.85777706184603153e-1,
    ];
    const B: [f64; 4] = [
        2.36012909523441209e1,
        2.44024637934444173e2,
        1.28261652607737228e3,
        2.84423683343917062e3,
    ];
    let ysq = x * x;
    let mut num = T::of_f64(A[4]) * ysq;
    let mut den = ysq;
    for i in 0..3 {
        num = (num + T::of_f64(A[i])) * ysq;
        den = (den + T::of_f64(B[i])) * ysq;
    }
    x * (num + T::of_f64(A[3])) / (den + T::of_f64(B[3]))
}

// y > 0.46875: erfc(y) for positive argument.
#[allow(clippy::excessive_precision)]
fn erfc_large<T: Real>(y: T) -> T {
    const C: [f64; 9] = [
        5.64188496988670089e-1,
        8.88314979438837594e0,
        6.61191906371416295e1,
        2.98635138197400131e2,
        8.81952221241769090e2,
        1.71204761263407058e3,
        2.05107837782607147e3,
        1.23033935479799725e3,
        2.15311535474403846e-8,
    ];
    const D: [f64; 8] = [
        1.57449261107098347e1,
        1.17693950891312499e2,
        5.37181101862009858e2,
        1.62138957456669019e3,
        3.29079923573345963e3,
        4.36261909014324716e3,
        3.43936767414372164e3,
        1.23033935480374942e3,
    ];
    const P: [f64; 6] = [
        3.05326634961232344e-1,
        3.60344899949804439e-1,
        1.25781726111229246e-1,
        1.60837851487422766e-2,
        6.58749161529837803e-4,
        1.63153871373020978e-2,
    ];
    const Q: [f64; 5] = [
        2.56852019228982242e0,
        1.87295284992346047e0,
        5.27905102951428412e-1,
        6.05183413124413191e-2,
        2.33520497626869185e-3,
    ];
    // 1/√π
    const SQRPI: f64 = 5.6418958354775628695e-1;

    if y > T::of_f64(26.543) {
        return T::zero();
    }
    let raw = if y <= T::of_f64(4.0) {
        let mut num = T::of_f64(C[8]) * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + T::of_f64(C[i])) * y;
            den = (den + T::of_f64(D[i])) * y;
        }
        (num + T::of_f64(C[7])) / (den + T::of_f64(D[7]))
    } else {
        let ysq = T::one() / (y * y);
        let mut num = T::of_f64(P[5]) * ysq;
        let mut den = ysq;
        for i in 0..4 {
            num = (num + T::of_f64(P[i])) * ysq;
            den = (den + T::of_f64(Q[i])) * ysq;
        }
        let r = ysq * (num + T::of_f64(P[4])) / (den + T::of_f64(Q[4]));
        (T::of_f64(SQRPI) - r) / y
    };
    // Split exp(−y²) to keep the rounded square from dominating the error.
    let sixteen = T::of_f64(16.0);
    let ysq = (y * sixteen).trunc() / sixteen;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp() * raw
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`. Recursion is capped, so pathological integrands degrade to a
/// fixed-depth composite rule instead of overflowing the stack.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, tol: T) -> T {
    let half = T::of_f64(0.5);
    let m = (a + b) * half;
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(a, b, fa, fm, fb);
    adapt(f, a, b, fa, fm, fb, whole, tol, 48)
}

fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    let six = T::of_f64(6.0);
    (b - a) / six * (fa + T::of_f64(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<T: Real, F: Fn(T) -> T>(
    f: &F,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> T {
    let half = T::of_f64(0.5);
    let m = (a + b) * half;
    let lm = (a + m) * half;
    let rm = (m + b) * half;
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= T::of_f64(15.0) * tol {
        left + right + delta / T::of_f64(15.0)
    } else {
        let ht = tol * half;
        adapt(f, a, m, fa, flm, fm, left, ht, depth - 1)
            + adapt(f, m, b, fm, frm, fb, right, ht, depth - 1)
    }
}

/// Least-squares slope of `ln(y)` against `ln(x)`.
pub fn log_log_slope<T: Real>(points: &[(T, T)]) -> T {
    assert!(points.len() >= 2, "slope needs at least two points");
    let n = T::of_usize(points.len());
    let mut sx = T::zero();
    let mut sy = T::zero();
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for &(x, y) in points {
        let lx = x.ln();
        let ly = y.ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}
