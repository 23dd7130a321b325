//! Root finding on monotone functions, semi-infinite quadrature, and damped
//! fixed-point iteration.

use crate::error::{Error, Result};
use crate::specfun::AccuracySpec;

/// Sign-change bracket for the root finder.
#[derive(Debug, Clone, Copy)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidInput(format!(
                "bracket requires lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }
}

/// Quadrature accuracy and subdivision budget.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    pub accuracy: AccuracySpec,
    pub max_subdivisions: usize,
}

impl QuadratureSpec {
    pub fn new(accuracy: AccuracySpec, max_subdivisions: usize) -> Result<Self> {
        if max_subdivisions < 1 {
            return Err(Error::InvalidInput("max_subdivisions must be ≥ 1".into()));
        }
        Ok(Self {
            accuracy,
            max_subdivisions,
        })
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            accuracy: AccuracySpec::default(),
            max_subdivisions: 2000,
        }
    }
}

const MAX_ROOT_ITER: usize = 200;

/// Root of a monotone function on a sign-change bracket.
///
/// Bisection with a safeguarded Newton polish: the Newton step (secant-slope
/// derivative estimate) is accepted only when it stays inside the current
/// bracket, otherwise the midpoint is used.
pub fn find_root_monotone<F>(mut f: F, bracket: Bracket, accuracy: AccuracySpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::NonFinite {
            at: if flo.is_finite() { hi } else { lo },
        });
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::BracketInvalid { lo, hi });
    }

    // Illinois-stabilised regula falsi: when the same endpoint is replaced
    // twice running, halve the stale endpoint's ordinate so the secant step
    // cannot stagnate against a steep wall (e.g. Ψ near the origin).
    let mut last_side: i8 = 0;
    for iter in 0..MAX_ROOT_ITER {
        let slope = (fhi - flo) / (hi - lo);
        let secant = if slope != 0.0 {
            lo - flo / slope
        } else {
            0.5 * (lo + hi)
        };
        // Interleave plain bisection so the bracket width is guaranteed to
        // shrink geometrically.
        let x = if iter % 2 == 1 || !(secant > lo && secant < hi) {
            0.5 * (lo + hi)
        } else {
            secant
        };
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::NonFinite { at: x });
        }
        if fx.abs() <= accuracy.abs_tol {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
            if last_side == -1 {
                fhi *= 0.5;
            }
            last_side = -1;
        } else {
            hi = x;
            fhi = fx;
            if last_side == 1 {
                flo *= 0.5;
            }
            last_side = 1;
        }
        if hi - lo <= accuracy.rel_tol * x.abs().max(f64::MIN_POSITIVE) {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ROOT_ITER,
        context: "find_root_monotone".into(),
    })
}

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule,
// on [-1, 1].
const KRONROD_NODES: [f64; 15] = [
    -0.991455371120813,
    -0.949107912342759,
    -0.864864423359769,
    -0.741531185599394,
    -0.586087235467691,
    -0.405845151377397,
    -0.207784955007898,
    0.0,
    0.207784955007898,
    0.405845151377397,
    0.586087235467691,
    0.741531185599394,
    0.864864423359769,
    0.949107912342759,
    0.991455371120813,
];
const KRONROD_WEIGHTS: [f64; 15] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
    0.204432940075298,
    0.190350578064785,
    0.169004726639267,
    0.140653259715525,
    0.104790010322250,
    0.063092092629979,
    0.022935322010529,
];
const GAUSS_WEIGHTS: [f64; 7] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
    0.381830050505119,
    0.279705391489277,
    0.129484966168870,
];

/// One Gauss-Kronrod 7-15 pass on [a, b]; returns (estimate, error estimate).
fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for (i, (&node, &wk)) in KRONROD_NODES.iter().zip(&KRONROD_WEIGHTS).enumerate() {
        let x = c + h * node;
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFinite { at: x });
        }
        kronrod += wk * v;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * v;
        }
    }
    kronrod *= h;
    gauss *= h;
    Ok((kronrod, (kronrod - gauss).abs()))
}

/// Adaptive Gauss-Kronrod integration of `f` on the finite interval [a, b].
pub fn integrate_finite<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let (est, err) = gk15(&mut f, a, b)?;
    // Worklist of (a, b, estimate, error), always splitting the worst segment.
    let mut segments = vec![(a, b, est, err)];
    let mut subdivisions = 0usize;
    loop {
        let total: f64 = segments.iter().map(|s| s.2).sum();
        let total_err: f64 = segments.iter().map(|s| s.3).sum();
        let tol = spec.accuracy.abs_tol.max(spec.accuracy.rel_tol * total.abs());
        if total_err <= tol {
            return Ok(total);
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::NoConvergence {
                iterations: subdivisions,
                context: format!("quadrature error {total_err:.3e} above tolerance {tol:.3e}"),
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (sa, sb, _, _) = segments.swap_remove(worst);
        let mid = 0.5 * (sa + sb);
        if mid <= sa || mid >= sb {
            // Interval exhausted at machine precision; accept what we have.
            let (e, er) = gk15(&mut f, sa, sb)?;
            segments.push((sa, sb, e, er.min(f64::EPSILON * e.abs())));
            continue;
        }
        let (e1, er1) = gk15(&mut f, sa, mid)?;
        let (e2, er2) = gk15(&mut f, mid, sb)?;
        segments.push((sa, mid, e1, er1));
        segments.push((mid, sb, e2, er2));
        subdivisions += 1;
    }
}

/// ∫₀^∞ f(y) dy via the change of variable y = t/(1−t), t ∈ [0, 1).
pub fn integrate_semi_infinite<F>(mut f: F, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate_finite(
        |t| {
            let one_minus = 1.0 - t;
            let y = t / one_minus;
            f(y) / (one_minus * one_minus)
        },
        0.0,
        1.0,
        spec,
    )
}

/// ∫_a^∞ f(y) dy, a ≥ 0, by shifting the semi-infinite rule.
pub fn integrate_from<F>(mut f: F, a: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate_semi_infinite(|u| f(a + u), spec)
}

/// Damped fixed-point iteration x ← (1−θ)x + θF(x).
pub fn fixed_point_solve<F>(
    mut map: F,
    x0: f64,
    accuracy: AccuracySpec,
    max_iter: usize,
    damping: f64,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut x = x0;
    for _ in 0..max_iter {
        let fx = map(x)?;
        if !fx.is_finite() {
            return Err(Error::NonFinite { at: x });
        }
        if (fx - x).abs() <= accuracy.abs_tol {
            return Ok(x);
        }
        x = (1.0 - damping) * x + damping * fx;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        context: "fixed_point_solve".into(),
    })
}

/// Default damping θ for the fixed-point solver.
pub const DEFAULT_DAMPING: f64 = 0.5;
