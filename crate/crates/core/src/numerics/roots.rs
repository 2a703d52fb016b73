//! Bracketing root finder: regula-falsi steps guarded by bisection.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("no sign change on [{lo}, {hi}] (f = {f_lo}, {f_hi})")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("function is not finite at x = {x}")]
    NonFinite { x: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootBracket {
    pub root: f64,
    pub lo: f64,
    pub hi: f64,
    /// Bracket width after each iteration.
    pub widths: Vec<f64>,
}

pub fn find_root<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64, RootError>
where
    F: Fn(f64) -> f64,
{
    bracket_root(f, lo, hi, tol).map(|b| b.root)
}

/// Shrinks `[lo, hi]` until it is narrower than `tol`.
///
/// Every iteration tries a secant point first and falls back to a midpoint
/// split whenever the secant step alone did not halve the bracket.
pub fn bracket_root<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<RootBracket, RootError>
where
    F: Fn(f64) -> f64,
{
    let eval = |x: f64| {
        let y = f(x);
        if y.is_nan() {
            Err(RootError::NonFinite { x })
        } else {
            Ok(y)
        }
    };
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = eval(a)?;
    let mut fb = eval(b)?;
    let mut widths = Vec::new();
    if fa == 0.0 {
        return Ok(RootBracket { root: a, lo: a, hi: a, widths });
    }
    if fb == 0.0 {
        return Ok(RootBracket { root: b, lo: b, hi: b, widths });
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoSignChange { lo: a, hi: b, f_lo: fa, f_hi: fb });
    }

    let tol = tol.max(0.0);
    while b - a > tol {
        let width = b - a;
        let split = |x: f64, a: &mut f64, b: &mut f64, fa: &mut f64, fb: &mut f64| -> Result<bool, RootError> {
            let fx = eval(x)?;
            if fx == 0.0 {
                *a = x;
                *b = x;
                return Ok(true);
            }
            if fx.signum() == fa.signum() {
                *a = x;
                *fa = fx;
            } else {
                *b = x;
                *fb = fx;
            }
            Ok(false)
        };

        let secant = if fa.is_finite() && fb.is_finite() {
            a - fa * (b - a) / (fb - fa)
        } else {
            f64::NAN
        };
        let mut done = false;
        if secant > a && secant < b {
            done = split(secant, &mut a, &mut b, &mut fa, &mut fb)?;
        }
        if !done && b - a > 0.5 * width {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            done = split(mid, &mut a, &mut b, &mut fa, &mut fb)?;
        }
        widths.push(b - a);
        if done {
            break;
        }
    }
    let root = if a == b {
        a
    } else if fa.abs() < fb.abs() {
        a
    } else {
        b
    };
    Ok(RootBracket { root, lo: a, hi: b, widths })
}
