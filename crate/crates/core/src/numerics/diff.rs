//! Central differences with Richardson extrapolation.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeOrder {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffSpec {
    pub order: DerivativeOrder,
    /// Step relative to `max(|x|, 1)`.
    pub base_step: f64,
    pub richardson_levels: usize,
}

impl Default for DiffSpec {
    fn default() -> Self {
        Self {
            order: DerivativeOrder::First,
            base_step: 1e-5,
            richardson_levels: 2,
        }
    }
}

impl DiffSpec {
    pub fn second_order() -> Self {
        Self {
            order: DerivativeOrder::Second,
            base_step: 1e-3,
            ..Self::default()
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffError {
    #[error("function is not finite at x = {x}")]
    NonFiniteSample { x: f64 },
    #[error("step must be positive and finite (got {step})")]
    InvalidStep { step: f64 },
}

/// Derivative of `f` at `x` with step `spec.base_step * max(|x|, 1)`.
pub fn differentiate<F>(f: F, x: f64, spec: &DiffSpec) -> Result<f64, DiffError>
where
    F: Fn(f64) -> f64,
{
    let h = spec.base_step * x.abs().max(1.0);
    differentiate_with_step(f, x, h, spec.order, spec.richardson_levels)
}

/// Same as [`differentiate`] but with an explicit initial step `h`.
///
/// The step is halved `levels - 1` times and the central differences are
/// combined in a Richardson table; the error is `O(h^(2 * levels))` for
/// smooth `f`.
pub fn differentiate_with_step<F>(
    f: F,
    x: f64,
    h: f64,
    order: DerivativeOrder,
    levels: usize,
) -> Result<f64, DiffError>
where
    F: Fn(f64) -> f64,
{
    if !(h > 0.0) || !h.is_finite() {
        return Err(DiffError::InvalidStep { step: h });
    }
    let sample = |t: f64| {
        let y = f(t);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(DiffError::NonFiniteSample { x: t })
        }
    };
    let centre = match order {
        DerivativeOrder::First => 0.0,
        DerivativeOrder::Second => sample(x)?,
    };

    let levels = levels.max(1);
    let mut previous: Vec<f64> = Vec::with_capacity(levels);
    let mut step = h;
    for _ in 0..levels {
        let (upper, lower) = (x + step, x - step);
        let plus = sample(upper)?;
        let minus = sample(lower)?;
        let raw = match order {
            // Divide by the representable step, not the nominal one.
            DerivativeOrder::First => (plus - minus) / (upper - lower),
            DerivativeOrder::Second => (plus - 2.0 * centre + minus) / (step * step),
        };
        let mut row = Vec::with_capacity(previous.len() + 1);
        row.push(raw);
        let mut factor = 4.0;
        for (j, &coarse) in previous.iter().enumerate() {
            let fine = row[j];
            row.push(fine + (fine - coarse) / (factor - 1.0));
            factor *= 4.0;
        }
        previous = row;
        step *= 0.5;
    }
    Ok(*previous.last().expect("at least one level"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_at_zero() {
        let d = differentiate(f64::sin, 0.0, &DiffSpec::default()).unwrap();
        assert!((d - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cube_second_derivative() {
        let d = differentiate(|x| x * x * x, 2.0, &DiffSpec::second_order()).unwrap();
        assert!((d - 12.0).abs() < 1e-8, "{d}");
    }

    #[test]
    fn richardson_improves_order() {
        let f = |x: f64| x.exp();
        let h = 0.1;
        let plain = differentiate_with_step(f, 0.0, h, DerivativeOrder::First, 1).unwrap();
        let two = differentiate_with_step(f, 0.0, h, DerivativeOrder::First, 2).unwrap();
        let three = differentiate_with_step(f, 0.0, h, DerivativeOrder::First, 3).unwrap();
        assert!((plain - 1.0).abs() > 1e-4);
        assert!((two - 1.0).abs() < 1e-6);
        assert!((three - 1.0).abs() < 1e-10);
    }

    #[test]
    fn even_function_has_zero_slope() {
        let d = differentiate(|x| x.cosh(), 0.0, &DiffSpec::default()).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn reports_non_finite_samples() {
        let err = differentiate(|x| if x > 0.0 { f64::NAN } else { x }, 0.0, &DiffSpec::default())
            .unwrap_err();
        assert!(matches!(err, DiffError::NonFiniteSample { .. }));
    }
}
