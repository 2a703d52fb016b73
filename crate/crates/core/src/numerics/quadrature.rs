//! Adaptive 15-point Gauss-Kronrod quadrature.
//!
//! Panels are kept in a max-heap keyed by their error estimate and the worst
//! panel is bisected until the global tolerance is met or the panel budget
//! runs out. Oscillatory integrands are handled by pre-splitting the interval
//! so that no initial panel spans more than a quarter of a period.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use thiserror::Error;

pub const DEFAULT_PANEL_BUDGET: usize = 4096;

#[allow(clippy::excessive_precision)]
const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[allow(clippy::excessive_precision)]
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// Absolute error estimate.
    pub error_estimate: f64,
    pub panels_used: usize,
    /// False when the panel budget was exhausted before the tolerance was met.
    pub converged: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("integrand is not finite at x = {x}")]
    NonFiniteIntegrand { x: f64 },
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("tolerances must be positive (abs_tol = {abs_tol}, rel_tol = {rel_tol})")]
    InvalidTolerance { abs_tol: f64, rel_tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub panel_budget: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            panel_budget: DEFAULT_PANEL_BUDGET,
        }
    }
}

impl QuadratureOptions {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(QuadratureError::InvalidTolerance {
                abs_tol: self.abs_tol,
                rel_tol: self.rel_tol,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// Single 15-point Kronrod panel with the embedded 7-point Gauss estimate.
fn kronrod_panel<F>(f: &F, a: f64, b: f64) -> Result<Panel, QuadratureError>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadratureError::NonFiniteIntegrand { x })
        }
    };

    let f_center = eval(center)?;
    let mut gauss = f_center * GAUSS_WEIGHTS[3];
    let mut kronrod = f_center * KRONROD_WEIGHTS[7];
    let mut res_abs = kronrod.abs();
    let mut left = [0.0; 7];
    let mut right = [0.0; 7];

    for j in 0..7 {
        let dx = half * KRONROD_NODES[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        left[j] = f1;
        right[j] = f2;
        kronrod += KRONROD_WEIGHTS[j] * (f1 + f2);
        res_abs += KRONROD_WEIGHTS[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += GAUSS_WEIGHTS[j / 2] * (f1 + f2);
        }
    }

    let mean = 0.5 * kronrod;
    let mut res_asc = KRONROD_WEIGHTS[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += KRONROD_WEIGHTS[j] * ((left[j] - mean).abs() + (right[j] - mean).abs());
    }

    let width = half.abs();
    Ok(Panel {
        a,
        b,
        value: kronrod * half,
        error: rescale_error((kronrod - gauss) * half, res_abs * width, res_asc * width),
    })
}

/// Integrates `f` over the union of consecutive intervals given by
/// `breakpoints` (sorted ascending, at least two entries).
pub fn integrate_partitioned<F>(
    f: F,
    breakpoints: &[f64],
    options: &QuadratureOptions,
) -> Result<QuadratureResult, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    options.validate()?;
    if breakpoints.len() < 2 {
        let a = breakpoints.first().copied().unwrap_or(f64::NAN);
        return Err(QuadratureError::InvalidInterval { a, b: a });
    }
    for pair in breakpoints.windows(2) {
        if !(pair[0] <= pair[1]) || !pair[0].is_finite() || !pair[1].is_finite() {
            return Err(QuadratureError::InvalidInterval {
                a: pair[0],
                b: pair[1],
            });
        }
    }

    let mut heap = BinaryHeap::with_capacity(breakpoints.len());
    let mut converged = true;
    for pair in breakpoints.windows(2) {
        if pair[1] > pair[0] {
            heap.push(kronrod_panel(&f, pair[0], pair[1])?);
        }
    }
    if heap.is_empty() {
        return Ok(QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            panels_used: 1,
            converged: true,
        });
    }
    if heap.len() > options.panel_budget {
        converged = false;
    }

    let (mut value, mut error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p: &Panel| (v + p.value, e + p.error));
    loop {
        let target = options.abs_tol.max(options.rel_tol * value.abs());
        let exhausted = heap.len() >= options.panel_budget;
        if error <= target || exhausted {
            let (value, error) = heap
                .iter()
                .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
            return Ok(QuadratureResult {
                value,
                error_estimate: error,
                panels_used: heap.len(),
                converged: converged && !exhausted,
            });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split further in double precision.
            heap.push(worst);
            let (value, error) = heap
                .iter()
                .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
            return Ok(QuadratureResult {
                value,
                error_estimate: error,
                panels_used: heap.len(),
                converged: false,
            });
        }
        let left = kronrod_panel(&f, worst.a, mid)?;
        let right = kronrod_panel(&f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
}

/// Adaptive quadrature of `f` over `[a, b]`.
///
/// With `phase_rate_hint = Some(rate)` the interval is first cut into
/// panels no wider than `π / rate`.
pub fn integrate_adaptive<F>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    phase_rate_hint: Option<f64>,
) -> Result<QuadratureResult, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    let options = QuadratureOptions::new(abs_tol, rel_tol);
    integrate_with(f, a, b, phase_rate_hint, &options)
}

pub fn integrate_with<F>(
    f: F,
    a: f64,
    b: f64,
    phase_rate_hint: Option<f64>,
    options: &QuadratureOptions,
) -> Result<QuadratureResult, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    if !(a <= b) || !a.is_finite() || !b.is_finite() {
        return Err(QuadratureError::InvalidInterval { a, b });
    }
    let breaks = oscillation_breakpoints(a, b, phase_rate_hint, options.panel_budget);
    let mut result = integrate_partitioned(f, &breaks.points, options)?;
    result.converged &= !breaks.truncated;
    Ok(result)
}

/// Signed integral: `integrate_signed(f, b, a) == -integrate_signed(f, a, b)`.
pub fn integrate_signed<F>(
    f: F,
    a: f64,
    b: f64,
    options: &QuadratureOptions,
) -> Result<QuadratureResult, QuadratureError>
where
    F: Fn(f64) -> f64,
{
    if a <= b {
        integrate_with(f, a, b, None, options)
    } else {
        let mut r = integrate_with(f, b, a, None, options)?;
        r.value = -r.value;
        Ok(r)
    }
}

struct Breakpoints {
    points: Vec<f64>,
    truncated: bool,
}

fn oscillation_breakpoints(a: f64, b: f64, rate: Option<f64>, budget: usize) -> Breakpoints {
    let wanted = match rate {
        Some(r) if r.is_finite() && r > 0.0 => ((b - a) * r / PI).ceil().max(1.0),
        _ => 1.0,
    };
    let budget = budget.max(1);
    let truncated = wanted > budget as f64;
    let count = if truncated { budget } else { wanted as usize };
    let width = (b - a) / count as f64;
    let mut points: Vec<f64> = (0..count).map(|i| a + width * i as f64).collect();
    points.push(b);
    Breakpoints { points, truncated }
}
