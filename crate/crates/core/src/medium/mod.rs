//! Refractive-index models and the dispersion quantities derived from them.
//!
//! Frequencies are in units of the electron rest energy. Tabulated models are
//! read from `omega_eV,n` text tables and converted on load.

mod spline;

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::vec3::Vec3;
use crate::ELECTRON_MASS_EV;

pub use spline::CubicSpline;

/// Default bound on `|𝒟|` (and `|ℰ|`) for the weak-dispersion branch.
pub const WEAK_DISPERSION_THRESHOLD: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MediumError {
    #[error("frequency {omega} outside the model domain [{lo}, {hi}]")]
    OutOfDomain { omega: f64, lo: f64, hi: f64 },
    #[error("refractive index {n} at omega = {omega} is not positive")]
    NonPositiveIndex { omega: f64, n: f64 },
    #[error("group velocity undefined: n(1 + D) = {value} at omega = {omega}")]
    DegenerateGroupVelocity { omega: f64, value: f64 },
    #[error("photon direction must be a non-zero finite vector")]
    InvalidDirection,
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error("cannot read index table: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: frequencies must be strictly increasing")]
    NotIncreasing { line: usize },
    #[error("line {line}: refractive index must be positive")]
    NonPositiveIndex { line: usize },
    #[error("index table needs at least 4 samples, found {found}")]
    TooFewPoints { found: usize },
}

/// `n`, `dn/dω` and `d²n/dω²` at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndexValue {
    pub n: f64,
    pub dn: f64,
    pub d2n: f64,
}

/// Dimensionless dispersion strengths `𝒟 = ω n′/n` and `ℰ = n ω² n″`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionParams {
    pub d_param: f64,
    pub e_param: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakDispersion {
    /// `|𝒟|`.
    pub ratio: f64,
    pub weak: bool,
}

type IndexFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Index given by closures for `n`, `n′` and `n″`.
#[derive(Clone)]
pub struct AnalyticIndex {
    n: IndexFn,
    dn: IndexFn,
    d2n: IndexFn,
    domain: (f64, f64),
    label: String,
}

impl AnalyticIndex {
    pub fn new<N, D1, D2>(n: N, dn: D1, d2n: D2) -> Self
    where
        N: Fn(f64) -> f64 + Send + Sync + 'static,
        D1: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            n: Arc::new(n),
            dn: Arc::new(dn),
            d2n: Arc::new(d2n),
            domain: (0.0, f64::INFINITY),
            label: "analytic".to_owned(),
        }
    }

    /// Second-order expansion around `omega0` with prescribed `n`, `𝒟` and `ℰ`.
    pub fn taylor(omega0: f64, n0: f64, d_param: f64, e_param: f64) -> Self {
        let slope = d_param * n0 / omega0;
        let curvature = e_param / (n0 * omega0 * omega0);
        let mut model = Self::new(
            move |w| n0 + slope * (w - omega0) + 0.5 * curvature * (w - omega0).powi(2),
            move |w| slope + curvature * (w - omega0),
            move |_| curvature,
        );
        model.label = format!("taylor(omega0={omega0}, n={n0}, D={d_param}, E={e_param})");
        model
    }

    pub fn with_domain(mut self, lo: f64, hi: f64) -> Self {
        self.domain = (lo, hi);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }
}

impl fmt::Debug for AnalyticIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticIndex")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .finish()
    }
}

/// Index interpolated from samples with a natural cubic spline.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedIndex {
    spline: CubicSpline,
}

impl TabulatedIndex {
    /// Samples with `omega` in electron-mass units.
    pub fn from_samples(omega: Vec<f64>, n: Vec<f64>) -> Result<Self, TableError> {
        if omega.len() != n.len() {
            return Err(TableError::Parse {
                line: 0,
                message: format!("{} frequencies but {} indices", omega.len(), n.len()),
            });
        }
        if omega.len() < 4 {
            return Err(TableError::TooFewPoints { found: omega.len() });
        }
        for (i, pair) in omega.windows(2).enumerate() {
            if !(pair[1] > pair[0]) {
                return Err(TableError::NotIncreasing { line: i + 2 });
            }
        }
        if let Some(i) = n.iter().position(|&v| !(v > 0.0)) {
            return Err(TableError::NonPositiveIndex { line: i + 1 });
        }
        Ok(Self {
            spline: CubicSpline::natural(omega, n),
        })
    }

    /// Parses `omega_eV,n` rows; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut omega = Vec::new();
        let mut index = Vec::new();
        let mut last: Option<f64> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split(',').map(str::trim);
            let (Some(w), Some(n), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(TableError::Parse {
                    line: line_no,
                    message: format!("expected two comma-separated columns, got '{line}'"),
                });
            };
            let parse = |s: &str, what: &str| {
                s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| TableError::Parse {
                    line: line_no,
                    message: format!("invalid {what} '{s}'"),
                })
            };
            let (w_ev, n) = (parse(w, "frequency")?, parse(n, "index")?);
            if last.is_some_and(|prev| w_ev <= prev) {
                return Err(TableError::NotIncreasing { line: line_no });
            }
            if n <= 0.0 {
                return Err(TableError::NonPositiveIndex { line: line_no });
            }
            last = Some(w_ev);
            omega.push(w_ev / ELECTRON_MASS_EV);
            index.push(n);
        }
        if omega.len() < 4 {
            return Err(TableError::TooFewPoints { found: omega.len() });
        }
        Ok(Self {
            spline: CubicSpline::natural(omega, index),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TableError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.spline.domain()
    }

    pub fn spline(&self) -> &CubicSpline {
        &self.spline
    }
}

#[derive(Debug, Clone)]
pub enum MediumModel {
    Constant(f64),
    Analytic(AnalyticIndex),
    Tabulated(TabulatedIndex),
}

impl MediumModel {
    pub fn constant(n: f64) -> Self {
        Self::Constant(n)
    }

    pub fn domain(&self) -> (f64, f64) {
        match self {
            Self::Constant(_) => (0.0, f64::INFINITY),
            Self::Analytic(a) => a.domain,
            Self::Tabulated(t) => t.domain(),
        }
    }

    pub fn index(&self, omega: f64) -> Result<IndexValue, MediumError> {
        let (lo, hi) = self.domain();
        if !(omega >= lo && omega <= hi) {
            return Err(MediumError::OutOfDomain { omega, lo, hi });
        }
        let value = match self {
            Self::Constant(n) => IndexValue { n: *n, dn: 0.0, d2n: 0.0 },
            Self::Analytic(a) => IndexValue {
                n: (a.n)(omega),
                dn: (a.dn)(omega),
                d2n: (a.d2n)(omega),
            },
            Self::Tabulated(t) => {
                let (n, dn, d2n) = t.spline.eval_with_derivatives(omega);
                IndexValue { n, dn, d2n }
            }
        };
        if !(value.n > 0.0) {
            return Err(MediumError::NonPositiveIndex { omega, n: value.n });
        }
        Ok(value)
    }

    pub fn dispersion_params(&self, omega: f64) -> Result<DispersionParams, MediumError> {
        let v = self.index(omega)?;
        Ok(DispersionParams {
            d_param: omega * v.dn / v.n,
            e_param: v.n * omega * omega * v.d2n,
            omega,
        })
    }

    /// Photon group velocity `k̂ / (n (1 + 𝒟))`.
    pub fn group_velocity(&self, k_direction: Vec3, omega: f64) -> Result<Vec3, MediumError> {
        let dir = k_direction.unit().ok_or(MediumError::InvalidDirection)?;
        let v = self.index(omega)?;
        let d = omega * v.dn / v.n;
        if (1.0 + d).abs() < 1e-12 {
            return Err(MediumError::DegenerateGroupVelocity {
                omega,
                value: v.n * (1.0 + d),
            });
        }
        Ok(dir / (v.n * (1.0 + d)))
    }

    /// `ξ = nω²n″ + (n′ω)² + n² + 4nn′ω`, the longitudinal factor in `∂²ω/∂k∂k`.
    pub fn omega_hessian_factor(&self, omega: f64) -> Result<f64, MediumError> {
        let IndexValue { n, dn, d2n } = self.index(omega)?;
        Ok(n * omega * omega * d2n + (dn * omega).powi(2) + n * n + 4.0 * n * dn * omega)
    }

    pub fn weak_dispersion_check(&self, omega: f64) -> Result<WeakDispersion, MediumError> {
        self.weak_dispersion_check_with(omega, WEAK_DISPERSION_THRESHOLD)
    }

    pub fn weak_dispersion_check_with(
        &self,
        omega: f64,
        threshold: f64,
    ) -> Result<WeakDispersion, MediumError> {
        let ratio = self.dispersion_params(omega)?.d_param.abs();
        Ok(WeakDispersion {
            ratio,
            weak: ratio < threshold,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_model() {
        let m = MediumModel::constant(1.5);
        assert_eq!(m.index(3.0).unwrap(), IndexValue { n: 1.5, dn: 0.0, d2n: 0.0 });
        let d = m.dispersion_params(1e-5).unwrap();
        assert_eq!((d.d_param, d.e_param), (0.0, 0.0));
        assert_eq!(m.omega_hessian_factor(0.2).unwrap(), 2.25);
        let g = m.group_velocity(Vec3::new(0.0, 3.0, 4.0), 1e-5).unwrap();
        assert!((g.norm() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.weak_dispersion_check(1e-5).unwrap(), WeakDispersion { ratio: 0.0, weak: true });
    }

    #[test]
    fn hessian_factor_matches_hand_expansion() {
        // n = 1.3 + 0.01 w^2 at w = 2: n = 1.34, n' = 0.04, n'' = 0.02.
        let m = MediumModel::Analytic(AnalyticIndex::new(
            |w| 1.3 + 0.01 * w * w,
            |w| 0.02 * w,
            |_| 0.02,
        ));
        let expected = 1.34 * 4.0 * 0.02 + 0.08f64.powi(2) + 1.34f64.powi(2) + 4.0 * 1.34 * 0.04 * 2.0;
        assert!((m.omega_hessian_factor(2.0).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn threshold_is_strict() {
        let m = MediumModel::Analytic(AnalyticIndex::taylor(1.0, 1.2, 0.01, 0.0));
        let check = m.weak_dispersion_check(1.0).unwrap();
        assert!((check.ratio - 0.01).abs() < 1e-15);
        let on_boundary = m.weak_dispersion_check_with(1.0, check.ratio).unwrap();
        assert!(!on_boundary.weak);
    }

    #[test]
    fn taylor_model_reproduces_parameters() {
        let m = MediumModel::Analytic(AnalyticIndex::taylor(2e-5, 1.001, 5e6, 0.0));
        let d = m.dispersion_params(2e-5).unwrap();
        assert!((d.d_param - 5e6).abs() < 1e-6);
        assert_eq!(d.e_param, 0.0);
        let g = m.group_velocity(Vec3::Z, 2e-5).unwrap();
        assert!((g.norm() - 1.0 / (1.001 * (1.0 + 5e6))).abs() < 1e-18);
    }

    #[test]
    fn degenerate_group_velocity() {
        let m = MediumModel::Analytic(AnalyticIndex::taylor(1.0, 1.5, -1.0, 0.0));
        assert!(matches!(
            m.group_velocity(Vec3::Z, 1.0),
            Err(MediumError::DegenerateGroupVelocity { .. })
        ));
    }

    #[test]
    fn table_parsing_errors_carry_line_numbers() {
        let text = "# ice\n1.0,1.3\n2.0,1.31\n2.0,1.32\n3.0,1.33\n";
        assert!(matches!(TabulatedIndex::parse(text), Err(TableError::NotIncreasing { line: 4 })));
        let text = "1.0,1.3\n2.0,abc\n";
        assert!(matches!(TabulatedIndex::parse(text), Err(TableError::Parse { line: 2, .. })));
        let text = "1.0,1.3\n2.0,1.3\n3.0,1.3\n";
        assert!(matches!(TabulatedIndex::parse(text), Err(TableError::TooFewPoints { found: 3 })));
        let text = "1.0,1.3\n2.0,-1\n";
        assert!(matches!(TabulatedIndex::parse(text), Err(TableError::NonPositiveIndex { line: 2 })));
    }

    #[test]
    fn table_domain_is_enforced() {
        let text = "1.0,1.3\n2.0,1.31\n3.0,1.32\n4.0,1.33\n";
        let m = MediumModel::Tabulated(TabulatedIndex::parse(text).unwrap());
        let w = 2.5 / ELECTRON_MASS_EV;
        assert!(m.index(w).is_ok());
        assert!(matches!(m.index(5.0 / ELECTRON_MASS_EV), Err(MediumError::OutOfDomain { .. })));
    }
}
