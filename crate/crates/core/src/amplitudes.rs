//! Tree-level helicity amplitudes for `e → e′ + γ` and the phase of the
//! transition amplitude.
//!
//! The amplitude is the sum of four partial terms labelled by the spin
//! projections `(σ, σ′, σ_γ)` with `σ = σ′ + σ_γ`. Each term is a product of
//! small Wigner functions of the three polar angles times an azimuthal phase.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2, TAU};

use num_complex::Complex64;
use thiserror::Error;

use crate::kinematics::{energy, EmissionGeometry};
use crate::numerics::{differentiate_with_step, DiffError, DiffSpec};
use crate::vec3::Vec3;

/// Fine-structure constant.
pub const FINE_STRUCTURE: f64 = 1.0 / 137.035_999_084;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ElectronHelicity {
    #[default]
    Plus,
    Minus,
}

impl ElectronHelicity {
    pub fn value(self) -> f64 {
        match self {
            Self::Plus => 0.5,
            Self::Minus => -0.5,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Self::Plus => Self::Minus,
            Self::Minus => Self::Plus,
        }
    }

    pub fn from_value(v: f64) -> Option<Self> {
        if v == 0.5 {
            Some(Self::Plus)
        } else if v == -0.5 {
            Some(Self::Minus)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PhotonHelicity {
    #[default]
    Plus,
    Minus,
}

impl PhotonHelicity {
    pub const BOTH: [PhotonHelicity; 2] = [PhotonHelicity::Plus, PhotonHelicity::Minus];

    pub fn value(self) -> f64 {
        match self {
            Self::Plus => 1.0,
            Self::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Self::Plus => Self::Minus,
            Self::Minus => Self::Plus,
        }
    }

    pub fn from_value(v: f64) -> Option<Self> {
        if v == 1.0 {
            Some(Self::Plus)
        } else if v == -1.0 {
            Some(Self::Minus)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct HelicityConfig {
    pub lambda_e: ElectronHelicity,
    pub lambda_prime: ElectronHelicity,
    pub lambda_gamma: PhotonHelicity,
}

impl HelicityConfig {
    pub fn new(
        lambda_e: ElectronHelicity,
        lambda_prime: ElectronHelicity,
        lambda_gamma: PhotonHelicity,
    ) -> Self {
        Self {
            lambda_e,
            lambda_prime,
            lambda_gamma,
        }
    }

    pub fn flipped(self) -> Self {
        Self::new(
            self.lambda_e.flipped(),
            self.lambda_prime.flipped(),
            self.lambda_gamma.flipped(),
        )
    }

    pub fn with_photon(self, lambda_gamma: PhotonHelicity) -> Self {
        Self { lambda_gamma, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeValue {
    /// `|M_fi|²` including the real coupling prefactor.
    pub mod_squared: f64,
    /// `arg M_fi` in `(−π, π]`; zero when the amplitude vanishes.
    pub phase: f64,
    /// False when both phase sums vanish and the phase is undefined.
    pub phase_defined: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialAmplitude {
    pub sigma: f64,
    pub sigma_prime: f64,
    pub sigma_gamma: i8,
    /// Real product of small Wigner functions, with its sign.
    pub weight: f64,
    /// Azimuthal phase of the term.
    pub phase: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AmplitudeError {
    #[error("amplitude phase is undefined: both phase sums vanish")]
    DegeneratePhase,
    #[error("phase unwrapping is ambiguous within the differentiation step (jump {jump})")]
    PhaseWrapFailure { jump: f64 },
    #[error(transparent)]
    Differentiation(#[from] DiffError),
}

/// Spin-½ small Wigner function `d^{1/2}_{σλ}(θ)`.
pub fn wigner_d_half(sigma: f64, lambda: f64, theta: f64) -> f64 {
    let half = 0.5 * theta;
    if sigma == lambda {
        half.cos()
    } else {
        -2.0 * sigma * half.sin()
    }
}

/// Spin-1 small Wigner function `d^{1}_{σλ}(θ)` for `λ = ±1`.
pub fn wigner_d_one(sigma: i8, lambda: i8, theta: f64) -> f64 {
    debug_assert!(lambda == 1 || lambda == -1, "photon helicity must be ±1");
    match sigma {
        0 => f64::from(lambda) * FRAC_1_SQRT_2 * theta.sin(),
        s if s == lambda => (0.5 * theta).cos().powi(2),
        _ => (0.5 * theta).sin().powi(2),
    }
}

/// Odd in `a` bit for bit, so mirrored configurations wrap identically.
fn wrap_angle(a: f64) -> f64 {
    let w = a - TAU * (a / TAU).round();
    if w <= -PI {
        PI
    } else {
        w
    }
}

/// Real coupling `g_{λλ′}` multiplying the partial-amplitude sum.
pub fn coupling(initial_energy: f64, final_energy: f64, h: HelicityConfig) -> f64 {
    let (e, ep) = (initial_energy, final_energy);
    let le = h.lambda_e.value();
    let lp = h.lambda_prime.value();
    (4.0 * PI * FINE_STRUCTURE).sqrt()
        * (2.0 * le * (e - 1.0).max(0.0).sqrt() * (ep + 1.0).sqrt()
            + 2.0 * lp * (ep - 1.0).max(0.0).sqrt() * (e + 1.0).sqrt())
}

/// The four partial amplitudes with `σ = σ′ + σ_γ`.
///
/// Azimuths enter only through the differences `φ_k − φ`, `φ_k − φ′` and
/// `φ′ − φ`, each reduced to `(−π, π]`, which keeps the half-angle phases
/// single valued.
pub fn partial_amplitudes(
    p: Vec3,
    p_prime: Vec3,
    k: Vec3,
    h: HelicityConfig,
) -> [PartialAmplitude; 4] {
    let (theta, theta_p, theta_k) = (p.theta(), p_prime.theta(), k.theta());
    let azimuth = |v: Vec3| v.y.atan2(v.x);
    let (phi, phi_p, phi_k) = (azimuth(p), azimuth(p_prime), azimuth(k));
    let outer = 0.5 * (wrap_angle(phi_k - phi) + wrap_angle(phi_k - phi_p));
    let inner = 0.5 * wrap_angle(phi_p - phi);

    let le = h.lambda_e.value();
    let lp = h.lambda_prime.value();
    let lg = h.lambda_gamma.value() as i8;
    let d = |s: f64, l: f64, t: f64| wigner_d_half(s, l, t);

    [
        PartialAmplitude {
            sigma: 0.5,
            sigma_prime: -0.5,
            sigma_gamma: 1,
            weight: SQRT_2 * d(0.5, le, theta) * d(-0.5, lp, theta_p) * wigner_d_one(1, lg, theta_k),
            phase: outer,
        },
        PartialAmplitude {
            sigma: 0.5,
            sigma_prime: 0.5,
            sigma_gamma: 0,
            weight: -d(0.5, le, theta) * d(0.5, lp, theta_p) * wigner_d_one(0, lg, theta_k),
            phase: inner,
        },
        PartialAmplitude {
            sigma: -0.5,
            sigma_prime: 0.5,
            sigma_gamma: -1,
            weight: -SQRT_2 * d(-0.5, le, theta) * d(0.5, lp, theta_p) * wigner_d_one(-1, lg, theta_k),
            phase: -outer,
        },
        PartialAmplitude {
            sigma: -0.5,
            sigma_prime: -0.5,
            sigma_gamma: 0,
            weight: d(-0.5, le, theta) * d(-0.5, lp, theta_p) * wigner_d_one(0, lg, theta_k),
            phase: -inner,
        },
    ]
}

/// `(Σ M sin, Σ M cos, Σ |M|)` over the partial amplitudes.
fn partial_sums(p: Vec3, p_prime: Vec3, k: Vec3, h: HelicityConfig) -> (f64, f64, f64) {
    partial_amplitudes(p, p_prime, k, h)
        .iter()
        .fold((0.0, 0.0, 0.0), |(s, c, a), t| {
            (s + t.weight * t.phase.sin(), c + t.weight * t.phase.cos(), a + t.weight.abs())
        })
}

fn amplitude_of(p: Vec3, p_prime: Vec3, k: Vec3, h: HelicityConfig) -> AmplitudeValue {
    let (sin_sum, cos_sum, scale) = partial_sums(p, p_prime, k, h);
    let g = coupling(energy(p), energy(p_prime), h);
    let mod_squared = g * g * (sin_sum * sin_sum + cos_sum * cos_sum);
    let magnitude = sin_sum.hypot(cos_sum);
    if !(magnitude > 1e-14 * scale) || g == 0.0 {
        return AmplitudeValue {
            mod_squared,
            phase: 0.0,
            phase_defined: false,
        };
    }
    let mut phase = sin_sum.atan2(cos_sum);
    if g < 0.0 {
        phase += PI;
    }
    AmplitudeValue {
        mod_squared,
        phase: wrap_angle(phase),
        phase_defined: true,
    }
}

pub fn helicity_amplitude(geom: &EmissionGeometry, h: HelicityConfig) -> AmplitudeValue {
    amplitude_of(geom.p, geom.p_prime, geom.k, h)
}

/// `Σ_{λ_γ} |M_fi|²` at fixed electron helicities.
pub fn photon_summed_mod_squared(geom: &EmissionGeometry, h: HelicityConfig) -> f64 {
    PhotonHelicity::BOTH
        .iter()
        .map(|&lg| helicity_amplitude(geom, h.with_photon(lg)).mod_squared)
        .sum()
}

/// Complex amplitude `g Σ M e^{iζ}`.
pub fn complex_amplitude(geom: &EmissionGeometry, h: HelicityConfig) -> Complex64 {
    let g = coupling(geom.initial_energy(), geom.final_energy(), h);
    partial_amplitudes(geom.p, geom.p_prime, geom.k, h)
        .iter()
        .map(|t| Complex64::from_polar(t.weight, t.phase))
        .sum::<Complex64>()
        * g
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGradient {
    /// `∂ζ/∂p` at fixed `p′` and `k`.
    pub grad_p: Vec3,
    /// `∂ζ/∂k` at fixed `p` and `p′`.
    pub grad_k: Vec3,
}

impl PhaseGradient {
    /// `(∂_p + ∂_k) ζ`, the derivative along a joint shift of `p` and `k`.
    pub fn total(&self) -> Vec3 {
        self.grad_p + self.grad_k
    }
}

/// Differentiation settings for the amplitude phase. The step is relative to
/// the smallest non-zero transverse momentum of the configuration.
pub fn default_phase_diff_spec() -> DiffSpec {
    DiffSpec {
        base_step: 1e-3,
        ..DiffSpec::default()
    }
}

pub fn phase_gradient(geom: &EmissionGeometry, h: HelicityConfig) -> Result<PhaseGradient, AmplitudeError> {
    phase_gradient_with(geom, h, &default_phase_diff_spec())
}

pub fn phase_gradient_with(
    geom: &EmissionGeometry,
    h: HelicityConfig,
    spec: &DiffSpec,
) -> Result<PhaseGradient, AmplitudeError> {
    let centre = helicity_amplitude(geom, h);
    if !centre.phase_defined {
        return Err(AmplitudeError::DegeneratePhase);
    }
    let (a, b, c) = geom.transverse_legs();
    let scale = [a, b, c]
        .into_iter()
        .filter(|&l| l > 0.0)
        .fold(f64::INFINITY, f64::min);
    let scale = if scale.is_finite() { scale } else { geom.k.norm() };
    let step = spec.base_step * scale;

    let (centre_sin, centre_cos, _) = partial_sums(geom.p, geom.p_prime, geom.k, h);
    let centre_sign = coupling(geom.initial_energy(), geom.final_energy(), h).signum();

    // Phase relative to the centre, taken from the product with the
    // conjugate centre amplitude so no wrapping enters the difference.
    let unwrapped = |p: Vec3, pp: Vec3, k: Vec3| -> Result<f64, AmplitudeError> {
        let value = amplitude_of(p, pp, k, h);
        if !value.phase_defined {
            return Err(AmplitudeError::DegeneratePhase);
        }
        let (s, c, _) = partial_sums(p, pp, k, h);
        let sign = centre_sign * coupling(energy(p), energy(pp), h).signum();
        let jump = (sign * (s * centre_cos - c * centre_sin)).atan2(sign * (c * centre_cos + s * centre_sin));
        if jump.abs() > 0.5 * PI {
            return Err(AmplitudeError::PhaseWrapFailure { jump });
        }
        Ok(jump)
    };

    let partial = |shift_p: bool, axis: usize| -> Result<f64, AmplitudeError> {
        let failure = std::cell::Cell::new(None);
        let origin = if shift_p { geom.p } else { geom.k }.component(axis);
        let derivative = differentiate_with_step(
            |t| {
                let (p, k) = if shift_p {
                    (geom.p.with_component(axis, t), geom.k)
                } else {
                    (geom.p, geom.k.with_component(axis, t))
                };
                match unwrapped(p, geom.p_prime, k) {
                    Ok(v) => v,
                    Err(e) => {
                        let first = failure.take().unwrap_or(e);
                        failure.set(Some(first));
                        f64::NAN
                    }
                }
            },
            origin,
            step,
            spec.order,
            spec.richardson_levels,
        );
        match (failure.into_inner(), derivative) {
            (Some(e), _) => Err(e),
            (None, d) => Ok(d?),
        }
    };

    let mut grad_p = Vec3::ZERO;
    let mut grad_k = Vec3::ZERO;
    for axis in 0..3 {
        grad_p = grad_p.with_component(axis, partial(true, axis)?);
        grad_k = grad_k.with_component(axis, partial(false, axis)?);
    }
    Ok(PhaseGradient { grad_p, grad_k })
}
