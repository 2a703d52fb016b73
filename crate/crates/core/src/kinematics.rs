//! Relativistic kinematics in natural units (`ħ = c = m_e = 1`).
//!
//! Energies and momenta are in units of the electron mass, angles in radians.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::amplitudes::{ElectronHelicity, HelicityConfig};
use crate::numerics::{differentiate_with_step, DerivativeOrder};
use crate::vec3::{Momentum3, Vec3};

/// Tolerance on `βn - 1` below which the classical angle is clamped to zero.
pub const THRESHOLD_EPSILON: f64 = 1e-12;

/// Momentum widths above this value leave the paraxial regime.
pub const PARAXIAL_SIGMA_LIMIT: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KinematicsError {
    #[error("below the Cherenkov threshold: beta * n = {beta_n} < 1")]
    BelowThreshold { beta_n: f64 },
    #[error("{quantity}: argument {argument} is outside [-1, 1]")]
    Unphysical { quantity: &'static str, argument: f64 },
    #[error("transverse legs ({p_perp}, {pp_perp}, {k_perp}) violate the triangle rules")]
    TriangleViolation { p_perp: f64, pp_perp: f64, k_perp: f64 },
    #[error("negative radicand {value} in transverse-momentum reconstruction")]
    NegativeRadicand { value: f64 },
    #[error("momentum balance p = p' + k violated by {residual}")]
    MomentumImbalance { residual: f64 },
    #[error("photon momentum |k| = {k_norm} does not match n * omega = {expected}")]
    DispersionMismatch { k_norm: f64, expected: f64 },
    #[error("invalid {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

pub fn energy(p: Momentum3) -> f64 {
    (1.0 + p.norm_sq()).sqrt()
}

/// Velocity `p / ε(p)` in units of `c`.
pub fn velocity(p: Momentum3) -> Vec3 {
    p / energy(p)
}

pub fn gamma_from_beta(beta: f64) -> f64 {
    1.0 / ((1.0 - beta) * (1.0 + beta)).sqrt()
}

/// Momentum `βγ` of an electron moving with speed `β`.
pub fn momentum_from_beta(beta: f64) -> f64 {
    beta * gamma_from_beta(beta)
}

pub fn beta_from_gamma(gamma: f64) -> f64 {
    ((gamma - 1.0) * (gamma + 1.0)).sqrt() / gamma
}

pub fn is_at_threshold(beta: f64, n: f64) -> bool {
    (beta * n - 1.0).abs() <= THRESHOLD_EPSILON
}

/// `arccos(1 / βn)`; zero within [`THRESHOLD_EPSILON`] of threshold.
pub fn cherenkov_angle_classical(beta: f64, n: f64) -> Result<f64, KinematicsError> {
    let beta_n = beta * n;
    if is_at_threshold(beta, n) {
        return Ok(0.0);
    }
    if beta_n < 1.0 {
        return Err(KinematicsError::BelowThreshold { beta_n });
    }
    Ok((1.0 / beta_n).acos())
}

/// Emission angle including the recoil of the electron.
pub fn cherenkov_angle_quantum(
    beta: f64,
    n: f64,
    omega: f64,
    epsilon: f64,
) -> Result<f64, KinematicsError> {
    let argument = 1.0 / (beta * n) + omega / (2.0 * epsilon) * (n * n - 1.0) / (beta * n);
    if !(-1.0..=1.0).contains(&argument) {
        // Allow the cutoff frequency itself to land on the boundary.
        if (argument - 1.0).abs() <= 1e-12 {
            return Ok(0.0);
        }
        return Err(KinematicsError::Unphysical {
            quantity: "quantum Cherenkov angle",
            argument,
        });
    }
    Ok(argument.acos())
}

/// Highest photon frequency that can still be emitted, `2ε(βn - 1)/(n² - 1)`.
pub fn cutoff_frequency(beta: f64, n: f64, epsilon: f64) -> f64 {
    if n <= 1.0 || beta * n <= 1.0 {
        return 0.0;
    }
    2.0 * epsilon * (beta * n - 1.0) / (n * n - 1.0)
}

/// Opening angle of the cone along `u_k - u_p` for photon angle `theta`.
pub fn mach_angle(beta: f64, n: f64, theta: f64) -> Result<f64, KinematicsError> {
    let relative_sq = 1.0 / (n * n) + beta * beta - 2.0 * beta * theta.cos() / n;
    let sin_theta = theta.sin();
    if sin_theta == 0.0 && relative_sq > 0.0 {
        return Ok(PI);
    }
    let argument = sin_theta / (n * relative_sq.max(0.0).sqrt());
    if !argument.is_finite() || !(-1.0..=1.0).contains(&argument) {
        return Err(KinematicsError::Unphysical {
            quantity: "Mach angle",
            argument,
        });
    }
    Ok(PI - argument.asin())
}

/// Interior angles of the transverse-momentum triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleAngles {
    /// Between `p⊥` and `p′⊥`, opposite `k⊥`.
    pub alpha: f64,
    /// Between `p′⊥` and `k⊥`, opposite `p⊥`.
    pub vartheta: f64,
    /// Between `p⊥` and `k⊥`, opposite `p′⊥`.
    pub gamma: f64,
    pub area_delta: f64,
}

pub fn satisfies_triangle_rules(p_perp: f64, pp_perp: f64, k_perp: f64) -> bool {
    let slack = 1e-12 * (p_perp + pp_perp + k_perp);
    p_perp >= 0.0
        && pp_perp >= 0.0
        && k_perp >= 0.0
        && p_perp <= pp_perp + k_perp + slack
        && pp_perp <= p_perp + k_perp + slack
        && k_perp <= p_perp + pp_perp + slack
}

fn law_of_cosines(adjacent_a: f64, adjacent_b: f64, opposite: f64) -> f64 {
    let c = (adjacent_a * adjacent_a + adjacent_b * adjacent_b - opposite * opposite)
        / (2.0 * adjacent_a * adjacent_b);
    c.clamp(-1.0, 1.0).acos()
}

/// Angles of the triangle with legs `p⊥`, `p′⊥`, `k⊥`.
///
/// A vanishing leg gives a zero opposite angle and splits the rest evenly.
pub fn triangle_angles(
    p_perp: f64,
    pp_perp: f64,
    k_perp: f64,
) -> Result<TriangleAngles, KinematicsError> {
    if !satisfies_triangle_rules(p_perp, pp_perp, k_perp) {
        return Err(KinematicsError::TriangleViolation {
            p_perp,
            pp_perp,
            k_perp,
        });
    }
    let legs = [p_perp, pp_perp, k_perp];
    if legs.iter().any(|&l| l == 0.0) {
        let zero_opposite = |leg: f64| if leg == 0.0 { 0.0 } else { FRAC_PI_2 };
        let zeros = legs.iter().filter(|&&l| l == 0.0).count();
        let (alpha, vartheta, gamma) = if zeros == 1 {
            (zero_opposite(k_perp), zero_opposite(p_perp), zero_opposite(pp_perp))
        } else {
            (PI / 3.0, PI / 3.0, PI / 3.0)
        };
        return Ok(TriangleAngles {
            alpha,
            vartheta,
            gamma,
            area_delta: 0.0,
        });
    }
    let alpha = law_of_cosines(p_perp, pp_perp, k_perp);
    let vartheta = law_of_cosines(pp_perp, k_perp, p_perp);
    let gamma = law_of_cosines(p_perp, k_perp, pp_perp);
    Ok(TriangleAngles {
        alpha,
        vartheta,
        gamma,
        area_delta: 0.5 * p_perp * pp_perp * alpha.sin(),
    })
}

/// Transverse momentum of the initial electron fixed by energy conservation,
/// `p̃⊥² = p′⊥² + k⊥² + k·k + 2(ε′ω − p′_z k_z)` with the photon four-momentum
/// square `k·k = ω²(1 − n²)`.
pub fn reconstruct_p_perp(
    pp_perp: f64,
    pp_z: f64,
    k_perp: f64,
    k_z: f64,
    omega: f64,
    n: f64,
) -> Result<f64, KinematicsError> {
    let final_energy = (1.0 + pp_perp * pp_perp + pp_z * pp_z).sqrt();
    let four_square = omega * omega * (1.0 - n * n);
    let radicand =
        pp_perp * pp_perp + k_perp * k_perp + four_square + 2.0 * (final_energy * omega - pp_z * k_z);
    if !(radicand >= 0.0) {
        return Err(KinematicsError::NegativeRadicand { value: radicand });
    }
    Ok(radicand.sqrt())
}

/// Optional momentum-space phase of the packet, `φ(p)`.
#[derive(Clone, Default)]
pub struct PhaseModel(Option<Arc<dyn Fn(Momentum3) -> f64 + Send + Sync>>);

impl PhaseModel {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(Momentum3) -> f64 + Send + Sync + 'static,
    {
        Self(Some(Arc::new(f)))
    }

    pub fn is_flat(&self) -> bool {
        self.0.is_none()
    }

    pub fn eval(&self, p: Momentum3) -> f64 {
        self.0.as_ref().map_or(0.0, |f| f(p))
    }

    /// Numerical gradient `∂φ/∂p`, zero for the flat model.
    pub fn gradient(&self, p: Momentum3, step: f64) -> Vec3 {
        let Some(f) = self.0.as_ref() else {
            return Vec3::ZERO;
        };
        let mut grad = Vec3::ZERO;
        for axis in 0..3 {
            let partial = differentiate_with_step(
                |t| f(p.with_component(axis, t)),
                p.component(axis),
                step,
                DerivativeOrder::First,
                2,
            )
            .unwrap_or(f64::NAN);
            grad = grad.with_component(axis, partial);
        }
        grad
    }
}

impl fmt::Debug for PhaseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_flat() { "PhaseModel(flat)" } else { "PhaseModel(custom)" })
    }
}

/// Gaussian electron wave packet in momentum space.
#[derive(Debug, Clone)]
pub struct ElectronPacket {
    pub mean_momentum: Momentum3,
    /// Momentum width in units of `m_e`.
    pub sigma: f64,
    pub helicity: ElectronHelicity,
    pub phase_model: PhaseModel,
}

impl ElectronPacket {
    pub fn new(mean_momentum: Momentum3, sigma: f64) -> Result<Self, KinematicsError> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(KinematicsError::InvalidParameter {
                name: "sigma",
                value: sigma,
            });
        }
        if !mean_momentum.is_finite() {
            return Err(KinematicsError::InvalidParameter {
                name: "mean momentum",
                value: mean_momentum.norm(),
            });
        }
        Ok(Self {
            mean_momentum,
            sigma,
            helicity: ElectronHelicity::Plus,
            phase_model: PhaseModel::default(),
        })
    }

    /// Packet with speed `beta` moving along polar angle `theta`, azimuth `phi`.
    pub fn from_beta(beta: f64, sigma: f64, theta: f64, phi: f64) -> Result<Self, KinematicsError> {
        if !(0.0..1.0).contains(&beta) {
            return Err(KinematicsError::InvalidParameter { name: "beta", value: beta });
        }
        Self::new(Vec3::from_spherical(momentum_from_beta(beta), theta, phi), sigma)
    }

    pub fn with_helicity(mut self, helicity: ElectronHelicity) -> Self {
        self.helicity = helicity;
        self
    }

    pub fn with_phase_model(mut self, phase_model: PhaseModel) -> Self {
        self.phase_model = phase_model;
        self
    }

    pub fn energy(&self) -> f64 {
        energy(self.mean_momentum)
    }

    pub fn beta(&self) -> f64 {
        self.mean_momentum.norm() / self.energy()
    }

    pub fn gamma(&self) -> f64 {
        self.energy()
    }

    pub fn velocity(&self) -> Vec3 {
        velocity(self.mean_momentum)
    }

    /// True when `σ` is too large for the paraxial expansion.
    pub fn paraxial_warning(&self) -> bool {
        self.sigma > PARAXIAL_SIGMA_LIMIT
    }
}

/// Which of the two mirror-image triangles is realised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MirrorBranch {
    /// `φ = φ′ + α`, `φ_k = φ′ + α + γ`.
    Plus,
    /// `φ = φ′ − α`, `φ_k = φ′ − α − γ`.
    Minus,
}

impl MirrorBranch {
    pub fn sign(self) -> f64 {
        match self {
            MirrorBranch::Plus => 1.0,
            MirrorBranch::Minus => -1.0,
        }
    }

    pub fn mirrored(self) -> Self {
        match self {
            MirrorBranch::Plus => MirrorBranch::Minus,
            MirrorBranch::Minus => MirrorBranch::Plus,
        }
    }
}

/// Momentum triple `(p, p′, k)` of a single emission event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionGeometry {
    pub p: Momentum3,
    pub p_prime: Momentum3,
    pub k: Momentum3,
    pub omega: f64,
    pub helicity: HelicityConfig,
}

impl EmissionGeometry {
    /// Validates `p = p′ + k` componentwise.
    pub fn new(
        p: Momentum3,
        p_prime: Momentum3,
        k: Momentum3,
        omega: f64,
        helicity: HelicityConfig,
    ) -> Result<Self, KinematicsError> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(KinematicsError::InvalidParameter { name: "omega", value: omega });
        }
        let residual = p - p_prime - k;
        let scale = p.norm().max(1.0);
        let worst = residual.x.abs().max(residual.y.abs()).max(residual.z.abs());
        if !(worst <= 1e-12 * scale) {
            return Err(KinematicsError::MomentumImbalance { residual: worst });
        }
        Ok(Self {
            p,
            p_prime,
            k,
            omega,
            helicity,
        })
    }

    /// Initial electron fixed by momentum balance, `p = p′ + k`.
    pub fn from_final(
        p_prime: Momentum3,
        k: Momentum3,
        omega: f64,
        helicity: HelicityConfig,
    ) -> Result<Self, KinematicsError> {
        Self::new(p_prime + k, p_prime, k, omega, helicity)
    }

    /// Photon of frequency `omega` and index `n` emitted along
    /// `(theta_k, phi_k)` by an electron of momentum `p`.
    pub fn from_emission(
        p: Momentum3,
        omega: f64,
        n: f64,
        theta_k: f64,
        phi_k: f64,
        helicity: HelicityConfig,
    ) -> Result<Self, KinematicsError> {
        let k = Vec3::from_spherical(n * omega, theta_k, phi_k);
        let p_prime = p - k;
        Self::from_final(p_prime, k, omega, helicity).map(|mut g| {
            g.p = p;
            g
        })
    }

    pub fn initial_energy(&self) -> f64 {
        energy(self.p)
    }

    pub fn final_energy(&self) -> f64 {
        energy(self.p_prime)
    }

    /// `ε(p) − ε(p′) − ω`, zero on shell.
    pub fn energy_mismatch(&self) -> f64 {
        self.initial_energy() - self.final_energy() - self.omega
    }

    pub fn electron_velocity(&self) -> Vec3 {
        velocity(self.p)
    }

    pub fn transverse_legs(&self) -> (f64, f64, f64) {
        (self.p.transverse(), self.p_prime.transverse(), self.k.transverse())
    }

    pub fn triangle_angles(&self) -> Result<TriangleAngles, KinematicsError> {
        let (a, b, c) = self.transverse_legs();
        triangle_angles(a, b, c)
    }

    pub fn check_index(&self, n: f64) -> Result<(), KinematicsError> {
        let k_norm = self.k.norm();
        let expected = n * self.omega;
        if (k_norm - expected).abs() > 1e-12 * expected.max(f64::MIN_POSITIVE) {
            return Err(KinematicsError::DispersionMismatch { k_norm, expected });
        }
        Ok(())
    }
}

/// Kinematics parametrised by transverse legs, as used for arrival-time scans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleSetup {
    pub p_perp: f64,
    pub pp_perp: f64,
    pub pp_z: f64,
    pub omega: f64,
    pub n: f64,
    pub theta_k: f64,
    pub phi_k: f64,
}

impl TriangleSetup {
    pub fn k_perp(&self) -> f64 {
        self.n * self.omega * self.theta_k.sin()
    }

    /// Places the triangle in the transverse plane and returns the geometry.
    pub fn geometry(
        &self,
        branch: MirrorBranch,
        helicity: HelicityConfig,
    ) -> Result<EmissionGeometry, KinematicsError> {
        let k = Vec3::from_spherical(self.n * self.omega, self.theta_k, self.phi_k);
        let angles = triangle_angles(self.p_perp, self.pp_perp, k.transverse())?;
        let s = branch.sign();
        let phi = self.phi_k - s * angles.gamma;
        let phi_prime = phi - s * angles.alpha;
        let (sin_pp, cos_pp) = phi_prime.sin_cos();
        let p_prime = Vec3::new(self.pp_perp * cos_pp, self.pp_perp * sin_pp, self.pp_z);
        EmissionGeometry::from_final(p_prime, k, self.omega, helicity)
    }
}
