//! Closed-form phase-space observables of the emitted photon: spreading
//! times, Gouy phase, correlation radii, flash duration and arrival time.
//!
//! All quantities derive from an [`EmissionKernel`], which freezes the
//! velocities and dispersion coefficients of one emission geometry.
//! Times are in Compton times `t_c`, lengths in Compton wavelengths `λ_c`.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use thiserror::Error;

use crate::amplitudes::{phase_gradient, AmplitudeError, HelicityConfig};
use crate::flags::Flags;
use crate::kinematics::{cherenkov_angle_classical, ElectronPacket, EmissionGeometry, KinematicsError};
use crate::medium::{DispersionParams, MediumError, MediumModel, WEAK_DISPERSION_THRESHOLD};
use crate::vec3::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObservableError {
    #[error(transparent)]
    Medium(#[from] MediumError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Amplitude(#[from] AmplitudeError),
    #[error("electron and photon velocities coincide: |u_p − u_k| = {gap}")]
    MachConeDegenerate { gap: f64 },
    #[error("electron and photon velocities are collinear; the flash has no finite duration")]
    CollinearVelocities,
    #[error("no singular angles: beta * n = {beta_n}")]
    NoSingularAngles { beta_n: f64 },
    #[error("invalid {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

/// Velocities and dispersion coefficients of one emission geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionKernel {
    pub u_p: Vec3,
    pub u_k: Vec3,
    /// `u_p − u_k`.
    pub relative: Vec3,
    /// `u_p × u_k`.
    pub cross: Vec3,
    pub epsilon: f64,
    pub epsilon_final: f64,
    pub omega: f64,
    pub n: f64,
    pub sigma: f64,
    /// `|u_k| / |k|`, equal to `1/(n²ω)` without dispersion.
    pub group_per_momentum: f64,
    /// `ξ |u_k| / |k|`, equal to `1/ω` without dispersion.
    pub longitudinal_curvature: f64,
    /// `ε(p) − ε(p′) − ω`.
    pub energy_mismatch: f64,
    pub dispersion: DispersionParams,
    pub dispersive: bool,
    pub flags: Flags,
}

impl EmissionKernel {
    pub fn new(
        geom: &EmissionGeometry,
        packet: &ElectronPacket,
        medium: &MediumModel,
    ) -> Result<Self, ObservableError> {
        Self::with_threshold(geom, packet, medium, WEAK_DISPERSION_THRESHOLD)
    }

    /// Same as [`EmissionKernel::new`] with a custom weak-dispersion bound;
    /// a threshold of zero forces the dispersive formulas.
    pub fn with_threshold(
        geom: &EmissionGeometry,
        packet: &ElectronPacket,
        medium: &MediumModel,
        threshold: f64,
    ) -> Result<Self, ObservableError> {
        let omega = geom.omega;
        let index = medium.index(omega)?;
        let n = index.n;
        geom.check_index(n)?;
        let dispersion = medium.dispersion_params(omega)?;
        let dispersive =
            !(dispersion.d_param.abs() < threshold && dispersion.e_param.abs() < threshold);
        let k_dir = geom.k.unit().ok_or(ObservableError::InvalidParameter {
            name: "photon momentum",
            value: 0.0,
        })?;

        let (u_k, group_per_momentum, longitudinal_curvature) = if dispersive {
            let u_k = medium.group_velocity(k_dir, omega)?;
            let per_k = u_k.norm() / geom.k.norm();
            let xi = medium.omega_hessian_factor(omega)?;
            (u_k, per_k, xi * per_k)
        } else {
            (k_dir / n, 1.0 / (n * n * omega), 1.0 / omega)
        };

        let u_p = geom.electron_velocity();
        let relative = u_p - u_k;
        let sigma = packet.sigma;
        let gamma = geom.initial_energy();

        let mut flags = Flags::NONE;
        flags.set_if(Flags::SMALL_ANGLE, u_p.cross(k_dir).norm().atan2(u_p.dot(k_dir)) < 1.0 / gamma);
        flags.set_if(Flags::TURNING_POINT, relative.norm() < 10.0 * sigma);
        flags.set_if(Flags::WIDE_PACKET, packet.paraxial_warning());

        let kernel = Self {
            u_p,
            u_k,
            relative,
            cross: u_p.cross(u_k),
            epsilon: gamma,
            epsilon_final: geom.final_energy(),
            omega,
            n,
            sigma,
            group_per_momentum,
            longitudinal_curvature,
            energy_mismatch: geom.energy_mismatch(),
            dispersion,
            dispersive,
            flags,
        };
        let mut kernel = kernel;
        kernel
            .flags
            .set_if(Flags::EXOTIC_DISPERSION, dispersive && kernel.spreading_times().t_d_tilde < 0.0);
        Ok(kernel)
    }

    /// Kernel for a photon emitted along `(theta_k, phi_k)` by the packet's
    /// mean momentum, with the final electron fixed by momentum balance.
    pub fn for_emission(
        packet: &ElectronPacket,
        medium: &MediumModel,
        omega: f64,
        theta_k: f64,
        phi_k: f64,
    ) -> Result<Self, ObservableError> {
        let n = medium.index(omega)?.n;
        let geom = EmissionGeometry::from_emission(
            packet.mean_momentum,
            omega,
            n,
            theta_k,
            phi_k,
            HelicityConfig::default(),
        )?;
        Self::new(&geom, packet, medium)
    }

    /// Angle between the electron and photon velocities.
    pub fn emission_angle(&self) -> f64 {
        self.cross.norm().atan2(self.u_p.dot(self.u_k))
    }

    pub fn spreading_times(&self) -> SpreadTimes {
        if self.dispersive {
            self.dispersive_spreading_times()
        } else {
            self.weak_spreading_times()
        }
    }

    /// Spreading times from the non-dispersive closed form. The combination
    /// `1/n² − [u_p×u_k]²/(u_p−u_k)²` is evaluated as `(u_p·k̂ − 1/n)²/(n²(u_p−u_k)²)`,
    /// which stays accurate at the Cherenkov angle.
    pub fn weak_spreading_times(&self) -> SpreadTimes {
        let (eps, omega, n, s2) = (self.epsilon, self.omega, self.n, self.sigma * self.sigma);
        let w2 = self.relative.norm_sq();
        let ratio = self.cross.norm_sq() / w2;
        let detuning = self.u_p.dot(self.u_k) * n - 1.0 / n;
        let inv_t_d =
            0.5 * s2 * (detuning * detuning / (n * n * w2) / omega - (1.0 - ratio) / eps);
        let t_d_tilde = (2.0 / s2) * omega * n * n / (1.0 - n * n * omega / eps);
        let inv_tau_d_sq = 0.5 * s2 * (1.0 / eps - 1.0 / omega) * (inv_t_d + 1.0 / t_d_tilde);
        SpreadTimes {
            inv_t_d,
            t_d_tilde,
            inv_tau_d_sq,
            dispersive: false,
        }
    }

    /// Spreading times with the photon group velocity and `ξ` of the medium.
    pub fn dispersive_spreading_times(&self) -> SpreadTimes {
        let s2 = self.sigma * self.sigma;
        let inv_eps = 1.0 / self.epsilon;
        let ratio = self.cross.norm_sq() / self.relative.norm_sq();
        let inv_t_d = 0.5
            * s2
            * ((self.group_per_momentum - inv_eps) + (inv_eps - self.longitudinal_curvature) * ratio);
        let t_d_tilde = (2.0 / s2) / (self.group_per_momentum - inv_eps);
        let inv_tau_d_sq =
            0.5 * s2 * (inv_eps - self.longitudinal_curvature) * (inv_t_d + 1.0 / t_d_tilde);
        SpreadTimes {
            inv_t_d,
            t_d_tilde,
            inv_tau_d_sq,
            dispersive: true,
        }
    }

    pub fn eta_chi(&self) -> EtaChi {
        let inv_eps = 1.0 / self.epsilon;
        EtaChi {
            eta0: 0.5 / (self.sigma * self.sigma),
            eta_rate: 0.25 * (self.group_per_momentum - inv_eps),
            chi_rate: 0.25 * (inv_eps - self.longitudinal_curvature),
        }
    }

    /// `G(t′)`, the modulus of the packet-overlap determinant factor.
    pub fn overlap_modulus(&self, t_prime: f64) -> f64 {
        let st = self.spreading_times();
        let a = t_prime * st.inv_t_d;
        let b = t_prime / st.t_d_tilde;
        self.relative.norm() / (2.0 * self.sigma * self.sigma)
            * ((1.0 + a * a) * (1.0 + b * b)).powf(0.25)
    }

    /// Transverse packet size `σ⊥(t′)`.
    pub fn transverse_size(&self, t_prime: f64) -> f64 {
        let a = t_prime * self.spreading_times().inv_t_d;
        (1.0 + a * a).sqrt() / self.sigma
    }

    fn check_mach(&self) -> Result<(), ObservableError> {
        let gap = self.relative.norm();
        if gap < 1e-14 {
            return Err(ObservableError::MachConeDegenerate { gap });
        }
        Ok(())
    }

    /// Complex exponent of the coordinate dependence from the `η`, `χ`
    /// coefficients.
    pub fn complex_exponent(&self, r: Vec3, t_prime: f64) -> Result<Complex64, ObservableError> {
        self.check_mach()?;
        let ec = self.eta_chi();
        let eta = ec.eta(t_prime);
        let chi = ec.chi(t_prime);
        let transverse = r.cross(self.relative).norm_sq();
        let along = r.dot(self.cross).powi(2);
        let denom = eta * self.relative.norm_sq() + chi * self.cross.norm_sq();
        Ok(-(eta * transverse + chi * along) / (2.0 * eta * denom))
    }

    /// The same exponent from the explicit real/imaginary split in terms of
    /// the spreading times.
    pub fn split_exponent(&self, r: Vec3, t_prime: f64) -> Result<Complex64, ObservableError> {
        self.check_mach()?;
        let st = self.spreading_times();
        let w2 = self.relative.norm_sq();
        let transverse = r.cross(self.relative).norm_sq() / w2;
        let along = r.dot(self.cross).powi(2) / w2;
        let s = t_prime / st.t_d_tilde;
        let inv_size_sq = 1.0 / self.transverse_size(t_prime).powi(2);
        let t2 = t_prime * t_prime;
        let re = -inv_size_sq * (transverse + t2 * st.inv_tau_d_sq / (1.0 + s * s) * along);
        let curvature = 0.5 * self.sigma * self.sigma * (1.0 / self.epsilon - self.longitudinal_curvature);
        let im = t_prime
            * inv_size_sq
            * (st.inv_t_d * transverse
                - curvature * (1.0 - t2 * st.inv_t_d / st.t_d_tilde) / (1.0 + s * s) * along);
        Ok(Complex64::new(re, im))
    }

    pub fn correlation_geometry(
        &self,
        r: Vec3,
        t_prime: f64,
    ) -> Result<CorrelationGeometry, ObservableError> {
        let exponent = self.complex_exponent(r, t_prime)?;
        let r2 = r.norm_sq();
        let (r_eff, r_im_sq_inverse) = if r2 > 0.0 {
            let r_eff = if exponent.re < 0.0 {
                (r2 / -exponent.re).sqrt()
            } else {
                f64::INFINITY
            };
            (r_eff, exponent.im / r2)
        } else {
            (f64::INFINITY, 0.0)
        };
        Ok(CorrelationGeometry {
            r,
            u_p: self.u_p,
            u_k: self.u_k,
            r_eff,
            r_im_sq_inverse,
            sigma_perp_t: self.transverse_size(t_prime),
            exponent,
        })
    }

    /// Unit vector `l₀` along which the detection probability peaks.
    pub fn peak_direction(&self) -> Result<Vec3, ObservableError> {
        let c2 = self.cross.norm_sq();
        if !(c2 > 1e-28 * self.u_p.norm_sq() * self.u_k.norm_sq()) {
            return Err(ObservableError::CollinearVelocities);
        }
        Ok(self.relative.cross(self.u_k.cross(self.u_p)) / c2)
    }

    /// Flash duration, arrival time and shift at position `r` and time `t′`.
    /// `phase_shift` is `(∂_p + ∂_k)ζ + ∂_pφ`.
    pub fn flash_stats(&self, r: Vec3, t_prime: f64, phase_shift: Vec3) -> Result<FlashStats, ObservableError> {
        let l_0 = self.peak_direction()?;
        let sigma_t =
            self.transverse_size(t_prime) / SQRT_2 * self.relative.norm() / self.cross.norm();
        Ok(FlashStats {
            sigma_t,
            t_0: (r + phase_shift).dot(l_0),
            delta_t: l_0.dot(phase_shift),
            l_0,
        })
    }

    pub fn formation_lengths(&self) -> FormationLengths {
        let st = self.spreading_times();
        let speed = self.u_p.norm();
        let inv_l_f = st.inv_t_d / speed;
        let cos_theta = self.emission_angle().cos();
        FormationLengths {
            l_f: 1.0 / inv_l_f,
            inv_l_f,
            inv_l_cl: 0.5 * self.omega * self.n * (cos_theta - 1.0 / (speed * self.n)).abs(),
        }
    }
}

/// Spreading times of the photon field; `1/t_d` is stored because `t_d`
/// diverges at the singular angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadTimes {
    pub inv_t_d: f64,
    pub t_d_tilde: f64,
    /// Signed `1/τ_d²`.
    pub inv_tau_d_sq: f64,
    pub dispersive: bool,
}

impl SpreadTimes {
    pub fn t_d(&self) -> f64 {
        1.0 / self.inv_t_d
    }

    pub fn tau_d(&self) -> f64 {
        1.0 / self.inv_tau_d_sq.abs().sqrt()
    }
}

/// `η(t′) = η₀ + i t′ η̇`, `χ(t′) = i t′ χ̇`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaChi {
    pub eta0: f64,
    pub eta_rate: f64,
    pub chi_rate: f64,
}

impl EtaChi {
    pub fn eta(&self, t_prime: f64) -> Complex64 {
        Complex64::new(self.eta0, t_prime * self.eta_rate)
    }

    pub fn chi(&self, t_prime: f64) -> Complex64 {
        Complex64::new(0.0, t_prime * self.chi_rate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationGeometry {
    pub r: Vec3,
    pub u_p: Vec3,
    pub u_k: Vec3,
    pub r_eff: f64,
    /// Signed `1/R_Im²`.
    pub r_im_sq_inverse: f64,
    pub sigma_perp_t: f64,
    pub exponent: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlashStats {
    pub sigma_t: f64,
    pub t_0: f64,
    pub delta_t: f64,
    pub l_0: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormationLengths {
    /// Signed; infinite where `1/t_d` vanishes.
    pub l_f: f64,
    pub inv_l_f: f64,
    /// Inverse classical formation length; zero at the Cherenkov angle.
    pub inv_l_cl: f64,
}

/// Sum of the two partial Gouy phases.
pub fn gouy_phase(t_prime: f64, spread: &SpreadTimes) -> f64 {
    (t_prime * spread.inv_t_d).atan() + (t_prime / spread.t_d_tilde).atan()
}

/// Time derivative of the Gouy phase.
pub fn gouy_rate(t_prime: f64, spread: &SpreadTimes) -> f64 {
    let a = spread.inv_t_d;
    let b = 1.0 / spread.t_d_tilde;
    a / (1.0 + (a * t_prime).powi(2)) + b / (1.0 + (b * t_prime).powi(2))
}

pub fn spreading_times(
    geom: &EmissionGeometry,
    packet: &ElectronPacket,
    medium: &MediumModel,
) -> Result<SpreadTimes, ObservableError> {
    Ok(EmissionKernel::new(geom, packet, medium)?.spreading_times())
}

pub fn correlation_geometry(
    geom: &EmissionGeometry,
    packet: &ElectronPacket,
    medium: &MediumModel,
    r: Vec3,
    t_prime: f64,
) -> Result<CorrelationGeometry, ObservableError> {
    EmissionKernel::new(geom, packet, medium)?.correlation_geometry(r, t_prime)
}

/// `(∂_p + ∂_k)ζ_fi + ∂_pφ` at the geometry's momenta.
pub fn arrival_phase_shift(
    geom: &EmissionGeometry,
    packet: &ElectronPacket,
) -> Result<Vec3, ObservableError> {
    let grad = phase_gradient(geom, geom.helicity)?;
    let step = 1e-3 * packet.sigma;
    Ok(grad.total() + packet.phase_model.gradient(geom.p, step))
}

/// Flash statistics including the amplitude-phase shift.
pub fn flash_stats(
    geom: &EmissionGeometry,
    packet: &ElectronPacket,
    medium: &MediumModel,
    r: Vec3,
    t_prime: f64,
) -> Result<FlashStats, ObservableError> {
    let kernel = EmissionKernel::new(geom, packet, medium)?;
    kernel.flash_stats(r, t_prime, arrival_phase_shift(geom, packet)?)
}

pub fn formation_lengths(
    geom: &EmissionGeometry,
    packet: &ElectronPacket,
    medium: &MediumModel,
) -> Result<FormationLengths, ObservableError> {
    Ok(EmissionKernel::new(geom, packet, medium)?.formation_lengths())
}

/// Photon angles at which `1/t_d` vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularAngles {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub width: f64,
    /// Small-recoil estimate `2√(ω/ε)√(n² − 1)`.
    pub width_estimate: f64,
}

pub fn singular_angles(
    beta: f64,
    n: f64,
    omega: f64,
    epsilon: f64,
) -> Result<SingularAngles, ObservableError> {
    let beta_n = beta * n;
    if !(beta_n > 1.0) {
        return Err(ObservableError::NoSingularAngles { beta_n });
    }
    let x = omega / epsilon;
    let n2 = n * n;
    let a = 1.0 - n2 * x;
    let disc = a * a - (1.0 - x) * (1.0 - n2 * x * (1.0 - beta * beta + n2 * beta * beta));
    if !(disc >= 0.0) {
        return Err(ObservableError::NoSingularAngles { beta_n });
    }
    let root = disc.sqrt();
    let scale = 1.0 / (beta_n * (1.0 - x));
    let cos_lo = scale * (a + root);
    let cos_hi = scale * (a - root);
    if !(-1.0..=1.0).contains(&cos_lo) || !(-1.0..=1.0).contains(&cos_hi) {
        return Err(ObservableError::NoSingularAngles { beta_n });
    }
    let (theta_lo, theta_hi) = (cos_lo.acos(), cos_hi.acos());
    Ok(SingularAngles {
        theta_lo,
        theta_hi,
        width: theta_hi - theta_lo,
        width_estimate: 2.0 * x.sqrt() * (n2 - 1.0).sqrt(),
    })
}

/// Classical Cherenkov angle of a packet in a medium, for convenience.
pub fn packet_cherenkov_angle(packet: &ElectronPacket, n: f64) -> Result<f64, ObservableError> {
    Ok(cherenkov_angle_classical(packet.beta(), n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::ElectronPacket;

    fn fig5_kernel(theta_k: f64) -> EmissionKernel {
        let packet = ElectronPacket::from_beta(0.99, 1e-4, 0.0, 0.0).unwrap();
        EmissionKernel::for_emission(&packet, &MediumModel::constant(1.7), 1e-5, theta_k, 0.3).unwrap()
    }

    #[test]
    fn spreading_time_at_cherenkov_angle() {
        let theta = (1.0f64 / (0.99 * 1.7)).acos();
        let k = fig5_kernel(theta);
        let st = k.spreading_times();
        let n2 = 1.7f64 * 1.7;
        let expected = -(2.0 * k.epsilon / 1e-8) * n2 / (n2 - 1.0);
        assert!(((st.t_d() - expected) / expected).abs() < 1e-10);
    }

    #[test]
    fn collinear_spreading_times_coincide() {
        let k = fig5_kernel(0.0);
        let st = k.spreading_times();
        let (w, n, e) = (1e-5, 1.7f64, k.epsilon);
        let expected = (2.0 / 1e-8) * w * n * n / (1.0 - n * n * w / e);
        assert!((st.t_d() / expected - 1.0).abs() < 1e-12);
        assert!((st.t_d_tilde / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gouy_phase_limits() {
        let st = SpreadTimes { inv_t_d: 1e-3, t_d_tilde: 50.0, inv_tau_d_sq: 0.0, dispersive: false };
        assert_eq!(gouy_phase(0.0, &st), 0.0);
        assert!((gouy_phase(1e14, &st) - std::f64::consts::PI).abs() < 1e-9);
        assert_eq!(gouy_phase(-3.0, &st), -gouy_phase(3.0, &st));
        let negative = SpreadTimes { inv_t_d: -1e-3, ..st };
        assert!((10.0 * negative.inv_t_d).atan() < 0.0);
    }

    #[test]
    fn singular_angles_need_threshold() {
        assert!(matches!(
            singular_angles(0.5, 1.5, 1e-6, 1.2),
            Err(ObservableError::NoSingularAngles { .. })
        ));
        let s = singular_angles(0.9, 1.5, 1e-12, 1.0 / (1.0f64 - 0.81).sqrt()).unwrap();
        let classical = (1.0f64 / 1.35).acos();
        assert!((s.theta_lo - classical).abs() < 1e-5 && (s.theta_hi - classical).abs() < 1e-5);
    }

    #[test]
    fn mach_direction_exponent_vanishes() {
        let k = fig5_kernel(0.6);
        let r = (k.u_k - k.u_p) * 3e5;
        for t in [0.0, 1e3, 1e7] {
            let e = k.complex_exponent(r, t).unwrap();
            assert!(e.norm() < 1e-12 * r.norm_sq() * 1e-8, "{e}");
        }
    }
}
