//! Benchmark fixtures: a map scenario at the Cherenkov angle and a kinematic
//! triangle for the arrival-time shift.

use chr_core::kinematics::cherenkov_angle_classical;
use chr_core::{ElectronPacket, EmissionScenario, MediumModel, TriangleSetup};

/// `β = 0.99`, `n = 1.4`, `ω = σ = 1e-5`, photon azimuth `π/2`.
pub fn map_scenario(t_out: f64) -> EmissionScenario {
    let (beta, n) = (0.99, 1.4);
    let packet = ElectronPacket::from_beta(beta, 1e-5, 0.0, 0.0).expect("valid packet");
    let theta_k = cherenkov_angle_classical(beta, n).expect("above threshold");
    EmissionScenario::new(
        packet,
        MediumModel::constant(n),
        1e-5,
        theta_k,
        std::f64::consts::FRAC_PI_2,
        t_out,
    )
    .expect("valid scenario")
}

/// Fast-electron triangle with `p⊥ = 1e-5`, `p′⊥ = 0.99 p⊥`, photon at `theta_deg`.
pub fn shift_triangle(theta_deg: f64) -> TriangleSetup {
    TriangleSetup {
        p_perp: 1e-5,
        pp_perp: 0.99e-5,
        pp_z: 0.99 * 0.999,
        omega: 1e-6,
        n: 1.5,
        theta_k: theta_deg.to_radians(),
        phi_k: 0.0,
    }
}
