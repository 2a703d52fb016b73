use chr_core::kinematics::cherenkov_angle_classical;
use chr_core::observables::{
    arrival_phase_shift, gouy_phase, gouy_rate, singular_angles, spreading_times,
};
use chr_core::{
    ElectronPacket, EmissionKernel, HelicityConfig, MediumModel, MirrorBranch, ObservableError,
    SpreadTimes, TriangleSetup, Vec3,
};
use proptest::prelude::*;

fn kernel(beta: f64, n: f64, omega: f64, sigma: f64, theta_k: f64) -> EmissionKernel {
    let packet = ElectronPacket::from_beta(beta, sigma, 0.0, 0.0).unwrap();
    EmissionKernel::for_emission(&packet, &MediumModel::constant(n), omega, theta_k, 0.0).unwrap()
}

#[test]
fn inverse_spreading_time_has_two_zeros_above_threshold() {
    let (beta, n, omega) = (0.99, 1.7, 1e-5);
    let samples = 4000;
    let theta = |i: usize| std::f64::consts::PI * (i as f64 + 0.5) / samples as f64;
    let values: Vec<f64> = (0..samples)
        .map(|i| kernel(beta, n, omega, 1e-4, theta(i)).spreading_times().inv_t_d)
        .collect();
    let changes = values.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    assert_eq!(changes, 2);

    let eps = ElectronPacket::from_beta(beta, 1e-4, 0.0, 0.0).unwrap().energy();
    let roots = singular_angles(beta, n, omega, eps).unwrap();
    let classical = cherenkov_angle_classical(beta, n).unwrap();
    assert!(roots.theta_lo < classical && classical < roots.theta_hi);
}

#[test]
fn below_threshold_spreading_time_keeps_its_sign() {
    let values: Vec<f64> = (1..400)
        .map(|i| kernel(0.6, 1.5, 1e-5, 1e-4, i as f64 * 0.0078).spreading_times().inv_t_d)
        .collect();
    assert!(values.iter().all(|v| v.signum() == values[0].signum()));
    let eps = ElectronPacket::from_beta(0.6, 1e-4, 0.0, 0.0).unwrap().energy();
    assert!(matches!(
        singular_angles(0.6, 1.5, 1e-5, eps),
        Err(ObservableError::NoSingularAngles { .. })
    ));
}

#[test]
fn spreading_time_is_extremal_at_the_cherenkov_angle() {
    let (beta, n) = (0.99, 1.4);
    let classical = cherenkov_angle_classical(beta, n).unwrap();
    let t_d = |theta: f64| kernel(beta, n, 1e-5, 1e-5, theta).spreading_times().t_d();
    let h = 1e-4;
    let slope = (t_d(classical + h) - t_d(classical - h)) / (2.0 * h);
    let curvature = (t_d(classical + h) - 2.0 * t_d(classical) + t_d(classical - h)) / (h * h);
    assert!((slope / curvature).abs() < 1e-6);
}

#[test]
fn flash_duration_identity() {
    for &theta in &[0.3, 0.9, 1.6, 2.4] {
        let k = kernel(0.95, 1.5, 1e-6, 1e-5, theta);
        for &t in &[0.0, 1e5, 3e7] {
            let stats = k.flash_stats(Vec3::ZERO, t, Vec3::ZERO).unwrap();
            let lhs = stats.sigma_t.powi(2) * k.cross.norm_sq() / k.relative.norm_sq();
            let rhs = k.transverse_size(t).powi(2) / 2.0;
            assert!((lhs - rhs).abs() < 1e-12 * rhs);
        }
    }
}

#[test]
fn flash_duration_exceeds_shift_in_fast_scan() {
    let h = HelicityConfig::default();
    let medium = MediumModel::constant(1.5);
    for i in 1..180 {
        let setup = TriangleSetup {
            p_perp: 1e-5,
            pp_perp: 0.99e-5,
            pp_z: 0.99 * 0.999,
            omega: 1e-6,
            n: 1.5,
            theta_k: (i as f64).to_radians(),
            phi_k: 0.0,
        };
        let Ok(geom) = setup.geometry(MirrorBranch::Plus, h) else { continue };
        let packet = ElectronPacket::new(geom.p, 1e-5).unwrap();
        let kernel = EmissionKernel::new(&geom, &packet, &medium).unwrap();
        let stats = kernel
            .flash_stats(Vec3::ZERO, 0.0, arrival_phase_shift(&geom, &packet).unwrap())
            .unwrap();
        assert!(stats.sigma_t >= stats.delta_t.abs(), "{i} deg");
    }
}

#[test]
fn mirror_branches_shift_in_opposite_directions() {
    let h = HelicityConfig::default();
    let medium = MediumModel::constant(1.5);
    let setup = TriangleSetup {
        p_perp: 1e-5,
        pp_perp: 0.99e-5,
        pp_z: 0.63,
        omega: 1e-6,
        n: 1.5,
        theta_k: 20f64.to_radians(),
        phi_k: 0.0,
    };
    let shift = |branch| {
        let geom = setup.geometry(branch, h).unwrap();
        let packet = ElectronPacket::new(geom.p, 1e-5).unwrap();
        let kernel = EmissionKernel::new(&geom, &packet, &medium).unwrap();
        kernel
            .flash_stats(Vec3::ZERO, 0.0, arrival_phase_shift(&geom, &packet).unwrap())
            .unwrap()
            .delta_t
    };
    let (plus, minus) = (shift(MirrorBranch::Plus), shift(MirrorBranch::Minus));
    assert!(plus != 0.0);
    assert!((plus + minus).abs() <= 1e-10 * plus.abs());
}

#[test]
fn spreading_times_wrapper_agrees_with_kernel() {
    let packet = ElectronPacket::from_beta(0.9, 1e-5, 0.0, 0.0).unwrap();
    let medium = MediumModel::constant(1.6);
    let k = EmissionKernel::for_emission(&packet, &medium, 1e-6, 0.7, 0.2).unwrap();
    let geom = chr_core::EmissionGeometry::from_emission(packet.mean_momentum, 1e-6, 1.6, 0.7, 0.2, HelicityConfig::default()).unwrap();
    assert_eq!(spreading_times(&geom, &packet, &medium).unwrap(), k.spreading_times());
}

proptest! {
    #[test]
    fn gouy_phase_is_odd(t in -1e9f64..1e9, inv in -1e-3f64..1e-3, tilde in 1e2f64..1e8, negative in any::<bool>()) {
        let spread = SpreadTimes {
            inv_t_d: inv,
            t_d_tilde: if negative { -tilde } else { tilde },
            inv_tau_d_sq: 0.0,
            dispersive: false,
        };
        prop_assert_eq!(gouy_phase(-t, &spread), -gouy_phase(t, &spread));
        prop_assert_eq!(gouy_rate(-t, &spread), gouy_rate(t, &spread));
    }
}
