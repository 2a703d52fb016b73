mod common;

use chr_core::wignerfield::{evaluate_map, evaluate_prepared_map, near_field_snapshot};
use chr_core::{MapGrid, Vec3};
use common::{cherenkov_scenario, symmetric_oracle};
use proptest::prelude::*;

#[test]
fn oracle_imaginary_part_vanishes() {
    let scenario = cherenkov_scenario(0.99, 1.4, 1e-5, 1e-4, 0.97, 3e5);
    let prepared = scenario.prepare().unwrap();
    let radius = prepared.confinement_radius(Vec3::X, prepared.t_out).unwrap();
    for &(x, y, z) in &[(0.0, 0.0, 0.0), (0.3, -0.2, 0.1), (-0.7, 0.4, 0.5), (0.1, 0.9, -0.3)] {
        let r = Vec3::new(x, y, z) * radius;
        let oracle = symmetric_oracle(&prepared, r);
        assert!(oracle.im.abs() < 1e-10 * oracle.re.abs() + 1e-300, "{r:?}: {oracle}");
        let value = prepared.time_integral(r).unwrap().value;
        assert!((value - oracle.re).abs() < 1e-8 * oracle.re.abs().max(1e-3 * prepared.envelope));
    }
}

#[test]
fn map_is_linear_in_the_prefactor() {
    let scenario = cherenkov_scenario(0.99, 1.4, 1e-5, 1e-4, 1.0, 1e5);
    let prepared = scenario.prepare().unwrap();
    let grid = prepared.default_grid(9, 0.0).unwrap();
    let base = evaluate_prepared_map(&prepared, &grid, Some(2)).unwrap();
    let mut scaled = prepared.clone();
    scaled.prefactor *= 3.5;
    let tripled = evaluate_prepared_map(&scaled, &grid, Some(2)).unwrap();
    for (a, b) in base.values.iter().zip(&tripled.values) {
        assert!((a - b).abs() <= 4.0 * f64::EPSILON);
    }
    assert!((tripled.scale - 3.5 * base.scale).abs() <= 1e-15 * tripled.scale);
}

#[test]
fn values_decay_far_outside_the_correlation_radius() {
    let scenario = cherenkov_scenario(0.99, 1.4, 1e-5, 1e-4, 0.9, 1e5);
    let prepared = scenario.prepare().unwrap();
    let direction = Vec3::X;
    let widest = (0..=64)
        .map(|i| prepared.t_out * i as f64 / 64.0)
        .map(|t| prepared.correlation_radius(direction, t).unwrap())
        .fold(0.0f64, f64::max);
    assert!(widest.is_finite());
    let grid = prepared.default_grid(15, 0.0).unwrap();
    let map = evaluate_prepared_map(&prepared, &grid, None).unwrap();
    let far = prepared.evaluate(direction * (5.0 * widest)).unwrap().value;
    assert!(far.abs() / map.scale < 1e-5, "{}", far.abs() / map.scale);
}

#[test]
fn snapshot_mass_is_conserved() {
    let scenario = cherenkov_scenario(0.7, 1.5, 1e-5, 1e-3, 1.0, 1e5);
    let times = [0.0, 1e5, 1e6, 1e7];
    let masses: Vec<f64> = times
        .iter()
        .map(|&t| {
            let probe = MapGrid::new((-1.0, 1.0), (-1.0, 1.0), 1, 1, 0.0).unwrap();
            let width = near_field_snapshot(&scenario, &probe, t).unwrap().width;
            let half = 6.0 * width;
            let grid = MapGrid::new((-half, half), (-half, half), 121, 121, 0.0).unwrap();
            near_field_snapshot(&scenario, &grid, t).unwrap().mass()
        })
        .collect();
    for m in &masses {
        assert!((m - masses[0]).abs() < 1e-3, "{masses:?}");
    }
}

#[test]
fn perpendicular_emission_map_is_mirror_symmetric() {
    // With φ_k = π/2 both velocities lie in the y–z plane.
    let scenario = cherenkov_scenario(0.99, 1.4, 1e-5, 1e-4, 0.98, 2e5);
    let prepared = scenario.prepare().unwrap();
    let grid = prepared.default_grid(16, 0.0).unwrap();
    let map = evaluate_prepared_map(&prepared, &grid, None).unwrap();
    for j in 0..grid.ny {
        for i in 0..grid.nx / 2 {
            let mirror = grid.nx - 1 - i;
            assert!((map.value(i, j) - map.value(mirror, j)).abs() < 1e-6);
        }
    }
}

#[test]
fn csv_is_identical_for_any_worker_count() {
    let scenario = cherenkov_scenario(0.99, 1.4, 1e-5, 1e-4, 1.0, 1e5);
    let grid = scenario.prepare().unwrap().default_grid(12, 0.0).unwrap();
    let render = |workers| {
        let mut out = Vec::new();
        evaluate_map(&scenario, &grid, Some(workers)).unwrap().write_csv(&mut out).unwrap();
        out
    };
    let reference = render(1);
    for workers in [2, 4, 7] {
        assert_eq!(render(workers), reference);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn point_values_are_finite(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0, fraction in 0.95f64..1.05) {
        let scenario = cherenkov_scenario(0.99, 1.4, 1e-5, 1e-4, fraction, 1e5);
        let prepared = scenario.prepare().unwrap();
        let radius = prepared.confinement_radius(Vec3::Y, prepared.t_out).unwrap();
        let point = prepared.evaluate(Vec3::new(x, y, z) * radius).unwrap();
        prop_assert!(point.value.is_finite());
        prop_assert!(point.error_estimate >= 0.0);
    }
}
