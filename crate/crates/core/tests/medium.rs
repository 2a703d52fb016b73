use chr_core::{AnalyticIndex, MediumError, MediumModel, TabulatedIndex, Vec3, ELECTRON_MASS_EV};
use proptest::prelude::*;

const ICE_LIKE: &str = "\
# omega_eV, n
0.35, 1.29
0.38, 1.21
0.40, 1.18
0.41, 1.32
0.43, 1.49
0.46, 1.40
0.50, 1.35
";

#[test]
fn table_nodes_are_reproduced_exactly() {
    let table = TabulatedIndex::parse(ICE_LIKE).unwrap();
    let medium = MediumModel::Tabulated(table);
    for line in ICE_LIKE.lines().skip(1) {
        let mut cols = line.split(',').map(|s| s.trim().parse::<f64>().unwrap());
        let (w, n) = (cols.next().unwrap(), cols.next().unwrap());
        let value = medium.index(w / ELECTRON_MASS_EV).unwrap();
        assert!((value.n - n).abs() < 1e-14, "{w} eV: {} vs {n}", value.n);
    }
}

#[test]
fn table_derivatives_are_continuous_across_knots() {
    let table = TabulatedIndex::parse(ICE_LIKE).unwrap();
    let knots = table.spline().knots().to_vec();
    let medium = MediumModel::Tabulated(table);
    for &x in &knots[1..knots.len() - 1] {
        let eps = 1e-9 * x;
        let (left, right) = (medium.index(x - eps).unwrap(), medium.index(x + eps).unwrap());
        let scale = left.dn.abs().max(1.0 / x);
        assert!((left.dn - right.dn).abs() < 1e-5 * scale);
        assert!((left.d2n - right.d2n).abs() < 1e-5 * left.d2n.abs().max(scale / x));
    }
}

#[test]
fn frequencies_outside_the_table_are_rejected() {
    let medium = MediumModel::Tabulated(TabulatedIndex::parse(ICE_LIKE).unwrap());
    assert!(matches!(
        medium.index(1.0 / ELECTRON_MASS_EV),
        Err(MediumError::OutOfDomain { .. })
    ));
}

#[test]
fn slow_light_group_velocity() {
    let omega = 2e-5;
    let medium = MediumModel::Analytic(AnalyticIndex::taylor(omega, 1.001, 5e6, 0.0));
    let u = medium.group_velocity(Vec3::Z, omega).unwrap();
    assert!((u.norm() - 1.0 / (1.001 * (1.0 + 5e6))).abs() < 1e-20);
    assert!(u.norm() < 2.1e-7);
}

proptest! {
    #[test]
    fn constant_medium_has_no_dispersion(n in 1.0f64..3.0, omega in 1e-9f64..1e-2) {
        let medium = MediumModel::constant(n);
        let d = medium.dispersion_params(omega).unwrap();
        prop_assert_eq!((d.d_param, d.e_param), (0.0, 0.0));
        prop_assert_eq!(medium.omega_hessian_factor(omega).unwrap(), n * n);
        let u = medium.group_velocity(Vec3::new(0.3, -0.2, 0.9), omega).unwrap();
        prop_assert!((u.norm() - 1.0 / n).abs() < 1e-15);
    }

    #[test]
    fn group_speed_below_light_when_index_exceeds_one(
        n in 1.0f64..2.0,
        d_param in -0.4f64..50.0,
        omega in 1e-7f64..1e-4,
    ) {
        prop_assume!(n * (1.0 + d_param) > 1.0);
        let medium = MediumModel::Analytic(AnalyticIndex::taylor(omega, n, d_param, 0.0));
        let u = medium.group_velocity(Vec3::X, omega).unwrap();
        prop_assert!(u.norm() < 1.0);
    }

    #[test]
    fn taylor_model_reports_its_parameters(
        n in 1.01f64..2.0,
        d_param in -20.0f64..20.0,
        e_param in -5.0f64..5.0,
        omega in 1e-7f64..1e-4,
    ) {
        let medium = MediumModel::Analytic(AnalyticIndex::taylor(omega, n, d_param, e_param));
        let d = medium.dispersion_params(omega).unwrap();
        prop_assert!((d.d_param - d_param).abs() < 1e-12 * d_param.abs().max(1.0));
        prop_assert!((d.e_param - e_param).abs() < 1e-12 * e_param.abs().max(1.0));
    }
}
