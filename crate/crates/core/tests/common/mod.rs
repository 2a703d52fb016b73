//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use chr_core::{ElectronPacket, EmissionScenario, MediumModel, PreparedScenario, Vec3};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]` from Newton iteration on
/// the three-term recurrence.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let m = (order + 1) / 2;
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

pub struct FixedRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl FixedRule {
    pub fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Self { nodes, weights }
    }

    pub fn integrate<T, F>(&self, f: F, a: f64, b: f64) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
        F: Fn(f64) -> T,
    {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut sum = T::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum = sum + f(mid + half * x) * (w * half);
        }
        sum
    }

    pub fn composite<T, F>(&self, f: F, edges: &[f64]) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
        F: Fn(f64) -> T,
    {
        edges
            .windows(2)
            .fold(T::default(), |acc, w| acc + self.integrate(&f, w[0], w[1]))
    }
}

/// Complex integrand on the symmetric window, with the Gouy factor written
/// as a product of principal square roots.
pub fn complex_integrand(prepared: &PreparedScenario, r: Vec3, t: f64) -> Complex64 {
    let kernel = &prepared.kernel;
    let q = t * prepared.spread.inv_t_d;
    let s = t / prepared.spread.t_d_tilde;
    let exponent = kernel.complex_exponent(r, t).expect("exponent");
    let gouy = Complex64::new(1.0, q).sqrt() * Complex64::new(1.0, s).sqrt();
    let base = kernel.relative.norm() / (2.0 * kernel.sigma * kernel.sigma);
    (exponent + Complex64::new(0.0, t * kernel.energy_mismatch)).exp() / (gouy * base)
}

/// Brute-force `∫_{-t_out}^{t_out}` of [`complex_integrand`] on uniform
/// panels fine enough for both the phase and the spreading scales.
pub fn symmetric_oracle(prepared: &PreparedScenario, r: Vec3) -> Complex64 {
    let t_out = prepared.t_out;
    let samples = 20_000;
    let mut travel = 0.0;
    let mut previous = complex_integrand(prepared, r, 0.0).arg();
    for i in 1..=samples {
        let t = t_out * i as f64 / samples as f64;
        let phase = complex_integrand(prepared, r, t).arg();
        let mut step = phase - previous;
        step -= (2.0 * PI) * (step / (2.0 * PI)).round();
        travel += step.abs();
        previous = phase;
    }
    let scale = prepared
        .spread
        .t_d_tilde
        .abs()
        .min(1.0 / prepared.spread.inv_t_d.abs());
    let by_phase = (travel / 0.5).ceil();
    let by_scale = (4.0 * t_out / scale).ceil();
    let panels = by_phase.max(by_scale).max(64.0) as usize;
    let edges: Vec<f64> = (0..=2 * panels)
        .map(|i| -t_out + 2.0 * t_out * i as f64 / (2 * panels) as f64)
        .collect();
    FixedRule::new(16).composite(|t| complex_integrand(prepared, r, t), &edges)
}

pub fn figure_packet(beta: f64, sigma: f64) -> ElectronPacket {
    ElectronPacket::from_beta(beta, sigma, 0.0, 0.0).expect("packet")
}

/// Emission at the classical Cherenkov angle of `(beta, n)` scaled by `fraction`.
pub fn cherenkov_scenario(
    beta: f64,
    n: f64,
    omega: f64,
    sigma: f64,
    fraction: f64,
    t_out: f64,
) -> EmissionScenario {
    let theta = (1.0 / (beta * n)).acos() * fraction;
    EmissionScenario::new(
        figure_packet(beta, sigma),
        MediumModel::constant(n),
        omega,
        theta,
        PI / 2.0,
        t_out,
    )
    .expect("scenario")
}

/// Electron Compton time `ħ/(m_e c²)` in seconds.
pub fn compton_time_seconds() -> f64 {
    const HBAR_EV_S: f64 = 6.582_119_569e-16;
    HBAR_EV_S / chr_core::ELECTRON_MASS_EV
}
