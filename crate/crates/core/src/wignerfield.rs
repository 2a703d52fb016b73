//! Wigner function of the emitted photon: the reduced time integral,
//! pointwise values, parallel 2-D maps, momentum-offset scans, the
//! near-field snapshot of the electron packet and the momentum-marginal
//! weight.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::amplitudes::{helicity_amplitude, photon_summed_mod_squared, HelicityConfig, PhotonHelicity};
use crate::flags::Flags;
use crate::kinematics::{
    energy, satisfies_triangle_rules, ElectronPacket, EmissionGeometry, KinematicsError,
};
use crate::medium::{MediumError, MediumModel};
use crate::numerics::{integrate_partitioned, QuadratureError, QuadratureOptions, DEFAULT_PANEL_BUDGET};
use crate::observables::{EmissionKernel, ObservableError, SpreadTimes};
use crate::vec3::Vec3;

/// Map resolution used when none is given.
pub const DEFAULT_MAP_SAMPLES: usize = 128;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WignerError {
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Medium(#[from] MediumError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("invalid {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("snapshot mode requires a packet without a momentum-dependent phase")]
    NonGaussianPhase,
    #[error("no on-shell photon frequency in [{lo}, {hi}]")]
    OffShell { lo: f64, hi: f64 },
    #[error("map grid has no nodes")]
    EmptyGrid,
    #[error("worker pool: {0}")]
    WorkerPool(String),
}

/// How the final electron momentum `p′` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FinalElectron {
    /// `p′ = ⟨p⟩ − k`, so that `ΔP = 0`.
    Balanced,
    /// `p′ = ⟨p⟩ − k + offset`, so that `ΔP = offset`.
    Offset(Vec3),
    Explicit(Vec3),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HelicityTreatment {
    SumPhoton,
    Fixed(PhotonHelicity),
}

/// Physical input of one Wigner-function evaluation.
#[derive(Debug, Clone)]
pub struct EmissionScenario {
    pub packet: ElectronPacket,
    pub medium: MediumModel,
    pub omega: f64,
    pub theta_k: f64,
    pub phi_k: f64,
    pub final_electron: FinalElectron,
    /// Half-width of the emission window in Compton times.
    pub t_out: f64,
    /// Electron helicities; the photon helicity is set by `treatment`.
    pub helicity: HelicityConfig,
    pub treatment: HelicityTreatment,
}

impl EmissionScenario {
    pub fn new(
        packet: ElectronPacket,
        medium: MediumModel,
        omega: f64,
        theta_k: f64,
        phi_k: f64,
        t_out: f64,
    ) -> Result<Self, WignerError> {
        if !(t_out > 0.0) || !t_out.is_finite() {
            return Err(WignerError::InvalidParameter { name: "t_out", value: t_out });
        }
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(WignerError::InvalidParameter { name: "omega", value: omega });
        }
        Ok(Self {
            packet,
            medium,
            omega,
            theta_k,
            phi_k,
            final_electron: FinalElectron::Balanced,
            t_out,
            helicity: HelicityConfig::default(),
            treatment: HelicityTreatment::SumPhoton,
        })
    }

    pub fn with_final_electron(mut self, final_electron: FinalElectron) -> Self {
        self.final_electron = final_electron;
        self
    }

    pub fn with_helicity(mut self, helicity: HelicityConfig, treatment: HelicityTreatment) -> Self {
        self.helicity = helicity;
        self.treatment = treatment;
        self
    }

    pub fn with_t_out(mut self, t_out: f64) -> Self {
        self.t_out = t_out;
        self
    }

    pub fn photon_momentum(&self) -> Result<Vec3, WignerError> {
        let n = self.medium.index(self.omega)?.n;
        Ok(Vec3::from_spherical(n * self.omega, self.theta_k, self.phi_k))
    }

    /// Emission geometry with `p = p′ + k`.
    pub fn geometry(&self) -> Result<EmissionGeometry, WignerError> {
        let k = self.photon_momentum()?;
        let mean = self.packet.mean_momentum;
        let p_prime = match self.final_electron {
            FinalElectron::Balanced => mean - k,
            FinalElectron::Offset(offset) => mean - k + offset,
            FinalElectron::Explicit(p_prime) => p_prime,
        };
        Ok(EmissionGeometry::from_final(p_prime, k, self.omega, self.helicity)?)
    }

    /// `p′ + k − ⟨p⟩`.
    pub fn momentum_offset(&self) -> Result<Vec3, WignerError> {
        Ok(self.geometry()?.p - self.packet.mean_momentum)
    }

    pub fn prepare(&self) -> Result<PreparedScenario, WignerError> {
        PreparedScenario::new(self)
    }
}

fn amplitude_weight(geom: &EmissionGeometry, h: HelicityConfig, treatment: HelicityTreatment) -> f64 {
    match treatment {
        HelicityTreatment::SumPhoton => photon_summed_mod_squared(geom, h),
        HelicityTreatment::Fixed(lg) => helicity_amplitude(geom, h.with_photon(lg)).mod_squared,
    }
}

/// Scenario with everything independent of `R` evaluated once.
#[derive(Debug, Clone)]
pub struct PreparedScenario {
    pub kernel: EmissionKernel,
    pub spread: SpreadTimes,
    pub t_out: f64,
    /// Constant factor in front of the time integral.
    pub prefactor: f64,
    /// `∫₀^{t_out} dt′ / G(t′)`, the scale of the integral.
    pub envelope: f64,
    pub flags: Flags,
    pub options: QuadratureOptions,
    breakpoints: Vec<f64>,
}

impl PreparedScenario {
    pub fn new(scenario: &EmissionScenario) -> Result<Self, WignerError> {
        let geom = scenario.geometry()?;
        let kernel = EmissionKernel::new(&geom, &scenario.packet, &scenario.medium)?;
        let spread = kernel.spreading_times();
        let offset = geom.p - scenario.packet.mean_momentum;
        let sigma = scenario.packet.sigma;
        let n2 = kernel.n * kernel.n;
        let prefactor = (2.0 * PI.sqrt() / sigma).powi(3) * (4.0 * PI).sqrt()
            / ((2.0 * n2).powi(2) * 2.0 * kernel.epsilon_final * 2.0 * kernel.epsilon)
            * (1.0 + n2)
            * amplitude_weight(&geom, scenario.helicity, scenario.treatment)
            * (-offset.norm_sq() / (sigma * sigma)).exp();

        let breakpoints = time_breakpoints(&spread, kernel.energy_mismatch, scenario.t_out);
        let mut prepared = Self {
            kernel,
            spread,
            t_out: scenario.t_out,
            prefactor,
            envelope: 0.0,
            flags: kernel.flags,
            options: QuadratureOptions::new(1.0, 1e-10),
            breakpoints,
        };
        let envelope = integrate_partitioned(
            |t| 1.0 / prepared.overlap_modulus(t),
            &prepared.breakpoints,
            &QuadratureOptions::new(f64::MIN_POSITIVE, 1e-12),
        )?;
        prepared.envelope = envelope.value;
        prepared.options.abs_tol = 1e-10 * envelope.value;
        Ok(prepared)
    }

    /// Breakpoints of the `t′` partition used by [`PreparedScenario::evaluate`].
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn overlap_modulus(&self, t_prime: f64) -> f64 {
        let q = t_prime * self.spread.inv_t_d;
        let s = t_prime / self.spread.t_d_tilde;
        self.kernel.relative.norm() / (2.0 * self.kernel.sigma * self.kernel.sigma)
            * ((1.0 + q * q) * (1.0 + s * s)).powf(0.25)
    }

    /// `(|R × (u_p − u_k)|², (R · [u_p × u_k])²)`.
    fn projections(&self, r: Vec3) -> (f64, f64) {
        (r.cross(self.kernel.relative).norm_sq(), r.dot(self.kernel.cross).powi(2))
    }

    /// Envelope `e^{Re E}/G` and cosine argument at `t′`.
    fn envelope_and_phase(&self, transverse: f64, along: f64, t_prime: f64) -> (f64, f64) {
        let exponent = self.exponent(transverse, along, t_prime);
        (
            exponent.re.exp() / self.overlap_modulus(t_prime),
            self.phase_of(exponent, t_prime),
        )
    }

    fn integrand_projected(&self, transverse: f64, along: f64, t_prime: f64) -> f64 {
        let (envelope, phase) = self.envelope_and_phase(transverse, along, t_prime);
        envelope * phase.cos()
    }

    /// Partition for one point: the base panels are cut so that the cosine
    /// argument advances by at most `π` per sub-panel, and the leading part
    /// of the window where `Re E < −SUPPRESSION` is dropped.
    fn point_partition(&self, transverse: f64, along: f64) -> Vec<f64> {
        const SAMPLES: usize = 64;
        const SUPPRESSION: f64 = 45.0;
        let mut points = vec![0.0];
        let mut started = transverse == 0.0 && along == 0.0;
        for pair in self.breakpoints.windows(2) {
            let width = pair[1] - pair[0];
            let mut previous = self.envelope_and_phase(transverse, along, pair[0]).1;
            for j in 1..=SAMPLES {
                let t = pair[0] + width * j as f64 / SAMPLES as f64;
                let exponent = self.exponent(transverse, along, t);
                let phase = self.phase_of(exponent, t);
                if !started {
                    previous = phase;
                    if exponent.re > -SUPPRESSION {
                        started = true;
                        points[0] = pair[0] + width * (j - 1) as f64 / SAMPLES as f64;
                    }
                    continue;
                }
                let a = *points.last().expect("non-empty");
                let pieces = ((phase - previous).abs() / PI).ceil().max(1.0) as usize;
                let pieces = pieces.min(MAX_POINT_PANELS.saturating_sub(points.len()).max(1));
                for m in 1..=pieces {
                    points.push(a + (t - a) * m as f64 / pieces as f64);
                }
                previous = phase;
            }
        }
        if !started {
            points = vec![0.0, self.t_out];
        }
        points
    }

    fn exponent(&self, transverse: f64, along: f64, t_prime: f64) -> Complex64 {
        let k = &self.kernel;
        let eta0 = 0.5 / (k.sigma * k.sigma);
        let inv_eps = 1.0 / k.epsilon;
        let eta = Complex64::new(eta0, 0.25 * t_prime * (k.group_per_momentum - inv_eps));
        let chi = Complex64::new(0.0, 0.25 * t_prime * (inv_eps - k.longitudinal_curvature));
        let denom = eta * k.relative.norm_sq() + chi * k.cross.norm_sq();
        -(eta * transverse + chi * along) / (2.0 * eta * denom)
    }

    fn phase_of(&self, exponent: Complex64, t_prime: f64) -> f64 {
        let q = t_prime * self.spread.inv_t_d;
        let s = t_prime / self.spread.t_d_tilde;
        t_prime * self.kernel.energy_mismatch - 0.5 * (q.atan() + s.atan()) + exponent.im
    }

    /// Integrand of the cosine form at separation `R` and time `t′`.
    pub fn integrand(&self, r: Vec3, t_prime: f64) -> f64 {
        let (transverse, along) = self.projections(r);
        self.integrand_projected(transverse, along, t_prime)
    }

    /// `2∫₀^{t_out}` of the integrand, without the prefactor.
    pub fn time_integral(&self, r: Vec3) -> Result<PointValue, WignerError> {
        self.kernel.complex_exponent(r, 0.0)?;
        let (transverse, along) = self.projections(r);
        let partition = self.point_partition(transverse, along);
        let options = QuadratureOptions {
            panel_budget: self.options.panel_budget.max(2 * partition.len()),
            ..self.options
        };
        let result = integrate_partitioned(
            |t| self.integrand_projected(transverse, along, t),
            &partition,
            &options,
        )?;
        let mut flags = self.flags;
        flags.set_if(Flags::NON_CONVERGENCE, !result.converged);
        Ok(PointValue {
            value: 2.0 * result.value,
            error_estimate: 2.0 * result.error_estimate,
            flags,
        })
    }

    pub fn evaluate(&self, r: Vec3) -> Result<PointValue, WignerError> {
        let mut point = self.time_integral(r)?;
        point.value *= self.prefactor;
        point.error_estimate *= self.prefactor.abs();
        Ok(point)
    }

    /// Correlation radius along `direction` at `t′`; infinite on the Mach cone.
    pub fn correlation_radius(&self, direction: Vec3, t_prime: f64) -> Result<f64, WignerError> {
        let unit = direction.unit().ok_or(WignerError::InvalidParameter {
            name: "direction",
            value: 0.0,
        })?;
        Ok(self.kernel.correlation_geometry(unit, t_prime)?.r_eff)
    }

    /// Distance along `direction` at which the complex exponent reaches
    /// modulus one at `t′`. Unlike the real-part radius this stays finite
    /// where the real part alone stops confining the map.
    pub fn confinement_radius(&self, direction: Vec3, t_prime: f64) -> Result<f64, WignerError> {
        let unit = direction.unit().ok_or(WignerError::InvalidParameter {
            name: "direction",
            value: 0.0,
        })?;
        Ok(1.0 / self.kernel.complex_exponent(unit, t_prime)?.norm().sqrt())
    }

    /// Grid covering `±4` confinement radii at `t_out` along X and Y in the plane `z`.
    pub fn default_grid(&self, samples: usize, z: f64) -> Result<MapGrid, WignerError> {
        let fallback = self.kernel.transverse_size(self.t_out);
        let half = |axis: Vec3| -> Result<f64, WignerError> {
            let r = self.confinement_radius(axis, self.t_out)?;
            Ok(4.0 * if r.is_finite() { r } else { fallback })
        };
        let hx = half(Vec3::X)?;
        let hy = half(Vec3::Y)?;
        MapGrid::new((-hx, hx), (-hy, hy), samples, samples, z)
    }
}

/// Partition of `[0, t_out]`: a doubling ladder resolving the spreading
/// times, refined so no panel exceeds half a period of `t′ΔE`.
fn time_breakpoints(spread: &SpreadTimes, energy_mismatch: f64, t_out: f64) -> Vec<f64> {
    let scale = spread.t_d_tilde.abs().min(spread.inv_t_d.abs().recip());
    let mut ladder = vec![0.0];
    if scale.is_finite() && scale > 0.0 {
        let mut t = (scale / 16.0).max(t_out * 1e-12);
        while t < t_out {
            ladder.push(t);
            t *= 2.0;
        }
    }
    ladder.push(t_out);

    let rate = energy_mismatch.abs();
    let limit = DEFAULT_PANEL_BUDGET / 2;
    let mut points = Vec::with_capacity(ladder.len());
    points.push(0.0);
    for pair in ladder.windows(2) {
        let width = pair[1] - pair[0];
        let pieces = ((width * rate / PI).ceil() as usize).clamp(1, limit);
        for j in 1..=pieces {
            points.push(pair[0] + width * j as f64 / pieces as f64);
        }
    }
    points
}

/// Upper limit on the initial panels of one point; beyond it the sampled
/// intervals are kept whole and left to the adaptive refinement.
const MAX_POINT_PANELS: usize = 1 << 17;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointValue {
    pub value: f64,
    pub error_estimate: f64,
    pub flags: Flags,
}

pub fn integrand(scenario: &EmissionScenario, r: Vec3, t_prime: f64) -> Result<f64, WignerError> {
    if !(0.0..=scenario.t_out).contains(&t_prime) {
        return Err(WignerError::InvalidParameter { name: "t_prime", value: t_prime });
    }
    Ok(scenario.prepare()?.integrand(r, t_prime))
}

pub fn evaluate_point(scenario: &EmissionScenario, r: Vec3) -> Result<PointValue, WignerError> {
    scenario.prepare()?.evaluate(r)
}

/// Rectangular grid of `(X, Y)` nodes in the plane `Z = z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapGrid {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    pub z: f64,
}

impl MapGrid {
    pub fn new(
        x_range: (f64, f64),
        y_range: (f64, f64),
        nx: usize,
        ny: usize,
        z: f64,
    ) -> Result<Self, WignerError> {
        if nx == 0 || ny == 0 {
            return Err(WignerError::EmptyGrid);
        }
        for (name, (lo, hi)) in [("x range", x_range), ("y range", y_range)] {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(WignerError::InvalidParameter { name, value: hi - lo });
            }
        }
        Ok(Self { x_range, y_range, nx, ny, z })
    }

    fn coordinate(range: (f64, f64), count: usize, i: usize) -> f64 {
        if count == 1 {
            0.5 * (range.0 + range.1)
        } else {
            range.0 + (range.1 - range.0) * i as f64 / (count - 1) as f64
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        Self::coordinate(self.x_range, self.nx, i)
    }

    pub fn y(&self, j: usize) -> f64 {
        Self::coordinate(self.y_range, self.ny, j)
    }

    pub fn dx(&self) -> f64 {
        if self.nx > 1 {
            (self.x_range.1 - self.x_range.0) / (self.nx - 1) as f64
        } else {
            0.0
        }
    }

    pub fn dy(&self) -> f64 {
        if self.ny > 1 {
            (self.y_range.1 - self.y_range.0) / (self.ny - 1) as f64
        } else {
            0.0
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node position of flat index `idx` (row-major, `x` fastest).
    pub fn node(&self, idx: usize) -> Vec3 {
        Vec3::new(self.x(idx % self.nx), self.y(idx / self.nx), self.z)
    }

    /// Same extents with `factor` times the intervals per axis.
    pub fn refined(&self, factor: usize) -> Self {
        let scale = |n: usize| if n > 1 { (n - 1) * factor + 1 } else { 1 };
        Self {
            nx: scale(self.nx),
            ny: scale(self.ny),
            ..*self
        }
    }

    /// Flat indices of the one (odd) or two (even) central nodes per axis.
    pub fn central_nodes(&self) -> Vec<usize> {
        let centre = |n: usize| if n % 2 == 1 { vec![n / 2] } else { vec![n / 2 - 1, n / 2] };
        let mut nodes = Vec::new();
        for j in centre(self.ny) {
            for i in centre(self.nx) {
                nodes.push(j * self.nx + i);
            }
        }
        nodes
    }
}

/// Normalized map of Wigner-function values on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerMap {
    pub grid: MapGrid,
    /// Row-major values scaled to `[−1, 1]`.
    pub values: Vec<f64>,
    /// Maximum absolute raw value; zero when the map vanishes.
    pub scale: f64,
    pub errors: Vec<f64>,
    pub flags: Vec<Flags>,
    /// `key: value` lines written into the CSV header.
    pub metadata: Vec<(String, String)>,
}

impl WignerMap {
    fn from_points(grid: MapGrid, points: Vec<PointValue>) -> Self {
        let scale = points.iter().fold(0.0f64, |m, p| m.max(p.value.abs()));
        let norm = if scale > 0.0 { scale } else { 1.0 };
        Self {
            grid,
            values: points.iter().map(|p| p.value / norm).collect(),
            scale,
            errors: points.iter().map(|p| p.error_estimate / norm).collect(),
            flags: points.iter().map(|p| p.flags).collect(),
            metadata: Vec::new(),
        }
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    pub fn raw(&self, i: usize, j: usize) -> f64 {
        self.value(i, j) * self.scale
    }

    /// Mean normalized value over the central nodes.
    pub fn central_value(&self) -> f64 {
        let nodes = self.grid.central_nodes();
        nodes.iter().map(|&idx| self.values[idx]).sum::<f64>() / nodes.len() as f64
    }

    pub fn combined_flags(&self) -> Flags {
        self.flags.iter().fold(Flags::NONE, |acc, &f| acc | f)
    }

    /// Number of nodes carrying each individual flag.
    pub fn flag_counts(&self) -> Vec<(&'static str, usize)> {
        Flags::ALL
            .iter()
            .map(|&(flag, name)| (name, self.flags.iter().filter(|f| f.contains(flag)).count()))
            .collect()
    }

    pub fn with_metadata(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.push((key.into(), value.into()));
        self
    }

    /// CSV matrix, one row per `y`, with a `#`-prefixed header block.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for (key, value) in &self.metadata {
            writeln!(out, "# {key}: {value}")?;
        }
        writeln!(out, "# scale: {:e}", self.scale)?;
        writeln!(out, "# nx: {}", self.grid.nx)?;
        writeln!(out, "# ny: {}", self.grid.ny)?;
        writeln!(out, "# x_range: {:e} {:e}", self.grid.x_range.0, self.grid.x_range.1)?;
        writeln!(out, "# y_range: {:e} {:e}", self.grid.y_range.0, self.grid.y_range.1)?;
        writeln!(out, "# z: {:e}", self.grid.z)?;
        for (name, count) in self.flag_counts() {
            writeln!(out, "# flag {name}: {count}")?;
        }
        write!(out, "y\\x")?;
        for i in 0..self.grid.nx {
            write!(out, ",{:e}", self.grid.x(i))?;
        }
        writeln!(out)?;
        for j in 0..self.grid.ny {
            write!(out, "{:e}", self.grid.y(j))?;
            for i in 0..self.grid.nx {
                write!(out, ",{:e}", self.value(i, j))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn run_in_pool<T: Send>(
    workers: Option<usize>,
    job: impl FnOnce() -> T + Send,
) -> Result<T, WignerError> {
    match workers {
        Some(count) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(count.max(1))
                .build()
                .map_err(|e| WignerError::WorkerPool(e.to_string()))?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}

/// Evaluates every grid node in parallel; `workers = None` uses the global pool.
pub fn evaluate_map(
    scenario: &EmissionScenario,
    grid: &MapGrid,
    workers: Option<usize>,
) -> Result<WignerMap, WignerError> {
    let prepared = scenario.prepare()?;
    evaluate_prepared_map(&prepared, grid, workers)
}

pub fn evaluate_prepared_map(
    prepared: &PreparedScenario,
    grid: &MapGrid,
    workers: Option<usize>,
) -> Result<WignerMap, WignerError> {
    if grid.is_empty() {
        return Err(WignerError::EmptyGrid);
    }
    let points = run_in_pool(workers, || {
        (0..grid.len())
            .into_par_iter()
            .map(|idx| prepared.evaluate(grid.node(idx)))
            .collect::<Result<Vec<_>, _>>()
    })??;
    Ok(WignerMap::from_points(*grid, points)
        .with_metadata("t_out", format!("{:e}", prepared.t_out))
        .with_metadata("prefactor", format!("{:e}", prepared.prefactor)))
}

/// Maps for final-electron offsets `ΔP = offset · direction` on a common grid.
pub fn delta_p_scan(
    scenario: &EmissionScenario,
    offsets: &[f64],
    direction: Vec3,
    grid: &MapGrid,
    workers: Option<usize>,
) -> Result<Vec<WignerMap>, WignerError> {
    let unit = direction.unit().ok_or(WignerError::InvalidParameter {
        name: "offset direction",
        value: 0.0,
    })?;
    offsets
        .iter()
        .map(|&offset| {
            let shifted = scenario
                .clone()
                .with_final_electron(FinalElectron::Offset(unit * offset));
            evaluate_map(&shifted, grid, workers)
                .map(|m| m.with_metadata("delta_p", format!("{offset:e}")))
        })
        .collect()
}

/// Column-integrated probability density of the free electron packet.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMap {
    pub grid: MapGrid,
    pub values: Vec<f64>,
    pub time: f64,
    /// Transverse width `σ⊥(t)` in Compton wavelengths.
    pub width: f64,
    /// In-plane position of the packet centre.
    pub centre: (f64, f64),
}

impl SnapshotMap {
    /// Riemann sum over the grid.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx() * self.grid.dy()
    }

    /// Node with the largest density.
    pub fn peak(&self) -> (f64, f64) {
        let idx = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
            .0;
        let node = self.grid.node(idx);
        (node.x, node.y)
    }
}

/// Electron diffraction time `γ/σ²` in the laboratory frame.
pub fn electron_spreading_time(packet: &ElectronPacket) -> f64 {
    packet.gamma() / (packet.sigma * packet.sigma)
}

/// Electron packet width `σ⊥(t)` for the free Gaussian.
pub fn electron_width(packet: &ElectronPacket, t: f64) -> f64 {
    let ratio = t / electron_spreading_time(packet);
    (1.0 + ratio * ratio).sqrt() / packet.sigma
}

pub fn near_field_snapshot(
    scenario: &EmissionScenario,
    grid: &MapGrid,
    t: f64,
) -> Result<SnapshotMap, WignerError> {
    let packet = &scenario.packet;
    if !packet.phase_model.is_flat() {
        return Err(WignerError::NonGaussianPhase);
    }
    if grid.is_empty() {
        return Err(WignerError::EmptyGrid);
    }
    let width = electron_width(packet, t);
    let shift = packet.velocity() * t;
    let norm = 1.0 / (PI * width * width);
    let values = (0..grid.len())
        .map(|idx| {
            let node = grid.node(idx);
            let d2 = (node.x - shift.x).powi(2) + (node.y - shift.y).powi(2);
            norm * (-d2 / (width * width)).exp()
        })
        .collect();
    Ok(SnapshotMap {
        grid: *grid,
        values,
        time: t,
        width,
        centre: (shift.x, shift.y),
    })
}

/// Photon frequency satisfying `ε(p) = ε(p − k(ω)) + ω` along the scenario's
/// emission direction, searched over the medium's frequency band.
pub fn on_shell_frequency(scenario: &EmissionScenario) -> Result<f64, WignerError> {
    let p = scenario.packet.mean_momentum;
    let eps = energy(p);
    let (dom_lo, dom_hi) = scenario.medium.domain();
    let lo = dom_lo.max(1e-12 * eps);
    let hi = dom_hi.min(eps - 1.0);
    if !(hi > lo) {
        return Err(WignerError::OffShell { lo, hi });
    }
    let direction = Vec3::from_spherical(1.0, scenario.theta_k, scenario.phi_k);
    let mismatch = |omega: f64| -> f64 {
        match scenario.medium.index(omega) {
            Ok(v) => eps - energy(p - direction * (v.n * omega)) - omega,
            Err(_) => f64::NAN,
        }
    };
    let samples = 400;
    let ratio = (hi / lo).powf(1.0 / samples as f64);
    let mut a = lo;
    let mut fa = mismatch(a);
    for _ in 0..samples {
        let b = (a * ratio).min(hi);
        let fb = mismatch(b);
        if fa > 0.0 && fb <= 0.0 {
            let root = crate::numerics::find_root(mismatch, a, b, 1e-15 * b)
                .map_err(|_| WignerError::OffShell { lo, hi })?;
            return Ok(root);
        }
        a = b;
        fa = fb;
    }
    Err(WignerError::OffShell { lo, hi })
}

/// Relative spectral-angular weight of the on-shell emission, independent
/// of all phases. Zero when the transverse momenta cannot close.
pub fn momentum_marginal_weight(scenario: &EmissionScenario) -> Result<f64, WignerError> {
    let omega = on_shell_frequency(scenario)?;
    let on_shell = EmissionScenario {
        omega,
        ..scenario.clone()
    };
    let geom = on_shell.geometry()?;
    let (a, b, c) = geom.transverse_legs();
    if !satisfies_triangle_rules(a, b, c) {
        return Ok(0.0);
    }
    let n = on_shell.medium.index(omega)?.n;
    let n2 = n * n;
    let weight = amplitude_weight(&geom, on_shell.helicity, on_shell.treatment);
    Ok(omega / (2.0 * n2) * (2.0 * PI).powi(2) * 4.0 * PI
        / (2.0 * omega * n2 * 2.0 * geom.initial_energy() * 2.0 * geom.final_energy())
        * weight)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig10(t_out: f64) -> EmissionScenario {
        let packet = ElectronPacket::from_beta(0.99, 1e-2, 0.0, 0.0).unwrap();
        let theta = (1.0f64 / (0.99 * 1.4)).acos();
        EmissionScenario::new(packet, MediumModel::constant(1.4), 1e-5, theta, PI / 2.0, t_out).unwrap()
    }

    #[test]
    fn integrand_at_origin_time() {
        let s = fig10(1e6);
        let prepared = s.prepare().unwrap();
        let r = Vec3::new(30.0, -20.0, 0.0);
        let cg = prepared.kernel.correlation_geometry(r, 0.0).unwrap();
        let expected = (-r.norm_sq() / cg.r_eff.powi(2)).exp() / prepared.overlap_modulus(0.0);
        assert!((prepared.integrand(r, 0.0) / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mach_direction_integrand_independent_of_distance() {
        let prepared = fig10(1e6).prepare().unwrap();
        let dir = prepared.kernel.u_k - prepared.kernel.u_p;
        for t in [0.0, 1e4, 5e5] {
            let a = prepared.integrand(dir * 10.0, t);
            let b = prepared.integrand(dir * 1e4, t);
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
        }
    }

    #[test]
    fn breakpoints_are_sorted_and_cover_window() {
        let prepared = fig10(3e6).prepare().unwrap();
        let bp = prepared.breakpoints();
        assert_eq!(bp[0], 0.0);
        assert_eq!(*bp.last().unwrap(), 3e6);
        assert!(bp.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn central_nodes_even_and_odd() {
        let g = MapGrid::new((-1.0, 1.0), (-1.0, 1.0), 4, 4, 0.0).unwrap();
        assert_eq!(g.central_nodes(), vec![5, 6, 9, 10]);
        let g = MapGrid::new((-1.0, 1.0), (-1.0, 1.0), 3, 3, 0.0).unwrap();
        assert_eq!(g.central_nodes(), vec![4]);
        assert_eq!(g.refined(2).nx, 5);
        assert!(matches!(
            MapGrid::new((0.0, 1.0), (0.0, 1.0), 0, 3, 0.0),
            Err(WignerError::EmptyGrid)
        ));
    }

    #[test]
    fn snapshot_rejects_phase() {
        let mut s = fig10(1e6);
        s.packet = s
            .packet
            .clone()
            .with_phase_model(crate::kinematics::PhaseModel::new(|p| p.x));
        let g = MapGrid::new((-1.0, 1.0), (-1.0, 1.0), 3, 3, 0.0).unwrap();
        assert_eq!(near_field_snapshot(&s, &g, 0.0), Err(WignerError::NonGaussianPhase));
    }

    #[test]
    fn on_shell_frequency_matches_closed_form() {
        let s = fig10(1e6).with_final_electron(FinalElectron::Balanced);
        let s = EmissionScenario { theta_k: 0.5, ..s };
        let omega = on_shell_frequency(&s).unwrap();
        let (n, p, eps) = (1.4f64, s.packet.mean_momentum.norm(), s.packet.energy());
        let expected = 2.0 * (n * p * 0.5f64.cos() - eps) / (n * n - 1.0);
        assert!((omega / expected - 1.0).abs() < 1e-9, "{omega} {expected}");
    }
}
