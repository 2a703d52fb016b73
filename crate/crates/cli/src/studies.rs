//! Study runners: build core inputs from a [`ScenarioConfig`], evaluate, and
//! write CSV (and optionally SVG) files.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use chr_core::kinematics::cherenkov_angle_classical;
use chr_core::observables::{arrival_phase_shift, singular_angles};
use chr_core::wignerfield::{delta_p_scan, electron_width, evaluate_prepared_map, near_field_snapshot};
use chr_core::{
    AnalyticIndex, ElectronHelicity, ElectronPacket, EmissionKernel, EmissionScenario, FinalElectron, Flags,
    HelicityConfig, HelicityTreatment, KinematicsError, MapGrid, MediumError, MediumModel, MirrorBranch,
    ObservableError, PhotonHelicity, TabulatedIndex, TableError, TriangleSetup, Vec3, WignerError, WignerMap,
};
use thiserror::Error;

use crate::config::{
    Axis, BranchChoice, FinalSpec, LongitudinalSpec, MediumSpec, PhotonChoice, ScenarioConfig, Study,
};
use crate::output::{format_number, Cell, Heatmap, LinePlot, Table};
use crate::units::{from_natural, Unit};

#[derive(Debug, Error)]
pub enum PhysicsError {
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error(transparent)]
    Wigner(#[from] WignerError),
    #[error(transparent)]
    Medium(#[from] MediumError),
    #[error(transparent)]
    Table(#[from] TableError),
}

#[derive(Debug, Error)]
pub enum StudyError {
    #[error("{study}: {source}")]
    Physics {
        study: Study,
        #[source]
        source: PhysicsError,
    },
    #[error("{study}: cannot write {path}: {source}")]
    Io {
        study: Study,
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    Csv,
    #[default]
    CsvSvg,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Worker threads for map evaluation; `None` uses the global pool.
    pub workers: Option<usize>,
    pub format: Format,
    /// Directory that relative medium table paths are resolved against.
    pub base_dir: PathBuf,
}

/// What a completed study produced.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub flags: Flags,
    pub rows: usize,
    pub omitted: usize,
}

impl RunReport {
    pub fn flagged(&self) -> bool {
        !self.flags.is_empty()
    }
}

/// Inputs shared by every study for one parameter point.
struct Point {
    packet: ElectronPacket,
    medium: MediumModel,
    theta_k: f64,
    phi_k: f64,
    helicity: HelicityConfig,
}

fn electron_helicity(h: f64) -> ElectronHelicity {
    if h > 0.0 {
        ElectronHelicity::Plus
    } else {
        ElectronHelicity::Minus
    }
}

fn helicity_config(cfg: &ScenarioConfig) -> HelicityConfig {
    let photon = match cfg.photon_helicity {
        PhotonChoice::Minus => PhotonHelicity::Minus,
        PhotonChoice::Plus | PhotonChoice::Sum => PhotonHelicity::Plus,
    };
    HelicityConfig::new(electron_helicity(cfg.electron_helicity), electron_helicity(cfg.final_helicity), photon)
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_owned()
    } else {
        base.join(path)
    }
}

fn build_medium(cfg: &ScenarioConfig, base: &Path) -> Result<MediumModel, PhysicsError> {
    Ok(match &cfg.medium {
        MediumSpec::Constant { n } => MediumModel::constant(*n),
        MediumSpec::Taylor { n, d, e, omega0 } => {
            MediumModel::Analytic(AnalyticIndex::taylor(omega0.unwrap_or(cfg.omega), *n, *d, *e))
        }
        MediumSpec::Table { path } => MediumModel::Tabulated(TabulatedIndex::load(resolve(base, path))?),
    })
}

fn build_point(cfg: &ScenarioConfig, medium: &MediumModel) -> Result<Point, PhysicsError> {
    let beta = cfg.speed.beta();
    let packet = ElectronPacket::from_beta(
        beta,
        cfg.sigma,
        cfg.electron_theta_deg.to_radians(),
        cfg.electron_phi_deg.to_radians(),
    )?
    .with_helicity(electron_helicity(cfg.electron_helicity));
    let n = medium.index(cfg.omega)?.n;
    let theta_k = match cfg.theta_deg {
        Some(deg) => deg.to_radians(),
        None => cfg.cherenkov_fraction * cherenkov_angle_classical(beta, n)?,
    };
    Ok(Point {
        packet,
        medium: medium.clone(),
        theta_k,
        phi_k: cfg.phi_deg.to_radians(),
        helicity: helicity_config(cfg),
    })
}

fn scenario(cfg: &ScenarioConfig, point: Point) -> Result<EmissionScenario, PhysicsError> {
    let treatment = match cfg.photon_helicity {
        PhotonChoice::Sum => HelicityTreatment::SumPhoton,
        PhotonChoice::Plus => HelicityTreatment::Fixed(PhotonHelicity::Plus),
        PhotonChoice::Minus => HelicityTreatment::Fixed(PhotonHelicity::Minus),
    };
    let final_electron = match cfg.final_electron {
        FinalSpec::Balanced => FinalElectron::Balanced,
        FinalSpec::Offset([x, y, z]) => FinalElectron::Offset(Vec3::new(x, y, z)),
        FinalSpec::Explicit([x, y, z]) => FinalElectron::Explicit(Vec3::new(x, y, z)),
    };
    // Snapshots ignore the window; any positive value is accepted.
    let t_out = cfg.t_out.unwrap_or(1.0);
    Ok(EmissionScenario::new(point.packet, point.medium, cfg.omega, point.theta_k, point.phi_k, t_out)?
        .with_final_electron(final_electron)
        .with_helicity(point.helicity, treatment))
}

fn axis_vector(axis: Axis) -> Vec3 {
    match axis {
        Axis::X => Vec3::X,
        Axis::Y => Vec3::Y,
        Axis::Z => Vec3::Z,
    }
}

fn flag_text(flags: Flags) -> Cell {
    Cell::Text(flags.to_string())
}

/// Result of one sweep row: cells, or a reason the row was skipped.
type RowResult = Result<(Vec<Cell>, Flags), PhysicsError>;

struct SweepTable {
    table: Table,
    x: Vec<f64>,
    x_label: String,
    flags: Flags,
    omitted: usize,
}

fn run_sweep(
    cfg: &ScenarioConfig,
    columns: &[&str],
    mut row: impl FnMut(&ScenarioConfig) -> RowResult,
) -> Result<SweepTable, StudyError> {
    let mut names: Vec<String> = Vec::new();
    let x_label = cfg.sweep.as_ref().map(|s| s.variable.clone());
    if let Some(label) = &x_label {
        names.push(label.clone());
    }
    names.extend(columns.iter().map(|c| (*c).to_owned()));
    let mut table = Table::new(names);
    table.note("study", cfg.study.name());
    let points: Vec<(Option<f64>, ScenarioConfig)> = match &cfg.sweep {
        Some(s) => s.values().into_iter().map(|v| (Some(v), cfg.with_value(&s.variable, v))).collect(),
        None => vec![(None, cfg.clone())],
    };
    let mut flags = Flags::NONE;
    let mut omitted = 0;
    let mut x = Vec::new();
    let mut first_error = None;
    for (value, point) in points {
        match row(&point) {
            Ok((cells, f)) => {
                flags |= f;
                let mut full = Vec::with_capacity(cells.len() + 1);
                if let Some(v) = value {
                    full.push(Cell::Number(v));
                    x.push(v);
                } else {
                    x.push(x.len() as f64);
                }
                full.extend(cells);
                table.push(full);
            }
            Err(e) => {
                omitted += 1;
                first_error.get_or_insert(e);
            }
        }
    }
    if table.rows.is_empty() {
        let source = first_error.expect("at least one point was evaluated");
        return Err(StudyError::Physics { study: cfg.study, source });
    }
    if omitted > 0 {
        table.note("omitted rows", omitted.to_string());
    }
    table.note("flags", flags.to_string());
    Ok(SweepTable {
        table,
        x,
        x_label: x_label.unwrap_or_else(|| "point".to_owned()),
        flags,
        omitted,
    })
}

fn physics(study: Study) -> impl Fn(PhysicsError) -> StudyError {
    move |source| StudyError::Physics { study, source }
}

struct Writer<'a> {
    study: Study,
    options: &'a RunOptions,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn write(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>) -> Result<(), StudyError> {
        let path = self.options.out_dir.join(name);
        let wrap = |source| StudyError::Io {
            study: self.study,
            path: path.clone(),
            source,
        };
        let file = fs::File::create(&path).map_err(wrap)?;
        let mut out = BufWriter::new(file);
        body(&mut out).and_then(|_| out.flush()).map_err(wrap)?;
        self.files.push(path);
        Ok(())
    }

    fn svg(&mut self, name: &str, svg: String) -> Result<(), StudyError> {
        if self.options.format == Format::CsvSvg {
            self.write(name, |out| out.write_all(svg.as_bytes()))?;
        }
        Ok(())
    }
}

/// Runs the configured study and writes its artifacts into `options.out_dir`.
pub fn run_study(cfg: &ScenarioConfig, options: &RunOptions) -> Result<RunReport, StudyError> {
    let study = cfg.study;
    fs::create_dir_all(&options.out_dir).map_err(|source| StudyError::Io {
        study,
        path: options.out_dir.clone(),
        source,
    })?;
    let mut writer = Writer {
        study,
        options,
        files: Vec::new(),
    };
    let stem = cfg.output_stem();
    let report = if study.is_map() {
        run_map_study(cfg, options, &mut writer, &stem)?
    } else {
        let (sweep, y_column, y_label) = run_table_study(cfg, options)?;
        writer.write(&format!("{stem}.csv"), |out| sweep.table.write_csv(out))?;
        if sweep.table.rows.len() > 1 {
            let ys = sweep.table.column(y_column).unwrap_or_default();
            let plot = LinePlot {
                title: study.name(),
                x_label: &sweep.x_label,
                y_label,
                x: &sweep.x,
                series: vec![(y_column, ys)],
            };
            writer.svg(&format!("{stem}.svg"), plot.to_svg())?;
        }
        RunReport {
            files: Vec::new(),
            flags: sweep.flags,
            rows: sweep.table.rows.len(),
            omitted: sweep.omitted,
        }
    };
    Ok(RunReport {
        files: writer.files,
        ..report
    })
}

/// One-dimensional studies: returns the table plus the column to plot.
fn run_table_study(
    cfg: &ScenarioConfig,
    options: &RunOptions,
) -> Result<(SweepTable, &'static str, &'static str), StudyError> {
    let study = cfg.study;
    let base = options.base_dir.as_path();
    let to = |v: f64, unit| from_natural(v, unit);
    match study {
        Study::SpreadingTime => {
            let columns = ["theta_k_deg", "t_d_tc", "t_d_ps", "inv_t_d", "t_d_tilde_ps", "flags"];
            let sweep = run_sweep(cfg, &columns, |c| {
                let medium = build_medium(c, base)?;
                let p = build_point(c, &medium)?;
                let kernel = EmissionKernel::for_emission(&p.packet, &p.medium, c.omega, p.theta_k, p.phi_k)?;
                let s = kernel.spreading_times();
                let cells = vec![
                    p.theta_k.to_degrees().into(),
                    s.t_d().into(),
                    to(s.t_d(), Unit::Picosecond).into(),
                    s.inv_t_d.into(),
                    to(s.t_d_tilde, Unit::Picosecond).into(),
                    flag_text(kernel.flags),
                ];
                Ok((cells, kernel.flags))
            })?;
            Ok((sweep, "inv_t_d", "1/t_d (1/t_c)"))
        }
        Study::SingularAngles => {
            let columns = [
                "theta_lo_deg",
                "theta_hi_deg",
                "width_deg",
                "width_estimate_deg",
                "theta_ch_deg",
            ];
            let sweep = run_sweep(cfg, &columns, |c| {
                let medium = build_medium(c, base)?;
                let beta = c.speed.beta();
                let n = medium.index(c.omega)?.n;
                let packet = ElectronPacket::from_beta(beta, c.sigma, 0.0, 0.0)?;
                let roots = singular_angles(beta, n, c.omega, packet.energy())?;
                let cells = vec![
                    roots.theta_lo.to_degrees().into(),
                    roots.theta_hi.to_degrees().into(),
                    roots.width.to_degrees().into(),
                    roots.width_estimate.to_degrees().into(),
                    cherenkov_angle_classical(beta, n)?.to_degrees().into(),
                ];
                Ok((cells, Flags::NONE))
            })?;
            Ok((sweep, "width_deg", "width (deg)"))
        }
        Study::CorrelationRadius => {
            let columns = ["theta_k_deg", "r_eff_lc", "r_eff_nm", "sigma_perp_lc", "sigma_perp_nm", "flags"];
            let sweep = run_sweep(cfg, &columns, |c| {
                let medium = build_medium(c, base)?;
                let p = build_point(c, &medium)?;
                let kernel = EmissionKernel::for_emission(&p.packet, &p.medium, c.omega, p.theta_k, p.phi_k)?;
                let direction = Vec3::from_spherical(
                    1.0,
                    c.correlation_theta_deg.to_radians(),
                    c.correlation_phi_deg.unwrap_or(c.phi_deg).to_radians(),
                );
                let g = kernel.correlation_geometry(direction, c.time)?;
                let cells = vec![
                    p.theta_k.to_degrees().into(),
                    g.r_eff.into(),
                    to(g.r_eff, Unit::Nanometre).into(),
                    g.sigma_perp_t.into(),
                    to(g.sigma_perp_t, Unit::Nanometre).into(),
                    flag_text(kernel.flags),
                ];
                Ok((cells, kernel.flags))
            })?;
            Ok((sweep, "r_eff_nm", "R_eff (nm)"))
        }
        Study::FlashDuration => {
            let columns = ["theta_k_deg", "sigma_t_tc", "sigma_t_fs", "sigma_perp_nm", "flags"];
            let sweep = run_sweep(cfg, &columns, |c| {
                let medium = build_medium(c, base)?;
                let p = build_point(c, &medium)?;
                let kernel = EmissionKernel::for_emission(&p.packet, &p.medium, c.omega, p.theta_k, p.phi_k)?;
                let stats = kernel.flash_stats(Vec3::ZERO, c.time, Vec3::ZERO)?;
                let cells = vec![
                    p.theta_k.to_degrees().into(),
                    stats.sigma_t.into(),
                    to(stats.sigma_t, Unit::Femtosecond).into(),
                    to(kernel.transverse_size(c.time), Unit::Nanometre).into(),
                    flag_text(kernel.flags),
                ];
                Ok((cells, kernel.flags))
            })?;
            Ok((sweep, "sigma_t_fs", "sigma_t (fs)"))
        }
        Study::ArrivalShift | Study::DispersionScan => {
            let columns = [
                "theta_k_deg",
                "n",
                "delta_t_tc",
                "delta_t_as",
                "delta_t_ps",
                "sigma_t_tc",
                "mirror_delta_t_tc",
                "dispersive",
                "flags",
            ];
            let sweep = run_sweep(cfg, &columns, |c| shift_row(c, base))?;
            Ok((sweep, "delta_t_tc", "Delta t (t_c)"))
        }
        Study::WignerMap | Study::DeltaPScan | Study::Snapshot => unreachable!("map studies are handled separately"),
    }
}

/// Arrival-time shift on the configured triangle. Rows where the configured
/// speed does not exceed the photon group speed, or with no valid triangle,
/// are skipped.
fn shift_row(c: &ScenarioConfig, base: &Path) -> RowResult {
    let triangle = c.triangle.expect("validated: triangle present");
    let medium = build_medium(c, base)?;
    let beta = c.speed.beta();
    let n = medium.index(c.omega)?.n;
    let theta_k = match c.theta_deg {
        Some(deg) => deg.to_radians(),
        None => c.cherenkov_fraction * cherenkov_angle_classical(beta, n)?,
    };
    // Electron faster than the photon group speed 1/(n|1 + D|).
    let d = medium.dispersion_params(c.omega)?.d_param;
    let reach = beta * n * (1.0 + d).abs();
    if reach <= 1.0 {
        return Err(KinematicsError::BelowThreshold { beta_n: reach }.into());
    }
    let pp_z = match triangle.pp_z {
        LongitudinalSpec::Absolute(v) => v,
        LongitudinalSpec::BetaFraction(f) => f * beta,
    };
    let setup = TriangleSetup {
        p_perp: triangle.p_perp,
        pp_perp: triangle.pp_ratio * triangle.p_perp,
        pp_z,
        omega: c.omega,
        n,
        theta_k,
        phi_k: c.phi_deg.to_radians(),
    };
    let h = helicity_config(c);
    let shift = |branch| -> Result<(f64, f64, Flags, bool), PhysicsError> {
        let geom = setup.geometry(branch, h)?;
        let packet = ElectronPacket::new(geom.p, c.sigma)?.with_helicity(h.lambda_e);
        let kernel = EmissionKernel::new(&geom, &packet, &medium)?;
        let stats = kernel.flash_stats(Vec3::ZERO, c.time, arrival_phase_shift(&geom, &packet)?)?;
        Ok((stats.delta_t, stats.sigma_t, kernel.flags, kernel.dispersive))
    };
    let primary_branch = match triangle.branch {
        BranchChoice::Minus => MirrorBranch::Minus,
        BranchChoice::Plus | BranchChoice::Both => MirrorBranch::Plus,
    };
    let (delta_t, sigma_t, flags, dispersive) = shift(primary_branch)?;
    let mirror = match triangle.branch {
        BranchChoice::Both => Cell::Number(shift(primary_branch.mirrored())?.0),
        _ => Cell::Text(String::new()),
    };
    let cells = vec![
        theta_k.to_degrees().into(),
        n.into(),
        delta_t.into(),
        from_natural(delta_t, Unit::Attosecond).into(),
        from_natural(delta_t, Unit::Picosecond).into(),
        sigma_t.into(),
        mirror,
        Cell::Text(dispersive.to_string()),
        flag_text(flags),
    ];
    Ok((cells, flags))
}

fn map_header(cfg: &ScenarioConfig, map: WignerMap) -> WignerMap {
    map.with_metadata("study", cfg.study.name())
        .with_metadata("beta", format_number(cfg.speed.beta()))
        .with_metadata("sigma", format_number(cfg.sigma))
        .with_metadata("omega", format_number(cfg.omega))
}

fn map_grid(cfg: &ScenarioConfig, fallback: impl FnOnce(usize, f64) -> Result<MapGrid, WignerError>) -> Result<MapGrid, WignerError> {
    let spec = cfg.grid.expect("validated: grid present");
    match spec.half_width {
        Some(h) => MapGrid::new((-h, h), (-h, h), spec.samples, spec.samples, spec.z),
        None => fallback(spec.samples, spec.z),
    }
}

fn map_svg(title: &str, map: &WignerMap) -> String {
    Heatmap {
        title,
        x_label: "x (lambda_c)",
        y_label: "y (lambda_c)",
        x_range: map.grid.x_range,
        y_range: map.grid.y_range,
        nx: map.grid.nx,
        ny: map.grid.ny,
        values: &map.values,
    }
    .to_svg()
}

fn run_map_study(
    cfg: &ScenarioConfig,
    options: &RunOptions,
    writer: &mut Writer,
    stem: &str,
) -> Result<RunReport, StudyError> {
    let study = cfg.study;
    let err = physics(study);
    let medium = build_medium(cfg, &options.base_dir).map_err(&err)?;
    let point = build_point(cfg, &medium).map_err(&err)?;
    let scenario = scenario(cfg, point).map_err(&err)?;
    match study {
        Study::WignerMap => {
            let prepared = scenario.prepare().map_err(|e| err(e.into()))?;
            let grid = map_grid(cfg, |n, z| prepared.default_grid(n, z)).map_err(|e| err(e.into()))?;
            let map = evaluate_prepared_map(&prepared, &grid, options.workers).map_err(|e| err(e.into()))?;
            let map = map_header(cfg, map).with_metadata("theta_k_deg", format_number(scenario.theta_k.to_degrees()));
            writer.write(&format!("{stem}.csv"), |out| map.write_csv(out))?;
            writer.svg(&format!("{stem}.svg"), map_svg(study.name(), &map))?;
            Ok(RunReport {
                flags: map.combined_flags(),
                rows: map.grid.ny,
                ..RunReport::default()
            })
        }
        Study::DeltaPScan => {
            let prepared = scenario.prepare().map_err(|e| err(e.into()))?;
            let grid = map_grid(cfg, |n, z| prepared.default_grid(n, z)).map_err(|e| err(e.into()))?;
            let sigma = cfg.sigma;
            let offsets: Vec<f64> = cfg.scan_offsets.iter().map(|o| o * sigma).collect();
            let direction = axis_vector(cfg.scan_direction);
            let maps = delta_p_scan(&scenario, &offsets, direction, &grid, options.workers).map_err(|e| err(e.into()))?;
            let reference = cfg.scan_offsets.iter().position(|&o| o == 0.0).unwrap_or(0);
            let mut summary = Table::new([
                "offset_sigma",
                "delta_p",
                "scale",
                "ratio",
                "expected_ratio",
                "central_value",
                "max_abs_diff",
            ]);
            summary.note("study", study.name());
            summary.note("direction", cfg.scan_direction.name());
            summary.note("reference offset_sigma", format_number(cfg.scan_offsets[reference]));
            let mut flags = Flags::NONE;
            for (k, map) in maps.iter().enumerate() {
                let map = map_header(cfg, map.clone());
                let name = format!("{stem}_{k}");
                writer.write(&format!("{name}.csv"), |out| map.write_csv(out))?;
                writer.svg(&format!("{name}.svg"), map_svg(&format!("delta P = {} sigma", format_number(cfg.scan_offsets[k])), &map))?;
                flags |= map.combined_flags();
                let base = &maps[reference];
                let diff = map.values.iter().zip(&base.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                let expected = ((offsets[reference].powi(2) - offsets[k].powi(2)) / (sigma * sigma)).exp();
                summary.push(vec![
                    cfg.scan_offsets[k].into(),
                    offsets[k].into(),
                    map.scale.into(),
                    (map.scale / base.scale).into(),
                    expected.into(),
                    map.central_value().into(),
                    diff.into(),
                ]);
            }
            summary.note("flags", flags.to_string());
            writer.write(&format!("{stem}_summary.csv"), |out| summary.write_csv(out))?;
            Ok(RunReport {
                flags,
                rows: summary.rows.len(),
                ..RunReport::default()
            })
        }
        Study::Snapshot => {
            let t = cfg.snapshot_time;
            let packet = &scenario.packet;
            let shift = packet.velocity() * t;
            let spec = cfg.grid.expect("validated: grid present");
            let half = spec.half_width.unwrap_or_else(|| 6.0 * electron_width(packet, t));
            let grid = MapGrid::new(
                (shift.x - half, shift.x + half),
                (shift.y - half, shift.y + half),
                spec.samples,
                spec.samples,
                spec.z,
            )
            .map_err(|e| err(e.into()))?;
            let snap = near_field_snapshot(&scenario, &grid, t).map_err(|e| err(e.into()))?;
            let mut table = Table::new(std::iter::once("y\\x".to_owned()).chain((0..grid.nx).map(|i| format_number(grid.x(i)))));
            table.note("study", study.name());
            table.note("time", format_number(t));
            table.note("width", format_number(snap.width));
            table.note("centre", format!("{} {}", format_number(snap.centre.0), format_number(snap.centre.1)));
            table.note("mass", format_number(snap.mass()));
            for j in 0..grid.ny {
                let mut row = vec![Cell::Number(grid.y(j))];
                row.extend((0..grid.nx).map(|i| Cell::Number(snap.values[j * grid.nx + i])));
                table.push(row);
            }
            writer.write(&format!("{stem}.csv"), |out| table.write_csv(out))?;
            let svg = Heatmap {
                title: "snapshot",
                x_label: "x (lambda_c)",
                y_label: "y (lambda_c)",
                x_range: grid.x_range,
                y_range: grid.y_range,
                nx: grid.nx,
                ny: grid.ny,
                values: &snap.values,
            }
            .to_svg();
            writer.svg(&format!("{stem}.svg"), svg)?;
            Ok(RunReport {
                flags: Flags::NONE,
                rows: grid.ny,
                ..RunReport::default()
            })
        }
        _ => unreachable!("table studies are handled separately"),
    }
}
