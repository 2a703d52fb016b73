//! Phase-space description of Cherenkov emission by an electron wave packet.
//!
//! Natural units throughout: `ħ = c = m_e = 1`. Energies and momenta are in
//! electron masses, times in Compton times, lengths in Compton wavelengths.

pub mod amplitudes;
pub mod flags;
pub mod kinematics;
pub mod medium;
pub mod numerics;
pub mod observables;
pub mod vec3;
pub mod wignerfield;

/// Electron rest energy in eV.
pub const ELECTRON_MASS_EV: f64 = 510_998.95;

pub use amplitudes::{
    AmplitudeError, AmplitudeValue, ElectronHelicity, HelicityConfig, PhaseGradient, PhotonHelicity,
};
pub use flags::Flags;
pub use kinematics::{
    ElectronPacket, EmissionGeometry, KinematicsError, MirrorBranch, PhaseModel, TriangleAngles,
    TriangleSetup,
};
pub use medium::{AnalyticIndex, DispersionParams, MediumError, MediumModel, TabulatedIndex, TableError};
pub use observables::{
    CorrelationGeometry, EmissionKernel, EtaChi, FlashStats, FormationLengths, ObservableError,
    SingularAngles, SpreadTimes,
};
pub use vec3::{Momentum3, Vec3};
pub use wignerfield::{
    EmissionScenario, FinalElectron, HelicityTreatment, MapGrid, PointValue, PreparedScenario,
    SnapshotMap, WignerError, WignerMap,
};
