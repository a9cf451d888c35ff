//! Gain-pattern sweeps on the three coordinate planes, the classical dipole
//! reference, and pattern comparison.
//!
//! A sweep keeps the incident field amplitude fixed and rotates the
//! polarization. Each angle is read out either from the dressed-state
//! eigenvalues or from a simulated EIT/A-T spectrum, optionally scaled by the
//! path-averaged field inside a vapor cell and jittered by seeded noise.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angular::Orientation;
use crate::cellfield::{face_incidence, path_average, transfer_matrix_field, CellGeometry, Polarization};
use crate::error::{Error, Result};
use crate::hamiltonian::{eigen_hermitian, hamiltonian, RfDrive, TransitionSystem};
use crate::metrology::{isotropic_deviation, normalized_gain, splitting_from_eigen, GainSample};
use crate::spectra::{dressed_peak_positions, extract_splitting_with, scan_spectrum, LadderConfig, DEFAULT_PROMINENCE};
use crate::units::mhz_to_rad;

/// Gain assigned to the nulls of the dipole reference.
pub const DIPOLE_FLOOR_DB: f64 = -60.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Plane {
    XY,
    XZ,
    YZ,
}

impl Plane {
    pub const ALL: [Plane; 3] = [Plane::XY, Plane::XZ, Plane::YZ];

    pub fn label(self) -> &'static str {
        match self {
            Plane::XY => "XY",
            Plane::XZ => "XZ",
            Plane::YZ => "YZ",
        }
    }

    /// Whether the plane contains the quantum axis `Z`.
    pub fn contains_z(self) -> bool {
        !matches!(self, Plane::XY)
    }
}

impl std::fmt::Display for Plane {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Plane {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "XY" => Ok(Plane::XY),
            "XZ" => Ok(Plane::XZ),
            "YZ" => Ok(Plane::YZ),
            _ => Err(Error::InvalidParameter(format!("unknown plane {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Readout {
    Eigen,
    Spectrum,
}

/// Linear polarization for a sweep angle on `plane`.
///
/// XY rotates the azimuth at `χ = π/2`; XZ and YZ tilt away from the quantum
/// axis at azimuth 0 and `π/2`.
pub fn plane_to_orientation(plane: Plane, angle: f64) -> Orientation {
    match plane {
        Plane::XY => Orientation::linear(FRAC_PI_2, angle),
        Plane::XZ => Orientation::linear(angle, 0.0),
        Plane::YZ => Orientation::linear(angle, FRAC_PI_2),
    }
}

/// Vapor cell whose interior field scales the Rabi frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellModulation {
    pub geometry: CellGeometry,
    /// RF frequency, Hz.
    pub frequency: f64,
    pub polarization: Polarization,
}

/// How spectra are simulated for the spectrum readout.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSettings {
    /// Laser and decay parameters; the RF fields are overwritten per angle.
    pub ladder: LadderConfig,
    pub points: usize,
    /// Scan half-width in units of the expected splitting.
    pub span: f64,
    pub prominence: f64,
}

impl Default for SpectrumSettings {
    fn default() -> Self {
        Self {
            ladder: LadderConfig::default(),
            points: 801,
            span: 1.0,
            prominence: DEFAULT_PROMINENCE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub plane: Plane,
    /// Sweep angles in `[0, 2π)`.
    pub angles: Vec<f64>,
    pub readout: Readout,
    pub drive: RfDrive,
    pub system: TransitionSystem,
    pub cell: Option<CellModulation>,
    /// Standard deviation of the Gaussian jitter applied to `Δ_AT`, dB.
    pub noise_sigma_db: f64,
    pub seed: u64,
    pub spectrum: SpectrumSettings,
}

impl SweepPlan {
    /// Noise-free eigenvalue sweep without a cell.
    pub fn ideal(plane: Plane, angles: Vec<f64>, drive: RfDrive, system: TransitionSystem) -> Self {
        Self {
            plane,
            angles,
            readout: Readout::Eigen,
            drive,
            system,
            cell: None,
            noise_sigma_db: 0.0,
            seed: 0,
            spectrum: SpectrumSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.angles.is_empty() {
            return Err(Error::Empty("sweep angles"));
        }
        if let Some(a) = self.angles.iter().find(|a| !(0.0..TAU).contains(*a)) {
            return Err(Error::InvalidParameter(format!("sweep angle {a} outside [0, 2π)")));
        }
        if !(self.noise_sigma_db >= 0.0) || !self.noise_sigma_db.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise_sigma_db must be >= 0 (got {})",
                self.noise_sigma_db
            )));
        }
        if !self.system.is_half_to_three_halves() {
            return Err(Error::UnsupportedSystem);
        }
        if !(self.drive.rabi() > 0.0) {
            return Err(Error::InvalidParameter("sweeps need a nonzero Rabi frequency".into()));
        }
        if self.readout == Readout::Spectrum {
            let s = &self.spectrum;
            s.ladder.validate()?;
            if s.points < 3 || !(s.span > 0.0) || !(s.prominence > 0.0 && s.prominence < 1.0) {
                return Err(Error::InvalidParameter("invalid spectrum settings".into()));
            }
        }
        Ok(())
    }
}

/// An angle whose splitting could not be read out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapSample {
    pub angle: f64,
    pub reason: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternSource {
    Eigen,
    Spectrum,
    DipoleReference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternMetadata {
    pub source: PatternSource,
    pub seed: u64,
    pub noise_sigma_db: f64,
    pub cell: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainPattern {
    pub plane: Plane,
    pub samples: Vec<GainSample>,
    pub gaps: Vec<GapSample>,
    pub deviation_db: f64,
    pub metadata: PatternMetadata,
}

impl GainPattern {
    fn from_ratios(
        plane: Plane,
        ratios: &[(f64, f64)],
        gaps: Vec<GapSample>,
        metadata: PatternMetadata,
    ) -> Result<Self> {
        let samples = normalized_gain(ratios)?;
        let deviation_db = isotropic_deviation(&samples)?;
        Ok(Self {
            plane,
            samples,
            gaps,
            deviation_db,
            metadata,
        })
    }

    /// `(angle, linear amplitude)` pairs for polar plots.
    pub fn polar_points(&self) -> Vec<(f64, f64)> {
        self.samples
            .iter()
            .map(|s| (s.angle, 10f64.powf(s.gain_db / 20.0)))
            .collect()
    }
}

/// Path-averaged field in the cell for a sweep angle.
fn cell_factor(cell: &CellModulation, angle: f64) -> Result<f64> {
    let g = &cell.geometry;
    let profile = transfer_matrix_field(
        g,
        cell.frequency,
        face_incidence(angle),
        cell.polarization,
        g.default_samples(cell.frequency),
    )?;
    Ok(path_average(&profile))
}

fn jitter(seed: u64, index: usize, sigma_db: f64) -> f64 {
    if sigma_db == 0.0 {
        return 1.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let normal = Normal::new(0.0, sigma_db).expect("sigma checked by validate");
    10f64.powf(rng.sample(normal) / 20.0)
}

fn spectrum_splitting(settings: &SpectrumSettings, rabi: f64, detuning: f64) -> Result<f64> {
    let cfg = LadderConfig {
        omega_rf: rabi,
        delta_rf: detuning,
        ..settings.ladder
    };
    let (lo, hi) = dressed_peak_positions(&cfg);
    let center = 0.5 * (lo + hi);
    let half = settings.span * (hi - lo).max(mhz_to_rad(1.0));
    let trace = scan_spectrum(&cfg, center - half, center + half, settings.points)?;
    Ok(extract_splitting_with(&trace, settings.prominence)?.delta_at)
}

/// Runs one sweep. Angles are evaluated in parallel; the noise stream of each
/// angle is derived from the seed and the angle index, so the output does not
/// depend on scheduling.
pub fn run_sweep(plan: &SweepPlan) -> Result<GainPattern> {
    plan.validate()?;
    let detuning = plan.drive.detuning();
    let nominal_field = plan.drive.rabi() / plan.system.mu();

    let readings: Vec<Result<std::result::Result<f64, Error>>> = plan
        .angles
        .par_iter()
        .enumerate()
        .map(|(k, &angle)| {
            let rabi = match &plan.cell {
                Some(cell) => plan.drive.rabi() * cell_factor(cell, angle)?,
                None => plan.drive.rabi(),
            };
            let drive = plan.drive.with_rabi(rabi)?;
            let o = plane_to_orientation(plan.plane, angle);
            let spec = eigen_hermitian(&hamiltonian(&plan.system, drive, o));
            let eigen_split = splitting_from_eigen(&spec, detuning)?.delta_at;
            let split = match plan.readout {
                Readout::Eigen => Ok(eigen_split),
                Readout::Spectrum => {
                    let effective = (eigen_split * eigen_split - detuning * detuning).max(0.0).sqrt();
                    match spectrum_splitting(&plan.spectrum, effective, detuning) {
                        Err(e) if !matches!(e, Error::UnresolvedSplitting { .. }) => return Err(e),
                        r => r,
                    }
                }
            };
            Ok(split.map(|s| s * jitter(plan.seed, k, plan.noise_sigma_db)))
        })
        .collect();

    let mut ratios = Vec::with_capacity(plan.angles.len());
    let mut gaps = Vec::new();
    for (&angle, r) in plan.angles.iter().zip(readings) {
        match r? {
            Ok(delta_at) => ratios.push((angle, delta_at / nominal_field)),
            Err(e) => gaps.push(GapSample {
                angle,
                reason: e.to_string(),
            }),
        }
    }
    if ratios.is_empty() {
        return Err(Error::UnresolvedSplitting { found: 0 });
    }
    let metadata = PatternMetadata {
        source: match plan.readout {
            Readout::Eigen => PatternSource::Eigen,
            Readout::Spectrum => PatternSource::Spectrum,
        },
        seed: plan.seed,
        noise_sigma_db: plan.noise_sigma_db,
        cell: plan.cell.is_some(),
    };
    GainPattern::from_ratios(plan.plane, &ratios, gaps, metadata)
}

/// Short dipole along `Z`: `|sin Θ|` on planes containing the axis, floored
/// at [`DIPOLE_FLOOR_DB`]; constant on the XY plane.
pub fn dipole_reference(plane: Plane, angles: &[f64]) -> Result<GainPattern> {
    if angles.is_empty() {
        return Err(Error::Empty("reference angles"));
    }
    let floor = 10f64.powf(DIPOLE_FLOOR_DB / 20.0);
    let ratios: Vec<(f64, f64)> = angles
        .iter()
        .map(|&a| {
            let r = if plane.contains_z() {
                a.sin().abs().max(floor)
            } else {
                1.0
            };
            (a, r)
        })
        .collect();
    let metadata = PatternMetadata {
        source: PatternSource::DipoleReference,
        seed: 0,
        noise_sigma_db: 0.0,
        cell: false,
    };
    let mut pattern = GainPattern::from_ratios(plane, &ratios, Vec::new(), metadata)?;
    for s in &mut pattern.samples {
        if s.raw_ratio <= floor {
            s.gain_db = DIPOLE_FLOOR_DB;
        }
    }
    pattern.deviation_db = isotropic_deviation(&pattern.samples)?;
    Ok(pattern)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternSummary {
    pub plane: Plane,
    pub source: PatternSource,
    pub deviation_db: f64,
    pub samples: usize,
    pub gaps: usize,
}

impl From<&GainPattern> for PatternSummary {
    fn from(p: &GainPattern) -> Self {
        Self {
            plane: p.plane,
            source: p.metadata.source,
            deviation_db: p.deviation_db,
            samples: p.samples.len(),
            gaps: p.gaps.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub a: PatternSummary,
    pub b: PatternSummary,
    /// `deviation(b) − deviation(a)`: how much flatter `a` is than `b`.
    pub improvement_db: f64,
}

pub fn compare_patterns(a: &GainPattern, b: &GainPattern) -> ComparisonReport {
    ComparisonReport {
        a: a.into(),
        b: b.into(),
        improvement_db: b.deviation_db - a.deviation_db,
    }
}

/// `count` evenly spaced angles covering `[0, 2π)`.
pub fn full_circle(count: usize) -> Vec<f64> {
    (0..count).map(|k| TAU * k as f64 / count as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cellfield::{angle_sweep_deviation, THZ_FREQUENCY};
    use approx::assert_abs_diff_eq;

    fn drive() -> RfDrive {
        RfDrive::from_mhz(10.0, 0.0).unwrap()
    }

    fn system() -> TransitionSystem {
        TransitionSystem::s_half_to_p_three_halves(1.0).unwrap()
    }

    #[test]
    fn orientation_mapping() {
        let o = plane_to_orientation(Plane::XZ, 0.0);
        assert_eq!((o.chi(), o.theta(), o.phi()), (0.0, 0.0, 0.0));
        let o = plane_to_orientation(Plane::XY, FRAC_PI_2);
        assert_abs_diff_eq!(o.chi(), FRAC_PI_2);
        assert_abs_diff_eq!(o.theta(), FRAC_PI_2);
        for plane in Plane::ALL {
            for a in full_circle(36) {
                assert_eq!(plane_to_orientation(plane, a).phi(), 0.0);
            }
        }
    }

    #[test]
    fn ideal_sweep_is_flat() {
        for plane in Plane::ALL {
            for detuning in [0.0, 3.0] {
                let d = RfDrive::from_mhz(10.0, detuning).unwrap();
                let p = run_sweep(&SweepPlan::ideal(plane, full_circle(72), d, system())).unwrap();
                assert!(p.deviation_db < 1e-10, "{plane}: {}", p.deviation_db);
                assert!(p.gaps.is_empty());
            }
        }
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let mut plan = SweepPlan::ideal(Plane::XZ, full_circle(72), drive(), system());
        plan.noise_sigma_db = 0.1;
        plan.seed = 7;
        let a = run_sweep(&plan).unwrap();
        let b = run_sweep(&plan).unwrap();
        assert_eq!(a, b);
        assert!(a.deviation_db > 0.0);
        plan.seed = 8;
        assert_ne!(run_sweep(&plan).unwrap().samples, a.samples);
    }

    #[test]
    fn noise_does_not_depend_on_thread_count() {
        let mut plan = SweepPlan::ideal(Plane::XY, full_circle(200), drive(), system());
        plan.noise_sigma_db = 0.3;
        plan.seed = 11;
        let parallel = run_sweep(&plan).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let serial = pool.install(|| run_sweep(&plan)).unwrap();
        assert_eq!(parallel, serial);
    }

    #[test]
    fn deviation_matches_metrology() {
        let mut plan = SweepPlan::ideal(Plane::YZ, full_circle(40), drive(), system());
        plan.noise_sigma_db = 0.5;
        plan.seed = 3;
        let p = run_sweep(&plan).unwrap();
        assert_eq!(p.deviation_db, isotropic_deviation(&p.samples).unwrap());
    }

    #[test]
    fn noise_scaling_medians() {
        let median_for = |sigma: f64| {
            let mut devs: Vec<f64> = (0..50)
                .map(|seed| {
                    let mut plan = SweepPlan::ideal(Plane::XZ, full_circle(1000), drive(), system());
                    plan.noise_sigma_db = sigma;
                    plan.seed = seed;
                    run_sweep(&plan).unwrap().deviation_db
                })
                .collect();
            devs.sort_by(f64::total_cmp);
            0.5 * (devs[24] + devs[25])
        };
        let m: Vec<f64> = [0.05, 0.1, 0.2].into_iter().map(median_for).collect();
        assert!(m[0] < m[1] && m[1] < m[2], "{m:?}");
    }

    #[test]
    fn cell_sweep_matches_cellfield() {
        let geom = CellGeometry::borosilicate_cube();
        let angles: Vec<f64> = (0..10).map(|k| (10.0 * k as f64).to_radians()).collect();
        let mut plan = SweepPlan::ideal(Plane::XY, angles.clone(), drive(), system());
        plan.cell = Some(CellModulation {
            geometry: geom,
            frequency: THZ_FREQUENCY,
            polarization: Polarization::TE,
        });
        let p = run_sweep(&plan).unwrap();
        let expected = angle_sweep_deviation(&geom, THZ_FREQUENCY, &angles).unwrap();
        assert!(p.deviation_db > 0.0);
        assert_abs_diff_eq!(p.deviation_db, expected, epsilon = 1e-9);
        assert!(p.metadata.cell);
    }

    #[test]
    fn spectrum_readout_tracks_eigen() {
        let angles = full_circle(6);
        let mut plan = SweepPlan::ideal(Plane::XZ, angles, RfDrive::from_mhz(10.0, 2.0).unwrap(), system());
        plan.readout = Readout::Spectrum;
        plan.spectrum.points = 401;
        let p = run_sweep(&plan).unwrap();
        assert!(p.gaps.is_empty());
        // Same splitting at every angle up to grid resolution.
        assert!(p.deviation_db < 0.05, "{}", p.deviation_db);
    }

    #[test]
    fn unresolved_angles_become_gaps() {
        let mut plan = SweepPlan::ideal(
            Plane::XZ,
            vec![0.0, 1.0],
            RfDrive::from_mhz(0.5, 0.0).unwrap(),
            system(),
        );
        plan.readout = Readout::Spectrum;
        plan.spectrum.ladder.gamma_r = mhz_to_rad(5.0);
        match run_sweep(&plan) {
            Err(Error::UnresolvedSplitting { found: 0 }) => {}
            other => panic!("expected all gaps, got {other:?}"),
        }
    }

    #[test]
    fn dipole_reference_values() {
        let p = dipole_reference(Plane::XZ, &[FRAC_PI_2, FRAC_PI_2 / 3.0, 0.0]).unwrap();
        assert_abs_diff_eq!(p.samples[0].gain_db, 0.0);
        assert_abs_diff_eq!(p.samples[1].gain_db, -6.020599913279624, epsilon = 1e-12);
        assert_eq!(p.samples[2].gain_db, DIPOLE_FLOOR_DB);
        let grid: Vec<f64> = (0..360).map(|d| (d as f64).to_radians()).collect();
        assert!(dipole_reference(Plane::YZ, &grid).unwrap().deviation_db > 20.0);
        assert_eq!(dipole_reference(Plane::XY, &grid).unwrap().deviation_db, 0.0);
    }

    #[test]
    fn comparison() {
        let grid: Vec<f64> = (0..360).map(|d| (d as f64).to_radians()).collect();
        let atomic = run_sweep(&SweepPlan::ideal(Plane::XZ, grid.clone(), drive(), system())).unwrap();
        let dipole = dipole_reference(Plane::XZ, &grid).unwrap();
        let r = compare_patterns(&atomic, &dipole);
        assert!(r.improvement_db > 20.0);
        assert_eq!(compare_patterns(&dipole, &dipole).improvement_db, 0.0);
    }

    #[test]
    fn plan_validation() {
        let mut plan = SweepPlan::ideal(Plane::XY, vec![], drive(), system());
        assert!(run_sweep(&plan).is_err());
        plan.angles = vec![TAU];
        assert!(run_sweep(&plan).is_err());
        plan.angles = vec![0.0];
        plan.noise_sigma_db = -1.0;
        assert!(run_sweep(&plan).is_err());
    }
}
