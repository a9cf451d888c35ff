//! Strict JSON run configuration.
//!
//! Every key carries its unit in the name. A preset supplies a base document;
//! the user file is merged over it key by key and the result is parsed with
//! unknown keys rejected.

use std::f64::consts::TAU;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use rydant::angular::AngularMomentum;
use rydant::cellfield::{CellGeometry, Polarization};
use rydant::hamiltonian::{RfDrive, TransitionSystem};
use rydant::patterns::{full_circle, Plane, Readout};
use rydant::spectra::LadderConfig;
use rydant::units::mhz_to_rad;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Used when no dipole moment is configured. It only fixes the scale of field
/// estimates and has no physical meaning.
pub const PLACEHOLDER_MU_MHZ_PER_V_PER_M: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Preset {
    /// 33S1/2 → 33P3/2 at 0.1296 THz, 20 mm cube.
    #[value(name = "thz-33s")]
    #[serde(rename = "thz-33s")]
    Thz33s,
    /// 93S1/2 → 92P3/2 at 4.8 GHz, 80 mm cell.
    #[value(name = "mw-93s")]
    #[serde(rename = "mw-93s")]
    Mw93s,
}

impl Preset {
    pub fn levels(self) -> &'static str {
        match self {
            Preset::Thz33s => "6S1/2 -> 6P3/2 -> 33S1/2 -> 33P3/2",
            Preset::Mw93s => "6S1/2 -> 6P3/2 -> 93S1/2 -> 92P3/2",
        }
    }

    fn base(self) -> Value {
        match self {
            Preset::Thz33s => json!({
                "ladder": { "probe_wavelength_nm": 852.35, "coupling_wavelength_nm": 511.69 },
                "cell": { "frequency_ghz": 129.6, "inner_length_mm": 20.0 },
            }),
            Preset::Mw93s => json!({
                "ladder": { "probe_wavelength_nm": 852.35, "coupling_wavelength_nm": 508.64 },
                "cell": { "frequency_ghz": 4.8, "inner_length_mm": 80.0 },
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub preset: Option<Preset>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub drive: DriveSection,
    #[serde(default)]
    pub ladder: LadderSection,
    #[serde(default)]
    pub cell: CellSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub spectrum: SpectrumSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub two_jg: u32,
    pub two_je: u32,
    pub mu_mhz_per_v_per_m: Option<f64>,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            two_jg: 1,
            two_je: 3,
            mu_mhz_per_v_per_m: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveSection {
    pub rabi_mhz: f64,
    pub detuning_mhz: f64,
}

impl Default for DriveSection {
    fn default() -> Self {
        Self {
            rabi_mhz: 10.0,
            detuning_mhz: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LadderSection {
    pub probe_rabi_mhz: f64,
    pub coupling_rabi_mhz: f64,
    pub probe_detuning_mhz: f64,
    pub gamma_e_mhz: f64,
    pub gamma_r_mhz: f64,
    pub doppler_sigma_mhz: f64,
    pub doppler_nodes: usize,
    pub probe_wavelength_nm: f64,
    pub coupling_wavelength_nm: f64,
}

impl Default for LadderSection {
    fn default() -> Self {
        Self {
            probe_rabi_mhz: 0.2,
            coupling_rabi_mhz: 1.5,
            probe_detuning_mhz: 0.0,
            gamma_e_mhz: 5.2,
            gamma_r_mhz: 0.1,
            doppler_sigma_mhz: 0.0,
            doppler_nodes: 24,
            probe_wavelength_nm: 852.35,
            coupling_wavelength_nm: 511.69,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellSection {
    pub walls: bool,
    pub wall_thickness_mm: f64,
    pub inner_length_mm: f64,
    pub wall_index_re: f64,
    pub wall_index_im: f64,
    pub inner_index_re: f64,
    pub frequency_ghz: f64,
    pub polarization: Polarization,
    pub angle_deg: f64,
    pub samples: Option<usize>,
    pub sweep_start_deg: f64,
    pub sweep_stop_deg: f64,
    pub sweep_step_deg: f64,
}

impl Default for CellSection {
    fn default() -> Self {
        Self {
            walls: true,
            wall_thickness_mm: 2.0,
            inner_length_mm: 20.0,
            wall_index_re: 2.1,
            wall_index_im: 0.02,
            inner_index_re: 1.0,
            frequency_ghz: 129.6,
            polarization: Polarization::TE,
            angle_deg: 0.0,
            samples: None,
            sweep_start_deg: 0.0,
            sweep_stop_deg: 90.0,
            sweep_step_deg: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlaneSpec {
    One(Plane),
    Many(Vec<Plane>),
}

impl PlaneSpec {
    pub fn planes(&self) -> Vec<Plane> {
        match self {
            PlaneSpec::One(p) => vec![*p],
            PlaneSpec::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub plane: PlaneSpec,
    #[serde(default = "default_step")]
    pub angle_step_deg: f64,
    #[serde(default)]
    pub angles_deg: Option<Vec<f64>>,
    #[serde(default = "default_readout")]
    pub readout: Readout,
    #[serde(default)]
    pub noise_sigma_db: f64,
    #[serde(default)]
    pub cell: bool,
}

fn default_step() -> f64 {
    5.0
}

fn default_readout() -> Readout {
    Readout::Eigen
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub scan_start_mhz: Option<f64>,
    pub scan_stop_mhz: Option<f64>,
    pub points: usize,
    pub prominence: f64,
    pub span: f64,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            scan_start_mhz: None,
            scan_stop_mhz: None,
            points: 801,
            prominence: rydant::spectra::DEFAULT_PROMINENCE,
            span: 1.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
}

/// Recursively overlays `top` on `base`; objects merge, everything else
/// replaces.
fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (slot, v) => *slot = v,
    }
}

fn set(doc: &mut Value, section: Option<&str>, key: &str, value: Value) {
    let obj = doc.as_object_mut().expect("config root is an object");
    let target = match section {
        Some(s) => {
            let entry = obj.entry(s).or_insert_with(|| Value::Object(Map::new()));
            if !entry.is_object() {
                *entry = Value::Object(Map::new());
            }
            entry.as_object_mut().unwrap()
        }
        None => obj,
    };
    target.insert(key.to_string(), value);
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Default)]
pub struct Overrides {
    pub preset: Option<Preset>,
    pub seed: Option<u64>,
    pub entries: Vec<(Option<&'static str>, &'static str, Value)>,
}

impl Overrides {
    pub fn put(&mut self, section: Option<&'static str>, key: &'static str, value: impl Into<Value>) {
        self.entries.push((section, key, value.into()));
    }
}

pub fn load(path: Option<&Path>, overrides: Overrides) -> Result<RunConfig, CliError> {
    let mut user = match path {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str::<Value>(&text).map_err(|e| CliError::Schema(format!("{}: {e}", p.display())))?
        }
        None => json!({ "schema_version": SCHEMA_VERSION }),
    };
    if !user.is_object() {
        return Err(CliError::Schema("config must be a JSON object".into()));
    }
    if let Some(p) = overrides.preset {
        set(&mut user, None, "preset", serde_json::to_value(p).unwrap());
    }
    if let Some(s) = overrides.seed {
        set(&mut user, None, "seed", s.into());
    }
    for (section, key, value) in overrides.entries {
        set(&mut user, section, key, value);
    }

    let preset: Option<Preset> = match user.get("preset") {
        None | Some(Value::Null) => None,
        Some(v) => Some(serde_json::from_value(v.clone()).map_err(|e| CliError::Schema(format!("preset: {e}")))?),
    };
    let mut doc = preset.map(Preset::base).unwrap_or_else(|| json!({}));
    merge(&mut doc, user);

    let cfg: RunConfig = serde_json::from_value(doc).map_err(|e| CliError::Schema(e.to_string()))?;
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(CliError::Schema(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            cfg.schema_version
        )));
    }
    Ok(cfg)
}

impl RunConfig {
    pub fn mu_is_placeholder(&self) -> bool {
        self.system.mu_mhz_per_v_per_m.is_none()
    }

    /// Dipole moment in (rad/s)/(V/m).
    pub fn mu(&self) -> f64 {
        mhz_to_rad(self.system.mu_mhz_per_v_per_m.unwrap_or(PLACEHOLDER_MU_MHZ_PER_V_PER_M))
    }

    pub fn system(&self) -> rydant::Result<TransitionSystem> {
        TransitionSystem::new(
            AngularMomentum::from_twice(self.system.two_jg),
            AngularMomentum::from_twice(self.system.two_je),
            self.mu(),
        )
    }

    pub fn drive(&self) -> rydant::Result<RfDrive> {
        RfDrive::from_mhz(self.drive.rabi_mhz, self.drive.detuning_mhz)
    }

    pub fn ladder(&self) -> rydant::Result<LadderConfig> {
        let l = &self.ladder;
        if !(l.probe_wavelength_nm > 0.0 && l.coupling_wavelength_nm > 0.0) {
            return Err(rydant::Error::InvalidParameter("laser wavelengths must be > 0".into()));
        }
        let cfg = LadderConfig {
            omega_p: mhz_to_rad(l.probe_rabi_mhz),
            omega_c: mhz_to_rad(l.coupling_rabi_mhz),
            omega_rf: mhz_to_rad(self.drive.rabi_mhz),
            delta_p: mhz_to_rad(l.probe_detuning_mhz),
            delta_rf: mhz_to_rad(self.drive.detuning_mhz),
            gamma_e: mhz_to_rad(l.gamma_e_mhz),
            gamma_r: mhz_to_rad(l.gamma_r_mhz),
            doppler_sigma: mhz_to_rad(l.doppler_sigma_mhz),
            doppler_nodes: l.doppler_nodes,
            k_ratio: l.probe_wavelength_nm / l.coupling_wavelength_nm,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn geometry(&self) -> rydant::Result<CellGeometry> {
        let c = &self.cell;
        let geom = CellGeometry::new(
            c.wall_thickness_mm * 1e-3,
            c.inner_length_mm * 1e-3,
            C64::new(c.wall_index_re, c.wall_index_im),
            C64::new(c.inner_index_re, 0.0),
        )?;
        Ok(if c.walls { geom } else { geom.without_walls() })
    }

    pub fn cell_frequency(&self) -> f64 {
        self.cell.frequency_ghz * 1e9
    }

    pub fn cell_sweep_angles(&self) -> Result<Vec<f64>, CliError> {
        let c = &self.cell;
        inclusive_range(c.sweep_start_deg, c.sweep_stop_deg, c.sweep_step_deg)
    }

    pub fn output_dir(&self) -> &Path {
        Path::new(self.output.dir.as_deref().unwrap_or("."))
    }
}

impl SweepSection {
    pub fn angles(&self) -> Result<Vec<f64>, CliError> {
        match &self.angles_deg {
            Some(list) => Ok(list.iter().map(|d| d.to_radians()).collect()),
            None => {
                let count = 360.0 / self.angle_step_deg;
                if !(self.angle_step_deg > 0.0) || (count - count.round()).abs() > 1e-9 {
                    return Err(CliError::Schema(format!(
                        "angle_step_deg must divide 360 (got {})",
                        self.angle_step_deg
                    )));
                }
                Ok(full_circle(count.round() as usize))
            }
        }
    }
}

/// Parses `start:step:stop` in degrees.
pub fn parse_range(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CliError::Usage(format!("expected start:step:stop in degrees, got {text:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    inclusive_range(nums[0], nums[2], nums[1])
}

/// Angles in radians from `start` to `stop` inclusive, degrees in.
fn inclusive_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(CliError::Usage(format!("invalid angle range {start}:{step}:{stop}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    let angles: Vec<f64> = (0..=n).map(|k| (start + step * k as f64).to_radians()).collect();
    if angles.iter().any(|a| !(0.0..TAU).contains(a)) {
        return Err(CliError::Usage(format!(
            "angles must lie in [0, 360) degrees: {start}:{step}:{stop}"
        )));
    }
    Ok(angles)
}
