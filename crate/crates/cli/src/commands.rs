use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rydant::angular::Orientation;
use rydant::cellfield::{angle_sweep, node_spacing, path_average, transfer_matrix_field, SweepRow};
use rydant::hamiltonian::{eigen_closed_form, eigen_hermitian, hamiltonian};
use rydant::metrology::{branch_splittings, field_from_splitting, splitting_from_eigen, FieldEstimate};
use rydant::patterns::{
    compare_patterns, dipole_reference, run_sweep, CellModulation, ComparisonReport, GainPattern, PatternSource,
    SpectrumSettings, SweepPlan,
};
use rydant::spectra::{dressed_peak_positions, extract_splitting_with, scan_spectrum, Peak};
use rydant::units::{mhz_to_rad, rad_to_hz, rad_to_mhz};

use crate::config::{Preset, RunConfig, SCHEMA_VERSION};
use crate::output::{db2, json, num, table, Csv, Outputs};
use crate::CliError;

/// Provenance attached to every JSON output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub preset: Option<Preset>,
    pub levels: Option<String>,
    pub mu_placeholder: bool,
}

fn metadata(cfg: &RunConfig, command: &str) -> Metadata {
    Metadata {
        schema_version: SCHEMA_VERSION,
        command: command.into(),
        seed: cfg.seed,
        preset: cfg.preset,
        levels: cfg.preset.map(|p| p.levels().to_string()),
        mu_placeholder: cfg.mu_is_placeholder(),
    }
}

fn header(cfg: &RunConfig, command: &str) {
    println!("rydant {command}  seed={}", cfg.seed);
    if let Some(p) = cfg.preset {
        println!("levels: {}", p.levels());
    }
}

fn mu_notice(cfg: &RunConfig) {
    if cfg.mu_is_placeholder() {
        eprintln!("note: mu_mhz_per_v_per_m not set; using the non-physical placeholder 1.0");
    }
}

pub fn eigen(cfg: &RunConfig, chi: f64, theta: f64, phi: f64, csv: Option<PathBuf>) -> Result<(), CliError> {
    let sys = cfg.system()?;
    let drive = cfg.drive()?;
    let o = Orientation::new(chi, theta, phi);
    let numeric = eigen_hermitian(&hamiltonian(&sys, drive, o));
    let closed = sys.is_half_to_three_halves().then(|| eigen_closed_form(drive, o));

    header(cfg, "eigen");
    println!(
        "system: J={} -> J={}  rabi={} MHz  detuning={} MHz",
        sys.jg(),
        sys.je(),
        num(cfg.drive.rabi_mhz),
        num(cfg.drive.detuning_mhz)
    );
    println!(
        "orientation: chi={}  theta={}  phi={} rad",
        num(o.chi()),
        num(o.theta()),
        num(o.phi())
    );

    let mut rows = Vec::new();
    let mut out = Csv::new("index,closed_form_mhz,numeric_mhz");
    for (k, &v) in numeric.values().iter().enumerate() {
        let c = closed
            .as_ref()
            .map(|c| num(rad_to_mhz(c.values()[k])))
            .unwrap_or_default();
        let row = vec![k.to_string(), c, num(rad_to_mhz(v))];
        out.row(&row);
        rows.push(row);
    }
    print!("{}", table(&["index", "closed_form_mhz", "numeric_mhz"], &rows));

    if sys.is_half_to_three_halves() {
        let detuning = drive.detuning();
        if o.phi() == 0.0 {
            let s = splitting_from_eigen(&numeric, detuning)?;
            println!("delta_at_mhz: {}", num(rad_to_mhz(s.delta_at)));
        } else {
            let (a, b) = branch_splittings(&numeric, detuning)?;
            println!("branch_splittings_mhz: {}  {}", num(rad_to_mhz(a)), num(rad_to_mhz(b)));
        }
    }

    if let Some(path) = csv {
        let mut outputs = Outputs::default();
        outputs.add(path, out.finish());
        outputs.commit()?;
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
pub struct SweepReport {
    pub metadata: Metadata,
    pub patterns: Vec<GainPattern>,
}

pub fn sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let section = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Schema("missing `sweep` section (needs at least `plane`)".into()))?;
    let angles = section.angles()?;
    let system = cfg.system()?;
    let drive = cfg.drive()?;
    let cell = if section.cell {
        Some(CellModulation {
            geometry: cfg.geometry()?,
            frequency: cfg.cell_frequency(),
            polarization: cfg.cell.polarization,
        })
    } else {
        None
    };
    let spectrum = SpectrumSettings {
        ladder: cfg.ladder()?,
        points: cfg.spectrum.points,
        span: cfg.spectrum.span,
        prominence: cfg.spectrum.prominence,
    };

    let mut patterns = Vec::new();
    for plane in section.plane.planes() {
        let plan = SweepPlan {
            plane,
            angles: angles.clone(),
            readout: section.readout,
            drive,
            system,
            cell: cell.clone(),
            noise_sigma_db: section.noise_sigma_db,
            seed: cfg.seed,
            spectrum,
        };
        patterns.push(run_sweep(&plan)?);
    }

    header(cfg, "sweep");
    let mut pattern_csv = Csv::new("plane,angle_deg,gain_db");
    let mut polar_csv = Csv::new("plane,angle_deg,radius");
    for p in &patterns {
        for s in &p.samples {
            pattern_csv.row(&[p.plane.to_string(), num(s.angle.to_degrees()), num(s.gain_db)]);
        }
        for (angle, r) in p.polar_points() {
            polar_csv.row(&[p.plane.to_string(), num(angle.to_degrees()), num(r)]);
        }
        println!(
            "{}: deviation {} dB  ({} samples, {} gaps)",
            p.plane,
            db2(p.deviation_db),
            p.samples.len(),
            p.gaps.len()
        );
        for g in &p.gaps {
            println!("  gap at {:.3} deg: {}", g.angle.to_degrees(), g.reason);
        }
    }

    let dir = cfg.output_dir();
    let report = SweepReport {
        metadata: metadata(cfg, "sweep"),
        patterns,
    };
    let mut outputs = Outputs::default();
    outputs.add(dir.join("pattern.csv"), pattern_csv.finish());
    outputs.add(dir.join("polar.csv"), polar_csv.finish());
    outputs.add(dir.join("sweep.json"), json(&report));
    finish(outputs)
}

#[derive(Serialize)]
struct SpectrumReport {
    metadata: Metadata,
    rf_rabi_mhz: f64,
    rf_detuning_mhz: f64,
    scan_start_mhz: f64,
    scan_stop_mhz: f64,
    points: usize,
    peaks: Vec<Peak>,
    delta_at_mhz: Option<f64>,
    field: Option<FieldEstimate>,
    notice: Option<String>,
}

pub fn spectrum(cfg: &RunConfig) -> Result<(), CliError> {
    let ladder = cfg.ladder()?;
    let mu = cfg.mu();
    mu_notice(cfg);
    let (lo, hi) = dressed_peak_positions(&ladder);
    let center = 0.5 * (lo + hi);
    let half = (cfg.spectrum.span * (hi - lo)).max(mhz_to_rad(10.0));
    let start = cfg.spectrum.scan_start_mhz.map(mhz_to_rad).unwrap_or(center - half);
    let stop = cfg.spectrum.scan_stop_mhz.map(mhz_to_rad).unwrap_or(center + half);
    let trace = scan_spectrum(&ladder, start, stop, cfg.spectrum.points)?;
    let peaks = trace.find_peaks(cfg.spectrum.prominence);

    header(cfg, "spectrum");
    println!("peaks: {}", peaks.len());
    let (delta_at, field, notice) = match extract_splitting_with(&trace, cfg.spectrum.prominence) {
        Ok(s) => {
            println!("delta_at_mhz: {}", num(rad_to_mhz(s.delta_at)));
            match field_from_splitting(s.delta_at, ladder.delta_rf, mu) {
                Ok(f) => {
                    println!("field_v_per_m: {}", num(f.amplitude));
                    (Some(rad_to_mhz(s.delta_at)), Some(f), None)
                }
                Err(e) => {
                    println!("field estimate unavailable: {e}");
                    (Some(rad_to_mhz(s.delta_at)), None, Some(e.to_string()))
                }
            }
        }
        Err(rydant::Error::UnresolvedSplitting { found }) => {
            let msg = format!("no splitting resolved ({found} peak(s))");
            println!("{msg}");
            (None, None, Some(msg))
        }
        Err(e) => return Err(e.into()),
    };

    let mut csv = Csv::new("detuning_hz,transmission");
    for (&d, &t) in trace.detunings().iter().zip(trace.transmission()) {
        csv.numbers(&[rad_to_hz(d), t]);
    }
    let report = SpectrumReport {
        metadata: metadata(cfg, "spectrum"),
        rf_rabi_mhz: cfg.drive.rabi_mhz,
        rf_detuning_mhz: cfg.drive.detuning_mhz,
        scan_start_mhz: rad_to_mhz(start),
        scan_stop_mhz: rad_to_mhz(stop),
        points: trace.len(),
        peaks,
        delta_at_mhz: delta_at,
        field,
        notice,
    };
    let dir = cfg.output_dir();
    let mut outputs = Outputs::default();
    outputs.add(dir.join("spectrum.csv"), csv.finish());
    outputs.add(dir.join("spectrum.json"), json(&report));
    finish(outputs)
}

#[derive(Serialize)]
struct CellfieldReport {
    metadata: Metadata,
    frequency_hz: f64,
    walls: bool,
    profile_angle_deg: f64,
    path_average: f64,
    node_spacing_m: Option<f64>,
    sweep: Vec<SweepRow>,
    deviation_db: f64,
}

pub fn cellfield(cfg: &RunConfig, angles: &[f64]) -> Result<(), CliError> {
    let geom = cfg.geometry()?;
    let freq = cfg.cell_frequency();
    let pol = cfg.cell.polarization;
    let samples = cfg.cell.samples.unwrap_or_else(|| geom.default_samples(freq));
    let profile = transfer_matrix_field(&geom, freq, cfg.cell.angle_deg.to_radians(), pol, samples)?;
    let rows = angle_sweep(&geom, freq, angles, pol)?;
    let deviation = -rows.iter().map(|r| r.gain_db).fold(0.0, f64::min);
    let spacing = node_spacing(&profile);

    header(cfg, "cellfield");
    println!(
        "frequency_hz: {}  walls: {}  polarization: {pol:?}",
        num(freq),
        cfg.cell.walls
    );
    println!("path_average: {}", num(path_average(&profile)));
    match spacing {
        Some(s) => println!("node_spacing_m: {}", num(s)),
        None => println!("node_spacing_m: none (flat profile)"),
    }
    let table_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![num(r.angle.to_degrees()), num(r.path_average), num(r.gain_db)])
        .collect();
    print!("{}", table(&["angle_deg", "path_avg_rel", "gain_db"], &table_rows));
    println!("deviation: {} dB", db2(deviation));

    let mut profile_csv = Csv::new("position_m,amplitude_rel");
    for (&x, &a) in profile.positions.iter().zip(&profile.amplitude) {
        profile_csv.numbers(&[x, a]);
    }
    let mut sweep_csv = Csv::new("angle_deg,path_avg_rel,gain_db");
    for r in &rows {
        sweep_csv.numbers(&[r.angle.to_degrees(), r.path_average, r.gain_db]);
    }
    let report = CellfieldReport {
        metadata: metadata(cfg, "cellfield"),
        frequency_hz: freq,
        walls: cfg.cell.walls,
        profile_angle_deg: cfg.cell.angle_deg,
        path_average: path_average(&profile),
        node_spacing_m: spacing,
        sweep: rows,
        deviation_db: deviation,
    };
    let dir = cfg.output_dir();
    let mut outputs = Outputs::default();
    outputs.add(dir.join("profile.csv"), profile_csv.finish());
    outputs.add(dir.join("cellfield_sweep.csv"), sweep_csv.finish());
    outputs.add(dir.join("cellfield.json"), json(&report));
    finish(outputs)
}

fn read_report(path: &Path) -> Result<SweepReport, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct CompareOutput {
    a: String,
    b: String,
    seed_a: u64,
    seed_b: Option<u64>,
    comparisons: Vec<ComparisonReport>,
}

pub fn compare(a: &Path, b: Option<&Path>, dipole: bool, out: Option<&Path>) -> Result<(), CliError> {
    let ra = read_report(a)?;
    let rb = match (b, dipole) {
        (Some(_), true) => {
            return Err(CliError::Usage(
                "give either a second report or --dipole-reference".into(),
            ))
        }
        (None, false) => {
            return Err(CliError::Usage(
                "compare needs a second report or --dipole-reference".into(),
            ))
        }
        (Some(p), false) => Some(read_report(p)?),
        (None, true) => None,
    };

    let grid: Vec<f64> = (0..360).map(|d| (d as f64).to_radians()).collect();
    let mut comparisons = Vec::new();
    for pa in &ra.patterns {
        let pb = match &rb {
            Some(r) => match r.patterns.iter().find(|p| p.plane == pa.plane) {
                Some(p) => p.clone(),
                None => continue,
            },
            None => dipole_reference(pa.plane, &grid)?,
        };
        comparisons.push(compare_patterns(pa, &pb));
    }
    if comparisons.is_empty() {
        return Err(CliError::Usage("the reports share no plane".into()));
    }

    let label = |s: PatternSource| match s {
        PatternSource::Eigen => "eigen",
        PatternSource::Spectrum => "spectrum",
        PatternSource::DipoleReference => "dipole",
    };
    let rows: Vec<Vec<String>> = comparisons
        .iter()
        .map(|c| {
            vec![
                c.a.plane.to_string(),
                label(c.a.source).to_string(),
                db2(c.a.deviation_db),
                label(c.b.source).to_string(),
                db2(c.b.deviation_db),
                db2(c.improvement_db),
            ]
        })
        .collect();
    println!("rydant compare  seed={}", ra.metadata.seed);
    print!(
        "{}",
        table(
            &[
                "plane",
                "a_source",
                "a_deviation_db",
                "b_source",
                "b_deviation_db",
                "improvement_db"
            ],
            &rows
        )
    );

    let report = CompareOutput {
        a: a.display().to_string(),
        b: b.map(|p| p.display().to_string())
            .unwrap_or_else(|| "dipole-reference".into()),
        seed_a: ra.metadata.seed,
        seed_b: rb.as_ref().map(|r| r.metadata.seed),
        comparisons,
    };
    let mut outputs = Outputs::default();
    outputs.add(out.unwrap_or(Path::new(".")).join("compare.json"), json(&report));
    finish(outputs)
}

fn finish(outputs: Outputs) -> Result<(), CliError> {
    let written: Vec<String> = outputs.paths().map(|p| p.display().to_string()).collect();
    outputs.commit()?;
    for w in written {
        println!("wrote {w}");
    }
    Ok(())
}
