//! Standing-wave field inside a dielectric vapor cell, modeled as a 1D layer
//! stack `vacuum | wall | vapor | wall | vacuum` at oblique incidence.
//!
//! The layer normal is `x`, the plane of incidence `xz`. Within layer `j` the
//! tangential field (E_y for TE, H_y for TM) is
//! `A_j e^{i k_j (x - x_j)} + B_j e^{-i k_j (x - x_j)}` with
//! `k_j = √(k0² ε_j − k_z²)`. Amplitudes are found by matching the tangential
//! field and its flux `p_j u'` (`p = 1` for TE, `1/ε` for TM) at every
//! interface, starting from a pure outgoing wave on the exit side.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{amplitude_db, wavelength};

/// THz field of the 33S₁/₂ → 33P₃/₂ measurement, Hz.
pub const THZ_FREQUENCY: f64 = 0.1296e12;
/// Microwave field of the 93S₁/₂ → 92P₃/₂ measurement, Hz.
pub const MW_FREQUENCY: f64 = 4.8e9;

/// Minimum samples per wavelength in the vapor for default profiles.
pub const SAMPLES_PER_WAVELENGTH: f64 = 64.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    TE,
    TM,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub index: C64,
    pub thickness: f64,
}

/// Finite layers between two semi-infinite media. The incidence medium must
/// be lossless.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerStack {
    pub ambient_in: f64,
    pub layers: Vec<Layer>,
    pub ambient_out: C64,
}

impl LayerStack {
    pub fn new(ambient_in: f64, layers: Vec<Layer>, ambient_out: C64) -> Result<Self> {
        if !(ambient_in >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "incidence index must be >= 1 (got {ambient_in})"
            )));
        }
        for l in &layers {
            if !(l.thickness > 0.0) || !l.thickness.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "layer thickness must be > 0 (got {})",
                    l.thickness
                )));
            }
            if !(l.index.re >= 1.0) || l.index.im < 0.0 {
                return Err(Error::InvalidParameter(format!("unsupported layer index {}", l.index)));
            }
        }
        Ok(Self {
            ambient_in,
            layers,
            ambient_out,
        })
    }

    /// The same stack traversed from the other side.
    pub fn reversed(&self) -> Result<Self> {
        if self.ambient_out.im != 0.0 {
            return Err(Error::InvalidParameter(
                "exit medium must be lossless to reverse".into(),
            ));
        }
        let mut layers = self.layers.clone();
        layers.reverse();
        Self::new(self.ambient_out.re, layers, C64::new(self.ambient_in, 0.0))
    }

    pub fn total_thickness(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness).sum()
    }

    /// Solves for all layer amplitudes at `frequency` (Hz) and incidence
    /// `angle` (rad, from the normal).
    pub fn solve(&self, frequency: f64, angle: f64, polarization: Polarization) -> Result<StackSolution> {
        if !(frequency > 0.0) || !frequency.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "frequency must be > 0 (got {frequency})"
            )));
        }
        if !(0.0..FRAC_PI_2).contains(&angle) {
            return Err(Error::InvalidParameter(format!(
                "incidence angle must be in [0, π/2) (got {angle})"
            )));
        }
        let k0 = std::f64::consts::TAU / wavelength(frequency);
        let kz = k0 * self.ambient_in * angle.sin();

        let mut media: Vec<(C64, f64)> = Vec::with_capacity(self.layers.len() + 2);
        media.push((C64::new(self.ambient_in, 0.0), 0.0));
        media.extend(self.layers.iter().map(|l| (l.index, l.thickness)));
        media.push((self.ambient_out, 0.0));

        let mut boundaries = Vec::with_capacity(media.len());
        let mut x = 0.0;
        boundaries.push(0.0);
        for l in &self.layers {
            boundaries.push(x);
            x += l.thickness;
        }
        boundaries.push(x);

        let waves: Vec<(C64, C64)> = media
            .iter()
            .map(|&(n, _)| {
                let eps = n * n;
                let k = (eps * k0 * k0 - kz * kz).sqrt();
                let p = match polarization {
                    Polarization::TE => C64::new(1.0, 0.0),
                    Polarization::TM => eps.inv(),
                };
                (k, p)
            })
            .collect();

        let count = media.len();
        let mut amps = vec![(C64::new(0.0, 0.0), C64::new(0.0, 0.0)); count];
        amps[count - 1] = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        for j in (0..count - 1).rev() {
            let (a1, b1) = amps[j + 1];
            let (k1, p1) = waves[j + 1];
            let (k0j, p0) = waves[j];
            let d = media[j].1;
            let sum = a1 + b1;
            let diff = (p1 * k1) / (p0 * k0j) * (a1 - b1);
            let phase = (C64::i() * k0j * d).exp();
            amps[j] = (0.5 * (sum + diff) / phase, 0.5 * (sum - diff) * phase);
        }
        let incident = amps[0].0;
        for a in &mut amps {
            a.0 /= incident;
            a.1 /= incident;
        }

        Ok(StackSolution {
            frequency,
            angle,
            polarization,
            k0,
            kz,
            media,
            boundaries,
            waves,
            amps,
        })
    }
}

/// Forward/backward amplitudes in every medium, normalized to unit incident
/// amplitude.
#[derive(Clone, Debug)]
pub struct StackSolution {
    frequency: f64,
    angle: f64,
    polarization: Polarization,
    k0: f64,
    kz: f64,
    media: Vec<(C64, f64)>,
    boundaries: Vec<f64>,
    waves: Vec<(C64, C64)>,
    amps: Vec<(C64, C64)>,
}

impl StackSolution {
    pub fn reflection(&self) -> C64 {
        self.amps[0].1
    }

    pub fn transmission(&self) -> C64 {
        self.amps[self.amps.len() - 1].0
    }

    /// Reflected and transmitted power fractions `(R, T)`.
    pub fn power_coefficients(&self) -> (f64, f64) {
        let last = self.waves.len() - 1;
        let flux = |(k, p): (C64, C64)| (k * p).re;
        let r = self.reflection().norm_sqr();
        let t = self.transmission().norm_sqr() * flux(self.waves[last]) / flux(self.waves[0]);
        (r, t)
    }

    fn medium_at(&self, x: f64) -> usize {
        if x < 0.0 {
            return 0;
        }
        let last = self.media.len() - 1;
        for j in 1..last {
            if x <= self.boundaries[j] + self.media[j].1 {
                return j;
            }
        }
        last
    }

    fn field_in(&self, j: usize, x: f64) -> (C64, C64) {
        let (a, b) = self.amps[j];
        let (k, _) = self.waves[j];
        let local = x - self.boundaries[j];
        let fwd = a * (C64::i() * k * local).exp();
        let bwd = b * (-C64::i() * k * local).exp();
        (fwd + bwd, C64::i() * k * (fwd - bwd))
    }

    /// Tangential field and its x-derivative at `x`.
    pub fn tangential(&self, x: f64) -> (C64, C64) {
        self.field_in(self.medium_at(x), x)
    }

    /// `|E(x)|` relative to the incident amplitude.
    ///
    /// The normal component of a TM field jumps at interfaces; there the
    /// medium on the incidence side is used. See [`Self::e_magnitude_in`].
    pub fn e_magnitude(&self, x: f64) -> f64 {
        self.e_magnitude_medium(self.medium_at(x), x)
    }

    /// `|E(x)|` evaluated with the wave of finite layer `layer` (0-based),
    /// including at its boundaries.
    pub fn e_magnitude_in(&self, layer: usize, x: f64) -> f64 {
        assert!(layer + 2 < self.media.len(), "layer {layer} out of range");
        self.e_magnitude_medium(layer + 1, x)
    }

    fn e_magnitude_medium(&self, j: usize, x: f64) -> f64 {
        let (u, du) = self.field_in(j, x);
        match self.polarization {
            Polarization::TE => u.norm(),
            Polarization::TM => {
                let eps = self.media[j].0 * self.media[j].0;
                let n_in = self.media[0].0.re;
                n_in * ((self.kz * u).norm_sqr() + du.norm_sqr()).sqrt() / (self.k0 * eps.norm())
            }
        }
    }

    /// Worst mismatch of the tangential field and flux across all interfaces,
    /// relative to the largest amplitude in the stack.
    pub fn interface_residual(&self) -> f64 {
        let scale = self
            .amps
            .iter()
            .map(|(a, b)| a.norm().max(b.norm()))
            .fold(0.0, f64::max);
        let mut worst = 0.0f64;
        for j in 0..self.media.len() - 1 {
            let x = self.boundaries[j] + self.media[j].1;
            let (u0, d0) = self.field_in(j, x);
            let (u1, d1) = self.field_in(j + 1, x);
            let (k0j, p0) = self.waves[j];
            let (k1, p1) = self.waves[j + 1];
            let field = (u0 - u1).norm();
            let flux = (p0 * d0 - p1 * d1).norm() / (p0 * k0j).norm().max((p1 * k1).norm());
            worst = worst.max(field.max(flux));
        }
        worst / scale
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }
}

/// Vapor cell seen along the propagation axis: two walls around an interior.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellGeometry {
    pub wall_thickness: f64,
    pub inner_length: f64,
    pub wall_index: C64,
    pub inner_index: C64,
}

impl CellGeometry {
    pub fn new(wall_thickness: f64, inner_length: f64, wall_index: C64, inner_index: C64) -> Result<Self> {
        let geom = Self {
            wall_thickness,
            inner_length,
            wall_index,
            inner_index,
        };
        geom.stack()?;
        Ok(geom)
    }

    /// Borosilicate cube used for the THz field: 2 mm walls, 20 mm interior.
    /// The wall index is an assumed typical value, not a measured one.
    pub fn borosilicate_cube() -> Self {
        Self {
            wall_thickness: 2e-3,
            inner_length: 20e-3,
            wall_index: C64::new(2.1, 0.02),
            inner_index: C64::new(1.0, 0.0),
        }
    }

    /// The 20×20×80 mm³ microwave cell, represented by its 80 mm axis.
    pub fn borosilicate_long_cell() -> Self {
        Self {
            inner_length: 80e-3,
            ..Self::borosilicate_cube()
        }
    }

    /// Same dimensions with index-matched walls (no cell at all).
    pub fn without_walls(self) -> Self {
        Self {
            wall_index: C64::new(1.0, 0.0),
            ..self
        }
    }

    pub fn stack(&self) -> Result<LayerStack> {
        LayerStack::new(
            1.0,
            vec![
                Layer {
                    index: self.wall_index,
                    thickness: self.wall_thickness,
                },
                Layer {
                    index: self.inner_index,
                    thickness: self.inner_length,
                },
                Layer {
                    index: self.wall_index,
                    thickness: self.wall_thickness,
                },
            ],
            C64::new(1.0, 0.0),
        )
    }

    /// Start and end of the interior along the axis.
    pub fn inner_span(&self) -> (f64, f64) {
        (self.wall_thickness, self.wall_thickness + self.inner_length)
    }

    /// Samples that resolve the interior at [`SAMPLES_PER_WAVELENGTH`].
    pub fn default_samples(&self, frequency: f64) -> usize {
        let lambda = wavelength(frequency) / self.inner_index.re;
        ((SAMPLES_PER_WAVELENGTH * self.inner_length / lambda).ceil() as usize + 1).max(65)
    }
}

/// `|E|` sampled across the cell interior.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldProfile {
    pub positions: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub incidence_angle: f64,
    pub frequency: f64,
}

/// Field profile across the interior for one incidence angle.
pub fn transfer_matrix_field(
    geom: &CellGeometry,
    frequency: f64,
    angle: f64,
    polarization: Polarization,
    samples: usize,
) -> Result<FieldProfile> {
    if samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 samples (got {samples})"
        )));
    }
    let solution = geom.stack()?.solve(frequency, angle, polarization)?;
    let (start, end) = geom.inner_span();
    let step = (end - start) / (samples - 1) as f64;
    let positions: Vec<f64> = (0..samples)
        .map(|k| if k + 1 == samples { end } else { start + step * k as f64 })
        .collect();
    let amplitude = positions.iter().map(|&x| solution.e_magnitude_in(1, x)).collect();
    Ok(FieldProfile {
        positions,
        amplitude,
        incidence_angle: angle,
        frequency,
    })
}

/// Trapezoidal mean of `|E|` along the probe path.
pub fn path_average(profile: &FieldProfile) -> f64 {
    let (x, y) = (&profile.positions, &profile.amplitude);
    match x.len() {
        0 => 0.0,
        1 => y[0],
        n => {
            let area: f64 = (1..n).map(|k| 0.5 * (y[k] + y[k - 1]) * (x[k] - x[k - 1])).sum();
            area / (x[n - 1] - x[0])
        }
    }
}

/// Mean distance between successive field minima, or `None` for profiles
/// without standing-wave modulation.
pub fn node_spacing(profile: &FieldProfile) -> Option<f64> {
    let (x, y) = (&profile.positions, &profile.amplitude);
    let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
    if y.len() < 3 || !(hi - lo > 1e-6 * hi) {
        return None;
    }
    let nodes: Vec<f64> = (1..y.len() - 1)
        .filter(|&k| y[k] < y[k - 1] && y[k] <= y[k + 1])
        .map(|k| {
            let denom = y[k - 1] - 2.0 * y[k] + y[k + 1];
            let shift = if denom > 0.0 {
                0.5 * (y[k - 1] - y[k + 1]) / denom
            } else {
                0.0
            };
            x[k] + shift * (x[k + 1] - x[k - 1]) / 2.0
        })
        .collect();
    if nodes.len() < 2 {
        return None;
    }
    Some((nodes[nodes.len() - 1] - nodes[0]) / (nodes.len() - 1) as f64)
}

/// Folds a propagation direction in the plane onto the incidence angle at a
/// face of a square cell, `angle mod π/2`.
pub fn face_incidence(angle: f64) -> f64 {
    let folded = angle.rem_euclid(FRAC_PI_2);
    if FRAC_PI_2 - folded < 1e-12 {
        0.0
    } else {
        folded
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub angle: f64,
    pub path_average: f64,
    pub gain_db: f64,
}

/// Path-averaged field at each direction (folded by [`face_incidence`]),
/// expressed in dB against the largest average.
pub fn angle_sweep(
    geom: &CellGeometry,
    frequency: f64,
    angles: &[f64],
    polarization: Polarization,
) -> Result<Vec<SweepRow>> {
    if angles.is_empty() {
        return Err(Error::Empty("sweep angles"));
    }
    let samples = geom.default_samples(frequency);
    let averages: Vec<f64> = angles
        .par_iter()
        .map(|&a| {
            transfer_matrix_field(geom, frequency, face_incidence(a), polarization, samples).map(|p| path_average(&p))
        })
        .collect::<Result<_>>()?;
    let max = averages.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(angles
        .iter()
        .zip(averages)
        .map(|(&angle, avg)| SweepRow {
            angle,
            path_average: avg,
            gain_db: if avg == max { 0.0 } else { amplitude_db(avg / max) },
        })
        .collect())
}

/// Max-minus-min spread in dB of the path-averaged field over `angles`
/// (TE polarization).
pub fn angle_sweep_deviation(geom: &CellGeometry, frequency: f64, angles: &[f64]) -> Result<f64> {
    if angles.len() < 2 {
        return Err(Error::InvalidParameter("angle sweep needs at least 2 angles".into()));
    }
    let rows = angle_sweep(geom, frequency, angles, Polarization::TE)?;
    let lo = rows.iter().map(|r| r.gain_db).fold(f64::INFINITY, f64::min);
    Ok(-lo)
}
