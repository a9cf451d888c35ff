//! Probe-transmission spectra of the four-level Rydberg ladder
//! `g → e → r1 → r2` and Autler-Townes readout.
//!
//! Levels are `g` (ground), `e` (intermediate, driven by the probe), `r1`
//! (Rydberg S, driven by the coupling laser) and `r2` (Rydberg P, driven by
//! the RF field). In the rotating frame
//!
//! ```text
//! H = -δp |e⟩⟨e| - (δp+δc) |r1⟩⟨r1| - (δp+δc+δrf) |r2⟩⟨r2|
//!     + Ωp/2 (|g⟩⟨e| + h.c.) + Ωc/2 (|e⟩⟨r1| + h.c.) + Ωrf/2 (|r1⟩⟨r2| + h.c.)
//! ```
//!
//! with spontaneous decay `e → g` (γe), `r1 → e` and `r2 → g` (γr). The steady
//! state is the null vector of the 16×16 Liouvillian with the trace fixed to
//! one.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{eigen_hermitian, HermitianMatrix};
use crate::metrology::{SplittingResult, SplittingSource};
use crate::units::mhz_to_rad;

const LEVELS: usize = 4;
const G: usize = 0;
const E: usize = 1;
const R1: usize = 2;
const R2: usize = 3;

/// Pivot ratio below which the Liouvillian is declared singular.
const SINGULAR_PIVOT_RATIO: f64 = 1e-12;

/// Default peak prominence threshold, as a fraction of full scale.
pub const DEFAULT_PROMINENCE: f64 = 0.05;

/// Probe Rabi frequency above `WEAK_PROBE_RATIO · γe` leaves the weak-probe
/// regime.
pub const WEAK_PROBE_RATIO: f64 = 0.1;

/// Ladder parameters, all in rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderConfig {
    pub omega_p: f64,
    pub omega_c: f64,
    pub omega_rf: f64,
    pub delta_p: f64,
    pub delta_rf: f64,
    pub gamma_e: f64,
    pub gamma_r: f64,
    /// Gaussian Doppler width of the probe transition; 0 disables averaging.
    pub doppler_sigma: f64,
    /// Gauss-Hermite nodes used when `doppler_sigma > 0`.
    pub doppler_nodes: usize,
    /// Coupling-to-probe wavevector ratio `k_c / k_p` (counter-propagating).
    pub k_ratio: f64,
}

impl Default for LadderConfig {
    /// Weak probe on the Cs D2 line with a modest coupling laser. The decay
    /// rates are textbook Cs values, not fitted to any measurement.
    fn default() -> Self {
        Self {
            omega_p: mhz_to_rad(0.2),
            omega_c: mhz_to_rad(1.5),
            omega_rf: 0.0,
            delta_p: 0.0,
            delta_rf: 0.0,
            gamma_e: mhz_to_rad(5.2),
            gamma_r: mhz_to_rad(0.1),
            doppler_sigma: 0.0,
            doppler_nodes: 24,
            k_ratio: 852.35 / 511.69,
        }
    }
}

impl LadderConfig {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("omega_p", self.omega_p),
            ("omega_c", self.omega_c),
            ("omega_rf", self.omega_rf),
            ("gamma_e", self.gamma_e),
            ("gamma_r", self.gamma_r),
            ("doppler_sigma", self.doppler_sigma),
            ("k_ratio", self.k_ratio),
        ];
        for (name, v) in rates {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and >= 0 (got {v})"
                )));
            }
        }
        for (name, v) in [("delta_p", self.delta_p), ("delta_rf", self.delta_rf)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        if self.doppler_sigma > 0.0 && self.doppler_nodes == 0 {
            return Err(Error::InvalidParameter("doppler_nodes must be >= 1".into()));
        }
        Ok(())
    }

    /// True when the probe is strong enough to saturate (`Ωp > 0.1 γe`).
    pub fn strong_probe(&self) -> bool {
        self.omega_p > WEAK_PROBE_RATIO * self.gamma_e
    }

    fn rate_scale(&self, delta_c: f64) -> f64 {
        [
            self.omega_p,
            self.omega_c,
            self.omega_rf,
            self.delta_p.abs(),
            self.delta_rf.abs(),
            delta_c.abs(),
            self.gamma_e,
            self.gamma_r,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Steady-state density matrix of the ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct SteadyState {
    rho: [[C64; LEVELS]; LEVELS],
}

impl SteadyState {
    pub fn rho(&self, row: usize, col: usize) -> C64 {
        self.rho[row][col]
    }

    /// `Im ρ_ge`; positive values mean probe absorption.
    pub fn probe_coherence_im(&self) -> f64 {
        self.rho[G][E].im
    }

    pub fn populations(&self) -> [f64; LEVELS] {
        std::array::from_fn(|k| self.rho[k][k].re)
    }

    pub fn trace_error(&self) -> f64 {
        let tr: C64 = (0..LEVELS).map(|k| self.rho[k][k]).sum();
        (tr - C64::new(1.0, 0.0)).norm()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..LEVELS {
            for j in 0..LEVELS {
                worst = worst.max((self.rho[i][j] - self.rho[j][i].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part of ρ.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = HermitianMatrix::from_fn(LEVELS, |i, j| 0.5 * (self.rho[i][j] + self.rho[j][i].conj()))
            .expect("symmetrized matrix is Hermitian");
        eigen_hermitian(&h).values()[0]
    }
}

fn ladder_hamiltonian(cfg: &LadderConfig, delta_p: f64, delta_c: f64) -> [[C64; LEVELS]; LEVELS] {
    let zero = C64::new(0.0, 0.0);
    let mut h = [[zero; LEVELS]; LEVELS];
    h[E][E] = C64::new(-delta_p, 0.0);
    h[R1][R1] = C64::new(-(delta_p + delta_c), 0.0);
    h[R2][R2] = C64::new(-(delta_p + delta_c + cfg.delta_rf), 0.0);
    for (a, b, w) in [(G, E, cfg.omega_p), (E, R1, cfg.omega_c), (R1, R2, cfg.omega_rf)] {
        h[a][b] = C64::new(0.5 * w, 0.0);
        h[b][a] = C64::new(0.5 * w, 0.0);
    }
    h
}

/// Jump operators as `(rate, to, from)`, i.e. `√rate |to⟩⟨from|`.
fn decays(cfg: &LadderConfig) -> [(f64, usize, usize); 3] {
    [(cfg.gamma_e, G, E), (cfg.gamma_r, E, R1), (cfg.gamma_r, G, R2)]
}

fn vec_index(i: usize, j: usize) -> usize {
    i * LEVELS + j
}

/// Row-major vectorized Liouvillian, divided by `scale`.
fn liouvillian(cfg: &LadderConfig, delta_p: f64, delta_c: f64, scale: f64) -> DMatrix<C64> {
    let n = LEVELS * LEVELS;
    let h = ladder_hamiltonian(cfg, delta_p, delta_c);
    let mut l = DMatrix::<C64>::zeros(n, n);
    let minus_i = C64::new(0.0, -1.0);
    for i in 0..LEVELS {
        for j in 0..LEVELS {
            let row = vec_index(i, j);
            for k in 0..LEVELS {
                // -i (H ρ)_ij
                l[(row, vec_index(k, j))] += minus_i * h[i][k];
                // +i (ρ H)_ij
                l[(row, vec_index(i, k))] -= minus_i * h[k][j];
            }
        }
    }
    for (rate, to, from) in decays(cfg) {
        if rate == 0.0 {
            continue;
        }
        // L ρ L† feeds ρ_to,to from ρ_from,from.
        l[(vec_index(to, to), vec_index(from, from))] += C64::new(rate, 0.0);
        // -½ {L†L, ρ} with L†L = |from⟩⟨from|.
        for k in 0..LEVELS {
            l[(vec_index(from, k), vec_index(from, k))] -= C64::new(0.5 * rate, 0.0);
            l[(vec_index(k, from), vec_index(k, from))] -= C64::new(0.5 * rate, 0.0);
        }
    }
    l.unscale_mut(scale);
    l
}

fn solve_steady(cfg: &LadderConfig, delta_p: f64, delta_c: f64) -> Result<SteadyState> {
    let scale = cfg.rate_scale(delta_c).max(f64::MIN_POSITIVE);
    let mut l = liouvillian(cfg, delta_p, delta_c, scale);
    let n = LEVELS * LEVELS;
    // Replace the ρ_gg equation by the trace condition.
    for col in 0..n {
        l[(0, col)] = C64::new(0.0, 0.0);
    }
    for k in 0..LEVELS {
        l[(0, vec_index(k, k))] = C64::new(1.0, 0.0);
    }
    let mut rhs = DVector::<C64>::zeros(n);
    rhs[0] = C64::new(1.0, 0.0);

    let lu = l.lu();
    let u = lu.u();
    let pivots: Vec<f64> = (0..n).map(|k| u[(k, k)].norm()).collect();
    let max = pivots.iter().copied().fold(0.0, f64::max);
    let min = pivots.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio = if max > 0.0 { min / max } else { 0.0 };
    if ratio < SINGULAR_PIVOT_RATIO {
        return Err(Error::SingularLiouvillian(ratio));
    }
    let x = lu.solve(&rhs).ok_or(Error::SingularLiouvillian(ratio))?;
    Ok(SteadyState {
        rho: std::array::from_fn(|i| std::array::from_fn(|j| x[vec_index(i, j)])),
    })
}

/// Steady state at coupling-laser detuning `delta_c`, for atoms at rest.
pub fn steady_state(cfg: &LadderConfig, delta_c: f64) -> Result<SteadyState> {
    cfg.validate()?;
    solve_steady(cfg, cfg.delta_p, delta_c)
}

/// Gauss-Hermite nodes and weights for `∫ e^{-x²} f(x) dx`, weights
/// normalized to sum to one (Golub-Welsch).
pub fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "at least one quadrature node");
    let jacobi = DMatrix::<f64>::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = jacobi.symmetric_eigen();
    let mut nodes: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = nodes.iter().map(|p| p.1).sum();
    nodes.iter_mut().for_each(|p| p.1 /= total);
    nodes
}

/// Probe absorption (`Im ρ_ge`), Doppler-averaged with `nodes` velocity
/// classes when `doppler_sigma > 0`.
fn absorption_with_nodes(cfg: &LadderConfig, delta_c: f64, nodes: &[(f64, f64)]) -> Result<f64> {
    let mut acc = 0.0;
    for &(xi, w) in nodes {
        // Probe shift of a velocity class; the counter-propagating coupling
        // beam sees the opposite shift scaled by k_c/k_p.
        let shift = std::f64::consts::SQRT_2 * cfg.doppler_sigma * xi;
        let s = solve_steady(cfg, cfg.delta_p - shift, delta_c + cfg.k_ratio * shift)?;
        acc += w * s.probe_coherence_im();
    }
    Ok(acc)
}

/// Probe absorption at one scan point.
pub fn probe_absorption(cfg: &LadderConfig, delta_c: f64) -> Result<f64> {
    cfg.validate()?;
    if cfg.doppler_sigma > 0.0 {
        absorption_with_nodes(cfg, delta_c, &gauss_hermite(cfg.doppler_nodes))
    } else {
        Ok(solve_steady(cfg, cfg.delta_p, delta_c)?.probe_coherence_im())
    }
}

/// Doppler-averaged absorption with an explicit node count, for checking the
/// quadrature path against the rest-frame path.
pub fn probe_absorption_quadrature(cfg: &LadderConfig, delta_c: f64, nodes: usize) -> Result<f64> {
    cfg.validate()?;
    absorption_with_nodes(cfg, delta_c, &gauss_hermite(nodes))
}

/// Rescales values onto `[0, 1]`; a flat input maps to all ones.
pub fn normalize_unit(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![1.0; values.len()];
    }
    values.iter().map(|v| ((v - lo) / span).clamp(0.0, 1.0)).collect()
}

/// Local maximum of a trace with its prominence and interpolated position.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Peak {
    pub index: usize,
    pub position: f64,
    pub height: f64,
    pub prominence: f64,
}

/// Probe transmission versus coupling detuning, normalized to `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumTrace {
    detunings: Vec<f64>,
    transmission: Vec<f64>,
    peaks: Vec<f64>,
}

impl SpectrumTrace {
    /// Builds a trace from raw transmission-like values (larger = more
    /// transparent), normalizing to `[0, 1]` and locating peaks with the
    /// default prominence.
    pub fn new(detunings: Vec<f64>, raw: Vec<f64>) -> Result<Self> {
        if detunings.len() != raw.len() {
            return Err(Error::Dimension(format!(
                "{} detunings vs {} values",
                detunings.len(),
                raw.len()
            )));
        }
        if detunings.len() < 3 {
            return Err(Error::InvalidParameter("a trace needs at least 3 points".into()));
        }
        if detunings.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("scan axis must be strictly increasing".into()));
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite transmission value".into()));
        }
        let transmission = normalize_unit(&raw);
        let mut trace = Self {
            detunings,
            transmission,
            peaks: Vec::new(),
        };
        trace.peaks = trace
            .find_peaks(DEFAULT_PROMINENCE)
            .iter()
            .map(|p| p.position)
            .collect();
        Ok(trace)
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn transmission(&self) -> &[f64] {
        &self.transmission
    }

    /// Positions of peaks above the default prominence, ascending.
    pub fn peaks(&self) -> &[f64] {
        &self.peaks
    }

    pub fn len(&self) -> usize {
        self.detunings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detunings.is_empty()
    }

    /// Renormalizes the transmission; idempotent on an already normalized
    /// trace.
    pub fn renormalized(&self) -> Self {
        Self::new(self.detunings.clone(), self.transmission.clone()).expect("trace already validated")
    }

    /// Largest `|T(x_i) - T(x_{n-1-i})|`, meaningful for scans symmetric about
    /// zero.
    pub fn mirror_asymmetry(&self) -> f64 {
        let n = self.len();
        (0..n / 2)
            .map(|i| (self.transmission[i] - self.transmission[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }

    /// Local maxima whose prominence is at least `threshold` of full scale,
    /// ascending in position.
    pub fn find_peaks(&self, threshold: f64) -> Vec<Peak> {
        let y = &self.transmission;
        let n = y.len();
        let full_scale =
            y.iter().copied().fold(f64::NEG_INFINITY, f64::max) - y.iter().copied().fold(f64::INFINITY, f64::min);
        if !(full_scale > 0.0) {
            return Vec::new();
        }
        let mut peaks = Vec::new();
        let mut i = 1;
        while i + 1 < n {
            if y[i] > y[i - 1] {
                // Walk across a plateau, if any.
                let mut j = i;
                while j + 1 < n && y[j + 1] == y[i] {
                    j += 1;
                }
                if j + 1 < n && y[j + 1] < y[i] {
                    let top = (i + j) / 2;
                    let prominence = self.prominence(top);
                    if prominence >= threshold * full_scale {
                        peaks.push(Peak {
                            index: top,
                            position: self.vertex(top),
                            height: y[top],
                            prominence,
                        });
                    }
                }
                i = j + 1;
            } else {
                i += 1;
            }
        }
        peaks
    }

    fn prominence(&self, top: usize) -> f64 {
        let y = &self.transmission;
        let h = y[top];
        let mut left_min = h;
        for k in (0..top).rev() {
            if y[k] > h {
                break;
            }
            left_min = left_min.min(y[k]);
        }
        let mut right_min = h;
        for &v in &y[top + 1..] {
            if v > h {
                break;
            }
            right_min = right_min.min(v);
        }
        h - left_min.max(right_min)
    }

    /// Vertex of the parabola through the samples around `k`.
    fn vertex(&self, k: usize) -> f64 {
        let (x, y) = (&self.detunings, &self.transmission);
        if k == 0 || k + 1 >= x.len() {
            return x[k];
        }
        let (x0, x1, x2) = (x[k - 1], x[k], x[k + 1]);
        let (y0, y1, y2) = (y[k - 1], y[k], y[k + 1]);
        let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
        let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
        if den == 0.0 {
            x1
        } else {
            x1 - 0.5 * num / den
        }
    }

    /// Full width at half maximum of the tallest peak, by linear interpolation
    /// of the half-level crossings.
    pub fn fwhm(&self) -> Option<f64> {
        let (x, y) = (&self.detunings, &self.transmission);
        let top = (0..y.len()).max_by(|&a, &b| y[a].total_cmp(&y[b]))?;
        let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
        let half = 0.5 * (y[top] + lo);
        let cross = |a: usize, b: usize| x[a] + (half - y[a]) * (x[b] - x[a]) / (y[b] - y[a]);
        let left = (1..=top).rev().find(|&k| y[k - 1] < half).map(|k| cross(k - 1, k))?;
        let right = (top..y.len() - 1).find(|&k| y[k + 1] < half).map(|k| cross(k, k + 1))?;
        Some(right - left)
    }
}

/// Scans the coupling laser over `[start, stop]` with `points` samples.
///
/// Scan points are independent and evaluated in parallel; the result does not
/// depend on the thread count.
pub fn scan_spectrum(cfg: &LadderConfig, start: f64, stop: f64, points: usize) -> Result<SpectrumTrace> {
    cfg.validate()?;
    if points < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 scan points (got {points})"
        )));
    }
    if !(stop > start) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "degenerate scan range [{start}, {stop}]"
        )));
    }
    let step = (stop - start) / (points - 1) as f64;
    let detunings: Vec<f64> = (0..points)
        .map(|k| if k + 1 == points { stop } else { start + step * k as f64 })
        .collect();
    let nodes = if cfg.doppler_sigma > 0.0 {
        gauss_hermite(cfg.doppler_nodes)
    } else {
        vec![(0.0, 1.0)]
    };
    let absorption: Vec<f64> = detunings
        .par_iter()
        .map(|&dc| absorption_with_nodes(cfg, dc, &nodes))
        .collect::<Result<_>>()?;
    let transparency: Vec<f64> = absorption.iter().map(|a| -a).collect();
    SpectrumTrace::new(detunings, transparency)
}

/// A-T splitting from the two most prominent peaks (default threshold).
pub fn extract_splitting(trace: &SpectrumTrace) -> Result<SplittingResult> {
    extract_splitting_with(trace, DEFAULT_PROMINENCE)
}

/// A-T splitting with an explicit prominence threshold (fraction of full
/// scale).
pub fn extract_splitting_with(trace: &SpectrumTrace, prominence: f64) -> Result<SplittingResult> {
    let mut peaks = trace.find_peaks(prominence);
    if peaks.len() < 2 {
        return Err(Error::UnresolvedSplitting { found: peaks.len() });
    }
    peaks.sort_by(|a, b| b.prominence.total_cmp(&a.prominence));
    Ok(SplittingResult {
        delta_at: (peaks[0].position - peaks[1].position).abs(),
        source: SplittingSource::SpectrumPeaks,
    })
}

/// Coupling detunings where an RF-dressed Rydberg state is two-photon
/// resonant, `δc = -δp - δrf/2 ± √(δrf² + Ωrf²)/2`.
pub fn dressed_peak_positions(cfg: &LadderConfig) -> (f64, f64) {
    let half_split = 0.5 * cfg.delta_rf.hypot(cfg.omega_rf);
    let center = -cfg.delta_p - 0.5 * cfg.delta_rf;
    (center - half_split, center + half_split)
}
