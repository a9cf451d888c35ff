//! Block Hamiltonian of a Rydberg pair dressed by a linearly polarized RF
//! field, and its eigenvalues.
//!
//! The basis is ordered as the `g` sublevels followed by the `e` sublevels,
//! each ascending in `m`. Energies are measured from the `g` manifold (rotating
//! frame), so
//!
//! ```text
//!     ┌ 0     M_I† ┐
//! H = │            │ ,   M_e = -Δ·1
//!     └ M_I   M_e  ┘
//! ```

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::angular::{clebsch_gordan, decompose_polarization, AngularMomentum, Orientation, MAX_TWO_J};
use crate::error::{Error, Result};

const HERMITICITY_TOL: f64 = 1e-14;

/// RF coupling strength and detuning, both angular frequencies (rad/s).
///
/// `rabi` is the Ω of the interaction block; the reduced Rabi frequency of the
/// transition is `√6·Ω`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RfDrive {
    rabi: f64,
    detuning: f64,
}

impl RfDrive {
    pub fn new(rabi: f64, detuning: f64) -> Result<Self> {
        if !(rabi >= 0.0) || !rabi.is_finite() || !detuning.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "rabi must be finite and >= 0 (got {rabi}), detuning finite (got {detuning})"
            )));
        }
        Ok(Self { rabi, detuning })
    }

    /// Convenience constructor taking cyclic frequencies in MHz.
    pub fn from_mhz(rabi_mhz: f64, detuning_mhz: f64) -> Result<Self> {
        Self::new(
            crate::units::mhz_to_rad(rabi_mhz),
            crate::units::mhz_to_rad(detuning_mhz),
        )
    }

    pub fn rabi(&self) -> f64 {
        self.rabi
    }

    pub fn detuning(&self) -> f64 {
        self.detuning
    }

    pub fn with_rabi(self, rabi: f64) -> Result<Self> {
        Self::new(rabi, self.detuning)
    }
}

/// A pair of fine-structure levels `g` (lower) and `e` (upper) connected by an
/// electric-dipole transition.
///
/// `mu` has ħ folded in: `Ω = mu · E` with Ω in rad/s and E in V/m.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionSystem {
    jg: AngularMomentum,
    je: AngularMomentum,
    mu: f64,
}

impl TransitionSystem {
    pub fn new(jg: AngularMomentum, je: AngularMomentum, mu: f64) -> Result<Self> {
        let (a, b) = (jg.two_j() as i32, je.two_j() as i32);
        if (a - b).abs() > 2 || (a - b) % 2 != 0 || (a == 0 && b == 0) {
            return Err(Error::SelectionRule {
                jg: jg.to_string(),
                je: je.to_string(),
            });
        }
        if a as u32 > MAX_TWO_J || b as u32 > MAX_TWO_J {
            return Err(Error::InvalidParameter(format!(
                "J above 9/2 is not supported ({jg} -> {je})"
            )));
        }
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("dipole moment must be > 0 (got {mu})")));
        }
        Ok(Self { jg, je, mu })
    }

    /// The S₁/₂ → P₃/₂ pair of the intuitive theory.
    pub fn s_half_to_p_three_halves(mu: f64) -> Result<Self> {
        Self::new(AngularMomentum::half(), AngularMomentum::three_halves(), mu)
    }

    pub fn jg(&self) -> AngularMomentum {
        self.jg
    }

    pub fn je(&self) -> AngularMomentum {
        self.je
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn is_half_to_three_halves(&self) -> bool {
        self.jg.two_j() == 1 && self.je.two_j() == 3
    }

    pub fn dim(&self) -> usize {
        self.jg.dim() + self.je.dim()
    }
}

/// Dense complex block, row-major. For interaction blocks rows are `e`
/// sublevels and columns `g` sublevels.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingBlock {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl CouplingBlock {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged coupling block".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.cols + col]
    }

    fn set(&mut self, row: usize, col: usize, value: C64) {
        self.entries[row * self.cols + col] = value;
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Closed-form interaction block for J = 1/2 → 3/2, prefactor Ω/4.
///
/// Rows are `m_e = -3/2, -1/2, 1/2, 3/2`, columns `m_g = -1/2, 1/2`.
pub fn build_interaction_explicit(drive: RfDrive, o: Orientation) -> CouplingBlock {
    let (chi, theta, phi) = (o.chi(), o.theta(), o.phi());
    let (s, c) = chi.sin_cos();
    let sqrt3 = 3f64.sqrt();
    let up = C64::from_polar(s, theta + phi);
    let down = C64::from_polar(s, -(theta - phi));
    let pi = C64::new(2.0 * c, 0.0);
    let zero = C64::new(0.0, 0.0);
    let scale = drive.rabi() / 4.0;
    let rows = vec![
        vec![-sqrt3 * up, zero],
        vec![pi, -up],
        vec![down, pi],
        vec![zero, sqrt3 * down],
    ];
    let mut block = CouplingBlock::from_rows(rows).expect("fixed 4x2 layout");
    block.entries.iter_mut().for_each(|x| *x *= scale);
    block
}

/// Interaction block for any dipole-allowed `J_g → J_e` pair via the
/// Wigner-Eckart theorem.
///
/// `entry(m_e, m_g) = √6·Ω / (2√(2J_e+1)) · Σ_q ε_q ⟨J_g m_g; 1 -q | J_e m_e⟩`,
/// i.e. the σ^± components drive Δm = ∓1. This phase convention and the
/// `√6·Ω` reduced Rabi frequency make the 1/2 → 3/2 case coincide with
/// [`build_interaction_explicit`].
pub fn build_interaction_general(sys: &TransitionSystem, drive: RfDrive, o: Orientation) -> CouplingBlock {
    let eps = decompose_polarization(o);
    let one = AngularMomentum::from_twice(2);
    let scale = 6f64.sqrt() * drive.rabi() / (2.0 * (sys.je.dim() as f64).sqrt());
    let mut block = CouplingBlock::zeros(sys.je.dim(), sys.jg.dim());
    for (row, two_me) in sys.je.sublevels().enumerate() {
        for (col, two_mg) in sys.jg.sublevels().enumerate() {
            // Only q = (m_g - m_e) contributes.
            let two_q = two_mg - two_me;
            if two_q.abs() > 2 {
                continue;
            }
            let cg = clebsch_gordan(sys.jg, two_mg, one, -two_q, sys.je, two_me);
            if cg != 0.0 {
                block.set(row, col, eps.component(two_q / 2) * (scale * cg));
            }
        }
    }
    block
}

/// Dense Hermitian matrix in row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl HermitianMatrix {
    /// Validates Hermiticity to `1e-14` relative to the largest entry.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::Dimension(format!("{} entries for dim {dim}", entries.len())));
        }
        let m = Self { dim, entries };
        let residual = m.hermiticity_residual();
        if residual > HERMITICITY_TOL * m.norm_max().max(1.0) {
            return Err(Error::NotHermitian { residual });
        }
        Ok(m)
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> C64) -> Result<Self> {
        let entries = (0..dim * dim).map(|k| f(k / dim, k % dim)).collect();
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    /// `max |H_ij - conj(H_ji)|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn norm_max(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }
}

/// Puts the interaction block and the bare detuning together.
pub fn assemble_hamiltonian(m_i: &CouplingBlock, detuning: f64) -> Result<HermitianMatrix> {
    let (ne, ng) = (m_i.rows(), m_i.cols());
    if ne == 0 || ng == 0 {
        return Err(Error::Dimension("empty interaction block".into()));
    }
    let dim = ng + ne;
    HermitianMatrix::from_fn(dim, |i, j| match (i < ng, j < ng) {
        (true, true) => C64::new(0.0, 0.0),
        (true, false) => m_i.get(j - ng, i).conj(),
        (false, true) => m_i.get(i - ng, j),
        (false, false) if i == j => C64::new(-detuning, 0.0),
        (false, false) => C64::new(0.0, 0.0),
    })
}

/// Full Hamiltonian for a system, drive and polarization.
pub fn hamiltonian(sys: &TransitionSystem, drive: RfDrive, o: Orientation) -> HermitianMatrix {
    assemble_hamiltonian(&build_interaction_general(sys, drive, o), drive.detuning())
        .expect("interaction blocks are never empty")
}

/// Real eigenvalues, ascending.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenSpectrum {
    values: Vec<f64>,
}

impl EigenSpectrum {
    pub fn from_unsorted(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Largest elementwise difference to another spectrum of the same length.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// All eigenvalues of a Hermitian matrix (Householder tridiagonalization and
/// implicit QR).
pub fn eigen_hermitian(h: &HermitianMatrix) -> EigenSpectrum {
    let values = h.to_nalgebra().symmetric_eigenvalues();
    EigenSpectrum::from_unsorted(values.iter().copied().collect())
}

/// The six closed-form eigenvalues of the 1/2 → 3/2 Hamiltonian.
///
/// `λ = -Δ` twice, then `-(Δ ± √(Δ² + Ω²(1 ± sin χ cos χ sin φ)))/2`.
pub fn eigen_closed_form(drive: RfDrive, o: Orientation) -> EigenSpectrum {
    let (d, w) = (drive.detuning(), drive.rabi());
    let tilt = o.chi().sin() * o.chi().cos() * o.phi().sin();
    let branch = |factor: f64| {
        let root = (d * d + w * w * factor).sqrt();
        [-0.5 * (d + root), -0.5 * (d - root)]
    };
    let [l3, l4] = branch(1.0 + tilt);
    let [l5, l6] = branch(1.0 - tilt);
    EigenSpectrum::from_unsorted(vec![-d, -d, l3, l4, l5, l6])
}
