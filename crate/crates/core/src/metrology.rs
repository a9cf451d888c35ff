//! From dressed-state energies to field amplitudes and gain patterns.
//!
//! The chain is: Autler-Townes splitting `Δ_AT = √(Δ² + Ω²)`, field amplitude
//! `E = √(Δ_AT² − Δ²) / μ` (μ carries ħ), normalized receive gain
//! `20·log10(r / max r)` with `r = Δ_AT / E`, and the isotropic deviation
//! `max(gain) − min(gain)` of a pattern.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::EigenSpectrum;
use crate::units::amplitude_db;

/// Relative tolerance used to cluster the degenerate `-Δ` eigenvalues.
pub const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplittingSource {
    Eigen,
    SpectrumPeaks,
}

/// A measured or computed Autler-Townes splitting (rad/s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplittingResult {
    pub delta_at: f64,
    pub source: SplittingSource,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldEstimate {
    /// V/m.
    pub amplitude: f64,
    pub delta_at: f64,
    pub detuning: f64,
    pub mu: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainSample {
    pub angle: f64,
    /// `Δ_AT / E`.
    pub raw_ratio: f64,
    pub gain_db: f64,
}

/// Removes two eigenvalues equal to `-Δ` and returns the remaining four,
/// ascending.
fn dressed_branches(spec: &EigenSpectrum, detuning: f64) -> Result<[f64; 4]> {
    if spec.len() != 6 {
        return Err(Error::Dimension(format!(
            "expected six eigenvalues, got {}",
            spec.len()
        )));
    }
    let tol = DEGENERACY_TOL * spec.max_abs();
    let mut rest = Vec::with_capacity(4);
    let mut removed = 0;
    // Take the two values closest to -Δ first so solver noise cannot steal a
    // branch value that happens to lie inside the tolerance window.
    let mut by_distance: Vec<usize> = (0..6).collect();
    by_distance.sort_by(|&a, &b| {
        (spec.values()[a] + detuning)
            .abs()
            .total_cmp(&(spec.values()[b] + detuning).abs())
    });
    let pair = [by_distance[0], by_distance[1]];
    for &k in &pair {
        if (spec.values()[k] + detuning).abs() <= tol {
            removed += 1;
        }
    }
    if removed < 2 {
        return Err(Error::NoDegeneratePair);
    }
    for (k, &v) in spec.values().iter().enumerate() {
        if !pair.contains(&k) {
            rest.push(v);
        }
    }
    Ok([rest[0], rest[1], rest[2], rest[3]])
}

/// Autler-Townes splitting from the six eigenvalues of a 1/2 → 3/2
/// Hamiltonian.
///
/// For linear polarization the two dressed branches coincide and the splitting
/// is the gap between the outermost values.
pub fn splitting_from_eigen(spec: &EigenSpectrum, detuning: f64) -> Result<SplittingResult> {
    let [lo, _, _, hi] = dressed_branches(spec, detuning)?;
    Ok(SplittingResult {
        delta_at: hi - lo,
        source: SplittingSource::Eigen,
    })
}

/// Both branch splittings `(outer, inner)`.
///
/// Each branch has one value below and one above `-Δ/2` summing to `-Δ`, so
/// the outermost values pair up and the innermost pair up. They differ only
/// when the polarization is elliptic (`φ ≠ 0`).
pub fn branch_splittings(spec: &EigenSpectrum, detuning: f64) -> Result<(f64, f64)> {
    let [a, b, c, d] = dressed_branches(spec, detuning)?;
    Ok((d - a, c - b))
}

/// Field amplitude from a splitting (`E = √(Δ_AT² − Δ²)/μ`).
pub fn field_from_splitting(delta_at: f64, detuning: f64, mu: f64) -> Result<FieldEstimate> {
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!("dipole moment must be > 0 (got {mu})")));
    }
    let d = detuning.abs();
    // Tolerate last-bit rounding at the boundary `Δ_AT = |Δ|`.
    if delta_at < d * (1.0 - 4.0 * f64::EPSILON) || delta_at.is_nan() {
        return Err(Error::SplittingBelowDetuning { delta_at, detuning });
    }
    let radicand = ((delta_at - d) * (delta_at + d)).max(0.0);
    Ok(FieldEstimate {
        amplitude: radicand.sqrt() / mu,
        delta_at,
        detuning,
        mu,
    })
}

/// Normalizes `(angle, Δ_AT/E)` pairs to the pattern maximum.
pub fn normalized_gain(samples: &[(f64, f64)]) -> Result<Vec<GainSample>> {
    if samples.is_empty() {
        return Err(Error::Empty("gain samples"));
    }
    if let Some(&(_, bad)) = samples.iter().find(|(_, r)| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::NonPositiveRatio(bad));
    }
    let max = samples.iter().map(|s| s.1).fold(f64::MIN, f64::max);
    Ok(samples
        .iter()
        .map(|&(angle, raw_ratio)| GainSample {
            angle,
            raw_ratio,
            gain_db: if raw_ratio == max {
                0.0
            } else {
                amplitude_db(raw_ratio / max)
            },
        })
        .collect())
}

/// `max(gain_db) − min(gain_db)`.
pub fn isotropic_deviation(pattern: &[GainSample]) -> Result<f64> {
    if pattern.is_empty() {
        return Err(Error::Empty("gain pattern"));
    }
    let (lo, hi) = pattern.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
        (lo.min(s.gain_db), hi.max(s.gain_db))
    });
    Ok(hi - lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::Orientation;
    use crate::hamiltonian::{eigen_closed_form, eigen_hermitian, hamiltonian, RfDrive, TransitionSystem};
    use approx::assert_abs_diff_eq;

    fn split(rabi: f64, det: f64) -> f64 {
        let spec = eigen_closed_form(RfDrive::new(rabi, det).unwrap(), Orientation::linear(0.8, 0.3));
        splitting_from_eigen(&spec, det).unwrap().delta_at
    }

    #[test]
    fn splitting_examples() {
        assert_abs_diff_eq!(split(4.0, 3.0), 5.0, epsilon = 1e-14);
        assert_abs_diff_eq!(split(2.0, 0.0), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(split(0.0, 5.0), 5.0, epsilon = 1e-14);
        assert_eq!(split(0.0, 0.0), 0.0);
    }

    #[test]
    fn splitting_from_numeric_spectrum() {
        let sys = TransitionSystem::s_half_to_p_three_halves(1.0).unwrap();
        let drive = RfDrive::new(4.0, -3.0).unwrap();
        let spec = eigen_hermitian(&hamiltonian(&sys, drive, Orientation::linear(1.1, 2.2)));
        let s = splitting_from_eigen(&spec, -3.0).unwrap();
        assert_abs_diff_eq!(s.delta_at, 5.0, epsilon = 1e-12);
        assert_eq!(s.source, SplittingSource::Eigen);
    }

    #[test]
    fn missing_degenerate_pair_rejected() {
        let spec = EigenSpectrum::from_unsorted(vec![-3.0, -2.0, -1.0, 1.0, 2.0, 3.0]);
        assert_eq!(splitting_from_eigen(&spec, 0.0), Err(Error::NoDegeneratePair));
        let short = EigenSpectrum::from_unsorted(vec![0.0, 0.0]);
        assert!(matches!(splitting_from_eigen(&short, 0.0), Err(Error::Dimension(_))));
    }

    #[test]
    fn elliptic_branches_differ() {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
        let spec = eigen_closed_form(
            RfDrive::new(4.0, 0.0).unwrap(),
            Orientation::new(FRAC_PI_4, 0.0, FRAC_PI_2),
        );
        let (outer, inner) = branch_splittings(&spec, 0.0).unwrap();
        assert_abs_diff_eq!(outer, 2.0 * 6f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(inner, 2.0 * 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn field_examples() {
        assert_abs_diff_eq!(
            field_from_splitting(5.0, 3.0, 1.0).unwrap().amplitude,
            4.0,
            epsilon = 1e-15
        );
        assert_eq!(field_from_splitting(5.0, -5.0, 2.5).unwrap().amplitude, 0.0);
        assert!(matches!(
            field_from_splitting(4.9, 5.0, 1.0),
            Err(Error::SplittingBelowDetuning { .. })
        ));
        assert!(field_from_splitting(5.0, 3.0, 0.0).is_err());
    }

    #[test]
    fn gain_examples() {
        let g = normalized_gain(&[(0.0, 3.0), (1.0, 3.0), (2.0, 3.0)]).unwrap();
        assert!(g.iter().all(|s| s.gain_db == 0.0));

        let g = normalized_gain(&[(0.0, 1.0), (1.0, 0.5)]).unwrap();
        assert_eq!(g[0].gain_db, 0.0);
        assert_abs_diff_eq!(g[1].gain_db, -6.0206, epsilon = 1e-4);

        let g = normalized_gain(&[(0.0, 2.0), (1.0, 1.0), (2.0, 4.0)]).unwrap();
        assert_abs_diff_eq!(g[0].gain_db, -6.0206, epsilon = 1e-4);
        assert_abs_diff_eq!(g[1].gain_db, -12.0412, epsilon = 1e-4);
        assert_eq!(g[2].gain_db, 0.0);
    }

    #[test]
    fn gain_errors() {
        assert_eq!(normalized_gain(&[]), Err(Error::Empty("gain samples")));
        assert!(matches!(
            normalized_gain(&[(0.0, 1.0), (1.0, 0.0)]),
            Err(Error::NonPositiveRatio(_))
        ));
        assert!(isotropic_deviation(&[]).is_err());
    }

    fn pattern(gains: &[f64]) -> Vec<GainSample> {
        gains
            .iter()
            .map(|&g| GainSample {
                angle: 0.0,
                raw_ratio: 1.0,
                gain_db: g,
            })
            .collect()
    }

    #[test]
    fn deviation_examples() {
        assert_eq!(isotropic_deviation(&pattern(&[0.0, 0.0, 0.0])).unwrap(), 0.0);
        assert_abs_diff_eq!(isotropic_deviation(&pattern(&[0.0, -3.6])).unwrap(), 3.6);
        assert_abs_diff_eq!(isotropic_deviation(&pattern(&[0.0, -0.28])).unwrap(), 0.28);
    }

    #[test]
    fn splitting_grows_with_rabi() {
        let mut last = split(0.0, 1.5);
        for k in 1..50 {
            let next = split(0.2 * k as f64, 1.5);
            assert!(next > last);
            last = next;
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn gain_is_scale_invariant(
                ratios in proptest::collection::vec(1e-3..1e3f64, 1..40),
                scale in 1e-6..1e6f64,
            ) {
                let base: Vec<_> = ratios.iter().enumerate().map(|(k, &r)| (k as f64, r)).collect();
                let scaled: Vec<_> = base.iter().map(|&(a, r)| (a, r * scale)).collect();
                let g1 = normalized_gain(&base).unwrap();
                let g2 = normalized_gain(&scaled).unwrap();
                for (a, b) in g1.iter().zip(&g2) {
                    prop_assert!((a.gain_db - b.gain_db).abs() < 1e-12);
                    prop_assert!(a.gain_db <= 0.0);
                }
                let d1 = isotropic_deviation(&g1).unwrap();
                prop_assert!((d1 - isotropic_deviation(&g2).unwrap()).abs() < 1e-12);
                prop_assert!(d1 >= 0.0);
            }

            #[test]
            fn field_round_trip(rabi in 1e-3..10.0f64, det in -5.0..5.0f64, mu in 0.1..10.0f64) {
                let spec = eigen_closed_form(RfDrive::new(rabi, det).unwrap(), Orientation::linear(0.0, 0.0));
                let s = splitting_from_eigen(&spec, det).unwrap();
                let e = field_from_splitting(s.delta_at, det, mu).unwrap();
                prop_assert!((e.amplitude * mu - rabi).abs() < 1e-10 * rabi.max(1.0));
                let back = ((mu * e.amplitude).powi(2) + det * det).sqrt();
                prop_assert!((back - s.delta_at).abs() < 1e-12 * s.delta_at);
            }
        }
    }
}
