//! Angular-momentum algebra and polarization decomposition.
//!
//! Half-integer quantum numbers are stored doubled (`two_j`, `two_m`) so that
//! every value is an exact integer.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Largest supported `two_j` (J = 9/2).
pub const MAX_TWO_J: u32 = 9;

/// An angular momentum quantum number J, stored as `2J`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AngularMomentum {
    two_j: u32,
}

impl AngularMomentum {
    pub const fn from_twice(two_j: u32) -> Self {
        Self { two_j }
    }

    pub const fn half() -> Self {
        Self { two_j: 1 }
    }

    pub const fn three_halves() -> Self {
        Self { two_j: 3 }
    }

    pub const fn two_j(self) -> u32 {
        self.two_j
    }

    pub fn value(self) -> f64 {
        self.two_j as f64 / 2.0
    }

    /// Number of magnetic sublevels, `2J + 1`.
    pub const fn dim(self) -> usize {
        self.two_j as usize + 1
    }

    /// Doubled magnetic quantum numbers `2m` from `-2J` to `2J`, ascending.
    pub fn sublevels(self) -> impl Iterator<Item = i32> + Clone {
        let two_j = self.two_j as i32;
        (0..=self.two_j as i32).map(move |k| -two_j + 2 * k)
    }

    /// Position of sublevel `two_m` in [`sublevels`](Self::sublevels) order.
    pub fn index_of(self, two_m: i32) -> Option<usize> {
        let two_j = self.two_j as i32;
        if two_m.abs() > two_j || (two_j - two_m) % 2 != 0 {
            return None;
        }
        Some(((two_m + two_j) / 2) as usize)
    }
}

impl fmt::Display for AngularMomentum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.two_j.is_multiple_of(2) {
            write!(f, "{}", self.two_j / 2)
        } else {
            write!(f, "{}/2", self.two_j)
        }
    }
}

fn factorial(n: u32) -> u128 {
    (1..=n as u128).product()
}

fn factorial_f64(n: i32) -> f64 {
    debug_assert!(n >= 0);
    factorial(n as u32) as f64
}

fn is_valid_projection(two_j: i32, two_m: i32) -> bool {
    two_m.abs() <= two_j && (two_j - two_m) % 2 == 0
}

/// Clebsch-Gordan coefficient ⟨j1 m1; j2 m2 | J M⟩ in the Condon-Shortley
/// convention, via Racah's closed-form sum. Magnetic numbers are doubled.
///
/// Returns 0 for any combination that is not allowed (projection out of
/// range, `m1 + m2 != M`, triangle rule or parity violated).
pub fn clebsch_gordan(
    j1: AngularMomentum,
    two_m1: i32,
    j2: AngularMomentum,
    two_m2: i32,
    j: AngularMomentum,
    two_m: i32,
) -> f64 {
    let (a, b, c) = (j1.two_j as i32, j2.two_j as i32, j.two_j as i32);
    if !is_valid_projection(a, two_m1)
        || !is_valid_projection(b, two_m2)
        || !is_valid_projection(c, two_m)
        || two_m1 + two_m2 != two_m
    {
        return 0.0;
    }
    if c < (a - b).abs() || c > a + b || (a + b + c) % 2 != 0 {
        return 0.0;
    }

    // All the following halves are integers thanks to the parity checks above.
    let half = |x: i32| x / 2;
    let s_ab_c = half(a + b - c);
    let s_ac_b = half(a - b + c);
    let s_bc_a = half(-a + b + c);
    let s_abc1 = half(a + b + c) + 1;

    let triangle = (c as f64 + 1.0)
        * (factorial(s_ab_c as u32) * factorial(s_ac_b as u32) * factorial(s_bc_a as u32)) as f64
        / factorial(s_abc1 as u32) as f64;

    let projections = [
        half(c + two_m),
        half(c - two_m),
        half(a - two_m1),
        half(a + two_m1),
        half(b - two_m2),
        half(b + two_m2),
    ];
    let proj: u128 = projections.iter().map(|&n| factorial(n as u32)).product();

    let k_min = 0.max(half(b - c - two_m1)).max(half(a - c + two_m2));
    let k_max = s_ab_c.min(half(a - two_m1)).min(half(b + two_m2));

    let mut sum = 0.0;
    for k in k_min..=k_max {
        let denom = factorial_f64(k)
            * factorial_f64(s_ab_c - k)
            * factorial_f64(half(a - two_m1) - k)
            * factorial_f64(half(b + two_m2) - k)
            * factorial_f64(half(c - b + two_m1) + k)
            * factorial_f64(half(c - a - two_m2) + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / denom;
    }

    (triangle * proj as f64).sqrt() * sum
}

/// Direction of a linear-or-elliptic RF polarization relative to the quantum
/// axis Z.
///
/// `chi` is the inclination from Z, `theta` the azimuth of the XY projection
/// measured from X, and `phi` the relative phase between the Z component and
/// the XY-plane component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    chi: f64,
    theta: f64,
    phi: f64,
}

fn wrap_tau(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl Orientation {
    /// Builds an orientation, folding the angles into their canonical ranges.
    ///
    /// An inclination outside `[0, π]` is reflected through the quantum axis
    /// (`chi -> 2π - chi`, `theta -> theta + π`), which describes the same
    /// direction.
    pub fn new(chi: f64, theta: f64, phi: f64) -> Self {
        let mut chi = wrap_tau(chi);
        let mut theta = theta;
        if chi > PI {
            chi = TAU - chi;
            theta += PI;
        }
        Self {
            chi,
            theta: wrap_tau(theta),
            phi: wrap_tau(phi),
        }
    }

    /// Linear polarization (`phi = 0`).
    pub fn linear(chi: f64, theta: f64) -> Self {
        Self::new(chi, theta, 0.0)
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Spherical-basis components of a unit polarization vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalPolarization {
    /// σ⁻ component, q = -1.
    pub eps_minus: C64,
    /// π component, q = 0.
    pub eps_zero: C64,
    /// σ⁺ component, q = +1.
    pub eps_plus: C64,
}

impl SphericalPolarization {
    /// Component for spherical index `q ∈ {-1, 0, 1}`.
    pub fn component(&self, q: i32) -> C64 {
        match q {
            -1 => self.eps_minus,
            0 => self.eps_zero,
            1 => self.eps_plus,
            _ => C64::new(0.0, 0.0),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.eps_minus.norm_sqr() + self.eps_zero.norm_sqr() + self.eps_plus.norm_sqr()
    }
}

/// Decomposes `ε = cos χ ẑ + sin χ e^{iφ} (cos θ x̂ + sin θ ŷ)` into
/// `ε_q`, with `ε_{±1} = ∓(ε_x ± i ε_y)/√2` and `ε_0 = ε_z`.
pub fn decompose_polarization(o: Orientation) -> SphericalPolarization {
    let (sin_chi, cos_chi) = o.chi.sin_cos();
    let transverse = FRAC_1_SQRT_2 * sin_chi;
    SphericalPolarization {
        eps_minus: C64::from_polar(transverse, o.phi - o.theta),
        eps_zero: C64::new(cos_chi, 0.0),
        eps_plus: -C64::from_polar(transverse, o.phi + o.theta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const HALF: AngularMomentum = AngularMomentum::half();
    const ONE: AngularMomentum = AngularMomentum::from_twice(2);
    const THREE_HALVES: AngularMomentum = AngularMomentum::three_halves();

    #[test]
    fn sublevels_are_ascending_doubled() {
        assert_eq!(THREE_HALVES.sublevels().collect::<Vec<_>>(), vec![-3, -1, 1, 3]);
        assert_eq!(ONE.sublevels().collect::<Vec<_>>(), vec![-2, 0, 2]);
        assert_eq!(AngularMomentum::from_twice(0).dim(), 1);
        assert_eq!(THREE_HALVES.index_of(1), Some(2));
        assert_eq!(THREE_HALVES.index_of(0), None);
        assert_eq!(THREE_HALVES.to_string(), "3/2");
    }

    #[test]
    fn stretched_state() {
        assert_eq!(clebsch_gordan(HALF, 1, ONE, 2, THREE_HALVES, 3), 1.0);
    }

    #[test]
    fn known_values() {
        assert_abs_diff_eq!(
            clebsch_gordan(HALF, -1, ONE, 0, THREE_HALVES, -1),
            (2.0f64 / 3.0).sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            clebsch_gordan(HALF, 1, ONE, -2, THREE_HALVES, -1),
            (1.0f64 / 3.0).sqrt(),
            epsilon = 1e-15
        );
        // ⟨1/2 ±1/2; 1 0 | 1/2 ±1/2⟩ = ±1/√3, opposite order flips the sign.
        assert_abs_diff_eq!(
            clebsch_gordan(HALF, 1, ONE, 0, HALF, 1),
            (1.0f64 / 3.0).sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            clebsch_gordan(HALF, -1, ONE, 0, HALF, -1),
            -(1.0f64 / 3.0).sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            clebsch_gordan(ONE, 0, HALF, 1, HALF, 1),
            -(1.0f64 / 3.0).sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn forbidden_combinations_vanish() {
        assert_eq!(clebsch_gordan(HALF, 1, ONE, 0, THREE_HALVES, 3), 0.0);
        assert_eq!(clebsch_gordan(HALF, 1, ONE, 0, AngularMomentum::from_twice(5), 1), 0.0);
        assert_eq!(clebsch_gordan(HALF, 3, ONE, 0, THREE_HALVES, 3), 0.0);
        assert_eq!(clebsch_gordan(HALF, 0, ONE, 0, THREE_HALVES, 0), 0.0);
    }

    #[test]
    fn orthogonality_half_times_one() {
        let couplings = [HALF, THREE_HALVES];
        let mut states = Vec::new();
        for &j in &couplings {
            for m in j.sublevels() {
                states.push((j, m));
            }
        }
        for &(ja, ma) in &states {
            for &(jb, mb) in &states {
                let mut overlap = 0.0;
                for m1 in HALF.sublevels() {
                    for m2 in ONE.sublevels() {
                        overlap +=
                            clebsch_gordan(HALF, m1, ONE, m2, ja, ma) * clebsch_gordan(HALF, m1, ONE, m2, jb, mb);
                    }
                }
                let expected = if (ja, ma) == (jb, mb) { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(overlap, expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn orientation_wraps_into_range() {
        let o = Orientation::new(-0.3, 7.0, -1.0);
        assert_abs_diff_eq!(o.chi(), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(o.theta(), (7.0 + PI) - TAU, epsilon = 1e-12);
        assert_abs_diff_eq!(o.phi(), TAU - 1.0, epsilon = 1e-15);
        let o = Orientation::new(PI, TAU, 0.0);
        assert_eq!(o.chi(), PI);
        assert_eq!(o.theta(), 0.0);
    }

    #[test]
    fn pure_pi_polarization() {
        let p = decompose_polarization(Orientation::new(0.0, 1.3, 0.4));
        assert_abs_diff_eq!(p.eps_zero.re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.eps_plus.norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.eps_minus.norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn transverse_x_polarization() {
        let p = decompose_polarization(Orientation::linear(PI / 2.0, 0.0));
        assert_abs_diff_eq!(p.eps_minus.re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(p.eps_zero.norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.eps_plus.re, -FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn tilted_polarization() {
        let p = decompose_polarization(Orientation::linear(PI / 4.0, 0.0));
        assert_abs_diff_eq!(p.eps_minus.re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.eps_zero.re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(p.eps_plus.re, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.eps_plus.im, 0.0, epsilon = 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]

            #[test]
            fn polarization_is_unit_and_balanced(chi in 0.0..PI, theta in 0.0..TAU, phi in 0.0..TAU) {
                let p = decompose_polarization(Orientation::new(chi, theta, phi));
                prop_assert!((p.norm_sqr() - 1.0).abs() < 1e-12);
                prop_assert!((p.eps_plus.norm() - p.eps_minus.norm()).abs() < 1e-15);
            }
        }
    }
}
