//! Independent Helmholtz oracle: RK4 integration of the 1D wave equation
//! through a cell stack, shared by the oracle and acceptance tests.

use num_complex::Complex64 as C64;
use rydant::cellfield::{transfer_matrix_field, CellGeometry, Polarization};
use rydant::units::wavelength;

struct Oracle {
    k0: f64,
    kz: f64,
    pol: Polarization,
}

impl Oracle {
    // Variables (u, w) with u the tangential field, w = u'/η, η = 1 (TE) or ε (TM).
    fn eta(&self, eps: C64) -> C64 {
        match self.pol {
            Polarization::TE => C64::new(1.0, 0.0),
            Polarization::TM => eps,
        }
    }

    fn rhs(&self, eps: C64, (u, w): (C64, C64)) -> (C64, C64) {
        let eta = self.eta(eps);
        let coupling = (eps * self.k0 * self.k0 - self.kz * self.kz) / eta;
        (eta * w, -coupling * u)
    }

    fn rk4(&self, eps: C64, y: (C64, C64), h: f64) -> (C64, C64) {
        let add = |a: (C64, C64), b: (C64, C64), s: f64| (a.0 + b.0 * s, a.1 + b.1 * s);
        let k1 = self.rhs(eps, y);
        let k2 = self.rhs(eps, add(y, k1, h / 2.0));
        let k3 = self.rhs(eps, add(y, k2, h / 2.0));
        let k4 = self.rhs(eps, add(y, k3, h));
        (
            y.0 + (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0) * (h / 6.0),
            y.1 + (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1) * (h / 6.0),
        )
    }

    fn e_magnitude(&self, eps: C64, (u, w): (C64, C64)) -> f64 {
        match self.pol {
            Polarization::TE => u.norm(),
            Polarization::TM => {
                let du = eps * w;
                ((self.kz * u).norm_sqr() + du.norm_sqr()).sqrt() / (self.k0 * eps.norm())
            }
        }
    }
}

/// |E| at `samples` evenly spaced interior points, by backward integration
/// from a unit outgoing wave.
pub fn integrate_profile(
    geom: &CellGeometry,
    frequency: f64,
    angle: f64,
    pol: Polarization,
    samples: usize,
) -> Vec<f64> {
    let k0 = std::f64::consts::TAU / wavelength(frequency);
    let oracle = Oracle {
        k0,
        kz: k0 * angle.sin(),
        pol,
    };
    let vacuum = C64::new(1.0, 0.0);
    let kx_vac = C64::new(k0 * angle.cos(), 0.0);
    let wall = geom.wall_index * geom.wall_index;
    let inner = geom.inner_index * geom.inner_index;
    let k_max = k0 * geom.wall_index.norm().max(geom.inner_index.norm());
    let h_target = 0.004 / k_max;

    let mut y = (C64::new(1.0, 0.0), C64::i() * kx_vac / oracle.eta(vacuum));
    let steps = |len: f64| (len / h_target).ceil() as usize;

    // Exit wall.
    let n = steps(geom.wall_thickness);
    for _ in 0..n {
        y = oracle.rk4(wall, y, -geom.wall_thickness / n as f64);
    }
    // Interior, recording at sample positions from the far end.
    let intervals = samples - 1;
    let sub = steps(geom.inner_length / intervals as f64).max(1);
    let h = -geom.inner_length / (intervals * sub) as f64;
    let mut recorded = vec![y];
    for _ in 0..intervals {
        for _ in 0..sub {
            y = oracle.rk4(inner, y, h);
        }
        recorded.push(y);
    }
    recorded.reverse();
    // Entry wall.
    for _ in 0..n {
        y = oracle.rk4(wall, y, -geom.wall_thickness / n as f64);
    }
    // Decompose into incident and reflected waves in vacuum.
    let du = oracle.eta(vacuum) * y.1;
    let incident = 0.5 * (y.0 + du / (C64::i() * kx_vac));
    recorded
        .into_iter()
        .map(|s| oracle.e_magnitude(inner, s) / incident.norm())
        .collect()
}

pub fn max_relative_error(geom: &CellGeometry, frequency: f64, angle: f64, pol: Polarization) -> f64 {
    let samples = 101;
    let tmm = transfer_matrix_field(geom, frequency, angle, pol, samples).unwrap();
    let ode = integrate_profile(geom, frequency, angle, pol, samples);
    let scale = tmm.amplitude.iter().copied().fold(0.0, f64::max);
    tmm.amplitude
        .iter()
        .zip(&ode)
        .map(|(a, b)| (a - b).abs() / scale)
        .fold(0.0, f64::max)
}
