//! Closed-form variational estimates of the three lowest levels at the sweet spot.
//!
//! Trial states are harmonic-oscillator-like functions with free Gaussian
//! widths `theta_n`. The widths minimise the energy of the quartic-truncated
//! Hamiltonian `-d^2 + eps2 phi^2 / 2 + eps4 phi^4 / 24`; each one is the
//! positive root of a depressed cubic
//!
//! ```text
//! theta^3 - (eps2 / 2) theta - (2n + 3) eps4 / 24 = 0,   n = 0, 1, 2
//! ```
//!
//! (for `n = 2` this replaces a septic equation whose root is available via
//! [`septic_root_theta2`]). Energies are then the expectation values of the
//! full cosine Hamiltonian in those states.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{to_dimensionless, CircuitEnergies, DimensionlessPotential};
use crate::numeric::bisect;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnsatzWidths {
    pub theta0: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl AnsatzWidths {
    pub fn get(&self, level: usize) -> f64 {
        match level {
            0 => self.theta0,
            1 => self.theta1,
            _ => self.theta2,
        }
    }
}

/// Variational levels in GHz (`E/h`) and the derived transition frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalSpectrum {
    pub e0: f64,
    pub e1: f64,
    pub e2: f64,
    pub f01: f64,
    pub f12: f64,
    /// Signed anharmonicity `alpha / 2 pi`, GHz.
    pub alpha: f64,
}

fn check_level(level: usize) -> Result<()> {
    if level > 2 {
        return Err(Error::LevelOutOfRange {
            index: level,
            available: 3,
        });
    }
    Ok(())
}

/// Odd integer multiplying `eps4 / 24` in the width cubic of `level`.
fn quartic_weight(level: usize) -> f64 {
    (2 * level + 3) as f64
}

/// Positive real root of the width cubic for `level`.
pub fn theta_root(level: usize, p: &DimensionlessPotential) -> Result<f64> {
    check_level(level)?;
    let DimensionlessPotential { eps2, eps4 } = DimensionlessPotential::new(p.eps2, p.eps4)?;
    let w = quartic_weight(level);
    if eps2 == 0.0 {
        return Ok(0.5 * (w * eps4 / 3.0).cbrt());
    }
    let prefactor = (6.0 * eps2).sqrt() / 3.0;
    let arg = w * 6f64.sqrt() / 8.0 * eps4 / eps2.powf(1.5);
    if arg <= 1.0 {
        Ok(prefactor * (arg.acos() / 3.0).cos())
    } else {
        Ok(prefactor * (arg.acosh() / 3.0).cosh())
    }
}

/// Residual of the width cubic, `theta^3 - eps2 theta / 2 - (2n+3) eps4 / 24`.
pub fn cubic_residual(level: usize, theta: f64, p: &DimensionlessPotential) -> f64 {
    theta.powi(3) - 0.5 * p.eps2 * theta - quartic_weight(level) * p.eps4 / 24.0
}

pub fn ansatz_widths(p: &DimensionlessPotential) -> Result<AnsatzWidths> {
    Ok(AnsatzWidths {
        theta0: theta_root(0, p)?,
        theta1: theta_root(1, p)?,
        theta2: theta_root(2, p)?,
    })
}

/// Polynomial factors `(p0, p1, p2)` of the exact second-level stationarity condition.
pub fn septic_factors(theta0: f64, theta2: f64) -> (f64, f64, f64) {
    let (a, b) = (theta0, theta2);
    let (a2, b2) = (a * a, b * b);
    let p0 = (a + 3.0 * b) * (7.0 * a2 * a + 15.0 * a2 * b + 5.0 * a * b2 + 5.0 * b2 * b);
    let p1 = (3.0 * a + b) * (5.0 * a2 * a + 5.0 * a2 * b + 15.0 * a * b2 + 7.0 * b2 * b);
    let p2 = 105.0 * a2 * a2 + 180.0 * a2 * a * b + 310.0 * a2 * b2 + 244.0 * a * b2 * b + 57.0 * b2 * b2;
    (p0, p1, p2)
}

/// Value of the septic polynomial at `theta2`.
pub fn septic_value(theta0: f64, theta2: f64, p: &DimensionlessPotential) -> f64 {
    let (p0, p1, p2) = septic_factors(theta0, theta2);
    theta2.powi(3) * p0 - 0.5 * p.eps2 * theta2 * p1 - p.eps4 / 24.0 * p2
}

/// Root of the septic stationarity condition for `theta2` given `theta0`.
///
/// Bracketed bisection starting from `[theta0/2, 4 theta0]`, widened geometrically
/// down to `1e-9` and up to `1e9` until a sign change appears.
pub fn septic_root_theta2(theta0: f64, p: &DimensionlessPotential) -> Result<f64> {
    if !(theta0.is_finite() && theta0 > 0.0) {
        return Err(Error::InvalidParameter {
            name: "theta0",
            value: theta0,
            reason: "must be finite and > 0",
        });
    }
    let f = |t: f64| septic_value(theta0, t, p);
    let (mut lo, mut hi) = (0.5 * theta0, 4.0 * theta0);
    while f(lo).signum() == f(hi).signum() {
        if lo <= 1e-9 && hi >= 1e9 {
            return Err(Error::NoSignChange {
                what: "septic width equation",
                lo,
                hi,
            });
        }
        lo = (lo * 0.5).max(1e-9);
        hi = (hi * 2.0).min(1e9);
    }
    bisect(f, lo, hi, 1e-15)
}

/// Normalised trial wavefunction of `level` at phase `phi`.
pub fn ansatz_value(level: usize, widths: &AnsatzWidths, phi: f64) -> f64 {
    match level {
        0 => {
            let t = widths.theta0;
            (t / PI).powf(0.25) * (-0.5 * t * phi * phi).exp()
        }
        1 => {
            let t = widths.theta1;
            (t / PI).powf(0.25) * (2.0 * t).sqrt() * phi * (-0.5 * t * phi * phi).exp()
        }
        _ => {
            let (t0, t) = (widths.theta0, widths.theta2);
            let norm = (3.0 * t0 * t0 + 2.0 * t0 * t + 3.0 * t * t).sqrt();
            (t / PI).powf(0.25) * 2.0 * t * ((t0 + t) * phi * phi - 1.0) / norm
                * (-0.5 * t * phi * phi).exp()
        }
    }
}

/// Closed-form level energies from circuit energies at the sweet spot.
pub fn variational_energies(c: &CircuitEnergies) -> Result<VariationalSpectrum> {
    if !c.is_sweet_spot() {
        return Err(Error::NotSweetSpot {
            phi_diff: c.phi_diff,
        });
    }
    let p = to_dimensionless(c)?;
    let w = ansatz_widths(&p)?;
    Ok(energies_from_widths(c, &w))
}

pub(crate) fn energies_from_widths(c: &CircuitEnergies, w: &AnsatzWidths) -> VariationalSpectrum {
    let (ej, el, ec) = (c.e_j, c.e_l, c.e_c);
    let AnsatzWidths {
        theta0: t0,
        theta1: t1,
        theta2: t2,
    } = *w;

    let e0 = 2.0 * t0 * ec + el / (4.0 * t0) + (-0.25 / t0).exp() * ej;
    let e1 = 6.0 * t1 * ec + 3.0 * el / (4.0 * t1) + (1.0 - 0.5 / t1) * (-0.25 / t1).exp() * ej;

    let den = 3.0 * t0 * t0 + 2.0 * t0 * t2 + 3.0 * t2 * t2;
    let a = (7.0 * t0 * t0 + 18.0 * t0 * t2 + 15.0 * t2 * t2) / den;
    let b = (15.0 * t0 * t0 + 18.0 * t0 * t2 + 7.0 * t2 * t2) / den;
    let cc = (3.0 * t0 * t0 + 4.0 * t0 * t2 + t2 * t2) / den;
    let d = (t0 + t2) * (t0 + t2) / (4.0 * den);
    let e2 = 2.0 * a * t2 * ec
        + b * el / (4.0 * t2)
        + (1.0 - cc / t2 + d / (t2 * t2)) * (-0.25 / t2).exp() * ej;

    VariationalSpectrum {
        e0,
        e1,
        e2,
        f01: e1 - e0,
        f12: e2 - e1,
        alpha: (e2 - e1) - (e1 - e0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::simpson;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pot(eps2: f64, eps4: f64) -> DimensionlessPotential {
        DimensionlessPotential::new(eps2, eps4).unwrap()
    }

    #[test]
    fn theta_closed_form_limits() {
        assert_relative_eq!(theta_root(0, &pot(0.0, 8.0)).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(theta_root(0, &pot(2.0, 0.0)).unwrap(), 1.0, max_relative = 1e-15);
        // third branch for the other levels: (1/2)(w eps4 / 3)^(1/3)
        assert_relative_eq!(
            theta_root(2, &pot(0.0, 24.0)).unwrap(),
            0.5 * 56f64.cbrt(),
            max_relative = 1e-15
        );
        assert!(theta_root(3, &pot(1.0, 1.0)).is_err());
    }

    #[test]
    fn theta2_table_one_root() {
        let p = pot(5.2189, 15.9933);
        let t0 = theta_root(0, &p).unwrap();
        let t2 = theta_root(2, &p).unwrap();
        assert!(t2 >= t0 && t2 < 2.0 * t0);
        assert!(cubic_residual(2, t2, &p).abs() < 1e-12);
        // independent root via bisection on the same cubic
        let b = bisect(|t| cubic_residual(2, t, &p), 1e-6, 100.0, 1e-15).unwrap();
        assert_relative_eq!(t2, b, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_potential_rejected() {
        let p = DimensionlessPotential { eps2: 0.0, eps4: 0.0 };
        assert_eq!(theta_root(0, &p).unwrap_err(), Error::DegeneratePotential);
    }

    #[test]
    fn branch_continuity() {
        // arg = 1 exactly for each level: eps4 = 8 eps2^(3/2) / (w sqrt 6)
        for level in 0..3 {
            let eps2 = 2.0f64;
            let w = quartic_weight(level);
            let eps4 = 8.0 * eps2.powf(1.5) / (w * 6f64.sqrt());
            let p = pot(eps2, eps4);
            let prefactor = (6.0 * eps2).sqrt() / 3.0;
            let arg = w * 6f64.sqrt() / 8.0 * eps4 / eps2.powf(1.5);
            let cos_branch = prefactor * (arg.min(1.0).acos() / 3.0).cos();
            let cosh_branch = prefactor * (arg.max(1.0).acosh() / 3.0).cosh();
            assert!((cos_branch - cosh_branch).abs() < 1e-7 * prefactor);
            let t = theta_root(level, &p).unwrap();
            assert!((t - cos_branch).abs() < 1e-7 * prefactor);
            // straddling points agree to first order
            let below = theta_root(level, &pot(eps2, eps4 * (1.0 - 1e-12))).unwrap();
            let above = theta_root(level, &pot(eps2, eps4 * (1.0 + 1e-12))).unwrap();
            assert!((below - above).abs() < 1e-5 * prefactor);
        }
    }

    #[test]
    fn septic_harmonic_limit() {
        let p = pot(2.0, 0.0);
        let t0 = theta_root(0, &p).unwrap();
        let s = septic_root_theta2(t0, &p).unwrap();
        let c = theta_root(2, &p).unwrap();
        assert!((s / c - 1.0).abs() < 1e-3);
    }

    #[test]
    fn septic_quartic_limit() {
        let p = pot(0.0, 24.0);
        let t0 = theta_root(0, &p).unwrap();
        let s = septic_root_theta2(t0, &p).unwrap();
        assert!(septic_value(t0, s, &p).abs() < 1e-9 * septic_factors(t0, s).2);
        let c = 0.5 * (7.0 * 24.0 / 3.0f64).cbrt();
        assert!((s / c - 1.0).abs() < 0.01, "{s} vs {c}");
    }

    #[test]
    fn septic_factor_ratios() {
        for &eps2 in &[1e-6, 1e-3, 1.0, 1e3, 1e6] {
            for &eps4 in &[1e-6, 1e-3, 1.0, 1e3, 1e6] {
                let p = pot(eps2, eps4);
                let t0 = theta_root(0, &p).unwrap();
                let s = septic_root_theta2(t0, &p).unwrap();
                let (p0, p1, p2) = septic_factors(t0, s);
                assert!((p1 / p0 - 1.0).abs() < 0.05, "p1/p0 = {}", p1 / p0);
                assert!((p2 / p0 - 7.0).abs() < 0.35, "p2/p0 = {}", p2 / p0);
            }
        }
    }

    #[test]
    fn harmonic_energies_are_exact() {
        let c = CircuitEnergies::at_sweet_spot(0.0, 25.2, 0.297);
        let s = variational_energies(&c).unwrap();
        let f = (8.0f64 * 0.297 * 25.2).sqrt();
        assert_relative_eq!(s.f01, f, max_relative = 1e-13);
        assert_relative_eq!(s.f12, f, max_relative = 1e-13);
        assert!(s.alpha.abs() < 1e-12 * f);
        assert_relative_eq!(s.e0, 0.5 * f, max_relative = 1e-13);
    }

    #[test]
    fn table_one_frequency() {
        let s = variational_energies(&CircuitEnergies::at_sweet_spot(19.0, 25.2, 0.297)).unwrap();
        assert!((s.f01 - 4.488).abs() / 4.488 < 0.01, "{}", s.f01);
        assert!(s.f12 > s.f01);
        assert_relative_eq!(s.alpha, s.f12 - s.f01, max_relative = 1e-15);
    }

    #[test]
    fn quartic_ceiling() {
        let c = DimensionlessPotential::new(0.0, 1e3).unwrap().to_energies(1.0);
        let s = variational_energies(&c).unwrap();
        let r = s.alpha / s.f01;
        assert!(r > 0.30 && r < 0.36, "{r}");
    }

    #[test]
    fn energies_reject_bad_bias_and_double_well() {
        let c = CircuitEnergies::at_sweet_spot(19.0, 25.2, 0.297).with_phi_diff(3.0);
        assert!(matches!(variational_energies(&c), Err(Error::NotSweetSpot { .. })));
        let c = CircuitEnergies::at_sweet_spot(6.27, 0.8, 1.41);
        assert!(matches!(variational_energies(&c), Err(Error::DoubleWell { .. })));
    }

    #[test]
    fn ansatz_parity_norm_and_orthogonality() {
        let w = ansatz_widths(&pot(5.2189, 15.9933)).unwrap();
        assert_eq!(ansatz_value(1, &w, 0.0), 0.0);
        for n in 0..3 {
            let half = 20.0 / w.get(n).sqrt();
            let norm = simpson(|x| ansatz_value(n, &w, x).powi(2), -half, half, 20_000);
            assert!((norm - 1.0).abs() < 1e-10, "level {n}: {norm}");
        }
        let half = 20.0 / w.theta0.sqrt();
        let overlap = simpson(|x| ansatz_value(0, &w, x) * ansatz_value(2, &w, x), -half, half, 20_000);
        assert!(overlap.abs() < 1e-10, "{overlap}");
    }

    proptest! {
        #[test]
        fn roots_satisfy_cubics(le2 in -6.0f64..6.0, le4 in -6.0f64..6.0) {
            let p = pot(10f64.powf(le2), 10f64.powf(le4));
            let scale = 1f64.max(p.eps2.powf(1.5)).max(p.eps4);
            let w = ansatz_widths(&p).unwrap();
            for n in 0..3 {
                let t = w.get(n);
                prop_assert!(t > 0.0);
                prop_assert!(cubic_residual(n, t, &p).abs() < 1e-10 * scale);
            }
            prop_assert!(w.theta0 <= w.theta1 && w.theta1 <= w.theta2);
            let r = w.theta2 / w.theta0;
            prop_assert!((1.0..2.0).contains(&r));
        }
    }
}
