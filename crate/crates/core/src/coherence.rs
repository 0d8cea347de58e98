//! Relaxation and dephasing models.
//!
//! Unit conventions: energies enter as `E/h` in GHz and are converted to
//! `E/hbar` in rad/s here. With that choice the flux-noise prefactor is
//! `mu hbar^2 = 8 pi^3 A^2` (A in flux quanta) and the dielectric prefactor is
//! `eta hbar = 16 / Q`, so
//!
//! ```text
//! Gamma1_flux = 8 pi^3 A^2 (E_L/hbar)^2 / omega01 |<0|phi|1>|^2
//! Gamma1_diel = 16/Q (E_C/hbar) |<0|n|1>|^2 coth(hbar omega01 / 2 k_B T)
//! ```
//!
//! both in 1/s.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::model::{ghz_to_rad_per_s, CircuitEnergies, NoiseEnvironment, HBAR, K_B};

/// Flux-noise prefactor `mu hbar^2`, dimensionless; see the module docs.
pub fn mu_from_psd(a_phi: f64) -> f64 {
    8.0 * PI.powi(3) * a_phi * a_phi
}

/// Dielectric prefactor `eta hbar = 16 / Q`, dimensionless.
pub fn eta_from_q(q_diel: f64) -> f64 {
    16.0 / q_diel
}

/// `coth(hbar omega / 2 k_B T)`; exactly 1 at zero temperature.
pub fn thermal_factor(omega01: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return 1.0;
    }
    let x = HBAR * omega01 / (2.0 * K_B * temperature);
    1.0 / x.tanh()
}

/// Relaxation rate from 1/f flux noise through the inductive shunt.
pub fn gamma1_flux(
    c: &CircuitEnergies,
    env: &NoiseEnvironment,
    phi01: f64,
    omega01: f64,
) -> Result<f64> {
    ensure_positive("omega01", omega01)?;
    let e_l = ghz_to_rad_per_s(c.e_l);
    Ok(mu_from_psd(env.a_phi) * e_l * e_l / omega01 * phi01 * phi01)
}

/// Relaxation rate from dielectric loss in the capacitance.
pub fn gamma1_diel(
    c: &CircuitEnergies,
    env: &NoiseEnvironment,
    n01: f64,
    omega01: f64,
) -> Result<f64> {
    ensure_positive("omega01", omega01)?;
    ensure_non_negative("temperature", env.temperature)?;
    let e_c = ghz_to_rad_per_s(c.e_c);
    Ok(eta_from_q(env.q_diel) * e_c * n01 * n01 * thermal_factor(omega01, env.temperature))
}

/// Relaxation rates in 1/s and the resulting `T1` in s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationBreakdown {
    pub gamma1_flux: f64,
    pub gamma1_diel: f64,
    pub gamma1_total: f64,
    pub t1: f64,
}

impl RelaxationBreakdown {
    pub fn new(gamma1_flux: f64, gamma1_diel: f64) -> Self {
        let gamma1_total = gamma1_flux + gamma1_diel;
        Self {
            gamma1_flux,
            gamma1_diel,
            gamma1_total,
            t1: 1.0 / gamma1_total,
        }
    }

    /// `T1` if only flux noise were present.
    pub fn t1_flux(&self) -> f64 {
        1.0 / self.gamma1_flux
    }

    /// `T1` if only dielectric loss were present.
    pub fn t1_diel(&self) -> f64 {
        1.0 / self.gamma1_diel
    }
}

/// Second-order (curvature) flux-noise dephasing at a sweet spot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingModel {
    /// `d^2 omega01 / d Phi^2`, rad/s per flux quantum squared.
    pub kappa: f64,
    /// `2 |kappa| A^2`, 1/s.
    pub quasirate: f64,
    /// Inverse quasirate, s. Infinite when `kappa = 0`.
    pub t_phi_tilde: f64,
}

impl DephasingModel {
    pub fn new(kappa: f64, env: &NoiseEnvironment) -> Self {
        let quasirate = 2.0 * kappa.abs() * env.a_phi * env.a_phi;
        Self {
            kappa,
            quasirate,
            t_phi_tilde: 1.0 / quasirate,
        }
    }
}

/// Largest time for which the short-time envelope is valid:
/// `min(2 / (|kappa| A^2), 1 / omega_ir)`.
pub fn envelope_time_limit(kappa: f64, env: &NoiseEnvironment) -> f64 {
    let curvature_limit = 2.0 / (kappa.abs() * env.a_phi * env.a_phi);
    curvature_limit.min(1.0 / env.omega_ir)
}

/// Short-time dephasing envelope
/// `f(t) = [1 - 2 i kappa A^2 t ln(1/(omega_ir t))]^(-1/2)`.
pub fn dephasing_envelope(t: f64, kappa: f64, env: &NoiseEnvironment) -> Result<Complex64> {
    ensure_positive("t", t)?;
    if !kappa.is_finite() {
        return Err(Error::InvalidParameter {
            name: "kappa",
            value: kappa,
            reason: "must be finite",
        });
    }
    let limit = envelope_time_limit(kappa, env);
    if t >= limit {
        return Err(Error::EnvelopeDomain { t, limit });
    }
    Ok(envelope_unchecked(t, kappa, env))
}

pub(crate) fn envelope_unchecked(t: f64, kappa: f64, env: &NoiseEnvironment) -> Complex64 {
    let x = 2.0 * kappa * env.a_phi * env.a_phi * t * (1.0 / (env.omega_ir * t)).ln();
    Complex64::new(1.0, -x).sqrt().inv()
}

/// Outcome of the first-order dephasing estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderDephasing {
    /// Dephasing time in s; infinite when flagged.
    pub t_phi: f64,
    pub iterations: usize,
    /// Slope negligible against the reference (sweet spot or numerically flat).
    pub negligible: bool,
}

/// First-order 1/f flux-noise dephasing time
/// `T = [A |d omega01/d Phi| sqrt(2 ln(1/(omega_ir T)))]^-1`,
/// solved self-consistently starting from `t_scale`.
///
/// `reference_slope` is a typical off-sweet-spot slope of the same qubit;
/// slopes below `1e-3` of it are reported as negligible with an infinite time.
pub fn first_order_dephasing_time(
    d_omega_d_phi: f64,
    env: &NoiseEnvironment,
    t_scale: f64,
    reference_slope: f64,
) -> Result<FirstOrderDephasing> {
    ensure_positive("t_scale", t_scale)?;
    ensure_non_negative("reference_slope", reference_slope)?;
    let slope = d_omega_d_phi.abs();
    let flagged = FirstOrderDephasing {
        t_phi: f64::INFINITY,
        iterations: 0,
        negligible: true,
    };
    if slope == 0.0 || slope < 1e-3 * reference_slope {
        return Ok(flagged);
    }

    const MAX_ITER: usize = 20;
    let mut t = t_scale;
    for i in 1..=MAX_ITER {
        let log = (1.0 / (env.omega_ir * t)).ln();
        if log <= 0.0 {
            // the time scale reaches the infrared cutoff
            return Ok(FirstOrderDephasing {
                iterations: i,
                ..flagged
            });
        }
        let next = 1.0 / (env.a_phi * slope * (2.0 * log).sqrt());
        let change = ((next - t) / next).abs();
        t = next;
        if change < 1e-3 {
            return Ok(FirstOrderDephasing {
                t_phi: t,
                iterations: i,
                negligible: false,
            });
        }
    }
    Err(Error::NoConvergence {
        what: "first-order dephasing fixed point",
        iterations: MAX_ITER,
        residual: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn env() -> NoiseEnvironment {
        NoiseEnvironment::first_unimon()
    }

    #[test]
    fn prefactor_scaling() {
        assert!((mu_from_psd(2e-6) / mu_from_psd(1e-6) - 4.0).abs() < 1e-12);
        assert!((eta_from_q(3.5e6) * 10.0 - eta_from_q(3.5e5)).abs() < 1e-18);
        assert_eq!(eta_from_q(f64::INFINITY), 0.0);
    }

    #[test]
    fn thermal_factor_limits() {
        assert_eq!(thermal_factor(1e10, 0.0), 1.0);
        assert!((thermal_factor(2.0 * PI * 5e9, 1e-3) - 1.0).abs() < 1e-12);
        // high temperature: coth x ~ 1/x
        let w = 2.0 * PI * 1e6;
        let x = HBAR * w / (2.0 * K_B * 1.0);
        assert!((thermal_factor(w, 1.0) * x - 1.0).abs() < 1e-6);
    }

    #[test]
    fn harmonic_flux_rate_closed_form() {
        let c = CircuitEnergies::at_sweet_spot(0.0, 25.2, 0.297);
        let omega = ghz_to_rad_per_s((8.0f64 * c.e_c * c.e_l).sqrt());
        let phi01_sq = (2.0 * c.e_c / c.e_l).sqrt();
        let g = gamma1_flux(&c, &env(), phi01_sq.sqrt(), omega).unwrap();
        let e_l = ghz_to_rad_per_s(c.e_l);
        let closed = mu_from_psd(env().a_phi) * e_l * e_l * phi01_sq / omega;
        assert!((g / closed - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rates_reject_bad_frequency() {
        let c = CircuitEnergies::at_sweet_spot(19.0, 25.2, 0.297);
        assert!(gamma1_flux(&c, &env(), 0.5, 0.0).is_err());
        assert!(gamma1_diel(&c, &env(), 0.5, -1.0).is_err());
    }

    #[test]
    fn diel_rate_grows_with_temperature() {
        let c = CircuitEnergies::at_sweet_spot(19.0, 25.2, 0.297);
        let w = ghz_to_rad_per_s(0.5);
        let mut last = 0.0;
        for t in [0.01, 0.02, 0.05, 0.1, 0.3] {
            let g = gamma1_diel(&c, &env().with_temperature(t), 1.0, w).unwrap();
            assert!(g > last);
            last = g;
        }
    }

    #[test]
    fn breakdown_is_additive() {
        let r = RelaxationBreakdown::new(1e3, 2.5e3);
        assert_eq!(r.gamma1_total, 3.5e3);
        assert_eq!(r.t1, 1.0 / 3.5e3);
        let d = DephasingModel::new(-4.0e12, &env());
        assert!((d.quasirate - 2.0 * 4.0e12 * 15e-6 * 15e-6).abs() < 1e-6);
        assert_eq!(DephasingModel::new(0.0, &env()).t_phi_tilde, f64::INFINITY);
    }

    #[test]
    fn envelope_trivial_cases() {
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(dephasing_envelope(1e-8, 0.0, &env()).unwrap(), one);
        let quiet = NoiseEnvironment {
            a_phi: f64::MIN_POSITIVE,
            ..env()
        };
        assert_eq!(dephasing_envelope(1e-8, 7e12, &quiet).unwrap(), one);
    }

    #[test]
    fn envelope_domain_is_enforced() {
        let kappa = 7e12;
        let limit = envelope_time_limit(kappa, &env());
        assert!(matches!(
            dephasing_envelope(limit * 1.01, kappa, &env()),
            Err(Error::EnvelopeDomain { .. })
        ));
        assert!(dephasing_envelope(2e-3, 0.0, &env()).is_err());
        assert!(dephasing_envelope(0.0, kappa, &env()).is_err());
    }

    #[test]
    fn envelope_real_part_decreases() {
        // the log factor peaks at t = 1/(e omega_ir); beyond it the phase shrinks again
        let kappa = 7e12;
        let limit = envelope_time_limit(kappa, &env()).min(1.0 / (std::f64::consts::E * env().omega_ir));
        let mut last = 1.0;
        for i in 1..2000 {
            let t = limit * i as f64 / 2000.0;
            let f = dephasing_envelope(t, kappa, &env()).unwrap();
            assert!(f.norm() <= 1.0 + 1e-15);
            assert!(f.re < last, "t = {t}");
            last = f.re;
        }
    }

    #[test]
    fn first_order_flags_sweet_spot() {
        let r = first_order_dephasing_time(0.0, &env(), 1e-6, 1e9).unwrap();
        assert!(r.negligible && r.t_phi.is_infinite());
        let r = first_order_dephasing_time(1e5, &env(), 1e-6, 1e9).unwrap();
        assert!(r.negligible);
    }

    #[test]
    fn first_order_is_self_consistent() {
        let e = env();
        let slope = 2e10;
        let r = first_order_dephasing_time(slope, &e, 1e-6, 0.0).unwrap();
        assert!(!r.negligible && r.iterations <= 20);
        let back = 1.0 / (e.a_phi * slope * (2.0 * (1.0 / (e.omega_ir * r.t_phi)).ln()).sqrt());
        assert!((back / r.t_phi - 1.0).abs() < 2e-3);
        let doubled = first_order_dephasing_time(2.0 * slope, &e, 1e-6, 0.0).unwrap();
        let ratio = r.t_phi / doubled.t_phi;
        assert!(ratio > 2.0 && ratio < 2.3, "{ratio}");
    }

    proptest! {
        #[test]
        fn envelope_conjugation(kappa in 1e9f64..1e14, frac in 0.001f64..0.999) {
            let e = env();
            let t = envelope_time_limit(kappa, &e) * frac;
            let a = dephasing_envelope(t, kappa, &e).unwrap();
            let b = dephasing_envelope(t, -kappa, &e).unwrap();
            prop_assert!((a.conj() - b).norm() < 1e-14);
        }

        #[test]
        fn total_is_sum(f in 0.0f64..1e6, d in 0.0f64..1e6) {
            let r = RelaxationBreakdown::new(f, d);
            prop_assert_eq!(r.gamma1_total, f + d);
        }
    }
}
