//! Circuit parameter records and unit conversions.
//!
//! Energies are stored as `E/h` in GHz, flux in units of the flux quantum
//! and the external phase bias in radians (sweet spot at `pi`). Angular
//! frequencies in rad/s only appear at the coherence-model boundary.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

/// Von Klitzing constant in ohms (CODATA).
pub const R_K: f64 = 25_812.807;
/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Hz per GHz.
pub const GHZ: f64 = 1e9;

/// Converts an energy given as `E/h` in GHz to an angular frequency `E/hbar` in rad/s.
#[inline]
pub fn ghz_to_rad_per_s(e_ghz: f64) -> f64 {
    2.0 * PI * GHZ * e_ghz
}

/// Inverse of [`ghz_to_rad_per_s`].
#[inline]
pub fn rad_per_s_to_ghz(omega: f64) -> f64 {
    omega / (2.0 * PI * GHZ)
}

/// Flux in units of the flux quantum to phase bias in radians.
#[inline]
pub fn flux_to_phase(flux: f64) -> f64 {
    2.0 * PI * flux
}

/// Energy scales of the single-mode Hamiltonian
/// `4 E_C n^2 + E_L phi^2 / 2 - E_J cos(phi - phi_diff)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitEnergies {
    /// Josephson energy `E_J/h`, GHz.
    pub e_j: f64,
    /// Inductive energy `E_L/h`, GHz.
    pub e_l: f64,
    /// Capacitive energy `E_C/h`, GHz.
    pub e_c: f64,
    /// External phase bias, radians.
    pub phi_diff: f64,
}

impl CircuitEnergies {
    /// Energies biased at the half-flux-quantum sweet spot.
    pub fn at_sweet_spot(e_j: f64, e_l: f64, e_c: f64) -> Self {
        Self {
            e_j,
            e_l,
            e_c,
            phi_diff: PI,
        }
    }

    pub fn with_phi_diff(self, phi_diff: f64) -> Self {
        Self { phi_diff, ..self }
    }

    /// Same circuit with every energy multiplied by `factor`.
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            e_j: self.e_j * factor,
            e_l: self.e_l * factor,
            e_c: self.e_c * factor,
            phi_diff: self.phi_diff,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("e_j", self.e_j)?;
        ensure_non_negative("e_l", self.e_l)?;
        ensure_positive("e_c", self.e_c)?;
        if !self.phi_diff.is_finite() {
            return Err(Error::InvalidParameter {
                name: "phi_diff",
                value: self.phi_diff,
                reason: "must be finite",
            });
        }
        Ok(())
    }

    pub fn is_sweet_spot(&self) -> bool {
        (self.phi_diff - PI).abs() <= 1e-12
    }

    /// `E_J / E_L`; infinite for a vanishing inductive shunt.
    pub fn ratio(&self) -> f64 {
        self.e_j / self.e_l
    }
}

/// Rescaled quadratic and quartic potential coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessPotential {
    pub eps2: f64,
    pub eps4: f64,
}

impl DimensionlessPotential {
    pub fn new(eps2: f64, eps4: f64) -> Result<Self> {
        ensure_non_negative("eps2", eps2)?;
        ensure_non_negative("eps4", eps4)?;
        if eps2 == 0.0 && eps4 == 0.0 {
            return Err(Error::DegeneratePotential);
        }
        Ok(Self { eps2, eps4 })
    }

    /// Circuit energies reproducing this potential for a given `E_C`.
    pub fn to_energies(&self, e_c: f64) -> CircuitEnergies {
        CircuitEnergies::at_sweet_spot(
            4.0 * e_c * self.eps4,
            4.0 * e_c * (self.eps2 + self.eps4),
            e_c,
        )
    }
}

/// Noise and control parameters entering the coherence and fidelity models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseEnvironment {
    /// Flux-noise amplitude at 1 Hz, in units of the flux quantum.
    pub a_phi: f64,
    /// Dielectric quality factor.
    pub q_diel: f64,
    /// Bath temperature, K.
    pub temperature: f64,
    /// Infrared cutoff of the 1/f spectrum, rad/s.
    pub omega_ir: f64,
    /// Gate-duration pulse parameter.
    pub nu: f64,
}

impl NoiseEnvironment {
    pub const DEFAULT_OMEGA_IR: f64 = 1e3;
    pub const DEFAULT_NU: f64 = 1.0;

    /// Noise figures of the first measured unimon devices.
    pub fn first_unimon() -> Self {
        Self {
            a_phi: 15.0e-6,
            q_diel: 3.5e5,
            temperature: 0.025,
            omega_ir: Self::DEFAULT_OMEGA_IR,
            nu: Self::DEFAULT_NU,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("a_phi", self.a_phi)?;
        ensure_positive("q_diel", self.q_diel)?;
        ensure_positive("temperature", self.temperature)?;
        ensure_positive("omega_ir", self.omega_ir)?;
        ensure_positive("nu", self.nu)
    }

    pub fn with_a_phi(self, a_phi: f64) -> Self {
        Self { a_phi, ..self }
    }

    pub fn with_q_diel(self, q_diel: f64) -> Self {
        Self { q_diel, ..self }
    }

    pub fn with_temperature(self, temperature: f64) -> Self {
        Self {
            temperature,
            ..self
        }
    }
}

impl Default for NoiseEnvironment {
    fn default() -> Self {
        Self::first_unimon()
    }
}

/// `eps2 = (E_L - E_J)/(4 E_C)`, `eps4 = E_J/(4 E_C)`.
pub fn to_dimensionless(c: &CircuitEnergies) -> Result<DimensionlessPotential> {
    c.validate()?;
    if c.e_l < c.e_j {
        return Err(Error::DoubleWell {
            e_j: c.e_j,
            e_l: c.e_l,
        });
    }
    let scale = 4.0 * c.e_c;
    DimensionlessPotential::new((c.e_l - c.e_j) / scale, c.e_j / scale)
}

/// Qubit-mode impedance `(R_K / 4 pi) sqrt(2 E_C / E_L)` in ohms.
pub fn impedance(c: &CircuitEnergies) -> Result<f64> {
    impedance_with_rk(c, R_K)
}

/// [`impedance`] with an explicit resistance quantum.
pub fn impedance_with_rk(c: &CircuitEnergies, r_k: f64) -> Result<f64> {
    c.validate()?;
    if c.e_l <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "e_l",
            value: c.e_l,
            reason: "impedance undefined without an inductive shunt",
        });
    }
    Ok(r_k / (4.0 * PI) * (2.0 * c.e_c / c.e_l).sqrt())
}

/// `E_C / E_L` implied by a mode impedance.
pub fn charging_to_inductive_ratio(z: f64) -> f64 {
    let x = 4.0 * PI * z / R_K;
    0.5 * x * x
}

/// Characteristic impedance of a CPW embedding a central junction, `Z / sqrt(12)`.
pub fn cpw_characteristic_impedance(z: f64) -> Result<f64> {
    ensure_positive("z", z)?;
    Ok(z / 12f64.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn dimensionless_table_one() {
        let p = to_dimensionless(&CircuitEnergies::at_sweet_spot(19.0, 25.2, 0.297)).unwrap();
        // (25.2 - 19.0) / 1.188 and 19.0 / 1.188
        assert_relative_eq!(p.eps2, 6.2 / 1.188, max_relative = 1e-15);
        assert_relative_eq!(p.eps4, 19.0 / 1.188, max_relative = 1e-15);
        assert!((p.eps2 - 5.2189).abs() < 1e-4);
        assert!((p.eps4 - 15.9933).abs() < 1e-4);
    }

    #[test]
    fn dimensionless_limits() {
        let p = to_dimensionless(&CircuitEnergies::at_sweet_spot(0.0, 4.0, 1.0)).unwrap();
        assert_eq!((p.eps2, p.eps4), (1.0, 0.0));
        let p = to_dimensionless(&CircuitEnergies::at_sweet_spot(4.0, 4.0, 1.0)).unwrap();
        assert_eq!((p.eps2, p.eps4), (0.0, 1.0));
    }

    #[test]
    fn dimensionless_rejects_bad_inputs() {
        let e = to_dimensionless(&CircuitEnergies::at_sweet_spot(6.27, 0.8, 1.41)).unwrap_err();
        assert!(matches!(e, Error::DoubleWell { .. }));
        let e = to_dimensionless(&CircuitEnergies::at_sweet_spot(1.0, 2.0, 0.0)).unwrap_err();
        assert!(matches!(e, Error::InvalidParameter { name: "e_c", .. }));
        let e = to_dimensionless(&CircuitEnergies::at_sweet_spot(0.0, 0.0, 1.0)).unwrap_err();
        assert_eq!(e, Error::DegeneratePotential);
    }

    #[test]
    fn impedance_values() {
        let z = impedance(&CircuitEnergies::at_sweet_spot(19.0, 25.2, 0.297)).unwrap();
        assert!((z - 315.0).abs() / 315.0 < 5e-3, "{z}");
        let z = impedance(&CircuitEnergies::at_sweet_spot(6.27, 0.80, 1.41)).unwrap();
        assert!((z / 1000.0 - 3.9).abs() < 0.05, "{z}");
        let z = impedance(&CircuitEnergies::at_sweet_spot(0.0, 2.0, 1.0)).unwrap();
        assert_relative_eq!(z, R_K / (4.0 * PI), max_relative = 1e-15);
        assert!((z - 2054.0).abs() < 1.0);
        assert!(impedance(&CircuitEnergies::at_sweet_spot(1.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn impedance_inverse() {
        let c = CircuitEnergies::at_sweet_spot(1.0, 3.0, 0.4);
        let z = impedance(&c).unwrap();
        assert_relative_eq!(charging_to_inductive_ratio(z), 0.4 / 3.0, max_relative = 1e-13);
    }

    #[test]
    fn cpw_impedance() {
        // tabulated reference values use Z/Z0 of about 3.2-3.3 rather than sqrt(12)
        let z0 = cpw_characteristic_impedance(315.0).unwrap();
        assert!((z0 - 97.1).abs() / 97.1 < 0.1, "{z0}");
        let z0 = cpw_characteristic_impedance(960.0).unwrap();
        assert!((z0 - 300.0).abs() / 300.0 < 0.1, "{z0}");
        assert_relative_eq!(cpw_characteristic_impedance(12f64.sqrt()).unwrap(), 1.0, max_relative = 1e-15);
        assert!(cpw_characteristic_impedance(0.0).is_err());
    }

    #[test]
    fn noise_validation() {
        assert!(NoiseEnvironment::first_unimon().validate().is_ok());
        assert!(NoiseEnvironment::first_unimon().with_a_phi(0.0).validate().is_err());
        assert!(NoiseEnvironment::first_unimon().with_temperature(-1.0).validate().is_err());
    }

    proptest! {
        #[test]
        fn dimensionless_is_homogeneous(ej in 0.0f64..50.0, extra in 0.0f64..50.0, ec in 0.01f64..5.0, s in 1e-3f64..1e3) {
            let c = CircuitEnergies::at_sweet_spot(ej, ej + extra, ec);
            prop_assume!(ej + extra > 0.0);
            let a = to_dimensionless(&c).unwrap();
            let b = to_dimensionless(&c.scaled(s)).unwrap();
            prop_assert!((a.eps2 - b.eps2).abs() <= 1e-12 * a.eps2.max(1.0));
            prop_assert!((a.eps4 - b.eps4).abs() <= 1e-12 * a.eps4.max(1.0));
        }

        #[test]
        fn impedance_is_scale_invariant(el in 0.01f64..50.0, ec in 0.01f64..5.0, s in 1e-3f64..1e3) {
            let c = CircuitEnergies::at_sweet_spot(0.5 * el, el, ec);
            let a = impedance(&c).unwrap();
            let b = impedance(&c.scaled(s)).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }

        #[test]
        fn dimensionless_round_trip(eps2 in 0.0f64..1e3, eps4 in 1e-6f64..1e3, ec in 0.01f64..5.0) {
            let p = DimensionlessPotential::new(eps2, eps4).unwrap();
            let q = to_dimensionless(&p.to_energies(ec)).unwrap();
            prop_assert!((q.eps2 - eps2).abs() <= 1e-12 * (eps2 + eps4));
            prop_assert!((q.eps4 - eps4).abs() <= 1e-12 * eps4);
        }
    }
}
