//! Gate duration models and decoherence-limited average gate infidelity.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::coherence::{
    dephasing_envelope, envelope_time_limit, envelope_unchecked, gamma1_diel, gamma1_flux,
    DephasingModel, RelaxationBreakdown,
};
use crate::eigen::{diagonalize_default, flux_curvature_from, matrix_element_n, matrix_element_phi};
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::model::{ghz_to_rad_per_s, CircuitEnergies, NoiseEnvironment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitingScale {
    Anharmonicity,
    Frequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GatePlan {
    /// Gate duration, s.
    pub t_g: f64,
    pub nu: f64,
    pub limiting_scale: LimitingScale,
}

/// `t_g = 2 pi nu / |alpha|` with `alpha` in rad/s.
pub fn gate_duration(alpha: f64, nu: f64) -> Result<GatePlan> {
    ensure_positive("nu", nu)?;
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::ZeroAnharmonicity);
    }
    Ok(GatePlan {
        t_g: 2.0 * PI * nu / alpha.abs(),
        nu,
        limiting_scale: LimitingScale::Anharmonicity,
    })
}

/// Speed limit `2 pi / min(omega01, |alpha|)` in s, with the scale that sets it.
pub fn gate_speed_limit(omega01: f64, alpha: f64) -> Result<GatePlan> {
    ensure_positive("omega01", omega01)?;
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::ZeroAnharmonicity);
    }
    let (scale, limiting_scale) = if omega01 < alpha.abs() {
        (omega01, LimitingScale::Frequency)
    } else {
        (alpha.abs(), LimitingScale::Anharmonicity)
    };
    Ok(GatePlan {
        t_g: 2.0 * PI / scale,
        nu: 1.0,
        limiting_scale,
    })
}

/// `1 - (3 + exp(-Gamma1 t_g) + 2 exp(-Gamma1 t_g / 2) Re f) / 6`.
pub fn average_gate_infidelity(gamma1: f64, t_g: f64, envelope_re: f64) -> f64 {
    let x = gamma1 * t_g;
    1.0 - (3.0 + (-x).exp() + 2.0 * (-0.5 * x).exp() * envelope_re) / 6.0
}

/// How the pipeline treats gate durations outside the envelope's domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeMode {
    /// Report an error.
    #[default]
    Strict,
    /// Evaluate the envelope at the edge of its domain and flag the result.
    Clamp,
}

/// Every intermediate quantity of the infidelity pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfidelityBreakdown {
    /// GHz.
    pub f01: f64,
    /// Signed anharmonicity, GHz.
    pub alpha: f64,
    /// rad/s.
    pub omega01: f64,
    pub phi01: f64,
    pub n01: f64,
    pub relaxation: RelaxationBreakdown,
    pub dephasing: DephasingModel,
    pub gate: GatePlan,
    pub envelope_re: f64,
    pub envelope_im: f64,
    /// Set when the envelope was evaluated at its domain edge instead of `t_g`.
    pub envelope_clamped: bool,
    pub infidelity: f64,
}

pub fn infidelity_at(c: &CircuitEnergies, env: &NoiseEnvironment) -> Result<InfidelityBreakdown> {
    infidelity_at_with(c, env, EnvelopeMode::Strict)
}

/// Spectrum, matrix elements, relaxation, curvature, gate duration, envelope,
/// infidelity. Errors are wrapped with the name of the failing stage.
pub fn infidelity_at_with(
    c: &CircuitEnergies,
    env: &NoiseEnvironment,
    mode: EnvelopeMode,
) -> Result<InfidelityBreakdown> {
    let input = || -> Result<()> {
        c.validate()?;
        env.validate()?;
        if !c.is_sweet_spot() {
            return Err(Error::NotSweetSpot {
                phi_diff: c.phi_diff,
            });
        }
        if c.e_l < c.e_j {
            return Err(Error::DoubleWell {
                e_j: c.e_j,
                e_l: c.e_l,
            });
        }
        if c.e_j == 0.0 {
            return Err(Error::ZeroAnharmonicity);
        }
        Ok(())
    };
    input().map_err(|e| e.at_stage("input"))?;

    let s = diagonalize_default(c, 3).map_err(|e| e.at_stage("spectrum"))?;
    let omega01 = ghz_to_rad_per_s(s.f01());
    let alpha = s.alpha();

    let relax = || -> Result<(f64, f64, RelaxationBreakdown)> {
        let phi01 = matrix_element_phi(&s, 0, 1)?;
        let n01 = matrix_element_n(&s, 0, 1)?;
        let r = RelaxationBreakdown::new(
            gamma1_flux(c, env, phi01, omega01)?,
            gamma1_diel(c, env, n01, omega01)?,
        );
        Ok((phi01, n01, r))
    };
    let (phi01, n01, relaxation) = relax().map_err(|e| e.at_stage("relaxation"))?;

    let kappa = flux_curvature_from(&s, c.e_l).map_err(|e| e.at_stage("curvature"))?;
    let dephasing = DephasingModel::new(kappa, env);

    let gate = gate_duration(ghz_to_rad_per_s(alpha), env.nu).map_err(|e| e.at_stage("gate"))?;

    let (f, envelope_clamped) = match mode {
        EnvelopeMode::Strict => (
            dephasing_envelope(gate.t_g, kappa, env).map_err(|e| e.at_stage("envelope"))?,
            false,
        ),
        EnvelopeMode::Clamp => {
            let limit = envelope_time_limit(kappa, env);
            if gate.t_g < limit {
                (envelope_unchecked(gate.t_g, kappa, env), false)
            } else {
                (envelope_unchecked(limit * (1.0 - 1e-12), kappa, env), true)
            }
        }
    };

    let infidelity = average_gate_infidelity(relaxation.gamma1_total, gate.t_g, f.re);
    ensure_non_negative("infidelity", infidelity).map_err(|e| e.at_stage("infidelity"))?;
    Ok(InfidelityBreakdown {
        f01: s.f01(),
        alpha,
        omega01,
        phi01,
        n01,
        relaxation,
        dephasing,
        gate,
        envelope_re: f.re,
        envelope_im: f.im,
        envelope_clamped,
        infidelity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::flux_curvature;
    use proptest::prelude::*;

    fn table_one() -> CircuitEnergies {
        CircuitEnergies::at_sweet_spot(19.0, 25.2, 0.297)
    }

    #[test]
    fn gate_duration_formula() {
        let g = gate_duration(ghz_to_rad_per_s(0.5), 1.0).unwrap();
        assert!((g.t_g - 2e-9).abs() < 1e-21);
        let slow = gate_duration(ghz_to_rad_per_s(0.5), 1.3).unwrap();
        assert!((slow.t_g / g.t_g - 1.3).abs() < 1e-12);
        assert_eq!(gate_duration(0.0, 1.0), Err(Error::ZeroAnharmonicity));
        // sign of alpha is irrelevant
        assert_eq!(gate_duration(-1e9, 1.0).unwrap().t_g, gate_duration(1e9, 1.0).unwrap().t_g);
    }

    #[test]
    fn speed_limit_branches() {
        let w01 = ghz_to_rad_per_s(0.3);
        let fl = gate_speed_limit(w01, ghz_to_rad_per_s(5.0)).unwrap();
        assert_eq!(fl.limiting_scale, LimitingScale::Frequency);
        assert!((fl.t_g - 1.0 / 0.3e9).abs() < 1e-20);
        let tr = gate_speed_limit(ghz_to_rad_per_s(4.5), ghz_to_rad_per_s(-0.2)).unwrap();
        assert_eq!(tr.limiting_scale, LimitingScale::Anharmonicity);
        assert!((tr.t_g - 5e-9).abs() < 1e-20);
        let w = 1e10;
        assert_eq!(gate_speed_limit(w, w).unwrap().t_g, 2.0 * PI / w);
    }

    #[test]
    fn infidelity_limits() {
        assert_eq!(average_gate_infidelity(0.0, 1e-8, 1.0), 0.0);
        let (g, t) = (1e3, 1e-8);
        let e = average_gate_infidelity(g, t, 1.0);
        assert!((e / (g * t / 3.0) - 1.0).abs() < 1e-4);
        assert!((average_gate_infidelity(1e30, 1.0, -1.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn table_one_pipeline() {
        let r = infidelity_at(&table_one(), &NoiseEnvironment::first_unimon()).unwrap();
        assert!(r.infidelity > 1e-5 && r.infidelity < 1e-3, "{}", r.infidelity);
        assert!(!r.envelope_clamped);
    }

    #[test]
    fn pipeline_matches_manual_composition() {
        let c = table_one();
        let env = NoiseEnvironment::first_unimon();
        let r = infidelity_at(&c, &env).unwrap();
        let s = diagonalize_default(&c, 3).unwrap();
        let w = ghz_to_rad_per_s(s.f01());
        let g1 = gamma1_flux(&c, &env, matrix_element_phi(&s, 0, 1).unwrap(), w).unwrap()
            + gamma1_diel(&c, &env, matrix_element_n(&s, 0, 1).unwrap(), w).unwrap();
        let kappa = flux_curvature(&c).unwrap();
        let t_g = gate_duration(ghz_to_rad_per_s(s.alpha()), env.nu).unwrap().t_g;
        let f = dephasing_envelope(t_g, kappa, &env).unwrap();
        assert_eq!(r.infidelity, average_gate_infidelity(g1, t_g, f.re));
    }

    #[test]
    fn better_dielectric_helps() {
        let env = NoiseEnvironment::first_unimon();
        let a = infidelity_at(&table_one(), &env).unwrap().infidelity;
        let b = infidelity_at(&table_one(), &env.with_q_diel(2.0 * env.q_diel))
            .unwrap()
            .infidelity;
        assert!(b < a);
    }

    #[test]
    fn pipeline_errors_name_the_stage() {
        let env = NoiseEnvironment::first_unimon();
        let harmonic = CircuitEnergies::at_sweet_spot(0.0, 25.2, 0.297);
        let e = infidelity_at(&harmonic, &env).unwrap_err();
        assert_eq!(e.root(), &Error::ZeroAnharmonicity);
        assert!(e.is_validation());
        let off = table_one().with_phi_diff(3.0);
        assert!(matches!(
            infidelity_at(&off, &env).unwrap_err().root(),
            Error::NotSweetSpot { .. }
        ));
    }

    #[test]
    fn strict_mode_rejects_long_gates() {
        // tiny anharmonicity gives a gate longer than the envelope domain
        let c = CircuitEnergies::at_sweet_spot(1e-4, 25.2, 0.297);
        let env = NoiseEnvironment {
            omega_ir: 1e5,
            ..NoiseEnvironment::first_unimon()
        };
        let strict = infidelity_at(&c, &env);
        match strict {
            Err(Error::Stage { stage, source }) => {
                assert_eq!(stage, "envelope");
                assert!(matches!(*source, Error::EnvelopeDomain { .. }));
            }
            other => panic!("expected an envelope error, got {other:?}"),
        }
        let clamped = infidelity_at_with(&c, &env, EnvelopeMode::Clamp).unwrap();
        assert!(clamped.envelope_clamped);
        assert!(clamped.infidelity >= 0.0 && clamped.infidelity <= 2.0 / 3.0 + 1e-12);
    }

    proptest! {
        #[test]
        // the envelope has |arg f| < pi/4, so Re f > 0 whenever it comes from the model
        fn monotone_in_gamma(g in 0.0f64..1e7, dg in 1e-3f64..1e6, t in 1e-9f64..1e-6, re in 0.0f64..1.0) {
            prop_assert!(average_gate_infidelity(g + dg, t, re) >= average_gate_infidelity(g, t, re) - 1e-15);
        }

        #[test]
        fn bounded(x in 0.0f64..1e3, re in -1.0f64..1.0) {
            let e = average_gate_infidelity(x, 1.0, re);
            prop_assert!((-1e-15..=2.0 / 3.0 + 1e-15).contains(&e));
        }
    }
}
