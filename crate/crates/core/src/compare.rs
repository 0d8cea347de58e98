//! Side-by-side flux, relaxation and dephasing profiles of unimon, transmon
//! and fluxonium parameter sets.
//!
//! Flux is measured in flux quanta. Unimons and the fluxonium use the
//! inductively shunted Hamiltonian with `phi_diff = 2 pi Phi` and are operated
//! at `Phi = 1/2`. The transmon is a symmetric SQUID with
//! `E_J(Phi) = E_J,max |cos(pi Phi)|`, operated at `Phi = 0`; it has no
//! inductive shunt and therefore no flux-noise relaxation channel.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::coherence::{first_order_dephasing_time, gamma1_diel, gamma1_flux, DephasingModel, RelaxationBreakdown};
use crate::design::relaxation_at;
use crate::eigen::{flux_curvature_fd, flux_slope_fd, transmon_diagonalize};
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::fidelity::gate_speed_limit;
use crate::model::{flux_to_phase, ghz_to_rad_per_s, CircuitEnergies, NoiseEnvironment};
use crate::report::{fmt_f64, CsvTable};

/// Charge-basis cutoff for transmon spectra.
pub const TRANSMON_CUTOFF: usize = 40;
/// Bias-phase step of the finite-difference flux derivatives, rad.
pub const FD_PHASE_STEP: f64 = 1e-3;
/// Offsets accepted by [`dephasing_vs_offset`], flux quanta.
pub const MAX_OFFSET: f64 = 0.05;
/// Initial guess for the first-order dephasing fixed point, s.
pub const FIRST_ORDER_T_SCALE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QubitKind {
    Unimon,
    Fluxonium,
    Transmon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitSpec {
    pub name: String,
    pub kind: QubitKind,
    /// Josephson energy `E_J/h` (maximum for the transmon SQUID), GHz.
    pub e_j: f64,
    /// Inductive energy `E_L/h`, GHz; `None` for the transmon.
    pub e_l: Option<f64>,
    /// GHz.
    pub e_c: f64,
    /// Offset charge, transmon only.
    #[serde(default)]
    pub n_g: f64,
    pub env: NoiseEnvironment,
    /// Reference dielectric quality factor reached by devices of this kind.
    pub marker_q_diel: f64,
}

fn comparison_env(a_phi_micro: f64) -> NoiseEnvironment {
    NoiseEnvironment {
        a_phi: a_phi_micro * 1e-6,
        q_diel: 1e6,
        temperature: 0.030,
        omega_ir: 1e3,
        nu: 1.0,
    }
}

/// The five comparison parameter sets.
pub fn builtin_specs() -> Vec<QubitSpec> {
    let shunted = |name: &str, kind, e_j, e_l, e_c, a_phi, marker| QubitSpec {
        name: name.to_string(),
        kind,
        e_j,
        e_l: Some(e_l),
        e_c,
        n_g: 0.0,
        env: comparison_env(a_phi),
        marker_q_diel: marker,
    };
    vec![
        shunted("unimon-1", QubitKind::Unimon, 19.0, 25.2, 0.30, 15.0, 3e5),
        shunted("unimon-2", QubitKind::Unimon, 5.4, 7.1, 0.78, 9.1, 3e5),
        shunted("unimon-3", QubitKind::Unimon, 2.4, 3.2, 1.4, 6.8, 3e5),
        QubitSpec {
            name: "transmon".to_string(),
            kind: QubitKind::Transmon,
            e_j: 14.0,
            e_l: None,
            e_c: 0.195,
            n_g: 0.0,
            env: comparison_env(1.5),
            marker_q_diel: 9e6,
        },
        shunted("fluxonium", QubitKind::Fluxonium, 6.27, 0.80, 1.41, 2.0, 3e6),
    ]
}

pub fn builtin_spec(name: &str) -> Option<QubitSpec> {
    builtin_specs().into_iter().find(|q| q.name == name)
}

impl QubitSpec {
    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("e_j", self.e_j)?;
        ensure_positive("e_c", self.e_c)?;
        ensure_positive("marker_q_diel", self.marker_q_diel)?;
        self.env.validate()?;
        match (self.kind, self.e_l) {
            (QubitKind::Transmon, None) => {
                if !self.n_g.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "n_g",
                        value: self.n_g,
                        reason: "must be finite",
                    });
                }
                Ok(())
            }
            (QubitKind::Transmon, Some(e_l)) => Err(Error::InvalidParameter {
                name: "e_l",
                value: e_l,
                reason: "a transmon has no inductive shunt",
            }),
            (_, Some(e_l)) => ensure_positive("e_l", e_l),
            (_, None) => Err(Error::InvalidParameter {
                name: "e_l",
                value: f64::NAN,
                reason: "unimon and fluxonium need an inductive energy",
            }),
        }
    }

    /// Operating point, flux quanta.
    pub fn sweet_spot(&self) -> f64 {
        match self.kind {
            QubitKind::Transmon => 0.0,
            _ => 0.5,
        }
    }

    /// Shunted-circuit energies at `flux`; for the transmon, the SQUID
    /// energies with a vanishing `E_L` (used only for dielectric loss).
    pub fn energies_at(&self, flux: f64) -> CircuitEnergies {
        match self.e_l {
            Some(e_l) => CircuitEnergies {
                e_j: self.e_j,
                e_l,
                e_c: self.e_c,
                phi_diff: flux_to_phase(flux),
            },
            None => CircuitEnergies {
                e_j: self.transmon_e_j(flux),
                e_l: 0.0,
                e_c: self.e_c,
                phi_diff: 0.0,
            },
        }
    }

    fn transmon_e_j(&self, flux: f64) -> f64 {
        self.e_j * (PI * flux).cos().abs()
    }

    pub fn with_n_g(self, n_g: f64) -> Self {
        Self { n_g, ..self }
    }
}

/// Spectrum and relaxation data at one flux point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionPoint {
    /// GHz.
    pub f01: f64,
    /// GHz.
    pub alpha: f64,
    /// `|<0|phi|1>|`; `NaN` for the transmon.
    pub phi01: f64,
    pub n01: f64,
}

fn transition_at(q: &QubitSpec, flux: f64) -> Result<TransitionPoint> {
    match q.kind {
        QubitKind::Transmon => {
            let s = transmon_diagonalize(q.transmon_e_j(flux), q.e_c, q.n_g, TRANSMON_CUTOFF, 3)?;
            Ok(TransitionPoint {
                f01: s.f01(),
                alpha: s.alpha(),
                phi01: f64::NAN,
                n01: s.charge_element(0, 1)?,
            })
        }
        _ => {
            let r = relaxation_at(&q.energies_at(flux), &q.env)?;
            Ok(TransitionPoint {
                f01: r.f01,
                alpha: r.alpha,
                phi01: r.phi01,
                n01: r.n01,
            })
        }
    }
}

fn relaxation(q: &QubitSpec, flux: f64, t: &TransitionPoint, env: &NoiseEnvironment) -> Result<RelaxationBreakdown> {
    let c = q.energies_at(flux);
    let omega01 = ghz_to_rad_per_s(t.f01);
    let flux_rate = match q.kind {
        QubitKind::Transmon => 0.0,
        _ => gamma1_flux(&c, env, t.phi01, omega01)?,
    };
    Ok(RelaxationBreakdown::new(flux_rate, gamma1_diel(&c, env, t.n01, omega01)?))
}

/// `(d omega01/d Phi, d^2 omega01/d Phi^2)` in rad/s per flux quantum (squared).
pub fn flux_derivatives(q: &QubitSpec, flux: f64) -> Result<(f64, f64)> {
    match q.kind {
        QubitKind::Transmon => {
            let d = FD_PHASE_STEP / (2.0 * PI);
            let w = |x: f64| -> Result<f64> {
                let s = transmon_diagonalize(q.transmon_e_j(x), q.e_c, q.n_g, TRANSMON_CUTOFF, 2)?;
                Ok(ghz_to_rad_per_s(s.f01()))
            };
            let (lo, mid, hi) = (w(flux - d)?, w(flux)?, w(flux + d)?);
            Ok(((hi - lo) / (2.0 * d), (hi - 2.0 * mid + lo) / (d * d)))
        }
        _ => {
            let c = q.energies_at(flux);
            Ok((flux_slope_fd(&c, FD_PHASE_STEP)?, flux_curvature_fd(&c, FD_PHASE_STEP)?.kappa))
        }
    }
}

/// Slope scale against which first-order sensitivity is judged negligible:
/// the curvature at the operating point times [`MAX_OFFSET`].
pub fn reference_slope(q: &QubitSpec) -> Result<f64> {
    Ok(flux_derivatives(q, q.sweet_spot())?.1.abs() * MAX_OFFSET)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxPoint {
    /// Flux quanta.
    pub flux: f64,
    /// GHz.
    pub f01: f64,
    /// GHz.
    pub alpha: f64,
    /// `2 pi / min(omega01, |alpha|)`, s; infinite without anharmonicity.
    pub t_g_lim: f64,
    /// s.
    pub t1: f64,
    /// s.
    pub t1_diel: f64,
    /// s.
    pub t1_flux: f64,
    /// rad/s per flux quantum.
    pub slope: f64,
    /// rad/s per flux quantum squared.
    pub kappa: f64,
    /// First-order 1/f dephasing time, s; infinite when the slope is negligible.
    pub t_phi_first: f64,
    /// Inverse second-order quasirate, s.
    pub t_phi_second: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxProfile {
    pub qubit: String,
    pub points: Vec<FluxPoint>,
}

fn flux_point(q: &QubitSpec, flux: f64, reference: f64) -> Result<FluxPoint> {
    let t = transition_at(q, flux)?;
    let r = relaxation(q, flux, &t, &q.env)?;
    let (slope, kappa) = flux_derivatives(q, flux)?;
    let t_g_lim = match gate_speed_limit(ghz_to_rad_per_s(t.f01), ghz_to_rad_per_s(t.alpha)) {
        Ok(g) => g.t_g,
        Err(Error::ZeroAnharmonicity) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    let first = first_order_dephasing_time(slope, &q.env, FIRST_ORDER_T_SCALE, reference)?;
    Ok(FluxPoint {
        flux,
        f01: t.f01,
        alpha: t.alpha,
        t_g_lim,
        t1: r.t1,
        t1_diel: r.t1_diel(),
        t1_flux: r.t1_flux(),
        slope,
        kappa,
        t_phi_first: first.t_phi,
        t_phi_second: DephasingModel::new(kappa, &q.env).t_phi_tilde,
    })
}

fn check_flux_grid(fluxes: &[f64]) -> Result<()> {
    if fluxes.is_empty() {
        return Err(Error::InvalidParameter {
            name: "flux",
            value: f64::NAN,
            reason: "flux grid is empty",
        });
    }
    for w in fluxes.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::InvalidParameter {
                name: "flux",
                value: w[1],
                reason: "flux grid must be strictly increasing",
            });
        }
    }
    for &f in fluxes {
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::InvalidParameter {
                name: "flux",
                value: f,
                reason: "flux must lie in [0, 1] flux quanta",
            });
        }
    }
    Ok(())
}

pub fn flux_profile(q: &QubitSpec, fluxes: &[f64], exec: Execution) -> Result<FluxProfile> {
    q.validate()?;
    check_flux_grid(fluxes)?;
    let reference = reference_slope(q)?;
    let points = map_indexed(fluxes.len(), exec, |i| flux_point(q, fluxes[i], reference))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(FluxProfile {
        qubit: q.name.clone(),
        points,
    })
}

impl FluxProfile {
    pub fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new([
            "qubit",
            "flux_phi0",
            "f01_GHz",
            "alpha_GHz",
            "t_g_lim_s",
            "t1_s",
            "t1_diel_s",
            "t1_flux_s",
            "slope_rad_per_s_phi0",
            "kappa_rad_per_s_phi0sq",
            "t_phi_first_s",
            "t_phi_second_s",
        ]);
        self.append_rows(&mut t);
        t
    }

    pub fn append_rows(&self, t: &mut CsvTable) {
        for p in &self.points {
            let mut row = vec![self.qubit.clone()];
            row.extend(
                [
                    p.flux,
                    p.f01,
                    p.alpha,
                    p.t_g_lim,
                    p.t1,
                    p.t1_diel,
                    p.t1_flux,
                    p.slope,
                    p.kappa,
                    p.t_phi_first,
                    p.t_phi_second,
                ]
                .iter()
                .map(|v| fmt_f64(*v)),
            );
            t.push(row);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelaxationAxis {
    /// Frequency axis realised by sweeping flux over these points.
    Flux(Vec<f64>),
    /// Dielectric quality factors at the operating point.
    QDiel(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationRow {
    /// Flux quanta.
    pub flux: f64,
    pub q_diel: f64,
    /// GHz.
    pub f01: f64,
    /// s.
    pub t1: f64,
    /// s.
    pub t1_flux: f64,
    /// s.
    pub t1_diel: f64,
}

pub fn relaxation_profile(q: &QubitSpec, axis: &RelaxationAxis, exec: Execution) -> Result<Vec<RelaxationRow>> {
    q.validate()?;
    let row = |flux: f64, t: &TransitionPoint, env: &NoiseEnvironment| -> Result<RelaxationRow> {
        let r = relaxation(q, flux, t, env)?;
        Ok(RelaxationRow {
            flux,
            q_diel: env.q_diel,
            f01: t.f01,
            t1: r.t1,
            t1_flux: r.t1_flux(),
            t1_diel: r.t1_diel(),
        })
    };
    match axis {
        RelaxationAxis::Flux(fluxes) => {
            check_flux_grid(fluxes)?;
            map_indexed(fluxes.len(), exec, |i| row(fluxes[i], &transition_at(q, fluxes[i])?, &q.env))
                .into_iter()
                .collect()
        }
        RelaxationAxis::QDiel(qs) => {
            let flux = q.sweet_spot();
            let t = transition_at(q, flux)?;
            qs.iter()
                .map(|&q_diel| {
                    let env = q.env.with_q_diel(q_diel);
                    env.validate()?;
                    row(flux, &t, &env)
                })
                .collect()
        }
    }
}

/// Operating-point relaxation at the qubit's reference quality factor.
pub fn marker_point(q: &QubitSpec) -> Result<RelaxationRow> {
    let rows = relaxation_profile(q, &RelaxationAxis::QDiel(vec![q.marker_q_diel]), Execution::Sequential)?;
    Ok(rows[0])
}

pub fn relaxation_table(rows: &[(String, RelaxationRow)]) -> CsvTable {
    let mut t = CsvTable::new(["qubit", "flux_phi0", "q_diel", "f01_GHz", "t1_s", "t1_flux_s", "t1_diel_s"]);
    for (name, r) in rows {
        let mut row = vec![name.clone()];
        row.extend([r.flux, r.q_diel, r.f01, r.t1, r.t1_flux, r.t1_diel].iter().map(|v| fmt_f64(*v)));
        t.push(row);
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingRow {
    /// Deviation from the operating point, flux quanta.
    pub offset: f64,
    /// s; infinite when `first_negligible`.
    pub t_phi_first: f64,
    pub first_negligible: bool,
    /// s.
    pub t_phi_second: f64,
    /// rad/s per flux quantum.
    pub slope: f64,
    /// rad/s per flux quantum squared.
    pub kappa: f64,
}

/// First- and second-order 1/f dephasing times around the operating point.
pub fn dephasing_vs_offset(q: &QubitSpec, offsets: &[f64], exec: Execution) -> Result<Vec<DephasingRow>> {
    q.validate()?;
    for &o in offsets {
        if o.is_nan() || o.abs() > MAX_OFFSET {
            return Err(Error::InvalidParameter {
                name: "offset",
                value: o,
                reason: "offsets must satisfy |offset| <= 0.05 flux quanta",
            });
        }
    }
    let reference = reference_slope(q)?;
    map_indexed(offsets.len(), exec, |i| {
        let offset = offsets[i];
        let (slope, kappa) = flux_derivatives(q, q.sweet_spot() + offset)?;
        let first = first_order_dephasing_time(slope, &q.env, FIRST_ORDER_T_SCALE, reference)?;
        Ok(DephasingRow {
            offset,
            t_phi_first: first.t_phi,
            first_negligible: first.negligible,
            t_phi_second: DephasingModel::new(kappa, &q.env).t_phi_tilde,
            slope,
            kappa,
        })
    })
    .into_iter()
    .collect()
}

pub fn dephasing_table(rows: &[(String, DephasingRow)]) -> CsvTable {
    let mut t = CsvTable::new([
        "qubit",
        "offset_phi0",
        "t_phi_first_s",
        "t_phi_second_s",
        "slope_rad_per_s_phi0",
        "kappa_rad_per_s_phi0sq",
        "first_negligible",
    ]);
    for (name, r) in rows {
        let mut row = vec![name.clone()];
        row.extend([r.offset, r.t_phi_first, r.t_phi_second, r.slope, r.kappa].iter().map(|v| fmt_f64(*v)));
        row.push(r.first_negligible.to_string());
        t.push(row);
    }
    t
}
