//! Design coordinates `(f01, E_J/E_L, Z)`, their inverse mapping to circuit
//! energies, and grid sweeps over the `(E_J/E_L, Z)` plane.

use serde::{Deserialize, Serialize};

use crate::coherence::{gamma1_diel, gamma1_flux, RelaxationBreakdown};
use crate::eigen::{default_grid, diagonalize, diagonalize_default, matrix_element_n, matrix_element_phi};
use crate::error::{ensure_positive, Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::fidelity::{infidelity_at_with, EnvelopeMode};
use crate::model::{charging_to_inductive_ratio, ghz_to_rad_per_s, CircuitEnergies, NoiseEnvironment};
use crate::numeric::{linspace, logspace};
use crate::report::{fmt_f64, CsvTable, VERSION};
use crate::variational::variational_energies;

pub const Z_MIN: f64 = 100.0;
pub const Z_MAX: f64 = 5000.0;
/// Target accuracy of the refined inverse mapping, GHz.
pub const REFINE_TOLERANCE: f64 = 1e-4;
const REFINE_MAX_ITER: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    /// Target qubit frequency, GHz.
    pub f01: f64,
    /// `E_J / E_L`.
    pub ratio: f64,
    /// Mode impedance, ohms.
    pub z: f64,
}

impl DesignPoint {
    pub fn new(f01: f64, ratio: f64, z: f64) -> Result<Self> {
        let d = Self { f01, ratio, z };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("f01", self.f01)?;
        if !(0.0..=1.0).contains(&self.ratio) {
            return Err(Error::InvalidParameter {
                name: "ratio",
                value: self.ratio,
                reason: "E_J/E_L must lie in [0, 1]",
            });
        }
        if !(Z_MIN..=Z_MAX).contains(&self.z) {
            return Err(Error::InvalidParameter {
                name: "z",
                value: self.z,
                reason: "impedance must lie in [100, 5000] ohm",
            });
        }
        Ok(())
    }
}

/// Circuit energies realising a design point.
///
/// `Z` fixes `E_C/E_L` and `(ratio, Z)` fix the dimensionless potential, so
/// only the overall energy scale is left. It is chosen so that the
/// variational `f01` hits the target. With `refine`, a secant iteration on the
/// scale then matches the numerical `f01` to [`REFINE_TOLERANCE`]. The phase
/// grid depends only on the dimensionless potential, so the numerical `f01` is
/// linear in the scale and the iteration normally stops after one update.
pub fn design_to_energies(d: &DesignPoint, refine: bool) -> Result<CircuitEnergies> {
    d.validate()?;
    let unit = CircuitEnergies::at_sweet_spot(d.ratio, 1.0, charging_to_inductive_ratio(d.z));
    let seed_scale = d.f01 / variational_energies(&unit)?.f01;
    if !refine {
        return Ok(unit.scaled(seed_scale));
    }

    let grid = default_grid(&unit.scaled(seed_scale))?;
    let residual = |s: f64| -> Result<f64> {
        Ok(diagonalize(&unit.scaled(s), &grid, 2)?.f01() - d.f01)
    };
    let (mut s0, mut r0) = (seed_scale, residual(seed_scale)?);
    let mut s1 = s0 * d.f01 / (r0 + d.f01);
    let mut r1 = r0;
    for _ in 0..REFINE_MAX_ITER {
        r1 = residual(s1)?;
        if r1.abs() < REFINE_TOLERANCE {
            return Ok(unit.scaled(s1));
        }
        let next = s1 - r1 * (s1 - s0) / (r1 - r0);
        (s0, r0, s1) = (s1, r1, next);
    }
    Err(Error::NoConvergence {
        what: "design refinement",
        iterations: REFINE_MAX_ITER,
        residual: r1,
    })
}

/// Transition data and relaxation rates of a (not necessarily sweet-spot) circuit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxationPoint {
    /// GHz.
    pub f01: f64,
    /// GHz.
    pub alpha: f64,
    pub phi01: f64,
    pub n01: f64,
    pub relaxation: RelaxationBreakdown,
}

pub fn relaxation_at(c: &CircuitEnergies, env: &NoiseEnvironment) -> Result<RelaxationPoint> {
    let s = diagonalize_default(c, 3)?;
    let omega01 = ghz_to_rad_per_s(s.f01());
    let phi01 = matrix_element_phi(&s, 0, 1)?;
    let n01 = matrix_element_n(&s, 0, 1)?;
    Ok(RelaxationPoint {
        f01: s.f01(),
        alpha: s.alpha(),
        phi01,
        n01,
        relaxation: RelaxationBreakdown::new(
            gamma1_flux(c, env, phi01, omega01)?,
            gamma1_diel(c, env, n01, omega01)?,
        ),
    })
}

/// Per-cell conditions that make some of the numbers non-physical or absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CellFlags {
    /// `E_J = 0`: no anharmonicity, no gate.
    pub harmonic: bool,
    /// Gate longer than the dephasing envelope's domain.
    pub envelope: bool,
    /// Vanishing flux curvature, infinite dephasing time.
    pub kappa_zero: bool,
    /// Mapping or pipeline failed; see the cell's error message.
    pub solver_error: bool,
}

impl CellFlags {
    pub fn any(&self) -> bool {
        self.harmonic || self.envelope || self.kappa_zero || self.solver_error
    }

    /// `|`-separated flag names, or `none`.
    pub fn label(&self) -> String {
        let names: Vec<&str> = [
            (self.harmonic, "harmonic"),
            (self.envelope, "envelope"),
            (self.kappa_zero, "kappa-zero"),
            (self.solver_error, "solver-error"),
        ]
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, n)| *n)
        .collect();
        if names.is_empty() {
            "none".to_string()
        } else {
            names.join("|")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub ratio: f64,
    /// ohms.
    pub z: f64,
    /// Achieved numerical qubit frequency, GHz.
    pub f01: f64,
    /// GHz.
    pub e_j: f64,
    /// GHz.
    pub e_l: f64,
    /// GHz.
    pub e_c: f64,
    /// GHz.
    pub alpha: f64,
    /// rad/s per flux quantum squared.
    pub kappa: f64,
    /// 1/s.
    pub gamma1_flux: f64,
    /// 1/s.
    pub gamma1_diel: f64,
    /// s.
    pub t1: f64,
    /// Inverse dephasing quasirate, s.
    pub t_phi: f64,
    pub infidelity: f64,
    pub flags: CellFlags,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CellRecord {
    fn blank(ratio: f64, z: f64) -> Self {
        Self {
            ratio,
            z,
            f01: f64::NAN,
            e_j: f64::NAN,
            e_l: f64::NAN,
            e_c: f64::NAN,
            alpha: f64::NAN,
            kappa: f64::NAN,
            gamma1_flux: f64::NAN,
            gamma1_diel: f64::NAN,
            t1: f64::NAN,
            t_phi: f64::NAN,
            infidelity: f64::NAN,
            flags: CellFlags::default(),
            error: None,
        }
    }

    /// `T_phi / T1`; infinite for cells without flux curvature.
    pub fn coherence_ratio(&self) -> f64 {
        self.t_phi / self.t1
    }

    fn failed(mut self, e: Error) -> Self {
        self.flags.solver_error = true;
        self.error = Some(e.to_string());
        self
    }
}

/// Full pipeline for one design point. Never fails; problems become flags.
pub fn evaluate_cell(
    f01: f64,
    ratio: f64,
    z: f64,
    env: &NoiseEnvironment,
    mode: EnvelopeMode,
) -> CellRecord {
    let mut cell = CellRecord::blank(ratio, z);
    let c = match DesignPoint::new(f01, ratio, z).and_then(|d| design_to_energies(&d, true)) {
        Ok(c) => c,
        Err(e) => return cell.failed(e),
    };
    (cell.e_j, cell.e_l, cell.e_c) = (c.e_j, c.e_l, c.e_c);

    if c.e_j == 0.0 {
        return match relaxation_at(&c, env) {
            Ok(r) => CellRecord {
                f01: r.f01,
                alpha: 0.0,
                kappa: 0.0,
                gamma1_flux: r.relaxation.gamma1_flux,
                gamma1_diel: r.relaxation.gamma1_diel,
                t1: r.relaxation.t1,
                t_phi: f64::INFINITY,
                flags: CellFlags {
                    harmonic: true,
                    kappa_zero: true,
                    ..CellFlags::default()
                },
                ..cell
            },
            Err(e) => cell.failed(e),
        };
    }

    // strict sweeps still fill the cell; only the infidelity is withheld
    let b = match infidelity_at_with(&c, env, EnvelopeMode::Clamp) {
        Ok(b) => b,
        Err(e) => return cell.failed(e),
    };
    cell.f01 = b.f01;
    cell.alpha = b.alpha;
    cell.kappa = b.dephasing.kappa;
    cell.gamma1_flux = b.relaxation.gamma1_flux;
    cell.gamma1_diel = b.relaxation.gamma1_diel;
    cell.t1 = b.relaxation.t1;
    cell.t_phi = b.dephasing.t_phi_tilde;
    cell.flags.envelope = b.envelope_clamped;
    cell.flags.kappa_zero = b.dephasing.kappa == 0.0;
    cell.infidelity = if b.envelope_clamped && mode == EnvelopeMode::Strict {
        f64::NAN
    } else {
        b.infidelity
    };
    cell
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Infidelity,
    CoherenceRatio,
}

/// Sweep definition: ratio axis linear, impedance axis logarithmic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// GHz.
    pub f01: f64,
    pub n_ratio: usize,
    pub n_z: usize,
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// ohms.
    pub z_min: f64,
    /// ohms.
    pub z_max: f64,
    pub env: NoiseEnvironment,
    pub envelope: EnvelopeMode,
    pub metric: Metric,
}

impl SweepSpec {
    /// Full `[0, 1] x [100, 5000] ohm` plane.
    pub fn new(f01: f64, n_ratio: usize, n_z: usize, env: NoiseEnvironment, metric: Metric) -> Self {
        Self {
            f01,
            n_ratio,
            n_z,
            ratio_min: 0.0,
            ratio_max: 1.0,
            z_min: Z_MIN,
            z_max: Z_MAX,
            env,
            envelope: EnvelopeMode::Clamp,
            metric,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("f01", self.f01)?;
        self.env.validate()?;
        if self.n_ratio < 2 || self.n_z < 2 {
            return Err(Error::InvalidParameter {
                name: "n_ratio",
                value: self.n_ratio.min(self.n_z) as f64,
                reason: "each sweep axis needs at least 2 points",
            });
        }
        DesignPoint::new(self.f01, self.ratio_min, self.z_min)?;
        DesignPoint::new(self.f01, self.ratio_max, self.z_max)?;
        if self.ratio_min >= self.ratio_max || self.z_min >= self.z_max {
            return Err(Error::InvalidParameter {
                name: "ratio_max",
                value: self.ratio_max,
                reason: "axis bounds must be increasing",
            });
        }
        Ok(())
    }

    pub fn ratios(&self) -> Vec<f64> {
        linspace(self.ratio_min, self.ratio_max, self.n_ratio)
    }

    pub fn impedances(&self) -> Vec<f64> {
        logspace(self.z_min, self.z_max, self.n_z)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub ratios: Vec<f64>,
    pub impedances: Vec<f64>,
    /// Row-major: ratio outer, impedance inner.
    pub cells: Vec<CellRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub ratio: f64,
    /// ohms.
    pub z: f64,
    pub infidelity: f64,
    pub coherence_ratio: f64,
}

/// Evaluates every cell of the sweep; cell order is independent of `exec`.
pub fn sweep(spec: &SweepSpec, exec: Execution) -> Result<SweepResult> {
    spec.validate()?;
    let ratios = spec.ratios();
    let impedances = spec.impedances();
    let n_z = impedances.len();
    let cells = map_indexed(ratios.len() * n_z, exec, |k| {
        evaluate_cell(spec.f01, ratios[k / n_z], impedances[k % n_z], &spec.env, spec.envelope)
    });
    Ok(SweepResult {
        spec: *spec,
        ratios,
        impedances,
        cells,
    })
}

pub fn sweep_infidelity(
    f01: f64,
    n_ratio: usize,
    n_z: usize,
    env: &NoiseEnvironment,
    exec: Execution,
) -> Result<SweepResult> {
    sweep(&SweepSpec::new(f01, n_ratio, n_z, *env, Metric::Infidelity), exec)
}

pub fn sweep_coherence_ratio(
    f01: f64,
    n_ratio: usize,
    n_z: usize,
    env: &NoiseEnvironment,
    exec: Execution,
) -> Result<SweepResult> {
    sweep(&SweepSpec::new(f01, n_ratio, n_z, *env, Metric::CoherenceRatio), exec)
}

impl SweepResult {
    pub fn cell(&self, i_ratio: usize, i_z: usize) -> &CellRecord {
        &self.cells[i_ratio * self.impedances.len() + i_z]
    }

    pub fn row(&self, i_ratio: usize) -> &[CellRecord] {
        let n = self.impedances.len();
        &self.cells[i_ratio * n..(i_ratio + 1) * n]
    }

    pub fn flagged(&self) -> impl Iterator<Item = &CellRecord> {
        self.cells.iter().filter(|c| c.flags.any())
    }

    pub fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new([
            "ratio",
            "z_ohm",
            "f01_GHz",
            "e_j_GHz",
            "e_l_GHz",
            "e_c_GHz",
            "alpha_GHz",
            "kappa_rad_per_s_phi0sq",
            "gamma1_flux_per_s",
            "gamma1_diel_per_s",
            "t1_s",
            "t_phi_s",
            "t_phi_over_t1",
            "infidelity",
            "flags",
        ]);
        for c in &self.cells {
            let mut row: Vec<String> = [
                c.ratio,
                c.z,
                c.f01,
                c.e_j,
                c.e_l,
                c.e_c,
                c.alpha,
                c.kappa,
                c.gamma1_flux,
                c.gamma1_diel,
                c.t1,
                c.t_phi,
                c.coherence_ratio(),
                c.infidelity,
            ]
            .iter()
            .map(|v| fmt_f64(*v))
            .collect();
            row.push(c.flags.label());
            t.push(row);
        }
        t
    }

    pub fn summary(&self) -> SweepSummary {
        let trace = optimum_trace(self);
        let flagged: Vec<FlaggedCell> = self
            .flagged()
            .map(|c| FlaggedCell {
                ratio: c.ratio,
                z: c.z,
                flags: c.flags.label(),
                error: c.error.clone(),
            })
            .collect();
        SweepSummary {
            version: VERSION.to_string(),
            spec: self.spec,
            cells: self.cells.len(),
            global_optimum: global_optimum(&trace),
            trace,
            flagged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedCell {
    pub ratio: f64,
    pub z: f64,
    pub flags: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub version: String,
    pub spec: SweepSpec,
    pub cells: usize,
    pub global_optimum: Option<TracePoint>,
    pub trace: Vec<TracePoint>,
    pub flagged: Vec<FlaggedCell>,
}

/// Minimum-infidelity impedance for every ratio row. Flagged and non-finite
/// cells are skipped; ties go to the smaller impedance; rows without a usable
/// cell are omitted.
pub fn optimum_trace(r: &SweepResult) -> Vec<TracePoint> {
    (0..r.ratios.len())
        .filter_map(|i| {
            let mut best: Option<&CellRecord> = None;
            for c in r.row(i) {
                if c.flags.any() || !c.infidelity.is_finite() {
                    continue;
                }
                if best.is_none_or(|b| c.infidelity < b.infidelity) {
                    best = Some(c);
                }
            }
            best.map(|c| TracePoint {
                ratio: c.ratio,
                z: c.z,
                infidelity: c.infidelity,
                coherence_ratio: c.coherence_ratio(),
            })
        })
        .collect()
}

/// Lowest point of a trace (first one on ties).
pub fn global_optimum(trace: &[TracePoint]) -> Option<TracePoint> {
    trace.iter().fold(None, |best: Option<TracePoint>, p| match best {
        Some(b) if b.infidelity <= p.infidelity => Some(b),
        _ => Some(*p),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct T1Point {
    /// GHz.
    pub f01: f64,
    /// s.
    pub t1: f64,
    /// s.
    pub t1_flux: f64,
    /// s.
    pub t1_diel: f64,
}

/// `T1` along a frequency axis at fixed `(ratio, z)`.
pub fn t1_vs_frequency(
    ratio: f64,
    z: f64,
    env: &NoiseEnvironment,
    f01s: &[f64],
    exec: Execution,
) -> Result<Vec<T1Point>> {
    env.validate()?;
    map_indexed(f01s.len(), exec, |i| {
        let d = DesignPoint::new(f01s[i], ratio, z)?;
        let c = design_to_energies(&d, true)?;
        let r = relaxation_at(&c, env)?;
        Ok(T1Point {
            f01: r.f01,
            t1: r.relaxation.t1,
            t1_flux: r.relaxation.t1_flux(),
            t1_diel: r.relaxation.t1_diel(),
        })
    })
    .into_iter()
    .collect()
}

pub fn t1_table(points: &[T1Point]) -> CsvTable {
    let mut t = CsvTable::new(["f01_GHz", "t1_s", "t1_flux_s", "t1_diel_s"]);
    for p in points {
        t.push([p.f01, p.t1, p.t1_flux, p.t1_diel].iter().map(|v| fmt_f64(*v)).collect());
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseCell {
    /// Flux quanta.
    pub a_phi: f64,
    pub q_diel: f64,
    /// s.
    pub t1: f64,
    /// s.
    pub t1_flux: f64,
    /// s.
    pub t1_diel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseGrid {
    pub design: DesignPoint,
    pub energies: CircuitEnergies,
    /// Temperature, K.
    pub temperature: f64,
    /// Row-major: `a_phi` outer, `q_diel` inner.
    pub cells: Vec<NoiseCell>,
}

/// `T1` over a grid of flux-noise amplitudes and dielectric quality factors
/// for one design. The spectrum is computed once.
pub fn t1_noise_grid(
    design: &DesignPoint,
    temperature: f64,
    a_phis: &[f64],
    q_diels: &[f64],
) -> Result<NoiseGrid> {
    let c = design_to_energies(design, true)?;
    let base = NoiseEnvironment::first_unimon().with_temperature(temperature);
    let r = relaxation_at(&c, &base)?;
    let omega01 = ghz_to_rad_per_s(r.f01);
    let mut cells = Vec::with_capacity(a_phis.len() * q_diels.len());
    for &a_phi in a_phis {
        for &q_diel in q_diels {
            let env = NoiseEnvironment {
                a_phi,
                q_diel,
                ..base
            };
            env.validate()?;
            let b = RelaxationBreakdown::new(
                gamma1_flux(&c, &env, r.phi01, omega01)?,
                gamma1_diel(&c, &env, r.n01, omega01)?,
            );
            cells.push(NoiseCell {
                a_phi,
                q_diel,
                t1: b.t1,
                t1_flux: b.t1_flux(),
                t1_diel: b.t1_diel(),
            });
        }
    }
    Ok(NoiseGrid {
        design: *design,
        energies: c,
        temperature,
        cells,
    })
}

impl NoiseGrid {
    pub fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(["a_phi_phi0", "q_diel", "t1_s", "t1_flux_s", "t1_diel_s"]);
        for c in &self.cells {
            t.push(
                [c.a_phi, c.q_diel, c.t1, c.t1_flux, c.t1_diel]
                    .iter()
                    .map(|v| fmt_f64(*v))
                    .collect(),
            );
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{impedance, to_dimensionless};

    #[test]
    fn design_point_ranges() {
        assert!(DesignPoint::new(4.5, 0.5, 1000.0).is_ok());
        assert!(DesignPoint::new(4.5, 1.5, 1000.0).is_err());
        assert!(DesignPoint::new(4.5, 0.5, 50.0).is_err());
        assert!(DesignPoint::new(0.0, 0.5, 1000.0).is_err());
    }

    #[test]
    fn closes_the_loop_on_table_one() {
        let d = DesignPoint::new(4.488, 19.0 / 25.2, 315.4).unwrap();
        let c = design_to_energies(&d, true).unwrap();
        for (got, want) in [(c.e_j, 19.0), (c.e_l, 25.2), (c.e_c, 0.297)] {
            assert!((got / want - 1.0).abs() < 0.02, "{got} vs {want}");
        }
        let f = diagonalize_default(&c, 2).unwrap().f01();
        assert!((f - 4.488).abs() < REFINE_TOLERANCE);
        assert!((impedance(&c).unwrap() / 315.4 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn harmonic_design_is_closed_form() {
        let d = DesignPoint::new(4.0, 0.0, 500.0).unwrap();
        let c = design_to_energies(&d, false).unwrap();
        assert_eq!(c.e_j, 0.0);
        assert!(((8.0 * c.e_c * c.e_l).sqrt() / 4.0 - 1.0).abs() < 1e-12);
        assert!((c.e_l - 16.0 / (8.0 * c.e_c)).abs() < 1e-9);
    }

    #[test]
    fn potential_depends_only_on_shape() {
        let a = design_to_energies(&DesignPoint::new(0.7, 0.6, 900.0).unwrap(), true).unwrap();
        let b = design_to_energies(&DesignPoint::new(6.1, 0.6, 900.0).unwrap(), true).unwrap();
        let (pa, pb) = (to_dimensionless(&a).unwrap(), to_dimensionless(&b).unwrap());
        assert!((pa.eps2 / pb.eps2 - 1.0).abs() < 1e-12);
        assert!((pa.eps4 / pb.eps4 - 1.0).abs() < 1e-12);
    }

    fn synthetic(values: &[&[f64]]) -> SweepResult {
        let spec = SweepSpec::new(4.5, values.len(), values[0].len(), NoiseEnvironment::first_unimon(), Metric::Infidelity);
        let ratios = spec.ratios();
        let impedances = spec.impedances();
        let mut cells = Vec::new();
        for (i, row) in values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let mut c = CellRecord::blank(ratios[i], impedances[j]);
                c.infidelity = *v;
                c.t1 = 1.0;
                c.t_phi = 1.0;
                cells.push(c);
            }
        }
        SweepResult {
            spec,
            ratios,
            impedances,
            cells,
        }
    }

    #[test]
    fn trace_picks_row_minima() {
        let r = synthetic(&[&[3.0, 2.0, 1.0], &[1.0, 2.0, 3.0], &[2.0, 1.0, 1.0]]);
        let t = optimum_trace(&r);
        assert_eq!(t[0].z, r.impedances[2]);
        assert_eq!(t[1].z, r.impedances[0]);
        // tie goes to the smaller impedance
        assert_eq!(t[2].z, r.impedances[1]);
        let g = global_optimum(&t).unwrap();
        assert_eq!((g.ratio, g.infidelity), (r.ratios[0], 1.0));
    }

    #[test]
    fn trace_skips_flagged_cells() {
        let mut r = synthetic(&[&[f64::NAN, 5.0], &[0.1, 7.0]]);
        r.cells[2].flags.envelope = true;
        let t = optimum_trace(&r);
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].infidelity, 5.0);
        assert_eq!(t[1].infidelity, 7.0);
    }

    #[test]
    fn harmonic_cells_are_flagged() {
        let env = NoiseEnvironment::first_unimon();
        let c = evaluate_cell(4.5, 0.0, 1000.0, &env, EnvelopeMode::Strict);
        assert!(c.flags.harmonic && c.flags.kappa_zero && !c.flags.solver_error);
        assert_eq!(c.alpha, 0.0);
        assert!(c.coherence_ratio().is_infinite());
        assert!(c.infidelity.is_nan());
        assert!(c.t1 > 0.0);
        assert_eq!(c.flags.label(), "harmonic|kappa-zero");
    }

    #[test]
    fn bad_cells_do_not_abort() {
        let env = NoiseEnvironment::first_unimon();
        let c = evaluate_cell(4.5, 0.5, 20.0, &env, EnvelopeMode::Strict);
        assert!(c.flags.solver_error);
        assert!(c.error.is_some());
    }

    #[test]
    fn spec_validation() {
        let env = NoiseEnvironment::first_unimon();
        assert!(sweep(&SweepSpec::new(4.5, 1, 3, env, Metric::Infidelity), Execution::Sequential).is_err());
        let mut s = SweepSpec::new(4.5, 3, 3, env, Metric::Infidelity);
        s.z_max = 9000.0;
        assert!(s.validate().is_err());
    }
}
