//! The twelve acceptance checks, shared by the `acceptance` test target and
//! `qforge validate`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::compare::{builtin_spec, relaxation_profile, RelaxationAxis};
use crate::design::{global_optimum, optimum_trace, sweep, t1_noise_grid, t1_table, t1_vs_frequency, DesignPoint, Metric, SweepSpec};
use crate::eigen::{diagonalize_default, flux_curvature, flux_curvature_fd_converged, matrix_element_n, matrix_element_phi};
use crate::error::Result;
use crate::exec::Execution;
use crate::model::{impedance_with_rk, CircuitEnergies, DimensionlessPotential, NoiseEnvironment, R_K};
use crate::numeric::{loglog_slope, logspace};
use crate::variational::{ansatz_widths, septic_root_theta2, variational_energies};

pub const CRITERIA: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_s: f64,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {}: {} ({:.2} s) {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.elapsed_s,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcceptanceOptions {
    /// Resistance quantum used by the impedance checks, ohms.
    pub r_k: f64,
    /// Points per axis of the infidelity sweep.
    pub sweep_points: usize,
    pub exec: Execution,
}

impl Default for AcceptanceOptions {
    fn default() -> Self {
        Self {
            r_k: R_K,
            sweep_points: 41,
            exec: Execution::default(),
        }
    }
}

const TITLES: [&str; CRITERIA] = [
    "reference design spectrum and impedance",
    "variational accuracy envelope",
    "anharmonicity ceiling",
    "width ratio and septic cross-check",
    "variational upper bound",
    "infidelity optimum at 4.5 GHz",
    "T1 frequency scaling",
    "T1 at improved noise parameters",
    "flux-noise-limited sweet-spot T1",
    "unimon and transmon spot values",
    "oracle identities",
    "sweep determinism",
];

type Outcome = Result<(bool, String)>;

pub fn run(id: usize, opts: &AcceptanceOptions) -> Option<CriterionReport> {
    let check: fn(&AcceptanceOptions) -> Outcome = match id {
        1 => table_one,
        2 => variational_envelope,
        3 => anharmonicity_ceiling,
        4 => width_ratio,
        5 => variational_bound,
        6 => infidelity_optimum,
        7 => t1_scaling,
        8 => improved_noise_t1,
        9 => flux_limited_t1,
        10 => spot_values,
        11 => oracle_identities,
        12 => determinism,
        _ => return None,
    };
    let start = Instant::now();
    let (passed, detail) = match check(opts) {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Some(CriterionReport {
        id,
        title: TITLES[id - 1],
        passed,
        detail,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}

pub fn run_all(opts: &AcceptanceOptions) -> Vec<CriterionReport> {
    (1..=CRITERIA).filter_map(|id| run(id, opts)).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn table_one(opts: &AcceptanceOptions) -> Outcome {
    let start = Instant::now();
    let c = CircuitEnergies::at_sweet_spot(19.0, 25.2, 0.297);
    let f01 = diagonalize_default(&c, 2)?.f01();
    let z = impedance_with_rk(&c, opts.r_k)?;
    let secs = start.elapsed().as_secs_f64();
    let ok = rel(f01, 4.488) <= 0.01 && rel(z, 315.0) <= 0.005 && secs < 1.0;
    Ok((ok, format!("f01 = {f01:.4} GHz, Z = {z:.2} ohm, {secs:.3} s")))
}

fn fig2_axis() -> Vec<f64> {
    logspace(1e-2, 1e3, 10)
}

fn variational_envelope(_: &AcceptanceOptions) -> Outcome {
    let start = Instant::now();
    // (max relative error, eps2, eps4) for f01, f12, alpha
    let mut worst = [(0.0f64, 0.0, 0.0); 3];
    for &eps2 in &fig2_axis() {
        for &eps4 in &fig2_axis() {
            let c = DimensionlessPotential::new(eps2, eps4)?.to_energies(1.0);
            let v = variational_energies(&c)?;
            let n = diagonalize_default(&c, 3)?;
            let errs = [rel(v.f01, n.f01()), rel(v.f12, n.f12()), rel(v.alpha, n.alpha())];
            for (w, e) in worst.iter_mut().zip(errs) {
                if e > w.0 {
                    *w = (e, eps2, eps4);
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst[0].0 <= 0.02 && worst[1].0 <= 0.02 && worst[2].0 <= 0.05 && secs < 30.0;
    let parts: Vec<String> = ["f01", "f12", "alpha"]
        .iter()
        .zip(worst)
        .map(|(name, (e, eps2, eps4))| format!("{name} {e:.3e} at ({eps2:.3e}, {eps4:.3e})"))
        .collect();
    Ok((
        ok,
        format!("max rel err [at (eps2, eps4)]: {}, {secs:.1} s", parts.join(", ")),
    ))
}

fn anharmonicity_ceiling(_: &AcceptanceOptions) -> Outcome {
    let mut points: Vec<(f64, f64)> = Vec::new();
    for &eps2 in &fig2_axis() {
        for &eps4 in &fig2_axis() {
            if eps4 / eps2 >= 1e4 * (1.0 - 1e-12) {
                points.push((eps2, eps4));
            }
        }
    }
    points.push((0.0, 100.0));
    points.push((0.0, 1000.0));
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(eps2, eps4) in &points {
        let c = DimensionlessPotential::new(eps2, eps4)?.to_energies(1.0);
        let n = diagonalize_default(&c, 3)?;
        let v = variational_energies(&c)?;
        for r in [n.alpha() / n.f01(), v.alpha / v.f01] {
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    let ok = lo >= 0.30 && hi <= 0.36;
    Ok((ok, format!("alpha/f01 in [{lo:.4}, {hi:.4}] over {} points (numeric and variational)", points.len())))
}

fn width_ratio(_: &AcceptanceOptions) -> Outcome {
    let axis = logspace(1e-6, 1e6, 25);
    let (mut lo, mut hi, mut septic) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &eps2 in &axis {
        for &eps4 in &axis {
            let p = DimensionlessPotential::new(eps2, eps4)?;
            let w = ansatz_widths(&p)?;
            let r = w.theta2 / w.theta0;
            lo = lo.min(r);
            hi = hi.max(r);
            septic = septic.max(rel(w.theta2, septic_root_theta2(w.theta0, &p)?));
        }
    }
    let ok = lo >= 1.0 && hi < 2.0 && septic <= 0.01;
    Ok((ok, format!("theta2/theta0 in [{lo:.6}, {hi:.6}], septic vs cubic max rel diff {septic:.3e}")))
}

fn random_single_well(rng: &mut ChaCha8Rng) -> Result<CircuitEnergies> {
    let eps2 = 10f64.powf(rng.gen_range(-2.0..3.0));
    let eps4 = 10f64.powf(rng.gen_range(-2.0..3.0));
    let e_c = 10f64.powf(rng.gen_range(-1.0..0.3));
    Ok(DimensionlessPotential::new(eps2, eps4)?.to_energies(e_c))
}

fn variational_bound(_: &AcceptanceOptions) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..200 {
        let c = random_single_well(&mut rng)?;
        let v = variational_energies(&c)?;
        let n = diagonalize_default(&c, 2)?;
        for (var, num) in [(v.e0, n.energies[0]), (v.e1, n.energies[1])] {
            let slack = 1e-9 * num.abs().max(1.0);
            // non-positive when the bound holds
            worst = worst.max((num - var) / num.abs().max(1.0));
            if var < num - slack {
                violations += 1;
            }
        }
    }
    Ok((
        violations == 0,
        format!("{violations} violations in 400 comparisons, largest (E_num - E_var)/|E| = {worst:.3e}"),
    ))
}

fn infidelity_optimum(opts: &AcceptanceOptions) -> Outcome {
    let start = Instant::now();
    let n = opts.sweep_points;
    let spec = SweepSpec::new(4.5, n, n, NoiseEnvironment::first_unimon(), Metric::Infidelity);
    let r = sweep(&spec, opts.exec)?;
    let trace = optimum_trace(&r);
    let secs = start.elapsed().as_secs_f64();
    let Some(g) = global_optimum(&trace) else {
        return Ok((false, "no usable cell".to_string()));
    };
    let outside: Vec<String> = trace
        .iter()
        .filter(|p| !(1000.0..=4000.0).contains(&p.z))
        .map(|p| format!("{:.3}@{:.0}", p.ratio, p.z))
        .collect();
    let ok = (1e-5..=4e-5).contains(&g.infidelity)
        && g.ratio >= 0.95
        && (700.0..=1500.0).contains(&g.z)
        && outside.is_empty()
        && secs < 300.0;
    Ok((
        ok,
        format!(
            "{n}x{n}: min {:.3e} at ratio {:.3}, Z = {:.0} ohm; {} of {} row minima outside 1-4 kohm [{}]; {secs:.1} s",
            g.infidelity,
            g.ratio,
            g.z,
            outside.len(),
            trace.len(),
            outside.join(" ")
        ),
    ))
}

fn t1_scaling(opts: &AcceptanceOptions) -> Outcome {
    let env = NoiseEnvironment::first_unimon();
    let freqs = logspace(0.1, 6.0, 36);
    let pts = t1_vs_frequency(0.754, 315.0, &env, &freqs, opts.exec)?;
    let (fs, ts): (Vec<f64>, Vec<f64>) = pts
        .iter()
        .filter(|p| (2.0 - 1e-9..=6.0 + 1e-9).contains(&p.f01))
        .map(|p| (p.f01, p.t1))
        .unzip();
    let slope = loglog_slope(&fs, &ts);
    let low = pts
        .windows(2)
        .filter(|w| w[1].f01 <= 1.0)
        .map(|w| loglog_slope(&[w[0].f01, w[1].f01], &[w[0].t1, w[1].t1]).abs())
        .fold(f64::INFINITY, f64::min);
    let ok = (slope + 1.0).abs() <= 0.15 && low < 0.8;
    Ok((ok, format!("slope over 2-6 GHz {slope:.3} ({} points), min |slope| below 1 GHz {low:.3}", fs.len())))
}

fn improved_noise_t1(_: &AcceptanceOptions) -> Outcome {
    let d = DesignPoint::new(1.0, 1.0, 1000.0)?;
    let g = t1_noise_grid(&d, 0.025, &[15e-6], &[1e7])?;
    let c = g.cells[0];
    Ok((
        c.t1 >= 1e-3,
        format!(
            "T1 = {:.3} ms (flux {:.3} ms, dielectric {:.3} ms)",
            c.t1 * 1e3,
            c.t1_flux * 1e3,
            c.t1_diel * 1e3
        ),
    ))
}

fn flux_limited_t1(_: &AcceptanceOptions) -> Outcome {
    let targets = [
        ("unimon-1", 80e-6, 0.2),
        ("unimon-2", 1e-3, 0.2),
        ("unimon-3", 5.6e-3, 0.2),
        ("fluxonium", 10e-3, 0.3),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, want, tol) in targets {
        let q = builtin_spec(name).expect("builtin spec");
        let row = relaxation_profile(&q, &RelaxationAxis::Flux(vec![q.sweet_spot()]), Execution::Sequential)?[0];
        let pass = rel(row.t1_flux, want) <= tol;
        ok &= pass;
        parts.push(format!("{name} {:.3} ms{}", row.t1_flux * 1e3, if pass { "" } else { " (out)" }));
    }
    Ok((ok, parts.join(", ")))
}

fn spot_values(_: &AcceptanceOptions) -> Outcome {
    let u = builtin_spec("unimon-2").expect("builtin spec");
    let us = diagonalize_default(&u.energies_at(0.5), 3)?;
    let t = builtin_spec("transmon").expect("builtin spec");
    let ts = crate::eigen::transmon_diagonalize(t.e_j, t.e_c, t.n_g, crate::compare::TRANSMON_CUTOFF, 3)?;
    let ok = (us.f01() - 4.5).abs() <= 0.2
        && (us.alpha() - 0.8).abs() <= 0.1
        && (ts.f01() - 4.5).abs() <= 0.15
        && (0.18..=0.25).contains(&ts.alpha().abs());
    Ok((
        ok,
        format!(
            "unimon-2 f01 {:.4} GHz alpha {:.4} GHz; transmon f01 {:.4} GHz alpha {:.4} GHz",
            us.f01(),
            us.alpha(),
            ts.f01(),
            ts.alpha()
        ),
    ))
}

fn oracle_identities(_: &AcceptanceOptions) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut commutator = 0.0f64;
    for _ in 0..100 {
        let c = random_single_well(&mut rng)?;
        let s = diagonalize_default(&c, 2)?;
        let n01 = matrix_element_n(&s, 0, 1)?;
        let phi01 = matrix_element_phi(&s, 0, 1)?;
        commutator = commutator.max(rel(n01, s.f01() * phi01 / (8.0 * c.e_c)));
    }

    let mut harmonic = 0.0f64;
    for (e_l, e_c) in [(25.2, 0.297), (1.0, 1.0), (7.1, 0.78), (0.8, 1.41), (60.0, 0.1)] {
        let c = CircuitEnergies::at_sweet_spot(0.0, e_l, e_c);
        let s = diagonalize_default(&c, 3)?;
        let f = (8.0 * e_c * e_l).sqrt();
        harmonic = harmonic
            .max(rel(s.f01(), f))
            .max(s.alpha().abs() / f)
            .max(rel(matrix_element_phi(&s, 0, 1)?, (2.0 * e_c / e_l).powf(0.25)))
            .max(rel(matrix_element_n(&s, 0, 1)?, (e_l / (32.0 * e_c)).powf(0.25)));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut kappa = 0.0f64;
    for _ in 0..50 {
        let c = random_single_well(&mut rng)?;
        let fd = flux_curvature_fd_converged(&c, 1e-3)?.kappa;
        kappa = kappa.max(rel(flux_curvature(&c)?, fd));
    }

    let ok = commutator <= 1e-4 && harmonic <= 1e-6 && kappa <= 0.05;
    Ok((
        ok,
        format!("commutator {commutator:.3e}, harmonic {harmonic:.3e}, kappa pert vs fd {kappa:.3e}"),
    ))
}

fn determinism(opts: &AcceptanceOptions) -> Outcome {
    let spec = SweepSpec::new(4.5, 6, 6, NoiseEnvironment::first_unimon(), Metric::Infidelity);
    let render = |exec| -> Result<String> { Ok(sweep(&spec, exec)?.to_table().render(&spec)) };
    let a = render(opts.exec)?;
    let b = render(opts.exec)?;
    let s = render(Execution::Sequential)?;
    let p = render(Execution::Parallel)?;
    let env = NoiseEnvironment::first_unimon();
    let freqs = [0.5, 2.0, 4.0];
    let t1 = |exec| -> Result<String> { Ok(t1_table(&t1_vs_frequency(0.754, 315.0, &env, &freqs, exec)?).render(&freqs)) };
    let (ta, tb) = (t1(Execution::Sequential)?, t1(Execution::Parallel)?);
    let ok = a == b && a == s && s == p && ta == tb;
    Ok((ok, format!("{} sweep bytes, repeat/sequential/parallel identical: {ok}", a.len())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_ids() {
        let o = AcceptanceOptions::default();
        assert!(run(0, &o).is_none());
        assert!(run(13, &o).is_none());
    }

    #[test]
    fn mutated_resistance_quantum_fails() {
        let o = AcceptanceOptions {
            r_k: R_K * 1.02,
            ..AcceptanceOptions::default()
        };
        assert!(!run(1, &o).unwrap().passed);
    }
}
