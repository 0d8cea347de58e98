use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use qforge::acceptance::{self, AcceptanceOptions};
use qforge::compare::{
    builtin_specs, dephasing_table, dephasing_vs_offset, flux_profile, marker_point, relaxation_profile,
    relaxation_table, FluxProfile, QubitKind, QubitSpec, RelaxationAxis,
};
use qforge::design::{self, relaxation_at, DesignPoint, Metric, SweepSpec};
use qforge::eigen::{diagonalize_default, flux_curvature, flux_curvature_fd_converged, flux_slope_fd};
use qforge::exec::Execution;
use qforge::fidelity::{infidelity_at_with, EnvelopeMode};
use qforge::model::{impedance, to_dimensionless, CircuitEnergies};
use qforge::numeric::{linspace, logspace};
use qforge::report::{fmt_f64, CsvTable, VERSION};
use qforge::variational::variational_energies;
use qforge::coherence::{first_order_dephasing_time, DephasingModel};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ConfigError, Panel, RunConfig, SweepMetric};

pub enum Job {
    Spectrum,
    Sweep,
    Compare,
    Coherence,
    Fidelity,
    Validate {
        only: Vec<usize>,
        sweep_points: usize,
        r_k: Option<f64>,
    },
}

impl Job {
    fn name(&self) -> &'static str {
        match self {
            Job::Spectrum => "spectrum",
            Job::Sweep => "sweep",
            Job::Compare => "compare",
            Job::Coherence => "coherence",
            Job::Fidelity => "fidelity",
            Job::Validate { .. } => "validate",
        }
    }
}

/// Configuration echo written into every output file.
#[derive(Serialize)]
struct Echo<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
}

pub struct Output {
    dir: PathBuf,
    json: bool,
}

impl Output {
    pub fn new(dir: PathBuf, json: bool) -> Self {
        Self { dir, json }
    }

    fn ensure_dir(&self) -> anyhow::Result<()> {
        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))
    }

    fn csv(&self, name: &str, table: &CsvTable, echo: &Echo) -> anyhow::Result<()> {
        self.ensure_dir()?;
        let path = self.dir.join(name);
        fs::write(&path, table.render(echo)).with_context(|| format!("writing {}", path.display()))
    }

    /// Writes `{config echo, result}` and returns the document.
    fn summary(&self, name: &str, echo: &Echo, result: Value) -> anyhow::Result<Value> {
        self.ensure_dir()?;
        let doc = json!({ "echo": echo, "result": result });
        let path = self.dir.join(name);
        fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(doc)
    }

    fn report(&self, doc: &Value, lines: &[String]) -> anyhow::Result<()> {
        if self.json {
            emit(&serde_json::to_string_pretty(doc)?)?;
        } else {
            for l in lines {
                emit(l)?;
            }
        }
        Ok(())
    }
}

/// Writes one line to stdout; a closed pipe (`qforge ... | head`) is not an error.
fn emit(line: &str) -> anyhow::Result<()> {
    match writeln!(std::io::stdout().lock(), "{line}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

pub fn execute(job: Job, cfg: &RunConfig, out: &Output) -> anyhow::Result<ExitCode> {
    let echo = Echo {
        tool: "qforge",
        version: VERSION,
        command: job.name(),
        config: cfg,
    };
    match job {
        Job::Spectrum => spectrum(cfg, out, &echo),
        Job::Sweep => sweep(cfg, out, &echo),
        Job::Compare => compare(cfg, out, &echo),
        Job::Coherence => coherence(cfg, out, &echo),
        Job::Fidelity => fidelity(cfg, out, &echo),
        Job::Validate {
            only,
            sweep_points,
            r_k,
        } => validate(&only, sweep_points, r_k, out),
    }
}

fn circuit(cfg: &RunConfig) -> anyhow::Result<CircuitEnergies> {
    let c = &cfg.circuit;
    let e = CircuitEnergies {
        e_j: c.e_j,
        e_l: c.e_l,
        e_c: c.e_c,
        phi_diff: c.phi_diff,
    };
    e.validate()?;
    Ok(e)
}

fn rel_dev(var: f64, num: f64) -> f64 {
    if num == 0.0 {
        if var == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (var - num) / num
    }
}

fn spectrum(cfg: &RunConfig, out: &Output, echo: &Echo) -> anyhow::Result<ExitCode> {
    let c = circuit(cfg)?;
    let levels = cfg.circuit.levels;
    if !(3..=qforge::eigen::MAX_LEVELS).contains(&levels) {
        return Err(ConfigError(format!("levels must be in 3..={}", qforge::eigen::MAX_LEVELS)).into());
    }
    let s = diagonalize_default(&c, levels)?;
    // closed form exists only at the sweet spot in the single-well regime
    let var = if c.is_sweet_spot() && c.e_l >= c.e_j {
        Some(variational_energies(&c)?)
    } else {
        None
    };

    let mut t = CsvTable::new(["level", "energy_numeric_GHz", "energy_variational_GHz"]);
    for (i, e) in s.energies.iter().enumerate() {
        let v = var.map_or(f64::NAN, |v| match i {
            0 => v.e0,
            1 => v.e1,
            2 => v.e2,
            _ => f64::NAN,
        });
        t.push(vec![i.to_string(), fmt_f64(*e), fmt_f64(v)]);
    }
    out.csv("spectrum.csv", &t, echo)?;

    let numeric = json!({ "f01_GHz": s.f01(), "f12_GHz": s.f12(), "alpha_GHz": s.alpha() });
    let variational = var.map(|v| json!({ "f01_GHz": v.f01, "f12_GHz": v.f12, "alpha_GHz": v.alpha }));
    let deviation = var.map(|v| {
        json!({
            "f01": rel_dev(v.f01, s.f01()),
            "f12": rel_dev(v.f12, s.f12()),
            "alpha": rel_dev(v.alpha, s.alpha()),
        })
    });
    let z = if c.e_l > 0.0 { Some(impedance(&c)?) } else { None };
    let eps = to_dimensionless(&c).ok();
    let doc = out.summary(
        "spectrum.json",
        echo,
        json!({
            "numeric": numeric,
            "variational": variational,
            "relative_deviation": deviation,
            "impedance_ohm": z,
            "eps2": eps.map(|p| p.eps2),
            "eps4": eps.map(|p| p.eps4),
            "grid_points": s.grid.n_points,
        }),
    )?;
    let mut lines = vec![format!(
        "numeric:     f01 = {:.6} GHz  f12 = {:.6} GHz  alpha = {:.6} GHz",
        s.f01(),
        s.f12(),
        s.alpha()
    )];
    if let Some(v) = var {
        lines.push(format!(
            "variational: f01 = {:.6} GHz  f12 = {:.6} GHz  alpha = {:.6} GHz",
            v.f01, v.f12, v.alpha
        ));
        lines.push(format!(
            "rel. dev.:   f01 = {:.3e}  f12 = {:.3e}  alpha = {:.3e}",
            rel_dev(v.f01, s.f01()),
            rel_dev(v.f12, s.f12()),
            rel_dev(v.alpha, s.alpha())
        ));
    }
    if let Some(z) = z {
        lines.push(format!("impedance:   {z:.2} ohm"));
    }
    out.report(&doc, &lines)?;
    Ok(ExitCode::SUCCESS)
}

fn envelope_mode(cfg: &RunConfig) -> EnvelopeMode {
    if cfg.strict_envelope {
        EnvelopeMode::Strict
    } else {
        EnvelopeMode::Clamp
    }
}

fn sweep(cfg: &RunConfig, out: &Output, echo: &Echo) -> anyhow::Result<ExitCode> {
    let s = &cfg.sweep;
    let env = cfg.noise.env();
    env.validate()?;
    match s.metric {
        SweepMetric::Infidelity | SweepMetric::CoherenceRatio => {
            let spec = SweepSpec {
                f01: s.f01,
                n_ratio: s.n_ratio,
                n_z: s.n_z,
                ratio_min: s.ratio_min,
                ratio_max: s.ratio_max,
                z_min: s.z_min,
                z_max: s.z_max,
                env,
                envelope: envelope_mode(cfg),
                metric: if s.metric == SweepMetric::Infidelity {
                    Metric::Infidelity
                } else {
                    Metric::CoherenceRatio
                },
            };
            let r = design::sweep(&spec, Execution::default())?;
            out.csv("sweep.csv", &r.to_table(), echo)?;
            let summary = r.summary();
            let doc = out.summary("sweep.json", echo, serde_json::to_value(&summary)?)?;
            let mut lines = vec![format!("{} cells written to sweep.csv", summary.cells)];
            match summary.global_optimum {
                Some(g) => lines.push(format!(
                    "minimum infidelity {:.4e} at E_J/E_L = {:.4}, Z = {:.1} ohm (T_phi/T1 = {:.3})",
                    g.infidelity, g.ratio, g.z, g.coherence_ratio
                )),
                None => lines.push("no usable cell".to_string()),
            }
            if !summary.flagged.is_empty() {
                lines.push(format!("{} flagged cells (listed in sweep.json):", summary.flagged.len()));
                for f in summary.flagged.iter().filter(|f| f.error.is_some()).take(10) {
                    lines.push(format!(
                        "  ratio {:.4} Z {:.1}: {}",
                        f.ratio,
                        f.z,
                        f.error.as_deref().unwrap_or_default()
                    ));
                }
            }
            out.report(&doc, &lines)?;
        }
        SweepMetric::T1Frequency => {
            let freqs = logspace(s.f01_min, s.f01_max, s.n_f01);
            let pts = design::t1_vs_frequency(s.ratio, s.z, &env, &freqs, Execution::default())?;
            out.csv("t1_frequency.csv", &design::t1_table(&pts), echo)?;
            let doc = out.summary("t1_frequency.json", echo, json!({ "points": pts }))?;
            out.report(&doc, &[format!("{} points written to t1_frequency.csv", pts.len())])?;
        }
        SweepMetric::T1Noise => {
            let d = DesignPoint::new(s.f01, s.ratio, s.z)?;
            let g = design::t1_noise_grid(&d, env.temperature, &s.a_phi_values, &s.q_diel_values)?;
            out.csv("t1_noise.csv", &g.to_table(), echo)?;
            let doc = out.summary(
                "t1_noise.json",
                echo,
                json!({ "design": g.design, "energies": g.energies, "temperature_K": g.temperature, "cells": g.cells.len() }),
            )?;
            out.report(
                &doc,
                &[format!(
                    "{} cells written to t1_noise.csv (E_J = {:.4} GHz, E_L = {:.4} GHz, E_C = {:.4} GHz)",
                    g.cells.len(),
                    g.energies.e_j,
                    g.energies.e_l,
                    g.energies.e_c
                )],
            )?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn selected_specs(cfg: &RunConfig) -> anyhow::Result<Vec<QubitSpec>> {
    let all = builtin_specs();
    let mut specs = if cfg.compare.qubits.is_empty() {
        all
    } else {
        let mut picked = Vec::new();
        for name in &cfg.compare.qubits {
            let q = all.iter().find(|q| &q.name == name).ok_or_else(|| {
                let names: Vec<&str> = all.iter().map(|q| q.name.as_str()).collect();
                ConfigError(format!("unknown qubit `{name}` (expected one of {})", names.join(", ")))
            })?;
            picked.push(q.clone());
        }
        picked
    };
    if let Some(n_g) = cfg.compare.n_g {
        for q in specs.iter_mut().filter(|q| q.kind == QubitKind::Transmon) {
            q.n_g = n_g;
        }
    }
    Ok(specs)
}

fn compare(cfg: &RunConfig, out: &Output, echo: &Echo) -> anyhow::Result<ExitCode> {
    let c = &cfg.compare;
    let specs = selected_specs(cfg)?;
    if c.flux_points < 2 {
        return Err(ConfigError("flux_points must be at least 2".to_string()).into());
    }
    let fluxes = linspace(0.0, 1.0, c.flux_points);
    let exec = Execution::default();
    let wants = |p: Panel| c.panel == p || c.panel == Panel::All;
    let mut files = Vec::new();
    let mut lines = Vec::new();

    if wants(Panel::Abc) {
        let mut table: Option<CsvTable> = None;
        for q in &specs {
            let p: FluxProfile = flux_profile(q, &fluxes, exec)?;
            match table.as_mut() {
                Some(t) => p.append_rows(t),
                None => table = Some(p.to_table()),
            }
            let at = p.points.iter().min_by(|a, b| {
                (a.flux - q.sweet_spot()).abs().total_cmp(&(b.flux - q.sweet_spot()).abs())
            });
            if let Some(pt) = at {
                lines.push(format!(
                    "{:<10} flux {:.3}: f01 = {:.4} GHz  alpha = {:.4} GHz  t_g,lim = {:.3} ns",
                    q.name,
                    pt.flux,
                    pt.f01,
                    pt.alpha,
                    pt.t_g_lim * 1e9
                ));
            }
        }
        if let Some(t) = table {
            out.csv("compare_flux.csv", &t, echo)?;
            files.push("compare_flux.csv");
        }
    }
    if wants(Panel::D) {
        let mut rows = Vec::new();
        for q in &specs {
            for r in relaxation_profile(q, &RelaxationAxis::Flux(fluxes.clone()), exec)? {
                rows.push((q.name.clone(), r));
            }
        }
        out.csv("compare_t1_frequency.csv", &relaxation_table(&rows), echo)?;
        files.push("compare_t1_frequency.csv");
    }
    if wants(Panel::E) {
        let mut rows = Vec::new();
        let mut markers = Vec::new();
        for q in &specs {
            for r in relaxation_profile(q, &RelaxationAxis::QDiel(c.q_diel_values.clone()), exec)? {
                rows.push((q.name.clone(), r));
            }
            let m = marker_point(q)?;
            lines.push(format!(
                "{:<10} Q_diel = {:.1e}: T1 = {:.4} ms (flux {:.4} ms)",
                q.name,
                m.q_diel,
                m.t1 * 1e3,
                m.t1_flux * 1e3
            ));
            markers.push((q.name.clone(), m));
        }
        out.csv("compare_t1_qdiel.csv", &relaxation_table(&rows), echo)?;
        out.csv("compare_markers.csv", &relaxation_table(&markers), echo)?;
        files.push("compare_t1_qdiel.csv");
        files.push("compare_markers.csv");
    }
    if wants(Panel::F) {
        let mut rows = Vec::new();
        for q in &specs {
            for r in dephasing_vs_offset(q, &c.offsets, exec)? {
                rows.push((q.name.clone(), r));
            }
        }
        out.csv("compare_dephasing.csv", &dephasing_table(&rows), echo)?;
        files.push("compare_dephasing.csv");
    }

    let doc = out.summary(
        "compare_manifest.json",
        echo,
        json!({
            "qubits": specs,
            "files": files,
            "transmon_flux_model": "E_J(flux) = E_J,max |cos(pi flux)|; no flux-noise relaxation",
            "operating_points": "unimon and fluxonium at flux 0.5, transmon at flux 0",
        }),
    )?;
    lines.push(format!("wrote {}", files.join(", ")));
    out.report(&doc, &lines)?;
    Ok(ExitCode::SUCCESS)
}

fn coherence(cfg: &RunConfig, out: &Output, echo: &Echo) -> anyhow::Result<ExitCode> {
    let c = circuit(cfg)?;
    let env = cfg.noise.env();
    env.validate()?;
    let r = relaxation_at(&c, &env)?;
    let (kappa, t_phi_first) = if c.is_sweet_spot() {
        (flux_curvature(&c)?, f64::INFINITY)
    } else {
        let reference = flux_curvature(&c.with_phi_diff(std::f64::consts::PI))?.abs()
            * qforge::compare::MAX_OFFSET;
        let slope = flux_slope_fd(&c, qforge::compare::FD_PHASE_STEP)?;
        let first = first_order_dephasing_time(slope, &env, qforge::compare::FIRST_ORDER_T_SCALE, reference)?;
        (flux_curvature_fd_converged(&c, 1e-3)?.kappa, first.t_phi)
    };
    let d = DephasingModel::new(kappa, &env);

    let mut t = CsvTable::new([
        "f01_GHz",
        "alpha_GHz",
        "t1_s",
        "t1_flux_s",
        "t1_diel_s",
        "kappa_rad_per_s_phi0sq",
        "quasirate_per_s",
        "t_phi_second_s",
        "t_phi_first_s",
    ]);
    t.push(
        [
            r.f01,
            r.alpha,
            r.relaxation.t1,
            r.relaxation.t1_flux(),
            r.relaxation.t1_diel(),
            kappa,
            d.quasirate,
            d.t_phi_tilde,
            t_phi_first,
        ]
        .iter()
        .map(|v| fmt_f64(*v))
        .collect(),
    );
    out.csv("coherence.csv", &t, echo)?;
    let doc = out.summary(
        "coherence.json",
        echo,
        json!({ "transition": r, "dephasing": d, "t_phi_first_s": t_phi_first }),
    )?;
    out.report(
        &doc,
        &[
            format!(
                "T1 = {:.4} us (flux {:.4} us, dielectric {:.4} us)",
                r.relaxation.t1 * 1e6,
                r.relaxation.t1_flux() * 1e6,
                r.relaxation.t1_diel() * 1e6
            ),
            format!(
                "kappa = {:.4e} rad/s/Phi0^2, second-order T_phi = {:.4} us, first-order T_phi = {:.4} us",
                kappa,
                d.t_phi_tilde * 1e6,
                t_phi_first * 1e6
            ),
        ],
    )?;
    Ok(ExitCode::SUCCESS)
}

fn fidelity(cfg: &RunConfig, out: &Output, echo: &Echo) -> anyhow::Result<ExitCode> {
    let c = circuit(cfg)?;
    let env = cfg.noise.env();
    let b = infidelity_at_with(&c, &env, envelope_mode(cfg))?;
    let mut t = CsvTable::new([
        "f01_GHz",
        "alpha_GHz",
        "t_g_s",
        "gamma1_per_s",
        "quasirate_per_s",
        "envelope_re",
        "infidelity",
        "envelope_clamped",
    ]);
    let mut row: Vec<String> = [
        b.f01,
        b.alpha,
        b.gate.t_g,
        b.relaxation.gamma1_total,
        b.dephasing.quasirate,
        b.envelope_re,
        b.infidelity,
    ]
    .iter()
    .map(|v| fmt_f64(*v))
    .collect();
    row.push(b.envelope_clamped.to_string());
    t.push(row);
    out.csv("fidelity.csv", &t, echo)?;
    let doc = out.summary("fidelity.json", echo, serde_json::to_value(b)?)?;
    let mut lines = vec![format!(
        "average gate infidelity {:.4e} (t_g = {:.3} ns, T1 = {:.4} us)",
        b.infidelity,
        b.gate.t_g * 1e9,
        b.relaxation.t1 * 1e6
    )];
    if b.envelope_clamped {
        lines.push("warning: gate outlasts the dephasing envelope's domain; envelope clamped".to_string());
    }
    out.report(&doc, &lines)?;
    Ok(ExitCode::SUCCESS)
}

fn validate(only: &[usize], sweep_points: usize, r_k: Option<f64>, out: &Output) -> anyhow::Result<ExitCode> {
    let mut opts = AcceptanceOptions {
        sweep_points,
        ..AcceptanceOptions::default()
    };
    if let Some(r_k) = r_k {
        opts.r_k = r_k;
    }
    let ids: Vec<usize> = if only.is_empty() {
        (1..=acceptance::CRITERIA).collect()
    } else {
        only.to_vec()
    };
    let mut reports = Vec::new();
    for id in ids {
        let r = acceptance::run(id, &opts)
            .ok_or_else(|| ConfigError(format!("no criterion {id} (valid: 1..={})", acceptance::CRITERIA)))?;
        if !out.json {
            emit(&r.line())?;
        }
        reports.push(r);
    }
    let passed = reports.iter().all(|r| r.passed);
    if out.json {
        let doc = json!({
            "tool": "qforge",
            "version": VERSION,
            "options": opts,
            "passed": passed,
            "criteria": reports,
        });
        emit(&serde_json::to_string_pretty(&doc)?)?;
    }
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
