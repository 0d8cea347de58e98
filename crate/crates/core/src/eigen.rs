//! Numerical reference spectra.
//!
//! The single-mode Hamiltonian is discretised on a uniform phase grid with a
//! three-point Laplacian and Dirichlet ends, giving a symmetric tridiagonal
//! matrix for any bias. The transmon is handled separately in the integer
//! charge basis.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::model::{ghz_to_rad_per_s, CircuitEnergies, DimensionlessPotential};
use crate::numeric::bisect;
use crate::tridiag::SymTridiagonal;
use crate::variational::theta_root;

/// Most levels [`diagonalize`] will compute.
pub const MAX_LEVELS: usize = 12;
/// Most levels [`transmon_diagonalize`] will compute.
pub const MAX_CHARGE_LEVELS: usize = 6;
/// Smallest admissible charge-basis cutoff.
pub const MIN_CHARGE_CUTOFF: usize = 30;

const MIN_POINTS: usize = 201;
const DEFAULT_MIN_POINTS: usize = 2001;
const DEFAULT_MAX_POINTS: usize = 48_001;
/// Grid step in units of the narrowest trial-state width `1/sqrt(theta2)`.
const STEP_PER_WIDTH: f64 = 0.002;
const LEAKAGE_LIMIT: f64 = 1e-8;
pub const MAX_WIDENINGS: usize = 3;
const EDGE_POPULATION_LIMIT: f64 = 1e-10;

/// Uniform phase grid. Points are laid out symmetrically about the centre,
/// so a grid centred at zero is exactly mirror symmetric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub phi_min: f64,
    pub phi_max: f64,
    pub n_points: usize,
}

impl PhaseGrid {
    pub fn new(phi_min: f64, phi_max: f64, n_points: usize) -> Result<Self> {
        if !(phi_min.is_finite() && phi_max.is_finite() && phi_min < phi_max) {
            return Err(Error::InvalidParameter {
                name: "phi_max",
                value: phi_max,
                reason: "grid bounds must be finite with phi_min < phi_max",
            });
        }
        if n_points < MIN_POINTS {
            return Err(Error::InvalidParameter {
                name: "n_points",
                value: n_points as f64,
                reason: "phase grid needs at least 201 points",
            });
        }
        Ok(Self {
            phi_min,
            phi_max,
            n_points,
        })
    }

    pub fn centered(center: f64, half_width: f64, n_points: usize) -> Result<Self> {
        Self::new(center - half_width, center + half_width, n_points)
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.phi_min + self.phi_max)
    }

    pub fn spacing(&self) -> f64 {
        (self.phi_max - self.phi_min) / (self.n_points - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        let mid = 0.5 * (self.n_points - 1) as f64;
        self.center() + (i as f64 - mid) * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    /// Same interval with half the spacing.
    /// Half as wide again, same spacing.
    pub fn widened(&self) -> Self {
        let half = (self.n_points - 1) / 2;
        let extra = half / 2;
        let h = self.spacing();
        let center = self.center();
        let n = 2 * (half + extra) + 1;
        Self {
            phi_min: center - (half + extra) as f64 * h,
            phi_max: center + (half + extra) as f64 * h,
            n_points: n,
        }
    }

    pub fn refined(&self) -> Self {
        Self {
            n_points: 2 * (self.n_points - 1) + 1,
            ..*self
        }
    }
}

fn potential(c: &CircuitEnergies, phi: f64) -> f64 {
    0.5 * c.e_l * phi * phi - c.e_j * (phi - c.phi_diff).cos()
}

/// Location of the global potential minimum.
///
/// The minimum always lies in `[-pi, pi]` because shifting by `2 pi` towards
/// the origin lowers the inductive term. When the two mirror points have the
/// same energy (sweet-spot double well, or a single well centred at zero) the
/// origin is returned.
pub fn potential_minimum(c: &CircuitEnergies) -> f64 {
    const SAMPLES: usize = 2001;
    let step = 2.0 * PI / (SAMPLES - 1) as f64;
    let at = |i: usize| -PI + i as f64 * step;
    let mut best = 0;
    let mut best_v = f64::INFINITY;
    for i in 0..SAMPLES {
        let v = potential(c, at(i));
        if v < best_v {
            best_v = v;
            best = i;
        }
    }
    let slope = |phi: f64| c.e_l * phi + c.e_j * (phi - c.phi_diff).sin();
    let lo = at(best.saturating_sub(1));
    let hi = at((best + 1).min(SAMPLES - 1));
    let mu = bisect(slope, lo, hi, 1e-14).unwrap_or(at(best));

    let scale = c.e_j + c.e_l * PI * PI;
    if (potential(c, mu) - potential(c, -mu)).abs() <= 1e-12 * scale {
        0.0
    } else {
        mu
    }
}

/// Phase grid adapted to the potential of `c`.
///
/// Centred on the potential minimum with half-width
/// `max(12, 10/sqrt(theta0)) + |mu|` and a step proportional to the width of
/// the narrowest of the three lowest trial states, where the widths are
/// estimated from the local curvature and the quartic coefficient.
pub fn default_grid(c: &CircuitEnergies) -> Result<PhaseGrid> {
    c.validate()?;
    ensure_positive("e_l", c.e_l)?;
    let mu = potential_minimum(c);
    let curvature = c.e_l + c.e_j * (mu - c.phi_diff).cos();
    let p = DimensionlessPotential::new(
        curvature.max(0.0) / (4.0 * c.e_c),
        c.e_j / (4.0 * c.e_c),
    )?;
    let theta0 = theta_root(0, &p)?;
    let theta2 = theta_root(2, &p)?;
    let half_width = (10.0 / theta0.sqrt()).max(12.0) + mu.abs();
    let step = STEP_PER_WIDTH / theta2.sqrt();
    let mut n = (2.0 * half_width / step).ceil() as usize + 1;
    n = n.clamp(DEFAULT_MIN_POINTS, DEFAULT_MAX_POINTS);
    if n.is_multiple_of(2) {
        n += 1;
    }
    PhaseGrid::centered(mu, half_width, n)
}

/// Lowest eigenpairs on a phase grid. States are normalised so that
/// `sum_i psi_i^2 h = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Level energies `E/h` in GHz, ascending.
    pub energies: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub grid: PhaseGrid,
}

impl Spectrum {
    pub fn levels(&self) -> usize {
        self.energies.len()
    }

    fn check(&self, level: usize) -> Result<()> {
        if level >= self.levels() {
            return Err(Error::LevelOutOfRange {
                index: level,
                available: self.levels(),
            });
        }
        Ok(())
    }

    /// `E1 - E0` in GHz.
    pub fn f01(&self) -> f64 {
        self.energies[1] - self.energies[0]
    }

    /// `E2 - E1` in GHz.
    pub fn f12(&self) -> f64 {
        self.energies[2] - self.energies[1]
    }

    /// Signed anharmonicity `(E2 - 2 E1 + E0)/h` in GHz.
    pub fn alpha(&self) -> f64 {
        self.f12() - self.f01()
    }

    /// Grid quadrature `sum_k psi_i psi_j h`.
    pub fn overlap(&self, i: usize, j: usize) -> Result<f64> {
        self.check(i)?;
        self.check(j)?;
        let h = self.grid.spacing();
        Ok(self.states[i]
            .iter()
            .zip(&self.states[j])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * h)
    }
}

/// Lowest `k` levels of `4 E_C n^2 + E_L phi^2/2 - E_J cos(phi - phi_diff)` on `grid`.
pub fn diagonalize(c: &CircuitEnergies, grid: &PhaseGrid, k: usize) -> Result<Spectrum> {
    c.validate()?;
    ensure_positive("e_l", c.e_l)?;
    if k == 0 || k > MAX_LEVELS {
        return Err(Error::InvalidParameter {
            name: "k",
            value: k as f64,
            reason: "number of levels must be in 1..=12",
        });
    }
    let h = grid.spacing();
    let kinetic = 4.0 * c.e_c / (h * h);
    let diag: Vec<f64> = (0..grid.n_points)
        .map(|i| 2.0 * kinetic + potential(c, grid.point(i)))
        .collect();
    let off = vec![-kinetic; grid.n_points - 1];
    let t = SymTridiagonal::new(diag, off)?;
    let (energies, vectors) = t.lowest_eigenpairs(k)?;

    let norm = 1.0 / h.sqrt();
    let mut states = Vec::with_capacity(vectors.len());
    for (level, mut v) in vectors.into_iter().enumerate() {
        v.iter_mut().for_each(|x| *x *= norm);
        let edge = v[0].abs().max(v[v.len() - 1].abs());
        if edge >= LEAKAGE_LIMIT {
            return Err(Error::BoundaryLeakage {
                level,
                amplitude: edge,
            });
        }
        states.push(v);
    }
    Ok(Spectrum {
        energies,
        states,
        grid: *grid,
    })
}

/// [`diagonalize`] on the [`default_grid`] of `c`. If a state reaches the
/// grid edge (weakly confining inductance), the grid is widened at fixed
/// spacing up to [`MAX_WIDENINGS`] times.
pub fn diagonalize_default(c: &CircuitEnergies, k: usize) -> Result<Spectrum> {
    let mut grid = default_grid(c)?;
    let mut widenings = 0;
    loop {
        match diagonalize(c, &grid, k) {
            Err(Error::BoundaryLeakage { .. }) if widenings < MAX_WIDENINGS => {
                grid = grid.widened();
                widenings += 1;
            }
            other => return other,
        }
    }
}

/// `|<i|phi|j>|` by grid quadrature.
pub fn matrix_element_phi(s: &Spectrum, i: usize, j: usize) -> Result<f64> {
    s.check(i)?;
    s.check(j)?;
    let h = s.grid.spacing();
    let sum: f64 = s.states[i]
        .iter()
        .zip(&s.states[j])
        .enumerate()
        .map(|(k, (a, b))| a * s.grid.point(k) * b)
        .sum();
    Ok((sum * h).abs())
}

/// `|<i|n|j>|` with `n = -i d/dphi` taken as a central difference.
///
/// With the three-point kinetic term this satisfies the commutator identity
/// `|n_ij| = |E_j - E_i| |phi_ij| / (8 E_C)` exactly on the grid.
pub fn matrix_element_n(s: &Spectrum, i: usize, j: usize) -> Result<f64> {
    s.check(i)?;
    s.check(j)?;
    let (a, b) = (&s.states[i], &s.states[j]);
    let n = b.len();
    let at = |k: isize| {
        if k < 0 || k as usize >= n {
            0.0
        } else {
            b[k as usize]
        }
    };
    let sum: f64 = (0..n)
        .map(|k| a[k] * (at(k as isize + 1) - at(k as isize - 1)))
        .sum();
    // h from the quadrature cancels the 1/(2h) of the difference
    Ok((0.5 * sum).abs())
}

/// Second-order perturbative flux curvature from a sweet-spot spectrum with
/// at least three levels, in rad/s per flux quantum squared.
pub fn flux_curvature_from(s: &Spectrum, e_l: f64) -> Result<f64> {
    let p = |i, j| matrix_element_phi(s, i, j).map(|m| m * m);
    let e = &s.energies;
    if e.len() < 3 {
        return Err(Error::LevelOutOfRange {
            index: 2,
            available: e.len(),
        });
    }
    let excited = p(0, 1)? / (e[1] - e[0]) + p(2, 1)? / (e[1] - e[2]);
    let ground = p(1, 0)? / (e[0] - e[1]) + p(2, 0)? / (e[0] - e[2]);
    // E_L^2 / E with energies in GHz gives GHz; the bracket is d^2 f01 / d phi^2 / 2
    Ok(2.0 * 4.0 * PI * PI * ghz_to_rad_per_s(e_l * e_l * (excited - ground)))
}

/// Flux curvature `d^2 omega01 / d Phi^2` at the sweet spot from the
/// three-level perturbative sum, in rad/s per flux quantum squared.
pub fn flux_curvature(c: &CircuitEnergies) -> Result<f64> {
    c.validate()?;
    if !c.is_sweet_spot() {
        return Err(Error::NotSweetSpot {
            phi_diff: c.phi_diff,
        });
    }
    if c.e_j == 0.0 {
        return Ok(0.0);
    }
    let s = diagonalize_default(c, 3)?;
    flux_curvature_from(&s, c.e_l)
}

/// Finite-difference curvature with a Richardson check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureEstimate {
    /// Central second difference with step `h`, rad/s per flux quantum squared.
    pub kappa: f64,
    /// Same with step `h/2`.
    pub kappa_half_step: f64,
    /// Set when the two estimates disagree by more than 10 %.
    pub step_warning: bool,
}

/// `omega01(phi_diff)` evaluations on one fixed grid around `c.phi_diff`.
fn omega01_at(c: &CircuitEnergies, grid: &PhaseGrid, phi_diff: f64) -> Result<f64> {
    let s = diagonalize(&c.with_phi_diff(phi_diff), grid, 2)?;
    Ok(ghz_to_rad_per_s(s.f01()))
}

fn check_step(h: f64) -> Result<()> {
    if !(1e-4..=1e-1).contains(&h) {
        return Err(Error::InvalidParameter {
            name: "h",
            value: h,
            reason: "finite-difference step must be in [1e-4, 1e-1] rad",
        });
    }
    Ok(())
}

/// Central second difference of `omega01` in the bias phase around
/// `c.phi_diff` (normally the sweet spot), converted to flux units.
pub fn flux_curvature_fd(c: &CircuitEnergies, h: f64) -> Result<CurvatureEstimate> {
    c.validate()?;
    check_step(h)?;
    if c.e_j == 0.0 {
        return Ok(CurvatureEstimate {
            kappa: 0.0,
            kappa_half_step: 0.0,
            step_warning: false,
        });
    }
    let center = diagonalize_default(c, 2)?;
    let grid = center.grid;
    let w = |d: f64| omega01_at(c, &grid, c.phi_diff + d);
    let w0 = ghz_to_rad_per_s(center.f01());
    let second = |step: f64| -> Result<f64> {
        let d2 = (w(step)? - 2.0 * w0 + w(-step)?) / (step * step);
        Ok(4.0 * PI * PI * d2)
    };
    let kappa = second(h)?;
    let kappa_half_step = second(0.5 * h)?;
    let scale = kappa.abs().max(kappa_half_step.abs());
    let step_warning = scale > 0.0 && (kappa - kappa_half_step).abs() > 0.1 * scale;
    Ok(CurvatureEstimate {
        kappa,
        kappa_half_step,
        step_warning,
    })
}

/// [`flux_curvature_fd`] with the step halved from `1e-2` until two
/// successive estimates agree to `rel_tol`. If they never do before the step
/// reaches `1e-4`, roundoff dominates and the larger step of the
/// best-agreeing pair is used, with `step_warning` set.
pub fn flux_curvature_fd_converged(c: &CircuitEnergies, rel_tol: f64) -> Result<CurvatureEstimate> {
    if c.e_j == 0.0 {
        return flux_curvature_fd(c, 1e-2);
    }
    let mut h = 1e-2;
    let mut best: Option<(f64, CurvatureEstimate)> = None;
    while h >= 1e-4 {
        let est = flux_curvature_fd(c, h)?;
        let spread = (est.kappa - est.kappa_half_step).abs();
        if est.kappa_half_step != 0.0 && spread <= rel_tol * est.kappa_half_step.abs() {
            return Ok(CurvatureEstimate {
                kappa: est.kappa_half_step,
                step_warning: false,
                ..est
            });
        }
        let rel = spread / est.kappa_half_step.abs();
        if rel.is_finite() && best.is_none_or(|(r, _)| rel < r) {
            best = Some((rel, est));
        }
        h /= 2.0;
    }
    let (_, est) = best.ok_or(Error::NoConvergence {
        what: "finite-difference curvature",
        iterations: 7,
        residual: f64::NAN,
    })?;
    Ok(CurvatureEstimate {
        step_warning: true,
        ..est
    })
}

/// Central first difference `d omega01 / d Phi` around `c.phi_diff`,
/// in rad/s per flux quantum.
pub fn flux_slope_fd(c: &CircuitEnergies, h: f64) -> Result<f64> {
    c.validate()?;
    check_step(h)?;
    if c.e_j == 0.0 {
        return Ok(0.0);
    }
    let grid = diagonalize_default(c, 2)?.grid;
    let d = (omega01_at(c, &grid, c.phi_diff + h)? - omega01_at(c, &grid, c.phi_diff - h)?)
        / (2.0 * h);
    Ok(2.0 * PI * d)
}

/// Transmon levels in the charge basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeSpectrum {
    /// Level energies `E/h` in GHz, ascending.
    pub energies: Vec<f64>,
    /// Basis spans charge states `-cutoff..=cutoff`.
    pub cutoff: usize,
    /// Largest population found in the two outermost charge states.
    pub edge_population: f64,
    /// Unit-norm eigenvectors over the charge states.
    pub states: Vec<Vec<f64>>,
}

impl ChargeSpectrum {
    pub fn f01(&self) -> f64 {
        self.energies[1] - self.energies[0]
    }

    pub fn f12(&self) -> f64 {
        self.energies[2] - self.energies[1]
    }

    pub fn alpha(&self) -> f64 {
        self.f12() - self.f01()
    }

    /// `|<i|n|j>|` in the charge basis.
    pub fn charge_element(&self, i: usize, j: usize) -> Result<f64> {
        let available = self.states.len();
        for index in [i, j] {
            if index >= available {
                return Err(Error::LevelOutOfRange { index, available });
            }
        }
        let offset = self.cutoff as f64;
        let sum: f64 = self.states[i]
            .iter()
            .zip(&self.states[j])
            .enumerate()
            .map(|(m, (a, b))| a * (m as f64 - offset) * b)
            .sum();
        Ok(sum.abs())
    }
}

/// Lowest `k` levels of `4 E_C (n - n_g)^2 - E_J cos(phi)`.
pub fn transmon_diagonalize(
    e_j: f64,
    e_c: f64,
    n_g: f64,
    cutoff: usize,
    k: usize,
) -> Result<ChargeSpectrum> {
    ensure_non_negative("e_j", e_j)?;
    ensure_positive("e_c", e_c)?;
    if !n_g.is_finite() {
        return Err(Error::InvalidParameter {
            name: "n_g",
            value: n_g,
            reason: "must be finite",
        });
    }
    if cutoff < MIN_CHARGE_CUTOFF {
        return Err(Error::InvalidParameter {
            name: "cutoff",
            value: cutoff as f64,
            reason: "charge cutoff must be at least 30",
        });
    }
    if k == 0 || k > MAX_CHARGE_LEVELS {
        return Err(Error::InvalidParameter {
            name: "k",
            value: k as f64,
            reason: "number of levels must be in 1..=6",
        });
    }
    let size = 2 * cutoff + 1;
    let diag: Vec<f64> = (0..size)
        .map(|i| {
            let n = i as f64 - cutoff as f64;
            4.0 * e_c * (n - n_g) * (n - n_g)
        })
        .collect();
    let off = vec![-0.5 * e_j; size - 1];
    let t = SymTridiagonal::new(diag, off)?;
    let (energies, vectors) = t.lowest_eigenpairs(k)?;
    let edge_population = vectors
        .iter()
        .map(|v| (v[0] * v[0]).max(v[size - 1] * v[size - 1]))
        .fold(0.0, f64::max);
    if edge_population > EDGE_POPULATION_LIMIT {
        return Err(Error::CutoffTooSmall {
            population: edge_population,
        });
    }
    Ok(ChargeSpectrum {
        energies,
        cutoff,
        edge_population,
        states: vectors,
    })
}
