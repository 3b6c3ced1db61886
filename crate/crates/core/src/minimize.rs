//! Convexity-constrained descent of the critical energy over support
//! functions, and diagnostics for sequences of curves.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{support_to_curve, ArcCurve, SupportCurve};
use crate::energy::{local_energy, willmore_energy, FracParams};
use crate::error::{FracError, Result};

/// Floor on `h + h″` accepted when evaluating energies.
fn eval_floor(sc: &SupportCurve) -> f64 {
    1e-9 * sc.a0.abs()
}

/// Critical energy `𝒲_{s,1/s}` of the curve with support function `sc`.
pub fn energy_of_support(sc: &SupportCurve, s: f64, n: usize) -> Result<f64> {
    let params = FracParams::critical(s)?;
    let curve = support_to_curve(sc, n, eval_floor(sc))?;
    Ok(willmore_energy(&curve, params, None, None, false)?.total)
}

/// Central-difference gradient over `[a0, a_2, b_2, …]`.
pub fn fd_gradient(sc: &SupportCurve, s: f64, n: usize, h_fd: f64) -> Result<Vec<f64>> {
    if !(h_fd >= 1e-6 * sc.a0) {
        return Err(FracError::Parameter(format!("h_fd = {h_fd} below 1e-6·a0")));
    }
    let x = sc.to_vec();
    (0..x.len())
        .into_par_iter()
        .map(|c| {
            let probe = |h: f64| -> Result<f64> {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[c] += h;
                xm[c] -= h;
                let ep = energy_of_support(&sc.from_vec(&xp), s, n)?;
                let em = energy_of_support(&sc.from_vec(&xm), s, n)?;
                Ok((ep - em) / (2.0 * h))
            };
            match probe(h_fd) {
                Err(FracError::ConstraintViolation { .. }) => probe(h_fd / 10.0),
                r => r,
            }
        })
        .collect()
}

const PROJ_GRID: usize = 4096;
const SWEEPS: usize = 100;

/// Nearest-in-coefficients support function with `h + h″ ≥ ε_κ`, by
/// alternating clipping of `ρ` on a dense grid and projection back onto
/// the trigonometric span.
pub fn project_convex(sc: &SupportCurve, eps_kappa: f64) -> Result<SupportCurve> {
    if sc.min_radius(PROJ_GRID) >= eps_kappa {
        return Ok(sc.clone());
    }
    let theta: Vec<f64> = (0..PROJ_GRID).map(|j| TAU * j as f64 / PROJ_GRID as f64).collect();
    // clip slightly above the floor so the iteration terminates
    let target = eps_kappa + 1e-6 * sc.a0.abs().max(eps_kappa);
    let mut cur = sc.clone();
    for _ in 0..SWEEPS {
        let rho: Vec<f64> = theta.iter().map(|&t| cur.radius_of_curvature(t).max(target)).collect();
        // ρ = a0 + Σ (1 − k²)(a_k cos kθ + b_k sin kθ)
        let mean = rho.iter().sum::<f64>() / PROJ_GRID as f64;
        let coeffs = cur
            .coeffs
            .iter()
            .map(|&(k, _, _)| {
                let (mut ca, mut cb) = (0.0, 0.0);
                for (r, &t) in rho.iter().zip(&theta) {
                    let (s, c) = (k as f64 * t).sin_cos();
                    ca += r * c;
                    cb += r * s;
                }
                let norm = 2.0 / PROJ_GRID as f64 / (1.0 - (k * k) as f64);
                (k, ca * norm, cb * norm)
            })
            .collect();
        cur = SupportCurve { a0: mean, coeffs };
        if cur.min_radius(PROJ_GRID) >= eps_kappa {
            return Ok(cur);
        }
    }
    // ρ is linear in the coefficients, so shrinking the oscillating part
    // toward the circle with the same a0 reaches the floor exactly.
    if cur.a0 <= target {
        return Err(FracError::ProjectionFailure(SWEEPS));
    }
    let t = theta
        .iter()
        .map(|&th| cur.radius_of_curvature(th))
        .filter(|&r| r < target)
        .map(|r| (target - r) / (cur.a0 - r))
        .fold(0.0, f64::max);
    let keep = 1.0 - t;
    Ok(SupportCurve { a0: cur.a0, coeffs: cur.coeffs.iter().map(|&(k, a, b)| (k, a * keep, b * keep)).collect() })
}

/// Scale gauge: perimeter `2π`.
pub fn gauge_fix(sc: &SupportCurve) -> SupportCurve {
    let a0 = sc.a0;
    SupportCurve {
        a0: 1.0,
        coeffs: sc.coeffs.iter().map(|&(k, a, b)| (k, a / a0, b / a0)).collect(),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DescentConfig {
    pub s: f64,
    pub k: usize,
    pub n: usize,
    pub step0: f64,
    pub shrink: f64,
    pub grow: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub eps_kappa: f64,
    pub seed: u64,
    pub h_fd: f64,
}

impl Default for DescentConfig {
    fn default() -> Self {
        DescentConfig {
            s: 0.5,
            k: 8,
            n: 256,
            step0: 0.05,
            shrink: 0.5,
            grow: 1.5,
            max_iters: 20,
            grad_tol: 1e-5,
            eps_kappa: 1e-3,
            seed: 0,
            h_fd: 1e-4,
        }
    }
}

impl DescentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.shrink && self.shrink < 1.0 && self.grow > 1.0) {
            return Err(FracError::Parameter("need 0 < shrink < 1 < grow".into()));
        }
        if !(self.grad_tol > 0.0 && self.step0 > 0.0) {
            return Err(FracError::Parameter("grad_tol and step0 must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Iterate {
    pub curve: SupportCurve,
    pub energy: f64,
    pub grad_norm: f64,
    pub step: f64,
    pub accepted: bool,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradTol,
    MaxIters,
    StepCollapse,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DescentTrace {
    pub iterates: Vec<Iterate>,
    pub final_curve: SupportCurve,
    pub final_energy: f64,
    pub termination: Termination,
}

impl DescentTrace {
    pub fn accepted_energies(&self) -> Vec<f64> {
        self.iterates.iter().filter(|i| i.accepted).map(|i| i.energy).collect()
    }
}

/// Random support function with `k`-th mode amplitudes `~ amplitude/k²`.
pub fn random_support(k_max: usize, amplitude: f64, seed: u64) -> SupportCurve {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SupportCurve {
        a0: 1.0,
        coeffs: (2..=k_max)
            .map(|k| {
                let w = amplitude / (k * k) as f64;
                (k, w * (2.0 * rng.random::<f64>() - 1.0), w * (2.0 * rng.random::<f64>() - 1.0))
            })
            .collect(),
    }
}

/// Projected gradient descent with backtracking. The scale direction is
/// flat at the critical exponent, so `a0` is gauge-fixed and only the
/// shape modes move.
pub fn minimize_descent(config: &DescentConfig, init: &SupportCurve) -> Result<DescentTrace> {
    config.validate()?;
    let (s, n) = (config.s, config.n);
    let mut full = SupportCurve::zeros(init.a0, config.k.max(init.order()));
    for &(k, a, b) in &init.coeffs {
        if let Some(c) = full.coeffs.iter_mut().find(|c| c.0 == k) {
            c.1 = a;
            c.2 = b;
        }
    }
    let mut x = project_convex(&gauge_fix(&full), config.eps_kappa)?;
    let mut e = energy_of_support(&x, s, n)?;
    if !e.is_finite() {
        return Err(FracError::Precondition(format!("initial energy {e} not finite")));
    }
    let mut step = config.step0;
    let mut iterates = vec![Iterate { curve: x.clone(), energy: e, grad_norm: f64::NAN, step: 0.0, accepted: true }];
    let mut termination = Termination::MaxIters;
    'outer: for _ in 0..config.max_iters {
        let mut g = fd_gradient(&x, s, n, config.h_fd)?;
        g[0] = 0.0;
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if let Some(last) = iterates.last_mut() {
            if last.grad_norm.is_nan() {
                last.grad_norm = gnorm;
            }
        }
        if gnorm < config.grad_tol {
            termination = Termination::GradTol;
            break;
        }
        loop {
            if step < 1e-12 {
                termination = Termination::StepCollapse;
                break 'outer;
            }
            let xv = x.to_vec();
            let trial: Vec<f64> = xv.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            let cand = project_convex(&gauge_fix(&x.from_vec(&trial)), config.eps_kappa)?;
            let ec = energy_of_support(&cand, s, n)?;
            if ec <= e {
                x = cand;
                e = ec;
                iterates.push(Iterate { curve: x.clone(), energy: e, grad_norm: f64::NAN, step, accepted: true });
                step *= config.grow;
                break;
            }
            iterates.push(Iterate { curve: cand, energy: ec, grad_norm: f64::NAN, step, accepted: false });
            step *= config.shrink;
        }
    }
    Ok(DescentTrace { iterates, final_curve: x, final_energy: e, termination })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LscReport {
    pub w_limit: f64,
    pub liminf_proxy: f64,
    pub energies: Vec<f64>,
    pub holds: bool,
}

pub const TOL_LSC: f64 = 1e-4;

/// `𝒲(limit) ≤ min over the last half of 𝒲(γ_k)`, relative tolerance 1e-4.
pub fn lsc_check(sequence: &[ArcCurve], limit: &ArcCurve, s: f64) -> Result<LscReport> {
    if sequence.len() < 4 {
        return Err(FracError::Parameter("sequence needs at least 4 curves".into()));
    }
    if sequence.iter().any(|c| c.len() != limit.len()) {
        return Err(FracError::Parameter("all curves must share N".into()));
    }
    let params = FracParams::critical(s)?;
    let energies = sequence
        .iter()
        .map(|c| Ok(willmore_energy(c, params, None, None, false)?.total))
        .collect::<Result<Vec<f64>>>()?;
    let w_limit = willmore_energy(limit, params, None, None, false)?.total;
    let liminf_proxy = energies[energies.len() / 2..].iter().cloned().fold(f64::INFINITY, f64::min);
    let holds = w_limit <= liminf_proxy + TOL_LSC * liminf_proxy.abs();
    Ok(LscReport { w_limit, liminf_proxy, energies, holds })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConcentrationPoint {
    /// Arc position as a fraction of the length.
    pub position: f64,
    /// Smallest local energy per radius over the tail.
    pub local_energies: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConcentrationReport {
    pub points: Vec<ConcentrationPoint>,
    pub eps: f64,
    pub radii: Vec<f64>,
    pub lambda: f64,
    pub bound: u64,
    pub within_bound: bool,
}

/// Positions where the windowed absolute critical energy on `B(x0, r)`
/// exceeds `ε` for every radius and every curve in the second half of
/// the sequence. Adjacent flagged nodes form one point.
pub fn concentration_scan(sequence: &[ArcCurve], s: f64, eps: f64, radii: &[f64]) -> Result<ConcentrationReport> {
    if !(eps > 0.0) {
        return Err(FracError::Parameter("eps must be positive".into()));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(FracError::Parameter("radii must be decreasing".into()));
    }
    let n = sequence.first().map(|c| c.len()).unwrap_or(0);
    if n == 0 || sequence.iter().any(|c| c.len() != n) {
        return Err(FracError::Parameter("sequence must be non-empty with shared N".into()));
    }
    let params = FracParams::critical(s)?;
    let lambda = sequence
        .iter()
        .map(|c| Ok(willmore_energy(c, params, None, None, true)?.total_raw))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let tail = &sequence[sequence.len() / 2..];
    // min over tail curves of local energy, per radius and node
    let mut local = vec![vec![f64::INFINITY; n]; radii.len()];
    for c in tail {
        for (ri, &r) in radii.iter().enumerate() {
            let vals = (0..n)
                .into_par_iter()
                .map(|i| {
                    let x0 = c.arc_param(i);
                    local_energy(c, params, (x0 - r, x0 + r))
                })
                .collect::<Result<Vec<f64>>>()?;
            for (m, v) in local[ri].iter_mut().zip(vals) {
                *m = m.min(v);
            }
        }
    }
    let flagged: Vec<bool> = (0..n).map(|i| local.iter().all(|row| row[i] > eps)).collect();
    let mut points = Vec::new();
    if flagged.iter().all(|&f| f) {
        points.push(ConcentrationPoint { position: 0.0, local_energies: local.iter().map(|r| r[0]).collect() });
    } else if flagged.iter().any(|&f| f) {
        let start = (0..n).find(|&i| !flagged[i]).unwrap();
        let mut i = 0;
        while i < n {
            let j = (start + i) % n;
            if flagged[j] {
                let mut len = 0;
                while len < n && flagged[(j + len) % n] {
                    len += 1;
                }
                let best = (0..len)
                    .map(|o| (j + o) % n)
                    .max_by(|&a, &b| local[0][a].partial_cmp(&local[0][b]).unwrap())
                    .unwrap();
                points.push(ConcentrationPoint {
                    position: best as f64 / n as f64,
                    local_energies: local.iter().map(|r| r[best]).collect(),
                });
                i += len;
            } else {
                i += 1;
            }
        }
    }
    let bound = (2f64.powf(params.p) * lambda / eps).floor() as u64;
    Ok(ConcentrationReport {
        within_bound: points.len() as u64 <= bound,
        points,
        eps,
        radii: radii.to_vec(),
        lambda,
        bound,
    })
}
