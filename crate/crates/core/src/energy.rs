//! Nonlocal Willmore energies `𝒲_{s,p} = ∫ |I(x)|^p dx` with
//! `I(x) = ∫⟨n(γ(y)), γ(y) − γ(x)⟩/|γ(y) − γ(x)|^{2+s} dy`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{check_s, corner_coefficient, in_window, inner_integral, InnerOpts};
use crate::curve::{corner_threshold, ArcCurve};
use crate::error::{FracError, Result};
use crate::geom::{self, Point};
use crate::special::integrate_graded;

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct FracParams {
    pub s: f64,
    pub p: f64,
    pub critical: bool,
}

impl FracParams {
    pub fn new(s: f64, p: f64) -> Result<FracParams> {
        check_s(s)?;
        if !(p >= 1.0) {
            return Err(FracError::Parameter(format!("p = {p} must be >= 1")));
        }
        Ok(FracParams { s, p, critical: (p * s - 1.0).abs() <= 1e-12 })
    }

    /// `p = 1/s`.
    pub fn critical(s: f64) -> Result<FracParams> {
        check_s(s)?;
        FracParams::new(s, 1.0 / s)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EnergyBreakdown {
    /// Energy including the corner-singularity correction (equal to
    /// `total_raw` unless the correction applies).
    pub total: f64,
    /// Plain sum `Σ |I_i|^p Δ` over the outer window.
    pub total_raw: f64,
    /// `I(x_i)` per node; zero for nodes outside the outer window.
    pub inner: Vec<f64>,
    pub params: FracParams,
    pub window_outer: Option<(f64, f64)>,
    pub window_inner: Option<(f64, f64)>,
    pub absolute: bool,
    pub n: usize,
    pub spacing: f64,
    pub delta: f64,
    pub corners_corrected: usize,
}

/// Nodes on each side of a corner entering the singular fit.
fn corner_window(n: usize) -> usize {
    (n / 64).max(8)
}

/// Nearest nodes replaced by the model in the corrected sum.
const CORNER_SKIP: usize = 2;

pub fn willmore_energy(
    curve: &ArcCurve,
    params: FracParams,
    window_outer: Option<(f64, f64)>,
    window_inner: Option<(f64, f64)>,
    absolute: bool,
) -> Result<EnergyBreakdown> {
    let n = curve.len();
    let l = curve.length();
    let opts = InnerOpts { window: window_inner, absolute, band: 0 };
    let inner = (0..n)
        .into_par_iter()
        .map(|i| {
            if window_outer.is_none_or(|w| in_window(curve.arc_param(i), w, l)) {
                inner_integral(curve, params.s, i, opts)
            } else {
                Ok(0.0)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let p = params.p;
    let total_raw = inner.iter().map(|v| v.abs().powf(p)).sum::<f64>() * curve.spacing;
    let mut total = total_raw;
    let mut corners_corrected = 0;
    if window_outer.is_none() && window_inner.is_none() && p * params.s < 1.0 {
        for c in sharp_corners(curve) {
            total += corner_correction(curve, &inner, &c, params);
            corners_corrected += 1;
        }
    }
    Ok(EnergyBreakdown {
        total,
        total_raw,
        inner,
        params,
        window_outer,
        window_inner,
        absolute,
        n,
        spacing: curve.spacing,
        delta: crate::curvature::BAND_NODES as f64 * curve.spacing,
        corners_corrected,
    })
}

/// Straight-edge corner between nodes `before` and `after`.
#[derive(Clone, Copy, Debug)]
struct SharpCorner {
    before: usize,
    after: usize,
    vertex: Point,
    turn: f64,
    window: usize,
}

/// Corners flagged as a pair of adjacent nodes with straight edges on both
/// sides for at least the fit window.
fn sharp_corners(curve: &ArcCurve) -> Vec<SharpCorner> {
    let n = curve.len();
    if curve.corners.is_empty() {
        return vec![];
    }
    let turn = curve.turning_angles();
    let thr = corner_threshold(n);
    let straight = |i: usize| turn[i % n].abs() < 1e-9;
    let k = corner_window(n);
    let x = &curve.nodes;
    let mut out = Vec::new();
    for &a in &curve.corners {
        let b = (a + 1) % n;
        if !curve.is_corner(b) || curve.is_corner((a + n - 1) % n) || curve.is_corner((b + 1) % n) {
            continue;
        }
        // need straight runs (no other turning) over the whole window
        let ok = (1..k).all(|m| straight(b + m) && straight(a + n - m)) && k < n / 8;
        if !ok || turn[a].abs() <= thr {
            continue;
        }
        let ta = geom::unit(geom::sub(x[a], x[(a + n - 1) % n]));
        let tb = geom::unit(geom::sub(x[(b + 1) % n], x[b]));
        let Some(vertex) = geom::line_intersection(x[a], ta, x[b], tb) else {
            continue;
        };
        let phi = geom::cross(ta, tb).atan2(geom::dot(ta, tb));
        out.push(SharpCorner { before: a, after: b, vertex, turn: phi, window: k });
    }
    out
}

/// Replace the midpoint sum over the fit window on both sides of a corner
/// by the exact integral of `|a d^{−s} + b|^p` plus the fitted residual.
fn corner_correction(curve: &ArcCurve, inner: &[f64], c: &SharpCorner, params: FracParams) -> f64 {
    let n = curve.len();
    let (s, p) = (params.s, params.p);
    let delta = curve.spacing;
    let a = corner_coefficient(c.turn, s);
    let k = c.window;
    let mut corr = 0.0;
    for side in 0..2 {
        let idx: Vec<usize> = (0..k)
            .map(|m| if side == 0 { (c.after + m) % n } else { (c.before + n - m) % n })
            .collect();
        let d: Vec<f64> = idx.iter().map(|&i| geom::dist(curve.nodes[i], c.vertex)).collect();
        let vals: Vec<f64> = idx.iter().map(|&i| inner[i]).collect();
        // least squares for y = b + c·d on the residual I − a d^{−s}
        let rows: Vec<(f64, f64)> =
            (CORNER_SKIP..k).map(|m| (d[m], vals[m] - a * d[m].powf(-s))).collect();
        let b = {
            let m = rows.len() as f64;
            let mx = rows.iter().map(|r| r.0).sum::<f64>() / m;
            let my = rows.iter().map(|r| r.1).sum::<f64>() / m;
            let sxy: f64 = rows.iter().map(|r| (r.0 - mx) * (r.1 - my)).sum();
            let sxx: f64 = rows.iter().map(|r| (r.0 - mx).powi(2)).sum();
            my - sxy / sxx * mx
        };
        let model = |x: f64| (a * x.powf(-s) + b).abs().powf(p);
        let x_end = d[k - 1] + delta / 2.0;
        // x = X t^{1/(1−ps)} absorbs the endpoint singularity
        let q = 1.0 - p * s;
        let exact = x_end.powf(q) / q
            * integrate_graded(
                |t| (a + b * (x_end * t.powf(1.0 / q)).powf(s)).abs().powf(p),
                0.0,
                1.0,
                40,
            );
        let replaced: f64 = (0..CORNER_SKIP).map(|m| vals[m].abs().powf(p)).sum::<f64>()
            + (CORNER_SKIP..k).map(|m| model(d[m])).sum::<f64>();
        corr += exact - replaced * delta;
    }
    corr
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct ScalingCheck {
    pub w: f64,
    pub w_scaled: f64,
    pub observed_ratio: f64,
    pub predicted_ratio: f64,
}

/// Energy of the curve and of its `ρ`-dilation.
pub fn scaling_check(curve: &ArcCurve, params: FracParams, rho: f64) -> Result<ScalingCheck> {
    if !(rho > 0.0) {
        return Err(FracError::Parameter(format!("rho = {rho} must be positive")));
    }
    let w = willmore_energy(curve, params, None, None, false)?.total;
    let w_scaled = willmore_energy(&curve.dilate(rho), params, None, None, false)?.total;
    Ok(ScalingCheck {
        w,
        w_scaled,
        observed_ratio: w_scaled / w,
        predicted_ratio: if params.critical { 1.0 } else { rho.powf(1.0 - params.p * params.s) },
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BmoProfile {
    pub scales: Vec<f64>,
    /// Supremum over centres of the mean oscillation at each scale.
    pub values: Vec<f64>,
    /// Running supremum over scales.
    pub running_sup: Vec<f64>,
    pub p: f64,
}

/// `(⨍⨍_{B_r(x0)} |γ′(x) − γ′(y)|^p)^{1/p}` over nodes of the window.
fn window_oscillation(t: &[Point], idx: &[usize], p: f64) -> f64 {
    let m = idx.len();
    if m < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for &i in idx {
        for &j in idx {
            acc += geom::dist(t[i], t[j]).powf(p);
        }
    }
    (acc / (m * m) as f64).powf(1.0 / p)
}

fn window_indices(n: usize, center: usize, half: usize, closed: bool) -> Vec<usize> {
    if closed {
        let half = half.min((n - 1) / 2);
        (0..=2 * half).map(|o| (center + n + o - half) % n).collect()
    } else {
        (center.saturating_sub(half)..=(center + half).min(n - 1)).collect()
    }
}

/// BMO profile of unit tangents sampled at spacing `spacing`.
pub fn bmo_profile_tangents(
    tangents: &[Point],
    spacing: f64,
    closed: bool,
    p: f64,
    scales: &[f64],
) -> Result<BmoProfile> {
    if !(p >= 1.0) {
        return Err(FracError::Parameter(format!("p = {p} must be >= 1")));
    }
    let n = tangents.len();
    let values: Vec<f64> = scales
        .iter()
        .map(|&r| {
            let half = ((r / spacing) * (1.0 + 1e-12)).floor() as usize;
            (0..n)
                .into_par_iter()
                .map(|c| window_oscillation(tangents, &window_indices(n, c, half, closed), p))
                .collect::<Vec<_>>()
                .into_iter()
                .fold(0.0, f64::max)
        })
        .collect();
    let mut running = Vec::with_capacity(values.len());
    let mut m = 0.0f64;
    for v in &values {
        m = m.max(*v);
        running.push(m);
    }
    Ok(BmoProfile { scales: scales.to_vec(), values, running_sup: running, p })
}

pub fn bmo_profile(curve: &ArcCurve, p: f64, scales: &[f64]) -> Result<BmoProfile> {
    bmo_profile_tangents(&curve.tangents, curve.spacing, true, p, scales)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VmoCheck {
    pub ratio: f64,
    /// `(r, sup BMO, sup windowed energy, ratio)` per scale.
    pub per_scale: Vec<(f64, f64, f64, f64)>,
    pub max_energy: f64,
    pub eps_vmo: f64,
    /// Every windowed energy is below `eps_vmo`.
    pub applicable: bool,
}

pub const DEFAULT_EPS_VMO: f64 = 1e-2;

/// Worst ratio of tangent mean oscillation on `B_r(x0)` to the windowed
/// absolute critical energy on the same ball raised to the power `s`.
pub fn vmo_bound_check(curve: &ArcCurve, s: f64, p: f64, scales: &[f64], eps_vmo: f64) -> Result<VmoCheck> {
    let params = FracParams::critical(s)?;
    let n = curve.len();
    let l = curve.length();
    let mut per_scale = Vec::new();
    let mut max_energy = 0.0f64;
    for &r in scales {
        if 2.0 * r >= l / 2.0 {
            return Err(FracError::Parameter(format!("scale {r} too large for length {l}")));
        }
        let half = ((r / curve.spacing) * (1.0 + 1e-12)).floor() as usize;
        let rows = (0..n)
            .into_par_iter()
            .map(|c| {
                let osc = window_oscillation(&curve.tangents, &window_indices(n, c, half, true), p);
                let x0 = curve.arc_param(c);
                let w = (x0 - (half as f64 + 0.5) * curve.spacing, x0 + (half as f64 + 0.5) * curve.spacing);
                let e = windowed_energy(curve, params, w)?;
                Ok((osc, e))
            })
            .collect::<Result<Vec<_>>>()?;
        let (mut bmo, mut en, mut ratio) = (0.0f64, 0.0f64, 0.0f64);
        for (osc, e) in rows {
            bmo = bmo.max(osc);
            en = en.max(e);
            if e > 0.0 {
                ratio = ratio.max(osc / e.powf(s));
            }
        }
        max_energy = max_energy.max(en);
        per_scale.push((r, bmo, en, ratio));
    }
    let ratio = per_scale.iter().map(|r| r.3).fold(0.0, f64::max);
    Ok(VmoCheck { ratio, per_scale, max_energy, eps_vmo, applicable: max_energy < eps_vmo })
}

fn windowed_energy(curve: &ArcCurve, params: FracParams, w: (f64, f64)) -> Result<f64> {
    let n = curve.len();
    let l = curve.length();
    let opts = InnerOpts { window: Some(w), absolute: true, band: 0 };
    let mut acc = 0.0;
    for i in (0..n).filter(|&i| in_window(curve.arc_param(i), w, l)) {
        acc += inner_integral(curve, params.s, i, opts)?.abs().powf(params.p);
    }
    Ok(acc * curve.spacing)
}

/// Windowed absolute energy over the arc interval `w` (both windows equal).
pub fn local_energy(curve: &ArcCurve, params: FracParams, w: (f64, f64)) -> Result<f64> {
    windowed_energy(curve, params, w)
}

/// Ratio `⨍⨍⨍_{[x,y]} |U(y,z)| / (⨍⨍ |U|^p)^{1/p}` for `U` on an `m × m` grid.
pub fn mean_value_ratio(u: &[Vec<f64>], p: f64) -> f64 {
    let m = u.len();
    let mut lhs = 0.0;
    for x in 0..m {
        for y in 0..m {
            let (lo, hi) = (x.min(y), x.max(y));
            let seg: f64 = (lo..=hi).map(|z| u[y][z].abs()).sum();
            lhs += seg / (hi - lo + 1) as f64;
        }
    }
    lhs /= (m * m) as f64;
    let rhs = (u.iter().flatten().map(|v| v.abs().powf(p)).sum::<f64>() / (m * m) as f64).powf(1.0 / p);
    if rhs == 0.0 { 0.0 } else { lhs / rhs }
}

/// Largest [`mean_value_ratio`] over random sparse and dense instances.
pub fn mean_value_constant(m: usize, p: f64, trials: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for t in 0..trials {
        let density = [1.0, 0.3, 0.05][t % 3];
        let u: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                (0..m)
                    .map(|_| {
                        if rng.random::<f64>() < density {
                            rng.random::<f64>() * 2.0 - 1.0
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        worst = worst.max(mean_value_ratio(&u, p));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::circle;

    #[test]
    fn critical_flag() {
        assert!(FracParams::new(0.5, 2.0).unwrap().critical);
        assert!(!FracParams::new(0.25, 2.0).unwrap().critical);
        assert!(FracParams::new(0.5, 0.5).is_err());
    }

    #[test]
    fn identity_dilation() {
        let c = circle(1.0, 128);
        let r = scaling_check(&c, FracParams::new(0.3, 2.0).unwrap(), 1.0).unwrap();
        assert_eq!(r.observed_ratio, 1.0);
    }

    #[test]
    fn constant_u_ratio_is_one() {
        let u = vec![vec![2.0; 6]; 6];
        assert!((mean_value_ratio(&u, 2.0) - 1.0).abs() < 1e-14);
    }
}
