//! Closed planar curves sampled at uniform arc length.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{FracError, Result};
use crate::geom::{self, Point};

/// Closed curve with `N` nodes at equal arc-length spacing, node `i`
/// joined to `i + 1 mod N`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ArcCurve {
    pub nodes: Vec<Point>,
    pub spacing: f64,
    pub tangents: Vec<Point>,
    pub normals: Vec<Point>,
    /// Nodes whose discrete turning angle marks them as corner-adjacent.
    #[serde(default)]
    pub corners: Vec<usize>,
}

/// Turning angles larger than this many "circle steps" flag a corner.
const CORNER_FACTOR: f64 = 10.0;

impl ArcCurve {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.spacing * self.nodes.len() as f64
    }

    pub fn signed_area(&self) -> f64 {
        geom::signed_area(&self.nodes)
    }

    /// Arc parameter of node `i`.
    pub fn arc_param(&self, i: usize) -> f64 {
        i as f64 * self.spacing
    }

    /// Periodic signed arc offset `y_j − x_i` in `(−L/2, L/2]`.
    pub fn arc_offset(&self, i: usize, j: usize) -> f64 {
        let n = self.len() as isize;
        let mut k = (j as isize - i as isize).rem_euclid(n);
        if 2 * k > n {
            k -= n;
        }
        k as f64 * self.spacing
    }

    /// Node-dilated copy; spacing scales with `rho`.
    pub fn dilate(&self, rho: f64) -> ArcCurve {
        ArcCurve {
            nodes: self.nodes.iter().map(|p| geom::scale(*p, rho)).collect(),
            spacing: self.spacing * rho,
            ..self.clone()
        }
    }

    pub fn translate(&self, v: Point) -> ArcCurve {
        ArcCurve {
            nodes: self.nodes.iter().map(|p| geom::add(*p, v)).collect(),
            ..self.clone()
        }
    }

    pub fn rotate(&self, theta: f64) -> ArcCurve {
        ArcCurve {
            nodes: self.nodes.iter().map(|p| geom::rotate(*p, theta)).collect(),
            tangents: self.tangents.iter().map(|p| geom::rotate(*p, theta)).collect(),
            normals: self.normals.iter().map(|p| geom::rotate(*p, theta)).collect(),
            ..self.clone()
        }
    }

    /// Same point set traversed clockwise (the complement's orientation).
    pub fn reversed(&self) -> ArcCurve {
        let n = self.len();
        let idx = |i: usize| (n - i) % n;
        let mut corners: Vec<usize> = self.corners.iter().map(|&c| idx(c)).collect();
        corners.sort_unstable();
        ArcCurve {
            nodes: (0..n).map(|i| self.nodes[idx(i)]).collect(),
            spacing: self.spacing,
            tangents: (0..n).map(|i| geom::scale(self.tangents[idx(i)], -1.0)).collect(),
            normals: (0..n).map(|i| geom::scale(self.normals[idx(i)], -1.0)).collect(),
            corners,
        }
    }

    /// Turning angle at every node, signed (positive for left turns).
    pub fn turning_angles(&self) -> Vec<f64> {
        turning_angles(&self.nodes)
    }

    pub fn is_corner(&self, i: usize) -> bool {
        self.corners.binary_search(&i).is_ok()
    }
}

fn turning_angles(nodes: &[Point]) -> Vec<f64> {
    let n = nodes.len();
    (0..n)
        .map(|i| {
            let a = geom::sub(nodes[i], nodes[(i + n - 1) % n]);
            let b = geom::sub(nodes[(i + 1) % n], nodes[i]);
            geom::cross(a, b).atan2(geom::dot(a, b))
        })
        .collect()
}

/// Scale-free corner threshold: ten times the turning angle per node of a
/// circle with the same node count.
pub fn corner_threshold(n: usize) -> f64 {
    CORNER_FACTOR * TAU / n as f64
}

/// Resample a closed polyline to `n` nodes at equal arc length, first
/// node at the first input point. Output is oriented counterclockwise.
pub fn resample_arclength(points: &[Point], n: usize) -> Result<ArcCurve> {
    resample_with_offset(points, n, 0.0)
}

/// As [`resample_arclength`] with the first node shifted `offset·Δ`
/// along the polyline. Polygons use `offset = 0.5` so vertices fall
/// midway between nodes.
pub fn resample_with_offset(points: &[Point], n: usize, offset: f64) -> Result<ArcCurve> {
    let mut pts: Vec<Point> = Vec::with_capacity(points.len());
    for p in points {
        if !p[0].is_finite() || !p[1].is_finite() {
            return Err(FracError::InvalidGeometry("non-finite point".into()));
        }
        if pts.last().is_none_or(|q| geom::dist(*q, *p) > 0.0) {
            pts.push(*p);
        }
    }
    while pts.len() > 1 && geom::dist(pts[0], *pts.last().unwrap()) == 0.0 {
        pts.pop();
    }
    if pts.len() < 8 && !(pts.len() >= 3 && n >= 16) {
        // polygons with few vertices are fine; anything else needs 8 points
        return Err(FracError::InvalidGeometry(format!(
            "need at least 8 distinct points, got {}",
            pts.len()
        )));
    }
    if n < 16 {
        return Err(FracError::InvalidGeometry(format!("need N >= 16, got {n}")));
    }
    if geom::signed_area(&pts) < 0.0 {
        pts.reverse();
    }
    let m = pts.len();
    let mut cum = Vec::with_capacity(m + 1);
    cum.push(0.0);
    for i in 0..m {
        let l = geom::dist(pts[i], pts[(i + 1) % m]);
        cum.push(cum[i] + l);
    }
    let total = cum[m];
    if !(total > 0.0) || geom::signed_area(&pts).abs() <= 1e-14 * total * total {
        return Err(FracError::InvalidGeometry("degenerate polyline".into()));
    }
    let delta = total / n as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut seg = 0;
    for k in 0..n {
        let t = (k as f64 + offset) * delta;
        while seg + 1 < m && cum[seg + 1] <= t {
            seg += 1;
        }
        let (a, b) = (pts[seg], pts[(seg + 1) % m]);
        let lam = (t - cum[seg]) / (cum[seg + 1] - cum[seg]);
        nodes.push(geom::add(a, geom::scale(geom::sub(b, a), lam)));
    }
    Ok(tangent_normal(ArcCurve {
        nodes,
        spacing: delta,
        tangents: vec![],
        normals: vec![],
        corners: vec![],
    }))
}

/// Fill tangents and normals.
///
/// Smooth curves get spectral derivatives of the periodic node
/// coordinates. Curves with corners get difference quotients, one-sided
/// next to each corner so the stencil never straddles it.
pub fn tangent_normal(mut curve: ArcCurve) -> ArcCurve {
    let n = curve.len();
    let turn = curve.turning_angles();
    let thr = corner_threshold(n);
    let flagged: Vec<bool> = turn.iter().map(|t| t.abs() > thr).collect();
    curve.corners = (0..n).filter(|&i| flagged[i]).collect();
    let tangents: Vec<Point> = if curve.corners.is_empty() {
        spectral_tangents(&curve.nodes, curve.spacing)
    } else {
        let x = &curve.nodes;
        (0..n)
            .map(|i| {
                let (im, ip) = ((i + n - 1) % n, (i + 1) % n);
                let d = if !flagged[i] {
                    geom::sub(x[ip], x[im])
                } else if !flagged[im] {
                    geom::sub(x[i], x[im])
                } else if !flagged[ip] {
                    geom::sub(x[ip], x[i])
                } else {
                    geom::sub(x[ip], x[im])
                };
                geom::unit(d)
            })
            .collect()
    };
    curve.normals = tangents.iter().map(|t| geom::perp(*t)).collect();
    curve.tangents = tangents;
    curve
}

fn spectral_tangents(nodes: &[Point], delta: f64) -> Vec<Point> {
    let n = nodes.len();
    let mut buf: Vec<Complex<f64>> = nodes.iter().map(|p| Complex::new(p[0], p[1])).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let w = TAU / (n as f64 * delta);
    for (k, c) in buf.iter_mut().enumerate() {
        let kk = if 2 * k < n {
            k as f64
        } else if 2 * k == n {
            0.0
        } else {
            k as f64 - n as f64
        };
        *c *= Complex::new(0.0, kk * w / n as f64);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| geom::unit([c.re, c.im])).collect()
}

/// Unit circle of radius `r` centred at the origin, first node at `(r, 0)`.
pub fn circle(r: f64, n: usize) -> ArcCurve {
    let nodes: Vec<Point> = (0..n)
        .map(|i| {
            let t = TAU * i as f64 / n as f64;
            [r * t.cos(), r * t.sin()]
        })
        .collect();
    let mut c = ArcCurve {
        nodes,
        spacing: TAU * r / n as f64,
        tangents: vec![],
        normals: vec![],
        corners: vec![],
    };
    c = tangent_normal(c);
    c
}

/// Dense parametric polyline of `f(θ)`, `θ ∈ [0, 2π)`.
pub fn parametric_polyline<F: Fn(f64) -> Point>(f: F, m: usize) -> Vec<Point> {
    (0..m).map(|k| f(TAU * k as f64 / m as f64)).collect()
}

/// Axis-aligned ellipse with semi-axes `a`, `b`.
pub fn ellipse(a: f64, b: f64, n: usize) -> Result<ArcCurve> {
    let m = (n * 256).max(1 << 17);
    resample_arclength(&parametric_polyline(|t| [a * t.cos(), b * t.sin()], m), n)
}

/// Polygon with vertices midway between nodes.
pub fn polygon(vertices: &[Point], n: usize) -> Result<ArcCurve> {
    resample_with_offset(vertices, n, 0.5)
}

/// Axis-aligned square of side `side` centred at the origin.
pub fn square(side: f64, n: usize) -> Result<ArcCurve> {
    let h = side / 2.0;
    polygon(&[[h, -h], [h, h], [-h, h], [-h, -h]], n)
}

/// Square of side `side` with corners rounded by quarter circles of
/// radius `fillet`.
pub fn rounded_square(side: f64, fillet: f64, n: usize) -> Result<ArcCurve> {
    let h = side / 2.0;
    let r = fillet.clamp(0.0, h);
    let arc_pts = 256;
    let mut pts = Vec::new();
    let centers = [[h - r, h - r], [-(h - r), h - r], [-(h - r), -(h - r)], [h - r, -(h - r)]];
    for (q, c) in centers.iter().enumerate() {
        let a0 = q as f64 * PI / 2.0;
        for k in 0..=arc_pts {
            let t = a0 + PI / 2.0 * k as f64 / arc_pts as f64;
            pts.push([c[0] + r * t.cos(), c[1] + r * t.sin()]);
        }
    }
    // start midway along the right edge so no corner sits on node 0
    pts.insert(0, [h, 0.0]);
    resample_arclength(&pts, n)
}

/// Convex curve given by a truncated Fourier support function
/// `h(θ) = a0 + Σ_k (a_k cos kθ + b_k sin kθ)`, `k ≥ 2`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SupportCurve {
    pub a0: f64,
    /// `(k, a_k, b_k)`.
    pub coeffs: Vec<(usize, f64, f64)>,
}

impl SupportCurve {
    pub fn circle(r: f64) -> SupportCurve {
        SupportCurve { a0: r, coeffs: vec![] }
    }

    /// All modes `2..=k_max`, zero amplitude.
    pub fn zeros(a0: f64, k_max: usize) -> SupportCurve {
        SupportCurve { a0, coeffs: (2..=k_max).map(|k| (k, 0.0, 0.0)).collect() }
    }

    pub fn order(&self) -> usize {
        self.coeffs.iter().map(|c| c.0).max().unwrap_or(0)
    }

    /// `(h, h′, h″)` at `θ`.
    pub fn eval(&self, theta: f64) -> (f64, f64, f64) {
        let (mut h, mut d1, mut d2) = (self.a0, 0.0, 0.0);
        for &(k, a, b) in &self.coeffs {
            let kf = k as f64;
            let (s, c) = (kf * theta).sin_cos();
            h += a * c + b * s;
            d1 += kf * (b * c - a * s);
            d2 -= kf * kf * (a * c + b * s);
        }
        (h, d1, d2)
    }

    pub fn radius_of_curvature(&self, theta: f64) -> f64 {
        let (h, _, d2) = self.eval(theta);
        h + d2
    }

    /// Minimum of `h + h″` over `m` equispaced angles.
    pub fn min_radius(&self, m: usize) -> f64 {
        (0..m)
            .map(|i| self.radius_of_curvature(TAU * i as f64 / m as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// Arc length `∫₀^θ (h + h″)` of the boundary from normal angle 0.
    pub fn arc_length_to(&self, theta: f64) -> f64 {
        let mut acc = self.a0 * theta;
        for &(k, a, b) in &self.coeffs {
            let kf = k as f64;
            let (s, c) = (kf * theta).sin_cos();
            acc += (1.0 - kf * kf) * (a * s + b * (1.0 - c)) / kf;
        }
        acc
    }

    /// Boundary point with outer normal `(cos θ, sin θ)`.
    pub fn point(&self, theta: f64) -> Point {
        let (h, d1, _) = self.eval(theta);
        let (s, c) = theta.sin_cos();
        [h * c - d1 * s, h * s + d1 * c]
    }

    /// Coefficient vector `[a0, a_2, b_2, …]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![self.a0];
        for &(_, a, b) in &self.coeffs {
            v.push(a);
            v.push(b);
        }
        v
    }

    pub fn from_vec(&self, v: &[f64]) -> SupportCurve {
        SupportCurve {
            a0: v[0],
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, &(k, _, _))| (k, v[1 + 2 * i], v[2 + 2 * i]))
                .collect(),
        }
    }

    /// Shift in θ by `phi`: the body rotated by `phi`.
    pub fn rotated(&self, phi: f64) -> SupportCurve {
        SupportCurve {
            a0: self.a0,
            coeffs: self
                .coeffs
                .iter()
                .map(|&(k, a, b)| {
                    let (s, c) = (k as f64 * phi).sin_cos();
                    (k, a * c - b * s, a * s + b * c)
                })
                .collect(),
        }
    }

    /// Perimeter `2π·a0` (Cauchy's formula).
    pub fn perimeter(&self) -> f64 {
        TAU * self.a0
    }
}

/// Default lower bound on the radius of curvature.
pub fn default_eps_kappa(sc: &SupportCurve) -> f64 {
    1e-3 * sc.a0
}

/// Realize a support function as an arc-length curve.
pub fn support_to_curve(sc: &SupportCurve, n: usize, eps_kappa: f64) -> Result<ArcCurve> {
    let m = (16 * n).max(8192);
    let min_rho = sc.min_radius(m);
    if min_rho < eps_kappa {
        return Err(FracError::ConstraintViolation { min_rho, eps: eps_kappa });
    }
    // Built at unit a0 and dilated, so scale changes are exact. Nodes sit
    // at exact arc length from the phase of the lowest active mode, which
    // rotates with the body and keeps the result smooth in the coefficients.
    let unit = SupportCurve {
        a0: 1.0,
        coeffs: sc.coeffs.iter().map(|&(k, a, b)| (k, a / sc.a0, b / sc.a0)).collect(),
    };
    let theta0 = unit
        .coeffs
        .iter()
        .filter(|c| c.1.hypot(c.2) > 1e-12)
        .min_by_key(|c| c.0)
        .map_or(0.0, |&(k, a, b)| b.atan2(a) / k as f64);
    let s0 = unit.arc_length_to(theta0);
    let delta = TAU / n as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut lo = theta0;
    for j in 0..n {
        let target = s0 + j as f64 * delta;
        let (mut l, mut h) = (lo, theta0 + TAU);
        let mut t = lo + (target - unit.arc_length_to(lo)) / unit.radius_of_curvature(lo);
        for _ in 0..100 {
            if !(t > l && t < h) {
                t = 0.5 * (l + h);
            }
            let f = unit.arc_length_to(t) - target;
            if f > 0.0 {
                h = t;
            } else {
                l = t;
            }
            let step = f / unit.radius_of_curvature(t);
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        nodes.push(unit.point(t));
        lo = t;
    }
    let curve = tangent_normal(ArcCurve { nodes, spacing: delta, tangents: vec![], normals: vec![], corners: vec![] });
    Ok(curve.dilate(sc.a0))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConvexityReport {
    pub is_convex: bool,
    pub worst_violation: f64,
    pub supporting_normals: Vec<Point>,
}

/// Edge-turn sign check plus supporting-line inequality
/// `⟨ν_x, γ(x) − γ(y)⟩ ≥ −tol` over all node pairs, tol = 1e-8·L.
pub fn convexity_check(curve: &ArcCurve) -> ConvexityReport {
    let n = curve.len();
    let x = &curve.nodes;
    let tol = 1e-8 * curve.length();
    let worst_turn = (0..n)
        .map(|i| {
            let a = geom::sub(x[(i + 1) % n], x[i]);
            let b = geom::sub(x[(i + 2) % n], x[(i + 1) % n]);
            geom::cross(a, b) / geom::norm(a).max(geom::norm(b))
        })
        .fold(f64::INFINITY, f64::min);
    let worst_support = (0..n)
        .into_par_iter()
        .map(|i| {
            let nu = curve.normals[i];
            (0..n)
                .map(|j| geom::dot(nu, geom::sub(x[i], x[j])))
                .fold(f64::INFINITY, f64::min)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let worst = worst_turn.min(worst_support);
    ConvexityReport {
        is_convex: worst >= -tol,
        worst_violation: worst,
        supporting_normals: curve.normals.clone(),
    }
}

/// Convex hull (counterclockwise, no collinear vertices), monotone chain.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut p: Vec<Point> = points.to_vec();
    p.sort_by(|a, b| a.partial_cmp(b).unwrap());
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut lower: Vec<Point> = Vec::new();
    for q in &p {
        while lower.len() >= 2
            && geom::cross(
                geom::sub(lower[lower.len() - 1], lower[lower.len() - 2]),
                geom::sub(*q, lower[lower.len() - 2]),
            ) <= 0.0
        {
            lower.pop();
        }
        lower.push(*q);
    }
    let mut upper: Vec<Point> = Vec::new();
    for q in p.iter().rev() {
        while upper.len() >= 2
            && geom::cross(
                geom::sub(upper[upper.len() - 1], upper[upper.len() - 2]),
                geom::sub(*q, upper[upper.len() - 2]),
            ) <= 0.0
        {
            upper.pop();
        }
        upper.push(*q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn dist_to_closed_polyline(p: Point, poly: &[Point]) -> f64 {
    let m = poly.len();
    (0..m)
        .map(|k| geom::point_segment_dist(p, poly[k], poly[(k + 1) % m]))
        .fold(f64::INFINITY, f64::min)
}

/// Two-sided Hausdorff distance between the node polygon and the
/// boundary of its convex hull.
pub fn hull_gap(curve: &ArcCurve) -> f64 {
    let hull = convex_hull(&curve.nodes);
    let to_hull = curve
        .nodes
        .par_iter()
        .map(|p| dist_to_closed_polyline(*p, &hull))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max);
    let m = hull.len();
    let samples: Vec<Point> = (0..m)
        .flat_map(|k| {
            let (a, b) = (hull[k], hull[(k + 1) % m]);
            (1..8).map(move |q| geom::add(a, geom::scale(geom::sub(b, a), q as f64 / 8.0)))
        })
        .collect();
    let from_hull = samples
        .par_iter()
        .map(|p| dist_to_closed_polyline(*p, &curve.nodes))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max);
    let g = to_hull.max(from_hull);
    if g <= 1e-13 * curve.length() {
        0.0
    } else {
        g
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct BiLipschitz {
    pub min: f64,
    pub max: f64,
}

/// Chord-to-arc ratios over node pairs with arc distance in `(0, 2r]`.
pub fn bilipschitz_profile(curve: &ArcCurve, r: f64) -> BiLipschitz {
    let n = curve.len();
    let kmax = ((2.0 * r / curve.spacing) * (1.0 + 1e-12)).floor() as usize;
    let kmax = kmax.min(n / 2);
    let (lo, hi) = (0..n)
        .into_par_iter()
        .map(|i| {
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for k in 1..=kmax {
                let j = (i + k) % n;
                let q = geom::dist(curve.nodes[i], curve.nodes[j]) / (k as f64 * curve.spacing);
                lo = lo.min(q);
                hi = hi.max(q);
            }
            (lo, hi)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((f64::INFINITY, 0.0f64), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    BiLipschitz { min: lo, max: hi }
}

/// Open-curve variant: arc distance is the cumulative polyline length.
pub fn bilipschitz_profile_open(nodes: &[Point], r: f64) -> BiLipschitz {
    let mut cum = vec![0.0];
    for w in nodes.windows(2) {
        cum.push(cum.last().unwrap() + geom::dist(w[0], w[1]));
    }
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            let arc = cum[j] - cum[i];
            if arc > 2.0 * r * (1.0 + 1e-12) {
                break;
            }
            let q = geom::dist(nodes[i], nodes[j]) / arc;
            lo = lo.min(q);
            hi = hi.max(q);
        }
    }
    BiLipschitz { min: lo, max: hi }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Convex,
    Concave,
    Neither,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct GraphWindow {
    pub is_graph: bool,
    pub shape: Shape,
}

/// Project a window onto the tangent line at its centre and classify it.
/// Ordinates are measured along the normal `(t₂, −t₁)`, so a
/// counterclockwise convex arc is concave in this frame.
fn classify_window(pts: &[Point], center: Point, t: Point) -> GraphWindow {
    let nrm = geom::perp(t);
    let xy: Vec<(f64, f64)> = pts
        .iter()
        .map(|p| {
            let d = geom::sub(*p, center);
            (geom::dot(d, t), geom::dot(d, nrm))
        })
        .collect();
    let is_graph = xy.windows(2).all(|w| w[1].0 > w[0].0);
    if !is_graph {
        return GraphWindow { is_graph, shape: Shape::Neither };
    }
    let scale = xy.iter().map(|p| p.0.abs()).fold(0.0, f64::max).max(1e-300);
    let tol = 1e-9 / scale;
    let (mut pos, mut neg) = (false, false);
    for w in xy.windows(3) {
        let s1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        let s2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
        let dd = (s2 - s1) / (w[2].0 - w[0].0);
        if dd > tol {
            pos = true;
        } else if dd < -tol {
            neg = true;
        }
    }
    let shape = match (pos, neg) {
        (true, true) => Shape::Neither,
        (false, true) => Shape::Concave,
        _ => Shape::Convex,
    };
    GraphWindow { is_graph, shape }
}

/// Graph test on the arc window of halfwidth `window` about node `x0`.
pub fn graph_window_check(curve: &ArcCurve, x0: usize, window: f64) -> GraphWindow {
    let n = curve.len();
    let k = ((window / curve.spacing) * (1.0 + 1e-12)).floor() as isize;
    let k = k.min(n as isize / 2 - 1);
    let pts: Vec<Point> = (-k..=k)
        .map(|o| curve.nodes[(x0 as isize + o).rem_euclid(n as isize) as usize])
        .collect();
    classify_window(&pts, curve.nodes[x0], curve.tangents[x0])
}

/// Open-curve variant; the tangent at `x0` is the central difference.
pub fn graph_window_check_open(nodes: &[Point], x0: usize, window: f64) -> GraphWindow {
    let mut cum = vec![0.0];
    for w in nodes.windows(2) {
        cum.push(cum.last().unwrap() + geom::dist(w[0], w[1]));
    }
    let pts: Vec<Point> = (0..nodes.len())
        .filter(|&j| (cum[j] - cum[x0]).abs() <= window * (1.0 + 1e-12))
        .map(|j| nodes[j])
        .collect();
    let lo = x0.saturating_sub(1);
    let hi = (x0 + 1).min(nodes.len() - 1);
    let t = geom::unit(geom::sub(nodes[hi], nodes[lo]));
    classify_window(&pts, nodes[x0], t)
}

/// Node pairs closer than `ρ/10` in the plane but more than `ρ` apart
/// along the curve.
pub fn self_proximity_scan(curve: &ArcCurve, rho: f64) -> Vec<(usize, usize)> {
    let n = curve.len();
    let close = rho / 10.0;
    (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            (i + 1..n)
                .filter(move |&j| {
                    curve.arc_offset(i, j).abs() > rho
                        && geom::dist(curve.nodes[i], curve.nodes[j]) < close
                })
                .map(move |j| (i, j))
        })
        .collect()
}
