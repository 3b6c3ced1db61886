//! Fractional mean curvature `H^s`: boundary quadrature on arc-length
//! curves, a region-integral oracle, and barrier/corner diagnostics.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{self, ArcCurve};
use crate::error::{FracError, Result};
use crate::geom::{self, Point};
use crate::special::{cos_power_half, cos_power_integral, gauss_legendre, integrate_graded};

/// Diagonal band halfwidth in nodes: `δ = 4Δ`.
pub const BAND_NODES: usize = 4;

pub(crate) fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(FracError::Parameter(format!("s = {s} must lie in (0, 1)")))
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Boundary,
    Region,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CurvatureSamples {
    pub values: Vec<f64>,
    pub s: f64,
    pub method: Method,
    pub near_diag_cutoff: f64,
}

/// Signed Menger curvature of three consecutive nodes about `i`.
pub fn menger_curvature(curve: &ArcCurve, i: usize) -> f64 {
    let n = curve.len();
    let a = curve.nodes[(i + n - 1) % n];
    let b = curve.nodes[i];
    let c = curve.nodes[(i + 1) % n];
    let cr = geom::cross(geom::sub(b, a), geom::sub(c, b));
    2.0 * cr / (geom::dist(a, b) * geom::dist(b, c) * geom::dist(a, c))
}

/// Options for the inner integral `∫⟨n(y), γ(y) − γ(x)⟩/|γ(y) − γ(x)|^{2+s} dy`.
#[derive(Clone, Copy, Debug, Default)]
pub struct InnerOpts {
    /// Arc interval `[a, b)` (wraparound allowed) restricting `y`.
    pub window: Option<(f64, f64)>,
    /// Integrate `|⟨n, γ(y) − γ(x)⟩|` instead.
    pub absolute: bool,
    /// Band halfwidth in nodes; `0` means [`BAND_NODES`].
    pub band: usize,
}

/// Whether arc parameter `x` lies in `[a, b)` on the circle of length `l`.
pub fn in_window(x: f64, w: (f64, f64), l: f64) -> bool {
    let width = w.1 - w.0;
    if width >= l {
        return true;
    }
    (x - w.0).rem_euclid(l) < width
}

fn corner_within(curve: &ArcCurve, i: usize, band: usize) -> bool {
    if curve.corners.is_empty() {
        return false;
    }
    let n = curve.len();
    (0..=band).any(|k| curve.is_corner((i + k) % n) || curve.is_corner((i + n - k % n) % n))
}

/// Inner integral at node `i` without the `2/s` factor.
pub fn inner_integral(curve: &ArcCurve, s: f64, i: usize, opts: InnerOpts) -> Result<f64> {
    check_s(s)?;
    let n = curve.len();
    let band = if opts.band == 0 { BAND_NODES } else { opts.band };
    if n < 4 * band {
        return Err(FracError::Parameter(format!("N = {n} too small for band {band}")));
    }
    let x = &curve.nodes;
    let delta = curve.spacing;
    let l = curve.length();
    let expo = -(1.0 + s / 2.0);
    let xi = x[i];
    let tiny = (1e-12 * l).powi(2);
    let want = |j: usize| opts.window.is_none_or(|w| in_window(curve.arc_param(j), w, l));
    let term = |j: usize| -> Result<f64> {
        let d = geom::sub(x[j], xi);
        let r2 = geom::dot(d, d);
        if r2 < tiny {
            return Err(FracError::NearCollision { i, j, dist: r2.sqrt() });
        }
        let h = curve.arc_offset(i, j);
        let t = curve.tangents[j];
        let num = geom::dot(curve.normals[j], [d[0] - t[0] * h, d[1] - t[1] * h]);
        let num = if opts.absolute { num.abs() } else { num };
        Ok(num * r2.powf(expo))
    };
    let mut acc = 0.0;
    if corner_within(curve, i, band) {
        for j in (0..n).filter(|&j| j != i && want(j)) {
            acc += term(j)?;
        }
        return Ok(acc * delta);
    }
    for k in band..=n - band {
        let j = (i + k) % n;
        if !want(j) {
            continue;
        }
        let w = if k == band || k == n - band { 0.5 } else { 1.0 };
        acc += w * term(j)?;
    }
    acc *= delta;
    if want(i) {
        let kappa = menger_curvature(curve, i);
        let kappa = if opts.absolute { kappa.abs() } else { kappa };
        let d = band as f64 * delta;
        acc += kappa * d.powf(1.0 - s) / (1.0 - s);
    }
    Ok(acc)
}

/// `H^s` at node `i` by the boundary formula.
pub fn nmc_boundary(curve: &ArcCurve, s: f64, i: usize) -> Result<f64> {
    Ok(2.0 / s * inner_integral(curve, s, i, InnerOpts::default())?)
}

/// `H^s` at every node.
pub fn nmc_curve(curve: &ArcCurve, s: f64) -> Result<CurvatureSamples> {
    check_s(s)?;
    let values = (0..curve.len())
        .into_par_iter()
        .map(|i| nmc_boundary(curve, s, i))
        .collect::<Result<Vec<f64>>>()?;
    Ok(CurvatureSamples {
        values,
        s,
        method: Method::Boundary,
        near_diag_cutoff: BAND_NODES as f64 * curve.spacing,
    })
}

// ---------------------------------------------------------------------------
// Straight pieces: exact kernel integrals.

/// Straight piece `p0 + u·τ`, `u ∈ [u_lo, u_hi]` (infinite ends allowed),
/// traversed in the direction of `τ`.
#[derive(Clone, Copy, Debug)]
pub struct Piece {
    pub p0: Point,
    pub tau: Point,
    pub u_lo: f64,
    pub u_hi: f64,
}

fn atan_ratio(u: f64, c: f64) -> f64 {
    if u.is_infinite() {
        FRAC_PI_2.copysign(u)
    } else {
        (u / c).atan()
    }
}

impl Piece {
    pub fn segment(a: Point, b: Point) -> Piece {
        let d = geom::sub(b, a);
        Piece { p0: a, tau: geom::unit(d), u_lo: 0.0, u_hi: geom::norm(d) }
    }

    /// Ray arriving at `end` from infinity along direction `tau`.
    pub fn ray_in(end: Point, tau: Point) -> Piece {
        Piece { p0: end, tau: geom::unit(tau), u_lo: f64::NEG_INFINITY, u_hi: 0.0 }
    }

    /// Ray leaving `start` along direction `tau`.
    pub fn ray_out(start: Point, tau: Point) -> Piece {
        Piece { p0: start, tau: geom::unit(tau), u_lo: 0.0, u_hi: f64::INFINITY }
    }

    /// `∫⟨n, y − z⟩/|y − z|^{2+s} dy` over the piece, `n = τ^⊥`.
    pub fn kernel_integral(&self, z: Point, s: f64) -> f64 {
        let nrm = geom::perp(self.tau);
        let c = geom::dot(nrm, geom::sub(self.p0, z));
        let scale = 1.0 + geom::norm(z).max(geom::norm(self.p0));
        if c.abs() <= 1e-14 * scale {
            return 0.0;
        }
        let uz = geom::dot(self.tau, geom::sub(z, self.p0));
        let ac = c.abs();
        let g1 = cos_power_integral(atan_ratio(self.u_hi - uz, ac), s);
        let g0 = cos_power_integral(atan_ratio(self.u_lo - uz, ac), s);
        c.signum() * ac.powf(-s) * (g1 - g0)
    }
}

/// `H^s` at `z` of the boundary made of straight `pieces`.
pub fn nmc_pieces(pieces: &[Piece], z: Point, s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(2.0 / s * pieces.iter().map(|p| p.kernel_integral(z, s)).sum::<f64>())
}

/// Inner-integral coefficient `a` of a straight-edge corner with turning
/// angle `φ ∈ (0, π)`: `I(d) ≈ a·d^{−s}` at distance `d` from the vertex.
pub fn corner_coefficient(phi: f64, s: f64) -> f64 {
    let p = phi.abs();
    let a = p.sin().powf(-s) * (cos_power_half(s) - cos_power_integral(FRAC_PI_2 - p, s));
    a.copysign(phi)
}

// ---------------------------------------------------------------------------
// Barrier wedge.

/// Epigraph of `g(t) = −m t (t < 0), 0 (0 ≤ t < t̃), m₁(t − t̃) (t ≥ t̃)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct BarrierSpec {
    pub m: f64,
    pub m1: f64,
    pub t_tilde: f64,
}

impl BarrierSpec {
    pub fn new(m: f64, m1: f64, t_tilde: f64) -> Result<BarrierSpec> {
        if !(m > 0.0 && m1 >= 0.0 && t_tilde > 0.0) {
            return Err(FracError::Parameter(format!(
                "barrier needs m > 0, m1 >= 0, t~ > 0 (got {m}, {m1}, {t_tilde})"
            )));
        }
        Ok(BarrierSpec { m, m1, t_tilde })
    }

    pub fn g(&self, t: f64) -> f64 {
        if t < 0.0 {
            -self.m * t
        } else if t < self.t_tilde {
            0.0
        } else {
            self.m1 * (t - self.t_tilde)
        }
    }

    /// Boundary traversed left to right, so the epigraph lies to the left.
    pub fn pieces(&self) -> Vec<Piece> {
        let o = [0.0, 0.0];
        let k = [self.t_tilde, 0.0];
        vec![
            Piece::ray_in(o, [1.0, -self.m]),
            Piece::segment(o, k),
            Piece::ray_out(k, [1.0, self.m1]),
        ]
    }

    fn contains(&self, p: Point) -> bool {
        p[1] >= self.g(p[0])
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct BarrierValue {
    pub direct: f64,
    /// Infimum of `direct·(|g(x)| + |x|)^s` over the probe grid.
    pub c_est: f64,
    pub bound: f64,
}

fn barrier_direct(b: &BarrierSpec, x: f64, s: f64) -> Result<f64> {
    if x == 0.0 || (b.m1 > 0.0 && x == b.t_tilde) {
        return Err(FracError::UndefinedPoint(format!("x = {x} is a corner of the barrier")));
    }
    if x < 0.0 {
        return Err(FracError::UndefinedPoint(format!("x = {x} outside the validity range")));
    }
    nmc_pieces(&b.pieces(), [x, b.g(x)], s)
}

/// Direct `H^s` on the barrier graph with the shape `c/(|g(x)| + |x|)^s`.
pub fn barrier_curvature(b: &BarrierSpec, x: f64, s: f64) -> Result<BarrierValue> {
    let direct = barrier_direct(b, x, s)?;
    let mut c_est = f64::INFINITY;
    for k in 0..=48 {
        let xp = b.t_tilde * 10f64.powf(-3.0 + k as f64 / 8.0);
        if b.m1 > 0.0 && (xp - b.t_tilde).abs() < 1e-9 * b.t_tilde {
            continue;
        }
        let v = barrier_direct(b, xp, s)? * (b.g(xp).abs() + xp).powf(s);
        c_est = c_est.min(v);
    }
    let bound = c_est / (b.g(x).abs() + x.abs()).powf(s);
    Ok(BarrierValue { direct, c_est, bound })
}

// ---------------------------------------------------------------------------
// Region oracle.

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum RegionKind {
    /// `{y : ⟨normal, y − point⟩ ≤ 0}`, `normal` outward.
    Halfplane { point: Point, normal: Point },
    Disk { center: Point, radius: f64 },
    Ellipse { center: Point, a: f64, b: f64 },
    Wedge(BarrierSpec),
    Polygon { vertices: Vec<Point> },
    CurveInterior(ArcCurve),
}

/// Planar set `E` (or its complement) for the region oracle.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RegionSpec {
    pub kind: RegionKind,
    #[serde(default)]
    pub complement: bool,
}

fn quadratic_interval(qa: f64, qb: f64, qc: f64) -> Vec<(f64, f64)> {
    // qa u² + qb u + qc ≤ 0, qa > 0
    let disc = qb * qb - 4.0 * qa * qc;
    if disc <= 0.0 {
        return vec![];
    }
    let sq = disc.sqrt();
    let q = -0.5 * (qb + qb.signum() * sq);
    let (r1, r2) = if q != 0.0 { (q / qa, qc / q) } else { (-sq / (2.0 * qa), sq / (2.0 * qa)) };
    vec![(r1.min(r2), r1.max(r2))]
}

fn polygon_contains(v: &[Point], p: Point) -> bool {
    let m = v.len();
    let mut inside = false;
    for k in 0..m {
        let (a, b) = (v[k], v[(k + 1) % m]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let xc = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < xc {
                inside = !inside;
            }
        }
    }
    inside
}

fn polygon_line_intervals(v: &[Point], o: Point, tau: Point) -> Vec<(f64, f64)> {
    let nu = [-tau[1], tau[0]];
    let m = v.len();
    let mut xs = Vec::new();
    for k in 0..m {
        let (a, b) = (v[k], v[(k + 1) % m]);
        let (sa, sb) = (geom::dot(geom::sub(a, o), nu), geom::dot(geom::sub(b, o), nu));
        if (sa > 0.0) != (sb > 0.0) {
            let lam = sa / (sa - sb);
            let p = geom::add(a, geom::scale(geom::sub(b, a), lam));
            xs.push(geom::dot(geom::sub(p, o), tau));
        }
    }
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.chunks_exact(2).map(|c| (c[0], c[1])).collect()
}

/// Interval of `u` with `⟨m, o + uτ − q⟩ ≤ 0` intersected into `(lo, hi)`.
fn clip_halfplane(lo: &mut f64, hi: &mut f64, m: Point, q: Point, o: Point, tau: Point) {
    let c0 = geom::dot(m, geom::sub(o, q));
    let c1 = geom::dot(m, tau);
    if c1.abs() < 1e-15 {
        if c0 > 0.0 {
            *lo = 1.0;
            *hi = 0.0;
        }
    } else if c1 > 0.0 {
        *hi = hi.min(-c0 / c1);
    } else {
        *lo = lo.max(-c0 / c1);
    }
}

impl RegionSpec {
    pub fn new(kind: RegionKind) -> RegionSpec {
        RegionSpec { kind, complement: false }
    }

    pub fn complemented(&self) -> RegionSpec {
        RegionSpec { kind: self.kind.clone(), complement: !self.complement }
    }

    fn base_contains(&self, p: Point) -> bool {
        match &self.kind {
            RegionKind::Halfplane { point, normal } => geom::dot(*normal, geom::sub(p, *point)) <= 0.0,
            RegionKind::Disk { center, radius } => geom::dist(p, *center) <= *radius,
            RegionKind::Ellipse { center, a, b } => {
                let d = geom::sub(p, *center);
                (d[0] / a).powi(2) + (d[1] / b).powi(2) <= 1.0
            }
            RegionKind::Wedge(bs) => bs.contains(p),
            RegionKind::Polygon { vertices } => polygon_contains(vertices, p),
            RegionKind::CurveInterior(c) => polygon_contains(&c.nodes, p),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.base_contains(p) != self.complement
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self.kind, RegionKind::Halfplane { .. } | RegionKind::Wedge(_))
    }

    /// Outward unit normal of the base set at boundary point `z`.
    pub fn outward_normal(&self, z: Point) -> Result<Point> {
        Ok(match &self.kind {
            RegionKind::Halfplane { normal, .. } => geom::unit(*normal),
            RegionKind::Disk { center, .. } => geom::unit(geom::sub(z, *center)),
            RegionKind::Ellipse { center, a, b } => {
                let d = geom::sub(z, *center);
                geom::unit([d[0] / (a * a), d[1] / (b * b)])
            }
            RegionKind::Wedge(bs) => {
                let p = bs.pieces();
                let t = if z[0] < 0.0 {
                    p[0].tau
                } else if z[0] < bs.t_tilde {
                    p[1].tau
                } else {
                    p[2].tau
                };
                if z[0] == 0.0 || (bs.m1 > 0.0 && z[0] == bs.t_tilde) {
                    return Err(FracError::UndefinedPoint("z is a wedge corner".into()));
                }
                geom::perp(t)
            }
            RegionKind::Polygon { vertices } => {
                let m = vertices.len();
                let k = (0..m)
                    .min_by(|&a, &b| {
                        let da = geom::point_segment_dist(z, vertices[a], vertices[(a + 1) % m]);
                        let db = geom::point_segment_dist(z, vertices[b], vertices[(b + 1) % m]);
                        da.partial_cmp(&db).unwrap()
                    })
                    .unwrap();
                let t = geom::unit(geom::sub(vertices[(k + 1) % m], vertices[k]));
                let sgn = geom::signed_area(vertices).signum();
                geom::scale(geom::perp(t), sgn)
            }
            RegionKind::CurveInterior(c) => {
                let k = (0..c.len())
                    .min_by(|&a, &b| {
                        geom::dist(z, c.nodes[a]).partial_cmp(&geom::dist(z, c.nodes[b])).unwrap()
                    })
                    .unwrap();
                geom::scale(c.normals[k], c.signed_area().signum())
            }
        })
    }

    /// Largest distance from `z` to a point of a bounded base set.
    fn reach(&self, z: Point) -> f64 {
        match &self.kind {
            RegionKind::Disk { center, radius } => geom::dist(z, *center) + radius,
            RegionKind::Ellipse { center, a, b } => geom::dist(z, *center) + a.max(*b),
            RegionKind::Polygon { vertices } => {
                vertices.iter().map(|v| geom::dist(*v, z)).fold(0.0, f64::max)
            }
            RegionKind::CurveInterior(c) => {
                c.nodes.iter().map(|v| geom::dist(*v, z)).fold(0.0, f64::max)
            }
            RegionKind::Halfplane { .. } => 1.0,
            RegionKind::Wedge(bs) => 2.0 * (bs.t_tilde + geom::norm(z)),
        }
    }

    /// Sorted `u`-intervals where `o + uτ` lies in the base set.
    fn line_intervals(&self, o: Point, tau: Point) -> Vec<(f64, f64)> {
        match &self.kind {
            RegionKind::Halfplane { point, normal } => {
                let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
                clip_halfplane(&mut lo, &mut hi, *normal, *point, o, tau);
                if lo < hi { vec![(lo, hi)] } else { vec![] }
            }
            RegionKind::Disk { center, radius } => {
                let d = geom::sub(o, *center);
                quadratic_interval(1.0, 2.0 * geom::dot(d, tau), geom::dot(d, d) - radius * radius)
            }
            RegionKind::Ellipse { center, a, b } => {
                let d = geom::sub(o, *center);
                let (dx, dy) = (d[0] / a, d[1] / b);
                let (tx, ty) = (tau[0] / a, tau[1] / b);
                quadratic_interval(
                    tx * tx + ty * ty,
                    2.0 * (dx * tx + dy * ty),
                    dx * dx + dy * dy - 1.0,
                )
            }
            RegionKind::Wedge(bs) => {
                let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
                // y₂ ≥ −m y₁, y₂ ≥ 0, y₂ ≥ m₁ (y₁ − t̃)
                clip_halfplane(&mut lo, &mut hi, [-bs.m, -1.0], [0.0, 0.0], o, tau);
                clip_halfplane(&mut lo, &mut hi, [0.0, -1.0], [0.0, 0.0], o, tau);
                clip_halfplane(&mut lo, &mut hi, [bs.m1, -1.0], [bs.t_tilde, 0.0], o, tau);
                if lo < hi { vec![(lo, hi)] } else { vec![] }
            }
            RegionKind::Polygon { vertices } => polygon_line_intervals(vertices, o, tau),
            RegionKind::CurveInterior(c) => polygon_line_intervals(&c.nodes, o, tau),
        }
    }
}

/// `∫_{|u| ≥ w} (χ_{E^c} − χ_E)(a² + u²)^{−1−s/2} du` given the `E`-intervals.
fn line_value(ints: &[(f64, f64)], a: f64, w: f64, s: f64, gmax: f64) -> f64 {
    let aa = a.abs();
    let g = |u: f64| cos_power_integral(atan_ratio(u, aa), s);
    let gw = g(w);
    let full = 2.0 * (gmax - gw);
    let mut e = 0.0;
    for &(u0, u1) in ints {
        if u0 < -w {
            e += g(u1.min(-w)) - g(u0);
        }
        if u1 > w {
            e += g(u1) - g(u0.max(w));
        }
    }
    aa.powf(-1.0 - s) * (full - 2.0 * e)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    /// `(ε, I(ε))` for every exclusion radius.
    pub per_eps: Vec<(f64, f64)>,
    /// Gap between the last two Richardson estimates (0 with two radii).
    pub residual: f64,
    pub h: f64,
    pub warning: Option<String>,
}

/// Region-integral evaluation of `H^s_E(z)`.
///
/// Scanlines run along the tangent at `z` and are integrated exactly; the
/// transverse direction uses the midpoint rule with spacing `h`. Each
/// exclusion radius `ε` gives `I(ε)`; the limit `ε → 0` is extrapolated
/// with exponent `1 − s`.
pub fn nmc_region_oracle(
    region: &RegionSpec,
    z: Point,
    s: f64,
    eps_list: &[f64],
    h: f64,
) -> Result<OracleResult> {
    let nu = region.outward_normal(z)?;
    oracle_in_frame(region, z, nu, s, eps_list, h)
}

fn oracle_in_frame(
    region: &RegionSpec,
    z: Point,
    nu: Point,
    s: f64,
    eps_list: &[f64],
    h: f64,
) -> Result<OracleResult> {
    check_s(s)?;
    if eps_list.len() < 2 {
        return Err(FracError::Parameter("need at least two exclusion radii".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(FracError::Parameter("eps_list must be strictly decreasing".into()));
    }
    if !(h > 0.0) || eps_list.last().unwrap() < &h {
        return Err(FracError::Parameter("radii must not be below the grid spacing".into()));
    }
    let tau = [-nu[1], nu[0]];
    let gmax = cos_power_half(s);
    let reach = region.reach(z);
    let y = reach + 2.0 * h;
    let cells = (y / h).ceil() as usize;

    let line = |a: f64, w: f64| -> f64 {
        let o = geom::add(z, geom::scale(nu, a));
        line_value(&region.line_intervals(o, tau), a, w, s, gmax)
    };
    let pair = |a: f64, eps: f64| -> f64 {
        let w = if a < eps { (eps * eps - a * a).sqrt() } else { 0.0 };
        line(a, w) + line(-a, w)
    };
    let sgn = if region.complement { -1.0 } else { 1.0 };
    // Paired lines ±a cancel to leading order, leaving an integrable
    // a^{-(1+s)/2} profile on the scale of the lens between boundary and
    // tangent. Below `a1` the transverse integral is graded Gauss-Legendre;
    // above it the midpoint rule with spacing h.
    let j1 = (eps_list[0].max(32.0 * h) / h).ceil() as usize;
    let a1 = j1 as f64 * h;
    let mut far = (j1..cells.max(j1))
        .into_par_iter()
        .map(|j| pair((j as f64 + 0.5) * h, 0.0))
        .collect::<Vec<_>>()
        .into_iter()
        .sum::<f64>()
        * h;
    far += tail(region, &line, y.max(a1), s, gmax);
    let per_eps: Vec<(f64, f64)> = eps_list
        .par_iter()
        .map(|&eps| {
            let f = |a: f64| pair(a, eps);
            let near = integrate_graded(&f, 0.0, eps / 2.0, 60)
                + integrate_graded(|t| f(eps - t), 0.0, eps / 2.0, 60)
                + integrate_graded(&f, eps, a1, 60);
            (eps, sgn * (near + far))
        })
        .collect();
    let q = 1.0 - s;
    let rich: Vec<f64> = per_eps
        .windows(2)
        .map(|w| {
            let ((e1, i1), (e2, i2)) = (w[0], w[1]);
            let (p1, p2) = (e1.powf(q), e2.powf(q));
            (i2 * p1 - i1 * p2) / (p1 - p2)
        })
        .collect();
    let value = *rich.last().unwrap();
    let residual = if rich.len() >= 2 { (value - rich[rich.len() - 2]).abs() } else { 0.0 };
    let warning = (residual > 1e-2 * value.abs() + 1e-6)
        .then(|| format!("extrapolation residual {residual:e} above tolerance"));
    Ok(OracleResult { value, per_eps, residual, h, warning })
}

/// Contribution of lines with `|a| > y`.
fn tail<F: Fn(f64, f64) -> f64 + Sync>(region: &RegionSpec, line: &F, y: f64, s: f64, gmax: f64) -> f64 {
    if region.is_bounded() {
        return 2.0 * 2.0 * gmax * y.powf(-s) / s;
    }
    let (x, w) = gauss_legendre(20);
    let levels = 24;
    let mut acc = 0.0;
    for k in 0..levels {
        let (lo, hi) = (y * 2f64.powi(k), y * 2f64.powi(k + 1));
        let (mid, hw) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
        for (xi, wi) in x.iter().zip(&w) {
            let a = mid + hw * xi;
            acc += wi * hw * (line(a, 0.0) + line(-a, 0.0));
        }
    }
    let a_end = y * 2f64.powi(levels);
    let f = |a: f64| a.abs().powf(1.0 + s) * line(a, 0.0);
    acc + (f(a_end) + f(-a_end)) * a_end.powf(-s) / s
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MaxPrincipleReport {
    pub h_a: f64,
    pub h_b: f64,
    pub margin: f64,
    /// `H_B(z) ≥ −tol` when `B` is convex; `None` otherwise.
    pub b_nonnegative: Option<bool>,
}

fn is_convex_region(r: &RegionSpec) -> bool {
    if r.complement {
        return false;
    }
    match &r.kind {
        RegionKind::Polygon { vertices } => {
            let m = vertices.len();
            let sg = geom::signed_area(vertices).signum();
            (0..m).all(|k| {
                let a = geom::sub(vertices[(k + 1) % m], vertices[k]);
                let b = geom::sub(vertices[(k + 2) % m], vertices[(k + 1) % m]);
                sg * geom::cross(a, b) >= 0.0
            })
        }
        RegionKind::CurveInterior(c) => curve::convexity_check(c).is_convex,
        _ => true,
    }
}

/// `H^s_A(z) − H^s_B(z)` for `A ⊆ B` sharing the boundary point `z`.
pub fn max_principle_check(
    a: &RegionSpec,
    b: &RegionSpec,
    z: Point,
    s: f64,
    eps_list: &[f64],
    h: f64,
) -> Result<MaxPrincipleReport> {
    let nu = a.outward_normal(z)?;
    let tau = [-nu[1], nu[0]];
    let r = a.reach(z).min(b.reach(z)).max(4.0 * h);
    let m = 200usize;
    let step = 2.0 * r / m as f64;
    for i in 0..m {
        for j in 0..m {
            let (u, v) = (-r + (i as f64 + 0.5) * step, -r + (j as f64 + 0.5) * step);
            let p = geom::add(z, geom::add(geom::scale(tau, u), geom::scale(nu, v)));
            if a.contains(p) && !b.contains(p) {
                return Err(FracError::Precondition(format!(
                    "A is not contained in B at ({:.4}, {:.4})",
                    p[0], p[1]
                )));
            }
        }
    }
    let h_a = oracle_in_frame(a, z, nu, s, eps_list, h)?.value;
    let h_b = if a == b { h_a } else { oracle_in_frame(b, z, nu, s, eps_list, h)?.value };
    let tol = 1e-3 * h_a.abs().max(h_b.abs());
    Ok(MaxPrincipleReport {
        h_a,
        h_b,
        margin: h_a - h_b,
        b_nonnegative: is_convex_region(b).then_some(h_b >= -tol),
    })
}

// ---------------------------------------------------------------------------
// Corner exponent.

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CornerFit {
    pub alpha: f64,
    pub log_c: f64,
    /// `(distance, H^s)` at the probes used.
    pub probes: Vec<(f64, f64)>,
}

/// Arc parameter of the corner nearest node `i`: the midpoint of the run
/// of flagged nodes containing `i`, or node `i` itself.
pub fn corner_position(curve: &ArcCurve, i: usize) -> (f64, usize) {
    let n = curve.len();
    if !curve.is_corner(i) {
        return (curve.arc_param(i), i);
    }
    let (mut lo, mut hi) = (0usize, 0usize);
    while lo < n && curve.is_corner((i + n - lo - 1) % n) {
        lo += 1;
    }
    while hi < n && curve.is_corner((i + hi + 1) % n) {
        hi += 1;
    }
    let x0 = curve.arc_param(i) + (hi as f64 - lo as f64) / 2.0 * curve.spacing;
    (x0, (i + hi) % n)
}

/// Least-squares slope of `log|H^s|` against `log d` on the forward side
/// of the corner at node `corner_node`.
pub fn corner_exponent_fit(
    curve: &ArcCurve,
    s: f64,
    corner_node: usize,
    probe_dists: &[f64],
) -> Result<CornerFit> {
    check_s(s)?;
    let n = curve.len();
    let (x0, last) = corner_position(curve, corner_node);
    let x_last = curve.arc_param(last) + if last < corner_node { curve.length() } else { 0.0 };
    let mut idx: Vec<usize> = Vec::new();
    for &d in probe_dists {
        if d < 5.0 * curve.spacing || d > curve.length() / 4.0 {
            continue;
        }
        let k = ((x0 + d - x_last) / curve.spacing).round().max(0.0) as usize;
        let j = (last + k) % n;
        if !idx.contains(&j) {
            idx.push(j);
        }
    }
    if idx.len() < 4 {
        return Err(FracError::InsufficientData(format!(
            "{} valid probes, need 4",
            idx.len()
        )));
    }
    let probes = idx
        .par_iter()
        .map(|&j| {
            let mut d = curve.arc_param(j) - x0;
            d = d.rem_euclid(curve.length());
            Ok((d, nmc_boundary(curve, s, j)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = probes.iter().map(|(d, v)| (d.ln(), v.abs().ln())).collect();
    let (alpha, log_c) = linear_fit(&pts);
    Ok(CornerFit { alpha, log_c, probes })
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
