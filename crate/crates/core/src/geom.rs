//! Small vector helpers on `[f64; 2]`.

pub type Point = [f64; 2];

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale(a: Point, k: f64) -> Point {
    [a[0] * k, a[1] * k]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

/// Rotation by −π/2: `(t₁, t₂) ↦ (t₂, −t₁)`.
#[inline]
pub fn perp(t: Point) -> Point {
    [t[1], -t[0]]
}

#[inline]
pub fn unit(a: Point) -> Point {
    let n = norm(a);
    [a[0] / n, a[1] / n]
}

#[inline]
pub fn rotate(a: Point, theta: f64) -> Point {
    let (s, c) = theta.sin_cos();
    [c * a[0] - s * a[1], s * a[0] + c * a[1]]
}

/// Shoelace signed area of a closed polygon.
pub fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    (0..n).map(|i| cross(pts[i], pts[(i + 1) % n])).sum::<f64>() / 2.0
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_dist(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let l2 = dot(ab, ab);
    if l2 == 0.0 {
        return dist(p, a);
    }
    let t = (dot(sub(p, a), ab) / l2).clamp(0.0, 1.0);
    dist(p, add(a, scale(ab, t)))
}

/// Intersection of the lines `p + λu` and `q + μv`.
pub fn line_intersection(p: Point, u: Point, q: Point, v: Point) -> Option<Point> {
    let den = cross(u, v);
    if den.abs() < 1e-14 {
        return None;
    }
    let lam = cross(sub(q, p), v) / den;
    Some(add(p, scale(u, lam)))
}
