use std::f64::consts::{FRAC_PI_4, PI, TAU};

use fracwill::curve::{
    bilipschitz_profile, bilipschitz_profile_open, circle, convexity_check, ellipse, graph_window_check,
    graph_window_check_open, hull_gap, polygon, resample_arclength, self_proximity_scan, square, support_to_curve,
    Shape, SupportCurve,
};
use fracwill::geom;
use fracwill::FracError;

fn spacing_stats(nodes: &[[f64; 2]]) -> (f64, f64) {
    let n = nodes.len();
    let d: Vec<f64> = (0..n).map(|i| geom::dist(nodes[i], nodes[(i + 1) % n])).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let sd = (d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    (mean, sd)
}

#[test]
fn clustered_circle_samples_come_out_uniform() {
    let m = 20000;
    let pts: Vec<_> = (0..m)
        .map(|j| {
            let t = PI * (1.0 - (PI * j as f64 / m as f64).cos());
            [t.cos(), t.sin()]
        })
        .collect();
    let c = resample_arclength(&pts, 256).unwrap();
    let (_, sd) = spacing_stats(&c.nodes);
    assert!(sd < 1e-6 * c.spacing, "sd {sd}");
}

#[test]
fn square_length_is_exact() {
    let c = square(1.0, 400).unwrap();
    assert!((c.length() - 4.0).abs() < 1e-6);
}

#[test]
fn degenerate_polyline_is_rejected() {
    let pts = vec![[1.0, 1.0]; 12];
    assert!(matches!(resample_arclength(&pts, 64), Err(FracError::InvalidGeometry(_))));
}

#[test]
fn clockwise_input_is_reoriented() {
    let cw: Vec<_> = circle(1.0, 128).nodes.into_iter().rev().collect();
    let c = resample_arclength(&cw, 128).unwrap();
    assert!(c.signed_area() > 0.0);
}

#[test]
fn circle_normals_are_radial() {
    let c = circle(1.0, 256);
    for (n, p) in c.normals.iter().zip(&c.nodes) {
        assert!(geom::dist(*n, *p) < 1e-6);
    }
}

#[test]
fn tangents_and_normals_are_orthonormal() {
    let c = ellipse(1.0, 0.4, 300).unwrap();
    for (t, n) in c.tangents.iter().zip(&c.normals) {
        assert!(geom::dot(*t, *n).abs() < 1e-15);
        assert!((geom::norm(*n) - 1.0).abs() < 1e-15);
    }
}

#[test]
fn constant_support_gives_unit_circle() {
    let c = support_to_curve(&SupportCurve::circle(1.0), 256, 1e-3).unwrap();
    for p in &c.nodes {
        assert!((geom::norm(*p) - 1.0).abs() < 1e-8);
    }
}

#[test]
fn oval_support_is_convex_with_cauchy_perimeter() {
    let sc = SupportCurve { a0: 1.0, coeffs: vec![(2, 0.1, 0.0)] };
    let c = support_to_curve(&sc, 512, 1e-3).unwrap();
    assert!(convexity_check(&c).is_convex);
    assert!((c.length() - TAU).abs() < 1e-4);
}

#[test]
fn nonconvex_support_is_a_constraint_violation() {
    let sc = SupportCurve { a0: 1.0, coeffs: vec![(2, 0.5, 0.0)] };
    assert!(matches!(support_to_curve(&sc, 256, 1e-3), Err(FracError::ConstraintViolation { .. })));
}

fn star(n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            let r = if k % 2 == 0 { 1.0 } else { 0.4 };
            [r * t.cos(), r * t.sin()]
        })
        .collect()
}

#[test]
fn convexity_of_circle_star_and_square() {
    let r = convexity_check(&circle(1.0, 256));
    assert!(r.is_convex && r.worst_violation >= -1e-10);
    assert!(!convexity_check(&polygon(&star(10), 400).unwrap()).is_convex);
    assert!(convexity_check(&square(1.0, 400).unwrap()).is_convex);
}

#[test]
fn hull_gaps() {
    assert_eq!(hull_gap(&square(1.0, 400).unwrap()), 0.0);
    assert!(hull_gap(&circle(1.0, 512)) < 1e-3);
    // V-shaped notch of depth 0.2 cut into the unit circle
    let mut pts: Vec<[f64; 2]> = circle(1.0, 2048)
        .nodes
        .into_iter()
        .filter(|p| p[1].atan2(p[0]).abs() > 0.1)
        .collect();
    let at = pts.iter().position(|p| p[1] > 0.0 && p[1].atan2(p[0]) > 0.1).unwrap();
    pts.insert(at, [0.8, 0.0]);
    let c = resample_arclength(&pts, 2048).unwrap();
    let g = hull_gap(&c);
    assert!((0.18..=0.22).contains(&g), "gap {g}");
}

#[test]
fn bilipschitz_examples() {
    let seg: Vec<_> = (0..50).map(|k| [k as f64 * 0.1, 0.0]).collect();
    let b = bilipschitz_profile_open(&seg, 1.0);
    assert!((b.min - 1.0).abs() < 1e-12 && (b.max - 1.0).abs() < 1e-12);
    let c = circle(1.0, 8192);
    let b = bilipschitz_profile(&c, 0.5);
    assert!((b.min - 0.5f64.sin() / 0.5).abs() < 1e-4, "{}", b.min);
    assert!(b.max <= 1.0 + 1e-8);
    let big = bilipschitz_profile(&c.dilate(3.0), 1.5);
    assert!((big.min - b.min).abs() < 1e-10 && (big.max - b.max).abs() < 1e-10);
}

#[test]
fn graph_windows() {
    let c = circle(1.0, 1024);
    let w = graph_window_check(&c, 0, FRAC_PI_4);
    assert!(w.is_graph);
    assert_eq!(w.shape, Shape::Concave);
    assert!(!graph_window_check(&c, 0, 3.0 * FRAC_PI_4).is_graph);
    // reflex right-angle corner: reads as convex in the outward-normal frame
    let v: Vec<_> = (-20..=20).map(|k| [k as f64 * 0.05, -(k as f64 * 0.05).abs()]).collect();
    let w = graph_window_check_open(&v, 20, 0.5);
    assert!(w.is_graph);
    assert_eq!(w.shape, Shape::Convex);
}

#[test]
fn self_proximity() {
    assert!(self_proximity_scan(&circle(1.0, 512), 0.5).is_empty());
    let dumbbell = [
        [-1.5, -0.5],
        [-0.5, -0.5],
        [-0.5, -0.005],
        [0.5, -0.005],
        [0.5, -0.5],
        [1.5, -0.5],
        [1.5, 0.5],
        [0.5, 0.5],
        [0.5, 0.005],
        [-0.5, 0.005],
        [-0.5, 0.5],
        [-1.5, 0.5],
    ];
    let c = polygon(&dumbbell, 2000).unwrap();
    let pairs = self_proximity_scan(&c, 0.5);
    assert!(!pairs.is_empty());
    for (i, j) in pairs {
        let (a, b) = (c.nodes[i], c.nodes[j]);
        assert!(a[0].abs() < 0.5 + 1e-9 && b[0].abs() < 0.5 + 1e-9);
        assert!(a[1] * b[1] < 0.0);
    }
    assert!(self_proximity_scan(&ellipse(1.0, 0.5, 512).unwrap(), 0.1).is_empty());
}
