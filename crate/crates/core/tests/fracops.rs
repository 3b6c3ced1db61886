use fracwill::fracops::{
    gagliardo_seminorm, padded_fractional_laplacian, poincare_sobolev_check, spectral_fractional_laplacian,
    stein_ratio, t_operator, Domain, GridFunction,
};
use fracwill::FracError;

fn on_circle<F: Fn(f64) -> f64>(f: F, m: usize) -> GridFunction {
    GridFunction::from_fn(f, m, Domain::Circle).unwrap()
}

fn on_interval<F: Fn(f64) -> f64>(f: F, m: usize) -> GridFunction {
    GridFunction::from_fn(f, m, Domain::Interval { a: -1.0, b: 1.0 }).unwrap()
}

fn scaled(f: &GridFunction, c: f64) -> GridFunction {
    GridFunction { samples: f.samples.iter().map(|v| c * v).collect(), domain: f.domain }
}

fn bump(x: f64) -> f64 {
    if x.abs() < 0.5 {
        (-1.0 / (1.0 - 4.0 * x * x)).exp()
    } else {
        0.0
    }
}

#[test]
fn seminorm_of_constant_is_zero() {
    let f = on_circle(|_| 3.0, 128);
    assert_eq!(gagliardo_seminorm(&f, 0.3, 2.0).unwrap().value, 0.0);
}

#[test]
fn seminorm_is_homogeneous() {
    let f = on_circle(|x| x.sin() + 0.3 * (2.0 * x).cos(), 128);
    let a = gagliardo_seminorm(&f, 0.4, 2.5).unwrap().value;
    let b = gagliardo_seminorm(&scaled(&f, 2.0), 0.4, 2.5).unwrap().value;
    assert!((b - 2.0 * a).abs() < 1e-12 * a);
}

#[test]
fn cosine_seminorm_is_refinement_stable() {
    let r = gagliardo_seminorm(&on_circle(|x| x.cos(), 256), 0.5, 2.0).unwrap();
    assert!(r.refinement_change.unwrap() < 0.01);
    assert!(!r.unresolved);
    let fine = gagliardo_seminorm(&on_circle(|x| x.cos(), 512), 0.5, 2.0).unwrap();
    assert!((fine.value - r.value).abs() / fine.value < 0.01);
}

#[test]
fn seminorm_rejects_bad_orders() {
    let f = on_circle(|x| x.cos(), 64);
    assert!(matches!(gagliardo_seminorm(&f, 1.0, 2.0), Err(FracError::Parameter(_))));
    assert!(matches!(gagliardo_seminorm(&f, 0.5, 0.5), Err(FracError::Parameter(_))));
}

#[test]
fn spectral_eigenrelation() {
    let f = on_circle(|x| (3.0 * x).cos(), 128);
    let g = spectral_fractional_laplacian(&f, 0.5).unwrap();
    for (j, v) in g.samples.iter().enumerate() {
        assert!((v - 3f64.sqrt() * (3.0 * f.x(j)).cos()).abs() < 1e-10);
    }
}

#[test]
fn spectral_kills_constants() {
    let g = spectral_fractional_laplacian(&on_circle(|_| 2.5, 128), 0.7).unwrap();
    assert!(g.samples.iter().all(|v| *v == 0.0));
}

#[test]
fn spectral_is_linear() {
    let f = on_circle(|x| x.sin().exp(), 128);
    let g = on_circle(|x| (2.0 * x).cos() * 0.3, 128);
    let sum = GridFunction { samples: f.samples.iter().zip(&g.samples).map(|(a, b)| a + b).collect(), ..f.clone() };
    let lf = spectral_fractional_laplacian(&f, 0.6).unwrap();
    let lg = spectral_fractional_laplacian(&g, 0.6).unwrap();
    let ls = spectral_fractional_laplacian(&sum, 0.6).unwrap();
    for j in 0..128 {
        assert!((ls.samples[j] - lf.samples[j] - lg.samples[j]).abs() < 1e-12);
    }
}

#[test]
fn spectral_needs_a_circle() {
    let f = on_interval(|x| x, 64);
    assert!(matches!(spectral_fractional_laplacian(&f, 0.5), Err(FracError::UnsupportedDomain(_))));
}

#[test]
fn stein_ratio_examples() {
    let f = on_circle(|x| x.cos() + 0.2 * (3.0 * x).sin(), 256);
    let a = stein_ratio(&f, 0.5).unwrap();
    let b = stein_ratio(&scaled(&f, 2.0), 0.5).unwrap();
    assert!((a - b).abs() < 1e-10 * a);

    let r1 = stein_ratio(&on_circle(|x| x.cos(), 256), 0.5).unwrap();
    let r2 = stein_ratio(&on_circle(|x| x.cos(), 512), 0.5).unwrap();
    assert!(r1 > 0.0 && r1.is_finite());
    assert!((r1 - r2).abs() / r2 < 0.05);

    let fam: Vec<f64> =
        (1..=8).map(|k| stein_ratio(&on_circle(|x| (k as f64 * x).cos(), 256), 0.5).unwrap()).collect();
    let hi = fam.iter().cloned().fold(0.0, f64::max);
    let lo = fam.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(hi / lo <= 10.0);
}

#[test]
fn stein_ratio_of_constant_is_degenerate() {
    assert!(matches!(stein_ratio(&on_circle(|_| 1.0, 64), 0.5), Err(FracError::Degenerate(_))));
}

#[test]
fn t_operator_of_zero_is_zero() {
    let f = on_interval(|_| 0.0, 256);
    let at: Vec<usize> = (0..256).collect();
    assert!(t_operator(&f, 0.5, &at).unwrap().iter().all(|v| *v == 0.0));
}

#[test]
fn t_operator_is_linear() {
    let f = on_interval(bump, 512);
    let at: Vec<usize> = (100..400).step_by(7).collect();
    let a = t_operator(&f, 0.4, &at).unwrap();
    let b = t_operator(&scaled(&f, -3.0), 0.4, &at).unwrap();
    let top = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let err = a.iter().zip(&b).map(|(x, y)| (y + 3.0 * x).abs()).fold(0.0, f64::max);
    assert!(err < 1e-12 * top, "{err:e} vs {top}");
}

#[test]
fn t_operator_matches_padded_spectral_oracle() {
    let s = 0.5;
    let f = on_interval(bump, 1024);
    let oracle = padded_fractional_laplacian(&f, 1.0 + s, 8).unwrap();
    let top = oracle.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let at: Vec<usize> = (0..f.len()).filter(|&j| oracle[j].abs() > 0.1 * top).collect();
    let t = t_operator(&f, s, &at).unwrap();
    let r: Vec<f64> = at.iter().zip(&t).map(|(&j, v)| v / oracle[j]).collect();
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    let sd = (r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / r.len() as f64).sqrt();
    assert!(mean < 0.0);
    assert!(sd / mean.abs() < 0.02);
    // independent constant 2sΓ(−1−s)cos(π(1+s)/2)
    let c = fracwill::fracops::t_operator_constant(s);
    assert!((mean - c).abs() / c.abs() < 0.01, "{mean} vs {c}");
}

#[test]
fn t_operator_rejects_support_at_the_ends() {
    let f = on_interval(|x| 1.0 - x * x, 256);
    assert!(matches!(t_operator(&f, 0.5, &[128]), Err(FracError::Precondition(_))));
    let g = on_circle(|x| x.cos(), 64);
    assert!(matches!(t_operator(&g, 0.5, &[1]), Err(FracError::UnsupportedDomain(_))));
}

#[test]
fn poincare_sobolev_examples() {
    let z = poincare_sobolev_check(&on_interval(|_| 0.0, 128), 0.5, Some(0.3)).unwrap();
    assert_eq!((z.lhs_l1t, z.lhs_l2, z.rhs, z.embed_ratio), (0.0, 0.0, 0.0, Some(0.0)));

    let a = poincare_sobolev_check(&on_interval(|x| x, 256), 0.5, None).unwrap();
    let b = poincare_sobolev_check(&on_interval(|x| x, 512), 0.5, None).unwrap();
    for (x, y) in [(a.lhs_l1t / a.rhs, b.lhs_l1t / b.rhs), (a.lhs_l2 / a.rhs, b.lhs_l2 / b.rhs)] {
        assert!(x.is_finite() && (x - y).abs() / y < 0.05);
    }

    let a = poincare_sobolev_check(&on_interval(|x| x, 256), 0.7, Some(0.3)).unwrap();
    let b = poincare_sobolev_check(&on_interval(|x| x, 512), 0.7, Some(0.3)).unwrap();
    let (x, y) = (a.embed_ratio.unwrap(), b.embed_ratio.unwrap());
    assert!(x.is_finite() && (x - y).abs() / y < 0.05);
}

#[test]
fn poincare_needs_zero_mean() {
    let f = on_interval(|x| 1.0 + x, 128);
    assert!(matches!(poincare_sobolev_check(&f, 0.5, None), Err(FracError::Precondition(_))));
}

#[test]
fn short_grids_are_rejected() {
    assert!(GridFunction::circle(vec![0.0; 16]).is_err());
}
