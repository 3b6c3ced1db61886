//! Verification suites. Each one writes CSV artifacts into the run
//! directory and records a pass/fail check per property.

use std::path::Path;

use anyhow::Result;
use clap::ValueEnum;
use csv::Writer;
use fracwill::curvature::{
    corner_exponent_fit, max_principle_check, nmc_boundary, nmc_curve, nmc_pieces, nmc_region_oracle, Piece,
    RegionKind, RegionSpec,
};
use fracwill::curve::{
    circle, convexity_check, ellipse, parametric_polyline, resample_arclength, rounded_square, square,
    support_to_curve, SupportCurve,
};
use fracwill::energy::{scaling_check, vmo_bound_check, willmore_energy, FracParams, DEFAULT_EPS_VMO};
use fracwill::fracops::{padded_fractional_laplacian, stein_ratio, t_operator, Domain, GridFunction};
use fracwill::minimize::{concentration_scan, fd_gradient, lsc_check, minimize_descent, random_support, DescentConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Config;
use crate::io::{write_json, CurveFile};
use crate::manifest::{Check, Recorder};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Scaling,
    Oracle,
    Maxprinciple,
    Corners,
    Sobolev,
    Bmo,
    Descent,
    Sequences,
}

pub fn run(suite: Suite, cfg: &Config, rec: &mut Recorder) -> Result<()> {
    match suite {
        Suite::Scaling => scaling(cfg, rec),
        Suite::Oracle => oracle(cfg, rec),
        Suite::Maxprinciple => maxprinciple(cfg, rec),
        Suite::Corners => corners(cfg, rec),
        Suite::Sobolev => sobolev(cfg, rec),
        Suite::Bmo => bmo(cfg, rec),
        Suite::Descent => descent(cfg, rec),
        Suite::Sequences => sequences(cfg, rec),
    }
}

fn writer(rec: &mut Recorder, name: &str) -> Result<Writer<std::fs::File>> {
    Ok(Writer::from_path(rec.output(name))?)
}

fn fmax(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn fmin(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(f64::INFINITY, f64::min)
}

fn scaling(cfg: &Config, rec: &mut Recorder) -> Result<()> {
    let n = cfg.get("n", 512usize)?;
    let b = cfg.get("ellipse_b", 0.6)?;
    let s_crit = cfg.get("s_critical", 0.5)?;
    let s_sub = cfg.get("s_subcritical", 0.25)?;
    let p = cfg.get("p", 2.0)?;
    let rho_crit = cfg.list("rho_critical", &[0.5, 2.0, 10.0])?;
    let rho_sub = cfg.list("rho_subcritical", &[2.0, 4.0, 8.0])?;
    let c = ellipse(1.0, b, n)?;
    let mut w = writer(rec, "scaling.csv")?;
    w.write_record(["s", "p", "rho", "n", "delta", "energy", "energy_scaled", "observed_ratio", "predicted_ratio"])?;
    let mut row = |s: f64, rho: f64| -> Result<f64> {
        let r = scaling_check(&c, FracParams::new(s, p)?, rho)?;
        w.serialize((s, p, rho, n, c.spacing, r.w, r.w_scaled, r.observed_ratio, r.predicted_ratio))?;
        Ok(r.observed_ratio)
    };
    let mut crit = 0.0f64;
    for &rho in &rho_crit {
        crit = crit.max((row(s_crit, rho)? - 1.0).abs());
    }
    let slope = 1.0 - p * s_sub;
    let mut sub = 0.0f64;
    for &rho in &rho_sub {
        sub = sub.max((row(s_sub, rho)?.ln() / rho.ln() - slope).abs());
    }
    w.flush()?;
    rec.check(Check::new("critical scaling invariance", crit < 1e-10, format!("max |ratio - 1| = {crit:.2e}")));
    rec.check(Check::new("subcritical exponent", sub < 1e-6, format!("max |slope - {slope}| = {sub:.2e}")));
    Ok(())
}

fn oracle(cfg: &Config, rec: &mut Recorder) -> Result<()> {
    let n = cfg.get("n", 1024usize)?;
    let h = cfg.get("h", 1.0 / 400.0)?;
    let stride = cfg.get("stride", 64usize)?;
    let b = cfg.get("ellipse_b", 0.6)?;
    let ss = cfg.list("s", &[0.3, 0.5, 0.7])?;
    let eps = [16.0 * h, 8.0 * h, 4.0 * h];
    let regions = [
        ("disk", RegionSpec::new(RegionKind::Disk { center: [0.0, 0.0], radius: 1.0 }), circle(1.0, n)),
        ("ellipse", RegionSpec::new(RegionKind::Ellipse { center: [0.0, 0.0], a: 1.0, b }), ellipse(1.0, b, n)?),
    ];
    let mut w = writer(rec, "oracle.csv")?;
    w.write_record(["region", "s", "node", "n", "delta", "h", "boundary", "oracle", "relative"])?;
    let mut worst = 0.0f64;
    for &s in &ss {
        for (name, region, curve) in &regions {
            for i in (0..n).step_by(stride.max(1)) {
                let hb = nmc_boundary(curve, s, i)?;
                let ho = nmc_region_oracle(region, curve.nodes[i], s, &eps, h)?.value;
                let rel = (hb - ho).abs() / ho.abs();
                worst = worst.max(rel);
                w.serialize((name, s, i, n, curve.spacing, h, hb, ho, rel))?;
            }
        }
    }
    w.flush()?;
    rec.check(Check::new("boundary vs region", worst < 0.02, format!("max relative disagreement {worst:.2e}")));

    let line = [Piece::ray_in([0.0, 0.0], [1.0, 0.0]), Piece::ray_out([0.0, 0.0], [1.0, 0.0])];
    let hp = RegionSpec::new(RegionKind::Halfplane { point: [0.0, 0.0], normal: [0.0, 1.0] });
    let mut w = writer(rec, "halfplane.csv")?;
    w.write_record(["x", "h", "boundary", "oracle"])?;
    let mut top = 0.0f64;
    for x in [-1.0, 0.0, 0.37, 5.0] {
        let hb = nmc_pieces(&line, [x, 0.0], 0.5)?;
        let ho = nmc_region_oracle(&hp, [x, 0.0], 0.5, &eps, h)?.value;
        top = top.max(hb.abs()).max(ho.abs());
        w.serialize((x, h, hb, ho))?;
    }
    w.flush()?;
    rec.check(Check::new("half-plane zero", top < 1e-3, format!("max |H| = {top:.2e}")));
    Ok(())
}

fn maxprinciple(cfg: &Config, rec: &mut Recorder) -> Result<()> {
    let h = cfg.get("h", 1.0 / 400.0)?;
    let n = cfg.get("n", 512usize)?;
    let count = cfg.get("curves", 10u64)?;
    let amp = cfg.get("amplitude", 0.15)?;
    let s = cfg.get("s", 0.5)?;
    rec.seeds.extend(0..count);
    let a = RegionSpec::new(RegionKind::Disk { center: [0.0, 0.0], radius: 1.0 });
    let b = RegionSpec::new(RegionKind::Disk { center: [-1.0, 0.0], radius: 2.0 });
    let m = max_principle_check(&a, &b, [1.0, 0.0], s, &[16.0 * h, 8.0 * h, 4.0 * h], h)?;
    rec.check(Check::new("nested tangent disks", m.margin > 0.0, format!("margin {:.4}", m.margin)));

    let mut w = writer(rec, "convex_positivity.csv")?;
    w.write_record(["seed", "n", "delta", "min_h", "max_abs_h"])?;
    let mut worst = f64::INFINITY;
    for seed in 0..count {
        let c = support_to_curve(&random_support(6, amp, seed), n, 1e-3)?;
        let v = nmc_curve(&c, s)?.values;
        let top = fmax(v.iter().map(|x| x.abs()));
        let low = fmin(v.iter().copied());
        worst = worst.min(low / top);
        w.serialize((seed, n, c.spacing, low, top))?;
    }
    w.flush()?;
    rec.check(Check::new("convex positivity", worst >= -1e-3, format!("min H / max|H| = {worst:.4}")));
    Ok(())
}

fn corners(cfg: &Config, rec: &mut Recorder) -> Result<()> {
    let n = cfg.get("n", 20000usize)?;
    let ss = cfg.list("s", &[0.3, 0.5, 0.7])?;
    let d0 = cfg.get("d_min", 0.001)?;
    let mut w = writer(rec, "corners.csv")?;
    w.write_record(["s", "n", "delta", "distance", "h_s", "alpha"])?;
    let d: Vec<f64> = (0..8).map(|k| d0 * 10f64.powf(k as f64 / 7.0)).collect();
    let c = rounded_square(1.0, 8.0 / n as f64, n)?;
    let mut gap = 0.0f64;
    let mut alphas = vec![];
    for &s in &ss {
        let f = corner_exponent_fit(&c, s, c.corners[0], &d)?;
        for (x, v) in &f.probes {
            w.serialize((s, n, c.spacing, x, v, f.alpha))?;
        }
        gap = gap.max((f.alpha + s).abs());
        alphas.push(format!("{:.3}", f.alpha));
    }
    w.flush()?;
    rec.check(Check::new("corner blow-up rate", gap <= 0.1, format!("exponents {} (max gap {gap:.3})", alphas.join(" "))));

    let n0 = cfg.get("n0", 128usize)?;
    let doublings = cfg.get("doublings", 5u32)?;
    let mut w = writer(rec, "dichotomy.csv")?;
    w.write_record(["p", "n", "delta", "total"])?;
    let mut energies = |p: f64| -> Result<Vec<f64>> {
        (0..=doublings)
            .map(|k| {
                let c = square(1.0, n0 << k)?;
                let e = willmore_energy(&c, FracParams::new(0.5, p)?, None, None, false)?.total;
                w.serialize((p, c.len(), c.spacing, e))?;
                Ok(e)
            })
            .collect()
    };
    let e2 = energies(2.0)?;
    let e1 = energies(1.0)?;
    w.flush()?;
    let inc = fmin(e2.windows(2).map(|w| w[1] - w[0]));
    let diffs: Vec<f64> = e1.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let shrink = fmin(diffs.windows(2).map(|w| w[0] / w[1]));
    rec.check(Check::new("critical divergence on a square", inc >= 1.0, format!("min increment {inc:.3}")));
    rec.check(Check::new("supercritical finiteness on a square", shrink >= 1.5, format!("min shrink {shrink:.2}")));
    Ok(())
}

fn sobolev(cfg: &Config, rec: &mut Recorder) -> Result<()> {
    let count = cfg.get("functions", 20usize)?;
    let seed = cfg.get("seed", 7u64)?;
    let m = cfg.get("m", 256usize)?;
    let ss = cfg.list("s", &[0.3, 0.5, 0.7])?;
    rec.seeds.push(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = writer(rec, "stein.csv")?;
    w.write_record(["function", "s", "m", "ratio", "ratio_refined", "drift"])?;
    let (mut lo, mut hi, mut drift) = (f64::INFINITY, 0.0f64, 0.0f64);
    for j in 0..count {
        let modes: Vec<(f64, f64, f64)> =
            (1..=6).map(|k| (k as f64, rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)).collect();
        let f = |x: f64| modes.iter().map(|&(k, a, b)| a * (k * x).cos() + b * (k * x).sin()).sum::<f64>();
        for &s in &ss {
            let r1 = stein_ratio(&GridFunction::from_fn(f, m, Domain::Circle)?, s)?;
            let r2 = stein_ratio(&GridFunction::from_fn(f, 2 * m, Domain::Circle)?, s)?;
            let d = (r2 - r1).abs() / r2;
            (lo, hi, drift) = (lo.min(r1).min(r2), hi.max(r1).max(r2), drift.max(d));
            w.serialize((j, s, m, r1, r2, d))?;
        }
    }
    w.flush()?;
    rec.check(Check::new(
        "Stein equivalence",
        lo >= 0.1 && hi <= 10.0 && drift < 0.05,
        format!("ratios in [{lo:.3}, {hi:.3}], drift {drift:.2e}"),
    ));

    let s = cfg.get("s_toper", 0.5)?;
    let mt = cfg.get("m_toper", 2048usize)?;
    let pad = cfg.get("pad", 8usize)?;
    let bump = |x: f64| if x.abs() < 0.5 { (-1.0 / (1.0 - 4.0 * x * x)).exp() } else { 0.0 };
    let f = GridFunction::from_fn(bump, mt, Domain::Interval { a: -1.0, b: 1.0 })?;
    let oracle = padded_fractional_laplacian(&f, 1.0 + s, pad)?;
    let top = fmax(oracle.iter().map(|v| v.abs()));
    let at: Vec<usize> = (0..f.len()).filter(|&j| oracle[j].abs() > 0.1 * top).collect();
    let tv = t_operator(&f, s, &at)?;
    let mut w = writer(rec, "toper.csv")?;
    w.write_record(["x", "m", "pad", "t", "oracle", "ratio"])?;
    let ratios: Vec<f64> = at.iter().zip(&tv).map(|(&j, t)| t / oracle[j]).collect();
    for ((&j, t), r) in at.iter().zip(&tv).zip(&ratios) {
        w.serialize((f.x(j), mt, pad, t, oracle[j], r))?;
    }
    w.flush()?;
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let sd = (ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / ratios.len() as f64).sqrt();
    let rel = sd / mean.abs();
    rec.check(Check::new("T-operator identity", rel < 0.02 && mean < 0.0, format!("mean {mean:.4}, std/mean {rel:.2e}")));
    Ok(())
}

fn bmo(cfg: &Config, rec: &mut Recorder) -> Result<()> {
    let n = cfg.get("n", 4096usize)?;
    let mode = cfg.get("mode", 5.0)?;
    let amps = cfg.list("amplitudes", &[0.005, 0.01, 0.02])?;
    let mults = cfg.list("scales", &[4.0, 8.0, 12.0])?;
    let eps_vmo = cfg.get("eps_vmo", DEFAULT_EPS_VMO)?;
    let mut w = writer(rec, "bmo.csv")?;
    w.write_record(["amplitude", "n", "delta", "r", "bmo", "energy", "ratio"])?;
    let mut ratios = vec![];
    let mut applicable = true;
    for &amp in &amps {
        let pts = parametric_polyline(
            |t| {
                let r = 1.0 + amp * (mode * t).cos();
                [r * t.cos(), r * t.sin()]
            },
            1 << 17,
        );
        let c = resample_arclength(&pts, n)?;
        let scales: Vec<f64> = mults.iter().map(|k| k * c.spacing).collect();
        let v = vmo_bound_check(&c, 0.5, 2.0, &scales, eps_vmo)?;
        for &(r, b, e, q) in &v.per_scale {
            w.serialize((amp, n, c.spacing, r, b, e, q))?;
        }
        applicable &= v.applicable;
        ratios.push(v.ratio);
    }
    w.flush()?;
    let (lo, hi) = (fmin(ratios.iter().copied()), fmax(ratios.iter().copied()));
    let ok = ratios.iter().all(|r| r.is_finite() && *r > 0.0) && hi <= 2.0 * lo;
    rec.check(Check::new("BMO control band", ok, format!("ratios {ratios:.4?}")));
    rec.check(Check::new("small-energy regime", applicable, format!("eps_vmo {eps_vmo}")));
    Ok(())
}

fn descent(cfg: &Config, rec: &mut Recorder) -> Result<()> {
    let k = cfg.get("k", 8usize)?;
    let n_grad = cfg.get("n_gradient", 512usize)?;
    let seeds = cfg.get("seeds", 5u64)?;
    let amp = cfg.get("amplitude", 0.15)?;
    let config = DescentConfig {
        n: cfg.get("n", 256usize)?,
        max_iters: cfg.get("max_iters", 8usize)?,
        ..DescentConfig::default()
    };
    let g = fd_gradient(&SupportCurve::zeros(1.0, k), config.s, n_grad, config.h_fd)?;
    let gnorm = g[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
    rec.check(Check::new("circle stationarity", gnorm < 1e-5, format!("shape gradient norm {gnorm:.2e}")));

    let mut w = writer(rec, "descent.csv")?;
    w.write_record(["seed", "iter", "n", "energy", "grad_norm", "step", "accepted"])?;
    let (mut monotone, mut convex) = (true, true);
    for seed in 0..seeds {
        rec.seeds.push(seed);
        let tr = minimize_descent(&DescentConfig { seed, ..config.clone() }, &random_support(k, amp, seed))?;
        for (i, it) in tr.iterates.iter().enumerate() {
            w.serialize((seed, i, config.n, it.energy, it.grad_norm, it.step, it.accepted))?;
        }
        monotone &= tr.accepted_energies().windows(2).all(|w| w[1] <= w[0]);
        convex &= convexity_check(&support_to_curve(&tr.final_curve, 512, config.eps_kappa)?).is_convex;
        let path = rec.output(&format!("final_{seed}.json"));
        write_json(&path, &CurveFile::support(&tr.final_curve))?;
    }
    w.flush()?;
    rec.check(Check::new("monotone accepted energies", monotone, format!("{seeds} seeds")));
    rec.check(Check::new("convex finals", convex, format!("{seeds} seeds")));
    Ok(())
}

fn sequences(cfg: &Config, rec: &mut Recorder) -> Result<()> {
    let n = cfg.get("n", 1024usize)?;
    let m = cfg.get("n_concentration", 2048usize)?;
    let s = cfg.get("s", 0.5)?;
    let eps = cfg.get("eps", 0.1)?;
    let radii = cfg.list("radii", &[0.02, 0.01, 0.005])?;
    let seq: Vec<_> = (0..8).map(|k| ellipse(1.0, 1.0 - 0.4 / 2f64.powi(k), n)).collect::<Result<_, _>>()?;
    let lsc = lsc_check(&seq, &circle(1.0, n), s)?;
    let mut w = writer(rec, "lsc.csv")?;
    w.write_record(["member", "n", "delta", "energy"])?;
    for (k, e) in lsc.energies.iter().enumerate() {
        w.serialize((k, n, seq[k].spacing, e))?;
    }
    w.flush()?;
    rec.check(Check::new(
        "lower semicontinuity",
        lsc.holds,
        format!("limit {:.5} vs liminf {:.5}", lsc.w_limit, lsc.liminf_proxy),
    ));

    let fillets: Vec<_> = (0..6).map(|k| rounded_square(1.0, 0.02 / 2f64.powi(k), m)).collect::<Result<_, _>>()?;
    let smooth: Vec<_> = (0..6).map(|k| ellipse(1.0, 1.0 - 0.4 / 2f64.powi(k), m)).collect::<Result<_, _>>()?;
    let sharp = concentration_scan(&fillets, s, eps, &radii)?;
    let calm = concentration_scan(&smooth, s, eps, &radii)?;
    let mut w = writer(rec, "concentration.csv")?;
    w.write_record(["family", "n", "position", "min_local_energy"])?;
    for (name, r) in [("fillets", &sharp), ("ellipses", &calm)] {
        for p in &r.points {
            w.serialize((name, m, p.position, fmin(p.local_energies.iter().copied())))?;
        }
    }
    w.flush()?;
    rec.check(Check::new(
        "concentration on sharpening fillets",
        sharp.points.len() == 4 && sharp.within_bound,
        format!("{} points, bound {}", sharp.points.len(), sharp.bound),
    ));
    rec.check(Check::new("no concentration on ellipses", calm.points.is_empty(), format!("{} points", calm.points.len())));
    Ok(())
}

/// Directory for a suite run when none is given.
pub fn default_dir(suite: Suite) -> std::path::PathBuf {
    let name = suite.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    Path::new("runs").join(name)
}
