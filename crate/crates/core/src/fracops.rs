//! One-dimensional fractional operators: Gagliardo seminorms with inner
//! `L²`, the spectral fractional Laplacian on the circle, Stein ratios and
//! the tangent-subtracted potential operator.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::curvature::check_s;
use crate::error::{FracError, Result};

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Domain {
    /// Period `2π`, samples at `2πj/M`.
    Circle,
    /// Samples at cell midpoints `a + (j + ½)h`.
    Interval { a: f64, b: f64 },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GridFunction {
    pub samples: Vec<f64>,
    pub domain: Domain,
}

impl GridFunction {
    pub fn circle(samples: Vec<f64>) -> Result<GridFunction> {
        GridFunction::new(samples, Domain::Circle)
    }

    pub fn interval(samples: Vec<f64>, a: f64, b: f64) -> Result<GridFunction> {
        GridFunction::new(samples, Domain::Interval { a, b })
    }

    pub fn new(samples: Vec<f64>, domain: Domain) -> Result<GridFunction> {
        if samples.len() < 32 {
            return Err(FracError::Parameter(format!("need >= 32 samples, got {}", samples.len())));
        }
        if let Domain::Interval { a, b } = domain {
            if !(b > a) {
                return Err(FracError::Parameter("interval needs a < b".into()));
            }
        }
        Ok(GridFunction { samples, domain })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(f: F, m: usize, domain: Domain) -> Result<GridFunction> {
        let tmp = GridFunction { samples: vec![0.0; m], domain };
        GridFunction::new((0..m).map(|j| f(tmp.x(j))).collect(), domain)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn h(&self) -> f64 {
        match self.domain {
            Domain::Circle => TAU / self.len() as f64,
            Domain::Interval { a, b } => (b - a) / self.len() as f64,
        }
    }

    pub fn x(&self, j: usize) -> f64 {
        match self.domain {
            Domain::Circle => self.h() * j as f64,
            Domain::Interval { a, .. } => a + (j as f64 + 0.5) * self.h(),
        }
    }

    /// First derivative: spectral on the circle, differences on intervals.
    pub fn derivative(&self) -> Vec<f64> {
        match self.domain {
            Domain::Circle => fourier_multiplier(&self.samples, |k| Complex::new(0.0, k), true),
            Domain::Interval { .. } => {
                let m = self.len();
                let h = self.h();
                let f = &self.samples;
                (0..m)
                    .map(|j| {
                        if j == 0 {
                            (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
                        } else if j == m - 1 {
                            (3.0 * f[m - 1] - 4.0 * f[m - 2] + f[m - 3]) / (2.0 * h)
                        } else {
                            (f[j + 1] - f[j - 1]) / (2.0 * h)
                        }
                    })
                    .collect()
            }
        }
    }

    /// `(Σ |f_j|^p h)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        (self.samples.iter().map(|v| v.abs().powf(p)).sum::<f64>() * self.h()).powf(1.0 / p)
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    /// Twice as many samples: spectral interpolation on the circle,
    /// linear interpolation on intervals.
    pub fn refined(&self) -> GridFunction {
        let m = self.len();
        match self.domain {
            Domain::Circle => {
                let mut buf: Vec<Complex<f64>> =
                    self.samples.iter().map(|v| Complex::new(*v, 0.0)).collect();
                let mut planner = FftPlanner::new();
                planner.plan_fft_forward(m).process(&mut buf);
                let mut big = vec![Complex::new(0.0, 0.0); 2 * m];
                for k in 0..m {
                    let c = buf[k] * 2.0;
                    if 2 * k < m {
                        big[k] = c;
                    } else if 2 * k > m {
                        big[k + m] = c;
                    } else {
                        big[k] = c * 0.5;
                        big[k + m] = c * 0.5;
                    }
                }
                planner.plan_fft_inverse(2 * m).process(&mut big);
                let samples = big.iter().map(|c| c.re / (2 * m) as f64).collect();
                GridFunction { samples, domain: self.domain }
            }
            Domain::Interval { .. } => {
                let f = &self.samples;
                let samples = (0..2 * m)
                    .map(|q| {
                        // fine midpoint q sits at coarse index (q − ½)/2
                        let t = (q as f64 - 0.5) / 2.0;
                        let j = (t.floor().max(0.0) as usize).min(m - 2);
                        let w = t - j as f64;
                        f[j] * (1.0 - w) + f[j + 1] * w
                    })
                    .collect();
                GridFunction { samples, domain: self.domain }
            }
        }
    }
}

/// Apply a Fourier multiplier `μ(k)` (integer wavenumbers) to periodic samples.
fn fourier_multiplier<F: Fn(f64) -> Complex<f64>>(f: &[f64], mu: F, drop_nyquist: bool) -> Vec<f64> {
    let m = f.len();
    let mut buf: Vec<Complex<f64>> = f.iter().map(|v| Complex::new(*v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let kk = if 2 * k < m { k as f64 } else { k as f64 - m as f64 };
        if 2 * k == m && drop_nyquist {
            *c = Complex::new(0.0, 0.0);
        } else if 2 * k == m {
            *c *= mu(kk.abs());
        } else {
            *c *= mu(kk);
        }
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    buf.iter().map(|c| c.re / m as f64).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SeminormResult {
    pub value: f64,
    pub order: f64,
    pub p: f64,
    pub domain: Domain,
    /// Relative change under one grid refinement, when computed.
    pub refinement_change: Option<f64>,
    /// Refinement moved the value by more than 1%.
    pub unresolved: bool,
}

/// Raw double sum for `[f]_{W^{t,p}_2}`.
fn gagliardo_value(f: &GridFunction, t: f64, p: f64) -> f64 {
    let m = f.len();
    let h = f.h();
    let df = f.derivative();
    let periodic = matches!(f.domain, Domain::Circle);
    let expo = -(1.0 + 2.0 * t) / 2.0;
    let v = &f.samples;
    // own cell |x − y| < h/2 from the local expansion |f′|²|η|^{1−2t}
    let own = 2.0 * (h / 2.0).powf(2.0 - 2.0 * t) / (2.0 - 2.0 * t);
    let outer: f64 = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..m {
                if j == i {
                    continue;
                }
                let mut d = (i as f64 - j as f64).abs();
                if periodic && 2.0 * d > m as f64 {
                    d = m as f64 - d;
                }
                let d = d * h;
                let diff = v[i] - v[j];
                acc += diff * diff * (d * d).powf(expo);
            }
            let inner = acc * h + df[i] * df[i] * own;
            inner.powf(p / 2.0)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum::<f64>()
        * h;
    outer.powf(1.0 / p)
}

/// `(∫ (∫ |f(x) − f(y)|²/|x − y|^{1+2t} dy)^{p/2} dx)^{1/p}`; on the circle
/// `|x − y|` is the periodic distance.
pub fn gagliardo_seminorm(f: &GridFunction, t: f64, p: f64) -> Result<SeminormResult> {
    if !(t > 0.0 && t < 1.0) || !(p >= 1.0) {
        return Err(FracError::Parameter(format!("need t in (0,1), p >= 1; got t={t}, p={p}")));
    }
    let value = gagliardo_value(f, t, p);
    let (refinement_change, unresolved) = if t >= 0.5 && value > 0.0 {
        let fine = gagliardo_value(&f.refined(), t, p);
        let c = ((fine - value) / fine).abs();
        (Some(c), c > 0.01)
    } else {
        (None, false)
    };
    Ok(SeminormResult { value, order: t, p, domain: f.domain, refinement_change, unresolved })
}

/// Multiplier `|k|^σ` on the circle.
pub fn spectral_fractional_laplacian(f: &GridFunction, sigma: f64) -> Result<GridFunction> {
    if !matches!(f.domain, Domain::Circle) {
        return Err(FracError::UnsupportedDomain("spectral operator needs a circle".into()));
    }
    if !(sigma >= 0.0) {
        return Err(FracError::Parameter(format!("order {sigma} must be >= 0")));
    }
    let samples = fourier_multiplier(
        &f.samples,
        |k| {
            if k == 0.0 {
                Complex::new(0.0, 0.0)
            } else {
                Complex::new(k.abs().powf(sigma), 0.0)
            }
        },
        false,
    );
    Ok(GridFunction { samples, domain: f.domain })
}

/// `[f]_{W^{s,1/s}_2} / ‖|D|^s f‖_{L^{1/s}}`.
pub fn stein_ratio(f: &GridFunction, s: f64) -> Result<f64> {
    check_s(s)?;
    let p = 1.0 / s;
    let lap = spectral_fractional_laplacian(f, s)?;
    let den = lap.lp_norm(p);
    let scale = f.samples.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if den <= 1e-13 * scale.max(1e-300) || scale == 0.0 {
        return Err(FracError::Degenerate("constant function".into()));
    }
    Ok(gagliardo_value(f, s, p) / den)
}

/// Band halfwidth in cells for the potential operator.
const T_BAND: usize = 4;

/// `Tf(x) = ∫ (f(x) − f(y) − f′(y)(x − y))/|x − y|^{2+s} dy` at sample
/// indices `at`, with `f ≡ 0` outside the interval.
pub fn t_operator(f: &GridFunction, s: f64, at: &[usize]) -> Result<Vec<f64>> {
    check_s(s)?;
    let Domain::Interval { a, b } = f.domain else {
        return Err(FracError::UnsupportedDomain("t_operator acts on an interval".into()));
    };
    let m = f.len();
    let v = &f.samples;
    let scale = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let edge = T_BAND + 2;
    if (0..edge).chain(m - edge..m).any(|j| v[j].abs() > 1e-12 * scale.max(1e-300)) {
        return Err(FracError::Precondition("support touches the interval ends".into()));
    }
    let h = f.h();
    let df = f.derivative();
    let expo = -(2.0 + s) / 2.0;
    let delta = T_BAND as f64 * h;
    at.par_iter()
        .map(|&i| {
            if i >= m {
                return Err(FracError::Parameter(format!("index {i} out of range")));
            }
            let x = f.x(i);
            let mut acc = 0.0;
            for j in 0..m {
                let k = i.abs_diff(j);
                if k < T_BAND {
                    continue;
                }
                let w = if k == T_BAND { 0.5 } else { 1.0 };
                let d = x - f.x(j);
                acc += w * (v[i] - v[j] - df[j] * d) * (d * d).powf(expo);
            }
            acc *= h;
            // band: second difference for f″, symmetric expansion
            let f2 = if i == 0 || i == m - 1 { 0.0 } else { (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h) };
            acc += f2 * delta.powf(1.0 - s) / (1.0 - s);
            // outside the interval f and f′ vanish
            let (ea, eb) = (x - a, b - x);
            acc += v[i] * (ea.powf(-1.0 - s) + eb.powf(-1.0 - s)) / (1.0 + s);
            Ok(acc)
        })
        .collect()
}

/// `(−Δ)^{σ/2} f` on a zero-padded periodic extension of an interval
/// function (padding factor `pad`).
pub fn padded_fractional_laplacian(f: &GridFunction, sigma: f64, pad: usize) -> Result<Vec<f64>> {
    let Domain::Interval { a, b } = f.domain else {
        return Err(FracError::UnsupportedDomain("padding applies to intervals".into()));
    };
    let m = f.len();
    let big = m * pad;
    let mut ext = vec![0.0; big];
    ext[..m].copy_from_slice(&f.samples);
    let period = (b - a) * pad as f64;
    let w = TAU / period;
    let out = fourier_multiplier(&ext, |k| Complex::new((k.abs() * w).powf(sigma), 0.0), false);
    Ok(out[..m].to_vec())
}

/// Exact constant `C_s` with `Tf = C_s (−Δ)^{(1+s)/2} f`:
/// `C_s = −s ∫(1 − cos η)|η|^{−2−s} dη = 2s Γ(−1−s) cos(π(1+s)/2)`.
pub fn t_operator_constant(s: f64) -> f64 {
    2.0 * s * gamma(-1.0 - s) * (PI * (1.0 + s) / 2.0).cos()
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct PoincareSobolev {
    pub lhs_l1t: f64,
    pub lhs_l2: f64,
    pub rhs: f64,
    pub embed_ratio: Option<f64>,
}

/// Norms and seminorms entering the Poincaré and Sobolev inequalities on
/// an interval.
pub fn poincare_sobolev_check(f: &GridFunction, t: f64, s_target: Option<f64>) -> Result<PoincareSobolev> {
    if !matches!(f.domain, Domain::Interval { .. }) {
        return Err(FracError::UnsupportedDomain("interval function expected".into()));
    }
    let scale = f.samples.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if f.mean().abs() > 1e-10 * scale.max(1.0) {
        return Err(FracError::Precondition(format!("mean {} is not zero", f.mean())));
    }
    let rhs = gagliardo_seminorm(f, t, 1.0 / t)?.value;
    let embed_ratio = match s_target {
        Some(st) => {
            if !(st > 0.0 && st < t) {
                return Err(FracError::Parameter(format!("need 0 < s_target < t, got {st}")));
            }
            let num = gagliardo_seminorm(f, st, 1.0 / st)?.value;
            Some(if rhs == 0.0 { 0.0 } else { num / rhs })
        }
        None => None,
    };
    Ok(PoincareSobolev { lhs_l1t: f.lp_norm(1.0 / t), lhs_l2: f.lp_norm(2.0), rhs, embed_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_eigenfunction() {
        let f = GridFunction::from_fn(|x| (3.0 * x).cos(), 64, Domain::Circle).unwrap();
        let g = spectral_fractional_laplacian(&f, 0.5).unwrap();
        for (j, v) in g.samples.iter().enumerate() {
            assert!((v - 3f64.sqrt() * (3.0 * f.x(j)).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_has_zero_seminorm() {
        let f = GridFunction::circle(vec![3.0; 64]).unwrap();
        assert_eq!(gagliardo_seminorm(&f, 0.3, 2.0).unwrap().value, 0.0);
        assert!(matches!(stein_ratio(&f, 0.5), Err(FracError::Degenerate(_))));
    }

    #[test]
    fn t_constant_at_half() {
        assert!((t_operator_constant(0.5) + 1.6711).abs() < 1e-3);
    }

    #[test]
    fn interval_spectral_rejected() {
        let f = GridFunction::interval(vec![0.0; 32], -1.0, 1.0).unwrap();
        assert!(matches!(spectral_fractional_laplacian(&f, 0.5), Err(FracError::UnsupportedDomain(_))));
    }
}
