//! Special functions and quadrature rules shared by the kernels.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use statrs::function::beta::beta_reg;
use statrs::function::gamma::gamma;

/// `∫₀^{π/2} cos^s ψ dψ`.
pub fn cos_power_half(s: f64) -> f64 {
    PI.sqrt() * gamma((1.0 + s) / 2.0) / (2.0 * gamma(1.0 + s / 2.0))
}

/// `G(φ) = ∫₀^φ cos^s ψ dψ` for `φ ∈ [−π/2, π/2]`, odd in φ.
///
/// With `x = sin²ψ` this is a regularized incomplete beta function.
pub fn cos_power_integral(phi: f64, s: f64) -> f64 {
    let a = phi.abs().min(FRAC_PI_2);
    if a == 0.0 {
        return 0.0;
    }
    let full = cos_power_half(s);
    let v = if a > 1.2 {
        // near π/2 go through the complementary tail to keep relative accuracy
        full - full * beta_reg((1.0 + s) / 2.0, 0.5, a.cos().powi(2))
    } else {
        full * beta_reg(0.5, (1.0 + s) / 2.0, a.sin().powi(2))
    };
    v.copysign(phi)
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(20))
}

/// Composite 20-point Gauss–Legendre on `panels` equal panels of `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gl20();
    let hw = (b - a) / panels as f64 / 2.0;
    let mut acc = 0.0;
    for k in 0..panels {
        let mid = a + (2 * k + 1) as f64 * hw;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(w) {
            s += wi * f(mid + hw * xi);
        }
        acc += s * hw;
    }
    acc
}

/// Composite Gauss–Legendre on a geometric grading of `[a, b]` toward `a`,
/// for integrands with an integrable endpoint singularity at `a`.
pub fn integrate_graded<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, levels: usize) -> f64 {
    let mut acc = 0.0;
    let mut hi = b;
    for _ in 0..levels {
        let lo = a + (hi - a) * 0.5;
        acc += integrate(&f, lo, hi, 1);
        hi = lo;
    }
    acc + integrate(&f, a, hi, 1)
}
