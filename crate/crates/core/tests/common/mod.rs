//! Independent reference values used by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "no bracket on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bound-state energies of `−u'' − λ² 1_{|x|≤a} u = e u` on the whole line,
/// sorted ascending. Solves `θ tan θ = √(R² − θ²)` (even) and
/// `−θ cot θ = √(R² − θ²)` (odd) with `θ = ka`, `R = λa`.
pub fn square_well_levels(lambda_sq: f64, a: f64) -> Vec<f64> {
    let r = lambda_sq.sqrt() * a;
    let outside = |t: f64| (r * r - t * t).max(0.0).sqrt();
    let mut out = Vec::new();
    let mut n = 0;
    loop {
        let start = n as f64 * PI / 2.0;
        if start >= r {
            break;
        }
        let even = n % 2 == 0;
        let g = |t: f64| {
            if even {
                t * t.tan() - outside(t)
            } else {
                -t / t.tan() - outside(t)
            }
        };
        let eps = 1e-12;
        let hi = (start + PI / 2.0 - eps).min(r);
        let lo = start + eps;
        if g(lo) < 0.0 && g(hi) >= 0.0 {
            let theta = bisect(lo, hi, g);
            out.push(-(r * r - theta * theta) / (a * a));
        }
        n += 1;
    }
    out.sort_by(f64::total_cmp);
    out
}

pub fn bessel_j(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(n as i32) / (1..=n).map(f64::from).product::<f64>();
    let mut sum = term;
    for m in 1..200 {
        term *= -half * half / (m as f64 * (m + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// `K_n(x) = ∫₀^∞ exp(−x cosh t) cosh(nt) dt` by the trapezoid rule.
pub fn bessel_k(n: u32, x: f64) -> f64 {
    let t_max = (800.0 / x).acosh().max(1.0);
    let steps = 20_000;
    let dt = t_max / steps as f64;
    let f = |t: f64| (-x * t.cosh()).exp() * (n as f64 * t).cosh();
    let inner: f64 = (1..steps).map(|i| f(i as f64 * dt)).sum();
    dt * (0.5 * f(0.0) + inner + 0.5 * f(t_max))
}

/// Ground-state energy of `−Δ − λ² 1_{|x|≤a}` in the plane: matches the
/// logarithmic derivatives of `J₀(kr)` inside and `K₀(κr)` outside.
pub fn disk_ground_energy(lambda_sq: f64, a: f64) -> f64 {
    let r = lambda_sq.sqrt() * a;
    let j01 = 2.404_825_557_695_773;
    let g = |t: f64| {
        let s = (r * r - t * t).sqrt();
        t * bessel_j(1, t) / bessel_j(0, t) - s * bessel_k(1, s) / bessel_k(0, s)
    };
    let hi = r.min(j01) - 1e-9;
    let theta = bisect(1e-9, hi, g);
    -(r * r - theta * theta) / (a * a)
}

/// Number of eigenvalues below `mu` of the symmetric tridiagonal matrix with
/// the given diagonal and constant off-diagonal, by Sturm sequence.
pub fn sturm_count(diag: &[f64], off: f64, mu: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &di) in diag.iter().enumerate() {
        q = if i == 0 { di - mu } else { di - mu - off * off / q };
        if q == 0.0 {
            q = -1e-300;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// `k`-th (0-based) eigenvalue of a symmetric tridiagonal matrix by bisection.
pub fn tridiagonal_eigenvalue(diag: &[f64], off: f64, k: usize) -> f64 {
    let lo = diag.iter().copied().fold(f64::INFINITY, f64::min) - 2.0 * off.abs();
    let hi = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 2.0 * off.abs();
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenvalues of the Dirichlet `−Δ_h` on `n` interior nodes of spacing `h`.
pub fn laplacian_spectrum_1d(n: usize, h: f64) -> Vec<f64> {
    let ell = (n + 1) as f64 * h;
    (1..=n)
        .map(|k| 2.0 / (h * h) * (1.0 - (PI * k as f64 * h / ell).cos()))
        .collect()
}
