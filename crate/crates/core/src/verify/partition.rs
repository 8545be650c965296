//! Smooth partition of unity `Θ_d² + Σ_d² = 1` around the two wells.

use std::sync::OnceLock;

use crate::grid_ops::{Grid, GridFunction};

const TABLE_LEN: usize = 4096;

/// `exp(−1/(t(1−t)))` on `(0, 1)`, zero elsewhere.
fn bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (-1.0 / (t * (1.0 - t))).exp()
    }
}

/// Cumulative integral of [`bump`] on a uniform table, by 5-point Gauss–Legendre per cell.
fn table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        const X: [f64; 5] = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683,
            0.0,
            0.538_469_310_105_683,
            0.906_179_845_938_664,
        ];
        const W: [f64; 5] = [
            0.236_926_885_056_189,
            0.478_628_670_499_366,
            0.568_888_888_888_889,
            0.478_628_670_499_366,
            0.236_926_885_056_189,
        ];
        let dt = 1.0 / TABLE_LEN as f64;
        let mut acc = vec![0.0; TABLE_LEN + 1];
        for i in 0..TABLE_LEN {
            let mid = (i as f64 + 0.5) * dt;
            let cell: f64 = X.iter().zip(&W).map(|(x, w)| w * bump(mid + 0.5 * dt * x)).sum();
            acc[i + 1] = acc[i] + 0.5 * dt * cell;
        }
        acc
    })
}

/// Normalized smoothstep `S(t) = ∫₀ᵗ bump / ∫₀¹ bump`, `C^∞`, 0 for `t ≤ 0`, 1 for `t ≥ 1`.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let tab = table();
    let total = tab[TABLE_LEN];
    let dt = 1.0 / TABLE_LEN as f64;
    let i = ((t / dt) as usize).min(TABLE_LEN - 1);
    let (t0, t1) = (i as f64 * dt, (i + 1) as f64 * dt);
    let u = (t - t0) / dt;
    // cubic Hermite with the exact derivative at both ends
    let (h00, h10, h01, h11) = (
        2.0 * u.powi(3) - 3.0 * u * u + 1.0,
        u.powi(3) - 2.0 * u * u + u,
        -2.0 * u.powi(3) + 3.0 * u * u,
        u.powi(3) - u * u,
    );
    let v = h00 * tab[i] + h10 * dt * bump(t0) + h01 * tab[i + 1] + h11 * dt * bump(t1);
    // Hermite can dip a hair outside the bracketing table values where the integrand underflows
    v.clamp(tab[i], tab[i + 1]) / total
}

/// Largest slope of [`smoothstep`], attained at `t = 1/2`.
pub fn smoothstep_max_slope() -> f64 {
    bump(0.5) / table()[TABLE_LEN]
}

/// Radial ramp: 1 on `[0, d/3]`, 0 on `[d/2, ∞)`.
pub fn ramp(r: f64, d: f64) -> f64 {
    let (inner, outer) = (d / 3.0, d / 2.0);
    1.0 - smoothstep((r - inner) / (outer - inner))
}

/// `Θ_d(x) = f(‖x‖) + f(‖x − d e₁‖)`.
pub fn partition_theta(d: f64, grid: &Grid) -> GridFunction {
    GridFunction::from_fn(grid.clone(), |x| {
        let r0 = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        let mut y = [0.0; 2];
        y[..x.len()].copy_from_slice(x);
        y[0] -= d;
        let r1 = (y[0] * y[0] + y[1] * y[1]).sqrt();
        ramp(r0, d) + ramp(r1, d)
    })
}

/// `Σ_d = √(1 − Θ_d²)`.
pub fn partition_sigma(d: f64, grid: &Grid) -> GridFunction {
    let theta = partition_theta(d, grid);
    let vals = theta
        .values()
        .iter()
        .map(|t| (1.0 - t * t).max(0.0).sqrt())
        .collect();
    GridFunction::new(grid.clone(), vals).expect("same grid")
}

/// `(sup|∇_h Θ_d|, sup|Δ_h Θ_d|)` over the grid, with central differences
/// and zero values beyond the walls.
pub fn partition_commutator_norms(d: f64, grid: &Grid) -> (f64, f64) {
    let theta = partition_theta(d, grid);
    let h = grid.h();
    let (t0, t1) = grid.lattice_range(1);
    let (l0, l1) = grid.lattice_range(0);
    let mut grad: f64 = 0.0;
    let mut lap: f64 = 0.0;
    for a in l0..=l1 {
        for b in t0..=t1 {
            let c = theta.at_lattice(a, b);
            let (e, w) = (theta.at_lattice(a + 1, b), theta.at_lattice(a - 1, b));
            let mut g2 = ((e - w) / (2.0 * h)).powi(2);
            let mut l = (e - 2.0 * c + w) / (h * h);
            if grid.nu() == 2 {
                let (n, s) = (theta.at_lattice(a, b + 1), theta.at_lattice(a, b - 1));
                g2 += ((n - s) / (2.0 * h)).powi(2);
                l += (n - 2.0 * c + s) / (h * h);
            }
            grad = grad.max(g2.sqrt());
            lap = lap.max(l.abs());
        }
    }
    (grad, lap)
}
