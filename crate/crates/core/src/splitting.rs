//! Double-well splittings, the two-level reduction and its correction terms.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::eigensolve::{
    classify_parities, count_below, lowest_k, parity_defect, sym_eigen, EigenPair, Parity,
};
use crate::error::{Error, Result};
use crate::grid_ops::{dot, Grid, GridFunction, SparseOperator};
use crate::hopping::steps_of;
use crate::potential::reflect;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplittingResult {
    pub j: usize,
    pub d: f64,
    pub e_minus: f64,
    pub e_plus: f64,
    pub delta: f64,
    /// `Δ / (2|ρ|)` for the `ρ` supplied by the caller.
    pub ratio: f64,
    /// Smallest principal-angle cosine between the split pair and `span{φ, R^dφ}`.
    pub pairing_score: f64,
    pub lower_parity: Parity,
    pub upper_parity: Parity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoLevelModel {
    /// `M[n][m] = ⟨R^nφ, (H − e)R^mφ⟩`, `n, m ∈ {0, d}`.
    pub m: [[f64; 2]; 2],
    /// `s = ⟨φ, R^dφ⟩`.
    pub s: f64,
    pub predicted_split: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corrections {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

/// `φ` and `R^dφ` sampled on the double-well grid.
pub(crate) fn pair_on(phi: &EigenPair, grid: &Grid, d: f64) -> Result<(GridFunction, GridFunction)> {
    let steps = steps_of(grid, d)?;
    Ok((
        phi.vector.translated_onto(grid, 0)?,
        phi.vector.translated_onto(grid, steps)?,
    ))
}

/// Solves `h_dw` for enough levels to cover the window `e_j ± γ_j/2` and
/// pairs the two levels inside it.
pub fn double_well_levels(
    h_dw: &SparseOperator,
    phi_j: &EigenPair,
    j: usize,
    gamma_j: f64,
    d: f64,
    rho: f64,
    tol: f64,
) -> Result<SplittingResult> {
    let top = phi_j.energy + 0.5 * gamma_j;
    let k = count_below(h_dw, top).unwrap_or(2 * j).max(1);
    let mut spectrum = lowest_k(h_dw, k, tol)?;
    classify_parities(h_dw, &mut spectrum, 0.5 * d, 1e-12, 1e-6)?;
    levels_from_spectrum(h_dw, &spectrum, phi_j, j, gamma_j, d, rho)
}

/// Like [`double_well_levels`] for an already computed double-well spectrum.
pub fn levels_from_spectrum(
    h_dw: &SparseOperator,
    spectrum: &[EigenPair],
    phi_j: &EigenPair,
    j: usize,
    gamma_j: f64,
    d: f64,
    rho: f64,
) -> Result<SplittingResult> {
    let (lo, hi) = (phi_j.energy - 0.5 * gamma_j, phi_j.energy + 0.5 * gamma_j);
    let inside: Vec<&EigenPair> = spectrum
        .iter()
        .filter(|p| p.energy > lo && p.energy < hi)
        .collect();
    if inside.len() != 2 {
        return Err(Error::WrongClusterSize(inside.len()));
    }
    let (minus, plus) = (inside[0], inside[1]);
    let grid = minus.vector.grid();
    let (phi, psi) = pair_on(phi_j, grid, d)?;
    let score = pairing_score(&[&phi, &psi], &[&minus.vector, &plus.vector]);
    let c = 0.5 * d;
    let split = if phi_j.parity == Parity::None {
        None
    } else {
        parity_split(h_dw, &minus.vector, &plus.vector, c)?
    };
    let split = match split {
        Some(s) => s,
        None => {
            let (lo_e, hi_e) = resolved_pair(h_dw, &minus.vector, &plus.vector)?;
            let delta = flux_split(&minus.vector, &plus.vector, c).unwrap_or(hi_e - lo_e);
            PairSplit {
                mean: 0.5 * (lo_e + hi_e),
                delta,
                lower: parity_defect(&minus.vector, c, 1e-6)?.0,
                upper: parity_defect(&plus.vector, c, 1e-6)?.0,
            }
        }
    };
    let (e_minus, e_plus) = (split.mean - 0.5 * split.delta, split.mean + 0.5 * split.delta);
    let (delta, lower_parity, upper_parity) = (split.delta, split.lower, split.upper);
    Ok(SplittingResult {
        j,
        d,
        e_minus,
        e_plus,
        delta,
        ratio: delta / (2.0 * rho.abs()),
        pairing_score: score,
        lower_parity,
        upper_parity,
    })
}

struct PairSplit {
    mean: f64,
    delta: f64,
    lower: Parity,
    upper: Parity,
}

// Rotates the pair to the eigenbasis of the reflection about x₁ = c, projects
// each vector onto its exact parity and reads the splitting off the flux
// identity. Near-degenerate pairs come out of the eigensolver arbitrarily
// mixed; the reflection separates them regardless of how small Δ is.
fn parity_split(
    h: &SparseOperator,
    v0: &GridFunction,
    v1: &GridFunction,
    c: f64,
) -> Result<Option<PairSplit>> {
    let (u0, u1) = (reflect(v0, c)?, reflect(v1, c)?);
    let off = 0.5 * (v0.inner(&u1)? + v1.inner(&u0)?);
    let m = DMatrix::from_row_slice(2, 2, &[v0.inner(&u0)?, off, off, v1.inner(&u1)?]);
    let (vals, vecs) = sym_eigen(&m);
    let (l0, l1) = (vals[0], vals[1]);
    if l0.abs() < 0.9 || l1.abs() < 0.9 || l0.signum() == l1.signum() {
        return Ok(None);
    }
    let mut parts = Vec::with_capacity(2);
    for k in 0..2 {
        let (a, b) = (vecs[(0, k)], vecs[(1, k)]);
        let w = GridFunction::new(
            v0.grid().clone(),
            v0.values().iter().zip(v1.values()).map(|(x, y)| a * x + b * y).collect(),
        )?;
        let sign = vals[k].signum();
        let p = parity_part(&w, c, sign)?;
        let p = p.clone().scaled(p.norm().recip());
        let energy = p.inner(&h.apply_to(&p)?)?;
        let parity = if sign > 0.0 { Parity::Even } else { Parity::Odd };
        parts.push((energy, p, parity));
    }
    parts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let (lo, hi) = (&parts[0], &parts[1]);
    let delta = flux_split(&lo.1, &hi.1, c).unwrap_or(hi.0 - lo.0);
    Ok(Some(PairSplit {
        mean: 0.5 * (lo.0 + hi.0),
        delta,
        lower: lo.2,
        upper: hi.2,
    }))
}

// Splitting from the 2×2 Rayleigh quotient in the basis (v₋ ± v₊)/√2 of
// states localized in one well each. Its off-diagonal element carries the
// splitting directly instead of as a difference of two nearly equal energies.
fn resolved_pair(h: &SparseOperator, lower: &GridFunction, upper: &GridFunction) -> Result<(f64, f64)> {
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let combine = |sign: f64| -> Result<GridFunction> {
        GridFunction::new(
            lower.grid().clone(),
            lower
                .values()
                .iter()
                .zip(upper.values())
                .map(|(a, b)| r2 * (a + sign * b))
                .collect(),
        )
    };
    let (left, right) = (combine(1.0)?, combine(-1.0)?);
    let (hl, hr) = (h.apply_to(&left)?, h.apply_to(&right)?);
    let kll = left.inner(&hl)?;
    let krr = right.inner(&hr)?;
    let klr = 0.5 * (left.inner(&hr)? + right.inner(&hl)?);
    let mean = 0.5 * (kll + krr);
    let half = 0.5 * ((kll - krr).powi(2) + 4.0 * klr * klr).sqrt();
    Ok((mean - half, mean + half))
}

/// `(f + sUf)/2` for the reflection `U` about `x₁ = c`.
fn parity_part(f: &GridFunction, c: f64, sign: f64) -> Result<GridFunction> {
    let u = reflect(f, c)?;
    GridFunction::new(
        f.grid().clone(),
        f.values()
            .iter()
            .zip(u.values())
            .map(|(a, b)| 0.5 * (a + sign * b))
            .collect(),
    )
}

// Discrete Green identity on the half space x₁ < c: for eigenvectors f, g
// with energies E_f, E_g the potential terms cancel and
//   (E_g − E_f) Σ_{x₁<c} f g h^ν = h^{ν−2} Σ⊥ [g(c−h) f(c) − f(c−h) g(c)].
// Only values next to the plane enter, so no large terms cancel.
fn flux_split(f: &GridFunction, g: &GridFunction, c: f64) -> Option<f64> {
    let grid = f.grid();
    let lc = grid.lattice_of(c)?;
    let (first, _) = grid.lattice_range(0);
    let (t0, t1) = grid.lattice_range(1);
    let h = grid.h();
    let mut overlap = 0.0;
    for l in first..lc {
        for t in t0..=t1 {
            overlap += f.at_lattice(l, t) * g.at_lattice(l, t);
        }
    }
    overlap *= grid.cell_volume();
    if overlap.abs() < 0.1 {
        return None;
    }
    let flux: f64 = (t0..=t1)
        .map(|t| {
            g.at_lattice(lc - 1, t) * f.at_lattice(lc, t) - f.at_lattice(lc - 1, t) * g.at_lattice(lc, t)
        })
        .sum();
    let scale = h.powi(grid.nu() as i32 - 2);
    Some(scale * flux / overlap)
}

/// Smallest cosine of the principal angles between two 2-dimensional spans.
fn pairing_score(a: &[&GridFunction; 2], b: &[&GridFunction; 2]) -> f64 {
    let ortho = |v: &[&GridFunction; 2]| -> [Vec<f64>; 2] {
        let mut x = v[0].values().to_vec();
        let nx = dot(&x, &x).sqrt();
        x.iter_mut().for_each(|t| *t /= nx);
        let mut y = v[1].values().to_vec();
        for _ in 0..2 {
            let c = dot(&x, &y);
            y.iter_mut().zip(&x).for_each(|(t, s)| *t -= c * s);
        }
        let ny = dot(&y, &y).sqrt();
        y.iter_mut().for_each(|t| *t /= ny);
        [x, y]
    };
    let (qa, qb) = (ortho(a), ortho(b));
    let m = DMatrix::from_fn(2, 2, |i, k| dot(&qa[i], &qb[k]));
    let mtm = m.transpose() * m;
    let (ev, _) = sym_eigen(&mtm);
    ev[0].max(0.0).sqrt().min(1.0)
}

/// The 2×2 reduction of `H − e_j` onto `span{φ, R^dφ}`.
pub fn two_level_matrix(
    phi_j: &EigenPair,
    h_dw: &SparseOperator,
    d: f64,
    e_j: f64,
) -> Result<TwoLevelModel> {
    let grid = h_dw.grid();
    let (phi, psi) = pair_on(phi_j, grid, d)?;
    let shifted = h_dw.shifted(-e_j);
    let hphi = shifted.apply_to(&phi)?;
    let hpsi = shifted.apply_to(&psi)?;
    let m = [
        [phi.inner(&hphi)?, phi.inner(&hpsi)?],
        [psi.inner(&hphi)?, psi.inner(&hpsi)?],
    ];
    let s = phi.inner(&psi)?;
    if s.abs() > 0.99 {
        return Err(Error::OverlapTooLarge(s));
    }
    let off = 0.5 * (m[0][1] + m[1][0]);
    // det(M − ΩS) = 0 with S = [[1, s], [s, 1]]
    let qa = 1.0 - s * s;
    let qb = m[0][0] + m[1][1] - 2.0 * off * s;
    let qc = m[0][0] * m[1][1] - off * off;
    let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
    Ok(TwoLevelModel {
        m,
        s,
        predicted_split: disc.sqrt() / qa,
    })
}

/// Correction ratios `r₁ = |λ²⟨φ, (R^dv)φ⟩|/|ρ|`, `r₂ = |s|` and
/// `r₃ = |⟨R̃, (H − e)R̃⟩|/|ρ|` with `R̃ = (R^dφ − sφ)/√(1 − s²)`.
pub fn corrections_report(
    model: &TwoLevelModel,
    phi_j: &EigenPair,
    pot_single: &GridFunction,
    d: f64,
    rho: f64,
) -> Result<Corrections> {
    // ⟨φ, (R^dv)φ⟩ = Σ_y λ²v(y) φ(y + d)²
    let f = &phi_j.vector;
    if f.grid() != pot_single.grid() {
        return Err(Error::GridMismatch);
    }
    let g = f.grid();
    let steps = steps_of(g, d)?;
    let (l1, _) = g.lattice_range(0);
    let (t0, _) = g.lattice_range(1);
    let n2 = g.slice_len();
    let diag = g.cell_volume()
        * pot_single
            .values()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| {
                let shifted = f.at_lattice(l1 + (i / n2) as i64 + steps, t0 + (i % n2) as i64);
                v * shifted * shifted
            })
            .sum::<f64>();
    let m = &model.m;
    let s = model.s;
    let off = 0.5 * (m[0][1] + m[1][0]);
    let q = (m[1][1] - 2.0 * s * off + s * s * m[0][0]) / (1.0 - s * s);
    Ok(Corrections {
        r1: diag.abs() / rho.abs(),
        r2: s.abs(),
        r3: q.abs() / rho.abs(),
    })
}
