mod common;

use dwell_core::eigensolve::{lowest_k, min_singular_on_complement, EigenPair, Parity};
use dwell_core::grid_ops::{assemble_hamiltonian, build_grid, Grid, GridFunction};
use dwell_core::hopping::rho_volume;
use dwell_core::pipeline::{double_well, solve_single_well, SingleWell};
use dwell_core::potential::{sample_single_well, PotentialSpec, Shape};
use dwell_core::splitting::SplittingResult;
use dwell_core::verify::{
    check_agmon, check_energy_estimate, check_lower_bound, check_parity, check_ratio_limit,
    fit_decay_rate, partition_commutator_norms, partition_sigma, partition_theta, SweepRecord,
};

const H: f64 = 0.005;

fn square() -> PotentialSpec {
    PotentialSpec::new(Shape::SquareWell, 1.0, 4.0).unwrap()
}

fn demo() -> SingleWell {
    solve_single_well(&square(), 1, H, &[1, 2], 10.0 + H, 1e-10).unwrap()
}

fn rho_sweep(single: &SingleWell, j: usize) -> Vec<(f64, f64)> {
    [6.0, 7.0, 8.0, 9.0, 10.0]
        .iter()
        .map(|&d| (d, rho_volume(single.level(j).unwrap(), &single.potential, d).unwrap()))
        .collect()
}

fn record(d: f64, ratio: f64) -> SweepRecord {
    let mut r = SweepRecord::new(1, d, d);
    r.splitting = Some(SplittingResult {
        j: 1,
        d,
        e_minus: -1.0,
        e_plus: -1.0,
        delta: 0.0,
        ratio,
        pairing_score: 1.0,
        lower_parity: Parity::Even,
        upper_parity: Parity::Odd,
    });
    r
}

#[test]
fn exact_exponential_fit() {
    let data: Vec<(f64, f64)> = (0..10).map(|i| {
        let x = 0.5 * i as f64;
        (x, 3.0 * (-2.0 * x).exp())
    }).collect();
    let fit = fit_decay_rate(&data).unwrap();
    assert!((fit.slope + 2.0).abs() < 1e-13);
    assert!((fit.intercept - 3f64.ln()).abs() < 1e-13);
    assert!((fit.r_squared - 1.0).abs() < 1e-14);
}

#[test]
fn hopping_decays_at_the_oracle_rate() {
    let single = demo();
    let kappa = (-common::square_well_levels(4.0, 1.0)[0]).sqrt();
    let fit = fit_decay_rate(&rho_sweep(&single, 1)).unwrap();
    assert!((fit.slope + kappa).abs() < 0.01 * kappa, "{} vs {kappa}", fit.rate());
}

#[test]
fn ratio_limit_on_synthetic_sweeps() {
    let smooth: Vec<SweepRecord> = (5..=10).map(|d| record(d as f64, 1.0 + 1.0 / (d * d) as f64)).collect();
    assert!(check_ratio_limit(&smooth, 0.05, 1e-9).pass);

    let jitter: Vec<SweepRecord> = (5..=10)
        .map(|d| record(d as f64, 1.0 + if d % 2 == 0 { 1e-12 } else { -1e-12 }))
        .collect();
    assert!(check_ratio_limit(&jitter, 0.05, 1e-9).pass);

    let growing: Vec<SweepRecord> = (5..=10).map(|d| record(d as f64, 1.0 + 1e-3 * d as f64)).collect();
    assert!(!check_ratio_limit(&growing, 0.05, 1e-9).pass);

    let far: Vec<SweepRecord> = (5..=10).map(|d| record(d as f64, 1.2)).collect();
    assert!(!check_ratio_limit(&far, 0.05, 1e-9).pass);
}

#[test]
fn lower_bound_on_square_well_levels() {
    let single = demo();
    let oracle = common::square_well_levels(4.0, 1.0);
    for j in [1, 2] {
        let e = single.level(j).unwrap().energy;
        let o = check_lower_bound(&rho_sweep(&single, j), e, 0.05 * e.abs(), 0.01);
        assert!(o.pass, "{}", o.detail);
        let rate = fit_decay_rate(&rho_sweep(&single, j)).unwrap().rate();
        let kappa = (-oracle[j - 1]).sqrt();
        assert!((rate - kappa).abs() < 0.02 * kappa, "j={j}: {rate} vs {kappa}");
    }
}

#[test]
fn too_fast_decay_violates_the_lower_bound() {
    let kappa = 1.5;
    let samples: Vec<(f64, f64)> = (6..=10).map(|d| (d as f64, (-2.0 * kappa * d as f64).exp())).collect();
    assert!(!check_lower_bound(&samples, -kappa * kappa, 0.05 * kappa * kappa, 0.01).pass);
}

fn synthetic(grid: Grid, kappa: f64, a: f64) -> EigenPair {
    let nu = grid.nu();
    EigenPair {
        energy: -kappa * kappa,
        vector: GridFunction::from_fn(grid, |x| {
            let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
            let pre = if nu == 2 && r > a { (r - a).powf(-0.5) } else { 1.0 };
            pre * (-kappa * r).exp()
        }),
        residual: 0.0,
        parity: Parity::Even,
        bound: true,
    }
}

#[test]
fn agmon_on_constructed_and_computed_states() {
    let kappa = 1.2;
    let p1 = synthetic(Grid::new(1, 0.01, &[-1200], &[2401]).unwrap(), kappa, 1.0);
    let (pass, fit) = check_agmon(&p1, 1.0).unwrap();
    assert!(pass && (fit.rate() - kappa).abs() < 1e-10);
    let p2 = synthetic(Grid::new(2, 0.05, &[-240, -240], &[481, 481]).unwrap(), kappa, 1.0);
    let (pass, fit) = check_agmon(&p2, 1.0).unwrap();
    assert!(pass && (fit.rate() - kappa).abs() < 1e-10);

    let single = demo();
    let kappa1 = (-common::square_well_levels(4.0, 1.0)[0]).sqrt();
    let (pass, fit) = check_agmon(single.level(1).unwrap(), 1.0).unwrap();
    assert!(pass && (fit.rate() - kappa1).abs() < 0.02 * kappa1);
}

#[test]
fn agmon_needs_room() {
    let short = synthetic(Grid::new(1, 0.01, &[-300], &[601]).unwrap(), 1.2, 1.0);
    assert!(check_agmon(&short, 1.0).is_err());
}

#[test]
fn energy_estimate_approaches_the_gap() {
    let single = demo();
    let phi = single.level(1).unwrap();
    let gamma = single.gaps[0].gamma;
    let mut prev = 0.0;
    for d in [6.0, 10.0] {
        let dw = double_well(&single, 1, H, d).unwrap();
        let est = check_energy_estimate(&dw.hamiltonian, phi, dw.layout.d, gamma, 1.0).unwrap();
        assert!(est.pass, "{est:?}");
        assert!(est.sigma_min <= gamma + 1e-6);
        assert!(est.sigma_min > prev);
        prev = est.sigma_min;
    }
    assert!((prev - gamma).abs() < 0.01 * gamma, "{prev} vs {gamma}");
}

#[test]
fn deflating_the_exact_pair_leaves_the_next_level() {
    let single = demo();
    let phi = single.level(1).unwrap();
    let dw = double_well(&single, 1, H, 6.0).unwrap();
    let pair = lowest_k(&dw.hamiltonian, 2, 1e-11).unwrap();
    let basis: Vec<GridFunction> = pair.iter().map(|p| p.vector.clone()).collect();
    let sigma = min_singular_on_complement(&dw.hamiltonian.shifted(-phi.energy), &basis).unwrap();
    let diag = dw.hamiltonian.diagonal();
    let expected = (2..6)
        .map(|k| (common::tridiagonal_eigenvalue(&diag, -1.0 / (H * H), k) - phi.energy).abs())
        .fold(f64::INFINITY, f64::min);
    assert!((sigma - expected).abs() < 1e-6 * expected, "{sigma} vs {expected}");
}

#[test]
fn partition_properties() {
    let a = 1.0;
    let g = |d: f64| {
        let l = build_grid(1, d, a, 1.5, 0.01).unwrap();
        (l.d, partition_commutator_norms(l.d, &l.grid).0)
    };
    let (_, g6) = g(6.0);
    let (_, g12) = g(12.0);
    assert!((g6 / g12 - 2.0).abs() <= 0.2, "{g6} {g12}");

    for nu in [1, 2] {
        let l = build_grid(nu, 6.0, a, 1.5, 0.05).unwrap();
        let theta = partition_theta(l.d, &l.grid);
        let sigma = partition_sigma(l.d, &l.grid);
        for center in [0.0, l.d] {
            let v = sample_single_well(&square(), &l.grid, center);
            for ((t, s), v) in theta.values().iter().zip(sigma.values()).zip(v.values()) {
                assert_eq!(t * v, *v);
                assert_eq!(s * v, 0.0);
            }
        }
    }
}

#[test]
fn parity_labels() {
    let single = demo();
    let even = check_parity(single.level(1).unwrap(), 0.0, 1e-10).unwrap();
    assert_eq!(even.label, Parity::Even);
    assert!(even.pass && even.defect <= 1e-9);
    let odd = check_parity(single.level(2).unwrap(), 0.0, 1e-10).unwrap();
    assert_eq!(odd.label, Parity::Odd);
    assert!(odd.pass);

    let grid = Grid::new(1, 0.01, &[-1000], &[2001]).unwrap();
    let pot = sample_single_well(&square(), &grid, 0.3);
    let ham = assemble_hamiltonian(&grid, &pot).unwrap();
    let off = lowest_k(&ham, 1, 1e-10).unwrap().remove(0);
    let p = check_parity(&off, 0.0, 1e-10).unwrap();
    assert_eq!(p.label, Parity::None);
    assert!(p.defect > 0.1);
}
