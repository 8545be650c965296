use dwell_core::eigensolve::lowest_k;
use dwell_core::grid_ops::{assemble_hamiltonian, Grid};
use dwell_core::pipeline::{hopping_at, solve_single_well};
use dwell_core::potential::{sample_single_well, PotentialSpec, Shape};

fn ground(spec: &PotentialSpec, h: f64) -> f64 {
    let m = (12.0 / h).round() as i64;
    let grid = Grid::new(1, h, &[-m + 1], &[(2 * m - 1) as usize]).unwrap();
    let pot = sample_single_well(spec, &grid, 0.0);
    lowest_k(&assemble_hamiltonian(&grid, &pot).unwrap(), 1, 1e-12).unwrap()[0].energy
}

#[test]
fn smooth_bump_energy_converges_at_second_order() {
    let spec = PotentialSpec::new(Shape::SmoothBump, 1.0, 8.0).unwrap();
    let e: Vec<f64> = [0.04, 0.02, 0.01].iter().map(|&h| ground(&spec, h)).collect();
    let q = (e[0] - e[1]) / (e[1] - e[2]);
    assert!((q - 4.0).abs() < 0.3, "{e:?} ratio {q}");
}

#[test]
fn square_well_energy_converges_at_first_order() {
    let spec = PotentialSpec::new(Shape::SquareWell, 1.0, 4.0).unwrap();
    let e: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&h| ground(&spec, h)).collect();
    let q = (e[0] - e[1]) / (e[1] - e[2]);
    // jumps of the node count inside the well make the ratio ragged
    assert!(q > 1.2 && q < 3.5, "{e:?} ratio {q}");
}

#[test]
fn formula_deviation_shrinks_at_second_order() {
    let spec = PotentialSpec::new(Shape::SmoothBump, 1.0, 8.0).unwrap();
    let dev = |h: f64| {
        let single = solve_single_well(&spec, 1, h, &[1], 8.0 + h, 1e-11).unwrap();
        hopping_at(&single, 1, 8.0).unwrap().max_relative_deviation()
    };
    let (a, b) = (dev(0.01), dev(0.005));
    assert!(a / b >= 3.5, "{a} {b}");
}
