use dwell_core::grid_ops::{build_grid, Grid, GridFunction};
use dwell_core::potential::{
    assemble_double_well, eval_single_well, reflect, DoubleWellConfig, PotentialSpec, Shape,
};
use dwell_core::Error;

fn square() -> PotentialSpec {
    PotentialSpec::new(Shape::SquareWell, 1.0, 4.0).unwrap()
}

fn bump() -> PotentialSpec {
    PotentialSpec::new(Shape::SmoothBump, 1.0, 4.0).unwrap()
}

#[test]
fn square_well_values() {
    assert_eq!(eval_single_well(&square(), &[0.5]), -1.0);
    assert_eq!(eval_single_well(&square(), &[0.3, 0.4]), -1.0);
    assert_eq!(eval_single_well(&square(), &[2.0]), 0.0);
    assert_eq!(eval_single_well(&square(), &[1.0]), -1.0);
    assert_eq!(eval_single_well(&square(), &[0.0, 1.0 + 1e-6]), 0.0);
}

#[test]
fn compact_support_outside_ball() {
    for spec in [square(), bump()] {
        for k in 0..200 {
            let t = k as f64 * 0.031;
            let r = 1.0 + 1e-9 + 0.01 * k as f64;
            assert_eq!(eval_single_well(&spec, &[r * t.cos(), r * t.sin()]), 0.0);
        }
    }
}

#[test]
fn smooth_bump_is_flat_at_the_edge() {
    let spec = bump();
    assert_eq!(eval_single_well(&spec, &[1.0]), 0.0);
    let h = 1e-3;
    let slope = (eval_single_well(&spec, &[1.0]) - eval_single_well(&spec, &[1.0 - h])) / h;
    assert!(slope.abs() < 1e-12, "{slope}");
    assert!((eval_single_well(&spec, &[0.0]) + 1.0).abs() < 1e-15);
}

#[test]
fn smooth_bump_second_differences_converge() {
    let spec = bump();
    let v = |x: f64| eval_single_well(&spec, &[x]);
    let d2 = |x: f64, h: f64| (v(x + h) - 2.0 * v(x) + v(x - h)) / (h * h);
    for x in [0.2, 0.5, 0.8] {
        let (c, f) = (d2(x, 1e-2), d2(x, 5e-3));
        let finer = d2(x, 2.5e-3);
        // Richardson: successive differences shrink by about 4
        let q = (c - f).abs() / (f - finer).abs();
        assert!((q - 4.0).abs() < 0.3, "x={x} q={q}");
    }
}

#[test]
fn invalid_specs_rejected() {
    assert!(PotentialSpec::new(Shape::SquareWell, 0.0, 4.0).is_err());
    assert!(PotentialSpec::new(Shape::SquareWell, 1.0, -1.0).is_err());
    assert!(PotentialSpec::new(Shape::TabulatedRadial { samples: vec![-1.0] }, 1.0, 1.0).is_err());
}

#[test]
fn tabulated_radial_interpolates() {
    let spec = PotentialSpec::new(Shape::TabulatedRadial { samples: vec![-1.0, 0.0] }, 2.0, 1.0).unwrap();
    assert!((eval_single_well(&spec, &[1.0]) + 0.5).abs() < 1e-15);
    assert_eq!(eval_single_well(&spec, &[3.0]), 0.0);
}

#[test]
fn double_well_centers_and_midpoint() {
    let layout = build_grid(1, 6.0, 1.0, 1.5, 0.01).unwrap();
    let cfg = DoubleWellConfig { spec: square(), d: layout.d };
    let pot = assemble_double_well(&cfg, &layout.grid).unwrap();
    let at = |x: f64| pot.at_lattice(layout.grid.lattice_of(x).unwrap(), 0);
    assert_eq!(at(0.0), -4.0);
    assert_eq!(at(6.0), -4.0);
    assert_eq!(at(3.0), 0.0);
}

#[test]
fn double_well_copies_are_identical_in_2d() {
    let layout = build_grid(2, 6.0, 1.0, 1.2, 0.05).unwrap();
    let cfg = DoubleWellConfig { spec: square(), d: layout.d };
    let pot = assemble_double_well(&cfg, &layout.grid).unwrap();
    let steps = layout.d_steps;
    let (t0, t1) = layout.grid.lattice_range(1);
    for l in -25..=25 {
        for t in t0..=t1 {
            assert_eq!(pot.at_lattice(l, t), pot.at_lattice(l + steps, t));
        }
    }
}

#[test]
fn overlapping_wells_rejected() {
    let layout = build_grid(1, 6.0, 1.0, 1.5, 0.01).unwrap();
    let cfg = DoubleWellConfig { spec: square(), d: 2.0 };
    assert!(matches!(
        assemble_double_well(&cfg, &layout.grid),
        Err(Error::SeparationTooSmall { .. })
    ));
}

#[test]
fn reflection_moves_spike_and_is_an_involution() {
    let grid = Grid::new(1, 0.01, &[-500], &[1200]).unwrap();
    let mut f = GridFunction::zeros(grid.clone());
    let i0 = grid.index_of(0, 0).unwrap();
    f.values_mut()[i0] = 1.0;
    let u = reflect(&f, 3.0).unwrap();
    assert_eq!(u.at_lattice(600, 0), 1.0);
    assert_eq!(u.values().iter().sum::<f64>(), 1.0);

    let g = GridFunction::from_fn(grid.clone(), |x| (x[0] * 1.7).sin() + 0.1 * x[0]);
    let c = 1.5;
    let back = reflect(&reflect(&g, c).unwrap(), c).unwrap();
    // nodes whose mirror stays inside the grid come back bit-exact
    let (lo, hi) = grid.lattice_range(0);
    for l in lo..=hi {
        let m = 300 - l;
        if m >= lo && m <= hi {
            assert_eq!(back.at_lattice(l, 0), g.at_lattice(l, 0));
        }
    }
}

#[test]
fn even_function_is_fixed() {
    let grid = Grid::new(2, 0.1, &[-20, -10], &[81, 21]).unwrap();
    let c = 2.0;
    // built from lattice offsets so the samples are exactly even
    let f = GridFunction::from_fn(grid.clone(), |x| {
        let k = (x[0] / 0.1).round() - 20.0;
        (-(0.1 * k).powi(2) - x[1] * x[1]).exp()
    });
    let u = reflect(&f, c).unwrap();
    for l in 0..=40 {
        for t in -10..=10 {
            assert_eq!(u.at_lattice(l, t), f.at_lattice(l, t));
        }
    }
}
