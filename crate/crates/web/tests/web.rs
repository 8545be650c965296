#[path = "../../core/tests/common/mod.rs"]
mod common;

use dwell_web::{double_well, hopping_sweep, single_well, Curve, CURVE_POINTS};

const H: f64 = 0.01;

fn mirror_defect(c: &Curve, center: f64, sign: f64) -> f64 {
    let peak = c.y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    c.x.iter()
        .zip(&c.y)
        .filter_map(|(x, y)| {
            let k = c.x.iter().position(|u| (u - (2.0 * center - x)).abs() < 1e-9)?;
            Some((y - sign * c.y[k]).abs() / peak)
        })
        .fold(0.0, f64::max)
}

#[test]
fn single_well_levels_follow_the_oracle() {
    let view = single_well("square_well", 1.0, 4.0, H).unwrap();
    let oracle = common::square_well_levels(4.0, 1.0);
    assert_eq!(view.levels.len(), oracle.len());
    for (l, e) in view.levels.iter().zip(&oracle) {
        // node sampling of the square well converges at first order
        assert!((l.energy - e).abs() < 5.0 * H * e.abs(), "{} vs {e}", l.energy);
        assert!(l.state.x.len() <= CURVE_POINTS);
        assert_eq!(l.state.x.len(), l.state.y.len());
    }
    assert_eq!(view.levels[0].parity, "even");
    assert_eq!(view.levels[1].parity, "odd");
    assert_eq!(single_well("square_well", 1.0, 2.0, H).unwrap().levels.len(), 1);
}

#[test]
fn double_well_reports_matching_hoppings() {
    let v = double_well("square_well", 1.0, 4.0, H, 1, 6.0).unwrap();
    assert!(v.rho_volume < 0.0);
    let sym = v.rho_symmetric.unwrap();
    for r in [v.rho_surface, sym] {
        assert!((r - v.rho_volume).abs() < 1e-3 * v.rho_volume.abs());
    }
    assert!((v.ratio - 1.0).abs() < 1e-3);
    assert!((v.delta - (v.e_plus - v.e_minus)).abs() < 1e-12);
    assert!(mirror_defect(&v.lower, 0.5 * v.d, 1.0) < 1e-8);
    assert!(mirror_defect(&v.upper, 0.5 * v.d, -1.0) < 1e-8);
}

#[test]
fn sweep_decays_at_the_oracle_rate() {
    let kappa = (-common::square_well_levels(4.0, 1.0)[0]).sqrt();
    let pts = hopping_sweep("square_well", 1.0, 4.0, H, 1, 5.0, 9.0, 5).unwrap();
    assert_eq!(pts.len(), 5);
    for w in pts.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let rate = (a.abs_rho.unwrap() / b.abs_rho.unwrap()).ln() / (b.d - a.d);
        assert!((rate - kappa).abs() < 0.02 * kappa, "rate {rate} vs {kappa}");
        assert!((b.ratio.unwrap() - 1.0).abs() <= (a.ratio.unwrap() - 1.0).abs() + 1e-9);
    }
}

#[test]
fn bad_requests_are_errors() {
    assert!(single_well("triangle", 1.0, 4.0, H).is_err());
    assert!(double_well("square_well", 1.0, 4.0, H, 1, 1.5).is_err());
    assert!(double_well("square_well", 1.0, 2.0, H, 2, 6.0).is_err());
    assert!(hopping_sweep("square_well", 1.0, 4.0, H, 1, 5.0, 9.0, 1).is_err());
}
