use fastdiff_core::rescale::rescaled_norm_series;
use fastdiff_core::solver::{self, estimate_extinction_richardson, recorded_orders};
use fastdiff_core::{lr_norm, InitialDatum, Params, RadialGrid, SolverConfig, State};
use proptest::prelude::*;

fn bumps(grid: &RadialGrid, amps: &[f64], widths: &[f64]) -> State {
    grid.sample(0.0, |r| {
        amps.iter()
            .zip(widths)
            .map(|(a, w)| a * (-(r / w).powi(2)).exp())
            .sum()
    })
    .unwrap()
}

fn one_step(u: &State, grid: &RadialGrid, p: &Params, dt: f64) -> State {
    solver::step(u, grid, p, &SolverConfig::default(), dt)
        .unwrap()
        .state
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn norms_never_increase(
        m in 0.35f64..0.9,
        gap in 0.02f64..0.3,
        amps in prop::collection::vec(0.05f64..2.0, 1..4),
        widths in prop::collection::vec(0.3f64..3.0, 3),
        dt in 1e-4f64..0.2,
    ) {
        let q = (m + gap).min(0.98);
        let p = Params::validate(1.0, m, q).unwrap();
        let grid = RadialGrid::uniform(&p, 12.0, 96).unwrap();
        let u = bumps(&grid, &amps, &widths[..amps.len().min(3)]);
        let v = one_step(&u, &grid, &p, dt);
        for order in recorded_orders(&p) {
            let (a, b) = (lr_norm(&u, &grid, order), lr_norm(&v, &grid, order));
            prop_assert!(b <= a * (1.0 + 1e-12), "{order}: {a} -> {b}");
        }
    }

    #[test]
    fn one_step_preserves_order(
        n in prop::sample::select(vec![1.0, 2.0, 3.0]),
        amp in 0.1f64..1.5,
        extra in 0.0f64..1.0,
        width in 0.3f64..2.0,
        dt in 1e-3f64..0.1,
    ) {
        let p = Params::validate(n, 0.6, 0.8).unwrap();
        let grid = RadialGrid::uniform(&p, 8.0, 64).unwrap();
        let lo = bumps(&grid, &[amp], &[width]);
        let hi = bumps(&grid, &[amp, extra], &[width, 2.0 * width]);
        let (a, b) = (one_step(&lo, &grid, &p, dt), one_step(&hi, &grid, &p, dt));
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!(x - y <= 1e-11, "{x} > {y}");
        }
    }
}

#[test]
fn indicator_becomes_positive_after_one_step() {
    for (n, m, q) in [
        (1.0, 0.5, 0.75),
        (2.0, 0.5, 0.75),
        (3.0, 0.5, 0.75),
        (1.0, 0.6, 0.6),
        (3.0, 0.6, 0.6),
    ] {
        let p = Params::validate_positivity(n, m, q).unwrap();
        let grid = RadialGrid::uniform(&p, 4.0, 128).unwrap();
        let u0 = InitialDatum::Indicator { radius: 1.0 }
            .sample(&grid, &p)
            .unwrap();
        assert!(u0.values.contains(&0.0));
        let u1 = one_step(&u0, &grid, &p, 1e-3);
        let cells = grid.cells();
        assert!(
            u1.values[..cells].iter().all(|&u| u > 0.0),
            "N={n} m={m} q={q}: min {:e}",
            u1.values[..cells]
                .iter()
                .fold(f64::INFINITY, |a, &b| a.min(b))
        );
        assert_eq!(u1.values[cells], 0.0);
    }
}

fn flat_run(config: &SolverConfig) -> f64 {
    let p = Params::validate(1.0, 0.5, 0.75).unwrap();
    let grid = RadialGrid::uniform(&p, 200.0, 64).unwrap();
    let u0 = InitialDatum::Flat { amplitude: 1.0 }
        .sample(&grid, &p)
        .unwrap();
    solver::run(&u0, &grid, &p, config)
        .unwrap()
        .t_e_est
        .unwrap()
}

#[test]
fn halving_steps_halves_the_extinction_error() {
    let coarse = SolverConfig {
        dt_init: 4e-3,
        dt_max: 4e-3,
        remaining_fraction: 4e-3,
        ..SolverConfig::default()
    };
    let e1 = (flat_run(&coarse) - 4.0).abs();
    let e2 = (flat_run(&coarse.refined()) - 4.0).abs();
    let ratio = e1 / e2;
    assert!(
        (1.7..2.3).contains(&ratio),
        "errors {e1:e} {e2:e} ratio {ratio}"
    );
}

#[test]
fn richardson_improves_the_flat_estimate() {
    let p = Params::validate(1.0, 0.5, 0.75).unwrap();
    let grid = RadialGrid::uniform(&p, 200.0, 64).unwrap();
    let u0 = InitialDatum::Flat { amplitude: 1.0 }
        .sample(&grid, &p)
        .unwrap();
    let cfg = SolverConfig {
        dt_max: 4e-3,
        dt_init: 1e-3,
        remaining_fraction: 4e-3,
        ..SolverConfig::default()
    };
    let est = estimate_extinction_richardson(&u0, &grid, &p, &cfg).unwrap();
    let (e_fine, e_rich) = ((est.fine - 4.0).abs(), (est.extrapolated - 4.0).abs());
    assert!(e_rich < 0.2 * e_fine, "{est:?}");
}

#[test]
fn decaying_data_dies_before_flat_majorant() {
    let p = Params::validate(1.0, 0.5, 0.75).unwrap();
    let grid = RadialGrid::uniform(&p, 20.0, 256).unwrap();
    let u0 = InitialDatum::CappedPower { amplitude: 1.0 }
        .sample(&grid, &p)
        .unwrap();
    let traj = solver::run(&u0, &grid, &p, &SolverConfig::default()).unwrap();
    let t_e = traj.t_e_est.unwrap();
    assert!(t_e < 4.0 * (1.0 + 1e-2), "{t_e}");
    assert!(t_e > 2.0, "{t_e}");
}

#[test]
fn rescaled_norms_are_pure_algebra() {
    let p = Params::validate(1.0, 0.5, 0.75).unwrap();
    let exps = p.derive().unwrap();
    let grid = RadialGrid::uniform(&p, 20.0, 128).unwrap();
    let u0 = InitialDatum::Gaussian {
        amplitude: 1.0,
        sigma: 1.5,
    }
    .sample(&grid, &p)
    .unwrap();
    let traj = solver::run(&u0, &grid, &p, &SolverConfig::default()).unwrap();
    let t_e = traj.t_e_est.unwrap();
    let series = rescaled_norm_series(&traj.records, t_e, &exps).unwrap();
    let orders = recorded_orders(&p);
    for (rec, pt) in traj.records.iter().zip(&series) {
        let tau = t_e - rec.t;
        assert!((pt.s - (t_e / tau).ln()).abs() < 1e-12 * pt.s.max(1.0));
        for (k, order) in orders.iter().enumerate() {
            let back = tau.powf(exps.rate(*order)) * pt.v[k];
            let rel = (back - rec.norms[k]).abs() / rec.norms[k];
            assert!(rel <= 1e-12, "{order}: {rel:e}");
        }
    }
}
