//! Grid norms against an independent adaptive-Simpson quadrature.

use fastdiff_core::grid::{ball_volume, sphere_area};
use fastdiff_core::{lr_norm, NormOrder, Params, RadialGrid};

#[allow(clippy::too_many_arguments)]
fn simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        left + right + (left + right - whole) / 15.0
    } else {
        simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1)
            + simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1)
    }
}

fn adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    simpson(&f, a, b, f(a), f(m), f(b), 1e-13, 40)
}

/// `|S^{N−1}| ∫_0^R f(r) r^{N−1} dr`, split at the kink `r = 1`.
fn radial_integral(n: f64, r_max: f64, f: impl Fn(f64) -> f64 + Copy) -> f64 {
    let g = move |r: f64| f(r) * r.powf(n - 1.0);
    sphere_area(n) * (adaptive(g, 0.0, 1.0) + adaptive(g, 1.0, r_max))
}

fn capped(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else {
        r.powi(-8)
    }
}

#[test]
fn capped_power_norms_match_oracle() {
    for n in [1.0, 2.0, 3.0] {
        let p = Params::validate(n, 0.5, 0.75).unwrap();
        let grid = RadialGrid::uniform(&p, 20.0, 8192).unwrap();
        let u = grid.sample(0.0, capped).unwrap();
        for r in [1.0, 1.5, 2.0] {
            let oracle = radial_integral(n, 20.0, |x| capped(x).powf(r)).powf(1.0 / r);
            let got = lr_norm(&u, &grid, NormOrder::Finite(r));
            let rel = (got - oracle).abs() / oracle;
            assert!(rel < 1e-5, "N={n} r={r}: {got} vs {oracle} ({rel:e})");
        }
    }
}

#[test]
fn closed_forms_on_the_line() {
    // ∫_ℝ min(1,|x|^{-8}) = 2(1 + 1/7),   ∫_ℝ min(1,|x|^{-16}) = 2(1 + 1/15)
    let oracle1 = radial_integral(1.0, 1e3, capped);
    assert!((oracle1 - 16.0 / 7.0).abs() < 1e-10);
    let oracle2 = radial_integral(1.0, 1e3, |x| capped(x).powi(2));
    assert!((oracle2 - 32.0 / 15.0).abs() < 1e-10);
}

#[test]
fn weights_integrate_polynomials_over_balls() {
    for n in [1.0, 2.0, 3.0, 2.5] {
        let grid = RadialGrid::uniform_in_dimension(n, 3.0, 1024).unwrap();
        let vol: f64 = grid.weights().iter().sum();
        assert!((vol - ball_volume(n, 3.0)).abs() <= 1e-12 * vol);
        // ∫_{B_R} |x|² = |S| R^{N+2}/(N+2)
        let exact = sphere_area(n) * 3f64.powf(n + 2.0) / (n + 2.0);
        let r2: f64 = grid
            .nodes()
            .iter()
            .zip(grid.weights())
            .map(|(r, w)| r * r * w)
            .sum();
        assert!((r2 - exact).abs() / exact < 1e-5, "N={n}");
    }
}
