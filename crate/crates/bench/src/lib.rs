//! Fixtures shared by the criterion benches.

use fastdiff_core::{InitialDatum, Params, RadialGrid, State};

/// `N = 1, m = 0.5, q = 0.75` with capped-power data on `[0, 20]`.
pub fn reference_problem(cells: usize) -> (Params, RadialGrid, State) {
    let params = Params::validate(1.0, 0.5, 0.75).expect("admissible");
    let grid = RadialGrid::uniform(&params, 20.0, cells).expect("grid");
    let u0 = InitialDatum::CappedPower { amplitude: 1.0 }
        .sample(&grid, &params)
        .expect("datum");
    (params, grid, u0)
}
