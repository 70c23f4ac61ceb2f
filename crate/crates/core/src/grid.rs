//! Uniform radial grids on `[0, R_max]` and the weighted quadratures used for
//! `L^r` norms and energy integrals over `ℝ^N`.
//!
//! Node `i` sits at `r_i = i·h` and owns the shell `[r_i − h/2, r_i + h/2]`
//! clipped to `[0, R_max]`; its weight is the exact `N`-dimensional volume of
//! that shell. The origin node therefore carries the ball of radius `h/2` and
//! the weights telescope to the volume of the ball of radius `R_max`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exponents::{NormOrder, Params};

pub const MIN_CELLS: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs at least {MIN_CELLS} cells, got {0}")]
    InvalidResolution(usize),
    #[error("truncation radius must be positive and finite, got {0}")]
    InvalidDomain(f64),
    #[error("state has {got} values but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("state value at node {index} is {value}; values must be finite and >= 0")]
    InvalidValue { index: usize, value: f64 },
}

/// `|S^{N−1}| = 2π^{N/2}/Γ(N/2)`, valid for real `N ≥ 1`.
pub fn sphere_area(n: f64) -> f64 {
    2.0 * std::f64::consts::PI.powf(0.5 * n) / libm::tgamma(0.5 * n)
}

/// Volume of the `N`-ball of radius `r`.
pub fn ball_volume(n: f64, r: f64) -> f64 {
    sphere_area(n) / n * r.powf(n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    n: f64,
    r_max: f64,
    cells: usize,
    h: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `|S^{N−1}| r^{N−1}` at the face between node `i` and `i+1`.
    face_areas: Vec<f64>,
}

impl RadialGrid {
    pub fn uniform(params: &Params, r_max: f64, cells: usize) -> Result<Self, GridError> {
        Self::uniform_in_dimension(params.n(), r_max, cells)
    }

    pub fn uniform_in_dimension(n: f64, r_max: f64, cells: usize) -> Result<Self, GridError> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(GridError::InvalidDomain(r_max));
        }
        if cells < MIN_CELLS {
            return Err(GridError::InvalidResolution(cells));
        }
        let h = r_max / cells as f64;
        let nodes: Vec<f64> = (0..=cells).map(|i| i as f64 * h).collect();
        let area = sphere_area(n);
        let shell = |r: f64| area / n * r.powf(n);
        let mut weights = Vec::with_capacity(cells + 1);
        weights.push(shell(0.5 * h));
        for &r in &nodes[1..cells] {
            weights.push(shell(r + 0.5 * h) - shell(r - 0.5 * h));
        }
        weights.push(shell(r_max) - shell(r_max - 0.5 * h));
        let face_areas = (0..cells)
            .map(|i| area * ((i as f64 + 0.5) * h).powf(n - 1.0))
            .collect();
        Ok(RadialGrid {
            n,
            r_max,
            cells,
            h,
            nodes,
            weights,
            face_areas,
        })
    }

    pub fn dimension(&self) -> f64 {
        self.n
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Number of cells `M`; there are `M + 1` nodes.
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.face_areas
    }

    /// Evaluates a radial profile at every node.
    pub fn sample(&self, t: f64, profile: impl Fn(f64) -> f64) -> Result<State, GridError> {
        State::new(t, self.nodes.iter().map(|&r| profile(r)).collect(), self)
    }

    /// `Σ w_i f(u_i)`.
    pub fn integrate(&self, values: &[f64], f: impl Fn(f64) -> f64) -> f64 {
        self.weights
            .iter()
            .zip(values)
            .map(|(w, &u)| w * f(u))
            .sum()
    }
}

/// Non-negative solution samples at the grid nodes at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub values: Vec<f64>,
}

impl State {
    pub fn new(t: f64, values: Vec<f64>, grid: &RadialGrid) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(GridError::InvalidValue { index, value });
        }
        Ok(State { t, values })
    }

    pub fn zeros(t: f64, grid: &RadialGrid) -> Self {
        State {
            t,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&u| u == 0.0)
    }
}

pub fn lr_norm(state: &State, grid: &RadialGrid, order: NormOrder) -> f64 {
    lr_norm_of(&state.values, grid, order)
}

pub fn lr_norm_of(values: &[f64], grid: &RadialGrid, order: NormOrder) -> f64 {
    match order {
        NormOrder::Infinity => values.iter().copied().fold(0.0, f64::max),
        NormOrder::Finite(1.0) => grid.integrate(values, |u| u),
        NormOrder::Finite(2.0) => grid.integrate(values, |u| u * u).sqrt(),
        NormOrder::Finite(r) => grid.integrate(values, |u| u.powf(r)).powf(1.0 / r),
    }
}

/// Terms of the `L^{m+1}` energy balance `X'/(m+1) + D + Y = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyTerms {
    /// `‖u‖_{m+1}^{m+1}`
    pub x: f64,
    /// `‖∇u^m‖₂²`
    pub d: f64,
    /// `∫ u^{m+q}`
    pub y: f64,
}

/// `X`, `D`, `Y` by the grid quadrature. `D` uses the centred difference of
/// `u^m` at each cell face, weighted by the face area times `h`, which is the
/// same discrete gradient the solver's flux form uses.
pub fn energy_terms(state: &State, grid: &RadialGrid, params: &Params) -> EnergyTerms {
    let (m, q) = (params.m(), params.q());
    let pm: Vec<f64> = state.values.iter().map(|u| u.powf(m)).collect();
    let pq: Vec<f64> = state.values.iter().map(|u| u.powf(q)).collect();
    energy_terms_from_powers(&state.values, &pm, &pq, grid)
}

/// [`energy_terms`] from precomputed `u^m` and `u^q`.
pub(crate) fn energy_terms_from_powers(
    values: &[f64],
    pm: &[f64],
    pq: &[f64],
    grid: &RadialGrid,
) -> EnergyTerms {
    let prod = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x * y).collect() };
    let x = grid.integrate(&prod(values, pm), |v| v);
    let y = grid.integrate(&prod(pm, pq), |v| v);
    let h = grid.spacing();
    let d = grid
        .face_areas()
        .iter()
        .zip(pm.windows(2))
        .map(|(a, w)| {
            let g = (w[1] - w[0]) / h;
            a * h * g * g
        })
        .sum();
    EnergyTerms { x, d, y }
}
