//! Parameter admissibility and the closed-form exponents of the problem
//! `∂t u = Δu^m − u^q` in the range `(N−2)₊/N < m < q < 1`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("dimension must be a finite real >= 1, got {0}")]
    InvalidDimension(f64),
    #[error("exponents must be finite, got m={m}, q={q}")]
    NonFinite { m: f64, q: f64 },
    #[error("order violation: need 0 < m < q < 1, got m={m}, q={q}")]
    OrderViolation { m: f64, q: f64 },
    #[error("order violation: need 0 < m <= q < 1, got m={m}, q={q}")]
    WeakOrderViolation { m: f64, q: f64 },
    #[error("Sobolev violation: need m > (N-2)+/N = {bound}, got m={m} (N={n})")]
    SobolevViolation { n: f64, m: f64, bound: f64 },
    #[error("exponents are only defined for m < q, got m={m}, q={q}")]
    OutsideRateRegime { m: f64, q: f64 },
}

impl ParamError {
    /// Short machine-friendly tag, used in sweep tables.
    pub fn kind(&self) -> &'static str {
        match self {
            ParamError::InvalidDimension(_) => "InvalidDimension",
            ParamError::NonFinite { .. } => "NonFinite",
            ParamError::OrderViolation { .. } | ParamError::WeakOrderViolation { .. } => {
                "OrderViolation"
            }
            ParamError::SobolevViolation { .. } => "SobolevViolation",
            ParamError::OutsideRateRegime { .. } => "OutsideRateRegime",
        }
    }
}

/// Order of a Lebesgue norm, `r ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NormOrder {
    Finite(f64),
    Infinity,
}

impl NormOrder {
    pub const ONE: NormOrder = NormOrder::Finite(1.0);
    pub const TWO: NormOrder = NormOrder::Finite(2.0);

    pub fn is_infinite(&self) -> bool {
        matches!(self, NormOrder::Infinity)
    }

    /// `1/r`, with `1/∞ = 0` exactly.
    pub fn reciprocal(&self) -> f64 {
        match *self {
            NormOrder::Finite(r) => 1.0 / r,
            NormOrder::Infinity => 0.0,
        }
    }
}

impl fmt::Display for NormOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormOrder::Finite(r) => write!(f, "{r}"),
            NormOrder::Infinity => write!(f, "inf"),
        }
    }
}

/// Dimension and exponents of the equation.
///
/// Built either through [`Params::validate`], which enforces the full
/// optimal-rate range `(N−2)₊/N < m < q < 1`, or through
/// [`Params::validate_positivity`], which only requires `0 < m ≤ q < 1`
/// and is enough for running the solver and the positivity checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    n: f64,
    m: f64,
    q: f64,
}

fn check_common(n: f64, m: f64, q: f64) -> Result<(), ParamError> {
    if !n.is_finite() || n < 1.0 {
        return Err(ParamError::InvalidDimension(n));
    }
    if !m.is_finite() || !q.is_finite() {
        return Err(ParamError::NonFinite { m, q });
    }
    Ok(())
}

/// `(N−2)₊/N`
pub fn sobolev_bound(n: f64) -> f64 {
    (n - 2.0).max(0.0) / n
}

impl Params {
    /// Accepts `(N, m, q)` iff `(N−2)₊/N < m < q < 1`.
    pub fn validate(n: f64, m: f64, q: f64) -> Result<Self, ParamError> {
        check_common(n, m, q)?;
        if !(m > 0.0 && m < q && q < 1.0) {
            return Err(ParamError::OrderViolation { m, q });
        }
        let bound = sobolev_bound(n);
        if m <= bound {
            return Err(ParamError::SobolevViolation { n, m, bound });
        }
        Ok(Params { n, m, q })
    }

    /// Accepts `(N, m, q)` iff `0 < m ≤ q < 1`. The boundary case `q = m`
    /// is allowed here; [`Params::derive`] refuses it.
    pub fn validate_positivity(n: f64, m: f64, q: f64) -> Result<Self, ParamError> {
        check_common(n, m, q)?;
        if !(m > 0.0 && m <= q && q < 1.0) {
            return Err(ParamError::WeakOrderViolation { m, q });
        }
        Ok(Params { n, m, q })
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// True when the full rate theory applies (strict range).
    pub fn is_rate_admissible(&self) -> bool {
        self.m < self.q && self.m > sobolev_bound(self.n)
    }

    pub fn derive(&self) -> Result<DerivedExponents, ParamError> {
        if !self.is_rate_admissible() {
            return Err(ParamError::OutsideRateRegime {
                m: self.m,
                q: self.q,
            });
        }
        Ok(DerivedExponents::from_params(self))
    }

    /// Extinction time of the spatially homogeneous solution starting at
    /// height `a`: `a^{1−q}/(1−q)`. Upper bound for `T_e` when `a = ‖u₀‖_∞`.
    pub fn flat_extinction_time(&self, a: f64) -> f64 {
        a.max(0.0).powf(1.0 - self.q) / (1.0 - self.q)
    }

    /// `[(1−q)τ]^{1/(1−q)}`: height of the flat solution a time `τ` before
    /// it vanishes, and the lower bound for `‖u‖_∞` at `T_e − τ`.
    pub fn flat_profile_height(&self, remaining: f64) -> f64 {
        ((1.0 - self.q) * remaining.max(0.0)).powf(1.0 / (1.0 - self.q))
    }
}

/// Error-free `a + b` as `(sum, error)`.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Error-free `a·b` as `(product, error)`.
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Compensated sum of double-double terms.
fn dd_sum(terms: &[(f64, f64)]) -> f64 {
    let (mut hi, mut lo) = (0.0, 0.0);
    for &(a, e) in terms {
        let (s, err) = two_sum(hi, a);
        hi = s;
        lo += err + e;
    }
    hi + lo
}

/// `denominator − numerator` of `γ`, i.e.
/// `[m(N+2) − qN + 2] − [m(N+2) − q(N−2)]`, summed in double-double so that
/// `1 − γ` keeps full relative accuracy as `q → 1`.
fn gamma_complement(n: f64, m: f64, q: f64) -> f64 {
    let (np2, np2_e) = two_sum(n, 2.0);
    let (nm2, nm2_e) = two_sum(n, -2.0);
    let a = two_prod(m, np2);
    let a_e = m * np2_e;
    let b = two_prod(q, n);
    let c = two_prod(q, nm2);
    let c_e = q * nm2_e;
    let den = [a, (a_e, 0.0), (-b.0, -b.1), (2.0, 0.0)];
    let num = [a, (a_e, 0.0), (-c.0, -c.1), (-c_e, 0.0)];
    let mut terms: Vec<(f64, f64)> = den.to_vec();
    terms.extend(num.iter().map(|&(x, e)| (-x, -e)));
    dd_sum(&terms)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedExponents {
    pub n: f64,
    pub m: f64,
    pub q: f64,
    /// Time exponent `1/(1−q)`.
    pub alpha: f64,
    /// Space exponent `(q−m)/(2(1−q))`.
    pub beta: f64,
    /// Exponent of the differential inequality `X' + C X^γ ≤ 0`.
    pub gamma: f64,
    /// `1 − γ`, evaluated without cancellation.
    pub one_minus_gamma: f64,
    /// Gagliardo–Nirenberg interpolation exponent of the `L^{m+1}` lower bound.
    pub theta: f64,
    /// Smallest `κ` for which `κ|x|^{−2/(q−m)}` is a supersolution.
    pub kappa_star: f64,
    /// Spatial decay exponent `2/(q−m)`.
    pub decay: f64,
}

impl DerivedExponents {
    fn from_params(p: &Params) -> Self {
        let (n, m, q) = (p.n, p.m, p.q);
        let alpha = 1.0 / (1.0 - q);
        let beta = (q - m) / (2.0 * (1.0 - q));
        let gn = m * (n + 2.0) - q * (n - 2.0);
        let gd = m * (n + 2.0) - q * n + 2.0;
        let gamma = gn / gd;
        let one_minus_gamma = gamma_complement(n, m, q) / gd;
        let theta = 2.0 * n * m * (1.0 - q) / ((m + 1.0) * gn);
        let kappa_star = (2.0 * m * (m + q) / ((q - m) * (q - m))).powf(1.0 / (q - m));
        let decay = 2.0 / (q - m);
        DerivedExponents {
            n,
            m,
            q,
            alpha,
            beta,
            gamma,
            one_minus_gamma,
            theta,
            kappa_star,
            decay,
        }
    }

    /// Extinction rate of the `L^r` norm: `α − Nβ/r`.
    pub fn rate(&self, r: NormOrder) -> f64 {
        self.alpha - self.n * self.beta * r.reciprocal()
    }

    /// The `L^{m+1}` order.
    pub fn lm1(&self) -> NormOrder {
        NormOrder::Finite(self.m + 1.0)
    }

    /// `(m+1)α − Nβ`, the rate of `‖u‖_{m+1}^{m+1}`.
    pub fn energy_rate(&self) -> f64 {
        (self.m + 1.0) * self.alpha - self.n * self.beta
    }

    /// `1/(1−γ)`, the same quantity reached through the energy inequality.
    pub fn energy_rate_from_gamma(&self) -> f64 {
        1.0 / self.one_minus_gamma
    }

    /// `2q/(q−m)`, the decay of `Σ^q`; exceeds `N` in the admissible range.
    pub fn absorption_decay(&self) -> f64 {
        2.0 * self.q / (self.q - self.m)
    }

    /// Named rows for tabular output, in a fixed order.
    pub fn table(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("N", self.n),
            ("m", self.m),
            ("q", self.q),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("one_minus_gamma", self.one_minus_gamma),
            ("theta", self.theta),
            ("kappa_star", self.kappa_star),
            ("decay", self.decay),
            ("rate_L1", self.rate(NormOrder::ONE)),
            ("rate_Lm1", self.rate(self.lm1())),
            ("rate_L2", self.rate(NormOrder::TWO)),
            ("rate_Linf", self.rate(NormOrder::Infinity)),
            ("energy_rate", self.energy_rate()),
        ]
    }
}
