//! Generalized Jacobi functions and the trial/test bases built from them.
//!
//! Trial functions carry the singular factor `(1 + x)^sigma` (left end),
//! test functions carry `(1 - x)^sigma` (right end). Time functions live on
//! `[0, T]` through `y = 2t/T - 1`. All fractional derivatives are exact
//! closed forms; orders beyond one step above `sigma` (or `s`) are handled by
//! integer differentiation of the closed form with the Leibniz rule.

use crate::error::{Error, Result};
use crate::specfun::{gamma_ratio, jacobi_deriv, jacobi_eval, JacobiParams};

/// Problem orders and horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrders {
    pub alpha: f64,
    pub beta: f64,
    pub gamma_v: f64,
    pub mu: f64,
    pub eps: f64,
    pub horizon: f64,
}

impl FracOrders {
    /// Validates every range and returns the orders.
    pub fn new(
        alpha: f64,
        beta: f64,
        gamma_v: f64,
        mu: f64,
        eps: f64,
        horizon: f64,
    ) -> Result<Self> {
        let o = Self {
            alpha,
            beta,
            gamma_v,
            mu,
            eps,
            horizon,
        };
        o.validate()?;
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        let open = |v: f64, lo: f64, hi: f64| v > lo && v < hi;
        if !open(self.alpha, 0.0, 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha = {} must lie in (0, 1)",
                self.alpha
            )));
        }
        if !open(self.gamma_v, 0.0, 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma = {} must lie in (0, 1)",
                self.gamma_v
            )));
        }
        if !open(self.beta, 1.0, 2.0) {
            return Err(Error::InvalidParameter(format!(
                "beta = {} must lie in (1, 2)",
                self.beta
            )));
        }
        if !open(self.mu, 1.0, 2.0) {
            return Err(Error::InvalidParameter(format!(
                "mu = {} must lie in (1, 2)",
                self.mu
            )));
        }
        // The well-posedness bound min(2^(gamma - alpha), 1) is advisory: the
        // reference parameter set with gamma < alpha uses eps = 1 beyond it.
        if !(self.eps >= 0.0 && self.eps <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eps = {} must lie in [0, 1] (well-posedness bound min(2^(gamma - alpha), 1) = {})",
                self.eps,
                self.eps_max()
            )));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "T = {} must be positive",
                self.horizon
            )));
        }
        Ok(())
    }

    /// Largest admissible viscosity strength `min(2^(gamma - alpha), 1)`.
    pub fn eps_max(&self) -> f64 {
        2f64.powf(self.gamma_v - self.alpha).min(1.0)
    }

    /// Whether `eps` lies within the well-posedness bound.
    pub fn eps_within_bound(&self) -> bool {
        self.eps <= self.eps_max() * (1.0 + 1e-14)
    }

    /// `max(beta, mu) / 2`
    pub fn sigma(&self) -> f64 {
        0.5 * self.beta.max(self.mu)
    }

    /// `max(alpha, gamma) / 2`
    pub fn s(&self) -> f64 {
        0.5 * self.alpha.max(self.gamma_v)
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        let mut o = *self;
        o.eps = eps;
        o.validate()?;
        Ok(o)
    }
}

/// Trial/test basis of `M - 1` space and `N` time functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisSet {
    pub orders: FracOrders,
    pub m: usize,
    pub n: usize,
    pub sigma: f64,
    pub s: f64,
}

impl BasisSet {
    pub fn new(orders: FracOrders, m: usize, n: usize) -> Result<Self> {
        orders.validate()?;
        if m < 2 {
            return Err(Error::InvalidParameter(format!(
                "M = {m} must be at least 2"
            )));
        }
        if n < 1 {
            return Err(Error::InvalidParameter(format!(
                "N = {n} must be at least 1"
            )));
        }
        Ok(Self {
            orders,
            m,
            n,
            sigma: orders.sigma(),
            s: orders.s(),
        })
    }

    /// Number of space modes, `M - 1`.
    pub fn space_dim(&self) -> usize {
        self.m - 1
    }

    pub fn time_dim(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.orders.horizon
    }

    /// Reference time variable `y = 2t/T - 1`.
    pub fn to_reference(&self, t: f64) -> f64 {
        2.0 * t / self.orders.horizon - 1.0
    }

    fn check_space(&self, i: usize) -> Result<()> {
        if i < 1 || i > self.m - 1 {
            return Err(Error::IndexOutOfRange {
                index: i,
                lo: 1,
                hi: self.m - 1,
            });
        }
        Ok(())
    }

    fn check_time(&self, j: usize) -> Result<()> {
        if j < 1 || j > self.n {
            return Err(Error::IndexOutOfRange {
                index: j,
                lo: 1,
                hi: self.n,
            });
        }
        Ok(())
    }
}

/// `base^e` with an exact zero (or one, for `e = 0`) at a vanishing base.
pub fn pow_guarded(base: f64, e: f64) -> f64 {
    if base <= 1e-300 {
        if e > 0.0 {
            0.0
        } else if e == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        base.powf(e)
    }
}

/// `(1 - x)^a P_n^{(a,b)}(x)`
pub fn gjf_plus(n: usize, a: f64, b: f64, x: f64) -> f64 {
    pow_guarded(1.0 - x, a) * jacobi_eval(n, JacobiParams::new(a, b), x)
}

/// `(1 + x)^b P_n^{(a,b)}(x)`
pub fn gjf_minus(n: usize, a: f64, b: f64, x: f64) -> f64 {
    pow_guarded(1.0 + x, b) * jacobi_eval(n, JacobiParams::new(a, b), x)
}

/// Left RL derivative of order `s_tilde` of `(1 + x)^b P_n^{(a,b)}`.
pub fn gjf_minus_frac_deriv(n: usize, a: f64, b: f64, s_tilde: f64, x: f64) -> Result<f64> {
    if !(s_tilde >= 0.0) || !(b > s_tilde - 1.0) {
        return Err(Error::UnsupportedOrder {
            order: s_tilde,
            limit: b + 1.0,
        });
    }
    let nf = n as f64;
    let c = gamma_ratio(nf + b + 1.0, nf + b - s_tilde + 1.0)?;
    Ok(c * gjf_minus(n, a + s_tilde, b - s_tilde, x))
}

/// Right RL derivative of order `s_tilde` of `(1 - x)^a P_n^{(a,b)}`.
pub fn gjf_plus_frac_deriv(n: usize, a: f64, b: f64, s_tilde: f64, x: f64) -> Result<f64> {
    if !(s_tilde >= 0.0) || !(a > s_tilde - 1.0) {
        return Err(Error::UnsupportedOrder {
            order: s_tilde,
            limit: a + 1.0,
        });
    }
    let nf = n as f64;
    let c = gamma_ratio(nf + a + 1.0, nf + a - s_tilde + 1.0)?;
    Ok(c * gjf_plus(n, a - s_tilde, b + s_tilde, x))
}

/// Which of the four basis families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    TrialSpace,
    TestSpace,
    TrialTime,
    TestTime,
}

impl BasisKind {
    fn is_space(self) -> bool {
        matches!(self, BasisKind::TrialSpace | BasisKind::TestSpace)
    }

    fn is_trial(self) -> bool {
        matches!(self, BasisKind::TrialSpace | BasisKind::TrialTime)
    }
}

/// Closed-form structure of a basis derivative of order `q` (no integer part):
/// `scale * w(z)^d * (P_{n-1}^{(pa,pb)}(z) + coef * P_n^{(pa,pb)}(z))` where `z`
/// is `x` or `y` and `w` is `1 + z` (trial) or `1 - z` (test).
#[derive(Debug, Clone, Copy)]
struct ClosedForm {
    scale: f64,
    d: f64,
    params: JacobiParams,
    deg: usize,
    // coefficient of P_deg; `None` means the single-polynomial time form
    coef: Option<f64>,
}

impl ClosedForm {
    fn poly_deriv(&self, k: usize, z: f64) -> f64 {
        let lo = jacobi_deriv(self.deg - 1, self.params, k, z);
        match self.coef {
            Some(c) => lo + c * jacobi_deriv(self.deg, self.params, k, z),
            None => lo,
        }
    }
}

fn closed_form(kind: BasisKind, index: usize, q: f64, basis: &BasisSet) -> Result<ClosedForm> {
    if kind.is_space() {
        let sigma = basis.sigma;
        let i = index as f64;
        let d = sigma - q;
        let scale = gamma_ratio(i, i + d)?;
        let c = i * (i + sigma) / ((i - sigma) * (i + d));
        let (params, coef) = if kind.is_trial() {
            (JacobiParams::new(-d, d), -c)
        } else {
            (JacobiParams::new(d, -d), c)
        };
        Ok(ClosedForm {
            scale,
            d,
            params,
            deg: index,
            coef: Some(coef),
        })
    } else {
        let s = basis.s;
        let j = index as f64;
        let d = s - q;
        let half_t = 0.5 * basis.horizon();
        let scale = gamma_ratio(j, j + d)? * half_t.powf(d - 0.5) * (j - 0.5).sqrt();
        let params = if kind.is_trial() {
            JacobiParams::new(-d, d)
        } else {
            JacobiParams::new(d, -d)
        };
        Ok(ClosedForm {
            scale,
            d,
            params,
            deg: index,
            coef: None,
        })
    }
}

fn check_index(kind: BasisKind, index: usize, basis: &BasisSet) -> Result<()> {
    if kind.is_space() {
        basis.check_space(index)
    } else {
        basis.check_time(index)
    }
}

/// Split an order into `q + k` with `k` integer and `q` in `[0, base + 1)`.
fn split_order(order: f64, base: f64) -> (f64, usize) {
    if order <= base {
        return (order, 0);
    }
    let excess = order - base;
    let mut k = excess.floor();
    // snap orders like sigma + 1 - 1e-16 onto the integer branch
    if excess - k > 1.0 - 1e-12 {
        k += 1.0;
    }
    let q = if (excess - k).abs() < 1e-12 {
        base
    } else {
        order - k
    };
    (q, k as usize)
}

/// Fractional derivative of a basis function: left RL for trial kinds,
/// right RL for test kinds. `point` is `x` for space kinds and `t` for time
/// kinds. Order zero returns the plain basis value.
pub fn basis_frac_deriv(
    kind: BasisKind,
    index: usize,
    order: f64,
    basis: &BasisSet,
    point: f64,
) -> Result<f64> {
    check_index(kind, index, basis)?;
    if !(order >= 0.0) || !order.is_finite() {
        return Err(Error::UnsupportedOrder {
            order,
            limit: f64::INFINITY,
        });
    }
    let base = if kind.is_space() {
        basis.sigma
    } else {
        basis.s
    };
    let (q, k) = split_order(order, base);
    let cf = closed_form(kind, index, q, basis)?;
    let (z, chain) = if kind.is_space() {
        (point, 1.0)
    } else {
        (basis.to_reference(point), 2.0 / basis.horizon())
    };
    // w = 1 + z for trial functions, 1 - z for test functions
    let (w, dw): (f64, f64) = if kind.is_trial() {
        (1.0 + z, 1.0)
    } else {
        (1.0 - z, -1.0)
    };
    // Leibniz: d^k [w^d p] = sum_m C(k, m) (d)_m dw^m w^{d-m} p^{(k-m)}
    let mut acc = 0.0;
    let mut binom = 1.0;
    let mut falling = 1.0;
    for m in 0..=k {
        if m > 0 {
            binom = binom * (k - m + 1) as f64 / m as f64;
            falling *= cf.d - (m - 1) as f64;
            if falling == 0.0 {
                break;
            }
        }
        let term = binom
            * falling
            * dw.powi(m as i32)
            * pow_guarded(w, cf.d - m as f64)
            * cf.poly_deriv(k - m, z);
        acc += term;
    }
    // right derivatives of integer order k carry (-1)^k
    let sign = if !kind.is_trial() && k % 2 == 1 {
        -1.0
    } else {
        1.0
    };
    Ok(sign * cf.scale * chain.powi(k as i32) * acc)
}

/// Basis derivative with the singular factor `w^{base - order}` removed, for
/// `order <= base`: a polynomial in `x` (space) or in `y = 2t/T - 1` (time).
pub fn basis_frac_deriv_poly(
    kind: BasisKind,
    index: usize,
    order: f64,
    basis: &BasisSet,
    point: f64,
) -> Result<f64> {
    check_index(kind, index, basis)?;
    let base = if kind.is_space() {
        basis.sigma
    } else {
        basis.s
    };
    if !(order >= 0.0) || order > base {
        return Err(Error::UnsupportedOrder { order, limit: base });
    }
    let cf = closed_form(kind, index, order, basis)?;
    let z = if kind.is_space() {
        point
    } else {
        basis.to_reference(point)
    };
    Ok(cf.scale * cf.poly_deriv(0, z))
}

/// Trial space function `phi_i`.
pub fn trial_space(i: usize, basis: &BasisSet, x: f64) -> Result<f64> {
    basis_frac_deriv(BasisKind::TrialSpace, i, 0.0, basis, x)
}

/// Trial time function `psi_j`.
pub fn trial_time(j: usize, basis: &BasisSet, t: f64) -> Result<f64> {
    basis_frac_deriv(BasisKind::TrialTime, j, 0.0, basis, t)
}

/// Test space function `phi-bar_i`.
pub fn test_space(i: usize, basis: &BasisSet, x: f64) -> Result<f64> {
    basis_frac_deriv(BasisKind::TestSpace, i, 0.0, basis, x)
}

/// Test time function `psi-bar_j`.
pub fn test_time(j: usize, basis: &BasisSet, t: f64) -> Result<f64> {
    basis_frac_deriv(BasisKind::TestTime, j, 0.0, basis, t)
}
