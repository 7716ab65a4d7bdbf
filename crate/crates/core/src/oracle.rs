//! Ground truth for the solver: direct Riemann-Liouville derivatives by
//! quadrature, a small fractional power series calculus, and the
//! manufactured Mittag-Leffler test problems built from it.

use crate::error::{domain, Error, Result};
use crate::gjf::FracOrders;
use crate::quadrature::{jacobi_gauss, map_to_interval, QuadratureRule};
use crate::specfun::{gamma, gamma_ratio, mittag_leffler, recip_gamma, JacobiParams, MLParams};

/// Number of series terms beyond the leading one kept for the exact solutions.
pub const SERIES_TERMS: usize = 60;
const MAX_SERIES_TERMS: usize = 400;

/// Which variable a series is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// `xi = 1 + x`
    LeftAtMinus1,
    /// `tau = 2t / T`
    LeftAtZero,
}

/// `prefactor * sum_k a_k v^(p0 + k)` in the origin variable `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct FracPowerSeries {
    pub origin: Origin,
    pub p0: f64,
    pub coeffs: Vec<f64>,
    pub prefactor: f64,
}

impl FracPowerSeries {
    pub fn new(origin: Origin, p0: f64, coeffs: Vec<f64>, prefactor: f64) -> Result<Self> {
        if !(p0 > -1.0) {
            return Err(domain(
                "FracPowerSeries",
                format!("leading exponent {p0} must exceed -1"),
            ));
        }
        if coeffs.len() > MAX_SERIES_TERMS + 1 {
            return Err(domain(
                "FracPowerSeries",
                format!("{} terms exceed {MAX_SERIES_TERMS}", coeffs.len() - 1),
            ));
        }
        Ok(Self {
            origin,
            p0,
            coeffs,
            prefactor,
        })
    }

    /// Origin variable for a physical point (`x` or `t`).
    pub fn variable(&self, point: f64, horizon: f64) -> f64 {
        match self.origin {
            Origin::LeftAtMinus1 => 1.0 + point,
            Origin::LeftAtZero => 2.0 * point / horizon,
        }
    }

    /// Value at origin variable `v >= 0`.
    pub fn eval(&self, v: f64) -> f64 {
        let poly = self.coeffs.iter().rev().fold(0.0, |acc, c| acc * v + c);
        let lead = if v == 0.0 {
            if self.p0 == 0.0 {
                1.0
            } else if self.p0 > 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            v.powf(self.p0)
        };
        if poly == 0.0 {
            return 0.0;
        }
        self.prefactor * lead * poly
    }

    pub fn eval_at(&self, point: f64, horizon: f64) -> f64 {
        self.eval(self.variable(point, horizon))
    }

    /// Largest absolute term at `v`, a scale for cancellation-aware tolerances.
    pub fn abs_scale(&self, v: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| (c * v.powf(self.p0 + k as f64)).abs())
            .fold(0.0, f64::max)
            * self.prefactor.abs()
    }
}

/// Term-wise RL derivative of order `rho` in the series' own variable.
/// Callers differentiating in `t` multiply by `(2/T)^rho`.
pub fn series_rl_deriv(sfs: &FracPowerSeries, rho: f64) -> Result<FracPowerSeries> {
    if !(rho >= 0.0) {
        return Err(domain(
            "series_rl_deriv",
            format!("order {rho} must be non-negative"),
        ));
    }
    let p0 = sfs.p0 - rho;
    if !(p0 > -1.0) {
        return Err(domain(
            "series_rl_deriv",
            format!("leading exponent {} - {rho} drops to -1 or below", sfs.p0),
        ));
    }
    if rho == 0.0 {
        return Ok(sfs.clone());
    }
    let coeffs = sfs
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            let e = sfs.p0 + k as f64 + 1.0;
            Ok(if a == 0.0 {
                0.0
            } else {
                a * gamma_ratio(e, e - rho)?
            })
        })
        .collect::<Result<Vec<_>>>()?;
    FracPowerSeries::new(sfs.origin, p0, coeffs, sfs.prefactor)
}

// 1/Gamma(c + k + 1), k = 0..=K, by upward recursion from one evaluation.
fn ml_coeffs(c: f64, terms: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(terms + 1);
    let mut r = recip_gamma(c + 1.0)?;
    for k in 0..=terms {
        out.push(r);
        r /= c + k as f64 + 1.0;
    }
    Ok(out)
}

/// Test problem variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    TP1,
    TP2,
    TP3,
}

/// Orders, regularity offsets and variant of a manufactured problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub orders: FracOrders,
    pub eta: f64,
    pub theta: f64,
    pub variant: Variant,
}

impl ProblemSpec {
    pub fn new(orders: FracOrders, eta: f64, theta: f64, variant: Variant) -> Result<Self> {
        orders.validate()?;
        if !(eta >= 0.0 && theta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eta = {eta} and theta = {theta} must be non-negative"
            )));
        }
        Ok(Self {
            orders,
            eta,
            theta,
            variant,
        })
    }

    pub fn tp1() -> Self {
        Self {
            orders: FracOrders::new(0.5, 1.2, 0.2, 1.8, 1.0, 1.0).expect("valid orders"),
            eta: 4.0,
            theta: 4.0,
            variant: Variant::TP1,
        }
    }

    pub fn tp2() -> Self {
        Self {
            eta: 8.0,
            theta: 8.0,
            variant: Variant::TP2,
            ..Self::tp1()
        }
    }

    /// Viscosity problem; `eps` only changes the operator, never the source.
    pub fn tp3(eps: f64) -> Result<Self> {
        Ok(Self {
            orders: FracOrders::new(0.5, 1.5, 0.5, 1.5, eps, 1.0)?,
            eta: 4.0,
            theta: 4.0,
            variant: Variant::TP3,
        })
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Ok(Self {
            orders: self.orders.with_eps(eps)?,
            ..*self
        })
    }

    /// Space exponent `sigma + eta`.
    pub fn space_exponent(&self) -> f64 {
        self.orders.sigma() + self.eta
    }

    /// Time exponent `s + theta`.
    pub fn time_exponent(&self) -> f64 {
        self.orders.s() + self.theta
    }
}

/// Space and time factors of
/// `u = (1-x)(1+x)^(sigma+eta) E_{1,sigma+eta+1}(1+x) * tau^(s+theta) E_{1,s+theta+1}(tau)`.
pub fn exact_solution(spec: &ProblemSpec) -> Result<(FracPowerSeries, FracPowerSeries)> {
    let c = spec.space_exponent();
    let e = spec.time_exponent();
    // (2 - xi) sum xi^(c+k) / Gamma(c+k+1): coefficient of xi^(c+k) is
    // 2/Gamma(c+k+1) - 1/Gamma(c+k) for k >= 1.
    let r = ml_coeffs(c, SERIES_TERMS)?;
    let space: Vec<f64> = (0..=SERIES_TERMS)
        .map(|k| {
            if k == 0 {
                2.0 * r[0]
            } else {
                2.0 * r[k] - r[k - 1]
            }
        })
        .collect();
    let time = ml_coeffs(e, SERIES_TERMS)?;
    Ok((
        FracPowerSeries::new(Origin::LeftAtMinus1, c, space, 1.0)?,
        FracPowerSeries::new(Origin::LeftAtZero, e, time, 1.0)?,
    ))
}

/// A separable field `X(x) Tm(t)` held as two series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableField {
    pub space: FracPowerSeries,
    pub time: FracPowerSeries,
    pub horizon: f64,
}

impl SeparableField {
    pub fn exact(spec: &ProblemSpec) -> Result<Self> {
        let (space, time) = exact_solution(spec)?;
        Ok(Self {
            space,
            time,
            horizon: spec.orders.horizon,
        })
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        self.space.eval_at(x, self.horizon) * self.time.eval_at(t, self.horizon)
    }

    /// `D_t^r D_x^rho` of the field (left RL in both variables).
    pub fn derivative(&self, r: f64, rho: f64) -> Result<Self> {
        let mut time = series_rl_deriv(&self.time, r)?;
        time.prefactor *= (2.0 / self.horizon).powf(r);
        Ok(Self {
            space: series_rl_deriv(&self.space, rho)?,
            time,
            horizon: self.horizon,
        })
    }
}

/// Source term `f(x, t)`.
pub type SourceFn = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Left side of the equation applied to the exact solution at `spec.orders.eps`,
/// through the series calculus.
pub fn series_source(spec: &ProblemSpec) -> Result<SourceFn> {
    let o = spec.orders;
    let u = SeparableField::exact(spec)?;
    let ut = u.derivative(o.alpha, 0.0)?;
    let ux = u.derivative(0.0, o.beta)?;
    let uv = u.derivative(o.gamma_v, o.mu)?;
    let eps = o.eps;
    Ok(Box::new(move |x, t| {
        ut.value(x, t) - ux.value(x, t) - eps * uv.value(x, t) + u.value(x, t)
    }))
}

/// Closed-form viscosity-problem source written with Mittag-Leffler calls.
/// It is the `eps = 0` source; the `(2/T)^alpha` chain factor of the time
/// derivative is included.
pub fn tp3_display_source(spec: &ProblemSpec) -> SourceFn {
    let o = spec.orders;
    let (alpha, beta, horizon) = (o.alpha, o.beta, o.horizon);
    let c = spec.space_exponent();
    let e = spec.time_exponent();
    let ml = |b: f64, z: f64| mittag_leffler(MLParams::new(1.0, b), z).unwrap_or(f64::NAN);
    let chain = (2.0 / horizon).powf(alpha);
    Box::new(move |x, t| {
        let xi = 1.0 + x;
        let tau = 2.0 * t / horizon;
        let e_time = ml(e + 1.0, tau);
        let first = xi.powf(c)
            * (1.0 - x)
            * ml(c + 1.0, xi)
            * (chain * tau.powf(e - alpha) * ml(e - alpha + 1.0, tau) + tau.powf(e) * e_time);
        let second = xi.powf(c - beta)
            * tau.powf(e)
            * e_time
            * ((1.0 - x) * ml(c - beta + 1.0, xi) - beta * xi * ml(c - beta + 2.0, xi));
        first - second
    })
}

/// Source for a problem: the series path for TP1/TP2, the fixed `eps = 0`
/// closed form for TP3.
pub fn manufactured_source(spec: &ProblemSpec) -> Result<SourceFn> {
    match spec.variant {
        Variant::TP1 | Variant::TP2 => series_source(spec),
        Variant::TP3 => Ok(tp3_display_source(spec)),
    }
}

const STENCIL_STEP: f64 = 1e-3;
const GRADING_LEVELS: usize = 48;

// Pieces of the integral I^nu f(z) over [a, z].
struct FracIntegral {
    nu: f64,
    near_end: QuadratureRule,
    legendre: QuadratureRule,
    gamma_nu: f64,
}

impl FracIntegral {
    fn new(nu: f64, n_quad: usize) -> Result<Self> {
        Ok(Self {
            nu,
            near_end: jacobi_gauss(n_quad, JacobiParams::new(nu - 1.0, 0.0))?,
            legendre: jacobi_gauss(n_quad, JacobiParams::LEGENDRE)?,
            gamma_nu: gamma(nu)?,
        })
    }

    fn eval(&self, f: &dyn Fn(f64) -> f64, a: f64, z: f64) -> Result<f64> {
        let len = z - a;
        let mid = a + 0.5 * len;
        // [mid, z] carries the kernel singularity as a Jacobi weight.
        let half = 0.5 * (z - mid);
        let mut sum = half.powf(self.nu)
            * self
                .near_end
                .iter()
                .map(|(y, w)| w * f(mid + half * (1.0 + y)))
                .sum::<f64>();
        // [a, mid] is graded geometrically toward a to absorb a power singularity of f.
        let mut hi = mid;
        for level in 0..=GRADING_LEVELS {
            let lo = if level == GRADING_LEVELS {
                a
            } else {
                a + 0.5 * (hi - a)
            };
            let piece = map_to_interval(&self.legendre, lo, hi)?;
            sum += piece
                .iter()
                .map(|(tau, w)| w * (z - tau).powf(self.nu - 1.0) * f(tau))
                .sum::<f64>();
            hi = lo;
        }
        if !sum.is_finite() {
            return Err(Error::NonFinite {
                at: format!("fractional integral at z = {z}"),
            });
        }
        Ok(sum / self.gamma_nu)
    }
}

/// Left RL derivative `(d/dz)^n I^(n-p) f(z)` from `a`, with the fractional
/// integral by quadrature and the outer derivative by a sixth-order central
/// stencil. Meant as a cross-check at around `1e-7`, not a production path.
pub fn rl_left_numeric(
    f: &dyn Fn(f64) -> f64,
    p: f64,
    a: f64,
    z: f64,
    n_quad: usize,
) -> Result<f64> {
    if !(p > 0.0 && p < 2.0) || p == 1.0 {
        return Err(domain(
            "rl_left_numeric",
            format!("order {p} must lie in (0, 1) or (1, 2)"),
        ));
    }
    if !(z > a) {
        return Err(domain(
            "rl_left_numeric",
            format!("z = {z} must exceed a = {a}"),
        ));
    }
    let n = p.ceil() as usize;
    let integral = FracIntegral::new(n as f64 - p, n_quad)?;
    let h = STENCIL_STEP.min((z - a) / 8.0);
    let g = |k: i32| integral.eval(f, a, z + k as f64 * h);
    let d = if n == 1 {
        (-g(-3)? + 9.0 * g(-2)? - 45.0 * g(-1)? + 45.0 * g(1)? - 9.0 * g(2)? + g(3)?) / (60.0 * h)
    } else {
        (2.0 * g(-3)? - 27.0 * g(-2)? + 270.0 * g(-1)? - 490.0 * g(0)? + 270.0 * g(1)?
            - 27.0 * g(2)?
            + 2.0 * g(3)?)
            / (180.0 * h * h)
    };
    Ok(d)
}

/// Right RL derivative from `b`, by reflection onto the left case.
pub fn rl_right_numeric(
    f: &dyn Fn(f64) -> f64,
    p: f64,
    b: f64,
    z: f64,
    n_quad: usize,
) -> Result<f64> {
    if !(z < b) {
        return Err(domain(
            "rl_right_numeric",
            format!("z = {z} must be below b = {b}"),
        ));
    }
    let reflected = |y: f64| f(-y);
    rl_left_numeric(&reflected, p, -b, -z, n_quad)
}
