//! Petrov-Galerkin matrices, the load matrix, and closed-form Gram entries.
//!
//! Every entry is an integral of a product of two closed-form derivatives.
//! The singular endpoint factors are pulled into a Jacobi weight so the
//! remaining integrand is a polynomial and the Gauss rule is exact.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gjf::{basis_frac_deriv_poly, BasisKind, BasisSet};
use crate::quadrature::{jacobi_gauss, jacobi_gauss_lobatto, jacobi_gauss_radau, Endpoint};
use crate::specfun::{gamma_ratio, gamma_ratio_or_zero, JacobiParams};

/// Which operator a matrix discretizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixRole {
    /// `(D^rho phi_i, D^rho phi-bar_i')` on [-1, 1]
    SpaceP,
    /// `(D^r psi_j, D^r psi-bar_j')` on [0, T]
    TimeQ,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub values: DMatrix<f64>,
    pub role: MatrixRole,
    pub order: f64,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.values.nrows()
    }
}

/// Load matrix `F`, shape `(M - 1) x N`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadMatrix {
    pub values: DMatrix<f64>,
}

/// Default quadrature size `max(M, N) + 12`.
pub fn default_quad_size(basis: &BasisSet) -> usize {
    basis.m.max(basis.n) + 12
}

/// `P_rho` with `p[i][i'] = (D^rho phi_i, D^rho phi-bar_i')`, using the default
/// quadrature size.
pub fn space_matrix(rho: f64, basis: &BasisSet) -> Result<OperatorMatrix> {
    space_matrix_with(rho, basis, default_quad_size(basis))
}

pub fn space_matrix_with(rho: f64, basis: &BasisSet, quad_size: usize) -> Result<OperatorMatrix> {
    if !(0.0..=basis.sigma).contains(&rho) {
        return Err(Error::UnsupportedOrder {
            order: rho,
            limit: basis.sigma,
        });
    }
    let d = basis.sigma - rho;
    let rule = jacobi_gauss(quad_size, JacobiParams::new(d, d))?;
    let dim = basis.space_dim();
    let trial = sample(BasisKind::TrialSpace, dim, rho, basis, &rule.nodes)?;
    let test = sample(BasisKind::TestSpace, dim, rho, basis, &rule.nodes)?;
    Ok(OperatorMatrix {
        values: weighted_product(&trial, &test, &rule.weights, 1.0),
        role: MatrixRole::SpaceP,
        order: rho,
    })
}

/// `Q_r` with `q[j][j'] = (D^r psi_j, D^r psi-bar_j')` on [0, T].
pub fn time_matrix(r: f64, basis: &BasisSet) -> Result<OperatorMatrix> {
    time_matrix_with(r, basis, default_quad_size(basis))
}

pub fn time_matrix_with(r: f64, basis: &BasisSet, quad_size: usize) -> Result<OperatorMatrix> {
    if !(0.0..=basis.s).contains(&r) {
        return Err(Error::UnsupportedOrder {
            order: r,
            limit: basis.s,
        });
    }
    let d = basis.s - r;
    let rule = jacobi_gauss(quad_size, JacobiParams::new(d, d))?;
    let half_t = 0.5 * basis.horizon();
    let times: Vec<f64> = rule.nodes.iter().map(|y| half_t * (y + 1.0)).collect();
    let dim = basis.time_dim();
    let trial = sample(BasisKind::TrialTime, dim, r, basis, &times)?;
    let test = sample(BasisKind::TestTime, dim, r, basis, &times)?;
    // dt = (T/2) dy; the weight (1+y)^d (1-y)^d is carried by the rule
    Ok(OperatorMatrix {
        values: weighted_product(&trial, &test, &rule.weights, half_t),
        role: MatrixRole::TimeQ,
        order: r,
    })
}

// rows: basis index, columns: node
fn sample(
    kind: BasisKind,
    dim: usize,
    order: f64,
    basis: &BasisSet,
    points: &[f64],
) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(dim, points.len());
    for idx in 0..dim {
        for (m, &p) in points.iter().enumerate() {
            out[(idx, m)] = basis_frac_deriv_poly(kind, idx + 1, order, basis, p)?;
        }
    }
    Ok(out)
}

fn weighted_product(a: &DMatrix<f64>, b: &DMatrix<f64>, w: &[f64], scale: f64) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows(), b.nrows());
    for i in 0..a.nrows() {
        for k in 0..b.nrows() {
            let mut acc = 0.0;
            for (m, wm) in w.iter().enumerate() {
                acc += a[(i, m)] * b[(k, m)] * wm;
            }
            out[(i, k)] = scale * acc;
        }
    }
    out
}

/// Closed tridiagonal form of `P_sigma`: Legendre products
/// `(L_{i-1} - c_i L_i, L_{i'-1} + c_{i'} L_{i'})` with `c_i = (i+sigma)/(i-sigma)`.
pub fn p_sigma_closed(i: usize, i_prime: usize, sigma: f64) -> f64 {
    let c = |n: usize| (n as f64 + sigma) / (n as f64 - sigma);
    let h = |n: usize| 2.0 / (2.0 * n as f64 + 1.0);
    if i == i_prime {
        2.0 / (2.0 * i as f64 - 1.0) - c(i).powi(2) * h(i)
    } else if i + 1 == i_prime {
        -c(i) * h(i)
    } else if i == i_prime + 1 {
        c(i_prime) * h(i_prime)
    } else {
        0.0
    }
}

/// Weighted trial Gram `(D^rho phi_i, D^rho phi_i')` against
/// `(1-x)^{rho-sigma} (1+x)^{rho-sigma}`, in closed form.
pub fn gram_space_closed(rho: f64, i: usize, i_prime: usize, basis: &BasisSet) -> Result<f64> {
    let sigma = basis.sigma;
    if !(0.0..=sigma).contains(&rho) {
        return Err(Error::UnsupportedOrder {
            order: rho,
            limit: sigma,
        });
    }
    let d = sigma - rho;
    let c = |n: f64| (n + sigma) / (n - sigma);
    let ratio = |n: f64| gamma_ratio(n - d + 1.0, n + d + 1.0);
    let lo = i.min(i_prime) as f64;
    if i == i_prime {
        let n = i as f64;
        Ok(
            (2.0 / (2.0 * n - 1.0) * (n + d) / (n - d) + 2.0 / (2.0 * n + 1.0) * c(n).powi(2))
                * ratio(n)?,
        )
    } else if i.abs_diff(i_prime) == 1 {
        Ok(-2.0 / (2.0 * lo + 1.0) * c(lo) * ratio(lo)?)
    } else {
        Ok(0.0)
    }
}

/// Weighted trial Gram in time, `(D^r psi_j, D^r psi_j')` against the
/// reference-variable weight `(1-y)^{r-s} (1+y)^{r-s}`, `y = 2t/T - 1`:
/// `(T/2)^{2(s-r)} Gamma(j-s+r) / Gamma(j+s-r) delta_jj'`.
pub fn gram_time_closed(r: f64, j: usize, j_prime: usize, basis: &BasisSet) -> Result<f64> {
    let s = basis.s;
    if !(0.0..=s).contains(&r) {
        return Err(Error::UnsupportedOrder { order: r, limit: s });
    }
    if j != j_prime {
        return Ok(0.0);
    }
    let jf = j as f64;
    Ok((0.5 * basis.horizon()).powf(2.0 * (s - r)) * gamma_ratio(jf - s + r, jf + s - r)?)
}

/// `(D^{sigma+k} phi_i, D^{sigma+k} phi_i')` against `(1-x)^k (1+x)^k`.
pub fn gram_space_augmented(k: usize, i: usize, i_prime: usize, basis: &BasisSet) -> Result<f64> {
    let sigma = basis.sigma;
    let kf = k as f64;
    let c = |n: f64| (n + sigma) / (n - sigma);
    // Gamma(n+k+1)/Gamma(n-k+1), zero once n < k
    let ratio = |n: f64| gamma_ratio_or_zero(n + kf + 1.0, n - kf + 1.0);
    if i == i_prime {
        let n = i as f64;
        Ok(
            (2.0 / (2.0 * n - 1.0) * (n - kf) / (n + kf) + 2.0 / (2.0 * n + 1.0) * c(n).powi(2))
                * ratio(n)?,
        )
    } else if i.abs_diff(i_prime) == 1 {
        let lo = i.min(i_prime) as f64;
        Ok(-2.0 / (2.0 * lo + 1.0) * c(lo) * ratio(lo)?)
    } else {
        Ok(0.0)
    }
}

/// `(D^{s+l} psi_j, D^{s+l} psi_j')` against the reference-variable weight
/// `(1-y)^l (1+y)^l`: `(T/2)^{-2l} Gamma(j+l) / Gamma(j-l) delta_jj'`.
pub fn gram_time_augmented(l: usize, j: usize, j_prime: usize, basis: &BasisSet) -> Result<f64> {
    if j != j_prime {
        return Ok(0.0);
    }
    let (jf, lf) = (j as f64, l as f64);
    Ok((0.5 * basis.horizon()).powf(-2.0 * lf) * gamma_ratio_or_zero(jf + lf, jf - lf)?)
}

/// Load matrix `f[i'][j'] = (f, phi-bar_i' psi-bar_j')` over `[-1,1] x [0,T]`.
///
/// Space uses a Gauss-Lobatto rule for the weight `(1-x)^sigma`, time a
/// Gauss-Radau rule for `(T-t)^s` pinned at `t = 0`, so the divided basis
/// factors are polynomials and every sample is finite.
pub fn load_matrix<F: Fn(f64, f64) -> f64>(
    f: F,
    basis: &BasisSet,
    quad_size: usize,
) -> Result<LoadMatrix> {
    let sigma = basis.sigma;
    let s = basis.s;
    let half_t = 0.5 * basis.horizon();
    let space = jacobi_gauss_lobatto(quad_size, JacobiParams::new(sigma, 0.0))?;
    let time = jacobi_gauss_radau(quad_size, JacobiParams::new(s, 0.0), Endpoint::Left)?;
    let times: Vec<f64> = time.nodes.iter().map(|y| half_t * (y + 1.0)).collect();
    // phi-bar / (1-x)^sigma and psi-bar / (T-t)^s = (2/T)^s * (psi-bar / (1-y)^s)
    let phi = sample(
        BasisKind::TestSpace,
        basis.space_dim(),
        0.0,
        basis,
        &space.nodes,
    )?;
    let psi =
        sample(BasisKind::TestTime, basis.time_dim(), 0.0, basis, &times)?.scale(half_t.powf(-s));
    // (T - t)^s dt = (T/2)^{1+s} (1-y)^s dy
    let time_scale = half_t.powf(1.0 + s);
    let mut grid = DMatrix::zeros(space.len(), times.len());
    for (m, &x) in space.nodes.iter().enumerate() {
        for (n, &t) in times.iter().enumerate() {
            let v = f(x, t);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    at: format!("f(x = {x}, t = {t})"),
                });
            }
            grid[(m, n)] = v * space.weights[m] * time.weights[n] * time_scale;
        }
    }
    Ok(LoadMatrix {
        values: &phi * grid * psi.transpose(),
    })
}
