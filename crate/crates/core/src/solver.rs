//! The discrete matrix equation
//! `P0^T U Q_{alpha/2} - P_{beta/2}^T U Q0 - eps P_{mu/2}^T U Q_{gamma/2} + P0^T U Q0 = F`
//! and evaluation of its solution.
//!
//! Stacking is column-major: index `i + j (M - 1)` holds `U[i][j]`, so all
//! space modes of time mode 1 come first. Under that ordering
//! `vec(A^T U Q) = (Q^T kron A^T) vec(U)`.

use std::sync::atomic::{AtomicBool, Ordering};

use log::{debug, warn};
use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::assembly::{
    default_quad_size, space_matrix_with, time_matrix_with, LoadMatrix, MatrixRole, OperatorMatrix,
};
use crate::error::{Error, Result};
use crate::gjf::{basis_frac_deriv, BasisKind, BasisSet};

/// The six operator matrices of the discrete problem.
#[derive(Debug, Clone)]
pub struct Operators {
    pub p0: OperatorMatrix,
    pub p_beta: OperatorMatrix,
    pub p_mu: OperatorMatrix,
    pub q_alpha: OperatorMatrix,
    pub q0: OperatorMatrix,
    pub q_gamma: OperatorMatrix,
}

impl Operators {
    pub fn assemble(basis: &BasisSet, quad_size: usize) -> Result<Self> {
        let o = &basis.orders;
        Ok(Self {
            p0: space_matrix_with(0.0, basis, quad_size)?,
            p_beta: space_matrix_with(0.5 * o.beta, basis, quad_size)?,
            p_mu: space_matrix_with(0.5 * o.mu, basis, quad_size)?,
            q_alpha: time_matrix_with(0.5 * o.alpha, basis, quad_size)?,
            q0: time_matrix_with(0.0, basis, quad_size)?,
            q_gamma: time_matrix_with(0.5 * o.gamma_v, basis, quad_size)?,
        })
    }

    /// Left side of the matrix equation applied to `u`.
    pub fn apply(&self, u: &DMatrix<f64>, eps: f64) -> DMatrix<f64> {
        let p0t = self.p0.values.transpose();
        let a = &p0t * u * &self.q_alpha.values;
        let b = self.p_beta.values.transpose() * u * &self.q0.values;
        let c = self.p_mu.values.transpose() * u * &self.q_gamma.values;
        let d = &p0t * u * &self.q0.values;
        a - b - c * eps + d
    }
}

/// Dense Kronecker form of the matrix equation.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: DMatrix<f64>,
    pub space_dim: usize,
    pub time_dim: usize,
}

impl LinearSystem {
    /// Position of `U[i][j]` (zero-based) in the stacked vector.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i + j * self.space_dim
    }

    pub fn stack(&self, u: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_column_slice(u.as_slice())
    }

    pub fn unstack(&self, v: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.space_dim, self.time_dim, v.as_slice())
    }
}

fn check_role(m: &OperatorMatrix, role: MatrixRole, name: &str) -> Result<()> {
    if m.role != role || !m.values.is_square() {
        return Err(Error::Shape(format!(
            "{name} must be a square {role:?} matrix"
        )));
    }
    Ok(())
}

/// Assemble `Q_a^T kron P0^T - Q0^T kron P_b^T - eps Q_g^T kron P_m^T + Q0^T kron P0^T`.
pub fn build_system(
    p0: &OperatorMatrix,
    p_beta: &OperatorMatrix,
    p_mu: &OperatorMatrix,
    q_alpha: &OperatorMatrix,
    q0: &OperatorMatrix,
    q_gamma: &OperatorMatrix,
    eps: f64,
) -> Result<LinearSystem> {
    for (m, name) in [(p0, "P0"), (p_beta, "P_beta"), (p_mu, "P_mu")] {
        check_role(m, MatrixRole::SpaceP, name)?;
    }
    for (m, name) in [(q_alpha, "Q_alpha"), (q0, "Q0"), (q_gamma, "Q_gamma")] {
        check_role(m, MatrixRole::TimeQ, name)?;
    }
    let ms = p0.dim();
    let nt = q0.dim();
    if p_beta.dim() != ms || p_mu.dim() != ms || q_alpha.dim() != nt || q_gamma.dim() != nt {
        return Err(Error::Shape("operator dimensions disagree".into()));
    }
    let p0t = p0.values.transpose();
    let pbt = p_beta.values.transpose();
    let pmt = p_mu.values.transpose();
    let dim = ms * nt;
    let mut k = DMatrix::zeros(dim, dim);
    // block (j, j') = Q_a[j'][j] P0^T - Q0[j'][j] P_b^T - eps Q_g[j'][j] P_m^T + Q0[j'][j] P0^T
    for j in 0..nt {
        for jp in 0..nt {
            let (qa, qz, qg) = (
                q_alpha.values[(jp, j)],
                q0.values[(jp, j)],
                q_gamma.values[(jp, j)],
            );
            for a in 0..ms {
                for b in 0..ms {
                    let v = (qa + qz) * p0t[(a, b)] - qz * pbt[(a, b)] - eps * qg * pmt[(a, b)];
                    k[(a + j * ms, b + jp * ms)] = v;
                }
            }
        }
    }
    Ok(LinearSystem {
        matrix: k,
        space_dim: ms,
        time_dim: nt,
    })
}

/// Spectral coefficients `U[i][j]` of `u_L = sum U_ij phi_i(x) psi_j(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffMatrix {
    pub values: DMatrix<f64>,
    pub basis: BasisSet,
}

/// Outcome of a solve with diagnostics.
#[derive(Debug, Clone)]
pub struct Solution {
    pub coeffs: DMatrix<f64>,
    pub condition: f64,
    pub residual: f64,
}

/// Dense LU solve of the stacked system. Fails when the one-norm condition
/// estimate exceeds `1 / f64::EPSILON`.
pub fn solve(system: &LinearSystem, load: &LoadMatrix) -> Result<Solution> {
    let (ms, nt) = (system.space_dim, system.time_dim);
    if load.values.shape() != (ms, nt) {
        return Err(Error::Shape(format!(
            "load is {:?}, expected ({ms}, {nt})",
            load.values.shape()
        )));
    }
    let lu = system.matrix.clone().lu();
    let rhs = system.stack(&load.values);
    let x = lu.solve(&rhs).ok_or(Error::Singular {
        condition: f64::INFINITY,
    })?;
    let condition =
        one_norm(&system.matrix) * inverse_one_norm_estimate(&lu, system.matrix.nrows());
    if !(condition < 1.0 / f64::EPSILON) {
        return Err(Error::Singular { condition });
    }
    debug!(
        "solve: dimension {} condition estimate {condition:.3e}",
        system.matrix.nrows()
    );
    let residual = (&system.matrix * &x - &rhs).amax();
    let scale = 1.0 + rhs.amax();
    if residual > 1e-10 * scale {
        warn!("solve: residual {residual:.3e} exceeds 1e-10 (1 + |F|)");
    }
    Ok(Solution {
        coeffs: system.unstack(&x),
        condition,
        residual,
    })
}

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter().map(|c| c.lp_norm(1)).fold(0.0, f64::max)
}

// Hager's estimator for ||A^{-1}||_1 using solves with A and A^T.
fn inverse_one_norm_estimate(lu: &LU<f64, Dyn, Dyn>, n: usize) -> f64 {
    let l = lu.l();
    let u = lu.u();
    let p = lu.p();
    let solve_t = |b: &DVector<f64>| -> Option<DVector<f64>> {
        // A = P^{-1} L U, so A^T x = b  <=>  U^T L^T (P x) = b
        let z = u.tr_solve_upper_triangular(b)?;
        let mut w = l.tr_solve_lower_triangular(&z)?;
        p.inv_permute_rows(&mut w);
        Some(w)
    };
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut est = 0.0;
    for _ in 0..5 {
        let Some(y) = lu.solve(&x) else {
            return f64::INFINITY;
        };
        est = y.lp_norm(1);
        let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let Some(z) = solve_t(&xi) else {
            return f64::INFINITY;
        };
        let (jmax, zmax) =
            z.iter().enumerate().fold(
                (0, 0.0),
                |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc },
            );
        if zmax <= z.dot(&x) {
            break;
        }
        x.fill(0.0);
        x[jmax] = 1.0;
    }
    est
}

// sweeps repeat the same out-of-bound eps many times; say it once
static EPS_WARNED: AtomicBool = AtomicBool::new(false);

/// Assemble and solve the full problem for a load function.
pub fn solve_problem<F: Fn(f64, f64) -> f64>(
    basis: &BasisSet,
    f: F,
    quad_size: Option<usize>,
) -> Result<(CoeffMatrix, Solution)> {
    let q = quad_size.unwrap_or_else(|| default_quad_size(basis));
    if !basis.orders.eps_within_bound() && !EPS_WARNED.swap(true, Ordering::Relaxed) {
        warn!(
            "eps = {} exceeds the well-posedness bound {}",
            basis.orders.eps,
            basis.orders.eps_max()
        );
    }
    let ops = Operators::assemble(basis, q)?;
    let system = build_system(
        &ops.p0,
        &ops.p_beta,
        &ops.p_mu,
        &ops.q_alpha,
        &ops.q0,
        &ops.q_gamma,
        basis.orders.eps,
    )?;
    let load = crate::assembly::load_matrix(f, basis, q)?;
    let sol = solve(&system, &load)?;
    Ok((
        CoeffMatrix {
            values: sol.coeffs.clone(),
            basis: *basis,
        },
        sol,
    ))
}

impl CoeffMatrix {
    pub fn zeros(basis: &BasisSet) -> Self {
        Self {
            values: DMatrix::zeros(basis.space_dim(), basis.time_dim()),
            basis: *basis,
        }
    }
}

/// `u_L(x, t)`
pub fn evaluate(u: &CoeffMatrix, x: f64, t: f64) -> Result<f64> {
    evaluate_frac_deriv(u, 0.0, 0.0, x, t)
}

/// `D_t^r D_x^rho u_L(x, t)` with left RL derivatives in both variables.
pub fn evaluate_frac_deriv(u: &CoeffMatrix, r: f64, rho: f64, x: f64, t: f64) -> Result<f64> {
    let b = &u.basis;
    let phi: Vec<f64> = (1..=b.space_dim())
        .map(|i| basis_frac_deriv(BasisKind::TrialSpace, i, rho, b, x))
        .collect::<Result<_>>()?;
    let psi: Vec<f64> = (1..=b.time_dim())
        .map(|j| basis_frac_deriv(BasisKind::TrialTime, j, r, b, t))
        .collect::<Result<_>>()?;
    let mut acc = 0.0;
    for (j, pj) in psi.iter().enumerate() {
        let mut col = 0.0;
        for (i, pi) in phi.iter().enumerate() {
            col += u.values[(i, j)] * pi;
        }
        acc += col * pj;
    }
    Ok(acc)
}
