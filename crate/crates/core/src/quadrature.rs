//! Gauss-type quadrature for Jacobi weights `(1 - x)^a (1 + x)^b` on [-1, 1].
//!
//! Gauss nodes come from the eigenvalues of the Jacobi matrix (Golub-Welsch),
//! polished by Newton steps on `P_n`. Weights use the Christoffel function so
//! they stay accurate for fractional exponents.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{domain, Error, Result};
use crate::specfun::{jacobi_deriv, jacobi_eval, jacobi_eval_all, jacobi_norm_const, JacobiParams};

/// Which endpoints, if any, are pinned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Gauss,
    RadauLeft,
    RadauRight,
    Lobatto,
}

/// Endpoint pinned by a Radau rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    pub params: JacobiParams,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Interval the nodes live on; `(-1, 1)` until mapped.
    pub interval: (f64, f64),
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Iterator over `(node, weight)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Total mass `2^{a+b+1} B(a+1, b+1)` of the weight.
pub fn weight_mass(p: JacobiParams) -> Result<f64> {
    jacobi_norm_const(0, p)
}

/// `n`-point Jacobi-Gauss rule, exact for degree `2n - 1`.
pub fn jacobi_gauss(n: usize, p: JacobiParams) -> Result<QuadratureRule> {
    p.check_classical("jacobi_gauss")?;
    if n == 0 {
        return Err(domain("jacobi_gauss", "need at least one node"));
    }
    let nodes = gauss_nodes(n, p)?;
    let weights = christoffel_weights(n, p, &nodes)?;
    finish(RuleKind::Gauss, p, nodes, weights)
}

/// `n`-point Jacobi-Gauss-Radau rule with one node pinned at an endpoint,
/// exact for degree `2n - 2`.
pub fn jacobi_gauss_radau(n: usize, p: JacobiParams, fixed: Endpoint) -> Result<QuadratureRule> {
    p.check_classical("jacobi_gauss_radau")?;
    if n < 2 {
        return Err(domain("jacobi_gauss_radau", "need at least two nodes"));
    }
    // Interior nodes are Gauss nodes for the weight multiplied by (1 +- x).
    let (inner_p, kind) = match fixed {
        Endpoint::Left => (JacobiParams::new(p.a, p.b + 1.0), RuleKind::RadauLeft),
        Endpoint::Right => (JacobiParams::new(p.a + 1.0, p.b), RuleKind::RadauRight),
    };
    let inner = jacobi_gauss(n - 1, inner_p)?;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut interior_mass = 0.0;
    let mut inner_w: Vec<(f64, f64)> = inner
        .iter()
        .map(|(x, w)| {
            let factor = match fixed {
                Endpoint::Left => 1.0 + x,
                Endpoint::Right => 1.0 - x,
            };
            (x, w / factor)
        })
        .collect();
    for &(_, w) in &inner_w {
        interior_mass += w;
    }
    let end_w = endpoint_radau_weight(n, p, fixed).unwrap_or(weight_mass(p)? - interior_mass);
    match fixed {
        Endpoint::Left => {
            nodes.push(-1.0);
            weights.push(end_w);
            for (x, w) in inner_w.drain(..) {
                nodes.push(x);
                weights.push(w);
            }
        }
        Endpoint::Right => {
            for (x, w) in inner_w.drain(..) {
                nodes.push(x);
                weights.push(w);
            }
            nodes.push(1.0);
            weights.push(end_w);
        }
    }
    finish(kind, p, nodes, weights)
}

// Closed-form weight at the pinned endpoint of an n-point Radau rule:
// for the left end, 2^{a+b+1} (b+1) Gamma(b+1)^2 Gamma(n) Gamma(n+a) /
// (Gamma(n+b+1) Gamma(n+a+b+1)); the right end swaps a and b.
fn endpoint_radau_weight(n: usize, p: JacobiParams, fixed: Endpoint) -> Option<f64> {
    use crate::specfun::ln_gamma;
    let (a, b) = match fixed {
        Endpoint::Left => (p.a, p.b),
        Endpoint::Right => (p.b, p.a),
    };
    let nf = n as f64;
    let v = (a + b + 1.0) * std::f64::consts::LN_2
        + (b + 1.0).ln()
        + 2.0 * ln_gamma(b + 1.0).ok()?
        + ln_gamma(nf).ok()?
        + ln_gamma(nf + a).ok()?
        - ln_gamma(nf + b + 1.0).ok()?
        - ln_gamma(nf + a + b + 1.0).ok()?;
    Some(v.exp())
}

/// `n`-point Jacobi-Gauss-Lobatto rule with both endpoints pinned, exact for
/// degree `2n - 3`.
pub fn jacobi_gauss_lobatto(n: usize, p: JacobiParams) -> Result<QuadratureRule> {
    p.check_classical("jacobi_gauss_lobatto")?;
    if n < 2 {
        return Err(domain("jacobi_gauss_lobatto", "need at least two nodes"));
    }
    let mut nodes = vec![-1.0];
    let mut weights = vec![0.0];
    if n > 2 {
        let inner = jacobi_gauss(n - 2, JacobiParams::new(p.a + 1.0, p.b + 1.0))?;
        for (x, w) in inner.iter() {
            nodes.push(x);
            weights.push(w / ((1.0 - x) * (1.0 + x)));
        }
    }
    nodes.push(1.0);
    weights.push(0.0);
    // Endpoint weights from the zeroth and first moments.
    let m0 = weight_mass(p)?;
    let m1 = m0 * (p.b - p.a) / (p.a + p.b + 2.0);
    let (mut s0, mut s1) = (0.0, 0.0);
    for k in 1..n - 1 {
        s0 += weights[k];
        s1 += weights[k] * nodes[k];
    }
    let (r0, r1) = (m0 - s0, m1 - s1);
    weights[0] = 0.5 * (r0 - r1);
    weights[n - 1] = 0.5 * (r0 + r1);
    finish(RuleKind::Lobatto, p, nodes, weights)
}

/// Affine map of a rule from [-1, 1] to `[lo, hi]`; weights pick up only the
/// Jacobian `(hi - lo) / 2`.
pub fn map_to_interval(rule: &QuadratureRule, lo: f64, hi: f64) -> Result<QuadratureRule> {
    if !(lo < hi) {
        return Err(domain(
            "map_to_interval",
            format!("empty interval [{lo}, {hi}]"),
        ));
    }
    let (a0, b0) = rule.interval;
    let scale = (hi - lo) / (b0 - a0);
    let nodes = rule
        .nodes
        .iter()
        .map(|&x| {
            if x == a0 {
                lo
            } else if x == b0 {
                hi
            } else {
                lo + (x - a0) * scale
            }
        })
        .collect();
    let weights = rule.weights.iter().map(|w| w * scale).collect();
    Ok(QuadratureRule {
        kind: rule.kind,
        params: rule.params,
        nodes,
        weights,
        interval: (lo, hi),
    })
}

/// `sum w_i f(x_i)`; the Jacobi weight is carried by the rule, not applied to `f`.
pub fn integrate<F: Fn(f64) -> f64>(rule: &QuadratureRule, f: F) -> Result<f64> {
    let mut acc = 0.0;
    for (x, w) in rule.iter() {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                at: format!("x = {x}"),
            });
        }
        acc += w * v;
    }
    Ok(acc)
}

/// Recurrence coefficients of the monic Jacobi polynomials:
/// `alpha_k` for k < n and `beta_k` for 1 <= k < n.
fn monic_recurrence(n: usize, p: JacobiParams) -> (Vec<f64>, Vec<f64>) {
    let (a, b) = (p.a, p.b);
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let ak = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        alpha.push(ak);
        if k >= 1 {
            let bk = if k == 1 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))
            } else {
                4.0 * kf * (kf + a) * (kf + b) * (kf + a + b) / (s * s * (s + 1.0) * (s - 1.0))
            };
            beta.push(bk);
        }
    }
    (alpha, beta)
}

fn gauss_nodes(n: usize, p: JacobiParams) -> Result<Vec<f64>> {
    let (alpha, beta) = monic_recurrence(n, p);
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        jm[(k, k)] = alpha[k];
        if k + 1 < n {
            let off = beta[k].sqrt();
            jm[(k, k + 1)] = off;
            jm[(k + 1, k)] = off;
        }
    }
    let eig = SymmetricEigen::try_new(jm, f64::EPSILON, 0).ok_or(Error::NonConvergence {
        what: "Jacobi matrix eigenvalue solver",
        iterations: 0,
    })?;
    let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    nodes.sort_by(|x, y| x.total_cmp(y));
    for x in nodes.iter_mut() {
        *x = newton_polish(n, p, *x);
    }
    Ok(nodes)
}

fn newton_polish(n: usize, p: JacobiParams, mut x: f64) -> f64 {
    for _ in 0..3 {
        let d = jacobi_deriv(n, p, 1, x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let step = jacobi_eval(n, p, x) / d;
        // Only accept corrections consistent with an already accurate eigenvalue.
        if !step.is_finite() || step.abs() > 1e-6 {
            break;
        }
        x -= step;
        if step.abs() < 1e-17 {
            break;
        }
    }
    x.clamp(-1.0, 1.0)
}

// w_i = 1 / sum_k P_k(x_i)^2 / gamma_k
fn christoffel_weights(n: usize, p: JacobiParams, nodes: &[f64]) -> Result<Vec<f64>> {
    let norms: Vec<f64> = (0..n)
        .map(|k| jacobi_norm_const(k, p))
        .collect::<Result<_>>()?;
    Ok(nodes
        .iter()
        .map(|&x| {
            let vals = jacobi_eval_all(n - 1, p, x);
            let denom: f64 = vals.iter().zip(&norms).map(|(v, g)| v * v / g).sum();
            1.0 / denom
        })
        .collect())
}

fn finish(
    kind: RuleKind,
    params: JacobiParams,
    nodes: Vec<f64>,
    weights: Vec<f64>,
) -> Result<QuadratureRule> {
    for w in nodes.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::NonConvergence {
                what: "quadrature node ordering",
                iterations: 0,
            });
        }
    }
    if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(Error::NonConvergence {
            what: "quadrature weight positivity",
            iterations: 0,
        });
    }
    Ok(QuadratureRule {
        kind,
        params,
        nodes,
        weights,
        interval: (-1.0, 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::ln_gamma;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Test-only moment of x^k against the Jacobi weight. Starts from the
    /// Beta-function mass and integrates by parts:
    /// (a+b+k+2) m_{k+1} = k m_{k-1} + (b-a) m_k.
    fn jacobi_moment(k: usize, a: f64, b: f64) -> f64 {
        let m0 = (a + b + 1.0) * std::f64::consts::LN_2
            + ln_gamma(a + 1.0).unwrap()
            + ln_gamma(b + 1.0).unwrap()
            - ln_gamma(a + b + 2.0).unwrap();
        let mut prev = 0.0;
        let mut cur = m0.exp();
        for j in 0..k {
            let next = (j as f64 * prev + (b - a) * cur) / (a + b + j as f64 + 2.0);
            prev = cur;
            cur = next;
        }
        cur
    }

    fn check_moments(rule: &QuadratureRule, degree: usize, tol: f64) {
        let (a, b) = (rule.params.a, rule.params.b);
        for k in 0..=degree {
            let got = integrate(rule, |x| x.powi(k as i32)).unwrap();
            let want = jacobi_moment(k, a, b);
            let scale = jacobi_moment(0, a, b);
            assert!(
                (got - want).abs() <= tol * scale,
                "{:?} n={} a={a} b={b} k={k}: {got} vs {want}",
                rule.kind,
                rule.len()
            );
        }
    }

    #[test]
    fn gauss_legendre_small() {
        let r = jacobi_gauss(1, JacobiParams::LEGENDRE).unwrap();
        assert_eq!(r.nodes.len(), 1);
        assert!(r.nodes[0].abs() < 1e-15);
        assert_relative_eq!(r.weights[0], 2.0, max_relative = 1e-14);
        let r = jacobi_gauss(2, JacobiParams::LEGENDRE).unwrap();
        let x = 1.0 / 3f64.sqrt();
        assert_relative_eq!(r.nodes[0], -x, max_relative = 1e-14);
        assert_relative_eq!(r.nodes[1], x, max_relative = 1e-14);
        assert_relative_eq!(r.weights[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(r.weights[1], 1.0, max_relative = 1e-14);
    }

    #[test]
    fn gauss_moment_example() {
        let r = jacobi_gauss(5, JacobiParams::new(0.9, 0.9)).unwrap();
        let got = integrate(&r, |x| x.powi(8)).unwrap();
        assert!((got - jacobi_moment(8, 0.9, 0.9)).abs() < 1e-12);
    }

    #[test]
    fn radau_examples() {
        let r = jacobi_gauss_radau(2, JacobiParams::LEGENDRE, Endpoint::Left).unwrap();
        assert_eq!(r.nodes[0], -1.0);
        assert_relative_eq!(r.nodes[1], 1.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(r.weights[0], 0.5, max_relative = 1e-14);
        assert_relative_eq!(r.weights[1], 1.5, max_relative = 1e-14);

        let r = jacobi_gauss_radau(4, JacobiParams::new(0.25, 0.0), Endpoint::Left).unwrap();
        let got = integrate(&r, |x| x.powi(5)).unwrap();
        assert!((got - jacobi_moment(5, 0.25, 0.0)).abs() < 1e-12);

        let left = jacobi_gauss_radau(3, JacobiParams::LEGENDRE, Endpoint::Left).unwrap();
        let right = jacobi_gauss_radau(3, JacobiParams::LEGENDRE, Endpoint::Right).unwrap();
        for i in 0..3 {
            assert_relative_eq!(right.nodes[2 - i], -left.nodes[i], epsilon = 1e-15);
            assert_relative_eq!(right.weights[2 - i], left.weights[i], max_relative = 1e-14);
        }
    }

    #[test]
    fn radau_endpoint_weight_matches_mass_balance() {
        for &(a, b) in &[(0.25, 0.0), (-0.5, 0.7), (0.9, 0.9)] {
            let p = JacobiParams::new(a, b);
            for n in 2..12 {
                for end in [Endpoint::Left, Endpoint::Right] {
                    let r = jacobi_gauss_radau(n, p, end).unwrap();
                    let total: f64 = r.weights.iter().sum();
                    assert_relative_eq!(total, weight_mass(p).unwrap(), max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn lobatto_examples() {
        let r = jacobi_gauss_lobatto(3, JacobiParams::LEGENDRE).unwrap();
        assert_eq!(r.nodes, vec![-1.0, r.nodes[1], 1.0]);
        assert!(r.nodes[1].abs() < 1e-15);
        assert_relative_eq!(r.weights[0], 1.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(r.weights[1], 4.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(r.weights[2], 1.0 / 3.0, max_relative = 1e-14);
        let r = jacobi_gauss_lobatto(2, JacobiParams::LEGENDRE).unwrap();
        assert_eq!(r.nodes, vec![-1.0, 1.0]);
        assert_relative_eq!(r.weights[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(r.weights[1], 1.0, max_relative = 1e-14);
        let r = jacobi_gauss_lobatto(6, JacobiParams::new(0.9, 0.0)).unwrap();
        let got = integrate(&r, |x| x.powi(9)).unwrap();
        assert!((got - jacobi_moment(9, 0.9, 0.0)).abs() < 1e-11);
    }

    #[test]
    fn map_examples() {
        let r = jacobi_gauss(1, JacobiParams::LEGENDRE).unwrap();
        let m = map_to_interval(&r, 0.0, 2.0).unwrap();
        assert_relative_eq!(m.nodes[0], 1.0, max_relative = 1e-15);
        assert_relative_eq!(m.weights[0], 2.0, max_relative = 1e-15);

        let r = jacobi_gauss_radau(2, JacobiParams::LEGENDRE, Endpoint::Left).unwrap();
        let m = map_to_interval(&r, 0.0, 3.0).unwrap();
        assert_eq!(m.nodes[0], 0.0);

        // int_0^1 t^{1/4} (1-t)^{1/4} dt = B(5/4, 5/4); the mapped weight carries (T/2)^{a+b}
        let r = jacobi_gauss(6, JacobiParams::new(0.25, 0.25)).unwrap();
        let t_end = 1.0;
        let m = map_to_interval(&r, 0.0, t_end).unwrap();
        let got = integrate(&m, |_| 1.0).unwrap() * (t_end / 2.0f64).powf(0.5);
        let want = (2.0 * ln_gamma(1.25).unwrap() - ln_gamma(2.5).unwrap()).exp();
        assert_relative_eq!(got, want, max_relative = 1e-13);
        assert!(map_to_interval(&r, 1.0, 1.0).is_err());
    }

    #[test]
    fn integrate_examples() {
        let r = jacobi_gauss(4, JacobiParams::LEGENDRE).unwrap();
        assert_relative_eq!(integrate(&r, |_| 1.0).unwrap(), 2.0, max_relative = 1e-14);
        assert!(integrate(&r, |x| x.powi(3)).unwrap().abs() < 1e-14);
        let r = jacobi_gauss(8, JacobiParams::new(0.9, 0.9)).unwrap();
        assert_relative_eq!(
            integrate(&r, |x| x.powi(6)).unwrap(),
            jacobi_moment(6, 0.9, 0.9),
            max_relative = 1e-12
        );
        assert!(matches!(
            integrate(&r, |_| f64::NAN),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(jacobi_gauss(0, JacobiParams::LEGENDRE).is_err());
        assert!(jacobi_gauss(3, JacobiParams::new(-1.0, 0.0)).is_err());
        assert!(jacobi_gauss_radau(1, JacobiParams::LEGENDRE, Endpoint::Left).is_err());
        assert!(jacobi_gauss_lobatto(1, JacobiParams::LEGENDRE).is_err());
    }

    #[test]
    fn large_rules_are_valid() {
        for &(a, b) in &[(0.0, 0.0), (0.9, 0.0), (-0.9, 0.9), (0.25, 0.0)] {
            let p = JacobiParams::new(a, b);
            let r = jacobi_gauss(256, p).unwrap();
            assert_relative_eq!(
                r.weights.iter().sum::<f64>(),
                weight_mass(p).unwrap(),
                max_relative = 1e-12
            );
            jacobi_gauss_lobatto(200, p).unwrap();
            jacobi_gauss_radau(200, p, Endpoint::Left).unwrap();
        }
    }

    #[test]
    fn orthogonality_of_jacobi_polynomials() {
        let grid = [-0.75, -0.25, 0.0, 0.25, 0.9];
        for &a in &grid {
            for &b in &grid {
                let p = JacobiParams::new(a, b);
                let r = jacobi_gauss(12, p).unwrap();
                for n in 0..=8 {
                    for m in 0..=8 {
                        let v =
                            integrate(&r, |x| jacobi_eval(n, p, x) * jacobi_eval(m, p, x)).unwrap();
                        if n == m {
                            assert_relative_eq!(
                                v,
                                jacobi_norm_const(n, p).unwrap(),
                                max_relative = 1e-11
                            );
                        } else {
                            assert!(v.abs() < 1e-11, "a={a} b={b} n={n} m={m}: {v}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn norm_const_matches_quadrature() {
        let p = JacobiParams::new(0.25, 0.25);
        let r = jacobi_gauss(6, p).unwrap();
        let q = integrate(&r, |x| jacobi_eval(3, p, x).powi(2)).unwrap();
        assert_relative_eq!(jacobi_norm_const(3, p).unwrap(), q, max_relative = 1e-13);
    }

    proptest! {
        #[test]
        fn every_rule_kind_is_exact(a in -0.9f64..1.0, b in -0.9f64..1.0, n in 2usize..14) {
            let p = JacobiParams::new(a, b);
            check_moments(&jacobi_gauss(n, p).unwrap(), 2 * n - 1, 1e-11);
            check_moments(&jacobi_gauss_radau(n, p, Endpoint::Left).unwrap(), 2 * n - 2, 1e-11);
            check_moments(&jacobi_gauss_radau(n, p, Endpoint::Right).unwrap(), 2 * n - 2, 1e-11);
            check_moments(&jacobi_gauss_lobatto(n, p).unwrap(), 2 * n - 3, 1e-11);
        }

        #[test]
        fn gauss_nodes_interlace(a in -0.9f64..1.0, b in -0.9f64..1.0, n in 1usize..40) {
            let p = JacobiParams::new(a, b);
            let lo = jacobi_gauss(n, p).unwrap();
            let hi = jacobi_gauss(n + 1, p).unwrap();
            for i in 0..n {
                prop_assert!(hi.nodes[i] < lo.nodes[i] && lo.nodes[i] < hi.nodes[i + 1]);
            }
        }

        #[test]
        fn rules_keep_type_invariants(a in -0.9f64..1.0, b in -0.9f64..1.0, n in 2usize..60) {
            let p = JacobiParams::new(a, b);
            for r in [
                jacobi_gauss(n, p).unwrap(),
                jacobi_gauss_radau(n, p, Endpoint::Left).unwrap(),
                jacobi_gauss_radau(n, p, Endpoint::Right).unwrap(),
                jacobi_gauss_lobatto(n, p).unwrap(),
            ] {
                prop_assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(r.nodes.iter().all(|x| (-1.0..=1.0).contains(x)));
                prop_assert!(r.weights.iter().all(|w| *w > 0.0));
                let total: f64 = r.weights.iter().sum();
                prop_assert!((total / weight_mass(p).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }
}
