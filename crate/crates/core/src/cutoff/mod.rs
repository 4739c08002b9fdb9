//! Smooth cutoff functions, almost-analytic extensions and weighted norms.

mod extension;
mod profiles;

pub use extension::{eta, eta_prime, remainder_integral, weighted_norm, AnalyticExtension, RemainderEstimate, ETA_PRIME_MAX};
pub use profiles::{GaussianProfile, SmoothProfile};

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::quad::{integrate, QuadOptions};

/// Shape of the bump whose integral defines the cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BumpFamily {
    /// chi' proportional to (u(1-u))^(2m) on (0, 1), u = mu / delta.
    Polynomial { exponent: usize },
    /// chi' proportional to exp(-2 / (u(1-u))).
    Exponential,
}

#[derive(Clone, Debug)]
enum Kind {
    Polynomial { m: usize, beta: f64 },
    Exponential(Arc<ExpBump>),
    Combination(Vec<(f64, CutoffFunction)>),
}

/// Nondecreasing smooth function with chi = 0 on (-inf, 0] and chi = const on [delta, inf).
///
/// The building blocks are normalized to reach 1; positive combinations
/// reach the sum of their coefficients.
#[derive(Clone, Debug)]
pub struct CutoffFunction {
    delta: f64,
    kind: Kind,
}

/// Default bump exponent for order n.
pub fn default_exponent(n: usize) -> usize {
    n + 4
}

/// The polynomial-bump cutoff with exponent n + 4.
pub fn make_cutoff(delta: f64, n: usize) -> Result<CutoffFunction> {
    make_cutoff_family(
        delta,
        n,
        BumpFamily::Polynomial {
            exponent: default_exponent(n),
        },
    )
}

pub fn make_cutoff_family(delta: f64, n: usize, family: BumpFamily) -> Result<CutoffFunction> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(LabError::param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    match family {
        BumpFamily::Polynomial { exponent: m } => {
            if m == 0 || 2 * m < n + 3 {
                return Err(LabError::param(
                    "exponent",
                    format!("bump exponent {m} gives too few derivatives for order {n}"),
                ));
            }
            if m > 40 {
                return Err(LabError::param("exponent", "bump exponent above 40 is not supported"));
            }
            Ok(CutoffFunction {
                delta,
                kind: Kind::Polynomial {
                    m,
                    beta: beta_symmetric(2 * m + 1),
                },
            })
        }
        BumpFamily::Exponential => Ok(CutoffFunction {
            delta,
            kind: Kind::Exponential(Arc::new(ExpBump::new(EXP_MAX_ORDER.max(n + 3)))),
        }),
    }
}

/// xi = xi1 + c xi2, which dominates both xi1' and c xi2' pointwise.
pub fn combine_cutoffs(xi1: &CutoffFunction, xi2: &CutoffFunction, c: f64) -> Result<CutoffFunction> {
    if !(c.is_finite() && c > 0.0) {
        return Err(LabError::param("c", format!("combination weight must be positive, got {c}")));
    }
    let mut parts = Vec::new();
    for (w, f) in [(1.0, xi1), (c, xi2)] {
        match &f.kind {
            Kind::Combination(inner) => parts.extend(inner.iter().map(|(a, g)| (w * a, g.clone()))),
            _ => parts.push((w, f.clone())),
        }
    }
    let out = CutoffFunction {
        delta: xi1.delta.max(xi2.delta),
        kind: Kind::Combination(parts),
    };
    let hi = 1.5 * out.delta;
    for k in 0..1000 {
        let mu = -0.25 * out.delta + (hi + 0.25 * out.delta) * (k as f64 + 0.5) / 1000.0;
        let lhs = out.derivative(1, mu);
        let rhs = xi1.derivative(1, mu) + c * xi2.derivative(1, mu);
        let scale = 1e-12 * (1.0 + rhs.abs());
        if lhs + scale < rhs || lhs + scale < xi1.derivative(1, mu) || lhs + scale < c * xi2.derivative(1, mu) {
            return Err(LabError::Hypothesis(format!("combined cutoff fails to dominate at mu = {mu}")));
        }
    }
    Ok(out)
}

/// Beta(a, a) for integer a.
fn beta_symmetric(a: usize) -> f64 {
    // (a-1)!^2 / (2a-1)!
    let mut b = 1.0;
    for i in 1..a {
        b *= i as f64 / (a as f64 - 1.0 + i as f64);
    }
    b / (2 * a - 1) as f64
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

fn falling(q: usize, i: usize) -> f64 {
    (0..i).map(|j| (q - j) as f64).product()
}

/// d^j/du^j (u(1-u))^q.
fn poly_bump_derivative(q: usize, j: usize, u: f64) -> f64 {
    let v = 1.0 - u;
    let lo = j.saturating_sub(q);
    let hi = j.min(q);
    let mut s = 0.0;
    for i in lo..=hi {
        let sign = if (j - i) % 2 == 0 { 1.0 } else { -1.0 };
        s += sign
            * binomial(j, i)
            * falling(q, i)
            * falling(q, j - i)
            * u.powi((q - i) as i32)
            * v.powi((q - j + i) as i32);
    }
    s
}

/// Regularized incomplete beta I_u(a, a) for integer a, as a binomial tail.
fn incomplete_beta_symmetric(a: usize, u: f64) -> f64 {
    let n = 2 * a - 1;
    let v = 1.0 - u;
    let mut s = 0.0;
    for j in a..=n {
        s += binomial(n, j) * u.powi(j as i32) * v.powi((n - j) as i32);
    }
    s.clamp(0.0, 1.0)
}

const EXP_MAX_ORDER: usize = 16;

/// exp(-2/q) bump, q = u(1-u), with derivative polynomials P_j.
///
/// d^j/du^j exp(-2/q) = P_j(u) q^(-2j) exp(-2/q).
#[derive(Debug)]
struct ExpBump {
    polys: Vec<Vec<f64>>,
    norm: f64,
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] += x;
    }
    out
}

fn poly_eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

impl ExpBump {
    fn new(max_order: usize) -> Self {
        let q = [0.0, 1.0, -1.0];
        let dq = [1.0, -2.0];
        let q2 = poly_mul(&q, &q);
        let qdq = poly_mul(&q, &dq);
        let mut polys = vec![vec![1.0]];
        for j in 0..max_order {
            let p = &polys[j];
            let dp: Vec<f64> = if p.len() > 1 {
                p.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect()
            } else {
                vec![0.0]
            };
            let t1 = poly_mul(&q2, &dp);
            let t2: Vec<f64> = poly_mul(&qdq, p).iter().map(|c| -2.0 * j as f64 * c).collect();
            let t3: Vec<f64> = poly_mul(&dq, p).iter().map(|c| 2.0 * c).collect();
            polys.push(poly_add(&poly_add(&t1, &t2), &t3));
        }
        let raw = |u: f64| {
            let q = u * (1.0 - u);
            if q <= 0.0 {
                0.0
            } else {
                (-2.0 / q).exp()
            }
        };
        let norm = integrate(raw, 0.0, 1.0, &QuadOptions::with_tol(1e-18, 1e-14)).value;
        ExpBump { polys, norm }
    }

    /// j-th derivative of the normalized density g on (0, 1).
    fn density_derivative(&self, j: usize, u: f64) -> f64 {
        if u <= 0.0 || u >= 1.0 {
            return 0.0;
        }
        let q = u * (1.0 - u);
        let expo = -2.0 / q - 2.0 * j as f64 * q.ln();
        if expo < -745.0 {
            return 0.0;
        }
        poly_eval(&self.polys[j], u) * expo.exp() / self.norm
    }

    fn cumulative(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return 1.0;
        }
        let opts = QuadOptions::with_tol(1e-17, 1e-14);
        if u <= 0.5 {
            integrate(|x| self.density_derivative(0, x), 0.0, u, &opts).value.clamp(0.0, 1.0)
        } else {
            (1.0 - integrate(|x| self.density_derivative(0, x), u, 1.0, &opts).value).clamp(0.0, 1.0)
        }
    }
}

impl CutoffFunction {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Highest order for which the derivative evaluator is continuous.
    pub fn smoothness_order(&self) -> usize {
        match &self.kind {
            Kind::Polynomial { m, .. } => 2 * m,
            Kind::Exponential(b) => b.polys.len(),
            Kind::Combination(parts) => parts.iter().map(|(_, f)| f.smoothness_order()).min().unwrap_or(0),
        }
    }

    pub fn family(&self) -> Option<BumpFamily> {
        match &self.kind {
            Kind::Polynomial { m, .. } => Some(BumpFamily::Polynomial { exponent: *m }),
            Kind::Exponential(_) => Some(BumpFamily::Exponential),
            Kind::Combination(_) => None,
        }
    }

    /// Limit value on [delta, inf), equal to the sup norm.
    pub fn sup_norm(&self) -> f64 {
        match &self.kind {
            Kind::Combination(parts) => parts.iter().map(|(a, f)| a * f.sup_norm()).sum(),
            _ => 1.0,
        }
    }

    pub fn value(&self, mu: f64) -> f64 {
        self.derivative(0, mu)
    }

    /// chi^(k)(mu).
    pub fn derivative(&self, k: usize, mu: f64) -> f64 {
        match &self.kind {
            Kind::Combination(parts) => parts.iter().map(|(a, f)| a * f.derivative(k, mu)).sum(),
            Kind::Polynomial { m, beta } => {
                let u = mu / self.delta;
                if k == 0 {
                    if u <= 0.0 {
                        0.0
                    } else if u >= 1.0 {
                        1.0
                    } else {
                        incomplete_beta_symmetric(2 * m + 1, u)
                    }
                } else if u <= 0.0 || u >= 1.0 {
                    0.0
                } else {
                    poly_bump_derivative(2 * m, k - 1, u) / (beta * self.delta.powi(k as i32))
                }
            }
            Kind::Exponential(b) => {
                let u = mu / self.delta;
                if k == 0 {
                    b.cumulative(u)
                } else if k - 1 >= b.polys.len() {
                    f64::NAN
                } else {
                    b.density_derivative(k - 1, u) / self.delta.powi(k as i32)
                }
            }
        }
    }

    /// sqrt(chi'), the smooth square root of the derivative.
    pub fn sqrt_derivative(&self, mu: f64) -> f64 {
        match &self.kind {
            Kind::Polynomial { m, beta } => {
                let u = mu / self.delta;
                if u <= 0.0 || u >= 1.0 {
                    0.0
                } else {
                    (u * (1.0 - u)).powi(*m as i32) / (beta * self.delta).sqrt()
                }
            }
            _ => self.derivative(1, mu).max(0.0).sqrt(),
        }
    }

    /// CSV with columns mu, d0, d1, ..., d_m.
    pub fn tabulate(&self, points: &[f64], path: &Path) -> Result<()> {
        let m = self.smoothness_order();
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["mu".to_string()];
        header.extend((0..=m).map(|k| format!("d{k}")));
        w.write_record(&header)?;
        for &mu in points {
            let mut rec = vec![mu.to_string()];
            rec.extend((0..=m).map(|k| self.derivative(k, mu).to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

impl SmoothProfile for CutoffFunction {
    fn derivative(&self, order: usize, x: f64) -> f64 {
        CutoffFunction::derivative(self, order, x)
    }
    fn smoothness(&self) -> usize {
        self.smoothness_order()
    }
    fn breakpoints(&self) -> Vec<f64> {
        vec![0.0, 0.5 * self.delta, self.delta]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_values() {
        // Beta(3, 3) = 1/30
        assert!((beta_symmetric(3) - 1.0 / 30.0).abs() < 1e-16);
        // Beta(5, 5) = 1/630
        assert!((beta_symmetric(5) - 1.0 / 630.0).abs() < 1e-17);
    }

    #[test]
    fn limits_and_midpoint() {
        let chi = make_cutoff(0.25, 2).unwrap();
        assert_eq!(chi.value(-0.1), 0.0);
        assert_eq!(chi.value(0.0), 0.0);
        assert_eq!(chi.value(0.25), 1.0);
        assert_eq!(chi.value(3.0), 1.0);
        assert!((chi.value(0.125) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let chi = make_cutoff(0.5, 2).unwrap();
        for k in 0..5 {
            for &mu in &[0.05, 0.13, 0.25, 0.41] {
                let h = 1e-5;
                let fd = (chi.derivative(k, mu + h) - chi.derivative(k, mu - h)) / (2.0 * h);
                let exact = chi.derivative(k + 1, mu);
                assert!((fd - exact).abs() <= 1e-5 * (1.0 + exact.abs()), "k={k} mu={mu} {fd} {exact}");
            }
        }
    }

    #[test]
    fn sqrt_derivative_squares_to_derivative() {
        let chi = make_cutoff(0.3, 3).unwrap();
        for i in 1..30 {
            let mu = 0.3 * i as f64 / 30.0;
            let w = chi.sqrt_derivative(mu);
            assert!((w * w - chi.derivative(1, mu)).abs() < 1e-10 * (1.0 + chi.derivative(1, mu)));
        }
        let total = integrate(|mu| chi.sqrt_derivative(mu).powi(2), 0.0, 0.3, &QuadOptions::default()).value;
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn delta_out_of_range() {
        assert!(make_cutoff(0.0, 2).is_err());
        assert!(make_cutoff(1.0, 2).is_err());
        assert!(make_cutoff_family(0.5, 4, BumpFamily::Polynomial { exponent: 3 }).is_err());
    }

    #[test]
    fn exponential_bump_consistent() {
        let chi = make_cutoff_family(0.4, 2, BumpFamily::Exponential).unwrap();
        assert_eq!(chi.value(0.0), 0.0);
        assert_eq!(chi.value(0.4), 1.0);
        assert!((chi.value(0.2) - 0.5).abs() < 1e-12);
        for k in 1..4 {
            for &mu in &[0.1, 0.17, 0.3] {
                let h = 1e-6;
                let fd = (chi.derivative(k, mu + h) - chi.derivative(k, mu - h)) / (2.0 * h);
                let exact = chi.derivative(k + 1, mu);
                assert!((fd - exact).abs() <= 1e-4 * (1.0 + exact.abs()), "k={k} {fd} {exact}");
            }
        }
        let fd = (chi.value(0.15 + 1e-6) - chi.value(0.15 - 1e-6)) / 2e-6;
        assert!((fd - chi.derivative(1, 0.15)).abs() < 1e-6 * (1.0 + fd.abs()));
    }

    #[test]
    fn combination_sup_and_domination() {
        let a = make_cutoff(0.2, 2).unwrap();
        let b = make_cutoff(0.3, 2).unwrap();
        let c = combine_cutoffs(&a, &b, 2.5).unwrap();
        assert!((c.sup_norm() - 3.5).abs() < 1e-15);
        assert!(combine_cutoffs(&a, &b, -1.0).is_err());
    }
}
