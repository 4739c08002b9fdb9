//! Adaptive Gauss-Kronrod quadrature for scalar and matrix-valued integrands.

use crate::error::{LabError, Result};
use crate::linalg::CMat;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Values that can be accumulated by the quadrature rules.
pub trait QuadValue: Clone {
    fn zero_like(&self) -> Self;
    fn add_scaled(&mut self, a: f64, other: &Self);
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add_scaled(&mut self, a: f64, other: &Self) {
        *self += a * other;
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for CMat {
    fn zero_like(&self) -> Self {
        CMat::zeros(self.nrows(), self.ncols())
    }
    fn add_scaled(&mut self, a: f64, other: &Self) {
        for j in 0..self.ncols() {
            for i in 0..self.nrows() {
                self[(i, j)] += other[(i, j)] * a;
            }
        }
    }
    fn magnitude(&self) -> f64 {
        self.norm_l2()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        QuadOptions {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuadResult<V> {
    pub value: V,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

fn kronrod<V: QuadValue, F: FnMut(f64) -> V>(f: &mut F, a: f64, b: f64) -> (V, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc.zero_like();
    let mut g = fc.zero_like();
    k.add_scaled(WGK[7], &fc);
    g.add_scaled(WG[3], &fc);
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        k.add_scaled(WGK[j], &f1);
        k.add_scaled(WGK[j], &f2);
        if j % 2 == 1 {
            g.add_scaled(WG[j / 2], &f1);
            g.add_scaled(WG[j / 2], &f2);
        }
    }
    let mut kv = k.zero_like();
    kv.add_scaled(h, &k);
    let mut diff = kv.clone();
    diff.add_scaled(-h, &g);
    (kv, diff.magnitude())
}

/// Globally adaptive G7-K15 quadrature on a finite interval.
pub fn integrate<V: QuadValue, F: FnMut(f64) -> V>(
    mut f: F,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> QuadResult<V> {
    let (v0, e0) = kronrod(&mut f, a, b);
    if a == b {
        return QuadResult {
            value: v0.zero_like(),
            error: 0.0,
            evaluations: 15,
            converged: true,
        };
    }
    let mut pieces: Vec<(f64, f64, V, f64)> = vec![(a, b, v0, e0)];
    let mut evaluations = 15;
    loop {
        let mut total = pieces[0].2.zero_like();
        let mut err = 0.0;
        let mut worst = 0;
        for (i, p) in pieces.iter().enumerate() {
            total.add_scaled(1.0, &p.2);
            err += p.3;
            if p.3 > pieces[worst].3 {
                worst = i;
            }
        }
        let target = opts.abs_tol.max(opts.rel_tol * total.magnitude());
        if err <= target || pieces.len() >= opts.max_subdivisions {
            return QuadResult {
                value: total,
                error: err,
                evaluations,
                converged: err <= target,
            };
        }
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return QuadResult {
                value: total,
                error: err,
                evaluations,
                converged: false,
            };
        }
        let (v1, e1) = kronrod(&mut f, lo, mid);
        let (v2, e2) = kronrod(&mut f, mid, hi);
        evaluations += 30;
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

/// Integrate over the sorted breakpoints, one adaptive run per panel.
pub fn integrate_panels<V: QuadValue, F: FnMut(f64) -> V>(
    mut f: F,
    points: &[f64],
    opts: &QuadOptions,
) -> QuadResult<V> {
    assert!(points.len() >= 2, "need at least one panel");
    let mut out: Option<QuadResult<V>> = None;
    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let r = integrate(&mut f, w[0], w[1], opts);
        out = Some(match out {
            None => r,
            Some(mut acc) => {
                acc.value.add_scaled(1.0, &r.value);
                acc.error += r.error;
                acc.evaluations += r.evaluations;
                acc.converged &= r.converged;
                acc
            }
        });
    }
    out.unwrap_or_else(|| {
        let probe = f(points[0]);
        QuadResult {
            value: probe.zero_like(),
            error: 0.0,
            evaluations: 1,
            converged: true,
        }
    })
}

/// Ratio of consecutive dyadic shells above which the tail is declared divergent.
pub const DIVERGENCE_RATIO: f64 = 0.97;

/// Integral from `start` to +infinity (`direction = 1`) or -infinity (`direction = -1`).
///
/// The half-line is cut into dyadic shells of widths `scale * 2^k`. Once the
/// shell magnitudes decay geometrically the remainder is added as a geometric
/// tail; shells that stop shrinking mark the integral as divergent.
pub fn integrate_half_line<V: QuadValue, F: FnMut(f64) -> V>(
    mut f: F,
    start: f64,
    direction: f64,
    scale: f64,
    opts: &QuadOptions,
) -> Result<QuadResult<V>> {
    let sign = if direction < 0.0 { -1.0 } else { 1.0 };
    let mut total: Option<V> = None;
    let mut error = 0.0;
    let mut evaluations = 0;
    let mut converged = true;
    let mut mags: Vec<f64> = Vec::new();
    let min_shells = 8;
    let max_shells = 70;
    for k in 0..max_shells {
        let lo = scale * ((1u128 << k) as f64 - 1.0);
        let hi = scale * ((1u128 << (k + 1)) as f64 - 1.0);
        let (a, b) = (start + sign * lo, start + sign * hi);
        let shell_opts = QuadOptions {
            abs_tol: opts.abs_tol / 64.0,
            ..*opts
        };
        let r = integrate(&mut f, a.min(b), a.max(b), &shell_opts);
        error += r.error;
        evaluations += r.evaluations;
        converged &= r.converged;
        let m = r.value.magnitude();
        mags.push(m);
        match total.as_mut() {
            None => total = Some(r.value),
            Some(t) => t.add_scaled(1.0, &r.value),
        }
        let tot = total.as_ref().unwrap().magnitude();
        let target = opts.abs_tol.max(opts.rel_tol * tot);
        if k + 1 < min_shells {
            continue;
        }
        let n = mags.len();
        let (m2, m1, m0) = (mags[n - 3], mags[n - 2], mags[n - 1]);
        if m0 <= target * 1e-3 && m1 <= target * 1e-3 {
            break;
        }
        let r1 = if m1 > 0.0 { m0 / m1 } else { f64::INFINITY };
        let r2 = if m2 > 0.0 { m1 / m2 } else { f64::INFINITY };
        if k >= 12 && r1 > DIVERGENCE_RATIO && r2 > DIVERGENCE_RATIO {
            return Err(LabError::Divergent(format!(
                "dyadic shells stopped decaying (ratios {r2:.4}, {r1:.4}) beyond |x| = {:.3e}",
                (start + sign * hi).abs()
            )));
        }
        if r1 < 0.8 && r2 < 0.8 {
            let rr = r1.max(r2);
            let tail = m0 * rr / (1.0 - rr);
            if tail <= target {
                error += tail;
                break;
            }
        }
        if k + 1 == max_shells {
            return Err(LabError::Divergent(format!(
                "no geometric decay after {max_shells} dyadic shells"
            )));
        }
    }
    Ok(QuadResult {
        value: total.unwrap(),
        error,
        evaluations,
        converged,
    })
}

/// Integral over the real line with finite breakpoints, plus two half-line tails.
pub fn integrate_real_line<F: FnMut(f64) -> f64>(
    mut f: F,
    breakpoints: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult<f64>> {
    let mut pts: Vec<f64> = breakpoints.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.is_empty() {
        pts.push(0.0);
    }
    let lo = pts[0];
    let hi = *pts.last().unwrap();
    let scale = ((hi - lo) * 0.5).max(1.0);
    let mut r = if pts.len() >= 2 {
        integrate_panels(&mut f, &pts, opts)
    } else {
        QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            converged: true,
        }
    };
    let right = integrate_half_line(&mut f, hi, 1.0, scale, opts)?;
    let left = integrate_half_line(&mut f, lo, -1.0, scale, opts)?;
    r.value += right.value + left.value;
    r.error += right.error + left.error;
    r.evaluations += right.evaluations + left.evaluations;
    r.converged &= right.converged && left.converged;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x: f64| x.powi(5) - 3.0 * x * x, -1.0, 2.0, &QuadOptions::default());
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn gaussian_on_real_line() {
        let r = integrate_real_line(|x| (-x * x).exp(), &[0.0], &QuadOptions::default()).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn reciprocal_tail_diverges() {
        let r = integrate_half_line(|x: f64| 1.0 / (1.0 + x), 0.0, 1.0, 1.0, &QuadOptions::default());
        assert!(matches!(r, Err(LabError::Divergent(_))));
    }

    #[test]
    fn power_tail_converges() {
        let r = integrate_half_line(|x: f64| (1.0 + x).powi(-3), 0.0, 1.0, 1.0, &QuadOptions::default())
            .unwrap();
        assert!((r.value - 0.5).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn left_tail() {
        let r = integrate_half_line(|x: f64| x.exp(), 0.0, -1.0, 1.0, &QuadOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }
}
