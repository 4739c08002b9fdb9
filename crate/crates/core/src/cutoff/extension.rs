use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::SmoothProfile;
use crate::error::{LabError, Result};
use crate::quad::{integrate_panels, integrate_real_line, QuadOptions};

/// sup |eta'| for the quintic smoothstep transition.
pub const ETA_PRIME_MAX: f64 = 15.0 / 8.0;

/// 1 on [-1, 1], 0 outside [-2, 2], quintic smoothstep in between.
pub fn eta(mu: f64) -> f64 {
    let a = mu.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let u = a - 1.0;
        1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }
}

pub fn eta_prime(mu: f64) -> f64 {
    let a = mu.abs();
    if a <= 1.0 || a >= 2.0 {
        0.0
    } else {
        let u = a - 1.0;
        -mu.signum() * 30.0 * u * u * (1.0 - u) * (1.0 - u)
    }
}

fn bracket(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// f~(x + iy) = eta(y / <x>) sum_{k <= nu+1} f^(k)(x) (iy)^k / k!.
#[derive(Clone)]
pub struct AnalyticExtension {
    f: Arc<dyn SmoothProfile>,
    nu: usize,
}

impl std::fmt::Debug for AnalyticExtension {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("AnalyticExtension").field("nu", &self.nu).finish()
    }
}

impl AnalyticExtension {
    pub fn new(f: Arc<dyn SmoothProfile>, nu: usize) -> Result<Self> {
        if f.smoothness() < nu + 2 {
            return Err(LabError::param(
                "nu",
                format!("profile has {} derivatives, extension order {nu} needs {}", f.smoothness(), nu + 2),
            ));
        }
        Ok(AnalyticExtension { f, nu })
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn profile(&self) -> &dyn SmoothProfile {
        self.f.as_ref()
    }

    fn taylor(&self, x: f64, y: f64) -> (C64, f64) {
        let mut s = C64::new(0.0, 0.0);
        let mut term = C64::new(1.0, 0.0);
        for k in 0..=self.nu + 1 {
            if k > 0 {
                term *= C64::new(0.0, y) / k as f64;
            }
            s += term * self.f.derivative(k, x);
        }
        (s, self.f.derivative(self.nu + 2, x))
    }

    pub fn value(&self, z: C64) -> C64 {
        let e = eta(z.im / bracket(z.re));
        if e == 0.0 {
            return C64::new(0.0, 0.0);
        }
        self.taylor(z.re, z.im).0 * e
    }

    /// (d/dx + i d/dy) f~ in closed form.
    pub fn dzbar(&self, z: C64) -> C64 {
        let (x, y) = (z.re, z.im);
        let bx = bracket(x);
        let mu = y / bx;
        let e = eta(mu);
        let ep = eta_prime(mu);
        if e == 0.0 && ep == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let (s, top) = self.taylor(x, y);
        let mut out = C64::new(0.0, 0.0);
        if ep != 0.0 {
            out += C64::new(-y * x / (bx * bx * bx), 1.0 / bx) * s * ep;
        }
        if e != 0.0 && top != 0.0 {
            let mut c = C64::new(1.0, 0.0);
            for k in 1..=self.nu + 1 {
                c *= C64::new(0.0, y) / k as f64;
            }
            out += c * top * e;
        }
        out
    }

    /// Density of df~ = -(1/2 pi) dzbar f~ dx dy.
    pub fn density(&self, z: C64) -> C64 {
        -self.dzbar(z) / (2.0 * PI)
    }
}

/// sum_{m=0}^{nu+2} int <x>^(m-p-1) |f^(m)(x)| dx.
pub fn weighted_norm(f: &dyn SmoothProfile, p: usize, nu: usize) -> Result<f64> {
    if f.smoothness() < nu + 2 {
        return Err(LabError::param("nu", "profile is not smooth enough for this order"));
    }
    let opts = QuadOptions::with_tol(1e-13, 1e-10);
    let integrand = |x: f64| {
        let b = bracket(x);
        (0..=nu + 2)
            .map(|m| b.powi(m as i32 - p as i32 - 1) * f.derivative(m, x).abs())
            .sum::<f64>()
    };
    let r = integrate_real_line(integrand, &f.breakpoints(), &opts)?;
    if !r.converged {
        return Err(LabError::Quadrature(format!("weighted norm: error estimate {:.3e}", r.error)));
    }
    Ok(r.value)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RemainderEstimate {
    pub value: f64,
    pub error: f64,
}

/// int |df~| |Im z|^(-p-1) over the plane.
///
/// The integrand vanishes like |y|^(nu - p) at the real axis, so no strip
/// needs to be removed for p <= nu.
pub fn remainder_integral(ext: &AnalyticExtension, p: usize) -> Result<RemainderEstimate> {
    if p > ext.nu() {
        return Err(LabError::param(
            "p",
            format!("order {p} exceeds the extension order {}; the integral diverges at Im z = 0", ext.nu()),
        ));
    }
    let opts = QuadOptions::with_tol(1e-12, 1e-9);
    let inner_opts = QuadOptions::with_tol(1e-14, 1e-10);
    let mut inner_error = 0.0f64;
    let mut inner_ok = true;
    let outer = |x: f64| {
        let b = bracket(x);
        let r = integrate_panels(
            |y: f64| ext.dzbar(C64::new(x, y)).norm() * y.powi(-(p as i32) - 1),
            &[0.0, b, 2.0 * b],
            &inner_opts,
        );
        inner_error = inner_error.max(r.error);
        inner_ok &= r.converged;
        r.value / PI
    };
    let mut pts = ext.profile().breakpoints();
    pts.push(0.0);
    let r = integrate_real_line(outer, &pts, &opts)?;
    if !r.converged || !inner_ok {
        return Err(LabError::Quadrature(format!(
            "remainder integral did not converge (outer error {:.3e}, worst inner error {:.3e})",
            r.error, inner_error
        )));
    }
    Ok(RemainderEstimate {
        value: r.value,
        error: r.error,
    })
}
