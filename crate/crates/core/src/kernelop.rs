//! Kernels J, assembled nonlocal operators and their speed bounds.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::lattice::{lipschitz_constant, Boundary, Lattice, RealField};
use crate::linalg::{to_complex, CMat, RMat};
use crate::quad::{integrate, integrate_half_line, QuadOptions};

/// Radial kernel families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelFamily {
    /// J = 0.
    Zero,
    /// (1 + |x|^2)^(-a/2).
    PowerLaw { a: f64 },
    /// exp(-|x|^2 / sigma^2).
    Gaussian { sigma: f64 },
    /// Indicator of |x| <= radius.
    Compact { radius: f64 },
    /// |x|^(-b), held at epsilon^(-b) inside |x| < epsilon.
    SingularPower { b: f64, epsilon: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    #[serde(flatten)]
    pub family: KernelFamily,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

impl KernelSpec {
    pub fn new(family: KernelFamily, amplitude: f64) -> Result<Self> {
        let k = KernelSpec { family, amplitude };
        k.validate()?;
        Ok(k)
    }

    pub fn power_law(a: f64) -> Self {
        KernelSpec {
            family: KernelFamily::PowerLaw { a },
            amplitude: 1.0,
        }
    }

    pub fn gaussian(sigma: f64) -> Self {
        KernelSpec {
            family: KernelFamily::Gaussian { sigma },
            amplitude: 1.0,
        }
    }

    pub fn compact(radius: f64) -> Self {
        KernelSpec {
            family: KernelFamily::Compact { radius },
            amplitude: 1.0,
        }
    }

    pub fn zero() -> Self {
        KernelSpec {
            family: KernelFamily::Zero,
            amplitude: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return Err(LabError::param("amplitude", format!("must be positive, got {}", self.amplitude)));
        }
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(LabError::param(name, format!("must be positive, got {v}")))
            }
        };
        match self.family {
            KernelFamily::Zero => Ok(()),
            KernelFamily::PowerLaw { a } => positive("a", a),
            KernelFamily::Gaussian { sigma } => positive("sigma", sigma),
            KernelFamily::Compact { radius } => positive("radius", radius),
            KernelFamily::SingularPower { b, epsilon } => {
                positive("b", b)?;
                positive("epsilon", epsilon)
            }
        }
    }

    /// Checks that depend on the lattice (dimension, spacing).
    pub fn validate_for(&self, lattice: &Lattice) -> Result<()> {
        self.validate()?;
        if let KernelFamily::SingularPower { b, epsilon } = self.family {
            let d = lattice.dim() as f64;
            if b >= d + 1.0 {
                return Err(LabError::param("b", format!("singular exponent must satisfy b < d + 1 = {}", d + 1.0)));
            }
            if epsilon < 0.5 * lattice.spacing() {
                return Err(LabError::param(
                    "epsilon",
                    format!(
                        "regularization radius {epsilon} is below half the lattice spacing {}",
                        0.5 * lattice.spacing()
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Radial profile amplitude * J(r).
    pub fn profile(&self, r: f64) -> f64 {
        let j = match self.family {
            KernelFamily::Zero => 0.0,
            KernelFamily::PowerLaw { a } => (1.0 + r * r).powf(-0.5 * a),
            KernelFamily::Gaussian { sigma } => (-(r * r) / (sigma * sigma)).exp(),
            KernelFamily::Compact { radius } => {
                if r <= radius * (1.0 + 1e-12) {
                    1.0
                } else {
                    0.0
                }
            }
            KernelFamily::SingularPower { b, epsilon } => r.max(epsilon).powf(-b),
        };
        self.amplitude * j
    }

    /// Radii where the profile is not smooth.
    fn kinks(&self) -> Vec<f64> {
        match self.family {
            KernelFamily::Compact { radius } => vec![radius],
            KernelFamily::SingularPower { epsilon, .. } => vec![epsilon],
            _ => Vec::new(),
        }
    }
}

/// Surface measure of the unit sphere in R^d (2 for d = 1).
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => {
            let d = dim as f64;
            2.0 * PI.powf(0.5 * d) / gamma_half_integer(dim)
        }
    }
}

/// Gamma(d/2).
fn gamma_half_integer(dim: usize) -> f64 {
    let mut g = if dim % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut x = if dim % 2 == 0 { 1.0 } else { 0.5 };
    while x < 0.5 * dim as f64 {
        g *= x;
        x += 1.0;
    }
    g
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub error: f64,
}

/// Continuum moment int |x|^p |J(x)| dx over R^d.
///
/// Returns `Divergent` when the radial integrand stops decaying.
pub fn moment_bound(spec: &KernelSpec, dim: usize, p: f64, opts: &QuadOptions) -> Result<MomentEstimate> {
    spec.validate()?;
    let omega = sphere_area(dim);
    let d = dim as f64;
    let radial = |r: f64| r.powf(p + d - 1.0) * spec.profile(r).abs();
    let opts = *opts;
    let (head, tail_start) = match spec.family {
        KernelFamily::Zero => return Ok(MomentEstimate { value: 0.0, error: 0.0 }),
        KernelFamily::Compact { radius } => {
            let r = integrate(radial, 0.0, radius, &opts);
            return Ok(MomentEstimate {
                value: omega * r.value,
                error: omega * r.error,
            });
        }
        _ => {
            let kinks = spec.kinks();
            let edge = kinks.iter().cloned().fold(1.0, f64::max);
            let mut pts = vec![0.0];
            pts.extend(kinks);
            pts.push(edge);
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pts.dedup();
            let mut val = 0.0;
            let mut err = 0.0;
            for w in pts.windows(2) {
                let r = integrate(&radial, w[0], w[1], &opts);
                val += r.value;
                err += r.error;
            }
            ((val, err), edge)
        }
    };
    let scale = match spec.family {
        KernelFamily::Gaussian { sigma } => sigma.max(1.0),
        _ => tail_start.max(1.0),
    };
    let tail = integrate_half_line(radial, tail_start, 1.0, scale, &opts)?;
    Ok(MomentEstimate {
        value: omega * (head.0 + tail.value),
        error: omega * (head.1 + tail.error),
    })
}

/// H_0 assembled on a lattice.
///
/// Off-diagonal entries are -K(x,y) h^d and the diagonal carries the row sums,
/// so constants are annihilated.
#[derive(Clone, Debug)]
pub struct NonlocalOperator {
    pub lattice: Lattice,
    pub kernel: KernelSpec,
    pub matrix: RMat,
    /// Mass of the kernel beyond the periodic truncation radius L.
    pub truncated_tail: Option<f64>,
}

pub fn assemble_operator(lattice: &Lattice, kernel: &KernelSpec) -> Result<NonlocalOperator> {
    kernel.validate_for(lattice)?;
    let n = lattice.site_count();
    let w = lattice.cell_volume();
    let periodic = lattice.boundary() == Boundary::Periodic;
    let cut = lattice.half_width() * (1.0 + 1e-12);
    let mut m = RMat::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            let r = lattice.distance(i, j);
            if periodic && r > cut {
                continue;
            }
            let k = kernel.profile(r) * w;
            m[(i, j)] = -k;
            diag += k;
        }
        m[(i, i)] = diag;
    }
    let truncated_tail = if periodic {
        let d = lattice.dim() as f64;
        let l = lattice.half_width();
        let radial = |r: f64| r.powf(d - 1.0) * kernel.profile(r);
        match kernel.family {
            KernelFamily::Zero => Some(0.0),
            KernelFamily::Compact { radius } if radius <= l => Some(0.0),
            _ => integrate_half_line(radial, l, 1.0, l, &QuadOptions::default())
                .ok()
                .map(|r| sphere_area(lattice.dim()) * r.value),
        }
    } else {
        None
    };
    Ok(NonlocalOperator {
        lattice: lattice.clone(),
        kernel: kernel.clone(),
        matrix: m,
        truncated_tail,
    })
}

impl NonlocalOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn to_complex(&self) -> CMat {
        to_complex(&self.matrix)
    }

    /// Coupling |K(x,y)| h^d between distinct sites, read from the matrix.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.matrix[(i, j)].abs()
        }
    }

    /// Max absolute row sum, an upper bound on the operator norm.
    pub fn norm_estimate(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.matrix[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Binary dump: magic, version, rows, cols, row-major f64 little endian.
    pub fn write_dump(&self, path: &Path) -> Result<()> {
        let n = self.dim();
        let mut buf = Vec::with_capacity(24 + 8 * n * n);
        buf.extend_from_slice(b"LCLM");
        buf.extend_from_slice(&1u32.to_le_bytes());
        buf.extend_from_slice(&(n as u64).to_le_bytes());
        buf.extend_from_slice(&(n as u64).to_le_bytes());
        for i in 0..n {
            for j in 0..n {
                buf.extend_from_slice(&self.matrix[(i, j)].to_le_bytes());
            }
        }
        std::fs::File::create(path)?.write_all(&buf)?;
        Ok(())
    }

    /// Nonzero entries as (row, col, value).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["row", "col", "value"])?;
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                let v = self.matrix[(i, j)];
                if v != 0.0 {
                    w.write_record([i.to_string(), j.to_string(), v.to_string()])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Read a matrix written by [`NonlocalOperator::write_dump`].
pub fn read_matrix_dump(path: &Path) -> Result<RMat> {
    let buf = std::fs::read(path)?;
    if buf.len() < 24 || &buf[0..4] != b"LCLM" {
        return Err(LabError::Serialization("not a matrix dump".into()));
    }
    let rows = u64::from_le_bytes(buf[8..16].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(buf[16..24].try_into().unwrap()) as usize;
    if buf.len() != 24 + 8 * rows * cols {
        return Err(LabError::Serialization("truncated matrix dump".into()));
    }
    Ok(RMat::from_fn(rows, cols, |i, j| {
        let o = 24 + 8 * (i * cols + j);
        f64::from_le_bytes(buf[o..o + 8].try_into().unwrap())
    }))
}

/// sqrt(max row sum * max column sum) of |K(x,y)| |phi(x) - phi(y)|^p h^d.
pub fn schur_kappa(op: &NonlocalOperator, phi: &RealField, p: u32) -> Result<f64> {
    if p == 0 {
        return Err(LabError::param("p", "Schur bound order must be at least 1"));
    }
    let n = op.dim();
    if phi.len() != n {
        return Err(LabError::DimensionMismatch(format!(
            "reference field has {} entries, operator has {n}",
            phi.len()
        )));
    }
    let mut rows = vec![0.0; n];
    let mut cols = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            let k = op.coupling(i, j);
            if k != 0.0 {
                let v = k * (phi.values[i] - phi.values[j]).abs().powi(p as i32);
                rows[i] += v;
                cols[j] += v;
            }
        }
    }
    let r = rows.iter().cloned().fold(0.0, f64::max);
    let c = cols.iter().cloned().fold(0.0, f64::max);
    Ok((r * c).sqrt())
}

/// max over x of sum_y |K(x,y)| |x - y|^p h^d, distances in the lattice metric.
pub fn lattice_moment(op: &NonlocalOperator, p: u32) -> f64 {
    let n = op.dim();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| op.coupling(i, j) * op.lattice.distance(i, j).powi(p as i32))
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Speed bounds kappa_p for p = 1..=n+1 and the quantities that dominate them.
#[derive(Clone, Debug, Serialize)]
pub struct SpeedBounds {
    pub n: u32,
    pub kappa: Vec<f64>,
    pub lipschitz: f64,
    pub lattice_moments: Vec<f64>,
    pub continuum_moments: Vec<Option<f64>>,
}

impl SpeedBounds {
    pub fn kappa(&self, p: u32) -> Result<f64> {
        if p == 0 || p > self.n + 1 {
            return Err(LabError::param("p", format!("order must lie in 1..={}, got {p}", self.n + 1)));
        }
        Ok(self.kappa[(p - 1) as usize])
    }
}

pub fn speed_bounds(op: &NonlocalOperator, phi: &RealField, n: u32) -> Result<SpeedBounds> {
    let mut kappa = Vec::new();
    let mut lattice_moments = Vec::new();
    let mut continuum_moments = Vec::new();
    for p in 1..=n + 1 {
        kappa.push(schur_kappa(op, phi, p)?);
        lattice_moments.push(lattice_moment(op, p));
        continuum_moments.push(
            moment_bound(&op.kernel, op.lattice.dim(), p as f64, &QuadOptions::default())
                .ok()
                .map(|m| m.value),
        );
    }
    Ok(SpeedBounds {
        n,
        kappa,
        lipschitz: lipschitz_constant(&op.lattice, phi),
        lattice_moments,
        continuum_moments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_line(n: usize, boundary: Boundary) -> Lattice {
        Lattice::new(1, n as f64 / 2.0, n, boundary).unwrap()
    }

    #[test]
    fn compact_nearest_neighbour_entries() {
        let lat = unit_line(20, Boundary::Periodic);
        let op = assemble_operator(&lat, &KernelSpec::compact(1.0)).unwrap();
        assert_eq!(op.matrix[(5, 5)], 2.0);
        assert_eq!(op.matrix[(5, 6)], -1.0);
        assert_eq!(op.matrix[(5, 4)], -1.0);
        assert_eq!(op.matrix[(5, 7)], 0.0);
        assert_eq!(op.matrix[(0, 19)], -1.0);
    }

    #[test]
    fn zero_kernel_gives_zero_matrix() {
        let lat = unit_line(8, Boundary::Truncated);
        let op = assemble_operator(&lat, &KernelSpec::zero()).unwrap();
        assert_eq!(op.matrix.norm_max(), 0.0);
    }

    #[test]
    fn constants_are_annihilated() {
        let lat = Lattice::new(1, 8.0, 64, Boundary::Truncated).unwrap();
        let op = assemble_operator(&lat, &KernelSpec::power_law(5.0)).unwrap();
        for i in 0..64 {
            let s: f64 = (0..64).map(|j| op.matrix[(i, j)]).sum();
            assert!(s.abs() < 1e-13);
        }
    }

    #[test]
    fn periodic_is_circulant() {
        let lat = Lattice::new(1, 6.0, 24, Boundary::Periodic).unwrap();
        let op = assemble_operator(&lat, &KernelSpec::power_law(4.0)).unwrap();
        for i in 0..24 {
            for j in 0..24 {
                let a = op.matrix[(i, j)];
                let b = op.matrix[((i + 1) % 24, (j + 1) % 24)];
                assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gaussian_first_moment_is_one() {
        let m = moment_bound(&KernelSpec::gaussian(1.0), 1, 1.0, &QuadOptions::default()).unwrap();
        assert!((m.value - 1.0).abs() < 1e-8, "{}", m.value);
    }

    #[test]
    fn power_law_moment_divergence() {
        let r = moment_bound(&KernelSpec::power_law(3.0), 1, 2.0, &QuadOptions::default());
        assert!(matches!(r, Err(LabError::Divergent(_))));
        let ok = moment_bound(&KernelSpec::power_law(5.0), 1, 2.0, &QuadOptions::default()).unwrap();
        // 2 int_0^inf r^2 (1 + r^2)^(-5/2) dr = 2/3
        assert!((ok.value - 2.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn singular_epsilon_below_half_spacing_rejected() {
        let lat = unit_line(16, Boundary::Truncated);
        let k = KernelSpec {
            family: KernelFamily::SingularPower { b: 1.2, epsilon: 0.2 },
            amplitude: 1.0,
        };
        assert!(assemble_operator(&lat, &k).is_err());
        let k = KernelSpec {
            family: KernelFamily::SingularPower { b: 1.2, epsilon: 0.5 },
            amplitude: 1.0,
        };
        assert!(assemble_operator(&lat, &k).is_ok());
    }

    #[test]
    fn schur_order_zero_rejected() {
        let lat = unit_line(8, Boundary::Truncated);
        let op = assemble_operator(&lat, &KernelSpec::compact(1.0)).unwrap();
        let phi = RealField::from_fn(&lat, crate::lattice::FieldUnits::Length, |x| x[0]);
        assert!(schur_kappa(&op, &phi, 0).is_err());
        let sb = speed_bounds(&op, &phi, 2).unwrap();
        assert!(sb.kappa(4).is_err());
        assert!(sb.kappa(3).is_ok());
    }

    #[test]
    fn matrix_dump_round_trip() {
        let lat = unit_line(6, Boundary::Periodic);
        let op = assemble_operator(&lat, &KernelSpec::power_law(3.0)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.bin");
        op.write_dump(&p).unwrap();
        let back = read_matrix_dump(&p).unwrap();
        assert_eq!(back.nrows(), 6);
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(back[(i, j)], op.matrix[(i, j)]);
            }
        }
    }
}
