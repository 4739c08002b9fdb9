//! Uniform lattices, region sets, scalar fields and lattice states.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    Truncated,
}

/// Uniform grid on [-L, L)^d with `points_per_axis` sites per axis.
///
/// Site k along an axis sits at `-L + k h` with `h = 2L / N`. Sites are
/// numbered with the first axis varying fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    dim: usize,
    half_width: f64,
    points_per_axis: usize,
    boundary: Boundary,
    spacing: f64,
}

impl Lattice {
    pub fn new(dim: usize, half_width: f64, points_per_axis: usize, boundary: Boundary) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(LabError::param("dim", format!("only d = 1 or 2 supported, got {dim}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(LabError::param("half_width", format!("must be positive, got {half_width}")));
        }
        if points_per_axis < 2 {
            return Err(LabError::param("points_per_axis", "need at least 2 points per axis"));
        }
        Ok(Lattice {
            dim,
            half_width,
            points_per_axis,
            boundary,
            spacing: 2.0 * half_width / points_per_axis as f64,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn half_width(&self) -> f64 {
        self.half_width
    }
    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn site_count(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    /// Cell volume h^d, the quadrature weight of every site.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    pub fn axis_coordinate(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.spacing
    }

    pub fn axis_indices(&self, site: usize) -> [usize; 2] {
        let n = self.points_per_axis;
        if self.dim == 1 {
            [site, 0]
        } else {
            [site % n, site / n]
        }
    }

    pub fn coords(&self, site: usize) -> [f64; 2] {
        let ix = self.axis_indices(site);
        let mut x = [0.0; 2];
        for a in 0..self.dim {
            x[a] = self.axis_coordinate(ix[a]);
        }
        x
    }

    /// Displacement y - x, wrapped to the minimum image on a periodic lattice.
    pub fn displacement(&self, i: usize, j: usize) -> [f64; 2] {
        let xi = self.axis_indices(i);
        let xj = self.axis_indices(j);
        let n = self.points_per_axis as i64;
        let mut d = [0.0; 2];
        for a in 0..self.dim {
            let mut k = xj[a] as i64 - xi[a] as i64;
            if self.boundary == Boundary::Periodic {
                k = k.rem_euclid(n);
                if 2 * k > n {
                    k -= n;
                }
            }
            d[a] = k as f64 * self.spacing;
        }
        d
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let d = self.displacement(i, j);
        (d[0] * d[0] + d[1] * d[1]).sqrt()
    }

    /// Distance from a site to an arbitrary point, minimum image when periodic.
    pub fn distance_to_point(&self, i: usize, p: &[f64]) -> f64 {
        let x = self.coords(i);
        let period = 2.0 * self.half_width;
        let mut s = 0.0;
        for a in 0..self.dim {
            let mut d = x[a] - p.get(a).cloned().unwrap_or(0.0);
            if self.boundary == Boundary::Periodic {
                d -= period * (d / period).round();
            }
            s += d * d;
        }
        s.sqrt()
    }

    /// Site nearest to a point (per-axis rounding).
    pub fn nearest_site(&self, p: &[f64]) -> usize {
        let n = self.points_per_axis as i64;
        let mut site = 0usize;
        let mut stride = 1usize;
        for a in 0..self.dim {
            let k = ((p[a] + self.half_width) / self.spacing).round() as i64;
            let k = if self.boundary == Boundary::Periodic {
                k.rem_euclid(n)
            } else {
                k.clamp(0, n - 1)
            } as usize;
            site += k * stride;
            stride *= self.points_per_axis;
        }
        site
    }
}

/// Boolean membership mask over the sites of a lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionSet {
    mask: Vec<bool>,
    pub description: String,
}

impl RegionSet {
    pub fn from_mask(mask: Vec<bool>, description: impl Into<String>) -> Self {
        RegionSet {
            mask,
            description: description.into(),
        }
    }

    pub fn from_predicate(lattice: &Lattice, description: impl Into<String>, pred: impl Fn(&[f64]) -> bool) -> Self {
        let mask = (0..lattice.site_count())
            .map(|i| pred(&lattice.coords(i)[..lattice.dim()]))
            .collect();
        RegionSet::from_mask(mask, description)
    }

    pub fn all(lattice: &Lattice) -> Self {
        RegionSet::from_mask(vec![true; lattice.site_count()], "all")
    }

    /// Closed box [lo, hi] along every axis.
    pub fn interval(lattice: &Lattice, lo: f64, hi: f64) -> Self {
        RegionSet::from_predicate(lattice, format!("[{lo}, {hi}]^d"), |x| x.iter().all(|&v| v >= lo && v <= hi))
    }

    /// Closed ball, minimum image when periodic.
    pub fn ball(lattice: &Lattice, center: &[f64], radius: f64) -> Self {
        let mask = (0..lattice.site_count())
            .map(|i| lattice.distance_to_point(i, center) <= radius)
            .collect();
        RegionSet::from_mask(mask, format!("ball(center={center:?}, r={radius})"))
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }
    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }
    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }
    pub fn contains(&self, site: usize) -> bool {
        self.mask[site]
    }
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }
    pub fn sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn complement(&self) -> Self {
        RegionSet::from_mask(self.mask.iter().map(|b| !b).collect(), format!("complement({})", self.description))
    }

    pub fn union(&self, other: &RegionSet) -> Self {
        RegionSet::from_mask(
            self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect(),
            format!("{} | {}", self.description, other.description),
        )
    }

    pub fn intersection(&self, other: &RegionSet) -> Self {
        RegionSet::from_mask(
            self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect(),
            format!("{} & {}", self.description, other.description),
        )
    }

    pub fn write_csv(&self, lattice: &Lattice, path: &Path) -> Result<()> {
        let values: Vec<f64> = self.mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        write_site_csv(lattice, &values, path)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldUnits {
    Length,
    Energy,
    Dimensionless,
}

/// Real scalar field over lattice sites.
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    pub values: Vec<f64>,
    pub units: FieldUnits,
}

impl RealField {
    pub fn new(values: Vec<f64>, units: FieldUnits) -> Self {
        RealField { values, units }
    }

    pub fn from_fn(lattice: &Lattice, units: FieldUnits, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..lattice.site_count())
            .map(|i| f(&lattice.coords(i)[..lattice.dim()]))
            .collect();
        RealField { values, units }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RealField {
        RealField {
            values: self.values.iter().map(|&v| f(v)).collect(),
            units: self.units,
        }
    }

    /// Sites with value strictly above `level`.
    pub fn superlevel(&self, level: f64) -> RegionSet {
        RegionSet::from_mask(self.values.iter().map(|&v| v > level).collect(), format!("{{phi > {level}}}"))
    }

    /// Sites with value at or below `level`.
    pub fn sublevel(&self, level: f64) -> RegionSet {
        RegionSet::from_mask(self.values.iter().map(|&v| v <= level).collect(), format!("{{phi <= {level}}}"))
    }

    pub fn write_csv(&self, lattice: &Lattice, path: &Path) -> Result<()> {
        write_site_csv(lattice, &self.values, path)
    }
}

/// Largest ratio |f(x) - f(y)| / |x - y| over all site pairs.
pub fn lipschitz_constant(lattice: &Lattice, field: &RealField) -> f64 {
    let n = lattice.site_count();
    let mut best = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = lattice.distance(i, j);
            if d > 0.0 {
                best = best.max((field.values[i] - field.values[j]).abs() / d);
            }
        }
    }
    best
}

/// d_X(x) = min over y in X of |x - y|.
pub fn distance_function(lattice: &Lattice, region: &RegionSet) -> Result<RealField> {
    check_len(lattice, region.len(), "region")?;
    let members: Vec<usize> = region.sites().collect();
    if members.is_empty() {
        return Err(LabError::EmptyRegion(
            "distance to an empty region is infinite".to_string(),
        ));
    }
    let values = (0..lattice.site_count())
        .map(|i| {
            if region.contains(i) {
                0.0
            } else {
                members
                    .iter()
                    .map(|&j| lattice.distance(i, j))
                    .fold(f64::INFINITY, f64::min)
            }
        })
        .collect();
    Ok(RealField::new(values, FieldUnits::Length))
}

/// X_a = {x : d_X(x) <= a}.
pub fn enlarge_region(lattice: &Lattice, region: &RegionSet, a: f64) -> Result<RegionSet> {
    if !(a >= 0.0) {
        return Err(LabError::param("a", format!("enlargement radius must be >= 0, got {a}")));
    }
    let d = distance_function(lattice, region)?;
    let mut r = d.sublevel(a);
    r.description = format!("({})_{a}", region.description);
    Ok(r)
}

fn check_len(lattice: &Lattice, len: usize, what: &str) -> Result<()> {
    if len != lattice.site_count() {
        return Err(LabError::DimensionMismatch(format!(
            "{what} has {len} entries, lattice has {} sites",
            lattice.site_count()
        )));
    }
    Ok(())
}

/// Lattice wave function sampled at a given time.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub amplitudes: Vec<C64>,
    pub time: f64,
}

impl State {
    pub fn new(amplitudes: Vec<C64>, time: f64) -> Self {
        State { amplitudes, time }
    }

    pub fn from_fn(lattice: &Lattice, f: impl Fn(&[f64]) -> C64) -> Self {
        let amplitudes = (0..lattice.site_count())
            .map(|i| f(&lattice.coords(i)[..lattice.dim()]))
            .collect();
        State { amplitudes, time: 0.0 }
    }

    /// Normalized Gaussian packet exp(-|x - x0|^2 / (2 w^2)) e^{i k.x}.
    pub fn gaussian(lattice: &Lattice, center: &[f64], width: f64, momentum: &[f64]) -> Self {
        let mut s = State::from_fn(lattice, |x| {
            let mut r2 = 0.0;
            let mut phase = 0.0;
            for a in 0..x.len() {
                let c = center.get(a).cloned().unwrap_or(0.0);
                r2 += (x[a] - c) * (x[a] - c);
                phase += momentum.get(a).cloned().unwrap_or(0.0) * x[a];
            }
            C64::from_polar((-r2 / (2.0 * width * width)).exp(), phase)
        });
        s.normalize(lattice);
        s
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// ||psi||^2 = h^d sum |psi|^2.
    pub fn norm_sqr(&self, lattice: &Lattice) -> f64 {
        lattice.cell_volume() * self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>()
    }

    pub fn normalize(&mut self, lattice: &Lattice) {
        let n = self.norm_sqr(lattice).sqrt();
        if n > 0.0 {
            for a in &mut self.amplitudes {
                *a /= n;
            }
        }
    }

    /// Weighted inner product h^d sum conj(self) other.
    pub fn inner(&self, other: &State, lattice: &Lattice) -> C64 {
        let s: C64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        s * lattice.cell_volume()
    }

    /// Binary dump: magic, version, time, length, then (re, im) pairs, little endian.
    pub fn write_dump(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(28 + 16 * self.amplitudes.len());
        buf.extend_from_slice(STATE_MAGIC);
        buf.extend_from_slice(&1u32.to_le_bytes());
        buf.extend_from_slice(&self.time.to_le_bytes());
        buf.extend_from_slice(&(self.amplitudes.len() as u64).to_le_bytes());
        for a in &self.amplitudes {
            buf.extend_from_slice(&a.re.to_le_bytes());
            buf.extend_from_slice(&a.im.to_le_bytes());
        }
        std::fs::File::create(path)?.write_all(&buf)?;
        Ok(())
    }

    pub fn read_dump(path: &Path) -> Result<State> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        if buf.len() < 24 || &buf[0..4] != STATE_MAGIC {
            return Err(LabError::Serialization("not a state dump".into()));
        }
        let time = f64::from_le_bytes(buf[8..16].try_into().unwrap());
        let n = u64::from_le_bytes(buf[16..24].try_into().unwrap()) as usize;
        if buf.len() != 24 + 16 * n {
            return Err(LabError::Serialization("truncated state dump".into()));
        }
        let amplitudes = (0..n)
            .map(|k| {
                let o = 24 + 16 * k;
                C64::new(
                    f64::from_le_bytes(buf[o..o + 8].try_into().unwrap()),
                    f64::from_le_bytes(buf[o + 8..o + 16].try_into().unwrap()),
                )
            })
            .collect();
        Ok(State { amplitudes, time })
    }
}

const STATE_MAGIC: &[u8; 4] = b"LCLS";

/// ||1_S psi||^2 with the lattice weight.
pub fn region_mass(psi: &State, region: &RegionSet, lattice: &Lattice) -> Result<f64> {
    check_len(lattice, psi.len(), "state")?;
    check_len(lattice, region.len(), "region")?;
    Ok(lattice.cell_volume()
        * psi
            .amplitudes
            .iter()
            .zip(region.mask())
            .filter(|(_, &m)| m)
            .map(|(a, _)| a.norm_sqr())
            .sum::<f64>())
}

/// CSV with columns site_index, x[, y], value.
pub fn write_site_csv(lattice: &Lattice, values: &[f64], path: &Path) -> Result<()> {
    check_len(lattice, values.len(), "field")?;
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["site_index".to_string(), "x".to_string()];
    if lattice.dim() == 2 {
        header.push("y".to_string());
    }
    header.push("value".to_string());
    w.write_record(&header)?;
    for (i, v) in values.iter().enumerate() {
        let x = lattice.coords(i);
        let mut rec = vec![i.to_string(), x[0].to_string()];
        if lattice.dim() == 2 {
            rec.push(x[1].to_string());
        }
        rec.push(v.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_grid_coordinates() {
        let lat = Lattice::new(1, 10.0, 20, Boundary::Periodic).unwrap();
        assert_eq!(lat.site_count(), 20);
        assert_eq!(lat.spacing(), 1.0);
        let xs: Vec<f64> = (0..20).map(|i| lat.coords(i)[0]).collect();
        assert_eq!(xs[0], -10.0);
        assert_eq!(xs[19], 9.0);
        assert!(xs.iter().all(|&x| (-10.0..10.0).contains(&x)));
    }

    #[test]
    fn distance_examples() {
        let lat = Lattice::new(1, 10.0, 20, Boundary::Truncated).unwrap();
        let x = RegionSet::interval(&lat, -1.0, 1.0);
        let d = distance_function(&lat, &x).unwrap();
        let five = lat.nearest_site(&[5.0]);
        assert_eq!(d.values[five], 4.0);
        for s in x.sites() {
            assert_eq!(d.values[s], 0.0);
        }
    }

    #[test]
    fn enlarge_point() {
        let lat = Lattice::new(1, 10.0, 20, Boundary::Truncated).unwrap();
        let x = RegionSet::from_predicate(&lat, "origin", |p| p[0] == 0.0);
        let e = enlarge_region(&lat, &x, 2.5).unwrap();
        let xs: Vec<f64> = e.sites().map(|i| lat.coords(i)[0]).collect();
        assert_eq!(xs, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn empty_region_errors() {
        let lat = Lattice::new(1, 10.0, 20, Boundary::Truncated).unwrap();
        let empty = RegionSet::from_mask(vec![false; 20], "empty");
        assert!(matches!(distance_function(&lat, &empty), Err(LabError::EmptyRegion(_))));
    }

    #[test]
    fn periodic_minimum_image() {
        let lat = Lattice::new(1, 10.0, 20, Boundary::Periodic).unwrap();
        assert_eq!(lat.distance(0, 19), 1.0);
        let lat2 = Lattice::new(2, 4.0, 8, Boundary::Periodic).unwrap();
        assert_eq!(lat2.distance(0, 7), 1.0);
        assert_eq!(lat2.distance(0, 7 * 8), 1.0);
    }

    #[test]
    fn state_dump_round_trip() {
        let lat = Lattice::new(1, 4.0, 16, Boundary::Periodic).unwrap();
        let mut s = State::gaussian(&lat, &[0.3], 1.0, &[0.5]);
        s.time = 2.5;
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.bin");
        s.write_dump(&p).unwrap();
        assert_eq!(State::read_dump(&p).unwrap(), s);
    }
}
