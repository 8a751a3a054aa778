//! The three geometries: interval [0,1] (two boundary conditions), the circle
//! R/2Z parametrized by [-1,1), and the unit sphere S^d in R^{d+1}.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::quadrature::{gauss_legendre, gl8};
use crate::rng::{stream_rng, STREAM_QUAD};
use crate::special::gegenbauer_w_all;

const SPHERE_NORM_TOL: f64 = 1e-9;
const INTERVAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Space {
    /// Dirichlet at 0, Neumann at 1: eigenfunctions sqrt2 sin((k+1/2) pi x).
    IntervalMixed,
    /// Neumann at both ends: 1 and sqrt2 cos(k pi x).
    IntervalNeumann,
    Circle,
    Sphere(usize),
}

impl Space {
    pub fn sphere(d: usize) -> Result<Space> {
        if d < 2 {
            return domain(format!("sphere dimension must be at least 2, got {d} (use the circle for d = 1)"));
        }
        Ok(Space::Sphere(d))
    }

    pub fn total_measure(&self) -> f64 {
        match self {
            Space::IntervalMixed | Space::IntervalNeumann => 1.0,
            Space::Circle => 2.0,
            Space::Sphere(d) => sphere_area(*d),
        }
    }

    pub fn dim_doubling(&self) -> f64 {
        match self {
            Space::Sphere(d) => *d as f64,
            _ => 1.0,
        }
    }

    /// Number of coordinates per point.
    pub fn coord_dim(&self) -> usize {
        match self {
            Space::Sphere(d) => d + 1,
            _ => 1,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Space::Sphere(_) => PI,
            _ => 1.0,
        }
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self, Space::Sphere(_))
    }

    pub fn is_interval(&self) -> bool {
        matches!(self, Space::IntervalMixed | Space::IntervalNeumann)
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.coord_dim() {
            return domain(format!("{self} points have {} coordinates, got {}", self.coord_dim(), x.len()));
        }
        match self {
            Space::IntervalMixed | Space::IntervalNeumann => {
                if !(-INTERVAL_TOL..=1.0 + INTERVAL_TOL).contains(&x[0]) {
                    return domain(format!("{} lies outside [0,1]", x[0]));
                }
            }
            Space::Circle => {
                if !(-1.0 - INTERVAL_TOL..=1.0 + INTERVAL_TOL).contains(&x[0]) {
                    return domain(format!("{} lies outside [-1,1]", x[0]));
                }
            }
            Space::Sphere(_) => {
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > SPHERE_NORM_TOL || !norm.is_finite() {
                    return domain(format!("sphere point has norm {norm}, not 1"));
                }
            }
        }
        Ok(())
    }

    /// Geodesic distance with point validation.
    pub fn metric(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.dist(x, y))
    }

    /// Geodesic distance, no validation.
    pub fn dist(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Space::IntervalMixed | Space::IntervalNeumann => (x[0] - y[0]).abs(),
            Space::Circle => circle_dist(x[0], y[0]),
            Space::Sphere(_) => dot(x, y).clamp(-1.0, 1.0).acos(),
        }
    }

    /// `n` i.i.d. uniform points: inverse CDF on the interval and circle,
    /// normalized Gaussian vectors on the sphere.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> PointSet {
        let mut pts = PointSet::new(self.coord_dim());
        match self {
            Space::IntervalMixed | Space::IntervalNeumann => {
                for _ in 0..n {
                    pts.push(&[rng.random::<f64>()]);
                }
            }
            Space::Circle => {
                for _ in 0..n {
                    pts.push(&[2.0 * rng.random::<f64>() - 1.0]);
                }
            }
            Space::Sphere(d) => {
                let mut v = vec![0.0; d + 1];
                for _ in 0..n {
                    loop {
                        for c in v.iter_mut() {
                            *c = rng.sample(StandardNormal);
                        }
                        let norm = dot(&v, &v).sqrt();
                        if norm > 1e-12 {
                            v.iter_mut().for_each(|c| *c /= norm);
                            break;
                        }
                    }
                    pts.push(&v);
                }
            }
        }
        pts
    }

    /// Quadrature nodes and positive weights summing to the total measure.
    ///
    /// Interval and circle: `resolution` panels of the 8-point Gauss rule.
    /// S^2: Gauss-Legendre in cos(theta) with `resolution` nodes times `2*resolution`
    /// equispaced azimuths. S^d, d > 2: `resolution^2` seeded Monte Carlo nodes with
    /// equal weights, error O(N^{-1/2}).
    pub fn quadrature_nodes(&self, resolution: usize) -> Result<(PointSet, Vec<f64>)> {
        if resolution < 2 {
            return config("quadrature resolution must be at least 2");
        }
        let mut pts = PointSet::new(self.coord_dim());
        let mut wts = Vec::new();
        match self {
            Space::IntervalMixed | Space::IntervalNeumann | Space::Circle => {
                let (a, b) = if *self == Space::Circle { (-1.0, 1.0) } else { (0.0, 1.0) };
                let (x, w) = gl8();
                let h = (b - a) / resolution as f64;
                for p in 0..resolution {
                    let c = a + (p as f64 + 0.5) * h;
                    for (xi, wi) in x.iter().zip(w) {
                        pts.push(&[c + 0.5 * h * xi]);
                        wts.push(0.5 * h * wi);
                    }
                }
            }
            Space::Sphere(2) => {
                let (z, w) = gauss_legendre(resolution);
                let n_phi = 2 * resolution;
                let dphi = 2.0 * PI / n_phi as f64;
                for (zi, wi) in z.iter().zip(&w) {
                    let r = (1.0 - zi * zi).max(0.0).sqrt();
                    for m in 0..n_phi {
                        let phi = m as f64 * dphi;
                        pts.push(&[r * phi.cos(), r * phi.sin(), *zi]);
                        wts.push(wi * dphi);
                    }
                }
            }
            Space::Sphere(_) => {
                let n = resolution * resolution;
                let mut rng = stream_rng(0x5eed, STREAM_QUAD);
                pts = self.sample_uniform(n, &mut rng);
                wts = vec![self.total_measure() / n as f64; n];
            }
        }
        Ok((pts, wts))
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::IntervalMixed => write!(f, "interval-mixed"),
            Space::IntervalNeumann => write!(f, "interval-neumann"),
            Space::Circle => write!(f, "circle"),
            Space::Sphere(d) => write!(f, "sphere:{d}"),
        }
    }
}

impl FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Space> {
        match s.trim() {
            "interval-mixed" | "interval" => Ok(Space::IntervalMixed),
            "interval-neumann" => Ok(Space::IntervalNeumann),
            "circle" => Ok(Space::Circle),
            other => match other.strip_prefix("sphere:") {
                Some(d) => {
                    let d: usize = d.parse().map_err(|_| Error::Config(format!("bad sphere dimension in {other:?}")))?;
                    Space::sphere(d)
                }
                None if other == "sphere" => Ok(Space::Sphere(2)),
                None => config(format!("unknown space {other:?}")),
            },
        }
    }
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub(crate) fn circle_dist(x: f64, y: f64) -> f64 {
    let d = (x - y).abs().rem_euclid(2.0);
    d.min(2.0 - d)
}

/// |S^d| = 2 pi^{(d+1)/2} / Gamma((d+1)/2).
pub fn sphere_area(d: usize) -> f64 {
    let h = (d as f64 + 1.0) / 2.0;
    2.0 * PI.powf(h) / libm::tgamma(h)
}

/// dim H_k(S^d) = C(k+d,d) - C(k-2+d,d) = (2k+d-1)(k+d-2)! / (k! (d-1)!).
pub fn harmonic_dim(d: usize, k: usize) -> f64 {
    if d == 1 {
        return if k == 0 { 1.0 } else { 2.0 };
    }
    let mut v = (2 * k + d - 1) as f64;
    for i in 1..=d - 2 {
        v *= (k + i) as f64 / i as f64;
    }
    (v / (d - 1) as f64).round()
}

/// Flat storage for points with a fixed number of coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    pub dim: usize,
    pub coords: Vec<f64>,
}

impl PointSet {
    pub fn new(dim: usize) -> PointSet {
        PointSet { dim, coords: Vec::new() }
    }

    pub fn from_coords(dim: usize, coords: Vec<f64>) -> PointSet {
        assert!(dim > 0 && coords.len() % dim == 0);
        PointSet { dim, coords }
    }

    pub fn from_scalars(xs: &[f64]) -> PointSet {
        PointSet { dim: 1, coords: xs.to_vec() }
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn push(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.dim);
        self.coords.extend_from_slice(p);
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn subset(&self, idx: &[usize]) -> PointSet {
        let mut out = PointSet::new(self.dim);
        for &i in idx {
            out.push(self.get(i));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenEntry {
    pub index: usize,
    pub sqrt_lambda: f64,
    pub multiplicity: usize,
}

/// Truncated eigen-structure of one space: entries `0..=truncation_index`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSystem {
    pub space: Space,
    pub entries: Vec<EigenEntry>,
    pub truncation_index: usize,
}

fn sqrt_lambda(space: Space, k: usize) -> f64 {
    let kf = k as f64;
    match space {
        Space::IntervalMixed => (kf + 0.5) * PI,
        Space::IntervalNeumann | Space::Circle => kf * PI,
        Space::Sphere(d) => (kf * (kf + d as f64 - 1.0)).sqrt(),
    }
}

fn multiplicity(space: Space, k: usize) -> usize {
    match space {
        Space::IntervalMixed | Space::IntervalNeumann => 1,
        Space::Circle => {
            if k == 0 {
                1
            } else {
                2
            }
        }
        Space::Sphere(d) => harmonic_dim(d, k) as usize,
    }
}

pub fn build_interval_mixed(k_max: usize) -> Result<EigenSystem> {
    EigenSystem::new(Space::IntervalMixed, k_max)
}

pub fn build_interval_neumann(k_max: usize) -> Result<EigenSystem> {
    EigenSystem::new(Space::IntervalNeumann, k_max)
}

pub fn build_circle(k_max: usize) -> Result<EigenSystem> {
    EigenSystem::new(Space::Circle, k_max)
}

pub fn build_sphere(d: usize, k_max: usize) -> Result<EigenSystem> {
    EigenSystem::new(Space::sphere(d)?, k_max)
}

impl EigenSystem {
    pub fn new(space: Space, k_max: usize) -> Result<EigenSystem> {
        if k_max < 1 {
            return config("k_max must be at least 1");
        }
        if let Space::Sphere(d) = space {
            Space::sphere(d)?;
        }
        let entries = (0..=k_max)
            .map(|k| EigenEntry { index: k, sqrt_lambda: sqrt_lambda(space, k), multiplicity: multiplicity(space, k) })
            .collect();
        Ok(EigenSystem { space, entries, truncation_index: k_max })
    }

    /// Smallest system containing every eigenvalue with sqrt(lambda) <= `freq`.
    pub fn covering(space: Space, freq: f64) -> Result<EigenSystem> {
        let mut k = 1;
        while sqrt_lambda(space, k + 1) <= freq {
            k += 1;
        }
        EigenSystem::new(space, k)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// sqrt(lambda) of the first entry beyond the truncation.
    pub fn next_sqrt_lambda(&self) -> f64 {
        sqrt_lambda(self.space, self.truncation_index + 1)
    }

    /// True when every eigenvalue with sqrt(lambda) <= `freq` is present.
    pub fn covers(&self, freq: f64) -> bool {
        self.next_sqrt_lambda() > freq
    }

    /// Sum over components of entry `k`: sum_m u_{k,m}(x) u_{k,m}(y).
    pub fn addition(&self, k: usize, x: &[f64], y: &[f64]) -> f64 {
        let kf = k as f64;
        match self.space {
            Space::IntervalMixed => 2.0 * ((kf + 0.5) * PI * x[0]).sin() * ((kf + 0.5) * PI * y[0]).sin(),
            Space::IntervalNeumann => {
                if k == 0 {
                    1.0
                } else {
                    2.0 * (kf * PI * x[0]).cos() * (kf * PI * y[0]).cos()
                }
            }
            Space::Circle => {
                if k == 0 {
                    0.5
                } else {
                    (kf * PI * (x[0] - y[0])).cos()
                }
            }
            Space::Sphere(d) => {
                let nu = (d as f64 - 1.0) / 2.0;
                let t = dot(x, y).clamp(-1.0, 1.0);
                let mut w = vec![0.0; k + 1];
                gegenbauer_w_all(nu, t, &mut w);
                self.entries[k].multiplicity as f64 / sphere_area(d) * w[k]
            }
        }
    }

    pub fn diagonal(&self, k: usize, x: &[f64]) -> f64 {
        self.addition(k, x, x)
    }

    /// Addition values of every entry at the pair (x, y), written into `out`.
    pub fn addition_all(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        let n = self.len();
        assert!(out.len() >= n);
        match self.space {
            Space::IntervalMixed => {
                // 2 sin(a x) sin(a y) = cos(a(x-y)) - cos(a(x+y)), a = (k+1/2) pi
                cos_ladder(0.5 * PI * (x[0] - y[0]), PI * (x[0] - y[0]), &mut out[..n]);
                let mut tmp = vec![0.0; n];
                cos_ladder(0.5 * PI * (x[0] + y[0]), PI * (x[0] + y[0]), &mut tmp);
                for (o, t) in out.iter_mut().zip(&tmp) {
                    *o -= t;
                }
            }
            Space::IntervalNeumann => {
                cos_ladder(0.0, PI * (x[0] - y[0]), &mut out[..n]);
                let mut tmp = vec![0.0; n];
                cos_ladder(0.0, PI * (x[0] + y[0]), &mut tmp);
                for (o, t) in out.iter_mut().zip(&tmp) {
                    *o += t;
                }
                out[0] = 1.0;
            }
            Space::Circle => {
                cos_ladder(0.0, PI * (x[0] - y[0]), &mut out[..n]);
                out[0] = 0.5;
            }
            Space::Sphere(d) => {
                let nu = (d as f64 - 1.0) / 2.0;
                gegenbauer_w_all(nu, dot(x, y).clamp(-1.0, 1.0), &mut out[..n]);
                let area = sphere_area(d);
                for (o, e) in out.iter_mut().zip(&self.entries) {
                    *o *= e.multiplicity as f64 / area;
                }
            }
        }
    }

    /// Number of real basis components (sum of multiplicities); only for spaces
    /// with explicit bases.
    pub fn n_components(&self) -> Result<usize> {
        if self.space.is_sphere() {
            return domain("spheres expose only addition forms, not individual harmonics");
        }
        Ok(self.entries.iter().map(|e| e.multiplicity).sum())
    }

    /// Basis values u_{k,m}(x) for all entries, in entry order, components of an
    /// entry adjacent. Circle entries k >= 1 give (cos k pi x, sin k pi x).
    pub fn basis_all(&self, x: &[f64], out: &mut Vec<f64>) -> Result<()> {
        out.clear();
        let s2 = std::f64::consts::SQRT_2;
        match self.space {
            Space::IntervalMixed => {
                for e in &self.entries {
                    out.push(s2 * ((e.index as f64 + 0.5) * PI * x[0]).sin());
                }
            }
            Space::IntervalNeumann => {
                for e in &self.entries {
                    out.push(if e.index == 0 { 1.0 } else { s2 * (e.index as f64 * PI * x[0]).cos() });
                }
            }
            Space::Circle => {
                for e in &self.entries {
                    if e.index == 0 {
                        out.push(std::f64::consts::FRAC_1_SQRT_2);
                    } else {
                        let (s, c) = (e.index as f64 * PI * x[0]).sin_cos();
                        out.push(c);
                        out.push(s);
                    }
                }
            }
            Space::Sphere(_) => return domain("spheres expose only addition forms, not individual harmonics"),
        }
        Ok(())
    }
}

/// out[k] = cos(phase + k * step) by the Chebyshev-style two-term recurrence,
/// re-anchored every 64 steps to bound drift.
fn cos_ladder(phase: f64, step: f64, out: &mut [f64]) {
    let c2 = 2.0 * step.cos();
    let mut k = 0;
    while k < out.len() {
        let base = phase + k as f64 * step;
        out[k] = base.cos();
        if k + 1 < out.len() {
            out[k + 1] = (base + step).cos();
        }
        let stop = (k + 64).min(out.len());
        for i in k + 2..stop {
            out[i] = c2 * out[i - 1] - out[i - 2];
        }
        k = stop;
    }
}
