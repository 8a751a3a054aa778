//! Positive and negative definite kernels: closed forms, Mercer expansions,
//! the psi_K / K_u / K-tilde constructions and Gram-matrix definiteness tests.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Error, Result};
use crate::quadrature::adaptive_with_breaks;
use crate::rng::{stream_rng, STREAM_POINTS};
use crate::spaces::{circle_dist, dot, harmonic_dim, sphere_area, EigenSystem, PointSet, Space};
use crate::special::{fourier_abs_alpha, hyp2f1, schoenberg_transform, zonal_coefficients, PowerSeriesSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NamedKernel {
    /// x ∧ y on [0, 1].
    MinXY,
    /// 1/2 - rho on the circle.
    CircleBrownian,
    /// 1/(alpha+1) - rho^alpha on the circle.
    CircleFractional(f64),
    /// arcsin <x, y> = pi/2 - rho on S^d.
    SphereArcsinBM,
    /// C0 - rho^alpha / 2 on S^d with C0 the mean of rho^alpha.
    SphereFractional(f64),
    /// 2F1(a, b; c; <x, y>) on S^d.
    HypergeometricSphere { a: f64, b: f64, c: f64 },
}

impl NamedKernel {
    pub fn default_space(&self) -> Space {
        match self {
            NamedKernel::MinXY => Space::IntervalMixed,
            NamedKernel::CircleBrownian | NamedKernel::CircleFractional(_) => Space::Circle,
            _ => Space::Sphere(2),
        }
    }

    pub fn check_space(&self, space: Space) -> Result<()> {
        let ok = match self {
            NamedKernel::MinXY => space.is_interval(),
            NamedKernel::CircleBrownian | NamedKernel::CircleFractional(_) => space == Space::Circle,
            _ => space.is_sphere(),
        };
        if !ok {
            return config(format!("kernel {self} is not defined on {space}"));
        }
        match *self {
            NamedKernel::CircleFractional(a) if !(a > 0.0 && a <= 1.0) => {
                domain(format!("circle fractional kernel needs alpha in (0,1], got {a}"))
            }
            NamedKernel::SphereFractional(a) if !(a > 0.0 && a <= 1.0) => {
                domain(format!("sphere fractional kernel needs alpha in (0,1], got {a}"))
            }
            NamedKernel::HypergeometricSphere { a, b, c } => PowerSeriesSpec::hypergeometric(a, b, c).map(|_| ()),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for NamedKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NamedKernel::MinXY => write!(f, "min-xy"),
            NamedKernel::CircleBrownian => write!(f, "circle-brownian"),
            NamedKernel::CircleFractional(a) => write!(f, "circle-fractional:{a}"),
            NamedKernel::SphereArcsinBM => write!(f, "sphere-arcsin"),
            NamedKernel::SphereFractional(a) => write!(f, "sphere-fractional:{a}"),
            NamedKernel::HypergeometricSphere { a, b, c } => write!(f, "hyp:{a},{b},{c}"),
        }
    }
}

fn parse_alpha(rest: Option<&str>, default: f64) -> Result<f64> {
    match rest {
        None => Ok(default),
        Some(s) => s.parse().map_err(|_| Error::Config(format!("bad exponent {s:?}"))),
    }
}

impl FromStr for NamedKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<NamedKernel> {
        let s = s.trim();
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        match head {
            "min-xy" | "minxy" => Ok(NamedKernel::MinXY),
            "circle-brownian" | "circle-bm" => Ok(NamedKernel::CircleBrownian),
            "circle-fractional" => Ok(NamedKernel::CircleFractional(parse_alpha(rest, 0.5)?)),
            "sphere-arcsin" => Ok(NamedKernel::SphereArcsinBM),
            "sphere-fractional" => Ok(NamedKernel::SphereFractional(parse_alpha(rest, 0.5)?)),
            "hyp" => {
                let parts: Vec<f64> = rest
                    .unwrap_or("")
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Config(format!("expected hyp:a,b,c, got {s:?}")))?;
                match parts[..] {
                    [a, b, c] => Ok(NamedKernel::HypergeometricSphere { a, b, c }),
                    _ => config(format!("expected hyp:a,b,c, got {s:?}")),
                }
            }
            _ => config(format!("unknown kernel {s:?}")),
        }
    }
}

/// Mercer kernel sum_k nu_k * addition_k(x, y) over a truncated eigen-system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralKernel {
    pub system: EigenSystem,
    pub nu: Vec<f64>,
    /// Bound on sup |K - K_truncated|, when known.
    pub tail_bound: f64,
}

impl SpectralKernel {
    pub fn new(system: EigenSystem, nu: Vec<f64>) -> Result<SpectralKernel> {
        if nu.len() != system.len() {
            return config(format!("{} coefficients for {} eigen-entries", nu.len(), system.len()));
        }
        if let Some(bad) = nu.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return domain(format!("Mercer coefficients must be finite and >= 0, found {bad}"));
        }
        Ok(SpectralKernel { system, nu, tail_bound: f64::NAN })
    }

    pub fn space(&self) -> Space {
        self.system.space
    }

    /// nu_k = (sqrt lambda_k)^{-(d+s)}, zero on the constant mode.
    pub fn synthetic(space: Space, freq: f64, s: f64) -> Result<SpectralKernel> {
        let system = EigenSystem::covering(space, freq)?;
        let g = space.dim_doubling() + s;
        let nu = system
            .entries
            .iter()
            .map(|e| if e.sqrt_lambda > 0.0 { e.sqrt_lambda.powf(-g) } else { 0.0 })
            .collect();
        SpectralKernel::new(system, nu)
    }

    /// nu_k = 1: no decay at all.
    pub fn white(space: Space, freq: f64) -> Result<SpectralKernel> {
        let system = EigenSystem::covering(space, freq)?;
        let nu = vec![1.0; system.len()];
        SpectralKernel::new(system, nu)
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut buf = vec![0.0; self.nu.len()];
        self.eval_with(x, y, &mut buf)
    }

    pub fn eval_with(&self, x: &[f64], y: &[f64], buf: &mut [f64]) -> f64 {
        self.system.addition_all(x, y, buf);
        self.nu.iter().zip(buf.iter()).map(|(n, a)| n * a).sum()
    }

    /// Keep entries with sqrt(lambda) <= freq.
    pub fn truncated(&self, freq: f64) -> Result<SpectralKernel> {
        let keep = self.system.entries.iter().take_while(|e| e.sqrt_lambda <= freq).count();
        if keep < 2 {
            return config(format!("truncation at {freq} leaves fewer than two entries"));
        }
        let system = EigenSystem::new(self.space(), keep - 1)?;
        let mut k = SpectralKernel::new(system, self.nu[..keep].to_vec())?;
        k.tail_bound = f64::NAN;
        Ok(k)
    }
}

/// Which route produces sphere coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoefficientRoute {
    /// Schoenberg series up to degree 256 where a power series exists, Funk-Hecke beyond.
    Auto,
    Schoenberg,
    FunkHecke,
}

const SCHOENBERG_AUTO_MAX: usize = 256;

/// Negative definite function psi.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NdKernel {
    /// psi_K(x, y) = K(x,x) + K(y,y) - 2K(x,y).
    FromPd(Box<KernelSpec>),
    /// rho(x, y)^alpha.
    MetricPower { space: Space, alpha: f64 },
}

impl NdKernel {
    pub fn metric_power(space: Space, alpha: f64) -> Result<NdKernel> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return domain(format!("metric exponent must be > 0, got {alpha}"));
        }
        Ok(NdKernel::MetricPower { space, alpha })
    }

    pub fn space(&self) -> Space {
        match self {
            NdKernel::FromPd(k) => k.space(),
            NdKernel::MetricPower { space, .. } => *space,
        }
    }

    pub fn psi(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            NdKernel::FromPd(k) => k.eval(x, x) + k.eval(y, y) - 2.0 * k.eval(x, y),
            NdKernel::MetricPower { space, alpha } => space.dist(x, y).powf(*alpha),
        }
    }

    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.space().check_point(x)?;
        self.space().check_point(y)?;
        Ok(self.psi(x, y))
    }

    pub fn gram(&self, pts: &PointSet) -> DMatrix<f64> {
        match self {
            NdKernel::FromPd(k) => {
                let g = k.gram(pts);
                let n = pts.len();
                DMatrix::from_fn(n, n, |i, j| g[(i, i)] + g[(j, j)] - 2.0 * g[(i, j)])
            }
            _ => {
                let n = pts.len();
                let mut m = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in i + 1..n {
                        let v = self.psi(pts.get(i), pts.get(j));
                        m[(i, j)] = v;
                        m[(j, i)] = v;
                    }
                }
                m
            }
        }
    }

    /// (1/|M|) int psi(x, u) dmu(u).
    pub fn mean_against(&self, x: &[f64]) -> f64 {
        let space = self.space();
        match space {
            Space::IntervalMixed | Space::IntervalNeumann => {
                adaptive_with_breaks(0.0, 1.0, &[x[0]], 1e-14, |u| self.psi(x, &[u]))
            }
            Space::Circle => {
                let anti = if x[0] >= 0.0 { x[0] - 1.0 } else { x[0] + 1.0 };
                adaptive_with_breaks(-1.0, 1.0, &[x[0], anti], 1e-14, |u| self.psi(x, &[u])) / 2.0
            }
            Space::Sphere(_) => {
                let (pts, w) = sphere_mean_nodes(space);
                let s: f64 = pts.iter().zip(w.iter()).map(|(p, w)| w * self.psi(x, p)).sum();
                s / space.total_measure()
            }
        }
    }
}

fn sphere_mean_nodes(space: Space) -> (PointSet, Vec<f64>) {
    let res = if space == Space::Sphere(2) { 96 } else { 200 };
    space.quadrature_nodes(res).expect("fixed resolution is valid")
}

/// How K-tilde was formed from psi.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AveragingPath {
    /// psi invariant with constant mean: K-tilde = C0 - psi/2.
    Invariant,
    /// Full double average by quadrature.
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedKernel {
    pub psi: NdKernel,
    pub c0: f64,
    pub path: AveragingPath,
}

impl AveragedKernel {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.path {
            AveragingPath::Invariant => self.c0 - 0.5 * self.psi.psi(x, y),
            AveragingPath::Quadrature => {
                0.5 * (self.psi.mean_against(x) + self.psi.mean_against(y) - self.psi.psi(x, y))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KernelSpec {
    Spectral(SpectralKernel),
    ClosedForm { name: NamedKernel, space: Space, c0: f64 },
    /// K_u(x,y) = K(x,y) + K(u,u) - K(x,u) - K(y,u).
    Recentered { base: Box<KernelSpec>, u: Vec<f64> },
    /// K-tilde built from a negative definite psi.
    Averaged(Box<AveragedKernel>),
    /// exp(-t psi).
    ExpNd { psi: Box<NdKernel>, t: f64 },
}

impl KernelSpec {
    pub fn named(name: NamedKernel, space: Space) -> Result<KernelSpec> {
        name.check_space(space)?;
        let c0 = match (name, space) {
            (NamedKernel::SphereFractional(a), Space::Sphere(d)) => sphere_mean_power(d, a),
            _ => 0.0,
        };
        Ok(KernelSpec::ClosedForm { name, space, c0 })
    }

    pub fn space(&self) -> Space {
        match self {
            KernelSpec::Spectral(s) => s.space(),
            KernelSpec::ClosedForm { space, .. } => *space,
            KernelSpec::Recentered { base, .. } => base.space(),
            KernelSpec::Averaged(a) => a.psi.space(),
            KernelSpec::ExpNd { psi, .. } => psi.space(),
        }
    }

    /// K(x, y) with point validation.
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.space().check_point(x)?;
        self.space().check_point(y)?;
        Ok(self.eval(x, y))
    }

    /// K(x, y), no validation.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            KernelSpec::Spectral(s) => s.eval(x, y),
            KernelSpec::ClosedForm { name, space, c0 } => eval_named(*name, *space, *c0, x, y),
            KernelSpec::Recentered { base, u } => base.eval(x, y) + base.eval(u, u) - base.eval(x, u) - base.eval(y, u),
            KernelSpec::Averaged(a) => a.eval(x, y),
            KernelSpec::ExpNd { psi, t } => (-t * psi.psi(x, y)).exp(),
        }
    }

    /// Gram matrix on `pts`; K-tilde on the quadrature path computes each mean once.
    pub fn gram(&self, pts: &PointSet) -> DMatrix<f64> {
        let n = pts.len();
        let mut m = DMatrix::zeros(n, n);
        match self {
            KernelSpec::Averaged(a) if a.path == AveragingPath::Quadrature => {
                let c: Vec<f64> = pts.iter().map(|x| a.psi.mean_against(x)).collect();
                for i in 0..n {
                    for j in i..n {
                        let v = 0.5 * (c[i] + c[j] - a.psi.psi(pts.get(i), pts.get(j)));
                        m[(i, j)] = v;
                        m[(j, i)] = v;
                    }
                }
            }
            KernelSpec::Spectral(s) => {
                let mut buf = vec![0.0; s.nu.len()];
                for i in 0..n {
                    for j in i..n {
                        let v = s.eval_with(pts.get(i), pts.get(j), &mut buf);
                        m[(i, j)] = v;
                        m[(j, i)] = v;
                    }
                }
            }
            _ => {
                for i in 0..n {
                    for j in i..n {
                        let v = self.eval(pts.get(i), pts.get(j));
                        m[(i, j)] = v;
                        m[(j, i)] = v;
                    }
                }
            }
        }
        m
    }

    /// Mercer coefficients of a closed-form kernel, covering every eigenvalue
    /// with sqrt(lambda) <= `freq`. Spectral kernels are truncated instead.
    pub fn spectral(&self, freq: f64, route: CoefficientRoute) -> Result<SpectralKernel> {
        match self {
            KernelSpec::Spectral(s) => {
                if !s.system.covers(freq) {
                    return Err(Error::Truncation {
                        message: format!("spectral kernel truncated below sqrt(lambda) = {freq}"),
                        bound: s.tail_bound,
                    });
                }
                s.truncated(freq)
            }
            KernelSpec::ClosedForm { name, space, c0 } => spectral_coefficients(*name, *space, *c0, freq, route),
            _ => config("only closed-form and spectral kernels have Mercer coefficients here"),
        }
    }
}

fn eval_named(name: NamedKernel, space: Space, c0: f64, x: &[f64], y: &[f64]) -> f64 {
    match name {
        NamedKernel::MinXY => x[0].min(y[0]),
        NamedKernel::CircleBrownian => 0.5 - circle_dist(x[0], y[0]),
        NamedKernel::CircleFractional(a) => 1.0 / (a + 1.0) - circle_dist(x[0], y[0]).powf(a),
        NamedKernel::SphereArcsinBM => dot(x, y).clamp(-1.0, 1.0).asin(),
        NamedKernel::SphereFractional(a) => c0 - 0.5 * space.dist(x, y).powf(a),
        NamedKernel::HypergeometricSphere { a, b, c } => hyp2f1(a, b, c, dot(x, y).clamp(-1.0, 1.0)),
    }
}

/// (1/|S^d|) int rho(e, u)^alpha dmu(u).
pub fn sphere_mean_power(d: usize, alpha: f64) -> f64 {
    let w = sphere_area(d - 1) / sphere_area(d);
    w * crate::quadrature::adaptive(0.0, PI, 1e-15, |t| t.powf(alpha) * t.sin().powi(d as i32 - 1))
}

/// Mercer coefficients nu_k for a named kernel.
pub fn spectral_coefficients(
    name: NamedKernel,
    space: Space,
    c0: f64,
    freq: f64,
    route: CoefficientRoute,
) -> Result<SpectralKernel> {
    name.check_space(space)?;
    let system = EigenSystem::covering(space, freq)?;
    let kmax = system.truncation_index;
    let (nu, tail) = match name {
        NamedKernel::MinXY => {
            if space != Space::IntervalMixed {
                return config("min-xy has its Mercer expansion on interval-mixed");
            }
            let nu = system.entries.iter().map(|e| e.sqrt_lambda.powi(-2)).collect();
            (nu, 2.0 / (PI * PI * (kmax as f64 + 1.0)))
        }
        NamedKernel::CircleBrownian => {
            let nu: Vec<f64> = (0..=kmax)
                .map(|k| if k % 2 == 1 { 4.0 / (PI * PI * (k * k) as f64) } else { 0.0 })
                .collect();
            let tail = 0.5 - nu.iter().sum::<f64>();
            (nu, tail)
        }
        NamedKernel::CircleFractional(a) => {
            let mut nu = fourier_abs_alpha(a, kmax)?;
            nu[0] = 0.0;
            let tail = 1.0 / (a + 1.0) - nu.iter().sum::<f64>();
            (nu, tail)
        }
        NamedKernel::SphereArcsinBM | NamedKernel::SphereFractional(_) | NamedKernel::HypergeometricSphere { .. } => {
            let Space::Sphere(d) = space else { unreachable!() };
            let b = sphere_gegenbauer_coefficients(name, d, c0, kmax, route)?;
            let area = sphere_area(d);
            let nu: Vec<f64> = b
                .iter()
                .enumerate()
                .map(|(k, bk)| (area * bk / harmonic_dim(d, k)).max(0.0))
                .collect();
            let f1 = eval_named(name, space, c0, &unit(d), &unit(d));
            (nu, f1 - b.iter().sum::<f64>())
        }
    };
    let mut k = SpectralKernel::new(system, nu)?;
    k.tail_bound = tail.abs();
    Ok(k)
}

fn unit(d: usize) -> Vec<f64> {
    let mut e = vec![0.0; d + 1];
    e[0] = 1.0;
    e
}

fn sphere_gegenbauer_coefficients(
    name: NamedKernel,
    d: usize,
    c0: f64,
    kmax: usize,
    route: CoefficientRoute,
) -> Result<Vec<f64>> {
    let series = match name {
        NamedKernel::SphereArcsinBM => Some(PowerSeriesSpec::arcsin()),
        NamedKernel::HypergeometricSphere { a, b, c } => Some(PowerSeriesSpec::hypergeometric(a, b, c)?),
        _ => None,
    };
    let use_series = match route {
        CoefficientRoute::Schoenberg => {
            if series.is_none() {
                return config(format!("{name} has no power series; use the funk-hecke route"));
            }
            true
        }
        CoefficientRoute::FunkHecke => false,
        CoefficientRoute::Auto => series.is_some() && kmax <= SCHOENBERG_AUTO_MAX,
    };
    let nu = (d as f64 - 1.0) / 2.0;
    if use_series {
        return Ok(schoenberg_transform(series.as_ref().unwrap(), nu, kmax)?.coefficients);
    }
    match name {
        NamedKernel::SphereArcsinBM => zonal_coefficients(|th| PI / 2.0 - th, d, kmax),
        NamedKernel::SphereFractional(a) => zonal_coefficients(|th| c0 - 0.5 * th.powf(a), d, kmax),
        NamedKernel::HypergeometricSphere { a, b, c } => zonal_coefficients(|th| hyp2f1(a, b, c, th.cos()), d, kmax),
        _ => unreachable!(),
    }
}

/// psi_K for a positive definite kernel; symmetry is checked on 100 sampled pairs.
pub fn psi_from_pd(kernel: &KernelSpec) -> Result<NdKernel> {
    let space = kernel.space();
    let mut rng = stream_rng(0x5a11, STREAM_POINTS);
    let pts = space.sample_uniform(200, &mut rng);
    for i in 0..100 {
        let (x, y) = (pts.get(2 * i), pts.get(2 * i + 1));
        let (a, b) = (kernel.eval(x, y), kernel.eval(y, x));
        if (a - b).abs() > 1e-10 * (1.0 + a.abs()) {
            return Err(Error::Contract(format!("kernel is not symmetric: K(x,y) = {a}, K(y,x) = {b}")));
        }
    }
    Ok(NdKernel::FromPd(Box::new(kernel.clone())))
}

/// Recentered kernel K_u.
pub fn k_u(kernel: &KernelSpec, u: &[f64]) -> Result<KernelSpec> {
    kernel.space().check_point(u)?;
    Ok(KernelSpec::Recentered { base: Box::new(kernel.clone()), u: u.to_vec() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NdToPd {
    pub kernel: KernelSpec,
    pub c0: f64,
    pub path: AveragingPath,
    /// max - min of the sampled means C(x).
    pub mean_spread: f64,
}

// maps a point pair to a congruent pair under an isometry of the space
fn congruent_pair(space: Space, x: &[f64], y: &[f64], s: f64) -> (Vec<f64>, Vec<f64>) {
    match space {
        Space::IntervalMixed | Space::IntervalNeumann => (vec![1.0 - x[0]], vec![1.0 - y[0]]),
        Space::Circle => {
            let rot = |v: f64| (v + 1.0 + 2.0 * s).rem_euclid(2.0) - 1.0;
            (vec![rot(x[0])], vec![rot(y[0])])
        }
        Space::Sphere(d) => {
            // Householder reflection through a fixed unit vector
            let mut v: Vec<f64> = (0..=d).map(|i| (s * (i as f64 + 1.0)).sin() + 0.1).collect();
            let n = dot(&v, &v).sqrt();
            v.iter_mut().for_each(|c| *c /= n);
            let refl = |p: &[f64]| {
                let t = 2.0 * dot(p, &v);
                p.iter().zip(&v).map(|(a, b)| a - t * b).collect::<Vec<f64>>()
            };
            (refl(x), refl(y))
        }
    }
}

/// K-tilde from a negative definite psi.
pub fn nd_to_pd(psi: &NdKernel) -> Result<NdToPd> {
    let space = psi.space();
    let mut rng = stream_rng(0x7d, STREAM_POINTS);
    let pts = space.sample_uniform(100, &mut rng);
    let mut invariant = true;
    for i in 0..50 {
        let (x, y) = (pts.get(2 * i), pts.get(2 * i + 1));
        let (gx, gy) = congruent_pair(space, x, y, 0.37 * (i as f64 + 1.0));
        let (a, b) = (psi.psi(x, y), psi.psi(&gx, &gy));
        if (a - b).abs() > 1e-9 * (1.0 + a.abs()) {
            invariant = false;
            break;
        }
    }
    let means: Vec<f64> = pts.iter().take(16).map(|x| psi.mean_against(x)).collect();
    let lo = means.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = hi - lo;
    let constancy_tol = if space.is_sphere() && space != Space::Sphere(2) { 1e-2 } else { 1e-8 };
    if invariant && spread <= constancy_tol * (1.0 + hi.abs()) {
        let c0 = means.iter().sum::<f64>() / means.len() as f64;
        let avg = AveragedKernel { psi: psi.clone(), c0, path: AveragingPath::Invariant };
        return Ok(NdToPd { kernel: KernelSpec::Averaged(Box::new(avg)), c0, path: AveragingPath::Invariant, mean_spread: spread });
    }
    // c0 reported as the grand mean (1/|M|) int C(x) dmu(x)
    let (q, w) = space.quadrature_nodes(if space.is_sphere() { 24 } else { 16 })?;
    let c0 = q.iter().zip(&w).map(|(x, w)| w * psi.mean_against(x)).sum::<f64>() / space.total_measure();
    let avg = AveragedKernel { psi: psi.clone(), c0, path: AveragingPath::Quadrature };
    Ok(NdToPd { kernel: KernelSpec::Averaged(Box::new(avg)), c0, path: AveragingPath::Quadrature, mean_spread: spread })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GramMode {
    Pd,
    Nd,
}

impl FromStr for GramMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<GramMode> {
        match s {
            "pd" | "PD" => Ok(GramMode::Pd),
            "nd" | "ND" => Ok(GramMode::Nd),
            _ => config(format!("mode must be pd or nd, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum GramInput<'a> {
    Kernel(&'a KernelSpec),
    Psi(&'a NdKernel),
}

impl GramInput<'_> {
    fn space(&self) -> Space {
        match self {
            GramInput::Kernel(k) => k.space(),
            GramInput::Psi(p) => p.space(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    PdPass,
    NdPass,
    Violation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    /// Coefficients (zero-sum in ND mode).
    pub coefficients: Vec<f64>,
    pub points: PointSet,
    /// sum_ij c_i c_j G_ij: negative for a PD violation, positive for ND.
    pub form_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramReport {
    pub n_points: usize,
    pub mode: GramMode,
    pub min_eigenvalue: Option<f64>,
    pub max_zero_sum_form: Option<f64>,
    pub trace: f64,
    pub sup_norm: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

pub const GRAM_TOL: f64 = 1e-8;

fn eigen(m: DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    let n = m.nrows();
    let diag_lo = (0..n).map(|i| m[(i, i)]).fold(f64::INFINITY, f64::min);
    let diag_hi = (0..n).map(|i| m[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
    SymmetricEigen::try_new(m, 1e-14, 10_000).ok_or_else(|| {
        Error::Numeric(format!("symmetric eigensolver did not converge ({n}x{n}, diagonal range [{diag_lo:e}, {diag_hi:e}])"))
    })
}

/// Definiteness verdict for a kernel (PD) or psi (ND) on `n_points` seeded uniform points.
pub fn gram_definiteness_test(input: GramInput<'_>, n_points: usize, seed: u64, mode: GramMode) -> Result<GramReport> {
    if n_points < 2 {
        return config("gram test needs at least 2 points");
    }
    let mut rng = stream_rng(seed, STREAM_POINTS);
    let pts = input.space().sample_uniform(n_points, &mut rng);
    gram_test_on_points(input, &pts, mode)
}

pub fn gram_test_on_points(input: GramInput<'_>, pts: &PointSet, mode: GramMode) -> Result<GramReport> {
    let n = pts.len();
    match mode {
        GramMode::Pd => {
            let GramInput::Kernel(k) = input else {
                return config("PD mode needs a kernel, not a negative definite function");
            };
            let g = k.gram(pts);
            let trace = g.trace();
            let sup = g.amax();
            let eig = eigen(g)?;
            let (imin, &lmin) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .expect("n >= 2");
            let tol = GRAM_TOL * trace.abs();
            let pass = lmin >= -tol;
            let witness = (!pass).then(|| Witness {
                coefficients: eig.eigenvectors.column(imin).iter().copied().collect(),
                points: pts.clone(),
                form_value: lmin,
            });
            Ok(GramReport {
                n_points: n,
                mode,
                min_eigenvalue: Some(lmin),
                max_zero_sum_form: None,
                trace,
                sup_norm: sup,
                tolerance: tol,
                verdict: if pass { Verdict::PdPass } else { Verdict::Violation },
                witness,
            })
        }
        GramMode::Nd => {
            let owned;
            let psi = match input {
                GramInput::Psi(p) => p,
                GramInput::Kernel(k) => {
                    owned = psi_from_pd(k)?;
                    &owned
                }
            };
            let g = psi.gram(pts);
            let sup = g.amax();
            let trace = g.trace();
            // project onto the zero-sum subspace: P G P with P = I - 11'/n
            let p = DMatrix::<f64>::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64);
            let pg = &p * &g * &p;
            let sym = 0.5 * (&pg + pg.transpose());
            let eig = eigen(sym)?;
            let (imax, &lmax) = eig
                .eigenvalues
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .expect("n >= 2");
            let tol = GRAM_TOL * sup * n as f64;
            let pass = lmax <= tol;
            let witness = (!pass).then(|| {
                let mut c: DVector<f64> = eig.eigenvectors.column(imax).into_owned();
                let mean = c.mean();
                c.iter_mut().for_each(|v| *v -= mean);
                let form = (c.transpose() * &g * &c)[(0, 0)];
                Witness { coefficients: c.iter().copied().collect(), points: pts.clone(), form_value: form }
            });
            Ok(GramReport {
                n_points: n,
                mode,
                min_eigenvalue: None,
                max_zero_sum_form: Some(lmax),
                trace,
                sup_norm: sup,
                tolerance: tol,
                verdict: if pass { Verdict::NdPass } else { Verdict::Violation },
                witness,
            })
        }
    }
}

/// PD test of exp(-t psi) for each t.
pub fn exp_nd_is_pd_check(psi: &NdKernel, t_list: &[f64], n_points: usize, seed: u64) -> Result<Vec<GramReport>> {
    t_list
        .iter()
        .map(|&t| {
            if !(t > 0.0) {
                return domain(format!("t must be > 0, got {t}"));
            }
            let k = KernelSpec::ExpNd { psi: Box::new(psi.clone()), t };
            gram_definiteness_test(GramInput::Kernel(&k), n_points, seed, GramMode::Pd)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn named(n: NamedKernel) -> KernelSpec {
        KernelSpec::named(n, n.default_space()).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(named(NamedKernel::MinXY).evaluate(&[0.3], &[0.8]).unwrap(), 0.3);
        assert_eq!(named(NamedKernel::CircleBrownian).evaluate(&[0.4], &[0.4]).unwrap(), 0.5);
        let k = named(NamedKernel::SphereArcsinBM);
        let e = [0.0, 0.0, 1.0];
        assert!((k.evaluate(&e, &e).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!((k.evaluate(&e, &[0.0, 0.0, -1.0]).unwrap() + PI / 2.0).abs() < 1e-15);
        assert!(k.evaluate(&[0.5], &[0.2]).is_err());
    }

    #[test]
    fn parse_names() {
        for s in ["min-xy", "circle-brownian", "circle-fractional:0.5", "sphere-arcsin", "sphere-fractional:0.25", "hyp:0.3,0.4,1.2"] {
            let k: NamedKernel = s.parse().unwrap();
            assert_eq!(k.to_string(), s);
        }
        assert!("hyp:1,2".parse::<NamedKernel>().is_err());
        assert!(KernelSpec::named(NamedKernel::MinXY, Space::Circle).is_err());
        assert!(KernelSpec::named(NamedKernel::CircleFractional(1.5), Space::Circle).is_err());
    }

    #[test]
    fn psi_examples() {
        let psi = psi_from_pd(&named(NamedKernel::MinXY)).unwrap();
        assert!((psi.psi(&[0.2], &[0.7]) - 0.5).abs() < 1e-15);
        let psi = psi_from_pd(&named(NamedKernel::CircleBrownian)).unwrap();
        for (x, y) in [(0.1, 0.6), (-0.9, 0.9), (0.3, 0.3)] {
            let rho = circle_dist(x, y);
            assert!((psi.psi(&[x], &[y]) - 2.0 * rho).abs() < 1e-15);
        }
    }

    #[test]
    fn recentered_minxy() {
        let k = named(NamedKernel::MinXY);
        let k0 = k_u(&k, &[0.0]).unwrap();
        let k1 = k_u(&k, &[1.0]).unwrap();
        for i in 0..=10 {
            for j in 0..=10 {
                let (x, y) = (i as f64 / 10.0, j as f64 / 10.0);
                assert!((k0.eval(&[x], &[y]) - x.min(y)).abs() < 1e-15);
                let want = 0.5 * ((x - 1.0).abs() + (y - 1.0).abs() - (x - y).abs());
                assert!((k1.eval(&[x], &[y]) - want).abs() < 1e-15);
            }
            assert!(k1.eval(&[1.0], &[i as f64 / 10.0]).abs() < 1e-15);
        }
    }

    #[test]
    fn minxy_averaging_takes_quadrature_path() {
        let psi = psi_from_pd(&named(NamedKernel::MinXY)).unwrap();
        let r = nd_to_pd(&psi).unwrap();
        assert_eq!(r.path, AveragingPath::Quadrature);
        for (x, y) in [(0.1f64, 0.9f64), (0.5, 0.5), (0.3, 0.7)] {
            let want = 0.25 * (x * x + (1.0 - x) * (1.0 - x) + y * y + (1.0 - y) * (1.0 - y) - 2.0 * (x - y).abs());
            assert!((r.kernel.eval(&[x], &[y]) - want).abs() < 1e-13);
        }
    }

    #[test]
    fn sphere_rho_mean_is_half_pi() {
        let psi = NdKernel::metric_power(Space::Sphere(2), 1.0).unwrap();
        let r = nd_to_pd(&psi).unwrap();
        assert_eq!(r.path, AveragingPath::Invariant);
        assert!((r.c0 - PI / 2.0).abs() < 1e-6, "{}", r.c0);
        assert!((sphere_mean_power(2, 1.0) - PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn minxy_coefficients() {
        let s = spectral_coefficients(NamedKernel::MinXY, Space::IntervalMixed, 0.0, 100.0, CoefficientRoute::Auto).unwrap();
        assert!((s.nu[0] - 4.0 / (PI * PI)).abs() < 1e-15);
        let c = named(NamedKernel::CircleBrownian).spectral(50.0, CoefficientRoute::Auto).unwrap();
        assert_eq!(c.nu[2], 0.0);
        assert!((c.nu[3] - 4.0 / (9.0 * PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn gram_small_cases() {
        let k = named(NamedKernel::MinXY);
        let r = gram_definiteness_test(GramInput::Kernel(&k), 40, 3, GramMode::Pd).unwrap();
        assert_eq!(r.verdict, Verdict::PdPass);
        let psi = NdKernel::metric_power(Space::Circle, 1.5).unwrap();
        let r = gram_definiteness_test(GramInput::Psi(&psi), 60, 3, GramMode::Nd).unwrap();
        assert_eq!(r.verdict, Verdict::Violation);
        let w = r.witness.unwrap();
        assert!(w.coefficients.iter().sum::<f64>().abs() < 1e-10);
        assert!(w.form_value > 0.0);
        assert!(gram_definiteness_test(GramInput::Psi(&psi), 10, 3, GramMode::Pd).is_err());
    }

    #[test]
    fn exp_of_small_t_is_rank_one_like() {
        let psi = NdKernel::metric_power(Space::Sphere(2), 1.0).unwrap();
        let r = exp_nd_is_pd_check(&psi, &[1e-9, 1.0], 30, 1).unwrap();
        assert!(r.iter().all(|g| g.verdict == Verdict::PdPass));
        assert!((r[0].min_eigenvalue.unwrap()).abs() < 1e-6);
    }
}
