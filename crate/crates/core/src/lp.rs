//! Dyadic windows, delta-nets on the generator grid, band sums and the
//! Besov exponent fit.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::fit::fit_line;
use crate::kernels::SpectralKernel;
use crate::rng::{stream_rng, STREAM_NET, STREAM_PROBE};
use crate::spaces::{dot, sphere_area, PointSet, Space};

/// Smooth step used on [1, 2] for Phi.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Transition {
    /// h(t) = g(1-t) / (g(t) + g(1-t)), g(t) = exp(-1/t): C-infinity.
    #[default]
    Mollifier,
    /// (1 + cos(pi t)) / 2: only C^1, kept as an alternative window.
    CosineRamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LpWindow {
    pub transition: Transition,
}

fn g(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

impl LpWindow {
    pub fn new(transition: Transition) -> LpWindow {
        LpWindow { transition }
    }

    /// h on [0, 1], h(0) = 1, h(1) = 0.
    pub fn step(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        if t >= 1.0 {
            return 0.0;
        }
        match self.transition {
            Transition::Mollifier => {
                let (a, b) = (g(1.0 - t), g(t));
                a / (a + b)
            }
            Transition::CosineRamp => 0.5 * (1.0 + (PI * t).cos()),
        }
    }

    /// Phi: 1 on [0,1], 0 on [2, inf).
    pub fn phi(&self, lambda: f64) -> f64 {
        if lambda <= 1.0 {
            1.0
        } else if lambda >= 2.0 {
            0.0
        } else {
            self.step(lambda - 1.0)
        }
    }

    /// Psi_0 = Phi, Psi_j(l) = Phi(2^-j l) - Phi(2^{1-j} l).
    pub fn psi(&self, j: usize, lambda: f64) -> f64 {
        if j == 0 {
            return self.phi(lambda);
        }
        let s = (-(j as i32) as f64).exp2();
        self.phi(s * lambda) - self.phi(2.0 * s * lambda)
    }
}

/// Psi_j(lambda) with the default window.
pub fn window_eval(j: usize, lambda: f64) -> f64 {
    LpWindow::default().psi(j, lambda)
}

/// Band of a frequency: 0 for sqrt(lambda) <= 1, otherwise the j with
/// 2^{j-1} < sqrt(lambda) <= 2^j.
pub fn band_of(freq: f64) -> usize {
    let mut j = 0;
    let mut top = 1.0;
    while freq > top {
        j += 1;
        top *= 2.0;
    }
    j
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum NetStrategy {
    /// Farthest-point traversal of the grid; prefixes are nets at larger delta.
    #[default]
    FarthestPoint,
    /// Greedy acceptance over a shuffled grid.
    ShuffledGreedy,
}

/// Maximal delta-separated subset of a generator grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaNet {
    pub space: Space,
    pub delta: f64,
    pub points: PointSet,
    /// Distance from each point to the earlier ones at insertion (farthest-point only;
    /// non-increasing, first entry infinite).
    pub insertion_radius: Vec<f64>,
    pub grid_resolution: f64,
    pub strategy: NetStrategy,
}

impl DeltaNet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of leading points forming a net at scale `delta` >= self.delta.
    pub fn prefix_len(&self, delta: f64) -> usize {
        if self.strategy != NetStrategy::FarthestPoint {
            return self.len();
        }
        self.insertion_radius.iter().take_while(|r| **r >= delta - 1e-12).count()
    }
}

pub fn default_grid_resolution(space: Space, delta: f64) -> f64 {
    if space.is_sphere() {
        delta / 4.0
    } else {
        delta / 8.0
    }
}

const MAX_GRID: usize = 4_000_000;

/// Generator grid at spacing about `resolution`.
pub fn net_grid(space: Space, resolution: f64, seed: u64) -> Result<PointSet> {
    if !(resolution > 0.0) {
        return config("grid resolution must be positive");
    }
    let mut pts = PointSet::new(space.coord_dim());
    match space {
        Space::IntervalMixed | Space::IntervalNeumann => {
            let n = (1.0 / resolution).ceil() as usize;
            check_grid(n)?;
            for i in 0..=n {
                pts.push(&[i as f64 / n as f64]);
            }
        }
        Space::Circle => {
            let n = (2.0 / resolution).ceil() as usize;
            check_grid(n)?;
            for i in 0..n {
                pts.push(&[-1.0 + 2.0 * i as f64 / n as f64]);
            }
        }
        Space::Sphere(2) => {
            // Fibonacci lattice; 1.2 covers the gap between mean and maximal spacing
            let n = (1.2 * 4.0 * PI / (resolution * resolution)).ceil() as usize;
            check_grid(n)?;
            let golden = PI * (3.0 - 5f64.sqrt());
            for i in 0..n {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let phi = golden * i as f64;
                pts.push(&[r * phi.cos(), r * phi.sin(), z]);
            }
        }
        Space::Sphere(d) => {
            let n = (sphere_area(d) / resolution.powi(d as i32)).ceil() as usize;
            check_grid(n)?;
            let mut rng = stream_rng(seed, STREAM_NET + 1);
            pts = space.sample_uniform(n, &mut rng);
        }
    }
    Ok(pts)
}

fn check_grid(n: usize) -> Result<()> {
    if n > MAX_GRID {
        return config(format!("generator grid of {n} points exceeds the {MAX_GRID} limit"));
    }
    Ok(())
}

/// Farthest-point delta-net with the default grid.
pub fn build_delta_net(space: Space, delta: f64, grid_resolution: Option<f64>, seed: u64) -> Result<DeltaNet> {
    build_delta_net_with(space, delta, grid_resolution, seed, NetStrategy::FarthestPoint)
}

pub fn build_delta_net_with(
    space: Space,
    delta: f64,
    grid_resolution: Option<f64>,
    seed: u64,
    strategy: NetStrategy,
) -> Result<DeltaNet> {
    if !(delta > 0.0) || !delta.is_finite() {
        return config(format!("delta must be positive, got {delta}"));
    }
    let res = grid_resolution.unwrap_or_else(|| default_grid_resolution(space, delta));
    if res > delta / 4.0 + 1e-15 {
        return config(format!("grid resolution {res} is coarser than delta/4 = {}", delta / 4.0));
    }
    let grid = net_grid(space, res, seed)?;
    let (idx, radius) = match strategy {
        NetStrategy::FarthestPoint => farthest_point(space, &grid, delta, seed),
        NetStrategy::ShuffledGreedy => shuffled_greedy(space, &grid, delta, seed),
    };
    Ok(DeltaNet {
        space,
        delta,
        points: grid.subset(&idx),
        insertion_radius: radius,
        grid_resolution: res,
        strategy,
    })
}

fn farthest_point(space: Space, grid: &PointSet, delta: f64, seed: u64) -> (Vec<usize>, Vec<f64>) {
    let n = grid.len();
    let mut rng = stream_rng(seed, STREAM_NET);
    let first = rng.random_range(0..n);
    let mut idx = vec![first];
    let mut radius = vec![f64::INFINITY];
    if space.is_sphere() {
        // track the largest inner product with the net instead of arccos distances
        let mut best: Vec<f64> = grid.iter().map(|p| dot(p, grid.get(first))).collect();
        let cos_delta = (delta - 1e-12).cos();
        loop {
            let (i, &m) = best.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
            if m > cos_delta || delta > PI {
                break;
            }
            idx.push(i);
            radius.push(m.clamp(-1.0, 1.0).acos());
            let c = grid.get(i);
            for (b, p) in best.iter_mut().zip(grid.iter()) {
                let v = dot(p, c);
                if v > *b {
                    *b = v;
                }
            }
        }
    } else {
        let mut dmin: Vec<f64> = grid.iter().map(|p| space.dist(p, grid.get(first))).collect();
        loop {
            let (i, &m) = dmin.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
            if m < delta - 1e-12 {
                break;
            }
            idx.push(i);
            radius.push(m);
            let c = grid.get(i);
            for (dm, p) in dmin.iter_mut().zip(grid.iter()) {
                let v = space.dist(p, c);
                if v < *dm {
                    *dm = v;
                }
            }
        }
    }
    (idx, radius)
}

fn shuffled_greedy(space: Space, grid: &PointSet, delta: f64, seed: u64) -> (Vec<usize>, Vec<f64>) {
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.shuffle(&mut stream_rng(seed, STREAM_NET));
    let mut idx: Vec<usize> = Vec::new();
    for i in order {
        let p = grid.get(i);
        if idx.iter().all(|&a| space.dist(p, grid.get(a)) >= delta - 1e-12) {
            idx.push(i);
        }
    }
    let r = vec![f64::NAN; idx.len()];
    (idx, r)
}

/// (minimum pairwise separation, maximum distance from a grid point to the net).
pub fn net_quality(net: &DeltaNet, grid: &PointSet) -> (f64, f64) {
    let pts = &net.points;
    let mut sep = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            sep = sep.min(net.space.dist(pts.get(i), pts.get(j)));
        }
    }
    let cover = grid
        .iter()
        .map(|g| pts.iter().map(|p| net.space.dist(g, p)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    (sep, cover)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Discretization {
    /// max over a delta-net with delta = 2^-j.
    NetSup,
    /// max over the generator grid of that net.
    GridSup,
    /// one evaluation; the diagonal is constant on the circle and sphere.
    InvariantDiagonal,
}

impl FromStr for Discretization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Discretization> {
        match s {
            "net" => Ok(Discretization::NetSup),
            "grid" => Ok(Discretization::GridSup),
            "diag" => Ok(Discretization::InvariantDiagonal),
            _ => config(format!("discretization must be net, grid or diag, got {s:?}")),
        }
    }
}

/// Per-band sums of nu_k * diag_k(x) at one point.
fn band_profile(kernel: &SpectralKernel, x: &[f64], j_max: usize, buf: &mut [f64], out: &mut [f64]) {
    kernel.system.addition_all(x, x, buf);
    out.fill(0.0);
    for ((e, nu), a) in kernel.system.entries.iter().zip(&kernel.nu).zip(buf.iter()) {
        let j = band_of(e.sqrt_lambda);
        if j <= j_max {
            out[j] += nu * a;
        }
    }
}

fn require_cover(kernel: &SpectralKernel, j: usize) -> Result<()> {
    let freq = (j as f64).exp2();
    if !kernel.system.covers(freq) {
        return Err(Error::Truncation {
            message: format!(
                "kernel truncated at sqrt(lambda) = {:.4}, band {j} needs {freq}",
                kernel.system.entries.last().map(|e| e.sqrt_lambda).unwrap_or(0.0)
            ),
            bound: kernel.tail_bound,
        });
    }
    Ok(())
}

fn evaluation_points(space: Space, j: usize, disc: Discretization, seed: u64) -> Result<Vec<PointSet>> {
    let delta = (-(j as f64)).exp2();
    match disc {
        Discretization::InvariantDiagonal => {
            if space.is_interval() {
                return config("the diagonal is not constant on the interval; use net or grid");
            }
            let mut p = PointSet::new(space.coord_dim());
            let mut e = vec![0.0; space.coord_dim()];
            e[0] = 1.0;
            p.push(&e);
            Ok(vec![p])
        }
        Discretization::NetSup => Ok(vec![build_delta_net(space, delta, None, seed)?.points]),
        Discretization::GridSup => Ok(vec![net_grid(space, default_grid_resolution(space, delta), seed)?]),
    }
}

/// S_j = sup_x sum_{k in band j} nu_k diag_k(x).
pub fn band_sum(kernel: &SpectralKernel, j: usize, disc: Discretization) -> Result<f64> {
    require_cover(kernel, j)?;
    let pts = evaluation_points(kernel.space(), j, disc, 0)?;
    let mut buf = vec![0.0; kernel.nu.len()];
    let mut prof = vec![0.0; j + 1];
    let mut best: f64 = 0.0;
    for x in pts[0].iter() {
        band_profile(kernel, x, j, &mut buf, &mut prof);
        best = best.max(prof[j]);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandReport {
    pub band_sums: Vec<f64>,
    pub fitted_s: f64,
    pub fit_range: (usize, usize),
    pub fit_residual: f64,
    pub discretization: Discretization,
}

/// Default fit range [4, j_max - 2].
pub fn default_fit_range(j_max: usize) -> (usize, usize) {
    (4, j_max.saturating_sub(2))
}

/// Band sums S_0..S_{j_max} and s = -slope of log2 S_j over the fit range.
pub fn kbes_estimate(
    kernel: &SpectralKernel,
    j_max: usize,
    fit_range: Option<(usize, usize)>,
    disc: Discretization,
) -> Result<BandReport> {
    let (lo, hi) = fit_range.unwrap_or_else(|| default_fit_range(j_max));
    if !(j_max >= hi && hi >= lo + 2) {
        return config(format!("need j_max >= hi >= lo + 2, got j_max={j_max}, range [{lo},{hi}]"));
    }
    require_cover(kernel, j_max)?;
    let mut sums = vec![0.0f64; j_max + 1];
    let mut buf = vec![0.0; kernel.nu.len()];
    let mut prof = vec![0.0; j_max + 1];
    match disc {
        Discretization::NetSup => {
            // prefixes of one farthest-point traversal are the coarser nets
            let net = build_delta_net(kernel.space(), (-(j_max as f64)).exp2(), None, 0)?;
            let lens: Vec<usize> = (0..=j_max).map(|j| net.prefix_len((-(j as f64)).exp2())).collect();
            for (i, x) in net.points.iter().enumerate() {
                band_profile(kernel, x, j_max, &mut buf, &mut prof);
                for j in 0..=j_max {
                    if i < lens[j] {
                        sums[j] = sums[j].max(prof[j]);
                    }
                }
            }
        }
        _ => {
            for (j, s) in sums.iter_mut().enumerate() {
                let pts = evaluation_points(kernel.space(), j, disc, 0)?;
                for x in pts[0].iter() {
                    band_profile(kernel, x, j, &mut buf, &mut prof[..=j]);
                    *s = s.max(prof[j]);
                }
            }
        }
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (j, s) in sums.iter().enumerate().take(hi + 1).skip(lo) {
        if *s <= 0.0 {
            return Err(Error::DegenerateFit(format!(
                "S_{j} = 0 inside fit range [{lo},{hi}]; choose a narrower range"
            )));
        }
        xs.push(j as f64);
        ys.push(s.log2());
    }
    let f = fit_line(&xs, &ys)?;
    Ok(BandReport { band_sums: sums, fitted_s: -f.slope, fit_range: (lo, hi), fit_residual: f.residual, discretization: disc })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DppReport {
    pub j: usize,
    pub net_size: usize,
    /// max over the 2^-j net of H(x, x).
    pub net_max: f64,
    /// sup over probes of H(x, x) and |H(x, y)|.
    pub probe_sup: f64,
    pub holds: bool,
}

pub const DPP_SLACK: f64 = 1e-8;

/// Compare the net maximum of the low-pass kernel H = sum_{sqrt(lambda) <= 2^j}
/// with a random-probe supremum: net_max <= probe_sup <= 4 net_max.
pub fn dpp_check(kernel: &SpectralKernel, j: usize, n_probe: usize, seed: u64) -> Result<DppReport> {
    require_cover(kernel, j)?;
    let freq = (j as f64).exp2();
    let h = kernel.truncated(freq)?;
    let space = h.space();
    let net = build_delta_net(space, 1.0 / freq, None, seed)?;
    let mut buf = vec![0.0; h.nu.len()];
    let net_max = net.points.iter().map(|x| h.eval_with(x, x, &mut buf)).fold(f64::NEG_INFINITY, f64::max);
    let mut rng = stream_rng(seed, STREAM_PROBE);
    let probes = space.sample_uniform(n_probe, &mut rng);
    let mut probe_sup = net_max;
    for x in probes.iter() {
        probe_sup = probe_sup.max(h.eval_with(x, x, &mut buf));
    }
    let pairs = space.sample_uniform(2 * n_probe, &mut rng);
    for i in 0..n_probe {
        probe_sup = probe_sup.max(h.eval_with(pairs.get(2 * i), pairs.get(2 * i + 1), &mut buf).abs());
    }
    let holds = net_max <= probe_sup && probe_sup <= 4.0 * net_max + DPP_SLACK;
    Ok(DppReport { j, net_size: net.len(), net_max, probe_sup, holds })
}
