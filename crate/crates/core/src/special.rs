//! Gegenbauer polynomials, Pochhammer logs, the power-series to Gegenbauer
//! transform, arch integrals for |x|^alpha and a real 2F1 on [-1, 1].

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fit::{fit_line, LineFit};
use crate::quadrature::{adaptive, apply_rule, gl16};

/// Normalized Gegenbauer polynomial W_k^nu(x) = C_k^nu(x) / C_k^nu(1).
/// `nu = 0` gives the Chebyshev polynomial T_k.
pub fn gegenbauer_w(nu: f64, k: usize, x: f64) -> Result<f64> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return domain(format!("gegenbauer index nu must be >= 0, got {nu}"));
    }
    if !(x.abs() <= 1.0 + 1e-12) {
        return domain(format!("gegenbauer argument {x} outside [-1,1]"));
    }
    let mut w = vec![0.0; k + 1];
    gegenbauer_w_all(nu, x.clamp(-1.0, 1.0), &mut w);
    Ok(w[k])
}

/// T_k(x) via the same recurrence with nu = 0.
pub fn chebyshev_t(k: usize, x: f64) -> Result<f64> {
    gegenbauer_w(0.0, k, x)
}

/// Fills `out[k] = W_k^nu(x)` for `k < out.len()`.
///
/// W_k = (2(k+nu-1) x W_{k-1} - (k-1) W_{k-2}) / (k + 2nu - 1).
pub fn gegenbauer_w_all(nu: f64, x: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    if x == 1.0 {
        out.fill(1.0);
        return;
    }
    if x == -1.0 {
        for (k, o) in out.iter_mut().enumerate() {
            *o = if k % 2 == 0 { 1.0 } else { -1.0 };
        }
        return;
    }
    out[0] = 1.0;
    if n == 1 {
        return;
    }
    out[1] = x;
    let (mut w0, mut w1) = (1.0, x);
    for (k, o) in out.iter_mut().enumerate().skip(2) {
        let kf = k as f64;
        let w2 = (2.0 * (kf + nu - 1.0) * x * w1 - (kf - 1.0) * w0) / (kf + 2.0 * nu - 1.0);
        *o = w2;
        w0 = w1;
        w1 = w2;
    }
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

// Stirling remainder for ln Gamma, adequate for z >= 10.
fn stirling_series(z: f64) -> f64 {
    let z2 = z * z;
    (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * z2)) / z2) / z2) / z
}

/// ln (a)_n = ln Gamma(a+n) - ln Gamma(a) for a > 0.
pub fn log_pochhammer(a: f64, n: u64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return domain(format!("log_pochhammer needs a > 0, got {a}"));
    }
    Ok(ln_poch(a, n as f64))
}

/// Unchecked ln (a)_n; `n` is a nonnegative integer stored as f64.
pub(crate) fn ln_poch(a: f64, n: f64) -> f64 {
    if n <= 64.0 {
        let mut s = 0.0;
        let mut i = 0.0;
        while i < n {
            s += (a + i).ln();
            i += 1.0;
        }
        return s;
    }
    // walk a up to 10 with exact factors, then a Stirling difference
    let mut head = 0.0;
    let mut a = a;
    let mut n = n;
    while a < 10.0 && n > 0.0 {
        head += a.ln();
        a += 1.0;
        n -= 1.0;
    }
    let b = a + n;
    head + (a - 0.5) * (n / a).ln_1p() + n * (b.ln() - 1.0) + stirling_series(b) - stirling_series(a)
}

/// ln of the binomial coefficient C(n, k) for real n >= k >= 0.
pub fn ln_binomial(n: f64, k: f64) -> f64 {
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// Power series f(x) = sum_n a_n x^n with a_n = A_n / n! >= 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CoefficientRule {
    Arcsin,
    Hypergeometric { a: f64, b: f64, c: f64 },
    Monomial(usize),
    /// Coefficients a_n = A_n / n!, n = 0..len.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSeriesSpec {
    pub rule: CoefficientRule,
    /// Hard cap on the series index used by the transform.
    pub n_max: usize,
}

pub const DEFAULT_N_MAX: usize = 1 << 21;

impl PowerSeriesSpec {
    pub fn new(rule: CoefficientRule) -> Result<PowerSeriesSpec> {
        let spec = PowerSeriesSpec { rule, n_max: DEFAULT_N_MAX };
        spec.validate()?;
        Ok(spec)
    }

    pub fn arcsin() -> PowerSeriesSpec {
        PowerSeriesSpec { rule: CoefficientRule::Arcsin, n_max: DEFAULT_N_MAX }
    }

    pub fn hypergeometric(a: f64, b: f64, c: f64) -> Result<PowerSeriesSpec> {
        PowerSeriesSpec::new(CoefficientRule::Hypergeometric { a, b, c })
    }

    pub fn monomial(n: usize) -> PowerSeriesSpec {
        PowerSeriesSpec { rule: CoefficientRule::Monomial(n), n_max: DEFAULT_N_MAX }
    }

    pub fn with_n_max(mut self, n_max: usize) -> PowerSeriesSpec {
        self.n_max = n_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match &self.rule {
            CoefficientRule::Hypergeometric { a, b, c } => {
                if !(*a > 0.0 && *b > 0.0) {
                    return domain(format!("hypergeometric series needs a, b > 0 for nonnegative coefficients, got a={a}, b={b}"));
                }
                if !(*c > a + b) {
                    return domain(format!("hypergeometric series needs c > a + b, got a={a}, b={b}, c={c}"));
                }
            }
            CoefficientRule::Explicit(v) => {
                if let Some(bad) = v.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
                    return domain(format!("explicit coefficients must be finite and >= 0, found {bad}"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Nominal smoothness exponent alpha with A_n/n! = O(n^{-1-alpha}).
    pub fn alpha_nominal(&self) -> Option<f64> {
        match &self.rule {
            CoefficientRule::Arcsin => Some(0.5),
            CoefficientRule::Hypergeometric { a, b, c } => Some(c - a - b),
            _ => None,
        }
    }

    /// a_n.
    pub fn coefficient(&self, n: usize) -> f64 {
        match self.ln_coefficient(n) {
            Some(l) => l.exp(),
            None => 0.0,
        }
    }

    /// ln a_n, `None` where a_n = 0.
    pub fn ln_coefficient(&self, n: usize) -> Option<f64> {
        let nf = n as f64;
        match &self.rule {
            CoefficientRule::Arcsin => {
                if n % 2 == 0 {
                    return None;
                }
                let m = ((n - 1) / 2) as f64;
                Some(2.0 * ln_poch(0.5, m) - ln_gamma(m + 1.0) - ln_poch(1.5, m))
            }
            CoefficientRule::Hypergeometric { a, b, c } => {
                Some(ln_poch(*a, nf) + ln_poch(*b, nf) - ln_poch(*c, nf) - ln_gamma(nf + 1.0))
            }
            CoefficientRule::Monomial(m) => (n == *m).then_some(0.0),
            CoefficientRule::Explicit(v) => v.get(n).filter(|x| **x > 0.0).map(|x| x.ln()),
        }
    }

    /// f(x) for x in [-1, 1], by closed form where one exists.
    pub fn value(&self, x: f64) -> f64 {
        match &self.rule {
            CoefficientRule::Arcsin => x.clamp(-1.0, 1.0).asin(),
            CoefficientRule::Hypergeometric { a, b, c } => hyp2f1(*a, *b, *c, x),
            CoefficientRule::Monomial(m) => x.powi(*m as i32),
            CoefficientRule::Explicit(v) => v.iter().rev().fold(0.0, |acc, c| acc * x + c),
        }
    }

    /// Whether the series has finitely many terms.
    fn is_finite_series(&self) -> bool {
        matches!(self.rule, CoefficientRule::Monomial(_) | CoefficientRule::Explicit(_))
    }

    // A_{n+2} / A_n with A_n = n! a_n, for n where a_n != 0.
    fn derivative_ratio(&self, n: f64) -> f64 {
        match &self.rule {
            CoefficientRule::Arcsin => n * n,
            CoefficientRule::Hypergeometric { a, b, c } => {
                (a + n) * (a + n + 1.0) * (b + n) * (b + n + 1.0) / ((c + n) * (c + n + 1.0))
            }
            _ => unreachable!("finite series are summed directly"),
        }
    }
}

/// Coefficients of arcsin x up to x^{2 j_max + 1}: ((1/2)_j)^2 / (j! (3/2)_j) at odd powers.
pub fn arcsin_coefficients(j_max: usize) -> PowerSeriesSpec {
    let spec = PowerSeriesSpec::arcsin();
    let coeffs = (0..=2 * j_max + 1).map(|n| spec.coefficient(n)).collect();
    PowerSeriesSpec { rule: CoefficientRule::Explicit(coeffs), n_max: 2 * j_max + 1 }
}

/// f(x) = sum_j B_j W_j^nu(x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GegenbauerExpansion {
    pub nu: f64,
    pub coefficients: Vec<f64>,
    /// Bound on |f - sum_{j <= j_max} B_j W_j| over [-1,1]: inner-sum tails plus
    /// the unsummed j-tail, which equals f(1) - sum B_j since W_j(1) = 1.
    pub tail_bound: f64,
    /// Largest relative tail left in any inner sum.
    pub inner_tail: f64,
}

impl GegenbauerExpansion {
    pub fn eval(&self, x: f64) -> f64 {
        let mut w = vec![0.0; self.coefficients.len()];
        gegenbauer_w_all(self.nu, x, &mut w);
        w.iter().zip(&self.coefficients).map(|(w, b)| w * b).sum()
    }

    /// Least-squares fit of ln B_j on ln j over positive B_j with j in [lo, hi];
    /// returns the fit and the decay exponent (minus the slope).
    pub fn fitted_decay(&self, lo: usize, hi: usize) -> Result<(f64, LineFit)> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for j in lo.max(1)..=hi.min(self.coefficients.len().saturating_sub(1)) {
            let b = self.coefficients[j];
            if b > 1e-300 {
                xs.push((j as f64).ln());
                ys.push(b.ln());
            }
        }
        if xs.len() < 3 {
            return Err(Error::DegenerateFit(format!("fewer than 3 positive coefficients in [{lo},{hi}]")));
        }
        let f = fit_line(&xs, &ys)?;
        Ok((-f.slope, f))
    }
}

/// B_j = (2nu)_j / (2^j j! (nu)_j) * sum_k A_{j+2k} / (4^k k! (nu+j+1)_k).
pub fn schoenberg_transform(spec: &PowerSeriesSpec, nu: f64, j_max: usize) -> Result<GegenbauerExpansion> {
    spec.validate()?;
    if !(nu > 0.0) || !nu.is_finite() {
        return domain(format!("schoenberg transform needs nu > 0, got {nu}"));
    }
    let one = |j: usize| schoenberg_coefficient(spec, nu, j);
    #[cfg(feature = "parallel")]
    let parts: Vec<Result<(f64, f64)>> = {
        use rayon::prelude::*;
        (0..=j_max).into_par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Result<(f64, f64)>> = (0..=j_max).map(one).collect();

    let mut coefficients = Vec::with_capacity(j_max + 1);
    let mut abs_tail = 0.0;
    let mut inner_tail: f64 = 0.0;
    for p in parts {
        let (b, rel) = p?;
        coefficients.push(b);
        abs_tail += rel * b.abs();
        inner_tail = inner_tail.max(rel);
    }
    let total: f64 = coefficients.iter().sum();
    let j_tail = (spec.value(1.0) - total).max(0.0);
    Ok(GegenbauerExpansion { nu, coefficients, tail_bound: abs_tail + j_tail, inner_tail })
}

const INNER_REL_TOL: f64 = 1e-16;
const INNER_FAIL_TOL: f64 = 1e-2;
const RESYNC_EVERY: usize = 1 << 16;

// Returns (B_j, relative tail bound).
fn schoenberg_coefficient(spec: &PowerSeriesSpec, nu: f64, j: usize) -> Result<(f64, f64)> {
    let jf = j as f64;
    let ln_pref = ln_poch(2.0 * nu, jf) - jf * LN_2 - ln_gamma(jf + 1.0) - ln_poch(nu, jf);
    // ln of the k-th inner term
    let ln_term = |k: f64, ln_a: f64| {
        let n = jf + 2.0 * k;
        ln_a + ln_gamma(n + 1.0) - k * 2.0 * LN_2 - ln_gamma(k + 1.0) - ln_poch(nu + jf + 1.0, k)
    };

    if spec.is_finite_series() {
        let mut s = 0.0;
        let mut k = 0usize;
        loop {
            let n = j + 2 * k;
            let len = match &spec.rule {
                CoefficientRule::Monomial(m) => m + 1,
                CoefficientRule::Explicit(v) => v.len(),
                _ => unreachable!(),
            };
            if n >= len {
                break;
            }
            if let Some(la) = spec.ln_coefficient(n) {
                s += (ln_pref + ln_term(k as f64, la)).exp();
            }
            k += 1;
        }
        return Ok((s, 0.0));
    }

    // first nonzero term: arcsin has only odd powers
    let Some(ln_a0) = spec.ln_coefficient(j) else {
        return Ok((0.0, 0.0));
    };
    let mut ref_ln = ln_term(0.0, ln_a0);
    let mut cur = 1.0;
    let mut sum = 1.0;
    let mut k = 0usize;
    let mut rel_tail = f64::INFINITY;
    loop {
        let n = j + 2 * k;
        if n + 2 > spec.n_max {
            break;
        }
        let kf = k as f64;
        let r = spec.derivative_ratio(n as f64) / (4.0 * (kf + 1.0) * (nu + jf + 1.0 + kf));
        cur *= r;
        k += 1;
        if k % RESYNC_EVERY == 0 {
            if let Some(la) = spec.ln_coefficient(j + 2 * k) {
                cur = (ln_term(k as f64, la) - ref_ln).exp();
            }
        }
        sum += cur;
        if cur > 1e200 {
            sum *= 1e-200;
            cur *= 1e-200;
            ref_ln += 200.0 * std::f64::consts::LN_10;
        }
        if r < 1.0 {
            // power-law tail: r ~ 1 - p/k  =>  sum_{i>k} t_i ~ t_k / ((1 - r) - 1/k)
            let denom = (1.0 - r) - 1.0 / k as f64;
            rel_tail = if denom > 0.0 { cur * r / denom / sum } else { f64::INFINITY };
            if cur < INNER_REL_TOL * sum && rel_tail < INNER_REL_TOL {
                break;
            }
        }
    }
    if !(rel_tail <= INNER_FAIL_TOL) {
        return Err(Error::Truncation {
            message: format!("inner Gegenbauer sum for j = {j} not converged by n_max = {}", spec.n_max),
            bound: rel_tail,
        });
    }
    let b = (ln_pref + ref_ln).exp() * sum * (1.0 + rel_tail.min(1.0));
    Ok((b, rel_tail))
}

/// B_k of a zonal function f(cos theta) on S^d by Funk-Hecke:
/// B_k = dim_k |S^{d-1}| / |S^d| * int_0^pi f W_k(cos theta) sin^{d-1} theta dtheta.
/// `f` takes the angle theta, which keeps kernels in the geodesic distance smooth.
pub fn zonal_coefficients<F>(f: F, d: usize, k_max: usize) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64 + Sync,
{
    if d < 2 {
        return domain(format!("zonal coefficients need d >= 2, got {d}"));
    }
    let nu = (d as f64 - 1.0) / 2.0;
    let (nodes, weights) = zonal_nodes(k_max);
    let n = k_max + 1;
    let accumulate = |range: std::ops::Range<usize>| {
        let mut acc = vec![0.0; n];
        let mut w = vec![0.0; n];
        for i in range {
            let th = nodes[i];
            let s = th.sin();
            let g = weights[i] * f(th) * s.powi(d as i32 - 1);
            if g == 0.0 {
                continue;
            }
            gegenbauer_w_all(nu, th.cos(), &mut w);
            for (a, wk) in acc.iter_mut().zip(&w) {
                *a += g * wk;
            }
        }
        acc
    };
    let chunk = 2048;
    let ranges: Vec<_> = (0..nodes.len()).step_by(chunk).map(|s| s..(s + chunk).min(nodes.len())).collect();
    #[cfg(feature = "parallel")]
    let partial: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        ranges.into_par_iter().map(accumulate).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partial: Vec<Vec<f64>> = ranges.into_iter().map(accumulate).collect();
    let mut integral = vec![0.0; n];
    for p in partial {
        for (a, b) in integral.iter_mut().zip(p) {
            *a += b;
        }
    }
    let scale = crate::spaces::sphere_area(d - 1) / crate::spaces::sphere_area(d);
    Ok(integral
        .iter()
        .enumerate()
        .map(|(k, v)| crate::spaces::harmonic_dim(d, k) * scale * v)
        .collect())
}

// Half an oscillation of W_k per 16-point panel, geometric grading into theta = 0.
fn zonal_nodes(k_max: usize) -> (Vec<f64>, Vec<f64>) {
    let panels = k_max + 16;
    let h = PI / panels as f64;
    let rule = gl16();
    let mut nodes = Vec::with_capacity(16 * (panels + 48));
    let mut weights = Vec::with_capacity(nodes.capacity());
    let mut push = |a: f64, b: f64| {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        for (x, w) in rule.0.iter().zip(&rule.1) {
            nodes.push(c + r * x);
            weights.push(r * w);
        }
    };
    let mut hi = h;
    for _ in 0..48 {
        push(0.5 * hi, hi);
        hi *= 0.5;
    }
    push(0.0, hi);
    for p in 1..panels {
        push(p as f64 * h, (p + 1) as f64 * h);
    }
    (nodes, weights)
}

// int_0^pi sin(u) (u + j pi)^{alpha - 1} du
fn arch(alpha: f64, j: usize) -> f64 {
    if j == 0 {
        // u = t^{1/alpha} removes the u^{alpha-1} singularity
        let top = PI.powf(alpha);
        return adaptive(0.0, top, 1e-15, |t| t.powf(1.0 / alpha).sin()) / alpha;
    }
    let shift = j as f64 * PI;
    if j >= 4 {
        return apply_rule(gl16(), 0.0, PI, |u| u.sin() * (u + shift).powf(alpha - 1.0));
    }
    adaptive(0.0, PI, 1e-16, |u| u.sin() * (u + shift).powf(alpha - 1.0))
}

/// gamma_k = int_0^{k pi} u^{alpha-1} sin u du for 0 < alpha <= 1.
pub fn gamma_k_integral(alpha: f64, k: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("gamma_k_integral needs alpha in (0,1], got {alpha}"));
    }
    if k == 0 {
        return domain("gamma_k_integral needs k >= 1");
    }
    Ok(*gamma_sequence(alpha, k).last().unwrap())
}

/// gamma_1..=gamma_{k_max} for any alpha > 0 (alternating arch sums).
pub fn gamma_sequence(alpha: f64, k_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k_max);
    let mut s = 0.0;
    for j in 0..k_max {
        let a = arch(alpha, j);
        s += if j % 2 == 0 { a } else { -a };
        out.push(s);
    }
    out
}

/// (gamma_{2m}, gamma_{2m+1}): bracket for lim gamma_k when 0 < alpha < 1.
pub fn gamma_limit_bracket(alpha: f64, m: usize) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("gamma limit exists only for alpha in (0,1), got {alpha}"));
    }
    let g = gamma_sequence(alpha, 2 * m.max(1) + 1);
    let lo = g[2 * m.max(1) - 1];
    let hi = g[2 * m.max(1)];
    Ok((lo, hi))
}

/// |x|^alpha = out[0] - sum_{k>=1} out[k] cos(k pi x) on [-1, 1]: out[0] is the mean
/// 1/(alpha+1), out[k] = 2 alpha gamma_k / (pi k)^{alpha+1}.
pub fn fourier_abs_alpha(alpha: f64, k_max: usize) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("fourier_abs_alpha needs alpha in (0,1], got {alpha}"));
    }
    Ok(fourier_abs_alpha_any(alpha, k_max))
}

/// As [`fourier_abs_alpha`] for any alpha > 0; beyond 1 coefficients change sign.
pub fn fourier_abs_alpha_any(alpha: f64, k_max: usize) -> Vec<f64> {
    let g = gamma_sequence(alpha, k_max);
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(1.0 / (alpha + 1.0));
    for (i, gk) in g.iter().enumerate() {
        let k = (i + 1) as f64;
        out.push(2.0 * alpha * gk / (PI * k).powf(alpha + 1.0));
    }
    out
}

fn is_nonpositive_int(v: f64) -> bool {
    v <= 0.0 && v == v.round()
}

fn hyp_series(a: f64, b: f64, c: f64, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 0.0;
    while n < 10_000.0 {
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * x;
        sum += term;
        n += 1.0;
        if term == 0.0 || term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Gauss hypergeometric 2F1(a, b; c; x) for real x in [-1, 1].
/// Needs c - a - b > 0 at x = 1. When c - a - b is an integer the value on
/// (1/2, 1) is extrapolated in c and good to about 1e-10 relative.
pub fn hyp2f1(a: f64, b: f64, c: f64, x: f64) -> f64 {
    if is_nonpositive_int(a) || is_nonpositive_int(b) || x.abs() <= 0.5 {
        return hyp_series(a, b, c, x);
    }
    if x < -0.5 {
        // Pfaff: (1-x)^{-a} 2F1(a, c-b; c; x/(x-1))
        return (1.0 - x).powf(-a) * hyp2f1(a, c - b, c, x / (x - 1.0));
    }
    let g = libm::tgamma;
    if x >= 1.0 {
        return g(c) * g(c - a - b) / (g(c - a) * g(c - b));
    }
    let s = c - a - b;
    let n = s.round();
    if (s - n).abs() < 1e-4 {
        // integer c - a - b: both connection terms blow up; average symmetric
        // shifts of c around the integer point and interpolate in c
        let eps = 1e-4;
        let c0 = a + b + n;
        let at = |e: f64| (connection_1mx(a, b, c0 + e, x), connection_1mx(a, b, c0 - e, x));
        let (h1, l1) = at(eps);
        let (h2, l2) = at(2.0 * eps);
        // Richardson on the symmetric averages removes the eps^2 term
        let mid = (4.0 * 0.5 * (h1 + l1) - 0.5 * (h2 + l2)) / 3.0;
        return mid + (c - c0) * (h1 - l1) / (2.0 * eps);
    }
    connection_1mx(a, b, c, x)
}

// 2F1 at x in (1/2, 1) through the x -> 1 - x connection formula.
fn connection_1mx(a: f64, b: f64, c: f64, x: f64) -> f64 {
    let g = libm::tgamma;
    let s = c - a - b;
    let y = 1.0 - x;
    let t1 = g(c) * g(s) / (g(c - a) * g(c - b)) * hyp_series(a, b, 1.0 - s, y);
    let t2 = y.powf(s) * g(c) * g(-s) / (g(a) * g(b)) * hyp_series(c - a, c - b, 1.0 + s, y);
    t1 + t2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_gegenbauer() {
        for nu in [0.0, 0.5, 1.0, 2.5] {
            assert_eq!(gegenbauer_w(nu, 0, 0.3).unwrap(), 1.0);
            assert_eq!(gegenbauer_w(nu, 1, 0.3).unwrap(), 0.3);
            for k in 0..30 {
                assert_eq!(gegenbauer_w(nu, k, 1.0).unwrap(), 1.0);
            }
        }
        let t3 = chebyshev_t(3, 0.3f64.cos()).unwrap();
        assert!((t3 - 0.9f64.cos()).abs() < 1e-15);
        assert!(gegenbauer_w(0.5, 2, 1.1).is_err());
    }

    #[test]
    fn legendre_at_half_nu() {
        // nu = 1/2 gives Legendre P_k, P_2 = (3x^2 - 1)/2
        let x = 0.4;
        assert!((gegenbauer_w(0.5, 2, x).unwrap() - (3.0 * x * x - 1.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn high_degree_is_finite_and_bounded() {
        let mut w = vec![0.0; 100_001];
        gegenbauer_w_all(1.5, 0.123, &mut w);
        assert!(w.iter().all(|v| v.is_finite() && v.abs() <= 1.0 + 1e-10));
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(log_pochhammer(3.0, 0).unwrap(), 0.0);
        assert!((log_pochhammer(0.5, 2).unwrap() - 0.75f64.ln()).abs() < 1e-15);
        // C_5^1(1) = (2)_5 / 5! = 6
        let c = (log_pochhammer(2.0, 5).unwrap() - ln_gamma(6.0)).exp();
        assert!((c - 6.0).abs() < 1e-12);
        assert!(log_pochhammer(0.0, 3).is_err());
        assert!(log_pochhammer(-1.5, 3).is_err());
    }

    #[test]
    fn pochhammer_branches_agree() {
        // compare the Stirling branch with a direct log sum
        for (a, n) in [(0.3, 65u64), (2.5, 500), (12.0, 1000), (0.5, 5000)] {
            let direct: f64 = (0..n).map(|i| (a + i as f64).ln()).sum();
            let v = log_pochhammer(a, n).unwrap();
            assert!(((v - direct) / direct).abs() < 1e-13, "a={a} n={n} {v} {direct}");
        }
    }

    #[test]
    fn monomial_transforms() {
        let e = schoenberg_transform(&PowerSeriesSpec::monomial(1), 1.0, 6).unwrap();
        for (j, b) in e.coefficients.iter().enumerate() {
            let want = if j == 1 { 1.0 } else { 0.0 };
            assert!((b - want).abs() < 1e-14);
        }
        for nu in [0.5, 1.0, 2.0] {
            let e = schoenberg_transform(&PowerSeriesSpec::monomial(2), nu, 4).unwrap();
            assert!((e.coefficients[0] - 1.0 / (2.0 * (nu + 1.0))).abs() < 1e-14);
            assert!((e.coefficients[2] - (2.0 * nu + 1.0) / (2.0 * (nu + 1.0))).abs() < 1e-14);
            for x in [-1.0, 0.0, 0.5, 1.0] {
                assert!((e.eval(x) - x * x).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn arcsin_series_coefficients() {
        let s = PowerSeriesSpec::arcsin();
        assert!((s.coefficient(1) - 1.0).abs() < 1e-15);
        assert!((s.coefficient(3) - 1.0 / 6.0).abs() < 1e-15);
        assert!((s.coefficient(5) - 3.0 / 40.0).abs() < 1e-15);
        assert_eq!(s.coefficient(4), 0.0);
    }

    #[test]
    fn hyp2f1_known_values() {
        // 2F1(1,1;2;x) = -ln(1-x)/x
        for x in [-1.0, -0.7, -0.3, 0.2, 0.6, 0.9] {
            let want = -(1.0f64 - x).ln() / x;
            let got = hyp2f1(1.0, 1.0, 2.0, x);
            assert!((got - want).abs() < 1e-8 * want.abs(), "x={x} {got} {want}");
        }
        // c - a - b = 0 again: 2F1(1/2,1;3/2;x) = atanh(sqrt x)/sqrt x
        for x in [0.55f64, 0.8, 0.97] {
            let want = x.sqrt().atanh() / x.sqrt();
            assert!((hyp2f1(0.5, 1.0, 1.5, x) - want).abs() < 1e-8 * want, "x={x} {} {want}", hyp2f1(0.5, 1.0, 1.5, x));
        }
        // 2F1(1/2,1/2;3/2;x^2) = arcsin(x)/x
        for x in [0.3f64, 0.8, 0.99] {
            let got = hyp2f1(0.5, 0.5, 1.5, x * x);
            assert!((got - x.asin() / x).abs() < 1e-12, "x={x}");
        }
        let at_one = hyp2f1(0.3, 0.4, 1.2, 1.0);
        let near = hyp2f1(0.3, 0.4, 1.2, 1.0 - 1e-12);
        assert!((at_one - near).abs() < 1e-5);
    }

    #[test]
    fn gamma_alpha_one() {
        assert!((gamma_k_integral(1.0, 1).unwrap() - 2.0).abs() < 1e-13);
        assert!(gamma_k_integral(1.0, 2).unwrap().abs() < 1e-13);
        assert!(gamma_k_integral(1.5, 2).is_err());
        assert!(gamma_k_integral(0.0, 2).is_err());
    }

    #[test]
    fn abs_fourier_alpha_one() {
        let c = fourier_abs_alpha(1.0, 8).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-15);
        for k in 1..=8 {
            let want = if k % 2 == 1 { 4.0 / (PI * PI * (k * k) as f64) } else { 0.0 };
            assert!((c[k] - want).abs() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn zonal_matches_schoenberg_for_arcsin() {
        let z = zonal_coefficients(|th| PI / 2.0 - th, 2, 40).unwrap();
        let s = schoenberg_transform(&PowerSeriesSpec::arcsin(), 0.5, 40).unwrap();
        for j in 0..=40 {
            assert!((z[j] - s.coefficients[j]).abs() < 1e-10, "j={j} {} {}", z[j], s.coefficients[j]);
        }
    }
}
