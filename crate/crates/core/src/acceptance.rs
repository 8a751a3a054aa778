//! Desk-scale acceptance suite: ten criteria, each a pass/fail with a short detail line.

use std::f64::consts::PI;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernels::{
    gram_definiteness_test, nd_to_pd, psi_from_pd, CoefficientRoute, GramInput, GramMode, KernelSpec, NamedKernel,
    NdKernel, SpectralKernel, Verdict,
};
use crate::lp::{build_delta_net, dpp_check, kbes_estimate, window_eval, Discretization};
use crate::quadrature::adaptive_with_breaks;
use crate::rng::stream_rng;
use crate::sim::{
    regularity_estimate, sample_paths, sample_variance, structure_function_check, EvalPoints, PisierCorrection,
    SamplingMethod, SimConfig,
};
use crate::spaces::{PointSet, Space};
use crate::special::{fourier_abs_alpha, gegenbauer_w, schoenberg_transform, PowerSeriesSpec};
use crate::fit::fit_line;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

pub const CRITERIA: [(u8, &str, &[&str]); 10] = [
    (1, "window partition of unity", &["windows", "fast"]),
    (2, "gegenbauer oracle", &["special", "fast"]),
    (3, "closed-form identities", &["special", "kernels", "fast"]),
    (4, "gram definiteness", &["kernels"]),
    (5, "schoenberg decay", &["special", "slopes"]),
    (6, "kbes slopes", &["slopes", "besov"]),
    (7, "dpp bracket", &["nets", "besov"]),
    (8, "simulation law", &["sim"]),
    (9, "rate transfer", &["sim", "slopes"]),
    (10, "delta-net scaling", &["nets", "slopes", "fast"]),
];

/// Criteria selected by `only`: "all", a tag, or a comma list of ids and tags.
pub fn select(only: Option<&str>) -> Result<Vec<u8>> {
    let Some(spec) = only else {
        return Ok((1..=10).collect());
    };
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if part == "all" {
            out.extend(1..=10);
        } else if let Ok(id) = part.parse::<u8>() {
            if !(1..=10).contains(&id) {
                return crate::error::config(format!("no criterion {id}"));
            }
            out.push(id);
        } else {
            let hit: Vec<u8> = CRITERIA.iter().filter(|c| c.2.contains(&part)).map(|c| c.0).collect();
            if hit.is_empty() {
                return crate::error::config(format!("unknown criterion tag {part:?}"));
            }
            out.extend(hit);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub fn run_criterion(id: u8, seed: u64) -> CriterionResult {
    let t = Instant::now();
    let r = match id {
        1 => c1_windows(),
        2 => c2_gegenbauer(),
        3 => c3_identities(),
        4 => c4_definiteness(seed),
        5 => c5_schoenberg(),
        6 => c6_kbes(),
        7 => c7_dpp(seed),
        8 => c8_simulation(seed),
        9 => c9_rate(seed),
        10 => c10_nets(seed),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let (passed, detail) = r.unwrap_or_else(|e| (false, format!("error: {e}")));
    let name = CRITERIA.iter().find(|c| c.0 == id).map_or("unknown", |c| c.1).to_string();
    CriterionResult { id, name, passed, detail, seconds: t.elapsed().as_secs_f64() }
}

pub fn run_suite(only: Option<&str>, seed: u64) -> Result<Vec<CriterionResult>> {
    Ok(select(only)?.into_iter().map(|id| run_criterion(id, seed)).collect())
}

type Check = Result<(bool, String)>;

fn c1_windows() -> Check {
    let j_max = 12;
    let top = (j_max as f64).exp2();
    let n = 100_000;
    let mut worst: f64 = 0.0;
    let mut overlap: f64 = 0.0;
    for i in 0..=n {
        let l = top * i as f64 / n as f64;
        let w: Vec<f64> = (0..=j_max + 2).map(|j| window_eval(j, l)).collect();
        worst = worst.max((w[..=j_max].iter().sum::<f64>() - 1.0).abs());
        for a in 0..w.len() {
            for b in a + 2..w.len() {
                overlap = overlap.max((w[a] * w[b]).abs());
            }
        }
    }
    Ok((worst <= 1e-12 && overlap == 0.0, format!("max |sum - 1| = {worst:.2e}, max far-band product = {overlap:.1e}")))
}

// C_k^nu(x) from the coefficients of (1 - 2xt + t^2)^{-nu}
fn gegenbauer_generating(nu: f64, k: usize, x: f64) -> f64 {
    let poch = |a: f64, n: usize| (0..n).fold(1.0, |p, i| p * (a + i as f64));
    let fact = |n: usize| (1..=n).fold(1.0, |p, i| p * i as f64);
    (0..=k / 2)
        .map(|m| {
            let s = if m % 2 == 0 { 1.0 } else { -1.0 };
            s * poch(nu, k - m) / (fact(m) * fact(k - 2 * m)) * (2.0 * x).powi((k - 2 * m) as i32)
        })
        .sum()
}

fn c2_gegenbauer() -> Check {
    let mut err: f64 = 0.0;
    let mut at_one = true;
    let mut sup: f64 = 0.0;
    for nu in [0.5, 1.0, 1.5] {
        let norm = |k: usize| gegenbauer_generating(nu, k, 1.0);
        for k in 0..=20 {
            for i in 0..=40 {
                let x = -1.0 + i as f64 / 20.0;
                err = err.max((gegenbauer_w(nu, k, x)? - gegenbauer_generating(nu, k, x) / norm(k)).abs());
            }
        }
        for k in 0..=200 {
            at_one &= gegenbauer_w(nu, k, 1.0)? == 1.0;
        }
        for i in 0..=5000 {
            let x = -1.0 + i as f64 / 2500.0;
            for k in [1, 2, 3, 7, 16, 33, 64, 101, 200] {
                sup = sup.max(gegenbauer_w(nu, k, x)?.abs());
            }
        }
    }
    Ok((
        err <= 1e-10 && at_one && sup <= 1.0 + 1e-10,
        format!("recurrence vs generating function {err:.1e}, W_k(1) = 1: {at_one}, sup |W_k| = {sup:.12}"),
    ))
}

fn c3_identities() -> Check {
    let k = KernelSpec::named(NamedKernel::MinXY, Space::IntervalMixed)?;
    let kt = nd_to_pd(&psi_from_pd(&k)?)?.kernel;
    let mut e1: f64 = 0.0;
    let mut e2: f64 = 0.0;
    for x in [0.0, 0.13, 0.5, 0.77, 1.0] {
        let one = adaptive_with_breaks(0.0, 1.0, &[x], 1e-12, |y| kt.eval(&[x], &[y]));
        e1 = e1.max((one - 1.0 / 6.0).abs());
        for kk in 1..=5 {
            let w = kk as f64 * PI;
            let v = adaptive_with_breaks(0.0, 1.0, &[x], 1e-12, |y| kt.eval(&[x], &[y]) * (w * y).cos());
            e2 = e2.max((v - (w * x).cos() / (w * w)).abs());
        }
    }
    // cosine coefficient of |x| on [-1, 1] is minus that of 1/2 - |x|
    let c1 = -fourier_abs_alpha(1.0, 1)?[1];
    let e3 = (c1 + 4.0 / (PI * PI)).abs();
    let arcsin = PowerSeriesSpec::arcsin();
    let s: f64 = (0..10_000).map(|n| arcsin.coefficient(n)).sum();
    let e4 = (s - PI / 2.0).abs();
    Ok((
        e1 <= 1e-8 && e2 <= 1e-8 && e3 <= 1e-10 && e4 <= 0.02,
        format!("K~1 {e1:.1e}, K~cos {e2:.1e}, |x| coefficient {e3:.1e}, arcsin sum gap {e4:.4}"),
    ))
}

fn c4_definiteness(seed: u64) -> Check {
    let mut ok = true;
    let mut notes = Vec::new();
    let cases = [
        (NamedKernel::MinXY, Space::IntervalMixed, 100),
        (NamedKernel::CircleBrownian, Space::Circle, 100),
        (NamedKernel::SphereArcsinBM, Space::Sphere(2), 150),
        (NamedKernel::SphereFractional(0.5), Space::Sphere(2), 150),
    ];
    for (name, space, n) in cases {
        let k = KernelSpec::named(name, space)?;
        let r = gram_definiteness_test(GramInput::Kernel(&k), n, seed, GramMode::Pd)?;
        ok &= r.verdict == Verdict::PdPass;
        notes.push(format!("{name} min eig {:.1e}", r.min_eigenvalue.unwrap_or(f64::NAN)));
    }
    for a in [1.0, 0.5] {
        let psi = NdKernel::metric_power(Space::Sphere(2), a)?;
        let r = gram_definiteness_test(GramInput::Psi(&psi), 150, seed, GramMode::Nd)?;
        ok &= r.verdict == Verdict::NdPass;
        notes.push(format!("rho^{a} nd {:?}", r.verdict));
    }
    let psi = NdKernel::metric_power(Space::Circle, 1.5)?;
    let r = gram_definiteness_test(GramInput::Psi(&psi), 60, seed, GramMode::Nd)?;
    let witness = r.verdict == Verdict::Violation && r.witness.as_ref().is_some_and(|w| w.form_value > 0.0);
    ok &= witness;
    notes.push(format!("circle rho^1.5 witness {witness}"));
    Ok((ok, notes.join("; ")))
}

fn c5_schoenberg() -> Check {
    let nu = 0.5;
    let a = schoenberg_transform(&PowerSeriesSpec::arcsin(), nu, 200)?;
    let min = a.coefficients.iter().cloned().fold(f64::INFINITY, f64::min);
    let (da, _) = a.fitted_decay(8, 128)?;
    let h = schoenberg_transform(&PowerSeriesSpec::hypergeometric(0.3, 0.4, 1.2)?, nu, 128)?;
    let (dh, _) = h.fitted_decay(8, 128)?;
    Ok((
        min >= -1e-12 && (da - 2.0).abs() <= 0.2 && (dh - 2.0).abs() <= 0.2,
        format!("arcsin min B_j {min:.1e}, decay {da:.3}; hyp(0.3,0.4,1.2) decay {dh:.3}"),
    ))
}

fn c6_kbes() -> Check {
    let j_max = 12;
    let freq = (j_max as f64).exp2();
    let mut ok = true;
    let mut notes = Vec::new();
    let named = [
        (NamedKernel::MinXY, Space::IntervalMixed, Discretization::NetSup, 1.0, 0.1),
        (NamedKernel::CircleBrownian, Space::Circle, Discretization::InvariantDiagonal, 1.0, 0.1),
        (NamedKernel::CircleFractional(0.5), Space::Circle, Discretization::InvariantDiagonal, 0.5, 0.1),
        (NamedKernel::SphereArcsinBM, Space::Sphere(2), Discretization::InvariantDiagonal, 1.0, 0.15),
    ];
    for (name, space, disc, want, tol) in named {
        let k = KernelSpec::named(name, space)?.spectral(freq, CoefficientRoute::Auto)?;
        let r = kbes_estimate(&k, j_max, None, disc)?;
        ok &= (r.fitted_s - want).abs() <= tol;
        notes.push(format!("{name} {:.3}", r.fitted_s));
    }
    for s in [0.5, 1.0, 1.5] {
        for space in [Space::Circle, Space::Sphere(2)] {
            let k = SpectralKernel::synthetic(space, freq, s)?;
            let r = kbes_estimate(&k, j_max, None, Discretization::InvariantDiagonal)?;
            ok &= (r.fitted_s - s).abs() <= 0.1;
            notes.push(format!("synthetic s={s} on {space} {:.3}", r.fitted_s));
        }
    }
    Ok((ok, notes.join("; ")))
}

fn c7_dpp(seed: u64) -> Check {
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, space) in [(NamedKernel::MinXY, Space::IntervalMixed), (NamedKernel::CircleBrownian, Space::Circle)] {
        let k = KernelSpec::named(name, space)?.spectral(256.0, CoefficientRoute::Auto)?;
        for j in [3, 5, 7] {
            let r = dpp_check(&k, j, 10_000, seed)?;
            ok &= r.holds;
            notes.push(format!("{name} j={j} {:.4}/{:.4}", r.net_max, r.probe_sup));
        }
    }
    Ok((ok, notes.join("; ")))
}

fn random_points(space: Space, n: usize, seed: u64, tag: u64) -> PointSet {
    space.sample_uniform(n, &mut stream_rng(seed, tag))
}

fn c8_simulation(seed: u64) -> Check {
    let mut ok = true;
    let mut notes = Vec::new();
    // variance against K(x, x)
    for (name, space) in [(NamedKernel::MinXY, Space::IntervalMixed), (NamedKernel::CircleBrownian, Space::Circle)] {
        let k = KernelSpec::named(name, space)?;
        let pts = random_points(space, 5, seed, 81);
        let cfg = SimConfig::new(k.clone(), 3, 4096, seed, EvalPoints::Explicit(pts.clone())).with_method(SamplingMethod::Joint);
        let ens = sample_paths(&cfg)?;
        let mut worst: f64 = 0.0;
        for i in 0..pts.len() {
            let (v, se) = sample_variance(&ens, i);
            worst = worst.max((v - k.eval(pts.get(i), pts.get(i))).abs() / se);
        }
        ok &= worst <= 4.0;
        notes.push(format!("{name} variance max {worst:.2} SE"));
    }
    // structure function against psi_K
    let kernels = [
        (NamedKernel::CircleBrownian, Space::Circle),
        (NamedKernel::CircleFractional(0.5), Space::Circle),
        (NamedKernel::SphereFractional(0.5), Space::Sphere(2)),
    ];
    for (name, space) in kernels {
        let k = KernelSpec::named(name, space)?;
        let psi = psi_from_pd(&k)?;
        let pts = random_points(space, 40, seed, 82);
        let cfg = SimConfig::new(k, 3, 8192, seed, EvalPoints::Explicit(pts)).with_method(SamplingMethod::Joint);
        let ens = sample_paths(&cfg)?;
        let pairs: Vec<(usize, usize)> = (0..20).map(|i| (2 * i, 2 * i + 1)).collect();
        let rows = structure_function_check(&ens, &pairs, |x, y| psi.psi(x, y));
        let flagged = rows.iter().filter(|r| r.flagged).count();
        let worst = rows.iter().map(|r| (r.mean - r.psi).abs() / r.se).fold(0.0, f64::max);
        ok &= flagged == 0;
        notes.push(format!("{name} structure max {worst:.2} SE"));
    }
    // bitwise determinism on both routes
    let k = KernelSpec::named(NamedKernel::CircleBrownian, Space::Circle)?;
    let mut same = true;
    for m in [SamplingMethod::KarhunenLoeve, SamplingMethod::Joint] {
        let cfg = SimConfig::new(k.clone(), 4, 64, seed, EvalPoints::NestedNets { delta: 1.0 / 16.0 }).with_method(m);
        let (a, b) = (sample_paths(&cfg)?, sample_paths(&cfg)?);
        same &= a.bands.iter().chain(&a.full).zip(b.bands.iter().chain(&b.full)).all(|(x, y)| x.to_bits() == y.to_bits());
    }
    ok &= same;
    notes.push(format!("deterministic {same}"));
    Ok((ok, notes.join("; ")))
}

/// Pisier-corrected regularity slope on nested nets, alongside the kbes slope.
pub fn rate_pair(name: NamedKernel, space: Space, paths: usize, seed: u64) -> Result<(f64, f64, f64)> {
    let j_max = 10;
    let k = KernelSpec::named(name, space)?;
    let cfg = SimConfig::new(k.clone(), j_max, paths, seed, EvalPoints::NestedNets { delta: (-(j_max as f64)).exp2() });
    let ens = sample_paths(&cfg)?;
    let r = regularity_estimate(&ens.band_maxima(), (4, j_max), PisierCorrection::JD)?;
    let disc = if space.is_interval() { Discretization::NetSup } else { Discretization::InvariantDiagonal };
    let spec = k.spectral(4096.0, CoefficientRoute::Auto)?;
    let s = kbes_estimate(&spec, 12, None, disc)?.fitted_s;
    Ok((r.fitted_alpha, r.raw_alpha, s))
}

fn c9_rate(seed: u64) -> Check {
    let mut ok = true;
    let mut notes = Vec::new();
    let cases = [
        (NamedKernel::CircleBrownian, Space::Circle, Some((0.5, 0.12))),
        (NamedKernel::CircleFractional(0.5), Space::Circle, Some((0.25, 0.10))),
        (NamedKernel::MinXY, Space::IntervalMixed, None),
    ];
    for (name, space, target) in cases {
        let (a, raw, s) = rate_pair(name, space, 256, seed)?;
        if let Some((want, tol)) = target {
            ok &= (a - want).abs() <= tol;
        }
        ok &= (a - s / 2.0).abs() <= 0.15;
        notes.push(format!("{name} alpha {a:.3} (raw {raw:.3}), s/2 {:.3}", s / 2.0));
    }
    Ok((ok, notes.join("; ")))
}

fn c10_nets(seed: u64) -> Check {
    let circle = build_delta_net(Space::Circle, 0.5, None, seed)?.len();
    let deltas = [0.4, 0.2, 0.1, 0.05];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut sizes = Vec::new();
    for d in deltas {
        let n = build_delta_net(Space::Sphere(2), d, None, seed)?.len();
        sizes.push(n);
        xs.push(f64::ln(d));
        ys.push((n as f64).ln());
    }
    let slope = fit_line(&xs, &ys)?.slope;
    Ok((circle == 4 && (slope + 2.0).abs() <= 0.2, format!("circle net at 0.5 has {circle} points; sphere sizes {sizes:?}, slope {slope:.3}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection() {
        assert_eq!(select(None).unwrap().len(), 10);
        assert_eq!(select(Some("slopes")).unwrap(), vec![5, 6, 9, 10]);
        assert_eq!(select(Some("1,fast")).unwrap(), vec![1, 2, 3, 10]);
        assert!(select(Some("nope")).is_err());
        assert!(select(Some("11")).is_err());
    }
}
