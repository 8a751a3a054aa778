use std::collections::BTreeMap;
use std::io::Write;

use anyhow::{anyhow, Context, Result};
use serde::Serialize;
use serde_json::json;

use gp_dirichlet::acceptance::run_suite;
use gp_dirichlet::kernels::{
    exp_nd_is_pd_check, gram_definiteness_test, psi_from_pd, CoefficientRoute, GramInput, GramMode, KernelSpec,
    NamedKernel, NdKernel, SpectralKernel,
};
use gp_dirichlet::lp::{kbes_estimate, Discretization};
use gp_dirichlet::sim::{regularity_estimate, sample_paths, BandMaxima, EvalPoints, PisierCorrection, SamplingMethod, SimConfig};
use gp_dirichlet::special::{schoenberg_transform, PowerSeriesSpec};
use gp_dirichlet::{Error, Space};

use crate::output::{read_footers, write_footer, Manifest, Sink};
use crate::{Cli, Command, EXIT_FAIL, EXIT_OK, EXIT_TRUNCATION, EXIT_USAGE};

/// Bad flag values that clap cannot see.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

pub fn exit_code_for(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Usage>().is_some() {
        return EXIT_USAGE;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::Truncation { .. }) => EXIT_TRUNCATION,
        Some(Error::Config(_)) | Some(Error::Domain(_)) => EXIT_USAGE,
        _ => EXIT_FAIL,
    }
}

pub fn run(cli: Cli) -> Result<u8> {
    let manifest_path = cli.manifest.clone();
    let (code, manifest) = match cli.command {
        Command::Expand(a) => expand(a)?,
        Command::KernelCheck(a) => kernel_check(a)?,
        Command::Besov(a) => besov(a)?,
        Command::Simulate(a) => simulate(a)?,
        Command::Regularity(a) => regularity(a)?,
        Command::Report(a) => report(a)?,
    };
    manifest.write(manifest_path.as_deref())?;
    Ok(code)
}

fn parse_range(s: &str) -> Result<(usize, usize)> {
    let parse = || -> Option<(usize, usize)> {
        let (a, b) = s.split_once(':')?;
        Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
    };
    match parse() {
        Some((lo, hi)) if lo <= hi => Ok((lo, hi)),
        _ => usage(format!("expected a range lo:hi, got {s:?}")),
    }
}

fn parse_space(s: Option<&str>, default: Space) -> Result<Space> {
    match s {
        None => Ok(default),
        Some(s) => s.parse::<Space>().map_err(|e| Usage(e.to_string()).into()),
    }
}

fn parse_function(s: &str) -> Result<PowerSeriesSpec> {
    if s == "arcsin" {
        return Ok(PowerSeriesSpec::arcsin());
    }
    if let Some(n) = s.strip_prefix("monomial:") {
        return match n.parse() {
            Ok(n) => Ok(PowerSeriesSpec::monomial(n)),
            Err(_) => usage(format!("bad monomial degree {n:?}")),
        };
    }
    if let Some(abc) = s.strip_prefix("hyp:") {
        let v: Vec<f64> = abc.split(',').filter_map(|t| t.trim().parse().ok()).collect();
        if v.len() != 3 {
            return usage(format!("hyp needs three numbers a,b,c, got {abc:?}"));
        }
        return Ok(PowerSeriesSpec::hypergeometric(v[0], v[1], v[2])?);
    }
    usage(format!("unknown function {s:?}; use arcsin, monomial:n or hyp:a,b,c"))
}

enum KernelArg {
    Named(NamedKernel),
    Rho(f64),
    Synthetic(f64),
    White,
}

fn parse_kernel(s: &str) -> Result<KernelArg> {
    if let Some(a) = s.strip_prefix("rho:") {
        return a.parse().map(KernelArg::Rho).map_err(|_| Usage(format!("bad exponent in {s:?}")).into());
    }
    if s == "rho" {
        return Ok(KernelArg::Rho(1.0));
    }
    if let Some(v) = s.strip_prefix("synthetic:") {
        return v.parse().map(KernelArg::Synthetic).map_err(|_| Usage(format!("bad s in {s:?}")).into());
    }
    if s == "white" {
        return Ok(KernelArg::White);
    }
    s.parse::<NamedKernel>().map(KernelArg::Named).map_err(|e| Usage(e.to_string()).into())
}

fn with_alpha(name: NamedKernel, alpha: Option<f64>) -> Result<NamedKernel> {
    match (name, alpha) {
        (n, None) => Ok(n),
        (NamedKernel::CircleFractional(_), Some(a)) => Ok(NamedKernel::CircleFractional(a)),
        (NamedKernel::SphereFractional(_), Some(a)) => Ok(NamedKernel::SphereFractional(a)),
        (n, Some(_)) => usage(format!("--alpha applies to fractional kernels, not {n}")),
    }
}

/// A closed-form or synthetic kernel and its space.
fn kernel_spec(kernel: &str, space: Option<&str>, alpha: Option<f64>, freq: f64) -> Result<(KernelSpec, Space, String)> {
    match parse_kernel(kernel)? {
        KernelArg::Named(n) => {
            let n = with_alpha(n, alpha)?;
            let space = parse_space(space, n.default_space())?;
            Ok((KernelSpec::named(n, space)?, space, n.to_string()))
        }
        KernelArg::Synthetic(s) => {
            let space = parse_space(space, Space::Circle)?;
            Ok((KernelSpec::Spectral(SpectralKernel::synthetic(space, freq, s)?), space, kernel.to_string()))
        }
        KernelArg::White => {
            let space = parse_space(space, Space::Circle)?;
            Ok((KernelSpec::Spectral(SpectralKernel::white(space, freq)?), space, kernel.to_string()))
        }
        KernelArg::Rho(_) => usage("rho:alpha is a negative definite function; use it with kernel-check --mode nd"),
    }
}

fn expand(a: crate::ExpandArgs) -> Result<(u8, Manifest)> {
    let mut m = Manifest::start(None);
    let mut spec = parse_function(&a.function)?;
    if let Some(n) = a.n_max {
        spec = spec.with_n_max(n);
    }
    let e = schoenberg_transform(&spec, a.nu, a.jmax)?;
    let (lo, hi) = match &a.fit {
        Some(f) => parse_range(f)?,
        None => (8.min(a.jmax), a.jmax),
    };
    let decay = e.fitted_decay(lo, hi).ok().map(|(d, _)| d);
    let mut sink = Sink::open(&a.out)?;
    {
        let mut w = csv::Writer::from_writer(&mut sink);
        w.write_record(["j", "B_j"])?;
        for (j, b) in e.coefficients.iter().enumerate() {
            w.write_record([j.to_string(), b.to_string()])?;
        }
        w.flush()?;
    }
    write_footer(
        &mut sink,
        &json!({
            "nu": a.nu,
            "alpha_nominal": spec.alpha_nominal(),
            "fitted_decay": decay,
            "fit_range": [lo, hi],
            "tail_bound": e.tail_bound,
            "inner_tail": e.inner_tail,
        }),
    )?;
    sink.finish(&mut m)?;
    Ok((EXIT_OK, m))
}

fn kernel_check(a: crate::KernelCheckArgs) -> Result<(u8, Manifest)> {
    let mut m = Manifest::start(Some(a.seed));
    let mode: GramMode = a.mode.parse().map_err(|e: Error| Usage(e.to_string()))?;
    let psi;
    let spec;
    let (input, space) = match parse_kernel(&a.kernel)? {
        KernelArg::Rho(alpha) => {
            let space = parse_space(a.space.as_deref(), Space::Circle)?;
            psi = NdKernel::metric_power(space, alpha)?;
            (GramInput::Psi(&psi), space)
        }
        _ => {
            let (k, space, _) = kernel_spec(&a.kernel, a.space.as_deref(), None, 1024.0)?;
            spec = k;
            match mode {
                GramMode::Pd => (GramInput::Kernel(&spec), space),
                GramMode::Nd => {
                    psi = psi_from_pd(&spec)?;
                    (GramInput::Psi(&psi), space)
                }
            }
        }
    };
    let report = gram_definiteness_test(input, a.points, a.seed, mode)?;
    let exp_checks = if a.t.is_empty() {
        None
    } else {
        let p = match input {
            GramInput::Psi(p) => p.clone(),
            GramInput::Kernel(k) => psi_from_pd(k)?,
        };
        Some(exp_nd_is_pd_check(&p, &a.t, a.points, a.seed)?)
    };
    let mut sink = Sink::open(&a.out)?;
    let body = json!({
        "kernel": a.kernel,
        "space": space.to_string(),
        "report": report,
        "exp_checks": exp_checks,
    });
    writeln!(sink, "{}", serde_json::to_string_pretty(&body)?)?;
    sink.finish(&mut m)?;
    Ok((EXIT_OK, m))
}

fn besov(a: crate::BesovArgs) -> Result<(u8, Manifest)> {
    let mut m = Manifest::start(None);
    let disc: Discretization = a.disc.parse().map_err(|e: Error| Usage(e.to_string()))?;
    let freq = (a.jmax as f64).exp2();
    let (spec, space, name) = kernel_spec(&a.kernel, a.space.as_deref(), None, freq)?;
    let k = spec.spectral(freq, CoefficientRoute::Auto)?;
    let fit = a.fit.as_deref().map(parse_range).transpose()?;
    let r = kbes_estimate(&k, a.jmax, fit, disc)?;
    let mut sink = Sink::open(&a.out)?;
    {
        let mut w = csv::Writer::from_writer(&mut sink);
        w.write_record(["j", "S_j"])?;
        for (j, s) in r.band_sums.iter().enumerate() {
            w.write_record([j.to_string(), s.to_string()])?;
        }
        w.flush()?;
    }
    write_footer(
        &mut sink,
        &json!({
            "kernel": name,
            "space": space.to_string(),
            "fitted_s": r.fitted_s,
            "residual": r.fit_residual,
            "fit_range": [r.fit_range.0, r.fit_range.1],
            "discretization": r.discretization,
        }),
    )?;
    sink.finish(&mut m)?;
    Ok((EXIT_OK, m))
}

#[derive(Serialize)]
struct SimMeta<'a> {
    kernel: &'a str,
    space: String,
    j_max: usize,
    n_paths: usize,
    seed: u64,
    dim: f64,
    method: SamplingMethod,
    band_points: &'a [usize],
}

fn points_path(out: &str) -> Option<String> {
    if out == "-" {
        return None;
    }
    let stem = out.strip_suffix(".csv").unwrap_or(out);
    Some(format!("{stem}.points.csv"))
}

fn simulate(a: crate::SimulateArgs) -> Result<(u8, Manifest)> {
    let mut m = Manifest::start(Some(a.seed));
    let method = match a.method.as_str() {
        "auto" => SamplingMethod::Auto,
        "kl" => SamplingMethod::KarhunenLoeve,
        "joint" => SamplingMethod::Joint,
        s => return usage(format!("method must be auto, kl or joint, got {s:?}")),
    };
    if a.paths == 0 {
        return usage("--paths must be at least 1");
    }
    let freq = (a.jmax as f64 + 1.0).exp2();
    let (spec, space, name) = kernel_spec(&a.kernel, a.space.as_deref(), a.alpha, freq)?;
    let delta = a.net_delta.unwrap_or_else(|| (-(a.jmax as f64)).exp2());
    let cfg = SimConfig::new(spec, a.jmax, a.paths, a.seed, EvalPoints::NestedNets { delta }).with_method(method);
    let ens = sample_paths(&cfg)?;

    let mut sink = Sink::open(&a.out)?;
    {
        let mut w = csv::Writer::from_writer(&mut sink);
        w.write_record(["path_id", "band", "point_index", "value"])?;
        for p in 0..ens.n_paths {
            for j in 0..ens.n_bands() {
                for (i, v) in ens.band(p, j)[..ens.band_len[j]].iter().enumerate() {
                    w.write_record([p.to_string(), j.to_string(), i.to_string(), v.to_string()])?;
                }
            }
        }
        w.flush()?;
    }
    let meta = SimMeta {
        kernel: &name,
        space: space.to_string(),
        j_max: ens.j_max,
        n_paths: ens.n_paths,
        seed: ens.seed,
        dim: space.dim_doubling(),
        method: ens.method,
        band_points: &ens.band_len,
    };
    write_footer(&mut sink, &meta)?;
    sink.finish(&mut m)?;

    if let Some(pp) = a.points_out.clone().or_else(|| points_path(&a.out)) {
        let mut ps = Sink::open(&pp)?;
        {
            let mut w = csv::Writer::from_writer(&mut ps);
            let mut header = vec!["point_index".to_string()];
            header.extend((0..ens.points.dim).map(|c| format!("x{c}")));
            w.write_record(&header)?;
            for (i, x) in ens.points.iter().enumerate() {
                let mut row = vec![i.to_string()];
                row.extend(x.iter().map(|v| v.to_string()));
                w.write_record(&row)?;
            }
            w.flush()?;
        }
        ps.finish(&mut m)?;
    }
    Ok((EXIT_OK, m))
}

/// Per-band maxima of |value| from simulate output.
pub fn band_maxima_from_csv(text: &str) -> Result<BandMaxima> {
    let meta = read_footers(text).into_iter().next();
    let dim = meta.as_ref().and_then(|v| v["dim"].as_f64()).unwrap_or(1.0);
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let mut max: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut points: BTreeMap<usize, usize> = BTreeMap::new();
    let (mut n_paths, mut n_bands) = (0usize, 0usize);
    for rec in rdr.records() {
        let rec = rec.context("reading simulate CSV")?;
        let field = |i: usize| rec.get(i).ok_or_else(|| anyhow!("short row {rec:?}"));
        let p: usize = field(0)?.parse().context("path_id")?;
        let b: i64 = field(1)?.parse().context("band")?;
        let i: usize = field(2)?.parse().context("point_index")?;
        let v: f64 = field(3)?.parse().context("value")?;
        if b < 0 {
            continue;
        }
        let b = b as usize;
        let e = max.entry((b, p)).or_insert(0.0);
        *e = e.max(v.abs());
        let c = points.entry(b).or_insert(0);
        *c = (*c).max(i + 1);
        n_paths = n_paths.max(p + 1);
        n_bands = n_bands.max(b + 1);
    }
    if n_paths == 0 {
        return usage("no rows in simulate CSV");
    }
    let maxima = (0..n_bands).map(|b| (0..n_paths).map(|p| max.get(&(b, p)).copied().unwrap_or(0.0)).collect()).collect();
    let band_points = (0..n_bands).map(|b| points.get(&b).copied().unwrap_or(0)).collect();
    Ok(BandMaxima { maxima, band_points, dim })
}

fn regularity(a: crate::RegularityArgs) -> Result<(u8, Manifest)> {
    let mut m = Manifest::start(None);
    let text = std::fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let bm = band_maxima_from_csv(&text)?;
    let correction = match (a.pisier_correct, a.pisier_j_only) {
        (false, _) => PisierCorrection::None,
        (true, false) => PisierCorrection::JD,
        (true, true) => PisierCorrection::J,
    };
    let r = regularity_estimate(&bm, parse_range(&a.fit)?, correction)?;
    let mut sink = Sink::open(&a.out)?;
    writeln!(sink, "{}", serde_json::to_string_pretty(&r)?)?;
    sink.finish(&mut m)?;
    Ok((EXIT_OK, m))
}

fn report(a: crate::ReportArgs) -> Result<(u8, Manifest)> {
    let mut m = Manifest::start(Some(a.seed));
    let results = run_suite(a.only.as_deref(), a.seed).map_err(|e| Usage(e.to_string()))?;
    for r in &results {
        eprintln!(
            "criterion {:>2} {:<28} {} ({:.1}s) {}",
            r.id,
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.seconds,
            r.detail
        );
    }
    let all = results.iter().all(|r| r.passed);
    let mut sink = Sink::open(&a.out)?;
    writeln!(sink, "{}", serde_json::to_string_pretty(&json!({ "seed": a.seed, "all_passed": all, "criteria": results }))?)?;
    sink.finish(&mut m)?;
    Ok((if all { EXIT_OK } else { EXIT_FAIL }, m))
}
