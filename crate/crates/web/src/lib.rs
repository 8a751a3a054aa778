//! wasm-bindgen bindings behind `www/index.html`.

use gp_dirichlet::kernels::{KernelSpec, NamedKernel};
use gp_dirichlet::lp::{LpWindow, Transition};
use gp_dirichlet::sim::{sample_paths, EvalPoints, SimConfig};
use gp_dirichlet::special::{schoenberg_transform, PowerSeriesSpec};
use gp_dirichlet::PointSet;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Windows Psi_0..Psi_{bands-1} on `n` frequencies in [0, 2^bands].
/// Layout: the frequency grid, then one row per band.
#[wasm_bindgen]
pub fn window_curves(n: usize, bands: usize, cosine: bool) -> Vec<f64> {
    let w = LpWindow::new(if cosine { Transition::CosineRamp } else { Transition::Mollifier });
    let top = (bands as f64).exp2();
    let n = n.max(2);
    let xs: Vec<f64> = (0..n).map(|i| top * i as f64 / (n - 1) as f64).collect();
    let mut out = xs.clone();
    for j in 0..bands {
        out.extend(xs.iter().map(|&f| w.psi(j, f)));
    }
    out
}

/// B_0..B_jmax for `arcsin`, `monomial:n` or `hyp:a,b,c`.
#[wasm_bindgen]
pub fn gegenbauer_expansion(function: &str, nu: f64, j_max: usize) -> Result<Vec<f64>, JsError> {
    let spec = parse_function(function)?;
    let e = schoenberg_transform(&spec, nu, j_max).map_err(js_err)?;
    Ok(e.coefficients)
}

fn parse_function(s: &str) -> Result<PowerSeriesSpec, JsError> {
    if s == "arcsin" {
        return Ok(PowerSeriesSpec::arcsin());
    }
    if let Some(n) = s.strip_prefix("monomial:") {
        return n.trim().parse().map(PowerSeriesSpec::monomial).map_err(js_err);
    }
    if let Some(abc) = s.strip_prefix("hyp:") {
        let v: Vec<f64> = abc.split(',').filter_map(|t| t.trim().parse().ok()).collect();
        if let [a, b, c] = v[..] {
            return PowerSeriesSpec::hypergeometric(a, b, c).map_err(js_err);
        }
    }
    Err(JsError::new(&format!("unknown function {s:?}")))
}

/// One path of a named kernel on `n` evenly spaced points.
/// Layout: the coordinates, the full path, then each band 0..=j_max.
#[wasm_bindgen]
pub fn sample_path(kernel: &str, j_max: usize, n: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    let name: NamedKernel = kernel.parse().map_err(js_err)?;
    let spec = KernelSpec::named(name, name.default_space()).map_err(js_err)?;
    let space = spec.space();
    let (a, b) = if space.is_interval() { (0.0, 1.0) } else { (-1.0, 1.0) };
    if space.coord_dim() != 1 {
        return Err(JsError::new("the demo plots one-dimensional spaces only"));
    }
    let n = n.clamp(2, 4096);
    let xs: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let cfg = SimConfig::new(spec, j_max, 1, seed, EvalPoints::Explicit(PointSet::from_scalars(&xs)));
    let ens = sample_paths(&cfg).map_err(js_err)?;
    let mut out = xs;
    out.extend_from_slice(ens.path(0));
    for j in 0..ens.n_bands() {
        out.extend_from_slice(ens.band(0, j));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_sum_to_one_below_top() {
        let bands = 5;
        let n = 65;
        let v = window_curves(n, bands, false);
        for i in 0..n {
            let f = v[i];
            if f <= (bands as f64 - 1.0).exp2() {
                let s: f64 = (0..bands).map(|j| v[(j + 1) * n + i]).sum();
                assert!((s - 1.0).abs() < 1e-12, "f = {f}: {s}");
            }
        }
    }

    #[test]
    fn path_is_band_sum_plus_remainder() {
        let v = sample_path("circle-brownian", 5, 64, 3).unwrap();
        assert_eq!(v.len(), 64 * (2 + 6));
        assert!(v[64..128].iter().all(|x| x.is_finite()));
    }
}
