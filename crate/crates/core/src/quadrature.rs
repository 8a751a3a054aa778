//! Gauss-Legendre rules, composite panels and a small adaptive integrator.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Newton on P_n from the usual cosine guess
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

pub(crate) fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

pub(crate) fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(8))
}

/// Apply a rule on [-1,1] to the interval [a, b].
pub fn apply_rule<F: FnMut(f64) -> f64>(rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64, mut f: F) -> f64 {
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    let mut s = 0.0;
    for (x, w) in rule.0.iter().zip(&rule.1) {
        s += w * f(c + h * x);
    }
    s * h
}

/// Composite 16-point rule with `panels` equal panels.
pub fn composite<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    let rule = gl16();
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            apply_rule(rule, lo, lo + h, &mut f)
        })
        .sum()
}

/// Adaptive bisection with 16-point panels; `tol` is absolute.
pub fn adaptive<F: FnMut(f64) -> f64>(a: f64, b: f64, tol: f64, mut f: F) -> f64 {
    // `floor` stops the halving tolerance from dropping below roundoff of the total
    fn rec<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, whole: f64, tol: f64, floor: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = apply_rule(gl16(), a, m, &mut *f);
        let right = apply_rule(gl16(), m, b, &mut *f);
        let both = left + right;
        if depth >= 40 || (both - whole).abs() <= tol.max(floor) || (b - a).abs() < 1e-14 {
            both
        } else {
            rec(f, a, m, left, 0.5 * tol, floor, depth + 1) + rec(f, m, b, right, 0.5 * tol, floor, depth + 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let whole = apply_rule(gl16(), a, b, &mut f);
    let floor = 1e-3 * f64::EPSILON * whole.abs();
    rec(&mut f, a, b, whole, tol.max(1e-300), floor, 0)
}

/// Adaptive integral over [a, b] splitting at the listed interior breakpoints.
pub fn adaptive_with_breaks<F: FnMut(f64) -> f64>(a: f64, b: f64, breaks: &[f64], tol: f64, mut f: F) -> f64 {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&t| t > a && t < b).collect();
    cuts.sort_by(|p, q| p.total_cmp(q));
    cuts.dedup();
    let mut total = 0.0;
    let mut lo = a;
    let pieces = cuts.len() + 1;
    for hi in cuts.into_iter().chain(std::iter::once(b)) {
        total += adaptive(lo, hi, tol / pieces as f64, &mut f);
        lo = hi;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 16, 40] {
            let (_, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn exact_for_degree_2n_minus_1() {
        let (x, w) = gauss_legendre(6);
        // x^10 integrates to 2/11
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let v = adaptive(0.0, 1.0, 1e-12, |x| x.sqrt());
        assert!((v - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn breaks_handle_kinks() {
        let v = adaptive_with_breaks(0.0, 1.0, &[0.3], 1e-13, |u| (0.3f64 - u).abs());
        assert!((v - (0.09 + 0.49) / 2.0).abs() < 1e-14);
    }
}
