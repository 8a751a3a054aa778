use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use gp_dirichlet::quadrature::adaptive;
use gp_dirichlet::rng::stream_rng;
use gp_dirichlet::spaces::harmonic_dim;
use gp_dirichlet::special::*;
use gp_dirichlet::{EigenSystem, Space};

#[test]
fn mixed_basis_is_orthonormal() {
    let v = adaptive(0.0, 1.0, 1e-14, |x| 2.0 * (PI * x / 2.0).sin() * (3.0 * PI * x / 2.0).sin());
    assert!(v.abs() < 1e-12);
    let one = adaptive(0.0, 1.0, 1e-14, |x| 2.0 * (PI * x).cos().powi(2));
    assert_abs_diff_eq!(one, 1.0, epsilon = 1e-12);
}

#[test]
fn diagonal_integrates_to_multiplicity() {
    for space in [Space::IntervalMixed, Space::IntervalNeumann, Space::Circle] {
        let sys = EigenSystem::new(space, 12).unwrap();
        let (pts, w) = space.quadrature_nodes(64).unwrap();
        for k in 0..sys.len() {
            let v: f64 = pts.iter().zip(&w).map(|(x, w)| w * sys.diagonal(k, x)).sum();
            assert_abs_diff_eq!(v, sys.entries[k].multiplicity as f64, epsilon = 1e-10);
        }
    }
}

#[test]
fn quadrature_gram_is_diagonal() {
    for space in [Space::IntervalMixed, Space::IntervalNeumann, Space::Circle] {
        let sys = EigenSystem::new(space, 10).unwrap();
        let (pts, w) = space.quadrature_nodes(64).unwrap();
        let mut rows = Vec::new();
        let mut buf = Vec::new();
        for x in pts.iter() {
            sys.basis_all(x, &mut buf).unwrap();
            rows.push(buf.clone());
        }
        let m = rows[0].len();
        for a in 0..m {
            for b in 0..m {
                let g: f64 = rows.iter().zip(&w).map(|(r, w)| w * r[a] * r[b]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-8, "{space} ({a},{b}) {g}");
            }
        }
    }
}

#[test]
fn sphere_addition_forms_reproduce() {
    let space = Space::Sphere(2);
    let sys = EigenSystem::new(space, 6).unwrap();
    let (q, w) = space.quadrature_nodes(48).unwrap();
    let mut rng = stream_rng(5, 0);
    let p = space.sample_uniform(2, &mut rng);
    let (xi, zeta) = (p.get(0), p.get(1));
    for j in 0..sys.len() {
        for k in 0..sys.len() {
            let v: f64 = q.iter().zip(&w).map(|(eta, w)| w * sys.addition(j, xi, eta) * sys.addition(k, eta, zeta)).sum();
            let want = if j == k { sys.addition(k, xi, zeta) } else { 0.0 };
            assert!((v - want).abs() < 1e-8, "({j},{k}) {v} vs {want}");
        }
    }
    for d in [2, 3] {
        let sys = EigenSystem::new(Space::Sphere(d), 10).unwrap();
        let e: Vec<f64> = (0..=d).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
        for k in 0..=10 {
            assert_abs_diff_eq!(sys.diagonal(k, &e) * Space::Sphere(d).total_measure(), harmonic_dim(d, k), epsilon = 1e-9 * harmonic_dim(d, k));
        }
    }
    assert_eq!(harmonic_dim(2, 1), 3.0);
}

#[test]
fn triangle_inequality_on_random_triples() {
    for space in [Space::IntervalMixed, Space::Circle, Space::Sphere(2), Space::Sphere(3)] {
        let mut rng = stream_rng(17, 1);
        let p = space.sample_uniform(30_000, &mut rng);
        for t in 0..10_000 {
            let (x, y, z) = (p.get(3 * t), p.get(3 * t + 1), p.get(3 * t + 2));
            assert!(space.dist(x, z) <= space.dist(x, y) + space.dist(y, z) + 1e-12);
        }
    }
}

#[test]
fn eigenvalues_increase() {
    for space in [Space::IntervalMixed, Space::IntervalNeumann, Space::Circle, Space::Sphere(2), Space::Sphere(4)] {
        let sys = EigenSystem::new(space, 50).unwrap();
        assert!(sys.entries.windows(2).all(|w| w[1].sqrt_lambda > w[0].sqrt_lambda), "{space}");
    }
}

#[test]
fn quadrature_examples() {
    let (_, w) = Space::Sphere(2).quadrature_nodes(32).unwrap();
    assert_abs_diff_eq!(w.iter().sum::<f64>(), 4.0 * PI, epsilon = 1e-10);
    let (p, w) = Space::IntervalMixed.quadrature_nodes(8).unwrap();
    assert_abs_diff_eq!(p.iter().zip(&w).map(|(x, w)| w * x[0]).sum::<f64>(), 0.5, epsilon = 1e-12);
    let (_, w) = Space::Circle.quadrature_nodes(8).unwrap();
    assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
}

#[test]
fn chebyshev_and_pochhammer() {
    assert_abs_diff_eq!(chebyshev_t(3, 0.3f64.cos()).unwrap(), 0.9f64.cos(), epsilon = 1e-14);
    // C_5^1(1) = (2)_5 / 5! = 6
    assert_abs_diff_eq!(log_pochhammer(2.0, 5).unwrap() - ln_gamma(6.0), 6f64.ln(), epsilon = 1e-13);
}

#[test]
fn gamma_bracket_and_limit() {
    let (lo, hi) = gamma_limit_bracket(0.5, 40).unwrap();
    assert!(lo < hi);
    let (lo2, hi2) = gamma_limit_bracket(0.5, 80).unwrap();
    assert!(lo <= lo2 && hi2 <= hi);
    assert!(lo > 0.0 && hi < PI.powf(1.5) / 1.5);
    // closed form of the limit: Gamma(alpha) sin(pi alpha / 2)
    let g = ln_gamma(0.5).exp() * (PI / 4.0).sin();
    assert!(lo2 < g && g < hi2);
    assert_abs_diff_eq!(gamma_k_integral(1.0, 1).unwrap(), 2.0, epsilon = 1e-12);
    assert_abs_diff_eq!(gamma_k_integral(1.0, 2).unwrap(), 0.0, epsilon = 1e-12);
}

#[test]
fn abs_power_fourier_reconstructs() {
    let c = fourier_abs_alpha(0.5, 4096).unwrap();
    assert!(c.iter().all(|v| *v >= 0.0));
    let x: f64 = 0.37;
    let s: f64 = c[0] - c.iter().enumerate().skip(1).map(|(k, c)| c * (k as f64 * PI * x).cos()).sum::<f64>();
    assert!((s - x.powf(0.5)).abs() < 5e-3, "{s}");
    let c1 = fourier_abs_alpha(1.0, 9).unwrap();
    for k in 1..=9 {
        let want = if k % 2 == 1 { 4.0 / (PI * PI * (k * k) as f64) } else { 0.0 };
        assert_abs_diff_eq!(c1[k], want, epsilon = 1e-12);
    }
    assert!(fourier_abs_alpha_any(1.5, 64).iter().skip(1).any(|v| *v < 0.0));
}

#[test]
fn schoenberg_reconstructs_series() {
    let nu = 0.5;
    for spec in [PowerSeriesSpec::hypergeometric(0.3, 0.4, 1.2).unwrap(), PowerSeriesSpec::arcsin()] {
        let e = schoenberg_transform(&spec, nu, 400).unwrap();
        assert!(e.coefficients.iter().all(|b| *b >= -1e-12));
        let mut rng = stream_rng(3, 0);
        let p = Space::IntervalMixed.sample_uniform(50, &mut rng);
        for x in p.iter() {
            let x = 2.0 * x[0] - 1.0;
            let err = (e.eval(x) - spec.value(x)).abs();
            assert!(err <= e.tail_bound.max(1e-8), "x={x} err={err} bound={}", e.tail_bound);
        }
    }
}
