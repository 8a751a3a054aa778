use gp_dirichlet::kernels::*;
use gp_dirichlet::lp::*;
use gp_dirichlet::{EigenSystem, Space};

fn named(n: NamedKernel, freq: f64) -> SpectralKernel {
    KernelSpec::named(n, n.default_space()).unwrap().spectral(freq, CoefficientRoute::Auto).unwrap()
}

#[test]
fn minxy_slope_over_three_to_nine() {
    let k = named(NamedKernel::MinXY, 1024.0);
    let r = kbes_estimate(&k, 10, Some((3, 9)), Discretization::NetSup).unwrap();
    assert!((r.fitted_s - 1.0).abs() <= 0.1, "{}", r.fitted_s);
    assert!(r.band_sums.iter().all(|s| *s >= 0.0));
}

#[test]
fn circle_brownian_band_sums_match_partial_sums() {
    // S_j = sum over odd k with 2^{j-1} < k pi <= 2^j of 4/(pi^2 k^2) * (2 / |M|)
    let k = named(NamedKernel::CircleBrownian, 4096.0);
    let r = kbes_estimate(&k, 12, None, Discretization::InvariantDiagonal).unwrap();
    for j in 1..=12 {
        let (lo, hi) = ((j as f64 - 1.0).exp2(), (j as f64).exp2());
        let want: f64 = (1..2000usize)
            .filter(|k| k % 2 == 1)
            .map(|k| k as f64 * std::f64::consts::PI)
            .filter(|f| *f > lo && *f <= hi)
            .map(|f| 4.0 / (f * f))
            .sum();
        assert!((r.band_sums[j] - want).abs() < 1e-14, "j={j}");
    }
}

#[test]
fn discretizations_agree_on_invariant_kernels() {
    let k = named(NamedKernel::CircleFractional(0.5), 1024.0);
    let a = kbes_estimate(&k, 10, None, Discretization::InvariantDiagonal).unwrap();
    let b = kbes_estimate(&k, 10, None, Discretization::NetSup).unwrap();
    let c = kbes_estimate(&k, 8, Some((3, 6)), Discretization::GridSup).unwrap();
    for j in 0..=10 {
        assert!((a.band_sums[j] - b.band_sums[j]).abs() < 1e-12 * (1.0 + a.band_sums[j]));
    }
    for j in 0..=8 {
        assert!((a.band_sums[j] - c.band_sums[j]).abs() < 1e-12 * (1.0 + a.band_sums[j]));
    }
    assert!(kbes_estimate(&named(NamedKernel::MinXY, 1024.0), 10, None, Discretization::InvariantDiagonal).is_err());
}

#[test]
fn degenerate_and_truncation_errors() {
    let k = named(NamedKernel::CircleBrownian, 4096.0);
    assert!(matches!(
        kbes_estimate(&k, 12, Some((3, 10)), Discretization::InvariantDiagonal),
        Err(gp_dirichlet::Error::DegenerateFit(_))
    ));
    let short = named(NamedKernel::CircleBrownian, 100.0);
    assert!(matches!(kbes_estimate(&short, 12, None, Discretization::InvariantDiagonal), Err(gp_dirichlet::Error::Truncation { .. })));
    assert!(kbes_estimate(&k, 12, Some((5, 6)), Discretization::InvariantDiagonal).is_err());
}

#[test]
fn dpp_on_interval_and_single_mode() {
    let k = named(NamedKernel::MinXY, 64.0);
    let r = dpp_check(&k, 4, 10_000, 1).unwrap();
    assert!(r.holds && r.net_max <= r.probe_sup && r.probe_sup <= 4.0 * r.net_max);
    // one eigenfunction sqrt2 sin((k+1/2) pi x)
    let sys = EigenSystem::new(Space::IntervalMixed, 40).unwrap();
    let mut nu = vec![0.0; sys.len()];
    nu[3] = 1.0;
    let single = SpectralKernel::new(sys, nu).unwrap();
    let r = dpp_check(&single, 5, 10_000, 2).unwrap();
    assert!(r.holds, "{r:?}");
    assert!(r.probe_sup <= 2.0 + 1e-12 && r.net_max >= r.probe_sup / 4.0);
    // invariant kernels: net max equals the probe sup
    let c = named(NamedKernel::CircleBrownian, 64.0);
    let r = dpp_check(&c, 4, 2000, 3).unwrap();
    assert!((r.net_max - r.probe_sup).abs() < 1e-12);
}

#[test]
fn cosine_ramp_leaves_slopes_alone() {
    // band sums do not depend on the window; the window enters through simulation, so
    // compare window-weighted diagonal sums instead
    let k = named(NamedKernel::CircleFractional(0.5), 4096.0);
    let x = [0.0];
    let mut a = vec![0.0; k.nu.len()];
    k.system.addition_all(&x, &x, &mut a);
    let mut slopes = Vec::new();
    for w in [LpWindow::new(Transition::Mollifier), LpWindow::new(Transition::CosineRamp)] {
        let sums: Vec<f64> = (4..=10)
            .map(|j| k.system.entries.iter().zip(&k.nu).zip(&a).map(|((e, n), a)| w.psi(j, e.sqrt_lambda) * n * a).sum::<f64>())
            .collect();
        let xs: Vec<f64> = (4..=10).map(|j| j as f64).collect();
        let ys: Vec<f64> = sums.iter().map(|s| s.log2()).collect();
        slopes.push(-gp_dirichlet::fit::fit_line(&xs, &ys).unwrap().slope);
    }
    assert!((slopes[0] - slopes[1]).abs() < 0.05, "{slopes:?}");
}

#[test]
fn window_sums_bracket_band_sums() {
    let k = named(NamedKernel::MinXY, 4096.0);
    let w = LpWindow::default();
    let mut a = vec![0.0; k.nu.len()];
    for x in [0.1, 0.5, 0.93, 1.0] {
        k.system.addition_all(&[x], &[x], &mut a);
        let band = |j: usize| -> f64 {
            k.system.entries.iter().zip(&k.nu).zip(&a).filter(|((e, _), _)| band_of(e.sqrt_lambda) == j).map(|((_, n), a)| n * a).sum()
        };
        let win = |j: usize| -> f64 { k.system.entries.iter().zip(&k.nu).zip(&a).map(|((e, n), a)| w.psi(j, e.sqrt_lambda) * n * a).sum() };
        for j in 1..10 {
            assert!(win(j) <= band(j) + band(j + 1) + 1e-15);
            assert!(band(j) <= win(j - 1) + win(j) + 1e-15);
        }
    }
}
