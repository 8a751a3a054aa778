use gp_dirichlet::kernels::*;
use gp_dirichlet::lp::LpWindow;
use gp_dirichlet::rng::stream_rng;
use gp_dirichlet::sim::*;
use gp_dirichlet::{PointSet, Space};

#[test]
fn kl_reconstruction_on_interval() {
    let k = KernelSpec::named(NamedKernel::MinXY, Space::IntervalMixed).unwrap();
    let cfg = SimConfig::new(k, 6, 16, 3, EvalPoints::NestedNets { delta: 1.0 / 64.0 });
    let e = sample_paths(&cfg).unwrap();
    assert_eq!(e.method, SamplingMethod::KarhunenLoeve);
    for p in 0..e.n_paths {
        for i in 0..e.n_points() {
            let s: f64 = (0..e.n_bands()).map(|j| e.band(p, j)[i]).sum::<f64>() + e.remainder_of(p)[i];
            assert!((s - e.path(p)[i]).abs() < 1e-9);
        }
    }
}

#[test]
fn gaussian_kurtosis() {
    let k = KernelSpec::named(NamedKernel::CircleFractional(0.5), Space::Circle).unwrap();
    let pts = PointSet::from_scalars(&[-0.6, 0.1, 0.55]);
    let e = sample_paths(&SimConfig::new(k, 5, 8192, 8, EvalPoints::Explicit(pts))).unwrap();
    for i in 0..3 {
        let z: Vec<f64> = (0..e.n_paths).map(|p| e.path(p)[i]).collect();
        let n = z.len() as f64;
        let m = z.iter().sum::<f64>() / n;
        let m2 = z.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
        let m4 = z.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
        let kurt = m4 / (m2 * m2);
        assert!((kurt - 3.0).abs() <= 0.25, "kurtosis {kurt}");
    }
}

#[test]
fn band_cross_covariance_matches_analytic() {
    let k = KernelSpec::named(NamedKernel::CircleBrownian, Space::Circle).unwrap();
    let pts = PointSet::from_scalars(&[-0.3, 0.05, 0.8]);
    let j_max = 5;
    let e = sample_paths(&SimConfig::new(k.clone(), j_max, 8192, 4, EvalPoints::Explicit(pts.clone()))).unwrap();
    let s = k.spectral(64.0, CoefficientRoute::Auto).unwrap().truncated(64.0).unwrap();
    let w = LpWindow::default();
    let mut a = vec![0.0; s.nu.len()];
    let mut rng = stream_rng(77, 0);
    use rand::Rng;
    for _ in 0..12 {
        let (j, j2) = (rng.random_range(0..=j_max), rng.random_range(0..=j_max));
        let (x, y) = (rng.random_range(0..3), rng.random_range(0..3));
        s.system.addition_all(pts.get(x), pts.get(y), &mut a);
        let want: f64 = s.system.entries.iter().zip(&s.nu).zip(&a).map(|((en, n), a)| w.psi(j, en.sqrt_lambda) * w.psi(j2, en.sqrt_lambda) * n * a).sum();
        let prods: Vec<f64> = (0..e.n_paths).map(|p| e.band(p, j)[x] * e.band(p, j2)[y]).collect();
        let n = prods.len() as f64;
        let m = prods.iter().sum::<f64>() / n;
        let se = (prods.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        assert!((m - want).abs() <= 4.0 * se + 1e-15, "({j},{j2},{x},{y}) {m} vs {want} se {se}");
    }
}

#[test]
fn joint_and_kl_agree_in_law() {
    let k = KernelSpec::named(NamedKernel::MinXY, Space::IntervalMixed).unwrap();
    let pts = PointSet::from_scalars(&[0.25, 0.75]);
    let kl = sample_paths(&SimConfig::new(k.clone(), 4, 8192, 1, EvalPoints::Explicit(pts.clone())).with_method(SamplingMethod::KarhunenLoeve)).unwrap();
    let jt = sample_paths(&SimConfig::new(k, 4, 8192, 2, EvalPoints::Explicit(pts)).with_method(SamplingMethod::Joint)).unwrap();
    for j in 0..=4 {
        let v = |e: &PathEnsemble| -> (f64, f64) {
            let z: Vec<f64> = (0..e.n_paths).map(|p| e.band(p, j)[0].powi(2)).collect();
            let n = z.len() as f64;
            let m = z.iter().sum::<f64>() / n;
            (m, (z.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt())
        };
        let ((a, sa), (b, sb)) = (v(&kl), v(&jt));
        assert!((a - b).abs() <= 4.0 * (sa * sa + sb * sb).sqrt(), "band {j}: {a} vs {b}");
    }
}

#[test]
fn sphere_structure_function_and_identical_points() {
    let k = KernelSpec::named(NamedKernel::SphereFractional(0.5), Space::Sphere(2)).unwrap();
    let mut rng = stream_rng(12, 0);
    let mut pts = Space::Sphere(2).sample_uniform(6, &mut rng);
    let p0 = pts.get(0).to_vec();
    pts.push(&p0);
    let e = sample_paths(&SimConfig::new(k, 3, 4096, 5, EvalPoints::Explicit(pts))).unwrap();
    assert_eq!(e.method, SamplingMethod::Joint);
    let rows = structure_function_check(&e, &[(0, 6), (1, 2), (3, 4)], |x, y| Space::Sphere(2).dist(x, y).powf(0.5));
    assert_eq!(rows[0].mean, 0.0);
    assert!(!rows[0].flagged);
    assert!(rows.iter().all(|r| !r.flagged), "{rows:?}");
}

#[test]
fn white_noise_has_no_positive_rate() {
    let k = KernelSpec::Spectral(SpectralKernel::white(Space::Circle, 64.0).unwrap());
    let e = sample_paths(&SimConfig::new(k, 5, 64, 9, EvalPoints::NestedNets { delta: 1.0 / 32.0 })).unwrap();
    let r = regularity_estimate(&e.band_maxima(), (2, 5), PisierCorrection::None).unwrap();
    assert!(r.raw_alpha <= 0.0, "{}", r.raw_alpha);
}

#[test]
fn besov_proxy_is_monotone_in_alpha() {
    let k = KernelSpec::named(NamedKernel::CircleBrownian, Space::Circle).unwrap();
    let e = sample_paths(&SimConfig::new(k, 6, 4, 2, EvalPoints::NestedNets { delta: 1.0 / 64.0 })).unwrap();
    for p in 0..4 {
        let m = e.path_band_maxima(p);
        let mut prev = 0.0;
        for a in [0.0, 0.1, 0.3, 0.5, 0.9] {
            let v = besov_norm_of_path(&m, a);
            assert!(v >= prev);
            prev = v;
        }
    }
}

#[test]
fn oversized_joint_request_is_rejected() {
    let k = KernelSpec::named(NamedKernel::SphereArcsinBM, Space::Sphere(2)).unwrap();
    let cfg = SimConfig::new(k, 8, 2, 1, EvalPoints::NestedNets { delta: 1.0 / 32.0 });
    assert!(matches!(sample_paths(&cfg), Err(gp_dirichlet::Error::Config(_))));
}
