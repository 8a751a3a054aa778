use gp_dirichlet::kernels::*;
use gp_dirichlet::rng::stream_rng;
use gp_dirichlet::Space;

#[test]
fn sphere_arcsin_spectral_reconstruction() {
    let k = KernelSpec::named(NamedKernel::SphereArcsinBM, Space::Sphere(2)).unwrap();
    let s = k.spectral(2048.0, CoefficientRoute::Auto).unwrap();
    let mut rng = stream_rng(21, 0);
    let p = Space::Sphere(2).sample_uniform(40, &mut rng);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let (x, y) = (p.get(2 * i), p.get(2 * i + 1));
        worst = worst.max((s.eval(x, y) - k.eval(x, y)).abs());
    }
    assert!(worst < 1e-6, "max error {worst:e}");
}

#[test]
fn minxy_spectral_matches_closed_form() {
    let k = KernelSpec::named(NamedKernel::MinXY, Space::IntervalMixed).unwrap();
    let s = k.spectral(20_000.0, CoefficientRoute::Auto).unwrap();
    for (x, y) in [(0.2, 0.7), (0.5, 0.5), (0.9, 0.1)] {
        assert!((s.eval(&[x], &[y]) - x.min(y)).abs() <= s.tail_bound + 1e-12);
    }
}

#[test]
fn psi_vanishes_on_diagonal_and_recentering_at_u() {
    for name in [NamedKernel::MinXY, NamedKernel::CircleFractional(0.5), NamedKernel::SphereArcsinBM] {
        let k = KernelSpec::named(name, name.default_space()).unwrap();
        let psi = psi_from_pd(&k).unwrap();
        let mut rng = stream_rng(2, 0);
        let p = k.space().sample_uniform(10, &mut rng);
        for x in p.iter() {
            assert!(psi.psi(x, x).abs() < 1e-15);
            let ku = k_u(&k, x).unwrap();
            assert!(ku.eval(x, x).abs() < 1e-14);
        }
    }
}

#[test]
fn exp_of_sphere_rho_is_pd() {
    let psi = NdKernel::metric_power(Space::Sphere(2), 1.0).unwrap();
    let r = exp_nd_is_pd_check(&psi, &[1.0], 80, 4).unwrap();
    assert_eq!(r[0].verdict, Verdict::PdPass);
}

#[test]
fn hypergeometric_kernel_is_pd_on_sphere() {
    let k = KernelSpec::named(NamedKernel::HypergeometricSphere { a: 0.3, b: 0.4, c: 1.2 }, Space::Sphere(2)).unwrap();
    let r = gram_definiteness_test(GramInput::Kernel(&k), 80, 9, GramMode::Pd).unwrap();
    assert_eq!(r.verdict, Verdict::PdPass);
}
