use bella::kernels::{bregman_distance, Kernel, Legendre};
use bella::problem::seeded_rng;
use bella::reference::finite_diff_gradient;
use nalgebra::DVector;
use rand::Rng;

fn kernels(n: usize) -> Vec<Kernel> {
    vec![
        Kernel::euclidean(n),
        Kernel::quartic(n, 1.0, 1.0),
        Kernel::quartic(n, 0.3, 2.5),
        Kernel::shannon(n),
        Kernel::burg(n),
    ]
}

fn sample(k: &Kernel, rng: &mut impl Rng) -> DVector<f64> {
    let n = k.dimension();
    if k.has_full_domain() {
        DVector::from_fn(n, |_, _| rng.gen_range(-3.0..3.0))
    } else {
        DVector::from_fn(n, |_, _| rng.gen_range(0.05..4.0))
    }
}

#[test]
fn conjugate_gradient_inverts_gradient() {
    let mut rng = seeded_rng(1);
    for k in kernels(4) {
        for _ in 0..100 {
            let x = sample(&k, &mut rng);
            let back = k.gradient_conjugate(&k.gradient(&x)).unwrap();
            let err = (&back - &x).norm() / x.norm().max(1.0);
            assert!(err < 1e-12, "{}: round trip error {err}", k.name());
        }
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = seeded_rng(2);
    for k in kernels(3) {
        for _ in 0..100 {
            let x = sample(&k, &mut rng);
            let fd = finite_diff_gradient(|z| k.value(z), &x, 1e-6).unwrap();
            let g = k.gradient(&x);
            let err = (&fd - &g).norm() / g.norm().max(1.0);
            assert!(err < 1e-6, "{}: gradient error {err}", k.name());
        }
    }
}

#[test]
fn hessian_vec_matches_gradient_differences() {
    let mut rng = seeded_rng(3);
    for k in kernels(3) {
        for _ in 0..100 {
            let x = sample(&k, &mut rng);
            let v = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
            let h = 1e-6;
            let fd = (k.gradient(&(&x + &v * h)) - k.gradient(&(&x - &v * h))) / (2.0 * h);
            let hv = k.hessian_vec(&x, &v);
            let err = (&fd - &hv).norm() / hv.norm().max(1.0);
            assert!(err < 1e-5, "{}: Hessian error {err}", k.name());
        }
    }
}

#[test]
fn bregman_distance_is_nonnegative_and_matches_definition() {
    let mut rng = seeded_rng(4);
    for k in kernels(5) {
        for _ in 0..100 {
            let x = sample(&k, &mut rng);
            let y = sample(&k, &mut rng);
            let d = bregman_distance(&k, &x, &y).unwrap();
            assert!(d >= 0.0);
            let literal = k.value(&x) - k.value(&y) - k.gradient(&y).dot(&(&x - &y));
            assert!(
                (d - literal).abs() <= 1e-9 * (1.0 + literal.abs()),
                "{}: closed form {d} vs literal {literal}",
                k.name()
            );
            assert_eq!(bregman_distance(&k, &x, &x).unwrap(), 0.0);
        }
    }
}

#[test]
fn entropy_kernels_reject_boundary() {
    for k in [Kernel::shannon(2), Kernel::burg(2)] {
        let boundary = DVector::from_vec(vec![0.0, 1.0]);
        assert!(!k.is_interior(&boundary));
        let inside = DVector::from_vec(vec![0.5, 1.0]);
        assert_eq!(k.bregman_distance(&inside, &boundary), f64::INFINITY);
    }
}
