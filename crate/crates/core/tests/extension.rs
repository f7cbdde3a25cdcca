use fracpow::catalog::{random_vector, shipped, shipped_operators, SHIPPED};
use fracpow::extension::{dtn_extract, extension_value, ode_residual, Extension};
use fracpow::special::gamma;
use fracpow::{FractionalOrder, Vector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn order(re: f64, im: f64) -> FractionalOrder {
    FractionalOrder::new(Complex64::new(re, im)).unwrap()
}

fn vector(dim: usize, seed: u64) -> Vector {
    random_vector(dim, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[test]
fn boundary_is_attained() {
    let tol = 1e-10;
    for (i, (name, op)) in shipped_operators().unwrap().into_iter().enumerate() {
        for ord in [order(0.25, 0.0), order(0.75, 0.0), order(0.4, 0.2)] {
            let x = vector(op.dim(), i as u64);
            let dist: Vec<f64> = (0..10)
                .map(|k| {
                    let t = 0.5f64.powi(k);
                    op.norm_of(&(extension_value(&op, &ord, &x, t, tol).unwrap() - &x)) / op.norm_of(&x)
                })
                .collect();
            for w in dist.windows(2) {
                assert!(w[1] <= w[0] + 1e-8, "{name} alpha={}: {dist:?}", ord.alpha());
            }
            assert!(dist[9] < 0.1 * dist[0].max(1e-9), "{name}: {dist:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn orbit_is_uniformly_bounded(k in 0..SHIPPED.len(), re in 0.1..0.9f64, im in -0.5..0.5f64, t in 0.01..20.0f64, seed: u64) {
        let op = shipped(SHIPPED[k]).unwrap();
        let ord = order(re, im);
        let x = vector(op.dim(), seed);
        let tol = 1e-10;
        let u = extension_value(&op, &ord, &x, t, tol).unwrap();
        let m = op.nonneg_constant().unwrap();
        let gamma_re = gamma(Complex64::new(re, 0.0)).unwrap().re;
        let bound = m * gamma_re / ord.gamma_alpha().norm() * op.norm_of(&x);
        prop_assert!(op.norm_of(&u) <= bound + tol * op.norm_of(&x), "{} > {bound}", op.norm_of(&u));
    }

    #[test]
    fn ode_is_satisfied(k in 0..SHIPPED.len(), re in 0.1..0.9f64, im in -0.3..0.3f64, log_t in (0.05f64).ln()..(2.0f64).ln(), seed: u64) {
        let op = shipped(SHIPPED[k]).unwrap();
        let x = vector(op.dim(), seed);
        let r = ode_residual(&op, &order(re, im), &x, log_t.exp()).unwrap();
        prop_assert!(r <= 1e-5, "{r}");
    }

    #[test]
    fn dtn_limit_is_scaled_power(k in 0..SHIPPED.len(), re in 0.1..0.9f64, im in -0.2..0.2f64, seed: u64) {
        let op = shipped(SHIPPED[k]).unwrap();
        let x = vector(op.dim(), seed);
        let rep = dtn_extract(&op, &order(re, im), &x, 1.0, 0.5, 8).unwrap();
        prop_assert!(rep.pass && rep.rel_error <= 1e-4, "{}", rep.rel_error);
    }
}

#[test]
fn error_order_on_dense_operator() {
    let op = shipped("hpd_dense").unwrap();
    for (a, seed) in [(0.25, 1), (0.5, 2), (0.75, 3)] {
        let rep = dtn_extract(&op, &order(a, 0.0), &vector(8, seed), 1.0, 0.5, 8).unwrap();
        assert!(
            (rep.fitted_exponent - (2.0 - 2.0 * a)).abs() <= 0.25,
            "alpha={a}: {}",
            rep.fitted_exponent
        );
    }
}

#[test]
fn value_and_derivative_agree_with_difference_quotient() {
    let op = shipped("laplacian").unwrap();
    let ord = order(0.35, 0.1);
    let x = vector(8, 7);
    let ext = Extension::new(&op, &ord, &x).unwrap();
    for t in [0.1, 0.7, 3.0] {
        let d = ext.derivative(t, 1e-11).unwrap();
        assert!(
            d.fd_discrepancy <= 1e-6 * d.value.norm().max(1.0),
            "t={t}: {}",
            d.fd_discrepancy
        );
    }
}
