//! The acceptance suite: eleven seeded, oracle-based checks of every route.
//!
//! Each criterion draws its random cases from its own ChaCha8 stream, so a
//! criterion can be run alone and reproduces the same numbers as in the full
//! suite.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::balakrishnan::{balakrishnan_power, scalar_balakrishnan_adaptive, scalar_power};
use crate::catalog::{random_vector, shipped, shipped_operators};
use crate::error::Result;
use crate::extension::{dtn_extract, extension_value, ode_residual};
use crate::mulop::{closed_form_extension, default_small_t_grid, shift_decay_default, small_t_asymptotics_check};
use crate::operator::{spectral_function_matrix, spectral_power_oracle, Operator, SymbolGrid, Vector};
use crate::order::FractionalOrder;
use crate::quadrature::bessel_k_quadrature;
use crate::report::{to_json, Comparison, SCHEMA};
use crate::special::bessel_k;

pub const DEFAULT_SEED: u64 = 20_240_917;

pub const CRITERIA: [(u32, &str); 11] = [
    (1, "scalar Balakrishnan identity"),
    (2, "spectral oracle equivalence"),
    (3, "nilpotent exactness"),
    (4, "half-order semigroup identity"),
    (5, "extension ODE residual"),
    (6, "Dirichlet-to-Neumann limit"),
    (7, "Dirichlet-to-Neumann error order"),
    (8, "multiplication operator closed form"),
    (9, "shift estimate exponent"),
    (10, "Bessel K integral identity"),
    (11, "determinism"),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: String,
    /// Worst value over all cases; absent when a case failed outright.
    pub measured: Option<f64>,
    pub comparison: Comparison,
    pub threshold: f64,
    pub cases: usize,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub seed: u64,
    pub criteria: Vec<CriterionOutcome>,
    pub pass: bool,
}

impl SuiteReport {
    /// One row per criterion.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["id", "name", "measured", "comparison", "threshold", "cases", "pass"])
            .expect("in-memory csv");
        for c in &self.criteria {
            w.write_record([
                c.id.to_string(),
                c.name.clone(),
                c.measured.map(|m| format!("{m:.16e}")).unwrap_or_default(),
                c.comparison.symbol().to_string(),
                format!("{:.16e}", c.threshold),
                c.cases.to_string(),
                c.pass.to_string(),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv writes UTF-8")
    }
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        let measured = self
            .measured
            .map(|m| format!("{m:.3e}"))
            .unwrap_or_else(|| "n/a".to_string());
        format!(
            "[{}] criterion {:>2} {:<38} measured {} {} {:.1e} ({} cases){}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            measured,
            self.comparison.symbol(),
            self.threshold,
            self.cases,
            if self.detail.is_empty() {
                String::new()
            } else {
                format!(": {}", self.detail)
            }
        )
    }
}

fn name_of(id: u32) -> String {
    CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, n)| n.to_string())
        .unwrap_or_default()
}

fn rng_for(seed: u64, id: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id as u64);
    rng
}

/// Folds per-case measurements into an outcome. Cases are labelled so a
/// failure names the worst one.
fn outcome(id: u32, comparison: Comparison, threshold: f64, cases: Vec<(String, Result<f64>)>) -> CriterionOutcome {
    let count = cases.len();
    let mut worst: Option<(String, f64)> = None;
    let mut error = None;
    for (label, res) in cases {
        match res {
            Ok(m) => {
                let worse = match (&worst, comparison) {
                    (None, _) => true,
                    (Some((_, w)), Comparison::AtMost) => m > *w || m.is_nan(),
                    (Some((_, w)), Comparison::AtLeast) => m < *w || m.is_nan(),
                };
                if worse {
                    worst = Some((label, m));
                }
            }
            Err(e) => {
                if error.is_none() {
                    error = Some(format!("{label}: {e}"));
                }
            }
        }
    }
    let (measured, detail) = match (error, worst) {
        (Some(e), _) => (None, e),
        (None, Some((label, m))) => (Some(m), format!("worst case {label}")),
        (None, None) => (None, "no cases".to_string()),
    };
    let pass = measured.is_some_and(|m| comparison.holds(m, threshold));
    CriterionOutcome {
        id,
        name: name_of(id),
        measured: measured.filter(|m| m.is_finite()),
        comparison,
        threshold,
        cases: count,
        pass,
        detail,
    }
}

fn rel(a: &Vector, b: &Vector, scale: f64) -> f64 {
    (a - b).norm() / scale.max(f64::MIN_POSITIVE)
}

fn orders(values: &[Complex64]) -> Vec<FractionalOrder> {
    values
        .iter()
        .map(|&a| FractionalOrder::new(a).expect("suite orders are admissible"))
        .collect()
}

fn real_orders() -> Vec<FractionalOrder> {
    orders(&[0.25, 0.5, 0.75].map(|a| Complex64::new(a, 0.0)))
}

fn mixed_orders() -> Vec<FractionalOrder> {
    orders(&[
        Complex64::new(0.25, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(0.75, 0.0),
        Complex64::new(0.3, 0.2),
    ])
}

fn random_order(rng: &mut ChaCha8Rng, max_im: f64) -> FractionalOrder {
    let re = rng.random_range(0.1..0.9);
    let im = if max_im > 0.0 {
        rng.random_range(-max_im..max_im)
    } else {
        0.0
    };
    FractionalOrder::new(Complex64::new(re, im)).expect("drawn orders are admissible")
}

fn criterion_1(seed: u64) -> CriterionOutcome {
    let mut rng = rng_for(seed, 1);
    let zs: Vec<Complex64> = (0..50)
        .map(|_| {
            let r = 10f64.powf(rng.random_range(-2.0..2.0));
            Complex64::from_polar(r, rng.random_range(-PI / 3.0..PI / 3.0))
        })
        .collect();
    let mut cases = Vec::new();
    for ord in mixed_orders() {
        let batch: Vec<_> = zs
            .par_iter()
            .map(|&z| {
                let res = scalar_balakrishnan_adaptive(z, &ord, 1e-11).and_then(|got| {
                    let want = scalar_power(z, &ord)?;
                    Ok((got.value - want).norm() / want.norm())
                });
                (format!("alpha={} z={z:.4}", ord.alpha()), res)
            })
            .collect();
        cases.extend(batch);
    }
    outcome(1, Comparison::AtMost, 1e-8, cases)
}

fn criterion_2(seed: u64) -> CriterionOutcome {
    let mut rng = rng_for(seed, 2);
    let op = shipped("hpd_dense").expect("catalog operator");
    let draws: Vec<_> = (0..10)
        .map(|_| (random_order(&mut rng, 0.3), random_vector(op.dim(), &mut rng)))
        .collect();
    let cases = draws
        .par_iter()
        .map(|(ord, x)| {
            let res = balakrishnan_power(&op, ord, x, 1e-10).and_then(|got| {
                let want = spectral_power_oracle(&op, ord, x)?;
                Ok(rel(&got.value, &want, want.norm()))
            });
            (format!("alpha={}", ord.alpha()), res)
        })
        .collect();
    outcome(2, Comparison::AtMost, 1e-6, cases)
}

fn criterion_3(seed: u64) -> CriterionOutcome {
    let mut rng = rng_for(seed, 3);
    let op = shipped("jordan").expect("catalog operator");
    let mut cases = Vec::new();
    for ord in mixed_orders() {
        for _ in 0..3 {
            let x = random_vector(2, &mut rng);
            // (I + N)^α x = x + αNx since N² = 0
            let want = Vector::from_vec(vec![x[0] + ord.alpha() * x[1], x[1]]);
            let res = balakrishnan_power(&op, &ord, &x, 1e-11).map(|got| rel(&got.value, &want, x.norm()));
            cases.push((format!("alpha={}", ord.alpha()), res));
        }
    }
    outcome(3, Comparison::AtMost, 1e-8, cases)
}

fn criterion_4(seed: u64) -> CriterionOutcome {
    let mut rng = rng_for(seed, 4);
    let half = FractionalOrder::real(0.5).expect("admissible");
    let mut cases = Vec::new();
    for name in ["laplacian", "hpd_dense"] {
        let op = shipped(name).expect("catalog operator");
        let x = random_vector(op.dim(), &mut rng);
        for t in [0.25, 0.5, 1.0, 2.0] {
            let res = extension_value(&op, &half, &x, t, 1e-10).and_then(|got| {
                let semigroup = spectral_function_matrix(&op, |l| Ok((-t * l.sqrt()).exp()))?;
                Ok(rel(&got, &(semigroup * &x), x.norm()))
            });
            cases.push((format!("{name} t={t}"), res));
        }
    }
    outcome(4, Comparison::AtMost, 1e-6, cases)
}

fn criterion_5(seed: u64) -> CriterionOutcome {
    let mut rng = rng_for(seed, 5);
    let ops = shipped_operators().expect("catalog operators");
    let mut jobs = Vec::new();
    for (name, op) in &ops {
        let x = random_vector(op.dim(), &mut rng);
        for ord in real_orders() {
            for k in 0..6 {
                jobs.push((*name, op, x.clone(), ord, 0.05 * 2f64.powi(k)));
            }
        }
    }
    let cases = jobs
        .par_iter()
        .map(|(name, op, x, ord, t)| {
            (
                format!("{name} alpha={} t={t}", ord.alpha().re),
                ode_residual(op, ord, x, *t),
            )
        })
        .collect();
    outcome(5, Comparison::AtMost, 1e-5, cases)
}

fn criterion_6(seed: u64) -> CriterionOutcome {
    let mut rng = rng_for(seed, 6);
    let ops = shipped_operators().expect("catalog operators");
    let ords = orders(&[
        Complex64::new(0.25, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(0.75, 0.0),
        Complex64::new(0.4, 0.2),
    ]);
    let mut jobs = Vec::new();
    for (name, op) in &ops {
        for ord in &ords {
            for _ in 0..5 {
                jobs.push((*name, op, *ord, random_vector(op.dim(), &mut rng)));
            }
        }
    }
    let cases = jobs
        .par_iter()
        .map(|(name, op, ord, x)| {
            let res = dtn_extract(op, ord, x, 1.0, 0.5, 8).map(|r| r.rel_error);
            (format!("{name} alpha={}", ord.alpha()), res)
        })
        .collect();
    outcome(6, Comparison::AtMost, 1e-4, cases)
}

fn criterion_7(seed: u64) -> CriterionOutcome {
    let mut rng = rng_for(seed, 7);
    let op = shipped("hpd_dense").expect("catalog operator");
    let cases = real_orders()
        .into_iter()
        .map(|ord| {
            let x = random_vector(op.dim(), &mut rng);
            let expected = 2.0 - 2.0 * ord.re();
            let res = dtn_extract(&op, &ord, &x, 1.0, 0.5, 8).map(|r| (r.fitted_exponent - expected).abs());
            (format!("alpha={}", ord.re()), res)
        })
        .collect();
    outcome(7, Comparison::AtMost, 0.25, cases)
}

/// Symbol values with `|arg f| <= π/3` and `|f| <= 4`, so that `t|f|^{1/2}
/// <= 4` for `t <= 2` keeps the Bessel connection formula accurate.
fn random_symbol(rng: &mut ChaCha8Rng, n: usize) -> SymbolGrid {
    let values = (0..n)
        .map(|_| {
            let r = 10f64.powf(rng.random_range(-1.3..0.6));
            Complex64::from_polar(r, rng.random_range(-PI / 3.0..PI / 3.0))
        })
        .collect();
    SymbolGrid::from_values(values).expect("sector values")
}

fn criterion_8(seed: u64) -> CriterionOutcome {
    let mut rng = rng_for(seed, 8);
    let draws: Vec<_> = (0..20)
        .map(|_| {
            let sym = random_symbol(&mut rng, 4);
            let g = random_vector(4, &mut rng);
            (sym, g, random_order(&mut rng, 0.2), rng.random_range(0.1..2.0))
        })
        .collect();
    // route agreement is judged at 1e-7 and the small-t limits at 1e-5, so
    // each case reports the larger of the two errors relative to its tolerance
    let cases = draws
        .par_iter()
        .enumerate()
        .map(|(i, (sym, g, ord, t))| {
            let res = (|| {
                let closed = closed_form_extension(sym, ord, g, *t)?;
                let op = Operator::multiplication(sym.clone());
                let quad = extension_value(&op, ord, g, *t, 1e-11)?;
                let route = rel(&closed, &quad, g.norm());
                let limits = small_t_asymptotics_check(sym, ord, g, &default_small_t_grid())?;
                Ok((route / 1e-7).max(limits.max_error / limits.tol))
            })();
            (format!("grid {i} alpha={} t={t:.3}", ord.alpha()), res)
        })
        .collect();
    outcome(8, Comparison::AtMost, 1.0, cases)
}

fn criterion_9(seed: u64) -> CriterionOutcome {
    let mut rng = rng_for(seed, 9);
    let grids = [
        (
            "multiplication",
            SymbolGrid::from_real(&[0.0, 1.0, 4.0, 9.0]).expect("grid"),
        ),
        ("sector", random_symbol(&mut rng, 6)),
    ];
    let mut cases = Vec::new();
    for a in [0.3, 0.6] {
        let ord = FractionalOrder::real(a).expect("admissible");
        for (name, sym) in &grids {
            let g = random_vector(sym.len(), &mut rng);
            let res = shift_decay_default(sym, &ord, &g).map(|d| d.fitted_exponent.map_or(f64::NAN, |p| p - a));
            cases.push((format!("{name} alpha={a}"), res));
        }
    }
    outcome(9, Comparison::AtLeast, -0.1, cases)
}

fn criterion_10(seed: u64) -> CriterionOutcome {
    let mut rng = rng_for(seed, 10);
    let pairs: Vec<(Complex64, Complex64)> = (0..10)
        .map(|_| {
            let nu = Complex64::new(rng.random_range(0.05..1.9), rng.random_range(-0.5..0.5));
            let z = Complex64::from_polar(rng.random_range(0.1..4.0), rng.random_range(-PI / 5.0..PI / 5.0));
            (nu, z)
        })
        .collect();
    let cases = pairs
        .par_iter()
        .map(|&(nu, z)| {
            let res = bessel_k_quadrature(nu, z, 1e-13).and_then(|q| {
                let series = bessel_k(nu, z)?;
                Ok((q.value[0] - series).norm() / series.norm())
            });
            (format!("nu={nu:.3} z={z:.3}"), res)
        })
        .collect();
    outcome(10, Comparison::AtMost, 1e-8, cases)
}

/// Runs one of criteria 1 to 10.
pub fn run_criterion(id: u32, seed: u64) -> Option<CriterionOutcome> {
    let out = match id {
        1 => criterion_1(seed),
        2 => criterion_2(seed),
        3 => criterion_3(seed),
        4 => criterion_4(seed),
        5 => criterion_5(seed),
        6 => criterion_6(seed),
        7 => criterion_7(seed),
        8 => criterion_8(seed),
        9 => criterion_9(seed),
        10 => criterion_10(seed),
        _ => return None,
    };
    Some(out)
}

/// Criterion 11: reruns criteria 1 to 10 and compares the serialized
/// outcomes byte for byte with `first`.
pub fn determinism(first: &[CriterionOutcome], seed: u64) -> CriterionOutcome {
    let second: Vec<_> = first.iter().filter_map(|c| run_criterion(c.id, seed)).collect();
    let (a, b) = (to_json(&first), to_json(&second));
    let differing = first
        .iter()
        .zip(&second)
        .filter(|(x, y)| to_json(x) != to_json(y))
        .map(|(x, _)| x.id.to_string())
        .collect::<Vec<_>>();
    let identical = a == b;
    CriterionOutcome {
        id: 11,
        name: name_of(11),
        measured: Some(if identical { 0.0 } else { 1.0 }),
        comparison: Comparison::AtMost,
        threshold: 0.0,
        cases: second.len(),
        pass: identical,
        detail: if identical {
            format!("{} bytes identical across two runs", a.len())
        } else {
            format!("criteria {} differ between runs", differing.join(", "))
        },
    }
}

/// The full suite, calling `progress` after each criterion.
pub fn run_suite_with(seed: u64, mut progress: impl FnMut(&CriterionOutcome)) -> SuiteReport {
    let mut criteria = Vec::with_capacity(11);
    for id in 1..=10 {
        let c = run_criterion(id, seed).expect("ids 1 to 10 exist");
        progress(&c);
        criteria.push(c);
    }
    let det = determinism(&criteria, seed);
    progress(&det);
    criteria.push(det);
    SuiteReport {
        schema: SCHEMA,
        seed,
        pass: criteria.iter().all(|c| c.pass),
        criteria,
    }
}

pub fn run_suite(seed: u64) -> SuiteReport {
    run_suite_with(seed, |_| {})
}
