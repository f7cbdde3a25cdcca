//! Matrix exponential by scaling and squaring with a degree-selected Padé
//! approximant (Higham, SIAM J. Matrix Anal. Appl. 26(4), 2005).

use nalgebra::DMatrix;
use num_complex::Complex64;

type Matrix = DMatrix<Complex64>;

const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504_178_996_162_932e-1;
const THETA_9: f64 = 2.097_847_961_257_068;
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

fn one_norm(a: &Matrix) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scale(m: &Matrix, s: f64) -> Matrix {
    m * Complex64::new(s, 0.0)
}

/// `exp(a)` for a square complex matrix.
///
/// # Panics
/// Panics if `a` is not square.
pub fn expm(a: &Matrix) -> Matrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return Matrix::zeros(0, 0);
    }
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Matrix::from_element(n, n, Complex64::new(f64::NAN, f64::NAN));
    }
    let eye = Matrix::identity(n, n);

    for (theta, coeffs) in [
        (THETA_3, &B3[..]),
        (THETA_5, &B5[..]),
        (THETA_7, &B7[..]),
        (THETA_9, &B9[..]),
    ] {
        if norm <= theta {
            return pade_low(a, coeffs, &eye);
        }
    }

    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = scale(a, 2f64.powi(-squarings));
    let mut result = pade13(&scaled, &eye);
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

fn pade_low(a: &Matrix, b: &[f64], eye: &Matrix) -> Matrix {
    let a2 = a * a;
    let mut power = eye.clone();
    let mut u_inner = scale(eye, b[1]);
    let mut v = scale(eye, b[0]);
    for k in 1..b.len() / 2 {
        power = &power * &a2;
        u_inner += scale(&power, b[2 * k + 1]);
        v += scale(&power, b[2 * k]);
    }
    let u = a * u_inner;
    solve_pade(&u, &v)
}

fn pade13(a: &Matrix, eye: &Matrix) -> Matrix {
    let b = &B13;
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u_high = scale(&a6, b[13]) + scale(&a4, b[11]) + scale(&a2, b[9]);
    let u_inner = &a6 * u_high + scale(&a6, b[7]) + scale(&a4, b[5]) + scale(&a2, b[3]) + scale(eye, b[1]);
    let u = a * u_inner;
    let v_high = scale(&a6, b[12]) + scale(&a4, b[10]) + scale(&a2, b[8]);
    let v = &a6 * v_high + scale(&a6, b[6]) + scale(&a4, b[4]) + scale(&a2, b[2]) + scale(eye, b[0]);
    solve_pade(&u, &v)
}

// (V - U)^{-1} (V + U)
fn solve_pade(u: &Matrix, v: &Matrix) -> Matrix {
    let denom = v - u;
    let numer = v + u;
    denom
        .lu()
        .solve(&numer)
        .unwrap_or_else(|| Matrix::from_element(u.nrows(), u.ncols(), Complex64::new(f64::NAN, f64::NAN)))
}
