//! Dense matrix exponential by scaling and squaring with a Padé core
//! (degrees 3, 5, 7, 9, 13 selected by the 1-norm).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::semigroup::GeneratorMatrix;

pub const MAX_DENSE_DIM: usize = 500;

const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA_13: f64 = 5.371920351148152e0;

fn coefficients(m: usize) -> &'static [f64] {
    match m {
        3 => &[120.0, 60.0, 12.0, 1.0],
        5 => &[30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0],
        7 => &[17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0],
        9 => &[
            17643225600.0,
            8821612800.0,
            2075673600.0,
            302702400.0,
            30270240.0,
            2162160.0,
            110880.0,
            3960.0,
            90.0,
            1.0,
        ],
        13 => &[
            64764752532480000.0,
            32382376266240000.0,
            7771770303897600.0,
            1187353796428800.0,
            129060195264000.0,
            10559470521600.0,
            670442572800.0,
            33522128640.0,
            1323241920.0,
            40840800.0,
            960960.0,
            16380.0,
            182.0,
            1.0,
        ],
        _ => unreachable!(),
    }
}

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn pade(a: &DMatrix<f64>, m: usize) -> DMatrix<f64> {
    let n = a.nrows();
    let b = coefficients(m);
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let (u, v) = if m == 13 {
        let a4 = &a2 * &a2;
        let a6 = &a4 * &a2;
        let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
            + &a6 * b[7]
            + &a4 * b[5]
            + &a2 * b[3]
            + &id * b[1];
        let u = a * u_inner;
        let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
            + &a6 * b[6]
            + &a4 * b[4]
            + &a2 * b[2]
            + &id * b[0];
        (u, v)
    } else {
        let mut u_inner = DMatrix::<f64>::zeros(n, n);
        let mut v = DMatrix::<f64>::zeros(n, n);
        let mut power = id.clone();
        for k in (0..=m).step_by(2) {
            v += &power * b[k];
            u_inner += &power * b[k + 1];
            power = &power * &a2;
        }
        (a * u_inner, v)
    };
    let p = &v + &u;
    let q = &v - &u;
    q.lu().solve(&p).expect("Padé denominator is singular")
}

/// `e^A` for a dense matrix.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(a.is_square());
    let norm = norm1(a);
    for (m, theta) in THETA {
        if norm <= theta {
            return pade(a, m);
        }
    }
    let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
    let scaled = a / 2f64.powi(s);
    let mut r = pade(&scaled, 13);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

pub fn to_dense(a: &GeneratorMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::<f64>::zeros(a.dim(), a.dim());
    for (i, j, v) in a.triplets() {
        d[(i, j)] = v;
    }
    d
}

/// `e^A` of a generator; refuses dimensions above [`MAX_DENSE_DIM`].
pub fn dense_expm(a: &GeneratorMatrix) -> Result<DMatrix<f64>> {
    if a.dim() > MAX_DENSE_DIM {
        return Err(Error::Refused(format!(
            "dense exponential limited to dimension {MAX_DENSE_DIM}, got {}",
            a.dim()
        )));
    }
    Ok(expm(&to_dense(a)))
}

/// `e^{t(A - lambda I)} v` through the dense exponential.
pub fn dense_shifted_action(a: &GeneratorMatrix, lambda: f64, t: f64, v: &[f64]) -> Result<Vec<f64>> {
    if a.dim() > MAX_DENSE_DIM {
        return Err(Error::Refused(format!("dimension {} too large", a.dim())));
    }
    let n = a.dim();
    let m = (to_dense(a) - DMatrix::<f64>::identity(n, n) * lambda) * t;
    let e = expm(&m);
    Ok((e * nalgebra::DVector::from_column_slice(v)).iter().copied().collect())
}
