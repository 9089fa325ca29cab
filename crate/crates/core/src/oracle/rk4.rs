use crate::error::{Error, Result};

/// Classical explicit RK4 on `y' = rhs(y, t)` with a uniform step.
///
/// The step is adjusted down so that an integer number of steps lands exactly on
/// `horizon`. Returns every `(t, y)` including the initial point.
pub fn rk4_solve<F>(mut rhs: F, y0: &[f64], step: f64, horizon: f64) -> Result<Vec<(f64, Vec<f64>)>>
where
    F: FnMut(&[f64], f64, &mut [f64]),
{
    if !(step > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {step}")));
    }
    if !(horizon >= 0.0) {
        return Err(Error::Domain(format!("horizon must be nonnegative, got {horizon}")));
    }
    let steps = (horizon / step - 1e-9).ceil().max(0.0) as usize;
    let h = if steps == 0 { 0.0 } else { horizon / steps as f64 };
    let n = y0.len();
    let mut y = y0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, y.clone()));
    for s in 0..steps {
        let t = s as f64 * h;
        rhs(&y, t, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        rhs(&tmp, t + 0.5 * h, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        rhs(&tmp, t + 0.5 * h, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + h * k3[i];
        }
        rhs(&tmp, t + h, &mut k4);
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = if s + 1 == steps { horizon } else { (s + 1) as f64 * h };
        if y.iter().any(|x| !x.is_finite()) {
            return Err(Error::OracleDivergence { time: t_next });
        }
        out.push((t_next, y.clone()));
    }
    Ok(out)
}

/// Linear interpolation of an RK4 trajectory at time `t`.
pub fn sample(traj: &[(f64, Vec<f64>)], t: f64) -> Vec<f64> {
    let k = traj.partition_point(|(s, _)| *s <= t);
    if k == 0 {
        return traj[0].1.clone();
    }
    if k == traj.len() {
        return traj[k - 1].1.clone();
    }
    let (t0, y0) = &traj[k - 1];
    let (t1, y1) = &traj[k];
    let a = (t - t0) / (t1 - t0);
    y0.iter().zip(y1).map(|(p, q)| p + a * (q - p)).collect()
}
