use crate::error::{Error, Result};

/// Solution of `y' = gamma - mu y`: `gamma/mu + (y0 - gamma/mu) e^{-mu t}`.
pub fn linear_relax(gamma: f64, mu: f64, y0: f64, t: f64) -> f64 {
    let eq = gamma / mu;
    eq + (y0 - eq) * (-mu * t).exp()
}

/// Solution of `y' = r y (1 - y/K)`.
pub fn logistic(r: f64, k: f64, y0: f64, t: f64) -> f64 {
    if y0 == 0.0 {
        return 0.0;
    }
    k / (1.0 + (k / y0 - 1.0) * (-r * t).exp())
}

/// Solution of `y' = y^2`: `1 / (1/y0 - t)`, defined for `t < 1/y0`.
pub fn blow_up_square(y0: f64, t: f64) -> Result<f64> {
    let t_max = 1.0 / y0;
    if t >= t_max {
        return Err(Error::Domain(format!("y' = y^2 blows up at t = {t_max}")));
    }
    Ok(1.0 / (t_max - t))
}
