//! Lambert W (principal branch) and the privacy resolution κ.

use crate::error::{Error, Result};

/// Principal-branch Lambert W for `x ≥ 0`: the `w ≥ 0` with `w·e^w = x`.
/// Halley iteration, accurate to better than 1e−12 relative.
pub fn lambert_w(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::param(format!(
            "lambert_w is restricted to the principal branch x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let mut w = if x > std::f64::consts::E {
        let l = x.ln();
        l - l.ln()
    } else {
        // ln(1+x) tracks W well on [0, e] and Halley fixes the rest.
        x.ln_1p()
    };
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
        let step = f / denom;
        w -= step;
        if step.abs() <= 1e-15 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}

/// The privacy resolution `κ = (1/(10·ε·n)) · min{W(0.45·ε/δ), 0.6}`.
/// Masses below roughly κ are invisible to any (ε, δ)-DP estimator.
/// For δ = 0 the Lambert-W argument is +∞ and the min resolves to 0.6.
pub fn kappa(eps: f64, delta: f64, n: usize) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::param(format!("kappa needs eps > 0, got {eps}")));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::param(format!("kappa needs delta in [0,1], got {delta}")));
    }
    if n == 0 {
        return Err(Error::param("kappa needs n >= 1"));
    }
    let cap = if delta == 0.0 { 0.6 } else { lambert_w(0.45 * eps / delta)?.min(0.6) };
    Ok(cap / (10.0 * eps * n as f64))
}
