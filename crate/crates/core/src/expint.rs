//! Exponential integral E1(x) = ∫_x^∞ e^{-t}/t dt.

use crate::error::ModelError;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Computes E1(x) for x > 0.
///
/// Power series below the crossover, modified Lentz continued fraction above.
/// Absolute error is below 1e-10 over [1e-3, 50].
pub fn exp_integral_e1(x: f64) -> Result<f64, ModelError> {
    if !(x > 0.0) {
        return Err(ModelError::Domain(format!(
            "E1 requires x > 0, got {x}"
        )));
    }
    if x <= 1.0 {
        Ok(e1_series(x))
    } else {
        Ok(e1_continued_fraction(x))
    }
}

// E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k * k!)
fn e1_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -x / kf;
        let add = -term / kf;
        sum += add;
        if add.abs() < 1e-17 * (1.0 + sum.abs()) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() + sum
}

// E1(x) = e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - 9/(...)))), evaluated with
// the modified Lentz algorithm.
fn e1_continued_fraction(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..200u32 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = b + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x).exp() * h
}
