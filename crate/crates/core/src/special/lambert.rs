//! Principal branch of the Lambert W function.

use std::f64::consts::E;

const MAX_ITER: usize = 64;

/// `W₀(x)` for `x ≥ −1/e`; `None` outside the principal-branch domain.
pub fn lambert_w0(x: f64) -> Option<f64> {
    const BRANCH_POINT: f64 = -1.0 / E;
    if x.is_nan() || x < BRANCH_POINT {
        return None;
    }
    if x == 0.0 {
        return Some(0.0);
    }
    if x.is_infinite() {
        return Some(f64::INFINITY);
    }
    if x > E {
        return lambert_w0_exp(x.ln());
    }

    let mut w = if x < -0.25 {
        // branch-point series in p = √(2(ex + 1))
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        x.ln_1p()
    };
    if x == BRANCH_POINT {
        return Some(-1.0);
    }

    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Some(w)
}

/// `W₀(e^L)`, evaluated without forming `e^L` so huge arguments do not
/// overflow.
pub fn lambert_w0_exp(ln_x: f64) -> Option<f64> {
    if ln_x.is_nan() {
        return None;
    }
    if ln_x <= 1.0 {
        return lambert_w0(ln_x.exp());
    }
    if ln_x.is_infinite() {
        return Some(f64::INFINITY);
    }
    // Solve w + ln w = L by Halley iteration.
    let l2 = ln_x.ln();
    let mut w = (ln_x - l2 + l2 / ln_x).max(1.0);
    for _ in 0..MAX_ITER {
        let f = w + w.ln() - ln_x;
        let d1 = 1.0 + 1.0 / w;
        let d2 = -1.0 / (w * w);
        let step = f / (d1 - 0.5 * f * d2 / d1);
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w {
            break;
        }
    }
    Some(w)
}
