//! Integer-order Bessel functions of the first kind.
//!
//! Values come from Miller's backward recurrence started well above both the
//! order and the argument, normalized with `J₀ + 2 Σ J₂ₖ = 1`. Negative
//! orders and arguments are folded onto the positive quadrant with
//! `J₋ₙ(x) = (−1)ⁿ Jₙ(x)` and `Jₙ(−x) = (−1)ⁿ Jₙ(x)`.

use crate::error::{Error, Result};

/// Largest supported `|order|`.
pub const MAX_ORDER: i32 = 50;
/// Largest supported `|x|`.
pub const MAX_ARG: f64 = 50.0;

fn parity(n: i32) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `J_order(x)`, absolute error around 1e−14 on the supported range.
pub fn bessel_j(order: i32, x: f64) -> Result<f64> {
    if order.abs() > MAX_ORDER || !(x.abs() <= MAX_ARG) {
        return Err(Error::Argument(format!(
            "bessel_j({order}, {x}) outside |order| <= {MAX_ORDER}, |x| <= {MAX_ARG}"
        )));
    }
    let n = order.unsigned_abs() as usize;
    let mut sign = if order < 0 { parity(order) } else { 1.0 };
    if x < 0.0 {
        sign *= parity(order);
    }
    Ok(sign * ladder(n, x.abs())[n])
}

/// `[J₀(x), …, J_nmax(x)]` from a single recurrence sweep.
pub fn bessel_j_orders(nmax: usize, x: f64) -> Result<Vec<f64>> {
    if nmax > MAX_ORDER as usize || !(x.abs() <= MAX_ARG) {
        return Err(Error::Argument(format!(
            "bessel_j_orders({nmax}, {x}) outside the supported range"
        )));
    }
    let mut out = ladder(nmax, x.abs());
    if x < 0.0 {
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    Ok(out)
}

/// Backward recurrence for `x ≥ 0`, returning orders `0..=nmax`.
fn ladder(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let top = (nmax as f64).max(x);
    let mut start = (top + 24.0 + (40.0 * top).sqrt()).ceil() as usize;
    start += start % 2;

    const BIG: f64 = 1e200;
    let two_over_x = 2.0 / x;
    let (mut above, mut here) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let below = k as f64 * two_over_x * here - above;
        above = here;
        here = below;
        let order = k - 1;
        if order <= nmax {
            out[order] = here;
        }
        if order % 2 == 0 && order > 0 {
            norm += 2.0 * here;
        }
        if here.abs() > BIG {
            here /= BIG;
            above /= BIG;
            norm /= BIG;
            for v in out.iter_mut() {
                *v /= BIG;
            }
        }
    }
    norm += here;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// Location of the first maximum of `|J_order|` on the positive axis, the
/// first zero of `J'_order`. For order 0 the maximum sits at the origin.
pub fn first_peak(order: i32) -> Result<f64> {
    let n = order.unsigned_abs() as i32;
    if n == 0 {
        return Ok(0.0);
    }
    let deriv = |x: f64| -> Result<f64> { Ok(0.5 * (bessel_j(n - 1, x)? - bessel_j(n + 1, x)?)) };
    let (mut lo, mut hi) = (1e-6, 1e-6);
    let step = 0.05;
    while deriv(hi)? > 0.0 {
        lo = hi;
        hi += step;
        if hi > MAX_ARG {
            return Err(Error::Argument(format!("no peak of J_{order} below {MAX_ARG}")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if deriv(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
