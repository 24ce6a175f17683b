use nalgebra::{DMatrix, DVector};

use super::{annihilation_unchecked, Operator, Space, StateVector, C64};
use crate::error::{Error, Result};

/// A value computed on a truncated space together with the probability
/// weight the truncation discarded before renormalization.
#[derive(Clone, Debug, PartialEq)]
pub struct Truncated<T> {
    pub value: T,
    pub deficit: f64,
}

impl<T> Truncated<T> {
    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Truncated<U> {
        Truncated {
            value: f(self.value),
            deficit: self.deficit,
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::Argument("Fock dimension must be positive".into()));
    }
    Ok(())
}

/// Lowering operator on `dim` Fock levels.
pub fn annihilation(dim: usize) -> Result<Operator> {
    if dim < 2 {
        return Err(Error::Argument(format!("ladder operators need at least 2 levels, got {dim}")));
    }
    Ok(annihilation_unchecked(dim))
}

pub fn creation(dim: usize) -> Result<Operator> {
    Ok(annihilation(dim)?.adjoint())
}

pub fn number(dim: usize) -> Result<Operator> {
    check_dim(dim)?;
    let diag: Vec<C64> = (0..dim).map(|n| C64::new(n as f64, 0.0)).collect();
    Ok(Operator::diagonal(&diag))
}

/// `ln k!` for `k = 0..=n`.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Probability that a Poisson variable with the given mean is `>= k`.
/// Summed upward from `k` so small tails keep full relative precision.
pub fn poisson_tail(mean: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if mean <= 0.0 {
        return 0.0;
    }
    let ln_mean = mean.ln();
    let lf = ln_factorials(k);
    let mut ln_term = -mean + k as f64 * ln_mean - lf[k];
    let mut total = 0.0;
    let mut n = k;
    loop {
        let term = ln_term.exp();
        total += term;
        n += 1;
        ln_term += ln_mean - (n as f64).ln();
        if (n as f64) > mean && term < total * 1e-17 {
            break;
        }
        if n > k + 100_000 {
            break;
        }
    }
    total.min(1.0)
}

/// Coherent-state amplitudes `e^{-|α|²/2} αⁿ/√n!` for `n < dim`, evaluated
/// in log space and renormalized on the truncated space.
pub fn coherent_amplitudes(alpha: C64, dim: usize) -> Result<Truncated<Vec<C64>>> {
    check_dim(dim)?;
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::Argument(format!("non-finite coherent amplitude {alpha}")));
    }
    let r2 = alpha.norm_sqr();
    let lf = ln_factorials(dim - 1);
    let mut amps = Vec::with_capacity(dim);
    let mut kept = 0.0;
    if r2 == 0.0 {
        amps.push(C64::new(1.0, 0.0));
        amps.resize(dim, C64::default());
        return Ok(Truncated { value: amps, deficit: 0.0 });
    }
    let (ln_r, phase) = (alpha.norm().ln(), alpha.arg());
    for n in 0..dim {
        let nf = n as f64;
        let ln_mod = -0.5 * r2 + nf * ln_r - 0.5 * lf[n];
        let c = C64::from_polar(ln_mod.exp(), nf * phase);
        kept += c.norm_sqr();
        amps.push(c);
    }
    let deficit = (1.0 - kept).max(0.0);
    let scale = 1.0 / kept.sqrt();
    for c in &mut amps {
        *c *= scale;
    }
    Ok(Truncated { value: amps, deficit })
}

/// Normalized coherent state `|α⟩` on a single mode of `dim` levels.
pub fn coherent_state(alpha: C64, dim: usize) -> Result<Truncated<StateVector>> {
    Ok(coherent_amplitudes(alpha, dim)?
        .map(|v| StateVector::from_raw(Space::Mode(dim), DVector::from_vec(v))))
}

/// Extra Fock levels used when exponentiating the displacement generator,
/// enough that the truncation edge does not reach the requested block.
fn guard_levels(amplitude: C64) -> usize {
    let r = amplitude.norm();
    (10.0 + r * r + 8.0 * r).ceil() as usize
}

/// Matrix elements `⟨m|D(ς)|n⟩` for `m < rows`, `n < cols`, where
/// `D(ς) = exp(ς a† − ς* a)`.
///
/// The generator is exponentiated on a space enlarged by a guard band and
/// then cropped, so the returned block agrees with the infinite-dimensional
/// operator to near machine precision.
pub fn displacement(amplitude: C64, rows: usize, cols: usize) -> Result<DMatrix<C64>> {
    check_dim(rows)?;
    check_dim(cols)?;
    if !amplitude.re.is_finite() || !amplitude.im.is_finite() {
        return Err(Error::Argument(format!("non-finite displacement {amplitude}")));
    }
    let size = rows.max(cols) + guard_levels(amplitude);
    let mut gen = DMatrix::<C64>::zeros(size, size);
    for n in 1..size {
        let s = (n as f64).sqrt();
        gen[(n, n - 1)] = amplitude * s;
        gen[(n - 1, n)] = -amplitude.conj() * s;
    }
    let full = gen.exp();
    Ok(full.view((0, 0), (rows, cols)).into_owned())
}

/// Matrix elements `⟨m|D(ς)|n⟩` for `m < rows`, `n < cols` from the closed
/// form
///
/// ```text
/// ⟨m|D(ς)|n⟩ = √(n!/m!) ς^(m−n) e^(−|ς|²/2) L_n^(m−n)(|ς|²)      (m ≥ n)
/// ```
///
/// and its mirror for `m < n`. Each element is exact independently of the
/// block size; the generalized Laguerre polynomials come from the upward
/// three-term recurrence in the lower index, one sweep per offset `m − n`.
pub fn displacement_closed_form(amplitude: C64, rows: usize, cols: usize) -> Result<DMatrix<C64>> {
    check_dim(rows)?;
    check_dim(cols)?;
    if !amplitude.re.is_finite() || !amplitude.im.is_finite() {
        return Err(Error::Argument(format!("non-finite displacement {amplitude}")));
    }
    let x = amplitude.norm_sqr();
    let mut out = DMatrix::<C64>::zeros(rows, cols);
    if x == 0.0 {
        for k in 0..rows.min(cols) {
            out[(k, k)] = C64::new(1.0, 0.0);
        }
        return Ok(out);
    }
    let lf = ln_factorials(rows.max(cols));
    let (ln_r, phase) = (amplitude.norm().ln(), amplitude.arg());
    // Offset k = m − n ≥ 0 runs below the diagonal, k < 0 above it.
    let lowest = -(cols as isize - 1);
    for k in lowest..rows as isize {
        let ku = k.unsigned_abs();
        let kf = ku as f64;
        let count = if k >= 0 { cols.min(rows - ku) } else { rows.min(cols - ku) };
        // ς^k for k ≥ 0 and (−ς*)^|k| for k < 0 share the modulus r^|k|.
        let arg = if k >= 0 { kf * phase } else { kf * (std::f64::consts::PI - phase) };
        let (mut l_prev, mut l) = (0.0, 1.0);
        for lo in 0..count {
            if lo > 0 {
                let j = (lo - 1) as f64;
                let next = ((2.0 * j + 1.0 + kf - x) * l - (j + kf) * l_prev) / (j + 1.0);
                l_prev = l;
                l = next;
            }
            let hi = lo + ku;
            let ln_mod = 0.5 * (lf[lo] - lf[hi]) - 0.5 * x + kf * ln_r;
            let value = C64::from_polar(ln_mod.exp() * l, arg);
            let (m, n) = if k >= 0 { (hi, lo) } else { (lo, hi) };
            out[(m, n)] = value;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_operators() {
        let a = annihilation(4).unwrap();
        assert!((a.get(1, 2) - C64::new(2f64.sqrt(), 0.0)).norm() < 1e-15);
        let n = a.adjoint().matmul(&a).unwrap();
        let num = number(4).unwrap();
        for k in 0..4 {
            assert!((n.get(k, k) - num.get(k, k)).norm() < 1e-14);
        }
        assert!(annihilation(1).is_err());
    }

    #[test]
    fn coherent_matches_direct_formula() {
        let alpha = C64::new(0.7, -0.4);
        let amps = coherent_amplitudes(alpha, 40).unwrap();
        assert!(amps.deficit < 1e-15);
        let mut fact = 1.0;
        for (n, c) in amps.value.iter().enumerate().take(12) {
            if n > 0 {
                fact *= n as f64;
            }
            let expect = (-0.5 * alpha.norm_sqr()).exp() * alpha.powu(n as u32) / fact.sqrt();
            assert!((c - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn coherent_truncation_deficit_matches_poisson_tail() {
        let alpha = C64::new(2.9, 0.3);
        let t = coherent_amplitudes(alpha, 10).unwrap();
        let tail = poisson_tail(alpha.norm_sqr(), 10);
        assert!((t.deficit - tail).abs() < 1e-12);
        let norm: f64 = t.value.iter().map(|c| c.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn poisson_tail_small_values() {
        // P(N >= 1) = 1 - e^{-μ}
        let mu = 1e-3;
        assert!((poisson_tail(mu, 1) - (-mu).exp_m1().abs()).abs() < 1e-18);
        assert_eq!(poisson_tail(0.0, 3), 0.0);
        assert_eq!(poisson_tail(4.0, 0), 1.0);
    }

    #[test]
    fn closed_form_agrees_with_exponential() {
        for (z, rows, cols) in [
            (C64::new(0.3, 0.1), 20, 20),
            (C64::new(-1.2, 2.0), 20, 20),
            (C64::new(3.5, -1.0), 20, 20),
            (C64::new(-4.0, 4.0), 170, 29),
        ] {
            let d = displacement(z, rows, cols).unwrap();
            let e = displacement_closed_form(z, rows, cols).unwrap();
            assert!((d - e).camax() < 1e-10, "z={z}");
        }
    }

    #[test]
    fn closed_form_columns_are_unitary_when_captured() {
        let e = displacement_closed_form(C64::new(2.0, -1.0), 90, 10).unwrap();
        for n in 0..10 {
            assert!((e.column(n).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn displaced_vacuum_is_coherent() {
        let z = C64::new(1.5, -0.8);
        let d = displacement(z, 30, 1).unwrap();
        let coh = coherent_amplitudes(z, 30).unwrap();
        for m in 0..30 {
            let raw = coh.value[m] * (1.0 - coh.deficit).sqrt();
            assert!((d[(m, 0)] - raw).norm() < 1e-12);
        }
    }
}
