//! Bernstein basis `p_{n,k}(x) = C(n,k) x^k (1-x)^{n-k}`.
//!
//! Degrees up to [`LINEAR_MAX_DEGREE`] use exact integer binomials and direct
//! powers. Above that the binomial overflows `f64` near `n = 1030`, so the
//! weights are assembled in log space.

use crate::error::{Error, Result};
use crate::summation::CompensatedSum;

pub(crate) const LINEAR_MAX_DEGREE: usize = 64;

/// All `n + 1` basis values at `x`.
pub(crate) fn weights(n: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    if x == 1.0 {
        out[n] = 1.0;
        return out;
    }
    if n <= LINEAR_MAX_DEGREE {
        let mut c: u64 = 1;
        for (k, w) in out.iter_mut().enumerate() {
            *w = c as f64 * x.powi(k as i32) * (1.0 - x).powi((n - k) as i32);
            if k < n {
                // C(n,k+1) = C(n,k) (n-k)/(k+1); exact in u128 before dividing.
                c = ((c as u128 * (n - k) as u128) / (k as u128 + 1)) as u64;
            }
        }
    } else {
        let ln_x = x.ln();
        let ln_1mx = (-x).ln_1p();
        let mut ln_c = CompensatedSum::default();
        for (k, w) in out.iter_mut().enumerate() {
            *w = (ln_c.value() + k as f64 * ln_x + (n - k) as f64 * ln_1mx).exp();
            if k < n {
                ln_c.add(((n - k) as f64).ln());
                ln_c.add(-((k + 1) as f64).ln());
            }
        }
        // The exact weights sum to one; dividing by the computed total removes
        // the drift that the rounded logarithms accumulate, so constants are
        // reproduced to a few ulps at every degree.
        let total: CompensatedSum = out.iter().copied().collect();
        let total = total.value();
        out.iter_mut().for_each(|w| *w /= total);
    }
    out
}

/// The full vector `[p_{n,0}(x), ..., p_{n,n}(x)]`.
pub fn bernstein_weights(n: usize, x: f64) -> Result<Vec<f64>> {
    crate::function_space::check_unit("x", x)?;
    Ok(weights(n, x))
}

/// A single basis value `p_{n,k}(x)`.
pub fn bernstein_basis(n: usize, k: usize, x: f64) -> Result<f64> {
    if k > n {
        return Err(Error::BasisIndex { n, k });
    }
    crate::function_space::check_unit("x", x)?;
    if x == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    if x == 1.0 {
        return Ok(if k == n { 1.0 } else { 0.0 });
    }
    let k_pow = k as i32;
    let rest = (n - k) as i32;
    if n <= LINEAR_MAX_DEGREE {
        let c = exact_binomial(n, k) as f64;
        Ok(c * x.powi(k_pow) * (1.0 - x).powi(rest))
    } else {
        let mut ln_c = CompensatedSum::default();
        for i in 0..k.min(n - k) {
            ln_c.add(((n - i) as f64).ln());
            ln_c.add(-((i + 1) as f64).ln());
        }
        Ok((ln_c.value() + k as f64 * x.ln() + (n - k) as f64 * (-x).ln_1p()).exp())
    }
}

fn exact_binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i as u128 + 1);
    }
    c as u64
}
