//! Decay series at infinity, `F(ξ) = ξ^{-α} Σ_l a_l ξ^{-2l}` with `α = 1/σ + iω/κ`.
//!
//! Substituting the series into the profile equation and collecting the
//! power `ξ^{-α-2l}` gives
//!
//! ```text
//! 2iκ l a_l = (1-iε)(α+2l-2)(α+2l-d) a_{l-1} + (1+iδ) N_{l-1}
//! ```
//!
//! where `N_m` is the coefficient of `ξ^{-α-2-2m}` in `|F|^{2σ}F`:
//! `N_0 = |a_0|^{2σ} a_0` and
//! `N_1 = |a_0|^{2σ} (a_1 + 2σ Re(conj(a_0) a_1) a_0 / |a_0|²)`.
//! Since `|F|^{2σ}F ~ ξ^{-α-2}`, the nonlinear term already contributes to
//! `a_1`. The ratios `a_l/a_0` depend on `a_0` only through `|a_0|`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::ProfileParams;

/// Highest correction index with a closed form.
pub const MAX_ORDER: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldExpansion {
    /// `-1/σ - iω/κ`
    pub exponent: Complex64,
    /// `a_0, a_1, ..., a_n`
    pub coeffs: Vec<Complex64>,
    pub n_terms: usize,
}

/// Coefficients `a_0..a_n` of the decay series for a given leading coefficient.
pub fn farfield_coeffs(params: &ProfileParams, a0: Complex64, n: usize) -> Result<FarFieldExpansion> {
    if n > MAX_ORDER {
        return Err(Error::UnsupportedOrder(n));
    }
    if !(params.kappa > 0.0) {
        return Err(Error::Domain(format!("far-field series needs kappa > 0, got {}", params.kappa)));
    }
    let alpha = params.decay_exponent();
    let d = params.d as f64;
    let s = params.sigma;
    let one_m_ie = Complex64::new(1.0, -params.eps);
    let nl = Complex64::new(1.0, params.delta) * params.nonlinearity;
    let two_i_kappa = Complex64::new(0.0, 2.0 * params.kappa);

    let amp = a0.norm();
    let amp_pow = if amp > 0.0 { amp.powf(2.0 * s) } else { 0.0 };
    let mut coeffs = vec![a0];
    for l in 1..=n {
        let lf = l as f64;
        let linear = one_m_ie * (alpha + 2.0 * lf - 2.0) * (alpha + 2.0 * lf - d) * coeffs[l - 1];
        let nonlinear = match l {
            1 => amp_pow * a0,
            2 if amp > 0.0 => {
                let a1 = coeffs[1];
                amp_pow * (a1 + 2.0 * s * (a0.conj() * a1).re / (amp * amp) * a0)
            }
            _ => Complex64::new(0.0, 0.0),
        };
        coeffs.push((linear + nl * nonlinear) / (two_i_kappa * lf));
    }
    Ok(FarFieldExpansion {
        exponent: -alpha,
        coeffs,
        n_terms: n + 1,
    })
}

/// `(F(ξ), F'(ξ))` from the truncated series, differentiated term by term.
pub fn farfield_eval(expansion: &FarFieldExpansion, xi: f64) -> (Complex64, Complex64) {
    let ln_xi = xi.ln();
    let mut f = Complex64::new(0.0, 0.0);
    let mut df = Complex64::new(0.0, 0.0);
    for (l, &a) in expansion.coeffs.iter().enumerate() {
        let p = expansion.exponent - 2.0 * l as f64;
        let term = a * (p * ln_xi).exp();
        f += term;
        df += term * p / xi;
    }
    (f, df)
}

/// Log-derivative `F'/F` at `ξ` of the `n_terms`-term series whose value at
/// `ξ` equals `q`.
///
/// The leading coefficient is recovered from `q` by a short fixed-point
/// iteration on `|a_0|` (the correction terms are `O(ξ^{-2})`).
pub fn log_derivative_matching(params: &ProfileParams, q: Complex64, xi: f64, n_terms: usize) -> Result<Complex64> {
    if n_terms == 0 {
        return Err(Error::InvalidParameter("n_terms must be >= 1".into()));
    }
    let n = n_terms - 1;
    let alpha = params.decay_exponent();
    let unit = (alpha * xi.ln()).exp();
    let mut a0 = q * unit;
    let mut expansion = farfield_coeffs(params, a0, n)?;
    if n > 0 && params.nonlinearity != 0.0 && q.norm() > 0.0 {
        for _ in 0..50 {
            let (f, _) = farfield_eval(&expansion, xi);
            let next = a0 * q / f;
            let change = (next - a0).norm();
            a0 = next;
            expansion = farfield_coeffs(params, a0, n)?;
            if change <= 1e-15 * a0.norm() {
                break;
            }
        }
    }
    let (f, df) = farfield_eval(&expansion, xi);
    if f.norm() == 0.0 {
        // zero solution: any log-derivative of the linear series
        let lin = farfield_coeffs(params, Complex64::new(1.0, 0.0), n)?;
        let (f, df) = farfield_eval(&lin, xi);
        return Ok(df / f);
    }
    Ok(df / f)
}
