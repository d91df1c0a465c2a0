//! The fundamental system `P = U(a,b,z(ξ))`, `E = V(a,b,z(ξ))` of the linear
//! profile equation, its Wronskian and the variation-of-constants kernel.
//!
//! With `z = -iκξ²/(2(1-iε))`, `a = (1/σ + iω/κ)/2`, `b = d/2`.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::kummer::{kummer_u_with_derivative, kummer_v_scaled, KummerArgs, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::params::ProfileParams;

/// Values of `P`, `E`, their `ξ`-derivatives and the Wronskian at one `ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalPair {
    pub p: Complex64,
    pub p_prime: Complex64,
    pub e: Complex64,
    pub e_prime: Complex64,
    /// Closed-form Wronskian `P E' - P' E`.
    pub w: Complex64,
}

/// Same quantities with `E`, `E'`, `W` divided by `e^{Re z}`, which keeps them
/// finite where `ε > 0` makes `E` grow like a Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledPair {
    pub p: Complex64,
    pub p_prime: Complex64,
    pub e: Complex64,
    pub e_prime: Complex64,
    pub w: Complex64,
    pub log_scale: f64,
}

impl ScaledPair {
    pub fn unscaled(&self) -> FundamentalPair {
        let s = self.log_scale.exp();
        FundamentalPair {
            p: self.p,
            p_prime: self.p_prime,
            e: self.e * s,
            e_prime: self.e_prime * s,
            w: self.w * s,
        }
    }
}

/// Kummer parameters `(a, b)` and `z(ξ)`, `dz/dξ`.
pub fn kummer_map(params: &ProfileParams, xi: f64) -> (Complex64, Complex64, Complex64, Complex64) {
    let a = 0.5 * params.decay_exponent();
    let b = Complex64::new(params.d as f64 / 2.0, 0.0);
    let one_m_ie = Complex64::new(1.0, -params.eps);
    let z = Complex64::new(0.0, -params.kappa) / one_m_ie * (xi * xi / 2.0);
    let dz = Complex64::new(0.0, -params.kappa) / one_m_ie * xi;
    (a, b, z, dz)
}

/// Closed-form Wronskian `W = (-iκ/(1-iε)) e^{±iπ(b-a)} ξ z^{-b} e^z`, divided by `e^{Re z}`.
pub fn wronskian_scaled(params: &ProfileParams, xi: f64) -> Complex64 {
    let (a, b, z, dz) = kummer_map(params, xi);
    let sign = if z.im > 0.0 { 1.0 } else { -1.0 };
    let phase = (Complex64::new(0.0, sign * PI) * (b - a)).exp();
    dz * phase * (-b * z.ln()).exp() * Complex64::new(0.0, z.im).exp()
}

pub fn wronskian(params: &ProfileParams, xi: f64) -> Complex64 {
    let (_, _, z, _) = kummer_map(params, xi);
    wronskian_scaled(params, xi) * z.re.exp()
}

pub fn fundamental_pair_scaled(params: &ProfileParams, xi: f64) -> Result<ScaledPair> {
    if !(xi > 0.0) {
        return Err(Error::Domain(format!("fundamental pair needs xi > 0, got {xi}")));
    }
    if !(params.kappa > 0.0) {
        return Err(Error::Domain(format!("fundamental pair needs kappa > 0, got {}", params.kappa)));
    }
    let (a, b, z, dz) = kummer_map(params, xi);
    let args = KummerArgs::new(a, b, z);
    let (u, du) = kummer_u_with_derivative(args, DEFAULT_TOL)?;
    let (v, dv) = kummer_v_scaled(args, DEFAULT_TOL)?;
    Ok(ScaledPair {
        p: u,
        p_prime: du * dz,
        e: v,
        e_prime: dv * dz,
        w: wronskian_scaled(params, xi),
        log_scale: z.re,
    })
}

pub fn fundamental_pair(params: &ProfileParams, xi: f64) -> Result<FundamentalPair> {
    Ok(fundamental_pair_scaled(params, xi)?.unscaled())
}

/// Variation-of-constants kernel
///
/// ```text
/// K(ξ,η) = -P(ξ) E(η) / ((1-iε) W(η))   for η ≤ ξ
/// K(ξ,η) = -E(ξ) P(η) / ((1-iε) W(η))   for ξ ≤ η
/// ```
///
/// `xi1` is the left end of the far-field interval; both arguments must lie
/// at or beyond it.
pub fn kernel_k(params: &ProfileParams, xi1: f64, xi: f64, eta: f64) -> Result<Complex64> {
    if xi < xi1 || eta < xi1 {
        return Err(Error::Domain(format!(
            "kernel arguments ({xi}, {eta}) must be >= xi1 = {xi1}"
        )));
    }
    let at_xi = fundamental_pair_scaled(params, xi)?;
    let at_eta = fundamental_pair_scaled(params, eta)?;
    Ok(kernel_from_pairs(params, &at_xi, &at_eta, xi, eta))
}

pub(crate) fn kernel_from_pairs(
    params: &ProfileParams,
    at_xi: &ScaledPair,
    at_eta: &ScaledPair,
    xi: f64,
    eta: f64,
) -> Complex64 {
    let one_m_ie = Complex64::new(1.0, -params.eps);
    if eta <= xi {
        // E(η)/W(η): the e^{Re z(η)} scalings cancel.
        -at_xi.p * at_eta.e / (one_m_ie * at_eta.w)
    } else {
        let growth = (at_xi.log_scale - at_eta.log_scale).exp();
        -at_xi.e * at_eta.p / (one_m_ie * at_eta.w) * growth
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1_j1() -> ProfileParams {
        ProfileParams::nls(1, 2.3, 0.85311)
    }

    #[test]
    fn wronskian_matches_closed_form() {
        for eps in [0.0, 0.05, 0.2] {
            let params = table1_j1().with_eps(eps);
            for xi in [2.0, 5.0, 30.0] {
                let f = fundamental_pair(&params, xi).unwrap();
                let numeric = f.p * f.e_prime - f.p_prime * f.e;
                let rel = (numeric - f.w).norm() / f.w.norm();
                assert!(rel < 1e-8, "eps={eps} xi={xi}: {numeric} vs {} ({rel:e})", f.w);
            }
        }
    }

    #[test]
    fn regular_point_values() {
        let params = ProfileParams::new(1, 2.3, 1.0, 0.0, 1.0, 1.0);
        let f = fundamental_pair(&params, 1.0).unwrap();
        for v in [f.p, f.p_prime, f.e, f.e_prime, f.w] {
            assert!(v.norm().is_finite() && v.norm() > 0.0);
        }
    }

    #[test]
    fn p_decays_like_power_law() {
        let params = table1_j1();
        let mut ratios = Vec::new();
        for k in 0..10 {
            let xi = 10.0 * 10f64.powf(k as f64 / 9.0);
            let f = fundamental_pair(&params, xi).unwrap();
            ratios.push(f.p.norm() * xi.powf(1.0 / params.sigma));
        }
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min < 1.05, "{ratios:?}");
    }

    #[test]
    fn kernel_is_continuous_on_the_diagonal() {
        let params = table1_j1().with_eps(0.1);
        let xi = 12.0;
        let k_lo = kernel_k(&params, 10.0, xi, xi).unwrap();
        let at = fundamental_pair_scaled(&params, xi).unwrap();
        let k_hi = kernel_from_pairs(&params, &at, &at, xi, xi + 1e-300);
        assert!((k_lo - k_hi).norm() < 1e-12 * k_lo.norm());
    }

    #[test]
    fn kernel_satisfies_growth_bounds() {
        // |K| ≤ C ξ^{-1/σ} η^{1/σ-1} (η ≤ ξ) and |K| ≤ C ξ^{-d+1/σ} η^{-1-1/σ+d} (ξ ≤ η);
        // the fitted constant must not grow when the sample range is extended.
        let params = ProfileParams::new(3, 1.0, 0.1, 0.0, 0.91737, 1.0);
        let s = params.sigma;
        let d = params.d as f64;
        let xi1 = 5.0;
        let fit = |hi: f64| {
            let mut c_lower: f64 = 0.0;
            let mut c_upper: f64 = 0.0;
            let grid: Vec<f64> = (0..12).map(|k| xi1 * (hi / xi1).powf(k as f64 / 11.0)).collect();
            for &xi in &grid {
                for &eta in &grid {
                    let k = kernel_k(&params, xi1, xi, eta).unwrap().norm();
                    if eta <= xi {
                        c_lower = c_lower.max(k / (xi.powf(-1.0 / s) * eta.powf(1.0 / s - 1.0)));
                    } else {
                        c_upper = c_upper.max(k / (xi.powf(-d + 1.0 / s) * eta.powf(-1.0 - 1.0 / s + d)));
                    }
                }
            }
            (c_lower, c_upper)
        };
        let (l1, u1) = fit(20.0);
        let (l2, u2) = fit(60.0);
        assert!(l1.is_finite() && u1.is_finite());
        assert!(l2 <= 1.5 * l1 && u2 <= 1.5 * u1, "({l1},{u1}) -> ({l2},{u2})");
    }
}
