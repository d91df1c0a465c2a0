//! Confluent hypergeometric functions `U(a, b, z)` and `V(a, b, z) = e^z U(b-a, b, -z)`.
//!
//! `U` is evaluated either from the extended integral representation
//!
//! ```text
//! U(a,b,z) = z^{-a} / Γ(a) ∫_0^∞ e^{-s} s^{a-1} (1 + s/z)^{b-a-1} ds
//! ```
//!
//! (valid for `Re a > 0`, `|arg z| < π`) or from the asymptotic series
//! `z^{-a} Σ (a)_k (1+a-b)_k / k! (-z)^{-k}` when `|z|` is large enough.
//! All complex powers use the principal branch.

use num_complex::Complex64;

use super::gamma::gamma_complex;
use super::quadrature;
use crate::error::{Error, Result};

/// Arguments of a Kummer function evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KummerArgs {
    pub a: Complex64,
    pub b: Complex64,
    pub z: Complex64,
}

impl KummerArgs {
    pub fn new(a: Complex64, b: Complex64, z: Complex64) -> Self {
        Self { a, b, z }
    }

    /// Arguments of the contiguous function `U(a+1, b+1, z)` used for `dU/dz`.
    pub fn raised(&self) -> Self {
        Self::new(self.a + 1.0, self.b + 1.0, self.z)
    }
}

/// Default relative accuracy requested from [`kummer_u`].
pub const DEFAULT_TOL: f64 = 1e-13;

const MAX_PANELS: usize = 4000;

/// `U(a, b, z)` by adaptive quadrature of the extended integral representation.
///
/// `tol` bounds the estimated quadrature error relative to `|U|`.
pub fn kummer_u_quadrature(args: KummerArgs, tol: f64) -> Result<Complex64> {
    let KummerArgs { a, b, z } = args;
    if !(a.re > 0.0) {
        return Err(Error::Domain(format!("integral representation needs Re a > 0, got a = {a}")));
    }
    if z.norm() == 0.0 || (z.im == 0.0 && z.re < 0.0) {
        return Err(Error::Domain(format!("z = {z} is on the branch cut or zero")));
    }
    let c = b - a - 1.0;
    let r = a.re;

    // Upper limit S with e^{-S} S^{Re a} (1 + S/|z|)^{max(0, Re c)} < 1e-17 (times the
    // worst-case phase growth of the complex exponents).
    let phase_growth = (a.im.abs() + c.im.abs()) * std::f64::consts::PI;
    let bound = |s: f64| {
        (-s + (r - 1.0).max(0.0) * s.ln() + c.re.max(0.0) * (1.0 + s / z.norm()).ln() + phase_growth)
            .exp()
    };
    let mut upper = 40.0;
    while bound(upper) > 1e-17 && upper < 1e4 {
        upper *= 1.25;
    }

    let integrand = |s: f64| -> Complex64 {
        let sc = Complex64::new(s, 0.0);
        (-s).exp() * (sc.ln() * (a - 1.0)).exp() * ((1.0 + sc / z).ln() * c).exp()
    };

    // Head: s ∈ (0, 1] with s = t^{1/r} when r < 1, which turns s^{a-1} ds into
    // (1/r) e^{i Im a ln s} dt.
    let head = if r < 1.0 {
        let inv_r = 1.0 / r;
        let f = |t: f64| -> Complex64 {
            if t <= 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let s = t.powf(inv_r);
            let ln_s = inv_r * t.ln();
            let phase = Complex64::new(0.0, a.im * ln_s).exp();
            let sc = Complex64::new(s, 0.0);
            inv_r * (-s).exp() * phase * ((1.0 + sc / z).ln() * c).exp()
        };
        quadrature::integrate(f, 0.0, 1.0, 0.0, tol * 0.25, MAX_PANELS)
    } else {
        quadrature::integrate(integrand, 0.0, 1.0, 0.0, tol * 0.25, MAX_PANELS)
    };
    // Tail split so that the structure near s = |z| (where (1 + s/z) turns) is resolved.
    let mid = (2.0 * z.norm()).clamp(1.0, upper);
    let tail1 = quadrature::integrate(integrand, 1.0, mid, 0.0, tol * 0.25, MAX_PANELS);
    let tail2 = if mid < upper {
        quadrature::integrate(integrand, mid, upper, 0.0, tol * 0.25, MAX_PANELS)
    } else {
        quadrature::Quadrature {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            converged: true,
        }
    };
    let integral = head.value + tail1.value + tail2.value;
    let err = head.error + tail1.error + tail2.error;
    let rel_err = err / integral.norm().max(f64::MIN_POSITIVE);
    let prefactor = (-a * z.ln()).exp() / gamma_complex(a)?;
    let value = prefactor * integral;
    if !(head.converged && tail1.converged && tail2.converged) && rel_err > tol {
        return Err(Error::Accuracy { tol, achieved: rel_err });
    }
    Ok(value)
}

/// Truncated asymptotic series of `U(a, b, z)` with `n` terms.
///
/// Returns the partial sum and the magnitude of the first omitted term (an
/// error proxy for the truncation).
pub fn kummer_u_series(args: KummerArgs, n: usize) -> (Complex64, f64) {
    let KummerArgs { a, b, z } = args;
    let lead = (-a * z.ln()).exp();
    let inv_mz = -1.0 / z;
    let c = 1.0 + a - b;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..n {
        sum += term;
        term = term * (a + k as f64) * (c + k as f64) / (k as f64 + 1.0) * inv_mz;
    }
    (lead * sum, (lead * term).norm())
}

/// Evaluates the asymptotic series at its optimal truncation and reports
/// whether the smallest term reached `tol` relative to the sum.
fn series_if_accurate(args: KummerArgs, tol: f64) -> Option<Complex64> {
    let KummerArgs { a, b, z } = args;
    if z.norm() < 8.0 {
        return None;
    }
    let inv_mz = -1.0 / z;
    let c = 1.0 + a - b;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 0..200 {
        let mag = term.norm();
        if mag <= tol * sum.norm().max(1e-300) && k > 0 {
            return Some((-a * z.ln()).exp() * sum);
        }
        if mag > last {
            return None;
        }
        if mag == 0.0 {
            return Some((-a * z.ln()).exp() * (sum + term));
        }
        last = mag;
        sum += term;
        term = term * (a + k as f64) * (c + k as f64) / (k as f64 + 1.0) * inv_mz;
    }
    None
}

/// `U(a, b, z)` to relative accuracy `tol`: the asymptotic series when it
/// converges that far, adaptive quadrature otherwise.
pub fn kummer_u(args: KummerArgs, tol: f64) -> Result<Complex64> {
    if let Some(v) = series_if_accurate(args, tol) {
        return Ok(v);
    }
    kummer_u_quadrature(args, tol)
}

/// `U(a,b,z)` and `dU/dz = -a U(a+1, b+1, z)`.
pub fn kummer_u_with_derivative(args: KummerArgs, tol: f64) -> Result<(Complex64, Complex64)> {
    let u = kummer_u(args, tol)?;
    let du = -args.a * kummer_u(args.raised(), tol)?;
    Ok((u, du))
}

/// `V(a, b, z) = e^z U(b-a, b, -z)`.
pub fn kummer_v(args: KummerArgs) -> Result<Complex64> {
    let (v, _) = kummer_v_scaled(args, DEFAULT_TOL)?;
    Ok(v * args.z.re.exp())
}

/// `V(a,b,z) e^{-Re z}` and its `z`-derivative with the same scaling.
///
/// Uses `d/dz U(b-a, b, -z) = (b-a) U(b-a+1, b+1, -z)`.
pub fn kummer_v_scaled(args: KummerArgs, tol: f64) -> Result<(Complex64, Complex64)> {
    let KummerArgs { a, b, z } = args;
    let ba = b - a;
    if !(ba.re > 0.0) {
        return Err(Error::Domain(format!("V needs Re(b - a) > 0, got {ba}")));
    }
    let mz = -z;
    let phase = Complex64::new(0.0, z.im).exp();
    let u = kummer_u(KummerArgs::new(ba, b, mz), tol)?;
    let u1 = kummer_u(KummerArgs::new(ba + 1.0, b + 1.0, mz), tol)?;
    let v = phase * u;
    let dv = phase * (u + ba * u1);
    Ok((v, dv))
}
