//! Identity checks of the special functions, shared by the command line and
//! the acceptance harness.

use num_complex::Complex64;

use super::fundamental::fundamental_pair;
use super::kummer::{kummer_u, kummer_u_quadrature, kummer_u_series, KummerArgs};
use crate::params::ProfileParams;

/// One identity with its worst deviation over the sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub max_dev: f64,
    pub tol: f64,
    pub samples: usize,
}

impl Check {
    pub fn pass(&self) -> bool {
        self.max_dev.is_finite() && self.max_dev <= self.tol
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Remainder bound of the `n`-term asymptotic series for `|ph z| ≤ π/2`,
/// as a multiple of the first omitted term: `2α exp(2αρ/|z|)` with
/// `α = 1/(1 - s)`, `s = |b - 2a|/|z|`, `ρ = |2a² - 2ab + b|/2 + s(1 + s/4)/(1 - s)²`.
pub fn series_bound_factor(args: KummerArgs) -> Option<f64> {
    let KummerArgs { a, b, z } = args;
    if z.re < 0.0 {
        return None;
    }
    let r = z.norm();
    let s = (b - 2.0 * a).norm() / r;
    if s >= 1.0 {
        return None;
    }
    let alpha = 1.0 / (1.0 - s);
    let rho = 0.5 * (2.0 * a * a - 2.0 * a * b + b).norm() + s * (1.0 + s / 4.0) / ((1.0 - s) * (1.0 - s));
    Some(2.0 * alpha * (2.0 * alpha * rho / r).exp())
}

/// `U(a, a+1, z) = z^{-a}`, relative error of both evaluation routes.
pub fn power_identity() -> Check {
    let cases = [
        (c(0.7, 0.0), c(2.0, 0.0)),
        (c(0.3, 0.8), c(3.0, -7.0)),
        (c(0.2174, -0.59), c(0.0, -13.3)),
        (c(1.5, 2.0), c(25.0, 5.0)),
        (c(0.5, 0.1), c(0.5, 0.5)),
        (c(0.25, -1.0), c(0.0, -40.0)),
    ];
    let mut worst = 0.0f64;
    for (a, z) in cases {
        let args = KummerArgs::new(a, a + 1.0, z);
        let exact = (-a * z.ln()).exp();
        for v in [kummer_u(args, 1e-14), kummer_u_quadrature(args, 1e-14)] {
            let dev = v.map_or(f64::INFINITY, |v| (v - exact).norm() / exact.norm());
            worst = worst.max(dev);
        }
    }
    Check {
        name: "U(a,a+1,z) = z^-a",
        max_dev: worst,
        tol: 1e-12,
        samples: 2 * cases.len(),
    }
}

/// `P E' - P' E` against its closed form, relative.
pub fn wronskian_identity() -> Check {
    let bases = [ProfileParams::nls(1, 2.3, 0.85311), ProfileParams::nls(3, 1.0, 0.91737)];
    let mut worst = 0.0f64;
    let mut samples = 0;
    for base in bases {
        for eps in [0.0, 0.05, 0.2] {
            for xi in [2.0, 5.0, 30.0] {
                let dev = fundamental_pair(&base.with_eps(eps), xi).map_or(f64::INFINITY, |f| {
                    (f.p * f.e_prime - f.p_prime * f.e - f.w).norm() / f.w.norm()
                });
                worst = worst.max(dev);
                samples += 1;
            }
        }
    }
    Check {
        name: "Wronskian closed form",
        max_dev: worst,
        tol: 1e-8,
        samples,
    }
}

/// Quadrature against the truncated asymptotic series at `|z| ≥ 20`, in units
/// of the series remainder bound (pass when `≤ 1`).
pub fn series_agreement() -> Check {
    let cases = [
        (c(0.5, 0.0), c(0.5, 0.0), c(20.0, 0.0)),
        (c(0.2174, -0.59), c(0.5, 0.0), c(0.0, -20.0)),
        (c(0.5, 0.5), c(1.5, 0.0), c(0.0, -40.0)),
        (c(0.3, 0.8), c(1.5, 0.0), c(15.0, -15.0)),
        (c(1.2, -0.3), c(0.5, 0.0), c(30.0, 0.0)),
    ];
    let mut worst = 0.0f64;
    let mut samples = 0;
    for (a, b, z) in cases {
        let args = KummerArgs::new(a, b, z);
        let factor = series_bound_factor(args).unwrap_or(f64::NAN);
        let q = kummer_u_quadrature(args, 1e-14);
        for n in [4, 8, 12] {
            let (s, omitted) = kummer_u_series(args, n);
            let dev = q.as_ref().map_or(f64::INFINITY, |q| (q - s).norm() / (factor * omitted));
            worst = worst.max(if dev.is_nan() { f64::INFINITY } else { dev });
            samples += 1;
        }
    }
    Check {
        name: "quadrature vs series (|z| >= 20)",
        max_dev: worst,
        tol: 1.0,
        samples,
    }
}

pub fn all() -> Vec<Check> {
    vec![power_identity(), wronskian_identity(), series_agreement()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        for ch in all() {
            assert!(ch.pass(), "{ch:?}");
        }
    }

    #[test]
    fn bound_factor_tends_to_two() {
        let far = series_bound_factor(KummerArgs::new(c(0.5, 0.0), c(1.0, 0.0), c(1e6, 0.0))).unwrap();
        assert!((far - 2.0).abs() < 1e-5);
        assert!(series_bound_factor(KummerArgs::new(c(0.5, 0.0), c(1.0, 0.0), c(-20.0, 1.0))).is_none());
        assert!(series_bound_factor(KummerArgs::new(c(5.0, 0.0), c(1.0, 0.0), c(2.0, 0.0))).is_none());
    }

    #[test]
    fn a_wrong_series_is_caught() {
        // dropping one term leaves a deviation of about one term, well inside the
        // bound, while dropping the leading term must fail
        let args = KummerArgs::new(c(0.5, 0.5), c(1.5, 0.0), c(0.0, -40.0));
        let q = kummer_u_quadrature(args, 1e-14).unwrap();
        let (s, omitted) = kummer_u_series(args, 4);
        let lead = (-args.a * args.z.ln()).exp();
        let f = series_bound_factor(args).unwrap();
        assert!((q - (s - lead)).norm() / (f * omitted) > 1.0);
    }
}
