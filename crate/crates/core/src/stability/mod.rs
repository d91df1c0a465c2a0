//! Linearized stability of a profile in the radial subspace.
//!
//! Perturbing `v = e^{iω₀τ}(Q + w)` in the rescaled equation gives
//!
//! ```text
//! 𝓛w = (i+ε)Δw - κ₀(ξw' + w/σ) - iω₀w + (i-δ)[(1+σ)|Q|^{2σ}w + σ|Q|^{2σ-2}Q² w̄]
//! ```
//!
//! which is only real-linear, so it is discretized on `(Re w, Im w)`.
//! The symmetry modes `Y₁ = iQ` (eigenvalue 0) and
//! `Y₂ = ξQ' + (1/σ + iω₀/κ₀)Q` (eigenvalue `2κ₀`) are removed before the
//! rest of the spectrum is inspected.
//!
//! Grid: nodes `ξ_k = kh`, `k = 0..n-1`, `h = ξ₁/n`, central second-order
//! differences. The origin uses the even ghost node `w₋₁ = w₁`, and the node
//! at `ξ₁` is eliminated through a Robin closure `ξ₁w' + c w = 0` with a
//! one-sided second-order derivative. By default `c = -ξ₁Q'(ξ₁)/Q(ξ₁)`, the
//! profile's own log-derivative, which is `1/σ + iω₀/κ₀` at one-term order but
//! is satisfied exactly by `Y₁`; the one-term value is available as
//! [`Closure::OneTerm`].

pub mod eigen;

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::continuation::fmt17;
use crate::error::{Error, Result};
use crate::integrator::{ProfileTrajectory, DEFAULT_XI0};
use crate::params::ProfileParams;
use crate::shooting::{root_profile, RootPoint, ShootingConfig};

pub use eigen::{eigenvalues, eigenvector, DenseMatrix};

/// Half-width of the inconclusive band around the imaginary axis.
pub const DEFAULT_MARGIN: f64 = 1e-3;
pub const DEFAULT_GRID_N: usize = 600;
/// Minimum grid nodes per `2π` of profile phase.
const NODES_PER_TURN: f64 = 10.0;

/// Robin coefficient used at `ξ₁`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Closure {
    /// `1/σ + iω₀/κ₀`.
    OneTerm,
    /// `-ξ₁Q'(ξ₁)/Q(ξ₁)` from the profile.
    #[default]
    Profile,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizationGrid {
    pub n: usize,
    pub xi1: f64,
    pub h: f64,
    pub closure: Closure,
}

impl LinearizationGrid {
    pub fn new(n: usize, xi1: f64) -> Result<Self> {
        if n < 200 {
            return Err(Error::InvalidParameter(format!("grid n = {n} below 200")));
        }
        if !(xi1 > 0.0) {
            return Err(Error::InvalidParameter(format!("xi1 = {xi1} must be positive")));
        }
        Ok(LinearizationGrid {
            n,
            xi1,
            h: xi1 / n as f64,
            closure: Closure::default(),
        })
    }

    pub fn with_closure(mut self, closure: Closure) -> Self {
        self.closure = closure;
        self
    }

    pub fn xi(&self, k: usize) -> f64 {
        k as f64 * self.h
    }
}

/// `(Q, Q')` at the grid nodes (origin from the regular expansion).
fn profile_on_grid(traj: &ProfileTrajectory, grid: &LinearizationGrid) -> Result<Vec<(Complex64, Complex64)>> {
    if traj.last().xi < grid.xi1 * (1.0 - 1e-12) {
        return Err(Error::Range {
            xi: grid.xi1,
            lo: traj.xi_start(),
            hi: traj.last().xi,
        });
    }
    (0..grid.n)
        .map(|k| {
            let xi = grid.xi(k);
            if xi < DEFAULT_XI0 {
                Ok((traj.mu, Complex64::new(0.0, 0.0)))
            } else {
                traj.sample(xi.min(traj.last().xi))
            }
        })
        .collect()
}

/// `Y₁ = iQ` and `Y₂ = ξQ' + (1/σ + iω₀/κ₀)Q` at the grid nodes.
pub fn symmetry_modes(
    traj: &ProfileTrajectory,
    params: &ProfileParams,
    grid: &LinearizationGrid,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let c = Complex64::new(1.0 / params.sigma, params.omega / params.kappa);
    let qs = profile_on_grid(traj, grid)?;
    let y1 = qs.iter().map(|(q, _)| Complex64::i() * q).collect();
    let y2 = qs.iter().enumerate().map(|(k, (q, dq))| grid.xi(k) * dq + c * q).collect();
    Ok((y1, y2))
}

/// Stacks a complex grid function as `(Re; Im)`.
pub fn to_real(mode: &[Complex64]) -> Vec<f64> {
    mode.iter().map(|z| z.re).chain(mode.iter().map(|z| z.im)).collect()
}

/// Real `2n × 2n` matrix of the discretized linearization.
pub fn assemble(traj: &ProfileTrajectory, params: &ProfileParams, grid: &LinearizationGrid) -> Result<DenseMatrix> {
    let qs = profile_on_grid(traj, grid)?;
    // resolution: the profile phase may turn by at most 2π/10 per cell
    let mut worst: f64 = 0.0;
    for w in qs.windows(2) {
        if w[0].0.norm() > 0.0 && w[1].0.norm() > 0.0 {
            worst = worst.max((w[1].0 / w[0].0).arg().abs());
        }
    }
    if worst > 2.0 * std::f64::consts::PI / NODES_PER_TURN {
        return Err(Error::Resolution(format!(
            "profile phase turns {worst:.3} rad per cell at n = {}",
            grid.n
        )));
    }

    let n = grid.n;
    let h = grid.h;
    let (d, s, k0, w0) = (params.d as f64, params.sigma, params.kappa, params.omega);
    let diff = Complex64::new(params.eps, 1.0);
    let react = Complex64::new(-params.delta, 1.0) * params.nonlinearity;
    let robin = match grid.closure {
        Closure::OneTerm => Complex64::new(1.0 / s, w0 / k0),
        Closure::Profile => {
            let (q, dq) = traj.sample(grid.xi1.min(traj.last().xi))?;
            if q.norm() == 0.0 {
                Complex64::new(1.0 / s, w0 / k0)
            } else {
                -grid.xi1 * dq / q
            }
        }
    };
    // w_n = alpha (4 w_{n-1} - w_{n-2})
    let alpha = 1.0 / (3.0 + 2.0 * h * robin / grid.xi1);

    let mut m = DenseMatrix::zeros(2 * n);
    // complex coefficient a on w_j in row k
    let put = |m: &mut DenseMatrix, k: usize, j: usize, a: Complex64| {
        m.add(k, j, a.re);
        m.add(k, n + j, -a.im);
        m.add(n + k, j, a.im);
        m.add(n + k, n + j, a.re);
    };
    for k in 0..n {
        let xi = grid.xi(k);
        let (q, _) = qs[k];
        let amp2 = q.norm_sqr();
        let pow = if amp2 > 0.0 { amp2.powf(s) } else { 0.0 };
        let diag = -k0 / s - Complex64::new(0.0, w0) + react * (1.0 + s) * pow;
        let mut coef = Vec::with_capacity(3);
        if k == 0 {
            // even ghost: Δw(0) = d w''(0) = 2d (w₁ - w₀)/h²
            coef.push((0, diff * (-2.0 * d / (h * h)) + diag));
            coef.push((1, diff * (2.0 * d / (h * h))));
        } else {
            let lap_m = 1.0 / (h * h) - (d - 1.0) / (2.0 * h * xi);
            let lap_p = 1.0 / (h * h) + (d - 1.0) / (2.0 * h * xi);
            let adv = -k0 * xi / (2.0 * h);
            coef.push((k - 1, diff * lap_m - adv));
            coef.push((k, diff * (-2.0 / (h * h)) + diag));
            coef.push((k + 1, diff * lap_p + adv));
        }
        for (j, a) in coef {
            if j == n {
                put(&mut m, k, n - 1, a * alpha * 4.0);
                put(&mut m, k, n - 2, -a * alpha);
            } else {
                put(&mut m, k, j, a);
            }
        }
        // b w̄ with b = (i-δ) σ |Q|^{2σ-2} Q²
        if amp2 > 0.0 {
            let b = react * s * amp2.powf(s - 1.0) * q * q;
            m.add(k, k, b.re);
            m.add(k, n + k, b.im);
            m.add(n + k, k, b.im);
            m.add(n + k, n + k, -b.re);
        }
    }
    Ok(m)
}

/// `‖Mv - λv‖₂ / ‖v‖₂`.
///
/// `v` is either real of length `M.n` (then `λ` must be real) or a complex
/// vector stacked as `(Re; Im)` of length `2 M.n`.
pub fn mode_residual(m: &DenseMatrix, v: &[f64], lambda: (f64, f64)) -> Result<f64> {
    let n = m.n;
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Domain("zero mode".into()));
    }
    let (lr, li) = lambda;
    let r2 = if v.len() == n {
        if li != 0.0 {
            return Err(Error::Domain("complex eigenvalue needs a complex mode".into()));
        }
        let mv = m.mul_vec(v);
        mv.iter().zip(v).map(|(a, b)| (a - lr * b).powi(2)).sum::<f64>()
    } else if v.len() == 2 * n {
        let (re, im) = v.split_at(n);
        let (mr, mi) = (m.mul_vec(re), m.mul_vec(im));
        (0..n)
            .map(|k| (mr[k] - lr * re[k] + li * im[k]).powi(2) + (mi[k] - lr * im[k] - li * re[k]).powi(2))
            .sum()
    } else {
        return Err(Error::InvalidParameter(format!("mode length {} does not fit {n} rows", v.len())));
    };
    Ok(r2.sqrt() / norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub kappa0: f64,
    /// Eigenvalues taken as `0` and `2κ₀`.
    pub symmetry_pair: (Complex64, Complex64),
    /// Their positions in `eigenvalues`.
    pub doublet_index: (usize, usize),
    /// `|λ₀|` and `|λ₂ - 2κ₀|`.
    pub doublet_error: (f64, f64),
    /// Distance from each doublet eigenvalue to the nearest other eigenvalue.
    pub separation: (f64, f64),
    /// `‖𝓛Y₁‖/‖Y₁‖` and `‖𝓛Y₂ - 2κ₀Y₂‖/‖Y₂‖` when the modes were available.
    pub residuals: Option<(f64, f64)>,
    pub max_real_rest: f64,
    pub margin: f64,
    pub verdict: Verdict,
}

/// Removes the symmetry doublet and judges the rest of the spectrum.
pub fn classify(eigs: &[Complex64], kappa0: f64, margin: f64) -> Result<Spectrum> {
    if eigs.len() < 3 {
        return Err(Error::InvalidParameter("need at least three eigenvalues".into()));
    }
    let nearest = |target: Complex64, skip: Option<usize>| {
        eigs.iter()
            .enumerate()
            .filter(|(k, _)| Some(*k) != skip)
            .map(|(k, z)| (k, (z - target).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty")
    };
    let zero = Complex64::new(0.0, 0.0);
    let two = Complex64::new(2.0 * kappa0, 0.0);
    let (i0, e0) = nearest(zero, None);
    let (i2, e2) = nearest(two, Some(i0));
    for (what, e) in [("0", e0), ("2 kappa0", e2)] {
        if e > 0.1 * kappa0 {
            return Err(Error::DoubletNotFound(format!("nearest eigenvalue to {what} is {e:.3e} away")));
        }
    }
    let sep = |i: usize| {
        eigs.iter()
            .enumerate()
            .filter(|(k, _)| *k != i)
            .map(|(_, z)| (z - eigs[i]).norm())
            .fold(f64::INFINITY, f64::min)
    };
    let max_real_rest = eigs
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != i0 && *k != i2)
        .map(|(_, z)| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let verdict = if max_real_rest < -margin {
        Verdict::Stable
    } else if max_real_rest > margin {
        Verdict::Unstable
    } else {
        Verdict::Inconclusive
    };
    Ok(Spectrum {
        eigenvalues: eigs.to_vec(),
        kappa0,
        symmetry_pair: (eigs[i0], eigs[i2]),
        doublet_index: (i0, i2),
        doublet_error: (e0, e2),
        separation: (sep(i0), sep(i2)),
        residuals: None,
        max_real_rest,
        margin,
        verdict,
    })
}

/// Spectrum and verdict for a converged root on an `n`-node grid over `[0, ξ₁]`.
pub fn analyze(root: &RootPoint, cfg: &ShootingConfig, n: usize, margin: f64) -> Result<Spectrum> {
    if root.residual_norm > 1e-6 {
        return Err(Error::Domain(format!("root residual {:.3e} above 1e-6", root.residual_norm)));
    }
    let traj = root_profile(root, cfg)?;
    let grid = LinearizationGrid::new(n, root.xi1)?;
    let m = assemble(&traj, &root.params, &grid)?;
    let mut spec = classify(&eigenvalues(&m)?, root.params.kappa, margin)?;
    let (y1, y2) = symmetry_modes(&traj, &root.params, &grid)?;
    spec.residuals = Some((
        mode_residual(&m, &to_real(&y1), (0.0, 0.0))?,
        mode_residual(&m, &to_real(&y2), (2.0 * root.params.kappa, 0.0))?,
    ));
    Ok(spec)
}

/// `re,im,is_doublet` lines with a header.
pub fn spectrum_csv(spec: &Spectrum) -> String {
    let mut out = String::from("re,im,is_doublet\n");
    for (k, z) in spec.eigenvalues.iter().enumerate() {
        let doublet = k == spec.doublet_index.0 || k == spec.doublet_index.1;
        let _ = writeln!(out, "{},{},{}", fmt17(z.re), fmt17(z.im), doublet);
    }
    out
}

/// One-line JSON verdict summary.
pub fn verdict_json(spec: &Spectrum, eps: f64, kappa: f64, mu: f64) -> String {
    let (l0, l2) = spec.symmetry_pair;
    format!(
        r#"{{"eps":{},"kappa":{},"mu":{},"lambda0_re":{},"lambda0_im":{},"lambda2k_re":{},"lambda2k_im":{},"max_real_rest":{},"verdict":"{}"}}"#,
        fmt17(eps),
        fmt17(kappa),
        fmt17(mu),
        fmt17(l0.re),
        fmt17(l0.im),
        fmt17(l2.re),
        fmt17(l2.im),
        fmt17(spec.max_real_rest),
        spec.verdict.as_str()
    )
}
