//! Boundary residual at `ξ₁`, Newton for the two real unknowns, root location
//! by topological degree, and the two normalizations of the scaling symmetry.
//!
//! The residual asks the integrated solution to follow the decaying far-field
//! series at `ξ₁`. When `ε > 0` the rejected mode grows like
//! `exp(κεξ²/(2(1+ε²)))`, so forward integration to `ξ₁` amplifies every
//! deviation from a root by that factor. The residual is then formed at an
//! interior match point `ξm`: the far-field data at `ξ₁` is carried inward
//! (where the growing mode decays) and compared with the forward solution. For
//! `ξm = ξ₁` this is exactly `ξ₁ (Q' - (F'/F) Q) / max(1, |Q|)`.
//!
//! Small `κ` needs the same treatment for a different reason: on the core
//! region `κξ < 2√ω` the linearization about `Q ≈ 0` has a mode growing like
//! `exp(∫ √(ω - κ²ξ²/4) dξ)`, up to `exp(πω/(2κ))` in total, and the forward
//! leg is stopped once that growth reaches `exp(G_core)`.
//!
//! Near a root the residual is dominated by the rejected mode, whose phase
//! turns like `κξ²/2`. Newton and the degree scans work on the residual times
//! the conjugate unit phase of that mode at `ξm` ([`Shot::demodulated`]): same
//! modulus, same zeros, same winding numbers, but a slowly varying argument.

mod degree;
mod morphology;

pub use degree::{
    locate_roots, locate_roots_with, winding_degree, winding_degree_field, DegreeOptions, LocateReport, Rect, ResidualField,
    MU_FLOOR,
};
pub use morphology::{maxima_locations, profile_maxima_count, PLATEAU_TOL};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{self, integrate_ivp, Node, ProfileTrajectory, DEFAULT_XI0};
use crate::params::ProfileParams;
use crate::special::fundamental::kummer_map;
use crate::special::log_derivative_matching;

pub const DEFAULT_XI1: f64 = 30.0;
pub const DEFAULT_N_TERMS: usize = 2;
pub const DEFAULT_NEWTON_TOL: f64 = 1e-8;
/// Admissible amplification `exp(G)` of the growing mode before the match point.
pub const DEFAULT_MATCH_GROWTH: f64 = 1.5;
/// Admissible growth `exp(G_core)` of the core-region mode before the match point.
pub const DEFAULT_CORE_GROWTH: f64 = 4.0;
const MIN_MATCH_POINT: f64 = 2.0;
/// Slope of the continuous ramp from the core limit up to `ξ₁`.
const CORE_RAMP: f64 = 30.0;
/// Fraction of the peak amplitude marking the edge of the profile bulk.
const CORE_LEVEL: f64 = 0.25;

/// Which member of the scaling orbit is solved for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// `ω = 1`, unknowns `(μ, κ)`.
    FixOmega,
    /// `Q(0) = 1`, unknowns `(κ, ω)`.
    FixAmplitude,
}

/// Discretization of the boundary-value problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingConfig {
    pub xi1: f64,
    pub n_terms: usize,
    /// Local tolerance of the integrator.
    pub tol: f64,
    pub match_growth: f64,
    pub core_growth: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            xi1: DEFAULT_XI1,
            n_terms: DEFAULT_N_TERMS,
            tol: integrator::DEFAULT_TOL,
            match_growth: DEFAULT_MATCH_GROWTH,
            core_growth: DEFAULT_CORE_GROWTH,
        }
    }
}

impl ShootingConfig {
    pub fn with_xi1(mut self, xi1: f64) -> Self {
        self.xi1 = xi1;
        self
    }

    pub fn with_n_terms(mut self, n_terms: usize) -> Self {
        self.n_terms = n_terms;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xi1 >= 10.0) || !self.xi1.is_finite() {
            return Err(Error::InvalidParameter(format!("xi1 = {} must be >= 10", self.xi1)));
        }
        if !(1..=2).contains(&self.n_terms) {
            return Err(Error::InvalidParameter(format!("n_terms = {} not in {{1, 2}}", self.n_terms)));
        }
        if !(self.match_growth > 0.0) || !(self.core_growth > 0.0) {
            return Err(Error::InvalidParameter("match growth limits must be positive".into()));
        }
        Ok(())
    }

    /// Match point: `ξ₁`, or earlier once either growing mode would exceed its limit.
    ///
    /// This is the a priori value with the core growth counted from the
    /// origin; [`shoot`] counts it from where the profile leaves its bulk.
    pub fn match_point(&self, params: &ProfileParams) -> f64 {
        self.match_point_from(params, 0.0)
    }

    /// Match point with the core growth counted from `xi_bulk`.
    pub fn match_point_from(&self, params: &ProfileParams, xi_bulk: f64) -> f64 {
        let mut xi_m = self.xi1;
        if params.eps > 0.0 {
            let reach = (2.0 * self.match_growth * (1.0 + params.eps * params.eps) / (params.kappa * params.eps)).sqrt();
            xi_m = xi_m.min(reach);
        }
        if params.omega > 0.0 {
            xi_m = xi_m.min(core_reach(params.kappa, params.omega, self.core_growth, xi_bulk));
        }
        xi_m.max(MIN_MATCH_POINT.min(self.xi1))
    }
}

/// `ξ` where `∫_{ξb}^ξ √(ω - κ²t²/4) dt` reaches `g`. When the turning point
/// `2√ω/κ` comes first a linear ramp past it keeps the result continuous.
fn core_reach(kappa: f64, omega: f64, g: f64, xi_bulk: f64) -> f64 {
    let turn = 2.0 * omega.sqrt() / kappa;
    let integral = |xi: f64| {
        let u = (xi / turn).min(1.0);
        omega / kappa * (u * (1.0 - u * u).sqrt() + u.asin())
    };
    let start = integral(xi_bulk);
    let remaining = integral(turn) - start;
    if remaining <= g {
        return turn.max(xi_bulk) + CORE_RAMP * (g - remaining);
    }
    let (mut lo, mut hi) = (xi_bulk, turn);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if integral(mid) - start < g {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Last `ξ` where `|Q|` is still at `CORE_LEVEL` of its running peak.
fn bulk_edge(traj: &ProfileTrajectory) -> f64 {
    let peak = traj.nodes.iter().map(|n| n.q.norm()).fold(traj.mu.norm(), f64::max);
    let level = CORE_LEVEL * peak;
    let Some(k) = traj.nodes.iter().rposition(|n| n.q.norm() >= level) else {
        return 0.0;
    };
    if k + 1 == traj.nodes.len() {
        return traj.nodes[k].xi;
    }
    // bisect on the interpolant so the edge moves continuously with the parameters
    let (mut lo, mut hi) = (traj.nodes[k].xi, traj.nodes[k + 1].xi);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        match traj.sample(mid) {
            Ok((q, _)) if q.norm() >= level => lo = mid,
            _ => hi = mid,
        }
    }
    0.5 * (lo + hi)
}

/// A solved root of the boundary-value problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootPoint {
    pub params: ProfileParams,
    /// `Q(0)`, real and positive.
    pub mu: f64,
    pub normalization: Normalization,
    pub residual_norm: f64,
    pub xi1: f64,
    pub n_terms: usize,
    /// Number of local maxima of `|Q|`; 0 when not assigned.
    pub branch_index: usize,
    pub iterations: usize,
}

impl RootPoint {
    /// `(x0, x1)` in the unknown plane of its normalization.
    pub fn unknowns(&self) -> (f64, f64) {
        match self.normalization {
            Normalization::FixOmega => (self.mu, self.params.kappa),
            Normalization::FixAmplitude => (self.params.kappa, self.params.omega),
        }
    }

    pub fn config(&self, base: &ShootingConfig) -> ShootingConfig {
        ShootingConfig {
            xi1: self.xi1,
            n_terms: self.n_terms,
            ..*base
        }
    }
}

/// Result of one shot: the residual and the pieces of the profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Shot {
    pub residual: Complex64,
    /// Unit phase removing the rotation of the rejected mode.
    pub phase: Complex64,
    pub xi_match: f64,
    pub forward: ProfileTrajectory,
    /// Inward solution on `[ξm, ξ₁]` carrying the far-field data; empty when `ξm = ξ₁`.
    pub inward: Vec<Node>,
    /// `Q(ξ₁)` of the composite profile.
    pub q_xi1: Complex64,
}

impl Shot {
    pub fn demodulated(&self) -> Complex64 {
        self.residual * self.phase
    }

    /// Nodes of the composite profile on `[ξ₀, ξ₁]`.
    pub fn profile_nodes(&self) -> Vec<Node> {
        let mut nodes = self.forward.nodes.clone();
        if self.inward.len() > 1 {
            nodes.pop();
            nodes.extend_from_slice(&self.inward);
        }
        nodes
    }

    pub fn profile(&self) -> ProfileTrajectory {
        ProfileTrajectory {
            nodes: self.profile_nodes(),
            xi_end: self.inward.last().map_or(self.forward.xi_end, |n| n.xi),
            ..self.forward.clone()
        }
    }
}

fn residual_scale(q: Complex64) -> f64 {
    q.norm().max(1.0)
}

/// Conjugate phase of the leading behaviour `e^z (-z)^{a-b}` of the growing
/// Kummer solution at `ξ`.
fn growing_mode_phase(params: &ProfileParams, xi: f64) -> Complex64 {
    let (a, b, z, _) = kummer_map(params, xi);
    let lead = z + (a - b) * (-z).ln();
    Complex64::from_polar(1.0, -lead.im)
}

/// Integrates the far-field data `(β, β F'/F)` from `ξ₁` inward to `ξm`.
fn inward(params: &ProfileParams, beta: Complex64, cfg: &ShootingConfig, xi_m: f64) -> Result<Vec<Node>> {
    let ld = log_derivative_matching(params, beta, cfg.xi1, cfg.n_terms)?;
    integrate_ivp(params, cfg.xi1, beta, beta * ld, xi_m, cfg.tol)
}

/// Target amplitude below which the inward map is treated as nearly linear.
const LINEAR_AMPLITUDE: f64 = 0.05;

/// Finds `β = Q(ξ₁)` such that the inward solution hits `target` at `ξm`.
///
/// With a large target the map `β -> Q_in(ξm)` has several preimages, so the
/// target is approached by doubling from a small amplitude and `β` follows the
/// preimage connected to the linear one.
fn match_inward(params: &ProfileParams, target: Complex64, cfg: &ShootingConfig, xi_m: f64) -> Result<Vec<Node>> {
    // the far field is nearly linear in β at small amplitude, so a tiny probe
    // gives the transfer factor to ξm
    let alpha = params.decay_exponent();
    let power = target * (alpha * (xi_m / cfg.xi1).ln()).exp();
    let probe = 1e-8 * power;
    let transfer = match inward(params, probe, cfg, xi_m) {
        Ok(n) if n[0].q.norm() > 0.0 => n[0].q / probe,
        _ => target / power,
    };
    let mut s = (LINEAR_AMPLITUDE / target.norm()).min(1.0);
    let mut beta = s * target / transfer;
    loop {
        let (b, nodes) = refine_beta(params, s * target, beta, cfg, xi_m)?;
        if s == 1.0 {
            return Ok(nodes);
        }
        let next = (2.0 * s).min(1.0);
        beta = b * (next / s);
        s = next;
    }
}

/// Damped Newton on `β` for the inward solve.
fn refine_beta(
    params: &ProfileParams,
    target: Complex64,
    mut beta: Complex64,
    cfg: &ShootingConfig,
    xi_m: f64,
) -> Result<(Complex64, Vec<Node>)> {
    let scale = target.norm();
    let mut nodes = inward(params, beta, cfg, xi_m)?;
    for _ in 0..30 {
        let g = nodes[0].q - target;
        if g.norm() <= 1e-14 * scale {
            return Ok((beta, nodes));
        }
        let h = 1e-7 * beta.norm().max(1e-300);
        let gr = inward(params, beta + h, cfg, xi_m)?[0].q - nodes[0].q;
        let gi = inward(params, beta + Complex64::new(0.0, h), cfg, xi_m)?[0].q - nodes[0].q;
        let (a, b, c, d) = (gr.re / h, gi.re / h, gr.im / h, gi.im / h);
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Degenerate { x0: beta.re, x1: beta.im });
        }
        let step = Complex64::new((d * g.re - b * g.im) / det, (-c * g.re + a * g.im) / det);
        // halve until the inward solve survives and the mismatch drops
        let mut lambda = 1.0;
        let accepted = loop {
            let trial = beta - lambda * step;
            if let Ok(n) = inward(params, trial, cfg, xi_m) {
                if (n[0].q - target).norm() < g.norm() {
                    break Some((trial, n));
                }
            }
            lambda *= 0.5;
            if lambda < 1e-3 {
                break None;
            }
        };
        let Some((trial, n)) = accepted else {
            break;
        };
        beta = trial;
        nodes = n;
        if lambda * step.norm() <= 1e-15 * beta.norm() {
            return Ok((beta, nodes));
        }
    }
    let g = (nodes[0].q - target).norm();
    if g <= 1e-10 * scale {
        Ok((beta, nodes))
    } else {
        Err(Error::Divergence {
            iterations: 30,
            x0: beta.re,
            x1: beta.im,
            residual: g,
        })
    }
}

/// Shoots from the origin with `Q(0) = μ` and forms the boundary residual.
pub fn shoot(params: &ProfileParams, mu: Complex64, cfg: &ShootingConfig) -> Result<Shot> {
    cfg.validate()?;
    // the forward leg is extended until the match point, counted from the
    // bulk edge of what has been integrated so far, stops moving
    let mut xi_m = cfg.match_point(params);
    let mut forward = integrator::integrate_from(params, mu, DEFAULT_XI0, xi_m, cfg.tol)?;
    let mut edge = 0.0;
    for _ in 0..8 {
        let e = bulk_edge(&forward).max(edge);
        if e <= edge {
            break;
        }
        edge = e;
        let next = cfg.match_point_from(params, edge);
        if next <= xi_m {
            break;
        }
        let tail = *forward.last();
        let more = integrator::integrate_ivp(params, tail.xi, tail.q, tail.q_prime, next, cfg.tol)?;
        forward.nodes.extend(more.into_iter().skip(1));
        forward.xi_end = next;
        xi_m = next;
    }
    let end = *forward.last();
    let phase = growing_mode_phase(params, xi_m);
    if xi_m >= cfg.xi1 {
        let ld = log_derivative_matching(params, end.q, cfg.xi1, cfg.n_terms)?;
        let residual = cfg.xi1 * (end.q_prime - ld * end.q) / residual_scale(end.q);
        return Ok(Shot {
            residual,
            phase,
            xi_match: xi_m,
            forward,
            inward: Vec::new(),
            q_xi1: end.q,
        });
    }
    if end.q.norm() == 0.0 {
        return Ok(Shot {
            residual: Complex64::new(0.0, 0.0),
            phase,
            xi_match: xi_m,
            forward,
            inward: Vec::new(),
            q_xi1: Complex64::new(0.0, 0.0),
        });
    }
    let inner = match_inward(params, end.q, cfg, xi_m)?;
    let residual = xi_m * (end.q_prime - inner[0].q_prime) / residual_scale(end.q);
    let q_xi1 = inner.last().map_or(end.q, |n| n.q);
    Ok(Shot {
        residual,
        phase,
        xi_match: xi_m,
        forward,
        inward: inner,
        q_xi1,
    })
}

/// Boundary residual for `Q(0) = μ` (any normalization; `ω` is taken from `params`).
pub fn residual(params: &ProfileParams, mu: f64, xi1: f64, n_terms: usize, tol: f64) -> Result<Complex64> {
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!("mu = {mu} must be positive")));
    }
    let cfg = ShootingConfig {
        xi1,
        n_terms,
        tol,
        ..ShootingConfig::default()
    };
    Ok(shoot(params, Complex64::new(mu, 0.0), &cfg)?.residual)
}

/// Parameters and `μ` for a point `(x0, x1)` of the unknown plane.
pub fn unpack(normalization: Normalization, fixed: &ProfileParams, x: (f64, f64)) -> (ProfileParams, f64) {
    match normalization {
        Normalization::FixOmega => (fixed.with_kappa(x.1).with_omega(1.0), x.0),
        Normalization::FixAmplitude => (fixed.with_kappa(x.0).with_omega(x.1), 1.0),
    }
}

/// Demodulated residual as a function on the unknown plane.
pub fn plane_residual(
    normalization: Normalization,
    fixed: &ProfileParams,
    x: (f64, f64),
    cfg: &ShootingConfig,
) -> Result<Complex64> {
    let (p, mu) = unpack(normalization, fixed, x);
    if !(p.kappa > 0.0) || !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!("({}, {}) outside the admissible half-planes", x.0, x.1)));
    }
    Ok(shoot(&p, Complex64::new(mu, 0.0), cfg)?.demodulated())
}

/// Solves the real 2×2 system `J s = r`.
pub(crate) fn solve2(j: [[f64; 2]; 2], r: [f64; 2]) -> Option<[f64; 2]> {
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let scale = j.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(det.abs() > 1e-14 * scale * scale) || !det.is_finite() {
        return None;
    }
    Some([
        (j[1][1] * r[0] - j[0][1] * r[1]) / det,
        (j[0][0] * r[1] - j[1][0] * r[0]) / det,
    ])
}

/// Central-difference Jacobian of `(Re f, Im f)` with respect to `(x0, x1)`.
pub(crate) fn jacobian<F>(f: &F, x: (f64, f64)) -> Result<[[f64; 2]; 2]>
where
    F: Fn((f64, f64)) -> Result<Complex64>,
{
    let h0 = 1e-6 * (1.0 + x.0.abs());
    let h1 = 1e-6 * (1.0 + x.1.abs());
    let d0 = (f((x.0 + h0, x.1))? - f((x.0 - h0, x.1))?) / (2.0 * h0);
    let d1 = (f((x.0, x.1 + h1))? - f((x.0, x.1 - h1))?) / (2.0 * h1);
    Ok([[d0.re, d1.re], [d0.im, d1.im]])
}

/// Newton options shared by root polishing and the corrector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub step_tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_NEWTON_TOL,
            step_tol: 1e-10,
            max_iter: 50,
            max_halvings: 8,
        }
    }
}

/// Damped Newton on a residual of two real unknowns.
///
/// Returns the converged point, `|f|` there and the iteration count.
pub fn newton_2d<F>(f: F, guess: (f64, f64), opts: &NewtonOptions) -> Result<((f64, f64), f64, usize)>
where
    F: Fn((f64, f64)) -> Result<Complex64>,
{
    let mut x = guess;
    let mut fx = f(x)?;
    let mut norm = fx.norm();
    for it in 0..opts.max_iter {
        let j = jacobian(&f, x)?;
        let s = solve2(j, [fx.re, fx.im]).ok_or(Error::Degenerate { x0: x.0, x1: x.1 })?;
        let step = (s[0] * s[0] + s[1] * s[1]).sqrt();
        if norm <= opts.tol && step <= opts.step_tol {
            return Ok((x, norm, it));
        }
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial = (x.0 - lambda * s[0], x.1 - lambda * s[1]);
            if let Ok(ft) = f(trial) {
                if ft.norm() < norm || (ft.norm() <= opts.tol && lambda == 1.0) {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((trial, ft)) => {
                x = trial;
                fx = ft;
                norm = ft.norm();
                if norm <= opts.tol && lambda * step <= opts.step_tol {
                    return Ok((x, norm, it + 1));
                }
            }
            // |f| sits at the noise floor of the integrator
            None if norm <= opts.tol => return Ok((x, norm, it)),
            None => {
                return Err(Error::Divergence {
                    iterations: it,
                    x0: x.0,
                    x1: x.1,
                    residual: norm,
                })
            }
        }
    }
    if norm <= opts.tol {
        return Ok((x, norm, opts.max_iter));
    }
    Err(Error::Divergence {
        iterations: opts.max_iter,
        x0: x.0,
        x1: x.1,
        residual: norm,
    })
}

/// Newton polish of a guess in the unknown plane of `normalization`.
///
/// `fixed` supplies `d, σ, ε, δ`; its `κ, ω` are overwritten.
pub fn newton_root(
    guess: (f64, f64),
    normalization: Normalization,
    fixed: &ProfileParams,
    cfg: &ShootingConfig,
    tol: f64,
) -> Result<RootPoint> {
    cfg.validate()?;
    let opts = NewtonOptions { tol, ..NewtonOptions::default() };
    let f = |x: (f64, f64)| plane_residual(normalization, fixed, x, cfg);
    let (x, norm, iterations) = newton_2d(f, guess, &opts)?;
    let (params, mu) = unpack(normalization, fixed, x);
    if !(mu > 0.0) || !(params.kappa > 0.0) {
        return Err(Error::Divergence {
            iterations,
            x0: x.0,
            x1: x.1,
            residual: norm,
        });
    }
    Ok(RootPoint {
        params,
        mu,
        normalization,
        residual_norm: norm,
        xi1: cfg.xi1,
        n_terms: cfg.n_terms,
        branch_index: 0,
        iterations,
    })
}

/// Profile of a root on `[ξ₀, ξ₁]`.
pub fn root_profile(root: &RootPoint, cfg: &ShootingConfig) -> Result<ProfileTrajectory> {
    let cfg = root.config(cfg);
    Ok(shoot(&root.params, Complex64::new(root.mu, 0.0), &cfg)?.profile())
}

/// Fills `branch_index` with the maxima count of the root's profile.
pub fn assign_branch_index(mut root: RootPoint, cfg: &ShootingConfig) -> Result<RootPoint> {
    root.branch_index = profile_maxima_count(&root_profile(&root, cfg)?);
    Ok(root)
}

/// Moves a root along the scaling orbit
/// `(Q, κ, ω) → (λ^{1/σ} Q(λξ), λ²κ, λ²ω)` to the other normalization.
pub fn normalize_convert(root: &RootPoint, target: Normalization) -> RootPoint {
    let s = root.params.sigma;
    let mut out = *root;
    out.normalization = target;
    match (root.normalization, target) {
        (Normalization::FixOmega, Normalization::FixAmplitude) => {
            // λ = μ^{-σ}, so λ^{1/σ} μ = 1
            let l2 = root.mu.powf(-2.0 * s);
            out.params.kappa = l2 * root.params.kappa;
            out.params.omega = l2 * root.params.omega;
            out.mu = 1.0;
        }
        (Normalization::FixAmplitude, Normalization::FixOmega) => {
            // λ² = 1/ω
            let l2 = 1.0 / root.params.omega;
            out.params.kappa = l2 * root.params.kappa;
            out.params.omega = 1.0;
            out.mu = root.mu * l2.powf(0.5 / s);
        }
        _ => {}
    }
    out
}
