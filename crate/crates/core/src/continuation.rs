//! Pseudo-arclength continuation of roots in `(μ, κ, ε)` with `ω = 1`,
//! turning-point location and the branch file format.
//!
//! Arclength is measured in `(μ, κ, sε)` with `s = EPS_SCALE`; tangents are
//! unit vectors in those coordinates.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ProfileParams;
use crate::shooting::{
    maxima_locations, newton_root, plane_residual, profile_maxima_count, root_profile, Normalization, RootPoint,
    ShootingConfig,
};

pub const EPS_SCALE: f64 = 10.0;
pub const H_MIN: f64 = 1e-6;
pub const H_MAX: f64 = 0.05;
const GROWTH: f64 = 1.3;
const EASY_ITERATIONS: usize = 4;
const EASY_STREAK: usize = 3;
const MAX_CORRECTOR: usize = 12;

/// `δ` as a function of `ε` along a branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DeltaRule {
    Zero,
    /// `δ = r ε`
    Proportional(f64),
}

impl DeltaRule {
    pub fn delta(&self, eps: f64) -> f64 {
        match self {
            DeltaRule::Zero => 0.0,
            DeltaRule::Proportional(r) => r * eps,
        }
    }

    fn to_json(self) -> String {
        match self {
            DeltaRule::Zero => r#"{"kind":"zero"}"#.to_string(),
            DeltaRule::Proportional(r) => format!(r#"{{"kind":"proportional","r":{}}}"#, fmt17(r)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Unknown,
    Stable,
    Unstable,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Unknown => "unknown",
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "unknown" => Some(Stability::Unknown),
            "stable" => Some(Stability::Stable),
            "unstable" => Some(Stability::Unstable),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub eps: f64,
    pub mu: f64,
    pub kappa: f64,
    pub arclength: f64,
    /// Unit tangent in `(μ, κ, sε)`.
    pub tangent: [f64; 3],
    pub residual_norm: f64,
    pub stability: Stability,
    /// Step proposed for the next predictor.
    pub h_next: f64,
    /// Consecutive easy corrector solves so far.
    pub easy: usize,
}

impl BranchPoint {
    fn scaled(&self) -> [f64; 3] {
        [self.mu, self.kappa, EPS_SCALE * self.eps]
    }
}

/// When a trace ends early.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    /// Stop once `κ` drops below this.
    pub kappa_min: f64,
    /// Stop once the turning point is passed and `ε` has fallen to this
    /// fraction of its maximum.
    pub after_fold_fraction: Option<f64>,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            kappa_min: 0.01,
            after_fold_fraction: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StopReason {
    MaxPoints,
    EpsNegative,
    KappaBelow,
    PastFold,
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub index_j: usize,
    pub d: u32,
    pub sigma: f64,
    pub delta_rule: DeltaRule,
    pub xi1: f64,
    pub n_terms: usize,
    pub points: Vec<BranchPoint>,
    pub turning_point: Option<(f64, f64)>,
    pub stop: Option<StopReason>,
}

impl Branch {
    /// The branch, or the stall error if tracing gave up.
    pub fn check(&self) -> Result<&Branch> {
        match self.stop {
            Some(StopReason::Stalled) => Err(Error::Stall {
                arclength: self.points.last().map_or(0.0, |p| p.arclength),
                points: self.points.len(),
            }),
            _ => Ok(self),
        }
    }

    pub fn max_eps(&self) -> f64 {
        self.points.iter().map(|p| p.eps).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn params_at(&self, p: &BranchPoint) -> ProfileParams {
        ProfileParams::new(self.d, self.sigma, p.eps, self.delta_rule.delta(p.eps), p.kappa, 1.0)
    }

    pub fn root_at(&self, p: &BranchPoint) -> RootPoint {
        RootPoint {
            params: self.params_at(p),
            mu: p.mu,
            normalization: Normalization::FixOmega,
            residual_norm: p.residual_norm,
            xi1: self.xi1,
            n_terms: self.n_terms,
            branch_index: self.index_j,
            iterations: 0,
        }
    }
}

/// Continuation driver on the scaled unknowns.
struct Tracer<'a> {
    d: u32,
    sigma: f64,
    delta_rule: DeltaRule,
    cfg: &'a ShootingConfig,
    tol: f64,
}

type Jac = [[f64; 3]; 2];

impl Tracer<'_> {
    fn f(&self, y: [f64; 3]) -> Result<Complex64> {
        let eps = y[2] / EPS_SCALE;
        let fixed = ProfileParams::new(self.d, self.sigma, eps, self.delta_rule.delta(eps), 1.0, 1.0);
        plane_residual(Normalization::FixOmega, &fixed, (y[0], y[1]), self.cfg)
    }

    fn jacobian(&self, y: [f64; 3]) -> Result<Jac> {
        let mut j = [[0.0; 3]; 2];
        for k in 0..3 {
            let h = 1e-6 * (1.0 + y[k].abs());
            let (mut yp, mut ym) = (y, y);
            yp[k] += h;
            ym[k] -= h;
            let df = (self.f(yp)? - self.f(ym)?) / (2.0 * h);
            j[0][k] = df.re;
            j[1][k] = df.im;
        }
        Ok(j)
    }

    /// Unit null vector of the 2×3 Jacobian oriented along `reference`.
    fn tangent(j: &Jac, reference: [f64; 3]) -> Result<[f64; 3]> {
        let (a, b) = (j[0], j[1]);
        let t = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
        let n = norm3(t);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Degenerate { x0: 0.0, x1: 0.0 });
        }
        let sign = if dot3(t, reference) < 0.0 { -1.0 } else { 1.0 };
        Ok([sign * t[0] / n, sign * t[1] / n, sign * t[2] / n])
    }

    /// Chord Newton on `{f = 0, t·(y - y_pred) = 0}` with a fixed Jacobian.
    fn correct(&self, y_pred: [f64; 3], t: [f64; 3], j: &Jac) -> Option<([f64; 3], f64, usize)> {
        let m = [j[0], j[1], t];
        let mut y = y_pred;
        let mut prev_step = f64::INFINITY;
        for it in 0..=MAX_CORRECTOR {
            let f = self.f(y).ok()?;
            if prev_step <= 1e-7 && f.norm() <= self.tol {
                return Some((y, f.norm(), it));
            }
            if it == MAX_CORRECTOR {
                break;
            }
            let g = [f.re, f.im, dot3(t, sub3(y, y_pred))];
            let s = solve3(m, g)?;
            let step = norm3(s);
            if !step.is_finite() || step > 0.7 * prev_step && it > 2 {
                return None;
            }
            for k in 0..3 {
                y[k] -= s[k];
            }
            if y[0] <= 0.0 || y[1] <= 0.0 {
                return None;
            }
            prev_step = step;
        }
        None
    }
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

/// Gaussian elimination with partial pivoting.
fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> Option<[f64; 3]> {
    for c in 0..3 {
        let p = (c..3).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))?;
        if m[p][c] == 0.0 {
            return None;
        }
        m.swap(c, p);
        r.swap(c, p);
        for row in c + 1..3 {
            let f = m[row][c] / m[c][c];
            for k in c..3 {
                m[row][k] -= f * m[c][k];
            }
            r[row] -= f * r[c];
        }
    }
    let mut x = [0.0; 3];
    for c in (0..3).rev() {
        let s: f64 = (c + 1..3).map(|k| m[c][k] * x[k]).sum();
        x[c] = (r[c] - s) / m[c][c];
    }
    Some(x)
}

/// Options of one trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    pub h0: f64,
    pub max_points: usize,
    pub stop: StopRule,
    /// Corrector residual tolerance.
    pub tol: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            h0: 0.01,
            max_points: 400,
            stop: StopRule::default(),
            tol: 1e-8,
        }
    }
}

/// Traces the branch through `seed` (a root at `ε = 0`, `ω = 1`) towards increasing `ε`.
pub fn trace_branch(seed: &RootPoint, delta_rule: DeltaRule, cfg: &ShootingConfig, opts: &TraceOptions) -> Result<Branch> {
    if !(opts.h0 > 0.0) || !opts.h0.is_finite() {
        return Err(Error::InvalidParameter(format!("h0 = {} must be positive", opts.h0)));
    }
    if seed.normalization != Normalization::FixOmega || seed.params.eps != 0.0 {
        return Err(Error::InvalidParameter("seed must be an eps = 0 root with omega = 1".into()));
    }
    let cfg = seed.config(cfg);
    let tracer = Tracer {
        d: seed.params.d,
        sigma: seed.params.sigma,
        delta_rule,
        cfg: &cfg,
        tol: opts.tol,
    };
    let y0 = [seed.mu, seed.params.kappa, 0.0];
    let j = tracer.jacobian(y0)?;
    let t = Tracer::tangent(&j, [0.0, 0.0, 1.0])?;
    let index_j = if seed.branch_index > 0 {
        seed.branch_index
    } else {
        profile_maxima_count(&root_profile(seed, &cfg)?)
    };
    let mut branch = Branch {
        index_j,
        d: seed.params.d,
        sigma: seed.params.sigma,
        delta_rule,
        xi1: cfg.xi1,
        n_terms: cfg.n_terms,
        points: vec![BranchPoint {
            eps: 0.0,
            mu: seed.mu,
            kappa: seed.params.kappa,
            arclength: 0.0,
            tangent: t,
            residual_norm: tracer.f(y0)?.norm(),
            stability: Stability::Unknown,
            h_next: opts.h0.min(H_MAX),
            easy: 0,
        }],
        turning_point: None,
        stop: None,
    };
    extend(&tracer, &mut branch, Some(j), opts)?;
    Ok(branch)
}

/// Continues a (loaded) branch from its last point.
pub fn resume_branch(branch: &mut Branch, cfg: &ShootingConfig, opts: &TraceOptions) -> Result<()> {
    let cfg = ShootingConfig {
        xi1: branch.xi1,
        n_terms: branch.n_terms,
        ..*cfg
    };
    let tracer = Tracer {
        d: branch.d,
        sigma: branch.sigma,
        delta_rule: branch.delta_rule,
        cfg: &cfg,
        tol: opts.tol,
    };
    branch.stop = None;
    extend(&tracer, branch, None, opts)
}

fn extend(tracer: &Tracer, branch: &mut Branch, mut jac: Option<Jac>, opts: &TraceOptions) -> Result<()> {
    let mut last = *branch.points.last().ok_or(Error::InvalidParameter("empty branch".into()))?;
    let mut j = match jac.take() {
        Some(j) => j,
        None => tracer.jacobian(last.scaled())?,
    };
    let mut eps_max = branch.max_eps();
    while branch.points.len() < opts.max_points {
        let y = last.scaled();
        let mut h = last.h_next;
        // a point only counts once its Jacobian and tangent are available too
        let solved = loop {
            let y_pred = [y[0] + h * last.tangent[0], y[1] + h * last.tangent[1], y[2] + h * last.tangent[2]];
            if let Some((y_new, res, iterations)) = tracer.correct(y_pred, last.tangent, &j) {
                if let Ok(j_new) = tracer.jacobian(y_new) {
                    if let Ok(t_new) = Tracer::tangent(&j_new, last.tangent) {
                        break Some((y_new, res, iterations, j_new, t_new));
                    }
                }
            }
            h *= 0.5;
            if h < H_MIN {
                break None;
            }
        };
        let Some((y_new, res, iterations, j_new, t_new)) = solved else {
            branch.stop = Some(StopReason::Stalled);
            break;
        };
        let easy = if iterations <= EASY_ITERATIONS { last.easy + 1 } else { 0 };
        let (h_next, easy) = if easy >= EASY_STREAK {
            ((h * GROWTH).min(H_MAX), 0)
        } else {
            (h, easy)
        };
        let point = BranchPoint {
            eps: y_new[2] / EPS_SCALE,
            mu: y_new[0],
            kappa: y_new[1],
            arclength: last.arclength + norm3(sub3(y_new, y)),
            tangent: t_new,
            residual_norm: res,
            stability: Stability::Unknown,
            h_next,
            easy,
        };
        branch.points.push(point);
        eps_max = eps_max.max(point.eps);
        last = point;
        j = j_new;
        if point.eps < 0.0 {
            branch.stop = Some(StopReason::EpsNegative);
            break;
        }
        if point.kappa < opts.stop.kappa_min {
            branch.stop = Some(StopReason::KappaBelow);
            break;
        }
        if let Some(frac) = opts.stop.after_fold_fraction {
            if point.tangent[2] < 0.0 && point.eps <= frac * eps_max {
                branch.stop = Some(StopReason::PastFold);
                break;
            }
        }
    }
    if branch.stop.is_none() {
        branch.stop = Some(StopReason::MaxPoints);
    }
    if branch.points.len() >= 3 {
        let cfg = tracer.cfg;
        branch.turning_point = detect_turning_point(branch, cfg, opts.tol)?;
    }
    Ok(())
}

/// Fold `(ε*, s*)` where the `ε`-component of the tangent changes sign.
///
/// The sign change is bracketed between stored points and refined by secant
/// iteration on arclength, each trial point corrected from the bracket start.
pub fn detect_turning_point(branch: &Branch, cfg: &ShootingConfig, tol: f64) -> Result<Option<(f64, f64)>> {
    let Some(k) = branch
        .points
        .windows(2)
        .position(|w| w[0].tangent[2] > 0.0 && w[1].tangent[2] <= 0.0)
    else {
        return Ok(None);
    };
    let (a, b) = (branch.points[k], branch.points[k + 1]);
    let cfg = ShootingConfig {
        xi1: branch.xi1,
        n_terms: branch.n_terms,
        ..*cfg
    };
    let tracer = Tracer {
        d: branch.d,
        sigma: branch.sigma,
        delta_rule: branch.delta_rule,
        cfg: &cfg,
        tol,
    };
    let ya = a.scaled();
    let ja = tracer.jacobian(ya)?;
    // point and tangent ε-component at distance `h` from `a` along the chord predictor
    let probe = |h: f64| -> Option<([f64; 3], f64)> {
        let y_pred = [ya[0] + h * a.tangent[0], ya[1] + h * a.tangent[1], ya[2] + h * a.tangent[2]];
        let (y, _, _) = tracer.correct(y_pred, a.tangent, &ja)?;
        let t = Tracer::tangent(&tracer.jacobian(y).ok()?, a.tangent).ok()?;
        Some((y, t[2]))
    };
    let h_b = dot3(sub3(b.scaled(), ya), a.tangent);
    let (mut h0, mut g0) = (0.0, a.tangent[2]);
    let (mut h1, mut g1) = (h_b, b.tangent[2]);
    let mut best = if g0.abs() < g1.abs() {
        (ya, a.arclength)
    } else {
        (b.scaled(), b.arclength)
    };
    for _ in 0..30 {
        if g1 == g0 {
            break;
        }
        // secant, kept inside the bracket
        let mut h = h1 - g1 * (h1 - h0) / (g1 - g0);
        let (lo, hi) = (h0.min(h1), h0.max(h1));
        if !(h > lo && h < hi) {
            h = 0.5 * (h0 + h1);
        }
        let Some((y, g)) = probe(h) else { break };
        best = (y, a.arclength + norm3(sub3(y, ya)));
        if g.abs() < 1e-10 || (h - h1).abs() < 1e-12 {
            break;
        }
        if g.signum() == g0.signum() {
            (h0, g0) = (h, g);
        } else {
            (h1, g1) = (h, g);
        }
    }
    Ok(Some((best.0[2] / EPS_SCALE, best.1)))
}

/// Small-`κ` end of a branch.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointReport {
    pub regime_reached: bool,
    pub kappa_end: f64,
    pub mu_end: f64,
    pub maxima_count: usize,
    /// `ξ`-locations of the interior maxima of `|Q|` at the end point.
    pub maxima_xi: Vec<f64>,
    /// Interior maxima locations at each of the last (up to) 10 points.
    pub maxima_history: Vec<Vec<f64>>,
    /// `μ` along the last (up to) 10 points.
    pub mu_trend: Vec<f64>,
}

pub fn branch_endpoint_diagnostics(branch: &Branch, cfg: &ShootingConfig) -> Result<EndpointReport> {
    let last = branch.points.last().ok_or(Error::InvalidParameter("empty branch".into()))?;
    let tail = &branch.points[branch.points.len().saturating_sub(10)..];
    let mut maxima_history = Vec::with_capacity(tail.len());
    for p in tail {
        let prof = root_profile(&branch.root_at(p), cfg)?;
        maxima_history.push(maxima_locations(&prof));
    }
    let end_profile = root_profile(&branch.root_at(last), cfg)?;
    Ok(EndpointReport {
        regime_reached: last.kappa < 0.05,
        kappa_end: last.kappa,
        mu_end: last.mu,
        maxima_count: profile_maxima_count(&end_profile),
        maxima_xi: maxima_history.last().cloned().unwrap_or_default(),
        maxima_history,
        mu_trend: tail.iter().map(|p| p.mu).collect(),
    })
}

/// Seeds the branch through an `ε = 0` guess by Newton.
pub fn seed_root(d: u32, sigma: f64, guess: (f64, f64), cfg: &ShootingConfig) -> Result<RootPoint> {
    let fixed = ProfileParams::nls(d, sigma, 1.0);
    let root = newton_root(guess, Normalization::FixOmega, &fixed, cfg, 1e-10)?;
    crate::shooting::assign_branch_index(root, cfg)
}

/// Decimal with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    format!("{:.16e}", x)
}

fn header_line(b: &Branch) -> String {
    format!(
        r#"{{"index_j":{},"d":{},"sigma":{},"delta_rule":{},"xi1":{},"n_terms":{},"scaling":{{"eps":{}}}}}"#,
        b.index_j,
        b.d,
        fmt17(b.sigma),
        b.delta_rule.to_json(),
        fmt17(b.xi1),
        b.n_terms,
        fmt17(EPS_SCALE)
    )
}

fn point_line(p: &BranchPoint) -> String {
    let mut s = String::new();
    write!(
        s,
        r#"{{"eps":{},"mu":{},"kappa":{},"s":{},"tangent":[{},{},{}],"residual":{},"stability":"{}","h":{},"easy":{}}}"#,
        fmt17(p.eps),
        fmt17(p.mu),
        fmt17(p.kappa),
        fmt17(p.arclength),
        fmt17(p.tangent[0]),
        fmt17(p.tangent[1]),
        fmt17(p.tangent[2]),
        fmt17(p.residual_norm),
        p.stability.as_str(),
        fmt17(p.h_next),
        p.easy
    )
    .expect("write to string");
    s
}

/// Writes the header and all points, one JSON object per line.
pub fn save_branch(branch: &Branch, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{}", header_line(branch))?;
    for p in &branch.points {
        writeln!(out, "{}", point_line(p))?;
    }
    out.flush()?;
    Ok(())
}

/// Appends one point to an existing branch file.
pub fn append_point(point: &BranchPoint, path: &Path) -> Result<()> {
    let mut f = std::fs::OpenOptions::new().append(true).open(path)?;
    writeln!(f, "{}", point_line(point))?;
    Ok(())
}

fn field<'a>(v: &'a serde_json::Value, key: &str, line: usize) -> Result<&'a serde_json::Value> {
    v.get(key).ok_or_else(|| Error::Parse {
        line,
        message: format!("missing key '{key}'"),
    })
}

fn num(v: &serde_json::Value, key: &str, line: usize) -> Result<f64> {
    field(v, key, line)?.as_f64().ok_or_else(|| Error::Parse {
        line,
        message: format!("'{key}' is not a number"),
    })
}

fn uint(v: &serde_json::Value, key: &str, line: usize) -> Result<u64> {
    field(v, key, line)?.as_u64().ok_or_else(|| Error::Parse {
        line,
        message: format!("'{key}' is not a non-negative integer"),
    })
}

pub fn load_branch(path: &Path) -> Result<Branch> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut branch: Option<Branch> = None;
    for (k, line) in file.lines().enumerate() {
        let n = k + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: n,
            message: e.to_string(),
        })?;
        match branch.as_mut() {
            None => {
                let rule = field(&v, "delta_rule", n)?;
                let delta_rule = match rule.get("kind").and_then(|k| k.as_str()) {
                    Some("zero") => DeltaRule::Zero,
                    Some("proportional") => DeltaRule::Proportional(num(rule, "r", n)?),
                    _ => {
                        return Err(Error::Parse {
                            line: n,
                            message: "unknown delta_rule".into(),
                        })
                    }
                };
                let scale = num(field(&v, "scaling", n)?, "eps", n)?;
                if scale != EPS_SCALE {
                    return Err(Error::Parse {
                        line: n,
                        message: format!("unsupported eps scaling {scale}"),
                    });
                }
                branch = Some(Branch {
                    index_j: uint(&v, "index_j", n)? as usize,
                    d: uint(&v, "d", n)? as u32,
                    sigma: num(&v, "sigma", n)?,
                    delta_rule,
                    xi1: num(&v, "xi1", n)?,
                    n_terms: uint(&v, "n_terms", n)? as usize,
                    points: Vec::new(),
                    turning_point: None,
                    stop: None,
                });
            }
            Some(b) => {
                let t = field(&v, "tangent", n)?.as_array().filter(|a| a.len() == 3).ok_or_else(|| Error::Parse {
                    line: n,
                    message: "tangent must have 3 components".into(),
                })?;
                let mut tangent = [0.0; 3];
                for (slot, x) in tangent.iter_mut().zip(t) {
                    *slot = x.as_f64().ok_or_else(|| Error::Parse {
                        line: n,
                        message: "tangent component is not a number".into(),
                    })?;
                }
                let stability = field(&v, "stability", n)?
                    .as_str()
                    .and_then(Stability::parse)
                    .ok_or_else(|| Error::Parse {
                        line: n,
                        message: "bad stability tag".into(),
                    })?;
                b.points.push(BranchPoint {
                    eps: num(&v, "eps", n)?,
                    mu: num(&v, "mu", n)?,
                    kappa: num(&v, "kappa", n)?,
                    arclength: num(&v, "s", n)?,
                    tangent,
                    residual_norm: num(&v, "residual", n)?,
                    stability,
                    h_next: v.get("h").and_then(|x| x.as_f64()).unwrap_or(H_MAX.min(0.01)),
                    easy: v.get("easy").and_then(|x| x.as_u64()).unwrap_or(0) as usize,
                });
            }
        }
    }
    branch.ok_or(Error::Parse {
        line: 0,
        message: "empty branch file".into(),
    })
}
