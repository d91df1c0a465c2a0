//! Topological degree of the boundary residual over rectangles of the unknown
//! plane, and root location by recursive bisection.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{newton_root, plane_residual, Normalization, RootPoint, ShootingConfig};
use crate::error::{Error, Result};
use crate::params::ProfileParams;

/// Scans stay clear of the zero solution at `μ = 0`.
pub const MU_FLOOR: f64 = 0.05;
const MAX_PER_SIDE: usize = 4096;
/// Bisections of one boundary segment before the degree is declared unreliable.
const MAX_REFINE: usize = 7;

/// Axis-parallel rectangle `[x0_lo, x0_hi] × [x1_lo, x1_hi]` of the unknown plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: (f64, f64),
    pub x1: (f64, f64),
}

impl Rect {
    pub fn new(x0: (f64, f64), x1: (f64, f64)) -> Self {
        Self { x0, x1 }
    }

    pub fn width(&self) -> f64 {
        self.x0.1 - self.x0.0
    }

    pub fn height(&self) -> f64 {
        self.x1.1 - self.x1.0
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x0.0 + self.x0.1), 0.5 * (self.x1.0 + self.x1.1))
    }

    pub fn contains(&self, x: (f64, f64), margin: f64) -> bool {
        x.0 >= self.x0.0 - margin && x.0 <= self.x0.1 + margin && x.1 >= self.x1.0 - margin && x.1 <= self.x1.1 + margin
    }

    /// Splits the longer side at fraction `t`.
    pub fn split(&self, t: f64) -> (Rect, Rect) {
        if self.width() >= self.height() {
            let m = self.x0.0 + t * self.width();
            (Rect::new((self.x0.0, m), self.x1), Rect::new((m, self.x0.1), self.x1))
        } else {
            let m = self.x1.0 + t * self.height();
            (Rect::new(self.x0, (self.x1.0, m)), Rect::new(self.x0, (m, self.x1.1)))
        }
    }

    /// Positively oriented boundary, `per_side` segments per side, without
    /// repeating the first point.
    fn boundary(&self, per_side: usize) -> Vec<(f64, f64)> {
        let n = per_side as f64;
        let lerp = |a: f64, b: f64, k: usize| a + (b - a) * (k as f64 / n);
        let (a0, a1) = self.x0;
        let (b0, b1) = self.x1;
        let mut pts = Vec::with_capacity(4 * per_side);
        pts.extend((0..per_side).map(|k| (lerp(a0, a1, k), b0)));
        pts.extend((0..per_side).map(|k| (a1, lerp(b0, b1, k))));
        pts.extend((0..per_side).map(|k| (lerp(a1, a0, k), b1)));
        pts.extend((0..per_side).map(|k| (a0, lerp(b1, b0, k))));
        pts
    }
}

/// Residual on the unknown plane with memoized evaluations.
pub struct ResidualField {
    pub normalization: Normalization,
    pub fixed: ProfileParams,
    pub cfg: ShootingConfig,
    cache: Mutex<HashMap<(u64, u64), Result<Complex64>>>,
}

impl ResidualField {
    pub fn new(normalization: Normalization, fixed: ProfileParams, cfg: ShootingConfig) -> Self {
        Self {
            normalization,
            fixed,
            cfg,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn eval(&self, x: (f64, f64)) -> Result<Complex64> {
        let key = (x.0.to_bits(), x.1.to_bits());
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            return v.clone();
        }
        let v = plane_residual(self.normalization, &self.fixed, x, &self.cfg);
        self.cache.lock().expect("cache lock").insert(key, v.clone());
        v
    }

    pub fn evaluations(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    fn check_admissible(&self, rect: &Rect) -> Result<()> {
        if self.normalization == Normalization::FixOmega && rect.x0.0 < MU_FLOOR {
            return Err(Error::ExcludedRegion { x0: rect.x0.0, x1: rect.x1.0 });
        }
        let kappa_lo = match self.normalization {
            Normalization::FixOmega => rect.x1.0,
            Normalization::FixAmplitude => rect.x0.0,
        };
        if !(kappa_lo > 0.0) {
            return Err(Error::ExcludedRegion { x0: rect.x0.0, x1: rect.x1.0 });
        }
        Ok(())
    }
}

/// Options of the degree computation and the bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeOptions {
    pub per_side: usize,
    /// Boundary values below this are treated as a zero on the boundary.
    pub min_abs: f64,
    /// Cells are split unconditionally down to this depth, so that roots of
    /// opposite degree in one coarse cell are not cancelled.
    pub min_depth: usize,
    /// Zero-degree cells wider than this are split as well.
    pub zero_diameter: f64,
    pub leaf_diameter: f64,
    pub newton_tol: f64,
    pub dedup: f64,
}

impl Default for DegreeOptions {
    fn default() -> Self {
        Self {
            per_side: 32,
            min_abs: 1e-7,
            min_depth: 4,
            zero_diameter: 0.1,
            leaf_diameter: 1e-2,
            newton_tol: 1e-8,
            dedup: 1e-4,
        }
    }
}

fn eval_boundary(field: &ResidualField, pts: &[(f64, f64)]) -> Result<Vec<Complex64>> {
    let vals: Vec<Result<Complex64>> = pts.par_iter().map(|&x| field.eval(x)).collect();
    vals.into_iter()
        .zip(pts)
        .map(|(v, &(x0, x1))| match v {
            Ok(f) if f.norm().is_finite() => Ok(f),
            Ok(_) | Err(Error::Escape { .. }) | Err(Error::Stiffness { .. }) => Err(Error::ExcludedRegion { x0, x1 }),
            Err(e) => Err(e),
        })
        .collect()
}

fn wrap(mut d: f64) -> f64 {
    while d > PI {
        d -= 2.0 * PI;
    }
    while d <= -PI {
        d += 2.0 * PI;
    }
    d
}

/// Winding number of the residual along the boundary of `rect` with a
/// memoizing field.
pub fn winding_degree_field(field: &ResidualField, rect: &Rect, opts: &DegreeOptions) -> Result<i32> {
    field.check_admissible(rect)?;
    if opts.per_side < 32 {
        return Err(Error::InvalidParameter(format!("per_side = {} must be >= 32", opts.per_side)));
    }
    // Phase steps of a quarter turn or more are bisected locally when they
    // are isolated (fast phase near a root), while a boundary that turns fast
    // everywhere is resampled uniformly so aliased steps are not accepted.
    let mut per_side = opts.per_side;
    loop {
        let pts = rect.boundary(per_side);
        let vals = eval_boundary(field, &pts)?;
        let n = vals.len();
        let mut min_abs = vals.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        let coarse = (0..n).filter(|&k| wrap(vals[(k + 1) % n].arg() - vals[k].arg()).abs() >= PI / 2.0).count();
        if coarse * 8 > n {
            if per_side >= MAX_PER_SIDE {
                return Err(Error::UnreliableDegree { min_abs });
            }
            per_side *= 2;
            continue;
        }
        let mut total = 0.0;
        for k in 0..n {
            let (a, b) = (pts[k], pts[(k + 1) % n]);
            total += arc(field, (a, vals[k]), (b, vals[(k + 1) % n]), 0, &mut min_abs, opts)?;
        }
        return Ok((total / (2.0 * PI)).round() as i32);
    }
}

// Phase increment along one boundary segment, bisected wherever it turns by
// a quarter or more.
fn arc(
    field: &ResidualField,
    a: ((f64, f64), Complex64),
    b: ((f64, f64), Complex64),
    depth: usize,
    min_abs: &mut f64,
    opts: &DegreeOptions,
) -> Result<f64> {
    if *min_abs < opts.min_abs {
        return Err(Error::UnreliableDegree { min_abs: *min_abs });
    }
    let d = wrap(b.1.arg() - a.1.arg());
    if d.abs() < PI / 2.0 {
        return Ok(d);
    }
    if depth >= MAX_REFINE {
        return Err(Error::UnreliableDegree { min_abs: *min_abs });
    }
    let m = (0.5 * (a.0 .0 + b.0 .0), 0.5 * (a.0 .1 + b.0 .1));
    let fm = eval_boundary(field, &[m])?[0];
    *min_abs = min_abs.min(fm.norm());
    Ok(arc(field, a, (m, fm), depth + 1, min_abs, opts)? + arc(field, (m, fm), b, depth + 1, min_abs, opts)?)
}

/// Winding number of the boundary residual along the rectangle boundary.
pub fn winding_degree(
    rect: &Rect,
    per_side: usize,
    normalization: Normalization,
    fixed: &ProfileParams,
    cfg: &ShootingConfig,
) -> Result<i32> {
    let field = ResidualField::new(normalization, *fixed, *cfg);
    let opts = DegreeOptions { per_side, ..DegreeOptions::default() };
    winding_degree_field(&field, rect, &opts)
}

/// Roots found in a rectangle together with the cells whose degree could not
/// be trusted.
#[derive(Debug, Clone, PartialEq)]
pub struct LocateReport {
    pub roots: Vec<RootPoint>,
    pub unreliable: Vec<(Rect, String)>,
    pub evaluations: usize,
}

/// Recursive bisection on the degree followed by Newton polish of each leaf.
pub fn locate_roots_with(field: &ResidualField, rect: &Rect, max_depth: usize, opts: &DegreeOptions) -> LocateReport {
    let mut report = LocateReport {
        roots: Vec::new(),
        unreliable: Vec::new(),
        evaluations: 0,
    };
    let first = winding_degree_field(field, rect, opts);
    let mut stack: Vec<(Rect, usize, i32)> = match first {
        Ok(deg) => vec![(*rect, 0, deg)],
        Err(e) => {
            report.unreliable.push((*rect, e.to_string()));
            report.evaluations = field.evaluations();
            return report;
        }
    };
    while let Some((cell, depth, deg)) = stack.pop() {
        if deg == 0 && depth >= opts.min_depth && cell.diameter() < opts.zero_diameter {
            continue;
        }
        if deg != 0 && (cell.diameter() < opts.leaf_diameter || depth >= max_depth) {
            polish(field, &cell, opts, &mut report);
            continue;
        }
        if depth >= max_depth {
            continue;
        }
        let mut split = None;
        let mut last_err = None;
        for t in [0.5, 0.5 + 1.0 / 7.0, 0.5 - 1.0 / 11.0] {
            let (a, b) = cell.split(t);
            match (winding_degree_field(field, &a, opts), winding_degree_field(field, &b, opts)) {
                (Ok(da), Ok(db)) => {
                    split = Some([(a, da), (b, db)]);
                    break;
                }
                (Err(e), _) | (_, Err(e)) => last_err = Some(e),
            }
        }
        match split {
            // push in reverse so the lower half is processed first
            Some([lo, hi]) => {
                stack.push((hi.0, depth + 1, hi.1));
                stack.push((lo.0, depth + 1, lo.1));
            }
            None => {
                let e = last_err.expect("split attempted");
                report.unreliable.push((cell, e.to_string()));
                if deg != 0 {
                    polish(field, &cell, opts, &mut report);
                }
            }
        }
    }
    report.roots.sort_by(|a, b| a.unknowns().partial_cmp(&b.unknowns()).expect("finite roots"));
    report.evaluations = field.evaluations();
    report
}

fn polish(field: &ResidualField, cell: &Rect, opts: &DegreeOptions, report: &mut LocateReport) {
    let margin = 0.5 * cell.diameter();
    match newton_root(cell.center(), field.normalization, &field.fixed, &field.cfg, opts.newton_tol) {
        Ok(root) if cell.contains(root.unknowns(), margin) => {
            let x = root.unknowns();
            let dup = report.roots.iter().any(|r| {
                let y = r.unknowns();
                (x.0 - y.0).hypot(x.1 - y.1) < opts.dedup
            });
            if !dup {
                report.roots.push(root);
            }
        }
        Ok(root) => report.unreliable.push((
            *cell,
            format!("Newton left the cell, reaching ({}, {})", root.unknowns().0, root.unknowns().1),
        )),
        Err(e) => report.unreliable.push((*cell, e.to_string())),
    }
}

/// All roots located in `rect` by degree bisection to depth `max_depth`.
pub fn locate_roots(
    rect: &Rect,
    max_depth: usize,
    normalization: Normalization,
    fixed: &ProfileParams,
    cfg: &ShootingConfig,
) -> LocateReport {
    let field = ResidualField::new(normalization, *fixed, *cfg);
    locate_roots_with(&field, rect, max_depth, &DegreeOptions::default())
}
