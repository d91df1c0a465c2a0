//! The subcommands. Reports go to stdout as `key = value` lines, data files to
//! the configured output directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use blowup_core::continuation::{
    detect_turning_point, fmt17, load_branch, resume_branch, save_branch, seed_root, trace_branch, Branch, Stability,
    StopReason, StopRule, TraceOptions,
};
use blowup_core::shooting::{assign_branch_index, locate_roots, newton_root, normalize_convert, Normalization, Rect, RootPoint};
use blowup_core::special::check;
use blowup_core::stability::{analyze, spectrum_csv, verdict_json, Spectrum, Verdict};
use blowup_core::tables::{self, Table};
use blowup_core::ProfileParams;

use crate::config::RunConfig;
use crate::Failure;

fn numbers(s: &str, n: usize, what: &str) -> Result<Vec<f64>, Failure> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("{what}: '{s}' is not a list of {n} numbers")))?;
    if v.len() != n || v.iter().any(|x| !x.is_finite()) {
        return Err(Failure::Usage(format!("{what}: '{s}' is not a list of {n} finite numbers")));
    }
    Ok(v)
}

/// Two positive numbers: a point of the admissible quadrant.
fn pair(s: &str, what: &str) -> Result<(f64, f64), Failure> {
    let v = numbers(s, 2, what)?;
    if !(v[0] > 0.0 && v[1] > 0.0) {
        return Err(Failure::Usage(format!("{what}: '{s}' must have both entries positive")));
    }
    Ok((v[0], v[1]))
}

fn write_output(cfg: &RunConfig, name: &str, content: &str) -> Result<PathBuf, Failure> {
    let io = |e: std::io::Error| Failure::Numerical(format!("cannot write {name}: {e}"));
    std::fs::create_dir_all(&cfg.output_dir).map_err(io)?;
    let path = cfg.output_dir.join(name);
    std::fs::write(&path, content).map_err(io)?;
    Ok(path)
}

fn fixed(cfg: &RunConfig) -> ProfileParams {
    ProfileParams::new(cfg.d, cfg.sigma, cfg.eps, cfg.delta, 1.0, 1.0)
}

fn solve_root(cfg: &RunConfig, guess: &str, what: &str) -> Result<RootPoint, Failure> {
    let g = pair(guess, what)?;
    let sc = cfg.shooting();
    let root = newton_root(g, cfg.normalization, &fixed(cfg), &sc, cfg.tol)?;
    Ok(assign_branch_index(normalize_convert(&root, Normalization::FixOmega), &sc)?)
}

fn root_report(root: &RootPoint) -> String {
    let q = normalize_convert(root, Normalization::FixAmplitude);
    let p = &root.params;
    let mut s = String::new();
    for (k, v) in [
        ("d", p.d.to_string()),
        ("sigma", fmt17(p.sigma)),
        ("eps", fmt17(p.eps)),
        ("delta", fmt17(p.delta)),
        ("mu", fmt17(root.mu)),
        ("kappa", fmt17(p.kappa)),
        ("kappa_q", fmt17(q.params.kappa)),
        ("omega_q", fmt17(q.params.omega)),
        ("residual", fmt17(root.residual_norm)),
        ("iterations", root.iterations.to_string()),
        ("j", root.branch_index.to_string()),
    ] {
        let _ = writeln!(s, "{k} = {v}");
    }
    s
}

pub fn solve(cfg: &RunConfig, guess: &str) -> Result<(), Failure> {
    let root = solve_root(cfg, guess, "--guess")?;
    print!("{}", root_report(&root));
    Ok(())
}

fn csv_text(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

pub fn scan(cfg: &RunConfig, rect: &str, depth: usize) -> Result<(), Failure> {
    let v = numbers(rect, 4, "--rect")?;
    if !(v[0] < v[1] && v[2] < v[3]) {
        return Err(Failure::Usage(format!("--rect: '{rect}' needs lo < hi on both axes")));
    }
    let sc = cfg.shooting();
    let report = locate_roots(&Rect::new((v[0], v[1]), (v[2], v[3])), depth, cfg.normalization, &fixed(cfg), &sc);
    let roots: Vec<RootPoint> = report
        .roots
        .par_iter()
        .map(|r| assign_branch_index(normalize_convert(r, Normalization::FixOmega), &sc))
        .collect::<Result<_, _>>()?;

    let mut csv = String::from("mu,kappa,residual,j\n");
    for r in &roots {
        let _ = writeln!(csv, "{},{},{},{}", fmt17(r.mu), fmt17(r.params.kappa), fmt17(r.residual_norm), r.branch_index);
    }
    let mut side = String::from("x0_lo,x0_hi,x1_lo,x1_hi,reason\n");
    for (c, why) in &report.unreliable {
        let _ = writeln!(side, "{},{},{},{},{}", fmt17(c.x0.0), fmt17(c.x0.1), fmt17(c.x1.0), fmt17(c.x1.1), csv_text(why));
    }
    let roots_path = write_output(cfg, "roots.csv", &csv)?;
    let side_path = write_output(cfg, "roots_unreliable.csv", &side)?;
    println!("roots = {}", roots.len());
    println!("unreliable = {}", report.unreliable.len());
    println!("evaluations = {}", report.evaluations);
    println!("csv = {}", roots_path.display());
    println!("unreliable_csv = {}", side_path.display());
    Ok(())
}

fn trace_options(cfg: &RunConfig) -> TraceOptions {
    TraceOptions {
        h0: cfg.h0,
        max_points: cfg.max_points,
        stop: StopRule {
            kappa_min: cfg.kappa_min,
            after_fold_fraction: cfg.after_fold,
        },
        tol: cfg.corrector_tol,
    }
}

fn stop_name(stop: Option<StopReason>) -> &'static str {
    match stop {
        None => "none",
        Some(StopReason::MaxPoints) => "max_points",
        Some(StopReason::EpsNegative) => "eps_negative",
        Some(StopReason::KappaBelow) => "kappa_below",
        Some(StopReason::PastFold) => "past_fold",
        Some(StopReason::Stalled) => "stalled",
    }
}

fn branch_summary(b: &Branch, path: &Path) -> String {
    let last = b.points.last().expect("branch has its seed");
    let mut s = String::new();
    let _ = writeln!(s, "file = {}", path.display());
    let _ = writeln!(s, "j = {}", b.index_j);
    let _ = writeln!(s, "points = {}", b.points.len());
    let _ = writeln!(s, "stop = {}", stop_name(b.stop));
    match b.turning_point {
        Some((e, arc)) => {
            let _ = writeln!(s, "eps_star = {}", fmt17(e));
            let _ = writeln!(s, "s_star = {}", fmt17(arc));
        }
        None => {
            let _ = writeln!(s, "eps_star = none");
        }
    }
    let _ = writeln!(s, "eps_max = {}", fmt17(b.max_eps()));
    let _ = writeln!(s, "eps_end = {}", fmt17(last.eps));
    let _ = writeln!(s, "kappa_end = {}", fmt17(last.kappa));
    let _ = writeln!(s, "mu_end = {}", fmt17(last.mu));
    s
}

pub fn branch(cfg: &RunConfig, seed: Option<&str>, resume: Option<&Path>) -> Result<(), Failure> {
    let sc = cfg.shooting();
    let opts = trace_options(cfg);
    let (mut b, path, traced) = match (seed, resume) {
        (_, Some(path)) => {
            let mut b = load_branch(path)?;
            let traced = resume_branch(&mut b, &sc, &opts);
            (b, path.to_path_buf(), traced)
        }
        (Some(seed), None) => {
            let root = seed_root(cfg.d, cfg.sigma, pair(seed, "--seed")?, &sc)?;
            let b = trace_branch(&root, cfg.delta_rule, &sc, &opts)?;
            std::fs::create_dir_all(&cfg.output_dir)
                .map_err(|e| Failure::Numerical(format!("cannot create {}: {e}", cfg.output_dir.display())))?;
            (b, cfg.output_dir.join("branch.jsonl"), Ok(()))
        }
        (None, None) => return Err(Failure::Usage("branch needs --seed or --resume".into())),
    };
    // the partial branch is kept whatever happened, so it can be resumed
    save_branch(&b, &path)?;
    traced?;
    if b.turning_point.is_none() {
        b.turning_point = detect_turning_point(&b, &sc, 1e-10)?;
    }
    print!("{}", branch_summary(&b, &path));
    if b.stop == Some(StopReason::Stalled) {
        return Err(Failure::Numerical(format!(
            "continuation stalled after {} points; partial branch saved to {} (continue with --resume)",
            b.points.len(),
            path.display()
        )));
    }
    Ok(())
}

fn spectrum_report(spec: &Spectrum) -> String {
    let mut s = String::new();
    let (l0, l2) = spec.symmetry_pair;
    let _ = writeln!(s, "verdict = {}", spec.verdict.as_str());
    let _ = writeln!(s, "max_real_rest = {}", fmt17(spec.max_real_rest));
    let _ = writeln!(s, "lambda0 = {},{}", fmt17(l0.re), fmt17(l0.im));
    let _ = writeln!(s, "lambda2k = {},{}", fmt17(l2.re), fmt17(l2.im));
    let _ = writeln!(s, "doublet_error = {},{}", fmt17(spec.doublet_error.0), fmt17(spec.doublet_error.1));
    let _ = writeln!(s, "separation = {},{}", fmt17(spec.separation.0), fmt17(spec.separation.1));
    let _ = writeln!(s, "eigenvalues = {}", spec.eigenvalues.len());
    s
}

fn stability(v: Verdict) -> Stability {
    match v {
        Verdict::Stable => Stability::Stable,
        Verdict::Unstable => Stability::Unstable,
        Verdict::Inconclusive => Stability::Unknown,
    }
}

pub fn spectrum(cfg: &RunConfig, root: Option<&str>, branch: Option<&Path>, every: usize) -> Result<(), Failure> {
    let sc = cfg.shooting();
    if let Some(path) = branch {
        if every == 0 {
            return Err(Failure::Usage("--every must be at least 1".into()));
        }
        let mut b = load_branch(path)?;
        let mut idx: Vec<usize> = (0..b.points.len()).step_by(every).collect();
        if idx.last() != Some(&(b.points.len() - 1)) {
            idx.push(b.points.len() - 1);
        }
        let results: Vec<_> = idx
            .par_iter()
            .map(|&k| analyze(&b.root_at(&b.points[k]), &sc, cfg.grid_n, cfg.margin))
            .collect();
        let mut csv = String::from("point,re,im,is_doublet\n");
        let mut jsonl = String::new();
        let mut failed = 0;
        println!("{:>5} {:>24} {:>24} {:>24} {:>12}", "point", "eps", "kappa", "mu", "verdict");
        for (&k, res) in idx.iter().zip(&results) {
            let p = b.points[k];
            match res {
                Ok(spec) => {
                    for line in spectrum_csv(spec).lines().skip(1) {
                        let _ = writeln!(csv, "{k},{line}");
                    }
                    let _ = writeln!(jsonl, "{{\"point\":{k},{}", &verdict_json(spec, p.eps, p.kappa, p.mu)[1..]);
                    b.points[k].stability = stability(spec.verdict);
                    println!("{k:>5} {:>24} {:>24} {:>24} {:>12}", fmt17(p.eps), fmt17(p.kappa), fmt17(p.mu), spec.verdict.as_str());
                }
                Err(e) => {
                    failed += 1;
                    let _ = writeln!(jsonl, "{{\"point\":{k},\"error\":{}}}", csv_text(&e.to_string()));
                    println!("{k:>5} {:>24} {:>24} {:>24} {:>12}", fmt17(p.eps), fmt17(p.kappa), fmt17(p.mu), "error");
                }
            }
        }
        write_output(cfg, "spectra.csv", &csv)?;
        write_output(cfg, "verdicts.jsonl", &jsonl)?;
        std::fs::create_dir_all(&cfg.output_dir).map_err(|e| Failure::Numerical(e.to_string()))?;
        save_branch(&b, &cfg.output_dir.join("branch_stability.jsonl"))?;
        if failed > 0 {
            return Err(Failure::Numerical(format!("{failed} of {} branch points failed", idx.len())));
        }
        return Ok(());
    }
    let guess = root.ok_or_else(|| Failure::Usage("spectrum needs --root or --branch".into()))?;
    let root = solve_root(cfg, guess, "--root")?;
    let spec = analyze(&root, &sc, cfg.grid_n, cfg.margin)?;
    let csv = write_output(cfg, "spectrum.csv", &spectrum_csv(&spec))?;
    let json = write_output(cfg, "verdict.json", &(verdict_json(&spec, root.params.eps, root.params.kappa, root.mu) + "\n"))?;
    print!("{}", root_report(&root));
    print!("{}", spectrum_report(&spec));
    println!("csv = {}", csv.display());
    println!("json = {}", json.display());
    Ok(())
}

fn apply_reference(tabs: &mut [Table], path: &Path) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    for (n, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Failure::Usage(format!("{} line {}: expected table,j,eps_star,kappa,mu,kappa_q,omega_q", path.display(), n + 1));
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 7 {
            return Err(bad());
        }
        let j: usize = f[1].parse().map_err(|_| bad())?;
        let v = numbers(&f[2..].join(","), 5, "reference row").map_err(|_| bad())?;
        let row = tabs
            .iter_mut()
            .find(|t| t.name == f[0])
            .and_then(|t| t.rows.iter_mut().find(|r| r.j == j))
            .ok_or_else(|| Failure::Usage(format!("{} line {}: no row {}:{j}", path.display(), n + 1, f[0])))?;
        row.eps_star = v[0];
        row.kappa = v[1];
        row.mu = v[2];
        row.kappa_q = v[3];
        row.omega_q = v[4];
    }
    Ok(())
}

pub fn tables(cfg: &RunConfig, full: bool, rows: &[String], reference: Option<&Path>) -> Result<(), Failure> {
    let mut tabs = [Table::one(), Table::two()];
    if let Some(path) = reference {
        apply_reference(&mut tabs, path)?;
    }
    let mut picked: Vec<(String, usize)> = Vec::new();
    for r in rows {
        let parsed = r.split_once(':').and_then(|(t, j)| Some((t.to_string(), j.parse::<usize>().ok()?)));
        match parsed {
            Some((t, j)) if tabs.iter().any(|x| x.name == t && x.row(j).is_some()) => picked.push((t, j)),
            _ => return Err(Failure::Usage(format!("--row: '{r}' is not a table row such as table1:3"))),
        }
    }
    let sc = cfg.shooting();
    let fold_rows = if full { usize::MAX } else { 2 };
    let mut results = Vec::new();
    for mut t in tabs {
        if !picked.is_empty() {
            t.rows.retain(|r| picked.iter().any(|(n, j)| *n == t.name && *j == r.j));
            t.checked = usize::MAX;
        }
        results.extend(tables::reproduce(&t, fold_rows, &sc));
    }
    print!("{}", tables::render(&results));
    let cells: Vec<_> = results.iter().flat_map(|r| &r.cells).collect();
    let failed = cells.iter().filter(|c| !c.pass()).count();
    let errors: usize = results.iter().map(|r| r.errors.len()).sum();
    println!("cells = {}, passed = {}, failed = {failed}, errors = {errors}", cells.len(), cells.len() - failed);
    if failed + errors > 0 {
        return Err(Failure::Numerical(format!("{failed} table cells failed, {errors} rows with errors")));
    }
    Ok(())
}

pub fn kummer_check() -> Result<(), Failure> {
    let checks = check::all();
    for ch in &checks {
        println!(
            "{:<34} max_dev = {} tol = {} samples = {} {}",
            ch.name,
            fmt17(ch.max_dev),
            fmt17(ch.tol),
            ch.samples,
            if ch.pass() { "pass" } else { "FAIL" }
        );
    }
    let failed = checks.iter().filter(|c| !c.pass()).count();
    if failed > 0 {
        return Err(Failure::Numerical(format!("{failed} identity checks failed")));
    }
    Ok(())
}
