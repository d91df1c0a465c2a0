//! Flat `key = value` run configuration.
//!
//! One setting per line, `#` starts a comment. Command-line flags are applied
//! on top of the file through the same [`RunConfig::set`], so both routes
//! validate identically. [`RunConfig::render`] writes every key in a fixed
//! order; parsing its output gives back the same text.

use std::fmt::Write as _;
use std::path::PathBuf;

use blowup_core::continuation::DeltaRule;
use blowup_core::integrator;
use blowup_core::shooting::{Normalization, ShootingConfig};
use blowup_core::stability::{DEFAULT_GRID_N, DEFAULT_MARGIN};

pub const KEYS: [&str; 18] = [
    "d",
    "sigma",
    "eps",
    "delta",
    "delta_rule",
    "normalization",
    "xi1",
    "n_terms",
    "tol",
    "ode_tol",
    "corrector_tol",
    "grid_n",
    "margin",
    "h0",
    "max_points",
    "kappa_min",
    "after_fold",
    "output_dir",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub d: u32,
    pub sigma: f64,
    pub eps: f64,
    /// `δ` for single roots; branches use `delta_rule`.
    pub delta: f64,
    pub delta_rule: DeltaRule,
    pub normalization: Normalization,
    pub xi1: f64,
    pub n_terms: usize,
    /// Newton residual tolerance.
    pub tol: f64,
    pub ode_tol: f64,
    pub corrector_tol: f64,
    pub grid_n: usize,
    pub margin: f64,
    pub h0: f64,
    pub max_points: usize,
    pub kappa_min: f64,
    pub after_fold: Option<f64>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sc = ShootingConfig::default();
        Self {
            d: 1,
            sigma: 2.3,
            eps: 0.0,
            delta: 0.0,
            delta_rule: DeltaRule::Zero,
            normalization: Normalization::FixOmega,
            xi1: sc.xi1,
            n_terms: sc.n_terms,
            tol: 1e-10,
            ode_tol: integrator::DEFAULT_TOL,
            corrector_tol: 1e-8,
            grid_n: DEFAULT_GRID_N,
            margin: DEFAULT_MARGIN,
            h0: 0.01,
            max_points: 400,
            kappa_min: 0.01,
            after_fold: None,
            output_dir: PathBuf::from("."),
        }
    }
}

fn float(key: &str, v: &str) -> Result<f64, String> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("{key}: '{v}' is not a finite number")),
    }
}

fn positive(key: &str, v: &str) -> Result<f64, String> {
    let x = float(key, v)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(format!("{key}: {v} must be positive"))
    }
}

fn count(key: &str, v: &str) -> Result<usize, String> {
    v.parse::<usize>().map_err(|_| format!("{key}: '{v}' is not a non-negative integer"))
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key {
            "d" => {
                self.d = match v.parse::<u32>() {
                    Ok(d @ 1..=3) => d,
                    _ => return Err(format!("d: '{v}' must be 1, 2 or 3")),
                }
            }
            "sigma" => self.sigma = positive(key, v)?,
            "eps" => self.eps = float(key, v)?,
            "delta" => self.delta = float(key, v)?,
            "delta_rule" => {
                self.delta_rule = match v.split_once(':') {
                    None if v == "zero" => DeltaRule::Zero,
                    Some(("proportional", r)) => DeltaRule::Proportional(float(key, r)?),
                    _ => return Err(format!("delta_rule: '{v}' is not 'zero' or 'proportional:<r>'")),
                }
            }
            "normalization" => {
                self.normalization = match v {
                    "omega" => Normalization::FixOmega,
                    "amplitude" => Normalization::FixAmplitude,
                    _ => return Err(format!("normalization: '{v}' is not 'omega' or 'amplitude'")),
                }
            }
            "xi1" => self.xi1 = positive(key, v)?,
            "n_terms" => self.n_terms = count(key, v)?,
            "tol" => self.tol = positive(key, v)?,
            "ode_tol" => self.ode_tol = positive(key, v)?,
            "corrector_tol" => self.corrector_tol = positive(key, v)?,
            "grid_n" => self.grid_n = count(key, v)?,
            "margin" => self.margin = positive(key, v)?,
            "h0" => self.h0 = positive(key, v)?,
            "max_points" => self.max_points = count(key, v)?,
            "kappa_min" => self.kappa_min = float(key, v)?,
            "after_fold" => {
                self.after_fold = if v == "none" { None } else { Some(float(key, v)?) };
            }
            "output_dir" => {
                if v.is_empty() || v.contains('#') {
                    return Err(format!("output_dir: '{v}' must be non-empty and free of '#'"));
                }
                self.output_dir = PathBuf::from(v);
            }
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Defaults overridden by the lines of `text`.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = Self::default();
        let mut seen: Vec<&str> = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected 'key = value'", k + 1))?;
            let key = key.trim();
            if seen.contains(&key) {
                return Err(format!("line {}: duplicate key '{key}'", k + 1));
            }
            seen.push(key);
            cfg.set(key, value).map_err(|e| format!("line {}: {e}", k + 1))?;
        }
        Ok(cfg)
    }

    pub fn render(&self) -> String {
        let rule = match self.delta_rule {
            DeltaRule::Zero => "zero".to_string(),
            DeltaRule::Proportional(r) => format!("proportional:{r:?}"),
        };
        let norm = match self.normalization {
            Normalization::FixOmega => "omega",
            Normalization::FixAmplitude => "amplitude",
        };
        let fold = self.after_fold.map_or("none".to_string(), |f| format!("{f:?}"));
        let values = [
            self.d.to_string(),
            format!("{:?}", self.sigma),
            format!("{:?}", self.eps),
            format!("{:?}", self.delta),
            rule,
            norm.to_string(),
            format!("{:?}", self.xi1),
            self.n_terms.to_string(),
            format!("{:?}", self.tol),
            format!("{:?}", self.ode_tol),
            format!("{:?}", self.corrector_tol),
            self.grid_n.to_string(),
            format!("{:?}", self.margin),
            format!("{:?}", self.h0),
            self.max_points.to_string(),
            format!("{:?}", self.kappa_min),
            fold,
            self.output_dir.display().to_string(),
        ];
        let mut s = String::new();
        for (k, v) in KEYS.iter().zip(values) {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// Cross-key checks that `set` cannot make on its own.
    pub fn validate(&self) -> Result<(), String> {
        self.shooting().validate().map_err(|e| e.to_string())?;
        if self.grid_n < 200 {
            return Err(format!("grid_n = {} must be >= 200", self.grid_n));
        }
        if self.max_points < 2 {
            return Err(format!("max_points = {} must be >= 2", self.max_points));
        }
        Ok(())
    }

    pub fn shooting(&self) -> ShootingConfig {
        ShootingConfig {
            xi1: self.xi1,
            n_terms: self.n_terms,
            tol: self.ode_tol,
            ..ShootingConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_parses_back_to_itself() {
        let mut c = RunConfig::default();
        c.set("delta_rule", "proportional:0.3").unwrap();
        c.set("after_fold", "0.9").unwrap();
        c.set("sigma", "0.1").unwrap();
        c.set("output_dir", "out/run 1").unwrap();
        let text = c.render();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.render(), text);
        assert_eq!(RunConfig::parse(&RunConfig::default().render()).unwrap(), RunConfig::default());
    }

    #[test]
    fn comments_blank_lines_and_spacing() {
        let c = RunConfig::parse("# header\n\n d=3 # three dimensions\nsigma =   1\n").unwrap();
        assert_eq!((c.d, c.sigma), (3, 1.0));
    }

    #[test]
    fn bad_lines_name_their_line() {
        for (text, needle) in [
            ("d = 1\nsigma 2\n", "line 2"),
            ("bogus = 1\n", "unknown key"),
            ("d = 7\n", "d:"),
            ("xi1 = -1\n", "positive"),
            ("eps = nan\n", "finite"),
            ("d = 1\nd = 2\n", "duplicate"),
            ("delta_rule = half\n", "delta_rule"),
        ] {
            let e = RunConfig::parse(text).unwrap_err();
            assert!(e.contains(needle), "{text:?}: {e}");
        }
    }
}
