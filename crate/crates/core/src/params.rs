use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of one profile problem
/// `(1-iε)(Q'' + (d-1)/ξ Q') + iκξQ' + iκ/σ Q - ωQ + (1+iδ)|Q|^{2σ}Q = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileParams {
    pub d: u32,
    pub sigma: f64,
    pub eps: f64,
    pub delta: f64,
    pub kappa: f64,
    pub omega: f64,
    /// Multiplier on the cubic-type term; 1 for the physical problem, 0 for
    /// the linear (Kummer) equation.
    #[serde(default = "one")]
    pub nonlinearity: f64,
}

fn one() -> f64 {
    1.0
}

impl ProfileParams {
    pub fn new(d: u32, sigma: f64, eps: f64, delta: f64, kappa: f64, omega: f64) -> Self {
        Self {
            d,
            sigma,
            eps,
            delta,
            kappa,
            omega,
            nonlinearity: 1.0,
        }
    }

    /// NLS limit `ε = δ = 0` with `ω = 1`.
    pub fn nls(d: u32, sigma: f64, kappa: f64) -> Self {
        Self::new(d, sigma, 0.0, 0.0, kappa, 1.0)
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn linear(mut self) -> Self {
        self.nonlinearity = 0.0;
        self
    }

    /// Complex decay exponent `α = 1/σ + iω/κ`, so that `Q ~ ξ^{-α}`.
    pub fn decay_exponent(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(1.0 / self.sigma, self.omega / self.kappa)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.d) {
            return Err(Error::InvalidParameter(format!("d = {} not in 1..=3", self.d)));
        }
        if !(self.sigma > 2.0 / self.d as f64) {
            return Err(Error::InvalidParameter(format!(
                "sigma = {} is not supercritical (need sigma > 2/d = {})",
                self.sigma,
                2.0 / self.d as f64
            )));
        }
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::InvalidParameter(format!("kappa = {} must be > 0", self.kappa)));
        }
        if !(self.eps >= 0.0) || !(self.delta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eps = {}, delta = {} must be non-negative",
                self.eps, self.delta
            )));
        }
        if !self.omega.is_finite() {
            return Err(Error::InvalidParameter("omega must be finite".into()));
        }
        Ok(())
    }
}
