//! Adaptive integration of the profile initial-value problem
//!
//! ```text
//! (1-iε)(Q'' + (d-1)/ξ Q') + iκξQ' + iκ/σ Q - ωQ + (1+iδ)|Q|^{2σ}Q = 0,
//! Q(0) = μ, Q'(0) = 0
//! ```
//!
//! as a first-order system in the four real unknowns `(Re Q, Im Q, Re Q', Im Q')`
//! with the Dormand–Prince 5(4) pair and a PI step-size controller. The
//! regular-singular origin is stepped over with an even Taylor expansion.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::ProfileParams;

pub const DEFAULT_TOL: f64 = 1e-11;
pub const DEFAULT_XI0: f64 = 1e-3;
pub const BLOWUP_GUARD: f64 = 1e8;

type State = [f64; 4];

/// One accepted integration node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub xi: f64,
    pub q: Complex64,
    pub q_prime: Complex64,
    /// `Q''` from the equation, used by the Hermite interpolant of `Q'`.
    pub q_second: Complex64,
}

/// Accepted nodes of one integration, ordered by increasing `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTrajectory {
    pub params: ProfileParams,
    pub mu: Complex64,
    pub nodes: Vec<Node>,
    pub xi_end: f64,
    pub tol: f64,
}

/// Right-hand side `Q''` of the profile equation.
#[inline]
pub fn second_derivative(params: &ProfileParams, xi: f64, q: Complex64, dq: Complex64) -> Complex64 {
    let i_kappa = Complex64::new(0.0, params.kappa);
    let amp2 = q.norm_sqr();
    let pow = if params.sigma == 1.0 { amp2 } else { amp2.powf(params.sigma) };
    let rest = i_kappa * xi * dq
        + Complex64::new(-params.omega, params.kappa / params.sigma) * q
        + Complex64::new(1.0, params.delta) * (params.nonlinearity * pow) * q;
    let damping = if params.d == 1 || xi == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        (params.d as f64 - 1.0) / xi * dq
    };
    -damping - rest / Complex64::new(1.0, -params.eps)
}

#[inline]
fn rhs(params: &ProfileParams, xi: f64, y: &State) -> State {
    let q = Complex64::new(y[0], y[1]);
    let dq = Complex64::new(y[2], y[3]);
    let dd = second_derivative(params, xi, q, dq);
    [dq.re, dq.im, dd.re, dd.im]
}

/// `(Q(ξ0), Q'(ξ0))` from the even expansion `Q = μ + c₂ξ² + c₄ξ⁴ + O(ξ⁶)` with
/// `c₂ = -(iκμ/σ - ωμ + (1+iδ)|μ|^{2σ}μ) / (2d(1-iε))`.
pub fn taylor_start(params: &ProfileParams, mu: Complex64, xi0: f64) -> (Complex64, Complex64) {
    let (c2, c4) = taylor_coefficients(params, mu);
    let x2 = xi0 * xi0;
    (mu + c2 * x2 + c4 * x2 * x2, 2.0 * c2 * xi0 + 4.0 * c4 * x2 * xi0)
}

pub fn taylor_coefficients(params: &ProfileParams, mu: Complex64) -> (Complex64, Complex64) {
    let d = params.d as f64;
    let s = params.sigma;
    let one_m_ie = Complex64::new(1.0, -params.eps);
    let nl = Complex64::new(1.0, params.delta) * params.nonlinearity;
    let amp = mu.norm();
    let amp_pow = if amp > 0.0 { amp.powf(2.0 * s) } else { 0.0 };
    let lin = Complex64::new(-params.omega, params.kappa / s);
    let c2 = -(lin * mu + nl * amp_pow * mu) / (2.0 * d * one_m_ie);
    let nl2 = if amp > 0.0 {
        amp_pow * (c2 + 2.0 * s * (mu.conj() * c2).re / (amp * amp) * mu)
    } else {
        Complex64::new(0.0, 0.0)
    };
    let c4 = -(Complex64::new(-params.omega, params.kappa * (2.0 + 1.0 / s)) * c2 + nl * nl2)
        / (4.0 * (d + 2.0) * one_m_ie);
    (c2, c4)
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy(y: &State, terms: &[(f64, &State)], h: f64) -> State {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..4 {
            out[i] += h * c * k[i];
        }
    }
    out
}

fn to_node(params: &ProfileParams, xi: f64, y: &State) -> Node {
    let q = Complex64::new(y[0], y[1]);
    let dq = Complex64::new(y[2], y[3]);
    Node {
        xi,
        q,
        q_prime: dq,
        q_second: second_derivative(params, xi, q, dq),
    }
}

/// Integrates from `(xi_start, q0, dq0)` to `xi_end` (either direction).
///
/// Nodes are returned in increasing `ξ` regardless of direction.
pub fn integrate_ivp(
    params: &ProfileParams,
    xi_start: f64,
    q0: Complex64,
    dq0: Complex64,
    xi_end: f64,
    tol: f64,
) -> Result<Vec<Node>> {
    let dir = if xi_end >= xi_start { 1.0 } else { -1.0 };
    let span = (xi_end - xi_start).abs();
    let mut xi = xi_start;
    let mut y: State = [q0.re, q0.im, dq0.re, dq0.im];
    let mut nodes = vec![to_node(params, xi, &y)];
    if span == 0.0 {
        return Ok(nodes);
    }
    let mut k1 = rhs(params, xi, &y);
    let mut h = (1e-2f64).min(span) * dir;
    let mut err_prev: f64 = 1e-4;
    let safety = 0.9;
    let (alpha, beta) = (0.7 / 5.0, 0.4 / 5.0);
    let h_min = 1e-13 * (1.0 + span);

    loop {
        let remaining = xi_end - xi;
        if remaining * dir <= 1e-14 * (1.0 + xi.abs()) {
            break;
        }
        let mut last = false;
        if (h - remaining) * dir >= 0.0 {
            h = remaining;
            last = true;
        }
        let k2 = rhs(params, xi + C2 * h, &axpy(&y, &[(A21, &k1)], h));
        let k3 = rhs(params, xi + C3 * h, &axpy(&y, &[(A31, &k1), (A32, &k2)], h));
        let k4 = rhs(params, xi + C4 * h, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
        let k5 = rhs(
            params,
            xi + C5 * h,
            &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
        );
        let k6 = rhs(
            params,
            xi + h,
            &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h),
        );
        let y_new = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
        let xi_new = if last { xi_end } else { xi + h };
        let k7 = rhs(params, xi_new, &y_new);

        let mut err = 0.0;
        for i in 0..4 {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol * (1.0 + y[i].abs().max(y_new[i].abs()));
            err += (e / sc) * (e / sc);
        }
        let err = (err / 4.0).sqrt();

        if err <= 1.0 && err.is_finite() {
            xi = xi_new;
            y = y_new;
            k1 = k7;
            let q_abs = (y[0] * y[0] + y[1] * y[1]).sqrt();
            if !(q_abs <= BLOWUP_GUARD) {
                return Err(Error::Escape { xi, bound: BLOWUP_GUARD });
            }
            nodes.push(Node {
                xi,
                q: Complex64::new(y[0], y[1]),
                q_prime: Complex64::new(y[2], y[3]),
                q_second: Complex64::new(k7[2], k7[3]),
            });
            let fac = if err == 0.0 {
                5.0
            } else {
                (safety * err.powf(-alpha) * err_prev.powf(beta)).clamp(0.2, 5.0)
            };
            err_prev = err.max(1e-4);
            if last {
                break;
            }
            h *= fac;
        } else {
            let fac = if err.is_finite() {
                (safety * err.powf(-1.0 / 5.0)).clamp(0.1, 0.9)
            } else {
                0.1
            };
            h *= fac;
        }
        if h.abs() < h_min {
            return Err(Error::Stiffness { xi, h: h.abs() });
        }
    }
    if dir < 0.0 {
        nodes.reverse();
    }
    Ok(nodes)
}

fn check_tol(tol: f64) -> Result<()> {
    if !(1e-14..=1e-6).contains(&tol) {
        return Err(Error::InvalidParameter(format!("tol = {tol:e} outside [1e-14, 1e-6]")));
    }
    Ok(())
}

/// Integrates the regular solution with `Q(0) = μ`, `Q'(0) = 0` up to `xi_end`,
/// starting from the Taylor hand-off point `xi0`.
///
/// For `d = 1` the equation has no singular coefficient and `xi0 = 0` is allowed.
pub fn integrate_from(
    params: &ProfileParams,
    mu: Complex64,
    xi0: f64,
    xi_end: f64,
    tol: f64,
) -> Result<ProfileTrajectory> {
    check_tol(tol)?;
    if !(xi0 >= 0.0 && xi0 <= 1e-2) || (xi0 == 0.0 && params.d != 1) {
        return Err(Error::InvalidParameter(format!("hand-off point xi0 = {xi0} not usable for d = {}", params.d)));
    }
    if !(xi_end > xi0) {
        return Err(Error::InvalidParameter(format!("xi_end = {xi_end} must exceed xi0 = {xi0}")));
    }
    let (q0, dq0) = if xi0 == 0.0 {
        (mu, Complex64::new(0.0, 0.0))
    } else {
        taylor_start(params, mu, xi0)
    };
    let nodes = if mu.norm() == 0.0 {
        // The zero solution; skip the stepping.
        let z = Complex64::new(0.0, 0.0);
        vec![
            Node { xi: xi0, q: z, q_prime: z, q_second: z },
            Node { xi: xi_end, q: z, q_prime: z, q_second: z },
        ]
    } else {
        integrate_ivp(params, xi0, q0, dq0, xi_end, tol)?
    };
    Ok(ProfileTrajectory {
        params: *params,
        mu,
        nodes,
        xi_end,
        tol,
    })
}

/// Regular solution on `(0, xi_end]` with the default hand-off point.
pub fn integrate(params: &ProfileParams, mu: Complex64, xi_end: f64, tol: f64) -> Result<ProfileTrajectory> {
    if !(xi_end >= 1.0) {
        return Err(Error::InvalidParameter(format!("xi_end = {xi_end} must be >= 1")));
    }
    integrate_from(params, mu, DEFAULT_XI0, xi_end, tol)
}

fn hermite(x0: f64, x1: f64, y0: Complex64, y1: Complex64, d0: Complex64, d1: Complex64, x: f64) -> Complex64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    y0 * h00 + d0 * (h10 * h) + y1 * h01 + d1 * (h11 * h)
}

impl ProfileTrajectory {
    pub fn xi_start(&self) -> f64 {
        self.nodes[0].xi
    }

    pub fn last(&self) -> &Node {
        self.nodes.last().expect("trajectory has nodes")
    }

    /// `(Q(ξ), Q'(ξ))` by cubic Hermite interpolation between bracketing nodes.
    pub fn sample(&self, xi: f64) -> Result<(Complex64, Complex64)> {
        sample(self, xi)
    }
}

pub fn sample(traj: &ProfileTrajectory, xi: f64) -> Result<(Complex64, Complex64)> {
    let lo = traj.nodes[0].xi;
    let hi = traj.last().xi;
    if !(xi >= lo && xi <= hi) {
        return Err(Error::Range { xi, lo, hi });
    }
    let k = traj.nodes.partition_point(|n| n.xi <= xi);
    if k == 0 {
        let n = &traj.nodes[0];
        return Ok((n.q, n.q_prime));
    }
    if k == traj.nodes.len() {
        let n = traj.last();
        return Ok((n.q, n.q_prime));
    }
    let (a, b) = (&traj.nodes[k - 1], &traj.nodes[k]);
    if xi == a.xi {
        return Ok((a.q, a.q_prime));
    }
    let q = hermite(a.xi, b.xi, a.q, b.q, a.q_prime, b.q_prime, xi);
    let dq = hermite(a.xi, b.xi, a.q_prime, b.q_prime, a.q_second, b.q_second, xi);
    Ok((q, dq))
}
