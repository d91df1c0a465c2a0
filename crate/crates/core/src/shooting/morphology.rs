use crate::integrator::ProfileTrajectory;

/// Relative tolerance below which neighbouring `|Q|` values count as equal.
pub const PLATEAU_TOL: f64 = 1e-9;

/// Number of local maxima of `|Q|` on the line, with `Q` extended evenly.
///
/// An interior maximum at `ξ > 0` appears twice under the even extension; a
/// maximum at the origin once.
pub fn profile_maxima_count(traj: &ProfileTrajectory) -> usize {
    let mut amps: Vec<f64> = Vec::with_capacity(traj.nodes.len() + 1);
    if traj.nodes.first().map_or(true, |n| n.xi > 0.0) {
        amps.push(traj.mu.norm());
    }
    amps.extend(traj.nodes.iter().map(|n| n.q.norm()));
    let peak = amps.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return 0;
    }
    let tol = PLATEAU_TOL * peak;
    // collapse plateaus so strict comparisons see one representative
    let mut levels: Vec<f64> = Vec::with_capacity(amps.len());
    for a in amps {
        match levels.last() {
            Some(&l) if (a - l).abs() <= tol => {}
            _ => levels.push(a),
        }
    }
    let mut count = 0;
    if levels.len() > 1 && levels[0] > levels[1] {
        count += 1;
    }
    for w in levels.windows(3) {
        if w[1] > w[0] && w[1] > w[2] {
            count += 2;
        }
    }
    count
}

/// `ξ` of the strict interior local maxima of `|Q|` (node resolution).
pub fn maxima_locations(traj: &ProfileTrajectory) -> Vec<f64> {
    let peak = traj.nodes.iter().map(|n| n.q.norm()).fold(traj.mu.norm(), f64::max);
    let tol = PLATEAU_TOL * peak;
    let mut out = Vec::new();
    // (ξ, |Q|) of the last level change, so plateaus report their start
    let mut levels: Vec<(f64, f64)> = vec![(0.0, traj.mu.norm())];
    for n in &traj.nodes {
        let a = n.q.norm();
        if (a - levels.last().expect("nonempty").1).abs() > tol {
            levels.push((n.xi, a));
        }
    }
    for w in levels.windows(3) {
        if w[1].1 > w[0].1 && w[1].1 > w[2].1 {
            out.push(w[1].0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::Node;
    use crate::params::ProfileParams;
    use num_complex::Complex64;

    fn traj(mu: f64, values: &[f64]) -> ProfileTrajectory {
        let nodes = values
            .iter()
            .enumerate()
            .map(|(k, &v)| Node {
                xi: 0.1 * (k + 1) as f64,
                q: Complex64::new(v, 0.0),
                q_prime: Complex64::new(0.0, 0.0),
                q_second: Complex64::new(0.0, 0.0),
            })
            .collect();
        ProfileTrajectory {
            params: ProfileParams::nls(1, 2.3, 1.0),
            mu: Complex64::new(mu, 0.0),
            nodes,
            xi_end: 0.1 * values.len() as f64,
            tol: 1e-10,
        }
    }

    #[test]
    fn maxima_positions() {
        let t = traj(1.0, &[0.5, 0.9, 0.4, 0.6, 0.2]);
        let xs = maxima_locations(&t);
        assert_eq!(xs.len(), 2);
        assert!((xs[0] - 0.2).abs() < 1e-12 && (xs[1] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn zero_profile() {
        assert_eq!(profile_maxima_count(&traj(0.0, &[0.0, 0.0, 0.0])), 0);
    }

    #[test]
    fn monotone_decay_has_one_maximum() {
        assert_eq!(profile_maxima_count(&traj(1.0, &[0.9, 0.5, 0.2])), 1);
    }

    #[test]
    fn off_centre_hump_counts_twice() {
        assert_eq!(profile_maxima_count(&traj(0.5, &[0.7, 0.9, 0.4])), 2);
        assert_eq!(profile_maxima_count(&traj(1.0, &[0.5, 0.9, 0.4])), 3);
    }

    #[test]
    fn plateaus_and_noise_are_ignored() {
        let v = [0.9, 0.9 + 1e-12, 0.9 - 1e-12, 0.5];
        assert_eq!(profile_maxima_count(&traj(1.0, &v)), 1);
        let v = [1.2, 1.2, 1.2, 0.5];
        assert_eq!(profile_maxima_count(&traj(1.0, &v)), 2);
    }
}
