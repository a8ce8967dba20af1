//! Deterministic derivative-free minimization (Nelder–Mead simplex) for
//! low-dimensional, cheap objectives such as the classical pulse-shaping
//! error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome of a simplex search.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OptimizeReport {
    /// Best parameter vector found.
    pub best: Vec<f64>,
    /// Objective value at `best`.
    pub best_value: f64,
    /// Total objective evaluations consumed (including the initial simplex).
    pub evaluations: usize,
    /// Whether `best_value` fell below the requested tolerance.
    pub converged: bool,
}

/// Minimize `f` with the Nelder–Mead simplex method, starting from `x0`
/// with per-coordinate initial offsets `steps`.
///
/// Fully deterministic: no randomness, stable ordering with index
/// tie-breaking.  Stops when the value tolerance is met, the simplex has
/// collapsed (value spread below `1e-15 * (1 + |best|)`), or `budget`
/// evaluations are exhausted; the best vertex so far is always returned.
pub fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    steps: &[f64],
    budget: usize,
    tolerance: f64,
) -> Result<OptimizeReport> {
    let n = x0.len();
    if n == 0 {
        return Err(Error::InvalidParameter(
            "cannot optimize an empty parameter vector".into(),
        ));
    }
    if steps.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} initial steps for {} parameters",
            steps.len(),
            n
        )));
    }
    if steps.iter().any(|s| !s.is_finite() || *s == 0.0) {
        return Err(Error::InvalidParameter(
            "initial simplex steps must be finite and nonzero".into(),
        ));
    }
    if budget < n + 1 {
        return Err(Error::InvalidParameter(format!(
            "budget {budget} cannot even evaluate the initial simplex ({} points)",
            n + 1
        )));
    }

    // Standard coefficients: reflection, expansion, contraction, shrink.
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;

    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], evaluations: &mut usize| -> Result<f64> {
        *evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            return Err(Error::NumericalFailure(
                "objective returned NaN during simplex search".into(),
            ));
        }
        Ok(v)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(x0, &mut evaluations)?;
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += steps[i];
        let v = eval(&x, &mut evaluations)?;
        simplex.push((x, v));
    }

    let order = |simplex: &mut Vec<(Vec<f64>, f64)>| {
        // Stable: equal values keep insertion order, so runs are reproducible.
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("no NaN values"));
    };
    order(&mut simplex);

    while evaluations < budget {
        let best_value = simplex[0].1;
        if best_value < tolerance {
            break;
        }
        let spread = simplex[n].1 - best_value;
        if spread.abs() < 1e-15 * (1.0 + best_value.abs()) {
            break;
        }

        // Centroid of all vertices but the worst.
        let mut centroid = vec![0.0; n];
        for (x, _) in simplex.iter().take(n) {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let lerp = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = lerp(ALPHA);
        let v_reflected = eval(&reflected, &mut evaluations)?;
        if v_reflected < simplex[0].1 {
            // Try to expand further along the same direction.
            let expanded = lerp(GAMMA);
            let v_expanded = if evaluations < budget {
                eval(&expanded, &mut evaluations)?
            } else {
                f64::INFINITY
            };
            simplex[n] = if v_expanded < v_reflected {
                (expanded, v_expanded)
            } else {
                (reflected, v_reflected)
            };
        } else if v_reflected < simplex[n - 1].1 {
            simplex[n] = (reflected, v_reflected);
        } else {
            // Contract toward the centroid (outside or inside).
            let contracted = if v_reflected < worst.1 {
                lerp(ALPHA * RHO)
            } else {
                lerp(-RHO)
            };
            let v_contracted = if evaluations < budget {
                eval(&contracted, &mut evaluations)?
            } else {
                f64::INFINITY
            };
            if v_contracted < v_reflected.min(worst.1) {
                simplex[n] = (contracted, v_contracted);
            } else {
                // Shrink every vertex toward the best.
                let best_x = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    for (xi, bi) in vertex.0.iter_mut().zip(&best_x) {
                        *xi = bi + SIGMA * (*xi - bi);
                    }
                    if evaluations >= budget {
                        vertex.1 = f64::INFINITY;
                        continue;
                    }
                    vertex.1 = eval(&vertex.0, &mut evaluations)?;
                }
            }
        }
        order(&mut simplex);
    }

    let (best, best_value) = simplex.swap_remove(0);
    Ok(OptimizeReport {
        converged: best_value < tolerance,
        best,
        best_value,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl_converges_to_minimum() {
        let mut f = |x: &[f64]| {
            x.iter()
                .enumerate()
                .map(|(i, v)| (i as f64 + 1.0) * (v - 0.3 * i as f64).powi(2))
                .sum::<f64>()
        };
        let report =
            nelder_mead(&mut f, &[1.0, -2.0, 0.5, 3.0], &[0.5; 4], 2000, 1e-12).unwrap();
        assert!(report.converged, "value {}", report.best_value);
        for (i, v) in report.best.iter().enumerate() {
            assert!((v - 0.3 * i as f64).abs() < 1e-5, "coordinate {i} = {v}");
        }
    }

    #[test]
    fn banana_valley_is_tracked_to_the_optimum() {
        let mut f =
            |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let report = nelder_mead(&mut f, &[-1.2, 1.0], &[0.2, 0.2], 4000, 1e-10).unwrap();
        assert!(report.converged, "value {}", report.best_value);
        assert!((report.best[0] - 1.0).abs() < 1e-4);
        assert!((report.best[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn runs_are_deterministic() {
        let make = || {
            let mut f = |x: &[f64]| (x[0] - 2.0).powi(2) * (1.0 + x[1].sin().powi(2));
            nelder_mead(&mut f, &[7.0, 0.4], &[0.3, 0.3], 500, 1e-14).unwrap()
        };
        let a = make();
        let b = make();
        assert_eq!(a.best, b.best);
        assert_eq!(a.best_value.to_bits(), b.best_value.to_bits());
        assert_eq!(a.evaluations, b.evaluations);
    }

    #[test]
    fn exhausted_budget_returns_best_so_far_unconverged() {
        let mut f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let report = nelder_mead(&mut f, &[5.0, 5.0, 5.0], &[1.0; 3], 10, 1e-20).unwrap();
        assert!(!report.converged);
        assert!(report.evaluations <= 10);
        assert!(report.best_value <= 75.0);
    }

    #[test]
    fn invalid_setup_is_rejected() {
        let mut f = |_: &[f64]| 0.0;
        assert!(nelder_mead(&mut f, &[], &[], 100, 1e-6).is_err());
        assert!(nelder_mead(&mut f, &[1.0], &[0.0], 100, 1e-6).is_err());
        assert!(nelder_mead(&mut f, &[1.0, 2.0], &[0.1], 100, 1e-6).is_err());
        assert!(nelder_mead(&mut f, &[1.0, 2.0], &[0.1, 0.1], 2, 1e-6).is_err());
    }
}
