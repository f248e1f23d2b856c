//! Leapfrog integration of `θ̇ = I, İ = −ε∂_θ f(θ)` on the active window,
//! and the comparison of its trajectory with a synthesized torus.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modes::{ScalarSeries, Window};
use crate::torus::{action_at, evaluate_displacement, SeriesSolution};

/// One recorded point of a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub theta: Vec<f64>,
    pub action: Vec<f64>,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("at least the initial sample")
    }

    /// `max |H(t) − H(0)| / |H(0)|` (absolute when `H(0) = 0`).
    pub fn energy_drift(&self) -> f64 {
        let h0 = self.samples[0].energy;
        let scale = if h0 == 0.0 { 1.0 } else { h0.abs() };
        self.samples
            .iter()
            .map(|s| (s.energy - h0).abs() / scale)
            .fold(0.0, f64::max)
    }
}

/// `f` flattened to `(slot, ν_j)` lists for fast evaluation.
#[derive(Clone, Debug)]
struct Potential {
    terms: Vec<(Vec<(usize, f64)>, Complex64)>,
    len: usize,
}

impl Potential {
    fn new(f: &ScalarSeries, window: Window) -> Result<Self> {
        let mut terms = Vec::with_capacity(f.len());
        for (nu, c) in f.iter() {
            if !window.covers(nu) {
                return Err(Error::domain(format!(
                    "potential mode {nu} leaves the window"
                )));
            }
            let entries = nu
                .entries()
                .iter()
                .map(|&(j, v)| (window.slot(j).expect("covered"), v as f64))
                .collect();
            terms.push((entries, *c));
        }
        Ok(Potential {
            terms,
            len: window.len(),
        })
    }

    fn phase(entries: &[(usize, f64)], theta: &[f64]) -> f64 {
        entries.iter().map(|&(slot, v)| v * theta[slot]).sum()
    }

    fn value(&self, theta: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| (c * Complex64::from_polar(1.0, Self::phase(e, theta))).re)
            .sum()
    }

    /// `∂_j f = Re Σ_ν iν_j f_ν e^{iν·θ}`.
    fn gradient(&self, theta: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|g| *g = 0.0);
        for (e, c) in &self.terms {
            let z =
                Complex64::new(0.0, 1.0) * c * Complex64::from_polar(1.0, Self::phase(e, theta));
            for &(slot, v) in e {
                out[slot] += v * z.re;
            }
        }
    }

    fn energy(&self, eps: f64, theta: &[f64], action: &[f64]) -> f64 {
        0.5 * action.iter().map(|i| i * i).sum::<f64>() + eps * self.value(theta)
    }
}

/// Integration settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integrator {
    pub dt: f64,
    pub t_end: f64,
    /// Record every `stride` steps (the final step is always recorded).
    pub stride: usize,
}

impl Integrator {
    fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.t_end > 0.0) || self.stride == 0 {
            return Err(Error::domain(format!(
                "integrator needs dt > 0, T > 0 and a positive stride; got dt = {}, T = {}, stride = {}",
                self.dt, self.t_end, self.stride
            )));
        }
        Ok((self.t_end / self.dt).round() as usize)
    }
}

/// Kick-drift-kick leapfrog; `θ` accumulates with compensated summation.
pub fn integrate_ode(
    f: &ScalarSeries,
    window: Window,
    eps: f64,
    theta0: &[f64],
    action0: &[f64],
    cfg: Integrator,
) -> Result<Trajectory> {
    let steps = cfg.steps()?;
    let pot = Potential::new(f, window)?;
    if theta0.len() != pot.len || action0.len() != pot.len {
        return Err(Error::domain(format!(
            "initial data must have {} entries",
            pot.len
        )));
    }
    let mut theta = theta0.to_vec();
    let mut carry = vec![0.0; pot.len];
    let mut action = action0.to_vec();
    let mut grad = vec![0.0; pot.len];
    let half = 0.5 * cfg.dt;
    let mut samples = vec![Sample {
        t: 0.0,
        theta: theta.clone(),
        action: action.clone(),
        energy: pot.energy(eps, &theta, &action),
    }];
    if eps != 0.0 {
        pot.gradient(&theta, &mut grad);
    }
    for step in 1..=steps {
        if eps != 0.0 {
            for (i, g) in action.iter_mut().zip(&grad) {
                *i -= half * eps * g;
            }
        }
        for ((th, c), i) in theta.iter_mut().zip(carry.iter_mut()).zip(&action) {
            let y = i * cfg.dt - *c;
            let t = *th + y;
            *c = (t - *th) - y;
            *th = t;
        }
        if eps != 0.0 {
            pot.gradient(&theta, &mut grad);
            for (i, g) in action.iter_mut().zip(&grad) {
                *i -= half * eps * g;
            }
        }
        if step % cfg.stride == 0 || step == steps {
            samples.push(Sample {
                t: step as f64 * cfg.dt,
                theta: theta.clone(),
                action: action.clone(),
                energy: pot.energy(eps, &theta, &action),
            });
        }
    }
    Ok(Trajectory { samples })
}

/// `sup_j inf_k |θ_j − θ′_j − 2πk|`.
pub fn torus_distance(a: &[f64], b: &[f64]) -> f64 {
    let tau = std::f64::consts::TAU;
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).rem_euclid(tau);
            d.min(tau - d)
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationRow {
    pub t: f64,
    pub error: f64,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Validation {
    pub sup_error: f64,
    pub energy_drift: f64,
    pub rows: Vec<ValidationRow>,
}

/// Starts at `θ₀ = u(0)`, `I₀ = I(0)` and measures the distance of the
/// numerical flow from `ωt + u(ωt)`.
pub fn validate_torus(sol: &SeriesSolution, cfg: Integrator) -> Result<Validation> {
    let p = &sol.problem;
    let win = p.om.window();
    let zero = vec![0.0; win.len()];
    let theta0 = evaluate_displacement(sol, &zero)?;
    let action0 = action_at(sol, &zero)?;
    let traj = integrate_ode(&p.f, win, sol.epsilon, &theta0, &action0, cfg)?;
    let mut rows = Vec::with_capacity(traj.samples.len());
    let mut sup_error: f64 = 0.0;
    for s in &traj.samples {
        let phi: Vec<f64> = p.om.values().iter().map(|w| w * s.t).collect();
        let u = evaluate_displacement(sol, &phi)?;
        let expected: Vec<f64> = phi.iter().zip(&u).map(|(a, b)| a + b).collect();
        let error = torus_distance(&s.theta, &expected);
        sup_error = sup_error.max(error);
        rows.push(ValidationRow {
            t: s.t,
            error,
            energy: s.energy,
        });
    }
    Ok(Validation {
        sup_error,
        energy_drift: traj.energy_drift(),
        rows,
    })
}
