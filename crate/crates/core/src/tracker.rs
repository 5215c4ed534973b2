//! Predictor–corrector tracking along segment homotopies in `(A, B)` space.
//!
//! The homotopy moves the image slice from `params_from` to `params_to` along
//! `p(s) = (1−τ(s))·from + τ(s)·to` with `τ(s) = γs / (1 + (γ−1)s)`, which
//! bends the real segment into a circular arc through `0` and `1` for a unit
//! `γ ≠ 1`. The predictor is classical RK4 on the Davidenko equation
//! `J_x ẋ = −∂F/∂s`; the corrector is plain Newton.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{linear_solve, CVector};
use crate::segre::{evaluate, jacobian, SecantProfile, SliceParams, Solution};

/// Norm of `(u, t)` beyond which a path is declared divergent.
const DIVERGENCE_NORM: f64 = 1e8;
/// Accepted steps in a row before the step size is expanded.
const EXPAND_AFTER: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackerConfig {
    pub initial_step: f64,
    pub min_step: f64,
    /// Upper bound on the step in `s` after expansion.
    pub max_step: f64,
    pub max_steps: usize,
    pub corrector_tol: f64,
    pub max_newton_iters: usize,
    pub step_expand: f64,
    pub step_contract: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            min_step: 1e-7,
            max_step: 0.2,
            max_steps: 10_000,
            corrector_tol: 1e-10,
            max_newton_iters: 5,
            step_expand: 2.0,
            step_contract: 0.5,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.min_step
            && self.min_step < self.initial_step
            && self.initial_step <= 1.0
            && self.initial_step <= self.max_step
            && self.corrector_tol > 0.0
            && self.max_newton_iters > 0
            && self.step_expand > 1.0
            && 0.0 < self.step_contract
            && self.step_contract < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid tracker configuration {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrackStatus {
    Success,
    StepSizeCollapse,
    MaxStepsExceeded,
    Diverged,
}

impl std::fmt::Display for TrackStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackOutcome {
    pub status: TrackStatus,
    /// Present iff `status == Success`.
    pub solution: Option<Solution>,
    pub steps_used: usize,
}

impl TrackOutcome {
    pub fn is_success(&self) -> bool {
        self.status == TrackStatus::Success
    }
}

/// Unit `γ = e^{iθ}` with `θ` uniform in `[−π/2, π/2]`.
///
/// Angles near `π` are excluded: there the arc `τ(s)` passes close to the
/// pole at `s = 1/(1−γ)` and the path makes a huge detour.
pub fn random_gamma<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let half = std::f64::consts::FRAC_PI_2;
    Complex64::from_polar(1.0, rng.random_range(-half..=half))
}

/// Newton's method on the square system at fixed parameters.
///
/// Returns as soon as `‖F‖ ≤ tol`; an exact solution comes back unchanged
/// after zero iterations.
pub fn newton_refine(
    profile: &SecantProfile,
    params: &SliceParams,
    sol: &Solution,
    tol: f64,
    max_iters: usize,
) -> Result<Solution> {
    let n_u = profile.format.n_u();
    let mut x = sol.to_vector();
    let mut res = residual_at(profile, params, &x)?;
    let mut norm = res.norm();
    for _ in 0..max_iters {
        if norm <= tol {
            break;
        }
        let dx = newton_step(profile, params, &x, &res)?;
        x += dx;
        let xn = x.norm();
        if !xn.is_finite() || xn > DIVERGENCE_NORM {
            return Err(Error::Diverged { norm: xn });
        }
        res = residual_at(profile, params, &x)?;
        norm = res.norm();
    }
    if norm <= tol {
        Ok(Solution::from_vector(&x, n_u, norm))
    } else {
        Err(Error::NoConvergence {
            iterations: max_iters,
            residual: norm,
        })
    }
}

fn split(profile: &SecantProfile, x: &CVector) -> (CVector, CVector) {
    let n_u = profile.format.n_u();
    (x.rows(0, n_u).into_owned(), x.rows(n_u, profile.codim).into_owned())
}

fn residual_at(profile: &SecantProfile, params: &SliceParams, x: &CVector) -> Result<CVector> {
    let (u, t) = split(profile, x);
    evaluate(profile, params, &u, &t)
}

fn newton_step(profile: &SecantProfile, params: &SliceParams, x: &CVector, res: &CVector) -> Result<CVector> {
    let (u, t) = split(profile, x);
    let jac = jacobian(profile, params, &u, &t)?;
    linear_solve(&jac, &(-res))
}

/// The segment homotopy between two slice parameter points.
struct Segment<'a> {
    profile: &'a SecantProfile,
    from: &'a SliceParams,
    to: &'a SliceParams,
    delta_a: crate::numerics::ComplexMatrix,
    delta_b: CVector,
    gamma: Complex64,
}

impl<'a> Segment<'a> {
    fn new(profile: &'a SecantProfile, from: &'a SliceParams, to: &'a SliceParams, gamma: Complex64) -> Self {
        Self {
            profile,
            from,
            to,
            delta_a: &to.a - &from.a,
            delta_b: &to.b - &from.b,
            gamma,
        }
    }

    fn tau(&self, s: f64) -> Complex64 {
        if s >= 1.0 {
            return Complex64::new(1.0, 0.0);
        }
        self.gamma * s / (1.0 + (self.gamma - 1.0) * s)
    }

    fn dtau(&self, s: f64) -> Complex64 {
        let d = 1.0 + (self.gamma - 1.0) * s;
        self.gamma / (d * d)
    }

    fn params_at(&self, s: f64) -> SliceParams {
        self.from.blend(self.to, self.tau(s))
    }

    /// `ẋ = −J⁻¹ ∂F/∂s`, where only the top block depends on `s`:
    /// `∂F/∂s = −(ΔA t + ΔB)·τ'(s)`.
    fn velocity(&self, s: f64, x: &CVector) -> Result<CVector> {
        let params = self.params_at(s);
        let (u, t) = split(self.profile, x);
        let jac = jacobian(self.profile, &params, &u, &t)?;
        let abc = self.profile.format.ambient_dim();
        let mut rhs = CVector::zeros(x.len());
        let moving = (&self.delta_a * &t + &self.delta_b) * self.dtau(s);
        rhs.rows_mut(0, abc).copy_from(&moving);
        linear_solve(&jac, &rhs)
    }

    fn rk4(&self, s: f64, h: f64, x: &CVector) -> Result<CVector> {
        let k1 = self.velocity(s, x)?;
        let k2 = self.velocity(s + h / 2.0, &(x + &k1 * Complex64::from(h / 2.0)))?;
        let k3 = self.velocity(s + h / 2.0, &(x + &k2 * Complex64::from(h / 2.0)))?;
        let k4 = self.velocity(s + h, &(x + &k3 * Complex64::from(h)))?;
        Ok(x + (k1 + k2 * Complex64::from(2.0) + k3 * Complex64::from(2.0) + k4) * Complex64::from(h / 6.0))
    }
}

/// Newton correction during tracking. Fails on slow contraction so that the
/// caller shrinks the step instead of risking a jump to a neighbouring path.
fn correct(
    profile: &SecantProfile,
    params: &SliceParams,
    mut x: CVector,
    cfg: &TrackerConfig,
) -> Option<(CVector, f64)> {
    let mut res = residual_at(profile, params, &x).ok()?;
    let mut norm = res.norm();
    let mut last_dx = f64::INFINITY;
    for _ in 0..cfg.max_newton_iters {
        if norm <= cfg.corrector_tol {
            return Some((x, norm));
        }
        let dx = newton_step(profile, params, &x, &res).ok()?;
        let dxn = dx.norm();
        let scale = 1.0 + x.norm();
        if dxn > 1e-12 * scale && dxn > 0.5 * last_dx {
            return None;
        }
        last_dx = dxn;
        x += dx;
        res = residual_at(profile, params, &x).ok()?;
        norm = res.norm();
    }
    (norm <= cfg.corrector_tol).then_some((x, norm))
}

/// Track `sol` from `params_from` to `params_to`.
pub fn track(
    profile: &SecantProfile,
    sol: &Solution,
    params_from: &SliceParams,
    params_to: &SliceParams,
    cfg: &TrackerConfig,
    gamma: Complex64,
) -> TrackOutcome {
    let seg = Segment::new(profile, params_from, params_to, gamma);
    let fail = |status, steps_used| TrackOutcome {
        status,
        solution: None,
        steps_used,
    };

    let mut x = sol.to_vector();
    let mut s = 0.0_f64;
    let mut h = cfg.initial_step;
    let mut streak = 0;
    let mut steps = 0;
    while s < 1.0 {
        if steps >= cfg.max_steps {
            return fail(TrackStatus::MaxStepsExceeded, steps);
        }
        steps += 1;
        let step = h.min(1.0 - s);
        let s_next = if step >= 1.0 - s { 1.0 } else { s + step };
        let corrected = seg
            .rk4(s, s_next - s, &x)
            .ok()
            .and_then(|pred| correct(profile, &seg.params_at(s_next), pred, cfg));
        match corrected {
            Some((x_next, _)) => {
                let xn = x_next.norm();
                if !xn.is_finite() || xn > DIVERGENCE_NORM {
                    return fail(TrackStatus::Diverged, steps);
                }
                x = x_next;
                s = s_next;
                streak += 1;
                if streak >= EXPAND_AFTER {
                    h = (h * cfg.step_expand).min(cfg.max_step);
                    streak = 0;
                }
            }
            None => {
                streak = 0;
                h *= cfg.step_contract;
                if h < cfg.min_step {
                    return fail(TrackStatus::StepSizeCollapse, steps);
                }
            }
        }
    }

    // Endpoint re-validation against the target parameters themselves rather
    // than the blended ones at s = 1.
    let end = Solution::from_vector(&x, profile.format.n_u(), 0.0);
    match newton_refine(profile, params_to, &end, cfg.corrector_tol, cfg.max_newton_iters) {
        Ok(solution) => TrackOutcome {
            status: TrackStatus::Success,
            solution: Some(solution),
            steps_used: steps,
        },
        Err(Error::Diverged { .. }) => fail(TrackStatus::Diverged, steps),
        Err(_) => fail(TrackStatus::StepSizeCollapse, steps),
    }
}
