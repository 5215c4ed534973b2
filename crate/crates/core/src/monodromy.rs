//! Witness-set expansion by monodromy loops.
//!
//! Every known solution is carried around a triangle `p0 → p1 → p2 → p0` of
//! random image slices (fiber slices fixed). Endpoints are solutions of the
//! original system again, usually permuted, and new image points are merged
//! in. The count of distinct image points is a lower bound on `deg σ_r`.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::Format;
use crate::numerics::{gaussian_matrix, gaussian_vector, seeded_rng, CVector, Tolerances};
use crate::segre::{residual_norm, secant_dimension, seed_witness, SecantProfile, SliceParams, Solution};
use crate::tracker::{random_gamma, track, TrackStatus, TrackerConfig};

/// RNG stream offsets derived from the witness seed.
const LOOP_STREAM: u64 = 0x100_0000;
const TRACE_STREAM: u64 = 0x200_0000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    TargetReached,
    Stalled,
    MaxLoops,
    /// No path starting from the seed ever closed a loop.
    SeedTrackFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessMeta {
    pub rng_seed: u64,
    pub loops_run: u64,
    pub paths_failed: u64,
    /// Paths that closed their loop successfully.
    pub paths_closed: u64,
    /// Consecutive loops without a new point.
    pub stall_counter: u64,
    pub target_count: Option<usize>,
    pub stop_reason: Option<StopReason>,
    /// Endpoints with a known image point but a different fiber point.
    pub fiber_collisions: u64,
}

impl WitnessMeta {
    pub fn new(rng_seed: u64) -> Self {
        Self {
            rng_seed,
            loops_run: 0,
            paths_failed: 0,
            paths_closed: 0,
            stall_counter: 0,
            target_count: None,
            stop_reason: None,
            fiber_collisions: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessSet {
    pub profile: SecantProfile,
    pub params: SliceParams,
    pub solutions: Vec<Solution>,
    pub meta: WitnessMeta,
}

impl WitnessSet {
    /// Measure the secant dimension and seed one solution.
    pub fn seed(format: &Format, seed: u64) -> Result<Self> {
        let profile = secant_dimension(format, seed)?;
        Self::seed_with_profile(profile, seed)
    }

    pub fn seed_with_profile(profile: SecantProfile, seed: u64) -> Result<Self> {
        let (params, sol) = seed_witness(&profile, seed)?;
        Ok(Self {
            profile,
            params,
            solutions: vec![sol],
            meta: WitnessMeta::new(seed),
        })
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    /// Recompute every residual; fail with the first index above `tol`.
    pub fn revalidate(&mut self, tol: f64) -> Result<()> {
        self.params.check(&self.profile)?;
        for (index, sol) in self.solutions.iter_mut().enumerate() {
            let residual = residual_norm(&self.profile, &self.params, &sol.u, &sol.t)?;
            if !(residual <= tol) {
                return Err(Error::ResidualValidation { index, residual });
            }
            sol.residual_norm = residual;
        }
        Ok(())
    }

    /// Image points `A t + B` of all solutions.
    pub fn image_points(&self) -> Vec<CVector> {
        self.solutions.iter().map(|s| s.image(&self.params)).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MonodromyOptions {
    pub tracker: TrackerConfig,
    pub tolerances: Tolerances,
}

fn same_image(kept: &Solution, other: &Solution, tol: f64) -> bool {
    (&kept.t - &other.t).norm() <= tol * (1.0 + kept.t.norm())
}

fn same_fiber_point(kept: &Solution, other: &Solution, tol: f64) -> bool {
    (&kept.u - &other.u).norm() <= tol * (1.0 + kept.u.norm())
}

#[derive(Debug, Clone)]
pub struct DedupeReport {
    pub survivors: Vec<Solution>,
    /// Dropped duplicates whose chart coordinates differed from the kept one.
    pub fiber_collisions: usize,
}

/// Keep the first representative of every image point.
///
/// Two solutions of one slice are the same image point iff their slice
/// coordinates agree, since `A` has full column rank.
pub fn dedupe(solutions: Vec<Solution>, tol: f64) -> DedupeReport {
    let mut survivors: Vec<Solution> = Vec::with_capacity(solutions.len());
    let mut fiber_collisions = 0;
    for sol in solutions {
        match survivors.iter().find(|kept| same_image(kept, &sol, tol)) {
            Some(kept) => {
                if !same_fiber_point(kept, &sol, tol) {
                    fiber_collisions += 1;
                }
            }
            None => survivors.push(sol),
        }
    }
    DedupeReport {
        survivors,
        fiber_collisions,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopReport {
    pub new_points: usize,
    pub failures: usize,
    /// For each starting solution, the index its endpoint merged into.
    pub endpoint_map: Vec<Option<usize>>,
}

fn random_slice<R: Rng + ?Sized>(ws: &WitnessSet, rng: &mut R) -> SliceParams {
    let abc = ws.profile.format.ambient_dim();
    let a = gaussian_matrix(rng, abc, ws.profile.codim);
    let b = gaussian_vector(rng, abc);
    ws.params.with_slice(a, b)
}

fn track_chain(
    profile: &SecantProfile,
    start: &Solution,
    chain: &[&SliceParams],
    gammas: &[Complex64],
    cfg: &TrackerConfig,
) -> std::result::Result<Solution, TrackStatus> {
    let mut current = start.clone();
    for (k, pair) in chain.windows(2).enumerate() {
        let out = track(profile, &current, pair[0], pair[1], cfg, gammas[k]);
        current = out.solution.ok_or(out.status)?;
    }
    Ok(current)
}

/// One monodromy triangle applied to every known solution.
pub fn loop_once<R: Rng + ?Sized>(ws: &mut WitnessSet, opts: &MonodromyOptions, rng: &mut R) -> LoopReport {
    let p1 = random_slice(ws, rng);
    let p2 = random_slice(ws, rng);
    let gammas: Vec<[Complex64; 3]> = (0..ws.solutions.len())
        .map(|_| [random_gamma(rng), random_gamma(rng), random_gamma(rng)])
        .collect();
    let chain = [&ws.params, &p1, &p2, &ws.params];
    let profile = ws.profile;
    let outcomes: Vec<_> = ws
        .solutions
        .par_iter()
        .zip(gammas.par_iter())
        .map(|(sol, g)| track_chain(&profile, sol, &chain, g, &opts.tracker))
        .collect();

    let tol = opts.tolerances.dedupe;
    let mut report = LoopReport {
        new_points: 0,
        failures: 0,
        endpoint_map: Vec::with_capacity(outcomes.len()),
    };
    for outcome in outcomes {
        let Ok(end) = outcome else {
            report.failures += 1;
            report.endpoint_map.push(None);
            continue;
        };
        ws.meta.paths_closed += 1;
        match ws.solutions.iter().position(|kept| same_image(kept, &end, tol)) {
            Some(j) => {
                if !same_fiber_point(&ws.solutions[j], &end, tol) {
                    ws.meta.fiber_collisions += 1;
                }
                report.endpoint_map.push(Some(j));
            }
            None => {
                ws.solutions.push(end);
                report.new_points += 1;
                report.endpoint_map.push(Some(ws.solutions.len() - 1));
            }
        }
    }
    ws.meta.loops_run += 1;
    ws.meta.paths_failed += report.failures as u64;
    if report.new_points == 0 {
        ws.meta.stall_counter += 1;
    } else {
        ws.meta.stall_counter = 0;
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    pub stall_limit: u64,
    /// Loops allowed in this call (not counting loops of earlier runs).
    pub max_loops: u64,
    pub target_count: Option<usize>,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            stall_limit: 10,
            max_loops: 200,
            target_count: None,
        }
    }
}

/// Loop until the target count, the stall limit or the loop budget is hit.
pub fn run(ws: WitnessSet, opts: &MonodromyOptions, stop: &StopRule) -> WitnessSet {
    run_with(ws, opts, stop, |_| Ok(())).expect("no-op checkpoint cannot fail")
}

/// [`run`] with a callback after every loop and once more after the stop
/// reason is set (used for checkpoints).
///
/// Loop `k` draws from its own RNG stream, so a resumed run continues exactly
/// as an uninterrupted one would.
pub fn run_with<F>(mut ws: WitnessSet, opts: &MonodromyOptions, stop: &StopRule, mut after_loop: F) -> Result<WitnessSet>
where
    F: FnMut(&WitnessSet) -> Result<()>,
{
    ws.meta.target_count = stop.target_count;
    ws.meta.stop_reason = None;
    let mut loops = 0;
    let reason = loop {
        if stop.target_count.is_some_and(|target| ws.len() >= target) {
            break StopReason::TargetReached;
        }
        if ws.meta.stall_counter >= stop.stall_limit {
            break if ws.meta.paths_closed == 0 {
                StopReason::SeedTrackFailure
            } else {
                StopReason::Stalled
            };
        }
        if loops >= stop.max_loops {
            break StopReason::MaxLoops;
        }
        let mut rng = seeded_rng(ws.meta.rng_seed, LOOP_STREAM + ws.meta.loops_run);
        loop_once(&mut ws, opts, &mut rng);
        loops += 1;
        after_loop(&ws)?;
    };
    ws.meta.stop_reason = Some(reason);
    after_loop(&ws)?;
    Ok(ws)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceReport {
    pub passed: bool,
    /// `‖second difference‖ / ‖first difference‖` of the summed image points.
    pub trace_residual: f64,
    pub first_difference: f64,
    pub second_difference: f64,
    pub n_points: usize,
}

/// Translation step of the trace test.
pub const TRACE_STEP: f64 = 1e-2;
/// Pass threshold on the relative second difference.
pub const TRACE_THRESHOLD: f64 = 1e-4;

/// Trace test for hypersurface slices: translate `B` along a random direction
/// by `0, ε, 2ε` and check that the sum of the image points moves linearly.
pub fn trace_test(ws: &WitnessSet, opts: &MonodromyOptions) -> Result<TraceReport> {
    if ws.profile.codim != 1 {
        return Err(Error::Domain(format!(
            "trace test needs codimension 1, got {}",
            ws.profile.codim
        )));
    }
    if ws.is_empty() {
        return Err(Error::Empty("witness set"));
    }
    let abc = ws.profile.format.ambient_dim();
    let mut rng = seeded_rng(ws.meta.rng_seed, TRACE_STREAM);
    let direction = gaussian_vector(&mut rng, abc);
    let shifted = |s: f64| {
        ws.params
            .with_slice(ws.params.a.clone(), &ws.params.b + &direction * Complex64::from(s))
    };
    let p1 = shifted(TRACE_STEP);
    let p2 = shifted(2.0 * TRACE_STEP);
    let gammas: Vec<[Complex64; 2]> = (0..ws.len())
        .map(|_| [random_gamma(&mut rng), random_gamma(&mut rng)])
        .collect();

    let profile = ws.profile;
    let tracked: Vec<std::result::Result<(Solution, Solution), TrackStatus>> = ws
        .solutions
        .par_iter()
        .zip(gammas.par_iter())
        .map(|(sol, g)| {
            let mid = track_chain(&profile, sol, &[&ws.params, &p1], &g[..1], &opts.tracker)?;
            let end = track_chain(&profile, &mid, &[&p1, &p2], &g[1..], &opts.tracker)?;
            Ok((mid, end))
        })
        .collect();

    let mut sums = [CVector::zeros(abc), CVector::zeros(abc), CVector::zeros(abc)];
    for (index, (sol, outcome)) in ws.solutions.iter().zip(tracked).enumerate() {
        let (mid, end) = outcome.map_err(|status| Error::TrackFailure {
            index,
            status: status.to_string(),
        })?;
        sums[0] += sol.image(&ws.params);
        sums[1] += mid.image(&p1);
        sums[2] += end.image(&p2);
    }
    let first = (&sums[1] - &sums[0]).norm();
    let second = (&sums[0] - &sums[1] * Complex64::from(2.0) + &sums[2]).norm();
    let trace_residual = if first > 0.0 { second / first } else { f64::INFINITY };
    Ok(TraceReport {
        passed: second <= TRACE_THRESHOLD * first,
        trace_residual,
        first_difference: first,
        second_difference: second,
        n_points: ws.len(),
    })
}
