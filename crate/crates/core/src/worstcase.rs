//! The tight lower-bound family and empirical searches for high ratios.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{approx_ratio, rho};
use crate::error::{Error, Result};
use crate::exact::DEFAULT_NODE_BUDGET;
use crate::model::{normalize_sizes, Instance};

/// A ratio above `ρ_m + EXCEED_TOL` counts as exceeding the bound.
pub const EXCEED_TOL: f64 = 1e-9;

/// Range of speeds and sizes for random instances.
pub const SAMPLE_RANGE: (f64, f64) = (1.0, 4.0);

/// The m-processor, (m+1)-task instance whose LPT ratio equals ρ_m.
///
/// Speeds follow `s(1) = 2`, `s(p+1) = ρ_m s(p) - 1`; task `p < m` has size
/// `s(p+1)` and the last two tasks have size 1. The optimum puts the two
/// unit tasks on processor 1 and task `p` alone on processor `p+1`, so every
/// processor finishes at exactly 1. LPT instead places task `p` on
/// processor `p`, after which the last unit task finishes at `ρ_m`
/// wherever it goes. The result is checked before it is returned.
pub fn generate_gis_instance(m: usize) -> Result<Instance> {
    if !(2..=8).contains(&m) {
        return Err(Error::OutOfRange {
            what: "m",
            detail: format!("{m} not in 2..=8"),
        });
    }
    let r = rho(m)?;
    let mut speeds = vec![2.0];
    for p in 1..m {
        speeds.push(r * speeds[p - 1] - 1.0);
    }
    let mut sizes: Vec<f64> = speeds[1..].to_vec();
    sizes.extend([1.0, 1.0]);

    let fail = |reason: String| Error::ConstructionFailed { m, reason };
    if speeds.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Greater)) {
        return Err(fail(format!("speeds not strictly decreasing: {speeds:?}")));
    }
    let inst = Instance::new(speeds, sizes)
        .map_err(|e| fail(e.to_string()))?
        .with_name(format!("gis-m{m}"));

    let report = approx_ratio(&inst, DEFAULT_NODE_BUDGET).map_err(|e| fail(e.to_string()))?;
    if (report.opt - 1.0).abs() > 1e-9 {
        return Err(fail(format!("OPT = {} instead of 1", report.opt)));
    }
    if (report.ratio - r).abs() > 1e-6 {
        return Err(fail(format!("ratio {} differs from rho {}", report.ratio, r)));
    }
    Ok(inst)
}

/// Uniform random instance with speeds and sizes in `[lo, hi)`.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize, lo: f64, hi: f64) -> Instance {
    let speeds = (0..m).map(|_| rng.random_range(lo..hi)).collect();
    let sizes = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    Instance::sorted(speeds, sizes).expect("positive finite samples")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub m: usize,
    /// Task counts are cycled through `n_min..=n_max` across restarts.
    pub n_min: usize,
    pub n_max: usize,
    pub restarts: usize,
    pub steps_per_restart: usize,
    pub step_scale: f64,
    pub seed: u64,
    pub solver_node_budget: u64,
    /// Restart `r < seed_instances.len()` starts from `seed_instances[r]`
    /// instead of a random draw.
    pub seed_instances: Vec<Instance>,
}

impl SearchConfig {
    pub fn new(m: usize, n_max: usize) -> Self {
        SearchConfig {
            m,
            n_min: (m + 1).min(n_max),
            n_max,
            restarts: 100,
            steps_per_restart: 1000,
            step_scale: 0.25,
            seed: 0,
            solver_node_budget: 1_000_000,
            seed_instances: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(1..=5).contains(&self.m) {
            return bad(format!("m = {} outside 1..=5", self.m));
        }
        if self.n_min == 0 || self.n_min > self.n_max {
            return bad(format!("task range {}..={} is empty", self.n_min, self.n_max));
        }
        if self.restarts == 0 || self.steps_per_restart == 0 || self.solver_node_budget == 0 {
            return bad("restarts, steps and node budget must be positive".into());
        }
        if !(self.step_scale > 0.0 && self.step_scale <= 1.0) {
            return bad(format!("step_scale {} not in (0, 1]", self.step_scale));
        }
        if let Some(i) = self.seed_instances.iter().find(|i| i.m() != self.m) {
            return bad(format!("seed instance has m = {}, expected {}", i.m(), self.m));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartOutcome {
    pub restart: usize,
    pub instance: Instance,
    pub ratio: f64,
    pub evaluated: u64,
    pub skipped: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub best_instance: Instance,
    pub best_ratio: f64,
    /// ρ_m for the searched m.
    pub ratio_bound: f64,
    pub exceeded: bool,
    pub instances_evaluated: u64,
    pub candidates_skipped: u64,
    pub best_restart: usize,
}

/// Re-sorts and rescales so the smallest task has size 1.
fn project(speeds: Vec<f64>, sizes: Vec<f64>) -> Option<Instance> {
    let inst = Instance::sorted(speeds, sizes).ok()?;
    normalize_sizes(&inst).ok()
}

fn run_restart(config: &SearchConfig, restart: usize) -> Option<RestartOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ restart as u64);
    let span = config.n_max - config.n_min + 1;
    let start = match config.seed_instances.get(restart) {
        Some(seed) => seed.clone(),
        None => {
            let n = config.n_min + restart % span;
            random_instance(&mut rng, config.m, n, SAMPLE_RANGE.0, SAMPLE_RANGE.1)
        }
    };
    let mut evaluated = 1;
    let mut skipped = 0;
    let mut current = project(start.speeds().to_vec(), start.sizes().to_vec())?;
    let mut current_ratio = match approx_ratio(&current, config.solver_node_budget) {
        Ok(r) => r.ratio,
        Err(_) => {
            return None;
        }
    };

    let (m, n) = (current.m(), current.n());
    for _ in 0..config.steps_per_restart {
        let coord = rng.random_range(0..m + n);
        let factor = (1.0 + config.step_scale * rng.random_range(-1.0..1.0)).max(1e-3);
        let mut speeds = current.speeds().to_vec();
        let mut sizes = current.sizes().to_vec();
        if coord < m {
            speeds[coord] *= factor;
        } else {
            sizes[coord - m] *= factor;
        }
        let Some(candidate) = project(speeds, sizes) else {
            skipped += 1;
            continue;
        };
        evaluated += 1;
        match approx_ratio(&candidate, config.solver_node_budget) {
            Ok(r) if r.ratio > current_ratio => {
                current = candidate;
                current_ratio = r.ratio;
            }
            Ok(_) => {}
            Err(_) => skipped += 1,
        }
    }
    Some(RestartOutcome {
        restart,
        instance: current,
        ratio: current_ratio,
        evaluated,
        skipped,
    })
}

/// Runs every restart and returns the per-restart final states, ordered by
/// restart index. Restarts whose start could not be evaluated are absent.
pub fn search_restarts(config: &SearchConfig) -> Result<Vec<RestartOutcome>> {
    config.validate()?;
    Ok((0..config.restarts)
        .into_par_iter()
        .filter_map(|r| run_restart(config, r))
        .collect())
}

/// Multi-restart hill climbing on the LPT/OPT ratio.
///
/// Each restart perturbs one speed or size at a time by a random factor in
/// `1 ± step_scale` and keeps the change only if the ratio strictly
/// improves. Restart `r` is seeded with `seed ^ r`, so the result does not
/// depend on scheduling of the parallel restarts.
pub fn search_worst(config: &SearchConfig) -> Result<SearchResult> {
    let outcomes = search_restarts(config)?;
    let bound = rho(config.m)?;
    let evaluated = outcomes.iter().map(|o| o.evaluated).sum();
    let skipped = outcomes.iter().map(|o| o.skipped).sum::<u64>()
        + (config.restarts - outcomes.len()) as u64;
    let best = outcomes
        .into_iter()
        .reduce(|a, b| if b.ratio > a.ratio { b } else { a })
        .ok_or_else(|| Error::InvalidConfig("no restart produced an evaluable instance".into()))?;
    Ok(SearchResult {
        exceeded: best.ratio > bound + EXCEED_TOL,
        best_instance: best.instance,
        best_ratio: best.ratio,
        ratio_bound: bound,
        instances_evaluated: evaluated,
        candidates_skipped: skipped,
        best_restart: best.restart,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CeilingReport {
    pub m: usize,
    pub n: usize,
    pub samples: usize,
    pub evaluated: usize,
    pub skipped: usize,
    pub max_ratio: f64,
    pub argmax: Option<Instance>,
    pub ratio_bound: f64,
    /// `max_ratio <= ratio_bound + EXCEED_TOL`.
    pub within_bound: bool,
    pub strictly_below: bool,
}

/// Sample `index` of the stream selected by `seed`; independent of other indices.
pub fn sample(m: usize, n: usize, seed: u64, index: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    random_instance(&mut rng, m, n, SAMPLE_RANGE.0, SAMPLE_RANGE.1)
}

/// Draws `samples` random instances and records the largest ratio seen.
pub fn ratio_ceiling_check(
    m: usize,
    n: usize,
    samples: usize,
    seed: u64,
    node_budget: u64,
) -> Result<CeilingReport> {
    if m == 0 || n == 0 {
        return Err(Error::OutOfRange {
            what: "m/n",
            detail: format!("m = {m}, n = {n}"),
        });
    }
    let bound = rho(m)?;
    let results: Vec<(usize, Option<f64>)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let inst = sample(m, n, seed, i);
            (i, approx_ratio(&inst, node_budget).ok().map(|r| r.ratio))
        })
        .collect();
    let evaluated = results.iter().filter(|(_, r)| r.is_some()).count();
    let best = results
        .iter()
        .filter_map(|&(i, r)| r.map(|r| (i, r)))
        .reduce(|a, b| if b.1 > a.1 { b } else { a });
    let (max_ratio, argmax) = match best {
        Some((i, r)) => (r, Some(sample(m, n, seed, i))),
        None => (f64::NAN, None),
    };
    Ok(CeilingReport {
        m,
        n,
        samples,
        evaluated,
        skipped: samples - evaluated,
        max_ratio,
        argmax,
        ratio_bound: bound,
        within_bound: max_ratio <= bound + EXCEED_TOL,
        strictly_below: max_ratio < bound,
    })
}
