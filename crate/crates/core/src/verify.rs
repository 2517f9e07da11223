//! Reproducible checks of the ratio table, the tight family, the classical
//! bounds and the exact solver. Each check returns an [`Outcome`] and the
//! whole suite is reachable from `uniform-lpt verify`.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{approx_ratio, char_poly, char_poly_sum, graham_bound, max_positive_root, rho, DEFAULT_ROOT_TOL};
use crate::certify::{certify, lpt_minus_last, Verdict};
use crate::error::Result;
use crate::exact::{opt_bnb, opt_enumerate, DEFAULT_NODE_BUDGET};
use crate::lpt::lpt_schedule;
use crate::model::{parse_instance, serialize_instance, Instance};
use crate::worstcase::{
    generate_gis_instance, random_instance, ratio_ceiling_check, sample, search_restarts, search_worst, SearchConfig,
    EXCEED_TOL, SAMPLE_RANGE,
};

/// Base seed for every randomized check.
pub const SEED: u64 = 0x5eed_1a7e;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    pub fn criteria(self) -> &'static [u8] {
        match self {
            Level::Quick => &[1, 2, 3, 4, 5, 8, 9, 10],
            Level::Full => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(serialize_with = "as_millis")]
    pub elapsed: Duration,
}

fn as_millis<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

impl Outcome {
    /// One human-readable line, e.g. `PASS  1 rho-table: ... [0.2 ms]`.
    pub fn line(&self) -> String {
        format!(
            "{} {:>2} {}: {} [{:.1} ms]",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64() * 1e3
        )
    }
}

fn timed(id: u8, name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Outcome {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Outcome {
        id,
        name,
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

pub fn criterion_name(id: u8) -> Option<&'static str> {
    Some(match id {
        1 => "rho-table",
        2 => "tight-family",
        3 => "workload-equality",
        4 => "task-count-tightness",
        5 => "graham-bound",
        6 => "ratio-ceiling",
        7 => "no-minimal-near-worst",
        8 => "solver-equivalence",
        9 => "polynomial-sums",
        10 => "invariants",
        _ => return None,
    })
}

/// Runs one check at its full size. Unknown ids yield `None`.
pub fn run_criterion(id: u8) -> Option<Outcome> {
    let name = criterion_name(id)?;
    Some(match id {
        1 => timed(id, name, rho_table),
        2 => timed(id, name, tight_family),
        3 => timed(id, name, workload_equality),
        4 => timed(id, name, task_count_tightness),
        5 => timed(id, name, || graham_bound_check(10_000)),
        6 => timed(id, name, || ratio_ceiling(&CeilingPlan::FULL)),
        7 => timed(id, name, || no_minimal_near_worst(10_000, 1_000)),
        8 => timed(id, name, || solver_equivalence(10_000)),
        9 => timed(id, name, || polynomial_sums(6, 10_000)),
        10 => timed(id, name, || invariants(1_000)),
        _ => unreachable!(),
    })
}

/// Runs every check of `level` in order, reporting each as it finishes.
pub fn run(level: Level, mut report: impl FnMut(&Outcome)) -> Vec<Outcome> {
    level
        .criteria()
        .iter()
        .filter_map(|&id| run_criterion(id))
        .inspect(|o| report(o))
        .collect()
}

/// ρ_2..ρ_5 round to 1.28, 1.38, 1.43, 1.46, each root has residual at most
/// 1e-9 and takes under a millisecond to find.
pub fn rho_table() -> Result<(bool, String)> {
    let expected = [(2, 1.28), (3, 1.38), (4, 1.43), (5, 1.46)];
    let mut ok = true;
    let mut detail = String::new();
    for (m, want) in expected {
        let poly = char_poly(m)?;
        let start = Instant::now();
        let root = max_positive_root(&poly, DEFAULT_ROOT_TOL)?;
        let took = start.elapsed();
        let residual = poly.eval(root).abs();
        let rounded = (root * 100.0).round() / 100.0;
        let good = (rounded - want).abs() < 1e-12 && residual <= 1e-9 && took < Duration::from_millis(1);
        ok &= good && (root - rho(m)?).abs() <= 1e-12;
        let _ = write!(detail, "rho_{m}={root:.6} ({:.0} us) ", took.as_secs_f64() * 1e6);
    }
    Ok((ok, detail.trim_end().to_string()))
}

/// The tight family has OPT = 1 and ratio ρ_m for m = 2..5, built and
/// solved in under a second.
pub fn tight_family() -> Result<(bool, String)> {
    let start = Instant::now();
    let mut ok = true;
    let mut worst = 0.0f64;
    for m in 2..=5 {
        let inst = generate_gis_instance(m)?;
        let rep = approx_ratio(&inst, DEFAULT_NODE_BUDGET)?;
        let dev = (rep.ratio - rho(m)?).abs();
        worst = worst.max(dev);
        ok &= (rep.opt - 1.0).abs() <= 1e-9 && dev <= 1e-6;
    }
    let took = start.elapsed();
    ok &= took < Duration::from_secs(1);
    Ok((ok, format!("max |ratio - rho_m| = {worst:.2e}, total {took:.2?}")))
}

/// On the tight family every processor has `(w'(p) + 1) / s(p) = ρ_m`.
pub fn workload_equality() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for m in 2..=5 {
        let inst = generate_gis_instance(m)?;
        let r = rho(m)?;
        let t = lpt_minus_last(&inst);
        for (w, s) in t.loads.iter().zip(inst.speeds()) {
            worst = worst.max(((w + 1.0) / s - r).abs());
        }
    }
    Ok((worst <= 1e-6, format!("max |(w'+1)/s - rho_m| = {worst:.2e}")))
}

/// On the tight family `Σ t = (m - 1)/(ρ_m - 1)` and `n <= Σ t`.
pub fn task_count_tightness() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut ok = true;
    for m in 2..=5 {
        let inst = generate_gis_instance(m)?;
        let total = inst.total_size();
        worst = worst.max((total - (m as f64 - 1.0) / (rho(m)? - 1.0)).abs());
        ok &= inst.n() == m + 1 && inst.n() as f64 <= total;
    }
    Ok((ok && worst <= 1e-6, format!("max |sum t - (m-1)/(rho_m-1)| = {worst:.2e}")))
}

/// Identical processors never exceed `4/3 - 1/(3m)`; the two-processor
/// example (3,3,2,2,2) attains 7/6 exactly.
pub fn graham_bound_check(samples_per_m: usize) -> Result<(bool, String)> {
    let mut ok = true;
    let mut detail = String::new();
    for m in 2..=5usize {
        let max = (0..samples_per_m)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(SEED ^ 5, (m * samples_per_m + i) as u64);
                let n = rng.random_range(1..=8);
                let sizes: Vec<f64> = if i % 2 == 0 {
                    (0..n).map(|_| rng.random_range(1..=6) as f64).collect()
                } else {
                    (0..n).map(|_| rng.random_range(SAMPLE_RANGE.0..SAMPLE_RANGE.1)).collect()
                };
                let inst = Instance::sorted(vec![1.0; m], sizes)?;
                Ok(approx_ratio(&inst, DEFAULT_NODE_BUDGET)?.ratio)
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        ok &= max <= graham_bound(m) + 1e-9;
        let _ = write!(detail, "m={m} max {max:.6} <= {:.6}; ", graham_bound(m));
    }
    let ex = Instance::new(vec![1.0, 1.0], vec![3.0, 3.0, 2.0, 2.0, 2.0])?;
    let r = approx_ratio(&ex, DEFAULT_NODE_BUDGET)?;
    ok &= r.lpt == 7.0 && r.opt == 6.0 && r.ratio == 7.0 / 6.0;
    let _ = write!(detail, "example {}/{}", r.lpt, r.opt);
    Ok((ok, detail))
}

/// Sample and search sizes for the ratio ceiling check.
#[derive(Debug, Clone, Copy)]
pub struct CeilingPlan {
    pub ms: &'static [usize],
    pub samples: usize,
    pub restarts: usize,
    pub steps_per_restart: usize,
}

impl CeilingPlan {
    pub const FULL: CeilingPlan = CeilingPlan {
        ms: &[3, 4, 5],
        samples: 100_000,
        restarts: 1_000,
        steps_per_restart: 1_000,
    };
}

/// For each `m` and `n` in `m+1..=m+3`, random sampling plus hill climbing
/// (seeded with the tight instance at `n = m+1`) never exceeds ρ_m, and
/// ρ_m itself is reached at `n = m+1`.
pub fn ratio_ceiling(plan: &CeilingPlan) -> Result<(bool, String)> {
    let mut ok = true;
    let mut detail = String::new();
    for &m in plan.ms {
        let bound = rho(m)?;
        let mut attained = f64::NEG_INFINITY;
        let mut overall = f64::NEG_INFINITY;
        let mut best_sampled = f64::NEG_INFINITY;
        let mut best_unseeded = f64::NEG_INFINITY;
        for n in m + 1..=m + 3 {
            let sampled = ratio_ceiling_check(m, n, plan.samples, SEED ^ (m * 16 + n) as u64, DEFAULT_NODE_BUDGET)?;
            let mut cfg = SearchConfig::new(m, n);
            cfg.n_min = n;
            cfg.restarts = plan.restarts;
            cfg.steps_per_restart = plan.steps_per_restart;
            cfg.seed = SEED ^ (m * 16 + n) as u64;
            if n == m + 1 {
                cfg.seed_instances = vec![generate_gis_instance(m)?];
            }
            let outcomes = search_restarts(&cfg)?;
            let searched = outcomes.iter().map(|o| o.ratio).fold(f64::NEG_INFINITY, f64::max);
            let unseeded = outcomes
                .iter()
                .filter(|o| o.restart >= cfg.seed_instances.len())
                .map(|o| o.ratio)
                .fold(f64::NEG_INFINITY, f64::max);
            best_sampled = best_sampled.max(sampled.max_ratio);
            best_unseeded = best_unseeded.max(unseeded);
            let max = sampled.max_ratio.max(searched);
            ok &= sampled.skipped == 0 && max <= bound + EXCEED_TOL;
            overall = overall.max(max);
            if n == m + 1 {
                attained = max;
            }
        }
        ok &= attained >= bound - 1e-6;
        let _ = write!(
            detail,
            "m={m} max {overall:.9} (rho {bound:.9}, sampled {best_sampled:.6}, unseeded search {best_unseeded:.6}); "
        );
    }
    Ok((ok, detail.trim_end_matches("; ").to_string()))
}

/// At `n = m + 2` no sampled or searched instance comes within 1e-6 of ρ_m
/// while passing every minimality condition.
pub fn no_minimal_near_worst(samples_per_m: usize, restarts: usize) -> Result<(bool, String)> {
    let mut ok = true;
    let mut detail = String::new();
    for m in 3..=5usize {
        let n = m + 2;
        let bound = rho(m)?;
        let prev = rho(m - 1)?;
        let mut pool: Vec<Instance> = (0..samples_per_m).map(|i| sample(m, n, SEED ^ 7 ^ m as u64, i)).collect();
        let mut cfg = SearchConfig::new(m, n);
        cfg.n_min = n;
        cfg.restarts = restarts;
        cfg.seed = SEED ^ 77 ^ m as u64;
        pool.extend(search_restarts(&cfg)?.into_iter().map(|o| o.instance));

        let reports = pool
            .par_iter()
            .map(|inst| certify(inst, DEFAULT_NODE_BUDGET))
            .collect::<Result<Vec<_>>>()?;
        let offending = reports
            .iter()
            .filter(|r| r.verdict == Verdict::ConsistentWithMinimality && r.rho_i >= bound - 1e-6)
            .count();
        let above_prev = reports.iter().filter(|r| r.rho_i > prev + 1e-9).count();
        let best = reports.iter().map(|r| r.rho_i).filter(|r| !r.is_nan()).fold(0.0, f64::max);
        ok &= offending == 0;
        let _ = write!(
            detail,
            "m={m}: {} instances, max ratio {best:.6}, {above_prev} above rho_{}, {offending} offending; ",
            pool.len(),
            m - 1
        );
    }
    Ok((ok, detail.trim_end_matches("; ").to_string()))
}

/// Branch-and-bound agrees bit-for-bit with full enumeration.
pub fn solver_equivalence(samples: usize) -> Result<(bool, String)> {
    let mismatches = (0..samples)
        .into_par_iter()
        .map(|i| {
            let inst = mixed_instance(&mut stream(SEED ^ 8, i as u64), i, 5, 8);
            let a = opt_bnb(&inst, DEFAULT_NODE_BUDGET)?;
            let b = opt_enumerate(&inst)?;
            Ok(usize::from(a.makespan.to_bits() != b.makespan.to_bits()))
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum::<usize>();
    Ok((mismatches == 0, format!("{samples} instances, {mismatches} mismatches")))
}

/// For `m <= max_m` and every non-empty `S ⊆ {1..m}`: the largest positive
/// root of `Σ_{i∈S} P_i` is at most ρ_m, and `Σ_{i∈S} P_i(x) + 3 - 2x` keeps
/// one sign on `(ρ_m, 1.5)`.
pub fn polynomial_sums(max_m: usize, points: usize) -> Result<(bool, String)> {
    let mut ok = true;
    let mut subsets = 0;
    let mut worst_gap = f64::INFINITY;
    for m in 1..=max_m {
        let r = rho(m)?;
        let (lo, hi) = (r + 1e-6, 1.5 - 1e-6);
        for mask in 1u32..(1 << m) {
            let set: Vec<usize> = (1..=m).filter(|i| mask & (1 << (i - 1)) != 0).collect();
            let poly = char_poly_sum(&set)?;
            let root = max_positive_root(&poly, DEFAULT_ROOT_TOL)?;
            ok &= root <= r + 1e-9;
            worst_gap = worst_gap.min(r - root);
            subsets += 1;
            if lo < hi {
                let shifted = poly.plus_linear(3.0, -2.0);
                let first = shifted.eval(lo).signum();
                ok &= first != 0.0
                    && (0..=points).all(|k| {
                        let x = lo + (hi - lo) * k as f64 / points as f64;
                        shifted.eval(x).signum() == first
                    });
            }
        }
    }
    Ok((ok, format!("{subsets} subsets, min rho_m - root = {worst_gap:.2e}")))
}

/// LPT >= OPT, scale invariance of the ratio, determinism of LPT, search
/// and certification, and instance file round trips.
pub fn invariants(samples: usize) -> Result<(bool, String)> {
    let mut failures = Vec::new();
    let checked = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<Vec<&'static str>> {
            let mut rng = stream(SEED ^ 10, i as u64);
            let inst = mixed_instance(&mut rng, i, 5, 8);
            let mut bad = Vec::new();
            let rep = approx_ratio(&inst, DEFAULT_NODE_BUDGET)?;
            if rep.lpt < rep.opt {
                bad.push("lpt-below-opt");
            }
            let c = rng.random_range(0.1..10.0);
            let d = rng.random_range(0.1..10.0);
            let scaled = inst.scale_sizes(c)?.scale_speeds(d)?;
            if (approx_ratio(&scaled, DEFAULT_NODE_BUDGET)?.ratio - rep.ratio).abs() > 1e-12 {
                bad.push("scale-invariance");
            }
            if lpt_schedule(&inst) != lpt_schedule(&inst) {
                bad.push("lpt-determinism");
            }
            if parse_instance(&serialize_instance(&inst))? != inst {
                bad.push("round-trip");
            }
            if i % 10 == 0 && certify(&inst, DEFAULT_NODE_BUDGET)? != certify(&inst, DEFAULT_NODE_BUDGET)? {
                bad.push("certify-determinism");
            }
            Ok(bad)
        })
        .collect::<Result<Vec<_>>>()?;
    for bad in checked {
        failures.extend(bad);
    }

    let mut cfg = SearchConfig::new(3, 5);
    cfg.restarts = 8;
    cfg.steps_per_restart = 50;
    cfg.seed = SEED;
    if search_worst(&cfg)? != search_worst(&cfg)? {
        failures.push("search-determinism");
    }
    failures.sort_unstable();
    failures.dedup();
    let detail = if failures.is_empty() {
        format!("{samples} instances, all invariants hold")
    } else {
        format!("violated: {}", failures.join(", "))
    };
    Ok((failures.is_empty(), detail))
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Alternates between small-integer instances (rich in ties) and
/// continuous ones, with `m` and `n` drawn uniformly.
fn mixed_instance(rng: &mut ChaCha8Rng, i: usize, max_m: usize, max_n: usize) -> Instance {
    let m = rng.random_range(1..=max_m);
    let n = rng.random_range(1..=max_n);
    if i.is_multiple_of(2) {
        let speeds = (0..m).map(|_| rng.random_range(1..=4) as f64).collect();
        let sizes = (0..n).map(|_| rng.random_range(1..=6) as f64).collect();
        Instance::sorted(speeds, sizes).expect("positive integers")
    } else {
        random_instance(rng, m, n, SAMPLE_RANGE.0, SAMPLE_RANGE.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_cover_levels() {
        for level in [Level::Quick, Level::Full] {
            for &id in level.criteria() {
                assert!(criterion_name(id).is_some());
            }
        }
        assert!(criterion_name(0).is_none());
        assert!(run_criterion(11).is_none());
    }

    #[test]
    fn small_runs_pass() {
        assert!(rho_table().unwrap().0);
        assert!(tight_family().unwrap().0);
        assert!(workload_equality().unwrap().0);
        assert!(task_count_tightness().unwrap().0);
        assert!(graham_bound_check(50).unwrap().0);
        assert!(solver_equivalence(50).unwrap().0);
        assert!(polynomial_sums(3, 200).unwrap().0);
        assert!(invariants(30).unwrap().0);
    }

    #[test]
    fn small_ceiling_and_certification() {
        let plan = CeilingPlan {
            ms: &[3],
            samples: 200,
            restarts: 4,
            steps_per_restart: 10,
        };
        let (ok, detail) = ratio_ceiling(&plan).unwrap();
        assert!(ok, "{detail}");
        let (ok, detail) = no_minimal_near_worst(50, 2).unwrap();
        assert!(ok, "{detail}");
    }

    #[test]
    fn outcome_line_format() {
        let o = Outcome {
            id: 3,
            name: "x",
            passed: false,
            detail: "d".into(),
            elapsed: Duration::from_micros(1500),
        };
        assert_eq!(o.line(), "FAIL  3 x: d [1.5 ms]");
    }
}
