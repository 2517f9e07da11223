//! Exact optimal makespan for small instances.
//!
//! Two solvers share one search space: [`opt_enumerate`] walks all `m^n`
//! assignments and serves as the oracle, [`opt_bnb`] is a depth-first
//! branch-and-bound. Both minimize over *load-ordered* assignments, those
//! whose processor loads are non-increasing once loads of equal-speed
//! processors are sorted among themselves. Moving the heavier of two bundles
//! onto the faster processor never raises the makespan, so this set always
//! contains an optimum, and the returned witness satisfies
//! `w*(1) >= ... >= w*(m)`. Because both solvers evaluate makespans through
//! [`Schedule::from_assignment`] over the same set, they agree bit-for-bit.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lpt::lpt_schedule;
use crate::model::{Instance, Schedule};

pub const DEFAULT_ENUMERATION_CAP: u64 = 100_000_000;
pub const DEFAULT_NODE_BUDGET: u64 = 20_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptResult {
    pub makespan: f64,
    /// Witness: `assignment[i]` is the processor of task `i`.
    pub assignment: Vec<usize>,
    /// Witness loads, non-increasing.
    pub loads: Vec<f64>,
    pub nodes_explored: u64,
}

impl OptResult {
    pub fn schedule(&self, instance: &Instance) -> Schedule {
        Schedule::from_assignment(instance, self.assignment.clone())
    }

    /// Task indices of the witness on processor `p`.
    pub fn tasks_on(&self, p: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &q)| q == p)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Start index of the equal-speed run containing each processor.
fn speed_runs(speeds: &[f64]) -> Vec<usize> {
    let mut start = vec![0; speeds.len()];
    for p in 1..speeds.len() {
        start[p] = if speeds[p] == speeds[p - 1] { start[p - 1] } else { p };
    }
    start
}

/// Whether loads are non-increasing up to reordering within equal-speed runs.
fn is_load_ordered(loads: &[f64], run_start: &[usize]) -> bool {
    let mut prev_min = f64::INFINITY;
    let mut p = 0;
    while p < loads.len() {
        let mut q = p;
        let (mut lo, mut hi) = (loads[p], loads[p]);
        while q + 1 < loads.len() && run_start[q + 1] == p {
            q += 1;
            lo = lo.min(loads[q]);
            hi = hi.max(loads[q]);
        }
        if hi > prev_min {
            return false;
        }
        prev_min = lo;
        p = q + 1;
    }
    true
}

/// Relabels processors inside each equal-speed run so loads are
/// non-increasing there. Finish times are unchanged bit-for-bit.
fn sort_within_runs(instance: &Instance, assignment: &[usize]) -> Vec<usize> {
    let base = Schedule::from_assignment(instance, assignment.to_vec());
    let runs = speed_runs(instance.speeds());
    let mut relabel: Vec<usize> = (0..instance.m()).collect();
    let mut p = 0;
    while p < instance.m() {
        let mut q = p;
        while q + 1 < instance.m() && runs[q + 1] == p {
            q += 1;
        }
        let mut members: Vec<usize> = (p..=q).collect();
        members.sort_by(|&a, &b| base.loads[b].total_cmp(&base.loads[a]).then(a.cmp(&b)));
        for (slot, &old) in members.iter().enumerate() {
            relabel[old] = p + slot;
        }
        p = q + 1;
    }
    assignment.iter().map(|&p| relabel[p]).collect()
}

/// Relabels processors so bundle loads are non-increasing overall.
fn sort_all_bundles(instance: &Instance, assignment: &[usize]) -> Vec<usize> {
    let base = Schedule::from_assignment(instance, assignment.to_vec());
    let mut order: Vec<usize> = (0..instance.m()).collect();
    order.sort_by(|&a, &b| base.loads[b].total_cmp(&base.loads[a]).then(a.cmp(&b)));
    let mut relabel = vec![0; instance.m()];
    for (slot, &old) in order.iter().enumerate() {
        relabel[old] = slot;
    }
    assignment.iter().map(|&p| relabel[p]).collect()
}

fn finish(instance: &Instance, assignment: Vec<usize>, nodes: u64) -> OptResult {
    let assignment = sort_within_runs(instance, &assignment);
    let sched = Schedule::from_assignment(instance, assignment);
    debug_assert!(lower_bounds_hold(instance, sched.makespan));
    OptResult {
        makespan: sched.makespan,
        assignment: sched.assignment,
        loads: sched.loads,
        nodes_explored: nodes,
    }
}

fn lower_bounds_hold(instance: &Instance, opt: f64) -> bool {
    let slack = 1e-12 * opt.max(1.0);
    let average = instance.total_size() / instance.total_speed();
    let largest = instance.sizes()[0] / instance.speeds()[0];
    opt + slack >= average && opt + slack >= largest
}

pub fn opt_enumerate(instance: &Instance) -> Result<OptResult> {
    opt_enumerate_with_cap(instance, DEFAULT_ENUMERATION_CAP)
}

/// Exhaustive search over all `m^n` assignments; refuses above `cap`.
pub fn opt_enumerate_with_cap(instance: &Instance, cap: u64) -> Result<OptResult> {
    let (m, n) = (instance.m(), instance.n());
    let total = (m as u64).checked_pow(n as u32);
    if total.is_none_or(|t| t > cap) {
        return Err(Error::EnumerationCap { m, n, cap });
    }
    let runs = speed_runs(instance.speeds());
    let sizes = instance.sizes();
    let speeds = instance.speeds();

    let mut assignment = vec![0usize; n];
    let mut loads = vec![0.0f64; m];
    let mut best = f64::INFINITY;
    let mut best_assignment = assignment.clone();
    let mut evaluated = 0u64;
    loop {
        evaluated += 1;
        loads.iter_mut().for_each(|w| *w = 0.0);
        for (i, &p) in assignment.iter().enumerate() {
            loads[p] += sizes[i];
        }
        if is_load_ordered(&loads, &runs) {
            let makespan = loads
                .iter()
                .zip(speeds)
                .map(|(w, s)| w / s)
                .fold(0.0, f64::max);
            if makespan < best {
                best = makespan;
                best_assignment.copy_from_slice(&assignment);
            }
        }
        // Odometer increment, last task fastest.
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(finish(instance, best_assignment, evaluated));
            }
            k -= 1;
            assignment[k] += 1;
            if assignment[k] < m {
                break;
            }
            assignment[k] = 0;
        }
    }
}

struct Search<'a> {
    sizes: &'a [f64],
    speeds: &'a [f64],
    runs: Vec<usize>,
    /// `remaining[k]` = total size of tasks `k..n`.
    remaining: Vec<f64>,
    total_speed: f64,
    loads: Vec<f64>,
    counts: Vec<usize>,
    assignment: Vec<usize>,
    best: f64,
    best_assignment: Vec<usize>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl Search<'_> {
    fn descend(&mut self, k: usize, partial: f64, placed: f64) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        if k == self.sizes.len() {
            if partial < self.best && is_load_ordered(&self.loads, &self.runs) {
                self.best = partial;
                self.best_assignment.copy_from_slice(&self.assignment);
            }
            return;
        }
        let size = self.sizes[k];
        let average = (placed + self.remaining[k]) / self.total_speed;
        for p in 0..self.speeds.len() {
            // Empty equal-speed processors are interchangeable: use the first.
            if self.counts[p] == 0 && self.runs[p] < p && self.counts[p - 1] == 0 {
                continue;
            }
            let load = self.loads[p] + size;
            let next = partial.max(load / self.speeds[p]);
            if next >= self.best {
                continue;
            }
            let mut bound = next.max(average);
            if let Some(&following) = self.sizes.get(k + 1) {
                let mut cheapest = f64::INFINITY;
                for q in 0..self.speeds.len() {
                    let w = if q == p { load } else { self.loads[q] };
                    cheapest = cheapest.min((w + following) / self.speeds[q]);
                }
                bound = bound.max(cheapest);
            }
            // Bounds are evaluated in a different float order than the
            // makespan itself; only prune when clearly above the incumbent.
            if bound > self.best * (1.0 + 1e-12) {
                continue;
            }
            let saved = self.loads[p];
            self.loads[p] = load;
            self.counts[p] += 1;
            self.assignment[k] = p;
            self.descend(k + 1, next, placed + size);
            self.loads[p] = saved;
            self.counts[p] -= 1;
            if self.exhausted {
                return;
            }
        }
    }
}

/// Branch-and-bound over tasks in non-increasing size order.
///
/// Starts from the LPT schedule (with bundles re-sorted onto processors by
/// load) as incumbent. Exceeding `node_budget` yields
/// [`Error::BudgetExhausted`] carrying the incumbent.
pub fn opt_bnb(instance: &Instance, node_budget: u64) -> Result<OptResult> {
    let (m, n) = (instance.m(), instance.n());
    let seed = sort_within_runs(instance, &sort_all_bundles(instance, &lpt_schedule(instance).assignment));
    let seed_makespan = Schedule::from_assignment(instance, seed.clone()).makespan;

    let mut remaining = vec![0.0; n + 1];
    for k in (0..n).rev() {
        remaining[k] = remaining[k + 1] + instance.sizes()[k];
    }
    let mut search = Search {
        sizes: instance.sizes(),
        speeds: instance.speeds(),
        runs: speed_runs(instance.speeds()),
        remaining,
        total_speed: instance.total_speed(),
        loads: vec![0.0; m],
        counts: vec![0; m],
        assignment: vec![0; n],
        best: seed_makespan,
        best_assignment: seed,
        nodes: 0,
        budget: node_budget,
        exhausted: false,
    };
    search.descend(0, 0.0, 0.0);
    let (nodes, exhausted, best_assignment) = (search.nodes, search.exhausted, search.best_assignment);
    let result = finish(instance, best_assignment, nodes);
    if exhausted {
        return Err(Error::BudgetExhausted {
            budget: node_budget,
            incumbent: Box::new(result),
        });
    }
    Ok(result)
}

/// Exact solve with the default node budget.
pub fn solve(instance: &Instance) -> Result<OptResult> {
    opt_bnb(instance, DEFAULT_NODE_BUDGET)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inst(s: &[f64], t: &[f64]) -> Instance {
        Instance::new(s.to_vec(), t.to_vec()).unwrap()
    }

    /// Plain minimum over every assignment, no ordering restriction.
    fn brute_min(i: &Instance) -> f64 {
        let (m, n) = (i.m(), i.n());
        let mut best = f64::INFINITY;
        for code in 0..(m as u64).pow(n as u32) {
            let mut c = code;
            let a: Vec<usize> = (0..n)
                .map(|_| {
                    let p = (c % m as u64) as usize;
                    c /= m as u64;
                    p
                })
                .collect();
            best = best.min(Schedule::from_assignment(i, a).makespan);
        }
        best
    }

    #[test]
    fn symmetric_split() {
        let r = opt_enumerate(&inst(&[1.0, 1.0], &[1.0, 1.0])).unwrap();
        assert_eq!(r.makespan, 1.0);
    }

    #[test]
    fn graham_example_opt_is_six() {
        let i = inst(&[1.0, 1.0], &[3.0, 3.0, 2.0, 2.0, 2.0]);
        let r = opt_enumerate(&i).unwrap();
        assert_eq!(r.makespan, 6.0);
        assert_eq!(r.nodes_explored, 32);
        assert_eq!(r.loads, vec![6.0, 6.0]);
        let b = opt_bnb(&i, 1_000_000).unwrap();
        assert_eq!(b.makespan, 6.0);
    }

    #[test]
    fn gis_three_witness() {
        let i = inst(&[2.0, 1.767382, 1.445564], &[1.767382, 1.445564, 1.0, 1.0]);
        let r = opt_enumerate(&i).unwrap();
        assert_eq!(r.nodes_explored, 81);
        assert!((r.makespan - 1.0).abs() < 1e-12);
        assert_eq!(r.tasks_on(0), vec![2, 3]);
        assert_eq!(r.tasks_on(1), vec![0]);
        assert_eq!(r.tasks_on(2), vec![1]);
    }

    #[test]
    fn single_processor_sums() {
        let i = inst(&[2.0], &[3.0, 2.0, 1.0]);
        assert_eq!(opt_bnb(&i, 100).unwrap().makespan, 3.0);
    }

    #[test]
    fn equal_sizes_one_per_processor() {
        let i = inst(&[3.0, 2.0, 1.5], &[2.0, 2.0, 2.0]);
        let r = opt_bnb(&i, 10_000).unwrap();
        assert_eq!(r.makespan, opt_enumerate(&i).unwrap().makespan);
        assert!((r.makespan - 2.0 / 1.5).abs() < 1e-15);
    }

    #[test]
    fn enumeration_cap_refuses() {
        let i = inst(&[1.0; 5], &[1.0; 12]);
        assert!(matches!(
            opt_enumerate_with_cap(&i, 1000),
            Err(Error::EnumerationCap { .. })
        ));
    }

    #[test]
    fn budget_exhaustion_is_explicit() {
        let i = inst(&[1.9, 1.7, 1.3, 1.1, 1.0], &[9.1, 7.3, 6.2, 5.9, 4.4, 3.3, 2.9, 2.1, 1.7, 1.2]);
        match opt_bnb(&i, 3) {
            Err(Error::BudgetExhausted { incumbent, budget }) => {
                assert_eq!(budget, 3);
                assert!(incumbent.makespan >= opt_bnb(&i, DEFAULT_NODE_BUDGET).unwrap().makespan);
            }
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn empty_processors_sit_last() {
        let i = inst(&[1.0, 2.0f64.sqrt() / 2.0, 0.5], &[1.0]);
        let r = opt_enumerate(&i).unwrap();
        assert_eq!(r.assignment, vec![0]);
        assert_eq!(r.loads, vec![1.0, 0.0, 0.0]);
    }

    fn arb_small() -> impl Strategy<Value = Instance> {
        (
            prop::collection::vec(prop_oneof![1.0f64..4.0, Just(2.0)], 1..5),
            prop::collection::vec(prop_oneof![1.0f64..4.0, Just(1.0)], 1..7),
        )
            .prop_map(|(s, t)| Instance::sorted(s, t).unwrap())
    }

    proptest! {
        #[test]
        fn bnb_matches_enumeration(i in arb_small()) {
            let e = opt_enumerate(&i).unwrap();
            let b = opt_bnb(&i, DEFAULT_NODE_BUDGET).unwrap();
            prop_assert_eq!(e.makespan.to_bits(), b.makespan.to_bits());
        }

        #[test]
        fn witness_is_consistent_and_sorted(i in arb_small()) {
            let r = opt_bnb(&i, DEFAULT_NODE_BUDGET).unwrap();
            let s = r.schedule(&i);
            prop_assert_eq!(s.makespan.to_bits(), r.makespan.to_bits());
            prop_assert_eq!(&s.loads, &r.loads);
            prop_assert!(r.loads.windows(2).all(|w| w[0] >= w[1]));
        }

        #[test]
        fn matches_unrestricted_minimum(i in arb_small()) {
            let r = opt_bnb(&i, DEFAULT_NODE_BUDGET).unwrap();
            let plain = brute_min(&i);
            prop_assert!(plain <= r.makespan);
            prop_assert!(r.makespan - plain <= 1e-12 * plain);
        }

        #[test]
        fn lower_and_upper_bounds(i in arb_small()) {
            let r = opt_bnb(&i, DEFAULT_NODE_BUDGET).unwrap();
            prop_assert!(lower_bounds_hold(&i, r.makespan));
            prop_assert!(r.makespan <= lpt_schedule(&i).makespan);
        }
    }
}
