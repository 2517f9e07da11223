//! Necessary conditions for minimality, checked on concrete instances.
//!
//! An instance is *minimal* when every instance with no more processors and
//! no more tasks (and not the same size) has a strictly smaller LPT ratio.
//! Each check below is a necessary condition for minimality; a failing check
//! certifies that the instance is not minimal. Passing all checks never
//! proves minimality.
//!
//! All checks run on the normalized instance (`t(n) = 1`, `OPT = 1`). The
//! truncated LPT sets `T'(p)` are the LPT task sets with the last task `n`
//! removed, and `T*(p)` are the task sets of one load-ordered optimal
//! witness.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{opt_bnb, OptResult};
use crate::lpt::lpt_schedule;
use crate::model::{normalize_opt, normalize_sizes, Instance, Schedule};

/// Slack applied to every inequality.
pub const EPS: f64 = 1e-9;
/// Largest `|T'(p)|^|T*(q)|` the domination check will enumerate.
pub const DEFAULT_MAPPING_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Holds,
    Fails,
    Inapplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl Condition {
    fn new(name: &'static str, status: Status, detail: impl Into<String>) -> Self {
        Condition {
            name,
            status,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedNonMinimal,
    ConsistentWithMinimality,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificationReport {
    pub verdict: Verdict,
    #[serde(rename = "rho_I")]
    pub rho_i: f64,
    pub conditions: Vec<Condition>,
}

impl CertificationReport {
    fn from_conditions(rho_i: f64, conditions: Vec<Condition>) -> Self {
        let verdict = if conditions.iter().any(|c| c.status == Status::Fails) {
            Verdict::CertifiedNonMinimal
        } else {
            Verdict::ConsistentWithMinimality
        };
        CertificationReport {
            verdict,
            rho_i,
            conditions,
        }
    }

    pub fn is_non_minimal(&self) -> bool {
        self.verdict == Verdict::CertifiedNonMinimal
    }

    pub fn to_json(&self) -> String {
        crate::json::to_string(self)
    }
}

/// LPT task sets and loads with the last task removed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncatedLpt {
    pub tasks: Vec<Vec<usize>>,
    pub loads: Vec<f64>,
}

pub fn lpt_minus_last(instance: &Instance) -> TruncatedLpt {
    truncate(instance, &lpt_schedule(instance))
}

fn truncate(instance: &Instance, lpt: &Schedule) -> TruncatedLpt {
    let last = instance.n() - 1;
    let mut tasks = vec![Vec::new(); instance.m()];
    let mut loads = vec![0.0; instance.m()];
    for (i, &p) in lpt.assignment.iter().enumerate().take(last) {
        tasks[p].push(i);
        loads[p] += instance.sizes()[i];
    }
    TruncatedLpt { tasks, loads }
}

/// Everything the checks need, computed once on the normalized instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Evidence {
    pub instance: Instance,
    pub lpt: Schedule,
    pub truncated: TruncatedLpt,
    pub witness: OptResult,
    /// Measured ratio LPT/OPT.
    pub rho: f64,
    pub mapping_cap: u64,
}

impl Evidence {
    /// Normalizes sizes and speeds, then solves and runs LPT.
    pub fn gather(instance: &Instance, node_budget: u64) -> Result<Self> {
        let sized = normalize_sizes(instance)?;
        let opt = opt_bnb(&sized, node_budget)?;
        let normalized = normalize_opt(&sized, opt.makespan)?;
        Self::build(normalized, node_budget)
    }

    /// Accepts an instance that is already normalized (within [`EPS`]).
    pub fn from_normalized(instance: &Instance, node_budget: u64) -> Result<Self> {
        if (instance.smallest_size() - 1.0).abs() > EPS {
            return Err(Error::NotNormalized(format!(
                "smallest size is {}, expected 1",
                instance.smallest_size()
            )));
        }
        let ev = Self::build(instance.clone(), node_budget)?;
        if (ev.witness.makespan - 1.0).abs() > EPS {
            return Err(Error::NotNormalized(format!(
                "optimal makespan is {}, expected 1",
                ev.witness.makespan
            )));
        }
        Ok(ev)
    }

    fn build(instance: Instance, node_budget: u64) -> Result<Self> {
        let witness = opt_bnb(&instance, node_budget)?;
        let lpt = lpt_schedule(&instance);
        let truncated = truncate(&instance, &lpt);
        let rho = lpt.makespan / witness.makespan;
        Ok(Evidence {
            instance,
            lpt,
            truncated,
            witness,
            rho,
            mapping_cap: DEFAULT_MAPPING_CAP,
        })
    }

    fn optimal_tasks(&self, p: usize) -> Vec<usize> {
        self.witness.tasks_on(p)
    }
}

fn one_based(ps: &[usize]) -> String {
    ps.iter().map(|p| (p + 1).to_string()).collect::<Vec<_>>().join(",")
}

/// Whether `items` can be mapped onto `capacities` so no capacity is
/// exceeded (with `eps` slack). Exhaustive over all mappings, refusing when
/// `capacities.len() ^ items.len()` exceeds `cap`.
pub fn packs_into(items: &[f64], capacities: &[f64], eps: f64, cap: u64) -> Result<bool> {
    if items.is_empty() {
        return Ok(true);
    }
    if capacities.is_empty() {
        return Ok(false);
    }
    let mappings = (capacities.len() as u64).checked_pow(items.len() as u32);
    if mappings.is_none_or(|c| c > cap) {
        return Err(Error::MappingCap {
            items: items.len(),
            targets: capacities.len(),
            cap,
        });
    }
    let mut order: Vec<f64> = items.to_vec();
    order.sort_by(|a, b| b.total_cmp(a));
    let mut room = capacities.to_vec();
    Ok(place(&order, &mut room, eps))
}

fn place(items: &[f64], room: &mut [f64], eps: f64) -> bool {
    let Some((&item, rest)) = items.split_first() else {
        return true;
    };
    for k in 0..room.len() {
        if item <= room[k] + eps {
            room[k] -= item;
            let ok = place(rest, room, eps);
            room[k] += item;
            if ok {
                return true;
            }
        }
    }
    false
}

/// Processor `p` dominates `q` when `s(p) <= s(q)` and the optimal tasks of
/// `q` can be mapped onto the truncated LPT tasks of `p` without any target
/// task receiving more than its own size. `p == q` is allowed.
pub fn dominates(ev: &Evidence, p: usize, q: usize) -> Result<bool> {
    let speeds = ev.instance.speeds();
    if speeds[p] > speeds[q] + EPS {
        return Ok(false);
    }
    let sizes = ev.instance.sizes();
    let items: Vec<f64> = ev.optimal_tasks(q).iter().map(|&j| sizes[j]).collect();
    let capacities: Vec<f64> = ev.truncated.tasks[p].iter().map(|&i| sizes[i]).collect();
    packs_into(&items, &capacities, EPS, ev.mapping_cap)
}

pub fn check_no_domination(ev: &Evidence) -> Condition {
    const NAME: &str = "no-domination";
    let m = ev.instance.m();
    let mut found = Vec::new();
    for p in 0..m {
        for q in 0..m {
            match dominates(ev, p, q) {
                Ok(true) => found.push((p, q)),
                Ok(false) => {}
                Err(e) => return Condition::new(NAME, Status::Inapplicable, e.to_string()),
            }
        }
    }
    if found.is_empty() {
        Condition::new(NAME, Status::Holds, "no processor dominates any processor")
    } else {
        let pairs: Vec<String> = found
            .iter()
            .map(|(p, q)| format!("{}→{}", p + 1, q + 1))
            .collect();
        Condition::new(NAME, Status::Fails, format!("dominating pairs p→q: {}", pairs.join(", ")))
    }
}

/// `(w'(p) + 1) / s(p) >= ρ_I` on every processor.
pub fn check_workload_bound(ev: &Evidence) -> Condition {
    const NAME: &str = "workload-bound";
    let speeds = ev.instance.speeds();
    let values: Vec<f64> = ev
        .truncated
        .loads
        .iter()
        .zip(speeds)
        .map(|(w, s)| (w + 1.0) / s)
        .collect();
    let failing: Vec<usize> = (0..values.len())
        .filter(|&p| values[p] < ev.rho - EPS)
        .collect();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if failing.is_empty() {
        Condition::new(NAME, Status::Holds, format!("min (w'+1)/s = {min:.9} >= rho_I = {:.9}", ev.rho))
    } else {
        Condition::new(
            NAME,
            Status::Fails,
            format!(
                "(w'+1)/s below rho_I = {:.9} at processors {} (min {min:.9})",
                ev.rho,
                one_based(&failing)
            ),
        )
    }
}

/// Empty processors and single-task fastest processors.
pub fn check_structural(ev: &Evidence) -> Vec<Condition> {
    let m = ev.instance.m();
    let mut out = Vec::with_capacity(3);

    let empty: Vec<usize> = (0..m).filter(|&p| ev.optimal_tasks(p).is_empty()).collect();
    out.push(if empty.is_empty() {
        Condition::new(
            "empty-processor",
            Status::Holds,
            "witness uses every processor (other optimal schedules not examined)",
        )
    } else {
        Condition::new(
            "empty-processor",
            Status::Fails,
            format!("optimal witness leaves processors {} empty", one_based(&empty)),
        )
    });

    let empty_trunc: Vec<usize> = (0..m).filter(|&p| ev.truncated.tasks[p].is_empty()).collect();
    out.push(if empty_trunc.is_empty() {
        Condition::new("empty-truncated-lpt", Status::Holds, "every T'(p) is non-empty")
    } else if ev.rho <= 1.0 + EPS {
        Condition::new(
            "empty-truncated-lpt",
            Status::Holds,
            format!("T'(p) empty at {} but rho_I = 1", one_based(&empty_trunc)),
        )
    } else {
        Condition::new(
            "empty-truncated-lpt",
            Status::Fails,
            format!("T'(p) empty at processors {} with rho_I > 1", one_based(&empty_trunc)),
        )
    });

    out.push(if m < 2 {
        Condition::new("fastest-processor-tasks", Status::Inapplicable, "needs m >= 2")
    } else {
        let count = ev.optimal_tasks(0).len();
        let status = if count >= 2 { Status::Holds } else { Status::Fails };
        Condition::new("fastest-processor-tasks", status, format!("|T*(1)| = {count}"))
    });
    out
}

/// `(m - 1) / (m' - 1)` style ceiling: the largest total size a minimal
/// normalized instance with ratio `rho` can have.
pub fn task_count_bound(m: usize, rho: f64) -> f64 {
    (m as f64 - 1.0) / (rho - 1.0)
}

/// `n <= Σ t(i) <= (m - 1) / (ρ_I - 1)`.
pub fn check_task_count(ev: &Evidence) -> Condition {
    const NAME: &str = "task-count";
    if ev.rho <= 1.0 + EPS {
        return Condition::new(NAME, Status::Inapplicable, "rho_I = 1");
    }
    let total = ev.instance.total_size();
    let n = ev.instance.n() as f64;
    let bound = task_count_bound(ev.instance.m(), ev.rho);
    let ok = n <= total + EPS && total <= bound + EPS;
    let detail = format!("n = {n}, sum t = {total:.9}, (m-1)/(rho_I-1) = {bound:.9}");
    Condition::new(NAME, if ok { Status::Holds } else { Status::Fails }, detail)
}

/// Speed/workload regime and the ratio ceiling for `n = m + 2`.
pub fn check_ratio_regime(ev: &Evidence) -> Vec<Condition> {
    let (m, n) = (ev.instance.m(), ev.instance.n());
    let mut out = Vec::with_capacity(2);

    out.push(if ev.rho <= 1.0 + EPS {
        Condition::new("speed-workload", Status::Inapplicable, "rho_I = 1")
    } else {
        let threshold = 1.0 / (ev.rho - 1.0);
        let speeds = ev.instance.speeds();
        let fast: Vec<usize> = (0..m).filter(|&p| speeds[p] > threshold + EPS).collect();
        let failing: Vec<usize> = fast
            .iter()
            .copied()
            .filter(|&p| ev.truncated.loads[p] < speeds[p] - EPS)
            .collect();
        let mut detail = format!("1/(rho_I-1) = {threshold:.9}; fast processors [{}]", one_based(&fast));
        if failing.is_empty() {
            Condition::new("speed-workload", Status::Holds, detail)
        } else {
            let _ = write!(detail, "; w'(p) < s(p) at {}", one_based(&failing));
            Condition::new("speed-workload", Status::Fails, detail)
        }
    });

    out.push(if n != m + 2 || m < 3 {
        Condition::new("ratio-below-1.5", Status::Inapplicable, "needs n = m + 2 and m >= 3")
    } else if ev.rho >= 1.5 + EPS {
        Condition::new("ratio-below-1.5", Status::Fails, format!("rho_I = {:.9} >= 1.5", ev.rho))
    } else {
        Condition::new("ratio-below-1.5", Status::Holds, format!("rho_I = {:.9} < 1.5", ev.rho))
    });
    out
}

/// Runs every check in a fixed order.
pub fn certify_evidence(ev: &Evidence) -> CertificationReport {
    let mut conditions = check_structural(ev);
    conditions.push(check_workload_bound(ev));
    conditions.push(check_no_domination(ev));
    conditions.push(check_task_count(ev));
    conditions.extend(check_ratio_regime(ev));
    CertificationReport::from_conditions(ev.rho, conditions)
}

/// Normalizes the instance, solves it exactly and runs every check.
///
/// A solver budget refusal is reported as an inapplicable `exact-solve`
/// entry rather than an error. Invalid or degenerate instances are errors.
pub fn certify(instance: &Instance, node_budget: u64) -> Result<CertificationReport> {
    match Evidence::gather(instance, node_budget) {
        Ok(ev) => Ok(certify_evidence(&ev)),
        Err(e @ Error::BudgetExhausted { .. }) => Ok(CertificationReport::from_conditions(
            f64::NAN,
            vec![Condition::new("exact-solve", Status::Inapplicable, e.to_string())],
        )),
        Err(e) => Err(e),
    }
}
