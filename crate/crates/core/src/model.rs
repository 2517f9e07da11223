//! Instances, schedules, normalization and the instance file format.
//!
//! An instance is `m` processors with speeds `s(1) >= ... >= s(m) > 0` and
//! `n` tasks with sizes `t(1) >= ... >= t(n) >= 0`. Running task `i` on
//! processor `p` takes `t(i) / s(p)` time units. Indices are 0-based in code
//! and 1-based in human-readable output.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One reason an instance is invalid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoProcessors,
    NoTasks,
    NonFiniteSpeed(usize),
    NonFiniteSize(usize),
    NonPositiveSpeed(usize),
    NegativeSize(usize),
    SpeedsNotSorted(usize),
    SizesNotSorted(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoProcessors => write!(f, "m must be ≥ 1"),
            Violation::NoTasks => write!(f, "n must be ≥ 1"),
            Violation::NonFiniteSpeed(i) => write!(f, "speed {} is not finite", i + 1),
            Violation::NonFiniteSize(i) => write!(f, "size {} is not finite", i + 1),
            Violation::NonPositiveSpeed(i) => write!(f, "speed {} is not positive", i + 1),
            Violation::NegativeSize(i) => write!(f, "size {} is negative", i + 1),
            Violation::SpeedsNotSorted(i) => {
                write!(f, "speeds not non-increasing (at position {})", i + 1)
            }
            Violation::SizesNotSorted(i) => {
                write!(f, "sizes not non-increasing (at position {})", i + 1)
            }
        }
    }
}

/// Collects every invariant violation of a candidate instance.
pub fn validate(speeds: &[f64], sizes: &[f64]) -> std::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    if speeds.is_empty() {
        out.push(Violation::NoProcessors);
    }
    if sizes.is_empty() {
        out.push(Violation::NoTasks);
    }
    for (i, &s) in speeds.iter().enumerate() {
        if !s.is_finite() {
            out.push(Violation::NonFiniteSpeed(i));
        } else if s <= 0.0 {
            out.push(Violation::NonPositiveSpeed(i));
        }
    }
    for (i, &t) in sizes.iter().enumerate() {
        if !t.is_finite() {
            out.push(Violation::NonFiniteSize(i));
        } else if t < 0.0 {
            out.push(Violation::NegativeSize(i));
        }
    }
    if let Some(i) = (1..speeds.len()).find(|&i| speeds[i - 1] < speeds[i]) {
        out.push(Violation::SpeedsNotSorted(i));
    }
    if let Some(i) = (1..sizes.len()).find(|&i| sizes[i - 1] < sizes[i]) {
        out.push(Violation::SizesNotSorted(i));
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// A validated, immutable scheduling instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    speeds: Vec<f64>,
    sizes: Vec<f64>,
    name: Option<String>,
}

impl Instance {
    pub fn new(speeds: Vec<f64>, sizes: Vec<f64>) -> Result<Self> {
        validate(&speeds, &sizes).map_err(Error::InvalidInstance)?;
        Ok(Instance {
            speeds,
            sizes,
            name: None,
        })
    }

    /// Sorts both sequences non-increasingly before validating.
    pub fn sorted(mut speeds: Vec<f64>, mut sizes: Vec<f64>) -> Result<Self> {
        speeds.sort_by(|a, b| b.total_cmp(a));
        sizes.sort_by(|a, b| b.total_cmp(a));
        Self::new(speeds, sizes)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn m(&self) -> usize {
        self.speeds.len()
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn smallest_size(&self) -> f64 {
        *self.sizes.last().expect("n >= 1")
    }

    pub fn total_size(&self) -> f64 {
        self.sizes.iter().sum()
    }

    pub fn total_speed(&self) -> f64 {
        self.speeds.iter().sum()
    }

    /// True when all speeds are equal (the identical-machines case).
    pub fn is_identical(&self) -> bool {
        self.speeds.iter().all(|&s| s == self.speeds[0])
    }

    /// Multiplies every size by `c > 0`.
    pub fn scale_sizes(&self, c: f64) -> Result<Self> {
        let sizes = self.sizes.iter().map(|t| t * c).collect();
        Ok(Instance {
            name: self.name.clone(),
            ..Self::new(self.speeds.clone(), sizes)?
        })
    }

    /// Multiplies every speed by `c > 0`.
    pub fn scale_speeds(&self, c: f64) -> Result<Self> {
        let speeds = self.speeds.iter().map(|s| s * c).collect();
        Ok(Instance {
            name: self.name.clone(),
            ..Self::new(speeds, self.sizes.clone())?
        })
    }
}

/// Rescales sizes so that the smallest task has size exactly 1.
pub fn normalize_sizes(instance: &Instance) -> Result<Instance> {
    let smallest = instance.smallest_size();
    if smallest <= 0.0 {
        return Err(Error::DegenerateInstance);
    }
    let sizes = instance.sizes.iter().map(|t| t / smallest).collect();
    Ok(Instance {
        name: instance.name.clone(),
        ..Instance::new(instance.speeds.clone(), sizes)?
    })
}

/// Rescales speeds by `opt` so that the optimal makespan becomes 1.
pub fn normalize_opt(instance: &Instance, opt: f64) -> Result<Instance> {
    if opt <= 0.0 || !opt.is_finite() {
        return Err(Error::NonPositiveOpt(opt));
    }
    if opt == 1.0 {
        return Ok(instance.clone());
    }
    instance.scale_speeds(opt)
}

/// A complete assignment of tasks to processors with derived loads.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    /// `assignment[i]` is the processor of task `i`.
    pub assignment: Vec<usize>,
    /// Sum of task sizes per processor.
    pub loads: Vec<f64>,
    /// `loads[p] / speeds[p]`.
    pub finish_times: Vec<f64>,
    pub makespan: f64,
}

impl Schedule {
    /// Builds a schedule from an assignment vector.
    ///
    /// Loads are accumulated in task-index order. Every module computes
    /// makespans through this function, so equal assignments always yield
    /// bit-identical makespans.
    pub fn from_assignment(instance: &Instance, assignment: Vec<usize>) -> Schedule {
        assert_eq!(assignment.len(), instance.n(), "assignment length != n");
        let mut loads = vec![0.0; instance.m()];
        for (i, &p) in assignment.iter().enumerate() {
            loads[p] += instance.sizes[i];
        }
        let finish_times: Vec<f64> = loads
            .iter()
            .zip(&instance.speeds)
            .map(|(w, s)| w / s)
            .collect();
        let makespan = finish_times.iter().copied().fold(0.0, f64::max);
        Schedule {
            assignment,
            loads,
            finish_times,
            makespan,
        }
    }

    /// Task indices on processor `p`, in increasing index order.
    pub fn tasks_on(&self, p: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &q)| q == p)
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    m: Option<usize>,
    #[serde(default)]
    n: Option<usize>,
    speeds: Vec<f64>,
    tasks: Vec<f64>,
}

#[derive(Serialize)]
struct InstanceFileOut<'a> {
    speeds: &'a [f64],
    tasks: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<&'a str>,
}

/// Parses the JSON instance format.
///
/// `m` and `n` are implied by the array lengths; optional `"m"`/`"n"` keys
/// are accepted and must agree with them.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if let Some(m) = file.m {
        if m != file.speeds.len() {
            return Err(Error::Parse(format!(
                "declared m = {m} but {} speeds given",
                file.speeds.len()
            )));
        }
    }
    if let Some(n) = file.n {
        if n != file.tasks.len() {
            return Err(Error::Parse(format!(
                "declared n = {n} but {} tasks given",
                file.tasks.len()
            )));
        }
    }
    let inst = Instance::new(file.speeds, file.tasks)?;
    Ok(match file.name {
        Some(name) => inst.with_name(name),
        None => inst,
    })
}

impl Serialize for Instance {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        InstanceFileOut {
            speeds: &self.speeds,
            tasks: &self.sizes,
            name: self.name.as_deref(),
        }
        .serialize(serializer)
    }
}

pub fn serialize_instance(instance: &Instance) -> String {
    crate::json::to_string(instance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inst(s: &[f64], t: &[f64]) -> Instance {
        Instance::new(s.to_vec(), t.to_vec()).unwrap()
    }

    #[test]
    fn validate_rejects_unsorted_speeds() {
        let err = validate(&[1.0, 2.0], &[1.0]).unwrap_err();
        assert_eq!(err, vec![Violation::SpeedsNotSorted(1)]);
        assert!(err[0].to_string().contains("speeds not non-increasing"));
    }

    #[test]
    fn validate_accepts_minimal_instance() {
        assert!(validate(&[1.0], &[1.0]).is_ok());
    }

    #[test]
    fn validate_rejects_unsorted_sizes() {
        let err = validate(&[2.0, 1.0], &[3.0, 1.0, 2.0]).unwrap_err();
        assert_eq!(err, vec![Violation::SizesNotSorted(2)]);
        assert!(err[0].to_string().contains("sizes not non-increasing"));
    }

    #[test]
    fn validate_reports_every_violation() {
        let err = validate(&[f64::NAN, 0.0, -1.0], &[1.0, f64::INFINITY]).unwrap_err();
        assert!(err.contains(&Violation::NonFiniteSpeed(0)));
        assert!(err.contains(&Violation::NonPositiveSpeed(1)));
        assert!(err.contains(&Violation::NonPositiveSpeed(2)));
        assert!(err.contains(&Violation::NonFiniteSize(1)));
        assert!(err.contains(&Violation::SizesNotSorted(1)));
    }

    #[test]
    fn zero_sizes_allowed_but_not_normalizable() {
        let i = inst(&[1.0], &[1.0, 0.0]);
        assert!(matches!(normalize_sizes(&i), Err(Error::DegenerateInstance)));
    }

    #[test]
    fn normalize_sizes_examples() {
        let i = normalize_sizes(&inst(&[1.0], &[4.0, 2.0, 2.0])).unwrap();
        assert_eq!(i.sizes(), &[2.0, 1.0, 1.0]);
        let i = normalize_sizes(&inst(&[1.0], &[1.0, 1.0])).unwrap();
        assert_eq!(i.sizes(), &[1.0, 1.0]);
        let i = normalize_sizes(&inst(&[3.0], &[3.5, 1.4])).unwrap();
        assert!((i.sizes()[0] - 2.5).abs() < 1e-15);
        assert_eq!(i.sizes()[1], 1.0);
        assert_eq!(i.speeds(), &[3.0]);
    }

    #[test]
    fn normalize_opt_examples() {
        let i = normalize_opt(&inst(&[1.0, 1.0], &[3.0, 3.0, 2.0, 2.0, 2.0]), 6.0).unwrap();
        assert_eq!(i.speeds(), &[6.0, 6.0]);
        let base = inst(&[2.0, 1.0], &[1.0]);
        assert_eq!(normalize_opt(&base, 1.0).unwrap(), base);
        let i = normalize_opt(&inst(&[2.0], &[4.0]), 2.0).unwrap();
        assert_eq!(i.speeds(), &[4.0]);
        assert!(normalize_opt(&base, 0.0).is_err());
        assert!(normalize_opt(&base, -1.0).is_err());
    }

    #[test]
    fn parse_example_file() {
        let i = parse_instance(r#"{"speeds":[2,1],"tasks":[1.5,1,1]}"#).unwrap();
        assert_eq!(i.m(), 2);
        assert_eq!(i.n(), 3);
        assert_eq!(i.sizes(), &[1.5, 1.0, 1.0]);
    }

    #[test]
    fn parse_rejects_empty_speeds() {
        let err = parse_instance(r#"{"speeds":[],"tasks":[1]}"#).unwrap_err();
        assert!(err.to_string().contains("m must be ≥ 1"), "{err}");
    }

    #[test]
    fn parse_rejects_malformed_and_missing() {
        assert!(matches!(parse_instance("{"), Err(Error::Parse(_))));
        assert!(matches!(
            parse_instance(r#"{"speeds":[1]}"#),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            parse_instance(r#"{"speeds":[1],"tasks":[1],"m":2}"#),
            Err(Error::Parse(_))
        ));
        assert!(parse_instance(r#"{"speeds":[1],"tasks":[1],"n":1,"m":1}"#).is_ok());
    }

    #[test]
    fn serialize_is_stable_modulo_whitespace() {
        let text = r#"{ "speeds": [2, 1], "tasks": [1.5, 1, 1], "name": "demo" }"#;
        let out = serialize_instance(&parse_instance(text).unwrap());
        let squashed: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        assert_eq!(out, squashed);
    }

    #[test]
    fn schedule_recomputes_loads() {
        let i = inst(&[2.0, 1.0], &[3.0, 2.0, 1.0]);
        let s = Schedule::from_assignment(&i, vec![0, 1, 0]);
        assert_eq!(s.loads, vec![4.0, 2.0]);
        assert_eq!(s.finish_times, vec![2.0, 2.0]);
        assert_eq!(s.makespan, 2.0);
        assert_eq!(s.tasks_on(0), vec![0, 2]);
    }

    fn arb_instance() -> impl Strategy<Value = Instance> {
        (
            prop::collection::vec(1e-3f64..1e3, 1..6),
            prop::collection::vec(1e-3f64..1e3, 1..9),
        )
            .prop_map(|(s, t)| Instance::sorted(s, t).unwrap())
    }

    proptest! {
        #[test]
        fn file_round_trip_is_bit_exact(i in arb_instance()) {
            let back = parse_instance(&serialize_instance(&i)).unwrap();
            prop_assert_eq!(
                back.speeds().iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                i.speeds().iter().map(|x| x.to_bits()).collect::<Vec<_>>()
            );
            prop_assert_eq!(
                back.sizes().iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                i.sizes().iter().map(|x| x.to_bits()).collect::<Vec<_>>()
            );
        }

        #[test]
        fn normalize_sizes_is_idempotent(i in arb_instance()) {
            let once = normalize_sizes(&i).unwrap();
            let twice = normalize_sizes(&once).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn scaling_scales_makespan(i in arb_instance(), c in 0.01f64..100.0, seed in any::<u64>()) {
            let assignment: Vec<usize> = (0..i.n())
                .map(|k| ((seed >> (k % 32)) as usize + k) % i.m())
                .collect();
            let base = Schedule::from_assignment(&i, assignment.clone()).makespan;
            let bigger = Schedule::from_assignment(&i.scale_sizes(c).unwrap(), assignment.clone()).makespan;
            let faster = Schedule::from_assignment(&i.scale_speeds(c).unwrap(), assignment).makespan;
            prop_assert!((bigger - base * c).abs() <= 1e-12 * bigger.abs());
            prop_assert!((faster - base / c).abs() <= 1e-12 * faster.abs());
        }
    }
}
