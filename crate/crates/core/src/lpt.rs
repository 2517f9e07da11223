//! Longest Processing Time list scheduling on uniform processors.

use crate::model::{Instance, Schedule};

/// Runs LPT: tasks in non-increasing size order, each placed on the
/// processor whose finish time after receiving it is smallest.
///
/// The running state per processor is its finish time. Ties between tasks
/// and between processors both go to the lowest index.
pub fn lpt_schedule(instance: &Instance) -> Schedule {
    let speeds = instance.speeds();
    let mut finish = vec![0.0f64; instance.m()];
    let mut assignment = Vec::with_capacity(instance.n());
    // Sizes are already sorted non-increasingly, so index order is LPT order.
    for &size in instance.sizes() {
        let mut best = 0;
        let mut best_time = finish[0] + size / speeds[0];
        for p in 1..speeds.len() {
            let time = finish[p] + size / speeds[p];
            if time < best_time {
                best = p;
                best_time = time;
            }
        }
        finish[best] = best_time;
        assignment.push(best);
    }
    Schedule::from_assignment(instance, assignment)
}

pub fn lpt_makespan(instance: &Instance) -> f64 {
    lpt_schedule(instance).makespan
}
