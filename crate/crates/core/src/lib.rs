//! LPT scheduling on uniform processors.
//!
//! - [`model`]: instances, schedules, normalization and the JSON file format
//! - [`lpt`]: the LPT heuristic
//! - [`exact`]: exact optimal makespan (enumeration oracle and branch-and-bound)
//! - [`analysis`]: the polynomials `P_m`, their roots ρ_m, classical bounds, ratio reports
//! - [`worstcase`]: the tight instance family, hill-climbing search and random sampling
//! - [`certify`]: necessary conditions for an instance to be minimal
//! - [`verify`]: the reproducible acceptance checks, also reachable from the CLI

pub mod analysis;
pub mod certify;
pub mod cli;
pub mod error;
pub mod exact;
pub mod json;
pub mod lpt;
pub mod model;
pub mod verify;
pub mod worstcase;

pub use analysis::{approx_ratio, char_poly, gis_bound, graham_bound, max_positive_root, rho, RatioReport};
pub use error::{Error, Result};
pub use exact::{opt_bnb, opt_enumerate, OptResult};
pub use lpt::{lpt_makespan, lpt_schedule};
pub use model::{normalize_opt, normalize_sizes, parse_instance, serialize_instance, Instance, Schedule};
pub use worstcase::{generate_gis_instance, ratio_ceiling_check, search_worst, SearchConfig, SearchResult};
