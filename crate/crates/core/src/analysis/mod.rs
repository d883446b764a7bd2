//! Exact verification: query laws, leakage certificates, download cost,
//! sweeps and reference tables.

mod cost;
pub mod fixtures;
mod joint;
mod leakage;
mod query_law;
mod sweep;

pub use cost::{empty_probability, estimate_download_cost, exact_download_cost, within_sigma, CostEstimate};
pub use joint::{all_databases, joint_leakage_oracle, joint_space};
pub use leakage::{max_leakage_ratio, Condition, LeakageReport, Ratio, Witness};
pub use query_law::{
    check_feasible, enumerate_all_laws, enumerate_query_law, pattern_space, QueryLaw, ENUMERATION_LIMIT,
};
pub use sweep::{format_real, grid, sweep, sweep_to_csv, write_csv, SweepOptions, SweepPoint, SweepRow, CSV_HEADER};
