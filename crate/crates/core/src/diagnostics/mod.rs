//! Measurable checks on computed profiles: clean intervals, stickiness,
//! two-sided operator bounds, Hölder and tail estimates, and splicing.

mod clean;
mod local;
mod shape;

pub use clean::{find_clean_intervals, find_clean_intervals_brute, CleanInterval, CleanIntervalReport};
pub use local::{
    default_ls_slack, lewy_stampacchia_check, stickiness_check, LsNode, LsReport, StickinessParams,
    StickinessReport,
};
pub use shape::{
    clean_holder_scale, fit_tail_decay, glue_profile, glue_width, gluing_energy_defect, holder_estimate,
    fit_shift, monotonicity_defect, GluingDefect, Side, TailFit,
};
