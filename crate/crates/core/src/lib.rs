//! Center-of-mass trajectory prediction over finite horizons.
//!
//! A point-mass double integrator is driven by an assumed acceleration
//! profile from the measured state at each horizon start, and the predicted
//! positions are scored against the reference trajectory.

pub mod dynamics;
pub mod error;
pub mod metrics;
pub mod prediction;
pub mod profiles;
pub mod signal;
pub mod synth;

pub use dynamics::{discretize, grf_to_acceleration, Accel3, CoMState, DiscreteModel, STANDARD_GRAVITY, VERTICAL_AXIS};
pub use error::{Error, Result};
pub use metrics::{
    activity_records, average_direction_accuracy, average_error, max_error, min_direction_accuracy, ActivityRecord,
    AggregationMode, MetricSummary, RepeatSummary,
};
pub use prediction::{par_sweep, predict_horizon, sweep, sweep_summaries, sweep_with_stride, HorizonResult, HorizonSummary, Trial};
pub use profiles::{generate_profile, HorizonSpec, ProfileKind};
pub use signal::{butterworth_lowpass, downsample, preprocess, Butterworth, FilterSpec, ForceSeries};
pub use synth::{analytic_error, expected_ae, make_family, make_trial, FamilyKind, FamilySpec, verify_quadratic_trend, Reference, SyntheticKind, SyntheticSpec};
