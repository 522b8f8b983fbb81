//! Statistical routines for comparing prediction-error metrics across
//! horizon lengths and acceleration profiles.
//!
//! The crate is self-contained: the t and F distributions are evaluated
//! through the regularized incomplete beta function in [`special`], and the
//! weighted polynomial fits in [`fit`] use a QR solve on the
//! weight-scaled design matrix.

pub mod descriptive;
pub mod dist;
pub mod error;
pub mod fit;
pub mod special;
pub mod hypothesis;

pub use descriptive::{mean, sample_variance, stable_mean, stable_sum};
pub use error::{Error, Result};
pub use fit::{nested_f_test, select_trend_model, wls_polyfit, FitResult, LevelSamples, TrendSelection};
pub use hypothesis::{
    bonferroni, cohens_d, confidence_interval, welch_anova, welch_t_test, CohensDVariant,
    EffectMagnitude, TestResult,
};
