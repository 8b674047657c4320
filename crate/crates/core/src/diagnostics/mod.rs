//! Theory-verification quantities: the relaxed parameter matrix and its
//! bias, the filter quadratic function with its dominance condition, the
//! conditional feature covariance, and an empirical small-ball probe.

mod excitation;
mod relaxation;

pub use excitation::{
    bmsb_empirical, check_filter_condition, conditional_feature_covariance, filter_quadratic,
    BmsbDirection, BmsbReport, FilterConditionReport, FilterConditionRow,
};
pub use relaxation::{relaxation_bias, relaxed_parameters, RelaxedParams};
