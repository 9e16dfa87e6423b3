//! Critical-point location, exponent fits and finite-size-scaling collapse.

mod collapse;
mod crossing;
mod exponents;
mod fit;

pub use collapse::{
    collapse_quality, optimize_collapse, rescale, CollapseBounds, CollapseCurves, CollapseResult,
    CurvePoint, LandscapePoint, RescaledPoint, ScalingExponents, ScalingForm,
};
pub use crossing::{
    find_crossing, interpolate, pair_crossing, CrossingEstimate, Curves, PairCrossing,
};
pub use exponents::{
    estimate_beta_over_nu, estimate_order_exponent, estimate_tau, Binning, ExponentEstimate,
    FitWindow,
};
pub use fit::{
    fit_mean_degree_coefficient, fit_path_scaling, fit_power_law, fit_power_law_weighted,
    test_log_growth, LogGrowthTest, PathScalingFit, PowerLawFit,
};
