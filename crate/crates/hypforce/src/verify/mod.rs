//! Numerical verification: chart-based closeness measurements, curvature
//! sampling, and the closed-form bounds they are checked against.

pub mod bounds;
pub mod chart;
pub mod curvature;

pub use bounds::{
    closeness_constant, forcing_bound, forcing_bound_value, schedule_for_target, warp_forcing_bound,
    warping_trick_bound, ForcingBound, ForcingSchedule,
};
pub use chart::{
    build_radial_chart, chart_deviation, check_ball_close, check_eps_close,
    estimate_closeness_threshold, sample_base_points, tube_difference_field, BallReport,
    ChartDeviation, ChartOpts, ClosenessReport, RadialChart, TubeSampling,
};
pub use curvature::{gauss_curvature_scalar, radial_curvature_check, CurvatureOpts, CurvatureReport};
