//! Numerical deformation of near-hyperbolic radial metrics.
//!
//! A radial metric on the half-cylinder over a sphere is stored through
//! its cut curve, the family of spherical metrics obtained by slicing at
//! each radius and dividing out the hyperbolic growth factor. The
//! deformation operators in [`deform`] rewrite that curve piecewise:
//! freezing it past a radius, gluing it to the round cut across a window,
//! and composing the two into a map that outputs an exactly hyperbolic
//! metric below the work zones while keeping the input above them.
//!
//! The [`verify`] module measures how far a metric is from hyperbolic in
//! the only chart-independent sense available numerically: shoot radial
//! geodesic tubes, pull the metric back through their jacobians, and
//! compare against the model growth in sup norm up to second differences.
//! [`family`] treats parameter families of such metrics and the limits of
//! their deformed cut curves; [`config`] and [`experiment`] wrap the
//! pieces into configured, reproducible runs.

pub mod bump;
pub mod config;
pub mod curvature;
pub mod deform;
pub mod error;
pub mod experiment;
pub mod family;
pub mod fd;
pub mod radial;
pub mod sphere;
pub mod verify;
