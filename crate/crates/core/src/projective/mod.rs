//! Points, metrics, quadrature and norms on the complex projective line.
//!
//! The Fubini–Study measure is normalized to total mass one, so it is the
//! uniform probability measure on the round sphere. In the coordinates
//! `u = |z1|^2 / |z|^2` and `theta = arg(z1 * conj(z0))` it is `du dtheta / 2pi`.

mod grid;
mod metric;
mod norms;

pub use grid::{ProjectivePoint, QuadratureGrid};
pub use metric::{MetricData, PerturbationTerm, CURVATURE_MARGIN};
pub use norms::{
    curvature_mass, fs_monomial_sup, l1_log_norm, l1_log_norm_scaled, l2_inner, log_norms_on_grid, measure_exceed,
    metric_phis, monomial_sup_norm, point_norm, sup_log_norm, sup_norm, AsSection, SectionEval, LOG_FLOOR,
};

pub(crate) use norms::{refine_sup, weighted_exceed, weighted_l1};
