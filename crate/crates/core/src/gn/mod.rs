//! Exponent algebra and evaluation of the interpolation inequalities.

mod eval;
mod params;
mod special;

pub use eval::{
    evaluate_bounded, evaluate_generalized, evaluate_localized, ratio_of, BoundedExtras, Factor,
    GridMeta, InequalityReport,
};
pub use params::{
    mean_order, solve_exponent, theta_star_of, GNParams, PartialParams, Rational, Residual,
    RELATION_TOL,
};
pub use special::{
    ceiling_l4, ceiling_l6, fractional_ratio, ibp_identities, ibp_residual, open_problem_probe,
    special_constants, special_ratios, Identity, ProbeRow, SpecialRow, SEMINORM_N,
};
