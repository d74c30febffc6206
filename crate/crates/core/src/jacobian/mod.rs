//! Jacobian identities: the nested-integral ladder reproducing `J_P`,
//! Vandermonde-type power determinants, and sampled derivative bounds.

mod bounds;
mod ladder;
mod quadrature;
mod vandermonde;

pub use bounds::{
    check_l1_derivative_bound, check_partial_bound, normalized_jacobian_partial, partial_bound_factor, L1BoundReport,
    PartialBoundReport,
};
pub use ladder::{
    check_identity_jp_equals_jd, identity_window, ordered_tuple, IdentityReport, JLadder, LadderValue,
    DEFAULT_LADDER_TOL,
};
pub use quadrature::{integrate, QuadResult};
pub use vandermonde::{
    check_vandermonde_family, difference_product_choices, has_repeated_index, increasing_exponent_lists,
    integrate_alternating, power_determinant_factor, power_determinant_value, s_r_levels, s_r_recursion,
    AlternatingPowerSum, FactorizationSummary, PowerDeterminant,
};
