//! Band structures on point tuples, tuple towers, and the separation and
//! Jacobian lower-bound checks built on them.

mod exponents;
mod invariants;
mod lower_bound;
mod structure;
mod tower;
mod two_stage;

pub use exponents::{
    admissible_quasi_free_counts, exponent_bookkeeping, validate_exponent_bookkeeping, r_d, validate_quadruple, ExponentRecord, Quadruple, TowerVariant};
pub use invariants::{
    check_band_invariants, check_two_stage_synthetic, random_configuration, two_scale_configuration, two_scale_params,
    BandInvariantReport, TwoStageSummary,
};
pub use lower_bound::{
    check_elim_diff, lbj_campaign, lower_bound_jp_product, standard_tower_sets, ElimDiffReport, ElimParams,
    LbjCampaign, LbjParams, LbjSummary, LbjValue, ELIM_DIFF_CONSTANT,
};
pub use structure::{
    build_bands, build_bands_indexed, refine_bands, verify_band_conclusions, within_band_comparability, BandClass,
    BandParams, BandStructure, BandVerification, RefinedBands, SeparationMetric, COMPARABILITY_LIMIT,
};
pub use tower::{build_tuple_tower, excise, top_radius_constant, Target, TowerLevel, TowerParams, TowerSets, TupleTower};
pub use two_stage::{build_two_stage_bands, TwoStageBands, TwoStageParams, TwoStageVerification};
