//! Facility location on a line, on `(R^d, L1)`, on open polyline curves and on
//! star trees.

mod instance;
mod mechanisms;

pub use instance::{Instance, Polyline, Position, Space};
pub use mechanisms::{
    agents_between, approx_median, exact_expected_sampling_percentile_cost, make_counterexample,
    median, median_manipulation_check, median_of_sample, percentile_mechanism, random_dictator,
    sampling_percentile, sensitivity_bound, social_cost, FacilityOutcome, SampleSize, SampleSpec,
};
