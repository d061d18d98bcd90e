//! Closed forms for delays, bounds and wealth rates.

mod bandwidth;
mod delay;
mod invariance;
mod wealth;

pub use bandwidth::{bandwidth_share_rates, BandwidthShare};
pub use delay::{
    delay_lower_bound, delay_lower_bound_c, delay_upper_bound, delay_upper_bound_c, exact_expected_delay,
    expected_min_uniform, heuristic_lower_bound, heuristic_upper_bound, DelayBounds,
};
pub use invariance::{equal_vmax_schedule_invariance, feasible_cyclic_wealths, invariance_witness, CyclicFlow};
pub use wealth::{wealth_for_business_delay, wealth_ideal, wealth_ideal_feasible, wealth_no_trades, Rational, WealthScenarioParams};
