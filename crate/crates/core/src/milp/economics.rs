//! Device investment economics: unit cost, capital recovery and rating.

use crate::case::Branch;
use crate::float;

/// Unit investment cost floor applied when the quadratic goes nonpositive at
/// very large ratings, $/kVar.
pub const INVESTMENT_COST_FLOOR: f64 = 5.0;

/// Device unit cost in $/kVar as a function of the installed rating in Mvar:
/// `0.0015 S^2 - 0.713 S + 153.75`, clamped at a small positive floor for
/// ratings beyond the quadratic's root region.
pub fn investment_cost(rating_mvar: f64) -> f64 {
    assert!(rating_mvar > 0.0, "device rating must be positive");
    let cost = 0.0015 * rating_mvar * rating_mvar - 0.713 * rating_mvar + 153.75;
    if cost <= 0.0 {
        log::warn!(
            "investment cost formula nonpositive at {rating_mvar} Mvar; clamping to {INVESTMENT_COST_FLOOR} $/kVar"
        );
        INVESTMENT_COST_FLOOR
    } else {
        cost
    }
}

/// `d (1+d)^LT / ((1+d)^LT - 1)`: converts a lump investment into equal
/// annual payments over the device lifetime.
pub fn capital_recovery_factor(interest_rate: f64, lifetime_years: u32) -> f64 {
    assert!(interest_rate > 0.0 && lifetime_years >= 1);
    let growth = float::powi(1.0 + interest_rate, lifetime_years as i32);
    interest_rate * growth / (growth - 1.0)
}

/// Annualized investment in $/yr for a device of `rating_mvar` priced at
/// `unit_cost` $/kVar.
pub fn annualize(unit_cost: f64, rating_mvar: f64, interest_rate: f64, lifetime_years: u32) -> f64 {
    unit_cost * rating_mvar * 1000.0 * capital_recovery_factor(interest_rate, lifetime_years)
}

/// Default device rating: the series var drawn at full thermal loading with
/// maximum capacitive compensation, `0.7 x (S/base)^2 base` Mvar.
pub fn tcsc_rating(branch: &Branch, base_mva: f64) -> f64 {
    let loading = branch.rating_mw / base_mva;
    0.7 * branch.reactance * loading * loading * base_mva
}
