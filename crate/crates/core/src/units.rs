//! Power unit conversions.

/// dBm to watts: `p = 10^((dBm - 30) / 10)`.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Linear amplitude to dB (`20 log10`), floored at -300 dB so zero stays finite.
pub fn amplitude_to_db(mag: f64) -> f64 {
    (20.0 * mag.log10()).max(-300.0)
}
