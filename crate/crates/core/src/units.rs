//! Power unit conversions.

/// dBm to watts.
pub fn dbm_to_w(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// Watts to dBm.
pub fn w_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}

/// Linear ratio to dB.
pub fn lin_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
