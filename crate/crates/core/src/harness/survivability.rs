//! Width of the power interval meeting a BER target.

use serde::{Deserialize, Serialize};

use super::BerRecord;
use crate::error::{Error, Result};

/// Survivability interval of one BER curve.
///
/// Crossings are interpolated linearly in `(dBm, log10 BER)`. Records without
/// errors enter the interpolation at `1 / (2 bits)`; their powers are listed in
/// `floored_powers_dbm`. An interval touching the first or last grid point
/// ends there and is flagged, since the true crossing lies outside the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivabilityReport {
    pub target_ber: f64,
    pub p_lo_dbm: Option<f64>,
    pub p_hi_dbm: Option<f64>,
    pub width_db: f64,
    /// No record meets the target.
    pub empty: bool,
    pub lo_at_grid_edge: bool,
    pub hi_at_grid_edge: bool,
    pub floored_powers_dbm: Vec<f64>,
}

impl SurvivabilityReport {
    /// True when `self` lies inside `other`, allowing `slack_db` at each end.
    pub fn contained_in(&self, other: &SurvivabilityReport, slack_db: f64) -> bool {
        match (self.p_lo_dbm, self.p_hi_dbm, other.p_lo_dbm, other.p_hi_dbm) {
            (None, None, _, _) => true,
            (Some(a), Some(b), Some(c), Some(d)) => a >= c - slack_db && b <= d + slack_db,
            _ => false,
        }
    }
}

pub fn survivability(records: &[BerRecord], target_ber: f64) -> Result<SurvivabilityReport> {
    if records.len() < 2 {
        return Err(Error::Config(format!("survivability needs at least 2 records, got {}", records.len())));
    }
    if !(target_ber > 0.0 && target_ber < 1.0) {
        return Err(Error::Config(format!("target BER {target_ber} must lie in (0, 1)")));
    }
    if records.windows(2).any(|w| !(w[0].power_dbm < w[1].power_dbm)) {
        return Err(Error::Config("records must be sorted by strictly increasing power".into()));
    }
    if records.iter().any(|r| r.bits == 0) {
        return Err(Error::Config("record with zero bits counted".into()));
    }

    let mut floored = Vec::new();
    let log_ber: Vec<f64> = records
        .iter()
        .map(|r| {
            if r.errors == 0 {
                floored.push(r.power_dbm);
                (0.5 / r.bits as f64).log10()
            } else {
                r.ber.log10()
            }
        })
        .collect();
    let lt = target_ber.log10();
    let p: Vec<f64> = records.iter().map(|r| r.power_dbm).collect();
    let crossing = |i: usize, j: usize| p[i] + (lt - log_ber[i]) / (log_ber[j] - log_ber[i]) * (p[j] - p[i]);

    let mut best: Option<(f64, f64, bool, bool)> = None;
    let mut i = 0;
    while i < records.len() {
        if records[i].ber > target_ber {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < records.len() && records[i + 1].ber <= target_ber {
            i += 1;
        }
        let end = i;
        let (lo, lo_edge) = if start == 0 { (p[0], true) } else { (crossing(start - 1, start), false) };
        let last = records.len() - 1;
        let (hi, hi_edge) = if end == last { (p[last], true) } else { (crossing(end, end + 1), false) };
        if best.is_none_or(|b| hi - lo > b.1 - b.0) {
            best = Some((lo, hi, lo_edge, hi_edge));
        }
        i += 1;
    }

    Ok(match best {
        Some((lo, hi, lo_edge, hi_edge)) => SurvivabilityReport {
            target_ber,
            p_lo_dbm: Some(lo),
            p_hi_dbm: Some(hi),
            width_db: hi - lo,
            empty: false,
            lo_at_grid_edge: lo_edge,
            hi_at_grid_edge: hi_edge,
            floored_powers_dbm: floored,
        },
        None => SurvivabilityReport {
            target_ber,
            p_lo_dbm: None,
            p_hi_dbm: None,
            width_db: 0.0,
            empty: true,
            lo_at_grid_edge: false,
            hi_at_grid_edge: false,
            floored_powers_dbm: floored,
        },
    })
}
