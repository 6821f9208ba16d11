//! GPS spoofing at desk scale: free-space path loss, the capture condition
//! (spoofed signal must exceed the authentic one by a margin), and the
//! induced position solution. All functions are pure.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default aggregate authentic received power at the target (dBm).
pub const DEFAULT_AUTHENTIC_DBM: f64 = -130.0;
/// Default capture margin δ (dB).
pub const DEFAULT_CAPTURE_MARGIN_DB: f64 = 3.0;
/// GPS L1 carrier (MHz).
pub const GPS_L1_MHZ: f64 = 1575.42;

#[derive(Debug, Error, PartialEq)]
pub enum DomainError {
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("frequency must be positive, got {0}")]
    NonPositiveFrequency(f64),
}

/// Free-space path loss in dB:
/// 20·log10(distance in km) + 20·log10(freq in MHz) + 32.44.
pub fn fspl_db(distance_m: f64, freq_mhz: f64) -> Result<f64, DomainError> {
    if !(distance_m > 0.0) {
        return Err(DomainError::NonPositiveDistance(distance_m));
    }
    if !(freq_mhz > 0.0) {
        return Err(DomainError::NonPositiveFrequency(freq_mhz));
    }
    Ok(20.0 * (distance_m / 1000.0).log10() + 20.0 * freq_mhz.log10() + 32.44)
}

/// Received power after free-space propagation.
pub fn received_power(tx_power_dbm: f64, distance_m: f64, freq_mhz: f64) -> Result<f64, DomainError> {
    Ok(tx_power_dbm - fspl_db(distance_m, freq_mhz)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpoofScenario {
    /// Spoofer TX position Δr_TX (meters).
    pub spoofer_pos: [f64; 3],
    /// Target receiver position Δr_t (meters).
    pub target_pos: [f64; 3],
    /// Authentic satellite distances r_si (meters); kept for reporting,
    /// collapsed into `authentic_dbm` for the power comparison.
    #[serde(default)]
    pub satellite_distances: Vec<f64>,
    /// Spoofer transmit power (dBm).
    pub tx_power_dbm: f64,
    /// Aggregate authentic received power at the target (dBm).
    pub authentic_dbm: f64,
    /// Carrier frequency (MHz).
    pub freq_mhz: f64,
    /// Capture margin δ (dB).
    pub capture_margin_db: f64,
    /// The fake position the spoofer tries to induce.
    pub spoofed_coords: [f64; 3],
}

impl SpoofScenario {
    /// Spoofer-to-target distance r_ti, derived from the positions.
    pub fn r_ti(&self) -> f64 {
        let d: f64 = self
            .spoofer_pos
            .iter()
            .zip(&self.target_pos)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        d.sqrt()
    }

    /// A scenario with the spoofer at `distance_m` along the x axis and
    /// engineering-default powers.
    pub fn at_distance(distance_m: f64, tx_power_dbm: f64) -> Self {
        SpoofScenario {
            spoofer_pos: [distance_m, 0.0, 0.0],
            target_pos: [0.0, 0.0, 0.0],
            satellite_distances: vec![20_200_000.0; 4],
            tx_power_dbm,
            authentic_dbm: DEFAULT_AUTHENTIC_DBM,
            freq_mhz: GPS_L1_MHZ,
            capture_margin_db: DEFAULT_CAPTURE_MARGIN_DB,
            spoofed_coords: [48.0, 11.0, 500.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpoofResult {
    pub spoofed_dbm: f64,
    pub captured: bool,
    /// The position the receiver reports: the spoofed coordinates when
    /// captured, otherwise the true position.
    pub reported_position: [f64; 3],
}

/// Evaluates the capture condition: the spoofed signal overrides the
/// authentic one iff its received power exceeds authentic + δ.
pub fn evaluate(scenario: &SpoofScenario) -> Result<SpoofResult, DomainError> {
    let spoofed_dbm =
        received_power(scenario.tx_power_dbm, scenario.r_ti(), scenario.freq_mhz)?;
    let captured = spoofed_dbm > scenario.authentic_dbm + scenario.capture_margin_db;
    Ok(SpoofResult {
        spoofed_dbm,
        captured,
        reported_position: if captured {
            scenario.spoofed_coords
        } else {
            scenario.target_pos
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_distance_costs_six_db() {
        let a = received_power(30.0, 100.0, GPS_L1_MHZ).unwrap();
        let b = received_power(30.0, 200.0, GPS_L1_MHZ).unwrap();
        let drop = a - b;
        assert!((drop - 20.0 * 2f64.log10()).abs() < 1e-9);
        assert!((drop - 6.02).abs() < 0.01);
    }

    #[test]
    fn the_620m_reference_point() {
        // 30 dBm at 620 m on L1: FSPL = 20·log10(0.62) + 20·log10(1575.42)
        // + 32.44 ≈ 92.24 dB, so roughly −62.2 dBm arrives
        let p = received_power(30.0, 620.0, GPS_L1_MHZ).unwrap();
        assert!((p - (-62.24)).abs() < 0.01, "got {p}");
    }

    #[test]
    fn non_positive_distance_is_a_domain_error() {
        assert!(matches!(
            received_power(30.0, 0.0, GPS_L1_MHZ),
            Err(DomainError::NonPositiveDistance(_))
        ));
        assert!(matches!(
            received_power(30.0, -5.0, GPS_L1_MHZ),
            Err(DomainError::NonPositiveDistance(_))
        ));
    }

    #[test]
    fn default_620m_scenario_captures() {
        let s = SpoofScenario::at_distance(620.0, 30.0);
        let r = evaluate(&s).unwrap();
        assert!(r.captured);
        assert_eq!(r.reported_position, s.spoofed_coords);
    }

    #[test]
    fn equal_power_fails_the_strict_margin() {
        let mut s = SpoofScenario::at_distance(620.0, 30.0);
        let spoofed = evaluate(&s).unwrap().spoofed_dbm;
        s.authentic_dbm = spoofed; // margin 3 dB not cleared
        let r = evaluate(&s).unwrap();
        assert!(!r.captured);
        assert_eq!(r.reported_position, s.target_pos);
    }

    #[test]
    fn ten_times_farther_is_twenty_db_weaker() {
        let near = evaluate(&SpoofScenario::at_distance(100.0, 30.0)).unwrap();
        let far = evaluate(&SpoofScenario::at_distance(1000.0, 30.0)).unwrap();
        assert!((near.spoofed_dbm - far.spoofed_dbm - 20.0).abs() < 1e-9);
    }

    #[test]
    fn r_ti_is_euclidean() {
        let mut s = SpoofScenario::at_distance(0.0, 30.0);
        s.spoofer_pos = [3.0, 4.0, 12.0];
        assert!((s.r_ti() - 13.0).abs() < 1e-12);
    }
}
