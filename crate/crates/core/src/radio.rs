//! Calibrated physical-layer models: per-hop latency, RSSI vs distance,
//! throughput vs RSSI, and link viability.
//!
//! The latency model is table-driven rather than parametric: it anchors on
//! measured (payload, hops) -> seconds points and interpolates between
//! them, which preserves the measured values exactly.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reference distance for the log-distance path loss model, meters.
pub const PATHLOSS_REF_DISTANCE_M: f64 = 10.0;
/// Clear line-of-sight range of the radio modules, meters.
pub const DEFAULT_MAX_LINK_RANGE_M: f64 = 800.0;
/// Default RSSI below which a link is considered disconnected, dBm.
pub const DEFAULT_DISCONNECT_THRESHOLD_DBM: f64 = -90.0;
/// Default shadowing noise sigma for stochastic RSSI, dB.
pub const DEFAULT_NOISE_SIGMA_DB: f64 = 2.5;

#[derive(Debug, Error)]
pub enum RadioError {
    #[error("payload size must be at least 1 byte")]
    InvalidPayload,
    #[error("hop count must be at least 1")]
    InvalidHops,
    #[error("distance must be positive, got {0}")]
    InvalidDistance(f64),
    #[error("distance {distance_m} m exceeds the maximum link range {max_m} m")]
    OutOfRange { distance_m: f64, max_m: f64 },
    #[error("path loss fit needs at least two distinct distances")]
    DegenerateFit,
    #[error("invalid latency table: {0}")]
    InvalidTable(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid throughput steps: {0}")]
    InvalidSteps(String),
}

/// Payload sizes (bytes) at which the latency table is anchored.
pub const LATENCY_BYTE_ANCHORS: [u32; 3] = [10, 50, 100];
/// Hop counts at which the latency table is anchored.
pub const LATENCY_HOP_ANCHORS: [u32; 3] = [1, 2, 3];

/// Measured end-to-end delivery times indexed by (hops, payload bytes).
///
/// Beyond the measured ranges: payloads below the smallest anchor clamp to
/// it, payloads above the largest extrapolate the last byte-segment slope,
/// and each hop past the deepest anchor adds the increment between the two
/// deepest measured hop counts at that payload size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyTable {
    /// `anchors[h][b]` is the time in seconds for `LATENCY_HOP_ANCHORS[h]`
    /// hops and `LATENCY_BYTE_ANCHORS[b]` bytes.
    pub anchors: [[f64; 3]; 3],
}

impl Default for LatencyTable {
    fn default() -> Self {
        // Calibrated multi-hop delivery times, seconds.
        Self {
            anchors: [
                [0.048, 0.090, 0.114],
                [0.082, 0.120, 0.200],
                [0.115, 0.224, 0.411],
            ],
        }
    }
}

impl LatencyTable {
    pub fn new(anchors: [[f64; 3]; 3]) -> Result<Self, RadioError> {
        for row in &anchors {
            for &t in row {
                if !(t > 0.0) {
                    return Err(RadioError::InvalidTable(format!(
                        "anchor time {t} is not positive"
                    )));
                }
            }
        }
        for b in 0..3 {
            for h in 1..3 {
                if anchors[h][b] <= anchors[h - 1][b] {
                    return Err(RadioError::InvalidTable(
                        "times must strictly increase with hops".into(),
                    ));
                }
            }
        }
        for h in 0..3 {
            for b in 1..3 {
                if anchors[h][b] <= anchors[h][b - 1] {
                    return Err(RadioError::InvalidTable(
                        "times must strictly increase with bytes".into(),
                    ));
                }
            }
        }
        Ok(Self { anchors })
    }

    /// Time for the given payload at one of the anchored hop counts,
    /// interpolating (or extrapolating) in the byte axis only.
    fn time_at_anchor_hops(&self, hop_index: usize, bytes: u32) -> f64 {
        let row = &self.anchors[hop_index];
        if bytes <= LATENCY_BYTE_ANCHORS[0] {
            return row[0];
        }
        for b in 1..LATENCY_BYTE_ANCHORS.len() {
            if bytes == LATENCY_BYTE_ANCHORS[b] {
                return row[b];
            }
            if bytes < LATENCY_BYTE_ANCHORS[b] {
                let (x0, x1) = (
                    LATENCY_BYTE_ANCHORS[b - 1] as f64,
                    LATENCY_BYTE_ANCHORS[b] as f64,
                );
                let t = (bytes as f64 - x0) / (x1 - x0);
                return row[b - 1] + t * (row[b] - row[b - 1]);
            }
        }
        // Past the last anchor: continue the last segment's slope.
        let n = LATENCY_BYTE_ANCHORS.len();
        let (x0, x1) = (
            LATENCY_BYTE_ANCHORS[n - 2] as f64,
            LATENCY_BYTE_ANCHORS[n - 1] as f64,
        );
        let slope = (row[n - 1] - row[n - 2]) / (x1 - x0);
        row[n - 1] + (bytes as f64 - x1) * slope
    }
}

/// Total delivery time for a payload over the given number of hops.
pub fn hop_latency_total(bytes: u32, hops: u32, table: &LatencyTable) -> Result<f64, RadioError> {
    if bytes == 0 {
        return Err(RadioError::InvalidPayload);
    }
    if hops == 0 {
        return Err(RadioError::InvalidHops);
    }
    let max_hops = *LATENCY_HOP_ANCHORS.last().unwrap();
    if hops <= max_hops {
        return Ok(table.time_at_anchor_hops(hops as usize - 1, bytes));
    }
    let deepest = table.time_at_anchor_hops(LATENCY_HOP_ANCHORS.len() - 1, bytes);
    let per_hop = deepest - table.time_at_anchor_hops(LATENCY_HOP_ANCHORS.len() - 2, bytes);
    Ok(deepest + (hops - max_hops) as f64 * per_hop)
}

/// Log-distance path loss model referenced at [`PATHLOSS_REF_DISTANCE_M`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossModel {
    /// RSSI at the reference distance, dBm.
    pub ref_rssi_dbm: f64,
    /// Path loss exponent.
    pub exponent_n: f64,
    /// Shadowing noise sigma for stochastic evaluation, dB.
    pub noise_sigma_db: f64,
    /// Hard range limit beyond which no link is possible, meters.
    pub max_link_range_m: f64,
}

impl Default for PathLossModel {
    fn default() -> Self {
        // Least-squares fit over the bundled calibration corpus
        // (see data/table3_rssi.csv).
        Self {
            ref_rssi_dbm: -65.5598577542914,
            exponent_n: 3.8964695773703695,
            noise_sigma_db: DEFAULT_NOISE_SIGMA_DB,
            max_link_range_m: DEFAULT_MAX_LINK_RANGE_M,
        }
    }
}

impl PathLossModel {
    pub fn validate(&self) -> Result<(), RadioError> {
        if !(self.exponent_n > 0.0) {
            return Err(RadioError::InvalidModel(format!(
                "exponent must be positive, got {}",
                self.exponent_n
            )));
        }
        if !(self.max_link_range_m > 0.0) {
            return Err(RadioError::InvalidModel(format!(
                "max link range must be positive, got {}",
                self.max_link_range_m
            )));
        }
        if !(self.noise_sigma_db >= 0.0) {
            return Err(RadioError::InvalidModel(format!(
                "noise sigma must be non-negative, got {}",
                self.noise_sigma_db
            )));
        }
        Ok(())
    }
}

/// Deterministic RSSI at the given distance.
pub fn rssi_at(distance_m: f64, model: &PathLossModel) -> Result<f64, RadioError> {
    if !(distance_m > 0.0) {
        return Err(RadioError::InvalidDistance(distance_m));
    }
    if distance_m > model.max_link_range_m {
        return Err(RadioError::OutOfRange {
            distance_m,
            max_m: model.max_link_range_m,
        });
    }
    Ok(model.ref_rssi_dbm
        - 10.0 * model.exponent_n * (distance_m / PATHLOSS_REF_DISTANCE_M).log10())
}

/// Stochastic RSSI: the deterministic value plus zero-mean Gaussian
/// shadowing noise drawn from the caller's seeded source.
pub fn rssi_at_noisy<R: Rng + ?Sized>(
    distance_m: f64,
    model: &PathLossModel,
    rng: &mut R,
) -> Result<f64, RadioError> {
    let base = rssi_at(distance_m, model)?;
    if model.noise_sigma_db == 0.0 {
        return Ok(base);
    }
    let normal = Normal::new(0.0, model.noise_sigma_db)
        .map_err(|e| RadioError::InvalidModel(e.to_string()))?;
    Ok(base + normal.sample(rng))
}

/// One calibration measurement: distance in meters and observed RSSI in dBm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RssiMeasurement {
    pub distance_m: f64,
    pub rssi_dbm: f64,
}

/// Least-squares fit of the path loss model over measured (distance, RSSI)
/// points: simple linear regression of RSSI on log10(distance / d0).
pub fn fit_pathloss(measurements: &[RssiMeasurement]) -> Result<PathLossModel, RadioError> {
    let mut first_distance = None;
    let mut distinct = false;
    for m in measurements {
        if !(m.distance_m > 0.0) {
            return Err(RadioError::InvalidDistance(m.distance_m));
        }
        match first_distance {
            None => first_distance = Some(m.distance_m),
            Some(d) if d != m.distance_m => distinct = true,
            _ => {}
        }
    }
    if measurements.len() < 2 || !distinct {
        return Err(RadioError::DegenerateFit);
    }
    let n = measurements.len() as f64;
    let xs: Vec<f64> = measurements
        .iter()
        .map(|m| (m.distance_m / PATHLOSS_REF_DISTANCE_M).log10())
        .collect();
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = measurements.iter().map(|m| m.rssi_dbm).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, m) in xs.iter().zip(measurements) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (m.rssi_dbm - mean_y);
    }
    let slope = sxy / sxx;
    let exponent_n = -slope / 10.0;
    let ref_rssi_dbm = mean_y - slope * mean_x;
    let model = PathLossModel {
        ref_rssi_dbm,
        exponent_n,
        noise_sigma_db: DEFAULT_NOISE_SIGMA_DB,
        max_link_range_m: DEFAULT_MAX_LINK_RANGE_M,
    };
    model.validate()?;
    Ok(model)
}

/// Parses a calibration corpus CSV with header
/// `distance_m,bytes,hops,rssi_dbm`. Only the distance and RSSI columns
/// feed the fit; bytes and hops are carried for reporting.
pub fn parse_measurements_csv(text: &str) -> Result<Vec<RssiMeasurement>, RadioError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("distance_m")) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 4 {
            return Err(RadioError::InvalidModel(format!(
                "measurement line {} has {} columns, expected 4",
                i + 1,
                cols.len()
            )));
        }
        let distance_m: f64 = cols[0]
            .trim()
            .parse()
            .map_err(|_| RadioError::InvalidDistance(f64::NAN))?;
        let rssi_dbm: f64 = cols[3]
            .trim()
            .parse()
            .map_err(|_| RadioError::InvalidModel(format!("bad RSSI on line {}", i + 1)))?;
        out.push(RssiMeasurement {
            distance_m,
            rssi_dbm,
        });
    }
    Ok(out)
}

/// One throughput band: applies to RSSI values strictly above
/// `min_rssi_dbm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputBand {
    pub min_rssi_dbm: f64,
    pub bits_per_sec: u32,
}

/// Step function mapping RSSI to throughput. Bands are ordered from the
/// strongest signal downward; RSSI at or below the last boundary gets the
/// floor rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputSteps {
    pub bands: Vec<ThroughputBand>,
    pub floor_bits_per_sec: u32,
}

pub const THROUGHPUT_MIN_BPS: u32 = 20_000;
pub const THROUGHPUT_MAX_BPS: u32 = 40_000;

impl Default for ThroughputSteps {
    fn default() -> Self {
        Self {
            bands: vec![
                ThroughputBand {
                    min_rssi_dbm: -50.0,
                    bits_per_sec: 40_000,
                },
                ThroughputBand {
                    min_rssi_dbm: -60.0,
                    bits_per_sec: 35_000,
                },
                ThroughputBand {
                    min_rssi_dbm: -70.0,
                    bits_per_sec: 28_000,
                },
                ThroughputBand {
                    min_rssi_dbm: -80.0,
                    bits_per_sec: 25_000,
                },
            ],
            floor_bits_per_sec: 20_000,
        }
    }
}

impl ThroughputSteps {
    pub fn validate(&self) -> Result<(), RadioError> {
        let mut prev_boundary = f64::INFINITY;
        let mut prev_rate = u32::MAX;
        for band in &self.bands {
            if band.min_rssi_dbm >= prev_boundary {
                return Err(RadioError::InvalidSteps(
                    "band boundaries must strictly decrease".into(),
                ));
            }
            if band.bits_per_sec > prev_rate {
                return Err(RadioError::InvalidSteps(
                    "throughput must not increase as signal weakens".into(),
                ));
            }
            if !(THROUGHPUT_MIN_BPS..=THROUGHPUT_MAX_BPS).contains(&band.bits_per_sec) {
                return Err(RadioError::InvalidSteps(format!(
                    "band rate {} outside [{THROUGHPUT_MIN_BPS}, {THROUGHPUT_MAX_BPS}]",
                    band.bits_per_sec
                )));
            }
            prev_boundary = band.min_rssi_dbm;
            prev_rate = band.bits_per_sec;
        }
        if self.floor_bits_per_sec > prev_rate
            || !(THROUGHPUT_MIN_BPS..=THROUGHPUT_MAX_BPS).contains(&self.floor_bits_per_sec)
        {
            return Err(RadioError::InvalidSteps("invalid floor rate".into()));
        }
        Ok(())
    }
}

/// Throughput for the given RSSI.
pub fn throughput_for(rssi_dbm: f64, steps: &ThroughputSteps) -> u32 {
    for band in &steps.bands {
        if rssi_dbm > band.min_rssi_dbm {
            return band.bits_per_sec;
        }
    }
    steps.floor_bits_per_sec
}

/// Link admission policy: a link is usable while its RSSI stays at or above
/// the disconnect threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkPolicy {
    pub disconnect_threshold_dbm: f64,
}

impl Default for LinkPolicy {
    fn default() -> Self {
        Self {
            disconnect_threshold_dbm: DEFAULT_DISCONNECT_THRESHOLD_DBM,
        }
    }
}

impl LinkPolicy {
    pub fn validate(&self) -> Result<(), RadioError> {
        // Weakest successfully observed link was -86 dBm; the disconnect
        // threshold must sit strictly below that.
        if !(self.disconnect_threshold_dbm < -86.0) {
            return Err(RadioError::InvalidModel(format!(
                "disconnect threshold {} dBm must be below -86 dBm",
                self.disconnect_threshold_dbm
            )));
        }
        Ok(())
    }
}

/// True if a link with this RSSI still delivers data.
pub fn link_viable(rssi_dbm: f64, policy: &LinkPolicy) -> bool {
    rssi_dbm >= policy.disconnect_threshold_dbm
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn latency_anchor_values_are_exact() {
        let t = LatencyTable::default();
        let expected = [
            (10, 1, 0.048),
            (50, 1, 0.090),
            (100, 1, 0.114),
            (10, 2, 0.082),
            (50, 2, 0.120),
            (100, 2, 0.200),
            (10, 3, 0.115),
            (50, 3, 0.224),
            (100, 3, 0.411),
        ];
        for (bytes, hops, secs) in expected {
            assert_eq!(hop_latency_total(bytes, hops, &t).unwrap(), secs);
        }
    }

    #[test]
    fn latency_extrapolates_extra_hops_with_last_increment() {
        let t = LatencyTable::default();
        let four = hop_latency_total(100, 4, &t).unwrap();
        assert_relative_eq!(four, 0.411 + (0.411 - 0.200), epsilon = 1e-12);
        let five = hop_latency_total(100, 5, &t).unwrap();
        assert_relative_eq!(five, 0.411 + 2.0 * (0.411 - 0.200), epsilon = 1e-12);
    }

    #[test]
    fn latency_clamps_small_payloads_and_extends_large_ones() {
        let t = LatencyTable::default();
        assert_eq!(hop_latency_total(1, 1, &t).unwrap(), 0.048);
        assert_eq!(hop_latency_total(9, 3, &t).unwrap(), 0.115);
        // 150 bytes at 1 hop: continue the 50->100 slope.
        let v = hop_latency_total(150, 1, &t).unwrap();
        assert_relative_eq!(v, 0.114 + 50.0 * (0.114 - 0.090) / 50.0, epsilon = 1e-12);
    }

    #[test]
    fn latency_rejects_zero_args() {
        let t = LatencyTable::default();
        assert!(matches!(
            hop_latency_total(0, 1, &t),
            Err(RadioError::InvalidPayload)
        ));
        assert!(matches!(
            hop_latency_total(10, 0, &t),
            Err(RadioError::InvalidHops)
        ));
    }

    #[test]
    fn latency_table_rejects_non_monotone_anchors() {
        let mut anchors = LatencyTable::default().anchors;
        anchors[1][0] = 0.01; // below the 1-hop value
        assert!(LatencyTable::new(anchors).is_err());
    }

    proptest! {
        #[test]
        fn latency_monotone_in_bytes_and_hops(bytes in 1u32..240, hops in 1u32..8) {
            let t = LatencyTable::default();
            let v = hop_latency_total(bytes, hops, &t).unwrap();
            let v_bytes = hop_latency_total(bytes + 1, hops, &t).unwrap();
            let v_hops = hop_latency_total(bytes, hops + 1, &t).unwrap();
            prop_assert!(v_bytes >= v);
            prop_assert!(v_hops >= v);
        }

        #[test]
        fn deterministic_rssi_strictly_decreasing(d in 1.0f64..799.0) {
            let m = PathLossModel::default();
            let near = rssi_at(d, &m).unwrap();
            let far = rssi_at(d + 1.0, &m).unwrap();
            prop_assert!(far < near);
        }

        #[test]
        fn throughput_monotone_and_bounded(rssi in -120.0f64..0.0) {
            let steps = ThroughputSteps::default();
            let here = throughput_for(rssi, &steps);
            let weaker = throughput_for(rssi - 1.0, &steps);
            prop_assert!(weaker <= here);
            prop_assert!((20_000..=40_000).contains(&here));
        }
    }

    #[test]
    fn rssi_at_reference_distance_is_ref_value() {
        let m = PathLossModel {
            ref_rssi_dbm: -70.0,
            exponent_n: 2.7,
            noise_sigma_db: 0.0,
            max_link_range_m: 800.0,
        };
        assert_eq!(rssi_at(10.0, &m).unwrap(), -70.0);
    }

    #[test]
    fn rssi_rejects_bad_distances() {
        let m = PathLossModel::default();
        assert!(matches!(
            rssi_at(0.0, &m),
            Err(RadioError::InvalidDistance(_))
        ));
        assert!(matches!(
            rssi_at(900.0, &m),
            Err(RadioError::OutOfRange { .. })
        ));
    }

    #[test]
    fn stochastic_rssi_reproducible_for_fixed_seed() {
        let m = PathLossModel::default();
        let mut a = StdRng::seed_from_u64(7);
        let mut b = StdRng::seed_from_u64(7);
        for _ in 0..32 {
            let va = rssi_at_noisy(25.0, &m, &mut a).unwrap();
            let vb = rssi_at_noisy(25.0, &m, &mut b).unwrap();
            assert_eq!(va, vb);
        }
    }

    /// Calibration corpus: the nine measured (distance, RSSI) points.
    pub(crate) fn calibration_corpus() -> Vec<RssiMeasurement> {
        [
            (10.0, -67.0),
            (10.0, -68.0),
            (10.0, -62.0),
            (20.0, -77.0),
            (20.0, -79.0),
            (20.0, -75.0),
            (30.0, -82.0),
            (30.0, -85.0),
            (30.0, -86.0),
        ]
        .iter()
        .map(|&(distance_m, rssi_dbm)| RssiMeasurement {
            distance_m,
            rssi_dbm,
        })
        .collect()
    }

    /// Independent fit oracle: solves the 2x2 normal equations directly
    /// instead of the covariance form used by the implementation.
    fn normal_equation_fit(points: &[RssiMeasurement]) -> (f64, f64) {
        let n = points.len() as f64;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for p in points {
            let x = (p.distance_m / 10.0).log10();
            sx += x;
            sy += p.rssi_dbm;
            sxx += x * x;
            sxy += x * p.rssi_dbm;
        }
        let det = n * sxx - sx * sx;
        let slope = (n * sxy - sx * sy) / det;
        let intercept = (sy * sxx - sx * sxy) / det;
        (intercept, -slope / 10.0)
    }

    #[test]
    fn fit_matches_normal_equation_oracle_on_calibration_corpus() {
        let corpus = calibration_corpus();
        let model = fit_pathloss(&corpus).unwrap();
        let (oracle_ref, oracle_n) = normal_equation_fit(&corpus);
        assert_relative_eq!(model.ref_rssi_dbm, oracle_ref, epsilon = 1e-9);
        assert_relative_eq!(model.exponent_n, oracle_n, epsilon = 1e-9);
        // Frozen values from the oracle.
        assert_relative_eq!(model.exponent_n, 3.8964695773703695, epsilon = 1e-9);
        assert_relative_eq!(model.ref_rssi_dbm, -65.5598577542914, epsilon = 1e-9);
    }

    #[test]
    fn fit_residuals_against_per_distance_means_within_2_db() {
        let corpus = calibration_corpus();
        let model = fit_pathloss(&corpus).unwrap();
        let means = [(10.0, -65.666_666_666_666_67), (20.0, -77.0), (30.0, -84.333_333_333_333_33)];
        for (d, mean) in means {
            let pred = rssi_at(d, &model).unwrap();
            assert!(
                (pred - mean).abs() <= 2.0,
                "residual {} at {d} m exceeds 2 dB",
                (pred - mean).abs()
            );
        }
        // Spot values: roughly -65.6 dBm at 10 m and -84.2 dBm at 30 m.
        assert_relative_eq!(rssi_at(10.0, &model).unwrap(), -65.56, epsilon = 0.01);
        assert_relative_eq!(rssi_at(30.0, &model).unwrap(), -84.15, epsilon = 0.01);
    }

    #[test]
    fn fit_two_points_is_exact() {
        let points = vec![
            RssiMeasurement {
                distance_m: 10.0,
                rssi_dbm: -60.0,
            },
            RssiMeasurement {
                distance_m: 100.0,
                rssi_dbm: -80.0,
            },
        ];
        let model = fit_pathloss(&points).unwrap();
        assert_relative_eq!(model.exponent_n, 2.0, epsilon = 1e-12);
        assert_relative_eq!(model.ref_rssi_dbm, -60.0, epsilon = 1e-12);
    }

    #[test]
    fn fit_single_distance_is_degenerate() {
        let points = vec![
            RssiMeasurement {
                distance_m: 10.0,
                rssi_dbm: -60.0,
            },
            RssiMeasurement {
                distance_m: 10.0,
                rssi_dbm: -62.0,
            },
        ];
        assert!(matches!(
            fit_pathloss(&points),
            Err(RadioError::DegenerateFit)
        ));
    }

    #[test]
    fn throughput_steps_match_measured_bands() {
        let steps = ThroughputSteps::default();
        assert_eq!(throughput_for(-40.0, &steps), 40_000);
        assert_eq!(throughput_for(-50.0, &steps), 35_000);
        assert_eq!(throughput_for(-60.0, &steps), 28_000);
        assert_eq!(throughput_for(-70.0, &steps), 25_000);
        assert_eq!(throughput_for(-80.0, &steps), 20_000);
        assert_eq!(throughput_for(-85.0, &steps), 20_000);
    }

    #[test]
    fn link_viability_threshold_is_inclusive() {
        let policy = LinkPolicy::default();
        assert!(link_viable(-86.0, &policy));
        assert!(!link_viable(-95.0, &policy));
        assert!(link_viable(-90.0, &policy));
    }

    #[test]
    fn link_policy_rejects_thresholds_at_or_above_minus_86() {
        assert!(LinkPolicy {
            disconnect_threshold_dbm: -86.0
        }
        .validate()
        .is_err());
        assert!(LinkPolicy::default().validate().is_ok());
    }

    #[test]
    fn measurement_csv_parses() {
        let text = "distance_m,bytes,hops,rssi_dbm\n10,10,1,-67\n20,50,2,-79\n";
        let parsed = parse_measurements_csv(text).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].distance_m, 10.0);
        assert_eq!(parsed[1].rssi_dbm, -79.0);
    }
}
