//! Table replicas, calibration comparisons and run summaries. All output
//! is byte-stable: seconds print with three decimals, throughput as
//! integers.

use serde::{Deserialize, Serialize};

use crate::engine::{Metrics, SimResult};
use crate::radio::{
    fit_pathloss, hop_latency_total, rssi_at, throughput_for, LatencyTable, PathLossModel,
    RadioError, RssiMeasurement, ThroughputSteps, LATENCY_BYTE_ANCHORS, LATENCY_HOP_ANCHORS,
};

/// Node spacing behind the hops -> distance mapping in the latency table.
pub const HOP_SPACING_M: f64 = 10.0;

/// Bundled calibration corpus CSV (distance, payload, hops, RSSI).
pub const BUNDLED_RSSI_CSV: &str = include_str!("../data/table3_rssi.csv");

/// One row of the multi-hop latency table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyRow {
    pub distance_m: u32,
    pub bytes: u32,
    pub hops: u32,
    pub seconds: f64,
}

/// The nine-row latency table at the anchor points, distances derived from
/// hops at 10 m spacing.
pub fn latency_table_rows(table: &LatencyTable) -> Result<Vec<LatencyRow>, RadioError> {
    let mut rows = Vec::with_capacity(9);
    for &hops in &LATENCY_HOP_ANCHORS {
        for &bytes in &LATENCY_BYTE_ANCHORS {
            rows.push(LatencyRow {
                distance_m: hops * HOP_SPACING_M as u32,
                bytes,
                hops,
                seconds: hop_latency_total(bytes, hops, table)?,
            });
        }
    }
    Ok(rows)
}

/// Renders the latency rows as CSV with three-decimal seconds.
pub fn latency_table_csv(table: &LatencyTable) -> Result<String, RadioError> {
    let mut out = String::from("distance_m,bytes,hops,seconds\n");
    for row in latency_table_rows(table)? {
        out.push_str(&format!(
            "{},{},{},{:.3}\n",
            row.distance_m, row.bytes, row.hops, row.seconds
        ));
    }
    Ok(out)
}

/// One row of the throughput step table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputRow {
    pub rssi_band: String,
    pub hops: u32,
    pub bits_per_sec: u32,
}

/// The six-row throughput table: each band evaluated at a representative
/// RSSI through the step function.
pub fn throughput_table_rows(steps: &ThroughputSteps) -> Vec<ThroughputRow> {
    let bands: [(&str, f64); 6] = [
        ("< -50", -40.0),
        ("-50", -50.0),
        ("-60", -60.0),
        ("-70", -70.0),
        ("-80", -80.0),
        ("> -80", -85.0),
    ];
    bands
        .iter()
        .map(|&(label, rssi)| ThroughputRow {
            rssi_band: label.to_string(),
            hops: 1,
            bits_per_sec: throughput_for(rssi, steps),
        })
        .collect()
}

pub fn throughput_table_csv(steps: &ThroughputSteps) -> String {
    let mut out = String::from("rssi_band,hops,bits_per_sec\n");
    for row in throughput_table_rows(steps) {
        out.push_str(&format!(
            "{},{},{}\n",
            row.rssi_band, row.hops, row.bits_per_sec
        ));
    }
    out
}

/// Model-vs-measurement comparison at one distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RssiComparisonRow {
    pub distance_m: f64,
    pub measured_mean_dbm: f64,
    pub model_dbm: f64,
    pub residual_db: f64,
}

/// Compares a fitted model against the per-distance means of the
/// measurement corpus.
pub fn rssi_comparison(
    model: &PathLossModel,
    measurements: &[RssiMeasurement],
) -> Result<Vec<RssiComparisonRow>, RadioError> {
    let mut distances: Vec<f64> = measurements.iter().map(|m| m.distance_m).collect();
    distances.sort_by(f64::total_cmp);
    distances.dedup();
    let mut rows = Vec::with_capacity(distances.len());
    for d in distances {
        let (sum, n) = measurements
            .iter()
            .filter(|m| m.distance_m == d)
            .fold((0.0, 0u32), |(s, n), m| (s + m.rssi_dbm, n + 1));
        let mean = sum / n as f64;
        let predicted = rssi_at(d, model)?;
        rows.push(RssiComparisonRow {
            distance_m: d,
            measured_mean_dbm: mean,
            model_dbm: predicted,
            residual_db: predicted - mean,
        });
    }
    Ok(rows)
}

pub fn rssi_comparison_csv(
    model: &PathLossModel,
    measurements: &[RssiMeasurement],
) -> Result<String, RadioError> {
    let mut out = String::from("distance_m,measured_mean_dbm,model_dbm,residual_db\n");
    for row in rssi_comparison(model, measurements)? {
        out.push_str(&format!(
            "{},{:.3},{:.3},{:.3}\n",
            row.distance_m, row.measured_mean_dbm, row.model_dbm, row.residual_db
        ));
    }
    Ok(out)
}

/// Largest absolute residual of the fit against per-distance means.
pub fn max_fit_residual(
    model: &PathLossModel,
    measurements: &[RssiMeasurement],
) -> Result<f64, RadioError> {
    Ok(rssi_comparison(model, measurements)?
        .iter()
        .map(|r| r.residual_db.abs())
        .fold(0.0, f64::max))
}

/// The bundled calibration corpus.
pub fn bundled_measurements() -> Vec<RssiMeasurement> {
    crate::radio::parse_measurements_csv(BUNDLED_RSSI_CSV).expect("bundled corpus is valid")
}

/// Fits the path loss model over the bundled corpus.
pub fn calibrated_pathloss() -> PathLossModel {
    fit_pathloss(&bundled_measurements()).expect("bundled corpus fits")
}

/// JSON-ready run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub intrusions: u32,
    pub detections: u32,
    pub delivered: u32,
    pub repelled: u32,
    pub reached_core: u32,
    pub still_active: u32,
    /// `None` when there were no intrusions ("n/a" in text output).
    pub protection_rate: Option<f64>,
    pub mean_detection_to_repel_s: Option<f64>,
    pub max_detection_to_repel_s: Option<f64>,
    pub sms_sent: u32,
    pub sms_suppressed: u32,
    pub total_energy_mah: f64,
}

pub fn run_summary(metrics: &Metrics) -> RunSummary {
    RunSummary {
        intrusions: metrics.intrusions,
        detections: metrics.detections,
        delivered: metrics.delivered,
        repelled: metrics.repelled,
        reached_core: metrics.reached_core,
        still_active: metrics.still_active,
        protection_rate: (metrics.intrusions > 0)
            .then(|| metrics.repelled as f64 / metrics.intrusions as f64),
        mean_detection_to_repel_s: metrics.mean_detection_to_repel_s,
        max_detection_to_repel_s: metrics.max_detection_to_repel_s,
        sms_sent: metrics.sms_sent,
        sms_suppressed: metrics.sms_suppressed,
        total_energy_mah: metrics.energy.iter().map(|e| e.consumed_mah).sum(),
    }
}

pub fn summary_json(metrics: &Metrics) -> String {
    serde_json::to_string_pretty(&run_summary(metrics)).expect("summary serializes")
}

/// Human-readable run summary.
pub fn summary_text(result: &SimResult) -> String {
    let s = run_summary(&result.metrics);
    let rate = s
        .protection_rate
        .map(|r| format!("{:.3}", r))
        .unwrap_or_else(|| "n/a".into());
    let mean = s
        .mean_detection_to_repel_s
        .map(|v| format!("{v:.3} s"))
        .unwrap_or_else(|| "n/a".into());
    let max = s
        .max_detection_to_repel_s
        .map(|v| format!("{v:.3} s"))
        .unwrap_or_else(|| "n/a".into());
    let mut out = String::new();
    out.push_str(&format!(
        "intrusions {} | repelled {} | reached core {} | still active {}\n",
        s.intrusions, s.repelled, s.reached_core, s.still_active
    ));
    out.push_str(&format!("protection rate: {rate}\n"));
    out.push_str(&format!(
        "detections {} | delivered {} | detection-to-repel mean {mean}, max {max}\n",
        s.detections, s.delivered
    ));
    out.push_str(&format!(
        "sms sent {} | suppressed {}\n",
        s.sms_sent, s.sms_suppressed
    ));
    out.push_str(&format!(
        "energy consumed {:.4} mAh over {} nodes\n",
        s.total_energy_mah,
        result.metrics.energy.len()
    ));
    out
}

/// Gnuplot-ready data: latency vs hop count, one column per payload size.
pub fn latency_plot_data(table: &LatencyTable) -> Result<String, RadioError> {
    let mut out = String::from("# hops seconds_10B seconds_50B seconds_100B\n");
    for &hops in &LATENCY_HOP_ANCHORS {
        out.push_str(&format!(
            "{} {:.3} {:.3} {:.3}\n",
            hops,
            hop_latency_total(10, hops, table)?,
            hop_latency_total(50, hops, table)?,
            hop_latency_total(100, hops, table)?,
        ));
    }
    Ok(out)
}

/// Gnuplot-ready data: measured mean RSSI and fitted model vs distance.
pub fn rssi_plot_data(
    model: &PathLossModel,
    measurements: &[RssiMeasurement],
) -> Result<String, RadioError> {
    let mut out = String::from("# distance_m measured_mean_dbm model_dbm\n");
    for row in rssi_comparison(model, measurements)? {
        out.push_str(&format!(
            "{} {:.3} {:.3}\n",
            row.distance_m, row.measured_mean_dbm, row.model_dbm
        ));
    }
    Ok(out)
}

/// Gnuplot-ready data: throughput across the RSSI range.
pub fn throughput_plot_data(steps: &ThroughputSteps) -> String {
    let mut out = String::from("# rssi_dbm bits_per_sec\n");
    let mut rssi = -95.0;
    while rssi <= -40.0 {
        out.push_str(&format!("{rssi} {}\n", throughput_for(rssi, steps)));
        rssi += 5.0;
    }
    out
}
