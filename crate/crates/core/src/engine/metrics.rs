//! Metrics aggregation. All run metrics derive from the event log, so the
//! log is the single source of truth: replaying it through
//! [`aggregate_log`] reproduces the metrics exactly.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::energy::PowerProfile;

use super::event::{EventKind, LogEntry};

/// Per-node energy bookkeeping for a completed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeEnergy {
    pub node_id: u32,
    pub consumed_mah: f64,
    pub remaining_mah: f64,
    pub depleted: bool,
}

/// Aggregate results of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub intrusions: u32,
    pub detections: u32,
    pub delivered: u32,
    pub repelled: u32,
    pub reached_core: u32,
    pub still_active: u32,
    pub mean_detection_to_repel_s: Option<f64>,
    pub max_detection_to_repel_s: Option<f64>,
    pub sms_sent: u32,
    pub sms_suppressed: u32,
    pub energy: Vec<NodeEnergy>,
}

/// Scenario constants the aggregator needs alongside the log.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateContext {
    pub duration_s: f64,
    pub wake_delay_s: f64,
    pub node_count: usize,
    pub power: PowerProfile,
    pub battery_capacity_mah: f64,
}

fn parse_id_list(value: &str) -> Vec<u32> {
    value
        .split('|')
        .filter(|s| !s.is_empty())
        .filter_map(|s| s.parse().ok())
        .collect()
}

/// Recomputes every metric from the event log.
pub fn aggregate_log(log: &[LogEntry], ctx: &AggregateContext) -> Metrics {
    let mut spawned: BTreeSet<u32> = BTreeSet::new();
    let mut repelled: BTreeSet<u32> = BTreeSet::new();
    let mut reached_core: BTreeSet<u32> = BTreeSet::new();
    let mut detections = 0u32;
    let mut delivered = 0u32;
    let mut sms_sent = 0u32;
    let mut sms_suppressed = 0u32;
    let mut latency_sum = 0.0f64;
    let mut latency_max = f64::NEG_INFINITY;
    let mut latency_count = 0u32;

    let mut consumed = vec![0.0f64; ctx.node_count];
    for c in consumed.iter_mut() {
        *c += ctx.power.sleep_ma * ctx.duration_s / 3600.0;
    }

    for entry in log {
        match entry.kind {
            EventKind::MoveTick => {
                if let Some(v) = entry.detail_value("spawned") {
                    spawned.extend(parse_id_list(v));
                }
                if let Some(v) = entry.detail_value("repelled") {
                    repelled.extend(parse_id_list(v));
                }
                if let Some(v) = entry.detail_value("core") {
                    reached_core.extend(parse_id_list(v));
                }
            }
            EventKind::Detection => detections += 1,
            EventKind::DeliveryArrival => {
                delivered += 1;
                let latency: f64 = entry
                    .detail_value("latency")
                    .and_then(|v| v.parse().ok())
                    .unwrap_or(0.0);
                let to_repel = latency + ctx.wake_delay_s;
                latency_sum += to_repel;
                latency_max = latency_max.max(to_repel);
                latency_count += 1;
                match entry.detail_value("sms") {
                    Some("suppressed") => sms_suppressed += 1,
                    _ => {}
                }
                let hops: u32 = entry
                    .detail_value("hops")
                    .and_then(|v| v.parse().ok())
                    .unwrap_or(0);
                if hops > 0 {
                    let per_hop_s = latency / hops as f64;
                    let path = entry
                        .detail_value("path")
                        .map(parse_id_list)
                        .unwrap_or_default();
                    for link in path.windows(2) {
                        let (tx, rx) = (link[0] as usize, link[1] as usize);
                        if tx < consumed.len() {
                            consumed[tx] += ctx.power.tx_ma * per_hop_s / 3600.0;
                        }
                        if rx < consumed.len() {
                            consumed[rx] += ctx.power.rx_ma * per_hop_s / 3600.0;
                        }
                    }
                }
            }
            EventKind::RepellerOff => {
                if let (Some(node), Some(since)) = (
                    entry.node_id,
                    entry.detail_value("since").and_then(|v| v.parse::<f64>().ok()),
                ) {
                    let node = node as usize;
                    if node < consumed.len() {
                        consumed[node] += ctx.power.repeller_ma * (entry.time_s - since) / 3600.0;
                    }
                }
            }
            EventKind::SmsDispatch => sms_sent += 1,
            EventKind::RepellerOn | EventKind::End => {}
        }
    }

    let still: BTreeSet<u32> = spawned
        .iter()
        .copied()
        .filter(|id| !repelled.contains(id) && !reached_core.contains(id))
        .collect();

    let energy = consumed
        .iter()
        .enumerate()
        .map(|(node_id, &consumed_mah)| {
            let remaining_mah = (ctx.battery_capacity_mah - consumed_mah).max(0.0);
            NodeEnergy {
                node_id: node_id as u32,
                consumed_mah,
                remaining_mah,
                depleted: remaining_mah <= 0.0,
            }
        })
        .collect();

    Metrics {
        intrusions: spawned.len() as u32,
        detections,
        delivered,
        repelled: repelled.len() as u32,
        reached_core: reached_core.len() as u32,
        still_active: still.len() as u32,
        mean_detection_to_repel_s: (latency_count > 0)
            .then(|| latency_sum / latency_count as f64),
        max_detection_to_repel_s: (latency_count > 0).then_some(latency_max),
        sms_sent,
        sms_suppressed,
        energy,
    }
}

/// Renders per-node energy as CSV `node_id,consumed_mah,remaining_mah,depleted`.
pub fn energy_to_csv(energy: &[NodeEnergy]) -> String {
    let mut out = String::from("node_id,consumed_mah,remaining_mah,depleted\n");
    for e in energy {
        out.push_str(&format!(
            "{},{},{},{}\n",
            e.node_id, e.consumed_mah, e.remaining_mah, e.depleted
        ));
    }
    out
}
