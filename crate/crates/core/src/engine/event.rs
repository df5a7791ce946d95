//! Simulation events, the (time, seq) ordered queue, and the event log.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::nettree::NodeId;

/// What happened. The lifecycle runs detection -> delivery -> repel ->
/// notify, interleaved with fixed movement ticks and closed by an end
/// event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    MoveTick,
    Detection,
    DeliveryArrival,
    RepellerOn,
    RepellerOff,
    SmsDispatch,
    End,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::MoveTick => "move_tick",
            EventKind::Detection => "detection",
            EventKind::DeliveryArrival => "delivery_arrival",
            EventKind::RepellerOn => "repeller_on",
            EventKind::RepellerOff => "repeller_off",
            EventKind::SmsDispatch => "sms_dispatch",
            EventKind::End => "end",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "move_tick" => Some(EventKind::MoveTick),
            "detection" => Some(EventKind::Detection),
            "delivery_arrival" => Some(EventKind::DeliveryArrival),
            "repeller_on" => Some(EventKind::RepellerOn),
            "repeller_off" => Some(EventKind::RepellerOff),
            "sms_dispatch" => Some(EventKind::SmsDispatch),
            "end" => Some(EventKind::End),
            _ => None,
        }
    }
}

/// Payload carried by a scheduled event.
#[derive(Debug, Clone, PartialEq)]
pub enum EventPayload {
    None,
    /// A sensor saw an animal.
    Detection { sensor: NodeId, animal: u32 },
    /// A delivered detection arrives at the coordinator.
    Arrival {
        sensor: NodeId,
        animal: u32,
        hops: u32,
        latency_s: f64,
        path: Vec<NodeId>,
        min_throughput_bps: Option<u32>,
    },
    /// A queued SMS leaves the gateway.
    Sms { sensor: NodeId, queued_at_s: f64 },
}

/// A scheduled simulation event. Ordered by (time, seq); seq is unique and
/// assigned in scheduling order, making the execution order a strict total
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct SimEvent {
    pub time_s: f64,
    pub seq: u64,
    pub kind: EventKind,
    pub payload: EventPayload,
}

impl Eq for SimEvent {}

impl Ord for SimEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time_s
            .total_cmp(&other.time_s)
            .then(self.seq.cmp(&other.seq))
    }
}

impl PartialOrd for SimEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Min-queue of pending events with monotone sequence assignment.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<std::cmp::Reverse<SimEvent>>,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn schedule(&mut self, time_s: f64, kind: EventKind, payload: EventPayload) -> u64 {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(std::cmp::Reverse(SimEvent {
            time_s,
            seq,
            kind,
            payload,
        }));
        seq
    }

    pub fn pop(&mut self) -> Option<SimEvent> {
        self.heap.pop().map(|r| r.0)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

/// One row of the exported event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub time_s: f64,
    pub seq: u64,
    pub kind: EventKind,
    pub node_id: Option<u32>,
    pub animal_id: Option<u32>,
    /// Space-separated `key=value` pairs; list values use `|` separators.
    pub detail: String,
}

impl LogEntry {
    /// Fetches `key=...` from the detail string.
    pub fn detail_value<'a>(&'a self, key: &str) -> Option<&'a str> {
        self.detail
            .split(' ')
            .filter_map(|kv| kv.split_once('='))
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v)
    }

    pub fn csv_row(&self) -> String {
        let node = self.node_id.map(|n| n.to_string()).unwrap_or_default();
        let animal = self.animal_id.map(|a| a.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{}\n",
            self.time_s,
            self.seq,
            self.kind.as_str(),
            node,
            animal,
            self.detail
        )
    }
}

pub const EVENT_CSV_HEADER: &str = "time_s,seq,kind,node_id,animal_id,detail\n";

/// Renders the whole log as CSV.
pub fn log_to_csv(log: &[LogEntry]) -> String {
    let mut out = String::from(EVENT_CSV_HEADER);
    for entry in log {
        out.push_str(&entry.csv_row());
    }
    out
}
