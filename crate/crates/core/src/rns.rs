//! The Repelling and Notifying System: a sleep/wake controller at the
//! coordinator that drives the ultrasonic repeller and emits SMS records
//! through a simulated GSM gateway.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::MAX_REPELLER_CURRENT_MA;
use crate::nettree::DeliveryReport;
use crate::wildlife::DetectionEvent;

/// Default controller wake-up delay, seconds.
pub const DEFAULT_WAKE_DELAY_S: f64 = 0.010;
/// Default repeller hold time per trigger, seconds.
pub const DEFAULT_REPEL_DURATION_S: f64 = 30.0;
/// Default SMS dedup window, seconds.
pub const DEFAULT_SMS_DEDUP_WINDOW_S: f64 = 60.0;
/// Default simulated gateway delivery latency, seconds.
pub const DEFAULT_SMS_DELIVERY_LATENCY_S: f64 = 5.0;

#[derive(Debug, Error)]
pub enum RnsError {
    #[error("latency is undefined for an undelivered report")]
    Undelivered,
    #[error("invalid repeller: {0}")]
    InvalidRepeller(String),
}

/// The ultrasonic repeller. Its effective radius derives from the covered
/// area: radius = sqrt(area / pi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Repeller {
    pub position: (f64, f64),
    pub coverage_area_m2: f64,
    pub frequency_hz: f64,
    pub active_current_ma: f64,
    pub repel_duration_s: f64,
}

impl Repeller {
    pub fn new(position: (f64, f64)) -> Self {
        Self {
            position,
            coverage_area_m2: 300.0,
            frequency_hz: 15_000.0,
            active_current_ma: 200.0,
            repel_duration_s: DEFAULT_REPEL_DURATION_S,
        }
    }

    pub fn validate(&self) -> Result<(), RnsError> {
        if !(self.coverage_area_m2 > 0.0) {
            return Err(RnsError::InvalidRepeller(format!(
                "coverage area must be positive, got {}",
                self.coverage_area_m2
            )));
        }
        if !(self.frequency_hz > 0.0) {
            return Err(RnsError::InvalidRepeller(format!(
                "frequency must be positive, got {}",
                self.frequency_hz
            )));
        }
        if self.active_current_ma > MAX_REPELLER_CURRENT_MA {
            return Err(RnsError::InvalidRepeller(format!(
                "active current {} mA exceeds the {} mA bound",
                self.active_current_ma, MAX_REPELLER_CURRENT_MA
            )));
        }
        if !(self.repel_duration_s > 0.0) {
            return Err(RnsError::InvalidRepeller(format!(
                "repel duration must be positive, got {}",
                self.repel_duration_s
            )));
        }
        Ok(())
    }
}

/// Effective repeller radius in meters for its covered area.
pub fn repeller_radius(rep: &Repeller) -> f64 {
    (rep.coverage_area_m2 / std::f64::consts::PI).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RnsMode {
    Sleep,
    Waking,
    Repelling,
}

/// Controller state. The repeller is active exactly while the mode is
/// `Repelling`.
#[derive(Debug, Clone, PartialEq)]
pub struct RnsState {
    pub mode: RnsMode,
    pub wake_delay_s: f64,
    /// When the current (or pending) repelling interval ends.
    pub active_until_s: Option<f64>,
}

impl RnsState {
    pub fn new(wake_delay_s: f64) -> Self {
        Self {
            mode: RnsMode::Sleep,
            wake_delay_s,
            active_until_s: None,
        }
    }

    pub fn repeller_active(&self, now_s: f64) -> bool {
        self.mode == RnsMode::Repelling && self.active_until_s.is_some_and(|t| now_s < t)
    }
}

/// Actions the controller requests from the scheduler in response to a
/// detection.
#[derive(Debug, Clone, PartialEq)]
pub enum RnsAction {
    /// Turn the repeller on at this time (end of the wake-up delay).
    ScheduleRepellerOn { at_s: f64 },
    /// (Re-)schedule the repeller shutdown at this time.
    ScheduleRepellerOff { at_s: f64 },
    /// Notify the farmer about this detection (dedup applied downstream).
    Notify { event: DetectionEvent },
}

/// Handles a delivered detection. From sleep the controller wakes first and
/// repels afterwards; while waking or repelling the active window extends.
/// A notification is always requested; the gateway applies dedup.
pub fn on_detection(
    state: &mut RnsState,
    event: &DetectionEvent,
    now_s: f64,
    repel_duration_s: f64,
) -> Vec<RnsAction> {
    let mut actions = Vec::with_capacity(3);
    let until = now_s + state.wake_delay_s + repel_duration_s;
    match state.mode {
        RnsMode::Sleep => {
            state.mode = RnsMode::Waking;
            state.active_until_s = Some(until);
            actions.push(RnsAction::ScheduleRepellerOn {
                at_s: now_s + state.wake_delay_s,
            });
        }
        RnsMode::Waking => {
            // Wake already in flight; just extend the window. The pending
            // RepellerOn picks up the latest end time.
            state.active_until_s = Some(until);
        }
        RnsMode::Repelling => {
            state.active_until_s = Some(until);
            actions.push(RnsAction::ScheduleRepellerOff { at_s: until });
        }
    }
    actions.push(RnsAction::Notify { event: *event });
    actions
}

/// Completes the wake-up: the controller enters `Repelling` and asks for a
/// shutdown at the current end of the active window.
pub fn on_wake_complete(state: &mut RnsState) -> Vec<RnsAction> {
    if state.mode != RnsMode::Waking {
        return Vec::new();
    }
    state.mode = RnsMode::Repelling;
    match state.active_until_s {
        Some(until) => vec![RnsAction::ScheduleRepellerOff { at_s: until }],
        None => Vec::new(),
    }
}

/// Handles a scheduled shutdown. Stale shutdowns (the window was extended
/// past them) are ignored; returns true when the repeller actually turned
/// off.
pub fn on_repeller_off(state: &mut RnsState, now_s: f64) -> bool {
    if state.mode != RnsMode::Repelling {
        return false;
    }
    match state.active_until_s {
        Some(until) if now_s >= until => {
            state.mode = RnsMode::Sleep;
            state.active_until_s = None;
            true
        }
        _ => false,
    }
}

/// Detection-to-repel latency: transport time plus the controller wake
/// delay.
pub fn detection_to_repel_latency(
    report: &DeliveryReport,
    state: &RnsState,
) -> Result<f64, RnsError> {
    if !report.delivered {
        return Err(RnsError::Undelivered);
    }
    Ok(report.total_latency_s + state.wake_delay_s)
}

/// One notification record in the gateway log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmsRecord {
    pub timestamp_s: f64,
    /// When the carrier delivered it; `None` while queued during an outage.
    pub delivered_at_s: Option<f64>,
    pub sensor_id: u32,
    pub message: String,
    pub dedup_key: String,
    pub suppressed: bool,
    pub retry: bool,
}

/// Simulated GSM gateway: append-only log, dedup window keyed by sensor,
/// fixed delivery latency, and an outage mode that queues instead of
/// dropping.
#[derive(Debug, Clone, PartialEq)]
pub struct SmsGateway {
    pub delivery_latency_s: f64,
    pub dedup_window_s: f64,
    pub outage: bool,
    log: Vec<SmsRecord>,
}

impl Default for SmsGateway {
    fn default() -> Self {
        Self::new(DEFAULT_SMS_DELIVERY_LATENCY_S, DEFAULT_SMS_DEDUP_WINDOW_S)
    }
}

impl SmsGateway {
    pub fn new(delivery_latency_s: f64, dedup_window_s: f64) -> Self {
        Self {
            delivery_latency_s,
            dedup_window_s,
            outage: false,
            log: Vec::new(),
        }
    }

    pub fn log(&self) -> &[SmsRecord] {
        &self.log
    }

    pub fn sent_count(&self) -> usize {
        self.log.iter().filter(|r| !r.suppressed).count()
    }

    pub fn suppressed_count(&self) -> usize {
        self.log.iter().filter(|r| r.suppressed).count()
    }

    /// Marks queued-retry records delivered once the outage clears.
    pub fn flush_retries(&mut self, now_s: f64) {
        if self.outage {
            return;
        }
        let latency = self.delivery_latency_s;
        for rec in &mut self.log {
            if rec.retry && rec.delivered_at_s.is_none() && !rec.suppressed {
                rec.delivered_at_s = Some(now_s + latency);
            }
        }
    }

    /// Exports the log as CSV `timestamp_s,delivered_at_s,sensor_id,message,suppressed`.
    pub fn to_csv(&self) -> String {
        sms_log_to_csv(&self.log)
    }
}

/// Renders SMS records as CSV `timestamp_s,delivered_at_s,sensor_id,message,suppressed`.
pub fn sms_log_to_csv(records: &[SmsRecord]) -> String {
    let mut out = String::from("timestamp_s,delivered_at_s,sensor_id,message,suppressed\n");
    for rec in records {
        let delivered = rec
            .delivered_at_s
            .map(|t| t.to_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            rec.timestamp_s, delivered, rec.sensor_id, rec.message, rec.suppressed
        ));
    }
    out
}

/// Sends a notification for the detection unless an identical dedup key was
/// already sent within the dedup window. Returns the record when a new SMS
/// actually goes out; suppressed attempts are still logged with the flag
/// set.
pub fn send_sms(gateway: &mut SmsGateway, event: &DetectionEvent, now_s: f64) -> Option<SmsRecord> {
    let dedup_key = format!("sensor-{}", event.sensor_node.0);
    let duplicate = gateway.log.iter().any(|r| {
        !r.suppressed && r.dedup_key == dedup_key && now_s - r.timestamp_s < gateway.dedup_window_s
    });
    let message = format!("INTRUSION sensor={} t={}", event.sensor_node.0, event.time_s);
    if duplicate {
        gateway.log.push(SmsRecord {
            timestamp_s: now_s,
            delivered_at_s: None,
            sensor_id: event.sensor_node.0,
            message,
            dedup_key,
            suppressed: true,
            retry: false,
        });
        return None;
    }
    let record = SmsRecord {
        timestamp_s: now_s,
        delivered_at_s: if gateway.outage {
            None
        } else {
            Some(now_s + gateway.delivery_latency_s)
        },
        sensor_id: event.sensor_node.0,
        message,
        dedup_key,
        suppressed: false,
        retry: gateway.outage,
    };
    gateway.log.push(record.clone());
    Some(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nettree::NodeId;
    use approx::assert_relative_eq;

    fn event(sensor: u32, time_s: f64) -> DetectionEvent {
        DetectionEvent {
            sensor_node: NodeId(sensor),
            time_s,
        }
    }

    #[test]
    fn radius_from_coverage_area() {
        let mut rep = Repeller::new((0.0, 0.0));
        assert_relative_eq!(repeller_radius(&rep), 9.772, epsilon = 1e-3);
        rep.coverage_area_m2 = std::f64::consts::PI;
        assert_relative_eq!(repeller_radius(&rep), 1.0, epsilon = 1e-12);
        rep.coverage_area_m2 = 1200.0;
        assert_relative_eq!(repeller_radius(&rep), 2.0 * 9.772, epsilon = 2e-3);
    }

    #[test]
    fn repeller_current_bound_enforced() {
        let mut rep = Repeller::new((0.0, 0.0));
        assert!(rep.validate().is_ok());
        rep.active_current_ma = 250.0;
        assert!(rep.validate().is_err());
    }

    #[test]
    fn sleep_to_repelling_timeline() {
        let mut state = RnsState::new(DEFAULT_WAKE_DELAY_S);
        let actions = on_detection(&mut state, &event(3, 1.0), 1.0, 30.0);
        assert_eq!(state.mode, RnsMode::Waking);
        assert_eq!(state.active_until_s, Some(31.01));
        assert!(actions
            .iter()
            .any(|a| matches!(a, RnsAction::ScheduleRepellerOn { at_s } if *at_s == 1.01)));
        assert!(actions.iter().any(|a| matches!(a, RnsAction::Notify { .. })));

        let wake_actions = on_wake_complete(&mut state);
        assert_eq!(state.mode, RnsMode::Repelling);
        assert!(wake_actions
            .iter()
            .any(|a| matches!(a, RnsAction::ScheduleRepellerOff { at_s } if *at_s == 31.01)));
        assert!(state.repeller_active(5.0));
        assert!(!state.repeller_active(31.02));
    }

    #[test]
    fn retrigger_extends_active_window() {
        let mut state = RnsState::new(DEFAULT_WAKE_DELAY_S);
        state.mode = RnsMode::Repelling;
        state.active_until_s = Some(20.0);
        let actions = on_detection(&mut state, &event(2, 15.0), 15.0, 30.0);
        assert_eq!(state.active_until_s, Some(45.01));
        assert!(actions
            .iter()
            .any(|a| matches!(a, RnsAction::ScheduleRepellerOff { at_s } if *at_s == 45.01)));
        // The stale shutdown at t=20 must be ignored.
        assert!(!on_repeller_off(&mut state, 20.0));
        assert_eq!(state.mode, RnsMode::Repelling);
        assert!(on_repeller_off(&mut state, 45.01));
        assert_eq!(state.mode, RnsMode::Sleep);
        assert!(!state.repeller_active(45.02));
    }

    #[test]
    fn repeller_never_active_in_sleep() {
        let state = RnsState::new(DEFAULT_WAKE_DELAY_S);
        for t in [0.0, 1.0, 100.0] {
            assert!(!state.repeller_active(t));
        }
    }

    #[test]
    fn sms_dedup_window() {
        let mut gw = SmsGateway::default();
        let first = send_sms(&mut gw, &event(3, 0.0), 0.0);
        assert!(first.is_some());
        assert_eq!(first.unwrap().delivered_at_s, Some(5.0));
        // Same sensor 10 s later: suppressed.
        assert!(send_sms(&mut gw, &event(3, 10.0), 10.0).is_none());
        // Different sensor inside the window: sent.
        assert!(send_sms(&mut gw, &event(4, 10.0), 10.0).is_some());
        // Same sensor after the window: sent again.
        assert!(send_sms(&mut gw, &event(3, 70.0), 70.0).is_some());
        assert_eq!(gw.sent_count(), 3);
        assert_eq!(gw.suppressed_count(), 1);
    }

    #[test]
    fn sms_message_format() {
        let mut gw = SmsGateway::default();
        let rec = send_sms(&mut gw, &event(7, 12.5), 12.5).unwrap();
        assert_eq!(rec.message, "INTRUSION sensor=7 t=12.5");
    }

    #[test]
    fn outage_queues_instead_of_dropping() {
        let mut gw = SmsGateway::default();
        gw.outage = true;
        let rec = send_sms(&mut gw, &event(1, 0.0), 0.0).unwrap();
        assert!(rec.retry);
        assert_eq!(rec.delivered_at_s, None);
        gw.outage = false;
        gw.flush_retries(30.0);
        assert_eq!(gw.log()[0].delivered_at_s, Some(35.0));
    }

    #[test]
    fn gateway_log_is_append_only_and_time_ordered() {
        let mut gw = SmsGateway::default();
        for t in [0.0, 10.0, 61.0, 130.0] {
            send_sms(&mut gw, &event(1, t), t);
        }
        let times: Vec<f64> = gw.log().iter().map(|r| r.timestamp_s).collect();
        let mut sorted = times.clone();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(times, sorted);
        assert_eq!(gw.log().len(), 4);
    }

    #[test]
    fn latency_adds_wake_delay_to_transport() {
        use crate::nettree::{deliver, reference_chain_layout, build_tree, NodeId, RadioModels, Topology, TreeParams};
        let (zc, nodes) = reference_chain_layout();
        let tree = build_tree(
            zc,
            &nodes,
            TreeParams::default(),
            &RadioModels::default().pathloss,
            &RadioModels::default().policy,
            Topology::Tree,
        )
        .unwrap();
        let state = RnsState::new(DEFAULT_WAKE_DELAY_S);
        let report =
            deliver::<rand::rngs::StdRng>(&tree, NodeId(3), 100, &RadioModels::default(), None)
                .unwrap();
        let latency = detection_to_repel_latency(&report, &state).unwrap();
        assert_relative_eq!(latency, 0.421, epsilon = 1e-12);

        let report_1hop =
            deliver::<rand::rngs::StdRng>(&tree, NodeId(1), 10, &RadioModels::default(), None)
                .unwrap();
        let latency_1hop = detection_to_repel_latency(&report_1hop, &state).unwrap();
        assert_relative_eq!(latency_1hop, 0.058, epsilon = 1e-12);
    }

    #[test]
    fn latency_undefined_when_undelivered() {
        let state = RnsState::new(DEFAULT_WAKE_DELAY_S);
        let report = DeliveryReport {
            source: NodeId(1),
            delivered: false,
            total_latency_s: 0.411,
            hops: 3,
            per_hop: vec![],
            min_throughput_bps: None,
            path: vec![],
        };
        assert!(matches!(
            detection_to_repel_latency(&report, &state),
            Err(RnsError::Undelivered)
        ));
    }

    #[test]
    fn every_anchor_latency_beats_the_reaction_time() {
        use crate::radio::{hop_latency_total, LatencyTable};
        let table = LatencyTable::default();
        let state = RnsState::new(DEFAULT_WAKE_DELAY_S);
        for hops in 1..=3 {
            for bytes in [10, 50, 100] {
                let transport = hop_latency_total(bytes, hops, &table).unwrap();
                assert!(transport + state.wake_delay_s < 1.0);
            }
        }
    }
}
