//! Deterministic discrete-event scheduler orchestrating the full lifecycle:
//! movement ticks, detections, network delivery, RNS actions, energy
//! accounting and metrics.

pub mod event;
pub mod metrics;

use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{EnergyError, PowerProfile};
use crate::geometry::{coverage_fraction, Field, GeometryError, Placement};
use crate::nettree::{
    build_tree, deliver, NetworkTree, NodeId, RadioModels, Role, Topology, TreeError, TreeParams,
};
use crate::radio::RadioError;
use crate::rns::{
    on_detection, on_repeller_off, on_wake_complete, send_sms, Repeller, RnsAction, RnsError,
    RnsMode, RnsState, SmsGateway, SmsRecord,
};
use crate::wildlife::{
    detect, find_species, repel_effective, spawn_intrusion, step_animal, ActiveRepeller, Animal,
    AnimalState, EntryEdge, MotionSensor, SpeciesProfile, WildlifeError,
};

pub use event::{log_to_csv, EventKind, EventPayload, EventQueue, LogEntry, SimEvent};
pub use metrics::{aggregate_log, energy_to_csv, AggregateContext, Metrics, NodeEnergy};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("scenario validation failed:\n{}", findings_to_string(.0))]
    Validation(Vec<Finding>),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Radio(#[from] RadioError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Wildlife(#[from] WildlifeError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Rns(#[from] RnsError),
}

fn findings_to_string(findings: &[Finding]) -> String {
    findings
        .iter()
        .map(|f| format!("  {f}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    Warning,
    Error,
}

/// A validation finding. Errors stop a run before any event executes;
/// warnings are reported and the run proceeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub message: String,
}

impl std::fmt::Display for Finding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "[{tag}] {}", self.message)
    }
}

fn warn(message: impl Into<String>) -> Finding {
    Finding {
        severity: Severity::Warning,
        message: message.into(),
    }
}

fn error(message: impl Into<String>) -> Finding {
    Finding {
        severity: Severity::Error,
        message: message.into(),
    }
}

/// How the sensor placement was produced; grid placements promise full
/// field coverage and are validated against it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlacementStrategy {
    Grid,
    Perimeter,
    Explicit,
}

/// One scheduled intrusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntrusionSpec {
    pub time_s: f64,
    pub species: String,
    pub edge: EntryEdge,
}

/// A complete, self-contained simulation input. Identical scenarios
/// (including the seed) always produce identical results.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub field: Field,
    pub placement: Placement,
    pub placement_strategy: PlacementStrategy,
    /// Role per placed sensor, same order as the placement.
    pub roles: Vec<Role>,
    /// Relay-only infrastructure nodes: tree members without motion
    /// sensors. They join before the sensors, so node ids run
    /// coordinator (0), relays (1..), sensors (relays+1..).
    pub relays: Vec<((f64, f64), Role)>,
    pub coordinator_pos: (f64, f64),
    pub topology: Topology,
    pub tree_params: TreeParams,
    pub radio: RadioModels,
    pub stochastic_rssi: bool,
    pub payload_bytes: u32,
    pub species: Vec<SpeciesProfile>,
    pub intrusions: Vec<IntrusionSpec>,
    pub detection_radius_m: f64,
    pub refractory_s: f64,
    pub repeller: Repeller,
    pub wake_delay_s: f64,
    pub sms_dedup_window_s: f64,
    pub sms_delivery_latency_s: f64,
    /// Vertebrate reaction time budget the repel latency is judged against.
    pub reaction_time_s: f64,
    pub power: PowerProfile,
    pub battery_capacity_mah: f64,
    pub tick_dt_s: f64,
    pub duration_s: f64,
    pub seed: u64,
}

/// Final disposition of one intrusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Repelled,
    ReachedCore,
    StillActive,
}

/// Per-animal summary attached to the result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnimalSummary {
    pub id: u32,
    pub species: String,
    pub final_state: AnimalState,
    pub outcome: Outcome,
}

/// A completed run: the ordered event log, log-derived metrics, and the
/// supporting artifacts for export.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub log: Vec<LogEntry>,
    pub metrics: Metrics,
    pub animals: Vec<AnimalSummary>,
    pub sms_log: Vec<SmsRecord>,
    pub tree: NetworkTree,
    pub findings: Vec<Finding>,
}

impl Scenario {
    pub fn aggregate_context(&self) -> AggregateContext {
        AggregateContext {
            duration_s: self.duration_s,
            wake_delay_s: self.wake_delay_s,
            node_count: self.placement.len() + self.relays.len() + 1,
            power: self.power,
            battery_capacity_mah: self.battery_capacity_mah,
        }
    }

    /// First sensor node id; relays occupy the ids before it.
    pub fn first_sensor_node(&self) -> u32 {
        self.relays.len() as u32 + 1
    }

    fn tree_nodes(&self) -> Vec<((f64, f64), Role)> {
        self.relays
            .iter()
            .copied()
            .chain(
                self.placement
                    .positions
                    .iter()
                    .zip(&self.roles)
                    .map(|(&pos, &role)| (pos, role)),
            )
            .collect()
    }

    fn build_network(&self) -> Result<NetworkTree, TreeError> {
        build_tree(
            self.coordinator_pos,
            &self.tree_nodes(),
            self.tree_params,
            &self.radio.pathloss,
            &self.radio.policy,
            self.topology,
        )
    }
}

/// Checks a scenario without running it. Returns findings rather than
/// failing on the first problem.
pub fn validate(scenario: &Scenario) -> Vec<Finding> {
    let mut findings = Vec::new();

    if !(scenario.duration_s > 0.0) {
        findings.push(error("duration must be positive"));
    }
    if !(scenario.tick_dt_s > 0.0) {
        findings.push(error("tick_dt must be positive"));
    }
    if scenario.payload_bytes == 0 {
        findings.push(error("payload must be at least 1 byte"));
    }
    if scenario.roles.len() != scenario.placement.len() {
        findings.push(error(format!(
            "{} roles for {} sensors",
            scenario.roles.len(),
            scenario.placement.len()
        )));
    }
    if !(scenario.detection_radius_m > 0.0) {
        findings.push(error("detection radius must be positive"));
    }
    if scenario.refractory_s < 0.0 {
        findings.push(error("refractory window must be non-negative"));
    }

    if let Err(e) = scenario.radio.pathloss.validate() {
        findings.push(error(e.to_string()));
    }
    if let Err(e) = scenario.radio.policy.validate() {
        findings.push(error(e.to_string()));
    }
    if let Err(e) = scenario.radio.throughput.validate() {
        findings.push(error(e.to_string()));
    }
    if let Err(e) = scenario.repeller.validate() {
        findings.push(error(e.to_string()));
    }
    if let Err(e) = scenario.power.validate() {
        findings.push(error(e.to_string()));
    }

    for (i, &(x, y)) in scenario.placement.positions.iter().enumerate() {
        if !scenario.field.contains(x, y) {
            findings.push(error(format!(
                "sensor {i} at ({x}, {y}) lies outside the field"
            )));
        }
    }

    // Coverage: a grid placement promises full coverage; other strategies
    // just report gaps.
    match coverage_fraction(&scenario.placement, &scenario.field, 0.5) {
        Ok(frac) if frac < 1.0 => {
            let msg = format!(
                "placement covers {:.1}% of the field; animals can cross uncovered regions undetected",
                frac * 100.0
            );
            if scenario.placement_strategy == PlacementStrategy::Grid {
                findings.push(error(msg));
            } else {
                findings.push(warn(msg));
            }
        }
        Ok(_) => {}
        Err(e) => findings.push(error(e.to_string())),
    }

    if scenario.roles.len() == scenario.placement.len() {
        if let Err(e) = scenario.build_network() {
            findings.push(error(e.to_string()));
        }
    }

    for spec in &scenario.intrusions {
        match find_species(&scenario.species, &spec.species) {
            Ok(profile) => {
                if !repel_effective(profile, scenario.repeller.frequency_hz) {
                    findings.push(warn(format!(
                        "{} hears {}..{} Hz and will not be repelled by the {} Hz repeller",
                        profile.name,
                        profile.hear_min_hz,
                        profile.hear_max_hz,
                        scenario.repeller.frequency_hz
                    )));
                }
            }
            Err(e) => findings.push(error(e.to_string())),
        }
        if spec.time_s < 0.0 {
            findings.push(error(format!(
                "intrusion time {} is negative",
                spec.time_s
            )));
        }
    }

    if scenario.battery_capacity_mah <= 0.0 {
        findings.push(warn("batteries are depleted at start"));
    }

    findings
}

struct Runtime {
    tree: NetworkTree,
    sensors: Vec<MotionSensor>,
    animals: Vec<Animal>,
    outcomes: Vec<Option<Outcome>>,
    rns: RnsState,
    gateway: SmsGateway,
    repeller_on_since: Option<f64>,
    pending_intrusions: Vec<(usize, IntrusionSpec)>,
    next_animal_id: u32,
    rng: StdRng,
    log: Vec<LogEntry>,
    flushed_sms: u32,
}

impl Runtime {
    fn log_event(
        &mut self,
        ev: &SimEvent,
        node_id: Option<u32>,
        animal_id: Option<u32>,
        detail: String,
    ) {
        self.log.push(LogEntry {
            time_s: ev.time_s,
            seq: ev.seq,
            kind: ev.kind,
            node_id,
            animal_id,
            detail,
        });
    }
}

fn ids_field(name: &str, ids: &[u32]) -> String {
    let list = ids
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("|");
    format!("{name}={list}")
}

/// Runs a scenario to completion. Fails fast (before any event executes)
/// when validation reports errors.
pub fn run(scenario: &Scenario) -> Result<SimResult, EngineError> {
    let findings = validate(scenario);
    if findings.iter().any(|f| f.severity == Severity::Error) {
        return Err(EngineError::Validation(findings));
    }

    let tree = scenario.build_network()?;
    let first_sensor = scenario.first_sensor_node();
    let sensors: Vec<MotionSensor> = scenario
        .placement
        .positions
        .iter()
        .enumerate()
        .map(|(i, &pos)| {
            let mut s = MotionSensor::new(NodeId(first_sensor + i as u32), pos);
            s.detection_radius_m = scenario.detection_radius_m;
            s.refractory_s = scenario.refractory_s;
            s
        })
        .collect();

    let mut pending: Vec<(usize, IntrusionSpec)> =
        scenario.intrusions.iter().cloned().enumerate().collect();
    // Spawn order: time first, schedule order on ties.
    pending.sort_by(|a, b| a.1.time_s.total_cmp(&b.1.time_s).then(a.0.cmp(&b.0)));

    let mut rt = Runtime {
        tree,
        sensors,
        animals: Vec::new(),
        outcomes: Vec::new(),
        rns: RnsState::new(scenario.wake_delay_s),
        gateway: SmsGateway::new(
            scenario.sms_delivery_latency_s,
            scenario.sms_dedup_window_s,
        ),
        repeller_on_since: None,
        pending_intrusions: pending,
        next_animal_id: 0,
        rng: StdRng::seed_from_u64(scenario.seed),
        log: Vec::new(),
        flushed_sms: 0,
    };

    let mut queue = EventQueue::new();
    queue.schedule(scenario.duration_s, EventKind::End, EventPayload::None);
    queue.schedule(0.0, EventKind::MoveTick, EventPayload::None);
    let mut tick_index: u64 = 0;
    let repeller_radius_m = crate::rns::repeller_radius(&scenario.repeller);

    while let Some(ev) = queue.pop() {
        match ev.kind {
            EventKind::MoveTick => {
                handle_move_tick(scenario, &mut rt, &ev, repeller_radius_m, &mut queue);
                tick_index += 1;
                let next = tick_index as f64 * scenario.tick_dt_s;
                if next < scenario.duration_s {
                    queue.schedule(next, EventKind::MoveTick, EventPayload::None);
                }
            }
            EventKind::Detection => {
                handle_detection(scenario, &mut rt, &ev, &mut queue)?;
            }
            EventKind::DeliveryArrival => {
                handle_arrival(scenario, &mut rt, &ev, &mut queue);
            }
            EventKind::RepellerOn => {
                let actions = on_wake_complete(&mut rt.rns);
                if rt.rns.mode == RnsMode::Repelling {
                    rt.repeller_on_since = Some(ev.time_s);
                    let until = rt.rns.active_until_s.unwrap_or(ev.time_s);
                    rt.log_event(&ev, Some(0), None, format!("until={until}"));
                    for action in actions {
                        if let RnsAction::ScheduleRepellerOff { at_s } = action {
                            queue.schedule(at_s, EventKind::RepellerOff, EventPayload::None);
                        }
                    }
                }
            }
            EventKind::RepellerOff => {
                if on_repeller_off(&mut rt.rns, ev.time_s) {
                    let since = rt.repeller_on_since.take().unwrap_or(ev.time_s);
                    rt.log_event(&ev, Some(0), None, format!("since={since}"));
                }
            }
            EventKind::SmsDispatch => {
                if let EventPayload::Sms { sensor, queued_at_s } = &ev.payload {
                    let (sensor, queued_at_s) = (sensor.0, *queued_at_s);
                    rt.log_event(&ev, Some(sensor), None, format!("queued_at={queued_at_s}"));
                }
            }
            EventKind::End => {
                handle_end(&mut rt, &ev, &mut queue);
                break;
            }
        }
    }

    let metrics = aggregate_log(&rt.log, &scenario.aggregate_context());
    let animals = rt
        .animals
        .iter()
        .zip(&rt.outcomes)
        .map(|(a, outcome)| AnimalSummary {
            id: a.id,
            species: a.species.name.clone(),
            final_state: a.state,
            outcome: outcome.unwrap_or(Outcome::StillActive),
        })
        .collect();

    Ok(SimResult {
        log: rt.log,
        metrics,
        animals,
        sms_log: rt.gateway.log().to_vec(),
        tree: rt.tree,
        findings,
    })
}

fn handle_move_tick(
    scenario: &Scenario,
    rt: &mut Runtime,
    ev: &SimEvent,
    repeller_radius_m: f64,
    queue: &mut EventQueue,
) {
    let now = ev.time_s;
    let mut spawned_ids = Vec::new();
    while let Some((_, spec)) = rt.pending_intrusions.first() {
        if spec.time_s > now {
            break;
        }
        let (_, spec) = rt.pending_intrusions.remove(0);
        let profile = find_species(&scenario.species, &spec.species)
            .expect("validated species")
            .clone();
        let animal = spawn_intrusion(
            rt.next_animal_id,
            &scenario.field,
            &profile,
            spec.edge,
            &mut rt.rng,
        );
        spawned_ids.push(animal.id);
        rt.animals.push(animal);
        rt.outcomes.push(None);
        rt.next_animal_id += 1;
    }

    let active = rt.rns.repeller_active(now).then_some(ActiveRepeller {
        position: scenario.repeller.position,
        radius_m: repeller_radius_m,
        frequency_hz: scenario.repeller.frequency_hz,
    });

    let mut repelled_ids = Vec::new();
    let mut core_ids = Vec::new();
    for i in 0..rt.animals.len() {
        if rt.animals[i].state == AnimalState::Gone {
            continue;
        }
        let before = rt.animals[i].state;
        let stepped = step_animal(
            rt.animals[i].clone(),
            scenario.tick_dt_s,
            active.as_ref(),
            &scenario.field,
        );
        rt.animals[i] = stepped;
        if rt.outcomes[i].is_none() {
            let a = &rt.animals[i];
            if a.state == AnimalState::Fleeing && before != AnimalState::Fleeing {
                rt.outcomes[i] = Some(Outcome::Repelled);
                repelled_ids.push(a.id);
            } else if a.state == AnimalState::Inside
                && scenario.field.core_contains(a.position.0, a.position.1)
            {
                rt.outcomes[i] = Some(Outcome::ReachedCore);
                core_ids.push(a.id);
            }
        }
    }

    for s in 0..rt.sensors.len() {
        for a in 0..rt.animals.len() {
            if let Some(detection) = detect(&mut rt.sensors[s], &rt.animals[a], now) {
                queue.schedule(
                    now,
                    EventKind::Detection,
                    EventPayload::Detection {
                        sensor: detection.sensor_node,
                        animal: rt.animals[a].id,
                    },
                );
            }
        }
    }

    if !(spawned_ids.is_empty() && repelled_ids.is_empty() && core_ids.is_empty()) {
        let mut parts = Vec::new();
        if !spawned_ids.is_empty() {
            parts.push(ids_field("spawned", &spawned_ids));
        }
        if !repelled_ids.is_empty() {
            parts.push(ids_field("repelled", &repelled_ids));
        }
        if !core_ids.is_empty() {
            parts.push(ids_field("core", &core_ids));
        }
        rt.log_event(ev, None, None, parts.join(" "));
    }
}

fn handle_detection(
    scenario: &Scenario,
    rt: &mut Runtime,
    ev: &SimEvent,
    queue: &mut EventQueue,
) -> Result<(), EngineError> {
    let EventPayload::Detection { sensor, animal } = ev.payload.clone() else {
        return Ok(());
    };
    let report = if scenario.stochastic_rssi {
        deliver(
            &rt.tree,
            sensor,
            scenario.payload_bytes,
            &scenario.radio,
            Some(&mut rt.rng),
        )?
    } else {
        deliver::<StdRng>(&rt.tree, sensor, scenario.payload_bytes, &scenario.radio, None)?
    };
    rt.log_event(
        ev,
        Some(sensor.0),
        Some(animal),
        format!("delivered={}", report.delivered),
    );
    if report.delivered {
        queue.schedule(
            ev.time_s + report.total_latency_s,
            EventKind::DeliveryArrival,
            EventPayload::Arrival {
                sensor,
                animal,
                hops: report.hops,
                latency_s: report.total_latency_s,
                path: report.path,
                min_throughput_bps: report.min_throughput_bps,
            },
        );
    }
    Ok(())
}

fn handle_arrival(scenario: &Scenario, rt: &mut Runtime, ev: &SimEvent, queue: &mut EventQueue) {
    let EventPayload::Arrival {
        sensor,
        animal,
        hops,
        latency_s,
        path,
        min_throughput_bps,
    } = &ev.payload
    else {
        return;
    };
    let (sensor, animal, hops, latency_s, min_throughput_bps) =
        (*sensor, *animal, *hops, *latency_s, *min_throughput_bps);
    let now = ev.time_s;
    let detection = crate::wildlife::DetectionEvent {
        sensor_node: sensor,
        time_s: now - latency_s,
    };
    let actions = on_detection(&mut rt.rns, &detection, now, scenario.repeller.repel_duration_s);
    let mut sms_status = "sent";
    for action in actions {
        match action {
            RnsAction::ScheduleRepellerOn { at_s } => {
                queue.schedule(at_s, EventKind::RepellerOn, EventPayload::None);
            }
            RnsAction::ScheduleRepellerOff { at_s } => {
                queue.schedule(at_s, EventKind::RepellerOff, EventPayload::None);
            }
            RnsAction::Notify { event } => match send_sms(&mut rt.gateway, &event, now) {
                Some(record) => {
                    let dispatch_at = record.delivered_at_s.unwrap_or(now);
                    if dispatch_at < scenario.duration_s {
                        queue.schedule(
                            dispatch_at,
                            EventKind::SmsDispatch,
                            EventPayload::Sms {
                                sensor,
                                queued_at_s: now,
                            },
                        );
                    } else {
                        // Flushed by the end event.
                        queue.schedule(
                            scenario.duration_s,
                            EventKind::SmsDispatch,
                            EventPayload::Sms {
                                sensor,
                                queued_at_s: now,
                            },
                        );
                    }
                }
                None => sms_status = "suppressed",
            },
        }
    }
    let path_str = path
        .iter()
        .map(|id| id.0.to_string())
        .collect::<Vec<_>>()
        .join("|");
    let tp = min_throughput_bps
        .map(|t| t.to_string())
        .unwrap_or_else(|| "0".into());
    rt.log_event(
        ev,
        Some(sensor.0),
        Some(animal),
        format!("hops={hops} latency={latency_s} path={path_str} min_tp={tp} sms={sms_status}"),
    );
}

fn handle_end(rt: &mut Runtime, ev: &SimEvent, queue: &mut EventQueue) {
    // Truncate a still-running repeller interval at the end of the run so
    // the energy ledger stays complete.
    if rt.rns.mode == RnsMode::Repelling {
        if let Some(since) = rt.repeller_on_since.take() {
            let off = SimEvent {
                time_s: ev.time_s,
                seq: ev.seq,
                kind: EventKind::RepellerOff,
                payload: EventPayload::None,
            };
            rt.log_event(&off, Some(0), None, format!("since={since}"));
        }
        rt.rns.mode = RnsMode::Sleep;
        rt.rns.active_until_s = None;
    }
    // Flush SMS dispatches that were scheduled at or past the horizon.
    let mut flushed = Vec::new();
    while let Some(pending) = queue.pop() {
        if pending.kind == EventKind::SmsDispatch {
            flushed.push(pending);
        }
    }
    for pending in flushed {
        if let EventPayload::Sms { sensor, queued_at_s } = pending.payload {
            let entry = SimEvent {
                time_s: ev.time_s,
                seq: pending.seq,
                kind: EventKind::SmsDispatch,
                payload: EventPayload::None,
            };
            rt.log_event(&entry, Some(sensor.0), None, format!("queued_at={queued_at_s}"));
            rt.flushed_sms += 1;
        }
    }
    let detail = if rt.flushed_sms > 0 {
        format!("flushed_sms={}", rt.flushed_sms)
    } else {
        String::new()
    };
    rt.log_event(ev, None, None, detail);
}

/// Runs scenarios with up to `parallelism` worker threads. Results are
/// ordered by scenario index and identical to sequential execution; each
/// scenario failure is reported in place without aborting the rest.
pub fn run_batch(
    scenarios: &[Scenario],
    parallelism: usize,
) -> Vec<Result<SimResult, EngineError>> {
    if scenarios.is_empty() {
        return Vec::new();
    }
    let workers = parallelism.max(1).min(scenarios.len());
    if workers == 1 {
        return scenarios.iter().map(run).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results: Vec<std::sync::Mutex<Option<Result<SimResult, EngineError>>>> =
        (0..scenarios.len()).map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= scenarios.len() {
                    break;
                }
                let result = run(&scenarios[i]);
                *results[i].lock().unwrap() = Some(result);
            });
        }
    });
    results
        .into_iter()
        .map(|slot| slot.into_inner().unwrap().expect("every scenario ran"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wildlife::bundled_species;

    /// Chain scenario: coordinator + two relay routers along y=20 and one
    /// sensing end device three hops out, repeller over the core center,
    /// one eastern intrusion that the end device detects.
    pub(crate) fn chain_scenario(seed: u64) -> Scenario {
        let field = Field::new(40.0, 40.0, 15.0).unwrap();
        let placement = Placement::new(vec![(30.0, 20.0)], 10.0, &field).unwrap();
        let mut repeller = Repeller::new((20.0, 20.0));
        repeller.repel_duration_s = 30.0;
        Scenario {
            field,
            placement,
            placement_strategy: PlacementStrategy::Explicit,
            roles: vec![Role::EndDevice],
            relays: vec![
                ((10.0, 20.0), Role::Router),
                ((20.0, 20.0), Role::Router),
            ],
            coordinator_pos: (0.0, 20.0),
            topology: Topology::Tree,
            tree_params: TreeParams::default(),
            radio: RadioModels::default(),
            stochastic_rssi: false,
            payload_bytes: 100,
            species: bundled_species(),
            intrusions: vec![IntrusionSpec {
                time_s: 1.0,
                species: "Cow".into(),
                edge: EntryEdge::East,
            }],
            detection_radius_m: 10.0,
            refractory_s: 5.0,
            repeller,
            wake_delay_s: 0.010,
            sms_dedup_window_s: 60.0,
            sms_delivery_latency_s: 5.0,
            reaction_time_s: 1.0,
            power: PowerProfile::default(),
            battery_capacity_mah: 2000.0,
            tick_dt_s: 0.1,
            duration_s: 60.0,
            seed,
        }
    }

    #[test]
    fn empty_schedule_gives_pure_sleep_draw() {
        let mut scenario = chain_scenario(1);
        scenario.intrusions.clear();
        let result = run(&scenario).unwrap();
        assert_eq!(result.metrics.intrusions, 0);
        assert_eq!(result.metrics.detections, 0);
        assert_eq!(result.metrics.sms_sent, 0);
        let sleep = scenario.power.sleep_ma * scenario.duration_s / 3600.0;
        for node in &result.metrics.energy {
            assert_eq!(node.consumed_mah, sleep);
        }
    }

    #[test]
    fn chain_scenario_validates_with_coverage_warning_only() {
        let scenario = chain_scenario(1);
        let findings = validate(&scenario);
        assert!(findings.iter().all(|f| f.severity == Severity::Warning));
        // Explicit 3-sensor placement cannot cover a 40x40 field.
        assert!(findings.iter().any(|f| f.message.contains("covers")));
    }

    #[test]
    fn validation_flags_inaudible_species_and_unknown_names() {
        let mut scenario = chain_scenario(1);
        scenario.repeller.frequency_hz = 50_000.0;
        let findings = validate(&scenario);
        assert!(findings
            .iter()
            .any(|f| f.severity == Severity::Warning && f.message.contains("will not be repelled")));

        scenario.intrusions.push(IntrusionSpec {
            time_s: 2.0,
            species: "Dragon".into(),
            edge: EntryEdge::North,
        });
        let findings = validate(&scenario);
        assert!(findings.iter().any(|f| f.severity == Severity::Error));
        assert!(run(&scenario).is_err());
    }

    #[test]
    fn validation_flags_unattachable_node() {
        let mut scenario = chain_scenario(1);
        // An end device in the far corner: nearest parent is the chain, but
        // routers sit along y=20 and the corner is ~28 m from the nearest
        // one, which is still viable; push the link policy instead.
        scenario.placement.positions.push((39.9, 39.9));
        scenario.roles.push(Role::EndDevice);
        scenario.radio.pathloss.max_link_range_m = 15.0;
        let findings = validate(&scenario);
        assert!(findings
            .iter()
            .any(|f| f.severity == Severity::Error && f.message.contains("cannot attach")));
    }
}
