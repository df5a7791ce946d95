//! Scenario configuration: a single TOML file with sections for the field,
//! placement, tree, radio, species, rns, energy, simulation control and the
//! intrusion schedule. Every key has a sensible default, so a minimal file
//! only names the field and the intrusions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::PowerProfile;
use crate::engine::{IntrusionSpec, PlacementStrategy, Scenario};
use crate::geometry::{plan_grid_placement, plan_perimeter_placement, Field, GeometryError, Placement};
use crate::nettree::{RadioModels, Role, Topology, TreeParams};
use crate::radio::{LinkPolicy, PathLossModel, RadioError, ThroughputSteps};
use crate::rns::Repeller;
use crate::wildlife::{bundled_species, EntryEdge, SpeciesProfile, WildlifeError};

/// Default seed used (and reported) when a run does not specify one.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Radio(#[from] RadioError),
    #[error(transparent)]
    Wildlife(#[from] WildlifeError),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub field: FieldSection,
    #[serde(default)]
    pub placement: PlacementSection,
    #[serde(default)]
    pub tree: TreeSection,
    #[serde(default)]
    pub radio: RadioSection,
    /// Extra species or overrides; bundled species are always available.
    #[serde(default)]
    pub species: BTreeMap<String, SpeciesSection>,
    #[serde(default)]
    pub rns: RnsSection,
    #[serde(default)]
    pub energy: EnergySection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub intrusions: Vec<IntrusionSection>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    pub width_m: f64,
    pub height_m: f64,
    #[serde(default)]
    pub core_margin_m: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementSection {
    /// grid | perimeter | explicit
    pub strategy: String,
    pub sensor_radius_m: f64,
    /// Positions for the explicit strategy.
    #[serde(default)]
    pub positions: Vec<[f64; 2]>,
    /// Per-sensor roles (ZC is never listed). Either a single entry applied
    /// to every sensor or one entry per sensor.
    #[serde(default)]
    pub roles: Vec<String>,
    #[serde(default)]
    pub unit_cost: Option<f64>,
}

impl Default for PlacementSection {
    fn default() -> Self {
        Self {
            strategy: "grid".into(),
            sensor_radius_m: 10.0,
            positions: Vec::new(),
            roles: vec!["ZR".into()],
            unit_cost: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSection {
    /// Coordinator position; defaults to the field center.
    #[serde(default)]
    pub coordinator: Option<[f64; 2]>,
    pub topology: String,
    pub max_children: u32,
    pub max_depth: u32,
    pub max_routers_per_parent: u32,
    /// Relay-only nodes: position plus role, e.g. [10.0, 20.0, "ZR"].
    #[serde(default)]
    pub relays: Vec<RelaySection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelaySection {
    pub position: [f64; 2],
    #[serde(default = "default_relay_role")]
    pub role: String,
}

fn default_relay_role() -> String {
    "ZR".into()
}

impl Default for TreeSection {
    fn default() -> Self {
        let params = TreeParams::default();
        Self {
            coordinator: None,
            topology: "tree".into(),
            max_children: params.max_children,
            max_depth: params.max_depth,
            max_routers_per_parent: params.max_routers_per_parent,
            relays: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioSection {
    pub ref_rssi_dbm: f64,
    pub exponent_n: f64,
    pub noise_sigma_db: f64,
    pub max_link_range_m: f64,
    pub disconnect_threshold_dbm: f64,
    pub stochastic_rssi: bool,
    pub payload_bytes: u32,
}

impl Default for RadioSection {
    fn default() -> Self {
        let m = PathLossModel::default();
        Self {
            ref_rssi_dbm: m.ref_rssi_dbm,
            exponent_n: m.exponent_n,
            noise_sigma_db: m.noise_sigma_db,
            max_link_range_m: m.max_link_range_m,
            disconnect_threshold_dbm: LinkPolicy::default().disconnect_threshold_dbm,
            stochastic_rssi: false,
            payload_bytes: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesSection {
    pub hear_min_hz: f64,
    pub hear_max_hz: f64,
    #[serde(default = "default_approach_speed")]
    pub approach_speed_mps: f64,
    #[serde(default = "default_flee_speed")]
    pub flee_speed_mps: f64,
}

fn default_approach_speed() -> f64 {
    1.0
}

fn default_flee_speed() -> f64 {
    2.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RnsSection {
    /// Repeller position; defaults to the coordinator position.
    #[serde(default)]
    pub repeller_position: Option<[f64; 2]>,
    pub coverage_area_m2: f64,
    pub frequency_hz: f64,
    pub active_current_ma: f64,
    pub repel_duration_s: f64,
    pub wake_delay_s: f64,
    pub sms_dedup_window_s: f64,
    pub sms_delivery_latency_s: f64,
    pub reaction_time_s: f64,
}

impl Default for RnsSection {
    fn default() -> Self {
        let rep = Repeller::new((0.0, 0.0));
        Self {
            repeller_position: None,
            coverage_area_m2: rep.coverage_area_m2,
            frequency_hz: rep.frequency_hz,
            active_current_ma: rep.active_current_ma,
            repel_duration_s: rep.repel_duration_s,
            wake_delay_s: crate::rns::DEFAULT_WAKE_DELAY_S,
            sms_dedup_window_s: crate::rns::DEFAULT_SMS_DEDUP_WINDOW_S,
            sms_delivery_latency_s: crate::rns::DEFAULT_SMS_DELIVERY_LATENCY_S,
            reaction_time_s: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergySection {
    pub sleep_ma: f64,
    pub rx_ma: f64,
    pub tx_ma: f64,
    pub repeller_ma: f64,
    pub battery_capacity_mah: f64,
    pub solar_recharge_ma: f64,
    pub daylight_fraction: f64,
}

impl Default for EnergySection {
    fn default() -> Self {
        let p = PowerProfile::default();
        Self {
            sleep_ma: p.sleep_ma,
            rx_ma: p.rx_ma,
            tx_ma: p.tx_ma,
            repeller_ma: p.repeller_ma,
            battery_capacity_mah: 2000.0,
            solar_recharge_ma: 0.0,
            daylight_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub tick_dt_s: f64,
    pub duration_s: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    pub detection_refractory_s: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            tick_dt_s: 0.1,
            duration_s: 120.0,
            seed: None,
            detection_refractory_s: 5.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntrusionSection {
    pub time_s: f64,
    pub species: String,
    pub edge: String,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn field(&self) -> Result<Field, ConfigError> {
        Ok(Field::new(
            self.field.width_m,
            self.field.height_m,
            self.field.core_margin_m,
        )?)
    }

    /// Builds the placement per the configured strategy.
    pub fn placement(&self) -> Result<(Placement, PlacementStrategy), ConfigError> {
        let field = self.field()?;
        let radius = self.placement.sensor_radius_m;
        match self.placement.strategy.as_str() {
            "grid" => Ok((plan_grid_placement(&field, radius)?, PlacementStrategy::Grid)),
            "perimeter" => Ok((
                plan_perimeter_placement(&field, radius)?,
                PlacementStrategy::Perimeter,
            )),
            "explicit" => {
                let positions = self
                    .placement
                    .positions
                    .iter()
                    .map(|&[x, y]| (x, y))
                    .collect();
                Ok((
                    Placement::new(positions, radius, &field)?,
                    PlacementStrategy::Explicit,
                ))
            }
            other => Err(ConfigError::Invalid(format!(
                "unknown placement strategy '{other}' (expected grid, perimeter or explicit)"
            ))),
        }
    }

    fn roles_for(&self, sensor_count: usize) -> Result<Vec<Role>, ConfigError> {
        let parse = |s: &String| {
            Role::parse(s).ok_or_else(|| {
                ConfigError::Invalid(format!("unknown role '{s}' (expected ZR or ZED)"))
            })
        };
        let roles = &self.placement.roles;
        match roles.len() {
            0 => Ok(vec![Role::Router; sensor_count]),
            1 => {
                let role = parse(&roles[0])?;
                Ok(vec![role; sensor_count])
            }
            n if n == sensor_count => roles.iter().map(parse).collect(),
            n => Err(ConfigError::Invalid(format!(
                "{n} roles listed for {sensor_count} sensors"
            ))),
        }
    }

    /// Merged species table: bundled defaults plus configured overrides.
    pub fn species(&self) -> Result<Vec<SpeciesProfile>, ConfigError> {
        let mut list = bundled_species();
        for (name, s) in &self.species {
            let profile = SpeciesProfile::with_speeds(
                name.clone(),
                s.hear_min_hz,
                s.hear_max_hz,
                s.approach_speed_mps,
                s.flee_speed_mps,
            )?;
            match list
                .iter_mut()
                .find(|p| p.name.eq_ignore_ascii_case(name))
            {
                Some(existing) => *existing = profile,
                None => list.push(profile),
            }
        }
        Ok(list)
    }

    /// Resolves the whole file into a runnable scenario. `seed_override`
    /// (the CLI flag) wins over the file seed; both default to
    /// [`DEFAULT_SEED`].
    pub fn to_scenario(&self, seed_override: Option<u64>) -> Result<Scenario, ConfigError> {
        let field = self.field()?;
        let (placement, placement_strategy) = self.placement()?;
        let roles = self.roles_for(placement.len())?;
        let coordinator_pos = self
            .tree
            .coordinator
            .map(|[x, y]| (x, y))
            .unwrap_or_else(|| field.center());
        let topology = match self.tree.topology.as_str() {
            "tree" => Topology::Tree,
            "star" => Topology::Star,
            "mesh" => Topology::Mesh,
            other => {
                return Err(ConfigError::Invalid(format!(
                    "unknown topology '{other}' (expected tree, star or mesh)"
                )))
            }
        };
        let relays = self
            .tree
            .relays
            .iter()
            .map(|r| {
                let role = Role::parse(&r.role).ok_or_else(|| {
                    ConfigError::Invalid(format!("unknown relay role '{}'", r.role))
                })?;
                Ok(((r.position[0], r.position[1]), role))
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;

        let pathloss = PathLossModel {
            ref_rssi_dbm: self.radio.ref_rssi_dbm,
            exponent_n: self.radio.exponent_n,
            noise_sigma_db: self.radio.noise_sigma_db,
            max_link_range_m: self.radio.max_link_range_m,
        };
        let policy = LinkPolicy {
            disconnect_threshold_dbm: self.radio.disconnect_threshold_dbm,
        };
        let radio = RadioModels {
            latency: crate::radio::LatencyTable::default(),
            pathloss,
            policy,
            throughput: ThroughputSteps::default(),
        };

        let repeller = Repeller {
            position: self
                .rns
                .repeller_position
                .map(|[x, y]| (x, y))
                .unwrap_or(coordinator_pos),
            coverage_area_m2: self.rns.coverage_area_m2,
            frequency_hz: self.rns.frequency_hz,
            active_current_ma: self.rns.active_current_ma,
            repel_duration_s: self.rns.repel_duration_s,
        };

        let power = PowerProfile {
            sleep_ma: self.energy.sleep_ma,
            rx_ma: self.energy.rx_ma,
            tx_ma: self.energy.tx_ma,
            repeller_ma: self.energy.repeller_ma,
        };

        let intrusions = self
            .intrusions
            .iter()
            .map(|i| {
                let edge = EntryEdge::parse(&i.edge).ok_or_else(|| {
                    ConfigError::Invalid(format!(
                        "unknown edge '{}' (expected north, south, east or west)",
                        i.edge
                    ))
                })?;
                Ok(IntrusionSpec {
                    time_s: i.time_s,
                    species: i.species.clone(),
                    edge,
                })
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;

        Ok(Scenario {
            field,
            placement,
            placement_strategy,
            roles,
            relays,
            coordinator_pos,
            topology,
            tree_params: TreeParams {
                max_children: self.tree.max_children,
                max_depth: self.tree.max_depth,
                max_routers_per_parent: self.tree.max_routers_per_parent,
            },
            radio,
            stochastic_rssi: self.radio.stochastic_rssi,
            payload_bytes: self.radio.payload_bytes,
            species: self.species()?,
            intrusions,
            detection_radius_m: self.placement.sensor_radius_m,
            refractory_s: self.sim.detection_refractory_s,
            repeller,
            wake_delay_s: self.rns.wake_delay_s,
            sms_dedup_window_s: self.rns.sms_dedup_window_s,
            sms_delivery_latency_s: self.rns.sms_delivery_latency_s,
            reaction_time_s: self.rns.reaction_time_s,
            power,
            battery_capacity_mah: self.energy.battery_capacity_mah,
            tick_dt_s: self.sim.tick_dt_s,
            duration_s: self.sim.duration_s,
            seed: seed_override.or(self.sim.seed).unwrap_or(DEFAULT_SEED),
        })
    }
}

/// Serializes a fitted path loss model for `calibrate --out`.
pub fn model_to_toml(model: &PathLossModel) -> String {
    toml::to_string_pretty(model).expect("model serializes")
}

/// Reads a path loss model written by [`model_to_toml`].
pub fn model_from_toml(text: &str) -> Result<PathLossModel, ConfigError> {
    let model: PathLossModel = toml::from_str(text)?;
    model.validate()?;
    Ok(model)
}
