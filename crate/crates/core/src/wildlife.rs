//! Species hearing ranges, animal agents, movement and motion detection.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Field;
use crate::nettree::NodeId;

/// Default sensor detection radius, meters.
pub const DEFAULT_DETECTION_RADIUS_M: f64 = 10.0;
/// Default per-sensor suppression window between detections, seconds.
pub const DEFAULT_REFRACTORY_S: f64 = 5.0;
/// How far outside the field an animal spawns, meters.
pub const SPAWN_OFFSET_M: f64 = 1.0;
/// Fleeing animals this far beyond the field bounds are gone for good.
pub const GONE_MARGIN_M: f64 = 5.0;

/// Bundled species hearing table, CSV.
pub const BUNDLED_SPECIES_CSV: &str = include_str!("../data/table1_species.csv");

#[derive(Debug, Error)]
pub enum WildlifeError {
    #[error("hearing range must satisfy 0 < min < max, got {min_hz}..{max_hz}")]
    InvalidHearingRange { min_hz: f64, max_hz: f64 },
    #[error("unknown species '{0}'")]
    UnknownSpecies(String),
    #[error("malformed species CSV line {line}: {reason}")]
    MalformedCsv { line: usize, reason: String },
    #[error("speed must be positive, got {0}")]
    InvalidSpeed(f64),
}

/// A species with its audible frequency band and movement speeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesProfile {
    pub name: String,
    pub hear_min_hz: f64,
    pub hear_max_hz: f64,
    pub approach_speed_mps: f64,
    pub flee_speed_mps: f64,
}

impl SpeciesProfile {
    pub fn new(name: impl Into<String>, hear_min_hz: f64, hear_max_hz: f64) -> Result<Self, WildlifeError> {
        Self::with_speeds(name, hear_min_hz, hear_max_hz, 1.0, 2.0)
    }

    pub fn with_speeds(
        name: impl Into<String>,
        hear_min_hz: f64,
        hear_max_hz: f64,
        approach_speed_mps: f64,
        flee_speed_mps: f64,
    ) -> Result<Self, WildlifeError> {
        if !(hear_min_hz > 0.0) || !(hear_min_hz < hear_max_hz) {
            return Err(WildlifeError::InvalidHearingRange {
                min_hz: hear_min_hz,
                max_hz: hear_max_hz,
            });
        }
        if !(approach_speed_mps > 0.0) {
            return Err(WildlifeError::InvalidSpeed(approach_speed_mps));
        }
        if !(flee_speed_mps > 0.0) {
            return Err(WildlifeError::InvalidSpeed(flee_speed_mps));
        }
        Ok(Self {
            name: name.into(),
            hear_min_hz,
            hear_max_hz,
            approach_speed_mps,
            flee_speed_mps,
        })
    }
}

/// Loads a species table from CSV with header
/// `name,hear_min_hz,hear_max_hz,approach_speed,flee_speed`.
pub fn load_species_csv(text: &str) -> Result<Vec<SpeciesProfile>, WildlifeError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("name")) {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 5 {
            return Err(WildlifeError::MalformedCsv {
                line: i + 1,
                reason: format!("expected 5 columns, got {}", cols.len()),
            });
        }
        let parse = |s: &str| -> Result<f64, WildlifeError> {
            s.parse().map_err(|_| WildlifeError::MalformedCsv {
                line: i + 1,
                reason: format!("bad number '{s}'"),
            })
        };
        out.push(SpeciesProfile::with_speeds(
            cols[0],
            parse(cols[1])?,
            parse(cols[2])?,
            parse(cols[3])?,
            parse(cols[4])?,
        )?);
    }
    Ok(out)
}

/// The seven bundled species with their approximate hearing ranges.
pub fn bundled_species() -> Vec<SpeciesProfile> {
    load_species_csv(BUNDLED_SPECIES_CSV).expect("bundled species table is valid")
}

/// Looks a species up by case-insensitive name.
pub fn find_species<'a>(
    species: &'a [SpeciesProfile],
    name: &str,
) -> Result<&'a SpeciesProfile, WildlifeError> {
    species
        .iter()
        .find(|s| s.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| WildlifeError::UnknownSpecies(name.to_string()))
}

/// Lifecycle state of an animal agent. Transitions only move forward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AnimalState {
    Approaching,
    Inside,
    Fleeing,
    Gone,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Animal {
    pub id: u32,
    pub species: SpeciesProfile,
    pub position: (f64, f64),
    /// Unit direction of travel.
    pub heading: (f64, f64),
    pub state: AnimalState,
}

/// Field edge an intrusion enters from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryEdge {
    North,
    South,
    East,
    West,
}

impl EntryEdge {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "north" => Some(Self::North),
            "south" => Some(Self::South),
            "east" => Some(Self::East),
            "west" => Some(Self::West),
            _ => None,
        }
    }
}

fn normalize(v: (f64, f64)) -> (f64, f64) {
    let len = (v.0 * v.0 + v.1 * v.1).sqrt();
    if len == 0.0 {
        (0.0, 0.0)
    } else {
        (v.0 / len, v.1 / len)
    }
}

/// Spawns an animal just outside the chosen edge, heading toward a uniformly
/// sampled target inside the field core. Deterministic for a fixed seed.
pub fn spawn_intrusion<R: Rng + ?Sized>(
    id: u32,
    field: &Field,
    species: &SpeciesProfile,
    entry_edge: EntryEdge,
    rng: &mut R,
) -> Animal {
    let along: f64 = rng.random();
    let position = match entry_edge {
        EntryEdge::North => (along * field.width_m, field.height_m + SPAWN_OFFSET_M),
        EntryEdge::South => (along * field.width_m, -SPAWN_OFFSET_M),
        EntryEdge::East => (field.width_m + SPAWN_OFFSET_M, along * field.height_m),
        EntryEdge::West => (-SPAWN_OFFSET_M, along * field.height_m),
    };
    let m = field.core_margin_m;
    let tx: f64 = rng.random();
    let ty: f64 = rng.random();
    let target = (
        m + tx * (field.width_m - 2.0 * m),
        m + ty * (field.height_m - 2.0 * m),
    );
    let heading = normalize((target.0 - position.0, target.1 - position.1));
    Animal {
        id,
        species: species.clone(),
        position,
        heading,
        state: AnimalState::Approaching,
    }
}

/// A detection message: sensor id and timestamp, nothing else.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionEvent {
    pub sensor_node: NodeId,
    pub time_s: f64,
}

/// A motion sensor hosted on a network node. Remembers its last trigger
/// time to enforce the refractory window.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSensor {
    pub node: NodeId,
    pub position: (f64, f64),
    pub detection_radius_m: f64,
    pub refractory_s: f64,
    pub last_fire_s: Option<f64>,
}

impl MotionSensor {
    pub fn new(node: NodeId, position: (f64, f64)) -> Self {
        Self {
            node,
            position,
            detection_radius_m: DEFAULT_DETECTION_RADIUS_M,
            refractory_s: DEFAULT_REFRACTORY_S,
            last_fire_s: None,
        }
    }
}

/// Emits a detection if the animal is within range, not gone, and the
/// sensor is outside its refractory window.
pub fn detect(sensor: &mut MotionSensor, animal: &Animal, now_s: f64) -> Option<DetectionEvent> {
    if animal.state == AnimalState::Gone {
        return None;
    }
    let dx = animal.position.0 - sensor.position.0;
    let dy = animal.position.1 - sensor.position.1;
    if (dx * dx + dy * dy).sqrt() > sensor.detection_radius_m {
        return None;
    }
    if let Some(last) = sensor.last_fire_s {
        if now_s - last < sensor.refractory_s {
            return None;
        }
    }
    sensor.last_fire_s = Some(now_s);
    Some(DetectionEvent {
        sensor_node: sensor.node,
        time_s: now_s,
    })
}

/// True if the repeller tone falls inside the species' audible band.
pub fn repel_effective(species: &SpeciesProfile, repeller_freq_hz: f64) -> bool {
    species.hear_min_hz <= repeller_freq_hz && repeller_freq_hz <= species.hear_max_hz
}

/// An active repeller as seen by the animals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveRepeller {
    pub position: (f64, f64),
    pub radius_m: f64,
    pub frequency_hz: f64,
}

/// Advances an animal by `dt`. Approaching and Inside animals move along
/// their heading at approach speed; an audible active repeller within range
/// turns them around at flee speed; fleeing animals that clear the field
/// plus [`GONE_MARGIN_M`] are gone.
pub fn step_animal(
    mut animal: Animal,
    dt_s: f64,
    repeller: Option<&ActiveRepeller>,
    field: &Field,
) -> Animal {
    if animal.state == AnimalState::Gone {
        return animal;
    }
    if matches!(animal.state, AnimalState::Approaching | AnimalState::Inside) {
        if let Some(rep) = repeller {
            let away = (
                animal.position.0 - rep.position.0,
                animal.position.1 - rep.position.1,
            );
            let d = (away.0 * away.0 + away.1 * away.1).sqrt();
            if d <= rep.radius_m && repel_effective(&animal.species, rep.frequency_hz) {
                animal.state = AnimalState::Fleeing;
                animal.heading = if d == 0.0 { (0.0, 1.0) } else { normalize(away) };
            }
        }
    }
    let speed = match animal.state {
        AnimalState::Fleeing => animal.species.flee_speed_mps,
        _ => animal.species.approach_speed_mps,
    };
    animal.position.0 += animal.heading.0 * speed * dt_s;
    animal.position.1 += animal.heading.1 * speed * dt_s;
    match animal.state {
        AnimalState::Approaching => {
            if field.contains(animal.position.0, animal.position.1) {
                animal.state = AnimalState::Inside;
            }
        }
        AnimalState::Inside | AnimalState::Fleeing => {
            if !field.contains_with_margin(animal.position.0, animal.position.1, GONE_MARGIN_M) {
                animal.state = AnimalState::Gone;
            }
        }
        _ => {}
    }
    animal
}
