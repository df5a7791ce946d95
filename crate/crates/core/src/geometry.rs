//! Field geometry, sensor placement planning and coverage verification.
//!
//! Coordinates use a south-west origin with x pointing east and y pointing
//! north, all in meters. Placements are deterministic: identical inputs
//! always produce identical sensor positions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default motion sensor detection radius in meters.
pub const DEFAULT_SENSOR_RADIUS_M: f64 = 10.0;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("field dimensions must be positive, got {width_m} x {height_m}")]
    InvalidField { width_m: f64, height_m: f64 },
    #[error("core margin {margin_m} must be non-negative and less than half the smallest field side")]
    InvalidCoreMargin { margin_m: f64 },
    #[error("sensor radius must be positive, got {0}")]
    InvalidRadius(f64),
    #[error("sample step must be positive, got {0}")]
    InvalidSampleStep(f64),
    #[error("sensor {index} at ({x}, {y}) lies outside the field bounds")]
    PositionOutOfBounds { index: usize, x: f64, y: f64 },
    #[error("malformed placement CSV line: {0}")]
    MalformedCsv(String),
}

/// A rectangular crop field. `core_margin_m` insets an inner "crop core"
/// rectangle used by the protection metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub width_m: f64,
    pub height_m: f64,
    pub core_margin_m: f64,
}

impl Field {
    pub fn new(width_m: f64, height_m: f64, core_margin_m: f64) -> Result<Self, GeometryError> {
        if !(width_m > 0.0) || !(height_m > 0.0) {
            return Err(GeometryError::InvalidField { width_m, height_m });
        }
        if !(core_margin_m >= 0.0) || core_margin_m >= width_m.min(height_m) / 2.0 {
            return Err(GeometryError::InvalidCoreMargin {
                margin_m: core_margin_m,
            });
        }
        Ok(Self {
            width_m,
            height_m,
            core_margin_m,
        })
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= 0.0 && x <= self.width_m && y >= 0.0 && y <= self.height_m
    }

    /// True if the point lies inside the inner crop core rectangle.
    pub fn core_contains(&self, x: f64, y: f64) -> bool {
        let m = self.core_margin_m;
        x >= m && x <= self.width_m - m && y >= m && y <= self.height_m - m
    }

    /// True if the point lies inside the field expanded by `margin_m` on all
    /// sides. Used to decide when a fleeing animal has left the area.
    pub fn contains_with_margin(&self, x: f64, y: f64, margin_m: f64) -> bool {
        x >= -margin_m
            && x <= self.width_m + margin_m
            && y >= -margin_m
            && y <= self.height_m + margin_m
    }

    pub fn center(&self) -> (f64, f64) {
        (self.width_m / 2.0, self.height_m / 2.0)
    }
}

/// A set of sensor positions with a common sensing radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub positions: Vec<(f64, f64)>,
    pub sensor_radius_m: f64,
}

impl Placement {
    pub fn new(
        positions: Vec<(f64, f64)>,
        sensor_radius_m: f64,
        field: &Field,
    ) -> Result<Self, GeometryError> {
        if !(sensor_radius_m > 0.0) {
            return Err(GeometryError::InvalidRadius(sensor_radius_m));
        }
        for (i, &(x, y)) in positions.iter().enumerate() {
            if !field.contains(x, y) {
                return Err(GeometryError::PositionOutOfBounds { index: i, x, y });
            }
        }
        Ok(Self {
            positions,
            sensor_radius_m,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Serializes to CSV with header `sensor_id,x_m,y_m`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sensor_id,x_m,y_m\n");
        for (i, (x, y)) in self.positions.iter().enumerate() {
            out.push_str(&format!("{i},{x},{y}\n"));
        }
        out
    }

    /// Parses the CSV written by [`Placement::to_csv`].
    pub fn from_csv(
        text: &str,
        sensor_radius_m: f64,
        field: &Field,
    ) -> Result<Self, GeometryError> {
        let mut positions = Vec::new();
        for line in text.lines().skip(1) {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let _id = cols.next();
            let x: f64 = cols
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| GeometryError::MalformedCsv(line.to_string()))?;
            let y: f64 = cols
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| GeometryError::MalformedCsv(line.to_string()))?;
            positions.push((x, y));
        }
        Placement::new(positions, sensor_radius_m, field)
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Plans a full-coverage square grid of sensors. Cells have side at most
/// `radius * sqrt(2)` (a disk of radius r circumscribes a square of side
/// r*sqrt(2)), so a sensor at each cell center covers its whole cell.
pub fn plan_grid_placement(field: &Field, radius_m: f64) -> Result<Placement, GeometryError> {
    if !(radius_m > 0.0) {
        return Err(GeometryError::InvalidRadius(radius_m));
    }
    let side = radius_m * std::f64::consts::SQRT_2;
    let nx = (field.width_m / side).ceil().max(1.0) as usize;
    let ny = (field.height_m / side).ceil().max(1.0) as usize;
    let cell_w = field.width_m / nx as f64;
    let cell_h = field.height_m / ny as f64;
    let mut positions = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            positions.push((
                (ix as f64 + 0.5) * cell_w,
                (iy as f64 + 0.5) * cell_h,
            ));
        }
    }
    Placement::new(positions, radius_m, field)
}

/// Plans sensors along the field boundary: the four corners first, then
/// evenly spaced fill-in points so that the gap along each edge never
/// exceeds `2 * radius`. Every boundary point ends up within `radius` of a
/// sensor.
pub fn plan_perimeter_placement(field: &Field, radius_m: f64) -> Result<Placement, GeometryError> {
    if !(radius_m > 0.0) {
        return Err(GeometryError::InvalidRadius(radius_m));
    }
    let (w, h) = (field.width_m, field.height_m);
    let corners = [(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)];
    let mut positions: Vec<(f64, f64)> = corners.to_vec();
    // Edges in corner order: south, east, north, west.
    let edges = [
        ((0.0, 0.0), (w, 0.0)),
        ((w, 0.0), (w, h)),
        ((w, h), (0.0, h)),
        ((0.0, h), (0.0, 0.0)),
    ];
    for (a, b) in edges {
        let len = dist(a, b);
        let segments = (len / (2.0 * radius_m)).ceil().max(1.0) as usize;
        for j in 1..segments {
            let t = j as f64 / segments as f64;
            positions.push((a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t));
        }
    }
    Placement::new(positions, radius_m, field)
}

/// Fraction of field sample points lying within `sensor_radius` of at least
/// one sensor. Points are taken on a regular lattice with the given step,
/// including the field boundary, so the result is deterministic for a fixed
/// step.
pub fn coverage_fraction(
    placement: &Placement,
    field: &Field,
    sample_step_m: f64,
) -> Result<f64, GeometryError> {
    if !(sample_step_m > 0.0) {
        return Err(GeometryError::InvalidSampleStep(sample_step_m));
    }
    if placement.is_empty() {
        return Ok(0.0);
    }
    let nx = (field.width_m / sample_step_m).floor() as usize;
    let ny = (field.height_m / sample_step_m).floor() as usize;
    let r2 = placement.sensor_radius_m * placement.sensor_radius_m;
    let mut covered = 0usize;
    let mut total = 0usize;
    for iy in 0..=ny {
        let y = (iy as f64 * sample_step_m).min(field.height_m);
        for ix in 0..=nx {
            let x = (ix as f64 * sample_step_m).min(field.width_m);
            total += 1;
            if placement
                .positions
                .iter()
                .any(|&(sx, sy)| (sx - x).powi(2) + (sy - y).powi(2) <= r2)
            {
                covered += 1;
            }
        }
    }
    Ok(covered as f64 / total as f64)
}

/// Largest distance from any boundary sample point to its nearest sensor.
/// Used to verify perimeter placements.
pub fn max_boundary_gap(
    placement: &Placement,
    field: &Field,
    sample_step_m: f64,
) -> Result<f64, GeometryError> {
    if !(sample_step_m > 0.0) {
        return Err(GeometryError::InvalidSampleStep(sample_step_m));
    }
    let (w, h) = (field.width_m, field.height_m);
    let edges = [
        ((0.0, 0.0), (w, 0.0)),
        ((w, 0.0), (w, h)),
        ((w, h), (0.0, h)),
        ((0.0, h), (0.0, 0.0)),
    ];
    let mut worst: f64 = 0.0;
    for (a, b) in edges {
        let len = dist(a, b);
        let n = (len / sample_step_m).floor() as usize;
        for i in 0..=n {
            let t = ((i as f64 * sample_step_m) / len).min(1.0);
            let p = (a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t);
            let nearest = placement
                .positions
                .iter()
                .map(|&s| dist(s, p))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(nearest);
        }
    }
    Ok(worst)
}

/// Total placement cost at a fixed unit cost per sensor.
pub fn sensor_count_cost(placement: &Placement, unit_cost: f64) -> f64 {
    placement.len() as f64 * unit_cost
}
