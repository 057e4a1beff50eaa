//! Generator and fleet domain model.
//!
//! A [`Fleet`] is a list of [`GeneratorType`]s. Every unit of a type is
//! identical: it has a startup cost, a minimum output, and a convex
//! piecewise-linear variable cost described by ordered [`CostSegment`]s.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while building or loading a fleet.
#[derive(Debug, Error)]
pub enum FleetError {
    #[error("failed to parse fleet document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("generator type `{name}`: {reason}")]
    Invalid { name: String, reason: String },
    #[error("fleet has no generating capacity")]
    Empty,
}

/// One block of a unit's variable cost curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostSegment {
    /// $/MWh
    pub marginal_cost: f64,
    /// MW
    pub capacity: f64,
}

impl CostSegment {
    pub fn new(marginal_cost: f64, capacity: f64) -> Self {
        Self {
            marginal_cost,
            capacity,
        }
    }
}

/// A class of identical generating units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorType {
    pub name: String,
    pub startup_cost: f64,
    pub min_output: f64,
    pub unit_count: u32,
    pub segments: Vec<CostSegment>,
}

impl GeneratorType {
    /// Builds and validates a generator type.
    pub fn new(
        name: impl Into<String>,
        startup_cost: f64,
        min_output: f64,
        segments: Vec<CostSegment>,
        unit_count: u32,
    ) -> Result<Self, FleetError> {
        let gtype = Self {
            name: name.into(),
            startup_cost,
            min_output,
            unit_count,
            segments,
        };
        gtype.validate()?;
        Ok(gtype)
    }

    /// Maximum output of a single unit, the sum of its segment capacities.
    pub fn max_output(&self) -> f64 {
        self.segments.iter().map(|s| s.capacity).sum()
    }

    /// Combined maximum output of all units of this type.
    pub fn type_capacity(&self) -> f64 {
        f64::from(self.unit_count) * self.max_output()
    }

    pub fn validate(&self) -> Result<(), FleetError> {
        let invalid = |reason: String| FleetError::Invalid {
            name: self.name.clone(),
            reason,
        };
        if self.segments.is_empty() {
            return Err(invalid("segments must be nonempty".into()));
        }
        for (i, seg) in self.segments.iter().enumerate() {
            if !(seg.capacity.is_finite() && seg.capacity > 0.0) {
                return Err(invalid(format!(
                    "segment {i} capacity must be positive, got {}",
                    seg.capacity
                )));
            }
            if !(seg.marginal_cost.is_finite() && seg.marginal_cost >= 0.0) {
                return Err(invalid(format!(
                    "segment {i} marginal_cost must be nonnegative, got {}",
                    seg.marginal_cost
                )));
            }
        }
        if self
            .segments
            .windows(2)
            .any(|w| w[1].marginal_cost < w[0].marginal_cost)
        {
            return Err(invalid(
                "segments not sorted by nondecreasing marginal_cost".into(),
            ));
        }
        if !(self.startup_cost.is_finite() && self.startup_cost >= 0.0) {
            return Err(invalid(format!(
                "startup_cost must be nonnegative, got {}",
                self.startup_cost
            )));
        }
        let max_output = self.max_output();
        if !(self.min_output.is_finite() && self.min_output >= 0.0 && self.min_output <= max_output)
        {
            return Err(invalid(format!(
                "min_output {} outside [0, {max_output}]",
                self.min_output
            )));
        }
        if self.unit_count == 0 {
            return Err(invalid("unit_count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Which built-in fixture to construct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuiltinFleet {
    Gribik,
    Scarf,
}

impl BuiltinFleet {
    pub fn name(self) -> &'static str {
        match self {
            BuiltinFleet::Gribik => "gribik",
            BuiltinFleet::Scarf => "scarf",
        }
    }
}

impl std::str::FromStr for BuiltinFleet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gribik" => Ok(BuiltinFleet::Gribik),
            "scarf" => Ok(BuiltinFleet::Scarf),
            other => Err(format!("unknown builtin fleet `{other}`")),
        }
    }
}

/// An immutable collection of generator types.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fleet {
    pub types: Vec<GeneratorType>,
}

impl Fleet {
    pub fn new(types: Vec<GeneratorType>) -> Result<Self, FleetError> {
        let fleet = Self { types };
        fleet.validate()?;
        Ok(fleet)
    }

    pub fn validate(&self) -> Result<(), FleetError> {
        for gtype in &self.types {
            gtype.validate()?;
        }
        if self.total_capacity() <= 0.0 {
            return Err(FleetError::Empty);
        }
        Ok(())
    }

    /// Σ over types of unit_count · max_output.
    pub fn total_capacity(&self) -> f64 {
        self.types.iter().map(GeneratorType::type_capacity).sum()
    }

    pub fn unit_total(&self) -> u32 {
        self.types.iter().map(|t| t.unit_count).sum()
    }

    /// Copy of the fleet with every startup cost set to zero.
    pub fn without_startup_costs(&self) -> Fleet {
        let mut fleet = self.clone();
        for gtype in &mut fleet.types {
            gtype.startup_cost = 0.0;
        }
        fleet
    }

    /// A magnitude used to scale absolute tolerances: the cost of running
    /// every unit at full output, startups included.
    pub fn cost_scale(&self) -> f64 {
        self.types
            .iter()
            .map(|t| {
                let full: f64 = t
                    .segments
                    .iter()
                    .map(|s| s.marginal_cost * s.capacity)
                    .sum();
                f64::from(t.unit_count) * (t.startup_cost + full)
            })
            .sum::<f64>()
            .max(1.0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fleet serializes")
    }
}

/// Two-segment Gribik fixture and the modified Scarf fixture.
pub fn builtin_fleet(which: BuiltinFleet) -> Fleet {
    let seg = CostSegment::new;
    let types = match which {
        BuiltinFleet::Gribik => vec![
            GeneratorType {
                name: "A".into(),
                startup_cost: 0.0,
                min_output: 0.0,
                unit_count: 1,
                segments: vec![seg(65.0, 100.0), seg(110.0, 100.0)],
            },
            GeneratorType {
                name: "B".into(),
                startup_cost: 6000.0,
                min_output: 0.0,
                unit_count: 1,
                segments: vec![seg(40.0, 100.0), seg(90.0, 100.0)],
            },
            GeneratorType {
                name: "C".into(),
                startup_cost: 8000.0,
                min_output: 0.0,
                unit_count: 1,
                segments: vec![seg(25.0, 100.0), seg(35.0, 100.0)],
            },
        ],
        BuiltinFleet::Scarf => vec![
            GeneratorType {
                name: "Smokestack".into(),
                startup_cost: 53.0,
                min_output: 0.0,
                unit_count: 6,
                segments: vec![seg(3.0, 16.0)],
            },
            GeneratorType {
                name: "HighTech".into(),
                startup_cost: 30.0,
                min_output: 0.0,
                unit_count: 5,
                segments: vec![seg(2.0, 7.0)],
            },
            GeneratorType {
                name: "MedTech".into(),
                startup_cost: 0.0,
                min_output: 2.0,
                unit_count: 5,
                segments: vec![seg(7.0, 6.0)],
            },
        ],
    };
    Fleet { types }
}

/// Parses a JSON fleet document and validates every generator type.
pub fn load_fleet(document: &str) -> Result<Fleet, FleetError> {
    let fleet: Fleet = serde_json::from_str(document)?;
    fleet.validate()?;
    Ok(fleet)
}
