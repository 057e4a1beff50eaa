//! Consumer side: logarithmic utility, the hourly demand function, daily
//! demand profiles, and the per-hour demand noise.
//!
//! Hourly demand is an inelastic floor `μ1 ν d1_t` plus an elastic part
//! `μ2 (1 + δ_t) a / λ`. The matching utility is
//! `U_t(D) = a μ2 (1 + δ_t) ln(D − μ1 ν d1_t) + C`, whose constant `C`
//! shifts reported utility and welfare levels but never prices or demands.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::io::Read;
use thiserror::Error;

pub const HOURS: usize = 24;

/// Standard deviation of the hourly demand noise.
pub const NOISE_STD: f64 = 0.01;

/// Summary statistics of the hourly base demand used by the experiments.
pub const BASE_DEMAND_MIN: f64 = 28340.0;
pub const BASE_DEMAND_MEAN: f64 = 41086.7;
pub const BASE_DEMAND_MAX: f64 = 50780.0;

#[derive(Debug, Error)]
pub enum MarketError {
    #[error(
        "price {0} $/MWh must be positive: logarithmic utility has no finite demand otherwise"
    )]
    NonPositivePrice(f64),
    #[error("demand {demand} MW at or below the inelastic floor {floor} MW")]
    BelowFloor { demand: f64, floor: f64 },
    #[error("hour index {0} outside 0..24")]
    BadHour(usize),
    #[error("invalid demand model: {0}")]
    InvalidModel(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("profile csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Parameters of the hourly demand function and its utility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandModel {
    pub a: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub nu: f64,
    pub utility_constant: f64,
}

impl DemandModel {
    pub fn new(
        a: f64,
        mu1: f64,
        mu2: f64,
        nu: f64,
        utility_constant: f64,
    ) -> Result<Self, MarketError> {
        let model = Self {
            a,
            mu1,
            mu2,
            nu,
            utility_constant,
        };
        model.validate()?;
        Ok(model)
    }

    /// `a = 3.9e4, ν = 0.01, μ1 = 0.8, μ2 = 0.2, C = 20000`.
    pub fn gribik() -> Self {
        Self {
            a: 3.9e4,
            mu1: 0.8,
            mu2: 0.2,
            nu: 0.01,
            utility_constant: 20000.0,
        }
    }

    /// `a = 455, ν = 0.0025, μ1 = 0.8, μ2 = 0.2, C = 500`.
    pub fn scarf() -> Self {
        Self {
            a: 455.0,
            mu1: 0.8,
            mu2: 0.2,
            nu: 0.0025,
            utility_constant: 500.0,
        }
    }

    /// `μ2 = 0` is accepted so that price-inelastic demand can be modelled.
    pub fn validate(&self) -> Result<(), MarketError> {
        let finite = [self.a, self.mu1, self.mu2, self.nu, self.utility_constant]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(MarketError::InvalidModel(
                "parameters must be finite".into(),
            ));
        }
        if self.a <= 0.0 || self.mu1 <= 0.0 || self.nu <= 0.0 || self.mu2 < 0.0 {
            return Err(MarketError::InvalidModel(format!(
                "need a, mu1, nu > 0 and mu2 >= 0, got a={} mu1={} mu2={} nu={}",
                self.a, self.mu1, self.mu2, self.nu
            )));
        }
        Ok(())
    }

    /// Inelastic demand floor `μ1 ν d1` for a base demand `d1`.
    pub fn floor(&self, base_demand: f64) -> f64 {
        self.mu1 * self.nu * base_demand
    }

    /// Coefficient `a μ2 (1 + δ)` of the hourly log utility.
    pub fn elastic_weight(&self, noise: f64) -> f64 {
        self.a * self.mu2 * (1.0 + noise)
    }
}

/// Utility-maximizing demand `a / λ` of `a ln d − λ d`.
pub fn consumer_best_response(model: &DemandModel, price: f64) -> Result<f64, MarketError> {
    if !(price > 0.0) {
        return Err(MarketError::NonPositivePrice(price));
    }
    Ok(model.a / price)
}

/// Base demand and noise for each hour of a day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayProfile {
    pub base_demand: [f64; HOURS],
    pub noise: [f64; HOURS],
}

impl DayProfile {
    pub fn new(base_demand: [f64; HOURS]) -> Result<Self, MarketError> {
        if let Some((t, d)) = base_demand
            .iter()
            .enumerate()
            .find(|(_, d)| !(d.is_finite() && **d > 0.0))
        {
            return Err(MarketError::InvalidProfile(format!(
                "hour {t} base demand {d} must be positive"
            )));
        }
        Ok(Self {
            base_demand,
            noise: [0.0; HOURS],
        })
    }

    /// Profile with every hour at the same base demand.
    pub fn constant(base_demand: f64) -> Result<Self, MarketError> {
        Self::new([base_demand; HOURS])
    }

    pub fn with_noise(mut self, noise: [f64; HOURS]) -> Self {
        self.noise = noise;
        self
    }

    /// The synthetic diurnal profile matching the published min/mean/max.
    pub fn default_synthetic() -> Self {
        let base = synthetic_profile(BASE_DEMAND_MIN, BASE_DEMAND_MEAN, BASE_DEMAND_MAX)
            .expect("published statistics are ordered");
        Self::new(base).expect("synthetic profile is positive")
    }

    pub fn base_sum(&self) -> f64 {
        self.base_demand.iter().sum()
    }

    fn hour(&self, t: usize) -> Result<(f64, f64), MarketError> {
        if t >= HOURS {
            return Err(MarketError::BadHour(t));
        }
        Ok((self.base_demand[t], self.noise[t]))
    }

    /// Inelastic floor of hour `t` under `model`.
    pub fn floor(&self, model: &DemandModel, t: usize) -> Result<f64, MarketError> {
        let (d1, _) = self.hour(t)?;
        Ok(model.floor(d1))
    }
}

/// `D_t(λ) = μ1 ν d1_t + μ2 (1 + δ_t) a / λ`.
pub fn hourly_demand(
    model: &DemandModel,
    profile: &DayProfile,
    t: usize,
    price: f64,
) -> Result<f64, MarketError> {
    let (d1, noise) = profile.hour(t)?;
    let elastic = consumer_best_response(model, price)?;
    Ok(model.floor(d1) + model.mu2 * (1.0 + noise) * elastic)
}

/// `U_t(D) = a μ2 (1 + δ_t) ln(D − μ1 ν d1_t) + C`.
pub fn hourly_utility(
    model: &DemandModel,
    profile: &DayProfile,
    t: usize,
    demand: f64,
) -> Result<f64, MarketError> {
    let (d1, noise) = profile.hour(t)?;
    let floor = model.floor(d1);
    if !(demand > floor) {
        return Err(MarketError::BelowFloor { demand, floor });
    }
    Ok(model.elastic_weight(noise) * (demand - floor).ln() + model.utility_constant)
}

#[derive(Debug, Deserialize, Serialize)]
struct ProfileRow {
    hour: usize,
    d1: f64,
}

/// Reads a 24-row `hour,d1` table (header required). Noise starts at zero.
pub fn load_profile<R: Read>(reader: R) -> Result<DayProfile, MarketError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let rows = rdr
        .deserialize::<ProfileRow>()
        .collect::<Result<Vec<_>, _>>()?;
    if rows.len() != HOURS {
        return Err(MarketError::InvalidProfile(format!(
            "expected {HOURS} rows, found {}",
            rows.len()
        )));
    }
    let mut base = [f64::NAN; HOURS];
    for row in rows {
        if row.hour >= HOURS {
            return Err(MarketError::InvalidProfile(format!(
                "hour {} outside 0..24",
                row.hour
            )));
        }
        if !base[row.hour].is_nan() {
            return Err(MarketError::InvalidProfile(format!(
                "hour {} repeated",
                row.hour
            )));
        }
        base[row.hour] = row.d1;
    }
    DayProfile::new(base)
}

/// Writes the base demand as an `hour,d1` table.
pub fn write_profile<W: std::io::Write>(
    profile: &DayProfile,
    writer: W,
) -> Result<(), MarketError> {
    let mut wtr = csv::Writer::from_writer(writer);
    for (hour, &d1) in profile.base_demand.iter().enumerate() {
        wtr.serialize(ProfileRow { hour, d1 })?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Diurnal shape on [0, 1]: a night trough at 04:00 and an afternoon peak,
/// with a unique minimum.
fn diurnal_shape() -> [f64; HOURS] {
    let raw: Vec<f64> = (0..HOURS)
        .map(|t| {
            let phase = 2.0 * std::f64::consts::PI * (t as f64 - 4.0) / HOURS as f64;
            -phase.cos() - 0.25 * (2.0 * phase).cos()
        })
        .collect();
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut shape = [0.0; HOURS];
    for (s, r) in shape.iter_mut().zip(&raw) {
        *s = (r - lo) / (hi - lo);
    }
    shape
}

/// A smooth 24-hour base-demand curve whose minimum, mean, and maximum equal
/// the arguments.
///
/// A power transform `s^p` of a fixed diurnal shape on `[0, 1]` keeps its
/// extremes at 0 and 1 while moving the mean; `p` is found by bisection and
/// the result is mapped affinely onto `[min, max]`.
pub fn synthetic_profile(min: f64, mean: f64, max: f64) -> Result<[f64; HOURS], MarketError> {
    if !(min > 0.0 && min < mean && mean < max && max.is_finite()) {
        return Err(MarketError::InvalidProfile(format!(
            "need 0 < min < mean < max, got ({min}, {mean}, {max})"
        )));
    }
    let shape = diurnal_shape();
    let target = (mean - min) / (max - min);
    let mean_at = |p: f64| shape.iter().map(|s| s.powf(p)).sum::<f64>() / HOURS as f64;
    // mean_at is decreasing in p, from ~1 (p → 0) to 1/24 (p → ∞).
    let achievable_high = (HOURS as f64 - 1.0) / HOURS as f64;
    if !(target > 1.0 / HOURS as f64 && target < achievable_high) {
        return Err(MarketError::InvalidProfile(format!(
            "mean {mean} too close to min or max for a 24-hour curve with one extreme hour each"
        )));
    }
    let (mut lo, mut hi) = (1e-6, 1.0);
    while mean_at(hi) > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_at(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    let mut out = [0.0; HOURS];
    for (o, s) in out.iter_mut().zip(&shape) {
        *o = min + (max - min) * s.powf(p);
    }
    // Absorb the residual of the root solve into the non-extreme hours.
    let residual = mean * HOURS as f64 - out.iter().sum::<f64>();
    let interior: Vec<usize> = (0..HOURS)
        .filter(|&t| shape[t] > 0.0 && shape[t] < 1.0)
        .collect();
    for &t in &interior {
        out[t] += residual / interior.len() as f64;
    }
    Ok(out)
}

/// 24 independent `N(0, 0.01²)` draws. Hour `t` uses its own ChaCha stream
/// keyed by `(seed, t)`, so results do not depend on evaluation order.
pub fn sample_noise(seed: u64) -> [f64; HOURS] {
    let normal = Normal::new(0.0, NOISE_STD).expect("valid normal");
    let mut out = [0.0; HOURS];
    for (t, o) in out.iter_mut().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        *o = normal.sample(&mut rng);
    }
    out
}
