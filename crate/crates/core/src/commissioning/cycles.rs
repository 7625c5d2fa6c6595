//! Cycle logs: grid-side power samples, positive while charging.
//!
//! Text form is `timestamp_s,power_mw,cycle` with an optional header and `#`
//! comment lines. Timestamps are seconds from any origin.

use std::collections::BTreeSet;
use std::path::Path;

use serde::Serialize;

use super::CommissioningError;
use crate::model::BatterySpec;

/// Samples may exceed rated power by this fraction before the log is rejected.
pub const POWER_TOLERANCE: f64 = 0.10;
pub const DEFAULT_MIN_CYCLES: usize = 3;
/// Samples below this fraction of rated power count as idle for C-rate checks.
const IDLE_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub timestamp_s: f64,
    pub power_mw: f64,
    pub cycle: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleLog {
    samples: Vec<Sample>,
    rated_power_mw: f64,
}

impl CycleLog {
    pub fn new(samples: Vec<Sample>, battery: &BatterySpec) -> Result<Self, CommissioningError> {
        if samples.is_empty() {
            return Err(CommissioningError::EmptyLog);
        }
        let limit = battery.rated_power_mw() * (1.0 + POWER_TOLERANCE);
        for (i, s) in samples.iter().enumerate() {
            if !(s.timestamp_s.is_finite() && s.power_mw.is_finite()) {
                return Err(CommissioningError::BadSample {
                    index: i,
                    message: "non-finite value".into(),
                });
            }
            if s.power_mw.abs() > limit {
                return Err(CommissioningError::BadSample {
                    index: i,
                    message: format!("|{}| MW exceeds {limit} MW", s.power_mw),
                });
            }
            if i > 0 && s.timestamp_s <= samples[i - 1].timestamp_s {
                return Err(CommissioningError::BadSample {
                    index: i,
                    message: "timestamps must be strictly increasing".into(),
                });
            }
        }
        Ok(Self {
            samples,
            rated_power_mw: battery.rated_power_mw(),
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    /// (charged, discharged) energy in MWh per cycle id, trapezoidal with
    /// segments split where power crosses zero. A segment belongs to the
    /// cycle of its first sample.
    pub fn energies(&self) -> Vec<(u32, f64, f64)> {
        let mut out: Vec<(u32, f64, f64)> = Vec::new();
        for w in self.samples.windows(2) {
            let (a, b) = (w[0], w[1]);
            let dt_h = (b.timestamp_s - a.timestamp_s) / 3600.0;
            let (charge, discharge) = split_trapezoid(a.power_mw, b.power_mw, dt_h);
            match out.last_mut() {
                Some(last) if last.0 == a.cycle => {
                    last.1 += charge;
                    last.2 += discharge;
                }
                _ => out.push((a.cycle, charge, discharge)),
            }
        }
        out
    }

    /// Cycles that both charged and discharged.
    pub fn complete_cycles(&self) -> usize {
        let cycles: BTreeSet<u32> = self
            .energies()
            .into_iter()
            .filter(|(_, c, d)| *c > 0.0 && *d > 0.0)
            .map(|(id, _, _)| id)
            .collect();
        cycles.len()
    }
}

/// Energy above and below zero of the linear segment from `p0` to `p1`.
fn split_trapezoid(p0: f64, p1: f64, dt_h: f64) -> (f64, f64) {
    if p0 >= 0.0 && p1 >= 0.0 {
        ((p0 + p1) / 2.0 * dt_h, 0.0)
    } else if p0 <= 0.0 && p1 <= 0.0 {
        (0.0, -(p0 + p1) / 2.0 * dt_h)
    } else {
        let tz = dt_h * p0 / (p0 - p1);
        let first = p0 / 2.0 * tz;
        let second = p1 / 2.0 * (dt_h - tz);
        if p0 > 0.0 {
            (first, -second)
        } else {
            (second, -first)
        }
    }
}

pub fn parse_cycle_log(text: &str, battery: &BatterySpec) -> Result<CycleLog, CommissioningError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut samples = Vec::new();
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| CommissioningError::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let header = first && record.get(0).is_some_and(|f| f.parse::<f64>().is_err());
        first = false;
        if header {
            continue;
        }
        let bad = |message: String| CommissioningError::Parse { line, message };
        if record.len() != 3 {
            return Err(bad(format!("expected 3 columns, found {}", record.len())));
        }
        let number = |i: usize, name: &str| {
            record[i]
                .parse::<f64>()
                .map_err(|_| bad(format!("{name}: `{}` is not a number", &record[i])))
        };
        samples.push(Sample {
            timestamp_s: number(0, "timestamp_s")?,
            power_mw: number(1, "power_mw")?,
            cycle: record[2]
                .parse()
                .map_err(|_| bad(format!("cycle: `{}` is not a cycle number", &record[2])))?,
        });
    }
    CycleLog::new(samples, battery)
}

pub fn read_cycle_log(path: &Path, battery: &BatterySpec) -> Result<CycleLog, CommissioningError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CommissioningError::Io(format!("{}: {e}", path.display())))?;
    parse_cycle_log(&text, battery)
}

pub fn write_cycle_log(log: &CycleLog) -> String {
    let mut out = String::from("timestamp_s,power_mw,cycle\n");
    for s in log.samples() {
        out.push_str(&format!("{},{},{}\n", s.timestamp_s, s.power_mw, s.cycle));
    }
    out
}

/// Discharged over charged energy across the whole log.
pub fn round_trip_efficiency(log: &CycleLog, min_cycles: usize) -> Result<f64, CommissioningError> {
    let found = log.complete_cycles();
    if found < min_cycles {
        return Err(CommissioningError::TooFewCycles {
            found,
            required: min_cycles,
        });
    }
    let (charged, discharged) = log
        .energies()
        .iter()
        .fold((0.0, 0.0), |(c, d), (_, ci, di)| (c + ci, d + di));
    if charged <= 0.0 {
        return Err(CommissioningError::NoChargeEnergy);
    }
    Ok(discharged / charged)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CRateVerdict {
    pub mean_abs_power_mw: f64,
    pub target_mw: f64,
    pub tolerance: f64,
    /// |mean − target| / target
    pub deviation: f64,
    pub pass: bool,
}

/// Mean absolute power over active samples against a C/2 target.
pub fn check_c_rate(
    log: &CycleLog,
    battery: &BatterySpec,
    tolerance: f64,
) -> Result<CRateVerdict, CommissioningError> {
    if !(tolerance.is_finite() && tolerance >= 0.0) {
        return Err(CommissioningError::InvalidThreshold("C-rate tolerance"));
    }
    if log.samples().is_empty() {
        return Err(CommissioningError::EmptyLog);
    }
    let idle = IDLE_FRACTION * log.rated_power_mw;
    let active: Vec<f64> = log
        .samples()
        .iter()
        .map(|s| s.power_mw.abs())
        .filter(|p| *p > idle)
        .collect();
    let mean = if active.is_empty() {
        0.0
    } else {
        active.iter().sum::<f64>() / active.len() as f64
    };
    let target = 0.5 * battery.energy_capacity_mwh();
    let deviation = (mean - target).abs() / target;
    Ok(CRateVerdict {
        mean_abs_power_mw: mean,
        target_mw: target,
        tolerance,
        deviation,
        pass: deviation <= tolerance,
    })
}

/// Generator for test and demonstration logs with a known efficiency.
///
/// Each cycle charges then discharges at `power_mw` with linear ramps of
/// `ramp_s` and rests of `rest_s`; the discharge plateau is shortened so the
/// delivered energy is `efficiency × charge_mwh`. Samples sit on a uniform
/// grid of `sample_period_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticCycles {
    pub power_mw: f64,
    pub charge_mwh: f64,
    pub efficiency: f64,
    pub cycles: u32,
    pub sample_period_s: f64,
    pub ramp_s: f64,
    pub rest_s: f64,
}

impl Default for SyntheticCycles {
    fn default() -> Self {
        Self {
            power_mw: 0.5,
            charge_mwh: 1.0,
            efficiency: 0.9,
            cycles: 3,
            sample_period_s: 60.0,
            ramp_s: 300.0,
            rest_s: 900.0,
        }
    }
}

impl SyntheticCycles {
    /// Breakpoints (time, power) of one cycle starting at t = 0, and its length.
    fn cycle_shape(&self) -> (Vec<(f64, f64)>, f64) {
        let p = self.power_mw;
        let r = self.ramp_s;
        let hold_in = self.charge_mwh * 3600.0 / p - r;
        let hold_out = self.efficiency * self.charge_mwh * 3600.0 / p - r;
        assert!(
            hold_in >= 0.0 && hold_out >= 0.0,
            "ramps longer than the blocks"
        );
        let mut t = 0.0;
        let mut pts = vec![(t, 0.0)];
        for (level, hold) in [(p, hold_in), (-p, hold_out)] {
            t += r;
            pts.push((t, level));
            t += hold;
            pts.push((t, level));
            t += r;
            pts.push((t, 0.0));
            t += self.rest_s;
            pts.push((t, 0.0));
        }
        (pts, t)
    }

    pub fn samples(&self) -> Vec<Sample> {
        let (shape, length) = self.cycle_shape();
        let total = length * self.cycles as f64;
        let steps = (total / self.sample_period_s).floor() as u64;
        (0..=steps)
            .map(|k| {
                let t = k as f64 * self.sample_period_s;
                let cycle = ((t / length) as u32).min(self.cycles.saturating_sub(1));
                let local = t - cycle as f64 * length;
                Sample {
                    timestamp_s: t,
                    power_mw: interpolate(&shape, local),
                    cycle: cycle + 1,
                }
            })
            .collect()
    }

    pub fn log(&self, battery: &BatterySpec) -> Result<CycleLog, CommissioningError> {
        CycleLog::new(self.samples(), battery)
    }
}

fn interpolate(points: &[(f64, f64)], t: f64) -> f64 {
    for w in points.windows(2) {
        let ((t0, p0), (t1, p1)) = (w[0], w[1]);
        if t >= t0 && t <= t1 {
            return if t1 > t0 {
                p0 + (p1 - p0) * (t - t0) / (t1 - t0)
            } else {
                p1
            };
        }
    }
    0.0
}
