use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Phase, WorkflowError};

/// Activity durations in months.
///
/// Grid-connection and municipal reviews run in parallel, so permitting
/// takes the longer of the two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleParams {
    pub feasibility_months: f64,
    pub grid_review_months: f64,
    pub municipal_review_months: f64,
    pub procurement_months: f64,
    pub construction_months: f64,
    pub commissioning_months: f64,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        Self {
            feasibility_months: 2.0,
            grid_review_months: 12.0,
            municipal_review_months: 6.0,
            procurement_months: 3.0,
            construction_months: 4.0,
            commissioning_months: 2.0,
        }
    }
}

impl ScheduleParams {
    pub fn zero() -> Self {
        Self {
            feasibility_months: 0.0,
            grid_review_months: 0.0,
            municipal_review_months: 0.0,
            procurement_months: 0.0,
            construction_months: 0.0,
            commissioning_months: 0.0,
        }
    }

    fn named(&self) -> [(&'static str, f64); 6] {
        [
            ("feasibility", self.feasibility_months),
            ("grid review", self.grid_review_months),
            ("municipal review", self.municipal_review_months),
            ("procurement", self.procurement_months),
            ("construction", self.construction_months),
            ("commissioning", self.commissioning_months),
        ]
    }

    pub fn validate(&self) -> Result<(), WorkflowError> {
        for (name, value) in self.named() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(WorkflowError::InvalidDuration { name, value });
            }
        }
        Ok(())
    }

    fn phase_duration(&self, phase: Phase) -> f64 {
        match phase {
            Phase::Feasibility => self.feasibility_months,
            Phase::Permitting => self.grid_review_months.max(self.municipal_review_months),
            Phase::Procurement => self.procurement_months,
            Phase::Construction => self.construction_months,
            Phase::Commissioning => self.commissioning_months,
            Phase::Handover => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSpan {
    pub phase: Phase,
    pub start_offset: f64,
    pub end_offset: f64,
}

impl PhaseSpan {
    pub fn months(&self) -> f64 {
        self.end_offset - self.start_offset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timeline {
    pub spans: Vec<PhaseSpan>,
    pub total_months: f64,
}

impl Timeline {
    pub fn span(&self, phase: Phase) -> &PhaseSpan {
        &self.spans[phase as usize]
    }

    /// `phase,start_offset,end_offset` in months; Handover is a zero-length milestone.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("phase,start_offset,end_offset\n");
        for s in &self.spans {
            let _ = writeln!(out, "{},{},{}", s.phase, s.start_offset, s.end_offset);
        }
        out
    }
}

pub fn estimate_schedule(params: &ScheduleParams) -> Result<Timeline, WorkflowError> {
    params.validate()?;
    let mut t = 0.0;
    let spans = Phase::ALL
        .into_iter()
        .map(|phase| {
            let start = t;
            t += params.phase_duration(phase);
            PhaseSpan {
                phase,
                start_offset: start,
                end_offset: t,
            }
        })
        .collect();
    Ok(Timeline {
        spans,
        total_months: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_take_the_longer_review() {
        let t = estimate_schedule(&ScheduleParams::default()).unwrap();
        assert_eq!(t.span(Phase::Permitting).months(), 12.0);
        assert_eq!(t.total_months, 23.0);
        assert_eq!(t.span(Phase::Handover).start_offset, 23.0);
    }

    #[test]
    fn all_zero() {
        assert_eq!(
            estimate_schedule(&ScheduleParams::zero())
                .unwrap()
                .total_months,
            0.0
        );
    }

    #[test]
    fn rejects_negative() {
        let p = ScheduleParams {
            procurement_months: -1.0,
            ..Default::default()
        };
        assert!(matches!(
            estimate_schedule(&p),
            Err(WorkflowError::InvalidDuration {
                name: "procurement",
                ..
            })
        ));
    }

    #[test]
    fn csv_layout() {
        let csv = estimate_schedule(&ScheduleParams::default())
            .unwrap()
            .to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "phase,start_offset,end_offset");
        assert_eq!(lines[2], "Permitting,2,14");
        assert_eq!(lines.len(), 7);
    }

    proptest! {
        #[test]
        fn total_is_monotone(base in proptest::array::uniform6(0.0f64..24.0), which in 0usize..6, extra in 0.0f64..12.0) {
            let params = |v: [f64; 6]| ScheduleParams {
                feasibility_months: v[0],
                grid_review_months: v[1],
                municipal_review_months: v[2],
                procurement_months: v[3],
                construction_months: v[4],
                commissioning_months: v[5],
            };
            let mut bumped = base;
            bumped[which] += extra;
            let a = estimate_schedule(&params(base)).unwrap().total_months;
            let b = estimate_schedule(&params(bumped)).unwrap().total_months;
            prop_assert!(b >= a);
        }
    }
}
