//! Walks a project from feasibility to handover, showing a rejected gate on the way.

use bess_epc::workflow::{
    estimate_schedule, load_project, save_project, Deliverable, DeliverableKind, EpcProject,
    ScheduleParams,
};
use chrono::NaiveDate;

fn record(project: &mut EpcProject, kind: DeliverableKind, date: (i32, u32, u32), reference: &str) {
    project.record_deliverable(Deliverable {
        kind,
        date: NaiveDate::from_ymd_opt(date.0, date.1, date.2).expect("valid date"),
        reference: reference.into(),
    });
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    use DeliverableKind::*;
    let mut p = EpcProject::new("Aakirkeby BESS")?;

    record(
        &mut p,
        SiteSelectionReport,
        (2023, 1, 20),
        "site ranking v2",
    );
    record(&mut p, BusinessCase, (2023, 2, 3), "");
    println!("-> {}", p.advance_phase()?);

    record(&mut p, ConnectionOffer, (2023, 9, 14), "Trefor Elnet offer");
    record(&mut p, BuildingPermit, (2023, 6, 1), "");
    if let Err(e) = p.advance_phase() {
        println!("rejected: {e}");
    }
    record(
        &mut p,
        FireCertificate,
        (2023, 10, 2),
        "fire-safety documentation",
    );
    println!("-> {}", p.advance_phase()?);

    let remaining = [
        vec![(FatPassed, (2024, 1, 15))],
        vec![(InstallationComplete, (2024, 5, 30))],
        vec![
            (SatPassed, (2024, 7, 1)),
            (PrequalificationSubmitted, (2024, 7, 12)),
        ],
    ];
    for gate in remaining {
        for (kind, date) in gate {
            record(&mut p, kind, date, "");
        }
        println!("-> {}", p.advance_phase()?);
    }

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("aakirkeby.toml");
    save_project(&path, &p)?;
    print!("\n{}", load_project(&path)?.status_text());

    let timeline = estimate_schedule(&ScheduleParams::default())?;
    print!("\n{}", timeline.to_csv());
    let faster = ScheduleParams {
        grid_review_months: 4.0,
        ..Default::default()
    };
    println!(
        "total {} months; with a 4-month grid review {} months",
        timeline.total_months,
        estimate_schedule(&faster)?.total_months
    );
    Ok(())
}
