//! Ranks the shortlisted Bornholm sites and prints the selection report.

use std::path::Path;

use bess_epc::site::{read_scorecards, score_site, scoring_report, MAX_TOTAL};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/bornholm_sites.csv");
    let report = scoring_report(read_scorecards(&path)?)?;
    print!("{}", report.to_markdown());

    // a hypothetical fifth candidate, scored inline
    let ideal = score_site("Greenfield", &[2; 12])?;
    println!(
        "\n{} would score {}/{MAX_TOTAL}",
        ideal.site_name(),
        ideal.total()
    );
    Ok(())
}
