//! Checks measurements at the connection point and prints the compliance dossier.

use std::path::Path;

use bess_epc::quality::{check, dossier, read_limits, read_measurements};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let limits = read_limits(&data.join("pq_limits.toml"))?;

    for file in ["pq_measurements.toml", "pq_measurements_thd_fail.toml"] {
        let verdicts = read_measurements(&data.join(file))?
            .iter()
            .map(|m| check(m, &limits))
            .collect::<Result<Vec<_>, _>>()?;
        let d = dossier(verdicts)?;
        println!("<!-- {file} -->");
        print!("{}", d.to_markdown(&limits));
        println!();
    }
    Ok(())
}
