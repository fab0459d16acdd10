//! Fourier convergence study with slope fits; writes CSV/JSON/gnuplot files.
//!
//! cargo run --release --example fourier_study -- out/

use std::path::PathBuf;

use groundstate::analysis::{convergence_study, ReferenceSpec, StudyFamily, StudyOptions};
use groundstate::problem::ProblemSpec;

fn main() -> groundstate::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    let family = StudyFamily::Fourier {
        ns: (4..=30).collect(),
    };
    let table = convergence_study(
        &ProblemSpec::sin_kink_benchmark(),
        &family,
        &ReferenceSpec::Fourier { n: 65 },
        &StudyOptions::default(),
    )?;
    print!("{}", table.to_csv());
    for s in &table.slopes {
        if let Some(f) = s.fit {
            println!("{:<8} slope {:+.3}", s.column, f.slope);
        }
    }
    std::fs::create_dir_all(&dir)?;
    table.write_files(&dir, "study_fourier")?;
    println!("wrote {}/study_fourier.{{csv,json,dat}}", dir.display());
    Ok(())
}
