//! Error from grid-computed potential coefficients at fixed N = 30.

use groundstate::analysis::{quadrature_study, ReferenceSpec, StudyOptions};
use groundstate::problem::ProblemSpec;

fn main() -> groundstate::Result<()> {
    let ngs: Vec<usize> = (7..=15).map(|p| 1 << p).collect();
    let table = quadrature_study(
        &ProblemSpec::sin_kink_benchmark(),
        30,
        &ngs,
        &ReferenceSpec::Fourier { n: 65 },
        &StudyOptions::default(),
    )?;
    println!(
        "exact-assembly errors: {}",
        table.metadata["exact_assembly_errors"]
    );
    println!("Ng      H1          H1_int      lambda      lambda_int");
    for row in &table.rows {
        let v = |c: &str| row.values[table.column_index(c).unwrap()].unwrap_or(f64::NAN);
        println!(
            "{:<7} {:.3e}   {:.3e}   {:.3e}   {:.3e}",
            row.param,
            v("H1"),
            v("H1_int"),
            v("lambda"),
            v("lambda_int")
        );
    }
    for col in ["H1_int", "L2_int", "Hm1_int", "lambda_int"] {
        println!(
            "slope {col:<10} {:.3}",
            table.slope(col).unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
