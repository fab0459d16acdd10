//! Small P1 and P2 convergence studies on the harmonic-trap benchmark.
//! The full-size study runs through `groundstate study-fem`.

use groundstate::analysis::{convergence_study, ReferenceSpec, StudyFamily, StudyOptions};
use groundstate::problem::ProblemSpec;

fn main() -> groundstate::Result<()> {
    let problem = ProblemSpec::harmonic_square_benchmark();
    let opts = StudyOptions {
        jobs: 4,
        ..StudyOptions::default()
    };
    for degree in [1, 2] {
        let family = StudyFamily::Fem {
            degree,
            ns: vec![4, 8, 16],
        };
        let table = convergence_study(
            &problem,
            &family,
            &ReferenceSpec::Fem {
                degree: 2,
                factor: 4,
            },
            &opts,
        )?;
        println!("P{degree}, reference {}", table.reference);
        for row in &table.rows {
            let v = |c: &str| row.values[table.column_index(c).unwrap()].unwrap_or(f64::NAN);
            println!(
                "  n={:<3} h={:.4}  H1 {:.3e}  L2 {:.3e}  lambda {:.3e}",
                row.param,
                row.x,
                v("H1"),
                v("L2"),
                v("lambda")
            );
        }
        for col in ["H1", "L2", "lambda", "energy"] {
            println!(
                "  slope {col:<7} {:.3}",
                table.slope(col).unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
