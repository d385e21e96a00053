//! Monte-Carlo answers and the empirical transition matrix.

use qformal::born::{empirical_transition, sample_answers, transition_matrix};
use qformal::lattice::CompleteQuestionSet;
use qformal::{ComplexMatrix, DensityMatrix};

fn main() -> qformal::Result<()> {
    let z = CompleteQuestionSet::computational(2);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let x = CompleteQuestionSet::from_frame(&ComplexMatrix::from_real_rows(&[&[r, r], &[r, -r]])?)?;

    let rho = DensityMatrix::new(ComplexMatrix::from_real_rows(&[&[0.8, 0.1], &[0.1, 0.2]])?)?;
    let record = sample_answers(&rho, &z, 50_000, 1)?;
    println!(
        "counts {:?}, frequencies {:?}",
        record.counts,
        record.frequencies()
    );

    let exact = transition_matrix(&z, &x)?;
    for seed in [1, 2, 3] {
        let est = empirical_transition(&z, &x, 100_000, seed)?;
        println!(
            "seed {seed}: max deviation from exact {:.4}",
            est.max_dist(&exact)
        );
    }
    Ok(())
}
