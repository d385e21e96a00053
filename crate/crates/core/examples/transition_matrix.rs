//! Transition probabilities between complete question sets.

use qformal::born::{transition_matrix, verify_bistochastic};
use qformal::lattice::{complete_questions, CompleteQuestionSet, QuestionFamily};
use qformal::{random, ComplexMatrix, ProjectorMatrix};

fn main() -> qformal::Result<()> {
    // two mutually unbiased qubit bases
    let z = CompleteQuestionSet::computational(2);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let x = CompleteQuestionSet::from_frame(&ComplexMatrix::from_real_rows(&[&[r, r], &[r, -r]])?)?;
    let t = transition_matrix(&z, &x)?;
    println!("z vs x:\n{}", t.p);

    let mut rng = random::rng(17);
    let b = complete_questions(&QuestionFamily::random_rank_one(2, &mut rng))?;
    let c = complete_questions(&QuestionFamily::random_rank_one(2, &mut rng))?;
    let t = transition_matrix(&b, &c)?;
    let report = verify_bistochastic(&t);
    println!(
        "random two-qubit families: doubly stochastic = {}",
        report.passed()
    );

    // a rank-2 atom breaks the row sums
    let coarse = CompleteQuestionSet::from_atoms(vec![
        ProjectorMatrix::new(ComplexMatrix::from_diagonal(&[1.0, 1.0, 0.0, 0.0]))?,
        ProjectorMatrix::basis(4, 2),
        ProjectorMatrix::basis(4, 3),
    ])?;
    let t = transition_matrix(&CompleteQuestionSet::computational(4), &coarse)?;
    let report = verify_bistochastic(&t);
    for check in report.failures() {
        println!(
            "{}: {:.3} ({})",
            check.name,
            check.deviation,
            check.detail.as_deref().unwrap_or("")
        );
    }
    Ok(())
}
