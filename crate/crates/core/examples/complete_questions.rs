//! Atoms of a commuting family and the Boolean algebra they generate.

use qformal::lattice::{
    boolean_algebra_from_atoms, check_orthomodular, complete_questions, AnswerString, Question,
    QuestionFamily,
};
use qformal::{tensor_product, ComplexMatrix, ProjectorMatrix};

fn main() -> qformal::Result<()> {
    let up = ComplexMatrix::basis_projector(2, 0);
    let id = ComplexMatrix::identity(2);
    let first = Question::new("first up", ProjectorMatrix::new(tensor_product(&up, &id))?);
    let second = Question::new("second up", ProjectorMatrix::new(tensor_product(&id, &up))?);
    let family = QuestionFamily::new(vec![first, second])?;

    let atoms = complete_questions(&family)?;
    for (k, atom) in atoms.atoms().iter().enumerate() {
        let answers = AnswerString::from_atom_index(k, family.len());
        println!("atom {k}: answers {:?}, rank {}", answers.bits, atom.rank());
    }

    let algebra = boolean_algebra_from_atoms(&atoms)?;
    let report = check_orthomodular(&algebra);
    println!(
        "Boolean algebra of {} elements, distributive: {}",
        algebra.len(),
        report.is_distributive()
    );
    Ok(())
}
