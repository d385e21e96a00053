//! Yes-no questions on a qubit: connectives, implication, and the failure of
//! distributivity that separates quantum logic from a Boolean algebra.

use qformal::lattice::{check_orthomodular, LatticeStatus, Question};
use qformal::C64;

fn main() -> qformal::Result<()> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let zero = Question::from_ket("0", &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)])?;
    let plus = Question::from_ket("+", &[C64::new(r, 0.0), C64::new(r, 0.0)])?;
    let minus = plus.negation();

    println!("0 ∧ +  has rank {}", zero.meet(&plus).rank());
    println!("0 ∨ +  has rank {}", zero.join(&plus).rank());
    println!("+ ⊥ -: {}", plus.is_orthogonal(&minus));
    println!("0 ⇒ 0 ∨ +: {}", zero.implies(&zero.join(&plus)));

    // a ∧ (b ∨ c) = 0 ∧ I = 0, but (a ∧ b) ∨ (a ∧ c) = 0 ∨ 0 = the zero question
    let lhs = zero.meet(&plus.join(&minus));
    let rhs = zero.meet(&plus).join(&zero.meet(&minus));
    println!(
        "0 ∧ (+ ∨ -) rank {}, (0 ∧ +) ∨ (0 ∧ -) rank {}",
        lhs.rank(),
        rhs.rank()
    );

    let mut elements = vec![
        Question::never(2),
        Question::always(2),
        zero.clone(),
        zero.negation(),
        plus,
        minus,
    ];
    let report = check_orthomodular(&elements);
    assert_eq!(report.status(), LatticeStatus::Orthomodular);
    println!(
        "{} elements, {} comparable pairs, {} distributivity violations",
        report.elements,
        report.comparable_pairs,
        report.distributivity_violations.len()
    );

    elements.pop();
    println!("without ¬+: {:?}", check_orthomodular(&elements).status());
    Ok(())
}
