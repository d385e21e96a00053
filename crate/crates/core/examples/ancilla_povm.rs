//! Effects induced on a system by measuring an ancilla after a joint unitary.

use qformal::povm::{derive_povm, joint_probability, verify_povm, AncillaModel};
use qformal::random;

fn main() -> qformal::Result<()> {
    let mut rng = random::rng(12);
    let model = AncillaModel::random(2, 3, &mut rng);
    let effects = derive_povm(&model)?;
    let report = verify_povm(&effects);
    println!(
        "{} effects on a qubit, valid POVM: {}",
        effects.len(),
        report.passed()
    );
    for note in &report.notes {
        println!("  {note}");
    }

    let rho = random::density(2, &mut rng);
    for (b, p) in effects.probabilities(&rho)?.iter().enumerate() {
        println!(
            "  outcome {b}: Tr(ρE) = {p:.6}, joint = {:.6}",
            joint_probability(&rho, &model, b)?
        );
    }

    let json = serde_json::to_string(&model).expect("model serializes");
    println!("model file is {} bytes", json.len());
    Ok(())
}
