//! Dilating the qubit trine POVM to a projective measurement.

use qformal::povm::{derive_povm, naimark_dilate, EffectList};
use qformal::{random, HermitianMatrix, C64};

fn main() -> qformal::Result<()> {
    let trine: Vec<HermitianMatrix> = (0..3)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            let v = [C64::new(a.cos(), 0.0), C64::new(a.sin(), 0.0)];
            let m = qformal::ComplexMatrix::ket_projector(&v)?.scale(C64::new(2.0 / 3.0, 0.0));
            HermitianMatrix::new(m)
        })
        .collect::<qformal::Result<_>>()?;
    let effects = EffectList::new(trine)?;

    let dilation = naimark_dilate(&effects)?;
    println!("isometry deviation {:.1e}", dilation.isometry_deviation());

    let rho = random::density(2, &mut random::rng(2));
    let direct = effects.probabilities(&rho)?;
    for (b, p) in direct.iter().enumerate() {
        println!(
            "outcome {b}: {p:.6} vs dilated {:.6}",
            dilation.probability(&rho, b)?
        );
    }

    let recovered = derive_povm(&dilation.ancilla_model())?;
    println!(
        "effects recovered through the unitary completion: {:.1e}",
        recovered.max_dist(&effects)
    );
    Ok(())
}
