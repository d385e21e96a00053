//! Propagators, the one-parameter group law and the Hamiltonian logarithm.

use qformal::dynamics::{
    check_abelian_group, evolve_question, hamiltonian_log, propagator, Hamiltonian,
};
use qformal::lattice::Question;
use qformal::matrix::pauli;
use qformal::random;

fn main() -> qformal::Result<()> {
    let h = Hamiltonian::new(random::hermitian(4, &mut random::rng(8)));
    let report = check_abelian_group(&h, &[0.0, 0.2, 0.5, -0.3, 1.1])?;
    for c in &report.checks {
        println!("{:<20} {:.1e}", c.name, c.deviation);
    }

    let back = hamiltonian_log(&propagator(&h, 0.3)?)?;
    println!("log round trip {:.1e}", back.h.max_dist(&h.h));

    let flip = Hamiltonian::from_matrix(pauli::x())?;
    let q = Question::new("0", qformal::ProjectorMatrix::basis(2, 0));
    let u = propagator(&flip, std::f64::consts::FRAC_PI_2)?;
    let moved = evolve_question(&q, &u)?;
    let p1 = moved.matrix().get(1, 1).re;
    println!("after a quarter period the question projects onto |1⟩ with weight {p1:.6}");
    Ok(())
}
