//! Recovering a density matrix from frame-function values.

use qformal::gleason::{
    check_frame_function, fit_density, fit_density_povm, frame_samples_from_state,
    povm_samples_from_state, random_resolutions,
};
use qformal::povm::tetrahedral_qubit_povm;
use qformal::random;

fn main() -> qformal::Result<()> {
    let mut rng = random::rng(4);
    for dim in [3, 4, 5] {
        let rho = random::density(dim, &mut rng);
        let resolutions = random_resolutions(dim, dim + 1, 99);
        let samples = frame_samples_from_state(&rho, &resolutions)?;
        assert!(check_frame_function(&samples).passed());
        let fit = fit_density(&samples)?;
        println!(
            "d={dim}: {} equations, rank {}/{}, residual {:.1e}, error {:.1e}",
            fit.equations,
            fit.rank,
            dim * dim,
            fit.residual,
            fit.frobenius_error(&rho)
        );
    }

    // one tetrahedral POVM is informationally complete for a qubit
    let rho = random::density(2, &mut rng);
    let data = povm_samples_from_state(&rho, &[tetrahedral_qubit_povm()])?;
    let fit = fit_density_povm(&data)?;
    println!("tetrahedral POVM: error {:.1e}", fit.frobenius_error(&rho));

    // too few resolutions leave the state undetermined
    let thin = frame_samples_from_state(&rho, &random_resolutions(2, 2, 5))?;
    let fit = fit_density(&thin)?;
    println!(
        "two qubit bases: rank {}, rank deficient = {}",
        fit.rank, fit.rank_deficient
    );
    Ok(())
}
