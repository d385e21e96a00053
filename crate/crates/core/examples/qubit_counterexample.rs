//! In two dimensions frame functions need not come from a density matrix.

use qformal::gleason::{
    check_frame_function, fit_density, qubit_counterexample, qubit_frame_samples,
};

fn main() -> qformal::Result<()> {
    let samples = qubit_counterexample(100, 42)?;
    let checks = check_frame_function(&samples);
    for c in &checks.checks {
        println!(
            "{:<24} deviation {:.1e}  pass {}",
            c.name, c.deviation, c.passed
        );
    }
    let fit = fit_density(&samples)?;
    println!(
        "(1 + n_z³)/2:   best linear fit residual {:.4}",
        fit.residual
    );

    let linear = qubit_frame_samples(100, 42, |n| (1.0 + 0.6 * n[2]) / 2.0);
    println!(
        "(1 + 0.6 n_z)/2: residual {:.1e}",
        fit_density(&linear)?.residual
    );
    Ok(())
}
