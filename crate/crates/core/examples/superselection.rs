//! Sectors of the algebra generated by a set of questions.

use qformal::lattice::{superselection_sectors, Question};
use qformal::{ProjectorMatrix, C64};

fn main() -> qformal::Result<()> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let e0 = Question::new("e0", ProjectorMatrix::basis(3, 0));
    let mix = Question::from_ket(
        "e0+e1",
        &[C64::new(r, 0.0), C64::new(r, 0.0), C64::new(0.0, 0.0)],
    )?;

    let sectors = superselection_sectors(&[e0.clone(), mix])?;
    println!(
        "{} sectors with ranks {:?}",
        sectors.len(),
        sectors.iter().map(|s| s.rank()).collect::<Vec<_>>()
    );

    let sectors = superselection_sectors(&[e0])?;
    println!(
        "e0 alone: ranks {:?}",
        sectors.iter().map(|s| s.rank()).collect::<Vec<_>>()
    );
    Ok(())
}
