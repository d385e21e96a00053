//! Transition probabilities between complete questions, and Monte-Carlo
//! sampling of answer strings.
//!
//! `p^ij` is the probability that atom `i` of family `b` answers "yes" when
//! the system was last found in atom `j` of family `c`. Conditioning uses the
//! normalized projector `Q_c^(j) / Tr Q_c^(j)` as the state, which for rank-1
//! atoms gives `|⟨b_i|c_j⟩|²`.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{CompleteQuestionSet, Question};
use crate::matrix::{ComplexMatrix, DensityMatrix, C64};
use crate::random;
use crate::report::ValidationReport;
use crate::tolerance::Tolerances;

/// `Tr(ρP)`, clamped to `[0, 1]` once its excursion is within tolerance.
pub fn born_probability(rho: &DensityMatrix, q: &Question) -> Result<f64> {
    born_probability_with(rho, q.matrix(), &Tolerances::default())
}

pub fn born_probability_with(
    rho: &DensityMatrix,
    effect: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<f64> {
    rho.same_dim(effect)?;
    clamp_probability((rho.as_matrix() * effect).trace().re, tol)
}

fn clamp_probability(p: f64, tol: &Tolerances) -> Result<f64> {
    if p >= -tol.probability && p <= 1.0 + tol.probability {
        Ok(p.clamp(0.0, 1.0))
    } else {
        Err(Error::ProbabilityOutOfRange { value: p })
    }
}

/// `p^ij` with the atom ranks of both families, so row-sum failures can be
/// attributed. Rows index family `b`, columns family `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    #[serde(with = "real_rows")]
    pub p: DMatrix<f64>,
    pub ranks_b: Vec<usize>,
    pub ranks_c: Vec<usize>,
}

impl TransitionMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[(i, j)]
    }

    pub fn max_dist(&self, other: &TransitionMatrix) -> f64 {
        self.p
            .iter()
            .zip(other.p.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Serializes a real matrix as row-major nested arrays.
pub(crate) mod real_rows {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != m) {
            return Err(serde::de::Error::custom("ragged matrix rows"));
        }
        Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
    }
}

/// `p^ij = Tr(Q_b^(i) Q_c^(j)) / Tr(Q_c^(j))`.
pub fn transition_matrix(
    b: &CompleteQuestionSet,
    c: &CompleteQuestionSet,
) -> Result<TransitionMatrix> {
    b.atoms()[0].same_dim(&c.atoms()[0])?;
    let ranks_b = b.ranks();
    let ranks_c = c.ranks();
    let p = DMatrix::from_fn(b.len(), c.len(), |i, j| {
        let qi = b.atoms()[i].as_matrix();
        let qj = c.atoms()[j].as_matrix();
        (qi * qj).trace().re / qj.trace().re
    });
    Ok(TransitionMatrix {
        p,
        ranks_b,
        ranks_c,
    })
}

/// Range, column-sum and row-sum checks on a transition matrix.
///
/// Column sums hold for every pair of complete families; row sums only when
/// both families have rank-1 atoms, so a row-sum failure is attributed to
/// higher-rank atoms when any are present.
pub fn verify_bistochastic(t: &TransitionMatrix) -> ValidationReport {
    verify_bistochastic_with(t, &Tolerances::default())
}

pub fn verify_bistochastic_with(t: &TransitionMatrix, tol: &Tolerances) -> ValidationReport {
    let mut r = ValidationReport::new();
    let (rows, cols) = t.p.shape();

    let mut range_dev: f64 = 0.0;
    let mut range_at = None;
    for i in 0..rows {
        for j in 0..cols {
            let x = t.p[(i, j)];
            let dev = if x.is_nan() {
                f64::INFINITY
            } else {
                (-x).max(x - 1.0).max(0.0)
            };
            if dev > range_dev {
                range_dev = dev;
                range_at = Some((i, j));
            }
        }
    }
    r.check_with(
        "entries_in_unit_interval",
        range_dev,
        tol.stochastic,
        range_at
            .filter(|_| range_dev > tol.stochastic)
            .map(|(i, j)| format!("entry ({i}, {j})")),
    );

    let col_dev: Vec<f64> = (0..cols)
        .map(|j| (t.p.column(j).sum() - 1.0).abs())
        .collect();
    let row_dev: Vec<f64> = (0..rows).map(|i| (t.p.row(i).sum() - 1.0).abs()).collect();
    let bad_cols: Vec<usize> = (0..cols)
        .filter(|&j| !(col_dev[j] <= tol.stochastic))
        .collect();
    let bad_rows: Vec<usize> = (0..rows)
        .filter(|&i| !(row_dev[i] <= tol.stochastic))
        .collect();
    let worst = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);

    r.check_with(
        "column_sums",
        worst(&col_dev),
        tol.stochastic,
        (!bad_cols.is_empty()).then(|| format!("columns {bad_cols:?}")),
    );
    let row_detail = if bad_rows.is_empty() {
        None
    } else {
        let high_rank_b: Vec<usize> = (0..t.ranks_b.len()).filter(|&i| t.ranks_b[i] > 1).collect();
        let high_rank_c: Vec<usize> = (0..t.ranks_c.len()).filter(|&j| t.ranks_c[j] > 1).collect();
        let mut msg = format!("rows {bad_rows:?}");
        if !high_rank_b.is_empty() || !high_rank_c.is_empty() {
            msg.push_str(&format!(
                "; caused by rank>1 atoms (family b: {high_rank_b:?}, family c: {high_rank_c:?})"
            ));
        } else if rows != cols {
            msg.push_str("; families have different atom counts");
        }
        if !bad_cols.is_empty() {
            let located: Vec<(usize, usize)> = bad_rows
                .iter()
                .flat_map(|&i| bad_cols.iter().map(move |&j| (i, j)))
                .collect();
            msg.push_str(&format!("; suspect entries {located:?}"));
        }
        Some(msg)
    };
    r.check_with("row_sums", worst(&row_dev), tol.stochastic, row_detail);
    r
}

/// Outcome counts of repeated, independently prepared measurements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    /// `counts[k]` is the number of trials answered by atom `k`.
    pub counts: Vec<u64>,
    pub n_trials: u64,
    pub seed: u64,
}

impl SampleRecord {
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.n_trials as f64)
            .collect()
    }
}

fn atom_probabilities(
    rho: &ComplexMatrix,
    atoms: &CompleteQuestionSet,
    tol: &Tolerances,
) -> Result<Vec<f64>> {
    atoms
        .atoms()
        .iter()
        .map(|a| {
            rho.same_dim(a)?;
            let p = (rho * a.as_matrix()).trace().re;
            if p < -tol.probability {
                Err(Error::ProbabilityOutOfRange { value: p })
            } else {
                Ok(p.max(0.0))
            }
        })
        .collect()
}

/// Inverse-CDF sampling of `n` outcomes.
fn draw_counts<R: Rng>(probs: &[f64], n: u64, rng: &mut R) -> Vec<u64> {
    let total: f64 = probs.iter().sum();
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p / total;
        cdf.push(acc);
    }
    // The last nonzero bucket absorbs rounding in the cumulative sum.
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..n {
        let u: f64 = rng.random();
        let k = cdf.partition_point(|&c| c <= u).min(last);
        counts[k] += 1;
    }
    counts
}

/// Samples `n` answers to the complete questions `atoms` from fresh copies of `rho`.
pub fn sample_answers(
    rho: &DensityMatrix,
    atoms: &CompleteQuestionSet,
    n: u64,
    seed: u64,
) -> Result<SampleRecord> {
    sample_answers_with(rho, atoms, n, seed, &Tolerances::default())
}

pub fn sample_answers_with(
    rho: &DensityMatrix,
    atoms: &CompleteQuestionSet,
    n: u64,
    seed: u64,
    tol: &Tolerances,
) -> Result<SampleRecord> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "number of trials must be positive".into(),
        ));
    }
    let probs = atom_probabilities(rho.as_matrix(), atoms, tol)?;
    let mut rng = random::rng_stream(seed, 0);
    Ok(SampleRecord {
        counts: draw_counts(&probs, n, &mut rng),
        n_trials: n,
        seed,
    })
}

/// Frequency estimate of [`transition_matrix`]: column `j` prepares the pure
/// state `Q_c^(j)` and measures family `b` `n_per_column` times, using
/// random stream `j` of `seed`.
pub fn empirical_transition(
    b: &CompleteQuestionSet,
    c: &CompleteQuestionSet,
    n_per_column: u64,
    seed: u64,
) -> Result<TransitionMatrix> {
    let tol = Tolerances::default();
    b.atoms()[0].same_dim(&c.atoms()[0])?;
    if n_per_column == 0 {
        return Err(Error::InvalidArgument(
            "samples per column must be positive".into(),
        ));
    }
    for (j, r) in c.ranks().into_iter().enumerate() {
        if r != 1 {
            return Err(Error::NonPureConditioning { atom: j, rank: r });
        }
    }
    let columns: Vec<Vec<u64>> = c
        .atoms()
        .par_iter()
        .enumerate()
        .map(|(j, atom)| {
            let state = atom.scale(C64::new(1.0 / atom.trace().re, 0.0));
            let probs = atom_probabilities(&state, b, &tol)?;
            let mut rng = random::rng_stream(seed, j as u64);
            Ok(draw_counts(&probs, n_per_column, &mut rng))
        })
        .collect::<Result<_>>()?;
    let p = DMatrix::from_fn(b.len(), c.len(), |i, j| {
        columns[j][i] as f64 / n_per_column as f64
    });
    Ok(TransitionMatrix {
        p,
        ranks_b: b.ranks(),
        ranks_c: c.ranks(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::QuestionFamily;
    use crate::matrix::{ProjectorMatrix, ONE, ZERO};

    fn mub_pair() -> (CompleteQuestionSet, CompleteQuestionSet) {
        let z = CompleteQuestionSet::computational(2);
        let x = CompleteQuestionSet::from_atoms(vec![
            ProjectorMatrix::from_ket(&[ONE, ONE]).unwrap(),
            ProjectorMatrix::from_ket(&[ONE, -ONE]).unwrap(),
        ])
        .unwrap();
        (z, x)
    }

    #[test]
    fn born_examples() {
        let q = Question::new(
            "q",
            ProjectorMatrix::new(ComplexMatrix::from_diagonal(&[1.0, 1.0, 0.0, 0.0])).unwrap(),
        );
        let p = born_probability(&DensityMatrix::maximally_mixed(4), &q).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        let e0 = Question::new("0", ProjectorMatrix::basis(2, 0));
        assert_eq!(
            born_probability(&DensityMatrix::pure(&[ONE, ZERO]).unwrap(), &e0).unwrap(),
            1.0
        );
        let rho =
            DensityMatrix::new(ComplexMatrix::from_diagonal(&[0.5, 1.0 / 3.0, 1.0 / 6.0])).unwrap();
        let e1 = Question::new("1", ProjectorMatrix::basis(3, 1));
        assert!((born_probability(&rho, &e1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            born_probability(&rho, &e0),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 2
            })
        );
    }

    #[test]
    fn transition_examples() {
        let (z, x) = mub_pair();
        let t = transition_matrix(&z, &z).unwrap();
        assert_eq!(t.p, DMatrix::identity(2, 2));
        let t = transition_matrix(&z, &x).unwrap();
        for v in t.p.iter() {
            assert!((v - 0.5).abs() < 1e-15);
        }
        assert!(verify_bistochastic(&t).passed());
    }

    #[test]
    fn rank_two_atom_breaks_row_sums() {
        let b = CompleteQuestionSet::computational(4);
        let c = CompleteQuestionSet::from_atoms(vec![
            ProjectorMatrix::new(ComplexMatrix::from_diagonal(&[1.0, 1.0, 0.0, 0.0])).unwrap(),
            ProjectorMatrix::basis(4, 2),
            ProjectorMatrix::basis(4, 3),
        ])
        .unwrap();
        let t = transition_matrix(&b, &c).unwrap();
        let r = verify_bistochastic(&t);
        assert!(r.get("column_sums").unwrap().passed);
        let rows = r.get("row_sums").unwrap();
        assert!(!rows.passed);
        assert!(rows.detail.as_deref().unwrap().contains("rank>1"));
    }

    #[test]
    fn corrupted_entry_is_located() {
        let (z, x) = mub_pair();
        let mut t = transition_matrix(&z, &x).unwrap();
        t.p[(1, 0)] += 0.1;
        let r = verify_bistochastic(&t);
        assert!(!r.passed());
        assert!(r
            .get("row_sums")
            .unwrap()
            .detail
            .as_deref()
            .unwrap()
            .contains("(1, 0)"));
        assert_eq!(
            r.get("column_sums").unwrap().detail.as_deref(),
            Some("columns [0]")
        );
    }

    #[test]
    fn sampling_examples() {
        let z = CompleteQuestionSet::computational(3);
        let rho = DensityMatrix::pure(&[ONE, ZERO, ZERO]).unwrap();
        let rec = sample_answers(&rho, &z, 1000, 5).unwrap();
        assert_eq!(rec.counts, vec![1000, 0, 0]);

        let z2 = CompleteQuestionSet::computational(2);
        let n = 100_000u64;
        let rec = sample_answers(&DensityMatrix::maximally_mixed(2), &z2, n, 9).unwrap();
        let bound = 4.0 * (n as f64 * 0.25).sqrt();
        for &c in &rec.counts {
            assert!((c as f64 - n as f64 / 2.0).abs() <= bound);
        }
        assert_eq!(rec.counts.iter().sum::<u64>(), n);
        assert_eq!(
            rec,
            sample_answers(&DensityMatrix::maximally_mixed(2), &z2, n, 9).unwrap()
        );
        assert!(sample_answers(&rho, &z2, 10, 0).is_err());
        assert!(sample_answers(&rho, &z, 0, 0).is_err());
    }

    #[test]
    fn empirical_examples() {
        let (z, x) = mub_pair();
        let t = empirical_transition(&z, &z, 1000, 3).unwrap();
        assert_eq!(t.p, DMatrix::identity(2, 2));
        let t = empirical_transition(&z, &x, 100_000, 3).unwrap();
        for v in t.p.iter() {
            assert!((v - 0.5).abs() < 0.01);
        }
        let c = CompleteQuestionSet::from_atoms(vec![
            ProjectorMatrix::new(ComplexMatrix::from_diagonal(&[1.0, 1.0, 0.0])).unwrap(),
            ProjectorMatrix::basis(3, 2),
        ])
        .unwrap();
        assert_eq!(
            empirical_transition(&CompleteQuestionSet::computational(3), &c, 10, 0),
            Err(Error::NonPureConditioning { atom: 0, rank: 2 })
        );
    }

    #[test]
    fn empirical_converges() {
        let mut rng = random::rng(21);
        let b = crate::lattice::complete_questions(&QuestionFamily::random_rank_one(2, &mut rng))
            .unwrap();
        let c = crate::lattice::complete_questions(&QuestionFamily::random_rank_one(2, &mut rng))
            .unwrap();
        let exact = transition_matrix(&b, &c).unwrap();
        let errs: Vec<f64> = [1_000u64, 10_000, 100_000]
            .iter()
            .map(|&n| {
                empirical_transition(&b, &c, n, 17)
                    .unwrap()
                    .max_dist(&exact)
            })
            .collect();
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        for (n, e) in [1_000f64, 10_000.0, 100_000.0].iter().zip(&errs) {
            assert!(*e <= 5.0 * ((16f64).ln() / (2.0 * n)).sqrt());
        }
    }
}
