//! Yes-no questions as a lattice of projectors.
//!
//! A [`Question`] is a projector; the lattice operations are the subspace
//! operations: negation is the orthocomplement, meet the intersection of
//! ranges, join the closed span. A [`QuestionFamily`] of `N` commuting
//! questions yields `2^N` complete questions (atoms), which generate a
//! Boolean algebra inside the (generally non-distributive) lattice.
//!
//! Atom numbering: atom `k` (0-based) corresponds to the binary expansion
//! of `k` over `N` bits, most significant bit first, so the least
//! significant bit answers the last question of the family. Bit `1` selects
//! `Q`, bit `0` selects `¬Q`.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    eigh, from_hermitian_coordinates, hermitian_basis, real_null_space, ComplexMatrix,
    ProjectorMatrix, C64,
};
use crate::random;
use crate::tolerance::Tolerances;

/// A yes-no question: a labelled projector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub label: String,
    pub projector: ProjectorMatrix,
}

impl Question {
    pub fn new(label: impl Into<String>, projector: ProjectorMatrix) -> Self {
        Self {
            label: label.into(),
            projector,
        }
    }

    /// The always-false question `Q₀`.
    pub fn never(dim: usize) -> Self {
        Self::new("Q0", ProjectorMatrix::zero(dim))
    }

    /// The always-true question `Q∞`.
    pub fn always(dim: usize) -> Self {
        Self::new("Qinf", ProjectorMatrix::identity(dim))
    }

    pub fn from_ket(label: impl Into<String>, v: &[C64]) -> Result<Self> {
        Ok(Self::new(label, ProjectorMatrix::from_ket(v)?))
    }

    pub fn dim(&self) -> usize {
        self.projector.dim()
    }

    pub fn rank(&self) -> usize {
        self.projector.rank()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.projector.as_matrix()
    }

    /// `¬Q`, the projector `I - P`.
    pub fn negation(&self) -> Question {
        Question::new(format!("¬{}", self.label), self.projector.complement())
    }

    /// `Q₁ ∧ Q₂`: projector onto the intersection of the ranges.
    pub fn meet(&self, other: &Question) -> Question {
        self.meet_with(other, &Tolerances::default())
    }

    pub fn meet_with(&self, other: &Question, tol: &Tolerances) -> Question {
        assert_same_space(self, other);
        // range(P₁) ∩ range(P₂) is the kernel of (I - P₁) + (I - P₂).
        let d = self.dim();
        let two = ComplexMatrix::identity(d).scale(C64::new(2.0, 0.0));
        let sum = &(&two - self.matrix()) - other.matrix();
        let cutoff = tol.subspace;
        let p = eigh(&sum).spectral_projector(|l| l < cutoff);
        Question::new(
            format!("({} ∧ {})", self.label, other.label),
            ProjectorMatrix::new_unchecked(p),
        )
    }

    /// `Q₁ ∨ Q₂ = ¬(¬Q₁ ∧ ¬Q₂)`.
    pub fn join(&self, other: &Question) -> Question {
        self.join_with(other, &Tolerances::default())
    }

    pub fn join_with(&self, other: &Question, tol: &Tolerances) -> Question {
        let m = self.negation().meet_with(&other.negation(), tol);
        Question::new(
            format!("({} ∨ {})", self.label, other.label),
            m.projector.complement(),
        )
    }

    /// `Q₁ ⇒ Q₂`: `range(P₁) ⊆ range(P₂)`, tested as `‖P₂P₁ - P₁‖ ≤ tol`.
    pub fn implies(&self, other: &Question) -> bool {
        self.implies_with(other, &Tolerances::default())
    }

    pub fn implies_with(&self, other: &Question, tol: &Tolerances) -> bool {
        assert_same_space(self, other);
        (other.matrix() * self.matrix()).max_dist(self.matrix()) <= tol.subspace
    }

    /// `Q₁ ⊥ Q₂`, i.e. `‖P₁P₂‖ ≤ tol`.
    pub fn is_orthogonal(&self, other: &Question) -> bool {
        self.is_orthogonal_with(other, &Tolerances::default())
    }

    pub fn is_orthogonal_with(&self, other: &Question, tol: &Tolerances) -> bool {
        assert_same_space(self, other);
        (self.matrix() * other.matrix()).max_norm() <= tol.subspace
    }

    /// Same subspace, labels ignored.
    pub fn same_as(&self, other: &Question, tol: f64) -> bool {
        self.dim() == other.dim() && self.matrix().max_dist(other.matrix()) <= tol
    }
}

fn assert_same_space(a: &Question, b: &Question) {
    assert_eq!(
        a.dim(),
        b.dim(),
        "questions `{}` and `{}` act on different spaces",
        a.label,
        b.label
    );
}

/// Joint answers `[e₁, …, e_N]` to a family of questions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnswerString {
    pub bits: Vec<bool>,
}

impl AnswerString {
    /// Answers selected by atom `index` (0-based) of an `n`-question family.
    pub fn from_atom_index(index: usize, n: usize) -> Self {
        Self {
            bits: (0..n).map(|a| (index >> (n - 1 - a)) & 1 == 1).collect(),
        }
    }

    pub fn atom_index(&self) -> usize {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// An ordered set of pairwise commuting questions on one space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionFamily {
    questions: Vec<Question>,
    dim: usize,
}

impl QuestionFamily {
    pub fn new(questions: Vec<Question>) -> Result<Self> {
        Self::new_with(questions, &Tolerances::default())
    }

    pub fn new_with(questions: Vec<Question>, tol: &Tolerances) -> Result<Self> {
        let first = questions
            .first()
            .ok_or_else(|| Error::InvalidArgument("a family needs at least one question".into()))?;
        let dim = first.dim();
        for q in &questions {
            if q.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: q.dim(),
                });
            }
        }
        for a in 0..questions.len() {
            for b in (a + 1)..questions.len() {
                let deviation = questions[a]
                    .matrix()
                    .commutator(questions[b].matrix())
                    .max_norm();
                if !(deviation <= tol.closure) {
                    return Err(Error::NonCommutingFamily { a, b, deviation });
                }
            }
        }
        Ok(Self { questions, dim })
    }

    pub fn questions(&self) -> &[Question] {
        &self.questions
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.questions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.questions.is_empty()
    }

    /// Family of `|k⟩⟨k|`-type questions whose atoms are the rank-1
    /// projectors onto the columns of `frame` (a unitary of dimension `2^n`).
    pub fn from_frame(frame: &ComplexMatrix) -> Result<Self> {
        let d = frame.dim();
        if !d.is_power_of_two() || d < 2 {
            return Err(Error::InvalidArgument(format!(
                "frame dimension {d} is not a power of two ≥ 2"
            )));
        }
        let n = d.trailing_zeros() as usize;
        let columns: Vec<Vec<C64>> = (0..d)
            .map(|j| (0..d).map(|i| frame.get(i, j)).collect())
            .collect();
        let questions = (0..n)
            .map(|a| {
                // Question a answers "yes" on columns whose index has bit a set.
                let selected: Vec<Vec<C64>> = columns
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| AnswerString::from_atom_index(*k, n).bits[a])
                    .map(|(_, v)| v.clone())
                    .collect();
                ProjectorMatrix::onto_span(d, &selected)
                    .map(|p| Question::new(format!("q{}", a + 1), p))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(questions)
    }

    /// Seeded random family with `d = 2^n` and rank-1 atoms.
    pub fn random_rank_one<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let u = random::unitary(1 << n, rng);
        Self::from_frame(&u).expect("unitary frame yields a valid family")
    }
}

/// The `2^N` complete questions of a family: pairwise orthogonal, summing to `I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompleteQuestionSet {
    atoms: Vec<ProjectorMatrix>,
}

impl CompleteQuestionSet {
    /// Wraps an explicit resolution of the identity (any number of atoms).
    pub fn from_atoms(atoms: Vec<ProjectorMatrix>) -> Result<Self> {
        Self::from_atoms_with(atoms, &Tolerances::default())
    }

    pub fn from_atoms_with(atoms: Vec<ProjectorMatrix>, tol: &Tolerances) -> Result<Self> {
        let first = atoms
            .first()
            .ok_or_else(|| Error::NotResolution("no atoms".into()))?;
        let d = first.dim();
        let mut sum = ComplexMatrix::zeros(d);
        for (i, a) in atoms.iter().enumerate() {
            if a.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: a.dim(),
                });
            }
            if a.rank() == 0 {
                return Err(Error::IncompleteFamily { atom: i });
            }
            sum = &sum + a.as_matrix();
            for (j, b) in atoms.iter().enumerate().skip(i + 1) {
                let overlap = (a.as_matrix() * b.as_matrix()).max_norm();
                if !(overlap <= tol.closure) {
                    return Err(Error::NotResolution(format!(
                        "atoms {i} and {j} overlap by {overlap:.3e}"
                    )));
                }
            }
        }
        let dev = sum.max_dist(&ComplexMatrix::identity(d));
        if !(dev <= tol.closure) {
            return Err(Error::NotResolution(format!(
                "atoms sum to I only within {dev:.3e}"
            )));
        }
        Ok(Self { atoms })
    }

    /// Rank-1 atoms onto the columns of a unitary frame.
    pub fn from_frame(frame: &ComplexMatrix) -> Result<Self> {
        let d = frame.dim();
        let atoms = (0..d)
            .map(|j| {
                let v: Vec<C64> = (0..d).map(|i| frame.get(i, j)).collect();
                ProjectorMatrix::from_ket(&v)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_atoms(atoms)
    }

    pub fn computational(dim: usize) -> Self {
        Self {
            atoms: (0..dim).map(|k| ProjectorMatrix::basis(dim, k)).collect(),
        }
    }

    pub fn atoms(&self) -> &[ProjectorMatrix] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].dim()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.atoms.iter().map(|a| a.rank()).collect()
    }

    pub fn all_rank_one(&self) -> bool {
        self.atoms.iter().all(|a| a.rank() == 1)
    }
}

/// Builds the complete questions `Q_c^(k)` of a family.
///
/// Fails with [`Error::IncompleteFamily`] if any conjunction is the zero
/// projector (the answers are not independent, e.g. `d < 2^N`).
pub fn complete_questions(family: &QuestionFamily) -> Result<CompleteQuestionSet> {
    complete_questions_with(family, &Tolerances::default())
}

pub fn complete_questions_with(
    family: &QuestionFamily,
    tol: &Tolerances,
) -> Result<CompleteQuestionSet> {
    // Re-check commutation: families can be deserialized without `new`.
    let family = QuestionFamily::new_with(family.questions.clone(), tol)?;
    let n = family.len();
    if n >= usize::BITS as usize - 1 {
        return Err(Error::InvalidArgument(format!("{n} questions is too many")));
    }
    let d = family.dim();
    let mut atoms = Vec::with_capacity(1 << n);
    for k in 0..(1usize << n) {
        let answers = AnswerString::from_atom_index(k, n);
        let mut product = ComplexMatrix::identity(d);
        for (q, &yes) in family.questions.iter().zip(&answers.bits) {
            let factor = if yes {
                q.projector.clone()
            } else {
                q.projector.complement()
            };
            product = &product * factor.as_matrix();
        }
        let product = product.hermitian_part();
        if product.trace().re < 0.5 {
            return Err(Error::IncompleteFamily { atom: k });
        }
        atoms.push(ProjectorMatrix::new_unchecked(product));
    }
    CompleteQuestionSet::from_atoms_with(atoms, tol)
}

/// Largest atom count for which the Boolean algebra is enumerated.
pub const BOOLEAN_ALGEBRA_ATOM_LIMIT: usize = 8;

/// All `2^(#atoms)` unions of atoms. Element `mask` is the sum of the atoms
/// whose bit is set in `mask`, so element 0 is `Q₀` and the last is `Q∞`.
pub fn boolean_algebra_from_atoms(atoms: &CompleteQuestionSet) -> Result<Vec<Question>> {
    let m = atoms.len();
    if m > BOOLEAN_ALGEBRA_ATOM_LIMIT {
        return Err(Error::SizeLimit {
            atoms: m,
            limit: BOOLEAN_ALGEBRA_ATOM_LIMIT,
        });
    }
    let d = atoms.dim();
    Ok((0..(1usize << m))
        .map(|mask| {
            let mut sum = ComplexMatrix::zeros(d);
            let mut members = Vec::new();
            for (i, a) in atoms.atoms().iter().enumerate() {
                if mask >> i & 1 == 1 {
                    sum = &sum + a.as_matrix();
                    members.push((i + 1).to_string());
                }
            }
            Question::new(
                format!("{{{}}}", members.join(",")),
                ProjectorMatrix::new_unchecked(sum),
            )
        })
        .collect())
}

/// Pairwise order relations among a list of questions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationTable {
    pub implies: Vec<Vec<bool>>,
    pub orthogonal: Vec<Vec<bool>>,
    pub meet_rank: Vec<Vec<usize>>,
}

impl RelationTable {
    pub fn of(questions: &[Question], tol: &Tolerances) -> Self {
        let table = |f: &dyn Fn(&Question, &Question) -> bool| -> Vec<Vec<bool>> {
            questions
                .iter()
                .map(|a| questions.iter().map(|b| f(a, b)).collect())
                .collect()
        };
        Self {
            implies: table(&|a, b| a.implies_with(b, tol)),
            orthogonal: table(&|a, b| a.is_orthogonal_with(b, tol)),
            meet_rank: questions
                .iter()
                .map(|a| {
                    questions
                        .iter()
                        .map(|b| a.meet_with(b, tol).rank())
                        .collect()
                })
                .collect(),
        }
    }

    /// Number of entries that differ between two tables of the same size.
    pub fn mismatches(&self, other: &RelationTable) -> usize {
        fn count<T: PartialEq>(a: &[Vec<T>], b: &[Vec<T>]) -> usize {
            a.iter()
                .zip(b)
                .map(|(x, y)| x.iter().zip(y).filter(|(u, v)| u != v).count())
                .sum()
        }
        count(&self.implies, &other.implies)
            + count(&self.orthogonal, &other.orthogonal)
            + count(&self.meet_rank, &other.meet_rank)
    }
}

/// Result of [`check_orthomodular`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeReport {
    pub elements: usize,
    /// Indices of elements whose negation is not in the set.
    pub missing_negations: Vec<usize>,
    pub comparable_pairs: usize,
    /// Pairs `(a, b)` with `a ⇒ b` but `b ≠ a ∨ (b ∧ ¬a)`.
    pub orthomodular_violations: Vec<(usize, usize)>,
    pub max_orthomodular_deviation: f64,
    /// Triples with `a ∧ (b ∨ c) ≠ (a ∧ b) ∨ (a ∧ c)`.
    pub distributivity_violations: Vec<(usize, usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LatticeStatus {
    Orthomodular,
    NotClosed,
    Violated,
}

impl LatticeReport {
    pub fn closed_under_negation(&self) -> bool {
        self.missing_negations.is_empty()
    }

    pub fn is_distributive(&self) -> bool {
        self.distributivity_violations.is_empty()
    }

    pub fn status(&self) -> LatticeStatus {
        if !self.closed_under_negation() {
            LatticeStatus::NotClosed
        } else if !self.orthomodular_violations.is_empty() {
            LatticeStatus::Violated
        } else {
            LatticeStatus::Orthomodular
        }
    }
}

/// Checks the orthomodular law on every comparable pair and distributivity
/// on every ordered triple of `elements`.
pub fn check_orthomodular(elements: &[Question]) -> LatticeReport {
    check_orthomodular_with(elements, &Tolerances::default())
}

pub fn check_orthomodular_with(elements: &[Question], tol: &Tolerances) -> LatticeReport {
    let n = elements.len();
    let eps = tol.subspace;
    let missing_negations = elements
        .iter()
        .enumerate()
        .filter(|(_, q)| {
            let neg = q.negation();
            !elements.iter().any(|e| e.same_as(&neg, eps))
        })
        .map(|(i, _)| i)
        .collect();

    let mut comparable_pairs = 0;
    let mut orthomodular_violations = Vec::new();
    let mut max_dev: f64 = 0.0;
    for (i, a) in elements.iter().enumerate() {
        for (j, b) in elements.iter().enumerate() {
            if !a.implies_with(b, tol) {
                continue;
            }
            comparable_pairs += 1;
            let rebuilt = a.join_with(&b.meet_with(&a.negation(), tol), tol);
            let dev = rebuilt.matrix().max_dist(b.matrix());
            max_dev = max_dev.max(dev);
            if !(dev <= eps) {
                orthomodular_violations.push((i, j));
            }
        }
    }

    let meets: Vec<Vec<Question>> = elements
        .iter()
        .map(|a| elements.iter().map(|b| a.meet_with(b, tol)).collect())
        .collect();
    let joins: Vec<Vec<Question>> = elements
        .iter()
        .map(|a| elements.iter().map(|b| a.join_with(b, tol)).collect())
        .collect();
    let mut distributivity_violations = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let lhs = elements[a].meet_with(&joins[b][c], tol);
                let rhs = meets[a][b].join_with(&meets[a][c], tol);
                if !lhs.same_as(&rhs, eps) {
                    distributivity_violations.push((a, b, c));
                }
            }
        }
    }

    LatticeReport {
        elements: n,
        missing_negations,
        comparable_pairs,
        orthomodular_violations,
        max_orthomodular_deviation: max_dev,
        distributivity_violations,
    }
}

/// Hermitian basis of `{X = X† : [X, A] = 0 for every generator A}`.
pub fn commutant_basis(generators: &[&ComplexMatrix], dim: usize) -> Vec<ComplexMatrix> {
    let basis = hermitian_basis(dim);
    let d2 = dim * dim;
    let rows = 2 * d2 * generators.len().max(1);
    let mut system = DMatrix::<f64>::zeros(rows, d2);
    for (g, a) in generators.iter().enumerate() {
        for (k, gk) in basis.iter().enumerate() {
            let c = gk.commutator(a);
            for i in 0..dim {
                for j in 0..dim {
                    let row = 2 * (g * d2 + i * dim + j);
                    system[(row, k)] = c.get(i, j).re;
                    system[(row + 1, k)] = c.get(i, j).im;
                }
            }
        }
    }
    let (null, _) = real_null_space(&system, 1e-9);
    null.iter()
        .map(|x| from_hermitian_coordinates(x, &basis))
        .collect()
}

/// Seed of the random central element used by [`superselection_sectors`].
pub const SECTOR_SEED: u64 = 0x5EC7_0125;

/// Minimal central projectors of the *-algebra generated by `questions`
/// (together with the identity). One sector means the algebra is a full
/// matrix algebra; several sectors mean superselection rules.
pub fn superselection_sectors(questions: &[Question]) -> Result<Vec<ProjectorMatrix>> {
    superselection_sectors_with(questions, &Tolerances::default(), SECTOR_SEED)
}

pub fn superselection_sectors_with(
    questions: &[Question],
    tol: &Tolerances,
    seed: u64,
) -> Result<Vec<ProjectorMatrix>> {
    let first = questions
        .first()
        .ok_or_else(|| Error::InvalidArgument("need at least one question".into()))?;
    let dim = first.dim();
    for q in questions {
        if q.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: q.dim(),
            });
        }
    }
    let gens: Vec<&ComplexMatrix> = questions.iter().map(|q| q.matrix()).collect();
    let commutant = commutant_basis(&gens, dim);
    // The generators are self-adjoint, so the center of the generated
    // algebra is the commutant of (generators ∪ commutant).
    let mut all = gens.clone();
    all.extend(commutant.iter());
    let center = commutant_basis(&all, dim);

    let mut rng = random::rng(seed);
    let mut z = ComplexMatrix::zeros(dim);
    for c in &center {
        let w: f64 = rng.random_range(-1.0..1.0);
        z = &z + &c.scale(C64::new(w, 0.0));
    }
    let eig = eigh(&z);
    let mut sectors = Vec::new();
    let mut start = 0;
    for k in 1..=dim {
        if k == dim || eig.values[k] - eig.values[k - 1] > tol.sector_cluster {
            let (lo, hi) = (eig.values[start], eig.values[k - 1]);
            let p = eig.spectral_projector(|l| {
                l >= lo - tol.sector_cluster / 2.0 && l <= hi + tol.sector_cluster / 2.0
            });
            sectors.push(ProjectorMatrix::new_unchecked(p.hermitian_part()));
            start = k;
        }
    }
    Ok(sectors)
}
