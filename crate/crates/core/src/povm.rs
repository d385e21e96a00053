//! Measurements through an ancilla.
//!
//! A system `S` and ancilla `P` evolve jointly under `U`, after which a
//! projective measurement `{Π_b}` is made on the ancilla alone. The outcome
//! statistics on `S` are those of the effects
//!
//! ```text
//! E_b = Tr_P[(I ⊗ ρ_P) U† (I ⊗ Π_b) U]
//! ```
//!
//! which is the ordering forced by `P(b) = Tr[U (ρ_S ⊗ ρ_P) U† (I ⊗ Π_b)]`
//! and trace cyclicity. [`joint_probability`] evaluates that joint-space
//! trace directly and serves as the independent check on [`derive_povm`].
//! [`naimark_dilate`] goes the other way, from effects to an isometry.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    eigh, partial_trace, pauli, tensor_product, ComplexMatrix, DensityMatrix, HermitianMatrix,
    ProjectorMatrix, Subsystem, UnitaryMatrix, C64, ONE, ZERO,
};
use crate::random;
use crate::report::ValidationReport;
use crate::tolerance::Tolerances;

/// Joint unitary, ancilla state and ancilla measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AncillaModelFile", into = "AncillaModelFile")]
pub struct AncillaModel {
    ds: usize,
    dp: usize,
    u: UnitaryMatrix,
    rho_p: DensityMatrix,
    projectors_p: Vec<ProjectorMatrix>,
}

/// File layout of an [`AncillaModel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AncillaModelFile {
    #[serde(rename = "dS")]
    pub ds: usize,
    #[serde(rename = "dP")]
    pub dp: usize,
    #[serde(rename = "U")]
    pub u: UnitaryMatrix,
    #[serde(rename = "rho_P")]
    pub rho_p: DensityMatrix,
    #[serde(rename = "projectors_P")]
    pub projectors_p: Vec<ProjectorMatrix>,
}

impl TryFrom<AncillaModelFile> for AncillaModel {
    type Error = Error;
    fn try_from(f: AncillaModelFile) -> Result<Self> {
        AncillaModel::new(f.ds, f.dp, f.u, f.rho_p, f.projectors_p)
    }
}

impl From<AncillaModel> for AncillaModelFile {
    fn from(m: AncillaModel) -> Self {
        Self {
            ds: m.ds,
            dp: m.dp,
            u: m.u,
            rho_p: m.rho_p,
            projectors_p: m.projectors_p,
        }
    }
}

impl AncillaModel {
    pub fn new(
        ds: usize,
        dp: usize,
        u: UnitaryMatrix,
        rho_p: DensityMatrix,
        projectors_p: Vec<ProjectorMatrix>,
    ) -> Result<Self> {
        if ds == 0 || dp == 0 {
            return Err(Error::InvalidArgument(
                "subsystem dimensions must be positive".into(),
            ));
        }
        if u.dim() != ds * dp {
            return Err(Error::DimensionMismatch {
                expected: ds * dp,
                found: u.dim(),
            });
        }
        if rho_p.dim() != dp {
            return Err(Error::DimensionMismatch {
                expected: dp,
                found: rho_p.dim(),
            });
        }
        check_resolution(&projectors_p, dp, &Tolerances::default())?;
        Ok(Self {
            ds,
            dp,
            u,
            rho_p,
            projectors_p,
        })
    }

    /// Haar-random `U`, Hilbert-Schmidt random `ρ_P`, random rank-1 ancilla frame.
    pub fn random<R: Rng + ?Sized>(ds: usize, dp: usize, rng: &mut R) -> Self {
        let u = random::unitary(ds * dp, rng);
        let rho_p = random::density(dp, rng);
        let projectors_p = random::rank_one_frame(dp, rng);
        Self::new(ds, dp, u, rho_p, projectors_p).expect("random model is valid")
    }

    pub fn ds(&self) -> usize {
        self.ds
    }

    pub fn dp(&self) -> usize {
        self.dp
    }

    pub fn unitary(&self) -> &UnitaryMatrix {
        &self.u
    }

    pub fn rho_p(&self) -> &DensityMatrix {
        &self.rho_p
    }

    pub fn projectors_p(&self) -> &[ProjectorMatrix] {
        &self.projectors_p
    }

    pub fn outcomes(&self) -> usize {
        self.projectors_p.len()
    }
}

pub(crate) fn check_resolution(
    projectors: &[ProjectorMatrix],
    dim: usize,
    tol: &Tolerances,
) -> Result<()> {
    if projectors.is_empty() {
        return Err(Error::NotResolution("no projectors".into()));
    }
    let mut sum = ComplexMatrix::zeros(dim);
    for (i, p) in projectors.iter().enumerate() {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        sum = &sum + p.as_matrix();
        for (j, q) in projectors.iter().enumerate().skip(i + 1) {
            let overlap = (p.as_matrix() * q.as_matrix()).max_norm();
            if !(overlap <= tol.closure) {
                return Err(Error::NotResolution(format!(
                    "projectors {i} and {j} overlap by {overlap:.3e}"
                )));
            }
        }
    }
    let dev = sum.max_dist(&ComplexMatrix::identity(dim));
    if !(dev <= tol.closure) {
        return Err(Error::NotResolution(format!(
            "sum deviates from I by {dev:.3e}"
        )));
    }
    Ok(())
}

/// Effects `E_b` on one space. Construction only checks shape; use
/// [`verify_povm`] for positivity and closure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EffectList {
    effects: Vec<HermitianMatrix>,
}

impl EffectList {
    pub fn new(effects: Vec<HermitianMatrix>) -> Result<Self> {
        let first = effects
            .first()
            .ok_or_else(|| Error::InvalidPovm("no effects".into()))?;
        let d = first.dim();
        for e in &effects {
            if e.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: e.dim(),
                });
            }
        }
        Ok(Self { effects })
    }

    pub fn from_projectors(projectors: Vec<ProjectorMatrix>) -> Result<Self> {
        Self::new(projectors.into_iter().map(HermitianMatrix::from).collect())
    }

    pub fn effects(&self) -> &[HermitianMatrix] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    /// `Tr(ρ E_b)` for every outcome.
    pub fn probabilities(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        rho.same_dim(&self.effects[0])?;
        Ok(self
            .effects
            .iter()
            .map(|e| (rho.as_matrix() * e.as_matrix()).trace().re)
            .collect())
    }

    /// `max_b ‖E_b - F_b‖` against another list of the same length.
    pub fn max_dist(&self, other: &EffectList) -> f64 {
        assert_eq!(self.len(), other.len(), "effect lists differ in length");
        self.effects
            .iter()
            .zip(&other.effects)
            .map(|(a, b)| a.max_dist(b))
            .fold(0.0, f64::max)
    }
}

/// The symmetric informationally complete qubit POVM `(I + n_k·σ)/4` over
/// the vertices of a regular tetrahedron.
pub fn tetrahedral_qubit_povm() -> EffectList {
    let s2 = 2f64.sqrt();
    let dirs = [
        [0.0, 0.0, 1.0],
        [2.0 * s2 / 3.0, 0.0, -1.0 / 3.0],
        [-s2 / 3.0, (2.0f64 / 3.0).sqrt(), -1.0 / 3.0],
        [-s2 / 3.0, -(2.0f64 / 3.0).sqrt(), -1.0 / 3.0],
    ];
    EffectList::new(
        dirs.iter()
            .map(|&n| HermitianMatrix::new_unchecked(pauli::bloch_operator(n, 0.25)))
            .collect(),
    )
    .unwrap()
}

/// Effects of the ancilla model.
pub fn derive_povm(m: &AncillaModel) -> Result<EffectList> {
    derive_povm_with(m, &Tolerances::default())
}

pub fn derive_povm_with(m: &AncillaModel, tol: &Tolerances) -> Result<EffectList> {
    let id_s = ComplexMatrix::identity(m.ds);
    let weight = tensor_product(&id_s, &m.rho_p);
    let u = m.u.as_matrix();
    let u_dag = u.adjoint();
    let effects = m
        .projectors_p
        .iter()
        .map(|pi| {
            let heisenberg = &(&u_dag * &tensor_product(&id_s, pi)) * u;
            let e = partial_trace(&(&weight * &heisenberg), m.ds, m.dp, Subsystem::P)?;
            Ok(HermitianMatrix::new_unchecked(e.hermitian_part()))
        })
        .collect::<Result<Vec<_>>>()?;
    let list = EffectList::new(effects)?;
    let report = verify_povm_with(&list, tol);
    if let Some(bad) = report.failures().next() {
        return Err(Error::InvariantViolation(format!(
            "{} deviates by {:.3e}",
            bad.name, bad.deviation
        )));
    }
    Ok(list)
}

/// `Tr[U (ρ_S ⊗ ρ_P) U† (I ⊗ Π_b)]`, evaluated on the joint space.
pub fn joint_probability(rho_s: &DensityMatrix, m: &AncillaModel, b: usize) -> Result<f64> {
    if rho_s.dim() != m.ds {
        return Err(Error::DimensionMismatch {
            expected: m.ds,
            found: rho_s.dim(),
        });
    }
    let pi = m.projectors_p.get(b).ok_or(Error::IndexOutOfRange {
        index: b,
        len: m.projectors_p.len(),
    })?;
    let joint = tensor_product(rho_s, &m.rho_p).conjugate_by(&m.u);
    let meas = tensor_product(&ComplexMatrix::identity(m.ds), pi);
    Ok((&joint * &meas).trace().re)
}

/// Positivity, closure and (informational) pairwise orthogonality of effects.
pub fn verify_povm(e: &EffectList) -> ValidationReport {
    verify_povm_with(e, &Tolerances::default())
}

pub fn verify_povm_with(e: &EffectList, tol: &Tolerances) -> ValidationReport {
    let mut r = ValidationReport::new();
    let d = e.dim();

    let mins: Vec<f64> = e.effects.iter().map(|x| eigh(x).min()).collect();
    let worst = mins.iter().copied().fold(f64::INFINITY, f64::min);
    let negative: Vec<usize> = (0..mins.len())
        .filter(|&k| !(-mins[k] <= tol.psd))
        .collect();
    r.check_with(
        "positive_semidefinite",
        (-worst).max(0.0),
        tol.psd,
        (!negative.is_empty()).then(|| format!("effects {negative:?} have negative eigenvalues")),
    );
    r.note(format!(
        "psd margins (min eigenvalue per effect): {}",
        mins.iter()
            .map(|m| format!("{m:.3e}"))
            .collect::<Vec<_>>()
            .join(", ")
    ));

    let sum = e
        .effects
        .iter()
        .fold(ComplexMatrix::zeros(d), |acc, x| &acc + x.as_matrix());
    let diff = &sum - &ComplexMatrix::identity(d);
    let mut worst_at = (0, 0);
    let mut closure: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let v = diff.get(i, j).norm();
            if v > closure {
                closure = v;
                worst_at = (i, j);
            }
        }
    }
    r.check_with(
        "closure",
        closure,
        tol.closure,
        (!(closure <= tol.closure)).then(|| {
            format!(
                "sum of effects deviates from I at entry {worst_at:?} (value {:.6})",
                sum.get(worst_at.0, worst_at.1)
            )
        }),
    );

    let mut non_orthogonal = Vec::new();
    for a in 0..e.len() {
        for b in (a + 1)..e.len() {
            let overlap = (e.effects[a].as_matrix() * e.effects[b].as_matrix()).max_norm();
            if overlap > tol.closure {
                non_orthogonal.push(format!("({a}, {b}): {overlap:.3e}"));
            }
        }
    }
    if non_orthogonal.is_empty() {
        r.note("all effect pairs are mutually orthogonal");
    } else {
        r.note(format!(
            "non-orthogonal effect pairs {}",
            non_orthogonal.join("; ")
        ));
    }
    r
}

/// `V = Σ_b √E_b ⊗ |b⟩` with the ancilla measurement `I ⊗ |b⟩⟨b|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaimarkDilation {
    /// `(dS·m) × dS` isometry, rows indexed system-major.
    #[serde(with = "complex_rows")]
    pub isometry: DMatrix<C64>,
    pub system_dim: usize,
    pub ancilla_dim: usize,
    pub projectors: Vec<ProjectorMatrix>,
}

impl NaimarkDilation {
    /// `‖V†V - I‖_max`.
    pub fn isometry_deviation(&self) -> f64 {
        let g = self.isometry.adjoint() * &self.isometry;
        let id = DMatrix::<C64>::identity(self.system_dim, self.system_dim);
        (g - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `Tr(V ρ V† (I ⊗ |b⟩⟨b|))`.
    pub fn probability(&self, rho: &DensityMatrix, b: usize) -> Result<f64> {
        if rho.dim() != self.system_dim {
            return Err(Error::DimensionMismatch {
                expected: self.system_dim,
                found: rho.dim(),
            });
        }
        let p = self.projectors.get(b).ok_or(Error::IndexOutOfRange {
            index: b,
            len: self.projectors.len(),
        })?;
        let v = &self.isometry;
        let dilated = v * rho.as_matrix().as_inner() * v.adjoint();
        Ok((dilated * p.as_matrix().as_inner()).trace().re)
    }

    /// Unitary `W` on `C^dS ⊗ C^m` with `W(|ψ⟩ ⊗ |0⟩) = V|ψ⟩`; the other
    /// columns complete an orthonormal basis.
    pub fn unitary_completion(&self) -> UnitaryMatrix {
        let (ds, m) = (self.system_dim, self.ancilla_dim);
        let n = ds * m;
        let mut columns: Vec<Option<Vec<C64>>> = vec![None; n];
        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(n);
        for j in 0..ds {
            let col: Vec<C64> = self.isometry.column(j).iter().copied().collect();
            columns[j * m] = Some(col.clone());
            basis.push(col);
        }
        let free_slots: Vec<usize> = (0..n).filter(|k| columns[*k].is_none()).collect();
        let mut free = free_slots.into_iter();
        for e in 0..n {
            if basis.len() == n {
                break;
            }
            let mut w = vec![ZERO; n];
            w[e] = ONE;
            for _ in 0..2 {
                for b in &basis {
                    let overlap: C64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                    for (wi, bi) in w.iter_mut().zip(b) {
                        *wi -= overlap * bi;
                    }
                }
            }
            let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                let w: Vec<C64> = w.into_iter().map(|z| z / norm).collect();
                let slot = free.next().expect("free column available");
                columns[slot] = Some(w.clone());
                basis.push(w);
            }
        }
        let cols: Vec<Vec<C64>> = columns
            .into_iter()
            .map(|c| c.expect("completed column"))
            .collect();
        let u = DMatrix::from_fn(n, n, |i, j| cols[j][i]);
        UnitaryMatrix::new_unchecked(ComplexMatrix::wrap(u))
    }

    /// Ancilla model realizing the dilation: `U` = [`Self::unitary_completion`],
    /// `ρ_P = |0⟩⟨0|`, computational ancilla projectors.
    pub fn ancilla_model(&self) -> AncillaModel {
        let m = self.ancilla_dim;
        AncillaModel::new(
            self.system_dim,
            m,
            self.unitary_completion(),
            DensityMatrix::new_unchecked(ComplexMatrix::basis_projector(m, 0)),
            (0..m).map(|b| ProjectorMatrix::basis(m, b)).collect(),
        )
        .expect("completion is a valid model")
    }
}

/// Dilates a POVM into a projective measurement on `S ⊗ C^m`.
pub fn naimark_dilate(e: &EffectList) -> Result<NaimarkDilation> {
    naimark_dilate_with(e, &Tolerances::default())
}

pub fn naimark_dilate_with(e: &EffectList, tol: &Tolerances) -> Result<NaimarkDilation> {
    let report = verify_povm_with(e, tol);
    if let Some(bad) = report.failures().next() {
        return Err(Error::InvalidPovm(format!(
            "{} deviates by {:.3e}",
            bad.name, bad.deviation
        )));
    }
    let ds = e.dim();
    let m = e.len();
    let roots: Vec<ComplexMatrix> = e
        .effects
        .iter()
        .map(|x| eigh(x).map(|l| C64::new(l.max(0.0).sqrt(), 0.0)))
        .collect();
    let isometry = DMatrix::from_fn(ds * m, ds, |row, j| {
        let (i, b) = (row / m, row % m);
        roots[b].get(i, j)
    });
    let id = ComplexMatrix::identity(ds);
    let projectors = (0..m)
        .map(|b| {
            ProjectorMatrix::new_unchecked(tensor_product(
                &id,
                &ComplexMatrix::basis_projector(m, b),
            ))
        })
        .collect();
    Ok(NaimarkDilation {
        isometry,
        system_dim: ds,
        ancilla_dim: m,
        projectors,
    })
}

/// Rectangular complex matrices as row-major nested `[re, im]` arrays.
mod complex_rows {
    use nalgebra::DMatrix;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::matrix::C64;

    pub fn serialize<S: Serializer>(m: &DMatrix<C64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = m
            .row_iter()
            .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<C64>, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != m) {
            return Err(serde::de::Error::custom("ragged matrix rows"));
        }
        Ok(DMatrix::from_fn(n, m, |i, j| {
            C64::new(rows[i][j][0], rows[i][j][1])
        }))
    }
}
