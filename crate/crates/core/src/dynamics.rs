//! Time evolution generated by a Hamiltonian (`ħ = 1`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Question;
use crate::matrix::{
    eigh, mat_exp_hermitian_with, ComplexMatrix, DensityMatrix, HermitianMatrix, ProjectorMatrix,
    UnitaryMatrix, C64,
};
use crate::report::ValidationReport;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    pub h: HermitianMatrix,
    #[serde(default)]
    pub label: String,
}

impl Hamiltonian {
    pub fn new(h: HermitianMatrix) -> Self {
        Self {
            h,
            label: String::new(),
        }
    }

    pub fn from_matrix(m: ComplexMatrix) -> Result<Self> {
        HermitianMatrix::new(m).map(Self::new)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }
}

/// `U(t) = exp(-i t H)` together with its time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Propagator {
    pub u: UnitaryMatrix,
    pub t: f64,
}

impl Propagator {
    pub fn identity(dim: usize, t: f64) -> Self {
        Self {
            u: UnitaryMatrix::identity(dim),
            t,
        }
    }

    pub fn dim(&self) -> usize {
        self.u.dim()
    }
}

pub fn propagator(h: &Hamiltonian, t: f64) -> Result<Propagator> {
    let u = mat_exp_hermitian_with(&h.h, t, &Tolerances::default())?;
    Ok(Propagator { u, t })
}

/// Heisenberg-picture question `U P U†`.
pub fn evolve_question(q: &Question, p: &Propagator) -> Result<Question> {
    q.matrix().same_dim(&p.u)?;
    let m = q.matrix().conjugate_by(&p.u).hermitian_part();
    Ok(Question::new(
        format!("{}(t+{})", q.label, p.t),
        ProjectorMatrix::new_unchecked(m),
    ))
}

/// `U ρ U†`.
pub fn evolve_joint(rho: &DensityMatrix, p: &Propagator) -> Result<DensityMatrix> {
    rho.same_dim(&p.u)?;
    Ok(DensityMatrix::new_unchecked(
        rho.conjugate_by(&p.u).hermitian_part(),
    ))
}

/// Checks `U(a)U(b) = U(b)U(a) = U(a+b)` and `U(-a) = U(a)†` over all pairs of `times`.
pub fn check_abelian_group(h: &Hamiltonian, times: &[f64]) -> Result<ValidationReport> {
    check_abelian_group_with(h, times, &Tolerances::default())
}

pub fn check_abelian_group_with(
    h: &Hamiltonian,
    times: &[f64],
    tol: &Tolerances,
) -> Result<ValidationReport> {
    let props: Vec<Propagator> = times
        .iter()
        .map(|&t| propagator(h, t))
        .collect::<Result<_>>()?;
    let mut composition: f64 = 0.0;
    let mut commutation: f64 = 0.0;
    let mut inverse: f64 = 0.0;
    for (a, pa) in props.iter().enumerate() {
        let back = propagator(h, -pa.t)?;
        inverse = inverse.max(back.u.max_dist(&pa.u.adjoint()));
        for pb in &props[a..] {
            let ab = pa.u.as_matrix() * pb.u.as_matrix();
            let ba = pb.u.as_matrix() * pa.u.as_matrix();
            let sum = propagator(h, pa.t + pb.t)?;
            composition = composition
                .max(ab.max_dist(&sum.u))
                .max(ba.max_dist(&sum.u));
            commutation = commutation.max(ab.max_dist(&ba));
        }
    }
    let mut r = ValidationReport::new();
    r.check("composition", composition, tol.group_law);
    r.check("commutation", commutation, tol.group_law);
    r.check("inverse_is_adjoint", inverse, tol.group_law);
    Ok(r)
}

/// Whether two propagators commute; generic propagators of different
/// Hamiltonians do not.
pub fn check_commuting(a: &Propagator, b: &Propagator) -> Result<ValidationReport> {
    a.u.same_dim(&b.u)?;
    let mut r = ValidationReport::new();
    let dev = a.u.commutator(&b.u).max_norm();
    r.check("commutation", dev, Tolerances::default().group_law);
    Ok(r)
}

/// Eigenphase distance from `±π` below which the logarithm is refused.
pub const BRANCH_CUT_MARGIN: f64 = 1e-8;

/// Principal-branch Hamiltonian `H` with `exp(-i t H) = U`.
pub fn hamiltonian_log(p: &Propagator) -> Result<Hamiltonian> {
    if p.t == 0.0 {
        return Err(Error::ZeroTime);
    }
    let u = p.u.as_matrix().as_inner().clone();
    let schur = nalgebra::Schur::new(u);
    let (q, t) = schur.unpack();
    let dim = p.dim();
    // A normal matrix has a diagonal Schur form; Q holds its eigenvectors.
    let mut scaled = q.clone();
    for j in 0..dim {
        let lambda: C64 = t[(j, j)];
        let phase = lambda.arg();
        if std::f64::consts::PI - phase.abs() < BRANCH_CUT_MARGIN {
            return Err(Error::BranchCut { phase });
        }
        let energy = -phase / p.t;
        for i in 0..dim {
            scaled[(i, j)] *= energy;
        }
    }
    let h = ComplexMatrix::new(scaled * q.adjoint())?.hermitian_part();
    Ok(Hamiltonian::new(HermitianMatrix::new_unchecked(h)))
}

/// Sorted eigenvalues, for spectrum comparisons.
pub fn spectrum(m: &ComplexMatrix) -> Vec<f64> {
    eigh(m).values
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{pauli, validate, OperatorKind, ONE, ZERO};
    use crate::random;
    use std::f64::consts::PI;

    fn h(m: ComplexMatrix) -> Hamiltonian {
        Hamiltonian::from_matrix(m).unwrap()
    }

    #[test]
    fn propagator_examples() {
        let hz = h(pauli::z());
        assert_eq!(
            propagator(&hz, 0.0).unwrap().u.as_matrix(),
            &ComplexMatrix::identity(2)
        );
        let u = propagator(&hz, PI / 2.0).unwrap();
        assert!((u.u.get(0, 0) - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((u.u.get(1, 1) - C64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn question_evolution() {
        let q = Question::from_ket("0", &[ONE, ZERO]).unwrap();
        let same = evolve_question(&q, &Propagator::identity(2, 0.0)).unwrap();
        assert!(same.same_as(&q, 0.0));
        for t in [0.1, 1.0, 7.3] {
            let p = propagator(&h(pauli::z()), t).unwrap();
            assert!(evolve_question(&q, &p).unwrap().same_as(&q, 1e-15));
        }
        let p = propagator(&h(pauli::x()), PI / 2.0).unwrap();
        let flipped = evolve_question(&q, &p).unwrap();
        assert!(
            flipped
                .matrix()
                .max_dist(&ComplexMatrix::basis_projector(2, 1))
                < 1e-10
        );
        assert!(evolve_question(&q, &Propagator::identity(3, 0.0)).is_err());
    }

    #[test]
    fn joint_evolution_preserves_spectrum() {
        let mut rng = random::rng(3);
        let mixed = DensityMatrix::maximally_mixed(4);
        let hh = Hamiltonian::new(random::hermitian(4, &mut rng));
        let p = propagator(&hh, 0.9).unwrap();
        assert!(evolve_joint(&mixed, &p).unwrap().max_dist(&mixed) < 1e-15);
        let rho = random::density(4, &mut rng);
        let out = evolve_joint(&rho, &p).unwrap();
        assert!(validate(&out, OperatorKind::Density).passed());
        let (a, b) = (spectrum(&rho), spectrum(&out));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!((rho.purity() - out.purity()).abs() < 1e-10);
    }

    #[test]
    fn group_law() {
        let mut rng = random::rng(5);
        let hh = Hamiltonian::new(random::hermitian(4, &mut rng));
        assert!(check_abelian_group(&hh, &[0.0]).unwrap().passed());
        let r = check_abelian_group(&hh, &[0.1, 0.2, 0.7, -0.3]).unwrap();
        assert!(r.passed(), "{r:?}");
        let a = propagator(&h(pauli::x()), 0.5).unwrap();
        let b = propagator(&h(pauli::z()), 0.5).unwrap();
        assert!(!check_commuting(&a, &b).unwrap().passed());
    }

    #[test]
    fn logarithm_examples() {
        let hz = h(pauli::z());
        let back = hamiltonian_log(&propagator(&hz, 0.4).unwrap()).unwrap();
        assert!(back.h.max_dist(&pauli::z()) < 1e-9);
        let zero = hamiltonian_log(&Propagator::identity(2, 1.0)).unwrap();
        assert!(zero.h.max_norm() < 1e-15);
        assert!(matches!(
            hamiltonian_log(&propagator(&hz, PI).unwrap()),
            Err(Error::BranchCut { .. })
        ));
        assert_eq!(
            hamiltonian_log(&Propagator::identity(2, 0.0)),
            Err(Error::ZeroTime)
        );
    }

    #[test]
    fn logarithm_round_trip_random() {
        let mut rng = random::rng(6);
        for d in [2, 3, 5, 8] {
            let hh = Hamiltonian::new(random::hermitian(d, &mut rng));
            let radius = eigh(&hh.h)
                .values
                .iter()
                .map(|l| l.abs())
                .fold(0.0, f64::max);
            let t = 0.9 * PI / radius;
            let back = hamiltonian_log(&propagator(&hh, t).unwrap()).unwrap();
            assert!(back.h.max_dist(&hh.h) < 1e-8, "d={d}");
        }
    }
}
