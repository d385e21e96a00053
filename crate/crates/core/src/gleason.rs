//! Frame functions and density-matrix reconstruction.
//!
//! A frame function assigns a value to each projector of each resolution of
//! the identity so that every resolution sums to one. For `d > 2` every
//! non-contextual frame function is `Π ↦ Tr(ρΠ)` for a unique `ρ`;
//! [`fit_density`] recovers that `ρ` by linear least squares in a fixed
//! orthonormal Hermitian basis. Positivity and unit trace are reported,
//! not imposed, so frame functions that are not of trace form (such as the
//! qubit counterexample) show up as residuals instead of being projected
//! onto the state space.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{
    eigh, from_hermitian_coordinates, hermitian_basis, hermitian_coordinates, pauli, ComplexMatrix,
    DensityMatrix, HermitianMatrix, ProjectorMatrix,
};
use crate::povm::{check_resolution, verify_povm_with, EffectList};
use crate::random;
use crate::report::ValidationReport;
use crate::tolerance::Tolerances;

/// Mutually orthogonal projectors summing to the identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ResolutionOfIdentity {
    projectors: Vec<ProjectorMatrix>,
}

impl ResolutionOfIdentity {
    pub fn new(projectors: Vec<ProjectorMatrix>) -> Result<Self> {
        let dim = projectors
            .first()
            .ok_or_else(|| Error::NotResolution("no projectors".into()))?
            .dim();
        check_resolution(&projectors, dim, &Tolerances::default())?;
        Ok(Self { projectors })
    }

    pub fn computational(dim: usize) -> Self {
        Self {
            projectors: (0..dim).map(|k| ProjectorMatrix::basis(dim, k)).collect(),
        }
    }

    pub fn projectors(&self) -> &[ProjectorMatrix] {
        &self.projectors
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }
}

impl<'de> Deserialize<'de> for ResolutionOfIdentity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let projectors = Vec::<ProjectorMatrix>::deserialize(d)?;
        Self::new(projectors).map_err(serde::de::Error::custom)
    }
}

/// Seeded rank-1 resolutions from eigenvector frames of random Hermitian matrices.
pub fn random_resolutions(dim: usize, count: usize, seed: u64) -> Vec<ResolutionOfIdentity> {
    let mut rng = random::rng(seed);
    (0..count)
        .map(|_| ResolutionOfIdentity {
            projectors: random::rank_one_frame(dim, &mut rng),
        })
        .collect()
}

/// Values assigned to the projectors of one resolution.
///
/// Values are not checked on construction; see [`check_frame_function`].
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSample {
    pub resolution: ResolutionOfIdentity,
    pub values: Vec<f64>,
}

impl FrameSample {
    pub fn new(resolution: ResolutionOfIdentity, values: Vec<f64>) -> Result<Self> {
        if values.len() != resolution.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for {} projectors",
                values.len(),
                resolution.len()
            )));
        }
        Ok(Self { resolution, values })
    }

    pub fn dim(&self) -> usize {
        self.resolution.dim()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameEntry {
    projector: ProjectorMatrix,
    value: f64,
}

impl Serialize for FrameSample {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<FrameEntry> = self
            .resolution
            .projectors
            .iter()
            .zip(&self.values)
            .map(|(p, &value)| FrameEntry {
                projector: p.clone(),
                value,
            })
            .collect();
        entries.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FrameSample {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let entries = Vec::<FrameEntry>::deserialize(d)?;
        let (projectors, values): (Vec<_>, Vec<_>) =
            entries.into_iter().map(|e| (e.projector, e.value)).unzip();
        let resolution = ResolutionOfIdentity::new(projectors).map_err(serde::de::Error::custom)?;
        Ok(Self { resolution, values })
    }
}

/// `f(Π) = Tr(ρΠ)` on every projector of every resolution.
pub fn frame_samples_from_state(
    rho: &DensityMatrix,
    resolutions: &[ResolutionOfIdentity],
) -> Result<Vec<FrameSample>> {
    resolutions
        .iter()
        .map(|res| {
            rho.same_dim(&res.projectors[0])?;
            let values = res
                .projectors
                .iter()
                .map(|p| (rho.as_matrix() * p.as_matrix()).trace().re)
                .collect();
            Ok(FrameSample {
                resolution: res.clone(),
                values,
            })
        })
        .collect()
}

/// Range and per-resolution sum checks, merged with [`noncontextuality_check`].
pub fn check_frame_function(samples: &[FrameSample]) -> ValidationReport {
    check_frame_function_with(samples, &Tolerances::default())
}

pub fn check_frame_function_with(samples: &[FrameSample], tol: &Tolerances) -> ValidationReport {
    let mut r = ValidationReport::new();
    let mut range_dev: f64 = 0.0;
    let mut out_of_range = Vec::new();
    let mut sum_dev: f64 = 0.0;
    let mut bad_sums = Vec::new();
    for (s, sample) in samples.iter().enumerate() {
        for (k, &v) in sample.values.iter().enumerate() {
            let dev = if v.is_nan() {
                f64::INFINITY
            } else {
                (-v).max(v - 1.0).max(0.0)
            };
            range_dev = range_dev.max(dev);
            if !(dev <= tol.frame_range) {
                out_of_range.push((s, k));
            }
        }
        let dev = (sample.values.iter().sum::<f64>() - 1.0).abs();
        let dev = if dev.is_nan() { f64::INFINITY } else { dev };
        sum_dev = sum_dev.max(dev);
        if !(dev <= tol.frame_sum) {
            bad_sums.push(s);
        }
    }
    r.check_with(
        "values_in_unit_interval",
        range_dev,
        tol.frame_range,
        (!out_of_range.is_empty()).then(|| format!("(sample, projector) {out_of_range:?}")),
    );
    r.check_with(
        "resolution_sums",
        sum_dev,
        tol.frame_sum,
        (!bad_sums.is_empty()).then(|| format!("samples {bad_sums:?}")),
    );
    r.merge(noncontextuality_check_with(samples, tol));
    r
}

/// Projectors shared between resolutions must carry the same value.
pub fn noncontextuality_check(samples: &[FrameSample]) -> ValidationReport {
    noncontextuality_check_with(samples, &Tolerances::default())
}

pub fn noncontextuality_check_with(samples: &[FrameSample], tol: &Tolerances) -> ValidationReport {
    let entries: Vec<(usize, usize, &ProjectorMatrix, f64)> = samples
        .iter()
        .enumerate()
        .flat_map(|(s, sample)| {
            sample
                .resolution
                .projectors
                .iter()
                .zip(&sample.values)
                .enumerate()
                .map(move |(k, (p, &v))| (s, k, p, v))
        })
        .collect();

    let mut worst: f64 = 0.0;
    let mut conflicts = Vec::new();
    let mut shared = 0;
    for a in 0..entries.len() {
        for b in (a + 1)..entries.len() {
            let (sa, ka, pa, va) = entries[a];
            let (sb, kb, pb, vb) = entries[b];
            if sa == sb || pa.dim() != pb.dim() || pa.max_dist(pb) > tol.context_match {
                continue;
            }
            shared += 1;
            let dev = (va - vb).abs();
            worst = worst.max(dev);
            if !(dev <= tol.context_value) {
                conflicts.push(format!(
                    "sample {sa}#{ka} = {va} vs sample {sb}#{kb} = {vb}"
                ));
            }
        }
    }
    let mut r = ValidationReport::new();
    r.check_with(
        "noncontextual_values",
        worst,
        tol.context_value,
        (!conflicts.is_empty()).then(|| format!("contextual conflicts: {}", conflicts.join("; "))),
    );
    r.note(format!(
        "{shared} projector pairs shared across resolutions"
    ));
    r
}

/// Least-squares estimate of `ρ` from linear constraints `Tr(ρE) = f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub rho_hat: HermitianMatrix,
    /// Root-mean-square of `Tr(ρ̂E) - f` over all equations.
    pub residual: f64,
    /// Magnitude of the most negative eigenvalue of `ρ̂`, zero if none.
    pub psd_violation: f64,
    /// `|Tr ρ̂ - 1|`.
    pub trace_deviation: f64,
    pub equations: usize,
    /// Numerical rank of the design matrix, out of `d²`.
    pub rank: usize,
    /// Set when `rank < d²`: `ρ̂` is then the minimum-norm solution.
    pub rank_deficient: bool,
}

impl FitResult {
    pub fn frobenius_error(&self, rho: &ComplexMatrix) -> f64 {
        (self.rho_hat.as_matrix() - rho).frobenius_norm()
    }
}

/// Singular values below this fraction of the largest count as zero.
const RANK_CUTOFF: f64 = 1e-10;

fn fit_linear(dim: usize, rows: &[(&ComplexMatrix, f64)]) -> Result<FitResult> {
    if rows.is_empty() {
        return Err(Error::InvalidArgument("no equations to fit".into()));
    }
    for (e, _) in rows {
        if e.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: e.dim(),
            });
        }
    }
    let basis = hermitian_basis(dim);
    let unknowns = dim * dim;
    let mut design = DMatrix::<f64>::zeros(rows.len(), unknowns);
    for (r, (e, _)) in rows.iter().enumerate() {
        for (k, x) in hermitian_coordinates(e, &basis).into_iter().enumerate() {
            design[(r, k)] = x;
        }
    }
    let targets = DVector::from_iterator(rows.len(), rows.iter().map(|(_, f)| *f));

    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = RANK_CUTOFF * smax.max(f64::MIN_POSITIVE);
    let rank = svd.rank(eps);
    let x = svd
        .solve(&targets, eps)
        .map_err(|e| Error::InvalidArgument(format!("least-squares solve failed: {e}")))?;

    let fitted = &design * &x;
    let residual = ((&fitted - &targets).norm_squared() / rows.len() as f64).sqrt();
    let coords: Vec<f64> = x.iter().copied().collect();
    let rho_hat = from_hermitian_coordinates(&coords, &basis).hermitian_part();
    let min = eigh(&rho_hat).min();
    let trace_deviation = (rho_hat.trace().re - 1.0).abs();
    Ok(FitResult {
        rho_hat: HermitianMatrix::new_unchecked(rho_hat),
        residual,
        psd_violation: (-min).max(0.0),
        trace_deviation,
        equations: rows.len(),
        rank,
        rank_deficient: rank < unknowns,
    })
}

/// Reconstructs `ρ` from projective frame samples.
pub fn fit_density(samples: &[FrameSample]) -> Result<FitResult> {
    let dim = samples
        .first()
        .ok_or_else(|| Error::InvalidArgument("no samples".into()))?
        .dim();
    let rows: Vec<(&ComplexMatrix, f64)> = samples
        .iter()
        .flat_map(|s| {
            s.resolution
                .projectors
                .iter()
                .map(|p| p.as_matrix())
                .zip(s.values.iter().copied())
        })
        .collect();
    fit_linear(dim, &rows)
}

/// Frame samples `{Π(n), Π(-n)}` over random Bloch directions with
/// values `f(n)` and `f(-n)`.
pub fn qubit_frame_samples(
    n_directions: usize,
    seed: u64,
    f: impl Fn([f64; 3]) -> f64,
) -> Vec<FrameSample> {
    let mut rng = random::rng(seed);
    (0..n_directions)
        .map(|_| {
            let n = random::bloch_direction(&mut rng);
            let m = [-n[0], -n[1], -n[2]];
            FrameSample {
                resolution: ResolutionOfIdentity {
                    projectors: vec![
                        ProjectorMatrix::new_unchecked(pauli::bloch_projector(n)),
                        ProjectorMatrix::new_unchecked(pauli::bloch_projector(m)),
                    ],
                },
                values: vec![f(n), f(m)],
            }
        })
        .collect()
}

/// A qubit frame function `f(n) = (1 + n_z³)/2` that satisfies every frame
/// constraint yet is not `Tr(ρΠ)` for any `ρ`.
pub fn qubit_counterexample(n_directions: usize, seed: u64) -> Result<Vec<FrameSample>> {
    if n_directions < 10 {
        return Err(Error::InvalidArgument(format!(
            "need at least 10 directions, got {n_directions}"
        )));
    }
    Ok(qubit_frame_samples(n_directions, seed, |n| {
        (1.0 + n[2].powi(3)) / 2.0
    }))
}

/// Outcome values of one POVM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PovmSample {
    pub effects: EffectList,
    pub values: Vec<f64>,
}

impl From<&FrameSample> for PovmSample {
    fn from(s: &FrameSample) -> Self {
        PovmSample {
            effects: EffectList::from_projectors(s.resolution.projectors.clone())
                .expect("nonempty resolution"),
            values: s.values.clone(),
        }
    }
}

/// `Tr(ρE)` for every effect of every POVM.
pub fn povm_samples_from_state(
    rho: &DensityMatrix,
    povms: &[EffectList],
) -> Result<Vec<PovmSample>> {
    povms
        .iter()
        .map(|e| {
            Ok(PovmSample {
                values: e.probabilities(rho)?,
                effects: e.clone(),
            })
        })
        .collect()
}

/// Same reconstruction as [`fit_density`] with POVM effects in place of projectors.
pub fn fit_density_povm(samples: &[PovmSample]) -> Result<FitResult> {
    fit_density_povm_with(samples, &Tolerances::default())
}

pub fn fit_density_povm_with(samples: &[PovmSample], tol: &Tolerances) -> Result<FitResult> {
    let dim = samples
        .first()
        .ok_or_else(|| Error::InvalidArgument("no samples".into()))?
        .effects
        .dim();
    for (i, s) in samples.iter().enumerate() {
        if s.values.len() != s.effects.len() {
            return Err(Error::InvalidPovm(format!(
                "sample {i}: {} values for {} effects",
                s.values.len(),
                s.effects.len()
            )));
        }
        let report = verify_povm_with(&s.effects, tol);
        if let Some(bad) = report.failures().next() {
            return Err(Error::InvalidPovm(format!(
                "sample {i}: {} deviates by {:.3e}",
                bad.name, bad.deviation
            )));
        }
        let sum_dev = (s.values.iter().sum::<f64>() - 1.0).abs();
        if !(sum_dev <= tol.frame_sum) {
            return Err(Error::InvalidPovm(format!(
                "sample {i}: values sum to 1 only within {sum_dev:.3e}"
            )));
        }
    }
    let rows: Vec<(&ComplexMatrix, f64)> = samples
        .iter()
        .flat_map(|s| {
            s.effects
                .effects()
                .iter()
                .map(|e| e.as_matrix())
                .zip(s.values.iter().copied())
        })
        .collect();
    fit_linear(dim, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::C64;
    use crate::povm::tetrahedral_qubit_povm;

    fn diag_state() -> DensityMatrix {
        DensityMatrix::new(ComplexMatrix::from_diagonal(&[0.5, 1.0 / 3.0, 1.0 / 6.0])).unwrap()
    }

    #[test]
    fn forward_generation_examples() {
        let s = frame_samples_from_state(
            &DensityMatrix::maximally_mixed(3),
            &random_resolutions(3, 1, 0),
        )
        .unwrap();
        for v in &s[0].values {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        let s = frame_samples_from_state(&diag_state(), &[ResolutionOfIdentity::computational(3)])
            .unwrap();
        assert_eq!(s[0].values, vec![0.5, 1.0 / 3.0, 1.0 / 6.0]);
        let mut rng = random::rng(8);
        let rho = random::density(3, &mut rng);
        let samples = frame_samples_from_state(&rho, &random_resolutions(3, 60, 8)).unwrap();
        assert!(check_frame_function(&samples).passed());
        assert!(frame_samples_from_state(
            &DensityMatrix::maximally_mixed(2),
            &random_resolutions(3, 1, 0)
        )
        .is_err());
    }

    #[test]
    fn perturbed_value_located() {
        let mut samples =
            frame_samples_from_state(&diag_state(), &random_resolutions(3, 4, 2)).unwrap();
        samples[2].values[1] += 0.05;
        let r = check_frame_function(&samples);
        let sums = r.get("resolution_sums").unwrap();
        assert!(!sums.passed);
        assert_eq!(sums.detail.as_deref(), Some("samples [2]"));
    }

    #[test]
    fn shared_projector_consistency() {
        let rho = diag_state();
        let e0 = ProjectorMatrix::basis(3, 0);
        let rest = |theta: f64| {
            let (c, s) = (C64::new(theta.cos(), 0.0), C64::new(theta.sin(), 0.0));
            let z = C64::new(0.0, 0.0);
            vec![
                ProjectorMatrix::from_ket(&[z, c, s]).unwrap(),
                ProjectorMatrix::from_ket(&[z, -s, c]).unwrap(),
            ]
        };
        let mut r1 = vec![e0.clone()];
        r1.extend(rest(0.3));
        let mut r2 = vec![e0.clone()];
        r2.extend(rest(1.1));
        let res = vec![
            ResolutionOfIdentity::new(r1).unwrap(),
            ResolutionOfIdentity::new(r2).unwrap(),
        ];
        let samples = frame_samples_from_state(&rho, &res).unwrap();
        let r = noncontextuality_check(&samples);
        assert!(r.passed());
        assert_eq!(r.get("noncontextual_values").unwrap().deviation, 0.0);

        let mut bad = samples.clone();
        bad[0].values = vec![0.3, 0.35, 0.35];
        bad[1].values = vec![0.4, 0.3, 0.3];
        let r = noncontextuality_check(&bad);
        assert!(!r.passed());
        assert!(r
            .get("noncontextual_values")
            .unwrap()
            .detail
            .as_deref()
            .unwrap()
            .contains("0.3 vs"));
    }

    #[test]
    fn fit_recovers_diagonal_state() {
        let samples =
            frame_samples_from_state(&diag_state(), &random_resolutions(3, 20, 4)).unwrap();
        let fit = fit_density(&samples).unwrap();
        assert!(!fit.rank_deficient);
        assert!(fit.frobenius_error(&diag_state()) < 1e-8);
        assert!(fit.residual <= 1e-10);
        assert!(fit.psd_violation == 0.0);
        assert!(fit.trace_deviation < 1e-12);
    }

    #[test]
    fn single_resolution_is_rank_deficient() {
        let samples =
            frame_samples_from_state(&diag_state(), &[ResolutionOfIdentity::computational(3)])
                .unwrap();
        let fit = fit_density(&samples).unwrap();
        assert!(fit.rank_deficient);
        assert_eq!(fit.rank, 3);
        assert!(fit.residual <= 1e-10);
        // The minimum-norm solution keeps the measured diagonal.
        assert!(fit.frobenius_error(&diag_state()) < 1e-12);
    }

    #[test]
    fn counterexample_and_control() {
        let ce = qubit_counterexample(100, 7).unwrap();
        assert!(check_frame_function(&ce).passed());
        assert!(fit_density(&ce).unwrap().residual >= 0.01);
        let linear = qubit_frame_samples(100, 7, |n| (1.0 + 0.5 * n[2]) / 2.0);
        let fit = fit_density(&linear).unwrap();
        assert!(fit.residual <= 1e-10);
        let target = ComplexMatrix::from_diagonal(&[0.75, 0.25]);
        assert!(fit.frobenius_error(&target) < 1e-10);
        assert!(qubit_counterexample(9, 0).is_err());

        let z = qubit_counterexample(10, 0).unwrap();
        for s in &z {
            assert!((s.values[0] + s.values[1] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn povm_fits() {
        let half =
            HermitianMatrix::new(ComplexMatrix::identity(2).scale(C64::new(0.5, 0.0))).unwrap();
        let trivial = PovmSample {
            effects: EffectList::new(vec![half.clone(), half]).unwrap(),
            values: vec![0.5, 0.5],
        };
        let fit = fit_density_povm(std::slice::from_ref(&trivial)).unwrap();
        assert!(fit.rank_deficient);
        assert_eq!(fit.rank, 1);

        let mut rng = random::rng(12);
        let rho = random::density(2, &mut rng);
        let sic = povm_samples_from_state(&rho, &[tetrahedral_qubit_povm()]).unwrap();
        let fit = fit_density_povm(&sic).unwrap();
        assert!(!fit.rank_deficient);
        assert!(fit.frobenius_error(&rho) < 1e-8);

        let mut wrong = trivial.clone();
        wrong.values = vec![0.5, 0.6];
        assert!(matches!(
            fit_density_povm(&[wrong]),
            Err(Error::InvalidPovm(_))
        ));
        let bad_effects = EffectList::new(vec![HermitianMatrix::new(
            ComplexMatrix::identity(2).scale(C64::new(0.9, 0.0)),
        )
        .unwrap()])
        .unwrap();
        assert!(matches!(
            fit_density_povm(&[PovmSample {
                effects: bad_effects,
                values: vec![1.0]
            }]),
            Err(Error::InvalidPovm(_))
        ));
    }

    #[test]
    fn mixed_projective_and_povm_samples_agree() {
        let mut rng = random::rng(13);
        let rho = random::density(3, &mut rng);
        let proj = frame_samples_from_state(&rho, &random_resolutions(3, 6, 13)).unwrap();
        let projective_only = fit_density(&proj).unwrap();
        let mut mixed: Vec<PovmSample> = proj.iter().map(PovmSample::from).collect();
        let random_povm =
            crate::povm::derive_povm(&crate::povm::AncillaModel::random(3, 2, &mut rng)).unwrap();
        mixed.extend(povm_samples_from_state(&rho, &[random_povm]).unwrap());
        let fit = fit_density_povm(&mixed).unwrap();
        assert!(fit.rho_hat.max_dist(&projective_only.rho_hat) < 1e-8);
    }

    #[test]
    fn frame_sample_serde() {
        let samples =
            frame_samples_from_state(&diag_state(), &random_resolutions(3, 2, 1)).unwrap();
        let json = serde_json::to_value(&samples).unwrap();
        let entry = &json[0][0];
        assert!(entry.get("projector").is_some() && entry.get("value").is_some());
        let back: Vec<FrameSample> = serde_json::from_value(json).unwrap();
        assert_eq!(back, samples);
        let not_resolution = serde_json::json!([[{"projector": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]], "value": 1.0}]]);
        assert!(serde_json::from_value::<Vec<FrameSample>>(not_resolution).is_err());
    }
}
