//! Seeded generators for random operators.
//!
//! All randomness in the crate flows through [`ChaCha20Rng`] so results are
//! reproducible from a `u64` seed. Independent streams of one seed are used
//! where work must be order-independent (per-column sampling).

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::matrix::{
    eigh, ComplexMatrix, DensityMatrix, HermitianMatrix, ProjectorMatrix, UnitaryMatrix, C64,
};

pub type QRng = ChaCha20Rng;

pub fn rng(seed: u64) -> QRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Stream `stream` of `seed`; distinct streams never overlap.
pub fn rng_stream(seed: u64, stream: u64) -> QRng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn normal_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Gaussian unitary ensemble sample (unnormalized).
pub fn hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| normal_c64(rng));
    let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    HermitianMatrix::new_unchecked(ComplexMatrix::wrap(h))
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitaryMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| normal_c64(rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    UnitaryMatrix::new_unchecked(ComplexMatrix::wrap(q))
}

/// Uniformly random unit vector in `C^dim`.
pub fn pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..dim).map(|_| normal_c64(rng)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// Mixed state obtained by tracing out half of a Haar-random pure state on
/// `C^dim ⊗ C^dim` (Hilbert-Schmidt measure).
pub fn density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let psi = pure_state(dim * dim, rng);
    let a = DMatrix::from_fn(dim, dim, |i, k| psi[i * dim + k]);
    let rho = ComplexMatrix::wrap(&a * a.adjoint()).hermitian_part();
    // Renormalize the trace away from rounding.
    let tr = rho.trace().re;
    DensityMatrix::new_unchecked(rho.scale(C64::new(1.0 / tr, 0.0)))
}

/// Rank-1 resolution of the identity from the eigenvector frame of a random Hermitian matrix.
pub fn rank_one_frame<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<ProjectorMatrix> {
    let e = eigh(&hermitian(dim, rng));
    (0..dim)
        .map(|j| {
            let v: Vec<C64> = e.vectors.column(j).iter().copied().collect();
            ProjectorMatrix::new_unchecked(
                ComplexMatrix::ket_projector(&v).expect("unit eigenvector"),
            )
        })
        .collect()
}

/// Uniform point on the unit sphere.
pub fn bloch_direction<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-12 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}
