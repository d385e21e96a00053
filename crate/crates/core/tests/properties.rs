use nalgebra::DMatrix;
use proptest::prelude::*;

use qformal::born::{born_probability, sample_answers, transition_matrix, verify_bistochastic};
use qformal::dynamics::{hamiltonian_log, propagator, Hamiltonian};
use qformal::gleason::{fit_density, frame_samples_from_state, random_resolutions};
use qformal::lattice::{complete_questions, AnswerString, Question, QuestionFamily, RelationTable};
use qformal::matrix::{eigh, from_hermitian_coordinates, hermitian_basis, hermitian_coordinates};
use qformal::povm::{derive_povm, naimark_dilate, AncillaModel};
use qformal::{
    mat_exp_hermitian, partial_trace, random, tensor_product, ComplexMatrix, DensityMatrix,
    ProjectorMatrix, Subsystem, Tolerances, C64,
};

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig::with_cases(cases)
}

/// Square matrices with small Gaussian-integer entries, so products are exact.
fn gaussian_integer(dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-3i32..=3, -3i32..=3), dim * dim).prop_map(move |v| {
        let m = DMatrix::from_iterator(
            dim,
            dim,
            v.into_iter().map(|(a, b)| C64::new(a as f64, b as f64)),
        );
        ComplexMatrix::new(m).unwrap()
    })
}

fn sized(max: usize) -> impl Strategy<Value = ComplexMatrix> {
    (1..=max).prop_flat_map(gaussian_integer)
}

/// `exp(-i t H)` by scaling, a 30-term Taylor series and squaring.
fn taylor_exp(h: &ComplexMatrix, t: f64) -> DMatrix<C64> {
    let a = h.as_inner().map(|z| z * C64::new(0.0, -t));
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let a = a / C64::new(2f64.powi(squarings), 0.0);
    let n = a.nrows();
    let mut term = DMatrix::<C64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=30 {
        term = &term * &a / C64::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn kron_is_associative(a in sized(2), b in sized(2), c in sized(2)) {
        let left = tensor_product(&tensor_product(&a, &b), &c);
        let right = tensor_product(&a, &tensor_product(&b, &c));
        prop_assert_eq!(left, right);
    }

    #[test]
    fn kron_mixed_product((a, c) in (1usize..=2).prop_flat_map(|d| (gaussian_integer(d), gaussian_integer(d))),
                          (b, e) in (1usize..=3).prop_flat_map(|d| (gaussian_integer(d), gaussian_integer(d)))) {
        let lhs = &tensor_product(&a, &b) * &tensor_product(&c, &e);
        let rhs = tensor_product(&(&a * &c), &(&b * &e));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn partial_trace_of_product(a in gaussian_integer(2), b in gaussian_integer(3)) {
        let ab = tensor_product(&a, &b);
        let over_p = partial_trace(&ab, 2, 3, Subsystem::P).unwrap();
        let over_s = partial_trace(&ab, 2, 3, Subsystem::S).unwrap();
        prop_assert!(over_p.max_dist(&a.scale(b.trace())) < 1e-12);
        prop_assert!(over_s.max_dist(&b.scale(a.trace())) < 1e-12);
    }

    /// `Tr(Tr_P(M) X) = Tr(M (X ⊗ I))` characterizes the partial trace.
    #[test]
    fn partial_trace_duality(m in gaussian_integer(6), x in gaussian_integer(3)) {
        let reduced = partial_trace(&m, 3, 2, Subsystem::P).unwrap();
        let lhs = (&reduced * &x).trace();
        let rhs = (&m * &tensor_product(&x, &ComplexMatrix::identity(2))).trace();
        prop_assert!((lhs - rhs).norm() < 1e-10);
        let reduced = partial_trace(&m, 2, 3, Subsystem::S).unwrap();
        let lhs = (&reduced * &x).trace();
        let rhs = (&m * &tensor_product(&ComplexMatrix::identity(2), &x)).trace();
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }
}

proptest! {
    #![proptest_config(cfg(32))]

    #[test]
    fn exp_matches_taylor_series(seed in any::<u64>(), dim in 1usize..=5, t in -3.0f64..3.0) {
        let h = random::hermitian(dim, &mut random::rng(seed));
        let u = mat_exp_hermitian(&h, t).unwrap();
        prop_assert!(max_abs(&(u.as_inner() - taylor_exp(&h, t))) < 1e-10);
    }

    #[test]
    fn exp_group_law(seed in any::<u64>(), dim in 1usize..=6, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let h = random::hermitian(dim, &mut random::rng(seed));
        let ua = mat_exp_hermitian(&h, a).unwrap();
        let ub = mat_exp_hermitian(&h, b).unwrap();
        let uab = mat_exp_hermitian(&h, a + b).unwrap();
        prop_assert!((ua.as_matrix() * ub.as_matrix()).max_dist(&uab) < 1e-9);
        prop_assert!(ua.adjoint().max_dist(&mat_exp_hermitian(&h, -a).unwrap()) < 1e-9);
    }

    #[test]
    fn logarithm_inverts_exponential(seed in any::<u64>(), dim in 1usize..=6, frac in 0.05f64..0.95) {
        let h = Hamiltonian::new(random::hermitian(dim, &mut random::rng(seed)));
        let radius = eigh(&h.h).values.iter().map(|l| l.abs()).fold(0.0, f64::max);
        prop_assume!(radius > 1e-6);
        let t = frac * std::f64::consts::PI / radius;
        let back = hamiltonian_log(&propagator(&h, t).unwrap()).unwrap();
        prop_assert!(back.h.max_dist(&h.h) < 1e-8);
    }

    #[test]
    fn hermitian_coordinates_round_trip(seed in any::<u64>(), dim in 1usize..=5) {
        let h = random::hermitian(dim, &mut random::rng(seed));
        let basis = hermitian_basis(dim);
        let x = hermitian_coordinates(&h, &basis);
        prop_assert!(from_hermitian_coordinates(&x, &basis).max_dist(&h) < 1e-12);
        // orthonormality makes the coordinate map an isometry
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((norm - h.frobenius_norm()).abs() < 1e-10);
    }
}

fn random_subspace(dim: usize, rank: usize, seed: u64) -> Question {
    let u = random::unitary(dim, &mut random::rng(seed));
    let cols: Vec<Vec<C64>> = (0..rank)
        .map(|j| (0..dim).map(|i| u.get(i, j)).collect())
        .collect();
    Question::new(
        format!("r{rank}"),
        ProjectorMatrix::onto_span(dim, &cols).unwrap(),
    )
}

/// Rank of a set of column vectors, via singular values.
fn span_rank(m: DMatrix<C64>) -> usize {
    m.singular_values().iter().filter(|&&s| s > 1e-8).count()
}

proptest! {
    #![proptest_config(cfg(48))]

    #[test]
    fn meet_and_join_dimensions(seed in any::<u64>(), dim in 2usize..=5, ra in 0usize..=5, rb in 0usize..=5) {
        let (ra, rb) = (ra.min(dim), rb.min(dim));
        let a = random_subspace(dim, ra, seed);
        let b = random_subspace(dim, rb, seed.wrapping_add(1));
        let (pa, pb) = (a.matrix().as_inner(), b.matrix().as_inner());
        let both = span_rank(DMatrix::from_fn(dim, 2 * dim, |i, j| if j < dim { pa[(i, j)] } else { pb[(i, j - dim)] }));
        let join = a.join(&b);
        let meet = a.meet(&b);
        prop_assert_eq!(join.rank(), both);
        prop_assert_eq!(meet.rank(), ra + rb - both);
        prop_assert!(meet.implies(&a) && meet.implies(&b));
        prop_assert!(a.implies(&join) && b.implies(&join));
        // De Morgan
        prop_assert!(a.meet(&b).negation().same_as(&a.negation().join(&b.negation()), 1e-8));
    }

    #[test]
    fn nested_subspaces_obey_orthomodular_law(seed in any::<u64>(), dim in 2usize..=5, r in 1usize..=4) {
        let r = r.min(dim - 1);
        let u = random::unitary(dim, &mut random::rng(seed));
        let cols: Vec<Vec<C64>> = (0..dim).map(|j| (0..dim).map(|i| u.get(i, j)).collect()).collect();
        let a = Question::new("a", ProjectorMatrix::onto_span(dim, &cols[..r]).unwrap());
        let b = Question::new("b", ProjectorMatrix::onto_span(dim, &cols[..r + 1]).unwrap());
        prop_assert!(a.implies(&b));
        prop_assert!(a.join(&b.meet(&a.negation())).same_as(&b, 1e-8));
    }

    #[test]
    fn relations_invariant_under_unitaries(seed in any::<u64>(), dim in 2usize..=4) {
        let qs = vec![
            random_subspace(dim, 1, seed),
            random_subspace(dim, 2, seed),
            random_subspace(dim, 1, seed ^ 0xff),
            random_subspace(dim, 1, seed).negation(),
        ];
        let u = random::unitary(dim, &mut random::rng(seed.wrapping_mul(3)));
        let moved: Vec<Question> = qs
            .iter()
            .map(|q| Question::new(q.label.clone(), ProjectorMatrix::new(q.matrix().conjugate_by(&u).hermitian_part()).unwrap()))
            .collect();
        let tol = Tolerances::default();
        prop_assert_eq!(RelationTable::of(&qs, &tol).mismatches(&RelationTable::of(&moved, &tol)), 0);
    }

    #[test]
    fn answer_strings_round_trip(n in 1usize..=10, k in any::<usize>()) {
        let k = k % (1 << n);
        prop_assert_eq!(AnswerString::from_atom_index(k, n).atom_index(), k);
    }
}

proptest! {
    #![proptest_config(cfg(32))]

    /// For rank-1 atoms, `p^ij = |⟨b_i|c_j⟩|²`; the matrix is doubly stochastic and
    /// swapping the families transposes it.
    #[test]
    fn transition_matrix_overlaps(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = random::rng(seed);
        let b = complete_questions(&QuestionFamily::random_rank_one(n, &mut rng)).unwrap();
        let c = complete_questions(&QuestionFamily::random_rank_one(n, &mut rng)).unwrap();
        let t = transition_matrix(&b, &c).unwrap();
        let ket = |p: &ProjectorMatrix| -> Vec<C64> {
            let e = eigh(p);
            let last = e.vectors.ncols() - 1;
            e.vectors.column(last).iter().copied().collect()
        };
        for (i, bi) in b.atoms().iter().enumerate() {
            for (j, cj) in c.atoms().iter().enumerate() {
                let overlap: C64 = ket(bi).iter().zip(ket(cj)).map(|(x, y)| x.conj() * y).sum();
                prop_assert!((t.get(i, j) - overlap.norm_sqr()).abs() < 1e-10);
            }
        }
        prop_assert!(verify_bistochastic(&t).passed());
        let back = transition_matrix(&c, &b).unwrap();
        prop_assert!((back.p.transpose() - &t.p).abs().max() < 1e-12);
    }

    #[test]
    fn born_probabilities_form_a_distribution(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = random::rng(seed);
        let family = QuestionFamily::random_rank_one(n, &mut rng);
        let rho = random::density(1 << n, &mut rng);
        let atoms = complete_questions(&family).unwrap();
        let total: f64 = atoms
            .atoms()
            .iter()
            .map(|a| born_probability(&rho, &Question::new("a", a.clone())).unwrap())
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for q in family.questions() {
            let p = born_probability(&rho, q).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
            let not = born_probability(&rho, &q.negation()).unwrap();
            prop_assert!((p + not - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>(), n in 1u64..2000) {
        let rho = random::density(4, &mut random::rng(seed));
        let atoms = qformal::lattice::CompleteQuestionSet::computational(4);
        let a = sample_answers(&rho, &atoms, n, seed).unwrap();
        let b = sample_answers(&rho, &atoms, n, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.counts.iter().sum::<u64>(), n);
    }

    /// Disjoint rank-complete halves of the data determine the same state.
    #[test]
    fn fit_is_unique(seed in any::<u64>(), dim in 2usize..=4) {
        let rho = random::density(dim, &mut random::rng(seed));
        let res = random_resolutions(dim, 4 * dim, seed);
        let samples = frame_samples_from_state(&rho, &res).unwrap();
        let (left, right) = samples.split_at(2 * dim);
        let a = fit_density(left).unwrap();
        let b = fit_density(right).unwrap();
        prop_assert!(!a.rank_deficient && !b.rank_deficient);
        prop_assert!(a.rho_hat.max_dist(&b.rho_hat) < 1e-9);
        prop_assert!(a.frobenius_error(&rho) < 1e-9);
    }

    #[test]
    fn derived_effects_form_a_povm(seed in any::<u64>(), ds in 1usize..=3, dp in 1usize..=3) {
        let mut rng = random::rng(seed);
        let model = AncillaModel::random(ds, dp, &mut rng);
        let effects = derive_povm(&model).unwrap();
        let mut sum = ComplexMatrix::zeros(ds);
        for e in effects.effects() {
            prop_assert!(eigh(e).min() >= -1e-10);
            sum = &sum + e.as_matrix();
        }
        prop_assert!(sum.max_dist(&ComplexMatrix::identity(ds)) < 1e-10);
        let rho = random::density(ds, &mut rng);
        let probs = effects.probabilities(&rho).unwrap();
        for (b, p) in probs.iter().enumerate() {
            prop_assert!((p - qformal::povm::joint_probability(&rho, &model, b).unwrap()).abs() < 1e-10);
        }
        // dilating the derived POVM reproduces its statistics
        let dilation = naimark_dilate(&effects).unwrap();
        for (b, p) in probs.iter().enumerate() {
            prop_assert!((dilation.probability(&rho, b).unwrap() - p).abs() < 1e-10);
        }
    }

    #[test]
    fn matrices_survive_json(seed in any::<u64>(), dim in 1usize..=4) {
        let rho = random::density(dim, &mut random::rng(seed));
        let text = serde_json::to_string(&rho).unwrap();
        let back: DensityMatrix = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, rho);
    }
}
