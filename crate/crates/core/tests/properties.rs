//! Randomised invariants across modules, each checked against an oracle
//! written here rather than the library's own routine.

use std::collections::BTreeSet;

use filtrations::bricks::{family_by_name, GlueMode, GluedChain, Mode, StrongBrick, DEFAULT_BUDGET};
use filtrations::coupling::{
    immersion_check_paths, immersion_check_strategy, kr_distance, large_sets_check, overlap, pair_path_law,
    run_coupling, total_variation, verify_marginals, BoundStatus, Dist, ExplicitUniformChain, FiniteProcessLaw,
    PairScope, PairStrategy, StartMode, Strategy as Coupler, UniformSteps,
};
use filtrations::field::{Field, Gf, Matrix};
use filtrations::sequences::{classify, generate_alpha_weighted, AlphaPattern, Budget, SeriesKind};
use filtrations::split_words::{exact_marginals, sample_path, SplitWordsSpec};
use filtrations::Execution;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use proptest::sample::select;

fn small_orders() -> impl Strategy<Value = u64> {
    select(vec![2u64, 3, 4, 5, 7, 8, 9, 16, 25, 27, 32, 49])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frobenius_is_additive(q in small_orders(), a in any::<u32>(), b in any::<u32>()) {
        let f = Field::with_order(q).unwrap();
        let (a, b) = (f.element(a % q as u32), f.element(b % q as u32));
        let p = f.characteristic() as u64;
        prop_assert_eq!(f.pow(f.add(a, b), p), f.add(f.pow(a, p), f.pow(b, p)));
    }

    #[test]
    fn field_axioms_on_random_triples(q in small_orders(), x in any::<[u32; 3]>()) {
        let f = Field::with_order(q).unwrap();
        let [a, b, c] = x.map(|v| f.element(v % q as u32));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), f.element(1));
        }
    }

    /// q^rank equals the number of distinct row combinations.
    #[test]
    fn rank_counts_the_row_space(q in select(vec![2u64, 3, 4]), rows in 1usize..4, cols in 1usize..5, seed in any::<u64>()) {
        let f = Field::with_order(q).unwrap();
        let entries: Vec<Gf> = (0..rows * cols)
            .map(|i| f.element((seed.rotate_left(7 * i as u32) % q) as u32))
            .collect();
        let m = Matrix::from_entries(rows, cols, entries);
        let mut span = BTreeSet::new();
        for code in 0..q.pow(rows as u32) {
            let coeffs = f.decode_vec(code, rows);
            let v: Vec<u32> = (0..cols)
                .map(|c| (0..rows).fold(f.element(0), |acc, r| f.add(acc, f.mul(coeffs[r], m.get(r, c)))).code())
                .collect();
            span.insert(v);
        }
        prop_assert_eq!(span.len() as u64, q.pow(m.rank(&f) as u32));
    }

    /// Solutions of M x = y by enumerating every x.
    #[test]
    fn solve_matches_enumeration(q in select(vec![2u64, 3]), seed in any::<u64>(), y in any::<u64>()) {
        let f = Field::with_order(q).unwrap();
        let n = 3;
        let entries: Vec<Gf> = (0..n * n).map(|i| f.element((seed.rotate_left(5 * i as u32) % q) as u32)).collect();
        let m = Matrix::from_entries(n, n, entries);
        let rhs = f.decode_vec(y % q.pow(n as u32), n);
        let brute: BTreeSet<u64> = (0..q.pow(n as u32))
            .filter(|&x| m.mul_vec(&f, &f.decode_vec(x, n)) == rhs)
            .collect();
        match m.solve(&f, &rhs) {
            None => prop_assert!(brute.is_empty()),
            Some(sol) => {
                let got: BTreeSet<u64> = (0..sol.size(&f)).map(|i| f.encode_vec(&sol.point(&f, i))).collect();
                prop_assert_eq!(got, brute);
            }
        }
    }
}

fn alpha_values() -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::vec((0i64..5).prop_map(|k| BigRational::new(BigInt::from(k), BigInt::from(4))), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// ℓ_n divides ℓ_{n−1}, and shrinking the exact window keeps every
    /// exponent.
    #[test]
    fn generated_lengths_divide_and_representations_agree(values in alpha_values(), depth in 4u64..9) {
        let alpha = AlphaPattern::Periodic { values };
        let wide = generate_alpha_weighted(&alpha, depth, &Budget::default()).unwrap();
        let narrow = generate_alpha_weighted(&alpha, depth, &Budget { exact_bits: 8, exponent_bits: 1 << 16 }).unwrap();
        for d in 0..depth {
            let (a, b) = (wide.length(d).exponent().unwrap(), wide.length(d + 1).exponent().unwrap());
            prop_assert!(a <= b, "depth {}: exponent {} > {}", d, a, b);
        }
        for d in 0..=depth {
            prop_assert_eq!(wide.length(d).exponent(), narrow.length(d).exponent());
        }
    }

    #[test]
    fn definite_series_verdicts_carry_certificates(values in alpha_values(), depth in 4u64..9) {
        let s = generate_alpha_weighted(&AlphaPattern::Periodic { values }, depth, &Budget::default()).unwrap();
        let c = classify(&s);
        if c.delta.verdict != SeriesKind::Undetermined {
            prop_assert!(c.delta.certificate.is_some());
        }
    }
}

fn word_lengths() -> impl Strategy<Value = (u32, Vec<u64>)> {
    (2u32..4, prop::collection::vec(select(vec![1u64, 2, 3]), 1..4)).prop_filter_map("small", |(a, ratios)| {
        let mut lengths = vec![1u64];
        for r in ratios {
            lengths.push(lengths.last().unwrap() * r);
        }
        let deep = *lengths.last().unwrap();
        ((a as u64).pow(deep as u32) * deep <= 1 << 14).then(|| (a, lengths))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn entrance_law_is_uniform_with_independent_innovations((alphabet, lengths) in word_lengths()) {
        let spec = SplitWordsSpec::new(alphabet, lengths).unwrap();
        let m = exact_marginals(&spec, 1 << 20).unwrap();
        for level in &m.levels {
            let first = level.counts[0];
            prop_assert!(level.counts.iter().all(|&c| c == first), "n={}", level.n);
        }
        prop_assert!(m.all_uniform && m.all_independent);
    }

    #[test]
    fn sampled_paths_nest((alphabet, lengths) in word_lengths(), seed in any::<u64>()) {
        let spec = SplitWordsSpec::new(alphabet, lengths.clone()).unwrap();
        let p = sample_path(&spec, seed).unwrap();
        prop_assert!(p.verify());
        let got: Vec<u64> = p.levels.iter().map(|l| l.word.len() as u64).collect();
        prop_assert_eq!(got, lengths);
    }
}

fn dist_from(weights: &[u64]) -> Dist {
    Dist::new(weights.iter().enumerate().filter(|(_, &w)| w > 0).map(|(i, &w)| (i as u64, w)).collect())
}

/// Σ min(p, q) by hand.
fn overlap_by_hand(a: &[u64], b: &[u64]) -> BigRational {
    let (ta, tb): (u64, u64) = (a.iter().sum(), b.iter().sum());
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let (px, py) = (BigRational::new(x.into(), ta.into()), BigRational::new(y.into(), tb.into()));
            px.min(py)
        })
        .fold(BigRational::zero(), |s, v| s + v)
}

fn weight_pair() -> impl Strategy<Value = (Vec<u64>, Vec<u64>)> {
    (1usize..7)
        .prop_flat_map(|n| (prop::collection::vec(0u64..6, n), prop::collection::vec(0u64..6, n)))
        .prop_filter("non-empty", |(a, b)| a.iter().any(|&x| x > 0) && b.iter().any(|&x| x > 0))
}

/// A uniform-step chain with random supports of a fixed size per level.
fn random_chain(seed: u64) -> ExplicitUniformChain {
    use rand::{seq::SliceRandom, Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let counts = vec![rng.random_range(2..5u64), rng.random_range(2..5), rng.random_range(2..4)];
    let mut kernels = vec![vec![]];
    for d in 1..counts.len() {
        let r = rng.random_range(1..=counts[d - 1]);
        let level = (0..counts[d])
            .map(|_| {
                let mut pts: Vec<u64> = (0..counts[d - 1]).collect();
                pts.shuffle(&mut rng);
                Dist::uniform(pts[..r as usize].to_vec())
            })
            .collect();
        kernels.push(level);
    }
    let top = counts.len() - 1;
    let law = FiniteProcessLaw::new(counts.clone(), Dist::uniform(0..counts[top]), kernels).unwrap();
    ExplicitUniformChain::new(law).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn overlap_and_total_variation_sum_to_one((a, b) in weight_pair()) {
        let (da, db) = (dist_from(&a), dist_from(&b));
        prop_assert_eq!(overlap(&da, &db), overlap_by_hand(&a, &b));
        prop_assert_eq!(overlap(&da, &db) + total_variation(&da, &db), BigRational::one());
    }

    #[test]
    fn discrete_metric_transport_is_total_variation((a, b) in weight_pair()) {
        let (da, db) = (dist_from(&a), dist_from(&b));
        let discrete = |x: u64, y: u64| if x == y { BigRational::zero() } else { BigRational::one() };
        prop_assert_eq!(kr_distance(&da, &db, discrete), BigRational::one() - overlap_by_hand(&a, &b));
    }

    /// Built-in strategies keep both marginals, path enumeration agrees, and
    /// greedy merges with probability equal to the overlap.
    #[test]
    fn built_in_strategies_on_random_chains(seed in any::<u64>()) {
        let c = random_chain(seed);
        for s in [Coupler::GreedyMaximal, Coupler::Diagonal, Coupler::IndependentProduct] {
            prop_assert!(verify_marginals(&c, &s, PairScope::Exhaustive, Execution::Sequential).is_ok());
            prop_assert!(immersion_check_strategy(&c, &s, Execution::Sequential).immersed);
            for first in [true, false] {
                let law = pair_path_law(&c, &s, StartMode::Independent { depth: None }, first, 1 << 16).unwrap();
                prop_assert!(immersion_check_paths(&law).immersed);
            }
        }
        for d in 1..=c.depth() {
            for a in 0..c.state_count(d) {
                for b in 0..c.state_count(d) {
                    let joint = Coupler::GreedyMaximal.joint(&c, d, a, b);
                    prop_assert_eq!(joint.diagonal_mass(), overlap(&c.kernel(d, a), &c.kernel(d, b)));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The brick's overlap between two Z₂-kernels is 1 − TV of the
    /// explicit kernels.
    #[test]
    fn brick_overlap_is_one_minus_total_variation(a in 0u64..3125, b in 0u64..3125) {
        let brick = quartic_brick();
        let (ka, kb) = (brick.kernel_2(a), brick.kernel_2(b));
        prop_assert_eq!(brick.overlap(a, b), BigRational::one() - total_variation(&ka, &kb));
        if brick.f(a) != brick.f(b) {
            prop_assert!(brick.overlap(a, b) <= brick.alpha());
        }
    }
}

fn quartic_brick() -> &'static StrongBrick {
    use std::sync::OnceLock;
    static BRICK: OnceLock<StrongBrick> = OnceLock::new();
    BRICK.get_or_init(|| {
        StrongBrick::assemble(family_by_name("quartic", 5, Mode::Materialized).unwrap(), DEFAULT_BUDGET, Execution::Parallel)
            .unwrap()
    })
}

/// Under independent copies, P[Z′ ≠ Z″ at every even level] stays above
/// (1 − |E_n|⁻¹) · Π γ_k with γ_k = 1 − α_k.
#[test]
fn large_sets_recursion_under_independent_copies() {
    let chain = GluedChain::build("quartic", 5, 2, GlueMode::ConstantQ, Mode::Materialized, DEFAULT_BUDGET, Execution::Parallel)
        .unwrap();
    let run = run_coupling(
        &chain,
        &Coupler::IndependentProduct,
        StartMode::Independent { depth: None },
        20_000,
        11,
        PairScope::Auto { budget: 1 << 12, sample: 256, seed: 11 },
        Execution::Parallel,
    )
    .unwrap();
    let gammas: Vec<BigRational> = chain.alphas().iter().map(|a| BigRational::one() - a).collect();
    let rows = large_sets_check(&chain, &run, &[0, 2, 4], &[gammas[0].clone(), gammas[1].clone()]);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_ne!(r.status, BoundStatus::Violation, "{r:?}");
    }
}
