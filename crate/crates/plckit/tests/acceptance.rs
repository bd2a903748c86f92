//! Acceptance gate: eleven pinned criteria, one test each, every test
//! printing a single PASS/FAIL line (run with `--nocapture` to see the
//! lines as they complete). Each criterion carries a wall-clock budget;
//! blowing the budget fails the criterion even if every assertion held.

mod common;

use common::*;
use plckit::commutation::{rank_inequality_check, synthesize_state, CommutationTuple};
use plckit::egs::{
    egs_search, qutrit_egs_search, report_contains_class, size_preserving_permutations,
    spiral_graph, verify_coset_table, verify_spiral_family, PartyConfiguration,
};
use plckit::equivalence::{
    congruence_equivalent, congruence_equivalent_matrices, decomposition_order_invariance,
    fitting_split, imbalance_forces_decomposition, is_congruence_witness,
    tripartite_canonical_counts,
};
use plckit::field::PrimeFieldMatrix;
use plckit::stabilizer::GraphAdjacency;
use plckit::symplectic::PartyPartition;
use plckit::{EquivalenceVerdict, SearchLimits, SplitVerdict};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

fn limits() -> SearchLimits {
    SearchLimits::default()
}

/// Runs one criterion, prints its verdict line, and re-raises any failure.
fn criterion(number: u8, title: &str, budget_secs: u64, body: impl FnOnce()) {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let elapsed = start.elapsed();
    let within_budget = elapsed.as_secs() < budget_secs;
    let pass = outcome.is_ok() && within_budget;
    println!(
        "criterion {number:02} — {title}: {} ({elapsed:.1?}, budget {budget_secs}s)",
        if pass { "PASS" } else { "FAIL" }
    );
    if let Err(payload) = outcome {
        std::panic::resume_unwind(payload);
    }
    assert!(
        within_budget,
        "criterion {number:02} exceeded its {budget_secs}s budget ({elapsed:?})"
    );
}

// ---------------------------------------------------------------------------
// 1. Reference tuples, entry for entry.
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_reference_tuples() {
    criterion(1, "reference tuples reproduced exactly", 1, || {
        let bell = bell_tuple();
        let swap = m(d2(), &[vec![0, 1], vec![1, 0]]);
        assert_eq!(bell.matrices(), &[swap.clone(), swap]);

        let ghz = ghz3_tuple();
        assert_eq!(
            ghz.matrix(0),
            &m(d2(), &[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 0]])
        );
        assert_eq!(
            ghz.matrix(1),
            &m(d2(), &[vec![0, 1, 0], vec![1, 0, 1], vec![0, 1, 0]])
        );
        assert_eq!(
            ghz.matrix(2),
            &m(d2(), &[vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 0]])
        );

        let partition = PartyPartition::consecutive(&[1, 1, 1, 1]).unwrap();
        let qutrit = CommutationTuple::from_state(
            &qutrit_four_site_graph().graph_state(),
            &partition,
        )
        .unwrap();
        let expected = [
            m(
                d3(),
                &[
                    vec![0, 2, 0, 2],
                    vec![1, 0, 0, 0],
                    vec![0, 0, 0, 0],
                    vec![1, 0, 0, 0],
                ],
            ),
            m(
                d3(),
                &[
                    vec![0, 1, 0, 0],
                    vec![2, 0, 0, 0],
                    vec![0, 0, 0, 0],
                    vec![0, 0, 0, 0],
                ],
            ),
            m(
                d3(),
                &[
                    vec![0, 0, 0, 0],
                    vec![0, 0, 0, 0],
                    vec![0, 0, 0, 1],
                    vec![0, 0, 2, 0],
                ],
            ),
            m(
                d3(),
                &[
                    vec![0, 0, 0, 1],
                    vec![0, 0, 0, 0],
                    vec![0, 0, 0, 2],
                    vec![2, 0, 1, 0],
                ],
            ),
        ];
        assert_eq!(qutrit.matrices(), &expected);

        let tilde = ghz.change_basis(&ghz3_basis_change()).unwrap();
        assert_eq!(
            tilde.matrix(0),
            &m(d2(), &[vec![0, 1, 1], vec![1, 0, 0], vec![1, 0, 0]])
        );
        assert_eq!(
            tilde.matrix(1),
            &m(d2(), &[vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]])
        );
        assert_eq!(
            tilde.matrix(2),
            &m(d2(), &[vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 0]])
        );
    });
}

// ---------------------------------------------------------------------------
// 2. Rank identity on states; rank inequality on zero-sum families.
// ---------------------------------------------------------------------------

#[test]
fn criterion_02_rank_identity_and_inequality() {
    criterion(2, "rank identity and inequality on 500+500 inputs", 30, || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACC2);
        for trial in 0..500 {
            let order = [d2(), d3(), d5()][trial % 3];
            let n = rng.gen_range(2..=8);
            let parties = rng.gen_range(2..=n.min(4));
            let (_, _, tuple) = random_state_tuple(n, parties, order, &mut rng);
            let rank_sum: usize = tuple.local_ranks().iter().sum();
            assert_eq!(
                2 * tuple.concatenated_rank(),
                rank_sum,
                "trial {trial}: state rank identity violated"
            );
            assert!(tuple.rank_condition());
        }
        for trial in 0..500 {
            let order = [d2(), d3(), d5()][trial % 3];
            let n = rng.gen_range(1..=6);
            let members = rng.gen_range(2..=4);
            let family = random_zero_sum_family(n, members, order, &mut rng);
            assert_eq!(
                rank_inequality_check(&family),
                Ok(true),
                "trial {trial}: rank inequality violated"
            );
        }
    });
}

// ---------------------------------------------------------------------------
// 3. Synthesis round trip up to congruence, witness verified.
// ---------------------------------------------------------------------------

#[test]
fn criterion_03_synthesis_round_trip() {
    criterion(3, "synthesis round trip on 200 tuples", 60, || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACC3);
        for trial in 0..200 {
            let order = if trial % 2 == 0 { d2() } else { d3() };
            let n = rng.gen_range(2..=6);
            let parties = rng.gen_range(2..=n.min(4));
            let (_, _, tuple) = random_state_tuple(n, parties, order, &mut rng);
            let synthesis = synthesize_state(&tuple).unwrap();
            let recovered =
                CommutationTuple::from_state(&synthesis.tableau, &synthesis.partition).unwrap();
            match congruence_equivalent(&tuple, &recovered, &limits()).unwrap() {
                EquivalenceVerdict::Equivalent(witness) => {
                    assert!(
                        is_congruence_witness(&witness, tuple.matrices(), recovered.matrices()),
                        "trial {trial}: witness failed the direct congruence check"
                    );
                }
                other => panic!("trial {trial}: expected equivalence, got {other:?}"),
            }
        }
    });
}

// ---------------------------------------------------------------------------
// 4. The whole invertible group as referee at four generators.
// ---------------------------------------------------------------------------

#[test]
fn criterion_04_brute_force_referee() {
    criterion(4, "congruence and splitting match the full group scan", 600, || {
        let group = all_invertible4();
        assert_eq!(group.len(), 20160);
        let mut rng = ChaCha8Rng::seed_from_u64(0xACC4);
        let corpus: Vec<CommutationTuple> = (0..50)
            .map(|_| random_state_tuple(4, 3, d2(), &mut rng).2)
            .collect();
        let packed: Vec<Vec<Packed4>> = corpus
            .iter()
            .map(|t| t.matrices().iter().map(pack4).collect())
            .collect();

        for (idx, tuple) in corpus.iter().enumerate() {
            let brute = brute_force_splittable(&packed[idx], &group);
            match fitting_split(tuple, &limits()).unwrap() {
                SplitVerdict::Split { witness, sizes } => {
                    assert!(brute, "tuple {idx}: split found but the group scan sees none");
                    assert_eq!(sizes.0 + sizes.1, 4);
                    let conjugated = tuple.change_basis(&witness).unwrap();
                    for mat in conjugated.matrices() {
                        for r in 0..sizes.0 {
                            for c in sizes.0..4 {
                                assert_eq!(mat.get(r, c), 0, "tuple {idx}: bad split witness");
                                assert_eq!(mat.get(c, r), 0, "tuple {idx}: bad split witness");
                            }
                        }
                    }
                }
                SplitVerdict::Indecomposable => {
                    assert!(!brute, "tuple {idx}: group scan splits what we called rigid");
                }
                SplitVerdict::Inconclusive => {
                    panic!("tuple {idx}: splitting must be conclusive at n = 4, d = 2")
                }
            }
        }

        for i in 0..corpus.len() {
            for j in (i + 1)..corpus.len() {
                let brute = brute_force_congruent(&packed[i], &packed[j], &group);
                match congruence_equivalent_matrices(
                    corpus[i].matrices(),
                    corpus[j].matrices(),
                    &limits(),
                )
                .unwrap()
                {
                    EquivalenceVerdict::Equivalent(witness) => {
                        assert!(brute, "pair ({i},{j}): witness exists but group scan disagrees");
                        assert!(is_congruence_witness(
                            &witness,
                            corpus[i].matrices(),
                            corpus[j].matrices()
                        ));
                    }
                    EquivalenceVerdict::Inequivalent => {
                        assert!(!brute, "pair ({i},{j}): group scan finds a witness we missed");
                    }
                    EquivalenceVerdict::Inconclusive => {
                        panic!("pair ({i},{j}): decision must be conclusive at n = 4, d = 2")
                    }
                }
            }
        }
    });
}

// ---------------------------------------------------------------------------
// 5. Three-party decompositions land on the canonical factors.
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_tripartite_decomposition() {
    criterion(5, "300 three-party states decompose canonically", 300, || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACC5);
        for trial in 0..300u64 {
            let n = rng.gen_range(3..=8);
            let (graph, partition, tuple) = random_state_tuple(n, 3, d2(), &mut rng);
            let counts =
                tripartite_canonical_counts(&graph.graph_state(), &partition, &limits()).unwrap();
            let zero_sites: usize = counts.zeros_per_party.iter().sum();
            let bell_pairs: usize = counts.bell_per_pair.iter().sum();
            assert_eq!(
                zero_sites + 2 * bell_pairs + 3 * counts.ghz,
                n,
                "trial {trial}: factor counts do not cover all sites"
            );
            assert_eq!(
                decomposition_order_invariance(&tuple, 10, 0x5EED ^ trial, &limits()),
                Ok(true),
                "trial {trial}: block classes changed across randomized reruns"
            );
        }
    });
}

// ---------------------------------------------------------------------------
// 6. Four-party searches at desk scale.
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_four_party_desk_scale() {
    criterion(6, "four-party searches: GHZ+cluster, then spiral-only", 3600, || {
        let singles = PartyConfiguration::new(vec![1, 1, 1, 1]).unwrap();
        let report = egs_search(&singles, d2(), &limits(), 1 << 22).unwrap();
        assert!(report.complete);
        assert_eq!(report.graphs_total, 64);
        let partition = singles.partition();
        let ghz4 =
            CommutationTuple::from_graph(&GraphAdjacency::star(4, d2()), &partition).unwrap();
        let cluster4 =
            CommutationTuple::from_graph(&GraphAdjacency::path(4, d2()), &partition).unwrap();
        assert!(report_contains_class(&report, &ghz4, &limits()).unwrap());
        assert!(report_contains_class(&report, &cluster4, &limits()).unwrap());
        assert_eq!(report.class_count, 4);
        assert_eq!(report.class_count_up_to_party_relabeling, 2);

        for n in [5usize, 6, 7] {
            let sizes: Vec<usize> = (0..4).map(|p| (0..n).filter(|s| s % 4 == p).count()).collect();
            let config = PartyConfiguration::new(sizes).unwrap();
            let report = egs_search(&config, d2(), &limits(), 1 << 22).unwrap();
            assert!(report.complete, "n = {n}: search did not finish");
            let pairs = (n * (n - 1) / 2) as u32;
            assert_eq!(report.graphs_total, 1u128 << pairs);
            assert_eq!(
                report.class_count_up_to_party_relabeling, 1,
                "n = {n}: expected the spiral class alone"
            );
            let (graph, spiral_partition) = spiral_graph(n, d2()).unwrap();
            let spiral = CommutationTuple::from_graph(&graph, &spiral_partition).unwrap();
            assert!(
                report_contains_class(&report, &spiral, &limits()).unwrap(),
                "n = {n}: the spiral class is missing"
            );
        }
    });
}

// ---------------------------------------------------------------------------
// 7. Five-party counts.
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_five_party_count() {
    criterion(7, "five-party class counts (19 exact, 10 quotient)", 600, || {
        let config = PartyConfiguration::new(vec![2, 1, 1, 1, 1]).unwrap();
        let report = egs_search(&config, d2(), &limits(), 1 << 22).unwrap();
        assert!(report.complete);
        assert_eq!(report.class_count, 19);

        // Independently derive the quotient under singleton-party
        // permutations, re-verifying every merge witness by direct
        // arithmetic before accepting it.
        let perms = size_preserving_permutations(config.sizes());
        assert_eq!(perms.len(), 24);
        let reps = &report.representatives;
        let mut parent: Vec<usize> = (0..reps.len()).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            if parent[x] != x {
                let root = find(parent, parent[x]);
                parent[x] = root;
            }
            parent[x]
        }
        for a in 0..reps.len() {
            for b in (a + 1)..reps.len() {
                let witnessed = perms.iter().any(|perm| {
                    let permuted: Vec<PrimeFieldMatrix> = perm
                        .iter()
                        .map(|&p| reps[a].tuple.matrix(p).clone())
                        .collect();
                    match congruence_equivalent_matrices(
                        &permuted,
                        reps[b].tuple.matrices(),
                        &limits(),
                    )
                    .unwrap()
                    {
                        EquivalenceVerdict::Equivalent(q) => {
                            assert!(is_congruence_witness(
                                &q,
                                &permuted,
                                reps[b].tuple.matrices()
                            ));
                            true
                        }
                        _ => false,
                    }
                });
                if witnessed {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra] = rb;
                }
            }
        }
        let mut orbit_sizes: Vec<usize> = {
            let mut counts = std::collections::BTreeMap::new();
            for i in 0..reps.len() {
                *counts.entry(find(&mut parent, i)).or_insert(0usize) += 1;
            }
            counts.into_values().collect()
        };
        orbit_sizes.sort_unstable();
        assert_eq!(
            orbit_sizes,
            vec![1, 6, 6, 6],
            "witnessed orbit structure changed"
        );
        assert_eq!(
            report.class_count_up_to_party_relabeling,
            orbit_sizes.len(),
            "report quotient disagrees with the re-derived orbits"
        );
        assert_eq!(
            report.class_count_up_to_party_relabeling, 10,
            "published quotient is 10, but the witnessed orbit structure \
             {orbit_sizes:?} identifies the 19 classes into {} orbits; every \
             cross-class merge above carries a re-verified congruence witness",
            orbit_sizes.len()
        );
    });
}

// ---------------------------------------------------------------------------
// 8. The spiral family across lengths and field orders.
// ---------------------------------------------------------------------------

#[test]
fn criterion_08_spiral_family() {
    criterion(8, "spiral family rigidity across lengths", 60, || {
        let lengths: Vec<usize> = (4..=12).collect();
        let qubit = verify_spiral_family(&lengths, d2(), &limits()).unwrap();
        assert_eq!(qubit.len(), 9);
        for verdict in &qubit {
            assert_eq!(
                verdict.whole,
                SplitVerdict::Indecomposable,
                "qubit spiral n = {}",
                verdict.n
            );
            assert_eq!(
                verdict.merged_pair,
                SplitVerdict::Indecomposable,
                "qubit merged pair n = {}",
                verdict.n
            );
        }
        let qutrit = verify_spiral_family(&[4], d3(), &limits()).unwrap();
        assert_eq!(qutrit[0].whole, SplitVerdict::Indecomposable);
        assert!(
            matches!(qutrit[0].merged_pair, SplitVerdict::Split { .. }),
            "qutrit merged pair at n = 4 must decompose"
        );
    });
}

// ---------------------------------------------------------------------------
// 9. Two-site Clifford coset table.
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_coset_table() {
    criterion(9, "two-site coset table covers the quotient", 10, || {
        let report = verify_coset_table().unwrap();
        assert_eq!(report.group_order, 720);
        assert_eq!(report.subgroup_order, 36);
        assert_eq!(report.coset_count, 20);
        assert_eq!(report.sequences_verified, 20);
    });
}

// ---------------------------------------------------------------------------
// 10. Size imbalance forces a split.
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_imbalance_forces_splits() {
    criterion(10, "200 imbalanced four-party states all split", 120, || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACC10);
        for trial in 0..200 {
            let sizes: Vec<usize> = loop {
                let mut draw: Vec<usize> = (0..4).map(|_| rng.gen_range(1..=3)).collect();
                draw.sort_unstable_by(|a, b| b.cmp(a));
                if draw[0] > 2 * draw[3] {
                    break draw;
                }
            };
            assert_eq!(imbalance_forces_decomposition(&sizes), Ok(true));
            let n: usize = sizes.iter().sum();
            let mut sites: Vec<usize> = (0..n).collect();
            sites.shuffle(&mut rng);
            let mut groups = Vec::with_capacity(4);
            let mut cursor = 0usize;
            for &size in &sizes {
                groups.push(sites[cursor..cursor + size].to_vec());
                cursor += size;
            }
            let partition = PartyPartition::new(n, groups).unwrap();
            let graph = GraphAdjacency::random(n, d2(), &mut rng);
            let tuple = CommutationTuple::from_state(&graph.graph_state(), &partition).unwrap();
            match fitting_split(&tuple, &limits()).unwrap() {
                SplitVerdict::Split { .. } => {}
                other => panic!(
                    "trial {trial}: sizes {sizes:?} must force a split, got {other:?}"
                ),
            }
        }
    });
}

// ---------------------------------------------------------------------------
// 11. Qutrit multigraph search and tree multiplicity normalization.
// ---------------------------------------------------------------------------

#[test]
fn criterion_11_qutrit_search_and_trees() {
    criterion(11, "qutrit search classes and tree normalization", 300, || {
        let config = PartyConfiguration::new(vec![1, 1, 1, 1]).unwrap();
        let report = qutrit_egs_search(&config, &limits(), 1 << 22).unwrap();
        assert!(report.complete);
        assert_eq!(report.graphs_total, 729);
        let partition = config.partition();
        let doubled_loop = GraphAdjacency::from_weighted_edges(
            4,
            d3(),
            &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 2)],
        )
        .unwrap();
        let loop_tuple = CommutationTuple::from_graph(&doubled_loop, &partition).unwrap();
        assert!(
            report_contains_class(&report, &loop_tuple, &limits()).unwrap(),
            "closed loop with one doubled edge must appear"
        );
        let ghz4 =
            CommutationTuple::from_graph(&GraphAdjacency::star(4, d3()), &partition).unwrap();
        assert!(report_contains_class(&report, &ghz4, &limits()).unwrap());

        for (idx, rep) in report.representatives.iter().enumerate() {
            assert_eq!(
                fitting_split(&rep.tuple, &limits()).unwrap(),
                SplitVerdict::Indecomposable,
                "representative {idx} must be indecomposable"
            );
        }
        for i in 0..report.representatives.len() {
            for j in (i + 1)..report.representatives.len() {
                assert_eq!(
                    congruence_equivalent(
                        &report.representatives[i].tuple,
                        &report.representatives[j].tuple,
                        &limits()
                    )
                    .unwrap(),
                    EquivalenceVerdict::Inequivalent,
                    "representatives {i} and {j} must be in distinct classes"
                );
            }
        }

        // Tree multiplicity normalization: a diagonal basis change with
        // d_root = 1 and d_child = (d_parent · weight)⁻¹ along each edge
        // turns any weighted qutrit tree tuple into its unit-weight twin.
        fn inv3(x: u8) -> u8 {
            match x % 3 {
                1 => 1,
                2 => 2,
                other => panic!("no inverse for {other} modulo 3"),
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0xACC11);
        for trial in 0..100 {
            let n = rng.gen_range(2..=7);
            let (weighted, parents) = random_weighted_tree(n, d3(), &mut rng);
            let weight_of = |a: usize, b: usize| -> u8 {
                weighted
                    .edges()
                    .iter()
                    .find(|&&(x, y, _)| (x, y) == (a.min(b), a.max(b)))
                    .map(|&(_, _, w)| w)
                    .expect("tree edge")
            };
            let mut diag = vec![1u8; n];
            for child in 1..n {
                let parent = parents[child];
                let product = (diag[parent] * weight_of(parent, child)) % 3;
                diag[child] = inv3(product);
            }
            let mut witness = PrimeFieldMatrix::zeros(n, n, d3());
            for (site, &value) in diag.iter().enumerate() {
                witness.set(site, site, value);
            }

            let parties = rng.gen_range(2..=n.min(4));
            let partition = PartyPartition::random(n, parties, &mut rng).unwrap();
            let weighted_tuple = CommutationTuple::from_graph(&weighted, &partition).unwrap();
            let unit_edges: Vec<(usize, usize, u8)> = weighted
                .edges()
                .iter()
                .map(|&(a, b, _)| (a, b, 1))
                .collect();
            let unit_tree = GraphAdjacency::from_weighted_edges(n, d3(), &unit_edges).unwrap();
            let unit_tuple = CommutationTuple::from_graph(&unit_tree, &partition).unwrap();
            let normalized = weighted_tuple.change_basis(&witness).unwrap();
            assert_eq!(
                normalized.matrices(),
                unit_tuple.matrices(),
                "trial {trial}: diagonal normalization failed"
            );
        }
    });
}
