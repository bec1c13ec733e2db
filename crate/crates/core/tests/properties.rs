use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sg_core::{
    check_rough, check_weighted, compute_f, compute_g, cyclic_game, el_from_potent,
    enumerate_games, fano, gn2_game, hadamard_game, ideal_members, is_ideal, normalize_witness,
    parse_certificate, parse_game, parse_representation, print_certificate, print_game,
    print_representation, projective_game, repair_nonnegative, validate_transform, vector_of_pair,
    verify_certificate, verify_representation, violates_at_least_half, witness_to_certificate,
    Certificate, ClassFilter, ELSequence, Flavor, IdealRestriction, PlayerSet, Representation,
    SearchValue, SimpleGame, TradingTransform, WeightVector,
};

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn all_games_through(n_max: usize) -> Vec<SimpleGame> {
    (1..=n_max)
        .flat_map(|n| enumerate_games(n, ClassFilter::NONE).unwrap())
        .collect()
}

fn antichain_key(g: &SimpleGame) -> Vec<u32> {
    let mut key: Vec<u32> = g.min_winning().iter().map(|s| s.bits()).collect();
    key.sort();
    key
}

proptest! {
    #[test]
    fn winning_family_construction_is_idempotent(
        n in 1usize..=8,
        raw in proptest::collection::vec(1u32..256, 1..8),
    ) {
        let full = (1u32 << n) - 1;
        let family: Vec<PlayerSet> = raw
            .iter()
            .map(|&m| PlayerSet::from_bits(m & full))
            .collect();
        prop_assume!(family.iter().all(|s| !s.is_empty()));
        let g = SimpleGame::from_winning_family(n, family).unwrap();
        let again =
            SimpleGame::from_winning_family(n, g.min_winning().to_vec()).unwrap();
        prop_assert_eq!(&again, &g);
        let validated = SimpleGame::new(n, g.min_winning().to_vec()).unwrap();
        prop_assert_eq!(&validated, &g);
    }

    #[test]
    fn transform_validity_agrees_with_pair_vector_sums(
        n in 2usize..=8,
        pairs in proptest::collection::vec((0u32..256, 0u32..256), 1..=6),
    ) {
        let full = (1u32 << n) - 1;
        let winners: Vec<PlayerSet> =
            pairs.iter().map(|&(w, _)| PlayerSet::from_bits(w & full)).collect();
        let losers: Vec<PlayerSet> =
            pairs.iter().map(|&(_, l)| PlayerSet::from_bits(l & full)).collect();
        let t = TradingTransform::new(&winners, &losers).unwrap();
        let mut sums = vec![0i32; n];
        for (&x, &y) in winners.iter().zip(&losers) {
            for (i, c) in vector_of_pair(x, y, n).coords().iter().enumerate() {
                sums[i] += *c as i32;
            }
        }
        prop_assert_eq!(validate_transform(&t), sums.iter().all(|&s| s == 0));
    }

    #[test]
    fn relation_vectors_are_orthogonal_to_the_weights(
        weights in proptest::collection::vec(1u64..=12, 2..=7),
    ) {
        let wv = WeightVector::new(weights.clone()).unwrap();
        for v in &wv.relations {
            let dot: i64 = v
                .coords()
                .iter()
                .zip(&weights)
                .map(|(&c, &w)| c as i64 * w as i64)
                .sum();
            prop_assert_eq!(dot, 0);
            prop_assert!(!v.is_zero());
            prop_assert!(!wv.relations.contains(&v.negate()));
        }
    }

    #[test]
    fn game_files_round_trip(
        n in 1usize..=8,
        raw in proptest::collection::vec(1u32..256, 1..8),
    ) {
        let full = (1u32 << n) - 1;
        let family: Vec<PlayerSet> = raw
            .iter()
            .map(|&m| PlayerSet::from_bits(m & full))
            .collect();
        prop_assume!(family.iter().all(|s| !s.is_empty()));
        let g = SimpleGame::from_winning_family(n, family).unwrap();
        prop_assert_eq!(parse_game(&print_game(&g)).unwrap(), g);
    }

    #[test]
    fn representation_files_round_trip(
        numers in proptest::collection::vec(-20i64..=20, 1..=6),
        denoms in proptest::collection::vec(1i64..=9, 1..=6),
        qn in -20i64..=20,
        qd in 1i64..=9,
        rough in proptest::bool::ANY,
    ) {
        let weights: Vec<BigRational> = numers
            .iter()
            .zip(denoms.iter().cycle())
            .map(|(&p, &q)| rat(p) / rat(q))
            .collect();
        let rep = Representation {
            weights,
            quota: rat(qn) / rat(qd),
            flavor: if rough { Flavor::Rough } else { Flavor::Weighted },
        };
        prop_assert_eq!(parse_representation(&print_representation(&rep)).unwrap(), rep);
    }

    #[test]
    fn certificate_files_round_trip(
        n in 1usize..=8,
        pairs in proptest::collection::vec((0u32..256, 0u32..256), 1..=6),
        potent in proptest::bool::ANY,
    ) {
        let full = (1u32 << n) - 1;
        let winners: Vec<PlayerSet> =
            pairs.iter().map(|&(w, _)| PlayerSet::from_bits(w & full)).collect();
        let losers: Vec<PlayerSet> =
            pairs.iter().map(|&(_, l)| PlayerSet::from_bits(l & full)).collect();
        let c = Certificate::new(TradingTransform::new(&winners, &losers).unwrap(), potent);
        let back = parse_certificate(&print_certificate(&c)).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn clamping_negative_weights_preserves_the_represented_game(
        weights in proptest::collection::vec(-3i64..=6, 2..=4),
        quota in 1i64..=8,
    ) {
        let n = weights.len();
        let score = |m: u32| -> i64 {
            (0..n).filter(|&i| m >> i & 1 == 1).map(|i| weights[i]).sum()
        };
        let full = (1u32 << n) - 1;
        let monotone = (0..=full).all(|m| {
            score(m) < quota
                || (0..n as u32).all(|i| m >> i & 1 == 1 || score(m | 1 << i) >= quota)
        });
        prop_assume!(monotone);
        prop_assume!(score(full) >= quota);
        let family: Vec<PlayerSet> = (1..=full)
            .filter(|&m| score(m) >= quota)
            .map(PlayerSet::from_bits)
            .collect();
        let g = SimpleGame::from_winning_family(n, family).unwrap();
        let free_sign: Vec<BigRational> = weights.iter().map(|&w| rat(w)).collect();
        let clamped = Representation {
            weights: repair_nonnegative(&free_sign),
            quota: rat(quota),
            flavor: Flavor::Weighted,
        };
        prop_assert_eq!(verify_representation(&g, &clamped), Ok(true));
    }
}

#[test]
fn is_winning_is_monotone_on_all_small_games() {
    for g in all_games_through(5) {
        let n = g.n();
        let table = g.winning_table();
        for m in 0..1u32 << n {
            if !table[m as usize] {
                continue;
            }
            for i in 0..n as u32 {
                assert!(table[(m | 1 << i) as usize], "adding a player lost {m:b}");
            }
        }
    }
}

#[test]
fn dual_is_an_involution_that_swaps_proper_with_strong() {
    for n in 1..=5 {
        let games = enumerate_games(n, ClassFilter::NONE).unwrap();
        let keys: BTreeSet<Vec<u32>> = games.iter().map(antichain_key).collect();
        for g in &games {
            let dual = g.dual();
            assert!(keys.contains(&antichain_key(&dual)), "dual left the set");
            assert_eq!(dual.dual(), *g);
            let c = g.classify();
            let cd = dual.classify();
            assert_eq!(cd.proper, c.strong);
            assert_eq!(cd.strong, c.proper);
            assert_eq!(cd.constant_sum, c.constant_sum);
        }
    }
}

#[test]
fn constant_sum_games_win_exactly_half_of_all_coalitions() {
    for n in 1..=6 {
        for g in enumerate_games(n, ClassFilter::constant_sum()).unwrap() {
            assert_eq!(g.winning_count(), 1 << (n - 1));
        }
    }
}

#[test]
fn pair_vectors_form_an_ideal_on_small_games() {
    for g in all_games_through(4) {
        let members = ideal_members(&g, IdealRestriction::All).unwrap();
        assert!(is_ideal(members.iter(), g.n()));
    }
}

/// One pass over every game with up to five players: the solver must commit
/// to exactly one branch per flavor, the returned object must survive the
/// independent checker, and the capped searches must reach the same verdict.
#[test]
fn lp_branches_reverify_and_match_the_search_decisions() {
    for g in all_games_through(5) {
        let weighted = match check_weighted(&g).unwrap() {
            sg_core::CheckResult::Representation(rep) => {
                assert_eq!(rep.flavor, Flavor::Weighted);
                assert_eq!(verify_representation(&g, &rep), Ok(true));
                let scaled = Representation {
                    weights: rep.weights.iter().map(|w| w * rat(3) / rat(2)).collect(),
                    quota: &rep.quota * rat(3) / rat(2),
                    flavor: rep.flavor,
                };
                assert_eq!(verify_representation(&g, &scaled), Ok(true));
                true
            }
            sg_core::CheckResult::Witness(w) => {
                assert!(w.is_consistent());
                assert!(w.slack.iter().all(|&u| u == 0));
                assert!(w.total_multiplicity() >= 2);
                assert!(verify_certificate(&g, &witness_to_certificate(&g, &w)).unwrap());
                false
            }
        };
        match compute_f(&g, 2).unwrap() {
            SearchValue::Unbounded => assert!(weighted),
            SearchValue::Exact { value, certificate } => {
                assert!(!weighted);
                assert_eq!(value, 2);
                assert!(verify_certificate(&g, &certificate).unwrap());
            }
            SearchValue::AtLeast(_) => panic!("no five-player game has f above two"),
        }
        if weighted {
            continue;
        }
        let rough = match check_rough(&g).unwrap() {
            sg_core::CheckResult::Representation(rep) => {
                assert_eq!(rep.flavor, Flavor::Rough);
                assert_eq!(verify_representation(&g, &rep), Ok(true));
                true
            }
            sg_core::CheckResult::Witness(w) => {
                assert!(w.is_consistent());
                assert!(w.slack.iter().all(|&u| u >= 1));
                let cert = normalize_witness(&g, &w);
                assert!(cert.potent);
                assert!(verify_certificate(&g, &cert).unwrap());
                false
            }
        };
        match compute_g(&g, 3).unwrap() {
            SearchValue::Unbounded => assert!(rough),
            SearchValue::AtLeast(_) => assert!(!rough),
            SearchValue::Exact { .. } => panic!("no five-player game has g at most three"),
        }
    }
}

#[test]
fn f_stays_below_g_on_games_failing_both_checks() {
    for g in enumerate_games(5, ClassFilter::NONE).unwrap() {
        if check_rough(&g).unwrap().representation().is_some() {
            continue;
        }
        let f = compute_f(&g, 20).unwrap().finite().unwrap();
        let gv = compute_g(&g, 20).unwrap().finite().unwrap();
        assert!(f >= 2);
        assert!(f <= gv - 1, "f={f} g={gv} on {:?}", g.min_winning());
    }
}

#[test]
fn rough_weightedness_and_measures_are_dual_invariant() {
    for g in all_games_through(4) {
        let dual = g.dual();
        let rough = check_rough(&g).unwrap().representation().is_some();
        assert_eq!(
            check_rough(&dual).unwrap().representation().is_some(),
            rough
        );
        assert_eq!(
            compute_f(&g, 6).unwrap().finite(),
            compute_f(&dual, 6).unwrap().finite()
        );
    }
    let games = enumerate_games(5, ClassFilter::NONE).unwrap();
    for g in games.iter().step_by(20) {
        let dual = g.dual();
        let rough = check_rough(g).unwrap().representation().is_some();
        assert_eq!(
            check_rough(&dual).unwrap().representation().is_some(),
            rough
        );
        assert_eq!(
            compute_f(g, 6).unwrap().finite(),
            compute_f(&dual, 6).unwrap().finite()
        );
        if !rough {
            assert_eq!(
                compute_g(g, 20).unwrap().finite(),
                compute_g(&dual, 20).unwrap().finite()
            );
        }
    }
}

fn random_el_sequence(g: &SimpleGame, rng: &mut ChaCha8Rng) -> ELSequence {
    let n = g.n();
    let degree = rng.gen_range(1..=6);
    let minwin = g.min_winning();
    let max_lose = g.maximal_losing();
    let winning = (0..degree)
        .map(|_| {
            let seed = minwin[rng.gen_range(0..minwin.len())];
            let extra = PlayerSet::from_bits(rng.gen_range(0..1u32 << n));
            seed.union(extra)
        })
        .collect();
    let blocking = (0..degree)
        .map(|_| {
            let outer = max_lose[rng.gen_range(0..max_lose.len())];
            let keep = PlayerSet::from_bits(rng.gen_range(0..1u32 << n));
            outer.intersection(keep).complement(n)
        })
        .collect();
    ELSequence::new(winning, blocking).unwrap()
}

#[test]
fn small_degree_el_sequences_never_violate_on_roughly_weighted_games() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for g in all_games_through(4) {
        for _ in 0..30 {
            let z = random_el_sequence(&g, &mut rng);
            assert!(!violates_at_least_half(&g, &z).unwrap());
        }
    }
    let games = enumerate_games(5, ClassFilter::NONE).unwrap();
    for g in games.iter().step_by(37) {
        if check_rough(g).unwrap().representation().is_none() {
            continue;
        }
        for _ in 0..30 {
            let z = random_el_sequence(g, &mut rng);
            assert!(!violates_at_least_half(g, &z).unwrap());
        }
    }
}

#[test]
fn el_sequences_from_potent_certificates_do_violate() {
    let proper6 = sg_core::example_proper6_game();
    for g in [fano(), gn2_game(5).unwrap(), proper6] {
        let w = check_rough(&g).unwrap().witness().unwrap().clone();
        let cert = normalize_witness(&g, &w);
        let z = el_from_potent(&g, &cert).unwrap();
        assert!(violates_at_least_half(&g, &z).unwrap());
    }
}

fn rotations(pattern: PlayerSet, n: usize) -> Vec<PlayerSet> {
    (0..n)
        .map(|r| PlayerSet::from_players(pattern.players().map(|p| (p - 1 + r) % n + 1)))
        .collect()
}

#[test]
fn proper_cyclic_games_with_short_patterns_fail_via_the_rotation_transform() {
    let mut proper_cases = 0;
    for n in 3..=9usize {
        for bits in 1..1u32 << n {
            let k = bits.count_ones() as usize;
            if 2 * k >= n {
                continue;
            }
            let pattern = PlayerSet::from_bits(bits);
            let g = cyclic_game(pattern, n).unwrap();
            if !g.classify().proper {
                continue;
            }
            proper_cases += 1;
            let rots = rotations(pattern, n);
            let mut winners = rots.clone();
            let mut losers: Vec<PlayerSet> = rots.iter().map(|r| r.complement(n)).collect();
            for _ in 0..n - 2 * k {
                winners.push(PlayerSet::full(n));
                losers.push(PlayerSet::EMPTY);
            }
            let cert = Certificate::new(TradingTransform::new(&winners, &losers).unwrap(), true);
            assert_eq!(cert.length(), (2 * (n - k)) as u64);
            assert!(
                verify_certificate(&g, &cert).unwrap(),
                "n={n} bits={bits:b}"
            );
            assert!(check_rough(&g).unwrap().representation().is_none());
        }
    }
    assert!(
        proper_cases >= 5,
        "sweep found only {proper_cases} proper cases"
    );
}

#[test]
fn hadamard_rows_pairwise_intersect() {
    for k in [3, 4] {
        let g = hadamard_game(k).unwrap();
        let rows = g.min_winning();
        for (i, &a) in rows.iter().enumerate() {
            for &b in &rows[i + 1..] {
                assert!(!a.intersection(b).is_empty());
            }
        }
    }
}

#[test]
fn projective_planes_satisfy_the_incidence_axioms() {
    for q in [2usize, 3] {
        let g = projective_game(q, 2).unwrap();
        let points = q * q + q + 1;
        let lines = g.min_winning();
        assert_eq!(lines.len(), points);
        for p in 1..=points {
            let through = lines.iter().filter(|l| l.contains(p)).count();
            assert_eq!(through, q + 1);
        }
        for a in 1..=points {
            for b in a + 1..=points {
                let joint = lines
                    .iter()
                    .filter(|l| l.contains(a) && l.contains(b))
                    .count();
                assert_eq!(joint, 1);
            }
        }
    }
}

#[test]
fn theorem_guards_imply_rough_weightedness_on_small_games() {
    for g in all_games_through(5) {
        let n = g.n();
        let class = g.classify();
        let special = g.find_special_players();
        let two_proper = class.proper && g.min_winning().iter().any(|s| s.len() <= 2);
        let strong_with_small_loss = n >= 2
            && class.strong
            && (0..1u32 << n)
                .any(|m| m.count_ones() as usize == n - 2 && g.is_losing(PlayerSet::from_bits(m)));
        let dictator_like = !special.weak_dictators.is_empty()
            || !special.vetoers.is_empty()
            || special.has_losing_n_minus_1;
        if two_proper || strong_with_small_loss || dictator_like {
            assert!(
                check_rough(&g).unwrap().representation().is_some(),
                "guard failed on {:?}",
                g.min_winning()
            );
        }
    }
}

#[test]
fn sampled_six_player_proper_games_with_a_winning_pair_are_roughly_weighted() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let mut found = 0;
    for _ in 0..400 {
        let mut family = vec![PlayerSet::from_players([1, 2])];
        for _ in 0..rng.gen_range(2..=6) {
            family.push(PlayerSet::from_bits(rng.gen_range(1..64u32)));
        }
        let g = SimpleGame::from_winning_family(6, family).unwrap();
        if !g.classify().proper {
            continue;
        }
        found += 1;
        assert!(
            check_rough(&g).unwrap().representation().is_some(),
            "counterexample: {:?}",
            g.min_winning()
        );
    }
    assert!(found >= 5, "sample produced only {found} proper games");
}

/// Layered reachability over coalition-sum states: W_j holds every vector
/// expressible as a sum of j winning characteristic vectors, L_j likewise
/// for losing ones, and a length-j transform exists exactly when they meet.
struct SumLayers {
    base: usize,
    n: usize,
}

impl SumLayers {
    fn new(n: usize, cap: u64) -> Self {
        SumLayers {
            base: cap as usize + 1,
            n,
        }
    }

    fn size(&self) -> usize {
        self.base.pow(self.n as u32)
    }

    fn pack(&self, mask: u32) -> usize {
        (0..self.n)
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| self.base.pow(i as u32))
            .sum()
    }

    fn step(&self, layer: &[bool], masks: &[u32]) -> Vec<bool> {
        let increments: Vec<usize> = masks.iter().map(|&m| self.pack(m)).collect();
        let mut next = vec![false; self.size()];
        let mut coords = vec![0usize; self.n];
        for idx in 0..self.size() {
            if layer[idx] {
                for (&m, &inc) in masks.iter().zip(&increments) {
                    let fits = (0..self.n).all(|i| m >> i & 1 == 0 || coords[i] + 1 < self.base);
                    if fits {
                        next[idx + inc] = true;
                    }
                }
            }
            for c in coords.iter_mut() {
                *c += 1;
                if *c < self.base {
                    break;
                }
                *c = 0;
            }
        }
        next
    }
}

fn naive_shortest(g: &SimpleGame, potent: bool, cap: u64) -> Option<u64> {
    let n = g.n();
    let table = g.winning_table();
    let winning: Vec<u32> = (0..1u32 << n).filter(|&m| table[m as usize]).collect();
    let losing: Vec<u32> = (0..1u32 << n).filter(|&m| !table[m as usize]).collect();
    let layers = SumLayers::new(n, cap);
    let full = (1u32 << n) - 1;
    let mut win_states = vec![false; layers.size()];
    let mut lose_states = vec![false; layers.size()];
    if potent {
        win_states[layers.pack(full)] = true;
        lose_states[0] = true;
    } else {
        win_states[0] = true;
        lose_states[0] = true;
    }
    let start = if potent { 1 } else { 0 };
    for j in start..=cap {
        if j > start {
            win_states = layers.step(&win_states, &winning);
            lose_states = layers.step(&lose_states, &losing);
        }
        if j >= 1 && win_states.iter().zip(&lose_states).any(|(&w, &l)| w && l) {
            return Some(j);
        }
    }
    None
}

#[test]
fn shortest_transforms_match_the_layered_state_oracle() {
    for g in all_games_through(4) {
        let naive = naive_shortest(&g, false, 6);
        match compute_f(&g, 6).unwrap() {
            SearchValue::Exact { value, .. } => assert_eq!(naive, Some(value)),
            _ => assert_eq!(naive, None),
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..200 {
        let size = rng.gen_range(1..=8);
        let family = (0..size)
            .map(|_| PlayerSet::from_bits(rng.gen_range(1..32u32)))
            .collect();
        let g = SimpleGame::from_winning_family(5, family).unwrap();
        let naive = naive_shortest(&g, false, 6);
        match compute_f(&g, 6).unwrap() {
            SearchValue::Exact { value, .. } => assert_eq!(naive, Some(value)),
            _ => assert_eq!(naive, None),
        }
    }
}

#[test]
fn shortest_potent_certificates_match_the_layered_state_oracle() {
    let g15 =
        parse_game("players: 5\nminwin: 1 2\nminwin: 1 3\nminwin: 2 3 4\nminwin: 4 5\n").unwrap();
    let g17 = parse_game(
        "players: 5\nminwin: 1 2\nminwin: 1 3\nminwin: 1 4\nminwin: 2 5\nminwin: 3 4 5\n",
    )
    .unwrap();
    for (g, expected) in [(gn2_game(5).unwrap(), 13), (g15, 15), (g17, 17)] {
        assert_eq!(naive_shortest(&g, true, expected), Some(expected));
        match compute_g(&g, expected).unwrap() {
            SearchValue::Exact { value, certificate } => {
                assert_eq!(value, expected);
                assert!(verify_certificate(&g, &certificate).unwrap());
            }
            other => panic!("expected g = {expected}, got {other:?}"),
        }
    }
}

#[test]
fn weighted_quotas_are_positive_and_cleared_by_the_grand_coalition() {
    for g in all_games_through(4) {
        if let Some(rep) = check_weighted(&g).unwrap().representation() {
            let total: BigRational = rep.weights.iter().fold(BigRational::zero(), |a, w| a + w);
            assert!(rep.quota > BigRational::zero());
            assert!(total >= rep.quota);
        }
    }
}
