use std::collections::BTreeSet;

use itertools::Itertools;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::game::{GameError, PlayerSet, SimpleGame};
use crate::trade::TernaryVector;

pub const RELATIONS_PLAYER_CAP: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(
        "Sylvester exponent {0}: only 3 and 4 are supported (order-4 rows can miss each other)"
    )]
    HadamardOrder(usize),
    #[error("cyclic pattern is empty")]
    EmptyPattern,
    #[error("projective parameters q={q}, dim={dim}: supported are q in {{2,3}} with dim 2")]
    ProjectiveParams { q: usize, dim: usize },
    #[error("the two-or-three construction needs at least 5 players, got {0}")]
    TooFewPlayers(usize),
    #[error("relation search needs at most {cap} weights, got {n}")]
    SizeCap { n: usize, cap: usize },
    #[error("weight {0} is zero; all weights must be positive")]
    ZeroWeight(usize),
    #[error("the weight vector does not satisfy the order-{0} relation conditions")]
    NotFishburn(usize),
    #[error("coalition {0} sits on the threshold but is not a designated pair member")]
    ThresholdCollision(PlayerSet),
    #[error("threshold {0} must exceed twice the total weight {1}")]
    ThresholdTooSmall(u64, u64),
}

/// The seven lines of the smallest projective plane as minimal winning
/// coalitions.
pub fn fano() -> SimpleGame {
    let lines = [
        [1, 2, 3],
        [3, 4, 5],
        [1, 5, 6],
        [1, 4, 7],
        [2, 5, 7],
        [3, 6, 7],
        [2, 4, 6],
    ];
    SimpleGame::new(
        7,
        lines
            .iter()
            .map(|l| PlayerSet::from_players(l.iter().copied()))
            .collect(),
    )
    .unwrap()
}

fn sylvester(k: usize) -> Vec<Vec<i8>> {
    let mut h = vec![vec![1i8]];
    for _ in 0..k {
        let m = h.len();
        let mut next = vec![vec![0i8; 2 * m]; 2 * m];
        for i in 0..m {
            for j in 0..m {
                next[i][j] = h[i][j];
                next[i][j + m] = h[i][j];
                next[i + m][j] = h[i][j];
                next[i + m][j + m] = -h[i][j];
            }
        }
        h = next;
    }
    h
}

/// Game on 2^k - 1 players whose minimal winning coalitions are the
/// positive parts of the non-leading rows of the Sylvester matrix of
/// order 2^k, after stripping the all-ones row and column.
pub fn hadamard_game(k: usize) -> Result<SimpleGame, ConstructError> {
    if !(3..=4).contains(&k) {
        return Err(ConstructError::HadamardOrder(k));
    }
    let h = sylvester(k);
    let order = h.len();
    let n = order - 1;
    let rows: Vec<PlayerSet> = (1..order)
        .map(|r| PlayerSet::from_players((1..order).filter(|&j| h[r][j] == 1)))
        .collect();
    Ok(SimpleGame::from_winning_family(n, rows)?)
}

fn shift(pattern: PlayerSet, s: usize, n: usize) -> PlayerSet {
    PlayerSet::from_players(pattern.players().map(|p| (p - 1 + s) % n + 1))
}

/// Antichain reduction of the n cyclic shifts of the pattern.
pub fn cyclic_game(pattern: PlayerSet, n: usize) -> Result<SimpleGame, ConstructError> {
    if pattern.is_empty() {
        return Err(ConstructError::EmptyPattern);
    }
    if n == 0 || n > 32 {
        return Err(ConstructError::Game(GameError::PlayerCount(n)));
    }
    if pattern.bits() >> n != 0 {
        return Err(ConstructError::Game(GameError::PlayerOutOfRange(
            pattern, n,
        )));
    }
    let shifts: Vec<PlayerSet> = (0..n).map(|s| shift(pattern, s, n)).collect();
    Ok(SimpleGame::from_winning_family(n, shifts)?)
}

/// Perfect difference set: all nonzero residues arise exactly once as a
/// difference of two elements.
fn is_difference_set(d: &[usize], m: usize) -> bool {
    let mut seen = vec![false; m];
    seen[0] = true;
    for (i, &a) in d.iter().enumerate() {
        for (j, &b) in d.iter().enumerate() {
            if i == j {
                continue;
            }
            let diff = (a + m - b) % m;
            if seen[diff] {
                return false;
            }
            seen[diff] = true;
        }
    }
    seen.iter().all(|&s| s)
}

/// Projective plane game of order q: q^2+q+1 players, the lines as minimal
/// winning coalitions. Lines are the cyclic translates of the
/// lexicographically least perfect difference set modulo q^2+q+1.
pub fn projective_game(q: usize, dim: usize) -> Result<SimpleGame, ConstructError> {
    if !(q == 2 || q == 3) || dim != 2 {
        return Err(ConstructError::ProjectiveParams { q, dim });
    }
    let m = q * q + q + 1;
    let base = (0..m)
        .combinations(q + 1)
        .find(|d| is_difference_set(d, m))
        .expect("a difference set exists for prime q");
    let lines: Vec<PlayerSet> = (0..m)
        .map(|i| PlayerSet::from_players(base.iter().map(|&r| (r + i) % m + 1)))
        .collect();
    let g = SimpleGame::new(m, lines)?;
    assert_eq!(g.min_winning().len(), m);
    Ok(g)
}

/// Minimal winning coalitions {1,2}, {3,4,5}, and every 4-subset containing
/// neither.
pub fn gn2_game(n: usize) -> Result<SimpleGame, ConstructError> {
    if n < 5 {
        return Err(ConstructError::TooFewPlayers(n));
    }
    if n > 32 {
        return Err(ConstructError::Game(GameError::PlayerCount(n)));
    }
    let two = PlayerSet::from_players([1, 2]);
    let three = PlayerSet::from_players([3, 4, 5]);
    let mut family = vec![two, three];
    for quad in (1..=n).combinations(4) {
        let s = PlayerSet::from_players(quad);
        if !two.is_subset(s) && !three.is_subset(s) {
            family.push(s);
        }
    }
    Ok(SimpleGame::from_winning_family(n, family)?)
}

/// Six-player constant-sum fixture: the six listed triples plus the four
/// complementary completions, with every larger coalition winning.
pub fn example2_game() -> SimpleGame {
    let listed = [
        [1, 2, 4],
        [1, 3, 6],
        [2, 3, 5],
        [1, 4, 5],
        [2, 5, 6],
        [3, 4, 6],
    ];
    let mut winning: Vec<PlayerSet> = listed
        .iter()
        .map(|t| PlayerSet::from_players(t.iter().copied()))
        .collect();
    let mut decided: BTreeSet<PlayerSet> = winning.iter().copied().collect();
    for t in winning.clone() {
        decided.insert(t.complement(6));
    }
    // complete the remaining complementary pairs: the lexicographically
    // least representative of each undecided pair loses, its complement wins
    for triple in (1..=6).combinations(3) {
        let s = PlayerSet::from_players(triple);
        if !decided.contains(&s) {
            winning.push(s.complement(6));
            decided.insert(s);
            decided.insert(s.complement(6));
        }
    }
    for quad in (1..=6).combinations(4) {
        winning.push(PlayerSet::from_players(quad));
    }
    SimpleGame::from_winning_family(6, winning).unwrap()
}

/// Six-player fixture that is not roughly weighted; its shortest potent
/// certificate has length 7.
pub fn example_proper6_game() -> SimpleGame {
    let triples = [[1, 2, 3], [3, 4, 5], [1, 5, 6], [2, 4, 6], [1, 2, 6]];
    SimpleGame::new(
        6,
        triples
            .iter()
            .map(|t| PlayerSet::from_players(t.iter().copied()))
            .collect(),
    )
    .unwrap()
}

fn dot(v: &TernaryVector, w: &[u64]) -> i128 {
    (0..w.len()).map(|i| v.get(i) as i128 * w[i] as i128).sum()
}

/// All ternary vectors orthogonal to w, one per sign class. The class
/// representatives are re-oriented toward a zero total sum when some
/// orientation achieves it, then sorted lexicographically descending.
pub fn find_relations(w: &[u64]) -> Result<Vec<TernaryVector>, ConstructError> {
    let n = w.len();
    if n > RELATIONS_PLAYER_CAP {
        return Err(ConstructError::SizeCap {
            n,
            cap: RELATIONS_PLAYER_CAP,
        });
    }
    let mut found: Vec<TernaryVector> = Vec::new();
    for code in 1..3usize.pow(n as u32) {
        let mut digits = Vec::with_capacity(n);
        let mut x = code;
        for _ in 0..n {
            digits.push([0i8, 1, -1][x % 3]);
            x /= 3;
        }
        match digits.iter().find(|&&d| d != 0) {
            Some(1) => {}
            _ => continue,
        }
        let v = TernaryVector::new(digits);
        if dot(&v, w) == 0 {
            found.push(v);
        }
    }
    let k = found.len();
    if (1..=16).contains(&k) {
        'orient: for m in 0..1u32 << (k - 1) {
            let signs: Vec<i8> = (0..k)
                .map(|i| {
                    if i == 0 || (m >> (k - 1 - i)) & 1 == 0 {
                        1
                    } else {
                        -1
                    }
                })
                .collect();
            for p in 0..n {
                let s: i64 = (0..k)
                    .map(|i| signs[i] as i64 * found[i].get(p) as i64)
                    .sum();
                if s != 0 {
                    continue 'orient;
                }
            }
            for (i, v) in found.iter_mut().enumerate() {
                if signs[i] == -1 {
                    *v = v.negate();
                }
            }
            break;
        }
    }
    found.sort_by(|a, b| b.cmp(a));
    Ok(found)
}

fn rank_of(vectors: &[&TernaryVector], n: usize) -> usize {
    let mut rows: Vec<Vec<BigRational>> = vectors
        .iter()
        .map(|v| {
            (0..n)
                .map(|i| BigRational::from_integer(v.get(i).into()))
                .collect()
        })
        .collect();
    let mut rank = 0;
    for col in 0..n {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        for r in rank + 1..rows.len() {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = &rows[r][col] / &rows[rank][col];
            for c in col..n {
                let sub = &factor * &rows[rank][c];
                rows[r][c] = &rows[r][c] - &sub;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// True iff w has exactly k relations, some orientation of them sums to
/// zero, and every proper subset is linearly independent.
pub fn check_fishburn(w: &[u64], k: usize) -> Result<bool, ConstructError> {
    let relations = find_relations(w)?;
    if k == 0 || relations.len() != k {
        return Ok(false);
    }
    let n = w.len();
    for p in 0..n {
        let s: i64 = relations.iter().map(|v| v.get(p) as i64).sum();
        if s != 0 {
            return Ok(false);
        }
    }
    for skip in 0..k {
        let sub: Vec<&TernaryVector> = relations
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .map(|(_, v)| v)
            .collect();
        if rank_of(&sub, n) != k - 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector {
    pub weights: Vec<u64>,
    pub relations: Vec<TernaryVector>,
}

impl WeightVector {
    pub fn new(weights: Vec<u64>) -> Result<Self, ConstructError> {
        if let Some(i) = weights.iter().position(|&w| w == 0) {
            return Err(ConstructError::ZeroWeight(i + 1));
        }
        let relations = find_relations(&weights)?;
        Ok(WeightVector { weights, relations })
    }

    pub fn total(&self) -> u64 {
        self.weights.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FishburnSystem {
    pub weight_vector: WeightVector,
    pub k: usize,
}

impl FishburnSystem {
    pub fn new(weight_vector: WeightVector, k: usize) -> Result<Self, ConstructError> {
        if !check_fishburn(&weight_vector.weights, k)? {
            return Err(ConstructError::NotFishburn(k));
        }
        Ok(FishburnSystem { weight_vector, k })
    }

    /// Weight shared by the two sides of relation i.
    pub fn section_weight(&self, i: usize) -> u64 {
        let v = &self.weight_vector.relations[i];
        v.positive_support()
            .players()
            .map(|p| self.weight_vector.weights[p - 1])
            .sum()
    }
}

/// Doubled game on n+k players with the default threshold 2*w(P)+1.
pub fn doubling_game(f: &FishburnSystem) -> Result<SimpleGame, ConstructError> {
    doubling_game_with_threshold(f, 2 * f.weight_vector.total() + 1)
}

/// Adds one heavy player per relation, weighted to put exactly the pairs
/// X_i + heavy_i (winning) and Y_i + heavy_i (losing) on the threshold;
/// everything else is decided by weight alone. The exhaustive threshold
/// sweep rejects weight vectors whose section weights collide with other
/// coalitions.
pub fn doubling_game_with_threshold(
    f: &FishburnSystem,
    threshold: u64,
) -> Result<SimpleGame, ConstructError> {
    let n = f.weight_vector.weights.len();
    let k = f.k;
    let total = n + k;
    if total > 32 {
        return Err(ConstructError::Game(GameError::PlayerCount(total)));
    }
    let grand = f.weight_vector.total();
    if threshold <= 2 * grand {
        return Err(ConstructError::ThresholdTooSmall(threshold, grand));
    }
    let mut weights = f.weight_vector.weights.clone();
    for i in 0..k {
        weights.push(threshold - f.section_weight(i));
    }
    let mut on_winning: BTreeSet<u32> = BTreeSet::new();
    let mut on_losing: BTreeSet<u32> = BTreeSet::new();
    for (i, v) in f.weight_vector.relations.iter().enumerate() {
        let heavy = PlayerSet::singleton(n + 1 + i);
        on_winning.insert(v.positive_support().union(heavy).bits());
        on_losing.insert(v.negative_support().union(heavy).bits());
    }
    let mut wsum = vec![0u64; 1 << total];
    for s in 1usize..1 << total {
        let low = s.trailing_zeros() as usize;
        wsum[s] = wsum[s & (s - 1)] + weights[low];
    }
    let mut winning = Vec::new();
    for s in 0u32..1 << total {
        let w = wsum[s as usize];
        if w > threshold {
            winning.push(PlayerSet::from_bits(s));
        } else if w == threshold {
            if on_winning.contains(&s) {
                winning.push(PlayerSet::from_bits(s));
            } else if !on_losing.contains(&s) {
                return Err(ConstructError::ThresholdCollision(PlayerSet::from_bits(s)));
            }
        }
    }
    Ok(SimpleGame::from_winning_family(total, winning)?)
}
