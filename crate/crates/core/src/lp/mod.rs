pub mod simplex;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::game::{PlayerSet, SimpleGame};
use crate::trade::{vector_of_pair, Certificate, TernaryVector, TradingTransform};
use simplex::{phase1, Phase1Result, Relation, Row};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LpError {
    #[error("solver needs n <= {cap}, got {n}")]
    SizeCap { n: usize, cap: usize },
    #[error("weight for player {0} is negative")]
    NegativeWeight(usize),
    #[error("representation has {got} weights for a {expected}-player game")]
    LengthMismatch { got: usize, expected: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flavor {
    Weighted,
    Rough,
}

/// Weights plus quota, exact rationals throughout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Representation {
    pub weights: Vec<BigRational>,
    pub quota: BigRational,
    pub flavor: Flavor,
}

/// Nonnegative integer combination of ideal vectors witnessing
/// infeasibility: sum of r_i * v_i + u = 0, with u = 0 in the weighted
/// check and u >= 1 everywhere in the rough check.
#[derive(Clone, PartialEq, Eq)]
pub struct FarkasWitness {
    pub terms: Vec<(TernaryVector, u64)>,
    pub slack: Vec<u64>,
}

impl FarkasWitness {
    pub fn is_consistent(&self) -> bool {
        let n = self.slack.len();
        if self.terms.iter().any(|(v, _)| v.len() != n) {
            return false;
        }
        (0..n).all(|i| {
            let s: i128 = self
                .terms
                .iter()
                .map(|(v, r)| v.get(i) as i128 * *r as i128)
                .sum();
            s + self.slack[i] as i128 == 0
        })
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.terms.iter().map(|&(_, r)| r).sum()
    }
}

impl fmt::Debug for FarkasWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FarkasWitness(")?;
        for (i, (v, r)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{r}*{v:?}")?;
        }
        write!(f, ", u={:?})", self.slack)
    }
}

pub enum CheckResult {
    Representation(Representation),
    Witness(FarkasWitness),
}

impl CheckResult {
    pub fn representation(&self) -> Option<&Representation> {
        match self {
            CheckResult::Representation(r) => Some(r),
            CheckResult::Witness(_) => None,
        }
    }

    pub fn witness(&self) -> Option<&FarkasWitness> {
        match self {
            CheckResult::Representation(_) => None,
            CheckResult::Witness(w) => Some(w),
        }
    }
}

const N_CAP: usize = 20;

/// Weight of every coalition, indexed by bitmask.
fn coalition_weights(weights: &[BigRational], n: usize) -> Vec<BigRational> {
    let mut w = vec![BigRational::zero(); 1 << n];
    for s in 1usize..1 << n {
        let low = s.trailing_zeros() as usize;
        w[s] = &w[s & (s - 1)] + &weights[low];
    }
    w
}

struct Pairing {
    x: PlayerSet,
    y: PlayerSet,
    r: u64,
}

/// Decides weightedness. Either branch carries its own proof: the
/// representation is checked by a full sweep, the witness satisfies
/// sum r_i v_i = 0 exactly and converts to a verified certificate.
pub fn check_weighted(g: &SimpleGame) -> Result<CheckResult, LpError> {
    let n = g.n();
    if n > N_CAP {
        return Err(LpError::SizeCap { n, cap: N_CAP });
    }
    let min_win = g.min_winning();
    let max_lose = g.maximal_losing();
    let (rows, num_vars) = alternative_rows(min_win, &max_lose, n, true);
    match phase1(&rows, num_vars) {
        Phase1Result::Feasible(f) => {
            let mut pairs = pair_up(&f.solution, min_win, &max_lose);
            absorb_slack(g, &mut pairs, &vec![0u64; n]);
            Ok(CheckResult::Witness(finish_witness(g, &pairs, n, true)))
        }
        Phase1Result::Infeasible(inf) => {
            let weights: Vec<BigRational> =
                (0..n).map(|p| -inf.row_multipliers[p].clone()).collect();
            let table = coalition_weights(&weights, n);
            let quota = min_win
                .iter()
                .map(|m| table[m.bits() as usize].clone())
                .min()
                .unwrap();
            let rep = Representation {
                weights,
                quota,
                flavor: Flavor::Weighted,
            };
            assert_eq!(verify_representation(g, &rep), Ok(true));
            Ok(CheckResult::Representation(rep))
        }
    }
}

/// Decides rough weightedness. The witness branch has every slack
/// coordinate >= 1, which is what normalize_witness needs to build a
/// potent certificate.
pub fn check_rough(g: &SimpleGame) -> Result<CheckResult, LpError> {
    let n = g.n();
    if n > N_CAP {
        return Err(LpError::SizeCap { n, cap: N_CAP });
    }
    let min_win = g.min_winning();
    let max_lose = g.maximal_losing();
    let (rows, num_vars) = alternative_rows(min_win, &max_lose, n, false);
    match phase1(&rows, num_vars) {
        Phase1Result::Feasible(f) => {
            let pairs = pair_up(&f.solution, min_win, &max_lose);
            Ok(CheckResult::Witness(finish_witness(g, &pairs, n, false)))
        }
        Phase1Result::Infeasible(inf) => {
            let weights: Vec<BigRational> =
                (0..n).map(|p| -inf.row_multipliers[p].clone()).collect();
            let table = coalition_weights(&weights, n);
            let lo = max_lose
                .iter()
                .map(|y| table[y.bits() as usize].clone())
                .max()
                .unwrap();
            let hi = min_win
                .iter()
                .map(|m| table[m.bits() as usize].clone())
                .min()
                .unwrap();
            let quota = (lo + hi) / BigRational::from(BigInt::from(2));
            let rep = Representation {
                weights,
                quota,
                flavor: Flavor::Rough,
            };
            assert_eq!(verify_representation(g, &rep), Ok(true));
            Ok(CheckResult::Representation(rep))
        }
    }
}

/// The Farkas alternative of the separation system, over pair multipliers
/// aggregated into per-coalition marginals: alpha_M for minimal winning M,
/// beta_Y for maximal losing Y. Feasibility here = non-(rough-)weightedness.
fn alternative_rows(
    min_win: &[PlayerSet],
    max_lose: &[PlayerSet],
    n: usize,
    strict: bool,
) -> (Vec<Row>, usize) {
    let a = min_win.len();
    let b = max_lose.len();
    let num_vars = a + b;
    let mut rows = Vec::with_capacity(n + 2);
    for p in 1..=n {
        let mut coeffs = vec![BigRational::zero(); num_vars];
        for (j, m) in min_win.iter().enumerate() {
            if m.contains(p) {
                coeffs[j] = BigRational::one();
            }
        }
        for (j, y) in max_lose.iter().enumerate() {
            if y.contains(p) {
                coeffs[a + j] = -BigRational::one();
            }
        }
        rows.push(Row {
            coeffs,
            relation: Relation::Le,
            rhs: if strict {
                BigRational::zero()
            } else {
                -BigRational::one()
            },
        });
    }
    let mut balance = vec![BigRational::one(); num_vars];
    for c in &mut balance[a..] {
        *c = -BigRational::one();
    }
    rows.push(Row {
        coeffs: balance,
        relation: Relation::Eq,
        rhs: BigRational::zero(),
    });
    if strict {
        let mut norm = vec![BigRational::zero(); num_vars];
        for c in &mut norm[a..] {
            *c = BigRational::one();
        }
        rows.push(Row {
            coeffs: norm,
            relation: Relation::Eq,
            rhs: BigRational::one(),
        });
    }
    (rows, num_vars)
}

/// Clears denominators and pairs the alpha/beta marginals into concrete
/// (winner, loser) multiplicities, northwest-corner style.
fn pair_up(
    solution: &[BigRational],
    min_win: &[PlayerSet],
    max_lose: &[PlayerSet],
) -> Vec<Pairing> {
    let lcm = solution
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = solution.iter().map(|x| (x * &lcm).to_integer()).collect();
    let a = min_win.len();
    let mut alphas: Vec<(PlayerSet, u64)> = Vec::new();
    let mut betas: Vec<(PlayerSet, u64)> = Vec::new();
    for (j, v) in ints.iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        let r: u64 = u64::try_from(v.magnitude().clone()).expect("multiplier overflow");
        if j < a {
            alphas.push((min_win[j], r));
        } else {
            betas.push((max_lose[j - a], r));
        }
    }
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < alphas.len() && j < betas.len() {
        let take = alphas[i].1.min(betas[j].1);
        out.push(Pairing {
            x: alphas[i].0,
            y: betas[j].0,
            r: take,
        });
        alphas[i].1 -= take;
        betas[j].1 -= take;
        if alphas[i].1 == 0 {
            i += 1;
        }
        if betas[j].1 == 0 {
            j += 1;
        }
    }
    assert!(alphas[i..].iter().all(|&(_, r)| r == 0) || i == alphas.len());
    assert!(betas[j..].iter().all(|&(_, r)| r == 0) || j == betas.len());
    out
}

fn slack_of(pairs: &[Pairing], n: usize) -> Vec<i64> {
    let mut u = vec![0i64; n];
    for pr in pairs {
        for p in 1..=n {
            u[p - 1] -= pr.x.contains(p) as i64 * pr.r as i64;
            u[p - 1] += pr.y.contains(p) as i64 * pr.r as i64;
        }
    }
    u
}

/// Reduces the slack to the target by absorbing unit vectors: a coordinate
/// with leftover slack has some pair whose loser contains that player, and
/// shrinking a loser keeps it losing. Progress is guaranteed because the
/// slack at p equals the net loser-side excess at p.
fn absorb_slack(g: &SimpleGame, pairs: &mut Vec<Pairing>, target: &[u64]) {
    let n = g.n();
    loop {
        let u = slack_of(pairs, n);
        let Some(p) = (1..=n).find(|&p| u[p - 1] > target[p - 1] as i64) else {
            break;
        };
        let k = pairs
            .iter()
            .position(|pr| pr.r > 0 && pr.y.contains(p) && !pr.x.contains(p))
            .expect("slack without an absorbing pair");
        let (x, y) = (pairs[k].x, pairs[k].y);
        if pairs[k].r == 1 {
            pairs.remove(k);
        } else {
            pairs[k].r -= 1;
        }
        let shrunk = y.remove(p);
        debug_assert!(g.is_losing(shrunk));
        match pairs.iter_mut().find(|pr| pr.x == x && pr.y == shrunk) {
            Some(pr) => pr.r += 1,
            None => pairs.push(Pairing { x, y: shrunk, r: 1 }),
        }
    }
}

fn finish_witness(g: &SimpleGame, pairs: &[Pairing], n: usize, weighted: bool) -> FarkasWitness {
    let u = slack_of(pairs, n);
    assert!(u.iter().all(|&c| c >= 0));
    let mut terms: BTreeMap<TernaryVector, u64> = BTreeMap::new();
    for pr in pairs {
        debug_assert!(g.is_winning(pr.x) && g.is_losing(pr.y));
        *terms.entry(vector_of_pair(pr.x, pr.y, n)).or_insert(0) += pr.r;
    }
    let witness = FarkasWitness {
        terms: terms.into_iter().collect(),
        slack: u.iter().map(|&c| c as u64).collect(),
    };
    assert!(witness.is_consistent());
    if weighted {
        assert!(witness.slack.iter().all(|&c| c == 0));
        assert!(witness.total_multiplicity() >= 2);
        let cert = witness_to_certificate(g, &witness);
        assert_eq!(crate::trade::verify_certificate(g, &cert), Ok(true));
    } else {
        assert!(witness.slack.iter().all(|&c| c >= 1));
    }
    witness
}

/// Realizes an ideal vector as a concrete (winning, losing) pair: extend the
/// positive support by a minimal winning coalition clear of the negative
/// support, putting the overlap on both sides.
pub fn decompose_in_ideal(g: &SimpleGame, v: &TernaryVector) -> Option<(PlayerSet, PlayerSet)> {
    let pos = v.positive_support();
    let neg = v.negative_support();
    for &m in g.min_winning() {
        if !m.intersection(neg).is_empty() {
            continue;
        }
        let shared = m.difference(pos);
        let y = neg.union(shared);
        if g.is_losing(y) {
            return Some((pos.union(m), y));
        }
    }
    None
}

fn witness_pairs(g: &SimpleGame, w: &FarkasWitness) -> Vec<Pairing> {
    w.terms
        .iter()
        .map(|(v, r)| {
            let (x, y) =
                decompose_in_ideal(g, v).expect("witness term is not an ideal vector of this game");
            Pairing { x, y, r: *r }
        })
        .collect()
}

/// Expands a zero-slack witness into the certificate of non-weightedness it
/// encodes.
pub fn witness_to_certificate(g: &SimpleGame, w: &FarkasWitness) -> Certificate {
    assert!(w.slack.iter().all(|&c| c == 0), "slack must be zero");
    let pairs = witness_pairs(g, w);
    Certificate::new(transform_of(&pairs), false)
}

/// Turns an all-positive-slack witness into a potent certificate: absorb the
/// slack down to exactly one per coordinate, then close with the
/// (grand coalition, empty set) pair.
pub fn normalize_witness(g: &SimpleGame, w: &FarkasWitness) -> Certificate {
    let n = g.n();
    assert!(
        w.slack.iter().all(|&c| c >= 1),
        "normalization needs slack >= 1 everywhere"
    );
    assert!(w.is_consistent());
    let mut pairs = witness_pairs(g, w);
    absorb_slack(g, &mut pairs, &vec![1u64; n]);
    pairs.push(Pairing {
        x: g.grand_coalition(),
        y: PlayerSet::EMPTY,
        r: 1,
    });
    let cert = Certificate::new(transform_of(&pairs), true);
    assert_eq!(crate::trade::verify_certificate(g, &cert), Ok(true));
    cert
}

fn transform_of(pairs: &[Pairing]) -> TradingTransform {
    let mut winners: BTreeMap<PlayerSet, u64> = BTreeMap::new();
    let mut losers: BTreeMap<PlayerSet, u64> = BTreeMap::new();
    for pr in pairs {
        *winners.entry(pr.x).or_insert(0) += pr.r;
        *losers.entry(pr.y).or_insert(0) += pr.r;
    }
    TradingTransform::from_multisets(winners.into_iter().collect(), losers.into_iter().collect())
        .unwrap()
}

/// Full-sweep check of a representation against its flavor's threshold
/// conditions.
pub fn verify_representation(g: &SimpleGame, rep: &Representation) -> Result<bool, LpError> {
    let n = g.n();
    if n > N_CAP {
        return Err(LpError::SizeCap { n, cap: N_CAP });
    }
    if rep.weights.len() != n {
        return Err(LpError::LengthMismatch {
            got: rep.weights.len(),
            expected: n,
        });
    }
    if let Some(p) = rep.weights.iter().position(|w| w.is_negative()) {
        return Err(LpError::NegativeWeight(p + 1));
    }
    let table = g.winning_table();
    let wsum = coalition_weights(&rep.weights, n);
    let ok = match rep.flavor {
        Flavor::Weighted => (0..1usize << n).all(|s| table[s] == (wsum[s] >= rep.quota)),
        Flavor::Rough => {
            let thresholds_ok = (0..1usize << n).all(|s| {
                if wsum[s] > rep.quota {
                    table[s]
                } else if wsum[s] < rep.quota {
                    !table[s]
                } else {
                    true
                }
            });
            let nonzero = !rep.quota.is_zero() || rep.weights.iter().any(|w| !w.is_zero());
            thresholds_ok && nonzero
        }
    };
    Ok(ok)
}

/// Clamps negative weights to zero. For a weight vector separating winners
/// from losers in the rough sense this preserves the separation, giving the
/// nonnegative solution the solver assumes exists.
pub fn repair_nonnegative(weights: &[BigRational]) -> Vec<BigRational> {
    weights
        .iter()
        .map(|w| {
            if w.is_negative() {
                BigRational::zero()
            } else {
                w.clone()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(players: &[usize]) -> PlayerSet {
        PlayerSet::from_players(players.iter().copied())
    }

    fn fano() -> SimpleGame {
        SimpleGame::new(
            7,
            [
                &[1, 2, 3][..],
                &[3, 4, 5],
                &[1, 5, 6],
                &[1, 4, 7],
                &[2, 5, 7],
                &[3, 6, 7],
                &[2, 4, 6],
            ]
            .iter()
            .map(|l| ps(l))
            .collect(),
        )
        .unwrap()
    }

    fn g52() -> SimpleGame {
        SimpleGame::new(5, vec![ps(&[1, 2]), ps(&[3, 4, 5])]).unwrap()
    }

    fn rat(n: i64) -> BigRational {
        BigRational::from(BigInt::from(n))
    }

    #[test]
    fn dictator_is_weighted() {
        let g = SimpleGame::new(2, vec![ps(&[1])]).unwrap();
        match check_weighted(&g).unwrap() {
            CheckResult::Representation(r) => {
                assert_eq!(r.flavor, Flavor::Weighted);
                assert_eq!(verify_representation(&g, &r), Ok(true));
            }
            CheckResult::Witness(_) => panic!("dictator game must be weighted"),
        }
    }

    #[test]
    fn majority_is_weighted() {
        let g = SimpleGame::new(3, vec![ps(&[1, 2]), ps(&[1, 3]), ps(&[2, 3])]).unwrap();
        assert!(check_weighted(&g).unwrap().representation().is_some());
        let rep = Representation {
            weights: vec![rat(1), rat(1), rat(1)],
            quota: rat(2),
            flavor: Flavor::Weighted,
        };
        assert_eq!(verify_representation(&g, &rep), Ok(true));
    }

    #[test]
    fn fano_not_weighted_not_rough() {
        let g = fano();
        let w = check_weighted(&g).unwrap();
        let witness = w.witness().expect("fano is not weighted");
        assert!(witness.is_consistent());
        assert!(witness.slack.iter().all(|&c| c == 0));
        let r = check_rough(&g).unwrap();
        let witness = r.witness().expect("fano is not roughly weighted");
        assert!(witness.slack.iter().all(|&c| c >= 1));
        let cert = normalize_witness(&g, witness);
        assert!(cert.potent);
        assert_eq!(crate::trade::verify_certificate(&g, &cert), Ok(true));
    }

    #[test]
    fn g52_not_rough_with_short_normalization() {
        let g = g52();
        let r = check_rough(&g).unwrap();
        let witness = r.witness().expect("G_{5,2} is not roughly weighted");
        let cert = normalize_witness(&g, witness);
        assert!(cert.potent);
        assert_eq!(crate::trade::verify_certificate(&g, &cert), Ok(true));
    }

    #[test]
    fn weighted_game_is_roughly_weighted() {
        let g = SimpleGame::new(3, vec![ps(&[1, 2]), ps(&[1, 3]), ps(&[2, 3])]).unwrap();
        let r = check_rough(&g).unwrap();
        let rep = r
            .representation()
            .expect("weighted implies roughly weighted");
        assert_eq!(rep.flavor, Flavor::Rough);
        assert_eq!(verify_representation(&g, rep), Ok(true));
    }

    #[test]
    fn rough_verifier_rejects_zero_and_negative() {
        let g = fano();
        let zero = Representation {
            weights: vec![rat(0); 7],
            quota: rat(1),
            flavor: Flavor::Rough,
        };
        assert_eq!(verify_representation(&g, &zero), Ok(false));
        let neg = Representation {
            weights: vec![rat(-1), rat(0), rat(0), rat(0), rat(0), rat(0), rat(0)],
            quota: rat(0),
            flavor: Flavor::Rough,
        };
        assert_eq!(
            verify_representation(&g, &neg),
            Err(LpError::NegativeWeight(1))
        );
        let short = Representation {
            weights: vec![rat(1)],
            quota: rat(1),
            flavor: Flavor::Rough,
        };
        assert_eq!(
            verify_representation(&g, &short),
            Err(LpError::LengthMismatch {
                got: 1,
                expected: 7
            })
        );
    }

    #[test]
    fn scaling_preserves_validity() {
        let g = SimpleGame::new(3, vec![ps(&[1, 2]), ps(&[1, 3]), ps(&[2, 3])]).unwrap();
        let rep = Representation {
            weights: vec![rat(1), rat(1), rat(1)],
            quota: rat(2),
            flavor: Flavor::Weighted,
        };
        let scale = BigRational::new(BigInt::from(7), BigInt::from(3));
        let scaled = Representation {
            weights: rep.weights.iter().map(|w| w * &scale).collect(),
            quota: &rep.quota * &scale,
            flavor: Flavor::Weighted,
        };
        assert_eq!(verify_representation(&g, &scaled), Ok(true));
    }

    #[test]
    fn decompose_realizes_ideal_vectors() {
        let g = g52();
        let v = vector_of_pair(ps(&[1, 2]), ps(&[1, 3]), 5);
        let (x, y) = decompose_in_ideal(&g, &v).unwrap();
        assert!(g.is_winning(x));
        assert!(g.is_losing(y));
        assert_eq!(vector_of_pair(x, y, 5), v);
        // a vector needing positive support it cannot win with
        let bad = TernaryVector::new(vec![-1, -1, -1, -1, -1]);
        assert!(decompose_in_ideal(&g, &bad).is_none());
    }

    #[test]
    fn repair_keeps_separation_when_paper_says_so() {
        // majority game, a free-sign vector separating in the rough sense
        let g = SimpleGame::new(3, vec![ps(&[1, 2]), ps(&[1, 3]), ps(&[2, 3])]).unwrap();
        let w = vec![rat(1), rat(1), rat(1)];
        let repaired = repair_nonnegative(&w);
        assert_eq!(repaired, w);
        let table = g.winning_table();
        let free = vec![rat(2), rat(2), rat(-1)];
        // min over winning = w({1,3}) = 1, max over losing = w({3}) = -1:
        // separation holds, and clamping keeps it
        let clamped = repair_nonnegative(&free);
        let wsum = coalition_weights(&clamped, 3);
        let min_w = (0..8).filter(|&s| table[s]).map(|s| wsum[s].clone()).min();
        let max_l = (0..8).filter(|&s| !table[s]).map(|s| wsum[s].clone()).max();
        assert!(min_w >= max_l);
    }
}
