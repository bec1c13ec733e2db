use std::collections::HashSet;
use std::fmt;
use thiserror::Error;

use crate::game::{PlayerSet, SimpleGame};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TradeError {
    #[error("transform sides differ in length: {winners} winners vs {losers} losers")]
    UnequalLengths { winners: u64, losers: u64 },
    #[error("transform is not balanced at player {0}")]
    Unbalanced(usize),
    #[error("certificate is not potent")]
    NotPotent,
    #[error("coalition {0} does not have the claimed {1} role")]
    RoleMismatch(PlayerSet, &'static str),
    #[error("ideal enumeration needs n <= {cap}, got {n}")]
    SizeCap { n: usize, cap: usize },
}

/// Element of T^n = {-1,0,1}^n.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TernaryVector {
    coords: Vec<i8>,
}

impl TernaryVector {
    pub fn new(coords: Vec<i8>) -> Self {
        assert!(coords.iter().all(|c| (-1..=1).contains(c)));
        TernaryVector { coords }
    }

    pub fn zero(n: usize) -> Self {
        TernaryVector { coords: vec![0; n] }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[i8] {
        &self.coords
    }

    pub fn get(&self, i: usize) -> i8 {
        self.coords[i]
    }

    pub fn coordinate_sum(&self) -> i32 {
        self.coords.iter().map(|&c| c as i32).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// Players with coordinate +1.
    pub fn positive_support(&self) -> PlayerSet {
        PlayerSet::from_players(
            self.coords
                .iter()
                .enumerate()
                .filter(|(_, &c)| c == 1)
                .map(|(i, _)| i + 1),
        )
    }

    /// Players with coordinate -1.
    pub fn negative_support(&self) -> PlayerSet {
        PlayerSet::from_players(
            self.coords
                .iter()
                .enumerate()
                .filter(|(_, &c)| c == -1)
                .map(|(i, _)| i + 1),
        )
    }

    pub fn negate(&self) -> Self {
        TernaryVector {
            coords: self.coords.iter().map(|&c| -c).collect(),
        }
    }

    /// self + e_i (1-based i), or None if the coordinate would leave {-1,0,1}.
    pub fn plus_unit(&self, i: usize) -> Option<Self> {
        if self.coords[i - 1] == 1 {
            return None;
        }
        let mut coords = self.coords.clone();
        coords[i - 1] += 1;
        Some(TernaryVector { coords })
    }
}

impl fmt::Debug for TernaryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// v_{X,Y} = characteristic vector of X minus that of Y.
pub fn vector_of_pair(x: PlayerSet, y: PlayerSet, n: usize) -> TernaryVector {
    TernaryVector::new(
        (1..=n)
            .map(|p| x.contains(p) as i8 - y.contains(p) as i8)
            .collect(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdealRestriction {
    All,
    MinWinCrossAllLosing,
    AllWinningCrossMaxLosing,
}

/// Distinct vectors v_{X,Y} with X winning and Y losing, under the chosen
/// restriction of the (X, Y) ranges. Sorted for deterministic output.
pub fn ideal_members(
    g: &SimpleGame,
    restrict: IdealRestriction,
) -> Result<Vec<TernaryVector>, TradeError> {
    let n = g.n();
    if n > 20 {
        return Err(TradeError::SizeCap { n, cap: 20 });
    }
    let table = g.winning_table();
    let all_winning = || {
        (0..1u32 << n)
            .filter(|&s| table[s as usize])
            .map(PlayerSet::from_bits)
            .collect::<Vec<_>>()
    };
    let all_losing = || {
        (0..1u32 << n)
            .filter(|&s| !table[s as usize])
            .map(PlayerSet::from_bits)
            .collect::<Vec<_>>()
    };
    let (winners, losers) = match restrict {
        IdealRestriction::All => (all_winning(), all_losing()),
        IdealRestriction::MinWinCrossAllLosing => (g.min_winning().to_vec(), all_losing()),
        IdealRestriction::AllWinningCrossMaxLosing => (all_winning(), g.maximal_losing()),
    };
    let mut out: Vec<TernaryVector> = Vec::new();
    let mut seen: HashSet<TernaryVector> = HashSet::new();
    for &x in &winners {
        for &y in &losers {
            let v = vector_of_pair(x, y, n);
            if seen.insert(v.clone()) {
                out.push(v);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Whether S is an ideal of T^n: closed under adding any unit vector that
/// keeps the result ternary.
pub fn is_ideal<'a, I: IntoIterator<Item = &'a TernaryVector>>(s: I, n: usize) -> bool {
    let set: HashSet<&TernaryVector> = s.into_iter().collect();
    set.iter().all(|v| {
        (1..=n).all(|i| match v.plus_unit(i) {
            Some(w) => set.contains(&w),
            None => true,
        })
    })
}

/// Equal-length multisets of coalitions, stored as sorted
/// (coalition, multiplicity) pairs.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TradingTransform {
    winners: Vec<(PlayerSet, u64)>,
    losers: Vec<(PlayerSet, u64)>,
}

fn to_multiset(items: &[PlayerSet]) -> Vec<(PlayerSet, u64)> {
    let mut sorted = items.to_vec();
    sorted.sort();
    let mut out: Vec<(PlayerSet, u64)> = Vec::new();
    for s in sorted {
        match out.last_mut() {
            Some((prev, mult)) if *prev == s => *mult += 1,
            _ => out.push((s, 1)),
        }
    }
    out
}

fn multiset_len(ms: &[(PlayerSet, u64)]) -> u64 {
    ms.iter().map(|&(_, m)| m).sum()
}

impl TradingTransform {
    pub fn new(winners: &[PlayerSet], losers: &[PlayerSet]) -> Result<Self, TradeError> {
        if winners.len() != losers.len() {
            return Err(TradeError::UnequalLengths {
                winners: winners.len() as u64,
                losers: losers.len() as u64,
            });
        }
        Ok(TradingTransform {
            winners: to_multiset(winners),
            losers: to_multiset(losers),
        })
    }

    pub fn from_multisets(
        winners: Vec<(PlayerSet, u64)>,
        losers: Vec<(PlayerSet, u64)>,
    ) -> Result<Self, TradeError> {
        let mut t = TradingTransform { winners, losers };
        t.winners.retain(|&(_, m)| m > 0);
        t.losers.retain(|&(_, m)| m > 0);
        t.winners.sort();
        t.losers.sort();
        let (w, l) = (multiset_len(&t.winners), multiset_len(&t.losers));
        if w != l {
            return Err(TradeError::UnequalLengths {
                winners: w,
                losers: l,
            });
        }
        Ok(t)
    }

    /// Number of pairs (counting multiplicity).
    pub fn len(&self) -> u64 {
        multiset_len(&self.winners)
    }

    pub fn is_empty(&self) -> bool {
        self.winners.is_empty() && self.losers.is_empty()
    }

    pub fn winners(&self) -> &[(PlayerSet, u64)] {
        &self.winners
    }

    pub fn losers(&self) -> &[(PlayerSet, u64)] {
        &self.losers
    }

    pub fn expand_winners(&self) -> Vec<PlayerSet> {
        expand(&self.winners)
    }

    pub fn expand_losers(&self) -> Vec<PlayerSet> {
        expand(&self.losers)
    }

    pub fn count_in_winners(&self, s: PlayerSet) -> u64 {
        self.winners
            .iter()
            .find(|&&(w, _)| w == s)
            .map_or(0, |&(_, m)| m)
    }

    pub fn count_in_losers(&self, s: PlayerSet) -> u64 {
        self.losers
            .iter()
            .find(|&&(l, _)| l == s)
            .map_or(0, |&(_, m)| m)
    }
}

fn expand(ms: &[(PlayerSet, u64)]) -> Vec<PlayerSet> {
    let mut out = Vec::new();
    for &(s, m) in ms {
        for _ in 0..m {
            out.push(s);
        }
    }
    out
}

impl fmt::Debug for TradingTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |f: &mut fmt::Formatter<'_>, ms: &[(PlayerSet, u64)]| -> fmt::Result {
            for (i, &(s, m)) in ms.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{s}")?;
                if m > 1 {
                    write!(f, "^{m}")?;
                }
            }
            Ok(())
        };
        write!(f, "(")?;
        side(f, &self.winners)?;
        write!(f, "; ")?;
        side(f, &self.losers)?;
        write!(f, ")")
    }
}

/// True iff the transform balances: each player occurs equally often on both
/// sides. Checked twice, by direct counting and by summing pair vectors.
pub fn validate_transform(t: &TradingTransform) -> bool {
    let count_route = (1..=32).all(|p| {
        let w: u64 = t
            .winners
            .iter()
            .filter(|&&(s, _)| s.contains(p))
            .map(|&(_, m)| m)
            .sum();
        let l: u64 = t
            .losers
            .iter()
            .filter(|&&(s, _)| s.contains(p))
            .map(|&(_, m)| m)
            .sum();
        w == l
    });
    let mut sum = [0i64; 32];
    let (we, le) = (t.expand_winners(), t.expand_losers());
    for (x, y) in we.iter().zip(le.iter()) {
        for p in 1..=32 {
            sum[p - 1] += x.contains(p) as i64 - y.contains(p) as i64;
        }
    }
    let vector_route = sum.iter().all(|&c| c == 0);
    assert_eq!(count_route, vector_route);
    count_route
}

#[derive(Clone, PartialEq, Eq)]
pub struct Certificate {
    pub transform: TradingTransform,
    pub potent: bool,
}

impl Certificate {
    pub fn new(transform: TradingTransform, potent: bool) -> Self {
        Certificate { transform, potent }
    }

    pub fn length(&self) -> u64 {
        self.transform.len()
    }
}

impl fmt::Debug for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Certificate({:?}, potent={}, length={})",
            self.transform,
            self.potent,
            self.length()
        )
    }
}

/// Checks a claimed certificate of non-(rough-)weightedness against a game:
/// balance first (error if broken), then roles, then the potency claim.
pub fn verify_certificate(g: &SimpleGame, c: &Certificate) -> Result<bool, TradeError> {
    if !validate_transform(&c.transform) {
        let p = (1..=32)
            .find(|&p| {
                let w: u64 = c
                    .transform
                    .winners()
                    .iter()
                    .filter(|&&(s, _)| s.contains(p))
                    .map(|&(_, m)| m)
                    .sum();
                let l: u64 = c
                    .transform
                    .losers()
                    .iter()
                    .filter(|&&(s, _)| s.contains(p))
                    .map(|&(_, m)| m)
                    .sum();
                w != l
            })
            .unwrap();
        return Err(TradeError::Unbalanced(p));
    }
    if c.transform.is_empty() {
        return Ok(false);
    }
    let roles_ok = c.transform.winners().iter().all(|&(s, _)| g.is_winning(s))
        && c.transform.losers().iter().all(|&(s, _)| g.is_losing(s));
    if !roles_ok {
        return Ok(false);
    }
    if c.potent {
        let has_grand = c.transform.count_in_winners(g.grand_coalition()) >= 1;
        let has_empty = c.transform.count_in_losers(PlayerSet::EMPTY) >= 1;
        if !has_grand || !has_empty {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Half winning, half blocking coalitions (blocking = complement is losing).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ELSequence {
    winning: Vec<PlayerSet>,
    blocking: Vec<PlayerSet>,
}

impl ELSequence {
    pub fn new(winning: Vec<PlayerSet>, blocking: Vec<PlayerSet>) -> Result<Self, TradeError> {
        if winning.len() != blocking.len() {
            return Err(TradeError::UnequalLengths {
                winners: winning.len() as u64,
                losers: blocking.len() as u64,
            });
        }
        Ok(ELSequence { winning, blocking })
    }

    pub fn degree(&self) -> usize {
        self.winning.len()
    }

    pub fn winning(&self) -> &[PlayerSet] {
        &self.winning
    }

    pub fn blocking(&self) -> &[PlayerSet] {
        &self.blocking
    }
}

/// Strips one (P, {}) pair from a potent certificate and complements the
/// remaining losers, giving an EL sequence of degree length-1.
pub fn el_from_potent(g: &SimpleGame, c: &Certificate) -> Result<ELSequence, TradeError> {
    let grand = g.grand_coalition();
    if !c.potent
        || c.transform.count_in_winners(grand) == 0
        || c.transform.count_in_losers(PlayerSet::EMPTY) == 0
    {
        return Err(TradeError::NotPotent);
    }
    let mut winning = c.transform.expand_winners();
    let pos = winning.iter().position(|&s| s == grand).unwrap();
    winning.remove(pos);
    let mut losers = c.transform.expand_losers();
    let pos = losers.iter().position(|&s| s.is_empty()).unwrap();
    losers.remove(pos);
    let blocking = losers.into_iter().map(|y| y.complement(g.n())).collect();
    ELSequence::new(winning, blocking)
}

/// True iff the sequence violates the at-least-half property: no player
/// occurs in k or more of its 2k coalitions. Roles are verified first.
pub fn violates_at_least_half(g: &SimpleGame, z: &ELSequence) -> Result<bool, TradeError> {
    for &x in z.winning() {
        if !g.is_winning(x) {
            return Err(TradeError::RoleMismatch(x, "winning"));
        }
    }
    for &b in z.blocking() {
        if !g.is_losing(b.complement(g.n())) {
            return Err(TradeError::RoleMismatch(b, "blocking"));
        }
    }
    let k = z.degree();
    Ok((1..=g.n()).all(|p| {
        let occurrences = z.winning().iter().filter(|s| s.contains(p)).count()
            + z.blocking().iter().filter(|s| s.contains(p)).count();
        occurrences < k
    }))
}
