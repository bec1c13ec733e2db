use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use thiserror::Error;

use crate::game::{PlayerSet, SimpleGame};
use crate::lp::{check_rough, check_weighted};
use crate::trade::{verify_certificate, Certificate, TradingTransform};

pub const SEARCH_PLAYER_CAP: usize = 12;
pub const SEARCH_LENGTH_CAP: u64 = 20;
pub const DEFAULT_LENGTH_CAP: u64 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error("exact search needs at most {cap} players, got {n}; result inconclusive")]
    PlayerCap { n: usize, cap: usize },
    #[error("length cap {k} exceeds the supported maximum {cap}; result inconclusive")]
    LengthCap { k: u64, cap: u64 },
}

/// Outcome of a minimal-length certificate search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchValue {
    Exact {
        value: u64,
        certificate: Certificate,
    },
    /// Nothing up to the cap; the true value, if finite, is at least this.
    AtLeast(u64),
    /// Robust at every length: no certificate exists at all.
    Unbounded,
}

impl SearchValue {
    pub fn finite(&self) -> Option<u64> {
        match self {
            SearchValue::Exact { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn is_capped(&self) -> bool {
        matches!(self, SearchValue::AtLeast(_))
    }
}

#[derive(Clone, Debug)]
pub struct RobustnessReport {
    pub f_value: SearchValue,
    pub g_value: SearchValue,
    pub search_cap: u64,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundReport {
    pub n: usize,
    pub tz_upper: BigUint,
    pub coord_sum_lower_g: Option<u64>,
}

fn check_caps(g: &SimpleGame, k: u64) -> Result<(), SearchError> {
    if g.n() > SEARCH_PLAYER_CAP {
        return Err(SearchError::PlayerCap {
            n: g.n(),
            cap: SEARCH_PLAYER_CAP,
        });
    }
    if k > SEARCH_LENGTH_CAP {
        return Err(SearchError::LengthCap {
            k,
            cap: SEARCH_LENGTH_CAP,
        });
    }
    Ok(())
}

/// True iff no certificate of non-weightedness of length at most k exists.
/// Winners are normalized to minimal winning coalitions; the exchange
/// argument (shrink a winner, drop the same players from losers) preserves
/// both validity and length, so the restriction loses nothing.
pub fn is_k_trade_robust(g: &SimpleGame, k: u64) -> Result<bool, SearchError> {
    check_caps(g, k)?;
    let mut s = Searcher::new(g);
    for j in 2..=k {
        if s.find(j, false).is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Shortest failing trading transform, or Unbounded for weighted games.
pub fn compute_f(g: &SimpleGame, cap: u64) -> Result<SearchValue, SearchError> {
    check_caps(g, cap)?;
    let weighted = check_weighted(g).expect("player cap fits the solver cap");
    if weighted.representation().is_some() {
        return Ok(SearchValue::Unbounded);
    }
    let mut s = Searcher::new(g);
    for j in 2..=cap {
        if let Some(cert) = s.find(j, false) {
            assert_eq!(verify_certificate(g, &cert), Ok(true));
            return Ok(SearchValue::Exact {
                value: j,
                certificate: cert,
            });
        }
    }
    Ok(SearchValue::AtLeast(cap + 1))
}

/// Shortest potent certificate (the count includes its grand-coalition /
/// empty-set pair), or Unbounded for roughly weighted games.
pub fn compute_g(g: &SimpleGame, cap: u64) -> Result<SearchValue, SearchError> {
    check_caps(g, cap)?;
    let rough = check_rough(g).expect("player cap fits the solver cap");
    if rough.representation().is_some() {
        return Ok(SearchValue::Unbounded);
    }
    let lb = coord_sum_lower_bound_g(g)
        .expect("a non-roughly-weighted game has a losing coalition larger than some winning one");
    let start = lb.max(3);
    let mut s = Searcher::new(g);
    for j in start..=cap {
        if let Some(cert) = s.find(j, true) {
            assert!(cert.potent);
            assert_eq!(verify_certificate(g, &cert), Ok(true));
            return Ok(SearchValue::Exact {
                value: j,
                certificate: cert,
            });
        }
    }
    Ok(SearchValue::AtLeast((cap + 1).max(start)))
}

pub fn robustness_report(g: &SimpleGame, cap: u64) -> Result<RobustnessReport, SearchError> {
    let f_value = compute_f(g, cap)?;
    let g_value = compute_g(g, cap)?;
    if let Some(fv) = f_value.finite() {
        assert!(fv >= 2);
    }
    if let Some(gv) = g_value.finite() {
        assert!(gv >= 3);
        let fv = f_value
            .finite()
            .expect("a potent certificate shortens to a plain one");
        assert!(fv <= gv - 1);
    }
    let exact = !f_value.is_capped() && !g_value.is_capped();
    Ok(RobustnessReport {
        f_value,
        g_value,
        search_cap: cap,
        exact,
    })
}

/// Every non-potency pair of a potent certificate has coordinate sum at
/// least (smallest winning size) - (largest losing size); the potency pair
/// contributes n. Balancing to zero forces the length bound returned here.
/// A nonpositive gap means counting players is already a rough
/// representation, so no potent certificate exists.
pub fn coord_sum_lower_bound_g(g: &SimpleGame) -> Option<u64> {
    let max_lose = g
        .maximal_losing()
        .iter()
        .map(|y| y.len())
        .max()
        .expect("the empty coalition is always losing") as i64;
    let min_win = g.min_winning().iter().map(|m| m.len()).min().unwrap() as i64;
    let d = max_lose - min_win;
    if d <= 0 {
        None
    } else {
        Some((g.n() as u64).div_ceil(d as u64) + 1)
    }
}

/// Brackets the certificate lengths possible at this game's player count:
/// the universal upper bound and the coordinate-sum lower bound for g.
pub fn bound_report(g: &SimpleGame) -> BoundReport {
    BoundReport {
        n: g.n(),
        tz_upper: taylor_zwicker_cap(g.n()),
        coord_sum_lower_g: coord_sum_lower_bound_g(g),
    }
}

/// Exact trade-robustness threshold (n+1) * n^(n/2), rounded up for odd n.
/// A game robust at this length is robust at every length.
pub fn taylor_zwicker_cap(n: usize) -> BigUint {
    assert!(n >= 1);
    let power = BigUint::from(n).pow(n as u32);
    let mut root = power.sqrt();
    if &root * &root < power {
        root += 1u32;
    }
    BigUint::from(n + 1) * root
}

struct Searcher {
    n: usize,
    table: Vec<bool>,
    winners: Vec<u32>,
    min_win_size: u64,
    max_losing_card: u64,
    memo: HashMap<u64, u32>,
}

fn t_key(t: &[u8]) -> u64 {
    t.iter()
        .enumerate()
        .fold(0u64, |acc, (i, &c)| acc | ((c as u64) << (5 * i)))
}

fn pivot_of(t: &[u8]) -> (usize, u32) {
    let mut supp = 0u32;
    let mut pivot = 0usize;
    let mut best = 0u8;
    for (i, &c) in t.iter().enumerate() {
        if c > 0 {
            supp |= 1 << i;
            if c > best {
                best = c;
                pivot = i;
            }
        }
    }
    (pivot, supp)
}

fn apply(t: &mut [u8], mask: u32, delta: i8) {
    let mut rest = mask;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        t[i] = (t[i] as i8 + delta) as u8;
        rest &= rest - 1;
    }
}

impl Searcher {
    fn new(g: &SimpleGame) -> Self {
        let n = g.n();
        assert!(n <= SEARCH_PLAYER_CAP);
        let table = g.winning_table();
        let winners: Vec<u32> = g.min_winning().iter().map(|m| m.bits()).collect();
        let min_win_size = winners.iter().map(|m| m.count_ones() as u64).min().unwrap();
        let max_losing_card = (0..1u32 << n)
            .filter(|&s| !table[s as usize])
            .map(|s| s.count_ones() as u64)
            .max()
            .unwrap();
        Searcher {
            n,
            table,
            winners,
            min_win_size,
            max_losing_card,
            memo: HashMap::new(),
        }
    }

    /// Shortest certificate of exactly length j, if one exists. Winners run
    /// over minimal winning coalitions in a fixed non-decreasing order, so
    /// the first hit is deterministic.
    fn find(&mut self, j: u64, potent: bool) -> Option<Certificate> {
        let picks = if potent { j - 1 } else { j } as usize;
        let budget = if potent { j - 1 } else { j };
        let mut t = vec![if potent { 1u8 } else { 0 }; self.n];
        let mut chosen = Vec::with_capacity(picks);
        self.dfs(0, picks, budget, &mut t, &mut chosen)
            .map(|(ws, ls)| self.assemble(j, &ws, &ls, potent))
    }

    fn dfs(
        &mut self,
        from: usize,
        remaining: usize,
        budget: u64,
        t: &mut Vec<u8>,
        chosen: &mut Vec<usize>,
    ) -> Option<(Vec<u32>, Vec<u32>)> {
        if remaining == 0 {
            let need = self.min_losers(t);
            if need != u32::MAX && need as u64 <= budget {
                let ws = chosen.iter().map(|&i| self.winners[i]).collect();
                let ls = self.reconstruct(t);
                return Some((ws, ls));
            }
            return None;
        }
        let sum_t: u64 = t.iter().map(|&c| c as u64).sum();
        if sum_t + remaining as u64 * self.min_win_size > budget * self.max_losing_card {
            return None;
        }
        for i in from..self.winners.len() {
            let m = self.winners[i];
            apply(t, m, 1);
            if self.admissible(t, budget) {
                chosen.push(i);
                if let Some(found) = self.dfs(i, remaining - 1, budget, t, chosen) {
                    return Some(found);
                }
                chosen.pop();
            }
            apply(t, m, -1);
        }
        None
    }

    /// Necessary conditions on the loser side: every loser contains a player
    /// at most once, has bounded size, and misses at least one member of
    /// each minimal winning coalition.
    fn admissible(&self, t: &[u8], budget: u64) -> bool {
        let mut sum = 0u64;
        for &c in t {
            if c as u64 > budget {
                return false;
            }
            sum += c as u64;
        }
        if sum > budget * self.max_losing_card {
            return false;
        }
        self.winners.iter().all(|&m| {
            let mut hits = 0u64;
            let mut rest = m;
            while rest != 0 {
                hits += t[rest.trailing_zeros() as usize] as u64;
                rest &= rest - 1;
            }
            hits <= (m.count_ones() as u64 - 1) * budget
        })
    }

    /// Least number of nonempty losing coalitions whose indicator vectors
    /// sum to t, or MAX if impossible. Branches on a player of maximal
    /// multiplicity: some loser must contain it.
    fn min_losers(&mut self, t: &mut Vec<u8>) -> u32 {
        let (pivot, supp) = pivot_of(t);
        if supp == 0 {
            return 0;
        }
        let key = t_key(t);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let pbit = 1u32 << pivot;
        let rest = supp & !pbit;
        let mut best = u32::MAX;
        let mut s = rest;
        loop {
            let y = s | pbit;
            if !self.table[y as usize] {
                apply(t, y, -1);
                let sub = self.min_losers(t);
                apply(t, y, 1);
                if sub != u32::MAX && sub + 1 < best {
                    best = sub + 1;
                }
            }
            if s == 0 {
                break;
            }
            s = (s - 1) & rest;
        }
        self.memo.insert(key, best);
        best
    }

    fn reconstruct(&mut self, t: &mut Vec<u8>) -> Vec<u32> {
        let mut out = Vec::new();
        loop {
            let need = self.min_losers(t);
            assert_ne!(need, u32::MAX);
            if need == 0 {
                return out;
            }
            let (pivot, supp) = pivot_of(t);
            let pbit = 1u32 << pivot;
            let rest = supp & !pbit;
            let mut s = rest;
            let mut picked = None;
            loop {
                let y = s | pbit;
                if !self.table[y as usize] {
                    apply(t, y, -1);
                    if self.min_losers(t) == need - 1 {
                        picked = Some(y);
                        break;
                    }
                    apply(t, y, 1);
                }
                if s == 0 {
                    break;
                }
                s = (s - 1) & rest;
            }
            out.push(picked.expect("an optimal first loser exists"));
        }
    }

    fn assemble(&self, j: u64, ws: &[u32], ls: &[u32], potent: bool) -> Certificate {
        let mut wcount: BTreeMap<PlayerSet, u64> = BTreeMap::new();
        for &m in ws {
            *wcount.entry(PlayerSet::from_bits(m)).or_insert(0) += 1;
        }
        if potent {
            *wcount.entry(PlayerSet::full(self.n)).or_insert(0) += 1;
        }
        let mut lcount: BTreeMap<PlayerSet, u64> = BTreeMap::new();
        for &y in ls {
            *lcount.entry(PlayerSet::from_bits(y)).or_insert(0) += 1;
        }
        let pads = j - ls.len() as u64;
        if pads > 0 {
            *lcount.entry(PlayerSet::EMPTY).or_insert(0) += pads;
        }
        let transform = TradingTransform::from_multisets(
            wcount.into_iter().collect(),
            lcount.into_iter().collect(),
        )
        .unwrap();
        Certificate::new(transform, potent)
    }
}
