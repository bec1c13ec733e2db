use std::fmt;
use thiserror::Error;

/// A coalition: subset of players 1..=n packed into a u32 (bit i-1 = player i).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PlayerSet(u32);

impl PlayerSet {
    pub const EMPTY: PlayerSet = PlayerSet(0);

    pub fn from_bits(bits: u32) -> Self {
        PlayerSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn full(n: usize) -> Self {
        assert!(n <= 32);
        if n == 32 {
            PlayerSet(u32::MAX)
        } else {
            PlayerSet((1u32 << n) - 1)
        }
    }

    pub fn singleton(player: usize) -> Self {
        assert!((1..=32).contains(&player), "player {player} out of range");
        PlayerSet(1 << (player - 1))
    }

    pub fn from_players<I: IntoIterator<Item = usize>>(players: I) -> Self {
        let mut s = PlayerSet::EMPTY;
        for p in players {
            s = s.insert(p);
        }
        s
    }

    pub fn contains(self, player: usize) -> bool {
        player >= 1 && player <= 32 && self.0 & (1 << (player - 1)) != 0
    }

    pub fn insert(self, player: usize) -> Self {
        assert!((1..=32).contains(&player), "player {player} out of range");
        PlayerSet(self.0 | (1 << (player - 1)))
    }

    pub fn remove(self, player: usize) -> Self {
        assert!((1..=32).contains(&player), "player {player} out of range");
        PlayerSet(self.0 & !(1 << (player - 1)))
    }

    pub fn union(self, other: Self) -> Self {
        PlayerSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        PlayerSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        PlayerSet(self.0 & !other.0)
    }

    pub fn complement(self, n: usize) -> Self {
        PlayerSet(!self.0 & PlayerSet::full(n).0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Players in ascending order.
    pub fn players(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let p = rest.trailing_zeros() as usize + 1;
                rest &= rest - 1;
                Some(p)
            }
        })
    }
}

impl fmt::Display for PlayerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.players().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for PlayerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("player count {0} not in 1..=32")]
    PlayerCount(usize),
    #[error("coalition {0} contains a player above n={1}")]
    PlayerOutOfRange(PlayerSet, usize),
    #[error("no minimal winning coalitions given")]
    EmptyFamily,
    #[error("the empty coalition cannot be winning")]
    EmptyCoalitionWinning,
    #[error("not an antichain: {0} is a subset of {1}")]
    NotAntichain(PlayerSet, PlayerSet),
}

/// proper: every winning coalition has a losing complement.
/// strong: every losing coalition has a winning complement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GameClass {
    pub proper: bool,
    pub strong: bool,
    pub constant_sum: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpecialPlayers {
    /// Players i with {i} winning.
    pub weak_dictators: PlayerSet,
    /// Players belonging to every winning coalition.
    pub vetoers: PlayerSet,
    /// Whether some (n-1)-player coalition is losing.
    pub has_losing_n_minus_1: bool,
}

/// A simple game on players 1..=n, stored as its antichain of minimal
/// winning coalitions. Winning = superset of some minimal winning coalition.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SimpleGame {
    n: usize,
    min_winning: Vec<PlayerSet>,
}

impl SimpleGame {
    /// Validates the antichain as given; rejects rather than repairs.
    pub fn new(n: usize, mut min_winning: Vec<PlayerSet>) -> Result<Self, GameError> {
        if n == 0 || n > 32 {
            return Err(GameError::PlayerCount(n));
        }
        if min_winning.is_empty() {
            return Err(GameError::EmptyFamily);
        }
        let full = PlayerSet::full(n);
        for &m in &min_winning {
            if m.is_empty() {
                return Err(GameError::EmptyCoalitionWinning);
            }
            if !m.is_subset(full) {
                return Err(GameError::PlayerOutOfRange(m, n));
            }
        }
        min_winning.sort();
        for i in 0..min_winning.len() {
            for j in 0..min_winning.len() {
                if i != j && min_winning[i].is_subset(min_winning[j]) {
                    return Err(GameError::NotAntichain(min_winning[i], min_winning[j]));
                }
            }
        }
        Ok(SimpleGame { n, min_winning })
    }

    /// Builds a game from any nonempty winning family, extracting the
    /// minimal members.
    pub fn from_winning_family(n: usize, family: Vec<PlayerSet>) -> Result<Self, GameError> {
        let mut minimal: Vec<PlayerSet> = Vec::new();
        for &x in &family {
            if family.iter().any(|&y| y != x && y.is_subset(x)) {
                continue;
            }
            if !minimal.contains(&x) {
                minimal.push(x);
            }
        }
        SimpleGame::new(n, minimal)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Minimal winning coalitions in ascending bit order.
    pub fn min_winning(&self) -> &[PlayerSet] {
        &self.min_winning
    }

    pub fn grand_coalition(&self) -> PlayerSet {
        PlayerSet::full(self.n)
    }

    pub fn is_winning(&self, x: PlayerSet) -> bool {
        assert!(
            x.is_subset(self.grand_coalition()),
            "coalition {x} out of range for n={}",
            self.n
        );
        self.min_winning.iter().any(|&m| m.is_subset(x))
    }

    pub fn is_losing(&self, x: PlayerSet) -> bool {
        !self.is_winning(x)
    }

    /// Winning status of all 2^n coalitions, indexed by bitmask. n <= 20.
    pub fn winning_table(&self) -> Vec<bool> {
        assert!(self.n <= 20, "winning_table needs n <= 20, got {}", self.n);
        let size = 1usize << self.n;
        let mut table = vec![false; size];
        for &m in &self.min_winning {
            table[m.bits() as usize] = true;
        }
        for s in 0..size {
            if table[s] {
                continue;
            }
            // s is winning iff removing some player keeps it winning at a
            // smaller index, or s is itself minimal (already marked)
            let mut rest = s as u32;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                if table[s ^ bit as usize] {
                    table[s] = true;
                    break;
                }
                rest ^= bit;
            }
        }
        // the monotone closure marks s from below only when a subset of s
        // one player smaller is winning; minimal coalitions seeded it
        table
    }

    pub fn winning_count(&self) -> u64 {
        self.winning_table().iter().filter(|&&w| w).count() as u64
    }

    /// Minimal transversals (hitting sets) of the minimal winning family.
    /// These are exactly the minimal winning coalitions of the dual game.
    pub fn minimal_transversals(&self) -> Vec<PlayerSet> {
        let mut trans: Vec<u32> = vec![0];
        for &m in &self.min_winning {
            let mb = m.bits();
            let mut next: Vec<u32> = Vec::new();
            for &t in &trans {
                if t & mb != 0 {
                    next.push(t);
                } else {
                    let mut rest = mb;
                    while rest != 0 {
                        let bit = rest & rest.wrapping_neg();
                        next.push(t | bit);
                        rest ^= bit;
                    }
                }
            }
            next.sort_by_key(|t| (t.count_ones(), *t));
            next.dedup();
            let mut kept: Vec<u32> = Vec::new();
            for &t in &next {
                if !kept.iter().any(|&k| k & !t == 0) {
                    kept.push(t);
                }
            }
            trans = kept;
        }
        let mut out: Vec<PlayerSet> = trans.into_iter().map(PlayerSet::from_bits).collect();
        out.sort();
        out
    }

    /// Maximal losing coalitions: complements of the minimal transversals.
    pub fn maximal_losing(&self) -> Vec<PlayerSet> {
        let mut out: Vec<PlayerSet> = self
            .minimal_transversals()
            .into_iter()
            .map(|t| t.complement(self.n))
            .collect();
        out.sort();
        out
    }

    /// Dual game G*: X wins in G* iff X's complement loses in G.
    pub fn dual(&self) -> SimpleGame {
        SimpleGame {
            n: self.n,
            min_winning: self.minimal_transversals(),
        }
    }

    pub fn classify(&self) -> GameClass {
        // proper iff every minimal winner has a losing complement: for
        // winning X >= M, X^c <= M^c and losing is downward closed
        let proper = self
            .min_winning
            .iter()
            .all(|&m| !self.is_winning(m.complement(self.n)));
        // strong iff every maximal losing coalition has a winning
        // complement, i.e. every minimal transversal is winning
        let strong = self
            .minimal_transversals()
            .iter()
            .all(|&t| self.is_winning(t));
        GameClass {
            proper,
            strong,
            constant_sum: proper && strong,
        }
    }

    pub fn find_special_players(&self) -> SpecialPlayers {
        let weak_dictators = PlayerSet::from_players(
            (1..=self.n).filter(|&p| self.min_winning.contains(&PlayerSet::singleton(p))),
        );
        let vetoers = self
            .min_winning
            .iter()
            .fold(self.grand_coalition(), |acc, &m| acc.intersection(m));
        let has_losing_n_minus_1 =
            (1..=self.n).any(|p| !self.is_winning(self.grand_coalition().remove(p)));
        debug_assert_eq!(has_losing_n_minus_1, !vetoers.is_empty());
        SpecialPlayers {
            weak_dictators,
            vetoers,
            has_losing_n_minus_1,
        }
    }
}

impl fmt::Debug for SimpleGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SimpleGame(n={}, min_winning=[", self.n)?;
        for (i, m) in self.min_winning.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "])")
    }
}
