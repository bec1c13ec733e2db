use std::collections::BTreeSet;
use std::thread;

use itertools::Itertools;
use thiserror::Error;

use crate::format::print_game;
use crate::game::{GameClass, PlayerSet, SimpleGame};
use crate::lp::{check_rough, check_weighted, normalize_witness};
use crate::search::{compute_f, compute_g, SearchValue};
use crate::trade::Certificate;

/// Exhaustive enumeration is limited to these scales; beyond them the
/// space is too large to sweep.
pub const ENUM_PLAYER_CAP: usize = 5;
pub const ENUM_CONSTANT_SUM_CAP: usize = 6;
pub const CANON_PLAYER_CAP: usize = 8;

/// Certificate-length cap used when sweeping f/g over a full enumeration.
const ENUM_SEARCH_CAP: u64 = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumError {
    #[error("n={n} exceeds the enumeration cap {cap} for this filter")]
    SizeCap { n: usize, cap: usize },
    #[error("theorem sweep found a counterexample:\n{game}")]
    Counterexample { game: String },
    #[error("a game at n={n} exceeded the internal search cap {cap}")]
    Inconclusive { n: usize, cap: u64 },
}

/// Class restriction on an enumeration: a game passes if it belongs to any
/// of the named classes; with no class named, everything passes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassFilter {
    pub proper: bool,
    pub strong: bool,
    pub constant_sum: bool,
}

impl ClassFilter {
    pub const NONE: ClassFilter = ClassFilter {
        proper: false,
        strong: false,
        constant_sum: false,
    };

    pub fn proper_or_strong() -> Self {
        ClassFilter {
            proper: true,
            strong: true,
            constant_sum: false,
        }
    }

    pub fn constant_sum() -> Self {
        ClassFilter {
            proper: false,
            strong: false,
            constant_sum: true,
        }
    }

    pub fn is_unfiltered(&self) -> bool {
        !(self.proper || self.strong || self.constant_sum)
    }

    fn is_constant_sum_only(&self) -> bool {
        self.constant_sum && !self.proper && !self.strong
    }

    pub fn matches(&self, class: &GameClass) -> bool {
        self.is_unfiltered()
            || (self.proper && class.proper)
            || (self.strong && class.strong)
            || (self.constant_sum && class.constant_sum)
    }

    pub fn label(&self) -> String {
        if self.is_unfiltered() {
            return "none".to_string();
        }
        let mut parts = Vec::new();
        if self.proper {
            parts.push("proper");
        }
        if self.strong {
            parts.push("strong");
        }
        if self.constant_sum {
            parts.push("constant-sum");
        }
        parts.join(",")
    }
}

/// A non-roughly-weighted game together with its exact failure measures and
/// the potent certificate realizing g.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtremalExample {
    pub game: SimpleGame,
    pub f: u64,
    pub g: u64,
    pub certificate: Certificate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumerationReport {
    pub n: usize,
    pub filter: ClassFilter,
    pub total_games: u64,
    pub weighted: u64,
    pub roughly_weighted_only: u64,
    pub not_roughly_weighted: u64,
    /// Games attaining the maximum g among the non-roughly-weighted ones,
    /// deduplicated up to relabeling. Empty unless extremals were requested.
    pub extremal_examples: Vec<ExtremalExample>,
}

fn extend_antichains(n: usize, start: u32, chosen: &mut Vec<u32>, out: &mut Vec<SimpleGame>) {
    if !chosen.is_empty() {
        let sets = chosen.iter().map(|&m| PlayerSet::from_bits(m)).collect();
        out.push(SimpleGame::new(n, sets).expect("pairwise incomparable by construction"));
    }
    let full = (1u32 << n) - 1;
    for m in start..=full {
        if chosen.iter().any(|&c| c & m == c || c & m == m) {
            continue;
        }
        chosen.push(m);
        extend_antichains(n, m + 1, chosen, out);
        chosen.pop();
    }
}

fn enumerate_all(n: usize) -> Vec<SimpleGame> {
    let mut out = Vec::new();
    extend_antichains(n, 1, &mut Vec::new(), &mut out);
    out
}

const UNKNOWN: u8 = 0;
const WIN: u8 = 1;
const LOSE: u8 = 2;

fn orientations(reps: &[u32], idx: usize, n: usize, status: &mut [u8], out: &mut Vec<SimpleGame>) {
    if idx == reps.len() {
        let family = status
            .iter()
            .enumerate()
            .filter(|&(_, &st)| st == WIN)
            .map(|(m, _)| PlayerSet::from_bits(m as u32))
            .collect();
        out.push(SimpleGame::from_winning_family(n, family).expect("monotone by construction"));
        return;
    }
    let full = (status.len() - 1) as u32;
    let s = reps[idx];
    for (win, lose) in [(s, full ^ s), (full ^ s, s)] {
        let ok = status.iter().enumerate().all(|(d, &st)| {
            let d = d as u32;
            let under_win = st == LOSE && win & d == win;
            let over_lose = st == WIN && d & lose == d;
            !under_win && !over_lose
        });
        if ok {
            status[win as usize] = WIN;
            status[lose as usize] = LOSE;
            orientations(reps, idx + 1, n, status, out);
            status[win as usize] = UNKNOWN;
            status[lose as usize] = UNKNOWN;
        }
    }
}

/// Constant-sum games arise by picking a winner from each complementary
/// pair {S, S^c}; backtracking keeps the winner family monotone.
fn enumerate_constant_sum(n: usize) -> Vec<SimpleGame> {
    let size = 1usize << n;
    let mut reps: Vec<u32> = (1..(1u32 << (n - 1))).collect();
    reps.sort_by_key(|&s| {
        let k = s.count_ones() as usize;
        (k.min(n - k), s)
    });
    let mut status = vec![UNKNOWN; size];
    status[0] = LOSE;
    status[size - 1] = WIN;
    let mut out = Vec::new();
    orientations(&reps, 0, n, &mut status, &mut out);
    out
}

/// Every simple game on n labeled players matching the filter, exactly once,
/// in a fixed deterministic order.
pub fn enumerate_games(n: usize, filter: ClassFilter) -> Result<Vec<SimpleGame>, EnumError> {
    if filter.is_constant_sum_only() {
        if n == 0 || n > ENUM_CONSTANT_SUM_CAP {
            return Err(EnumError::SizeCap {
                n,
                cap: ENUM_CONSTANT_SUM_CAP,
            });
        }
        return Ok(enumerate_constant_sum(n));
    }
    if n == 0 || n > ENUM_PLAYER_CAP {
        return Err(EnumError::SizeCap {
            n,
            cap: ENUM_PLAYER_CAP,
        });
    }
    let mut games = enumerate_all(n);
    if !filter.is_unfiltered() {
        games.retain(|g| filter.matches(&g.classify()));
    }
    Ok(games)
}

fn permute_set(s: PlayerSet, perm: &[usize]) -> PlayerSet {
    PlayerSet::from_players(s.players().map(|p| perm[p - 1]))
}

/// Minimum relabeling of the minimal winning family: the lexicographically
/// least sorted mask list over all n! player permutations.
pub fn canonical_form(g: &SimpleGame) -> Result<Vec<u32>, EnumError> {
    let n = g.n();
    if n > CANON_PLAYER_CAP {
        return Err(EnumError::SizeCap {
            n,
            cap: CANON_PLAYER_CAP,
        });
    }
    let mut best: Option<Vec<u32>> = None;
    for perm in (1..=n).permutations(n) {
        let mut masks: Vec<u32> = g
            .min_winning()
            .iter()
            .map(|&m| permute_set(m, &perm).bits())
            .collect();
        masks.sort_unstable();
        if best.as_ref().is_none_or(|b| masks < *b) {
            best = Some(masks);
        }
    }
    Ok(best.expect("games have at least one minimal winning coalition"))
}

pub fn is_isomorphic(a: &SimpleGame, b: &SimpleGame) -> Result<bool, EnumError> {
    Ok(a.n() == b.n() && canonical_form(a)? == canonical_form(b)?)
}

/// f, g, and the potent certificate for a game already known not to be
/// roughly weighted.
fn failure_measures(g: &SimpleGame, cap: u64) -> Result<(u64, u64, Certificate), EnumError> {
    let capped = EnumError::Inconclusive { n: g.n(), cap };
    let f = match compute_f(g, cap).map_err(|_| capped.clone())? {
        SearchValue::Exact { value, .. } => value,
        _ => return Err(capped),
    };
    match compute_g(g, cap).map_err(|_| capped.clone())? {
        SearchValue::Exact { value, certificate } => Ok((f, value, certificate)),
        _ => Err(capped),
    }
}

/// Counts games by LP verdict, fanning the checks out over `threads`
/// scoped workers; the merge is by enumeration order, so the result is
/// independent of the worker count. Returns (weighted, roughly weighted
/// only, indices of the rest).
fn partition_counts(games: &[SimpleGame], threads: usize) -> (u64, u64, Vec<usize>) {
    let threads = threads.clamp(1, games.len().max(1));
    let chunk = games.len().div_ceil(threads).max(1);
    let results: Vec<(u64, u64, Vec<usize>)> = thread::scope(|s| {
        let handles: Vec<_> = games
            .chunks(chunk)
            .enumerate()
            .map(|(ci, ch)| {
                s.spawn(move || {
                    let mut weighted = 0u64;
                    let mut rough_only = 0u64;
                    let mut failures = Vec::new();
                    for (i, g) in ch.iter().enumerate() {
                        if check_weighted(g)
                            .expect("within solver cap")
                            .representation()
                            .is_some()
                        {
                            weighted += 1;
                        } else if check_rough(g)
                            .expect("within solver cap")
                            .representation()
                            .is_some()
                        {
                            rough_only += 1;
                        } else {
                            failures.push(ci * chunk + i);
                        }
                    }
                    (weighted, rough_only, failures)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker"))
            .collect()
    });
    let mut weighted = 0u64;
    let mut rough_only = 0u64;
    let mut failures = Vec::new();
    for (w, r, f) in results {
        weighted += w;
        rough_only += r;
        failures.extend(f);
    }
    (weighted, rough_only, failures)
}

fn measure_failures(
    games: &[&SimpleGame],
    cap: u64,
    threads: usize,
) -> Result<Vec<(u64, u64, Certificate)>, EnumError> {
    let threads = threads.clamp(1, games.len().max(1));
    let chunk = games.len().div_ceil(threads).max(1);
    let per_chunk: Vec<Vec<Result<(u64, u64, Certificate), EnumError>>> = thread::scope(|s| {
        let handles: Vec<_> = games
            .chunks(chunk)
            .map(|ch| s.spawn(move || ch.iter().map(|g| failure_measures(g, cap)).collect()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("measure worker"))
            .collect()
    });
    per_chunk.into_iter().flatten().collect()
}

fn assemble_report(
    n: usize,
    filter: ClassFilter,
    games: &[SimpleGame],
    extremal_cap: Option<u64>,
    threads: usize,
) -> Result<EnumerationReport, EnumError> {
    let (weighted, rough_only, failure_idx) = partition_counts(games, threads);
    let mut extremal_examples = Vec::new();
    if let Some(cap) = extremal_cap {
        if !failure_idx.is_empty() {
            let failed: Vec<&SimpleGame> = failure_idx.iter().map(|&i| &games[i]).collect();
            let measured = measure_failures(&failed, cap, threads)?;
            let max_g = measured.iter().map(|&(_, gv, _)| gv).max().unwrap();
            let dedup = n <= CANON_PLAYER_CAP;
            let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
            for (g, (f, gv, certificate)) in failed.iter().zip(measured) {
                if gv == max_g && (!dedup || seen.insert(canonical_form(g)?)) {
                    extremal_examples.push(ExtremalExample {
                        game: (*g).clone(),
                        f,
                        g: gv,
                        certificate,
                    });
                }
            }
        }
    }
    let report = EnumerationReport {
        n,
        filter,
        total_games: games.len() as u64,
        weighted,
        roughly_weighted_only: rough_only,
        not_roughly_weighted: failure_idx.len() as u64,
        extremal_examples,
    };
    assert_eq!(
        report.weighted + report.roughly_weighted_only + report.not_roughly_weighted,
        report.total_games
    );
    Ok(report)
}

/// Sweeps the filtered enumeration at n, counting games by LP verdict.
/// With a length cap given, also computes f/g for every game that is not
/// roughly weighted and reports the max-g attainers up to relabeling.
/// The check phase fans out over `threads`; output is independent of the
/// worker count.
pub fn enumeration_report(
    n: usize,
    filter: ClassFilter,
    extremal_cap: Option<u64>,
    threads: usize,
) -> Result<EnumerationReport, EnumError> {
    let games = enumerate_games(n, filter)?;
    assemble_report(n, filter, &games, extremal_cap, threads)
}

/// Same report over an explicit game list (a random sample, say) instead
/// of the exhaustive enumeration; the filter is applied to the list.
pub fn report_for_games(
    n: usize,
    filter: ClassFilter,
    games: &[SimpleGame],
    extremal_cap: Option<u64>,
    threads: usize,
) -> Result<EnumerationReport, EnumError> {
    let kept: Vec<SimpleGame> = games
        .iter()
        .filter(|g| filter.is_unfiltered() || filter.matches(&g.classify()))
        .cloned()
        .collect();
    assemble_report(n, filter, &kept, extremal_cap, threads)
}

#[derive(Clone, Debug)]
pub struct SmallPlayerVerification {
    /// One report per theorem: (n=4, unfiltered), (n=5, proper-or-strong),
    /// (n=6, constant-sum), each with zero non-roughly-weighted games.
    pub reports: Vec<EnumerationReport>,
    /// Proof the guards are tight: a plain 5-player game and a 6-player
    /// game that are not roughly weighted, with verified certificates.
    pub tightness: Vec<ExtremalExample>,
}

fn sweep_expecting_rough(n: usize, filter: ClassFilter) -> Result<EnumerationReport, EnumError> {
    let games = enumerate_games(n, filter)?;
    let mut weighted = 0u64;
    let mut rough_only = 0u64;
    for g in &games {
        if check_weighted(g)
            .expect("within solver cap")
            .representation()
            .is_some()
        {
            weighted += 1;
        } else if check_rough(g)
            .expect("within solver cap")
            .representation()
            .is_some()
        {
            rough_only += 1;
        } else {
            return Err(EnumError::Counterexample {
                game: print_game(g),
            });
        }
    }
    Ok(EnumerationReport {
        n,
        filter,
        total_games: games.len() as u64,
        weighted,
        roughly_weighted_only: rough_only,
        not_roughly_weighted: 0,
        extremal_examples: Vec::new(),
    })
}

/// Machine-checks the small-player theorems: every game with at most four
/// players is roughly weighted, likewise every proper-or-strong 5-player
/// game and every constant-sum 6-player game, and every constant-sum
/// 5-player game is outright weighted. Returns the three sweep reports
/// plus witnesses that five unrestricted players and six players suffice
/// for rough weightedness to fail.
pub fn verify_small_player_theorems() -> Result<SmallPlayerVerification, EnumError> {
    for n in 1..=3 {
        sweep_expecting_rough(n, ClassFilter::NONE)?;
    }
    let reports = vec![
        sweep_expecting_rough(4, ClassFilter::NONE)?,
        sweep_expecting_rough(5, ClassFilter::proper_or_strong())?,
        sweep_expecting_rough(6, ClassFilter::constant_sum())?,
    ];
    for g in enumerate_games(5, ClassFilter::constant_sum())? {
        if check_weighted(&g)
            .expect("within solver cap")
            .representation()
            .is_none()
        {
            return Err(EnumError::Counterexample {
                game: print_game(&g),
            });
        }
    }
    let tightness = [
        crate::construct::gn2_game(5).expect("5 >= 5"),
        crate::construct::example_proper6_game(),
    ]
    .into_iter()
    .map(|g| {
        let rough = check_rough(&g).expect("within solver cap");
        let witness = rough.witness().expect("known not roughly weighted");
        let certificate = normalize_witness(&g, witness);
        let (f, gv, _) = failure_measures(&g, ENUM_SEARCH_CAP)?;
        Ok(ExtremalExample {
            game: g,
            f,
            g: gv,
            certificate,
        })
    })
    .collect::<Result<Vec<_>, EnumError>>()?;
    Ok(SmallPlayerVerification { reports, tightness })
}

/// The exact maximum with a game attaining it, or None when no game at
/// this n fails the relevant check.
#[derive(Clone, Debug)]
pub struct ExtremalValue {
    pub n: usize,
    pub value: Option<u64>,
    pub witness: Option<(SimpleGame, Certificate)>,
}

fn extremal_over(
    n: usize,
    search: impl Fn(&SimpleGame) -> Option<Result<SearchValue, EnumError>>,
) -> Result<ExtremalValue, EnumError> {
    if n == 0 || n > ENUM_PLAYER_CAP {
        return Err(EnumError::SizeCap {
            n,
            cap: ENUM_PLAYER_CAP,
        });
    }
    let mut best: Option<(u64, SimpleGame, Certificate)> = None;
    for g in enumerate_all(n) {
        let Some(result) = search(&g) else { continue };
        match result? {
            SearchValue::Exact { value, certificate } => {
                if best.as_ref().is_none_or(|&(b, _, _)| value > b) {
                    best = Some((value, g, certificate));
                }
            }
            _ => {
                return Err(EnumError::Inconclusive {
                    n,
                    cap: ENUM_SEARCH_CAP,
                })
            }
        }
    }
    Ok(match best {
        Some((value, game, certificate)) => ExtremalValue {
            n,
            value: Some(value),
            witness: Some((game, certificate)),
        },
        None => ExtremalValue {
            n,
            value: None,
            witness: None,
        },
    })
}

/// max_G f(G) over the non-weighted games on n players.
pub fn compute_f_of_n(n: usize) -> Result<ExtremalValue, EnumError> {
    let capped = move |n| EnumError::Inconclusive {
        n,
        cap: ENUM_SEARCH_CAP,
    };
    extremal_over(n, |g| {
        match compute_f(g, ENUM_SEARCH_CAP).map_err(|_| capped(g.n())) {
            Ok(SearchValue::Unbounded) => None,
            other => Some(other),
        }
    })
}

/// max_G g(G) over the non-roughly-weighted games on n players.
pub fn compute_g_of_n(n: usize) -> Result<ExtremalValue, EnumError> {
    let capped = move |n| EnumError::Inconclusive {
        n,
        cap: ENUM_SEARCH_CAP,
    };
    extremal_over(n, |g| {
        match compute_g(g, ENUM_SEARCH_CAP).map_err(|_| capped(g.n())) {
            Ok(SearchValue::Unbounded) => None,
            other => Some(other),
        }
    })
}
