use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::game::{PlayerSet, SimpleGame};
use crate::lp::{FarkasWitness, Flavor, Representation};
use crate::trade::{Certificate, TradingTransform};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

fn fail<T>(line: usize, column: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        column,
        message: message.into(),
    })
}

/// Lines that survive comment stripping and trimming, as
/// (line number, content, column of the content's first byte), all 1-based.
fn significant_lines(text: &str) -> Vec<(usize, &str, usize)> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let trimmed = body.trim_end();
        let start = trimmed.len() - trimmed.trim_start().len();
        let content = trimmed.trim_start();
        if !content.is_empty() {
            out.push((i + 1, content, start + 1));
        }
    }
    out
}

/// Splits `key: value`, returning the key, the value, and the value's column.
fn split_directive(content: &str, col: usize) -> Option<(&str, &str, usize)> {
    let colon = content.find(':')?;
    let key = content[..colon].trim_end();
    let rest = &content[colon + 1..];
    let skip = rest.len() - rest.trim_start().len();
    Some((key, rest.trim_start(), col + colon + 1 + skip))
}

/// Whitespace-separated tokens of `s` with the column each one starts at.
fn tokens(s: &str, col: usize) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        if c.is_whitespace() {
            if let Some(b) = start.take() {
                out.push((&s[b..i], col + b));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(b) = start {
        out.push((&s[b..], col + b));
    }
    out
}

fn parse_player(tok: &str, line: usize, col: usize) -> Result<usize, ParseError> {
    let p: usize = match tok.parse() {
        Ok(p) => p,
        Err(_) => return fail(line, col, format!("expected a player number, got `{tok}`")),
    };
    if p == 0 || p > 32 {
        return fail(line, col, format!("player {p} not in 1..=32"));
    }
    Ok(p)
}

/// Parses the `.game` format: a `players: <n>` line followed by one
/// `minwin: i1 i2 ...` line per minimal winning coalition.
pub fn parse_game(text: &str) -> Result<SimpleGame, ParseError> {
    let lines = significant_lines(text);
    let Some(&(first_line, first, first_col)) = lines.first() else {
        return fail(1, 1, "empty input: expected `players: <n>`");
    };
    let n = match split_directive(first, first_col) {
        Some(("players", value, vcol)) => match tokens(value, vcol).as_slice() {
            [(tok, tcol)] => match tok.parse::<usize>() {
                Ok(n) if (1..=32).contains(&n) => n,
                Ok(n) => return fail(first_line, *tcol, format!("player count {n} not in 1..=32")),
                Err(_) => {
                    return fail(
                        first_line,
                        *tcol,
                        format!("expected a player count, got `{tok}`"),
                    )
                }
            },
            _ => {
                return fail(
                    first_line,
                    vcol,
                    "expected exactly one number after `players:`",
                )
            }
        },
        _ => return fail(first_line, first_col, "expected `players: <n>` first"),
    };

    let mut sets: Vec<(PlayerSet, usize)> = Vec::new();
    for &(line, content, col) in &lines[1..] {
        let Some((key, value, vcol)) = split_directive(content, col) else {
            return fail(line, col, "expected `minwin: i1 i2 ...`");
        };
        match key {
            "minwin" => {}
            "players" => return fail(line, col, "duplicate `players:` line"),
            other => return fail(line, col, format!("unknown directive `{other}`")),
        }
        let toks = tokens(value, vcol);
        if toks.is_empty() {
            return fail(line, vcol, "expected at least one player");
        }
        let mut set = PlayerSet::EMPTY;
        let mut prev = 0usize;
        for (tok, tcol) in toks {
            let p = parse_player(tok, line, tcol)?;
            if p > n {
                return fail(line, tcol, format!("player {p} above n={n}"));
            }
            if p <= prev {
                return fail(
                    line,
                    tcol,
                    format!("players must be strictly increasing: {p} after {prev}"),
                );
            }
            prev = p;
            set = set.insert(p);
        }
        for &(earlier, eline) in &sets {
            if set.is_subset(earlier) || earlier.is_subset(set) {
                let (small, big) = if set.is_subset(earlier) {
                    (set, earlier)
                } else {
                    (earlier, set)
                };
                return fail(
                    line,
                    col,
                    format!("not an antichain: {small} (line {line}) is a subset of {big} (line {eline})"),
                );
            }
        }
        sets.push((set, line));
    }
    if sets.is_empty() {
        let after = lines.last().map_or(1, |&(l, _, _)| l + 1);
        return fail(after, 1, "no minimal winning coalitions given");
    }
    let family = sets.into_iter().map(|(s, _)| s).collect();
    Ok(SimpleGame::new(n, family).expect("parser checks mirror the constructor's"))
}

/// Canonical `.game` text: players line, then minimal winning coalitions
/// in ascending bit order.
pub fn print_game(g: &SimpleGame) -> String {
    let mut out = format!("players: {}\n", g.n());
    for &m in g.min_winning() {
        out.push_str("minwin:");
        for p in m.players() {
            write!(out, " {p}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// SHA-256 of the canonical `.game` text, hex-encoded.
pub fn game_digest(g: &SimpleGame) -> String {
    let hash = Sha256::digest(print_game(g).as_bytes());
    let mut out = String::with_capacity(64);
    for byte in hash {
        write!(out, "{byte:02x}").unwrap();
    }
    out
}

fn print_coalition(out: &mut String, s: PlayerSet, mult: u64) {
    out.push('{');
    let mut first = true;
    for p in s.players() {
        if !first {
            out.push(',');
        }
        write!(out, "{p}").unwrap();
        first = false;
    }
    out.push('}');
    if mult != 1 {
        write!(out, "^{mult}").unwrap();
    }
    out.push('\n');
}

fn parse_coalition(content: &str, line: usize, col: usize) -> Result<(PlayerSet, u64), ParseError> {
    if !content.starts_with('{') {
        return fail(
            line,
            col,
            format!("expected a coalition `{{i1,i2,...}}`, got `{content}`"),
        );
    }
    let Some(close) = content.find('}') else {
        return fail(line, col, "unclosed `{`");
    };
    let mut set = PlayerSet::EMPTY;
    let inner = &content[1..close];
    if !inner.trim().is_empty() {
        for part in inner.split(',') {
            let skip = part.len() - part.trim_start().len();
            let pcol = col + 1 + (part.as_ptr() as usize - inner.as_ptr() as usize) + skip;
            let tok = part.trim();
            let p = parse_player(tok, line, pcol)?;
            if set.contains(p) {
                return fail(line, pcol, format!("player {p} repeated"));
            }
            set = set.insert(p);
        }
    }
    let tail = &content[close + 1..];
    let mult = if tail.is_empty() {
        1
    } else {
        let tcol = col + close + 1;
        let Some(digits) = tail.strip_prefix('^') else {
            return fail(
                line,
                tcol,
                format!("expected `^<count>` or end of line, got `{tail}`"),
            );
        };
        match digits.parse::<u64>() {
            Ok(0) => return fail(line, tcol + 1, "multiplicity must be positive"),
            Ok(m) => m,
            Err(_) => return fail(line, tcol + 1, format!("expected a count, got `{digits}`")),
        }
    };
    Ok((set, mult))
}

/// Parses the certificate format: a `potent:` line, then `winners:` and
/// `losers:` sections listing one coalition per line as `{i1,i2,...}^m`.
pub fn parse_certificate(text: &str) -> Result<Certificate, ParseError> {
    let lines = significant_lines(text);
    let Some(&(first_line, first, first_col)) = lines.first() else {
        return fail(1, 1, "empty input: expected `potent: true|false`");
    };
    let potent = match split_directive(first, first_col) {
        Some(("potent", "true", _)) => true,
        Some(("potent", "false", _)) => false,
        Some(("potent", other, vcol)) => {
            return fail(
                first_line,
                vcol,
                format!("expected `true` or `false`, got `{other}`"),
            )
        }
        _ => return fail(first_line, first_col, "expected `potent: true|false` first"),
    };

    let mut winners: BTreeMap<PlayerSet, u64> = BTreeMap::new();
    let mut losers: BTreeMap<PlayerSet, u64> = BTreeMap::new();
    let mut section: Option<bool> = None;
    let mut seen_losers = false;
    for &(line, content, col) in &lines[1..] {
        match content {
            "winners:" => {
                if section.is_some() {
                    return fail(line, col, "`winners:` must come before `losers:`");
                }
                section = Some(true);
            }
            "losers:" => {
                if section != Some(true) {
                    return fail(line, col, "`losers:` must follow the `winners:` section");
                }
                section = Some(false);
                seen_losers = true;
            }
            _ => {
                let Some(into_winners) = section else {
                    return fail(line, col, "expected `winners:` before any coalition");
                };
                let (set, mult) = parse_coalition(content, line, col)?;
                let side = if into_winners {
                    &mut winners
                } else {
                    &mut losers
                };
                *side.entry(set).or_insert(0) += mult;
            }
        }
    }
    if !seen_losers {
        let after = lines.last().map_or(1, |&(l, _, _)| l + 1);
        return fail(after, 1, "missing `losers:` section");
    }
    let transform = TradingTransform::from_multisets(
        winners.into_iter().collect(),
        losers.into_iter().collect(),
    );
    match transform {
        Ok(t) => Ok(Certificate::new(t, potent)),
        Err(e) => fail(1, 1, format!("invalid trading transform: {e}")),
    }
}

/// Certificate text with multiplicity exponents (`{1,2}^5`), `{}` for the
/// empty coalition, `^1` omitted. Exact inverse of `parse_certificate`.
pub fn print_certificate(c: &Certificate) -> String {
    let mut out = format!("potent: {}\n", c.potent);
    out.push_str("winners:\n");
    for &(s, m) in c.transform.winners() {
        print_coalition(&mut out, s, m);
    }
    out.push_str("losers:\n");
    for &(s, m) in c.transform.losers() {
        print_coalition(&mut out, s, m);
    }
    out
}

fn parse_rational(tok: &str, line: usize, col: usize) -> Result<BigRational, ParseError> {
    let (num_str, den_str) = match tok.split_once('/') {
        Some((a, b)) => (a, b),
        None => (tok, "1"),
    };
    let Ok(num) = BigInt::from_str(num_str) else {
        return fail(
            line,
            col,
            format!("expected a rational `p` or `p/q`, got `{tok}`"),
        );
    };
    let Ok(den) = BigInt::from_str(den_str) else {
        return fail(
            line,
            col,
            format!("expected a rational `p` or `p/q`, got `{tok}`"),
        );
    };
    if den.is_zero() {
        return fail(line, col, "zero denominator");
    }
    Ok(BigRational::new(num, den))
}

fn print_rational(out: &mut String, r: &BigRational) {
    if r.denom().is_one() {
        write!(out, "{}", r.numer()).unwrap();
    } else {
        write!(out, "{}/{}", r.numer(), r.denom()).unwrap();
    }
}

/// `p` for integers, `p/q` otherwise; inverse of the rational parser.
pub fn rational_string(r: &BigRational) -> String {
    let mut out = String::new();
    print_rational(&mut out, r);
    out
}

/// Parses the representation format: `quota:`, `weights:`, and `flavor:`
/// lines, rationals written as `p` or `p/q`.
pub fn parse_representation(text: &str) -> Result<Representation, ParseError> {
    let lines = significant_lines(text);
    if lines.len() != 3 {
        let after = lines.last().map_or(1, |&(l, _, _)| l + 1);
        return fail(
            after,
            1,
            "expected exactly `quota:`, `weights:`, `flavor:` lines",
        );
    }
    let expect = |idx: usize, want: &str| -> Result<(&str, usize), ParseError> {
        let (line, content, col) = lines[idx];
        match split_directive(content, col) {
            Some((key, value, vcol)) if key == want => Ok((value, vcol)),
            _ => fail(line, col, format!("expected `{want}: ...`")),
        }
    };
    let (qval, qcol) = expect(0, "quota")?;
    let quota = match tokens(qval, qcol).as_slice() {
        [(tok, tcol)] => parse_rational(tok, lines[0].0, *tcol)?,
        _ => {
            return fail(
                lines[0].0,
                qcol,
                "expected exactly one rational after `quota:`",
            )
        }
    };
    let (wval, wcol) = expect(1, "weights")?;
    let wtoks = tokens(wval, wcol);
    if wtoks.is_empty() {
        return fail(lines[1].0, wcol, "expected at least one weight");
    }
    let mut weights = Vec::with_capacity(wtoks.len());
    for (tok, tcol) in wtoks {
        weights.push(parse_rational(tok, lines[1].0, tcol)?);
    }
    let (fval, fcol) = expect(2, "flavor")?;
    let flavor = match fval {
        "weighted" => Flavor::Weighted,
        "rough" => Flavor::Rough,
        other => {
            return fail(
                lines[2].0,
                fcol,
                format!("expected `weighted` or `rough`, got `{other}`"),
            )
        }
    };
    Ok(Representation {
        weights,
        quota,
        flavor,
    })
}

/// Representation text: quota, weights, flavor. Exact inverse of
/// `parse_representation`.
pub fn print_representation(r: &Representation) -> String {
    let mut out = String::from("quota: ");
    print_rational(&mut out, &r.quota);
    out.push_str("\nweights:");
    for w in &r.weights {
        out.push(' ');
        print_rational(&mut out, w);
    }
    out.push_str("\nflavor: ");
    out.push_str(match r.flavor {
        Flavor::Weighted => "weighted",
        Flavor::Rough => "rough",
    });
    out.push('\n');
    out
}

/// Witness text: a `terms:` section of multiplicity-annotated ternary
/// vectors, then the slack line `u: u1 u2 ...`.
pub fn print_witness(w: &FarkasWitness) -> String {
    let mut out = String::from("terms:\n");
    for (v, r) in &w.terms {
        out.push('(');
        let mut first = true;
        for &c in v.coords() {
            if !first {
                out.push(',');
            }
            write!(out, "{c}").unwrap();
            first = false;
        }
        out.push(')');
        if *r != 1 {
            write!(out, "^{r}").unwrap();
        }
        out.push('\n');
    }
    out.push_str("u:");
    for &u in &w.slack {
        write!(out, " {u}").unwrap();
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{example2_game, fano, gn2_game};
    use crate::lp::{check_rough, check_weighted, normalize_witness};
    use crate::trade::verify_certificate;
    use num_bigint::BigInt;

    fn ps(players: &[usize]) -> PlayerSet {
        PlayerSet::from_players(players.iter().copied())
    }

    #[test]
    fn game_round_trip() {
        for g in [fano(), example2_game(), gn2_game(5).unwrap()] {
            let text = print_game(&g);
            assert_eq!(parse_game(&text).unwrap(), g);
        }
    }

    #[test]
    fn game_parser_accepts_comments_and_blanks() {
        let text = "# three-player majority\nplayers: 3   # n\n\nminwin: 1 2\nminwin: 1 3 # pair\nminwin: 2 3\n";
        let g = parse_game(text).unwrap();
        assert_eq!(g.min_winning(), &[ps(&[1, 2]), ps(&[1, 3]), ps(&[2, 3])]);
    }

    #[test]
    fn game_parser_reports_line_and_column() {
        let e = parse_game("players: 3\nminwin: 1 2\nminwin: 1 4\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 11));
        assert!(e.message.contains("above n=3"), "{}", e.message);

        let e = parse_game("players: 3\nminwin: 2 2\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 11));
        assert!(e.message.contains("strictly increasing"), "{}", e.message);

        let e = parse_game("players: 0\n").unwrap_err();
        assert_eq!((e.line, e.column), (1, 10));

        let e = parse_game("players: 2\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("no minimal winning"), "{}", e.message);

        let e = parse_game("minwin: 1\n").unwrap_err();
        assert_eq!((e.line, e.column), (1, 1));
    }

    #[test]
    fn game_parser_names_the_offending_pair() {
        let e = parse_game("players: 3\nminwin: 1 2 3\nminwin: 1 2\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(
            e.message.contains("{1,2}") && e.message.contains("{1,2,3}"),
            "{}",
            e.message
        );
        assert!(e.message.contains("not an antichain"), "{}", e.message);

        let e = parse_game("players: 2\nminwin: 1\nminwin: 1\n").unwrap_err();
        assert!(e.message.contains("not an antichain"), "{}", e.message);
    }

    #[test]
    fn digest_is_stable_and_injective_on_fixtures() {
        let d1 = game_digest(&fano());
        let d2 = game_digest(&fano());
        assert_eq!(d1, d2);
        assert_eq!(d1.len(), 64);
        assert_ne!(d1, game_digest(&example2_game()));
    }

    #[test]
    fn certificate_round_trip_on_computed_certificates() {
        for g in [fano(), gn2_game(5).unwrap()] {
            let witness = check_rough(&g).unwrap().witness().unwrap().clone();
            let cert = normalize_witness(&g, &witness);
            let text = print_certificate(&cert);
            let back = parse_certificate(&text).unwrap();
            assert_eq!(back, cert);
            assert!(verify_certificate(&g, &back).unwrap());
        }
    }

    #[test]
    fn certificate_text_shape() {
        let t = TradingTransform::from_multisets(
            vec![
                (ps(&[1, 2]), 5),
                (ps(&[3, 4, 5]), 7),
                (ps(&[1, 2, 3, 4, 5]), 1),
            ],
            vec![
                (ps(&[2, 3, 5]), 4),
                (ps(&[2, 3, 4]), 2),
                (ps(&[1, 3, 4]), 2),
                (ps(&[1, 4, 5]), 4),
                (PlayerSet::EMPTY, 1),
            ],
        )
        .unwrap();
        let text = print_certificate(&Certificate::new(t, true));
        let expected = "potent: true\nwinners:\n{1,2}^5\n{3,4,5}^7\n{1,2,3,4,5}\nlosers:\n{}\n{1,3,4}^2\n{2,3,4}^2\n{2,3,5}^4\n{1,4,5}^4\n";
        assert_eq!(text, expected);
    }

    #[test]
    fn certificate_parser_merges_split_multiplicities() {
        let text = "potent: false\nwinners:\n{1,2}^2\n{1,2}\nlosers:\n{1}^3\n";
        let c = parse_certificate(text).unwrap();
        assert_eq!(c.transform.count_in_winners(ps(&[1, 2])), 3);
        assert_eq!(c.transform.count_in_losers(ps(&[1])), 3);
    }

    #[test]
    fn certificate_parser_rejects_malformed_input() {
        let e = parse_certificate("potent: maybe\nwinners:\nlosers:\n").unwrap_err();
        assert_eq!(e.line, 1);

        let e = parse_certificate("potent: true\nwinners:\n{1,2\nlosers:\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("unclosed"), "{}", e.message);

        let e = parse_certificate("potent: true\nwinners:\n{1,1}\nlosers:\n{1}\n").unwrap_err();
        assert!(e.message.contains("repeated"), "{}", e.message);

        let e = parse_certificate("potent: true\nwinners:\n{1}^0\nlosers:\n{2}\n").unwrap_err();
        assert!(e.message.contains("positive"), "{}", e.message);

        let e = parse_certificate("potent: true\nwinners:\n{1}^2\nlosers:\n{2}\n").unwrap_err();
        assert!(
            e.message.contains("invalid trading transform"),
            "{}",
            e.message
        );

        let e = parse_certificate("potent: true\nlosers:\nwinners:\n").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn representation_round_trip() {
        let quota = BigRational::new(BigInt::from(7), BigInt::from(2));
        let r = Representation {
            weights: vec![
                BigRational::from(BigInt::from(3)),
                BigRational::new(BigInt::from(-1), BigInt::from(4)),
                BigRational::from(BigInt::from(0)),
            ],
            quota,
            flavor: Flavor::Rough,
        };
        let text = print_representation(&r);
        assert_eq!(text, "quota: 7/2\nweights: 3 -1/4 0\nflavor: rough\n");
        let back = parse_representation(&text).unwrap();
        assert_eq!(back.weights, r.weights);
        assert_eq!(back.quota, r.quota);
        assert_eq!(back.flavor, r.flavor);
    }

    #[test]
    fn representation_parser_rejects_malformed_input() {
        let e = parse_representation("quota: 3\nweights: 1 x\nflavor: weighted\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("rational"), "{}", e.message);

        let e = parse_representation("quota: 1/0\nweights: 1\nflavor: rough\n").unwrap_err();
        assert!(e.message.contains("zero denominator"), "{}", e.message);

        let e = parse_representation("quota: 3\nweights: 1 1\nflavor: exact\n").unwrap_err();
        assert_eq!(e.line, 3);

        let e = parse_representation("quota: 3\nweights: 1 1\n").unwrap_err();
        assert!(e.message.contains("expected exactly"), "{}", e.message);
    }

    #[test]
    fn weighted_representation_survives_a_round_trip_and_reverifies() {
        let g = example2_game();
        let rep = check_weighted(&g).unwrap();
        let witness = rep.witness().unwrap();
        let rough = check_rough(&g).unwrap();
        let rep = rough.representation().unwrap();
        let back = parse_representation(&print_representation(rep)).unwrap();
        assert!(crate::lp::verify_representation(&g, &back).unwrap());
        let text = print_witness(witness);
        assert!(text.starts_with("terms:\n"), "{}", text);
        assert!(text.contains("\nu:"), "{}", text);
    }
}
