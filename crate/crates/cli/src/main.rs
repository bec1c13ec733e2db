use std::fs;
use std::io::Read as _;
use std::process;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use sg_core::{
    bound_report, check_rough, check_weighted, compute_f, compute_g, cyclic_game, doubling_game,
    doubling_game_with_threshold, enumerate_games, enumeration_report, example2_game,
    example_proper6_game, fano, game_digest, gn2_game, hadamard_game, normalize_witness,
    parse_certificate, parse_game, parse_representation, print_certificate, print_game,
    projective_game, report_for_games, verify_certificate, verify_representation, CheckResult,
    ClassFilter, EnumError, FishburnSystem, PlayerSet, SearchError, SearchValue, SimpleGame,
    WeightVector,
};

mod render;

#[derive(Parser)]
#[command(
    name = "sg",
    version,
    about = "Decide weightedness and rough weightedness of simple games, with exact certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify a game and report a representation or failure certificate as JSON
    Analyze {
        /// Path to a .game file, or - for stdin
        path: String,
        /// Also compute the exact f/g values, searching certificates up to this length
        #[arg(long, value_name = "K")]
        max_len: Option<u64>,
        /// Exit 4 if a requested value came back bounded rather than exact
        #[arg(long)]
        strict: bool,
        /// Include wall-clock milliseconds per phase in the report
        #[arg(long)]
        timings: bool,
    },
    /// Check a representation or certificate file against a game
    Verify {
        /// Path to a .game file, or - for stdin
        game: String,
        /// Path to a representation or certificate file
        artifact: String,
        #[arg(long)]
        json: bool,
    },
    /// Search for a shortest failure certificate
    Certificate {
        /// Path to a .game file, or - for stdin
        path: String,
        /// Search up to this length (default 16)
        #[arg(long, value_name = "K")]
        max_len: Option<u64>,
        /// Search for a potent certificate (refuting rough weightedness)
        #[arg(long)]
        potent: bool,
        /// Exit 4 if the search was cut off by the length cap
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        json: bool,
    },
    /// Write a named game construction in .game format
    Construct {
        #[command(subcommand)]
        construction: Construction,
        /// Write to a file instead of stdout
        #[arg(long, value_name = "FILE", global = true)]
        out: Option<String>,
    },
    /// Sweep all games at a player count, counting LP verdicts
    Enumerate {
        #[arg(long)]
        n: usize,
        /// Restrict to classes: proper, strong, proper,strong, or constant-sum
        #[arg(long, value_name = "CLASSES")]
        filter: Option<String>,
        /// Assert every swept game passes this check: rough or weighted
        #[arg(long, value_name = "FLAVOR")]
        check: Option<String>,
        /// Also write the JSON report to this file
        #[arg(long, value_name = "FILE")]
        report: Option<String>,
        /// Compute f/g for games failing the rough check, searching up to this length
        #[arg(long, value_name = "K")]
        max_len: Option<u64>,
        /// Fan the check phase out over this many workers (output is identical)
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Sweep a seeded random sample of this size instead of enumerating
        #[arg(long, value_name = "M")]
        sample: Option<u64>,
        /// Seed for --sample
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum Construction {
    /// The seven-line projective-plane game
    Fano,
    /// Hadamard row game of order 2^k (k = 3 or 4)
    Hadamard {
        #[arg(long)]
        k: usize,
    },
    /// Cyclic game generated by shifting a pattern around n players
    Cyclic {
        #[arg(long)]
        n: usize,
        /// Pattern coalition, e.g. "1 2 4"
        #[arg(long)]
        pattern: String,
    },
    /// Projective-plane game of order q (q = 2 or 3)
    Projective {
        #[arg(long)]
        q: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Minimal winning coalitions {1,2}, {3..n}, and the covering 4-sets
    Gn2 {
        #[arg(long)]
        n: usize,
    },
    /// Weighted doubling of a Fishburn weight vector
    Doubling {
        /// Base weights, e.g. "1 2 5 6 10"
        #[arg(long)]
        weights: String,
        /// Override the threshold (default: twice the total weight plus one)
        #[arg(long)]
        threshold: Option<u64>,
    },
    /// Six-player constant-sum game that is roughly but not strictly weighted
    Example2,
    /// Six-player game that is not roughly weighted (shortest potent certificate: 7)
    Proper6,
}

struct Failure {
    code: i32,
    message: String,
}

fn fail<T>(code: i32, message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure {
        code,
        message: message.into(),
    })
}

type CmdResult = Result<i32, Failure>;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                process::exit(0);
            }
            eprint!("{e}");
            process::exit(3);
        }
    };
    let result = match cli.command {
        Cmd::Analyze {
            path,
            max_len,
            strict,
            timings,
        } => cmd_analyze(&path, max_len, strict, timings),
        Cmd::Verify {
            game,
            artifact,
            json,
        } => cmd_verify(&game, &artifact, json),
        Cmd::Certificate {
            path,
            max_len,
            potent,
            strict,
            json,
        } => cmd_certificate(&path, max_len, potent, strict, json),
        Cmd::Construct { construction, out } => cmd_construct(construction, out),
        Cmd::Enumerate {
            n,
            filter,
            check,
            report,
            max_len,
            threads,
            sample,
            seed,
            json,
        } => cmd_enumerate(EnumerateArgs {
            n,
            filter,
            check,
            report,
            max_len,
            threads,
            sample,
            seed,
            json,
        }),
    };
    match result {
        Ok(code) => process::exit(code),
        Err(f) => {
            eprintln!("sg: {}", f.message);
            process::exit(f.code);
        }
    }
}

fn read_input(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut text = String::new();
        match std::io::stdin().read_to_string(&mut text) {
            Ok(_) => Ok(text),
            Err(e) => fail(2, format!("cannot read stdin: {e}")),
        }
    } else {
        fs::read_to_string(path).map_err(|e| Failure {
            code: 2,
            message: format!("cannot read {path}: {e}"),
        })
    }
}

fn load_game(path: &str) -> Result<SimpleGame, Failure> {
    let text = read_input(path)?;
    parse_game(&text).map_err(|e| Failure {
        code: 2,
        message: format!("{path}: {e}"),
    })
}

fn emit(value: &Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report values serialize")
    );
}

#[derive(Clone, Copy, PartialEq)]
enum Verdict {
    Weighted,
    RoughlyWeighted,
    NotRoughlyWeighted,
}

impl Verdict {
    fn label(self) -> &'static str {
        match self {
            Verdict::Weighted => "weighted",
            Verdict::RoughlyWeighted => "roughly_weighted",
            Verdict::NotRoughlyWeighted => "not_roughly_weighted",
        }
    }
}

/// Runs a capped search, distinguishing "this game is too large to search"
/// (reported as a missing value) from a malformed length cap (usage error).
fn search_or_skip(
    which: &str,
    result: Result<SearchValue, SearchError>,
) -> Result<Option<SearchValue>, Failure> {
    match result {
        Ok(v) => Ok(Some(v)),
        Err(e @ SearchError::PlayerCap { .. }) => {
            eprintln!("sg: {which} skipped: {e}");
            Ok(None)
        }
        Err(e @ SearchError::LengthCap { .. }) => fail(3, e.to_string()),
    }
}

fn cmd_analyze(path: &str, max_len: Option<u64>, strict: bool, timings: bool) -> CmdResult {
    let g = load_game(path)?;
    let mut phases: Vec<(&str, u128)> = Vec::new();
    let started = Instant::now();
    let weighted_check = check_weighted(&g).map_err(|e| Failure {
        code: 3,
        message: e.to_string(),
    })?;
    phases.push(("check_weighted", started.elapsed().as_millis()));

    let mut representation = None;
    let mut strict_witness = None;
    let mut certificate = None;
    let verdict = match weighted_check {
        CheckResult::Representation(rep) => {
            representation = Some(rep);
            Verdict::Weighted
        }
        CheckResult::Witness(w) => {
            strict_witness = Some(w);
            let started = Instant::now();
            let rough_check = check_rough(&g).expect("same size cap as the weighted check");
            phases.push(("check_rough", started.elapsed().as_millis()));
            match rough_check {
                CheckResult::Representation(rep) => {
                    representation = Some(rep);
                    Verdict::RoughlyWeighted
                }
                CheckResult::Witness(w) => {
                    let started = Instant::now();
                    certificate = Some(normalize_witness(&g, &w));
                    phases.push(("normalize_witness", started.elapsed().as_millis()));
                    Verdict::NotRoughlyWeighted
                }
            }
        }
    };

    let mut f_value = None;
    let mut g_value = None;
    if let Some(cap) = max_len {
        if verdict != Verdict::Weighted {
            let started = Instant::now();
            f_value = search_or_skip("f", compute_f(&g, cap))?;
            phases.push(("compute_f", started.elapsed().as_millis()));
        }
        if verdict == Verdict::NotRoughlyWeighted {
            let started = Instant::now();
            g_value = search_or_skip("g", compute_g(&g, cap))?;
            phases.push(("compute_g", started.elapsed().as_millis()));
            if let Some(SearchValue::Exact {
                certificate: minimal,
                ..
            }) = &g_value
            {
                certificate = Some(minimal.clone());
            }
        }
    }

    let mut report = json!({
        "schema": 1,
        "digest": game_digest(&g),
        "n": g.n(),
        "class": render::class_json(&g.classify()),
        "verdict": verdict.label(),
        "representation": representation.as_ref().map(render::representation_json),
        "strict_witness": strict_witness.as_ref().map(render::witness_json),
        "certificate": certificate.as_ref().map(render::certificate_json),
        "f": f_value.as_ref().map(|v| render::search_value_json(v)),
        "g": g_value.as_ref().map(|v| render::search_value_json(v)),
        "bounds": render::bounds_json(&bound_report(&g)),
    });
    if timings {
        let spent: Value = phases
            .iter()
            .map(|&(name, ms)| (name.to_string(), json!(ms as u64)))
            .collect::<serde_json::Map<String, Value>>()
            .into();
        report["timings"] = spent;
    }
    emit(&report);

    let inexact = |v: &Option<SearchValue>| matches!(v, Some(SearchValue::AtLeast(_)));
    if strict && (inexact(&f_value) || inexact(&g_value)) {
        return Ok(4);
    }
    Ok(0)
}

fn first_significant_line(text: &str) -> Option<&str> {
    text.lines()
        .map(|l| match l.find('#') {
            Some(pos) => l[..pos].trim(),
            None => l.trim(),
        })
        .find(|l| !l.is_empty())
}

fn cmd_verify(game_path: &str, artifact_path: &str, as_json: bool) -> CmdResult {
    let g = load_game(game_path)?;
    let text = read_input(artifact_path)?;
    let head = first_significant_line(&text).unwrap_or("");
    let (kind, valid) = if head.starts_with("potent:") {
        let c = parse_certificate(&text).map_err(|e| Failure {
            code: 2,
            message: format!("{artifact_path}: {e}"),
        })?;
        let stray = c
            .transform
            .winners()
            .iter()
            .chain(c.transform.losers().iter())
            .flat_map(|&(s, _)| s.players())
            .find(|&p| p > g.n());
        if let Some(p) = stray {
            return fail(
                3,
                format!(
                    "certificate does not fit the game: player {p} is out of range for {} players",
                    g.n()
                ),
            );
        }
        let valid = verify_certificate(&g, &c).map_err(|e| Failure {
            code: 3,
            message: format!("certificate does not fit the game: {e}"),
        })?;
        ("certificate", valid)
    } else if head.starts_with("quota:") {
        let r = parse_representation(&text).map_err(|e| Failure {
            code: 2,
            message: format!("{artifact_path}: {e}"),
        })?;
        let valid = verify_representation(&g, &r).map_err(|e| Failure {
            code: 3,
            message: format!("representation does not fit the game: {e}"),
        })?;
        ("representation", valid)
    } else {
        return fail(
            2,
            format!("{artifact_path}: expected a `potent:` or `quota:` line first"),
        );
    };
    if as_json {
        emit(&json!({ "schema": 1, "kind": kind, "valid": valid }));
    } else {
        println!("{}", if valid { "valid" } else { "invalid" });
    }
    Ok(if valid { 0 } else { 1 })
}

fn cmd_certificate(
    path: &str,
    max_len: Option<u64>,
    potent: bool,
    strict: bool,
    as_json: bool,
) -> CmdResult {
    let g = load_game(path)?;
    let cap = max_len.unwrap_or(16);
    let result = if potent {
        compute_g(&g, cap)
    } else {
        compute_f(&g, cap)
    };
    let value = result.map_err(|e| Failure {
        code: 3,
        message: e.to_string(),
    })?;
    match value {
        SearchValue::Exact {
            value,
            ref certificate,
        } => {
            if as_json {
                emit(&json!({
                    "schema": 1,
                    "value": value,
                    "exact": true,
                    "certificate": render::certificate_json(certificate),
                }));
            } else {
                print!("{}", print_certificate(certificate));
            }
            Ok(0)
        }
        SearchValue::AtLeast(bound) => {
            if as_json {
                emit(&json!({
                    "schema": 1,
                    "value": bound,
                    "exact": false,
                    "certificate": Value::Null,
                }));
            }
            eprintln!(
                "sg: no certificate of length at most {cap}; any certificate has length at least {bound}"
            );
            Ok(if strict { 4 } else { 0 })
        }
        SearchValue::Unbounded => {
            if as_json {
                emit(&json!({
                    "schema": 1,
                    "value": Value::Null,
                    "exact": true,
                    "certificate": Value::Null,
                }));
            }
            eprintln!(
                "sg: no certificate exists: the game is {}",
                if potent {
                    "roughly weighted"
                } else {
                    "weighted"
                }
            );
            Ok(1)
        }
    }
}

fn parse_number_list(text: &str, what: &str) -> Result<Vec<u64>, Failure> {
    let mut out = Vec::new();
    for tok in text.split(|c: char| c.is_whitespace() || c == ',') {
        if tok.is_empty() {
            continue;
        }
        match tok.parse::<u64>() {
            Ok(v) => out.push(v),
            Err(_) => return fail(3, format!("bad {what} entry `{tok}`")),
        }
    }
    if out.is_empty() {
        return fail(3, format!("empty {what} list"));
    }
    Ok(out)
}

fn cmd_construct(construction: Construction, out: Option<String>) -> CmdResult {
    let usage = |e: &dyn std::fmt::Display| Failure {
        code: 3,
        message: e.to_string(),
    };
    let g = match construction {
        Construction::Fano => fano(),
        Construction::Hadamard { k } => hadamard_game(k).map_err(|e| usage(&e))?,
        Construction::Cyclic { n, pattern } => {
            let players = parse_number_list(&pattern, "pattern")?;
            if let Some(&p) = players.iter().find(|&&p| p == 0 || p > 32) {
                return fail(3, format!("pattern player {p} not in 1..=32"));
            }
            let pattern = PlayerSet::from_players(players.iter().map(|&p| p as usize));
            cyclic_game(pattern, n).map_err(|e| usage(&e))?
        }
        Construction::Projective { q, dim } => projective_game(q, dim).map_err(|e| usage(&e))?,
        Construction::Gn2 { n } => gn2_game(n).map_err(|e| usage(&e))?,
        Construction::Doubling { weights, threshold } => {
            let ws = parse_number_list(&weights, "weight")?;
            let wv = WeightVector::new(ws).map_err(|e| usage(&e))?;
            let k = wv.relations.len();
            let system = FishburnSystem::new(wv, k).map_err(|e| usage(&e))?;
            match threshold {
                Some(t) => doubling_game_with_threshold(&system, t),
                None => doubling_game(&system),
            }
            .map_err(|e| usage(&e))?
        }
        Construction::Example2 => example2_game(),
        Construction::Proper6 => example_proper6_game(),
    };
    let text = print_game(&g);
    match out {
        Some(path) => fs::write(&path, text).map_err(|e| Failure {
            code: 2,
            message: format!("cannot write {path}: {e}"),
        })?,
        None => print!("{text}"),
    }
    Ok(0)
}

struct EnumerateArgs {
    n: usize,
    filter: Option<String>,
    check: Option<String>,
    report: Option<String>,
    max_len: Option<u64>,
    threads: usize,
    sample: Option<u64>,
    seed: u64,
    json: bool,
}

fn parse_filter(text: Option<&str>) -> Result<ClassFilter, Failure> {
    let Some(text) = text else {
        return Ok(ClassFilter::NONE);
    };
    let mut filter = ClassFilter::NONE;
    for part in text.split(',') {
        match part.trim() {
            "proper" => filter.proper = true,
            "strong" => filter.strong = true,
            "constant-sum" | "constant_sum" => filter.constant_sum = true,
            "none" | "" => {}
            other => return fail(3, format!("unknown filter class `{other}`")),
        }
    }
    Ok(filter)
}

const SAMPLE_PLAYER_CAP: usize = 12;

fn sample_games(n: usize, count: u64, seed: u64) -> Vec<SimpleGame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let full = (1u32 << n) - 1;
    (0..count)
        .map(|_| {
            let k = rng.gen_range(1..=2 * n);
            let family: Vec<PlayerSet> = (0..k)
                .map(|_| PlayerSet::from_bits(rng.gen_range(1..=full)))
                .collect();
            SimpleGame::from_winning_family(n, family)
                .expect("random families are nonempty with nonempty members")
        })
        .collect()
}

fn enum_failure(e: EnumError) -> Failure {
    let code = match e {
        EnumError::SizeCap { .. } => 3,
        EnumError::Inconclusive { .. } => 4,
        EnumError::Counterexample { .. } => 1,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

fn cmd_enumerate(args: EnumerateArgs) -> CmdResult {
    let filter = parse_filter(args.filter.as_deref())?;
    let check = match args.check.as_deref() {
        None => None,
        Some("rough") => Some(false),
        Some("weighted") => Some(true),
        Some(other) => return fail(3, format!("unknown check flavor `{other}`")),
    };
    let sampled = match args.sample {
        Some(count) => {
            if args.n == 0 || args.n > SAMPLE_PLAYER_CAP {
                return fail(
                    3,
                    format!(
                        "--sample needs n in 1..={SAMPLE_PLAYER_CAP}, got {}",
                        args.n
                    ),
                );
            }
            Some(sample_games(args.n, count, args.seed))
        }
        None => None,
    };
    let report = match &sampled {
        Some(games) => report_for_games(args.n, filter, games, args.max_len, args.threads),
        None => enumeration_report(args.n, filter, args.max_len, args.threads),
    }
    .map_err(enum_failure)?;

    let mut check_passed = None;
    let mut counterexample = None;
    if let Some(weighted_only) = check {
        let failed_count = if weighted_only {
            report.roughly_weighted_only + report.not_roughly_weighted
        } else {
            report.not_roughly_weighted
        };
        check_passed = Some(failed_count == 0);
        if failed_count > 0 {
            let pool = match &sampled {
                Some(games) => games
                    .iter()
                    .filter(|g| filter.is_unfiltered() || filter.matches(&g.classify()))
                    .cloned()
                    .collect(),
                None => enumerate_games(args.n, filter).map_err(enum_failure)?,
            };
            let offender = pool
                .iter()
                .find(|g| {
                    let result = if weighted_only {
                        check_weighted(g)
                    } else {
                        check_rough(g)
                    };
                    result
                        .expect("within solver cap")
                        .representation()
                        .is_none()
                })
                .expect("a failing game exists by count");
            counterexample = Some(offender.clone());
        }
    }

    let value = {
        let mut v = render::report_json(&report);
        let obj = v.as_object_mut().expect("report renders as an object");
        obj.insert("schema".into(), json!(1));
        obj.insert(
            "mode".into(),
            json!(if sampled.is_some() {
                "sample"
            } else {
                "exhaustive"
            }),
        );
        if let Some(games) = &sampled {
            obj.insert("sample_size".into(), json!(games.len() as u64));
            obj.insert("seed".into(), json!(args.seed));
        }
        if let Some(weighted_only) = check {
            obj.insert(
                "check".into(),
                json!(if weighted_only { "weighted" } else { "rough" }),
            );
            obj.insert("check_passed".into(), json!(check_passed.unwrap()));
            obj.insert(
                "counterexample".into(),
                counterexample
                    .as_ref()
                    .map(render::game_json)
                    .unwrap_or(Value::Null),
            );
        }
        v
    };

    if let Some(path) = &args.report {
        let text = format!(
            "{}\n",
            serde_json::to_string_pretty(&value).expect("report values serialize")
        );
        fs::write(path, text).map_err(|e| Failure {
            code: 2,
            message: format!("cannot write {path}: {e}"),
        })?;
    }
    if args.json {
        emit(&value);
    } else {
        println!("n: {}", report.n);
        println!("filter: {}", report.filter.label());
        if let Some(games) = &sampled {
            println!("sampled: {} (seed {})", games.len(), args.seed);
        }
        println!("total games: {}", report.total_games);
        println!("weighted: {}", report.weighted);
        println!("roughly weighted only: {}", report.roughly_weighted_only);
        println!("not roughly weighted: {}", report.not_roughly_weighted);
        if let Some(top) = report.extremal_examples.first() {
            println!(
                "max g: {} (f = {}), attained by {} game(s) up to relabeling",
                top.g,
                top.f,
                report.extremal_examples.len()
            );
        }
        if let Some(passed) = check_passed {
            let flavor = if check == Some(true) {
                "weighted"
            } else {
                "rough"
            };
            println!(
                "check {}: {}",
                flavor,
                if passed { "passed" } else { "FAILED" }
            );
        }
        if let Some(g) = &counterexample {
            print!("counterexample:\n{}", print_game(g));
        }
    }
    Ok(if check_passed == Some(false) { 1 } else { 0 })
}
