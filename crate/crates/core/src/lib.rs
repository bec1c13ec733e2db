pub mod construct;
pub mod enumerate;
pub mod format;
pub mod game;
pub mod lp;
pub mod search;
pub mod trade;

pub use construct::{
    check_fishburn, cyclic_game, doubling_game, doubling_game_with_threshold, example2_game,
    example_proper6_game, fano, find_relations, gn2_game, hadamard_game, projective_game,
    ConstructError, FishburnSystem, WeightVector,
};
pub use enumerate::{
    canonical_form, compute_f_of_n, compute_g_of_n, enumerate_games, enumeration_report,
    is_isomorphic, report_for_games, verify_small_player_theorems, ClassFilter, EnumError,
    EnumerationReport, ExtremalExample, ExtremalValue, SmallPlayerVerification,
};
pub use format::{
    game_digest, parse_certificate, parse_game, parse_representation, print_certificate,
    print_game, print_representation, print_witness, rational_string, ParseError,
};
pub use game::{GameClass, GameError, PlayerSet, SimpleGame, SpecialPlayers};
pub use lp::{
    check_rough, check_weighted, normalize_witness, repair_nonnegative, verify_representation,
    witness_to_certificate, CheckResult, FarkasWitness, Flavor, LpError, Representation,
};
pub use search::{
    bound_report, compute_f, compute_g, coord_sum_lower_bound_g, is_k_trade_robust,
    robustness_report, taylor_zwicker_cap, BoundReport, RobustnessReport, SearchError, SearchValue,
};
pub use trade::{
    el_from_potent, ideal_members, is_ideal, validate_transform, vector_of_pair,
    verify_certificate, violates_at_least_half, Certificate, ELSequence, IdealRestriction,
    TernaryVector, TradeError, TradingTransform,
};
