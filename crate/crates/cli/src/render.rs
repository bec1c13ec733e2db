use serde_json::{json, Value};

use sg_core::{
    game_digest, rational_string, BoundReport, Certificate, EnumerationReport, ExtremalExample,
    FarkasWitness, Flavor, GameClass, PlayerSet, Representation, SearchValue, SimpleGame,
};

pub fn game_json(g: &SimpleGame) -> Value {
    let minwin: Vec<Vec<usize>> = g
        .min_winning()
        .iter()
        .map(|m| m.players().collect())
        .collect();
    json!({ "players": g.n(), "minwin": minwin })
}

pub fn class_json(c: &GameClass) -> Value {
    json!({
        "proper": c.proper,
        "strong": c.strong,
        "constant_sum": c.constant_sum,
    })
}

pub fn representation_json(r: &Representation) -> Value {
    let weights: Vec<String> = r.weights.iter().map(rational_string).collect();
    json!({
        "flavor": match r.flavor {
            Flavor::Weighted => "weighted",
            Flavor::Rough => "rough",
        },
        "quota": rational_string(&r.quota),
        "weights": weights,
    })
}

pub fn witness_json(w: &FarkasWitness) -> Value {
    let terms: Vec<Value> = w
        .terms
        .iter()
        .map(|(v, r)| json!({ "vector": v.coords(), "count": r }))
        .collect();
    json!({ "terms": terms, "u": w.slack })
}

fn side_json(side: &[(PlayerSet, u64)]) -> Vec<Value> {
    side.iter()
        .map(|&(s, m)| {
            let players: Vec<usize> = s.players().collect();
            json!({ "players": players, "count": m })
        })
        .collect()
}

pub fn certificate_json(c: &Certificate) -> Value {
    json!({
        "potent": c.potent,
        "length": c.length(),
        "winners": side_json(c.transform.winners()),
        "losers": side_json(c.transform.losers()),
    })
}

pub fn search_value_json(v: &SearchValue) -> Value {
    match v {
        SearchValue::Exact { value, .. } => json!({ "value": value, "exact": true }),
        SearchValue::AtLeast(v) => json!({ "value": v, "exact": false }),
        SearchValue::Unbounded => Value::Null,
    }
}

pub fn bounds_json(b: &BoundReport) -> Value {
    json!({
        "n": b.n,
        "tz_upper": b.tz_upper.to_string(),
        "coord_sum_lower_g": b.coord_sum_lower_g,
    })
}

fn extremal_json(e: &ExtremalExample) -> Value {
    json!({
        "game": game_json(&e.game),
        "digest": game_digest(&e.game),
        "f": e.f,
        "g": e.g,
        "certificate": certificate_json(&e.certificate),
    })
}

pub fn report_json(r: &EnumerationReport) -> Value {
    let extremals: Vec<Value> = r.extremal_examples.iter().map(extremal_json).collect();
    json!({
        "n": r.n,
        "filter": r.filter.label(),
        "total_games": r.total_games,
        "weighted": r.weighted,
        "roughly_weighted_only": r.roughly_weighted_only,
        "not_roughly_weighted": r.not_roughly_weighted,
        "extremal_examples": extremals,
    })
}
