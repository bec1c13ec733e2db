use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// One constraint row: coeffs . x REL rhs.
#[derive(Clone, Debug)]
pub struct Row {
    pub coeffs: Vec<BigRational>,
    pub relation: Relation,
    pub rhs: BigRational,
}

pub struct Feasible {
    pub solution: Vec<BigRational>,
}

/// Dual evidence of infeasibility: a vector y, one entry per input row, with
/// y_i <= 0 on Le rows, y_i >= 0 on Ge rows, y free on Eq rows, such that
/// y'A <= 0 componentwise and y'b > 0. Aggregating the rows with these
/// multipliers contradicts x >= 0.
pub struct Infeasible {
    pub row_multipliers: Vec<BigRational>,
}

pub enum Phase1Result {
    Feasible(Feasible),
    Infeasible(Infeasible),
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rational(num: i64) -> BigRational {
    ratio(num, 1)
}

/// Phase-1 simplex over exact rationals, all variables constrained >= 0.
/// Finds a feasible point of {Ax REL b, x >= 0} or produces row multipliers
/// proving there is none. Bland's rule, so it always terminates.
pub fn phase1(rows: &[Row], num_vars: usize) -> Phase1Result {
    let m = rows.len();
    // normalize to rhs >= 0, remembering which rows were flipped
    let mut flipped = vec![false; m];
    let mut norm: Vec<Row> = rows.to_vec();
    for (i, row) in norm.iter_mut().enumerate() {
        if row.rhs.is_negative() {
            flipped[i] = true;
            for c in &mut row.coeffs {
                *c = -c.clone();
            }
            row.rhs = -row.rhs.clone();
            row.relation = match row.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }
    // columns: structural vars, slack/surplus vars, artificials (one per row)
    let mut num_slack = 0usize;
    for row in &norm {
        if row.relation != Relation::Eq {
            num_slack += 1;
        }
    }
    let total = num_vars + num_slack + m;
    let mut tableau: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    let mut slack_idx = 0usize;
    for (i, row) in norm.iter().enumerate() {
        let mut t = vec![BigRational::zero(); total + 1];
        for (j, c) in row.coeffs.iter().enumerate() {
            t[j] = c.clone();
        }
        match row.relation {
            Relation::Le => {
                t[num_vars + slack_idx] = BigRational::one();
                slack_idx += 1;
            }
            Relation::Ge => {
                t[num_vars + slack_idx] = -BigRational::one();
                slack_idx += 1;
            }
            Relation::Eq => {}
        }
        t[num_vars + num_slack + i] = BigRational::one();
        t[total] = row.rhs.clone();
        tableau.push(t);
    }
    // objective: minimize sum of artificials; track reduced costs directly.
    // cost row starts as -(sum of constraint rows) over non-artificial
    // columns, objective value = -(sum of rhs)
    let mut cost = vec![BigRational::zero(); total + 1];
    for t in &tableau {
        for j in 0..=total {
            cost[j] -= &t[j];
        }
    }
    for j in num_vars + num_slack..total {
        cost[j] = BigRational::zero();
    }
    let mut basis: Vec<usize> = (0..m).map(|i| num_vars + num_slack + i).collect();

    loop {
        // Bland: entering = lowest-index column with negative reduced cost
        let entering = (0..total).find(|&j| cost[j].is_negative());
        let Some(e) = entering else { break };
        // ratio test, Bland ties by row index
        let mut leave: Option<usize> = None;
        let mut best: Option<BigRational> = None;
        for i in 0..m {
            if tableau[i][e].is_positive() {
                let r = &tableau[i][total] / &tableau[i][e];
                let better = match &best {
                    None => true,
                    Some(b) => &r < b || (&r == b && basis[i] < basis[leave.unwrap()]),
                };
                if better {
                    best = Some(r);
                    leave = Some(i);
                }
            }
        }
        let Some(l) = leave else {
            // unbounded below cannot happen: objective is a sum of
            // nonnegative artificials
            unreachable!("phase-1 objective unbounded");
        };
        // pivot on (l, e)
        let pivot = tableau[l][e].clone();
        for j in 0..=total {
            tableau[l][j] = &tableau[l][j] / &pivot;
        }
        for i in 0..m {
            if i != l && !tableau[i][e].is_zero() {
                let f = tableau[i][e].clone();
                for j in 0..=total {
                    let d = &f * &tableau[l][j];
                    tableau[i][j] = &tableau[i][j] - d;
                }
            }
        }
        if !cost[e].is_zero() {
            let f = cost[e].clone();
            for j in 0..=total {
                let d = &f * &tableau[l][j];
                cost[j] = &cost[j] - d;
            }
        }
        basis[l] = e;
    }

    // objective value = -cost[total]
    let obj = -cost[total].clone();
    if obj.is_zero() {
        let mut solution = vec![BigRational::zero(); num_vars];
        for (i, &b) in basis.iter().enumerate() {
            if b < num_vars {
                solution[b] = tableau[i][total].clone();
            }
        }
        // a degenerate optimum can keep a zero-valued artificial basic;
        // the structural solution is still feasible
        for (i, row) in rows.iter().enumerate() {
            let lhs: BigRational = row.coeffs.iter().zip(&solution).map(|(c, x)| c * x).sum();
            let ok = match row.relation {
                Relation::Le => lhs <= row.rhs,
                Relation::Ge => lhs >= row.rhs,
                Relation::Eq => lhs == row.rhs,
            };
            assert!(ok, "phase-1 solution violates row {i}");
        }
        assert!(solution.iter().all(|x| !x.is_negative()));
        Phase1Result::Feasible(Feasible { solution })
    } else {
        // duals of the artificial basis: y_i = 1 - (reduced cost of the
        // i-th artificial), in the normalized row orientation
        let mut y: Vec<BigRational> = (0..m)
            .map(|i| {
                let j = num_vars + num_slack + i;
                BigRational::one() - &cost[j]
            })
            .collect();
        for i in 0..m {
            if flipped[i] {
                y[i] = -y[i].clone();
            }
        }
        // self-check the Farkas certificate exactly
        for (i, row) in rows.iter().enumerate() {
            match row.relation {
                Relation::Le => assert!(!y[i].is_positive(), "Le multiplier sign"),
                Relation::Ge => assert!(!y[i].is_negative(), "Ge multiplier sign"),
                Relation::Eq => {}
            }
        }
        for j in 0..num_vars {
            let col: BigRational = rows
                .iter()
                .zip(&y)
                .map(|(row, yi)| &row.coeffs[j] * yi)
                .sum();
            assert!(!col.is_positive(), "y'A must be <= 0 at column {j}");
        }
        let yb: BigRational = rows.iter().zip(&y).map(|(row, yi)| &row.rhs * yi).sum();
        assert!(yb.is_positive(), "y'b must be positive");
        Phase1Result::Infeasible(Infeasible { row_multipliers: y })
    }
}
