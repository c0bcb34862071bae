use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::constants::{c_brute_force, c_exact, c_for_lambda, c_limit, rational_to_f64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantRow {
    pub lambda: usize,
    /// `c_exact(2^{λ+1}, 2^λ)`.
    pub c: f64,
    /// `|c − c_limit(2)| / c_limit(2)`.
    pub rel_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub experiment: String,
    /// `c_exact(4, 2)` as a reduced fraction.
    pub c_4_2: String,
    /// The same by enumerating all 16 functions.
    pub c_4_2_enumerated: String,
    pub c_limit_2: f64,
    pub rows: Vec<ConstantRow>,
}

impl ConstantsReport {
    pub fn small_case_matches(&self) -> bool {
        self.c_4_2 == "2/5" && self.c_4_2_enumerated == self.c_4_2
    }

    /// Rows with `λ ≥ from` whose gap to the limit exceeds `tol`.
    pub fn gaps_above(&self, from: usize, tol: f64) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|r| r.lambda >= from && r.rel_gap > tol)
            .map(|r| r.lambda)
            .collect()
    }
}

/// The `c_exact` table for `λ = 2 … max_lambda`.
pub fn constants_table(max_lambda: usize) -> Result<ConstantsReport> {
    if !(2..40).contains(&max_lambda) {
        return Err(Error::param(format!("max lambda must lie in 2..40, got {max_lambda}")));
    }
    let limit = c_limit(2);
    let rows = (2..=max_lambda)
        .map(|lambda| {
            let c = rational_to_f64(&c_for_lambda(lambda)?)?;
            Ok(ConstantRow {
                lambda,
                c,
                rel_gap: (c - limit).abs() / limit,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ConstantsReport {
        experiment: "constants".into(),
        c_4_2: c_exact(4, 2)?.to_string(),
        c_4_2_enumerated: c_brute_force(4, 2)?.to_string(),
        c_limit_2: limit,
        rows,
    })
}
