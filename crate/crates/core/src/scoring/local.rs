use statrs::function::gamma::ln_gamma;

use super::{ContingencyTable, ScoreError, StructurePrior};

/// Per-parameter factor of the parameter-penalty structure prior.
pub const PARAMETER_PENALTY: f64 = 0.001;

/// Log BDeu marginal likelihood of one family, plus its structure prior term.
///
/// Uses `alpha_jk = ess / (r q)` and `alpha_j = ess / q`. Configurations with no data
/// contribute nothing.
pub fn bdeu_local(
    table: &ContingencyTable,
    ess: f64,
    prior: StructurePrior,
) -> Result<f64, ScoreError> {
    if !(ess > 0.0 && ess.is_finite()) {
        return Err(ScoreError::InvalidEss(ess));
    }
    let r = table.child_cardinality();
    let q = table.config_count();
    let mut score = prior_term(r, q, prior);
    if r == 0 || q == 0 {
        return Ok(score);
    }
    let a_j = ess / q as f64;
    let a_jk = a_j / r as f64;
    let ln_gamma_a_jk = ln_gamma(a_jk);
    let ln_gamma_a_j = ln_gamma(a_j);
    for j in 0..q {
        let nj = table.marginal(j);
        if nj == 0 {
            continue;
        }
        score += ln_gamma_a_j - ln_gamma(a_j + nj as f64);
        for &njk in table.row(j) {
            if njk > 0 {
                score += ln_gamma(a_jk + njk as f64) - ln_gamma_a_jk;
            }
        }
    }
    Ok(score)
}

fn prior_term(r: usize, q: usize, prior: StructurePrior) -> f64 {
    match prior {
        StructurePrior::Uniform => 0.0,
        StructurePrior::ParameterPenalty => {
            (r.saturating_sub(1) * q) as f64 * PARAMETER_PENALTY.ln()
        }
    }
}

/// Maximised log-likelihood of one family minus `(ln m / 2) (r - 1) q`.
///
/// Every configuration counts towards `q`, observed or not.
pub fn bic_local(table: &ContingencyTable, rows: usize) -> f64 {
    if rows == 0 {
        return 0.0;
    }
    let r = table.child_cardinality();
    let q = table.config_count();
    let mut loglik = 0.0;
    for j in 0..q {
        let nj = table.marginal(j) as f64;
        if nj == 0.0 {
            continue;
        }
        for &njk in table.row(j) {
            if njk > 0 {
                let njk = njk as f64;
                loglik += njk * (njk / nj).ln();
            }
        }
    }
    loglik - 0.5 * (rows as f64).ln() * (r.saturating_sub(1) * q) as f64
}
