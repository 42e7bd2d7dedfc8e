//! Command execution. Each runner returns the JSON summary and writes its CSV
//! when an output path is configured.

use std::path::Path;

use serde_json::{json, Value};
use wassrisk::corpus::{certify, duality_corpus, CORPUS_SEED};
use wassrisk::ctransform::LossFn;
use wassrisk::directed::{lower_envelope, robust_var_curve, tail_identity_check, DirectedFamily};
use wassrisk::ext::ExtReal;
use wassrisk::finite_duality::{dual_roce, FiniteSpace, PriorSet};
use wassrisk::pricing::{classical_price, price_curve, robust_price, write_curve, PayoffSpec};
use wassrisk::risk::{classical_avar, classical_var, robust_oce, robust_var, RiskError, RiskResult};
use wassrisk::table::{format_sig, write_csv_file, SIG_DIGITS};

use crate::config::{
    self, BaselineSpec, CheckDualityConfig, DirectedConfig, FamilyConfig, FiniteDualConfig, PenaltySpec, PriceConfig,
    RiskConfig, RiskMeasure, RunConfig,
};

pub const RISK_HEADER: [&str; 9] = [
    "alpha",
    "delta",
    "p",
    "penalty",
    "classical",
    "robust",
    "premium",
    "lambda_star",
    "m_star",
];
pub const PRICE_HEADER: [&str; 6] = ["payoff", "classical", "robust", "spread", "lambda_star", "a_star"];
pub const DUALITY_HEADER: [&str; 8] = [
    "index",
    "atoms",
    "grid",
    "p",
    "penalty",
    "dual",
    "primal",
    "relative_gap",
];
pub const DIRECTED_HEADER: [&str; 4] = ["alpha", "robust_avar", "tail_integral", "gap"];
pub const FINITE_HEADER: [&str; 7] = ["loss", "n", "vertices", "primal", "dual", "gap", "resolution"];

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Failed(String),
    #[error("--curve needs an output path (config `output` or --output)")]
    CurveWithoutOutput,
    #[error("--curve applies to call payoffs only")]
    CurveNeedsCall,
    #[error("--curve applies to the price command only")]
    CurveNotPrice,
}

fn fail(e: impl std::fmt::Display) -> RunError {
    RunError::Failed(e.to_string())
}

#[derive(Debug)]
pub struct Report {
    pub json: Value,
    /// Set when a numerical search did not converge or a certificate failed.
    pub nonconverged: bool,
}

fn sig(x: f64) -> String {
    format_sig(x, SIG_DIGITS)
}

fn opt_sig(x: Option<f64>) -> String {
    x.map(sig).unwrap_or_default()
}

fn csv_out(path: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> Result<(), RunError> {
    match path {
        Some(p) => write_csv_file(p, header, rows).map_err(|e| fail(format!("writing {}: {e}", p.display()))),
        None => Ok(()),
    }
}

fn document(config: &RunConfig, values: Value, lambda_star: Value, diagnostics: Value) -> Value {
    json!({
        "command": config.command().to_string(),
        "inputs": config,
        "values": values,
        "lambda_star": lambda_star,
        "diagnostics": diagnostics,
    })
}

pub fn run(config: &RunConfig, curve: bool) -> Result<Report, RunError> {
    if curve && !matches!(config, RunConfig::Price(_)) {
        return Err(RunError::CurveNotPrice);
    }
    match config {
        RunConfig::Risk(c) => risk(config, c),
        RunConfig::Price(c) if curve => price_sweep(config, c),
        RunConfig::Price(c) => price(config, c),
        RunConfig::CheckDuality(c) => check_duality(config, c),
        RunConfig::Directed(c) => directed(config, c),
        RunConfig::FiniteDual(c) => finite_dual(config, c),
    }
}

fn risk(config: &RunConfig, c: &RiskConfig) -> Result<Report, RunError> {
    let mu0 = config::baseline(&c.baseline).map_err(fail)?;
    let cost = config::cost(&c.cost).map_err(fail)?;
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    let mut lambdas = Vec::new();
    let mut nonconverged = false;
    for &alpha in &c.alphas {
        let classical = match c.measure {
            RiskMeasure::Avar => classical_avar(alpha, &mu0).map(|r| r.value.to_f64()),
            RiskMeasure::Var => classical_var(alpha, &mu0),
        }
        .map_err(fail)?;
        for spec in &c.penalties {
            let penalty = spec.penalty();
            let robust = match c.measure {
                RiskMeasure::Avar => robust_oce(&LossFn::Avar { alpha }, &mu0, &cost, &penalty),
                RiskMeasure::Var => robust_var(alpha, &mu0, &cost, &penalty),
            };
            let r = match robust {
                Ok(r) => r,
                Err(RiskError::Divergent) => {
                    log::warn!(
                        "alpha {alpha}, {}: minimization over m did not converge",
                        penalty.label()
                    );
                    nonconverged = true;
                    RiskResult {
                        value: ExtReal::PosInf,
                        m_star: None,
                        lambda_star: None,
                        path: wassrisk::risk::RiskPath::GenericDual,
                    }
                }
                Err(e) => return Err(fail(e)),
            };
            let delta = match spec {
                PenaltySpec::Ball { delta } => Some(*delta),
                _ => None,
            };
            let premium = r.value.to_f64() - classical;
            rows.push(vec![
                sig(alpha),
                opt_sig(delta),
                sig(c.cost.p),
                penalty.label().to_string(),
                sig(classical),
                sig(r.value.to_f64()),
                sig(premium),
                opt_sig(r.lambda_star),
                opt_sig(r.m_star),
            ]);
            lambdas.push(json!(r.lambda_star));
            cells.push(json!({
                "alpha": alpha,
                "penalty": spec,
                "classical": classical,
                "robust": r.value,
                "premium": ExtReal::from_f64(premium),
                "lambda_star": r.lambda_star,
                "m_star": r.m_star,
                "path": r.path,
            }));
        }
    }
    csv_out(c.output.as_deref(), &RISK_HEADER, &rows)?;
    Ok(Report {
        json: document(
            config,
            json!(cells),
            json!(lambdas),
            json!({ "cells": rows.len(), "nonconverged": nonconverged }),
        ),
        nonconverged,
    })
}

fn price(config: &RunConfig, c: &PriceConfig) -> Result<Report, RunError> {
    let market = config::market(&c.market).map_err(fail)?;
    let cost = config::cost(&c.cost).map_err(fail)?;
    let payoff = config::payoff(&c.payoff).map_err(fail)?;
    let penalty = c.penalty.penalty();
    let classical = classical_price(&payoff, &market);
    let r = robust_price(&payoff, &market, &cost, &penalty, config::mode(&c.mode)).map_err(fail)?;
    let spread = r.value.to_f64() - classical;
    let label = match &payoff {
        PayoffSpec::Call { strike } => format!("call {}", sig(*strike)),
        PayoffSpec::Put { strike } => format!("put {}", sig(*strike)),
        PayoffSpec::Tabulated(_) => "table".to_string(),
    };
    let row = vec![
        label,
        sig(classical),
        sig(r.value.to_f64()),
        sig(spread),
        opt_sig(r.lambda_star),
        opt_sig(r.a_star),
    ];
    csv_out(c.output.as_deref(), &PRICE_HEADER, &[row])?;
    if !r.converged {
        log::warn!("price search did not converge");
    }
    Ok(Report {
        json: document(
            config,
            json!({
                "classical": classical,
                "robust": r.value,
                "spread": ExtReal::from_f64(spread),
                "a_star": r.a_star,
            }),
            json!(r.lambda_star),
            json!({ "evaluations": r.evaluations, "converged": r.converged }),
        ),
        nonconverged: !r.converged,
    })
}

/// Default `--curve` strikes: 0.05 to 3 in steps of 0.05.
fn default_strikes() -> Vec<f64> {
    (1..=60).map(|i| i as f64 * 0.05).collect()
}

fn price_sweep(config: &RunConfig, c: &PriceConfig) -> Result<Report, RunError> {
    if !matches!(c.payoff, config::PayoffConfig::Call { .. }) {
        return Err(RunError::CurveNeedsCall);
    }
    let out = c.output.as_deref().ok_or(RunError::CurveWithoutOutput)?;
    let market = config::market(&c.market).map_err(fail)?;
    let cost = config::cost(&c.cost).map_err(fail)?;
    let strikes = c.strikes.clone().unwrap_or_else(default_strikes);
    let rows = price_curve(&strikes, &market, &cost, &c.penalty.penalty()).map_err(fail)?;
    write_curve(&rows, out).map_err(fail)?;
    let (argmax, _) = rows.iter().fold((f64::NAN, f64::NEG_INFINITY), |b, r| {
        if r.spread.to_f64() > b.1 {
            (r.strike, r.spread.to_f64())
        } else {
            b
        }
    });
    Ok(Report {
        json: document(
            config,
            json!(rows),
            Value::Null,
            json!({ "strikes": rows.len(), "argmax_spread_strike": argmax }),
        ),
        nonconverged: false,
    })
}

fn check_duality(config: &RunConfig, c: &CheckDualityConfig) -> Result<Report, RunError> {
    let mut rows = Vec::new();
    let mut gaps = Vec::new();
    let mut worst = (0.0f64, 0usize);
    for inst in duality_corpus() {
        let cert = certify(&inst).map_err(fail)?;
        log::debug!("instance {}: gap {:.3e}", cert.index, cert.relative_gap);
        if cert.relative_gap > worst.0 {
            worst = (cert.relative_gap, cert.index);
        }
        rows.push(vec![
            cert.index.to_string(),
            cert.atoms.to_string(),
            cert.grid.to_string(),
            sig(cert.exponent),
            cert.penalty.to_string(),
            sig(cert.dual),
            sig(cert.primal),
            sig(cert.relative_gap),
        ]);
        gaps.push(cert);
    }
    csv_out(c.output.as_deref(), &DUALITY_HEADER, &rows)?;
    let passed = worst.0 <= c.tolerance;
    if !passed {
        log::warn!(
            "duality gap {:.3e} on instance {} exceeds {:.1e}",
            worst.0,
            worst.1,
            c.tolerance
        );
    }
    Ok(Report {
        json: document(
            config,
            json!({ "max_relative_gap": worst.0, "worst_instance": worst.1, "instances": gaps }),
            Value::Null,
            json!({ "seed": CORPUS_SEED, "passed": passed }),
        ),
        nonconverged: !passed,
    })
}

fn family(c: &DirectedConfig) -> Result<DirectedFamily, RunError> {
    match &c.family {
        FamilyConfig::LognormalDrift {
            s0,
            sigma,
            maturity,
            b_low,
            b_high,
            members,
        } => {
            wassrisk::directed::lognormal_drift_family(*s0, *sigma, *maturity, *b_low, *b_high, *members).map_err(fail)
        }
        FamilyConfig::Members { members } => {
            let laws = members
                .iter()
                .map(|m: &BaselineSpec| config::baseline(m).map_err(fail))
                .collect::<Result<Vec<_>, _>>()?;
            DirectedFamily::new(laws).map_err(fail)
        }
    }
}

fn directed(config: &RunConfig, c: &DirectedConfig) -> Result<Report, RunError> {
    let fam = family(c)?;
    let report = fam.check_dir();
    let mut rows = Vec::new();
    let mut gaps = Vec::new();
    let mut envelope = Value::Null;
    if report.passed {
        let index = fam.envelope_index().map_err(fail)?;
        let env = lower_envelope(&fam).map_err(fail)?;
        let var = robust_var_curve(&fam, &c.alphas).map_err(fail)?;
        envelope = json!({ "member": index, "mean": env.mean(), "var": var });
        for &alpha in &c.alphas {
            let t = tail_identity_check(&fam, alpha, c.quad_nodes).map_err(fail)?;
            rows.push(vec![sig(alpha), sig(t.lhs), sig(t.rhs), sig(t.gap)]);
            gaps.push(json!({ "alpha": alpha, "robust_avar": t.lhs, "tail_integral": t.rhs, "gap": t.gap }));
        }
    } else {
        log::info!("family is not directed; tail identity skipped");
    }
    csv_out(c.output.as_deref(), &DIRECTED_HEADER, &rows)?;
    Ok(Report {
        json: document(
            config,
            json!({ "directed": report.passed, "envelope": envelope, "tail_identity": gaps }),
            Value::Null,
            json!({ "witness": report.witness, "members": fam.members().len() }),
        ),
        nonconverged: false,
    })
}

fn finite_dual(config: &RunConfig, c: &FiniteDualConfig) -> Result<Report, RunError> {
    let space = FiniteSpace::new(c.outcomes.clone()).map_err(fail)?;
    let priors = PriorSet::new(c.vertices.clone()).map_err(fail)?;
    let loss = c.loss.loss();
    let d = dual_roce(&space, &priors, &loss, c.resolution).map_err(fail)?;
    let row = vec![
        loss.label().to_string(),
        space.n().to_string(),
        priors.vertices().len().to_string(),
        sig(d.primal),
        sig(d.dual),
        sig(d.gap),
        d.resolution.to_string(),
    ];
    csv_out(c.output.as_deref(), &FINITE_HEADER, &[row])?;
    if d.coarse {
        log::warn!("duality gap {:.3e} exceeds the lattice tolerance", d.gap);
    }
    Ok(Report {
        json: document(
            config,
            json!({ "primal": d.primal, "dual": d.dual, "gap": d.gap, "q_star": d.q_star }),
            Value::Null,
            json!({ "resolution": d.resolution, "coarse": d.coarse }),
        ),
        nonconverged: d.coarse,
    })
}
