use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use onerel_core::analysis::{dehn_sample, DehnConfig, SampleMode};
use onerel_core::confluence::is_length_non_increasing;
use onerel_core::family::verify_presentation_equivalence;
use onerel_core::{
    certify_family_system, classify, knuth_bendix, CertifyBudgets, CompletionLimits,
    CompletionOutcome, Error, OracleConfig, ReductionOrder, TerminationEvidence,
};

use crate::commands::emit_json;
use crate::{GridArgs, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Completeness,
    Equivalence,
    Dehn,
    Probe,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridBudgets {
    pub fuel: u64,
    pub max_weight: u32,
    pub node_budget: usize,
    pub max_rules: usize,
    pub max_steps: usize,
    pub dehn_n: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridRunConfig {
    pub ranges: [RangeInclusive<usize>; 4],
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub budgets: GridBudgets,
}

impl GridRunConfig {
    fn tuples(&self) -> Vec<(usize, usize, usize, usize)> {
        let [ra, rb, rc, rd] = &self.ranges;
        let mut out = Vec::new();
        for a in ra.clone() {
            for b in rb.clone() {
                for c in rc.clone() {
                    for d in rd.clone() {
                        out.push((a, b, c, d));
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Row {
    pub tuple: (usize, usize, usize, usize),
    pub case: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certification: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub local_confluence: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub termination: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equivalence: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dehn: Option<String>,
    pub hard_failure: bool,
    #[serde(skip)]
    pub millis: u128,
}

fn budget_or<T>(r: Result<T, Error>, f: impl FnOnce(T) -> String) -> Result<String, Error> {
    match r {
        Ok(t) => Ok(f(t)),
        Err(Error::FuelExhausted { .. }) => Ok("budget-exhausted".into()),
        Err(e) => Err(e),
    }
}

fn run_row(cfg: &GridRunConfig, (a, b, c, d): (usize, usize, usize, usize)) -> Result<Row, Error> {
    let start = Instant::now();
    let (tag, params) = classify(a as i64, b as i64, c as i64, d as i64)?;
    let bud = &cfg.budgets;
    let mut row = Row {
        tuple: (a, b, c, d),
        case: tag.label().into(),
        ..Row::default()
    };
    let certify = CertifyBudgets {
        max_weight: bud.max_weight,
        fuel: bud.fuel,
        ..CertifyBudgets::default()
    };
    if cfg.checks.contains(&Check::Completeness) {
        match certify_family_system(tag, &params, &certify) {
            Ok(cert) => {
                row.certification = Some(cert.level().into());
                row.local_confluence = Some(
                    if cert.confluence.joinable {
                        "pass"
                    } else {
                        "FAIL"
                    }
                    .into(),
                );
                row.hard_failure |= !cert.confluence.joinable;
                row.termination = Some(match &cert.termination {
                    TerminationEvidence::Order { order } => order.to_string(),
                    TerminationEvidence::Empirical { evidence } => format!(
                        "empirical: {}",
                        if evidence.halted {
                            "halted"
                        } else {
                            "budget-exhausted"
                        }
                    ),
                    TerminationEvidence::NotFound => "no order within caps".into(),
                });
            }
            Err(Error::FuelExhausted { .. }) => row.certification = Some("budget-exhausted".into()),
            Err(e) => return Err(e),
        }
    }
    if cfg.checks.contains(&Check::Equivalence) {
        let system = onerel_core::build_system(tag, &params)?;
        let xdef = params.x_definition().filter(|_| tag.uses_x());
        let config = OracleConfig {
            node_budget: bud.node_budget,
            ..OracleConfig::default()
        };
        let report = verify_presentation_equivalence(
            &params.presentation(),
            &system,
            xdef.as_ref(),
            &config,
            bud.fuel,
        );
        row.equivalence = Some(budget_or(report, |r| {
            if r.refuted() {
                "REFUTED".into()
            } else if r.inconclusive() > 0 {
                format!("inconclusive ({}/{})", r.inconclusive(), r.rules.len())
            } else {
                "pass".into()
            }
        })?);
        row.hard_failure |= row.equivalence.as_deref() == Some("REFUTED");
    }
    if cfg.checks.contains(&Check::Probe) {
        let pres = if tag.uses_x() {
            params.tietze_presentation().expect("x is defined")
        } else {
            params.presentation()
        };
        let limits = CompletionLimits {
            max_rules: bud.max_rules,
            max_steps: bud.max_steps,
        };
        let report = knuth_bendix(&pres, &ReductionOrder::shortlex(pres.alphabet()), limits)?;
        row.probe = Some(match &report.outcome {
            CompletionOutcome::Completed { system } => format!(
                "completed, {} rules, length-non-increasing={}",
                system.rules().len(),
                is_length_non_increasing(system)
            ),
            CompletionOutcome::LimitExceeded { rules_so_far } => {
                format!("limit-exceeded ({rules_so_far} rules)")
            }
            CompletionOutcome::Unorientable { lhs, rhs } => format!("unorientable {lhs} = {rhs}"),
        });
    }
    if cfg.checks.contains(&Check::Dehn) {
        let config = DehnConfig {
            node_budget: bud.node_budget,
            ..DehnConfig::default()
        };
        let sample = dehn_sample(
            &params.presentation(),
            bud.dehn_n,
            &SampleMode::Exhaustive,
            &config,
        )?;
        row.dehn = Some(if sample.exhaustive {
            format!("d={} sp={}", sample.dehn, sample.space)
        } else {
            "budget-exhausted".into()
        });
    }
    row.millis = start.elapsed().as_millis();
    Ok(row)
}

fn table(rows: &[Row], timings: bool) -> String {
    let mut out = String::new();
    let col = |o: &Option<String>| o.clone().unwrap_or_else(|| "-".into());
    let _ = write!(
        out,
        "{:<10} {:<10} {:<17} {:<6} {:<48} {:<14} {:<50} {:<12}",
        "tuple", "case", "certification", "lc", "termination", "equivalence", "probe", "dehn"
    );
    if timings {
        out.push_str(" ms");
    }
    out.push('\n');
    for r in rows {
        let (a, b, c, d) = r.tuple;
        let _ = write!(
            out,
            "{:<10} {:<10} {:<17} {:<6} {:<48} {:<14} {:<50} {:<12}",
            format!("({a},{b},{c},{d})"),
            r.case,
            col(&r.certification),
            col(&r.local_confluence),
            col(&r.termination),
            col(&r.equivalence),
            col(&r.probe),
            col(&r.dehn)
        );
        if timings {
            let _ = write!(out, " {}", r.millis);
        }
        out.push('\n');
    }
    let failures = rows.iter().filter(|r| r.hard_failure).count();
    let _ = writeln!(out, "{} rows, {failures} hard failures", rows.len());
    out
}

pub fn run(args: GridArgs) -> anyhow::Result<Status> {
    let range = |r: Option<RangeInclusive<usize>>| r.unwrap_or_else(|| args.range.clone());
    let mut checks = args.checks.clone();
    checks.sort();
    checks.dedup();
    let cfg = GridRunConfig {
        ranges: [
            range(args.alpha),
            range(args.beta),
            range(args.gamma),
            range(args.delta),
        ],
        checks,
        out: args.out,
        budgets: GridBudgets {
            fuel: args.budget.fuel,
            max_weight: args.budget.max_weight,
            node_budget: args.node_budget as usize,
            max_rules: args.max_rules as usize,
            max_steps: args.max_steps as usize,
            dehn_n: args.dehn_n as usize,
        },
    };
    let rows: Vec<Row> = cfg
        .tuples()
        .into_par_iter()
        .map(|t| run_row(&cfg, t))
        .collect::<Result<_, _>>()?;
    let failed = rows.iter().any(|r| r.hard_failure);
    let text = if args.json.json {
        emit_json(
            "grid",
            json!({
                "config": serde_json::to_value(&cfg)?,
                "rows": serde_json::to_value(&rows)?,
                "hard_failures": rows.iter().filter(|r| r.hard_failure).count(),
            }),
        )?
    } else {
        table(&rows, args.timings)
    };
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(if failed {
        Status::CheckFailed
    } else {
        Status::Success
    })
}
