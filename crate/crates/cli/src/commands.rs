use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use serde::Serialize;
use serde_json::{json, Value};

use onerel_core::analysis::{equal_in_monoid, DehnSample};
use onerel_core::endo::{check_lifts, find_injectivity_violation, surjectivity_evidence};
use onerel_core::family::verify_presentation_equivalence;
use onerel_core::{
    certify_family_system, classify, dehn_sample, equal_deepening, knuth_bendix, CertifyBudgets,
    CompletionLimits, CompletionOutcome, DehnConfig, EndomorphismSpec, OracleConfig, OracleOutcome,
    Presentation, ReductionOrder, RewritingSystem, SampleMode, TerminationEvidence, Word,
};

use crate::{BuildArgs, CompleteArgs, DehnArgs, EndoArgs, EqualArgs, JsonFlag, NfArgs, Status};

pub fn emit_json(command: &str, body: Value) -> anyhow::Result<String> {
    let mut report = json!({ "schema": 1, "command": command });
    if let (Value::Object(r), Value::Object(b)) = (&mut report, body) {
        r.extend(b);
    }
    Ok(serde_json::to_string_pretty(&report)? + "\n")
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("reports serialize")
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn tuple(params: &[i64]) -> (i64, i64, i64, i64) {
    (params[0], params[1], params[2], params[3])
}

pub fn build(args: BuildArgs) -> anyhow::Result<Status> {
    let (al, be, ga, de) = tuple(&args.params);
    let (tag, params) = classify(al, be, ga, de)?;
    let budgets = CertifyBudgets {
        max_weight: args.budget.max_weight,
        fuel: args.budget.fuel,
        ..CertifyBudgets::default()
    };
    let cert = certify_family_system(tag, &params, &budgets)?;
    let system = &cert.system;
    if let Some(out) = &args.out {
        write(out, &system.to_string())?;
    }

    let mut status = Status::Success;
    let mut verification = Value::Null;
    let mut lines = vec![
        format!("{params} {tag}"),
        system.to_string().trim_end().to_string(),
    ];
    if args.verify {
        let config = OracleConfig {
            node_budget: args.node_budget,
            ..OracleConfig::default()
        };
        let xdef = params.x_definition().filter(|_| tag.uses_x());
        let equivalence = verify_presentation_equivalence(
            &params.presentation(),
            system,
            xdef.as_ref(),
            &config,
            args.budget.fuel,
        )?;
        let terminating = match &cert.termination {
            TerminationEvidence::Order { order } => {
                lines.push(format!("order: {order}"));
                true
            }
            TerminationEvidence::Empirical { evidence } => {
                lines.push(format!(
                    "termination: empirical only, {} words of length <= {} {} within {} steps",
                    evidence.samples,
                    evidence.max_len,
                    if evidence.halted {
                        "halted"
                    } else {
                        "did not all halt"
                    },
                    evidence.step_budget
                ));
                if let Some(order) = &cert.informational_order {
                    lines.push(format!("note: the order search also found {order}"));
                }
                evidence.halted
            }
            TerminationEvidence::NotFound => {
                lines.push("termination: no order found within the weight caps".into());
                false
            }
        };
        lines.push(format!("certification: {}", cert.level()));
        lines.push(format!(
            "critical pairs: {} checked, {}",
            cert.confluence.pairs_checked,
            if cert.confluence.joinable {
                "all joinable".to_string()
            } else {
                format!("{} not joinable", cert.confluence.failures.len())
            }
        ));
        for f in &cert.confluence.failures {
            lines.push(format!(
                "  {}: {} vs {}",
                f.pair.source, f.left_normal_form, f.right_normal_form
            ));
        }
        lines.push(format!(
            "equivalence: {}/{} rules oracle-equal, relation sides {}",
            equivalence.rules.len() - equivalence.inconclusive(),
            equivalence.rules.len(),
            if equivalence.refuted() {
                "differ"
            } else {
                "share a normal form"
            }
        ));
        let pass = cert.confluence.joinable && terminating && equivalence.passed();
        lines.push(format!(
            "verification {}",
            if pass { "PASS" } else { "FAIL" }
        ));
        if !pass {
            status = Status::CheckFailed;
        }
        verification = json!({
            "pass": pass,
            "certification": cert.level(),
            "confluence": to_value(&cert.confluence),
            "termination": to_value(&cert.termination),
            "informational_order": cert.informational_order.as_ref().map(|o| o.to_string()),
            "equivalence": to_value(&equivalence),
            "oracle": to_value(&config),
        });
    }

    if args.json.json {
        print!(
            "{}",
            emit_json(
                "build",
                json!({
                    "params": to_value(&params),
                    "case": tag.label(),
                    "system": to_value(system),
                    "budgets": to_value(&budgets),
                    "verification": verification,
                }),
            )?
        );
    } else {
        println!("{}", lines.join("\n").trim_end());
    }
    Ok(status)
}

pub fn complete(args: CompleteArgs) -> anyhow::Result<Status> {
    let pres = Presentation::parse(&read(&args.presentation)?)?;
    let order = match &args.order {
        Some(o) => o.parse::<ReductionOrder>()?,
        None => ReductionOrder::shortlex(pres.alphabet()),
    };
    let limits = CompletionLimits {
        max_rules: args.max_rules,
        max_steps: args.max_steps,
    };
    let report = knuth_bendix(&pres, &order, limits)?;
    let status = match &report.outcome {
        CompletionOutcome::Completed { system } => {
            if let Some(out) = &args.out {
                write(out, &system.to_string())?;
            }
            Status::Success
        }
        CompletionOutcome::LimitExceeded { .. } => Status::BudgetExhausted,
        CompletionOutcome::Unorientable { .. } => Status::CheckFailed,
    };
    if args.json.json {
        print!(
            "{}",
            emit_json("complete", json!({ "report": to_value(&report) }))?
        );
        return Ok(status);
    }
    println!("order: {}", report.order);
    let s = &report.statistics;
    println!(
        "pairs processed: {}, rules added: {}, rules removed: {}, steps: {}",
        s.pairs_processed, s.rules_added, s.rules_removed, s.steps
    );
    match &report.outcome {
        CompletionOutcome::Completed { system } => {
            println!("completed ({})", system.certification().label());
            print!("{system}");
        }
        CompletionOutcome::LimitExceeded { rules_so_far } => println!(
            "limit-exceeded with {rules_so_far} rules (limits: {} rules, {} steps)",
            limits.max_rules, limits.max_steps
        ),
        CompletionOutcome::Unorientable { lhs, rhs } => {
            println!("unorientable: {lhs} = {rhs}")
        }
    }
    Ok(status)
}

pub fn nf(args: NfArgs) -> anyhow::Result<Status> {
    let system = RewritingSystem::parse(&read(&args.system)?)?;
    let word = Word::parse(&args.word, system.alphabet())?;
    let (nf, trace) = system.normal_form(&word, args.fuel)?;
    if args.json.json {
        let mut body = json!({
            "system": to_value(&system),
            "word": word.to_string(),
            "normal_form": nf.to_string(),
            "steps": trace.len(),
            "fuel": args.fuel,
        });
        if args.trace {
            body["trace"] = to_value(&trace.steps);
        }
        print!("{}", emit_json("nf", body)?);
    } else {
        if args.trace {
            println!("{word}");
            for step in &trace.steps {
                println!(
                    "  -> {} (rule {} at {})",
                    step.word, step.rule, step.position
                );
            }
        }
        println!("{nf}");
    }
    Ok(Status::Success)
}

pub fn equal(args: EqualArgs) -> anyhow::Result<Status> {
    let pres = Presentation::parse(&read(&args.presentation)?)?;
    let u = Word::parse(&args.u, pres.alphabet())?;
    let v = Word::parse(&args.v, pres.alphabet())?;
    let (outcome, bound) = match args.bound {
        Some(bound) => (
            equal_in_monoid(&pres, &u, &v, bound, args.node_budget),
            bound,
        ),
        None => {
            let config = OracleConfig {
                node_budget: args.node_budget,
                ..OracleConfig::default()
            };
            let d = equal_deepening(&pres, &u, &v, &config);
            (d.outcome, d.bound)
        }
    };
    let status = match outcome {
        OracleOutcome::Inconclusive => Status::BudgetExhausted,
        _ => Status::Success,
    };
    if args.json.json {
        let body = json!({
            "presentation": to_value(&pres),
            "u": u.to_string(),
            "v": v.to_string(),
            "bound": bound,
            "node_budget": args.node_budget,
            "outcome": to_value(&outcome),
        });
        print!("{}", emit_json("equal", body)?);
        return Ok(status);
    }
    println!("{}", outcome.label());
    if let Some(cert) = outcome.certificate() {
        println!("d = {}, s = {}, bound = {bound}", cert.d, cert.s);
        println!("{}", cert.chain[0]);
        for (w, app) in cert.chain[1..].iter().zip(&cert.applications) {
            let (l, r) = &pres.equations()[app.equation];
            let (from, to) = match app.direction {
                onerel_core::analysis::Direction::LeftToRight => (l, r),
                onerel_core::analysis::Direction::RightToLeft => (r, l),
            };
            println!("  = {w}  ({from} -> {to} at {})", app.position);
        }
    }
    Ok(status)
}

pub fn dehn(args: DehnArgs) -> anyhow::Result<Status> {
    let pres = Presentation::parse(&read(&args.presentation)?)?;
    let mode = match args.mode {
        crate::ModeArg::Exhaustive => SampleMode::Exhaustive,
        crate::ModeArg::Random(count) => SampleMode::Random {
            count,
            seed: args.seed,
        },
    };
    let config = DehnConfig {
        slack: args.slack,
        node_budget: args.node_budget,
        ..DehnConfig::default()
    };
    let table: Vec<DehnSample> = (1..=args.n)
        .map(|n| dehn_sample(&pres, n, &mode, &config))
        .collect::<Result<_, _>>()?;
    let short = matches!(mode, SampleMode::Exhaustive) && table.iter().any(|s| !s.exhaustive);
    if args.json.json {
        let body = json!({
            "presentation": to_value(&pres),
            "sampling": to_value(&mode),
            "config": to_value(&config),
            "table": to_value(&table),
        });
        print!("{}", emit_json("dehn", body)?);
    } else {
        println!(
            "{:>3} {:>5} {:>5} {:>8} {:>8} {:>6}  witness",
            "n", "d", "sp", "classes", "pairs", "cap"
        );
        for s in &table {
            let witness = s
                .dehn_witness
                .as_ref()
                .map_or(String::new(), |(u, v)| format!("{u} ~ {v}"));
            println!(
                "{:>3} {:>5} {:>5} {:>8} {:>8} {:>6}  {witness}",
                s.n, s.dehn, s.space, s.classes, s.pairs_examined, s.bound
            );
        }
        if short {
            println!("node budget exhausted: some classes were not explored");
        }
    }
    Ok(if short {
        Status::BudgetExhausted
    } else {
        Status::Success
    })
}

pub fn endo(args: EndoArgs) -> anyhow::Result<Status> {
    let (al, be, ga, de) = tuple(&args.params);
    let (tag, params) = classify(al, be, ga, de)?;
    let budgets = CertifyBudgets {
        max_weight: args.budget.max_weight,
        fuel: args.budget.fuel,
        ..CertifyBudgets::default()
    };
    let cert = certify_family_system(tag, &params, &budgets)?;
    if !cert.system.certification().is_complete() {
        bail!(
            "the system for {params} is only {}; endomorphism checks need a complete system",
            cert.level()
        );
    }
    let phi: EndomorphismSpec = args.map.parse()?;
    let pres = params.presentation();
    let fuel = args.budget.fuel;
    let lift = check_lifts(&cert.system, &pres, &phi, fuel)?;
    let (preimages, witness) = if lift.lifts {
        (
            Some(surjectivity_evidence(
                &cert.system,
                &pres,
                &phi,
                args.surjective_bound,
                fuel,
            )?),
            find_injectivity_violation(&cert.system, &pres, &phi, args.noninjective_bound, fuel)?,
        )
    } else {
        (None, None)
    };
    let status = if lift.lifts {
        Status::Success
    } else {
        Status::CheckFailed
    };
    if args.json.json {
        let body = json!({
            "params": to_value(&params),
            "system": to_value(&cert.system),
            "map": phi.to_string(),
            "lift": to_value(&lift),
            "surjective_bound": args.surjective_bound,
            "preimages": to_value(&preimages),
            "noninjective_bound": args.noninjective_bound,
            "witness": to_value(&witness),
            "budgets": to_value(&budgets),
        });
        print!("{}", emit_json("endo", body)?);
        return Ok(status);
    }
    println!("{params} {tag}, map {phi}");
    for r in &lift.relations {
        println!(
            "  {} = {}  maps to  {} , {}",
            r.lhs, r.rhs, r.lhs_image_normal_form, r.rhs_image_normal_form
        );
    }
    println!("lifts: {}", if lift.lifts { "yes" } else { "no" });
    if let Some(pre) = &preimages {
        let shown: Vec<String> = pre
            .iter()
            .map(|(g, w)| match w {
                Some(w) => format!("{g} <- {w}"),
                None => format!("{g} <- none"),
            })
            .collect();
        let all = pre.values().all(Option::is_some);
        println!(
            "surjectivity (bound {}): {}{}",
            args.surjective_bound,
            shown.join(", "),
            if all { " (every generator is hit)" } else { "" }
        );
        match &witness {
            Some(w) => println!(
                "injectivity (bound {}): violated by {} and {} (normal forms {}, {}), both map to {}",
                args.noninjective_bound, w.u, w.v, w.u_normal_form, w.v_normal_form, w.image_normal_form
            ),
            None => println!("injectivity (bound {}): no violation found", args.noninjective_bound),
        }
    }
    Ok(status)
}

pub fn hopf_demo(args: JsonFlag) -> anyhow::Result<Status> {
    let r = onerel_core::hopf_demo()?;
    if args.json {
        print!(
            "{}",
            emit_json("hopf-demo", json!({ "report": to_value(&r) }))?
        );
        return Ok(Status::Success);
    }
    println!(
        "presentation: {}",
        r.presentation.to_string().trim_end().replace('\n', "; ")
    );
    print!("{}", r.system);
    println!("certification: {}", r.system.certification().label());
    println!("map: {}", r.map);
    for rel in &r.lift.relations {
        println!(
            "  {} maps to {}, {} maps to {}",
            rel.lhs, rel.lhs_image_normal_form, rel.rhs, rel.rhs_image_normal_form
        );
    }
    println!("lifts: {}", r.lift.lifts);
    for (g, w) in &r.preimages {
        if let Some(w) = w {
            println!("preimage of {g} (bound {}): {w}", r.surjectivity_bound);
        }
    }
    println!(
        "{} does not lift: normal forms {} and {}",
        r.inverse_non_lift.map,
        r.inverse_non_lift.lhs_image_normal_form,
        r.inverse_non_lift.rhs_image_normal_form
    );
    println!(
        "shortest witness (bound {}): {} and {} map to {}; normal forms {} and {}",
        r.witness_bound,
        r.witness.u,
        r.witness.v,
        r.witness.image_normal_form,
        r.witness.u_normal_form,
        r.witness.v_normal_form
    );
    println!(
        "derived witness: {} and {} map to {}; normal forms {} and {}",
        r.derived_witness.u,
        r.derived_witness.v,
        r.derived_witness.image_normal_form,
        r.derived_witness.u_normal_form,
        r.derived_witness.v_normal_form
    );
    println!("{}", r.conclusion);
    Ok(Status::Success)
}
