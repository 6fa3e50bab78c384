use std::fmt::Write as _;
use std::path::Path;

use cabs_core::abstraction::{
    check_effect_focused, check_interventional_consistency, check_naturality, check_sufficient_statistic,
    compose_abstractions, epsilon_from_tau, AbstractionError, AbstractionReport, Scope,
};
use cabs_core::docalc::{high_admg_from_cluster_map, rule_applicable, verify_rule_on_low, Rule, RuleQuery};
use cabs_core::engine::{
    decode_assignment, describe_assignment, interventional, joint as engine_joint, validate_model, CausalModel,
};
use cabs_core::fixtures;
use cabs_core::format::{AbstractionFile, ModelFile};
use cabs_core::graph::{validate_cluster_map, Admg, ClusterMapError, Dag, NodeId, NodeSet, ValidatedClusterMap};
use cabs_core::queries::enumerate_queries;
use serde_json::{json, Value};

use crate::input::{self, at, err, InputError, Result};
use crate::render::{self, graph_json, graph_text, join, names, prob, sci, verdict, Outcome};
use crate::{DocalcArgs, Mode, ScopeArg};

fn observed_only(m: &CausalModel, nodes: &NodeSet, flag: &str) -> Result<()> {
    for n in nodes {
        m.domain(n.as_str()).map_err(err)?;
        if m.latent().contains(n) {
            return Err(InputError(format!("{flag}: `{n}` is latent")));
        }
    }
    Ok(())
}

pub fn intervene(path: &Path, mut do_set: NodeSet, values: &[(NodeId, String)], target: &NodeSet) -> Result<Outcome> {
    let m = input::model(path)?;
    do_set.extend(values.iter().map(|(n, _)| n.clone()));
    if target.is_empty() {
        return Err(InputError("--target: at least one node is required".into()));
    }
    observed_only(&m, &do_set, "--do")?;
    observed_only(&m, target, "--target")?;
    let mut wanted = Vec::new();
    for (n, label) in values {
        let i = m
            .domain(n.as_str())
            .map_err(err)?
            .index_of(label)
            .ok_or_else(|| InputError(format!("--do: `{label}` is not a value of `{n}`")))?;
        wanted.push((n.clone(), i));
    }
    let k = interventional(&m, &do_set, target).map_err(err)?;

    let mut text = String::new();
    let mut rows = Vec::new();
    for r in 0..k.rows() {
        let input = decode_assignment(k.inputs(), r);
        let matches = wanted.iter().all(|(n, i)| {
            let pos = k.inputs().iter().position(|v| v.name == *n).expect("intervened node");
            input[pos] == *i
        });
        if !matches {
            continue;
        }
        let cond = describe_assignment(k.inputs(), &input);
        let given = if cond.is_empty() {
            String::new()
        } else {
            format!(" | do({cond})")
        };
        let mut outcomes = Vec::new();
        for c in 0..k.cols() {
            let out = describe_assignment(k.outputs(), &decode_assignment(k.outputs(), c));
            let p = k.get(r, c);
            let _ = writeln!(text, "p({out}{given}) = {}", prob(p));
            outcomes.push(json!({ "assignment": out, "p": p }));
        }
        rows.push(json!({ "do": cond, "outcomes": outcomes }));
    }
    let query = format!("p({} | do({}))", join(target), join(&do_set));
    Ok(Outcome::ok(text, json!({ "query": query, "rows": rows })))
}

pub fn joint(path: &Path) -> Result<Outcome> {
    let m = input::model(path)?;
    let observed: NodeSet = m.observed().into_iter().collect();
    let d = engine_joint(&m).marginalize(&observed).map_err(err)?;
    let mut text = String::new();
    let mut entries = Vec::new();
    for (i, &p) in d.probs().iter().enumerate() {
        let a = describe_assignment(d.vars(), &decode_assignment(d.vars(), i));
        let _ = writeln!(text, "p({a}) = {}", prob(p));
        entries.push(json!({ "assignment": a, "p": p }));
    }
    Ok(Outcome::ok(
        text,
        json!({ "nodes": names(&observed), "entries": entries }),
    ))
}

/// Runs a check; a high graph that is not a graphical abstraction of the
/// low graph is a failed check rather than an input error.
fn graph_failure(e: AbstractionError) -> std::result::Result<String, InputError> {
    match e {
        AbstractionError::ClusterMap(ClusterMapError::Infeasible(f)) => Ok(f.to_string()),
        AbstractionError::ClusterMap(e @ ClusterMapError::HighNodesMismatch { .. }) => Ok(e.to_string()),
        e => Err(err(e)),
    }
}

pub fn check(
    low_path: &Path,
    high_path: &Path,
    map_path: &Path,
    mode: Mode,
    scope: ScopeArg,
    limit: Option<usize>,
) -> Result<Outcome> {
    let low = input::model(low_path)?;
    let high = input::model(high_path)?;
    let ab = input::abstraction(map_path, Some(&low), Some(&high))?;
    let cm = &ab.cluster_map;
    let scope = match scope {
        ScopeArg::Nodes => Scope::Nodes,
        ScopeArg::Subsets => Scope::Subsets,
    };
    let run = || -> std::result::Result<Vec<AbstractionReport>, AbstractionError> {
        let mut reports = Vec::new();
        if mode != Mode::Effect {
            reports.push(check_naturality(&low, &high, cm, &ab.tau)?);
            reports.push(check_interventional_consistency(&low, &high, cm, &ab.tau, scope)?);
        }
        if mode != Mode::Cause {
            let eps = match &ab.epsilon {
                Some(e) => e.clone(),
                None => epsilon_from_tau(&low, cm, &ab.tau)?,
            };
            reports.push(check_effect_focused(&low, &high, cm, &eps)?);
            reports.push(check_sufficient_statistic(&low, cm, &ab.tau)?);
        }
        Ok(reports)
    };
    let reports = match run() {
        Ok(r) => r,
        Err(e) => {
            let reason = graph_failure(e)?;
            return Ok(Outcome {
                passed: false,
                text: format!("FAIL: the high graph is not a graphical abstraction of the low graph: {reason}\n"),
                json: json!({ "passed": false, "graph_failure": reason, "reports": [] }),
            });
        }
    };
    let passed = reports.iter().all(|r| r.passed);
    let mut text = String::new();
    for r in &reports {
        render::report_text(&mut text, r, limit);
    }
    let _ = writeln!(text, "overall: {}", verdict(passed));
    let json = json!({
        "passed": passed,
        "reports": reports.iter().map(|r| render::report_json(r, limit)).collect::<Vec<_>>(),
    });
    Ok(Outcome { passed, text, json })
}

pub fn compose(
    map1: &Path,
    map2: &Path,
    low: Option<&Path>,
    mid: Option<&Path>,
    high: Option<&Path>,
) -> Result<Outcome> {
    let load = |p: Option<&Path>| p.map(input::model).transpose();
    let (low, mid, high) = (load(low)?, load(mid)?, load(high)?);
    let a = input::abstraction(map1, low.as_ref(), mid.as_ref())?;
    let b = input::abstraction(map2, mid.as_ref(), high.as_ref())?;
    let (cm, tau) = compose_abstractions(&a.cluster_map, &a.tau, &b.cluster_map, &b.tau).map_err(|e| {
        let hint = if mid.is_none() {
            " (pass --mid to fix the shared domains)"
        } else {
            ""
        };
        InputError(format!("{e}{hint}"))
    })?;
    let file = AbstractionFile::from_parts(&cm, &tau, None).map_err(err)?;
    let text = file.to_json();
    let json = serde_json::from_str(&text).expect("own output parses");
    Ok(Outcome::ok(text, json))
}

fn graph_outcome(g: &Admg) -> Outcome {
    let mut text = String::new();
    graph_text(&mut text, g);
    Outcome::ok(text, graph_json(g))
}

fn graph_op(
    path: &Path,
    op: impl FnOnce(&Dag) -> std::result::Result<Dag, cabs_core::graph::GraphError>,
) -> Result<Outcome> {
    let (g, _) = input::dag(path)?;
    let h = op(&g).map_err(err)?;
    Ok(graph_outcome(&Admg::from_dag(h)))
}

pub fn graph_merge(path: &Path, a: &str, b: &str, into: &str) -> Result<Outcome> {
    graph_op(path, |g| g.merge_nodes(a, b, into))
}

pub fn graph_delete(path: &Path, node: &str) -> Result<Outcome> {
    graph_op(path, |g| g.delete_node(node))
}

pub fn validate_map(low: &Path, map: &Path, high: Option<&Path>) -> Result<Outcome> {
    let (g, _) = input::dag(low)?;
    let cm = input::cluster_map(map, g.nodes(), &NodeSet::new())?;
    let result = match high {
        Some(p) => validate_cluster_map(&g, &input::dag(p)?.0, &cm),
        None => ValidatedClusterMap::derive(&g, &cm),
    };
    let v = match result {
        Ok(v) => v,
        Err(e @ (ClusterMapError::Infeasible(_) | ClusterMapError::HighNodesMismatch { .. })) => {
            let reason = e.to_string();
            return Ok(Outcome {
                passed: false,
                text: format!("invalid: {reason}\n"),
                json: json!({ "valid": false, "reason": reason }),
            });
        }
        Err(e) => return Err(at(map, e)),
    };
    let ops: Vec<String> = v.witness().iter().map(ToString::to_string).collect();
    let high = Admg::from_dag(v.high_graph().clone());
    let mut text = String::from("valid\n");
    let _ = writeln!(text, "operations: {}", ops.join(", "));
    graph_text(&mut text, &high);
    Ok(Outcome::ok(
        text,
        json!({ "valid": true, "operations": ops, "high": graph_json(&high) }),
    ))
}

pub fn project(path: &Path) -> Result<Outcome> {
    Ok(graph_outcome(&input::admg(path)?))
}

pub fn dsep(path: &Path, x: &NodeSet, y: &NodeSet, given: &NodeSet) -> Result<Outcome> {
    let h = input::admg(path)?;
    let separated = h.d_separated(x, y, given).map_err(err)?;
    let statement = format!("{} ⟂ {} | {}", join(x), join(y), join(given));
    let word = if separated { "separated" } else { "not separated" };
    Ok(Outcome {
        passed: separated,
        text: format!("{statement}: {word}\n"),
        json: json!({ "statement": statement, "separated": separated }),
    })
}

pub fn docalc(args: &DocalcArgs, limit: Option<usize>) -> Result<Outcome> {
    let m = input::model(&args.low)?;
    let cm = input::cluster_map(&args.map, m.graph().nodes(), m.latent())?;
    let ca = high_admg_from_cluster_map(m.graph(), m.latent(), &cm).map_err(|e| at(&args.map, e))?;
    let rule = Rule::from_number(args.rule).expect("range checked by the parser");
    let rq = RuleQuery::new(rule, args.x.clone(), args.y.clone(), args.z.clone(), args.w.clone()).map_err(err)?;
    let app = rule_applicable(&ca.admg, &rq).map_err(err)?;

    let mut text = String::new();
    let _ = writeln!(text, "{rule}: {}", rq.equality());
    graph_text(&mut text, &ca.admg);
    let _ = writeln!(text, "applicable: {}", if app.applicable { "yes" } else { "no" });
    let _ = writeln!(text, "  tested {}", app.statement);
    let mut json = json!({
        "rule": rule.number(),
        "equality": rq.equality(),
        "high": graph_json(&ca.admg),
        "applicable": app.applicable,
        "statement": app.statement,
    });

    let mut passed = app.applicable;
    if args.verify {
        let r = verify_rule_on_low(&m, &cm, &rq).map_err(err)?;
        passed &= r.passed;
        let _ = writeln!(text, "verification on the low model: {}", verdict(r.passed));
        let _ = writeln!(
            text,
            "  max residual {} (tolerance {}), {} assignments checked, {} skipped for zero mass",
            sci(r.residual),
            sci(r.tolerance),
            r.checked,
            r.skipped
        );
        for a in &r.assignments {
            let label = if a.assignment.is_empty() {
                "(empty)"
            } else {
                a.assignment.as_str()
            };
            let _ = writeln!(text, "    {label}: {}", sci(a.residual));
        }
        let shown = limit.unwrap_or(r.witnesses.len()).min(r.witnesses.len());
        if shown > 0 {
            let _ = writeln!(text, "  witnesses ({shown} of {}):", r.witnesses.len());
            for w in &r.witnesses[..shown] {
                let _ = writeln!(
                    text,
                    "    [{}] -> [{}]: {} vs {}",
                    w.input,
                    w.output,
                    sci(w.lhs),
                    sci(w.rhs)
                );
            }
        }
        json["verification"] = json!({
            "passed": r.passed,
            "tolerance": r.tolerance,
            "max_residual": r.residual,
            "checked": r.checked,
            "skipped": r.skipped,
            "assignments": r.assignments,
            "witness_count": r.witnesses.len(),
            "witnesses": r.witnesses[..shown],
        });
    }
    json["passed"] = Value::Bool(passed);
    Ok(Outcome { passed, text, json })
}

pub fn enumerate(path: &Path) -> Result<Outcome> {
    let h = input::admg(path)?;
    let queries: Vec<String> = enumerate_queries(h.directed())
        .iter()
        .map(ToString::to_string)
        .collect();
    let mut text = format!("{} queries\n", queries.len());
    for q in &queries {
        let _ = writeln!(text, "{q}");
    }
    Ok(Outcome::ok(text, json!({ "count": queries.len(), "queries": queries })))
}

pub fn validate(
    models: &[std::path::PathBuf],
    map: Option<&Path>,
    low: Option<&Path>,
    high: Option<&Path>,
) -> Result<Outcome> {
    if models.is_empty() && map.is_none() {
        return Err(InputError("nothing to validate: pass --model or --map".into()));
    }
    let mut text = String::new();
    let mut files = Vec::new();
    for p in models {
        let file = input::model_file(p)?;
        let kind = if file.kernels.is_some() {
            let m = file.to_model().map_err(|e| at(p, e))?;
            validate_model(&m).map_err(|e| at(p, e))?;
            "model"
        } else {
            file.to_admg().map_err(|e| at(p, e))?;
            "graph"
        };
        let _ = writeln!(text, "ok: {} ({kind}, {} nodes)", p.display(), file.nodes.len());
        files.push(json!({ "path": p.display().to_string(), "kind": kind, "nodes": file.nodes.len() }));
    }
    if let Some(p) = map {
        let low = low.map(input::model).transpose()?;
        let high = high.map(input::model).transpose()?;
        let ab = input::abstraction(p, low.as_ref(), high.as_ref())?;
        if let (Some(l), Some(h)) = (&low, &high) {
            validate_cluster_map(l.graph(), h.graph(), &ab.cluster_map).map_err(|e| at(p, e))?;
            ab.tau.check(l, h, &ab.cluster_map).map_err(|e| at(p, e))?;
        }
        let n = ab.cluster_map.high_nodes().len();
        let _ = writeln!(text, "ok: {} (abstraction, {n} clusters)", p.display());
        files.push(json!({ "path": p.display().to_string(), "kind": "abstraction", "clusters": n }));
    }
    Ok(Outcome::ok(text, json!({ "valid": true, "files": files })))
}

pub fn fixtures(dir: &Path) -> Result<Outcome> {
    std::fs::create_dir_all(dir).map_err(|e| at(dir, e))?;
    let mut files: Vec<(String, String)> = Vec::new();
    let model = |m: &CausalModel| ModelFile::from_model(m).to_json();
    let mut add = |name: &str, contents: String| files.push((name.to_owned(), contents));

    let ab = fixtures::ab_model();
    let id = fixtures::identity_abstraction(&ab);
    add("ab.json", model(&ab));
    add(
        "ab-identity-map.json",
        map_json(&id.cluster_map, &id.tau, id.epsilon.as_ref())?,
    );
    add("confounded.json", model(&fixtures::confounded_model()));
    for (prefix, f) in [("chain", fixtures::chain_effect()), ("voting", fixtures::voting())] {
        add(&format!("{prefix}-low.json"), model(&f.low));
        add(&format!("{prefix}-high.json"), model(&f.high));
        add(
            &format!("{prefix}-map.json"),
            map_json(&f.cluster_map, &f.tau, f.epsilon.as_ref())?,
        );
    }
    let c = fixtures::three_level_chain();
    add("chain3-low.json", model(&c.low));
    add("chain3-middle.json", model(&c.middle));
    add("chain3-high.json", model(&c.high));
    add("chain3-map12.json", map_json(&c.cm12, &c.tau12, None)?);
    add("chain3-map23.json", map_json(&c.cm23, &c.tau23, None)?);

    let mut text = String::new();
    let mut written = Vec::new();
    for (name, contents) in &files {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| at(&path, e))?;
        let _ = writeln!(text, "wrote {}", path.display());
        written.push(path.display().to_string());
    }
    Ok(Outcome::ok(text, json!({ "written": written })))
}

fn map_json(
    cm: &cabs_core::graph::ClusterMap,
    tau: &cabs_core::abstraction::TauFamily,
    eps: Option<&cabs_core::abstraction::EpsilonFamily>,
) -> Result<String> {
    Ok(AbstractionFile::from_parts(cm, tau, eps).map_err(err)?.to_json())
}
