use foelner_rank::embed::{
    cauchy_defect, first_identity_defect, hom_defect, pi_level, psi_hom_defect, rank_convergence, sofic_from_quotient,
    star_defect, tau_rank_convergence, SoficGraph,
};
use foelner_rank::rank::{compare_report, matrix_rank_estimate, matrix_rank_kernel, FolnerParams};
use foelner_rank::tiling::{
    build_bratteli_tiling_system, default_driver, empirical_harmonic, host_graph, interval_driver, quasitile,
    BratteliTilingSystem, HarmonicWeights, TileShape,
};
use foelner_rank::{ConvergenceReport, FiniteSubset, MarkedGroup, Method};
use serde_json::{json, Value};

use crate::config::Settings;
use crate::CliError;

/// What a command produced: a JSON body (or CSV text) and the exit code.
pub struct Outcome {
    pub json: Value,
    pub csv: Option<String>,
    pub code: i32,
}

impl Outcome {
    fn ok(json: Value, csv: Option<String>) -> Self {
        Outcome { json, csv, code: 0 }
    }
}

pub const DEFAULT_N: &[usize] = &[4, 8, 16];

pub fn rank(s: &Settings) -> Result<Outcome, CliError> {
    let g = s.group()?;
    let delta = s.matrix(&g, s.field()?)?;
    let n_list = s.stages("n", DEFAULT_N)?;
    let r = delta.support_radius();
    let window = s.window(r)?;
    let kernel = matrix_rank_kernel(&delta, &n_list)?;
    let image = matrix_rank_estimate(&delta, &n_list, window)?;
    let mut all = kernel.estimates;
    all.extend(image.estimates);
    let report = ConvergenceReport::from_estimates(all);
    let json = json!({
        "k": delta.rows(),
        "support_radius": r,
        "window": window,
        "report": report.to_json(),
    });
    Ok(Outcome::ok(json, Some(report.to_csv())))
}

pub fn luck(s: &Settings) -> Result<Outcome, CliError> {
    let g = s.group()?;
    let delta = s.matrix(&g, s.field()?)?;
    let quotients = s.moduli("m")?.ok_or_else(|| CliError::Usage("luck needs --m".into()))?;
    let r = delta.support_radius();
    let method = match s.get("method").unwrap_or("kernel") {
        "kernel" => Method::FolnerKernel,
        "image" => Method::FolnerImage,
        other => return Err(CliError::Usage(format!("unknown --method `{other}`; use kernel or image"))),
    };
    let params = FolnerParams { n_list: s.stages("n", DEFAULT_N)?, window: s.window(r)?, method };
    let report = compare_report(&delta, &params, &quotients)?;
    let json = json!({
        "k": delta.rows(),
        "support_radius": r,
        "window": params.window,
        "folner_method": method.as_str(),
        "report": report.to_json(),
    });
    Ok(Outcome::ok(json, Some(report.to_csv())))
}

pub fn quasitile_cmd(s: &Settings) -> Result<Outcome, CliError> {
    let g = s.group()?;
    let host = FiniteSubset::from_box(&g, &Settings::dims(s.get("host").unwrap_or("20x20"))?)?;
    let shapes = s
        .get("shapes")
        .unwrap_or("8x8,4x4")
        .split(',')
        .enumerate()
        .map(|(id, d)| Ok(TileShape::new(id, FiniteSubset::from_box(&g, &Settings::dims(d)?)?)?))
        .collect::<Result<Vec<_>, CliError>>()?;
    let eps = s.eps("1/5")?;
    let tiling = quasitile(&host_graph(&host), &shapes, &eps);
    let disjoint = tiling.disjoint(&eps);
    let (cover, ratio) = tiling.cover(&eps);
    let json = json!({
        "host_size": host.len(),
        "shape_sizes": shapes.iter().map(TileShape::size).collect::<Vec<_>>(),
        "eps": foelner_rank::field::render_rational(&eps),
        "tiling": tiling.to_json(),
        "disjoint": {
            "holds": disjoint.holds,
            "worst_ratio": foelner_rank::field::render_rational(&disjoint.worst_ratio),
        },
        "cover": {
            "holds": cover,
            "ratio": foelner_rank::field::render_rational(&ratio),
            "ratio_decimal": foelner_rank::rank::decimal(&ratio),
        },
    });
    // The greedy tiler guarantees ε-disjointness; anything else is a bug.
    let code = if disjoint.holds { 0 } else { 3 };
    Ok(Outcome { json, csv: None, code })
}

type Driver<'a> = Box<dyn Fn(usize) -> foelner_rank::Result<Option<FiniteSubset>> + 'a>;

fn driver<'a>(s: &Settings, g: &'a MarkedGroup) -> Result<Driver<'a>, CliError> {
    match s.get("driver").unwrap_or("folner") {
        "folner" => Ok(Box::new(default_driver(g))),
        other => match other.strip_prefix("interval:").map(str::parse::<usize>) {
            Some(Ok(step)) => Ok(Box::new(interval_driver(g, step)?)),
            _ => Err(CliError::Usage(format!("unknown --driver `{other}`; use folner or interval:<step>"))),
        },
    }
}

/// Host sets beyond this many points times the top shape size are skipped.
const HOST_BUDGET: usize = 40_000_000;

/// Builds the system and weights it by tiling H_k = driver(c_k·j) for the
/// multipliers c_k of `--hosts` (default 2,4), j the top candidate.
fn weighted_system(s: &Settings, g: &MarkedGroup) -> Result<(BratteliTilingSystem, HarmonicWeights), CliError> {
    let depth = s.usize("depth", 2)?;
    let drive = driver(s, g)?;
    let system = build_bratteli_tiling_system(g, depth, &drive)?;
    let top = system.levels().last().expect("depth >= 1");
    let j = top.candidates[0];
    let top_size = top.shapes[0].size();
    let mut hosts = Vec::new();
    for c in s.stages("hosts", &[2, 4])? {
        let Some(h) = drive(c * j)? else { continue };
        if h.len().saturating_mul(top_size) > HOST_BUDGET {
            log::warn!("host {c}·{j} has {} points; skipped", h.len());
            continue;
        }
        hosts.push(h);
    }
    if hosts.is_empty() {
        hosts.push(top.shapes[0].shape().clone());
    }
    let weights = empirical_harmonic(&system, &hosts)?;
    let system = system.with_weights(weights.last().clone())?;
    Ok((system, weights))
}

pub fn bratteli(s: &Settings) -> Result<Outcome, CliError> {
    let g = s.group()?;
    let (system, weights) = weighted_system(s, &g)?;
    let report = system.verify();
    let json = json!({
        "system": system.to_json(),
        "weights": weights.to_json(),
        "verification": report.to_json(),
    });
    Ok(Outcome { json, csv: None, code: if report.holds() { 0 } else { 3 } })
}

pub fn embed_check(s: &Settings) -> Result<Outcome, CliError> {
    let g = s.group()?;
    let field = s.field()?;
    let a = s.element(&g, field)?;
    let b = match s.get("elem-b") {
        Some(text) => foelner_rank::GroupRingElement::parse(&g, field, text)?,
        None => a.clone(),
    };
    let (system, weights) = {
        let mut s = s.clone();
        s.default("depth", "3");
        weighted_system(&s, &g)?
    };
    let depth = system.depth();
    let mut violations = Vec::new();
    let mut levels = Vec::new();
    for i in 1..=depth {
        let hom = hom_defect(&a, &b, &system, i)?;
        let star = star_defect(&a, &system, i)?;
        let cauchy = if i < depth { Some(cauchy_defect(&a, &system, i)?) } else { None };
        for (name, holds) in [("hom", hom.holds()), ("star", star.holds()), ("cauchy", cauchy.as_ref().is_none_or(|c| c.holds()))] {
            if !holds {
                violations.push(format!("{name} defect at level {i}"));
            }
        }
        levels.push(json!({
            "level": i,
            "hom": hom.to_json(),
            "star": star.to_json(),
            "cauchy": cauchy.map(|c| c.to_json()),
        }));
    }
    let reference_n = s.usize("n", 16)?;
    let i_list: Vec<usize> = match s.get("i") {
        Some(_) => s.stages("i", &[])?,
        None => (1..=depth).collect(),
    };
    let convergence = rank_convergence(&a, &system, &i_list, reference_n)?;

    let mut sofic = Vec::new();
    let mut tau = Value::Null;
    if let Some(moduli) = s.moduli("m")? {
        let radius = a.support_radius() + b.support_radius();
        let graphs = moduli
            .iter()
            .map(|m| sofic_from_quotient(&g, m, radius))
            .collect::<foelner_rank::Result<Vec<SoficGraph>>>()?;
        for (m, graph) in moduli.iter().zip(&graphs) {
            let tiling = system.tile_host(graph.graph())?;
            let identity = first_identity_defect(&a, graph, tiling.levels.last().expect("depth >= 1"))?;
            let hom = psi_hom_defect(&a, &b, graph)?;
            if !identity.holds() {
                violations.push(format!("first identity on m={m:?}"));
            }
            if !hom.holds() {
                violations.push(format!("psi hom defect on m={m:?}"));
            }
            sofic.push(json!({
                "moduli": m,
                "vertices": graph.vertex_count(),
                "first_identity": identity.to_json(),
                "psi_hom": hom.to_json(),
            }));
        }
        let series = tau_rank_convergence(&pi_level(&a, &system, depth)?, &system, &graphs)?;
        if !series.holds() {
            violations.push("tau rank gap exceeds the frequency deviation".into());
        }
        tau = series.to_json();
    }
    let json = json!({
        "system": system.to_json(),
        "weights": weights.to_json(),
        "levels": levels,
        "rank_convergence": convergence.to_json(),
        "rank_convergence_kind": "heuristic",
        "sofic": sofic,
        "tau_rank_convergence": tau,
        "violations": violations,
        "holds": violations.is_empty(),
    });
    Ok(Outcome { json, csv: None, code: if violations.is_empty() { 0 } else { 3 } })
}
