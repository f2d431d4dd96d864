use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;
use serde_json::{json, Value};

use sctx_core::bell::{chsh_family, evaluate, lift_to_cone, verify_characterization, LinearInequality};
use sctx_core::factory::{
    self, avg_collection_uniqueness, build_suspension_vertex_avg, build_suspension_vertex_det,
    det_collection_uniqueness, validate_avg_collection, validate_det_collection, AvgCollection, ConstructedVertex,
    DetCollection, FactoryError,
};
use sctx_core::io::{labels_from_json, CertificateJson, LabelsJson, SDistJson, SuspensionPointJson};
use sctx_core::join::{cone_decompose, suspension_decompose};
use sctx_core::polytope::{enumerate_vertices, is_noncontextual, is_vertex, vsupp};
use sctx_core::scenario::{build_cycle, build_line, build_point, cone, suspension, LineSpec, ScenarioSpec};
use sctx_core::{SDist, Scenario};

use crate::inputs::{caps_from_env, internal, invalid, parse_scenario, Failure, Inputs};
use crate::{BellCmd, Cmd, DistCmd, Example, FactoryCmd, Kind, Over, PolytopeCmd, ScenarioCmd, SolveCmd};

type Res = Result<Value, Failure>;

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn dist_on(inputs: &mut Inputs, x: &Arc<Scenario>, path: &Path) -> Result<SDist, Failure> {
    let j: SDistJson = inputs.json(path)?;
    j.to_sdist(x).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn modulus(m: Option<u32>, spec_m: Option<u32>) -> Result<u32, Failure> {
    m.or(spec_m).ok_or_else(|| invalid("modulus required: pass --m or set \"m\" in the scenario"))
}

fn family(inputs: &mut Inputs, name: &str) -> Result<Vec<LinearInequality>, Failure> {
    if name == "chsh" {
        return Ok(chsh_family());
    }
    let fam: Vec<LinearInequality> = inputs.json(Path::new(name))?;
    Ok(fam.iter().map(LinearInequality::canonicalized).collect())
}

fn sdists(ps: &[SDist]) -> Value {
    json!({ "count": ps.len(), "vertices": ps.iter().map(SDistJson::from_sdist).collect::<Vec<_>>() })
}

pub fn execute(cmd: &Cmd, inputs: &mut Inputs) -> Res {
    let caps = caps_from_env()?;
    match cmd {
        Cmd::Scenario { cmd } => scenario(cmd, inputs),
        Cmd::Dist { cmd } => dist(cmd, inputs, caps),
        Cmd::Polytope { cmd } => match cmd {
            PolytopeCmd::Vertices { scenario, m } => {
                let (x, spec_m) = inputs.scenario_with_m(scenario)?;
                let m = modulus(*m, spec_m)?;
                Ok(sdists(&enumerate_vertices(&x, m, caps).map_err(invalid)?))
            }
            PolytopeCmd::Vsupp { scenario, dist } => {
                let x = inputs.scenario(scenario)?;
                let p = dist_on(inputs, &x, dist)?;
                Ok(sdists(&vsupp(&p, caps).map_err(invalid)?))
            }
        },
        Cmd::Bell { cmd } => bell(cmd, inputs, caps),
        Cmd::Factory { cmd } => factory_cmd(cmd, inputs, caps),
        Cmd::Solve { cmd: SolveCmd::Uniqueness { collection } } => {
            let r = match read_collection(inputs, collection)? {
                Collection::Det(c) => {
                    validate_det_collection(&c).map_err(|f| invalid(failures(&f)))?;
                    det_collection_uniqueness(&c)
                }
                Collection::Avg(c) => {
                    validate_avg_collection(&c).map_err(|f| invalid(failures(&f)))?;
                    avg_collection_uniqueness(&c)
                }
            }
            .map_err(internal)?;
            Ok(to_value(&r))
        }
    }
}

fn scenario(cmd: &ScenarioCmd, inputs: &mut Inputs) -> Res {
    let spec = match cmd {
        ScenarioCmd::New { kind, n, m } => {
            let x = match kind {
                Kind::Point => build_point("v"),
                Kind::Line => build_line(*n).map_err(invalid)?,
                Kind::Cycle => build_cycle(*n).map_err(invalid)?,
            };
            ScenarioSpec { m: *m, ..x.to_spec() }
        }
        ScenarioCmd::Cone { scenario, apex } => {
            let (x, m) = inputs.scenario_with_m(scenario)?;
            ScenarioSpec { m, ..cone(&x, apex).map_err(invalid)?.scenario.to_spec() }
        }
        ScenarioCmd::Suspend { scenario } => {
            let (x, m) = inputs.scenario_with_m(scenario)?;
            ScenarioSpec { m, ..suspension(&x).map_err(invalid)?.scenario.to_spec() }
        }
        ScenarioCmd::Validate { scenario } => {
            let x = inputs.scenario(scenario)?;
            return Ok(json!({
                "valid": true,
                "name": x.name(),
                "generators": x.generators().iter().map(|&g| x.id(g)).collect::<Vec<_>>(),
                "simplices_by_dimension": x.count_by_dim(),
            }));
        }
    };
    parse_scenario(&spec)?;
    Ok(to_value(&spec))
}

fn dist(cmd: &DistCmd, inputs: &mut Inputs, caps: sctx_core::polytope::Caps) -> Res {
    match cmd {
        DistCmd::Validate { scenario, dist } => {
            let x = inputs.scenario(scenario)?;
            let p = dist_on(inputs, &x, dist)?;
            Ok(json!({ "valid": true, "m": p.m(), "deterministic": p.is_deterministic() }))
        }
        DistCmd::Contextual { scenario, dist } => {
            let x = inputs.scenario(scenario)?;
            let p = dist_on(inputs, &x, dist)?;
            let cert = is_noncontextual(&p, caps).map_err(invalid)?;
            Ok(json!({
                "verdict": cert.verdict(),
                "certificate": CertificateJson::from_certificate(&cert, &x, p.m()),
            }))
        }
        DistCmd::Vertex { scenario, dist } => {
            let x = inputs.scenario(scenario)?;
            let p = dist_on(inputs, &x, dist)?;
            Ok(to_value(&is_vertex(&p)))
        }
        DistCmd::Decompose { base, dist, over, apex } => {
            let x = inputs.scenario(base)?;
            match over {
                Over::Cone => {
                    let c = cone(&x, apex).map_err(invalid)?;
                    let p = dist_on(inputs, &c.scenario, dist)?;
                    let jp = cone_decompose(&c, &p).map_err(invalid)?;
                    Ok(json!({ "join": sctx_core::io::join_to_json(&jp) }))
                }
                Over::Suspension => {
                    let s = suspension(&x).map_err(invalid)?;
                    let p = dist_on(inputs, &s.scenario, dist)?;
                    let sp = suspension_decompose(&s, &p).map_err(invalid)?;
                    Ok(to_value(&SuspensionPointJson::from_point(&sp)))
                }
            }
        }
    }
}

fn bell(cmd: &BellCmd, inputs: &mut Inputs, caps: sctx_core::polytope::Caps) -> Res {
    match cmd {
        BellCmd::Family { name } => {
            if name != "chsh" {
                return Err(invalid(format!("unknown family {name:?}; built in: chsh")));
            }
            Ok(json!({ "count": 8, "inequalities": chsh_family() }))
        }
        BellCmd::Lift { family: name, m, scenario, apex } => {
            let x = match scenario {
                Some(p) => inputs.scenario(p)?,
                None => Arc::new(build_cycle(4).map_err(internal)?),
            };
            let fam = family(inputs, name)?;
            let lifted = lift_to_cone(&fam, &x, apex, *m).map_err(invalid)?;
            Ok(json!({ "count": lifted.len(), "inequalities": lifted }))
        }
        BellCmd::Evaluate { scenario, dist, family: name } => {
            let x = inputs.scenario(scenario)?;
            let p = dist_on(inputs, &x, dist)?;
            let fam = family(inputs, name)?;
            let evals = fam.iter().map(|i| evaluate(i, &p)).collect::<Result<Vec<_>, _>>().map_err(invalid)?;
            let all = evals.iter().all(|e| e.satisfied);
            Ok(json!({ "satisfied": all, "evaluations": evals }))
        }
        BellCmd::Check { scenario, m, family: name, samples, seed } => {
            let (x, spec_m) = inputs.scenario_with_m(scenario)?;
            let m = modulus(*m, spec_m)?;
            let fam = family(inputs, name)?;
            let r = verify_characterization(&x, m, &fam, *samples, *seed, caps).map_err(invalid)?;
            Ok(json!({
                "passed": r.passed,
                "vertices": r.vertices,
                "noncontextual_vertices": r.noncontextual_vertices,
                "contextual_vertices": r.contextual_vertices,
                "violating_noncontextual": r.violating_noncontextual,
                "undetected_contextual": r.undetected_contextual,
                "samples": r.samples,
                "noncontextual_samples": r.noncontextual_samples,
                "sample_mismatches": r.sample_mismatches,
                "counterexample": r.counterexample.as_ref().map(SDistJson::from_sdist),
            }))
        }
    }
}

enum Collection {
    Det(DetCollection),
    Avg(AvgCollection),
}

fn read_collection(inputs: &mut Inputs, path: &Path) -> Result<Collection, Failure> {
    let v: Value = inputs.json(path)?;
    let parsed = if v.get("exponents").is_some() {
        serde_json::from_value(v).map(Collection::Avg)
    } else {
        serde_json::from_value(v).map(Collection::Det)
    };
    parsed.map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn failures<E: std::fmt::Display>(fs: &[E]) -> String {
    fs.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("; ")
}

/// Construction input read from a file.
#[derive(Deserialize)]
struct VertexInput {
    construction: String,
    scenario: ScenarioSpec,
    line: LineSpec,
    m: u32,
    psi: LabelsJson,
    #[serde(default)]
    q: Vec<Vec<SDistJson>>,
    #[serde(default)]
    p: Vec<SDistJson>,
}

fn refused(e: FactoryError) -> Failure {
    match e {
        FactoryError::Certification(_) => internal(e),
        _ => invalid(e),
    }
}

fn vertex_report(v: &ConstructedVertex, extra: Value) -> Value {
    let c = &v.certification;
    json!({
        "construction": extra,
        "scenario": v.suspension.scenario.to_spec(),
        "suspension_point": SuspensionPointJson::from_point(&v.point),
        "dist": SDistJson::from_sdist(&v.sdist),
        "certification": {
            "is_vertex": c.vertex.is_vertex,
            "rank": c.vertex.rank,
            "coordinates": c.vertex.coordinates,
            "active_inequalities": c.vertex.active_inequalities,
            "verdict": "contextual",
            "functional": c.functional,
            "suspension_lp": if c.suspension_lp_noncontextual { "noncontextual" } else { "contextual" },
        },
    })
}

fn det_vertex(inp: &factory::DetInputs, caps: sctx_core::polytope::Caps) -> Res {
    let out = build_suspension_vertex_det(&inp.x, &inp.line, &inp.q, &inp.psi, caps).map_err(refused)?;
    let extra = json!({
        "kind": "deterministic",
        "collection": out.collection,
        "h_bound_from_psi": out.collection.h,
    });
    Ok(vertex_report(&out.vertex, extra))
}

fn avg_vertex(inp: &factory::AvgInputs, caps: sctx_core::polytope::Caps) -> Res {
    let (out, c) = build_suspension_vertex_avg(&inp.x, &inp.line, &inp.p, &inp.psi, caps).map_err(refused)?;
    Ok(vertex_report(&out, json!({ "kind": "average", "collection": c })))
}

fn factory_cmd(cmd: &FactoryCmd, inputs: &mut Inputs, caps: sctx_core::polytope::Caps) -> Res {
    match cmd {
        FactoryCmd::ValidateCollection { collection } => {
            let (kind, res) = match read_collection(inputs, collection)? {
                Collection::Det(c) => ("deterministic", validate_det_collection(&c).map_err(|f| failures(&f))),
                Collection::Avg(c) => ("average", validate_avg_collection(&c).map_err(|f| failures(&f))),
            };
            match res {
                Ok(()) => Ok(json!({ "kind": kind, "valid": true })),
                Err(f) => Err(invalid(format!("invalid {kind} collection: {f}"))),
            }
        }
        FactoryCmd::SuspensionVertex { example, input, collection, m } => {
            if let Some(path) = input {
                let vi: VertexInput = inputs.json(path)?;
                let x = parse_scenario(&vi.scenario)?;
                let psi = labels_from_json(&x, vi.m, &vi.psi).map_err(invalid)?;
                let read = |d: &SDistJson| d.to_sdist(&x).map_err(invalid);
                return match vi.construction.as_str() {
                    "deterministic" => {
                        let q = vi.q.iter().map(|row| row.iter().map(read).collect()).collect::<Result<_, _>>()?;
                        det_vertex(&factory::DetInputs { x: Arc::clone(&x), line: vi.line, q, psi }, caps)
                    }
                    "average" => {
                        let p = vi.p.iter().map(read).collect::<Result<_, _>>()?;
                        avg_vertex(&factory::AvgInputs { x: Arc::clone(&x), line: vi.line, p, psi }, caps)
                    }
                    other => Err(invalid(format!("construction must be \"deterministic\" or \"average\", got {other:?}"))),
                };
            }
            match example {
                Some(Example::ThreeWay) => det_vertex(&factory::three_way_inputs(), caps),
                Some(Example::PureLine) => {
                    let c = match collection {
                        Some(path) => match read_collection(inputs, path)? {
                            Collection::Det(c) => c,
                            Collection::Avg(_) => return Err(invalid("pure-line needs a deterministic collection")),
                        },
                        None => DetCollection::arithmetic(*m),
                    };
                    validate_det_collection(&c).map_err(|f| invalid(failures(&f)))?;
                    det_vertex(&factory::pure_line_inputs(&c), caps)
                }
                Some(Example::PrClass2) => avg_vertex(&factory::pr_class2_inputs(), caps),
                Some(Example::AverageLine) => avg_vertex(&factory::average_line_inputs(*m), caps),
                None => Err(invalid("pass --example or --input")),
            }
        }
    }
}
