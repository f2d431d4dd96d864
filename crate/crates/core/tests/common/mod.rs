//! Oracles and property checks shared by the integration suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use sctx_core::join::cone_decompose;
use sctx_core::polytope::{enumerate_vertices, vsupp, Caps, Coordinates};
use sctx_core::scenario::{build_cycle, cone, Cone};
use sctx_core::sdist::{act, deterministic_sdist, preceq, product, theta, validate_sdist};
use sctx_core::{DetMixture, DeterministicMap, Dist, Outcome, Rat, SDist, Scenario};

pub const CASES: u32 = 256;

pub fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

pub fn chsh() -> Arc<Scenario> {
    static X: OnceLock<Arc<Scenario>> = OnceLock::new();
    Arc::clone(X.get_or_init(|| Arc::new(build_cycle(4).unwrap())))
}

pub fn chsh_cone() -> &'static Cone {
    static C: OnceLock<Cone> = OnceLock::new();
    C.get_or_init(|| cone(&chsh(), "c").unwrap())
}

/// Uniform mass on `{(a, a+k)}`, written out directly.
pub fn shift_dist(m: u32, k: i64) -> Dist {
    let k = k.rem_euclid(m as i64) as u32;
    Dist::new(m, 2, (0..m).map(|a| (Outcome(vec![a, (a + k) % m]), Rat::new(1, m as i64)))).unwrap()
}

/// All labelings of the CHSH vertices `v1..v4`, lexicographic.
pub fn chsh_labelings(m: u32) -> Vec<DeterministicMap> {
    let mut out = Vec::new();
    for code in 0..m.pow(4) {
        let labels = (0..4).rev().map(|k| code / m.pow(k) % m).collect();
        out.push(DeterministicMap::new(m, labels).unwrap());
    }
    out
}

/// CHSH point with edge `s_k` equal to `S^{e_k}`; any exponent vector glues.
pub fn chsh_average_point(m: u32, e: [i64; 4]) -> SDist {
    SDist::new(chsh(), m, e.iter().map(|&k| shift_dist(m, k)).collect()).unwrap()
}

/// PR boxes of the CHSH scenario at `m = 2`: odd numbers of anticorrelated edges.
pub fn pr_boxes() -> Vec<SDist> {
    let mut out = Vec::new();
    for code in 0..16u32 {
        let e = [0, 1, 2, 3].map(|k| ((code >> (3 - k)) & 1) as i64);
        if e.iter().sum::<i64>() % 2 == 1 {
            out.push(chsh_average_point(2, e));
        }
    }
    out
}

/// Deterministic points together with every average point.
pub fn chsh_pool(m: u32) -> Vec<SDist> {
    let x = chsh();
    let mut pool: Vec<SDist> = chsh_labelings(m).iter().map(|phi| deterministic_sdist(&x, phi).unwrap()).collect();
    for code in 0..m.pow(4) {
        let e = [3, 2, 1, 0].map(|k| (code / m.pow(k) % m) as i64);
        pool.push(chsh_average_point(m, e));
    }
    pool
}

fn pool_for(m: u32) -> &'static [SDist] {
    static P2: OnceLock<Vec<SDist>> = OnceLock::new();
    static P3: OnceLock<Vec<SDist>> = OnceLock::new();
    match m {
        2 => P2.get_or_init(|| chsh_pool(2)),
        _ => P3.get_or_init(|| chsh_pool(3)),
    }
}

fn cone_vertices_m2() -> &'static [SDist] {
    static V: OnceLock<Vec<SDist>> = OnceLock::new();
    V.get_or_init(|| enumerate_vertices(&chsh_cone().scenario, 2, Caps::default()).unwrap())
}

/// Convex combination with integer weights (normalized).
pub fn mix_weighted(items: &[(&SDist, u32)]) -> SDist {
    let total: u32 = items.iter().map(|(_, w)| w).sum();
    let ws: Vec<Rat> = items.iter().map(|(_, w)| Rat::new(*w as i64, total as i64)).collect();
    SDist::mix(ws.iter().zip(items.iter().map(|(p, _)| *p))).unwrap()
}

fn arb_m() -> impl Strategy<Value = u32> {
    prop_oneof![Just(2u32), Just(3u32)]
}

/// `(m, [(pool index, weight)])` for a random CHSH point.
fn arb_chsh_point(max_terms: usize) -> impl Strategy<Value = (u32, Vec<(usize, u32)>)> {
    arb_m().prop_flat_map(move |m| {
        let n = 2 * (m as usize).pow(4);
        (Just(m), prop::collection::vec((0..n, 1u32..=10), 1..=max_terms))
    })
}

fn point(m: u32, picks: &[(usize, u32)]) -> SDist {
    let pool = pool_for(m);
    mix_weighted(&picks.iter().map(|&(i, w)| (&pool[i], w)).collect::<Vec<_>>())
}

fn labels(m: u32) -> impl Strategy<Value = DeterministicMap> {
    prop::collection::vec(0..m, 4).prop_map(move |l| DeterministicMap::new(m, l).unwrap())
}

fn report<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>, cases: u32) -> Result<String, String> {
    r.map(|_| format!("{cases} cases")).map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), TestCaseError> {
    if cond { Ok(()) } else { Err(TestCaseError::fail(msg.into())) }
}

/// `S^a * S^b = S^{a+b}`, identity, inverses, associativity, commutativity.
pub fn prop_convolution_group(cases: u32) -> Result<String, String> {
    let strat = arb_m().prop_flat_map(|m| {
        let r = -(m as i64) * 2..(m as i64) * 2;
        (Just(m), r.clone(), r.clone(), r)
    });
    let res = runner(cases).run(&strat, |(m, a, b, c)| {
        let (sa, sb, sc) = (shift_dist(m, a), shift_dist(m, b), shift_dist(m, c));
        let ab = sa.convolve(&sb).unwrap();
        ensure(ab == shift_dist(m, a + b), "S^a*S^b")?;
        ensure(ab == sb.convolve(&sa).unwrap(), "commutativity")?;
        ensure(ab.convolve(&sc).unwrap() == sa.convolve(&sb.convolve(&sc).unwrap()).unwrap(), "associativity")?;
        ensure(sa.convolve(&shift_dist(m, 0)).unwrap() == sa, "identity")?;
        ensure(sa.convolve(&shift_dist(m, -a)).unwrap() == shift_dist(m, 0), "inverse")?;
        ensure(Dist::average_power(m, a) == sa, "average_power")
    });
    report(res, cases)
}

/// `Θ(tQ + (1-t)Q') = tΘ(Q) + (1-t)Θ(Q')` on the CHSH scenario.
pub fn prop_theta_convex(cases: u32) -> Result<String, String> {
    let strat = arb_m().prop_flat_map(|m| {
        let n = (m as usize).pow(4);
        let mixture = prop::collection::vec((0..n, 1u32..=6), 1..=4);
        (Just(m), mixture.clone(), mixture, 0u32..=8)
    });
    let res = runner(cases).run(&strat, |(m, q1, q2, t)| {
        let x = chsh();
        let maps = chsh_labelings(m);
        let mk = |q: &[(usize, u32)]| {
            let total: u32 = q.iter().map(|p| p.1).sum();
            DetMixture::new(q.iter().map(|&(i, w)| (maps[i].clone(), Rat::new(w as i64, total as i64)))).unwrap()
        };
        let (a, b) = (mk(&q1), mk(&q2));
        let t = Rat::new(t as i64, 8);
        let lhs = theta(&x, m, &a.combine(&t, &b)).unwrap();
        let (ta, tb) = (theta(&x, m, &a).unwrap(), theta(&x, m, &b).unwrap());
        let s = Rat::one() - &t;
        let rhs = SDist::mix([(&t, &ta), (&s, &tb)]).unwrap();
        ensure(lhs == rhs, "convex-linearity")?;
        // Θ(δ^φ) is the deterministic distribution
        let phi = &maps[q1[0].0];
        ensure(theta(&x, m, &DetMixture::delta(phi.clone())).unwrap() == deterministic_sdist(&x, phi).unwrap(), "delta")
    });
    report(res, cases)
}

/// `0·p = p`, `φ·(ψ·p) = (φ+ψ)·p`, `(-φ)·(φ·p) = p`, and validity is preserved.
pub fn prop_act_laws(cases: u32) -> Result<String, String> {
    let strat = arb_chsh_point(3).prop_flat_map(|(m, picks)| (Just(m), Just(picks), labels(m), labels(m)));
    let res = runner(cases).run(&strat, |(m, picks, phi, psi)| {
        let p = point(m, &picks);
        ensure(act(&DeterministicMap::zero(m, 4), &p).unwrap() == p, "identity")?;
        let step = act(&phi, &act(&psi, &p).unwrap()).unwrap();
        ensure(step == act(&phi.add(&psi), &p).unwrap(), "compatibility")?;
        ensure(act(&phi.neg(), &act(&phi, &p).unwrap()).unwrap() == p, "inverse")?;
        ensure(validate_sdist(&step).is_ok(), "validity")
    });
    report(res, cases)
}

/// `q ⪯ p` implies `q·r ⪯ p·r`.
pub fn prop_preceq_product(cases: u32) -> Result<String, String> {
    let strat = arb_m().prop_flat_map(|m| {
        let n = 2 * (m as usize).pow(4);
        let mix = prop::collection::vec((0..n, 1u32..=10), 1..=3);
        (Just(m), mix.clone(), mix.clone(), mix)
    });
    let res = runner(cases).run(&strat, |(m, qs, extra, rs)| {
        let q = point(m, &qs);
        let mut ps = qs.clone();
        ps.extend(extra);
        let p = point(m, &ps);
        let r = point(m, &rs);
        ensure(preceq(&q, &p).unwrap(), "setup")?;
        let (qr, pr) = (product(&q, &r).unwrap(), product(&p, &r).unwrap());
        ensure(validate_sdist(&qr).is_ok() && validate_sdist(&pr).is_ok(), "product validity")?;
        ensure(preceq(&qr, &pr).unwrap(), "preceq after product")
    });
    report(res, cases)
}

/// A cone point `Σ_j w_j ⟨j, r^j⟩` written coordinate-wise: `p_{(c,x)}(j, y) = w_j r^j_x(y)`.
pub fn cone_point_direct(cone: &Cone, m: u32, parts: &[(Rat, Option<SDist>)]) -> SDist {
    let x = &cone.base;
    let mut dists = BTreeMap::new();
    for &g in x.generators() {
        let arity = x.dim(g) + 2;
        let mut entries = Vec::new();
        for (j, (w, r)) in parts.iter().enumerate() {
            if let Some(r) = r {
                for (y, pr) in r.marginal(g).support() {
                    let mut o = vec![j as u32];
                    o.extend_from_slice(&y.0);
                    entries.push((Outcome(o), w * pr));
                }
            }
        }
        dists.insert(cone.scenario.id(cone.coned[g]).to_string(), Dist::new(m, arity, entries).unwrap());
    }
    SDist::from_map(Arc::clone(&cone.scenario), m, dists).unwrap()
}

/// `λ_j` read off every cone generator agrees, and matches the decomposition.
pub fn prop_lambda_well_defined(cases: u32) -> Result<String, String> {
    let strat = arb_m().prop_flat_map(|m| {
        let n = 2 * (m as usize).pow(4);
        let comp = prop::option::weighted(0.8, prop::collection::vec((0..n, 1u32..=10), 1..=3));
        (Just(m), prop::collection::vec((0u32..=5, comp), m as usize), prop::collection::vec(0usize..48, 0..=2))
    });
    let res = runner(cases).run(&strat, |(m, raw, extra)| {
        let c = chsh_cone();
        let mut parts: Vec<(u32, Option<SDist>)> =
            raw.iter().map(|(w, comp)| match comp { Some(picks) if *w > 0 => (*w, Some(point(m, picks))), _ => (0, None) }).collect();
        if parts.iter().all(|(w, _)| *w == 0) {
            parts[0] = (1, Some(pool_for(m)[0].clone()));
        }
        let total: u32 = parts.iter().map(|p| p.0).sum();
        let parts: Vec<(Rat, Option<SDist>)> =
            parts.into_iter().map(|(w, r)| (Rat::new(w as i64, total as i64), r)).collect();
        let mut p = cone_point_direct(c, m, &parts);
        if m == 2 && !extra.is_empty() {
            let verts = cone_vertices_m2();
            let mut items = vec![(&p, 3u32)];
            items.extend(extra.iter().map(|&i| (&verts[i], 1u32)));
            p = mix_weighted(&items);
        }
        let x = &c.base;
        let per_generator: BTreeSet<Vec<Rat>> = x
            .generators()
            .iter()
            .map(|&g| {
                let d = p.marginal(c.coned[g]);
                (0..m).map(|j| d.support().filter(|(o, _)| o.0[0] == j).map(|(_, r)| r.clone()).sum()).collect()
            })
            .collect();
        ensure(per_generator.len() == 1, "lambda differs across generators")?;
        let jp = cone_decompose(c, &p).map_err(|e| TestCaseError::fail(e.to_string()))?;
        ensure(per_generator.into_iter().next().unwrap() == jp.weights(), "decomposition weights")
    });
    report(res, cases)
}

/// `Vsupp(φ·p) = φ·Vsupp(p)` on the CHSH scenario.
pub fn prop_vsupp_equivariant(cases: u32) -> Result<String, String> {
    let strat = arb_chsh_point(2).prop_flat_map(|(m, picks)| (Just(m), Just(picks), labels(m)));
    let res = runner(cases).run(&strat, |(m, picks, phi)| {
        let p = point(m, &picks);
        let coords = Coordinates::new(&chsh(), m);
        let key = |v: &[SDist]| v.iter().map(|q| coords.to_vector(q)).collect::<BTreeSet<_>>();
        let moved = vsupp(&act(&phi, &p).unwrap(), Caps::default()).unwrap();
        let image: Vec<SDist> = vsupp(&p, Caps::default()).unwrap().iter().map(|q| act(&phi, q).unwrap()).collect();
        ensure(key(&moved) == key(&image), "vsupp equivariance")?;
        ensure(moved.iter().all(|q| preceq(q, &act(&phi, &p).unwrap()).unwrap()), "vsupp below p")
    });
    report(res, cases)
}

pub fn all_properties(cases: u32) -> Vec<(&'static str, Result<String, String>)> {
    vec![
        ("convolution group laws", prop_convolution_group(cases)),
        ("theta convex-linearity", prop_theta_convex(cases)),
        ("act group-action laws", prop_act_laws(cases)),
        ("preceq preserved by product", prop_preceq_product(cases)),
        ("lambda_j well-defined on cone generators", prop_lambda_well_defined(cases)),
        ("vsupp equivariance under act", prop_vsupp_equivariant(cases)),
    ]
}
