//! The named checks, each evaluated at one grid point.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{CheckId, CheckSpec, WeightSel};
use crate::error::{Error, Result};
use crate::field::Fq;
use crate::flmod::{ann_check, cyclic_module, dual, random_module, FLModule, MonIdeal};
use crate::hecke::{kernel_intersection_check, parameter_system_check, HeckeData, SerreWeight};
use crate::koszul::{binomial, tor_dims, tor_map};
use crate::localring::Case;
use crate::phi::TwistSpec;
use crate::skewmod::{euler_char, filtration_profile, induced_presentation, tor_profile, tower, SplitTor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

/// One grid point of one check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Task {
    pub check: CheckId,
    pub p: u32,
    pub case: Option<Case>,
    pub weight: Option<Vec<u32>>,
}

impl Task {
    pub fn point(&self) -> String {
        match (&self.case, &self.weight) {
            (Some(c), Some(w)) => {
                let inner: Vec<String> = w.iter().map(|r| r.to_string()).collect();
                format!("p={} {}({})", self.p, c.name(), inner.join(","))
            }
            (Some(c), None) => format!("p={} {}", self.p, c.name()),
            _ => format!("p={}", self.p),
        }
    }
}

pub struct Outcome {
    pub status: Status,
    pub detail: String,
    pub values: Value,
}

impl Outcome {
    fn new(pass: bool, detail: String, values: Value) -> Self {
        Outcome { status: if pass { Status::Pass } else { Status::Fail }, detail, values }
    }

    pub fn from_error(e: &Error) -> Self {
        let status = match e {
            Error::Inconclusive(_) => Status::Inconclusive,
            _ => Status::Fail,
        };
        Outcome { status, detail: e.to_string(), values: json!({ "error": e.to_string() }) }
    }
}

fn weights_of(spec: &CheckSpec, p: u32, case: Case) -> Vec<Vec<u32>> {
    let want = match case {
        Case::Unramified => 2,
        Case::Ramified => 1,
    };
    match &spec.weights {
        WeightSel::All => SerreWeight::grid(p, case),
        WeightSel::List(ws) => ws.iter().filter(|w| w.len() == want).cloned().collect(),
    }
}

/// Grid points of every check in `spec.id`, in report order.
pub fn tasks(spec: &CheckSpec) -> Vec<Task> {
    let mut out = Vec::new();
    for check in spec.id.expand() {
        for &p in &spec.primes {
            let per_prime = Task { check, p, case: None, weight: None };
            let only = |c: Case| spec.cases.contains(&c).then_some(c);
            let cases: Vec<Case> = match check {
                CheckId::Gennr | CheckId::Calnr => only(Case::Unramified).into_iter().collect(),
                CheckId::Genram | CheckId::Calram => only(Case::Ramified).into_iter().collect(),
                CheckId::ExemCalcul | CheckId::DualDims => {
                    out.push(per_prime);
                    continue;
                }
                CheckId::EulerChar => {
                    out.push(per_prime);
                    spec.cases.clone()
                }
                _ => spec.cases.clone(),
            };
            for case in cases {
                if check == CheckId::ParamSystem {
                    out.push(Task { check, p, case: Some(case), weight: None });
                    continue;
                }
                for w in weights_of(spec, p, case) {
                    out.push(Task { check, p, case: Some(case), weight: Some(w) });
                }
            }
        }
    }
    out
}

type Slot = Arc<OnceLock<Result<Arc<HeckeData>>>>;
type WeightKey = (u32, Case, u32, Vec<u32>);

/// Hecke data shared by the checks at the same weight.
#[derive(Default)]
pub struct Context {
    hecke: Mutex<HashMap<WeightKey, Slot>>,
}

impl Context {
    fn hecke(&self, p: u32, case: Case, u: u32, w: &[u32]) -> Result<Arc<HeckeData>> {
        let slot = {
            let mut map = self.hecke.lock().unwrap_or_else(|e| e.into_inner());
            map.entry((p, case, u, w.to_vec())).or_default().clone()
        };
        slot.get_or_init(|| {
            let wt = match case {
                Case::Unramified => SerreWeight::unram(p, w[0], w[1])?,
                Case::Ramified => SerreWeight::ram(p, u, w[0])?,
            };
            HeckeData::new(wt).map(Arc::new)
        })
        .clone()
    }
}

pub fn run_task(ctx: &Context, spec: &CheckSpec, task: &Task) -> Outcome {
    let p = task.p;
    let n_max = spec.n_max_for(p);
    let result = match (task.case, &task.weight) {
        (Some(case), Some(w)) => ctx.hecke(p, case, spec.u, w).and_then(|data| match task.check {
            CheckId::Gennr | CheckId::Genram => weight_structure(&data),
            CheckId::Surjinj => surjinj(&data),
            CheckId::Calnr | CheckId::Calram => kernel_intersections(&data),
            CheckId::EulerChar => hecke_euler_char(&data, n_max),
            CheckId::Nonadm => nonadm(&data, n_max),
            CheckId::EvenPart => even_part(&data, n_max),
            CheckId::Filtration => filtration(&data, spec.steps, n_max),
            other => Err(Error::Config(format!("{} is not a weight check", other.name()))),
        }),
        (Some(case), None) => parameter_system(p, case, spec.u),
        _ => match task.check {
            CheckId::ExemCalcul => exem_calcul(p, spec.q.unwrap_or(p), n_max),
            CheckId::DualDims => dual_dims(p, spec.seed),
            CheckId::EulerChar => induced_euler_char(p, spec.q.unwrap_or(p), n_max),
            other => Err(Error::Config(format!("{} needs a weight", other.name()))),
        },
    };
    result.unwrap_or_else(|e| Outcome::from_error(&e))
}

fn ideal_label(ideal: &MonIdeal) -> String {
    let gens: Vec<String> = ideal
        .exponents()
        .map(|e| {
            let parts: Vec<String> = ["X", "Y"]
                .iter()
                .zip(e)
                .filter(|(_, &a)| a > 0)
                .map(|(v, &a)| if a == 1 { v.to_string() } else { format!("{v}^{a}") })
                .collect();
            parts.join("")
        })
        .collect();
    format!("({})", gens.join(","))
}

fn weight_structure(data: &HeckeData) -> Result<Outcome> {
    let wt = data.weight();
    let r = wt.params();
    let (ideal, expected_dim) = match wt.case() {
        Case::Unramified => (MonIdeal::powers(&[r[0] + 1, r[1] + 1]), (r[0] + 1) * (r[1] + 1)),
        Case::Ramified => (MonIdeal::powers(&[r[0] + 1, 1]), r[0] + 1),
    };
    let ann = ann_check(data.sigma(), data.wv0(), &ideal)?;
    let dim = data.sigma().dim();
    let pass = ann && dim == expected_dim as usize;
    let label = ideal_label(&ideal);
    Ok(Outcome::new(
        pass,
        format!("ann = {label}: {ann}, dim {dim}"),
        json!({ "ideal": label, "annihilator_matches": ann, "dim": dim, "expected_dim": expected_dim }),
    ))
}

fn parameter_system(p: u32, case: Case, u: u32) -> Result<Outcome> {
    let r = parameter_system_check(p, case, u)?;
    Ok(Outcome::new(
        r.pass(),
        format!("dim m/m^2 = {}, X,Y independent: {}", r.cotangent_dim, r.independent),
        serde_json::to_value(&r).expect("report serializes"),
    ))
}

fn surjinj(data: &HeckeData) -> Result<Outcome> {
    let k = data.field();
    let tm = data.tminus(1);
    let tp = data.tplus(1);
    let n = data.weight().dim();
    let mut x = vec![0; data.rm_dim(1)];
    x[..n].copy_from_slice(data.wv0());
    let parts = [
        ("tminus_surjective", tm.is_surjective()),
        ("tminus_not_injective", !tm.is_injective()),
        ("tplus_injective_r1", tp.is_injective()),
        ("tplus_injective_r2", data.tplus(2).is_injective()),
        ("tor2_tplus_bijective", tor_map(&tp, 2).inverse(k).is_some()),
        ("tor0_tminus_bijective", tor_map(&tm, 0).inverse(k).is_some()),
        ("tor2_tminus_zero", tor_map(&tm, 2).is_zero()),
        ("tor0_tplus_zero", tor_map(&tp, 0).is_zero()),
        ("anchor", data.tminus_matrix(1).apply(k, &x) == data.wv0()),
    ];
    let held = parts.iter().filter(|(_, b)| *b).count();
    let values: serde_json::Map<String, Value> = parts.iter().map(|(s, b)| (s.to_string(), json!(b))).collect();
    Ok(Outcome::new(held == parts.len(), format!("{held}/{} assertions", parts.len()), Value::Object(values)))
}

fn kernel_intersections(data: &HeckeData) -> Result<Outcome> {
    let r = kernel_intersection_check(data.weight())?;
    Ok(Outcome::new(
        r.pass(),
        format!("common kernel dim {}, refined pattern: {}", r.common_kernel_dim, r.refined_ok),
        serde_json::to_value(&r).expect("report serializes"),
    ))
}

/// Largest truncation on which Koszul homology is also computed directly.
pub const DIRECT_DIM_LIMIT: usize = 400;

fn exem_calcul(p: u32, q: u32, n_max: usize) -> Result<Outcome> {
    let k = Fq::new(p, 1)?;
    let mut pass = true;
    let mut values = serde_json::Map::new();
    for d in 1..=3 {
        let pres = induced_presentation(FLModule::residue(k.clone(), d), TwistSpec::qpow(d, q));
        let split = SplitTor::new(&pres)?;
        let rank = (q as usize).pow(d as u32);
        let direct_top = (0..=n_max).take_while(|&n| (0..=n).map(|m| rank.pow(m as u32)).sum::<usize>() <= DIRECT_DIM_LIMIT).last();
        let direct = match direct_top {
            Some(top) => Some(tower(&pres, top)?),
            None => None,
        };
        let mut dims = Vec::new();
        for n in 0..=n_max {
            let want: Vec<usize> = (0..=d).map(|i| binomial(d, i) * (n + 1)).collect();
            let got: Vec<usize> = (0..=d).map(|i| split.tor_dim(i, n)).collect();
            pass &= got == want;
            if let Some(t) = direct.as_ref().filter(|t| n < t.levels().len()) {
                pass &= t.tor_dims(n) == want;
            }
            dims.push(got);
        }
        values.insert(format!("d{d}"), json!({ "dims": dims, "direct_levels": direct_top.map_or(0, |t| t + 1) }));
    }
    Ok(Outcome::new(pass, format!("q = {q}, N ≤ {n_max}, d = 1,2,3"), Value::Object(values)))
}

pub const DUALITY_SAMPLES: usize = 200;
pub const DUALITY_MAX_DIM: usize = 12;

fn dual_dims(p: u32, seed: u64) -> Result<Outcome> {
    let k = Fq::new(p, 1)?;
    let mut mismatches = Vec::new();
    for s in 0..DUALITY_SAMPLES {
        let dim = 1 + s % DUALITY_MAX_DIM;
        let m = random_module(&k, 2, dim, seed.wrapping_add(s as u64));
        let dims = tor_dims(&m);
        let mut back = tor_dims(&dual(&m));
        back.reverse();
        if dims != back {
            mismatches.push(s);
        }
    }
    Ok(Outcome::new(
        mismatches.is_empty(),
        format!("{} modules, {} mismatches", DUALITY_SAMPLES, mismatches.len()),
        json!({ "modules": DUALITY_SAMPLES, "max_dim": DUALITY_MAX_DIM, "mismatches": mismatches }),
    ))
}

fn induced_euler_char(p: u32, q: u32, n_max: usize) -> Result<Outcome> {
    let k = Fq::new(p, 1)?;
    let cases = [
        ("d1 k", FLModule::residue(k.clone(), 1), 1),
        ("d1 A/(X^3)", cyclic_module(&k, &MonIdeal::powers(&[3]))?.module, 1),
        ("d2 k", FLModule::residue(k.clone(), 2), 2),
        ("d2 A/(X^2,Y^3)", cyclic_module(&k, &MonIdeal::powers(&[2, 3]))?.module, 2),
    ];
    let mut values = serde_json::Map::new();
    let mut pass = true;
    for (name, w, d) in cases {
        let chi = euler_char(&induced_presentation(w, TwistSpec::qpow(d, q)), n_max)?;
        pass &= chi == 0;
        values.insert(name.to_string(), json!(chi));
    }
    Ok(Outcome::new(pass, format!("induced, q = {q}: chi = 0"), Value::Object(values)))
}

fn hecke_euler_char(data: &HeckeData, n_max: usize) -> Result<Outcome> {
    let coker = euler_char(&data.coker_presentation()?, n_max)?;
    let even = euler_char(&data.even_presentation()?, n_max)?;
    Ok(Outcome::new(
        coker == 0 && even == 0,
        format!("chi(coker) = {coker}, chi(even) = {even}"),
        json!({ "coker": coker, "even": even }),
    ))
}

fn nonadm(data: &HeckeData, n_max: usize) -> Result<Outcome> {
    let prof = tor_profile(&data.coker_presentation()?, n_max)?;
    let g = prof.degree(2);
    let h: Vec<Option<usize>> = prof.degrees.iter().map(|g| g.h).collect();
    let values = json!({ "h": h, "dims2": g.dims, "window": g.window, "certified": g.certified });
    if !g.certified {
        return Ok(Outcome { status: Status::Inconclusive, detail: "Tor_2 profile does not certify".into(), values });
    }
    let (a, b) = g.window.expect("certified profiles have a window");
    let increasing = g.dims[a..=b].windows(2).all(|w| w[1] > w[0]);
    let h2 = g.h.unwrap_or(0);
    Ok(Outcome::new(h2 >= 1 && increasing, format!("h2 = {h2}, window {a}..{b}"), values))
}

fn even_part(data: &HeckeData, n_max: usize) -> Result<Outcome> {
    let split = SplitTor::new(&data.even_presentation()?)?;
    let prof = split.profile(n_max);
    let (g0, g2) = (prof.degree(0), prof.degree(2));
    let zero_copy: Vec<(bool, bool)> = (1..=n_max).map(|n| split.degree_zero_classes(2, n)).collect();
    let values = json!({
        "h0": g0.h,
        "dims0": g0.dims,
        "torsion2": g2.torsion,
        "certified": [g0.certified, g2.certified],
        "degree_zero_class": zero_copy,
    });
    if !(g0.certified && g2.certified) {
        return Ok(Outcome { status: Status::Inconclusive, detail: "profile does not certify".into(), values });
    }
    let pass = g0.h == Some(0) && g2.torsion == Some(1) && zero_copy.iter().all(|&(i, k)| i && k);
    Ok(Outcome::new(pass, format!("h0 = {:?}, torsion2 = {:?}", g0.h.unwrap_or(0), g2.torsion.unwrap_or(0)), values))
}

fn filtration(data: &HeckeData, steps: usize, n_max: usize) -> Result<Outcome> {
    let prof = filtration_profile(&data.coker_presentation()?, steps, n_max)?;
    let ranks = prof.ranks();
    let certified = prof.steps.iter().filter(|s| s.certified).count();
    let witness = prof.non_admissible_witness();
    let values = json!({
        "ranks": ranks,
        "certified": prof.steps.iter().map(|s| s.certified).collect::<Vec<_>>(),
        "generator_degrees": prof.steps.iter().map(|s| s.generator_degrees.clone()).collect::<Vec<_>>(),
        "witness": witness,
        "complete": prof.complete,
    });
    let detail = format!("n = {ranks:?}, {certified}/{} certified", prof.steps.len());
    let status = if !witness {
        Status::Fail
    } else if !prof.complete || ranks.len() < steps {
        Status::Inconclusive
    } else {
        Status::Pass
    };
    Ok(Outcome { status, detail, values })
}
