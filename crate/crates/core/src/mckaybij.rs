//! Galois action on principal-series parameters, the bijection Ω into
//! characters of the torus normalizer, the symplectic pairing at the
//! parameter level, and the verification reports tying them together.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::charkit::{self, CharError, ClassFunction, Classes, FiniteGroup};
use crate::chevnorm::{NGroup, NormError, NormalizerElt};
use crate::cyclo::{factorize, h_ell_generators, h_ell_units, lcm, sqrt_as_cyclotomic, Cyclotomic, HEllElt};
use crate::extmap::{ExtError, ExtensionMap};
use crate::hecke::{self, EtaTwist, HeckeChars, HeckeModel, TwistContext};
use crate::relweyl::{
    act_on_char, enumerate_params, galois_on_lambda, HCParam, OrbitData, ParamSet, RelError, RelWeylData, Setting,
    TorusChar,
};
use crate::rootsys::Family;

pub const REPORT_VERSION: &str = "galmckay-report/1";

/// Largest |W(λ)| for which the Hecke characters are computed.
pub const HECKE_MAX_DIM: usize = 512;

#[derive(Debug, Error)]
pub enum McKayError {
    #[error(transparent)]
    Rel(#[from] RelError),
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Ext(#[from] ExtError),
    #[error(transparent)]
    Char(#[from] CharError),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("report: {0}")]
    Report(String),
}

// ---------------------------------------------------------------------------
// integer arithmetic in Z[ζ_L]

/// Z[ζ_L] in the power basis of length φ(L).
#[derive(Clone, Debug)]
pub struct ZRing {
    pub level: u64,
    pub phi: usize,
    powers: Vec<Vec<i64>>,
}

impl ZRing {
    pub fn new(level: u64) -> Self {
        let powers: Vec<Vec<i64>> = (0..level)
            .map(|k| Cyclotomic::zeta(level, k as i64).int_coeffs().expect("roots of unity are integral"))
            .collect();
        let phi = powers[0].len();
        ZRing { level, phi, powers }
    }

    pub fn zero(&self) -> Vec<i64> {
        vec![0; self.phi]
    }

    pub fn from_int(&self, c: i64) -> Vec<i64> {
        let mut v = self.zero();
        v[0] = c;
        v
    }

    /// acc += ζ^k · v
    pub fn add_shifted(&self, acc: &mut [i64], k: u64, v: &[i64]) {
        for (j, &c) in v.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let p = &self.powers[((k + j as u64) % self.level) as usize];
            for (a, &b) in acc.iter_mut().zip(p) {
                *a += c * b;
            }
        }
    }

    pub fn mul(&self, a: &[i64], b: &[i64]) -> Vec<i64> {
        let mut acc = self.zero();
        for (j, &c) in a.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (i, &d) in b.iter().enumerate() {
                if d == 0 {
                    continue;
                }
                let p = &self.powers[(i + j) % self.level as usize];
                for (x, &y) in acc.iter_mut().zip(p) {
                    *x += c * d * y;
                }
            }
        }
        acc
    }

    fn map_exponents(&self, a: &[i64], f: impl Fn(u64) -> u64) -> Vec<i64> {
        let mut acc = self.zero();
        for (j, &c) in a.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let p = &self.powers[(f(j as u64) % self.level) as usize];
            for (x, &y) in acc.iter_mut().zip(p) {
                *x += c * y;
            }
        }
        acc
    }

    pub fn conj(&self, a: &[i64]) -> Vec<i64> {
        self.map_exponents(a, |j| self.level - j)
    }

    pub fn galois(&self, a: &[i64], unit: u64) -> Vec<i64> {
        self.map_exponents(a, |j| j * unit)
    }

    pub fn is_rational(a: &[i64]) -> bool {
        a.iter().skip(1).all(|&x| x == 0)
    }

    pub fn from_cyclo(&self, x: &Cyclotomic) -> Option<Vec<i64>> {
        let n = x.normalized();
        if self.level % n.level() != 0 {
            return None;
        }
        n.lift(self.level).int_coeffs()
    }

    pub fn to_cyclo(&self, a: &[i64]) -> Cyclotomic {
        Cyclotomic::from_exponent_weights(
            self.level,
            &(0..self.level as usize).map(|k| if k < a.len() { a[k] } else { 0 }).collect::<Vec<_>>(),
        )
    }
}

// ---------------------------------------------------------------------------
// reports

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Flagged,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    pub witness: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    #[serde(rename = "type")]
    pub group_type: String,
    pub q: u64,
    pub ell: u64,
    pub d: u64,
    pub twisted: bool,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamRecord {
    pub lambda: Vec<u64>,
    pub eta: usize,
    pub kind: String,
    pub degree: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub meta: ReportMeta,
    pub params: Vec<ParamRecord>,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new(group_type: &str, q: u64, ell: u64, d: u64, twisted: bool) -> Self {
        VerificationReport {
            meta: ReportMeta {
                group_type: group_type.to_string(),
                q,
                ell,
                d,
                twisted,
                version: REPORT_VERSION.to_string(),
            },
            params: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, name: &str, status: Status, witness: Value) {
        self.checks.push(CheckRecord { name: name.to_string(), status, witness });
    }

    pub fn check(&mut self, name: &str, ok: bool, witness: Value) {
        self.push(name, if ok { Status::Pass } else { Status::Fail }, witness);
    }

    pub fn status_of(&self, name: &str) -> Option<Status> {
        let mut found = None;
        for c in self.checks.iter().filter(|c| c.name == name) {
            found = Some(match (found, c.status) {
                (_, Status::Fail) | (Some(Status::Fail), _) => Status::Fail,
                (_, Status::Indeterminate) | (Some(Status::Indeterminate), _) => Status::Indeterminate,
                (_, Status::Flagged) | (Some(Status::Flagged), _) => Status::Flagged,
                _ => Status::Pass,
            });
        }
        found
    }

    pub fn failed(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Fail)
    }

    pub fn has_flags(&self) -> bool {
        self.checks.iter().any(|c| matches!(c.status, Status::Flagged | Status::Indeterminate))
    }

    /// Exit criterion: no failures, and with `strict` no flags either.
    pub fn success(&self, strict: bool) -> bool {
        !self.failed() && !(strict && self.has_flags())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn parse(text: &str) -> Result<Self, McKayError> {
        let r: VerificationReport = serde_json::from_str(text).map_err(|e| McKayError::Report(e.to_string()))?;
        if r.meta.version != REPORT_VERSION {
            return Err(McKayError::Report(format!("unknown version {}", r.meta.version)));
        }
        Ok(r)
    }
}

// ---------------------------------------------------------------------------
// the correction characters

/// (p, f) with q = p^f.
pub fn prime_power(q: u64) -> Result<(u64, u32), McKayError> {
    match factorize(q).as_slice() {
        [(p, f)] => Ok((*p, *f)),
        _ => Err(McKayError::Unsupported(format!("{q} is not a prime power"))),
    }
}

/// σ(√q)/√q ∈ {±1}. σ must live at a level divisible by 4p.
pub fn sqrt_q_sign(q: u64, sigma: &HEllElt) -> i64 {
    let (p, f) = prime_power(q).expect("q is a prime power");
    if f % 2 == 0 {
        return 1;
    }
    let s = sqrt_as_cyclotomic(p);
    if sigma.act(&s) == s {
        1
    } else {
        -1
    }
}

/// σ(√(ωq))/√(ωq) with ω = ±1, q ≡ ω mod 4.
pub fn sqrt_omega_q_sign(q: u64, sigma: &HEllElt) -> i64 {
    let (p, f) = prime_power(q).expect("q is a prime power");
    let omega_neg = q % 4 == 3;
    let mut s = if f % 2 == 0 { Cyclotomic::one() } else { sqrt_as_cyclotomic(p) };
    if omega_neg {
        s = &s * &Cyclotomic::zeta(4, 1);
    }
    if sigma.act(&s) == s {
        1
    } else {
        -1
    }
}

/// γ_{λ,σ}(w) = (σ(√q)/√q)^{l(w_c)} on W(λ), with l the length in W.
pub fn gamma(setting: &Setting, rel: &RelWeylData, sigma: &HEllElt) -> Vec<(usize, i64)> {
    let s = sqrt_q_sign(setting.q, sigma);
    rel.w_lambda
        .iter()
        .map(|&w| {
            let (_, c) = rel.split(&setting.weyl, w);
            let odd = setting.weyl.length(c) % 2 == 1;
            (w, if s == -1 && odd { -1 } else { 1 })
        })
        .collect()
}

/// Whether a ±1-valued function on W(λ) is multiplicative.
pub fn is_character(setting: &Setting, vals: &[(usize, i64)]) -> bool {
    let m: HashMap<usize, i64> = vals.iter().copied().collect();
    vals.iter().all(|&(a, x)| vals.iter().all(|&(b, y)| m[&setting.weyl.mul(a, b)] == x * y))
}

// ---------------------------------------------------------------------------
// one verification run

/// Per-orbit data for Ω and the parameter action.
pub struct OrbitCtx {
    pub data: OrbitData,
    pub wset: HashSet<usize>,
    /// (ẋ, ẋ⁻¹) for a right transversal of W(λ) in W
    pub transversal: Vec<(NormalizerElt, NormalizerElt)>,
    /// class of w ∈ W(λ) in the table of W(λ)
    pub class_of_w: HashMap<usize, usize>,
    pub h: HeckeOrbit,
}

/// The Hecke-side data of one orbit: generic characters with the
/// bijection to Irr(W(λ)) when they could be computed.
pub struct HeckeOrbit {
    pub data: OrbitData,
    pub hecke: Option<(Arc<HeckeChars>, Vec<usize>)>,
    pub note: String,
    pub irrational: bool,
    pub has_g2: bool,
    pub complement_elementary_2: bool,
}

impl HeckeOrbit {
    pub fn new(setting: &Setting, od: &OrbitData) -> Self {
        let weyl = &setting.weyl;
        let rel = &od.rel;
        let (hecke, note) = orbit_hecke(setting, od);
        let has_g2 = rel.r_gens.iter().any(|&a| rel.r_gens.iter().any(|&b| weyl.elt_order(weyl.mul(a, b)) == 6));
        HeckeOrbit {
            data: od.clone(),
            irrational: note == IRRATIONAL_NOTE,
            hecke,
            note,
            has_g2,
            complement_elementary_2: rel.c_lambda.iter().all(|&c| weyl.mul(c, c) == 0),
        }
    }

    /// η ↦ η^{(σ)} with the regime that decided it.
    pub fn eta_twist(&self, q: u64, eta: usize, sigma: &HEllElt) -> (EtaTwist, &'static str) {
        let table = &self.data.table;
        let sqrt_fixed = sqrt_q_sign(q, sigma) == 1;
        if let Some((h, fmap)) = &self.hecke {
            let ctx = TwistContext {
                hecke: h,
                f_map: fmap,
                table,
                q,
                sqrt_q_fixed: sqrt_fixed,
                complement_elementary_2: self.complement_elementary_2,
            };
            return (hecke::eta_twist(&ctx, eta, &sigma.base), "computed");
        }
        let eta_sigma = || {
            let img = table.irr[eta].act(&sigma.base);
            table.irr.iter().position(|c| *c == img).expect("Galois conjugate is irreducible")
        };
        if !self.has_g2 || sqrt_fixed {
            return (EtaTwist::Determinate(eta_sigma()), "proven");
        }
        if table.irr[eta].degree_int() % 2 == 1 && self.complement_elementary_2 {
            return (EtaTwist::Determinate(eta), "proven");
        }
        (EtaTwist::Indeterminate("G2 component with σ moving √q".into()), "open")
    }
}

const IRRATIONAL_NOTE: &str = "generic character values outside Q(√u)";

/// Everything needed to evaluate Ω and the Galois action for one setting.
pub struct RunContext {
    pub setting: Arc<Setting>,
    pub ell: u64,
    pub d: u64,
    pub ext: Arc<ExtensionMap>,
    pub ngroup: Arc<NGroup>,
    pub classes: Arc<Classes>,
    pub params: ParamSet,
    pub orbits: Vec<OrbitCtx>,
    pub ring: ZRing,
    pub galois_level: u64,
    lookup: HashMap<Vec<u64>, (usize, usize)>,
    param_index: HashMap<HCParam, usize>,
}

/// Result of acting by σ on a parameter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ActionResult {
    Param(usize),
    Indeterminate(String),
}

fn table_level(od: &OrbitData) -> u64 {
    od.table.irr.iter().flat_map(|c| c.values.iter()).fold(1, |a, v| lcm(a, v.normalized().level()))
}

impl RunContext {
    pub fn build(setting: Arc<Setting>, ell: u64) -> Result<Self, McKayError> {
        let d = crate::cyclo::d_ell(setting.q, ell).map_err(|e| McKayError::Unsupported(e.to_string()))?;
        let params = enumerate_params(&setting, ell)?;
        let ext = Arc::new(ExtensionMap::build(setting.clone())?);
        let ngroup = Arc::new(NGroup::new(setting.v.clone(), setting.torus.clone())?);
        let classes = Arc::new(Classes::compute(&*ngroup));
        let mut level = ext.value_level();
        for od in &params.orbits {
            level = lcm(level, table_level(od));
        }
        let (p, _) = prime_power(setting.q)?;
        let galois_level = lcm(lcm(level, classes.exponent), 4 * p);
        let weyl = &setting.weyl;
        let v = &setting.v;
        let mut orbits = Vec::new();
        let mut lookup = HashMap::new();
        for (oi, od) in params.orbits.iter().enumerate() {
            let rel = &od.rel;
            let wset: HashSet<usize> = rel.w_lambda.iter().copied().collect();
            let mut seen = HashSet::new();
            let mut transversal = Vec::new();
            for x in 0..weyl.order() {
                if seen.contains(&x) {
                    continue;
                }
                for &h in &rel.w_lambda {
                    seen.insert(weyl.mul(h, x));
                }
                let xn = ngroup.from_v(v.dot(x));
                let xi = ngroup.n_inv(&xn);
                transversal.push((xn, xi));
            }
            let class_of_w: HashMap<usize, usize> = rel
                .w_lambda
                .iter()
                .map(|&w| (w, od.table.classes.class(od.sub.local(w).expect("w in W(λ)"))))
                .collect();
            for w in 0..weyl.order() {
                let mu = act_on_char(weyl, &setting.torus, w, &od.lambda);
                lookup.entry(mu.exps).or_insert((oi, weyl.inv(w)));
            }
            orbits.push(OrbitCtx {
                data: od.clone(),
                wset,
                transversal,
                class_of_w,
                h: HeckeOrbit::new(&setting, od),
            });
        }
        let param_index = params.params.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        Ok(RunContext {
            setting,
            ell,
            d,
            ext,
            ngroup,
            classes,
            params,
            orbits,
            ring: ZRing::new(level),
            galois_level,
            lookup,
            param_index,
        })
    }

    pub fn orbit_of_param(&self, pi: usize) -> usize {
        let lam = self.params.params[pi].lambda();
        self.params.orbits.iter().position(|o| o.lambda == *lam).expect("parameter orbit exists")
    }

    /// Ω(λ, η) = Ind_{N_λ}^N(Λ(λ)η) on the classes of N.
    pub fn omega(&self, pi: usize) -> Vec<Vec<i64>> {
        let oi = self.orbit_of_param(pi);
        let oc = &self.orbits[oi];
        let lam = &oc.data.lambda;
        let eta = self.params.params[pi].eta();
        let eta_vals: Vec<Vec<i64>> = oc.data.table.irr[eta]
            .values
            .iter()
            .map(|v| self.ring.from_cyclo(v).expect("η values lie in the ring"))
            .collect();
        let scale = self.ring.level / self.ext.value_level();
        self.classes
            .reps
            .iter()
            .map(|&g| {
                let ge = self.ngroup.elt(g);
                let mut acc = self.ring.zero();
                for (x, xi) in &oc.transversal {
                    let c = self.ngroup.n_mult(&self.ngroup.n_mult(x, &ge), xi);
                    if let Some(e) = self.ext.lambda_exp(lam, &oc.wset, &c) {
                        self.ring.add_shifted(&mut acc, e * scale, &eta_vals[oc.class_of_w[&c.w]]);
                    }
                }
                acc
            })
            .collect()
    }

    /// |N|·⟨χ, χ⟩.
    pub fn scaled_norm(&self, chi: &[Vec<i64>]) -> Vec<i64> {
        let mut acc = self.ring.zero();
        for (k, v) in chi.iter().enumerate() {
            let p = self.ring.mul(v, &self.ring.conj(v));
            let s = self.classes.sizes[k] as i64;
            for (a, b) in acc.iter_mut().zip(&p) {
                *a += s * b;
            }
        }
        acc
    }

    /// Generators of 𝓗_ℓ at the run's Galois level.
    pub fn galois_generators(&self) -> Vec<HEllElt> {
        h_ell_generators(self.ell, self.galois_level)
    }

    pub fn eta_twist(&self, oi: usize, eta: usize, sigma: &HEllElt) -> (EtaTwist, &'static str) {
        self.orbits[oi].h.eta_twist(self.setting.q, eta, sigma)
    }

    /// The Galois action on parameters: (λ, η) ↦ (λ^σ, γ·δ·η^{(σ)}),
    /// transported to the chosen orbit representative.
    pub fn param_action(&self, sigma: &HEllElt, pi: usize) -> Result<ActionResult, McKayError> {
        let s = &self.setting;
        let weyl = &s.weyl;
        let oi = self.orbit_of_param(pi);
        let oc = &self.orbits[oi];
        let rel = &oc.data.rel;
        let table = &oc.data.table;
        let lam = &oc.data.lambda;
        let eta = self.params.params[pi].eta();
        let tw = match self.eta_twist(oi, eta, sigma).0 {
            EtaTwist::Determinate(k) => k,
            EtaTwist::Indeterminate(why) => return Ok(ActionResult::Indeterminate(why)),
        };
        let gam: HashMap<usize, i64> = gamma(s, rel, sigma).into_iter().collect();
        let del: HashMap<usize, u32> = self.ext.delta_sigma(lam, rel, &sigma.base)?.into_iter().collect();
        let lv = self.ext.level;
        let src_vals: Vec<Cyclotomic> = table
            .classes
            .reps
            .iter()
            .enumerate()
            .map(|(c, &r)| {
                let w = oc.data.sub.elems[r];
                let v = &table.irr[tw].values[c] * &Cyclotomic::zeta(lv, del[&w] as i64);
                if gam[&w] == -1 {
                    -v
                } else {
                    v
                }
            })
            .collect();
        let lam_s = galois_on_lambda(sigma, &s.torus, lam);
        let &(oj, x) = self
            .lookup
            .get(&lam_s.exps)
            .ok_or_else(|| McKayError::Unsupported(format!("λ^σ = {:?} outside the enumerated orbits", lam_s.exps)))?;
        let tgt = &self.orbits[oj];
        let xi = weyl.inv(x);
        let moved = ClassFunction {
            values: tgt
                .data
                .table
                .classes
                .reps
                .iter()
                .map(|&r| {
                    let y = tgt.data.sub.elems[r];
                    let z = weyl.mul(weyl.mul(xi, y), x);
                    src_vals[oc.class_of_w[&z]].clone()
                })
                .collect(),
        };
        let k = tgt.data.table.irr.iter().position(|c| *c == moved).ok_or_else(|| {
            McKayError::Unsupported(format!("image of parameter {pi} is not irreducible on W(λ^σ)"))
        })?;
        let image = HCParam::Principal { lambda: tgt.data.lambda.clone(), eta: k };
        self.param_index
            .get(&image)
            .map(|&i| ActionResult::Param(i))
            .ok_or_else(|| McKayError::Unsupported(format!("image {image:?} is not an ℓ′-parameter")))
    }
}

fn orbit_hecke(setting: &Setting, od: &OrbitData) -> (Option<(Arc<HeckeChars>, Vec<usize>)>, String) {
    let rel = &od.rel;
    if rel.w_lambda.len() > HECKE_MAX_DIM {
        return (None, format!("|W(λ)| = {} above the Hecke bound", rel.w_lambda.len()));
    }
    let model = match HeckeModel::from_rel(setting.weyl.clone(), rel) {
        Ok(m) => m,
        Err(e) => return (None, e.to_string()),
    };
    let h = match HeckeChars::cached(model) {
        Ok(h) => h,
        Err(e) => return (None, e.to_string()),
    };
    if !h.all_split() {
        return (None, IRRATIONAL_NOTE.into());
    }
    match h.f_bijection(&od.table, &od.sub) {
        Ok(f) => (Some((h, f)), "computed".into()),
        Err(e) => (None, e.to_string()),
    }
}

/// Independent count of Irr(N) and Irr_{ℓ′}(N): every λ ∈ Irr(T) with its
/// stabilizer computed from the action on T, Gallagher over Irr(W(λ)).
pub fn clifford_counts(setting: &Setting, ell: u64) -> Result<(usize, usize), McKayError> {
    let torus = &setting.torus;
    let weyl = &setting.weyl;
    let gens = torus.generators();
    let nw = weyl.order();
    let mut tables: HashMap<Vec<usize>, Vec<i64>> = HashMap::new();
    let mut total = 0usize;
    let mut good = 0usize;
    for exps in charkit::linear_chars(&torus.factors) {
        let lam = TorusChar { exps };
        let stab: Vec<usize> = (0..nw)
            .filter(|&w| {
                gens.iter().all(|t| lam.eval_exp(torus, &torus.act(weyl.inv(w), t)) == lam.eval_exp(torus, t))
            })
            .collect();
        let degs = match tables.get(&stab) {
            Some(d) => d.clone(),
            None => {
                let parent: Arc<dyn FiniteGroup> = weyl.clone();
                let sub = charkit::Subgroup::from_elements(parent, stab.clone());
                let key = format!("W({})|{:?}", setting.cartan, stab);
                let d = charkit::dixon_table_cached(&key, &sub)?.degrees();
                tables.insert(stab.clone(), d.clone());
                d
            }
        };
        let index = (nw / stab.len()) as i64;
        // each orbit is met |orbit| = index times
        total += degs.len() * stab.len();
        good += degs.iter().filter(|&&d| (index * d) as u64 % ell != 0).count() * stab.len();
    }
    Ok((total / nw, good / nw))
}

/// The full check suite for one (type, q, ℓ) with d = 1 (or the twisted
/// torus with ℓ = 2, d = 2).
pub fn verify_equivariance(setting: Arc<Setting>, ell: u64) -> Result<VerificationReport, McKayError> {
    let ctx = RunContext::build(setting, ell)?;
    let mut rep = base_report(&ctx);
    run_n_side_checks(&ctx, &mut rep)?;
    run_equivariance(&ctx, &mut rep)?;
    let hs: Vec<&HeckeOrbit> = ctx.orbits.iter().map(|o| &o.h).collect();
    run_hecke_checks(&ctx.setting, &hs, &ctx.galois_generators(), &mut rep);
    Ok(rep)
}

fn base_report(ctx: &RunContext) -> VerificationReport {
    let s = &ctx.setting;
    let mut rep = VerificationReport::new(&s.cartan.to_string(), s.q, ctx.ell, ctx.d, s.twisted);
    for flag in &ctx.params.flags {
        rep.push("exclusion", Status::Flagged, json!({ "reason": flag }));
    }
    rep.push(
        "hecke_cocycle_trivial",
        Status::Flagged,
        json!({ "assumption": "the Hecke 2-cocycle on C(λ) is taken to be trivial" }),
    );
    rep
}

/// Ω values for every parameter, computed in parallel.
pub fn all_omegas(ctx: &RunContext) -> Vec<Vec<Vec<i64>>> {
    (0..ctx.params.params.len()).into_par_iter().map(|pi| ctx.omega(pi)).collect()
}

fn run_n_side_checks(ctx: &RunContext, rep: &mut VerificationReport) -> Result<Vec<Vec<Vec<i64>>>, McKayError> {
    let s = &ctx.setting;
    let nw = s.weyl.order() as i64;
    rep.check("extension_v_equivariant", ctx.ext.check_v_equivariance(), Value::Null);
    rep.check("extension_ratio_rational", ctx.ext.check_mu_rational(), Value::Null);
    let bad_n: Vec<Vec<u64>> = ctx
        .orbits
        .par_iter()
        .filter(|o| !ctx.ext.check_n_equivariance(&o.data.lambda, &o.data.rel.w_lambda))
        .map(|o| o.data.lambda.exps.clone())
        .collect();
    rep.check("extension_n_equivariant", bad_n.is_empty(), json!({ "lambda": bad_n }));

    let omegas = all_omegas(ctx);
    let norm_target = ctx.ring.from_int(ctx.ngroup.order() as i64);
    let mut reducible = Vec::new();
    let mut bad_degree = Vec::new();
    let mut not_ell_prime = Vec::new();
    for (pi, om) in omegas.iter().enumerate() {
        let p = &ctx.params.params[pi];
        let oi = ctx.orbit_of_param(pi);
        let od = &ctx.orbits[oi].data;
        let deg = om[0][0];
        let expect = nw / od.rel.w_lambda.len() as i64 * od.table.irr[p.eta()].degree_int();
        if !ZRing::is_rational(&om[0]) || deg != expect {
            bad_degree.push(json!({ "lambda": p.lambda().exps, "eta": p.eta(), "degree": deg, "expected": expect }));
        }
        if deg as u64 % ctx.ell == 0 {
            not_ell_prime.push(json!({ "lambda": p.lambda().exps, "eta": p.eta(), "degree": deg }));
        }
        if ctx.scaled_norm(om) != norm_target {
            reducible.push(json!({ "lambda": p.lambda().exps, "eta": p.eta() }));
        }
        rep.params.push(ParamRecord {
            lambda: p.lambda().exps.clone(),
            eta: p.eta(),
            kind: "principal".into(),
            degree: Some(deg),
        });
    }
    rep.check("omega_irreducible", reducible.is_empty(), json!(reducible));
    rep.check("omega_degree", bad_degree.is_empty(), json!(bad_degree));
    rep.check("ell_prime_degrees", not_ell_prime.is_empty(), json!(not_ell_prime));
    let distinct: HashSet<&Vec<Vec<i64>>> = omegas.iter().collect();
    rep.check(
        "omega_injective",
        distinct.len() == omegas.len(),
        json!({ "params": omegas.len(), "distinct": distinct.len() }),
    );
    let (k_total, k_good) = clifford_counts(s, ctx.ell)?;
    rep.check(
        "class_count",
        k_total == ctx.classes.len(),
        json!({ "classes_of_N": ctx.classes.len(), "clifford_total": k_total }),
    );
    rep.check(
        "exhaustion",
        k_good == ctx.params.params.len(),
        json!({ "params": ctx.params.params.len(), "irr_ell_prime_N": k_good }),
    );
    // central characters: Ω(z) = Ω(1)·λ(z)
    let center = s.torus.center(&s.weyl.rs);
    let scale = ctx.ring.level / s.torus.char_level();
    let mut central_bad = Vec::new();
    for (pi, om) in omegas.iter().enumerate() {
        let lam = ctx.params.params[pi].lambda();
        for z in &center {
            let k = ctx.classes.class(ctx.ngroup.index(&ctx.ngroup.from_t(z.clone())));
            let mut expect = ctx.ring.zero();
            ctx.ring.add_shifted(&mut expect, lam.eval_exp(&s.torus, z) * scale, &ctx.ring.from_int(om[0][0]));
            if om[k] != expect {
                central_bad.push(json!({ "lambda": lam.exps, "eta": ctx.params.params[pi].eta(), "z": z.exps }));
            }
        }
    }
    rep.check("central_characters", central_bad.is_empty(), json!(central_bad));
    Ok(omegas)
}

fn run_equivariance(ctx: &RunContext, rep: &mut VerificationReport) -> Result<(), McKayError> {
    let omegas = all_omegas(ctx);
    let gens = ctx.galois_generators();
    let s = &ctx.setting;
    let mut failures = Vec::new();
    let mut indeterminate = Vec::new();
    let mut gamma_bad = Vec::new();
    let mut delta_r_bad = Vec::new();
    let mut delta_sq_bad = Vec::new();
    let mut images: Vec<Vec<ActionResult>> = Vec::new();
    for sigma in &gens {
        let u = sigma.base.unit_at(ctx.ring.level);
        let results: Vec<Result<ActionResult, String>> = (0..ctx.params.params.len())
            .into_par_iter()
            .map(|pi| ctx.param_action(sigma, pi).map_err(|e| e.to_string()))
            .collect();
        let mut row = Vec::new();
        for (pi, r) in results.into_iter().enumerate() {
            let p = &ctx.params.params[pi];
            match r {
                Ok(ActionResult::Param(j)) => {
                    let lhs = &omegas[j];
                    let rhs: Vec<Vec<i64>> = omegas[pi].iter().map(|v| ctx.ring.galois(v, u)).collect();
                    if *lhs != rhs {
                        failures.push(json!({ "sigma": sigma.base.unit, "level": sigma.base.level,
                            "lambda": p.lambda().exps, "eta": p.eta(), "image": j }));
                    }
                    row.push(ActionResult::Param(j));
                }
                Ok(ActionResult::Indeterminate(why)) => {
                    indeterminate.push(json!({ "sigma": sigma.base.unit, "lambda": p.lambda().exps, "eta": p.eta(), "reason": why }));
                    row.push(ActionResult::Indeterminate(why));
                }
                Err(e) => {
                    failures.push(json!({ "sigma": sigma.base.unit, "lambda": p.lambda().exps, "eta": p.eta(), "error": e }));
                    row.push(ActionResult::Indeterminate(e));
                }
            }
        }
        images.push(row);
        for o in &ctx.orbits {
            let rel = &o.data.rel;
            let g = gamma(s, rel, sigma);
            if !is_character(s, &g) {
                gamma_bad.push(json!({ "sigma": sigma.base.unit, "lambda": o.data.lambda.exps }));
            }
            let del = ctx.ext.delta_sigma(&o.data.lambda, rel, &sigma.base)?;
            let half = ctx.ext.level as u32 / 2;
            for &(w, e) in &del {
                if rel.r_lambda.binary_search(&w).is_ok() && e != 0 {
                    delta_r_bad.push(json!({ "sigma": sigma.base.unit, "lambda": o.data.lambda.exps, "w": w }));
                }
                if e != 0 && e != half {
                    delta_sq_bad.push(json!({ "sigma": sigma.base.unit, "lambda": o.data.lambda.exps, "w": w }));
                }
            }
        }
    }
    if !failures.is_empty() && !ctx.params.flags.is_empty() {
        // predicted failure: the setting is outside the proven range
        rep.push("equivariance", Status::Flagged, json!(failures));
    } else {
        rep.check("equivariance", failures.is_empty(), json!(failures));
    }
    if !indeterminate.is_empty() {
        rep.push("equivariance_indeterminate", Status::Indeterminate, json!(indeterminate));
    }
    rep.check("gamma_is_character", gamma_bad.is_empty(), json!(gamma_bad));
    rep.check("delta_trivial_on_r", delta_r_bad.is_empty(), json!(delta_r_bad));
    if ctx.ell == 2 {
        rep.check("delta_order_two", delta_sq_bad.is_empty(), json!(delta_sq_bad));
    } else if !delta_sq_bad.is_empty() {
        rep.push("delta_order_two", Status::Flagged, json!(delta_sq_bad));
    }
    // group-action law on generator pairs
    let mut law_bad = Vec::new();
    for (a, sa) in gens.iter().enumerate() {
        for (b, sb) in gens.iter().enumerate() {
            let comp = sa.compose(sb);
            for pi in 0..ctx.params.params.len() {
                let ActionResult::Param(j) = images[b][pi] else { continue };
                let ActionResult::Param(k) = images[a][j] else { continue };
                match ctx.param_action(&comp, pi) {
                    Ok(ActionResult::Param(m)) if m == k => {}
                    Ok(ActionResult::Indeterminate(_)) => {}
                    other => law_bad.push(json!({ "a": a, "b": b, "param": pi, "got": format!("{other:?}") })),
                }
            }
        }
    }
    rep.check("action_law", law_bad.is_empty(), json!(law_bad));
    Ok(())
}

/// Hecke-side checks on every orbit: relations, g-point against the
/// group table, rational f-point, η^{(σ)} against η^σ, Clifford induction.
pub fn run_hecke_checks(setting: &Setting, orbits: &[&HeckeOrbit], gens: &[HEllElt], rep: &mut VerificationReport) {
    let mut skipped = Vec::new();
    let mut g_ok = true;
    let mut f_ok = true;
    let mut twist_bad = Vec::new();
    let mut cliff_bad = Vec::new();
    let mut relations_bad = Vec::new();
    for o in orbits {
        let Some((h, _)) = &o.hecke else {
            skipped.push(json!({ "lambda": o.data.lambda.exps, "reason": o.note }));
            g_ok = false;
            f_ok &= !o.irrational;
            continue;
        };
        // R(λ) alone has rational f-values; the C(λ)-extension may need √q
        match HeckeChars::cached(h.model.with_complement(vec![0]).expect("trivial complement is always valid")) {
            Ok(b) => f_ok &= b.all_rational() || o.has_g2,
            Err(_) => f_ok = false,
        }
        if h.model.nr() <= 64 {
            let base = Arc::new(
                h.model.with_complement(vec![0]).expect("trivial complement is always valid"),
            );
            let gh = hecke::GenericHecke::build_h0(base, &o.data.rel.w_lambda);
            if !gh.verify_relations() || !gh.g_point_is_group_algebra() {
                relations_bad.push(json!(o.data.lambda.exps));
            }
        }
        for sigma in gens {
            for eta in 0..o.data.table.irr.len() {
                if let (EtaTwist::Determinate(k), _) = o.eta_twist(setting.q, eta, sigma) {
                    let img = o.data.table.irr[eta].act(&sigma.base);
                    if o.data.table.irr[k] != img {
                        twist_bad.push(json!({ "lambda": o.data.lambda.exps, "eta": eta, "sigma": sigma.base.unit }));
                    }
                }
            }
        }
        if o.data.rel.c_lambda.len() > 1 {
            match hecke::clifford_extend_and_induce(&h.model) {
                Ok(cs) => {
                    for c in cs {
                        if !(c.induced_irreducible && c.matches_group_induction) {
                            cliff_bad.push(json!({ "lambda": o.data.lambda.exps, "psi0": c.psi0 }));
                        }
                    }
                }
                Err(e) => cliff_bad.push(json!({ "lambda": o.data.lambda.exps, "error": e.to_string() })),
            }
        }
    }
    rep.check("hecke_relations", relations_bad.is_empty(), json!(relations_bad));
    rep.check("hecke_g_point", g_ok, json!({ "skipped": skipped }));
    rep.check("hecke_f_rational", f_ok, Value::Null);
    rep.check("eta_twist_galois", twist_bad.is_empty(), json!(twist_bad));
    rep.check("clifford_induction", cliff_bad.is_empty(), json!(cliff_bad));
}

/// Galois generators at a level covering Λ, the tables of W(λ) and √p,
/// for runs that do not build N.
fn param_level_generators(setting: &Setting, ext: &ExtensionMap, params: &ParamSet, ell: u64) -> Result<Vec<HEllElt>, McKayError> {
    let (p, _) = prime_power(setting.q)?;
    let level = params.orbits.iter().fold(lcm(ext.value_level(), 4 * p), |a, od| lcm(a, table_level(od)));
    Ok(h_ell_generators(ell, level))
}

/// The Hecke checks for every orbit of ℓ′-parameters, without building N.
pub fn hecke_suite(setting: Arc<Setting>, ell: u64) -> Result<VerificationReport, McKayError> {
    let d = crate::cyclo::d_ell(setting.q, ell).map_err(|e| McKayError::Unsupported(e.to_string()))?;
    let params = enumerate_params(&setting, ell)?;
    let ext = ExtensionMap::build(setting.clone())?;
    let gens = param_level_generators(&setting, &ext, &params, ell)?;
    let hs: Vec<HeckeOrbit> = params.orbits.par_iter().map(|od| HeckeOrbit::new(&setting, od)).collect();
    let refs: Vec<&HeckeOrbit> = hs.iter().collect();
    let mut rep = VerificationReport::new(&setting.cartan.to_string(), setting.q, ell, d, setting.twisted);
    run_hecke_checks(&setting, &refs, &gens, &mut rep);
    Ok(rep)
}

/// δ_{λ,σ} on every orbit of ℓ′-parameters and every generator σ:
/// trivial on R(λ), of order ≤ 2, and (with `expect_trivial`) trivial.
pub fn delta_checks(setting: Arc<Setting>, ell: u64, expect_trivial: bool) -> Result<VerificationReport, McKayError> {
    let d = crate::cyclo::d_ell(setting.q, ell).map_err(|e| McKayError::Unsupported(e.to_string()))?;
    let params = enumerate_params(&setting, ell)?;
    let ext = ExtensionMap::build(setting.clone())?;
    let gens = param_level_generators(&setting, &ext, &params, ell)?;
    let mut rep = VerificationReport::new(&setting.cartan.to_string(), setting.q, ell, d, setting.twisted);
    let half = (ext.level / 2) as u32;
    let mut r_bad = Vec::new();
    let mut sq_bad = Vec::new();
    let mut nontrivial = Vec::new();
    let mut cells = 0usize;
    for od in &params.orbits {
        for sigma in &gens {
            for (w, e) in ext.delta_sigma(&od.lambda, &od.rel, &sigma.base)? {
                cells += 1;
                let wit = json!({ "lambda": od.lambda.exps, "sigma": sigma.base.unit, "w": w, "exp": e });
                if e != 0 && od.rel.r_lambda.binary_search(&w).is_ok() {
                    r_bad.push(wit.clone());
                }
                if e != 0 && (ext.level % 2 == 1 || e != half) {
                    sq_bad.push(wit.clone());
                }
                if e != 0 {
                    nontrivial.push(wit);
                }
            }
        }
    }
    rep.check("delta_trivial_on_r", r_bad.is_empty(), json!({ "cells": cells, "bad": r_bad }));
    rep.check("delta_order_two", sq_bad.is_empty(), json!({ "cells": cells, "bad": sq_bad }));
    if expect_trivial {
        rep.check("delta_trivial", nontrivial.is_empty(), json!(nontrivial));
    }
    Ok(rep)
}

/// Rationality of Irr_{2′}(N₁) for the twisted torus at q ≡ 3 mod 4.
pub fn verify_rationality_n1(setting: Arc<Setting>) -> Result<VerificationReport, McKayError> {
    if !setting.twisted || setting.q % 4 != 3 {
        return Err(McKayError::Unsupported("rationality needs the twisted torus and q = 3 mod 4".into()));
    }
    let ctx = RunContext::build(setting.clone(), 2)?;
    let mut rep = base_report(&ctx);
    let omegas = run_n_side_checks(&ctx, &mut rep)?;
    let irrational: Vec<Value> = omegas
        .iter()
        .enumerate()
        .filter(|(_, om)| !om.iter().all(|v| ZRing::is_rational(v)))
        .map(|(pi, _)| {
            let p = &ctx.params.params[pi];
            json!({ "lambda": p.lambda().exps, "eta": p.eta() })
        })
        .collect();
    let covered = matches!(setting.cartan.family, Family::B | Family::G | Family::F);
    let status = match (irrational.is_empty(), covered) {
        (true, _) => Status::Pass,
        (false, true) => Status::Fail,
        (false, false) => Status::Flagged,
    };
    rep.push("rational_values", status, json!({ "irrational": irrational, "claimed": covered }));
    Ok(rep)
}

// ---------------------------------------------------------------------------
// type C at ℓ = 2

/// Type C_k (A1 for k = 1) split setting.
pub fn type_c_setting(k: usize, q: u64) -> Result<Setting, McKayError> {
    let label = if k == 1 { "A1".to_string() } else { format!("C{k}") };
    Ok(Setting::from_str(&label, q, false)?)
}

/// The involution λ of T with λ(β∨) = −1 on exactly `a` long positive roots β.
pub fn involution_with_long_count(setting: &Setting, a: usize) -> Option<TorusChar> {
    let rs = &setting.weyl.rs;
    let torus = &setting.torus;
    let maxn = *rs.norms.iter().max()?;
    let long: Vec<usize> = (0..rs.npos).filter(|&b| rs.norms[b] == maxn).collect();
    let r = torus.factors.len();
    (0u32..1 << r).find_map(|mask| {
        let exps: Vec<u64> = (0..r)
            .map(|i| if mask >> i & 1 == 1 { torus.factors[i] / 2 } else { 0 })
            .collect();
        if torus.factors.iter().any(|f| f % 2 == 1) {
            return None;
        }
        let lam = TorusChar { exps };
        let count = long
            .iter()
            .filter(|&&b| lam.eval_exp(torus, &torus.from_coroot_vector(rs.coroot_coords(b))) != 0)
            .count();
        (count == a).then_some(lam)
    })
}

/// γ·δ on the nontrivial element of C(λ).
pub fn gamma_delta_on_complement(
    setting: &Setting,
    ext: &ExtensionMap,
    lambda: &TorusChar,
    sigma: &HEllElt,
) -> Result<i64, McKayError> {
    let rel = setting.rel_data(lambda)?;
    let c = *rel
        .c_lambda
        .iter()
        .find(|&&c| c != 0)
        .ok_or_else(|| McKayError::Unsupported("C(λ) is trivial".into()))?;
    let g = gamma(setting, &rel, sigma).into_iter().find(|&(w, _)| w == c).map(|x| x.1).unwrap_or(1);
    let del = ext.delta_sigma(lambda, &rel, &sigma.base)?;
    let e = del.iter().find(|&&(w, _)| w == c).map(|x| x.1).unwrap_or(0);
    let d = if e == 0 {
        1
    } else if e as u64 * 2 == ext.level {
        -1
    } else {
        return Err(McKayError::Unsupported("δ on C(λ) is not ±1".into()));
    };
    Ok(g * d)
}

/// One row of the type-C sign table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignRow {
    pub rank: usize,
    pub q: u64,
    pub long_count: usize,
    pub unit: u64,
    pub level: u64,
    pub r: u64,
    pub value: i64,
    pub expected: i64,
}

/// γδ on C(λ) for every nontrivial involution λ (up to W) and every
/// element of 𝓗₂ at a level where σ acts on √p and on Λ's values.
pub fn type_c_sign_table(k: usize, q: u64) -> Result<Vec<SignRow>, McKayError> {
    let setting = Arc::new(type_c_setting(k, q)?);
    let ext = ExtensionMap::build(setting.clone())?;
    let (p, _) = prime_power(q)?;
    let level = lcm(lcm(ext.value_level(), 8), 4 * p);
    let mut rows = Vec::new();
    let units = h_ell_units(2, level);
    for a in 1..=k {
        let lam = involution_with_long_count(&setting, a)
            .ok_or_else(|| McKayError::Unsupported(format!("no involution with {a} long coroots")))?;
        for &u in &units {
            let sigma = HEllElt::from_unit(level, u, 2).map_err(|e| McKayError::Unsupported(e.to_string()))?;
            let value = gamma_delta_on_complement(&setting, &ext, &lam, &sigma)?;
            let expected = match q % 8 {
                1 | 7 => 1,
                _ => {
                    if sigma.r % 2 == 1 {
                        -1
                    } else {
                        1
                    }
                }
            };
            rows.push(SignRow { rank: k, q, long_count: a, unit: u, level, r: sigma.r, value, expected });
        }
    }
    Ok(rows)
}

/// An odd-degree character of Sp_{2n}(q) by its parameter tokens: one
/// entry per binary digit j of n (descending), (non-unipotent, label in
/// 0..2^{j+1}). The digits marked non-unipotent form the series subset I.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpToken {
    pub digits: Vec<(u32, bool, u32)>,
}

impl SpToken {
    fn series(&self) -> Vec<u32> {
        self.digits.iter().filter(|d| d.1).map(|d| d.0).collect()
    }

    /// The partner in the pair {η, (−1_{C(λ)})η} (resp. ψ₁ ↔ ψ₂).
    fn partner(&self) -> Option<SpToken> {
        let pos = self.digits.iter().rposition(|d| d.1)?;
        let mut t = self.clone();
        t.digits[pos].2 ^= 1;
        Some(t)
    }
}

fn binary_digits(n: usize) -> Vec<u32> {
    (0..usize::BITS).rev().filter(|&j| n >> j & 1 == 1).collect()
}

/// Irr_{2′}(Sp_{2n}(q)) as tokens.
pub fn sp_tokens(n: usize) -> Vec<SpToken> {
    let digits = binary_digits(n);
    let mut out = vec![SpToken { digits: vec![] }];
    for &j in &digits {
        let mut next = Vec::new();
        for t in &out {
            for nonunip in [false, true] {
                for label in 0..(1u32 << (j + 1)) {
                    let mut d = t.digits.clone();
                    d.push((j, nonunip, label));
                    next.push(SpToken { digits: d });
                }
            }
        }
        out = next;
    }
    out
}

/// Swap decisions for the non-unipotent series of Sp_{2k}(q).
struct SpSwapData {
    q: u64,
    /// per rank k: setting and extension map
    ranks: BTreeMap<usize, (Arc<Setting>, Arc<ExtensionMap>)>,
}

impl SpSwapData {
    fn new(q: u64, ranks: &[usize]) -> Result<Self, McKayError> {
        let mut m = BTreeMap::new();
        for &k in ranks {
            if m.contains_key(&k) {
                continue;
            }
            let s = Arc::new(type_c_setting(k, q)?);
            let e = Arc::new(ExtensionMap::build(s.clone())?);
            m.insert(k, (s, e));
        }
        Ok(SpSwapData { q, ranks: m })
    }

    fn level(&self) -> Result<u64, McKayError> {
        let (p, _) = prime_power(self.q)?;
        Ok(self.ranks.values().fold(lcm(8, 4 * p), |a, (_, e)| lcm(a, e.value_level())))
    }

    /// Does σ swap the pairs in series I of Sp_{2k}(q)?
    fn swaps(&self, k: usize, series: &[u32], sigma: &HEllElt) -> Result<bool, McKayError> {
        if series.is_empty() {
            return Ok(false);
        }
        let a: usize = series.iter().map(|&j| 1usize << j).sum();
        if self.q % 4 == 3 && series.contains(&0) {
            // ψ-series of Sp₂ × T₀
            return Ok(sqrt_omega_q_sign(self.q, sigma) == -1);
        }
        let (s, e) = &self.ranks[&k];
        let lam = involution_with_long_count(s, a)
            .ok_or_else(|| McKayError::Unsupported(format!("no involution with {a} long coroots")))?;
        Ok(gamma_delta_on_complement(s, e, &lam, sigma)? == -1)
    }

    fn act(&self, k: usize, t: &SpToken, sigma: &HEllElt) -> Result<SpToken, McKayError> {
        Ok(if self.swaps(k, &t.series(), sigma)? { t.partner().expect("non-unipotent token") } else { t.clone() })
    }
}

/// Tokens of Irr_{2′}(M) for the local subgroup M: the wreath product
/// Sp_n ≀ 2 when n is a power of 2, else Sp_{2(n−m)} × Sp_{2m}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum MToken {
    Wreath { mu: SpToken, beta: bool },
    Product { left: SpToken, right: SpToken },
}

fn m_shape(n: usize) -> Result<(Vec<usize>, bool), McKayError> {
    let digits = binary_digits(n);
    if n < 2 {
        return Err(McKayError::Unsupported("the pairing needs n ≥ 2".into()));
    }
    if digits.len() == 1 {
        Ok((vec![n / 2], true))
    } else {
        let m = 1usize << digits[0];
        Ok((vec![n - m, m], false))
    }
}

fn m_tokens(n: usize) -> Result<Vec<MToken>, McKayError> {
    let (ranks, wreath) = m_shape(n)?;
    Ok(if wreath {
        sp_tokens(ranks[0])
            .into_iter()
            .flat_map(|mu| [false, true].map(|beta| MToken::Wreath { mu: mu.clone(), beta }))
            .collect()
    } else {
        let mut v = Vec::new();
        for l in sp_tokens(ranks[0]) {
            for r in sp_tokens(ranks[1]) {
                v.push(MToken::Product { left: l.clone(), right: r });
            }
        }
        v
    })
}

impl MToken {
    /// The G-series (subset of digits of n) this token corresponds to.
    fn series(&self, n: usize) -> Vec<u32> {
        match self {
            MToken::Wreath { mu, .. } => {
                if mu.series().is_empty() {
                    vec![]
                } else {
                    binary_digits(n)
                }
            }
            MToken::Product { left, right } => {
                let mut s = left.series();
                s.extend(right.series());
                s.sort_by(|a, b| b.cmp(a));
                s
            }
        }
    }

    fn partner(&self) -> Option<MToken> {
        match self {
            MToken::Wreath { mu, beta } => Some(MToken::Wreath { mu: mu.partner()?, beta: *beta }),
            MToken::Product { left, right } => {
                let (l2, r2) = (left.partner(), right.partner());
                if l2.is_none() && r2.is_none() {
                    return None;
                }
                Some(MToken::Product {
                    left: l2.unwrap_or_else(|| left.clone()),
                    right: r2.unwrap_or_else(|| right.clone()),
                })
            }
        }
    }

    fn act(&self, n: usize, data: &SpSwapData, sigma: &HEllElt) -> Result<MToken, McKayError> {
        let (ranks, _) = m_shape(n)?;
        Ok(match self {
            MToken::Wreath { mu, beta } => MToken::Wreath { mu: data.act(ranks[0], mu, sigma)?, beta: *beta },
            MToken::Product { left, right } => MToken::Product {
                left: data.act(ranks[0], left, sigma)?,
                right: data.act(ranks[1], right, sigma)?,
            },
        })
    }

    fn label(&self) -> String {
        format!("{self:?}")
    }
}

/// Pair-respecting matching of Irr_{2′}(Sp_{2n}(q)) with Irr_{2′}(M) at
/// the parameter level, with 𝓗₂-equivariance and fixed-point counts.
pub fn sp_pairing(n: usize, q: u64) -> Result<VerificationReport, McKayError> {
    if q % 2 == 0 || q % 8 == 1 {
        return Err(McKayError::Unsupported("the pairing is for odd q with q ≠ 1 mod 8".into()));
    }
    let (m_ranks, _) = m_shape(n)?;
    let mut all_ranks = vec![n];
    all_ranks.extend(&m_ranks);
    let data = SpSwapData::new(q, &all_ranks)?;
    let level = data.level()?;
    let units = h_ell_units(2, level);
    let d = crate::cyclo::d_ell(q, 2).map_err(|e| McKayError::Unsupported(e.to_string()))?;
    let mut rep = VerificationReport::new(&format!("C{n}"), q, 2, d, false);

    let g = sp_tokens(n);
    let m = m_tokens(n)?;
    let digits = binary_digits(n);
    let expected: usize = 1 << (digits.iter().sum::<u32>() as usize + 2 * digits.len());
    rep.check("count_g_side", g.len() == expected, json!({ "count": g.len(), "expected": expected }));
    rep.check("count_m_side", m.len() == expected, json!({ "count": m.len(), "expected": expected }));
    for t in &g {
        rep.params.push(ParamRecord {
            lambda: t.digits.iter().map(|d| u64::from(d.1)).collect(),
            eta: t.digits.iter().fold(0usize, |acc, d| (acc << (d.0 + 1)) | d.2 as usize),
            kind: if t.series().is_empty() { "unipotent".into() } else { "non-unipotent".into() },
            degree: None,
        });
    }

    // matching: series by series, pairs to pairs
    let mut g_by: BTreeMap<Vec<u32>, Vec<SpToken>> = BTreeMap::new();
    for t in &g {
        g_by.entry(t.series()).or_default().push(t.clone());
    }
    let mut m_by: BTreeMap<Vec<u32>, Vec<MToken>> = BTreeMap::new();
    for t in &m {
        m_by.entry(t.series(n)).or_default().push(t.clone());
    }
    let mut bij: HashMap<SpToken, MToken> = HashMap::new();
    let mut match_ok = g_by.keys().eq(m_by.keys());
    for (series, gs) in &g_by {
        let Some(ms) = m_by.get(series) else {
            match_ok = false;
            continue;
        };
        if gs.len() != ms.len() {
            match_ok = false;
            continue;
        }
        if series.is_empty() {
            for (a, b) in gs.iter().zip(ms) {
                bij.insert(a.clone(), b.clone());
            }
            continue;
        }
        let g_pairs: Vec<(SpToken, SpToken)> =
            gs.iter().filter_map(|t| t.partner().filter(|p| t < p).map(|p| (t.clone(), p))).collect();
        let m_pairs: Vec<(MToken, MToken)> =
            ms.iter().filter_map(|t| t.partner().filter(|p| t < p).map(|p| (t.clone(), p))).collect();
        if g_pairs.len() != m_pairs.len() || 2 * g_pairs.len() != gs.len() {
            match_ok = false;
            continue;
        }
        for ((a, a2), (b, b2)) in g_pairs.into_iter().zip(m_pairs) {
            bij.insert(a, b);
            bij.insert(a2, b2);
        }
    }
    rep.check("pair_respecting_matching", match_ok && bij.len() == g.len(), json!({ "matched": bij.len() }));

    let mut eq_bad = Vec::new();
    let mut fix_bad = Vec::new();
    let mut rule_bad = Vec::new();
    for &u in &units {
        let sigma = HEllElt::from_unit(level, u, 2).map_err(|e| McKayError::Unsupported(e.to_string()))?;
        let mut fix_g = 0;
        let mut fix_m = 0;
        for t in &g {
            let tg = data.act(n, t, &sigma)?;
            if tg == *t {
                fix_g += 1;
            }
            if let (Some(b), Some(bt)) = (bij.get(t), bij.get(&tg)) {
                let mb = b.act(n, &data, &sigma)?;
                if mb != *bt {
                    eq_bad.push(json!({ "unit": u, "token": format!("{t:?}"), "image": mb.label() }));
                }
            }
            let series = t.series();
            if !series.is_empty() {
                let moved = sqrt_omega_q_sign(q, &sigma) == -1;
                if data.swaps(n, &series, &sigma)? != moved {
                    rule_bad.push(json!({ "unit": u, "series": series }));
                }
            }
        }
        for t in &m {
            if t.act(n, &data, &sigma)? == *t {
                fix_m += 1;
            }
        }
        if fix_g != fix_m {
            fix_bad.push(json!({ "unit": u, "r": sigma.r, "fixed_g": fix_g, "fixed_m": fix_m }));
        }
    }
    rep.check("equivariance", eq_bad.is_empty(), json!(eq_bad));
    rep.check("fixed_point_counts", fix_bad.is_empty(), json!(fix_bad));
    rule_bad.dedup();
    rep.check("swap_iff_sqrt_omega_q_moved", rule_bad.is_empty(), json!(rule_bad));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setting(s: &str, q: u64, tw: bool) -> Arc<Setting> {
        Arc::new(Setting::from_str(s, q, tw).unwrap())
    }

    #[test]
    fn zring_arithmetic() {
        let r = ZRing::new(12);
        let z = Cyclotomic::zeta(12, 5);
        let v = r.from_cyclo(&z).unwrap();
        let prod = r.mul(&v, &r.conj(&v));
        assert_eq!(prod, r.from_int(1));
        assert_eq!(r.to_cyclo(&r.galois(&v, 7)), Cyclotomic::zeta(12, 35));
        let mut acc = r.zero();
        r.add_shifted(&mut acc, 6, &r.from_int(1));
        assert_eq!(acc, r.from_int(-1));
    }

    #[test]
    fn gamma_examples() {
        // q = 9: trivial
        let s = setting("C2", 9, false);
        let rel = s.rel_data(&TorusChar { exps: vec![4, 4] }).unwrap();
        let sig = HEllElt::from_unit(24, 5, 2).unwrap();
        assert!(gamma(&s, &rel, &sig).iter().all(|&(_, v)| v == 1));
        // q = 3 with σ moving √3, C(λ) generated by a reflection
        let s = setting("A1", 3, false);
        let lam = TorusChar { exps: vec![1] };
        let rel = s.rel_data(&lam).unwrap();
        assert_eq!(rel.c_lambda.len(), 2);
        let level = 24;
        let moving = h_ell_units(2, level)
            .into_iter()
            .map(|u| HEllElt::from_unit(level, u, 2).unwrap())
            .find(|sg| sqrt_q_sign(3, sg) == -1)
            .unwrap();
        let g = gamma(&s, &rel, &moving);
        assert_eq!(g.iter().find(|x| x.0 == rel.c_lambda[1]).unwrap().1, -1);
        assert!(is_character(&s, &g));
        // ℓ odd dividing q − 1: trivial
        let s = setting("C2", 7, false);
        let lam = involution_with_long_count(&s, 1).unwrap();
        let rel = s.rel_data(&lam).unwrap();
        for sg in h_ell_generators(3, lcm(6, 28)) {
            assert!(gamma(&s, &rel, &sg).iter().all(|&(_, v)| v == 1));
        }
    }

    #[test]
    fn identity_action_and_trivial_omega() {
        let s = setting("C2", 5, false);
        let ctx = RunContext::build(s, 2).unwrap();
        let id = HEllElt::from_unit(ctx.galois_level, 1, 2).unwrap();
        for pi in 0..ctx.params.params.len() {
            assert_eq!(ctx.param_action(&id, pi).unwrap(), ActionResult::Param(pi));
        }
        // λ = 1, η = trivial gives the trivial character of N
        let pi = ctx
            .params
            .params
            .iter()
            .position(|p| p.lambda().is_trivial() && ctx.orbits[0].data.table.irr[p.eta()].degree_int() == 1
                && ctx.orbits[0].data.table.irr[p.eta()].values.iter().all(|v| *v == Cyclotomic::one()))
            .unwrap();
        let om = ctx.omega(pi);
        assert!(om.iter().all(|v| *v == ctx.ring.from_int(1)));
    }

    #[test]
    fn omega_matches_group_induction() {
        // G2(5): Ω against charkit::induce on a nontrivial λ
        let s = setting("G2", 5, false);
        let ctx = RunContext::build(s, 2).unwrap();
        let pi = ctx.params.params.iter().position(|p| !p.lambda().is_trivial()).unwrap();
        let oi = ctx.orbit_of_param(pi);
        let oc = &ctx.orbits[oi];
        let om = ctx.omega(pi);
        // N_λ as a subgroup of N, with φ = Λ(λ)η
        let n = ctx.ngroup.clone();
        let elems: Vec<usize> = (0..n.order()).filter(|&i| oc.wset.contains(&n.elt(i).w)).collect();
        let parent: Arc<dyn FiniteGroup> = n.clone();
        let sub = charkit::Subgroup::from_elements(parent, elems);
        let scl = Classes::compute(&sub);
        let eta = ctx.params.params[pi].eta();
        let lv = ctx.ext.value_level();
        let phi = ClassFunction {
            values: scl
                .reps
                .iter()
                .map(|&r| {
                    let x = n.elt(sub.elems[r]);
                    let e = ctx.ext.lambda_exp(&oc.data.lambda, &oc.wset, &x).unwrap();
                    &Cyclotomic::zeta(lv, e as i64) * &oc.data.table.irr[eta].values[oc.class_of_w[&x.w]]
                })
                .collect(),
        };
        let ind = charkit::induce(&phi, &sub, &scl, &ctx.classes);
        for (k, v) in om.iter().enumerate() {
            assert_eq!(ctx.ring.to_cyclo(v), ind.values[k]);
        }
    }

    #[test]
    fn small_verification_passes() {
        let rep = verify_equivariance(setting("C2", 9, false), 2).unwrap();
        assert!(!rep.failed(), "{}", rep.to_json());
        assert_eq!(rep.status_of("equivariance"), Some(Status::Pass));
        // q = 5 mod 8: the plain action is not equivariant, and is flagged
        let rep = verify_equivariance(setting("C2", 5, false), 2).unwrap();
        assert_eq!(rep.status_of("equivariance"), Some(Status::Flagged), "{}", rep.to_json());
        assert!(!rep.failed());
        let text = rep.to_json();
        assert_eq!(VerificationReport::parse(&text).unwrap(), rep);
    }

    #[test]
    fn sign_table_small() {
        for q in [3, 5] {
            for row in type_c_sign_table(2, q).unwrap() {
                assert_eq!(row.value, row.expected, "{row:?}");
            }
        }
    }

    #[test]
    fn sp_tokens_count() {
        assert_eq!(sp_tokens(1).len(), 4);
        assert_eq!(sp_tokens(2).len(), 8);
        assert_eq!(sp_tokens(3).len(), 32);
        assert_eq!(sp_tokens(4).len(), 16);
    }

    #[test]
    fn report_parse_rejects() {
        assert!(VerificationReport::parse("{}").is_err());
        let mut r = VerificationReport::new("A1", 3, 2, 2, false);
        r.meta.version = "other".into();
        assert!(VerificationReport::parse(&r.to_json()).is_err());
    }
}
