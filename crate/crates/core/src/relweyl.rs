//! Characters of the torus, relative Weyl groups W(λ) = R(λ)⋊C(λ), and
//! enumeration of the ℓ′-parameter sets of the principal series.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charkit::{dixon_table_cached, CharError, CharTable, FiniteGroup, Subgroup};
use crate::chevnorm::{ExtWeyl, NormError, Torus, TorusElt};
use crate::cyclo::{d_ell, pow_mod, split_ell, HEllElt};
use crate::rootsys::{CartanType, Family, RootSystem, WeylGroup};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelError {
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error(transparent)]
    Char(#[from] CharError),
    #[error("semidirect decomposition W(λ) = R(λ)⋊C(λ) fails for {0:?}")]
    Decomposition(Vec<u64>),
    #[error("unsupported combination: {0}")]
    Unsupported(String),
}

/// A linear character of T: λ(generator_i) = ζ_{d_i}^{exps_i}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TorusChar {
    pub exps: Vec<u64>,
}

impl TorusChar {
    pub fn trivial(rank: usize) -> Self {
        TorusChar { exps: vec![0; rank] }
    }

    pub fn order(&self, torus: &Torus) -> u64 {
        self.exps
            .iter()
            .zip(&torus.factors)
            .fold(1u64, |acc, (&a, &d)| crate::cyclo::lcm(acc, d / crate::cyclo::gcd(a, d).max(1)))
    }

    pub fn is_trivial(&self) -> bool {
        self.exps.iter().all(|&a| a == 0)
    }

    /// λ^k.
    pub fn pow(&self, torus: &Torus, k: u64) -> TorusChar {
        TorusChar {
            exps: self.exps.iter().zip(&torus.factors).map(|(&a, &d)| a * (k % d) % d).collect(),
        }
    }

    pub fn mul(&self, other: &TorusChar, torus: &Torus) -> TorusChar {
        TorusChar {
            exps: self.exps.iter().zip(&other.exps).zip(&torus.factors).map(|((a, b), d)| (a + b) % d).collect(),
        }
    }

    /// λ(t) as an exponent of ζ_L, L = torus.char_level().
    pub fn eval_exp(&self, torus: &Torus, t: &TorusElt) -> u64 {
        torus.char_exp(&self.exps, t)
    }
}

/// The W-conjugate t ↦ λ(ẇ⁻¹ t ẇ).
pub fn act_on_char(weyl: &WeylGroup, torus: &Torus, w: usize, lambda: &TorusChar) -> TorusChar {
    TorusChar { exps: torus.act_char(weyl.inv(w), &lambda.exps) }
}

/// Galois conjugate λ^σ = σ∘λ.
pub fn galois_on_lambda(sigma: &HEllElt, torus: &Torus, lambda: &TorusChar) -> TorusChar {
    let l = torus.char_level().max(1);
    let u = sigma.base.unit_at(l);
    lambda.pow(torus, u)
}

/// The same action written on the semisimple label: the ℓ′-part of λ is
/// raised to ℓ^r and the ℓ-part to the unit's ℓ-adic component.
pub fn semisimple_label_action(sigma: &HEllElt, torus: &Torus, lambda: &TorusChar) -> TorusChar {
    let o = lambda.order(torus);
    let (la, m) = split_ell(o, sigma.ell);
    // idempotent splitting λ = λ_ℓ · λ_ℓ′
    let e_ell = if m == 1 { 1 } else { crate::cyclo::crt(1, la, 0, m) };
    let e_rest = if la == 1 { 1 } else { crate::cyclo::crt(0, la, 1, m) };
    let lam_ell = lambda.pow(torus, e_ell % o.max(1));
    let lam_rest = lambda.pow(torus, e_rest % o.max(1));
    let b = sigma.base.unit_at(crate::cyclo::lcm(sigma.base.level, la)) % la.max(1);
    let lr = pow_mod(sigma.ell, sigma.r, m.max(1));
    lam_rest.pow(torus, lr).mul(&lam_ell.pow(torus, b), torus)
}

/// λ evaluated on the coroot image α∨(ζ_e) is trivial.
pub fn in_phi_lambda(rs: &RootSystem, torus: &Torus, lambda: &TorusChar, alpha: usize) -> bool {
    let t = torus.from_coroot_vector(rs.coroot_coords(alpha));
    lambda.eval_exp(torus, &t) == 0
}

/// W(λ) as sorted element indices.
pub fn stabilizer_w(weyl: &WeylGroup, torus: &Torus, lambda: &TorusChar) -> Vec<usize> {
    (0..weyl.order()).filter(|&w| act_on_char(weyl, torus, w, lambda) == *lambda).collect()
}

/// Relative Weyl group data for one λ.
#[derive(Clone, Debug)]
pub struct RelWeylData {
    pub lambda: TorusChar,
    pub w_lambda: Vec<usize>,
    pub r_lambda: Vec<usize>,
    pub c_lambda: Vec<usize>,
    /// simple system of Φ_λ inside Φ⁺ (root indices)
    pub delta: Vec<usize>,
    /// all roots of Φ_λ
    pub phi: Vec<usize>,
    /// W elements s_β for β ∈ Δ_λ
    pub r_gens: Vec<usize>,
    pub c_gens: Vec<usize>,
    /// Coxeter system realized on Δ_λ (None when R(λ) = 1)
    pub coxeter: Option<Arc<WeylGroup>>,
}

impl RelWeylData {
    pub fn compute(weyl: &Arc<WeylGroup>, torus: &Torus, lambda: &TorusChar) -> Result<Self, RelError> {
        let rs = &weyl.rs;
        let w_lambda = stabilizer_w(weyl, torus, lambda);
        let (phi, delta) = r_lambda_roots(rs, torus, lambda);
        let r_gens: Vec<usize> = delta.iter().map(|&b| weyl.reflection[b]).collect();
        let r_lambda = crate::charkit::closure(&**weyl, &r_gens);
        let phi_pos: HashSet<usize> = phi.iter().copied().filter(|&k| rs.is_positive(k)).collect();
        let delta_set: HashSet<usize> = delta.iter().copied().collect();
        let c_lambda: Vec<usize> = w_lambda
            .iter()
            .copied()
            .filter(|&w| delta.iter().all(|&b| delta_set.contains(&weyl.act_root(w, b))))
            .collect();
        // verify the semidirect decomposition
        let rset: HashSet<usize> = r_lambda.iter().copied().collect();
        let wset: HashSet<usize> = w_lambda.iter().copied().collect();
        let ok = r_lambda.len() * c_lambda.len() == w_lambda.len()
            && c_lambda.iter().filter(|c| rset.contains(c)).count() == 1
            && r_lambda.iter().all(|r| wset.contains(r))
            && w_lambda.iter().all(|&w| {
                r_gens.iter().all(|&s| rset.contains(&weyl.mul(weyl.mul(w, s), weyl.inv(w))))
            })
            && phi_pos.iter().all(|&b| w_lambda.iter().all(|&w| {
                let img = weyl.act_root(w, b);
                phi.contains(&img)
            }));
        if !ok {
            return Err(RelError::Decomposition(lambda.exps.clone()));
        }
        let c_gens = small_generators(weyl, &c_lambda);
        let coxeter = if delta.is_empty() {
            None
        } else {
            let gram: Vec<Vec<i64>> =
                delta.iter().map(|&a| delta.iter().map(|&b| rs.inner(a, b)).collect()).collect();
            let sub = RootSystem::from_gram(gram).map_err(|e| RelError::Unsupported(e.to_string()))?;
            let cw = WeylGroup::new(Arc::new(sub)).map_err(|e| RelError::Unsupported(e.to_string()))?;
            if cw.order() != r_lambda.len() {
                return Err(RelError::Decomposition(lambda.exps.clone()));
            }
            Some(Arc::new(cw))
        };
        Ok(RelWeylData { lambda: lambda.clone(), w_lambda, r_lambda, c_lambda, delta, phi, r_gens, c_gens, coxeter })
    }

    pub fn index_in_w(&self, weyl: &WeylGroup) -> usize {
        weyl.order() / self.w_lambda.len()
    }

    /// Length of w ∈ W(λ) relative to R(λ): #{β ∈ Φ_λ⁺ : w β < 0}.
    pub fn r_length(&self, weyl: &WeylGroup, w: usize) -> usize {
        let rs = &weyl.rs;
        self.phi.iter().filter(|&&b| rs.is_positive(b) && !rs.is_positive(weyl.act_root(w, b))).count()
    }

    /// Decomposes w ∈ W(λ) as w_r·w_c with w_r ∈ R(λ), w_c ∈ C(λ).
    pub fn split(&self, weyl: &WeylGroup, w: usize) -> (usize, usize) {
        for &c in &self.c_lambda {
            let r = weyl.mul(w, weyl.inv(c));
            if self.r_lambda.binary_search(&r).is_ok() {
                return (r, c);
            }
        }
        panic!("element not in W(λ)")
    }
}

fn small_generators(weyl: &WeylGroup, elems: &[usize]) -> Vec<usize> {
    let mut gens: Vec<usize> = Vec::new();
    let mut have: HashSet<usize> = [0].into_iter().collect();
    for &e in elems {
        if !have.contains(&e) {
            gens.push(e);
            have = crate::charkit::closure(weyl, &gens).into_iter().collect();
        }
    }
    gens
}

/// Φ_λ (kernel description) and its simple system inside Φ⁺.
pub fn r_lambda_roots(rs: &RootSystem, torus: &Torus, lambda: &TorusChar) -> (Vec<usize>, Vec<usize>) {
    let phi: Vec<usize> = (0..rs.nroots()).filter(|&a| in_phi_lambda(rs, torus, lambda, a)).collect();
    let pos: Vec<usize> = phi.iter().copied().filter(|&a| rs.is_positive(a)).collect();
    let pos_set: HashSet<usize> = pos.iter().copied().collect();
    // β is simple iff s_β permutes Φ_λ⁺ \ {β}
    let delta = pos
        .iter()
        .copied()
        .filter(|&b| pos.iter().all(|&g| g == b || pos_set.contains(&rs.reflect(b, g))))
        .collect();
    (phi, delta)
}

/// Lexicographically least representatives of the W-orbits on Irr(T),
/// with orbit sizes, in lex order.
pub fn orbit_reps(weyl: &WeylGroup, torus: &Torus) -> Vec<(TorusChar, usize)> {
    let all = crate::charkit::linear_chars(&torus.factors);
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut out = Vec::new();
    for exps in all {
        if seen.contains(&exps) {
            continue;
        }
        let lam = TorusChar { exps };
        let mut orbit: HashSet<Vec<u64>> = HashSet::new();
        for w in 0..weyl.order() {
            orbit.insert(act_on_char(weyl, torus, w, &lam).exps);
        }
        let size = orbit.len();
        seen.extend(orbit);
        out.push((lam, size));
    }
    out
}

/// One irreducible character of G by its principal-series (or, for the
/// symplectic ψ-series, cuspidal-on-Sp₂) parameter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HCParam {
    Principal { lambda: TorusChar, eta: usize },
    SpCuspidal { psi: u8, lambda0: TorusChar, eta: usize },
}

impl HCParam {
    pub fn lambda(&self) -> &TorusChar {
        match self {
            HCParam::Principal { lambda, .. } => lambda,
            HCParam::SpCuspidal { lambda0, .. } => lambda0,
        }
    }

    pub fn eta(&self) -> usize {
        match self {
            HCParam::Principal { eta, .. } | HCParam::SpCuspidal { eta, .. } => *eta,
        }
    }
}

/// W(λ) data for one orbit together with its character table.
#[derive(Clone, Debug)]
pub struct OrbitData {
    pub lambda: TorusChar,
    pub orbit_size: usize,
    pub rel: Arc<RelWeylData>,
    pub sub: Arc<Subgroup>,
    pub table: Arc<CharTable>,
}

/// Enumerated ℓ′-parameters together with per-orbit data.
#[derive(Clone, Debug)]
pub struct ParamSet {
    pub orbits: Vec<OrbitData>,
    pub params: Vec<HCParam>,
    pub flags: Vec<String>,
}

impl ParamSet {
    pub fn orbit_of(&self, lambda: &TorusChar) -> Option<&OrbitData> {
        self.orbits.iter().find(|o| o.lambda == *lambda)
    }
}

/// The common data of one (type, q, twisted) setting.
#[derive(Debug, Clone)]
pub struct Setting {
    pub cartan: CartanType,
    pub q: u64,
    pub twisted: bool,
    pub weyl: Arc<WeylGroup>,
    pub v: Arc<ExtWeyl>,
    pub torus: Arc<Torus>,
}

impl Setting {
    pub fn new(cartan: CartanType, q: u64, twisted: bool) -> Result<Self, RelError> {
        let rs = RootSystem::build(cartan).map_err(|e| RelError::Unsupported(e.to_string()))?;
        let weyl = Arc::new(WeylGroup::new(Arc::new(rs)).map_err(|e| RelError::Unsupported(e.to_string()))?);
        let torus = Arc::new(Torus::build(&weyl, q, twisted)?);
        let v = Arc::new(ExtWeyl::new(weyl.clone(), q % 2 == 0));
        Ok(Setting { cartan, q, twisted, weyl, v, torus })
    }

    pub fn from_str(label: &str, q: u64, twisted: bool) -> Result<Self, RelError> {
        let t: CartanType = label.parse().map_err(|e: crate::rootsys::RootError| RelError::Unsupported(e.to_string()))?;
        Self::new(t, q, twisted)
    }

    pub fn descriptor(&self) -> String {
        format!("{}{}", self.cartan, if self.twisted { "tw" } else { "" })
    }

    pub fn rel_data(&self, lambda: &TorusChar) -> Result<RelWeylData, RelError> {
        RelWeylData::compute(&self.weyl, &self.torus, lambda)
    }

    /// W(λ) as a subgroup of W with its (memoized) character table.
    pub fn orbit_data(&self, lambda: &TorusChar, orbit_size: usize) -> Result<OrbitData, RelError> {
        let rel = Arc::new(self.rel_data(lambda)?);
        let parent: Arc<dyn FiniteGroup> = self.weyl.clone();
        let sub = Arc::new(Subgroup::from_elements(parent, rel.w_lambda.clone()));
        let key = format!("W({})|{:?}", self.cartan, rel.w_lambda);
        let table = dixon_table_cached(&key, &*sub)?;
        Ok(OrbitData { lambda: lambda.clone(), orbit_size, rel, sub, table })
    }
}

/// Warnings for excluded (type, q, ℓ) combinations; empty when supported.
pub fn exclusion_flags(cartan: CartanType, q: u64, ell: u64) -> Vec<String> {
    let mut flags = Vec::new();
    if cartan.family == Family::G && ell == 3 && (q % 9 == 4 || q % 9 == 7) {
        flags.push("G2 with ell = 3 and q = 4, 7 mod 9 is an excluded case".to_string());
    }
    if cartan.family == Family::C && ell == 2 && q % 8 != 1 {
        flags.push("type C with ell = 2 needs q = 1 mod 8 outside the parameter-level pairing".to_string());
    }
    flags
}

/// The ℓ′-parameters (λ up to W, η ∈ Irr_{ℓ′}(W(λ))) with ℓ ∤ [W:W(λ)].
pub fn enumerate_params(setting: &Setting, ell: u64) -> Result<ParamSet, RelError> {
    let q = setting.q;
    let d = d_ell(q, ell).map_err(|e| RelError::Unsupported(e.to_string()))?;
    if setting.twisted {
        if ell != 2 || d != 2 {
            return Err(RelError::Unsupported("twisted torus needs ell = 2 and q = 3 mod 4".into()));
        }
    } else if d != 1 {
        return Err(RelError::Unsupported(format!("d_ell(q) = {d}, the split torus needs d = 1")));
    }
    let flags = exclusion_flags(setting.cartan, q, ell);
    let nw = setting.weyl.order() as u64;
    let mut orbits = Vec::new();
    let mut params = Vec::new();
    for (lam, size) in orbit_reps(&setting.weyl, &setting.torus) {
        let stab = nw / size as u64;
        if (nw / stab) % ell == 0 {
            continue;
        }
        let od = setting.orbit_data(&lam, size)?;
        for (k, chi) in od.table.irr.iter().enumerate() {
            if chi.degree_int() as u64 % ell != 0 {
                params.push(HCParam::Principal { lambda: lam.clone(), eta: k });
            }
        }
        orbits.push(od);
    }
    Ok(ParamSet { orbits, params, flags })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setting(s: &str, q: u64, tw: bool) -> Setting {
        Setting::from_str(s, q, tw).unwrap()
    }

    #[test]
    fn stabilizer_examples() {
        let s = setting("C2", 5, false);
        let triv = TorusChar::trivial(2);
        assert_eq!(stabilizer_w(&s.weyl, &s.torus, &triv).len(), 8);
        // order 2, supported on the long simple coroot
        let lam = TorusChar { exps: vec![0, 2] };
        let brute: Vec<usize> = (0..8)
            .filter(|&w| {
                (0..s.torus.order()).all(|i| {
                    let t = s.torus.elt(i);
                    lam.eval_exp(&s.torus, &t) == lam.eval_exp(&s.torus, &s.torus.act(s.weyl.inv(w), &t))
                })
            })
            .collect();
        assert_eq!(stabilizer_w(&s.weyl, &s.torus, &lam), brute);
        // regular orbit: trivial stabilizer
        let s = setting("A2", 7, false);
        let reg = orbit_reps(&s.weyl, &s.torus).into_iter().find(|(_, n)| *n == 6).unwrap().0;
        assert_eq!(stabilizer_w(&s.weyl, &s.torus, &reg), vec![0]);
    }

    #[test]
    fn relative_weyl_examples() {
        let s = setting("C2", 5, false);
        let d = s.rel_data(&TorusChar::trivial(2)).unwrap();
        assert_eq!(d.r_lambda.len(), 8);
        assert_eq!(d.c_lambda, vec![0]);
        // injective on every coroot image: R trivial
        let s7 = setting("A1", 7, false);
        let d = s7.rel_data(&TorusChar { exps: vec![1] }).unwrap();
        assert_eq!(d.r_lambda, vec![0]);
        assert_eq!(d.w_lambda, d.c_lambda);
        // B4: λ(h_{α₂}(ζ)) = −1, trivial on the other simple coroots
        let s = setting("B4", 5, false);
        let lam = TorusChar { exps: vec![0, 2, 0, 0] };
        let d = s.rel_data(&lam).unwrap();
        assert_eq!(d.r_lambda.len(), 64);
        assert_eq!(d.w_lambda.len(), 128);
        assert_eq!(d.c_lambda.len(), 2);
        let cox = d.coxeter.as_ref().unwrap();
        assert_eq!(cox.order(), 64);
        assert_eq!(cox.rs.rank, 4);
        // the complement contains s_{e1−e3} s_{e2−e4}
        let rs = &s.weyl.rs;
        let e13 = rs.root_index(&[1, 1, 0, 0]).unwrap();
        let e24 = rs.root_index(&[0, 1, 1, 0]).unwrap();
        let c = s.weyl.mul(s.weyl.reflection[e13], s.weyl.reflection[e24]);
        assert!(d.c_lambda.contains(&c));
        // G2: C(λ) always trivial
        let g = setting("G2", 7, false);
        for (lam, _) in orbit_reps(&g.weyl, &g.torus) {
            assert_eq!(g.rel_data(&lam).unwrap().c_lambda.len(), 1);
        }
    }

    #[test]
    fn parameter_counts() {
        let s = setting("G2", 5, false);
        let ps = enumerate_params(&s, 2).unwrap();
        let triv_count = ps.params.iter().filter(|p| p.lambda().is_trivial()).count();
        // W(G2) has four linear characters and two of degree 2
        assert_eq!(triv_count, 4);
        let tw = setting("C2", 3, true);
        let ps = enumerate_params(&tw, 2).unwrap();
        for o in &ps.orbits {
            assert!(o.lambda.order(&tw.torus) <= 2);
        }
        assert!(enumerate_params(&setting("C2", 5, false), 3).is_err());
    }

    #[test]
    fn involution_filter() {
        for (t, q) in [("B3", 5), ("G2", 5), ("B3", 13), ("D4", 5)] {
            let s = setting(t, q, false);
            for o in enumerate_params(&s, 2).unwrap().orbits {
                assert!(o.lambda.order(&s.torus) <= 2, "{t} {q}");
            }
        }
    }

    #[test]
    fn galois_actions_agree() {
        let s = setting("G2", 13, false);
        let lam2 = TorusChar { exps: vec![6, 0] };
        let lam3 = TorusChar { exps: vec![4, 8] };
        for sigma in crate::cyclo::h_ell_generators(2, 12) {
            assert_eq!(galois_on_lambda(&sigma, &s.torus, &lam2), lam2);
        }
        let sigma = HEllElt::from_unit(12, 5, 2).unwrap();
        assert_eq!(sigma.r, 1);
        assert_eq!(galois_on_lambda(&sigma, &s.torus, &lam3), lam3.pow(&s.torus, 2));
        let mut seed = 12345u64;
        let units = crate::cyclo::h_ell_units(2, 12);
        for _ in 0..100 {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = (seed >> 33) % 12;
            let b = (seed >> 13) % 12;
            let u = units[(seed >> 50) as usize % units.len()];
            let lam = TorusChar { exps: vec![a, b] };
            let sigma = HEllElt::from_unit(12, u, 2).unwrap();
            assert_eq!(galois_on_lambda(&sigma, &s.torus, &lam), semisimple_label_action(&sigma, &s.torus, &lam));
        }
    }
}
