//! Extension map Λ for T ◁ N: linear extensions of characters of H to
//! their stabilizers in V, made V-equivariant, then lifted to N_λ = T·V_λ.

use std::collections::HashSet;
use std::sync::Arc;

use thiserror::Error;

use crate::charkit::{linear_characters, FiniteGroup, Subgroup};
use crate::chevnorm::{ExtWeylElt, HElt, NormalizerElt};
use crate::cyclo::{lcm, Cyclotomic, GaloisElt};
use crate::relweyl::{RelWeylData, Setting, TorusChar};
use crate::rootsys::Family;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtError {
    #[error("no linear extension of the H-character {0:#b} trivial on n_α(−1), α ∈ R(δ)")]
    NoExtension(u16),
    #[error("equivariant extension is not well defined at δ = {0:#b}")]
    NotWellDefined(u16),
    #[error("δ is not constant on T-cosets or not a character: {0}")]
    BadDelta(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

const NONE: u32 = u32::MAX;

/// Characters of H are bit masks: δ(h) = (−1)^{popcount(δ & h)}.
pub fn h_char_value(delta: u16, h: HElt) -> i64 {
    if (delta & h.bits).count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// δ^w (h) = δ(w h w⁻¹).
pub fn act_h_char(setting: &Setting, w: usize, delta: u16) -> u16 {
    let v = &setting.v;
    let mut out = 0u16;
    for j in 0..v.rank() {
        let img = v.act_h(w, HElt { bits: 1 << j });
        if (img.bits & delta).count_ones() % 2 == 1 {
            out |= 1 << j;
        }
    }
    out
}

/// R(δ): positive α with s_α fixing δ and δ(h_α(−1)) = 1.
pub fn r_delta(setting: &Setting, delta: u16) -> Vec<usize> {
    let weyl = &setting.weyl;
    let rs = &weyl.rs;
    (0..rs.npos)
        .filter(|&a| {
            act_h_char(setting, weyl.reflection[a], delta) == delta
                && h_char_value(delta, setting.v.h_root(a)) == 1
        })
        .collect()
}

/// W_δ, the stabilizer of δ in W.
pub fn w_delta(setting: &Setting, delta: u16) -> Vec<usize> {
    (0..setting.weyl.order()).filter(|&w| act_h_char(setting, w, delta) == delta).collect()
}

/// Λ₀′(δ): a linear character of V_δ extending δ, trivial on n_α(−1)
/// for α ∈ R(δ). Returns exponents at `level` indexed by V, NONE outside V_δ.
pub fn lambda0_prime(setting: &Setting, delta: u16, level: u64) -> Result<Vec<u32>, ExtError> {
    let v = &setting.v;
    let wd = w_delta(setting, delta);
    let hs = v.h_elements();
    let mut elems = Vec::with_capacity(wd.len() * hs.len());
    for &w in &wd {
        for &h in &hs {
            elems.push(v.index(ExtWeylElt { h, w }));
        }
    }
    let parent: Arc<dyn FiniteGroup> = v.clone();
    let sub = Subgroup::from_elements(parent, elems);
    let rd = r_delta(setting, delta);
    let root_ns: Vec<usize> = rd.iter().map(|&a| sub.local(v.index(v.root_n(a))).unwrap()).collect();
    let h_local: Vec<(usize, i64)> =
        hs.iter().map(|&h| (sub.local(v.index(ExtWeylElt { h, w: 0 })).unwrap(), h_char_value(delta, h))).collect();
    let mut candidates: Vec<Vec<u32>> = Vec::new();
    for chi in linear_characters(&sub) {
        assert_eq!(level % chi.level, 0, "V-characters must live at the common level");
        let scale = (level / chi.level) as u32;
        let exps: Vec<u32> = chi.exps.iter().map(|&e| e * scale).collect();
        let half = (level / 2) as u32;
        let extends = h_local.iter().all(|&(x, s)| exps[x] == if s == 1 { 0 } else { half });
        let trivial_on_roots = root_ns.iter().all(|&x| exps[x] == 0);
        if extends && trivial_on_roots {
            candidates.push(exps);
        }
    }
    // canonical generators: n_α(−1) for α > 0 with s_α ∈ W_δ in root order, then ẇ for w ∈ W_δ
    let wset: HashSet<usize> = wd.iter().copied().collect();
    let mut keys: Vec<usize> = (0..setting.weyl.rs.npos)
        .filter(|&a| wset.contains(&setting.weyl.reflection[a]))
        .map(|a| sub.local(v.index(v.root_n(a))).unwrap())
        .collect();
    keys.extend(wd.iter().map(|&w| sub.local(v.index(v.dot(w))).unwrap()));
    let best = candidates
        .into_iter()
        .min_by(|a, b| {
            let ka: Vec<u32> = keys.iter().map(|&k| a[k]).collect();
            let kb: Vec<u32> = keys.iter().map(|&k| b[k]).collect();
            ka.cmp(&kb)
        })
        .ok_or(ExtError::NoExtension(delta))?;
    let mut out = vec![NONE; v.order()];
    for (i, &e) in sub.elems.iter().enumerate() {
        out[e] = best[i];
    }
    Ok(out)
}

/// The full extension map for one setting.
#[derive(Clone, Debug)]
pub struct ExtensionMap {
    pub setting: Arc<Setting>,
    /// values of Λ₀ are powers of ζ_level
    pub level: u64,
    /// per δ: exponents over V, NONE outside V_δ
    pub lambda0: Vec<Vec<u32>>,
    /// per δ: the step-one extension (for checks)
    pub step_one: Vec<Vec<u32>>,
    /// per δ: its orbit representative and the conjugating W element
    pub orbit_rep: Vec<(u16, usize)>,
}

impl ExtensionMap {
    pub fn build(setting: Arc<Setting>) -> Result<Self, ExtError> {
        let v = setting.v.clone();
        let nh = if v.h_trivial { 1usize } else { 1 << v.rank() };
        let level = v_exponent_level(&setting);
        let step_one: Vec<Vec<u32>> =
            (0..nh).map(|d| lambda0_prime(&setting, d as u16, level)).collect::<Result<_, _>>()?;
        let mut orbit_rep = vec![(u16::MAX, 0usize); nh];
        let mut lambda0 = vec![Vec::new(); nh];
        for d in 0..nh {
            if orbit_rep[d].0 != u16::MAX {
                continue;
            }
            // d is the least mask of its orbit; first w reaching each member
            for w in 0..setting.weyl.order() {
                let e = act_h_char(&setting, w, d as u16) as usize;
                if orbit_rep[e].0 == u16::MAX {
                    orbit_rep[e] = (d as u16, w);
                    // Λ₀(δ^x)(y) = Λ₀′(δ)(x y x⁻¹)
                    let x = v.dot(w);
                    let xi = v.v_inv(x);
                    let mut vals = vec![NONE; v.order()];
                    for (y, slot) in vals.iter_mut().enumerate() {
                        let c = v.v_mult(v.v_mult(x, v.elt(y)), xi);
                        let val = step_one[d][v.index(c)];
                        if val != NONE {
                            *slot = val;
                        }
                    }
                    lambda0[e] = vals;
                }
            }
        }
        let map = ExtensionMap { setting, level, lambda0, step_one, orbit_rep };
        for d in 0..nh {
            if !map.extends(d as u16) {
                return Err(ExtError::NotWellDefined(d as u16));
            }
        }
        Ok(map)
    }

    fn extends(&self, delta: u16) -> bool {
        let v = &self.setting.v;
        let half = (self.level / 2) as u32;
        v.h_elements().iter().all(|&h| {
            let x = self.lambda0[delta as usize][v.index(ExtWeylElt { h, w: 0 })];
            x == if h_char_value(delta, h) == 1 { 0 } else { half }
        })
    }

    /// Λ₀(δ)(v) as an exponent of ζ_level.
    pub fn lambda0_exp(&self, delta: u16, x: ExtWeylElt) -> Option<u32> {
        let e = self.lambda0[delta as usize][self.setting.v.index(x)];
        (e != NONE).then_some(e)
    }

    /// V-equivariance: Λ₀(δ)^x = Λ₀(δ^x) for all x ∈ V and δ.
    pub fn check_v_equivariance(&self) -> bool {
        let v = &self.setting.v;
        let n = v.order();
        (0..self.lambda0.len()).all(|d| {
            (0..n).all(|xi| {
                let x = v.elt(xi);
                let dx = act_h_char(&self.setting, x.w, d as u16) as usize;
                let xinv = v.v_inv(x);
                (0..n).all(|y| {
                    let lhs = self.lambda0[dx][y];
                    if lhs == NONE {
                        return true;
                    }
                    let c = v.v_mult(v.v_mult(x, v.elt(y)), xinv);
                    self.lambda0[d][v.index(c)] == lhs
                })
            })
        })
    }

    /// The ratios μ = Λ₀(δ)/Λ₀′(δ) on each V_δ are ±1-valued, hence σ-fixed.
    pub fn check_mu_rational(&self) -> bool {
        let half = (self.level / 2) as u32;
        self.lambda0.iter().zip(&self.step_one).all(|(a, b)| {
            a.iter().zip(b).all(|(&x, &y)| {
                if x == NONE || y == NONE {
                    return x == y;
                }
                let r = (x + self.level as u32 - y) % self.level as u32;
                r == 0 || r == half
            })
        })
    }

    /// λ|_H as a mask.
    pub fn restrict_to_h(&self, lambda: &TorusChar) -> u16 {
        let s = &self.setting;
        if s.v.h_trivial {
            return 0;
        }
        let mut m = 0u16;
        for j in 0..s.v.rank() {
            let t = s.torus.embed_h(HElt { bits: 1 << j });
            if lambda.eval_exp(&s.torus, &t) != 0 {
                m |= 1 << j;
            }
        }
        m
    }

    /// Common level of Λ(λ) values: lcm of the torus level and Λ₀'s level.
    pub fn value_level(&self) -> u64 {
        lcm(self.setting.torus.char_level(), self.level)
    }

    /// Λ(λ)(t·ẇ) as an exponent at `value_level`, None outside N_λ.
    pub fn lambda_exp(&self, lambda: &TorusChar, rel_w: &HashSet<usize>, n: &NormalizerElt) -> Option<u64> {
        if !rel_w.contains(&n.w) {
            return None;
        }
        let s = &self.setting;
        let l = self.value_level();
        let delta = self.restrict_to_h(lambda);
        let a = lambda.eval_exp(&s.torus, &n.t) * (l / s.torus.char_level());
        let b = self.lambda0_exp(delta, s.v.dot(n.w))? as u64 * (l / self.level);
        Some((a + b) % l)
    }

    /// δ_{λ,σ}(w) = Λ₀(ẇ)^σ / Λ₀(ẇ) on W(λ), as exponents at `level`.
    pub fn delta_sigma(&self, lambda: &TorusChar, rel: &RelWeylData, sigma: &GaloisElt) -> Result<Vec<(usize, u32)>, ExtError> {
        let d = self.restrict_to_h(lambda);
        let u = sigma.unit_at(self.level) as u64;
        let lv = self.level;
        let mut out = Vec::with_capacity(rel.w_lambda.len());
        for &w in &rel.w_lambda {
            let e = self
                .lambda0_exp(d, self.setting.v.dot(w))
                .ok_or_else(|| ExtError::BadDelta("W(λ) not inside W_δ".into()))? as u64;
            let ratio = ((e * u) % lv + lv - e) % lv;
            out.push((w, ratio as u32));
        }
        // δ must be a homomorphism on W(λ)
        let weyl = &self.setting.weyl;
        let lookup: std::collections::HashMap<usize, u32> = out.iter().copied().collect();
        for &(a, ea) in &out {
            for &(b, eb) in &out {
                let ab = weyl.mul(a, b);
                if lookup[&ab] as u64 != (ea as u64 + eb as u64) % lv {
                    return Err(ExtError::BadDelta("not multiplicative".into()));
                }
            }
        }
        Ok(out)
    }

    /// N-equivariance of Λ on a transversal of N/N_λ: for every n = ẋ with
    /// x a coset representative and every element y of N_{λ^x}.
    pub fn check_n_equivariance(&self, lambda: &TorusChar, rel_w: &[usize]) -> bool {
        let s = &self.setting;
        let weyl = &s.weyl;
        let n = match crate::chevnorm::NGroup::new(s.v.clone(), s.torus.clone()) {
            Ok(n) => n,
            Err(_) => return false,
        };
        let wl: HashSet<usize> = rel_w.iter().copied().collect();
        let mut seen = HashSet::new();
        for x in 0..weyl.order() {
            let lam_x = crate::relweyl::act_on_char(weyl, &s.torus, weyl.inv(x), lambda);
            if !seen.insert(lam_x.exps.clone()) {
                continue;
            }
            // N_{λ^x} = x⁻¹ N_λ x; Λ(λ)^x(y) = Λ(λ)(x y x⁻¹)
            let wx: HashSet<usize> = rel_w.iter().map(|&w| weyl.mul(weyl.mul(weyl.inv(x), w), x)).collect();
            let xn = n.from_v(s.v.dot(x));
            let xinv = n.n_inv(&xn);
            for ti in 0..s.torus.order() {
                for &w in &wx {
                    let y = NormalizerElt { t: s.torus.elt(ti), w };
                    let c = n.n_mult(&n.n_mult(&xn, &y), &xinv);
                    if self.lambda_exp(lambda, &wl, &c) != self.lambda_exp(&lam_x, &wx, &y) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// A level at which all linear characters of all V_δ take values.
fn v_exponent_level(setting: &Setting) -> u64 {
    let v = &setting.v;
    let mut e = 2u64;
    for x in 0..v.order() {
        e = lcm(e, v.elt_order(x) as u64);
    }
    e
}

/// Report of the element-c computation in type B_n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementCReport {
    pub n: usize,
    pub q: u64,
    /// λ(h_{e_i − e_{n/2+i}}(−1)) for i = 1..n/2
    pub factors: Vec<i64>,
    pub expected_factor: i64,
    pub lambda_c_squared: Cyclotomic,
    pub lambda_c: Cyclotomic,
    pub c_in_complement: bool,
}

impl ElementCReport {
    pub fn passed(&self) -> bool {
        self.factors.iter().all(|&f| f == self.expected_factor)
            && self.lambda_c_squared == Cyclotomic::one()
            && (self.lambda_c == Cyclotomic::one() || self.lambda_c == Cyclotomic::from_int(-1))
            && self.c_in_complement
    }
}

/// Λ(c)² for c = Π n_{e_i − e_{n/2+i}}(−1) and λ(h_{α_{n/2}}(ζ)) = −1.
pub fn element_c_check(n: usize, q: u64) -> Result<ElementCReport, ExtError> {
    if n != 4 {
        return Err(ExtError::Unsupported(format!("B{n}: only n = 4 is within the Weyl group bound")));
    }
    if q % 2 == 0 {
        return Err(ExtError::Unsupported("q must be odd".into()));
    }
    let setting = Arc::new(
        Setting::new(crate::rootsys::CartanType { family: Family::B, rank: n }, q, false)
            .map_err(|e| ExtError::Unsupported(e.to_string()))?,
    );
    let s = &setting;
    let rs = &s.weyl.rs;
    let mut exps = vec![0u64; n];
    exps[n / 2 - 1] = (q - 1) / 2;
    let lambda = TorusChar { exps };
    let map = ExtensionMap::build(setting.clone())?;
    let rel = s.rel_data(&lambda).map_err(|e| ExtError::Unsupported(e.to_string()))?;
    let mut c = s.v.identity();
    let mut factors = Vec::new();
    for i in 0..n / 2 {
        // e_{i+1} − e_{n/2+i+1} = α_{i+1} + … + α_{n/2+i}
        let mut coords = vec![0i64; n];
        for c in coords.iter_mut().take(n / 2 + i).skip(i) {
            *c = 1;
        }
        let a = rs.root_index(&coords).expect("root e_i − e_j");
        c = s.v.v_mult(c, s.v.root_n(a));
        let t = s.torus.embed_h(s.v.h_root(a));
        factors.push(if lambda.eval_exp(&s.torus, &t) == 0 { 1 } else { -1 });
    }
    let expected_factor = if ((q - 1) / 2) % 2 == 0 { 1 } else { -1 };
    let wl: HashSet<usize> = rel.w_lambda.iter().copied().collect();
    let l = map.value_level();
    let nc = NormalizerElt { t: s.torus.embed_h(c.h), w: c.w };
    let e = map.lambda_exp(&lambda, &wl, &nc).ok_or_else(|| ExtError::BadDelta("c not in N_λ".into()))?;
    let lambda_c = Cyclotomic::zeta(l, e as i64).normalized();
    Ok(ElementCReport {
        n,
        q,
        factors,
        expected_factor,
        lambda_c_squared: (&lambda_c * &lambda_c).normalized(),
        lambda_c,
        c_in_complement: rel.c_lambda.contains(&c.w),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(s: &str, q: u64) -> ExtensionMap {
        ExtensionMap::build(Arc::new(Setting::from_str(s, q, false).unwrap())).unwrap()
    }

    #[test]
    fn trivial_delta_gives_trivial_character() {
        let m = map("C2", 5);
        assert!(m.lambda0[0].iter().all(|&e| e == 0));
    }

    #[test]
    fn a1_picks_zeta4() {
        let m = map("A1", 5);
        let v = &m.setting.v;
        assert!(r_delta(&m.setting, 1).is_empty());
        let e = m.lambda0_exp(1, v.n_simple(0)).unwrap();
        assert_eq!(Cyclotomic::zeta(m.level, e as i64), Cyclotomic::zeta(4, 1));
    }

    #[test]
    fn c2_long_coroot_coordinate() {
        // δ nontrivial on the long simple coroot α₁∨ (α₁ short) only
        let m = map("C2", 5);
        let s = &m.setting;
        let rs = &s.weyl.rs;
        let delta = 1u16;
        let rd = r_delta(s, delta);
        // R(δ) is the long simple root: 2α₁+α₂ has δ(h(−1)) = −1
        let long = vec![rs.simple(1)];
        assert_eq!(rs.norms[long[0]], 4);
        assert_eq!(rd, long);
        for &a in &long {
            assert_eq!(m.step_one[delta as usize][s.v.index(s.v.root_n(a))], 0);
        }
        // brute force over all linear characters of V_δ: the admissible ones
        // are exactly those found, and all take value 1 on the long n_α(−1)
        let v = s.v.clone();
        let wd = w_delta(s, delta);
        let elems: Vec<usize> = wd.iter().flat_map(|&w| (0..4u16).map(move |b| (w, b)))
            .map(|(w, b)| v.index(ExtWeylElt { h: HElt { bits: b }, w })).collect();
        let parent: Arc<dyn FiniteGroup> = v.clone();
        let sub = Subgroup::from_elements(parent, elems);
        let mut admissible = 0;
        for chi in linear_characters(&sub) {
            let ext = v.h_elements().iter().all(|&h| {
                let x = sub.local(v.index(ExtWeylElt { h, w: 0 })).unwrap();
                Cyclotomic::zeta(chi.level, chi.exps[x] as i64) == Cyclotomic::from_int(h_char_value(delta, h))
            });
            let triv = long.iter().all(|&a| chi.exps[sub.local(v.index(v.root_n(a))).unwrap()] == 0);
            if ext && triv {
                admissible += 1;
            }
        }
        assert!(admissible >= 1);
    }

    #[test]
    fn g2_equivariance() {
        let m = map("G2", 5);
        assert!(m.check_v_equivariance());
        assert!(m.check_mu_rational());
        let m = map("C2", 3);
        assert!(m.check_v_equivariance());
    }

    #[test]
    fn lift_restricts_to_lambda() {
        let m = map("G2", 5);
        let s = m.setting.clone();
        let lam = TorusChar { exps: vec![1, 2] };
        let rel = s.rel_data(&lam).unwrap();
        let wl: HashSet<usize> = rel.w_lambda.iter().copied().collect();
        let l = m.value_level();
        for ti in 0..s.torus.order() {
            let t = s.torus.elt(ti);
            let e = m.lambda_exp(&lam, &wl, &NormalizerElt { t: t.clone(), w: 0 }).unwrap();
            assert_eq!(e, lam.eval_exp(&s.torus, &t) * (l / s.torus.char_level()));
        }
        assert!(m.check_n_equivariance(&lam, &rel.w_lambda));
        // an order-4 character: value at h·ẇ·t is λ(t)·λ(h)·Λ₀(ẇ)
        let lam4 = TorusChar { exps: vec![1, 0] };
        let rel4 = s.rel_data(&lam4).unwrap();
        let wl4: HashSet<usize> = rel4.w_lambda.iter().copied().collect();
        let n = crate::chevnorm::NGroup::new(s.v.clone(), s.torus.clone()).unwrap();
        let delta = m.restrict_to_h(&lam4);
        for &w in &rel4.w_lambda {
            for hb in 0..4u16 {
                let h = HElt { bits: hb };
                let t = s.torus.elt(3);
                let x = n.n_mult(&n.from_v(ExtWeylElt { h, w }), &n.from_t(t.clone()));
                let got = m.lambda_exp(&lam4, &wl4, &x).unwrap();
                // independent evaluation: Λ₀(h ẇ) λ(ẇ t ẇ⁻¹)
                let tw = s.torus.act(w, &t);
                let a = lam4.eval_exp(&s.torus, &tw) * (l / s.torus.char_level());
                let b = m.lambda0_exp(delta, ExtWeylElt { h, w }).unwrap() as u64 * (l / m.level);
                assert_eq!(got, (a + b) % l);
            }
        }
    }

    #[test]
    fn delta_properties_small() {
        let m = map("C2", 5);
        let s = m.setting.clone();
        let ps = crate::relweyl::enumerate_params(&s, 2).unwrap();
        for sigma in crate::cyclo::h_ell_generators(2, 8) {
            for o in &ps.orbits {
                let d = m.delta_sigma(&o.lambda, &o.rel, &sigma.base).unwrap();
                for (w, e) in d {
                    assert_eq!((2 * e as u64) % m.level, 0);
                    if o.rel.r_lambda.contains(&w) {
                        assert_eq!(e, 0);
                    }
                }
            }
        }
        let id = GaloisElt::identity(8);
        for o in &ps.orbits {
            assert!(m.delta_sigma(&o.lambda, &o.rel, &id).unwrap().iter().all(|&(_, e)| e == 0));
        }
    }

    #[test]
    fn element_c() {
        for q in [3, 5, 7] {
            let r = element_c_check(4, q).unwrap();
            assert!(r.passed(), "{r:?}");
            assert_eq!(r.expected_factor, if q == 5 { 1 } else { -1 });
        }
        assert!(element_c_check(8, 3).is_err());
    }
}
