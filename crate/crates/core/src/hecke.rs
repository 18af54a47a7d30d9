//! Iwahori–Hecke algebras of the reflection subgroups R(λ) ⊆ W, extended by
//! the complement C(λ), with their u ↦ q and u ↦ 1 specializations.
//!
//! Characters are computed once over F_Q[t]/(t^K) with u = 1 + t: central
//! idempotents come from Casimir elements, and character values are read
//! off the symmetrizing trace. Integer polynomial values in u then give
//! both specializations at once, which realizes the bijection between the
//! characters at u = q and at u = 1.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::charkit::{self, polyp, CharTable, Classes, ClassFunction, FiniteGroup, Subgroup};
use crate::cyclo::{Cyclotomic, GaloisElt};
use crate::relweyl::RelWeylData;
use crate::rootsys::WeylGroup;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeckeError {
    #[error("not a Coxeter subgroup setup: {0}")]
    BadInput(String),
    #[error("central idempotents could not be separated")]
    Splitting,
    #[error("character degree not recovered")]
    Degree,
    #[error("generic and group character tables disagree")]
    Mismatch,
}

/// Modulus for the deformation computation.
pub const HQ: u64 = (1u64 << 61) - 1;

fn mq(a: u64, b: u64) -> u64 {
    let p = a as u128 * b as u128;
    let mut s = (p as u64 & HQ) + (p >> 61) as u64;
    while s >= HQ {
        s -= HQ;
    }
    s
}

fn aq(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= HQ {
        s - HQ
    } else {
        s
    }
}

fn sq(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + HQ - b
    }
}

fn invq(a: u64) -> u64 {
    charkit::powm(a, HQ - 2, HQ)
}

fn lift_sym(x: u64) -> i64 {
    if x > HQ / 2 {
        -((HQ - x) as i64)
    } else {
        x as i64
    }
}

/// Truncated power series over F_Q, all of length K.
mod ser {
    use super::{aq, invq, mq, sq};

    pub fn mul(a: &[u64], b: &[u64]) -> Vec<u64> {
        let k = a.len();
        let mut out = vec![0u64; k];
        for i in 0..k {
            if a[i] == 0 {
                continue;
            }
            for j in 0..k - i {
                out[i + j] = aq(out[i + j], mq(a[i], b[j]));
            }
        }
        out
    }

    pub fn inv(a: &[u64]) -> Vec<u64> {
        let k = a.len();
        let mut out = vec![0u64; k];
        let i0 = invq(a[0]);
        out[0] = i0;
        for n in 1..k {
            let mut s = 0u64;
            for j in 1..=n {
                s = aq(s, mq(a[j], out[n - j]));
            }
            out[n] = mq(sq(0, s), i0);
        }
        out
    }

    pub fn add(a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| aq(x, y)).collect()
    }

    pub fn sub(a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).map(|(&x, &y)| sq(x, y)).collect()
    }

    pub fn scalar(c: u64, k: usize) -> Vec<u64> {
        let mut v = vec![0u64; k];
        v[0] = c;
        v
    }
}

// ---------------------------------------------------------------------------
// Coxeter data of R ⋊ C inside W

/// The algebra H(R) ⋊ C with basis a_r·c, realized inside W.
#[derive(Debug)]
pub struct HeckeModel {
    pub weyl: Arc<WeylGroup>,
    pub r_elems: Vec<usize>,
    pub c_elems: Vec<usize>,
    /// Coxeter generators of R as W elements
    pub gens: Vec<usize>,
    pub len: Vec<usize>,
    pub max_len: usize,
    r_pos: HashMap<usize, usize>,
    rmul: Vec<Vec<usize>>,
    lmul: Vec<Vec<usize>>,
    r_inv: Vec<usize>,
    c_conj: Vec<Vec<usize>>,
    c_conj_gen: Vec<Vec<usize>>,
    c_mul: Vec<Vec<usize>>,
    c_inv: Vec<usize>,
    /// reduced words in generator indices
    pub words: Vec<Vec<usize>>,
}

impl HeckeModel {
    pub fn new(
        weyl: Arc<WeylGroup>,
        gens: Vec<usize>,
        c_elems: Vec<usize>,
    ) -> Result<Self, HeckeError> {
        // BFS over the Cayley graph gives lengths and reduced words
        let mut r_elems = vec![0usize];
        let mut r_pos: HashMap<usize, usize> = [(0usize, 0usize)].into_iter().collect();
        let mut len = vec![0usize];
        let mut words = vec![vec![]];
        let mut k = 0;
        while k < r_elems.len() {
            let x = r_elems[k];
            for (si, &s) in gens.iter().enumerate() {
                let y = weyl.mul(x, s);
                if let std::collections::hash_map::Entry::Vacant(e) = r_pos.entry(y) {
                    e.insert(r_elems.len());
                    r_elems.push(y);
                    len.push(len[k] + 1);
                    let mut w = words[k].clone();
                    w.push(si);
                    words.push(w);
                }
            }
            k += 1;
        }
        let nr = r_elems.len();
        let max_len = *len.iter().max().unwrap();
        let rmul: Vec<Vec<usize>> =
            (0..nr).map(|r| gens.iter().map(|&s| r_pos[&weyl.mul(r_elems[r], s)]).collect()).collect();
        let lmul: Vec<Vec<usize>> =
            gens.iter().map(|&s| (0..nr).map(|r| r_pos[&weyl.mul(s, r_elems[r])]).collect()).collect();
        let r_inv: Vec<usize> = (0..nr).map(|r| r_pos[&weyl.inv(r_elems[r])]).collect();
        let c_pos: HashMap<usize, usize> = c_elems.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        if c_pos.get(&0) != Some(&0) {
            return Err(HeckeError::BadInput("complement must list the identity first".into()));
        }
        let gen_pos: HashMap<usize, usize> = gens.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let mut c_conj = Vec::new();
        let mut c_conj_gen = Vec::new();
        for &c in &c_elems {
            let ci = weyl.inv(c);
            let conj = |x: usize| weyl.mul(weyl.mul(c, x), ci);
            let row: Option<Vec<usize>> = r_elems.iter().map(|&r| r_pos.get(&conj(r)).copied()).collect();
            let grow: Option<Vec<usize>> = gens.iter().map(|&s| gen_pos.get(&conj(s)).copied()).collect();
            match (row, grow) {
                (Some(a), Some(b)) => {
                    c_conj.push(a);
                    c_conj_gen.push(b);
                }
                _ => return Err(HeckeError::BadInput("complement does not normalize the Coxeter system".into())),
            }
        }
        let c_mul: Vec<Vec<usize>> = c_elems
            .iter()
            .map(|&a| {
                c_elems.iter().map(|&b| c_pos.get(&weyl.mul(a, b)).copied()).collect::<Option<Vec<_>>>()
            })
            .collect::<Option<_>>()
            .ok_or_else(|| HeckeError::BadInput("complement is not a group".into()))?;
        let c_inv: Vec<usize> = c_elems.iter().map(|&c| c_pos[&weyl.inv(c)]).collect();
        for &c in &c_elems {
            if c != 0 && r_pos.contains_key(&c) {
                return Err(HeckeError::BadInput("complement meets R".into()));
            }
        }
        Ok(HeckeModel {
            weyl,
            r_elems,
            c_elems,
            gens,
            len,
            max_len,
            r_pos,
            rmul,
            lmul,
            r_inv,
            c_conj,
            c_conj_gen,
            c_mul,
            c_inv,
            words,
        })
    }

    /// H(R(λ)) ⋊ C(λ).
    pub fn from_rel(weyl: Arc<WeylGroup>, rel: &RelWeylData) -> Result<Self, HeckeError> {
        Self::new(weyl, rel.r_gens.clone(), rel.c_lambda.clone())
    }

    /// H(R(λ)) ⋊ C′ for a subgroup C′ ⊆ C(λ).
    pub fn with_complement(&self, c_elems: Vec<usize>) -> Result<Self, HeckeError> {
        Self::new(self.weyl.clone(), self.gens.clone(), c_elems)
    }

    pub fn dim(&self) -> usize {
        self.r_elems.len() * self.c_elems.len()
    }

    pub fn nr(&self) -> usize {
        self.r_elems.len()
    }

    pub fn nc(&self) -> usize {
        self.c_elems.len()
    }

    pub fn idx(&self, r: usize, c: usize) -> usize {
        r * self.c_elems.len() + c
    }

    /// Basis index of the group element r·c ∈ W.
    pub fn basis_of(&self, g: usize) -> Option<usize> {
        for (ci, &c) in self.c_elems.iter().enumerate() {
            let r = self.weyl.mul(g, self.weyl.inv(c));
            if let Some(&ri) = self.r_pos.get(&r) {
                return Some(self.idx(ri, ci));
            }
        }
        None
    }

    /// W element of a basis index.
    pub fn group_elt(&self, b: usize) -> usize {
        let (r, c) = (b / self.nc(), b % self.nc());
        self.weyl.mul(self.r_elems[r], self.c_elems[c])
    }

    /// The group R ⋊ C as a subgroup of W.
    pub fn group(&self) -> Subgroup {
        let parent: Arc<dyn FiniteGroup> = self.weyl.clone();
        Subgroup::from_elements(parent, (0..self.dim()).map(|b| self.group_elt(b)).collect())
    }

    /// Basis index of the dual element (a_r c)^∨ up to the factor u^{−l(r)}:
    /// c⁻¹ a_{r⁻¹} = a_{c⁻¹ r⁻¹ c} c⁻¹.
    pub fn dual_index(&self, b: usize) -> usize {
        let (r, c) = (b / self.nc(), b % self.nc());
        let ci = self.c_inv[c];
        self.idx(self.c_conj[ci][self.r_inv[r]], ci)
    }

    /// Conjugate d·(a_r c)·d⁻¹ for d ∈ C (local index).
    pub fn conj_by_c(&self, d: usize, b: usize) -> usize {
        let (r, c) = (b / self.nc(), b % self.nc());
        self.idx(self.c_conj[d][r], self.c_mul[self.c_mul[d][c]][self.c_inv[d]])
    }

    // ---- series-vector operations (n·K flattened)

    fn right_gen(&self, v: &[u64], s: usize, k: usize) -> Vec<u64> {
        let nc = self.nc();
        let mut out = vec![0u64; v.len()];
        for b in 0..self.dim() {
            let x = &v[b * k..(b + 1) * k];
            if x.iter().all(|&e| e == 0) {
                continue;
            }
            let (r, c) = (b / nc, b % nc);
            let s2 = self.c_conj_gen[c][s];
            let rs = self.rmul[r][s2];
            let tgt = rs * nc + c;
            if self.len[rs] > self.len[r] {
                for i in 0..k {
                    out[tgt * k + i] = aq(out[tgt * k + i], x[i]);
                }
            } else {
                // u·x on a_{rs}, t·x on a_r
                for i in 0..k {
                    out[tgt * k + i] = aq(out[tgt * k + i], x[i]);
                    if i + 1 < k {
                        out[tgt * k + i + 1] = aq(out[tgt * k + i + 1], x[i]);
                        out[b * k + i + 1] = aq(out[b * k + i + 1], x[i]);
                    }
                }
            }
        }
        out
    }

    fn left_gen(&self, v: &[u64], s: usize, k: usize) -> Vec<u64> {
        let nc = self.nc();
        let mut out = vec![0u64; v.len()];
        for b in 0..self.dim() {
            let x = &v[b * k..(b + 1) * k];
            if x.iter().all(|&e| e == 0) {
                continue;
            }
            let (r, c) = (b / nc, b % nc);
            let sr = self.lmul[s][r];
            let tgt = sr * nc + c;
            if self.len[sr] > self.len[r] {
                for i in 0..k {
                    out[tgt * k + i] = aq(out[tgt * k + i], x[i]);
                }
            } else {
                for i in 0..k {
                    out[tgt * k + i] = aq(out[tgt * k + i], x[i]);
                    if i + 1 < k {
                        out[tgt * k + i + 1] = aq(out[tgt * k + i + 1], x[i]);
                        out[b * k + i + 1] = aq(out[b * k + i + 1], x[i]);
                    }
                }
            }
        }
        out
    }

    fn left_c(&self, v: &[u64], d: usize, k: usize) -> Vec<u64> {
        let nc = self.nc();
        let mut out = vec![0u64; v.len()];
        for b in 0..self.dim() {
            let (r, c) = (b / nc, b % nc);
            let tgt = self.c_conj[d][r] * nc + self.c_mul[d][c];
            out[tgt * k..(tgt + 1) * k].copy_from_slice(&v[b * k..(b + 1) * k]);
        }
        out
    }

    fn conj_c(&self, v: &[u64], d: usize, k: usize) -> Vec<u64> {
        let mut out = vec![0u64; v.len()];
        for b in 0..self.dim() {
            let tgt = self.conj_by_c(d, b);
            out[tgt * k..(tgt + 1) * k].copy_from_slice(&v[b * k..(b + 1) * k]);
        }
        out
    }

    /// a_r c · v.
    fn left_basis(&self, v: &[u64], b: usize, k: usize) -> Vec<u64> {
        let (r, c) = (b / self.nc(), b % self.nc());
        let mut x = self.left_c(v, c, k);
        for &s in self.words[r].iter().rev() {
            x = self.left_gen(&x, s, k);
        }
        x
    }

    /// u^L Σ_b b·y·b^∨, a central element.
    fn casimir(&self, y: &[u64], k: usize) -> Vec<u64> {
        let n = self.dim();
        let mut ysum = vec![0u64; n * k];
        for d in 0..self.nc() {
            let yc = self.conj_c(y, d, k);
            for (a, b) in ysum.iter_mut().zip(&yc) {
                *a = aq(*a, *b);
            }
        }
        let l = self.max_len;
        let mut layers: Vec<Vec<u64>> = vec![vec![0u64; n * k]; l + 1];
        let mut prev: HashMap<usize, Vec<u64>> = HashMap::new();
        prev.insert(0, ysum.clone());
        layers[0] = ysum;
        for len in 1..=l {
            let mut cur: HashMap<usize, Vec<u64>> = HashMap::new();
            for r in 0..self.nr() {
                if self.len[r] != len {
                    continue;
                }
                let s = self.words[r][0];
                let rest = self.lmul[s][r];
                let x = self.left_gen(&self.right_gen(&prev[&rest], s, k), s, k);
                for (a, b) in layers[len].iter_mut().zip(&x) {
                    *a = aq(*a, *b);
                }
                cur.insert(r, x);
            }
            prev = cur;
        }
        // Horner: Σ_j u^{L−j} S_j
        let mut acc = layers[0].clone();
        for layer in layers.iter().skip(1) {
            let mut next = layer.clone();
            for b in 0..n {
                for i in 0..k {
                    let mut v = acc[b * k + i];
                    if i > 0 {
                        v = aq(v, acc[b * k + i - 1]);
                    }
                    next[b * k + i] = aq(next[b * k + i], v);
                }
            }
            acc = next;
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// characters

/// One character of the generic algebra.
#[derive(Clone, Debug)]
pub struct HeckeCharacter {
    pub degree: i64,
    /// values on the basis T_r T̃_c (T̃_c involutive) as series in
    /// t = u − 1 modulo HQ
    pub series: Vec<Vec<u64>>,
    /// values on T_r T̃_c times u^{⌈l(c)/2⌉}, written a + b√u with
    /// a, b ∈ Z[t]: the a-part, when such a decomposition exists
    pub coeffs: Option<Vec<Vec<i64>>>,
    /// the b-part; None when every value is a polynomial in u
    pub root_coeffs: Option<Vec<Vec<i64>>>,
}

impl HeckeCharacter {
    /// Values at u = 1.
    pub fn g_values(&self) -> Vec<i64> {
        self.series.iter().map(|s| lift_sym(s[0])).collect()
    }

    /// Scaled values at u = q (None when not polynomial in u).
    pub fn f_values(&self, q: u64) -> Option<Vec<BigInt>> {
        if self.root_coeffs.is_some() {
            return None;
        }
        self.coeffs.as_ref().map(|cs| cs.iter().map(|c| eval_t(c, q)).collect())
    }

    /// Values at u = q as pairs (a, b) standing for a + b√q.
    pub fn f_values_root(&self, q: u64) -> Option<Vec<(BigInt, BigInt)>> {
        let a = self.coeffs.as_ref()?;
        Some(
            a.iter()
                .enumerate()
                .map(|(i, c)| {
                    let b = self.root_coeffs.as_ref().map_or(BigInt::zero(), |r| eval_t(&r[i], q));
                    (eval_t(c, q), b)
                })
                .collect(),
        )
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.is_some() && self.root_coeffs.is_none()
    }

    /// Values lie in Z[u, √u].
    pub fn is_split(&self) -> bool {
        self.coeffs.is_some()
    }
}

/// The complete set of characters of one algebra.
#[derive(Debug)]
pub struct HeckeChars {
    pub model: Arc<HeckeModel>,
    pub chars: Vec<HeckeCharacter>,
    pub precision: usize,
}

/// Power of u clearing denominators of values on T_r T̃_c.
fn c_shift(model: &HeckeModel, c: usize) -> usize {
    (model.weyl.length(c) as usize).div_ceil(2)
}

fn eval_t(c: &[i64], q: u64) -> BigInt {
    let t = BigInt::from(q as i64 - 1);
    c.iter().rev().fold(BigInt::zero(), |acc, &x| acc * &t + BigInt::from(x))
}

/// Solve a·x = b over F_HQ; None when singular.
fn solve_mod(mut a: Vec<Vec<u64>>, mut b: Vec<u64>) -> Option<Vec<u64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).find(|&r| a[r][c] != 0)?;
        a.swap(c, p);
        b.swap(c, p);
        let inv = invq(a[c][c]);
        for j in c..n {
            a[c][j] = mq(a[c][j], inv);
        }
        b[c] = mq(b[c], inv);
        for r in 0..n {
            if r != c && a[r][c] != 0 {
                let f = a[r][c];
                for j in c..n {
                    a[r][j] = sq(a[r][j], mq(f, a[c][j]));
                }
                b[r] = sq(b[r], mq(f, b[c]));
            }
        }
    }
    Some(b)
}

/// Write a series as a + b·√(1+t) with a, b of degree ≤ deg and small
/// integer coefficients. Unique once the series has more than 2·deg + 1
/// terms, since 1+t is not a square.
fn split_root(s: &[u64], deg: usize, root: &[u64]) -> Option<(Vec<i64>, Vec<i64>)> {
    let m = deg + 1;
    if s.len() < 2 * m + 1 {
        return None;
    }
    let row = |j: usize| -> Vec<u64> {
        (0..2 * m).map(|i| if i < m { u64::from(i == j) } else if j >= i - m { root[j - (i - m)] } else { 0 }).collect()
    };
    let x = solve_mod((0..2 * m).map(row).collect(), s[..2 * m].to_vec())?;
    // the remaining terms must agree
    for (j, &sj) in s.iter().enumerate().skip(2 * m) {
        let r = row(j);
        let v = r.iter().zip(&x).fold(0, |acc, (&c, &y)| aq(acc, mq(c, y)));
        if v != sj {
            return None;
        }
    }
    let small = |v: &u64| lift_sym(*v).unsigned_abs() < 1 << 40;
    if !x.iter().all(small) {
        return None;
    }
    let a = x[..m].iter().map(|&v| lift_sym(v)).collect();
    let b = x[m..].iter().map(|&v| lift_sym(v)).collect();
    Some((a, b))
}

/// (1+t)^{m/2} for m = 0..=max as truncated series.
fn sqrt_one_plus_t_powers(max: u32, k: usize) -> Vec<Vec<u64>> {
    let two_inv = invq(2);
    let mut root = vec![0u64; k];
    root[0] = 1;
    // binom(1/2, j) = binom(1/2, j−1)·(1/2 − j + 1)/j
    for j in 1..k {
        let num = sq(two_inv, (j as u64 - 1) % HQ);
        root[j] = mq(mq(root[j - 1], num), invq(j as u64));
    }
    let mut out = vec![ser::scalar(1, k)];
    for m in 1..=max as usize {
        let next = ser::mul(&out[m - 1], &root);
        out.push(next);
    }
    out
}

fn lcg(seed: &mut u64) -> u64 {
    *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (*seed >> 3) % HQ
}

impl HeckeChars {
    pub fn compute(model: Arc<HeckeModel>) -> Result<Self, HeckeError> {
        let h = Self::compute_at(model.clone(), false)?;
        if h.chars.iter().all(|c| c.coeffs.is_some()) {
            return Ok(h);
        }
        // values involving √u need twice the precision to separate
        Self::compute_at(model, true)
    }

    fn compute_at(model: Arc<HeckeModel>, wide: bool) -> Result<Self, HeckeError> {
        // T̃_c is involutive; values on T_r T̃_c are read off after scaling
        // by u^{shift(c)} to clear denominators
        let shift: Vec<usize> = model.c_elems.iter().map(|&c| c_shift(&model, c)).collect();
        let extra = shift.iter().copied().max().unwrap_or(0);
        let deg_bound = model.max_len + extra;
        let k = if wide { 2 * deg_bound + 4 } else { deg_bound + 3 };
        let half_pows = sqrt_one_plus_t_powers(2 * extra.max(1) as u32, k);
        let root = half_pows[1].clone();
        let n = model.dim();
        let group = model.group();
        let cl = Classes::compute(&group);
        let nk = cl.len();
        let reps: Vec<usize> = cl.reps.iter().map(|&x| model.basis_of(group.elems[x]).unwrap()).collect();
        let unit = |b: usize| -> Vec<u64> {
            let mut v = vec![0u64; n * k];
            v[b * k] = 1;
            v
        };
        let z: Vec<Vec<u64>> = reps.iter().map(|&b| model.casimir(&unit(b), k)).collect();
        // coordinates of central elements against z, read at the class representatives
        let bmat: Vec<Vec<Vec<u64>>> = (0..nk)
            .map(|m| (0..nk).map(|i| z[i][reps[m] * k..(reps[m] + 1) * k].to_vec()).collect())
            .collect();
        let binv = series_matrix_inverse(&bmat, k).ok_or(HeckeError::Splitting)?;
        let coords = |x: &[u64]| -> Vec<Vec<u64>> {
            let rhs: Vec<Vec<u64>> = reps.iter().map(|&b| x[b * k..(b + 1) * k].to_vec()).collect();
            series_mat_vec(&binv, &rhs)
        };
        let one_coords = coords(&unit(0));
        let mut seed = 0x9E3779B97F4A7C15u64 ^ n as u64;
        for _attempt in 0..8 {
            let rnd: Vec<u64> = (0..nk).map(|_| lcg(&mut seed)).collect();
            // matrix of multiplication by Z = Σ r_i z_i on the center
            let mut mcols: Vec<Vec<Vec<u64>>> = Vec::with_capacity(nk);
            for zj in &z {
                let mut p = vec![0u64; n * k];
                for (i, &b) in reps.iter().enumerate() {
                    let x = model.left_basis(zj, b, k);
                    for (a, v) in p.iter_mut().zip(&x) {
                        *a = aq(*a, mq(rnd[i], *v));
                    }
                }
                mcols.push(coords(&model.casimir(&p, k)));
            }
            let m: Vec<Vec<Vec<u64>>> = (0..nk).map(|r| (0..nk).map(|c| mcols[c][r].clone()).collect()).collect();
            let m0: Vec<Vec<u64>> = m.iter().map(|row| row.iter().map(|s| s[0]).collect()).collect();
            let cp = charkit::charpoly_mod(&m0, HQ);
            let roots0 = polyp::roots(&cp, HQ);
            if roots0.len() != nk {
                continue;
            }
            let omegas = lift_eigenvalues(&m, &roots0, k);
            let mut chars = Vec::with_capacity(nk);
            let mut total = vec![0u64; n * k];
            for (ci, om) in omegas.iter().enumerate() {
                // e_χ = Π_{ψ≠χ} (Z − ω_ψ)/(ω_χ − ω_ψ) applied to 1
                let mut v = one_coords.clone();
                for (pi, op) in omegas.iter().enumerate() {
                    if pi == ci {
                        continue;
                    }
                    let mv = series_mat_vec(&m, &v);
                    let denom = ser::inv(&ser::sub(om, op));
                    v = mv.iter().zip(&v).map(|(a, b)| ser::mul(&ser::sub(a, &ser::mul(op, b)), &denom)).collect();
                }
                let mut e = vec![0u64; n * k];
                for (i, c) in v.iter().enumerate() {
                    for b in 0..n {
                        let zs = &z[i][b * k..(b + 1) * k];
                        if zs.iter().all(|&x| x == 0) {
                            continue;
                        }
                        let prod = ser::mul(c, zs);
                        for j in 0..k {
                            e[b * k + j] = aq(e[b * k + j], prod[j]);
                        }
                    }
                }
                for (a, b) in total.iter_mut().zip(&e) {
                    *a = aq(*a, *b);
                }
                // degree from the t = 0 coefficient: d² = |G|·[1]e
                let d2 = mq(n as u64 % HQ, e[0]);
                let d = (1..=(n as f64).sqrt() as u64 + 1).find(|&d| d * d % HQ == d2).ok_or(HeckeError::Degree)?;
                let tau_inv = ser::inv(&e[0..k]);
                let mut upow = vec![ser::scalar(1, k)];
                for i in 1..=model.max_len {
                    let prev = &upow[i - 1];
                    let mut nx = prev.clone();
                    for j in 1..k {
                        nx[j] = aq(nx[j], prev[j - 1]);
                    }
                    upow.push(nx);
                }
                let mut series = Vec::with_capacity(n);
                for b in 0..n {
                    let r = b / model.nc();
                    let di = model.dual_index(b);
                    let ev = &e[di * k..(di + 1) * k];
                    let val = ser::mul(&ser::mul(ev, &tau_inv), &upow[model.len[r]]);
                    series.push(val.iter().map(|&x| mq(x, d)).collect::<Vec<u64>>());
                }
                // integral values stay far below HQ; large lifts mean irrational values
                let small = |x: u64| lift_sym(x).unsigned_abs() < 1 << 40;
                let scaled: Vec<Vec<u64>> = series
                    .iter()
                    .enumerate()
                    .map(|(b, s)| ser::mul(s, &half_pows[2 * shift[b % model.nc()]]))
                    .collect();
                let polynomial = scaled.iter().all(|s| {
                    s[deg_bound + 1..].iter().all(|&x| x == 0)
                        && s.iter().all(|&x| small(x))
                        && lift_sym(s[0]).unsigned_abs() <= n as u64
                });
                let (coeffs, root_coeffs) = if polynomial {
                    let a = scaled.iter().map(|s| s[..=deg_bound].iter().map(|&x| lift_sym(x)).collect()).collect();
                    (Some(a), None)
                } else if wide {
                    let parts: Option<Vec<(Vec<i64>, Vec<i64>)>> =
                        scaled.iter().map(|s| split_root(s, deg_bound, &root)).collect();
                    match parts {
                        Some(p) => {
                            let (a, b): (Vec<_>, Vec<_>) = p.into_iter().unzip();
                            (Some(a), Some(b))
                        }
                        None => (None, None),
                    }
                } else {
                    (None, None)
                };
                chars.push(HeckeCharacter { degree: d as i64, series, coeffs, root_coeffs });
            }
            if total != unit(0) {
                return Err(HeckeError::Splitting);
            }
            chars.sort_by(|a, b| a.degree.cmp(&b.degree).then_with(|| a.g_values().cmp(&b.g_values())));
            return Ok(HeckeChars { model, chars, precision: k });
        }
        Err(HeckeError::Splitting)
    }

    /// Memoized computation keyed by generators and complement.
    pub fn cached(model: HeckeModel) -> Result<Arc<HeckeChars>, HeckeError> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, Vec<usize>, Vec<usize>), Arc<HeckeChars>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (Arc::as_ptr(&model.weyl) as usize, model.gens.clone(), model.c_elems.clone());
        if let Some(h) = cache.lock().unwrap().get(&key) {
            return Ok(h.clone());
        }
        let h = Arc::new(HeckeChars::compute(Arc::new(model))?);
        cache.lock().unwrap().insert(key, h.clone());
        Ok(h)
    }

    pub fn all_rational(&self) -> bool {
        self.chars.iter().all(|c| c.is_rational())
    }

    pub fn all_split(&self) -> bool {
        self.chars.iter().all(|c| c.is_split())
    }

    /// The pairing f ↔ g: index of the group character each generic
    /// character specializes to at u = 1, against a table of R ⋊ C.
    pub fn f_bijection(&self, table: &CharTable, group: &Subgroup) -> Result<Vec<usize>, HeckeError> {
        let cl = &table.classes;
        let mut out = Vec::with_capacity(self.chars.len());
        for ch in &self.chars {
            let g = ch.g_values();
            let vals: Vec<Cyclotomic> = cl
                .reps
                .iter()
                .map(|&x| Cyclotomic::from_int(g[self.model.basis_of(group.elems[x]).unwrap()]))
                .collect();
            let pos = table.irr.iter().position(|row| row.values == vals).ok_or(HeckeError::Mismatch)?;
            out.push(pos);
        }
        let distinct: HashSet<usize> = out.iter().copied().collect();
        if distinct.len() != out.len() || out.len() != table.irr.len() {
            return Err(HeckeError::Mismatch);
        }
        Ok(out)
    }

    /// Schur elements at u = q: c_χ = Σ_b χ(b) χ(b^∨) / χ(1), with the
    /// off-diagonal sums required to vanish.
    pub fn schur_elements(&self, q: u64) -> Option<Vec<BigRational>> {
        let m = &self.model;
        let vals: Vec<Vec<BigInt>> = self.chars.iter().map(|c| c.f_values(q)).collect::<Option<_>>()?;
        let qb = BigInt::from(q);
        let n = m.dim();
        let weights: Vec<BigRational> =
            (0..n)
                .map(|b| {
                    let l = m.len[b / m.nc()] as u32 + 2 * c_shift(m, m.c_elems[b % m.nc()]) as u32;
                    BigRational::new(BigInt::one(), qb.pow(l))
                })
                .collect();
        let pair = |x: &[BigInt], y: &[BigInt]| -> BigRational {
            let mut s = BigRational::zero();
            for b in 0..n {
                let t = &x[b] * &y[m.dual_index(b)];
                if !t.is_zero() {
                    s += BigRational::from_integer(t) * &weights[b];
                }
            }
            s
        };
        let mut out = Vec::new();
        for i in 0..vals.len() {
            for j in 0..vals.len() {
                let p = pair(&vals[i], &vals[j]);
                if i != j && !p.is_zero() {
                    return None;
                }
                if i == j {
                    out.push(p / BigRational::from_integer(BigInt::from(self.chars[i].degree)));
                }
            }
        }
        Some(out)
    }
}

/// Inverse of a square matrix over F_Q[[t]] (unit pivots at t = 0).
fn series_matrix_inverse(a: &[Vec<Vec<u64>>], k: usize) -> Option<Vec<Vec<Vec<u64>>>> {
    let n = a.len();
    let mut m: Vec<Vec<Vec<u64>>> = a.to_vec();
    let mut inv: Vec<Vec<Vec<u64>>> =
        (0..n).map(|i| (0..n).map(|j| ser::scalar(u64::from(i == j), k)).collect()).collect();
    for c in 0..n {
        let p = (c..n).find(|&r| m[r][c][0] != 0)?;
        m.swap(c, p);
        inv.swap(c, p);
        let pinv = ser::inv(&m[c][c]);
        m[c] = m[c].iter().map(|x| ser::mul(x, &pinv)).collect();
        inv[c] = inv[c].iter().map(|x| ser::mul(x, &pinv)).collect();
        for r in 0..n {
            if r == c || m[r][c].iter().all(|&x| x == 0) {
                continue;
            }
            let f = m[r][c].clone();
            for j in 0..n {
                let t = ser::mul(&f, &m[c][j]);
                m[r][j] = ser::sub(&m[r][j], &t);
                let t = ser::mul(&f, &inv[c][j]);
                inv[r][j] = ser::sub(&inv[r][j], &t);
            }
        }
    }
    Some(inv)
}

fn series_mat_vec(m: &[Vec<Vec<u64>>], v: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let k = v[0].len();
    m.iter()
        .map(|row| {
            let mut acc = vec![0u64; k];
            for (a, b) in row.iter().zip(v) {
                acc = ser::add(&acc, &ser::mul(a, b));
            }
            acc
        })
        .collect()
}

/// Hensel-lifts the simple eigenvalues of a series matrix from t = 0.
fn lift_eigenvalues(m: &[Vec<Vec<u64>>], roots0: &[u64], k: usize) -> Vec<Vec<u64>> {
    let n = m.len();
    // power sums p_j = tr(M^j), then the characteristic polynomial by Newton's identities
    let mut pw: Vec<Vec<Vec<u64>>> = m.to_vec();
    let mut psums = Vec::with_capacity(n);
    for j in 1..=n {
        if j > 1 {
            let mut nx = vec![vec![vec![0u64; k]; n]; n];
            for (r, row) in nx.iter_mut().enumerate() {
                for (c, slot) in row.iter_mut().enumerate() {
                    let mut acc = vec![0u64; k];
                    for t in 0..n {
                        acc = ser::add(&acc, &ser::mul(&pw[r][t], &m[t][c]));
                    }
                    *slot = acc;
                }
            }
            pw = nx;
        }
        let mut tr = vec![0u64; k];
        for (i, row) in pw.iter().enumerate() {
            tr = ser::add(&tr, &row[i]);
        }
        psums.push(tr);
    }
    // e_0 = 1, j e_j = Σ_{i=1..j} (−1)^{i−1} e_{j−i} p_i
    let mut e: Vec<Vec<u64>> = vec![ser::scalar(1, k)];
    for j in 1..=n {
        let mut acc = vec![0u64; k];
        for i in 1..=j {
            let t = ser::mul(&e[j - i], &psums[i - 1]);
            acc = if i % 2 == 1 { ser::add(&acc, &t) } else { ser::sub(&acc, &t) };
        }
        let ij = invq(j as u64);
        e.push(acc.iter().map(|&x| mq(x, ij)).collect());
    }
    // P(x) = Σ_j (−1)^j e_j x^{n−j}
    let coef: Vec<Vec<u64>> = (0..=n)
        .map(|j| if j % 2 == 0 { e[j].clone() } else { ser::sub(&vec![0; k], &e[j]) })
        .collect();
    let eval = |x: &[u64]| -> (Vec<u64>, Vec<u64>) {
        let mut p = vec![0u64; k];
        let mut dp = vec![0u64; k];
        for (j, c) in coef.iter().enumerate() {
            // Horner on both P and P'
            dp = ser::add(&ser::mul(&dp, x), &p);
            p = ser::add(&ser::mul(&p, x), c);
            let _ = j;
        }
        (p, dp)
    };
    roots0
        .iter()
        .map(|&r0| {
            let mut x = ser::scalar(r0, k);
            let mut steps = 1;
            while steps < 2 * k {
                let (p, dp) = eval(&x);
                x = ser::sub(&x, &ser::mul(&p, &ser::inv(&dp)));
                steps *= 2;
            }
            x
        })
        .collect()
}

// ---------------------------------------------------------------------------
// symbolic generic algebra

/// Integer Laurent polynomial in several parameters.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    pub terms: BTreeMap<Vec<i32>, i128>,
}

impl LaurentPoly {
    pub fn constant(nvars: usize, c: i128) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(vec![0; nvars], c);
        }
        LaurentPoly { terms }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        LaurentPoly { terms: [(e, 1)].into_iter().collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut t = self.terms.clone();
        for (k, v) in &o.terms {
            let e = t.entry(k.clone()).or_insert(0);
            *e += v;
            if *e == 0 {
                t.remove(k);
            }
        }
        LaurentPoly { terms: t }
    }

    pub fn neg(&self) -> Self {
        LaurentPoly { terms: self.terms.iter().map(|(k, v)| (k.clone(), -v)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut t: BTreeMap<Vec<i32>, i128> = BTreeMap::new();
        for (a, x) in &self.terms {
            for (b, y) in &o.terms {
                let k: Vec<i32> = a.iter().zip(b).map(|(p, q)| p + q).collect();
                *t.entry(k).or_insert(0) += x * y;
            }
        }
        t.retain(|_, v| *v != 0);
        LaurentPoly { terms: t }
    }

    /// Evaluation with every parameter sent to the given values.
    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        let mut s = BigRational::zero();
        for (e, c) in &self.terms {
            let mut term = BigRational::from_integer(BigInt::from(*c));
            for (x, &k) in point.iter().zip(e) {
                let p = x.pow(k.abs());
                term *= if k < 0 { p.recip() } else { p };
            }
            s += term;
        }
        s
    }
}

/// The generic algebra H₀ of R with one parameter per W(λ)-class of
/// Coxeter generators, in the regular representation.
#[derive(Debug)]
pub struct GenericHecke {
    pub model: Arc<HeckeModel>,
    pub var_of_gen: Vec<usize>,
    pub nvars: usize,
}

type PolyVec = Vec<LaurentPoly>;

impl GenericHecke {
    /// Parameters are equal on generators conjugate under `w_lambda`.
    pub fn build_h0(model: Arc<HeckeModel>, w_lambda: &[usize]) -> Self {
        let weyl = &model.weyl;
        let ng = model.gens.len();
        let mut var_of_gen = vec![usize::MAX; ng];
        let mut nvars = 0;
        for i in 0..ng {
            if var_of_gen[i] != usize::MAX {
                continue;
            }
            for j in i..ng {
                let conj = w_lambda.iter().any(|&w| {
                    weyl.mul(weyl.mul(w, model.gens[i]), weyl.inv(w)) == model.gens[j]
                });
                if conj && var_of_gen[j] == usize::MAX {
                    var_of_gen[j] = nvars;
                }
            }
            nvars += 1;
        }
        GenericHecke { model, var_of_gen, nvars }
    }

    fn u(&self, s: usize) -> LaurentPoly {
        LaurentPoly::var(self.nvars, self.var_of_gen[s])
    }

    fn basis(&self, r: usize) -> PolyVec {
        let mut v = vec![LaurentPoly::default(); self.model.nr()];
        v[r] = LaurentPoly::constant(self.nvars, 1);
        v
    }

    pub fn right_gen(&self, v: &PolyVec, s: usize) -> PolyVec {
        let m = &self.model;
        let mut out = vec![LaurentPoly::default(); m.nr()];
        let u = self.u(s);
        let um1 = u.sub(&LaurentPoly::constant(self.nvars, 1));
        for (r, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let rs = m.rmul[r][s];
            if m.len[rs] > m.len[r] {
                out[rs] = out[rs].add(x);
            } else {
                out[rs] = out[rs].add(&u.mul(x));
                out[r] = out[r].add(&um1.mul(x));
            }
        }
        out
    }

    pub fn left_gen(&self, v: &PolyVec, s: usize) -> PolyVec {
        let m = &self.model;
        let mut out = vec![LaurentPoly::default(); m.nr()];
        let u = self.u(s);
        let um1 = u.sub(&LaurentPoly::constant(self.nvars, 1));
        for (r, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let sr = m.lmul[s][r];
            if m.len[sr] > m.len[r] {
                out[sr] = out[sr].add(x);
            } else {
                out[sr] = out[sr].add(&u.mul(x));
                out[r] = out[r].add(&um1.mul(x));
            }
        }
        out
    }

    /// Quadratic and braid relations for right multiplication, and
    /// commutation of left with right multiplication (associativity).
    pub fn verify_relations(&self) -> bool {
        let m = &self.model;
        let ng = m.gens.len();
        let one = LaurentPoly::constant(self.nvars, 1);
        for r in 0..m.nr() {
            let b = self.basis(r);
            for s in 0..ng {
                // (a_s − u)(a_s + 1) = 0
                let x = self.right_gen(&b, s);
                let xx = self.right_gen(&x, s);
                let u = self.u(s);
                let um1 = u.sub(&one);
                for i in 0..m.nr() {
                    let lhs = &xx[i];
                    let rhs = u.mul(&b[i]).add(&um1.mul(&x[i]));
                    if *lhs != rhs {
                        return false;
                    }
                }
                for t in 0..ng {
                    let lr = self.right_gen(&self.left_gen(&b, s), t);
                    let rl = self.left_gen(&self.right_gen(&b, t), s);
                    if lr != rl {
                        return false;
                    }
                    if t <= s {
                        continue;
                    }
                    let st = m.weyl.mul(m.gens[s], m.gens[t]);
                    let order = m.weyl.elt_order(st);
                    let mut a = b.clone();
                    let mut c = b.clone();
                    for j in 0..order {
                        a = self.right_gen(&a, if j % 2 == 0 { s } else { t });
                        c = self.right_gen(&c, if j % 2 == 0 { t } else { s });
                    }
                    if a != c {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// At u = 1 the structure constants are those of the group algebra.
    pub fn g_point_is_group_algebra(&self) -> bool {
        let m = &self.model;
        let point = vec![BigRational::one(); self.nvars];
        (0..m.nr()).all(|r| {
            let b = self.basis(r);
            (0..m.gens.len()).all(|s| {
                let x = self.right_gen(&b, s);
                let target = m.rmul[r][s];
                x.iter().enumerate().all(|(i, p)| {
                    let v = p.eval(&point);
                    if i == target {
                        v.is_one()
                    } else {
                        v.is_zero()
                    }
                })
            })
        })
    }
}

/// Determinant of the regular trace form at a specialization u = q,
/// for algebras of dimension at most `MAX_TRACE_FORM_DIM`.
pub const MAX_TRACE_FORM_DIM: usize = 64;

pub fn trace_form_determinant(model: &HeckeModel, q: u64) -> Option<BigInt> {
    let n = model.dim();
    if n > MAX_TRACE_FORM_DIM {
        return None;
    }
    let nc = model.nc();
    let qb = BigInt::from(q);
    let qm1 = BigInt::from(q as i64 - 1);
    // right multiplication by a generator on integer vectors
    let right_gen = |v: &[BigInt], s: usize| -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); n];
        for b in 0..n {
            if v[b].is_zero() {
                continue;
            }
            let (r, c) = (b / nc, b % nc);
            let s2 = model.c_conj_gen[c][s];
            let rs = model.rmul[r][s2];
            let tgt = rs * nc + c;
            if model.len[rs] > model.len[r] {
                out[tgt] += &v[b];
            } else {
                out[tgt] += &qb * &v[b];
                out[b] += &qm1 * &v[b];
            }
        }
        out
    };
    let prod = |i: usize, j: usize| -> Vec<BigInt> {
        // (a_r c)(a_r' c') = a_r a_{c r' c⁻¹} c c'
        let (r, c) = (i / nc, i % nc);
        let (r2, c2) = (j / nc, j % nc);
        let x = model.c_conj[c][r2];
        let cc = model.c_mul[c][c2];
        // a_r a_x is computed in the c = 1 column, then moved to column cc
        let mut w = vec![BigInt::zero(); n];
        w[r * nc] = BigInt::one();
        for &s in &model.words[x] {
            w = right_gen(&w, s);
        }
        let mut v = vec![BigInt::zero(); n];
        for (b, val) in w.into_iter().enumerate() {
            if !val.is_zero() {
                v[(b / nc) * nc + cc] = val;
            }
        }
        v
    };
    let products: Vec<Vec<Vec<BigInt>>> = (0..n).map(|i| (0..n).map(|j| prod(i, j)).collect()).collect();
    let tr: Vec<BigInt> = (0..n).map(|i| (0..n).map(|j| products[i][j][j].clone()).sum()).collect();
    let gram: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| products[i][j].iter().zip(&tr).map(|(a, b)| a * b).sum()).collect())
        .collect();
    Some(bareiss_det(gram))
}

fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

// ---------------------------------------------------------------------------
// index function, η twist, Clifford induction

/// ind(w): product of the simple-reflection parameters along a reduced word
/// (all equal to q in the torus case).
pub fn ind_w(weyl: &WeylGroup, w: usize, params: &[u64]) -> BigInt {
    weyl.words[w].iter().map(|&i| BigInt::from(params[i as usize])).product()
}

/// ind is independent of the reduced word chosen.
pub fn ind_braid_independent(weyl: &WeylGroup, w: usize, params: &[u64]) -> bool {
    let expect = ind_w(weyl, w, params);
    weyl.reduced_words(w)
        .iter()
        .all(|word| word.iter().map(|&i| BigInt::from(params[i as usize])).product::<BigInt>() == expect)
}

/// Result of η ↦ η^{(σ)}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EtaTwist {
    Determinate(usize),
    Indeterminate(String),
}

/// Inputs deciding which regime computes η^{(σ)}.
#[derive(Clone, Debug)]
pub struct TwistContext<'a> {
    pub hecke: &'a HeckeChars,
    /// generic index → table index
    pub f_map: &'a [usize],
    pub table: &'a CharTable,
    pub q: u64,
    pub sqrt_q_fixed: bool,
    pub complement_elementary_2: bool,
}

/// η^{(σ)}: transport η to the f-point, apply σ, and come back through the
/// g-point pairing.
pub fn eta_twist(ctx: &TwistContext<'_>, eta: usize, sigma: &GaloisElt) -> EtaTwist {
    let eta_sigma = || -> usize {
        let img = ctx.table.irr[eta].act(sigma);
        ctx.table.irr.iter().position(|c| *c == img).expect("Galois conjugate is irreducible")
    };
    let Some(gi) = ctx.f_map.iter().position(|&x| x == eta) else {
        return EtaTwist::Indeterminate("no generic character over η".into());
    };
    let gen = &ctx.hecke.chars[gi];
    if gen.is_rational() {
        // f-values rational: σ fixes the f-character, so η^{(σ)} = η
        return EtaTwist::Determinate(eta);
    }
    if let Some(fv) = gen.f_values_root(ctx.q) {
        if ctx.sqrt_q_fixed {
            return EtaTwist::Determinate(eta);
        }
        // σ sends a + b√q to a − b√q
        let conj: Vec<(BigInt, BigInt)> = fv.into_iter().map(|(a, b)| (a, -b)).collect();
        let hit = ctx.hecke.chars.iter().position(|c| c.f_values_root(ctx.q).as_ref() == Some(&conj));
        return match hit {
            Some(j) => EtaTwist::Determinate(ctx.f_map[j]),
            None => EtaTwist::Indeterminate("no generic character with conjugate f-values".into()),
        };
    }
    if ctx.sqrt_q_fixed {
        return EtaTwist::Determinate(eta_sigma());
    }
    let odd = ctx.table.irr[eta].degree_int() % 2 == 1;
    if odd && ctx.complement_elementary_2 {
        return EtaTwist::Determinate(eta);
    }
    EtaTwist::Indeterminate("f-character irrational and σ moves √q".into())
}

/// Series computed at different precisions agree on their common part.
fn same_prefix(a: &[u64], b: &[u64]) -> bool {
    let k = a.len().min(b.len());
    a[..k] == b[..k]
}

/// Outcome of the Clifford-induction cross-check for one ψ₀.
#[derive(Clone, Debug)]
pub struct CliffordCheck {
    pub psi0: usize,
    pub stabilizer_order: usize,
    pub extensions: usize,
    /// the Clifford induction formula gives a character of the full algebra
    pub induced_irreducible: bool,
    /// at u = 1 it agrees with group induction
    pub matches_group_induction: bool,
}

/// For every character ψ₀ of H(R): its C-stabilizer, the extensions to
/// H(R) ⋊ C_{ψ₀}, and the induction formula
/// Ind ψ(a_w) = (1/|C_{ψ₀}|) Σ_{d ∈ C, dwd⁻¹ ∈ R C_{ψ₀}} ψ(a_{dwd⁻¹}).
pub fn clifford_extend_and_induce(full: &HeckeModel) -> Result<Vec<CliffordCheck>, HeckeError> {
    let base = HeckeChars::cached(full.with_complement(vec![0])?)?;
    let full_chars = HeckeChars::cached(full.with_complement(full.c_elems.clone())?)?;
    let nr = full.nr();
    let mut out = Vec::new();
    for (pi, psi0) in base.chars.iter().enumerate() {
        // stabilizer in C
        let stab: Vec<usize> = (0..full.nc())
            .filter(|&d| (0..nr).all(|r| psi0.series[full.c_conj[d][r]] == psi0.series[r]))
            .collect();
        let stab_elems: Vec<usize> = stab.iter().map(|&d| full.c_elems[d]).collect();
        let sub_model = full.with_complement(stab_elems.clone())?;
        let sub_nc = sub_model.nc();
        let sub = HeckeChars::cached(sub_model)?;
        let exts: Vec<&HeckeCharacter> = sub
            .chars
            .iter()
            .filter(|c| (0..nr).all(|r| same_prefix(&c.series[r * sub_nc], &psi0.series[r])))
            .collect();
        let sub_model = &sub.model;
        let mut induced_ok = true;
        let mut group_ok = true;
        let group_full = full.group();
        let gcl = Classes::compute(&group_full);
        let group_sub = sub_model.group();
        let scl = Classes::compute(&group_sub);
        for psi in &exts {
            // series values of the induced character on the full basis
            let inv_s = invq(stab.len() as u64);
            let k = psi.series[0].len();
            let mut ind: Vec<Vec<u64>> = Vec::with_capacity(full.dim());
            for b in 0..full.dim() {
                let mut acc = vec![0u64; k];
                for d in 0..full.nc() {
                    let x = full.conj_by_c(d, b);
                    let g = full.group_elt(x);
                    if let Some(sb) = sub_model.basis_of(g) {
                        acc = ser::add(&acc, &psi.series[sb]);
                    }
                }
                ind.push(acc.iter().map(|&v| mq(v, inv_s)).collect());
            }
            if !full_chars.chars.iter().any(|c| c.series.iter().zip(&ind).all(|(a, b)| same_prefix(a, b))) {
                induced_ok = false;
            }
            // group induction at u = 1
            let psi_cf = ClassFunction {
                values: scl.reps.iter().map(|&x| Cyclotomic::from_int(psi.g_values()[sub_model.basis_of(group_sub.elems[x]).unwrap()])).collect(),
            };
            // group_sub as a subgroup of group_full
            let parent: Arc<dyn FiniteGroup> = Arc::new(group_full.clone());
            let embedded = Subgroup::from_elements(
                parent,
                group_sub.elems.iter().map(|&g| group_full.local(g).unwrap()).collect(),
            );
            let ecl = Classes::compute(&embedded);
            // re-read ψ on the embedded copy's classes
            let psi_e = ClassFunction {
                values: ecl
                    .reps
                    .iter()
                    .map(|&x| {
                        let g = group_full.elems[embedded.elems[x]];
                        psi_cf.values[scl.class(group_sub.local(g).unwrap())].clone()
                    })
                    .collect(),
            };
            let gi = charkit::induce(&psi_e, &embedded, &ecl, &gcl);
            for (cidx, &rep) in gcl.reps.iter().enumerate() {
                let b = full.basis_of(group_full.elems[rep]).unwrap();
                if gi.values[cidx] != Cyclotomic::from_int(lift_sym(ind[b][0])) {
                    group_ok = false;
                }
            }
        }
        out.push(CliffordCheck {
            psi0: pi,
            stabilizer_order: stab.len(),
            extensions: exts.len(),
            induced_irreducible: induced_ok,
            matches_group_induction: group_ok,
        });
    }
    Ok(out)
}

/// Whether the values of every character lie in Q at u = q.
pub fn f_point_rational(h: &HeckeChars) -> bool {
    h.all_rational()
}

/// True when some irreducible factor of the Coxeter system is of type G2.
pub fn has_g2_component(model: &HeckeModel) -> bool {
    let w = &model.weyl;
    let ng = model.gens.len();
    (0..ng).any(|i| (0..ng).any(|j| w.elt_order(w.mul(model.gens[i], model.gens[j])) == 6))
}

pub fn degrees_abs_sum(h: &HeckeChars) -> i64 {
    h.chars.iter().map(|c| c.degree.abs() * c.degree.abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::RootSystem;

    fn weyl(s: &str) -> Arc<WeylGroup> {
        Arc::new(WeylGroup::new(Arc::new(RootSystem::build_str(s).unwrap())).unwrap())
    }

    fn full_model(s: &str) -> HeckeModel {
        let w = weyl(s);
        let gens = w.simple.clone();
        HeckeModel::new(w, gens, vec![0]).unwrap()
    }

    #[test]
    fn generic_relations() {
        for s in ["A1", "C2", "G2", "A2", "B3"] {
            let m = Arc::new(full_model(s));
            let w = m.weyl.clone();
            let all: Vec<usize> = (0..w.order()).collect();
            let h = GenericHecke::build_h0(m.clone(), &all);
            assert!(h.verify_relations(), "{s}");
            assert!(h.g_point_is_group_algebra());
            assert_eq!(m.dim(), w.order());
        }
        // C2 has two parameter classes, A2 one
        let m = Arc::new(full_model("C2"));
        let all: Vec<usize> = (0..8).collect();
        assert_eq!(GenericHecke::build_h0(m, &all).nvars, 2);
    }

    #[test]
    fn a1_characters() {
        let h = HeckeChars::compute(Arc::new(full_model("A1"))).unwrap();
        assert_eq!(h.chars.len(), 2);
        let s = 1;
        let mut eig: Vec<BigInt> = h.chars.iter().map(|c| c.f_values(5).unwrap()[s].clone()).collect();
        eig.sort();
        assert_eq!(eig, vec![BigInt::from(-1), BigInt::from(5)]);
    }

    #[test]
    fn b2_characters() {
        let m = full_model("C2");
        let h = HeckeChars::compute(Arc::new(m)).unwrap();
        assert_eq!(h.chars.len(), 5);
        let degs: Vec<i64> = h.chars.iter().map(|c| c.degree).collect();
        assert_eq!(degs, vec![1, 1, 1, 1, 2]);
        let model = &h.model;
        let s = model.basis_of(model.weyl.simple[0]).unwrap();
        let t = model.basis_of(model.weyl.simple[1]).unwrap();
        let mut pairs: Vec<(BigInt, BigInt)> = h.chars[..4]
            .iter()
            .map(|c| {
                let f = c.f_values(7).unwrap();
                (f[s].clone(), f[t].clone())
            })
            .collect();
        pairs.sort();
        let m1 = BigInt::from(-1);
        let q = BigInt::from(7);
        assert_eq!(pairs, vec![(m1.clone(), m1.clone()), (m1.clone(), q.clone()), (q.clone(), m1.clone()), (q.clone(), q.clone())]);
        let schur = h.schur_elements(7).unwrap();
        assert!(schur.iter().all(|c| !c.is_zero()));
    }

    #[test]
    fn g_point_matches_dixon() {
        for s in ["C2", "G2", "B3", "A3"] {
            let m = full_model(s);
            let h = HeckeChars::compute(Arc::new(m)).unwrap();
            let g = h.model.group();
            let table = charkit::dixon_table(&g).unwrap();
            let f = h.f_bijection(&table, &g).unwrap();
            assert_eq!(f.len(), table.irr.len());
            assert!(h.all_rational(), "{s}");
        }
    }

    #[test]
    fn trace_form_nondegenerate() {
        for s in ["A1", "C2", "G2"] {
            let m = full_model(s);
            for q in [1, 3, 5] {
                let d = trace_form_determinant(&m, q).unwrap();
                assert!(!d.is_zero(), "{s} {q}");
            }
        }
    }

    #[test]
    fn index_function() {
        let w = weyl("C2");
        let p = vec![5, 5];
        assert_eq!(ind_w(&w, 0, &p), BigInt::one());
        for x in 0..w.order() {
            assert_eq!(ind_w(&w, x, &p), BigInt::from(5).pow(w.length(x)));
            assert!(ind_braid_independent(&w, x, &p));
        }
        assert_eq!(w.reduced_words(w.w0).len(), 2);
    }

    #[test]
    fn clifford_examples() {
        // B4 with R = C2 × C2 and C of order 2
        let s = crate::relweyl::Setting::from_str("B4", 5, false).unwrap();
        let lam = crate::relweyl::TorusChar { exps: vec![0, 2, 0, 0] };
        let rel = s.rel_data(&lam).unwrap();
        let m = HeckeModel::from_rel(s.weyl.clone(), &rel).unwrap();
        assert_eq!(m.dim(), 128);
        let checks = clifford_extend_and_induce(&m).unwrap();
        assert_eq!(checks.len(), 25);
        for c in &checks {
            assert!(c.induced_irreducible && c.matches_group_induction, "{c:?}");
            if c.stabilizer_order == 2 {
                assert_eq!(c.extensions, 2);
            } else {
                assert_eq!(c.extensions, 1);
            }
        }
        // trivial complement: identity operation
        let m1 = full_model("C2");
        let checks = clifford_extend_and_induce(&m1).unwrap();
        assert!(checks.iter().all(|c| c.stabilizer_order == 1 && c.extensions == 1 && c.induced_irreducible));
    }

    #[test]
    fn laurent_arithmetic() {
        let u = LaurentPoly::var(1, 0);
        let one = LaurentPoly::constant(1, 1);
        let p = u.add(&one).mul(&u.sub(&one));
        let v = p.eval(&[BigRational::from_integer(BigInt::from(3))]);
        assert_eq!(v, BigRational::from_integer(BigInt::from(8)));
        let inv = LaurentPoly { terms: [(vec![-1], 1i128)].into_iter().collect() };
        assert_eq!(inv.mul(&u), one);
    }

    #[test]
    fn abs_degree_sum() {
        let h = HeckeChars::compute(Arc::new(full_model("G2"))).unwrap();
        assert_eq!(degrees_abs_sum(&h), 12);
        assert!(has_g2_component(&h.model));
    }
}
