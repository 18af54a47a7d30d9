//! Extended Weyl group V = ⟨n_α(−1)⟩, its toral part H, the split torus T
//! and the w₀-twisted torus T₁, and the normalizers N = TV, N₁ = T₁V.
//!
//! V is modelled as pairs (h, w) with h ∈ H an F₂-vector on simple coroots
//! and w ∈ W standing for ẇ, the product of the n_{α_i}(−1) along the
//! canonical reduced word. Products go through a precomputed 2-cocycle.

use std::sync::Arc;

use thiserror::Error;

use crate::charkit::FiniteGroup;
use crate::rootsys::{RootSystem, WeylGroup};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormError {
    #[error("twisted torus needs w0 = -1 (unsupported for {0})")]
    TwistNeedsCentralW0(String),
    #[error("normalizer of order {0} exceeds the enumeration bound")]
    TooLarge(usize),
    #[error("q must be a prime power at least 2, got {0}")]
    BadQ(u64),
}

pub const MAX_N_ORDER: usize = 1_000_000;

/// Element of H = ⟨h_α(−1)⟩: bit j is the coefficient of α_j∨ mod 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct HElt {
    pub bits: u16,
}

/// Element h·ẇ of V.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ExtWeylElt {
    pub h: HElt,
    pub w: usize,
}

fn bits_of(coords: &[i64]) -> u16 {
    coords
        .iter()
        .enumerate()
        .fold(0u16, |acc, (j, &c)| if c.rem_euclid(2) == 1 { acc | (1 << j) } else { acc })
}

/// The extended Weyl group with cocycle arithmetic.
#[derive(Debug)]
pub struct ExtWeyl {
    pub weyl: Arc<WeylGroup>,
    /// H is trivial in characteristic 2
    pub h_trivial: bool,
    rank: usize,
    cocycle: Vec<u16>,
    h_act: Vec<u16>,
    root_n: Vec<ExtWeylElt>,
}

impl ExtWeyl {
    pub fn new(weyl: Arc<WeylGroup>, q_even: bool) -> Self {
        let rs = weyl.rs.clone();
        let r = rs.rank;
        let nw = weyl.order();
        let nh = 1usize << r;
        // w(h): images of simple coroots are the columns of the coroot matrix
        let mut h_act = vec![0u16; nw * nh];
        for w in 0..nw {
            let cols: Vec<u16> = (0..r)
                .map(|j| bits_of(rs.coroot_coords(weyl.act_root(w, rs.simple(j)))))
                .collect();
            for b in 0..nh {
                let mut img = 0u16;
                for (j, c) in cols.iter().enumerate() {
                    if b >> j & 1 == 1 {
                        img ^= c;
                    }
                }
                h_act[w * nh + b] = img;
            }
        }
        let mut ev = ExtWeyl {
            weyl: weyl.clone(),
            h_trivial: q_even,
            rank: r,
            cocycle: vec![0u16; nw * nw],
            h_act,
            root_n: Vec::new(),
        };
        if !q_even {
            // c(w1, w2): ẇ2 = n_i · (s_i w2)˙ along the canonical word, so
            // c(w1, w2) = h' + c(w1 s_i, s_i w2) with ẇ1 n_i = h'·(w1 s_i)˙
            let mut coc = vec![0u16; nw * nw];
            for w2 in 1..nw {
                let i = weyl.words[w2][0] as usize;
                let s = weyl.simple[i];
                let rest = weyl.mul(s, w2);
                for w1 in 0..nw {
                    let x = weyl.mul(w1, s);
                    let h1 = if weyl.length(x) > weyl.length(w1) {
                        0
                    } else {
                        // ẇ1 = ẋ n_i, so ẇ1 n_i = ẋ h_i(−1) = x(h_i)·ẋ
                        ev.h_act[x * nh + (1 << i)]
                    };
                    coc[w1 * nw + w2] = h1 ^ coc[x * nw + rest];
                }
            }
            ev.cocycle = coc;
        }
        ev.root_n = (0..rs.nroots()).map(|k| ev.compute_root_n(k)).collect();
        ev
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    fn h_size(&self) -> usize {
        if self.h_trivial {
            1
        } else {
            1 << self.rank
        }
    }

    fn mask(&self, b: u16) -> u16 {
        if self.h_trivial {
            0
        } else {
            b
        }
    }

    /// Action of w on H by conjugation.
    pub fn act_h(&self, w: usize, h: HElt) -> HElt {
        HElt { bits: self.mask(self.h_act[w * (1 << self.rank) + h.bits as usize]) }
    }

    pub fn cocycle(&self, w1: usize, w2: usize) -> HElt {
        HElt { bits: self.mask(self.cocycle[w1 * self.weyl.order() + w2]) }
    }

    pub fn v_mult(&self, a: ExtWeylElt, b: ExtWeylElt) -> ExtWeylElt {
        let h = a.h.bits ^ self.act_h(a.w, b.h).bits ^ self.cocycle(a.w, b.w).bits;
        ExtWeylElt { h: HElt { bits: self.mask(h) }, w: self.weyl.mul(a.w, b.w) }
    }

    pub fn v_inv(&self, a: ExtWeylElt) -> ExtWeylElt {
        // (h ẇ)⁻¹ = w⁻¹(h + c(w, w⁻¹)) · (w⁻¹)˙
        let wi = self.weyl.inv(a.w);
        let k = HElt { bits: a.h.bits ^ self.cocycle(a.w, wi).bits };
        ExtWeylElt { h: self.act_h(wi, k), w: wi }
    }

    pub fn identity(&self) -> ExtWeylElt {
        ExtWeylElt { h: HElt::default(), w: 0 }
    }

    /// n_{α_i}(−1).
    pub fn n_simple(&self, i: usize) -> ExtWeylElt {
        ExtWeylElt { h: HElt::default(), w: self.weyl.simple[i] }
    }

    /// h_α(−1) for a root α.
    pub fn h_root(&self, alpha: usize) -> HElt {
        HElt { bits: self.mask(bits_of(self.weyl.rs.coroot_coords(alpha))) }
    }

    /// The element ẇ.
    pub fn dot(&self, w: usize) -> ExtWeylElt {
        ExtWeylElt { h: HElt::default(), w }
    }

    /// Product of simple n_i(−1) along an arbitrary word.
    pub fn word_product(&self, word: &[u8]) -> ExtWeylElt {
        word.iter().fold(self.identity(), |acc, &i| self.v_mult(acc, self.n_simple(i as usize)))
    }

    /// n_α(−1) for any root α.
    pub fn root_n(&self, alpha: usize) -> ExtWeylElt {
        self.root_n[alpha]
    }

    fn compute_root_n(&self, alpha: usize) -> ExtWeylElt {
        let (w, i) = self.conjugator(alpha);
        self.root_n_via(alpha, w, i)
    }

    /// Least (w, i) with w(α_i) = α.
    pub fn conjugator(&self, alpha: usize) -> (usize, usize) {
        let rs = &self.weyl.rs;
        for w in 0..self.weyl.order() {
            for i in 0..rs.rank {
                if self.weyl.act_root(w, rs.simple(i)) == alpha {
                    return (w, i);
                }
            }
        }
        unreachable!("every root is W-conjugate to a simple root")
    }

    /// n_α(−1) = ẇ n_i(−1) h_i(−1)^ε ẇ⁻¹ where Ad(ẇ) e_{α_i} = (−1)^ε e_α.
    pub fn root_n_via(&self, alpha: usize, w: usize, i: usize) -> ExtWeylElt {
        let rs = &self.weyl.rs;
        debug_assert_eq!(self.weyl.act_root(w, rs.simple(i)), alpha);
        let c = self.weyl.ad_sign(w, rs.simple(i));
        let mut mid = self.n_simple(i);
        if c < 0 {
            mid = self.v_mult(mid, ExtWeylElt { h: self.h_root(rs.simple(i)), w: 0 });
        }
        let d = self.dot(w);
        self.v_mult(self.v_mult(d, mid), self.v_inv(d))
    }

    /// Signed permutation of root vectors: Ad(v) e_k = sign · e_{k'}.
    pub fn ad_on_root(&self, v: ExtWeylElt, k: usize) -> (i8, usize) {
        let rs = &self.weyl.rs;
        let img = self.weyl.act_root(v.w, k);
        let mut sign = self.weyl.ad_sign(v.w, k);
        // h = Π h_{α_j}(−1)^{b_j} acts on e_β by Π (−1)^{b_j ⟨β, α_j∨⟩}
        let mut e = 0i64;
        for j in 0..rs.rank {
            if v.h.bits >> j & 1 == 1 {
                e += rs.pairing(img, rs.simple(j));
            }
        }
        if e.rem_euclid(2) == 1 {
            sign = -sign;
        }
        (sign, img)
    }

    pub fn index(&self, v: ExtWeylElt) -> usize {
        v.w * self.h_size() + v.h.bits as usize
    }

    pub fn elt(&self, idx: usize) -> ExtWeylElt {
        let hs = self.h_size();
        ExtWeylElt { h: HElt { bits: (idx % hs) as u16 }, w: idx / hs }
    }

    pub fn h_elements(&self) -> Vec<HElt> {
        (0..self.h_size()).map(|b| HElt { bits: b as u16 }).collect()
    }
}

impl FiniteGroup for ExtWeyl {
    fn order(&self) -> usize {
        self.weyl.order() * self.h_size()
    }
    fn mul(&self, a: usize, b: usize) -> usize {
        self.index(self.v_mult(self.elt(a), self.elt(b)))
    }
    fn inv(&self, a: usize) -> usize {
        self.index(self.v_inv(self.elt(a)))
    }
    fn generators(&self) -> Vec<usize> {
        (0..self.rank).map(|i| self.index(self.n_simple(i))).collect()
    }
}

// ---------------------------------------------------------------------------
// Smith normal form

/// Smith normal form: returns (d, U, V) with U·A·V = diag(d), U and V
/// unimodular, d_i ≥ 0 and d_i | d_{i+1}.
pub fn smith_normal_form(a: &[Vec<i64>]) -> (Vec<i64>, Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let n = a.len();
    let m = if n == 0 { 0 } else { a[0].len() };
    let mut d: Vec<Vec<i64>> = a.to_vec();
    let ident = |k: usize| -> Vec<Vec<i64>> {
        (0..k).map(|i| (0..k).map(|j| i64::from(i == j)).collect()).collect()
    };
    let mut u = ident(n);
    let mut v = ident(m);
    let row_op = |mat: &mut Vec<Vec<i64>>, dst: usize, src: usize, f: i64| {
        let cols = mat[0].len();
        for c in 0..cols {
            mat[dst][c] -= f * mat[src][c];
        }
    };
    let col_op = |mat: &mut Vec<Vec<i64>>, dst: usize, src: usize, f: i64| {
        for row in mat.iter_mut() {
            row[dst] -= f * row[src];
        }
    };
    let swap_cols = |mat: &mut Vec<Vec<i64>>, a: usize, b: usize| {
        for row in mat.iter_mut() {
            row.swap(a, b);
        }
    };
    for t in 0..n.min(m) {
        loop {
            // pivot: smallest nonzero absolute value in the lower-right block
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..m {
                    if d[i][j] != 0
                        && best.map_or(true, |(bi, bj)| d[i][j].abs() < d[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            d.swap(t, pi);
            u.swap(t, pi);
            swap_cols(&mut d, t, pj);
            swap_cols(&mut v, t, pj);
            let p = d[t][t];
            let mut clean = true;
            for i in t + 1..n {
                let f = d[i][t] / p;
                if f != 0 {
                    row_op(&mut d, i, t, f);
                    row_op(&mut u, i, t, f);
                }
                if d[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..m {
                let f = d[t][j] / p;
                if f != 0 {
                    col_op(&mut d, j, t, f);
                    col_op(&mut v, j, t, f);
                }
                if d[t][j] != 0 {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility: fold in any entry not divisible by the pivot
            let bad = (t + 1..n).find_map(|i| (t + 1..m).find(|&j| d[i][j] % p != 0).map(|j| (i, j)));
            match bad {
                Some((i, _)) => {
                    // add row i to row t and repeat
                    row_op(&mut d, t, i, -1);
                    row_op(&mut u, t, i, -1);
                }
                None => break,
            }
        }
        if d[t][t] < 0 {
            for c in 0..m {
                d[t][c] = -d[t][c];
            }
            for c in 0..n {
                u[t][c] = -u[t][c];
            }
        }
    }
    let diag = (0..n.min(m)).map(|i| d[i][i]).collect();
    (diag, u, v)
}

/// Inverse of a unimodular integer matrix.
fn unimodular_inverse(a: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    let mut m: Vec<Vec<i64>> = a.to_vec();
    let mut inv: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    // integer row reduction (Euclid on columns)
    for c in 0..n {
        loop {
            let nz: Vec<usize> = (c..n).filter(|&r| m[r][c] != 0).collect();
            let pr = *nz.iter().min_by_key(|&&r| m[r][c].abs()).expect("unimodular");
            m.swap(c, pr);
            inv.swap(c, pr);
            let mut done = true;
            for r in 0..n {
                if r != c && m[r][c] != 0 {
                    let f = m[r][c] / m[c][c];
                    for k in 0..n {
                        m[r][k] -= f * m[c][k];
                        inv[r][k] -= f * inv[c][k];
                    }
                    if m[r][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if m[c][c] < 0 {
            for k in 0..n {
                m[c][k] = -m[c][k];
                inv[c][k] = -inv[c][k];
            }
        }
    }
    inv
}

fn matmul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    (0..n).map(|i| (0..m).map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum()).collect()).collect()
}

// ---------------------------------------------------------------------------
// tori

/// Element of T (or T₁): residues against the invariant factors.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorusElt {
    pub exps: Vec<u64>,
}

/// T = Y/AY on the coroot lattice Y, with A = (q−1)I (split) or
/// q·M_{w₀} − I (twisted).
#[derive(Clone, Debug)]
pub struct Torus {
    pub q: u64,
    pub twisted: bool,
    pub rank: usize,
    pub factors: Vec<u64>,
    /// q−1 (split) or q+1 (twisted); A = ±scalar·I
    pub scalar: u64,
    u: Vec<Vec<i64>>,
    uinv: Vec<Vec<i64>>,
    w_mats: Vec<Vec<Vec<i64>>>,
    h_embed: Vec<TorusElt>,
    order: usize,
}

impl Torus {
    /// Builds the torus with invariant factors and W-action data.
    pub fn build(weyl: &WeylGroup, q: u64, twisted: bool) -> Result<Self, NormError> {
        if q < 2 {
            return Err(NormError::BadQ(q));
        }
        let rs = &weyl.rs;
        let r = rs.rank;
        if twisted && !weyl.longest_is_central() {
            return Err(NormError::TwistNeedsCentralW0(rs.describe()));
        }
        let a: Vec<Vec<i64>> = if twisted {
            let m0 = weyl.coroot_matrix(weyl.w0);
            (0..r)
                .map(|i| (0..r).map(|j| q as i64 * m0[i][j] - i64::from(i == j)).collect())
                .collect()
        } else {
            (0..r).map(|i| (0..r).map(|j| if i == j { q as i64 - 1 } else { 0 }).collect()).collect()
        };
        let (d, u, _v) = smith_normal_form(&a);
        let uinv = unimodular_inverse(&u);
        let factors: Vec<u64> = d.iter().map(|&x| x as u64).collect();
        let scalar = if twisted { q + 1 } else { q - 1 };
        let w_mats = (0..weyl.order())
            .map(|w| matmul(&matmul(&u, &weyl.coroot_matrix(w)), &uinv))
            .collect();
        let order = factors.iter().map(|&f| f as usize).product();
        let mut t = Torus {
            q,
            twisted,
            rank: r,
            factors,
            scalar,
            u,
            uinv,
            w_mats,
            h_embed: Vec::new(),
            order,
        };
        t.h_embed = (0..1usize << r)
            .map(|b| {
                if q % 2 == 0 {
                    return t.identity();
                }
                // h = Σ b_j α_j∨ ⊗ (−1), and −1 = ζ_e^{e/2}
                let y: Vec<i64> = (0..r)
                    .map(|j| if b >> j & 1 == 1 { (scalar / 2) as i64 } else { 0 })
                    .collect();
                t.from_coroot_vector(&y)
            })
            .collect();
        Ok(t)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> TorusElt {
        TorusElt { exps: vec![0; self.rank] }
    }

    fn reduce(&self, v: &[i64]) -> TorusElt {
        TorusElt {
            exps: v.iter().zip(&self.factors).map(|(&x, &d)| x.rem_euclid(d as i64) as u64).collect(),
        }
    }

    /// Image of y ⊗ ζ_e in T for y on the coroot lattice.
    pub fn from_coroot_vector(&self, y: &[i64]) -> TorusElt {
        let t: Vec<i64> = (0..self.rank).map(|i| (0..self.rank).map(|j| self.u[i][j] * y[j]).sum()).collect();
        self.reduce(&t)
    }

    /// Coroot-lattice coordinates (mod e) of a torus element.
    pub fn to_coroot_vector(&self, t: &TorusElt) -> Vec<i64> {
        (0..self.rank)
            .map(|i| {
                (0..self.rank).map(|j| self.uinv[i][j] * t.exps[j] as i64).sum::<i64>().rem_euclid(self.scalar.max(1) as i64)
            })
            .collect()
    }

    pub fn add(&self, a: &TorusElt, b: &TorusElt) -> TorusElt {
        TorusElt {
            exps: a.exps.iter().zip(&b.exps).zip(&self.factors).map(|((x, y), d)| (x + y) % d.max(&1)).collect(),
        }
    }

    pub fn neg(&self, a: &TorusElt) -> TorusElt {
        TorusElt { exps: a.exps.iter().zip(&self.factors).map(|(x, d)| (d - x % d) % d).collect() }
    }

    /// ẇ t ẇ⁻¹.
    pub fn act(&self, w: usize, t: &TorusElt) -> TorusElt {
        let m = &self.w_mats[w];
        let v: Vec<i64> =
            (0..self.rank).map(|i| (0..self.rank).map(|j| m[i][j] * t.exps[j] as i64).sum()).collect();
        self.reduce(&v)
    }

    pub fn index(&self, t: &TorusElt) -> usize {
        let mut idx = 0usize;
        for i in (0..self.rank).rev() {
            idx = idx * self.factors[i] as usize + t.exps[i] as usize;
        }
        idx
    }

    pub fn elt(&self, mut idx: usize) -> TorusElt {
        let exps = self
            .factors
            .iter()
            .map(|&d| {
                let x = idx % d as usize;
                idx /= d as usize;
                x as u64
            })
            .collect();
        TorusElt { exps }
    }

    /// H → T; monomorphism for q odd, trivial for q even.
    pub fn embed_h(&self, h: HElt) -> TorusElt {
        self.h_embed[h.bits as usize].clone()
    }

    /// Generators: unit vectors for nontrivial factors.
    pub fn generators(&self) -> Vec<TorusElt> {
        (0..self.rank)
            .filter(|&i| self.factors[i] > 1)
            .map(|i| {
                let mut e = vec![0; self.rank];
                e[i] = 1;
                TorusElt { exps: e }
            })
            .collect()
    }

    /// Level L = lcm of the invariant factors, at which character values live.
    pub fn char_level(&self) -> u64 {
        self.factors.iter().fold(1u64, |a, &d| crate::cyclo::lcm(a, d.max(1)))
    }

    /// λ(t) as an exponent of ζ_L, for λ given by exponents on generators.
    pub fn char_exp(&self, lambda: &[u64], t: &TorusElt) -> u64 {
        let l = self.char_level();
        let mut s = 0u64;
        for i in 0..self.rank {
            let d = self.factors[i].max(1);
            s = (s + lambda[i] * t.exps[i] % d * (l / d)) % l;
        }
        s
    }

    /// The character t ↦ λ(w⁻¹ t ẇ) written as an exponent vector.
    pub fn act_char(&self, w_inv: usize, lambda: &[u64]) -> Vec<u64> {
        // (wλ)(t) = λ(M_{w⁻¹} t); transpose of M_{w⁻¹} on exponents
        let m = &self.w_mats[w_inv];
        let l = self.char_level();
        (0..self.rank)
            .map(|j| {
                let dj = self.factors[j].max(1);
                let mut s: i64 = 0;
                for i in 0..self.rank {
                    let di = self.factors[i].max(1);
                    // exponent at level L of λ_i applied to the j-th coordinate image
                    s += lambda[i] as i64 * m[i][j] * (l / di) as i64;
                }
                // back to level d_j
                let s = s.rem_euclid(l as i64) as u64;
                debug_assert_eq!(s % (l / dj), 0);
                (s / (l / dj)) % dj
            })
            .collect()
    }

    /// Z(G)^F: common kernel of all roots on T.
    pub fn center(&self, rs: &RootSystem) -> Vec<TorusElt> {
        let e = self.scalar as i64;
        let mut out = Vec::new();
        for idx in 0..self.order {
            let t = self.elt(idx);
            let y = self.to_coroot_vector(&t);
            // α_i(y ⊗ ζ) = ζ^{Σ_j ⟨α_i, α_j∨⟩ y_j}
            let ok = (0..self.rank).all(|i| (0..self.rank).map(|j| rs.cartan[i][j] * y[j]).sum::<i64>().rem_euclid(e.max(1)) == 0);
            if ok {
                out.push(t);
            }
        }
        out
    }
}

pub fn build_torus(weyl: &WeylGroup, q: u64, twisted: bool) -> Result<Torus, NormError> {
    Torus::build(weyl, q, twisted)
}

pub fn embed_h_in_t(torus: &Torus, h: HElt) -> TorusElt {
    torus.embed_h(h)
}

// ---------------------------------------------------------------------------
// normalizer

/// Element t·v of N with v ∈ V and H ⊂ T identified.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NormalizerElt {
    pub t: TorusElt,
    pub w: usize,
}

/// N = TV (split) or N₁ = T₁V (twisted), elements (t, ẇ).
#[derive(Debug)]
pub struct NGroup {
    pub v: Arc<ExtWeyl>,
    pub torus: Arc<Torus>,
    nw: usize,
}

impl NGroup {
    pub fn new(v: Arc<ExtWeyl>, torus: Arc<Torus>) -> Result<Self, NormError> {
        let nw = v.weyl.order();
        let order = torus.order().saturating_mul(nw);
        if order > MAX_N_ORDER {
            return Err(NormError::TooLarge(order));
        }
        Ok(NGroup { v, torus, nw })
    }

    pub fn weyl(&self) -> &WeylGroup {
        &self.v.weyl
    }

    pub fn n_mult(&self, a: &NormalizerElt, b: &NormalizerElt) -> NormalizerElt {
        let t = self.torus.add(
            &self.torus.add(&a.t, &self.torus.act(a.w, &b.t)),
            &self.torus.embed_h(self.v.cocycle(a.w, b.w)),
        );
        NormalizerElt { t, w: self.v.weyl.mul(a.w, b.w) }
    }

    pub fn n_inv(&self, a: &NormalizerElt) -> NormalizerElt {
        let wi = self.v.weyl.inv(a.w);
        let k = self.torus.add(&a.t, &self.torus.embed_h(self.v.cocycle(a.w, wi)));
        NormalizerElt { t: self.torus.act(wi, &self.torus.neg(&k)), w: wi }
    }

    pub fn from_v(&self, v: ExtWeylElt) -> NormalizerElt {
        NormalizerElt { t: self.torus.embed_h(v.h), w: v.w }
    }

    pub fn from_t(&self, t: TorusElt) -> NormalizerElt {
        NormalizerElt { t, w: 0 }
    }

    pub fn index(&self, a: &NormalizerElt) -> usize {
        self.torus.index(&a.t) * self.nw + a.w
    }

    pub fn elt(&self, idx: usize) -> NormalizerElt {
        NormalizerElt { t: self.torus.elt(idx / self.nw), w: idx % self.nw }
    }

    pub fn torus_index(&self, t: &TorusElt) -> usize {
        self.torus.index(t) * self.nw
    }
}

impl FiniteGroup for NGroup {
    fn order(&self) -> usize {
        self.torus.order() * self.nw
    }
    fn mul(&self, a: usize, b: usize) -> usize {
        self.index(&self.n_mult(&self.elt(a), &self.elt(b)))
    }
    fn inv(&self, a: usize) -> usize {
        self.index(&self.n_inv(&self.elt(a)))
    }
    fn generators(&self) -> Vec<usize> {
        let mut g: Vec<usize> =
            self.torus.generators().into_iter().map(|t| self.index(&self.from_t(t))).collect();
        g.extend((0..self.v.rank()).map(|i| self.index(&self.from_v(self.v.n_simple(i)))));
        g
    }
}

/// The full construction for a root system at q.
pub fn build_n(weyl: Arc<WeylGroup>, q: u64, twisted: bool) -> Result<NGroup, NormError> {
    let torus = Torus::build(&weyl, q, twisted)?;
    let v = ExtWeyl::new(weyl, q % 2 == 0);
    NGroup::new(Arc::new(v), Arc::new(torus))
}

/// Z(G)^F as torus elements, with restriction of characters to it.
pub fn center_chars(weyl: &WeylGroup, q: u64) -> Result<Vec<TorusElt>, NormError> {
    let t = Torus::build(weyl, q, false)?;
    Ok(t.center(&weyl.rs))
}

/// Outcome of the structural checks on V, T and N for one (type, q).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuralReport {
    pub h_order: usize,
    pub h_expected: usize,
    /// N → W is onto with kernel exactly T
    pub quotient_is_weyl: bool,
    /// elements of V lying in T are exactly the image of H
    pub t_cap_v_is_h: bool,
    /// conjugation by ṅ on T agrees with the W-action
    pub conjugation_matches: bool,
    pub triples_checked: usize,
    pub associative: bool,
}

impl StructuralReport {
    pub fn passed(&self) -> bool {
        self.h_order == self.h_expected
            && self.quotient_is_weyl
            && self.t_cap_v_is_h
            && self.conjugation_matches
            && self.associative
    }
}

/// Structural checks: |H| = (2, q−1)^rank, N/T ≅ W, T ∩ V = H and the
/// cocycle identity (exhaustive on V for rank ≤ 2, `samples` random
/// triples of N otherwise).
pub fn structural_check(weyl: Arc<WeylGroup>, q: u64, samples: usize, seed: u64) -> Result<StructuralReport, NormError> {
    use rand::{Rng, SeedableRng};
    use std::collections::HashSet;

    let n = build_n(weyl.clone(), q, false)?;
    let v = &n.v;
    let torus = &n.torus;
    let r = weyl.rs.rank;
    let h_img: HashSet<TorusElt> = v.h_elements().into_iter().map(|h| torus.embed_h(h)).collect();
    let h_expected = if q % 2 == 0 { 1 } else { 1usize << r };

    // elements of V with trivial Weyl part, pushed into N
    let mut in_t = HashSet::new();
    for idx in 0..v.order() {
        let x = n.from_v(v.elt(idx));
        if x.w == 0 {
            in_t.insert(x.t);
        }
    }
    let t_cap_v_is_h = in_t == h_img;

    // kernel of N → W is T, and the induced map on cosets is a bijection onto W
    let gens = FiniteGroup::generators(&n);
    let mut quotient_is_weyl = torus.order() * weyl.order() == n.order();
    let mut seen_w = HashSet::new();
    for &g in &gens {
        seen_w.insert(n.elt(g).w);
    }
    let closure = crate::charkit::closure(&*weyl, &seen_w.iter().copied().collect::<Vec<_>>());
    quotient_is_weyl &= closure.len() == weyl.order();
    for &a in &gens {
        for &b in &gens {
            let ab = n.elt(n.mul(a, b));
            quotient_is_weyl &= ab.w == weyl.mul(n.elt(a).w, n.elt(b).w);
        }
    }

    let mut conjugation_matches = true;
    for i in 0..r {
        let s = n.from_v(v.n_simple(i));
        let si = n.n_inv(&s);
        for t in torus.generators() {
            let c = n.n_mult(&n.n_mult(&s, &n.from_t(t.clone())), &si);
            conjugation_matches &= c.w == 0 && c.t == torus.act(weyl.simple[i], &t);
        }
    }

    let mut associative = true;
    let mut triples = 0usize;
    if r <= 2 {
        let o = v.order();
        for a in 0..o {
            for b in 0..o {
                let ab = v.mul(a, b);
                for c in 0..o {
                    associative &= v.mul(ab, c) == v.mul(a, v.mul(b, c));
                    triples += 1;
                }
            }
        }
    } else {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let o = n.order();
        for _ in 0..samples {
            let (a, b, c) = (rng.gen_range(0..o), rng.gen_range(0..o), rng.gen_range(0..o));
            associative &= n.mul(n.mul(a, b), c) == n.mul(a, n.mul(b, c));
            triples += 1;
        }
    }
    Ok(StructuralReport {
        h_order: h_img.len(),
        h_expected,
        quotient_is_weyl,
        t_cap_v_is_h,
        conjugation_matches,
        triples_checked: triples,
        associative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::RootSystem;

    fn weyl(s: &str) -> Arc<WeylGroup> {
        Arc::new(WeylGroup::new(Arc::new(RootSystem::build_str(s).unwrap())).unwrap())
    }

    #[test]
    fn a1_is_cyclic_of_order_four() {
        let v = ExtWeyl::new(weyl("A1"), false);
        assert_eq!(v.order(), 4);
        let n = v.n_simple(0);
        let n2 = v.v_mult(n, n);
        assert_eq!(n2, ExtWeylElt { h: v.h_root(0), w: 0 });
        assert_ne!(n2, v.identity());
        assert_eq!(v.v_mult(n2, n2), v.identity());
        assert_eq!(v.elt_order(v.index(n)), 4);
    }

    #[test]
    fn longest_square_is_rho_check() {
        // ẇ₀² = Π_{α>0} h_α(−1)
        for s in ["A1", "A2", "C2", "G2", "B3", "C3", "A3", "B4", "D4"] {
            let w = weyl(s);
            let v = ExtWeyl::new(w.clone(), false);
            let d = v.dot(w.w0);
            let sq = v.v_mult(d, d);
            let mut expect = 0u16;
            for k in 0..w.rs.npos {
                expect ^= v.h_root(k).bits;
            }
            assert_eq!(sq, ExtWeylElt { h: HElt { bits: expect }, w: 0 }, "{s}");
        }
        // C₂: h_{α1}(−1)^3 h_{α2}(−1)^4 with α1 short, so one bit survives
        let w = weyl("C2");
        let v = ExtWeyl::new(w.clone(), false);
        let d = v.dot(w.w0);
        assert_eq!(v.v_mult(d, d).h.bits.count_ones(), 1);
    }

    #[test]
    fn root_elements_square_to_coroot() {
        for s in ["C2", "G2", "B3", "D4"] {
            let v = ExtWeyl::new(weyl(s), false);
            let rs = v.weyl.rs.clone();
            for a in 0..rs.nroots() {
                let n = v.root_n(a);
                assert_eq!(v.v_mult(n, n), ExtWeylElt { h: v.h_root(a), w: 0 });
                assert_eq!(n.w, v.weyl.reflection[a]);
            }
        }
    }

    #[test]
    fn root_elements_match_lie_algebra() {
        // Ad(n_α(−1)) from the cocycle model = exp(−ad e_α) exp(ad e_{−α}) exp(−ad e_α)
        for s in ["A2", "C2", "G2", "B3", "C3"] {
            let v = ExtWeyl::new(weyl(s), false);
            let rs = v.weyl.rs.clone();
            let r = rs.rank;
            for a in 0..rs.nroots() {
                let n = v.root_n(a);
                for k in 0..rs.nroots() {
                    let mut e = vec![0i64; rs.lie_dim()];
                    e[r + k] = 1;
                    let img = rs.ad_n_minus_one(a, &e);
                    let (sign, kk) = v.ad_on_root(n, k);
                    let mut expect = vec![0i64; rs.lie_dim()];
                    expect[r + kk] = sign as i64;
                    assert_eq!(img, expect, "{s} root {a} on {k}");
                }
            }
        }
    }

    #[test]
    fn root_elements_independent_of_conjugator() {
        for s in ["C2", "G2", "B3"] {
            let v = ExtWeyl::new(weyl(s), false);
            let rs = v.weyl.rs.clone();
            for w in 0..v.weyl.order() {
                for i in 0..rs.rank {
                    let a = v.weyl.act_root(w, rs.simple(i));
                    assert_eq!(v.root_n_via(a, w, i), v.root_n(a));
                }
            }
        }
    }

    #[test]
    fn braid_independence() {
        for s in ["A2", "C2", "G2", "B3"] {
            let v = ExtWeyl::new(weyl(s), false);
            for w in 0..v.weyl.order() {
                for word in v.weyl.reduced_words(w) {
                    assert_eq!(v.word_product(&word), v.dot(w), "{s}");
                }
            }
        }
    }

    #[test]
    fn ad_is_a_homomorphism_rank_two() {
        for s in ["A2", "C2", "G2"] {
            let v = ExtWeyl::new(weyl(s), false);
            let nr = v.weyl.rs.nroots();
            let n = v.order();
            for a in 0..n {
                for b in 0..n {
                    let (x, y) = (v.elt(a), v.elt(b));
                    let xy = v.v_mult(x, y);
                    for k in 0..nr {
                        let (s1, k1) = v.ad_on_root(y, k);
                        let (s2, k2) = v.ad_on_root(x, k1);
                        assert_eq!(v.ad_on_root(xy, k), (s1 * s2, k2));
                    }
                }
            }
        }
    }

    #[test]
    fn associativity_rank_two() {
        for s in ["A2", "C2", "G2"] {
            let v = ExtWeyl::new(weyl(s), false);
            let n = v.order();
            for a in 0..n {
                for b in 0..n {
                    let ab = v.mul(a, b);
                    for c in 0..n {
                        assert_eq!(v.mul(ab, c), v.mul(a, v.mul(b, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn smith_examples() {
        let (d, u, w) = smith_normal_form(&[vec![2, 4], vec![6, 8]]);
        assert_eq!(d, vec![2, 4]);
        let a = vec![vec![2, 4], vec![6, 8]];
        let p = matmul(&matmul(&u, &a), &w);
        assert_eq!(p, vec![vec![2, 0], vec![0, 4]]);
        let (d, _, _) = smith_normal_form(&[vec![-4]]);
        assert_eq!(d, vec![4]);
    }

    #[test]
    fn torus_shapes() {
        let t = Torus::build(&weyl("B3"), 5, false).unwrap();
        assert_eq!(t.factors, vec![4, 4, 4]);
        let t = Torus::build(&weyl("C2"), 3, true).unwrap();
        assert_eq!(t.factors, vec![4, 4]);
        assert_eq!(t.order(), 16);
        let t = Torus::build(&weyl("A1"), 3, true).unwrap();
        assert_eq!(t.factors, vec![4]);
        assert!(Torus::build(&weyl("A2"), 3, true).is_err());
    }

    #[test]
    fn torus_action_examples() {
        let w = weyl("A1");
        let t = Torus::build(&w, 7, false).unwrap();
        let x = TorusElt { exps: vec![2] };
        assert_eq!(t.act(0, &x), x);
        // s_α h_α(s) = h_α(s⁻¹)
        assert_eq!(t.act(w.simple[0], &x), TorusElt { exps: vec![4] });
        // A1×A1 factors act independently
        let rs = Arc::new(RootSystem::from_gram(vec![vec![2, 0], vec![0, 2]]).unwrap());
        let w2 = WeylGroup::new(rs).unwrap();
        let t2 = Torus::build(&w2, 5, false).unwrap();
        let y = TorusElt { exps: vec![1, 2] };
        assert_eq!(t2.act(w2.simple[0], &y), TorusElt { exps: vec![3, 2] });
    }

    #[test]
    fn h_embedding() {
        let w = weyl("C2");
        let t = Torus::build(&w, 7, false).unwrap();
        let v = ExtWeyl::new(w.clone(), false);
        assert_eq!(t.embed_h(HElt::default()), t.identity());
        assert_eq!(t.embed_h(HElt { bits: 1 }), TorusElt { exps: vec![3, 0] });
        for h in v.h_elements() {
            let x = t.embed_h(h);
            assert_eq!(t.add(&x, &x), t.identity());
            for g in 0..w.order() {
                assert_eq!(t.act(g, &x), t.embed_h(v.act_h(g, h)));
            }
        }
        let te = Torus::build(&w, 4, false).unwrap();
        assert_eq!(te.embed_h(HElt { bits: 3 }), te.identity());
    }

    #[test]
    fn normalizer_orders() {
        assert_eq!(build_n(weyl("C2"), 3, false).unwrap().order(), 32);
        assert_eq!(build_n(weyl("G2"), 5, false).unwrap().order(), 192);
        assert_eq!(build_n(weyl("C2"), 3, true).unwrap().order(), 128);
    }

    #[test]
    fn center_examples() {
        assert_eq!(center_chars(&weyl("G2"), 7).unwrap().len(), 1);
        assert_eq!(center_chars(&weyl("C2"), 5).unwrap().len(), 2);
        assert_eq!(center_chars(&weyl("B3"), 5).unwrap().len(), 2);
        assert_eq!(center_chars(&weyl("A1"), 4).unwrap().len(), 1);
    }

    #[test]
    fn structure_small() {
        for (s, q) in [("A1", 3), ("C2", 5), ("G2", 4), ("B3", 3)] {
            let rep = structural_check(weyl(s), q, 2000, 7).unwrap();
            assert!(rep.passed(), "{s} {q}: {rep:?}");
        }
        let rep = structural_check(weyl("C2"), 9, 0, 0).unwrap();
        assert_eq!(rep.h_order, 4);
        assert_eq!(rep.triples_checked, 32 * 32 * 32);
    }

    #[test]
    fn normalizer_group_laws() {
        let n = build_n(weyl("C2"), 5, false).unwrap();
        let o = n.order();
        for a in (0..o).step_by(7) {
            assert_eq!(n.mul(a, n.inv(a)), 0);
            for b in (0..o).step_by(11) {
                for c in (0..o).step_by(13) {
                    assert_eq!(n.mul(n.mul(a, b), c), n.mul(a, n.mul(b, c)));
                }
            }
        }
    }
}
