//! Character theory of small finite groups given by element arithmetic:
//! conjugacy classes, linear characters, Dixon–Schneider tables,
//! induction, canonical extensions and Galois action on class functions.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::cyclo::{lcm, Cyclotomic, GaloisElt};
use crate::rootsys::WeylGroup;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharError {
    #[error("group too large for a character table ({0} elements, {1} classes)")]
    TooLarge(usize, usize),
    #[error("character table computation failed: {0}")]
    Failed(String),
    #[error("character does not extend: {0}")]
    NoExtension(String),
    #[error("cache format error: {0}")]
    Cache(String),
}

/// A finite group on the elements 0..order, with 0 the identity.
pub trait FiniteGroup: Send + Sync {
    fn order(&self) -> usize;
    fn mul(&self, a: usize, b: usize) -> usize;
    fn inv(&self, a: usize) -> usize;
    fn generators(&self) -> Vec<usize>;

    fn conj(&self, x: usize, g: usize) -> usize {
        // x g x⁻¹
        self.mul(self.mul(x, g), self.inv(x))
    }

    fn pow(&self, g: usize, mut e: usize) -> usize {
        let mut acc = 0;
        let mut b = g;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }

    fn elt_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }
}

impl FiniteGroup for WeylGroup {
    fn order(&self) -> usize {
        WeylGroup::order(self)
    }
    fn mul(&self, a: usize, b: usize) -> usize {
        WeylGroup::mul(self, a, b)
    }
    fn inv(&self, a: usize) -> usize {
        WeylGroup::inv(self, a)
    }
    fn generators(&self) -> Vec<usize> {
        self.simple.clone()
    }
}

/// A group given by an explicit multiplication table.
#[derive(Clone, Debug)]
pub struct TableGroup {
    n: usize,
    table: Vec<u32>,
    inv: Vec<u32>,
    gens: Vec<usize>,
}

impl TableGroup {
    /// Closes a set of generators under a multiplication on an external type.
    pub fn generate<T: Clone + Eq + std::hash::Hash>(
        identity: T,
        gens: &[T],
        mul: impl Fn(&T, &T) -> T,
    ) -> (Self, Vec<T>) {
        let mut elems = vec![identity.clone()];
        let mut index: HashMap<T, usize> = HashMap::new();
        index.insert(identity, 0);
        let mut k = 0;
        while k < elems.len() {
            for g in gens {
                let x = mul(&elems[k], g);
                if !index.contains_key(&x) {
                    index.insert(x.clone(), elems.len());
                    elems.push(x);
                }
            }
            k += 1;
        }
        let n = elems.len();
        let mut table = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                table[a * n + b] = index[&mul(&elems[a], &elems[b])] as u32;
            }
        }
        let gen_idx: Vec<usize> = gens.iter().map(|g| index[g]).collect();
        (Self::from_table(n, table, gen_idx), elems)
    }

    pub fn from_table(n: usize, table: Vec<u32>, gens: Vec<usize>) -> Self {
        let mut inv = vec![0u32; n];
        for a in 0..n {
            for b in 0..n {
                if table[a * n + b] == 0 {
                    inv[a] = b as u32;
                }
            }
        }
        TableGroup { n, table, inv, gens }
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n * n).map(|k| ((k / n + k % n) % n) as u32).collect();
        Self::from_table(n, table, if n > 1 { vec![1] } else { vec![] })
    }

    /// Abelian group Z/d_1 × … × Z/d_k, mixed radix with the first factor fastest.
    pub fn abelian(factors: &[usize]) -> Self {
        let n: usize = factors.iter().product();
        let digits = |mut x: usize| -> Vec<usize> {
            factors
                .iter()
                .map(|&d| {
                    let r = x % d;
                    x /= d;
                    r
                })
                .collect()
        };
        let undigits = |v: &[usize]| -> usize {
            let mut x = 0;
            for (i, &d) in factors.iter().enumerate().rev() {
                x = x * d + v[i];
            }
            x
        };
        let mut table = vec![0u32; n * n];
        for a in 0..n {
            let da = digits(a);
            for b in 0..n {
                let db = digits(b);
                let s: Vec<usize> =
                    (0..factors.len()).map(|i| (da[i] + db[i]) % factors[i]).collect();
                table[a * n + b] = undigits(&s) as u32;
            }
        }
        let mut gens = Vec::new();
        for i in 0..factors.len() {
            if factors[i] > 1 {
                let mut v = vec![0; factors.len()];
                v[i] = 1;
                gens.push(undigits(&v));
            }
        }
        Self::from_table(n, table, gens)
    }

    /// Dihedral group of order 2m: rotations r^k = k, reflections r^k s = m + k.
    pub fn dihedral(m: usize) -> Self {
        let n = 2 * m;
        let mut table = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                let (ra, sa) = (a % m, a >= m);
                let (rb, sb) = (b % m, b >= m);
                let r = if sa { (ra + m - rb) % m } else { (ra + rb) % m };
                let s = sa ^ sb;
                table[a * n + b] = (r + if s { m } else { 0 }) as u32;
            }
        }
        Self::from_table(n, table, vec![1 % n, m])
    }
}

impl FiniteGroup for TableGroup {
    fn order(&self) -> usize {
        self.n
    }
    fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.n + b] as usize
    }
    fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }
    fn generators(&self) -> Vec<usize> {
        self.gens.clone()
    }
}

/// A subgroup, elements listed in increasing parent index.
#[derive(Clone)]
pub struct Subgroup {
    pub parent: Arc<dyn FiniteGroup>,
    pub elems: Vec<usize>,
    pos: HashMap<usize, usize>,
    gens: Vec<usize>,
}

impl std::fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Subgroup(order {})", self.elems.len())
    }
}

impl Subgroup {
    /// Subgroup from a full, multiplicatively closed element list.
    pub fn from_elements(parent: Arc<dyn FiniteGroup>, mut elems: Vec<usize>) -> Self {
        elems.sort_unstable();
        elems.dedup();
        assert_eq!(elems.first(), Some(&0), "subgroup must contain the identity");
        let pos: HashMap<usize, usize> = elems.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let gens = minimal_generators(&*parent, &elems)
            .into_iter()
            .map(|g| pos[&g])
            .collect();
        Subgroup { parent, elems, pos, gens }
    }

    /// Subgroup generated by parent elements.
    pub fn generated(parent: Arc<dyn FiniteGroup>, gens: &[usize]) -> Self {
        let elems = closure(&*parent, gens);
        Self::from_elements(parent, elems)
    }

    pub fn contains(&self, parent_elt: usize) -> bool {
        self.pos.contains_key(&parent_elt)
    }

    pub fn local(&self, parent_elt: usize) -> Option<usize> {
        self.pos.get(&parent_elt).copied()
    }
}

impl FiniteGroup for Subgroup {
    fn order(&self) -> usize {
        self.elems.len()
    }
    fn mul(&self, a: usize, b: usize) -> usize {
        self.pos[&self.parent.mul(self.elems[a], self.elems[b])]
    }
    fn inv(&self, a: usize) -> usize {
        self.pos[&self.parent.inv(self.elems[a])]
    }
    fn generators(&self) -> Vec<usize> {
        self.gens.clone()
    }
}

/// Elements of the subgroup generated by `gens`, sorted.
pub fn closure(g: &dyn FiniteGroup, gens: &[usize]) -> Vec<usize> {
    let mut seen = HashMap::new();
    seen.insert(0usize, ());
    let mut queue = VecDeque::from([0usize]);
    let mut out = vec![0usize];
    while let Some(x) = queue.pop_front() {
        for &s in gens {
            let y = g.mul(x, s);
            if seen.insert(y, ()).is_none() {
                out.push(y);
                queue.push_back(y);
            }
        }
    }
    out.sort_unstable();
    out
}

/// A small generating set: greedily add the least element not yet generated.
fn minimal_generators(g: &dyn FiniteGroup, elems: &[usize]) -> Vec<usize> {
    let mut gens: Vec<usize> = Vec::new();
    let mut have: std::collections::HashSet<usize> = [0].into_iter().collect();
    for &e in elems {
        if !have.contains(&e) {
            gens.push(e);
            have = closure(g, &gens).into_iter().collect();
            if have.len() == elems.len() {
                break;
            }
        }
    }
    gens
}

// ---------------------------------------------------------------------------
// classes

/// Conjugacy classes in canonical order: by size, then least element index.
#[derive(Clone, Debug)]
pub struct Classes {
    pub group_order: usize,
    pub class_of: Vec<u32>,
    pub reps: Vec<usize>,
    pub sizes: Vec<usize>,
    pub orders: Vec<usize>,
    pub exponent: u64,
    pub inverse_class: Vec<usize>,
}

fn find(parent: &mut [u32], mut x: usize) -> usize {
    while parent[x] as usize != x {
        let p = parent[x] as usize;
        parent[x] = parent[p];
        x = p;
    }
    x
}

impl Classes {
    pub fn compute(g: &dyn FiniteGroup) -> Self {
        let n = g.order();
        let gens = g.generators();
        let gens_inv: Vec<usize> = gens.iter().map(|&s| g.inv(s)).collect();
        let mut uf: Vec<u32> = (0..n as u32).collect();
        for x in 0..n {
            for (&s, &si) in gens.iter().zip(gens_inv.iter()) {
                let y = g.mul(g.mul(s, x), si);
                let (a, b) = (find(&mut uf, x), find(&mut uf, y));
                if a != b {
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    uf[hi] = lo as u32;
                }
            }
        }
        let mut root_members: HashMap<usize, (usize, usize)> = HashMap::new();
        let mut roots = vec![0usize; n];
        for x in 0..n {
            let r = find(&mut uf, x);
            roots[x] = r;
            let e = root_members.entry(r).or_insert((x, 0));
            e.0 = e.0.min(x);
            e.1 += 1;
        }
        let mut cls: Vec<(usize, usize, usize)> =
            root_members.iter().map(|(&r, &(rep, size))| (size, rep, r)).collect();
        cls.sort();
        let root_to_class: HashMap<usize, usize> =
            cls.iter().enumerate().map(|(i, c)| (c.2, i)).collect();
        let class_of: Vec<u32> = roots.iter().map(|r| root_to_class[r] as u32).collect();
        let reps: Vec<usize> = cls.iter().map(|c| c.1).collect();
        let sizes: Vec<usize> = cls.iter().map(|c| c.0).collect();
        let orders: Vec<usize> = reps.iter().map(|&r| g.elt_order(r)).collect();
        let exponent = orders.iter().fold(1u64, |a, &o| lcm(a, o as u64));
        let inverse_class = reps.iter().map(|&r| class_of[g.inv(r)] as usize).collect();
        Classes { group_order: n, class_of, reps, sizes, orders, exponent, inverse_class }
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn class(&self, x: usize) -> usize {
        self.class_of[x] as usize
    }
}

// ---------------------------------------------------------------------------
// class functions

/// Values of a class function, positional against a `Classes` ordering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassFunction {
    pub values: Vec<Cyclotomic>,
}

impl ClassFunction {
    pub fn degree(&self) -> Cyclotomic {
        self.values[0].clone()
    }

    pub fn degree_int(&self) -> i64 {
        self.values[0]
            .to_rational()
            .and_then(|r| r.to_integer().to_i64())
            .expect("degree is an integer")
    }

    pub fn is_rational(&self) -> bool {
        self.values.iter().all(|v| v.is_rational())
    }

    pub fn act(&self, sigma: &GaloisElt) -> ClassFunction {
        ClassFunction { values: self.values.iter().map(|v| sigma.act(v)).collect() }
    }

    pub fn mul(&self, other: &ClassFunction) -> ClassFunction {
        ClassFunction { values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect() }
    }

    pub fn add(&self, other: &ClassFunction) -> ClassFunction {
        ClassFunction { values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() }
    }
}

/// Galois action on a class function: pointwise on values.
pub fn act_classfunction(sigma: &GaloisElt, chi: &ClassFunction) -> ClassFunction {
    chi.act(sigma)
}

pub fn rationality(chi: &ClassFunction) -> bool {
    chi.is_rational()
}

/// ⟨χ, ψ⟩ = (1/|G|) Σ |C| χ(g) conj(ψ(g)).
pub fn inner_product(cl: &Classes, chi: &ClassFunction, psi: &ClassFunction) -> Cyclotomic {
    if let (Some(a), Some(b)) = (int_values(chi), int_values(psi)) {
        // both rational-integer valued
        let mut s = BigInt::zero();
        for k in 0..cl.len() {
            s += BigInt::from(cl.sizes[k] as i64) * BigInt::from(a[k]) * BigInt::from(b[k]);
        }
        return Cyclotomic::from_rational(BigRational::new(s, BigInt::from(cl.group_order as i64)));
    }
    let mut acc = Cyclotomic::zero();
    for k in 0..cl.len() {
        let t = &chi.values[k] * &psi.values[k].conj();
        acc = &acc + &t.scale(&BigRational::from_integer(BigInt::from(cl.sizes[k] as i64)));
    }
    acc.scale(&BigRational::new(BigInt::from(1), BigInt::from(cl.group_order as i64)))
}

fn int_values(chi: &ClassFunction) -> Option<Vec<i64>> {
    chi.values
        .iter()
        .map(|v| {
            let r = v.to_rational()?;
            if r.is_integer() {
                r.to_integer().to_i64()
            } else {
                None
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// linear characters

/// A linear character stored as exponents: χ(g) = ζ_level^{exps[g]}.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearChar {
    pub level: u64,
    pub exps: Vec<u32>,
}

impl LinearChar {
    pub fn value(&self, g: usize) -> Cyclotomic {
        Cyclotomic::zeta(self.level, self.exps[g] as i64)
    }

    pub fn is_trivial(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    pub fn to_class_function(&self, cl: &Classes) -> ClassFunction {
        ClassFunction { values: cl.reps.iter().map(|&r| self.value(r).normalized()).collect() }
    }
}

/// Linear characters of an abelian group given by invariant factors,
/// as exponent vectors (a_i): the generator of Z/d_i goes to ζ_{d_i}^{a_i}.
pub fn linear_chars(factors: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for &d in factors {
        let mut next = Vec::with_capacity(out.len() * d as usize);
        for v in &out {
            for a in 0..d {
                let mut w = v.clone();
                w.push(a);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

/// The derived subgroup, as a sorted element list.
pub fn derived_subgroup(g: &dyn FiniteGroup) -> Vec<usize> {
    let gens = g.generators();
    let mut seeds = Vec::new();
    for &a in &gens {
        for &b in &gens {
            let c = g.mul(g.mul(a, b), g.mul(g.inv(a), g.inv(b)));
            if c != 0 {
                seeds.push(c);
            }
        }
    }
    // normal closure: close under products and conjugation by generators
    let mut set: std::collections::HashSet<usize> = closure(g, &seeds).into_iter().collect();
    loop {
        let mut extra = Vec::new();
        for &x in &set {
            for &s in &gens {
                let y = g.conj(s, x);
                if !set.contains(&y) {
                    extra.push(y);
                }
            }
        }
        if extra.is_empty() {
            break;
        }
        let mut all: Vec<usize> = set.iter().copied().collect();
        all.extend(extra);
        set = closure(g, &all).into_iter().collect();
    }
    let mut v: Vec<usize> = set.into_iter().collect();
    v.sort_unstable();
    v
}

/// All linear characters of G, via the abelianization and iterated extension
/// along generators.
pub fn linear_characters(g: &dyn FiniteGroup) -> Vec<LinearChar> {
    let n = g.order();
    let dsub = derived_subgroup(g);
    // coset labels of G'
    let mut coset = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for x in 0..n {
        if coset[x] == usize::MAX {
            let c = reps.len();
            reps.push(x);
            for &d in &dsub {
                coset[g.mul(x, d)] = c;
            }
        }
    }
    let a_order = reps.len();
    let amul = |a: usize, b: usize| coset[g.mul(reps[a], reps[b])];
    let exponent = {
        let mut e = 1u64;
        for a in 0..a_order {
            let mut x = a;
            let mut k = 1u64;
            while x != 0 {
                x = amul(x, a);
                k += 1;
            }
            e = lcm(e, k);
        }
        e
    };
    // chars on the growing subgroup, as maps coset -> exponent
    let gens: Vec<usize> = g.generators().into_iter().map(|s| coset[s]).collect();
    let mut members: Vec<usize> = vec![0];
    let mut chars: Vec<HashMap<usize, u64>> = vec![[(0usize, 0u64)].into_iter().collect()];
    for &s in &gens {
        let member_set: std::collections::HashSet<usize> = members.iter().copied().collect();
        // minimal m with s^m in the current subgroup
        let mut m = 1;
        let mut p = s;
        while !member_set.contains(&p) {
            p = amul(p, s);
            m += 1;
        }
        if m == 1 {
            continue;
        }
        let mut new_members = Vec::new();
        let mut powers = vec![0usize];
        for j in 1..m {
            powers.push(amul(powers[j - 1], s));
        }
        for &h in &members {
            for &sp in &powers {
                new_members.push(amul(h, sp));
            }
        }
        let mut next = Vec::new();
        for chi in &chars {
            let target = chi[&p];
            // solve m·x ≡ target (mod exponent)
            for x in 0..exponent {
                if (m as u64 * x) % exponent == target {
                    let mut ext = HashMap::new();
                    for &h in &members {
                        for (j, &sp) in powers.iter().enumerate() {
                            ext.insert(amul(h, sp), (chi[&h] + j as u64 * x) % exponent);
                        }
                    }
                    next.push(ext);
                }
            }
        }
        chars = next;
        members = new_members;
    }
    assert_eq!(members.len(), a_order, "generators must generate the abelianization");
    let mut out: Vec<LinearChar> = chars
        .into_iter()
        .map(|chi| LinearChar {
            level: exponent,
            exps: (0..n).map(|x| chi[&coset[x]] as u32).collect(),
        })
        .collect();
    out.sort_by(|a, b| a.exps.cmp(&b.exps));
    out
}

// ---------------------------------------------------------------------------
// modular arithmetic helpers for Dixon–Schneider

pub(crate) fn mulm(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn powm(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mulm(r, b, p);
        }
        b = mulm(b, b, p);
        e >>= 1;
    }
    r
}

pub(crate) fn invm(a: u64, p: u64) -> u64 {
    powm(a, p - 2, p)
}

fn primitive_root(p: u64) -> u64 {
    let fs = crate::cyclo::factorize(p - 1);
    (2..p).find(|&g| fs.iter().all(|&(f, _)| powm(g, (p - 1) / f, p) != 1)).unwrap()
}

/// Polynomials over F_p, low degree first, trimmed.
pub(crate) mod polyp {
    use super::{invm, mulm};

    pub fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.len() > 1 && *a.last().unwrap() == 0 {
            a.pop();
        }
        a
    }

    pub fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        trim(
            (0..n)
                .map(|i| {
                    let x = a.get(i).copied().unwrap_or(0);
                    let y = b.get(i).copied().unwrap_or(0);
                    (x + p - y) % p
                })
                .collect(),
        )
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + mulm(x, y, p)) % p;
            }
        }
        trim(out)
    }

    pub fn rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut r = trim(a.to_vec());
        let db = b.len() - 1;
        let inv_lead = invm(b[db], p);
        while r.len() > db && !(r.len() == 1 && r[0] == 0) {
            let dr = r.len() - 1;
            let c = mulm(r[dr], inv_lead, p);
            for i in 0..=db {
                let t = mulm(c, b[i], p);
                r[dr - db + i] = (r[dr - db + i] + p - t) % p;
            }
            r = trim(r);
            if dr == 0 {
                break;
            }
        }
        r
    }

    pub fn is_zero(a: &[u64]) -> bool {
        a.len() == 1 && a[0] == 0
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut x = trim(a.to_vec());
        let mut y = trim(b.to_vec());
        while !is_zero(&y) {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        let inv = invm(*x.last().unwrap(), p);
        x.iter().map(|&c| mulm(c, inv, p)).collect()
    }

    pub fn powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
        let mut r = vec![1u64];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                r = rem(&mul(&r, &b, p), m, p);
            }
            b = rem(&mul(&b, &b, p), m, p);
            e >>= 1;
        }
        r
    }

    /// Distinct roots of a polynomial that splits into linear factors.
    pub fn roots(f: &[u64], p: u64) -> Vec<u64> {
        let f = trim(f.to_vec());
        // squarefree part of the split part: gcd(f, x^p - x)
        let xp = powmod(&[0, 1], p, &f, p);
        let g = gcd(&f, &sub(&xp, &[0, 1], p), p);
        let mut out = Vec::new();
        split(&g, p, 1, &mut out);
        out.sort_unstable();
        out
    }

    fn split(f: &[u64], p: u64, mut seed: u64, out: &mut Vec<u64>) {
        let d = f.len() - 1;
        if d == 0 {
            return;
        }
        if d == 1 {
            // f = c1 x + c0
            let r = mulm(p - f[0], invm(f[1], p), p);
            out.push(r);
            return;
        }
        loop {
            seed += 1;
            let a = seed % p;
            let h = powmod(&[a, 1], (p - 1) / 2, f, p);
            let g = gcd(f, &sub(&h, &[1], p), p);
            let dg = g.len() - 1;
            if dg > 0 && dg < d {
                let q = div(f, &g, p);
                split(&g, p, seed, out);
                split(&q, p, seed + 7919, out);
                return;
            }
        }
    }

    pub fn div(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut r = a.to_vec();
        let db = b.len() - 1;
        let inv_lead = invm(b[db], p);
        let dq = r.len() - 1 - db;
        let mut q = vec![0u64; dq + 1];
        for k in (0..=dq).rev() {
            let c = mulm(r[k + db], inv_lead, p);
            q[k] = c;
            for i in 0..=db {
                let t = mulm(c, b[i], p);
                r[k + i] = (r[k + i] + p - t) % p;
            }
        }
        trim(q)
    }
}

/// Characteristic polynomial of a square matrix over F_p (Hessenberg reduction).
pub(crate) fn charpoly_mod(m: &[Vec<u64>], p: u64) -> Vec<u64> {
    let n = m.len();
    let mut h: Vec<Vec<u64>> = m.to_vec();
    // reduce to upper Hessenberg form by similarity
    for j in 0..n.saturating_sub(2) {
        let Some(piv) = (j + 1..n).find(|&i| h[i][j] != 0) else { continue };
        if piv != j + 1 {
            h.swap(piv, j + 1);
            for row in h.iter_mut() {
                row.swap(piv, j + 1);
            }
        }
        let inv = invm(h[j + 1][j], p);
        for i in j + 2..n {
            let f = mulm(h[i][j], inv, p);
            if f == 0 {
                continue;
            }
            for c in 0..n {
                let t = mulm(f, h[j + 1][c], p);
                h[i][c] = (h[i][c] + p - t) % p;
            }
            for r in 0..n {
                let t = mulm(f, h[r][i], p);
                h[r][j + 1] = (h[r][j + 1] + t) % p;
            }
        }
    }
    // recurrence for characteristic polynomials of leading blocks
    let mut polys: Vec<Vec<u64>> = vec![vec![1]];
    for k in 0..n {
        // p_{k+1} = (x - h_kk) p_k - sum_{i<k} h_ik (prod_{j=i+1..k} h_{j,j-1}) p_i
        let mut next = polyp::mul(&[p - h[k][k] % p, 1], &polys[k], p);
        let mut prod = 1u64;
        for i in (0..k).rev() {
            prod = mulm(prod, h[i + 1][i], p);
            let c = mulm(prod, h[i][k], p);
            if c != 0 {
                let t: Vec<u64> = polys[i].iter().map(|&x| mulm(x, c, p)).collect();
                next = polyp::sub(&next, &t, p);
            }
        }
        polys.push(next);
    }
    polys.pop().unwrap()
}

/// Row-reduced basis of the null space of a matrix over F_p.
fn nullspace_mod(m: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut a: Vec<Vec<u64>> = m.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| a[i][c] != 0) else { continue };
        a.swap(r, pr);
        let inv = invm(a[r][c], p);
        for x in a[r].iter_mut() {
            *x = mulm(*x, inv, p);
        }
        for i in 0..rows {
            if i != r && a[i][c] != 0 {
                let f = a[i][c];
                for j in 0..cols {
                    let t = mulm(f, a[r][j], p);
                    a[i][j] = (a[i][j] + p - t) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u64; cols];
            v[f] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - a[i][f]) % p;
            }
            v
        })
        .collect()
}

// ---------------------------------------------------------------------------
// character tables

pub const MAX_DIXON_ORDER: usize = 20000;
pub const MAX_DIXON_CLASSES: usize = 60;

#[derive(Clone, Debug)]
pub struct CharTable {
    pub classes: Arc<Classes>,
    pub irr: Vec<ClassFunction>,
}

impl CharTable {
    pub fn degrees(&self) -> Vec<i64> {
        self.irr.iter().map(|c| c.degree_int()).collect()
    }

    pub fn is_rational(&self) -> bool {
        self.irr.iter().all(|c| c.is_rational())
    }

    /// Exact row orthogonality and Σ deg² = |G|.
    pub fn verify(&self) -> bool {
        let cl = &self.classes;
        let k = self.irr.len();
        if k != cl.len() {
            return false;
        }
        let s: i64 = self.degrees().iter().map(|d| d * d).sum();
        if s as usize != cl.group_order {
            return false;
        }
        for i in 0..k {
            for j in i..k {
                let ip = inner_product(cl, &self.irr[i], &self.irr[j]);
                let expect = if i == j { Cyclotomic::one() } else { Cyclotomic::zero() };
                if ip != expect {
                    return false;
                }
            }
        }
        true
    }
}

/// Exact character table by the Dixon–Schneider method: common eigenspaces
/// of the class matrices are split modulo a prime p ≡ 1 (mod exp G), and the
/// values are reconstructed exactly from eigenvalue multiplicities.
pub fn dixon_table(g: &dyn FiniteGroup) -> Result<CharTable, CharError> {
    let n = g.order();
    if n > MAX_DIXON_ORDER {
        return Err(CharError::TooLarge(n, 0));
    }
    let cl = Classes::compute(g);
    let k = cl.len();
    if k > MAX_DIXON_CLASSES {
        return Err(CharError::TooLarge(n, k));
    }
    let e = cl.exponent;
    // prime p ≡ 1 mod e, comfortably larger than |G|
    let mut p = (n as u64 * 4 / e + 1) * e + 1;
    while !crate::cyclo::is_prime(p) {
        p += e;
    }
    // class structure constants: a[i][j][l] = #{x ∈ C_i : x⁻¹ g_l ∈ C_j}
    let mut a = vec![0u64; k * k * k];
    for l in 0..k {
        let gl = cl.reps[l];
        for x in 0..n {
            let i = cl.class(x);
            let j = cl.class(g.mul(g.inv(x), gl));
            a[(i * k + j) * k + l] += 1;
        }
    }
    let mat = |i: usize| -> Vec<Vec<u64>> {
        (0..k).map(|j| (0..k).map(|l| a[(i * k + j) * k + l] % p).collect()).collect()
    };
    // split the space F_p^k into common eigenspaces (column vectors)
    let mut spaces: Vec<Vec<Vec<u64>>> = vec![(0..k)
        .map(|i| {
            let mut v = vec![0u64; k];
            v[i] = 1;
            v
        })
        .collect()];
    for ci in 1..k {
        if spaces.iter().all(|s| s.len() == 1) {
            break;
        }
        let m = mat(ci);
        let mut next = Vec::new();
        for space in spaces {
            if space.len() == 1 {
                next.push(space);
                continue;
            }
            next.extend(split_space(&m, &space, p)?);
        }
        spaces = next;
    }
    if spaces.iter().any(|s| s.len() != 1) {
        return Err(CharError::Failed("class matrices do not separate characters".into()));
    }
    // modular character values
    let inv_sizes: Vec<u64> = cl.sizes.iter().map(|&s| invm(s as u64 % p, p)).collect();
    let mut modular: Vec<(u64, Vec<u64>)> = Vec::new();
    for space in &spaces {
        let v = &space[0];
        if v[0] == 0 {
            return Err(CharError::Failed("eigenvector vanishes at the identity".into()));
        }
        let inv0 = invm(v[0], p);
        let w: Vec<u64> = v.iter().map(|&x| mulm(x, inv0, p)).collect();
        let mut s = 0u64;
        for l in 0..k {
            s = (s + mulm(mulm(w[l], w[cl.inverse_class[l]], p), inv_sizes[l], p)) % p;
        }
        let d2 = mulm(n as u64 % p, invm(s, p), p);
        let d = (1..=((n as f64).sqrt() as u64 + 1))
            .find(|&d| d * d % p == d2)
            .ok_or_else(|| CharError::Failed("degree not recovered".into()))?;
        let vals: Vec<u64> = (0..k).map(|l| mulm(mulm(w[l], d, p), inv_sizes[l], p)).collect();
        modular.push((d, vals));
    }
    // exact reconstruction from power maps
    let z = powm(primitive_root(p), (p - 1) / e, p);
    let mut powclass: Vec<Vec<usize>> = Vec::with_capacity(k);
    for l in 0..k {
        let o = cl.orders[l];
        let mut pc = Vec::with_capacity(o);
        let mut x = 0usize;
        for _ in 0..o {
            pc.push(cl.class(x));
            x = g.mul(x, cl.reps[l]);
        }
        powclass.push(pc);
    }
    let mut irr = Vec::with_capacity(k);
    for (d, vals) in &modular {
        let mut values = Vec::with_capacity(k);
        for l in 0..k {
            let o = cl.orders[l] as u64;
            let zo = powm(z, e / o, p);
            let inv_o = invm(o % p, p);
            let mut weights = vec![0i64; o as usize];
            for s in 0..o {
                let mut acc = 0u64;
                for j in 0..o {
                    let zz = powm(zo, (o - (j * s) % o) % o, p);
                    acc = (acc + mulm(vals[powclass[l][j as usize]], zz, p)) % p;
                }
                let ms = mulm(acc, inv_o, p);
                if ms > *d {
                    return Err(CharError::Failed("eigenvalue multiplicity out of range".into()));
                }
                weights[s as usize] = ms as i64;
            }
            values.push(Cyclotomic::from_exponent_weights(o, &weights).normalized());
        }
        irr.push(ClassFunction { values });
    }
    irr.sort_by(|a, b| {
        let da = a.degree_int();
        let db = b.degree_int();
        let triv_a = a.values.iter().all(|v| *v == Cyclotomic::one());
        let triv_b = b.values.iter().all(|v| *v == Cyclotomic::one());
        triv_b
            .cmp(&triv_a)
            .then(da.cmp(&db))
            .then_with(|| value_key(a).cmp(&value_key(b)))
    });
    let table = CharTable { classes: Arc::new(cl), irr };
    if !table.verify() {
        return Err(CharError::Failed("orthogonality check failed".into()));
    }
    Ok(table)
}

fn value_key(c: &ClassFunction) -> Vec<String> {
    c.values.iter().map(|v| v.normalized().to_string()).collect()
}

/// Splits an invariant subspace (given by basis columns) into eigenspaces of m.
fn split_space(
    m: &[Vec<u64>],
    space: &[Vec<u64>],
    p: u64,
) -> Result<Vec<Vec<Vec<u64>>>, CharError> {
    let k = m.len();
    let d = space.len();
    // images m·b_t expressed in the basis: solve B c = m b
    let images: Vec<Vec<u64>> = space
        .iter()
        .map(|b| (0..k).map(|r| (0..k).fold(0u64, |acc, c| (acc + mulm(m[r][c], b[c], p)) % p)).collect())
        .collect();
    let coords = solve_in_basis(space, &images, p)
        .ok_or_else(|| CharError::Failed("subspace not invariant".into()))?;
    // restricted matrix R with R[s][t] = coefficient of b_s in m b_t
    let rmat: Vec<Vec<u64>> = (0..d).map(|s| (0..d).map(|t| coords[t][s]).collect()).collect();
    let cp = charpoly_mod(&rmat, p);
    let roots = polyp::roots(&cp, p);
    if roots.len() <= 1 {
        return Ok(vec![space.to_vec()]);
    }
    let mut out = Vec::new();
    let mut total = 0;
    for lam in roots {
        let shifted: Vec<Vec<u64>> = (0..d)
            .map(|s| (0..d).map(|t| if s == t { (rmat[s][t] + p - lam) % p } else { rmat[s][t] }).collect())
            .collect();
        let ns = nullspace_mod(&shifted, p);
        total += ns.len();
        let vecs: Vec<Vec<u64>> = ns
            .iter()
            .map(|c| {
                (0..k)
                    .map(|r| (0..d).fold(0u64, |acc, t| (acc + mulm(c[t], space[t][r], p)) % p))
                    .collect()
            })
            .collect();
        out.push(vecs);
    }
    if total != d {
        return Err(CharError::Failed("restricted class matrix not diagonalizable".into()));
    }
    Ok(out)
}

/// Coordinates of each target vector in the span of `basis`.
fn solve_in_basis(basis: &[Vec<u64>], targets: &[Vec<u64>], p: u64) -> Option<Vec<Vec<u64>>> {
    let d = basis.len();
    let k = basis[0].len();
    // augmented system: k rows, d unknowns, one rhs per target
    let nt = targets.len();
    let mut a: Vec<Vec<u64>> = (0..k)
        .map(|r| {
            let mut row: Vec<u64> = (0..d).map(|t| basis[t][r]).collect();
            row.extend(targets.iter().map(|v| v[r]));
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..d {
        let pr = (r..k).find(|&i| a[i][c] != 0)?;
        a.swap(r, pr);
        let inv = invm(a[r][c], p);
        for x in a[r].iter_mut() {
            *x = mulm(*x, inv, p);
        }
        for i in 0..k {
            if i != r && a[i][c] != 0 {
                let f = a[i][c];
                for j in 0..d + nt {
                    let t = mulm(f, a[r][j], p);
                    a[i][j] = (a[i][j] + p - t) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    for row in a.iter().skip(d) {
        if row[d..].iter().any(|&x| x != 0) {
            return None;
        }
    }
    Some((0..nt).map(|t| (0..d).map(|s| a[s][d + t]).collect()).collect())
}

fn table_cache() -> &'static Mutex<HashMap<String, Arc<CharTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<String, Arc<CharTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Memoized `dixon_table`, keyed by a caller-chosen descriptor.
pub fn dixon_table_cached(key: &str, g: &dyn FiniteGroup) -> Result<Arc<CharTable>, CharError> {
    if let Some(t) = table_cache().lock().unwrap().get(key) {
        return Ok(t.clone());
    }
    let t = Arc::new(dixon_table(g)?);
    table_cache().lock().unwrap().insert(key.to_string(), t.clone());
    Ok(t)
}

// ---------------------------------------------------------------------------
// induction and restriction

/// Restriction of a class function of G to a subgroup K.
pub fn restrict(
    chi: &ClassFunction,
    g_classes: &Classes,
    k: &Subgroup,
    k_classes: &Classes,
) -> ClassFunction {
    ClassFunction {
        values: k_classes
            .reps
            .iter()
            .map(|&r| chi.values[g_classes.class(k.elems[r])].clone())
            .collect(),
    }
}

/// Ind_K^G ψ by the Frobenius formula.
pub fn induce(
    psi: &ClassFunction,
    k: &Subgroup,
    k_classes: &Classes,
    g_classes: &Classes,
) -> ClassFunction {
    let mut sums: Vec<Cyclotomic> = vec![Cyclotomic::zero(); g_classes.len()];
    for (c, &rep) in k_classes.reps.iter().enumerate() {
        let gc = g_classes.class(k.elems[rep]);
        let t = psi.values[c].scale(&BigRational::from_integer(BigInt::from(k_classes.sizes[c] as i64)));
        sums[gc] = &sums[gc] + &t;
    }
    let korder = k.elems.len() as i64;
    let gorder = g_classes.group_order as i64;
    ClassFunction {
        values: sums
            .into_iter()
            .enumerate()
            .map(|(l, s)| {
                // |C_G(g)| / |K| = |G| / (|C_l| |K|)
                let f = BigRational::new(
                    BigInt::from(gorder),
                    BigInt::from(g_classes.sizes[l] as i64 * korder),
                );
                s.scale(&f).normalized()
            })
            .collect(),
    }
}

/// The extension Ξ(θ) of a character θ of a normal subgroup R to G = R⋊C
/// (C elementary abelian of exponent 2, generated by `complement_gens`) whose
/// determinant takes the value 1 on each complement generator.
pub fn det_canonical_extension(
    g_table: &CharTable,
    r: &Subgroup,
    r_classes: &Classes,
    theta: &ClassFunction,
    complement_gens: &[usize],
) -> Result<ClassFunction, CharError> {
    let gcl = &g_table.classes;
    let mut found = Vec::new();
    for chi in &g_table.irr {
        if chi.degree() != theta.degree() {
            continue;
        }
        if restrict(chi, gcl, r, r_classes) != *theta {
            continue;
        }
        let d = chi.degree_int();
        let ok = complement_gens.iter().all(|&c| {
            let v = chi.values[gcl.class(c)]
                .to_rational()
                .and_then(|x| x.to_integer().to_i64());
            // eigenvalue −1 multiplicity (d − χ(c))/2 must be even
            matches!(v, Some(x) if ((d - x) / 2) % 2 == 0)
        });
        if ok {
            found.push(chi.clone());
        }
    }
    match found.len() {
        1 => Ok(found.pop().unwrap()),
        0 => Err(CharError::NoExtension("no extension with the canonical determinant".into())),
        _ => Err(CharError::NoExtension("canonical extension not unique".into())),
    }
}

// ---------------------------------------------------------------------------
// text cache

/// A character table as stored in the portable text cache.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CachedTable {
    pub descriptor: String,
    pub q: u64,
    pub order: usize,
    pub sizes: Vec<usize>,
    pub reps: Vec<usize>,
    pub orders: Vec<usize>,
    pub irr: Vec<Vec<Cyclotomic>>,
}

impl CachedTable {
    pub fn from_table(descriptor: &str, q: u64, t: &CharTable) -> Self {
        CachedTable {
            descriptor: descriptor.to_string(),
            q,
            order: t.classes.group_order,
            sizes: t.classes.sizes.clone(),
            reps: t.classes.reps.clone(),
            orders: t.classes.orders.clone(),
            irr: t.irr.iter().map(|c| c.values.clone()).collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        writeln!(s, "chartable v1").unwrap();
        writeln!(s, "group {}", self.descriptor).unwrap();
        writeln!(s, "q {}", self.q).unwrap();
        writeln!(s, "order {}", self.order).unwrap();
        writeln!(s, "sizes {}", join(&self.sizes)).unwrap();
        writeln!(s, "reps {}", join(&self.reps)).unwrap();
        writeln!(s, "orders {}", join(&self.orders)).unwrap();
        for row in &self.irr {
            let vals: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(s, "chi {}", vals.join(" ; ")).unwrap();
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, CharError> {
        let err = |m: &str| CharError::Cache(m.to_string());
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some("chartable v1") {
            return Err(err("missing header"));
        }
        let mut field = |name: &str| -> Result<String, CharError> {
            let l = lines.next().ok_or_else(|| err("truncated"))?;
            let rest = l
                .strip_prefix(name)
                .and_then(|r| r.strip_prefix(' ').or(if r.is_empty() { Some("") } else { None }))
                .ok_or_else(|| err(&format!("expected {name}")))?;
            Ok(rest.trim().to_string())
        };
        let descriptor = field("group")?;
        let q: u64 = field("q")?.parse().map_err(|_| err("bad q"))?;
        let order: usize = field("order")?.parse().map_err(|_| err("bad order"))?;
        let nums = |s: String| -> Result<Vec<usize>, CharError> {
            s.split_whitespace().map(|x| x.parse().map_err(|_| err("bad number"))).collect()
        };
        let sizes = nums(field("sizes")?)?;
        let reps = nums(field("reps")?)?;
        let orders = nums(field("orders")?)?;
        let k = sizes.len();
        if reps.len() != k || orders.len() != k {
            return Err(err("class data length mismatch"));
        }
        if sizes.iter().try_fold(0usize, |a, &s| a.checked_add(s)) != Some(order) {
            return Err(err("class sizes do not sum to the order"));
        }
        let mut irr = Vec::new();
        for l in lines {
            let rest = l.strip_prefix("chi ").ok_or_else(|| err("expected chi row"))?;
            let row: Vec<Cyclotomic> = rest
                .split(" ; ")
                .map(|v| v.parse().map_err(|e| CharError::Cache(format!("{e}"))))
                .collect::<Result<_, _>>()?;
            if row.len() != k {
                return Err(err("row length mismatch"));
            }
            irr.push(row);
        }
        if irr.len() != k {
            return Err(err("row count differs from class count"));
        }
        Ok(CachedTable { descriptor, q, order, sizes, reps, orders, irr })
    }

    /// Accepts the cached table for a group if its class data matches.
    pub fn into_table(self, cl: Arc<Classes>) -> Result<CharTable, CharError> {
        if cl.sizes != self.sizes || cl.reps != self.reps || cl.group_order != self.order {
            return Err(CharError::Cache("class data does not match the group".into()));
        }
        let t = CharTable { classes: cl, irr: self.irr.into_iter().map(|values| ClassFunction { values }).collect() };
        if !t.verify() {
            return Err(CharError::Cache("cached table fails orthogonality".into()));
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::RootSystem;

    fn weyl(s: &str) -> Arc<WeylGroup> {
        Arc::new(WeylGroup::new(Arc::new(RootSystem::build_str(s).unwrap())).unwrap())
    }

    #[test]
    fn linear_char_counts() {
        assert_eq!(linear_chars(&[2]).len(), 2);
        assert_eq!(linear_chars(&[4, 4]).len(), 16);
        assert_eq!(linear_chars(&[]).len(), 1);
        let g = TableGroup::abelian(&[4, 4]);
        assert_eq!(linear_characters(&g).len(), 16);
        assert_eq!(linear_characters(&TableGroup::cyclic(1)).len(), 1);
        // dihedral of order 8 has 4 linear characters
        assert_eq!(linear_characters(&TableGroup::dihedral(4)).len(), 4);
        assert_eq!(linear_characters(&TableGroup::dihedral(3)).len(), 2);
    }

    #[test]
    fn dixon_weyl_groups() {
        let t = dixon_table(&*weyl("C2")).unwrap();
        assert_eq!(t.irr.len(), 5);
        let t = dixon_table(&*weyl("G2")).unwrap();
        assert_eq!(t.irr.len(), 6);
        let t = dixon_table(&*weyl("B3")).unwrap();
        assert_eq!(t.irr.len(), 10);
        assert!(t.is_rational());
        let t = dixon_table(&*weyl("B4")).unwrap();
        assert_eq!(t.irr.len(), 20);
        assert!(t.is_rational());
    }

    #[test]
    fn dixon_irrational_groups() {
        // Z/5 has four non-rational characters; Z/3 ⋊ Z/4 has values involving i
        let t = dixon_table(&TableGroup::cyclic(5)).unwrap();
        assert_eq!(t.irr.iter().filter(|c| !c.is_rational()).count(), 4);
        let (g, _) = TableGroup::generate((0u8, 0u8), &[(1, 0), (0, 1)], |a, b| {
            // (x, y)(x', y') with y acting on Z/3 by inversion when odd
            let x = if a.1 % 2 == 1 { (a.0 + 3 - b.0) % 3 } else { (a.0 + b.0) % 3 };
            (x, (a.1 + b.1) % 4)
        });
        assert_eq!(g.order(), 12);
        let t = dixon_table(&g).unwrap();
        assert_eq!(t.irr.len(), 6);
        assert!(!t.is_rational());
        assert!(t.verify());
    }

    #[test]
    fn induction_examples() {
        let w = weyl("C2");
        let parent: Arc<dyn FiniteGroup> = w.clone();
        // index-2 subgroup generated by s1 and s2 s1 s2
        let s1 = w.simple[0];
        let s2 = w.simple[1];
        let k = Subgroup::generated(parent.clone(), &[s1, w.mul(w.mul(s2, s1), s2)]);
        assert_eq!(k.order(), 4);
        let kcl = Classes::compute(&k);
        let gcl = Classes::compute(&*w);
        let triv = ClassFunction { values: vec![Cyclotomic::one(); kcl.len()] };
        let ind = induce(&triv, &k, &kcl, &gcl);
        assert_eq!(ind.degree_int(), 2);
        let gt = dixon_table(&*w).unwrap();
        let mults: Vec<Cyclotomic> =
            gt.irr.iter().map(|c| inner_product(&gcl, &ind, c)).collect();
        assert_eq!(mults.iter().filter(|m| **m == Cyclotomic::one()).count(), 2);
        assert_eq!(mults[0], Cyclotomic::one());
    }

    #[test]
    fn galois_on_class_functions() {
        let t = dixon_table(&TableGroup::cyclic(4)).unwrap();
        let id = GaloisElt::identity(4);
        for c in &t.irr {
            assert_eq!(act_classfunction(&id, c), *c);
        }
        let conj = GaloisElt::new(4, 3).unwrap();
        let faithful: Vec<&ClassFunction> =
            t.irr.iter().filter(|c| c.values.iter().any(|v| *v == Cyclotomic::zeta(4, 1))).collect();
        assert_eq!(faithful.len(), 2);
        let image = act_classfunction(&conj, faithful[0]);
        assert_eq!(image, *faithful[1]);
        let w = dixon_table(&*weyl("B3")).unwrap();
        let sigma = GaloisElt::new(8, 3).unwrap();
        for c in &w.irr {
            assert!(rationality(c));
            assert_eq!(act_classfunction(&sigma, c), *c);
        }
    }

    #[test]
    fn canonical_extension_examples() {
        // R = Z/3 inside S3 = R ⋊ ⟨s⟩
        let g = Arc::new(TableGroup::dihedral(3));
        let gt = dixon_table(&*g).unwrap();
        let r = Subgroup::generated(g.clone(), &[1]);
        let rcl = Classes::compute(&r);
        let triv = ClassFunction { values: vec![Cyclotomic::one(); rcl.len()] };
        let ext = det_canonical_extension(&gt, &r, &rcl, &triv, &[3]).unwrap();
        assert!(ext.values.iter().all(|v| *v == Cyclotomic::one()));
        // linear θ on R = ⟨r²⟩ ≅ Z/2 inside D8, complement ⟨s⟩
        let g = Arc::new(TableGroup::dihedral(4));
        let gt = dixon_table(&*g).unwrap();
        let r = Subgroup::generated(g.clone(), &[1]);
        let rcl = Classes::compute(&r);
        let rt = dixon_table(&r).unwrap();
        for theta in &rt.irr {
            let invariant = (0..rcl.len()).all(|c| {
                let x = r.elems[rcl.reps[c]];
                theta.values[rcl.class(r.local(g.conj(4, x)).unwrap())] == theta.values[c]
            });
            if !invariant || theta.degree_int() != 1 {
                continue;
            }
            let ext = det_canonical_extension(&gt, &r, &rcl, theta, &[4]).unwrap();
            assert_eq!(ext.values[gt.classes.class(4)], Cyclotomic::one());
            let sigma = GaloisElt::new(4, 3).unwrap();
            let ext_sigma = det_canonical_extension(&gt, &r, &rcl, &theta.act(&sigma), &[4]).unwrap();
            assert_eq!(ext.act(&sigma), ext_sigma);
        }
    }

    #[test]
    fn cache_roundtrip() {
        let t = dixon_table(&TableGroup::cyclic(5)).unwrap();
        let c = CachedTable::from_table("Z5", 0, &t);
        let text = c.to_text();
        let back = CachedTable::parse(&text).unwrap();
        assert_eq!(back, c);
        let t2 = back.into_table(t.classes.clone()).unwrap();
        assert_eq!(t2.irr, t.irr);
        assert!(CachedTable::parse("chartable v1\ngroup x\n").is_err());
        assert!(CachedTable::parse("nonsense").is_err());
    }
}
