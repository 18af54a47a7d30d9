//! Root systems of rank at most 4, Weyl groups as permutation groups on the
//! roots, canonical reduced words, and Chevalley structure constants.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RootError {
    #[error("unsupported root system label {0}")]
    Unsupported(String),
    #[error("Weyl group too large ({0} > {1})")]
    TooLarge(usize, usize),
    #[error("alpha + beta is not a root")]
    NotARootSum,
    #[error("structure constants inconsistent: {0}")]
    Inconsistent(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    G,
    F,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CartanType {
    pub family: Family,
    pub rank: usize,
}

impl fmt::Display for CartanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.family, self.rank)
    }
}

impl FromStr for CartanType {
    type Err = RootError;
    fn from_str(s: &str) -> Result<Self, RootError> {
        let s = s.trim();
        let bad = || RootError::Unsupported(s.to_string());
        let mut chars = s.chars();
        let fam = match chars.next().ok_or_else(bad)?.to_ascii_uppercase() {
            'A' => Family::A,
            'B' => Family::B,
            'C' => Family::C,
            'D' => Family::D,
            'G' => Family::G,
            'F' => Family::F,
            _ => return Err(bad()),
        };
        let rank: usize = chars.as_str().parse().map_err(|_| bad())?;
        let ok = match fam {
            Family::A => (1..=4).contains(&rank),
            Family::B | Family::C => (2..=4).contains(&rank),
            Family::D => rank == 4,
            Family::G => rank == 2,
            Family::F => rank == 4,
        };
        if !ok {
            return Err(bad());
        }
        Ok(CartanType { family: fam, rank })
    }
}

/// Euclidean simple roots (integral, possibly rescaled).
fn euclidean_simple_roots(t: CartanType) -> Vec<Vec<i64>> {
    let n = t.rank;
    let unit = |dim: usize, i: usize| -> Vec<i64> {
        let mut v = vec![0; dim];
        v[i] = 1;
        v
    };
    let diff = |dim: usize, i: usize, j: usize| -> Vec<i64> {
        let mut v = unit(dim, i);
        v[j] -= 1;
        v
    };
    match t.family {
        Family::A => (0..n).map(|i| diff(n + 1, i, i + 1)).collect(),
        Family::B => {
            let mut v: Vec<_> = (0..n - 1).map(|i| diff(n, i, i + 1)).collect();
            v.push(unit(n, n - 1));
            v
        }
        Family::C => {
            let mut v: Vec<_> = (0..n - 1).map(|i| diff(n, i, i + 1)).collect();
            let mut last = vec![0; n];
            last[n - 1] = 2;
            v.push(last);
            v
        }
        Family::D => {
            let mut v: Vec<_> = (0..n - 1).map(|i| diff(n, i, i + 1)).collect();
            let mut last = vec![0; n];
            last[n - 2] = 1;
            last[n - 1] = 1;
            v.push(last);
            v
        }
        Family::G => vec![vec![1, -1, 0], vec![-2, 1, 1]],
        Family::F => vec![
            vec![0, 2, -2, 0],
            vec![0, 0, 2, -2],
            vec![0, 0, 0, 2],
            vec![1, -1, -1, -1],
        ],
    }
}

/// A crystallographic root system, roots stored in the simple-root basis.
#[derive(Clone, Debug)]
pub struct RootSystem {
    pub label: Option<CartanType>,
    pub rank: usize,
    /// (α_i, α_j) on simple roots, integral after rescaling
    pub gram: Vec<Vec<i64>>,
    /// cartan[i][j] = ⟨α_i, α_j∨⟩
    pub cartan: Vec<Vec<i64>>,
    /// positive roots first (height, then larger coordinate vector first), then their negatives
    pub roots: Vec<Vec<i64>>,
    pub npos: usize,
    pub norms: Vec<i64>,
    /// coroot of each root in the simple-coroot basis
    pub coroots: Vec<Vec<i64>>,
    pub neg: Vec<usize>,
    /// refl_simple[i][k] = index of s_i(root k)
    pub refl_simple: Vec<Vec<usize>>,
    index: HashMap<Vec<i64>, usize>,
    /// structure constants N_{a,b}; 0 where a+b is not a root
    structure: Vec<i64>,
    /// Ad(n_{α_i}(−1)) e_k = sign · e_{s_i k}
    pub simple_ad_sign: Vec<Vec<i8>>,
}

impl RootSystem {
    pub fn build(t: CartanType) -> Result<Self, RootError> {
        let simple = euclidean_simple_roots(t);
        let r = simple.len();
        let gram: Vec<Vec<i64>> = (0..r)
            .map(|i| (0..r).map(|j| dot(&simple[i], &simple[j])).collect())
            .collect();
        let mut rs = Self::from_gram(gram)?;
        rs.label = Some(t);
        Ok(rs)
    }

    pub fn build_str(s: &str) -> Result<Self, RootError> {
        Self::build(s.parse()?)
    }

    /// Builds the root system whose simple roots have the given Gram matrix.
    pub fn from_gram(gram: Vec<Vec<i64>>) -> Result<Self, RootError> {
        let r = gram.len();
        let mut cartan = vec![vec![0i64; r]; r];
        for i in 0..r {
            for j in 0..r {
                let num = 2 * gram[i][j];
                if num % gram[j][j] != 0 {
                    return Err(RootError::Unsupported("non-crystallographic gram matrix".into()));
                }
                cartan[i][j] = num / gram[j][j];
            }
        }
        // closure under simple reflections
        let mut found: Vec<Vec<i64>> = (0..r)
            .map(|i| {
                let mut v = vec![0; r];
                v[i] = 1;
                v
            })
            .collect();
        let mut seen: HashMap<Vec<i64>, ()> = found.iter().map(|v| (v.clone(), ())).collect();
        let mut k = 0;
        while k < found.len() {
            let b = found[k].clone();
            for j in 0..r {
                let c: i64 = (0..r).map(|i| b[i] * cartan[i][j]).sum();
                let mut nb = b.clone();
                nb[j] -= c;
                if !seen.contains_key(&nb) {
                    seen.insert(nb.clone(), ());
                    found.push(nb);
                }
                if found.len() > 500 {
                    return Err(RootError::Unsupported("infinite root system".into()));
                }
            }
            k += 1;
        }
        let mut pos: Vec<Vec<i64>> = found.into_iter().filter(|v| v.iter().all(|&x| x >= 0)).collect();
        pos.sort_by(|a, b| {
            let ha: i64 = a.iter().sum();
            let hb: i64 = b.iter().sum();
            ha.cmp(&hb).then_with(|| b.cmp(a))
        });
        let npos = pos.len();
        let mut roots = pos.clone();
        roots.extend(pos.iter().map(|v| v.iter().map(|x| -x).collect::<Vec<_>>()));
        let index: HashMap<Vec<i64>, usize> =
            roots.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        let neg: Vec<usize> = (0..roots.len())
            .map(|i| if i < npos { i + npos } else { i - npos })
            .collect();
        let inner = |a: &[i64], b: &[i64]| -> i64 {
            let mut s = 0;
            for i in 0..r {
                if a[i] == 0 {
                    continue;
                }
                for j in 0..r {
                    s += a[i] * b[j] * gram[i][j];
                }
            }
            s
        };
        let norms: Vec<i64> = roots.iter().map(|v| inner(v, v)).collect();
        let coroots: Vec<Vec<i64>> = roots
            .iter()
            .zip(norms.iter())
            .map(|(v, &nv)| {
                (0..r)
                    .map(|i| {
                        let x = v[i] * gram[i][i];
                        debug_assert!(x % nv == 0);
                        x / nv
                    })
                    .collect()
            })
            .collect();
        let refl_simple: Vec<Vec<usize>> = (0..r)
            .map(|j| {
                roots
                    .iter()
                    .map(|b| {
                        let c: i64 = (0..r).map(|i| b[i] * cartan[i][j]).sum();
                        let mut nb = b.clone();
                        nb[j] -= c;
                        index[&nb]
                    })
                    .collect()
            })
            .collect();
        let mut rs = RootSystem {
            label: None,
            rank: r,
            gram,
            cartan,
            roots,
            npos,
            norms,
            coroots,
            neg,
            refl_simple,
            index,
            structure: Vec::new(),
            simple_ad_sign: Vec::new(),
        };
        rs.compute_structure_constants()?;
        rs.compute_ad_signs()?;
        Ok(rs)
    }

    pub fn nroots(&self) -> usize {
        self.roots.len()
    }

    pub fn root_index(&self, coords: &[i64]) -> Option<usize> {
        self.index.get(coords).copied()
    }

    pub fn is_positive(&self, k: usize) -> bool {
        k < self.npos
    }

    pub fn height(&self, k: usize) -> i64 {
        self.roots[k].iter().sum()
    }

    /// Index of the i-th simple root.
    pub fn simple(&self, i: usize) -> usize {
        let mut v = vec![0; self.rank];
        v[i] = 1;
        self.index[&v]
    }

    pub fn inner(&self, a: usize, b: usize) -> i64 {
        let (x, y) = (&self.roots[a], &self.roots[b]);
        let mut s = 0;
        for i in 0..self.rank {
            for j in 0..self.rank {
                s += x[i] * y[j] * self.gram[i][j];
            }
        }
        s
    }

    /// ⟨β, γ∨⟩.
    pub fn pairing(&self, beta: usize, gamma: usize) -> i64 {
        2 * self.inner(beta, gamma) / self.norms[gamma]
    }

    /// s_γ(β) as a root index.
    pub fn reflect(&self, gamma: usize, beta: usize) -> usize {
        let c = self.pairing(beta, gamma);
        let v: Vec<i64> =
            (0..self.rank).map(|i| self.roots[beta][i] - c * self.roots[gamma][i]).collect();
        self.index[&v]
    }

    pub fn sum(&self, a: usize, b: usize) -> Option<usize> {
        let v: Vec<i64> = (0..self.rank).map(|i| self.roots[a][i] + self.roots[b][i]).collect();
        self.root_index(&v)
    }

    /// Coordinates of γ∨ in the simple coroots.
    pub fn coroot_coords(&self, gamma: usize) -> &[i64] {
        &self.coroots[gamma]
    }

    /// Largest p with β − pα a root.
    pub fn string_down(&self, alpha: usize, beta: usize) -> i64 {
        let mut p = 0;
        let mut v = self.roots[beta].clone();
        loop {
            for i in 0..self.rank {
                v[i] -= self.roots[alpha][i];
            }
            if self.root_index(&v).is_some() {
                p += 1;
            } else {
                return p;
            }
        }
    }

    /// N_{α,β} with [e_α, e_β] = N_{α,β} e_{α+β}.
    pub fn structure_constant(&self, a: usize, b: usize) -> Result<i64, RootError> {
        let n = self.structure[a * self.nroots() + b];
        if n == 0 {
            Err(RootError::NotARootSum)
        } else {
            Ok(n)
        }
    }

    pub fn structure_sign(&self, a: usize, b: usize) -> Result<i64, RootError> {
        self.structure_constant(a, b).map(|n| n.signum())
    }

    fn compute_structure_constants(&mut self) -> Result<(), RootError> {
        let nr = self.nroots();
        let npos = self.npos;
        let mut table = vec![0i64; nr * nr];
        // positive special pairs in order of their sum
        for xi in 0..npos {
            let mut pairs = Vec::new();
            for a in 0..npos {
                for b in a + 1..npos {
                    if self.sum(a, b) == Some(xi) {
                        pairs.push((a, b));
                    }
                }
            }
            if pairs.is_empty() {
                continue;
            }
            let (a, b) = pairs[0];
            let nab = self.string_down(a, b) + 1;
            table[a * nr + b] = nab;
            table[b * nr + a] = -nab;
            let nxi = self.norms[xi];
            for &(c, d) in &pairs[1..] {
                let nc = self.neg[c];
                let nd = self.neg[d];
                let mut acc_num = 0i64;
                // term with β−γ and α−δ
                if let (Some(bc), Some(_)) = (self.sum(b, nc), self.sum(a, nd)) {
                    let t = self.lookup(&table, b, nc) * self.lookup(&table, a, nd);
                    acc_num += t * nxi / self.norms[bc];
                }
                if let (Some(ac), Some(_)) = (self.sum(a, nc), self.sum(b, nd)) {
                    let t = self.lookup(&table, nc, a) * self.lookup(&table, b, nd);
                    acc_num += t * nxi / self.norms[ac];
                }
                if acc_num % nab != 0 {
                    return Err(RootError::Inconsistent(format!("non-integral N for pair {c},{d}")));
                }
                let ncd = acc_num / nab;
                table[c * nr + d] = ncd;
                table[d * nr + c] = -ncd;
            }
        }
        let mut full = vec![0i64; nr * nr];
        for x in 0..nr {
            for y in 0..nr {
                if self.sum(x, y).is_some() {
                    full[x * nr + y] = self.lookup(&table, x, y);
                }
            }
        }
        self.structure = full;
        self.check_structure_constants()
    }

    /// Reduces an arbitrary pair to a known positive pair.
    fn lookup(&self, table: &[i64], x: usize, y: usize) -> i64 {
        let nr = self.nroots();
        let px = self.is_positive(x);
        let py = self.is_positive(y);
        let s = self.sum(x, y).expect("lookup needs a root sum");
        if px && py {
            let v = table[x * nr + y];
            assert!(v != 0, "structure constant requested before it was derived");
            return v;
        }
        if !px && !py {
            return -self.lookup(table, self.neg[x], self.neg[y]);
        }
        if !px {
            return -self.lookup(table, y, x);
        }
        // x positive, y negative; z = −(x+y)
        let z = self.neg[s];
        if self.is_positive(z) {
            // N_{x,y} = (z,z)/(y,y) N_{z,x}
            self.norms[z] * self.lookup(table, z, x) / self.norms[y]
        } else {
            // N_{x,y} = (z,z)/(x,x) N_{y,z} = −(z,z)/(x,x) N_{−y,−z}
            -self.norms[z] * self.lookup(table, self.neg[y], self.neg[z]) / self.norms[x]
        }
    }

    fn check_structure_constants(&self) -> Result<(), RootError> {
        let nr = self.nroots();
        for x in 0..nr {
            for y in 0..nr {
                if self.sum(x, y).is_some() {
                    let n = self.structure[x * nr + y];
                    let p = self.string_down(x, y);
                    if n.abs() != p + 1 {
                        return Err(RootError::Inconsistent(format!("|N({x},{y})| = {n}, p = {p}")));
                    }
                    if self.structure[y * nr + x] != -n
                        || self.structure[self.neg[x] * nr + self.neg[y]] != -n
                    {
                        return Err(RootError::Inconsistent(format!("symmetry at ({x},{y})")));
                    }
                }
            }
        }
        Ok(())
    }

    // --- the Chevalley Lie algebra: basis h_1..h_r, then e_root

    pub fn lie_dim(&self) -> usize {
        self.rank + self.nroots()
    }

    /// Bracket of two basis vectors as a sparse vector.
    pub fn lie_bracket_basis(&self, i: usize, j: usize) -> Vec<(usize, i64)> {
        let r = self.rank;
        match (i < r, j < r) {
            (true, true) => vec![],
            (true, false) => {
                let b = j - r;
                let c: i64 = (0..r).map(|k| self.roots[b][k] * self.cartan[k][i]).sum();
                if c == 0 {
                    vec![]
                } else {
                    vec![(j, c)]
                }
            }
            (false, true) => self
                .lie_bracket_basis(j, i)
                .into_iter()
                .map(|(k, c)| (k, -c))
                .collect(),
            (false, false) => {
                let (a, b) = (i - r, j - r);
                if self.neg[a] == b {
                    self.coroots[a]
                        .iter()
                        .enumerate()
                        .filter(|(_, &c)| c != 0)
                        .map(|(k, &c)| (k, c))
                        .collect()
                } else if let Some(s) = self.sum(a, b) {
                    vec![(r + s, self.structure[a * self.nroots() + b])]
                } else {
                    vec![]
                }
            }
        }
    }

    pub fn lie_bracket(&self, x: &[i64], y: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; self.lie_dim()];
        for (i, &a) in x.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in y.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                for (k, c) in self.lie_bracket_basis(i, j) {
                    out[k] += a * b * c;
                }
            }
        }
        out
    }

    /// exp(t·ad e_α) applied to v, exactly.
    pub fn exp_ad(&self, alpha: usize, t: i64, v: &[i64]) -> Vec<i64> {
        let dim = self.lie_dim();
        let mut e = vec![0i64; dim];
        e[self.rank + alpha] = 1;
        let mut out = v.to_vec();
        let mut term = v.to_vec();
        for k in 1..=4i64 {
            term = self.lie_bracket(&e, &term);
            if term.iter().all(|&x| x == 0) {
                break;
            }
            for x in term.iter_mut() {
                *x *= t;
                assert!(*x % k == 0, "divided power not integral");
                *x /= k;
            }
            for (o, x) in out.iter_mut().zip(term.iter()) {
                *o += x;
            }
        }
        out
    }

    /// Ad(n_α(−1)) v where n_α(t) = x_α(t) x_{−α}(−t⁻¹) x_α(t).
    pub fn ad_n_minus_one(&self, alpha: usize, v: &[i64]) -> Vec<i64> {
        let v = self.exp_ad(alpha, -1, v);
        let v = self.exp_ad(self.neg[alpha], 1, &v);
        self.exp_ad(alpha, -1, &v)
    }

    fn compute_ad_signs(&mut self) -> Result<(), RootError> {
        let r = self.rank;
        let dim = self.lie_dim();
        let mut signs = Vec::with_capacity(r);
        for i in 0..r {
            let ai = self.simple(i);
            let mut row = Vec::with_capacity(self.nroots());
            for k in 0..self.nroots() {
                let mut v = vec![0i64; dim];
                v[r + k] = 1;
                let w = self.ad_n_minus_one(ai, &v);
                let target = r + self.refl_simple[i][k];
                let ok = w.iter().enumerate().all(|(j, &x)| j == target || x == 0);
                if !ok || w[target].abs() != 1 {
                    return Err(RootError::Inconsistent(format!("Ad(n_{i}) on root {k}")));
                }
                row.push(w[target] as i8);
            }
            signs.push(row);
        }
        self.simple_ad_sign = signs;
        Ok(())
    }

    /// Checks the Jacobi identity on all triples of basis vectors.
    pub fn check_jacobi(&self) -> bool {
        let dim = self.lie_dim();
        let basis = |i: usize| {
            let mut v = vec![0i64; dim];
            v[i] = 1;
            v
        };
        for i in 0..dim {
            for j in i + 1..dim {
                let bij = self.lie_bracket(&basis(i), &basis(j));
                for k in j + 1..dim {
                    let bk = basis(k);
                    let t1 = self.lie_bracket(&bij, &bk);
                    let bjk = self.lie_bracket(&basis(j), &bk);
                    let t2 = self.lie_bracket(&bjk, &basis(i));
                    let bki = self.lie_bracket(&bk, &basis(i));
                    let t3 = self.lie_bracket(&bki, &basis(j));
                    if (0..dim).any(|x| t1[x] + t2[x] + t3[x] != 0) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Matrix of s_i on the coroot lattice, columns = images of α_j∨.
    pub fn simple_coroot_matrix(&self, i: usize) -> Vec<Vec<i64>> {
        let r = self.rank;
        let mut m = vec![vec![0i64; r]; r];
        for j in 0..r {
            m[j][j] = 1;
            // s_i(α_j∨) = α_j∨ − ⟨α_i, α_j∨⟩ α_i∨
            m[i][j] -= self.cartan[i][j];
        }
        m
    }

    pub fn describe(&self) -> String {
        match self.label {
            Some(t) => t.to_string(),
            None => format!("rank{}", self.rank),
        }
    }
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// ---------------------------------------------------------------------------
// Weyl groups

pub const MAX_WEYL_ORDER: usize = 2000;

/// The Weyl group, elements indexed in shortlex order of their
/// lexicographically least reduced words.
#[derive(Clone, Debug)]
pub struct WeylGroup {
    pub rs: Arc<RootSystem>,
    pub perms: Vec<Vec<u16>>,
    pub words: Vec<Vec<u8>>,
    pub lengths: Vec<u32>,
    mul: Vec<u16>,
    inv: Vec<u16>,
    key_index: HashMap<u64, usize>,
    pub simple: Vec<usize>,
    /// element index of s_γ for each root γ
    pub reflection: Vec<usize>,
    pub w0: usize,
}

/// A Weyl group element: permutation of the roots plus canonical word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylElt {
    pub perm: Vec<u16>,
    pub word: Vec<u8>,
}

impl WeylGroup {
    pub fn new(rs: Arc<RootSystem>) -> Result<Self, RootError> {
        let r = rs.rank;
        let nr = rs.nroots();
        let identity: Vec<u16> = (0..nr as u16).collect();
        let simple_perm: Vec<Vec<u16>> =
            (0..r).map(|i| rs.refl_simple[i].iter().map(|&x| x as u16).collect()).collect();
        let key = |p: &[u16]| -> u64 {
            let mut k = 0u64;
            for i in 0..r {
                k = (k << 16) | p[rs.simple(i)] as u64;
            }
            k
        };
        // breadth-first by length, left multiplication by simple reflections
        let mut perms: Vec<Vec<u16>> = vec![identity.clone()];
        let mut lengths = vec![0u32];
        let mut seen: HashMap<u64, usize> = HashMap::new();
        seen.insert(key(&identity), 0);
        let mut frontier = vec![0usize];
        let mut len = 0;
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &e in &frontier {
                for sp in &simple_perm {
                    let p: Vec<u16> = perms[e].iter().map(|&x| sp[x as usize]).collect();
                    let k = key(&p);
                    if let std::collections::hash_map::Entry::Vacant(v) = seen.entry(k) {
                        v.insert(perms.len());
                        next.push(perms.len());
                        perms.push(p);
                        lengths.push(len + 1);
                        if perms.len() > MAX_WEYL_ORDER {
                            return Err(RootError::TooLarge(perms.len(), MAX_WEYL_ORDER));
                        }
                    }
                }
            }
            frontier = next;
            len += 1;
        }
        // canonical words: first letter is the least left descent
        let n = perms.len();
        let mut words: Vec<Option<Vec<u8>>> = vec![None; n];
        words[0] = Some(vec![]);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&e| lengths[e]);
        for &e in &order[1..] {
            // left descent i: w⁻¹(α_i) < 0, i.e. α_i = w(β) for a negative β
            let inv_img = |i: usize| -> usize {
                let a = rs.simple(i);
                perms[e].iter().position(|&x| x as usize == a).unwrap()
            };
            let i = (0..r).find(|&i| !rs.is_positive(inv_img(i))).unwrap();
            let p: Vec<u16> = perms[e].iter().map(|&x| simple_perm[i][x as usize]).collect();
            let prev = seen[&key(&p)];
            let mut w = vec![i as u8];
            w.extend(words[prev].as_ref().unwrap());
            words[e] = Some(w);
        }
        let words: Vec<Vec<u8>> = words.into_iter().map(|w| w.unwrap()).collect();
        // reindex in shortlex order
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| words[a].len().cmp(&words[b].len()).then_with(|| words[a].cmp(&words[b])));
        let perms: Vec<Vec<u16>> = idx.iter().map(|&i| perms[i].clone()).collect();
        let words: Vec<Vec<u8>> = idx.iter().map(|&i| words[i].clone()).collect();
        let lengths: Vec<u32> = idx.iter().map(|&i| lengths[i]).collect();
        let key_index: HashMap<u64, usize> =
            perms.iter().enumerate().map(|(i, p)| (key(p), i)).collect();
        let mut mul = vec![0u16; n * n];
        for a in 0..n {
            for b in 0..n {
                let mut k = 0u64;
                for i in 0..r {
                    let x = perms[b][rs.simple(i)];
                    k = (k << 16) | perms[a][x as usize] as u64;
                }
                mul[a * n + b] = key_index[&k] as u16;
            }
        }
        let mut inv = vec![0u16; n];
        for a in 0..n {
            for b in 0..n {
                if mul[a * n + b] == 0 {
                    inv[a] = b as u16;
                    break;
                }
            }
        }
        let simple: Vec<usize> = (0..r).map(|i| key_index[&key(&simple_perm[i])]).collect();
        let reflection: Vec<usize> = (0..nr)
            .map(|g| {
                let p: Vec<u16> = (0..nr).map(|b| rs.reflect(g, b) as u16).collect();
                key_index[&key(&p)]
            })
            .collect();
        let w0 = (0..n).max_by_key(|&i| lengths[i]).unwrap();
        Ok(WeylGroup { rs, perms, words, lengths, mul, inv, key_index, simple, reflection, w0 })
    }

    pub fn order(&self) -> usize {
        self.perms.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order() + b] as usize
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    pub fn length(&self, a: usize) -> u32 {
        self.lengths[a]
    }

    pub fn elt(&self, a: usize) -> WeylElt {
        WeylElt { perm: self.perms[a].clone(), word: self.words[a].clone() }
    }

    /// Image of root k under element a.
    pub fn act_root(&self, a: usize, k: usize) -> usize {
        self.perms[a][k] as usize
    }

    pub fn from_word(&self, word: &[u8]) -> usize {
        word.iter().fold(0, |acc, &i| self.mul(acc, self.simple[i as usize]))
    }

    /// Element with the given permutation, if any.
    pub fn from_perm(&self, p: &[u16]) -> Option<usize> {
        let mut k = 0u64;
        for i in 0..self.rs.rank {
            k = (k << 16) | p[self.rs.simple(i)] as u64;
        }
        self.key_index.get(&k).copied()
    }

    /// Inversion count: positive roots sent to negative ones.
    pub fn inversion_count(&self, a: usize) -> usize {
        (0..self.rs.npos).filter(|&k| !self.rs.is_positive(self.perms[a][k] as usize)).count()
    }

    pub fn longest_is_central(&self) -> bool {
        (0..self.rs.rank).all(|i| {
            let a = self.rs.simple(i);
            self.act_root(self.w0, a) == self.rs.neg[a]
        })
    }

    /// Matrix of w on the coroot lattice (columns = images of α_j∨).
    pub fn coroot_matrix(&self, a: usize) -> Vec<Vec<i64>> {
        let r = self.rs.rank;
        let mut m = vec![vec![0i64; r]; r];
        for j in 0..r {
            let img = self.act_root(a, self.rs.simple(j));
            for i in 0..r {
                m[i][j] = self.rs.coroots[img][i];
            }
        }
        m
    }

    /// All reduced words of an element (for braid-independence checks).
    pub fn reduced_words(&self, a: usize) -> Vec<Vec<u8>> {
        if self.lengths[a] == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for i in 0..self.rs.rank {
            let s = self.simple[i];
            let b = self.mul(s, a);
            if self.lengths[b] < self.lengths[a] {
                for mut w in self.reduced_words(b) {
                    w.insert(0, i as u8);
                    out.push(w);
                }
            }
        }
        out
    }

    /// Sign c with Ad(ẇ) e_k = c · e_{w k}, ẇ the product of n_{α_i}(−1)
    /// along the canonical word.
    pub fn ad_sign(&self, a: usize, k: usize) -> i8 {
        let mut sign = 1i8;
        let mut cur = k;
        for &i in self.words[a].iter().rev() {
            sign *= self.rs.simple_ad_sign[i as usize][cur];
            cur = self.rs.refl_simple[i as usize][cur];
        }
        sign
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weyl(s: &str) -> WeylGroup {
        WeylGroup::new(Arc::new(RootSystem::build_str(s).unwrap())).unwrap()
    }

    #[test]
    fn classification_counts() {
        for (s, nr, nw) in [
            ("A1", 2, 2),
            ("A2", 6, 6),
            ("A3", 12, 24),
            ("C2", 8, 8),
            ("B3", 18, 48),
            ("C3", 18, 48),
            ("G2", 12, 12),
            ("B4", 32, 384),
            ("D4", 24, 192),
            ("F4", 48, 1152),
        ] {
            let w = weyl(s);
            assert_eq!(w.rs.nroots(), nr, "{s}");
            assert_eq!(w.order(), nw, "{s}");
        }
    }

    #[test]
    fn unsupported_labels() {
        assert!(RootSystem::build_str("E6").is_err());
        assert!(RootSystem::build_str("D5").is_err());
        assert!(RootSystem::build_str("G3").is_err());
    }

    #[test]
    fn lengths_and_words() {
        for s in ["A3", "C3", "G2", "B4"] {
            let w = weyl(s);
            for a in 0..w.order() {
                assert_eq!(w.words[a].len(), w.inversion_count(a));
                assert_eq!(w.from_word(&w.words[a]), a);
                // canonical word is the least reduced word
                let rw = w.reduced_words(a);
                assert_eq!(rw.iter().min().unwrap(), &w.words[a]);
            }
            let w0 = w.w0;
            assert_eq!(w.mul(w0, w0), 0);
            assert_eq!(w.inversion_count(w0), w.rs.npos);
        }
    }

    #[test]
    fn longest_central() {
        assert!(weyl("B3").longest_is_central());
        assert!(!weyl("A2").longest_is_central());
        assert!(weyl("D4").longest_is_central());
        assert!(weyl("G2").longest_is_central());
        assert!(weyl("C2").longest_is_central());
        assert!(weyl("A1").longest_is_central());
    }

    #[test]
    fn structure_constants_consistent() {
        for s in ["A2", "A3", "C2", "B3", "C3", "G2", "D4", "B4", "F4"] {
            let rs = RootSystem::build_str(s).unwrap();
            assert!(rs.check_jacobi(), "{s}");
        }
    }

    #[test]
    fn structure_sign_examples() {
        let rs = RootSystem::build_str("A2").unwrap();
        // extraspecial pair (α1, α2) gets +1
        assert_eq!(rs.structure_sign(rs.simple(0), rs.simple(1)).unwrap(), 1);
        let rs = RootSystem::build_str("C2").unwrap();
        // two orthogonal long roots 2e1, 2e2 do not sum to a root
        let a = rs.root_index(&[2, 1]).unwrap();
        let b = rs.root_index(&[0, 1]).unwrap();
        assert_eq!(rs.inner(a, b), 0);
        assert!(rs.structure_sign(a, b).is_err());
        for x in 0..rs.nroots() {
            for y in 0..rs.nroots() {
                if let Ok(n) = rs.structure_constant(x, y) {
                    assert_eq!(rs.structure_constant(y, x).unwrap(), -n);
                }
            }
        }
    }

    #[test]
    fn coroot_coordinates() {
        let rs = RootSystem::build_str("B4").unwrap();
        for i in 0..4 {
            let mut e = vec![0; 4];
            e[i] = 1;
            assert_eq!(rs.coroot_coords(rs.simple(i)), &e[..]);
        }
        // e1 − e3 = α1 + α2
        let g = rs.root_index(&[1, 1, 0, 0]).unwrap();
        assert_eq!(rs.coroot_coords(g), &[1, 1, 0, 0]);
        // pairing oracle: ⟨α_j, γ∨⟩ = Σ_i c_i ⟨α_j, α_i∨⟩
        for s in ["B3", "C3", "G2", "F4"] {
            let rs = RootSystem::build_str(s).unwrap();
            for g in 0..rs.nroots() {
                for j in 0..rs.rank {
                    let via: i64 =
                        (0..rs.rank).map(|i| rs.coroots[g][i] * rs.cartan[j][i]).sum();
                    assert_eq!(via, rs.pairing(rs.simple(j), g));
                }
            }
        }
    }

    #[test]
    fn weyl_enumerate_f4() {
        let w = weyl("F4");
        assert_eq!(w.order(), 1152);
        assert!(w.longest_is_central());
    }

    #[test]
    fn ad_signs_square() {
        // Ad(n_i)^2 = Ad(h_i(−1)) acts on e_k by (−1)^{⟨k, α_i∨⟩}
        for s in ["C2", "G2", "B3"] {
            let rs = RootSystem::build_str(s).unwrap();
            for i in 0..rs.rank {
                let ai = rs.simple(i);
                for k in 0..rs.nroots() {
                    let k2 = rs.refl_simple[i][k];
                    let sgn = rs.simple_ad_sign[i][k] * rs.simple_ad_sign[i][k2];
                    let expect = if rs.pairing(k, ai).rem_euclid(2) == 0 { 1 } else { -1 };
                    assert_eq!(sgn, expect);
                }
            }
        }
    }
}
