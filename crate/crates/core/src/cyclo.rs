//! Exact arithmetic in cyclotomic fields Q(ζ_n), Galois automorphisms and
//! the subgroups of Galois elements that act as a fixed power of ℓ on
//! ℓ′-roots of unity.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CycloError {
    #[error("{0} divides {1}")]
    EllDividesQ(u64, u64),
    #[error("unit {unit} is not coprime to level {level}")]
    NotAUnit { level: u64, unit: u64 },
    #[error("unit {unit} mod {level} is not in the ell={ell} subgroup")]
    NotInHEll { level: u64, unit: u64, ell: u64 },
    #[error("p equals ell ({0})")]
    PEqualsEll(u64),
    #[error("division by zero")]
    DivByZero,
    #[error("parse error: {0}")]
    Parse(String),
}

// ---------------------------------------------------------------------------
// elementary number theory

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factorization as (prime, exponent) pairs in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut r = 1u128;
    let mut bb = (b % m) as u128;
    let mm = m as u128;
    while e > 0 {
        if e & 1 == 1 {
            r = r * bb % mm;
        }
        bb = bb * bb % mm;
        e >>= 1;
    }
    b = r as u64;
    b
}

/// Multiplicative order of `a` modulo `m` (requires gcd(a, m) = 1).
pub fn mult_order(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 1;
    }
    let mut x = a % m;
    let mut k = 1;
    while x != 1 {
        x = ((x as u128 * a as u128) % m as u128) as u64;
        k += 1;
    }
    k
}

/// Splits n = ell^a * m with gcd(m, ell) = 1; returns (ell^a, m).
pub fn split_ell(n: u64, ell: u64) -> (u64, u64) {
    let mut pa = 1;
    let mut m = n;
    while m % ell == 0 {
        m /= ell;
        pa *= ell;
    }
    (pa, m)
}

/// Legendre symbol (a | p) for an odd prime p, as -1, 0 or 1.
pub fn legendre(a: i64, p: u64) -> i32 {
    let a = a.rem_euclid(p as i64) as u64;
    if a == 0 {
        return 0;
    }
    if pow_mod(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Multiplicative order of q modulo ell, or modulo 4 when ell = 2.
pub fn d_ell(q: u64, ell: u64) -> Result<u64, CycloError> {
    if q % ell == 0 {
        return Err(CycloError::EllDividesQ(ell, q));
    }
    let m = if ell == 2 { 4 } else { ell };
    Ok(mult_order(q % m, m))
}

/// Chinese remainder for coprime moduli.
pub fn crt(a: u64, m: u64, b: u64, n: u64) -> u64 {
    let (mi, ni) = (m as i128, n as i128);
    let g = (mi).extended_gcd(&ni);
    debug_assert_eq!(g.gcd, 1);
    let l = mi * ni;
    let x = (a as i128 + (b as i128 - a as i128) * g.x % ni * mi).rem_euclid(l);
    x as u64
}

// ---------------------------------------------------------------------------
// cyclotomic polynomials and reduction tables

struct LevelData {
    phi: usize,
    /// reduced coordinates of zeta^k for k in 0..n
    powers: Vec<Vec<i64>>,
}

fn level_cache() -> &'static Mutex<HashMap<u64, Arc<LevelData>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<LevelData>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn poly_cache() -> &'static Mutex<HashMap<u64, Arc<Vec<i64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<i64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Coefficients (low degree first) of the n-th cyclotomic polynomial.
pub fn cyclotomic_poly(n: u64) -> Arc<Vec<i64>> {
    if let Some(p) = poly_cache().lock().unwrap().get(&n) {
        return p.clone();
    }
    // x^n - 1 divided by every Phi_d for proper divisors d
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            let den = cyclotomic_poly(d);
            num = poly_div_exact(&num, &den);
        }
    }
    let p = Arc::new(num);
    poly_cache().lock().unwrap().insert(n, p.clone());
    p
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    let lead = den[dn];
    debug_assert!(lead == 1);
    let qn = rem.len() - 1 - dn;
    let mut quo = vec![0i64; qn + 1];
    for k in (0..=qn).rev() {
        let c = rem[k + dn] / lead;
        quo[k] = c;
        if c != 0 {
            for (j, &dj) in den.iter().enumerate() {
                rem[k + j] -= c * dj;
            }
        }
    }
    debug_assert!(rem.iter().all(|&x| x == 0));
    quo
}

fn level_data(n: u64) -> Arc<LevelData> {
    if let Some(d) = level_cache().lock().unwrap().get(&n) {
        return d.clone();
    }
    let poly = cyclotomic_poly(n);
    let phi = poly.len() - 1;
    let mut powers = Vec::with_capacity(n as usize);
    let mut cur = vec![0i64; phi];
    cur[0] = 1;
    for _ in 0..n {
        powers.push(cur.clone());
        // multiply by x and reduce: x^phi = -sum poly[i] x^i
        let top = cur[phi - 1];
        for i in (1..phi).rev() {
            cur[i] = cur[i - 1];
        }
        cur[0] = 0;
        if top != 0 {
            for i in 0..phi {
                cur[i] -= top * poly[i];
            }
        }
    }
    let d = Arc::new(LevelData { phi, powers });
    level_cache().lock().unwrap().insert(n, d.clone());
    d
}

// ---------------------------------------------------------------------------
// Cyclotomic

/// An element of Q(ζ_n), stored in the power basis 1, ζ_n, …, ζ_n^{φ(n)−1}.
#[derive(Clone, Debug)]
pub struct Cyclotomic {
    level: u64,
    coeffs: Vec<BigRational>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Cyclotomic {
    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn zero() -> Self {
        Self::from_rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(rat(n))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Cyclotomic { level: 1, coeffs: vec![r] }
    }

    /// ζ_n^k.
    pub fn zeta(n: u64, k: i64) -> Self {
        assert!(n > 0);
        let k = k.rem_euclid(n as i64) as usize;
        let ld = level_data(n);
        Cyclotomic {
            level: n,
            coeffs: ld.powers[k].iter().map(|&c| rat(c)).collect(),
        }
    }

    /// Σ c_k ζ_n^k from arbitrary (unreduced) integer exponent weights.
    pub fn from_exponent_weights(n: u64, weights: &[i64]) -> Self {
        assert_eq!(weights.len() as u64, n);
        let ld = level_data(n);
        let mut acc = vec![0i64; ld.phi];
        for (k, &w) in weights.iter().enumerate() {
            if w != 0 {
                for (a, &p) in acc.iter_mut().zip(ld.powers[k].iter()) {
                    *a += w * p;
                }
            }
        }
        Cyclotomic { level: n, coeffs: acc.into_iter().map(rat).collect() }
    }

    /// Builds from power-basis coordinates of length φ(n).
    pub fn from_coeffs(n: u64, coeffs: Vec<BigRational>) -> Self {
        let ld = level_data(n);
        assert_eq!(coeffs.len(), ld.phi, "coefficient count must equal phi(n)");
        Cyclotomic { level: n, coeffs }
    }

    /// Builds from arbitrary-length coordinates against 1, ζ_n, ζ_n², ….
    pub fn from_unreduced(n: u64, coeffs: &[BigRational]) -> Self {
        let ld = level_data(n);
        let mut acc = vec![BigRational::zero(); ld.phi];
        for (k, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (a, &p) in acc.iter_mut().zip(ld.powers[k % n as usize].iter()) {
                if p != 0 {
                    *a += c * rat(p);
                }
            }
        }
        Cyclotomic { level: n, coeffs: acc }
    }

    /// The same value expressed at a level divisible by the current one.
    pub fn lift(&self, m: u64) -> Self {
        assert!(m % self.level == 0, "lift target must be a multiple of the level");
        if m == self.level {
            return self.clone();
        }
        let ld = level_data(m);
        let step = (m / self.level) as usize;
        let mut acc = vec![BigRational::zero(); ld.phi];
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (a, &p) in acc.iter_mut().zip(ld.powers[j * step].iter()) {
                if p != 0 {
                    *a += c * rat(p);
                }
            }
        }
        Cyclotomic { level: m, coeffs: acc }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.iter().skip(1).all(|c| c.is_zero())
    }

    /// The rational value, if the element lies in Q.
    pub fn to_rational(&self) -> Option<BigRational> {
        if self.is_rational() {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Integer coordinates, when every coordinate is integral.
    pub fn int_coeffs(&self) -> Option<Vec<i64>> {
        self.coeffs
            .iter()
            .map(|c| if c.is_integer() { c.to_integer().to_i64() } else { None })
            .collect()
    }

    fn pair(&self, other: &Self) -> (Self, Self) {
        let l = lcm(self.level, other.level);
        (self.lift(l), other.lift(l))
    }

    /// Rewrites the value at the smallest level dividing the current one
    /// at which it is still expressible.
    pub fn normalized(&self) -> Self {
        let mut cur = self.clone();
        loop {
            let mut improved = false;
            for (p, _) in factorize(cur.level) {
                let m = cur.level / p;
                if let Some(x) = cur.descend(m) {
                    cur = x;
                    improved = true;
                    break;
                }
            }
            if !improved {
                return cur;
            }
        }
    }

    /// Tries to express the value at level m (m divides the level).
    fn descend(&self, m: u64) -> Option<Self> {
        // x lies in Q(ζ_m) iff it is fixed by every unit ≡ 1 mod m; then
        // the trace over the subfield recovers it.
        let n = self.level;
        let units: Vec<u64> = (1..n).filter(|&u| gcd(u, n) == 1 && u % m == 1).collect();
        let units = if units.is_empty() { vec![1] } else { units };
        for &u in &units {
            let g = GaloisElt { level: n, unit: u };
            if g.act(self) != *self {
                return None;
            }
        }
        // solve in the basis of level m: coordinates match after lifting
        let ldm = level_data(m);
        let step = (n / m) as usize;
        let ldn = level_data(n);
        // linear system: sum_j y_j powers_n[j*step] = coeffs
        let rows = ldn.phi;
        let cols = ldm.phi;
        let mut mat: Vec<Vec<BigRational>> = (0..rows)
            .map(|r| {
                let mut row: Vec<BigRational> =
                    (0..cols).map(|j| rat(ldn.powers[j * step][r])).collect();
                row.push(self.coeffs[r].clone());
                row
            })
            .collect();
        let sol = solve_linear(&mut mat, cols)?;
        Some(Cyclotomic { level: m, coeffs: sol })
    }

    pub fn conj(&self) -> Self {
        GaloisElt { level: self.level, unit: self.level.saturating_sub(1).max(1) }.act(self)
    }

    pub fn inverse(&self) -> Result<Self, CycloError> {
        if self.is_zero() {
            return Err(CycloError::DivByZero);
        }
        let n = self.level;
        let ld = level_data(n);
        let phi = ld.phi;
        // columns: x * zeta^j
        let mut cols: Vec<Vec<BigRational>> = Vec::with_capacity(phi);
        for j in 0..phi {
            let z = Cyclotomic::zeta(n, j as i64);
            cols.push((self * &z).coeffs);
        }
        let mut mat: Vec<Vec<BigRational>> = (0..phi)
            .map(|r| {
                let mut row: Vec<BigRational> = (0..phi).map(|j| cols[j][r].clone()).collect();
                row.push(if r == 0 { BigRational::one() } else { BigRational::zero() });
                row
            })
            .collect();
        let sol = solve_linear(&mut mat, phi).ok_or(CycloError::DivByZero)?;
        Ok(Cyclotomic { level: n, coeffs: sol })
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Cyclotomic { level: self.level, coeffs: self.coeffs.iter().map(|c| c * r).collect() }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Cyclotomic::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// If the value is a root of unity ζ_n^k (at its own level n), returns k.
    pub fn as_root_of_unity(&self) -> Option<(u64, u64)> {
        let n = self.level;
        let m = if n % 2 == 1 { 2 * n } else { n };
        let x = self.lift(m);
        (0..m).find(|&k| Cyclotomic::zeta(m, k as i64) == x).map(|k| (m, k))
    }

    /// Approximate complex embedding under ζ_n ↦ e^{2πi/n}; debugging only.
    pub fn approx(&self) -> (f64, f64) {
        let n = self.level as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            let v = c.numer().to_f64().unwrap_or(f64::NAN) / c.denom().to_f64().unwrap_or(f64::NAN);
            let a = 2.0 * std::f64::consts::PI * k as f64 / n;
            re += v * a.cos();
            im += v * a.sin();
        }
        (re, im)
    }
}

/// Gaussian elimination on an augmented matrix; returns the unique solution.
fn solve_linear(mat: &mut [Vec<BigRational>], cols: usize) -> Option<Vec<BigRational>> {
    let rows = mat.len();
    let mut piv_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !mat[i][c].is_zero()) else { continue };
        mat.swap(r, p);
        let inv = mat[r][c].recip();
        for x in mat[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !mat[i][c].is_zero() {
                let f = mat[i][c].clone();
                for j in 0..=cols {
                    let t = &mat[r][j] * &f;
                    mat[i][j] -= t;
                }
            }
        }
        piv_cols.push(c);
        r += 1;
    }
    if piv_cols.len() < cols {
        return None;
    }
    // consistency
    for row in mat.iter().skip(r) {
        if !row[cols].is_zero() {
            return None;
        }
    }
    let mut sol = vec![BigRational::zero(); cols];
    for (i, &c) in piv_cols.iter().enumerate() {
        sol[c] = mat[i][cols].clone();
    }
    Some(sol)
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        if self.level == other.level {
            return self.coeffs == other.coeffs;
        }
        let (a, b) = self.pair(other);
        a.coeffs == b.coeffs
    }
}
impl Eq for Cyclotomic {}

impl<'a> Add<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn add(self, o: &Cyclotomic) -> Cyclotomic {
        let (a, b) = if self.level == o.level { (self.clone(), o.clone()) } else { self.pair(o) };
        Cyclotomic {
            level: a.level,
            coeffs: a.coeffs.iter().zip(b.coeffs.iter()).map(|(x, y)| x + y).collect(),
        }
    }
}

impl<'a> Sub<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn sub(self, o: &Cyclotomic) -> Cyclotomic {
        self + &(-o)
    }
}

impl Neg for &Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        Cyclotomic { level: self.level, coeffs: self.coeffs.iter().map(|x| -x).collect() }
    }
}

impl<'a> Mul<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, o: &Cyclotomic) -> Cyclotomic {
        if self.level == 1 {
            return o.scale(&self.coeffs[0]);
        }
        if o.level == 1 {
            return self.scale(&o.coeffs[0]);
        }
        let (a, b) = if self.level == o.level { (self.clone(), o.clone()) } else { self.pair(o) };
        let n = a.level;
        let ld = level_data(n);
        let phi = ld.phi;
        let mut prod = vec![BigRational::zero(); 2 * phi - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    prod[i + j] += x * y;
                }
            }
        }
        let mut out: Vec<BigRational> = prod[..phi].to_vec();
        for (k, c) in prod.iter().enumerate().skip(phi) {
            if c.is_zero() {
                continue;
            }
            for (o, &p) in out.iter_mut().zip(ld.powers[k % n as usize].iter()) {
                if p != 0 {
                    *o += c * rat(p);
                }
            }
        }
        Cyclotomic { level: n, coeffs: out }
    }
}

impl Add for Cyclotomic {
    type Output = Cyclotomic;
    fn add(self, o: Cyclotomic) -> Cyclotomic {
        &self + &o
    }
}
impl Sub for Cyclotomic {
    type Output = Cyclotomic;
    fn sub(self, o: Cyclotomic) -> Cyclotomic {
        &self - &o
    }
}
impl Mul for Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, o: Cyclotomic) -> Cyclotomic {
        &self * &o
    }
}
impl Neg for Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        -&self
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cs: Vec<String> = self.coeffs.iter().map(fmt_rat).collect();
        write!(f, "({}, [{}])", self.level, cs.join(", "))
    }
}

fn parse_rat(s: &str) -> Result<BigRational, CycloError> {
    let s = s.trim();
    let bad = || CycloError::Parse(format!("bad rational {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().map_err(|_| bad())?;
        let d: BigInt = b.trim().parse().map_err(|_| bad())?;
        if d.is_zero() || d.is_negative() {
            return Err(bad());
        }
        Ok(BigRational::new(n, d))
    } else {
        let n: BigInt = s.parse().map_err(|_| bad())?;
        Ok(BigRational::from_integer(n))
    }
}

/// Largest level accepted by the text parser.
pub const MAX_PARSE_LEVEL: u64 = 10_000;

impl std::str::FromStr for Cyclotomic {
    type Err = CycloError;

    /// Parses `(n, [c0, c1, ...])` with exactly φ(n) rational entries.
    fn from_str(s: &str) -> Result<Self, CycloError> {
        let s = s.trim();
        let inner = s
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| CycloError::Parse("expected parentheses".into()))?;
        let (lvl, rest) =
            inner.split_once(',').ok_or_else(|| CycloError::Parse("missing comma".into()))?;
        let level: u64 =
            lvl.trim().parse().map_err(|_| CycloError::Parse(format!("bad level {lvl:?}")))?;
        if level == 0 || level > MAX_PARSE_LEVEL {
            return Err(CycloError::Parse(format!("level {level} out of range")));
        }
        let list = rest
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| CycloError::Parse("expected bracketed list".into()))?;
        let coeffs: Vec<BigRational> = if list.trim().is_empty() {
            Vec::new()
        } else {
            list.split(',').map(parse_rat).collect::<Result<_, _>>()?
        };
        if coeffs.len() as u64 != euler_phi(level) {
            return Err(CycloError::Parse(format!(
                "level {level} needs {} coefficients, got {}",
                euler_phi(level),
                coeffs.len()
            )));
        }
        Ok(Cyclotomic::from_coeffs(level, coeffs))
    }
}

impl Serialize for Cyclotomic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Cyclotomic {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Galois elements

/// The automorphism ζ_n ↦ ζ_n^unit of Q(ζ_n).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GaloisElt {
    pub level: u64,
    pub unit: u64,
}

impl GaloisElt {
    pub fn new(level: u64, unit: u64) -> Result<Self, CycloError> {
        let unit = unit % level;
        let unit = if level == 1 { 0 } else { unit };
        if level > 1 && gcd(unit, level) != 1 {
            return Err(CycloError::NotAUnit { level, unit });
        }
        Ok(GaloisElt { level, unit })
    }

    pub fn identity(level: u64) -> Self {
        GaloisElt { level, unit: 1 % level.max(1) }
    }

    /// A unit at level m (a multiple of the level) restricting to this one.
    pub fn unit_at(&self, m: u64) -> u64 {
        assert!(m % self.level == 0 || self.level % m == 0);
        if self.level % m == 0 {
            return self.unit % m;
        }
        let mut u = self.unit;
        while gcd(u, m) != 1 {
            u += self.level;
        }
        u % m
    }

    pub fn lift(&self, m: u64) -> Self {
        let l = lcm(m, self.level);
        GaloisElt { level: l, unit: self.unit_at(l) }
    }

    pub fn compose(&self, other: &Self) -> Self {
        let l = lcm(self.level, other.level);
        let a = self.unit_at(l);
        let b = other.unit_at(l);
        GaloisElt { level: l, unit: ((a as u128 * b as u128) % l as u128) as u64 }
    }

    pub fn inverse(&self) -> Self {
        let e = mult_order(self.unit, self.level);
        GaloisElt { level: self.level, unit: pow_mod(self.unit, e - 1, self.level) }
    }

    /// Applies the automorphism. Values at a level not dividing the
    /// automorphism's level are handled by extending the unit to the lcm.
    pub fn act(&self, x: &Cyclotomic) -> Cyclotomic {
        let l = lcm(self.level, x.level);
        let u = self.unit_at(l);
        let x = x.lift(l);
        let ld = level_data(l);
        let mut acc = vec![BigRational::zero(); ld.phi];
        for (j, c) in x.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let k = ((j as u128 * u as u128) % l as u128) as usize;
            for (a, &p) in acc.iter_mut().zip(ld.powers[k].iter()) {
                if p != 0 {
                    *a += c * rat(p);
                }
            }
        }
        Cyclotomic { level: l, coeffs: acc }
    }
}

/// A Galois element acting as ζ ↦ ζ^{ℓ^r} on ℓ′-roots of unity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HEllElt {
    pub base: GaloisElt,
    pub ell: u64,
    pub r: u64,
}

impl HEllElt {
    pub fn from_unit(level: u64, unit: u64, ell: u64) -> Result<Self, CycloError> {
        let base = GaloisElt::new(level, unit)?;
        let (_, m) = split_ell(level, ell);
        if m == 1 {
            return Ok(HEllElt { base, ell, r: 0 });
        }
        let ord = mult_order(ell % m, m);
        (0..ord)
            .find(|&r| pow_mod(ell, r, m) == base.unit % m)
            .map(|r| HEllElt { base, ell, r })
            .ok_or(CycloError::NotInHEll { level, unit, ell })
    }

    pub fn compose(&self, other: &Self) -> Self {
        let b = self.base.compose(&other.base);
        HEllElt::from_unit(b.level, b.unit, self.ell).expect("H_ell is closed under composition")
    }

    pub fn act(&self, x: &Cyclotomic) -> Cyclotomic {
        self.base.act(x)
    }

    /// Re-expresses the element at a level that is a multiple of the current one.
    pub fn lift(&self, m: u64) -> Self {
        let b = self.base.lift(m);
        HEllElt::from_unit(b.level, b.unit, self.ell).expect("lift stays in H_ell")
    }
}

/// √p as an element of a cyclotomic field, with the classical Gauss-sum sign.
pub fn sqrt_as_cyclotomic(p: u64) -> Cyclotomic {
    assert!(is_prime(p), "sqrt_as_cyclotomic needs a prime");
    if p == 2 {
        return &Cyclotomic::zeta(8, 1) + &Cyclotomic::zeta(8, -1);
    }
    let mut w = vec![0i64; p as usize];
    for t in 1..p {
        w[t as usize] = legendre(t as i64, p) as i64;
    }
    let g = Cyclotomic::from_exponent_weights(p, &w);
    if p % 4 == 1 {
        g
    } else {
        // g = i√p
        -&(&Cyclotomic::zeta(4, 1) * &g)
    }
}

/// Whether σ fixes √p, by the quadratic-residue criterion for odd ℓ
/// and by direct evaluation for ℓ = 2.
pub fn sqrt_fixed(p: u64, sigma: &HEllElt) -> Result<bool, CycloError> {
    if p == sigma.ell {
        return Err(CycloError::PEqualsEll(p));
    }
    if sigma.ell == 2 {
        let s = sqrt_as_cyclotomic(p);
        return Ok(sigma.act(&s) == s);
    }
    Ok(sigma.r % 2 == 0 || legendre(p as i64, sigma.ell) == 1)
}

/// Units of (Z/n)^× acting as a power of ℓ on the ℓ′-part, by enumeration.
pub fn h_ell_units(ell: u64, n: u64) -> Vec<u64> {
    let (_, m) = split_ell(n, ell);
    let powers: Vec<u64> = if m == 1 {
        vec![0]
    } else {
        (0..mult_order(ell % m, m)).map(|r| pow_mod(ell, r, m)).collect()
    };
    (0..n.max(1))
        .filter(|&u| n == 1 || gcd(u, n) == 1)
        .filter(|&u| m == 1 || powers.contains(&(u % m)))
        .collect()
}

/// A generating set of the image of 𝓗_ℓ in Gal(Q(ζ_n)/Q).
pub fn h_ell_generators(ell: u64, n: u64) -> Vec<HEllElt> {
    let (pa, m) = split_ell(n, ell);
    let mut gens = Vec::new();
    let mk = |u_m: u64, u_pa: u64| -> u64 {
        if pa == 1 {
            u_m % m
        } else if m == 1 {
            u_pa % pa
        } else {
            crt(u_m % m, m, u_pa % pa, pa)
        }
    };
    if m > 1 {
        let u = mk(ell % m, 1);
        gens.push(HEllElt::from_unit(n, u, ell).unwrap());
    }
    if pa > 1 {
        let local: Vec<u64> = if ell == 2 {
            let mut v = vec![pa - 1];
            if pa >= 8 {
                v.push(5);
            }
            v
        } else {
            let g = (2..pa).find(|&g| g % ell != 0 && mult_order(g, pa) == pa / ell * (ell - 1));
            g.into_iter().collect()
        };
        for g in local {
            let u = mk(1, g);
            gens.push(HEllElt::from_unit(n, u, ell).unwrap());
        }
    }
    if gens.is_empty() {
        gens.push(HEllElt::from_unit(n, 1 % n.max(1), ell).unwrap());
    }
    gens
}

/// Closure of a set of units under multiplication modulo n.
pub fn generated_units(n: u64, gens: &[u64]) -> Vec<u64> {
    let mut seen = vec![false; n as usize];
    let start = 1 % n;
    seen[start as usize] = true;
    let mut stack = vec![start];
    let mut out = vec![start];
    while let Some(x) = stack.pop() {
        for &g in gens {
            let y = ((x as u128 * g as u128) % n as u128) as u64;
            if !seen[y as usize] {
                seen[y as usize] = true;
                out.push(y);
                stack.push(y);
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_ell_examples() {
        assert_eq!(d_ell(7, 2).unwrap(), 2);
        assert_eq!(d_ell(5, 2).unwrap(), 1);
        assert_eq!(d_ell(2, 7).unwrap(), 3);
        assert!(d_ell(9, 3).is_err());
    }

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(*cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(*cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(*cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(*cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
        let p105 = cyclotomic_poly(105);
        assert_eq!(p105.len() - 1, 48);
        assert!(p105.contains(&-2));
    }

    #[test]
    fn zeta_relations() {
        let z = Cyclotomic::zeta(12, 1);
        assert_eq!(z.pow(12), Cyclotomic::one());
        assert_eq!(z.pow(6), Cyclotomic::from_int(-1));
        assert_eq!(Cyclotomic::zeta(12, 4), Cyclotomic::zeta(3, 1));
        let s: Cyclotomic = (0..5).map(|k| Cyclotomic::zeta(5, k)).fold(Cyclotomic::zero(), |a, b| a + b);
        assert!(s.is_zero());
    }

    #[test]
    fn act_examples() {
        let x = &Cyclotomic::zeta(8, 1) + &Cyclotomic::zeta(8, -1);
        let c = GaloisElt::new(8, 7).unwrap();
        assert_eq!(c.act(&x), x);
        let s = GaloisElt::new(3, 7 % 3).unwrap();
        assert_eq!(s.act(&Cyclotomic::zeta(3, 1)), Cyclotomic::zeta(3, 1));
        let g5 = sqrt_as_cyclotomic(5);
        let non = GaloisElt::new(5, 2).unwrap();
        assert_eq!(non.act(&g5), -&g5);
    }

    #[test]
    fn sqrt_examples() {
        let s2 = sqrt_as_cyclotomic(2);
        assert_eq!(s2, &Cyclotomic::zeta(8, 1) + &Cyclotomic::zeta(8, 7));
        let s5 = sqrt_as_cyclotomic(5);
        let expect = Cyclotomic::from_exponent_weights(5, &[0, 1, -1, -1, 1]);
        assert_eq!(s5, expect);
        let s3 = sqrt_as_cyclotomic(3);
        let g3 = Cyclotomic::from_exponent_weights(3, &[0, 1, -1]);
        assert_eq!(&g3 * &g3, Cyclotomic::from_int(-3));
        assert_eq!(s3, -&(&Cyclotomic::zeta(4, 1) * &g3));
        for p in [2u64, 3, 5, 7, 11, 13] {
            let s = sqrt_as_cyclotomic(p);
            let (re, im) = s.approx();
            assert!((re - (p as f64).sqrt()).abs() < 1e-9 && im.abs() < 1e-9, "p={p}");
        }
    }

    #[test]
    fn sqrt_fixed_examples() {
        let s = HEllElt::from_unit(7 * 8, crt(7, 8, 1, 7), 7).unwrap();
        // unit ≡ 7 mod 8 means r = 1 on the 2-part
        assert_eq!(s.r, 1);
        assert!(sqrt_fixed(2, &s).unwrap());
        let s = HEllElt::from_unit(5 * 12, crt(5, 12, 1, 5), 5).unwrap();
        assert_eq!(s.r, 1);
        assert!(!sqrt_fixed(3, &s).unwrap());
        assert_eq!(s.act(&sqrt_as_cyclotomic(3)), -&sqrt_as_cyclotomic(3));
        let s = HEllElt::from_unit(5 * 12, crt(25 % 12, 12, 1, 5), 5).unwrap();
        assert_eq!(s.r % 2, 0);
        assert!(sqrt_fixed(3, &s).unwrap());
        assert!(sqrt_fixed(7, &HEllElt::from_unit(7, 3, 7).unwrap()).is_err());
    }

    #[test]
    fn h_ell_generator_examples() {
        // CRT enumeration: units mod 24 that are powers of 2 mod 3
        let oracle = h_ell_units(2, 24);
        let gens: Vec<u64> = h_ell_generators(2, 24).iter().map(|g| g.base.unit).collect();
        assert_eq!(generated_units(24, &gens), oracle);
        assert_eq!(oracle.len(), 8);

        let gens: Vec<u64> = h_ell_generators(7, 7).iter().map(|g| g.base.unit).collect();
        assert_eq!(generated_units(7, &gens).len(), 6);

        let oracle = h_ell_units(3, 15);
        let gens: Vec<u64> = h_ell_generators(3, 15).iter().map(|g| g.base.unit).collect();
        assert_eq!(generated_units(15, &gens), oracle);
        // <3 mod 5> is all of (Z/5)^x, times (Z/3)^x
        assert_eq!(oracle.len(), 8);
    }

    #[test]
    fn h_ell_generators_many_levels() {
        for ell in [2u64, 3, 5, 7] {
            for n in 1..=120u64 {
                let oracle = h_ell_units(ell, n);
                let gens: Vec<u64> =
                    h_ell_generators(ell, n).iter().map(|g| g.base.unit).collect();
                assert_eq!(generated_units(n, &gens), oracle, "ell={ell} n={n}");
            }
        }
    }

    #[test]
    fn rationality() {
        assert!(Cyclotomic::from_rational(BigRational::new(3.into(), 2.into())).is_rational());
        assert!(!Cyclotomic::zeta(3, 1).is_rational());
        assert!(!sqrt_as_cyclotomic(2).is_rational());
        let x = &Cyclotomic::zeta(3, 1) + &Cyclotomic::zeta(3, 2);
        assert!(x.is_rational());
    }

    #[test]
    fn inverse_and_normalize() {
        let x = &Cyclotomic::zeta(7, 1) + &Cyclotomic::from_int(2);
        let y = x.inverse().unwrap();
        assert_eq!(&x * &y, Cyclotomic::one());
        let z = Cyclotomic::zeta(3, 1).lift(12);
        assert_eq!(z.normalized().level(), 3);
        assert_eq!(sqrt_as_cyclotomic(3).normalized().level(), 12);
        assert!(Cyclotomic::zero().inverse().is_err());
    }

    #[test]
    fn text_roundtrip() {
        let x = &Cyclotomic::zeta(5, 2).scale(&BigRational::new(3.into(), 4.into())) + &Cyclotomic::from_int(-2);
        let s = x.to_string();
        let y: Cyclotomic = s.parse().unwrap();
        assert_eq!(x, y);
        assert!("(4, [1])".parse::<Cyclotomic>().is_err());
        assert!("(0, [])".parse::<Cyclotomic>().is_err());
        assert!("(3, [1, 2/0])".parse::<Cyclotomic>().is_err());
        assert_eq!("( 1 , [ -7/3 ])".parse::<Cyclotomic>().unwrap().to_rational().unwrap(), BigRational::new((-7).into(), 3.into()));
    }
}
