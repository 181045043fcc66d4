//! Finite quadratic forms `q: A -> Q/2Z` and the generator forms `w`, `u`, `v`.

use std::collections::HashMap;
use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::abelian::{enumerate_subgroups, CyclicProduct, FiniteAbelianGroup};
use crate::error::{Error, Result};
use crate::matrix::{smith, Matrix};

pub type Q = Ratio<i64>;

/// Representative of `x mod m` in `[0, m)`.
pub fn reduce_mod(x: &Q, m: i64) -> Q {
    let m = Q::from_integer(m);
    let k = (x / m).floor();
    x - k * m
}

fn q2(x: &Q) -> Q {
    reduce_mod(x, 2)
}

fn q1(x: &Q) -> Q {
    reduce_mod(x, 1)
}

/// Quadratic form on `Z/n1 x ... x Z/nk` given by its values on generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteQuadraticForm {
    orders: Vec<u64>,
    q: Vec<Q>,
    b: Vec<Vec<Q>>,
}

impl FiniteQuadraticForm {
    pub fn trivial() -> Self {
        FiniteQuadraticForm { orders: Vec::new(), q: Vec::new(), b: Vec::new() }
    }

    /// Builds a form from generator orders, `q(e_i)` and `b(e_i, e_j)`.
    /// The result is re-expressed on an invariant-factor basis.
    pub fn from_parts(orders: Vec<u64>, q: Vec<Q>, b: Vec<Vec<Q>>) -> Result<Self> {
        let k = orders.len();
        if q.len() != k || b.len() != k || b.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidSymbol("inconsistent form data".into()));
        }
        let q: Vec<Q> = q.iter().map(q2).collect();
        let b: Vec<Vec<Q>> = b.iter().map(|r| r.iter().map(q1).collect()).collect();
        for i in 0..k {
            let n = Q::from_integer(orders[i] as i64);
            if !(n * q[i]).is_integer() || !q2(&(n * n * q[i])).is_zero() {
                return Err(Error::InvalidSymbol(format!("q(e{i}) = {} incompatible with order {}", q[i], orders[i])));
            }
            if q1(&q[i]) != b[i][i] {
                return Err(Error::InvalidSymbol(format!("b(e{i},e{i}) differs from q(e{i}) mod 1")));
            }
            for j in 0..k {
                if b[i][j] != b[j][i] || !(n * b[i][j]).is_integer() {
                    return Err(Error::InvalidSymbol(format!("b(e{i},e{j}) not well defined")));
                }
            }
        }
        FiniteQuadraticForm { orders, q, b }.normalized()
    }

    /// Re-expresses the form on generators of orders `d1 | d2 | ...`, dropping trivial ones.
    fn normalized(self) -> Result<Self> {
        let k = self.orders.len();
        let chain_ok = self.orders.iter().all(|&o| o >= 2) && self.orders.windows(2).all(|w| w[1] % w[0] == 0);
        if chain_ok {
            return Ok(self);
        }
        let mut rel = Matrix::<i64>::zeros(k, k);
        for i in 0..k {
            rel[(i, i)] = self.orders[i] as i64;
        }
        let s = smith(&rel);
        let vinv = s.right.inverse_unimodular().expect("unimodular");
        let mut orders = Vec::new();
        let mut gens = Vec::new();
        for (i, d) in s.invariant_factors.iter().enumerate() {
            if *d > 1 {
                orders.push(*d as u64);
                gens.push(vinv.row(i));
            }
        }
        let q: Vec<Q> = gens.iter().map(|g| self.q_coords(g)).collect();
        let b: Vec<Vec<Q>> = gens.iter().map(|x| gens.iter().map(|y| self.b_coords(x, y)).collect()).collect();
        Ok(FiniteQuadraticForm { orders, q, b })
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn group(&self) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(self.orders.clone()).expect("forms are stored in invariant-factor form")
    }

    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    /// Minimal number of generators of the underlying group.
    pub fn length(&self) -> usize {
        self.orders.len()
    }

    pub fn q_gen(&self) -> &[Q] {
        &self.q
    }

    pub fn b_gen(&self) -> &[Vec<Q>] {
        &self.b
    }

    /// `q(sum x_i e_i)` in `[0, 2)`.
    pub fn q_coords(&self, x: &[i64]) -> Q {
        let k = self.orders.len();
        let mut s = Q::zero();
        for i in 0..k {
            if x[i] == 0 {
                continue;
            }
            s += self.q[i] * Q::from_integer(x[i] * x[i]);
            for j in i + 1..k {
                if x[j] != 0 {
                    s += self.b[i][j] * Q::from_integer(2 * x[i] * x[j]);
                }
            }
        }
        q2(&s)
    }

    /// `b(x, y)` in `[0, 1)`.
    pub fn b_coords(&self, x: &[i64], y: &[i64]) -> Q {
        let k = self.orders.len();
        let mut s = Q::zero();
        for i in 0..k {
            if x[i] == 0 {
                continue;
            }
            for j in 0..k {
                if y[j] != 0 {
                    s += self.b[i][j] * Q::from_integer(x[i] * y[j]);
                }
            }
        }
        q1(&s)
    }

    pub fn cyclic_product(&self) -> CyclicProduct {
        CyclicProduct::new(self.orders.clone())
    }

    /// Coordinates of every element, indexed as in `cyclic_product()`.
    pub fn element_coords(&self) -> Vec<Vec<i64>> {
        let cp = self.cyclic_product();
        (0..cp.size()).map(|i| cp.decode(i).into_iter().map(|v| v as i64).collect()).collect()
    }

    pub fn all_q_values(&self) -> Vec<Q> {
        self.element_coords().iter().map(|x| self.q_coords(x)).collect()
    }

    /// Nondegeneracy of `b`: no nonzero element is orthogonal to every generator.
    pub fn is_nondegenerate(&self) -> bool {
        let k = self.orders.len();
        let gens: Vec<Vec<i64>> = (0..k).map(|i| unit(k, i)).collect();
        self.element_coords()
            .iter()
            .skip(1)
            .all(|x| gens.iter().any(|g| !self.b_coords(x, g).is_zero()))
    }
}

fn unit(k: usize, i: usize) -> Vec<i64> {
    let mut v = vec![0; k];
    v[i] = 1;
    v
}

impl fmt::Display for FiniteQuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.orders.is_empty() {
            return write!(f, "trivial");
        }
        write!(f, "{} q=[", self.group())?;
        let qs: Vec<String> = self.q.iter().map(|x| x.to_string()).collect();
        write!(f, "{}] b=[", qs.join(","))?;
        let rows: Vec<String> = self
            .b
            .iter()
            .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "{}]", rows.join(";"))
    }
}

fn legendre(a: i64, p: i64) -> i64 {
    let a = a.mod_floor(&p);
    if a == 0 {
        return 0;
    }
    let mut r = 1i64;
    let mut base = a;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    if r == 1 {
        1
    } else {
        -1
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// `w_{p,k}^eps` on `Z/p^k`.
pub fn w_form(p: u64, k: u32, eps: i64) -> Result<FiniteQuadraticForm> {
    if !is_prime(p) || k == 0 {
        return Err(Error::InvalidSymbol(format!("w_{{{p},{k}}}^{eps}: need prime p and k >= 1")));
    }
    let n = p.pow(k) as i64;
    let qv = if p == 2 {
        if ![1, -1, 5, -5].contains(&eps) {
            return Err(Error::InvalidSymbol(format!("w_{{2,{k}}}^{eps}: epsilon must be one of 1,-1,5,-5")));
        }
        Q::new(eps, n)
    } else {
        if eps != 1 && eps != -1 {
            return Err(Error::InvalidSymbol(format!("w_{{{p},{k}}}^{eps}: epsilon must be 1 or -1")));
        }
        let pi = p as i64;
        let a = (1..).map(|t| 2 * t).find(|&a| legendre(a, pi) == eps).expect("residue exists");
        Q::new(a, n)
    };
    FiniteQuadraticForm::from_parts(vec![n as u64], vec![qv], vec![vec![q1(&qv)]])
}

/// `u_k` on `(Z/2^k)^2`.
pub fn u_form(k: u32) -> Result<FiniteQuadraticForm> {
    if k == 0 {
        return Err(Error::InvalidSymbol("u_0".into()));
    }
    let n = 1i64 << k;
    let h = Q::new(1, n);
    FiniteQuadraticForm::from_parts(vec![n as u64; 2], vec![Q::zero(); 2], vec![vec![Q::zero(), h], vec![h, Q::zero()]])
}

/// `v_k` on `(Z/2^k)^2`.
pub fn v_form(k: u32) -> Result<FiniteQuadraticForm> {
    if k == 0 {
        return Err(Error::InvalidSymbol("v_0".into()));
    }
    let n = 1i64 << k;
    let d = Q::new(2, n);
    let h = Q::new(1, n);
    FiniteQuadraticForm::from_parts(vec![n as u64; 2], vec![d, d], vec![vec![q1(&d), h], vec![h, q1(&d)]])
}

pub fn direct_sum(a: &FiniteQuadraticForm, c: &FiniteQuadraticForm) -> FiniteQuadraticForm {
    let (ka, kc) = (a.orders.len(), c.orders.len());
    let k = ka + kc;
    let mut orders = a.orders.clone();
    orders.extend(&c.orders);
    let mut q = a.q.clone();
    q.extend(&c.q);
    let mut b = vec![vec![Q::zero(); k]; k];
    for i in 0..ka {
        for j in 0..ka {
            b[i][j] = a.b[i][j];
        }
    }
    for i in 0..kc {
        for j in 0..kc {
            b[ka + i][ka + j] = c.b[i][j];
        }
    }
    FiniteQuadraticForm::from_parts(orders, q, b).expect("sum of valid forms is valid")
}

pub fn negate(a: &FiniteQuadraticForm) -> FiniteQuadraticForm {
    FiniteQuadraticForm {
        orders: a.orders.clone(),
        q: a.q.iter().map(|x| q2(&-x)).collect(),
        b: a.b.iter().map(|r| r.iter().map(|x| q1(&-x)).collect()).collect(),
    }
}

/// `n`-fold direct sum.
pub fn power(a: &FiniteQuadraticForm, n: u32) -> FiniteQuadraticForm {
    (0..n).fold(FiniteQuadraticForm::trivial(), |acc, _| direct_sum(&acc, a))
}

// ---------------------------------------------------------------------------
// Gauss sums in Z[zeta_M]

fn poly_divmod_monic(num: &[i128], den: &[i128]) -> (Vec<i128>, Vec<i128>) {
    // coefficient vectors, lowest degree first; den monic
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    if r.len() <= dd {
        return (vec![0], r);
    }
    let mut quot = vec![0i128; r.len() - dd];
    for i in (dd..r.len()).rev() {
        let c = r[i];
        if c == 0 {
            continue;
        }
        quot[i - dd] = c;
        for j in 0..=dd {
            r[i - dd + j] -= c * den[j];
        }
    }
    r.truncate(dd);
    (quot, r)
}

fn cyclotomic(n: usize, memo: &mut HashMap<usize, Vec<i128>>) -> Vec<i128> {
    if let Some(p) = memo.get(&n) {
        return p.clone();
    }
    let mut p = vec![0i128; n + 1];
    p[0] = -1;
    p[n] = 1;
    for d in 1..n {
        if n % d == 0 {
            let c = cyclotomic(d, memo);
            let (quot, rem) = poly_divmod_monic(&p, &c);
            debug_assert!(rem.iter().all(|&x| x == 0));
            p = quot;
        }
    }
    memo.insert(n, p.clone());
    p
}

/// Elements of `Z[x]/(x^m - 1)`, reduced modulo the cyclotomic polynomial when compared.
#[derive(Clone, Debug)]
struct Cyclo {
    m: usize,
    c: Vec<i128>,
}

impl Cyclo {
    fn zero(m: usize) -> Self {
        Cyclo { m, c: vec![0; m] }
    }
    fn monomial(m: usize, k: i64, coeff: i128) -> Self {
        let mut z = Self::zero(m);
        z.c[k.mod_floor(&(m as i64)) as usize] = coeff;
        z
    }
    fn add(&self, o: &Self) -> Self {
        Cyclo { m: self.m, c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }
    fn sub(&self, o: &Self) -> Self {
        Cyclo { m: self.m, c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }
    fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero(self.m);
        for (i, a) in self.c.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if *b != 0 {
                    r.c[(i + j) % self.m] += a * b;
                }
            }
        }
        r
    }
    fn is_zero(&self, phi: &[i128]) -> bool {
        let (_, r) = poly_divmod_monic(&self.c, phi);
        r.iter().all(|&x| x == 0)
    }
}

/// `sqrt(p)` as an element of `Z[zeta_m]` (requires `4p | m` for odd p, `8 | m` for p = 2).
fn sqrt_prime(p: u64, m: usize) -> Cyclo {
    if p == 2 {
        // zeta_8 + zeta_8^{-1}
        let s = (m / 8) as i64;
        return Cyclo::monomial(m, s, 1).add(&Cyclo::monomial(m, -s, 1));
    }
    let pi = p as i64;
    let step = (m as u64 / p) as i64;
    let mut g = Cyclo::zero(m);
    for a in 1..pi {
        g = g.add(&Cyclo::monomial(m, a * step, legendre(a, pi) as i128));
    }
    if p % 4 == 1 {
        g
    } else {
        // g^2 = -p, so sqrt(p) = -i g
        let i_pow = (m / 4) as i64;
        Cyclo::monomial(m, -i_pow, 1).mul(&g)
    }
}

fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        let mut e = 0;
        while n % d == 0 {
            n /= d;
            e += 1;
        }
        if e > 0 {
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Signature mod 8 from the Gauss sum `sum exp(pi i q(a)) = sqrt|A| exp(2 pi i s / 8)`,
/// decided exactly in a cyclotomic ring.
pub fn gauss_signature(f: &FiniteQuadraticForm) -> Result<u8> {
    if !f.is_nondegenerate() {
        return Err(Error::DegenerateForm);
    }
    let values = f.all_q_values();
    let order = f.order();
    let mut m: u64 = 8;
    for v in &values {
        m = m.lcm(&(2 * (*v.denom() as u64)));
    }
    let fac = factorize(order);
    for (p, _) in &fac {
        if *p != 2 {
            m = m.lcm(&(4 * p));
        }
    }
    let m = m as usize;
    let mut sum = Cyclo::zero(m);
    for v in &values {
        // exp(pi i a/b) = zeta_m^{a m / (2b)}
        let k = v.numer() * (m as i64) / (2 * v.denom());
        sum.c[k.mod_floor(&(m as i64)) as usize] += 1;
    }
    let mut root = Cyclo::monomial(m, 0, 1);
    for (p, e) in &fac {
        let int_part = (*p as i128).pow(e / 2);
        root = root.mul(&Cyclo::monomial(m, 0, int_part));
        if e % 2 == 1 {
            root = root.mul(&sqrt_prime(*p, m));
        }
    }
    let mut memo = HashMap::new();
    let phi = cyclotomic(m, &mut memo);
    let step = (m / 8) as i64;
    let hits: Vec<u8> = (0..8u8)
        .filter(|&s| sum.sub(&root.mul(&Cyclo::monomial(m, s as i64 * step, 1))).is_zero(&phi))
        .collect();
    match hits.as_slice() {
        [s] => Ok(*s),
        _ => Err(Error::DegenerateForm),
    }
}

// ---------------------------------------------------------------------------
// Isomorphism

struct Tables {
    cp: CyclicProduct,
    add: Vec<u32>,
    q: Vec<Q>,
    coords: Vec<Vec<i64>>,
    ord: Vec<u64>,
}

impl Tables {
    fn new(f: &FiniteQuadraticForm) -> Self {
        let cp = f.cyclic_product();
        let coords = f.element_coords();
        let q = coords.iter().map(|x| f.q_coords(x)).collect();
        let ord = (0..cp.size()).map(|i| cp.element_order(i)).collect();
        Tables { add: cp.addition_table(), cp, q, coords, ord }
    }
}

fn sorted_values(v: &[Q]) -> Vec<Q> {
    let mut s = v.to_vec();
    s.sort();
    s
}

/// Brute-force isomorphism test: generators of `a` are mapped one at a time to
/// elements of `c` with matching order, `q` value and pairings, keeping the
/// partial image injective.
pub fn is_isomorphic(a: &FiniteQuadraticForm, c: &FiniteQuadraticForm) -> bool {
    find_isomorphism(a, c).is_some()
}

/// Returns images (as coordinate vectors in `c`) of the generators of `a`.
pub fn find_isomorphism(a: &FiniteQuadraticForm, c: &FiniteQuadraticForm) -> Option<Vec<Vec<i64>>> {
    if a.orders != c.orders {
        return None;
    }
    let ta = Tables::new(a);
    let tc = Tables::new(c);
    if sorted_values(&ta.q) != sorted_values(&tc.q) {
        return None;
    }
    let k = a.orders.len();
    let n = tc.cp.size();
    // candidate images per generator
    let cands: Vec<Vec<usize>> = (0..k)
        .map(|i| (0..n).filter(|&y| tc.ord[y] == a.orders[i] && tc.q[y] == a.q[i]).collect())
        .collect();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut members = vec![false; n];
    members[0] = true;
    if search(a, c, &tc, &cands, &mut chosen, members) {
        Some(chosen.iter().map(|&y| tc.coords[y].clone()).collect())
    } else {
        None
    }
}

fn search(
    a: &FiniteQuadraticForm,
    c: &FiniteQuadraticForm,
    tc: &Tables,
    cands: &[Vec<usize>],
    chosen: &mut Vec<usize>,
    members: Vec<bool>,
) -> bool {
    let i = chosen.len();
    if i == cands.len() {
        return true;
    }
    let n = members.len();
    for &y in &cands[i] {
        if members[y] {
            continue;
        }
        let ok = chosen
            .iter()
            .enumerate()
            .all(|(j, &x)| c.b_coords(&tc.coords[y], &tc.coords[x]) == a.b[i][j]);
        if !ok {
            continue;
        }
        // extend the image subgroup and require the expected size
        let mut next = members.clone();
        let base: Vec<usize> = (0..n).filter(|&t| members[t]).collect();
        let mut mult = y;
        let mut count = 1u64;
        while !members[mult] {
            for &h in &base {
                next[tc.add[h * n + mult] as usize] = true;
            }
            mult = tc.add[mult * n + y] as usize;
            count += 1;
        }
        if count != a.orders[i] {
            continue;
        }
        chosen.push(y);
        if search(a, c, tc, cands, chosen, next) {
            return true;
        }
        chosen.pop();
    }
    false
}

// ---------------------------------------------------------------------------
// Isotropic subgroups

/// A subgroup given by element coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormSubgroup {
    pub generators: Vec<Vec<i64>>,
    pub elements: Vec<Vec<i64>>,
}

impl FormSubgroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

/// All subgroups `H` with `q|_H = 0`, the trivial subgroup first.
pub fn isotropic_subgroups(f: &FiniteQuadraticForm) -> Vec<FormSubgroup> {
    let cp = f.cyclic_product();
    let coords = f.element_coords();
    let qv: Vec<Q> = coords.iter().map(|x| f.q_coords(x)).collect();
    let subs = enumerate_subgroups(
        &cp,
        |x| qv[x].is_zero(),
        |x, y| f.b_coords(&coords[x], &coords[y]).is_zero(),
    );
    subs.into_iter()
        .map(|s| FormSubgroup {
            generators: s.generators.iter().map(|&g| coords[g].clone()).collect(),
            elements: s.elements().into_iter().map(|e| coords[e].clone()).collect(),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Expression parser

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
    text: &'a str,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::InvalidSymbol(format!("{msg} at position {} in '{}'", self.i, self.text))
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.i).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<i64> {
        let braced = self.eat(b'{');
        let neg = self.eat(b'-');
        if !neg {
            self.eat(b'+');
        }
        let start = self.i;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.i += 1;
        }
        if start == self.i {
            return Err(self.err("expected integer"));
        }
        let v: i64 = std::str::from_utf8(&self.s[start..self.i]).unwrap().parse().map_err(|_| self.err("bad integer"))?;
        if braced && !self.eat(b'}') {
            return Err(self.err("expected '}'"));
        }
        Ok(if neg { -v } else { v })
    }

    /// Single digit unless braced, as in TeX subscripts.
    fn tex_int(&mut self) -> Result<i64> {
        if self.peek() == Some(b'{') {
            return self.int();
        }
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                self.i += 1;
                let mut v = (c - b'0') as i64;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    v = v * 10 + (self.s[self.i] - b'0') as i64;
                    self.i += 1;
                }
                Ok(v)
            }
            Some(b'-') => self.int(),
            _ => Err(self.err("expected integer")),
        }
    }

    fn pair(&mut self) -> Result<(i64, i64)> {
        let braced = self.eat(b'{');
        let p = self.int()?;
        if !self.eat(b',') {
            return Err(self.err("expected ','"));
        }
        let k = self.int()?;
        if braced && !self.eat(b'}') {
            return Err(self.err("expected '}'"));
        }
        Ok((p, k))
    }

    fn expr(&mut self) -> Result<FiniteQuadraticForm> {
        let mut acc = self.term()?;
        while self.eat(b'+') {
            let t = self.term()?;
            acc = direct_sum(&acc, &t);
        }
        Ok(acc)
    }

    fn repeat(&mut self, base: FiniteQuadraticForm) -> Result<FiniteQuadraticForm> {
        if self.eat(b'^') {
            let n = self.tex_int()?;
            if n < 0 {
                return Err(self.err("negative repetition"));
            }
            Ok(power(&base, n as u32))
        } else {
            Ok(base)
        }
    }

    fn term(&mut self) -> Result<FiniteQuadraticForm> {
        if self.s[self.i..].starts_with(b"trivial") {
            self.i += 7;
            return Ok(FiniteQuadraticForm::trivial());
        }
        match self.peek() {
            Some(b'(') => {
                self.i += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.repeat(inner)
            }
            Some(c @ (b'u' | b'v')) => {
                self.i += 1;
                let k = if self.eat(b'_') { self.tex_int()? } else { 1 };
                if k < 1 {
                    return Err(self.err("subscript must be positive"));
                }
                let base = if c == b'u' { u_form(k as u32)? } else { v_form(k as u32)? };
                self.repeat(base)
            }
            Some(b'w') => {
                self.i += 1;
                let mut pk = None;
                let mut eps = None;
                for _ in 0..2 {
                    if pk.is_none() && self.eat(b'_') {
                        pk = Some(self.pair()?);
                    } else if eps.is_none() && self.eat(b'^') {
                        eps = Some(self.tex_int()?);
                    }
                }
                let (p, k) = pk.ok_or_else(|| self.err("w needs a subscript p,k"))?;
                let eps = eps.ok_or_else(|| self.err("w needs a superscript"))?;
                if p < 2 || k < 1 {
                    return Err(self.err("bad w subscript"));
                }
                w_form(p as u64, k as u32, eps)
            }
            _ => Err(self.err("unexpected symbol")),
        }
    }
}

/// Parses expressions such as `"w_{2,2}^1+(w_{2,2}^5)^3"`, `"u^3"`, `"v+v_2"`, `"trivial"`.
/// `\oplus` and `⊕` are accepted as `+`.
pub fn parse_form_expression(text: &str) -> Result<FiniteQuadraticForm> {
    let cleaned: String = text
        .replace("\\oplus", "+")
        .replace('⊕', "+")
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '$')
        .collect();
    if cleaned.is_empty() {
        return Err(Error::InvalidSymbol("empty form expression".into()));
    }
    let mut p = Parser { s: cleaned.as_bytes(), i: 0, text };
    let f = p.expr()?;
    if p.i != p.s.len() {
        return Err(p.err("trailing input"));
    }
    Ok(f)
}

/// A single generator symbol such as `w_{2,2}^5`, `u_1`, `v`.
pub fn generator_form(symbol: &str) -> Result<FiniteQuadraticForm> {
    if symbol.contains('+') || symbol.contains('(') {
        return Err(Error::InvalidSymbol(format!("'{symbol}' is not a single generator")));
    }
    parse_form_expression(symbol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> FiniteQuadraticForm {
        parse_form_expression(s).unwrap()
    }

    #[test]
    fn generator_values() {
        let w = generator_form("w_{2,2}^5").unwrap();
        assert_eq!(w.orders(), &[4]);
        assert_eq!(w.q_gen()[0], Q::new(5, 4));
        let u = generator_form("u_1").unwrap();
        assert_eq!(u.q_gen(), &[Q::from_integer(0), Q::from_integer(0)]);
        assert_eq!(u.b_gen()[0][1], Q::new(1, 2));
        // q(1) = 4/3 so that A_2 carries w_{3,1}^1
        assert_eq!(generator_form("w_{3,1}^1").unwrap().q_gen()[0], Q::new(4, 3));
        assert_eq!(generator_form("w_{3,1}^-1").unwrap().q_gen()[0], Q::new(2, 3));
    }

    #[test]
    fn inadmissible_symbols() {
        assert!(generator_form("w_{2,2}^3").is_err());
        assert!(generator_form("w_{3,1}^5").is_err());
        assert!(generator_form("w_{4,1}^1").is_err());
        assert!(generator_form("u+v").is_err());
        assert!(parse_form_expression("w_{2,2}").is_err());
        assert!(parse_form_expression("(u").is_err());
        assert!(parse_form_expression("").is_err());
    }

    #[test]
    fn parsing_expressions() {
        assert_eq!(f("w_{2,2}^1+(w_{2,2}^5)^3").orders(), &[4, 4, 4, 4]);
        assert_eq!(f("trivial").order(), 1);
        assert!(is_isomorphic(&f("u^3"), &f("u+u+u")));
        assert!(is_isomorphic(&f("$w_{2,2}^1\\oplus w_{2,2}^5$"), &f("w_{2,2}^1+w_{2,2}^5")));
        assert_eq!(f("v_2").order(), 16);
    }

    #[test]
    fn sums_and_negation() {
        let a = f("w_{2,2}^1");
        let s = direct_sum(&a, &f("w_{2,2}^5"));
        assert_eq!(s.order(), 16);
        assert!(is_isomorphic(&direct_sum(&a, &FiniteQuadraticForm::trivial()), &a));
        assert!(is_isomorphic(&negate(&a), &f("w_{2,2}^-1")));
        assert!(is_isomorphic(&negate(&f("u")), &f("u")));
        assert!(is_isomorphic(&negate(&negate(&s)), &s));
        assert_eq!(negate(&FiniteQuadraticForm::trivial()).order(), 1);
    }

    #[test]
    fn gauss_signatures() {
        assert_eq!(gauss_signature(&FiniteQuadraticForm::trivial()).unwrap(), 0);
        assert_eq!(gauss_signature(&f("w_{2,1}^-1")).unwrap(), 7);
        assert_eq!(gauss_signature(&f("v")).unwrap(), 4);
        assert_eq!(gauss_signature(&f("u")).unwrap(), 0);
        assert_eq!(gauss_signature(&f("w_{2,2}^1")).unwrap(), 1);
        assert_eq!(gauss_signature(&f("w_{3,1}^-1")).unwrap(), 2);
    }

    #[test]
    fn isomorphism_examples() {
        assert!(is_isomorphic(&f("u+u"), &f("v+v")));
        assert!(!is_isomorphic(&f("u"), &f("v")));
        assert!(!is_isomorphic(&f("w_{2,2}^1"), &f("w_{2,2}^-1")));
        assert!(!is_isomorphic(&f("w_{2,2}^1"), &f("w_{2,1}^1+w_{2,1}^1")));
        let a = f("w_{2,2}^1+w_{2,2}^5");
        let b = f("w_{2,2}^5+w_{2,2}^1");
        let m = find_isomorphism(&a, &b).expect("isomorphic");
        assert_eq!(m.len(), a.length());
    }

    #[test]
    fn isotropic_subgroup_examples() {
        assert_eq!(isotropic_subgroups(&f("w_{2,2}^1")).len(), 1);
        let u = isotropic_subgroups(&f("u"));
        assert_eq!(u.len(), 3);
        assert_eq!(u.iter().filter(|h| h.order() == 2).count(), 2);
        assert_eq!(isotropic_subgroups(&FiniteQuadraticForm::trivial()).len(), 1);
    }

    #[test]
    fn degenerate_and_invalid_data() {
        let z = Q::from_integer(0);
        let d = FiniteQuadraticForm::from_parts(vec![2], vec![z], vec![vec![z]]).unwrap();
        assert!(!d.is_nondegenerate());
        assert!(gauss_signature(&d).is_err());
        assert!(FiniteQuadraticForm::from_parts(vec![2], vec![Q::new(1, 4)], vec![vec![Q::new(1, 4)]]).is_err());
        assert!(FiniteQuadraticForm::from_parts(vec![2], vec![Q::new(1, 2)], vec![vec![z]]).is_err());
    }

    #[test]
    fn reduction() {
        assert_eq!(reduce_mod(&Q::new(-1, 4), 2), Q::new(7, 4));
        assert_eq!(reduce_mod(&Q::new(9, 4), 2), Q::new(1, 4));
    }
}
