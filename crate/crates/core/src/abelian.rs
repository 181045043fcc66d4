//! Finite abelian groups presented as products of cyclic groups.

use std::collections::HashSet;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{smith, Matrix};

/// A finite abelian group in invariant-factor form `Z/d1 x ... x Z/dr`, `d1 | d2 | ...`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteAbelianGroup {
    factors: Vec<u64>,
}

impl FiniteAbelianGroup {
    pub fn new(factors: Vec<u64>) -> Result<Self> {
        if factors.iter().any(|&d| d < 2) {
            return Err(Error::InvalidSymbol(format!("invariant factors must be at least 2: {factors:?}")));
        }
        if factors.windows(2).any(|w| w[1] % w[0] != 0) {
            return Err(Error::InvalidSymbol(format!("invariant factors must form a divisibility chain: {factors:?}")));
        }
        Ok(FiniteAbelianGroup { factors })
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup { factors: Vec::new() }
    }

    /// Invariant factors of `Z/n1 x ... x Z/nk` for arbitrary cyclic orders.
    pub fn from_cyclic_orders(orders: &[u64]) -> Self {
        FiniteAbelianGroup { factors: invariant_factors_of_orders(orders) }
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().product()
    }

    /// Minimal number of generators.
    pub fn length(&self) -> usize {
        self.factors.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "trivial");
        }
        let parts: Vec<String> = self.factors.iter().map(|d| format!("Z/{d}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

pub fn invariant_factors_of_orders(orders: &[u64]) -> Vec<u64> {
    let n = orders.len();
    if n == 0 {
        return Vec::new();
    }
    let mut m = Matrix::<i128>::zeros(n, n);
    for (i, &o) in orders.iter().enumerate() {
        m[(i, i)] = o as i128;
    }
    smith(&m).invariant_factors.into_iter().map(|d| d as u64).filter(|&d| d > 1).collect()
}

/// Mixed-radix indexing of `Z/n1 x ... x Z/nk`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicProduct {
    pub orders: Vec<u64>,
}

impl CyclicProduct {
    pub fn new(orders: Vec<u64>) -> Self {
        assert!(orders.iter().all(|&o| o >= 1));
        CyclicProduct { orders }
    }

    pub fn size(&self) -> usize {
        self.orders.iter().product::<u64>() as usize
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn encode(&self, x: &[u64]) -> usize {
        let mut idx = 0usize;
        for (i, &o) in self.orders.iter().enumerate() {
            idx = idx * o as usize + (x[i] % o) as usize;
        }
        idx
    }

    pub fn decode(&self, mut idx: usize) -> Vec<u64> {
        let mut x = vec![0; self.orders.len()];
        for i in (0..self.orders.len()).rev() {
            let o = self.orders[i] as usize;
            x[i] = (idx % o) as u64;
            idx /= o;
        }
        x
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let (x, y) = (self.decode(a), self.decode(b));
        let s: Vec<u64> = x.iter().zip(&y).zip(&self.orders).map(|((p, q), o)| (p + q) % o).collect();
        self.encode(&s)
    }

    pub fn scale(&self, a: usize, k: u64) -> usize {
        let x = self.decode(a);
        let s: Vec<u64> = x.iter().zip(&self.orders).map(|(p, o)| (p * (k % o)) % o).collect();
        self.encode(&s)
    }

    pub fn element_order(&self, a: usize) -> u64 {
        let x = self.decode(a);
        x.iter()
            .zip(&self.orders)
            .fold(1u64, |acc, (&p, &o)| acc.lcm(&(o / p.gcd(&o))))
    }

    /// Addition table, `table[a * n + b] = a + b`.
    pub fn addition_table(&self) -> Vec<u32> {
        let n = self.size();
        let elems: Vec<Vec<u64>> = (0..n).map(|i| self.decode(i)).collect();
        let mut t = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                let s: Vec<u64> =
                    elems[a].iter().zip(&elems[b]).zip(&self.orders).map(|((p, q), o)| (p + q) % o).collect();
                t[a * n + b] = self.encode(&s) as u32;
            }
        }
        t
    }
}

/// A subgroup of a `CyclicProduct`, as a membership bitmap plus the generators
/// used to build it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexedSubgroup {
    pub members: Vec<bool>,
    pub generators: Vec<usize>,
}

impl IndexedSubgroup {
    pub fn order(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn elements(&self) -> Vec<usize> {
        self.members.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }
}

fn close_with(table: &[u32], n: usize, members: &[bool], x: usize) -> Vec<bool> {
    let mut out = members.to_vec();
    let base: Vec<usize> = (0..n).filter(|&i| members[i]).collect();
    // add multiples of x until they fall into the subgroup
    let mut k = x;
    while !out[k] {
        for &h in &base {
            out[table[h * n + k] as usize] = true;
        }
        k = table[k * n + x] as usize;
    }
    out
}

/// Enumerates subgroups of `g` generated by elements passing `elem_ok` such
/// that every pair of generators passes `pair_ok`. With trivially true
/// predicates this lists every subgroup.
pub fn enumerate_subgroups(
    g: &CyclicProduct,
    elem_ok: impl Fn(usize) -> bool,
    pair_ok: impl Fn(usize, usize) -> bool,
) -> Vec<IndexedSubgroup> {
    let n = g.size();
    let table = g.addition_table();
    let candidates: Vec<usize> = (1..n).filter(|&x| elem_ok(x)).collect();
    let mut trivial = vec![false; n];
    trivial[0] = true;
    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    seen.insert(trivial.clone());
    let mut out = vec![IndexedSubgroup { members: trivial, generators: Vec::new() }];
    let mut head = 0;
    while head < out.len() {
        let cur = out[head].clone();
        head += 1;
        for &x in &candidates {
            if cur.members[x] {
                continue;
            }
            if !cur.generators.iter().all(|&y| pair_ok(x, y)) || !pair_ok(x, x) {
                continue;
            }
            let members = close_with(&table, n, &cur.members, x);
            if seen.insert(members.clone()) {
                let mut generators = cur.generators.clone();
                generators.push(x);
                out.push(IndexedSubgroup { members, generators });
            }
        }
    }
    out
}

/// All subgroups of `g`.
pub fn all_subgroups(g: &CyclicProduct) -> Vec<IndexedSubgroup> {
    enumerate_subgroups(g, |_| true, |_, _| true)
}
