//! Diagonal symmetry groups written additively in `(Q/Z)^m`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::abelian::{all_subgroups, CyclicProduct};
use crate::error::{Error, Result};
use crate::invertible_poly::{ExponentMatrix, WeightSystem};
use crate::matrix::{row_span_basis, smith, Matrix};

/// Guard against accidentally enumerating huge groups.
pub const ORDER_CAP: usize = 1_000_000;

/// Element of `Q/Z` as a reduced fraction in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RationalResidue {
    num: u64,
    den: u64,
}

impl RationalResidue {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidSymmetry("zero denominator".into()));
        }
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        let r = num.mod_floor(&den);
        let g = r.gcd(&den);
        Ok(RationalResidue { num: (r / g) as u64, den: (den / g) as u64 })
    }

    pub fn zero() -> Self {
        RationalResidue { num: 0, den: 1 }
    }

    pub fn from_ratio(r: &Ratio<i64>) -> Self {
        Self::new(*r.numer(), *r.denom()).expect("ratio has nonzero denominator")
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_ratio(&self) -> Ratio<i64> {
        Ratio::new(self.num as i64, self.den as i64)
    }

    pub fn add(&self, o: &Self) -> Self {
        let l = self.den.lcm(&o.den);
        Self::new((self.num * (l / self.den) + o.num * (l / o.den)) as i64, l as i64).unwrap()
    }

    pub fn neg(&self) -> Self {
        Self::new(-(self.num as i64), self.den as i64).unwrap()
    }

    pub fn scale(&self, k: i64) -> Self {
        Self::new((self.num as i64) * k, self.den as i64).unwrap()
    }
}

impl fmt::Display for RationalResidue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num == 0 {
            write!(f, "0")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for RationalResidue {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("bad residue '{s}'"));
        match s.split_once('/') {
            Some((n, d)) => Self::new(n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?),
            None => Self::new(s.parse().map_err(|_| bad())?, 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DiagonalSymmetry {
    pub entries: Vec<RationalResidue>,
}

impl DiagonalSymmetry {
    pub fn identity(m: usize) -> Self {
        DiagonalSymmetry { entries: vec![RationalResidue::zero(); m] }
    }

    pub fn from_ratios(r: &[Ratio<i64>]) -> Self {
        DiagonalSymmetry { entries: r.iter().map(RationalResidue::from_ratio).collect() }
    }

    pub fn from_pairs(p: &[(i64, i64)]) -> Self {
        DiagonalSymmetry { entries: p.iter().map(|&(n, d)| RationalResidue::new(n, d).unwrap()).collect() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        DiagonalSymmetry { entries: self.entries.iter().zip(&o.entries).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn neg(&self) -> Self {
        DiagonalSymmetry { entries: self.entries.iter().map(|a| a.neg()).collect() }
    }

    pub fn scale(&self, k: i64) -> Self {
        DiagonalSymmetry { entries: self.entries.iter().map(|a| a.scale(k)).collect() }
    }

    pub fn order(&self) -> u64 {
        self.entries.iter().fold(1, |acc, e| acc.lcm(&e.den))
    }

    /// Sum of entries is an integer.
    pub fn is_special_linear(&self) -> bool {
        self.entries.iter().fold(RationalResidue::zero(), |acc, e| acc.add(e)).is_zero()
    }

    /// Old coordinate `i` moves to position `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let mut e = vec![RationalResidue::zero(); self.len()];
        for (i, &p) in perm.iter().enumerate() {
            e[p] = self.entries[i];
        }
        DiagonalSymmetry { entries: e }
    }
}

impl fmt::Display for DiagonalSymmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for DiagonalSymmetry {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        Ok(DiagonalSymmetry { entries: s.split(',').map(|p| p.parse()).collect::<Result<_>>()? })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryGroup {
    m: usize,
    generators: Vec<DiagonalSymmetry>,
    elements: BTreeSet<DiagonalSymmetry>,
}

impl SymmetryGroup {
    pub fn trivial(m: usize) -> Self {
        let mut elements = BTreeSet::new();
        elements.insert(DiagonalSymmetry::identity(m));
        SymmetryGroup { m, generators: Vec::new(), elements }
    }

    /// The subgroup of `(Q/Z)^m` generated by `gens`.
    pub fn generated(m: usize, gens: &[DiagonalSymmetry]) -> Result<Self> {
        let mut g = Self::trivial(m);
        for x in gens {
            if x.len() != m {
                return Err(Error::InvalidSymmetry(format!("symmetry {x} has wrong length, expected {m}")));
            }
            g = g.extend(x)?;
        }
        Ok(g)
    }

    fn extend(&self, x: &DiagonalSymmetry) -> Result<Self> {
        let mut generators = self.generators.clone();
        generators.push(x.clone());
        if self.elements.contains(x) {
            return Ok(SymmetryGroup { m: self.m, generators, elements: self.elements.clone() });
        }
        let mut elements = self.elements.clone();
        let mut k = x.clone();
        while !self.elements.contains(&k) {
            for h in &self.elements {
                elements.insert(h.add(&k));
            }
            if elements.len() > ORDER_CAP {
                return Err(Error::InvalidSymmetry(format!("group order exceeds cap {ORDER_CAP}")));
            }
            k = k.add(x);
        }
        Ok(SymmetryGroup { m: self.m, generators, elements })
    }

    pub fn ambient_size(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[DiagonalSymmetry] {
        &self.generators
    }

    pub fn elements(&self) -> impl Iterator<Item = &DiagonalSymmetry> {
        self.elements.iter()
    }

    pub fn contains(&self, x: &DiagonalSymmetry) -> bool {
        self.elements.contains(x)
    }

    pub fn is_subgroup_of(&self, other: &SymmetryGroup) -> bool {
        self.m == other.m && self.elements.is_subset(&other.elements)
    }

    pub fn filter(&self, keep: impl Fn(&DiagonalSymmetry) -> bool) -> SymmetryGroup {
        let elements: BTreeSet<DiagonalSymmetry> = self.elements.iter().filter(|x| keep(x)).cloned().collect();
        SymmetryGroup { m: self.m, generators: minimal_generating_list(self.m, &elements), elements }
    }

    /// Lowest common denominator of all entries.
    pub fn exponent(&self) -> u64 {
        self.elements.iter().fold(1, |acc, e| acc.lcm(&e.order()))
    }
}

/// Greedy generating list for an element set that is known to be a group.
fn minimal_generating_list(m: usize, elements: &BTreeSet<DiagonalSymmetry>) -> Vec<DiagonalSymmetry> {
    let mut sorted: Vec<&DiagonalSymmetry> = elements.iter().collect();
    sorted.sort_by_key(|x| std::cmp::Reverse(x.order()));
    let mut g = SymmetryGroup::trivial(m);
    for x in sorted {
        if g.order() == elements.len() {
            break;
        }
        if !g.contains(x) {
            g = g.extend(x).expect("subgroup of an enumerated group");
        }
    }
    g.generators
}

/// `G_max`: generated by the columns of `A^{-1}`.
pub fn max_group(a: &ExponentMatrix) -> SymmetryGroup {
    let m = a.size();
    let inv = a.to_matrix().inverse_rational().expect("exponent matrix is invertible");
    let gens: Vec<DiagonalSymmetry> =
        (0..m).map(|j| DiagonalSymmetry::from_ratios(&(0..m).map(|i| inv[i][j]).collect::<Vec<_>>())).collect();
    SymmetryGroup::generated(m, &gens).expect("maximal group below order cap")
}

/// The exponential grading element `(q_i / d)`.
pub fn j_generator(w: &WeightSystem) -> DiagonalSymmetry {
    DiagonalSymmetry::from_ratios(&w.weights.iter().map(|&q| Ratio::new(q, w.degree)).collect::<Vec<_>>())
}

pub fn j_group(w: &WeightSystem) -> SymmetryGroup {
    SymmetryGroup::generated(w.weights.len(), &[j_generator(w)]).expect("cyclic group")
}

pub fn sl_subgroup(g: &SymmetryGroup) -> SymmetryGroup {
    g.filter(|x| x.is_special_linear())
}

pub fn subgroup_generated(ambient: &SymmetryGroup, gens: &[DiagonalSymmetry]) -> Result<SymmetryGroup> {
    for x in gens {
        if !ambient.contains(x) {
            return Err(Error::InvalidSymmetry(format!("element {x} not in ambient group")));
        }
    }
    SymmetryGroup::generated(ambient.ambient_size(), gens)
}

/// Pairing `g A h^T` in `Q`.
pub fn pairing(g: &DiagonalSymmetry, a: &ExponentMatrix, h: &DiagonalSymmetry) -> Ratio<i64> {
    let m = a.size();
    let mut s = Ratio::zero();
    for i in 0..m {
        if g.entries[i].is_zero() {
            continue;
        }
        for j in 0..m {
            let aij = a.get(i, j) as i64;
            if aij != 0 {
                s += g.entries[i].to_ratio() * Ratio::from_integer(aij) * h.entries[j].to_ratio();
            }
        }
    }
    s
}

/// BHK dual group inside `G_max(A^T)`.
pub fn dual_group(g: &SymmetryGroup, a: &ExponentMatrix) -> Result<SymmetryGroup> {
    let gmax = max_group(a);
    if !g.is_subgroup_of(&gmax) {
        return Err(Error::GroupNotInMax);
    }
    let gens: Vec<DiagonalSymmetry> =
        if g.generators().is_empty() { Vec::new() } else { g.generators().to_vec() };
    let tmax = max_group(&a.transpose());
    Ok(tmax.filter(|x| gens.iter().all(|h| pairing(x, a, h).is_integer())))
}

pub fn groups_equal(g: &SymmetryGroup, h: &SymmetryGroup) -> bool {
    g.m == h.m && g.elements == h.elements
}

pub fn permute_coordinates(g: &SymmetryGroup, perm: &[usize]) -> Result<SymmetryGroup> {
    let mut check = perm.to_vec();
    check.sort_unstable();
    if perm.len() != g.m || check.iter().enumerate().any(|(i, &p)| i != p) {
        return Err(Error::InvalidSymmetry(format!("{perm:?} is not a permutation of {} coordinates", g.m)));
    }
    Ok(SymmetryGroup {
        m: g.m,
        generators: g.generators.iter().map(|x| x.permute(perm)).collect(),
        elements: g.elements.iter().map(|x| x.permute(perm)).collect(),
    })
}

/// Integer lattice `{D x : x in G} + D Z^m`, returned as a row basis.
fn lift_lattice(g: &SymmetryGroup, d: u64) -> Matrix<i128> {
    let m = g.m;
    let mut rows: Vec<Vec<i128>> = Vec::new();
    for x in g.generators() {
        rows.push(x.entries.iter().map(|e| (e.num * (d / e.den)) as i128).collect());
    }
    for i in 0..m {
        let mut r = vec![0i128; m];
        r[i] = d as i128;
        rows.push(r);
    }
    row_span_basis(&Matrix::from_rows(rows))
}

/// Coordinates of the rows of `v` in the row basis `b`; fails if not integral.
fn coordinates(b: &Matrix<i128>, v: &Matrix<i128>) -> Option<Matrix<i128>> {
    let bt = b.transpose();
    let inv = bt.inverse_rational()?;
    let mut rows = Vec::new();
    for r in v.to_rows() {
        let mut c = Vec::new();
        for row in &inv {
            let s = row.iter().zip(&r).fold(Ratio::zero(), |acc: Ratio<i128>, (x, y)| acc + x * Ratio::from_integer(*y));
            if !s.is_integer() {
                return None;
            }
            c.push(s.to_integer());
        }
        rows.push(c);
    }
    Some(Matrix::from_rows(rows))
}

/// Presentation of `G/N`: invariant factors and lifts of the quotient generators.
#[derive(Clone, Debug)]
pub struct QuotientPresentation {
    pub invariant_factors: Vec<u64>,
    pub lifts: Vec<DiagonalSymmetry>,
}

pub fn quotient_presentation(g: &SymmetryGroup, n: &SymmetryGroup) -> Result<QuotientPresentation> {
    if !n.is_subgroup_of(g) {
        return Err(Error::NotASubgroup("N is not contained in G".into()));
    }
    let d = g.exponent().lcm(&n.exponent());
    let bg = lift_lattice(g, d);
    let bn = lift_lattice(n, d);
    let c = coordinates(&bg, &bn).ok_or_else(|| Error::NotASubgroup("lattice coordinates not integral".into()))?;
    let s = smith(&c);
    let vinv = s.right.inverse_unimodular().expect("smith transform is unimodular");
    let newbasis = vinv.mul(&bg);
    let mut invariant_factors = Vec::new();
    let mut lifts = Vec::new();
    for (i, f) in s.invariant_factors.iter().enumerate() {
        if *f > 1 {
            invariant_factors.push(*f as u64);
            let row = newbasis.row(i);
            lifts.push(DiagonalSymmetry {
                entries: row.iter().map(|&v| RationalResidue::new(v as i64, d as i64).unwrap()).collect(),
            });
        }
    }
    Ok(QuotientPresentation { invariant_factors, lifts })
}

/// Invariant factors of `G/N`, e.g. `[2, 4]`.
pub fn quotient_invariants(g: &SymmetryGroup, n: &SymmetryGroup) -> Result<Vec<u64>> {
    Ok(quotient_presentation(g, n)?.invariant_factors)
}

/// All `G` with `J <= G <= SL`, via the subgroups of `SL/J`.
pub fn enumerate_intermediate(j: &SymmetryGroup, sl: &SymmetryGroup) -> Result<Vec<SymmetryGroup>> {
    let p = quotient_presentation(sl, j)?;
    let cp = CyclicProduct::new(p.invariant_factors.clone());
    let mut out = Vec::new();
    for sub in all_subgroups(&cp) {
        let mut gens: Vec<DiagonalSymmetry> = j.generators().to_vec();
        for idx in &sub.generators {
            let coords = cp.decode(*idx);
            let mut x = DiagonalSymmetry::identity(sl.m);
            for (c, lift) in coords.iter().zip(&p.lifts) {
                x = x.add(&lift.scale(*c as i64));
            }
            gens.push(x);
        }
        out.push(SymmetryGroup::generated(sl.m, &gens)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invertible_poly::{parse_polynomial, transpose, weight_system};

    fn setup(s: &str) -> (ExponentMatrix, SymmetryGroup, SymmetryGroup, SymmetryGroup) {
        let a = parse_polynomial(s).unwrap().exponent_matrix();
        let gmax = max_group(&a);
        let j = subgroup_generated(&gmax, j_group(&weight_system(&a).unwrap()).generators()).unwrap();
        let sl = sl_subgroup(&gmax);
        (a, gmax, j, sl)
    }

    #[test]
    fn residues_reduce() {
        let r: RationalResidue = "6/8".parse().unwrap();
        assert_eq!((r.numerator(), r.denominator()), (3, 4));
        let r: RationalResidue = "-1/4".parse().unwrap();
        assert_eq!(r.to_string(), "3/4");
        assert!(RationalResidue::new(2, 2).unwrap().is_zero());
        assert!(RationalResidue::new(1, 0).is_err());
    }

    #[test]
    fn fermat_quartic_groups() {
        let (a, gmax, j, sl) = setup("x^4+y^4+z^4+w^4");
        assert_eq!(gmax.order(), 256);
        assert_eq!(sl.order(), 64);
        assert_eq!(j.order(), 4);
        assert_eq!(quotient_invariants(&sl, &j).unwrap(), vec![4, 4]);
        // subgroups of Z/4 x Z/4
        assert_eq!(enumerate_intermediate(&j, &sl).unwrap().len(), 15);
        assert!(groups_equal(&dual_group(&j, &a).unwrap(), &sl));
        assert!(groups_equal(&dual_group(&sl, &a).unwrap(), &j));
    }

    #[test]
    fn curated_generator() {
        let (_, gmax, j, _) = setup("x^4+y^4+z^4+w^4");
        let mut gens = j.generators().to_vec();
        gens.push("1/4,3/4,0,0".parse().unwrap());
        let g = subgroup_generated(&gmax, &gens).unwrap();
        assert_eq!(quotient_invariants(&g, &j).unwrap(), vec![4]);
        assert!(g.elements().all(|x| x.is_special_linear()));
    }

    #[test]
    fn generator_outside_gmax_is_rejected() {
        let (_, gmax, _, _) = setup("x^2z+y^4+z^4+w^8");
        let bad: DiagonalSymmetry = "1/3,0,0,2/3".parse().unwrap();
        assert!(subgroup_generated(&gmax, &[bad]).is_err());
    }

    #[test]
    fn chain_dual_laws() {
        let p = parse_polynomial("x^2z+y^4+z^4+w^8").unwrap();
        let (a, _, j, sl) = setup("x^2z+y^4+z^4+w^8");
        let at = transpose(&p).exponent_matrix();
        let gmax_t = max_group(&at);
        let jt = subgroup_generated(&gmax_t, j_group(&weight_system(&at).unwrap()).generators()).unwrap();
        assert!(groups_equal(&dual_group(&j, &a).unwrap(), &sl_subgroup(&gmax_t)));
        assert!(groups_equal(&dual_group(&sl, &a).unwrap(), &jt));
    }

    #[test]
    fn pairing_is_bilinear() {
        let (a, gmax, _, _) = setup("x^4+y^3z+z^3w+yw^3");
        let els: Vec<&DiagonalSymmetry> = gmax.elements().take(12).collect();
        for g in &els {
            for h in &els {
                for k in &els {
                    let lhs = pairing(&g.add(h), &a, k) - pairing(g, &a, k) - pairing(h, &a, k);
                    assert!(lhs.is_integer());
                }
            }
        }
    }

    #[test]
    fn permuting_coordinates() {
        let (_, gmax, j, _) = setup("x^4+y^4+z^4+w^4");
        let g = subgroup_generated(&gmax, &["1/4,3/4,0,0".parse().unwrap(), j.generators()[0].clone()]).unwrap();
        let p = permute_coordinates(&g, &[2, 3, 0, 1]).unwrap();
        assert!(p.contains(&"0,0,1/4,3/4".parse().unwrap()));
        assert!(permute_coordinates(&g, &[0, 0, 1, 2]).is_err());
    }
}
