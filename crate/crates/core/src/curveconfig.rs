//! Curve configurations with a permutation action: orbit divisors, invariant
//! lattices, minimal generating sets and primitivity along chains.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{AmbientSublattice, GramLattice};
use crate::matrix::{column_hnf, integer_kernel, row_span_basis, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Coordinate,
    Exceptional,
    /// Curves that are neither coordinate curves nor exceptional, e.g. lines on a Fermat surface.
    Line,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveNode {
    pub id: u32,
    pub label: String,
    pub genus: u32,
    pub kind: CurveKind,
}

impl CurveNode {
    pub fn self_intersection(&self) -> i64 {
        2 * self.genus as i64 - 2
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigAutomorphism {
    pub name: String,
    pub order: u32,
    /// Disjoint cycles of node ids; unlisted nodes are fixed.
    #[serde(default)]
    pub cycles: Vec<Vec<u32>>,
}

impl ConfigAutomorphism {
    pub fn identity(name: &str) -> Self {
        ConfigAutomorphism { name: name.to_string(), order: 1, cycles: Vec::new() }
    }

    pub fn image(&self, id: u32) -> u32 {
        for c in &self.cycles {
            if let Some(p) = c.iter().position(|&x| x == id) {
                return c[(p + 1) % c.len()];
            }
        }
        id
    }

    /// `self` applied `k` times.
    pub fn power(&self, k: u32, ids: &[u32]) -> ConfigAutomorphism {
        let mut seen = BTreeSet::new();
        let mut cycles = Vec::new();
        for &s in ids {
            if seen.contains(&s) {
                continue;
            }
            let mut cyc = Vec::new();
            let mut x = s;
            loop {
                seen.insert(x);
                cyc.push(x);
                for _ in 0..k {
                    x = self.image(x);
                }
                if x == s {
                    break;
                }
            }
            if cyc.len() > 1 {
                cycles.push(cyc);
            }
        }
        let order = (self.order / num_integer::gcd(self.order, k.max(1))).max(1);
        ConfigAutomorphism { name: format!("{}^{}", self.name, k), order, cycles }
    }
}

/// Sum of curves with unit coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrbitDivisor {
    pub nodes: Vec<u32>,
}

impl OrbitDivisor {
    pub fn new(mut nodes: Vec<u32>) -> Self {
        nodes.sort_unstable();
        OrbitDivisor { nodes }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ConfigFile {
    name: String,
    nodes: Vec<CurveNode>,
    edges: Vec<Vec<u32>>,
    #[serde(default)]
    automorphisms: Vec<ConfigAutomorphism>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveConfiguration {
    pub name: String,
    pub nodes: Vec<CurveNode>,
    edges: BTreeMap<(u32, u32), u32>,
    pub automorphisms: Vec<ConfigAutomorphism>,
}

impl CurveConfiguration {
    pub fn new(
        name: &str,
        nodes: Vec<CurveNode>,
        edges: &[(u32, u32, u32)],
        automorphisms: Vec<ConfigAutomorphism>,
    ) -> Result<Self> {
        let ids: BTreeSet<u32> = nodes.iter().map(|n| n.id).collect();
        if ids.len() != nodes.len() {
            return Err(Error::InvalidConfiguration("duplicate node id".into()));
        }
        let mut map = BTreeMap::new();
        for &(a, b, m) in edges {
            if a == b {
                return Err(Error::InvalidConfiguration(format!("self-edge on node {a}")));
            }
            if !ids.contains(&a) || !ids.contains(&b) {
                return Err(Error::InvalidConfiguration(format!("edge {a}-{b} refers to an unknown node")));
            }
            let key = (a.min(b), a.max(b));
            if map.insert(key, m).is_some() {
                return Err(Error::InvalidConfiguration(format!("edge {a}-{b} listed twice")));
            }
        }
        let cfg = CurveConfiguration { name: name.to_string(), nodes, edges: map, automorphisms };
        for a in &cfg.automorphisms {
            cfg.check_automorphism(a)?;
        }
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ConfigFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfiguration(e.to_string()))?;
        let mut edges = Vec::new();
        for e in &f.edges {
            match e.as_slice() {
                [a, b] => edges.push((*a, *b, 1)),
                [a, b, m] => edges.push((*a, *b, *m)),
                _ => return Err(Error::InvalidConfiguration(format!("bad edge {e:?}"))),
            }
        }
        Self::new(&f.name, f.nodes, &edges, f.automorphisms)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn ids(&self) -> Vec<u32> {
        self.nodes.iter().map(|n| n.id).collect()
    }

    pub fn node(&self, id: u32) -> Option<&CurveNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn automorphism(&self, name: &str) -> Option<&ConfigAutomorphism> {
        self.automorphisms.iter().find(|a| a.name == name)
    }

    pub fn edge(&self, a: u32, b: u32) -> u32 {
        *self.edges.get(&(a.min(b), a.max(b))).unwrap_or(&0)
    }

    pub fn intersection(&self, a: u32, b: u32) -> i64 {
        if a == b {
            self.node(a).map_or(0, |n| n.self_intersection())
        } else {
            self.edge(a, b) as i64
        }
    }

    pub fn check_automorphism(&self, a: &ConfigAutomorphism) -> Result<()> {
        let ids = self.ids();
        let mut seen = BTreeSet::new();
        for c in &a.cycles {
            for x in c {
                if !seen.insert(*x) {
                    return Err(Error::NotAnAutomorphism(format!("{}: node {x} appears twice", a.name)));
                }
                if self.node(*x).is_none() {
                    return Err(Error::NotAnAutomorphism(format!("{}: unknown node {x}", a.name)));
                }
            }
        }
        for &x in &ids {
            let mut y = x;
            for _ in 0..a.order {
                y = a.image(y);
            }
            if y != x {
                return Err(Error::NotAnAutomorphism(format!("{}: order {} does not kill node {x}", a.name, a.order)));
            }
            let (nx, ny) = (self.node(x).unwrap(), self.node(a.image(x)).unwrap());
            if nx.genus != ny.genus || nx.kind != ny.kind {
                return Err(Error::NotAnAutomorphism(format!("{}: node {x} changes genus or kind", a.name)));
            }
            for &z in &ids {
                if self.edge(x, z) != self.edge(a.image(x), a.image(z)) {
                    return Err(Error::NotAnAutomorphism(format!("{}: edge {x}-{z} not preserved", a.name)));
                }
            }
        }
        Ok(())
    }
}

pub fn divisor_product(cfg: &CurveConfiguration, a: &OrbitDivisor, b: &OrbitDivisor) -> i64 {
    a.nodes.iter().map(|&x| b.nodes.iter().map(|&y| cfg.intersection(x, y)).sum::<i64>()).sum()
}

/// Intersection matrix of the given divisors; may be degenerate.
pub fn class_gram(cfg: &CurveConfiguration, classes: &[OrbitDivisor]) -> Matrix<BigInt> {
    let k = classes.len();
    let mut g = Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            g[(i, j)] = BigInt::from(divisor_product(cfg, &classes[i], &classes[j]));
        }
    }
    g
}

/// The lattice `Z^k / ker(G)` spanned by `k` classes with intersection matrix `G`.
#[derive(Clone, Debug)]
pub struct SpanLattice {
    pub class_gram: Matrix<BigInt>,
    pub lattice: GramLattice<BigInt>,
    /// Row `i`: coordinates of class `i` in the lattice basis.
    pub class_coords: Matrix<BigInt>,
    /// Row `j`: the basis vector `j` as an integer combination of the classes.
    pub basis_in_classes: Matrix<BigInt>,
}

impl SpanLattice {
    pub fn from_gram(g: Matrix<BigInt>) -> Result<Self> {
        let k = g.nrows();
        let ch = column_hnf(&g);
        let r = ch.rank;
        let u = ch.transform;
        let all: Vec<usize> = (0..k).collect();
        let first: Vec<usize> = (0..r).collect();
        let x = u.select(&all, &first);
        let lattice = GramLattice::new(x.transpose().mul(&g).mul(&x))?;
        let uinv = u.inverse_unimodular().expect("hermite transform is unimodular");
        let class_coords = uinv.select(&first, &all).transpose();
        Ok(SpanLattice { class_gram: g, lattice, class_coords, basis_in_classes: x.transpose() })
    }

    pub fn rank(&self) -> usize {
        self.lattice.rank()
    }

    pub fn num_classes(&self) -> usize {
        self.class_gram.nrows()
    }

    /// Whether the classes with these (0-based) indices span the whole lattice.
    pub fn spans(&self, subset: &[usize]) -> bool {
        let r = self.rank();
        if subset.len() < r {
            return false;
        }
        if r == 0 {
            return true;
        }
        let all: Vec<usize> = (0..r).collect();
        let b = row_span_basis(&self.class_coords.select(subset, &all));
        b.nrows() == r && b.det().abs().is_one()
    }

    /// The sublattice spanned by integer combinations of classes, in lattice coordinates.
    pub fn sublattice(&self, combos: &Matrix<BigInt>) -> Result<AmbientSublattice<BigInt>> {
        AmbientSublattice::spanned_by(self.lattice.clone(), &combos.mul(&self.class_coords))
    }
}

pub fn gram_from_configuration(cfg: &CurveConfiguration, classes: &[OrbitDivisor]) -> Result<SpanLattice> {
    SpanLattice::from_gram(class_gram(cfg, classes))
}

/// Orbits of the permutation on all nodes, ordered by smallest member.
pub fn orbit_sums(cfg: &CurveConfiguration, a: &ConfigAutomorphism) -> Vec<OrbitDivisor> {
    orbit_sums_where(cfg, a, |_| true)
}

pub fn orbit_sums_where(
    cfg: &CurveConfiguration,
    a: &ConfigAutomorphism,
    keep: impl Fn(&CurveNode) -> bool,
) -> Vec<OrbitDivisor> {
    let mut ids: Vec<u32> = cfg.nodes.iter().filter(|n| keep(n)).map(|n| n.id).collect();
    ids.sort_unstable();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for id in ids {
        if seen.contains(&id) {
            continue;
        }
        let mut orbit = vec![id];
        seen.insert(id);
        let mut x = a.image(id);
        while x != id {
            seen.insert(x);
            orbit.push(x);
            x = a.image(x);
        }
        out.push(OrbitDivisor::new(orbit));
    }
    out
}

/// One plus the number of orbits of exceptional curves.
pub fn rank_via_orbits(cfg: &CurveConfiguration, a: &ConfigAutomorphism) -> usize {
    1 + orbit_sums_where(cfg, a, |n| n.kind == CurveKind::Exceptional).len()
}

/// Lattice spanned by the orbit sums of coordinate and exceptional curves.
#[derive(Clone, Debug)]
pub struct InvariantLattice {
    pub classes: Vec<OrbitDivisor>,
    pub span: SpanLattice,
}

pub fn invariant_lattice(cfg: &CurveConfiguration, a: &ConfigAutomorphism) -> Result<InvariantLattice> {
    let classes = orbit_sums_where(cfg, a, |n| n.kind != CurveKind::Line);
    let span = gram_from_configuration(cfg, &classes)?;
    let expected = rank_via_orbits(cfg, a);
    if span.rank() < expected {
        return Err(Error::RankDeficiency { expected, found: span.rank() });
    }
    Ok(InvariantLattice { classes, span })
}

/// Greedy removal in ascending index order; returns 0-based indices of a
/// generating subset in which no single class can be dropped.
pub fn minimal_generators(cfg: &CurveConfiguration, divisors: &[OrbitDivisor]) -> Result<Vec<usize>> {
    let span = gram_from_configuration(cfg, divisors)?;
    Ok(minimal_generators_of(&span))
}

pub fn minimal_generators_of(span: &SpanLattice) -> Vec<usize> {
    let mut keep: Vec<usize> = (0..span.num_classes()).collect();
    let mut i = 0;
    while i < keep.len() {
        let trial: Vec<usize> = keep.iter().copied().filter(|&x| x != keep[i]).collect();
        if span.spans(&trial) {
            keep = trial;
        } else {
            i += 1;
        }
    }
    keep
}

/// Whether `inner` is primitive in `outer`; both live in the same ambient lattice.
/// Fails with `NotContained` unless `inner ⊆ outer`.
pub fn chain_primitivity(inner: &AmbientSublattice<BigInt>, outer: &AmbientSublattice<BigInt>) -> Result<bool> {
    if inner.ambient != outer.ambient {
        return Err(Error::NotContained);
    }
    let mut coords = Vec::new();
    for i in 0..inner.rank() {
        coords.push(outer.coordinates_of(&inner.basis.row(i)).ok_or(Error::NotContained)?);
    }
    if coords.is_empty() {
        return Ok(true);
    }
    let rel = AmbientSublattice::new(outer.lattice()?, Matrix::from_rows(coords))?;
    Ok(rel.is_primitive())
}

/// Matrix of the permutation action on the span lattice, acting on row coordinates.
/// Requires the class list to be permuted by `a`.
pub fn action_matrix(span: &SpanLattice, classes: &[OrbitDivisor], a: &ConfigAutomorphism) -> Result<Matrix<BigInt>> {
    let r = span.rank();
    let index: BTreeMap<&OrbitDivisor, usize> = classes.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut rows = Vec::new();
    for j in 0..r {
        // basis vector j = sum_i c_i class_i; its image is sum_i c_i a(class_i)
        let combo = span.basis_in_classes.row(j);
        let mut img = vec![BigInt::zero(); classes.len()];
        for (i, c) in combo.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let moved = OrbitDivisor::new(classes[i].nodes.iter().map(|&x| a.image(x)).collect());
            let t = index
                .get(&moved)
                .ok_or_else(|| Error::NotAnAutomorphism(format!("{} does not permute the classes", a.name)))?;
            img[*t] += c;
        }
        let cm = Matrix::from_rows(vec![img]).mul(&span.class_coords);
        rows.push(cm.row(0));
    }
    Ok(Matrix::from_rows(rows))
}

/// Fixed sublattice `{x : x P = x}` of the action matrix `P`; always primitive.
pub fn fixed_sublattice(lattice: &GramLattice<BigInt>, p: &Matrix<BigInt>) -> Result<AmbientSublattice<BigInt>> {
    let n = p.nrows();
    let mut d = p.clone();
    for i in 0..n {
        d[(i, i)] = d[(i, i)].clone() - BigInt::one();
    }
    // x (P - I) = 0  <=>  (P - I)^T x^T = 0
    let k = integer_kernel(&d.transpose());
    AmbientSublattice::new(lattice.clone(), k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: u32, genus: u32, kind: CurveKind) -> CurveNode {
        CurveNode { id, label: format!("n{id}"), genus, kind }
    }

    fn flip() -> ConfigAutomorphism {
        ConfigAutomorphism { name: "sigma".into(), order: 2, cycles: vec![vec![2, 4]] }
    }

    // genus-2 curve 1 meeting both ends of the chain 2-3-4
    fn sample() -> CurveConfiguration {
        let nodes = vec![
            node(1, 2, CurveKind::Coordinate),
            node(2, 0, CurveKind::Exceptional),
            node(3, 0, CurveKind::Exceptional),
            node(4, 0, CurveKind::Exceptional),
        ];
        CurveConfiguration::new("sample", nodes, &[(1, 2, 1), (1, 4, 1), (2, 3, 1), (3, 4, 1)], vec![flip()]).unwrap()
    }

    #[test]
    fn orbits_and_rank() {
        let cfg = sample();
        let a = cfg.automorphism("sigma").unwrap();
        let orbits = orbit_sums(&cfg, a);
        assert_eq!(orbits, vec![OrbitDivisor::new(vec![1]), OrbitDivisor::new(vec![2, 4]), OrbitDivisor::new(vec![3])]);
        assert_eq!(rank_via_orbits(&cfg, a), 3);
        let inv = invariant_lattice(&cfg, a).unwrap();
        assert_eq!(inv.span.rank(), 3);
        assert_eq!(inv.span.lattice.det().abs(), BigInt::from(16));
        assert_eq!(divisor_product(&cfg, &orbits[1], &orbits[1]), -4);
        assert_eq!(divisor_product(&cfg, &orbits[0], &orbits[1]), 2);
    }

    #[test]
    fn identity_gives_one_class_per_node() {
        let cfg = sample();
        let id = ConfigAutomorphism::identity("id");
        assert_eq!(rank_via_orbits(&cfg, &id), 4);
        assert_eq!(orbit_sums(&cfg, &id).len(), 4);
    }

    #[test]
    fn bad_configurations() {
        let nodes = || vec![node(1, 0, CurveKind::Exceptional), node(2, 0, CurveKind::Exceptional), node(3, 2, CurveKind::Coordinate)];
        assert!(CurveConfiguration::new("x", nodes(), &[(1, 1, 1)], vec![]).is_err());
        assert!(CurveConfiguration::new("x", nodes(), &[(1, 2, 1), (2, 1, 1)], vec![]).is_err());
        assert!(CurveConfiguration::new("x", nodes(), &[(1, 9, 1)], vec![]).is_err());
        // edge 1-3 is not mapped to an edge
        let swap = ConfigAutomorphism { name: "s".into(), order: 2, cycles: vec![vec![1, 2]] };
        assert!(CurveConfiguration::new("x", nodes(), &[(1, 3, 1)], vec![swap.clone()]).is_err());
        assert!(CurveConfiguration::new("x", nodes(), &[(1, 3, 1), (2, 3, 1)], vec![swap]).is_ok());
        // genus changes
        let bad = ConfigAutomorphism { name: "s".into(), order: 2, cycles: vec![vec![1, 3]] };
        assert!(CurveConfiguration::new("x", nodes(), &[], vec![bad]).is_err());
        // order does not kill the cycle
        let bad = ConfigAutomorphism { name: "s".into(), order: 3, cycles: vec![vec![1, 2]] };
        assert!(CurveConfiguration::new("x", nodes(), &[], vec![bad]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"name": "t", "nodes": [
            {"id": 1, "label": "A", "genus": 0, "kind": "exceptional"},
            {"id": 2, "label": "B", "genus": 0, "kind": "exceptional"}],
            "edges": [[1, 2, 2]],
            "automorphisms": [{"name": "sigma", "order": 2, "cycles": [[1, 2]]}]}"#;
        let cfg = CurveConfiguration::from_json(text).unwrap();
        assert_eq!(cfg.intersection(1, 2), 2);
        assert_eq!(cfg.intersection(1, 1), -2);
        assert!(CurveConfiguration::from_json(r#"{"name": "t", "nodes": [], "edges": [[1]]}"#).is_err());
    }

    #[test]
    fn powers() {
        let a = ConfigAutomorphism { name: "t".into(), order: 4, cycles: vec![vec![1, 2, 3, 4]] };
        let sq = a.power(2, &[1, 2, 3, 4]);
        assert_eq!(sq.order, 2);
        assert_eq!(sq.image(1), 3);
        assert_eq!(sq.image(2), 4);
    }

    #[test]
    fn minimal_generators_drop_dependent_classes() {
        let cfg = sample();
        let mut classes = orbit_sums(&cfg, &ConfigAutomorphism::identity("id"));
        assert_eq!(minimal_generators(&cfg, &classes).unwrap(), vec![0, 1, 2, 3]);
        classes.push(OrbitDivisor::new(vec![2, 4]));
        let span = gram_from_configuration(&cfg, &classes).unwrap();
        let keep = minimal_generators_of(&span);
        assert_eq!(keep.len(), span.rank());
        assert!(span.spans(&keep));
    }

    #[test]
    fn primitivity_chains() {
        let cfg = sample();
        let all = orbit_sums(&cfg, &ConfigAutomorphism::identity("id"));
        let span = gram_from_configuration(&cfg, &all).unwrap();
        let whole = span.sublattice(&Matrix::identity(4)).unwrap();
        assert!(chain_primitivity(&whole, &whole).unwrap());
        let twice = span.sublattice(&Matrix::<BigInt>::from_i64_rows(&[vec![2, 0, 0, 0]])).unwrap();
        let once = span.sublattice(&Matrix::<BigInt>::from_i64_rows(&[vec![1, 0, 0, 0]])).unwrap();
        assert!(!chain_primitivity(&twice, &whole).unwrap());
        assert!(chain_primitivity(&once, &whole).unwrap());
        assert!(chain_primitivity(&whole, &once).is_err());
    }

    #[test]
    fn fixed_part_of_the_flip() {
        let cfg = sample();
        let classes = orbit_sums(&cfg, &ConfigAutomorphism::identity("id"));
        let span = gram_from_configuration(&cfg, &classes).unwrap();
        let p = action_matrix(&span, &classes, &flip()).unwrap();
        assert_eq!(p.mul(&p), Matrix::identity(4));
        let fixed = fixed_sublattice(&span.lattice, &p).unwrap();
        assert_eq!(fixed.rank(), 3);
        assert!(fixed.is_primitive());
    }
}
