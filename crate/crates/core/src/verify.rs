//! Data-driven verification harness: table lines, mirror pairs, equivalence
//! classes, overlattice checks and the exceptional curve configurations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::curveconfig::{
    action_matrix, chain_primitivity, fixed_sublattice, gram_from_configuration, invariant_lattice, rank_via_orbits,
    CurveConfiguration, OrbitDivisor, SpanLattice,
};
use crate::error::{Error, Result};
use crate::invertible_poly::{
    is_calabi_yau, parse_polynomial, transpose, weight_system, ExponentMatrix, InvertiblePolynomial, WeightSystem,
};
use crate::lattice::{discriminant_form, discriminant_group, named_lattice, overlattices, signature, AmbientSublattice, Signature};
use crate::matrix::Matrix;
use crate::quadform::{gauss_signature, is_isomorphic, negate, parse_form_expression, FiniteQuadraticForm};
use crate::symmetry_groups::{
    dual_group, enumerate_intermediate, groups_equal, j_group, max_group, permute_coordinates, quotient_invariants,
    sl_subgroup, subgroup_generated, DiagonalSymmetry, SymmetryGroup,
};
use crate::Lattice;

pub const DATA_ENV: &str = "K3MIRROR_DATA";
pub const ORDERS: [u32; 3] = [4, 8, 12];

// ---------------------------------------------------------------------------
// reports

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Warn,
    Fail,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Warn => "WARN",
            Status::Fail => "FAIL",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub citation: Option<String>,
}

impl Check {
    pub fn pass(name: &str, detail: impl Into<String>) -> Self {
        Check { name: name.into(), status: Status::Pass, detail: detail.into(), citation: None }
    }

    pub fn fail(name: &str, detail: impl Into<String>) -> Self {
        Check { name: name.into(), status: Status::Fail, detail: detail.into(), citation: None }
    }

    pub fn warn(name: &str, detail: impl Into<String>, citation: impl Into<String>) -> Self {
        Check { name: name.into(), status: Status::Warn, detail: detail.into(), citation: Some(citation.into()) }
    }

    pub fn from_bool(name: &str, ok: bool, detail: impl Into<String>) -> Self {
        if ok {
            Check::pass(name, detail)
        } else {
            Check::fail(name, detail)
        }
    }

    fn with_citation(mut self, c: Option<&String>) -> Self {
        if self.citation.is_none() {
            self.citation = c.cloned();
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineReport {
    pub category: String,
    pub subject: String,
    pub checks: Vec<Check>,
}

impl LineReport {
    pub fn new(category: &str, subject: impl Into<String>) -> Self {
        LineReport { category: category.into(), subject: subject.into(), checks: Vec::new() }
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn status(&self) -> Status {
        self.checks.iter().map(|c| c.status).max().unwrap_or(Status::Pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub pass: usize,
    pub warn: usize,
    pub fail: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableReport {
    pub reports: Vec<LineReport>,
}

impl TableReport {
    pub fn extend(&mut self, other: TableReport) {
        self.reports.extend(other.reports);
    }

    pub fn counts(&self) -> Counts {
        let mut c = Counts::default();
        for r in &self.reports {
            match r.status() {
                Status::Pass => c.pass += 1,
                Status::Warn => c.warn += 1,
                Status::Fail => c.fail += 1,
            }
        }
        c
    }

    pub fn has_failures(&self) -> bool {
        self.reports.iter().any(|r| r.status() == Status::Fail)
    }

    /// Every WARN check with its report subject.
    pub fn warnings(&self) -> Vec<(&LineReport, &Check)> {
        self.reports
            .iter()
            .flat_map(|r| r.checks.iter().filter(|c| c.status == Status::Warn).map(move |c| (r, c)))
            .collect()
    }

    pub fn failures(&self) -> Vec<(&LineReport, &Check)> {
        self.reports
            .iter()
            .flat_map(|r| r.checks.iter().filter(|c| c.status == Status::Fail).map(move |c| (r, c)))
            .collect()
    }

    pub fn in_category(&self, category: &str) -> impl Iterator<Item = &LineReport> {
        let category = category.to_string();
        self.reports.iter().filter(move |r| r.category == category)
    }

    pub fn to_text(&self, verbose: bool) -> String {
        let mut s = String::new();
        for r in &self.reports {
            s.push_str(&format!("{} [{}] {}\n", r.status(), r.category, r.subject));
            for c in &r.checks {
                if verbose || c.status != Status::Pass || c.detail.starts_with("note:") {
                    s.push_str(&format!("    {} {}: {}\n", c.status, c.name, c.detail));
                    if let Some(cit) = &c.citation {
                        s.push_str(&format!("        see: {}\n", cit));
                    }
                }
            }
        }
        let c = self.counts();
        s.push_str(&format!("summary: {} pass, {} warn, {} fail\n", c.pass, c.warn, c.fail));
        s
    }
}

// ---------------------------------------------------------------------------
// table data

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DualRef {
    SelfDual,
    Line(u32),
}

impl Serialize for DualRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DualRef::SelfDual => s.serialize_str("self"),
            DualRef::Line(n) => s.serialize_u32(*n),
        }
    }
}

impl<'de> Deserialize<'de> for DualRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u32),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => Ok(DualRef::Line(n)),
            Raw::S(s) if s == "self" => Ok(DualRef::SelfDual),
            Raw::S(s) => Err(serde::de::Error::custom(format!("dual must be a line number or \"self\", got {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableLine {
    pub no: u32,
    pub rank: u32,
    pub dual: DualRef,
    /// Weights followed by the degree.
    pub weights: Vec<i64>,
    pub polynomial: String,
    /// Invariant factors of `G/J`; empty for the trivial quotient.
    pub group: Vec<u64>,
    pub form: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generators: Vec<String>,
    /// Reordering applied to the transposed polynomial's variables to match the dual line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_permutation: Option<Vec<usize>>,
    #[serde(default)]
    pub star: bool,
    #[serde(default)]
    pub exceptional: bool,
    #[serde(default)]
    pub nol: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub belcastro: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub erratum: Option<String>,
    /// Set when generators came from the sidecar file.
    #[serde(skip)]
    pub sidecar: Option<SidecarEntry>,
}

impl TableLine {
    pub fn dual_no(&self) -> u32 {
        match self.dual {
            DualRef::SelfDual => self.no,
            DualRef::Line(n) => n,
        }
    }

    pub fn declared_weights(&self) -> Option<WeightSystem> {
        let (d, w) = self.weights.split_last()?;
        Some(WeightSystem::new(w.to_vec(), *d))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    order: u32,
    lines: Vec<TableLine>,
}

#[derive(Clone, Debug)]
pub struct Table {
    pub order: u32,
    pub lines: BTreeMap<u32, TableLine>,
}

impl Table {
    pub fn line(&self, no: u32) -> Option<&TableLine> {
        self.lines.get(&no)
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|source| Error::Json { path: path.display().to_string(), source })
}

pub fn parse_table(text: &str, origin: &Path) -> Result<Table> {
    let file: TableFile = parse_json(origin, text)?;
    let mut lines = BTreeMap::new();
    for l in file.lines {
        if l.weights.len() < 2 {
            return Err(Error::Data(format!("line {}: weights need at least one weight and a degree", l.no)));
        }
        let no = l.no;
        if lines.insert(no, l).is_some() {
            return Err(Error::Data(format!("duplicate line number {no}")));
        }
    }
    for l in lines.values() {
        if !lines.contains_key(&l.dual_no()) {
            return Err(Error::Data(format!("line {} has dangling dual reference {}", l.no, l.dual_no())));
        }
    }
    Ok(Table { order: file.order, lines })
}

pub fn load_table(path: &Path) -> Result<Table> {
    parse_table(&read(path)?, path)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidecarEntry {
    pub lines: BTreeMap<String, u32>,
    pub group: Vec<u64>,
    pub generators: Vec<String>,
    #[serde(skip)]
    pub polynomial: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SidecarPolynomial {
    polynomial: String,
    weights: Vec<i64>,
    #[serde(default)]
    erratum: Option<String>,
    entries: Vec<SidecarEntry>,
}

/// Pair of lines whose curated data disagree; reported, never resolved.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnownConflict {
    pub order: u32,
    pub lines: [u32; 2],
    pub permutation: Vec<usize>,
    pub citation: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SidecarFile {
    polynomials: Vec<SidecarPolynomial>,
    #[serde(default)]
    conflicts: Vec<KnownConflict>,
}

#[derive(Clone, Debug, Default)]
pub struct Sidecar {
    /// Keyed by (order, line).
    pub entries: BTreeMap<(u32, u32), SidecarEntry>,
    pub headers: Vec<(String, WeightSystem, Option<String>)>,
    pub conflicts: Vec<KnownConflict>,
}

pub fn load_sidecar(path: &Path) -> Result<Sidecar> {
    let file: SidecarFile = parse_json(path, &read(path)?)?;
    let mut out = Sidecar { conflicts: file.conflicts, ..Default::default() };
    for p in file.polynomials {
        let (d, w) = p
            .weights
            .split_last()
            .ok_or_else(|| Error::Data(format!("sidecar header for {} has no weights", p.polynomial)))?;
        out.headers.push((p.polynomial.clone(), WeightSystem::new(w.to_vec(), *d), p.erratum.clone()));
        for mut e in p.entries {
            e.polynomial = p.polynomial.clone();
            for (order, line) in &e.lines {
                let order: u32 = order.parse().map_err(|_| Error::Data(format!("sidecar order key {order:?}")))?;
                if out.entries.insert((order, *line), e.clone()).is_some() {
                    return Err(Error::Data(format!("sidecar lists n={order} line {line} twice")));
                }
            }
        }
    }
    Ok(out)
}

/// Attaches sidecar generators to the table; fails if a sidecar line is missing.
pub fn merge_sidecar(table: &mut Table, sidecar: &Sidecar) -> Result<()> {
    for ((order, no), e) in &sidecar.entries {
        if *order != table.order {
            continue;
        }
        let line = table
            .lines
            .get_mut(no)
            .ok_or_else(|| Error::Data(format!("sidecar refers to missing line {no} of order {order}")))?;
        if !line.generators.is_empty() {
            return Err(Error::Data(format!("line {no} has generators both inline and in the sidecar")));
        }
        line.generators = e.generators.clone();
        line.sidecar = Some(e.clone());
    }
    Ok(())
}

pub fn default_data_dir() -> PathBuf {
    std::env::var_os(DATA_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("data"))
}

/// The three tables with sidecar generators merged in.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub dir: PathBuf,
    pub tables: BTreeMap<u32, Table>,
    pub sidecar: Sidecar,
}

impl Dataset {
    pub fn load(dir: &Path) -> Result<Self> {
        let sidecar = load_sidecar(&dir.join("sidecar_groups.json"))?;
        let mut tables = BTreeMap::new();
        for n in ORDERS {
            let mut t = load_table(&dir.join(format!("order{n}.json")))?;
            if t.order != n {
                return Err(Error::Data(format!("order{n}.json declares order {}", t.order)));
            }
            merge_sidecar(&mut t, &sidecar)?;
            tables.insert(n, t);
        }
        Ok(Dataset { dir: dir.to_path_buf(), tables, sidecar })
    }

    pub fn table(&self, n: u32) -> Result<&Table> {
        self.tables.get(&n).ok_or_else(|| Error::Data(format!("no table of order {n}")))
    }
}

// ---------------------------------------------------------------------------
// per-line analysis

/// Everything derived from a line's polynomial and group.
#[derive(Clone, Debug)]
pub struct LineAnalysis {
    pub poly: InvertiblePolynomial,
    pub matrix: ExponentMatrix,
    pub weights: WeightSystem,
    pub gmax: SymmetryGroup,
    pub j: SymmetryGroup,
    pub sl: SymmetryGroup,
    pub group: std::result::Result<SymmetryGroup, String>,
    pub resolution: String,
}

impl LineAnalysis {
    pub fn new(line: &TableLine) -> Result<Self> {
        let poly = parse_polynomial(&line.polynomial)?;
        let matrix = poly.exponent_matrix();
        let weights = weight_system(&matrix)?;
        let gmax = max_group(&matrix);
        let j = subgroup_generated(&gmax, &j_group(&weights).generators().to_vec())?;
        let sl = sl_subgroup(&gmax);
        let (group, resolution) = resolve_group(line, &gmax, &j, &sl);
        Ok(LineAnalysis { poly, matrix, weights, gmax, j, sl, group, resolution })
    }

    pub fn transposed(&self) -> Result<TransposeAnalysis> {
        let poly = transpose(&self.poly);
        let matrix = poly.exponent_matrix();
        let weights = weight_system(&matrix)?;
        let gmax = max_group(&matrix);
        let j = subgroup_generated(&gmax, &j_group(&weights).generators().to_vec())?;
        let group = match &self.group {
            Ok(g) => dual_group(g, &self.matrix).map_err(|e| e.to_string()),
            Err(e) => Err(e.clone()),
        };
        Ok(TransposeAnalysis { poly, weights, j, group })
    }
}

#[derive(Clone, Debug)]
pub struct TransposeAnalysis {
    pub poly: InvertiblePolynomial,
    pub weights: WeightSystem,
    pub j: SymmetryGroup,
    pub group: std::result::Result<SymmetryGroup, String>,
}

fn resolve_group(
    line: &TableLine,
    gmax: &SymmetryGroup,
    j: &SymmetryGroup,
    sl: &SymmetryGroup,
) -> (std::result::Result<SymmetryGroup, String>, String) {
    if !line.generators.is_empty() || line.sidecar.is_some() {
        let mut gens = j.generators().to_vec();
        for g in &line.generators {
            match g.parse::<DiagonalSymmetry>() {
                Ok(x) => gens.push(x),
                Err(e) => return (Err(format!("generator {g:?}: {e}")), String::new()),
            }
        }
        let how = format!("generated by J and [{}]", line.generators.join("; "));
        return (subgroup_generated(gmax, &gens).map_err(|e| e.to_string()), how);
    }
    let candidates = match enumerate_intermediate(j, sl) {
        Ok(c) => c,
        Err(e) => return (Err(e.to_string()), String::new()),
    };
    let matching: Vec<SymmetryGroup> = candidates
        .into_iter()
        .filter(|g| quotient_invariants(g, j).map(|f| f == line.group).unwrap_or(false))
        .collect();
    match matching.len() {
        1 => (Ok(matching.into_iter().next().unwrap()), "unique subgroup of SL/J with this type".into()),
        0 => (Err(format!("no subgroup J <= G <= SL with G/J of type {:?}", line.group)), String::new()),
        k => (Err(format!("{k} subgroups J <= G <= SL have type {:?}; generators needed", line.group)), String::new()),
    }
}

fn group_name(f: &[u64]) -> String {
    if f.is_empty() {
        "trivial".into()
    } else {
        f.iter().map(|x| format!("Z/{x}")).collect::<Vec<_>>().join(" x ")
    }
}

/// Some `x_i^n` is a monomial and `x_i` appears in no other monomial.
pub fn has_x0_shape(a: &ExponentMatrix, n: u32) -> bool {
    let m = a.size();
    (0..m).any(|i| {
        let col: Vec<(usize, u32)> = (0..m).map(|r| (r, a.get(r, i))).filter(|(_, e)| *e != 0).collect();
        col.len() == 1 && col[0].1 == n && (0..m).all(|c| c == i || a.get(col[0].0, c) == 0)
    })
}

pub fn verify_line(order: u32, line: &TableLine) -> LineReport {
    let mut rep = LineReport::new("line", format!("n={order} line {}", line.no));
    let form_check = match parse_form_expression(&line.form) {
        Ok(q) => Check::pass("form", format!("{} parses; |A| = {}", line.form, q.order())),
        Err(e) => Check::fail("form", format!("{}: {e}", line.form)),
    };
    let an = match LineAnalysis::new(line) {
        Ok(a) => a,
        Err(e) => {
            rep.push(Check::fail("polynomial", format!("{}: {e}", line.polynomial)));
            rep.push(form_check);
            return rep;
        }
    };
    let declared = line.declared_weights().expect("checked at load");
    let mut detail = format!("computed {}", an.weights);
    if let Some(e) = &line.erratum {
        detail.push_str(&format!("; note: erratum applied ({e})"));
    }
    rep.push(Check::from_bool("weights", an.weights == declared, detail));
    rep.push(Check::from_bool("calabi-yau", is_calabi_yau(&an.weights), format!("sum of weights vs degree {}", an.weights.degree)));
    match &an.group {
        Ok(g) => {
            let inv = quotient_invariants(g, &an.j);
            let ok = inv.as_ref().map(|f| *f == line.group).unwrap_or(false);
            let got = inv.map(|f| group_name(&f)).unwrap_or_else(|e| e.to_string());
            rep.push(Check::from_bool(
                "group",
                ok,
                format!("G/J = {got}, declared {}; {}", group_name(&line.group), an.resolution),
            ));
            if let Some(sc) = &line.sidecar {
                let same = parse_polynomial(&sc.polynomial).map(|p| p.same_monomials(&an.poly)).unwrap_or(false);
                rep.push(Check::from_bool(
                    "sidecar",
                    same && sc.group == line.group,
                    format!("sidecar {} with group {}", sc.polynomial, group_name(&sc.group)),
                ));
            }
            let sandwich = an.j.is_subgroup_of(g) && g.is_subgroup_of(&an.sl);
            rep.push(Check::from_bool("sandwich", sandwich, format!("|J| = {}, |G| = {}, |SL| = {}", an.j.order(), g.order(), an.sl.order())));
        }
        Err(e) => rep.push(Check::fail("group", e.clone())),
    }
    rep.push(form_check);
    rep.push(Check::from_bool(
        "shape",
        has_x0_shape(&an.matrix, order),
        format!("a variable occurs only in a pure power of degree {order}"),
    ));
    rep
}

// ---------------------------------------------------------------------------
// mirror pairs

fn identity_perm(m: usize) -> Vec<usize> {
    (0..m).collect()
}

fn conflict_for<'a>(conflicts: &'a [KnownConflict], order: u32, a: u32, b: u32) -> Option<&'a KnownConflict> {
    conflicts.iter().find(|c| c.order == order && (c.lines.contains(&a) || c.lines.contains(&b)))
}

pub fn verify_mirror_pair(order: u32, li: &TableLine, lj: &TableLine, conflicts: &[KnownConflict]) -> LineReport {
    let mut rep = LineReport::new("mirror", format!("n={order} lines {} <-> {}", li.no, lj.no));
    let rank_ok = li.rank + lj.rank == 20;
    rep.push(Check::from_bool("ranks", rank_ok, format!("{} + {} = {}", li.rank, lj.rank, li.rank + lj.rank)));
    match (parse_form_expression(&li.form), parse_form_expression(&lj.form)) {
        (Ok(qi), Ok(qj)) => rep.push(Check::from_bool(
            "forms",
            is_isomorphic(&qi, &negate(&qj)),
            format!("{} vs -({})", li.form, lj.form),
        )),
        _ => rep.push(Check::fail("forms", "unparsable form")),
    }
    let (ai, aj) = match (LineAnalysis::new(li), LineAnalysis::new(lj)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => {
            rep.push(Check::fail("transpose", "polynomial analysis failed"));
            return rep;
        }
    };
    let t = match ai.transposed() {
        Ok(t) => t,
        Err(e) => {
            rep.push(Check::fail("transpose", e.to_string()));
            return rep;
        }
    };
    let m = ai.poly.num_variables();
    let curated = li.dual_permutation.is_some();
    let perm = li.dual_permutation.clone().unwrap_or_else(|| identity_perm(m));
    let wt = t.weights.permuted(&perm);
    let declared_j = lj.declared_weights().expect("checked at load");
    let mut detail = format!("W^T = {} has weights {}", t.poly, t.weights);
    if curated {
        detail.push_str(&format!("; note: curated reordering {perm:?} gives {wt}"));
    }
    rep.push(Check::from_bool("transpose", wt == declared_j, detail));

    match &t.group {
        Ok(gt) => {
            let inv = quotient_invariants(gt, &t.j);
            let ok = inv.as_ref().map(|f| *f == lj.group).unwrap_or(false);
            let got = inv.map(|f| group_name(&f)).unwrap_or_else(|e| e.to_string());
            rep.push(Check::from_bool(
                "dual-group",
                ok,
                format!("G^T/J_(W^T) = {got}, dual line declares {}", group_name(&lj.group)),
            ));
            // same polynomial after reordering: compare the groups themselves
            if t.poly.permute_variables(&perm).same_monomials(&aj.poly) {
                let moved = permute_coordinates(gt, &perm);
                let equal = match (&moved, &aj.group) {
                    (Ok(a), Ok(b)) => groups_equal(a, b),
                    _ => false,
                };
                let name = "dual-group-set";
                let detail = format!("W^T equals line {}'s polynomial; G^T compared with its group as sets", lj.no);
                let check = if equal {
                    Check::pass(name, detail)
                } else if let Some(c) = conflict_for(conflicts, order, li.no, lj.no) {
                    Check::warn(name, format!("{detail}: sets differ (known generator conflict)"), c.citation.clone())
                } else {
                    Check::fail(name, format!("{detail}: sets differ"))
                };
                rep.push(check);
            }
        }
        Err(e) => rep.push(Check::fail("dual-group", e.clone())),
    }
    rep
}

pub fn verify_involution(table: &Table) -> LineReport {
    let mut rep = LineReport::new("involution", format!("n={} dual relation", table.order));
    let mut bad = Vec::new();
    for l in table.lines.values() {
        let d = table.line(l.dual_no()).expect("checked at load");
        if d.dual_no() != l.no {
            bad.push(format!("{} -> {} -> {}", l.no, d.no, d.dual_no()));
        }
    }
    let selfs: Vec<String> = table.lines.values().filter(|l| l.dual == DualRef::SelfDual).map(|l| l.no.to_string()).collect();
    rep.push(Check::from_bool(
        "involution",
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} lines; self-dual: {}", table.len(), selfs.join(", "))
        } else {
            format!("not an involution: {}", bad.join("; "))
        },
    ));
    rep
}

/// `(J_W)^T = SL_{W^T}`, `(SL_W)^T = J_{W^T}`, `(G^T)^T = G` and the index
/// identity over all intermediate pairs of the polynomial.
pub fn verify_dual_laws(poly: &InvertiblePolynomial) -> LineReport {
    let mut rep = LineReport::new("dual-laws", poly.to_string());
    let run = || -> Result<Vec<Check>> {
        let a = poly.exponent_matrix();
        let w = weight_system(&a)?;
        let gmax = max_group(&a);
        let j = subgroup_generated(&gmax, &j_group(&w).generators().to_vec())?;
        let sl = sl_subgroup(&gmax);
        let pt = transpose(poly);
        let at = pt.exponent_matrix();
        let wt = weight_system(&at)?;
        let gmax_t = max_group(&at);
        let j_t = subgroup_generated(&gmax_t, &j_group(&wt).generators().to_vec())?;
        let sl_t = sl_subgroup(&gmax_t);
        let mut out = Vec::new();
        out.push(Check::from_bool("J^T = SL", groups_equal(&dual_group(&j, &a)?, &sl_t), format!("|SL_(W^T)| = {}", sl_t.order())));
        out.push(Check::from_bool("SL^T = J", groups_equal(&dual_group(&sl, &a)?, &j_t), format!("|J_(W^T)| = {}", j_t.order())));
        let all = enumerate_intermediate(&j, &sl)?;
        let duals: Vec<SymmetryGroup> = all.iter().map(|g| dual_group(g, &a)).collect::<Result<_>>()?;
        let mut involutive = true;
        for (g, gt) in all.iter().zip(&duals) {
            involutive &= groups_equal(&dual_group(gt, &at)?, g);
        }
        out.push(Check::from_bool("(G^T)^T = G", involutive, format!("{} intermediate groups", all.len())));
        let mut pairs = 0;
        let mut bad = 0;
        for (g1, g1t) in all.iter().zip(&duals) {
            for (g2, g2t) in all.iter().zip(&duals) {
                if g1.is_subgroup_of(g2) {
                    pairs += 1;
                    let ok = g2t.is_subgroup_of(g1t) && g2.order() * g2t.order() == g1.order() * g1t.order();
                    if !ok {
                        bad += 1;
                    }
                }
            }
        }
        out.push(Check::from_bool("index", bad == 0, format!("|G2/G1| = |G1^T/G2^T| on {pairs} pairs, {bad} failures")));
        Ok(out)
    };
    match run() {
        Ok(cs) => rep.checks = cs,
        Err(e) => rep.push(Check::fail("dual-laws", e.to_string())),
    }
    rep
}

// ---------------------------------------------------------------------------
// equivalence classes

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationKind {
    Isomorphism,
    Deformation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Relation {
    pub kind: RelationKind,
    pub lines: [u32; 2],
    /// Reordering applied to the second line's dual coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Vec<usize>>,
    #[serde(default)]
    pub inferred: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub citation: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceClass {
    pub rank: u32,
    pub lines: Vec<u32>,
    #[serde(default)]
    pub relations: Vec<Relation>,
    /// The class is argued as a whole from the absence of overlattices rather than pairwise.
    #[serde(default)]
    pub via_nol: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassFile {
    pub order: u32,
    pub classes: Vec<EquivalenceClass>,
}

pub fn load_class_file(path: &Path) -> Result<ClassFile> {
    parse_json(path, &read(path)?)
}

fn relation_check(rel: &Relation, la: &LineAnalysis, lb: &LineAnalysis) -> Check {
    let [a, b] = rel.lines;
    let m = la.poly.num_variables();
    let perm = rel.permutation.clone().unwrap_or_else(|| identity_perm(m));
    let (name, ok, mut detail) = match rel.kind {
        RelationKind::Deformation => {
            let same_w = la.weights == lb.weights.permuted(&perm);
            let same_g = match (&la.group, &lb.group) {
                (Ok(x), Ok(y)) => permute_coordinates(y, &perm).map(|y| groups_equal(x, &y)).unwrap_or(false),
                _ => false,
            };
            ("deformation", same_w && same_g, format!("{a}~{b}: weights {} / {}, groups equal: {same_g}", la.weights, lb.weights))
        }
        RelationKind::Isomorphism => {
            let (ta, tb) = match (la.transposed(), lb.transposed()) {
                (Ok(x), Ok(y)) => (x, y),
                _ => return Check::fail("isomorphism", format!("{a}~{b}: transpose failed")),
            };
            let equal = match (&ta.group, &tb.group) {
                (Ok(x), Ok(y)) => permute_coordinates(y, &perm).map(|y| groups_equal(x, &y)).unwrap_or(false),
                _ => false,
            };
            ("isomorphism", equal, format!("{a}~{b}: dual groups equal as sets: {equal}"))
        }
    };
    if rel.inferred {
        detail.push_str(&format!("; note: inferred relation ({})", rel.note.clone().unwrap_or_default()));
    }
    match (&rel.permutation, ok) {
        (_, false) => Check::fail(name, detail),
        (Some(p), true) => Check::warn(
            name,
            format!("{detail} after manual coordinate permutation {p:?}"),
            rel.citation.clone().unwrap_or_else(|| "class file permutation entry".into()),
        ),
        (None, true) => Check::pass(name, detail),
    }
}

pub fn verify_equivalence_classes(table: &Table, classes: &ClassFile) -> TableReport {
    let mut out = TableReport::default();
    let order = table.order;
    let mut cover = LineReport::new("classes", format!("n={order} partition"));
    let mut seen: BTreeMap<u32, usize> = BTreeMap::new();
    for c in &classes.classes {
        for &l in &c.lines {
            *seen.entry(l).or_default() += 1;
        }
    }
    let missing: Vec<u32> = table.lines.keys().copied().filter(|l| !seen.contains_key(l)).collect();
    let extra: Vec<u32> = seen.iter().filter(|(l, k)| **k > 1 || !table.lines.contains_key(l)).map(|(l, _)| *l).collect();
    cover.push(Check::from_bool(
        "partition",
        classes.order == order && missing.is_empty() && extra.is_empty(),
        format!("{} classes; missing {missing:?}; repeated or unknown {extra:?}", classes.classes.len()),
    ));
    out.reports.push(cover);

    let mut analyses: BTreeMap<u32, Option<LineAnalysis>> = BTreeMap::new();
    let mut analysis = |no: u32| -> Option<LineAnalysis> {
        analyses.entry(no).or_insert_with(|| table.line(no).and_then(|l| LineAnalysis::new(l).ok())).clone()
    };

    for c in &classes.classes {
        let mut rep = LineReport::new("classes", format!("n={order} rank {} lines {:?}", c.rank, c.lines));
        let lines: Vec<&TableLine> = c.lines.iter().filter_map(|l| table.line(*l)).collect();
        let ranks_ok = lines.len() == c.lines.len() && lines.iter().all(|l| l.rank == c.rank);
        rep.push(Check::from_bool("rank", ranks_ok, format!("all lines have rank {}", c.rank)));
        let forms: Vec<Option<FiniteQuadraticForm>> = lines.iter().map(|l| parse_form_expression(&l.form).ok()).collect();
        let forms_ok = forms.iter().all(|f| f.is_some())
            && forms.windows(2).all(|w| is_isomorphic(w[0].as_ref().unwrap(), w[1].as_ref().unwrap()));
        rep.push(Check::from_bool("form", forms_ok, "all lines carry isomorphic forms"));

        // union-find over the stated relations
        let mut parent: BTreeMap<u32, u32> = c.lines.iter().map(|&l| (l, l)).collect();
        fn find(p: &mut BTreeMap<u32, u32>, x: u32) -> u32 {
            let mut r = x;
            while p[&r] != r {
                r = p[&r];
            }
            p.insert(x, r);
            r
        }
        for rel in &c.relations {
            let [a, b] = rel.lines;
            if !parent.contains_key(&a) || !parent.contains_key(&b) {
                rep.push(Check::fail("relation", format!("{a}~{b} leaves the class")));
                continue;
            }
            let ra = find(&mut parent, a);
            let rb = find(&mut parent, b);
            parent.insert(ra, rb);
            match (analysis(a), analysis(b)) {
                (Some(la), Some(lb)) => rep.push(relation_check(rel, &la, &lb).with_citation(rel.citation.as_ref())),
                _ => rep.push(Check::fail("relation", format!("{a}~{b}: analysis failed"))),
            }
        }
        let roots: BTreeSet<u32> = c.lines.clone().into_iter().map(|l| find(&mut parent, l)).collect();
        if c.via_nol {
            let all_nol = lines.iter().all(|l| l.nol);
            rep.push(Check::from_bool("connected", all_nol, "note: no pairwise relations; every line is flagged NOL"));
        } else {
            rep.push(Check::from_bool("connected", roots.len() == 1, format!("{} component(s)", roots.len())));
        }
        out.reports.push(rep);
    }
    out
}

// ---------------------------------------------------------------------------
// overlattices

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NolEntry {
    pub order: u32,
    pub rank: u32,
    pub lattice: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NolFile {
    pub lattices: Vec<NolEntry>,
}

pub fn load_nol_file(path: &Path) -> Result<NolFile> {
    parse_json(path, &read(path)?)
}

/// `L` has the line's rank, hyperbolic signature, the line's form and no proper even overlattice.
pub fn verify_nol(order: u32, line: &TableLine, l: &Lattice, lattice_name: &str) -> LineReport {
    let mut rep = LineReport::new("nol", format!("n={order} line {} with {lattice_name}", line.no));
    let sig = signature(l);
    let expected = Signature::new(1, line.rank as usize - 1);
    rep.push(Check::from_bool("signature", sig == expected, format!("{sig}, expected {expected}")));
    match (discriminant_form(l), parse_form_expression(&line.form)) {
        (Ok(q), Ok(f)) => rep.push(Check::from_bool("form", is_isomorphic(&q, &f), format!("disc form {q} vs {}", line.form))),
        (Err(e), _) | (_, Err(e)) => rep.push(Check::fail("form", e.to_string())),
    }
    match overlattices(l) {
        Ok(v) => rep.push(Check::from_bool("no-overlattice", v.len() == 1, format!("{} proper even overlattice(s)", v.len() - 1))),
        Err(e) => rep.push(Check::fail("no-overlattice", e.to_string())),
    }
    rep
}

pub fn verify_nol_table(table: &Table, nol: &NolFile) -> TableReport {
    let mut out = TableReport::default();
    for line in table.lines.values().filter(|l| l.nol) {
        let entry = nol.lattices.iter().find(|e| e.order == table.order && e.rank == line.rank);
        match entry {
            None => {
                let mut r = LineReport::new("nol", format!("n={} line {}", table.order, line.no));
                r.push(Check::fail("lattice", "no curated lattice for this rank"));
                out.reports.push(r);
            }
            Some(e) => match named_lattice::<BigInt>(&e.lattice) {
                Ok(l) => out.reports.push(verify_nol(table.order, line, &l, &e.lattice)),
                Err(err) => {
                    let mut r = LineReport::new("nol", format!("n={} line {}", table.order, line.no));
                    r.push(Check::fail("lattice", err.to_string()));
                    out.reports.push(r);
                }
            },
        }
    }
    out
}

// ---------------------------------------------------------------------------
// exceptional configurations

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OuterBlock {
    pub label: String,
    pub classes: Vec<Vec<u32>>,
    pub rank: usize,
    #[serde(default)]
    pub generators: Option<Vec<usize>>,
    #[serde(default)]
    pub two_elementary: bool,
    #[serde(default)]
    pub discriminant_length: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LbBlock {
    #[serde(default)]
    pub classes: Option<Vec<Vec<u32>>>,
    pub rank: usize,
    #[serde(default)]
    pub generators: Option<Vec<usize>>,
    pub form: String,
    #[serde(default)]
    pub lattice: Option<String>,
    #[serde(default)]
    pub stated_form: Option<String>,
    #[serde(default)]
    pub stated_form_citation: Option<String>,
}

/// Curated expectations stored next to the configuration itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseFile {
    pub name: String,
    pub order: u32,
    pub line: u32,
    #[serde(default)]
    pub citation: Option<String>,
    pub sigma: String,
    #[serde(default)]
    pub tau_power: Option<u32>,
    #[serde(default)]
    pub outer: Option<OuterBlock>,
    pub l_b: LbBlock,
}

/// Computed lattices of one exceptional case, kept for callers that want more than the report.
#[derive(Clone, Debug)]
pub struct ExceptionalResult {
    pub l_b: AmbientSublattice<BigInt>,
    pub l_b_span: SpanLattice,
    pub outer: Option<AmbientSublattice<BigInt>>,
    pub outer_span: Option<SpanLattice>,
}

fn divisors(classes: &[Vec<u32>]) -> Vec<OrbitDivisor> {
    classes.iter().map(|c| OrbitDivisor::new(c.clone())).collect()
}

/// 0/1 combinations of nodes for each class, in node order.
fn node_combos(ids: &[u32], classes: &[OrbitDivisor]) -> Matrix<BigInt> {
    let rows = classes
        .iter()
        .map(|c| ids.iter().map(|id| if c.nodes.contains(id) { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    Matrix::from_rows(rows)
}

fn check_generators(name: &str, span: &SpanLattice, gens: &[usize], rank: usize) -> Check {
    let idx: Vec<usize> = gens.iter().map(|g| g.wrapping_sub(1)).collect();
    let in_range = idx.iter().all(|&i| i < span.num_classes());
    let ok = in_range && gens.len() == rank && span.spans(&idx);
    Check::from_bool(name, ok, format!("classes {gens:?} form a basis of the rank-{} lattice", span.rank()))
}

pub fn load_case(path: &Path) -> Result<(CurveConfiguration, CaseFile)> {
    let text = read(path)?;
    let cfg = CurveConfiguration::from_json(&text)?;
    let case: CaseFile = parse_json(path, &text)?;
    Ok((cfg, case))
}

pub fn verify_exceptional(cfg: &CurveConfiguration, case: &CaseFile) -> (LineReport, Option<ExceptionalResult>) {
    let mut rep = LineReport::new("exceptional", format!("{} (n={} line {})", case.name, case.order, case.line));
    let result = exceptional_inner(cfg, case, &mut rep);
    match result {
        Ok(r) => (rep, Some(r)),
        Err(e) => {
            rep.push(Check::fail("configuration", e.to_string()));
            (rep, None)
        }
    }
}

fn exceptional_inner(cfg: &CurveConfiguration, case: &CaseFile, rep: &mut LineReport) -> Result<ExceptionalResult> {
    let sigma = cfg
        .automorphism(&case.sigma)
        .ok_or_else(|| Error::InvalidConfiguration(format!("no automorphism named {}", case.sigma)))?
        .clone();
    cfg.check_automorphism(&sigma)?;
    rep.push(Check::pass("automorphism", format!("{} of order {} preserves the intersection matrix", sigma.name, sigma.order)));

    let ids = cfg.ids();
    let nodes: Vec<OrbitDivisor> = ids.iter().map(|&i| OrbitDivisor::new(vec![i])).collect();
    let ambient = gram_from_configuration(cfg, &nodes)?;

    let orbit_rank = rank_via_orbits(cfg, &sigma);
    rep.push(Check::from_bool("orbit-rank", orbit_rank == case.l_b.rank, format!("1 + #exceptional orbits = {orbit_rank}")));

    // L_B
    let inv = invariant_lattice(cfg, &sigma)?;
    let lb_classes = match &case.l_b.classes {
        Some(c) => divisors(c),
        None => inv.classes.clone(),
    };
    let lb_span = gram_from_configuration(cfg, &lb_classes)?;
    let lb = ambient.sublattice(&node_combos(&ids, &lb_classes))?;
    rep.push(Check::from_bool("L_B rank", lb_span.rank() == case.l_b.rank, format!("rank {}, expected {}", lb_span.rank(), case.l_b.rank)));
    if case.l_b.classes.is_some() {
        let orbit_l = ambient.sublattice(&node_combos(&ids, &inv.classes))?;
        let same = orbit_l.contains_sublattice(&lb) && lb.contains_sublattice(&orbit_l);
        let detail = if same {
            "note: curated classes span the same lattice as all invariant orbit sums".to_string()
        } else {
            format!("note: curated classes span rank {}; all invariant orbit sums span rank {}", lb.rank(), orbit_l.rank())
        };
        rep.push(Check::pass("L_B classes", detail));
    }
    if let Some(g) = &case.l_b.generators {
        rep.push(check_generators("L_B generators", &lb_span, g, case.l_b.rank));
    }
    let lb_lat = lb_span.lattice.clone();
    let sig = signature(&lb_lat);
    rep.push(Check::from_bool("L_B signature", sig == Signature::new(1, lb_span.rank() - 1), format!("{sig}")));
    let q = discriminant_form(&lb_lat)?;
    let expected = parse_form_expression(&case.l_b.form)?;
    rep.push(Check::from_bool("L_B form", is_isomorphic(&q, &expected), format!("disc form {q} vs {}", case.l_b.form)));
    let gs = gauss_signature(&q)?;
    let target = (2 - lb_span.rank() as i64).rem_euclid(8) as u8;
    rep.push(Check::from_bool("gauss", gs == target, format!("Gauss signature {gs}, 2 - rank = {target} mod 8")));
    if let Some(name) = &case.l_b.lattice {
        let l = named_lattice::<BigInt>(name)?;
        let ok = l.rank() == lb_lat.rank() && is_isomorphic(&discriminant_form(&l)?, &q);
        rep.push(Check::from_bool("L_B lattice", ok, format!("{name} has the same rank and form")));
    }
    if let Some(stated) = &case.l_b.stated_form {
        let cit = case.l_b.stated_form_citation.clone().or_else(|| case.citation.clone()).unwrap_or_default();
        let check = match parse_form_expression(stated) {
            Ok(f) if is_isomorphic(&f, &q) => Check::pass("stated form", format!("{stated} agrees")),
            Ok(_) => Check::warn("stated form", format!("{stated} is not isomorphic to the computed form"), cit),
            Err(e) => Check::warn("stated form", format!("{stated} is not a valid form: {e}"), cit),
        };
        rep.push(check);
    }

    // outer lattice, S(tau) or the span of all curves
    let mut outer_sub = None;
    let mut outer_span = None;
    if let Some(o) = &case.outer {
        let oc = divisors(&o.classes);
        if let Some(k) = case.tau_power {
            let tau = sigma.power(k, &ids);
            let orbits: BTreeSet<OrbitDivisor> = crate::curveconfig::orbit_sums(cfg, &tau).into_iter().collect();
            let curated: BTreeSet<OrbitDivisor> = oc.iter().cloned().collect();
            rep.push(Check::from_bool(
                &format!("{} classes", o.label),
                orbits == curated,
                format!("classes are the orbits of sigma^{k}"),
            ));
        }
        let span = gram_from_configuration(cfg, &oc)?;
        rep.push(Check::from_bool(&format!("{} rank", o.label), span.rank() == o.rank, format!("rank {}, expected {}", span.rank(), o.rank)));
        if let Some(g) = &o.generators {
            rep.push(check_generators(&format!("{} generators", o.label), &span, g, o.rank));
        }
        if o.two_elementary {
            let dg = discriminant_group(&span.lattice);
            let f: Vec<BigInt> = dg.invariant_factors.clone();
            let two = BigInt::from(2);
            let ok = f.iter().all(|x| *x == two) && Some(f.len()) == o.discriminant_length;
            rep.push(Check::from_bool(
                &format!("{} 2-elementary", o.label),
                ok,
                format!("discriminant group (Z/2)^{}, expected length {:?}", f.len(), o.discriminant_length),
            ));
        }
        let outer = ambient.sublattice(&node_combos(&ids, &oc))?;
        match chain_primitivity(&lb, &outer) {
            Ok(p) => rep.push(Check::from_bool("primitive", p, format!("L_B is primitive in {}", o.label))),
            Err(e) => rep.push(Check::fail("primitive", format!("L_B is not contained in {}: {e}", o.label))),
        }
        // sigma acts on the outer classes; its fixed part should be L_B up to finite index
        if let Ok(p) = action_matrix(&span, &oc, &sigma) {
            let fixed = fixed_sublattice(&span.lattice, &p)?;
            rep.push(Check::from_bool(
                "fixed rank",
                fixed.rank() == lb.rank(),
                format!("sigma-invariant part of {} has rank {}", o.label, fixed.rank()),
            ));
        }
        outer_sub = Some(outer);
        outer_span = Some(span);
    }
    Ok(ExceptionalResult { l_b: lb, l_b_span: lb_span, outer: outer_sub, outer_span })
}

// ---------------------------------------------------------------------------
// known conflicts

pub fn verify_conflict(table: &Table, c: &KnownConflict) -> LineReport {
    let [a, b] = c.lines;
    let mut rep = LineReport::new("conflict", format!("n={} lines {a} / {b}", c.order));
    let (la, lb) = match (table.line(a), table.line(b)) {
        (Some(x), Some(y)) => (x, y),
        _ => {
            rep.push(Check::fail("conflict", "lines missing"));
            return rep;
        }
    };
    let (aa, ab) = match (LineAnalysis::new(la), LineAnalysis::new(lb)) {
        (Ok(x), Ok(y)) => (x, y),
        _ => {
            rep.push(Check::fail("conflict", "analysis failed"));
            return rep;
        }
    };
    let fixes_poly = aa.poly.permute_variables(&c.permutation).same_monomials(&ab.poly);
    let equivalent = match (&aa.group, &ab.group) {
        (Ok(x), Ok(y)) => permute_coordinates(x, &c.permutation).map(|x| groups_equal(&x, y)).unwrap_or(false),
        _ => false,
    };
    if fixes_poly && equivalent && la.rank != lb.rank {
        rep.push(Check::warn(
            "generator conflict",
            format!(
                "groups of lines {a} and {b} agree after permutation {:?} of a shared polynomial, but ranks are {} and {}",
                c.permutation, la.rank, lb.rank
            ),
            c.citation.clone(),
        ));
    } else {
        rep.push(Check::pass(
            "generator conflict",
            format!("note: not reproduced (permutation preserves polynomial: {fixes_poly}, groups related: {equivalent})"),
        ));
    }
    rep
}

// ---------------------------------------------------------------------------
// driver

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub orders: Option<Vec<u32>>,
    pub line: Option<u32>,
}

fn selected(opts: &RunOptions, n: u32) -> bool {
    opts.orders.as_ref().map(|o| o.contains(&n)).unwrap_or(true)
}

pub fn case_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let cdir = dir.join("configs");
    let rd = std::fs::read_dir(&cdir).map_err(|source| Error::Io { path: cdir.display().to_string(), source })?;
    let mut v: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|x| x == "json").unwrap_or(false))
        .collect();
    v.sort();
    Ok(v)
}

/// Runs every check on the data directory. With `line` set, only that line's
/// checks (and its mirror pair) run for the selected orders.
pub fn run_all(dir: &Path, opts: &RunOptions) -> Result<TableReport> {
    let data = Dataset::load(dir)?;
    let mut out = TableReport::default();
    let full = opts.line.is_none();

    for (&n, table) in &data.tables {
        if !selected(opts, n) {
            continue;
        }
        if full {
            out.reports.push(verify_involution(table));
        }
        for line in table.lines.values() {
            if opts.line.map(|k| k != line.no).unwrap_or(false) {
                continue;
            }
            out.reports.push(verify_line(n, line));
            let dual = table.line(line.dual_no()).expect("checked at load");
            out.reports.push(verify_mirror_pair(n, line, dual, &data.sidecar.conflicts));
        }
        if !full {
            continue;
        }
        let mut polys: BTreeMap<String, InvertiblePolynomial> = BTreeMap::new();
        for line in table.lines.values() {
            if let Ok(p) = parse_polynomial(&line.polynomial) {
                polys.entry(p.to_string()).or_insert(p);
            }
        }
        for p in polys.values() {
            out.reports.push(verify_dual_laws(p));
        }
        let classes = load_class_file(&dir.join(format!("classes_n{n}.json")))?;
        out.extend(verify_equivalence_classes(table, &classes));
        for c in data.sidecar.conflicts.iter().filter(|c| c.order == n) {
            out.reports.push(verify_conflict(table, c));
        }
    }

    if full {
        let nol = load_nol_file(&dir.join("nol_lattices.json"))?;
        for (&n, table) in &data.tables {
            if selected(opts, n) {
                out.extend(verify_nol_table(table, &nol));
            }
        }
        for (polynomial, w, erratum) in &data.sidecar.headers {
            let mut r = LineReport::new("sidecar", polynomial.clone());
            let ok = parse_polynomial(polynomial).and_then(|p| weight_system(&p.exponent_matrix())).map(|c| c == *w);
            let mut detail = format!("header weights {w}");
            if let Some(e) = erratum {
                detail.push_str(&format!("; note: erratum applied ({e})"));
            }
            r.push(Check::from_bool("header", ok.unwrap_or(false), detail));
            out.reports.push(r);
        }
        for path in case_files(dir)? {
            let (cfg, case) = load_case(&path)?;
            if selected(opts, case.order) {
                out.reports.push(verify_exceptional(&cfg, &case).0);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line12() -> TableLine {
        serde_json::from_str(
            r#"{"no": 12, "rank": 4, "dual": 78, "weights": [3, 2, 2, 1, 8],
                "polynomial": "x^2z+y^4+z^4+w^8", "group": [], "form": "w_{2,2}^1+w_{2,2}^5"}"#,
        )
        .unwrap()
    }

    fn line78() -> TableLine {
        serde_json::from_str(
            r#"{"no": 78, "rank": 16, "dual": 12, "weights": [4, 2, 1, 1, 8],
                "polynomial": "x^2+y^4+xz^4+w^8", "group": [4], "form": "w_{2,2}^-1+w_{2,2}^-5"}"#,
        )
        .unwrap()
    }

    fn table(body: &str) -> Result<Table> {
        parse_table(&format!(r#"{{"order": 4, "lines": [{body}]}}"#), Path::new("test.json"))
    }

    const SELF: &str = r#"{"no": 1, "rank": 10, "dual": "self", "weights": [1,1,1,1,4], "polynomial": "x^4+y^4+z^4+w^4", "group": [2,2], "form": "u"}"#;

    #[test]
    fn dual_references() {
        let t = table(SELF).unwrap();
        assert_eq!(t.line(1).unwrap().dual_no(), 1);
        assert!(table(&SELF.replace("\"self\"", "\"other\"")).is_err());
        assert!(table(&SELF.replace("\"self\"", "7")).is_err());
    }

    #[test]
    fn duplicate_lines_and_unknown_fields() {
        assert!(table(&format!("{SELF},{SELF}")).is_err());
        assert!(table(&SELF.replace("\"rank\"", "\"rnak\"")).is_err());
        assert!(table(&SELF.replace("[1,1,1,1,4]", "[4]")).is_err());
    }

    #[test]
    fn declared_weights_split_off_the_degree() {
        assert_eq!(line12().declared_weights().unwrap(), WeightSystem::new(vec![3, 2, 2, 1], 8));
    }

    #[test]
    fn x0_shape() {
        let a = crate::invertible_poly::parse_polynomial("x^2z+y^4+z^4+w^8").unwrap().exponent_matrix();
        assert!(has_x0_shape(&a, 4));
        assert!(has_x0_shape(&a, 8));
        let b = crate::invertible_poly::parse_polynomial("x^4+y^3z+z^3w+yw^3").unwrap().exponent_matrix();
        assert!(has_x0_shape(&b, 4));
        assert!(!has_x0_shape(&b, 3));
    }

    #[test]
    fn good_line_passes() {
        let rep = verify_line(4, &line12());
        assert_eq!(rep.status(), Status::Pass, "{rep:?}");
        assert_eq!(verify_mirror_pair(4, &line12(), &line78(), &[]).status(), Status::Pass);
    }

    #[test]
    fn mutated_degree_fails() {
        let mut l = line12();
        l.weights = vec![3, 2, 2, 1, 9];
        let rep = verify_line(4, &l);
        assert_eq!(rep.status(), Status::Fail);
        assert_eq!(rep.check("weights").unwrap().status, Status::Fail);
    }

    #[test]
    fn mutated_rank_breaks_the_pair() {
        let mut l = line78();
        l.rank = 15;
        let rep = verify_mirror_pair(4, &line12(), &l, &[]);
        assert_eq!(rep.check("ranks").unwrap().status, Status::Fail);
        let mut l = line78();
        l.form = "w_{2,2}^1+w_{2,2}^5".into();
        let rep = verify_mirror_pair(4, &line12(), &l, &[]);
        assert_eq!(rep.check("forms").unwrap().status, Status::Fail);
    }

    #[test]
    fn unknown_generator_group_is_reported() {
        let mut l = line78();
        l.group = vec![3];
        assert_eq!(verify_line(4, &l).check("group").unwrap().status, Status::Fail);
    }

    #[test]
    fn report_counts() {
        let mut a = LineReport::new("line", "a");
        a.push(Check::pass("x", "ok"));
        a.push(Check::warn("y", "odd", "somewhere"));
        let mut b = LineReport::new("line", "b");
        b.push(Check::from_bool("z", false, "bad"));
        let rep = TableReport { reports: vec![a, b] };
        let c = rep.counts();
        // one entry per report, by worst status
        assert_eq!((c.pass, c.warn, c.fail), (0, 1, 1));
        assert!(rep.has_failures());
        assert_eq!(rep.warnings()[0].1.citation.as_deref(), Some("somewhere"));
        assert!(rep.to_text(false).contains("FAIL"));
    }
}
