//! Invertible polynomials, exponent matrices, weight systems and transposes.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{solve_rational, Matrix};

/// Upper bound on the number of variables accepted by the parser.
pub const MAX_VARIABLES: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Monomial {
    pub exponents: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExponentMatrix {
    entries: Vec<Vec<u32>>,
}

impl ExponentMatrix {
    pub fn new(entries: Vec<Vec<u32>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|r| r.len() != n) {
            return Err(Error::NotInvertible("exponent matrix must be square and nonempty".into()));
        }
        let m = ExponentMatrix { entries };
        if m.det() == 0 {
            return Err(Error::NotInvertible("exponent matrix is singular".into()));
        }
        Ok(m)
    }

    pub fn diagonal(d: &[u32]) -> Result<Self> {
        let n = d.len();
        Self::new((0..n).map(|i| (0..n).map(|j| if i == j { d[i] } else { 0 }).collect()).collect())
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i][j]
    }

    pub fn to_matrix(&self) -> Matrix<i64> {
        Matrix::from_rows(self.entries.iter().map(|r| r.iter().map(|&v| v as i64).collect()).collect())
    }

    pub fn det(&self) -> i64 {
        self.to_matrix().det()
    }

    pub fn transpose(&self) -> Self {
        let n = self.size();
        ExponentMatrix { entries: (0..n).map(|i| (0..n).map(|j| self.entries[j][i]).collect()).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightSystem {
    pub weights: Vec<i64>,
    pub degree: i64,
}

impl WeightSystem {
    pub fn new(weights: Vec<i64>, degree: i64) -> Self {
        WeightSystem { weights, degree }
    }

    pub fn permuted(&self, perm: &[usize]) -> WeightSystem {
        let mut w = vec![0; self.weights.len()];
        for (i, &p) in perm.iter().enumerate() {
            w[p] = self.weights[i];
        }
        WeightSystem { weights: w, degree: self.degree }
    }
}

impl fmt::Display for WeightSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w: Vec<String> = self.weights.iter().map(|x| x.to_string()).collect();
        write!(f, "({};{})", w.join(","), self.degree)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AtomicKind {
    Fermat,
    Loop,
    Chain,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AtomicBlock {
    pub kind: AtomicKind,
    pub variables: Vec<usize>,
    pub exponents: Vec<u32>,
}

impl AtomicBlock {
    /// Exponent rows of this block, embedded in `m` variables.
    pub fn rows(&self, m: usize) -> Vec<Vec<u32>> {
        let k = self.variables.len();
        let mut out = Vec::with_capacity(k);
        for i in 0..k {
            let mut row = vec![0; m];
            match self.kind {
                AtomicKind::Fermat => row[self.variables[0]] = self.exponents[0],
                AtomicKind::Chain => {
                    row[self.variables[i]] = self.exponents[i];
                    if i > 0 {
                        row[self.variables[i - 1]] = 1;
                    }
                }
                AtomicKind::Loop => {
                    // x_{i-1} x_i^{a_i}
                    row[self.variables[i]] = self.exponents[i];
                    row[self.variables[(i + k - 1) % k]] = 1;
                }
            }
            out.push(row);
        }
        out
    }

    pub fn describe(&self, names: &[String]) -> String {
        let kind = match self.kind {
            AtomicKind::Fermat => "Fermat",
            AtomicKind::Loop => "Loop",
            AtomicKind::Chain => "Chain",
        };
        let v: Vec<&str> = self.variables.iter().map(|&i| names[i].as_str()).collect();
        let e: Vec<String> = self.exponents.iter().map(|x| x.to_string()).collect();
        format!("{kind}({};{})", v.join(","), e.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InvertiblePolynomial {
    pub variables: Vec<String>,
    pub monomials: Vec<Monomial>,
}

impl InvertiblePolynomial {
    pub fn from_matrix(variables: Vec<String>, a: &ExponentMatrix) -> Result<Self> {
        if variables.len() != a.size() {
            return Err(Error::NotInvertible("variable count differs from matrix size".into()));
        }
        let monomials = a.rows().iter().map(|r| Monomial { exponents: r.clone() }).collect();
        Ok(InvertiblePolynomial { variables, monomials })
    }

    pub fn exponent_matrix(&self) -> ExponentMatrix {
        ExponentMatrix { entries: self.monomials.iter().map(|m| m.exponents.clone()).collect() }
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    /// Reorders variables: old variable `i` becomes variable `perm[i]`.
    pub fn permute_variables(&self, perm: &[usize]) -> InvertiblePolynomial {
        let m = self.num_variables();
        let mut vars = vec![String::new(); m];
        for i in 0..m {
            vars[perm[i]] = self.variables[i].clone();
        }
        let monomials = self
            .monomials
            .iter()
            .map(|mo| {
                let mut e = vec![0; m];
                for i in 0..m {
                    e[perm[i]] = mo.exponents[i];
                }
                Monomial { exponents: e }
            })
            .collect();
        InvertiblePolynomial { variables: vars, monomials }
    }

    /// Same polynomial up to the order of monomials, with variables renamed positionally.
    pub fn same_monomials(&self, other: &InvertiblePolynomial) -> bool {
        let mut a: Vec<_> = self.monomials.iter().map(|m| m.exponents.clone()).collect();
        let mut b: Vec<_> = other.monomials.iter().map(|m| m.exponents.clone()).collect();
        a.sort();
        b.sort();
        a == b
    }
}

impl fmt::Display for InvertiblePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for m in &self.monomials {
            if !first {
                write!(f, "+")?;
            }
            first = false;
            for (i, &e) in m.exponents.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "{}", self.variables[i])?,
                    _ => write!(f, "{}^{}", self.variables[i], e)?,
                }
            }
        }
        Ok(())
    }
}

fn default_rank(name: &str) -> (usize, String) {
    match name {
        "x" => (0, String::new()),
        "y" => (1, String::new()),
        "z" => (2, String::new()),
        "w" => (3, String::new()),
        _ => (4, name.to_string()),
    }
}

fn tokenize_monomial(term: &str) -> Result<Vec<(String, u32)>> {
    let chars: Vec<char> = term.chars().filter(|c| !c.is_whitespace() && *c != '*').collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        if !c.is_ascii_alphabetic() {
            return Err(Error::Parse(format!("unexpected '{c}' in monomial '{term}'")));
        }
        let mut name = c.to_string();
        i += 1;
        if i < chars.len() && chars[i] == '_' {
            name.push('_');
            i += 1;
        }
        while i < chars.len() && chars[i].is_ascii_digit() {
            name.push(chars[i]);
            i += 1;
        }
        if name.ends_with('_') {
            return Err(Error::Parse(format!("dangling subscript in '{term}'")));
        }
        let mut exp = 1u32;
        if i < chars.len() && chars[i] == '^' {
            i += 1;
            let braced = i < chars.len() && chars[i] == '{';
            if braced {
                i += 1;
            }
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if start == i {
                return Err(Error::Parse(format!("missing exponent in '{term}'")));
            }
            let s: String = chars[start..i].iter().collect();
            exp = s.parse().map_err(|_| Error::Parse(format!("bad exponent '{s}'")))?;
            if braced {
                if i >= chars.len() || chars[i] != '}' {
                    return Err(Error::Parse(format!("unclosed brace in '{term}'")));
                }
                i += 1;
            }
        }
        out.push((name, exp));
    }
    if out.is_empty() {
        return Err(Error::Parse("empty monomial".into()));
    }
    Ok(out)
}

/// Parses `"x^2z+y^4+z^4+w^8"` style input. An optional declaration prefix
/// `"x,y,z,w:"` fixes the variable order; otherwise x,y,z,w come first and
/// other names follow alphabetically.
pub fn parse_polynomial(text: &str) -> Result<InvertiblePolynomial> {
    let (decl, body) = match text.split_once(':') {
        Some((d, b)) => (Some(d), b),
        None => (None, text),
    };
    let body = body.trim().trim_matches('$');
    if body.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    let terms: Vec<Vec<(String, u32)>> =
        body.split('+').map(tokenize_monomial).collect::<Result<_>>()?;
    let variables: Vec<String> = match decl {
        Some(d) => {
            let v: Vec<String> = d.split(',').map(|s| s.trim().to_string()).collect();
            if v.iter().any(|s| s.is_empty()) {
                return Err(Error::Parse("empty variable name in declaration".into()));
            }
            v
        }
        None => {
            let mut v: Vec<String> = Vec::new();
            for t in &terms {
                for (n, _) in t {
                    if !v.contains(n) {
                        v.push(n.clone());
                    }
                }
            }
            v.sort_by_key(|n| default_rank(n));
            v
        }
    };
    parse_with_variables(&terms, variables)
}

/// Parses the body against an explicit variable list.
pub fn parse_polynomial_in(text: &str, variables: &[&str]) -> Result<InvertiblePolynomial> {
    let body = text.trim().trim_matches('$');
    let terms: Vec<Vec<(String, u32)>> =
        body.split('+').map(tokenize_monomial).collect::<Result<_>>()?;
    parse_with_variables(&terms, variables.iter().map(|s| s.to_string()).collect())
}

fn parse_with_variables(terms: &[Vec<(String, u32)>], variables: Vec<String>) -> Result<InvertiblePolynomial> {
    let m = variables.len();
    if m > MAX_VARIABLES {
        return Err(Error::Parse(format!("more than {MAX_VARIABLES} variables")));
    }
    let mut monomials = Vec::new();
    for t in terms {
        let mut e = vec![0u32; m];
        for (name, exp) in t {
            let idx = variables
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| Error::Parse(format!("undeclared variable '{name}'")))?;
            e[idx] += exp;
        }
        if e.iter().all(|&x| x == 0) {
            return Err(Error::Parse("constant monomial".into()));
        }
        monomials.push(Monomial { exponents: e });
    }
    if monomials.len() != m {
        return Err(Error::NotInvertible(format!(
            "{} monomials in {} variables: count mismatch",
            monomials.len(),
            m
        )));
    }
    let p = InvertiblePolynomial { variables, monomials };
    ExponentMatrix::new(p.exponent_matrix().entries)?;
    Ok(p)
}

/// Splits an exponent matrix into Fermat, Loop and Chain blocks.
///
/// Each row must have one entry (Fermat or chain head) or two entries one of
/// which is 1 (the link to the previous variable). Blocks are returned in
/// order of their smallest variable index.
pub fn atomic_decomposition(a: &ExponentMatrix) -> Result<Vec<AtomicBlock>> {
    let m = a.size();
    // for each row: (pure variable, exponent, optional predecessor)
    let mut info = Vec::with_capacity(m);
    for (r, row) in a.rows().iter().enumerate() {
        let nz: Vec<usize> = (0..m).filter(|&j| row[j] > 0).collect();
        match nz.as_slice() {
            [j] => info.push((*j, row[*j], None)),
            [j, k] => {
                let (pure, prev) = if row[*j] == 1 && row[*k] >= 2 {
                    (*k, *j)
                } else if row[*k] == 1 && row[*j] >= 2 {
                    (*j, *k)
                } else if row[*j] == 1 && row[*k] == 1 {
                    return Err(Error::NotInvertible(format!("row {r} is a product of two linear factors")));
                } else {
                    return Err(Error::NotInvertible(format!("row {r} is not atomic")));
                };
                info.push((pure, row[pure], Some(prev)));
            }
            _ => return Err(Error::NotInvertible(format!("row {r} has {} variables", nz.len()))),
        }
    }
    // each variable must be the pure variable of exactly one row
    let mut row_of = vec![usize::MAX; m];
    for (r, (pure, _, _)) in info.iter().enumerate() {
        if row_of[*pure] != usize::MAX {
            return Err(Error::NotInvertible(format!("variable {pure} carries two pure powers")));
        }
        row_of[*pure] = r;
    }
    // successor map: prev -> pure
    let mut next: Vec<Option<usize>> = vec![None; m];
    for (pure, _, prev) in &info {
        if let Some(p) = prev {
            if next[*p].is_some() {
                return Err(Error::NotInvertible(format!("variable {p} links to two variables")));
            }
            next[*p] = Some(*pure);
        }
    }
    let exp_of = |v: usize| info[row_of[v]].1;
    let prev_of = |v: usize| info[row_of[v]].2;
    let mut used = vec![false; m];
    let mut blocks = Vec::new();
    for v in 0..m {
        if used[v] {
            continue;
        }
        // walk back to a head, or detect a loop
        let mut head = v;
        let mut steps = 0;
        let mut is_loop = false;
        while let Some(p) = prev_of(head) {
            head = p;
            steps += 1;
            if head == v {
                is_loop = true;
                break;
            }
            if steps > m {
                return Err(Error::NotInvertible("inconsistent links".into()));
            }
        }
        let mut vars = Vec::new();
        if is_loop {
            let start = {
                let mut s = v;
                let mut c = next[v].unwrap();
                while c != v {
                    s = s.min(c);
                    c = next[c].unwrap();
                }
                s
            };
            let mut c = start;
            loop {
                vars.push(c);
                c = next[c].unwrap();
                if c == start {
                    break;
                }
            }
        } else {
            let mut c = Some(head);
            while let Some(x) = c {
                vars.push(x);
                c = next[x];
            }
        }
        for &x in &vars {
            used[x] = true;
        }
        let exps: Vec<u32> = vars.iter().map(|&x| exp_of(x)).collect();
        let kind = if is_loop {
            AtomicKind::Loop
        } else if vars.len() == 1 {
            AtomicKind::Fermat
        } else {
            AtomicKind::Chain
        };
        if kind != AtomicKind::Fermat && exps.iter().any(|&e| e < 2) {
            return Err(Error::NotInvertible("loop or chain exponent below 2".into()));
        }
        if kind == AtomicKind::Fermat && exps[0] < 2 {
            return Err(Error::NotInvertible("linear Fermat term".into()));
        }
        blocks.push(AtomicBlock { kind, variables: vars, exponents: exps });
    }
    Ok(blocks)
}

pub fn weight_system(a: &ExponentMatrix) -> Result<WeightSystem> {
    let m = a.size();
    let q = solve_rational(&a.to_matrix(), &vec![1i64; m])
        .ok_or_else(|| Error::NotInvertible("singular exponent matrix".into()))?;
    if q.iter().any(|x| *x.numer() <= 0) {
        return Err(Error::NoPositiveSolution);
    }
    let d = q.iter().fold(1i64, |acc, x| acc.lcm(x.denom()));
    let weights: Vec<i64> = q.iter().map(|x| x.numer() * (d / x.denom())).collect();
    let g = weights.iter().fold(0i64, |acc, &x| acc.gcd(&x));
    Ok(WeightSystem { weights: weights.iter().map(|x| x / g).collect(), degree: d / g })
}

pub fn is_calabi_yau(w: &WeightSystem) -> bool {
    w.weights.iter().sum::<i64>() == w.degree
}

pub fn transpose(p: &InvertiblePolynomial) -> InvertiblePolynomial {
    InvertiblePolynomial::from_matrix(p.variables.clone(), &p.exponent_matrix().transpose())
        .expect("transpose of an invertible polynomial is invertible")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fermat_quartic() {
        let p = parse_polynomial("x^4+y^4+z^4+w^4").unwrap();
        let w = weight_system(&p.exponent_matrix()).unwrap();
        assert_eq!(w, WeightSystem::new(vec![1, 1, 1, 1], 4));
        assert!(is_calabi_yau(&w));
        assert_eq!(transpose(&p), p);
    }

    #[test]
    fn chain_weights_and_transpose() {
        let p = parse_polynomial("x^2z+y^4+z^4+w^8").unwrap();
        let a = p.exponent_matrix();
        assert_eq!(a.rows()[0], vec![2, 0, 1, 0]);
        assert_eq!(weight_system(&a).unwrap(), WeightSystem::new(vec![3, 2, 2, 1], 8));
        let t = transpose(&p);
        assert!(t.same_monomials(&parse_polynomial("x^2+y^4+xz^4+w^8").unwrap()));
        assert_eq!(weight_system(&t.exponent_matrix()).unwrap(), WeightSystem::new(vec![4, 2, 1, 1], 8));
    }

    #[test]
    fn atomic_types() {
        let p = parse_polynomial("x^4+y^3z+z^3w+yw^3").unwrap();
        let blocks = atomic_decomposition(&p.exponent_matrix()).unwrap();
        let mut kinds: Vec<AtomicKind> = blocks.iter().map(|b| b.kind).collect();
        kinds.sort_by_key(|k| *k as u8);
        assert_eq!(kinds, vec![AtomicKind::Fermat, AtomicKind::Loop]);
        let p = parse_polynomial("x^2z+y^4+z^4+w^8").unwrap();
        let blocks = atomic_decomposition(&p.exponent_matrix()).unwrap();
        assert_eq!(blocks.iter().filter(|b| b.kind == AtomicKind::Chain).count(), 1);
        assert_eq!(blocks.len(), 3);
    }

    #[test]
    fn blocks_rebuild_the_matrix() {
        for s in ["x^2z+y^4+z^5+xw^4", "x^2+y^3+xz^6+w^12", "x^4+y^3z+z^3w+yw^3", "x^3y+y^3z+z^3w+w^3x"] {
            let p = parse_polynomial(s).unwrap();
            let a = p.exponent_matrix();
            let mut rows: Vec<Vec<u32>> = atomic_decomposition(&a).unwrap().iter().flat_map(|b| b.rows(4)).collect();
            let mut want = a.rows().to_vec();
            rows.sort();
            want.sort();
            assert_eq!(rows, want, "{s}");
        }
    }

    #[test]
    fn rejects_non_invertible() {
        assert!(parse_polynomial("x^2y^2+x^2y^2+z^4+w^4").is_err());
        assert!(parse_polynomial("").is_err());
        let p = parse_polynomial("x^4+y^4+z^4+xyzw").unwrap();
        assert!(atomic_decomposition(&p.exponent_matrix()).is_err());
    }

    #[test]
    fn declared_variable_order() {
        let p = parse_polynomial("w,z,y,x: x^2z+y^4+z^4+w^8").unwrap();
        assert_eq!(weight_system(&p.exponent_matrix()).unwrap(), WeightSystem::new(vec![1, 2, 2, 3], 8));
    }

    #[test]
    fn permutation_convention() {
        let p = parse_polynomial("x^2z+y^4+z^4+w^8").unwrap();
        let perm = [1, 0, 2, 3];
        let q = p.permute_variables(&perm);
        let w = weight_system(&p.exponent_matrix()).unwrap();
        assert_eq!(weight_system(&q.exponent_matrix()).unwrap(), w.permuted(&perm));
    }
}
