//! Integral lattices given by Gram matrices.

use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{inertia, row_span_basis, smith, Matrix};
use crate::quadform::{gauss_signature, is_isomorphic, isotropic_subgroups, negate, FiniteQuadraticForm, Q};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
}

impl Signature {
    pub fn new(positive: usize, negative: usize) -> Self {
        Signature { positive, negative }
    }

    pub fn rank(&self) -> usize {
        self.positive + self.negative
    }

    /// `l+ - l-` reduced mod 8.
    pub fn mod8(&self) -> u8 {
        ((self.positive as i64 - self.negative as i64).rem_euclid(8)) as u8
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.positive, self.negative)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GramLattice<T> {
    gram: Matrix<T>,
}

impl<T: Scalar> GramLattice<T> {
    pub fn new(gram: Matrix<T>) -> Result<Self> {
        if !gram.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        if gram.det().is_zero() {
            return Err(Error::Degenerate);
        }
        Ok(GramLattice { gram })
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(Matrix::from_i64_rows(rows))
    }

    pub fn gram(&self) -> &Matrix<T> {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.nrows()
    }

    pub fn det(&self) -> T {
        self.gram.det()
    }

    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.gram[(i, i)].is_even())
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs().is_one()
    }
}

/// Negated Dynkin form of `T_{p,q,r}`: central node first, then the legs in order.
pub fn t_pqr<T: Scalar>(p: usize, q: usize, r: usize) -> Result<GramLattice<T>> {
    if p == 0 || q == 0 || r == 0 {
        return Err(Error::UnknownLattice(format!("T_{{{p},{q},{r}}}")));
    }
    let n = p + q + r - 2;
    let mut g = Matrix::<T>::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = T::from_i64_exact(-2);
    }
    let mut next = 1;
    for leg in [p, q, r] {
        let mut prev = 0;
        for _ in 0..leg - 1 {
            g[(prev, next)] = T::one();
            g[(next, prev)] = T::one();
            prev = next;
            next += 1;
        }
    }
    GramLattice::new(g)
}

fn a_n<T: Scalar>(n: usize) -> Result<GramLattice<T>> {
    if n == 0 {
        return Err(Error::UnknownLattice("A_0".into()));
    }
    let mut g = Matrix::<T>::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = T::from_i64_exact(-2);
        if i + 1 < n {
            g[(i, i + 1)] = T::one();
            g[(i + 1, i)] = T::one();
        }
    }
    GramLattice::new(g)
}

pub fn rescale<T: Scalar>(l: &GramLattice<T>, n: i64) -> Result<GramLattice<T>> {
    let k = T::from_i64_exact(n);
    GramLattice::new(l.gram.map(|v| v.clone() * k.clone()))
}

pub fn direct_sum_lattice<T: Scalar>(a: &GramLattice<T>, b: &GramLattice<T>) -> GramLattice<T> {
    let (ra, rb) = (a.rank(), b.rank());
    let mut g = Matrix::<T>::zeros(ra + rb, ra + rb);
    for i in 0..ra {
        for j in 0..ra {
            g[(i, j)] = a.gram[(i, j)].clone();
        }
    }
    for i in 0..rb {
        for j in 0..rb {
            g[(ra + i, ra + j)] = b.gram[(i, j)].clone();
        }
    }
    GramLattice { gram: g }
}

fn parse_index(s: &str) -> Option<Vec<usize>> {
    let s = s.trim_start_matches('_').trim_start_matches('{').trim_end_matches('}');
    if s.is_empty() {
        return None;
    }
    if s.contains(',') {
        s.split(',').map(|p| p.trim().parse().ok()).collect()
    } else if s.chars().all(|c| c.is_ascii_digit()) {
        Some(vec![s.parse().ok()?])
    } else {
        None
    }
}

fn named_term<T: Scalar>(term: &str) -> Result<GramLattice<T>> {
    let unknown = || Error::UnknownLattice(term.to_string());
    // trailing "(n)" rescales, trailing "^k" repeats
    if let Some((base, pow)) = term.rsplit_once('^') {
        if !base.is_empty() && !base.ends_with('_') {
            let k: usize = pow.trim_matches(|c| c == '{' || c == '}').parse().map_err(|_| unknown())?;
            let b = named_term::<T>(base)?;
            let mut acc = b.clone();
            for _ in 1..k {
                acc = direct_sum_lattice(&acc, &b);
            }
            return if k == 0 { Err(unknown()) } else { Ok(acc) };
        }
    }
    if term.ends_with(')') && !term.starts_with('(') {
        if let Some(open) = term.rfind('(') {
            let n: i64 = term[open + 1..term.len() - 1].parse().map_err(|_| unknown())?;
            return rescale(&named_term::<T>(&term[..open])?, n);
        }
    }
    let inner = term
        .strip_prefix('<')
        .and_then(|s| s.strip_suffix('>'))
        .or_else(|| term.strip_prefix('⟨').and_then(|s| s.strip_suffix('⟩')));
    if let Some(v) = inner {
        let n: i64 = v.trim().parse().map_err(|_| unknown())?;
        return GramLattice::new(Matrix::from_i64_rows(&[vec![n]]));
    }
    let (head, rest) = term.split_at(1);
    match (head, parse_index(rest)) {
        ("U", None) if rest.is_empty() => GramLattice::from_i64_rows(&[vec![0, 1], vec![1, 0]]),
        ("A", Some(v)) if v.len() == 1 => a_n(v[0]),
        ("D", Some(v)) if v.len() == 1 && v[0] >= 4 => t_pqr(2, 2, v[0] - 2),
        ("E", Some(v)) if v.len() == 1 && (6..=8).contains(&v[0]) => t_pqr(2, 3, v[0] - 3),
        ("T", Some(v)) if v.len() == 3 => t_pqr(v[0], v[1], v[2]),
        ("T", Some(v)) if v.len() == 1 && rest.len() == 3 => {
            let d: Vec<usize> = rest.chars().map(|c| c.to_digit(10).unwrap() as usize).collect();
            t_pqr(d[0], d[1], d[2])
        }
        ("L", None) if rest == "_K3" || rest == "K3" => {
            let u = named_term::<T>("U")?;
            let e8 = named_term::<T>("E_8")?;
            let mut acc = direct_sum_lattice(&direct_sum_lattice(&u, &u), &u);
            acc = direct_sum_lattice(&acc, &e8);
            Ok(direct_sum_lattice(&acc, &e8))
        }
        _ => Err(unknown()),
    }
}

/// Builds `U`, `A_n`, `D_n`, `E_6..8`, `T_{p,q,r}`, `<n>`, `L(n)`, `L^k` and
/// sums joined by `+` such as `"U+D_5+D_9"`.
pub fn named_lattice<T: Scalar>(name: &str) -> Result<GramLattice<T>> {
    let cleaned: String = name.replace("\\oplus", "+").replace('⊕', "+").chars().filter(|c| !c.is_whitespace()).collect();
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in cleaned.chars() {
        match c {
            '{' | '(' | '<' | '⟨' => depth += 1,
            '}' | ')' | '>' | '⟩' => depth -= 1,
            _ => {}
        }
        if c == '+' && depth == 0 {
            parts.push(std::mem::take(&mut cur));
        } else {
            cur.push(c);
        }
    }
    parts.push(cur);
    let mut acc: Option<GramLattice<T>> = None;
    for p in parts {
        if p.is_empty() {
            return Err(Error::UnknownLattice(name.to_string()));
        }
        let l = named_term::<T>(&p)?;
        acc = Some(match acc {
            None => l,
            Some(a) => direct_sum_lattice(&a, &l),
        });
    }
    acc.ok_or_else(|| Error::UnknownLattice(name.to_string()))
}

pub fn signature<T: Scalar>(l: &GramLattice<T>) -> Signature {
    let (p, n, _) = inertia(&l.gram);
    Signature::new(p, n)
}

/// `L*/L` with generators lifted to `L* ⊂ L ⊗ Q` (coordinates in the basis of `L`).
#[derive(Clone, Debug)]
pub struct DiscriminantGroup<T> {
    pub invariant_factors: Vec<T>,
    /// Generator `i` is `lift_numerators[i] / invariant_factors[i]`.
    pub lift_numerators: Vec<Vec<T>>,
}

impl<T: Scalar> DiscriminantGroup<T> {
    pub fn orders(&self) -> Vec<u64> {
        self.invariant_factors.iter().map(|d| d.to_u64().expect("discriminant order fits in u64")).collect()
    }

    pub fn order(&self) -> u64 {
        self.orders().iter().product()
    }

    pub fn lift(&self, i: usize) -> Vec<Ratio<T>> {
        self.lift_numerators[i]
            .iter()
            .map(|v| Ratio::new(v.clone(), self.invariant_factors[i].clone()))
            .collect()
    }
}

pub fn discriminant_group<T: Scalar>(l: &GramLattice<T>) -> DiscriminantGroup<T> {
    let s = smith(&l.gram);
    let mut invariant_factors = Vec::new();
    let mut lift_numerators = Vec::new();
    for (i, d) in s.invariant_factors.iter().enumerate() {
        if !d.is_one() {
            invariant_factors.push(d.clone());
            lift_numerators.push(s.right.col(i));
        }
    }
    DiscriminantGroup { invariant_factors, lift_numerators }
}

fn bilinear<T: Scalar>(g: &Matrix<T>, x: &[Ratio<T>], y: &[Ratio<T>]) -> Ratio<T> {
    let n = g.nrows();
    let mut s = Ratio::zero();
    for i in 0..n {
        if x[i].is_zero() {
            continue;
        }
        for j in 0..n {
            if !y[j].is_zero() && !g[(i, j)].is_zero() {
                s = s + x[i].clone() * y[j].clone() * Ratio::from_integer(g[(i, j)].clone());
            }
        }
    }
    s
}

fn to_small<T: Scalar>(r: &Ratio<T>, modulus: i64) -> Q {
    let m = Ratio::from_integer(T::from_i64_exact(modulus));
    let reduced = r.clone() - (r.clone() / m.clone()).floor() * m;
    Q::new(
        reduced.numer().to_i64().expect("reduced residue fits i64"),
        reduced.denom().to_i64().expect("denominator fits i64"),
    )
}

pub fn discriminant_form<T: Scalar>(l: &GramLattice<T>) -> Result<FiniteQuadraticForm> {
    if !l.is_even() {
        return Err(Error::InvalidSymbol("discriminant form requires an even lattice".into()));
    }
    let dg = discriminant_group(l);
    let lifts: Vec<Vec<Ratio<T>>> = (0..dg.invariant_factors.len()).map(|i| dg.lift(i)).collect();
    let q: Vec<Q> = lifts.iter().map(|x| to_small(&bilinear(&l.gram, x, x), 2)).collect();
    let b: Vec<Vec<Q>> = lifts
        .iter()
        .map(|x| lifts.iter().map(|y| to_small(&bilinear(&l.gram, x, y), 1)).collect())
        .collect();
    FiniteQuadraticForm::from_parts(dg.orders(), q, b)
}

/// Sublattice of `ambient` spanned by the rows of `basis` (ambient coordinates).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbientSublattice<T> {
    pub ambient: GramLattice<T>,
    pub basis: Matrix<T>,
}

impl<T: Scalar> AmbientSublattice<T> {
    pub fn new(ambient: GramLattice<T>, basis: Matrix<T>) -> Result<Self> {
        if basis.ncols() != ambient.rank() {
            return Err(Error::InvalidConfiguration("basis vectors have wrong length".into()));
        }
        if basis.nrows() > 0 && basis.rank() != basis.nrows() {
            return Err(Error::Degenerate);
        }
        Ok(AmbientSublattice { ambient, basis })
    }

    /// Sublattice spanned by arbitrary (possibly dependent) vectors.
    pub fn spanned_by(ambient: GramLattice<T>, vectors: &Matrix<T>) -> Result<Self> {
        let b = row_span_basis(vectors);
        Self::new(ambient, b)
    }

    pub fn rank(&self) -> usize {
        self.basis.nrows()
    }

    pub fn gram(&self) -> Matrix<T> {
        self.basis.mul(self.ambient.gram()).mul(&self.basis.transpose())
    }

    pub fn lattice(&self) -> Result<GramLattice<T>> {
        GramLattice::new(self.gram())
    }

    /// Elementary divisors of the basis coordinate matrix.
    pub fn elementary_divisors(&self) -> Vec<T> {
        smith(&self.basis).invariant_factors
    }

    pub fn is_primitive(&self) -> bool {
        self.elementary_divisors().iter().all(|d| d.is_one())
    }

    pub fn index_in_saturation(&self) -> T {
        self.elementary_divisors().into_iter().fold(T::one(), |a, b| a * b)
    }

    /// Integer coordinates of `v` in this basis, if `v` lies in the sublattice.
    pub fn coordinates_of(&self, v: &[T]) -> Option<Vec<T>> {
        let k = self.rank();
        if k == 0 {
            return if v.iter().all(|x| x.is_zero()) { Some(Vec::new()) } else { None };
        }
        // solve c * basis = v through a column Hermite form of basis^T
        let mut rows = self.basis.to_rows();
        rows.push(v.iter().map(|x| -x.clone()).collect());
        let m = Matrix::from_rows(rows).transpose();
        let ch = crate::matrix::column_hnf(&m);
        for j in ch.rank..=k {
            let col = ch.transform.col(j);
            if col[k].abs().is_one() {
                let s = col[k].clone();
                return Some(col[..k].iter().map(|c| c.clone() * s.clone()).collect());
            }
        }
        None
    }

    pub fn contains_sublattice(&self, other: &AmbientSublattice<T>) -> bool {
        (0..other.rank()).all(|i| self.coordinates_of(&other.basis.row(i)).is_some())
    }
}

pub fn saturation<T: Scalar>(s: &AmbientSublattice<T>) -> AmbientSublattice<T> {
    let k = s.rank();
    let sm = smith(&s.basis);
    let vinv = sm.right.inverse_unimodular().expect("unimodular");
    let rows: Vec<usize> = (0..k).collect();
    let cols: Vec<usize> = (0..s.basis.ncols()).collect();
    let sat = row_span_basis(&vinv.select(&rows, &cols));
    AmbientSublattice { ambient: s.ambient.clone(), basis: sat }
}

/// `L` together with every even overlattice, one per isotropic subgroup of `q_L`.
pub fn overlattices<T: Scalar>(l: &GramLattice<T>) -> Result<Vec<GramLattice<T>>> {
    let q = discriminant_form(l)?;
    let dg = discriminant_group(l);
    // discriminant_form normalizes only when needed; recompute lifts for its basis
    let lifts: Vec<Vec<Ratio<T>>> = (0..dg.invariant_factors.len()).map(|i| dg.lift(i)).collect();
    if q.orders() != dg.orders().as_slice() {
        return Err(Error::InvalidSymbol("discriminant basis mismatch".into()));
    }
    let n = l.rank();
    let mut out = Vec::new();
    for h in isotropic_subgroups(&q) {
        if h.generators.is_empty() {
            out.push(l.clone());
            continue;
        }
        let mut vecs: Vec<Vec<Ratio<T>>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Ratio::one() } else { Ratio::zero() }).collect())
            .collect();
        for g in &h.generators {
            let mut v = vec![Ratio::<T>::zero(); n];
            for (c, lift) in g.iter().zip(&lifts) {
                for j in 0..n {
                    v[j] = v[j].clone() + lift[j].clone() * Ratio::from_integer(T::from_i64_exact(*c));
                }
            }
            vecs.push(v);
        }
        let den = vecs.iter().flatten().fold(T::one(), |acc, x| num_integer::Integer::lcm(&acc, x.denom()));
        let int_rows: Vec<Vec<T>> = vecs
            .iter()
            .map(|r| r.iter().map(|x| (x.clone() * Ratio::from_integer(den.clone())).to_integer()).collect())
            .collect();
        let basis = row_span_basis(&Matrix::from_rows(int_rows));
        let g = basis.mul(&l.gram).mul(&basis.transpose());
        let d2 = den.clone() * den;
        let mut gram = Matrix::<T>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if !g[(i, j)].is_multiple_of(&d2) {
                    return Err(Error::InvalidSymbol("overlattice Gram not integral".into()));
                }
                gram[(i, j)] = g[(i, j)].clone() / d2.clone();
            }
        }
        let ol = GramLattice::new(gram)?;
        if !ol.is_even() {
            return Err(Error::InvalidSymbol("isotropic subgroup produced an odd overlattice".into()));
        }
        out.push(ol);
    }
    Ok(out)
}

/// Rank complement to 20 and `q_M ≅ -q_N`.
pub fn mirror_check(rank_m: usize, q_m: &FiniteQuadraticForm, rank_n: usize, q_n: &FiniteQuadraticForm) -> bool {
    rank_m + rank_n == 20 && is_isomorphic(q_m, &negate(q_n))
}

/// Sufficient criterion for existence and uniqueness of an even lattice with
/// the given signature and form.
pub fn nikulin_unique(sig: Signature, q: &FiniteQuadraticForm) -> bool {
    if sig.positive < 1 || sig.negative < 1 {
        return false;
    }
    match gauss_signature(q) {
        Ok(s) if s == sig.mod8() => sig.rank() >= 2 + q.length(),
        _ => false,
    }
}
