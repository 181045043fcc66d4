//! Independent oracles shared by the integration tests and the acceptance run.
//! Nothing here calls the library's linear algebra or search routines.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;

use k3mirror::quadform::{parse_form_expression, FiniteQuadraticForm, Q};

pub fn data_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data"))
}

/// Named lattice, signature, discriminant form.
pub const NAMED_LATTICES: [(&str, (usize, usize), &str); 17] = [
    ("U", (1, 1), "trivial"),
    ("U(2)", (1, 1), "u"),
    ("A_1", (0, 1), "w_{2,1}^-1"),
    ("A_2", (0, 2), "w_{3,1}^1"),
    ("A_3", (0, 3), "w_{2,2}^5"),
    ("D_4", (0, 4), "v"),
    ("D_5", (0, 5), "w_{2,2}^-5"),
    ("D_6", (0, 6), "(w_{2,1}^1)^2"),
    ("D_9", (0, 9), "w_{2,2}^-1"),
    ("E_6", (0, 6), "w_{3,1}^-1"),
    ("E_7", (0, 7), "w_{2,1}^1"),
    ("E_8", (0, 8), "trivial"),
    ("T_{4,4,4}", (1, 9), "v_2"),
    ("<4>", (1, 0), "w_{2,2}^1"),
    ("<-4>", (0, 1), "w_{2,2}^-1"),
    ("<8>", (1, 0), "w_{2,3}^1"),
    ("<-8>", (0, 1), "w_{2,3}^-1"),
];

// ---------------------------------------------------------------------------
// integer matrices by cofactor expansion

pub fn det(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    match n {
        0 => 1,
        1 => m[0][0],
        _ => (0..n)
            .map(|j| {
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[0][j] * det(&minor(m, 0, j))
            })
            .sum(),
    }
}

fn minor(m: &[Vec<i64>], r: usize, c: usize) -> Vec<Vec<i64>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != r)
        .map(|(_, row)| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, x)| *x).collect())
        .collect()
}

pub fn adjugate(m: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = m.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                    sign * det(&minor(m, j, i))
                })
                .collect()
        })
        .collect()
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Weights by Cramer's rule on `A q = d 1`, reduced to coprime integers.
pub fn weights_by_cramer(a: &[Vec<u32>]) -> (Vec<i64>, i64) {
    let m: Vec<Vec<i64>> = a.iter().map(|r| r.iter().map(|&x| x as i64).collect()).collect();
    let d = det(&m);
    let n = m.len();
    let mut q: Vec<i64> = (0..n)
        .map(|i| {
            let mut mi = m.clone();
            for row in mi.iter_mut() {
                row[i] = 1;
            }
            det(&mi)
        })
        .collect();
    let mut deg = d;
    if deg < 0 {
        deg = -deg;
        q.iter_mut().for_each(|x| *x = -*x);
    }
    let g = q.iter().fold(deg, |acc, &x| gcd(acc, x));
    (q.iter().map(|x| x / g).collect(), deg / g)
}

/// gcd of the maximal minors of a full-rank row set.
pub fn maximal_minor_gcd(rows: &[Vec<i64>]) -> i64 {
    let k = rows.len();
    let n = rows[0].len();
    let mut g = 0i64;
    let mut cols: Vec<usize> = (0..k).collect();
    loop {
        let m: Vec<Vec<i64>> = rows.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect();
        let d = det(&m).abs();
        g = gcd(g, d);
        // next k-subset of 0..n
        let mut i = k;
        while i > 0 && cols[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return g;
        }
        cols[i - 1] += 1;
        for t in i..k {
            cols[t] = cols[t - 1] + 1;
        }
    }
}

// ---------------------------------------------------------------------------
// discriminant forms by coset enumeration

fn mod2(x: Q) -> Q {
    let two = Q::from_integer(2);
    x - (x / two).floor() * two
}

/// Sorted q-values of `L*/L`, listing the classes `adj(G) y / det` for `y` in a box.
pub fn discriminant_q_values(gram: &[Vec<i64>]) -> Vec<Q> {
    let n = gram.len();
    let d = det(gram).abs();
    let adj = adjugate(gram);
    let sgn = det(gram).signum();
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut values = Vec::new();
    let total = (d as usize).pow(n as u32);
    for idx in 0..total {
        let mut y = vec![0i64; n];
        let mut t = idx;
        for v in y.iter_mut() {
            *v = (t % d as usize) as i64;
            t /= d as usize;
        }
        // x = G^{-1} y = sgn * adj y / d, kept as integer numerators mod d
        let z: Vec<i64> = (0..n)
            .map(|i| (sgn * (0..n).map(|j| adj[i][j] * y[j]).sum::<i64>()).rem_euclid(d))
            .collect();
        if !seen.insert(z.clone()) {
            continue;
        }
        let num: i64 = (0..n).map(|i| (0..n).map(|j| z[i] * gram[i][j] * z[j]).sum::<i64>()).sum();
        values.push(mod2(Q::new(num, d * d)));
    }
    assert_eq!(values.len() as i64, d, "coset count equals |det|");
    values.sort();
    values
}

pub fn form_q_values(f: &FiniteQuadraticForm) -> Vec<Q> {
    let mut v: Vec<Q> = f.element_coords().iter().map(|x| mod2(f.q_coords(x))).collect();
    v.sort();
    v
}

// ---------------------------------------------------------------------------
// Gauss sums in floating point

/// `s` with `sum exp(pi i q(a)) = sqrt|A| exp(2 pi i s / 8)`, or `None` if the
/// modulus is off (degenerate form).
pub fn gauss_signature_float(f: &FiniteQuadraticForm) -> Option<u8> {
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for x in f.element_coords() {
        let q = f.q_coords(&x);
        let t = std::f64::consts::PI * (*q.numer() as f64) / (*q.denom() as f64);
        re += t.cos();
        im += t.sin();
    }
    let modulus = (re * re + im * im).sqrt();
    if (modulus - (f.order() as f64).sqrt()).abs() > 1e-6 {
        return None;
    }
    let eighths = im.atan2(re) / (std::f64::consts::PI / 4.0);
    let s = eighths.round();
    assert!((eighths - s).abs() < 1e-6, "Gauss sum angle is a multiple of pi/4");
    Some((s as i64).rem_euclid(8) as u8)
}

// ---------------------------------------------------------------------------
// isomorphism by enumerating homomorphisms

fn reduce(x: &[i64], orders: &[u64]) -> Vec<i64> {
    x.iter().zip(orders).map(|(v, &o)| v.rem_euclid(o as i64)).collect()
}

/// Enumerates every assignment of generator images that respects element
/// orders, then keeps those that are bijective and preserve `q` everywhere.
pub fn isomorphic_by_homomorphisms(a: &FiniteQuadraticForm, b: &FiniteQuadraticForm) -> bool {
    if a.order() != b.order() {
        return false;
    }
    let oa = a.orders().to_vec();
    let ob = b.orders().to_vec();
    let k = oa.len();
    let elems_a = a.element_coords();
    let elems_b = b.element_coords();
    let unit = |i: usize| -> Vec<i64> { (0..k).map(|j| i64::from(i == j)).collect() };
    let candidates: Vec<Vec<Vec<i64>>> = (0..k)
        .map(|i| {
            elems_b
                .iter()
                .filter(|y| y.iter().zip(&ob).all(|(v, &o)| (v * oa[i] as i64) % o as i64 == 0))
                .filter(|y| mod2(b.q_coords(y)) == mod2(a.q_coords(&unit(i))))
                .cloned()
                .collect()
        })
        .collect();
    let mut chosen: Vec<Vec<i64>> = Vec::new();
    search(a, b, &oa, &ob, &elems_a, &candidates, &mut chosen)
}

fn search(
    a: &FiniteQuadraticForm,
    b: &FiniteQuadraticForm,
    oa: &[u64],
    ob: &[u64],
    elems_a: &[Vec<i64>],
    candidates: &[Vec<Vec<i64>>],
    chosen: &mut Vec<Vec<i64>>,
) -> bool {
    let k = oa.len();
    if chosen.len() == k {
        let mut images = HashSet::new();
        for x in elems_a {
            let mut img = vec![0i64; ob.len()];
            for (i, c) in x.iter().enumerate() {
                for (j, v) in chosen[i].iter().enumerate() {
                    img[j] += c * v;
                }
            }
            let img = reduce(&img, ob);
            if mod2(b.q_coords(&img)) != mod2(a.q_coords(x)) {
                return false;
            }
            images.insert(img);
        }
        return images.len() == elems_a.len();
    }
    let i = chosen.len();
    let ei: Vec<i64> = (0..k).map(|j| i64::from(i == j)).collect();
    for y in &candidates[i] {
        // q is preserved only if b is preserved on generator pairs
        let b_ok = chosen.iter().enumerate().all(|(t, yt)| {
            let et: Vec<i64> = (0..k).map(|j| i64::from(t == j)).collect();
            (b.b_coords(y, yt) - a.b_coords(&ei, &et)).is_integer()
        });
        if !b_ok {
            continue;
        }
        chosen.push(y.clone());
        let found = search(a, b, oa, ob, elems_a, candidates, chosen);
        chosen.pop();
        if found {
            return true;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// form pools

/// Generator symbols with their group orders, up to `max`.
pub fn generator_symbols(max: u64) -> Vec<(String, u64)> {
    let mut out = Vec::new();
    for k in 1..=6u32 {
        let o = 2u64.pow(k);
        if o > max {
            break;
        }
        let eps: &[i64] = if k == 1 { &[1, -1] } else { &[1, -1, 5, -5] };
        for e in eps {
            out.push((format!("w_{{2,{k}}}^{e}"), o));
        }
    }
    for p in [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61] {
        let mut o = p;
        let mut k = 1;
        while o <= max {
            for e in [1, -1] {
                out.push((format!("w_{{{p},{k}}}^{e}"), o));
            }
            o *= p;
            k += 1;
        }
    }
    for k in 1..=3u32 {
        let o = 4u64.pow(k);
        if o <= max {
            out.push((format!("u_{k}"), o));
            out.push((format!("v_{k}"), o));
        }
    }
    out
}

/// Every direct sum of generator forms (as a multiset) of order at most `max`.
pub fn forms_up_to(max: u64) -> Vec<(String, FiniteQuadraticForm)> {
    let gens = generator_symbols(max);
    let mut out = Vec::new();
    let mut stack: Vec<(usize, u64, Vec<&str>)> = vec![(0, 1, Vec::new())];
    while let Some((start, order, parts)) = stack.pop() {
        if !parts.is_empty() {
            let expr = parts.join("+");
            out.push((expr.clone(), parse_form_expression(&expr).expect("pool expression parses")));
        }
        for (i, (s, o)) in gens.iter().enumerate().skip(start) {
            if order * o <= max {
                let mut p = parts.clone();
                p.push(s);
                stack.push((i, order * o, p));
            }
        }
    }
    out
}

/// Forms bucketed by their invariant factors.
pub fn by_group(forms: &[(String, FiniteQuadraticForm)]) -> BTreeMap<Vec<u64>, Vec<usize>> {
    let mut m: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
    for (i, (_, f)) in forms.iter().enumerate() {
        m.entry(f.orders().to_vec()).or_default().push(i);
    }
    m
}
