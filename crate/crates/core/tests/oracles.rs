mod common;

use std::collections::BTreeSet;

use k3mirror::invertible_poly::{parse_polynomial, transpose, weight_system};
use k3mirror::lattice::{direct_sum_lattice, discriminant_form, named_lattice};
use k3mirror::quadform::{gauss_signature, parse_form_expression, Q};
use k3mirror::symmetry_groups::{
    dual_group, enumerate_intermediate, j_group, max_group, sl_subgroup, subgroup_generated, DiagonalSymmetry,
};
use k3mirror::verify::Dataset;
use k3mirror::Lattice;

use common::*;

fn table_polynomials() -> BTreeSet<String> {
    let ds = Dataset::load(&data_dir()).unwrap();
    let mut out = BTreeSet::new();
    for n in [4, 8, 12] {
        for l in ds.table(n).unwrap().lines.values() {
            out.insert(l.polynomial.clone());
        }
    }
    out
}

#[test]
fn weights_match_cramer_on_every_table_polynomial() {
    for s in table_polynomials() {
        let a = parse_polynomial(&s).unwrap().exponent_matrix();
        let w = weight_system(&a).unwrap();
        let (q, d) = weights_by_cramer(a.rows());
        assert_eq!((w.weights.clone(), w.degree), (q, d), "{s}");
    }
}

#[test]
fn gmax_has_det_many_solutions() {
    for s in table_polynomials() {
        let a = parse_polynomial(&s).unwrap().exponent_matrix();
        let g = max_group(&a);
        let rows: Vec<Vec<i64>> = a.rows().iter().map(|r| r.iter().map(|&x| x as i64).collect()).collect();
        assert_eq!(g.order() as i64, det(&rows).abs(), "{s}");
        let mut seen = BTreeSet::new();
        for x in g.elements() {
            // A x has integer entries
            for r in a.rows() {
                let v = x.entries.iter().zip(r).fold(Q::from_integer(0), |acc, (e, &k)| {
                    acc + e.to_ratio() * k as i64
                });
                assert!(v.is_integer(), "{s}: {x}");
            }
            assert!(seen.insert(x.to_string()));
        }
    }
}

/// `h A x^T` with `h` acting on the transposed polynomial.
fn bhk_pairing(h: &DiagonalSymmetry, a: &[Vec<u32>], x: &DiagonalSymmetry) -> Q {
    let mut s = Q::from_integer(0);
    for (i, row) in a.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            s += h.entries[i].to_ratio() * Q::from_integer(e as i64) * x.entries[j].to_ratio();
        }
    }
    s
}

#[test]
fn dual_groups_match_direct_filtering() {
    for s in ["x^4+y^4+z^4+w^4", "x^2z+y^4+z^4+w^8", "x^4+y^3z+z^3w+yw^3", "x^2+y^3+xz^6+w^12", "x^2+y^4+z^8+w^8"] {
        let p = parse_polynomial(s).unwrap();
        let a = p.exponent_matrix();
        let at = transpose(&p).exponent_matrix();
        let gmax = max_group(&a);
        let j = subgroup_generated(&gmax, j_group(&weight_system(&a).unwrap()).generators()).unwrap();
        let sl = sl_subgroup(&gmax);
        let gmax_t = max_group(&at);
        for g in enumerate_intermediate(&j, &sl).unwrap() {
            let want: BTreeSet<DiagonalSymmetry> = gmax_t
                .elements()
                .filter(|h| g.elements().all(|x| bhk_pairing(h, a.rows(), x).is_integer()))
                .cloned()
                .collect();
            let got: BTreeSet<DiagonalSymmetry> = dual_group(&g, &a).unwrap().elements().cloned().collect();
            assert_eq!(got, want, "{s}");
        }
    }
}

#[test]
fn intermediate_groups_are_all_subgroups_of_the_quotient() {
    // SL/J for the Fermat quartic is Z/4 x Z/4, which has 15 subgroups
    let a = parse_polynomial("x^4+y^4+z^4+w^4").unwrap().exponent_matrix();
    let gmax = max_group(&a);
    let j = subgroup_generated(&gmax, j_group(&weight_system(&a).unwrap()).generators()).unwrap();
    let all = enumerate_intermediate(&j, &sl_subgroup(&gmax)).unwrap();
    assert_eq!(all.len(), 15);
    let distinct: BTreeSet<Vec<String>> =
        all.iter().map(|g| g.elements().map(|x| x.to_string()).collect()).collect();
    assert_eq!(distinct.len(), 15);
}

fn gram_i64(l: &Lattice) -> Vec<Vec<i64>> {
    l.gram().to_rows().iter().map(|r| r.iter().map(|x| i64::try_from(x).unwrap()).collect()).collect()
}

#[test]
fn discriminant_forms_match_coset_enumeration() {
    let names = ["A_1", "A_2", "A_3", "A_4", "D_4", "D_5", "E_6", "E_7", "<4>+A_3", "U(2)", "<8>", "<-12>", "A_1+A_1+A_2", "U(3)"];
    for name in names {
        let l: Lattice = named_lattice(name).unwrap();
        let f = discriminant_form(&l).unwrap();
        assert_eq!(form_q_values(&f), discriminant_q_values(&gram_i64(&l)), "{name}");
    }
}

#[test]
fn gauss_signature_matches_floating_sum() {
    for (expr, f) in forms_up_to(64) {
        assert_eq!(Some(gauss_signature(&f).unwrap()), gauss_signature_float(&f), "{expr}");
    }
}

#[test]
fn gauss_signature_of_lattices_is_the_signature() {
    for name in ["A_1+A_2", "D_6+<4>", "T_{4,4,4}", "U+D_5+D_9", "E_6+A_2", "U(2)+A_3"] {
        let l: Lattice = named_lattice(name).unwrap();
        let s = k3mirror::lattice::signature(&l);
        assert_eq!(gauss_signature(&discriminant_form(&l).unwrap()).unwrap(), s.mod8(), "{name}");
    }
}

#[test]
fn homomorphism_oracle_sanity() {
    let f = |s: &str| parse_form_expression(s).unwrap();
    assert!(isomorphic_by_homomorphisms(&f("u+u"), &f("v+v")));
    assert!(!isomorphic_by_homomorphisms(&f("u"), &f("v")));
    let a: Lattice = named_lattice("<4>+A_3").unwrap();
    let b: Lattice = direct_sum_lattice(&named_lattice("<4>").unwrap(), &named_lattice("A_3").unwrap());
    assert!(isomorphic_by_homomorphisms(&discriminant_form(&a).unwrap(), &discriminant_form(&b).unwrap()));
}
