//! Smith form invariants on random small matrices, checked against a
//! cofactor-expansion oracle that shares no code with the library.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

use powk0::linalg::{determinant, minor_gcd, smith_normal_form, IntMatrix};

/// Laplace expansion along the first row.
fn cofactor_det(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    if n == 1 {
        return m[0][0] as i128;
    }
    let mut acc = 0i128;
    for j in 0..n {
        if m[0][j] == 0 {
            continue;
        }
        let sub: Vec<Vec<i64>> =
            m[1..].iter().map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect()).collect();
        let term = m[0][j] as i128 * cofactor_det(&sub);
        acc += if j % 2 == 0 { term } else { -term };
    }
    acc
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut with_last: Vec<Vec<usize>> = subsets(n - 1, k - 1);
    for s in &mut with_last {
        s.push(n - 1);
    }
    let mut out = subsets(n - 1, k);
    out.extend(with_last);
    out
}

fn oracle_minor_gcd(m: &[Vec<i64>], k: usize) -> BigInt {
    let cols = m.first().map_or(0, Vec::len);
    let mut g = 0i128;
    for rs in subsets(m.len(), k) {
        for cs in subsets(cols, k) {
            let sub: Vec<Vec<i64>> = rs.iter().map(|&r| cs.iter().map(|&c| m[r][c]).collect()).collect();
            g = g.gcd(&cofactor_det(&sub));
        }
    }
    BigInt::from(g)
}

fn to_matrix(rows: &[Vec<i64>], cols: usize) -> IntMatrix {
    IntMatrix::new(rows.len(), cols, rows.iter().flatten().map(|&x| BigInt::from(x)).collect()).unwrap()
}

fn matrix(max_dim: usize) -> impl Strategy<Value = (Vec<Vec<i64>>, usize)> {
    (0..=max_dim, 0..=max_dim)
        .prop_flat_map(|(r, c)| (prop::collection::vec(prop::collection::vec(-3i64..=3, c), r), Just(c)))
}

fn square(max_dim: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1..=max_dim).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(-3i64..=3, n), n))
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn diagonal_is_a_divisibility_chain((rows, cols) in matrix(8)) {
        let m = to_matrix(&rows, cols);
        let r = smith_normal_form(&m, false);
        prop_assert_eq!(r.diag.len(), rows.len().min(cols));
        prop_assert!(r.diag.iter().all(|s| !s.is_negative()));
        let nonzero = r.diag.iter().take_while(|s| !s.is_zero()).count();
        prop_assert_eq!(nonzero, r.rank);
        prop_assert!(r.diag[nonzero..].iter().all(Zero::is_zero));
        for w in r.diag[..nonzero].windows(2) {
            prop_assert!((&w[1] % &w[0]).is_zero(), "{} does not divide {}", w[0], w[1]);
        }
    }

    #[test]
    fn transforms_are_unimodular_and_reconstruct((rows, cols) in matrix(8)) {
        let m = to_matrix(&rows, cols);
        let r = smith_normal_form(&m, true);
        let (u, v) = r.transforms.clone().unwrap();
        prop_assert_eq!(u.mul(&m).unwrap().mul(&v).unwrap(), r.diagonal_matrix(m.rows(), m.cols()));
        prop_assert_eq!(determinant(&u).unwrap().abs(), BigInt::from(1));
        prop_assert_eq!(determinant(&v).unwrap().abs(), BigInt::from(1));
    }

    #[test]
    fn permutations_do_not_change_the_diagonal(
        (rows, cols, p, q) in matrix(8).prop_flat_map(|(rows, cols)| {
            let n = rows.len();
            (Just(rows), Just(cols), permutation(n), permutation(cols))
        })
    ) {
        let m = to_matrix(&rows, cols);
        let pm = IntMatrix::permutation(&p).mul(&m).unwrap().mul(&IntMatrix::permutation(&q)).unwrap();
        prop_assert_eq!(smith_normal_form(&pm, false).diag, smith_normal_form(&m, false).diag);
    }

    #[test]
    fn prefix_products_are_minor_gcds((rows, cols) in matrix(6)) {
        let m = to_matrix(&rows, cols);
        let r = smith_normal_form(&m, false);
        let mut prefix = BigInt::from(1);
        for k in 1..=rows.len().min(cols) {
            prefix *= &r.diag[k - 1];
            let oracle = oracle_minor_gcd(&rows, k);
            prop_assert_eq!(&prefix, &oracle, "k = {}", k);
            prop_assert_eq!(minor_gcd(&m, k, 1_000_000).unwrap(), oracle);
        }
    }

    #[test]
    fn determinant_is_signed_product_of_diagonal(rows in square(6)) {
        let n = rows.len();
        let m = to_matrix(&rows, n);
        let det = determinant(&m).unwrap();
        prop_assert_eq!(&det, &BigInt::from(cofactor_det(&rows)));
        let product: BigInt = smith_normal_form(&m, false).diag.iter().product();
        prop_assert_eq!(det.abs(), product);
    }
}

#[test]
fn cofactor_oracle_sanity() {
    assert_eq!(cofactor_det(&[vec![1, 2], vec![3, 4]]), -2);
    assert_eq!(cofactor_det(&[vec![2, 0, 1], vec![1, 3, 2], vec![1, 1, 2]]), 6);
    assert_eq!(subsets(4, 2).len(), 6);
    assert_eq!(oracle_minor_gcd(&[vec![2, 4], vec![6, 8]], 1), BigInt::from(2));
}

#[test]
fn worked_examples() {
    let m5 = powk0::forms::build_m(5, 1).unwrap();
    let d: Vec<BigInt> = smith_normal_form(&m5, false).diag;
    assert_eq!(d, [1, 2, 2, 4].map(BigInt::from));

    let a = powk0::forms::a_block(4, 2, 3).unwrap();
    let rows: Vec<Vec<i64>> =
        a.to_rows().iter().map(|r| r.iter().map(|x| i64::try_from(x).unwrap()).collect()).collect();
    assert_eq!(determinant(&a).unwrap(), BigInt::from(cofactor_det(&rows)));
    assert_eq!(determinant(&powk0::forms::b_block(4).unwrap()).unwrap(), BigInt::from(-16));
}
