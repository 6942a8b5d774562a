//! Row Hermite normal form and lattice membership.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::IntMatrix;

/// Row-style Hermite normal form of the lattice spanned by the rows of `a`.
///
/// The result has no zero rows; pivots are positive, strictly move right, and the
/// entries above each pivot lie in `[0, pivot)`. Two generator sets span the same
/// lattice exactly when their forms are equal.
pub fn hermite_normal_form(a: &IntMatrix) -> IntMatrix {
    let mut h = a.clone();
    let (rows, cols) = (h.rows(), h.cols());
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..cols {
        if r == rows {
            break;
        }
        loop {
            let best = (r..rows)
                .filter(|&i| !h[(i, c)].is_zero())
                .min_by(|&x, &y| h[(x, c)].abs().cmp(&h[(y, c)].abs()));
            let Some(p) = best else { break };
            h.swap_rows(r, p);
            let mut done = true;
            for i in r + 1..rows {
                if h[(i, c)].is_zero() {
                    continue;
                }
                let q = -h[(i, c)].div_floor(&h[(r, c)]);
                h.add_row_multiple(i, r, &q);
                if !h[(i, c)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[(r, c)].is_zero() {
            continue;
        }
        if h[(r, c)].is_negative() {
            h.negate_row(r);
        }
        for i in 0..r {
            let q = -h[(i, c)].div_floor(&h[(r, c)]);
            h.add_row_multiple(i, r, &q);
        }
        pivots.push(c);
        r += 1;
    }
    let entries: Vec<BigInt> = h.entries()[..r * cols].to_vec();
    IntMatrix::from_vec(r, cols, entries).expect("shape is consistent")
}

/// Whether `v` lies in the lattice spanned by the rows of a Hermite normal form.
pub fn lattice_contains(hnf: &IntMatrix, v: &[BigInt]) -> bool {
    assert_eq!(hnf.cols(), v.len(), "vector length must match lattice ambient rank");
    let mut rest = v.to_vec();
    for i in 0..hnf.rows() {
        let Some(c) = (0..hnf.cols()).find(|&j| !hnf[(i, j)].is_zero()) else {
            continue;
        };
        if rest[..c].iter().any(|x| !x.is_zero()) {
            return false;
        }
        let (q, rem) = rest[c].div_rem(&hnf[(i, c)]);
        if !rem.is_zero() {
            return false;
        }
        for (j, x) in rest.iter_mut().enumerate().skip(c) {
            *x -= &q * &hnf[(i, j)];
        }
    }
    rest.iter().all(Zero::is_zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn reduces_to_canonical_form() {
        let a = IntMatrix::from_rows(&[[2, 4, 4], [-6, 6, 12], [10, -4, -16]]);
        let h = hermite_normal_form(&a);
        let b = IntMatrix::from_rows(&[[10, -4, -16], [2, 4, 4], [-6, 6, 12], [4, 8, 8]]);
        assert_eq!(hermite_normal_form(&b), h);
        for i in 0..h.rows() {
            let c = (0..h.cols()).find(|&j| !h[(i, j)].is_zero()).unwrap();
            assert!(h[(i, c)].is_positive());
            for k in 0..i {
                assert!(!h[(k, c)].is_negative() && h[(k, c)] < h[(i, c)]);
            }
        }
    }

    #[test]
    fn membership() {
        let h = hermite_normal_form(&IntMatrix::from_rows(&[[2, 0], [1, 3]]));
        assert!(lattice_contains(&h, &big(&[3, 3])));
        assert!(lattice_contains(&h, &big(&[0, 6])));
        assert!(!lattice_contains(&h, &big(&[0, 3])));
        assert!(!lattice_contains(&h, &big(&[1, 0])));
        let empty = hermite_normal_form(&IntMatrix::zeros(2, 2));
        assert_eq!(empty.rows(), 0);
        assert!(lattice_contains(&empty, &big(&[0, 0])));
        assert!(!lattice_contains(&empty, &big(&[0, 1])));
    }
}
