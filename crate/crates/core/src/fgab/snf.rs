//! Smith normal form with unimodular transforms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::IntMatrix;

/// `left * input * right == diagonal`, with `left` and `right` unimodular and the
/// diagonal entries non-negative and forming a divisibility chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SnfDecomposition {
    pub left: IntMatrix,
    pub diagonal: IntMatrix,
    pub right: IntMatrix,
}

impl SnfDecomposition {
    /// Diagonal entries `S[i][i]` for `i < min(rows, cols)`, zeros included.
    pub fn diagonal_entries(&self) -> Vec<BigInt> {
        let k = self.diagonal.rows().min(self.diagonal.cols());
        (0..k).map(|i| self.diagonal[(i, i)].clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal_entries()
            .iter()
            .filter(|d| !d.is_zero())
            .count()
    }
}

fn min_abs_nonzero(s: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..s.rows() {
        for j in t..s.cols() {
            let e = &s[(i, j)];
            if e.is_zero() {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => e.abs() < s[b].abs(),
            };
            if better {
                best = Some((i, j));
            }
        }
    }
    best
}

/// Smith normal form of an arbitrary rectangular integer matrix.
///
/// Pivots are always the smallest nonzero entry (in absolute value) of the active
/// block, which keeps intermediate growth small.
pub fn smith_normal_form(a: &IntMatrix) -> SnfDecomposition {
    let (rows, cols) = (a.rows(), a.cols());
    let mut s = a.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    let mut t = 0;
    while t < rows.min(cols) {
        let Some((pi, pj)) = min_abs_nonzero(&s, t) else {
            break;
        };
        s.swap_rows(t, pi);
        u.swap_rows(t, pi);
        s.swap_cols(t, pj);
        v.swap_cols(t, pj);

        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if s[(i, t)].is_zero() {
                    continue;
                }
                let q = -s[(i, t)].div_floor(&s[(t, t)]);
                s.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                if !s[(i, t)].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if s[(t, j)].is_zero() {
                    continue;
                }
                let q = -s[(t, j)].div_floor(&s[(t, t)]);
                s.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                if !s[(t, j)].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                // a remainder smaller than the pivot survived; promote the smallest one
                let mut best = (t, t);
                for i in t + 1..rows {
                    if !s[(i, t)].is_zero() && s[(i, t)].abs() < s[best].abs() {
                        best = (i, t);
                    }
                }
                for j in t + 1..cols {
                    if !s[(t, j)].is_zero() && s[(t, j)].abs() < s[best].abs() {
                        best = (t, j);
                    }
                }
                s.swap_rows(t, best.0);
                u.swap_rows(t, best.0);
                s.swap_cols(t, best.1);
                v.swap_cols(t, best.1);
                continue;
            }
            // row t and column t are clear; enforce divisibility of the remaining block
            let pivot = s[(t, t)].clone();
            let offender = (t + 1..rows).find(|&i| {
                (t + 1..cols).any(|j| !s[(i, j)].is_multiple_of(&pivot))
            });
            match offender {
                Some(i) => {
                    let one = BigInt::from(1);
                    s.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if s[(t, t)].is_negative() {
            s.negate_row(t);
            u.negate_row(t);
        }
        t += 1;
    }

    SnfDecomposition {
        left: u,
        diagonal: s,
        right: v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn check(a: &IntMatrix) -> SnfDecomposition {
        let snf = smith_normal_form(a);
        assert_eq!(&(&snf.left * a) * &snf.right, snf.diagonal);
        let du = snf.left.det().unwrap();
        let dv = snf.right.det().unwrap();
        assert!(du.abs().is_one() && dv.abs().is_one());
        let d = &snf.diagonal;
        for i in 0..d.rows() {
            for j in 0..d.cols() {
                if i != j {
                    assert!(d[(i, j)].is_zero());
                }
            }
        }
        let diag = snf.diagonal_entries();
        for w in diag.windows(2) {
            assert!(!w[0].is_negative());
            if w[0].is_zero() {
                assert!(w[1].is_zero());
            } else {
                assert!(w[1].is_multiple_of(&w[0]));
            }
        }
        snf
    }

    #[test]
    fn two_by_two_example() {
        let snf = check(&IntMatrix::from_rows(&[[2, 4], [6, 8]]));
        assert_eq!(snf.diagonal_entries(), vec![BigInt::from(2), BigInt::from(4)]);
    }

    #[test]
    fn identity_and_zero() {
        let snf = check(&IntMatrix::identity(3));
        assert!(snf.diagonal.is_identity());
        let snf = check(&IntMatrix::zeros(2, 3));
        assert!(snf.diagonal.is_zero());
        assert_eq!(snf.rank(), 0);
    }

    #[test]
    fn empty_matrices() {
        for (r, c) in [(0, 0), (0, 3), (2, 0)] {
            let snf = check(&IntMatrix::zeros(r, c));
            assert_eq!(snf.diagonal.rows(), r);
            assert_eq!(snf.diagonal.cols(), c);
        }
    }

    #[test]
    fn needs_divisibility_fix() {
        // diag(2, 3) is diagonal but not in Smith form: expect diag(1, 6)
        let snf = check(&IntMatrix::from_rows(&[[2, 0], [0, 3]]));
        assert_eq!(snf.diagonal_entries(), vec![BigInt::from(1), BigInt::from(6)]);
    }

    #[test]
    fn negative_and_rectangular() {
        check(&IntMatrix::from_rows(&[[-4, 6, 10], [8, -2, 0]]));
        check(&IntMatrix::from_rows(&[[0, -3], [0, 0], [-6, 9], [12, 1]]));
    }
}
