//! K-theory of crossed products `C(X) ⋊ Z` from the Pimsner–Voiculescu sequence.
//!
//! Both short exact sequences cut out of the six-term sequence end in a kernel of an
//! integer matrix, which is free, so they split and
//!
//! ```text
//! K_0 = coker(id - h*|K^0) ⊕ ker(id - h*|K^1)
//! K_1 = coker(id - h*|K^1) ⊕ ker(id - h*|K^0)
//! ```

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::fgab::{cokernel, exterior_power, kernel_rank, FgAbGroup, IntMatrix};
use crate::torus::TorusMap;

/// Tag recorded with every computed pair of groups.
pub const EXTERIOR_CONVENTION: &str =
    "K*(T^d) = exterior algebra on H^1; h* acts on degree k by the k-th exterior power of the transposed linear part";

/// Input to the six-term computation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum KDatum {
    /// Matrices of `h*` on `K^0` and `K^1`.
    Matrix {
        even_action: IntMatrix,
        odd_action: IntMatrix,
    },
    /// Kernels and cokernels of `id - h*` given directly.
    Abstract {
        ker0_rank: usize,
        coker0: FgAbGroup,
        ker1_rank: usize,
        coker1: FgAbGroup,
    },
}

impl KDatum {
    pub fn from_actions(even_action: IntMatrix, odd_action: IntMatrix) -> Result<Self> {
        if !even_action.is_square() || !odd_action.is_square() {
            return invalid("actions on K-groups must be square");
        }
        Ok(KDatum::Matrix {
            even_action,
            odd_action,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossedKGroups {
    pub k0: FgAbGroup,
    pub k1: FgAbGroup,
    pub notes: Vec<String>,
}

/// Binomial-graded sizes `(Σ_{k even} C(d,k), Σ_{k odd} C(d,k))`.
fn graded_sizes(d: usize) -> (usize, usize) {
    if d == 0 {
        (1, 0)
    } else {
        (1 << (d - 1), 1 << (d - 1))
    }
}

/// Action of a torus map on `K^*(T^d)`. Only the linear part matters: the translation
/// and any triangular perturbation are homotopic to zero.
pub fn induced_kstar_torus(map: &TorusMap) -> KDatum {
    let at = map.linear_part().transpose();
    let d = at.rows();
    let (mut even, mut odd) = (Vec::new(), Vec::new());
    for k in 0..=d {
        let block = exterior_power(&at, k).expect("square matrix, k <= d");
        if k % 2 == 0 {
            even.push(block);
        } else {
            odd.push(block);
        }
    }
    let even_action = IntMatrix::block_diagonal(&even);
    let odd_action = IntMatrix::block_diagonal(&odd);
    debug_assert_eq!(
        (even_action.rows(), odd_action.rows()),
        graded_sizes(d)
    );
    KDatum::Matrix {
        even_action,
        odd_action,
    }
}

pub fn pv_crossed_k(datum: &KDatum) -> CrossedKGroups {
    let split = "six-term sequence split: kernel terms are free".to_string();
    match datum {
        KDatum::Matrix {
            even_action,
            odd_action,
        } => {
            let e = even_action.identity_minus().expect("square");
            let o = odd_action.identity_minus().expect("square");
            CrossedKGroups {
                k0: cokernel(&e).direct_sum(&FgAbGroup::free(kernel_rank(&o))),
                k1: cokernel(&o).direct_sum(&FgAbGroup::free(kernel_rank(&e))),
                notes: vec![
                    "input: matrices of h* on K^0 and K^1".to_string(),
                    split,
                ],
            }
        }
        KDatum::Abstract {
            ker0_rank,
            coker0,
            ker1_rank,
            coker1,
        } => CrossedKGroups {
            k0: coker0.direct_sum(&FgAbGroup::free(*ker1_rank)),
            k1: coker1.direct_sum(&FgAbGroup::free(*ker0_rank)),
            notes: vec!["input: abstract kernel and cokernel data".to_string(), split],
        },
    }
}

/// K-groups of a torus map's crossed product, with the convention notes attached.
pub fn torus_crossed_k(map: &TorusMap) -> CrossedKGroups {
    let mut out = pv_crossed_k(&induced_kstar_torus(map));
    out.notes.push(EXTERIOR_CONVENTION.to_string());
    if !map.is_affine() {
        out.notes
            .push("perturbation ignored: the map is homotopic to its affine part".to_string());
    }
    out
}

/// Data for `S^1 × X_β` with the rotation by `α` times a Denjoy homeomorphism of
/// rotation number `β`: `id - g*` has kernel `Z` and cokernel `Z^2` in both degrees.
/// The parameters only enter the trace range, so they are not needed here.
pub fn putnam_product_kdata() -> KDatum {
    KDatum::Abstract {
        ker0_rank: 1,
        coker0: FgAbGroup::free(2),
        ker1_rank: 1,
        coker1: FgAbGroup::free(2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{golden_theta, IrrationalBasis};

    fn basis() -> IrrationalBasis {
        IrrationalBasis::new([("theta", golden_theta())]).unwrap()
    }

    fn group(free: usize, tors: &[i64]) -> FgAbGroup {
        FgAbGroup::from_cyclic_orders(free, tors.iter().copied())
    }

    #[test]
    fn circle_rotation() {
        let m = TorusMap::rotation(basis(), &["theta"]).unwrap();
        let KDatum::Matrix { even_action, odd_action } = induced_kstar_torus(&m) else {
            panic!()
        };
        assert!(even_action.is_identity() && even_action.rows() == 1);
        assert!(odd_action.is_identity() && odd_action.rows() == 1);
        let k = torus_crossed_k(&m);
        assert_eq!(k.k0, FgAbGroup::free(2));
        assert_eq!(k.k1, FgAbGroup::free(2));
    }

    #[test]
    fn three_torus_blocks() {
        let (m, n) = (2, 3);
        let map = TorusMap::ji_furstenberg(basis(), "theta", m, n).unwrap();
        let KDatum::Matrix { even_action, odd_action } = induced_kstar_torus(&map) else {
            panic!()
        };
        let expected_odd = IntMatrix::block_diagonal(&[
            IntMatrix::from_rows(&[[1, m, 0], [0, 1, n], [0, 0, 1]]),
            IntMatrix::identity(1),
        ]);
        assert_eq!(odd_action, expected_odd);
        let expected_even = IntMatrix::block_diagonal(&[
            IntMatrix::identity(1),
            IntMatrix::from_rows(&[[1, n, m * n], [0, 1, m], [0, 0, 1]]),
        ]);
        assert_eq!(even_action, expected_even);
    }

    #[test]
    fn three_torus_groups() {
        let map = TorusMap::ji_furstenberg(basis(), "theta", 2, 3).unwrap();
        let k = torus_crossed_k(&map);
        assert_eq!(k.k0, group(4, &[2, 3]));
        assert_eq!(k.k1, group(4, &[2, 3]));
    }

    #[test]
    fn point_and_identity_actions() {
        let point = KDatum::from_actions(IntMatrix::identity(1), IntMatrix::zeros(0, 0)).unwrap();
        let k = pv_crossed_k(&point);
        assert_eq!((k.k0, k.k1), (FgAbGroup::free(1), FgAbGroup::free(1)));
        for s in 1..=2 {
            let id = KDatum::from_actions(IntMatrix::identity(s), IntMatrix::identity(s)).unwrap();
            let k = pv_crossed_k(&id);
            assert_eq!(k.k0, FgAbGroup::free(2 * s));
            assert_eq!(k.k1, FgAbGroup::free(2 * s));
        }
        assert!(KDatum::from_actions(IntMatrix::zeros(1, 2), IntMatrix::identity(1)).is_err());
    }

    #[test]
    fn product_with_denjoy_factor() {
        let k = pv_crossed_k(&putnam_product_kdata());
        assert_eq!(k.k0, FgAbGroup::free(3));
        assert_eq!(k.k1, FgAbGroup::free(3));
    }
}
