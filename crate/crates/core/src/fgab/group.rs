use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{smith_normal_form, IntMatrix};
use crate::error::{invalid, Result};

/// A finitely generated abelian group `Z^r ⊕ Z/d_1 ⊕ ... ⊕ Z/d_k` in invariant-factor
/// form: every `d_i >= 2` and `d_i | d_{i+1}`. Structural equality is group isomorphism.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FgAbGroup {
    free_rank: usize,
    invariant_factors: Vec<BigInt>,
}

impl FgAbGroup {
    pub fn trivial() -> Self {
        FgAbGroup {
            free_rank: 0,
            invariant_factors: Vec::new(),
        }
    }

    pub fn free(rank: usize) -> Self {
        FgAbGroup {
            free_rank: rank,
            invariant_factors: Vec::new(),
        }
    }

    /// Accepts an already-canonical description and rejects anything else.
    pub fn new(free_rank: usize, invariant_factors: Vec<BigInt>) -> Result<Self> {
        if invariant_factors.iter().any(|d| d < &BigInt::from(2)) {
            return invalid("invariant factors must be >= 2");
        }
        if invariant_factors
            .windows(2)
            .any(|w| !w[1].is_multiple_of(&w[0]))
        {
            return invalid("invariant factors must form a divisibility chain");
        }
        Ok(FgAbGroup {
            free_rank,
            invariant_factors,
        })
    }

    /// `Z^free ⊕ ⊕_i Z/orders[i]`, normalised. An order of 0 contributes a free
    /// summand and an order of ±1 contributes nothing.
    pub fn from_cyclic_orders<I, T>(free: usize, orders: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        let diag: Vec<BigInt> = orders.into_iter().map(|o| o.into().abs()).collect();
        let extra_free = diag.iter().filter(|d| d.is_zero()).count();
        let torsion: Vec<BigInt> = diag.into_iter().filter(|d| !d.is_zero()).collect();
        let snf = smith_normal_form(&IntMatrix::diagonal(&torsion));
        FgAbGroup {
            free_rank: free + extra_free,
            invariant_factors: snf
                .diagonal_entries()
                .into_iter()
                .filter(|d| !d.is_one())
                .collect(),
        }
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn invariant_factors(&self) -> &[BigInt] {
        &self.invariant_factors
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.invariant_factors.is_empty()
    }

    /// Order of the torsion subgroup.
    pub fn torsion_order(&self) -> BigInt {
        self.invariant_factors.iter().product()
    }

    pub fn direct_sum(&self, other: &FgAbGroup) -> FgAbGroup {
        FgAbGroup::from_cyclic_orders(
            self.free_rank + other.free_rank,
            self.invariant_factors
                .iter()
                .chain(&other.invariant_factors)
                .cloned(),
        )
    }

    /// Prime-power (elementary divisor) decomposition of the torsion part, sorted.
    pub fn elementary_divisors(&self) -> Vec<BigInt> {
        let mut out = Vec::new();
        for d in &self.invariant_factors {
            let mut rest = d.clone();
            let mut p = BigInt::from(2);
            while &p * &p <= rest {
                if rest.is_multiple_of(&p) {
                    let mut q = BigInt::one();
                    while rest.is_multiple_of(&p) {
                        rest /= &p;
                        q *= &p;
                    }
                    out.push(q);
                }
                p += 1;
            }
            if rest > BigInt::one() {
                out.push(rest);
            }
        }
        out.sort();
        out
    }
}

impl fmt::Display for FgAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.invariant_factors.iter().map(|d| format!("Z/{d}")));
        write!(f, "{}", parts.join(" ⊕ "))
    }
}

#[derive(Serialize, Deserialize)]
struct GroupRepr {
    free_rank: usize,
    invariant_factors: Vec<String>,
    #[serde(default, skip_deserializing)]
    display: String,
}

impl Serialize for FgAbGroup {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GroupRepr {
            free_rank: self.free_rank,
            invariant_factors: self
                .invariant_factors
                .iter()
                .map(ToString::to_string)
                .collect(),
            display: self.to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FgAbGroup {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = GroupRepr::deserialize(d)?;
        let orders = repr
            .invariant_factors
            .iter()
            .map(|s| s.parse::<BigInt>().map_err(D::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if orders.iter().any(Zero::is_zero) {
            return Err(D::Error::custom("torsion orders must be nonzero"));
        }
        Ok(FgAbGroup::from_cyclic_orders(repr.free_rank, orders))
    }
}

/// Rank of the image of `a`.
pub fn rank(a: &IntMatrix) -> usize {
    smith_normal_form(a).rank()
}

/// `Z^rows / im(a)` for `a: Z^cols -> Z^rows`.
pub fn cokernel(a: &IntMatrix) -> FgAbGroup {
    let snf = smith_normal_form(a);
    let diag = snf.diagonal_entries();
    let r = diag.iter().filter(|d| !d.is_zero()).count();
    FgAbGroup {
        free_rank: a.rows() - r,
        invariant_factors: diag
            .into_iter()
            .filter(|d| !d.is_zero() && !d.is_one())
            .collect(),
    }
}

/// Rank of `ker(a)`, a free subgroup of `Z^cols`.
pub fn kernel_rank(a: &IntMatrix) -> usize {
    a.cols() - rank(a)
}

/// A basis of `ker(a) ⊂ Z^cols` as the columns of the returned `cols x k` matrix.
pub fn kernel_basis(a: &IntMatrix) -> IntMatrix {
    let snf = smith_normal_form(a);
    let r = snf.rank();
    let v = &snf.right;
    let mut out = IntMatrix::zeros(a.cols(), a.cols() - r);
    for (c, j) in (r..a.cols()).enumerate() {
        for i in 0..a.cols() {
            out[(i, c)] = v[(i, j)].clone();
        }
    }
    out
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn lex_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// Matrix of `Λ^k(a)` on the lexicographically ordered basis `e_I = e_{i1} ∧ ... ∧ e_{ik}`;
/// the `(I, J)` entry is the minor of `a` on rows `I` and columns `J`.
pub fn exterior_power(a: &IntMatrix, k: usize) -> Result<IntMatrix> {
    if !a.is_square() {
        return invalid(format!(
            "exterior power needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        ));
    }
    if k > a.rows() {
        return invalid(format!("exterior power {k} exceeds dimension {}", a.rows()));
    }
    let basis = lex_subsets(a.rows(), k);
    let mut out = IntMatrix::zeros(basis.len(), basis.len());
    for (r, rows) in basis.iter().enumerate() {
        for (c, cols) in basis.iter().enumerate() {
            out[(r, c)] = a.minor(rows, cols);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn cokernel_examples() {
        let (m, n) = (2, 3);
        let a = IntMatrix::from_rows(&[[-n, -m * n], [0, -m], [0, 0]]);
        let c = cokernel(&a);
        assert_eq!(c.free_rank(), 1);
        assert_eq!(c.invariant_factors(), big(&[6]).as_slice());
        assert_eq!(c, FgAbGroup::from_cyclic_orders(1, [2, 3]));
        assert_eq!(cokernel(&IntMatrix::zeros(2, 2)), FgAbGroup::free(2));
        assert!(cokernel(&IntMatrix::identity(2)).is_trivial());
    }

    #[test]
    fn kernel_rank_examples() {
        assert_eq!(kernel_rank(&IntMatrix::zeros(3, 3)), 3);
        assert_eq!(kernel_rank(&IntMatrix::identity(3)), 0);
        let a = IntMatrix::from_rows(&[[1, 2, 0], [0, 1, 3], [0, 0, 1]]);
        assert_eq!(kernel_rank(&a.identity_minus().unwrap()), 1);
    }

    #[test]
    fn kernel_basis_is_annihilated() {
        let a = IntMatrix::from_rows(&[[1, 2, 3, 4], [2, 4, 6, 8], [0, 1, 1, 0]]);
        let k = kernel_basis(&a);
        assert_eq!(k.cols(), 2);
        assert!((&a * &k).is_zero());
    }

    #[test]
    fn direct_sum_examples() {
        let z2 = FgAbGroup::from_cyclic_orders(0, [2]);
        let z3 = FgAbGroup::from_cyclic_orders(0, [3]);
        assert_eq!(z2.direct_sum(&z3), FgAbGroup::new(0, big(&[6])).unwrap());
        assert_eq!(z2.direct_sum(&FgAbGroup::trivial()), z2);
        let g = FgAbGroup::from_cyclic_orders(2, [4]).direct_sum(&z2);
        assert_eq!(g.free_rank(), 2);
        assert_eq!(g.invariant_factors(), big(&[2, 4]).as_slice());
    }

    #[test]
    fn canonical_form_rejects_non_chains() {
        assert!(FgAbGroup::new(0, big(&[2, 3])).is_err());
        assert!(FgAbGroup::new(0, big(&[1])).is_err());
        assert!(FgAbGroup::new(1, big(&[2, 6])).is_ok());
    }

    #[test]
    fn display_and_json() {
        let g = FgAbGroup::from_cyclic_orders(4, [2, 3]);
        assert_eq!(g.to_string(), "Z^4 ⊕ Z/6");
        assert_eq!(FgAbGroup::trivial().to_string(), "0");
        let s = serde_json::to_string(&g).unwrap();
        let back: FgAbGroup = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert_eq!(g.elementary_divisors(), big(&[2, 3]));
    }

    #[test]
    fn exterior_power_examples() {
        let (m, n) = (2, 3);
        let a = IntMatrix::from_rows(&[[1, m, 0], [0, 1, n], [0, 0, 1]]);
        assert_eq!(
            exterior_power(&a, 2).unwrap(),
            IntMatrix::from_rows(&[[1, n, m * n], [0, 1, m], [0, 0, 1]])
        );
        assert!(exterior_power(&a, 0).unwrap().is_identity());
        assert_eq!(exterior_power(&a, 0).unwrap().rows(), 1);
        let b = IntMatrix::from_rows(&[[2, 1, 0], [1, 3, 5], [0, 4, 1]]);
        assert_eq!(
            exterior_power(&b, 3).unwrap(),
            IntMatrix::from_big_rows(vec![vec![b.det().unwrap()]]).unwrap()
        );
        assert!(exterior_power(&a, 4).is_err());
        assert!(exterior_power(&IntMatrix::zeros(2, 3), 1).is_err());
    }

    #[test]
    fn lex_subset_order() {
        assert_eq!(
            lex_subsets(3, 2),
            vec![vec![0, 1], vec![0, 2], vec![1, 2]]
        );
        assert_eq!(lex_subsets(4, 0), vec![Vec::<usize>::new()]);
        assert!(lex_subsets(2, 3).is_empty());
    }
}
