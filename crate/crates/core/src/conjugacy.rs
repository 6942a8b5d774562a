//! Similarity of integer matrices over `Q`, over `Z/k` and (by bounded search) over `Z`.
//!
//! A verdict is either a witness `P` with `P·A = B·P` and `det P = ±1`, an obstruction
//! (a modulus `k` with no invertible solution mod `k`, or differing rational invariants),
//! or inconclusive with the bounds that were searched.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::fgab::{hermite_normal_form, kernel_basis, smith_normal_form, IntMatrix};
use crate::Error;

pub const DEFAULT_MODCAP: u64 = 16;
pub const MAX_MODCAP: u64 = 64;
pub const MAX_ENTRY_BOUND: i64 = 6;
pub const MAX_DIM: usize = 3;
/// Largest solution set mod `k` that is enumerated.
pub const MAX_MODK_SOLUTIONS: u128 = 1 << 28;

/// The two unipotent matrices `[[1,m,0],[0,1,n],[0,0,1]]` and `[[1,n,0],[0,1,m],[0,0,1]]`.
pub fn ji_matrices(m: i64, n: i64) -> Result<(IntMatrix, IntMatrix)> {
    if m == 0 || n == 0 {
        return invalid("parameters must be nonzero");
    }
    Ok((
        IntMatrix::from_rows(&[[1, m, 0], [0, 1, n], [0, 0, 1]]),
        IntMatrix::from_rows(&[[1, n, 0], [0, 1, m], [0, 0, 1]]),
    ))
}

fn check_pair(a: &IntMatrix, b: &IntMatrix) -> Result<usize> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return invalid(format!(
            "need square matrices of equal size, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        ));
    }
    Ok(a.rows())
}

/// Polynomials over `Q`, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
struct QPoly(Vec<BigRational>);

impl QPoly {
    fn trim(mut v: Vec<BigRational>) -> Self {
        while v.last().is_some_and(|c| c.is_zero()) {
            v.pop();
        }
        QPoly(v)
    }

    fn constant(c: BigRational) -> Self {
        Self::trim(vec![c])
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return QPoly(Vec::new());
        }
        let mut v = vec![BigRational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Self::trim(v)
    }

    fn add(&self, o: &Self) -> Self {
        let mut v = vec![BigRational::zero(); self.0.len().max(o.0.len())];
        for (i, a) in self.0.iter().enumerate() {
            v[i] += a;
        }
        for (i, b) in o.0.iter().enumerate() {
            v[i] += b;
        }
        Self::trim(v)
    }

    fn neg(&self) -> Self {
        QPoly(self.0.iter().map(|c| -c).collect())
    }

    fn rem(&self, d: &Self) -> Self {
        let mut r = self.0.clone();
        let lead = d.0.last().expect("nonzero divisor");
        while r.len() >= d.0.len() && !r.is_empty() {
            let q = r.last().unwrap() / lead;
            let shift = r.len() - d.0.len();
            for (i, c) in d.0.iter().enumerate() {
                r[shift + i] -= &q * c;
            }
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        Self::trim(r)
    }

    fn monic(&self) -> Self {
        match self.0.last() {
            None => self.clone(),
            Some(l) => QPoly(self.0.iter().map(|c| c / l).collect()),
        }
    }

    fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }
}

fn poly_det(m: &[Vec<QPoly>]) -> QPoly {
    let n = m.len();
    if n == 0 {
        return QPoly::constant(BigRational::one());
    }
    let mut total = QPoly(Vec::new());
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let sub: Vec<Vec<QPoly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let term = m[0][j].mul(&poly_det(&sub));
        total = if j % 2 == 0 { total.add(&term) } else { total.add(&term.neg()) };
    }
    total
}

/// Determinantal divisors `D_1, ..., D_d` of `xI - A` over `Q[x]`; equal lists are
/// equivalent to equal rational canonical forms.
fn determinantal_divisors(a: &IntMatrix) -> Vec<QPoly> {
    let d = a.rows();
    let entry = |i: usize, j: usize| {
        let c = BigRational::from_integer(-a[(i, j)].clone());
        if i == j {
            QPoly::trim(vec![c, BigRational::one()])
        } else {
            QPoly::constant(c)
        }
    };
    (1..=d)
        .map(|k| {
            let subsets = crate::fgab::lex_subsets(d, k);
            let mut g = QPoly(Vec::new());
            for rs in &subsets {
                for cs in &subsets {
                    let m: Vec<Vec<QPoly>> = rs
                        .iter()
                        .map(|&i| cs.iter().map(|&j| entry(i, j)).collect())
                        .collect();
                    g = g.gcd(&poly_det(&m));
                }
            }
            g
        })
        .collect()
}

/// Similarity over `Q`, decided by the invariant factors of `xI - A`.
pub fn q_similar(a: &IntMatrix, b: &IntMatrix) -> Result<bool> {
    let d = check_pair(a, b)?;
    if d > 6 {
        return Err(Error::ResourceLimit(format!("q_similar supports d <= 6, got {d}")));
    }
    Ok(determinantal_divisors(a) == determinantal_divisors(b))
}

/// Matrix of `P ↦ P·A - B·P` on `vec(P)`, row-major entries of `P`.
fn intertwiner_system(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let d = a.rows();
    let mut m = IntMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let row = i * d + j;
            for l in 0..d {
                m[(row, i * d + l)] += &a[(l, j)];
                m[(row, l * d + j)] -= &b[(i, l)];
            }
        }
    }
    m
}

fn det_mod(p: &[i64], d: usize, k: i64) -> i64 {
    let e = |i: usize, j: usize| p[i * d + j];
    let v = match d {
        0 => 1,
        1 => e(0, 0),
        2 => e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0),
        3 => {
            e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
                - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
                + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
        }
        _ => unreachable!("dimension checked"),
    };
    v.rem_euclid(k)
}

/// Search for `P` invertible mod `k` with `P·A ≡ B·P (mod k)`.
///
/// The solutions of the linear congruence form a module that a Smith decomposition of
/// the system parametrises as `Σ t_i w_i` with `t_i` ranging over `Z/gcd(s_i, k)`; every
/// solution is visited, so a negative answer is exhaustive over `GL_d(Z/k)`.
pub fn modk_witness(a: &IntMatrix, b: &IntMatrix, k: u64, modcap: u64) -> Result<Option<IntMatrix>> {
    let d = check_pair(a, b)?;
    if d > MAX_DIM {
        return Err(Error::ResourceLimit(format!("mod-k search supports d <= {MAX_DIM}")));
    }
    if modcap > MAX_MODCAP {
        return Err(Error::ResourceLimit(format!("modcap {modcap} exceeds {MAX_MODCAP}")));
    }
    if k < 2 {
        return invalid("modulus must be at least 2");
    }
    if k > modcap {
        return Err(Error::ResourceLimit(format!("modulus {k} exceeds cap {modcap}")));
    }
    let ki = k as i64;
    let kb = BigInt::from(k);
    if a.reduce_mod(&kb) == b.reduce_mod(&kb) {
        return Ok(Some(IntMatrix::identity(d)));
    }
    let snf = smith_normal_form(&intertwiner_system(a, b));
    let diag = snf.diagonal_entries();
    let dd = d * d;
    let mut gens: Vec<(i64, Vec<i64>)> = Vec::new();
    let mut size: u128 = 1;
    for i in 0..dd {
        let s = diag.get(i).cloned().unwrap_or_else(BigInt::zero);
        let g = s.gcd(&kb).to_i64().expect("divides k");
        let g = if s.is_zero() { ki } else { g };
        if g == 1 {
            continue;
        }
        let step = ki / g;
        let w: Vec<i64> = (0..dd)
            .map(|r| {
                let v: BigInt = &snf.right[(r, i)] * step;
                v.mod_floor(&kb).to_i64().unwrap()
            })
            .collect();
        size *= g as u128;
        gens.push((g, w));
    }
    if size > MAX_MODK_SOLUTIONS {
        return Err(Error::ResourceLimit(format!(
            "{size} solutions mod {k} exceed enumeration limit"
        )));
    }
    let mut counters = vec![0i64; gens.len()];
    let mut p = vec![0i64; dd];
    loop {
        if det_mod(&p, d, ki).gcd(&ki) == 1 {
            let rows: Vec<Vec<i64>> = p.chunks(d).map(|r| r.to_vec()).collect();
            let witness = IntMatrix::from_rows(&rows);
            debug_assert!(verify_modk(a, b, &witness, k));
            return Ok(Some(witness));
        }
        // odometer step
        let mut idx = 0;
        loop {
            if idx == gens.len() {
                return Ok(None);
            }
            let (g, w) = &gens[idx];
            counters[idx] += 1;
            for (x, y) in p.iter_mut().zip(w) {
                *x = (*x + y) % ki;
            }
            if counters[idx] < *g {
                break;
            }
            counters[idx] = 0;
            idx += 1;
        }
    }
}

pub fn modk_similar(a: &IntMatrix, b: &IntMatrix, k: u64, modcap: u64) -> Result<bool> {
    Ok(modk_witness(a, b, k, modcap)?.is_some())
}

/// Checks `P·A ≡ B·P (mod k)` with `det P` a unit mod `k`.
pub fn verify_modk(a: &IntMatrix, b: &IntMatrix, p: &IntMatrix, k: u64) -> bool {
    let kb = BigInt::from(k);
    let (Ok(pa), Ok(bp)) = (p.checked_mul(a), b.checked_mul(p)) else {
        return false;
    };
    let Ok(det) = p.det() else { return false };
    pa.reduce_mod(&kb) == bp.reduce_mod(&kb) && det.mod_floor(&kb).gcd(&kb).is_one()
}

/// Exact check of a similarity witness over `Z`.
pub fn verify_witness(a: &IntMatrix, b: &IntMatrix, p: &IntMatrix) -> bool {
    let (Ok(pa), Ok(bp)) = (p.checked_mul(a), b.checked_mul(p)) else {
        return false;
    };
    pa == bp && p.det().is_ok_and(|det| det.abs().is_one())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Obstruction {
    Modulus { k: u64 },
    RationalInvariants,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SimilarityStatus {
    Similar { witness: IntMatrix },
    NotSimilar { obstruction: Obstruction },
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimilarityVerdict {
    pub status: SimilarityStatus,
    pub entry_bound: i64,
    pub modcap: u64,
    pub q_similar: bool,
    /// Integer solutions of `P·A = B·P` with entries in the box that were tested.
    pub candidates_checked: u64,
    /// Moduli at which an invertible solution exists.
    pub moduli_passed: Vec<u64>,
    /// Moduli skipped because their solution set was too large.
    pub moduli_skipped: Vec<u64>,
}

impl SimilarityVerdict {
    pub fn is_similar(&self) -> bool {
        matches!(self.status, SimilarityStatus::Similar { .. })
    }

    pub fn excludes_similarity(&self) -> bool {
        matches!(self.status, SimilarityStatus::NotSimilar { .. })
    }
}

/// Depth-first enumeration of lattice points in the box `[-bound, bound]^n`, using a
/// row echelon basis so each coefficient is pinned by its pivot coordinate.
struct BoxSearch<'a> {
    basis: Vec<Vec<i64>>,
    pivots: Vec<usize>,
    bound: i64,
    visit: &'a mut dyn FnMut(&[i64]) -> bool,
    checked: u64,
}

impl BoxSearch<'_> {
    fn run(&mut self, level: usize, x: &mut Vec<i64>) -> bool {
        let n = x.len();
        // coordinates before the next pivot are final
        let fixed_to = self.pivots.get(level).copied().unwrap_or(n);
        let lo_fixed = if level == 0 { 0 } else { self.pivots[level - 1] };
        if (lo_fixed..fixed_to).any(|c| x[c].abs() > self.bound) {
            return false;
        }
        if level == self.basis.len() {
            self.checked += 1;
            return (self.visit)(x);
        }
        let piv = self.pivots[level];
        let h = self.basis[level][piv];
        let cur = x[piv];
        // need |cur + t·h| <= bound
        let t_lo = Integer::div_ceil(&(-self.bound - cur), &h);
        let t_hi = Integer::div_floor(&(self.bound - cur), &h);
        let mut ts: Vec<i64> = (t_lo..=t_hi).collect();
        ts.sort_by_key(|t| t.abs());
        for t in ts {
            for (xi, bi) in x.iter_mut().zip(&self.basis[level]) {
                *xi += t * bi;
            }
            let found = self.run(level + 1, x);
            for (xi, bi) in x.iter_mut().zip(&self.basis[level]) {
                *xi -= t * bi;
            }
            if found {
                return true;
            }
        }
        false
    }
}

fn bounded_witness(a: &IntMatrix, b: &IntMatrix, bound: i64) -> (Option<IntMatrix>, u64) {
    let d = a.rows();
    let kernel = kernel_basis(&intertwiner_system(a, b));
    let echelon = hermite_normal_form(&kernel.transpose());
    let Some(basis) = echelon.to_i64_rows() else {
        return (None, 0);
    };
    let pivots: Vec<usize> = basis
        .iter()
        .map(|r| r.iter().position(|&v| v != 0).expect("nonzero rows"))
        .collect();
    let mut witness = None;
    let mut visit = |x: &[i64]| {
        let rows: Vec<Vec<i64>> = x.chunks(d).map(|r| r.to_vec()).collect();
        let p = IntMatrix::from_rows(&rows);
        if p.det().is_ok_and(|v| v.abs().is_one()) {
            witness = Some(p);
            true
        } else {
            false
        }
    };
    let mut search = BoxSearch {
        basis,
        pivots,
        bound,
        visit: &mut visit,
        checked: 0,
    };
    let mut x = vec![0i64; d * d];
    search.run(0, &mut x);
    let checked = search.checked;
    (witness, checked)
}

/// Searches unimodular `P` with entries in `[-bound, bound]` and `P·A = B·P`; failing
/// that, looks for an obstruction over `Q` or mod `k` for `k = 2..=modcap`.
pub fn z_similar_bounded(a: &IntMatrix, b: &IntMatrix, entry_bound: i64, modcap: u64) -> Result<SimilarityVerdict> {
    let d = check_pair(a, b)?;
    if d > MAX_DIM {
        return Err(Error::ResourceLimit(format!("similarity search supports d <= {MAX_DIM}")));
    }
    if !(0..=MAX_ENTRY_BOUND).contains(&entry_bound) {
        return Err(Error::ResourceLimit(format!(
            "entry bound must lie in 0..={MAX_ENTRY_BOUND}"
        )));
    }
    if modcap > MAX_MODCAP {
        return Err(Error::ResourceLimit(format!("modcap {modcap} exceeds {MAX_MODCAP}")));
    }
    let q = q_similar(a, b)?;
    let mut verdict = SimilarityVerdict {
        status: SimilarityStatus::Inconclusive,
        entry_bound,
        modcap,
        q_similar: q,
        candidates_checked: 0,
        moduli_passed: Vec::new(),
        moduli_skipped: Vec::new(),
    };
    if a == b && entry_bound >= 1 {
        verdict.status = SimilarityStatus::Similar {
            witness: IntMatrix::identity(d),
        };
        return Ok(verdict);
    }
    if !q {
        verdict.status = SimilarityStatus::NotSimilar {
            obstruction: Obstruction::RationalInvariants,
        };
        return Ok(verdict);
    }
    let (w, checked) = bounded_witness(a, b, entry_bound);
    verdict.candidates_checked = checked;
    if let Some(p) = w {
        assert!(verify_witness(a, b, &p), "witness failed exact re-check");
        verdict.status = SimilarityStatus::Similar { witness: p };
        return Ok(verdict);
    }
    for k in 2..=modcap {
        match modk_similar(a, b, k, modcap) {
            Ok(true) => verdict.moduli_passed.push(k),
            Ok(false) => {
                verdict.status = SimilarityStatus::NotSimilar {
                    obstruction: Obstruction::Modulus { k },
                };
                return Ok(verdict);
            }
            Err(Error::ResourceLimit(_)) => verdict.moduli_skipped.push(k),
            Err(e) => return Err(e),
        }
    }
    Ok(verdict)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlipVerdict {
    pub direct: SimilarityVerdict,
    pub inverse: SimilarityVerdict,
    /// Both targets carry an obstruction.
    pub flip_excluded: bool,
    /// A witness was found for at least one target.
    pub flip_similar: bool,
}

/// Similarity of `A` to `B` or to `B^{-1}`.
pub fn flip_obstruction(a: &IntMatrix, b: &IntMatrix, entry_bound: i64, modcap: u64) -> Result<FlipVerdict> {
    check_pair(a, b)?;
    if !b.det()?.abs().is_one() {
        return invalid("target must be invertible over Z");
    }
    let b_inv = b.unimodular_inverse()?;
    let direct = z_similar_bounded(a, b, entry_bound, modcap)?;
    let inverse = z_similar_bounded(a, &b_inv, entry_bound, modcap)?;
    Ok(FlipVerdict {
        flip_excluded: direct.excludes_similarity() && inverse.excludes_similarity(),
        flip_similar: direct.is_similar() || inverse.is_similar(),
        direct,
        inverse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ji_pairs() {
        let (a, b) = ji_matrices(2, 3).unwrap();
        assert_eq!(a, IntMatrix::from_rows(&[[1, 2, 0], [0, 1, 3], [0, 0, 1]]));
        assert_eq!(b, IntMatrix::from_rows(&[[1, 3, 0], [0, 1, 2], [0, 0, 1]]));
        for m in [1, 4] {
            let (a, b) = ji_matrices(m, m).unwrap();
            assert_eq!(a, b);
        }
        assert!(ji_matrices(0, 1).is_err());
    }

    #[test]
    fn rational_similarity() {
        let (a, b) = ji_matrices(2, 3).unwrap();
        assert!(q_similar(&a, &b).unwrap());
        assert!(q_similar(&a, &a).unwrap());
        assert!(!q_similar(&a, &IntMatrix::identity(3)).unwrap());
        // same characteristic polynomial, different minimal polynomial
        let j = IntMatrix::from_rows(&[[2, 1], [0, 2]]);
        let s = IntMatrix::from_rows(&[[2, 0], [0, 2]]);
        assert!(!q_similar(&j, &s).unwrap());
        let c = IntMatrix::from_rows(&[[0, -4], [1, 4]]);
        assert!(q_similar(&j, &c).unwrap());
        assert!(q_similar(&a, &IntMatrix::identity(2)).is_err());
    }

    #[test]
    fn modular_similarity() {
        let (a, b) = ji_matrices(2, 3).unwrap();
        for k in 2..=8 {
            assert!(modk_similar(&a, &a, k, 16).unwrap());
        }
        let x = IntMatrix::from_rows(&[[2, 0], [0, 1]]);
        let y = IntMatrix::from_rows(&[[1, 0], [0, 1]]);
        assert!(!modk_similar(&x, &y, 3, 16).unwrap());
        assert!(modk_similar(&a, &b, 17, 16).is_err());
        // Witnesses satisfy the congruence.
        if let Some(p) = modk_witness(&a, &b, 5, 16).unwrap() {
            assert!(verify_modk(&a, &b, &p, 5));
        }
    }

    #[test]
    fn bounded_search() {
        let (a, b) = ji_matrices(1, 1).unwrap();
        let v = z_similar_bounded(&a, &b, 3, 16).unwrap();
        assert_eq!(
            v.status,
            SimilarityStatus::Similar {
                witness: IntMatrix::identity(3)
            }
        );
        let a = IntMatrix::from_rows(&[[2, 1], [1, 1]]);
        let p = IntMatrix::from_rows(&[[1, 1], [0, 1]]);
        let b = p.checked_mul(&a).unwrap().checked_mul(&p.unimodular_inverse().unwrap()).unwrap();
        let v = z_similar_bounded(&a, &b, 2, 8).unwrap();
        let SimilarityStatus::Similar { witness } = v.status else {
            panic!("{v:?}")
        };
        assert!(verify_witness(&a, &b, &witness));
        assert!(z_similar_bounded(&a, &b, 7, 8).is_err());
    }

    #[test]
    fn ji_pair_not_similar() {
        let (a, b) = ji_matrices(2, 3).unwrap();
        let f = flip_obstruction(&a, &b, 3, 16).unwrap();
        assert!(!f.flip_similar, "{f:?}");
    }

    #[test]
    fn flips() {
        let inv = IntMatrix::from_rows(&[[0, 1], [1, 0]]);
        let f = flip_obstruction(&inv, &inv, 1, 4).unwrap();
        assert!(f.direct.is_similar() && f.inverse.is_similar());
        let id = IntMatrix::identity(3);
        assert!(flip_obstruction(&id, &id, 1, 4).unwrap().flip_similar);
        let sing = IntMatrix::from_rows(&[[2, 0], [0, 1]]);
        assert!(flip_obstruction(&sing, &sing, 1, 4).is_err());
    }
}
