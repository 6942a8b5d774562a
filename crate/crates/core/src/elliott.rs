//! Elliott invariant data for crossed products with a unique trace.
//!
//! Only trace-determined positive cones are representable, so two invariants agree when
//! their K-groups are isomorphic and their trace ranges are the same subgroup of `R`
//! with `[1]` going to `1`. The full pairing between traces and `K_0` is not checked.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::fgab::{hermite_normal_form, lattice_contains, FgAbGroup, IntMatrix};
use crate::ktheory::{pv_crossed_k, putnam_product_kdata, torus_crossed_k};
use crate::torus::{IrrationalBasis, TorusMap, Translation};

pub const CONE_RULE: &str = "strict-positivity-of-trace";
pub const TRACE_COUNT: &str = "unique trace";
pub const EQUIVALENCE_SCOPE: &str =
    "compares K-groups, trace range and unit only; trace pairing on generators not checked";

/// A finitely generated subgroup of `Q·1 + Q·θ + ...`, held as `(1/D)·L` with `L` an
/// integer lattice in Hermite normal form and `D` minimal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRange {
    labels: Vec<String>,
    denominator: BigInt,
    lattice: IntMatrix,
}

impl TraceRange {
    /// Subgroup generated by the given coefficient vectors over `labels`. The labels are
    /// sorted internally, with `"1"` first, so the representation does not depend on
    /// the order they were declared in.
    pub fn new(labels: &[String], generators: &[Vec<BigRational>]) -> Result<Self> {
        let mut seen = BTreeSet::new();
        if !labels.iter().all(|l| seen.insert(l.clone())) {
            return invalid("duplicate trace range label");
        }
        if !labels.iter().any(|l| l == "1") {
            return invalid("trace range basis must contain the label \"1\"");
        }
        let mut order: Vec<usize> = (0..labels.len()).collect();
        order.sort_by(|&a, &b| (labels[a] != "1", &labels[a]).cmp(&(labels[b] != "1", &labels[b])));
        let sorted: Vec<String> = order.iter().map(|&i| labels[i].clone()).collect();
        for g in generators {
            if g.len() != labels.len() {
                return invalid("generator length does not match the basis");
            }
        }
        let mut denom = BigInt::one();
        for g in generators {
            for x in g {
                denom = denom.lcm(x.denom());
            }
        }
        let rows: Vec<Vec<BigInt>> = generators
            .iter()
            .map(|g| {
                order
                    .iter()
                    .map(|&i| (&g[i] * &denom).to_integer())
                    .collect()
            })
            .collect();
        let n = labels.len();
        let m = IntMatrix::from_vec(rows.len(), n, rows.into_iter().flatten().collect())?;
        let mut lattice = hermite_normal_form(&m);
        let content = lattice.entries().iter().fold(BigInt::zero(), |a, x| a.gcd(x));
        let g = content.gcd(&denom);
        if !g.is_zero() && !g.is_one() {
            denom /= &g;
            let entries = lattice.entries().iter().map(|x| x / &g).collect();
            lattice = IntMatrix::from_vec(lattice.rows(), n, entries)?;
        }
        if lattice.rows() == 0 {
            denom = BigInt::one();
        }
        Ok(TraceRange {
            labels: sorted,
            denominator: denom,
            lattice,
        })
    }

    /// `Z + g_1 Z + ...` where each generator is a single basis element.
    pub fn spanned_by_labels(labels: &[String], gens: &[&str]) -> Result<Self> {
        let mut vecs = Vec::new();
        for g in gens {
            let i = labels
                .iter()
                .position(|l| l == g)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown label {g:?}")))?;
            let mut v = vec![BigRational::zero(); labels.len()];
            v[i] = BigRational::one();
            vecs.push(v);
        }
        TraceRange::new(labels, &vecs)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rank(&self) -> usize {
        self.lattice.rows()
    }

    /// Canonical generators, one per row of the Hermite form.
    pub fn generators(&self) -> Vec<Vec<BigRational>> {
        (0..self.lattice.rows())
            .map(|i| {
                self.lattice
                    .row(i)
                    .iter()
                    .map(|x| BigRational::new(x.clone(), self.denominator.clone()))
                    .collect()
            })
            .collect()
    }

    fn coords_in_order(&self, labels: &[String], v: &[BigRational]) -> Result<Vec<BigRational>> {
        if labels.len() != v.len() {
            return invalid("vector length does not match labels");
        }
        self.labels
            .iter()
            .map(|l| {
                labels
                    .iter()
                    .position(|x| x == l)
                    .map(|i| v[i].clone())
                    .ok_or_else(|| Error::InvalidArgument(format!("label {l:?} missing")))
            })
            .collect()
    }

    /// Whether the vector `v` (over `labels`) lies in the subgroup.
    pub fn contains(&self, labels: &[String], v: &[BigRational]) -> Result<bool> {
        let v = self.coords_in_order(labels, v)?;
        let scaled: Vec<BigRational> = v
            .iter()
            .map(|x| x * BigRational::from_integer(self.denominator.clone()))
            .collect();
        if scaled.iter().any(|x| !x.is_integer()) {
            return Ok(false);
        }
        let ints: Vec<BigInt> = scaled.iter().map(|x| x.to_integer()).collect();
        Ok(lattice_contains(&self.lattice, &ints))
    }

    pub fn contains_unit(&self) -> bool {
        let v: Vec<BigRational> = self
            .labels
            .iter()
            .map(|l| if l == "1" { BigRational::one() } else { BigRational::zero() })
            .collect();
        self.contains(&self.labels.clone(), &v).expect("own labels")
    }

    /// The same subgroup viewed in a larger basis (new labels get coefficient zero).
    pub fn extend_to(&self, labels: &[String]) -> Result<TraceRange> {
        for l in &self.labels {
            if !labels.contains(l) {
                return invalid(format!("target basis is missing label {l:?}"));
            }
        }
        let gens: Vec<Vec<BigRational>> = self
            .generators()
            .into_iter()
            .map(|g| {
                labels
                    .iter()
                    .map(|l| match self.labels.iter().position(|x| x == l) {
                        Some(i) => g[i].clone(),
                        None => BigRational::zero(),
                    })
                    .collect()
            })
            .collect();
        TraceRange::new(labels, &gens)
    }

    /// Relabels basis elements; unmapped labels keep their names.
    pub fn rename(&self, mapping: &BTreeMap<String, String>) -> Result<TraceRange> {
        let labels: Vec<String> = self
            .labels
            .iter()
            .map(|l| mapping.get(l).cloned().unwrap_or_else(|| l.clone()))
            .collect();
        TraceRange::new(&labels, &self.generators())
    }
}

fn format_rational_combination(labels: &[String], v: &[BigRational]) -> String {
    let mut parts = Vec::new();
    for (l, x) in labels.iter().zip(v) {
        if x.is_zero() {
            continue;
        }
        let coeff = if x.is_one() && l != "1" {
            String::new()
        } else if (-x).is_one() && l != "1" {
            "-".to_string()
        } else if x.is_integer() {
            x.to_integer().to_string()
        } else {
            format!("({x})")
        };
        parts.push(if l == "1" {
            coeff
        } else {
            format!("{coeff}{l}")
        });
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" + ").replace("+ -", "- ")
    }
}

impl std::fmt::Display for TraceRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let gens = self.generators();
        if gens.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = gens
            .iter()
            .map(|g| {
                let s = format_rational_combination(&self.labels, g);
                if s.contains(' ') {
                    format!("({s})Z")
                } else if s == "1" {
                    "Z".to_string()
                } else {
                    format!("{s}Z")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Serialize for TraceRange {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            labels: Vec<String>,
            generators: Vec<Vec<String>>,
            display: String,
        }
        Repr {
            labels: self.labels.clone(),
            generators: self
                .generators()
                .iter()
                .map(|g| g.iter().map(|x| x.to_string()).collect())
                .collect(),
            display: self.to_string(),
        }
        .serialize(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ElliottInvariant {
    pub k0: FgAbGroup,
    pub k1: FgAbGroup,
    pub trace_range: TraceRange,
    /// Coefficients of `τ([1])`, over the trace range's labels.
    pub unit_trace: Vec<String>,
    pub cone_rule: &'static str,
    pub trace_count: &'static str,
}

impl ElliottInvariant {
    fn new(k0: FgAbGroup, k1: FgAbGroup, trace_range: TraceRange) -> Result<Self> {
        if !trace_range.contains_unit() {
            return invalid("trace range must contain the unit trace 1");
        }
        let unit_trace = trace_range
            .labels()
            .iter()
            .map(|l| if l == "1" { "1" } else { "0" }.to_string())
            .collect();
        Ok(ElliottInvariant {
            k0,
            k1,
            trace_range,
            unit_trace,
            cone_rule: CONE_RULE,
            trace_count: TRACE_COUNT,
        })
    }
}

fn symbolic_first_translation(map: &TorusMap) -> Result<(IrrationalBasis, Vec<BigRational>)> {
    let basis = map
        .basis()
        .cloned()
        .ok_or_else(|| Error::InvalidArgument("map needs a symbolic basis".into()))?;
    let Translation::Symbolic(t) = map.translation() else {
        return invalid("map needs a symbolic translation");
    };
    Ok((basis, t[0].clone()))
}

/// Invariant of an affine Furstenberg transformation, optionally perturbed: a rotation
/// on the first coordinate followed by unipotent skews with nonzero sub-diagonal.
pub fn build_affine_furstenberg_invariant(map: &TorusMap, theta_label: &str) -> Result<ElliottInvariant> {
    let m = map.linear_part();
    let d = map.dim();
    if d < 2 {
        return invalid("need at least two coordinates");
    }
    for i in 0..d {
        for j in 0..d {
            let e = &m[(i, j)];
            let ok = if i == j {
                e.is_one()
            } else if j > i || i == 0 {
                e.is_zero()
            } else if j + 1 == i {
                !e.is_zero()
            } else {
                true
            };
            if !ok {
                return invalid(
                    "linear part must be lower unipotent with nonzero sub-diagonal and first row e_1",
                );
            }
        }
    }
    let (basis, t0) = symbolic_first_translation(map)?;
    let idx = basis
        .index_of(theta_label)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown basis label {theta_label:?}")))?;
    if idx == 0 || t0[idx].is_zero() {
        return invalid(format!(
            "first coordinate must rotate by an irrational multiple of {theta_label:?}"
        ));
    }
    let k = torus_crossed_k(map);
    let labels = basis.labels().to_vec();
    let mut one = vec![BigRational::zero(); labels.len()];
    one[0] = BigRational::one();
    let range = TraceRange::new(&labels, &[one, t0])?;
    ElliottInvariant::new(k.k0, k.k1, range)
}

/// Invariant of an irrational rotation of the circle.
pub fn build_rotation_invariant(map: &TorusMap) -> Result<ElliottInvariant> {
    if map.dim() != 1 || !map.linear_part().is_identity() {
        return invalid("need a rotation of the circle");
    }
    let (basis, t0) = symbolic_first_translation(map)?;
    if t0[1..].iter().all(Zero::is_zero) {
        return invalid("rotation angle must be irrational");
    }
    let k = torus_crossed_k(map);
    let labels = basis.labels().to_vec();
    let mut one = vec![BigRational::zero(); labels.len()];
    one[0] = BigRational::one();
    let range = TraceRange::new(&labels, &[one, t0])?;
    ElliottInvariant::new(k.k0, k.k1, range)
}

/// Invariant of the product of the rotation by `α` with a Denjoy homeomorphism of
/// rotation number `β`: `K_0 = K_1 = Z^3` and trace range `Z + αZ + βZ`.
pub fn build_putnam_invariant(basis: &IrrationalBasis, alpha: &str, beta: &str) -> Result<ElliottInvariant> {
    if alpha == beta {
        return invalid("alpha and beta labels must differ");
    }
    if alpha == "1" || beta == "1" {
        return invalid("alpha and beta must be irrational labels");
    }
    let k = pv_crossed_k(&putnam_product_kdata());
    let range = TraceRange::spanned_by_labels(basis.labels(), &["1", alpha, beta])?;
    ElliottInvariant::new(k.k0, k.k1, range)
}

/// How the bases of two invariants are matched before comparison.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum BasisMatch {
    /// Both must declare the same set of labels.
    #[default]
    Strict,
    /// Labels of the second invariant are renamed first.
    Rename(BTreeMap<String, String>),
    /// Same-named labels are identified and the union is taken as independent.
    Union,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    pub k0_match: bool,
    pub k1_match: bool,
    pub trace_range_match: bool,
    pub unit_match: bool,
    pub explanation: Vec<String>,
    pub scope: &'static str,
}

pub fn invariants_equivalent(
    e1: &ElliottInvariant,
    e2: &ElliottInvariant,
    basis_match: &BasisMatch,
) -> Result<EquivalenceReport> {
    let r2 = match basis_match {
        BasisMatch::Rename(m) => e2.trace_range.rename(m)?,
        _ => e2.trace_range.clone(),
    };
    let s1: BTreeSet<&String> = e1.trace_range.labels().iter().collect();
    let s2: BTreeSet<&String> = r2.labels().iter().collect();
    let (r1, r2) = if s1 == s2 {
        (e1.trace_range.clone(), r2)
    } else if *basis_match == BasisMatch::Union {
        let union: Vec<String> = s1.union(&s2).map(|s| (*s).clone()).collect();
        (e1.trace_range.extend_to(&union)?, r2.extend_to(&union)?)
    } else {
        return Err(Error::InvalidArgument(format!(
            "incomparable bases {:?} and {:?}; supply an identification",
            e1.trace_range.labels(),
            r2.labels()
        )));
    };
    let k0_match = e1.k0 == e2.k0;
    let k1_match = e1.k1 == e2.k1;
    let trace_range_match = r1 == r2;
    // both units are the vector for 1 once bases agree
    let unit_match = r1.contains_unit() && r2.contains_unit();
    let mut explanation = Vec::new();
    if !k0_match {
        explanation.push(format!("K_0 differs: {} vs {}", e1.k0, e2.k0));
    }
    if !k1_match {
        explanation.push(format!("K_1 differs: {} vs {}", e1.k1, e2.k1));
    }
    if !trace_range_match {
        explanation.push(format!("trace ranges differ: {r1} vs {r2}"));
    }
    if !unit_match {
        explanation.push("unit trace not in range".to_string());
    }
    let equivalent = k0_match && k1_match && trace_range_match && unit_match;
    if equivalent {
        explanation.push(format!(
            "K_0 = {}, K_1 = {}, trace range {}",
            e1.k0, e1.k1, r1
        ));
    }
    Ok(EquivalenceReport {
        equivalent,
        k0_match,
        k1_match,
        trace_range_match,
        unit_match,
        explanation,
        scope: EQUIVALENCE_SCOPE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trig::TrigPoly;
    use std::str::FromStr;

    fn q(s: &str) -> BigRational {
        BigRational::from_str(s).unwrap()
    }

    fn labels(ls: &[&str]) -> Vec<String> {
        ls.iter().map(|s| s.to_string()).collect()
    }

    fn basis2() -> IrrationalBasis {
        IrrationalBasis::new([("alpha", 2f64.sqrt() - 1.0), ("beta", 3f64.sqrt() - 1.0)]).unwrap()
    }

    #[test]
    fn canonical_form_is_generator_independent() {
        let l = labels(&["1", "theta"]);
        let a = TraceRange::new(&l, &[vec![q("1"), q("0")], vec![q("0"), q("1")]]).unwrap();
        let b = TraceRange::new(
            &l,
            &[vec![q("1"), q("1")], vec![q("2"), q("3")], vec![q("5"), q("7")]],
        )
        .unwrap();
        assert_eq!(a, b);
        let half = TraceRange::new(&l, &[vec![q("1/2"), q("0")], vec![q("0"), q("1")]]).unwrap();
        assert_ne!(a, half);
        let twice = TraceRange::new(&l, &[vec![q("1/2"), q("0")], vec![q("1"), q("0")], vec![q("0"), q("1")]]).unwrap();
        assert_eq!(half, twice);
        // label order is irrelevant
        let swapped = TraceRange::new(&labels(&["theta", "1"]), &[vec![q("0"), q("1")], vec![q("1"), q("0")]]).unwrap();
        assert_eq!(a, swapped);
        assert_eq!(a.to_string(), "Z + thetaZ");
    }

    #[test]
    fn denominators_are_minimal() {
        let l = labels(&["1"]);
        let a = TraceRange::new(&l, &[vec![q("2/4")]]).unwrap();
        let b = TraceRange::new(&l, &[vec![q("3/6")], vec![q("1")]]).unwrap();
        assert_eq!(a, b);
        assert!(a.contains_unit());
        let c = TraceRange::new(&l, &[vec![q("2")]]).unwrap();
        assert!(!c.contains_unit());
    }

    #[test]
    fn three_torus_pair_agrees() {
        let b = IrrationalBasis::new([("theta", crate::torus::golden_theta())]).unwrap();
        let e23 = build_affine_furstenberg_invariant(
            &TorusMap::ji_furstenberg(b.clone(), "theta", 2, 3).unwrap(),
            "theta",
        )
        .unwrap();
        let e32 = build_affine_furstenberg_invariant(
            &TorusMap::ji_furstenberg(b.clone(), "theta", 3, 2).unwrap(),
            "theta",
        )
        .unwrap();
        let e61 = build_affine_furstenberg_invariant(
            &TorusMap::ji_furstenberg(b, "theta", 6, 1).unwrap(),
            "theta",
        )
        .unwrap();
        assert_eq!(e23.k0, FgAbGroup::from_cyclic_orders(4, [2i64, 3]));
        assert_eq!(e23.trace_range.to_string(), "Z + thetaZ");
        assert!(invariants_equivalent(&e23, &e32, &BasisMatch::Strict).unwrap().equivalent);
        assert!(invariants_equivalent(&e23, &e61, &BasisMatch::Strict).unwrap().equivalent);
    }

    #[test]
    fn perturbation_does_not_change_invariant() {
        let b = IrrationalBasis::new([("theta", crate::torus::golden_theta())]).unwrap();
        let h1 = TorusMap::perturbed_skew(b.clone(), "theta", None).unwrap();
        let h2 = TorusMap::perturbed_skew(b, "theta", Some(TrigPoly::cos(vec![1, 0], 0.1))).unwrap();
        let e1 = build_affine_furstenberg_invariant(&h1, "theta").unwrap();
        let e2 = build_affine_furstenberg_invariant(&h2, "theta").unwrap();
        assert_eq!(e1, e2);
    }

    #[test]
    fn rejects_bad_furstenberg_inputs() {
        let b = IrrationalBasis::new([("theta", 0.3)]).unwrap();
        let rot = TorusMap::rotation(b.clone(), &["theta", "theta"]).unwrap();
        assert!(build_affine_furstenberg_invariant(&rot, "theta").is_err());
        let rational = TorusMap::new(
            Some(b.clone()),
            Translation::Symbolic(vec![vec![q("1/3"), q("0")], vec![q("0"), q("0")]]),
            IntMatrix::from_rows(&[[1, 0], [1, 1]]),
            Vec::new(),
        )
        .unwrap();
        assert!(build_affine_furstenberg_invariant(&rational, "theta").is_err());
        let float = TorusMap::float_rotation(&[0.3]).unwrap();
        assert!(build_rotation_invariant(&float).is_err());
    }

    #[test]
    fn putnam_ranges() {
        let b = basis2();
        let ab = build_putnam_invariant(&b, "alpha", "beta").unwrap();
        let ba = build_putnam_invariant(&b, "beta", "alpha").unwrap();
        assert_eq!(ab.k0, FgAbGroup::free(3));
        assert_eq!(ab.k1, FgAbGroup::free(3));
        assert_eq!(ab.trace_range, ba.trace_range);
        let other = IrrationalBasis::new([("alpha2", 0.1), ("beta2", 0.2)]).unwrap();
        let e = build_putnam_invariant(&other, "alpha2", "beta2").unwrap();
        assert_ne!(ab.trace_range, e.trace_range);
        assert!(invariants_equivalent(&ab, &e, &BasisMatch::Strict).is_err());
        let r = invariants_equivalent(&ab, &e, &BasisMatch::Union).unwrap();
        assert!(!r.equivalent && !r.trace_range_match && r.k0_match);
        let rename: BTreeMap<String, String> = [("alpha2", "alpha"), ("beta2", "beta")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        assert!(invariants_equivalent(&ab, &e, &BasisMatch::Rename(rename)).unwrap().equivalent);
    }

    #[test]
    fn rotations_by_independent_angles_differ() {
        let b = basis2();
        let r1 = build_rotation_invariant(&TorusMap::rotation(b.clone(), &["alpha"]).unwrap()).unwrap();
        let r2 = build_rotation_invariant(&TorusMap::rotation(b.clone(), &["beta"]).unwrap()).unwrap();
        let rep = invariants_equivalent(&r1, &r2, &BasisMatch::Strict).unwrap();
        assert!(!rep.equivalent && rep.k0_match && !rep.trace_range_match);
        // 1 - alpha generates the same range as alpha
        let flipped = TorusMap::new(
            Some(b.clone()),
            Translation::Symbolic(vec![vec![q("1"), q("-1"), q("0")]]),
            IntMatrix::identity(1),
            Vec::new(),
        )
        .unwrap();
        let r3 = build_rotation_invariant(&flipped).unwrap();
        assert!(invariants_equivalent(&r1, &r3, &BasisMatch::Strict).unwrap().equivalent);
        assert!(invariants_equivalent(&r1, &r1, &BasisMatch::Strict).unwrap().equivalent);
    }
}
