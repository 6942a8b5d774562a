//! Finitely supported elements of the smooth crossed product `S(Z, C^∞(T^d), h)` for
//! affine `h`.
//!
//! Conventions: `(αf)(x) = f(h^{-1}(x))`,
//! `(s·t)(k) = Σ_j s(j) · α^j(t(k - j))` and `s*(k) = α^k(conj s(-k))`.
//! With these, `u = δ_1 ⊗ 1` satisfies `u f u* = α(f)`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, unsupported, Result};
use crate::torus::{iterate_affine_lift, TorusMap};
use crate::trig::{SupEstimate, TrigPoly};

pub const CONVOLUTION_CONVENTION: &str =
    "(s*t)(k) = sum_j s(j) alpha^j(t(k-j)), alpha(f) = f o h^-1, s*(k) = alpha^k(conj s(-k))";

/// Upper limit on grid points used for one sup-norm.
pub const MAX_SUP_GRID_POINTS: usize = 1 << 22;

#[derive(Clone, Debug, PartialEq)]
pub struct CrossedElement {
    map: Arc<TorusMap>,
    terms: BTreeMap<i64, TrigPoly>,
}

/// Index `(n, d)` of `‖s‖_{n,d} = Σ_k (1 + |k|)^d ‖s(k)‖_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeminormIndex {
    pub n: u32,
    pub d: u32,
}

fn check_affine(map: &TorusMap) -> Result<()> {
    if !map.is_affine() {
        return unsupported("crossed product arithmetic needs an affine map");
    }
    Ok(())
}

/// `f ∘ h^{-j}` for affine `h`.
fn alpha_power(map: &TorusMap, f: &TrigPoly, j: i64) -> Result<TrigPoly> {
    if j == 0 {
        return Ok(f.clone());
    }
    let lift = iterate_affine_lift(map, -j)?;
    let t = lift.translation.to_f64(map.basis());
    let rows = lift
        .linear
        .to_i64_rows()
        .ok_or_else(|| crate::Error::ResourceLimit("iterate too large for i64".into()))?;
    Ok(f.compose_affine(&rows, &t))
}

impl CrossedElement {
    pub fn new(map: Arc<TorusMap>, terms: BTreeMap<i64, TrigPoly>) -> Result<Self> {
        check_affine(&map)?;
        for f in terms.values() {
            if f.dim() != map.dim() {
                return invalid("coefficient dimension does not match the map");
            }
        }
        let terms = terms.into_iter().filter(|(_, f)| !f.is_zero()).collect();
        Ok(CrossedElement { map, terms })
    }

    pub fn zero(map: Arc<TorusMap>) -> Result<Self> {
        Self::new(map, BTreeMap::new())
    }

    /// `δ_k ⊗ f`
    pub fn delta(map: Arc<TorusMap>, k: i64, f: TrigPoly) -> Result<Self> {
        Self::new(map, BTreeMap::from([(k, f)]))
    }

    pub fn unit(map: Arc<TorusMap>) -> Result<Self> {
        let d = map.dim();
        Self::delta(map, 0, TrigPoly::constant(d, Complex64::new(1.0, 0.0)))
    }

    pub fn map(&self) -> &Arc<TorusMap> {
        &self.map
    }

    pub fn terms(&self) -> &BTreeMap<i64, TrigPoly> {
        &self.terms
    }

    pub fn coeff(&self, k: i64) -> TrigPoly {
        self.terms
            .get(&k)
            .cloned()
            .unwrap_or_else(|| TrigPoly::zero(self.map.dim()))
    }

    /// Smallest window `[lo, hi]` containing the support.
    pub fn support_window(&self) -> Option<(i64, i64)> {
        Some((*self.terms.keys().next()?, *self.terms.keys().next_back()?))
    }

    fn same_map(&self, other: &CrossedElement) -> Result<()> {
        if !Arc::ptr_eq(&self.map, &other.map) && self.map != other.map {
            return invalid("elements belong to crossed products by different maps");
        }
        Ok(())
    }

    pub fn add(&self, other: &CrossedElement) -> Result<CrossedElement> {
        self.same_map(other)?;
        let mut terms = self.terms.clone();
        for (k, f) in &other.terms {
            let e = terms
                .entry(*k)
                .or_insert_with(|| TrigPoly::zero(self.map.dim()));
            *e = e.add(f);
        }
        CrossedElement::new(self.map.clone(), terms)
    }

    pub fn scale(&self, c: Complex64) -> CrossedElement {
        CrossedElement {
            map: self.map.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, f)| (*k, f.scale(c)))
                .filter(|(_, f)| !f.is_zero())
                .collect(),
        }
    }

    /// Largest coefficient difference over all `k` and frequencies.
    pub fn distance(&self, other: &CrossedElement) -> f64 {
        let keys: BTreeSet<i64> = self.terms.keys().chain(other.terms.keys()).copied().collect();
        keys.into_iter()
            .map(|k| self.coeff(k).max_coeff_distance(&other.coeff(k)))
            .fold(0.0, f64::max)
    }
}

pub fn multiply(s: &CrossedElement, t: &CrossedElement) -> Result<CrossedElement> {
    s.same_map(t)?;
    let map = &s.map;
    let mut out: BTreeMap<i64, TrigPoly> = BTreeMap::new();
    for (&j, sj) in &s.terms {
        for (&l, tl) in &t.terms {
            let moved = alpha_power(map, tl, j)?;
            let e = out
                .entry(j + l)
                .or_insert_with(|| TrigPoly::zero(map.dim()));
            *e = e.add(&sj.mul(&moved));
        }
    }
    CrossedElement::new(map.clone(), out)
}

pub fn adjoint(s: &CrossedElement) -> Result<CrossedElement> {
    let mut out = BTreeMap::new();
    for (&k, f) in &s.terms {
        out.insert(-k, alpha_power(&s.map, &f.conj(), -k)?);
    }
    CrossedElement::new(s.map.clone(), out)
}

fn multinomial_words(dim: usize, n: u32) -> Vec<(Vec<usize>, f64)> {
    // multi-indices of total order n with the number of derivation words producing each
    fn rec(dim: usize, left: u32, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() + 1 == dim {
            cur.push(left as usize);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in 0..=left {
            cur.push(a as usize);
            rec(dim, left - a, cur, out);
            cur.pop();
        }
    }
    let mut idx = Vec::new();
    if dim == 0 {
        return if n == 0 { vec![(Vec::new(), 1.0)] } else { Vec::new() };
    }
    rec(dim, n, &mut Vec::new(), &mut idx);
    let fact = |m: usize| (1..=m).map(|v| v as f64).product::<f64>();
    idx.into_iter()
        .map(|a| {
            let c = fact(n as usize) / a.iter().map(|&v| fact(v)).product::<f64>();
            (a, c)
        })
        .collect()
}

fn capped_grid(grid: usize, dim: usize) -> usize {
    if dim == 0 {
        return grid;
    }
    let mut cap = (MAX_SUP_GRID_POINTS as f64).powf(1.0 / dim as f64).round() as usize;
    while cap.saturating_pow(dim as u32) > MAX_SUP_GRID_POINTS {
        cap -= 1;
    }
    grid.min(cap)
}

/// Sup-norm with the automatic grid refinement limited to [`MAX_SUP_GRID_POINTS`];
/// the upper bound stays valid on a coarser grid.
fn bounded_sup(f: &TrigPoly, grid: usize) -> SupEstimate {
    let need = 8 * f.max_abs_frequency().max(1) as usize;
    f.sup_norm_on_grid(capped_grid(grid.max(need), f.dim()))
}

/// `‖f‖_n = Σ over derivation words X_{k_n}⋯X_{k_1} of ‖X_{k_n}⋯X_{k_1} f‖_∞` with the
/// coordinate vector fields; words with the same letters give the same derivative.
pub fn seminorm_f(f: &TrigPoly, n: u32, grid: usize) -> SupEstimate {
    let mut est = 0.0;
    let mut ub = 0.0;
    let mut used = 0;
    for (alpha, count) in multinomial_words(f.dim(), n) {
        let df = f.derivative_multi(&alpha);
        let s = bounded_sup(&df, grid);
        est += count * s.estimate;
        ub += count * s.upper_bound;
        used = used.max(s.grid_per_axis);
    }
    SupEstimate {
        estimate: est,
        upper_bound: ub,
        grid_per_axis: used,
    }
}

pub fn seminorm_cp(s: &CrossedElement, idx: SeminormIndex, grid: usize) -> SupEstimate {
    let mut est = 0.0;
    let mut ub = 0.0;
    let mut used = 0;
    for (&k, f) in &s.terms {
        let w = (1.0 + k.unsigned_abs() as f64).powi(idx.d as i32);
        let v = seminorm_f(f, idx.n, grid);
        est += w * v.estimate;
        ub += w * v.upper_bound;
        used = used.max(v.grid_per_axis);
    }
    SupEstimate {
        estimate: est,
        upper_bound: ub,
        grid_per_axis: used,
    }
}

/// `Σ_{m ≤ n} ‖s‖_{m,d}`, the combination that controls products.
pub fn combined_seminorm(s: &CrossedElement, idx: SeminormIndex, grid: usize) -> f64 {
    (0..=idx.n)
        .map(|m| seminorm_cp(s, SeminormIndex { n: m, d: idx.d }, grid).estimate)
        .sum()
}

/// Random element with support in `[-width, width]` (at most `support` terms), each
/// coefficient a sum of at most `freq_terms` modes with frequencies in `[-max_freq,
/// max_freq]^d` and coefficients in the unit square.
pub fn random_element<R: Rng>(
    map: Arc<TorusMap>,
    rng: &mut R,
    width: i64,
    support: usize,
    freq_terms: usize,
    max_freq: i64,
) -> Result<CrossedElement> {
    let d = map.dim();
    let mut terms = BTreeMap::new();
    for _ in 0..rng.gen_range(1..=support.max(1)) {
        let k = rng.gen_range(-width..=width);
        let modes = (0..rng.gen_range(1..=freq_terms.max(1)))
            .map(|_| {
                let freq: Vec<i64> = (0..d).map(|_| rng.gen_range(-max_freq..=max_freq)).collect();
                let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                (freq, c)
            })
            .collect::<Vec<_>>();
        terms.insert(k, TrigPoly::from_terms(d, modes)?);
    }
    CrossedElement::new(map, terms)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WidthRatio {
    pub width: i64,
    pub max_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubmultiplicativityReport {
    pub index: SeminormIndex,
    pub samples: usize,
    /// `max ‖s·t‖_{n,d} / (‖s‖_{n,d} ‖t‖_{n,d})`
    pub max_ratio_single: f64,
    /// The same ratio for `Σ_{m ≤ n} ‖·‖_{m,d}`.
    pub max_ratio_combined: f64,
    pub by_width: Vec<WidthRatio>,
    /// Log-log slope of the combined ratio against the support width.
    pub width_exponent: Option<f64>,
    pub convention: &'static str,
    pub truncation: String,
}

/// Ratios of seminorms of products to products of seminorms over random pairs, for
/// support widths `1..=max_width`.
pub fn submultiplicativity_probe<R: Rng>(
    map: Arc<TorusMap>,
    idx: SeminormIndex,
    samples: usize,
    max_width: i64,
    grid: usize,
    rng: &mut R,
) -> Result<SubmultiplicativityReport> {
    check_affine(&map)?;
    if samples == 0 || max_width < 1 {
        return invalid("need at least one sample and width >= 1");
    }
    let mut single: f64 = 0.0;
    let mut combined: f64 = 0.0;
    let mut by_width = Vec::new();
    let per_width = samples.div_ceil(max_width as usize);
    let mut taken = 0;
    for w in 1..=max_width {
        let mut wmax: f64 = 0.0;
        for _ in 0..per_width {
            if taken == samples {
                break;
            }
            taken += 1;
            let s = random_element(map.clone(), rng, w, 3, 2, 2)?;
            let t = random_element(map.clone(), rng, w, 3, 2, 2)?;
            let st = multiply(&s, &t)?;
            let ns = seminorm_cp(&s, idx, grid).estimate;
            let nt = seminorm_cp(&t, idx, grid).estimate;
            if ns > 0.0 && nt > 0.0 {
                single = single.max(seminorm_cp(&st, idx, grid).estimate / (ns * nt));
            }
            let cs = combined_seminorm(&s, idx, grid);
            let ct = combined_seminorm(&t, idx, grid);
            if cs > 0.0 && ct > 0.0 {
                let r = combined_seminorm(&st, idx, grid) / (cs * ct);
                combined = combined.max(r);
                wmax = wmax.max(r);
            }
        }
        by_width.push(WidthRatio {
            width: w,
            max_ratio: wmax,
        });
    }
    let pts: Vec<(f64, f64)> = by_width
        .iter()
        .filter(|w| w.max_ratio > 0.0)
        .map(|w| ((w.width as f64).ln(), w.max_ratio.ln()))
        .collect();
    let width_exponent = (pts.len() >= 2).then(|| {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        sxy / sxx
    });
    Ok(SubmultiplicativityReport {
        index: idx,
        samples: taken,
        max_ratio_single: single,
        max_ratio_combined: combined,
        by_width,
        width_exponent,
        convention: CONVOLUTION_CONVENTION,
        truncation: format!("finite support within [-{max_width}, {max_width}]"),
    })
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    k: i64,
    f: TrigPoly,
}

impl CrossedElement {
    /// `[{"k": 1, "f": {"dim": 1, "terms": [{"k": [1], "c": [1.0, 0.0]}]}}, ...]`
    pub fn to_json(&self) -> serde_json::Value {
        let v: Vec<TermRepr> = self
            .terms
            .iter()
            .map(|(k, f)| TermRepr { k: *k, f: f.clone() })
            .collect();
        serde_json::to_value(v).expect("terms serialise")
    }

    pub fn from_json(map: Arc<TorusMap>, value: &serde_json::Value) -> Result<Self> {
        let v: Vec<TermRepr> = serde_json::from_value(value.clone())
            .map_err(|e| crate::Error::InvalidArgument(format!("element literal: {e}")))?;
        let mut terms: BTreeMap<i64, TrigPoly> = BTreeMap::new();
        for t in v {
            if terms.insert(t.k, t.f).is_some() {
                return invalid(format!("duplicate index {}", t.k));
            }
        }
        CrossedElement::new(map, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::{golden_theta, IrrationalBasis};
    use crate::trig::unit_phase;
    use std::f64::consts::TAU;

    fn rotation() -> Arc<TorusMap> {
        let b = IrrationalBasis::new([("theta", golden_theta())]).unwrap();
        Arc::new(TorusMap::rotation(b, &["theta"]).unwrap())
    }

    fn e1() -> TrigPoly {
        TrigPoly::monomial(vec![1], Complex64::new(1.0, 0.0))
    }

    #[test]
    fn unit_law() {
        let m = rotation();
        let one = CrossedElement::unit(m.clone()).unwrap();
        let t = CrossedElement::delta(m.clone(), 2, e1()).unwrap();
        assert!(multiply(&one, &t).unwrap().distance(&t) < 1e-15);
        assert!(multiply(&t, &one).unwrap().distance(&t) < 1e-15);
        assert_eq!(adjoint(&one).unwrap(), one);
    }

    #[test]
    fn shift_picks_up_rotation_phase() {
        let m = rotation();
        let u = CrossedElement::delta(m.clone(), 1, TrigPoly::constant(1, Complex64::new(1.0, 0.0)))
            .unwrap();
        let uf = CrossedElement::delta(m.clone(), 1, e1()).unwrap();
        let p = multiply(&u, &uf).unwrap();
        assert_eq!(p.terms().len(), 1);
        let c = p.coeff(2).coeff(&[1]);
        assert!((c - unit_phase(-golden_theta())).norm() < 1e-15);
    }

    #[test]
    fn covariance() {
        let m = rotation();
        let u = CrossedElement::delta(m.clone(), 1, TrigPoly::constant(1, Complex64::new(1.0, 0.0)))
            .unwrap();
        let f = TrigPoly::cos(vec![2], 0.7).add(&e1());
        let uf = multiply(&u, &CrossedElement::delta(m.clone(), 0, f.clone()).unwrap()).unwrap();
        let conj = multiply(&uf, &adjoint(&u).unwrap()).unwrap();
        let expected = f.compose_affine(&[vec![1]], &[-golden_theta()]);
        assert!(conj
            .distance(&CrossedElement::delta(m, 0, expected).unwrap())
            < 1e-12);
    }

    #[test]
    fn adjoint_of_function() {
        let m = rotation();
        let f = CrossedElement::delta(m.clone(), 0, e1()).unwrap();
        let fs = adjoint(&f).unwrap();
        assert_eq!(fs.coeff(0), e1().conj());
    }

    #[test]
    fn seminorm_values() {
        let m = rotation();
        let one = TrigPoly::constant(1, Complex64::new(1.0, 0.0));
        assert_eq!(seminorm_f(&one, 1, 64).estimate, 0.0);
        assert_eq!(seminorm_f(&e1(), 0, 64).estimate, 1.0);
        assert!((seminorm_f(&e1(), 1, 64).estimate - TAU).abs() < 1e-12);
        let unit = CrossedElement::unit(m.clone()).unwrap();
        assert_eq!(seminorm_cp(&unit, SeminormIndex { n: 0, d: 5 }, 64).estimate, 1.0);
        let u = CrossedElement::delta(m.clone(), 1, one).unwrap();
        assert_eq!(seminorm_cp(&u, SeminormIndex { n: 0, d: 1 }, 64).estimate, 2.0);
        let uf = CrossedElement::delta(m, 1, e1()).unwrap();
        let v = seminorm_cp(&uf, SeminormIndex { n: 1, d: 1 }, 64);
        assert!((v.estimate - 2.0 * TAU).abs() < 1e-12);
    }

    #[test]
    fn word_counts() {
        // d^n words in total
        for (d, n) in [(1, 3), (2, 2), (3, 3)] {
            let total: f64 = multinomial_words(d, n).iter().map(|w| w.1).sum();
            assert_eq!(total, (d as f64).powi(n as i32));
        }
    }

    #[test]
    fn json_round_trip() {
        let m = rotation();
        let s = CrossedElement::delta(m.clone(), -3, e1()).unwrap();
        let back = CrossedElement::from_json(m, &s.to_json()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_perturbed_maps() {
        let b = IrrationalBasis::new([("theta", golden_theta())]).unwrap();
        let h2 = TorusMap::perturbed_skew(b, "theta", Some(TrigPoly::cos(vec![1, 0], 0.1))).unwrap();
        assert!(CrossedElement::zero(Arc::new(h2)).is_err());
    }
}
