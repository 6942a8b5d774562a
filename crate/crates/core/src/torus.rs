//! Affine and perturbed skew-product diffeomorphisms of `(R/Z)^d`.
//!
//! A map is described by its lift `h̃(x) = t + Mx + (r_1(x), ..., r_d(x))` with `M`
//! integral and unimodular and each `r_i` a real trigonometric polynomial in the
//! coordinates before `i`. Translations are either floats or exact rational vectors
//! over a declared basis `(1, θ, β, ...)` whose rational independence is the caller's
//! assertion; the float values of the basis are only used to drive orbits.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, unsupported, Error, Result};
use crate::fgab::IntMatrix;
use crate::trig::TrigPoly;

/// Reduces a lifted coordinate into `[0, 1)`. Ties of the rounding step go to even,
/// so the result is bit-reproducible.
pub fn reduce_mod1(y: f64) -> f64 {
    let mut r = y - y.round_ties_even();
    if r < 0.0 {
        r += 1.0;
    }
    if r >= 1.0 {
        r = 0.0;
    }
    r
}

/// Distance on `R/Z`.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = reduce_mod1(a - b);
    d.min(1.0 - d)
}

/// Labels and float values of a rational basis. The first element is always `"1"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrrationalBasis {
    labels: Vec<String>,
    values: Vec<f64>,
}

impl IrrationalBasis {
    /// `(1, irrationals...)`; the label `"1"` is implicit and must not be repeated.
    pub fn new<S: Into<String>>(irrationals: impl IntoIterator<Item = (S, f64)>) -> Result<Self> {
        let mut labels = vec!["1".to_string()];
        let mut values = vec![1.0];
        for (l, v) in irrationals {
            let l = l.into();
            if labels.contains(&l) {
                return invalid(format!("duplicate basis label {l:?}"));
            }
            labels.push(l);
            values.push(v);
        }
        Ok(IrrationalBasis { labels, values })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Float shadow of an exact coefficient vector.
    pub fn shadow(&self, coeffs: &[BigRational]) -> f64 {
        coeffs
            .iter()
            .zip(&self.values)
            .map(|(c, v)| c.to_f64().unwrap_or(f64::NAN) * v)
            .sum()
    }

    /// The unit vector of `label`.
    pub fn unit(&self, label: &str) -> Result<Vec<BigRational>> {
        let i = self
            .index_of(label)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown basis label {label:?}")))?;
        let mut v = vec![BigRational::zero(); self.len()];
        v[i] = BigRational::one();
        Ok(v)
    }
}

/// The golden-mean rotation number `(√5 − 1)/2`, used as a default θ.
pub fn golden_theta() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// Translation part of an affine lift.
#[derive(Clone, Debug, PartialEq)]
pub enum Translation {
    /// One coefficient vector per coordinate, over the map's basis.
    Symbolic(Vec<Vec<BigRational>>),
    Float(Vec<f64>),
}

impl Translation {
    fn dim(&self) -> usize {
        match self {
            Translation::Symbolic(v) => v.len(),
            Translation::Float(v) => v.len(),
        }
    }

    pub fn to_f64(&self, basis: Option<&IrrationalBasis>) -> Vec<f64> {
        match self {
            Translation::Float(v) => v.clone(),
            Translation::Symbolic(v) => {
                let b = basis.expect("symbolic translation without basis");
                v.iter().map(|c| b.shadow(c)).collect()
            }
        }
    }

    fn zero_like(&self) -> Translation {
        match self {
            Translation::Symbolic(v) => Translation::Symbolic(
                v.iter()
                    .map(|c| vec![BigRational::zero(); c.len()])
                    .collect(),
            ),
            Translation::Float(v) => Translation::Float(vec![0.0; v.len()]),
        }
    }

    /// `self + M * other`
    fn add_mapped(&self, m: &IntMatrix, other: &Translation) -> Translation {
        let d = m.rows();
        match (self, other) {
            (Translation::Symbolic(a), Translation::Symbolic(b)) => {
                let mut out = a.clone();
                for i in 0..d {
                    for j in 0..d {
                        let e = BigRational::from_integer(m[(i, j)].clone());
                        if e.is_zero() {
                            continue;
                        }
                        for (o, c) in out[i].iter_mut().zip(&b[j]) {
                            *o += &e * c;
                        }
                    }
                }
                Translation::Symbolic(out)
            }
            (Translation::Float(a), Translation::Float(b)) => {
                let mf = m.to_f64_rows();
                Translation::Float(
                    (0..d)
                        .map(|i| a[i] + (0..d).map(|j| mf[i][j] * b[j]).sum::<f64>())
                        .collect(),
                )
            }
            _ => panic!("mixed translation kinds"),
        }
    }

    fn negate(&self) -> Translation {
        match self {
            Translation::Symbolic(v) => {
                Translation::Symbolic(v.iter().map(|c| c.iter().map(|x| -x).collect()).collect())
            }
            Translation::Float(v) => Translation::Float(v.iter().map(|x| -x).collect()),
        }
    }
}

/// Exact lift `x ↦ translation + linear·x` of an affine map or its iterates.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineLift {
    pub translation: Translation,
    pub linear: IntMatrix,
}

impl AffineLift {
    /// `self ∘ other`
    pub fn compose(&self, other: &AffineLift) -> AffineLift {
        AffineLift {
            translation: self.translation.add_mapped(&self.linear, &other.translation),
            linear: &self.linear * &other.linear,
        }
    }

    pub fn identity_like(&self) -> AffineLift {
        AffineLift {
            translation: self.translation.zero_like(),
            linear: IntMatrix::identity(self.linear.rows()),
        }
    }

    pub fn inverse(&self) -> AffineLift {
        let inv = self
            .linear
            .unimodular_inverse()
            .expect("affine lift with non-unimodular linear part");
        let zero = self.translation.zero_like();
        AffineLift {
            translation: zero.add_mapped(&inv, &self.translation.negate()),
            linear: inv,
        }
    }

    pub fn pow(&self, n: i64) -> AffineLift {
        let mut base = if n < 0 { self.inverse() } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = self.identity_like();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.compose(&base);
            }
        }
        acc
    }
}

/// A point of `(R/Z)^d` with coordinates in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint(Vec<f64>);

impl TorusPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        TorusPoint(coords.into_iter().map(reduce_mod1).collect())
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Maximum of the coordinatewise circle distances.
    pub fn distance(&self, other: &TorusPoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| circle_distance(a, b))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TorusMap {
    dim: usize,
    basis: Option<IrrationalBasis>,
    translation: Translation,
    linear: IntMatrix,
    perturbations: Vec<TrigPoly>,
    // grads[i][j] = D_j r_i for j < i
    grads: Vec<Vec<TrigPoly>>,
    // float shadows, computed once
    t_f64: Vec<f64>,
    m_f64: Vec<Vec<f64>>,
}

impl TorusMap {
    /// Validates and builds a map. `perturbations` may be empty (all zero) or hold one
    /// real polynomial per coordinate, the `i`-th depending only on coordinates `< i`.
    pub fn new(
        basis: Option<IrrationalBasis>,
        translation: Translation,
        linear: IntMatrix,
        perturbations: Vec<TrigPoly>,
    ) -> Result<Self> {
        let dim = linear.rows();
        if dim == 0 || !linear.is_square() {
            return invalid("linear part must be a nonempty square matrix");
        }
        if translation.dim() != dim {
            return invalid("translation dimension does not match linear part");
        }
        let det = linear.det()?;
        if !(det.is_one() || (-det).is_one()) {
            return invalid("linear part must have determinant ±1");
        }
        if let Translation::Symbolic(v) = &translation {
            let Some(b) = &basis else {
                return invalid("symbolic translation requires a basis");
            };
            if v.iter().any(|c| c.len() != b.len()) {
                return invalid("symbolic coefficient vector length does not match basis");
            }
        }
        let perturbations = if perturbations.is_empty() {
            vec![TrigPoly::zero(dim); dim]
        } else {
            perturbations
        };
        if perturbations.len() != dim {
            return invalid("need exactly one perturbation per coordinate");
        }
        for (i, r) in perturbations.iter().enumerate() {
            if r.dim() != dim {
                return invalid(format!("perturbation {i} has wrong dimension"));
            }
            if !r.is_real(1e-12) {
                return invalid(format!("perturbation {i} is not real-valued"));
            }
            if !r.depends_only_on_first(i) {
                return invalid(format!(
                    "perturbation {i} may only depend on coordinates before it"
                ));
            }
        }
        let perturbed = perturbations.iter().any(|r| !r.is_zero());
        if perturbed {
            let lower = (0..dim).all(|i| (i + 1..dim).all(|j| linear[(i, j)].is_zero()));
            if !lower {
                return invalid("perturbed maps need a lower-triangular linear part");
            }
        }
        let t_f64 = translation.to_f64(basis.as_ref());
        let m_f64 = linear.to_f64_rows();
        let grads = perturbations
            .iter()
            .enumerate()
            .map(|(i, r)| (0..i).map(|j| r.derivative(j)).collect())
            .collect();
        Ok(TorusMap {
            dim,
            basis,
            translation,
            linear,
            perturbations,
            grads,
            t_f64,
            m_f64,
        })
    }

    /// Rotation `x ↦ x + θ` by the given basis labels, one per coordinate.
    pub fn rotation(basis: IrrationalBasis, labels: &[&str]) -> Result<Self> {
        let t = labels
            .iter()
            .map(|l| basis.unit(l))
            .collect::<Result<Vec<_>>>()?;
        let d = labels.len();
        TorusMap::new(
            Some(basis),
            Translation::Symbolic(t),
            IntMatrix::identity(d),
            Vec::new(),
        )
    }

    /// Float rotation by the given angles.
    pub fn float_rotation(angles: &[f64]) -> Result<Self> {
        TorusMap::new(
            None,
            Translation::Float(angles.to_vec()),
            IntMatrix::identity(angles.len()),
            Vec::new(),
        )
    }

    /// Affine Furstenberg transformation
    /// `(x_1, ..., x_d) ↦ (x_1 + θ, x_2 + a_1 x_1, ..., x_d + a_{d-1} x_{d-1})`.
    pub fn affine_furstenberg(basis: IrrationalBasis, theta: &str, skew: &[i64]) -> Result<Self> {
        let d = skew.len() + 1;
        let mut m = IntMatrix::identity(d);
        for (i, &a) in skew.iter().enumerate() {
            m[(i + 1, i)] = BigInt::from(a);
        }
        let mut t = vec![vec![BigRational::zero(); basis.len()]; d];
        t[0] = basis.unit(theta)?;
        TorusMap::new(Some(basis), Translation::Symbolic(t), m, Vec::new())
    }

    /// The three-torus map `(x + θ, y + m x, z + n y)`.
    pub fn ji_furstenberg(basis: IrrationalBasis, theta: &str, m: i64, n: i64) -> Result<Self> {
        if m == 0 || n == 0 {
            return invalid("skew parameters must be nonzero");
        }
        Self::affine_furstenberg(basis, theta, &[m, n])
    }

    /// Two-torus skew product `(x + θ, y + x + r(x))`; `r = 0` gives the affine map.
    pub fn perturbed_skew(basis: IrrationalBasis, theta: &str, r: Option<TrigPoly>) -> Result<Self> {
        let mut t = vec![vec![BigRational::zero(); basis.len()]; 2];
        t[0] = basis.unit(theta)?;
        let pert = match r {
            Some(r) => {
                if r.dim() != 2 {
                    return invalid("perturbation must be a polynomial on the 2-torus");
                }
                vec![TrigPoly::zero(2), r]
            }
            None => Vec::new(),
        };
        TorusMap::new(
            Some(basis),
            Translation::Symbolic(t),
            IntMatrix::from_rows(&[[1, 0], [1, 1]]),
            pert,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> Option<&IrrationalBasis> {
        self.basis.as_ref()
    }

    pub fn translation(&self) -> &Translation {
        &self.translation
    }

    pub fn translation_f64(&self) -> &[f64] {
        &self.t_f64
    }

    pub fn linear_part(&self) -> &IntMatrix {
        &self.linear
    }

    pub fn linear_f64(&self) -> &[Vec<f64>] {
        &self.m_f64
    }

    pub fn perturbations(&self) -> &[TrigPoly] {
        &self.perturbations
    }

    pub fn is_affine(&self) -> bool {
        self.perturbations.iter().all(TrigPoly::is_zero)
    }

    /// The same map with the perturbation dropped.
    pub fn affine_part(&self) -> TorusMap {
        TorusMap {
            perturbations: vec![TrigPoly::zero(self.dim); self.dim],
            grads: vec![Vec::new(); self.dim],
            ..self.clone()
        }
    }

    pub fn affine_lift(&self) -> Result<AffineLift> {
        if !self.is_affine() {
            return unsupported("map has a nonzero perturbation");
        }
        Ok(AffineLift {
            translation: self.translation.clone(),
            linear: self.linear.clone(),
        })
    }

    /// The lift `h̃(x)`, without reduction.
    pub fn lift(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| {
                let lin: f64 = (0..self.dim).map(|j| self.m_f64[i][j] * x[j]).sum();
                let r = &self.perturbations[i];
                let pert = if r.is_zero() { 0.0 } else { r.eval_re(x) };
                self.t_f64[i] + lin + pert
            })
            .collect()
    }

    /// Jacobian matrix of the lift at `x`.
    pub fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut j = self.m_f64.clone();
        for (i, grads) in self.grads.iter().enumerate() {
            for (row_entry, g) in j[i].iter_mut().zip(grads) {
                if !g.is_zero() {
                    *row_entry += g.eval_re(x);
                }
            }
        }
        j
    }

    fn check_point(&self, p: &TorusPoint) -> Result<()> {
        if p.dim() != self.dim {
            return invalid(format!(
                "point has dimension {}, map has dimension {}",
                p.dim(),
                self.dim
            ));
        }
        Ok(())
    }

    pub fn apply(&self, p: &TorusPoint) -> Result<TorusPoint> {
        self.check_point(p)?;
        Ok(TorusPoint::new(self.lift(p.coords())))
    }

    /// Inverse map, solved coordinate by coordinate for perturbed maps.
    pub fn apply_inverse(&self, p: &TorusPoint) -> Result<TorusPoint> {
        self.check_point(p)?;
        let y = p.coords();
        let d = self.dim;
        if self.is_affine() {
            let inv = self.linear.unimodular_inverse()?.to_f64_rows();
            let shifted: Vec<f64> = (0..d).map(|i| y[i] - self.t_f64[i]).collect();
            let x = (0..d)
                .map(|i| (0..d).map(|j| inv[i][j] * shifted[j]).sum())
                .collect();
            return Ok(TorusPoint::new(x));
        }
        let mut x = vec![0.0; d];
        for i in 0..d {
            let lower: f64 = (0..i).map(|j| self.m_f64[i][j] * x[j]).sum();
            let r = self.perturbations[i].eval_re(&x);
            x[i] = (y[i] - self.t_f64[i] - lower - r) / self.m_f64[i][i];
        }
        Ok(TorusPoint::new(x))
    }
}

/// Exact lift of `h^n` for an affine map; negative `n` uses the inverse.
pub fn iterate_affine_lift(map: &TorusMap, n: i64) -> Result<AffineLift> {
    Ok(map.affine_lift()?.pow(n))
}

/// Birkhoff average `(1/N) Σ_{k<N} f(h^k(start))`.
pub fn ergodic_average(
    map: &TorusMap,
    f: &TrigPoly,
    iterations: usize,
    start: &TorusPoint,
) -> Result<Complex64> {
    if iterations == 0 {
        return invalid("iterations must be positive");
    }
    if f.dim() != map.dim() {
        return invalid("observable dimension does not match the map");
    }
    map.check_point(start)?;
    let mut p = start.clone();
    let mut sum = Complex64::new(0.0, 0.0);
    for _ in 0..iterations {
        sum += f.eval(p.coords());
        p = TorusPoint::new(map.lift(p.coords()));
    }
    Ok(sum / iterations as f64)
}

/// Average lift increment of coordinate `coord` (0-based) along the lifted orbit of
/// `start`, reduced mod 1.
///
/// The lifted orbit is tracked as a reduced float point plus an exact integer offset, so
/// the integer parts of the increments are summed exactly.
pub fn winding_average(
    map: &TorusMap,
    coord: usize,
    iterations: usize,
    start: &TorusPoint,
) -> Result<f64> {
    let d = map.dim();
    if coord >= d {
        return invalid(format!("coordinate {coord} out of range for dimension {d}"));
    }
    if iterations == 0 {
        return invalid("iterations must be positive");
    }
    map.check_point(start)?;
    let row_is_unit = (0..d).all(|j| {
        let e = &map.linear[(coord, j)];
        if j == coord {
            e.is_one()
        } else {
            e.is_zero()
        }
    });
    if row_is_unit && map.perturbations[coord].is_zero() {
        // the increment is the constant translation
        return Ok(reduce_mod1(map.t_f64[coord]));
    }
    let m_int: Vec<Vec<i128>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| map.linear[(i, j)].to_i128().expect("linear part too large"))
                .collect()
        })
        .collect();
    let mut p = start.coords().to_vec();
    let mut offset = vec![0i128; d];
    let mut frac_sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut int_sum: i128 = 0;
    let n = iterations as i128;
    for _ in 0..iterations {
        let y = map.lift(&p);
        let inc = y[coord] - p[coord];
        // Kahan summation of the bounded part
        let t = frac_sum + (inc - comp);
        comp = (t - frac_sum) - (inc - comp);
        frac_sum = t;
        let moffset: Vec<i128> = (0..d)
            .map(|i| (0..d).map(|j| m_int[i][j] * offset[j]).sum())
            .collect();
        int_sum = (int_sum + moffset[coord] - offset[coord]).rem_euclid(n);
        let np: Vec<f64> = y.iter().map(|&v| reduce_mod1(v)).collect();
        for i in 0..d {
            offset[i] = moffset[i] + (y[i] - np[i]).round() as i128;
        }
        p = np;
    }
    let avg = frac_sum / iterations as f64 + int_sum as f64 / iterations as f64;
    Ok(reduce_mod1(avg))
}

/// Finite-horizon estimate of `liminf d(h^n z1, h^n z2)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistalityEstimate {
    pub min_distance: f64,
    pub argmin: usize,
    pub window_start: usize,
    pub window_end: usize,
}

pub fn distality_probe(
    map: &TorusMap,
    z1: &TorusPoint,
    z2: &TorusPoint,
    horizon: usize,
) -> Result<DistalityEstimate> {
    map.check_point(z1)?;
    map.check_point(z2)?;
    if z1 == z2 {
        return invalid("distality probe needs two distinct points");
    }
    let lo = horizon / 2;
    let (mut a, mut b) = (z1.clone(), z2.clone());
    let mut best = DistalityEstimate {
        min_distance: f64::INFINITY,
        argmin: lo,
        window_start: lo,
        window_end: horizon,
    };
    for n in 0..=horizon {
        if n >= lo {
            let dist = a.distance(&b);
            if dist < best.min_distance {
                best.min_distance = dist;
                best.argmin = n;
            }
        }
        if n < horizon {
            a = TorusPoint::new(map.lift(a.coords()));
            b = TorusPoint::new(map.lift(b.coords()));
        }
    }
    Ok(best)
}

/// Continuous map of the plane that collapses `{0} × [−1, 1]` to the origin and is the
/// identity outside `[−1, 1] × [−2, 2]`.
pub fn collapse_f0(x: f64, y: f64) -> (f64, f64) {
    let ax = x.abs();
    if ax >= 1.0 {
        (x, y)
    } else if y.abs() <= 1.0 {
        (x, ax * y)
    } else if y >= 1.0 && y <= 2.0 - ax {
        (x, ax + 2.0 * (y - 1.0))
    } else if y <= -1.0 && y >= -(2.0 - ax) {
        (x, -ax + 2.0 * (y + 1.0))
    } else {
        (x, y)
    }
}

/// A circle diffeomorphism `t ↦ t + shift + g(t)` with `g` a real trigonometric
/// polynomial and `1 + g' > 0`. Unlike [`TorusMap`] its perturbation depends on the
/// coordinate itself, so it has no closed-form inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleDiffeo {
    shift: f64,
    g: TrigPoly,
    g_prime: TrigPoly,
}

impl CircleDiffeo {
    pub fn new(shift: f64, g: TrigPoly) -> Result<Self> {
        if g.dim() != 1 || !g.is_real(1e-12) {
            return invalid("g must be a real trigonometric polynomial in one variable");
        }
        let g_prime = g.derivative(0);
        // 1 + g' >= 1 - Σ|c_k| 2π|k| is a cheap certificate; fall back to a fine grid
        let l1 = g_prime.l1_norm();
        if l1 >= 1.0 {
            let min = (0..4096)
                .map(|i| 1.0 + g_prime.eval_re(&[i as f64 / 4096.0]))
                .fold(f64::INFINITY, f64::min);
            if min <= 0.0 {
                return invalid("derivative of the lift must stay positive");
            }
        }
        Ok(CircleDiffeo { shift, g, g_prime })
    }

    /// `t + a sin(2πt)`, fixed point 0 with derivative `1 + 2πa`.
    pub fn sine_perturbation(a: f64) -> Result<Self> {
        CircleDiffeo::new(0.0, TrigPoly::sin(vec![1], a))
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn g(&self) -> &TrigPoly {
        &self.g
    }

    pub fn lift(&self, t: f64) -> f64 {
        t + self.shift + self.g.eval_re(&[t])
    }

    pub fn derivative(&self, t: f64) -> f64 {
        1.0 + self.g_prime.eval_re(&[t])
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScalarRepr {
    Float(f64),
    Symbolic(BTreeMap<String, String>),
}

#[derive(Serialize, Deserialize)]
struct BasisRepr {
    labels: Vec<String>,
    values: Vec<f64>,
}

/// JSON map definition file.
///
/// ```json
/// {
///   "dimension": 3,
///   "basis": {"labels": ["theta"], "values": [0.6180339887498949]},
///   "translation": [{"theta": "1"}, {}, {}],
///   "linear_part": [[1, 0, 0], [2, 1, 0], [0, 3, 1]],
///   "perturbations": []
/// }
/// ```
///
/// Symbolic translation entries map basis labels (including `"1"`) to rational strings.
/// Setting `"kind": "circle_diffeo"` instead describes a [`CircleDiffeo`] with fields
/// `shift` and `g`.
#[derive(Serialize, Deserialize)]
pub struct MapFile {
    #[serde(default = "default_kind")]
    kind: String,
    #[serde(default)]
    dimension: Option<usize>,
    #[serde(default)]
    basis: Option<BasisRepr>,
    #[serde(default)]
    translation: Vec<ScalarRepr>,
    #[serde(default)]
    linear_part: Option<IntMatrix>,
    #[serde(default)]
    perturbations: Vec<TrigPoly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g: Option<TrigPoly>,
}

fn default_kind() -> String {
    "torus".to_string()
}

/// Either kind of map a definition file can describe.
#[derive(Clone, Debug, PartialEq)]
pub enum MapDefinition {
    Torus(TorusMap),
    Circle(CircleDiffeo),
}

impl MapFile {
    pub fn into_definition(self) -> Result<MapDefinition> {
        match self.kind.as_str() {
            "torus" => self.into_torus().map(MapDefinition::Torus),
            "circle_diffeo" => {
                let g = self
                    .g
                    .ok_or_else(|| Error::InvalidArgument("circle_diffeo needs g".into()))?;
                CircleDiffeo::new(self.shift.unwrap_or(0.0), g).map(MapDefinition::Circle)
            }
            k => invalid(format!("unknown map kind {k:?}")),
        }
    }

    fn into_torus(self) -> Result<TorusMap> {
        let linear = self
            .linear_part
            .ok_or_else(|| Error::InvalidArgument("missing linear_part".into()))?;
        if let Some(d) = self.dimension {
            if d != linear.rows() {
                return invalid("dimension does not match linear_part");
            }
        }
        let basis = match self.basis {
            Some(b) => {
                if b.labels.len() != b.values.len() {
                    return invalid("basis labels and values differ in length");
                }
                Some(IrrationalBasis::new(b.labels.into_iter().zip(b.values))?)
            }
            None => None,
        };
        let all_float = self.translation.iter().all(|s| matches!(s, ScalarRepr::Float(_)));
        let all_sym = self.translation.iter().all(|s| matches!(s, ScalarRepr::Symbolic(_)));
        let translation = if all_float && !self.translation.is_empty() || self.translation.is_empty() && basis.is_none() {
            let v: Vec<f64> = self
                .translation
                .iter()
                .map(|s| match s {
                    ScalarRepr::Float(x) => *x,
                    ScalarRepr::Symbolic(_) => unreachable!(),
                })
                .collect();
            Translation::Float(if v.is_empty() { vec![0.0; linear.rows()] } else { v })
        } else if all_sym {
            let b = basis
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("symbolic translation needs a basis".into()))?;
            let mut coords = Vec::new();
            for s in &self.translation {
                let ScalarRepr::Symbolic(map) = s else { unreachable!() };
                let mut v = vec![BigRational::zero(); b.len()];
                for (label, val) in map {
                    let i = b.index_of(label).ok_or_else(|| {
                        Error::InvalidArgument(format!("unknown basis label {label:?}"))
                    })?;
                    v[i] = val.trim().parse::<BigRational>().map_err(|_| {
                        Error::InvalidArgument(format!("bad rational literal {val:?}"))
                    })?;
                }
                coords.push(v);
            }
            if coords.is_empty() {
                coords = vec![vec![BigRational::zero(); b.len()]; linear.rows()];
            }
            Translation::Symbolic(coords)
        } else {
            return invalid("translation mixes float and symbolic entries");
        };
        TorusMap::new(basis, translation, linear, self.perturbations)
    }
}

impl From<&TorusMap> for MapFile {
    fn from(m: &TorusMap) -> Self {
        let translation = match &m.translation {
            Translation::Float(v) => v.iter().map(|&x| ScalarRepr::Float(x)).collect(),
            Translation::Symbolic(v) => {
                let b = m.basis.as_ref().expect("symbolic map without basis");
                v.iter()
                    .map(|c| {
                        ScalarRepr::Symbolic(
                            c.iter()
                                .zip(b.labels())
                                .filter(|(x, _)| !x.is_zero())
                                .map(|(x, l)| (l.clone(), x.to_string()))
                                .collect(),
                        )
                    })
                    .collect()
            }
        };
        MapFile {
            kind: default_kind(),
            dimension: Some(m.dim),
            basis: m.basis.as_ref().map(|b| BasisRepr {
                labels: b.labels[1..].to_vec(),
                values: b.values[1..].to_vec(),
            }),
            translation,
            linear_part: Some(m.linear.clone()),
            perturbations: if m.is_affine() {
                Vec::new()
            } else {
                m.perturbations.clone()
            },
            shift: None,
            g: None,
        }
    }
}

impl From<&CircleDiffeo> for MapFile {
    fn from(c: &CircleDiffeo) -> Self {
        MapFile {
            kind: "circle_diffeo".to_string(),
            dimension: Some(1),
            basis: None,
            translation: Vec::new(),
            linear_part: None,
            perturbations: Vec::new(),
            shift: Some(c.shift),
            g: Some(c.g.clone()),
        }
    }
}

impl MapDefinition {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: MapFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("map file: {e}")))?;
        file.into_definition()
    }

    pub fn to_json(&self) -> String {
        let file = match self {
            MapDefinition::Torus(m) => MapFile::from(m),
            MapDefinition::Circle(c) => MapFile::from(c),
        };
        serde_json::to_string_pretty(&file).expect("map file serialises")
    }
}
