//! Growth of derivatives of iterates, `ρ_m(h^n)`, and a polynomial/exponential
//! classifier for the resulting profiles.
//!
//! `ρ_m(h) = max_i Σ_{|α| = m} ‖D^α h̃_i‖_∞` for the lift `h̃`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{invalid, unsupported, Result};
use crate::fgab::IntMatrix;
use crate::torus::{reduce_mod1, CircleDiffeo, TorusMap};
use crate::trig::{SupEstimate, TrigPoly};

/// Default sup-norm grid per axis.
pub fn default_grid(dim: usize) -> usize {
    if dim <= 2 {
        1 << 10
    } else {
        1 << 5
    }
}

/// A smooth self-map of `(R/Z)^d` given by a lift with periodic derivative.
pub trait SmoothLift {
    fn dim(&self) -> usize;
    fn lift(&self, x: &[f64]) -> Vec<f64>;
    fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>>;
}

impl SmoothLift for TorusMap {
    fn dim(&self) -> usize {
        TorusMap::dim(self)
    }

    fn lift(&self, x: &[f64]) -> Vec<f64> {
        TorusMap::lift(self, x)
    }

    fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        TorusMap::jacobian(self, x)
    }
}

impl SmoothLift for CircleDiffeo {
    fn dim(&self) -> usize {
        1
    }

    fn lift(&self, x: &[f64]) -> Vec<f64> {
        vec![CircleDiffeo::lift(self, x[0])]
    }

    fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        vec![vec![self.derivative(x[0])]]
    }
}

fn linear_power(map: &TorusMap, n: i64) -> Result<IntMatrix> {
    if !map.is_affine() {
        return unsupported("exact growth needs an affine map");
    }
    let base = if n < 0 {
        map.linear_part().unimodular_inverse()?
    } else {
        map.linear_part().clone()
    };
    base.pow(n.unsigned_abs())
}

/// `ρ_1(h^n)` for an affine map: the largest absolute row sum of the linear part of
/// the `n`-th lift. Higher `ρ_m` vanish for affine maps.
pub fn rho1_exact_affine(map: &TorusMap, n: i64) -> Result<BigInt> {
    Ok(linear_power(map, n)?.max_abs_row_sum())
}

/// Numerical `ρ_1(h^n)`: for each Jacobian entry of the `n`-th lift, the maximum over a
/// uniform grid with `grid` points per axis, then summed along rows.
pub fn rho1_numeric(map: &dyn SmoothLift, n: u64, grid: usize) -> Result<f64> {
    let d = map.dim();
    if grid == 0 {
        return invalid("grid must be positive");
    }
    let total = grid
        .checked_pow(d as u32)
        .filter(|&t| t <= 1 << 24)
        .ok_or_else(|| crate::Error::ResourceLimit(format!("grid {grid}^{d} too large")))?;
    let mut sup = vec![vec![0.0f64; d]; d];
    let mut x0 = vec![0.0; d];
    for p in 0..total {
        let mut rem = p;
        for a in (0..d).rev() {
            x0[a] = (rem % grid) as f64 / grid as f64;
            rem /= grid;
        }
        let mut prod: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let mut x = x0.clone();
        for _ in 0..n {
            let j = map.jacobian(&x);
            prod = (0..d)
                .map(|i| {
                    (0..d)
                        .map(|c| (0..d).map(|k| j[i][k] * prod[k][c]).sum())
                        .collect()
                })
                .collect();
            x = map.lift(&x).into_iter().map(reduce_mod1).collect();
        }
        for i in 0..d {
            for c in 0..d {
                sup[i][c] = sup[i][c].max(prod[i][c].abs());
            }
        }
    }
    Ok(sup
        .iter()
        .map(|row| row.iter().sum::<f64>())
        .fold(0.0, f64::max))
}

/// Derivatives of the iterates of `(x, y) ↦ (x + θ, y + x + r(x))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SkewDerivative {
    pub m: u32,
    pub n: u64,
    /// `sup_x |D_1^m (h̃^n)_2|`
    pub derivative_sup: SupEstimate,
    /// `ρ_m(h^n)` built from `derivative_sup.estimate`
    pub rho_m: f64,
}

/// Exact derivatives of the second component of the `n`-th lift of a perturbed skew:
/// `D_1 (h̃^n)_2 = n + Σ_{k<n} r'(x + kθ)` and `D_1^m (h̃^n)_2 = Σ_{k<n} r^{(m)}(x + kθ)`.
/// The orbit sum of each Fourier mode is a geometric series, so the derivative is
/// itself a trigonometric polynomial in `x` and its sup-norm is taken directly.
pub fn rhom_perturbed_skew(map: &TorusMap, m: u32, n: u64, grid: usize) -> Result<SkewDerivative> {
    if m == 0 {
        return invalid("derivative order must be at least 1");
    }
    let skew = IntMatrix::from_rows(&[[1, 0], [1, 1]]);
    if map.dim() != 2 || *map.linear_part() != skew || !map.perturbations()[0].is_zero() {
        return unsupported("need a map of the form (x + θ, y + x + r(x))");
    }
    let theta = map.translation_f64()[0];
    let r = &map.perturbations()[1];
    let rm = r.derivative_multi(&[m as usize, 0]);
    let mut terms = Vec::new();
    for (k, c) in rm.terms() {
        let j = k[0];
        let phase = j as f64 * theta;
        // Σ_{k<n} e^{2πi j k θ}
        let q = crate::trig::unit_phase(phase);
        let sum = if (q - 1.0).norm() < 1e-14 {
            num_complex::Complex64::new(n as f64, 0.0)
        } else {
            (num_complex::Complex64::new(1.0, 0.0) - crate::trig::unit_phase(phase * n as f64))
                / (num_complex::Complex64::new(1.0, 0.0) - q)
        };
        terms.push((vec![j], c * sum));
    }
    let mut orbit_sum = TrigPoly::from_terms(1, terms)?;
    if m == 1 {
        orbit_sum = orbit_sum.add(&TrigPoly::constant(
            1,
            num_complex::Complex64::new(n as f64, 0.0),
        ));
    }
    let derivative_sup = orbit_sum.sup_norm(grid);
    // row 1 contributes 1 (m = 1) or 0; row 2 adds |D_2| = 1 when m = 1
    let rho_m = if m == 1 {
        derivative_sup.estimate + 1.0
    } else {
        derivative_sup.estimate
    };
    Ok(SkewDerivative {
        m,
        n,
        derivative_sup,
        rho_m,
    })
}

/// Polynomial in `n` with rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    pub coeffs: Vec<BigRational>,
}

impl Polynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    pub fn eval(&self, n: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * n + c)
    }

    /// Interpolates through `(x_i, y_i)` by divided differences.
    pub fn interpolate(points: &[(BigRational, BigRational)]) -> Polynomial {
        let k = points.len();
        let mut dd: Vec<BigRational> = points.iter().map(|p| p.1.clone()).collect();
        for level in 1..k {
            for i in (level..k).rev() {
                dd[i] = (&dd[i] - &dd[i - 1]) / (&points[i].0 - &points[i - level].0);
            }
        }
        // expand the Newton form
        let mut coeffs = vec![BigRational::zero(); k.max(1)];
        for i in (0..k).rev() {
            // coeffs = coeffs * (n - x_i) + dd[i]
            let xi = &points[i].0;
            let mut next = vec![BigRational::zero(); coeffs.len()];
            for (d, c) in coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if d + 1 < next.len() {
                    next[d + 1] += c;
                }
                next[d] -= c * xi;
            }
            next[0] += &dd[i];
            coeffs = next;
        }
        let mut p = Polynomial { coeffs };
        p.coeffs.truncate(p.degree() + 1);
        p
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (d, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mono = match d {
                0 => String::new(),
                1 => "n".to_string(),
                _ => format!("n^{d}"),
            };
            let coeff = if d > 0 && c.abs().is_one() {
                if c.is_negative() { "-".to_string() } else { String::new() }
            } else if d > 0 && !c.is_integer() {
                format!("({c})")
            } else {
                c.to_string()
            };
            parts.push(format!("{coeff}{mono}"));
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", parts.join(" + ").replace("+ -", "- "))
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            coefficients: Vec<String>,
            display: String,
        }
        Repr {
            coefficients: self.coeffs.iter().map(|c| c.to_string()).collect(),
            display: self.to_string(),
        }
        .serialize(s)
    }
}

/// Closed form of `n ↦ ρ_1(h^n)` valid for `n >= valid_from`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactGrowth {
    pub polynomial: Polynomial,
    pub valid_from: u64,
}

fn is_unipotent(m: &IntMatrix) -> bool {
    let d = m.rows();
    m.checked_sub(&IntMatrix::identity(d))
        .and_then(|n| n.pow(d as u64))
        .map(|p| p.is_zero())
        .unwrap_or(false)
}

/// For a unipotent linear part the entries of `M^n` are polynomials of degree `< d` in
/// `n`, so `ρ_1(h^n)` is eventually one of them. The candidate is interpolated on a
/// window and checked on further points.
pub fn exact_growth_polynomial(map: &TorusMap) -> Result<Option<ExactGrowth>> {
    if !map.is_affine() {
        return unsupported("exact growth needs an affine map");
    }
    if !is_unipotent(map.linear_part()) {
        return Ok(None);
    }
    let d = map.dim() as u64;
    let value = |n: u64| -> Result<BigRational> {
        Ok(BigRational::from_integer(rho1_exact_affine(map, n as i64)?))
    };
    let mut start = 0u64;
    while start <= 1 << 12 {
        let pts: Vec<(BigRational, BigRational)> = (start..=start + d)
            .map(|n| Ok((BigRational::from_integer(n.into()), value(n)?)))
            .collect::<Result<_>>()?;
        let poly = Polynomial::interpolate(&pts);
        let checks = (start + d + 1..start + 3 * d + 3).chain([2 * start + 17, 5 * start + 101]);
        let mut ok = true;
        for n in checks {
            if poly.eval(&BigRational::from_integer(n.into())) != value(n)? {
                ok = false;
                break;
            }
        }
        if ok {
            let mut from = start;
            while from > 0
                && poly.eval(&BigRational::from_integer((from - 1).into())) == value(from - 1)?
            {
                from -= 1;
            }
            return Ok(Some(ExactGrowth {
                polynomial: poly,
                valid_from: from,
            }));
        }
        start = if start == 0 { 1 } else { start * 2 };
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthMethod {
    Exact,
    JacobianNumeric,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthProfile {
    pub dim: usize,
    pub samples: Vec<(u64, f64)>,
    pub exact_polynomial: Option<ExactGrowth>,
    pub method: GrowthMethod,
    pub grid_per_axis: Option<usize>,
    /// Set for affine maps, where the degree cap `d - 1` applies.
    pub affine: bool,
}

impl GrowthProfile {
    pub fn new(dim: usize, samples: Vec<(u64, f64)>, method: GrowthMethod) -> Result<Self> {
        if samples.windows(2).any(|w| w[0].0 >= w[1].0) {
            return invalid("sample indices must be strictly increasing");
        }
        if samples.iter().any(|s| !(s.1 >= 0.0) || !s.1.is_finite()) {
            return invalid("sample values must be finite and nonnegative");
        }
        Ok(GrowthProfile {
            dim,
            samples,
            exact_polynomial: None,
            method,
            grid_per_axis: None,
            affine: false,
        })
    }
}

/// `ρ_1(h^n)` for each `n`, exactly.
pub fn profile_exact_affine(map: &TorusMap, ns: &[u64]) -> Result<GrowthProfile> {
    let samples = ns
        .iter()
        .map(|&n| {
            let v = rho1_exact_affine(map, n as i64)?;
            Ok((n, v.to_f64().unwrap_or(f64::INFINITY)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut p = GrowthProfile::new(map.dim(), samples, GrowthMethod::Exact)?;
    p.exact_polynomial = exact_growth_polynomial(map)?;
    p.affine = true;
    Ok(p)
}

pub fn profile_numeric(map: &dyn SmoothLift, ns: &[u64], grid: usize, affine: bool) -> Result<GrowthProfile> {
    let samples = ns
        .iter()
        .map(|&n| Ok((n, rho1_numeric(map, n, grid)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut p = GrowthProfile::new(map.dim(), samples, GrowthMethod::JacobianNumeric)?;
    p.grid_per_axis = Some(grid);
    p.affine = affine;
    Ok(p)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum GrowthClass {
    Polynomial { degree: u32 },
    Exponential { rate: f64 },
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthVerdict {
    pub class: GrowthClass,
    /// Slope of `log ρ` against `log(1 + n)` over the upper half of the samples.
    pub fitted_degree: f64,
    pub polynomial_rms: f64,
    pub exponential_rms: f64,
    pub exponential_rate: f64,
    /// `d - 1`, reported for affine profiles.
    pub degree_cap: Option<u32>,
    pub within_cap: Option<bool>,
}

/// Exponential must fit this many times better to win.
pub const EXPONENTIAL_MARGIN: f64 = 10.0;
pub const MIN_EXPONENTIAL_RATE: f64 = 1.05;
pub const MAX_POLYNOMIAL_RMS: f64 = 0.25;

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let icpt = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - icpt - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, icpt, rms)
}

pub fn classify_growth(profile: &GrowthProfile) -> Result<GrowthVerdict> {
    let s = &profile.samples;
    if s.len() < 8 {
        return invalid("need at least 8 samples");
    }
    if s[0].0 == 0 {
        return invalid("sample indices must be positive");
    }
    if s.last().unwrap().0 < 8 * s[0].0 {
        return invalid("samples must span at least a factor of 8 in n");
    }
    if s.iter().any(|p| p.1 <= 0.0) {
        return invalid("values must be positive for log fits");
    }
    let ln_n: Vec<f64> = s.iter().map(|p| (1.0 + p.0 as f64).ln()).collect();
    let n: Vec<f64> = s.iter().map(|p| p.0 as f64).collect();
    let ln_v: Vec<f64> = s.iter().map(|p| p.1.ln()).collect();
    let (_, _, poly_rms) = least_squares(&ln_n, &ln_v);
    let (exp_slope, _, exp_rms) = least_squares(&n, &ln_v);
    let half = s.len() / 2;
    let (tail_slope, _, _) = least_squares(&ln_n[half..], &ln_v[half..]);
    let rate = exp_slope.exp();
    let class = if exp_rms * EXPONENTIAL_MARGIN < poly_rms && rate > MIN_EXPONENTIAL_RATE {
        GrowthClass::Exponential { rate }
    } else if poly_rms <= MAX_POLYNOMIAL_RMS {
        GrowthClass::Polynomial {
            degree: tail_slope.round().max(0.0) as u32,
        }
    } else {
        GrowthClass::Inconclusive
    };
    let degree_cap = profile
        .affine
        .then(|| profile.dim.saturating_sub(1) as u32);
    let within_cap = match (&class, degree_cap) {
        (GrowthClass::Polynomial { degree }, Some(cap)) => Some(*degree <= cap),
        (_, Some(_)) => Some(false),
        _ => None,
    };
    Ok(GrowthVerdict {
        class,
        fitted_degree: tail_slope,
        polynomial_rms: poly_rms,
        exponential_rms: exp_rms,
        exponential_rate: rate,
        degree_cap,
        within_cap,
    })
}

/// `n` from `lo` to `hi` spaced geometrically, `count` distinct values.
pub fn geometric_samples(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    let mut out: Vec<u64> = (0..count)
        .map(|i| {
            let t = i as f64 / (count.max(2) - 1) as f64;
            ((lo as f64) * ((hi as f64) / (lo as f64)).powf(t)).round() as u64
        })
        .collect();
    out.dedup();
    out
}
