//! Trigonometric polynomials on `(R/Z)^d`: `f(x) = Σ_k c_k e^{2πi<k,x>}`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub type Frequency = Vec<i64>;

#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    dim: usize,
    coeffs: BTreeMap<Frequency, Complex64>,
}

/// `e^{2πi t}` with the argument reduced first, which keeps large phases accurate.
pub fn unit_phase(t: f64) -> Complex64 {
    let r = t - t.round();
    Complex64::from_polar(1.0, TAU * r)
}

fn dot(k: &[i64], x: &[f64]) -> f64 {
    k.iter().zip(x).map(|(&a, &b)| a as f64 * b).sum()
}

/// Result of [`TrigPoly::sup_norm`]: `estimate <= sup|f| <= upper_bound` up to rounding.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SupEstimate {
    pub estimate: f64,
    pub upper_bound: f64,
    pub grid_per_axis: usize,
}

impl TrigPoly {
    pub fn zero(dim: usize) -> Self {
        TrigPoly {
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        Self::monomial(vec![0; dim], c)
    }

    pub fn monomial(freq: Frequency, c: Complex64) -> Self {
        let mut p = Self::zero(freq.len());
        p.add_term(freq, c);
        p
    }

    /// Builds a polynomial, summing repeated frequencies.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Frequency, Complex64)>,
    {
        let mut p = Self::zero(dim);
        for (k, c) in terms {
            if k.len() != dim {
                return invalid(format!(
                    "frequency {k:?} does not have dimension {dim}"
                ));
            }
            p.add_term(k, c);
        }
        Ok(p)
    }

    /// Like [`TrigPoly::from_terms`], but additionally checks `c_{-k} = conj(c_k)`.
    pub fn from_real_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Frequency, Complex64)>,
    {
        let p = Self::from_terms(dim, terms)?;
        if !p.is_real(1e-12) {
            return invalid("coefficients are not conjugate-symmetric");
        }
        Ok(p)
    }

    /// `amp * cos(2π <k, x>)`
    pub fn cos(freq: Frequency, amp: f64) -> Self {
        let neg: Frequency = freq.iter().map(|v| -v).collect();
        let mut p = Self::zero(freq.len());
        p.add_term(freq, Complex64::new(amp / 2.0, 0.0));
        p.add_term(neg, Complex64::new(amp / 2.0, 0.0));
        p
    }

    /// `amp * sin(2π <k, x>)`
    pub fn sin(freq: Frequency, amp: f64) -> Self {
        let neg: Frequency = freq.iter().map(|v| -v).collect();
        let mut p = Self::zero(freq.len());
        p.add_term(freq, Complex64::new(0.0, -amp / 2.0));
        p.add_term(neg, Complex64::new(0.0, amp / 2.0));
        p
    }

    fn add_term(&mut self, k: Frequency, c: Complex64) {
        let e = self.coeffs.entry(k.clone()).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
        if e.re == 0.0 && e.im == 0.0 {
            self.coeffs.remove(&k);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: &[i64]) -> Complex64 {
        self.coeffs
            .get(k)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Terms in lexicographic frequency order.
    pub fn terms(&self) -> impl Iterator<Item = (&Frequency, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|(k, c)| {
            let neg: Frequency = k.iter().map(|v| -v).collect();
            (self.coeff(&neg) - c.conj()).norm() <= tol * (1.0 + c.norm())
        })
    }

    /// True when no term involves coordinates `>= n`.
    pub fn depends_only_on_first(&self, n: usize) -> bool {
        self.coeffs.keys().all(|k| k[n.min(k.len())..].iter().all(|&v| v == 0))
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(k, c)| c * unit_phase(dot(k, x)))
            .sum()
    }

    /// Real part of [`TrigPoly::eval`]; used for real-valued perturbations.
    pub fn eval_re(&self, x: &[f64]) -> f64 {
        self.eval(x).re
    }

    /// Partial derivative along coordinate `axis` of the lifted function.
    pub fn derivative(&self, axis: usize) -> TrigPoly {
        let mut p = Self::zero(self.dim);
        for (k, c) in &self.coeffs {
            if k[axis] != 0 {
                p.coeffs
                    .insert(k.clone(), c * Complex64::new(0.0, TAU * k[axis] as f64));
            }
        }
        p
    }

    /// Mixed partial derivative with the given multiplicity per axis.
    pub fn derivative_multi(&self, orders: &[usize]) -> TrigPoly {
        let mut p = Self::zero(self.dim);
        for (k, c) in &self.coeffs {
            let mut f = *c;
            for (axis, &o) in orders.iter().enumerate() {
                f *= Complex64::new(0.0, TAU * k[axis] as f64).powu(o as u32);
            }
            if f.re != 0.0 || f.im != 0.0 {
                p.coeffs.insert(k.clone(), f);
            }
        }
        p
    }

    pub fn conj(&self) -> TrigPoly {
        let mut p = Self::zero(self.dim);
        for (k, c) in &self.coeffs {
            p.coeffs.insert(k.iter().map(|v| -v).collect(), c.conj());
        }
        p
    }

    pub fn scale(&self, s: Complex64) -> TrigPoly {
        let mut p = Self::zero(self.dim);
        for (k, c) in &self.coeffs {
            p.add_term(k.clone(), c * s);
        }
        p
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut p = self.clone();
        for (k, c) in &other.coeffs {
            p.add_term(k.clone(), *c);
        }
        p
    }

    pub fn sub(&self, other: &TrigPoly) -> TrigPoly {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Pointwise product (convolution of coefficients).
    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut p = Self::zero(self.dim);
        for (k1, c1) in &self.coeffs {
            for (k2, c2) in &other.coeffs {
                let k: Frequency = k1.iter().zip(k2).map(|(a, b)| a + b).collect();
                p.add_term(k, c1 * c2);
            }
        }
        p
    }

    /// `f(Mx + t)` for an integer matrix `M` given by rows; frequencies move to `Mᵀk`.
    pub fn compose_affine(&self, linear: &[Vec<i64>], translation: &[f64]) -> TrigPoly {
        let d = self.dim;
        let mut p = Self::zero(d);
        for (k, c) in &self.coeffs {
            let mut nk = vec![0i64; d];
            for (j, v) in nk.iter_mut().enumerate() {
                *v = (0..d).map(|i| linear[i][j] * k[i]).sum();
            }
            p.add_term(nk, c * unit_phase(dot(k, translation)));
        }
        p
    }

    /// Largest `|k_j|` over all terms and axes.
    pub fn max_abs_frequency(&self) -> i64 {
        self.coeffs
            .keys()
            .flat_map(|k| k.iter().map(|v| v.abs()))
            .max()
            .unwrap_or(0)
    }

    /// `Σ |c_k|`, an upper bound for the sup-norm.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    /// Sup-norm of `|f|` from a uniform grid, refined locally around the best grid
    /// points, with an upper bound that holds for the true supremum.
    ///
    /// `grid` is the requested number of points per axis; it is raised to at least
    /// eight samples per period of the highest frequency.
    pub fn sup_norm(&self, grid: usize) -> SupEstimate {
        let need = 8 * self.max_abs_frequency().max(1) as usize;
        self.sup_norm_on_grid(grid.max(need))
    }

    /// [`TrigPoly::sup_norm`] on exactly `grid` points per axis.
    pub fn sup_norm_on_grid(&self, grid: usize) -> SupEstimate {
        let d = self.dim;
        if self.coeffs.is_empty() {
            return SupEstimate {
                estimate: 0.0,
                upper_bound: 0.0,
                grid_per_axis: 0,
            };
        }
        if d == 0 || self.coeffs.keys().all(|k| k.iter().all(|&v| v == 0)) {
            let v = self.coeff(&vec![0; d]).norm();
            return SupEstimate {
                estimate: v,
                upper_bound: v,
                grid_per_axis: 0,
            };
        }
        let g = grid.max(2);
        let total = g.pow(d as u32);
        let table: Vec<Complex64> = (0..g)
            .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / g as f64))
            .collect();
        let mut values = vec![Complex64::new(0.0, 0.0); total];
        let gi = g as i64;
        for (k, c) in &self.coeffs {
            let offsets: Vec<Vec<usize>> = k
                .iter()
                .map(|&ki| (0..gi).map(|j| (ki * j).rem_euclid(gi) as usize).collect())
                .collect();
            let mut idx = vec![0usize; d];
            for v in values.iter_mut() {
                let mut s = 0;
                for (a, &j) in idx.iter().enumerate() {
                    s += offsets[a][j];
                }
                *v += c * table[s % g];
                for a in (0..d).rev() {
                    idx[a] += 1;
                    if idx[a] < g {
                        break;
                    }
                    idx[a] = 0;
                }
            }
        }
        let mut order: Vec<usize> = (0..total).collect();
        let top = order.len().min(8);
        order.select_nth_unstable_by(top - 1, |&a, &b| {
            values[b].norm().total_cmp(&values[a].norm())
        });
        let grid_max = order[..top]
            .iter()
            .map(|&p| values[p].norm())
            .fold(0.0, f64::max);
        let mut best = grid_max;
        for &p in &order[..top] {
            let mut x: Vec<f64> = (0..d)
                .map(|a| ((p / g.pow((d - 1 - a) as u32)) % g) as f64 / g as f64)
                .collect();
            let mut fx = self.eval(&x).norm();
            let mut step = 1.0 / g as f64;
            while step > 1e-13 {
                let mut moved = false;
                for a in 0..d {
                    for sgn in [-1.0, 1.0] {
                        let old = x[a];
                        x[a] = old + sgn * step;
                        let f = self.eval(&x).norm();
                        if f > fx {
                            fx = f;
                            moved = true;
                        } else {
                            x[a] = old;
                        }
                    }
                }
                if !moved {
                    step *= 0.5;
                }
            }
            best = best.max(fx);
        }
        let lipschitz: f64 = self
            .coeffs
            .iter()
            .map(|(k, c)| c.norm() * TAU * k.iter().map(|v| v.unsigned_abs() as f64).sum::<f64>())
            .sum();
        let upper = (grid_max + lipschitz / (2.0 * g as f64)).min(self.l1_norm());
        SupEstimate {
            estimate: best.min(upper),
            upper_bound: upper.max(best),
            grid_per_axis: g,
        }
    }

    /// Coefficientwise distance `max_k |c_k - c'_k|`.
    pub fn max_coeff_distance(&self, other: &TrigPoly) -> f64 {
        self.coeffs
            .keys()
            .chain(other.coeffs.keys())
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    k: Frequency,
    c: [f64; 2],
}

/// JSON form: `{"dim": d, "terms": [{"k": [..], "c": [re, im]}, ...]}`.
#[derive(Serialize, Deserialize)]
pub struct TrigPolyRepr {
    pub dim: usize,
    #[serde(default)]
    terms: Vec<TermRepr>,
}

impl From<&TrigPoly> for TrigPolyRepr {
    fn from(p: &TrigPoly) -> Self {
        TrigPolyRepr {
            dim: p.dim,
            terms: p
                .coeffs
                .iter()
                .map(|(k, c)| TermRepr {
                    k: k.clone(),
                    c: [c.re, c.im],
                })
                .collect(),
        }
    }
}

impl TryFrom<TrigPolyRepr> for TrigPoly {
    type Error = crate::Error;
    fn try_from(r: TrigPolyRepr) -> Result<Self> {
        TrigPoly::from_terms(
            r.dim,
            r.terms
                .into_iter()
                .map(|t| (t.k, Complex64::new(t.c[0], t.c[1]))),
        )
    }
}

impl Serialize for TrigPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TrigPolyRepr::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for TrigPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = TrigPolyRepr::deserialize(d)?;
        TrigPoly::try_from(r).map_err(serde::de::Error::custom)
    }
}
