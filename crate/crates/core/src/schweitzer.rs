//! The Banach *-algebra `B_0 ⊂ C_0(N)^+` of sequences with `n[a(n) - λ(a)]` convergent,
//! normed by `‖a‖ = ‖a‖_∞ + ‖a‖_ω` where `‖a‖_ω = sup_n n|a(n) - λ(a)|`.
//!
//! Elements are represented as `a(n) = λ + Σ_j c_j n^{-j}` with finitely many `n` given
//! explicit values. This class is closed under the algebra operations, and both norms
//! are suprema of `|p(1/n)|` for a polynomial `p`, which a branch and bound over
//! `x = 1/n` encloses in an interval of prescribed width.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Width target of the norm enclosures.
pub const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchweitzerElement {
    lambda: Complex64,
    /// `c_1, ..., c_J`
    tail: Vec<Complex64>,
    exceptional: BTreeMap<u64, Complex64>,
}

/// A closed interval `[lo, hi]` of reals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

const ROUND: f64 = 8.0 * f64::EPSILON;

impl Interval {
    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Widened by a few ulps so that rounding in the enclosure itself is covered.
    fn outward(self) -> Self {
        Interval {
            lo: self.lo * (1.0 - ROUND) - f64::MIN_POSITIVE,
            hi: self.hi * (1.0 + ROUND) + f64::MIN_POSITIVE,
        }
    }

    pub fn add(self, o: Interval) -> Interval {
        Interval {
            lo: self.lo + o.lo,
            hi: self.hi + o.hi,
        }
        .outward()
    }

    /// Product of two nonnegative intervals.
    pub fn mul(self, o: Interval) -> Interval {
        Interval {
            lo: self.lo * o.lo,
            hi: self.hi * o.hi,
        }
        .outward()
    }

    /// Certainly `self <= o`.
    pub fn certainly_le(&self, o: &Interval) -> bool {
        self.outward().hi <= o.outward().lo
    }

    /// Certainly `self > o`: the only outcome counted as a violation of `self <= o`.
    pub fn certainly_gt(&self, o: &Interval) -> bool {
        self.outward().lo > o.outward().hi
    }

    pub fn overlaps(&self, o: &Interval) -> bool {
        let (a, b) = (self.outward(), o.outward());
        a.lo <= b.hi && b.lo <= a.hi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormReport {
    pub sup_norm: Interval,
    pub omega_norm: Interval,
    pub total: Interval,
}

fn poly_eval(p: &[Complex64], x: f64) -> Complex64 {
    p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
}

/// Taylor coefficients of `p` about `c`.
fn taylor_shift(p: &[Complex64], c: f64) -> Vec<Complex64> {
    let mut q = p.to_vec();
    let n = q.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            let t = q[j + 1] * c;
            q[j] += t;
        }
    }
    q
}

#[derive(Clone, Copy, PartialEq)]
enum Extremum {
    Sup,
    Inf,
}

/// Encloses `sup_{n >= from}` or `inf_{n >= from}` of `|p(1/n)|`.
fn extremum_over_integers(p: &[Complex64], from: u64, mode: Extremum, tol: f64) -> Interval {
    let limit = p.first().map_or(0.0, |c| c.norm());
    if p.iter().skip(1).all(|c| *c == Complex64::new(0.0, 0.0)) {
        return Interval::point(limit);
    }
    let value = |n: u64| poly_eval(p, 1.0 / n as f64).norm();
    // best attained (or approached) value so far
    let mut best = match mode {
        Extremum::Sup => limit.max(value(from)),
        Extremum::Inf => limit.min(value(from)),
    };
    let mut pruned_bound = best;
    let mut stack = vec![(0.0f64, 1.0 / from as f64)];
    let mut iterations = 0usize;
    while let Some((lo, hi)) = stack.pop() {
        iterations += 1;
        // integer points n with 1/n in [lo, hi]
        let n_min = ((1.0 / hi).ceil() as u64).max(from);
        let n_max = if lo == 0.0 { u64::MAX } else { (1.0 / lo).floor() as u64 };
        if n_min > n_max {
            continue;
        }
        if n_max - n_min <= 2 {
            for n in n_min..=n_max {
                let v = value(n);
                best = match mode {
                    Extremum::Sup => best.max(v),
                    Extremum::Inf => best.min(v),
                };
            }
            continue;
        }
        let c = 0.5 * (lo + hi);
        let r = 0.5 * (hi - lo);
        let t = taylor_shift(p, c);
        let spread: f64 = t
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, tj)| tj.norm() * r.powi(j as i32))
            .sum();
        let centre = t[0].norm();
        let n_mid = ((1.0 / c).round() as u64).clamp(n_min, n_max);
        let v = value(n_mid);
        best = match mode {
            Extremum::Sup => best.max(v),
            Extremum::Inf => best.min(v),
        };
        let done = match mode {
            Extremum::Sup => centre + spread <= best + tol,
            Extremum::Inf => (centre - spread).max(0.0) >= best - tol,
        };
        if done || iterations > 1_000_000 {
            pruned_bound = match mode {
                Extremum::Sup => pruned_bound.max(centre + spread),
                Extremum::Inf => pruned_bound.min((centre - spread).max(0.0)),
            };
            continue;
        }
        stack.push((lo, c));
        stack.push((c, hi));
    }
    let iv = match mode {
        Extremum::Sup => Interval {
            lo: best,
            hi: pruned_bound.max(best),
        },
        Extremum::Inf => Interval {
            lo: pruned_bound.min(best),
            hi: best,
        },
    };
    iv.outward()
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl SchweitzerElement {
    pub fn new(lambda: Complex64, tail: Vec<Complex64>, exceptional: BTreeMap<u64, Complex64>) -> Result<Self> {
        if exceptional.contains_key(&0) {
            return invalid("sequence indices start at 1");
        }
        let mut tail = tail;
        while tail.last() == Some(&Complex64::new(0.0, 0.0)) {
            tail.pop();
        }
        let mut a = SchweitzerElement {
            lambda,
            tail,
            exceptional,
        };
        // drop overrides that agree with the formula
        let formula: Vec<(u64, Complex64)> = a
            .exceptional
            .keys()
            .map(|&n| (n, a.formula(n)))
            .collect();
        for (n, v) in formula {
            if a.exceptional[&n] == v {
                a.exceptional.remove(&n);
            }
        }
        Ok(a)
    }

    pub fn constant(v: Complex64) -> Self {
        SchweitzerElement {
            lambda: v,
            tail: Vec::new(),
            exceptional: BTreeMap::new(),
        }
    }

    pub fn unit() -> Self {
        Self::constant(c(1.0))
    }

    /// `a(n) = 1/n`
    pub fn reciprocal() -> Self {
        SchweitzerElement {
            lambda: c(0.0),
            tail: vec![c(1.0)],
            exceptional: BTreeMap::new(),
        }
    }

    /// Real sequence `λ + Σ c_j n^{-j}`.
    pub fn real_tail(lambda: f64, tail: &[f64]) -> Self {
        Self::new(c(lambda), tail.iter().map(|&x| c(x)).collect(), BTreeMap::new())
            .expect("no overrides")
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    /// `ω(a) = lim n[a(n) - λ(a)]`, the first tail coefficient.
    pub fn omega(&self) -> Complex64 {
        self.tail.first().copied().unwrap_or(c(0.0))
    }

    pub fn tail(&self) -> &[Complex64] {
        &self.tail
    }

    pub fn exceptional(&self) -> &BTreeMap<u64, Complex64> {
        &self.exceptional
    }

    fn formula(&self, n: u64) -> Complex64 {
        let x = 1.0 / n as f64;
        self.lambda + x * poly_eval(&self.tail, x)
    }

    fn full_poly(&self) -> Vec<Complex64> {
        let mut p = vec![self.lambda];
        p.extend_from_slice(&self.tail);
        p
    }

    pub fn evaluate(&self, n: u64) -> Result<Complex64> {
        if n < 1 {
            return invalid("sequence indices start at 1");
        }
        Ok(self.exceptional.get(&n).copied().unwrap_or_else(|| self.formula(n)))
    }

    fn value(&self, n: u64) -> Complex64 {
        self.exceptional.get(&n).copied().unwrap_or_else(|| self.formula(n))
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.lambda.im == 0.0
            && self.tail.iter().all(|x| x.im == 0.0)
            && self.exceptional.values().all(|x| x.im == 0.0)
    }

    pub fn adjoint(&self) -> Self {
        SchweitzerElement {
            lambda: self.lambda.conj(),
            tail: self.tail.iter().map(|x| x.conj()).collect(),
            exceptional: self.exceptional.iter().map(|(k, v)| (*k, v.conj())).collect(),
        }
    }

    fn combine(&self, other: &Self, poly: Vec<Complex64>, op: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let lambda = poly[0];
        let tail = poly[1..].to_vec();
        let keys: Vec<u64> = self
            .exceptional
            .keys()
            .chain(other.exceptional.keys())
            .copied()
            .collect();
        let exceptional = keys
            .into_iter()
            .map(|n| (n, op(self.value(n), other.value(n))))
            .collect();
        Self::new(lambda, tail, exceptional).expect("indices inherited")
    }

    pub fn add(&self, other: &Self) -> Self {
        let (p, q) = (self.full_poly(), other.full_poly());
        let mut s = vec![c(0.0); p.len().max(q.len())];
        for (i, v) in p.iter().enumerate() {
            s[i] += v;
        }
        for (i, v) in q.iter().enumerate() {
            s[i] += v;
        }
        self.combine(other, s, |a, b| a + b)
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self::new(
            self.lambda * k,
            self.tail.iter().map(|x| x * k).collect(),
            self.exceptional.iter().map(|(n, v)| (*n, v * k)).collect(),
        )
        .expect("indices inherited")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(c(-1.0)))
    }

    pub fn multiply(&self, other: &Self) -> Self {
        let (p, q) = (self.full_poly(), other.full_poly());
        let mut s = vec![c(0.0); p.len() + q.len() - 1];
        for (i, a) in p.iter().enumerate() {
            for (j, b) in q.iter().enumerate() {
                s[i + j] += a * b;
            }
        }
        self.combine(other, s, |a, b| a * b)
    }

    fn first_regular(&self) -> u64 {
        self.exceptional.keys().next_back().map_or(1, |k| k + 1)
    }

    pub fn sup_norm(&self) -> Interval {
        let tail = extremum_over_integers(&self.full_poly(), self.first_regular(), Extremum::Sup, NORM_TOLERANCE);
        let pre = self
            .exceptional
            .keys()
            .map(|&n| self.value(n).norm())
            .chain((1..self.first_regular()).map(|n| self.value(n).norm()))
            .fold(0.0, f64::max);
        Interval {
            lo: tail.lo.max(pre),
            hi: tail.hi.max(pre),
        }
    }

    pub fn omega_norm(&self) -> Interval {
        let tail = extremum_over_integers(&self.tail, self.first_regular(), Extremum::Sup, NORM_TOLERANCE);
        let pre = (1..self.first_regular())
            .map(|n| n as f64 * (self.value(n) - self.lambda).norm())
            .fold(0.0, f64::max);
        Interval {
            lo: tail.lo.max(pre),
            hi: tail.hi.max(pre),
        }
        .outward()
    }

    pub fn norms(&self) -> NormReport {
        let sup_norm = self.sup_norm();
        let omega_norm = self.omega_norm();
        NormReport {
            sup_norm,
            omega_norm,
            total: sup_norm.add(omega_norm),
        }
    }

    /// Enclosure of `inf_n |a(n)|`.
    pub fn inf_modulus(&self) -> Interval {
        let tail = extremum_over_integers(&self.full_poly(), self.first_regular(), Extremum::Inf, 1e-14);
        let pre = (1..self.first_regular())
            .map(|n| self.value(n).norm())
            .fold(f64::INFINITY, f64::min);
        Interval {
            lo: tail.lo.min(pre).max(0.0),
            hi: tail.hi.min(pre),
        }
    }

    /// Invertible in `B_0` exactly when invertible in `B`: `λ ≠ 0` and `|a(n)|` bounded
    /// away from zero. Undecided cases count as not invertible.
    pub fn is_invertible(&self) -> bool {
        self.lambda != c(0.0) && self.inf_modulus().lo > 0.0
    }
}

/// `a - α·1` with real `0 < |α| < ε` chosen so the result is invertible.
pub fn perturb_to_invertible(a: &SchweitzerElement, epsilon: f64) -> Result<(SchweitzerElement, f64)> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return invalid("epsilon must be positive");
    }
    for k in 2..200u32 {
        for sign in [1.0, -1.0] {
            // irrational-looking fractions avoid hitting rational sequence values
            let alpha = sign * epsilon * (k as f64).sqrt().fract().max(0.5 / k as f64) * 0.999;
            if alpha == 0.0 || alpha.abs() >= epsilon {
                continue;
            }
            let b = a.sub(&SchweitzerElement::constant(c(alpha)));
            if b.is_invertible() {
                return Ok((b, alpha));
            }
        }
    }
    Err(crate::Error::ResourceLimit(
        "no invertible perturbation found".into(),
    ))
}

/// `|ω(a)|`: every `b` with finite spectrum is eventually constant, so `ω(b) = 0` and
/// `‖b - a‖ >= ‖b - a‖_ω >= |ω(b - a)| = |ω(a)|`.
pub fn finite_spectrum_gap(a: &SchweitzerElement) -> f64 {
    a.omega().norm()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSearchReport {
    pub prefix_length: usize,
    pub grid_step: f64,
    pub value_range: (f64, f64),
    pub best_distance: f64,
    pub best_prefix: Vec<f64>,
    pub best_limit: f64,
}

/// Minimises `‖b - a‖` over real `b` that equal a constant `μ` after `prefix` terms,
/// with `μ` and the prefix values on the grid `lo + k·step` inside `[lo, hi]`.
///
/// For fixed `μ` and a cap `s` on the sup part, each prefix value can be chosen
/// independently to minimise its `ω` contribution, so the grid optimum is found exactly
/// by sweeping `μ` and the finitely many candidate caps.
pub fn eventually_constant_search(
    a: &SchweitzerElement,
    prefix: usize,
    step: f64,
    range: (f64, f64),
) -> Result<GridSearchReport> {
    if !a.is_self_adjoint() {
        return invalid("search is over real sequences; a must be self-adjoint");
    }
    if !(step > 0.0) || range.1 < range.0 {
        return invalid("bad grid");
    }
    let count = ((range.1 - range.0) / step).round() as usize + 1;
    let grid: Vec<f64> = (0..count).map(|k| range.0 + k as f64 * step).collect();
    let av: Vec<f64> = (1..=prefix as u64).map(|n| a.value(n).re).collect();
    let mut best = (f64::INFINITY, Vec::new(), 0.0);
    for &mu in &grid {
        // b - a on the tail n > prefix is μ - a(n), limit μ - λ(a)
        let d = SchweitzerElement::constant(c(mu)).sub(a);
        let beyond = extremum_over_integers(&d.full_poly(), (prefix as u64 + 1).max(d.first_regular()), Extremum::Sup, 1e-12).hi;
        let beyond = (prefix as u64 + 1..d.first_regular())
            .map(|n| d.value(n).norm())
            .fold(beyond, f64::max);
        let lam = d.lambda.re;
        let beyond_w = extremum_over_integers(&d.tail, (prefix as u64 + 1).max(d.first_regular()), Extremum::Sup, 1e-12).hi;
        let beyond_w = (prefix as u64 + 1..d.first_regular())
            .map(|n| n as f64 * (d.value(n).re - lam).abs())
            .fold(beyond_w, f64::max);
        let mut caps: Vec<f64> = av
            .iter()
            .flat_map(|&x| grid.iter().map(move |&g| (g - x).abs()))
            .filter(|&u| u >= beyond)
            .collect();
        caps.push(beyond);
        caps.sort_by(f64::total_cmp);
        caps.dedup();
        for &s in &caps {
            let mut sup_part = beyond;
            let mut w_part = beyond_w;
            let mut chosen = Vec::with_capacity(prefix);
            let mut feasible = true;
            for (i, &x) in av.iter().enumerate() {
                let n = (i + 1) as f64;
                let pick = grid
                    .iter()
                    .filter(|&&g| (g - x).abs() <= s)
                    .map(|&g| (n * (g - x - lam).abs(), g))
                    .min_by(|p, q| p.0.total_cmp(&q.0));
                match pick {
                    Some((w, g)) => {
                        sup_part = sup_part.max((g - x).abs());
                        w_part = w_part.max(w);
                        chosen.push(g);
                    }
                    None => {
                        feasible = false;
                        break;
                    }
                }
            }
            if feasible && sup_part + w_part < best.0 {
                best = (sup_part + w_part, chosen, mu);
            }
        }
    }
    Ok(GridSearchReport {
        prefix_length: prefix,
        grid_step: step,
        value_range: range,
        best_distance: best.0,
        best_prefix: best.1,
        best_limit: best.2,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeVerdict {
    Converges,
    Diverges,
    Unclear,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct C1Probe {
    pub predicted: f64,
    pub measured: Vec<(u64, f64)>,
    pub final_error: f64,
    pub verdict: ProbeVerdict,
}

/// Schedule `1, 2, 5, 10, 20, 50, ...` up to `max_n`.
pub fn probe_schedule(max_n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut base = 1u64;
    'outer: loop {
        for m in [1, 2, 5] {
            let n = base * m;
            if n > max_n {
                break 'outer;
            }
            out.push(n);
        }
        base *= 10;
    }
    out
}

/// Compares `n[f(a(n)) - f(λ(a))]` with `f'(λ(a))·ω(a)` along [`probe_schedule`].
pub fn c1_limit_probe(
    a: &SchweitzerElement,
    f: impl Fn(f64) -> f64,
    f_prime: impl Fn(f64) -> f64,
    max_n: u64,
) -> Result<C1Probe> {
    if !a.is_self_adjoint() {
        return invalid("functional calculus probe needs a self-adjoint element");
    }
    let lam = a.lambda.re;
    let predicted = f_prime(lam) * a.omega().re;
    let fl = f(lam);
    let measured: Vec<(u64, f64)> = probe_schedule(max_n)
        .into_iter()
        .map(|n| (n, n as f64 * (f(a.value(n).re) - fl)))
        .collect();
    let last = measured.last().map_or(f64::NAN, |m| m.1);
    let final_error = (last - predicted).abs();
    let k = measured.len();
    let growing = k >= 3
        && measured[k - 3].1.abs() < measured[k - 2].1.abs()
        && measured[k - 2].1.abs() < measured[k - 1].1.abs()
        && measured[k - 1].1.abs() >= 2.0 * measured[k - 3].1.abs();
    let verdict = if predicted.is_finite() && final_error <= 1e-3 * (1.0 + predicted.abs()) {
        ProbeVerdict::Converges
    } else if growing {
        ProbeVerdict::Diverges
    } else {
        ProbeVerdict::Unclear
    };
    Ok(C1Probe {
        predicted,
        measured,
        final_error,
        verdict,
    })
}

/// Random element with coefficients in `[-2, 2] + [-2, 2]i`, at most `max_tail` tail
/// terms and overrides among the first `max_prefix` indices.
pub fn random_element<R: Rng>(rng: &mut R, max_tail: usize, max_prefix: u64, self_adjoint: bool) -> SchweitzerElement {
    let z = |rng: &mut R| {
        let re = rng.gen_range(-2.0..=2.0);
        let im = if self_adjoint { 0.0 } else { rng.gen_range(-2.0..=2.0) };
        Complex64::new(re, im)
    };
    let lambda = z(rng);
    let j = rng.gen_range(0..=max_tail);
    let tail = (0..j).map(|_| z(rng)).collect();
    let mut exceptional = BTreeMap::new();
    if max_prefix > 0 {
        for _ in 0..rng.gen_range(0..=max_prefix) {
            let n = rng.gen_range(1..=max_prefix);
            exceptional.insert(n, z(rng));
        }
    }
    SchweitzerElement::new(lambda, tail, exceptional).expect("indices start at 1")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: usize,
    pub violations: usize,
    /// Elements of the first few violating cases.
    pub counterexamples: Vec<Vec<SchweitzerElement>>,
}

impl CheckResult {
    fn new(name: &'static str) -> Self {
        CheckResult {
            name,
            cases: 0,
            violations: 0,
            counterexamples: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> Vec<SchweitzerElement>) {
        self.cases += 1;
        if !ok {
            self.violations += 1;
            if self.counterexamples.len() < 5 {
                self.counterexamples.push(witness());
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub cases: usize,
    pub checks: Vec<CheckResult>,
    pub unit_norm: Interval,
    pub reciprocal_gap: f64,
    pub grid_search: GridSearchReport,
    pub square_probe: C1Probe,
    pub sqrt_probe: C1Probe,
    pub passed: bool,
}

/// Runs the norm inequalities on `cases` random pairs from `seed`, then the fixed
/// checks on the reciprocal sequence.
pub fn run_suite(seed: u64, cases: usize) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basic = CheckResult::new("omega_leibniz");
    let mut sup_mult = CheckResult::new("sup_submultiplicative");
    let mut sub_mult = CheckResult::new("norm_submultiplicative");
    let mut star = CheckResult::new("adjoint_isometric");
    let mut lambda_mult = CheckResult::new("lambda_multiplicative");
    let mut omega_deriv = CheckResult::new("omega_derivation");
    for _ in 0..cases {
        let a = random_element(&mut rng, 4, 5, false);
        let b = random_element(&mut rng, 4, 5, false);
        let ab = a.multiply(&b);
        let (na, nb, nab) = (a.norms(), b.norms(), ab.norms());
        let pair = || vec![a.clone(), b.clone()];
        let rhs = na.sup_norm.mul(nb.omega_norm).add(na.omega_norm.mul(nb.sup_norm));
        basic.record(!nab.omega_norm.certainly_gt(&rhs), pair);
        sup_mult.record(!nab.sup_norm.certainly_gt(&na.sup_norm.mul(nb.sup_norm)), pair);
        sub_mult.record(!nab.total.certainly_gt(&na.total.mul(nb.total)), pair);
        star.record(a.adjoint().norms().total.overlaps(&na.total), pair);
        lambda_mult.record(ab.lambda() == a.lambda() * b.lambda(), pair);
        let expected = a.lambda() * b.omega() + a.omega() * b.lambda();
        omega_deriv.record(ab.omega() == expected, pair);
    }
    let unit_norm = SchweitzerElement::unit().norms().total;
    let mut unit = CheckResult::new("unit_norm_one");
    unit.record(unit_norm.overlaps(&Interval::point(1.0)), Vec::new);
    let rec = SchweitzerElement::reciprocal();
    let reciprocal_gap = finite_spectrum_gap(&rec);
    let grid_search = eventually_constant_search(&rec, 6, 0.05, (-1.0, 2.0))?;
    let mut gap = CheckResult::new("finite_spectrum_gap");
    gap.record(reciprocal_gap == 1.0 && grid_search.best_distance >= 1.0, || vec![rec.clone()]);
    let square_probe = c1_limit_probe(
        &SchweitzerElement::real_tail(1.0, &[1.0]),
        |x| x * x,
        |x| 2.0 * x,
        1_000_000,
    )?;
    let sqrt_probe = c1_limit_probe(&rec, f64::sqrt, |x| 0.5 / x.sqrt(), 1_000_000)?;
    let mut probes = CheckResult::new("c1_probes");
    probes.record(
        square_probe.verdict == ProbeVerdict::Converges && sqrt_probe.verdict == ProbeVerdict::Diverges,
        Vec::new,
    );
    let checks = vec![basic, sup_mult, sub_mult, star, lambda_mult, omega_deriv, unit, gap, probes];
    let passed = checks.iter().all(|c| c.violations == 0);
    Ok(SuiteReport {
        seed,
        cases,
        checks,
        unit_norm,
        reciprocal_gap,
        grid_search,
        square_probe,
        sqrt_probe,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(i: Interval, v: f64) -> bool {
        i.lo <= v + 1e-12 && v - 1e-12 <= i.hi && i.width() <= 1e-9
    }

    #[test]
    fn evaluation() {
        let r = SchweitzerElement::reciprocal();
        assert_eq!(r.evaluate(4).unwrap(), c(0.25));
        assert_eq!(SchweitzerElement::unit().evaluate(17).unwrap(), c(1.0));
        let e = SchweitzerElement::new(c(0.0), vec![c(1.0)], BTreeMap::from([(1, c(7.0))])).unwrap();
        assert_eq!(e.evaluate(1).unwrap(), c(7.0));
        assert_eq!(e.evaluate(2).unwrap(), c(0.5));
        assert!(e.evaluate(0).is_err());
    }

    #[test]
    fn products() {
        let r = SchweitzerElement::reciprocal();
        let r2 = r.multiply(&r);
        assert_eq!(r2.lambda(), c(0.0));
        assert_eq!(r2.omega(), c(0.0));
        assert_eq!(r2.tail(), &[c(0.0), c(1.0)]);
        for n in 1..=100u64 {
            let v = r2.evaluate(n).unwrap().re;
            assert!((v - 1.0 / (n * n) as f64).abs() < 1e-16);
        }
        let sq = SchweitzerElement::real_tail(1.0, &[1.0]);
        let sq2 = sq.multiply(&sq);
        assert_eq!(sq2, SchweitzerElement::real_tail(1.0, &[2.0, 1.0]));
        assert_eq!(SchweitzerElement::unit().multiply(&r), r);
    }

    #[test]
    fn norm_examples() {
        let r = SchweitzerElement::reciprocal();
        let n = r.norms();
        assert!(close(n.sup_norm, 1.0) && close(n.omega_norm, 1.0) && close(n.total, 2.0));
        assert!(close(SchweitzerElement::unit().norms().total, 1.0));
        let n2 = r.multiply(&r).norms();
        assert!(close(n2.sup_norm, 1.0) && close(n2.omega_norm, 1.0));
    }

    #[test]
    fn norm_matches_long_scan() {
        // sup of |0.3 - 2/n + 3/n^2| over n: brute force over a long prefix
        let a = SchweitzerElement::real_tail(0.3, &[-2.0, 3.0]);
        let brute_sup = (1..200_000u64).map(|n| a.value(n).norm()).fold(0.0f64, f64::max).max(0.3);
        let brute_w = (1..200_000u64)
            .map(|n| n as f64 * (a.value(n) - a.lambda()).norm())
            .fold(0.0f64, f64::max)
            .max(2.0);
        let n = a.norms();
        assert!(close(n.sup_norm, brute_sup), "{:?} vs {brute_sup}", n.sup_norm);
        assert!(close(n.omega_norm, brute_w), "{:?} vs {brute_w}", n.omega_norm);
    }

    #[test]
    fn invertibility() {
        assert!(SchweitzerElement::unit().is_invertible());
        let r = SchweitzerElement::reciprocal();
        assert!(!r.is_invertible());
        let b = r.sub(&SchweitzerElement::constant(c(0.3)));
        assert!(b.is_invertible());
        let inf = b.inf_modulus();
        assert!((inf.lo - (1.0 / 3.0 - 0.3)).abs() < 1e-12);
        let zero_hit = SchweitzerElement::real_tail(-0.25, &[1.0]);
        assert!(!zero_hit.is_invertible());
    }

    #[test]
    fn perturbation() {
        for a in [SchweitzerElement::unit(), SchweitzerElement::reciprocal()] {
            let (b, alpha) = perturb_to_invertible(&a, 0.1).unwrap();
            assert!(alpha.abs() < 0.1 && alpha != 0.0);
            assert!(b.is_invertible());
            assert!(b.is_self_adjoint());
            assert!(b.sub(&a).norms().total.hi < 0.1);
        }
    }

    #[test]
    fn gap_values() {
        assert_eq!(finite_spectrum_gap(&SchweitzerElement::reciprocal()), 1.0);
        assert_eq!(finite_spectrum_gap(&SchweitzerElement::unit()), 0.0);
        assert_eq!(finite_spectrum_gap(&SchweitzerElement::real_tail(3.0, &[5.0])), 5.0);
    }

    #[test]
    fn grid_search_brute_force_small() {
        // prefix 2 on a coarse grid: compare with exhaustive enumeration
        let a = SchweitzerElement::reciprocal();
        let step = 0.25;
        let range = (-0.5, 1.5);
        let rep = eventually_constant_search(&a, 2, step, range).unwrap();
        let grid: Vec<f64> = (0..=8).map(|k| -0.5 + k as f64 * step).collect();
        let mut best = f64::INFINITY;
        for &mu in &grid {
            for &b1 in &grid {
                for &b2 in &grid {
                    let b = SchweitzerElement::new(c(mu), vec![], BTreeMap::from([(1, c(b1)), (2, c(b2))]))
                        .unwrap();
                    best = best.min(b.sub(&a).norms().total.lo);
                }
            }
        }
        assert!((rep.best_distance - best).abs() < 1e-9, "{} vs {best}", rep.best_distance);
        assert!(rep.best_distance >= 1.0);
    }

    #[test]
    fn probes() {
        let a = SchweitzerElement::real_tail(1.0, &[1.0]);
        let p = c1_limit_probe(&a, |x| x * x, |x| 2.0 * x, 1_000_000).unwrap();
        assert_eq!(p.predicted, 2.0);
        let at = p.measured.iter().find(|m| m.0 == 10_000).unwrap();
        assert!((at.1 - 2.0).abs() < 1e-3);
        assert_eq!(p.verdict, ProbeVerdict::Converges);
        let id = c1_limit_probe(&SchweitzerElement::real_tail(0.5, &[3.0, 1.0]), |x| x, |_| 1.0, 1000).unwrap();
        assert_eq!(id.predicted, 3.0);
        let s = c1_limit_probe(&SchweitzerElement::reciprocal(), f64::sqrt, |x| 0.5 / x.sqrt(), 1_000_000).unwrap();
        assert_eq!(s.verdict, ProbeVerdict::Diverges);
        assert!(s.measured.last().unwrap().1 > 100.0);
    }

    #[test]
    fn small_suite_passes() {
        let r = run_suite(7, 50).unwrap();
        assert!(r.passed, "{:?}", r.checks);
    }
}
