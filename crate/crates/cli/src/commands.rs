use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use ktorus_core::conjugacy::{flip_obstruction, ji_matrices, q_similar, z_similar_bounded};
use ktorus_core::elliott::{invariants_equivalent, BasisMatch};
use ktorus_core::fgab::IntMatrix;
use ktorus_core::ktheory::{induced_kstar_torus, pv_crossed_k, putnam_product_kdata, torus_crossed_k, KDatum};
use ktorus_core::schweitzer::run_suite;
use ktorus_core::smooth_cp::{combined_seminorm, seminorm_cp, submultiplicativity_probe, CrossedElement, SeminormIndex};
use ktorus_core::tempered::{classify_growth, default_grid, geometric_samples, profile_exact_affine, profile_numeric};
use ktorus_core::torus::{collapse_f0, distality_probe, ergodic_average, winding_average};
use ktorus_core::{Error, TorusMap, TorusPoint, TrigPoly};

use crate::descriptor::{elliott_invariant, resolve, resolve_alone, shared_basis, torus_only, Family, Resolved};

/// Longest orbit the `dynamics orbit` command will print.
pub const MAX_ORBIT_STEPS: usize = 100_000;

pub struct Outcome {
    pub results: Value,
    pub notes: Vec<String>,
}

fn outcome(results: Value) -> Result<Outcome> {
    Ok(Outcome {
        results,
        notes: Vec::new(),
    })
}

pub fn ktheory(desc: &str) -> Result<Outcome> {
    let (datum, groups) = match resolve_alone(desc)? {
        Resolved::Torus(m) => (induced_kstar_torus(&m), torus_crossed_k(&m)),
        Resolved::Putnam { .. } => {
            let d = putnam_product_kdata();
            let k = pv_crossed_k(&d);
            (d, k)
        }
        Resolved::Point => {
            let d = KDatum::from_actions(IntMatrix::identity(1), IntMatrix::zeros(0, 0))?;
            let k = pv_crossed_k(&d);
            (d, k)
        }
        Resolved::Circle(_) => bail!("K-theory needs a torus map, the point, or putnam"),
    };
    outcome(json!({
        "k_data": datum,
        "k0": groups.k0,
        "k1": groups.k1,
        "k0_display": groups.k0.to_string(),
        "k1_display": groups.k1.to_string(),
        "notes": groups.notes,
    }))
}

pub fn elliott_compare(first: &str, second: &str, union: bool, rename: &[String]) -> Result<Outcome> {
    let f1 = Family::parse(first)?;
    let f2 = Family::parse(second)?;
    let mut notes = Vec::new();
    let (r1, r2) = if union || !rename.is_empty() {
        // the caller supplies the identification, so each side keeps its own labels
        (resolve_alone(first)?, resolve_alone(second)?)
    } else {
        // descriptors share one basis so that equal labels mean equal irrationals
        let labels: BTreeSet<String> = f1.labels().into_iter().chain(f2.labels()).collect();
        let basis = shared_basis(&labels)?;
        notes.push(format!("family descriptors share the basis {:?}", basis.labels()));
        (resolve(&f1, &basis)?, resolve(&f2, &basis)?)
    };
    let e1 = elliott_invariant(&r1)?;
    let e2 = elliott_invariant(&r2)?;
    let matching = if !rename.is_empty() {
        let mut m = BTreeMap::new();
        for r in rename {
            let (a, b) = r.split_once('=').with_context(|| format!("rename {r:?} is not of the form a=b"))?;
            m.insert(a.to_string(), b.to_string());
        }
        BasisMatch::Rename(m)
    } else if union {
        BasisMatch::Union
    } else {
        BasisMatch::Strict
    };
    let report = invariants_equivalent(&e1, &e2, &matching)?;
    Ok(Outcome {
        results: json!({ "first": e1, "second": e2, "verdict": report }),
        notes,
    })
}

pub struct TemperedArgs {
    pub exact: bool,
    pub from: u64,
    pub to: Option<u64>,
    pub samples: usize,
    pub grid: Option<usize>,
}

pub fn tempered(desc: &str, args: &TemperedArgs) -> Result<Outcome> {
    let resolved = resolve_alone(desc)?;
    let mut notes = Vec::new();
    let profile = match resolved {
        Resolved::Torus(m) if args.exact => {
            let ns = geometric_samples(args.from, args.to.unwrap_or(1000), args.samples);
            profile_exact_affine(&m, &ns)?
        }
        Resolved::Torus(m) => {
            let ns = geometric_samples(args.from, args.to.unwrap_or(100), args.samples);
            // the Jacobian of an affine map is constant, so a coarse grid is exact
            let grid = args
                .grid
                .unwrap_or(if m.is_affine() { 4 } else { default_grid(m.dim()) });
            profile_numeric(&m, &ns, grid, m.is_affine())?
        }
        Resolved::Circle(c) if !args.exact => {
            let ns = geometric_samples(args.from, args.to.unwrap_or(50), args.samples);
            notes.push("circle maps use the numeric profile; values are sups over the grid".into());
            profile_numeric(&c, &ns, args.grid.unwrap_or(default_grid(1)), false)?
        }
        Resolved::Circle(_) => bail!("--exact needs an affine torus map"),
        _ => bail!("temperedness needs a torus or circle map"),
    };
    let verdict = classify_growth(&profile)?;
    Ok(Outcome {
        results: json!({ "profile": profile, "verdict": verdict }),
        notes,
    })
}

pub struct SmoothcpArgs {
    pub n: u32,
    pub d: u32,
    pub samples: usize,
    pub width: i64,
    pub grid: Option<usize>,
    pub seed: u64,
}

pub fn smoothcp_bench(desc: &str, args: &SmoothcpArgs) -> Result<Outcome> {
    let map = Arc::new(torus_only(resolve_alone(desc)?, "smoothcp")?);
    let grid = args.grid.unwrap_or(64);
    let idx = SeminormIndex { n: args.n, d: args.d };
    let unit = CrossedElement::unit(map.clone())?;
    let one = TrigPoly::constant(map.dim(), Complex64::new(1.0, 0.0));
    let delta = CrossedElement::delta(map.clone(), 1, one)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let probe = submultiplicativity_probe(map, idx, args.samples, args.width, grid, &mut rng)?;
    outcome(json!({
        "unit_combined_seminorm": combined_seminorm(&unit, idx, grid),
        "delta1_seminorm_0_1": seminorm_cp(&delta, SeminormIndex { n: 0, d: 1 }, grid).estimate,
        "probe": probe,
    }))
}

pub fn schweitzer_suite(seed: u64, cases: usize) -> Result<Outcome> {
    let rep = run_suite(seed, cases)?;
    outcome(serde_json::to_value(rep)?)
}

fn parse_matrix(s: &str) -> Result<IntMatrix> {
    let rows: Vec<Vec<i64>> = serde_json::from_str(s).with_context(|| format!("matrix {s:?} is not a JSON array of integer rows"))?;
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
        bail!("matrix {s:?} must be nonempty and rectangular");
    }
    Ok(IntMatrix::from_rows(&rows))
}

pub fn conjugacy(a: Option<&str>, b: Option<&str>, ji: Option<&[i64]>, bound: i64, modcap: u64) -> Result<Outcome> {
    let (a, b) = match (a, b, ji) {
        (None, None, Some(&[m, n])) => ji_matrices(m, n)?,
        (Some(a), Some(b), None) => (parse_matrix(a)?, parse_matrix(b)?),
        _ => bail!("give either two matrices or --ji M N"),
    };
    if !a.is_square() || a.rows() != b.rows() || !b.is_square() {
        bail!("matrices must be square of the same size");
    }
    let q = q_similar(&a, &b)?;
    let det = b.det()?;
    let unimodular = det == 1.into() || det == (-1).into();
    let results = if unimodular {
        json!({ "a": a, "b": b, "q_similar": q, "flip": flip_obstruction(&a, &b, bound, modcap)? })
    } else {
        json!({ "a": a, "b": b, "q_similar": q, "direct": z_similar_bounded(&a, &b, bound, modcap)? })
    };
    outcome(results)
}

fn parse_point(s: Option<&str>, dim: usize) -> Result<TorusPoint> {
    let coords = match s {
        None => vec![0.0; dim],
        Some(s) => s
            .split(',')
            .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad coordinate {p:?}")))
            .collect::<Result<Vec<_>>>()?,
    };
    if coords.iter().any(|x| !x.is_finite()) {
        bail!("coordinates must be finite");
    }
    Ok(TorusPoint::new(coords))
}

fn dyn_map(desc: &str) -> Result<TorusMap> {
    torus_only(resolve_alone(desc)?, "dynamics")
}

pub fn collapse(x: f64, y: f64) -> Result<Outcome> {
    let (u, v) = collapse_f0(x, y);
    outcome(json!({ "input": [x, y], "image": [u, v] }))
}

pub fn orbit(desc: &str, start: Option<&str>, steps: usize) -> Result<Outcome> {
    if steps > MAX_ORBIT_STEPS {
        return Err(Error::ResourceLimit(format!("orbit length {steps} exceeds {MAX_ORBIT_STEPS}")).into());
    }
    let map = dyn_map(desc)?;
    let mut p = parse_point(start, map.dim())?;
    let mut points = vec![p.coords().to_vec()];
    for _ in 0..steps {
        p = map.apply(&p)?;
        points.push(p.coords().to_vec());
    }
    outcome(json!({ "points": points }))
}

pub fn ergodic(desc: &str, freq: &str, start: Option<&str>, steps: usize) -> Result<Outcome> {
    let map = dyn_map(desc)?;
    let k: Vec<i64> = freq
        .split(',')
        .map(|p| p.trim().parse::<i64>().with_context(|| format!("bad frequency {p:?}")))
        .collect::<Result<_>>()?;
    let f = TrigPoly::monomial(k, Complex64::new(1.0, 0.0));
    let avg = ergodic_average(&map, &f, steps, &parse_point(start, map.dim())?)?;
    let space_average = if f.coeff(&vec![0; map.dim()]).norm() > 0.0 { 1.0 } else { 0.0 };
    outcome(json!({ "average": avg, "modulus": avg.norm(), "space_average": space_average }))
}

pub fn winding(desc: &str, coord: usize, start: Option<&str>, steps: usize) -> Result<Outcome> {
    let map = dyn_map(desc)?;
    let w = winding_average(&map, coord, steps, &parse_point(start, map.dim())?)?;
    outcome(json!({ "coordinate": coord, "average_increment": w }))
}

pub fn distality(desc: &str, z1: &str, z2: &str, horizon: usize) -> Result<Outcome> {
    let map = dyn_map(desc)?;
    let d = map.dim();
    let est = distality_probe(&map, &parse_point(Some(z1), d)?, &parse_point(Some(z2), d)?, horizon)?;
    outcome(serde_json::to_value(est)?)
}
