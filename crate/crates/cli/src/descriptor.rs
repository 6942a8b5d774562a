//! Family descriptors and map files.
//!
//! A descriptor is either a path to a JSON map file or one of
//! `ji:m,n`, `affine:k1,...`, `rotation:label,...`, `putnam:a,b`, `sine:a`, `point`.

use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use ktorus_core::elliott::{
    build_affine_furstenberg_invariant, build_putnam_invariant, build_rotation_invariant, ElliottInvariant,
};
use ktorus_core::torus::{golden_theta, MapDefinition};
use ktorus_core::{CircleDiffeo, IrrationalBasis, TorusMap, Translation};

pub const THETA: &str = "theta";

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Ji(i64, i64),
    Affine(Vec<i64>),
    Rotation(Vec<String>),
    Putnam(String, String),
    Sine(f64),
    Point,
    File(String),
}

#[derive(Clone, Debug)]
pub enum Resolved {
    Torus(TorusMap),
    Circle(CircleDiffeo),
    Putnam { basis: IrrationalBasis, alpha: String, beta: String },
    Point,
}

fn ints(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|p| p.trim().parse::<i64>().with_context(|| format!("bad integer {p:?}")))
        .collect()
}

fn labels(s: &str) -> Result<Vec<String>> {
    let out: Vec<String> = s.split(',').map(|p| p.trim().to_string()).collect();
    if out.iter().any(|l| l.is_empty() || l == "1") {
        bail!("labels must be nonempty and differ from \"1\"");
    }
    Ok(out)
}

impl Family {
    pub fn parse(s: &str) -> Result<Family> {
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        let fam = match head {
            "ji" => match ints(rest)?[..] {
                [m, n] => Family::Ji(m, n),
                _ => bail!("ji needs two integers, as in ji:2,3"),
            },
            "affine" => Family::Affine(ints(rest)?),
            "rotation" => Family::Rotation(labels(rest)?),
            "putnam" => match &labels(rest)?[..] {
                [a, b] => Family::Putnam(a.clone(), b.clone()),
                _ => bail!("putnam needs two labels, as in putnam:alpha,beta"),
            },
            "sine" => Family::Sine(rest.trim().parse().with_context(|| format!("bad amplitude {rest:?}"))?),
            "point" if rest.is_empty() => Family::Point,
            _ if Path::new(s).exists() => Family::File(s.to_string()),
            _ => bail!("{s:?} is neither a family descriptor nor an existing map file"),
        };
        Ok(fam)
    }

    /// Irrational labels the family refers to.
    pub fn labels(&self) -> Vec<String> {
        match self {
            Family::Ji(..) | Family::Affine(_) => vec![THETA.to_string()],
            Family::Rotation(ls) => ls.clone(),
            Family::Putnam(a, b) => vec![a.clone(), b.clone()],
            _ => Vec::new(),
        }
    }
}

fn primes(count: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    let mut c = 2;
    while out.len() < count {
        if out.iter().all(|p| c % p != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// One basis over the given labels. `theta` is the golden mean; every other label gets
/// the fractional part of the square root of a distinct prime, in sorted label order.
pub fn shared_basis(labels: &BTreeSet<String>) -> Result<IrrationalBasis> {
    let ps = primes(labels.len());
    let pairs = labels.iter().zip(ps).map(|(l, p)| {
        let v = if l == THETA {
            golden_theta()
        } else {
            let r = (p as f64).sqrt();
            r - r.floor()
        };
        (l.clone(), v)
    });
    Ok(IrrationalBasis::new(pairs)?)
}

pub fn read_map_file(path: &str) -> Result<MapDefinition> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {path}"))?;
    MapDefinition::from_json(&text).map_err(|e| anyhow!(e).context(format!("in {path}")))
}

/// Builds the family over `basis`, which must contain all of its labels.
pub fn resolve(fam: &Family, basis: &IrrationalBasis) -> Result<Resolved> {
    let r = match fam {
        Family::Ji(m, n) => Resolved::Torus(TorusMap::ji_furstenberg(basis.clone(), THETA, *m, *n)?),
        Family::Affine(skew) => Resolved::Torus(TorusMap::affine_furstenberg(basis.clone(), THETA, skew)?),
        Family::Rotation(ls) => {
            let refs: Vec<&str> = ls.iter().map(String::as_str).collect();
            Resolved::Torus(TorusMap::rotation(basis.clone(), &refs)?)
        }
        Family::Putnam(a, b) => Resolved::Putnam {
            basis: basis.clone(),
            alpha: a.clone(),
            beta: b.clone(),
        },
        Family::Sine(a) => Resolved::Circle(CircleDiffeo::sine_perturbation(*a)?),
        Family::Point => Resolved::Point,
        Family::File(path) => match read_map_file(path)? {
            MapDefinition::Torus(m) => Resolved::Torus(m),
            MapDefinition::Circle(c) => Resolved::Circle(c),
        },
    };
    Ok(r)
}

/// Resolves a single descriptor over its own labels.
pub fn resolve_alone(s: &str) -> Result<Resolved> {
    let fam = Family::parse(s)?;
    let basis = shared_basis(&fam.labels().into_iter().collect())?;
    resolve(&fam, &basis)
}

pub fn torus_only(r: Resolved, what: &str) -> Result<TorusMap> {
    match r {
        Resolved::Torus(m) => Ok(m),
        _ => bail!("{what} needs a torus map"),
    }
}

/// Label rotated by the first coordinate of a symbolic map, if there is exactly one.
fn first_rotation_label(map: &TorusMap) -> Result<String> {
    let (Some(basis), Translation::Symbolic(t)) = (map.basis(), map.translation()) else {
        bail!("map needs a symbolic translation to define its invariant");
    };
    let used: Vec<&String> = basis
        .labels()
        .iter()
        .zip(&t[0])
        .skip(1)
        .filter(|(_, c)| !num_traits::Zero::is_zero(*c))
        .map(|(l, _)| l)
        .collect();
    match used[..] {
        [l] => Ok(l.clone()),
        _ => bail!("first coordinate must rotate by a single basis irrational"),
    }
}

pub fn elliott_invariant(r: &Resolved) -> Result<ElliottInvariant> {
    let inv = match r {
        Resolved::Torus(m) if m.dim() == 1 && m.linear_part().is_identity() => build_rotation_invariant(m)?,
        Resolved::Torus(m) => build_affine_furstenberg_invariant(m, &first_rotation_label(m)?)?,
        Resolved::Putnam { basis, alpha, beta } => build_putnam_invariant(basis, alpha, beta)?,
        _ => bail!("no Elliott invariant for this family"),
    };
    Ok(inv)
}
