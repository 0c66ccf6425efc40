use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::element::{Element, IntMatrix};
use crate::{Error, Result};

/// JSON description of a group model.
///
/// `{"kind":"free","rank":2}`, `{"kind":"free_abelian","rank":2}`,
/// `{"kind":"matrix","generators":[[[1,1],[0,1]],[[1,-1],[0,1]]]}`,
/// `{"kind":"product","factors":[…]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupSpec {
    Free { rank: usize },
    FreeAbelian { rank: usize },
    Matrix { generators: Vec<Vec<Vec<i64>>> },
    Product { factors: Vec<GroupSpec> },
}

/// Parses the command-line shorthand `free:2`, `free_abelian:2` (also
/// `abelian:2`, `z:2`), `trivial`, or inline JSON.
impl FromStr for GroupSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return Ok(serde_json::from_str(s)?);
        }
        if s == "trivial" {
            return Ok(GroupSpec::FreeAbelian { rank: 0 });
        }
        let (kind, rank) =
            s.split_once(':').ok_or_else(|| Error::input(format!("group shorthand {s:?} is not kind:rank")))?;
        let rank: usize = rank.parse().map_err(|_| Error::input(format!("group rank {rank:?} is not an integer")))?;
        match kind {
            "free" => Ok(GroupSpec::Free { rank }),
            "free_abelian" | "free-abelian" | "abelian" | "z" => Ok(GroupSpec::FreeAbelian { rank }),
            other => Err(Error::input(format!("unknown group kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Free(usize),
    FreeAbelian(usize),
    Matrix(usize),
    Product(Vec<GroupModel>),
}

/// A finitely generated group with decidable canonical forms and a
/// symmetric generating set that excludes the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupModel {
    kind: Kind,
    generators: Vec<Element>,
    spec: GroupSpec,
}

impl GroupModel {
    /// Free group on `rank` letters.
    pub fn free(rank: usize) -> Self {
        let generators = (1..=rank as i32).flat_map(|i| [Element::Word(vec![i]), Element::Word(vec![-i])]).collect();
        GroupModel { kind: Kind::Free(rank), generators, spec: GroupSpec::Free { rank } }
    }

    /// `Zⁿ` with the standard generators `±e_i`.
    pub fn free_abelian(rank: usize) -> Self {
        let generators = (0..rank)
            .flat_map(|i| {
                [1i64, -1].map(|s| {
                    let mut v = vec![0; rank];
                    v[i] = s;
                    Element::Vector(v)
                })
            })
            .collect();
        GroupModel { kind: Kind::FreeAbelian(rank), generators, spec: GroupSpec::FreeAbelian { rank } }
    }

    /// Subgroup of `GL(n, Z)` generated by the listed matrices, which must
    /// be closed under inversion. Repeated generators are dropped.
    pub fn matrix(generators: Vec<Vec<Vec<i64>>>) -> Result<Self> {
        let mats = generators.iter().map(|g| IntMatrix::from_rows(g)).collect::<Result<Vec<_>>>()?;
        let dim = mats.first().map_or(0, IntMatrix::dim);
        if mats.iter().any(|m| m.dim() != dim) {
            return Err(Error::input("matrix generators have different dimensions"));
        }
        let mut unique: Vec<IntMatrix> = Vec::new();
        for m in mats {
            if m.is_identity() {
                return Err(Error::input("the identity may not be listed as a generator"));
            }
            if !unique.contains(&m) {
                unique.push(m);
            }
        }
        for g in &unique {
            if !unique.iter().any(|h| g.mul(h).is_identity()) {
                return Err(Error::input(format!("generator {g} has no inverse in the generating list")));
            }
        }
        Ok(GroupModel {
            kind: Kind::Matrix(dim),
            generators: unique.into_iter().map(Element::Matrix).collect(),
            spec: GroupSpec::Matrix { generators },
        })
    }

    /// Direct product with generators acting in one coordinate at a time.
    pub fn product(factors: Vec<GroupModel>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::input("a product needs at least one factor"));
        }
        let identities: Vec<Element> = factors.iter().map(GroupModel::identity).collect();
        let mut generators = Vec::new();
        for (i, factor) in factors.iter().enumerate() {
            for g in factor.generators() {
                let mut parts = identities.clone();
                parts[i] = g.clone();
                generators.push(Element::Tuple(parts));
            }
        }
        let spec = GroupSpec::Product { factors: factors.iter().map(|f| f.spec.clone()).collect() };
        Ok(GroupModel { kind: Kind::Product(factors), generators, spec })
    }

    pub fn from_spec(spec: &GroupSpec) -> Result<Self> {
        match spec {
            GroupSpec::Free { rank } => Ok(Self::free(*rank)),
            GroupSpec::FreeAbelian { rank } => Ok(Self::free_abelian(*rank)),
            GroupSpec::Matrix { generators } => Self::matrix(generators.clone()),
            GroupSpec::Product { factors } => {
                Self::product(factors.iter().map(Self::from_spec).collect::<Result<_>>()?)
            }
        }
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    pub fn identity(&self) -> Element {
        match &self.kind {
            Kind::Free(_) => Element::Word(Vec::new()),
            Kind::FreeAbelian(n) => Element::Vector(vec![0; *n]),
            Kind::Matrix(dim) => Element::Matrix(IntMatrix::identity(*dim)),
            Kind::Product(factors) => Element::Tuple(factors.iter().map(GroupModel::identity).collect()),
        }
    }

    pub fn multiply(&self, a: &Element, b: &Element) -> Result<Element> {
        match (&self.kind, a, b) {
            (Kind::Free(_), Element::Word(x), Element::Word(y)) => Ok(Element::Word(Element::word_product(x, y))),
            (Kind::FreeAbelian(n), Element::Vector(x), Element::Vector(y)) if x.len() == *n && y.len() == *n => {
                Ok(Element::Vector(x.iter().zip(y).map(|(p, q)| p + q).collect()))
            }
            (Kind::Matrix(dim), Element::Matrix(x), Element::Matrix(y)) if x.dim() == *dim && y.dim() == *dim => {
                Ok(Element::Matrix(x.mul(y)))
            }
            (Kind::Product(factors), Element::Tuple(x), Element::Tuple(y))
                if x.len() == factors.len() && y.len() == factors.len() =>
            {
                let parts =
                    factors.iter().zip(x.iter().zip(y)).map(|(f, (p, q))| f.multiply(p, q)).collect::<Result<_>>()?;
                Ok(Element::Tuple(parts))
            }
            _ => Err(Error::input(format!("elements {a} and {b} do not belong to this group model"))),
        }
    }

    pub fn inverse(&self, a: &Element) -> Result<Element> {
        match (&self.kind, a) {
            (Kind::Free(_), Element::Word(w)) => Ok(Element::Word(w.iter().rev().map(|l| -l).collect())),
            (Kind::FreeAbelian(_), Element::Vector(v)) => Ok(Element::Vector(v.iter().map(|x| -x).collect())),
            (Kind::Matrix(_), Element::Matrix(m)) => Ok(Element::Matrix(m.inverse()?)),
            (Kind::Product(factors), Element::Tuple(parts)) if parts.len() == factors.len() => {
                Ok(Element::Tuple(factors.iter().zip(parts).map(|(f, p)| f.inverse(p)).collect::<Result<_>>()?))
            }
            _ => Err(Error::input(format!("element {a} does not belong to this group model"))),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand_and_json_specs() {
        assert_eq!("free:2".parse::<GroupSpec>().unwrap(), GroupSpec::Free { rank: 2 });
        assert_eq!("abelian:3".parse::<GroupSpec>().unwrap(), GroupSpec::FreeAbelian { rank: 3 });
        assert_eq!("trivial".parse::<GroupSpec>().unwrap(), GroupSpec::FreeAbelian { rank: 0 });
        let json = r#"{"kind":"product","factors":[{"kind":"free","rank":1},{"kind":"free_abelian","rank":1}]}"#;
        let spec: GroupSpec = json.parse().unwrap();
        assert_eq!(serde_json::to_string(&spec).unwrap(), json);
        assert!("tree:2".parse::<GroupSpec>().is_err());
        assert!("free:x".parse::<GroupSpec>().is_err());
    }

    #[test]
    fn generators_are_symmetric_and_nontrivial() {
        let specs = [
            GroupSpec::Free { rank: 3 },
            GroupSpec::FreeAbelian { rank: 2 },
            GroupSpec::Matrix { generators: vec![vec![vec![1, 2], vec![0, 1]], vec![vec![1, -2], vec![0, 1]]] },
            GroupSpec::Product { factors: vec![GroupSpec::Free { rank: 1 }, GroupSpec::FreeAbelian { rank: 1 }] },
        ];
        for spec in &specs {
            let g = GroupModel::from_spec(spec).unwrap();
            let e = g.identity();
            for s in g.generators() {
                assert_ne!(s, &e);
                let inv = g.inverse(s).unwrap();
                assert!(g.generators().contains(&inv), "{spec:?}: inverse of {s} missing");
                assert_eq!(g.multiply(s, &inv).unwrap(), e);
            }
        }
    }

    #[test]
    fn matrix_validation() {
        assert!(GroupModel::matrix(vec![vec![vec![1, 1], vec![0, 1]]]).is_err());
        assert!(GroupModel::matrix(vec![vec![vec![1, 0], vec![0, 1]]]).is_err());
        assert!(GroupModel::matrix(vec![vec![vec![1, 1], vec![0, 1]], vec![vec![1]]]).is_err());
        let swap = GroupModel::matrix(vec![vec![vec![0, 1], vec![1, 0]]]).unwrap();
        assert_eq!(swap.generators().len(), 1);
    }

    #[test]
    fn mixing_models_is_an_error() {
        let g = GroupModel::free(2);
        assert!(g.multiply(&Element::Vector(vec![1]), &Element::Word(vec![])).is_err());
        assert!(GroupModel::free_abelian(2).multiply(&Element::Vector(vec![1]), &Element::Vector(vec![1, 0])).is_err());
    }
}
