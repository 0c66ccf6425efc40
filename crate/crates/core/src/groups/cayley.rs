use std::collections::HashMap;
use std::fmt;

use super::element::Element;
use super::model::GroupModel;
use crate::mmgraph::{integer_radii, GrowthMode, GrowthProfile, MeasuredGraph};
use crate::{Error, Result};

/// Default cap on the number of enumerated group elements.
pub const DEFAULT_ELEMENT_BUDGET: usize = 1_000_000;

/// How vertices of a Cayley ball are weighted.
pub enum MeasureRule {
    Counting,
    /// A positive weight per element, promised to lie in `[lower, upper]`.
    Weighted {
        weight: Box<dyn Fn(&Element) -> f64 + Send + Sync>,
        lower: f64,
        upper: f64,
    },
}

impl fmt::Debug for MeasureRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureRule::Counting => write!(f, "Counting"),
            MeasureRule::Weighted { lower, upper, .. } => write!(f, "Weighted[{lower}, {upper}]"),
        }
    }
}

impl MeasureRule {
    /// `(c, C)` with `c ≤ μ ≤ C`.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            MeasureRule::Counting => (1.0, 1.0),
            MeasureRule::Weighted { lower, upper, .. } => (*lower, *upper),
        }
    }

    fn weigh(&self, x: &Element) -> Result<f64> {
        match self {
            MeasureRule::Counting => Ok(1.0),
            MeasureRule::Weighted { weight, lower, upper } => {
                let w = weight(x);
                if w > 0.0 && w >= *lower && w <= *upper {
                    Ok(w)
                } else {
                    Err(Error::input(format!("weight {w} of {x} is outside the stated bounds [{lower}, {upper}]")))
                }
            }
        }
    }
}

/// Elements of `B̄(e, R)` in breadth-first canonical order, with word lengths.
pub(crate) struct Enumeration {
    pub elements: Vec<Element>,
    pub lengths: Vec<usize>,
    pub index: HashMap<Element, usize>,
    pub sphere_sizes: Vec<usize>,
}

/// Level-by-level BFS from the identity. Each new sphere is sorted by
/// canonical form, so vertex numbering does not depend on hashing.
pub(crate) fn enumerate_ball(group: &GroupModel, radius: usize, budget: usize) -> Result<Enumeration> {
    let e = group.identity();
    let mut elements = vec![e.clone()];
    let mut lengths = vec![0];
    let mut index = HashMap::from([(e, 0usize)]);
    let mut sphere_sizes = vec![1];
    let mut level_start = 0;
    for r in 1..=radius {
        let level_end = elements.len();
        let mut next = Vec::new();
        for x in &elements[level_start..level_end] {
            for s in group.generators() {
                let y = group.multiply(x, s)?;
                if !index.contains_key(&y) {
                    next.push(y);
                }
            }
        }
        next.sort_unstable();
        next.dedup();
        if elements.len() + next.len() > budget {
            return Err(Error::Budget { what: "group elements", limit: budget as u64 });
        }
        sphere_sizes.push(next.len());
        for y in next {
            index.insert(y.clone(), elements.len());
            elements.push(y);
            lengths.push(r);
        }
        level_start = level_end;
        if level_start == elements.len() {
            // finite group exhausted; remaining spheres are empty
            sphere_sizes.resize(radius + 1, 0);
            break;
        }
    }
    Ok(Enumeration { elements, lengths, index, sphere_sizes })
}

/// The closed ball `B̄(e, R)` of a Cayley graph as a measured graph.
#[derive(Clone, Debug)]
pub struct CayleyBall {
    pub graph: MeasuredGraph,
    pub radius: usize,
    /// Vertex of the identity (always 0).
    pub base: usize,
    pub elements: Vec<Element>,
    pub word_length: Vec<usize>,
}

/// Enumerates `B̄(e, R)` with exact arithmetic and canonical deduplication,
/// joining `x ∼ y` whenever `x⁻¹y` is a generator and both lie in the ball.
pub fn cayley_ball(group: &GroupModel, radius: usize, rule: &MeasureRule, budget: usize) -> Result<CayleyBall> {
    let Enumeration { elements, lengths, index, .. } = enumerate_ball(group, radius, budget)?;
    let mut adjacency = vec![Vec::new(); elements.len()];
    for (i, x) in elements.iter().enumerate() {
        for s in group.generators() {
            if let Some(&j) = index.get(&group.multiply(x, s)?) {
                adjacency[i].push(j);
            }
        }
        adjacency[i].sort_unstable();
    }
    let measure = elements.iter().map(|x| rule.weigh(x)).collect::<Result<Vec<_>>>()?;
    let labels = elements.iter().map(ToString::to_string).collect();
    let graph = MeasuredGraph::from_sorted_adjacency(adjacency, measure)?.with_labels(labels)?;
    Ok(CayleyBall { graph, radius, base: 0, elements, word_length: lengths })
}

/// `F_Γ(R) = |B̄(e, R)|` for `R = 0..=r_max`, as an absolute profile.
pub fn growth_series(group: &GroupModel, r_max: usize, budget: usize) -> Result<GrowthProfile> {
    let sizes = enumerate_ball(group, r_max, budget)?.sphere_sizes;
    let values = sizes
        .iter()
        .scan(0usize, |acc, &s| {
            *acc += s;
            Some(*acc as f64)
        })
        .collect();
    GrowthProfile::new(integer_radii(r_max), values, GrowthMode::Absolute)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::model::GroupSpec;
    use std::collections::{BTreeMap, HashSet};

    /// Enumerates all words of length ≤ R over the generators and records
    /// the shortest word reaching each element. Independent of the BFS.
    fn word_oracle(group: &GroupModel, radius: usize) -> BTreeMap<Element, usize> {
        let mut best = BTreeMap::new();
        let mut frontier = vec![group.identity()];
        best.insert(group.identity(), 0);
        for len in 1..=radius {
            let mut next = Vec::new();
            for x in &frontier {
                for s in group.generators() {
                    let y = group.multiply(x, s).unwrap();
                    best.entry(y.clone()).or_insert(len);
                    next.push(y);
                }
            }
            frontier = next;
        }
        best
    }

    #[test]
    fn ball_sizes() {
        let ball =
            cayley_ball(&GroupModel::free_abelian(2), 2, &MeasureRule::Counting, DEFAULT_ELEMENT_BUDGET).unwrap();
        assert_eq!(ball.graph.vertex_count(), 13);
        let ball = cayley_ball(&GroupModel::free(2), 3, &MeasureRule::Counting, DEFAULT_ELEMENT_BUDGET).unwrap();
        assert_eq!(ball.graph.vertex_count(), 2 * 27 - 1);
        assert!(ball.graph.is_tree());
        for g in [GroupModel::free(3), GroupModel::free_abelian(3)] {
            let b = cayley_ball(&g, 0, &MeasureRule::Counting, 10).unwrap();
            assert_eq!(b.graph.vertex_count(), 1);
            assert_eq!(b.elements[0], g.identity());
        }
    }

    #[test]
    fn distance_from_base_is_word_length() {
        let groups = [
            GroupModel::free(2),
            GroupModel::free_abelian(2),
            GroupModel::from_spec(&GroupSpec::Matrix {
                generators: vec![
                    vec![vec![1, 1], vec![0, 1]],
                    vec![vec![1, -1], vec![0, 1]],
                    vec![vec![1, 0], vec![1, 1]],
                    vec![vec![1, 0], vec![-1, 1]],
                ],
            })
            .unwrap(),
            GroupModel::product(vec![GroupModel::free(1), GroupModel::free(2)]).unwrap(),
        ];
        for g in &groups {
            let ball = cayley_ball(g, 4, &MeasureRule::Counting, DEFAULT_ELEMENT_BUDGET).unwrap();
            let oracle = word_oracle(g, 4);
            assert_eq!(ball.elements.len(), oracle.len());
            let dist = ball.graph.bfs_distances(ball.base).unwrap();
            for (i, x) in ball.elements.iter().enumerate() {
                assert_eq!(oracle[x], ball.word_length[i]);
                assert_eq!(dist[i], ball.word_length[i]);
            }
            let unique: HashSet<_> = ball.elements.iter().collect();
            assert_eq!(unique.len(), ball.elements.len());
            // x ∼ y iff x⁻¹y is a generator
            for (a, b) in ball.graph.edges() {
                let step = g.multiply(&g.inverse(&ball.elements[a]).unwrap(), &ball.elements[b]).unwrap();
                assert!(g.generators().contains(&step));
            }
        }
    }

    #[test]
    fn growth_series_closed_forms() {
        let f = growth_series(&GroupModel::free_abelian(2), 3, DEFAULT_ELEMENT_BUDGET).unwrap();
        assert_eq!(f.values(), &[1.0, 5.0, 13.0, 25.0]);
        let f = growth_series(&GroupModel::free(2), 2, DEFAULT_ELEMENT_BUDGET).unwrap();
        assert_eq!(f.values(), &[1.0, 5.0, 17.0]);
        let f = growth_series(&GroupModel::free_abelian(0), 4, DEFAULT_ELEMENT_BUDGET).unwrap();
        assert!(f.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn finite_groups_saturate() {
        let swap = GroupModel::matrix(vec![vec![vec![0, 1], vec![1, 0]]]).unwrap();
        let f = growth_series(&swap, 4, 100).unwrap();
        assert_eq!(f.values(), &[1.0, 2.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn budget_is_enforced() {
        let err = cayley_ball(&GroupModel::free(2), 6, &MeasureRule::Counting, 100).unwrap_err();
        assert!(matches!(err, Error::Budget { limit: 100, .. }));
        assert!(err.to_string().contains("100"));
    }

    #[test]
    fn weighted_measure_respects_bounds() {
        let rule = MeasureRule::Weighted {
            weight: Box::new(|x: &Element| if matches!(x, Element::Word(w) if w.len() % 2 == 0) { 2.0 } else { 1.0 }),
            lower: 1.0,
            upper: 2.0,
        };
        let ball = cayley_ball(&GroupModel::free(1), 2, &rule, 100).unwrap();
        assert_eq!(ball.graph.total_measure(), 2.0 + 1.0 + 1.0 + 2.0 + 2.0);
        let bad = MeasureRule::Weighted { weight: Box::new(|_| 5.0), lower: 1.0, upper: 2.0 };
        assert!(cayley_ball(&GroupModel::free(1), 1, &bad, 100).is_err());
    }

    #[test]
    fn submultiplicative_growth() {
        for g in [GroupModel::free(2), GroupModel::free_abelian(2), GroupModel::free_abelian(3)] {
            let f = growth_series(&g, 8, DEFAULT_ELEMENT_BUDGET).unwrap();
            let v = f.values();
            for r in 0..=8 {
                for s in 0..=8 - r {
                    assert!(v[r + s] <= v[r] * v[s]);
                }
            }
        }
    }
}
