use serde::Serialize;

use super::cayley::enumerate_ball;
use super::element::Element;
use super::model::GroupModel;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystoleEstimate {
    /// `(x, min_γ |x⁻¹γx|)` for every sampled `x`, in BFS order.
    pub pointwise: Vec<(Element, usize)>,
    pub global: usize,
    pub sample_radius: usize,
    /// Only `γ` with `|γ| ≤ gamma_radius` were tried.
    pub gamma_radius: usize,
    /// False only when every sampled value is 1, which no nontrivial
    /// displacement can undercut.
    pub sample_limited: bool,
}

/// Pointwise systole `min_{γ≠e} d(x, γx) = min |x⁻¹γx|` of the left action
/// on the Cayley graph, for `x` in `B̄(e, sample_radius)` and `γ` in
/// `B̄(e, gamma_radius)`. `None` uses `2·sample_radius + 1`, which contains a
/// conjugate of a generator for every sampled `x`.
pub fn systole_estimate(
    group: &GroupModel,
    sample_radius: usize,
    gamma_radius: Option<usize>,
    budget: usize,
) -> Result<SystoleEstimate> {
    if group.is_trivial() {
        return Err(Error::Degenerate("the trivial group has no nontrivial element".into()));
    }
    let gamma_radius = gamma_radius.unwrap_or(2 * sample_radius + 1).max(1);
    // |x⁻¹γx| ≤ 2|x| + |γ|, so this table holds every length we look up
    let table = enumerate_ball(group, 2 * sample_radius + gamma_radius, budget)?;
    let samples = table.lengths.partition_point(|&l| l <= sample_radius);
    let gammas = table.lengths.partition_point(|&l| l <= gamma_radius);
    let mut pointwise = Vec::with_capacity(samples);
    for x in &table.elements[..samples] {
        let x_inv = group.inverse(x)?;
        let mut best = usize::MAX;
        for gamma in &table.elements[1..gammas] {
            let conj = group.multiply(&group.multiply(&x_inv, gamma)?, x)?;
            let len = *table
                .index
                .get(&conj)
                .map(|&i| &table.lengths[i])
                .ok_or_else(|| Error::Internal(format!("conjugate {conj} missing from the length table")))?;
            best = best.min(len);
            if best == 1 {
                break;
            }
        }
        pointwise.push((x.clone(), best));
    }
    let global = pointwise.iter().map(|p| p.1).min().unwrap_or(usize::MAX);
    let sample_limited = pointwise.iter().any(|p| p.1 > 1);
    Ok(SystoleEstimate { pointwise, global, sample_radius, gamma_radius, sample_limited })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::DEFAULT_ELEMENT_BUDGET;

    #[test]
    fn translations_move_by_generator_length() {
        let est = systole_estimate(&GroupModel::free_abelian(2), 2, None, DEFAULT_ELEMENT_BUDGET).unwrap();
        assert_eq!(est.global, 1);
        assert_eq!(est.pointwise.len(), 13);
        assert!(!est.sample_limited);
    }

    #[test]
    fn free_group_at_identity() {
        let est = systole_estimate(&GroupModel::free(2), 0, None, DEFAULT_ELEMENT_BUDGET).unwrap();
        assert_eq!(est.pointwise, vec![(Element::Word(vec![]), 1)]);
        let est = systole_estimate(&GroupModel::free(2), 2, None, DEFAULT_ELEMENT_BUDGET).unwrap();
        assert!(est.pointwise.iter().all(|p| p.1 == 1));
    }

    #[test]
    fn short_gamma_radius_overestimates() {
        let est = systole_estimate(&GroupModel::free(2), 1, Some(1), DEFAULT_ELEMENT_BUDGET).unwrap();
        let at_a = est.pointwise.iter().find(|p| p.0 == Element::Word(vec![1])).unwrap();
        assert_eq!(at_a.1, 1); // γ = a itself commutes with a
        let est = systole_estimate(&GroupModel::free(2), 2, Some(1), DEFAULT_ELEMENT_BUDGET).unwrap();
        let at_ab = est.pointwise.iter().find(|p| p.0 == Element::Word(vec![1, 2])).unwrap();
        // B A γ a b has length ≥ 3 for every generator γ
        assert_eq!(at_ab.1, 3);
        assert!(est.sample_limited);
    }

    #[test]
    fn trivial_group_is_degenerate() {
        let err = systole_estimate(&GroupModel::free_abelian(0), 1, None, 100).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }
}
