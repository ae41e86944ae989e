//! Block index sets and the Gaussian complexity of the stationary AR class.
//!
//! The supremum of a linear functional over the convex hull of the
//! stationarity domain is attained at one of its `p + 1` vertices, so the
//! complexity only involves the design rows projected onto the vertices.
//! [`empirical_gaussian_complexity`] is the Slepian upper bound; the
//! Monte Carlo estimator evaluates the defining expectation directly.

use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};
#[allow(unused_imports)]
use num_traits::Float;

use crate::armodel::Design;
use crate::error::{invalid, Error, Result};
use crate::stability::StabilityPolytope;
use crate::stats::{chunked_monte_carlo, MonteCarloEstimate};

/// Whether the index set holds `μ` points (`k = 0..μ-1`) or `μ + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum IndexCount {
    #[default]
    Mu,
    MuPlusOne,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BlockPlan {
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub mu: usize,
    /// 1-based design-row indices, `2m` apart.
    pub indices: Vec<usize>,
    /// Indices beyond the last design row that were discarded.
    pub dropped: usize,
    pub index_count: IndexCount,
}

/// `i_k = max(⌊m/2⌋, 1) + 2mk`, clamped to the `n - p` design rows.
///
/// The offset is raised to 1 when `m = 1` so every index names a design row.
pub fn block_indices(n: usize, p: usize, m: usize, mu: usize, index_count: IndexCount) -> Result<BlockPlan> {
    if m == 0 || mu == 0 {
        return Err(invalid("block length and block count must be positive"));
    }
    if 2 * mu * m > n {
        return Err(invalid("2·mu·m exceeds the sample size"));
    }
    let rows = n.saturating_sub(p);
    let offset = (m / 2).max(1);
    let count = match index_count {
        IndexCount::Mu => mu,
        IndexCount::MuPlusOne => mu + 1,
    };
    let all = (0..count).map(|k| offset + 2 * m * k);
    let indices: Vec<usize> = all.clone().filter(|&i| i <= rows).collect();
    let dropped = count - indices.len();
    if indices.is_empty() {
        return Err(Error::EmptyIndexSet { rows });
    }
    Ok(BlockPlan { n, p, m, mu, indices, dropped, index_count })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComplexityValue {
    pub value: f64,
    pub p: usize,
    pub points_used: usize,
}

fn check_inputs(design: &Design, plan: &BlockPlan, poly: Option<&StabilityPolytope>) -> Result<()> {
    if let Some(poly) = poly {
        if poly.p != design.p {
            return Err(invalid("polytope order differs from design order"));
        }
    }
    if plan.indices.iter().any(|&i| i == 0 || i > design.rows()) {
        return Err(invalid("block index outside the design rows"));
    }
    Ok(())
}

/// Projections `⟨X_i, φ_j⟩`, one vector per vertex, over the rows in `I`.
fn vertex_projections(design: &Design, plan: &BlockPlan, poly: &StabilityPolytope) -> Vec<Vec<f64>> {
    poly.vertices
        .iter()
        .map(|v| plan.indices.iter().map(|&i| design.row_dot(i - 1, v.as_slice())).collect())
        .collect()
}

/// `max_{j<j'} (Σ_{i∈I} ⟨X_i, φ_j - φ_j'⟩²)^{1/2}` over all unordered vertex pairs.
pub fn max_vertex_pair_norm(design: &Design, plan: &BlockPlan, poly: &StabilityPolytope) -> Result<f64> {
    check_inputs(design, plan, Some(poly))?;
    let proj = vertex_projections(design, plan, poly);
    let mut best = 0.0_f64;
    for j in 0..proj.len() {
        for k in j + 1..proj.len() {
            let ss: f64 = proj[j].iter().zip(&proj[k]).map(|(a, b)| (a - b) * (a - b)).sum();
            best = best.max(ss);
        }
    }
    Ok(best.sqrt())
}

/// Slepian bound `(2√2/μ) √ln(p+1) · max_pair_norm` at block scale.
pub fn empirical_gaussian_complexity(
    design: &Design,
    plan: &BlockPlan,
    poly: &StabilityPolytope,
) -> Result<ComplexityValue> {
    let d = max_vertex_pair_norm(design, plan, poly)?;
    let p = design.p as f64;
    let value = 2.0 * core::f64::consts::SQRT_2 / plan.mu as f64 * (p + 1.0).ln().sqrt() * d;
    Ok(ComplexityValue { value, p: design.p, points_used: plan.indices.len() })
}

/// `(4/μ) √(M/2) (Σ_{i∈I} X_i²)^{1/2}` for an AR(1) design.
pub fn ar1_complexity_term(design: &Design, plan: &BlockPlan, cap: f64) -> Result<f64> {
    if design.p != 1 {
        return Err(invalid("the AR(1) complexity term needs a p = 1 design"));
    }
    check_inputs(design, plan, None)?;
    let ss: f64 = plan.indices.iter().map(|&i| design.x[(i - 1, 0)].powi(2)).sum();
    Ok(4.0 / plan.mu as f64 * (cap / 2.0).sqrt() * ss.sqrt())
}

/// Monte Carlo estimate of `2 E_Z max_j |(1/μ) Σ_{i∈I} Z_i ⟨X_i, φ_j⟩|`.
pub fn monte_carlo_complexity(
    design: &Design,
    plan: &BlockPlan,
    poly: &StabilityPolytope,
    draws: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if draws == 0 {
        return Err(invalid("at least one draw is required"));
    }
    check_inputs(design, plan, Some(poly))?;
    let proj = vertex_projections(design, plan, poly);
    let scale = 2.0 / plan.mu as f64;
    let len = plan.indices.len();
    Ok(chunked_monte_carlo(draws, seed, |rng| {
        let z: Vec<f64> = (0..len).map(|_| StandardNormal.sample(rng)).collect();
        let sup = proj
            .iter()
            .map(|a| a.iter().zip(&z).map(|(x, g)| x * g).sum::<f64>().abs())
            .fold(0.0, f64::max);
        scale * sup
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::armodel::build_design;
    use crate::stability::hull_vertices;
    use crate::timeseries::GrowthSeries;
    use alloc::vec;
    use proptest::prelude::*;

    fn design(v: &[f64], p: usize) -> Design {
        build_design(&GrowthSeries::from_values(v.to_vec(), "t").unwrap(), p).unwrap()
    }

    #[test]
    fn index_examples() {
        let plan = block_indices(28, 1, 2, 7, IndexCount::Mu).unwrap();
        assert_eq!(plan.indices, vec![1, 5, 9, 13, 17, 21, 25]);

        let plan = block_indices(20, 1, 1, 10, IndexCount::Mu).unwrap();
        assert_eq!(plan.indices.len(), 10);
        assert!(plan.indices.iter().all(|i| i % 2 == 1));
        assert!(plan.indices.windows(2).all(|w| w[1] - w[0] == 2));

        let plan = block_indices(12150, 23, 7, 867, IndexCount::Mu).unwrap();
        assert_eq!(plan.indices.len(), 867);
        assert_eq!(*plan.indices.last().unwrap(), 12127);
        assert_eq!(plan.dropped, 0);
        let plan = block_indices(12150, 24, 7, 867, IndexCount::Mu).unwrap();
        assert_eq!(plan.dropped, 1);

        let plan = block_indices(28, 1, 2, 7, IndexCount::MuPlusOne).unwrap();
        assert_eq!(plan.indices.len(), 7);
        assert_eq!(plan.dropped, 1);

        assert!(block_indices(28, 1, 2, 8, IndexCount::Mu).is_err());
        assert!(block_indices(28, 1, 0, 8, IndexCount::Mu).is_err());
        assert_eq!(block_indices(4, 4, 1, 2, IndexCount::Mu), Err(Error::EmptyIndexSet { rows: 0 }));
    }

    #[test]
    fn zero_design_has_zero_complexity() {
        let d = design(&[0.0; 20], 2);
        let plan = block_indices(20, 2, 1, 5, IndexCount::Mu).unwrap();
        let poly = hull_vertices(2).unwrap();
        assert_eq!(empirical_gaussian_complexity(&d, &plan, &poly).unwrap().value, 0.0);
        assert_eq!(monte_carlo_complexity(&d, &plan, &poly, 100, 1).unwrap().mean, 0.0);
        let d1 = design(&[0.0; 20], 1);
        let plan1 = block_indices(20, 1, 1, 5, IndexCount::Mu).unwrap();
        assert_eq!(ar1_complexity_term(&d1, &plan1, 0.05).unwrap(), 0.0);
    }

    #[test]
    fn ar1_vertex_formula() {
        let v = [0.3, -1.2, 0.7, 2.0, -0.4, 0.9, 1.1, -0.8, 0.2, 0.5];
        let d = design(&v, 1);
        let plan = block_indices(10, 1, 1, 4, IndexCount::Mu).unwrap();
        let ss: f64 = plan.indices.iter().map(|&i| v[i - 1] * v[i - 1]).sum();
        let expected = 2.0 * 2f64.sqrt() / 4.0 * 2f64.ln().sqrt() * 2.0 * ss.sqrt();
        let got = empirical_gaussian_complexity(&d, &plan, &hull_vertices(1).unwrap()).unwrap();
        assert!((got.value - expected).abs() < 1e-14);
        assert_eq!(got.points_used, 4);
    }

    #[test]
    fn ar1_corollary_unit_algebra() {
        // μ = 4, M = 2 and Σ X_i² = 1 over I = {1, 3, 5, 7}
        let v = [0.5, 0.0, 0.5, 0.0, 0.5, 0.0, 0.5, 0.0, 0.0];
        let d = design(&v, 1);
        let plan = block_indices(9, 1, 1, 4, IndexCount::Mu).unwrap();
        assert_eq!(plan.indices, vec![1, 3, 5, 7]);
        assert!((ar1_complexity_term(&d, &plan, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(ar1_complexity_term(&design(&v, 2), &plan, 2.0).is_err());
    }

    #[test]
    fn ar2_toy_design_by_hand() {
        // rows (x_{i+1}, x_i): (2,1), (-1,2), (0,-1), (3,0), (1,3)
        let v = [1.0, 2.0, -1.0, 0.0, 3.0, 1.0, 0.0];
        let d = design(&v, 2);
        let plan = BlockPlan {
            n: 7,
            p: 2,
            m: 1,
            mu: 5,
            indices: vec![1, 2, 3, 4, 5],
            dropped: 0,
            index_count: IndexCount::Mu,
        };
        // vertex differences: (2,-2), (4,0), (2,2)
        // (2,-2): 2, -6, 2, 6, -4 -> 96
        // (4,0): 8, -4, 0, 12, 4 -> 240
        // (2,2): 6, 2, -2, 6, 8 -> 144
        let expected_norm = 240f64.sqrt();
        let poly = hull_vertices(2).unwrap();
        assert!((max_vertex_pair_norm(&d, &plan, &poly).unwrap() - expected_norm).abs() < 1e-12);
        let c = empirical_gaussian_complexity(&d, &plan, &poly).unwrap();
        let expected = 2.0 * 2f64.sqrt() / 5.0 * 3f64.ln().sqrt() * expected_norm;
        assert!((c.value - expected).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_is_seeded_and_homogeneous() {
        let v: Vec<f64> = (0..40).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let d = design(&v, 3);
        let doubled = design(&v.iter().map(|x| 2.0 * x).collect::<Vec<_>>(), 3);
        let plan = block_indices(40, 3, 2, 9, IndexCount::Mu).unwrap();
        let poly = hull_vertices(3).unwrap();
        let a = monte_carlo_complexity(&d, &plan, &poly, 2000, 5).unwrap();
        let b = monte_carlo_complexity(&doubled, &plan, &poly, 2000, 5).unwrap();
        assert_eq!(a, monte_carlo_complexity(&d, &plan, &poly, 2000, 5).unwrap());
        assert!((b.mean - 2.0 * a.mean).abs() < 1e-12 * b.mean);
        assert!(a.mean > 0.0);
        assert!(monte_carlo_complexity(&d, &plan, &poly, 0, 5).is_err());
    }

    proptest! {
        #[test]
        fn scale_equivariance(v in proptest::collection::vec(-3.0f64..3.0, 30..60), c in 0.1f64..10.0, p in 1usize..5) {
            let n = v.len();
            let d = design(&v, p);
            let ds = design(&v.iter().map(|x| c * x).collect::<Vec<_>>(), p);
            let plan = block_indices(n, p, 2, n / 5, IndexCount::Mu).unwrap();
            let poly = hull_vertices(p).unwrap();
            let a = empirical_gaussian_complexity(&d, &plan, &poly).unwrap().value;
            let b = empirical_gaussian_complexity(&ds, &plan, &poly).unwrap().value;
            prop_assert!((b - c * a).abs() <= 1e-12 * b.abs().max(1.0));
        }

        #[test]
        fn more_indices_never_decrease_the_sum(v in proptest::collection::vec(-3.0f64..3.0, 40..80), p in 1usize..5) {
            let n = v.len();
            let d = design(&v, p);
            let poly = hull_vertices(p).unwrap();
            let small = block_indices(n, p, 1, 5, IndexCount::Mu).unwrap();
            let big = block_indices(n, p, 1, 5, IndexCount::MuPlusOne).unwrap();
            prop_assert!(max_vertex_pair_norm(&d, &big, &poly).unwrap() >= max_vertex_pair_norm(&d, &small, &poly).unwrap());
        }
    }
}
