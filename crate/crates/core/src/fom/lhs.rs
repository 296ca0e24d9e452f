use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, RomError};

/// Axis-aligned box of design parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSpace {
    bounds: Vec<(f64, f64)>,
}

impl ParameterSpace {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(RomError::arg(
                "parameter space needs at least one dimension",
            ));
        }
        for (d, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(RomError::arg(format!(
                    "dimension {d}: bounds [{lo}, {hi}] are not increasing"
                )));
            }
        }
        Ok(ParameterSpace { bounds })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn contains(&self, mu: &[f64]) -> bool {
        mu.len() == self.dim()
            && mu
                .iter()
                .zip(&self.bounds)
                .all(|(&x, &(lo, hi))| x >= lo && x <= hi)
    }

    fn scale(&self, unit: &[f64]) -> Vec<f64> {
        unit.iter()
            .zip(&self.bounds)
            .map(|(&t, &(lo, hi))| lo + t * (hi - lo))
            .collect()
    }
}

/// Stratified unit-cube design: in every dimension each of the `n` strata
/// holds exactly one point, placed uniformly inside its stratum.
fn unit_lhs(n: usize, p: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut points = vec![vec![0.0; p]; n];
    let mut perm: Vec<usize> = (0..n).collect();
    for d in 0..p {
        perm.shuffle(rng);
        for (i, point) in points.iter_mut().enumerate() {
            let jitter: f64 = rng.random();
            point[d] = (perm[i] as f64 + jitter) / n as f64;
        }
    }
    points
}

/// Smallest pairwise Euclidean distance (infinite for fewer than two points).
pub fn min_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            best = best.min(d);
        }
    }
    best
}

/// Plain Latin hypercube sample of `n` points, deterministic per seed.
pub fn lhs_sample(space: &ParameterSpace, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n < 1 {
        return Err(RomError::arg("need at least one sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(unit_lhs(n, space.dim(), &mut rng)
        .iter()
        .map(|u| space.scale(u))
        .collect())
}

/// Best of `candidates` Latin hypercubes by minimum pairwise distance in the
/// unit cube; the first candidate wins ties.
pub fn lhs_maximin(
    space: &ParameterSpace,
    n: usize,
    seed: u64,
    candidates: usize,
) -> Result<Vec<Vec<f64>>> {
    if n < 1 || candidates < 1 {
        return Err(RomError::arg("need at least one sample and one candidate"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = unit_lhs(n, space.dim(), &mut rng);
    let mut best_d = min_pairwise_distance(&best);
    for _ in 1..candidates {
        let cand = unit_lhs(n, space.dim(), &mut rng);
        let d = min_pairwise_distance(&cand);
        if d > best_d {
            best = cand;
            best_d = d;
        }
    }
    Ok(best.iter().map(|u| space.scale(u)).collect())
}

/// Stratum index (0-based) of each point along dimension `d`.
pub fn strata(space: &ParameterSpace, points: &[Vec<f64>], d: usize) -> Vec<usize> {
    let (lo, hi) = space.bounds()[d];
    let n = points.len();
    points
        .iter()
        .map(|p| {
            let t = (p[d] - lo) / (hi - lo);
            ((t * n as f64).floor() as usize).min(n - 1)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_stratified(space: &ParameterSpace, pts: &[Vec<f64>]) {
        for d in 0..space.dim() {
            let mut s = strata(space, pts, d);
            s.sort_unstable();
            assert_eq!(s, (0..pts.len()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn single_point_inside_box() {
        let space = ParameterSpace::new(vec![(1.0, 2.0), (100.0, 400.0)]).unwrap();
        let pts = lhs_sample(&space, 1, 3).unwrap();
        assert_eq!(pts.len(), 1);
        assert!(space.contains(&pts[0]));
    }

    #[test]
    fn four_points_fill_strata() {
        let space = ParameterSpace::new(vec![(0.0, 1.0), (-2.0, 2.0)]).unwrap();
        let pts = lhs_sample(&space, 4, 8).unwrap();
        assert_stratified(&space, &pts);
    }

    #[test]
    fn exhaustive_stratification() {
        let space = ParameterSpace::new(vec![(1.0, 2.0), (1.0, 2.0), (100.0, 400.0)]).unwrap();
        for n in 1..=64 {
            for seed in 0..3 {
                assert_stratified(&space, &lhs_sample(&space, n, seed).unwrap());
                assert_stratified(&space, &lhs_maximin(&space, n, seed, 5).unwrap());
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let space = ParameterSpace::new(vec![(0.0, 1.0); 3]).unwrap();
        assert_eq!(
            lhs_sample(&space, 10, 5).unwrap(),
            lhs_sample(&space, 10, 5).unwrap()
        );
        assert_ne!(
            lhs_sample(&space, 10, 5).unwrap(),
            lhs_sample(&space, 10, 6).unwrap()
        );
    }

    #[test]
    fn maximin_spreads_points() {
        let space = ParameterSpace::new(vec![(0.0, 1.0); 3]).unwrap();
        let (mut plain, mut best) = (0.0, 0.0);
        for seed in 0..20 {
            plain += min_pairwise_distance(&lhs_sample(&space, 20, seed).unwrap());
            best += min_pairwise_distance(&lhs_maximin(&space, 20, seed, 50).unwrap());
        }
        assert!(best >= plain, "{best} < {plain}");
    }

    #[test]
    fn argument_errors() {
        assert!(ParameterSpace::new(vec![(1.0, 1.0)]).is_err());
        assert!(ParameterSpace::new(vec![]).is_err());
        let space = ParameterSpace::new(vec![(0.0, 1.0)]).unwrap();
        assert!(lhs_sample(&space, 0, 1).is_err());
    }
}
