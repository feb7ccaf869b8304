use crate::error::{Error, Result};
use crate::random_set::Interval;

/// Points per dimension when none are given.
pub const DEFAULT_POINTS_PER_DIM: usize = 11;

/// Tensor grid over a box of hyperparameters, flattened with the last dimension fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterGrid {
    dims: Vec<Interval>,
    counts: Vec<usize>,
    points: Vec<Vec<f64>>,
}

impl ParameterGrid {
    pub fn new(dims: Vec<Interval>, counts: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.len() != counts.len() {
            return Err(Error::InvalidInput(format!(
                "{} parameter intervals with {} point counts",
                dims.len(),
                counts.len()
            )));
        }
        if let Some(d) = counts.iter().position(|&c| c == 0) {
            return Err(Error::InvalidInput(format!("parameter dimension {d} has no grid points")));
        }
        let axes: Vec<Vec<f64>> = dims.iter().zip(&counts).map(|(d, &c)| d.linspace(c)).collect();
        let mut points = vec![Vec::new()];
        for axis in &axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        Ok(Self { dims, counts, points })
    }

    pub fn uniform(dims: Vec<Interval>) -> Result<Self> {
        let counts = vec![DEFAULT_POINTS_PER_DIM; dims.len()];
        Self::new(dims, counts)
    }

    /// One-dimensional grid.
    pub fn line(range: Interval, count: usize) -> Result<Self> {
        Self::new(vec![range], vec![count])
    }

    pub fn dims(&self) -> &[Interval] {
        &self.dims
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flattening_and_counts() {
        let g = ParameterGrid::new(
            vec![Interval::new(-1.0, 1.0).unwrap(), Interval::new(1.0, 2.0).unwrap()],
            vec![3, 2],
        )
        .unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g.points()[0], vec![-1.0, 1.0]);
        assert_eq!(g.points()[1], vec![-1.0, 2.0]);
        assert_eq!(g.points()[5], vec![1.0, 2.0]);
        for p in g.points() {
            assert!(g.dims().iter().zip(p).all(|(d, v)| d.contains(*v)));
        }
    }

    #[test]
    fn default_grid_is_eleven_points() {
        let g = ParameterGrid::uniform(vec![Interval::new(0.5, 1.5).unwrap()]).unwrap();
        assert_eq!(g.len(), 11);
        assert!((g.points()[1][0] - 0.6).abs() < 1e-15);
        assert_eq!(g.points()[10][0], 1.5);
    }

    #[test]
    fn coarse_grid_points_reappear_in_fine_grid() {
        let d = Interval::new(0.5, 1.5).unwrap();
        let fine = ParameterGrid::line(d, 11).unwrap();
        let coarse = ParameterGrid::line(d, 6).unwrap();
        for p in coarse.points() {
            assert!(fine.points().contains(p));
        }
    }

    #[test]
    fn invalid_grids() {
        let d = Interval::new(0.0, 1.0).unwrap();
        assert!(ParameterGrid::new(vec![d], vec![0]).is_err());
        assert!(ParameterGrid::new(vec![d], vec![1, 2]).is_err());
        assert_eq!(ParameterGrid::line(d, 1).unwrap().points(), &[vec![0.5]]);
    }
}
