//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use whasym::{Complex64, Grid, Preset, ProblemSpec, SampledMatrixFunction};

pub fn grid(nodes: usize) -> Arc<Grid> {
    Grid::new(10.0, nodes).expect("valid grid")
}

/// `1/(x² + 1)`.
pub fn lorentzian(grid: &Arc<Grid>) -> SampledMatrixFunction {
    SampledMatrixFunction::sample_scalar(
        grid,
        |x| Complex64::new(1.0 / (x * x + 1.0), 0.0),
        Complex64::new(0.0, 0.0),
    )
    .expect("finite samples")
}

/// `(x² + 16)/(x² + 1)`.
pub fn index_zero_symbol(grid: &Arc<Grid>) -> SampledMatrixFunction {
    SampledMatrixFunction::sample_scalar(
        grid,
        |x| Complex64::new((x * x + 16.0) / (x * x + 1.0), 0.0),
        Complex64::new(1.0, 0.0),
    )
    .expect("finite samples")
}

pub fn example_problem(nodes: usize, order: usize) -> ProblemSpec {
    let mut spec = ProblemSpec::preset(Preset::PaperExample);
    spec.grid.nodes = nodes;
    spec.order = order;
    spec
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid() {
        let g = grid(64);
        assert_eq!(lorentzian(&g).grid().len(), 64);
        assert_eq!(index_zero_symbol(&g).at_infinity()[(0, 0)], Complex64::new(1.0, 0.0));
        example_problem(64, 2).validate().unwrap();
    }
}
