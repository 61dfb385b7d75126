//! Finite Hilbert spaces: position grids, qubits, generic finite factors and
//! tensor products of those.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// The Hilbert space an amplitude vector or operator lives on.
///
/// Product spaces index their basis with the first factor major. The weight of
/// a space is the quadrature weight carried by inner products: `dx` on a grid,
/// `1` on finite factors, multiplicative over products.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Space {
    Grid(GridSpec),
    Qubit,
    Finite { dim: usize },
    Product { factors: Vec<Space> },
}

impl Space {
    pub fn grid(grid: GridSpec) -> Self {
        Space::Grid(grid)
    }

    pub fn finite(dim: usize) -> Self {
        Space::Finite { dim }
    }

    /// `grid ⊗ C²`.
    pub fn hybrid(grid: GridSpec) -> Self {
        Space::Grid(grid).tensor(&Space::Qubit)
    }

    pub fn tensor(&self, other: &Space) -> Space {
        let mut factors = self.factors();
        factors.extend(other.factors());
        Space::Product { factors }
    }

    /// Flattened list of non-product factors.
    pub fn factors(&self) -> Vec<Space> {
        match self {
            Space::Product { factors } => factors.iter().flat_map(|f| f.factors()).collect(),
            other => vec![other.clone()],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Space::Grid(g) => g.n(),
            Space::Qubit => 2,
            Space::Finite { dim } => *dim,
            Space::Product { factors } => factors.iter().map(Space::dim).product(),
        }
    }

    pub fn weight(&self) -> f64 {
        match self {
            Space::Grid(g) => g.dx(),
            Space::Qubit | Space::Finite { .. } => 1.0,
            Space::Product { factors } => factors.iter().map(Space::weight).product(),
        }
    }

    pub fn as_grid(&self) -> Option<&GridSpec> {
        match self {
            Space::Grid(g) => Some(g),
            _ => None,
        }
    }

    pub fn require_grid(&self) -> Result<&GridSpec> {
        self.as_grid()
            .ok_or_else(|| Error::SpaceMismatch(format!("expected a position grid, found {}", self.label())))
    }

    pub fn is_hybrid(&self) -> bool {
        matches!(self.factors().as_slice(), [Space::Grid(_), Space::Qubit])
    }

    /// Short tag: `grid`, `qubit`, `hybrid`, `finite` or `product`.
    pub fn label(&self) -> &'static str {
        match self {
            Space::Grid(_) => "grid",
            Space::Qubit => "qubit",
            Space::Finite { .. } => "finite",
            Space::Product { .. } if self.is_hybrid() => "hybrid",
            Space::Product { .. } => "product",
        }
    }

    pub fn ensure_same(&self, other: &Space) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(format!("{} vs {}", self.label(), other.label())))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_flatten_and_multiply() {
        let g = GridSpec::new(16, 8.0).unwrap();
        let h = Space::hybrid(g);
        assert_eq!(h.dim(), 32);
        assert_eq!(h.weight(), 0.5);
        assert_eq!(h.label(), "hybrid");
        let big = h.tensor(&Space::finite(3));
        assert_eq!(big.factors().len(), 3);
        assert_eq!(big.dim(), 96);
    }
}
