//! Pairs of sampled fields with a domain/image tag.
//!
//! The solver state is a perturbation pair `(r, γ)` living in the weighted
//! domain space; the operators produce image pairs `(f, g)`.  Both are two
//! scalar profiles on the same grid, but their norms weight them completely
//! differently, so the pair carries a [`PairKind`] tag and the norm routines
//! refuse a pair of the wrong kind rather than silently measuring it with
//! the wrong weights.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::SampledField;
use crate::grid::Grid;

/// Which function space a pair belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    /// Perturbation pairs `(r, γ)` measured by the domain norm.
    DomainX,
    /// Operator outputs `(f, g)` measured by the image norm.
    ImageY,
}

impl PairKind {
    pub fn name(self) -> &'static str {
        match self {
            PairKind::DomainX => "domain pair (r, gamma)",
            PairKind::ImageY => "image pair (f, g)",
        }
    }
}

/// Two scalar profiles sharing one grid, tagged with their space.
#[derive(Debug, Clone)]
pub struct FieldPair {
    pub first: SampledField,
    pub second: SampledField,
    kind: PairKind,
}

impl FieldPair {
    pub fn new(first: SampledField, second: SampledField, kind: PairKind) -> FieldPair {
        assert!(
            Arc::ptr_eq(first.grid(), second.grid()),
            "pair components must share a grid"
        );
        FieldPair {
            first,
            second,
            kind,
        }
    }

    /// The zero perturbation `(0, 0)`.
    pub fn zero(grid: Arc<Grid>, kind: PairKind) -> FieldPair {
        FieldPair {
            first: SampledField::zero(grid.clone()),
            second: SampledField::zero(grid),
            kind,
        }
    }

    pub fn kind(&self) -> PairKind {
        self.kind
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.first.grid()
    }

    /// Fails unless the pair has the expected kind.
    pub fn expect_kind(&self, expected: PairKind) -> Result<()> {
        if self.kind != expected {
            return Err(Error::KindMismatch {
                expected: expected.name(),
                got: self.kind.name(),
            });
        }
        Ok(())
    }

    pub fn scale(&self, c: f64) -> FieldPair {
        FieldPair {
            first: self.first.scale(c),
            second: self.second.scale(c),
            kind: self.kind,
        }
    }

    /// `self + c · other`; both pairs must live in the same space.
    pub fn add_scaled(&self, other: &FieldPair, c: f64) -> Result<FieldPair> {
        other.expect_kind(self.kind)?;
        Ok(FieldPair {
            first: self.first.add_scaled(&other.first, c)?,
            second: self.second.add_scaled(&other.second, c)?,
            kind: self.kind,
        })
    }

    pub fn sub(&self, other: &FieldPair) -> Result<FieldPair> {
        self.add_scaled(other, -1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::params::GridSpec;

    #[test]
    fn kind_checks_reject_crossed_pairs() {
        let g = Grid::new(GridSpec::default()).unwrap();
        let x = FieldPair::zero(g.clone(), PairKind::DomainX);
        let y = FieldPair::zero(g, PairKind::ImageY);
        assert!(x.expect_kind(PairKind::DomainX).is_ok());
        assert!(x.expect_kind(PairKind::ImageY).is_err());
        assert!(x.add_scaled(&y, 1.0).is_err());
    }

    #[test]
    fn arithmetic_preserves_kind() {
        let g = Grid::new(GridSpec::default()).unwrap();
        let a = FieldPair::zero(g.clone(), PairKind::DomainX);
        let b = FieldPair::zero(g, PairKind::DomainX);
        let c = a.add_scaled(&b, 2.0).unwrap();
        assert_eq!(c.kind(), PairKind::DomainX);
        assert_eq!(c.scale(3.0).kind(), PairKind::DomainX);
    }
}
