"""Diophantine approximation on boundaries of hyperbolic spaces: geometry, groups, games, estimators."""
from .geometry import (INF, End, HPoint, BlockVector, MetametricValue, UpperHalfPlane, PoincareBall,
                       RegularTree, BlockHilbert, identity_audit)

__version__ = "0.1.0"
