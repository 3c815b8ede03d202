"""Exterior algebra, polynomial differential forms and forms on diffeological spaces."""

from __future__ import annotations

from .diffeology import (DiffSpace, SpaceVectorField, TangentVector, equivalent, is_plaque, joint_plaque_probe,
                         locally_integrable_probe, tangent_class, tangent_space, weaker_condition_probe)
from .errors import TDSError
from .expr import Box, PolyExpr, SmoothMapSpec, compose, parse_expr
from .exterior import ExteriorForm, wedge, wedge_all
from .forms import DifferentialForm, VectorFieldOnBox
from .plaque_forms import AlgebraicForm, PlaqueIndexedForm, PointwiseForm, psi, psi_inverse_at
from .spaces import get_fixture

__all__ = [
    "AlgebraicForm", "Box", "DiffSpace", "DifferentialForm", "ExteriorForm", "PlaqueIndexedForm", "PointwiseForm",
    "PolyExpr", "SmoothMapSpec", "SpaceVectorField", "TDSError", "TangentVector", "VectorFieldOnBox", "compose",
    "equivalent", "get_fixture", "is_plaque", "joint_plaque_probe", "locally_integrable_probe", "parse_expr", "psi",
    "psi_inverse_at", "tangent_class", "tangent_space", "weaker_condition_probe", "wedge", "wedge_all",
]
