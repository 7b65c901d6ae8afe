"""Split-signature self-dual Yang-Mills fields: construction and numerical checks.

Points of the chart are real 2x2 matrices ``X = [[x11, x12], [x21, x22]]``;
forms are stored componentwise (see :mod:`splitym.forms`).
"""

from __future__ import annotations

from .adhm import ADHMSystem, ComplexADHMSystem, induced_field, nondegeneracy_scan, universal_datum
from .charge import ChargeConfig, charge_reduction_chain, topological_charge
from .connection import GaugeField, asdym_residual, curvature_fd, sdym_residual
from .errors import (
    ChargeAccuracyError,
    DegenerateDataError,
    DomainError,
    OutOfChartError,
    SingularSeedError,
)
from .grassmann import Plane, Transition
from .solutions import (
    ConformalElement,
    basic_split_anti_instanton,
    basic_split_instanton,
    center_scale,
    conformal_pullback,
    euclidean_basic_instanton,
)
from .thooft import ScalarSolution, f0, local_ansatz, xray_section, xray_transform

__version__ = "0.1.0"

__all__ = [
    "ADHMSystem",
    "ChargeAccuracyError",
    "ChargeConfig",
    "ComplexADHMSystem",
    "ConformalElement",
    "DegenerateDataError",
    "DomainError",
    "GaugeField",
    "OutOfChartError",
    "Plane",
    "ScalarSolution",
    "SingularSeedError",
    "Transition",
    "asdym_residual",
    "basic_split_anti_instanton",
    "basic_split_instanton",
    "center_scale",
    "charge_reduction_chain",
    "conformal_pullback",
    "curvature_fd",
    "euclidean_basic_instanton",
    "f0",
    "induced_field",
    "local_ansatz",
    "nondegeneracy_scan",
    "sdym_residual",
    "topological_charge",
    "universal_datum",
    "xray_section",
    "xray_transform",
]
