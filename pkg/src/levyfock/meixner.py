"""Meixner-class detection and its closed-form operator parts.

A recurrence table belongs to the Meixner class when its diagonal
coefficients grow affinely, ``a[n] = lam * (n + 1)``, and its
off-diagonal coefficients quadratically, ``b[n] = kappa * n * (n + 1)``.
The scale-invariant ratio ``lam**2 / (4 * kappa)`` separates the three
members: one for the gamma family, above one for Pascal, below one for
Meixner (with unit kappa this reduces to comparing ``|lam|`` with two).

For tables in the class, the neutral and annihilation parts of the field
operator preserve plainly symmetric tensors and admit the closed forms
implemented here; the general block assembler must agree with them, which
is one of the package's cross-checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import SymmetricTensor, symmetric_basis
from .measures import TestFunction
from .orthopoly import RecurrenceTable

__all__ = [
    "MeixnerParameters",
    "GAMMA_TYPE",
    "PASCAL_TYPE",
    "MEIXNER_TYPE",
    "detect",
    "meixner_neutral",
    "meixner_annihilation",
]

GAMMA_TYPE = "gamma-type"
PASCAL_TYPE = "pascal-type"
MEIXNER_TYPE = "meixner-type"


@dataclass(frozen=True)
class MeixnerParameters:
    """Fitted Meixner-class parameters and the pattern-fit residuals."""

    lam: float
    kappa: float
    classification: str
    residual_a: float
    residual_b: float

    @property
    def ratio(self) -> float:
        return self.lam**2 / (4.0 * self.kappa)


def detect(table: RecurrenceTable, tol: float = 1e-8) -> MeixnerParameters | None:
    """Fit the Meixner-class coefficient patterns to a recurrence table.

    ``lam`` is read off the first diagonal coefficient and ``kappa`` off
    half the first off-diagonal one; the remaining rows must then match
    ``lam * (n + 1)`` and ``kappa * n * (n + 1)`` within ``tol`` relative
    to the largest coefficient magnitude.  Returns None when either
    pattern fails.  At least three rows are required -- fewer could not
    distinguish the pattern from an arbitrary table.
    """
    if tol <= 0.0:
        raise ValueError("tolerance must be positive")
    if table.depth < 3:
        raise ValueError("insufficient depth to detect pattern (need at least 3)")
    lam = table.a[0]
    kappa = table.b[1] / 2.0
    scale = max(
        1.0,
        max(abs(v) for v in table.a),
        max(table.b[1:]),
    )
    residual_a = max(
        abs(table.a[n] - lam * (n + 1)) for n in range(table.depth)
    )
    residual_b = max(
        abs(table.b[n] - kappa * n * (n + 1)) for n in range(1, table.depth)
    )
    if residual_a > tol * scale or residual_b > tol * scale:
        return None
    ratio = lam**2 / (4.0 * kappa)
    if abs(ratio - 1.0) <= tol:
        classification = GAMMA_TYPE
    elif ratio > 1.0:
        classification = PASCAL_TYPE
    else:
        classification = MEIXNER_TYPE
    return MeixnerParameters(lam, kappa, classification, residual_a, residual_b)


def meixner_neutral(phi: TestFunction, f: SymmetricTensor, lam: float) -> SymmetricTensor:
    """Closed-form neutral part on a plainly symmetric level-n tensor.

    ``lam`` times the level times the symmetrization of the test function
    applied to the first coordinate; since the input is symmetric this
    collapses to ``lam`` times the sum of test-function values over the
    coordinates.
    """
    if phi.grid != f.grid:
        raise ValueError("grid mismatch")
    basis = symmetric_basis(f.level, f.grid)
    values = np.array(
        [
            lam * math.fsum(phi[p] for p in rep) * float(f.values[i])
            for i, rep in enumerate(basis.reps)
        ]
    )
    return SymmetricTensor(f.grid, f.level, values)


def meixner_annihilation(
    phi: TestFunction,
    f: SymmetricTensor,
    lam: float,
    kappa: float,
    mass: float,
) -> SymmetricTensor:
    """Closed-form annihilation part on a plainly symmetric level-n tensor.

    Sum of the grid contraction (level times total mass times the
    weighted average of the test function against the first coordinate)
    and the symmetrized diagonal term with coefficient ``kappa`` times
    level times (level - 1); the latter vanishes at level one.  The
    ``lam`` parameter is unused but kept in the signature so both closed
    forms share a calling convention.
    """
    del lam
    if phi.grid != f.grid:
        raise ValueError("grid mismatch")
    n = f.level
    if n < 1:
        raise ValueError("annihilation needs level at least 1")
    grid = f.grid
    basis_out = symmetric_basis(n - 1, grid)
    values = np.empty(basis_out.dim)
    for i, rep in enumerate(basis_out.reps):
        contraction = n * mass * math.fsum(
            grid.weights[p] * phi[p] * f.value((p,) + rep) for p in range(grid.size)
        )
        # kappa * n * (n-1) * sym(phi(x1) f(x1, x1, rest)) collapses to
        # kappa * n * sum over coordinates of phi at the doubled coordinate.
        diagonal = kappa * n * math.fsum(
            phi[rep[j]] * f.value((rep[j],) + rep)
            for j in range(len(rep))
        )
        values[i] = contraction + diagonal
    return SymmetricTensor(grid, n - 1, values)
