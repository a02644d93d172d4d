"""Numerical tolerances shared by every module."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Any, Mapping


@dataclass(frozen=True)
class Tolerances:
    # Cholesky pivot threshold, relative to trace(S)/n.
    pd_pivot: float = 1e-12
    # Input symmetry check for full matrices.
    symmetry: float = 1e-12
    # Cone membership (relative for inequality forms, absolute for eigenvalue forms).
    membership: float = 1e-9
    # Blocker-region membership.
    region: float = 1e-7
    # Projected-gradient stopping rule and the post-condition it must meet.
    kkt_tol: float = 1e-8
    kkt_accept: float = 1e-6
    max_iter: int = 100_000
    # Dykstra alternating projections.
    dykstra_tol: float = 1e-10
    dykstra_max_iter: int = 100_000
    # Random draws for the feasibility witness fallback.
    witness_draws: int = 10_000

    def updated(self, overrides: Mapping[str, Any]) -> "Tolerances":
        known = {f.name: f.type for f in fields(self)}
        clean = {}
        for key, value in overrides.items():
            if key not in known:
                raise KeyError(f"unknown tolerance {key!r}")
            clean[key] = int(value) if key.endswith(("iter", "draws")) else float(value)
        return replace(self, **clean)


DEFAULT = Tolerances()
