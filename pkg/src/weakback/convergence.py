"""Convergence-order fitting for first-order (O(kappa^2) error) claims."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EXACT_FLOOR = 1e-14


@dataclass(frozen=True)
class OrderFit:
    kappas: np.ndarray
    errors: np.ndarray
    order: float | None
    """least-squares slope of log(error) vs log(kappa); None if exact"""

    @property
    def exact(self) -> bool:
        return self.order is None

    def label(self) -> str:
        return "exact" if self.exact else f"{self.order:.4f}"

    def within(self, lo: float = 1.8, hi: float = 2.2) -> bool:
        return self.exact or lo <= self.order <= hi


def fit_order(kappas, errors, floor: float = EXACT_FLOOR) -> OrderFit:
    """Fit ``error ~ C kappa^order``.

    Errors at or below `floor` everywhere mean the first-order formula is
    exact for this instance; the order is then reported as None.
    """
    k = np.asarray(kappas, dtype=float)
    e = np.abs(np.asarray(errors, dtype=float))
    if k.size < 3:
        raise ValueError("need at least three coupling values")
    ratios = k[1:] / k[:-1]
    if np.any(k <= 0) or not np.allclose(ratios, ratios[0], rtol=1e-9):
        raise ValueError("coupling values must be positive and in geometric progression")
    if np.all(e <= floor):
        return OrderFit(k, e, None)
    slope = np.polyfit(np.log(k), np.log(np.maximum(e, np.finfo(float).tiny)), 1)[0]
    return OrderFit(k, e, float(slope))


def halving_ratios(errors) -> np.ndarray:
    e = np.asarray(errors, dtype=float)
    return e[:-1] / e[1:]
