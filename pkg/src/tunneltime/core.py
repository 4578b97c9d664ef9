"""Units, constants, k-space quadrature and finite differences.

Internal units are nm, fs and eV, with masses in units of the free
electron mass.  Velocities ``hbar*k/m`` therefore come out in nm/fs and
``hbar*t/m`` in nm^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import roots_legendre

HBAR = 0.6582119569  # eV fs
HALF_QUANTUM = 0.0380998  # hbar^2 / (2 m_e), eV nm^2

DEFAULT_WIDTH_FACTOR = 8.0
DEFAULT_NODES = 2048
PANEL_NODES = 16


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class QuadratureError(FloatingPointError):
    """A quadrature integrand produced a non-finite value."""


class ResolutionError(ArithmeticError):
    """A numerical step is too coarse to resolve a phase."""


@dataclass(frozen=True)
class UnitSystem:
    hbar: float = HBAR
    half_quantum: float = HALF_QUANTUM
    mass_ratio: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "half_quantum", "mass_ratio"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")

    @property
    def kinetic_coefficient(self) -> float:
        """hbar^2/(2m) in eV nm^2."""
        return self.half_quantum / self.mass_ratio

    @property
    def hbar_over_m(self) -> float:
        """hbar/m in nm^2/fs."""
        return 2.0 * self.kinetic_coefficient / self.hbar

    def velocity(self, k):
        return self.hbar_over_m * k

    def energy(self, k):
        return self.kinetic_coefficient * np.square(k)


def hbar_over_m(mass_ratio: float) -> float:
    return UnitSystem(mass_ratio=mass_ratio).hbar_over_m


def energy_from_k(k, mass_ratio: float):
    return UnitSystem(mass_ratio=mass_ratio).energy(k)


def k_from_energy(E, mass_ratio: float):
    """Wavenumber (nm^-1) of a free particle with kinetic energy ``E`` (eV)."""
    if not mass_ratio > 0:
        raise DomainError("mass_ratio must be positive")
    E = np.asarray(E, dtype=float)
    if np.any(E < 0):
        raise DomainError("energy must be non-negative")
    k = np.sqrt(E * mass_ratio / HALF_QUANTUM)
    return float(k) if k.ndim == 0 else k


@dataclass(frozen=True)
class KGrid:
    """Composite Gauss-Legendre rule over a truncated k-window.

    Parameters
    ----------
    edges : ndarray
        Sorted panel boundaries; every panel carries ``panel_nodes`` nodes.
    panel_nodes : int
        Gauss-Legendre order per panel. Even orders never place a node at a
        panel midpoint.
    """

    edges: np.ndarray
    panel_nodes: int = PANEL_NODES
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise DomainError("panel edges must be strictly increasing")
        x, w = roots_legendre(self.panel_nodes)
        half = 0.5 * np.diff(edges)[:, None]
        mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "nodes", (mid + half * x).ravel())
        object.__setattr__(self, "weights", (half * w).ravel())

    @classmethod
    def uniform(cls, lo: float, hi: float, n_nodes: int = DEFAULT_NODES,
                panel_nodes: int = PANEL_NODES) -> "KGrid":
        n_panels = max(1, int(np.ceil(n_nodes / panel_nodes)))
        return cls(np.linspace(lo, hi, n_panels + 1), panel_nodes)

    @classmethod
    def around(cls, k0: float, width: float, factor: float = DEFAULT_WIDTH_FACTOR,
               n_nodes: int = DEFAULT_NODES) -> "KGrid":
        """Window ``[k0 - factor*width, k0 + factor*width]``."""
        return cls.uniform(k0 - factor * width, k0 + factor * width, n_nodes)

    @property
    def window(self) -> tuple[float, float]:
        return float(self.edges[0]), float(self.edges[-1])

    @property
    def n_panels(self) -> int:
        return self.edges.size - 1

    def __len__(self):
        return self.nodes.size

    def panel_sums(self, values) -> np.ndarray:
        """Per-panel weighted sums; ``values`` may carry leading axes."""
        v = np.asarray(values) * self.weights
        return v.reshape(v.shape[:-1] + (self.n_panels, self.panel_nodes)).sum(-1)

    def refine(self, func: Callable[[np.ndarray], np.ndarray], rtol: float = 1e-12,
               max_nodes: int = 1 << 17) -> "KGrid":
        """Bisect panels until each one agrees with its two halves.

        ``func`` maps nodes to an array of shape ``(m, n)`` (or ``(n,)``); the
        panel error of every row is measured against that row's total.  Only
        the halves of newly split panels are evaluated in each pass.
        """
        lo, hi = self.edges[:-1], self.edges[1:]
        whole = self._panel_integrals(func, lo, hi)
        mid = 0.5 * (lo + hi)
        left = self._panel_integrals(func, lo, mid)
        right = self._panel_integrals(func, mid, hi)
        while True:
            halves = left + right
            if not (np.all(np.isfinite(whole)) and np.all(np.isfinite(halves))):
                raise QuadratureError("non-finite integrand during refinement")
            scale = np.abs(halves.sum(-1, keepdims=True))
            scale = np.where(scale > 0, scale, 1.0)
            bad = np.any(np.abs(halves - whole) > rtol * scale, axis=0)
            n_nodes = lo.size * self.panel_nodes
            if not bad.any() or n_nodes + bad.sum() * self.panel_nodes > max_nodes:
                edges = np.append(lo, hi[-1])
                if bad.any():
                    edges = np.sort(np.concatenate([edges, mid[bad]]))
                return KGrid(edges, self.panel_nodes)
            keep = ~bad
            new_lo = np.concatenate([lo[bad], mid[bad]])
            new_hi = np.concatenate([mid[bad], hi[bad]])
            new_whole = np.concatenate([left[:, bad], right[:, bad]], axis=1)
            new_mid = 0.5 * (new_lo + new_hi)
            new_left = self._panel_integrals(func, new_lo, new_mid)
            new_right = self._panel_integrals(func, new_mid, new_hi)
            lo = np.concatenate([lo[keep], new_lo])
            hi = np.concatenate([hi[keep], new_hi])
            mid = np.concatenate([mid[keep], new_mid])
            whole = np.concatenate([whole[:, keep], new_whole], axis=1)
            left = np.concatenate([left[:, keep], new_left], axis=1)
            right = np.concatenate([right[:, keep], new_right], axis=1)
            order = np.argsort(lo)
            lo, hi, mid = lo[order], hi[order], mid[order]
            whole, left, right = whole[:, order], left[:, order], right[:, order]

    def _panel_integrals(self, func, lo, hi) -> np.ndarray:
        """Gauss-Legendre integral of every row of ``func`` over each panel."""
        x, w = roots_legendre(self.panel_nodes)
        half = 0.5 * (hi - lo)[:, None]
        nodes = (0.5 * (hi + lo)[:, None] + half * x).ravel()
        vals = np.atleast_2d(func(nodes)) * (half * w).ravel()
        return vals.reshape(vals.shape[0], lo.size, self.panel_nodes).sum(-1)


def integrate(f, grid: KGrid) -> float:
    """Quadrature of ``f`` over ``grid``.

    ``f`` is either a vectorised callable of k or an array of values at
    ``grid.nodes``.
    """
    values = f(grid.nodes) if callable(f) else np.asarray(f)
    values = np.asarray(values, dtype=float) if not np.iscomplexobj(values) else values
    bad = ~np.isfinite(values)
    if bad.any():
        i = int(np.argmax(bad))
        raise QuadratureError(f"integrand is {values[i]} at k = {grid.nodes[i]:.12g} nm^-1")
    return values @ grid.weights


_FIVE_POINT = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
STENCIL = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])


def differentiate(f: Callable, k, step):
    """Five-point central difference of ``f`` at ``k`` (O(step^4))."""
    step = np.asarray(step, dtype=float)
    if np.any(step <= 0):
        raise DomainError("step must be positive")
    k = np.asarray(k, dtype=float)
    values = [f(k + s * step) for s in STENCIL]
    out = sum(c * v for c, v in zip(_FIVE_POINT, values) if c != 0.0) / step
    return float(out) if np.ndim(out) == 0 else out


def stencil_derivative(values, step):
    """Apply the five-point weights along the first axis of ``values``."""
    return np.tensordot(_FIVE_POINT, values, axes=(0, 0)) / step
