"""Piecewise-constant barriers confined to ``[a, b]``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DomainError


@dataclass(frozen=True)
class PotentialProfile:
    """Staircase potential starting at ``a`` (nm).

    ``segments`` is an ordered tuple of ``(width_nm, height_eV)`` pairs; the
    potential vanishes outside ``[a, b)``.
    """

    a: float
    segments: tuple

    def __post_init__(self):
        segs = tuple((float(w), float(v)) for w, v in self.segments)
        if not self.a > 0:
            raise DomainError("barrier must start at a > 0")
        if not segs:
            raise DomainError("at least one segment is required")
        if any(not w > 0 for w, _ in segs):
            raise DomainError("segment widths must be positive")
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "segments", segs)

    @property
    def d(self) -> float:
        return sum(w for w, _ in self.segments)

    @property
    def b(self) -> float:
        return self.a + self.d

    @property
    def is_free(self) -> bool:
        return all(v == 0.0 for _, v in self.segments)

    @property
    def is_rectangular(self) -> bool:
        return len(self.segments) == 1

    @property
    def edges(self) -> np.ndarray:
        return self.a + np.concatenate([[0.0], np.cumsum([w for w, _ in self.segments])])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        edges = self.edges
        heights = np.array([0.0] + [v for _, v in self.segments] + [0.0])
        out = heights[np.searchsorted(edges, x, side="right")]
        return float(out) if out.ndim == 0 else out

    def cell_average(self, x, dx: float) -> np.ndarray:
        """Mean of V over ``[x - dx/2, x + dx/2]`` for every grid node."""
        x = np.asarray(x, dtype=float)
        lo, hi = x - 0.5 * dx, x + 0.5 * dx
        out = np.zeros_like(x)
        edges = self.edges
        for (left, right), (_, v) in zip(zip(edges[:-1], edges[1:]), self.segments):
            overlap = np.clip(np.minimum(hi, right) - np.maximum(lo, left), 0.0, None)
            out += v * overlap
        return out / dx

    def refined(self, pieces: int) -> "PotentialProfile":
        """Same potential with every segment split into ``pieces`` parts."""
        segs = [(w / pieces, v) for w, v in self.segments for _ in range(pieces)]
        return PotentialProfile(self.a, tuple(segs))

    def to_dict(self) -> dict:
        if self.is_rectangular:
            (d, v0), = self.segments
            return {"type": "rectangular", "V0_eV": v0, "a_nm": self.a, "d_nm": d}
        return {"type": "segments", "a_nm": self.a, "segments": [list(s) for s in self.segments]}

    @classmethod
    def from_dict(cls, data: dict) -> "PotentialProfile":
        kind = data.get("type", "rectangular")
        if kind == "rectangular":
            return rectangular(data["V0_eV"], data["a_nm"], data["d_nm"])
        if kind == "segments":
            return cls(data["a_nm"], tuple(tuple(s) for s in data["segments"]))
        raise DomainError(f"unknown barrier type {kind!r}")


def rectangular(V0: float, a: float, d: float) -> PotentialProfile:
    if not d > 0:
        raise DomainError("barrier width must be positive")
    return PotentialProfile(a, ((d, V0),))


def delta_like(strength: float, a: float, width: float = 1e-3) -> PotentialProfile:
    """Thin segment of height ``strength/width`` (eV nm / nm) approximating a delta."""
    return rectangular(strength / width, a, width)


def invert(p: PotentialProfile) -> PotentialProfile:
    """Mirror image ``V(a + b - x)``; ``a`` and ``b`` are unchanged."""
    return PotentialProfile(p.a, tuple(reversed(p.segments)))


def midpoint(p: PotentialProfile) -> float:
    return 0.5 * (p.a + p.b)
