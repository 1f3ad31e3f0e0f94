"""Momentum lattice and the pair-interaction Fourier transform.

The torus is the unit box, so the dual lattice is 2*pi*Z^3.  The built-in
interaction family is the self-convolution of a ball indicator scaled by a
coupling constant: it is bounded, compactly supported, radial, and has the
closed-form, everywhere nonnegative Fourier transform

    vhat(p) = kappa * (4*pi*(sin(R|p|) - R|p|*cos(R|p|)) / |p|^3)^2 ,

continuously extended at p = 0 where it equals kappa*(4*pi*R^3/3)^2.
Evaluations are keyed on |p|^2 so that opposite momenta receive bitwise
identical values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import BetaOutOfRange, CutoffTooSmall
from .sums import det_sum

TWO_PI = 2.0 * np.pi

# (sin r - r cos r)/r^3 = 1/3 - r^2/30 + r^4/840 - r^6/45360 + O(r^8).
# The direct form cancels catastrophically near r = 0 (relative error
# ~3 eps/r^2), so the four-term series takes over below this radius, where
# its truncation error is under 2e-15 relative.
_SERIES_RADIUS = 0.08


def _shape_factor(r: np.ndarray) -> np.ndarray:
    """(sin r - r cos r)/r^3, stable at the origin."""
    r = np.asarray(r, dtype=float)
    small = r < _SERIES_RADIUS
    rs = np.where(small, 1.0, r)
    direct = (np.sin(rs) - rs * np.cos(rs)) / rs**3
    r2 = r * r
    series = 1.0 / 3.0 - r2 / 30.0 + r2 * r2 / 840.0 - r2 * r2 * r2 / 45360.0
    return np.where(small, series, direct)


@dataclass(frozen=True)
class Potential:
    """Radial positive-type pair potential: coupling * ball self-convolution.

    R is the radius of the generating ball.  Runs on the unit torus require
    0 < R < 1/4 (support radius 2R below half the box); that bound is
    enforced at configuration level, not here, so the transform stays a
    total function usable at any radius.
    """

    kappa: float
    R: float

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError(f"support radius must be positive, got {self.R}")

    def vhat_radial(self, rho) -> np.ndarray:
        """Fourier transform at radius rho (scalar or array)."""
        rho = np.asarray(rho, dtype=float)
        amp = 4.0 * np.pi * self.R**3 * _shape_factor(self.R * rho)
        return self.kappa * amp * amp

    @property
    def vhat0(self) -> float:
        """Transform at the origin, kappa*(4*pi*R^3/3)^2."""
        return self.kappa * (4.0 * np.pi * self.R**3 / 3.0) ** 2


def vhat(pot: Potential, p) -> float:
    """Fourier transform of the potential at momentum vector p."""
    p = np.asarray(p, dtype=float)
    rho = np.sqrt(np.sum(p * p, axis=-1))
    out = pot.vhat_radial(rho)
    return float(out) if out.ndim == 0 else out


def vhat_oracle(pot: Potential, rho: float) -> float:
    """Quadrature reference for the closed form (radial transform of the
    ball indicator, squared).  Slow; used only by tests."""
    if rho == 0.0:
        return pot.vhat0
    ball, _ = quad(
        lambda r: 4.0 * np.pi * r * np.sin(rho * r) / rho,
        0.0,
        pot.R,
        epsabs=1e-15,
        epsrel=1e-13,
        limit=200,
    )
    return pot.kappa * ball * ball


@dataclass(frozen=True)
class LatticeBall:
    """Momenta p = 2*pi*n with 0 < |p| <= cutoff_K, canonically ordered.

    Ordering is ascending |n|^2 with lexicographic tie-break on n; the set
    is closed under negation and excludes the zero mode.
    """

    cutoff_K: float
    points: np.ndarray          # (M, 3) int64, canonical order
    nsq: np.ndarray             # (M,) int64, |n|^2 per point
    index: dict = field(repr=False)
    shells: tuple = field(repr=False)   # ((nsq, slice), ...) in shell order
    _grid: np.ndarray = field(repr=False)   # dense (2L+1)^3 index lookup
    _L: int = field(repr=False)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def norms(self) -> np.ndarray:
        """|p| per point."""
        return TWO_PI * np.sqrt(self.nsq.astype(float))

    @property
    def psq(self) -> np.ndarray:
        """|p|^2 per point."""
        return TWO_PI * TWO_PI * self.nsq.astype(float)

    def lookup(self, triples: np.ndarray) -> np.ndarray:
        """Vectorized point -> index map; -1 where outside the ball."""
        t = np.asarray(triples)
        flat = t.reshape(-1, 3)
        inside = np.all(np.abs(flat) <= self._L, axis=1)
        out = np.full(flat.shape[0], -1, dtype=np.int64)
        if np.any(inside):
            sel = flat[inside] + self._L
            side = 2 * self._L + 1
            out[inside] = self._grid[
                (sel[:, 0] * side + sel[:, 1]) * side + sel[:, 2]
            ]
        return out.reshape(t.shape[:-1])

    def negation_index(self) -> np.ndarray:
        """Index of -p for every p (always valid)."""
        return self.lookup(-self.points)


def enumerate_lattice(K: float) -> LatticeBall:
    """All p = 2*pi*n, n in Z^3 without the origin, |p| <= K."""
    # |n|^2 is an integer, so the radius comparison is exact once the
    # squared bound is snapped to the nearest representable integer.
    nsq_max = int(np.floor((K / TWO_PI) ** 2 + 1e-9))
    if K < TWO_PI or nsq_max < 1:
        raise CutoffTooSmall(f"cutoff {K} is below the first shell 2*pi")
    L = int(np.floor(np.sqrt(nsq_max + 1e-9)))
    axis = np.arange(-L, L + 1, dtype=np.int64)
    grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1)
    pts = grid.reshape(-1, 3)
    nsq = np.sum(pts * pts, axis=1)
    keep = (nsq > 0) & (nsq <= nsq_max)
    pts, nsq = pts[keep], nsq[keep]
    order = np.lexsort((pts[:, 2], pts[:, 1], pts[:, 0], nsq))
    pts, nsq = pts[order], nsq[order]

    index = {tuple(int(c) for c in p): i for i, p in enumerate(pts)}
    shells = []
    start = 0
    for i in range(1, len(nsq) + 1):
        if i == len(nsq) or nsq[i] != nsq[start]:
            shells.append((int(nsq[start]), slice(start, i)))
            start = i
    side = 2 * L + 1
    dense = np.full(side * side * side, -1, dtype=np.int64)
    shifted = pts + L
    dense[(shifted[:, 0] * side + shifted[:, 1]) * side + shifted[:, 2]] = (
        np.arange(len(pts), dtype=np.int64)
    )
    return LatticeBall(
        cutoff_K=float(K),
        points=pts,
        nsq=nsq,
        index=index,
        shells=tuple(shells),
        _grid=dense,
        _L=L,
    )


@dataclass(frozen=True)
class ScaledPotentialTable:
    """vhat(p / N^beta) tabulated on a lattice ball plus the zero mode."""

    pot: Potential
    lattice: LatticeBall
    N: int
    beta: float
    values: np.ndarray      # aligned with lattice.points
    at_zero: float

    def value_at(self, triples: np.ndarray) -> np.ndarray:
        """Evaluate vhat(p/N^beta) at arbitrary integer triples (total
        function; not restricted to the ball)."""
        t = np.asarray(triples, dtype=np.int64)
        nsq = np.sum(t * t, axis=-1).astype(float)
        rho = TWO_PI * np.sqrt(nsq) / self.N**self.beta
        return self.pot.vhat_radial(rho)


def scaled_table(
    pot: Potential, lattice: LatticeBall, N: int, beta: float
) -> ScaledPotentialTable:
    if not 0.0 < beta < 1.0:
        raise BetaOutOfRange(f"beta must lie in (0, 1), got {beta}")
    if N < 2:
        raise ValueError(f"particle number must be >= 2, got {N}")
    rho = lattice.norms / N**beta
    return ScaledPotentialTable(
        pot=pot,
        lattice=lattice,
        N=int(N),
        beta=float(beta),
        values=pot.vhat_radial(rho),
        at_zero=pot.vhat0,
    )


def quartic_shape_tail(x: float) -> float:
    """Integral of ((sin w - w cos w)/w^3)^4 over [x, infinity)."""
    upper = max(200.0, 2.0 * x)
    val, _ = quad(
        lambda w: _shape_factor(np.array(w)) ** 4,
        x,
        upper,
        epsabs=1e-18,
        epsrel=1e-12,
        limit=800,
    )
    # |g(w)| <= (1+w)/w^3 <= 2/w^2 for w >= 1, so the remainder beyond
    # `upper` is below 16/(7*upper^7), under 1e-17 here.
    return float(val)


def born2_sum(table: ScaledPotentialTable, K: float | None = None) -> tuple[float, float]:
    """The scaled-potential sum  sum_p vhat(p/N^beta)^2 / (2 p^2).

    Returns (ball part, analytic tail), truncating at K (default: the
    table's full cutoff).  The summand grows with N like N^beta through
    momenta of order N^beta, far beyond any practical ball, so the tail is
    evaluated as the continuum integral over |p| > K and reported
    alongside the exact lattice part.
    """
    lat = table.lattice
    if K is None:
        K = lat.cutoff_K
        M = len(lat)
    else:
        nsq_max = int(np.floor((K / TWO_PI) ** 2 + 1e-9))
        M = int(np.searchsorted(lat.nsq, nsq_max, side="right"))
    ball = det_sum(table.values[:M] ** 2 / (2.0 * lat.psq[:M]))
    nbeta = table.N**table.beta
    pot = table.pot
    prefac = (pot.kappa * (4.0 * np.pi * pot.R**3) ** 2) ** 2 / pot.R
    tail = nbeta / (4.0 * np.pi**2) * prefac * quartic_shape_tail(pot.R * K / nbeta)
    return ball, tail
