"""Transfer matrices for thin scatterers and free propagation.

Everything works in units c = 1, L = 1: wavenumber and angular frequency
coincide, the cavity spans [0, 1], and a lossless thin scatterer is
described by a single real polarizability ``zeta`` (negative for the
mirrors used throughout).  A 2x2 complex transfer matrix relates the
right- and left-moving field amplitudes on the two sides of an element,

    [a_right, b_right]^T = M [a_left, b_left]^T,

so that a full system matrix is the ordered product of its element and
propagation matrices.  With input from the left the amplitude
transmission and reflection are

    t = 1 / m22,        r = -m21 / m22,

and a single scatterer has |t|^2 = 1/(1 + zeta^2),
|r|^2 = zeta^2/(1 + zeta^2).

All matrices produced here are unimodular (det = 1) and carry the
lossless structure m11 = conj(m22), m12 = conj(m21), which implies
|m22|^2 = 1 + |m21|^2 exactly.  :func:`transmission` exploits that
identity and evaluates T = 1/(1 + |m21|^2); it is algebraically equal to
1/|m22|^2 but remains accurate (and <= 1) when near-unity transmission
would otherwise suffer cancellation between large matrix entries.

Every function is pure; systems are immutable.  Wavenumber arguments may
be scalars or numpy arrays, in which case matrices are stacked along the
leading axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidParameterError

__all__ = [
    "CavitySystem",
    "scatter_matrix",
    "propagation_matrix",
    "system_matrix",
    "stack_matrix",
    "transmission",
    "reflection_amplitude",
    "effective_polarizability",
    "maximize_stack_polarizability",
]


def _check_finite_real(name, value):
    v = float(value)
    if not math.isfinite(v):
        raise InvalidParameterError(f"{name} must be finite, got {value!r}")
    return v


@dataclass(frozen=True)
class CavitySystem:
    """A symmetric cavity of unit length with interior thin scatterers.

    ``zeta_end`` is the polarizability of both end mirrors (at 0 and 1);
    ``elements`` is an ordered tuple of ``(position, polarizability)``
    pairs with positions strictly increasing and strictly inside (0, 1).
    """

    zeta_end: float
    elements: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "zeta_end",
                           _check_finite_real("zeta_end", self.zeta_end))
        els = []
        prev = 0.0
        for item in self.elements:
            pos, zeta = item
            pos = _check_finite_real("element position", pos)
            zeta = _check_finite_real("element polarizability", zeta)
            if not 0.0 < pos < 1.0:
                raise InvalidParameterError(
                    f"element position {pos} not strictly inside (0, 1)")
            if pos <= prev:
                raise InvalidParameterError(
                    "element positions must be strictly increasing")
            prev = pos
            els.append((pos, zeta))
        object.__setattr__(self, "elements", tuple(els))

    @classmethod
    def empty(cls, zeta_end):
        """Bare two-mirror cavity."""
        return cls(zeta_end=zeta_end)

    @classmethod
    def with_middle(cls, zeta_end, zeta_m, displacement=0.0):
        """Cavity with a single reflector at 1/2 + displacement."""
        x = _check_finite_real("displacement", displacement)
        if not abs(x) < 0.5:
            raise InvalidParameterError(
                f"|displacement| must be < 1/2, got {x}")
        return cls(zeta_end=zeta_end, elements=((0.5 + x, zeta_m),))


def scatter_matrix(zeta):
    """Transfer matrix of a lossless zero-thickness scatterer.

    M = [[1 + i*zeta, i*zeta], [-i*zeta, 1 - i*zeta]], which has det = 1
    and reproduces |r|^2 = zeta^2/(1 + zeta^2) for a single element.
    ``zeta = 0`` gives the identity (transparent element).
    """
    z = _check_finite_real("zeta", zeta)
    return np.array([[1.0 + 1j * z, 1j * z],
                     [-1j * z, 1.0 - 1j * z]])


def propagation_matrix(k, d):
    """Free propagation over a distance ``d``: diag(e^{ikd}, e^{-ikd}).

    ``k`` may be a scalar or an array; the result has shape
    ``k.shape + (2, 2)``.
    """
    d = _check_finite_real("d", d)
    if d < 0:
        raise InvalidParameterError(f"propagation distance must be >= 0, got {d}")
    karr = np.asarray(k, dtype=float)
    if not np.all(np.isfinite(karr)) or not np.all(karr > 0):
        raise InvalidParameterError("wavenumber k must be finite and > 0")
    phase = np.exp(1j * karr * d)
    out = np.zeros(karr.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = phase
    out[..., 1, 1] = np.conj(phase)
    return out if karr.shape else out.reshape(2, 2)


def system_matrix(system: CavitySystem, k):
    """Ordered transfer matrix of the full cavity at wavenumber ``k``.

    Product (right to left): end mirror, propagation to the last element,
    the interior elements with their gaps, propagation from the left
    mirror, end mirror.
    """
    end = scatter_matrix(system.zeta_end)
    m = end
    pos = 0.0
    for element_pos, zeta in system.elements:
        m = scatter_matrix(zeta) @ (propagation_matrix(k, element_pos - pos) @ m)
        pos = element_pos
    return end @ (propagation_matrix(k, 1.0 - pos) @ m)


def stack_matrix(elements: Sequence, k):
    """Transfer matrix of a bare stack (no end mirrors, no outer gaps).

    ``elements`` is a sequence of ``(position, polarizability)`` pairs
    with strictly increasing positions; only the gaps between elements
    enter.
    """
    els = list(elements)
    if not els:
        raise InvalidParameterError("stack needs at least one element")
    prev_pos, zeta = els[0]
    prev_pos = _check_finite_real("element position", prev_pos)
    m = scatter_matrix(zeta)
    for pos, zeta in els[1:]:
        pos = _check_finite_real("element position", pos)
        if pos <= prev_pos:
            raise InvalidParameterError(
                "element positions must be strictly increasing")
        m = scatter_matrix(zeta) @ (propagation_matrix(k, pos - prev_pos) @ m)
        prev_pos = pos
    return m


def transmission(system: CavitySystem, k):
    """Intensity transmission T(k) = 1/|m22|^2 of the system.

    Evaluated as 1/(1 + |m21|^2) via the lossless identity
    |m22|^2 = 1 + |m21|^2, so the result never exceeds 1.
    """
    m = system_matrix(system, k)
    t = 1.0 / (1.0 + np.abs(m[..., 1, 0]) ** 2)
    return float(t) if np.ndim(k) == 0 else t


def reflection_amplitude(system: CavitySystem, k):
    """Amplitude reflection r(k) = -m21/m22 for input from the left.

    Satisfies |r|^2 + T = 1 for every lossless system.
    """
    m = system_matrix(system, k)
    r = -m[..., 1, 0] / m[..., 1, 1]
    return complex(r) if np.ndim(k) == 0 else r


def effective_polarizability(elements: Sequence, k):
    """Collective polarizability |r/t| of a bare stack at wavenumber ``k``.

    For the transfer-matrix convention used here r/t = -m21, so this is
    |m21| of the stack.  For a single element it equals |zeta| exactly,
    independent of ``k``.  A perfectly reflecting stack (t = 0) would be
    reported as ``inf``; it is unreachable for finite polarizabilities.
    """
    karr = np.asarray(k, dtype=float)
    if not np.all(np.isfinite(karr)) or not np.all(karr > 0):
        raise InvalidParameterError("wavenumber k must be finite and > 0")
    m = stack_matrix(elements, k)
    val = np.abs(m[..., 1, 0])
    val = np.where(np.isfinite(val), val, np.inf)
    return float(val) if np.ndim(k) == 0 else val


def maximize_stack_polarizability(zeta, n_elements, k=2.0 * math.pi,
                                  spacing_max=0.24, n_grid=20001):
    """Grid search for the uniform spacing maximizing the stack's |r/t|.

    Builds ``n_elements`` identical scatterers of polarizability ``zeta``
    separated by a common spacing ``d`` and scans ``d`` over
    ``(0, spacing_max]`` at fixed ``k``.  Returns ``(zeta_eff, spacing)``
    for the best spacing found.  For one element the spacing is
    irrelevant and (|zeta|, 0.0) is returned.
    """
    z = _check_finite_real("zeta", zeta)
    n = int(n_elements)
    if n < 1:
        raise InvalidParameterError("n_elements must be >= 1")
    if n == 1:
        return abs(z), 0.0
    if n_grid < 2 or spacing_max <= 0:
        raise InvalidParameterError("need spacing_max > 0 and n_grid >= 2")
    ds = np.linspace(spacing_max / n_grid, spacing_max, n_grid)
    phase = np.exp(1j * float(k) * ds)
    props = np.zeros(ds.shape + (2, 2), dtype=complex)
    props[..., 0, 0] = phase
    props[..., 1, 1] = np.conj(phase)
    single = scatter_matrix(z)
    hop = single @ props
    m = np.broadcast_to(single, ds.shape + (2, 2)).copy()
    for _ in range(n - 1):
        m = hop @ m
    vals = np.abs(m[..., 1, 0])
    i = int(np.argmax(vals))
    return float(vals[i]), float(ds[i])
