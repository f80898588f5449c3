"""Interface-coupling blocks and the semi-discrete Bloch symbol.

Assembles, for a plane wave travelling at a prescribed incidence through a
3^d rectilinear stencil of stretched cells, the matrix Q governing the
evolution of the nodal values in the central cell:

    du/dt = Q u

Each direction contributes three blocks: coupling to the upstream
neighbour, the in-cell term, and coupling to the downstream neighbour.
Metric factors are per-direction and per-cell (the x-direction terms are
scaled by the x-spacing of the cell the block reads from, and likewise in
y and z); phase factors use the upstream spacing for the upstream block
and the central spacing for the downstream one.

Pure functions over immutable inputs; symbols for different (k, theta,
phi) may be assembled concurrently.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import cos, isfinite, sin

import numpy as np

from .basis import (
    GAUSS_LEGENDRE,
    BasisOperators,
    CorrectionFamily,
    build_operators,
    make_points,
)


@dataclass(frozen=True)
class SchemeConfig:
    """Flux reconstruction scheme: order, correction family, upwinding, dims.

    alpha = 1 is fully upwind, alpha = 0.5 central; values outside
    [0.5, 1] are rejected.
    """

    p: int
    family: CorrectionFamily
    alpha: float
    d: int = 1
    rule: str = GAUSS_LEGENDRE

    def __post_init__(self):
        if not 0.5 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0.5, 1], got {self.alpha}")
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimensionality must be 1, 2 or 3, got {self.d}")
        if self.family.order != self.p:
            raise ValueError(
                f"family order {self.family.order} does not match p = {self.p}"
            )


def operators_for(scheme: SchemeConfig) -> BasisOperators:
    return build_operators(make_points(scheme.p, scheme.rule), scheme.family)


@dataclass(frozen=True)
class StretchedStencil:
    """Per-direction spacings and geometric expansion factors.

    The central cell has width delta[m] in direction m; the upstream
    neighbour has width delta[m]/gamma[m] and the downstream neighbour
    gamma[m]*delta[m]. gamma = 1 everywhere reproduces the uniform grid.
    """

    d: int
    delta: tuple[float, ...]
    gamma: tuple[float, ...]

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimensionality must be 1, 2 or 3, got {self.d}")
        if len(self.delta) != self.d or len(self.gamma) != self.d:
            raise ValueError("delta and gamma must have one entry per direction")
        if any(dx <= 0 or not isfinite(dx) for dx in self.delta):
            raise ValueError(f"spacings must be finite and > 0, got {self.delta}")
        if any(g <= 0 or not isfinite(g) for g in self.gamma):
            raise ValueError(f"expansion factors must be finite and > 0, got {self.gamma}")

    @classmethod
    def uniform(cls, d: int, delta: float = 1.0) -> "StretchedStencil":
        return cls(d, (delta,) * d, (1.0,) * d)

    @classmethod
    def stretched(
        cls,
        gamma,
        delta=None,
    ) -> "StretchedStencil":
        gamma = tuple(float(g) for g in np.atleast_1d(gamma))
        if delta is None:
            delta = (1.0,) * len(gamma)
        delta = tuple(float(dx) for dx in np.atleast_1d(delta))
        return cls(len(gamma), delta, gamma)

    def upstream(self, m: int) -> float:
        return self.delta[m] / self.gamma[m]

    def downstream(self, m: int) -> float:
        return self.delta[m] * self.gamma[m]


@dataclass(frozen=True)
class WaveProbe:
    """Plane-wave probe: wavenumber and incidence angles (radians).

    Typical use has k > 0; any finite k (including 0 and negative values,
    handy for conjugate-symmetry checks) is accepted. Angles are limited
    to the first quadrant so all velocity components are >= 0.
    """

    k: float
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not isfinite(self.k):
            raise ValueError(f"wavenumber must be finite, got {self.k}")
        if not 0.0 <= self.theta <= np.pi / 2:
            raise ValueError("theta must lie in [0, pi/2]")
        if not 0.0 <= self.phi <= np.pi / 2:
            raise ValueError("phi must lie in [0, pi/2]")

    def velocity(self, d: int) -> np.ndarray:
        """Unit advection velocity for the given dimensionality."""
        if d == 1:
            if self.theta != 0.0:
                raise ValueError("theta = 0 is mandatory in 1D")
            return np.ones(1)
        if d == 2:
            if self.phi != 0.0:
                raise ValueError("phi is only meaningful in 3D")
            return np.array([cos(self.theta), sin(self.theta)])
        return np.array(
            [
                cos(self.phi) * cos(self.theta),
                cos(self.phi) * sin(self.theta),
                sin(self.phi),
            ]
        )


def direction_cosines(theta: float, phi: float, d: int) -> np.ndarray:
    return WaveProbe(k=1.0, theta=theta, phi=phi).velocity(d)


def lift_to_dimension(mat: np.ndarray, direction: int, d: int) -> np.ndarray:
    """Tensor-lift a 1D nodal operator so it acts along one direction.

    Nodal values are flattened lexicographically with the xi index fastest,
    then eta, then zeta; the lift is the Kronecker product with identities
    on the other directions.
    """
    n = mat.shape[0]
    eye = np.eye(n)
    out = np.ones((1, 1))
    for axis in range(d - 1, -1, -1):
        out = np.kron(out, mat if axis == direction else eye)
    return out


@dataclass(frozen=True)
class FrBlocks:
    """Interface-coupling blocks, 1D and tensor-lifted per direction.

    c_minus couples to the upstream neighbour, c_plus to the downstream
    one, c_zero is the in-cell operator. ``lifted[m]`` holds the triple
    acting along direction m on the flattened (p+1)^d vector.
    """

    d: int
    c_minus: np.ndarray
    c_zero: np.ndarray
    c_plus: np.ndarray
    lifted: tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...]


def build_blocks(scheme: SchemeConfig, ops: BasisOperators) -> FrBlocks:
    """Form the three 1D coupling blocks and their per-direction lifts."""
    n = ops.D.shape[0]
    if n != scheme.p + 1:
        raise ValueError(
            f"operator size {n} does not match scheme order p = {scheme.p}"
        )
    a = scheme.alpha
    c_minus = a * np.outer(ops.hL, ops.lR)
    c_plus = (1.0 - a) * np.outer(ops.hR, ops.lL)
    c_zero = ops.D - a * np.outer(ops.hL, ops.lL) - (1.0 - a) * np.outer(ops.hR, ops.lR)
    lifted = tuple(
        tuple(lift_to_dimension(c, m, scheme.d) for c in (c_minus, c_zero, c_plus))
        for m in range(scheme.d)
    )
    return FrBlocks(scheme.d, c_minus, c_zero, c_plus, lifted)


@dataclass(frozen=True)
class SemiDiscreteSymbol:
    """The Bloch symbol Q with the configuration that produced it."""

    Q: np.ndarray
    probe: WaveProbe
    stencil: StretchedStencil
    scheme: SchemeConfig


def assemble_symbol(
    scheme: SchemeConfig,
    stencil: StretchedStencil,
    probe: WaveProbe,
    blocks: FrBlocks,
) -> SemiDiscreteSymbol:
    """Assemble Q for one (k, theta, phi) on the given stencil.

    Per direction m with velocity component a_m and central spacing
    delta_m, the contribution is

        -a_m * [ (2/d_up) C_minus e^{-i k a_m d_up}
               + (2/delta_m) C_zero
               + (2/d_dn) C_plus e^{+i k a_m delta_m} ]

    with d_up = delta_m/gamma_m the upstream width and d_dn =
    gamma_m*delta_m the downstream width. Upstream and downstream blocks
    carry their own cells' metric factors.
    """
    if scheme.d != stencil.d or scheme.d != blocks.d:
        raise ValueError(
            f"dimension mismatch: scheme d={scheme.d}, stencil d={stencil.d}, "
            f"blocks d={blocks.d}"
        )
    vel = probe.velocity(scheme.d)
    n_total = blocks.lifted[0][0].shape[0]
    q = np.zeros((n_total, n_total), dtype=complex)
    k = probe.k
    for m in range(scheme.d):
        c_minus, c_zero, c_plus = blocks.lifted[m]
        d_up = stencil.upstream(m)
        d_c = stencil.delta[m]
        d_dn = stencil.downstream(m)
        a_m = vel[m]
        q -= a_m * (
            (2.0 / d_up) * c_minus * np.exp(-1j * k * a_m * d_up)
            + (2.0 / d_c) * c_zero
            + (2.0 / d_dn) * c_plus * np.exp(1j * k * a_m * d_c)
        )
    if not np.isfinite(q).all():
        raise ValueError("symbol assembly produced non-finite entries")
    return SemiDiscreteSymbol(Q=q, probe=probe, stencil=stencil, scheme=scheme)


def symbol_for(
    scheme: SchemeConfig,
    stencil: StretchedStencil,
    probe: WaveProbe,
    ops: BasisOperators | None = None,
    blocks: FrBlocks | None = None,
) -> SemiDiscreteSymbol:
    """Convenience wrapper building operators and blocks when not supplied."""
    if blocks is None:
        blocks = build_blocks(scheme, ops if ops is not None else operators_for(scheme))
    return assemble_symbol(scheme, stencil, probe, blocks)
