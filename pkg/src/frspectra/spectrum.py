"""Semi-discrete eigenanalysis of the Bloch symbol.

Extracts per-mode complex frequencies omega (Re = dispersion, Im =
dissipation), identifies the physical branch, normalizes wavenumbers by
the angle- and stretch-dependent Nyquist limit, and measures the modal
conditioning kappa(W) of the eigenvector matrix.

``analyze`` is pure; sweeps over (k, theta, phi) tuples can run
concurrently as long as results are gathered in a deterministic order.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .basis import make_points
from .operator import (
    SchemeConfig,
    SemiDiscreteSymbol,
    StretchedStencil,
    WaveProbe,
    build_blocks,
    direction_cosines,
    operators_for,
    symbol_for,
)

KAPPA_ILL_CONDITIONED = 1e8
DEGENERACY_TOL = 1e-12


class EigensolverError(RuntimeError):
    """Eigendecomposition failed or returned non-finite values."""


class ModeAmbiguityError(RuntimeError):
    """Two branches match the physical-mode criterion equally well."""


def normalization_factor(
    theta: float, phi: float, stencil: StretchedStencil, p: int
) -> float:
    """Factor F such that the normalized wavenumber is k_hat = k * F.

    F = max_m |a_m| * (1/(p+1)) * sqrt(sum_m (delta_m a_m / gamma_m)^2)

    with a_m the direction cosines. Aligned with an axis this reduces to
    the 1D normalization k_hat = k * delta / (p + 1) on unstretched cells,
    and the supported wavenumber before aliasing grows as 1/cos(theta) for
    theta <= 45 degrees. Implemented exactly as stated, including the
    leading max{} factor, so normalized results stay comparable across
    angles; k_hat spans [0, pi] up to the angle-dependent Nyquist limit.
    """
    a = direction_cosines(theta, phi, stencil.d)
    scaled = [
        stencil.delta[m] * a[m] / stencil.gamma[m] for m in range(stencil.d)
    ]
    return float(np.max(np.abs(a)) / (p + 1) * np.sqrt(np.sum(np.square(scaled))))


def normalize_wavenumber(
    k: float, probe: WaveProbe, stencil: StretchedStencil, p: int
) -> float:
    """Map a physical wavenumber to k_hat in [0, pi]."""
    if k < 0:
        raise ValueError("normalization expects k >= 0")
    return k * normalization_factor(probe.theta, probe.phi, stencil, p)


def wavenumber_for(
    k_hat: float, theta: float, phi: float, stencil: StretchedStencil, p: int
) -> float:
    """Inverse of :func:`normalize_wavenumber` at fixed angles."""
    return k_hat / normalization_factor(theta, phi, stencil, p)


def nyquist_wavenumber(
    theta: float, phi: float, stencil: StretchedStencil, p: int
) -> float:
    """Largest supported physical wavenumber (k_hat = pi) at these angles."""
    return np.pi / normalization_factor(theta, phi, stencil, p)


def plane_wave_samples(symbol: SemiDiscreteSymbol) -> np.ndarray:
    """Sample the probe plane wave at the central cell's solution points.

    The cell origin sits at 0 in every direction; coordinates within the
    cell are 0.5*(xi+1)*delta per direction, flattened xi-fastest to match
    the operator ordering.
    """
    scheme, stencil, probe = symbol.scheme, symbol.stencil, symbol.probe
    nodes = make_points(scheme.p, scheme.rule).nodes
    vel = probe.velocity(scheme.d)
    phase = np.zeros((1,) * scheme.d)
    for m in range(scheme.d):
        coord = 0.5 * (nodes + 1.0) * stencil.delta[m]
        shape = [1] * scheme.d
        shape[scheme.d - 1 - m] = nodes.size  # last axis is the xi direction
        phase = phase + (vel[m] * coord).reshape(shape)
    return np.exp(1j * probe.k * phase).ravel()


@dataclass
class SpectrumResult:
    """Eigenanalysis of one symbol.

    ``modes`` holds all (p+1)^d complex frequencies sorted by (Re, Im);
    ``eigvecs`` the matching unit-norm eigenvector columns.  ``beta``
    solves W beta = plane-wave samples.  ``degenerate`` flags coincident
    eigenvalues (beta then comes from least squares) and
    ``ill_conditioned`` flags kappa > 1e8.
    """

    modes: np.ndarray
    eigvecs: np.ndarray
    physical_index: int
    k_hat: float
    kappa: float
    beta: np.ndarray
    degenerate: bool = False
    ill_conditioned: bool = False

    @property
    def omega_physical(self) -> complex:
        return self.modes[self.physical_index]


def _eig_sorted(q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        lam, vecs = np.linalg.eig(q)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigendecomposition failed: {exc}") from exc
    if not (np.isfinite(lam).all() and np.isfinite(vecs).all()):
        raise EigensolverError("eigendecomposition returned non-finite values")
    omega = 1j * lam
    order = np.lexsort((omega.imag, omega.real))
    return omega[order], vecs[:, order]


def analyze(symbol: SemiDiscreteSymbol) -> SpectrumResult:
    """Full eigenanalysis of one semi-discrete symbol.

    Modes are the eigenvalues of iQ. The physical index is chosen by
    closeness of omega/k to the exact unit-speed response, which is
    reliable for small and moderate k; branch-tracked sweeps
    (:func:`dispersion_sweep`) are authoritative near and beyond the
    Nyquist limit.
    """
    omega, vecs = _eig_sorted(symbol.Q)
    sv = np.linalg.svd(vecs, compute_uv=False)
    kappa = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    gap = np.abs(omega[:, None] - omega[None, :])
    np.fill_diagonal(gap, np.inf)
    degenerate = bool(gap.min() < DEGENERACY_TOL)
    u0 = plane_wave_samples(symbol)
    if degenerate or not np.isfinite(kappa):
        beta = np.linalg.lstsq(vecs, u0, rcond=None)[0]
    else:
        beta = np.linalg.solve(vecs, u0)
    k = symbol.probe.k
    if abs(k) > 1e-300:
        physical = int(np.argmin(np.abs(omega / k - 1.0)))
    else:
        physical = int(np.argmin(np.abs(omega)))
    return SpectrumResult(
        modes=omega,
        eigvecs=vecs,
        physical_index=physical,
        k_hat=normalize_wavenumber(abs(k), symbol.probe, symbol.stencil, symbol.scheme.p),
        kappa=kappa,
        beta=beta,
        degenerate=degenerate,
        ill_conditioned=bool(kappa > KAPPA_ILL_CONDITIONED),
    )


def diagonalization_residual(symbol: SemiDiscreteSymbol, result: SpectrumResult) -> float:
    """Relative residual of Q against its reconstructed eigendecomposition."""
    lam = result.modes / 1j
    rec = result.eigvecs @ np.diag(lam) @ np.linalg.inv(result.eigvecs)
    return float(
        np.linalg.norm(symbol.Q - rec, ord="fro") / np.linalg.norm(symbol.Q, ord="fro")
    )


def _match_to_previous(prev: np.ndarray, cur: np.ndarray) -> np.ndarray:
    """Permutation aligning ``cur`` with ``prev`` by complex closeness.

    Greedy nearest-neighbour assignment followed by pairwise swap repair
    until the total distance stops improving; deterministic.
    """
    n = prev.size
    dist = np.abs(prev[:, None] - cur[None, :])
    perm = np.full(n, -1)
    used = np.zeros(n, dtype=bool)
    for i in np.argsort(dist.min(axis=1)):
        j = int(np.argmin(np.where(used, np.inf, dist[i])))
        perm[i] = j
        used[j] = True
    improved = True
    while improved:
        improved = False
        for i in range(n):
            for j in range(i + 1, n):
                cost_now = dist[i, perm[i]] + dist[j, perm[j]]
                cost_swapped = dist[i, perm[j]] + dist[j, perm[i]]
                if cost_swapped < cost_now - 1e-15:
                    perm[i], perm[j] = perm[j], perm[i]
                    improved = True
    return perm


def track_branches(mode_sets: Sequence[np.ndarray]) -> np.ndarray:
    """Align eigenvalue sets along an ascending k sweep into branches.

    Returns an array of shape (n_k, n_modes) whose columns are continuous
    branches, matched between consecutive k samples by minimal total
    complex distance.
    """
    tracked = np.empty((len(mode_sets), mode_sets[0].size), dtype=complex)
    tracked[0] = mode_sets[0]
    for i in range(1, len(mode_sets)):
        perm = _match_to_previous(tracked[i - 1], np.asarray(mode_sets[i]))
        tracked[i] = np.asarray(mode_sets[i])[perm]
    return tracked


def physical_mode_select(tracked: np.ndarray, k_values: np.ndarray) -> int:
    """Index of the physical branch in a branch-tracked mode array.

    The physical branch passes through the origin with unit slope, so it
    is the one with omega/k closest to 1 at the smallest k of the sweep.
    A near-tie between genuinely distinct branches is reported rather
    than silently resolved; exact multiplicity copies (grid-aligned
    multi-dimensional sweeps repeat the 1D branch) collapse to the lowest
    index.
    """
    k0 = k_values[0]
    scores = np.abs(tracked[0] / k0 - 1.0)
    order = np.argsort(scores)
    best = int(order[0])
    scale = max(1.0, float(np.abs(tracked).max()))
    for j in order[1:]:
        if not (scores[j] < 0.1 and scores[j] < max(10.0 * scores[best], 1e-6)):
            break
        if np.abs(tracked[:, j] - tracked[:, best]).max() > 1e-9 * scale:
            raise ModeAmbiguityError(
                f"two distinct branches match the physical criterion at k = {k0}: "
                f"scores {scores[best]:.3e} and {scores[j]:.3e}"
            )
    return best


def default_k_hat_grid(n: int = 64, lo: float = 0.01 * np.pi) -> np.ndarray:
    """Log-spaced normalized wavenumbers up to the Nyquist limit."""
    return np.geomspace(lo, np.pi, n)


def _anchor_ladder(first_k_hat: float) -> np.ndarray:
    """Unreported leading wavenumbers seeding branch identification.

    Starts low enough that the physical branch is unambiguous and climbs
    geometrically so consecutive eigenvalue sets stay close for matching,
    regardless of how coarse or high the requested grid is.
    """
    anchor = min(1e-4, 0.01 * first_k_hat)
    steps = max(2, int(np.ceil(4 * np.log(first_k_hat / anchor))))
    return np.geomspace(anchor, first_k_hat, steps, endpoint=False)


@dataclass
class ModeSweep:
    """Branch-tracked spectra over an ascending wavenumber sweep."""

    k: np.ndarray
    k_hat: np.ndarray
    modes: np.ndarray  # (n_k, n_modes), branch-aligned
    physical: int
    kappa: np.ndarray
    scale: float  # omega_hat = omega * scale

    @property
    def omega_physical(self) -> np.ndarray:
        return self.modes[:, self.physical]

    @property
    def omega_hat_physical(self) -> np.ndarray:
        return self.omega_physical * self.scale


def dispersion_sweep(
    scheme: SchemeConfig,
    stencil: StretchedStencil,
    theta: float = 0.0,
    phi: float = 0.0,
    k_hat: np.ndarray | None = None,
) -> ModeSweep:
    """Analyze a k sweep at fixed angles with branch tracking.

    An unreported geometric ladder of wavenumbers below the smallest
    requested one seeds the physical-branch identification.
    """
    if k_hat is None:
        k_hat = default_k_hat_grid()
    k_hat = np.asarray(k_hat, dtype=float)
    if k_hat.size == 0 or np.any(np.diff(k_hat) <= 0) or k_hat[0] <= 0:
        raise ValueError("k_hat must be a non-empty strictly increasing positive grid")
    factor = normalization_factor(theta, phi, stencil, scheme.p)
    lead = _anchor_ladder(k_hat[0])
    ks = np.concatenate((lead, k_hat)) / factor
    n_lead = lead.size
    blocks = build_blocks(scheme, operators_for(scheme))
    mode_sets = []
    kappas = np.empty(k_hat.size)
    for i, k in enumerate(ks):
        probe = WaveProbe(k=k, theta=theta, phi=phi)
        res = analyze(symbol_for(scheme, stencil, probe, blocks=blocks))
        mode_sets.append(res.modes)
        if i >= n_lead:
            kappas[i - n_lead] = res.kappa
    tracked = track_branches(mode_sets)
    physical = physical_mode_select(tracked, ks)
    return ModeSweep(
        k=ks[n_lead:],
        k_hat=k_hat,
        modes=tracked[n_lead:],
        physical=physical,
        kappa=kappas,
        scale=factor,
    )
