"""Fully-discrete analysis: RK update operators and CFL limits.

The update operator is the RK stability polynomial evaluated at tau*Q.
Stability requires its spectral radius to stay <= 1 (up to a documented
roundoff allowance of 1e-9) over all resolvable wavenumbers; the CFL
limit is found by bisection on tau and reported through

    CFL_d = tau * sum_m a_m / delta_m

with a_m the velocity components and delta_m the central spacings.

Pure functions; CFL searches for different configurations can run
concurrently.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .operator import (
    SchemeConfig,
    SemiDiscreteSymbol,
    StretchedStencil,
    WaveProbe,
    build_blocks,
    operators_for,
    symbol_for,
)
from .spectrum import (
    _anchor_ladder,
    ModeSweep,
    SpectrumResult,
    EigensolverError,
    default_k_hat_grid,
    normalization_factor,
    normalize_wavenumber,
    nyquist_wavenumber,
    physical_mode_select,
    plane_wave_samples,
    track_branches,
)

RHO_TOL = 1e-9  # spectral-radius allowance absorbing roundoff


@dataclass(frozen=True)
class RkScheme:
    """Explicit RK scheme identified by its stability polynomial R(z)."""

    name: str
    coeffs: tuple[float, ...]  # R(z) = sum coeffs[m] * z^m

    def __post_init__(self):
        if not self.coeffs or self.coeffs[0] != 1.0:
            raise ValueError("stability polynomial must satisfy R(0) = 1")

    def stability(self, z: np.ndarray) -> np.ndarray:
        """Evaluate R(z) elementwise (Horner form)."""
        z = np.asarray(z, dtype=complex)
        out = np.full_like(z, self.coeffs[-1])
        for c in self.coeffs[-2::-1]:
            out = out * z + c
        return out


EULER = RkScheme("euler", (1.0, 1.0))
RK33 = RkScheme("rk33", (1.0, 1.0, 1.0 / 2.0, 1.0 / 6.0))
RK44 = RkScheme("rk44", (1.0, 1.0, 1.0 / 2.0, 1.0 / 6.0, 1.0 / 24.0))

_BY_NAME = {s.name: s for s in (EULER, RK33, RK44)}


def rk_from_name(name: str) -> RkScheme:
    try:
        return _BY_NAME[name.lower()]
    except KeyError:
        raise ValueError(f"unknown RK scheme {name!r}; choose from {sorted(_BY_NAME)}")


@dataclass
class UpdateOperator:
    """One-step update matrix R = R(tau*Q) with its time step."""

    R: np.ndarray
    tau: float


def build_update(symbol: SemiDiscreteSymbol, rk: RkScheme, tau: float) -> UpdateOperator:
    """Evaluate the stability polynomial at tau*Q (matrix Horner form)."""
    if tau <= 0:
        raise ValueError(f"time step must be > 0, got {tau}")
    z = tau * symbol.Q
    eye = np.eye(z.shape[0])
    with np.errstate(all="ignore"):
        out = rk.coeffs[-1] * eye
        for c in rk.coeffs[-2::-1]:
            out = out @ z + c * eye
    if not np.isfinite(out).all():
        raise OverflowError(f"update operator overflowed at tau = {tau}")
    return UpdateOperator(R=out, tau=tau)


@dataclass
class CflResult:
    """Outcome of a CFL-limit search.

    ``cfl_limit`` is tau times the sum of velocity components over
    spacings. For this scheme the stability-binding eigenvalue pair sits
    at the aliased zero wavenumber, which every incidence angle reaches,
    so this number is angle-independent; ``cfl_crossing`` (tau times the
    largest per-direction velocity/spacing ratio, i.e. tau over the
    wave's cell-crossing time) is the normalization in which the
    geometric structure of the limit is visible, with its minimum at the
    diagonal incidence atan(delta_y/delta_x).

    ``stable`` is False when the semi-discrete spectrum already has
    eigenvalues in the right half plane (e.g. expanding grids), in which
    case the limits are reported as 0 rather than raising: such schemes
    are formally unstable yet boundedly usable.
    """

    cfl_limit: float
    tau_limit: float
    worst_k: float
    stable: bool
    cfl_crossing: float = 0.0
    theta: float = 0.0
    phi: float = 0.0


def _golden_max(f, a: float, b: float, iters: int = 30) -> tuple[float, float]:
    """Deterministic golden-section maximization of f on [a, b]."""
    invphi = (sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


class _SymbolSpectra:
    """Eigenvalues of Q(k) with caching, for fast rho(R) evaluation.

    Since R is a polynomial in Q, the spectrum of R is the polynomial
    applied to the spectrum of Q; each tau evaluation is then cheap once
    the eigenvalues over the k grid are known.
    """

    def __init__(self, scheme, stencil, theta, phi):
        self.scheme = scheme
        self.stencil = stencil
        self.theta = theta
        self.phi = phi
        self.blocks = build_blocks(scheme, operators_for(scheme))
        self._cache: dict[float, np.ndarray] = {}

    def eigenvalues(self, k: float) -> np.ndarray:
        lam = self._cache.get(k)
        if lam is None:
            probe = WaveProbe(k=k, theta=self.theta, phi=self.phi)
            q = symbol_for(self.scheme, self.stencil, probe, blocks=self.blocks).Q
            lam = np.linalg.eigvals(q)
            if not np.isfinite(lam).all():
                raise EigensolverError(f"non-finite eigenvalues at k = {k}")
            self._cache[k] = lam
        return lam

    def rho(self, rk: RkScheme, tau: float, k: float) -> float:
        return float(np.abs(rk.stability(tau * self.eigenvalues(k))).max())


def cfl_limit(
    scheme: SchemeConfig,
    stencil: StretchedStencil,
    probe_angles: tuple[float, float] | float,
    rk: RkScheme,
    nk: int = 257,
    rel_tol: float = 1e-4,
) -> CflResult:
    """Largest stable CFL number at fixed incidence angles.

    Bisects on tau the supremum over sampled k in (0, k_nyquist] of the
    spectral radius of R(tau, k); the k grid is uniform with nk points
    plus golden-section refinement around the running maximum. The
    bisection converges to relative width ``rel_tol``.
    """
    theta, phi = probe_angles if isinstance(probe_angles, tuple) else (probe_angles, 0.0)
    spectra = _SymbolSpectra(scheme, stencil, theta, phi)
    k_nq = nyquist_wavenumber(theta, phi, stencil, scheme.p)
    ks = np.linspace(0.0, k_nq, nk + 1)[1:]
    lam_grid = np.array([spectra.eigenvalues(k) for k in ks])

    vel = WaveProbe(k=1.0, theta=theta, phi=phi).velocity(scheme.d)
    ratios = [vel[m] / stencil.delta[m] for m in range(scheme.d)]
    cfl_per_tau = float(sum(ratios))
    crossing_per_tau = float(max(ratios))

    lam_scale = float(np.abs(lam_grid).max())
    re_max = float(lam_grid.real.max())
    if re_max > RHO_TOL * max(1.0, lam_scale):
        worst = float(ks[int(np.argmax(lam_grid.real.max(axis=1)))])
        return CflResult(0.0, 0.0, worst, stable=False, theta=theta, phi=phi)

    def sup_rho(tau: float) -> tuple[float, float]:
        rho_grid = np.abs(rk.stability(tau * lam_grid)).max(axis=1)
        j = int(np.argmax(rho_grid))
        best_k, best_rho = float(ks[j]), float(rho_grid[j])
        lo = ks[j - 1] if j > 0 else ks[0] * 0.5
        hi = ks[j + 1] if j + 1 < ks.size else k_nq
        k_ref, rho_ref = _golden_max(lambda k: spectra.rho(rk, tau, k), lo, hi)
        if rho_ref > best_rho:
            best_k, best_rho = k_ref, rho_ref
        return best_rho, best_k

    def exceeds(tau: float) -> bool:
        return sup_rho(tau)[0] > 1.0 + RHO_TOL

    tau_hi = 1.0 / lam_scale
    for _ in range(200):
        if exceeds(tau_hi):
            break
        tau_hi *= 2.0
    else:
        raise RuntimeError("failed to bracket the stability boundary from above")
    tau_lo = tau_hi / 2.0
    while exceeds(tau_lo):
        tau_lo /= 2.0
        if tau_lo < 1e-300:
            # unstable for every positive step despite a left-half-plane
            # spectrum; report as a flagged zero limit
            return CflResult(0.0, 0.0, sup_rho(tau_hi)[1], stable=False, theta=theta, phi=phi)
    while (tau_hi - tau_lo) > rel_tol * tau_hi:
        mid = 0.5 * (tau_lo + tau_hi)
        if exceeds(mid):
            tau_hi = mid
        else:
            tau_lo = mid
    _, worst_k = sup_rho(tau_hi)
    return CflResult(
        cfl_limit=tau_lo * cfl_per_tau,
        tau_limit=tau_lo,
        worst_k=worst_k,
        stable=True,
        cfl_crossing=tau_lo * crossing_per_tau,
        theta=theta,
        phi=phi,
    )


def fully_discrete_spectrum(
    symbol: SemiDiscreteSymbol, rk: RkScheme, tau: float
) -> SpectrumResult:
    """Modified frequencies of the fully-discrete update at one wavenumber.

    The eigenvalues lambda of e^{i k tau} R are mapped to omega through
    the principal branch of

        omega = k + i log(lambda) / tau

    so that omega reduces to the semi-discrete value as tau -> 0. An
    exactly zero eigenvalue (an over-dissipated mode) is reported with
    dissipation -inf rather than raising. Branch continuity across a k
    sweep is handled by :func:`fully_discrete_sweep`; callers are
    responsible for choosing tau below the stability limit unless an
    unstable regime is deliberately probed.
    """
    update = build_update(symbol, rk, tau)
    try:
        r_eigs, vecs = np.linalg.eig(update.R)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigendecomposition failed: {exc}") from exc
    k = symbol.probe.k
    lam = np.exp(1j * k * tau) * r_eigs
    omega = np.empty_like(lam)
    nonzero = np.abs(lam) > 0
    omega[nonzero] = k + 1j * np.log(lam[nonzero]) / tau
    omega[~nonzero] = complex(k, -np.inf)
    order = np.lexsort((omega.imag, omega.real))
    omega, vecs = omega[order], vecs[:, order]
    sv = np.linalg.svd(vecs, compute_uv=False)
    kappa = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    u0 = plane_wave_samples(symbol)
    beta = np.linalg.lstsq(vecs, u0, rcond=None)[0]
    with np.errstate(invalid="ignore"):
        scores = np.abs(omega / k - 1.0) if k != 0 else np.abs(omega)
    scores = np.where(np.isnan(scores), np.inf, scores)  # -inf sentinel modes
    physical = int(np.argmin(scores))
    return SpectrumResult(
        modes=omega,
        eigvecs=vecs,
        physical_index=physical,
        k_hat=normalize_wavenumber(abs(k), symbol.probe, symbol.stencil, symbol.scheme.p),
        kappa=kappa,
        beta=beta,
        degenerate=False,
        ill_conditioned=bool(kappa > 1e8),
    )


def fully_discrete_sweep(
    scheme: SchemeConfig,
    stencil: StretchedStencil,
    rk: RkScheme,
    tau: float,
    theta: float = 0.0,
    phi: float = 0.0,
    k_hat: np.ndarray | None = None,
) -> ModeSweep:
    """Branch-tracked fully-discrete frequencies over a k sweep.

    Amplification factors are tracked along k and the complex logarithm is
    unwrapped along the physical branch, seeded from the small-k limit
    where the principal branch is exact.
    """
    if k_hat is None:
        k_hat = default_k_hat_grid()
    k_hat = np.asarray(k_hat, dtype=float)
    factor = normalization_factor(theta, phi, stencil, scheme.p)
    lead = _anchor_ladder(k_hat[0])
    ks = np.concatenate((lead, k_hat)) / factor
    n_lead = lead.size
    blocks = build_blocks(scheme, operators_for(scheme))
    amp_sets = []
    kappas = np.empty(k_hat.size)
    for i, k in enumerate(ks):
        probe = WaveProbe(k=k, theta=theta, phi=phi)
        symbol = symbol_for(scheme, stencil, probe, blocks=blocks)
        update = build_update(symbol, rk, tau)
        r_eigs, vecs = np.linalg.eig(update.R)
        amp_sets.append(np.exp(1j * k * tau) * r_eigs)
        if i >= n_lead:
            sv = np.linalg.svd(vecs, compute_uv=False)
            kappas[i - n_lead] = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
    tracked_amp = track_branches(amp_sets)
    with np.errstate(divide="ignore"):
        magnitude = np.log(np.abs(tracked_amp))
    args = np.unwrap(np.angle(tracked_amp), axis=0)
    omega = ks[:, None] - args / tau + 1j * magnitude / tau
    physical = physical_mode_select(omega, ks)
    return ModeSweep(
        k=ks[n_lead:],
        k_hat=k_hat,
        modes=omega[n_lead:],
        physical=physical,
        kappa=kappas,
        scale=factor,
    )
