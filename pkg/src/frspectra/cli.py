"""Command-line front end: parameter sweeps with deterministic CSV/JSON output.

Commands: dispersion, condition, cfl, fully-discrete, verify, mesh.
Numeric flags accept either a single value or an inclusive range
``start:stop:step``. Angles are given in degrees. Output is byte-identical
for identical invocations (the JSON mirror carries a ``created`` timestamp
that comparisons should exclude). Exit codes: 0 ok, 1 user error, 2
numerical failure (failed rows are marked and the run continues).

Every emitted value is recomputable through library calls; the CLI only
orchestrates sweeps and serialization.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from math import radians

import numpy as np

from . import __version__
from .advect import check_decay_rate
from .basis import DG, HUYNH_G2, OSFR, make_family
from .mesh import MeshGenerationError, generate, write_mesh
from .operator import SchemeConfig, StretchedStencil
from .spectrum import (
    EigensolverError,
    ModeAmbiguityError,
    default_k_hat_grid,
    dispersion_sweep,
)
from .temporal import cfl_limit, fully_discrete_sweep, rk_from_name

_KEY_COLUMNS = [
    "p", "family", "iota", "alpha", "gx", "gy", "gz", "aspect", "theta", "phi", "khat",
]
_SPECTRUM_COLUMNS = _KEY_COLUMNS + ["re_omega_hat", "im_omega_hat", "kappa", "status"]
_CFL_COLUMNS = _KEY_COLUMNS + [
    "cfl_limit", "cfl_crossing", "tau_limit", "worst_k", "stable", "status",
]


class UserInputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UserInputError(message)


def parse_range(text: str, integer: bool = False):
    """Parse ``v`` or ``start:stop:step`` (inclusive when step divides)."""
    parts = text.split(":")
    cast = int if integer else float
    try:
        if len(parts) == 1:
            return [cast(float(parts[0]))] if integer else [float(parts[0])]
        if len(parts) == 3:
            start, stop, step = (float(v) for v in parts)
            if step <= 0:
                raise ValueError("step must be > 0")
            n = int(np.floor((stop - start) / step + 1e-9))
            values = [start + i * step for i in range(n + 1)]
            return [cast(round(v)) if integer else v for v in values]
    except ValueError as exc:
        raise UserInputError(f"bad range {text!r}: {exc}") from exc
    raise UserInputError(f"bad range {text!r}: expected 'v' or 'start:stop:step'")


def _families(text: str):
    names = [t.strip().lower() for t in text.split(",") if t.strip()]
    alias = {"dg": DG, "huynh": HUYNH_G2, "huynh-g2": HUYNH_G2, "osfr": OSFR}
    out = []
    for name in names:
        if name not in alias:
            raise UserInputError(
                f"--family: unknown family {name!r} (choose dg, huynh, osfr)"
            )
        out.append(alias[name])
    if not out:
        raise UserInputError("--family: at least one family required")
    return out


def _format_csv_value(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17e" % float(v)
    return str(v)


def _sanitize_json(v):
    if isinstance(v, (float, np.floating)):
        return float(v) if np.isfinite(v) else None
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, bool):
        return v
    return v


def _emit(rows, columns, args, spec_echo):
    if args.format == "csv":
        lines = [",".join(columns)]
        for row in rows:
            lines.append(",".join(_format_csv_value(row.get(c)) for c in columns))
        text = "\n".join(lines) + "\n"
    else:
        doc = {
            "command": args.command,
            "metadata": {
                "version": __version__,
                "numpy": np.__version__,
                "created": datetime.now(timezone.utc).isoformat(),
                "seed": getattr(args, "seed", None),
                "spec": spec_echo,
            },
            "columns": columns,
            "rows": [[_sanitize_json(row.get(c)) for c in columns] for row in rows],
        }
        text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as fh:
            fh.write(text)


def _spec_echo(args, skip=("output", "threads", "func", "command")):
    return {
        k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None
    }


def _add_sweep_flags(sub, with_khat=True):
    sub.add_argument("--d", type=int, default=2, choices=(1, 2, 3))
    sub.add_argument("--p", default="3", help="order, value or range")
    sub.add_argument("--family", default="huynh", help="comma list: dg,huynh,osfr")
    sub.add_argument("--iota", default=None, help="osfr parameter, value or range")
    sub.add_argument("--alpha", default="1.0", help="upwind ratio, value or range")
    sub.add_argument("--gx", default="1.0", help="x expansion factor, value or range")
    sub.add_argument("--gy", default="1.0")
    sub.add_argument("--gz", default="1.0")
    sub.add_argument("--dx", default="1.0", help="x spacing, value or range")
    sub.add_argument("--dy", default="1.0")
    sub.add_argument("--dz", default="1.0")
    sub.add_argument("--theta", default="0:90:1", help="degrees, value or range")
    sub.add_argument("--phi", default="0", help="degrees (3D), value or range")
    if with_khat:
        sub.add_argument(
            "--khat",
            default=None,
            help="normalized wavenumbers, value or range; default 64 log-spaced",
        )
    sub.add_argument("--threads", type=int, default=1)
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("-o", "--output", default=None)


def _sweep_combos(args):
    ps = parse_range(args.p, integer=True)
    fams = _families(args.family)
    iotas = parse_range(args.iota) if args.iota is not None else [None]
    alphas = parse_range(args.alpha)
    gxs, gys, gzs = (parse_range(g) for g in (args.gx, args.gy, args.gz))
    dxs, dys, dzs = (parse_range(v) for v in (args.dx, args.dy, args.dz))
    thetas = parse_range(args.theta)
    phis = parse_range(args.phi)
    d = args.d
    if d == 1:
        thetas = [0.0]
    if d < 3:
        phis = [0.0]
        gzs, dzs = [1.0], [1.0]
    if d < 2:
        gys, dys = [1.0], [1.0]
    if any(not 0.0 <= t <= 90.0 for t in thetas):
        raise UserInputError("--theta: angles must lie in [0, 90] degrees")
    if any(not 0.0 <= t <= 90.0 for t in phis):
        raise UserInputError("--phi: angles must lie in [0, 90] degrees")
    combos = []
    for p in ps:
        for fam in fams:
            for iota in iotas if fam == OSFR else [None]:
                if fam == OSFR and iota is None:
                    raise UserInputError("--iota is required with --family osfr")
                for alpha in alphas:
                    for gx in gxs:
                        for gy in gys:
                            for gz in gzs:
                                for dx in dxs:
                                    for dy in dys:
                                        for dz in dzs:
                                            for theta in thetas:
                                                for phi in phis:
                                                    combos.append(
                                                        dict(
                                                            p=p, family=fam, iota=iota,
                                                            alpha=alpha, gx=gx, gy=gy,
                                                            gz=gz, dx=dx, dy=dy, dz=dz,
                                                            theta=theta, phi=phi, d=d,
                                                        )
                                                    )
    return combos


def _combo_scheme_stencil(c):
    family = make_family(c["family"], c["p"], c["iota"])
    scheme = SchemeConfig(c["p"], family, c["alpha"], c["d"])
    delta = (c["dx"], c["dy"], c["dz"])[: c["d"]]
    gamma = (c["gx"], c["gy"], c["gz"])[: c["d"]]
    return scheme, StretchedStencil(c["d"], delta, gamma)


def _resolved_iota(c):
    try:
        return make_family(c["family"], c["p"], c["iota"]).iota
    except ValueError:
        return c["iota"]  # unresolvable (error rows): echo the input


def _key_fields(c, khat=None):
    return {
        "p": c["p"],
        "family": c["family"],
        "iota": _resolved_iota(c),
        "alpha": c["alpha"],
        "gx": c["gx"],
        "gy": c["gy"],
        "gz": c["gz"],
        "aspect": c["dy"] / c["dx"],
        "theta": c["theta"],
        "phi": c["phi"],
        "khat": khat,
    }


def _error_rows(c, exc, khat_grid=None):
    marker = f"error:{type(exc).__name__}"
    if khat_grid is None:
        return [{**_key_fields(c), "status": marker}]
    return [{**_key_fields(c, kh), "status": marker} for kh in khat_grid]


_ROW_ERRORS = (EigensolverError, ModeAmbiguityError, OverflowError, ValueError)


def _run_spectrum_command(args, fully_discrete=False):
    combos = _sweep_combos(args)
    khat_grid = (
        np.array(parse_range(args.khat)) if args.khat else default_k_hat_grid()
    )
    rk = rk_from_name(args.rk) if fully_discrete else None

    def worker(c):
        try:
            scheme, stencil = _combo_scheme_stencil(c)
            if fully_discrete:
                sweep = fully_discrete_sweep(
                    scheme, stencil, rk, args.tau,
                    radians(c["theta"]), radians(c["phi"]), khat_grid,
                )
            else:
                sweep = dispersion_sweep(
                    scheme, stencil, radians(c["theta"]), radians(c["phi"]), khat_grid
                )
            omega_hat = sweep.omega_hat_physical
            return [
                {
                    **_key_fields(c, sweep.k_hat[i]),
                    "re_omega_hat": omega_hat[i].real,
                    "im_omega_hat": omega_hat[i].imag,
                    "kappa": sweep.kappa[i],
                    "status": "ok",
                }
                for i in range(sweep.k_hat.size)
            ]
        except _ROW_ERRORS as exc:
            return _error_rows(c, exc, khat_grid)

    rows = _map_combos(worker, combos, args.threads)
    _emit(rows, _SPECTRUM_COLUMNS, args, _spec_echo(args))
    return 2 if any(r["status"] != "ok" for r in rows) else 0


def _run_cfl(args):
    combos = _sweep_combos(args)
    rk = rk_from_name(args.rk)

    def worker(c):
        try:
            scheme, stencil = _combo_scheme_stencil(c)
            res = cfl_limit(
                scheme, stencil, (radians(c["theta"]), radians(c["phi"])), rk
            )
            return [
                {
                    **_key_fields(c),
                    "cfl_limit": res.cfl_limit,
                    "cfl_crossing": res.cfl_crossing,
                    "tau_limit": res.tau_limit,
                    "worst_k": res.worst_k,
                    "stable": res.stable,
                    "status": "ok",
                }
            ]
        except _ROW_ERRORS as exc:
            return _error_rows(c, exc)

    rows = _map_combos(worker, combos, args.threads)
    _emit(rows, _CFL_COLUMNS, args, _spec_echo(args))
    return 2 if any(r["status"] != "ok" for r in rows) else 0


def _map_combos(worker, combos, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            nested = list(pool.map(worker, combos))
    else:
        nested = [worker(c) for c in combos]
    return [row for rows in nested for row in rows]


def _run_verify(args):
    fam = _families(args.family)
    if len(fam) != 1:
        raise UserInputError("--family: verify takes a single family")
    try:
        check = check_decay_rate(
            p=parse_range(args.p, integer=True)[0],
            family_kind=fam[0],
            alpha=parse_range(args.alpha)[0],
            d=args.d,
            theta=radians(parse_range(args.theta)[0]),
            k_hat=parse_range(args.khat)[0],
            rk=rk_from_name(args.rk),
            tol=args.tol,
            iota=parse_range(args.iota)[0] if args.iota else None,
        )
    except _ROW_ERRORS as exc:
        print(f"verify failed to run: {exc}", file=sys.stderr)
        return 2
    print(f"config: {check.config}")
    print(f"wavenumber: k = {check.k:.6g} (khat = {check.k_hat:.6g})")
    print(f"predicted rate 2*Im(omega): {check.predicted:.12e}")
    print(f"measured solver decay rate: {check.measured:.12e}")
    print(f"relative error: {check.rel_error:.3e} (tolerance {check.tol:.1e})")
    print("PASS" if check.passed else "FAIL")
    return 0 if check.passed else 2


def _run_mesh(args):
    dims = parse_range(args.dims, integer=True)
    dims = tuple(dims * 3 if len(dims) == 1 else dims)
    if len(dims) != 3:
        raise UserInputError("--dims: give one value or an inclusive 3-value range")
    try:
        mesh = generate(dims, args.extent, args.jitter, args.seed)
    except MeshGenerationError as exc:
        print(f"mesh generation failed: {exc}", file=sys.stderr)
        return 2
    if args.output:
        write_mesh(mesh, args.output)
    qh = mesh.per_element_qh
    print(
        f"mesh {dims[0]}x{dims[1]}x{dims[2]} jitter={args.jitter} seed={args.seed}: "
        f"q_h mean={qh.mean():.17e} min={qh.min():.17e} max={qh.max():.17e}"
    )
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="frspectra", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    disp = sub.add_parser("dispersion", help="physical-mode dispersion/dissipation sweep")
    _add_sweep_flags(disp)
    disp.set_defaults(func=_run_spectrum_command)

    cond = sub.add_parser("condition", help="modal conditioning sweep (same columns)")
    _add_sweep_flags(cond)
    cond.set_defaults(func=_run_spectrum_command)

    cfl = sub.add_parser("cfl", help="CFL limit sweep")
    _add_sweep_flags(cfl, with_khat=False)
    cfl.add_argument("--rk", default="rk44", help="euler | rk33 | rk44")
    cfl.set_defaults(func=_run_cfl)

    fd = sub.add_parser("fully-discrete", help="fully-discrete sweep at fixed tau")
    _add_sweep_flags(fd)
    fd.add_argument("--rk", default="rk44")
    fd.add_argument("--tau", type=float, required=True)
    fd.set_defaults(func=lambda a: _run_spectrum_command(a, fully_discrete=True))

    ver = sub.add_parser("verify", help="solver decay rate vs eigenanalysis")
    ver.add_argument("--p", default="2")
    ver.add_argument("--d", type=int, default=1, choices=(1, 2))
    ver.add_argument("--family", default="huynh")
    ver.add_argument("--iota", default=None)
    ver.add_argument("--alpha", default="1.0")
    ver.add_argument("--theta", default="0")
    ver.add_argument("--khat", default="1.0")
    ver.add_argument("--rk", default="rk44")
    ver.add_argument("--tol", type=float, default=1e-6)
    ver.set_defaults(func=_run_verify)

    mesh = sub.add_parser("mesh", help="jittered hex mesh generation")
    mesh.add_argument("--dims", default="8")
    mesh.add_argument("--extent", type=float, default=1.0)
    mesh.add_argument("--jitter", type=float, default=0.0)
    mesh.add_argument("--seed", type=int, default=0)
    mesh.add_argument("-o", "--output", default=None)
    mesh.set_defaults(func=_run_mesh)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UserInputError as exc:
        print(f"frspectra: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
