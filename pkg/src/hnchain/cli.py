"""Command-line front end.

Every capability of the library is reachable here, and every figure-style
artifact is reproducible as deterministic CSV/JSON (plus optional SVG):

    hnchain spectrum   --N 40 --tL 1 --tR 2 --delta 0 --bc obc
    hnchain modes      --N 40 --tL 1 --tR 4 --delta 3 --l 5 --mode impurity
    hnchain quantize   --N 20 --tL 1 --tR 2 --delta 3 --l 6
    hnchain phase-scan --N 20 --l 6 --x 1 --ratio-min 0.05 --ratio-max 4.05 ...
    hnchain walk       --L 80 --steps 70 --r 0.5 --ell 0.5 --start centered
    hnchain ssh        --cells 40 --t1 0.5 --t2 1 --gamma 0.4284 --delta 0.595 --cell 26
    hnchain fragcheck  --N 18 --tL 1 --tR 1.4 --delta 2000 --l 5
    hnchain winding    --tL 1 --tR 2 --base 0,0

Exit codes: 0 success, 2 argument error, 3 convergence error, 4 I/O error.
The default working precision is 256 bits; the env var NHSE_PRECISION_BITS
overrides that default, and --bits overrides both. Numeric flags are kept as
decimal strings internally and parsed at the working precision, so values
round-trip through JSON configs without loss.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import mpmath as mp
import numpy as np

from . import __version__
from .analytics import (
    quantization_residual_obc,
    quantization_residual_pbc,
    refine_wavevector,
)
from .diagnostics import (
    find_impurity_mode,
    fragmentation_check,
    nhse_profile,
    phase_scan,
    ssh_tail_flatness,
    winding_number,
)
from .lattice import (
    ChainSpec,
    SSHSpec,
    build_hatano_nelson,
    build_nr_ssh,
    chain_to_json,
    ssh_to_json,
)
from .precision import PrecisionConfig
from .render import heatmap_svg, scatter_svg
from .spectral import ConvergenceError, full_spectrum, qr_reference
from .walk import (
    CoinSpec,
    ImpuritySpec,
    WalkState,
    evolve,
    position_distribution,
)

EXIT_OK = 0
EXIT_ARGUMENT = 2
EXIT_CONVERGENCE = 3
EXIT_IO = 4


def _default_bits() -> int:
    return int(os.environ.get("NHSE_PRECISION_BITS", "256"))


def _num(value: str):
    """Keep numbers as strings so they parse at the working precision."""
    s = str(value).strip()
    if "," in s:
        re_s, im_s = s.split(",", 1)
        return (re_s.strip(), im_s.strip())
    return s


def _fmt_mp(x, digits=None) -> str:
    return mp.nstr(x, digits or int(mp.mp.prec / 3.32) + 3, strip_zeros=True)


def _write_text(path, text):
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _write_json(path, obj):
    _write_text(path, json.dumps(obj, indent=2) + "\n")


def _chain_args(p: argparse.ArgumentParser):
    p.add_argument("--N", type=int, help="number of sites")
    p.add_argument("--tL", type=_num, default="1", help="left-hopping amplitude")
    p.add_argument("--tR", type=_num, default="1", help="right-hopping amplitude")
    p.add_argument("--delta", type=_num, default="0", help="impurity strength")
    p.add_argument("--l", type=int, default=1, help="impurity site (1-based)")
    p.add_argument("--bc", choices=["obc", "pbc"], default="obc")


def _common_args(p: argparse.ArgumentParser):
    p.add_argument("--bits", type=int, default=None, help="working precision bits")
    p.add_argument("--tol", default=None, help="residual tolerance")
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--formats", default="csv,json,svg",
                   help="comma subset of csv,json,svg")
    p.add_argument("--config", default=None,
                   help="JSON config file; explicit flags take precedence")


def _apply_config(args, argv, actions):
    """Fill parameters from a JSON config; explicit command-line flags win."""
    if not args.config:
        return args
    with open(args.config) as fh:
        blob = json.load(fh)
    if blob.get("command", args.command).replace("_", "-") != args.command:
        raise ValueError(
            f"config file is for command {blob.get('command')!r}, not {args.command!r}"
        )
    for key, value in blob.get("params", {}).items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ValueError(f"unknown config parameter {key!r}")
        if f"--{key}" in argv:
            continue
        action = actions.get(attr)
        if action is not None and action.type is not None and isinstance(value, str):
            value = action.type(value)
        setattr(args, attr, value)
    return args


def _cfg_from(args) -> PrecisionConfig:
    bits = args.bits if args.bits is not None else _default_bits()
    tol = args.tol if args.tol is not None else "1e-30"
    max_iter = args.max_iter if args.max_iter is not None else 200
    return PrecisionConfig(bits=int(bits), tol=tol, max_iter=int(max_iter))


def _formats(args):
    chosen = {f.strip() for f in str(args.formats).split(",") if f.strip()}
    unknown = chosen - {"csv", "json", "svg"}
    if unknown:
        raise ValueError(f"unknown formats: {sorted(unknown)}")
    return chosen


def _chain_spec(args) -> ChainSpec:
    if args.N is None:
        raise ValueError("--N is required")
    return ChainSpec(
        n_sites=int(args.N),
        t_left=args.tL,
        t_right=args.tR,
        delta=args.delta,
        impurity_site=int(args.l),
        boundary=args.bc,
    )


def _edge_zone_warning(spec: ChainSpec):
    l, n = spec.impurity_site, spec.n_sites
    if 2 <= l <= 3 or n - 2 <= l <= n - 1:
        print(
            "note: the impurity sits near (not at) a chain end; the flat-mode "
            "condition transitions between the bulk value t_R - t_L and the "
            "edge values t_R (l=1) / t_L (l=N), with no closed form in between",
            file=sys.stderr,
        )


# --- commands -----------------------------------------------------------------


def _cmd_spectrum(args):
    cfg = _cfg_from(args)
    spec = _chain_spec(args)
    fmts = _formats(args)
    with cfg.context():
        spectrum = full_spectrum(build_hatano_nelson(spec), cfg)
        payload = {
            "spec": chain_to_json(spec),
            "precision_bits": cfg.bits,
            **spectrum.to_json(),
        }
        if "json" in fmts:
            _write_json(os.path.join(args.out, "spectrum.json"), payload)
        if "svg" in fmts:
            pts = [(float(e.real), float(e.imag)) for e in spectrum.eigenvalues]
            scatter_svg(pts, os.path.join(args.out, "spectrum.svg"),
                        title="eigenvalues in the complex plane")
        if args.double_check:
            ev = qr_reference(build_hatano_nelson(spec))
            _write_json(os.path.join(args.out, "spectrum_double.json"),
                        {"eigenvalues": [[e.real, e.imag] for e in ev]})
    return EXIT_OK


def _cmd_modes(args):
    cfg = _cfg_from(args)
    spec = _chain_spec(args)
    fmts = _formats(args)
    _edge_zone_warning(spec)
    with cfg.context():
        spectrum = full_spectrum(build_hatano_nelson(spec), cfg)
        targets = []
        if args.mode == "aggregate":
            prof = nhse_profile(spectrum, squared=not args.abs_sum)
            targets.append(("mode_aggregate.csv", prof))
        elif args.mode == "impurity":
            idx, prof = find_impurity_mode(spectrum, spec)
            targets.append((f"mode_impurity_{idx}.csv", prof))
        elif args.mode == "all":
            prof = nhse_profile(spectrum, squared=not args.abs_sum)
            targets.append(("mode_aggregate.csv", prof))
            for k, v in enumerate(spectrum.right_vectors):
                targets.append((f"mode_{k:03d}.csv", v))
        else:
            k = int(args.mode)
            targets.append((f"mode_{k:03d}.csv", spectrum.right_vectors[k]))
        if "csv" in fmts:
            for name, prof in targets:
                lines = ["site,re,im,abs"]
                for j, a in enumerate(prof.amplitudes, start=1):
                    lines.append(
                        f"{j},{_fmt_mp(a.real)},{_fmt_mp(a.imag)},{_fmt_mp(abs(a))}"
                    )
                _write_text(os.path.join(args.out, name), "\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_quantize(args):
    cfg = _cfg_from(args)
    spec = _chain_spec(args)
    fmts = _formats(args)
    with cfg.context():
        spectrum = full_spectrum(build_hatano_nelson(spec), cfg)
        rows = ["index,E_re,E_im,kd_re,kd_im,abs_residual"]
        payload = []
        for n, e in enumerate(spectrum.eigenvalues):
            kd, e_ref = refine_wavevector(spec, e, cfg)
            if spec.boundary == "obc":
                res = quantization_residual_obc(spec, kd)
            else:
                rooty = mp.sqrt(spec.tR / spec.tL)
                res = quantization_residual_pbc(spec, rooty * mp.expj(kd))
            rows.append(
                f"{n},{_fmt_mp(e_ref.real)},{_fmt_mp(e_ref.imag)},"
                f"{_fmt_mp(kd.real)},{_fmt_mp(kd.imag)},{_fmt_mp(abs(res.value))}"
            )
            payload.append({
                "E": [_fmt_mp(e_ref.real), _fmt_mp(e_ref.imag)],
                "kd": [_fmt_mp(kd.real), _fmt_mp(kd.imag)],
                "abs_residual": _fmt_mp(abs(res.value)),
            })
        if "csv" in fmts:
            _write_text(os.path.join(args.out, "quantize.csv"), "\n".join(rows) + "\n")
        if "json" in fmts:
            _write_json(os.path.join(args.out, "quantize.json"),
                        {"spec": chain_to_json(spec), "residuals": payload})
    return EXIT_OK


def _cmd_phase_scan(args):
    cfg = PrecisionConfig(
        bits=int(args.bits) if args.bits is not None else 128,
        tol=args.tol if args.tol is not None else "1e-20",
        max_iter=int(args.max_iter) if args.max_iter is not None else 200,
    )
    fmts = _formats(args)
    scan = phase_scan(
        n_sites=int(args.N),
        l=int(args.l),
        ratio_range=(float(args.ratio_min), float(args.ratio_max)),
        delta_range=(float(args.delta_min), float(args.delta_max)),
        resolution=(int(args.res_ratio), int(args.res_delta)),
        x=int(args.x),
        cfg=cfg,
    )
    if "csv" in fmts:
        lines = ["ratio,delta,value,flag"]
        for r, d, v, f in scan.rows():
            lines.append(f"{r!r},{d!r},{v!r},{f}")
        _write_text(os.path.join(args.out, "phase_scan.csv"), "\n".join(lines) + "\n")
    if "svg" in fmts:
        heatmap_svg(scan, os.path.join(args.out, "phase_scan.svg"),
                    title=f"ln(1e-5 + |D_{args.x:+d}|)")
    return EXIT_OK


def centered_start(length: int) -> WalkState:
    """Reflection-symmetric start with coin state (|R> + i|L>)/sqrt(2).

    Odd lattices start on the central site. Even lattices have no central
    site; the state is split over the two central sites so that it is an
    eigenstate of the mirror-plus-coin-swap symmetry of the unbiased walk,
    which keeps the distribution exactly symmetric even once the light cone
    reaches the (absorbing) edges.
    """
    amps = np.zeros((length, 2), dtype=complex)
    a, b = 1 / np.sqrt(2), 1j / np.sqrt(2)
    if length % 2:
        amps[length // 2] = (a, b)
    else:
        c1, c2 = length // 2 - 1, length // 2
        amps[c2] = (a / np.sqrt(2), b / np.sqrt(2))
        amps[c1] = (-1j * b / np.sqrt(2), 1j * a / np.sqrt(2))
    state = WalkState(amps, 0)
    return WalkState(amps, 0, (state.norm(),))


def _cmd_walk(args):
    fmts = _formats(args)
    coin = CoinSpec(r=float(args.r), ell=float(args.ell))
    imp = ImpuritySpec(
        model=args.model, site=int(args.site), gamma=float(args.gamma),
        phi=float(args.phi), gamma_r=float(args.gammaR), gamma_l=float(args.gammaL),
    )
    length = int(args.L)
    x0 = int(args.x0) if args.x0 is not None else length // 2
    if args.start == "centered":
        state = centered_start(length)
    else:
        state = WalkState.point_start(length, x0, (1.0, 0.0))
    final = evolve(state, int(args.steps), coin, imp,
                   bits=int(args.bits) if args.bits else None)
    p_raw = position_distribution(final, normalized=False)
    p_norm = position_distribution(final, normalized=True)
    if "csv" in fmts:
        lines = ["x,p_raw,p_normalized"]
        for x in range(length):
            lines.append(f"{x},{float(p_raw[x])!r},{float(p_norm[x])!r}")
        _write_text(os.path.join(args.out, "walk.csv"), "\n".join(lines) + "\n")
    if "json" in fmts:
        _write_json(os.path.join(args.out, "walk.json"), {
            "coin": {"r": coin.r, "ell": coin.ell},
            "impurity": {
                "model": imp.model, "site": imp.site, "gamma": imp.gamma,
                "phi": imp.phi, "gamma_r": imp.gamma_r, "gamma_l": imp.gamma_l,
            },
            "steps": int(args.steps),
            "lattice": length,
            "start": args.start,
            "norm_trace": [float(v) for v in final.norm_trace],
        })
    return EXIT_OK


def _cmd_ssh(args):
    cfg = _cfg_from(args)
    fmts = _formats(args)
    spec = SSHSpec(
        n_cells=int(args.cells), t1=args.t1, t2=args.t2, gamma=args.gamma,
        delta=args.delta, impurity_cell=int(args.cell),
        impurity_sublattice=args.sublattice,
    )
    with cfg.context():
        spectrum = full_spectrum(build_nr_ssh(spec), cfg)
        payload = {
            "spec": ssh_to_json(spec),
            "precision_bits": cfg.bits,
            **spectrum.to_json(),
        }
        if "json" in fmts:
            _write_json(os.path.join(args.out, "ssh_spectrum.json"), payload)
        if "svg" in fmts:
            pts = [(float(e.real), float(e.imag)) for e in spectrum.eigenvalues]
            scatter_svg(pts, os.path.join(args.out, "ssh_spectrum.svg"),
                        title="two-band spectrum")
        try:
            idx, prof = find_impurity_mode(spectrum, spec)
        except ValueError:
            idx, prof = None, None
        if prof is not None:
            if "csv" in fmts:
                lines = ["site,re,im,abs"]
                for j, a in enumerate(prof.amplitudes, start=1):
                    lines.append(
                        f"{j},{_fmt_mp(a.real)},{_fmt_mp(a.imag)},{_fmt_mp(abs(a))}"
                    )
                _write_text(os.path.join(args.out, "ssh_mode.csv"),
                            "\n".join(lines) + "\n")
            if "json" in fmts:
                flat, dev = ssh_tail_flatness(prof, spec, rel_tol=float(args.flat_tol))
                _write_json(os.path.join(args.out, "ssh_report.json"), {
                    "impurity_mode_index": idx,
                    "energy": [
                        _fmt_mp(spectrum.eigenvalues[idx].real),
                        _fmt_mp(spectrum.eigenvalues[idx].imag),
                    ],
                    "flat": bool(flat),
                    "flatness_deviation": dev,
                    "flatness_tolerance": float(args.flat_tol),
                })
    return EXIT_OK


def _cmd_fragcheck(args):
    cfg = _cfg_from(args)
    spec = _chain_spec(args)
    report = fragmentation_check(spec, cfg)
    _write_json(os.path.join(args.out, "fragcheck.json"),
                {"spec": chain_to_json(spec), **report})
    return EXIT_OK


def _cmd_winding(args):
    cfg = _cfg_from(args)
    n = int(args.N) if args.N is not None else 2
    spec = ChainSpec(n_sites=max(n, 2), t_left=args.tL, t_right=args.tR,
                     delta=0, impurity_site=1, boundary="pbc")
    base = args.base
    with cfg.context():
        if isinstance(base, tuple):
            b = mp.mpc(mp.mpmathify(base[0]), mp.mpmathify(base[1]))
        else:
            b = mp.mpc(mp.mpmathify(base))
        w = winding_number(spec, b, n_samples=int(args.samples))
        _write_json(os.path.join(args.out, "winding.json"), {
            "tL": str(args.tL), "tR": str(args.tR),
            "base_point": [float(b.real), float(b.imag)],
            "samples": int(args.samples),
            "winding": w,
            "orientation": "increasing qd, counterclockwise positive",
        })
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="hnchain",
        description="spectra, skin-effect diagnostics and walks for "
                    "non-reciprocal impurity chains at configurable precision",
    )
    top.add_argument("--version", action="version", version=f"hnchain {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="full eigendecomposition of the chain")
    _chain_args(p)
    p.add_argument("--double-check", action="store_true",
                   help="also emit the double-precision QR spectrum")
    _common_args(p)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("modes", help="eigenvector profiles / aggregate skin weight")
    _chain_args(p)
    p.add_argument("--mode", default="aggregate",
                   help="aggregate | impurity | all | <index>")
    p.add_argument("--abs-sum", action="store_true",
                   help="aggregate sum of |psi| instead of |psi|^2")
    _common_args(p)
    p.set_defaults(func=_cmd_modes)

    p = sub.add_parser("quantize", help="per-eigenvalue quantization residuals")
    _chain_args(p)
    _common_args(p)
    p.set_defaults(func=_cmd_quantize)

    p = sub.add_parser("phase-scan", help="gradient diagnostic over (ratio, delta)")
    p.add_argument("--N", type=int, required=False)
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--x", type=int, choices=(1, -1), default=1)
    p.add_argument("--ratio-min", type=float, default=0.05)
    p.add_argument("--ratio-max", type=float, default=4.05)
    p.add_argument("--delta-min", type=float, default=-4.0)
    p.add_argument("--delta-max", type=float, default=4.0)
    p.add_argument("--res-ratio", type=int, default=41)
    p.add_argument("--res-delta", type=int, default=41)
    _common_args(p)
    p.set_defaults(func=_cmd_phase_scan)

    p = sub.add_parser("walk", help="discrete-time walk distributions")
    p.add_argument("--L", type=int, required=False)
    p.add_argument("--steps", type=int, default=70)
    p.add_argument("--r", type=float, default=0.5)
    p.add_argument("--ell", type=float, default=0.5)
    p.add_argument("--x0", type=int, default=None)
    p.add_argument("--start", choices=["point", "centered"], default="point")
    p.add_argument("--model", choices=["none", "M1", "M2", "M3"], default="none")
    p.add_argument("--site", type=int, default=0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--gammaR", type=float, default=1.0)
    p.add_argument("--gammaL", type=float, default=1.0)
    _common_args(p)
    p.set_defaults(func=_cmd_walk)

    p = sub.add_parser("ssh", help="two-band chain spectra and impurity mode")
    p.add_argument("--cells", type=int, required=False)
    p.add_argument("--t1", type=_num, default="1")
    p.add_argument("--t2", type=_num, default="1")
    p.add_argument("--gamma", type=_num, default="0")
    p.add_argument("--delta", type=_num, default="0")
    p.add_argument("--cell", type=int, default=1)
    p.add_argument("--sublattice", choices=["A", "B"], default="A")
    p.add_argument("--flat-tol", type=float, default=0.10)
    _common_args(p)
    p.set_defaults(func=_cmd_ssh)

    p = sub.add_parser("fragcheck", help="strong-impurity fragmentation report")
    _chain_args(p)
    _common_args(p)
    p.set_defaults(func=_cmd_fragcheck)

    p = sub.add_parser("winding", help="spectral winding of the ring dispersion")
    p.add_argument("--N", type=int, default=2)
    p.add_argument("--tL", type=_num, default="1")
    p.add_argument("--tR", type=_num, default="1")
    p.add_argument("--base", type=_num, default="0")
    p.add_argument("--samples", type=int, default=64)
    _common_args(p)
    p.set_defaults(func=_cmd_winding)

    top.subparser_map = sub.choices
    return top


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    actions = {a.dest: a for a in parser.subparser_map[args.command]._actions}
    try:
        args = _apply_config(args, argv, actions)
        if getattr(args, "N", None) is None and args.command in (
                "spectrum", "modes", "quantize", "phase-scan", "fragcheck"):
            raise ValueError("--N is required (flag or config)")
        if getattr(args, "L", None) is None and args.command == "walk":
            raise ValueError("--L is required (flag or config)")
        if getattr(args, "cells", None) is None and args.command == "ssh":
            raise ValueError("--cells is required (flag or config)")
        if hasattr(args, "out"):
            os.makedirs(args.out, exist_ok=True)
        return args.func(args)
    except (ValueError, TypeError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGUMENT
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
