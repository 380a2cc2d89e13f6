"""Command-line front end: ``pickdecomp {stability,moments,decompose,certify,sweep}``.

Exit status: 0 on success with every certificate passing, 1 when a
certificate fails, 2 on input or configuration errors (including an
unstable polynomial, whose verdict is still written to the report).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .certify import CheckRecord, SuiteConfig, run_suite
from .decomp import (DEFAULT_LADDER, DecompositionSpec, KernelFactory, _fmt, complement,
                     decompose, gkvw_pair, truncation_sweep)
from .errors import UnstablePolynomialError
from .kernels import Kernel, ShiftFactor
from .moments import CONVENTION, MomentCache, compute_moments
from .pointsets import PointSet
from .stablepoly import StablePolynomial, check_stability

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad input file or flag; maps to exit status 2."""


@dataclass
class PointSpec:
    mode: str = "random"
    count: int = 12
    radius: float = 0.6
    seed: int = 0

    @classmethod
    def parse(cls, text: str) -> "PointSpec":
        parts = text.split(":")
        if len(parts) != 4:
            raise InputError(f"--points expects MODE:COUNT:RADIUS:SEED, got {text!r}")
        mode, count, radius, seed = parts
        if mode not in ("random", "plain"):
            raise InputError(f"unknown point mode {mode!r} (use 'random' or 'plain')")
        try:
            spec = cls(mode, int(count), float(radius), int(seed))
        except ValueError:
            raise InputError(f"malformed --points value {text!r}") from None
        if spec.count < 1:
            raise InputError("point count must be positive")
        if not 0 < spec.radius < 1:
            raise InputError(f"point radius must lie in (0, 1), got {spec.radius}")
        return spec

    def build(self, d: int) -> PointSet:
        return PointSet.random(d, self.count, self.radius, self.seed,
                               structured=self.mode == "random")

    def to_json_dict(self) -> dict:
        return {"mode": self.mode, "count": self.count, "radius": self.radius, "seed": self.seed}


@dataclass
class RunConfig:
    command: str
    input: Path
    output: Path | None = None
    M: int | None = None
    ladder: tuple = DEFAULT_LADDER
    S: frozenset | None = None
    j: int = 1
    k: int = 2
    points: PointSpec = field(default_factory=PointSpec)
    tol_psd: float = 1e-6
    tol_exact: float = 1e-9
    tol_identity: float = 1e-5
    tol_moment: float = 1e-12
    use_cache: bool = True
    cache_dir: Path | None = None
    csv_kernels: Path | None = None

    def __post_init__(self):
        if self.M is not None and (self.M < 1 or self.M & (self.M - 1)):
            raise InputError(f"--M must be a power of two, got {self.M}")
        if not self.ladder or any(N < 1 for N in self.ladder):
            raise InputError("--N needs positive integers")
        if any(b <= a for a, b in zip(self.ladder, self.ladder[1:])):
            raise InputError(f"--N ladder must be strictly increasing, got {list(self.ladder)}")
        for name in ("tol_psd", "tol_exact", "tol_identity", "tol_moment"):
            if getattr(self, name) < 0:
                raise InputError(f"--{name.replace('_', '-')} must be non-negative")

    @property
    def cache(self) -> MomentCache | None:
        return MomentCache(self.cache_dir) if self.use_cache else None

    def to_json_dict(self) -> dict:
        return {
            "M": self.M, "ladder": list(self.ladder),
            "S": None if self.S is None else sorted(self.S),
            "j": self.j, "k": self.k, "points": self.points.to_json_dict(),
            "tol_psd": self.tol_psd, "tol_exact": self.tol_exact,
            "tol_identity": self.tol_identity, "tol_moment": self.tol_moment,
        }


def _csv_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pickdecomp",
        description="Pick kernel decompositions for rational inner functions on the polydisk.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "stability": "numerical stability verdict for p",
        "moments": "moment table of |p|^-2 on the torus",
        "decompose": "truncated K_S, L_S kernels and the P = K_S + L_T residual ladder",
        "certify": "run the full certificate suite",
        "sweep": "residual and contractivity along a truncation ladder",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--input", required=True, type=Path, help="polynomial JSON file")
        sp.add_argument("--output", type=Path, help="report path (default: stdout)")
        sp.add_argument("--M", type=int, help="torus grid size per dimension (power of two)")
        sp.add_argument("--N", type=_csv_ints, help="truncation ladder, e.g. 4,8,16")
        sp.add_argument("--S", type=_csv_ints, help="variable subset S (1-based), e.g. 1")
        sp.add_argument("--j", type=int, default=1, help="GKVW variable j")
        sp.add_argument("--k", type=int, default=2, help="GKVW variable k")
        sp.add_argument("--points", default="random:12:0.6:0", help="MODE:COUNT:RADIUS:SEED")
        sp.add_argument("--tol-psd", type=float, default=1e-6)
        sp.add_argument("--tol-exact", type=float, default=1e-9)
        sp.add_argument("--tol-identity", type=float, default=1e-5)
        sp.add_argument("--tol-moment", type=float, default=1e-12)
        sp.add_argument("--no-cache", action="store_true", help="bypass the moment cache")
        sp.add_argument("--cache-dir", type=Path, help="moment cache directory")
        sp.add_argument("--csv-kernels", type=Path, help="directory for sampled kernel CSVs")
    return parser


def config_from_args(args) -> RunConfig:
    return RunConfig(
        command=args.command, input=args.input, output=args.output, M=args.M,
        ladder=tuple(args.N) if args.N else DEFAULT_LADDER,
        S=frozenset(args.S) if args.S else None, j=args.j, k=args.k,
        points=PointSpec.parse(args.points), tol_psd=args.tol_psd, tol_exact=args.tol_exact,
        tol_identity=args.tol_identity, tol_moment=args.tol_moment,
        use_cache=not args.no_cache, cache_dir=args.cache_dir, csv_kernels=args.csv_kernels)


def load_polynomial(path: Path) -> StablePolynomial:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from None
    try:
        return StablePolynomial.from_json_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: invalid polynomial: {exc}") from None


# -- output ----------------------------------------------------------------


def write_text_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt_point(z) -> str:
    return ";".join(f"{c.real:.17g}{c.imag:+.17g}j" for c in np.asarray(z, dtype=complex))


def dump_kernel_csv(path: Path, K: Kernel, pts: PointSet) -> None:
    """``i,j,z_i,z_j,re,im`` rows for the sampled matrix, 17 significant digits."""
    M = K.matrix(pts.points)
    labels = [_fmt_point(z) for z in pts.points]
    rows = [["i", "j", "z_i", "z_j", "re", "im"]]
    for i in range(M.shape[0]):
        for j in range(M.shape[1]):
            rows.append([i, j, labels[i], labels[j], f"{M[i, j].real:.17g}", f"{M[i, j].imag:.17g}"])
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    write_text_atomic(path, buf.getvalue())


def _safe_name(handle: str) -> str:
    handle = handle.replace("{", "").replace("}", "").replace(",", "")
    return re.sub(r"[^A-Za-z0-9_.=-]+", "_", handle).strip("_")


def dump_kernels(directory: Path, kernels: dict, pts: PointSet) -> list[str]:
    directory = Path(directory)
    written = []
    for handle, K in kernels.items():
        path = directory / f"{_safe_name(handle)}.csv"
        dump_kernel_csv(path, K, pts)
        written.append(str(path))
    return written


def emit(report: dict, output: Path | None) -> None:
    text = json.dumps(report, indent=1) + "\n"
    if output is None:
        sys.stdout.write(text)
    else:
        write_text_atomic(output, text)


# -- subcommands -----------------------------------------------------------


def _base_report(cfg: RunConfig, p: StablePolynomial) -> dict:
    return {"command": cfg.command, "convention": CONVENTION,
            "polynomial": p.to_json_dict(), "config": cfg.to_json_dict()}


def _require_stable(p: StablePolynomial, report: dict):
    verdict = check_stability(p)
    report["stability"] = verdict.to_json_dict()
    if not verdict.stable:
        raise UnstablePolynomialError("polynomial is not stable on the closed polydisk", verdict)
    return verdict


def _subset(cfg: RunConfig, d: int) -> frozenset:
    S = cfg.S if cfg.S is not None else frozenset({1})
    if not S or not all(1 <= s <= d for s in S) or len(S) >= d:
        raise InputError(f"--S must be a nonempty proper subset of 1..{d}, got {sorted(S)}")
    return S


def cmd_stability(cfg: RunConfig, p: StablePolynomial, report: dict) -> int:
    verdict = _require_stable(p, report)
    report["pass"] = verdict.stable
    return EXIT_OK


def cmd_moments(cfg: RunConfig, p: StablePolynomial, report: dict) -> int:
    _require_stable(p, report)
    R = (cfg.ladder[-1] - 1,) * p.d
    table = compute_moments(p, R, cfg.M, cache=cfg.cache)
    ok = table.aliasing_error_estimate <= cfg.tol_moment
    report["moments"] = table.to_json_dict()
    report["checks"] = [CheckRecord("moment_aliasing", "moments of |p|^-2 dsigma (M vs 2M)", "C",
                                    0, None, table.aliasing_error_estimate, cfg.tol_moment,
                                    ok).to_json_dict()]
    report["pass"] = ok
    return EXIT_OK if ok else EXIT_FAIL


def _ladder_ok(values, drop=10.0, floor=1e-12) -> bool:
    return all(b <= floor or a >= drop * b for a, b in zip(values, values[1:]))


def cmd_decompose(cfg: RunConfig, p: StablePolynomial, report: dict) -> int:
    _require_stable(p, report)
    d = p.d
    S = _subset(cfg, d)
    T = complement(S, d)
    pts = cfg.points.build(d)
    fac = KernelFactory.build(p, cfg.ladder[-1], M=cfg.M, cache=cfg.cache)
    rows = []
    res = None
    for N in cfg.ladder:
        res = decompose(DecompositionSpec(p, S, N), fac, pts)
        rows.append({"N": N, "max_residual": res.max_residual})
    resids = [r["max_residual"] for r in rows]
    ok = resids[-1] <= cfg.tol_identity and _ladder_ok(resids)
    report["M"] = fac.table.M
    report["points"] = pts.to_json_dict()
    report["residuals"] = rows
    report["checks"] = [CheckRecord(f"pick_identity[S={_fmt(S)}]", "P = K_S + L_T",
                                    f"P-K_{_fmt(S)}-L_{_fmt(T)}", len(pts), None, resids[-1],
                                    cfg.tol_identity, ok,
                                    {"ladder": list(cfg.ladder), "residuals": resids}
                                    ).to_json_dict()]
    report["pass"] = ok
    if cfg.csv_kernels is not None:
        top = cfg.ladder[-1]
        kernels = {"P": res.P, f"K_{_fmt(S)}_N{top}": res.K_S, f"L_{_fmt(S)}_N{top}": res.L_S,
                   f"K_{_fmt(T)}_N{top}": res.K_T, f"L_{_fmt(T)}_N{top}": res.L_T,
                   f"residual_N{top}": res.residual_kernel()}
        report["csv_kernels"] = dump_kernels(cfg.csv_kernels, kernels, pts)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_certify(cfg: RunConfig, p: StablePolynomial, report: dict) -> int:
    _require_stable(p, report)
    suite = SuiteConfig(M=cfg.M, ladder=cfg.ladder, count=cfg.points.count,
                        radius=cfg.points.radius, seed=cfg.points.seed,
                        tol_exact=cfg.tol_exact, tol_limit=cfg.tol_psd,
                        tol_identity=cfg.tol_identity, tol_moment=cfg.tol_moment,
                        gkvw=(cfg.j, cfg.k),
                        partitions=None if cfg.S is None else (_subset(cfg, p.d),))
    if cfg.points.mode != "random":
        raise InputError("certify samples the structured 'random' point mode only")
    result = run_suite(p, None, suite, cfg.cache)
    report.update(result.to_json_dict())
    report["failures"] = [c.id for c in result.failures()]
    if cfg.csv_kernels is not None:
        d = p.d
        S = _subset(cfg, d)
        top = cfg.ladder[-1]
        fac = KernelFactory.build(p, top, M=cfg.M, cache=cfg.cache)
        pts = cfg.points.build(d)
        pair = gkvw_pair(p, None, cfg.j, cfg.k, top, factory=fac)
        kernels = {f"K_{_fmt(S)}_N{top}": fac.K(S, top), f"L_{_fmt(S)}_N{top}": fac.L(S, top),
                   "gkvw_1": pair.first, "gkvw_2": pair.second}
        report["csv_kernels"] = dump_kernels(cfg.csv_kernels, kernels, pts)
    return EXIT_OK if result.passed else EXIT_FAIL


def cmd_sweep(cfg: RunConfig, p: StablePolynomial, report: dict) -> int:
    _require_stable(p, report)
    S = _subset(cfg, p.d)
    pts = cfg.points.build(p.d)
    fac = KernelFactory.build(p, cfg.ladder[-1], M=cfg.M, cache=cfg.cache)
    rows = truncation_sweep(p, S, cfg.ladder, pts, factory=fac)
    report["M"] = fac.table.M
    report["points"] = pts.to_json_dict()
    report["rows"] = [r.to_json_dict() for r in rows]
    worst = rows[-1].min_contractivity_eig
    ok = worst >= -cfg.tol_psd
    report["checks"] = [CheckRecord(f"contractive[S={_fmt(S)}]",
                                    "(1 - z_j conj w_j) K_S, L_S >= 0 for j in S",
                                    f"(1-zjwj*)K,L_{_fmt(S)}", len(pts), worst, None,
                                    cfg.tol_psd, ok).to_json_dict()]
    report["pass"] = ok
    if cfg.csv_kernels is not None:
        top = cfg.ladder[-1]
        kernels = {f"shift{j}_K_{_fmt(S)}_N{top}": ShiftFactor(j, fac.K(S, top)) for j in sorted(S)}
        report["csv_kernels"] = dump_kernels(cfg.csv_kernels, kernels, pts)
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"stability": cmd_stability, "moments": cmd_moments, "decompose": cmd_decompose,
            "certify": cmd_certify, "sweep": cmd_sweep}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    report: dict | None = None
    output = args.output
    try:
        cfg = config_from_args(args)
        p = load_polynomial(cfg.input)
        report = _base_report(cfg, p)
        code = COMMANDS[cfg.command](cfg, p, report)
    except UnstablePolynomialError as exc:
        report = report or {"command": args.command, "convention": CONVENTION}
        report["pass"] = False
        report["error"] = str(exc)
        if exc.verdict is not None:
            report["stability"] = exc.verdict.to_json_dict()
        emit(report, output)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    emit(report, output)
    return code


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
