"""Command line front end: ``dropmor reduce | sweep | verify``.

Exit codes: 0 success, 1 verification failure, 2 usage, IO or pipeline error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import benchmarks
from .analysis import sweep_error, verify_hermite, verify_interpolation
from .drop import drop_reduce
from .io import ManifestError, MatrixFileError, load_system, save_system
from .projection import projection_pair
from .sampling import PinnedRNG, SampleSet, log_freq_grid, make_samples
from .system import StructuredSystem


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    bench: str | None = None
    size: int | None = None
    manifest: str | None = None
    nfreq: int | None = None
    fmin: float | None = None
    fmax: float | None = None
    nparam: int | None = None
    pbox: list | None = None
    pairing: str = "zip"
    seed: int = 0
    order: int | None = None
    tol: float | None = None
    one_sided: bool = False
    tangential: bool = False
    realify: bool | None = None
    orthonormalize: bool = False
    out: str = "out"
    nsweep: int = 100
    nsweep_param: int = 20
    interp_tol: float = 1e-8
    hermite_tol: float = 1e-5

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        if "config" in doc and isinstance(doc["config"], dict):
            doc = doc["config"]  # a run.json echo
        names = {f.name for f in fields(cls)}
        unknown = set(doc) - names
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**doc)

    def to_dict(self) -> dict:
        return asdict(self)

    # -------------------------------------------------------------- resolution

    def system(self) -> StructuredSystem:
        if (self.bench is None) == (self.manifest is None):
            raise UsageError("give exactly one of --bench or --manifest")
        if self.manifest is not None:
            return load_system(self.manifest)
        if self.bench not in benchmarks.DEFAULTS:
            raise UsageError(f"unknown benchmark {self.bench!r}; "
                             f"choose from {', '.join(benchmarks.DEFAULTS)}")
        spec = benchmarks.DEFAULTS[self.bench]
        size = dict(spec.size)
        if self.size is not None:
            if not size:
                raise UsageError(f"benchmark {self.bench!r} has no size parameter")
            size = {next(iter(size)): self.size}
        return benchmarks.BUILDERS[self.bench](**size, **spec.constants)

    def samples(self, sys: StructuredSystem) -> SampleSet:
        spec = benchmarks.DEFAULTS.get(self.bench) if self.bench else None
        fmin = self.fmin if self.fmin is not None else sys.freq_range[0]
        fmax = self.fmax if self.fmax is not None else sys.freq_range[1]
        nfreq = self.nfreq or (spec.nfreq if spec else 20)
        box = self.pbox if self.pbox is not None else [list(b) for b in sys.param_box]
        if len(box) != sys.d:
            raise UsageError(f"parameter box has {len(box)} intervals, system has d={sys.d}")
        nparam = self.nparam or (spec.nparam if spec and spec.nparam else nfreq)
        tangential = (sys.m, sys.p) if self.tangential else None
        try:
            return make_samples((fmin, fmax), nfreq, box, nparam if sys.d else None,
                                seed=self.seed, pairing=self.pairing, tangential=tangential)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc

    def sweep_grid(self, sys: StructuredSystem):
        fmin = self.fmin if self.fmin is not None else sys.freq_range[0]
        fmax = self.fmax if self.fmax is not None else sys.freq_range[1]
        freqs = log_freq_grid(fmin, fmax, self.nsweep)
        box = self.pbox if self.pbox is not None else [list(b) for b in sys.param_box]
        if sys.d == 0:
            return freqs, [()]
        if sys.d == 1:
            lo, hi = box[0]
            return freqs, [(float(x),) for x in np.linspace(lo, hi, self.nsweep_param)]
        u = PinnedRNG(self.seed + 1000).uniform(self.nsweep_param * sys.d)
        u = u.reshape(self.nsweep_param, sys.d)
        lo = np.array([b[0] for b in box])
        hi = np.array([b[1] for b in box])
        return freqs, [tuple(map(float, lo + row * (hi - lo))) for row in u]


# ------------------------------------------------------------------ output


def _fmt(x) -> str:
    x = float(x)
    return repr(x) if np.isfinite(x) else "nan"


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([r if isinstance(r, (int, np.integer)) else _fmt(r) for r in row])


def read_csv(path) -> dict[str, np.ndarray]:
    """Load a CSV written by this tool into named float columns."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return {h: np.array([float(r[k]) for r in body]) for k, h in enumerate(header)}


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# ------------------------------------------------------------------ commands


def cmd_reduce(cfg: RunConfig) -> int:
    sys_ = cfg.system()
    samples = cfg.samples(sys_)
    if cfg.order is not None and cfg.tol is not None:
        raise UsageError("give at most one of --order and --tol")
    tol = cfg.tol if cfg.order is None and cfg.tol is not None else None
    if cfg.order is None and tol is None:
        tol = 1e-8
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        pair = projection_pair(sys_, samples, realify_bases=cfg.realify,
                               orthonormal=cfg.orthonormalize, one_sided=cfg.one_sided)
        red = drop_reduce(sys_, pair, order=cfg.order, rel_tol=tol, one_sided=cfg.one_sided)
    rep = red.report
    save_system(red, out / "reduced")
    nl, nr = len(rep.sv_left), len(rep.sv_right)
    rows = [(i + 1, rep.sv_left[i] if i < nl else np.nan, rep.sv_right[i] if i < nr else np.nan)
            for i in range(max(nl, nr))]
    _write_csv(out / "svd.csv", ["index", "sv_left", "sv_right"], rows)
    _write_json(out / "run.json", dict(
        config=cfg.to_dict(),
        system=dict(name=sys_.name, n=sys_.n, m=sys_.m, p=sys_.p, d=sys_.d),
        chosen_r=rep.chosen_r,
        truncation_mode=rep.truncation_mode,
        orthonormalized=bool(pair.orthonormalized),
        realified=bool(pair.realified),
        complex_reduced=bool(np.iscomplexobj(red.Vp)),
        n_samples=len(samples),
        dropped_samples=list(pair.dropped),
        numerical_rank_at={f"{k:g}": list(v) for k, v in sorted(rep.numerical_rank_at.items())},
        warnings=sorted({str(w.message) for w in caught}),
    ))
    print(f"reduced {sys_.name} (n={sys_.n}) to r={rep.chosen_r}; wrote {out}")
    return 0


def _load_reduced(cfg: RunConfig, reduced: str | None):
    if reduced is None:
        raise UsageError("--reduced is required")
    sys_ = cfg.system()
    red = load_system(reduced)
    if (sys_.m, sys_.p, sys_.d) != (red.m, red.p, red.d):
        raise UsageError(f"system (m={sys_.m}, p={sys_.p}, d={sys_.d}) and reduction "
                         f"(m={red.m}, p={red.p}, d={red.d}) do not match")
    return sys_, red


def cmd_sweep(cfg: RunConfig, reduced: str | None) -> int:
    sys_, red = _load_reduced(cfg, reduced)
    freqs, params = cfg.sweep_grid(sys_)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = sweep_error(sys_, red, freqs, params)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "sweep.csv", ["omega", "param_index", "abs_err", "rel_err", "H_norm"],
               ((w, j, a, r, h) for w, j, h, a, r in rep.rows()))
    _write_json(out / "summary.json", rep.summary())
    print(f"max_abs={rep.max_abs:.3e} max_rel={rep.max_rel:.3e} l2_err={rep.l2_err:.3e}")
    return 0


def cmd_verify(cfg: RunConfig, reduced: str | None) -> int:
    sys_, red = _load_reduced(cfg, reduced)
    samples = cfg.samples(sys_)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        interp = verify_interpolation(sys_, red, samples, cfg.interp_tol)
        herm = verify_hermite(sys_, red, samples, cfg.hermite_tol)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = [(pt.index, pt.sigma.imag, a.residual, pt.residual)
            for a, pt in zip(interp.points, herm.points)]
    _write_csv(out / "verify.csv", ["index", "omega", "interp_residual", "hermite_residual"], rows)
    ok = interp.passed and herm.passed
    _write_json(out / "verify.json", dict(
        passed=ok, interp_tol=cfg.interp_tol, hermite_tol=cfg.hermite_tol,
        interp_failures=[pt.index for pt in interp.failures],
        hermite_failures=[pt.index for pt in herm.failures]))
    for rep in (interp, herm):
        for pt in rep.failures:
            print(f"{rep.kind} FAIL point {pt.index} s={pt.sigma} p={pt.param} "
                  f"residual={pt.residual:.3e} {pt.note}", file=sys.stderr)
    print(f"interpolation max residual {interp.residuals.max():.3e}, "
          f"hermite max residual {herm.residuals.max():.3e}: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


# ------------------------------------------------------------------ parsing


def _pbox(text: str) -> list:
    """``"-10:10,0:1"`` or a JSON list of pairs."""
    text = text.strip()
    if text.startswith("["):
        return [list(map(float, b)) for b in json.loads(text)]
    out = []
    for part in text.split(","):
        lo, hi = part.split(":")
        out.append([float(lo), float(hi)])
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config (flags override it)")
    src = common.add_mutually_exclusive_group()
    src.add_argument("--bench", choices=sorted(benchmarks.DEFAULTS))
    src.add_argument("--manifest")
    common.add_argument("--size", type=int, help="benchmark size (n for delay, grid for heat)")
    common.add_argument("--nfreq", type=int)
    common.add_argument("--fmin", type=float)
    common.add_argument("--fmax", type=float)
    common.add_argument("--nparam", type=int)
    common.add_argument("--pbox", type=_pbox, help='e.g. "-10:10" or "[[-10,10]]"')
    common.add_argument("--pairing", choices=["zip", "tensor"])
    common.add_argument("--seed", type=int)
    pol = common.add_mutually_exclusive_group()
    pol.add_argument("--order", type=int)
    pol.add_argument("--tol", type=float)
    common.add_argument("--one-sided", dest="one_sided", action="store_const", const=True)
    common.add_argument("--tangential", action="store_const", const=True)
    common.add_argument("--no-realify", dest="realify", action="store_const", const=False)
    common.add_argument("--orthonormalize", action="store_const", const=True)
    common.add_argument("--out")
    common.add_argument("--nsweep", type=int)
    common.add_argument("--nsweep-param", dest="nsweep_param", type=int)
    common.add_argument("--interp-tol", dest="interp_tol", type=float)
    common.add_argument("--hermite-tol", dest="hermite_tol", type=float)

    parser = argparse.ArgumentParser(prog="dropmor", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("reduce", parents=[common], help="sample, build bases, truncate, project")
    for name, text in (("sweep", "frequency-sweep error against a reduction"),
                       ("verify", "interpolation and Hermite checks of a reduction")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--reduced", help="reduced manifest (file or directory)")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    doc = {}
    if args.config:
        path = Path(args.config)
        try:
            doc = json.loads(path.read_text())
        except OSError as exc:
            raise UsageError(f"{path}: cannot read config: {exc.strerror or exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    cfg = RunConfig.from_dict(doc)
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            setattr(cfg, f.name, v)
    if args.bench is not None:
        cfg.manifest = None
    if args.manifest is not None:
        cfg.bench = None
    if args.order is not None:
        cfg.tol = None
    if args.tol is not None:
        cfg.order = None
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    try:
        cfg = config_from_args(args)
        if args.command == "reduce":
            return cmd_reduce(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.reduced)
        return cmd_verify(cfg, args.reduced)
    except (UsageError, ManifestError, MatrixFileError, OSError, ValueError,
            np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"dropmor: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
