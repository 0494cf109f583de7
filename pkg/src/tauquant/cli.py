"""
Command-line front end.

Every command reads its options from flags and, optionally, a JSON config
whose keys mirror the long flag names (``--symbol-im`` becomes
``symbol_im``); flags win over the config.  All inputs are validated before
any computation.  Exit codes: 0 success, 2 validation error, 3 numerical
failure.  Errors are reported on stderr as one line
``tauquant-error code=<CODE> message=<json string>``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import calculus, estimates, heisenberg
from . import symexpr as se
from .discretize import Grid, read_grid_function, write_grid_function
from .quantize import ComplexSymbol, OperatorMatrix, apply, op_amplitude, op_symbol
from .tau import NewtonError, check_admissible, from_spec

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


class ValidationError(ValueError):
    pass


@dataclass
class JobConfig:
    """Resolved options of one command invocation."""

    command: str
    options: dict = field(default_factory=dict)

    def get(self, key, default=None):
        v = self.options.get(key)
        return default if v is None else v

    def require(self, key):
        v = self.options.get(key)
        if v is None:
            raise ValidationError(f"missing required option --{key.replace('_', '-')}")
        return v


# ---------------------------------------------------------------------------
# Parsing helpers


def parse_grid(text) -> Grid:
    if isinstance(text, (list, tuple)):
        parts = [str(p) for p in text]
    else:
        parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != 3:
        raise ValidationError(f"grid must be n,N,L, got {text!r}")
    try:
        n, N = int(parts[0]), int(parts[1])
        L = se.evaluate(se.parse(parts[2]), {})
        return Grid(n, N, float(L))
    except (ValueError, se.ParseError, se.EvalError) as exc:
        raise ValidationError(f"bad grid {text!r}: {exc}") from None


def parse_symbol(re_text, im_text, n: int, allowed: str) -> ComplexSymbol:
    try:
        sym = ComplexSymbol.parse(str(re_text), str(im_text if im_text is not None else "0"), n)
    except se.ParseError as exc:
        raise ValidationError(f"cannot parse expression: {exc}") from None
    names = {"symbol": lambda: _names(n, "xk"), "amplitude": lambda: _names(n, "xyk")}[allowed]()
    extra = sorted(sym.free_vars() - names)
    if extra:
        raise ValidationError(f"unexpected variables {extra} in {allowed}")
    return sym


def _names(n: int, prefixes: str) -> set:
    out = set()
    for p in prefixes:
        out.update(se.axis_names(p, n))
    return out


def parse_tau(text, n: int):
    try:
        tau = from_spec(str(text), n)
    except (ValueError, se.ParseError) as exc:
        raise ValidationError(f"bad tau {text!r}: {exc}") from None
    return tau


def _int(cfg: JobConfig, key, default=None, minimum=None) -> int:
    v = cfg.get(key, default)
    if v is None:
        raise ValidationError(f"missing required option --{key.replace('_', '-')}")
    try:
        iv = int(v)
    except (TypeError, ValueError):
        raise ValidationError(f"--{key} must be an integer") from None
    if minimum is not None and iv < minimum:
        raise ValidationError(f"--{key} must be at least {minimum}")
    return iv


def _float(cfg: JobConfig, key, default=None) -> float:
    v = cfg.get(key, default)
    if v is None:
        raise ValidationError(f"missing required option --{key.replace('_', '-')}")
    try:
        return float(se.evaluate(se.parse(str(v)), {}))
    except (se.ParseError, se.EvalError) as exc:
        raise ValidationError(f"--{key}: {exc}") from None


def _existing(path) -> str:
    if path is None or not os.path.isfile(path):
        raise ValidationError(f"file not found: {path}")
    return path


def _writable(path) -> str | None:
    if path is None:
        return None
    d = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(d):
        raise ValidationError(f"output directory does not exist: {d}")
    return path


def _dim(cfg: JobConfig) -> tuple[Grid | None, int]:
    grid = parse_grid(cfg.get("grid")) if cfg.get("grid") is not None else None
    n = grid.n if grid is not None else _int(cfg, "dim", 1, minimum=1)
    if grid is not None and cfg.get("dim") is not None and int(cfg.get("dim")) != grid.n:
        raise ValidationError("--dim disagrees with the grid dimension")
    return grid, n


def _need_grid(grid):
    if grid is None:
        raise ValidationError("missing required option --grid")
    return grid


def _symbol(cfg: JobConfig, n: int, key: str = "symbol") -> ComplexSymbol:
    return parse_symbol(cfg.require(key), cfg.get(f"{key}_im", "0"), n, "symbol")


def _write_json(path, payload) -> None:
    if path is None:
        return
    with open(path, "w") as fh:
        json.dump(_clean(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _summary(line: str, report: str | None) -> None:
    print(line if report is None else f"{line} (report: {report})")


def _symbol_json(sym: ComplexSymbol) -> dict:
    re, im = sym.brief_text()
    out = {"re": re, "im": im}
    if re.startswith("<") or im.startswith("<"):
        out["re_dag"] = se.serialize(sym.re)
        out["im_dag"] = se.serialize(sym.im)
    return out


def _tau_name(tau) -> str:
    return tau.name if tau.name != "custom" else tau.text()


# ---------------------------------------------------------------------------
# Commands. Each returns a zero-argument callable after validating.


def cmd_quantize(cfg: JobConfig):
    grid, n = _dim(cfg)
    grid = _need_grid(grid)
    sigma = _symbol(cfg, n)
    tau = parse_tau(cfg.get("tau", "kn"), n)
    out, workers = _writable(cfg.require("out")), cfg.get("workers")

    def run():
        A = op_symbol(sigma, tau, grid, workers)
        A.write_csv(out)
        _summary(f"quantize: wrote {grid.size}x{grid.size} matrix to {out}", None)
    return run


def cmd_amplitude(cfg: JobConfig):
    grid, n = _dim(cfg)
    grid = _need_grid(grid)
    a = parse_symbol(cfg.require("amplitude"), cfg.get("amplitude_im", "0"), n, "amplitude")
    out, workers = _writable(cfg.require("out")), cfg.get("workers")

    def run():
        A = op_amplitude(a, grid, workers)
        A.write_csv(out)
        _summary(f"amplitude: wrote {grid.size}x{grid.size} matrix to {out}", None)
    return run


def _operator_source(cfg: JobConfig):
    """Matrix from --matrix, or assembled from --symbol/--tau on --grid."""
    if cfg.get("matrix") is not None:
        path = _existing(cfg.get("matrix"))
        return lambda: OperatorMatrix.read_csv(path)
    grid, n = _dim(cfg)
    grid = _need_grid(grid)
    sigma = _symbol(cfg, n)
    tau = parse_tau(cfg.get("tau", "kn"), n)
    return lambda: op_symbol(sigma, tau, grid, cfg.get("workers"))


def cmd_apply(cfg: JobConfig):
    src = _operator_source(cfg)
    inp = _existing(cfg.require("input"))
    out = _writable(cfg.require("out"))

    def run():
        A = src()
        try:
            u = read_grid_function(inp, A.grid)
        except ValueError as exc:
            raise ValidationError(str(exc)) from None
        write_grid_function(out, apply(A, u))
        _summary(f"apply: wrote {A.grid.size} values to {out}", None)
    return run


def _cmd_dual(cfg: JobConfig, kind: str):
    grid, n = _dim(cfg)
    sigma = _symbol(cfg, n)
    tau = parse_tau(cfg.get("tau", "kn"), n)
    out, report = _writable(cfg.get("out")), _writable(cfg.get("report"))
    if out is not None:
        _need_grid(grid)

    def run():
        s2, t2 = calculus.dual_quantization(sigma, tau, kind)
        payload = {"kind": kind, "symbol": _symbol_json(s2), "tau": _tau_name(t2)}
        if grid is not None:
            B = op_symbol(s2, t2, grid, cfg.get("workers"))
            A = op_symbol(sigma, tau, grid, cfg.get("workers")).matrix
            ref = A.conj().T if kind == "adjoint" else A.T
            payload["defect"] = estimates.operator_defect(B.matrix, ref)
            if out is not None:
                B.write_csv(out)
        _write_json(report, payload)
        re, im = s2.brief_text()
        _summary(f"{kind}: symbol ({re}) + i*({im}) with tau {_tau_name(t2)}", report)
    return run


def cmd_adjoint(cfg):
    return _cmd_dual(cfg, "adjoint")


def cmd_transpose(cfg):
    return _cmd_dual(cfg, "transpose")


def _expansion_defect(result, reference: np.ndarray, grid: Grid, workers) -> dict:
    form = "symbol" if result.exact else "pre_ibp"
    B = result.operator(grid, form, workers).matrix
    return {"defect": estimates.probe_defect(reference, B, grid),
            "operator_defect": estimates.operator_defect(reference, B),
            "assembled_form": form}


def cmd_convert(cfg: JobConfig):
    grid, n = _dim(cfg)
    sigma = _symbol(cfg, n)
    t1 = parse_tau(cfg.require("from"), n)
    t2 = parse_tau(cfg.require("to"), n)
    M = _int(cfg, "order", 2, minimum=1)
    N = _int(cfg, "taylor", 1, minimum=1)
    m = cfg.get("m")
    m = None if m is None else _float(cfg, "m")
    report, out = _writable(cfg.get("report")), _writable(cfg.get("out"))

    def run():
        res = calculus.convert_quantization(sigma, t1, t2, M, N, m)
        payload = res.to_json()
        if res.exact:
            payload["symbol"] = _symbol_json(res.symbol())
        line = f"convert: {len(res.terms)} terms"
        if grid is not None:
            ref = op_symbol(sigma, t1, grid, cfg.get("workers")).matrix
            payload.update(_expansion_defect(res, ref, grid, cfg.get("workers")))
            line += f", defect {payload['defect']:.3e}"
            if out is not None:
                res.operator(grid, payload["assembled_form"]).write_csv(out)
        _write_json(report, payload)
        _summary(line, report)
    return run


def cmd_compose(cfg: JobConfig):
    grid, n = _dim(cfg)
    s1 = _symbol(cfg, n)
    s2 = _symbol(cfg, n, "symbol2")
    t1 = parse_tau(cfg.get("tau", "kn"), n)
    t2 = parse_tau(cfg.get("tau2", "kn"), n)
    t3 = parse_tau(cfg.get("tau3", "kn"), n)
    M = _int(cfg, "order", 2, minimum=1)
    N = _int(cfg, "taylor", 1, minimum=1)
    report, out = _writable(cfg.get("report")), _writable(cfg.get("out"))

    def run():
        res = calculus.compose_expansion(s1, t1, s2, t2, t3, M, N)
        payload = res.to_json()
        if res.exact:
            payload["symbol"] = _symbol_json(res.symbol())
        line = f"compose: {len(res.terms)} terms"
        if grid is not None:
            w = cfg.get("workers")
            ref = op_symbol(s1, t1, grid, w).matrix @ op_symbol(s2, t2, grid, w).matrix
            payload.update(_expansion_defect(res, ref, grid, w))
            line += f", defect {payload['defect']:.3e}"
            if out is not None:
                res.operator(grid, payload["assembled_form"]).write_csv(out)
        _write_json(report, payload)
        _summary(line, report)
    return run


def cmd_parametrix(cfg: JobConfig):
    grid, n = _dim(cfg)
    sigma = _symbol(cfg, n)
    tau = parse_tau(cfg.get("tau", "kn"), n)
    m = _float(cfg, "m")
    M = _int(cfg, "order", 1, minimum=1)
    R0 = _float(cfg, "R0", 0.0)
    if R0 < 0:
        raise ValidationError("--R0 must be non-negative")
    report, out = _writable(cfg.get("report")), _writable(cfg.get("out"))

    def run():
        kappa = calculus.parametrix(sigma, tau, m, M, R0)
        payload = {"kappa": _symbol_json(kappa), "tau": _tau_name(tau), "M": M, "m": m, "R0": R0}
        line = f"parametrix: kappa with {kappa.node_count()} nodes"
        if grid is not None:
            w = cfg.get("workers")
            K = op_symbol(kappa, tau, grid, w)
            A = op_symbol(sigma, tau, grid, w).matrix
            res = calculus.parametrix_residual(K.matrix @ A, grid, R0)
            payload["residual"] = res
            line += f", band residual {res:.3e}"
            if out is not None:
                K.write_csv(out)
        _write_json(report, payload)
        _summary(line, report)
    return run


def cmd_norm(cfg: JobConfig):
    src = _operator_source(cfg)
    method = cfg.get("method", "power-iteration")
    if method not in ("power-iteration", "full-decomposition"):
        raise ValidationError(f"unknown method {method!r}")
    seed = _int(cfg, "seed", 0)
    report = _writable(cfg.get("report"))

    def run():
        rep = estimates.operator_norm(src(), method, seed=seed)
        _write_json(report, rep.to_json())
        _summary(f"norm: {rep.norm:.12g} ({method}, {rep.iterations} iterations)", report)
    return run


def _box(cfg: JobConfig, default):
    v = cfg.get("box")
    if v is None:
        return default
    parts = v if isinstance(v, (list, tuple)) else str(v).split(",")
    try:
        vals = [float(se.evaluate(se.parse(str(p)), {})) for p in parts]
    except (se.ParseError, se.EvalError) as exc:
        raise ValidationError(f"bad --box: {exc}") from None
    if len(vals) != len(default) or any(b <= 0 for b in vals):
        raise ValidationError(f"--box needs {len(default)} positive half-widths")
    return tuple(vals)


def cmd_cv_bound(cfg: JobConfig):
    _, n = _dim(cfg)
    box = _box(cfg, (math.pi, math.pi, 8.0))
    samples = _int(cfg, "samples", 4096, minimum=16)
    seed = _int(cfg, "seed", 0)
    report = _writable(cfg.get("report"))
    if cfg.get("amplitude") is not None:
        a = parse_symbol(cfg.get("amplitude"), cfg.get("amplitude_im", "0"), n, "amplitude")
        kwargs = {"a": a}
    else:
        kwargs = {"sigma": _symbol(cfg, n), "tau": parse_tau(cfg.get("tau", "kn"), n)}

    def run():
        rep = estimates.cv_bound(n=n, box=box, samples=samples, seed=seed, **kwargs)
        _write_json(report, rep.to_json())
        _summary(f"cv-bound: M_val {rep.M_val:.12g} over {rep.samples} points", report)
    return run


def cmd_garding(cfg: JobConfig):
    grid, n = _dim(cfg)
    grid = _need_grid(grid)
    sigma = _symbol(cfg, n)
    tau = parse_tau(cfg.get("tau", "weyl"), n)
    m = _float(cfg, "m")
    s = _float(cfg, "s", 0.0)
    if not s < m:
        raise ValidationError("--s must be smaller than --m")
    report = _writable(cfg.get("report"))

    def run():
        rep = estimates.garding_check(sigma, tau, m, s, grid)
        _write_json(report, rep.to_json())
        _summary(f"garding: C1 {rep.C1:.6g}, C2 {rep.C2:.6g}, verified {rep.verified}", report)
    return run


def cmd_check_tau(cfg: JobConfig):
    _, n = _dim(cfg)
    tau = parse_tau(cfg.require("tau"), n)
    box = _float(cfg, "box", 5.0)
    samples = _int(cfg, "samples", 2000, minimum=16)
    seed = _int(cfg, "seed", 0)
    report = _writable(cfg.get("report"))

    def run():
        rep = check_admissible(tau, box, samples, seed)
        _write_json(report, {"admissibility": rep.__dict__})
        _summary(f"check-tau: mu_hat {rep.mu_hat:.3g}, bounded {rep.bounded_derivatives}, "
                 f"hadamard {rep.hadamard_ok}", report)
    return run


def cmd_reduce_amplitude(cfg: JobConfig):
    grid, n = _dim(cfg)
    a = parse_symbol(cfg.require("amplitude"), cfg.get("amplitude_im", "0"), n, "amplitude")
    Nred = _int(cfg, "nred", 1, minimum=1)
    report = _writable(cfg.get("report"))

    def run():
        b = calculus.reduce_amplitude(a, Nred, n)
        payload = {"amplitude": _symbol_json(b), "nred": Nred}
        line = f"reduce-amplitude: {b.node_count()} nodes"
        if grid is not None:
            w = cfg.get("workers")
            d = estimates.operator_defect(op_amplitude(a, grid, w), op_amplitude(b, grid, w))
            payload["defect"] = d
            line += f", defect {d:.3e}"
        _write_json(report, payload)
        _summary(line, report)
    return run


def cmd_changevar(cfg: JobConfig):
    grid, n = _dim(cfg)
    grid = _need_grid(grid)
    sigma = _symbol(cfg, n)
    tau = parse_tau(cfg.require("tau"), n)
    report = _writable(cfg.get("report"))

    def run():
        b0, rep = calculus.changevar_leading(sigma, tau, grid)
        _write_json(report, rep)
        _summary(f"changevar: b0 = {rep['leading_symbol_re']}, mismatch "
                 f"{rep['relative_mismatch']:.3e}", report)
    return run


def cmd_heisenberg(cfg: JobConfig):
    action = cfg.require("action")
    variant = cfg.get("group", "standard")
    if variant not in heisenberg.VARIANTS:
        raise ValidationError(f"unknown group variant {variant!r}")
    try:
        p = heisenberg.parse_point(str(cfg.require("point")), variant)
        q = heisenberg.parse_point(str(cfg.get("point2")), variant) if cfg.get("point2") else None
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"bad point: {exc}") from None
    if action == "midpoint" and q is None:
        raise ValidationError("midpoint needs --point2")
    report = _writable(cfg.get("report"))

    def run():
        fmt = heisenberg.format_fraction
        if action == "tau":
            r = heisenberg.symmetry_tau(p)
            payload = {"tau": [fmt(v) for v in r.coords],
                       "closed": [fmt(v) for v in heisenberg.symmetry_tau_closed(p).coords]}
            print(str(r))
        elif action == "midpoint":
            payload = heisenberg.midpoint_report(p, q)
            print(", ".join(payload["group"]))
        else:
            ok = heisenberg.check_symmetry(p)
            payload = {"symmetric": ok}
            print("true" if ok else "false")
        payload["variant"] = variant
        _write_json(report, payload)
    return run


COMMANDS = {
    "quantize": cmd_quantize,
    "amplitude": cmd_amplitude,
    "apply": cmd_apply,
    "adjoint": cmd_adjoint,
    "transpose": cmd_transpose,
    "compose": cmd_compose,
    "convert": cmd_convert,
    "parametrix": cmd_parametrix,
    "norm": cmd_norm,
    "cv-bound": cmd_cv_bound,
    "garding": cmd_garding,
    "check-tau": cmd_check_tau,
    "reduce-amplitude": cmd_reduce_amplitude,
    "changevar": cmd_changevar,
    "heisenberg": cmd_heisenberg,
}

_FLAGS = {
    "quantize": ["symbol", "symbol-im", "tau", "grid", "out", "workers"],
    "amplitude": ["amplitude", "amplitude-im", "grid", "out", "workers"],
    "apply": ["matrix", "symbol", "symbol-im", "tau", "grid", "input", "out", "workers"],
    "adjoint": ["symbol", "symbol-im", "tau", "grid", "dim", "out", "report", "workers"],
    "transpose": ["symbol", "symbol-im", "tau", "grid", "dim", "out", "report", "workers"],
    "compose": ["symbol", "symbol-im", "tau", "symbol2", "symbol2-im", "tau2", "tau3", "order",
                "taylor", "grid", "dim", "out", "report", "workers"],
    "convert": ["symbol", "symbol-im", "from", "to", "order", "taylor", "m", "grid", "dim", "out",
                "report", "workers"],
    "parametrix": ["symbol", "symbol-im", "tau", "m", "order", "R0", "grid", "dim", "out", "report",
                   "workers"],
    "norm": ["matrix", "symbol", "symbol-im", "tau", "grid", "method", "seed", "report", "workers"],
    "cv-bound": ["amplitude", "amplitude-im", "symbol", "symbol-im", "tau", "dim", "grid", "box",
                 "samples", "seed", "report"],
    "garding": ["symbol", "symbol-im", "tau", "m", "s", "grid", "report", "workers"],
    "check-tau": ["tau", "dim", "box", "samples", "seed", "report"],
    "reduce-amplitude": ["amplitude", "amplitude-im", "nred", "grid", "dim", "report", "workers"],
    "changevar": ["symbol", "symbol-im", "tau", "grid", "report"],
    "heisenberg": ["group", "point", "point2", "report"],
}


class _Parser(argparse.ArgumentParser):
    """Argument parser that raises instead of printing usage and exiting."""

    def error(self, message):
        raise ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tauquant", description="tau-quantized operators on grids")
    parser.add_argument("--version", action="version", version=f"tauquant {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, flags in _FLAGS.items():
        p = sub.add_parser(name)
        if name == "heisenberg":
            p.add_argument("action", choices=["tau", "midpoint", "symcheck"])
        p.add_argument("--config", default=None, help="JSON file with default options")
        for flag in flags:
            kwargs = {"default": None}
            if flag == "workers":
                kwargs["type"] = int
            p.add_argument(f"--{flag}", dest=flag.replace("-", "_"), **kwargs)
    return parser


def resolve(argv) -> JobConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    opts = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    if ns.config is not None:
        try:
            with open(_existing(ns.config)) as fh:
                conf = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config is not valid JSON: {exc}") from None
        if not isinstance(conf, dict):
            raise ValidationError("config must be a JSON object")
        known = {f.replace("-", "_") for f in _FLAGS[ns.command]} | {"action"}
        unknown = sorted(set(k.replace("-", "_") for k in conf) - known)
        if unknown:
            raise ValidationError(f"unknown config keys {unknown}")
        for k, v in conf.items():
            k = k.replace("-", "_")
            if opts.get(k) is None:
                opts[k] = v
    return JobConfig(ns.command, opts)


def _fail(code: str, message: str, status: int) -> int:
    print(f"tauquant-error code={code} message={json.dumps(message)}", file=sys.stderr)
    return status


def _attach_values(argv: list[str]) -> list[str]:
    """Write ``--flag value`` as ``--flag=value`` so values such as
    ``-1,-2,-5`` are not mistaken for options."""
    flags = {f"--{f}" for fl in _FLAGS.values() for f in fl} | {"--config"}
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in flags and i + 1 < len(argv) and argv[i + 1].startswith("-") \
                and argv[i + 1] not in flags:
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def run(argv=None) -> int:
    """Run one command; returns the exit code."""
    argv = _attach_values(sys.argv[1:] if argv is None else list(argv))
    try:
        cfg = resolve(argv)
        job = COMMANDS[cfg.command](cfg)
    except ValidationError as exc:
        return _fail("VALIDATION", str(exc), EXIT_VALIDATION)
    except (calculus.EllipticityError, calculus.PreconditionError) as exc:
        return _fail("PRECONDITION", str(exc), EXIT_VALIDATION)
    except (ValueError, TypeError) as exc:
        return _fail("VALIDATION", str(exc), EXIT_VALIDATION)
    try:
        job()
    except ValidationError as exc:
        return _fail("VALIDATION", str(exc), EXIT_VALIDATION)
    except (calculus.EllipticityError, calculus.PreconditionError) as exc:
        return _fail("PRECONDITION", str(exc), EXIT_VALIDATION)
    except NewtonError as exc:
        return _fail("NEWTON", str(exc), EXIT_NUMERICAL)
    except estimates.NonConvergenceError as exc:
        return _fail("NONCONVERGENCE", str(exc), EXIT_NUMERICAL)
    except np.linalg.LinAlgError as exc:
        return _fail("EIGEN", str(exc), EXIT_NUMERICAL)
    except se.ExpressionGrowthError as exc:
        return _fail("GROWTH", str(exc), EXIT_NUMERICAL)
    except (se.EvalError, FloatingPointError) as exc:
        return _fail("DOMAIN", str(exc), EXIT_NUMERICAL)
    except (ValueError, TypeError) as exc:
        return _fail("VALIDATION", str(exc), EXIT_VALIDATION)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
