"""Command-line front end: analyze, solve-linear, solve-nonlinear, verify.

Runs are described by an INI-style config (sections in brackets,
``key = value`` lines) and write CSV reports plus binary field files to
the output directory.  Exit codes encode the failing stage:

    0  requested checks all passed
    1  config could not be parsed or named unknown objects
    2  ellipticity requirement failed
    3  solve failed (divergence or no convergence)
    4  verification checks failed

Sampled quantities derive from the seed in ``[run]`` (override with
``--seed``) through the MT19937 generator, so reports are reproducible.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from pathlib import Path

import numpy as np

from . import catalog
from .ellipticity import NonEllipticError, ellipticity_constant
from .exprs import ExpressionError, compile_expression
from .fieldfile import read_field, write_field
from .grid import GridFunction, PeriodicGrid, gradient, norm_l2, random_band_limited
from .linear import (
    REPORT_COLUMNS,
    MultiplierPlan,
    RegularizerSequence,
    report_csv_row,
    solve_linear,
    solve_representation,
    verify_apriori,
)
from .nonlinear import DivergenceError, NonlinearOperator, campanato_solve, near_operator_check, verify_comparison
from .oracle import solve_dense
from .sampling import rng_from_seed
from .tensor import ConstantTensor

__all__ = ["main", "entry", "ConfigError"]


class ConfigError(ValueError):
    """A config file is missing, malformed, or names unknown objects."""


def _load_config(path) -> configparser.ConfigParser:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    cfg = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cfg.optionxform = str  # keys N and n are distinct
    try:
        cfg.read(p)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    return cfg


def _get(cfg, section, key, cast=str, default=...):
    if not cfg.has_option(section, key):
        if default is ...:
            raise ConfigError(f"missing [{section}] {key}")
        return default
    raw = cfg.get(section, key)
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for [{section}] {key}: {raw!r} ({exc})") from exc


def _float_list(raw: str):
    return [float(tok) for tok in raw.split(",") if tok.strip()]


def _int_list(raw: str):
    return [int(tok) for tok in raw.split(",") if tok.strip()]


def build_tensor(cfg) -> ConstantTensor:
    source = _get(cfg, "tensor", "source")
    if source.strip() == "inline":
        N = _get(cfg, "tensor", "N", int)
        n = _get(cfg, "tensor", "n", int)
        entries = _get(cfg, "tensor", "entries", _float_list)
        try:
            return ConstantTensor.from_flat(entries, N, n)
        except ValueError as exc:
            raise ConfigError(f"bad inline tensor: {exc}") from exc
    try:
        name, params = catalog.parse_catalog_ref(source)
        obj = catalog.get(name, params)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad tensor source {source!r}: {exc}") from exc
    if not isinstance(obj, ConstantTensor):
        raise ConfigError(f"[tensor] source {source!r} names an operator, not a tensor")
    return obj


def build_grid(cfg, n: int) -> PeriodicGrid:
    G = _get(cfg, "grid", "G", int)
    L = _get(cfg, "grid", "L", float, 1.0)
    try:
        return PeriodicGrid(n=n, G=G, L=L)
    except ValueError as exc:
        raise ConfigError(f"bad grid: {exc}") from exc


def build_rhs(cfg, grid: PeriodicGrid, N: int) -> GridFunction:
    kind = _get(cfg, "rhs", "kind")
    if kind == "mode":
        component = _get(cfg, "rhs", "component", int)
        freq = _get(cfg, "rhs", "frequency", _int_list)
        amplitude = _get(cfg, "rhs", "amplitude", float, 1.0)
        phase = _get(cfg, "rhs", "phase", float, 0.0)
        if not 1 <= component <= N:
            raise ConfigError(f"component must be in 1..{N}, got {component}")
        if len(freq) != grid.n:
            raise ConfigError(f"frequency needs {grid.n} integers, got {len(freq)}")
        x = grid.points()
        arg = 2.0 * np.pi * sum(k * x[j] for j, k in enumerate(freq)) / grid.L
        values = np.zeros((N,) + grid.shape)
        values[component - 1] = amplitude * np.sin(arg + phase)
        return GridFunction(grid, values)
    if kind == "expression":
        x = grid.points()
        env = {f"x{j + 1}": x[j] for j in range(grid.n)}
        values = np.zeros((N,) + grid.shape)
        for comp in range(N):
            key = f"f{comp + 1}"
            if cfg.has_option("rhs", key):
                try:
                    fn = compile_expression(cfg.get("rhs", key), env.keys())
                except ExpressionError as exc:
                    raise ConfigError(f"bad [rhs] {key}: {exc}") from exc
                values[comp] = np.broadcast_to(fn(env), grid.shape)
        return GridFunction(grid, values)
    if kind == "file":
        path = _get(cfg, "rhs", "file")
        try:
            f = read_field(path, L=grid.L)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read rhs field: {exc}") from exc
        if f.grid != grid or f.components != N:
            raise ConfigError(
                f"rhs field has {f.components} components on G={f.grid.G}, n={f.grid.n}; "
                f"expected {N} on G={grid.G}, n={grid.n}"
            )
        return f
    raise ConfigError(f"unknown rhs kind {kind!r} (use mode, expression, or file)")


def build_operator(cfg, A: ConstantTensor) -> NonlinearOperator:
    if not cfg.has_section("nonlinear"):
        raise ConfigError("missing [nonlinear] section")
    if cfg.has_option("nonlinear", "source"):
        source = cfg.get("nonlinear", "source")
        try:
            name, params = catalog.parse_catalog_ref(source)
            obj = catalog.get(name, params)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad operator source {source!r}: {exc}") from exc
        if not isinstance(obj, NonlinearOperator):
            raise ConfigError(f"[nonlinear] source {source!r} names a tensor, not an operator")
        return obj
    N, n = A.N, A.n
    names = [f"x{j + 1}" for j in range(n)] + [f"q{b + 1}{j + 1}" for b in range(N) for j in range(n)]
    compiled = []
    for comp in range(N):
        key = f"f{comp + 1}"
        if not cfg.has_option("nonlinear", key):
            raise ConfigError(f"expression operator needs [nonlinear] {key}")
        try:
            compiled.append(compile_expression(cfg.get("nonlinear", key), names))
        except ExpressionError as exc:
            raise ConfigError(f"bad [nonlinear] {key}: {exc}") from exc
    declared = None
    if cfg.has_option("nonlinear", "lambda"):
        from .ellipticity import cached_nu

        declared = _get(cfg, "nonlinear", "lambda", float) * cached_nu(A)

    def evaluator(x, Q):
        x = np.asarray(x, dtype=float)
        Q = np.asarray(Q, dtype=float)
        lead = np.broadcast_shapes(x.shape[:-1], Q.shape[:-2])
        env = {f"x{j + 1}": np.broadcast_to(x[..., j], lead) for j in range(n)}
        for b in range(N):
            for j in range(n):
                env[f"q{b + 1}{j + 1}"] = np.broadcast_to(Q[..., b, j], lead)
        out = np.zeros(lead + (N,))
        for comp, fn in enumerate(compiled):
            out[..., comp] = np.broadcast_to(fn(env), lead)
        return out

    return NonlinearOperator(
        evaluator=evaluator, anchor=A, declared_nearness=declared, name="config-expression"
    )


def _seed(cfg, args) -> int:
    if args.seed is not None:
        return args.seed
    return _get(cfg, "run", "seed", int, 0) if cfg.has_section("run") else 0


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, lines) -> None:
    path.write_text("\n".join(lines) + "\n")


def cmd_analyze(cfg, args) -> int:
    A = build_tensor(cfg)
    resolution = _get(cfg, "tensor", "resolution", int, 2048)
    report = ellipticity_constant(A, resolution)
    out = _outdir(args)
    header = "nu,min_abs_det,argmin_direction,resolution,refined,elliptic"
    argmin = " ".join(repr(v) for v in report.argmin_direction)
    row = f"{report.nu!r},{report.min_abs_det!r},{argmin},{report.resolution},{report.refined},{report.elliptic}"
    _write(out / "ellipticity.csv", [header, row])
    print(f"nu = {report.nu:.12g}  min|det| = {report.min_abs_det:.12g}  elliptic = {report.elliptic}")
    return 0 if report.elliptic else 2


def cmd_solve_linear(cfg, args) -> int:
    A = build_tensor(cfg)
    grid = build_grid(cfg, A.n)
    f = build_rhs(cfg, grid, A.N)
    plan = MultiplierPlan(A, grid)
    u, report = solve_linear(A, f, plan=plan)
    apriori = verify_apriori(A, u, f, nu=plan.nu)
    out = _outdir(args)
    write_field(out / "u.efof", u)
    _write(out / "report.csv", [",".join(REPORT_COLUMNS), report_csv_row(grid, report, apriori)])
    print(
        f"residual = {report.residual:.3e}  ratio_grad = {apriori.ratio_grad:.12g}"
        + ("  [nyquist content truncated]" if report.nyquist_truncated else "")
    )
    if cfg.has_option("solver", "regularizer"):
        kind = cfg.get("solver", "regularizer")
        ms = _get(cfg, "solver", "m", _int_list, [1, 10, 100, 1000])
        rows = ["m,kind,rel_error,factor_gap,rational_bound,residual"]
        nu_direct = norm_l2(u)
        for m in ms:
            try:
                reg = RegularizerSequence(kind=kind, m=m)
            except ValueError as exc:
                raise ConfigError(f"bad regularizer: {exc}") from exc
            um, rrep = solve_representation(A, f, reg, plan=plan)
            err = norm_l2(um - u) / nu_direct if nu_direct > 0 else 0.0
            rows.append(
                f"{m},{kind},{err!r},{rrep.factor_gap!r},{rrep.rational_bound!r},{rrep.residual!r}"
            )
        _write(out / "representation.csv", rows)
    return 0


def cmd_solve_nonlinear(cfg, args) -> int:
    A = build_tensor(cfg)
    grid = build_grid(cfg, A.n)
    f = build_rhs(cfg, grid, A.N)
    F = build_operator(cfg, A)
    tol = _get(cfg, "solver", "tol", float, 1e-10) if cfg.has_section("solver") else 1e-10
    max_iter = _get(cfg, "solver", "max_iter", int, 400) if cfg.has_section("solver") else 400
    u, trace = campanato_solve(F, f, tol=tol, max_iter=max_iter)
    out = _outdir(args)
    write_field(out / "u.efof", u)
    trace.write_csv(out / "trace.csv")
    print(
        f"{trace.message}; final residual = {trace.residual[-1]:.3e}, "
        f"K_theory = {trace.K_theory:.4g}"
    )
    return 0 if trace.converged else 3


def cmd_verify(cfg, args) -> int:
    A = build_tensor(cfg)
    grid = build_grid(cfg, A.n)
    seed = _seed(cfg, args)
    rng = rng_from_seed(seed)
    rows = ["check,case,value,bound,status"]
    failed = 0

    def record(check, case, value, bound, ok):
        nonlocal failed
        rows.append(f"{check},{case},{value!r},{bound!r},{'pass' if ok else 'FAIL'}")
        if not ok:
            failed += 1

    plan = MultiplierPlan(A, grid)
    for i in range(10):
        f = random_band_limited(grid, A.N, rng)
        u, _ = solve_linear(A, f, plan=plan)
        ap = verify_apriori(A, u, f, nu=plan.nu)
        record("apriori_grad", f"field_{i}", ap.ratio_grad, 1.0 + 1e-10, ap.ratio_grad <= 1.0 + 1e-10)

    oracle_grid = PeriodicGrid(n=grid.n, G=4, L=grid.L)
    oracle_plan = MultiplierPlan(A, oracle_grid)
    f = random_band_limited(oracle_grid, A.N, rng, kmax=1)
    u_spec, _ = solve_linear(A, f, plan=oracle_plan)
    u_dense = solve_dense(A, f)
    diff = norm_l2(gradient(u_dense - u_spec))
    scale = max(norm_l2(gradient(u_spec)), 1e-300)
    record("oracle_gradient", "G=4", diff / scale, 1e-9, diff / scale <= 1e-9)

    if cfg.has_section("nonlinear"):
        F = build_operator(cfg, A)
    else:
        F = catalog.lipschitz_perturbation(A, 0.5, "sin_q11")
    if F.declared_nearness is not None:
        from .ellipticity import nearness_constant

        near = nearness_constant(F, A)
        record(
            "nearness_declared",
            F.name or "operator",
            near.nu_fa,
            F.declared_nearness + 1e-9,
            near.nu_fa <= F.declared_nearness + 1e-9,
        )
        for i in range(10):
            w = random_band_limited(grid, A.N, rng)
            v = random_band_limited(grid, A.N, rng)
            comp = verify_comparison(F, w, v)
            record("comparison", f"pair_{i}", comp.ratio, 1.0 + 1e-9, comp.ratio <= 1.0 + 1e-9)
        pairs = [
            (random_band_limited(grid, A.N, rng), random_band_limited(grid, A.N, rng))
            for _ in range(10)
        ]
        near = near_operator_check(F, pairs)
        record("near_operator", "pairs", near.max_ratio, 1.0 + 1e-9, near.violations == 0)

    out = _outdir(args)
    _write(out / "verify.csv", rows)
    print(f"{len(rows) - 1} checks, {failed} failed")
    return 0 if failed == 0 else 4


_COMMANDS = {
    "analyze": cmd_analyze,
    "solve-linear": cmd_solve_linear,
    "solve-nonlinear": cmd_solve_nonlinear,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="efos",
        description="Spectral solves and verification for first-order elliptic systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="INI-style run description")
        p.add_argument("--out", default=".", help="output directory for reports and fields")
        p.add_argument("--seed", type=int, default=None, help="override the [run] seed")
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NonEllipticError as exc:
        print(f"ellipticity error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"solve error: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
