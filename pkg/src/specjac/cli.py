"""Command-line front end: instance generation, pipelines, verification.

Exit codes: 0 success, 2 genericity exhaustion, 3 tolerance failure,
4 unbalanced character, 64 usage error.  Identical configurations produce
byte-identical JSON output.  The environment variable SPECJAC_THREADS
caps internal parallelism across independent verification samples.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from . import jsonio
from .algebra import EXACT, FLOAT, to_complex
from .curve import genus
from .errors import (
    DegenerateLeading,
    DomainError,
    GenericityFailure,
    InconsistentCurve,
    MultipleRoot,
    SingularGauge,
    SpecjacError,
    SweepInconsistency,
    ThetaDivisorSingularity,
    UnbalancedCharacter,
)
from .euler import (
    euler_characteristic,
    paper_closed_forms,
    q1_probe,
    q_euler,
    euler_limit,
)
from .lax import char_poly_t, gauge_fix_l, sample_gauge_generic, sample_m
from .poisson import (
    centrality_defect,
    check_rhat_identity,
    involution_defect,
    jacobi_defect,
    jacobi_triples,
)
from .reconstruct import matrix_gap, reconstruct_l
from .sov import (
    canonical_bracket_check,
    divisor_gap,
    generic_instance,
    separate,
    structure_constants_cached,
)

EXIT_OK = 0
EXIT_GENERICITY = 2
EXIT_TOLERANCE = 3
EXIT_CHARACTER = 4
EXIT_USAGE = 64

_GENERICITY_ERRORS = (
    GenericityFailure,
    SingularGauge,
    MultipleRoot,
    DegenerateLeading,
    ThetaDivisorSingularity,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


@dataclass
class RunConfig:
    N: int = 2
    n: int = 2
    seed: int = 0
    backend: str = FLOAT
    rtol: float = 1e-9
    atol: float = 1e-12
    out: str | None = None
    infile: str | None = None
    threads: int = 1


def thread_cap() -> int:
    raw = os.environ.get("SPECJAC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _emit(cfg: RunConfig, payload: dict):
    text = jsonio.dumps(payload)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_echo(cfg: RunConfig) -> dict:
    return {
        "N": cfg.N,
        "n": cfg.n,
        "seed": cfg.seed,
        "backend": cfg.backend,
        "rtol": cfg.rtol,
        "atol": cfg.atol,
        "threads": cfg.threads,
    }


# ---------------------------------------------------------------------------
# commands


def cmd_gen(cfg: RunConfig, shape: str) -> int:
    if shape == "m":
        M = sample_m(cfg.N, cfg.n, cfg.seed, cfg.backend)
        _emit(cfg, jsonio.encode_matrix(M))
        return EXIT_OK
    try:
        _, L, rejects = sample_gauge_generic(cfg.N, cfg.n, cfg.seed, cfg.backend)
    except SingularGauge as exc:
        sys.stderr.write(f"genericity failure: {exc}\n")
        return EXIT_GENERICITY
    payload = jsonio.encode_matrix(L)
    payload["rejections"] = rejects
    _emit(cfg, payload)
    return EXIT_OK


def cmd_pipeline(cfg: RunConfig) -> int:
    try:
        M, L, rejects = generic_instance(cfg.N, cfg.n, cfg.seed, FLOAT)
        curve = char_poly_t(L)
        div_l = separate(L, "l", cfg.seed)
        div_m = separate(M, "m", cfg.seed)
        rec = reconstruct_l(div_l, curve, L.s11)
        rt_err = matrix_gap(L, rec)
    except _GENERICITY_ERRORS as exc:
        sys.stderr.write(f"genericity exhaustion: {exc}\n")
        return EXIT_GENERICITY
    except (SweepInconsistency, InconsistentCurve) as exc:
        sys.stderr.write(f"reconstruction stage failed: {exc}\n")
        return EXIT_TOLERANCE

    tol = max(cfg.rtol, cfg.atol)
    residual = max(max(div_l.residuals), max(div_m.residuals))
    failing = None
    if residual > tol:
        failing = "separation residual"
    elif rt_err > tol:
        failing = "roundtrip"
    report = {
        "config": _config_echo(cfg),
        "genus": genus(cfg.N, cfg.n),
        "rejections": rejects,
        "curve": jsonio.encode_curve(curve, FLOAT),
        "divisor": jsonio.encode_divisor(div_l),
        "divisor_m_based": jsonio.encode_divisor(div_m),
        "m_vs_l_divisor_gap": divisor_gap(div_l, div_m),
        "max_on_curve_residual": residual,
        "roundtrip_error": rt_err,
        "status": "ok" if failing is None else f"tolerance failure: {failing}",
    }
    _emit(cfg, report)
    if failing is not None:
        sys.stderr.write(f"tolerance failure at stage: {failing}\n")
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_verify(cfg: RunConfig, jacobi_samples: int = 1000, instances: int = 3) -> int:
    N, n = cfg.N, cfg.n
    P = structure_constants_cached(N, n)
    anti = P.antisymmetry_defect()
    triples = jacobi_triples(P, jacobi_samples, seed=cfg.seed, exhaustive_limit=0)
    jac = jacobi_defect(P, triples)
    try:
        M, _, _ = sample_gauge_generic(N, n, cfg.seed, EXACT)
    except SingularGauge as exc:
        sys.stderr.write(f"genericity exhaustion: {exc}\n")
        return EXIT_GENERICITY
    inv = involution_defect(M, P)
    cen = centrality_defect(M, P)

    def one_float_check(k):
        Mf, _, _ = generic_instance(N, n, cfg.seed + 1000 * (k + 1), FLOAT)
        rep = canonical_bracket_check(Mf, seed=cfg.seed + k, P=P)
        rhat = check_rhat_identity(P, Mf, samples=2, seed=cfg.seed + k)
        return rep.r_zz, rep.r_zw, rep.r_ww, rhat

    try:
        rows = _map(one_float_check, list(range(instances)), cfg.threads)
    except _GENERICITY_ERRORS as exc:
        sys.stderr.write(f"genericity exhaustion: {exc}\n")
        return EXIT_GENERICITY
    r_zz = max(r[0] for r in rows)
    r_zw = max(r[1] for r in rows)
    r_ww = max(r[2] for r in rows)
    r_rhat = max(r[3] for r in rows)

    exact_ok = anti.is_zero() and jac.is_zero() and inv == 0 and cen == 0
    float_ok = max(r_zz, r_zw, r_ww, r_rhat) <= cfg.rtol
    report = {
        "config": _config_echo(cfg),
        "exact": {
            "antisymmetry": "0" if anti.is_zero() else repr(anti),
            "jacobi_triples": len(triples),
            "jacobi": "0" if jac.is_zero() else repr(jac),
            "involution": str(inv),
            "centrality": str(cen),
        },
        "float": {
            "instances": instances,
            "r_zz": r_zz,
            "r_zw": r_zw,
            "r_ww": r_ww,
            "r_rhat": r_rhat,
        },
        "status": "ok" if (exact_ok and float_ok) else "failed",
    }
    _emit(cfg, report)
    if not (exact_ok and float_ok):
        sys.stderr.write("verification failed\n")
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_euler(cfg: RunConfig, n_max: int | None = None) -> int:
    N, n = cfg.N, cfg.n
    try:
        chi_q = q_euler(N, n)
        chi = euler_limit(chi_q)
        probe = q1_probe(chi_q)
        ratios = {}
        top = n_max if n_max is not None else n + 3
        for nn in range(n, top + 1):
            ratios[str(nn)] = {
                "chi": str(euler_characteristic(N, nn)),
                "genus": genus(N, nn),
            }
        closed = paper_closed_forms(N, n)
    except UnbalancedCharacter as exc:
        sys.stderr.write(f"unbalanced character: {exc}\n")
        return EXIT_CHARACTER

    def _s(v):
        return str(v) if isinstance(v, Fraction) else v

    report = {
        "config": _config_echo(cfg),
        "chi": str(chi),
        "chi_q": {
            "sign": chi_q.sign,
            "q_power": chi_q.q_power,
            "num": list(chi_q.num),
            "den": list(chi_q.den),
        },
        "q1_probe": float(probe),
        "ratio_table": ratios,
        "paper_closed_forms": {
            k: (_s(v) if not isinstance(v, (list, dict)) else v)
            for k, v in closed.items()
            if not hasattr(v, "num")  # drop raw character objects
        },
    }
    report["paper_closed_forms"]["q_euler_paper_form"] = {
        "sign": closed["q_euler_paper_form"].sign,
        "q_power": closed["q_euler_paper_form"].q_power,
        "num": list(closed["q_euler_paper_form"].num),
        "den": list(closed["q_euler_paper_form"].den),
    }
    _emit(cfg, report)
    return EXIT_OK


def cmd_separate(cfg: RunConfig) -> int:
    if not cfg.infile:
        sys.stderr.write("separate requires --in matrix.json\n")
        return EXIT_USAGE
    with open(cfg.infile, encoding="utf-8") as fh:
        M = jsonio.decode(jsonio.loads(fh.read()))
    try:
        div = separate(M.to_float(), M.shape, cfg.seed)
    except _GENERICITY_ERRORS as exc:
        sys.stderr.write(f"genericity failure: {exc}\n")
        return EXIT_GENERICITY
    _emit(cfg, jsonio.encode_divisor(div))
    return EXIT_OK


def cmd_reconstruct(cfg: RunConfig) -> int:
    if not cfg.infile:
        sys.stderr.write("reconstruct requires --in bundle.json\n")
        return EXIT_USAGE
    with open(cfg.infile, encoding="utf-8") as fh:
        bundle = jsonio.loads(fh.read())
    curve = jsonio.decode(bundle["curve"])
    div = jsonio.decode(bundle["divisor"])
    s11 = complex(bundle["s11"][0], bundle["s11"][1])
    try:
        L = reconstruct_l(div, curve, s11)
    except _GENERICITY_ERRORS as exc:
        sys.stderr.write(f"genericity failure: {exc}\n")
        return EXIT_GENERICITY
    except (SweepInconsistency, InconsistentCurve) as exc:
        sys.stderr.write(f"reconstruction failed: {exc}\n")
        return EXIT_TOLERANCE
    _emit(cfg, jsonio.encode_matrix(L))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> _Parser:
    parser = _Parser(prog="specjac", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--N", type=int, default=2, help="matrix order (>= 2)")
        p.add_argument("--n", type=int, default=2, help="pole degree (>= 1)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--backend", choices=[EXACT, FLOAT], default=FLOAT)
        p.add_argument("--rtol", type=float, default=1e-9)
        p.add_argument("--atol", type=float, default=1e-12)
        p.add_argument("--in", dest="infile", default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=["json"], default="json")

    p = sub.add_parser("gen", help="sample a random Lax matrix")
    common(p)
    p.add_argument("--shape", choices=["m", "l"], default="m")

    for name, helptext in [
        ("pipeline", "generate, gauge-fix, separate, reconstruct, report"),
        ("verify", "exact table checks and float bracket certification"),
        ("euler", "graded characters and Euler characteristics"),
        ("separate", "separated divisor of a matrix JSON file"),
        ("reconstruct", "matrix from {curve, divisor, s11} JSON bundle"),
    ]:
        p = sub.add_parser(name, help=helptext)
        common(p)
        if name == "euler":
            p.add_argument("--n-max", type=int, default=None)
        if name == "verify":
            p.add_argument("--jacobi-samples", type=int, default=1000)
            p.add_argument("--instances", type=int, default=3)
    return parser


def _validate(args) -> None:
    if args.N < 2:
        raise DomainError(f"--N must be >= 2, got {args.N}")
    if args.n < 1:
        raise DomainError(f"--n must be >= 1, got {args.n}")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    cfg = RunConfig(
        N=args.N,
        n=args.n,
        seed=args.seed,
        backend=args.backend,
        rtol=args.rtol,
        atol=args.atol,
        out=args.out,
        infile=args.infile,
        threads=thread_cap(),
    )
    try:
        _validate(args)
    except DomainError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    try:
        if args.command == "gen":
            return cmd_gen(cfg, args.shape)
        if args.command == "pipeline":
            return cmd_pipeline(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, args.jacobi_samples, args.instances)
        if args.command == "euler":
            return cmd_euler(cfg, args.n_max)
        if args.command == "separate":
            return cmd_separate(cfg)
        if args.command == "reconstruct":
            return cmd_reconstruct(cfg)
    except DomainError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except UnbalancedCharacter as exc:
        sys.stderr.write(f"unbalanced character: {exc}\n")
        return EXIT_CHARACTER
    except SpecjacError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_TOLERANCE
    return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
