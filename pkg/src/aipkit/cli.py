"""Command line front end.

Exit codes: 0 success, 1 validation failure, 2 numerical failure,
3 parse error.  Reports are JSON with sorted keys and no timestamps, so
identical inputs and seed give byte-identical output.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import __version__
from .aip import (ResolventMatrix, check_j_inner, check_potapov_class, lft_solve,
                  resolvent_matrix, validate, verify_solution)
from .errors import AipError, DomainError, ParseError, ValidationError
from .pontryagin import estimate_kernel_signature, inertia, random_disk_points
from .ratfun import (bp_degree, krein_langer_left, krein_langer_right,
                     schur_kernel_evaluator)
from .serialize import (complex_to_json, dumps_report, function_from_json, load_function,
                        load_instance, load_json, matrix_to_json, parse_complex)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_PARSE = 0, 1, 2, 3
IDENTITY_TOL = 1e-9
LOGGER = logging.getLogger("aipkit")


class _Fail(Exception):
    def __init__(self, code, diagnostics):
        super().__init__(code)
        self.code = code
        self.diagnostics = diagnostics


def _diag(code, severity, message, value=None):
    return {"code": code, "severity": severity, "message": message, "value": value}


def _load_valid_instance(path):
    data, options, digest = load_instance(path)
    res = validate(data)
    diags = [_diag(d.code, d.severity, d.message, d.value) for d in res.diagnostics]
    if not res.ok:
        raise _Fail(EXIT_VALIDATION, diags)
    return data, options, digest, res, diags


def _settings(args, options):
    """Effective settings: flags override file options, which override defaults."""
    st = {
        "grid": args.grid if args.grid is not None else options.get("grid", 1024),
        "tol": args.tol if args.tol is not None else options.get("tol", 1e-6),
        "seed": args.seed if args.seed is not None else options.get("seed", 0),
    }
    args.effective_settings = st
    return st


def _parse_points(text, seed, avoid=()):
    if text is None:
        return [0j]
    text = text.strip()
    if text.isdigit() and int(text) > 0:
        rng = np.random.default_rng(seed)
        return random_disk_points(rng, int(text), 0.9, avoid, 0.05)
    out = []
    for i, tok in enumerate(text.split(",")):
        try:
            out.append(complex(tok.strip().replace(" ", "").replace("i", "j")))
        except ValueError as exc:
            raise ParseError(f"bad point '{tok}'", f"--points[{i}]") from exc
    return out


def cmd_validate(args):
    data, options, digest = load_instance(args.file)
    _settings(args, options)
    res = validate(data)
    diags = [_diag(d.code, d.severity, d.message, d.value) for d in res.diagnostics]
    results = {
        "kappa": res.kappa,
        "anchor": None if res.anchor is None else complex_to_json(res.anchor),
        "anchor_margin": res.anchor_margin,
        "pencil_singular_points": [complex_to_json(z) for z in res.singular_points],
    }
    code = EXIT_OK if res.ok else EXIT_VALIDATION
    return code, {"instance_sha256": digest}, diags, results


def cmd_resolvent(args):
    data, options, digest, res, diags = _load_valid_instance(args.file)
    st = _settings(args, options)
    W = ResolventMatrix(data, res.anchor)
    pts = _parse_points(args.points, st["seed"], res.singular_points)
    samples, worst = [], 0.0
    for lam in pts:
        samples.append({"lambda": complex_to_json(lam), "W": matrix_to_json(W(lam))})
    for lam in pts:
        for mu in pts:
            worst = max(worst, W.identity_residual(lam, mu))
    anchor_res = float(np.linalg.norm(W(W.anchor) - np.eye(W.m), 2))
    jdef, skipped = check_j_inner(W)
    pot = check_potapov_class(W, seed=st["seed"])
    results = {
        "anchor": complex_to_json(W.anchor),
        "samples": samples,
        "identity_residual": worst,
        "anchor_residual": anchor_res,
        "j_inner_defect": jdef,
        "j_inner_skipped": skipped,
        "potapov": pot._asdict(),
    }
    ok = worst <= IDENTITY_TOL and anchor_res <= 1e-12 and jdef <= IDENTITY_TOL
    if not ok:
        diags.append(_diag("RESOLVENT", "error", "resolvent identity checks failed", worst))
    return (EXIT_OK if ok else EXIT_NUMERICAL), {"instance_sha256": digest}, diags, results


def _epsilon(args, data, options):
    if args.epsilon is None:
        return options.get("epsilon", 0.0), {"kind": "default" if "epsilon" not in options else "file-embedded"}
    if os.path.exists(args.epsilon):
        f, digest = load_function(args.epsilon)
        return f, {"kind": "function", "sha256": digest}
    c = parse_complex(_complex_arg(args.epsilon), "--epsilon")
    return c, {"kind": "constant", "value": complex_to_json(c)}


def _complex_arg(text):
    try:
        z = complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ParseError(f"'{text}' is neither a file nor a complex constant", "--epsilon") from exc
    return [z.real, z.imag]


def _solution_results(data, options, s, report, seed):
    out = {"verification": report.as_dict()}
    pts = _parse_points(None, seed)
    if "nevanlinna_pick" in options:
        nodes, values = options["nevanlinna_pick"]
        res = []
        for z, w in zip(nodes, values):
            v = _safe_eval(s, z)
            res.append(float("inf") if v is None else abs(complex(v[0, 0]) - w))
        out["interpolation_residuals"] = res
        pts = list(nodes)
    out["samples"] = []
    for z in pts:
        v = _safe_eval(s, z)
        out["samples"].append({"lambda": complex_to_json(z), "s": None if v is None else matrix_to_json(v)})
    return out


def _safe_eval(s, z):
    try:
        return np.atleast_2d(s(z))
    except DomainError:
        return None


def cmd_solve(args):
    data, options, digest, res, diags = _load_valid_instance(args.file)
    st = _settings(args, options)
    eps, meta = _epsilon(args, data, options)
    sol = lft_solve(ResolventMatrix(data, res.anchor), eps)
    if not sol.admissible:
        diags.append(_diag("ADMISSIBLE", "error", "w21(0) e(0) + w22(0) is singular",
                           sol.denominator_margin))
        return EXIT_NUMERICAL, {"instance_sha256": digest}, diags, {"epsilon": meta}
    rep = verify_solution(data, sol, meta, grid=st["grid"], seed=st["seed"], tol=st["tol"])
    results = _solution_results(data, options, sol, rep, st["seed"])
    results["epsilon"] = meta
    results["anchor"] = complex_to_json(res.anchor)
    ok = rep.accepted and all(r <= 1e-8 for r in results.get("interpolation_residuals", []))
    if not ok:
        diags.append(_diag("SOLUTION", "error", "solution checks failed: " + ", ".join(rep.reasons)))
    return (EXIT_OK if ok else EXIT_NUMERICAL), {"instance_sha256": digest}, diags, results


def cmd_verify(args):
    data, options, digest, res, diags = _load_valid_instance(args.file)
    st = _settings(args, options)
    s, sdigest = load_function(args.solution)
    if (s.p, s.q) != (data.p, data.q):
        raise ParseError(f"solution has shape {(s.p, s.q)}, expected {(data.p, data.q)}", args.solution)
    rep = verify_solution(data, s, {"kind": "external"}, grid=st["grid"], seed=st["seed"], tol=st["tol"])
    results = _solution_results(data, options, s, rep, st["seed"])
    ok = rep.accepted and all(r <= 1e-8 for r in results.get("interpolation_residuals", []))
    if not ok:
        diags.append(_diag("SOLUTION", "error", "solution rejected: " + ", ".join(rep.reasons)))
    inputs = {"instance_sha256": digest, "solution_sha256": sdigest}
    return (EXIT_OK if ok else EXIT_NUMERICAL), inputs, diags, results


def _kl_json(kl):
    return {
        "degree": kl.certified_degree,
        "zeros": [complex_to_json(a) for a in kl.blaschke_part.zeros],
        "projections": [matrix_to_json(P) for _, P in kl.blaschke_part.factors],
        "kernel_estimate": None if kl.kernel_estimate is None else kl.kernel_estimate._asdict(),
        "rank_margin": kl.rank_margin,
        "reconstruction_residual": kl.reconstruction_residual,
        "schur_norm": kl.schur_norm,
    }


def cmd_factorize(args):
    f, digest = load_function(args.file)
    st = _settings(args, {})
    left = krein_langer_left(f, seed=st["seed"])
    right = krein_langer_right(f, seed=st["seed"])
    results = {"left": _kl_json(left), "right": _kl_json(right)}
    diags = []
    if bp_degree(left.blaschke_part) != bp_degree(right.blaschke_part):
        diags.append(_diag("KL", "error", "left and right degrees differ"))
    return (EXIT_NUMERICAL if diags else EXIT_OK), {"function_sha256": digest}, diags, results


def cmd_signature(args):
    doc, digest = load_json(args.file)
    st = _settings(args, {})
    if "M" in doc:
        data, options, digest, res, diags = _load_valid_instance(args.file)
        W = resolvent_matrix(data, res.anchor)
        pot = check_potapov_class(W, seed=st["seed"])
        results = {"kind": "instance", "pick_inertia": inertia(data.P)._asdict(),
                   "kappa": data.kappa, "potapov": pot._asdict()}
        ok = pot.consistent
        if not ok:
            diags.append(_diag("POTAPOV", "error", "sampled index exceeds sq_-(P)"))
        return (EXIT_OK if ok else EXIT_NUMERICAL), {"instance_sha256": digest}, diags, results
    f = function_from_json(doc, args.file)
    est = estimate_kernel_signature(schur_kernel_evaluator(f), seed=st["seed"])
    results = {"kind": "function", "kappa_hat": est.count, "stabilized": est.stabilized}
    diags = [] if est.stabilized else [_diag("SIGNATURE", "warning", "estimate did not stabilize")]
    return EXIT_OK, {"function_sha256": digest}, diags, results


COMMANDS = {
    "validate": cmd_validate,
    "resolvent": cmd_resolvent,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "factorize": cmd_factorize,
    "signature": cmd_signature,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=int, default=None, help="circle grid size (power of two)")
    common.add_argument("--tol", type=float, default=None, help="membership / condition tolerance")
    common.add_argument("--seed", type=int, default=None, help="seed for all random sampling")
    common.add_argument("--report", default=None, help="write the JSON report to this path")
    common.add_argument("--json", action="store_true", help="print the JSON report to stdout")
    parser = argparse.ArgumentParser(prog="aipkit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check the standing assumptions").add_argument("file")
    p = sub.add_parser("resolvent", parents=[common], help="tabulate W and its identities")
    p.add_argument("file")
    p.add_argument("--points", default=None, help="comma-separated points, or a positive integer sample count")
    p = sub.add_parser("solve", parents=[common], help="LFT solution and its verification")
    p.add_argument("file")
    p.add_argument("--epsilon", default=None, help="function file or complex constant")
    p = sub.add_parser("verify", parents=[common], help="check an external solution")
    p.add_argument("file")
    p.add_argument("--solution", required=True, help="function file with the candidate s")
    sub.add_parser("factorize", parents=[common], help="Krein-Langer factorizations").add_argument("file")
    sub.add_parser("signature", parents=[common], help="sampled negative squares").add_argument("file")
    return parser


def run(argv=None):
    """Run one command; returns ``(exit_code, report_dict)``."""
    return _execute(build_parser().parse_args(argv))


def _execute(args):
    report = {"command": args.command, "tool": {"name": "aipkit", "version": __version__}}
    try:
        code, inputs, diags, results = COMMANDS[args.command](args)
    except _Fail as exc:
        code, inputs, diags, results = exc.code, {}, exc.diagnostics, {}
    except ParseError as exc:
        code, inputs, diags, results = EXIT_PARSE, {}, [_diag("PARSE", "error", str(exc))], {}
    except ValidationError as exc:
        code, inputs, diags, results = EXIT_VALIDATION, {}, [
            _diag(c, "error", str(exc)) for c in exc.codes or ("VALIDATION",)], {}
    except (AipError, np.linalg.LinAlgError) as exc:
        code, inputs, diags, results = EXIT_NUMERICAL, {}, [
            _diag(type(exc).__name__, "error", str(exc))], {}
    if code == EXIT_OK and any(d["severity"] == "error" for d in diags):
        code = EXIT_NUMERICAL
    settings = getattr(args, "effective_settings", None) or _settings(args, {})
    report.update(settings=settings, inputs=inputs, diagnostics=diags, results=results, exit_code=code,
                  status="ok" if code == EXIT_OK else "error")
    return code, report


def _summary(report):
    lines = [f"{report['command']}: {report['status']} (exit {report['exit_code']})"]
    for d in report["diagnostics"]:
        lines.append(f"  [{d['severity']}] {d['code']}: {d['message']}")
    return "\n".join(lines) + "\n"


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    code, report = _execute(args)
    text = dumps_report(report)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text if args.json else _summary(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
