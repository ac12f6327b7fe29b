"""Command-line interface: ``qrat <subcommand> [--input FILE] [options]``.

Every subcommand reads one JSON document (from ``--input`` or stdin) and
writes one JSON document (to ``--output`` or stdout).  Exit codes: 0 success,
1 invalid input, 2 numerical failure, 3 negative verdict for the certifying
subcommands (``multiplier``, ``kernel-test``).
"""
import argparse
import json
import sys
import textwrap

import numpy as np

from . import cnp, interp, kernels, qalgebra, qcore, statespace
from . import io as jio
from .exceptions import NumericalError, ValidationError
from .io import SchemaError

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_VERDICT = 0, 1, 2, 3

MATRIX_DOC = ('matrices are {"rows": r, "cols": c, "data": [[re, im], ...]} (row-major); '
              'complex scalars are [re, im] or plain numbers; a realization is '
              '{"C", "A", "B", "D"?, "q"?}')

SCHEMAS = {
    "eval": ('{"system": realization, "z": complex | [complex], "mode"?: "q" | "classical"}\n'
             'Default mode: "classical" when D is present or q is absent, else "q".\n'
             'Output: {"mode", "z", "values": [matrix]}'),
    "taylor": ('{"system": realization, "K": int}\n'
               'Output: {"coeffs": [matrix]} with C A^k B / [k]_q!'),
    "borel": ('{"coeffs": [matrix], "q": real in [0, 1], "inverse"?: bool}\n'
              'Output: {"coeffs": [matrix]}'),
    "realize": ('{"coeffs": [matrix], "q": real, "rank"?: int}\n'
                'Output: {"system": realization, "state_dim", "singular_values"}'),
    "reduce": ('{"system": realization}\n'
               'Output: {"system": minimal realization, "state_dim"}'),
    "add": ('{"f": realization, "g": realization}\n'
            'Output: {"system": realization of f + g with the shared q}'),
    "mul": ('{"f": realization, "g": realization}\n'
            'Classical product in the D form when either factor has D, else D-free;\n'
            'with --star the q-deformed product.  Output: {"system": realization}'),
    "inv": ('{"f": realization}\n'
            'Classical inverse, or the q-deformed inverse with --star.  Output: {"system"}'),
    "jordan": ('{"lambda": complex, "N": int, "C": matrix, "q": real, "z": [complex],\n'
               ' "sample_zs"?: [complex]}\n'
               'Output: {"values": [matrix], "chain_residual", "verified"}'),
    "blaschke": ('{"a": complex, "q"?: real, "z": [complex], "w"?: [complex]}\n'
                 'Output: {"values", "worst_residual", "pass", "min_eig", "max_eig", "points_used"}'),
    "theta": ('{"J": matrix, "C": matrix, "A": matrix, "z0"?: complex, "z"?: [complex],\n'
              ' "pairs"?: [[complex, complex]]}\n'
              'Output: {"P", "values", "stein_residual", "j_unitarity_residual",\n'
              '         "worst_residual", "positive", "pass"}'),
    "multiplier": ('{"function": fn, "q": real, "shift"?: {"k": int, "k_end"?: int}}\n'
                   'fn is {"type": "constant", "c"} | {"type": "blaschke", "a"} |\n'
                   '      {"type": "blaschke_q", "a"} | {"type": "monomial", "coeff"?, "power"} |\n'
                   '      {"type": "product", "factors": [fn]}\n'
                   'Output: {"pass", "min_eig", "max_eig", "sup_abs", "points_used"}; exit 3 on fail'),
    "kernel-test": ('NAME with flags (--q, --n, --eps, --r, --order, --E), or JSON\n'
                    '{"name": str, "params": {...}} / {"values": [real], "start_index"?: 0|1}\n'
                    'Names: ' + ", ".join(sorted(cnp.CONSTRUCTORS)) + '\n'
                    'Output: {"label", "pass", "first_violation_index", "ratio_gap",\n'
                    '         "reciprocal_checked", "reciprocal_pass"}; exit 3 on fail'),
    "pick": ('{"N": int, "nodes": [[complex]], "mode": "tangential" | "values",\n'
             ' "targets": {"xi": [[complex]], "eta": [[complex]]} | [matrix],\n'
             ' "samples"?: [[complex]], "method"?: "auto" | "schur" | "colligation"}\n'
             'Output: {"solvable", "status", "min_eig", "max_eig", "identity_residual",\n'
             '         "residuals", "contractive", "central_solution_samples"}'),
}


class VerdictNegative(Exception):
    """Carries the JSON output of a certifying subcommand whose verdict is negative."""

    def __init__(self, payload):
        super().__init__("negative verdict")
        self.payload = payload


def _get(doc, key, pointer="", default=...):
    if not isinstance(doc, dict):
        raise SchemaError(pointer, "expected a JSON object")
    if key not in doc:
        if default is ...:
            raise SchemaError(f"{pointer}/{key}", "missing field")
        return default
    return doc[key]


def _complex_out(values):
    return [jio.encode_complex(v) for v in np.atleast_1d(values)]


def _q_or(args, q):
    return args.q if args.q is not None else q


# ------------------------------------------------------------- handlers

def cmd_eval(doc, args):
    ss, q = jio.decode_statespace(_get(doc, "system"), "/system")
    q = _q_or(args, q)
    zs = jio.decode_complex_list(_get(doc, "z"), "/z")
    mode = _get(doc, "mode", default=None)
    if mode is None:
        mode = "classical" if (ss.has_D or q is None) else "q"
    if mode not in ("q", "classical"):
        raise SchemaError("/mode", "must be 'q' or 'classical'")
    if mode == "q":
        fr = statespace.QRational(statespace.to_weiz2(ss), q or 0.0)
        tol = args.tol if args.tol is not None else 1e-15
        values = [statespace.eval_q(fr, z, tol) for z in zs]
    else:
        values = [statespace.eval_classical(ss, z) for z in zs]
    return {"mode": mode, "z": _complex_out(zs), "values": [jio.encode_matrix(v) for v in values]}


def cmd_taylor(doc, args):
    ss, q = jio.decode_statespace(_get(doc, "system"), "/system")
    K = jio.decode_int(_get(doc, "K"), "/K", 0)
    fr = statespace.QRational(statespace.to_weiz2(ss), _q_or(args, q) or 0.0)
    return {"coeffs": jio.encode_coeffs(statespace.taylor_q(fr, K))}


def cmd_borel(doc, args):
    T = jio.decode_coeffs(_get(doc, "coeffs"), "/coeffs")
    q = _q_or(args, None)
    if q is None:
        q = jio.decode_real(_get(doc, "q"), "/q", 0.0, 1.0)
    inverse = bool(_get(doc, "inverse", default=False))
    out = qcore.inverse_borel_q(T, q) if inverse else qcore.borel_q(T, q)
    return {"coeffs": jio.encode_coeffs(out)}


def cmd_realize(doc, args):
    T = jio.decode_coeffs(_get(doc, "coeffs"), "/coeffs")
    q = _q_or(args, None)
    if q is None:
        q = jio.decode_real(_get(doc, "q"), "/q", 0.0, 1.0)
    rank = _get(doc, "rank", default=None)
    if rank is not None:
        rank = jio.decode_int(rank, "/rank", 0)
    tol = args.tol if args.tol is not None else 1e-9
    fr, s = statespace.realize_from_taylor(T, q, tol, return_singular_values=True, rank=rank)
    return {"system": jio.encode_qrational(fr), "state_dim": fr.ss.state_dim,
            "singular_values": [float(x) for x in s]}


def cmd_reduce(doc, args):
    ss, q = jio.decode_statespace(_get(doc, "system"), "/system")
    tol = args.tol if args.tol is not None else 1e-9
    red = statespace.kalman_reduce(ss, tol)
    return {"system": jio.encode_statespace(red, q), "state_dim": red.state_dim}


def _load_pair(doc, args):
    f, qf = jio.decode_statespace(_get(doc, "f"), "/f")
    g, qg = jio.decode_statespace(_get(doc, "g"), "/g")
    if args.q is not None:
        qf = qg = args.q
    return f, qf, g, qg


def _shared_q(qf, qg):
    qf, qg = qf or 0.0, qg or 0.0
    if qf != qg:
        raise ValidationError(f"q mismatch: {qf} vs {qg}")
    return qf


def cmd_add(doc, args):
    f, qf, g, qg = _load_pair(doc, args)
    q = _shared_q(qf, qg)
    out = qalgebra.add(statespace.QRational(statespace.to_weiz2(f), q),
                       statespace.QRational(statespace.to_weiz2(g), q))
    return {"system": jio.encode_qrational(out)}


def cmd_mul(doc, args):
    f, qf, g, qg = _load_pair(doc, args)
    if args.star:
        q = _shared_q(qf, qg)
        out = qalgebra.star_product(statespace.QRational(statespace.to_weiz2(f), q),
                                    statespace.QRational(statespace.to_weiz2(g), q))
        return {"system": jio.encode_qrational(out)}
    if f.has_D or g.has_D:
        out = qalgebra.product_classical_weiz(f, g)
    else:
        out = qalgebra.product_classical_weiz2(f, g)
    return {"system": jio.encode_statespace(out, qf if qf == qg else None)}


def cmd_inv(doc, args):
    f, q = jio.decode_statespace(_get(doc, "f"), "/f")
    q = _q_or(args, q)
    if args.star:
        out = qalgebra.star_inverse(statespace.QRational(statespace.to_weiz2(f), q or 0.0))
        return {"system": jio.encode_qrational(out)}
    out = qalgebra.inverse_classical(f) if f.has_D else qalgebra.inverse_classical_weiz2(f)
    return {"system": jio.encode_statespace(out, q)}


def cmd_jordan(doc, args):
    lam = jio.decode_complex(_get(doc, "lambda"), "/lambda")
    N = jio.decode_int(_get(doc, "N"), "/N", 1)
    C = jio.decode_matrix(_get(doc, "C"), "/C")
    q = _q_or(args, None)
    if q is None:
        q = jio.decode_real(_get(doc, "q", default=0.0), "/q", 0.0, 1.0)
    zs = jio.decode_complex_list(_get(doc, "z", default=[]), "/z")
    samples = jio.decode_complex_list(_get(doc, "sample_zs", default=[0.1, [0.0, 0.2], -0.15]),
                                      "/sample_zs")
    tol = args.tol if args.tol is not None else 1e-8
    values = [statespace.jordan_chain_eval(lam, N, C, z, q) for z in zs]
    res = statespace.jordan_chain_residual(lam, N, C, q, samples)
    return {"values": [jio.encode_matrix(v) for v in values], "chain_residual": res,
            "verified": bool(res < tol)}


def cmd_blaschke(doc, args):
    a = jio.decode_complex(_get(doc, "a"), "/a")
    q = _q_or(args, None)
    if q is None:
        q = jio.decode_real(_get(doc, "q", default=0.0), "/q", 0.0, 1.0)
    zs = jio.decode_complex_list(_get(doc, "z", default=[]), "/z")
    ws = jio.decode_complex_list(_get(doc, "w", default=[]), "/w")
    tol = args.tol if args.tol is not None else 1e-9
    values = [kernels.blaschke_q(a, q, z) for z in zs]
    worst = 0.0
    for z in zs:
        for w in ws:
            worst = max(worst, kernels.blaschke_kernel_residual(a, z, w),
                        kernels.blaschke_q_kernel_residual(a, q, z, w))
    radius = 1 / np.sqrt(1 - q)
    grid = kernels.disk_grid(radius, args.grid_size)

    def kern(z, w):
        return ((1 - kernels.blaschke_q(a, q, z) * np.conj(kernels.blaschke_q(a, q, w)))
                * qcore.eq_eval_product(z, np.conj(w), q))

    gram = kernels.gram_check(kern, grid, tol)
    return dict(gram.report(), values=_complex_out(values), worst_residual=worst)


def cmd_theta(doc, args):
    J = jio.decode_matrix(_get(doc, "J"), "/J")
    C = jio.decode_matrix(_get(doc, "C"), "/C")
    A = jio.decode_matrix(_get(doc, "A"), "/A")
    z0 = jio.decode_complex(_get(doc, "z0", default=1.0), "/z0")
    zs = jio.decode_complex_list(_get(doc, "z", default=[]), "/z")
    pairs = _get(doc, "pairs", default=None)
    td = kernels.ThetaData(J, C, A, z0)
    if pairs is None:
        rng = np.random.default_rng(args.seed)
        r = 0.9 * np.sqrt(rng.uniform(size=(20, 2)))
        pts = r * np.exp(2j * np.pi * rng.uniform(size=(20, 2)))
    else:
        pts = [jio.decode_complex_list(p, f"/pairs/{i}") for i, p in enumerate(pairs)]
    worst = max(kernels.theta_kernel_residual(td, z, w) for z, w in pts)
    ju = kernels.j_unitarity_residual(td)
    tol = args.tol if args.tol is not None else 1e-9
    return {"P": jio.encode_matrix(td.P),
            "values": [jio.encode_matrix(kernels.theta_eval(td, z)) for z in zs],
            "stein_residual": kernels.stein_residual(td.P, td.Jsig, td.C, td.A),
            "j_unitarity_residual": ju, "worst_residual": worst, "positive": td.positive,
            "pass": bool(ju <= tol and worst <= 1e-10)}


def _build_function(fn, pointer, q):
    kind = _get(fn, "type", pointer)
    if kind == "constant":
        c = jio.decode_complex(_get(fn, "c", pointer), f"{pointer}/c")
        return lambda z: c
    if kind in ("blaschke", "blaschke_q"):
        a = jio.decode_complex(_get(fn, "a", pointer), f"{pointer}/a")
        if abs(a) >= 1:
            raise SchemaError(f"{pointer}/a", "|a| must be < 1")
        if kind == "blaschke":
            return lambda z: kernels.blaschke(a, z)
        return lambda z: kernels.blaschke_q(a, q, z)
    if kind == "monomial":
        c = jio.decode_complex(_get(fn, "coeff", pointer, 1.0), f"{pointer}/coeff")
        n = jio.decode_int(_get(fn, "power", pointer), f"{pointer}/power", 0)
        return lambda z: c * z ** n
    if kind == "product":
        factors = _get(fn, "factors", pointer)
        if not isinstance(factors, list) or not factors:
            raise SchemaError(f"{pointer}/factors", "expected a nonempty list")
        fns = [_build_function(f, f"{pointer}/factors/{i}", q) for i, f in enumerate(factors)]
        return lambda z: np.prod([g(z) for g in fns])
    raise SchemaError(f"{pointer}/type", f"unknown function type {kind!r}")


def cmd_multiplier(doc, args):
    q = _q_or(args, None)
    if q is None:
        q = jio.decode_real(_get(doc, "q", default=0.0), "/q", 0.0, 1.0)
    fn = _build_function(_get(doc, "function"), "/function", q)
    tol = args.tol if args.tol is not None else 1e-9
    shift = _get(doc, "shift", default=None)
    if shift is None:
        grid = kernels.disk_grid(1.0, args.grid_size)
        verdict = kernels.schur_multiplier_check_q(fn, q, grid, tol)
    else:
        k = jio.decode_int(_get(shift, "k", "/shift"), "/shift/k", 0)
        k_end = _get(shift, "k_end", "/shift", None)
        if k_end is not None:
            k_end = jio.decode_int(k_end, "/shift/k_end", k)
        grid = kernels.disk_grid(1 / np.sqrt(1 - q), args.grid_size)
        verdict = kernels.shifted_schur_check(fn, q, k, grid, tol, k_end)
    out = verdict.report()
    if not verdict.passed:
        raise VerdictNegative(out)
    return out


_KERNEL_PARAMS = {
    "dirichlet": ("n",),
    "hardy-sobolev": ("eps", "n"),
    "hardy-sobolev-full": ("order", "n"),
    "q-dirichlet": ("q", "n"),
    "q-gamma": ("q", "r", "n"),
    "q-hardy-sobolev": ("q", "eps", "n"),
    "partition": ("E", "n"),
    "eq-coeffs": ("q", "n"),
}


def _kernel_sequence(name, params, pointer):
    if name not in cnp.CONSTRUCTORS:
        raise SchemaError(pointer, f"unknown kernel {name!r}")
    defaults = {"n": 50}
    vals = []
    for key in _KERNEL_PARAMS[name]:
        v = params.get(key, defaults.get(key))
        if v is None:
            raise SchemaError(f"{pointer}/{key}", "missing parameter")
        vals.append(v)
    return cnp.CONSTRUCTORS[name](*vals)


def cmd_kernel_test(doc, args):
    if args.name is not None:
        params = {"q": _q_or(args, None), "n": args.n, "eps": args.eps, "r": args.r,
                  "order": args.order, "E": args.E}
        seq = _kernel_sequence(args.name, {k: v for k, v in params.items() if v is not None},
                               "/name")
    elif "name" in doc:
        params = _get(doc, "params", default={})
        if not isinstance(params, dict):
            raise SchemaError("/params", "expected an object")
        seq = _kernel_sequence(doc["name"], params, "/params")
    else:
        values = _get(doc, "values")
        if not isinstance(values, list):
            raise SchemaError("/values", "expected a list of positive reals")
        vals = [jio.decode_real(v, f"/values/{i}") for i, v in enumerate(values)]
        seq = cnp.CoeffSeq(vals, _get(doc, "start_index", default=0), "custom")
    verdict = cnp.kaluza_check(seq)
    out = verdict.report()
    out["reciprocal_checked"] = bool(seq.normalized)
    out["reciprocal_pass"] = None
    if seq.normalized:
        rec = cnp.reciprocal_nonneg_check(seq, min(len(seq) - 1, 50))
        out["reciprocal_pass"] = rec.passed
        out["reciprocal_min_b"] = rec.min_b
    if args.continuous and args.name == "partition":
        f, f1, f2 = cnp.partition_function(args.E)
        out["continuous"] = cnp.kaluza_continuous(f, np.linspace(0, args.n or 50, 101),
                                                  f1, f2).report()
    if not verdict.passed:
        raise VerdictNegative(out)
    return out


def _as_vectors(obj, pointer):
    if not isinstance(obj, list) or not obj:
        raise SchemaError(pointer, "expected a nonempty list")
    return np.array([jio.decode_complex_list(v, f"{pointer}/{i}") for i, v in enumerate(obj)])


def cmd_pick(doc, args):
    N = jio.decode_int(_get(doc, "N"), "/N", 1)
    nodes = _as_vectors(_get(doc, "nodes"), "/nodes")
    if nodes.shape[1] != N:
        raise SchemaError("/nodes", f"each node must have {N} coordinates")
    mode = _get(doc, "mode", default="values")
    targets = _get(doc, "targets")
    if mode == "tangential":
        xi = _as_vectors(_get(targets, "xi", "/targets"), "/targets/xi")
        eta = _as_vectors(_get(targets, "eta", "/targets"), "/targets/eta")
        problem = interp.PickProblem(nodes, xi, eta)
    elif mode == "values":
        if not isinstance(targets, list):
            raise SchemaError("/targets", "expected a list of matrices")
        vals = np.array([jio.decode_matrix(t, f"/targets/{i}") for i, t in enumerate(targets)])
        problem = interp.PickProblem.from_values(nodes, vals)
    else:
        raise SchemaError("/mode", "must be 'tangential' or 'values'")
    method = _get(doc, "method", default="auto")
    tol = args.tol if args.tol is not None else interp.PSD_TOL
    result = interp.solve(problem, tol, method)
    out = {"solvable": result.solvable, "status": result.status, "min_eig": result.min_eig,
           "max_eig": result.max_eig, "identity_residual": result.identity_residual,
           "residuals": None, "contractive": None, "central_solution_samples": None}
    if result.verification is not None:
        out["residuals"] = [float(r) for r in result.verification.residuals]
        out["contractive"] = result.verification.contractive
        samples = _get(doc, "samples", default=None)
        pts = (interp.ball_grid(N, 5, 0.5, args.seed) if samples is None
               else _as_vectors(samples, "/samples"))
        out["central_solution_samples"] = [
            {"point": _complex_out(z), "value": jio.encode_matrix(result.central(z))} for z in pts]
    return out


HANDLERS = {
    "eval": cmd_eval, "taylor": cmd_taylor, "borel": cmd_borel, "realize": cmd_realize,
    "reduce": cmd_reduce, "add": cmd_add, "mul": cmd_mul, "inv": cmd_inv,
    "jordan": cmd_jordan, "blaschke": cmd_blaschke, "theta": cmd_theta,
    "multiplier": cmd_multiplier, "kernel-test": cmd_kernel_test, "pick": cmd_pick,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", default="-", help="input JSON file ('-' for stdin)")
    common.add_argument("--output", "-o", default="-", help="output JSON file ('-' for stdout)")
    common.add_argument("--tol", type=float, default=None, help="tolerance override")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
    common.add_argument("--q", type=float, default=None, help="override the deformation parameter")
    common.add_argument("--grid-size", type=int, default=kernels.GRID_SIZE,
                        help="number of sample points in Gram checks")
    common.add_argument("--star", action="store_true",
                        help="use the q-deformed product/inverse (mul, inv)")

    parser = argparse.ArgumentParser(
        prog="qrat", description="q-rational realizations, kernels and interpolation",
        epilog=MATRIX_DOC)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, schema in SCHEMAS.items():
        p = sub.add_parser(name, parents=[common], help=schema.splitlines()[0][:60],
                           description="Input schema:\n" + textwrap.indent(schema, "  ")
                           + "\n\n" + MATRIX_DOC,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        if name == "kernel-test":
            p.add_argument("name", nargs="?", default=None, choices=sorted(cnp.CONSTRUCTORS))
            p.add_argument("--n", type=int, default=None, help="largest coefficient index")
            p.add_argument("--eps", type=float, default=None)
            p.add_argument("--r", type=float, default=None)
            p.add_argument("--order", type=int, default=None)
            p.add_argument("--E", type=float, nargs="+", default=None)
            p.add_argument("--continuous", action="store_true",
                           help="also run the continuous criterion (partition only)")
    return parser


def _read_input(path, needed):
    if not needed:
        return {}
    text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")


def _write_output(path, payload):
    text = jio.dumps(payload)
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    needs_input = not (args.command == "kernel-test" and args.name is not None)
    try:
        doc = _read_input(args.input, needs_input)
        payload = HANDLERS[args.command](doc, args)
    except VerdictNegative as neg:
        _write_output(args.output, neg.payload)
        return EXIT_VERDICT
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _write_output(args.output, payload)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
