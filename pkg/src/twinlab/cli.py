"""Command-line driver.

Usage::

    twinlab twins <file>
    twinlab schmidt <file> [--hermitian | --complex | --pure-nonhermitian]
    twinlab decompose <file> --projector <file>
    twinlab partition <file>

Global flags: ``--json``, ``--zero-tol``, ``--rank-tol``, ``--degeneracy-tol``.
Exit codes: 0 ok, 2 input error, 3 internal-consistency error (including
any report whose self-check came out ``"verified": false``).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .core import (
    OrthogonalProjector,
    ToleranceConfig,
    lift,
    opnorm,
)
from .errors import InternalConsistencyError, ValidationError
from .io import encode_matrix, encode_vector, load_projector, load_state
from .schmidt import (
    adjoint_invariance_check,
    correlation_map,
    operator_schmidt_complex,
    operator_schmidt_hermitian,
    pure_nonhermitian_expansion,
    schmidt_state,
)
from .separable import assemble, bipartition_twins, partition_biorthogonal, sharp_values
from .twins import (
    BiorthogonalDecomposition,
    ObservableStrength,
    classify_observable,
    classify_projector,
    decompose_by_projector,
    strong_mixture,
    twin_solve,
    twin_spectral_projectors,
    verify_reduced_commutation,
)

EXIT_OK, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3


def _tol_dict(tol):
    return {"zero_tol": tol.zero_tol, "rank_tol": tol.rank_tol, "degeneracy_tol": tol.degeneracy_tol}


def _as_density(kind, obj, command):
    if kind == "density":
        return obj
    if kind == "separable":
        return assemble(obj)
    if kind == "pure":
        return obj.density()
    raise ValidationError(f"{command} needs a density, pure or separable state file, got {kind!r}")


def _projector_pair_json(tp):
    return {
        "P1": encode_matrix(tp.P1.matrix),
        "P2": encode_matrix(tp.P2.matrix),
        "strength": tp.strength.value,
        "commutator_norm": tp.commutator_norm,
        "residual": tp.residual,
        "detectable_ranks": list(tp.detectable_ranks),
    }


def _certificates_json(dec: BiorthogonalDecomposition):
    return [
        {
            "terms": [m, n],
            "subsystem1": c1.orthogonal,
            "subsystem2": c2.orthogonal,
            "product_norms": [c1.product_norm, c2.product_norm],
        }
        for (m, n), (c1, c2) in sorted(dec.certificates.items())
    ]


def _mixture_json(dec: BiorthogonalDecomposition):
    return {
        "weights": [float(w) for w in dec.weights],
        "terms": [encode_matrix(t.matrix) for t in dec.terms],
        "product_terms": list(dec.product_terms),
        "certificates": _certificates_json(dec),
        "biorthogonal": dec.biorthogonal,
    }


def _expansion_json(exp):
    return {
        "normalization": exp.normalization,
        "coefficients": [float(c) for c in exp.coefficients],
        "weights": [float(c) for c in exp.weights],
        "blocks": [list(b) for b in exp.blocks],
        "hermitian_factors": exp.hermitian_factors,
        "factors1": [encode_matrix(f) for f in exp.factors1],
        "factors2": [encode_matrix(f) for f in exp.factors2],
    }


# --------------------------------------------------------------------------
# commands


def cmd_twins(args, tol):
    kind, obj = load_state(args.file, tol)
    if kind not in ("density", "separable"):
        raise ValidationError(f"twins needs a density or separable state file, got {kind!r}")
    rho = _as_density(kind, obj, "twins")
    space = twin_solve(rho, tol)
    verified = True
    pairs = []
    for p, trivial in zip(space.pairs, space.trivial):
        comm = verify_reduced_commutation(p, rho, tol)
        verified &= p.residual <= tol.zero_tol
        pairs.append({
            "trivial": trivial,
            "A1": encode_matrix(p.A1.matrix),
            "A2": encode_matrix(p.A2.matrix),
            "residual": p.residual,
            "reduced_commutation": [comm.norm1, comm.norm2],
        })
    spectral = []
    for j, (p, trivial) in enumerate(zip(space.pairs, space.trivial)):
        if trivial:
            continue
        data = twin_spectral_projectors(p, rho, tol)
        strength = classify_observable(p, rho, tol)
        covered = sum(lift(tp.P1.matrix, 1, rho.d1, rho.d2) for tp in data.projector_pairs) @ rho.matrix
        verified &= opnorm(covered - rho.matrix) <= 10 * tol.zero_tol
        entry = {
            "pair": j,
            "eigenvalues": [float(a) for a in data.eigenvalues],
            "multiplicities": [list(m) for m in data.multiplicities],
            "projector_pairs": [_projector_pair_json(tp) for tp in data.projector_pairs],
            "classification": strength.value,
        }
        if strength is ObservableStrength.STRONG:
            dec = strong_mixture(p, rho, tol)
            verified &= opnorm(dec.reconstruct() - rho.matrix) <= 10 * tol.zero_tol
            entry["mixture"] = _mixture_json(dec)
        spectral.append(entry)
    results = {
        "dimension": space.dimension,
        "trivial_dimension": sum(space.trivial),
        "nontrivial_dimension": space.dimension - sum(space.trivial),
        "verdict": "nontrivial twins found" if space.has_nontrivial else "trivial only",
        "pairs": pairs,
        "spectral": spectral,
    }
    return _report("twins", tol, kind, rho, results, verified)


def cmd_schmidt(args, tol):
    kind, obj = load_state(args.file, tol)
    mode = args.mode
    if mode is None:
        mode = "state" if kind == "pure" else "hermitian"
    if mode in ("state", "pure-nonhermitian") and kind != "pure":
        raise ValidationError(f"mode {mode!r} needs a pure state file, got {kind!r}")
    if kind == "separable":
        raise ValidationError("schmidt does not accept separable files; assemble them first")
    d1, d2 = obj[1:] if kind == "operator" else (obj.d1, obj.d2)
    results = {"mode": mode}
    if mode == "state":
        sch = schmidt_state(obj, tol)
        amap = correlation_map(obj, tol)
        residual = float(np.linalg.norm(sch.reconstruct() - obj.vector))
        results.update({
            "coefficients": [float(r) for r in sch.coefficients],
            "blocks": [list(b) for b in sch.blocks],
            "basis1": [encode_vector(sch.basis1[:, i]) for i in range(len(sch))],
            "basis2": [encode_vector(sch.basis2[:, i]) for i in range(len(sch))],
            "correlation_operator": encode_matrix(amap.matrix),
            "correlation_degenerate": amap.degenerate,
            "reconstruction_residual": residual,
        })
        return _report("schmidt", tol, kind, None, results, residual <= 10 * tol.zero_tol, (d1, d2))
    if kind == "operator":
        w = obj[0]
    else:
        w = _as_density(kind, obj, "schmidt").matrix
    if mode == "hermitian":
        exp = operator_schmidt_hermitian(w, d1, d2, tol)
    elif mode == "complex":
        exp = operator_schmidt_complex(w, d1, d2, tol)
    else:
        exp = pure_nonhermitian_expansion(obj, tol)
    residual = opnorm(exp.reconstruct() - w)
    verified = residual <= 10 * tol.zero_tol
    results.update(_expansion_json(exp))
    results["reconstruction_residual"] = residual
    if mode == "hermitian":
        rep = adjoint_invariance_check(w, exp, tol)
        results["adjoint_invariance"] = {
            "hermitian_input": rep.hermitian_input,
            "spectra_invariant": rep.spectra_invariant,
            "factors_hermitian": rep.factors_hermitian,
            "failures": rep.failures,
        }
        verified &= rep.ok
    return _report("schmidt", tol, kind, None, results, verified, (d1, d2))


def cmd_decompose(args, tol):
    kind, obj = load_state(args.file, tol)
    rho = _as_density(kind, obj, "decompose")
    sub, pm = load_projector(args.projector)
    if sub != 1:
        raise ValidationError("decompose expects a subsystem-1 projector")
    if pm.shape != (rho.d1, rho.d1):
        raise ValidationError(f"projector must be {rho.d1}x{rho.d1}, got {pm.shape}")
    p1 = OrthogonalProjector(1, pm, tol=tol)
    tp = classify_projector(p1, rho, tol)
    out = decompose_by_projector(tp, rho, tol)
    results = {"projector": _projector_pair_json(tp)}
    if isinstance(out, BiorthogonalDecomposition):
        residual = opnorm(out.reconstruct() - rho.matrix)
        results["branch"] = "strong"
        results["mixture"] = _mixture_json(out)
        verified = out.biorthogonal
    else:
        residual = opnorm(out.combined.reconstruct() - rho.matrix)
        results["branch"] = "weak"
        results["weak_split"] = {
            "part_in": encode_matrix(out.part_in),
            "part_out": encode_matrix(out.part_out),
            "expansion_in": _expansion_json(out.expansions[0]),
            "expansion_out": _expansion_json(out.expansions[1]),
            "combined_weights": [float(c) for c in out.combined.weights],
            "cross_orthogonality": out.cross_orthogonality,
            "max_cross": out.max_cross,
            "purity_sum": out.purity_sum,
        }
        verified = out.cross_orthogonality
    results["reconstruction_residual"] = residual
    verified &= residual <= 10 * tol.zero_tol
    return _report("decompose", tol, kind, rho, results, verified)


def cmd_partition(args, tol):
    kind, mix = load_state(args.file, tol)
    if kind != "separable":
        raise ValidationError(f"partition needs a separable state file, got {kind!r}")
    res = partition_biorthogonal(mix, tol)
    rho = assemble(mix)
    verified = True
    results = {
        "groups": [list(g) for g in res.groups],
        "n_groups": res.n_groups,
        "verdict": "nontrivial twins exist" if res.has_nontrivial_twins else "no nontrivial twins",
        "induced_twins": [_projector_pair_json(tp) for tp in res.induced_twins],
    }
    if res.has_nontrivial_twins:
        results["sharp_values"] = sharp_values(res, mix, tol)
        results["bipartitions"] = [list(s) for s, _ in bipartition_twins(res, mix, tol)]
        covered = sum(lift(p1.matrix, 1, rho.d1, rho.d2) for p1, _ in res.group_projectors) @ rho.matrix
        verified &= opnorm(covered - rho.matrix) <= 10 * tol.zero_tol
        verified &= all(tp.is_strong for tp in res.induced_twins)
    return _report("partition", tol, kind, rho, results, verified)


def _report(analysis, tol, kind, rho, results, verified, dims=None):
    d1, d2 = (rho.d1, rho.d2) if rho is not None else dims
    return {
        "analysis": analysis,
        "tolerances": _tol_dict(tol),
        "input": {"kind": kind, "d1": d1, "d2": d2},
        "results": results,
        "verified": bool(verified),
    }


# --------------------------------------------------------------------------
# text rendering


def _fmt(x):
    return f"{x:.6g}"


def render_text(report) -> str:
    r = report["results"]
    inp = report["input"]
    lines = [f"twinlab {report['analysis']}  ({inp['kind']}, d1={inp['d1']}, d2={inp['d2']})"]
    a = report["analysis"]
    if a == "twins":
        lines.append(f"twin space dimension {r['dimension']} "
                     f"({r['trivial_dimension']} trivial, {r['nontrivial_dimension']} nontrivial)")
        lines.append(f"verdict: {r['verdict']}")
        for s in r["spectral"]:
            lines.append(f"pair {s['pair']}: {s['classification']}, eigenvalues "
                         + ", ".join(_fmt(v) for v in s["eigenvalues"]))
            for k, tp in enumerate(s["projector_pairs"]):
                lines.append(f"  projector pair {k}: {tp['strength']} "
                             f"(commutator {tp['commutator_norm']:.2e}, ranks {tp['detectable_ranks']})")
            if "mixture" in s:
                lines.append("  mixture weights: " + ", ".join(_fmt(w) for w in s["mixture"]["weights"]))
    elif a == "schmidt":
        lines.append(f"mode: {r['mode']}")
        lines.append("coefficients: " + ", ".join(_fmt(c) for c in r["coefficients"]))
        if "normalization" in r:
            lines.append(f"normalization: {_fmt(r['normalization'])}")
        lines.append(f"reconstruction residual: {r['reconstruction_residual']:.2e}")
        if "adjoint_invariance" in r:
            fails = r["adjoint_invariance"]["failures"]
            lines.append("adjoint invariance: " + ("ok" if not fails else "; ".join(fails)))
    elif a == "decompose":
        lines.append(f"projector is {r['projector']['strength']}")
        if r["branch"] == "strong":
            m = r["mixture"]
            lines.append("mixture weights: " + ", ".join(_fmt(w) for w in m["weights"]))
            lines.append(f"biorthogonal: {m['biorthogonal']}")
        else:
            ws = r["weak_split"]
            lines.append("combined coefficients: " + ", ".join(_fmt(w) for w in ws["combined_weights"]))
            lines.append(f"cross orthogonality: {ws['cross_orthogonality']} (max {ws['max_cross']:.2e})")
        lines.append(f"reconstruction residual: {r['reconstruction_residual']:.2e}")
    elif a == "partition":
        lines.append(f"groups: {r['groups']}")
        lines.append(f"verdict: {r['verdict']}")
    lines.append(f"verified: {str(report['verified']).lower()}")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# entry point


def _add_global(p, suppress):
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--json", action="store_true", default=default, help="emit a JSON report")
    p.add_argument("--zero-tol", type=float, default=default)
    p.add_argument("--rank-tol", type=float, default=default)
    p.add_argument("--degeneracy-tol", type=float, default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twinlab", description="Twin observables of bipartite states.")
    _add_global(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("twins", help="solve the twin equation and classify twins")
    p.add_argument("file")
    p.set_defaults(func=cmd_twins)

    p = sub.add_parser("schmidt", help="Schmidt canonical expansions")
    p.add_argument("file")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--hermitian", dest="mode", action="store_const", const="hermitian")
    g.add_argument("--complex", dest="mode", action="store_const", const="complex")
    g.add_argument("--pure-nonhermitian", dest="mode", action="store_const", const="pure-nonhermitian")
    p.set_defaults(func=cmd_schmidt, mode=None)

    p = sub.add_parser("decompose", help="split a state along a twin projector")
    p.add_argument("file")
    p.add_argument("--projector", required=True)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("partition", help="biorthogonal grouping of a separable mixture")
    p.add_argument("file")
    p.set_defaults(func=cmd_partition)

    for action in sub.choices.values():
        _add_global(action, suppress=True)
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    defaults = ToleranceConfig()
    try:
        tol = ToleranceConfig(
            args.zero_tol if args.zero_tol is not None else defaults.zero_tol,
            args.rank_tol if args.rank_tol is not None else defaults.rank_tol,
            args.degeneracy_tol if args.degeneracy_tol is not None else defaults.degeneracy_tol,
        )
        report = args.func(args, tol)
    except InternalConsistencyError as exc:
        print(f"twinlab: internal consistency error: {exc}", file=stderr)
        return EXIT_INTERNAL
    except ValidationError as exc:
        print(f"twinlab: input error: {exc}", file=stderr)
        return EXIT_INPUT
    if args.json:
        stdout.write(json.dumps(report, indent=2) + "\n")
    else:
        stdout.write(render_text(report) + "\n")
    return EXIT_OK if report["verified"] else EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
