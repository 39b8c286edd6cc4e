"""Command-line front end.

Exit codes: 0 success, 1 validation or numerical error (message on stderr),
2 usage error. Index sets and permutations on the command line and in files
are 1-based; the library is 0-based.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import evolution, gauge, hilbert, model, observables, probability, products, verifier
from .errors import DimensionMismatch, ModelError
from .jsonio import decode_matrix, decode_vector, dumps, encode_matrix, encode_scalar, encode_vector

EXAMPLE_NOTE = (
    "A A^T = (d/s) I_s with d/s = {ratio}; the unnormalised rows have squared length "
    "d/s, so A A^T equals I_s only after scaling each row by sqrt(s/d)."
)


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------


def parse_indices(text: str) -> tuple[int, ...]:
    """``"1,2,5-7"`` (1-based) -> ``(0, 1, 4, 5, 6)``; an empty string is the empty set."""
    out: list[int] = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        lo, _, hi = part.partition("-")
        a = int(lo)
        b = int(hi) if hi else a
        if a < 1 or b < a:
            raise ValueError(f"bad 1-based index range {part!r}")
        out.extend(range(a - 1, b))
    return tuple(sorted(set(out)))


def parse_floats(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p.strip()]


def parse_labelled(text: str) -> list[tuple[str, str]]:
    """``"a:1,2;b:3"`` -> ``[("a", "1,2"), ("b", "3")]``."""
    out = []
    for cell in filter(None, (c.strip() for c in text.split(";"))):
        label, sep, rest = cell.partition(":")
        if not sep:
            raise ValueError(f"expected label:indices, got {cell!r}")
        out.append((label.strip(), rest.strip()))
    return out


def _read_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from None


def load_model(path: str) -> model.ModelSpec:
    return model.parse_model_spec(Path(path).read_text(encoding="utf-8"))


def chart_for_model(spec: model.ModelSpec) -> hilbert.HilbertChart:
    """Chart of the continuous part of a model.

    A top-level ``gram``/``kernel`` covers all variables; otherwise each
    variable contributes its own kernel (identity if none) and the blocks are
    combined as a Hilbert sum.
    """
    n = spec.dimension
    if n == 0:
        raise ValueError("model has no continuous variables")
    if spec.gram is not None:
        gram = hilbert.GramKernel(spec.gram)
    elif spec.kernel is not None:
        gram = hilbert.gram_from_kernel(spec.kernel["name"], spec.kernel["points"], spec.kernel.get("params"))
    else:
        blocks = []
        for v in spec.continuous_vars:
            if v.gram is not None:
                K = v.gram
            elif v.kernel is not None:
                K = hilbert.kernel_matrix(v.kernel["name"], v.kernel["points"], v.kernel.get("params"))
            else:
                K = np.eye(v.basis_size)
            if K.shape != (v.basis_size, v.basis_size):
                raise DimensionMismatch(f"variable {v.name}: kernel is {K.shape}, basis size {v.basis_size}")
            blocks.append(hilbert.build_chart(K))
        return products.hilbert_sum(blocks).chart
    if gram.n != n:
        raise DimensionMismatch(f"Gram matrix is {gram.n}x{gram.n} but the model has dimension {n}")
    return hilbert.build_chart(gram)


def load_state(path: str, chart: hilbert.HilbertChart) -> hilbert.StateVector:
    """State file: ``{"x": coefficients}`` (lifted through the chart) or ``{"coords": orthonormal coordinates}``."""
    doc = _read_json(path)
    if isinstance(doc, list):
        doc = {"x": doc}
    disc = decode_vector(doc["discrete"], "discrete") if "discrete" in doc else None
    if "x" in doc:
        return hilbert.lift(chart, decode_vector(doc["x"], "x"), disc)
    if "coords" in doc:
        c = decode_vector(doc["coords"], "coords")
        if c.shape != (chart.n,):
            raise DimensionMismatch(f"state has {c.shape[0]} coordinates, chart dimension is {chart.n}")
        return hilbert.StateVector(c, disc)
    raise ValueError(f"{path}: state file needs an 'x' or 'coords' entry")


def load_hamiltonian(path: str, hbar: float | None) -> evolution.Hamiltonian:
    doc = _read_json(path)
    if isinstance(doc, list):
        doc = {"H": doc}
    H = decode_matrix(doc["H"], "H")
    return evolution.Hamiltonian(H, hbar if hbar is not None else float(doc.get("hbar", 1.0)))


def _state_out(psi: hilbert.StateVector) -> dict:
    return {"coords": encode_vector(psi.coords), "norm": psi.norm}


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _tsv(obj: Any) -> str:
    """A ``rows`` list becomes a table; every other key follows as a ``key<TAB>json`` line."""
    if not isinstance(obj, dict):
        return dumps(obj) + "\n"
    rows = obj.get("rows")
    text = ""
    if isinstance(rows, list) and rows and all(isinstance(r, dict) for r in rows):
        keys = list(rows[0])
        lines = ["\t".join(keys)] + ["\t".join(json.dumps(r.get(k)) for k in keys) for r in rows]
        text = "\n".join(lines) + "\n"
        obj = {k: v for k, v in obj.items() if k != "rows"}
        if obj:
            text += "\n"
    return text + "".join(f"{k}\t{json.dumps(json.loads(dumps(v)))}\n" for k, v in obj.items())


def emit(obj: Any, fmt: str, out) -> None:
    if fmt == "tsv":
        out.write(_tsv(obj))
    else:
        out.write(dumps(obj) + "\n")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_validate(args, out) -> int:
    spec = load_model(args.model)
    report = model.model_summary(spec)
    report["valid"] = True
    fits = {}
    for s in spec.samples:
        B = model.design_matrix(spec.variable(s.var), s.args)
        x, resid = model.estimate_components(B, s.values)
        fits[s.var] = {"coefficients": encode_vector(x), "residual_norm": resid}
    if fits:
        report["assignation"] = fits
    emit(report, args.format, out)
    return 0


def cmd_build(args, out) -> int:
    spec = load_model(args.model)
    chart = chart_for_model(spec)
    report: dict[str, Any] = chart.summary()
    report["K"] = encode_matrix(chart.K)
    if args.factors:
        report["L"] = encode_matrix(chart.L)
        report["K_inverse"] = encode_matrix(chart.Phi)
    report["dual_pairing_defect"] = hilbert.dual_pairing_check(chart)
    if args.x:
        x = np.array(parse_floats(args.x), dtype=complex)
        psi = hilbert.lift(chart, x)
        report["state"] = _state_out(psi)
        report["components"] = encode_vector(hilbert.components(chart, psi))
    if args.complexify:
        cs = hilbert.complexify(chart)
        report["complex_structure"] = encode_matrix(cs.J)
    if spec.discrete_vars:
        code = model.flatten_discrete(spec.cardinalities)
        report["discrete_states"] = code.d
    emit(report, args.format, out)
    return 0


def _gauge_section(spec: model.ModelSpec, chart, ops: dict[str, observables.Operator]) -> dict:
    g = gauge.lift_gauge(chart, spec.gauge)
    sec: dict[str, Any] = {"U_hat": encode_matrix(g.U_hat), "unitarity_defect": g.unitarity_defect()}
    for name, op in ops.items():
        if op.n != chart.n:
            continue
        sec[f"{name}_transformed"] = encode_matrix(gauge.transform_operator(g, op).matrix)
        sec[f"{name}_symmetry_defect"] = gauge.symmetry_check(op, g)
    return sec


def cmd_observe(args, out) -> int:
    spec = load_model(args.model)
    report: dict[str, Any] = {}
    ops: dict[str, observables.Operator] = {}
    chart = chart_for_model(spec) if spec.dimension else None
    needs_chart = any(v is not None for v in (args.J, args.J2, args.secondary, args.algebra, args.partition))
    if needs_chart and chart is None:
        raise ValueError("model has no continuous variables")

    if args.J is not None:
        J = parse_indices(args.J)
        op = observables.primary(chart, J)
        ops["primary"] = op
        report["primary"] = op.to_dict()
        report["recovered_J"] = [j + 1 for j in observables.recover_index_set(op)]
        if args.coordinate:
            report["coordinate_projector"] = observables.coordinate_projector(chart, J).to_dict()
        if args.J2 is not None:
            op2 = observables.primary(chart, parse_indices(args.J2))
            ops["primary2"] = op2
            report["primary2"] = op2.to_dict()
            report["commutation_defect"] = observables.commutation_defect(op, op2)
    if args.secondary is not None:
        cells = parse_labelled(args.secondary)
        lams = [float(lab) for lab, _ in cells]
        phi = observables.secondary(chart, lams, [parse_indices(s) for _, s in cells])
        ops["secondary"] = phi
        report["secondary"] = phi.to_dict()
        if "primary" in ops:
            report["composed"] = observables.compose_with_primary(ops["primary"], phi).to_dict()
    if args.algebra is not None:
        u = np.array(parse_floats(args.algebra), dtype=complex)
        Y = observables.algebra_element(chart, u)
        ops["algebra"] = Y
        report["algebra"] = Y.to_dict()
        if args.state:
            psi = load_state(args.state, chart)
            report["state_functional"] = encode_scalar(observables.state_functional(chart, psi, Y))
    if args.partition is not None:
        part = observables.SpectralMeasureMap.from_sets(
            {lab: parse_indices(s) for lab, s in parse_labelled(args.partition)})
        measure = observables.spectral_measure(chart, part)
        report["spectral_measure"] = {str(k): P.to_dict() for k, P in measure.items()}
        if args.f is not None:
            f = {lab: float(v) for lab, v in parse_labelled(args.f)}
            report["spectral_integral"] = observables.spectral_integral(chart, f, part).to_dict()
    if args.retain is not None:
        code = model.flatten_discrete(spec.cardinalities)
        red = model.reduction_matrix(code, parse_indices(args.retain))
        D = observables.discrete_primary(red)
        report["discrete"] = D.to_dict()
        report["reduction_matrix"] = red.A.tolist()
        if spec.permutation is not None:
            g = gauge.discrete_permutation(spec.permutation)
            report["permuted_discrete"] = encode_matrix(gauge.transform_operator(g, D).matrix)
    if spec.gauge is not None and chart is not None:
        report["gauge"] = _gauge_section(spec, chart, ops)
    if not report:
        raise ValueError("nothing to observe: pass --J, --secondary, --algebra, --partition or --retain")
    emit(report, args.format, out)
    return 0


def cmd_prob(args, out) -> int:
    spec = load_model(args.model)
    chart = chart_for_model(spec)
    psi = load_state(args.state, chart)
    if args.normalize:
        psi = psi.normalized()
    report: dict[str, Any] = {}
    if args.J is not None:
        J = parse_indices(args.J)
        if args.given is not None:
            report["conditional_probability"] = probability.conditional_prob(chart, psi, parse_indices(args.given), J)
        else:
            report["probability"] = probability.subspace_prob(chart, psi, J)
    if args.secondary is not None:
        cells = parse_labelled(args.secondary)
        phi = observables.secondary(chart, [float(l) for l, _ in cells], [parse_indices(s) for _, s in cells])
        dist = probability.eigen_distribution(chart, phi, psi)
        report["rows"] = [dict(r, J=[j + 1 for j in r["J"]]) for r in dist.rows()]
        if args.samples:
            lam, post = probability.sample_measurement(dist, args.seed)
            report["sample"] = {"eigenvalue": lam, "post_state": _state_out(post)}
            draws = probability.sample_outcomes(dist, args.seed, args.samples)
            counts = np.bincount(draws, minlength=len(dist.outcomes))
            report["frequencies"] = [int(c) for c in counts]
    if not report:
        raise ValueError("pass --J and/or --secondary")
    emit(report, args.format, out)
    return 0


def cmd_evolve(args, out) -> int:
    ham = load_hamiltonian(args.hamiltonian, args.hbar)
    times = parse_floats(args.t) if args.t else []
    report: dict[str, Any] = {"hbar": ham.hbar}
    psi0 = None
    if args.state:
        doc = _read_json(args.state)
        coords = decode_vector(doc["coords"] if isinstance(doc, dict) else doc, "coords")
        if coords.shape != (ham.n,):
            raise DimensionMismatch(f"state has {coords.shape[0]} coordinates, Hamiltonian dimension is {ham.n}")
        psi0 = hilbert.StateVector(coords)
    if psi0 is not None and times:
        report["rows"] = [dict(t=t, **_state_out(evolution.evolve_state(ham, t, psi0))) for t in times]
    if args.residual is not None and psi0 is not None:
        t0 = times[0] if times else 0.0
        grid = t0 + args.residual * np.arange(5)
        report["schrodinger_residual"] = evolution.schrodinger_residual(ham, grid, evolution.trajectory(ham, grid, psi0))
    if args.observable is not None:
        Y0 = observables.Operator(np.diag([1.0 if j in parse_indices(args.observable) else 0.0
                                           for j in range(ham.n)]), "primary")
        report["heisenberg"] = [{"t": t, "matrix": encode_matrix(evolution.heisenberg_operator(ham, t, Y0).matrix)}
                                for t in times]
    if args.stationary:
        report["stationary_states"] = [encode_vector(v.coords) for v in evolution.stationary_states(ham, args.tol)]
    if args.spectrum:
        spec = evolution.energy_spectrum(ham)
        report["energies"] = [float(s) for s in spec.values]
        if psi0 is not None:
            report["energy_distribution"] = evolution.energy_distribution(spec, psi0.normalized()).rows()
    if args.recover_generator:
        gen = gauge.Generator(-1j * ham.H / ham.hbar)
        h = 1e-4
        samples = [(t, gauge.one_param_group(gen, t).U_hat) for t in (-h, h, *times)]
        rec = gauge.generator_from_group(samples)
        report["generator"] = {"S": encode_matrix(rec.S), "reconstruction_error": rec.reconstruction_error,
                               "skew": rec.skew}
    if args.basis is not None:
        family, size, period = (args.basis.split(":") + ["1.0"])[:3]
        grid = parse_floats(args.grid) if args.grid else times
        emap = evolution.evaluation_map((family, int(size), float(period)), grid)
        if args.x:
            x = np.array(parse_floats(args.x), dtype=complex)
            report["evaluation"] = [{"t": float(t), "value": encode_scalar(emap.apply(k, x))}
                                    for k, t in enumerate(emap.times)]
        if args.shift is not None:
            S = evolution.translation_generator(family, int(size), float(period))
            U = gauge.one_param_group(gauge.Generator(S), args.shift).U_hat
            report["shift_defect"] = evolution.shift_defect(emap, U, args.shift)
    emit(report, args.format, out)
    return 0


def cmd_compose(args, out) -> int:
    c1 = chart_for_model(load_model(args.model1))
    c2 = chart_for_model(load_model(args.model2))
    report: dict[str, Any] = {"mode": args.mode}
    if args.mode == "sum":
        sc = products.hilbert_sum([c1, c2])
        report.update(sc.chart.summary())
        report["blocks"] = [[r.start + 1, r.stop] for r in sc.ranges]
        report["K"] = encode_matrix(sc.chart.K)
    else:
        tc = products.tensor_chart(c1, c2)
        report.update(tc.chart.summary())
        report["K"] = encode_matrix(tc.chart.K)
        if args.state1 and args.state2:
            psi = products.tensor_state(tc, load_state(args.state1, c1), load_state(args.state2, c2))
            report["state"] = _state_out(psi)
    emit(report, args.format, out)
    return 0


def cmd_verify(args, out) -> int:
    seeds = [int(s) for s in parse_floats(args.seeds)] if args.seeds else list(verifier.DEFAULT_SEEDS)
    sizes = [int(s) for s in parse_floats(args.sizes)] if args.sizes else list(verifier.DEFAULT_SIZES)
    report = verifier.run_all(seeds, sizes, faults=args.fault or ())
    out.write(report.to_tsv() if args.format == "tsv" else report.to_json() + "\n")
    return 0 if report.passed else 1


def cmd_example_discrete(args, out) -> int:
    cards = [int(c) for c in parse_floats(args.cardinalities)]
    code = model.flatten_discrete(cards)
    red = model.reduction_matrix(code, parse_indices(args.retain))
    A = red.A
    D = observables.discrete_primary(red)
    ratio = red.d // red.s if red.d % red.s == 0 else red.d / red.s
    report = {
        "cardinalities": cards,
        "retained": [k + 1 for k in red.retained],
        "A": A.tolist(),
        "AtA": (A.T @ A).tolist(),
        "AAt": (A @ A.T).tolist(),
        "AAt_scale": ratio,
        "note": EXAMPLE_NOTE.format(ratio=ratio),
        "projection": encode_matrix(D.matrix),
        "projection_of_first_state": encode_vector(D.matrix[:, 0]),
    }
    emit(report, args.format, out)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="seed for any random draw")
    p.add_argument("--tol", type=float, default=d(1e-10), help="numerical tolerance")
    p.add_argument("--format", choices=("json", "tsv"), default=d("json"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hilbertmodel", description=__doc__.splitlines()[0])
    _common(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _common(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a model file")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("build", parents=[common], help="build the chart of a model")
    p.add_argument("--model", required=True)
    p.add_argument("--x", help="coefficients to lift, comma separated")
    p.add_argument("--factors", action="store_true", help="also print L and K^-1")
    p.add_argument("--complexify", action="store_true")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("observe", parents=[common], help="build observables")
    p.add_argument("--model", required=True)
    p.add_argument("--J", help="primary index set, e.g. 1,2")
    p.add_argument("--J2", help="second index set for the commutation check")
    p.add_argument("--coordinate", action="store_true", help="also print the coordinate projector")
    p.add_argument("--secondary", help="eigenvalue:indices cells, e.g. '2:1;-3:2'")
    p.add_argument("--algebra", help="coefficients u0,u1,..,un")
    p.add_argument("--state", help="state file for the state functional")
    p.add_argument("--partition", help="label:indices cells, e.g. 'a:1;b:2,3'")
    p.add_argument("--f", help="label:value pairs for the spectral integral")
    p.add_argument("--retain", help="discrete variable positions to keep, e.g. 2")
    p.set_defaults(func=cmd_observe)

    p = sub.add_parser("prob", parents=[common], help="measurement probabilities")
    p.add_argument("--model", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--J")
    p.add_argument("--given", help="conditioning index set")
    p.add_argument("--secondary")
    p.add_argument("--samples", type=int, default=0, help="number of simulated measurements")
    p.add_argument("--normalize", action="store_true")
    p.set_defaults(func=cmd_prob)

    p = sub.add_parser("evolve", parents=[common], help="time evolution")
    p.add_argument("--hamiltonian", required=True)
    p.add_argument("--hbar", type=float)
    p.add_argument("--t", help="times, comma separated")
    p.add_argument("--state")
    p.add_argument("--residual", type=float, metavar="H", help="Schrodinger residual with grid step H")
    p.add_argument("--observable", help="index set of a primary observable for the Heisenberg picture")
    p.add_argument("--stationary", action="store_true")
    p.add_argument("--spectrum", action="store_true")
    p.add_argument("--recover-generator", action="store_true")
    p.add_argument("--basis", help="family:size[:period] for the evaluation map")
    p.add_argument("--grid", help="time grid for the evaluation map")
    p.add_argument("--x", help="coefficients to evaluate")
    p.add_argument("--shift", type=float, help="time translation to check on the grid")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("compose", parents=[common], help="combine two models")
    p.add_argument("model1")
    p.add_argument("model2")
    p.add_argument("--mode", choices=("sum", "tensor"), required=True)
    p.add_argument("--state1")
    p.add_argument("--state2")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("verify", parents=[common], help="run the randomised proposition checks")
    p.add_argument("--seeds", help="comma separated seeds")
    p.add_argument("--sizes", help="comma separated dimensions")
    p.add_argument("--fault", action="append", choices=verifier.FAULTS)
    p.add_argument("--json", dest="format", action="store_const", const="json")
    p.add_argument("--tsv", dest="format", action="store_const", const="tsv")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("example-discrete", parents=[common], help="the two-variable reduction example")
    p.add_argument("--cardinalities", default="2,3")
    p.add_argument("--retain", default="2")
    p.set_defaults(func=cmd_example_discrete)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except (ModelError, ValueError, IndexError, KeyError, OverflowError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
