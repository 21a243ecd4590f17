"""randig command line: exact PMFs, seeded sample streams, and oracle reports.

Exit codes: 0 success / oracle pass, 1 oracle failure, 2 usage or model error.
Every report embeds the resolved configuration (seed included) so a run can
be reproduced bit for bit.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, models, rnnd
from .digraph import orbit_canon_table
from .errors import RandigError, UnsupportedExactError
from .kernels import discretize, kernel_from_json, kernel_to_json
from .models import exact_pmf, model_from_json, model_to_json, sample_masks

SCHEMA_VERSION = 1
ORACLES = ("tv", "invariance", "derd-ard", "derd3-vard", "g-moments",
           "spectral", "constancy", "posdep", "n2", "rnnd-stats")


def _load_model(text: str):
    """Accept inline JSON or a path to a JSON file."""
    text = text.strip()
    if text.startswith("{"):
        return model_from_json(text)
    return model_from_json(json.loads(Path(text).read_text()))


def _load_kernel(text: str):
    text = text.strip()
    data = json.loads(text) if text.startswith("{") else json.loads(Path(text).read_text())
    return kernel_from_json(data)


def _write(path: str | None, content: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(content)
        if not content.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(path).write_text(content)


def _entropy_bits(pmf: models.Pmf) -> float:
    masses = np.array([p for _, p in pmf.items()])
    return float(-(masses * np.log2(masses)).sum()) if masses.size else 0.0


def _top_orbits(pmf: models.Pmf, limit: int = 5) -> list[dict]:
    if pmf.kind != "digraph" or pmf.n > 5:
        return []
    canon = orbit_canon_table(pmf.n).astype(np.int64)
    masses = pmf.dense()
    totals = np.zeros(masses.size)
    np.add.at(totals, canon, masses)
    order = np.argsort(totals)[::-1][:limit]
    counts = np.bincount(canon, minlength=masses.size)
    return [{"canonical": int(c), "orbit_size": int(counts[c]), "total_mass": float(totals[c])}
            for c in order if totals[c] > 0.0]


def cmd_pmf(args) -> int:
    model = _load_model(args.model)
    try:
        pmf = exact_pmf(model)
    except UnsupportedExactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.format == "csv":
        lines = ["digraph_hex,probability" if pmf.kind == "digraph" else "graph_hex,probability"]
        lines += [f"{h},{p}" for h, p in pmf.to_csv_rows()]
        _write(args.out, "\n".join(lines) + "\n")
    else:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "model": model_to_json(model),
            "n": pmf.n,
            "kind": pmf.kind,
            "masses": {h: float(p) for h, p in pmf.to_csv_rows()},
        }
        _write(args.out, json.dumps(payload, indent=2))
    summary = {
        "support_size": pmf.support_size(),
        "entropy_bits": round(_entropy_bits(pmf), 6),
        "top_orbits": _top_orbits(pmf),
    }
    print(json.dumps(summary), file=sys.stderr)
    return 0


def cmd_sample(args) -> int:
    model = _load_model(args.model)
    masks = sample_masks(model, args.seed, args.samples)
    kind = models.model_kind(model)
    if args.aggregate:
        report = _aggregate_samples(model, masks, kind)
        report["inputs"] = {"model": model_to_json(model), "seed": args.seed,
                            "samples": args.samples}
        report["schema_version"] = SCHEMA_VERSION
        _write(args.out, json.dumps(report, indent=2))
        return 0
    from .digraph import Digraph, Graph  # local: only needed for text form

    lines = []
    for mask in masks:
        obj = Digraph(model.n, int(mask)) if kind == "digraph" else Graph(model.n, int(mask))
        lines.append(obj.to_text())
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def _aggregate_samples(model, masks: np.ndarray, kind: str) -> dict:
    from .digraph import arc_slot_pairs, edge_slot_pairs, symmetric_pair_counts

    pairs = arc_slot_pairs(model.n) if kind == "digraph" else edge_slot_pairs(model.n)
    freq = {}
    for s, (i, j) in enumerate(pairs):
        freq[f"({i},{j})"] = float(((masks >> np.uint64(s)) & np.uint64(1)).mean())
    report = {"arc_frequency" if kind == "digraph" else "edge_frequency": freq}
    if kind == "digraph":
        n_s = symmetric_pair_counts(model.n, masks)
        report["n_s_histogram"] = {str(k): int(v) for k, v in
                                   enumerate(np.bincount(n_s)) if v}
    return report


def _report(args, name: str, inputs: dict, computed, expected, tolerance, passed: bool) -> int:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "oracle": name,
        "inputs": inputs,
        "computed": computed,
        "expected": expected,
        "tolerance": tolerance,
        "pass": bool(passed),
    }
    _write(getattr(args, "out", None), json.dumps(payload, indent=2))
    return 0 if passed else 1


def cmd_oracle(args) -> int:
    name = args.oracle_name
    if name == "tv":
        p1 = exact_pmf(_load_model(args.model))
        p2 = exact_pmf(_load_model(args.model2))
        tv = analysis.total_variation(p1, p2)
        expected = args.expected
        passed = True if expected is None else abs(tv - expected) <= args.tol
        return _report(args, name, {"model": args.model, "model2": args.model2},
                       tv, expected, args.tol, passed)
    if name == "invariance":
        model = _load_model(args.model)
        rep = analysis.invariance_check(exact_pmf(model), tol=args.tol)
        return _report(args, name, {"model": model_to_json(model)},
                       {"worst_spread": rep.worst_orbit.spread,
                        "worst_orbit_canonical": rep.worst_orbit.canonical_mask},
                       {"max_spread": 0.0}, args.tol, rep.invariant)
    if name == "derd-ard":
        params = analysis.derd_ard_params(args.pe)
        if params.degenerate:
            return _report(args, name, {"p_e": args.pe, "n": args.n},
                           {"p_d": params.p_d, "p_a": params.p_a, "degenerate": True},
                           "p_d < 1", args.tol, False)
        tv = analysis.total_variation(
            exact_pmf(models.Derd(args.n, args.pe, params.p_d)),
            exact_pmf(models.Ard(args.n, params.p_a)))
        return _report(args, name, {"p_e": args.pe, "n": args.n,
                                    "p_d": params.p_d, "p_a": params.p_a},
                       tv, 0.0, args.tol, tv <= args.tol)
    if name == "derd3-vard":
        return _oracle_derd3_vard(args)
    if name == "g-moments":
        rep = analysis.g_moment_checks(args.pd, seed=args.seed)
        checks = [abs(rep.single[0] - rep.single[1]) <= 1e-3,
                  abs(rep.chain[0] - rep.chain[1]) <= 4.0 * rep.chain_se,
                  abs(rep.cycle[0] - rep.cycle[1]) <= 4.0 * rep.cycle_se]
        return _report(args, name, {"p_d": args.pd, "seed": args.seed,
                                    "grid": rep.grid, "mc_samples": rep.mc_samples},
                       {"single": rep.single[0], "chain": rep.chain[0], "cycle": rep.cycle[0]},
                       {"single": rep.single[1], "chain": rep.chain[1], "cycle": rep.cycle[1]},
                       {"single": 1e-3, "chain": 4.0 * rep.chain_se,
                        "cycle": 4.0 * rep.cycle_se},
                       all(checks))
    if name == "spectral":
        return _oracle_spectral(args)
    if name == "constancy":
        kernel = _resolve_finite_kernel(args)
        rep = analysis.kernel_product_constancy(kernel, tol=args.tol)
        computed = {"phi_prod": rep.phi_prod_constant, "comp_prod": rep.comp_prod_constant,
                    "sum": rep.sum_constant, "mean_phi_prod": rep.mean_phi_prod,
                    "mean_comp_prod": rep.mean_comp_prod, "mean_sum": rep.mean_sum}
        if args.expect_products is not None:
            a, b = args.expect_products
            expected = {"phi_prod": a * b, "comp_prod": (1 - a) * (1 - b), "sum": a + b}
            passed = (rep.phi_prod_constant is not None
                      and abs(rep.phi_prod_constant - expected["phi_prod"]) <= args.tol
                      and rep.comp_prod_constant is not None
                      and abs(rep.comp_prod_constant - expected["comp_prod"]) <= args.tol
                      and rep.sum_constant is not None
                      and abs(rep.sum_constant - expected["sum"]) <= args.tol)
        elif args.expect_none:
            expected = {"phi_prod": None, "comp_prod": None}
            passed = rep.phi_prod_constant is None and rep.comp_prod_constant is None
        else:
            expected = None
            passed = True
        return _report(args, name, {"kernel": kernel_to_json(kernel)}, computed, expected,
                       args.tol, passed)
    if name == "posdep":
        model = _load_model(args.model)
        rep = analysis.positive_dependence_check(model, args.m, n_samples=args.samples,
                                                 seed=args.seed)
        return _report(args, name,
                       {"model": model_to_json(model), "m": args.m,
                        "samples": args.samples, "seed": args.seed},
                       {"lhs": rep.lhs.value, "rhs": rep.rhs_value,
                        "equality": rep.equality, "combined_se": rep.combined_se},
                       "lhs >= rhs - 4se", 4.0, rep.holds)
    if name == "n2":
        rep = analysis.n2_classify(args.p1, args.p2)
        return _report(args, name, {"p1": args.p1, "p2": args.p2},
                       {"degenerate": rep.degenerate, "ard_p_a": rep.ard_p_a,
                        "derd_p_e": rep.derd_p_e, "derd_p_d": rep.derd_p_d,
                        "derd_in_range": rep.derd_in_range},
                       None, None, True)
    if name == "rnnd-stats":
        return _oracle_rnnd_stats(args)
    print(f"error: unknown oracle {name!r}", file=sys.stderr)
    return 2


def _oracle_derd3_vard(args) -> int:
    kernel = analysis.derd3_vard_kernel(args.pe, args.pd, n=args.n)
    target = exact_pmf(models.Derd(args.n, args.pe, args.pd)).dense()
    masks = sample_masks(models.Vard(args.n, kernel), args.seed, args.samples)
    freq = np.bincount(masks.astype(np.int64), minlength=target.size) / args.samples
    bands = 4.0 * np.sqrt(target * (1.0 - target) / args.samples)
    worst = float(np.abs(freq - target).max())
    passed = bool(np.all(np.abs(freq - target) <= bands))
    return _report(args, "derd3-vard",
                   {"p_e": args.pe, "p_d": args.pd, "n": args.n,
                    "samples": args.samples, "seed": args.seed},
                   {"worst_abs_dev": worst}, "all masses within 4se", "4se", passed)


def _resolve_finite_kernel(args):
    kernel = _load_kernel(args.kernel)
    if not hasattr(kernel, "weights"):
        kernel = discretize(kernel, args.discretize)
    return kernel


def _oracle_spectral(args) -> int:
    if args.kernel:
        kernels = [_resolve_finite_kernel(args)]
    else:
        from . import rng as rngmod
        from .kernels import FiniteKernel

        kernels = []
        for i in range(args.count):
            g = rngmod.stream(args.seed, "spectral", i)
            size = int(g.integers(2, args.atoms + 1))
            raw = g.random((size, size))
            w = g.random(size) + 0.05
            kernels.append(FiniteKernel(weights=w / w.sum(), phi=(raw + raw.T) / 2.0))
    worst = 0.0
    for kernel in kernels:
        rep = analysis.spectral_cycle_moment(kernel)
        worst = max(worst, rep.abs_diff)
    return _report(args, "spectral",
                   {"kernels": len(kernels), "seed": args.seed, "atoms": args.atoms},
                   {"worst_abs_diff": worst}, 0.0, args.tol, worst <= args.tol)


def _oracle_rnnd_stats(args) -> int:
    model = _load_model(args.model)
    if not isinstance(model, rnnd.Rnnd):
        print("error: rnnd-stats needs a nearest-neighbor model", file=sys.stderr)
        return 2
    stats = rnnd.rnnd_stats(model, args.samples, args.seed)
    n, k = model.n, model.rule.max_rank
    marginal_target = k / (n - 1)
    joint_target = k * (k - 1) / ((n - 1) * (n - 2))
    checks = [
        abs(stats.arc_marginal_est.value - marginal_target)
        <= 4.0 * max(stats.arc_marginal_est.std_error, 1e-12),
        abs(stats.joint_pair_est.value - joint_target)
        <= 4.0 * max(stats.joint_pair_est.std_error, 1e-12),
        stats.out_degree_min == model.rule.out_degree,
        stats.out_degree_max == model.rule.out_degree,
    ]
    return _report(args, "rnnd-stats",
                   {"model": model_to_json(model), "samples": args.samples, "seed": args.seed},
                   {"arc_marginal": stats.arc_marginal_est.value,
                    "joint_pair": stats.joint_pair_est.value,
                    "out_degree_min": stats.out_degree_min,
                    "out_degree_max": stats.out_degree_max,
                    "in_degree_max": stats.in_degree_max,
                    "n_s_histogram": {str(kk): v for kk, v in stats.n_s_histogram.items()}},
                   {"arc_marginal": marginal_target, "joint_pair": joint_target,
                    "out_degree": model.rule.out_degree},
                   "4se", all(checks))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="randig",
                                     description="random digraph models and oracles")
    sub = parser.add_subparsers(dest="command", required=True)

    p_pmf = sub.add_parser("pmf", help="write the exact pmf of a model")
    p_pmf.add_argument("--model", required=True, help="model JSON (inline or path)")
    p_pmf.add_argument("--out", default=None, help="output path (default stdout)")
    p_pmf.add_argument("--format", choices=("csv", "json"), default="csv")
    p_pmf.set_defaults(func=cmd_pmf)

    p_sample = sub.add_parser("sample", help="stream seeded samples")
    p_sample.add_argument("--model", required=True)
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.add_argument("--samples", type=int, default=1)
    p_sample.add_argument("--out", default=None)
    p_sample.add_argument("--aggregate", action="store_true",
                          help="emit arc frequencies and symmetric-pair counts instead")
    p_sample.set_defaults(func=cmd_sample)

    p_oracle = sub.add_parser("oracle", help="run a named check and report pass/fail")
    p_oracle.add_argument("oracle_name", choices=ORACLES)
    p_oracle.add_argument("--model", help="model JSON (inline or path)")
    p_oracle.add_argument("--model2", help="second model for tv")
    p_oracle.add_argument("--kernel", help="kernel JSON (inline or path)")
    p_oracle.add_argument("--discretize", type=int, default=64,
                          help="grid size when a continuous kernel needs atoms")
    p_oracle.add_argument("--n", type=int, default=3)
    p_oracle.add_argument("--m", type=int, default=2)
    p_oracle.add_argument("--pe", type=float)
    p_oracle.add_argument("--pd", type=float)
    p_oracle.add_argument("--p1", type=float)
    p_oracle.add_argument("--p2", type=float)
    p_oracle.add_argument("--expected", type=float, default=None)
    p_oracle.add_argument("--expect-products", nargs=2, type=float, default=None,
                          metavar=("A", "B"))
    p_oracle.add_argument("--expect-none", action="store_true")
    p_oracle.add_argument("--seed", type=int, default=0)
    p_oracle.add_argument("--samples", type=int, default=10 ** 5)
    p_oracle.add_argument("--count", type=int, default=20, help="random kernels for spectral")
    p_oracle.add_argument("--atoms", type=int, default=16)
    p_oracle.add_argument("--tol", type=float, default=None)
    p_oracle.add_argument("--out", default=None)
    p_oracle.set_defaults(func=cmd_oracle)
    return parser


_DEFAULT_TOLS = {"tv": 1e-12, "invariance": 1e-12, "derd-ard": 1e-12,
                 "spectral": 1e-10, "constancy": 1e-12}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "tol", None) is None and getattr(args, "oracle_name", None):
        args.tol = _DEFAULT_TOLS.get(args.oracle_name, 1e-12)
    try:
        return args.func(args)
    except RandigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
