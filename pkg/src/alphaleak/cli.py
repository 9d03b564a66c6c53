"""Command-line surface.

Loads distributions, channels, and distortion specs from the JSON schemas
defined by the library, runs the requested operation over a single order
or an alpha sweep, and writes CSV (measures, capacity, strategy,
avg-binary sweeps) or JSON (PUT solutions).  Values are printed with 12
significant digits and no randomness, so outputs are reproducible
bit-for-bit across runs with the same configuration.

Exit codes: 0 success, 2 validation or input error, 3 solver
non-convergence, 4 model incompatibility (f(0) = +inf under hard
distortion).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, IncompatibleGeneratorError, ValidationError
from .leakage import (
    binary_maximal_alpha_leakage,
    maximal_alpha_leakage,
    min_expected_alpha_loss,
    optimal_strategy,
)
from .measures import (
    LogBase,
    arimoto_cond_entropy,
    custom_generator,
    hellinger_generator,
    kl_generator,
    renyi_entropy,
)
from .leakage import alpha_leakage
from .prob import AlphaOrder, Channel, Dist, Joint, as_order, conditional_of
from .put import (
    DistortionSpec,
    avg_hamming_binary_put,
    put_max_alpha_leakage,
    put_max_f_leakage,
)
from .datasets import hamming_put, representative_dataset, type_distance_put

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NO_CONVERGENCE = 3
EXIT_INCOMPATIBLE = 4


@dataclass
class RunConfig:
    alphas: list[AlphaOrder]
    base: LogBase = LogBase.NATS
    tol: float = 1e-10
    max_iter: int = 100_000
    seed: int = 0  # reserved for seeded test-fixture generation
    output_path: str | None = None

    def __post_init__(self):
        if self.tol <= 0:
            raise ValidationError("tol must be positive")
        values = [a.value for a in self.alphas]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValidationError("alpha sweep must be strictly increasing")


def _parse_alpha_token(token: str) -> AlphaOrder:
    return as_order(token)


def parse_sweep(text: str) -> list[AlphaOrder]:
    """Sweep syntax: 'start:stop:step', a comma list, or the single tokens
    '1' and 'inf' (the two continuous extensions are distinct code paths
    and must be nameable)."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError(f"sweep {text!r} is not start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ValidationError(f"sweep {text!r} must increase")
        count = int(math.floor((stop - start) / step + 1e-12)) + 1
        return [AlphaOrder(start + k * step) for k in range(count)]
    return [_parse_alpha_token(tok) for tok in text.split(",") if tok]


def _alpha_text(order: AlphaOrder) -> str:
    return "inf" if order.is_inf else f"{order.value:.12g}"


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"input file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}")


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header: list[str], rows: list[list[str]]) -> str:
    lines = [",".join(header)] + [",".join(row) for row in rows]
    return "\n".join(lines) + "\n"


def _config_from_args(args) -> RunConfig:
    if getattr(args, "alpha_sweep", None):
        alphas = parse_sweep(args.alpha_sweep)
    elif getattr(args, "alpha", None):
        alphas = [_parse_alpha_token(args.alpha)]
    else:
        raise ValidationError("provide --alpha or --alpha-sweep")
    return RunConfig(
        alphas=alphas,
        base=LogBase.parse(args.base),
        tol=args.tol,
        max_iter=args.max_iter,
        output_path=args.out,
    )


def cmd_measures(args) -> int:
    config = _config_from_args(args)
    joint = Joint.from_json(_load_json(args.joint))
    rows = []
    for order in config.alphas:
        order.require_at_least_one("measures sweep")
        rows.append(
            [
                _alpha_text(order),
                _fmt(config.base.from_nats(renyi_entropy(joint.row_marginal(), order))),
                _fmt(config.base.from_nats(arimoto_cond_entropy(joint, order))),
                _fmt(config.base.from_nats(alpha_leakage(joint, order))),
                _fmt(min_expected_alpha_loss(joint, order)),
            ]
        )
    header = ["alpha", "renyi_entropy_X", "arimoto_cond_entropy", "alpha_leakage", "min_expected_alpha_loss"]
    _emit(_csv(header, rows), config.output_path)
    return EXIT_OK


def cmd_capacity(args) -> int:
    config = _config_from_args(args)
    channels = [Channel.from_json(_load_json(path)) for path in args.channel]
    if len(channels) not in (1, 2):
        raise ValidationError("capacity takes one or two channel files")

    def solve(ch: Channel, order: AlphaOrder):
        if order.is_one:
            print("note: alpha = 1 capacity uses a uniform input distribution", file=sys.stderr)
            return maximal_alpha_leakage(
                ch, order, prior_for_one=Dist.uniform(ch.input_alphabet),
                tol=config.tol, max_iter=config.max_iter,
            )
        return maximal_alpha_leakage(ch, order, tol=config.tol, max_iter=config.max_iter)

    worst_residual = 0.0
    rows = []
    if len(channels) == 1:
        ch = channels[0]
        is_binary = ch.shape == (2, 2)
        header = ["alpha", "value", "kkt_residual"] + [
            f"optimal_input_{lab}" for lab in ch.input_alphabet.labels
        ]
        if is_binary:
            header += ["closed_form", "closed_form_gap"]
        for order in config.alphas:
            order.require_at_least_one("capacity sweep")
            res = solve(ch, order)
            worst_residual = max(worst_residual, res.kkt_residual)
            row = [
                _alpha_text(order),
                _fmt(config.base.from_nats(res.value)),
                _fmt(res.kkt_residual),
            ] + [_fmt(v) for v in res.optimal_input.p]
            if is_binary:
                if order.is_finite_gt_one:
                    closed = binary_maximal_alpha_leakage(ch.rows[0, 1], ch.rows[1, 0], order.value)
                    row += [_fmt(config.base.from_nats(closed)), _fmt(abs(closed - res.value))]
                else:
                    row += ["", ""]
            rows.append(row)
    else:
        header = ["alpha", "value_1", "value_2", "diff"]
        diffs: list[tuple[AlphaOrder, float]] = []
        for order in config.alphas:
            order.require_at_least_one("capacity sweep")
            r1, r2 = (solve(ch, order) for ch in channels)
            worst_residual = max(worst_residual, r1.kkt_residual, r2.kkt_residual)
            diffs.append((order, r1.value - r2.value))
            rows.append(
                [
                    _alpha_text(order),
                    _fmt(config.base.from_nats(r1.value)),
                    _fmt(config.base.from_nats(r2.value)),
                    _fmt(config.base.from_nats(r1.value - r2.value)),
                ]
            )
        for (o1, d1), (o2, d2) in zip(diffs, diffs[1:]):
            if d1 * d2 < 0:
                print(
                    f"crossing: leakage ordering flips between alpha={_alpha_text(o1)} "
                    f"and alpha={_alpha_text(o2)}",
                    file=sys.stderr,
                )
    _emit(_csv(header, rows), config.output_path)
    if worst_residual > config.tol:
        print(f"warning: certificate residual {worst_residual:.3e} above tol", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_strategy(args) -> int:
    config = _config_from_args(args)
    joint = Joint.from_json(_load_json(args.joint))
    posterior = conditional_of(joint.swapped()).conditional
    header = ["alpha", "output", "input", "posterior", "strategy"]
    rows = []
    for order in config.alphas:
        order.require_at_least_one("strategy sweep")
        tilted = optimal_strategy(posterior, order)
        for yi, y in enumerate(posterior.input_alphabet.labels):
            for xi, x in enumerate(posterior.output_alphabet.labels):
                rows.append(
                    [
                        _alpha_text(order),
                        y,
                        x,
                        _fmt(posterior.rows[yi, xi]),
                        _fmt(tilted.rows[yi, xi]),
                    ]
                )
    _emit(_csv(header, rows), config.output_path)
    return EXIT_OK


def _put_json_summary(payload: dict, path: str | None, summary: str) -> None:
    _emit(json.dumps(payload, indent=2) + "\n", path)
    print(summary, file=sys.stderr)


def _named_generator(name: str, order: AlphaOrder):
    if name == "kl":
        return kl_generator()
    if name == "hellinger":
        if not order.is_finite_gt_one:
            raise ValidationError("the Hellinger generator needs a finite --alpha > 1")
        return hellinger_generator(order.value)
    if name == "reverse-kl":
        return custom_generator(
            lambda t: -math.log(t) if t > 0 else math.inf,
            f_at_zero=math.inf,
            slope_at_inf=0.0,
            label="reverse-kl",
        )
    raise ValidationError(f"unknown generator {name!r}")


def cmd_put_hard(args) -> int:
    config = _config_from_args(args)
    spec = DistortionSpec.from_json(_load_json(args.spec))
    if len(config.alphas) != 1:
        raise ValidationError("put hard expects a single --alpha")
    order = config.alphas[0].require_at_least_one("put hard")
    if args.generator != "alpha":
        value, solution = put_max_f_leakage(spec, _named_generator(args.generator, order), config.tol)
        unit = ""
    else:
        prior = None
        if args.prior:
            prior = Dist.from_json(_load_json(args.prior))
        elif order.is_one:
            prior = Dist.uniform(spec.input_alphabet)
            print("note: alpha = 1 tradeoff uses a uniform input distribution", file=sys.stderr)
        value, solution = put_max_alpha_leakage(spec, order, prior_for_one=prior, tol=config.tol)
        value = config.base.from_nats(value)
        unit = f" {config.base.value}"
    payload = solution.to_json()
    payload["alpha"] = _alpha_text(order)
    payload["generator"] = args.generator
    summary = (
        f"hard-distortion PUT at alpha={_alpha_text(order)} "
        f"[{args.generator}]: {value:.12g}{unit} "
        f"(q*={solution.q_star:.12g}, duality gap {solution.duality_gap:.3e})"
    )
    _put_json_summary(payload, config.output_path, summary)
    return EXIT_OK


def cmd_put_types(args) -> int:
    base = LogBase.parse(args.base)
    result = type_distance_put(args.n, args.m)
    payload = {
        "n": args.n,
        "m": args.m,
        "value_nats": result.value,
        "value_bits": result.value / math.log(2.0),
        "index_set": list(result.index_set.members),
        "type_map": {str(i): j for i, j in sorted(result.type_map.items())},
        "representatives": {
            str(j): representative_dataset(args.n, j) for j in result.index_set.members
        },
    }
    summary = (
        f"type-distance PUT(n={args.n}, m={args.m}): {base.from_nats(result.value):.12g} "
        f"{base.value}; output type classes {list(result.index_set.members)}"
    )
    _put_json_summary(payload, args.out, summary)
    return EXIT_OK


def cmd_put_hamming(args) -> int:
    base = LogBase.parse(args.base)
    result = hamming_put(args.n, args.m, args.q)
    payload = {
        "n": args.n,
        "m": args.m,
        "q": args.q,
        "value_nats": result.value,
        "value_bits": result.value / math.log(2.0),
        "ball_size": result.ball_size,
    }
    summary = (
        f"Hamming PUT(n={args.n}, m={args.m}, q={args.q}): "
        f"{base.from_nats(result.value):.12g} {base.value}; "
        f"uniform mechanism over balls of {result.ball_size} datasets"
    )
    _put_json_summary(payload, args.out, summary)
    return EXIT_OK


def cmd_put_avg_binary(args) -> int:
    config = _config_from_args(args)
    header = ["alpha", "value", "rho1", "rho2", "guess_prob"]
    rows = []
    for order in config.alphas:
        if not order.is_finite_gt_one:
            raise ValidationError("avg-binary requires finite alpha > 1")
        res = avg_hamming_binary_put(args.p, args.D, order.value, grid=args.grid,
                                     refine_iters=args.refine_iters)
        rows.append(
            [
                _alpha_text(order),
                _fmt(config.base.from_nats(res.value)),
                _fmt(res.rho1),
                _fmt(res.rho2),
                _fmt(res.guess_prob),
            ]
        )
    _emit(_csv(header, rows), config.output_path)
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser, sweep: bool = True) -> None:
    if sweep:
        parser.add_argument("--alpha", help="single order: a float, '1', or 'inf'")
        parser.add_argument("--alpha-sweep", help="sweep: start:stop:step or comma list")
    parser.add_argument("--base", default="nats", help="output unit: nats or bits")
    parser.add_argument("--tol", type=float, default=1e-10, help="certificate tolerance")
    parser.add_argument("--max-iter", type=int, default=100_000, help="solver iteration cap")
    parser.add_argument("--out", default=None, help="write output to this path instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alphaleak",
        description="Tunable information-leakage measures and hard-distortion "
        "privacy-utility tradeoffs on finite alphabets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measures", help="per-alpha information measures of a joint")
    p.add_argument("joint", help="joint pmf JSON file")
    _add_common(p)
    p.set_defaults(func=cmd_measures)

    p = sub.add_parser("capacity", help="maximal alpha-leakage of one or two channels")
    p.add_argument("channel", nargs="+", help="channel JSON file(s)")
    _add_common(p)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("strategy", help="loss-minimizing estimation strategies of a joint")
    p.add_argument("joint", help="joint pmf JSON file")
    _add_common(p)
    p.set_defaults(func=cmd_strategy)

    put = sub.add_parser("put", help="hard-distortion privacy-utility tradeoffs")
    put_sub = put.add_subparsers(dest="put_mode", required=True)

    p = put_sub.add_parser("hard", help="generic distortion spec")
    p.add_argument("spec", help="distortion spec JSON file")
    p.add_argument("--prior", default=None, help="input distribution JSON (alpha = 1)")
    p.add_argument(
        "--generator",
        default="alpha",
        choices=["alpha", "kl", "hellinger", "reverse-kl"],
        help="privacy measure: maximal alpha-leakage (default) or a maximal f-leakage",
    )
    _add_common(p)
    p.set_defaults(func=cmd_put_hard)

    p = put_sub.add_parser("types", help="binary datasets, type-distance distortion")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--base", default="nats")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_put_types)

    p = put_sub.add_parser("hamming", help="q-ary datasets, Hamming distortion")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--base", default="nats")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_put_hamming)

    p = put_sub.add_parser("avg-binary", help="binary average-Hamming tradeoff sweep")
    p.add_argument("--p", type=float, required=True, help="input Bernoulli parameter")
    p.add_argument("--D", type=float, required=True, help="average distortion bound")
    p.add_argument("--grid", type=int, default=401)
    p.add_argument("--refine-iters", type=int, default=60)
    _add_common(p)
    p.set_defaults(func=cmd_put_avg_binary)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except IncompatibleGeneratorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCOMPATIBLE
    except ConvergenceError as exc:
        print(f"error: {exc} (residual {exc.residual})", file=sys.stderr)
        return EXIT_NO_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
