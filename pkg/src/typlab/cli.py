"""Command-line front end.

One subcommand per invocation.  Machine-readable JSON goes to stdout,
an aligned table to stderr, and experiment subcommands additionally
write the sweep CSV.  Exit codes: 0 on success, 1 on any error (with
a diagnostic naming the offending input), 2 when a sweep produced a
zero-acceptance row.
"""

import argparse
import json
import sys

from .empirical import load_sequences
from .errors import TyplabError
from .experiments import (
    ExperimentConfig,
    run_config,
    run_semicontinuity,
    shortcut_family,
    write_sweep_csv,
)
from .measures import entropy, kl_divergence, pinsker_gap, variational_distance
from .model import load_model, load_pmf
from .typicality import is_typical

RATE_VARIANTS = ("theorem1", "corollary1", "lemma2", "lemma3", "lemma5")


def _parse_grid(text, flag):
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise TyplabError(
            "%s expects comma-separated integers, got %r" % (flag, text)
        ) from None
    if not values:
        raise TyplabError("%s names an empty grid" % flag)
    # grid order carries no meaning: each size is computed from the same
    # per-trial streams, so normalize here instead of bothering the user
    return sorted(set(values))


def _check_seed(seed):
    if not 0 <= seed < 1 << 64:
        raise TyplabError("--seed must fit in an unsigned 64-bit integer")
    return seed


def _emit(payload):
    sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _table(header, rows):
    """Aligned text table on stderr; every cell already a string."""
    widths = [len(h) for h in header]
    for row in rows:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()
    ]
    for row in rows:
        lines.append(
            "  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
        )
    sys.stderr.write("\n".join(lines) + "\n")


def _sweep_table(rows):
    header = (
        "variant", "n", "gamma", "eta", "trials", "accepted",
        "successes", "rate", "ci_low", "ci_high", "note",
    )
    body = [
        (
            r.variant,
            str(r.n),
            "%.6g" % r.gamma,
            "%.6g" % r.eta,
            str(r.trials),
            str(r.accepted),
            str(r.successes),
            "%.4f" % r.rate,
            "%.4f" % r.ci_low,
            "%.4f" % r.ci_high,
            "zero-acceptance" if r.flagged else "",
        )
        for r in rows
    ]
    _table(header, body)


def _finish_rate_sweep(config, out_path):
    result = run_config(config)
    write_sweep_csv(result, out_path)
    rows = sorted(result.rows, key=lambda r: (r.variant, r.n))
    _emit(
        {
            "config": config.to_json(),
            "rows": [r.to_json() for r in rows],
            "csv": out_path,
        }
    )
    _sweep_table(rows)
    return 2 if result.flagged else 0


def cmd_measure(args):
    paths = args.model
    if not 1 <= len(paths) <= 2:
        raise TyplabError(
            "measure takes one or two --model files, got %d" % len(paths)
        )
    dists = [load_pmf(path) for path in paths]
    payload = {
        "models": list(paths),
        "entropy": [entropy(d) for d in dists],
    }
    if len(dists) == 2:
        payload["kl_divergence"] = kl_divergence(dists[0], dists[1])
        payload["variational_distance"] = variational_distance(
            dists[0], dists[1]
        )
        payload["pinsker_gap"] = pinsker_gap(dists[0], dists[1])
    _emit(payload)
    rows = [
        ("entropy(%s)" % path, "%.9g" % h)
        for path, h in zip(paths, payload["entropy"])
    ]
    for key in ("kl_divergence", "variational_distance", "pinsker_gap"):
        if key in payload:
            rows.append((key, "%.9g" % payload[key]))
    _table(("quantity", "value"), rows)
    return 0


def cmd_typical(args):
    model = load_model(args.model)
    seqs = load_sequences(args.seq)
    target = model
    if args.variant == "unified2":
        target = model.pair_model(args.coords or "YZ")
    elif args.variant == "unified1":
        target = model.single_model(args.coords or "Z")
    elif args.coords:
        raise TyplabError(
            "--coords only applies to the unified2 and unified1 variants"
        )
    member, report = is_typical(seqs, target, args.gamma, args.variant)
    _emit(report.to_json())
    terms = report.to_json()["terms"]
    rows = [(label, "%.9g" % value) for label, value in terms.items()]
    rows.append(("total", "%.9g" % report.total))
    rows.append(("member", str(bool(member)).lower()))
    _table(("term", "value"), rows)
    return 0


def _rate_config(args, variant):
    return ExperimentConfig(
        model=args.model,
        n_grid=_parse_grid(args.n, "--n"),
        gamma=args.gamma,
        eta=args.eta,
        trials=args.trials,
        seed=_check_seed(args.seed),
        variant=variant,
    )


def cmd_markov_lemma(args):
    return _finish_rate_sweep(_rate_config(args, "theorem1"), args.out)


def cmd_corollary(args):
    return _finish_rate_sweep(_rate_config(args, "corollary1"), args.out)


def cmd_lemmas(args):
    return _finish_rate_sweep(_rate_config(args, args.variant), args.out)


def _semi_table(rows):
    header = (
        "m", "single_v", "single_h", "pair_v", "pair_joint_dh",
        "pair_marginal_dh",
    )
    body = [
        (
            str(r.m),
            "%.6g" % r.single_v,
            "%.9g" % r.single_h,
            "%.6g" % r.pair_v,
            "%.6g" % r.pair_joint_dh,
            "%.6g" % r.pair_marginal_dh,
        )
        for r in rows
    ]
    _table(header, body)


def cmd_semicontinuity(args):
    m_grid = _parse_grid(args.n, "--n") if args.n else None
    rows = run_semicontinuity(m_grid)
    payload = {"rows": [r.to_json() for r in rows]}
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        payload["json"] = args.out
    _emit(payload)
    _semi_table(rows)
    return 0


def cmd_sweep(args):
    config = ExperimentConfig.load(args.config)
    if config.variant in RATE_VARIANTS:
        return _finish_rate_sweep(config, args.out)
    if config.variant == "semicontinuity":
        rows = run_semicontinuity(config.n_grid)
        payload = {
            "config": config.to_json(),
            "rows": [r.to_json() for r in rows],
        }
        table = _semi_table
    else:
        rows = shortcut_family(
            seed=config.seed,
            t_grid=(config.gamma,),
            n_directions=config.trials,
        )
        payload = {"config": config.to_json(), "rows": rows}

        def table(rows):
            _table(
                ("t", "direction", "two_term", "max_total"),
                [
                    (
                        "%.6g" % r["t"],
                        str(r["direction"]),
                        "%.6g" % r["two_term"],
                        "%.6g" % r["max_total"],
                    )
                    for r in rows
                ],
            )

    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    _emit(payload)
    table(rows)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="typlab",
        description="Unified typicality scores and chain-law experiments.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("measure", help="entropy, divergence, distance")
    p.add_argument(
        "--model", action="append", required=True, metavar="PATH",
        help="distribution file; repeat once for divergence/distance",
    )
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("typical", help="score sequences against a model")
    p.add_argument("--model", required=True, metavar="PATH")
    p.add_argument("--seq", required=True, metavar="PATH")
    p.add_argument("--gamma", required=True, type=float)
    p.add_argument(
        "--variant",
        default="unified3",
        choices=("unified3", "unified2", "unified1", "two_term", "weak"),
    )
    p.add_argument(
        "--coords", default=None,
        help="coordinate subset for the marginal variants (default YZ/Z)",
    )
    p.set_defaults(func=cmd_typical)

    def sweep_flags(p, with_variant=None):
        p.add_argument("--model", required=True, metavar="PATH")
        p.add_argument("--gamma", required=True, type=float)
        p.add_argument("--eta", type=float, default=None)
        p.add_argument(
            "--n", required=True, metavar="N1,N2,...",
            help="comma-separated sample sizes",
        )
        p.add_argument("--trials", required=True, type=int)
        p.add_argument("--seed", required=True, type=int)
        p.add_argument("--out", required=True, metavar="CSV")
        if with_variant:
            p.add_argument(
                "--variant", required=True, choices=with_variant
            )

    p = sub.add_parser(
        "markov-lemma", help="joint typicality acceptance sweep"
    )
    sweep_flags(p)
    p.set_defaults(func=cmd_markov_lemma)

    p = sub.add_parser(
        "corollary", help="pair projection acceptance sweep"
    )
    sweep_flags(p)
    p.set_defaults(func=cmd_corollary)

    p = sub.add_parser(
        "lemmas", help="concentration and identity sweeps"
    )
    sweep_flags(p, with_variant=("lemma2", "lemma3", "lemma5"))
    p.set_defaults(func=cmd_lemmas)

    p = sub.add_parser(
        "semicontinuity", help="entropy semicontinuity families"
    )
    p.add_argument(
        "--n", default=None, metavar="M1,M2,...",
        help="family index grid (default powers of 2 up to 16384)",
    )
    p.add_argument("--out", default=None, metavar="JSON")
    p.set_defaults(func=cmd_semicontinuity)

    p = sub.add_parser("sweep", help="run a sweep from a config file")
    p.add_argument("--config", required=True, metavar="PATH")
    p.add_argument("--out", required=True, metavar="PATH")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if not exc.code else 1
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except TyplabError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 1
    except (OSError, ValueError, TypeError) as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
