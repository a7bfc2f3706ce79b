"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 data/config error, 3 internal error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, PipelineConfig, load_config
from .dataset import DataError, load_dataset
from .evaluation import evaluate
from .interest import format_profile
from .mining import format_classes, mine_keyword_classes
from .pipeline import PipelineError, build_system, recommend_all, run_pipeline, split_by_time
from .scoring import format_recommendations
from .synthetic import bundled_fixture_dir
from .taxonomy import format_taxonomy
from .training import format_params, parse_params, train_all

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--data", type=Path, default=None, help="directory holding the six TSV files (default: bundled fixture)")
    p.add_argument("--config", type=Path, default=None, help="key = value configuration file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", type=Path, default=None, help="output directory (default: stdout)")
    p.add_argument("--lenient", action="store_true", help="skip malformed input lines instead of failing")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="hybridrec", description="Hybrid follow recommender for microblog data.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("mine", parents=[common], help="mine synonym keyword classes")
    p.add_argument("--sites", type=int)
    p.add_argument("--polling-sites", type=int)
    p.add_argument("--supp", type=float, help="local and global support threshold")
    p.add_argument("--conf", type=float, help="local and global confidence threshold")
    p.add_argument("--max-size", type=int)

    sub.add_parser("classify", parents=[common], help="active / inactive / fake taxonomy")

    p = sub.add_parser("profile", parents=[common], help="merged interest profile of one user")
    p.add_argument("--user", type=int, required=True)

    p = sub.add_parser("train", parents=[common], help="train per-class grading parameters")
    p.add_argument("--beta", type=float)
    p.add_argument("--performance", type=float)
    p.add_argument("--train-omegas", action="store_true", default=None)
    p.add_argument("--time-decay", action="store_true", default=None)

    p = sub.add_parser("recommend", parents=[common], help="top-k recommendations")
    who = p.add_mutually_exclusive_group(required=True)
    who.add_argument("--user", type=int)
    who.add_argument("--all", action="store_true")
    p.add_argument("--k", type=int)
    p.add_argument("--time-decay", action="store_true", default=None)
    p.add_argument("--params", type=Path, help="params file written by `train`")

    p = sub.add_parser("evaluate", parents=[common], help="MAP@k on the held-out time split")
    p.add_argument("--params", type=Path, help="params file written by `train` (default: configured values)")
    p.add_argument("--k", type=int)

    sub.add_parser("pipeline", parents=[common], help="run every stage and write all artifacts")
    return parser


def _config(args) -> PipelineConfig:
    path = args.config
    if path is None and (args.data / "pipeline.conf").is_file():
        path = args.data / "pipeline.conf"
    cfg = load_config(path)
    overrides = {"seed": args.seed}
    if args.command == "mine":
        overrides.update(
            n_sites=args.sites, n_polling_sites=args.polling_sites, max_itemset_size=args.max_size,
            supp_local=args.supp, supp_global=args.supp, conf_local=args.conf, conf_global=args.conf,
        )
    if args.command == "train":
        overrides.update(beta=args.beta, performance=args.performance, train_omegas=args.train_omegas)
    if getattr(args, "time_decay", None):
        overrides["time_decay"] = True
    if getattr(args, "k", None) is not None:
        overrides["k"] = args.k
    try:
        return cfg.with_overrides(**overrides)
    except TypeError as e:
        raise UsageError(str(e)) from None


def _emit(args, name: str, text: str):
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / name).write_text(text, encoding="utf-8")


def _params(args, cfg: PipelineConfig):
    if getattr(args, "params", None) is None:
        return cfg.default_params()
    return parse_params(args.params.read_text(encoding="utf-8"), cfg.lam, cfg.time_decay)


def run(args) -> int:
    if args.data is None:
        args.data = bundled_fixture_dir()
    cfg = _config(args)

    if args.command == "pipeline":
        result = run_pipeline(cfg, args.data, args.out or Path("out"), strict=not args.lenient)
        sys.stdout.write(result.report.summary())
        return EXIT_OK

    dataset = load_dataset(args.data, strict=not args.lenient)
    for msg in dataset.report.messages:
        logging.getLogger("hybridrec").warning("skipped %s", msg)

    if args.command == "mine":
        _emit(args, "classes.tsv", format_classes(mine_keyword_classes(dataset, cfg.mining())))
    elif args.command == "classify":
        _emit(args, "taxonomy.tsv", format_taxonomy(dataset, cfg.taxonomy()))
    elif args.command == "profile":
        system = build_system(dataset, cfg)
        if args.user not in dataset.users:
            raise DataError(f"unknown user id {args.user}")
        _emit(args, f"profile_{args.user}.tsv", format_profile(system.profiles.profile(args.user)))
    elif args.command == "train":
        train, _ = split_by_time(dataset.rec_log, cfg.train_fraction)
        system = build_system(dataset, cfg, history=train)
        run_ = train_all(train, system.scorer, cfg.training(), cfg.default_params())
        _emit(args, "params.tsv", format_params(run_.params))
    elif args.command == "recommend":
        system = build_system(dataset, cfg, _params(args, cfg))
        if args.all:
            recs = recommend_all(system.scorer, cfg.k)
        else:
            if args.user not in dataset.users:
                raise DataError(f"unknown user id {args.user}")
            recs = [system.scorer.recommend(args.user, cfg.k)]
        _emit(args, "recommendations.tsv", format_recommendations(recs))
    elif args.command == "evaluate":
        train, test = split_by_time(dataset.rec_log, cfg.train_fraction)
        system = build_system(dataset, cfg, _params(args, cfg), history=train)
        report = evaluate(system.scorer, test, cfg.k)
        if args.out is not None:
            _emit(args, "evaluation.tsv", report.to_tsv(system.user_classes))
        sys.stdout.write(report.summary())
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # --help exits 0, usage errors exit 1
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except UsageError as e:
        print(f"hybridrec: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ConfigError, FileNotFoundError) as e:
        print(f"hybridrec: {e}", file=sys.stderr)
        return EXIT_DATA
    except PipelineError as e:
        print(f"hybridrec: {e}", file=sys.stderr)
        data_like = isinstance(e.cause, (DataError, ConfigError, FileNotFoundError, KeyError))
        return EXIT_DATA if data_like else EXIT_INTERNAL
    except Exception as e:  # noqa: BLE001
        print(f"hybridrec: internal error: {e!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
