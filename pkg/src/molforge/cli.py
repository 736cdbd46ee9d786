"""Command-line entry points.

Exit codes: 0 success, 1 config errors, 2 archive I/O failures, 3 anything
else (bad molecules, malformed queries, failed runs). Set MOLFORGE_LOG to a
level name (DEBUG, INFO, ...) to turn on diagnostics.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .archive import ArchiveQuery, ArchiveStore, IOFailureError, MalformedQueryError
from .conductor import ApiConfig, ConfigError, load_config
from .conductor import run as run_conductor
from .exsmiles import ParseError

logger = logging.getLogger(__name__)


def _setup_logging() -> None:
    name = os.environ.get("MOLFORGE_LOG", "WARNING").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(
        level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s"
    )


def _add_query_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--gen-min", type=int, default=None)
    sub.add_argument("--gen-max", type=int, default=None)
    sub.add_argument("--fit-min", type=float, default=None)
    sub.add_argument("--fit-max", type=float, default=None)
    sub.add_argument("--wt-min", type=float, default=None)
    sub.add_argument("--wt-max", type=float, default=None)
    sub.add_argument("--atoms-min", type=int, default=None)
    sub.add_argument("--atoms-max", type=int, default=None)
    sub.add_argument("--substr", default=None, help="genome substring filter")
    sub.add_argument("--limit", type=int, default=None)
    sub.add_argument(
        "--order-by",
        default="generation-asc",
        choices=("generation-asc", "fitness-desc", "weight-asc"),
    )


def _query_from_args(args: argparse.Namespace) -> ArchiveQuery:
    return ArchiveQuery(
        gen_min=args.gen_min,
        gen_max=args.gen_max,
        fit_min=args.fit_min,
        fit_max=args.fit_max,
        wt_min=args.wt_min,
        wt_max=args.wt_max,
        atoms_min=args.atoms_min,
        atoms_max=args.atoms_max,
        substr=args.substr,
        limit=args.limit,
        order_by=args.order_by,
    )


def cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    status = run_conductor(config)
    best = f", best fitness {status.best_fitness:.4f}" if status.best_fitness is not None else ""
    print(f"{status.run_id}: {status.state} at generation {status.generation}{best}")
    if status.state != "finished":
        print(f"reason: {status.reason}", file=sys.stderr)
        if isinstance(status.error, IOFailureError):
            return 2
        if isinstance(status.error, ConfigError):
            return 1
        return 3
    print(f"archive: {config.archive_path}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    api = ApiConfig()
    if args.config is not None:
        config = load_config(args.config)
        if config.api is not None:
            api = config.api
    host = args.host if args.host is not None else api.host
    port = args.port if args.port is not None else api.port
    app = create_app(static_dir=args.ui)
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


def cmd_browse(args: argparse.Namespace) -> int:
    store = ArchiveStore.open(args.archive)
    records = store.search(_query_from_args(args))
    if args.format == "ndjson":
        for record in records:
            print(record.to_json_line())
        return 0
    print(f"{'gen':>4} {'id':>6} {'fitness':>8} {'weight':>8} {'atoms':>5}  molecule")
    for r in records:
        label = r.standard_smiles or r.genome
        print(
            f"{r.generation:>4} {r.chromosome_id:>6} {r.fitness:>8.4f} "
            f"{r.weight:>8.2f} {r.heavy_atoms:>5}  {label}"
        )
    print(f"{len(records)} record(s)")
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    store = ArchiveStore.open(args.archive)
    query = ArchiveQuery(gen_min=args.generation, gen_max=args.generation)
    records = store.search(query)
    if args.format == "smiles":
        lines = [r.standard_smiles for r in records]
    else:
        lines = [r.to_json_line() for r in records]
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write("\n".join(lines) + ("\n" if lines else ""))
        except OSError as e:
            raise IOFailureError(f"cannot write {args.out}: {e}") from e
        print(f"wrote {len(lines)} molecules to {args.out}")
    else:
        for line in lines:
            print(line)
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    print(f"config ok: {config.run_id}")
    print(
        f"  {len(config.table.enabled_heavy_symbols())} enabled elements, "
        f"{len(config.fragments)} fragments, {len(config.leads)} leads"
    )
    print(
        f"  population {config.evolve.population_size}, "
        f"{config.evolve.iterations} iterations, "
        f"{config.evolve.selection_method} selection"
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="molforge", description="evolutionary molecule design engine"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a run headless from a JSON config")
    p.add_argument("config", help="path to the run config file")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("serve", help="start the HTTP steering server")
    p.add_argument(
        "config", nargs="?", default=None,
        help="run config whose api block sets the bind address",
    )
    p.add_argument("--host", default=None, help="override the bind host")
    p.add_argument("--port", type=int, default=None, help="override the bind port")
    p.add_argument("--ui", default=None, help="directory of static UI files to serve at /")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("browse", help="search an archive and print matching records")
    p.add_argument("archive", help="path to a run archive (NDJSON)")
    p.add_argument("--format", choices=("table", "ndjson"), default="table")
    _add_query_flags(p)
    p.set_defaults(func=cmd_browse)

    p = sub.add_parser("export", help="export one generation (or everything)")
    p.add_argument("archive", help="path to a run archive (NDJSON)")
    p.add_argument("--generation", type=int, default=None, help="restrict to one generation")
    p.add_argument("--format", choices=("smiles", "ndjson"), default="smiles")
    p.add_argument("--out", default=None, help="write to a file instead of stdout")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("validate", help="parse-check a run config and everything it references")
    p.add_argument("config", help="path to the run config file")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except IOFailureError as e:
        print(f"archive error: {e}", file=sys.stderr)
        return 2
    except (MalformedQueryError, ParseError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except Exception as e:  # keep the CLI from spraying tracebacks at users
        logger.exception("unhandled failure")
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
