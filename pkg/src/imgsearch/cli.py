"""Command-line harness.

Usage::

    imgsearch build --app APP --input PATH [--input PATH ...] --alpha A --seed S --out FILE
                    [--poly "1*x1^1 + 1*x2^1"] [--width W] [--line-x X]
    imgsearch query FILE 'SPEC'
    imgsearch bench --app {inversion,range,count} --sizes 1024,4096 --alphas 0.6
                    --trials 3 --out results.csv

Applications and their inputs:

``range``, ``preimage``
    JSON ``{"N": 16, "coords": [{"a": 3, "b": 1, "mod": 17}], "widths": [5]}``;
    each coordinate is ``((a*x + b) mod prime) // div mod mod``.
``kpol``
    one file per set, one decimal integer per line; ``--poly`` is a sum of
    terms ``c*x1^e1*x2^e2...`` (default: the plain sum of the variables).
``gapped``
    raw bytes of the text.
``theilsen``, ``triangles``, ``hyperplane``
    one point per line, coordinates separated by spaces.
``collinear``
    two point files and ``--line-x``.

Query specs are whitespace separated ``key=value`` tokens: ``box=lo:hi[,lo:hi]``
(repeat for one box per tuple member), ``k=``, ``y=``, ``z=``, ``gap=lo:hi``,
``op=`` and quoted patterns ``P1="..."``, ``P2="..."`` with backslash escapes.
Range ops: ``search`` (default), ``count``, ``report`` (default when ``k=``
is given).  Preimage ops: ``predecessor``, ``rank``, ``rank_distinct``,
``select``, ``preimage_rank``, ``preimage_select``, ``preimage_median``.

Exit codes: 2 usage or parse error, 3 build failure, 4 I/O error or unreadable
index file, 5 checksum mismatch.
"""

from __future__ import annotations

import argparse
import sys

from . import apps
from .bench import BENCH_APPS, MAX_BENCH_N, run_grid, slopes, write_csv
from .errors import (ArtifactError, BuildFailure, CapacityError, ChecksumError,
                     ConfigurationError, ImgSearchError, InputError)
from .kernels import BACKEND_NAME

EXIT_USAGE, EXIT_BUILD, EXIT_IO, EXIT_CHECKSUM = 2, 3, 4, 5


class UsageError(Exception):
    pass


def _alpha(text: str) -> float:
    try:
        a = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"alpha must be a number, got {text!r}") from None
    if not 0 < a < 1:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {a}")
    return a


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") \
            from None


def _alpha_list(text: str) -> list[float]:
    return [_alpha(v) for v in text.split(",") if v]


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="imgsearch", description="Range queries over function images.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build and save an index")
    b.add_argument("--app", required=True, choices=sorted(apps.APPS))
    b.add_argument("--input", required=True, action="append")
    b.add_argument("--alpha", type=_alpha, default=0.5)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True)
    b.add_argument("--poly")
    b.add_argument("--width", type=int)
    b.add_argument("--line-x", type=int, default=0)

    q = sub.add_parser("query", help="answer one query against a saved index")
    q.add_argument("index")
    q.add_argument("spec")

    r = sub.add_parser("bench", help="measure space and query evaluations over a size grid")
    r.add_argument("--app", required=True, choices=BENCH_APPS)
    r.add_argument("--sizes", type=_int_list, required=True)
    r.add_argument("--alphas", type=_alpha_list, default=[0.6])
    r.add_argument("--trials", type=int, default=3)
    r.add_argument("--queries", type=int, default=50)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out", required=True)
    return p


def cmd_build(args) -> int:
    data, built = apps.build_artifact(args.app, args.input, args.alpha, args.seed,
                                      poly=args.poly, width=args.width, line_x=args.line_x)
    # reload before writing so a saved file always parses
    apps.load_artifact(data)
    with open(args.out, "wb") as fh:
        fh.write(data)
    h = built.header
    print(f"app={h.app} N={h.N} d={h.d} W={h.W} alpha={h.alpha} seed={h.seed} "
          f"backend={BACKEND_NAME}")
    print(f"space_words={built.space_words} artifact_bytes={len(data)}")
    return 0


def cmd_query(args) -> int:
    with open(args.index, "rb") as fh:
        data = fh.read()
    header, index = apps.load_artifact(data)
    for line in apps.run_query(header, index, args.spec):
        print(line)
    return 0


def cmd_bench(args) -> int:
    if any(n < 2 or n > MAX_BENCH_N for n in args.sizes):
        raise UsageError(f"sizes must lie in [2, {MAX_BENCH_N}]")
    if args.trials < 1 or args.queries < 1:
        raise UsageError("trials and queries must be positive")
    cells = run_grid(args.app, args.sizes, args.alphas, args.trials, args.queries, args.seed)
    write_csv(cells, args.out)
    for (app, alpha), fit in slopes(cells).items():
        parts = " ".join(f"slope_{k}={v:.3f}" for k, v in fit.items())
        print(f"app={app} alpha={alpha} {parts}")
    return 0


COMMANDS = {"build": cmd_build, "query": cmd_query, "bench": cmd_bench}


def main(argv=None) -> int:
    args = parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ChecksumError as e:
        print(f"imgsearch: {e}", file=sys.stderr)
        return EXIT_CHECKSUM
    except (BuildFailure, CapacityError) as e:
        print(f"imgsearch: build failed: {e}", file=sys.stderr)
        return EXIT_BUILD
    except (OSError, ArtifactError) as e:
        print(f"imgsearch: {e}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, InputError, ConfigurationError, ValueError) as e:
        print(f"imgsearch: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ImgSearchError as e:
        print(f"imgsearch: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
