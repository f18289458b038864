"""couplelab-figures render --spec PATH"""

from __future__ import annotations

import argparse
import json
import sys

from .render import render, spec_from_json


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="couplelab-figures",
                                 description="render figures from couplelab CSVs")
    subs = ap.add_subparsers(dest="command", required=True)
    r = subs.add_parser("render", help="render one figure from a JSON spec")
    r.add_argument("--spec", required=True, help="path to the figure spec JSON")
    args = ap.parse_args(argv)
    try:
        result = render(spec_from_json(args.spec))
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps({"out": str(result.out),
                      "bound_dominates": result.bound_dominates,
                      "slope": result.slope}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
