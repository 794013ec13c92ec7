#!/usr/bin/env python3
"""Write the bundled example graph to a snapshot file.

The example is a small NLP researcher's graph (14 nodes, 13
relationships); --with-collaborator also installs the restricted sharing
role so access-control behavior can be tried straight away.
"""

import argparse

from prkg.sampledata import add_collaborator, example_engine
from prkg.store import save_snapshot


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="prkg.snapshot.json", metavar="PATH")
    parser.add_argument("--with-collaborator", action="store_true")
    args = parser.parse_args()
    engine, _ = example_engine()
    if args.with_collaborator:
        add_collaborator(engine)
    written = save_snapshot(engine, args.out)
    print(
        f"wrote {args.out}: {len(engine.graph.nodes)} nodes, "
        f"{len(engine.graph.relationships)} relationships, {written} bytes"
    )


if __name__ == "__main__":
    main()
