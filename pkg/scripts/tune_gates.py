#!/usr/bin/env python3
"""Run every built-in optimizer problem and print a results table."""

import argparse
from pathlib import Path

from gatefid.cli import main as cli_main


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--problems", type=Path, default=Path(__file__).resolve().parent.parent / "problems"
    )
    args = parser.parse_args()

    for path in sorted(args.problems.glob("*.json")):
        print(f"== {path.name} ==")
        code = cli_main(["optimize", str(path)])
        if code != 0:
            raise SystemExit(code)


if __name__ == "__main__":
    main()
