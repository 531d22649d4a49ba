#!/usr/bin/env python3
"""Regenerate reference_model.json from the parameters built into the package."""

import argparse
from pathlib import Path

from justnow.model import reference_model, save_model


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out",
        default=str(Path(__file__).resolve().parents[1] / "reference_model.json"),
        help="output path (default: repository root)",
    )
    args = parser.parse_args()
    save_model(reference_model(), args.out)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
