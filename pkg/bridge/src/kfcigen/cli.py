"""Command line for fixture generation."""

from __future__ import annotations

import argparse
import sys

from .generate import EngineUnavailableError, SystemRecipe, generate_fixture


def _triple(text: str) -> tuple[int, int, int]:
    parts = [int(x) for x in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"need three comma-separated integers: {text!r}")
    return tuple(parts)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="kfcigen", description="Generate k-FCIDUMP integral fixtures."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    gen = sub.add_parser("gen", help="generate one fixture")
    gen.add_argument("--system", required=True, choices=["hchain", "si", "diamond"])
    gen.add_argument("--mesh", type=_triple, default=(1, 1, 1))
    gen.add_argument("--kshift", type=_triple, default=(0, 0, 0))
    gen.add_argument("--bond", type=float, default=1.4, help="H-H distance in Bohr (hchain)")
    gen.add_argument("--out", required=True)
    args = parser.parse_args(argv)

    recipe = SystemRecipe(
        system=args.system, mesh=args.mesh, kshift=args.kshift, bond_bohr=args.bond
    )
    try:
        generate_fixture(recipe, args.out)
    except EngineUnavailableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
