"""Regenerate the golden N-Triples files from the long-hand oracle expansion.

Run from the repository root:  python tests/regen_goldens.py
The goldens are produced by tests/oracles.py only, never by the package code,
so they stay an independent reference for the materializer.
"""
from __future__ import annotations

from oracles import DATA_DIR, GOLDEN_DIR, expand_events, expand_sensors


def main() -> None:
    GOLDEN_DIR.mkdir(exist_ok=True)
    for name, expand in (("sensors", expand_sensors), ("events", expand_events)):
        text = (DATA_DIR / f"{name}.fix").read_text(encoding="utf-8")
        lines = sorted(expand(text))
        out = GOLDEN_DIR / f"{name}.nt"
        out.write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"{out}: {len(lines)} triples")


if __name__ == "__main__":
    main()
