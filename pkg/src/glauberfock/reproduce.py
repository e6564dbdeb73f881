"""Regenerate the canonical figure maps and check them against stored hashes.

Each run writes one subdirectory per figure panel and compares the SHA-256
of every CSV, JSON and PGM file with ``fixtures/paper_fixtures.json``. The
qualitative claims the figures illustrate are checked on the fresh data.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io as gio
from .cli import parse_formats, resolve_config, run_correlate, run_propagate
from .propagation import TAIL_LEAKAGE_WARNING

FIXTURES = Path(__file__).with_name("fixtures") / "paper_fixtures.json"
HASHED_SUFFIXES = (".csv", ".json", ".pgm")

#: Distinctness threshold for peak-normalised maps of different input pairs.
DISTINCT_MIN = 0.1

_FIG2 = {"sites": 59, "coupling": 0.37, "length_cm": 10.0, "z_samples": 201}
_FIG34 = {"sites": 59, "coupling": 0.36, "length_cm": 10.0}


@dataclass(frozen=True)
class Panel:
    name: str
    command: str
    settings: dict


CANONICAL = (
    Panel("fig2a", "propagate", {**_FIG2, "input": "0"}),
    Panel("fig2b", "propagate", {**_FIG2, "input": "1"}),
    Panel("fig2c", "propagate", {**_FIG2, "input": "2"}),
    Panel("fig2d", "propagate", {**_FIG2, "input": "4"}),
    Panel("fig3d", "correlate", {**_FIG34, "state": "boson", "input": "0,1"}),
    Panel("fig3e", "correlate", {**_FIG34, "state": "boson", "input": "1,2"}),
    Panel("fig3f", "correlate", {**_FIG34, "state": "boson", "input": "0,2"}),
    Panel("fig4d", "correlate", {**_FIG34, "state": "noon-", "input": "0,1"}),
    Panel("fig4g", "correlate", {**_FIG34, "state": "fermion", "input": "0,1"}),
)


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def run_panels(out_dir, formats="csv,json,pgm"):
    """Run every canonical panel; returns ``{name: (result, {filename: sha})}``."""
    fmt = parse_formats(formats) | {"csv", "json", "pgm"}
    results = {}
    for panel in CANONICAL:
        cli = {**panel.settings, "out_dir": str(Path(out_dir) / panel.name), "format": ",".join(sorted(fmt))}
        cfg = resolve_config(panel.command, cli)
        runner = run_propagate if panel.command == "propagate" else run_correlate
        result = runner(cfg)
        hashes = {
            Path(p).name: sha256(p) for p in result["written"] if Path(p).suffix in HASHED_SUFFIXES
        }
        results[panel.name] = (result, dict(sorted(hashes.items())))
    return results


def qualitative_checks(results) -> list:
    """``(description, passed)`` for each claim the panels illustrate."""
    checks = []
    for name, k in (("fig2a", 0), ("fig2b", 1), ("fig2c", 2), ("fig2d", 4)):
        s = results[name][0]["summary"]
        checks.append((f"{name}: k={k} output has {k + 1} maxima (got {s['maxima']})", s["maxima"] == k + 1))
        checks.append((f"{name}: tail leakage {s['tail_leakage']:.2e} < {TAIL_LEAKAGE_WARNING:g}",
                       s["tail_leakage"] < TAIL_LEAKAGE_WARNING))
    q, r = results["fig3d"][0]["raw"].argmax()
    checks.append((f"fig3d: boson (0,1) argmax ({q},{r}) on the diagonal", q == r))
    q, r = results["fig4g"][0]["raw"].argmax()
    checks.append((f"fig4g: fermion (0,1) argmax ({q},{r}) off the diagonal", q != r))
    diag = float(np.abs(np.diag(results["fig4g"][0]["raw"].entries)).max())
    checks.append((f"fig4g: fermion diagonal max {diag:.1e} < 1e-20", diag < 1e-20))
    for a, b in itertools.combinations(("fig3d", "fig3e", "fig3f"), 2):
        diff = float(np.abs(results[a][0]["peak"].entries - results[b][0]["peak"].entries).max())
        checks.append((f"{a} vs {b}: peak-normalised max difference {diff:.3f} > {DISTINCT_MIN}", diff > DISTINCT_MIN))
    return checks


def fixture_checks(results, fixtures: dict) -> list:
    checks = []
    for name, (_, hashes) in results.items():
        expected = fixtures.get(name)
        if expected is None:
            checks.append((f"{name}: no stored fixture", False))
            continue
        for fname in sorted(set(expected) | set(hashes)):
            ok = expected.get(fname) == hashes.get(fname)
            checks.append((f"{name}/{fname}: bitwise match with fixture", ok))
    return checks


def run_reproduce(out_dir, formats="csv,json,pgm", fixtures=None, update=False) -> int:
    results = run_panels(out_dir, formats)
    fixture_path = Path(fixtures) if fixtures else FIXTURES
    checks = qualitative_checks(results)
    if update:
        doc = {name: hashes for name, (_, hashes) in results.items()}
        gio.atomic_write(fixture_path, (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode())
        print(f"wrote fixtures to {fixture_path}")
    else:
        try:
            stored = json.loads(fixture_path.read_text())
        except OSError as exc:
            print(f"FAIL cannot read fixtures {fixture_path}: {exc}")
            return 4
        checks += fixture_checks(results, stored)
    for text, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'} {text}")
    failed = sum(not ok for _, ok in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed; outputs in {out_dir}")
    return 0 if failed == 0 else 4
