"""Run reports: per-time rows, verdicts, and their on-disk form."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

SERIES_HEADER = ("t", "exp_x1", "exp_p2", "var_x1", "negativity", "entropy", "c_drift")
TOL_SCALE_ENV = "KVNLAB_TOL_SCALE"


def tolerance_scale() -> float:
    """Multiplier from ``KVNLAB_TOL_SCALE`` (default 1); meant for debugging only."""
    raw = os.environ.get(TOL_SCALE_ENV)
    if raw is None or raw.strip() == "":
        return 1.0
    try:
        v = float(raw)
    except ValueError:
        raise ValueError(f"{TOL_SCALE_ENV}={raw!r} is not a number") from None
    if not (v > 0 and math.isfinite(v)):
        raise ValueError(f"{TOL_SCALE_ENV} must be positive and finite")
    return v


@dataclass(frozen=True)
class Verdict:
    """One named check. ``relation`` is ``"<"``, ``">"`` or ``"in"``."""

    name: str
    passed: bool
    measured: float
    tolerance: float | tuple[float, float]
    relation: str
    note: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        if self.relation == "in":
            lo, hi = self.tolerance
            bound = f"in [{lo:g}, {hi:g}]"
        else:
            bound = f"{self.relation} {self.tolerance:g}"
        extra = f"  ({self.note})" if self.note else ""
        return f"{tag}  {self.name}: {self.measured:.6g} {bound}{extra}"


def below(name: str, measured: float, tol: float, note: str = "") -> Verdict:
    tol = tol * tolerance_scale()
    return Verdict(name, bool(measured < tol), float(measured), tol, "<", note)


def above(name: str, measured: float, tol: float, note: str = "") -> Verdict:
    tol = tol * tolerance_scale()
    return Verdict(name, bool(measured > tol), float(measured), tol, ">", note)


def within(name: str, measured: float, lo: float, hi: float, note: str = "") -> Verdict:
    return Verdict(name, bool(lo <= measured <= hi), float(measured), (lo, hi), "in", note)


def holds(name: str, ok: bool, note: str = "") -> Verdict:
    """Boolean check (symbolic identities); measured is 1 or 0."""
    return Verdict(name, bool(ok), 1.0 if ok else 0.0, 1.0, "==", note)


@dataclass(frozen=True)
class Row:
    t: float
    exp_x1: float
    exp_p2: float
    var_x1: float
    negativity: float
    entropy: float
    c_drift: float

    def values(self) -> tuple[float, ...]:
        return tuple(getattr(self, k) for k in SERIES_HEADER)


@dataclass
class RunReport:
    scenario: str
    rows: list[Row] = field(default_factory=list)
    verdicts: list[Verdict] = field(default_factory=list)
    notes: dict[str, Any] = field(default_factory=dict)
    provenance: dict[str, Any] = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        if not self.verdicts:
            raise ValueError(f"report for {self.scenario!r} has no verdicts")
        return all(v.passed for v in self.verdicts)

    def summary(self) -> str:
        head = f"[{'PASS' if self.passed else 'FAIL'}] {self.scenario} ({self.elapsed:.2f} s)"
        return "\n".join([head] + ["  " + v.line() for v in self.verdicts])

    def to_json(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario,
            "passed": self.passed,
            "elapsed_s": self.elapsed,
            "verdicts": [asdict(v) for v in self.verdicts],
            "notes": self.notes,
            "provenance": self.provenance,
        }


def _fmt(v: float) -> str:
    # repr is the shortest string that round-trips a double exactly
    return repr(float(v))


def write_series(rows: Sequence[Row], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SERIES_HEADER)
        for r in rows:
            w.writerow([_fmt(v) for v in r.values()])


def read_series(path) -> list[Row]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != SERIES_HEADER:
            raise ValueError(f"unexpected series header {header!r}")
        return [Row(*(float(x) for x in rec)) for rec in reader]


def _json_default(o):
    if hasattr(o, "tolist"):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _write_plot(r: RunReport, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    t = [row.t for row in r.rows]
    cols = ("exp_x1", "exp_p2", "var_x1", "negativity", "entropy", "c_drift")
    fig, axes = plt.subplots(len(cols), 1, sharex=True, figsize=(6, 1.6 * len(cols)))
    for ax, col in zip(axes, cols):
        ax.plot(t, [getattr(row, col) for row in r.rows], lw=1.2)
        ax.set_ylabel(col, fontsize=8)
    axes[-1].set_xlabel("t")
    fig.suptitle(r.scenario)
    fig.tight_layout()
    # fixed metadata and id salt keep the file byte-reproducible
    with matplotlib.rc_context({"svg.hashsalt": "kvnlab"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def emit_report(r: RunReport, out_dir, plot: bool = False) -> Path:
    """Write ``series.csv``, ``report.json`` and optionally ``plot.svg`` into ``out_dir``."""
    d = Path(out_dir)
    try:
        d.mkdir(parents=True, exist_ok=True)
        write_series(r.rows, d / "series.csv")
        with open(d / "report.json", "w", encoding="utf-8") as fh:
            json.dump(r.to_json(), fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")
        if plot and r.rows:
            _write_plot(r, d / "plot.svg")
    except OSError as exc:
        raise OSError(f"cannot write report to {d}: {exc}") from exc
    return d
