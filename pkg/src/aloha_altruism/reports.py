"""Regenerate the numerical studies as row data, and write them as CSV/JSON.

CSV output is comma separated with LF line endings and a header row. Every
float column is written at 17 significant digits and followed by a
``<name>_display`` column rounded for reading.
"""
from __future__ import annotations

import csv
import io
import json
from typing import Iterable, Sequence

import numpy as np

from .dynamics import FlowConfig, estimate_basins
from .equilibrium import SymmetricCondition, find_symmetric_neps, solve_heterogeneous_nep
from .game_model import AltruismMode, GameSpec, PlayerParams, UtilityVariant, Variant

DISPLAY_DIGITS = 4

POWER_LOG = UtilityVariant(Variant.POWER_LOG)
STATIC_POWER_LOG = UtilityVariant(Variant.POWER_LOG, AltruismMode.STATIC)
THROUGHPUT_LOG = UtilityVariant(Variant.THROUGHPUT_LOG)

COMPARISON_SCENARIOS = (
    ("Dynamic Altruism", 4, POWER_LOG, 20.0),
    ("Static Altruism", 4, STATIC_POWER_LOG, 20.0),
    ("Non-cooperative", 4, POWER_LOG, 0.0),
    ("Static Altruism", 8, STATIC_POWER_LOG, 20.0),
    ("Dynamic Altruism", 8, POWER_LOG, 20.0),
    ("Non-cooperative", 8, POWER_LOG, 0.0),
)
HETEROGENEOUS_A1 = (30.0, 40.0, 50.0, 60.0, 70.0)
BASIN_RATES = (0.1, 0.25, 1.0, 4.0, 10.0)


def comparison_table(c: float = 0.5) -> list[dict]:
    """Identical players with power cost: dynamic vs static altruism vs none.

    Each row uses the smallest symmetric root of its condition.
    """
    rows = []
    for scenario, N, variant, a in COMPARISON_SCENARIOS:
        neps = find_symmetric_neps(SymmetricCondition(variant, N, a, c))
        nep = neps[0]
        rows.append({
            "scenario": scenario,
            "N": N,
            "a": a,
            "q_star": float(nep.q_star[0]),
            "throughput": float(nep.throughput[0]),
            "utility_over_M": float(nep.utility[0]),
            "roots": len(neps),
            "stability": nep.stability.value,
        })
    return rows


def heterogeneous_table(c: float = 0.5, a_others: float = 50.0,
                        a1_values: Sequence[float] = HETEROGENEOUS_A1) -> list[dict]:
    """Three players; player 1's altruism varies, the other two keep ``a_others``."""
    rows = []
    for a1 in a1_values:
        spec = GameSpec(tuple(PlayerParams.from_normalized(c, a) for a in (a1, a_others, a_others)),
                        POWER_LOG)
        nep = solve_heterogeneous_nep(spec)
        rows.append({
            "a1": float(a1),
            "q1": float(nep.q_star[0]),
            "q2": float(nep.q_star[1]),
            "q3": float(nep.q_star[2]),
            "throughput1": float(nep.throughput[0]),
            "throughput2": float(nep.throughput[1]),
            "utility1": float(nep.utility[0]),
            "utility2": float(nep.utility[1]),
            "residual": nep.residual,
            "stability": nep.stability.value,
        })
    return rows


def basins_table(rates: Sequence[float] = BASIN_RATES, c: float = 0.5, a: float = 50.0,
                 grid_per_dim: int = 21, cfg: FlowConfig = FlowConfig(), workers: int = 1) -> list[dict]:
    """Basin volumes of the two symmetric NEPs of the throughput-cost game, N = 3.

    Player 1 plays at rate ``r``, the others at rate 1.
    """
    cond = SymmetricCondition(THROUGHPUT_LOG, 3, a, c)
    rows = []
    for r in rates:
        rate_vec = [r, 1.0, 1.0]
        neps = find_symmetric_neps(cond, rates=rate_vec)
        report = estimate_basins(cond.game(rates=rate_vec), neps, grid_per_dim, cfg, workers)
        row = {"r": float(r)}
        for k, nep in enumerate(neps):
            row[f"nep{k}_q"] = float(nep.q_star[0])
            row[f"nep{k}_volume"] = report.volumes[k]
            row[f"nep{k}_stability"] = nep.stability.value
        row["unconverged"] = report.unconverged
        row["boundary_count"] = report.counts["boundary"]
        row["grid_per_dim"] = grid_per_dim
        rows.append(row)
    return rows


def curve_table(variant: UtilityVariant, Ns: Sequence[int], As: Sequence[float], c: float,
                points: int = 1000) -> list[dict]:
    """Symmetric condition over an interior q grid, one column per (N, a) case."""
    if not Ns or not As:
        raise ValueError("need at least one N and one a")
    q = np.linspace(0.0, 1.0, points + 2)[1:-1]
    cols = {}
    for N in Ns:
        for a in As:
            cols[f"f_N{N}_a{a:g}"] = SymmetricCondition(variant, int(N), float(a), c)(q)
    return [{"q": float(q[k]), **{name: float(v[k]) for name, v in cols.items()}}
            for k in range(points)]


# -- serialization ---------------------------------------------------------


def _full(x: float) -> str:
    return format(x, ".17g")


def _display(x: float) -> str:
    return format(x, f".{DISPLAY_DIGITS}g")


def to_csv(rows: Iterable[dict]) -> str:
    rows = list(rows)
    if not rows:
        return ""
    header = []
    for key, value in rows[0].items():
        header.append(key)
        if isinstance(value, float):
            header.append(f"{key}_display")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        out = []
        for key, value in row.items():
            if isinstance(value, float):
                out += [_full(value), _display(value)]
            else:
                out.append(value)
        writer.writerow(out)
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    """Parse CSV written by :func:`to_csv`, dropping the display columns."""
    reader = csv.DictReader(io.StringIO(text))
    rows = []
    for row in reader:
        clean = {}
        for key, value in row.items():
            if key.endswith("_display"):
                continue
            try:
                clean[key] = int(value)
            except ValueError:
                try:
                    clean[key] = float(value)
                except ValueError:
                    clean[key] = value
        rows.append(clean)
    return rows


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=True) + "\n"
