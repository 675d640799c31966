"""Text formats: pairwise-state and scenario JSON, plain-text complex matrices."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .pairwise import OUTCOME_PAIRS, PAIRS, Obs, PairwiseState, format_outcome
from .prob import Dist, format_rational, parse_rational
from .sequential import PureState

SCENARIO_VERSION = 1
THEORIES = ("pairwise", "sequential", "quantum")


class ParseError(ValueError):
    pass


# -- pairwise states ----------------------------------------------------------


def _cell_key(op: tuple[int, int]) -> str:
    return f"({format_outcome(op[0])},{format_outcome(op[1])})"


_CELLS = {_cell_key(op): op for op in OUTCOME_PAIRS}


def pairwise_to_obj(s: PairwiseState) -> dict:
    return {
        f"{x},{y}": {_cell_key(op): format_rational(p) for op, p in s.table(x, y).items()}
        for x, y in PAIRS
    }


def pairwise_from_obj(obj: dict) -> PairwiseState:
    if not isinstance(obj, dict):
        raise ParseError("pairwise state must be an object keyed by pairs like 'A1,B1'")
    tables = {}
    for key, cells in obj.items():
        try:
            x, y = (Obs[n.strip()] for n in key.split(","))
        except (KeyError, ValueError):
            raise ParseError(f"bad pair key {key!r}") from None
        if not isinstance(cells, dict):
            raise ParseError(f"table for {key} must be an object")
        table = {}
        for ck, v in cells.items():
            op = _CELLS.get(ck.replace(" ", ""))
            if op is None:
                raise ParseError(f"bad outcome pair {ck!r} in {key}")
            try:
                table[op] = parse_rational(str(v))
            except (ValueError, ZeroDivisionError):
                raise ParseError(f"bad rational {v!r} in {key}") from None
        tables[(x, y)] = table
    try:
        return PairwiseState(tables)
    except ValueError as e:
        raise ParseError(str(e)) from None


# -- ensembles ----------------------------------------------------------------


def ensemble_to_obj(e: Dist[PureState]) -> list:
    return [[format_rational(p), str(s)] for s, p in sorted(e.items(), key=lambda kv: str(kv[0]))]


def ensemble_from_obj(obj) -> Dist[PureState]:
    if isinstance(obj, str):
        obj = [["1/1", obj]]
    try:
        return Dist({PureState.parse(s): parse_rational(p) for p, s in obj})
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise ParseError(f"bad ensemble: {e}") from None


# -- complex matrices ---------------------------------------------------------


def format_complex(z: complex) -> str:
    re, im = float(z.real), float(z.imag)
    sign = "-" if np.signbit(im) else "+"
    return f"{re!r}{sign}{abs(im)!r}i"


def parse_complex(tok: str) -> complex:
    t = tok.strip()
    if t.endswith("i"):
        t = t[:-1] + "j"
    try:
        return complex(t)
    except ValueError:
        raise ParseError(f"bad complex entry {tok!r}") from None


def matrices_to_text(mats) -> str:
    blocks = []
    for M in mats:
        M = np.asarray(M, dtype=complex)
        rows = [" ".join(format_complex(z) for z in row) for row in M]
        blocks.append("\n".join([str(M.shape[0])] + rows))
    return "\n\n".join(blocks) + "\n"


def matrices_from_text(text: str) -> list[np.ndarray]:
    """Read matrices, each a dimension line followed by that many rows."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    mats = []
    i = 0
    while i < len(lines):
        try:
            d = int(lines[i])
        except ValueError:
            raise ParseError(f"expected a dimension header, got {lines[i]!r}") from None
        if d < 1:
            raise ParseError(f"bad dimension {d}")
        rows = [[parse_complex(t) for t in ln.split()] for ln in lines[i + 1:i + 1 + d]]
        if len(rows) != d or any(len(r) != d for r in rows):
            raise ParseError(f"matrix of dimension {d} is truncated or ragged")
        mats.append(np.array(rows, dtype=complex))
        i += 1 + d
    return mats


# -- scenarios ----------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    theory: str
    state: PairwiseState | None = None
    initial: Dist[PureState] | None = None
    sequence: tuple[Obs, ...] = ()
    matrices: tuple[np.ndarray, np.ndarray] | None = None

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scenario):
            return NotImplemented
        return emit_scenario(self) == emit_scenario(other)

    __hash__ = None


def scenario_to_obj(sc: Scenario) -> dict:
    obj: dict = {"version": SCENARIO_VERSION, "theory": sc.theory}
    if sc.theory == "pairwise":
        obj["state"] = pairwise_to_obj(sc.state)
    elif sc.theory == "sequential":
        obj["initial"] = ensemble_to_obj(sc.initial)
        obj["sequence"] = [m.name for m in sc.sequence]
    else:
        A, B = sc.matrices
        obj["A"] = [[format_complex(z) for z in row] for row in A]
        obj["B"] = [[format_complex(z) for z in row] for row in B]
    return obj


def emit_scenario(sc: Scenario) -> str:
    return json.dumps(scenario_to_obj(sc), indent=2) + "\n"


def scenario_from_obj(obj: dict) -> Scenario:
    if not isinstance(obj, dict):
        raise ParseError("scenario must be a JSON object")
    if obj.get("version") != SCENARIO_VERSION:
        raise ParseError(f"unsupported scenario version {obj.get('version')!r}")
    theory = obj.get("theory")
    if theory == "pairwise":
        return Scenario("pairwise", state=pairwise_from_obj(obj.get("state")))
    if theory == "sequential":
        try:
            seq = tuple(Obs[n] for n in obj.get("sequence", []))
        except KeyError as e:
            raise ParseError(f"unknown observable {e}") from None
        return Scenario("sequential", initial=ensemble_from_obj(obj.get("initial")), sequence=seq)
    if theory == "quantum":
        try:
            A = np.array([[parse_complex(t) for t in row] for row in obj["A"]], dtype=complex)
            B = np.array([[parse_complex(t) for t in row] for row in obj["B"]], dtype=complex)
        except (KeyError, TypeError):
            raise ParseError("quantum scenario needs matrices 'A' and 'B'") from None
        return Scenario("quantum", matrices=(A, B))
    raise ParseError(f"theory must be one of {THEORIES}, got {theory!r}")


def parse_scenario(text: str) -> Scenario:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e}") from None
    return scenario_from_obj(obj)


def load_pairwise(path: str | Path) -> PairwiseState:
    """Accept either a bare pairwise-state object or a pairwise scenario."""
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e}") from None
    if isinstance(obj, dict) and "theory" in obj:
        sc = scenario_from_obj(obj)
        if sc.theory != "pairwise":
            raise ParseError(f"expected a pairwise scenario, got {sc.theory}")
        return sc.state
    return pairwise_from_obj(obj)

