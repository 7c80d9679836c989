"""JSON reading and writing for scenarios, strategies, distributions and models.

Weights are written as exact strings ``"p/q"`` (rational) or JSON booleans.
Strategies are written as their sorted maximal histories; the down-closure is
recomputed, and re-validated, on load.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Mapping

from .core import CausalScenario, ScenarioError, restrict_scenario, scenario_to_json, validate_scenario
from .distributions import RATIONAL, SEMIRINGS, Dist, DistributionError
from .models import EmpiricalModel, ModelError, flat_model_from_tables
from .strategies import (
    EStrategy,
    NStrategy,
    StrategyError,
    validate_e_strategy,
    validate_n_strategy,
)


class InputError(ValueError):
    """Malformed input file; the message names the file and, for JSON syntax
    errors, the line and column."""


def load_json(path: str | Path) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _is_leaf_list(obj: Any) -> bool:
    # a list of scalars, or a list of such lists (a history), fits on one line
    return isinstance(obj, list) and all(
        not isinstance(v, (list, dict)) or (isinstance(v, list) and
                                            all(not isinstance(w, (list, dict)) for w in v))
        for v in obj)


def _encode(obj: Any, level: int) -> str:
    if isinstance(obj, dict) and obj:
        pad = "  " * (level + 1)
        body = ",\n".join(f"{pad}{json.dumps(k, ensure_ascii=False)}: {_encode(v, level + 1)}"
                          for k, v in obj.items())
        return "{\n" + body + "\n" + "  " * level + "}"
    if isinstance(obj, list) and obj and not _is_leaf_list(obj):
        pad = "  " * (level + 1)
        body = ",\n".join(pad + _encode(v, level + 1) for v in obj)
        return "[\n" + body + "\n" + "  " * level + "]"
    return json.dumps(obj, ensure_ascii=False)


def dumps(obj: Any) -> str:
    """Indented JSON with histories kept on one line each."""
    return _encode(obj, 0) + "\n"


# -- sections and strategies -----------------------------------------------------

def section_to_json(M: CausalScenario, s) -> list:
    return [list(e) for e in M.sorted_section(s)]


def section_from_json(raw) -> frozenset:
    if not isinstance(raw, list) or not all(isinstance(e, list) and len(e) == 2 for e in raw):
        raise InputError(f"a history must be a list of [measurement, outcome] pairs, got {raw!r}")
    return frozenset((str(x), str(o)) for x, o in raw)


def _sorted_sections(M: CausalScenario, sections) -> list:
    return [section_to_json(M, s) for s in sorted(sections, key=M.section_key)]


def strategy_to_json(strategy: NStrategy | EStrategy) -> dict:
    M = strategy.scenario
    if isinstance(strategy, NStrategy):
        return {"kind": "N", "maximal_histories": _sorted_sections(M, strategy.maximal)}
    out = {"kind": "E", "maximal_histories": _sorted_sections(M, strategy.maximal),
           "terminal": _sorted_sections(M, strategy.terminal)}
    if strategy.closure == "play":
        # play-closed strategies are not determined by their maximal histories
        out["closure"] = "play"
        out["histories"] = _sorted_sections(M, strategy.histories)
    return out


def strategy_from_json(M: CausalScenario, raw: Mapping) -> NStrategy | EStrategy:
    if not isinstance(raw, Mapping) or raw.get("kind") not in ("N", "E"):
        raise InputError('strategy JSON needs "kind": "N" or "E"')
    if "maximal_histories" not in raw:
        raise InputError('strategy JSON needs "maximal_histories"')
    tops = [section_from_json(h) for h in raw["maximal_histories"]]
    if raw["kind"] == "N":
        return validate_n_strategy(M, tops)
    terminal = raw.get("terminal")
    terminal = None if terminal is None else [section_from_json(h) for h in terminal]
    closure = raw.get("closure", "hist")
    if closure == "play":
        if "histories" not in raw:
            raise InputError('a play-closed E-strategy must list all its "histories"')
        given = [section_from_json(h) for h in raw["histories"]]
        tau = validate_e_strategy(M, given, terminal, closure="play")
        if tau.maximal != frozenset(tops):
            raise InputError("maximal_histories do not match the listed histories")
        return tau
    return validate_e_strategy(M, tops, terminal, closure=closure,
                               strict=bool(raw.get("strict", False)))


def playout_to_json(M: CausalScenario, P) -> list:
    return _sorted_sections(M, P)


# -- distributions ---------------------------------------------------------------

def dist_to_json(d: Dist, element_to_json: Callable[[Any], Any],
                 sort_key: Callable[[Any], Any] | None = None) -> dict:
    items = d.sorted_items(sort_key) if sort_key else list(d.items())
    return {"semiring": d.semiring.name,
            "support": [{"element": element_to_json(e), "weight": d.semiring.format(w)}
                        for e, w in items]}


def dist_from_json(raw: Mapping, element_from_json: Callable[[Any], Any]) -> Dist:
    if not isinstance(raw, Mapping) or "support" not in raw:
        raise InputError('distribution JSON needs "semiring" and "support"')
    name = raw.get("semiring", "rational")
    if name not in SEMIRINGS:
        raise InputError(f"unknown semiring {name!r}; expected one of {sorted(SEMIRINGS)}")
    sr = SEMIRINGS[name]
    pairs = []
    for entry in raw["support"]:
        try:
            elem, w = entry["element"], entry["weight"]
        except (KeyError, TypeError):
            raise InputError('support entries need "element" and "weight"') from None
        try:
            pairs.append((element_from_json(elem), sr.parse(w)))
        except (ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, (StrategyError, ScenarioError, DistributionError)):
                raise
            raise InputError(f"bad weight {w!r}: {exc}") from None
    return Dist(sr, pairs)


# -- scenarios and models --------------------------------------------------------

def load_scenario(source: str | Path | Mapping, base: Path | None = None) -> CausalScenario:
    """A scenario from a file path (relative to ``base``) or an inline object."""
    if isinstance(source, Mapping):
        return validate_scenario(source)
    path = Path(source)
    if base is not None and not path.is_absolute():
        path = base / path
    return validate_scenario(load_json(path))


def flat_scenario_from_json(raw: Mapping) -> CausalScenario:
    """The ``encode flat`` input: a scenario object whose enabling is forced flat."""
    if not isinstance(raw, Mapping):
        raise InputError("flat scenario must be a JSON object")
    if raw.get("enabling", "flat") != "flat":
        raise InputError('a flat scenario may not carry enabling entries other than "flat"')
    return validate_scenario({**raw, "enabling": "flat"})


def _table_key(key: str, ctx: list[str]) -> tuple[str, ...]:
    parts = key.split(",") if "," in key else list(key)
    if len(parts) != len(ctx):
        raise InputError(f"row key {key!r} does not give one outcome per measurement of {ctx}")
    return tuple(parts)


def model_from_json(raw: Mapping, base: Path | None = None,
                    scenario: CausalScenario | None = None) -> EmpiricalModel:
    """Read a model; ``scenario`` overrides the model's own ``"scenario"`` entry."""
    if not isinstance(raw, Mapping) or "contexts" not in raw:
        raise InputError('model JSON needs "contexts"')
    if scenario is None:
        if "scenario" not in raw:
            raise InputError('model JSON needs "scenario" (a path or an inline object)')
        scenario = load_scenario(raw["scenario"], base)
    M = scenario
    name = raw.get("semiring", "rational")
    if name not in SEMIRINGS:
        raise InputError(f"unknown semiring {name!r}")
    sr = SEMIRINGS[name]
    if raw.get("format") == "flat-table":
        tables = []
        for c in raw["contexts"]:
            ctx = [str(x) for x in c["context"]]
            rows = {_table_key(k, ctx): sr.parse(w) for k, w in c["rows"].items()}
            tables.append((ctx, rows))
        return flat_model_from_tables(M, tables, sr)
    contexts, dists = [], []
    for c in raw["contexts"]:
        try:
            ctx = frozenset(str(x) for x in c["context"])
            dist_raw = c["distribution"]
        except (KeyError, TypeError):
            raise InputError('each context needs "context" and "distribution"') from None
        unknown = ctx - set(M.measurements)
        if unknown:
            raise ModelError(f"context mentions unknown measurements {sorted(unknown)}")
        MC = restrict_scenario(M, ctx)
        d = dist_from_json(dist_raw, lambda s, MC=MC: strategy_from_json(MC, s))
        if d.semiring.name != sr.name:
            raise ModelError("context distribution in a different semiring from the model")
        contexts.append(ctx)
        dists.append(d)
    return EmpiricalModel(M, tuple(contexts), tuple(dists), sr)


def model_to_json(e: EmpiricalModel, scenario_ref: str | None = None) -> dict:
    M = e.scenario
    out: dict = {"scenario": scenario_ref if scenario_ref is not None else scenario_to_json(M),
                 "semiring": e.semiring.name, "contexts": []}
    for C, d in zip(e.contexts, e.dists):
        out["contexts"].append({
            "context": M.sorted_measurements(C),
            "distribution": dist_to_json(d, strategy_to_json, NStrategy.key),
        })
    return out


def rational(v: Fraction | int) -> str:
    return str(Fraction(v))


__all__ = [
    "InputError", "load_json", "dumps", "section_to_json", "section_from_json",
    "strategy_to_json", "strategy_from_json", "playout_to_json", "dist_to_json",
    "dist_from_json", "load_scenario", "flat_scenario_from_json", "model_from_json",
    "model_to_json", "rational",
]
