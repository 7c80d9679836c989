"""Command-line front end.

Every command prints a JSON report on standard output (``--format text`` gives
a short human summary for verdicts).  Exit status: 0 on success, 1 when
``check --fail-on-contextual`` finds contextuality, 2 on input or validation
errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Any, Sequence

from . import encodings as enc
from .core import ScenarioError, restrict_scenario, scenario_to_json, validate_scenario
from .distributions import RATIONAL, Dist, DistributionError, play_mixed, readout_parity
from .histories import enumerate_histories, is_maximal
from .io import (
    InputError,
    dist_from_json,
    dist_to_json,
    dumps,
    flat_scenario_from_json,
    load_json,
    model_from_json,
    model_to_json,
    playout_to_json,
    section_to_json,
    strategy_from_json,
    strategy_to_json,
)
from .models import (
    DEFAULT_MAX_STRATEGIES,
    ModelError,
    check_compatibility,
    contextual_fraction,
    decide_causal_contextuality,
    decide_possibilistic,
    enumerate_deterministic_models,
    gamma,
    nature_mixture,
)
from .strategies import EStrategy, EnumerationLimit, NStrategy, StrategyError, glue

EXAMPLES = ("ghz", "anders-browne", "chsh-2chain", "pr-flat", "gluing")


class _Abort(Exception):
    def __init__(self, code: int, report: dict):
        self.code = code
        self.report = report


def _kind(raw: Any) -> str:
    if isinstance(raw, dict):
        if "measurements" in raw:
            return "scenario"
        if "contexts" in raw:
            return "model"
        if "kind" in raw:
            return "strategy"
        if "support" in raw:
            return "distribution"
        if "family" in raw:
            return "family"
        if "sites" in raw:
            return "gp"
    raise InputError("unrecognised JSON document")


def _scenario_and_model(files: Sequence[str], need_model: bool = True):
    """Accept ``scenario model`` in either order, or a model embedding its scenario."""
    docs = [(Path(f), load_json(f)) for f in files]
    scen = [(p, d) for p, d in docs if _kind(d) == "scenario"]
    mods = [(p, d) for p, d in docs if _kind(d) == "model"]
    if len(scen) > 1 or len(mods) > 1 or len(scen) + len(mods) != len(docs):
        raise InputError("expected one scenario file and one model file")
    M = validate_scenario(scen[0][1]) if scen else None
    if not mods:
        if need_model:
            raise InputError("no model file given")
        if M is None:
            raise InputError("no scenario file given")
        return M, None
    path, raw = mods[0]
    e = model_from_json(raw, path.parent, M)
    return e.scenario, e


def _sized(args, M):
    """Record the history count so an aborted enumeration can report it."""
    args.sizing = {"histories": len(enumerate_histories(M))}
    return M


def _parse_list(text: str | None) -> list[str] | None:
    if text is None:
        return None
    return [t for t in (s.strip() for s in text.split(",")) if t]


# -- commands --------------------------------------------------------------------

def cmd_histories(args) -> dict:
    M = validate_scenario(load_json(args.scenario))
    hist = enumerate_histories(M)
    maximal = [s for s in hist if is_maximal(M, s)]
    shown = maximal if args.maximal else list(hist)
    return {"count": len(hist), "maximal_count": len(maximal),
            "histories": [section_to_json(M, s) for s in shown]}


def cmd_strategies(args) -> dict:
    M = validate_scenario(load_json(args.scenario))
    U = _parse_list(args.context)
    if U is not None:
        unknown = set(U) - set(M.measurements)
        if unknown:
            raise ScenarioError(f"context mentions unknown measurements {sorted(unknown)}")
        M = restrict_scenario(M, U)
    found = gamma(_sized(args, M), args.max_strategies)
    return {"context": list(M.measurements), "count": len(found),
            "strategies": [strategy_to_json(s) for s in found]}


def cmd_glue(args) -> dict:
    M = validate_scenario(load_json(args.scenario))
    raw = load_json(args.family)
    try:
        cover = [[str(x) for x in U] for U in raw["cover"]]
        members = raw["family"]
    except (KeyError, TypeError):
        raise InputError('family JSON needs "cover" and "family"') from None
    if len(cover) != len(members):
        raise InputError("cover and family have different lengths")
    family = [strategy_from_json(restrict_scenario(M, U), s) for U, s in zip(cover, members)]
    rep = glue(M, cover, family, limit=args.limit)
    out = {"outcome": rep.outcome,
           "union_deterministic": rep.union_deterministic,
           "union_total": rep.union_total,
           "completions": [strategy_to_json(s) for s in rep.strategies],
           "completion_count": len(rep.strategies),
           "truncated": rep.truncated}
    if rep.conflict is not None:
        s, x, got = rep.conflict
        out["conflict"] = {"history": section_to_json(M, s), "measurement": x, "outcomes": got}
    return out


def cmd_check(args) -> dict:
    M, e = _scenario_and_model(args.files)
    _sized(args, M)
    if e.semiring.name == "boolean":
        v = decide_possibilistic(e, args.max_strategies)
        out = {"status": v.status, "semiring": "boolean"}
        if v.global_section is not None:
            out["global_section_support"] = len(v.global_section)
        return out
    v = decide_causal_contextuality(e, args.max_strategies)
    out: dict = {"status": v.status, "semiring": "rational",
                 "columns": len(v.system.profiles), "rows": len(v.system.rows) + 1}
    if v.global_section is not None:
        out["global_section"] = dist_to_json(v.global_section, strategy_to_json, NStrategy.key)
    else:
        rows = [{"context": M.sorted_measurements(e.contexts[i]),
                 "strategy": strategy_to_json(tau)} for i, tau in v.system.rows]
        rows.append({"normalisation": True})
        out["certificate"] = [{"row": r, "multiplier": str(y)}
                              for r, y in zip(rows, v.certificate) if y]
    if args.fail_on_contextual and v.contextual:
        raise _Abort(1, out)
    return out


def cmd_fraction(args) -> dict:
    M, e = _scenario_and_model(args.files)
    _sized(args, M)
    r = contextual_fraction(e, args.max_strategies)
    witness = Dist(RATIONAL, r.witness_subdistribution, check=False)
    return {"contextual_fraction": str(r.contextual_fraction),
            "noncontextual_fraction": str(r.noncontextual_fraction),
            "witness": [{"element": strategy_to_json(s), "weight": str(w)}
                        for s, w in witness.sorted_items(NStrategy.key)]}


def cmd_vertices(args) -> dict:
    M = _sized(args, validate_scenario(load_json(args.scenario)))
    models = enumerate_deterministic_models(M, dedupe=args.dedupe, limit=args.max_strategies)
    return {"count": len(models), "deduplicated": args.dedupe,
            "vertices": [model_to_json(m, scenario_ref=args.scenario) for m in models]}


def _strategies_dist(M, raw, kind):
    if _kind(raw) == "strategy":
        s = strategy_from_json(M, raw)
        d = Dist.point(s)
    else:
        d = dist_from_json(raw, lambda r: strategy_from_json(M, r))
    for s in d:
        if not isinstance(s, kind):
            raise InputError(f"expected {kind.__name__} elements")
    return d


def cmd_play(args) -> dict:
    M = validate_scenario(load_json(args.scenario))
    dE = _strategies_dist(M, load_json(args.experimenter), EStrategy)
    if (args.nature is None) == (args.model is None):
        raise InputError("give exactly one of --nature and --model")
    if args.nature is not None:
        dN = _strategies_dist(M, load_json(args.nature), NStrategy)
    else:
        e = model_from_json(load_json(args.model), Path(args.model).parent, M)
        if len(dE) != 1:
            raise InputError("model-driven play needs a single Experimenter strategy")
        dN = nature_mixture(e, next(iter(dE)))
    P = play_mixed(dN, dE)
    out: dict = {"playouts": dist_to_json(P, lambda p: playout_to_json(M, p),
                                          lambda p: sorted(M.section_key(s) for s in p))}
    readout = _parse_list(args.readout)
    if readout:
        lab = None
        if args.labelling:
            lab = {x: {o: int(b) for o, b in m.items()} for x, m in load_json(args.labelling).items()}
        terminal = None
        if len(dE) == 1:
            terminal = next(iter(dE)).terminal
        bits = readout_parity(P, readout, lab, partial=args.partial, scenario=M, terminal=terminal)
        out["parity"] = {str(b): str(w) for b, w in sorted(bits.items())}
    return out


def cmd_encode(args) -> dict:
    raw = load_json(args.file)
    if args.kind == "gp":
        return scenario_to_json(enc.gp_to_causal(enc.gp_from_json(raw)))
    return scenario_to_json(flat_scenario_from_json(raw))


def _bundle(name: str) -> dict[str, Any]:
    """Documents of an example bundle, keyed by file suffix, plus the expected verdicts."""
    if name == "ghz":
        e = enc.ghz_model()
        return {"scenario": scenario_to_json(e.scenario),
                "model": model_to_json(e, f"{name}-scenario.json"),
                "expect": {"check": "causally_contextual", "contextual_fraction": "1"}}
    if name == "pr-flat":
        e = enc.pr_box_flat()
        return {"scenario": scenario_to_json(e.scenario),
                "model": model_to_json(e, f"{name}-scenario.json"),
                "expect": {"check": "causally_contextual", "contextual_fraction": "1"}}
    if name == "chsh-2chain":
        e = enc.pr_box_2chain()
        return {"scenario": scenario_to_json(e.scenario),
                "model": model_to_json(e, f"{name}-scenario.json"),
                "mixture": dist_to_json(enc.pr_mixture_2chain(), strategy_to_json, NStrategy.key),
                "expect": {"check": "causally_noncontextual", "contextual_fraction": "0"}}
    if name == "anders-browne":
        e = enc.ghz_model()
        out = {"scenario": scenario_to_json(e.scenario),
               "model": model_to_json(e, f"{name}-scenario.json"),
               "labelling": enc.anders_browne_labelling(),
               "expect": {"check": "causally_contextual", "contextual_fraction": "1",
                          "parity": {f"{i}{j}": {str(i & j): "1"} for i in (0, 1) for j in (0, 1)}}}
        for i in (0, 1):
            for j in (0, 1):
                out[f"e{i}{j}"] = strategy_to_json(enc.anders_browne_e_strategy(i, j, e.scenario))
        return out
    if name == "gluing":
        M, cover, family = enc.gluing_counterexample()
        return {"scenario": scenario_to_json(M),
                "family": {"cover": [M.sorted_measurements(U) for U in cover],
                           "family": [strategy_to_json(s) for s in family]},
                "expect": {"glue": "multiple_completions", "completion_count": 2}}
    raise InputError(f"unknown example {name!r}; choose from {', '.join(EXAMPLES)}")


def cmd_examples(args) -> dict:
    docs = _bundle(args.name)
    if args.out is None:
        return {"name": args.name, **docs}
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    for key, doc in docs.items():
        if key == "expect":
            continue
        path = out / f"{args.name}-{key}.json"
        path.write_text(dumps(doc), encoding="utf-8")
        files[key] = path.name
    manifest = {"name": args.name, "files": files, "expect": docs["expect"]}
    (out / f"{args.name}.bundle.json").write_text(dumps(manifest), encoding="utf-8")
    return manifest


def cmd_validate(args) -> dict:
    raw = load_json(args.file)
    kind = _kind(raw)
    base = Path(args.file).parent
    M = validate_scenario(load_json(args.scenario)) if args.scenario else None
    if kind == "scenario":
        M = validate_scenario(raw)
        return {"valid": True, "kind": kind, "measurements": len(M.measurements),
                "flat": M.is_flat}
    if kind == "gp":
        M = enc.gp_to_causal(enc.gp_from_json(raw))
        return {"valid": True, "kind": kind, "measurements": len(M.measurements)}
    if kind == "model":
        e = model_from_json(raw, base, M)
        rep = check_compatibility(e)
        if not rep.compatible:
            i, j, tau, a, b = rep.violations[0]
            raise ModelError(f"contexts {i} and {j} have different marginals "
                             f"({len(rep.violations)} violation(s))")
        return {"valid": True, "kind": kind, "contexts": len(e.contexts),
                "semiring": e.semiring.name}
    if M is None:
        raise InputError(f"validating a {kind} needs --scenario")
    if kind == "strategy":
        s = strategy_from_json(M, raw)
        return {"valid": True, "kind": kind, "strategy_kind": raw["kind"],
                "histories": len(s.histories)}
    if kind == "distribution":
        d = dist_from_json(raw, lambda r: strategy_from_json(M, r))
        return {"valid": True, "kind": kind, "support": len(d)}
    for U, s in zip(raw["cover"], raw["family"]):
        strategy_from_json(restrict_scenario(M, U), s)
    return {"valid": True, "kind": kind, "members": len(raw["family"])}


# -- entry point -----------------------------------------------------------------

def _text(command: str, report: dict) -> str:
    if command == "check":
        extra = ""
        if "certificate" in report:
            extra = f" (Farkas certificate with {len(report['certificate'])} nonzero multipliers)"
        elif "global_section" in report:
            extra = f" (global section on {len(report['global_section']['support'])} strategies)"
        return f"{report['status']}{extra}\n"
    if command == "fraction":
        return (f"contextual fraction {report['contextual_fraction']}, "
                f"noncontextual fraction {report['noncontextual_fraction']}\n")
    if command in ("histories", "strategies", "vertices"):
        return f"{report['count']} {command}\n"
    if command == "glue":
        return f"{report['outcome']} ({report['completion_count']} completion(s))\n"
    if command == "play" and "parity" in report:
        return "parity " + ", ".join(f"{b}: {w}" for b, w in report["parity"].items()) + "\n"
    return dumps(report)


def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted before or after the command name; the copies
    # after it land in sub_* and take precedence
    p = argparse.ArgumentParser(prog="causalctx",
                                description="Exact causal contextuality toolkit.")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--max-strategies", type=int, default=DEFAULT_MAX_STRATEGIES,
                   help="abort when a strategy enumeration exceeds this size")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="sub_format", choices=("json", "text"))
    common.add_argument("--max-strategies", dest="sub_max_strategies", type=int)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("histories", parents=[common], help="list Hist(M)")
    s.add_argument("scenario")
    s.add_argument("--maximal", action="store_true", help="list only maximal histories")
    s.set_defaults(func=cmd_histories)

    s = sub.add_parser("strategies", parents=[common], help="list Nature strategies")
    s.add_argument("scenario")
    s.add_argument("--context", help="comma-separated measurement ids")
    s.set_defaults(func=cmd_strategies)

    s = sub.add_parser("glue", parents=[common], help="glue a compatible family")
    s.add_argument("scenario")
    s.add_argument("family")
    s.add_argument("--limit", type=int, default=1024, help="most completions to enumerate")
    s.set_defaults(func=cmd_glue)

    s = sub.add_parser("check", parents=[common], help="decide causal contextuality")
    s.add_argument("files", nargs="+", metavar="FILE", help="scenario and model (any order)")
    s.add_argument("--fail-on-contextual", action="store_true")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("fraction", parents=[common], help="contextual fraction")
    s.add_argument("files", nargs="+", metavar="FILE", help="scenario and model (any order)")
    s.set_defaults(func=cmd_fraction)

    s = sub.add_parser("vertices", parents=[common], help="deterministic models")
    s.add_argument("scenario")
    s.add_argument("--dedupe", action="store_true")
    s.set_defaults(func=cmd_vertices)

    s = sub.add_parser("play", parents=[common], help="play strategies or a model against an Experimenter")
    s.add_argument("scenario")
    s.add_argument("experimenter", help="E-strategy or distribution of E-strategies")
    s.add_argument("--nature", help="N-strategy or distribution of N-strategies")
    s.add_argument("--model", help="flat model answering the Experimenter")
    s.add_argument("--readout", help="comma-separated measurements to XOR")
    s.add_argument("--partial", action="store_true", help="read only the listed measurements played")
    s.add_argument("--labelling", help="JSON {measurement: {outcome: bit}}")
    s.set_defaults(func=cmd_play)

    s = sub.add_parser("encode", parents=[common], help="encode a GP or flat scenario")
    s.add_argument("kind", choices=("gp", "flat"))
    s.add_argument("file")
    s.set_defaults(func=cmd_encode)

    s = sub.add_parser("examples", parents=[common], help="emit a worked example bundle")
    s.add_argument("name", choices=EXAMPLES)
    s.add_argument("--out", help="directory to write the bundle files into")
    s.set_defaults(func=cmd_examples)

    s = sub.add_parser("validate", parents=[common], help="validate a JSON document")
    s.add_argument("file")
    s.add_argument("--scenario", help="scenario for strategies, distributions and families")
    s.set_defaults(func=cmd_validate)
    return p


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if args.sub_format is not None:
        args.format = args.sub_format
    if args.sub_max_strategies is not None:
        args.max_strategies = args.sub_max_strategies
    try:
        report = args.func(args)
        code = 0
    except _Abort as exc:
        report, code = exc.report, exc.code
    except EnumerationLimit as exc:
        err.write(dumps({"error": "EnumerationLimit",
                         "message": f"more than {exc.limit} strategies; "
                                    f"raise --max-strategies to enumerate them",
                         "limit": exc.limit, **getattr(args, "sizing", {})}))
        return 2
    except (InputError, ScenarioError, StrategyError, ModelError, DistributionError,
            ValueError, KeyError, TypeError) as exc:
        name = type(exc).__name__
        err.write(dumps({"error": name, "message": str(exc)}))
        return 2
    out.write(_text(args.command, report) if args.format == "text" else dumps(report))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
