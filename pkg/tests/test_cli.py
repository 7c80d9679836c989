import io
import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from causalctx.cli import run
from causalctx.core import scenario_to_json
from causalctx.encodings import chsh_2chain, two_chain_gp
from causalctx.io import dumps

from oracles import s1, s2

ROOT = Path(__file__).resolve().parents[1]
BUNDLES = ROOT / "bundles"


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def cli_json(*argv):
    code, out, err = cli(*argv)
    assert code == 0, err
    return json.loads(out)


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        p = tmp_path / name
        p.write_text(obj if isinstance(obj, str) else dumps(obj))
        return p
    return write


def test_histories_on_s1(files):
    p = files("s1.json", scenario_to_json(s1()))
    rep = cli_json("histories", p)
    assert rep["count"] == 3
    assert rep["histories"] == [[], [["x", "0"]], [["x", "1"]]]


def test_histories_maximal_on_s2(files):
    p = files("s2.json", scenario_to_json(s2()))
    rep = cli_json("histories", p, "--maximal")
    assert rep["count"] == 11 and rep["maximal_count"] == 5
    assert len(rep["histories"]) == 5


def test_strategies_with_context(files):
    p = files("s2.json", scenario_to_json(s2()))
    assert cli_json("strategies", p)["count"] == 5
    rep = cli_json("strategies", p, "--context", "z")
    assert rep["count"] == 1
    assert rep["strategies"][0]["maximal_histories"] == [[]]
    code, _, err = cli("strategies", p, "--context", "w")
    assert code == 2 and "unknown" in err


def test_enumeration_limit_reports_size(files):
    p = files("c.json", scenario_to_json(chsh_2chain()))
    code, out, err = cli("strategies", p, "--max-strategies", "10")
    assert code == 2 and out == ""
    rep = json.loads(err)
    assert rep == {"error": "EnumerationLimit", "limit": 10, "histories": 21,
                   "message": rep["message"]}
    code, _, _ = cli("--max-strategies", "10", "strategies", p)
    assert code == 2


def test_check_and_fraction_on_ghz():
    rep = cli_json("check", BUNDLES / "ghz-scenario.json", BUNDLES / "ghz-model.json")
    assert rep["status"] == "causally_contextual"
    assert rep["certificate"]
    assert cli_json("fraction", BUNDLES / "ghz-model.json",
                    BUNDLES / "ghz-scenario.json")["contextual_fraction"] == "1"


def test_check_noncontextual_reports_global_section():
    rep = cli_json("check", BUNDLES / "chsh-2chain-model.json")
    assert rep["status"] == "causally_noncontextual"
    assert rep["global_section"]["semiring"] == "rational"


def test_fail_on_contextual_exit_code():
    code, out, _ = cli("check", BUNDLES / "pr-flat-model.json", "--fail-on-contextual")
    assert code == 1
    assert json.loads(out)["status"] == "causally_contextual"
    code, _, _ = cli("check", BUNDLES / "chsh-2chain-model.json", "--fail-on-contextual")
    assert code == 0


def test_text_format_before_or_after_the_command():
    for argv in (["--format", "text", "fraction", BUNDLES / "pr-flat-model.json"],
                 ["fraction", BUNDLES / "pr-flat-model.json", "--format", "text"]):
        code, out, _ = cli(*argv)
        assert code == 0
        assert out == "contextual fraction 1, noncontextual fraction 0\n"


def test_possibilistic_check(files):
    raw = json.loads((BUNDLES / "ghz-model.json").read_text())
    raw["semiring"] = "boolean"
    for c in raw["contexts"]:
        c["distribution"]["semiring"] = "boolean"
        for entry in c["distribution"]["support"]:
            entry["weight"] = True
    raw["scenario"] = str(BUNDLES / "ghz-scenario.json")
    p = files("ghz-bool.json", raw)
    rep = cli_json("check", p)
    assert rep == {"status": "causally_contextual", "semiring": "boolean"}


def test_vertices(files):
    p = files("c.json", scenario_to_json(chsh_2chain()))
    rep = cli_json("vertices", p)
    assert rep["count"] == 64
    assert cli_json("vertices", p, "--dedupe")["count"] == 64


def test_glue_bundle():
    rep = cli_json("glue", BUNDLES / "gluing-scenario.json", BUNDLES / "gluing-family.json")
    assert rep["outcome"] == "multiple_completions"
    assert rep["completion_count"] == 2
    assert rep["union_deterministic"] and not rep["union_total"]
    rep = cli_json("glue", BUNDLES / "gluing-scenario.json", BUNDLES / "gluing-family.json",
                   "--limit", "1")
    assert rep["truncated"] and rep["completion_count"] == 1


def test_play_with_nature_strategy(files):
    M = s2()
    sp = files("s2.json", scenario_to_json(M))
    tau = files("tau.json", {"kind": "E", "maximal_histories": [[["x", "0"]], [["x", "1"]]]})
    sigma = files("sigma.json", {"kind": "N", "maximal_histories": [[["x", "1"], ["y", "1"]]]})
    rep = cli_json("play", sp, tau, "--nature", sigma, "--readout", "x")
    assert rep["playouts"]["support"] == [{"element": [[["x", "1"]]], "weight": "1"}]
    assert rep["parity"] == {"1": "1"}


def test_play_anders_browne_bundle():
    for i in (0, 1):
        for j in (0, 1):
            rep = cli_json("play", BUNDLES / "anders-browne-scenario.json",
                           BUNDLES / f"anders-browne-e{i}{j}.json",
                           "--model", BUNDLES / "anders-browne-model.json",
                           "--readout", f"A{i},B{j},C{i ^ j}",
                           "--labelling", BUNDLES / "anders-browne-labelling.json")
            assert rep["parity"] == {str(i & j): "1"}


def test_play_needs_exactly_one_nature_source():
    code, _, err = cli("play", BUNDLES / "anders-browne-scenario.json",
                       BUNDLES / "anders-browne-e00.json")
    assert code == 2 and "exactly one" in err


def test_encode_gp_two_chain(files):
    gp = two_chain_gp()
    raw = {"name": "2chain",
           "sites": [{"id": w, "inputs": list(gp.inputs[w]), "outputs": list(gp.outputs[w])}
                     for w in gp.sites],
           "order": [["A", "B"]]}
    p = files("gp.json", raw)
    enc = cli_json("encode", "gp", p)
    q = files("enc.json", enc)
    assert cli_json("histories", q)["count"] == 21
    assert cli_json("strategies", q)["count"] == 64
    assert cli_json("validate", p)["kind"] == "gp"


def test_encode_flat(files):
    p = files("f.json", {"measurements": [{"id": "a", "outcomes": ["0", "1"]}]})
    assert cli_json("encode", "flat", p)["enabling"] == "flat"


def test_examples_to_stdout_and_directory(tmp_path):
    rep = cli_json("examples", "gluing")
    assert rep["expect"] == {"glue": "multiple_completions", "completion_count": 2}
    man = cli_json("examples", "ghz", "--out", tmp_path)
    assert (tmp_path / "ghz.bundle.json").exists()
    assert set(man["files"]) == {"scenario", "model"}
    assert (tmp_path / "ghz-model.json").read_text() == (BUNDLES / "ghz-model.json").read_text()


@pytest.mark.parametrize("doc, needs_scenario", [
    ("ghz-scenario.json", False), ("ghz-model.json", False),
    ("anders-browne-e11.json", True), ("chsh-2chain-mixture.json", True),
    ("gluing-family.json", True),
])
def test_validate_bundle_documents(doc, needs_scenario):
    scen = {"anders-browne-e11.json": "anders-browne-scenario.json",
            "chsh-2chain-mixture.json": "chsh-2chain-scenario.json",
            "gluing-family.json": "gluing-scenario.json"}.get(doc)
    argv = ["validate", BUNDLES / doc] + (["--scenario", BUNDLES / scen] if scen else [])
    assert cli_json(*argv)["valid"] is True
    if needs_scenario:
        code, _, err = cli("validate", BUNDLES / doc)
        assert code == 2 and "--scenario" in err


def test_input_errors_exit_2_with_json(files):
    bad = files("bad.json", '{"measurements": [')
    code, out, err = cli("histories", bad)
    assert code == 2 and out == ""
    rep = json.loads(err)
    assert rep["error"] == "InputError" and "bad.json:1:" in rep["message"]
    p = files("dup.json", {"measurements": [{"id": "x", "outcomes": ["0"]},
                                            {"id": "x", "outcomes": ["1"]}]})
    code, _, err = cli("histories", p)
    assert code == 2 and json.loads(err)["error"] == "ScenarioError"
    code, _, _ = cli("no-such-command")
    assert code == 2


def test_incompatible_model_is_an_input_error(files):
    raw = json.loads((BUNDLES / "pr-flat-model.json").read_text())
    raw["scenario"] = str(BUNDLES / "pr-flat-scenario.json")
    raw["contexts"][0]["distribution"]["support"][0]["element"]["maximal_histories"] = \
        [[["A0", "1"], ["B0", "1"]]]
    p = files("m.json", raw)
    code, _, err = cli("check", p)
    assert code == 2
    assert json.loads(err)["error"] in ("IncompatibleModel", "WeightSumNotOne")


def manifests():
    return sorted(BUNDLES.glob("*.bundle.json"))


@pytest.mark.parametrize("manifest", manifests(), ids=lambda p: p.name)
def test_bundle_expectations(manifest):
    man = json.loads(manifest.read_text())
    files = {k: BUNDLES / v for k, v in man["files"].items()}
    for key, path in files.items():
        if key == "labelling":
            continue
        scen = [] if key == "scenario" else ["--scenario", files["scenario"]]
        assert cli_json("validate", path, *scen)["valid"]
    expect = man["expect"]
    if "check" in expect:
        assert cli_json("check", files["scenario"], files["model"])["status"] == expect["check"]
        assert cli_json("fraction", files["model"])["contextual_fraction"] == \
            expect["contextual_fraction"]
    if "glue" in expect:
        rep = cli_json("glue", files["scenario"], files["family"])
        assert rep["outcome"] == expect["glue"]
        assert rep["completion_count"] == expect["completion_count"]


def test_console_script_is_installed():
    exe = shutil.which("causalctx")
    cmd = [exe] if exe else [sys.executable, "-m", "causalctx.cli"]
    res = subprocess.run(cmd + ["fraction", str(BUNDLES / "ghz-model.json")],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert json.loads(res.stdout)["contextual_fraction"] == "1"
