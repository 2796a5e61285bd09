import json
import pathlib

import pytest

from cobarkit.cli import EXIT_FAIL, EXIT_INPUT, EXIT_PASS, main
from cobarkit.errors import ManifestError
from cobarkit.manifest import build_manifest, load_manifest

MANIFESTS = pathlib.Path(__file__).parent.parent / "manifests"


def write(tmp_path, doc, name="m.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc, encoding="utf-8")
    return str(path)


def minimal():
    return json.loads((MANIFESTS / "minimal.json").read_text(encoding="utf-8"))


def test_minimal_manifest_passes(capsys):
    assert main(["all", "--manifest", str(MANIFESTS / "minimal.json")]) == EXIT_PASS
    out = capsys.readouterr().out
    assert "PASS structure trivial" in out and "H^0 = 1" in out


def test_wrong_differential_is_rejected_by_name(tmp_path, capsys):
    doc = minimal()
    doc["complexes"]["bad"] = {"basis": [["a", 0], ["b", 1], ["c", 2]],
                               "differential": {"a": {"b": "1"}, "b": {"c": "1"}}}
    with pytest.raises(ManifestError, match="complex 'bad': differential does not square to zero"):
        build_manifest(doc)
    assert main(["cohomology", "--manifest", write(tmp_path, doc)]) == EXIT_INPUT
    assert "bad" in capsys.readouterr().err


def test_parse_errors_report_line_and_column(tmp_path, capsys):
    path = write(tmp_path, '{\n  "cooperad": "coCom",\n  "max_arity": 3,,\n}')
    with pytest.raises(ManifestError, match="line 3, column 18"):
        load_manifest(path)
    assert main(["cohomology", "--manifest", path]) == EXIT_INPUT
    assert "line 3" in capsys.readouterr().err


def test_missing_manifest_is_an_input_error(tmp_path):
    assert main(["cohomology", "--manifest", str(tmp_path / "absent.json")]) == EXIT_INPUT


def test_large_arity_needs_the_override(tmp_path):
    path = str(MANIFESTS / "minimal.json")
    assert main(["cohomology", "--manifest", path, "--max-arity", "7"]) == EXIT_INPUT
    assert main(["cohomology", "--manifest", path, "--max-arity", "7", "--allow-large-arity"]) == EXIT_PASS


def test_unknown_command_and_bad_flags():
    path = str(MANIFESTS / "minimal.json")
    assert main(["frobnicate", "--manifest", path]) == EXIT_INPUT
    assert main(["cohomology"]) == EXIT_INPUT
    assert main(["cohomology", "--manifest", path, "--seed", "-1"]) == EXIT_INPUT


def test_unresolved_names_are_input_errors(tmp_path):
    doc = minimal()
    doc["structures"]["ghost"] = {"complex": "nowhere"}
    assert main(["check-structure", "--manifest", write(tmp_path, doc)]) == EXIT_INPUT
    doc = minimal()
    doc["commands"]["check-structure"] = {"structures": ["ghost"]}
    assert main(["check-structure", "--manifest", write(tmp_path, doc)]) == EXIT_INPUT


def test_failing_structure_exits_one_with_a_witness(tmp_path, capsys):
    doc = {
        "cooperad": "s^-1 coAs", "max_arity": 3,
        "complexes": {"plane": {"basis": [["x", 0], ["y", 0]]}},
        "structures": {"skew": {"complex": "plane", "operations": {"2": [
            [["x", "x"], {"x": "1", "y": "1"}], [["y", "x"], {"y": "1"}]]}}},
        "commands": {"check-structure": {}},
    }
    out = tmp_path / "r.json"
    assert main(["check-structure", "--manifest", write(tmp_path, doc), "--json-out", str(out)]) == EXIT_FAIL
    assert "FAIL structure skew" in capsys.readouterr().out
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["ok"] is False
    assert report["checks"][0]["witness"]


def test_json_reports_are_byte_identical(tmp_path):
    path = str(MANIFESTS / "hochschild.json")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["check-linf", "--manifest", path, "--seed", "3", "--json-out", str(a)]) == EXIT_PASS
    assert main(["check-linf", "--manifest", path, "--seed", "3", "--json-out", str(b)]) == EXIT_PASS
    assert a.read_bytes() == b.read_bytes()


def test_hochschild_manifest_passes_every_listed_check():
    assert main(["all", "--manifest", str(MANIFESTS / "hochschild.json")]) == EXIT_PASS


def test_check_assoc_on_four_algebras(tmp_path):
    doc = json.loads((MANIFESTS / "hochschild.json").read_text(encoding="utf-8"))
    doc["max_arity"] = 3
    doc["commands"] = {"check-assoc": {"algebras": ["dual", "triangular", "dual", "triangular"]}}
    assert main(["check-assoc", "--manifest", write(tmp_path, doc), "--seed", "7"]) == EXIT_PASS


def test_transfer_output_round_trips(tmp_path):
    out = tmp_path / "transfer.json"
    assert main(["transfer", "--manifest", str(MANIFESTS / "massey.json"), "--json-out", str(out)]) == EXIT_PASS
    fragment = json.loads(out.read_text(encoding="utf-8"))["outputs"]
    doc = json.loads((MANIFESTS / "massey.json").read_text(encoding="utf-8"))
    for section in ("complexes", "structures", "morphisms"):
        doc.setdefault(section, {}).update(fragment[section])
    doc["commands"] = {"check-structure": {"structures": ["massey.min"]},
                       "check-morphism": {"morphisms": ["massey.min.inclusion"]}}
    assert main(["all", "--manifest", write(tmp_path, doc)]) == EXIT_PASS
    m = load_manifest(write(tmp_path, doc, "again.json"))
    Q = m.structures["massey.min"].structure
    assert any(len(t) == 3 for _, t in Q.data)


def test_uniqueness_cell_command(capsys):
    assert main(["check-homotopy", "--manifest", str(MANIFESTS / "massey.json"), "--max-arity", "3"]) == EXIT_PASS
    assert "PASS uniqueness first~second" in capsys.readouterr().out
