import json
import subprocess
import sys
from importlib import resources

import jsonschema
import numpy as np
import pytest

from cuntz.algebra import MatrixElement, perm_to_matrix
from cuntz.cli import main
from cuntz.words import Perm

from conftest import hadamard, shift_unitary_perm


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def load_schema(name):
    return json.loads(resources.files("cuntz.schemas").joinpath(name).read_text())


def test_check_identity(capsys):
    code, out, err = run_cli(
        capsys, "check", "--n", "2", "--k", "3", "--perm", "0 1 2 3 4 5 6 7"
    )
    assert code == 0
    obj = json.loads(out)
    jsonschema.validate(obj, load_schema("check.schema.json"))
    assert obj["b"] is True and obj["d"] is True
    assert obj["input_ref"] == "2 3 : 0 1 2 3 4 5 6 7"


def test_check_strict_negative_verdict(capsys):
    flip_two = shift_unitary_perm(2)
    code, out, _ = run_cli(
        capsys,
        "check",
        "--n", "2", "--k", "2",
        "--perm", " ".join(str(i) for i in flip_two.image),
        "--strict",
    )
    assert code == 4
    assert json.loads(out)["b"] is False


def test_stdout_is_byte_identical(capsys):
    argv = ["count-table", "--n", "2", "--k", "2", "--shards", "2"]
    code1, out1, _ = run_cli(capsys, *argv)
    code2, out2, _ = run_cli(capsys, *argv)
    assert code1 == code2 == 0
    assert out1 == out2
    obj = json.loads(out1)
    jsonschema.validate(obj, load_schema("count_table.schema.json"))
    assert (obj["autO"], obj["autD"]) == (4, 8)


def test_count_table_requires_n_k(capsys):
    code, _, _ = run_cli(capsys, "count-table")
    assert code == 1


def test_enumerate_with_witnesses(capsys, tmp_path):
    wit = tmp_path / "wit.jsonl"
    code, out, _ = run_cli(
        capsys,
        "enumerate",
        "--n", "2", "--k", "2",
        "--predicate", "both",
        "--shards", "2",
        "--witnesses", str(wit),
    )
    assert code == 0
    obj = json.loads(out)
    jsonschema.validate(obj, load_schema("sweep.schema.json"))
    assert obj["both"] == 4
    assert len(wit.read_text().strip().splitlines()) == 4


def test_enumerate_cap_refusal(capsys):
    code, _, err = run_cli(capsys, "enumerate", "--n", "2", "--k", "4")
    assert code == 2
    assert "refused" in err


def test_checkpoint_mismatch_exit(capsys, tmp_path):
    ckpt = tmp_path / "ck"
    with open(f"{ckpt}.shard0", "w") as fh:
        fh.write(
            json.dumps(
                {"spec": "bogus", "shard": 0, "next_index": 3,
                 "counts": {"candidates": 3, "b": 0, "d": 0, "both": 0},
                 "witnesses": 0}
            )
            + "\n"
        )
    code, _, err = run_cli(
        capsys,
        "enumerate",
        "--n", "2", "--k", "2", "--shards", "1",
        "--checkpoint", str(ckpt),
    )
    assert code == 3


def test_trees_record(capsys):
    code, out, _ = run_cli(
        capsys, "trees", "--n", "2", "--k", "3", "--perm", "0 1 2 3 4 5 6 7"
    )
    assert code == 0
    obj = json.loads(out)
    jsonschema.validate(obj, load_schema("perm_analysis.schema.json"))
    assert obj["roots"] == ["11", "22"]


def test_export_dot(capsys, tmp_path):
    out_path = tmp_path / "trees.gv"
    code, _, err = run_cli(
        capsys,
        "export-dot",
        "--n", "2", "--k", "3",
        "--perm", "0 1 2 3 4 5 6 7",
        "-o", str(out_path),
    )
    assert code == 0
    assert out_path.read_text().startswith("digraph")


def test_invert_flip(capsys):
    code, out, _ = run_cli(capsys, "invert", "--n", "2", "--k", "1", "--perm", "1 0")
    assert code == 0
    obj = json.loads(out)
    assert obj["status"] == "found" and obj["h"] == 1 and obj["verified"]
    assert obj["w"] == "2 1 : 1 0"


def test_invert_shift_not_invertible(capsys):
    p = shift_unitary_perm(2)
    code, out, _ = run_cli(
        capsys,
        "invert",
        "--n", "2", "--k", "2",
        "--perm", " ".join(str(i) for i in p.image),
        "--strict",
    )
    assert code == 4
    assert json.loads(out)["status"] == "not_invertible"


def test_order(capsys):
    code, out, _ = run_cli(capsys, "order", "--n", "2", "--k", "1", "--perm", "1 0")
    assert code == 0
    assert json.loads(out)["order"] == 2


def test_ybe_matrix_file(capsys, tmp_path):
    path = tmp_path / "flip.json"
    flip = perm_to_matrix(shift_unitary_perm(2))
    path.write_text(json.dumps(MatrixElement(2, 2, flip.data.astype(float)).to_json()))
    code, out, _ = run_cli(capsys, "ybe", "--matrix", str(path))
    assert code == 0
    obj = json.loads(out)
    assert obj["ybe"] and obj["cuntz_form"] and obj["intertwiner_form"]
    jsonschema.validate(obj, load_schema("verdict.schema.json"))


def test_diag_preserve_hadamard(capsys, tmp_path):
    path = tmp_path / "had.json"
    path.write_text(json.dumps(hadamard().to_json()))
    code, out, _ = run_cli(capsys, "diag-preserve", "--matrix", str(path), "--strict")
    assert code == 4
    obj = json.loads(out)
    assert obj["verdict"] is False and obj["R"] == 1


def test_nilpotent_cmd(capsys):
    code, out, _ = run_cli(
        capsys, "nilpotent", "--n", "2", "--k", "2", "--perm", "0 1 2 3"
    )
    assert code == 0
    obj = json.loads(out)
    assert obj["verdict"] is True and obj["degree"] >= 1


def test_weyl_cmd(capsys):
    code, out, _ = run_cli(
        capsys, "weyl", "--n", "2", "--k", "2", "--perm", "0 2 1 3", "--ad"
    )
    assert code == 0
    obj = json.loads(out)
    assert obj["certified"] and obj["m"] <= 2


def test_commutant_cmd(capsys):
    code, out, _ = run_cli(
        capsys, "commutant", "--n", "2", "--k", "1", "--perm", "0 1",
        "--grade", "0", "--cap", "1",
    )
    assert code == 0
    obj = json.loads(out)
    assert obj["dimension"] == 1
    jsonschema.validate(obj["basis"][0]["terms"], load_schema("wordsum.schema.json"))


def test_console_script_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "cuntz.cli", "check", "--n", "2", "--k", "1",
         "--perm", "1 0"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["b"] is True


def test_matrix_schema_validates_files(tmp_path):
    schema = load_schema("matrix.schema.json")
    jsonschema.validate(hadamard().to_json(), schema)


def test_count_table_grid(capsys):
    code, out, err = run_cli(capsys, "count-table", "--table", "--shards", "2")
    assert code == 0
    obj = json.loads(out)
    jsonschema.validate(obj, load_schema("count_table.schema.json"))
    assert obj["cells"]["2,2"] == [4, 8]
    assert obj["cells"]["4,1"] == [24, 24]
    assert "n\\k" in err


def test_weyl_dump_tables(capsys):
    code, out, _ = run_cli(
        capsys, "weyl", "--n", "2", "--k", "1", "--perm", "1 0",
        "--window", "4", "--m-max", "1", "--dump",
    )
    assert code == 0
    obj = json.loads(out)
    assert obj["m"] == 0
    jsonschema.validate(obj["cylinders"], load_schema("cylinder.schema.json"))
    assert obj["cylinders"]["tables"]["1"]["1"] == ["2"]
