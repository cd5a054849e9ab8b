import contextlib
import io as sysio
import json
import os
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from addcomb import (
    AdjacencyOracle,
    GroupDescriptor,
    GroupSubset,
    find_bi_induced,
    generated_subgroup,
    half_graph,
    regularize,
)
from addcomb.caps import Caps
from addcomb.cli import main
from addcomb.harness import (
    ExperimentConfig,
    generate_family,
    rows_to_csv,
    rows_to_json_lines,
    run_experiment,
    split_seed,
    summary_table,
)
from addcomb.io import (
    bits_to_hex,
    canonical_dumps,
    certificate_from_json,
    certificate_to_json,
    frac_parse,
    frac_str,
    graph_from_json,
    hex_to_bits,
    pattern_from_json,
    pattern_to_json,
    subset_from_json,
    subset_to_json,
    witness_from_json,
    witness_to_json,
    write_text_atomic,
)
from conftest import subsets


# ---------------------------------------------------------------- file formats


def test_hex_known_vectors():
    # little-endian by nibble: character j encodes bits 4j..4j+3
    assert bits_to_hex(0b0001, 4) == "1"
    assert bits_to_hex(0b100001, 6) == "12"
    assert bits_to_hex(0, 5) == "00"
    assert bits_to_hex(0xFF0F, 16) == "f0ff"
    assert hex_to_bits("f0ff", 16) == 0xFF0F
    assert hex_to_bits("12", 6) == 0b100001


def test_hex_errors():
    with pytest.raises(ValueError):
        bits_to_hex(1 << 4, 4)
    with pytest.raises(ValueError):
        bits_to_hex(-1, 4)
    with pytest.raises(ValueError):
        hex_to_bits("123", 4)
    with pytest.raises(ValueError):
        hex_to_bits("g", 4)
    with pytest.raises(ValueError):
        hex_to_bits("8", 3)


@given(st.integers(1, 80), st.data())
def test_hex_round_trip(order, data):
    bits = data.draw(st.integers(0, (1 << order) - 1))
    assert hex_to_bits(bits_to_hex(bits, order), order) == bits


def test_frac_str_parse():
    assert frac_str(Fraction(3, 8)) == "3/8"
    assert frac_str(Fraction(2)) == "2"
    assert frac_parse("3/8") == Fraction(3, 8)
    assert frac_parse("0.1") == Fraction(1, 10)
    assert frac_parse(0.1) == Fraction(1, 10)


def test_subset_json_round_trip_examples():
    g = GroupDescriptor([2, 2, 2, 2])
    a = GroupSubset(g, 0xFF0F)
    obj = subset_to_json(a)
    assert obj == {"moduli": [2, 2, 2, 2], "bits_hex": "f0ff"}
    assert subset_from_json(obj) == a
    # element lists are accepted on input, hex is canonical on output
    by_elems = subset_from_json(
        {"moduli": [4], "elements": [[1], [3]]}
    )
    assert sorted(by_elems.ranks()) == [1, 3]
    with pytest.raises(ValueError):
        subset_from_json({"moduli": [4]})
    with pytest.raises(ValueError):
        subset_from_json({"moduli": [4], "bits_hex": "f", "elements": [[0]]})
    with pytest.raises(ValueError):
        subset_from_json({"bits_hex": "f"})


@given(subsets())
def test_subset_json_round_trip(a):
    assert subset_from_json(subset_to_json(a)) == a


def test_pattern_json_round_trip():
    # 1-based on disk, 0-based in memory
    obj = pattern_to_json(half_graph(2))
    assert obj == {"u": 2, "v": 2, "edges": [[1, 1], [1, 2], [2, 2]]}
    assert pattern_from_json(obj) == half_graph(2)
    path = pattern_from_json({"u": 2, "v": 1, "edges": [[1, 1], [2, 1]]})
    assert path.edges == frozenset({(0, 0), (1, 0)})
    with pytest.raises(ValueError):
        pattern_from_json({"u": 2, "v": 1})
    with pytest.raises(ValueError):
        pattern_from_json({"u": 1, "v": 1, "edges": [[0, 1]]})
    with pytest.raises(ValueError):
        pattern_from_json({"u": 1, "v": 1, "edges": [[1, 2]]})


def test_witness_json_round_trip():
    z13 = GroupDescriptor([13])
    a = GroupSubset.from_ranks(z13, range(1, 7))
    w = find_bi_induced(a, half_graph(2))
    obj = witness_to_json(w)
    back = witness_from_json(z13, half_graph(2), obj)
    assert back == w


def test_graph_json():
    g = graph_from_json({"n": 3, "edges": [[0, 1], [1, 2]]})
    assert g.n == 3
    assert g.neighbor_masks[0] == 0b010
    assert g.neighbor_masks[1] == 0b101
    cay = graph_from_json(
        {"cayley_of": {"moduli": [2, 2], "bits_hex": "2"}}
    )
    assert isinstance(cay, AdjacencyOracle) and cay.n == 4
    with pytest.raises(ValueError):
        graph_from_json({"n": 3})


def test_certificate_json_round_trip():
    g = GroupDescriptor([2, 2, 2, 2])
    cert = regularize(GroupSubset(g, 0xFF0F), Fraction(1, 4))
    obj = certificate_to_json(cert)
    assert obj["achieved_error"] == "0"
    assert certificate_from_json(obj) == cert
    # string round trip through the canonical encoder too
    assert certificate_from_json(json.loads(canonical_dumps(obj))) == cert
    bad = dict(obj)
    bad["subgroup"] = dict(obj["subgroup"], index=cert.subgroup.index + 1)
    with pytest.raises(ValueError):
        certificate_from_json(bad)


def test_canonical_dumps_is_deterministic():
    assert canonical_dumps({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'
    assert canonical_dumps({"a": None, "z": True}) == '{"a":null,"z":true}'


def test_write_text_atomic(tmp_path):
    p = str(tmp_path / "out.txt")
    write_text_atomic(p, "one\n")
    write_text_atomic(p, "two\n")
    with open(p) as fh:
        assert fh.read() == "two\n"
    leftovers = [f for f in os.listdir(tmp_path) if f.startswith(".tmp-")]
    assert leftovers == []


# ------------------------------------------------------------------- harness


def test_split_seed_deterministic_and_label_sensitive():
    assert split_seed(7, "a") == split_seed(7, "a")
    assert split_seed(7, "a") != split_seed(7, "b")
    assert split_seed(7, "a") != split_seed(8, "a")
    assert 0 <= split_seed(0, "") < 1 << 64


def test_generate_family_interval():
    z13 = GroupDescriptor([13])
    a = generate_family(z13, {"kind": "interval"}, 0)
    assert sorted(a.ranks()) == [1, 2, 3, 4, 5, 6]
    short = generate_family(z13, {"kind": "interval", "length": 2}, 0)
    assert sorted(short.ranks()) == [1, 2]
    with pytest.raises(ValueError):
        generate_family(z13, {"kind": "interval", "length": 13}, 0)


def test_generate_family_planted():
    g = GroupDescriptor([2, 2, 2, 2])
    spec = {"kind": "planted", "index": 4, "cosets": 2, "noise": 0}
    a = generate_family(g, spec, 1)
    # exact union of two cosets of the index-4 subgroup
    assert a.size == 2 * g.order // 4
    hs = [h for h in __import__("addcomb").enumerate_subgroups(g) if h.index == 4]
    h = hs[0]
    for r in range(g.order):
        coset_bits = __import__("addcomb").groups.translate_bits(g, h.bits, r)
        inter = (a.bits & coset_bits).bit_count()
        assert inter in (0, h.size)
    # deterministic per seed
    assert generate_family(g, spec, 1) == a
    assert generate_family(g, spec, 2) != a
    with pytest.raises(ValueError):
        generate_family(g, {"kind": "planted", "index": 5, "cosets": 1}, 0)
    with pytest.raises(ValueError):
        generate_family(g, {"kind": "planted", "index": 4, "cosets": 5}, 0)


def test_generate_family_random_and_explicit():
    z13 = GroupDescriptor([13])
    assert generate_family(z13, {"kind": "random", "density": 0}, 5).size == 0
    assert generate_family(z13, {"kind": "random", "density": 1}, 5).size == 13
    mid = generate_family(z13, {"kind": "random", "density": 0.5}, 5)
    assert mid == generate_family(z13, {"kind": "random", "density": 0.5}, 5)
    ex = generate_family(
        z13, {"kind": "explicit", "set": {"moduli": [13], "bits_hex": "00e0"}}, 0
    )
    assert sorted(ex.ranks()) == [9, 10, 11]
    with pytest.raises(ValueError):
        generate_family(z13, {"kind": "random", "density": 2}, 0)
    with pytest.raises(ValueError):
        generate_family(
            z13, {"kind": "explicit", "set": {"moduli": [5], "bits_hex": "03"}}, 0
        )
    with pytest.raises(ValueError):
        generate_family(z13, {"kind": "mystery"}, 0)


def _planted_config(**kw):
    g = GroupDescriptor([2, 2, 2, 2])
    base = dict(
        group=g,
        family={"kind": "planted", "index": 4, "cosets": 2, "noise": 0},
        study="regularize",
        sweep=["1/4", "1/8", "1/16"],
        seeds=[1, 2],
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_run_experiment_row_grid():
    rows = run_experiment(_planted_config())
    assert len(rows) == 6
    assert rows[0].run_id == "regularize-000-s1"
    assert rows[0].operation == "regularize"
    assert rows[0].error is None
    assert rows[0].values["achieved_error"] == "0"
    assert rows[0].values["index"] == 2
    assert rows[0].wall_ms is None
    assert [r.seed for r in rows] == [1, 2, 1, 2, 1, 2]
    assert run_experiment(_planted_config(sweep=[])) == []


def test_run_experiment_rerun_is_byte_identical():
    a = rows_to_json_lines(run_experiment(_planted_config()))
    b = rows_to_json_lines(run_experiment(_planted_config()))
    assert a == b
    for line in a.splitlines():
        obj = json.loads(line)
        assert obj["schema"] == 1
        assert canonical_dumps(obj) == line


def test_run_experiment_captures_row_errors():
    cfg = ExperimentConfig(
        group=GroupDescriptor([2, 2, 2, 2]),
        family={"kind": "interval"},
        study="packing",
        sweep=["1/2"],
        seeds=[0],
        caps=Caps(vc_ground_cap=8),
    )
    row = run_experiment(cfg)[0]
    assert row.error == "CapExceeded"
    assert row.values == {}


def test_run_experiment_tester_study():
    cfg = ExperimentConfig(
        group=GroupDescriptor([13]),
        family={"kind": "interval"},
        study="tester",
        sweep=[400],
        seeds=[3],
        pattern={"u": 1, "v": 1, "edges": [[1, 1]]},
    )
    row = run_experiment(cfg)[0]
    assert row.values["exact_density"] == "6/13"
    assert row.values["within_3sigma"] is True
    assert row.values["decision"] == "YES"
    with pytest.raises(ValueError):
        ExperimentConfig(
            group=GroupDescriptor([13]), family={"kind": "interval"},
            study="tester", sweep=[10], seeds=[0],
        )
    with pytest.raises(ValueError):
        _planted_config(study="mystery")
    with pytest.raises(ValueError):
        _planted_config(output_format="xml")


def test_run_experiment_writes_output(tmp_path):
    out = str(tmp_path / "rows.jsonl")
    rows = run_experiment(_planted_config(output_path=out))
    with open(out) as fh:
        assert fh.read() == rows_to_json_lines(rows)
    out_csv = str(tmp_path / "rows.csv")
    run_experiment(_planted_config(output_path=out_csv, output_format="csv"))
    with open(out_csv) as fh:
        header = fh.readline().rstrip("\n")
    assert header == ("schema,run_id,operation,input_hash,sweep,seed,error,"
                      "epsilon,index,achieved_error,delta_used,degenerate,ell")


def test_summary_table_lists_rows():
    rows = run_experiment(_planted_config())
    text = summary_table(rows)
    assert text.splitlines()[0].startswith("run_id")
    assert "regularize-000-s1" in text
    assert summary_table([]) == "(no rows)\n"


def test_config_from_json_round_trip():
    obj = {
        "group": {"moduli": [2, 2, 2, 2]},
        "family": {"kind": "planted", "index": 4, "cosets": 2, "noise": 0},
        "study": "regularize",
        "sweep": ["1/4", "1/8", "1/16"],
        "seeds": [1, 2],
    }
    cfg = ExperimentConfig.from_json(obj)
    assert rows_to_json_lines(run_experiment(cfg)) == rows_to_json_lines(
        run_experiment(_planted_config())
    )


# ----------------------------------------------------------------------- cli


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh)
    return str(path)


def _run_cli(argv):
    buf = sysio.StringIO()
    err = sysio.StringIO()
    with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(err):
        code = main(argv)
    return code, buf.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    g13 = GroupDescriptor([13])
    interval = GroupSubset.from_ranks(g13, range(1, 7))
    made = {
        "interval": _write_json(tmp_path / "interval.json", subset_to_json(interval)),
        "union": _write_json(
            tmp_path / "union.json",
            {"moduli": [2, 2, 2, 2], "bits_hex": "f0ff"},
        ),
        "three": _write_json(
            tmp_path / "three.json",
            {"moduli": [2, 2, 2, 2], "bits_hex": "fff0"},
        ),
        "subgroup": _write_json(
            tmp_path / "subgroup.json",
            {"moduli": [2, 2, 2, 2], "bits_hex": "f000"},
        ),
        "hg1": _write_json(
            tmp_path / "hg1.json", {"u": 1, "v": 1, "edges": [[1, 1]]}
        ),
        "hg2": _write_json(
            tmp_path / "hg2.json",
            {"u": 2, "v": 2, "edges": [[1, 1], [1, 2], [2, 2]]},
        ),
        "dir": tmp_path,
    }
    return made


def test_cli_vcdim(files):
    code, out, _ = _run_cli(["vcdim", "--set", files["interval"]])
    assert code == 0
    assert json.loads(out) == {"vcdim": 2}
    code, out, _ = _run_cli(["vcdim", "--set", files["interval"], "--max-d", "1"])
    assert code == 0
    assert json.loads(out) == {
        "vcdim": 2, "threshold": 1, "exceeds_threshold": True
    }


def test_cli_vcdim_csv_format(files):
    code, out, _ = _run_cli(
        ["vcdim", "--set", files["interval"], "--format", "csv"]
    )
    assert code == 0
    assert out.splitlines() == ["vcdim", "2"]


def test_cli_ball_and_pack(files):
    code, out, _ = _run_cli(
        ["ball", "--set", files["union"], "--delta", "1/4"]
    )
    assert code == 0
    obj = json.loads(out)
    assert obj["delta"] == "1/4"
    assert obj["size"] == 4
    assert obj["members"]["bits_hex"] == "f000"
    code, out, _ = _run_cli(
        ["pack", "--set", files["union"], "--delta", "1/2"]
    )
    obj = json.loads(out)
    assert code == 0 and obj["certified"] and obj["size"] >= 1


def test_cli_regularize_certificate(files):
    code, out, _ = _run_cli(
        ["regularize", "--set", files["union"], "--eps", "1/4"]
    )
    assert code == 0
    obj = json.loads(out)
    assert obj["index"] == 4
    assert obj["achieved_error"] == "0"
    assert not obj["degenerate"]
    cert = certificate_from_json(obj)
    assert cert.index == 4


def test_cli_regularize_degenerate_exit(files):
    single = _write_json(
        files["dir"] / "single.json", {"moduli": [2, 2, 2, 2], "bits_hex": "1000"}
    )
    code, out, _ = _run_cli(
        ["regularize", "--set", single, "--eps", "1/128", "--schedule", "1/2"]
    )
    assert code == 2
    obj = json.loads(out)
    assert obj["degenerate"] and obj["index"] == 16


def test_cli_robust_high_vc_exit(files):
    g = GroupDescriptor([2] * 10)
    rng = random.Random(77)
    big = _write_json(
        files["dir"] / "big.json",
        subset_to_json(GroupSubset(g, rng.getrandbits(1024) & g.full_mask)),
    )
    code, out, _ = _run_cli(
        ["regularize", "--set", big, "--eps", "1/10", "--robust", "1",
         "--seed", "6"]
    )
    assert code == 3
    obj = json.loads(out)
    assert obj["kind"] == "high_vc"
    assert obj["report"]["frequency"] >= 0.9


def test_cli_oracle_best_subgroup(files):
    code, out, _ = _run_cli(
        ["oracle-best-subgroup", "--set", files["union"], "--eps", "1/4"]
    )
    assert code == 0
    obj = json.loads(out)
    assert obj["min_index"] <= 4
    assert obj["frontier"][0][0] == 1


def test_cli_pattern_find(files):
    code, out, _ = _run_cli(
        ["pattern-find", "--set", files["interval"], "--pattern", files["hg2"]]
    )
    assert code == 0
    obj = json.loads(out)
    assert obj["found"] is True
    assert obj["phi_u"] == [[1], [0]]
    assert obj["phi_v"] == [[0], [1]]
    assert obj["injective_u"] and obj["injective_v"]
    # the shattering route needs dimension 3, the interval only has 2
    code, out, _ = _run_cli(
        ["pattern-find", "--set", files["interval"], "--pattern", files["hg2"],
         "--via-shattering"]
    )
    assert code == 0
    assert json.loads(out) == {"found": False}


def test_cli_pattern_test(files):
    code, out, _ = _run_cli(
        ["pattern-test", "--set", files["three"], "--pattern", files["hg2"],
         "--samples", "400", "--seed", "3", "--exact"]
    )
    assert code == 0
    obj = json.loads(out)
    assert obj["decision"] == "YES"
    assert obj["bi_inducing"] == 45
    assert obj["exact_density"] == "3/32"
    assert obj["wilson_low"] <= 45 / 400 <= obj["wilson_high"]


def test_cli_distance_and_cap_exit(files):
    # dropping one whole coset leaves a free two-coset union
    code, out, _ = _run_cli(
        ["distance", "--set", files["union"], "--pattern", files["hg2"]]
    )
    assert code == 0
    assert json.loads(out) == {"distance": 4}
    big = _write_json(
        files["dir"] / "z17.json", {"moduli": [17], "bits_hex": "00000"}
    )
    code, _, err = _run_cli(["distance", "--set", big, "--pattern", files["hg1"]])
    assert code == 4
    assert json.loads(err)["error"] == "cap_exceeded"


def test_cli_densify(files):
    code, out, _ = _run_cli(
        ["densify", "--set", files["union"], "--pattern", files["hg2"],
         "--subgroup", files["subgroup"], "--samples", "500", "--seed", "1"]
    )
    assert code == 0
    obj = json.loads(out)
    assert obj["fraction"] == 1.0
    assert obj["meets_bound"] is True
    assert obj["bound"] == "1/2"
    assert len(obj["witness"]["phi_u"]) == 2


def test_cli_ap_search(files):
    code, out, _ = _run_cli(
        ["ap-search", "--set", files["interval"], "--k", "2", "--half-graph"]
    )
    assert code == 0
    obj = json.loads(out)
    assert obj["found"] is True
    assert obj["start"] == [1] and obj["step"] == [3]
    assert obj["terms"] == [[1], [4], [7], [10]]
    assert "half_graph_witness" in obj


def test_cli_kneser_check(files):
    z5 = _write_json(files["dir"] / "z5.json", {"moduli": [5], "bits_hex": "30"})
    code, out, _ = _run_cli(["kneser-check", "--set", z5, "--t", "3"])
    assert code == 0
    obj = json.loads(out)
    assert obj == {
        "t": 3, "generates": True, "size_ok": True, "contains_zero": True,
        "applies": True, "sumset_size": 5, "fills": True,
    }


def test_cli_error_exit(files):
    code, _, err = _run_cli(
        ["vcdim", "--set", str(files["dir"] / "missing.json")]
    )
    assert code == 1
    assert json.loads(err)["error"] == "FileNotFoundError"


def test_cli_caps_file_override(files):
    caps = _write_json(files["dir"] / "caps.json", {"vc_ground_cap": 2})
    code, _, err = _run_cli(
        ["vcdim", "--set", files["interval"], "--caps", caps]
    )
    assert code == 4
    assert json.loads(err)["error"] == "cap_exceeded"
    bad = _write_json(files["dir"] / "badcaps.json", {"nope": 1})
    code, _, err = _run_cli(
        ["vcdim", "--set", files["interval"], "--caps", bad]
    )
    assert code == 1


def test_cli_experiment_rerun_byte_identical(files):
    out1 = str(files["dir"] / "rows1.jsonl")
    out2 = str(files["dir"] / "rows2.jsonl")
    base = {
        "group": {"moduli": [2, 2, 2, 2]},
        "family": {"kind": "planted", "index": 4, "cosets": 2, "noise": "1/16"},
        "study": "regularize",
        "sweep": ["1/4", "1/8"],
        "seeds": [1, 2],
    }
    cfg1 = _write_json(files["dir"] / "cfg1.json",
                       dict(base, output={"path": out1}))
    cfg2 = _write_json(files["dir"] / "cfg2.json",
                       dict(base, output={"path": out2}))
    code, out, _ = _run_cli(["experiment", "--config", cfg1])
    assert code == 0
    assert out.splitlines()[0].startswith("run_id")
    code, _, _ = _run_cli(["experiment", "--config", cfg2])
    assert code == 0
    with open(out1, "rb") as f1, open(out2, "rb") as f2:
        assert f1.read() == f2.read()
