import json

import numpy as np
import pytest

from ionpair_grover import trajfile
from ionpair_grover.engine import run_search
from ionpair_grover.gates import TargetIndex, all_ones
from ionpair_grover.oracle import standard_grover_run


def test_csv_layout():
    text = trajfile.dumps(trajfile.from_trajectory(run_search(2, all_ones(2), 1)))
    lines = text.splitlines()
    assert lines[0].startswith("# tool: ionpair_grover ")
    assert lines[1:5] == ["# q: 2", "# marked: 11", "# scheme: paper", "# iterations: 1"]
    assert lines[5] == "iteration,basis,bitstring,probability"
    assert lines[6].startswith("0,0,00,")
    assert float(lines[6].split(",")[3]) == pytest.approx(0.25, abs=1e-15)
    assert len(lines) == 6 + 2 * 4
    assert lines[-1].startswith("1,3,11,")


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_round_trip_is_exact(fmt):
    traj = run_search(5, TargetIndex(5, 9), 18)
    tf = trajfile.from_trajectory(traj)
    back = trajfile.loads(trajfile.dumps(tf, fmt), fmt)
    assert back.header["q"] == 5 and back.header["marked"] == "01001"
    np.testing.assert_array_equal(back.probabilities(), traj.probabilities)
    assert back.rows == tf.rows
    assert trajfile.check(back) == []


def test_json_mirror_structure():
    tf = trajfile.from_trajectory(standard_grover_run(3, all_ones(3), 2))
    data = json.loads(trajfile.dumps(tf, "json"))
    assert data["header"]["scheme"] == "standard"
    assert len(data["rows"]) == 3 * 8
    assert data["rows"][0][:3] == [0, 0, "000"]
    assert data["rows"][0][3] == pytest.approx(0.125, abs=1e-15)


def test_extension_start_in_header():
    tf = trajfile.from_trajectory(run_search(3, all_ones(3), 2, start=TargetIndex(3, 0)))
    assert tf.header["start"] == "000"
    assert "start" not in trajfile.from_trajectory(run_search(3, all_ones(3), 2)).header


def test_rows_sum_to_one():
    for q in (2, 3, 4, 5):
        sums = trajfile.from_trajectory(run_search(q, all_ones(q), 18)).probabilities().sum(axis=1)
        assert np.max(np.abs(sums - 1)) < 1e-9


def test_check_reports_problems():
    tf = trajfile.from_trajectory(run_search(2, all_ones(2), 2))
    tf.rows[0], tf.rows[1] = tf.rows[1], tf.rows[0]
    n, b, s, p = tf.rows[-1]
    tf.rows[-1] = (n, b, s, p + 1e-6)
    tf.header["marked"] = "111"
    problems = trajfile.check(tf)
    assert len(problems) == 3
    assert "iterations [2]" in problems[2]


def test_bad_input():
    with pytest.raises(ValueError):
        trajfile.dumps(trajfile.from_trajectory(run_search(2, all_ones(2), 1)), "xml")
    with pytest.raises(ValueError):
        trajfile.loads("# q: 2\n# iterations: 0\na,b,c,d\n")
