import json

import numpy as np
import pytest

from minmax_paging import harness
from minmax_paging.cli import main
from minmax_paging.report import CSV_FIELDS, ExperimentReport, read_csv_rows
from minmax_paging.trace import RequestTrace, write_trace


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr().out


@pytest.fixture
def random_trace_file(tmp_path):
    path = tmp_path / "r.trace"
    assert main(["gen", "--adv", "random", "--k", "3", "--n-pages", "9", "--length", "300",
                 "--seed", "4", "--out", str(path)]) == 0
    return path


def test_run_examples(tmp_path, capsys):
    main(["gen", "--adv", "intro-lru", "--k", "2", "--n-pages", "7", "--out", str(tmp_path / "i.trace")])
    code, out = run(["run", str(tmp_path / "i.trace"), "--format", "json"], capsys)
    rep = ExperimentReport.from_json(out)
    assert code == 0 and rep.costs["lru"].minmax == 4
    write_trace(RequestTrace(3, 2, (1, 2, 1, 2)), tmp_path / "small.trace")
    for policy in ("lru", "fifo", "greedy-min-faults", "minmax-pd"):
        code, out = run(["run", str(tmp_path / "small.trace"), "--policy", policy, "--format", "json"], capsys)
        assert ExperimentReport.from_json(out).costs[policy].minmax == 1


def test_run_minmax_pd_vs_fractional(random_trace_file, capsys):
    _, out = run(["--format", "json", "run", str(random_trace_file), "--policy", "minmax-pd"], capsys)
    integral = ExperimentReport.from_json(out).costs["minmax-pd"].minmax
    _, out = run(["frac", str(random_trace_file), "--format", "json"], capsys)
    frac = ExperimentReport.from_json(out).costs["fractional"].minmax
    assert integral <= 3 * frac + 1


def test_frac_dump_and_certify(random_trace_file, tmp_path, capsys):
    dump = tmp_path / "d.txt"
    code, out = run(["frac", str(random_trace_file), "--objective", "lq:2", "--dump", str(dump),
                     "--cert", str(tmp_path / "c.json"), "--format", "json"], capsys)
    rep = ExperimentReport.from_json(out)
    assert code == 0 and rep.passed
    assert rep.bounds["primal_dual"] == pytest.approx((4 * np.log(4)) ** 2)
    cert = json.loads((tmp_path / "c.json").read_text())
    code, out = run(["certify", str(dump), "--format", "json"], capsys)
    assert code == 0
    assert ExperimentReport.from_json(out).certificate["dual"] == pytest.approx(cert["dual"])

    lines = dump.read_text().splitlines()
    ys = [(i, float(ln.split(" y=")[1].split()[0])) for i, ln in enumerate(lines) if ln.startswith("t ")]
    i, y = max(ys, key=lambda a: a[1])
    lines[i] = lines[i].replace(f" y={lines[i].split(' y=')[1].split()[0]}", f" y={y * 10!r}")
    bad = tmp_path / "bad.txt"
    bad.write_text("\n".join(lines) + "\n")
    code, out = run(["certify", str(bad), "--format", "json"], capsys)
    rep = ExperimentReport.from_json(out)
    assert code != 0 and not rep.checks["dual_slack"]


def test_frac_tiny_instance_reports_opt_ratio(tmp_path, capsys):
    write_trace(RequestTrace(2, 4, (1, 2, 3, 4, 1, 2, 3, 4, 2, 1)), tmp_path / "t.trace")
    _, out = run(["frac", str(tmp_path / "t.trace"), "--format", "json"], capsys)
    rep = ExperimentReport.from_json(out)
    assert "brute-force" in rep.offline
    assert rep.ratios["fractional/opt"] <= rep.bounds["minmax_fractional"]


def test_certify_zero_length(tmp_path, capsys):
    path = tmp_path / "z.txt"
    path.write_text("frac-dump v1 k=2 n=0 T=0 q=2 r=0.1 delta=0.1 eps_feas_rel=1e-9 eps_feas_floor=1e-12\n")
    code, _ = run(["certify", str(path)], capsys)
    assert code == 0


def test_certify_corrupt(tmp_path, capsys):
    path = tmp_path / "c.txt"
    path.write_text("not a dump\n")
    assert main(["certify", str(path)]) == 2


def test_round_commands(random_trace_file, tmp_path, capsys):
    code, out = run(["round", str(random_trace_file), "--scheme", "det", "--format", "json",
                     "--schedule", str(tmp_path / "s.txt")], capsys)
    rep = ExperimentReport.from_json(out)
    assert code == 0 and rep.checks["threshold_invariant"]
    assert (tmp_path / "s.txt").read_text().startswith("t 1 fault=1")
    code, out = run(["round", str(random_trace_file), "--scheme", "rand", "--seed", "9", "--format", "json"], capsys)
    rep = ExperimentReport.from_json(out)
    assert code == 0 and rep.seeds == [9]


def test_duel_reports(capsys):
    code, out = run(["duel", "--adv", "det-layered", "--k", "3", "--m", "2", "--N", "200", "--format", "json"],
                    capsys)
    rep = ExperimentReport.from_json(out)
    assert code == 0
    assert rep.config["ratio_slack"] == 0.9
    assert rep.bounds["target_ratio"] == pytest.approx(harness.det_layered_target(3, 2, 200))
    code, out = run(["duel", "--adv", "rand-layered", "--m", "2", "--N", "60", "--seeds", "4",
                     "--seed", "10", "--format", "json"], capsys)
    rep = ExperimentReport.from_json(out)
    assert rep.seeds == [10, 11, 12, 13]
    assert "final_page_faults_stderr" in rep.details
    code, out = run(["duel", "--adv", "det-layered", "--m", "0", "--format", "json"], capsys)
    rep = ExperimentReport.from_json(out)
    assert code != 0 and "degenerate" in rep.details


def test_bench_rows_and_determinism(tmp_path, capsys):
    suite = {"suite": "s", "cells": [
        {"case": "a", "adv": "det-layered", "policy": "lru", "k": 2, "m": 2, "N": 100},
        {"case": "b", "adv": "rand-layered", "policy": "marking", "k": 2, "m": 2, "N": 30, "seed": 5},
        {"case": "c", "adv": "random", "policy": "frac:lq:2", "k": 2, "n_pages": 4, "length": 10, "seed": 2},
    ]}
    path = tmp_path / "suite.json"
    path.write_text(json.dumps(suite))
    code, first = run(["bench", str(path), "--workers", "1"], capsys)
    assert code == 0
    lines = first.strip().splitlines()
    assert lines[0] == ",".join(CSV_FIELDS) and len(lines) == 4
    _, second = run(["bench", str(path), "--workers", "2"], capsys)
    strip = lambda text: [r | {"runtime_ms": None} for r in read_csv_rows(text)]
    assert strip(first) == strip(second)


def test_bench_malformed_suite(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"cells": [{"adv": "wizard"}]}))
    assert main(["bench", str(path)]) == 2
    path.write_text("[1, 2]")
    assert main(["bench", str(path)]) == 2


def test_unknown_policy_and_bad_trace(tmp_path, random_trace_file):
    assert main(["run", str(random_trace_file), "--policy", "oracle"]) == 2
    bad = tmp_path / "bad.trace"
    bad.write_text("paging-trace v1 k=2 n=2\n5\n")
    assert main(["run", str(bad)]) == 2


def test_report_round_trip():
    rep = harness.duel_cruel(2, 60, "lru")
    again = ExperimentReport.from_json(rep.to_json())
    assert again == rep
    assert again.to_text() == rep.to_text()


def test_csv_output_has_fixed_schema(random_trace_file, capsys):
    _, out = run(["run", str(random_trace_file), "--format", "csv"], capsys)
    rows = read_csv_rows(out)
    assert list(rows[0]) == list(CSV_FIELDS)
