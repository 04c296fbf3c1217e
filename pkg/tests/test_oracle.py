import json
import random

from emb3r4 import oracle
from emb3r4.oracle import (negative_symbolic, negative_trial, random_alpha, random_non_codazzi, replay,
                           roundtrip_trial, run_negative, run_roundtrip)
from emb3r4.tensors import SymForm2, SymForm3, det_A


def test_generators_respect_bounds():
    rng = random.Random(0)
    for _ in range(100):
        a = random_alpha(rng)
        assert det_A(a) > 0
        assert all(abs(v.numerator) <= 3 and v.denominator <= 8 for v in a.components())


def test_roundtrip_trial_passes_on_identity():
    assert roundtrip_trial(SymForm2.identity(), SymForm3.from_values(range(10))) == []


def test_roundtrip_suite_small():
    rec = run_roundtrip(7, 50)
    assert rec["passed"] and rec["failures"] == 0 and rec["first_failure"] is None


def test_roundtrip_suite_is_deterministic():
    a, b = run_roundtrip(3, 20), run_roundtrip(3, 20)
    a.pop("wall_time_s"), b.pop("wall_time_s")
    assert a == b


def test_negative_trial_detects_broken_symmetry():
    rng = random.Random(5)
    res = negative_trial(random_alpha(rng), random_non_codazzi(rng))
    assert res["h0_scaling"] and res["dependence_zero"]


def test_negative_suite_small():
    rec = run_negative(11, 100)
    assert rec["passed"] and rec["h0_scaling_holds"] == 100


def test_zero_trials_pass_vacuously():
    assert run_roundtrip(1, 0)["passed"] and run_negative(1, 0)["passed"]


def test_negative_symbolic_polynomials_are_nonzero():
    rec = negative_symbolic()
    assert rec["passed"] and len(rec["polynomials"]) == 6


def test_failure_dump_replays(tmp_path, monkeypatch):
    path = tmp_path / "fail.json"
    real = oracle.roundtrip_trial
    monkeypatch.setattr(oracle, "roundtrip_trial", lambda a, b: ["injected"])
    rec = run_roundtrip(9, 3, dump=str(path))
    assert rec["failures"] == 3 and rec["first_failure"]["trial"] == 0
    dumped = json.loads(path.read_text())
    assert dumped["failed"] == ["injected"]
    monkeypatch.setattr(oracle, "roundtrip_trial", real)
    first = replay(str(path))
    assert first == replay(str(path))
    assert first["passed"] and first["trial"] == 0
