"""Smoke test for the Python bindings.

Build first:  pip install --no-build-isolation -e crates/jclatt-py
Run:          python3 -m pytest python/smoke_test.py   (or plain python)
"""

import json
import math
import pathlib
import tempfile

import jclatt_py as jc

ROOT = pathlib.Path(__file__).resolve().parent.parent


def test_hopping_intervals():
    got = jc.RabiSetup().hopping_intervals_mhz()
    assert all(abs(a - b) < 1e-9 for a, b in zip(got, [220.0, 320.0, 380.0, 920.0]))


def test_winding_agrees():
    for ky, kz in [(0.0, 0.7), (0.0, 0.3), (0.5, 0.9)]:
        m = jc.m_prime(0.0, 1.0, ky, kz)
        raw, nu, _gap = jc.winding_integral(ky, kz, 0.0, 1.0)
        assert nu == jc.winding_analytic(m)
        assert abs(raw - nu) < 1e-3


def test_edge_states():
    e = sorted(abs(x) for x in jc.open_chain_spectrum(20, 0.7))
    assert e[0] < 1e-6 and e[1] < 1e-6 and e[2] > 0.1
    left, right = jc.edge_overlap(20, 0.7, law="transfer-matrix")
    assert min(left, right) > 0.999999


def test_short_dynamics():
    s = jc.NodalSetup(n_cells=3, k_z=0.7)
    assert abs(s.m_eff - (2 + 2 * math.cos(0.7 * math.pi))) < 1e-12
    r = s.edge(t_final=0.02)
    assert r["edge_site"] == 1
    # Counter-rotating terms let the total excitation number wander slightly.
    assert abs(sum(r["final_density"]) - 1.0) < 1e-2
    rho = s.edge(t_final=0.02, gamma_khz=100.0)
    assert rho["edge_density"] <= r["edge_density"] + 1e-3


def test_synthesis():
    out = jc.synthesize([(3.0, 100.0, 0.3)])
    line = out["report"]["lines"][0]
    assert line["amplitude_rel_error"] < 0.01
    assert line["phase_error"] < 1e-3


def test_config_round_trip():
    cfg = ROOT / "configs" / "fig2a.json"
    assert jc.validate_config(str(cfg))["passed"]
    with tempfile.TemporaryDirectory() as tmp:
        s = jc.run_config(str(cfg), out=tmp)
        assert s["experiment"] == "loci"
        assert (pathlib.Path(tmp) / "summary.json").exists()
        on_disk = json.loads((pathlib.Path(tmp) / "summary.json").read_text())
        assert on_disk["config_sha256"] == s["config_sha256"]


def test_schema_covers_configs():
    try:
        import jsonschema
    except ImportError:
        return
    schema = json.loads((ROOT / "schema" / "config.schema.json").read_text())
    for path in sorted((ROOT / "configs").glob("*.json")):
        jsonschema.validate(json.loads(path.read_text()), schema)


def test_bad_config_raises():
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as f:
        f.write('{"experiment": "loci", "colour": 1}')
    try:
        jc.validate_config(f.name)
    except ValueError as e:
        assert "colour" in str(e)
    else:
        raise AssertionError("expected ValueError")


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print("ok", name)
