"""Smoke test for the dirac_maxwell extension.

    pip install -e crates/python --no-build-isolation
    python crates/python/python/smoke_test.py
"""

import math
import pathlib
import tempfile

import dirac_maxwell as dm

SMALL = """
name = "smoke"

[grid]
cells = [8, 8, 8]
length = [1.0, 1.0, 1.0]

[initial]
kind = "plane_wave"
mode = [1, 2, 0]
polarization = [2.0, -1.0, 0.0]

[integrator]
steps = 8
"""


def main():
    print("dirac_maxwell", dm.__version__)

    s = dm.Scenario.from_toml(SMALL)
    assert s.name == "smoke" and s.steps == 8
    assert math.isclose(s.dt, 0.5 / 8)
    assert s.config()["integrator"]["method"] == "leapfrog"
    assert s.initial_state().shape == (8, 8, 8)

    try:
        dm.Scenario.from_toml(SMALL.replace("steps = 8", "steps = 8\ncfl = 0.9"))
    except ValueError as e:
        assert "stability" in str(e)
    else:
        raise AssertionError("unstable scenario accepted")

    with tempfile.TemporaryDirectory() as tmp:
        root = pathlib.Path(tmp)
        manifest = s.run(str(root))
        run = root / "smoke"
        rows = dm.read_monitor(str(run))
        assert len(rows) == 9
        assert rows[-1] == manifest["final_record"]
        assert dm.read_manifest(str(run))["name"] == "smoke"

        state = dm.FieldState.read(str(run / manifest["snapshots"][-1]))
        assert state.shape == (8, 8, 8)
        assert math.isclose(state.time, 8 * s.dt)
        assert len(state.array("p1")) == 512
        assert state.p0_max() == manifest["final_record"]["p0_max"]

        digest = dm.report([str(run)], str(root / "report"))
        assert "run smoke" in digest
        assert (root / "report" / "report.csv").is_file()

        try:
            dm.read_manifest(str(root))
        except FileNotFoundError:
            pass
        else:
            raise AssertionError("missing manifest not reported")

    chain = dm.constraint_chain_check("em_single_mode", k=2.0, rho0=0.3)
    assert chain["matches_expected"], chain["detail"]
    assert dm.constraint_chain_check("second_class_pair")["matches_expected"]

    rows = dm.dispersion_study([16, 32])
    assert rows[1]["relative_error"] < rows[0]["relative_error"]

    print("ok")


if __name__ == "__main__":
    main()
