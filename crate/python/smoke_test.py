"""Smoke test for the symmheat Python bindings.

Uses an installed `symmheat_py` if there is one, otherwise loads the library
built by `cargo build --release -p symmheat-python`.
"""

import importlib.machinery
import importlib.util
import json
import math
import pathlib
import sys


def load():
    try:
        import symmheat_py

        return symmheat_py
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parent.parent
    names = ["libsymmheat_py.so", "libsymmheat_py.dylib", "symmheat_py.dll"]
    for profile in ["release", "debug"]:
        for name in names:
            path = root / "target" / profile / name
            if path.exists():
                loader = importlib.machinery.ExtensionFileLoader("symmheat_py", str(path))
                spec = importlib.util.spec_from_file_location("symmheat_py", path, loader=loader)
                module = importlib.util.module_from_spec(spec)
                loader.exec_module(module)
                return module
    sys.exit("symmheat_py not found; run `cargo build --release -p symmheat-python` first")


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def main():
    sh = load()

    flat = sh.ModelSpace()
    assert close(flat.ball_volume(1.0), math.pi)
    assert close(flat.isoperimetric_profile(math.pi), 2.0 * math.pi)
    sphere = sh.ModelSpace(kappa=1.0)
    assert close(sphere.capacity, 4.0 * math.pi)
    assert close(sphere.ball_radius(sphere.ball_volume(0.7)), 0.7, 1e-10)
    assert close(sh.theta_for_cone(math.pi), 0.5)

    r = sh.Rearrangement([1.0, 2.0, 1.0], [1.0, 3.0, 1.0])
    assert r.breaks == [0.0, 2.0, 4.0] and r.values == [3.0, 1.0]
    assert close(r.concentration(1.0, 0.5), 3.0)
    assert close(r.power_integral(2.0), 20.0)
    lhs, rhs = sh.hardy_littlewood([1.0, 1.0], [1.0, 0.0], [0.0, 1.0])
    assert lhs == 0.0 and rhs == 1.0

    try:
        sh.Rearrangement([1.0], [-1.0])
    except ValueError:
        pass
    else:
        raise AssertionError("negative values must be rejected")

    config = {
        "name": "smoke",
        "domain": {"kind": "flat_rectangle", "width": 1, "height": 1, "cells_per_unit": 12},
        "f": 1,
        "g": {"preset": "gaussian", "center": [0.4, 0.5], "width": 0.2},
        "resolution": 128,
        "dt": 0.01,
        "times": [0.05, 0.2],
    }
    normalized = json.loads(sh.normalize_config(json.dumps(config)))
    assert normalized["scenarios"][0]["theta"] == 1.0
    (result,) = sh.run_config(json.dumps(config))
    assert result.passed, result.checks
    assert len(result.u) == 2 and len(result.u[0]) == len(result.a_grid)
    gap = max(u - v for ur, vr in zip(result.u, result.v) for u, v in zip(ur, vr))
    assert gap <= 1e-2 * max(max(vr) for vr in result.v)
    assert "gaussian" in sh.list_presets()
    print("python smoke test passed:", result)


if __name__ == "__main__":
    main()
