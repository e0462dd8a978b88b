#!/usr/bin/env python3
"""Builds the revival_py extension and checks a few known answers."""

import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build_module() -> Path:
    subprocess.run(
        ["cargo", "build", "-p", "revival-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "debug" / "librevival_py.so"
    stage = Path(tempfile.mkdtemp(prefix="revival_py_"))
    shutil.copy(lib, stage / "revival_py.so")
    return stage


def main() -> int:
    sys.path.insert(0, str(build_module()))
    import revival_py

    # free periodic spectrum: 0, 1, 1, 4, 4
    eigs = [lam for (_, lam, _) in revival_py.spectrum("zero", "periodic", 5)]
    expected = [0.0, 1.0, 1.0, 4.0, 4.0]
    assert all(abs(a - b) < 1e-8 for a, b in zip(eigs, expected)), eigs

    # free discriminant: 2 cos(2 pi sqrt(lambda))
    for lam in (0.3, 2.0, 7.5):
        delta = revival_py.discriminant("zero", lam)
        assert abs(delta - 2 * math.cos(2 * math.pi * math.sqrt(lam))) < 1e-8

    # half a period of free evolution flips cos x (t = pi at frequency 1)
    samples = revival_py.evolve(
        "zero",
        '{"segments": [{"lo": 0.0, "hi": 6.283185307179586, "coeffs": [1.0, 0.0, 0.0, 0.0]}]}',
        5,
        64,
        math.pi,
    )
    # constant datum: u(t) = e^{-i * 0 * t} * 1 stays 1
    assert all(abs(s - 1.0) < 1e-8 for s in samples), samples[:4]

    ratio, table = revival_py.revival_ratio(
        "section5_potential", "section5_sawtooth", 100, 1000, 1, 10
    )
    assert 0.0 < ratio < 0.5, ratio
    assert len(table) == 20, len(table)

    print("smoke test: ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
