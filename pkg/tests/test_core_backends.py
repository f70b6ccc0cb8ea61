from __future__ import annotations

import numpy as np
import pytest

from recruitment import _core, evaluator
from recruitment._core import _fallback

from conftest import cat

kernels = pytest.importorskip("recruitment._core._kernels")


def test_backend_selected():
    assert _core.BACKEND in ("cython", "python")


@pytest.mark.parametrize("c", [cat(), cat(p0=0.5, qH=0.8, qL=0.7), cat(p0=0.3, v=2.0, qH=0.9, qL=0.6, Pbar=0.8)])
def test_lattice_parity(c):
    from recruitment.model import _log_ratio

    args = (_log_ratio(c.p0, 1 - c.p0), _log_ratio(c.qH, 1 - c.qL), _log_ratio(1 - c.qH, c.qL),
            c.qH, c.qL, c.Pbar, c.v, 0.9, 60, 0, 1)
    fast, slow = kernels.Lattice(*args), _fallback.Lattice(*args)
    for upper in (False, True):
        assert fast.bracket(1e-10, upper) == slow.bracket(1e-10, upper)
        for M in (0.1, 0.4):
            assert fast.continuation(M, upper) == slow.continuation(M, upper)
            assert np.array_equal(np.asarray(fast.stop_flags(M, upper)), np.asarray(slow.stop_flags(M, upper)))
    assert np.array_equal(np.asarray(fast.posteriors), np.asarray(slow.posteriors))


@pytest.mark.parametrize("case_id", ["P1", "P2", "P3", "P4"])
def test_simulate_parity(cases, case_id, monkeypatch):
    s = cases[case_id].scenario_after
    counts = []
    for mod in (kernels, _fallback):
        monkeypatch.setattr(evaluator._core, "simulate", mod.simulate)
        counts.append(evaluator._run_range(s, 0, 1500, 99, 10_000))
    assert np.array_equal(*counts)
    assert counts[0].sum() == 1500


def test_fallback_forced_by_env():
    import os
    import subprocess
    import sys

    env = dict(os.environ, RECRUITMENT_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from recruitment import _core; print(_core.BACKEND)"],
                         capture_output=True, text=True, env=env, check=True)
    assert out.stdout.strip() == "python"
