"""Smoke test for the `exprk` extension module.

Uses an installed module when available, otherwise the shared library built by
`cargo build -p exprk-python --features extension-module`.
"""

import importlib
import math
import os
import shutil
import sys
import tempfile


def load_exprk():
    try:
        return importlib.import_module("exprk")
    except ImportError:
        pass
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    for profile in ("release", "debug"):
        lib = os.path.join(root, "target", profile, "libexprk.so")
        if os.path.exists(lib):
            tmp = tempfile.mkdtemp()
            shutil.copy(lib, os.path.join(tmp, "exprk.so"))
            sys.path.insert(0, tmp)
            return importlib.import_module("exprk")
    raise SystemExit("exprk not installed and no built library found under target/")


def main():
    ex = load_exprk()

    names = ex.method_names()
    assert "expRK4s6" in names and "expRK5s10" in names, names

    m = ex.Method("expRK4s6")
    assert (m.stages, m.batches, m.order) == (6, 4, 4), repr(m)
    assert ex.Method("expRK5s10").batches == 5
    assert ex.Method("expRK5s8").batches == 11

    report = ex.check_order_conditions(m)
    assert report.passed, str(report)
    bad = ex.check_order_conditions(m.with_scaled_weight(5, 101, 100))
    assert not bad.passed and bad.mismatches

    phis = ex.phi([[-1.0]], 2)
    assert abs(phis[0][0][0] - math.exp(-1.0)) < 1e-15
    assert abs(phis[1][0][0] - (1.0 - math.exp(-1.0))) < 1e-15

    run = ex.integrate("parabolic1d", 31, m, 8, 1.0, engine="dense")
    assert len(run.values) == 31 and run.engine_calls == 8 * m.batches
    nls = ex.integrate("nls1d", 32, ex.Method("expRK5s10"), 10, 0.1)
    assert isinstance(nls.values[0], complex)

    study = ex.run_study("example1", methods=["expRK4s6"], steps=[4, 8, 16], size=31, dense_oracle=True)
    assert study.to_csv().splitlines()[0] == "method,N,error,seconds,engine_calls"
    order = study.order("expRK4s6")
    assert order is not None and order > 3.0, order

    try:
        ex.Method("expRK9s1")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown method accepted")

    print("exprk smoke test passed")


if __name__ == "__main__":
    main()
