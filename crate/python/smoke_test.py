#!/usr/bin/env python3
"""Smoke test for the portopt_py extension module.

Builds nothing itself: expects `cargo build -p portopt-py` (or --release)
to have produced the cdylib under target/. Copies it next to a temp dir as
`portopt_py.so` so it can be imported, then solves the illustrative
two-asset instance and checks the known optimum.

Run from the repository root:

    cargo build -p portopt-py
    python3 python/smoke_test.py
"""

import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def find_cdylib() -> Path:
    candidates = []
    for profile in ("release", "debug"):
        for name in ("libportopt_py.so", "portopt_py.dll", "libportopt_py.dylib"):
            p = ROOT / "target" / profile / name
            if p.exists():
                candidates.append(p)
    if not candidates:
        sys.exit(
            "portopt_py cdylib not found under target/; "
            "run `cargo build -p portopt-py` first"
        )
    # prefer the most recently built one
    return max(candidates, key=lambda p: p.stat().st_mtime)


def main() -> None:
    lib = find_cdylib()
    tmp = tempfile.mkdtemp(prefix="portopt-smoke-")
    shutil.copy(lib, Path(tmp) / "portopt_py.so")
    sys.path.insert(0, tmp)

    import portopt_py

    inst = portopt_py.Instance(
        prices=[6075, 3105],
        returns=[12500, 10000],
        omega=[
            [0.832843e-4, 0.485325e-4],
            [0.485325e-4, 6.51298e-4],
        ],
        budget=9_000_000,
        risk=3e-5,
        labels=["A1", "A2"],
    )
    assert inst.n == 2
    assert inst.budget == 9_000_000

    result = inst.solve()
    assert result["optimum"] == [779, 207], result
    assert result["return_value"] == 11_807_500, result
    assert result["proven"] is True, result
    assert inst.is_feasible(result["optimum"]), result

    border = inst.border_risk()
    assert border["r_b_sq"] > 0.0, border

    # the module-level CSV loader must agree with the constructor
    loaded = portopt_py.load_instance(
        str(ROOT / "data" / "illustrative.csv"),
        str(ROOT / "data" / "illustrative_cov.csv"),
        9_000_000,
        3e-5,
    )
    result2 = loaded.solve(max_cuts=2)
    assert result2["optimum"] == [779, 207], result2

    print("smoke test passed: optimum", result["optimum"], "return", result["return_value"])


if __name__ == "__main__":
    main()
