"""Smoke test for the ultrawelch Python module.

Uses an installed module if one is importable, otherwise loads the shared
library from the cargo target directory (build it first with
`cargo build -p ultrawelch-py`).
"""

import importlib.util
import json
import math
import os
import shutil
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def load():
    try:
        import ultrawelch

        return ultrawelch
    except ImportError:
        pass
    for profile in ("release", "debug"):
        lib = os.path.join(ROOT, "target", profile, "libultrawelch.so")
        if os.path.exists(lib):
            tmp = tempfile.mkdtemp()
            dest = os.path.join(tmp, "ultrawelch.so")
            shutil.copy(lib, dest)
            spec = importlib.util.spec_from_file_location("ultrawelch", dest)
            module = importlib.util.module_from_spec(spec)
            spec.loader.exec_module(module)
            return module
    sys.exit("ultrawelch not built; run `cargo build -p ultrawelch-py`")


def main():
    uw = load()

    assert uw.sym_dim(4, 2) == 10
    assert uw.sym_dim(40, 40) == math.comb(79, 40)
    assert uw.binomial_valuation(3, 2, 3) == 1
    assert uw.valuation("9/2", 3) == 2
    assert uw.valuation("0", 3) is None
    assert uw.find_field_condition_counterexample(5, 10) == [1, 2]
    assert not uw.check_field_condition(["1", "2"], prime=5)
    assert uw.check_field_condition(["1", "2"])

    tight = uw.FrameConfig(
        [["1", "0"], ["0", "1"], ["1", "1"]],
        [["1", "-1/2"], ["-1/2", "1"], ["1/2", "1/2"]],
        prime=5,
    )
    assert (tight.d, tight.n) == (2, 3)
    assert tight.frame_operator() == [["3/2", "0"], ["0", "3/2"]]
    assert tight.gram()[0][1] == "-1/2"
    r = tight.check_bound(1)
    assert r.verdict == "holds_with_equality", r
    assert (r.lhs_valuation, r.rhs_valuation) == (0, 0)
    assert json.loads(r.to_json())["verdict"] == "holds_with_equality"

    again = uw.FrameConfig.from_json(tight.to_json())
    assert again.to_json() == tight.to_json()

    basis = uw.FrameConfig.standard_basis(2, prime=3)
    r = basis.check_bound(2)
    assert r.verdict == "violated" and not r.hypothesis_satisfied
    assert (r.lhs_valuation, r.rhs_valuation) == (0, -1)

    with open(os.path.join(ROOT, "fixtures", "v1", "laurent-twisted.json")) as fh:
        laurent = uw.FrameConfig.from_json(fh.read())
    r = laurent.check_bound(1)
    assert not r.hypothesis_satisfied

    try:
        uw.FrameConfig([["1"]], [["1"]], prime=4)
    except ValueError:
        pass
    else:
        raise AssertionError("non-prime accepted")

    eq = json.loads(uw.search_equiangular(5, 2, 3, gamma="0", seed=1, workers=2))
    assert eq["best_n"] == 3
    z = json.loads(uw.search_zauner(3, 1))
    assert z["outcome"]["status"] == "found"
    space = {
        "prime": 5, "precision": 1, "scale": 0, "d": 1, "n": 1, "a": "1",
        "constraints": {"unit_norms": True, "tight": True, "gamma": "any"},
    }
    assert json.loads(uw.search_equality(json.dumps(space)))["outcome"]["status"] == "found"

    names = [entry["name"] for entry in json.loads(uw.demo_suite_json())]
    assert "hypothesis-violation-p3-m2" in names

    print("python smoke test passed")


if __name__ == "__main__":
    main()
