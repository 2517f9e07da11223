"""Smoke test for the uniform_lpt Python extension.

Build and install it first, e.g. `maturin develop -m crates/py/Cargo.toml`
or `pip install ./crates/py`, then run `python python/smoke.py`.
"""

import math
import sys

import uniform_lpt as ul


def check(cond, what):
    if not cond:
        print(f"FAIL {what}")
        sys.exit(1)
    print(f"ok   {what}")


def main():
    graham = ul.Instance([1, 1], [3, 3, 2, 2, 2], name="graham-m2")
    s = ul.lpt(graham)
    check(s.makespan == 7 and s.tasks_on(0) == [0, 2, 4], "LPT on the two-machine example")
    o = ul.opt(graham)
    check(o.makespan == 6 and o.nodes_explored > 0, "exact optimum is 6")
    check(ul.opt_enumerate(graham).makespan == o.makespan, "enumeration agrees with branch-and-bound")
    r = ul.ratio(graham)
    check(r["ratio"] == 7 / 6, "ratio is exactly 7/6")

    check(abs(ul.rho(2) - (1 + math.sqrt(17)) / 4) < 1e-12, "rho_2 closed form")
    check(f"{ul.rho(3):.2f}" == "1.38", "rho_3 rounds to 1.38")
    check(ul.char_poly(3) == [-2, -1, -1, 2], "P_3 coefficients")
    check(abs(ul.max_positive_root(ul.char_poly(4)) - ul.rho(4)) < 1e-11, "root finder matches rho_4")

    for m in range(2, 6):
        g = ul.gis_instance(m)
        rep = ul.ratio(g)
        check(abs(rep["opt"] - 1) < 1e-9 and abs(rep["ratio"] - ul.rho(m)) < 1e-6, f"tight instance m={m}")

    g3 = ul.gis_instance(3)
    check(ul.Instance.from_json(g3.to_json()) == g3, "JSON round trip")
    check(ul.certify(g3)["verdict"] == "consistent-with-minimality", "tight instance passes every check")
    few = ul.Instance([3, 2, 1], [1, 1])
    check(ul.certify(few)["verdict"] == "certified-non-minimal", "idle processor certifies non-minimality")

    res = ul.search(2, 3, restarts=20, steps=200, seed=1)
    check(res["best_ratio"] <= ul.rho(2) + 1e-9 and isinstance(res["best_instance"], ul.Instance), "search stays below rho_2")
    ceil = ul.ratio_ceiling(3, 4, 500, seed=3)
    check(ceil["within_bound"], "sampled ratios stay below rho_3")

    try:
        ul.Instance([1, 2], [1])
    except ValueError as e:
        check("non-increasing" in str(e), "unsorted speeds rejected")
    else:
        check(False, "unsorted speeds rejected")
    check(ul.Instance([1, 2], [1, 3], sort=True).speeds == [2, 1], "sort=True sorts input")
    try:
        ul.opt(ul.gis_instance(5), node_budget=1)
    except RuntimeError:
        check(True, "budget exhaustion raises RuntimeError")
    else:
        check(False, "budget exhaustion raises RuntimeError")

    print("all smoke checks passed")


if __name__ == "__main__":
    main()
