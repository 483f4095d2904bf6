"""Smoke test for the pfexpm_py extension module."""

import math
import sys

import pfexpm_py as pf


def check(name, ok, detail=""):
    print(f"{'ok  ' if ok else 'FAIL'} {name} {detail}")
    return ok


def main():
    results = []

    roots, weights = pf.pole_table(8)
    results.append(check("pole table size", len(roots) == 8 and len(weights) == 8))
    results.append(check("poles in annulus", all(1.0 <= abs(t) <= 8.0 for t in roots)))

    x = -3.0
    gap = abs(pf.eval_pf(16, x) - math.exp(x))
    results.append(check("scalar R_16 vs exp", gap <= pf.bound_m1(16), f"{gap:.3e}"))
    results.append(check("err_n agrees", abs(pf.err_n(16, x) - gap) < 1e-15))
    results.append(check("M2 finite", 0.0 < pf.bound_m2(16) < 1e-6))

    a = pf.gen_matrix("lap1d", 40)
    r = pf.expm(a, 16)
    err = pf.norm2_diff(r["value"], pf.exp_oracle(a))
    eps = pf.truncation_gap(16, 4.0)
    results.append(check("lap1d full within bound", err <= eps and r["error_bound"] == eps, f"{err:.3e} <= {eps:.3e}"))

    v = [1.0] + [0.0] * 39
    act = pf.expm_action(a, v, 16)["value"]
    col = [row[0] for row in r["value"]]
    diff = max(abs(p - q) for p, q in zip(act, col))
    results.append(check("action matches first column", diff < 1e-13, f"{diff:.1e}"))

    b = pf.gen_matrix("random", 30, 0.0, 5.0, seed=3)
    s = pf.expm(b, 32, shift="auto")
    ref = pf.exp_oracle(b)
    scale = max(abs(z) for row in ref for z in row)
    rel = pf.norm2_diff(s["value"], ref) / scale
    results.append(check("shifted positive spectrum", s["shift"] > 0 and rel < 1e-8, f"c={s['shift']:.3f} rel={rel:.1e}"))

    h = [[-2.0, 1j], [-1j, -2.0]]
    c = pf.expm(h, 16)["value"]
    herm = abs(c[0][1] - c[1][0].conjugate())
    results.append(check("complex Hermitian input", herm < 1e-15 and abs(c[0][1]) > 0))

    try:
        pf.expm(a, 5)
        results.append(check("odd order rejected", False))
    except ValueError:
        results.append(check("odd order rejected", True))

    t1 = pf.expm(b, 16, shift=5.0, threads=1)["value"]
    t3 = pf.expm(b, 16, shift=5.0, threads=3)["value"]
    results.append(check("thread count does not change result", t1 == t3))

    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
