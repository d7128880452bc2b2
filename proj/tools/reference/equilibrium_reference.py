#!/usr/bin/env python3
"""Reference values for the parameter/equilibrium module, computed with mpmath.

Prints 30-digit values that are frozen into the C++ unit tests:
  - unique real root v0 of h(v) = v^3 - 3(1-1/gamma) v + 3 beta/gamma and w0=(v0+beta)/gamma
  - admissibility scan of the delta condition
  - derived constants: alpha at V=0,M=0; small-data thresholds; v0 upper bound
"""

import mpmath as mp

mp.mp.dps = 40


def h(v, beta, gamma):
    return v**3 - 3 * (1 - 1 / gamma) * v + 3 * beta / gamma


def real_root(beta, gamma):
    roots = mp.polyroots([1, 0, -3 * (1 - 1 / gamma), 3 * beta / gamma])
    real = [r.real for r in roots if abs(r.imag) < mp.mpf("1e-30")]
    assert len(real) == 1, (beta, gamma, roots)
    return real[0]


def delta_condition(beta, gamma, delta):
    return mp.sqrt(1 + 1 / (delta * gamma)) * (2 - (3 + 1 / delta) / gamma) + 3 * beta / gamma


def admissible(beta, gamma, n_grid=64):
    disc = (1 - gamma) ** 3 / gamma**3 + mp.mpf(9) / 4 * beta**2 / gamma**2
    if disc <= 0:
        return False, None
    lo, hi = mp.mpf("1e-4"), mp.mpf("0.2499")
    for i in range(n_grid):
        d = lo * (hi / lo) ** (mp.mpf(i) / (n_grid - 1))
        if delta_condition(beta, gamma, d) > 0:
            return True, d
    return False, None


def report(beta, gamma):
    v0 = real_root(beta, gamma)
    w0 = (v0 + beta) / gamma
    ok, wit = admissible(beta, gamma)
    print(f"beta={beta} gamma={gamma}")
    print(f"  v0   = {mp.nstr(v0, 30)}")
    print(f"  w0   = {mp.nstr(w0, 30)}")
    print(f"  h(v0)= {mp.nstr(h(v0, beta, gamma), 5)}")
    print(f"  v0^2-1 = {mp.nstr(v0**2 - 1, 30)}")
    print(f"  admissible={ok} witness_delta={mp.nstr(wit, 10) if wit else None}")
    if ok:
        bound = -mp.sqrt(1 + 1 / (wit * gamma))
        print(f"  upper bound -sqrt(1+1/(delta*gamma)) = {mp.nstr(bound, 30)}")
        print(f"  lower bound min(-beta,-sqrt3)        = {mp.nstr(min(-beta, -mp.sqrt(3)), 30)}")
        assert min(-beta, -mp.sqrt(3)) <= v0 < bound
        assert 1 / max(beta**2 - 1, 2) <= 1 / (v0**2 - 1) < wit * gamma
        print(f"  alpha(V=0,M=0) = 1/(gamma*(v0^2-1)) = {mp.nstr(1 / (gamma * (v0**2 - 1)), 30)}")
    print()


print("== equilibrium roots ==")
report(mp.mpf(6), mp.mpf(8))
report(mp.mpf(4), mp.mpf(6))
report(mp.mpf(7), mp.mpf(9))

print("== non-admissible example (beta=1, gamma=1) ==")
disc = (1 - 1) ** 3 / 1 + mp.mpf(9) / 4
vals = []
for i in range(64):
    d = mp.mpf("1e-4") * (mp.mpf("0.2499") / mp.mpf("1e-4")) ** (mp.mpf(i) / 63)
    vals.append(delta_condition(mp.mpf(1), mp.mpf(1), d))
print(f"  discriminant = {mp.nstr(disc, 10)} (>0)")
print(f"  max over grid of second condition = {mp.nstr(max(vals), 10)} (must be <= 0)")
assert max(vals) < 0

print("\n== delta=0.2 checks for (6,8) ==")
print(f"  second condition value = {mp.nstr(delta_condition(mp.mpf(6), mp.mpf(8), mp.mpf('0.2')), 30)}")
print(f"  inclusion-set corner: (2*0.2+1)/0.2 = {mp.nstr((2 * mp.mpf('0.2') + 1) / mp.mpf('0.2'), 10)}")
print(f"  -sqrt(1.625) = {mp.nstr(-mp.sqrt(mp.mpf('1.625')), 30)}")

print("\n== small-data thresholds (beta=6, gamma=8) ==")
beta, gamma = mp.mpf(6), mp.mpf(8)
m = max(mp.sqrt(3), beta)
thr_V = min(mp.mpf(1), 1 / (gamma * (1 + 2 * m)))
thr_M = min(1 / mp.sqrt(gamma), 1 / (2 * gamma * (1 + m)))
print(f"  threshold ||V||_Y = {mp.nstr(thr_V, 30)} (= 1/104)")
print(f"  threshold M       = {mp.nstr(thr_M, 30)} (= 1/112)")
