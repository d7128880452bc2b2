#!/usr/bin/env python3
"""Reference for the source-profile second derivative: symbolic check of the
closed form plus frozen numeric instances."""

import sympy as sp

x, a, d = sp.symbols("x a d", real=True, positive=False)
A = a / (d**2 + x**2)
Axx = sp.diff(A, x, 2)
closed = a * (6 * x**2 - 2 * d**2) / (d**2 + x**2) ** 3
print("symbolic identity Axx == a(6x^2-2d^2)/(d^2+x^2)^3:",
      sp.simplify(Axx - closed) == 0)

inst = [
    dict(a=1, d=2, x=0),
    dict(a=sp.Rational(13, 10), d=sp.Rational(4, 5), x=sp.Rational(37, 100)),
]
for kv in inst:
    val = closed.subs({a: kv["a"], d: kv["d"], x: kv["x"]})
    print(f"a={kv['a']} d={kv['d']} x={kv['x']}: Axx = {sp.N(val, 30)}")

# central finite-difference cross-check at h=1e-5 (matches the closed form to ~1e-6 rel)
import mpmath as mp
mp.mp.dps = 30
def Af(xx, aa=mp.mpf("1.3"), dd=mp.mpf("0.8")):
    return aa / (dd**2 + xx**2)
h = mp.mpf("1e-5")
x0 = mp.mpf("0.37")
fd = (Af(x0 + h) - 2 * Af(x0) + Af(x0 - h)) / h**2
print(f"central FD at h=1e-5: {mp.nstr(fd, 15)}")
