#!/usr/bin/env python3
"""Reference for windowed fast-time averaging.

Part 1 freezes closed-form/quadrature values for the window-average unit tests.
Part 2 validates the residual-halving measurement design: for t chosen as an
integer multiple of the base fast period, the windowed mean of the frozen-state
right-hand side minus the slow-envelope right-hand side scales like eta/omega1,
with ratio ~ 1/2 under omega1 doubling at every grid point.
"""

import mpmath as mp

mp.mp.dps = 30


def wavg(f, t, w1):
    lo, hi = t - mp.pi / w1, t + mp.pi / w1
    return w1 / (2 * mp.pi) * mp.quad(f, [lo, hi], maxdegree=12)


print("== closed-form anchors (omega1=100, eta=1, t=0.7) ==")
w1, eta = mp.mpf(100), mp.mpf(1)
w2 = w1 + eta
t = mp.mpf("0.7")
v = wavg(lambda s: mp.sin(w1 * s) ** 2, t, w1)
print(f"mean sin^2(w1 s)      = {mp.nstr(v, 20)} (expect 0.5)")
v = wavg(lambda s: mp.sin(w1 * s), t, w1)
print(f"mean sin(w1 s)        = {mp.nstr(v, 20)} (expect 0)")
v = wavg(lambda s: mp.sin(w2 * s), t, w1)
closed = w1 / (2 * mp.pi * w2) * (mp.cos(w2 * (t - mp.pi / w1)) - mp.cos(w2 * (t + mp.pi / w1)))
print(f"mean sin(w2 s)        = {mp.nstr(v, 20)}")
print(f"  closed form         = {mp.nstr(closed, 20)}")
v = wavg(lambda s: mp.sin(w1 * s) * mp.sin(w2 * s), t, w1)
print(f"mean sin(w1 s)sin(w2 s) = {mp.nstr(v, 20)}")
print(f"  (1/2)cos(eta t)       = {mp.nstr(mp.cos(eta * t) / 2, 20)}")
print(f"  residual              = {mp.nstr(v - mp.cos(eta * t) / 2, 10)} (O(eta/omega1))")


def fields(x, a, b, d1, d2, x0):
    A = a / (d1**2 + x**2)
    B = b / (d2**2 + (x - x0) ** 2)
    Axx = a * (6 * x**2 - 2 * d1**2) / (d1**2 + x**2) ** 3
    Bxx = b * (6 * (x - x0) ** 2 - 2 * d2**2) / (d2**2 + (x - x0) ** 2) ** 3
    return A, B, Axx, Bxx


def psi1(V, W, x, s, w1, eta, v0, a, b, d1, d2, x0):
    w2 = w1 + eta
    A, B, Axx, Bxx = fields(x, a, b, d1, d2, x0)
    s1, s2 = mp.sin(w1 * s), mp.sin(w2 * s)
    J0 = A * s1 + B * s2
    J0xx = Axx * s1 + Bxx * s2
    X1 = A**2 * s1**2 + B**2 * s2**2 + 2 * A * B * s1 * s2 + 2 * v0 * J0
    Z = (-A * s1 - B * s2 + A**3 / 3 * s1**3 + B**3 / 3 * s2**3
         + A * V**2 * s1 + B * V**2 * s2
         + A**2 * B * s1**2 * s2 + A * B**2 * s1 * s2**2
         - J0xx + v0**2 * J0)
    return (1 - v0**2) * V - v0 * V**2 - V**3 / 3 - W - V * X1 - Z - v0 * J0**2


def pas_rhs1(V, W, x, t, eta, v0, a, b, d1, d2, x0):
    A, B, _, _ = fields(x, a, b, d1, d2, x0)
    env = A**2 / 2 + B**2 / 2 + A * B * mp.cos(eta * t)
    return (1 - v0**2 - env) * V - v0 * V**2 - V**3 / 3 - W - env * v0


print("\n== residual halving on the acceptance grid ==")
v0 = mp.mpf("-1.94472959292127140821297064817")  # root for (beta,gamma)=(6,8)
a, b, d1, d2, x0 = map(mp.mpf, ("0.8", "0.5", "1", "1", "1"))
eta = mp.mpf(1)
base = mp.mpf(100)
tgrid = [10 * 2 * mp.pi / base, 25 * 2 * mp.pi / base, 40 * 2 * mp.pi / base]
Vgrid = [mp.mpf("-0.3"), mp.mpf("0.1"), mp.mpf("0.4")]
xgrid = [mp.mpf("0.3"), mp.mpf("0.7"), mp.mpf("1.3")]
W = mp.mpf("0.05")

bad = 0
for V in Vgrid:
    for x in xgrid:
        for t in tgrid:
            res = []
            for mult in (1, 2, 4):
                w1 = base * mult
                r = abs(wavg(lambda s: psi1(V, W, x, s, w1, eta, v0, a, b, d1, d2, x0), t, w1)
                        - pas_rhs1(V, W, x, t, eta, v0, a, b, d1, d2, x0))
                res.append(r)
            r1, r2 = res[1] / res[0], res[2] / res[1]
            flag = ""
            if not (mp.mpf("0.4") < r1 < mp.mpf("0.6") and mp.mpf("0.4") < r2 < mp.mpf("0.6")):
                flag = "  <-- OUT OF RANGE"
                bad += 1
            print(f"V={mp.nstr(V,3):>5} x={mp.nstr(x,3):>4} t={mp.nstr(t,6):>7}: "
                  f"res={mp.nstr(res[0],4)} ratios {mp.nstr(r1,6)}, {mp.nstr(r2,6)}{flag}")
print(f"\ngrid points outside [0.4,0.6]: {bad} (need 0)")
