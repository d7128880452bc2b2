#!/usr/bin/env python3
"""Reference values for the rectangle module: region membership, face values,
and the quadratic root of the error-rectangle algebra."""

import mpmath as mp

mp.mp.dps = 40


def v0_of(beta, gamma):
    roots = mp.polyroots([1, 0, -3 * (1 - 1 / gamma), 3 * beta / gamma])
    return [r.real for r in roots if abs(r.imag) < mp.mpf("1e-30")][0]


def in_region(L, S, v0, gamma, Delta):
    c1 = 0 < L < abs(v0)
    ratio = S / L
    c2 = 1 / gamma < ratio < v0**2 - 1
    denom = Delta**2 * (-v0 - L) / L**2 + (-v0 - L / 3)
    bound = (v0**2 - 1 - ratio) / denom
    c3 = L < bound
    return c1 and c2 and c3, bound


v0 = v0_of(mp.mpf(6), mp.mpf(8))
print(f"v0(6,8) = {mp.nstr(v0, 30)}")

print("\n== region membership ==")
ok, bound = in_region(mp.mpf("0.5"), mp.mpf("0.5"), v0, mp.mpf(8), mp.mpf("0.1"))
print(f"(L,S)=(0.5,0.5) Delta=0.1: member={ok}, third-inequality bound={mp.nstr(bound, 30)}")
ok0, bound0 = in_region(mp.mpf("0.5"), mp.mpf("0.5"), v0, mp.mpf(8), mp.mpf(0))
print(f"(L,S)=(0.5,0.5) Delta=0:   member={ok0}, bound={mp.nstr(bound0, 30)}")
# boundary case S/L = 1/gamma exactly: second inequality strict -> false
okb, _ = in_region(mp.mpf("0.4"), mp.mpf("0.4") / 8, v0, mp.mpf(8), mp.mpf(0))
print(f"S/L = 1/gamma exactly: member={okb}")

print("\n== constructive rectangle recipe ==")
eps = (8 * (v0**2 - 1) - 1) / 2
ratio = (1 + eps) / 8
print(f"midpoint eps = {mp.nstr(eps, 30)}")
print(f"S/L ratio    = {mp.nstr(ratio, 30)}")
for Delta, bnd in [(mp.mpf("0"), mp.mpf("0.5")), (mp.mpf("0.05"), mp.mpf("0.5")),
                   (mp.mpf("0.1"), mp.mpf("0.5")), (mp.mpf("10"), mp.mpf("0.5")),
                   (mp.mpf("0.008"), mp.mpf("0.0096"))]:
    L = mp.mpf("0.9") * min(abs(v0), bnd, bnd / ratio)
    found = None
    while L > mp.mpf("1e-9"):
        ok, _ = in_region(L, ratio * L, v0, mp.mpf(8), Delta)
        if ok:
            found = L
            break
        L /= 2
    if found is None:
        print(f"Delta={mp.nstr(Delta,5)} bound={mp.nstr(bnd,5)}: none")
    else:
        print(f"Delta={mp.nstr(Delta,5)} bound={mp.nstr(bnd,5)}: L={mp.nstr(found, 20)} S={mp.nstr(ratio*found, 20)}")

print("\n== top-face value (eps=0.5, gamma=8, L=S=0.5) ==")
print(f"eps*(L - gamma*S) = {mp.nstr(mp.mpf('0.5') * (mp.mpf('0.5') - 8 * mp.mpf('0.5')), 10)}")

print("\n== error-rectangle algebra ==")


def pqr(v0, gamma, eps_margin, C1, C2, C3):
    P = C3**3 / 3 + (abs(v0) + C1 + 1) * C3**2
    Q = (v0**2 - 1 - (1 + eps_margin) / gamma) - (
        (2 * abs(v0) + C1) * C1 + C2 + C3**2 + 2 * (abs(v0) + C1 + 1) * C3)
    R = (abs(v0) + C1 + 1) + C3
    return P, Q, R


P, Q, R = pqr(v0, mp.mpf(8), mp.mpf("0.1"), mp.mpf("0.01"), mp.mpf("0.001"), mp.mpf("0.01"))
print(f"inputs: eps=0.1 C1=0.01 C2=0.001 C3=0.01")
print(f"  P = {mp.nstr(P, 30)}")
print(f"  Q = {mp.nstr(Q, 30)}")
print(f"  R = {mp.nstr(R, 30)}")
disc = Q**2 - 4 * P * R
assert Q > 0 and disc > 0
Lhat = (Q - mp.sqrt(disc)) / (2 * R)
print(f"  L_hat        = {mp.nstr(Lhat, 30)}")
print(f"  P/Q (approx) = {mp.nstr(P / Q, 30)}")
roots = mp.polyroots([R, -Q, P])
print(f"  quadratic roots of R L^2 - Q L + P: {[mp.nstr(r, 25) for r in roots]}")
assert abs(min(roots) - Lhat) < mp.mpf("1e-35")

P2, Q2, R2 = pqr(v0, mp.mpf(8), mp.mpf("0.1"), mp.mpf("0.01"), mp.mpf("0.001"), mp.mpf("1.0"))
print(f"C3=1.0: Q = {mp.nstr(Q2, 20)}, disc = {mp.nstr(Q2**2 - 4*P2*R2, 20)} (expect invalid)")
assert Q2 <= 0 or Q2**2 - 4 * P2 * R2 <= 0
