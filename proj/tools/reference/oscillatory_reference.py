#!/usr/bin/env python3
"""Reference evaluation of the kernel-weighted oscillatory integral

  I(x,t) = int_0^t int_R exp(-(x-y)^2/(4(t-tau)) - c (t-tau)) / sqrt(4 pi (t-tau))
           * f(y,tau)/(d^2+y^2) * exp(i omega tau) dy dtau

via the substitution sigma = t - tau, y = x - 2 sqrt(sigma) z:

  I = e^{i omega t} int_0^t e^{-(i omega + c) sigma} psi(x, sigma) dsigma,
  psi(x,sigma) = (1/sqrt(pi)) int_R e^{-z^2} h(x - 2 sqrt(sigma) z, t - sigma) dz.

Frozen instance: f = 1, d = 1, x = 0, t = 1, c = 2, omega = 20.
"""

import mpmath as mp

mp.mp.dps = 25

d = mp.mpf(1)
c = mp.mpf(2)
t = mp.mpf(1)
x = mp.mpf(0)


def psi(sigma):
    r = mp.sqrt(sigma)
    return mp.quad(lambda z: mp.exp(-z * z) / (d**2 + (x - 2 * r * z) ** 2),
                   [-8, 8], maxdegree=10) / mp.sqrt(mp.pi)


def I_of(omega):
    val = mp.quad(lambda s: mp.exp(-(1j * omega + c) * s) * psi(s), [0, t], maxdegree=12)
    return mp.exp(1j * omega * t) * val


for omega in (20, 40):
    v = I_of(mp.mpf(omega))
    print(f"omega={omega}: I = {mp.nstr(v, 16)}  |I| = {mp.nstr(abs(v), 16)}")
v20, v40 = abs(I_of(mp.mpf(20))), abs(I_of(mp.mpf(40)))
print(f"|I(40)|/|I(20)| = {mp.nstr(v40 / v20, 10)} (near 1/2)")
print(f"log2 slope      = {mp.nstr(mp.log(v40 / v20) / mp.log(2), 10)}")

# gaussian-in-x-times-cos-t forcing: f(y,s) = exp(-y^2) cos(s)
xg = mp.mpf("0.3")


def psi_g(sigma):
    r = mp.sqrt(sigma)

    def integrand(z):
        y = xg - 2 * r * z
        return mp.exp(-z * z) * mp.exp(-y * y) * mp.cos(t - sigma) / (d**2 + y**2)

    return mp.quad(integrand, [-8, 8], maxdegree=10) / mp.sqrt(mp.pi)


def I_gauss(omega):
    val = mp.quad(lambda s: mp.exp(-(1j * omega + c) * s) * psi_g(s), [0, t], maxdegree=12)
    return mp.exp(1j * omega * t) * val


print("\ngaussian-cos forcing, x=0.3:")
for omega in (20, 40):
    v = I_gauss(mp.mpf(omega))
    print(f"omega={omega}: I = {mp.nstr(v, 16)}  |I| = {mp.nstr(abs(v), 16)}")
