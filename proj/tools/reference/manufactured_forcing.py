#!/usr/bin/env python3
"""Derives the compensating forcing for the manufactured solution
u*(x,t) = e^{-t} cos(k x) under du/dt - dxx u = -u^3/3 + F, and the
closed form for Gaussian heat-kernel smoothing used by the solver tests."""

import sympy as sp

x, t, k, s, sig, tt = sp.symbols("x t k s sigma tau", positive=True)
u = sp.exp(-t) * sp.cos(k * x)
F = sp.simplify(sp.diff(u, t) - sp.diff(u, x, 2) + u**3 / 3)
print("forcing F(x,t) =", sp.simplify(F))
print("  check: F == (k^2-1)u + u^3/3:",
      sp.simplify(F - ((k**2 - 1) * u + u**3 / 3)) == 0)

# Gaussian density N(0,s^2) convolved with the heat kernel of variance 2*sigma*t
g = sp.exp(-x**2 / (2 * s**2)) / sp.sqrt(2 * sp.pi * s**2)
y = sp.symbols("y", real=True)
kern = sp.exp(-y**2 / (4 * sig * tt)) / sp.sqrt(4 * sp.pi * sig * tt)
conv = sp.integrate(g.subs(x, x - y) * kern, (y, -sp.oo, sp.oo), conds="none")
target = sp.exp(-x**2 / (2 * (s**2 + 2 * sig * tt))) / sp.sqrt(2 * sp.pi * (s**2 + 2 * sig * tt))
subs = {s: sp.Rational(3, 4), sig: sp.Rational(1, 2), tt: sp.Rational(5, 4)}
worst = max(abs(sp.N((conv - target).subs(subs).subs(x, xv), 30))
            for xv in (sp.Rational(1, 10), sp.Rational(7, 10), sp.Integer(2)))
print("heat smoothing of N(0,s^2) equals N(0, s^2+2*sigma*t): max point residual =", worst)
print("smoothed value at s=3/4, sigma=1/2, t=5/4, x=7/10:",
      sp.N(target.subs(subs).subs(x, sp.Rational(7, 10)), 30))
