"""Symbolic manufactured solutions of the full system with all coefficients active."""
import numpy as np
import sympy as sp

from bbmbore.solver import CoefficientSet

X, Y, T = sp.symbols("x y t", real=True)


def manufactured(dim, eps, b, d, beta):
    """Exact fields, coefficients and the forcings that make them a solution."""
    xs = (X, Y)[:dim]
    if dim == 1:
        eta = sp.Rational(1, 10) * sp.cos(X - T)
        V = [sp.Rational(1, 10) * sp.sin(X - T)]
        h = sp.Rational(1, 5) * sp.cos(X)
        W1 = [sp.Rational(1, 10) * sp.sin(X + T)]
        W2 = [sp.Rational(3, 10) * sp.cos(2 * X)]
        W3 = [sp.Rational(1, 20) * sp.sin(X - 2 * T)]
    else:
        eta = sp.Rational(1, 10) * sp.cos(X + Y - T)
        V = [sp.Rational(1, 10) * sp.sin(X - T), sp.Rational(1, 20) * sp.cos(Y + T)]
        h = sp.Rational(1, 5) * sp.cos(X) * sp.cos(Y)
        W1 = [sp.Rational(1, 10) * sp.sin(Y), sp.Rational(1, 10) * sp.cos(X + T)]
        W2 = [sp.Rational(1, 5) * sp.cos(X - Y), sp.Rational(-1, 10) * sp.sin(2 * Y)]
        W3 = [sp.Rational(1, 20) * sp.sin(X + Y), sp.Rational(1, 10) * sp.cos(X - T)]

    def lap(q):
        return sum(sp.diff(q, v, 2) for v in xs)

    eta_t = sp.diff(eta, T)
    lhs_eta = eta_t - eps * b * lap(eta_t) + sum(sp.diff(V[l], xs[l]) for l in range(dim))
    lhs_eta += eps * sum(sp.diff(eta * W1[l] + h * V[l] + beta * eta * V[l], xs[l]) for l in range(dim))
    f = sp.simplify(lhs_eta / eps)
    g = []
    for k in range(dim):
        Vt = sp.diff(V[k], T)
        lhs = Vt - eps * d * lap(Vt) + sp.diff(eta, xs[k])
        lhs += eps * sum((W2[m] + beta * V[m]) * sp.diff(V[k], xs[m]) for m in range(dim))
        lhs += eps * sum(V[m] * sp.diff(W3[k], xs[m]) for m in range(dim))
        g.append(sp.simplify(lhs / eps))
    args = (*xs, T)

    def num(e):
        fn = sp.lambdify(args, e, "numpy")
        return lambda coords, t: np.broadcast_to(np.asarray(fn(*coords, t), float), coords[0].shape)

    return {"eta": num(eta), "V": [num(v) for v in V], "eta_t": num(eta_t),
            "V_t": [num(sp.diff(v, T)) for v in V], "h": num(h), "W1": [num(w) for w in W1],
            "W2": [num(w) for w in W2], "W3": [num(w) for w in W3], "f": num(f),
            "g": [num(q) for q in g]}


def mms_coeffs(m, coords):
    def vec(parts):
        return lambda t: np.stack([p(coords, t) for p in parts])

    return CoefficientSet(h=lambda t: m["h"](coords, t), W1=vec(m["W1"]), W2=vec(m["W2"]),
                          W3=vec(m["W3"]), f=lambda t: m["f"](coords, t), g=vec(m["g"]))
