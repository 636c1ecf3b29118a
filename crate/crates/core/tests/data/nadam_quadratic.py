"""Nadam on f(w) = w^2 from w = 1, plus the single step from w = 0, g = 1.

Independent of the Rust code; run with mpmath at 50 digits.
"""
from mpmath import mp, mpf, sqrt

mp.dps = 50
lr, b1, b2, eps = mpf("0.002"), mpf("0.9"), mpf("0.999"), mpf("1e-8")


def step(w, m, v, g, t):
    m = b1 * m + (1 - b1) * g
    v = b2 * v + (1 - b2) * g * g
    m_hat = b1 * m / (1 - b1 ** (t + 1)) + (1 - b1) * g / (1 - b1 ** t)
    v_hat = v / (1 - b2 ** t)
    return w - lr * m_hat / (sqrt(v_hat) + eps), m, v


w, _, _ = step(mpf(0), mpf(0), mpf(0), mpf(1), 1)
print("one step:", mp.nstr(w, 20))

w, m, v = mpf(1), mpf(0), mpf(0)
trace = []
for t in range(1, 201):
    w, m, v = step(w, m, v, 2 * w, t)
    trace.append(w)
assert all(a > b > 0 for a, b in zip([mpf(1)] + trace, trace))
print("after 200 steps:", mp.nstr(w, 20))
