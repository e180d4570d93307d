"""Independent high-precision values frozen into the core integration tests.

Run with `python3 oracles.py`; needs mpmath.
"""
from mpmath import mp, mpf, e, erfc, exp, quad, sqrt, pi, gamma

mp.dps = 50


def ml_half_half(z):
    # E_{1/2,1/2}(-z) = 1/sqrt(pi) - z e^{z^2} erfc(z)
    return 1 / sqrt(pi) - z * exp(z * z) * erfc(z)


def b_const(lam, t):
    # b(t) = int_0^t s^{-1/2} E_{1/2,1/2}(-lam s^{1/2}) ds by direct quadrature
    return quad(lambda s: s ** mpf(-0.5) * ml_half_half(lam * sqrt(s)), [0, t])


print("e*erfc(1)              =", mp.nstr(e * erfc(1), 20))
print("1 - e*erfc(1)          =", mp.nstr(1 - e * erfc(1), 20))
print("b(2, 0.5, 1, g=1) quad =", mp.nstr(b_const(2, 1), 20))
print("(1 - e^4 erfc 2)/2     =", mp.nstr((1 - exp(4) * erfc(2)) / 2, 20))
print("2/Gamma(2.5)           =", mp.nstr(2 / gamma(2.5), 20))
print("g1 unit lead (rho=1/2) =", mp.nstr((16 + 3 * sqrt(pi) - 24) / (12 * sqrt(pi)), 20))


def ml_series(rho, z, terms=400):
    # E_rho(z) by its power series, exact enough at 50 digits for |z| <= 1
    return sum(z ** k / gamma(rho * k + 1) for k in range(terms))


for rho in ("0.25", "0.5", "0.75", "1"):
    print(f"1 - E_{rho}(-1)".ljust(23), "=", mp.nstr(1 - ml_series(mpf(rho), mpf(-1)), 20))
