"""Regenerate specfun_reference.csv with mpmath.

Working precision is 150 digits: Hankel functions of large imaginary order
are formed as J -+ iY inside mpmath and cancel heavily. Derivatives use the
recurrences C'_nu = C_{nu-1} - (nu/z) C_nu and K'_nu = -(K_{nu-1} + K_{nu+1})/2.

Usage: python3 gen_specfun_reference.py > specfun_reference.csv
"""
import mpmath as mp

mp.mp.dps = 150

CASES = [
    (0, 1), (0, 2.5), (1, 1), (0.5, 1), (0.7, 3), (-2.3, 4.1), (2, 0.3),
    (1j, 2), (2j, 5), (1.3j, 2.5), (0.7j, 3), (0.3 + 0.8j, 1.7),
    (-0.4 - 1.1j, 0.9 + 0.6j), (1.5 + 0.5j, 6 - 2j), (3j, 0.2), (5j, 10),
    (10j, 1), (23j, 10), (16j, 5), (33j, 10), (2.4j, 14.14),
    (0.1 - 1.6j, 1), (0.2 - 2.9j, 10), (-4.5j, 0.1),
    (0.01j, 31.6), (7j, 31.6), (70j, 31.6), (77j, 31.6),
    (-39.3, 31.0), (-12.6, 5.0), (3 + 1e-9, 2.0), (1e-8j, 1.5),
    (4.2, 25 + 1j), (2j, 35), (0.5 + 2j, 22), (-1.7, 0.5 - 3j),
]

GAMMA = [1, 0.5, 1 + 1j, -2.5 + 0.3j, 10 - 25j, 0.2 + 40j, 30, -7.5, 3 + 45j]


def row(name, nu, z, v):
    nu = mp.mpc(nu)
    z = mp.mpc(z)
    v = mp.mpc(v)
    print(",".join([name] + [mp.nstr(x, 25, min_fixed=0, max_fixed=0) for x in
                            (nu.real, nu.imag, z.real, z.imag, v.real, v.imag)]))


print("func,nu_re,nu_im,z_re,z_im,re,im")
for g in GAMMA:
    row("gamma", 0, g, mp.gamma(g))
for nu, z in CASES:
    nu = mp.mpc(nu)
    z = mp.mpc(z)
    row("J", nu, z, mp.besselj(nu, z))
    row("Y", nu, z, mp.bessely(nu, z))
    row("H1", nu, z, mp.hankel1(nu, z))
    row("H2", nu, z, mp.hankel2(nu, z))
    row("H1p", nu, z, mp.hankel1(nu - 1, z) - nu / z * mp.hankel1(nu, z))
    row("H2p", nu, z, mp.hankel2(nu - 1, z) - nu / z * mp.hankel2(nu, z))
    row("I", nu, z, mp.besseli(nu, z))
    row("K", nu, z, mp.besselk(nu, z))
    row("Kp", nu, z, -(mp.besselk(nu - 1, z) + mp.besselk(nu + 1, z)) / 2)
