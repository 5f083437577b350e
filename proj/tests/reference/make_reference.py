"""Regenerates the frozen reference values used by the unit tests.

Everything here is computed with mpmath at 30 digits, by routes that do not
share code with the C++ implementation (direct erfc, contour-rotated
quadrature, symbolic integrals).
"""
import mpmath as mp

mp.mp.dps = 30
I = mp.mpc(0, 1)
PI = mp.pi


def fmt(z):
    z = mp.mpc(z)
    return "{%s, %s}" % (mp.nstr(z.real, 20), mp.nstr(z.imag, 20))


def faddeeva(z):
    return mp.exp(-z * z) * mp.erfc(-I * z)


print("// Faddeeva w(z)")
for z in [mp.mpc(0.5, 0.5), mp.mpc(2, 1), mp.mpc(-3, 0.2), mp.mpc(1, -0.5), mp.mpc(0, 9),
          mp.mpc(10, 3), mp.mpc(-4.5, 6.5), mp.mpc(0.1, -0.1), mp.mpc(7.9, 0.05)]:
    print("{%s, %s}," % (fmt(z), fmt(faddeeva(z))))

alpha = -1 / (4 * PI)
beta = 4 * PI * abs(alpha)
amp = mp.sqrt(2 * abs(alpha))
rot = mp.exp(-3j * PI / 4)


def forcing_quad(t):
    f = lambda u: u**2 * mp.exp(-u**2 * t) / (beta**2 - I * u**2)
    return 2 * amp / PI * rot * mp.quad(f, [0, 1, 10, mp.inf])


def z1_quad(t):
    f = lambda u: u**2 * mp.exp(-u**2 * t) / (beta**2 - I * u**2) ** 2
    return 16 * abs(alpha) * rot * mp.quad(f, [0, 1, 10, mp.inf])


print("// forcing (alpha=-1/4pi)")
for t in [0.1, 1, 10, 100]:
    print("{%s, %s}," % (t, fmt(forcing_quad(t))))
print("// Z1 (alpha=-1/4pi)")
for t in [0.5, 5, 50]:
    print("{%s, %s}," % (t, fmt(z1_quad(t))))

print("// RHS = charge * erfc(-i x) exp(...) via mpmath erfc")
for t in [0.0, 0.3, 2.0, 40.0]:
    x = beta * mp.sqrt(t) * mp.exp(1j * PI / 4)
    val = 4 * PI * amp * mp.exp(x * x) * mp.erfc(x)
    print("{%s, %s}," % (t, fmt(val)))

print("// free evolved bound state r*psi at (r, t) by rotated quadrature")
for r, t in [(1.0, 1.0), (0.3, 2.0), (3.0, 0.5)]:
    c = mp.exp(-1j * PI / 4)
    f = lambda u: (c * u) * mp.sin(c * u * r) * mp.exp(-u**2 * t) / ((c * u) ** 2 + beta**2) * c
    val = 4 * PI * amp / (2 * PI**2) * mp.quad(f, [0, 1, 10, mp.inf])
    print("{%s, %s, %s}," % (r, t, fmt(val)))

print("// f_tilde")
for p in [mp.mpf(0.5), mp.mpf(1), mp.mpf(2), mp.mpc(1, 2)]:
    s = mp.sqrt(-I * p)
    print("{%s, %s}," % (fmt(p), fmt(-4 * PI * I * amp / (s * (s + beta)))))

print("// ball probability at t=0, R")
for R in [0.5, 2.0]:
    print("{%s, %s}," % (R, mp.nstr(1 - mp.exp(-2 * beta * R), 20)))
