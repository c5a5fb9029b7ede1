"""Shared formula kernel for the reduced two-variable system.

Everything here is written once, generically over the operand type: the
same code runs on plain floats, numpy arrays (the solver's vectorized
path), rigorous intervals, vectorized intervals (the certifier's hot
path), and first-order interval jets (the Krawczyk Jacobian).  A backend
supplies the pentagon constants in its own representation plus the two
non-field operations (tight square, x^(-3/2)); the formulas below use only
+, -, *, / and those two hooks, so operator overloading does the rest.

The force-balance functions: with q_i = r_i (cos t_i, sin t_i) and m = 1,

    N_ik(r3, r5)      = sum_{j != i} (q_ik - q_jk) / r_ij^3
    lambda_ik(r3, r5) = N_ik / q_ik                    for (i,k) != (1,2)
    y1(r3, r5)        = N_12 = -sum_{j != 1} q_j2 / r_1j^3   (q_12 = 0)

A point is a central configuration iff all nine lambda_ik coincide and
y1 = 0.  Indices are 1-based bodies i in 1..5 and components k in {1, 2}.

Each lambda_ik touches only the four distances r_ij (j != i); the kernel
computes exactly those (lazily, cached per call site).  That matters: at
isolated closure corners two *other* bodies can collide (e.g. bodies 2 and
4 both at the origin when r2 = r4 = 0), and an eager all-pairs distance
pass would evaluate 1/r_24^3 there for no reason.
"""

from __future__ import annotations

from .geometry import A, B, COS, SIN

LAMBDA_INDICES = tuple(
    (i, k) for i in range(1, 6) for k in (1, 2) if (i, k) != (1, 2)
)


class FloatBackend:
    """Plain IEEE floats; also works elementwise on numpy arrays."""

    cos = COS
    sin = SIN
    one = 1.0
    half_a = A / 2.0

    @staticmethod
    def lift(x):
        return float(x)

    @staticmethod
    def sq(x):
        return x * x

    @staticmethod
    def powneg32(x):
        return x**-1.5


def derived_radii(bk, r3, r5):
    """All five radii as backend values: (r1, r2, r3, r4, r5), 0-indexed."""
    one, ha = bk.one, bk.half_a
    r2 = one + ha * (r5 - r3)
    r4 = ha * (one - r3) + r5
    return (one, r2, r3, r4, r5)


def coordinate(bk, radii, i, k):
    """q_ik = r_i * (cos|sin)(theta_i); i is 1-based, k in {1, 2}."""
    c = bk.cos[i - 1] if k == 1 else bk.sin[i - 1]
    return radii[i - 1] * c


def dist2(bk, radii, i, j):
    """Squared distance r_ij^2 between bodies i and j (1-based)."""
    dx = coordinate(bk, radii, i, 1) - coordinate(bk, radii, j, 1)
    dy = coordinate(bk, radii, i, 2) - coordinate(bk, radii, j, 2)
    return bk.sq(dx) + bk.sq(dy)


def lambda_num(bk, radii, i, k, d2cache=None):
    """Numerator N_ik = sum over the four j != i of (q_ik - q_jk)/r_ij^3."""
    qik = coordinate(bk, radii, i, k)
    total = None
    for j in range(1, 6):
        if j == i:
            continue
        key = (min(i, j), max(i, j))
        if d2cache is not None and key in d2cache:
            d2 = d2cache[key]
        else:
            d2 = dist2(bk, radii, i, j)
            if d2cache is not None:
                d2cache[key] = d2
        term = (qik - coordinate(bk, radii, j, k)) * bk.powneg32(d2)
        total = term if total is None else total + term
    return total


def lambda_num_terms(bk, radii, i, k):
    """The four summands of N_ik in ascending-j order (j runs over != i)."""
    qik = coordinate(bk, radii, i, k)
    out = []
    for j in range(1, 6):
        if j == i:
            continue
        d2 = dist2(bk, radii, i, j)
        out.append((qik - coordinate(bk, radii, j, k)) * bk.powneg32(d2))
    return out


def lambda_den(bk, radii, i, k):
    """Denominator q_ik of the lambda quotient."""
    return coordinate(bk, radii, i, k)


def lambda_quot(bk, r3, r5, i, k, d2cache=None):
    """lambda_ik = N_ik / q_ik.  Caller guarantees q_ik is invertible."""
    radii = derived_radii(bk, r3, r5)
    return lambda_num(bk, radii, i, k, d2cache) / lambda_den(bk, radii, i, k)


def y1_num(bk, r3, r5, d2cache=None):
    """Body-1 y-equation numerator (q_12 = 0, so no quotient exists)."""
    radii = derived_radii(bk, r3, r5)
    return lambda_num(bk, radii, 1, 2, d2cache)


# Fixed signs of the nine q_ik denominators everywhere on the open domain S
# (the angles are constant and every radius is positive on S).  These back
# the cleared-denominator certification forms in the certify module.
Q_SIGN = {
    (1, 1): +1,
    (2, 1): +1,
    (2, 2): +1,
    (3, 1): -1,
    (3, 2): +1,
    (4, 1): -1,
    (4, 2): -1,
    (5, 1): +1,
    (5, 2): -1,
}
