"""Independent high-precision reference values for the test suite.

Evaluates the closed-form barrier/well cell expressions with mpmath at
50 digits, locates band edges and resonances by a dense 1 ueV scan plus
bisection, and computes the dwell time by adaptive quadrature of |psi|^2
with the wave function propagated as (psi, psi') through each layer.
Run with `python3 superlattice_oracle.py`; the printed numbers are frozen
into tests/reference_values.rs.
"""
from mpmath import mp, mpf, mpc, sqrt, cosh, sinh, cos, sin, exp, acos, quad, pi

mp.dps = 50
H2M = mpf("0.0380998211")  # eV nm^2
HBAR = mpf("0.6582119569")  # eV fs
LB, LW, VB, MU = mpf("2.5"), mpf("6.5"), mpf("0.288"), mpf("0.072")
D = LB + LW


def k_of(e):
    return sqrt(e * MU / H2M)


def kappa_of(e):
    return sqrt((VB - e) * MU / H2M)


def cell(e):
    k, kap = k_of(e), kappa_of(e)
    c1 = (k / kap + kap / k) / 2
    c2 = (k / kap - kap / k) / 2
    re = cosh(kap * LB) * cos(k * LW) - c2 * sinh(kap * LB) * sin(k * LW)
    im = -cosh(kap * LB) * sin(k * LW) - c2 * sinh(kap * LB) * cos(k * LW)
    b = mpc(0, 1) * c1 * sinh(kap * LB) * exp(mpc(0, 1) * k * LW)
    return mpc(re, im), b


def re_a(e):
    return cell(e)[0].real


def bisect(f, lo, hi, tol=mpf("1e-30")):
    flo = f(lo)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return (lo + hi) / 2


def scan_band1():
    step = mpf("1e-6")
    e = step
    inside = False
    low = None
    prev = e
    while e < VB:
        r = re_a(e)
        now = abs(r) <= 1
        if now and not inside:
            low = bisect(lambda x: re_a(x) - 1, prev, e)
            inside = True
        elif inside and not now:
            high = bisect(lambda x: re_a(x) + 1, prev, e)
            return low, high
        prev = e
        e += step
    raise RuntimeError("band not found")


def mat_mul(m1, m2):
    return [[m1[0][0] * m2[0][0] + m1[0][1] * m2[1][0], m1[0][0] * m2[0][1] + m1[0][1] * m2[1][1]],
            [m1[1][0] * m2[0][0] + m1[1][1] * m2[1][0], m1[1][0] * m2[0][1] + m1[1][1] * m2[1][1]]]


def power_brute(e, n):
    a, b = cell(e)
    m = [[a, b], [b.conjugate(), a.conjugate()]]
    out = [[mpc(1), mpc(0)], [mpc(0), mpc(1)]]
    for _ in range(n):
        out = mat_mul(out, m)
    return out


def layer_step(psi, dpsi, lam, s):
    # lam = K^2; cos(K s) and sin(K s)/K via complex sqrt, both even in K
    kk = sqrt(mpc(lam))
    if abs(kk) == 0:
        return psi + dpsi * s, dpsi
    c = cos(kk * s)
    s0 = sin(kk * s) / kk
    return psi * c + dpsi * s0, -psi * lam * s0 + dpsi * c


def dwell(e, n):
    m = power_brute(e, n)
    an, bn = m[0][0], m[0][1]
    r = bn.conjugate() / an
    k = k_of(e)
    psi, dpsi = 1 + r, mpc(0, 1) * k * (1 - r)
    layers = [(LB, (e - VB) * MU / H2M), (LW, e * MU / H2M)] * n
    total = mpf(0)
    for w, lam in layers:
        p0, d0 = psi, dpsi
        total += quad(lambda s: abs(layer_step(p0, d0, lam, s)[0]) ** 2, [0, w / 2, w])
        psi, dpsi = layer_step(p0, d0, lam, w)
    t = 1 / an
    v_in = 2 * H2M * k / (MU * HBAR)
    return total / v_in, psi, t


if __name__ == "__main__":
    lo, hi = scan_band1()
    print("band1_low_ev =", mp.nstr(lo, 20))
    print("band1_high_ev =", mp.nstr(hi, 20))
    n = 6
    for j in range(1, n):
        target = cos(j * pi / n)
        ej = bisect(lambda x: re_a(x) - target, lo, hi)
        print(f"resonance n=6 j={j} E =", mp.nstr(ej, 20))
        if j == 3:
            tau, psi_l, t = dwell(ej, n)
            print("  dwell_time_fs(j=3) =", mp.nstr(tau, 20), " psi(L)-t =", mp.nstr(abs(psi_l - t), 5))
    a, b = cell(mpf("0.050"))
    print("a(0.050) =", mp.nstr(a.real, 20), mp.nstr(a.imag, 20))
    print("b(0.050) =", mp.nstr(b.real, 20), mp.nstr(b.imag, 20))
    m = power_brute(mpf("0.055"), 6)
    print("T6(0.055) =", mp.nstr(1 / abs(m[0][0]) ** 2, 20))
    m = power_brute(mpf("0.060"), 6)
    print("a6(0.060) =", mp.nstr(m[0][0].real, 20), mp.nstr(m[0][0].imag, 20))
    print("b6(0.060) =", mp.nstr(m[0][1].real, 20), mp.nstr(m[0][1].imag, 20))
