"""Independent reference implementations used by the tests.

Everything here works directly on centered coefficient arrays with explicit
O(N^2) (or O(N^3)) sums and no FFTs. The unpaired mode k = -N/2 is split in
half between +-N/2; odd symbols (derivatives, tau, psi) vanish there.
"""

import numpy as np


def wavenumbers(n, length):
    return 2 * np.pi * np.arange(-n // 2, n // 2) / length


def extend(c):
    """Centered length-N coefficients -> length-(N+1) array over k = -N/2..N/2."""
    n = c.size
    e = np.zeros(n + 1, dtype=complex)
    e[:n] = c
    e[0] = 0.5 * c[0]
    e[n] = 0.5 * c[0]
    return e


def ext_xi(n, length):
    return 2 * np.pi * np.arange(-n // 2, n // 2 + 1) / length


def odd_ext(symbol_values):
    """Extended symbol array with the +-N/2 entries zeroed."""
    s = np.array(symbol_values, dtype=complex)
    s[0] = 0.0
    s[-1] = 0.0
    return s


def truncate(full, n):
    """Full convolution over k = -M..M -> centered length-N array, Nyquist zeroed."""
    m = (full.size - 1) // 2
    out = np.zeros(n, dtype=complex)
    for j, k in enumerate(range(-n // 2, n // 2)):
        if k == -n // 2:
            continue
        out[j] = full[k + m]
    return out


def conv_direct(a, b):
    """Plain double-loop convolution of two centered extended arrays."""
    na, nb = a.size, b.size
    out = np.zeros(na + nb - 1, dtype=complex)
    for i in range(na):
        if a[i] != 0:
            out[i : i + nb] += a[i] * b
    return out


def product(n, *cs):
    e = [extend(c) for c in cs]
    acc = e[0]
    for x in e[1:]:
        acc = conv_direct(acc, x)
    return truncate(acc, n)


def _symbols(n, length, p):
    xi = wavenumbers(n, length)
    vp = 1 + p["gamma1"] * xi**2 + p["delta1"] * xi**4
    tau = xi * (3 - 4 * p["gamma"] * xi**2) / (4 * vp)
    psi = xi / vp
    tau[0] = psi[0] = 0.0
    return xi, tau, psi


def nonlinearity(c, length, p):
    n = c.size
    xi, tau, psi = _symbols(n, length, p)
    dx = 1j * xi
    dx[0] = 0.0
    quad = product(n, c, c)
    grad = product(n, dx * c, dx * c)
    cub = product(n, c, c, c)
    return tau * quad - (7.0 / 48.0) * psi * grad - 0.125 * psi * cub


def remainders_kernel(v, length, sigma):
    """(N1, N2, N3) from the multiplier form

        N1^(xi) = sum_{xi1+xi2=xi} [1 - cosh(s|xi|) sech(s|xi1|) sech(s|xi2|)] v^(xi1) v^(xi2)

    and its companions with (i xi1)(i xi2) and with three factors.
    """
    n = v.size
    e = extend(v)
    xe = ext_xi(n, length)
    de = odd_ext(1j * xe)
    sech = 1 / np.cosh(sigma * np.abs(xe))
    ks = np.arange(-n // 2, n // 2 + 1)
    out1 = np.zeros(n, dtype=complex)
    out2 = np.zeros(n, dtype=complex)
    out3 = np.zeros(n, dtype=complex)
    idx = {int(k): i for i, k in enumerate(ks)}
    for j, k in enumerate(range(-n // 2, n // 2)):
        if k == -n // 2:
            continue
        ck = np.cosh(sigma * abs(2 * np.pi * k / length))
        # quadratic: k1 + k2 = k
        s1 = s2 = 0j
        for i1, k1 in enumerate(ks):
            i2 = idx.get(int(k - k1))
            if i2 is None:
                continue
            kern = 1 - ck * sech[i1] * sech[i2]
            s1 += kern * e[i1] * e[i2]
            s2 += kern * de[i1] * e[i1] * de[i2] * e[i2]
        out1[j], out2[j] = s1, s2
        # cubic: k1 + k2 + k3 = k
        k3 = k - ks[:, None] - ks[None, :]
        ok = (k3 >= -n // 2) & (k3 <= n // 2)
        i3 = np.where(ok, k3 + n // 2, 0)
        kern = 1 - ck * sech[:, None] * sech[None, :] * sech[i3]
        terms = kern * e[:, None] * e[None, :] * e[i3]
        out3[j] = np.sum(np.where(ok, terms, 0))
    return out1, out2, out3


def random_coeffs(n, rng, nyquist=True, decay=0.3, length=32.0):
    """Full-spectrum real-field coefficients with exponential decay."""
    xi = wavenumbers(n, length)
    h = n // 2
    c = np.zeros(n, dtype=complex)
    r = rng.standard_normal(h) + 1j * rng.standard_normal(h)
    c[h:] = r * np.exp(-decay * np.abs(xi[h:]))
    c[h] = c[h].real
    c[1:h] = np.conj(c[n - 1 : h : -1])
    c[0] = rng.standard_normal() * np.exp(-decay * np.abs(xi[0])) if nyquist else 0.0
    return c
