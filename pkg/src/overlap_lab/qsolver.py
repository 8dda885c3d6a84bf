"""Quaternionic large-N machinery.

One-point Green's functions from the quaternionic R-transform fixed
point, the ladder rung built from planar cumulants, the Bethe-Salpeter
resummation of the two-point function, holomorphic traced resolvent
products, the real-spectrum boundary-value route, and the wheel (double
trace) generating function.

The 4x4 two-point objects use the composite index ordering
``(alpha mu) in [(1,1), (1,b), (b,1), (b,b)]`` for rows and
``(beta nu)`` for columns, so that the free ladder is the Kronecker
product ``G(Q) (x) G(P)^T`` and the eigenvector component of interest
sits at position ``[1, 1]``.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .analytic import o1_biunitary, radial_cdf
from .numcore import Quaternion22, wirtinger_mixed_derivative

__all__ = [
    "RTransformSpec",
    "GreenResult",
    "elliptic_rt",
    "biunitary_rt",
    "pseudo_hermitian_rt",
    "quantum_scattering_rt",
    "solve_green",
    "o1_from_green",
    "build_rung",
    "solve_bethe_salpeter",
    "k_eigenvector_component",
    "o2_from_k",
    "h_holomorphic",
    "o2_real_spectrum",
    "wheel_generating_function",
]


@dataclass(frozen=True)
class RTransformSpec:
    """Cumulant data of one ensemble, as needed by the two-point solver.

    ``kind`` selects the closed-form route.  For the biunitary kinds the
    alternating cumulants are encoded in the determining sequence
    ``a_func`` (with ``a_func(0) = r_out^2``) together with the radial
    cdf of the spectrum.
    """

    kind: str
    sigma: float = 1.0
    tau: float = 0.0
    alpha: float = 0.0
    kappa: float = 1.0
    m: float = 1.0
    gamma: float = 1.0
    a_func: callable = None
    a_of_r: callable = None
    fspec: object = field(default=None, compare=False)


def elliptic_rt(sigma=1.0, tau=0.0):
    return RTransformSpec("elliptic", sigma=sigma, tau=tau)


def _determining_sequence(kind, alpha, kappa):
    """Determining sequence A(x) of the worked biunitary ensembles.

    Obtained by inverting the single-ring relations
    ``x A(x) = F(r) - 1`` with ``x = -pi O_1(r)``.
    """
    if kind == "ginibre":
        return lambda x: 1.0 + 0.0 * x
    if kind == "product_ginibre":
        return lambda x: 1.0 / (1.0 - x)
    if kind == "spherical":
        return lambda x: 1.0 / np.sqrt(-x)
    if kind == "induced_ginibre":
        def a_ind(x):
            root = np.sqrt((1.0 + x) ** 2 + 4.0 * alpha * x)
            return 1.0 + 2.0 * alpha / (1.0 + x + root)
        return a_ind
    if kind == "truncated_unitary":
        def a_tu(x):
            if abs(x) < 1e-12:
                return 1.0 / (1.0 + kappa) + x / (1.0 + kappa) ** 3
            root = np.sqrt((1.0 + kappa) ** 2 + 4.0 * x)
            return (-(1.0 + kappa) + root) / (2.0 * x)
        return a_tu
    raise ValueError(f"no determining sequence for {kind!r}")


def _determining_sequence_radial(kind, alpha, kappa):
    """Determining sequence evaluated on its physical sheet A(x(r)).

    ``x(r) = -pi O_1(r)`` is not injective for every ensemble (for the
    induced case both spectral edges map to x = 0), so the rung must be
    parametrized by the radius rather than by x itself.
    """
    if kind == "ginibre":
        return lambda r: 1.0
    if kind == "product_ginibre":
        return lambda r: min(r, 1.0)
    if kind == "spherical":
        return lambda r: 1.0 + r ** 2
    if kind == "induced_ginibre":
        return lambda r: r ** 2 / (r ** 2 - alpha)
    if kind == "truncated_unitary":
        return lambda r: (1.0 - r ** 2) / kappa
    raise ValueError(f"no determining sequence for {kind!r}")


def biunitary_rt(kind, alpha=0.0, kappa=1.0):
    """R-transform data of a biunitarily invariant ensemble."""
    return RTransformSpec(
        "biunitary_" + kind, alpha=alpha, kappa=kappa,
        a_func=_determining_sequence(kind, alpha, kappa),
        a_of_r=_determining_sequence_radial(kind, alpha, kappa),
        fspec=radial_cdf(kind, alpha=alpha, kappa=kappa))


def pseudo_hermitian_rt():
    """Product of two shifted GUE matrices (2 + G1)(2 + G2)."""
    return RTransformSpec("pseudo_hermitian_product")


def quantum_scattering_rt(m=1.0, gamma=1.0):
    return RTransformSpec("quantum_scattering", m=m, gamma=gamma)


@dataclass(frozen=True)
class GreenResult:
    g: Quaternion22
    branch: str  # "holomorphic" or "nonholomorphic"
    z: complex = 0.0


def _sqrt_towards(value, reference):
    """Square root branch whose real inner product with reference is >= 0."""
    s = cmath.sqrt(value)
    if (s * reference.conjugate()).real < 0:
        s = -s
    return s


def _elliptic_inside(sigma, tau, z):
    x, y = z.real, z.imag
    return (x ** 2 / (1.0 + tau) ** 2 + y ** 2 / (1.0 - tau) ** 2) < sigma ** 2


def _elliptic_g_holo(sigma, tau, z):
    if abs(tau) < 1e-14:
        return 1.0 / z
    s = _sqrt_towards(z * z - 4.0 * sigma ** 2 * tau, z)
    return (z - s) / (2.0 * sigma ** 2 * tau)


def _track_cubic_root(coeff_func, z_target, steps=160, far=60.0):
    """Follow the 1/z root of a parametric cubic from far away to z_target.

    Continuation runs along the straight segment from
    ``Re(z) + i sign(Im z) far`` down to ``z_target``, which never
    crosses a real spectrum for targets off (or just off) the real axis.
    """
    s = 1.0 if z_target.imag >= 0 else -1.0
    z0 = complex(z_target.real, s * far)
    g = 1.0 / z0
    for t in np.linspace(0.0, 1.0, steps)[1:]:
        z = z0 + t * (z_target - z0)
        roots = np.roots(coeff_func(z))
        g = roots[np.argmin(np.abs(roots - g))]
    return g


def _pt_cubic_coeffs(z):
    # z g^3 - (2z+1) g^2 + (z-2) g - 1 = 0, from 4/(1-g)^2 + 1/g = z
    return [z, -(2.0 * z + 1.0), z - 2.0, -1.0]


PT_EDGE = 0.5 * (11.0 + 5.0 * math.sqrt(5.0))


def pt_green_scalar(z):
    """Holomorphic Green's function of the pseudohermitian product.

    The 1/z branch of the cubic, chosen by homotopy continuation from
    large imaginary part.  For real ``z`` inside the spectrum the upper
    boundary value g(x + i0) is returned.  The exceptional point x = 0
    is excluded (no controlled formula exists there).
    """
    z = complex(z)
    if abs(z) < 1e-8:
        raise ValueError("exceptional point x=0: Green's function diagnostic")
    if z.imag == 0.0 and 0.0 < z.real < PT_EDGE:
        z = complex(z.real, 1e-12)
    return _track_cubic_root(_pt_cubic_coeffs, z)


def qs_green_scalar(z, m, gamma):
    """Holomorphic traced resolvent of the quantum scattering ensemble."""
    z = complex(z)
    ig = 1j * gamma

    def coeffs(zz):
        # (g^2 + 1 - zz g)(1 - ig g) + i m gamma g^2 = 0
        # -ig g^3 + (1 + ig zz + i m gamma) g^2 + (-zz - ig) g + 1 = 0
        return [-ig, 1.0 + ig * zz + 1j * m * gamma, -(zz + ig), 1.0]

    return _track_cubic_root(coeffs, z)


def solve_green(rt, z):
    """Quaternionic Green's function at spectral point z (w -> 0 taken).

    Returns a :class:`GreenResult` whose branch tag reports whether z
    fell in the holomorphic (outside) or nonholomorphic (inside) regime.
    """
    z = complex(z)
    if rt.kind == "elliptic":
        sigma, tau = rt.sigma, rt.tau
        if _elliptic_inside(sigma, tau, z):
            s2 = sigma ** 2
            denom = s2 * (1.0 - tau ** 2)
            g11 = (np.conj(z) - z * tau) / denom
            rad = 1.0 - abs(z - np.conj(z) * tau) ** 2 / (s2 * (1.0 - tau ** 2) ** 2)
            off = 1j * math.sqrt(max(rad, 0.0)) / sigma
            return GreenResult(
                Quaternion22(g11, off, off, np.conj(g11)), "nonholomorphic", z)
        g = _elliptic_g_holo(sigma, tau, z)
        return GreenResult(Quaternion22.diag(g, np.conj(g)), "holomorphic", z)
    if rt.kind.startswith("biunitary_"):
        fspec = rt.fspec
        r = abs(z)
        if fspec.r_in < r < fspec.r_out:
            fr = fspec(r)
            g11 = fr / z
            off = 1j * math.sqrt(max(math.pi * o1_biunitary(fspec, r), 0.0))
            return GreenResult(
                Quaternion22(g11, off, off, np.conj(g11)), "nonholomorphic", z)
        if r <= fspec.r_in:
            g = 0.0 + 0.0j if r == 0 else fspec(r) / z  # zero inside the hole
            return GreenResult(Quaternion22.diag(g, np.conj(g)), "holomorphic", z)
        g = 1.0 / z
        return GreenResult(Quaternion22.diag(g, np.conj(g)), "holomorphic", z)
    if rt.kind == "pseudo_hermitian_product":
        g = pt_green_scalar(z)
        branch = ("nonholomorphic"
                  if z.imag == 0.0 and 0.0 < z.real < PT_EDGE else "holomorphic")
        return GreenResult(Quaternion22.diag(g, np.conj(g)), branch, z)
    if rt.kind == "quantum_scattering":
        g = qs_green_scalar(z, rt.m, rt.gamma)
        return GreenResult(Quaternion22.diag(g, np.conj(g)), "holomorphic", z)
    raise ValueError(f"unsupported R-transform kind {rt.kind!r}")


def o1_from_green(green):
    """One-point eigenvector function -G_1b G_b1 / pi (0 if holomorphic)."""
    if green.branch == "holomorphic":
        return 0.0
    val = -(green.g.q1b * green.g.qb1) / math.pi
    return float(val.real)


def _num_derivative(func, x, h=1e-6):
    return (func(x + h) - func(x - h)) / (2.0 * h)


def _s_t_functions(rt, r1, r2):
    """Auxiliary rung functions S and T of the determining sequence.

    S = (x1 A1 - x2 A2)/(x1 - x2) and T = (A1 - A2)/(x1 - x2) with
    x = -pi O_1(r) and A on its physical sheet A(x(r)).  Equal radii are
    handled by the limit along the radial parametrization.
    """
    def x_of_r(r):
        return -math.pi * o1_biunitary(rt.fspec, r)

    x1, x2 = x_of_r(r1), x_of_r(r2)
    if max(abs(x1), abs(x2)) < 1e-12:
        # both points outside the support: Taylor data of A at x = 0
        return rt.fspec.r_out ** 2, _num_derivative(rt.a_func, 0.0)
    clamp = lambda r: min(max(r, rt.fspec.r_in), rt.fspec.r_out)
    a1, a2 = rt.a_of_r(clamp(r1)), rt.a_of_r(clamp(r2))
    if abs(r1 - r2) < 1e-7:
        rm = 0.5 * (r1 + r2)
        dxdr = _num_derivative(x_of_r, rm)
        dadr = _num_derivative(rt.a_of_r, rm)
        t = dadr / dxdr
        s = rt.a_of_r(rm) + x_of_r(rm) * t
        return s, t
    s = (x1 * a1 - x2 * a2) / (x1 - x2)
    t = (a1 - a2) / (x1 - x2)
    return s, t


def _green_parts(g):
    """Quaternion and (optional) spectral point of a Green's function."""
    if isinstance(g, GreenResult):
        return g.g, g.z
    return g, None


def build_rung(rt, gq, gp):
    """4x4 rung matrix B of the Bethe-Salpeter equation.

    ``gq`` and ``gp`` are the Green's functions at the two spectral
    points, as :class:`GreenResult` (or bare quaternions for kinds whose
    rung needs no spectral-point information).  For elliptic ensembles
    the rung is the constant diagonal of second cumulants; for biunitary
    kinds only the four alternating-cumulant components survive; for the
    quantum scattering ensemble it is the closed resummation of the
    channel cumulants.
    """
    qq, zq = _green_parts(gq)
    qp, zp = _green_parts(gp)
    if rt.kind == "elliptic":
        s2 = rt.sigma ** 2
        return np.diag([s2 * rt.tau, s2, s2, s2 * rt.tau]).astype(complex)
    if rt.kind.startswith("biunitary_"):
        if zq is None or zp is None:
            raise ValueError(
                "biunitary rung needs GreenResult inputs (radius-dependent)")
        s, t = _s_t_functions(rt, abs(zq), abs(zp))
        b = np.zeros((4, 4), dtype=complex)
        b[1, 1] = s           # B^{11}_{bb}
        b[2, 2] = s           # B^{bb}_{11}
        b[1, 2] = qq.q1b * qp.q1b * t   # B^{1b}_{b1}
        b[2, 1] = qq.qb1 * qp.qb1 * t   # B^{b1}_{1b}
        return b
    if rt.kind == "quantum_scattering":
        g_small = np.diag([1j * rt.gamma, -1j * rt.gamma])
        ainv = np.linalg.inv(np.linalg.inv(g_small) - qq.as_matrix())
        cinv = np.linalg.inv(np.linalg.inv(g_small) - qp.as_matrix().T)
        return np.eye(4, dtype=complex) + rt.m * np.kron(ainv, cinv)
    raise ValueError(f"no rung construction for kind {rt.kind!r}")


def quantum_scattering_rung_series(rt, gq, gp, order=40):
    """Order-limited cumulant series for the quantum scattering rung.

    Direct summation of the power series of the rung in the cumulants,
    usable as an independent check of :func:`build_rung` for Green's
    function inputs of small norm.
    """
    g_small = np.diag([1j * rt.gamma, -1j * rt.gamma])
    mq = gq.as_matrix()
    mp = gp.as_matrix()
    # sum_{k>=1} (g G)^{k-1} g on each rail
    left = np.zeros((2, 2), dtype=complex)
    right = np.zeros((2, 2), dtype=complex)
    term_l = g_small.copy()
    term_r = g_small.copy()
    for _ in range(order):
        left += term_l
        right += term_r
        term_l = g_small @ mq @ term_l
        term_r = g_small @ mp @ term_r
    b = np.eye(4, dtype=complex)
    for a in range(2):
        for bb in range(2):
            for mu in range(2):
                for nu in range(2):
                    b[2 * a + mu, 2 * bb + nu] += rt.m * left[a, bb] * right[nu, mu]
    return b


def solve_bethe_salpeter(gq, gp, b):
    """Resummed ladder K = (1 - (G_Q (x) G_P^T) B)^{-1} (G_Q (x) G_P^T).

    Returns ``(k, pole_flag)``; the flag marks a (near-)singular system,
    which is the physical pole at coincident arguments rather than a
    numerical failure.
    """
    free = np.kron(gq.as_matrix(), gp.as_matrix().T)
    system = np.eye(4, dtype=complex) - free @ b
    pole = np.linalg.cond(system) > 1e12
    k = np.linalg.solve(system, free)
    return k, pole


def k_eigenvector_component(rt, z1, z2):
    """K^{11}_{bb}(z1, z2): the regularized product of resolvents."""
    g1 = solve_green(rt, z1)
    g2 = solve_green(rt, z2)
    b = build_rung(rt, g1, g2)
    k, _ = solve_bethe_salpeter(g1.g, g2.g, b)
    return k[1, 1]


def o2_from_k(rt, z1, z2, h=1e-3):
    """Two-point eigenvector function via the Bethe-Salpeter pipeline.

    (1/pi^2) d/dzbar1 d/dz2 of K^{11}_{bb}, with the full
    green -> rung -> ladder pipeline re-solved at every stencil point.
    """
    z1 = complex(z1)
    z2 = complex(z2)
    if abs(z1 - z2) < 1e-9:
        raise ValueError("coincident arguments")
    d = wirtinger_mixed_derivative(
        lambda w1, w2: k_eigenvector_component(rt, w1, w2), z1, z2, h=h)
    return d / math.pi ** 2


def _rtilde_1b(rt, a, b):
    """R_1b / Q_1b at Q = diag(a, b) (the holomorphic rung component)."""
    if rt.kind == "elliptic":
        return rt.sigma ** 2
    if rt.kind.startswith("biunitary_"):
        if not np.isfinite(rt.fspec.r_out):
            raise ValueError("no holomorphic exterior for unbounded spectrum")
        return rt.fspec.r_out ** 2
    if rt.kind == "pseudo_hermitian_product":
        return ((-3.0 + a + b + a * b) ** 2
                / ((1.0 - a) ** 2 * (1.0 - b) ** 2))
    if rt.kind == "quantum_scattering":
        ig = 1j * rt.gamma
        return 1.0 + rt.m * ig / (1.0 - ig * a) * (-ig) / (1.0 + ig * b)
    raise ValueError(f"no holomorphic rung for kind {rt.kind!r}")


def holo_g_scalar(rt, z):
    """Scalar holomorphic resolvent g(z) outside the spectrum."""
    z = complex(z)
    if rt.kind == "elliptic":
        return _elliptic_g_holo(rt.sigma, rt.tau, z)
    if rt.kind.startswith("biunitary_"):
        return 1.0 / z
    if rt.kind == "pseudo_hermitian_product":
        return pt_green_scalar(z)
    if rt.kind == "quantum_scattering":
        return qs_green_scalar(z, rt.m, rt.gamma)
    raise ValueError(rt.kind)


def h_holomorphic(rt, z1, z2bar):
    """Traced product of resolvents h(z1, zbar2) outside the spectrum.

    ``z2bar`` is the value of the conjugated second argument.  Evaluates
    g gbar / (1 - g gbar B) with the rung component obtained from the
    reduced R-transform at diag(g(z1), gbar(zbar2)).
    """
    g1 = holo_g_scalar(rt, z1)
    g2 = holo_g_scalar(rt, z2bar)
    b = _rtilde_1b(rt, g1, g2)
    den = 1.0 - g1 * g2 * b
    if abs(den) < 1e-13:
        raise ZeroDivisionError("pole of the two-point resolvent product")
    return g1 * g2 / den


def _neville_to_zero(eps, vals):
    """Polynomial extrapolation of vals(eps) to eps = 0."""
    eps = list(eps)
    tab = list(vals)
    n = len(tab)
    for j in range(1, n):
        for i in range(n - j):
            tab[i] = ((0.0 - eps[i + j]) * tab[i]
                      - (0.0 - eps[i]) * tab[i + 1]) / (eps[i] - eps[i + j])
    return tab[0]


def o2_real_spectrum(rt, x, y, eps_ladder=(1e-3, 5e-4, 2.5e-4),
                     imag_tol=1e-8):
    """Two-point eigenvector function on a real spectrum.

    Boundary-value combination of the holomorphic traced resolvent
    product, -(1/4pi^2)[h(+,+) - h(+,-) - h(-,+) + h(-,-)], extrapolated
    to eps -> 0 over the given ladder.  The result must come out real.
    """
    x = float(x)
    y = float(y)
    vals = []
    for eps in eps_ladder:
        hpp = h_holomorphic(rt, x + 1j * eps, y + 1j * eps)
        hpm = h_holomorphic(rt, x + 1j * eps, y - 1j * eps)
        hmp = h_holomorphic(rt, x - 1j * eps, y + 1j * eps)
        hmm = h_holomorphic(rt, x - 1j * eps, y - 1j * eps)
        vals.append(-(hpp - hpm - hmp + hmm) / (4.0 * math.pi ** 2))
    out = _neville_to_zero(eps_ladder, vals)
    if abs(out.imag) > imag_tol * max(1.0, abs(out.real)):
        raise ArithmeticError(
            f"non-real boundary-value combination: {out!r}")
    return float(out.real)


def wheel_generating_function(gq, gp, b):
    """Wheel (double-trace) generating function -log det[1 - (G(x)G^T)B].

    Principal branch; series extraction should stay in the region where
    the determinant does not wind around zero.
    """
    free = np.kron(gq.as_matrix(), gp.as_matrix().T)
    arg = np.eye(4, dtype=complex) - free @ b
    sign, logabs = np.linalg.slogdet(arg)
    if sign == 0:
        raise ZeroDivisionError("determinant vanished in wheel function")
    return -(logabs + np.log(sign))


def wheel_from_points(rt, z1, z2):
    """Wheel generating function at two spectral points."""
    g1 = solve_green(rt, z1)
    g2 = solve_green(rt, z2)
    b = build_rung(rt, g1, g2)
    return wheel_generating_function(g1.g, g2.g, b)


def wheel_word_covariance(rt, p, q, radius=1.8, n_theta=32):
    """Large-N covariance of Tr X^p and Tr (X+)^q from the wheel function.

    The wheel function expands as
    ``sum_{p,q} cov(Tr X^p, Tr X+^q)/(p q) z1^{-p} zbar2^{-q}`` far
    outside the spectrum; the coefficient is extracted by a double
    Fourier transform over the circles ``z1 = R e^{i theta}``,
    ``zbar2 = R e^{i phi}``.
    """
    thetas = 2.0 * math.pi * np.arange(n_theta) / n_theta
    vals = np.empty((n_theta, n_theta), dtype=complex)
    for i, th in enumerate(thetas):
        z1 = radius * np.exp(1j * th)
        for j, ph in enumerate(thetas):
            z2 = radius * np.exp(-1j * ph)   # zbar2 = R e^{i phi}
            vals[i, j] = wheel_from_points(rt, z1, z2)
    # coefficient of e^{-i p theta} e^{-i q phi}
    phase = np.exp(1j * (p * thetas[:, None] + q * thetas[None, :]))
    coeff = np.sum(vals * phase) / n_theta ** 2
    return coeff * p * q * radius ** (p + q)
