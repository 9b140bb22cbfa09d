"""Symbols, the Gamma derivative recursion and the remainder-symbol norm.

The certificate computed here is numerical evidence that the resolvent
remainder has operator norm below one at some mu; it is never a proof of
self-adjointness, and every report is labelled accordingly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArityError, ConsistencyError, PositivityError
from .opalg import DivOp, RawOp
from .poly import Poly
from .structure import PowerDecomposition, power_raw_coeffs

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SymbolPoly:
    """Real and imaginary parts of sum_k a_k(x) (i xi)^k, exact in (x, xi)."""

    real: Poly
    imag: Poly


def symbol(op: RawOp, hbar: float | None = None) -> SymbolPoly:
    """Exact symbol of a raw operator; hbar resolves any s-dependence."""
    coeffs = op.coeffs
    if any("s" in a.active_vars() for a in coeffs):
        if hbar is None:
            raise ArityError("s unresolved; supply hbar")
        coeffs = op.at_hbar(hbar).coeffs
    xi = Poly.var("xi")
    real = Poly.zero()
    imag = Poly.zero()
    for k, a in enumerate(coeffs):
        if a.is_zero:
            continue
        if k % 2 == 0:
            sign = -1 if (k // 2) % 2 else 1
            real = real + sign * a * xi**k
        else:
            sign = -1 if ((k - 1) // 2) % 2 else 1
            imag = imag + sign * a * xi**k
    return SymbolPoly(real=real, imag=imag)


@dataclass(frozen=True)
class SigmaUpper:
    """The even comparison symbol Sigma(x, xi) = sum_l calB_l(x) xi^(2l)."""

    poly: Poly


def sigma_upper(dec: PowerDecomposition) -> SigmaUpper:
    """Build Sigma and verify the exact raw-symbol decomposition.

    The identities Re sigma = Sigma + sum (-1)^l T_{2l} xi^(2l) and
    Im sigma = -sum (-1)^l T_{2l-1} xi^(2l-1) must hold exactly; failure
    means the decomposition itself is buggy.
    """
    if dec.A is None or dec.T is None:
        raise ValueError("need a decomposition with raw coefficients (A, T)")
    xi = Poly.var("xi")
    sigma = symbol(RawOp.from_coeffs(dec.A))
    upper = Poly.zero()
    for l, b in enumerate(dec.calB):
        upper = upper + b * xi ** (2 * l)
    re_expected = upper
    for l in range(len(dec.calB)):
        t = dec.T[2 * l]
        if not t.is_zero:
            sign = -1 if l % 2 else 1
            re_expected = re_expected + sign * t * xi ** (2 * l)
    im_expected = Poly.zero()
    for l in range(1, len(dec.calB) + 1):
        if 2 * l - 1 < len(dec.T):
            t = dec.T[2 * l - 1]
            if not t.is_zero:
                sign = -1 if l % 2 else 1
                im_expected = im_expected - sign * t * xi ** (2 * l - 1)
    if sigma.real != re_expected or sigma.imag != im_expected:
        raise ConsistencyError("symbol decomposition identities fail")
    return SigmaUpper(poly=upper)


# ---------------------------------------------------------------------------
# Gamma recursion and the remainder symbol
# ---------------------------------------------------------------------------


class RhoEvaluator:
    """Evaluates rho_mu for the shifted power operator sigma_{L^n} + c.

    Works pointwise or on numpy grids; all polynomial data is exact, only
    the final evaluation is floating point.
    """

    def __init__(self, dec: PowerDecomposition, c: float):
        if dec.A is None:
            raise ValueError("need a decomposition with raw coefficients")
        if any("s" in a.active_vars() for a in dec.A):
            raise ArityError("s unresolved; evaluate the family at a fixed hbar first")
        self.c = float(c)
        self.order = len(dec.A) - 1
        self.a_coeffs = [np.array(a.x_coeffs_float()) for a in dec.A]
        # x-derivatives of each raw coefficient, for d_x^j sigma
        self.a_derivs: list[list[np.ndarray]] = []
        for a in dec.A:
            row = [np.array(a.x_coeffs_float())]
            p = a
            for _ in range(self.order):
                p = p.derive("x")
                row.append(np.array(p.x_coeffs_float()))
            self.a_derivs.append(row)

    def _sigma_derivative(self, j: int, x, ixi_pows):
        total = 0.0 + 0.0j
        for k in range(self.order + 1):
            coeffs = self.a_derivs[k][j]
            if not np.any(coeffs):
                continue
            total = total + _polyval_asc(coeffs, x) * ixi_pows[k]
        if j == 0:
            total = total + self.c
        return total

    def _gamma_chain(self, x, xi, mu: float):
        ixi = 1j * xi
        ixi_pows = [np.ones_like(ixi)]
        for _ in range(self.order):
            ixi_pows.append(ixi_pows[-1] * ixi)
        sigma = self._sigma_derivative(0, x, ixi_pows)
        re_min = np.min(np.real(sigma))
        if re_min <= 0:
            raise PositivityError(
                f"Re sigma reaches {re_min:g} <= 0; increase the shift c"
            )
        gamma = 1.0 / (sigma + 1j * mu)
        # d_x^j Gamma by the Leibniz identity for derivatives of 1/f
        g = [gamma]
        sig_d = [None] + [
            self._sigma_derivative(j, x, ixi_pows) for j in range(1, self.order + 1)
        ]
        for j in range(1, self.order + 1):
            acc = 0.0
            for i in range(1, j + 1):
                acc = acc + math.comb(j, i) * sig_d[i] * g[j - i]
            g.append(-gamma * acc)
        return ixi_pows, g

    def gamma_derivatives(self, x: float, xi: float, mu: float) -> list[complex]:
        """[Gamma, d_x Gamma, ..., d_x^(2mn) Gamma] at one point."""
        _, g = self._gamma_chain(np.asarray(float(x)), np.asarray(float(xi)), mu)
        return [complex(v) for v in g]

    def rho(self, x, xi, mu: float):
        """rho_mu at a point or on broadcastable arrays."""
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        ixi_pows, g = self._gamma_chain(x, xi, mu)
        total = np.zeros(np.broadcast(x, xi).shape, dtype=complex)
        for k in range(1, self.order + 1):
            coeffs = self.a_coeffs[k]
            if not np.any(coeffs):
                continue
            ak = _polyval_asc(coeffs, x)
            for j in range(1, k + 1):
                total = total + math.comb(k, j) * ak * ixi_pows[k - j] * g[j]
        return total if total.shape else complex(total)


def _polyval_asc(coeffs: np.ndarray, x):
    acc = 0.0
    for c in coeffs[::-1]:
        acc = acc * x + c
    return acc


def rho_mu(dec: PowerDecomposition, c: float, x: float, xi: float, mu: float) -> complex:
    """The remainder symbol at one phase-space point."""
    return RhoEvaluator(dec, c).rho(x, xi, mu)


@dataclass(frozen=True)
class RhoNorm:
    value: float
    interior: float
    tail: float
    tail_ok: bool
    box_radius: float
    grid_points: int


def rho_l2_norm(
    dec: PowerDecomposition,
    c: float,
    mu: float,
    box_radius: float | None = None,
    grid_points: int = 512,
) -> RhoNorm:
    """L2(dx dxi) norm of rho_mu: box quadrature plus a fitted tail bound.

    The tail fits the (1+|x|)^-1 (1+|xi|)^-1 envelope on the boundary shell
    and integrates it analytically over the box complement.  When boundary
    values do not decay the flag tail_ok is False and the value is
    inconclusive.
    """
    ev = RhoEvaluator(dec, c)
    R = box_radius if box_radius is not None else _adaptive_radius(ev, mu)
    axis = np.linspace(-R, R, grid_points)
    dens = np.abs(ev.rho(axis[:, None], axis[None, :], mu)) ** 2
    interior = float(np.trapezoid(np.trapezoid(dens, axis, axis=1), axis, axis=0))

    mag = np.sqrt(dens)
    global_max = float(mag.max())
    boundary = np.concatenate([mag[0, :], mag[-1, :], mag[:, 0], mag[:, -1]])
    boundary_max = float(boundary.max())
    if global_max == 0.0:
        return RhoNorm(0.0, 0.0, 0.0, True, R, grid_points)
    tail_ok = boundary_max <= 0.1 * global_max
    weight = (1.0 + np.abs(axis)) * (1.0 + R)
    c_fit = max(
        float((mag[0, :] * weight).max()),
        float((mag[-1, :] * weight).max()),
        float((mag[:, 0] * weight).max()),
        float((mag[:, -1] * weight).max()),
    )
    # integral of (1+|x|)^-2 (1+|xi|)^-2 over the complement of the box
    comp = 4.0 / (1.0 + R) + 4.0 * R / (1.0 + R) ** 2
    tail = c_fit**2 * comp
    return RhoNorm(
        value=math.sqrt(interior + tail),
        interior=interior,
        tail=tail,
        tail_ok=tail_ok,
        box_radius=R,
        grid_points=grid_points,
    )


def _adaptive_radius(ev: RhoEvaluator, mu: float, start: float = 8.0) -> float:
    """Smallest power-of-two box with boundary |rho| below 1e-3 of its max."""
    R = start
    while R < 512.0:
        axis = np.linspace(-R, R, 129)
        mag = np.abs(ev.rho(axis[:, None], axis[None, :], mu))
        peak = float(mag.max())
        if peak == 0.0:
            return R
        edge = max(
            float(mag[0, :].max()), float(mag[-1, :].max()),
            float(mag[:, 0].max()), float(mag[:, -1].max()),
        )
        if edge <= 1e-3 * peak:
            return R
        R *= 2.0
    return R


# ---------------------------------------------------------------------------
# the certificate
# ---------------------------------------------------------------------------

DEFAULT_MU_SCHEDULE = (0.0, 1.0, 10.0, 100.0, 1000.0, 10000.0, 100000.0)


@dataclass
class CertificateReport:
    mu_star: float | None
    c_used: float
    norms: dict[float, RhoNorm] = field(default_factory=dict)
    scope: str = "norm-criterion certificate (numerical evidence, not proof)"

    @property
    def conclusive(self) -> bool:
        return self.mu_star is not None


def self_adjoint_certificate(
    div: DivOp,
    n: int,
    c: float | str = "auto",
    mu_schedule=DEFAULT_MU_SCHEDULE,
    hbar: float | None = None,
    box_radius: float | None = None,
    grid_points: int = 512,
) -> CertificateReport:
    """Sweep mu until (2 pi)^(-1/2) ||rho_mu|| < 1.

    Success at some mu* is numerical evidence that the resolvent-range
    criterion is satisfiable there; exhausting the schedule is reported as
    inconclusive, never as a refutation.
    """
    if hbar is not None:
        div = div.at_hbar(hbar)
    dec = power_raw_coeffs(div, n)
    if c == "auto":
        c_val = _auto_shift(dec)
    else:
        c_val = float(c)
    report = CertificateReport(mu_star=None, c_used=c_val)
    for mu in mu_schedule:
        norm = rho_l2_norm(
            dec, c_val, float(mu), box_radius=box_radius, grid_points=grid_points
        )
        report.norms[float(mu)] = norm
        if norm.tail_ok and norm.value / math.sqrt(TWO_PI) < 1.0:
            report.mu_star = float(mu)
            break
    if report.mu_star is None:
        report.scope = "inconclusive"
    return report


def _auto_shift(dec: PowerDecomposition, radius: float = 12.0) -> float:
    """Shift c from the sampled minimum of Re sigma_{L^n}, plus margin."""
    sigma = symbol(RawOp.from_coeffs(dec.A))
    axis = np.linspace(-radius, radius, 257)
    vals = np.zeros((axis.size, axis.size))
    for power, cp in sigma.real.coeffs_in("xi").items():
        xcol = _polyval_asc(np.array(cp.x_coeffs_float()), axis)[:, None]
        vals += xcol * (axis[None, :] ** power)
    return max(0.0, -float(vals.min())) + 1.0
