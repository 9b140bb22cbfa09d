"""Hermite-basis truncations and eigenvalue certificates.

Matrices are assembled from ladder band matrices in a working dimension
N + D, where D is the operator order plus the maximal x-degree; the
truncated N x N block then holds exact inner products <L h_j, h_i> (up to
float rounding) rather than truncated-product artifacts.  All PSD
conclusions are certificates about the truncated span only and are
labelled as such.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import structure
from .errors import NumericError, PositivityError
from .opalg import DivOp, RawOp
from .structure import scale_hbar, scaled_power_div

PSD_TOL = -1e-8
BISECT_CAP = 1e12
BISECT_RTOL = 1e-6


@dataclass(frozen=True)
class FockMatrix:
    dim: int
    hbar: float
    entries: np.ndarray
    headroom_used: int


def ladder(dim: int) -> np.ndarray:
    """Annihilation band matrix at hbar = 1: a h_n = sqrt(n) h_{n-1}."""
    a = np.zeros((dim, dim))
    idx = np.arange(1, dim)
    a[idx - 1, idx] = np.sqrt(idx)
    return a


def position_and_derivative(dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Band matrices of M_x = (a + a^T)/sqrt2 and d = (a - a^T)/sqrt2."""
    a = ladder(dim)
    return (a + a.T) / math.sqrt(2), (a - a.T) / math.sqrt(2)


def fock_matrix(op: RawOp | DivOp, N: int, hbar: float = 1.0) -> FockMatrix:
    """Truncation of an operator to the span of the first N Hermite functions.

    hbar enters only through the operator's s-coefficients; the basis is
    always the hbar = 1 Hermite family.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if isinstance(op, DivOp):
        op = structure.raw_from_divergence(op)
    sval = math.sqrt(hbar)
    coeff_arrays = [a.x_coeffs_float(s=sval) for a in op.coeffs]
    band = op.order + max(len(c) - 1 for c in coeff_arrays)
    W = N + band
    X, Dm = position_and_derivative(W)
    total = np.zeros((W, W))
    dpow = np.eye(W)
    for k, coeffs in enumerate(coeff_arrays):
        if k:
            dpow = dpow @ Dm
        if not np.any(coeffs):
            continue
        amat = np.zeros((W, W))
        for c in coeffs[::-1]:
            amat = amat @ X
            if c:
                amat += c * np.eye(W)
        total += amat @ dpow
    out = total[:N, :N].copy()
    if not np.all(np.isfinite(out)):
        raise NumericError("non-finite entry in Fock truncation")
    return FockMatrix(dim=N, hbar=hbar, entries=out, headroom_used=band)


def number_matrix(N: int, hbar: float) -> FockMatrix:
    """Truncated harmonic oscillator Hamiltonian: hbar * diag(0..N-1)."""
    if N < 1:
        raise ValueError("N must be at least 1")
    return FockMatrix(
        dim=N, hbar=hbar, entries=hbar * np.diag(np.arange(N, dtype=float)),
        headroom_used=0,
    )


def _as_array(m) -> np.ndarray:
    return m.entries if isinstance(m, FockMatrix) else np.asarray(m, dtype=float)


def min_eigenvalue(m) -> float:
    """Smallest eigenvalue of a symmetric matrix, residual-checked."""
    a = _as_array(m)
    vals, vecs = np.linalg.eigh(a)
    k = int(np.argmin(vals))
    residual = np.linalg.norm(a @ vecs[:, k] - vals[k] * vecs[:, k])
    scale = np.linalg.norm(a)
    if scale and residual > 1e-8 * scale:
        raise NumericError(f"eigenvalue residual {residual:g} exceeds tolerance")
    return float(vals[k])


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


@dataclass
class PositivityReport:
    c_found: float
    min_eigenvalues: dict[float, float]
    n: int
    dim: int
    scope: str = "truncation certificate"


def _scaled_power_operator(family: DivOp, n: int) -> DivOp:
    """The divergence operator in (x, s) realizing L_hbar^n."""
    dec = scaled_power_div(family, n)
    return scale_hbar(DivOp.from_coeffs(dec.B))


def positivity_certificate(
    family: DivOp, n: int, hbar_grid, N: int
) -> PositivityReport:
    """Smallest shift C with L_hbar^n + C >= 0 on the truncated span."""
    op = _scaled_power_operator(family, n)
    eigs = {}
    for h in hbar_grid:
        eigs[float(h)] = min_eigenvalue(fock_matrix(op, N, hbar=float(h)))
    worst = min(eigs.values())
    c_found = 0.0 if worst >= PSD_TOL else -worst + 1e-9
    return PositivityReport(c_found=c_found, min_eigenvalues=eigs, n=n, dim=N)


@dataclass
class ComparisonReport:
    c1_found: float | None
    c2: float
    n: int
    dim: int
    hypothesis: list[str] = field(default_factory=list)
    scope: str = "truncation certificate"

    @property
    def holds(self) -> bool:
        return self.c1_found is not None


def _smallest_factor(pairs: list[tuple[np.ndarray, np.ndarray]]) -> float | None:
    """Least C with C*B - A PSD (tolerance PSD_TOL) for every (A, B) pair.

    Doubling search then bisection to relative tolerance BISECT_RTOL;
    returns None above BISECT_CAP.
    """

    def ok(c: float) -> bool:
        return all(min_eigenvalue(c * b - a) >= PSD_TOL for a, b in pairs)

    hi = 1.0
    while not ok(hi):
        hi *= 2.0
        if hi > BISECT_CAP:
            return None
    lo = 0.0
    while hi - lo > BISECT_RTOL * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def comparison_certificate(
    family_tilde: DivOp,
    family: DivOp,
    n: int,
    hbar_grid,
    N: int,
    c2: float,
) -> ComparisonReport:
    """Least C1 with Ltilde_hbar^n <= C1 (L_hbar^n + C2) across the grid."""
    op_t = _scaled_power_operator(family_tilde, n)
    op = _scaled_power_operator(family, n)
    pairs = []
    for h in hbar_grid:
        mt = fock_matrix(op_t, N, hbar=float(h)).entries
        m = fock_matrix(op, N, hbar=float(h)).entries
        pairs.append((mt, m + c2 * np.eye(N)))
    interval = (min(float(h) for h in hbar_grid), max(float(h) for h in hbar_grid))
    hypothesis = _domination_hypothesis(family_tilde, family, interval)
    c1 = _smallest_factor(pairs)
    return ComparisonReport(c1_found=c1, c2=c2, n=n, dim=N, hypothesis=hypothesis)


def _domination_hypothesis(
    family_tilde: DivOp, family: DivOp, interval: tuple[float, float]
) -> list[str]:
    """Report (not enforce) the coefficient domination hypothesis."""
    from .conditions import dominate

    notes = []
    if family_tilde.m > family.m:
        notes.append("m_tilde exceeds m: hypothesis fails")
        return notes
    for l, bt in enumerate(family_tilde.coeffs):
        b = family.coeff(l) + 1
        try:
            if bt.degree("x") == b.degree("x"):
                res = dominate(bt, b, interval, mode="equal-degree")
            else:
                res = dominate(bt, b, interval, mode="strict", eps=1.0)
            notes.append(
                f"l={l}: |btilde_l| <= {res.factor:.6g}*(b_l+1) + {res.constant:.6g}"
            )
        except Exception as exc:  # reported, not enforced
            notes.append(f"l={l}: domination check failed: {exc}")
    return notes


@dataclass
class FractionalReport:
    holds: bool
    c_r: float | None
    r: float
    scope: str = "truncation certificate"


def _clamped_power(a: np.ndarray, r: float) -> np.ndarray:
    vals, vecs = np.linalg.eigh(a)
    if vals.min() < PSD_TOL:
        raise PositivityError(
            f"matrix has eigenvalue {vals.min():g} below tolerance; not PSD"
        )
    vals = np.clip(vals, 0.0, None)
    return (vecs * vals**r) @ vecs.T


def fractional_compare(a, b, r: float) -> FractionalReport:
    """Least C_r with A^r <= C_r B^r, through spectral calculus."""
    ar = _clamped_power(_as_array(a), r)
    br = _clamped_power(_as_array(b), r)
    c = _smallest_factor([(ar, br)])
    return FractionalReport(holds=c is not None, c_r=c, r=r)


# frozen 2x2 pair with A <= B whose squares violate the order (r = 2)
LOEWNER_COUNTEREXAMPLE = (
    np.array([[1.0, 1.0], [1.0, 1.0]]),
    np.array([[2.0, 1.0], [1.0, 1.0]]),
)


@dataclass
class ProbeReport:
    trials: int
    dim: int
    r_set: tuple[float, ...]
    violations: list[tuple[int, float, float]]
    counterexample_detected: bool
    seed: int


def loewner_heinz_probe(
    trials: int, dim: int, r_set, seed: int = 0
) -> ProbeReport:
    """Random A <= B pairs: checks A^r <= B^r for r in [0, 1].

    Also evaluates the frozen r = 2 pair, which must violate the order.
    """
    r_set = tuple(float(r) for r in r_set)
    if any(r < 0 or r > 1 for r in r_set):
        raise ValueError("r_set must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    violations = []
    for t in range(trials):
        g1 = rng.standard_normal((dim, dim))
        g2 = rng.standard_normal((dim, dim))
        a = g1 @ g1.T + 1e-3 * np.eye(dim)
        b = a + g2 @ g2.T
        for r in r_set:
            gap = min_eigenvalue(_clamped_power(b, r) - _clamped_power(a, r))
            if gap < PSD_TOL:
                violations.append((t, r, gap))
    a, b = LOEWNER_COUNTEREXAMPLE
    detected = min_eigenvalue(b @ b - a @ a) < PSD_TOL
    return ProbeReport(
        trials=trials, dim=dim, r_set=r_set, violations=violations,
        counterexample_detected=detected, seed=seed,
    )


@dataclass
class SandwichReport:
    c_used: float
    lower_gaps: dict[float, float]
    upper_gaps: dict[float, float]
    scope: str = "truncation certificate"

    @property
    def holds(self) -> bool:
        lo = min(self.lower_gaps.values())
        hi = min(self.upper_gaps.values())
        return lo >= PSD_TOL and hi >= PSD_TOL


def sandwich_certificate(
    family: DivOp, n: int, hbar_grid, N: int, c: float
) -> SandwichReport:
    """Truncated form of the frozen-coefficient sandwich:

    (1/2)(M_calL + c) <= M_{L^n} + c <= (3/2)(M_calL + c).
    """
    dec = scaled_power_div(family, n)
    op_full = scale_hbar(DivOp.from_coeffs(dec.B))
    op_frozen = scale_hbar(DivOp.from_coeffs(dec.calB))
    lower, upper = {}, {}
    for h in hbar_grid:
        hf = float(h)
        eye = np.eye(N)
        mfull = fock_matrix(op_full, N, hbar=hf).entries + c * eye
        mfroz = fock_matrix(op_frozen, N, hbar=hf).entries + c * eye
        lower[hf] = min_eigenvalue(mfull - 0.5 * mfroz)
        upper[hf] = min_eigenvalue(1.5 * mfroz - mfull)
    return SandwichReport(c_used=c, lower_gaps=lower, upper_gaps=upper)
