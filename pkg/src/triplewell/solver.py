"""Variational eigenvalues of H = p^2/2 + V(x) in a harmonic-oscillator basis.

The basis is the oscillator at frequency ``Omega``.  In it

    x^2 |n> = [ sqrt(n(n-1)) |n-2> + (2n+1) |n> + sqrt((n+1)(n+2)) |n+2> ] / (2 Omega)

so x^6 - 2x^4 + x^2 couples |n> only to |n +- 2k>, k <= 3.  The even and odd
parity blocks are therefore banded with half-bandwidth 3 and are solved
separately.  Eigenvalues come from bisection on exact Sturm counts (the
number of negative pivots of a banded LDL^T factorisation of H - sigma), so
every digit is produced at the working precision.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.linalg import eigvals_banded

from .errors import EigensolveError, EscalationBudgetError
from .potential import TripleWellParams
from .precision import PrecisionContext, resolve
from .spectrum import SpectrumMethod, SpectrumTriplet

log = logging.getLogger(__name__)

BLOCK_BANDWIDTH = 3
MIN_BASIS = 20


class Parity(str, enum.Enum):
    EVEN = "even"
    ODD = "odd"


@dataclass(frozen=True)
class EigenSolveConfig:
    basis_size: int = 60
    basis_frequency: float | None = None
    ctx: PrecisionContext = field(default_factory=PrecisionContext.default)
    off_diagonal_threshold: float | None = None
    target_digits: int = 20

    def __post_init__(self) -> None:
        if self.basis_size < MIN_BASIS:
            raise ValueError(f"basis_size must be >= {MIN_BASIS}, got {self.basis_size}")
        if self.basis_frequency is not None and not self.basis_frequency > 0:
            raise ValueError("basis_frequency must be positive")
        if self.off_diagonal_threshold is None:
            object.__setattr__(self, "off_diagonal_threshold", 10.0 ** -(self.ctx.digits - 5))
        if not self.off_diagonal_threshold > 0:
            raise ValueError("off_diagonal_threshold must be positive")
        if not 0 < self.target_digits <= self.ctx.digits - 10:
            raise ValueError(
                f"target_digits must be in [1, digits - 10] = [1, {self.ctx.digits - 10}], "
                f"got {self.target_digits}"
            )

    def frequency(self, params: TripleWellParams):
        return self.basis_frequency if self.basis_frequency is not None else params.omega


@dataclass(frozen=True)
class HamiltonianBlock:
    """One parity block, stored by diagonals: ``bands[d][i] = H[i, i + d]``."""

    parity: Parity
    bands: tuple
    bandwidth: int = BLOCK_BANDWIDTH

    @property
    def size(self) -> int:
        return len(self.bands[0])

    def entry(self, i: int, j: int):
        d = abs(i - j)
        if d > self.bandwidth:
            return self.bands[0][0] * 0
        return self.bands[d][min(i, j)]

    @property
    def entries(self) -> list:
        n = self.size
        return [[self.entry(i, j) for j in range(n)] for i in range(n)]


@dataclass(frozen=True)
class EigenResult:
    eigenvalues: tuple
    stable_digits: int
    escalations: tuple


# ---------------------------------------------------------------------------
# Matrix elements
# ---------------------------------------------------------------------------


def _sparse_product(a: dict, b: dict) -> dict:
    out: dict = {}
    for i, row in a.items():
        acc: dict = {}
        for k, aik in row.items():
            for j, bkj in b.get(k, {}).items():
                acc[j] = acc.get(j, 0) + aik * bkj
        out[i] = acc
    return out


def position_squared(size: int, omega, mp) -> dict:
    """<m|x^2|n> for m, n < size as ``{m: {n: value}}``."""
    omega = mp.mpf(omega)
    rows: dict = {i: {} for i in range(size)}
    for n in range(size):
        rows[n][n] = mp.mpf(2 * n + 1) / (2 * omega)
        if n + 2 < size:
            off = mp.sqrt((n + 1) * (n + 2)) / (2 * omega)
            rows[n][n + 2] = off
            rows[n + 2][n] = off
    return rows


def position_power(power: int, size: int, omega, mp) -> dict:
    """<m|x^power|n> for even ``power``, exact for m, n < size.

    Products are formed in a basis padded by ``power`` states so that the
    truncation never cuts a ladder path contributing to the kept block.
    """
    if power % 2 or power < 0:
        raise ValueError("only even powers are needed here")
    padded = size + power
    x2 = position_squared(padded, omega, mp)
    out = {i: {i: mp.one} for i in range(padded)}
    for _ in range(power // 2):
        out = _sparse_product(out, x2)
    return {i: {j: v for j, v in out[i].items() if j < size} for i in range(size)}


def _full_hamiltonian(params, basis_frequency, full_size, mp, potential):
    big = full_size + 6
    w = mp.mpf(params.omega)
    omega = mp.mpf(basis_frequency)
    x2 = position_squared(big, omega, mp)
    if potential == "harmonic":
        v = {i: {j: w * w / 2 * val for j, val in row.items()} for i, row in x2.items()}
    elif potential == "tripleWell":
        x4 = _sparse_product(x2, x2)
        x6 = _sparse_product(x4, x2)
        v = {}
        for i in range(big):
            row = {}
            for j in set(x2[i]) | set(x4[i]) | set(x6[i]):
                row[j] = w * w / 2 * (x6[i].get(j, 0) - 2 * x4[i].get(j, 0) + x2[i].get(j, 0))
            v[i] = row
    else:
        raise ValueError(f"unknown potential {potential!r}")
    # p^2/2: diagonal Omega (n + 1/2) / 2, second off-diagonal -Omega sqrt((n+1)(n+2)) / 4
    h = {}
    for i in range(full_size):
        row = {j: val for j, val in v[i].items() if j < full_size}
        row[i] = row.get(i, 0) + omega * (2 * i + 1) / 4
        for j in (i - 2, i + 2):
            if 0 <= j < full_size:
                lo = min(i, j)
                row[j] = row.get(j, 0) - omega * mp.sqrt((lo + 1) * (lo + 2)) / 4
        h[i] = row
    return h


def build_hamiltonian(params: TripleWellParams, cfg: EigenSolveConfig, parity: Parity | str,
                      *, potential: str = "tripleWell") -> HamiltonianBlock:
    """Parity block of H with ``cfg.basis_size`` states.

    ``potential="harmonic"`` swaps in omega^2 x^2 / 2; it is a self-test hook
    whose spectrum is known exactly.
    """
    parity = Parity(parity)
    mp = cfg.ctx.mp
    n = cfg.basis_size
    offset = 0 if parity is Parity.EVEN else 1
    full = _full_hamiltonian(params, cfg.frequency(params), 2 * n + offset, mp, potential)
    idx = [2 * k + offset for k in range(n)]
    bands = tuple(
        tuple(mp.mpf(full[idx[i]].get(idx[i + d], 0)) for i in range(n - d))
        for d in range(BLOCK_BANDWIDTH + 1)
    )
    return HamiltonianBlock(parity, bands)


def dense_block(matrix, parity: Parity | str = Parity.EVEN, ctx: PrecisionContext | None = None) -> HamiltonianBlock:
    """Wrap a small symmetric matrix (list of rows) as a block, e.g. for tests."""
    mp = resolve(ctx).mp
    n = len(matrix)
    bw = max([abs(i - j) for i in range(n) for j in range(n) if matrix[i][j] != 0] + [0])
    bands = tuple(tuple(mp.mpf(matrix[i][i + d]) for i in range(n - d)) for d in range(bw + 1))
    return HamiltonianBlock(Parity(parity), bands, bw)


# ---------------------------------------------------------------------------
# Eigenvalues
# ---------------------------------------------------------------------------


def sturm_count(block: HamiltonianBlock, sigma, mp) -> int:
    """Number of eigenvalues of ``block`` below ``sigma`` (Sylvester inertia of LDL^T)."""
    bands = block.bands
    bw = block.bandwidth
    n = block.size
    sigma = mp.mpf(sigma)
    tiny = mp.eps * (abs(sigma) + 1)
    d = [None] * n
    # lw[i][k] = L[i, i-k] * d[i-k] for k = 1..bw
    lw = [[None] * (bw + 1) for _ in range(n)]
    negative = 0
    for j in range(n):
        row_j = lw[j]
        dj = bands[0][j] - sigma
        for k in range(1, min(bw, j) + 1):
            w = row_j[k]
            dj -= w * w / d[j - k]
        if dj == 0:
            dj = -tiny
        d[j] = dj
        if dj < 0:
            negative += 1
        for r in range(1, min(bw, n - 1 - j) + 1):
            i = j + r
            acc = bands[r][j]
            # sum over p < j with both L[i, p] and L[j, p] inside the band
            for k in range(1, bw - r + 1):
                if j - k < 0:
                    break
                acc -= lw[i][r + k] * row_j[k] / d[j - k]
            lw[i][r] = acc
    return negative


def _gershgorin(block: HamiltonianBlock, mp):
    lo = hi = None
    for i in range(block.size):
        radius = mp.fsum(abs(block.entry(i, j)) for j in range(max(0, i - block.bandwidth),
                                                             min(block.size, i + block.bandwidth + 1))
                         if j != i)
        c = block.bands[0][i]
        lo = c - radius if lo is None else min(lo, c - radius)
        hi = c + radius if hi is None else max(hi, c + radius)
    return lo - 1, hi + 1


def _float_estimates(block: HamiltonianBlock, k: int):
    bw = block.bandwidth
    n = block.size
    lower = np.zeros((bw + 1, n))
    for d in range(bw + 1):
        lower[d, : n - d] = [float(v) for v in block.bands[d]]
    try:
        return eigvals_banded(lower, lower=True, select="i", select_range=(0, k - 1))
    except Exception:  # pragma: no cover - float path is only a bracket hint
        return None


def bisect_eigenvalues(block: HamiltonianBlock, k: int, ctx: PrecisionContext) -> list:
    """The ``k`` smallest eigenvalues by Sturm bisection to ~``ctx.digits - 3`` digits."""
    mp = ctx.mp
    rtol = mp.mpf(10) ** (-(ctx.digits - 3))
    g_lo, g_hi = _gershgorin(block, mp)
    hints = _float_estimates(block, k)
    out = []
    for idx in range(k):
        lo = hi = None
        if hints is not None:
            guess = mp.mpf(float(hints[idx]))
            eta = mp.mpf(1e-7) * max(abs(guess), mp.one)
            a, b = guess - eta, guess + eta
            if sturm_count(block, a, mp) <= idx < sturm_count(block, b, mp):
                lo, hi = a, b
        if lo is None:
            lo, hi = g_lo, g_hi
        while hi - lo > rtol * max(abs(lo), abs(hi), mp.one):
            mid = (lo + hi) / 2
            if sturm_count(block, mid, mp) > idx:
                hi = mid
            else:
                lo = mid
        out.append((lo + hi) / 2)
    return out


def jacobi_eigenvalues(matrix: list, ctx: PrecisionContext, threshold=None, max_sweeps: int = 60) -> list:
    """All eigenvalues of a dense symmetric matrix by cyclic Jacobi rotations, ascending.

    Sweeps stop once the off-diagonal Frobenius norm is at most ``threshold``
    times the Frobenius norm of the matrix.
    """
    mp = ctx.mp
    a = [[mp.mpf(v) for v in row] for row in matrix]
    n = len(a)
    threshold = mp.mpf(threshold if threshold is not None else 10.0 ** -(ctx.digits - 5))
    scale = mp.sqrt(mp.fsum(v * v for row in a for v in row)) or mp.one

    def off_norm():
        return mp.sqrt(mp.fsum(a[i][j] ** 2 for i in range(n) for j in range(n) if i != j))

    for _ in range(max_sweeps):
        off = off_norm()
        if off <= threshold * scale:
            return sorted(a[i][i] for i in range(n))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if apq == 0:
                    continue
                theta = (a[q][q] - a[p][p]) / (2 * apq)
                t = mp.one / (abs(theta) + mp.sqrt(theta * theta + 1))
                if theta < 0:
                    t = -t
                c = 1 / mp.sqrt(t * t + 1)
                s = t * c
                for r in range(n):
                    arp, arq = a[r][p], a[r][q]
                    a[r][p] = c * arp - s * arq
                    a[r][q] = s * arp + c * arq
                for r in range(n):
                    apr, aqr = a[p][r], a[q][r]
                    a[p][r] = c * apr - s * aqr
                    a[q][r] = s * apr + c * aqr
    raise EigensolveError(f"Jacobi did not converge in {max_sweeps} sweeps", residual=off_norm())


def solve_lowest(block: HamiltonianBlock, k: int, cfg: EigenSolveConfig, method: str = "bisection") -> list:
    """The ``k`` smallest eigenvalues of ``block``, ascending."""
    if not 1 <= k <= block.size:
        raise ValueError(f"k must be in [1, {block.size}], got {k}")
    if method == "bisection":
        return bisect_eigenvalues(block, k, cfg.ctx)
    if method == "jacobi":
        return jacobi_eigenvalues(block.entries, cfg.ctx, cfg.off_diagonal_threshold)[:k]
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Escalation
# ---------------------------------------------------------------------------


def lowest_three(params: TripleWellParams, cfg: EigenSolveConfig) -> tuple:
    """(E0, E1, E2): E0 and E2 from the even block, E1 from the odd block."""
    even = solve_lowest(build_hamiltonian(params, cfg, Parity.EVEN), 2, cfg)
    odd = solve_lowest(build_hamiltonian(params, cfg, Parity.ODD), 1, cfg)
    return even[0], odd[0], even[1]


def agreeing_digits(a, b, cap: int) -> int:
    """Significant digits shared by ``a`` and ``b``, clipped to ``[0, cap]``."""
    if a == b:
        return cap
    rel = abs(a - b) / max(abs(a), abs(b))
    return max(0, min(cap, int(math.floor(-float(mpmath.log10(rel))))))


def default_basis_size(omega: float) -> int:
    # The side wells sit at x = +-1, i.e. sqrt(Omega) oscillator lengths out.
    return max(MIN_BASIS, int(math.ceil(omega / 2)) + 30)


def converged_spectrum(
    params: TripleWellParams,
    target_digits: int,
    ctx: PrecisionContext | None = None,
    *,
    basis_size: int | None = None,
    basis_frequency: float | None = None,
    max_basis: int = 600,
    max_digits: int = 200,
) -> tuple[SpectrumTriplet, EigenResult]:
    """Escalate basis size and precision until E0, E1, E2 are stable to ``target_digits``.

    Each round compares (N, d) against (1.5 N, d) for basis truncation and
    (1.5 N, d) against (1.5 N, d + 20) for rounding; the stable digit count is
    the smaller of the two.  Basis and precision are raised only where the
    corresponding comparison falls short.

    Raises:
        EscalationBudgetError: when ``max_basis`` or ``max_digits`` would be
            exceeded; ``.best`` carries the most refined result.
    """
    if target_digits < 6:
        raise ValueError("target_digits must be >= 6")
    ctx = resolve(ctx)
    digits = max(ctx.digits, target_digits + 10)
    n = basis_size or default_basis_size(params.omega)
    steps: list = []
    cache: dict = {}

    def run(size, d):
        if (size, d) not in cache:
            cfg = EigenSolveConfig(basis_size=size, basis_frequency=basis_frequency,
                                   ctx=PrecisionContext(digits=d), target_digits=target_digits)
            cache[(size, d)] = lowest_three(params, cfg)
            steps.append((size, d))
            log.debug("omega=%s basis=%d digits=%d -> %s", params.omega, size, d,
                      [mpmath.nstr(e, 12) for e in cache[(size, d)]])
        return cache[(size, d)]

    best = None
    while True:
        bigger = int(math.ceil(1.5 * n))
        if bigger > max_basis or digits + 20 > max_digits:
            raise EscalationBudgetError(
                f"escalation budget exhausted at basis={n}, digits={digits} "
                f"(target {target_digits} digits)", best=best)
        base = run(n, digits)
        wide = run(bigger, digits)
        fine = run(bigger, digits + 20)
        basis_agree = min(agreeing_digits(x, y, digits - 5) for x, y in zip(base, wide))
        precision_agree = min(agreeing_digits(x, y, digits - 5) for x, y in zip(wide, fine))
        stable = min(basis_agree, precision_agree)
        e0, e1, e2 = fine
        out_ctx = PrecisionContext(digits=digits + 20)
        triplet = SpectrumTriplet(out_ctx.mpf(e0), out_ctx.mpf(e1), out_ctx.mpf(e2), SpectrumMethod.NUMERIC)
        best = (triplet, EigenResult(tuple(sorted(fine)), stable, tuple(steps)))
        if stable >= target_digits:
            return best
        if basis_agree < target_digits:
            n = bigger
        if precision_agree < target_digits:
            digits += 20
