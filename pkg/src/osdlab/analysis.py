"""Error probabilities of reliability-ordered bits, list coverage and union bounds.

All quantities assume the all-(+1) word was sent, so a bit is wrong when its
reliability is negative.  ``u`` always denotes a reliability magnitude.

For both channel models the reliability ``r`` is proportional to the bit LLR
(``LLR = 2 r / sigma^2``), hence ``P(error | |r| = u) = 1 / (1 + exp(2u/sigma^2))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate, optimize, special

from .codes import weight_spectrum
from .decoders import DecoderSpec
from .gf2 import BinaryMatrix

TAIL = 1e-12


class QuadratureError(RuntimeError):
    def __init__(self, what: str, value: float, abserr: float):
        super().__init__(f"{what}: quadrature did not converge (value {value:.6g}, abserr {abserr:.3g})")
        self.value = value
        self.abserr = abserr


@dataclass(frozen=True)
class Tolerances:
    epsabs: float = 0.0
    epsrel: float = 1e-6
    limit: int = 200


DEFAULT_TOL = Tolerances()


class ReliabilityModel:
    """Distribution of one reliability magnitude ``|r|`` before ordering.

    ``awgn``: ``r ~ N(1, sigma^2)``.  ``rayleigh-fast``: ``r = g + sqrt(g) n``
    with ``g ~ Exp(1)``, ``n ~ N(0, sigma^2)``; integrating out ``g`` gives the
    two-sided exponential ``f_r(r) = exp((r - c|r|)/sigma^2) / c`` with
    ``c = sqrt(1 + 2 sigma^2)``.
    """

    def __init__(self, channel: str, snr_db: float, rate: float):
        if channel not in ("awgn", "rayleigh-fast"):
            raise ValueError(f"no reliability model for channel {channel!r}")
        self.channel = channel
        self.snr_db = float(snr_db)
        self.rate = float(rate)
        self.sigma2 = 1.0 / (2.0 * rate * 10.0 ** (snr_db / 10.0))
        self.sigma = math.sqrt(self.sigma2)
        if channel == "rayleigh-fast":
            self._c = math.sqrt(1.0 + 2.0 * self.sigma2)
            self._a_ok = (self._c - 1.0) / self.sigma2
            self._a_err = (self._c + 1.0) / self.sigma2

    def __repr__(self):
        return f"ReliabilityModel({self.channel!r}, snr_db={self.snr_db}, rate={self.rate:.4f})"

    # densities -----------------------------------------------------------
    def pdf(self, u):
        """Density of ``|r|``."""
        u = np.asarray(u, dtype=float)
        if self.channel == "awgn":
            s = self.sigma
            out = (np.exp(-0.5 * ((u - 1) / s) ** 2) + np.exp(-0.5 * ((u + 1) / s) ** 2)) / (
                s * math.sqrt(2 * math.pi)
            )
        else:
            out = (np.exp(-self._a_ok * u) + np.exp(-self._a_err * u)) / self._c
        return np.where(u < 0, 0.0, out)

    def sf(self, u):
        """``P(|r| > u)``."""
        u = np.asarray(u, dtype=float)
        if self.channel == "awgn":
            s = self.sigma
            out = special.ndtr((1 - u) / s) + special.ndtr(-(1 + u) / s)
        else:
            c = self._c
            out = np.exp(-self._a_ok * u) / (c * self._a_ok) + np.exp(-self._a_err * u) / (c * self._a_err)
        return np.where(u < 0, 1.0, np.clip(out, 0.0, 1.0))

    def cdf(self, u):
        return 1.0 - self.sf(u)

    def err_pdf(self, u):
        """Density of ``|r|`` jointly with a sign error (integrates to the raw BER)."""
        u = np.asarray(u, dtype=float)
        if self.channel == "awgn":
            s = self.sigma
            out = np.exp(-0.5 * ((u + 1) / s) ** 2) / (s * math.sqrt(2 * math.pi))
        else:
            out = np.exp(-self._a_err * u) / self._c
        return np.where(u < 0, 0.0, out)

    def err_sf(self, u):
        """``P(|r| > u and sign error)``."""
        u = np.asarray(u, dtype=float)
        if self.channel == "awgn":
            out = special.ndtr(-(1 + np.maximum(u, 0)) / self.sigma)
        else:
            out = np.exp(-self._a_err * np.maximum(u, 0)) / (self._c * self._a_err)
        return out

    def cond_error(self, u):
        """``P(sign error | |r| = u)``."""
        return special.expit(-2.0 * np.asarray(u, dtype=float) / self.sigma2)

    @cached_property
    def raw_ber(self) -> float:
        return float(self.err_sf(0.0))

    @cached_property
    def upper(self) -> float:
        """Magnitude beyond which ``P(|r| > u) < 1e-12``."""
        hi = 1.0
        while self.sf(hi) > TAIL:
            hi *= 2.0
        return optimize.brentq(lambda x: float(self.sf(x)) - TAIL, 0.0, hi, xtol=1e-12)


class OrderStatModel:
    """Order statistics of ``n`` iid magnitudes, ranked in descending order."""

    def __init__(self, n: int, base: ReliabilityModel):
        if n < 1:
            raise ValueError("n must be positive")
        self.n = n
        self.base = base

    def _check(self, k):
        if not 1 <= k <= self.n:
            raise ValueError(f"rank {k} outside [1, {self.n}]")

    def pdf(self, k: int, v):
        """Density of the ``k``-th largest magnitude."""
        self._check(k)
        v = np.asarray(v, dtype=float)
        S = self.base.sf(v)
        F = 1.0 - S
        out = k * math.comb(self.n, k) * self.base.pdf(v) * S ** (k - 1) * F ** (self.n - k)
        return np.where(v < 0, 0.0, out)

    def sf(self, k: int, v):
        """``P(v_k > v)``: at least ``k`` of the ``n`` magnitudes exceed ``v``."""
        self._check(k)
        return special.bdtrc(k - 1, self.n, self.base.sf(v))

    def cdf(self, k: int, v):
        return 1.0 - self.sf(k, v)

    def joint_pdf(self, i: int, j: int, a, b):
        """Joint density of ``(v_i, v_j)``, ``i < j``, evaluated at ``a >= b``."""
        self._check(i)
        self._check(j)
        if not i < j:
            raise ValueError("need i < j")
        n = self.n
        logc = (
            math.lgamma(n + 1) - math.lgamma(i) - math.lgamma(j - i) - math.lgamma(n - j + 1)
        )
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        Sa, Sb = self.base.sf(a), self.base.sf(b)
        out = (
            math.exp(logc)
            * Sa ** (i - 1)
            * self.base.pdf(a)
            * np.maximum(Sb - Sa, 0.0) ** (j - i - 1)
            * self.base.pdf(b)
            * (1.0 - Sb) ** (n - j)
        )
        return np.where((a >= b) & (b >= 0), out, 0.0)

    def quantile(self, k: int, q: float) -> float:
        hi = self.base.upper
        f = lambda v: float(self.cdf(k, v)) - q
        if f(0.0) >= 0:
            return 0.0
        if f(hi) <= 0:
            return hi
        return optimize.brentq(f, 0.0, hi, xtol=1e-12)

    def breakpoints(self, k: int, lo: float = 0.0, hi: float | None = None) -> list[float]:
        """Quantiles of ``v_k`` inside ``(lo, hi)`` to steer adaptive quadrature."""
        hi = self.base.upper if hi is None else hi
        pts = {self.quantile(k, q) for q in (1e-6, 1e-3, 0.05, 0.5, 0.95, 0.999, 1 - 1e-6)}
        return sorted(p for p in pts if lo < p < hi)


def order_stat_pdf(k: int, v, model: OrderStatModel):
    """Density of the ``k``-th largest of ``model.n`` magnitudes at ``v``."""
    return model.pdf(k, v)


# --------------------------------------------------------------------------
# quadrature


def _quad(f, a, b, tol: Tolerances, what: str, points=None) -> float:
    if b <= a:
        return 0.0
    pts = None
    if points:
        pts = [p for p in points if a < p < b] or None
    value, abserr, info = integrate.quad(
        f, a, b, epsabs=tol.epsabs, epsrel=tol.epsrel, limit=tol.limit, points=pts, full_output=1
    )[:3]
    if abserr > max(tol.epsabs, 10 * tol.epsrel * abs(value), 1e-300) and abserr > 1e-3 * abs(value):
        raise QuadratureError(what, value, abserr)
    return value


def _above_rank(model: OrderStatModel, rank: int, tol: Tolerances) -> float:
    """Mean error probability of the bits ranked above ``rank`` (i.e. ``|r| > v_rank``)."""
    base = model.base
    f = lambda v: float(model.pdf(rank, v) * base.err_sf(v) / base.sf(v))
    return _quad(f, 0.0, base.upper, tol, f"window above rank {rank}", model.breakpoints(rank))


def _below_rank(model: OrderStatModel, rank: int, tol: Tolerances) -> float:
    """Mean error probability of the bits ranked below ``rank`` (``|r| < v_rank``)."""
    base, n, k = model.base, model.n, rank
    total = base.raw_ber
    logc = math.log(k) + math.log(math.comb(n, k))

    def f(a):
        S = float(base.sf(a))
        # f_{v_k}(a) / F(a), written without the division
        return math.exp(logc) * float(base.pdf(a)) * S ** (k - 1) * (1 - S) ** (n - k - 1) * (
            total - float(base.err_sf(a))
        )

    return _quad(f, 0.0, base.upper, tol, f"window below rank {rank}", model.breakpoints(rank))


def _between_ranks(model: OrderStatModel, i: int, j: int, tol: Tolerances) -> float:
    """Mean error probability of ranks ``i+1 .. j-1``, using the exact joint law of ``(v_i, v_j)``."""
    base, n = model.base, model.n
    m = j - i - 1
    logc = math.lgamma(n + 1) - math.lgamma(i) - math.lgamma(j - i) - math.lgamma(n - j + 1)
    c = math.exp(logc)
    upper = base.upper
    pts_a = model.breakpoints(i)

    def inner(b):
        Sb = float(base.sf(b))
        Eb = float(base.err_sf(b))

        def g(a):
            Sa = float(base.sf(a))
            d = Sb - Sa
            if d <= 0:
                return 0.0
            # joint density times (err mass in window)/(mass in window), with the division cancelled
            return Sa ** (i - 1) * float(base.pdf(a)) * d ** (m - 1) * (Eb - float(base.err_sf(a)))

        return _quad(g, b, upper, tol, "inner window integral", pts_a)

    def outer(b):
        return c * float(base.pdf(b)) * (1.0 - float(base.sf(b))) ** (n - j) * inner(b)

    return _quad(outer, 0.0, upper, tol, f"window between ranks {i},{j}", model.breakpoints(j))


def prob_rank_window(model: OrderStatModel, lo: int, hi: int, tol: Tolerances = DEFAULT_TOL) -> float:
    """Average bit error probability over descending ranks ``lo..hi`` (1-based, inclusive)."""
    n = model.n
    if not 1 <= lo <= hi <= n:
        raise ValueError(f"bad rank window {lo}..{hi} for n={n}")
    if lo == 1 and hi == n:
        return model.base.raw_ber
    if lo == 1:
        return _above_rank(model, hi + 1, tol)
    if hi == n:
        return _below_rank(model, lo - 1, tol)
    return _between_ranks(model, lo - 1, hi + 1, tol)


def prob_mrip_error(
    model: OrderStatModel, k: int, nested: bool = False, tol: Tolerances = DEFAULT_TOL
) -> float:
    """Bit error probability of the ``k`` most reliable positions out of ``model.n``.

    The default evaluates the single integral over the ``(k+1)``-th order
    statistic with the inner magnitude integral done in closed form.  With
    ``nested`` the double integral over ``u`` and ``v`` is evaluated as written,
    ``int f_err(u) int_0^u f_{v}(v) / (1 - F(v)) dv du``.
    """
    if not 1 <= k < model.n:
        raise ValueError(f"need 1 <= K < N, got K={k}, N={model.n}")
    if not nested:
        return _above_rank(model, k + 1, tol)
    base = model.base
    inner = lambda u: _quad(
        lambda v: float(model.pdf(k + 1, v) / base.sf(v)), 0.0, u, tol, "inner P0", model.breakpoints(k + 1, 0.0, u)
    )
    return _quad(lambda u: float(base.err_pdf(u)) * inner(u), 0.0, base.upper, tol, "outer P0",
                 model.breakpoints(k + 1))


def prob_segment_errors_printed(model: OrderStatModel, k1: int, k: int, tol: Tolerances = DEFAULT_TOL) -> float:
    """Second-segment probability with the two bounding order statistics
    treated as independent apart from their ordering (the textbook shortcut).

    ``int f_{v3}(b)/(1 - F_{v1}(b)) int_{a > b} f_{v1}(a) (E(b) - E(a)) / (F(a) - F(b)) da db``
    """
    base = model.base
    upper = base.upper
    has_lower = k < model.n

    def inner(b):
        Sb, Eb = float(base.sf(b)), float(base.err_sf(b))

        def g(a):
            d = Sb - float(base.sf(a))
            return 0.0 if d <= 0 else float(model.pdf(k1, a)) * (Eb - float(base.err_sf(a))) / d

        return _quad(g, b, upper, tol, "printed P2 inner", model.breakpoints(k1))

    if not has_lower:
        return inner(0.0)
    outer = lambda b: float(model.pdf(k + 1, b)) / float(model.sf(k1, b)) * inner(b)
    return _quad(outer, 0.0, upper, tol, "printed P2 outer", model.breakpoints(k + 1))


def prob_segment_errors(
    model: OrderStatModel, k1: int, k: int, method: str = "exact", tol: Tolerances = DEFAULT_TOL
) -> tuple[float, float]:
    """Bit error probabilities of the first ``k1`` and the next ``k - k1`` ranked positions.

    ``method="exact"`` integrates against the joint density of the bounding
    order statistics; ``"printed"`` uses the independence shortcut of
    :func:`prob_segment_errors_printed`.  With ``k == model.n`` (partial
    ordering of the systematic bits only) the second segment has no lower
    bounding statistic.
    """
    if not 1 <= k1 < k <= model.n:
        raise ValueError(f"need 1 <= K1 < K <= N, got K1={k1}, K={k}, N={model.n}")
    p1 = prob_rank_window(model, 1, k1, tol)
    if method == "exact":
        p2 = prob_rank_window(model, k1 + 1, k, tol)
    elif method == "printed":
        p2 = prob_segment_errors_printed(model, k1, k, tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    return p1, p2


def total_segment_error_prob(size: int, errors: int, p0: float) -> float:
    """Summed joint probability of all ``errors``-subsets of a ``size``-bit segment: ``C(size, errors) p0^errors``."""
    if not 0 <= errors <= size:
        raise ValueError("need 0 <= errors <= size")
    return math.comb(size, errors) * p0**errors


def _binom_cdf(i: int, k: int, p: float) -> float:
    return float(special.bdtr(i, k, p)) if i < k else 1.0


def segment_probabilities(spec: DecoderSpec, model: OrderStatModel, method: str = "exact",
                          tol: Tolerances = DEFAULT_TOL) -> list[float]:
    """Per-segment bit error probabilities for the list decoder ``spec``."""
    base = model.base
    k = spec.k
    fam = spec.family
    if fam == "isd" or (fam == "posd" and spec.q == 1):
        return [base.raw_ber]
    pool = OrderStatModel(model.n if fam in ("osd", "seg-osd") else k, base)
    if spec.q == 1:
        return [prob_rank_window(pool, 1, k, tol)]
    if spec.q == 2 and method == "printed":
        return list(prob_segment_errors(pool, spec.segments[0][0], k, "printed", tol))
    out, start = [], 0
    for kq, _ in spec.segments:
        out.append(prob_rank_window(pool, start + 1, start + kq, tol))
        start += kq
    return out


def list_coverage_prob(spec: DecoderSpec, model: OrderStatModel, method: str = "exact",
                       rule: str = "union", tol: Tolerances = DEFAULT_TOL) -> float:
    """Probability that the information-set error pattern lies in the test list.

    Errors are taken as independent within a segment with that segment's
    error probability, and segments as conditionally independent.  With
    ``rule="union"`` (the list actually built) a pattern is covered when at
    most one segment is in error and that one has at most ``I_q`` errors.
    ``rule="product"`` scores the Cartesian-product list instead, where every
    segment may carry up to ``I_q`` errors at once.
    """
    if spec.family not in ("osd", "seg-osd", "posd", "isd"):
        raise ValueError(f"{spec.family} has no test list")
    probs = segment_probabilities(spec, model, method, tol)
    if spec.q == 1:
        return _binom_cdf(spec.orders[0], spec.k, probs[0])
    within = [_binom_cdf(iq, kq, p) for p, (kq, iq) in zip(probs, spec.segments)]
    if rule == "product":
        return math.prod(within)
    if rule != "union":
        raise ValueError(f"unknown rule {rule!r}")
    clean = [(1.0 - p) ** kq for p, (kq, _) in zip(probs, spec.segments)]
    all_clean = math.prod(clean)
    total = 0.0
    for q in range(spec.q):
        others = all_clean / clean[q] if clean[q] > 0 else math.prod(c for r, c in enumerate(clean) if r != q)
        total += within[q] * others
    return total - (spec.q - 1) * all_clean


# --------------------------------------------------------------------------
# union bound


def pairwise_error_prob(weight: int, channel: str, snr_db, rate: float):
    """Probability of preferring a codeword at Hamming distance ``weight``."""
    g = rate * 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)
    if channel == "awgn":
        return special.ndtr(-np.sqrt(2.0 * weight * g))
    if channel == "rayleigh-fast":
        mu = np.sqrt(g / (1.0 + g))
        lo, hi = (1 - mu) / 2, (1 + mu) / 2
        total = sum(math.comb(weight - 1 + j, j) * hi**j for j in range(weight))
        return lo**weight * total
    raise ValueError(f"no pairwise error probability for channel {channel!r}")


def union_bound_ber(G: BinaryMatrix, channel: str, snr_db, terms: int = 3):
    """Bit error union bound from the exact weight spectrum, truncated to the lowest ``terms`` weights."""
    k, n = G.shape
    spectrum = weight_spectrum(G)  # refuses K > 20
    weights = sorted(w for w in spectrum if w > 0)[:terms]
    snr = np.asarray(snr_db, dtype=float)
    total = np.zeros_like(snr)
    for w in weights:
        _, info_weight = spectrum[w]
        total = total + (info_weight / k) * pairwise_error_prob(w, channel, snr, k / n)
    return total
