"""Closed-form capacity/error bounds and exact small-scale companions.

All combinatorial quantities are evaluated in the log domain through
log-gamma, since the binomial coefficients involved overflow any fixed-width
float at realistic sizes.  Natural logarithms throughout unless a function
says otherwise.  Asymptotic statements are exposed as "main term"
evaluations with the hidden constants surfaced as explicit caller knobs;
those values are reported, never asserted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate
from scipy.special import gammaln, logsumexp, ndtr, ndtri, xlogy

from .errors import CapacityExceededError, NumericError, UsageError


@dataclass
class BoundReport:
    """One evaluated bound, ready for display or serialization."""

    name: str
    inputs: dict
    value: float
    log_domain: bool
    asserted: bool = True
    notes: str = ""

    def as_dict(self):
        return {"name": self.name, "inputs": self.inputs, "value": self.value,
                "log_domain": self.log_domain, "asserted": self.asserted,
                "notes": self.notes}


def log_binom(n, k):
    """log C(n, k) via log-gamma; accepts real k."""
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def entropy(q) -> float:
    """Natural-log binary entropy, with H(0) = H(1) = 0 by continuity."""
    q = np.asarray(q, dtype=float)
    if np.any(q < 0) or np.any(q > 1):
        raise UsageError(f"entropy argument must be in [0, 1], got {q}")
    h = -(xlogy(q, q) + xlogy(1 - q, 1 - q))
    return float(h) if h.ndim == 0 else h


def _packing_exponent(alpha, beta):
    arg = alpha * beta / (1 - alpha)
    if np.any(np.asarray(arg) > 1 + 1e-12):
        raise UsageError(f"entropy argument alpha*beta/(1-alpha) = {arg} exceeds 1")
    arg = np.clip(arg, 0.0, 1.0)
    return entropy(alpha) - alpha * entropy(beta) - (1 - alpha) * entropy(arg)


def capacity_upper_bound(n, r_n, b_n) -> float:
    """log of the max item count a strongly stable allocator can separate.

    Sphere packing in the weight-r_n slice of the cube: balls of Hamming
    radius b_n/2 around the images must be disjoint.  Main term only (the
    vanishing correction is omitted); natural-log domain.
    """
    if not 0 < r_n < n:
        raise UsageError(f"need 0 < r_n < n, got {r_n}, {n}")
    if not 0 < b_n <= 2 * r_n:
        raise UsageError(f"need 0 < b_n <= 2*r_n, got b_n={b_n}")
    return float(n * _packing_exponent(r_n / n, b_n / (4 * r_n)))


def datadep_capacity_lower(n, r_n, b_n) -> float:
    """log item-count threshold below which a uniform random map into the
    weight-r_n slice keeps all pairs more than b_n apart with positive
    probability (so a data-dependent allocator exists)."""
    if not 0 < r_n < n:
        raise UsageError(f"need 0 < r_n < n, got {r_n}, {n}")
    if not 0 < b_n <= 2 * r_n:
        raise UsageError(f"need 0 < b_n <= 2*r_n, got b_n={b_n}")
    return float(0.5 * n * _packing_exponent(r_n / n, b_n / (2 * r_n)))


def exact_packing_log_ratio(n, r_n, b_n) -> float:
    """Exact log [ C(n,r_n) / (C(r_n,b_n/4) * C(n-r_n,b_n/4)) ].

    The finite-size packing ratio that capacity_upper_bound approximates in
    entropy form; serves as its independent oracle.
    """
    k = b_n / 4
    return float(log_binom(n, r_n) - log_binom(r_n, k) - log_binom(n - r_n, k))


def error_prob_lower_bound(n, r_n, delta, mu, lam) -> float:
    """log of the pairwise-error lower bound for bi-Lipschitz allocators.

    Main term of the communication-complexity bound: the hidden constant in
    front is not asserted.  Returns
    -((mu-lam)/(mu+lam))^2 * (1/log n) * log[2 r_n delta C(n, r_n(1+delta))].
    """
    if not 0 < lam < mu:
        raise UsageError(f"need 0 < lambda < mu, got lambda={lam}, mu={mu}")
    if not 0 < delta < 1:
        raise UsageError(f"need 0 < delta < 1, got {delta}")
    if r_n * (1 + delta) > n:
        raise UsageError("need r_n*(1+delta) <= n")
    ratio = (mu - lam) / (mu + lam)
    log_outputs = math.log(2 * r_n * delta) + float(log_binom(n, r_n * (1 + delta)))
    return -(ratio ** 2) * log_outputs / math.log(n)


def capacity_from_pairwise_error(epsilon_n, slack) -> int:
    """floor(slack / sqrt(epsilon_n)): items supportable at pairwise error
    epsilon_n, with the caller-supplied slack playing the vanishing sequence
    in the union-bound argument."""
    if not 0 < epsilon_n <= 1:
        raise UsageError(f"need 0 < epsilon_n <= 1, got {epsilon_n}")
    return int(math.floor(slack / math.sqrt(epsilon_n)))


# ---------------------------------------------------------------------------
# sign-rule lemmas
# ---------------------------------------------------------------------------

_TRINOMIAL_BUDGET = 10 ** 7


def lemma1_exact(m, p):
    """Exact (Pr{S=0}, Pr{S=1}) for S a sum of m i.i.d. {+1, 0, -1} steps
    with probabilities (p, 1-2p, p), evaluated by log-stabilized summation
    over paired up/down counts."""
    if m < 1:
        raise UsageError(f"need m >= 1, got {m}")
    if not 0 < 2 * p <= 1:
        raise UsageError(f"need 0 < 2p <= 1, got p={p}")
    if m > _TRINOMIAL_BUDGET:
        raise CapacityExceededError(
            f"m={m} exceeds the exact-summation budget {_TRINOMIAL_BUDGET}; "
            "use the closed-form bounds instead")
    lp = math.log(p)
    l1m = math.log1p(-2 * p) if 2 * p < 1 else None

    def _sum(counts, zeros):
        terms = log_binom(m, counts) + log_binom(counts, counts // 2) + counts * lp
        if l1m is None:
            terms = np.where(zeros == 0, terms, -np.inf)
        else:
            terms = terms + zeros * l1m
        return float(np.exp(logsumexp(terms))) if len(terms) else 0.0

    i = np.arange(0, m // 2 + 1)
    p_zero = _sum(2 * i, m - 2 * i)
    j = np.arange(0, (m - 1) // 2 + 1)
    p_one = _sum(2 * j + 1, m - 2 * j - 1)
    return p_zero, p_one


def lemma1_walk_distribution(m, p):
    """Full distribution of the m-step {+1, 0, -1} walk, index k = S + m.

    O(m^2) dynamic program; the brute-force companion to lemma1_exact.
    """
    if m > 20000:
        raise CapacityExceededError(f"full walk DP limited to m <= 20000, got {m}")
    dist = np.zeros(2 * m + 1)
    dist[m] = 1.0
    for _ in range(m):
        nxt = (1 - 2 * p) * dist
        nxt[2:] += p * dist[:-1][1:]
        nxt[:-2] += p * dist[1:][:-1]
        dist = nxt
    return dist


def lemma12_bounds(m, p):
    """Closed-form bounds: the sign-balance gap 1/2 - Pr{S > 0} is at most
    1/(2 sqrt(pi p m)) + e^{-2(2 ln 2 - 1) p m}/2, and the one-bit-flip
    probability at most 2 sqrt(p/(pi m)) + 2 p e^{-2(2 ln 2 - 1) p m}."""
    if m < 1 or p <= 0:
        raise UsageError(f"need m >= 1 and p > 0, got m={m}, p={p}")
    tail = math.exp(-2 * (2 * math.log(2) - 1) * p * m)
    stability_gap = 1.0 / (2 * math.sqrt(math.pi * p * m)) + 0.5 * tail
    onebit_flip = 2 * math.sqrt(p / (math.pi * m)) + 2 * p * tail
    return stability_gap, onebit_flip


class Lemma3Result(NamedTuple):
    value: float
    clamped: bool


def lemma3_flip_prob(wx, wy, wxy):
    """Gaussian-limit flip probability (1/pi) arccos(overlap correlation)
    for the sign rule on two inputs with |x| = wx, |y| = wy, |x & y| = wxy."""
    if wx < 1 or wy < 1:
        raise UsageError("weights must be >= 1")
    if wxy > min(wx, wy) or wxy < 0:
        raise UsageError(f"overlap {wxy} out of range for weights {wx}, {wy}")
    corr = wxy / math.sqrt(wx * wy)
    clamped = not -1.0 <= corr <= 1.0
    corr = min(1.0, max(-1.0, corr))
    return Lemma3Result(math.acos(corr) / math.pi, clamped)


def trinomial_variance(c, p):
    """Variance of a synaptic weight taking 1-c, -c, 0 with probs p, p, 1-2p."""
    return (2 * c * c - 2 * c + 1) * p - (1 - 2 * c) ** 2 * p * p


def lemma4_flip_prob(n, c, p, eta, epsabs=1e-8):
    """Gaussian-limit flip probability for correlated inputs.

    Inputs are n i.i.d. coordinate pairs, each near density 1/2 and
    disagreeing with probability eta; weights take 1-c / -c / 0 with
    probabilities p / p / 1-2p.  Evaluates

        (2/s) * integral phi(t/s) * Phi(-|sqrt(2) t - D| / sqrt(eta)) dt

    with s = sqrt(1 - eta/2) and D = (2c-1) p sqrt(n) / sqrt(v(c, p)), by
    adaptive quadrature split at the |.| kink, truncated where the Gaussian
    envelope mass drops below 1e-12.
    """
    if not 0 < eta <= 1:
        raise UsageError(f"need 0 < eta <= 1, got {eta}")
    v = trinomial_variance(c, p)
    if v <= 0:
        raise UsageError(f"weight variance v(c, p) = {v} must be positive")
    sigma = math.sqrt(1 - eta / 2)
    shift = (2 * c - 1) * p * math.sqrt(n) / math.sqrt(v)
    sqrt_eta = math.sqrt(eta)
    norm = 2.0 / (sigma * math.sqrt(2 * math.pi))

    def integrand(t):
        return (norm * math.exp(-0.5 * (t / sigma) ** 2)
                * ndtr(-abs(math.sqrt(2) * t - shift) / sqrt_eta))

    half_width = 10 * sigma  # envelope tail mass ~1e-23 << 1e-12
    kink = shift / math.sqrt(2)
    points = [kink] if -half_width < kink < half_width else None
    value, abserr = integrate.quad(integrand, -half_width, half_width,
                                   points=points, limit=200, epsabs=epsabs / 10)
    if abserr > epsabs:
        raise NumericError(f"quadrature error {abserr:.2e} above target {epsabs:.2e} "
                           f"(n={n}, c={c}, p={p}, eta={eta})")
    return value


# ---------------------------------------------------------------------------
# network tail bounds
# ---------------------------------------------------------------------------

class NetworkTailBounds(NamedTuple):
    stability: float
    continuity: float
    orthogonality: float
    b: float


def orthogonality_constant(a, r_n, n):
    """The output-separation rate constant b for input gap a*n.

    b1 = (1/pi) arccos(sqrt(1-a)) is the second-layer disagreement rate; b
    is the third-layer flip-probability lower bound (the truncated Gaussian
    window integral) divided by the output density r_n/n.
    """
    if not 0 < a < 1:
        raise UsageError(f"need 0 < a < 1, got {a}")
    b1 = math.acos(math.sqrt(1 - a)) / math.pi
    q = float(ndtri(r_n / n))
    sigma = math.sqrt(1 - b1 / 2)
    window = ndtr(-1.0) * (ndtr((q + math.sqrt(b1)) / sigma)
                           - ndtr((q - math.sqrt(b1)) / sigma))
    return float(window / (r_n / n)), b1


def theorem5_tail_bounds(n, r_n, s0, gamma, epsilon, t, z0=1.0, a=0.1,
                         distance=1, log_base=math.e) -> NetworkTailBounds:
    """Tail bounds for the divisive-inhibition network's three properties.

    stability: Pr{| |h(x)| - r_n | / n > epsilon} <= exp(-2n (epsilon - w)^2)
        with half-width w = log(n/r_n) / sqrt(s0 n^(1-gamma)).  The band is
        treated as two-sided; the log base is configurable because the
        statement leaves it open (natural log by default).
    continuity: Pr{d_H(h(x), h(y)) / sqrt(L) >= t mu_n}
        <= exp(-(t ln t - (t-1)) mu_n sqrt(L)) for L = `distance`.
    orthogonality: Pr{d_H(h(x), h(z)) <= (b - epsilon) r_n} <= exp(-2n eps^2),
        with b the derived separation constant for input gap a*n.
    """
    if t < 1:
        raise UsageError(f"need t >= 1, got {t}")
    half_width = math.log(n / r_n, log_base) / math.sqrt(s0 * n ** (1 - gamma))
    if epsilon <= half_width:
        raise UsageError(f"epsilon must exceed the stability half-width "
                         f"{half_width:.6g}, got {epsilon}")
    stability = math.exp(-2 * n * (epsilon - half_width) ** 2)
    mu_n = z0 * r_n * s0 ** -0.25 * n ** (-(1 + gamma) / 4) * math.log(n) ** 2
    continuity = math.exp(-(t * math.log(t) - (t - 1)) * mu_n * math.sqrt(distance))
    orthogonality = math.exp(-2 * n * epsilon ** 2)
    b, _ = orthogonality_constant(a, r_n, n)
    return NetworkTailBounds(stability, continuity, orthogonality, b)


def output_density_estimate(n, c, p, s1):
    """Gaussian estimate Phi(sqrt(n) (1-2c) p s1 / sqrt(v(c, p s1))) of the
    per-neuron firing probability after a layer at threshold c, when the
    input layer fires each neuron independently with probability s1."""
    q = p * s1
    v = trinomial_variance(c, q)
    return float(ndtr(math.sqrt(n) * (1 - 2 * c) * q / math.sqrt(v)))


def selectflip_orthogonality_tail(n, r_n, d, delta):
    """Hypergeometric tail bound e^{-4 r_n (d/n)^2 delta^2} on the output
    distance of select-and-flip falling below (1-delta)(2 r_n / n) d."""
    return math.exp(-4 * r_n * (d / n) ** 2 * delta ** 2)


def selectflip_stability_tail(r_n, delta):
    """Chernoff bound on Binomial(2 r_n, 1/2) leaving ((1-d) r_n, (1+d) r_n)."""
    return 2 * math.exp(-(delta * r_n) ** 2 / r_n)
