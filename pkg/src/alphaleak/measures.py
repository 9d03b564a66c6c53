"""Scalar information measures on finite alphabets.

Covers the Renyi family (entropy, divergence), the Sibson and Arimoto
mutual informations of order alpha with their alpha = 1 and alpha = inf
extensions, f-divergences (KL, Hellinger of order alpha, user-supplied
convex generators), the k_alpha certificate divergence, and the alpha-norm
center of a family of distributions.

All values are computed and returned in nats; `LogBase` converts at the
API boundary only, so there is a single internal unit convention.

Conventions for zero probabilities follow the finite-sum semantics of the
defining expressions: 0^alpha = 0 and zero-weight terms are dropped before
any log transform.  Divergences return +inf when the support condition
fails (for orders > 1, some p(x) > 0 where q(x) = 0).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp, xlogy

from .errors import ValidationError
from .prob import AlphaOrder, Channel, Dist, Joint, as_order, log_alpha_norm

_LN2 = math.log(2.0)


class LogBase(enum.Enum):
    """Output unit for logarithmic quantities; internals are always nats."""

    NATS = "nats"
    BITS = "bits"

    @staticmethod
    def parse(text: str) -> "LogBase":
        try:
            return LogBase(text.strip().lower())
        except ValueError:
            raise ValidationError(f"unknown log base {text!r} (use 'nats' or 'bits')") from None

    def from_nats(self, value: float) -> float:
        return value / _LN2 if self is LogBase.BITS else value


def _require_same_alphabet(p: Dist, q: Dist) -> None:
    if p.alphabet != q.alphabet:
        raise ValidationError("distributions live on different alphabets")


def shannon_entropy(p: np.ndarray) -> float:
    return float(-xlogy(p, p).sum())


def renyi_entropy(dist: Dist, order) -> float:
    """Renyi entropy of the given order, in nats.

    (1/(1-alpha)) log sum p^alpha for finite alpha != 1; Shannon entropy at
    alpha = 1; min-entropy -log max p at alpha = inf.
    """
    order = as_order(order)
    p = dist.p
    if order.is_one:
        return shannon_entropy(p)
    if order.is_inf:
        return float(-np.log(p.max()))
    a = order.value
    return a / (1.0 - a) * log_alpha_norm(p, order)


def renyi_divergence(p: Dist, q: Dist, order) -> float:
    """Renyi divergence D_alpha(p || q) in nats; +inf on support violation."""
    order = as_order(order)
    _require_same_alphabet(p, q)
    pv, qv = p.p, q.p
    sup = pv > 0
    if order.is_one:
        if np.any(sup & (qv == 0)):
            return math.inf
        return float((pv[sup] * (np.log(pv[sup]) - np.log(qv[sup]))).sum())
    if order.is_inf:
        if np.any(sup & (qv == 0)):
            return math.inf
        return float(np.log(np.max(pv[sup] / qv[sup])))
    a = order.value
    if a > 1.0 and np.any(sup & (qv == 0)):
        return math.inf
    both = sup & (qv > 0)
    if not np.any(both):
        return math.inf
    log_terms = a * np.log(pv[both]) + (1.0 - a) * np.log(qv[both])
    return float(logsumexp(log_terms) / (a - 1.0))


def _shannon_mi_from_joint(m: np.ndarray) -> float:
    px = m.sum(axis=1)
    py = m.sum(axis=0)
    mask = m > 0
    ratio = m[mask] / (np.outer(px, py)[mask])
    return float((m[mask] * np.log(ratio)).sum())


def sibson_mi(prior: Dist, channel: Channel, order) -> float:
    """Sibson mutual information of order alpha between the channel input
    (distributed as `prior`) and its output.

    For finite alpha != 1 this is the closed form
    (alpha/(alpha-1)) log sum_y (sum_x P(x) W(y|x)^alpha)^(1/alpha),
    which equals inf_Q D_alpha(P_XY || P_X x Q).  alpha = 1 gives Shannon
    mutual information and alpha = inf gives log sum_y max_x W(y|x) with
    the max restricted to the prior's support.
    """
    order = as_order(order)
    if channel.input_alphabet != prior.alphabet:
        raise ValidationError("channel input alphabet does not match prior alphabet")
    W = channel.rows
    px = prior.p
    support = px > 0
    if order.is_one:
        return _shannon_mi_from_joint(px[:, None] * W)
    if order.is_inf:
        return float(np.log(W[support].max(axis=0).sum()))
    a = order.value
    logW = np.full_like(W, -np.inf)
    np.log(W, out=logW, where=W > 0)
    logpx = np.log(px[support])
    # log A(y) = logsumexp_x (log P(x) + alpha log W(y|x)) over the support
    log_a = logsumexp(logpx[:, None] + a * logW[support], axis=0)
    finite = log_a > -np.inf
    return float(a / (a - 1.0) * logsumexp(log_a[finite] / a))


def arimoto_cond_entropy(joint: Joint, order) -> float:
    """Arimoto conditional entropy of the row variable given the column
    variable: (alpha/(1-alpha)) log sum_y ||P_XY(., y)||_alpha.

    At alpha = inf this evaluates to -log sum_y max_x P(x, y), so that
    exp(-H) is the MAP probability of correctly guessing the row variable.
    """
    order = as_order(order)
    m = joint.m
    if order.is_one:
        py = m.sum(axis=0)
        return float(shannon_entropy(m.ravel()) - shannon_entropy(py))
    if order.is_inf:
        return float(-np.log(m.max(axis=0).sum()))
    a = order.value
    col_log_norms = np.array([log_alpha_norm(m[:, y], order) for y in range(m.shape[1])])
    finite = col_log_norms > -np.inf
    return float(a / (1.0 - a) * logsumexp(col_log_norms[finite]))


def arimoto_mi(joint: Joint, order) -> float:
    """Arimoto mutual information: H_alpha(X) - H^A_alpha(X|Y)."""
    order = as_order(order)
    if order.is_one:
        return _shannon_mi_from_joint(joint.m)
    if order.is_inf:
        px_max = joint.m.sum(axis=1).max()
        return float(np.log(joint.m.max(axis=0).sum()) - np.log(px_max))
    return renyi_entropy(joint.row_marginal(), order) - arimoto_cond_entropy(joint, order)


# --------------------------------------------------------------------------
# f-divergences


_CONVEXITY_PROBES = 10_000
_CONVEXITY_SEED = 20240817


@dataclass(frozen=True)
class FGenerator:
    """Convex generator f with f(1) = 0 defining an f-divergence.

    `f_at_zero` is f(0) and `slope_at_inf` is lim_{t->inf} f(t)/t; both
    enter the hard-distortion PUT formulas and the q = 0 boundary terms of
    the divergence itself, and cannot be recovered from an evaluator, so
    custom generators must state them explicitly.
    """

    kind: str  # "kl" | "hellinger" | "custom"
    alpha: float | None
    f_at_zero: float
    slope_at_inf: float
    label: str
    _fn: Callable[[float], float] | None = None

    def f(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "kl":
            out = xlogy(t, t)
        elif self.kind == "hellinger":
            a = self.alpha
            out = (np.power(t, a) - 1.0) / (a - 1.0)
        else:
            out = np.vectorize(self._fn, otypes=[float])(t)
            out = np.where(t == 0.0, self.f_at_zero, out)
        return out if out.ndim else float(out)

    def fprime(self, t):
        """Derivative of f on t > 0 (central difference for custom f)."""
        t = np.asarray(t, dtype=float)
        if self.kind == "kl":
            out = np.log(t) + 1.0
        elif self.kind == "hellinger":
            a = self.alpha
            out = a * np.power(t, a - 1.0) / (a - 1.0)
        else:
            h = np.maximum(1e-7 * np.abs(t), 1e-9)
            out = (self.f(t + h) - self.f(np.maximum(t - h, 0.0))) / (h + np.minimum(t, h))
        return out if out.ndim else float(out)


def kl_generator() -> FGenerator:
    """f(t) = t log t; its f-divergence is Kullback-Leibler."""
    return FGenerator(kind="kl", alpha=None, f_at_zero=0.0, slope_at_inf=math.inf, label="kl")


def hellinger_generator(alpha: float) -> FGenerator:
    """f_alpha(t) = (t^alpha - 1)/(alpha - 1), the Hellinger divergence of
    order alpha > 1."""
    alpha = float(alpha)
    if not alpha > 1.0:
        raise ValidationError(f"Hellinger generator requires alpha > 1, got {alpha}")
    return FGenerator(
        kind="hellinger",
        alpha=alpha,
        f_at_zero=-1.0 / (alpha - 1.0),
        slope_at_inf=math.inf,
        label=f"hellinger({alpha:g})",
    )


def custom_generator(
    fn: Callable[[float], float],
    f_at_zero: float,
    slope_at_inf: float,
    label: str = "custom",
) -> FGenerator:
    """Wrap a user-supplied convex f with f(1) = 0.

    Convexity is not machine-checkable from an evaluator; construction runs
    10^4 seeded random chord probes on [0, 1e4] and rejects any violation
    beyond 1e-9 (relative to the chord scale).
    """
    if abs(fn(1.0)) > 1e-12:
        raise ValidationError(f"generator must satisfy f(1) = 0, got f(1) = {fn(1.0)!r}")
    rng = np.random.default_rng(_CONVEXITY_SEED)
    t1 = np.concatenate([rng.uniform(0.0, 2.0, _CONVEXITY_PROBES // 2),
                         np.exp(rng.uniform(np.log(1e-4), np.log(1e4), _CONVEXITY_PROBES // 2))])
    t2 = np.concatenate([rng.uniform(0.0, 2.0, _CONVEXITY_PROBES // 2),
                         np.exp(rng.uniform(np.log(1e-4), np.log(1e4), _CONVEXITY_PROBES // 2))])
    lam = rng.uniform(0.0, 1.0, _CONVEXITY_PROBES)
    fv = np.vectorize(fn, otypes=[float])
    chord = lam * fv(t1) + (1.0 - lam) * fv(t2)
    mid = fv(lam * t1 + (1.0 - lam) * t2)
    scale = np.maximum(1.0, np.abs(chord))
    if np.any(mid - chord > 1e-9 * scale):
        raise ValidationError("custom generator failed random convexity probes")
    return FGenerator(
        kind="custom",
        alpha=None,
        f_at_zero=float(f_at_zero),
        slope_at_inf=float(slope_at_inf),
        label=label,
        _fn=fn,
    )


def f_divergence(p: Dist, q: Dist, gen: FGenerator) -> float:
    """D_f(p || q) = sum_{q(y)>0} q(y) f(p(y)/q(y)) + p(q = 0) * lim f(t)/t."""
    _require_same_alphabet(p, q)
    pv, qv = p.p, q.p
    pos = qv > 0
    if gen.kind == "kl":
        val = float(xlogy(pv[pos], pv[pos] / qv[pos]).sum())
    elif gen.kind == "hellinger":
        a = gen.alpha
        ppos = pv[pos]
        terms = np.zeros_like(ppos)
        nz = ppos > 0
        terms[nz] = np.exp(a * np.log(ppos[nz]) + (1.0 - a) * np.log(qv[pos][nz]))
        val = float((terms.sum() - 1.0) / (a - 1.0))
    else:
        val = float((qv[pos] * gen.f(pv[pos] / qv[pos])).sum())
    escaped = float(pv[~pos].sum())
    if escaped > 0.0:
        val = val + escaped * gen.slope_at_inf if math.isfinite(gen.slope_at_inf) else math.inf
    return val


def k_alpha(p: Dist, q: Dist, alpha: float) -> float:
    """The certificate divergence k_alpha(p || q) = sum_y q(y) (p(y)/q(y))^alpha.

    Always >= 1 for alpha > 1, with equality iff p = q; returns +inf when p
    puts mass where q does not.
    """
    alpha = float(alpha)
    if not alpha > 1.0:
        raise ValidationError(f"k_alpha requires alpha > 1, got {alpha}")
    _require_same_alphabet(p, q)
    pv, qv = p.p, q.p
    if np.any((pv > 0) & (qv == 0)):
        return math.inf
    both = (pv > 0) & (qv > 0)
    if not np.any(both):
        return 0.0
    return float(np.exp(logsumexp(alpha * np.log(pv[both]) + (1.0 - alpha) * np.log(qv[both]))))


def alpha_norm_center(components: Sequence[Dist], alpha: float) -> tuple[Dist, float]:
    """Center of a family of distributions under k_alpha.

    Returns (P_c, Z) with P_c(y) = (sum_k P_k(y)^alpha)^(1/alpha) / Z and Z
    the normalizer; P_c uniquely minimizes sum_k k_alpha(P_k || .) and the
    attained minimum equals Z^alpha.
    """
    alpha = float(alpha)
    if not alpha > 1.0:
        raise ValidationError(f"alpha_norm_center requires alpha > 1, got {alpha}")
    if not components:
        raise ValidationError("alpha_norm_center requires a nonempty family")
    alphabet = components[0].alphabet
    for comp in components[1:]:
        if comp.alphabet != alphabet:
            raise ValidationError("components live on different alphabets")
    stack = np.stack([c.p for c in components])  # K x n
    col_lognorms = np.array(
        [log_alpha_norm(stack[:, y], alpha) for y in range(stack.shape[1])]
    )
    log_z = logsumexp(col_lognorms[col_lognorms > -np.inf])
    pc = np.exp(col_lognorms - log_z)
    pc[col_lognorms == -np.inf] = 0.0
    pc = pc / pc.sum()
    return Dist(alphabet, pc), float(np.exp(log_z))
