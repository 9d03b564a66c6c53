"""Tunable leakage measures and the order-alpha capacity solver.

The adversary model: a guess of X from Y is scored by the alpha-loss
(alpha/(alpha-1)) (1 - p^((alpha-1)/alpha)) of the probability p assigned
to the truth; log-loss at alpha = 1, probability of error at alpha = inf.
The induced leakage of a joint equals the Arimoto mutual information; the
leakage maximized over every function of X equals, for alpha > 1, the
order-alpha channel capacity sup_P I^S_alpha(P, W), which this module
solves with a certified multiplicative-update ascent.

Leakage operations require alpha >= 1 (orders below 1 have no loss
interpretation here and are rejected); the raw information measures in
`measures` accept orders in (0, 1) as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import ConvergenceError, ValidationError
from .measures import (
    FGenerator,
    arimoto_cond_entropy,
    arimoto_mi,
    f_divergence,
    renyi_divergence,
    sibson_mi,
    _shannon_mi_from_joint,
)
from .prob import (
    Alphabet,
    AlphaOrder,
    Channel,
    Dist,
    Joint,
    as_order,
    binary_channel,
    conditional_of,
    log_alpha_norm,
    make_joint,
)

SUPPORT_PRUNE = 1e-14


@dataclass(frozen=True)
class CapacityResult:
    """Certified solution of sup over input distributions of the Sibson
    mutual information of order alpha.

    `kkt_residual` is the equalization gap of the per-input certificate
    quantities g_x = sum_y W(y|x)^alpha Q*(y)^(1-alpha), normalized by
    their input-weighted average so the tolerance is meaningful at every
    alpha: at the optimum the normalized g_x are 1 on the support of the
    optimal input and at most 1 elsewhere.
    """

    value: float
    optimal_input: Dist
    target_output: Dist
    kkt_residual: float
    iterations: int


@dataclass(frozen=True)
class StrategyResult:
    strategy: Channel
    expected_loss: float


def alpha_loss(prob_correct: float, order) -> float:
    """Loss of assigning probability `prob_correct` to the true symbol."""
    order = as_order(order).require_at_least_one("alpha_loss")
    p = float(prob_correct)
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"probability of correct guess must be in [0, 1], got {p}")
    if order.is_one:
        return -math.log(p) if p > 0 else math.inf
    if order.is_inf:
        return 1.0 - p
    a = order.value
    return a / (a - 1.0) * (1.0 - p ** ((a - 1.0) / a))


def tilted_row(row: np.ndarray, order: AlphaOrder) -> np.ndarray:
    """Row of the loss-minimizing estimation strategy for posterior `row`."""
    if order.is_one:
        return row.copy()
    if order.is_inf:
        best = row == row.max()
        return best / best.sum()
    logs = np.full_like(row, -np.inf)
    np.log(row, out=logs, where=row > 0)
    logs *= order.value
    out = np.exp(logs - logsumexp(logs))
    return out / out.sum()


def optimal_strategy(posterior_channel: Channel, order) -> Channel:
    """Best estimation strategy against the alpha-loss.

    Rows of `posterior_channel` must be the true posteriors P(x | y); the
    optimal strategy tilts each one proportionally to its alpha-th power.
    At alpha = 1 the posterior itself is optimal; at alpha = inf the MAP
    rule, splitting ties uniformly over the argmax set.
    """
    order = as_order(order).require_at_least_one("optimal_strategy")
    rows = np.stack([tilted_row(r, order) for r in posterior_channel.rows])
    return Channel(posterior_channel.input_alphabet, posterior_channel.output_alphabet, rows)


def min_expected_alpha_loss(joint: Joint, order) -> float:
    """Minimal expected alpha-loss of guessing the row variable from the
    column variable; attained by the tilted-posterior strategy."""
    order = as_order(order).require_at_least_one("min_expected_alpha_loss")
    if order.is_one:
        return arimoto_cond_entropy(joint, order)
    if order.is_inf:
        return 1.0 - float(joint.m.max(axis=0).sum())
    a = order.value
    h = arimoto_cond_entropy(joint, order)
    return float(a / (a - 1.0) * -np.expm1((1.0 - a) / a * h))


def strategy_for(joint: Joint, order) -> StrategyResult:
    """Optimal strategy for a joint, bundled with its expected loss."""
    posterior = conditional_of(joint.swapped()).conditional
    return StrategyResult(
        strategy=optimal_strategy(posterior, order),
        expected_loss=min_expected_alpha_loss(joint, order),
    )


def alpha_leakage(joint: Joint, order) -> float:
    """Leakage about the row variable from observing the column variable:
    the multiplicative gain in alpha-loss performance, which equals the
    Arimoto mutual information of order alpha."""
    order = as_order(order).require_at_least_one("alpha_leakage")
    return arimoto_mi(joint, order)


def maximal_leakage(channel: Channel) -> float:
    """log of the sum over outputs of the column-wise channel maximum; the
    alpha = inf end of the maximal alpha-leakage family."""
    return float(np.log(channel.rows.max(axis=0).sum()))


def _log_rows(W: np.ndarray) -> np.ndarray:
    out = np.full_like(W, -np.inf)
    np.log(W, out=out, where=W > 0)
    return out


def _lse(a: np.ndarray, axis: int | None = None):
    """Max-factored logsumexp. scipy's has per-call overhead that dominates
    the capacity solver's inner loop on small alphabets."""
    m = np.max(a, axis=axis, keepdims=True)
    shift = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(invalid="ignore"):
        out = np.log(np.exp(a - shift).sum(axis=axis, keepdims=True)) + shift
    out = np.where(np.isfinite(m), out, m)
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


def maximal_alpha_leakage(
    channel: Channel,
    order,
    prior_for_one: Dist | None = None,
    tol: float = 1e-10,
    max_iter: int = 100_000,
) -> CapacityResult:
    """Maximal alpha-leakage of a channel.

    alpha > 1: the order-alpha capacity sup_P I^S_alpha(P, W), found by
    maximizing the concave F(P) = sum_y (sum_x P(x) W(y|x)^alpha)^(1/alpha)
    with multiplicative updates proportional to exp(D_alpha(W_x || Q)),
    halving the step on non-improvement.  The returned certificate is the
    g_x-equalization residual (see CapacityResult); non-convergence after
    `max_iter` returns the best iterate with the residual left above `tol`
    rather than raising.

    alpha = 1: Shannon mutual information at `prior_for_one`, which is
    required (the alpha = 1 value depends on the actual input law, not
    just its support).  alpha = inf: closed form log sum_y max_x W(y|x).

    Inputs with mass below 1e-14 after convergence are zeroed and the
    distribution renormalized before the final certificate evaluation,
    since multiplicative updates approach the boundary without reaching it.
    """
    order = as_order(order).require_at_least_one("maximal_alpha_leakage")
    in_alpha, out_alpha = channel.input_alphabet, channel.output_alphabet
    W = channel.rows

    if order.is_one:
        if prior_for_one is None:
            raise ValidationError("maximal alpha-leakage at alpha = 1 needs an input distribution")
        if prior_for_one.alphabet != in_alpha:
            raise ValidationError("prior alphabet does not match channel input alphabet")
        value = _shannon_mi_from_joint(prior_for_one.p[:, None] * W)
        q = prior_for_one.p @ W
        return CapacityResult(value, prior_for_one, Dist(out_alpha, q / q.sum()), 0.0, 0)

    if order.is_inf:
        colmax = W.max(axis=0)
        value = float(np.log(colmax.sum()))
        return CapacityResult(
            value,
            Dist.uniform(in_alpha),
            Dist(out_alpha, colmax / colmax.sum()),
            0.0,
            0,
        )

    a = order.value
    n_in = len(in_alpha)
    # Outputs no input can reach contribute nothing; drop them so the
    # certificate arithmetic never mixes -inf powers of Q with -inf of W.
    reachable = W.sum(axis=0) > 0
    log_wa = a * _log_rows(W[:, reachable])
    logp = np.full(n_in, -math.log(n_in))
    step0 = 1.0 / (a - 1.0)
    mass_floor = max(tol, 1e-12)
    active_cut = 1e-8
    newton_from = 1e-3

    def stats(logp):
        log_ay = _lse(logp[:, None] + log_wa, axis=0)
        log_f = _lse(log_ay / a)
        log_q = log_ay / a - log_f
        log_g = _lse(log_wa + (1.0 - a) * log_q[None, :], axis=1)
        return log_f, log_q, log_g

    def normalized_g(logp, log_g):
        live = logp > -np.inf
        log_avg = _lse(logp[live] + log_g[live])
        return np.exp(log_g - log_avg)

    def cert_residual(logp, g_norm):
        return float(g_norm.max() - g_norm[np.exp(logp) > mass_floor].min())

    log_f, log_q, log_g = stats(logp)
    residual = math.inf
    iterations = 0
    step = step0
    for iterations in range(1, max_iter + 1):
        p = np.exp(logp)
        g_norm = normalized_g(logp, log_g)
        residual = cert_residual(logp, g_norm)
        if residual <= tol:
            break

        active = p > active_cut
        spread = float(g_norm[active].max() - g_norm[active].min())

        # A pruned input whose certificate value exceeds the support level
        # must carry mass after all; reintroduce it (wrong prunes are rare
        # but would otherwise block the certificate forever).
        dead = p == 0.0
        if np.any(dead) and g_norm[dead].max() > 1.0 + max(spread, tol):
            logp[dead & (g_norm > 1.0 + max(spread, tol))] = math.log(1e-3)
            logp = logp - _lse(logp)
            log_f, log_q, log_g = stats(logp)
            continue

        # Hard prune: a tiny mass whose certificate value is strictly
        # dominated belongs off-support; multiplicative decay alone would
        # take it below the certificate floor only geometrically slowly.
        dying = (~active) & (p > 0.0) & (g_norm < 1.0 - 4.0 * max(spread, tol))
        if spread <= newton_from and np.any(dying):
            cand = logp.copy()
            cand[dying] = -np.inf
            cand -= _lse(cand)
            cand_stats = stats(cand)
            cand_gn = normalized_g(cand, cand_stats[2])
            if cert_residual(cand, cand_gn) <= residual:
                logp, (log_f, log_q, log_g) = cand, cand_stats
                continue

        # Terminal phase: Newton on the g-equalization system over the
        # active inputs.  The ascent's F comparisons bottom out at float
        # resolution well above a 1e-10 certificate; Newton, accepted on
        # residual decrease, converges quadratically from spread ~ 1e-3.
        if spread <= newton_from and active.sum() > 1:
            sidx = np.flatnonzero(active)
            r0 = np.log(g_norm[sidx])
            jac = np.empty((len(sidx), len(sidx)))
            fd = 1e-7
            for j, xj in enumerate(sidx):
                pert = logp.copy()
                pert[xj] += fd
                pert -= _lse(pert)
                _, _, pert_g = stats(pert)
                jac[:, j] = (np.log(normalized_g(pert, pert_g)[sidx]) - r0) / fd
            delta, *_ = np.linalg.lstsq(jac, -r0, rcond=None)
            metric = float(g_norm.max() - g_norm[sidx].min())
            scale = 1.0
            accepted = False
            for _ in range(20):
                cand = logp.copy()
                cand[sidx] += scale * delta
                cand -= _lse(cand)
                cand_stats = stats(cand)
                cand_gn = normalized_g(cand, cand_stats[2])
                if float(cand_gn.max() - cand_gn[sidx].min()) < metric:
                    logp, (log_f, log_q, log_g) = cand, cand_stats
                    accepted = True
                    break
                scale *= 0.5
            if accepted:
                continue

        # Multiplicative ascent step, halving on non-improvement of F.
        for _ in range(60):
            cand = logp + step * (log_g - log_g.max())
            cand -= _lse(cand)
            cand_f, cand_q, cand_g = stats(cand)
            if cand_f >= log_f - 1e-15:
                break
            step *= 0.5
        logp, log_f, log_q, log_g = cand, cand_f, cand_q, cand_g
        step = min(step * 1.5, 64.0 * step0)

    p = np.exp(logp - _lse(logp))
    p[p < SUPPORT_PRUNE] = 0.0
    p /= p.sum()
    with np.errstate(divide="ignore"):
        logp = np.log(p)
    log_f, log_q, log_g = stats(logp)
    g_norm = normalized_g(logp, log_g)
    residual = cert_residual(logp, g_norm)
    value = float(a / (a - 1.0) * log_f)
    q_full = np.zeros(len(out_alpha))
    q_full[reachable] = np.exp(log_q)
    return CapacityResult(
        value,
        Dist(in_alpha, p),
        Dist(out_alpha, q_full / q_full.sum()),
        residual,
        iterations,
    )


def _log_abs_pow_diff(x: float, y: float, a: float) -> tuple[float, float]:
    """(log |x^a - y^a|, relative gap |1 - (min/max)^a|) computed in logs."""
    hi, lo = (x, y) if x >= y else (y, x)
    if hi <= 0.0:
        return -math.inf, 0.0
    if lo <= 0.0:
        return a * math.log(hi), 1.0
    rel = -math.expm1(a * (math.log(lo) - math.log(hi)))
    if rel <= 0.0:
        return -math.inf, 0.0
    return a * math.log(hi) + math.log(rel), rel


def binary_maximal_alpha_leakage(rho1: float, rho2: float, alpha: float) -> float:
    """Closed-form maximal alpha-leakage of the 2x2 channel with crossover
    probabilities (rho1, rho2), for alpha > 1.

    Near the rank-one locus rho1 + rho2 = 1 the closed form degenerates
    (the absolute differences it is built from vanish); such inputs are
    routed to the capacity solver instead.
    """
    alpha = float(alpha)
    if not alpha > 1.0:
        raise ValidationError(f"binary closed form requires alpha > 1, got {alpha}")
    if not (0.0 <= rho1 <= 1.0 and 0.0 <= rho2 <= 1.0):
        raise ValidationError("crossover probabilities must lie in [0, 1]")
    lm, rel_m = _log_abs_pow_diff((1.0 - rho1) * (1.0 - rho2), rho1 * rho2, alpha)
    lb1, rel_1 = _log_abs_pow_diff(1.0 - rho2, rho1, alpha)
    lb2, rel_2 = _log_abs_pow_diff(1.0 - rho1, rho2, alpha)
    if min(rel_m, rel_1, rel_2) < 1e-12:
        return maximal_alpha_leakage(binary_channel(rho1, rho2), alpha).value
    return lm / (alpha - 1.0) + float(logsumexp(np.array([lb1, lb2]) / (1.0 - alpha)))


def capacity_lower_bound(channel: Channel, alpha: float) -> tuple[float, bool]:
    """Closed-form lower bound on the maximal alpha-leakage:
    (alpha/(alpha-1)) log( sum_y ||W(y|.)||_alpha / |X|^(1/alpha) ).

    The second return value reports whether the equalization condition for
    the bound to be tight holds: the per-input sums
    sum_y W(y|x)^alpha / ||W(y|.)||_alpha^(alpha-1) must agree across x
    (checked to 1e-9 after normalizing by their mean).  True implies the
    bound matches the capacity; False asserts nothing.
    """
    alpha = float(alpha)
    if not alpha > 1.0:
        raise ValidationError(f"capacity lower bound requires alpha > 1, got {alpha}")
    W = channel.rows
    n_in = W.shape[0]
    col_lognorm = np.array([log_alpha_norm(W[:, y], alpha) for y in range(W.shape[1])])
    finite = col_lognorm > -np.inf
    lsum = float(logsumexp(col_lognorm[finite]))
    bound = alpha / (alpha - 1.0) * (lsum - math.log(n_in) / alpha)
    log_w = _log_rows(W)
    log_c = logsumexp(
        alpha * log_w[:, finite] - (alpha - 1.0) * col_lognorm[finite][None, :], axis=1
    )
    c_norm = np.exp(log_c - logsumexp(log_c) + math.log(n_in))
    holds = bool(c_norm.max() - c_norm.min() <= 1e-9)
    return float(bound), holds


# --------------------------------------------------------------------------
# f-leakage


def _min_fdiv_over_reference(
    px: np.ndarray, W: np.ndarray, gen: FGenerator, tol: float, max_iter: int
) -> tuple[float, np.ndarray]:
    """Minimize sum_x px[x] D_f(W_x || Q) over output distributions Q.

    Convex in Q; solved by mirror descent with multiplicative updates.  The
    stationarity certificate is the gap between the largest in-support
    directional derivative and the smallest one anywhere (zero exactly at
    KKT points of the simplex-constrained minimum).
    """
    n_out = W.shape[1]
    q = np.full(n_out, 1.0 / n_out)
    support = px > 0

    def objective(q):
        ratios = W[support] / q[None, :]
        per_x = (q[None, :] * gen.f(ratios)).sum(axis=1)
        return float(px[support] @ per_x)

    def gradient(q):
        ratios = W[support] / q[None, :]
        contrib = gen.f(ratios) - ratios * gen.fprime(np.maximum(ratios, 1e-300))
        return px[support] @ contrib

    val = objective(q)
    for iteration in range(1, max_iter + 1):
        grad = gradient(q)
        lam = float(q @ grad)
        scale = max(1.0, float(np.abs(grad).max()))
        residual = float(grad[q > max(tol, 1e-12)].max() - grad.min()) / scale
        if residual <= tol:
            return val, q
        eta = 1.0
        for _ in range(60):
            cand = q * np.exp(-eta * (grad - lam) / scale)
            cand /= cand.sum()
            cand_val = objective(cand)
            if cand_val <= val + 1e-15:
                break
            eta *= 0.5
        q, val = cand, cand_val
    raise ConvergenceError(
        "reference-distribution minimization did not reach tolerance",
        residual=residual,
        iterations=max_iter,
    )


def f_leakage(joint: Joint, gen: FGenerator, tol: float = 1e-10, max_iter: int = 50_000) -> tuple[float, Dist]:
    """Leakage of a joint under an f-divergence:
    inf_Q D_f(P_XY || P_X x Q), returned with the minimizing Q.

    The KL generator short-circuits to Shannon mutual information with the
    output marginal as minimizer; Hellinger of order alpha short-circuits
    through the Sibson closed form and the monotone bijection between the
    two divergences.  Custom generators run the mirror-descent minimizer.
    """
    prior, channel, _ = conditional_of(joint)
    out_alpha = joint.col_alphabet
    if gen.kind == "kl":
        return _shannon_mi_from_joint(joint.m), joint.col_marginal()
    if gen.kind == "hellinger":
        a = gen.alpha
        i_sibson = sibson_mi(prior, channel, a)
        value = float(np.expm1((a - 1.0) * i_sibson) / (a - 1.0))
        log_wa = a * _log_rows(channel.rows)
        sup = prior.p > 0
        log_ay = logsumexp(np.log(prior.p[sup])[:, None] + log_wa[sup], axis=0)
        log_q = log_ay / a - logsumexp(log_ay / a)
        q = np.exp(log_q)
        return value, Dist(out_alpha, q / q.sum())
    value, q = _min_fdiv_over_reference(prior.p, channel.rows, gen, tol, max_iter)
    return value, Dist(out_alpha, q)


def maximal_f_leakage(
    channel: Channel, gen: FGenerator, tol: float = 1e-9, max_iter: int = 50_000
) -> float:
    """Maximal f-leakage sup_P inf_Q D_f(W P || P x Q) of a channel.

    Hellinger of order alpha is exact: it is the image of the maximal
    alpha-leakage under z -> (exp((alpha-1) z) - 1)/(alpha-1).  KL and
    custom generators run an ascent on the concave value function
    phi(P) = inf_Q sum_x P(x) D_f(W_x || Q), whose supergradient at P is
    the vector of divergences at the inner minimizer; the certificate is
    the standard saddle gap max_x g_x - sum_x P(x) g_x.
    """
    if gen.kind == "hellinger":
        a = gen.alpha
        cap = maximal_alpha_leakage(channel, a, tol=min(tol, 1e-10))
        return float(np.expm1((a - 1.0) * cap.value) / (a - 1.0))

    W = channel.rows
    n_in = W.shape[0]
    log_w = _log_rows(W)
    p = np.full(n_in, 1.0 / n_in)

    def inner(p):
        if gen.kind == "kl":
            q = p @ W
            q = q / q.sum()
            with np.errstate(invalid="ignore"):
                g = np.where(W > 0, W * (log_w - np.log(q)[None, :]), 0.0).sum(axis=1)
            return q, g
        _, q = _min_fdiv_over_reference(p, W, gen, tol / 10.0, max_iter)
        ratios = W / q[None, :]
        g = (q[None, :] * gen.f(ratios)).sum(axis=1)
        return q, g

    best = -math.inf
    for iteration in range(1, max_iter + 1):
        _, g = inner(p)
        lower = float(p @ g)
        best = max(best, lower)
        gap = float(g.max() - lower)
        if gap <= tol * max(1.0, abs(lower)):
            return lower
        scale = max(1.0, float(np.abs(g).max()))
        p = p * np.exp((g - g.max()) / scale)
        p /= p.sum()
    raise ConvergenceError(
        "input-distribution ascent did not close the saddle gap",
        residual=gap,
        iterations=max_iter,
    )
