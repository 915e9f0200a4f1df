"""The Gaussian achievable scheme: distortions, marginal parameters, rates.

A scheme is a choice of description noises W with per-encoder covariance
[[w_k1, -a_k], [-a_k, w_k2]].  This module evaluates its three distortions,
the per-encoder marginal parameters

    d'_kl = Var(X_k | U_kl, S) = n_k * w_kl / (n_k + w_kl)
    t'_k  = I(X_k; U_k1, U_k2 | S)
          = 1/2 log [n_k (w_k1 + w_k2 + 2 a_k) + w_k1 w_k2 - a_k^2] / [w_k1 w_k2 - a_k^2]

(with n_k the observation-noise variance), the two-term sum-rate objective

    I(X1, X2; U11, U12, U21, U22) + I(U11, U21; U12, U22),

the explicit slack-delta rate tuple for the four links, and a multistart
derivative-free minimisation of the sum rate under distortion constraints.

Zero-variance and infinite-variance descriptions are honoured as exact
limits in the closed forms; ``t' = inf`` is the flagged sentinel for a
degenerate joint description (w_k1 * w_k2 = a_k^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
import scipy.optimize

from .errors import InfeasibleTargetsError, InvalidParamsError, VceoError
from .gaussmodel import SourceModel, build_joint_cov, conditional_mi, gaussian_mi

__all__ = [
    "SchemeParams",
    "DistortionTriple",
    "MarginalParams",
    "RateBreakdown",
    "OptimizeOptions",
    "OptimizeResult",
    "full_mmse",
    "receiver_distortion",
    "central_distortion",
    "marginal_params",
    "sum_rate",
    "rate_tuple",
    "optimize_sum_rate",
]

#: Multiplier of sigma_nk2 used as the numerical "description absent" cap.
W_CAP_FACTOR = 1e8


@dataclass(frozen=True)
class SchemeParams:
    """Degrees of freedom of the scheme: four W variances and two anticorrelations.

    Invariant: w_k1 * w_k2 >= a_k^2 (the W covariance must be PSD) and a_k >= 0.
    """

    w11: float
    w12: float
    w21: float
    w22: float
    a1: float = 0.0
    a2: float = 0.0

    def __post_init__(self) -> None:
        for name in ("w11", "w12", "w21", "w22", "a1", "a2"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise InvalidParamsError(f"{name} must be finite, got {v!r}")
            if v < 0:
                raise InvalidParamsError(f"{name} must be >= 0, got {v!r}")
            object.__setattr__(self, name, float(v))
        for k in (1, 2):
            w1, w2, a = self.encoder(k)
            if a * a > w1 * w2 * (1.0 + 1e-12) + 1e-300:
                raise InvalidParamsError(
                    f"encoder {k}: a_{k}^2 = {a * a:.6g} exceeds w_{k}1 * w_{k}2 = {w1 * w2:.6g}"
                )

    def encoder(self, k: int) -> tuple[float, float, float]:
        """(w_k1, w_k2, a_k) of encoder ``k``."""
        if k == 1:
            return self.w11, self.w12, self.a1
        if k == 2:
            return self.w21, self.w22, self.a2
        raise InvalidParamsError(f"encoder index must be 1 or 2, got {k!r}")


@dataclass(frozen=True)
class DistortionTriple:
    """Targets for the two individual receivers and the central receiver.

    Invariant: 0 < d0 < min(d1, d2); validity against a model additionally
    requires max(d1, d2) < sigma_s2 (see ``valid_for``).
    """

    d1: float
    d2: float
    d0: float

    def __post_init__(self) -> None:
        for name in ("d1", "d2", "d0"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InvalidParamsError(f"{name} must be a finite positive number, got {v!r}")
            object.__setattr__(self, name, float(v))
        if not self.d0 < min(self.d1, self.d2):
            raise InvalidParamsError(
                f"central target d0 = {self.d0} must be strictly below "
                f"min(d1, d2) = {min(self.d1, self.d2)}"
            )

    def valid_for(self, model: SourceModel) -> bool:
        return max(self.d1, self.d2) < model.sigma_s2

    def receiver(self, l: int) -> float:
        if l == 1:
            return self.d1
        if l == 2:
            return self.d2
        raise InvalidParamsError(f"receiver index must be 1 or 2, got {l!r}")


class MarginalParams(NamedTuple):
    """Per-description conditional variances and per-encoder conditional informations."""

    d11: float
    d12: float
    d21: float
    d22: float
    t1: float
    t2: float


@dataclass(frozen=True)
class RateBreakdown:
    """Sum rate with its two information terms and (optionally) per-link rates.

    ``sum_rate = term_mi_joint + term_mi_cross`` always; the pre-binning rates
    ``rp_kl`` and link rates ``r_kl`` are populated by ``rate_tuple`` only, in
    which case the four link rates sum to ``sum_rate + slack``.
    """

    sum_rate: float
    term_mi_joint: float
    term_mi_cross: float
    r11: float | None = None
    r12: float | None = None
    r21: float | None = None
    r22: float | None = None
    rp11: float | None = None
    rp12: float | None = None
    rp21: float | None = None
    rp22: float | None = None
    slack: float | None = None

    def link_rates(self) -> tuple[float, float, float, float]:
        if self.r11 is None:
            raise InvalidParamsError("per-link rates were not requested; use rate_tuple")
        return self.r11, self.r12, self.r21, self.r22  # type: ignore[return-value]


def require_valid_targets(model: SourceModel, targets: DistortionTriple) -> None:
    if not targets.valid_for(model):
        raise InvalidParamsError(
            f"max(d1, d2) = {max(targets.d1, targets.d2)} must be strictly "
            f"below sigma_s2 = {model.sigma_s2}"
        )


def full_mmse(model: SourceModel) -> float:
    """Var(S | X1, X2): the distortion floor once both observations are exhausted."""
    return 1.0 / (1.0 / model.sigma_s2 + 1.0 / model.sigma_n1_2 + 1.0 / model.sigma_n2_2)


def _marginal_d(noise_var: float, w: float) -> float:
    """Var(X | U, S) for U = X + W: the parallel combination of noise and W."""
    if math.isinf(w):
        return noise_var
    if w == 0.0:
        return 0.0
    return noise_var * w / (noise_var + w)


def _marginal_t(noise_var: float, w1: float, w2: float, a: float) -> float:
    """I(X; U_1, U_2 | S) in nats; inf when the W block is singular."""
    if math.isinf(w1) or math.isinf(w2):
        # Reciprocal form survives the absent-description limit exactly.
        recip = (0.0 if math.isinf(w1) else 1.0 / (w1 + a)) + (
            0.0 if math.isinf(w2) else 1.0 / (w2 + a)
        )
        if recip == 0.0:
            return 0.0
        gamma = 1.0 / recip - a
        if gamma <= 0.0:
            return math.inf
        return 0.5 * math.log1p(noise_var / gamma)
    det = w1 * w2 - a * a
    num = noise_var * (w1 + w2 + 2.0 * a) + det
    if det <= 0.0:
        return math.inf
    return 0.5 * math.log(num / det)


def marginal_params(model: SourceModel, params: SchemeParams) -> MarginalParams:
    """The six marginal parameters (d'_11, d'_12, d'_21, d'_22, t'_1, t'_2)."""
    n1, n2 = model.sigma_n1_2, model.sigma_n2_2
    return MarginalParams(
        d11=_marginal_d(n1, params.w11),
        d12=_marginal_d(n1, params.w12),
        d21=_marginal_d(n2, params.w21),
        d22=_marginal_d(n2, params.w22),
        t1=_marginal_t(n1, params.w11, params.w12, params.a1),
        t2=_marginal_t(n2, params.w21, params.w22, params.a2),
    )


def receiver_distortion(model: SourceModel, params: SchemeParams, l: int) -> float:
    """Var(S | U_1l, U_2l) achieved at individual receiver ``l``, in closed form:

    1/delta_l = 1/sigma_s2 + 1/n_1 + 1/n_2 - d'_1l/n_1^2 - d'_2l/n_2^2.
    """
    if l not in (1, 2):
        raise InvalidParamsError(f"receiver index must be 1 or 2, got {l!r}")
    n1, n2 = model.sigma_n1_2, model.sigma_n2_2
    d1l = _marginal_d(n1, params.w11 if l == 1 else params.w12)
    d2l = _marginal_d(n2, params.w21 if l == 1 else params.w22)
    inv = 1.0 / model.sigma_s2 + 1.0 / n1 + 1.0 / n2 - d1l / n1**2 - d2l / n2**2
    return 1.0 / inv


def central_distortion(model: SourceModel, params: SchemeParams) -> float:
    """Var(S | U11, U12, U21, U22) in closed form:

    1/delta_0 = 1/sigma_s2 + (1 - e^{-2 t'_1})/n_1 + (1 - e^{-2 t'_2})/n_2,

    with e^{-2 t'} = 0 at the t' = inf limit (descriptions exhaust X_k).
    """
    mp = marginal_params(model, params)
    n1, n2 = model.sigma_n1_2, model.sigma_n2_2
    u1 = 0.0 if math.isinf(mp.t1) else math.exp(-2.0 * mp.t1)
    u2 = 0.0 if math.isinf(mp.t2) else math.exp(-2.0 * mp.t2)
    inv = 1.0 / model.sigma_s2 + (1.0 - u1) / n1 + (1.0 - u2) / n2
    return 1.0 / inv


def sum_rate(model: SourceModel, params: SchemeParams) -> RateBreakdown:
    """Sum-rate objective evaluated on the seven-variable joint law.

    Both information terms are computed with the general log-det algebra of
    :mod:`vceo.gaussmodel`; degenerate parameters (a zero-variance W, or the
    PSD boundary w_k1 w_k2 = a_k^2) raise InfiniteMutualInformationError.
    """
    cov = build_joint_cov(model, params)
    us = ("U11", "U12", "U21", "U22")
    joint = gaussian_mi(cov, ("X1", "X2"), us)
    cross = gaussian_mi(cov, ("U11", "U21"), ("U12", "U22"))
    return RateBreakdown(sum_rate=joint + cross, term_mi_joint=joint, term_mi_cross=cross)


def _sum_rate_closed(model: SourceModel, params: SchemeParams) -> float:
    """Closed-form sum rate (equals the log-det route; used in the optimizer hot loop).

    Decomposes per encoder as 1/2 log(n_k^2 / (d'_k1 d'_k2))
    + 1/2 log(w_k1 w_k2 / (w_k1 w_k2 - a_k^2)), plus 1/2 log(sigma_s4 /
    (delta_1 delta_2)).  Returns +inf at degenerate parameters.
    """
    total = 0.0
    for k in (1, 2):
        w1, w2, a = params.encoder(k)
        n = model.noise_var(k)
        d1 = _marginal_d(n, w1)
        d2 = _marginal_d(n, w2)
        if d1 == 0.0 or d2 == 0.0:
            return math.inf
        total += 0.5 * math.log(n * n / (d1 * d2))
        det = w1 * w2 - a * a
        if a > 0.0:
            if det <= 0.0:
                return math.inf
            total += 0.5 * math.log(w1 * w2 / det)
    for l in (1, 2):
        total += 0.5 * math.log(model.sigma_s2 / receiver_distortion(model, params, l))
    return total


def rate_tuple(model: SourceModel, params: SchemeParams, slack: float) -> RateBreakdown:
    """Explicit per-link rates overshooting the sum rate by exactly ``slack``.

    With eps = slack / 8, the pre-binning rates are

        R'_11 = I(X1; U11) + eps          R'_12 = I(X1; U12 | U11) + I(U11; U12) + eps
        R'_21 = I(X2; U21) + eps          R'_22 = I(X2; U22 | U21) + I(U21; U22) + eps

    and the link rates discount the cross-encoder binning gain on encoder 1:

        R_11 = R'_11 - I(U11; U21) + eps      R_21 = R'_21 + eps
        R_12 = R'_12 - I(U12; U22) + eps      R_22 = R'_22 + eps.

    Every codebook-generation and decoding inequality then holds strictly
    (margin >= eps) and the four link rates sum to sum_rate + slack.
    """
    if not (isinstance(slack, (int, float)) and math.isfinite(slack) and slack > 0):
        raise InvalidParamsError(f"slack must be a finite positive number, got {slack!r}")
    eps = float(slack) / 8.0
    cov = build_joint_cov(model, params)
    base = sum_rate(model, params)

    rp11 = gaussian_mi(cov, "X1", "U11") + eps
    rp12 = conditional_mi(cov, "X1", "U12", "U11") + gaussian_mi(cov, "U11", "U12") + eps
    rp21 = gaussian_mi(cov, "X2", "U21") + eps
    rp22 = conditional_mi(cov, "X2", "U22", "U21") + gaussian_mi(cov, "U21", "U22") + eps
    i_cross_1 = gaussian_mi(cov, "U11", "U21")
    i_cross_2 = gaussian_mi(cov, "U12", "U22")
    return replace(
        base,
        rp11=rp11,
        rp12=rp12,
        rp21=rp21,
        rp22=rp22,
        r11=rp11 - i_cross_1 + eps,
        r21=rp21 + eps,
        r12=rp12 - i_cross_2 + eps,
        r22=rp22 + eps,
        slack=float(slack),
    )


@dataclass(frozen=True)
class OptimizeOptions:
    """Knobs of the multistart sum-rate minimisation.

    ``warm_start`` injects a known-good scheme as the first start;
    ``analytic_start`` derives one from the converse construction when the
    distortion condition holds (skipped if a warm start is supplied).
    """

    starts: int = 16
    tol: float = 1e-7
    seed: int = 0
    maxiter: int = 4000
    analytic_start: bool = True
    warm_start: SchemeParams | None = None
    penalty_weight: float = 1e4


@dataclass(frozen=True)
class OptimizeResult:
    params: SchemeParams
    breakdown: RateBreakdown
    distortions: tuple[float, float, float]  # (delta_1, delta_2, delta_0)


def _distortions(model: SourceModel, params: SchemeParams) -> tuple[float, float, float]:
    return (
        receiver_distortion(model, params, 1),
        receiver_distortion(model, params, 2),
        central_distortion(model, params),
    )


def _is_feasible(
    model: SourceModel,
    targets: DistortionTriple,
    params: SchemeParams,
    rtol: float = 1e-9,
) -> bool:
    d1, d2, d0 = _distortions(model, params)
    return (
        d1 <= targets.d1 * (1.0 + rtol)
        and d2 <= targets.d2 * (1.0 + rtol)
        and d0 <= targets.d0 * (1.0 + rtol)
    )


def _params_from_vector(model: SourceModel, z: np.ndarray) -> SchemeParams:
    """Decode optimizer coordinates: log-variances for w, [0, 1] mixing for a."""
    caps = np.array(
        [model.sigma_n1_2, model.sigma_n1_2, model.sigma_n2_2, model.sigma_n2_2]
    )
    w = np.exp(np.clip(z[:4], np.log(caps) - 25.0, np.log(W_CAP_FACTOR * caps)))
    rho = np.clip(z[4:6], 0.0, 1.0)
    a1 = rho[0] * min(math.sqrt(w[0] * w[1]), model.sigma_n1_2)
    a2 = rho[1] * min(math.sqrt(w[2] * w[3]), model.sigma_n2_2)
    return SchemeParams(w[0], w[1], w[2], w[3], a1, a2)


def _penalized_objective(model: SourceModel, targets: DistortionTriple, weight: float):
    """Closed-form sum rate plus exact penalty on relative distortion violations.

    Inlined float arithmetic: this sits in the Nelder-Mead hot loop.
    """
    s2, n1, n2 = model.sigma_s2, model.sigma_n1_2, model.sigma_n2_2
    log_caps = np.log(np.array([n1, n1, n2, n2]))
    lo, hi = log_caps - 25.0, log_caps + math.log(W_CAP_FACTOR)
    t1v, t2v, t0v = targets.d1, targets.d2, targets.d0

    def objective(z: np.ndarray) -> float:
        w = np.exp(np.clip(z[:4], lo, hi))
        rho1 = min(max(z[4], 0.0), 1.0)
        rho2 = min(max(z[5], 0.0), 1.0)
        a1 = rho1 * min(math.sqrt(w[0] * w[1]), n1)
        a2 = rho2 * min(math.sqrt(w[2] * w[3]), n2)
        det1 = w[0] * w[1] - a1 * a1
        det2 = w[2] * w[3] - a2 * a2
        if det1 <= 0.0 or det2 <= 0.0:
            return 1e12
        d11 = n1 * w[0] / (n1 + w[0])
        d12 = n1 * w[1] / (n1 + w[1])
        d21 = n2 * w[2] / (n2 + w[2])
        d22 = n2 * w[3] / (n2 + w[3])
        value = 0.5 * math.log(n1 * n1 / (d11 * d12)) + 0.5 * math.log(n2 * n2 / (d21 * d22))
        if a1 > 0.0:
            value += 0.5 * math.log(w[0] * w[1] / det1)
        if a2 > 0.0:
            value += 0.5 * math.log(w[2] * w[3] / det2)
        inv_dl1 = 1.0 / s2 + 1.0 / n1 + 1.0 / n2 - d11 / n1**2 - d21 / n2**2
        inv_dl2 = 1.0 / s2 + 1.0 / n1 + 1.0 / n2 - d12 / n1**2 - d22 / n2**2
        value += 0.5 * math.log(s2 * inv_dl1) + 0.5 * math.log(s2 * inv_dl2)
        u1 = det1 / (n1 * (w[0] + w[1] + 2.0 * a1) + det1)
        u2 = det2 / (n2 * (w[2] + w[3] + 2.0 * a2) + det2)
        inv_d0 = 1.0 / s2 + (1.0 - u1) / n1 + (1.0 - u2) / n2
        viol = (
            max(0.0, 1.0 / (inv_dl1 * t1v) - 1.0)
            + max(0.0, 1.0 / (inv_dl2 * t2v) - 1.0)
            + max(0.0, 1.0 / (inv_d0 * t0v) - 1.0)
        )
        return value + weight * viol

    return objective


def _restore_feasibility(
    model: SourceModel, targets: DistortionTriple, params: SchemeParams
) -> SchemeParams:
    """Shrink (w, a) by a common factor until all three distortions are met.

    All distortions decrease monotonically as the factor shrinks, so a
    bisection on the factor finds the feasibility boundary.
    """
    if _is_feasible(model, targets, params, rtol=0.0):
        return params

    def scaled(rho: float) -> SchemeParams:
        return SchemeParams(
            params.w11 * rho,
            params.w12 * rho,
            params.w21 * rho,
            params.w22 * rho,
            params.a1 * rho,
            params.a2 * rho,
        )

    lo, hi = 0.0, 1.0
    if not _is_feasible(model, targets, scaled(lo + 1e-12), rtol=0.0):
        raise InfeasibleTargetsError(
            "feasibility restoration failed: targets leave no slack above the "
            f"remote MMSE floor {full_mmse(model):.6g}",
            constraint="central",
        )
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if _is_feasible(model, targets, scaled(mid), rtol=0.0):
            lo = mid
        else:
            hi = mid
    return scaled(lo)


def _start_vectors(
    model: SourceModel, targets: DistortionTriple, opts: OptimizeOptions
) -> list[np.ndarray]:
    """Deterministic structured starts plus seeded random ones, opts.starts total."""
    log_n = np.array(
        [
            math.log(model.sigma_n1_2),
            math.log(model.sigma_n1_2),
            math.log(model.sigma_n2_2),
            math.log(model.sigma_n2_2),
        ]
    )
    starts: list[np.ndarray] = []
    if opts.warm_start is not None:
        starts.append(_vector_from_params(model, opts.warm_start))
    elif opts.analytic_start:
        z = _analytic_start(model, targets)
        if z is not None:
            starts.append(z)
    for rho in (0.0, 0.5):
        z = _constraint_start(model, targets, rho)
        if z is not None:
            starts.append(z)
    for c in (0.2, 1.0, 5.0):
        starts.append(np.concatenate([log_n + math.log(c), np.zeros(2)]))
    rng = np.random.default_rng(opts.seed)
    while len(starts) < opts.starts:
        starts.append(
            np.concatenate([log_n + rng.uniform(-5.0, 5.0, 4), rng.uniform(0.0, 0.8, 2)])
        )
    return starts[: max(opts.starts, 2)]


def _vector_from_params(model: SourceModel, p: SchemeParams) -> np.ndarray:
    """Encode a scheme into optimizer coordinates (inverse of _params_from_vector)."""
    caps = np.array(
        [model.sigma_n1_2, model.sigma_n1_2, model.sigma_n2_2, model.sigma_n2_2]
    )
    w = np.maximum(np.array([p.w11, p.w12, p.w21, p.w22]), 1e-300)
    z_w = np.log(np.minimum(w, W_CAP_FACTOR * caps))
    rho1 = p.a1 / min(math.sqrt(p.w11 * p.w12), model.sigma_n1_2) if p.a1 > 0 else 0.0
    rho2 = p.a2 / min(math.sqrt(p.w21 * p.w22), model.sigma_n2_2) if p.a2 > 0 else 0.0
    return np.concatenate([z_w, [min(rho1, 1.0), min(rho2, 1.0)]])


def _constraint_start(
    model: SourceModel, targets: DistortionTriple, rho: float = 0.0
) -> np.ndarray | None:
    """Start on the individual-receiver constraint boundary.

    Splits each receiver's precision budget equally across the encoders,
    inverts d' = n w / (n + w), applies anticorrelation fraction ``rho``,
    shrinks to feasibility, and returns the coordinates.  Uses the targets
    only; independent of the converse search.
    """
    n = (model.sigma_n1_2, model.sigma_n2_2)
    base = 1.0 / model.sigma_s2 + 1.0 / n[0] + 1.0 / n[1]
    w = [0.0] * 4
    for l, target in ((1, targets.d1), (2, targets.d2)):
        c = base - 1.0 / target
        shares = [c / 2.0, c / 2.0]
        for k in (0, 1):  # cap a share at its encoder box and give the rest away
            cap = 0.999 / n[k]
            if shares[k] > cap:
                shares[1 - k] += shares[k] - cap
                shares[k] = cap
        for k in (0, 1):
            d_marg = min(shares[k] * n[k] ** 2, 0.999 * n[k])
            if d_marg <= 0.0:
                return None
            w[2 * k + (l - 1)] = n[k] * d_marg / (n[k] - d_marg)
    a1 = rho * min(math.sqrt(w[0] * w[1]), n[0])
    a2 = rho * min(math.sqrt(w[2] * w[3]), n[1])
    try:
        params = _restore_feasibility(
            model, targets, SchemeParams(w[0], w[1], w[2], w[3], a1, a2)
        )
    except (InvalidParamsError, InfeasibleTargetsError):
        return None
    return _vector_from_params(model, params)


def _analytic_start(model: SourceModel, targets: DistortionTriple) -> np.ndarray | None:
    """Seed from the converse argmin's matching construction, when available."""
    from .bound import condition_holds, lower_bound  # deferred: bound imports this module's types
    from .equivalence import construct_matching_scheme

    if not condition_holds(model, targets):
        return None
    try:
        lb = lower_bound(model, targets)
        report = construct_matching_scheme(model, targets, lb.argmin)
    except VceoError:
        return None
    return _vector_from_params(model, report.params)


def optimize_sum_rate(
    model: SourceModel,
    targets: DistortionTriple,
    opts: OptimizeOptions | None = None,
) -> OptimizeResult:
    """Minimise the sum rate over schemes meeting all three distortion targets.

    Multistart Nelder-Mead in log-variance coordinates for the four W
    variances and box-clipped mixing coordinates for a_k in
    [0, min(sqrt(w_k1 w_k2), n_k)], with an exact penalty on relative
    distortion violations and a monotone shrink restoration step.
    Deterministic for fixed (inputs, opts.seed).

    Raises InfeasibleTargetsError when a target sits below the remote MMSE
    floor Var(S | X1, X2).
    """
    opts = opts or OptimizeOptions()
    require_valid_targets(model, targets)
    floor = full_mmse(model)
    for name, target in (("d1", targets.d1), ("d2", targets.d2), ("d0", targets.d0)):
        if target < floor * (1.0 - 1e-12):
            raise InfeasibleTargetsError(
                f"target {name} = {target:.6g} is below the remote MMSE floor "
                f"Var(S | X1, X2) = {floor:.6g}",
                constraint=name,
            )

    objective = _penalized_objective(model, targets, opts.penalty_weight)

    def _local(z0: np.ndarray, maxiter: int, xatol: float, fatol: float):
        return scipy.optimize.minimize(
            objective,
            z0,
            method="Nelder-Mead",
            options={"maxiter": maxiter, "xatol": xatol, "fatol": fatol, "adaptive": True},
        )

    # Phase 1: a cheap pass from every start; phase 2: restart-polish the best few.
    # Nelder-Mead stalls on the penalty kink at the distortion boundary, and a
    # fresh simplex at the incumbent reliably unsticks it.
    phase1 = []
    for z0 in _start_vectors(model, targets, opts):
        res = _local(z0, min(opts.maxiter, 1200), 1e-7, max(opts.tol * 0.01, 1e-12))
        phase1.append((float(res.fun), np.asarray(res.x)))
    phase1.sort(key=lambda item: item[0])
    best_val, best_z = phase1[0]
    for _, x0 in phase1[: min(3, len(phase1))]:
        res = _local(x0, opts.maxiter, 1e-10, max(opts.tol * 1e-5, 1e-13))
        for _ in range(4):
            res2 = _local(res.x, opts.maxiter, 1e-10, max(opts.tol * 1e-5, 1e-13))
            improved = res2.fun < res.fun - 1e-13
            res = res2
            if not improved:
                break
        if res.fun < best_val:
            best_val, best_z = float(res.fun), np.asarray(res.x)
    params = _restore_feasibility(model, targets, _params_from_vector(model, best_z))
    return OptimizeResult(
        params=params,
        breakdown=sum_rate(model, params),
        distortions=_distortions(model, params),
    )
