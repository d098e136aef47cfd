"""Achievable-rate bounds and protocol key rates for the restricted wiretap.

The channel is a thermal-loss wiretap: transmissivity ``eta`` to Bob, a
fraction ``kappa`` of the lost light collected by an eavesdropper holding a
single bosonic mode, background occupation ``n_e``.  Direct and reverse
reconciliation lower bounds are evaluated from the Holevo information of that
collected mode, built from the purified Gaussian network:

    TMSV(mu)  --eta-->  Bob        (environment arm: TMSV-purified thermal)
    lost arm  --kappa-->  Eve      (vacuum ancilla on the residual)

``mu = math.inf`` is a supported sentinel: the bounds are then evaluated from
their analytic large-power limits instead of a huge finite value, which would
cancel catastrophically.

The upper bound and the two protocol rates (heterodyne CV with a
classical-classical-quantum structure, and asymptotic decoy-state BB84) are
documented defaults behind pluggable providers: only the information
structure, not a specific published formula, is fixed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import ChannelParams
from .gaussian import (GaussianState, apply_symplectic, beamsplitter_symplectic,
                       heterodyne_condition, symplectic_eigenvalues,
                       thermal_covariance, tmsv_covariance, vacuum_state)
from .optimize import golden_section_max

LOG2_E = math.log2(math.e)
MU_GRID_LO, MU_GRID_HI = 1e-4, 1e8

LB_OBJECTIVES = ("lb_direct", "lb_reverse", "lb_max")
OBJECTIVES = LB_OBJECTIVES + ("skr_cv", "skr_bb84")


@dataclass(frozen=True)
class RateInputs:
    """Channel plus protocol knobs.

    ``mu`` is the mean transmitted photon number per mode (``math.inf``
    allowed), ``beta`` the reconciliation efficiency of the continuous
    bounds, ``f_L`` the BB84 reconciliation inefficiency, ``pulse_rate`` the
    source rate in states/s.  The remaining fields are BB84 detection
    details: misalignment error, basis-sifting efficiency and the number of
    background modes feeding the dark-count yield.
    """

    channel: ChannelParams
    mu: float = math.inf
    beta: float = 1.0
    f_L: float = 1.1
    pulse_rate: float = 1e9
    misalignment: float = 0.0
    basis_efficiency: float = 1.0
    background_modes: float = 1.0

    def __post_init__(self):
        if not (self.mu > 0):
            raise ValueError("mu must be positive (math.inf allowed)")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must lie in (0, 1]")
        if self.f_L < 1.0:
            raise ValueError("f_L must be >= 1")
        if self.pulse_rate <= 0:
            raise ValueError("pulse_rate must be positive")


@dataclass(frozen=True)
class MuOptimum:
    mu: float
    value: float
    degenerate: bool = False


@dataclass(frozen=True)
class RateReport:
    """Bounds in bits/mode, protocol rates in bits/s."""

    lb_direct: float
    lb_reverse: float
    lb: float
    ub: float
    skr_cv: float
    skr_bb84: float
    optimal_mu: float | None = None
    optimal_mu_cv: float | None = None
    optimal_mu_bb84: float | None = None


def g_entropy(x: float) -> float:
    """Von Neumann entropy of a thermal state with mean photon x, in bits.

    ``(x+1) log2(x+1) - x log2(x)`` evaluated through log1p so no precision
    is lost at either end; beyond 1e12 the asymptote log2(x) + log2(e) +
    1/(2 x ln 2) takes over.
    """
    if x < 0:
        raise ValueError("mean photon number must be nonnegative")
    if x == 0.0:
        return 0.0
    if x > 1e12:
        return math.log2(x) + LOG2_E + LOG2_E / (2.0 * x)
    return (math.log1p(x) + x * math.log1p(1.0 / x)) / math.log(2.0)


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def eve_spectra(channel: ChannelParams, mu: float):
    """Symplectic spectra of Eve's collected mode.

    Returns ``(nu, nu_conditional)`` where the conditional spectrum follows a
    heterodyne measurement of Bob's mode.  Built explicitly from the purified
    five-mode network (source TMSV, environment TMSV, vacuum ancilla).
    """
    if not (0 <= mu < math.inf):
        raise ValueError("eve_spectra needs a finite mu")
    eta, kappa, n_e = channel.eta, channel.kappa, channel.n_e
    # modes: 0 = Alice's kept arm, 1 = signal -> Bob, 2 = env -> lost -> Eve,
    #        3 = environment purifier, 4 = vacuum ancilla
    cov = np.eye(10)
    cov[0:4, 0:4] = tmsv_covariance(mu)
    cov[4:8, 4:8] = tmsv_covariance(n_e)
    state = GaussianState(cov)
    state = apply_symplectic(state, beamsplitter_symplectic(5, 1, 2, eta))
    state = apply_symplectic(state, beamsplitter_symplectic(5, 2, 4, kappa))
    state.assert_physical()

    nu = symplectic_eigenvalues(state.reduced([2]).covariance)
    cond = heterodyne_condition(state, keep=[2], measured=[1])
    nu_cond = symplectic_eigenvalues(cond.covariance)
    return nu, nu_cond


def _eve_entropy_terms(channel: ChannelParams, mu: float):
    nu, nu_cond = eve_spectra(channel, mu)
    s_e = sum(g_entropy(max((v - 1.0) / 2.0, 0.0)) for v in nu)
    s_e_cond = sum(g_entropy(max((v - 1.0) / 2.0, 0.0)) for v in nu_cond)
    return s_e, s_e_cond


def _loss_to_eve(channel: ChannelParams) -> float:
    return channel.kappa * (1.0 - channel.eta)


def _eve_conditional_limit(channel: ChannelParams) -> float:
    """Large-power limit of Eve's conditional mean photon number.

    From the Schur complement of the collected mode on Bob's heterodyne
    outcome: kappa * ((1-eta)(1+(1-eta) n_e)/eta + 2(1-eta) n_e + eta n_e).
    """
    eta, kappa, n_e = channel.eta, channel.kappa, channel.n_e
    return kappa * ((1.0 - eta) * (1.0 + (1.0 - eta) * n_e) / eta
                    + 2.0 * (1.0 - eta) * n_e + eta * n_e)


def lb_direct(inputs: RateInputs) -> float:
    """Direct-reconciliation lower bound, bits/mode."""
    ch = inputs.channel
    eta, kappa, n_e = ch.eta, ch.kappa, ch.n_e
    beta = inputs.beta
    if math.isinf(inputs.mu):
        if beta < 1.0:
            return 0.0  # (beta - 1) log2(mu) -> -inf
        lte = _loss_to_eve(ch)
        if lte == 0.0:
            return math.inf
        if eta == 0.0:
            return 0.0
        value = (math.log2(eta / lte)
                 - g_entropy(n_e * (1.0 - eta))
                 + g_entropy(n_e * (1.0 - eta * kappa)))
        return max(0.0, value)
    s_e, _ = _eve_entropy_terms(ch, inputs.mu)
    value = (beta * g_entropy(n_e * (1.0 - eta) + eta * inputs.mu)
             - s_e
             - beta * g_entropy(n_e * (1.0 - eta))
             + g_entropy(n_e * (1.0 - eta * kappa)))
    return max(0.0, value)


def lb_reverse(inputs: RateInputs) -> float:
    """Reverse-reconciliation lower bound, bits/mode."""
    ch = inputs.channel
    eta, kappa, n_e = ch.eta, ch.kappa, ch.n_e
    beta = inputs.beta
    if math.isinf(inputs.mu):
        if beta < 1.0:
            return 0.0
        lte = _loss_to_eve(ch)
        if lte == 0.0:
            return math.inf
        if eta == 0.0:
            return 0.0
        cond_alice = (1.0 - eta) * (1.0 + n_e) / eta
        value = (-math.log2(lte) - g_entropy(cond_alice)
                 + g_entropy(_eve_conditional_limit(ch)))
        return max(0.0, value)
    mu = inputs.mu
    s_e, s_e_cond = _eve_entropy_terms(ch, mu)
    bob_cond = mu - eta * mu * (1.0 + mu) / (1.0 + n_e - n_e * eta + eta * mu)
    value = (beta * g_entropy(mu)
             - s_e
             - beta * g_entropy(max(bob_cond, 0.0))
             + s_e_cond)
    return max(0.0, value)


def default_upper_bound(channel: ChannelParams) -> float:
    """Loss-bound on the rate through the channel complementary to Eve.

    Pure-loss style ``-log2(kappa (1-eta))``; with background noise the
    thermal correction ``-log2((1-t) t^n_e) - g(n_e)`` applies, where t is
    the effective transmissivity past Eve.  Returns ``math.inf`` when Eve
    collects nothing.
    """
    lte = _loss_to_eve(channel)
    if lte <= 0.0:
        return math.inf
    t_eff = 1.0 - lte
    value = -math.log2(lte)
    if channel.n_e > 0.0 and t_eff > 0.0:
        value -= channel.n_e * math.log2(t_eff) + g_entropy(channel.n_e)
    return max(0.0, value)


def upper_bound(channel: ChannelParams, provider=None) -> float:
    return (provider or default_upper_bound)(channel)


def _mutual_info_heterodyne(channel: ChannelParams, mu: float, beta: float) -> float:
    eta, n_e = channel.eta, channel.n_e
    floor = 1.0 + (1.0 - eta) * n_e
    return beta * math.log2((floor + eta * mu) / floor)


def skr_cv_ccq(inputs: RateInputs) -> float:
    """Heterodyne CV rate with measured (classical) data on both ends, bits/s.

    ``R * max(0, beta I(A;B) - chi(E;B))`` with the Holevo term taken from
    the collected-mode spectra.
    """
    ch = inputs.channel
    eta, kappa, n_e = ch.eta, ch.kappa, ch.n_e
    if math.isinf(inputs.mu):
        if inputs.beta < 1.0:
            return 0.0
        lte = _loss_to_eve(ch)
        if eta == 0.0:
            return 0.0
        if lte == 0.0:
            return math.inf
        floor = 1.0 + (1.0 - eta) * n_e
        value = (math.log2(eta / lte) - math.log2(floor) - LOG2_E
                 + g_entropy(_eve_conditional_limit(ch)))
        return inputs.pulse_rate * max(0.0, value)
    s_e, s_e_cond = _eve_entropy_terms(ch, inputs.mu)
    holevo = s_e - s_e_cond
    value = _mutual_info_heterodyne(ch, inputs.mu, inputs.beta) - holevo
    return inputs.pulse_rate * max(0.0, value)


def skr_ds_bb84(inputs: RateInputs) -> float:
    """Asymptotic decoy-state BB84 rate under beam-splitting leakage, bits/s.

    Infinite-decoy GLLP-style structure: gain and error from the Poissonian
    source plus background yield, Eve's information bounded by the chance her
    collected mode holds at least one photon.
    """
    ch = inputs.channel
    eta, n_e = ch.eta, ch.n_e
    y0 = n_e * inputs.background_modes
    if math.isinf(inputs.mu):
        signal = 1.0
        leak = 1.0 if _loss_to_eve(ch) > 0.0 else 0.0
    else:
        signal = -math.expm1(-eta * inputs.mu)
        leak = -math.expm1(-_loss_to_eve(ch) * inputs.mu)
    gain = y0 + signal
    if gain <= 0.0:
        return 0.0
    err = (0.5 * y0 + inputs.misalignment * signal) / gain
    value = gain * (1.0 - inputs.f_L * binary_entropy(err)) - leak
    return inputs.pulse_rate * inputs.basis_efficiency * max(0.0, value)


_OBJECTIVE_FUNCS = {
    "lb_direct": lb_direct,
    "lb_reverse": lb_reverse,
    "lb_max": lambda inp: max(lb_direct(inp), lb_reverse(inp)),
    "skr_cv": skr_cv_ccq,
    "skr_bb84": skr_ds_bb84,
}


def evaluate_objective(inputs: RateInputs, objective: str) -> float:
    try:
        func = _OBJECTIVE_FUNCS[objective]
    except KeyError:
        raise ValueError(f"unknown objective {objective!r}") from None
    return func(inputs)


def optimize_mu(inputs: RateInputs, objective: str = "lb_max",
                rel_tol: float = 1e-4) -> MuOptimum:
    """Input power maximizing an objective.

    With perfect reconciliation the continuous lower bounds increase without
    bound in mu, so the infinite sentinel and its analytic value are returned
    directly.  Otherwise the maximizer is bracketed on a log grid spanning
    [1e-4, 1e8] and refined by golden section to ``rel_tol`` in mu.
    """
    if objective in LB_OBJECTIVES and inputs.beta == 1.0:
        sent = replace(inputs, mu=math.inf)
        return MuOptimum(mu=math.inf, value=evaluate_objective(sent, objective))

    def obj_log(t: float) -> float:
        return evaluate_objective(replace(inputs, mu=math.exp(t)), objective)

    grid = np.log(np.geomspace(MU_GRID_LO, MU_GRID_HI, 61))
    values = [obj_log(t) for t in grid]
    if max(values) <= 0.0:
        return MuOptimum(mu=MU_GRID_LO, value=0.0, degenerate=True)
    i = int(np.argmax(values))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    t_best, v_best = golden_section_max(obj_log, lo, hi, tol=math.log1p(rel_tol))
    if values[i] > v_best:
        t_best, v_best = grid[i], values[i]
    return MuOptimum(mu=math.exp(t_best), value=v_best)


def rate_report(inputs: RateInputs, optimize: bool = False,
                objective: str = "lb_max") -> RateReport:
    """Full bound/protocol summary at fixed or optimized input power.

    When optimizing, the bound columns are evaluated at the power maximizing
    ``objective`` while each protocol rate is reported at its own optimum
    (the operational choice a transmitter would make per protocol).
    """
    ub = upper_bound(inputs.channel)
    if optimize:
        primary = optimize_mu(inputs, objective)
        at_primary = replace(inputs, mu=primary.mu)
        cv = optimize_mu(inputs, "skr_cv")
        bb = optimize_mu(inputs, "skr_bb84")
        return RateReport(
            lb_direct=lb_direct(at_primary),
            lb_reverse=lb_reverse(at_primary),
            lb=max(lb_direct(at_primary), lb_reverse(at_primary)),
            ub=ub,
            skr_cv=cv.value,
            skr_bb84=bb.value,
            optimal_mu=primary.mu,
            optimal_mu_cv=cv.mu,
            optimal_mu_bb84=bb.mu,
        )
    d = lb_direct(inputs)
    r = lb_reverse(inputs)
    return RateReport(lb_direct=d, lb_reverse=r, lb=max(d, r), ub=ub,
                      skr_cv=skr_cv_ccq(inputs), skr_bb84=skr_ds_bb84(inputs))
