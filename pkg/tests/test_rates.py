import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsoqkd.channel import ChannelParams
from fsoqkd.rates import (MuOptimum, RateInputs, eve_spectra, g_entropy,
                          lb_direct, lb_reverse, optimize_mu, rate_report,
                          skr_cv_ccq, skr_ds_bb84, upper_bound)


def channel(eta, kappa, n_e=0.0):
    p_bob = eta
    p_eve = kappa * (1 - eta)
    return ChannelParams(eta=eta, kappa=kappa, n_e=n_e, p_bob=p_bob, p_eve=p_eve)


def inputs(eta, kappa, mu, beta=1.0, n_e=0.0, **kw):
    return RateInputs(channel=channel(eta, kappa, n_e), mu=mu, beta=beta, **kw)


# ---------------------------------------------------------------- g entropy

def test_g_zero():
    assert g_entropy(0.0) == 0.0


def test_g_one():
    assert g_entropy(1.0) == pytest.approx(2.0, rel=1e-14)


def test_g_asymptote_matches_exact():
    # exact and asymptotic forms agree where they meet
    x = 1e6
    asym = math.log2(x) + math.log2(math.e)
    assert g_entropy(x) == pytest.approx(21.3742643, rel=1e-6)
    assert abs(g_entropy(x) - asym) < 1e-6
    # the two evaluation branches agree across the switch point
    lo, hi = math.nextafter(1e12, 0.0), math.nextafter(1e12, math.inf)
    assert abs(g_entropy(lo) - g_entropy(hi)) < 1e-9


def test_g_rejects_negative():
    with pytest.raises(ValueError):
        g_entropy(-0.1)


def test_g_monotone_small_and_large():
    xs = np.geomspace(1e-12, 1e15, 200)
    vals = [g_entropy(float(x)) for x in xs]
    assert all(b > a for a, b in zip(vals, vals[1:]))


# ------------------------------------------------------------- eve spectra

def test_pure_loss_spectrum():
    nu, _ = eve_spectra(channel(0.7, 1.0), mu=3.0)
    assert (nu[0] - 1) / 2 == pytest.approx((1 - 0.7) * 3.0, rel=1e-10)


def test_decoupled_eve():
    nu, nu_y = eve_spectra(channel(0.7, 0.0), mu=3.0)
    assert nu[0] == pytest.approx(1.0, abs=1e-10)
    assert nu_y[0] == pytest.approx(1.0, abs=1e-10)


def test_conditional_limit_large_mu():
    nu, nu_y = eve_spectra(channel(0.75, 1.0), mu=1e6)
    assert (nu_y[0] - 1) / 2 == pytest.approx((1 - 0.75) / 0.75, rel=1e-4)


def test_unconditional_mean_photon_thermal():
    eta, kappa, n_e, mu = 0.6, 0.8, 0.4, 2.0
    nu, _ = eve_spectra(channel(eta, kappa, n_e), mu)
    want = kappa * ((1 - eta) * mu + eta * n_e)
    assert (nu[0] - 1) / 2 == pytest.approx(want, rel=1e-10)


# ------------------------------------------------------------ lower bounds

@pytest.mark.parametrize("eta", [0.6, 0.75, 0.9])
def test_pure_loss_limits(eta):
    large = inputs(eta, 1.0, mu=1e8)
    sentinel = inputs(eta, 1.0, mu=math.inf)
    assert abs(lb_direct(large) - math.log2(eta / (1 - eta))) < 1e-3
    assert abs(lb_reverse(large) - (-math.log2(1 - eta))) < 1e-3
    assert lb_direct(sentinel) == pytest.approx(math.log2(eta / (1 - eta)), rel=1e-12)
    assert lb_reverse(sentinel) == pytest.approx(-math.log2(1 - eta), rel=1e-12)


def test_direct_clamped_at_low_transmissivity():
    assert lb_direct(inputs(0.5, 1.0, mu=math.inf)) == 0.0
    assert lb_direct(inputs(0.3, 1.0, mu=1e8)) == 0.0


def test_direct_decoupled_reduces_to_mutual_information():
    inp = inputs(0.8, 0.0, mu=5.0, beta=0.9)
    assert lb_direct(inp) == pytest.approx(0.9 * g_entropy(0.8 * 5.0), rel=1e-12)


def test_direct_no_noise_reduces_to_two_terms():
    eta, kappa, mu = 0.7, 0.6, 4.0
    inp = inputs(eta, kappa, mu=mu)
    want = g_entropy(eta * mu) - g_entropy(kappa * (1 - eta) * mu)
    assert lb_direct(inp) == pytest.approx(want, rel=1e-9)


def test_reverse_vanishes_at_zero_modulation():
    assert lb_reverse(inputs(0.7, 0.5, mu=1e-9)) < 1e-7


def test_reverse_positive_without_eve():
    inp = inputs(0.5, 0.0, mu=1.0)
    third = 1.0 - 0.5 * 1.0 * 2.0 / (1.0 + 0.5)
    want = g_entropy(1.0) - g_entropy(third)
    assert lb_reverse(inp) == pytest.approx(want, rel=1e-9)
    assert lb_reverse(inp) > 0.0


def test_sentinel_matches_brute_force_thermal():
    # large-mu analytic limits against mu = 1e8 with injected noise
    eta, kappa, n_e = 0.65, 0.8, 0.2
    brute = inputs(eta, kappa, mu=1e8, n_e=n_e)
    sent = inputs(eta, kappa, mu=math.inf, n_e=n_e)
    assert lb_direct(sent) == pytest.approx(lb_direct(brute), abs=2e-3)
    assert lb_reverse(sent) == pytest.approx(lb_reverse(brute), abs=2e-3)


@settings(max_examples=40, deadline=None)
@given(eta=st.floats(0.05, 0.95), n_e=st.floats(0.0, 0.5),
       mu=st.floats(0.01, 100.0), beta=st.floats(0.5, 1.0),
       k1=st.floats(0.0, 1.0), k2=st.floats(0.0, 1.0))
def test_lower_bounds_nonincreasing_in_kappa(eta, n_e, mu, beta, k1, k2):
    lo, hi = sorted((k1, k2))
    args = dict(mu=mu, beta=beta, n_e=n_e)
    assert lb_direct(inputs(eta, hi, **args)) <= lb_direct(inputs(eta, lo, **args)) + 1e-9
    assert lb_reverse(inputs(eta, hi, **args)) <= lb_reverse(inputs(eta, lo, **args)) + 1e-9


# ------------------------------------------------------------- upper bound

def test_upper_bound_pure_loss_edge():
    ch = channel(0.75, 1.0)
    assert upper_bound(ch) == pytest.approx(2.0, rel=1e-12)
    assert upper_bound(ch) == pytest.approx(lb_reverse(inputs(0.75, 1.0, mu=math.inf)), rel=1e-9)


def test_upper_bound_sentinel_without_eve():
    assert math.isinf(upper_bound(channel(0.75, 0.0)))


def test_upper_bound_half_half():
    assert upper_bound(channel(0.5, 0.5)) == pytest.approx(2.0, rel=1e-12)


def test_upper_bound_pluggable():
    assert upper_bound(channel(0.5, 0.5), provider=lambda ch: 42.0) == 42.0


@settings(max_examples=40, deadline=None)
@given(eta=st.floats(0.05, 0.95), kappa=st.floats(0.05, 1.0),
       mu=st.floats(0.01, 1000.0), beta=st.floats(0.5, 1.0))
def test_bound_ordering(eta, kappa, mu, beta):
    inp = inputs(eta, kappa, mu=mu, beta=beta)
    ub = upper_bound(inp.channel)
    assert max(lb_direct(inp), lb_reverse(inp)) <= ub + 1e-9


# ---------------------------------------------------------- protocol rates

def test_ccq_without_eve():
    inp = inputs(0.8, 0.0, mu=3.0, beta=0.9)
    want = inp.pulse_rate * 0.9 * math.log2(1 + 0.8 * 3.0)
    assert skr_cv_ccq(inp) == pytest.approx(want, rel=1e-12)


def test_ccq_below_reverse_bound():
    # measured-data rate discards Alice's quantum side information
    for eta in (0.3, 0.6, 0.9):
        for kappa in (0.2, 0.7, 1.0):
            for mu in (0.5, 5.0, 500.0):
                inp = inputs(eta, kappa, mu=mu)
                assert skr_cv_ccq(inp) <= inp.pulse_rate * lb_reverse(inp) + 1e-9


def test_bb84_without_eve():
    inp = inputs(0.8, 0.0, mu=2.0)
    want = inp.pulse_rate * (1 - math.exp(-0.8 * 2.0))
    assert skr_ds_bb84(inp) == pytest.approx(want, rel=1e-12)


def test_bb84_clamps_when_eve_dominates():
    assert skr_ds_bb84(inputs(0.2, 1.0, mu=50.0)) == 0.0


def test_bb84_misalignment_costs_rate():
    clean = skr_ds_bb84(inputs(0.8, 0.1, mu=1.0))
    noisy = skr_ds_bb84(inputs(0.8, 0.1, mu=1.0, misalignment=0.03))
    assert noisy < clean


# ------------------------------------------------------------ optimization

def test_optimize_mu_sentinel_at_perfect_reconciliation():
    opt = optimize_mu(inputs(0.75, 0.8, mu=1.0, beta=1.0), "lb_reverse")
    assert math.isinf(opt.mu)
    assert opt.value == pytest.approx(
        lb_reverse(inputs(0.75, 0.8, mu=math.inf)), rel=1e-12)


def test_optimize_mu_finite_at_imperfect_reconciliation():
    opt = optimize_mu(inputs(0.75, 0.8, mu=1.0, beta=0.95), "lb_reverse")
    assert math.isfinite(opt.mu)
    assert opt.value > 0.0
    assert not opt.degenerate


def test_optimize_mu_matches_dense_grid():
    inp = inputs(0.7, 0.9, mu=1.0, beta=0.95)
    opt = optimize_mu(inp, "lb_reverse")
    grid = np.geomspace(1e-4, 1e8, 10_000)
    dense = max(lb_reverse(RateInputs(channel=inp.channel, mu=float(m), beta=0.95))
                for m in grid)
    assert opt.value >= dense * (1 - 1e-2)


def test_optimize_mu_degenerate_channel():
    # eta below kappa(1-eta) everywhere and beta<1: nothing to send
    opt = optimize_mu(inputs(0.05, 1.0, mu=1.0, beta=0.6), "lb_direct")
    assert opt.degenerate
    assert opt.value == 0.0
    assert opt.mu == pytest.approx(1e-4)


def test_rate_report_with_optimization():
    inp = inputs(0.6, 0.7, mu=1.0, beta=0.95)
    rep = rate_report(inp, optimize=True)
    assert rep.optimal_mu is not None
    assert rep.optimal_mu_cv is not None and rep.optimal_mu_bb84 is not None
    assert rep.lb <= rep.ub + 1e-9
    assert rep.skr_cv >= 0.0 and rep.skr_bb84 >= 0.0


def test_rate_inputs_validation():
    with pytest.raises(ValueError):
        RateInputs(channel=channel(0.5, 0.5), mu=-1.0)
    with pytest.raises(ValueError):
        RateInputs(channel=channel(0.5, 0.5), mu=1.0, beta=0.0)
    with pytest.raises(ValueError):
        RateInputs(channel=channel(0.5, 0.5), mu=1.0, f_L=0.9)
