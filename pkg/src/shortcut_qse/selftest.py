"""Property battery behind ``shortcut-qse selftest``."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import adiabatic as ad
from . import invariant as inv
from .experiments import ScenarioConfig, run_nonadiabatic
from .propagator import invariant_expectation, lr_overlap_diagnostic
from .quantum_core import commutator, herm_eigensystem, pauli_product, trace_distance


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def _pauli_algebra():
    axes = "xyz"
    worst = 0.0
    for a, b in itertools.product(axes, repeat=2):
        for c, d in itertools.product(axes, repeat=2):
            p, q = pauli_product(a, b), pauli_product(c, d)
            sign = (1 if a == c else -1) * (1 if b == d else -1)
            worst = max(worst, np.abs(p @ q - sign * q @ p).max())
    return worst == 0.0, f"max deviation {worst:.1e}"


def _su2():
    first, second = inv.su2_generators()
    worst = 0.0
    for gens in (first, second):
        for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            worst = max(worst, np.abs(commutator(gens[i], gens[j]) - 2j * gens[k]).max())
    for a in first:
        for b in second:
            worst = max(worst, np.abs(commutator(a, b)).max())
    return worst < 1e-15, f"max deviation {worst:.1e}"


def _eigensystem(rng):
    worst = 0.0
    for _ in range(50):
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        a = a + a.conj().T
        w, v = herm_eigensystem(a)
        worst = max(worst, np.linalg.norm((v * w) @ v.conj().T - a) / np.linalg.norm(a))
    return worst <= 1e-9, f"max relative reconstruction error {worst:.1e}"


def _triangle(rng):
    def rand_rho():
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        r = m @ m.conj().T
        return r / np.trace(r).real

    slack = np.inf
    for _ in range(50):
        a, b, c = rand_rho(), rand_rho(), rand_rho()
        slack = min(slack, trace_distance(a, b) + trace_distance(b, c) - trace_distance(a, c))
    return slack >= -1e-9, f"min slack {slack:.2e}"


def _qab():
    taus = np.linspace(0, 1, 1000)
    alpha = 1 / np.sqrt(2)
    sym = np.max(np.abs(ad.s_qab(1 - taus, alpha) - (1 - ad.s_qab(taus, alpha))))
    inv_err = np.max(np.abs(ad.tau_of_s_bell(ad.s_qab(taus, alpha)) - taus))
    return max(sym, inv_err) <= 1e-10, f"symmetry {sym:.1e}, inverse {inv_err:.1e}"


def _coefficients(config):
    taus = np.linspace(0, 1, 1000)
    worst = 0.0
    for n in config.n_list:
        p = config.invariant_params(n)
        g1, g2, g6 = inv.g_dynamic(taus, p)
        d1, d2, d6 = inv.g_dynamic_rates(taus, p)
        f = inv.f_modulation(taus, p)
        scale = 2 * np.pi * p.T * abs(p.J) * p.lam4
        worst = max(
            worst,
            np.max(np.abs(g1**2 + g2**2 + g6**2 - p.lam4**2)) / p.lam4**2,
            np.max(np.abs(d1 - 2 * np.pi * p.T * p.J * g2)) / scale,
            np.max(np.abs(d2 - (4 * p.T * f * g6 - 2 * np.pi * p.T * p.J * g1))) / scale,
            np.max(np.abs(d6 + 4 * p.T * f * g2)) / scale,
        )
    return worst <= 1e-9, f"worst relative defect {worst:.1e}"


def _residual(config):
    worst = 0.0
    for n in config.n_list:
        p = config.invariant_params(n)
        r = max(inv.invariant_residual(t, p) for t in np.linspace(0, 1, 201))
        worst = max(worst, r / (p.lam4 * p.T))
    return worst <= 1e-5, f"max residual / (lambda4 T) = {worst:.1e}"


def _spectrum(config):
    p = config.invariant_params(config.n_list[0])
    spectra = np.array([herm_eigensystem(inv.invariant_operator(t, p))[0] for t in np.linspace(0, 1, 101)])
    spread = np.max(np.ptp(spectra, axis=0))
    return spread <= 1e-9 * p.lam4, f"eigenvalue spread {spread:.1e}"


def _saturation(config):
    spec = config.adiabatic_spec()
    margin = ad.check_local_adiabatic(spec, lambda t: ad.s_qab(t, spec.alpha0_abs), 1001)
    fast = ad.check_local_adiabatic(
        spec, lambda t: ad.s_qab(t, spec.alpha0_abs), 1001, total_time=spec.total_time / 10
    )
    ok = 0.9 <= margin.max_ratio <= 1.01 and not fast.passed
    return ok, f"max ratio {margin.max_ratio:.6f}, compressed x10 {fast.max_ratio:.3f}"


def _tracking(config):
    run = run_nonadiabatic(config, 1)
    overlap = lr_overlap_diagnostic(run.trajectory, run.params)
    expect = invariant_expectation(run.trajectory, run.params)
    spread = float(np.ptp(expect))
    identity = abs(run.work.avg_work - run.work.identity_work)
    ok = overlap.min() >= 0.999 and spread <= 1e-6 * run.params.lam4 and identity <= 1e-9 * max(1.0, abs(run.work.avg_work))
    return ok, f"min overlap {overlap.min():.7f}, <I> spread {spread:.1e}, work identity gap {identity:.1e}"


def run_selftest(config: ScenarioConfig | None = None, seed: int = 7) -> list[Check]:
    config = config or ScenarioConfig()
    rng = np.random.default_rng(seed)
    battery: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
        ("pauli products commute/anticommute", _pauli_algebra),
        ("two independent su(2) algebras", _su2),
        ("Jacobi eigensystem reconstruction", lambda: _eigensystem(rng)),
        ("trace distance triangle inequality", lambda: _triangle(rng)),
        ("QAB schedule symmetry and inverse", _qab),
        ("g constraint and coefficient ODEs", lambda: _coefficients(config)),
        ("invariant defining-equation residual", lambda: _residual(config)),
        ("invariant spectrum constant in tau", lambda: _spectrum(config)),
        ("QAB saturates local adiabatic bound", lambda: _saturation(config)),
        ("eigenstate tracking and work identity (n=1)", lambda: _tracking(config)),
    ]
    results = []
    for name, check in battery:
        try:
            ok, detail = check()
        except Exception as exc:  # a crashing check is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(Check(name, bool(ok), detail))
    return results
