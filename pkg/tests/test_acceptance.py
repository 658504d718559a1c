"""Acceptance gate: one test per criterion, each printing a single PASS/FAIL line.

Every check runs at the tolerance the criterion states. Criteria whose
stated values disagree with independently computed ones are left failing.

Run alone with ``pytest tests/test_acceptance.py -v -s`` to see the lines
inline; they are also repeated in the terminal summary.
"""

import math
import time

import mpmath
import numpy as np
import pytest

from kerrcomb.cli import format_csv
from kerrcomb.cnoidal import base_wave, base_wave_derivatives, base_wave_params
from kerrcomb.elliptic import complete_integrals, jacobi_sn_cn_dn
from kerrcomb.errors import AdmissibilityError, NumericalError
from kerrcomb.evolve import (eigenvector_perturbation, evolve_to, measure_growth_rate,
                             noise_perturbation, splitting_order_ratio, start_run, step)
from kerrcomb.grid_ops import assemble_full_linearization, assemble_scalar_operator
from kerrcomb.identities import (closed_form_ant1, closed_form_ant4, identity_report,
                                 inner_products_via_inverse, rofe_beketov_integral)
from kerrcomb.perturbation import (base_data, first_order_correction, first_order_profile,
                                   leading_coefficients, lemma_expansions, predicted_eigenvalues)
from kerrcomb.profile_solver import (admissibility_bound, continue_branch, newton_solve,
                                     solve_profile, stationary_residual)
from kerrcomb.spectra import full_spectrum, krein_signature, translational_eigenvalue

RESULTS = []
KAPPA = 0.5
ALPHA0 = 0.7


def verdict(number, title, checks):
    """Record and print one line; ``checks`` is a list of ``(label, ok, detail)``."""
    ok = all(c[1] for c in checks)
    failed = [f"{label} [{detail}]" for label, good, detail in checks if not good]
    passed = [f"{label} [{detail}]" for label, good, detail in checks if good]
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}"
    line += " | " + ("; ".join(failed) if failed else "; ".join(passed))
    RESULTS.append(line)
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def grid():
    return base_wave(KAPPA, 256).grid


def test_criterion_01_elliptic_substrate():
    checks = []
    ks = np.linspace(0.01, 0.99, 50)
    worst = 0.0
    for k in ks:
        K, E = complete_integrals(k)
        Kp, Ep = complete_integrals(math.sqrt(1 - k * k))
        worst = max(worst, abs(E * Kp + Ep * K - K * Kp - math.pi / 2))
    checks.append(("Legendre relation on 50 moduli", worst < 1e-12, f"max {worst:.2e}"))

    rng = np.random.default_rng(1)
    u = rng.uniform(-50, 50, 1000)
    k = rng.uniform(0, 1, 1000)
    w1 = w2 = 0.0
    for ui, ki in zip(u, k):
        sn, cn, dn = jacobi_sn_cn_dn(ui, ki)
        w1 = max(w1, abs(sn * sn + cn * cn - 1))
        w2 = max(w2, abs(dn * dn + ki * ki * sn * sn - 1))
    checks.append(("sn^2+cn^2-1", w1 < 1e-12, f"max {w1:.2e}"))
    checks.append(("dn^2+k^2 sn^2-1", w2 < 1e-12, f"max {w2:.2e}"))

    K, E = complete_integrals(0.5)
    with mpmath.workdps(40):
        kp = mpmath.sqrt(1 - mpmath.mpf("0.25"))
        K_ref = mpmath.pi / (2 * mpmath.agm(1, kp))
        E_ref = mpmath.ellipe(mpmath.mpf("0.25"))
    checks.append(("K(0.5) vs AGM oracle", abs(K - float(K_ref)) < 1e-6 and abs(K - 1.685750) < 1e-6,
                   f"{K:.9f}"))
    checks.append(("E(0.5) vs oracle", abs(E - float(E_ref)) < 1e-6 and abs(E - 1.467462) < 1e-6,
                   f"{E:.9f}"))
    verdict(1, "elliptic substrate", checks)


def test_criterion_02_base_wave():
    checks = []
    for k in (0.3, 0.5, 0.7, 0.9):
        w = base_wave(k, 256)
        g = w.grid
        res = float(np.max(np.abs(stationary_residual(g, w.phi1, w.phi2, 0.0, 0.0))))
        mass = g.integrate(w.phi1)
        amp = base_wave_params(k).amp
        norm2 = g.inner(w.phi1, w.phi1)
        expect = 2 * amp * complete_integrals(k)[1]
        checks.append((f"residual k={k}", res < 1e-8, f"{res:.1e}"))
        checks.append((f"<1,phi0>=pi k={k}", abs(mass - math.pi) < 1e-10, f"{abs(mass - math.pi):.1e}"))
        checks.append((f"||phi0||^2=2 amp E k={k}", abs(norm2 - expect) < 1e-10,
                       f"{abs(norm2 - expect):.1e}"))
    verdict(2, "base wave", checks)


def test_criterion_03_kernel_structure(grid):
    bd = base_data(KAPPA)
    phi0, dphi0 = bd.phi0, bd.dphi0
    wm, vm = np.linalg.eigh(bd.lminus.entries)
    j = int(np.argmin(np.abs(wm)))
    cos_m = abs(vm[:, j] @ phi0) / np.linalg.norm(phi0)
    wp, vp = np.linalg.eigh(bd.lplus.entries)
    nneg = int(np.sum(wp < -1e-8))
    jp = int(np.argmin(np.abs(wp)))
    cos_p = abs(vp[:, jp] @ dphi0) / np.linalg.norm(dphi0)
    res = float(np.linalg.norm(bd.lplus.entries @ dphi0) / np.linalg.norm(dphi0))
    checks = [
        ("|lambda0(L-)|", abs(wm[j]) < 1e-8, f"{abs(wm[j]):.1e}"),
        ("L- kernel along phi0", 1 - cos_m < 1e-8, f"1-cos {1 - cos_m:.1e}"),
        ("L+ negative count", nneg == 1, str(nneg)),
        ("L+ zero eigenvalue", abs(wp[jp]) < 1e-6, f"{abs(wp[jp]):.1e}"),
        ("L+ kernel along phi0'", 1 - cos_p < 1e-8 and res < 1e-6, f"residual {res:.1e}"),
    ]
    verdict(3, "kernel structure at h=0", checks)


def test_criterion_04_identity_oracles():
    checks = []
    for k in (0.3, 0.5, 0.7, 0.9):
        num, ant2, ant3 = inner_products_via_inverse(k)
        closed = closed_form_ant1(k)
        rel = abs(num - closed) / abs(closed)
        checks.append((f"ant1 numeric vs closed k={k}", rel < 1e-6,
                       f"numeric {num:.6f} closed {closed:.6f} rel {rel:.2e}"))
        checks.append((f"|<L+^-1[1],phi0>| k={k}", abs(ant2) < 1e-8, f"{abs(ant2):.1e}"))
        checks.append((f"|<L+^-1[1],phi0 phi0'^2>| k={k}", abs(ant3) < 1e-8, f"{abs(ant3):.1e}"))
    c05 = closed_form_ant1(0.5)
    checks.append(("ant1 closed form at 0.5", abs(c05 + 0.2806) < 5e-5, f"{c05:.6f}"))

    rows = []
    for k in np.linspace(0.05, 0.95, 19):
        rep = identity_report(float(k))
        rows.append(rep.csv_row())
    worst = max(abs(r["ant4_numeric"] - r["ant4_closed"]) for r in rows)
    checks.append(("ant4 quadrature vs 2K-(2-k^2)/(1-k^2)E", worst < 1e-8,
                   f"max diff {worst:.3e}; at 0.5 quadrature {rows[9]['ant4_numeric']:.6f} "
                   f"closed {rows[9]['ant4_closed']:.6f}"))
    neg = all(r["ant4_numeric"] < 0 for r in rows)
    checks.append(("ant4 quadrature negative on [0.05,0.95]", neg,
                   f"max {max(r['ant4_numeric'] for r in rows):.4f}"))
    csv_text = format_csv(rows)
    checks.append(("identity CSV", csv_text.count("\n") == 20, f"{csv_text.count(chr(10)) - 1} rows"))
    verdict(4, "identity oracles", checks)


def test_criterion_05_undamped_lemma(grid):
    bd = base_data(KAPPA)
    slope = bd.mass / bd.norm2
    h = 1e-4
    prof = continue_branch(grid, KAPPA, 0.0, 1, [h])[0]
    lam = np.linalg.eigvalsh(assemble_scalar_operator(grid, prof.phi1, "Lminus").entries)[0]
    rel = abs(lam / h / slope - 1)
    errs = []
    for hh in (1e-3, 5e-4):
        p = continue_branch(grid, KAPPA, 0.0, 1, [hh])[0]
        errs.append(grid.norm(p.phi1 - bd.phi0 - hh * bd.w))
    ratio = errs[0] / errs[1]
    checks = [
        ("lambda0(L-,h)/h at h=1e-4", rel < 5e-3 and abs(lam / h / 1.41601 - 1) < 5e-3,
         f"{lam / h:.6f} vs {slope:.6f}, rel {rel:.1e}"),
        ("phi_h Richardson ratio", 3.5 <= ratio <= 4.5, f"{ratio:.3f}"),
    ]
    verdict(5, "undamped branch lemma", checks)


def test_criterion_06_undamped_instability(grid):
    bd = base_data(KAPPA)
    ant1 = grid.inner(bd.lplus_inv_phi0, bd.phi0)
    coeff = math.sqrt(bd.mass / -ant1)
    rates = {}
    reports = {}
    for h in (1e-5, 1e-4, 1e-3):
        p = continue_branch(grid, KAPPA, 0.0, 1, [h])[0]
        _, jlh = assemble_full_linearization(grid, p)
        rep = full_spectrum(jlh, 0.0)
        reports[h] = rep
        rates[h] = rep.unstable_real
    rep = reports[1e-4]
    single = all(len(r) == 1 for r in rates.values())
    lam = rep.unstable_real[0]
    ratio = lam / math.sqrt(1e-4)
    rel = abs(ratio / coeff - 1)
    hs = sorted(rates)
    expo = float(np.polyfit(np.log(hs), np.log([rates[h][0] for h in hs]), 1)[0])
    # the Hamiltonian pairing forces -lambda_h; the rest must sit on the imaginary axis
    mu = rep.eigenvalues_mu
    rest = [m for m in mu if abs(m - lam) > 1e-8 and abs(m + lam) > 1e-8]
    off = max(abs(m.real) for m in rest)
    checks = [
        ("single real unstable eigenvalue", single, str({h: len(r) for h, r in rates.items()})),
        ("lambda_h/sqrt(h) vs sqrt(<1,phi0>/-<L+^-1 phi0,phi0>)", rel < 0.02,
         f"{ratio:.4f} vs {coeff:.4f}, rel {rel:.3f}"),
        ("fitted exponent", 0.45 <= expo <= 0.55, f"{expo:.4f}"),
        ("other eigenvalues imaginary", off < 1e-6, f"max |Re| {off:.1e}"),
    ]
    note = abs(coeff - 3.346) / 3.346
    checks.append(("tabulated 3.346 (non-gating note)", True,
                   f"formula evaluates to {coeff:.4f}, {100 * note:.1f}% from 3.346"))
    verdict(6, "undamped instability", checks)


def test_criterion_07_branch_existence(grid):
    checks = []
    hs = [1e-5, 1e-4, 5e-4, 1e-3]
    for sign in (-1, 1):
        try:
            profs = continue_branch(grid, KAPPA, ALPHA0, sign, hs)
            worst = max(p.residual_norm() for p in profs)
            checks.append((f"Newton branch sign {sign:+d}", worst < 1e-10, f"max residual {worst:.1e}"))
        except NumericalError as exc:
            checks.append((f"Newton branch sign {sign:+d}", False, str(exc)))
        rep = first_order_correction(KAPPA, ALPHA0, sign)
        dev = []
        for h in (1e-3, 5e-4):
            seed = first_order_profile(rep, h)
            prof = newton_solve(grid, seed, h, ALPHA0)
            dev.append(grid.norm(prof.phi1 - seed.phi1) + grid.norm(prof.phi2 - seed.phi2))
        r = dev[0] / dev[1]
        checks.append((f"expansion Richardson ratio sign {sign:+d}", 3.5 <= r <= 4.5, f"{r:.3f}"))
        a0, b0, s0, _ = leading_coefficients(KAPPA, ALPHA0, sign)
        bd = base_data(KAPPA)
        e1 = abs(a0 * a0 + b0 * b0 - 1)
        e2 = abs(s0 * s0 + ALPHA0 ** 2 - (bd.mass / bd.norm2) ** 2)
        checks.append((f"a0^2+b0^2=1 sign {sign:+d}", e1 < 1e-10, f"{e1:.1e}"))
        checks.append((f"sigma0^2+alpha0^2=bound^2 sign {sign:+d}", e2 < 1e-10, f"{e2:.1e}"))
    bound = admissibility_bound(KAPPA)
    rejected = []
    for a in (bound * (1 + 1e-9), 1.4161, 2.0):
        try:
            leading_coefficients(KAPPA, a, -1)
            rejected.append(False)
        except AdmissibilityError:
            rejected.append(True)
        try:
            newton_solve(grid, base_wave(KAPPA, 256), 1e-3, a)
            rejected.append(False)
        except AdmissibilityError:
            rejected.append(True)
    accepted = leading_coefficients(KAPPA, bound * (1 - 1e-9), -1) is not None
    checks.append(("admissibility threshold", all(rejected) and accepted,
                   f"rejects above {bound:.7f}"))
    checks.append(("tabulated 1.41601 (non-gating note)", True,
                   f"computed bound {bound:.7f}, {abs(bound / 1.41601 - 1):.1e} relative"))
    verdict(7, "branch existence", checks)


@pytest.fixture(scope="module")
def stable_spectrum(grid):
    prof = continue_branch(grid, KAPPA, ALPHA0, -1, [1e-3])[0]
    lh, jlh = assemble_full_linearization(grid, prof)
    return prof, lh, jlh, full_spectrum(jlh, prof.alpha, lh=lh, grid=grid)


def test_criterion_08_stable_branch(stable_spectrum):
    prof, lh, jlh, rep = stable_spectrum
    alpha = prof.alpha
    lam = rep.eigenvalues_lambda
    n0 = int(np.sum(np.abs(lam) < 1e-5))
    n2 = int(np.sum(np.abs(lam + 2 * alpha) < 1e-5))
    special = (np.abs(lam) < 1e-5) | (np.abs(lam + 2 * alpha) < 1e-5)
    dev = float(np.max(np.abs(lam[~special].real + alpha)))
    mu0 = predicted_eigenvalues(KAPPA, ALPHA0, -1)[1]
    target = mu0 * math.sqrt(prof.h)
    nearest = rep.eigenvalues_mu[np.argmin(np.abs(rep.eigenvalues_mu - target))]
    sign = krein_signature(jlh, lh, nearest)
    checks = [
        ("one eigenvalue near 0", n0 == 1, str(n0)),
        ("one eigenvalue near -2 alpha", n2 == 1, str(n2)),
        ("|Re lambda + alpha| for the rest", dev < 1e-5, f"{dev:.1e}"),
        ("Krein sign of +-i mu0 sqrt(h)", sign == -1, f"mu {nearest:.5f} sign {sign}"),
        ("n_even(L_h)", rep.n_even == 2, str(rep.n_even)),
    ]
    verdict(8, "stable branch spectrum", checks)


def test_criterion_09_unstable_branch(grid):
    h = 1e-4
    prof = continue_branch(grid, KAPPA, ALPHA0, 1, [h])[0]
    _, jlh = assemble_full_linearization(grid, prof)
    rep = full_spectrum(jlh, prof.alpha)
    mu0 = predicted_eigenvalues(KAPPA, ALPHA0, 1)[1].real
    pred = mu0 * math.sqrt(h) - prof.alpha
    single = len(rep.unstable_real) == 1 and not any(c == "unstable_complex" for c in rep.classes)
    lam = rep.unstable_real[0] if rep.unstable_real else float("nan")
    rel = abs(lam / pred - 1)
    checks = [
        ("single real unstable eigenvalue", single, str(len(rep.unstable_real))),
        ("lambda vs mu0 sqrt(h) - alpha", rel < 0.05, f"{lam:.6f} vs {pred:.6f}, rel {rel:.3f}"),
    ]
    verdict(9, "unstable branch", checks)


def test_criterion_10_translational_mode(grid):
    slope = predicted_eigenvalues(KAPPA, ALPHA0, -1)[4]
    hs = np.geomspace(1e-4, 1e-2, 5)
    vals = []
    for p in continue_branch(grid, KAPPA, ALPHA0, -1, hs):
        lh, _ = assemble_full_linearization(grid, p)
        vals.append(translational_eigenvalue(lh, grid))
    fit = float(np.polyfit(np.log(hs), np.log(np.abs(vals)), 1)[0])
    checks = [
        ("first-order slope via ant3", abs(slope) < 1e-8, f"{abs(slope):.1e}"),
        ("translational eigenvalue log-log slope", 1.8 <= fit <= 2.2, f"{fit:.4f}"),
    ]
    verdict(10, "translational eigenvalue", checks)


def test_criterion_11_nonexistence(grid):
    rng = np.random.default_rng(11)
    outcomes = {"zero": 0, "no convergence": 0, "nontrivial": 0}
    for _ in range(20):
        scale = rng.uniform(0.1, 2.0)
        p1 = scale * rng.standard_normal(grid.n)
        p2 = scale * rng.standard_normal(grid.n)
        try:
            prof = solve_profile(grid, p1, p2, 0.0, 0.1, branch="small")
        except NumericalError:
            outcomes["no convergence"] += 1
            continue
        key = "zero" if np.max(np.abs(prof.as_complex)) < 1e-10 else "nontrivial"
        outcomes[key] += 1
    checks = [("20 random Newton runs at h=0, alpha=0.1", outcomes["nontrivial"] == 0, str(outcomes))]
    verdict(11, "nonexistence without pump", checks)


def test_criterion_12_dynamics(grid):
    start = time.perf_counter()
    checks = []
    # unstable branch, seeded along the most unstable eigenvector
    prof = continue_branch(grid, KAPPA, ALPHA0, 1, [1e-3])[0]
    _, jlh = assemble_full_linearization(grid, prof)
    w, v = np.linalg.eig(jlh.entries)
    j = int(np.argmax(w.real))
    lam_max = float(w[j].real - prof.alpha)
    ref = prof.as_complex
    du = eigenvector_perturbation(grid, v[:, j], 1e-8)
    t_end = math.log(1e4) / lam_max
    run = start_run(grid, ref + du, prof.h, prof.alpha, 1e-3, reference=ref, twin=True)
    run = step(run, int(round(t_end / 1e-3)))
    rate = measure_growth_rate(run.history)
    rel = abs(rate / lam_max - 1)
    checks.append(("unstable growth rate vs max Re lambda", rel < 0.05,
                   f"{rate:.5f} vs {lam_max:.5f}, rel {rel:.3f}"))

    # stable branch: the conformal-symplectic scheme keeps the damping exact at larger dt
    prof = continue_branch(grid, KAPPA, ALPHA0, -1, [1e-3])[0]
    alpha = prof.alpha
    ref = prof.as_complex
    dt = 1e-2
    run = start_run(grid, ref + noise_perturbation(grid, 1e-6, 0, max_mode=4), prof.h, alpha, dt,
                    reference=ref, twin=True)
    run = step(run, int(round(5.0 / alpha / dt)))
    rate = measure_growth_rate(run.history, expected=-alpha)
    checks.append(("stable decay rate in [-1.1a, -0.9a]", -1.1 * alpha <= rate <= -0.9 * alpha,
                   f"{rate / alpha:.4f} alpha"))

    wave = base_wave(KAPPA, 256)
    u = evolve_to(grid, wave.as_complex, 0.0, 0.0, 1e-3, 10.0)
    drift = float(np.max(np.abs(u - wave.as_complex)))
    u_fine = evolve_to(grid, wave.as_complex, 0.0, 0.0, 1e-4, 10.0)
    drift_fine = float(np.max(np.abs(u_fine - wave.as_complex)))
    checks.append(("h=alpha=0 steady state over t=10 at dt=1e-3", drift < 1e-7,
                   f"max |u-phi0| {drift:.2e}; dt=1e-4 gives {drift_fine:.1e}"))

    u0 = wave.as_complex + noise_perturbation(grid, 1e-2, 1)
    ratio = splitting_order_ratio(grid, u0, 1e-3, ALPHA0 * 1e-3, 1e-3, 1.0)[0]
    checks.append(("splitting order ratio", 3.5 <= ratio <= 4.5, f"{ratio:.3f}"))
    elapsed = time.perf_counter() - start
    checks.append(("runtime", elapsed <= 60.0, f"{elapsed:.1f} s"))
    verdict(12, "dynamics", checks)
