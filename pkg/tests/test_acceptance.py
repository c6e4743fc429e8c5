"""End-to-end acceptance checks, one test per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary lists a
PASS/FAIL line per criterion.
"""

import csv
import io
import math
import time

import numpy as np
import pytest

from infobounds.bounds import (
    cramer_rao_modified,
    distance_rate,
    expectation_inputs,
    generalized_qfi_direct,
    generalized_qfi_expanded,
    heisenberg_limit_modified,
    mandelstam_tamm_modified,
    margolus_levitin_modified,
)
from infobounds.cli import main
from infobounds.hilbert import FockOperator, StateVector, coherent_state, oscillator_hamiltonian
from infobounds.nonlocal_model import (
    energy_correction,
    energy_e0,
    fock_overlaps,
    quadrature_overlaps,
    tmin_bound,
    tmin_bound_unexpanded,
)
from infobounds.perturbation import DeformedOperator, pure_deformed_density, variance_parts

from instances import halving_ratio, random_instance, variance_oracle


def _read(path):
    text = path.read_text()
    rows = list(csv.DictReader(io.StringIO("\n".join(ln for ln in text.splitlines() if not ln.startswith("#")))))
    return text, rows


def _cli(tmp_path, name, *argv):
    out = tmp_path / name
    assert main([*argv, "--out", str(out), "--jobs", "1"]) == 0
    return _read(out)


def test_standard_limit_reductions(criterion):
    criterion(1, "eta = 0 reduces every bound to its standard form")
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    for k in range(100):
        dim = int(rng.integers(2, 9))
        dden, dop = random_instance(rng, dim, 0.0, pure=k % 4 == 0)
        # shift K so <K> > 0, as the Margolus-Levitin family requires
        K = dop.K.entries - (np.linalg.eigvalsh(dop.K.entries)[0] - 0.1) * np.eye(dim)
        dop = DeformedOperator(FockOperator(K), dop.K1, 0.0)
        hbar = float(rng.uniform(0.5, 2.0))
        nu = int(rng.integers(1, 20))
        rho = dden.rho.entries
        var, mean = variance_oracle(rho, K), float(np.trace(rho @ K).real)

        mt = mandelstam_tamm_modified(variance_parts(dop, dden), 0.0, hbar)
        assert mt == pytest.approx(math.pi * hbar / (2 * math.sqrt(var)), rel=1e-12)
        means = expectation_inputs(dop, dden)
        assert margolus_levitin_modified(*means, 0.0, hbar) == pytest.approx(math.pi * hbar / (2 * mean), rel=1e-12)
        assert heisenberg_limit_modified(*means, 0.0, hbar) == pytest.approx(hbar / mean, rel=1e-12)
        F = generalized_qfi_direct(dden, dop, hbar)
        assert cramer_rao_modified(F, nu) == pytest.approx(1 / math.sqrt(nu * F), rel=1e-12)
    assert time.perf_counter() - start < 5


def test_fig1_reproduction(tmp_path, criterion):
    criterion(2, "fig1 curves: pi-periodic, ground state in [-7/8, 13/8], alpha = 2 positive")
    start = time.perf_counter()
    # 1025 points on [0, 2 pi] put t + pi exactly 512 points later
    text, rows = _cli(tmp_path, "fig1.csv", "fig1", "--eta", "0.01", "--alpha-list", "0,0.5,1,2",
                      "--t-min", "0", "--t-max", "2*pi", "--t-steps", "1025")
    assert len(rows) == 4 * 1025
    for a in (0.0, 0.5, 1.0, 2.0):
        f = np.array([float(r["Bt_over_E0"]) for r in rows if float(r["alpha"]) == a])
        assert np.max(np.abs(f[:513] - f[512:])) <= 1e-12
    ground = np.array([float(r["Bt_over_E0"]) for r in rows if float(r["alpha"]) == 0.0])
    ts = np.array([float(r["t"]) for r in rows if float(r["alpha"]) == 0.0])
    assert abs(ground.min() - (-7 / 8)) <= 1e-10
    assert abs(ground.max() - 13 / 8) <= 1e-10
    np.testing.assert_allclose(ground, (3 + 10 * np.cos(4 * ts)) / 8, atol=1e-10)
    assert ground.min() < 0 < ground.max()

    _, dense = _cli(tmp_path, "dense.csv", "fig1", "--eta", "0.01", "--alpha-list", "2", "--t-steps", "10000")
    assert len(dense) == 10_000
    assert min(float(r["Bt_over_E0"]) for r in dense) > 0
    assert time.perf_counter() - start < 10


def test_expansion_order(criterion):
    criterion(3, "direct vs expanded QFI and expanded vs unexpanded t_min differ at O(eta^2)")
    ratios = []
    for seed in range(40):
        rng = np.random.default_rng(7000 + seed)
        dden, dop = random_instance(rng, int(rng.integers(2, 7)), 1e-3, pure=seed % 3 == 0)

        def qfi_gap(eta):
            op = dop.with_eta(eta)
            return generalized_qfi_direct(dden, op) - generalized_qfi_expanded(dden, op)

        ratios.append(halving_ratio(qfi_gap, 1e-3))
    for alpha in (0.0, 0.5, 1.0, 2.0):
        for t in np.linspace(0, math.pi, 25):
            ratios.append(halving_ratio(lambda e: tmin_bound(t, alpha, e) - tmin_bound_unexpanded(t, alpha, e), 1e-3))
    ratios = np.array(ratios)
    assert np.all((ratios >= 3.5) & (ratios <= 4.5)), ratios[(ratios < 3.5) | (ratios > 4.5)]


def test_qfi_properties(criterion):
    criterion(4, "F_g <= 4 Var_g, pure-state equality, coherent time-estimation F = 4")
    rng = np.random.default_rng(4)
    for k in range(200):
        dim = int(rng.integers(2, 7))
        eta = float(rng.uniform(-1e-2, 1e-2))
        dden, dop = random_instance(rng, dim, eta, pure=k % 2 == 0)
        var = variance_parts(dop, dden).total
        assert generalized_qfi_expanded(dden, dop) <= 4 * var * (1 + 1e-9)
    for _ in range(50):
        dden, dop = random_instance(rng, int(rng.integers(2, 7)), 0.0, pure=True)
        F = generalized_qfi_direct(dden, dop)
        assert F == pytest.approx(4 * variance_oracle(dden.rho.entries, dop.K.entries), rel=1e-9)
    dim = 48
    dden = pure_deformed_density(coherent_state(1.0, dim), StateVector(np.zeros(dim)))
    F = generalized_qfi_direct(dden, DeformedOperator(oscillator_hamiltonian(dim), FockOperator.zeros(dim), 0.0))
    assert abs(F - 4) <= 1e-8


def test_oracle_audit(tmp_path, criterion):
    criterion(5, "audit: E0 matched at eta = 0, Re<H1>/E1 = 2, best-fit a2 reported")
    start = time.perf_counter()
    _, zero = _cli(tmp_path, "audit0.csv", "audit", "--eta", "0", "--alpha-list", "0,0.5,1,1.5",
                   "--t-steps", "17", "--dim", "48")
    assert all(not r["flag"] for r in zero)
    assert max(abs(float(r["E0_residual"])) for r in zero) <= 1e-9

    text, rows = _cli(tmp_path, "audit.csv", "audit", "--eta", "0.01", "--alpha-list", "0,0.25,0.5,0.75,1,1.25,1.5",
                      "--t-min", "0", "--t-max", "pi", "--t-steps", "33", "--dim", "64")
    assert all(not r["flag"] for r in rows)
    ratios = np.array([float(r["ratio_ReH1_E1"]) for r in rows])
    assert np.max(np.abs(ratios - 2.0)) <= 1e-5
    assert "# best_fit_a2[norm] = " in text and "# best_fit_a2[cross] = " in text
    assert time.perf_counter() - start < 60


def test_dual_method_overlaps(criterion):
    criterion(6, "Fock and Gauss-Hermite overlaps agree to 1e-9")
    for alpha in (0.0, 0.5, 1.0):
        for t in (0.0, math.pi / 4, math.pi / 2):
            fock = fock_overlaps(t, alpha, 1.0, 48)
            quad = quadrature_overlaps(t, alpha, 1.0, 64)
            for key in ("psi0_psi1", "psi1_H_psi0"):
                assert abs(fock[key] - quad[key]) <= 1e-9, (t, alpha, key)


def test_distance_qfi_link(criterion):
    criterion(7, "finite-difference ds/dtheta equals Delta H / hbar")
    dim = 48
    H = oscillator_hamiltonian(dim)
    rng = np.random.default_rng(7)
    states = [coherent_state(a, dim) for a in (0.25, 0.5, 1.0, 1.5, 2.0)]
    for _ in range(5):
        amp = np.zeros(dim, dtype=complex)
        amp[:10] = rng.normal(size=10) + 1j * rng.normal(size=10)
        states.append(StateVector(amp).normalized())
    for psi in states:
        rho = np.outer(psi.amplitudes, psi.amplitudes.conj())
        for hbar in (1.0, 0.5):
            spread = math.sqrt(variance_oracle(rho, H.entries)) / hbar
            assert abs(distance_rate(psi, H, 0.0, step=1e-4, hbar=hbar) - spread) <= 1e-5


@pytest.mark.parametrize("command,argv", [
    ("fig1", ["--t-steps", "256"]),
    ("audit", ["--t-steps", "8", "--dim", "48", "--alpha-list", "0,1"]),
    ("bounds", ["--spec", "{spec}", "--eta", "0.01"]),
])
def test_determinism(tmp_path, criterion, command, argv):
    criterion(8, "repeated runs give byte-identical files")
    spec = tmp_path / "nl.spec"
    spec.write_text("model = nonlocal\nstate = coherent:1.0\nt = 0.5\n")
    argv = [a.replace("{spec}", str(spec)) for a in argv]
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}.csv"
        assert main([command, *argv, "--out", str(out), "--jobs", "1"]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
