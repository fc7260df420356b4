import json
import math

import numpy as np
import pytest

from qcu.errors import InsufficientDataError, ValidationError
from qcu.synth import CUParams, compose_w
from qcu.tomo import (
    CONFIGURATIONS,
    STATES,
    TABLE_COLUMNS,
    ChoiMatrix,
    Noise,
    Tomogram,
    choi_of_unitary,
    depolarized_choi,
    expected_probabilities,
    process_fidelity,
    purity,
    reconstruct_ml,
    score,
    simulate_tomography,
    table_report,
)

from conftest import TABLE_ROWS, random_unitary

PI = math.pi
H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def test_choi_of_identity():
    c = choi_of_unitary(np.eye(2)).matrix
    phi = np.array([1, 0, 0, 1])
    assert np.allclose(c, np.outer(phi, phi))
    assert np.trace(c).real == pytest.approx(2)
    assert np.linalg.matrix_rank(c) == 1


def test_choi_of_z_rotation():
    z = np.diag([-1j, 1j])
    vec = np.array([-1j, 0, 0, 1j])
    assert np.allclose(choi_of_unitary(z).matrix, np.outer(vec, vec.conj()))


def test_choi_properties(rng):
    for _ in range(50):
        c = choi_of_unitary(random_unitary(rng))
        w = np.linalg.eigvalsh(c.matrix)
        assert w.min() > -1e-10 and np.sum(w > 1e-10) == 1
        assert np.trace(c.matrix).real == pytest.approx(2)
        assert purity(c) == pytest.approx(1)
        assert process_fidelity(c, c) == pytest.approx(1)
    with pytest.raises(ValidationError):
        choi_of_unitary(0.5 * np.eye(2))


def test_probabilities_are_born_rule(rng):
    u = random_unitary(rng)
    probs = expected_probabilities(choi_of_unitary(u))
    for k, (i, m) in enumerate(CONFIGURATIONS):
        assert probs[k] == pytest.approx(abs(np.vdot(STATES[m], u @ STATES[i])) ** 2, abs=1e-12)


def test_noiseless_counts():
    t = simulate_tomography(np.eye(2), 1000)
    assert t.count("H", "H") == 1000 and t.count("H", "V") == 0
    t = simulate_tomography(H, 1000)
    assert t.count("H", "D") == pytest.approx(1000) and t.count("H", "A") == 0
    assert len(t.configurations) == 36


def test_noise_parsing():
    assert Noise.parse("none") == Noise()
    assert Noise.parse("poisson") == Noise(sample=True)
    assert Noise.parse("depolarizing=0.1,poisson") == Noise(0.1, True)
    assert Noise.parse("depolarizing=0.25").describe() == "depolarizing=0.25"
    for bad in ("gaussian", "depolarizing=2"):
        with pytest.raises(ValidationError):
            Noise.parse(bad)


def test_seeded_sampling_is_deterministic(rng):
    u = random_unitary(rng)
    a = simulate_tomography(u, 500, "poisson", seed=3)
    b = simulate_tomography(u, 500, "poisson", seed=3)
    c = simulate_tomography(u, 500, "poisson", seed=4)
    assert np.array_equal(a.counts, b.counts) and not np.array_equal(a.counts, c.counts)
    assert np.array_equal(reconstruct_ml(a).matrix, reconstruct_ml(b).matrix)
    assert np.all(a.counts <= 500 * (1 + 5 / math.sqrt(500)))


def test_tomogram_json_round_trip(rng):
    t = simulate_tomography(random_unitary(rng), 100, "poisson", seed=1)
    back = Tomogram.from_dict(json.loads(json.dumps(t.to_dict())))
    assert back.configurations == t.configurations and np.array_equal(back.counts, t.counts)


def test_reconstruct_identity():
    est = reconstruct_ml(simulate_tomography(np.eye(2), 1000))
    assert np.trace(est.matrix).real == pytest.approx(2)
    assert process_fidelity(est, choi_of_unitary(np.eye(2))) > 0.9999


def test_reconstruct_random_unitaries(rng):
    for _ in range(50):
        u = random_unitary(rng)
        s = score(reconstruct_ml(simulate_tomography(u, 10_000)), u)
        assert s.fidelity > 0.999 and s.purity > 0.999


def test_reconstruct_sampled(rng):
    u = random_unitary(rng)
    s = score(reconstruct_ml(simulate_tomography(u, 100_000, "poisson", seed=2)), u)
    assert s.fidelity > 0.999


def test_reconstruct_depolarized(rng):
    u = random_unitary(rng)
    est = reconstruct_ml(simulate_tomography(u, 10_000, "depolarizing=0.1"))
    assert purity(est) < 1 - 1e-3
    # exact data: the estimate is the depolarized Choi matrix itself
    assert np.allclose(est.matrix, depolarized_choi(u, 0.1).matrix, atol=1e-6)


def test_reconstruct_table_row5():
    (phi, theta, alpha), _, _ = TABLE_ROWS[4]
    w = compose_w(CUParams(alpha, theta, phi))
    assert score(reconstruct_ml(simulate_tomography(w, 10_000)), w).fidelity > 0.999


def test_likelihood_never_decreases(rng):
    for noise in ("poisson", "depolarizing=0.3,poisson"):
        history = []
        reconstruct_ml(simulate_tomography(random_unitary(rng), 200, noise, seed=9), history=history)
        assert len(history) > 1
        assert all(b >= a for a, b in zip(history, history[1:]))


def test_reconstruct_errors():
    t = simulate_tomography(np.eye(2), 10)
    with pytest.raises(InsufficientDataError):
        reconstruct_ml(Tomogram(t.configurations, np.zeros(36), 10))
    with pytest.raises(ValidationError):
        reconstruct_ml(Tomogram(t.configurations[:35], t.counts[:35], 10))


def test_fidelity_and_purity_closed_forms(rng):
    ideal = choi_of_unitary(random_unitary(rng))
    mixed = ChoiMatrix(np.eye(4) / 2)
    assert process_fidelity(mixed, ideal) == pytest.approx(0.25)
    assert purity(mixed) == pytest.approx(0.25)
    with pytest.raises(ValidationError):
        process_fidelity(ideal, mixed)
    # depolarizing(s): eigenvalues (1 - s) + s/4 once and s/4 three times, on the normalised state
    s = 0.5
    lam = [(1 - s) + s / 4] + [s / 4] * 3
    assert purity(depolarized_choi(np.eye(2), s)) == pytest.approx(sum(x * x for x in lam))
    assert purity(depolarized_choi(np.eye(2), s)) == pytest.approx(0.4375)


def test_choi_validation():
    with pytest.raises(ValidationError):
        ChoiMatrix(np.diag([1, -1, 0, 0]))
    with pytest.raises(ValidationError):
        ChoiMatrix(np.zeros((4, 4)))
    with pytest.raises(ValidationError):
        ChoiMatrix(np.eye(2))


def table_rows():
    return [CUParams(alpha=a, theta=t, phi=p) for (p, t, a), _, _ in TABLE_ROWS]


def test_table_report_noiseless():
    p_succ = [row[2] for row in TABLE_ROWS]
    rep = table_report(table_rows(), 10_000, "none", seed=0, p_succ=p_succ)
    for row, (_, expected, p) in zip(rep.rows, TABLE_ROWS):
        assert min(row.F_off, row.P_off, row.F_on, row.P_on) > 0.999
        assert (row.omega, row.gamma, row.delta) == pytest.approx(expected, abs=1e-12)
        assert row.p_succ == p
    lines = rep.to_csv().splitlines()
    assert lines[0] == ",".join(TABLE_COLUMNS) and len(lines) == 7
    d = rep.to_dict()
    assert d["noise"] == "none" and d["rows"][0]["choi_on"]["rows"] == 4


def test_table_report_poisson_lowers_fidelity():
    p_succ = [row[2] for row in TABLE_ROWS]
    clean = table_report(table_rows(), 1000, "none", seed=0, p_succ=p_succ)
    noisy = table_report(table_rows(), 1000, "poisson", seed=0, p_succ=p_succ)
    f_clean = np.mean([r.F_on for r in clean.rows] + [r.F_off for r in clean.rows])
    f_noisy = np.mean([r.F_on for r in noisy.rows] + [r.F_off for r in noisy.rows])
    assert f_noisy < f_clean
    with pytest.raises(ValidationError):
        table_report(table_rows(), 10, p_succ=[1.0])
