import numpy as np
import pytest

from evadex.dataset import PerturbationRecord
from evadex.errors import EmptyDataset, InvalidTarget, ZeroPerturbations
from evadex.explain import ExplanationSet
from evadex.metrics import (
    DIAGNOSED,
    SampleDiagnosis,
    ape,
    hcr,
    neutral_rate,
    pspe,
    pspe_targeted,
    pspp,
    pspp_targeted,
)


def make_case(weights, perturbed, y_true, evasive=True, adversarial=None, sid=0):
    """Explanation + record pair from a (k, d) weight matrix."""
    weights = np.asarray(weights, dtype=np.float64)
    k = weights.shape[0]
    if adversarial is None:
        adversarial = (y_true + 1) % k if evasive else y_true
    expl = ExplanationSet(sample_id=sid, weights=weights, intercepts=np.zeros(k))
    rec = PerturbationRecord(
        sample_id=sid,
        perturbed_indices=np.asarray(perturbed, dtype=np.int64),
        deltas=np.ones(len(perturbed)),
        evasive=evasive,
        original_label=y_true,
        adversarial_label=adversarial,
    )
    return rec, expl


# ---------------------------------------------------------------- independent oracle


def oracle_counts(row, perturbed, eps):
    pos = neg = neut = 0
    for j in perturbed:
        w = row[j]
        if w > eps:
            pos += 1
        elif w < -eps:
            neg += 1
        else:
            neut += 1
    return pos, neg, neut


def oracle_pspp(weights, y_true, perturbed, eps):
    P = len(perturbed)
    k = len(weights)
    toward_others = 0.0
    for yi in range(k):
        if yi == y_true:
            continue
        toward_others += oracle_counts(weights[yi], perturbed, eps)[0] / P
    neg_true = oracle_counts(weights[y_true], perturbed, eps)[1]
    return 0.5 * (toward_others / (k - 1) + neg_true / P)


def oracle_pspe(weights, y_true, perturbed, eps):
    return oracle_counts(weights[y_true], perturbed, eps)[0] / len(perturbed)


# ---------------------------------------------------------------- worked fixtures


def test_pspp_binary_fixture_half():
    # weights toward the true label over the perturbed set: [+0.2, -0.1, 0.0, -0.3]
    toward_true = np.array([0.2, -0.1, 0.0, -0.3])
    weights = np.stack([toward_true, -toward_true])
    rec, expl = make_case(weights, [0, 1, 2, 3], y_true=0)
    assert pspp(rec, expl, 0.0) == 0.5


def test_pspe_binary_fixture_quarter():
    toward_true = np.array([0.2, -0.1, 0.0, -0.3])
    weights = np.stack([toward_true, -toward_true])
    rec, expl = make_case(weights, [0, 1, 2, 3], y_true=0)
    assert pspe(rec, expl, 0.0) == 0.25


def test_pspp_all_negative_is_one():
    toward_true = np.array([-0.4, -0.2, -0.9])
    weights = np.stack([toward_true, -toward_true])
    rec, expl = make_case(weights, [0, 1, 2], y_true=0)
    assert pspp(rec, expl, 0.0) == 1.0
    assert pspe(rec, expl, 0.0) == 0.0


def test_pspe_all_positive_is_one():
    toward_true = np.array([0.4, 0.2, 0.9])
    weights = np.stack([toward_true, -toward_true])
    rec, expl = make_case(weights, [0, 1, 2], y_true=0)
    assert pspe(rec, expl, 0.0) == 1.0


def test_pspp_three_class_fixture():
    # P=2; signs toward y_true: (+,-); toward y_a: (+,+); toward y_b: (-,+)
    weights = np.array(
        [
            [0.5, -0.5],  # y_true = 0
            [0.4, 0.6],  # y_a
            [-0.2, 0.3],  # y_b
        ]
    )
    rec, expl = make_case(weights, [0, 1], y_true=0, adversarial=1)
    assert pspp(rec, expl, 0.0) == 0.625
    assert oracle_pspp(weights, 0, [0, 1], 0.0) == 0.625


def test_zero_perturbations_error():
    weights = np.array([[0.1], [-0.1]])
    rec, expl = make_case(weights, [], y_true=0, evasive=False)
    with pytest.raises(ZeroPerturbations):
        pspp(rec, expl, 0.0)
    with pytest.raises(ZeroPerturbations):
        pspe(rec, expl, 0.0)


# ---------------------------------------------------------------- targeted variants


def test_targeted_all_positive():
    weights = np.array([[0.0, 0.0], [0.8, 0.2]])
    rec, expl = make_case(weights, [0, 1], y_true=0, adversarial=1)
    assert pspp_targeted(rec, expl, 1, 0.0) == 1.0
    assert pspe_targeted(rec, expl, 1, 0.0) == 0.0


def test_targeted_fixture_thirds():
    weights = np.array([[0.0, 0.0, 0.0], [0.5, -0.5, 0.0]])
    rec, expl = make_case(weights, [0, 1, 2], y_true=0, adversarial=1)
    assert pspp_targeted(rec, expl, 1, 0.0) == pytest.approx(1 / 3)
    assert pspe_targeted(rec, expl, 1, 0.0) == pytest.approx(1 / 3)


def test_targeted_invalid_target():
    weights = np.array([[0.1, 0.2], [-0.1, -0.2]])
    rec, expl = make_case(weights, [0], y_true=0)
    with pytest.raises(InvalidTarget):
        pspp_targeted(rec, expl, 0, 0.0)


def test_targeted_matches_untargeted_terms_for_binary():
    rng = np.random.default_rng(0)
    for _ in range(300):
        toward_true = rng.normal(size=4)
        weights = np.stack([toward_true, -toward_true])
        P = int(rng.integers(1, 5))
        idx = np.sort(rng.choice(4, size=P, replace=False))
        rec, expl = make_case(weights, idx, y_true=0, adversarial=1)
        # complement convention: pspp equals the targeted precision toward the
        # other class, so both induce the same high-correlation cut at any tau
        assert pspp(rec, expl, 0.0) == pspp_targeted(rec, expl, 1, 0.0)
        for tau in (0.1, 0.5, 0.9):
            assert (pspp(rec, expl, 0.0) > tau) == (pspp_targeted(rec, expl, 1, 0.0) > tau)


# ---------------------------------------------------------------- hcr / ape


def make_diag(pspp_v, pspe_v, evasive, sid=0):
    return SampleDiagnosis(
        sample_id=sid, status=DIAGNOSED, pspp=pspp_v, pspe=pspe_v, neutral_rate=0.0, evasive=evasive
    )


def test_hcr_fixture():
    rows = [
        make_diag(0.9, 0.1, True, 0),
        make_diag(0.6, 0.2, True, 1),
        make_diag(0.4, 0.3, True, 2),
        make_diag(0.8, 0.0, False, 3),
    ]
    assert hcr(rows, tau=0.5) == 0.5


def test_hcr_all_evasive_full():
    rows = [make_diag(1.0, 0.0, True, i) for i in range(5)]
    assert hcr(rows, tau=0.5) == 1.0


def test_hcr_strict_threshold():
    rows = [make_diag(0.5, 0.0, True, 0)]
    assert hcr(rows, tau=0.5) == 0.0  # pspp == tau counts low-correlated


def test_hcr_evasive_only_denominator():
    rows = [make_diag(0.9, 0.0, True, 0), make_diag(0.9, 0.0, False, 1)]
    assert hcr(rows, tau=0.5) == 0.5
    assert hcr(rows, tau=0.5, evasive_only=True) == 1.0


def test_hcr_permutation_invariant():
    rng = np.random.default_rng(1)
    rows = [make_diag(float(rng.random()), float(rng.random()), bool(rng.random() < 0.5), i) for i in range(50)]
    base = hcr(rows, tau=0.5)
    for _ in range(5):
        rng.shuffle(rows)
        assert hcr(rows, tau=0.5) == base


def test_ape_fixture_and_empty():
    assert ape([make_diag(0.5, 0.25, True, 0), make_diag(0.5, 0.75, True, 1)]) == 0.5
    assert ape([make_diag(0.5, 0.0, True, 0)]) == 0.0
    with pytest.raises(EmptyDataset):
        ape([])
    with pytest.raises(EmptyDataset):
        hcr([])


# ---------------------------------------------------------------- properties


def test_metric_ranges_fuzz():
    rng = np.random.default_rng(2)
    diags = []
    for _ in range(10_000):
        d = int(rng.integers(1, 9))
        k = int(rng.integers(2, 6))
        weights = rng.normal(size=(k, d))
        weights[rng.random((k, d)) < 0.15] = 0.0
        P = int(rng.integers(1, d + 1))
        idx = np.sort(rng.choice(d, size=P, replace=False))
        y_true = int(rng.integers(0, k))
        rec, expl = make_case(weights, idx, y_true, adversarial=(y_true + 1) % k)
        v_pspp = pspp(rec, expl, 1e-9)
        v_pspe = pspe(rec, expl, 1e-9)
        assert 0.0 <= v_pspp <= 1.0
        assert 0.0 <= v_pspe <= 1.0
        diags.append(make_diag(v_pspp, v_pspe, bool(rng.random() < 0.5)))
    assert 0.0 <= hcr(diags, tau=0.5) <= 1.0
    assert 0.0 <= ape(diags) <= 1.0


def test_binary_identity_fuzz():
    rng = np.random.default_rng(3)
    for _ in range(10_000):
        d = int(rng.integers(1, 10))
        toward_true = rng.normal(size=d)
        toward_true[rng.random(d) < 0.2] = 0.0
        weights = np.stack([toward_true, -toward_true])
        P = int(rng.integers(1, d + 1))
        idx = np.sort(rng.choice(d, size=P, replace=False))
        rec, expl = make_case(weights, idx, y_true=0, adversarial=1)
        total = pspp(rec, expl, 0.0) + pspe(rec, expl, 0.0) + neutral_rate(rec, expl, 0.0)
        assert abs(total - 1.0) <= 1e-12


def test_brute_force_oracle_equivalence():
    rng = np.random.default_rng(4)
    for _ in range(10_000):
        d = int(rng.integers(1, 7))
        k = int(rng.integers(2, 4))
        weights = rng.normal(size=(k, d))
        weights[rng.random((k, d)) < 0.25] = 0.0
        P = int(rng.integers(1, d + 1))
        idx = np.sort(rng.choice(d, size=P, replace=False))
        y_true = int(rng.integers(0, k))
        eps = float(rng.choice([0.0, 1e-9, 0.05]))
        rec, expl = make_case(weights, idx, y_true, adversarial=(y_true + 1) % k)
        assert pspp(rec, expl, eps) == oracle_pspp(weights, y_true, list(idx), eps)
        assert pspe(rec, expl, eps) == oracle_pspe(weights, y_true, list(idx), eps)


def test_monotonicity_positive_to_negative():
    rng = np.random.default_rng(5)
    for _ in range(300):
        d = int(rng.integers(2, 8))
        toward_true = rng.normal(size=d)
        toward_true[np.abs(toward_true) < 0.05] = 0.2  # keep directions decisive
        weights = np.stack([toward_true, -toward_true])
        idx = np.arange(d)
        rec, expl = make_case(weights, idx, y_true=0, adversarial=1)
        pos_positions = np.flatnonzero(toward_true > 0)
        if pos_positions.size == 0:
            continue
        flipped = toward_true.copy()
        flipped[pos_positions[0]] *= -1.0
        rec2, expl2 = make_case(np.stack([flipped, -flipped]), idx, y_true=0, adversarial=1)
        assert pspp(rec2, expl2, 0.0) > pspp(rec, expl, 0.0)
        assert pspe(rec2, expl2, 0.0) < pspe(rec, expl, 0.0)
