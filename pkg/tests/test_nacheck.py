import itertools
from fractions import Fraction as F

import numpy as np
import pytest

from stablepgf.measures import Measure
from stablepgf.nacheck import CapExceeded, enumerate_upsets, is_na, na_all_splits
from stablepgf.particles import single_jump_transform
from stablepgf.polycore import MultiPoly


def exact_weights(f: MultiPoly) -> np.ndarray:
    shape = tuple(s + 1 for s in f.max_degree_per_var())
    w = np.empty(shape, dtype=object)
    w[...] = F(0)
    for alpha, c in f.terms:
        w[alpha] = c
    return w


def stable_two_site_fixture(rng):
    """Rational Bernoulli products pushed through one jump transform."""

    def rand_frac():
        return F(int(rng.integers(1, 10)), int(rng.integers(10, 14)))

    def bern(ps, var):
        f = MultiPoly.from_dict({(0, 0): F(1)}, 2)
        for p in ps:
            key = (1, 0) if var == 0 else (0, 1)
            f = f * MultiPoly.from_dict({(0, 0): 1 - p, key: p}, 2)
        return f

    f = bern([rand_frac()], 0) * bern([rand_frac() for _ in range(int(rng.integers(1, 4)))], 1)
    return single_jump_transform(f, 0, 1, F(int(rng.integers(1, 8)), 8))


class TestEnumerateUpsets:
    def test_two_cell_chain(self):
        assert len(enumerate_upsets((1,))) == 3

    def test_three_cell_chain(self):
        assert len(enumerate_upsets((2,))) == 4

    def test_square(self):
        assert len(enumerate_upsets((1, 1))) == 6

    def test_cap(self):
        with pytest.raises(CapExceeded):
            enumerate_upsets((4, 4))

    def test_lattice_closure(self):
        fam = enumerate_upsets((1, 2))
        masks = set(fam.masks)
        for a, b in itertools.combinations(fam.masks, 2):
            assert a | b in masks
            assert a & b in masks

    def test_antichains_minimal(self):
        fam = enumerate_upsets((1, 1))
        for k, anti in enumerate(fam.antichains):
            for c, d in itertools.permutations(anti, 2):
                assert not all(x <= y for x, y in zip(c, d))


class TestIsNa:
    def test_product_measure_exact_zero(self):
        w = np.empty((2, 2), dtype=object)
        for i in range(2):
            for j in range(2):
                w[i, j] = (F(1, 3) if i == 0 else F(2, 3)) * (F(1, 4) if j == 0 else F(3, 4))
        res = is_na(w, [0], [1])
        assert res.passed
        assert res.worst_slack == 0

    def test_diagonal_mixture_fails(self):
        w = np.zeros((2, 2))
        w[0, 0] = w[1, 1] = 0.5
        res = is_na(Measure(w), [0], [1])
        assert not res.passed
        assert res.worst_slack == pytest.approx(0.25)
        assert res.witness_pair == (((1,),), ((1,),))

    def test_stable_fixture_passes(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            w = exact_weights(stable_two_site_fixture(rng))
            res = is_na(w, [0], [1])
            assert res.passed and res.worst_slack <= 0

    def test_split_validation(self):
        w = np.zeros((2, 2))
        w[0, 0] = 1.0
        with pytest.raises(ValueError):
            is_na(Measure(w), [0], [0])
        with pytest.raises(ValueError):
            is_na(Measure(w), [], [1])


class TestNaAllSplits:
    def test_point_mass_zero_slack(self):
        rep = na_all_splits(Measure.point_mass((1, 1, 0)))
        assert rep.passed
        assert float(rep.worst_slack) <= 1e-12

    def test_mixture_recorded(self):
        w = np.zeros((2, 2))
        w[0, 0] = w[1, 1] = 0.5
        rep = na_all_splits(Measure(w))
        assert not rep.passed
        bad = [s for s in rep.splits if not s.passed]
        assert bad and bad[0].witness_pair is not None

    def test_three_site_split_count(self):
        rep = na_all_splits(Measure.point_mass((0, 0, 0), shape=(2, 2, 2)))
        # unordered disjoint nonempty pairs over 3 coordinates:
        # (3^3 - 2*2^3 + 1)/2 = 6
        assert len(rep.splits) == 6

    def test_report_json(self):
        w = np.zeros((2, 2))
        w[0, 0] = w[1, 1] = 0.5
        data = na_all_splits(Measure(w)).to_json()
        assert data["verdict"] == "violated"
        assert any("witness_pair" in s for s in data["splits"])


class TestSampledFallback:
    def test_large_block_product_passes_sampled(self):
        m = Measure.product(
            Measure.poisson(0.6, box=4), Measure.poisson(0.6, box=4), Measure.bernoulli(0.3)
        )
        res = is_na(m, [0, 1], [2])
        assert res.mode == "sampled"
        assert res.passed

    def test_large_block_violation_found(self):
        w = np.zeros((5, 5, 2))
        w[0, 0, 0] = 0.5
        w[4, 4, 1] = 0.5
        res = is_na(Measure(w), [0, 1], [2], samples=2000)
        assert res.mode == "sampled"
        assert not res.passed
        assert res.witness_pair is not None

    def test_report_labels_sampled(self):
        m = Measure.product(
            Measure.poisson(0.5, box=4), Measure.poisson(0.5, box=4), Measure.bernoulli(0.4)
        )
        rep = na_all_splits(m)
        assert rep.to_json()["verdict"] == "sampled-NA"


class TestIndicatorSufficiency:
    def test_random_monotone_functions_agree_with_indicators(self):
        # integer monotone functions are sums of up-set indicators, so the
        # indicator verdict decides the general inequality; check verdict
        # agreement on random small measures
        rng = np.random.default_rng(17)
        for _ in range(50):
            w = rng.uniform(0, 1, size=(2, 2))
            w = w / w.sum()
            famA = enumerate_upsets((1,))
            res = is_na(Measure(w), [0], [1])
            # random monotone integer F, G as sums of up-set indicators
            worst = -np.inf
            for _ in range(20):
                fsel = rng.integers(0, 2, size=len(famA))
                gsel = rng.integers(0, 2, size=len(famA))
                Fv = sum(int(s) * famA.indicator(k) for k, s in enumerate(fsel))
                Gv = sum(int(s) * famA.indicator(k) for k, s in enumerate(gsel))
                ef = sum(w[i, j] * Fv[i] for i in range(2) for j in range(2))
                eg = sum(w[i, j] * Gv[j] for i in range(2) for j in range(2))
                efg = sum(w[i, j] * Fv[i] * Gv[j] for i in range(2) for j in range(2))
                worst = max(worst, efg - ef * eg)
            if res.passed:
                assert worst <= 1e-9
