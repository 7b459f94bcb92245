import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import nonlocal_flow as nf
from nonlocal_flow import AtomListSpec, Ensemble, PiecewiseSpec, SamplerSpec


class TestBuildEnsemble:
    def test_explicit_pair(self):
        e = nf.build_ensemble(AtomListSpec(((2.0, 0.5), (1.0, 0.5))))
        assert len(e) == 2
        assert e.domain_measure == 1.0
        assert e.time == 0.0
        assert list(e.values) == [2.0, 1.0]

    def test_sampler_midpoint_rule(self):
        e = nf.build_ensemble(SamplerSpec(fn=lambda x: x, n=2))
        np.testing.assert_array_equal(e.values, [0.25, 0.75])
        np.testing.assert_array_equal(e.weights, [0.5, 0.5])

    def test_equal_values_merge(self):
        e = nf.build_ensemble(AtomListSpec(((1.0, 0.3), (1.0, 0.2))))
        assert len(e) == 1
        assert e.values[0] == 1.0
        assert e.weights[0] == pytest.approx(0.5, abs=1e-16)

    def test_merge_keeps_first_occurrence_order(self):
        e = nf.build_ensemble(AtomListSpec(((2.0, 0.1), (1.0, 0.2), (2.0, 0.3))))
        assert list(e.values) == [2.0, 1.0]
        assert e.weights[0] == pytest.approx(0.4, abs=1e-16)

    def test_pieces_build_and_merge(self):
        e = nf.build_ensemble(PiecewiseSpec(((0.5, 1.0), (0.5, 0.5), (0.25, 0.5))))
        assert list(e.values) == [0.5, 0.25]
        assert e.weights[0] == 1.5

    def test_sampler_never_merges(self):
        e = nf.build_ensemble(SamplerSpec(fn=lambda x: 0.5 * np.ones_like(x), n=3))
        assert len(e) == 3
        np.testing.assert_array_equal(e.values, [0.5, 0.5, 0.5])

    def test_sampler_scalar_function(self):
        e = nf.build_ensemble(SamplerSpec(fn=lambda x: float(x) ** 2, n=4,
                                          domain_measure=2.0))
        np.testing.assert_allclose(e.values, ((np.arange(4) + 0.5) / 4) ** 2)
        assert e.domain_measure == 2.0

    def test_empty_spec(self):
        with pytest.raises(nf.EmptySpec):
            nf.build_ensemble(AtomListSpec(()))
        with pytest.raises(nf.EmptySpec):
            nf.build_ensemble(SamplerSpec(fn=lambda x: x, n=0))

    def test_nonpositive_weight(self):
        with pytest.raises(nf.NonpositiveWeight):
            nf.build_ensemble(AtomListSpec(((1.0, -1.0),)))
        with pytest.raises(nf.NonpositiveWeight):
            nf.build_ensemble(AtomListSpec(((1.0, 0.0),)))

    def test_nonfinite_value_rejected(self):
        with pytest.raises(ValueError):
            nf.build_ensemble(AtomListSpec(((math.inf, 1.0),)))


class TestEnsemble:
    def test_immutability(self):
        e = nf.build_ensemble(AtomListSpec(((2.0, 1.0),)))
        with pytest.raises(ValueError):
            e.values[0] = 3.0

    def test_weight_sum_must_match_domain(self):
        with pytest.raises(ValueError):
            Ensemble(values=np.array([1.0]), weights=np.array([1.0]),
                     domain_measure=2.0)

    def test_atoms_view(self):
        e = nf.build_ensemble(AtomListSpec(((2.0, 0.5), (1.0, 0.5))))
        atoms = e.atoms
        assert atoms[0].value == 2.0 and atoms[0].weight == 0.5

    def test_atom_invariants(self):
        with pytest.raises(nf.NonpositiveWeight):
            nf.Atom(1.0, 0.0)
        with pytest.raises(ValueError):
            nf.Atom(math.nan, 1.0)


class TestValidateHypothesis:
    def test_h1(self):
        e = nf.build_ensemble(AtomListSpec(((1.0, 0.5), (2.0, 0.5))))
        hyp = nf.validate_hypothesis(e)
        assert hyp.tag == "H1"
        assert hyp.interval == (1.0, 2.0)
        assert hyp.sign == 1

    def test_h2(self):
        e = nf.build_ensemble(AtomListSpec(((0.25, 0.5), (0.75, 0.5))))
        hyp = nf.validate_hypothesis(e)
        assert hyp.tag == "H2"
        assert hyp.interval == (0.0, 1.0)
        assert hyp.sign == -1

    def test_h3(self):
        e = nf.build_ensemble(AtomListSpec(((-1.5, 0.5), (0.0, 0.5))))
        hyp = nf.validate_hypothesis(e)
        assert hyp.tag == "H3"
        assert hyp.interval == (-1.5, 0.0)
        assert hyp.sign == 1

    def test_identically_one_rejected(self):
        e = nf.build_ensemble(AtomListSpec(((1.0, 1.0),)))
        with pytest.raises(nf.NoHypothesis):
            nf.validate_hypothesis(e)

    def test_straddling_rejected(self):
        e = nf.build_ensemble(AtomListSpec(((-1.0, 0.5), (0.5, 0.5))))
        with pytest.raises(nf.NoHypothesis):
            nf.validate_hypothesis(e)

    def test_two_level_degenerate_h2_rejected(self):
        e = nf.build_ensemble(AtomListSpec(((0.0, 0.5), (1.0, 0.5))))
        with pytest.raises(nf.NoHypothesis):
            nf.validate_hypothesis(e)

    def test_identically_zero_rejected(self):
        e = nf.build_ensemble(AtomListSpec(((0.0, 1.0),)))
        with pytest.raises(nf.NoHypothesis):
            nf.validate_hypothesis(e)


class TestMass:
    def test_examples(self):
        assert nf.mass(nf.build_ensemble(AtomListSpec(((2.0, 0.5), (1.0, 0.5))))) == 1.5
        assert nf.mass(nf.build_ensemble(AtomListSpec(((0.0, 1.0),)))) == 0.0
        assert nf.mass(nf.build_ensemble(
            AtomListSpec(((-1.0, 0.5), (-0.5, 0.5))))) == -0.75


values_st = st.floats(min_value=-3.0, max_value=4.0, allow_nan=False)
weights_st = st.floats(min_value=0.05, max_value=2.0, allow_nan=False)
pairs_st = st.lists(st.tuples(values_st, weights_st), min_size=1, max_size=16)


def _ensemble_from(pairs):
    values = np.array([v for v, _ in pairs])
    weights = np.array([w for _, w in pairs])
    return Ensemble(values=values, weights=weights)


@given(pairs_st, st.randoms())
@settings(max_examples=120, deadline=None)
def test_hypothesis_invariant_under_permutation(pairs, rnd):
    e = _ensemble_from(pairs)
    try:
        hyp = nf.validate_hypothesis(e)
    except nf.NoHypothesis:
        perm = list(range(len(pairs)))
        rnd.shuffle(perm)
        with pytest.raises(nf.NoHypothesis):
            nf.validate_hypothesis(_ensemble_from([pairs[i] for i in perm]))
        return
    perm = list(range(len(pairs)))
    rnd.shuffle(perm)
    hyp2 = nf.validate_hypothesis(_ensemble_from([pairs[i] for i in perm]))
    assert hyp2.tag == hyp.tag
    assert hyp2.interval == hyp.interval


@given(pairs_st, st.integers(min_value=0, max_value=15))
@settings(max_examples=120, deadline=None)
def test_hypothesis_invariant_under_equal_value_split(pairs, idx):
    idx = idx % len(pairs)
    v, w = pairs[idx]
    split = pairs[:idx] + [(v, w / 2.0), (v, w / 2.0)] + pairs[idx + 1:]
    e, e_split = _ensemble_from(pairs), _ensemble_from(split)
    try:
        hyp = nf.validate_hypothesis(e)
    except nf.NoHypothesis:
        with pytest.raises(nf.NoHypothesis):
            nf.validate_hypothesis(e_split)
        return
    hyp2 = nf.validate_hypothesis(e_split)
    assert (hyp2.tag, hyp2.interval) == (hyp.tag, hyp.interval)


@given(pairs_st, st.integers(min_value=0, max_value=15))
@settings(max_examples=120, deadline=None)
def test_mass_invariant_under_split(pairs, idx):
    idx = idx % len(pairs)
    v, w = pairs[idx]
    split = pairs[:idx] + [(v, w / 2.0), (v, w / 2.0)] + pairs[idx + 1:]
    m1 = nf.mass(_ensemble_from(pairs))
    m2 = nf.mass(_ensemble_from(split))
    scale = max(abs(m1), 1.0)
    assert abs(m1 - m2) <= 4 * math.ulp(scale)


@given(pairs_st)
@settings(max_examples=120, deadline=None)
def test_total_weight_matches_domain_measure(pairs):
    e = _ensemble_from(pairs)
    total = float(np.sum(e.weights, dtype=np.float64))
    assert abs(total - e.domain_measure) <= 1e-12 * abs(e.domain_measure)
