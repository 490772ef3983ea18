import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twoselmer.f2 import (
    F2Error,
    F2QuadSpace,
    F2Subspace,
    all_lagrangians,
    count_disjoint_lagrangians,
    eval_q,
    is_lagrangian,
    is_metabolic,
    orthogonal_complement,
    quad_space,
    standard_metabolic,
    zero_subspace,
)

H = standard_metabolic(1)
HH = standard_metabolic(2)


def span(space_dim, *vecs):
    return F2Subspace.from_vectors(space_dim, vecs)


def test_eval_q_examples():
    assert eval_q(H, 0) == 0
    # hyperbolic plane: q(e1 + e2) = q(e1) + q(e2) + (e1, e2) = 1
    assert eval_q(H, 0b11) == 1
    zero_form = quad_space(4, [0, 0, 0, 0], {})
    assert all(eval_q(zero_form, v) == 0 for v in range(16))


def test_eval_q_reconstruction_formula():
    space = quad_space(4, [1, 0, 1, 0], {(0, 1): 1, (2, 3): 1, (0, 2): 1})
    for v in range(16):
        bits = [i for i in range(4) if (v >> i) & 1]
        expected = 0
        for i in bits:
            expected ^= space.q_values[i]
        for a in range(len(bits)):
            for b in range(a + 1, len(bits)):
                expected ^= space.gram[bits[a]][bits[b]]
        assert eval_q(space, v) == expected


def test_eval_q_dimension_mismatch():
    with pytest.raises(F2Error):
        eval_q(H, 0b100)


def test_is_lagrangian_examples():
    assert is_lagrangian(H, span(2, 0b01)) is True
    assert is_lagrangian(H, span(2, 0b11)) is False
    assert is_lagrangian(HH, span(4, 0b0001, 0b0100)) is True
    assert is_lagrangian(HH, span(4, 0b0001)) is False  # isotropic but not maximal


def test_alternating_for_all_vectors():
    for n in (1, 2, 3, 4):
        space = standard_metabolic(n)
        for v in range(1 << space.dim):
            assert space.pairing(v, v) == 0


def test_count_disjoint_lagrangians_paper_values():
    # 2^(n(n-1)/2) for n = 1, 2, 3
    assert count_disjoint_lagrangians(H, span(2, 0b01)) == 1
    assert count_disjoint_lagrangians(HH, span(4, 0b0001, 0b0100)) == 2
    M3 = standard_metabolic(3)
    assert count_disjoint_lagrangians(M3, span(6, 0b000001, 0b000100, 0b010000)) == 8


def test_count_disjoint_independent_of_X():
    for n in (1, 2, 3):
        space = standard_metabolic(n)
        expected = 2 ** (n * (n - 1) // 2)
        for X in all_lagrangians(space):
            assert count_disjoint_lagrangians(space, X) == expected


def test_count_disjoint_errors():
    with pytest.raises(F2Error):
        count_disjoint_lagrangians(H, span(2, 0b11))  # not Lagrangian
    degenerate = quad_space(2, [0, 0], {})
    with pytest.raises(F2Error):
        count_disjoint_lagrangians(degenerate, span(2, 0b01))


def test_standard_metabolic_small():
    assert standard_metabolic(0).dim == 0
    assert all_lagrangians(standard_metabolic(0)) == [zero_subspace(0)]
    # H has 3 one-dimensional subspaces, 2 of them Lagrangian
    subs = [span(2, v) for v in (0b01, 0b10, 0b11)]
    assert sum(is_lagrangian(H, s) for s in subs) == 2
    assert is_metabolic(H) and is_metabolic(HH)


def test_total_lagrangian_count_dim4():
    # hyperbolic quadric in dim 2n has prod_{i<n} (2^i + 1) Lagrangians: 6 for n=2
    assert len(all_lagrangians(HH)) == 6
    assert len(all_lagrangians(standard_metabolic(3))) == 30


def test_orthogonal_complement():
    X = span(4, 0b0001)
    perp = orthogonal_complement(HH, X)
    assert perp.dim == 3
    assert all(HH.pairing(v, 0b0001) == 0 for v in perp.vectors())


@settings(max_examples=200, deadline=None)
@given(
    dim=st.integers(min_value=1, max_value=6),
    data=st.data(),
)
def test_subspace_canonical_equality(dim, data):
    vecs = data.draw(st.lists(st.integers(0, (1 << dim) - 1), min_size=1, max_size=5))
    sub = F2Subspace.from_vectors(dim, vecs)
    # a different spanning set of the same subspace: sums of random subsets
    alt = [v for v in sub.vectors() if v]
    data.draw(st.randoms()).shuffle(alt)
    if not alt:
        alt = [0]
    assert F2Subspace.from_vectors(dim, alt + vecs) == sub
    assert all(sub.contains(v) for v in sub.vectors())


def test_subspace_rejects_oversized_vectors():
    with pytest.raises(F2Error):
        F2Subspace.from_vectors(2, [0b100])


def test_gram_validation():
    with pytest.raises(F2Error):
        F2QuadSpace(2, (0, 0), ((1, 0), (0, 0)))  # nonzero diagonal
    with pytest.raises(F2Error):
        F2QuadSpace(2, (0, 0), ((0, 1), (0, 0)))  # asymmetric
    with pytest.raises(F2Error):
        F2QuadSpace(3, (0, 0, 0), ((0, 0, 0), (0, 0, 0), (0, 0, 0)))  # odd dim
