import numpy as np
import pytest

from aecomm.codebooks import (
    Codebook,
    build_gdr,
    build_onehot,
    data_rate,
    decode_batch,
    decode_top_m,
    gray_bit_errors,
    gray_bits,
    subset_codebook,
)
from aecomm.errors import DomainError, ShapeError


def test_onehot_entries_are_identity_rows():
    cb = build_onehot(8)
    np.testing.assert_array_equal(cb.entries, np.eye(8))
    assert cb.bits_per_message == 3
    assert cb.m == 1


def test_onehot_rejects_non_power_of_two():
    with pytest.raises(DomainError):
        build_onehot(3)
    with pytest.raises(DomainError):
        build_onehot(1)


def test_onehot_warns_outside_validated_sizes():
    with pytest.warns(UserWarning):
        build_onehot(2)
    with pytest.warns(UserWarning), pytest.raises(DomainError):
        build_onehot(128)  # decode lookup masks cap the vector size at 64


def test_gdr_8_choose_2_layout():
    # 16 of the 28 two-element supports, lexicographic: the first vector is
    # [1/2, 1/2, 0, ...], the last three have supports (2,3), (2,4), (2,5)
    cb = build_gdr(8, 2)
    assert len(cb) == 16
    assert cb.bits_per_message == 4
    first = np.zeros(8)
    first[0] = first[1] = 0.5
    np.testing.assert_allclose(cb.entries[0], first)
    np.testing.assert_array_equal(cb.supports[1], [0, 2])
    np.testing.assert_array_equal(cb.supports[13], [2, 3])
    np.testing.assert_array_equal(cb.supports[14], [2, 4])
    np.testing.assert_array_equal(cb.supports[15], [2, 5])
    np.testing.assert_allclose(cb.entries.sum(axis=1), 1.0)


def test_gdr_m1_matches_onehot():
    a = build_gdr(16, 1)
    b = build_onehot(16)
    np.testing.assert_array_equal(a.entries, b.entries)


def test_gdr_order_bounds():
    with pytest.raises(DomainError):
        build_gdr(8, 0)
    with pytest.raises(DomainError):
        build_gdr(8, 5)  # m must not exceed M/2
    with pytest.raises(DomainError):
        build_gdr(8, 2, selection="fancy")


def test_gdr_random_selection_is_seeded():
    a = build_gdr(16, 2, selection="random", selection_seed=11)
    b = build_gdr(16, 2, selection="random", selection_seed=11)
    c = build_gdr(16, 2, selection="random", selection_seed=12)
    np.testing.assert_array_equal(a.supports, b.supports)
    assert not np.array_equal(a.supports, c.supports)
    # every row is a sorted, valid 2-subset and rows are distinct
    assert np.all(a.supports[:, 0] < a.supports[:, 1])
    assert np.all((a.supports >= 0) & (a.supports < 16))
    assert len(a) == 64


def test_data_rates_for_seven_channel_uses():
    assert data_rate(build_onehot(8), 7) == pytest.approx(3 / 7)
    assert data_rate(build_gdr(8, 2), 7) == pytest.approx(4 / 7)
    assert data_rate(build_gdr(64, 1), 7) == pytest.approx(6 / 7)
    with pytest.raises(DomainError):
        data_rate(build_onehot(8), 0)


def test_decode_recovers_clean_entries():
    for cb in (build_onehot(16), build_gdr(8, 2), build_gdr(8, 3)):
        ids = np.arange(len(cb))
        np.testing.assert_array_equal(decode_batch(cb.encode(ids), cb), ids)


def test_decode_tie_goes_to_lower_index():
    cb = build_onehot(4)
    assert decode_top_m(np.full(4, 0.25), cb) == 0
    assert decode_top_m([0.1, 0.4, 0.4, 0.1], cb) == 1


def test_decode_fallback_uses_support_mass():
    # top-2 indices {2,3} form no entry of the 4-entry (4,2) codebook,
    # so the decoder falls back to support probability mass
    cb = build_gdr(4, 2)
    np.testing.assert_array_equal(
        cb.supports, [[0, 1], [0, 2], [0, 3], [1, 2]]
    )
    p = np.array([0.1, 0.2, 0.3, 0.4])
    # masses: (0,1)=0.3 (0,2)=0.4 (0,3)=0.5 (1,2)=0.5 -> tie, lower id wins
    assert decode_top_m(p, cb) == 2


def test_decode_rejects_wrong_length():
    with pytest.raises(ShapeError):
        decode_top_m(np.ones(5) / 5, build_onehot(4))
    with pytest.raises(ShapeError):
        decode_top_m(np.ones((2, 4)), build_onehot(4))


def test_encode_rejects_out_of_range_ids():
    cb = build_onehot(4)
    with pytest.raises(DomainError):
        cb.encode(4)
    with pytest.raises(DomainError):
        cb.encode([-1])


def test_subset_codebook_keeps_parent_ids():
    cb = build_onehot(8)
    sub, parent_ids = subset_codebook(cb, [5, 1, 3, 7])
    np.testing.assert_array_equal(parent_ids, [1, 3, 5, 7])
    assert len(sub) == 4
    assert sub.bits_per_message == 2
    np.testing.assert_array_equal(sub.entries, cb.entries[[1, 3, 5, 7]])
    assert sub.selection.startswith("subset-of-")


def test_codebook_rejects_duplicate_supports():
    with pytest.raises(DomainError):
        Codebook(4, 1, [[0], [0]])
    with pytest.raises(DomainError):
        Codebook(4, 1, [[0], [1], [2]])  # not a power of two


def test_gray_code_sequence():
    got = [tuple(gray_bits(i, 2)) for i in range(4)]
    assert got == [(0, 0), (0, 1), (1, 1), (1, 0)]
    with pytest.raises(DomainError):
        gray_bits(4, 2)


def test_gray_adjacent_ids_differ_by_one_bit():
    for k in (2, 3, 4, 5, 6):
        ids = np.arange((1 << k) - 1)
        np.testing.assert_array_equal(gray_bit_errors(ids, ids + 1), 1)


def test_gray_bit_errors_hand_values():
    assert gray_bit_errors(0, 0) == 0
    assert gray_bit_errors(0, 3) == 1  # gray(0)=00, gray(3)=10
    assert gray_bit_errors(1, 2) == 1  # gray(1)=01, gray(2)=11
    np.testing.assert_array_equal(gray_bit_errors([0, 1], [1, 1]), [1, 0])


def test_manifest_round_trip_fields():
    cb = build_gdr(8, 2, selection="random", selection_seed=3)
    man = cb.manifest()
    rebuilt = build_gdr(man["M"], man["m"], man["selection"], man["selection_seed"])
    np.testing.assert_array_equal(rebuilt.supports, cb.supports)
