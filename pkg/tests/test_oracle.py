"""The enumeration oracle itself, checked on hand-computable cases."""
import pytest
from hypothesis import given
from hypothesis import strategies as st

from asymstab.oracle import (
    Presentation, cosyzygy_factors, diagonal, factors_from_profile, kill_profile,
    kill_profile_from_factors, stabilized_profile, syzygy_factors,
)


def test_kill_profile_of_diagonal():
    assert kill_profile(diagonal(4, [2, 4])) == {1: 1, 2: 4, 4: 8}
    assert kill_profile(Presentation(4, 2, ((2, 2),))) == kill_profile_from_factors(4, [4, 2])


@given(st.sampled_from([4, 8, 9, 12, 36]), st.data())
def test_profile_round_trip(m, data):
    divs = [d for d in range(2, m + 1) if m % d == 0]
    fs = data.draw(st.lists(st.sampled_from(divs), max_size=3))
    got = factors_from_profile(m, kill_profile_from_factors(m, fs))
    assert kill_profile_from_factors(m, got) == kill_profile_from_factors(m, fs)


def test_syzygies_and_cosyzygies():
    assert syzygy_factors(4, [2]) == [2]
    assert syzygy_factors(8, [2]) == [4]
    assert cosyzygy_factors(8, [2]) == [4]
    assert syzygy_factors(6, [6]) == []
    assert cosyzygy_factors(9, [3, 9]) == [3]


@pytest.mark.parametrize("m,a,b,expected", [(4, [2], [2], [2]), (4, [4], [2], []), (8, [2], [4], [2]),
                                             (9, [3], [3], [3]), (6, [2], [3], [])])
def test_stabilized_profiles(m, a, b, expected):
    assert stabilized_profile(diagonal(m, a), diagonal(m, b)) == kill_profile_from_factors(m, expected)
