"""One test per acceptance criterion; run with ``pytest -s`` to see the summary lines."""
import pytest

from asymstab.verify import CRITERIA


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    result = CRITERIA[number]()
    print(result.line())
    assert result.ok, result.summary()
