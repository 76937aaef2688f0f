import pytest

from geo.units import to_hours, to_minutes


def test_to_minutes_converts_hours():
    minutes = to_minutes(2)
    assert minutes == 120


def test_to_hours_raises_value_error():
    with pytest.raises(ValueError):
        to_hours(-1)
    assert to_hours(30) is not None
