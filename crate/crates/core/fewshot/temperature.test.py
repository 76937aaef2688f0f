from temperature import celsius_to_fahrenheit, classify


def test_celsius_to_fahrenheit_boiling_point():
    assert celsius_to_fahrenheit(100) == 212


def test_classify_below_zero_is_freezing():
    assert classify(-5) == "freezing"


def test_classify_boundary_is_hot():
    assert classify(25) == "hot"
