def celsius_to_fahrenheit(celsius):
    return celsius * 9 / 5 + 32


def classify(celsius):
    if celsius < 0:
        return "freezing"
    if celsius < 25:
        return "mild"
    return "hot"
