import math


class Circle:
    def __init__(self, radius: float):
        if radius < 0:
            raise ValueError("negative radius")
        self.radius = radius

    def area(self) -> float:
        return math.pi * self.radius ** 2


class Rect:
    def __init__(self, width: float, height: float):
        self.width = width
        self.height = height

    def area(self) -> float:
        return self.width * self.height

    def is_square(self) -> bool:
        return self.width == self.height
