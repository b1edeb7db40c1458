"""Points and boxes in image-pixel space.

Origin is the top-left image corner, x grows rightward, y grows downward.
Boxes are axis-aligned and serialized as [x, y, w, h].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Point = tuple[float, float]


@dataclass(frozen=True)
class Box:
    x: float
    y: float
    w: float
    h: float

    @property
    def x2(self) -> float:
        return self.x + self.w

    @property
    def y2(self) -> float:
        return self.y + self.h

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def center(self) -> Point:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    @staticmethod
    def from_center(cx: float, cy: float, w: float, h: float) -> "Box":
        return Box(cx - w / 2.0, cy - h / 2.0, w, h)

    def clip(self, image_w: float, image_h: float) -> "Box":
        """Intersect with the image rectangle; may collapse to zero width/height."""
        x1 = min(max(self.x, 0.0), image_w)
        y1 = min(max(self.y, 0.0), image_h)
        x2 = min(max(self.x2, 0.0), image_w)
        y2 = min(max(self.y2, 0.0), image_h)
        return Box(x1, y1, max(0.0, x2 - x1), max(0.0, y2 - y1))

    def mirror_x(self, image_w: float) -> "Box":
        """Reflect about the vertical midline of an image_w-wide image."""
        return Box(image_w - self.x - self.w, self.y, self.w, self.h)

    def iou(self, other: "Box") -> float:
        ix = min(self.x2, other.x2) - max(self.x, other.x)
        iy = min(self.y2, other.y2) - max(self.y, other.y)
        if ix <= 0.0 or iy <= 0.0:
            return 0.0
        inter = ix * iy
        union = self.area + other.area - inter
        if union <= 0.0:
            return 0.0
        return inter / union

    def to_list(self) -> list[float]:
        return [self.x, self.y, self.w, self.h]

    @staticmethod
    def from_list(values) -> "Box":
        x, y, w, h = (float(v) for v in values)
        return Box(x, y, w, h)


def distance(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])
