"""Shared test inputs: the function and shape suites used across modules."""

from functools import lru_cache

from fracap import Ball, Box, BoxUnion, Interval, build_cutoff, bump, pyramid, tent
from fracap.besov import cells_to_shape

ALPHAS = (0.3, 0.5, 0.7)

L_SHAPE = BoxUnion((Box((0.0, 0.0), (2.0, 1.0)), Box((0.0, 1.0), (1.0, 2.0))))


@lru_cache(maxsize=None)
def suite_functions():
    return {
        "tent1": tent(1),
        "bump1": bump(1),
        "cutoff1": build_cutoff(Interval(-1.0, 1.0), 0.25),
        "pyramid2": pyramid(2),
        "bump2": bump(2),
        "cutoff2": build_cutoff(Box((0.0, 0.0), (1.0, 1.0)), 0.25),
    }


@lru_cache(maxsize=None)
def suite_shapes():
    pyr = pyramid(2, 1 / 16)
    return {
        "interval01": Interval(0.0, 1.0),
        "interval11": Interval(-1.0, 1.0),
        "ball2": Ball.unit(2),
        "ball3": Ball.unit(3),
        "square": Box((0.0, 0.0), (1.0, 1.0)),
        "rect": Box((0.0, 0.0), (2.0, 1.0)),
        "cube": Box((0.0, 0.0, 0.0), (1.0, 1.0, 1.0)),
        "lshape": L_SHAPE,
        "lattice_level": cells_to_shape(pyr, pyr.values > 0.5),
    }


EXACT_SHAPES = {
    "interval": Interval(-1.0, 1.0),
    "ball1": Ball.unit(1),
    "ball2": Ball.unit(2),
    "ball3": Ball.unit(3),
    "square": Box((0.0, 0.0), (1.0, 1.0)),
    "cube": Box((0.0, 0.0, 0.0), (1.0, 1.0, 1.0)),
    "lshape": L_SHAPE,
}
