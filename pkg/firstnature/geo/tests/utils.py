import numpy as np


def fjord_land_mask(nrows: int = 30, ncols: int = 40) -> np.ndarray:
    """
    A peninsula with a fjord cutting across it from west to east, open sea along the northern,
    western and eastern edges.
    """
    land = np.zeros((nrows, ncols), dtype=int)
    land[8:, 3:ncols - 3] = 1
    land[16:19, 3:ncols - 3] = 0  # fjord
    land[19:21, 17:21] = 0  # basin south of the fjord
    return land
