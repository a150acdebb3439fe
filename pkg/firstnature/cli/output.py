"""
Writers for command outputs. Every CSV starts with the run header so that outputs can be traced back to their
configuration.
"""
import logging
import os
from pathlib import Path
from typing import Optional, Union

import pandas as pd

from firstnature.utils.visualization import save_svg

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.10g'


def write_frame(frame: pd.DataFrame,
                path: Union[str, os.PathLike],
                header: Optional[str] = None,
                index: bool = False) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='') as f:
        if header:
            f.write(header.rstrip('\n') + '\n')
        frame.to_csv(f, index=index, float_format=FLOAT_FORMAT, lineterminator='\n')
    logger.info('Wrote %s', path)
    return path


def write_figure(figure, path: Union[str, os.PathLike]) -> Path:
    import matplotlib.pyplot as plt

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_svg(figure, path)
    plt.close(figure)
    logger.info('Wrote %s', path)
    return path
