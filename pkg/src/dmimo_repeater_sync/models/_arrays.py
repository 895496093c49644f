"""Pydantic field types for read-only numpy arrays."""

from typing import Annotated, Any

import numpy as np
from pydantic import BeforeValidator

from dmimo_repeater_sync.numerics import as_complex_matrix, as_complex_vector


def _readonly_vector(value: Any) -> np.ndarray:
    arr = as_complex_vector(value).copy()
    arr.flags.writeable = False
    return arr


def _readonly_matrix(value: Any) -> np.ndarray:
    arr = as_complex_matrix(value).copy()
    arr.flags.writeable = False
    return arr


ReadOnlyComplexVector = Annotated[np.ndarray, BeforeValidator(_readonly_vector)]
ReadOnlyComplexMatrix = Annotated[np.ndarray, BeforeValidator(_readonly_matrix)]
