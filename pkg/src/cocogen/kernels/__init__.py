"""Grid-scan kernels: compiled core with a pure-Python fallback.

The backend is chosen at import time: the Cython extension when it built,
otherwise numpy. Override with ``COCOGEN_KERNELS={auto,compiled,python}``.
Both backends implement the identical semantics contract (see
``_grid_py``), and ``benchmarks/bench_kernels.py`` compares their speed.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _grid_py

try:
    from . import _grid as _grid_c
except ImportError:  # extension not built; numpy fallback serves
    _grid_c = None

__all__ = [
    "Envelope",
    "build_lower_envelope",
    "argmin_2d",
    "argmin_3d",
    "backend_name",
    "available_backends",
    "get_backend",
]


@dataclass(frozen=True)
class Envelope:
    """Lower envelope of the lines q -> slope[k]*q + inter[k] over q > 0."""

    slope: np.ndarray
    inter: np.ndarray
    thresh: np.ndarray  # breakpoints between consecutive hull segments
    k: np.ndarray  # original line index per hull segment


def build_lower_envelope(slopes, intercepts) -> Envelope:
    """Exact lower envelope for lines with non-increasing slopes.

    Ties in value at a breakpoint resolve to the smaller original index,
    matching the grid oracle's lexicographic tie-break.
    """
    slopes = np.asarray(slopes, dtype=np.float64)
    intercepts = np.asarray(intercepts, dtype=np.float64)
    if slopes.shape != intercepts.shape or slopes.ndim != 1 or slopes.size == 0:
        raise ValueError("need equal-length non-empty slope/intercept vectors")
    if np.any(np.diff(slopes) > 0):
        raise ValueError("slopes must be non-increasing")

    ks: list[int] = []
    sl: list[float] = []
    it: list[float] = []
    th: list[float] = []
    for k in range(slopes.size):
        s = float(slopes[k])
        c = float(intercepts[k])
        if sl and s == sl[-1]:
            if c >= it[-1]:
                continue  # parallel, never below the kept line
            # parallel and strictly lower: the kept line is dominated
            sl.pop(), it.pop(), ks.pop()
            if th:
                th.pop()
        while sl:
            x = (c - it[-1]) / (sl[-1] - s)
            # Queries live on q > 0; a line whose takeover point is at or
            # before its predecessor's is never strictly best.
            prev = th[-1] if th else 0.0
            if x <= prev:
                sl.pop(), it.pop(), ks.pop()
                if th:
                    th.pop()
            else:
                th.append(x)
                break
        sl.append(s)
        it.append(c)
        ks.append(k)
    return Envelope(
        slope=np.array(sl),
        inter=np.array(it),
        thresh=np.array(th),
        k=np.array(ks, dtype=np.int64),
    )


def _as_c(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


class _PythonBackend:
    name = "python"

    @staticmethod
    def argmin_2d(bg1, lin1, g2, lin2):
        return _grid_py.argmin_2d(_as_c(bg1), _as_c(lin1), _as_c(g2), _as_c(lin2))

    @staticmethod
    def argmin_3d(bg1, lin1, g2, lin2, env: Envelope):
        return _grid_py.argmin_3d(
            _as_c(bg1), _as_c(lin1), _as_c(g2), _as_c(lin2),
            _as_c(env.slope), _as_c(env.inter), _as_c(env.thresh), env.k,
        )


class _CompiledBackend:
    name = "compiled"

    @staticmethod
    def argmin_2d(bg1, lin1, g2, lin2):
        return _grid_c.argmin_2d(_as_c(bg1), _as_c(lin1), _as_c(g2), _as_c(lin2))

    @staticmethod
    def argmin_3d(bg1, lin1, g2, lin2, env: Envelope):
        return _grid_c.argmin_3d(
            _as_c(bg1), _as_c(lin1), _as_c(g2), _as_c(lin2),
            _as_c(env.slope), _as_c(env.inter), _as_c(env.thresh),
            np.ascontiguousarray(env.k, dtype=np.int64),
        )


def available_backends() -> list[str]:
    names = ["python"]
    if _grid_c is not None:
        names.insert(0, "compiled")
    return names


def get_backend(name: str):
    if name == "python":
        return _PythonBackend
    if name == "compiled":
        if _grid_c is None:
            raise RuntimeError("compiled kernel extension is not available")
        return _CompiledBackend
    raise ValueError(f"unknown kernel backend {name!r}")


def _select_backend():
    choice = os.environ.get("COCOGEN_KERNELS", "auto").lower()
    if choice == "auto":
        return _CompiledBackend if _grid_c is not None else _PythonBackend
    return get_backend(choice)


_BACKEND = _select_backend()


def backend_name() -> str:
    return _BACKEND.name


def argmin_2d(bg1, lin1, g2, lin2):
    return _BACKEND.argmin_2d(bg1, lin1, g2, lin2)


def argmin_3d(bg1, lin1, g2, lin2, env: Envelope):
    return _BACKEND.argmin_3d(bg1, lin1, g2, lin2, env)
