"""Flat, versioned parameter store with named segments."""

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Sequence, Tuple

import numpy as np

from ..errors import ModelShapeError

Shape = Tuple[int, ...]


@dataclass(frozen=True)
class ParamLayout:
    """Ordered (name, shape) segments of the flat parameter vector."""

    segments: Tuple[Tuple[str, Shape], ...]
    offsets: Dict[str, Tuple[int, int]] = field(init=False, compare=False, repr=False)
    size: int = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        offsets = {}
        start = 0
        for name, shape in self.segments:
            size = int(np.prod(shape)) if shape else 1
            offsets[name] = (start, start + size)
            start += size
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "size", start)

    @property
    def names(self) -> List[str]:
        return [name for name, _ in self.segments]

    def shape_of(self, name: str) -> Shape:
        return dict(self.segments)[name]

    def view(self, flat: np.ndarray, name: str) -> np.ndarray:
        start, stop = self.offsets[name]
        return flat[start:stop].reshape(self.shape_of(name))

    def unflatten(self, flat: np.ndarray) -> Dict[str, np.ndarray]:
        if flat.shape != (self.size,):
            raise ModelShapeError("Flat vector does not match layout", expected=self.size, got=flat.shape)
        return {name: self.view(flat, name) for name in self.names}

    def flatten(self, parts: Dict[str, np.ndarray]) -> np.ndarray:
        flat = np.zeros(self.size, dtype=np.float64)
        for name, shape in self.segments:
            start, stop = self.offsets[name]
            value = np.asarray(parts[name], dtype=np.float64)
            if value.shape != shape:
                raise ModelShapeError("Segment shape mismatch", segment=name, expected=shape, got=value.shape)
            flat[start:stop] = value.ravel()
        return flat


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Immutable snapshot of theta; `version` counts optimizer steps."""

    theta: np.ndarray
    layout: ParamLayout
    version: int = 0

    def __post_init__(self):
        theta = np.array(self.theta, dtype=np.float64, copy=True)
        if theta.shape != (self.layout.size,):
            raise ModelShapeError("Parameter vector does not match layout", expected=self.layout.size, got=theta.shape)
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.layout.view(self.theta, name)

    def segments(self) -> Iterator[Tuple[str, np.ndarray]]:
        for name in self.layout.names:
            yield name, self[name]

    def replace(self, theta: np.ndarray, version: int) -> "ModelParams":
        return ModelParams(theta=theta, layout=self.layout, version=version)

    def squared_norm(self) -> float:
        return float(self.theta @ self.theta)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.theta)))


def build_layout(segments: Sequence[Tuple[str, Shape]]) -> ParamLayout:
    return ParamLayout(segments=tuple((name, tuple(shape)) for name, shape in segments))
