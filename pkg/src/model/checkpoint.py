"""Checkpoint files: named parameter segments, model config and version in one .npz."""

from pathlib import Path
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np
import orjson

from ..config import ModelConfig
from ..errors import CheckpointError
from ..logging_config import get_logger
from .network import param_layout
from .params import ModelParams

logger = get_logger(__name__)

# Fields that change the parameter layout; anything else may differ between runs.
LAYOUT_FIELDS = ("observation_shape", "action_space_size", "max_option_length", "hidden_size", "trunk_size")


@dataclass(frozen=True)
class Checkpoint:
    config: ModelConfig
    params: ModelParams
    velocity: Optional[np.ndarray] = None
    extra: Dict[str, Any] = field(default_factory=dict)


def save_checkpoint(
    path: Path,
    config: ModelConfig,
    params: ModelParams,
    velocity: Optional[np.ndarray] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {"version": params.version, "model": config.model_dump(mode="json"), "extra": extra or {}}
    arrays = {f"param/{name}": value for name, value in params.segments()}
    if velocity is not None:
        arrays["optimizer/velocity"] = velocity
    with path.open("wb") as fh:
        np.savez(fh, header=np.frombuffer(orjson.dumps(header), dtype=np.uint8), **arrays)
    logger.info("checkpoint_saved", path=str(path), version=params.version)
    return path


def load_checkpoint(path: Path, expected: Optional[ModelConfig] = None) -> Checkpoint:
    """Load a checkpoint; reject it when `expected` disagrees on any layout field."""
    path = Path(path)
    if not path.is_file():
        raise CheckpointError("Checkpoint not found", path=str(path))
    try:
        with np.load(path) as data:
            header = orjson.loads(data["header"].tobytes())
            segments = {key[len("param/"):]: data[key] for key in data.files if key.startswith("param/")}
            velocity = data["optimizer/velocity"] if "optimizer/velocity" in data.files else None
    except (OSError, ValueError, KeyError, orjson.JSONDecodeError) as exc:
        raise CheckpointError("Unreadable checkpoint", path=str(path), reason=str(exc)) from exc

    config = ModelConfig(**header["model"])
    if expected is not None:
        mismatched = [
            f"{field}: checkpoint={getattr(config, field)} expected={getattr(expected, field)}"
            for field in LAYOUT_FIELDS
            if tuple(np.atleast_1d(getattr(config, field))) != tuple(np.atleast_1d(getattr(expected, field)))
        ]
        if mismatched:
            raise CheckpointError("Checkpoint model config mismatch", path=str(path), fields="; ".join(mismatched))
    layout = param_layout(config)
    if sorted(segments) != sorted(layout.names):
        raise CheckpointError("Checkpoint segments do not match layout", path=str(path))
    params = ModelParams(theta=layout.flatten(segments), layout=layout, version=int(header["version"]))
    logger.info("checkpoint_loaded", path=str(path), version=params.version)
    return Checkpoint(config=config, params=params, velocity=velocity, extra=header.get("extra", {}))
