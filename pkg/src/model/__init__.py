"""Learned model: representation, dynamics and prediction with option heads."""

from .batch import UnrollBatch
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .encoding import decode_action_sequence, encode_action_sequence
from .network import (
    LOSS_TERMS,
    DynamicsOutput,
    LossBreakdown,
    OptionZeroNetwork,
    PredictionOutput,
    init_params,
    param_layout,
    softmax,
)
from .optimizer import SGD, clip_gradient, sgd_step
from .params import ModelParams, ParamLayout, build_layout

__all__ = [
    "UnrollBatch",
    "Checkpoint",
    "load_checkpoint",
    "save_checkpoint",
    "decode_action_sequence",
    "encode_action_sequence",
    "LOSS_TERMS",
    "DynamicsOutput",
    "LossBreakdown",
    "OptionZeroNetwork",
    "PredictionOutput",
    "init_params",
    "param_layout",
    "softmax",
    "SGD",
    "clip_gradient",
    "sgd_step",
    "ModelParams",
    "ParamLayout",
    "build_layout",
]
