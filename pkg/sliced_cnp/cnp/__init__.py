"""Conditional neural process: per-point encoder, mean aggregation, decoder."""

from ._persistence import (from_dict, load_checkpoint, save_checkpoint,
                           to_dict)
from .model import decode_targets, encode_context, predict, split_gaussian
from .params import PARAM_NAMES, BoundParams, ModelParams, init_params

__all__ = ["ModelParams", "BoundParams", "PARAM_NAMES", "init_params",
           "encode_context", "decode_targets", "split_gaussian", "predict",
           "save_checkpoint", "load_checkpoint", "to_dict", "from_dict"]
