"""Hierarchical vector-symbolic reinforcement learner.

Cortical-column-style units (a k-means coder plus an online symbolic parser)
are sampled over sensor subsets, composed into a second layer over
action-conditioned symbols, and arbitrated by basal-ganglia-style voting with
surprise-driven inner rewards.
"""

from .agent import (ActionOutput, Agent, AgentConfig, Layer2Params, LayerParams,
                    StepInput, SurpriseParams)
from .codebook import Codebook, fit
from .envs import Catch, CatchConfig, EnvState, MiniPong, MiniPongConfig, make_env
from .errors import ConfigError, NoPredictionError, ProtocolError, SnapshotError
from .parser import ParseEvent, Parser, ParserConfig, Prediction

__all__ = [
    "ActionOutput", "Agent", "AgentConfig", "Catch", "CatchConfig", "Codebook",
    "ConfigError", "EnvState", "Layer2Params", "LayerParams", "MiniPong",
    "MiniPongConfig", "NoPredictionError", "ParseEvent", "Parser",
    "ParserConfig", "Prediction", "ProtocolError", "SnapshotError", "StepInput",
    "SurpriseParams", "fit", "make_env",
]

__version__ = "0.1.0"
