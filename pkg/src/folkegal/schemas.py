"""JSON schema for every CLI report.

Machine-readable output is part of the tool's contract: each command's
``--format json`` document validates against :data:`REPORT_SCHEMA`
(draft-07), and the schema is deliberately closed (no additional
properties) so downstream parsers can rely on the exact key set.
"""

from __future__ import annotations

__all__ = ["REPORT_SCHEMA"]

_POINT = {
    "type": "array",
    "items": {"type": "number"},
    "minItems": 2,
    "maxItems": 2,
}
_POINT_OR_NULL = {"anyOf": [_POINT, {"type": "null"}]}
_NUM_OR_NULL = {"type": ["number", "null"]}
_INT_OR_NULL = {"type": ["integer", "null"]}

_MARGINS = {
    "type": "object",
    "additionalProperties": False,
    "required": ["target", "security", "participation_margin"],
    "properties": {
        "target": {"type": "number"},
        "security": {"type": "number"},
        "participation_margin": {"type": "number"},
        "deviation_value": _NUM_OR_NULL,
        "deviation_margin": _NUM_OR_NULL,
    },
}

_ENFORCEABLE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["passed", "mode", "eps", "player1", "player2"],
    "properties": {
        "passed": {"type": "boolean"},
        "mode": {"type": "string"},
        "eps": {"type": "number"},
        "player1": _MARGINS,
        "player2": _MARGINS,
    },
}

_TRACE_SUMMARY = {
    "type": "object",
    "additionalProperties": False,
    "required": ["iterations", "stop_reason", "nu0", "cap", "weighted_solves"],
    "properties": {
        "iterations": {"type": "integer"},
        "stop_reason": {"type": "string"},
        "nu0": {"type": "number"},
        "cap": {"type": "integer"},
        "weighted_solves": {"type": "integer"},
    },
}

_SOLVE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["command", "game", "solver", "eps", "seed", "payoffs", "converged"],
    "properties": {
        "command": {"const": "solve"},
        "game": {"type": "string"},
        "solver": {"enum": ["folkegal", "security", "friend", "ce"]},
        "eps": {"type": "number"},
        "seed": {"type": "integer"},
        "payoffs": _POINT,
        "converged": {"type": "boolean"},
        "mode": {"type": ["string", "null"]},
        "lambda": _NUM_OR_NULL,
        "disagreement": _POINT_OR_NULL,
        "egalitarian": _NUM_OR_NULL,
        "enforceable": {"anyOf": [_ENFORCEABLE, {"type": "null"}]},
        "trace": {"anyOf": [_TRACE_SUMMARY, {"type": "null"}]},
        "guarantees": _POINT_OR_NULL,
        "ideal": _POINT_OR_NULL,
        "sweeps": _INT_OR_NULL,
    },
}

_ORACLE = {
    "type": "object",
    "additionalProperties": False,
    "required": [
        "command",
        "game",
        "eps",
        "cap",
        "n_policies",
        "vertices",
        "disagreement",
        "egal_point",
        "egal_value",
    ],
    "properties": {
        "command": {"const": "oracle"},
        "game": {"type": "string"},
        "eps": {"type": "number"},
        "cap": {"type": "integer"},
        "n_policies": {"type": "integer"},
        "vertices": {"type": "array", "items": _POINT},
        "disagreement": _POINT,
        "egal_point": _POINT,
        "egal_value": {"type": "number"},
    },
}

_SIMULATE = {
    "type": "object",
    "additionalProperties": False,
    "required": [
        "command",
        "game",
        "eps",
        "rounds",
        "seed",
        "deviator",
        "horizon",
        "mean",
        "stderr",
        "target",
    ],
    "properties": {
        "command": {"const": "simulate"},
        "game": {"type": "string"},
        "eps": {"type": "number"},
        "rounds": {"type": "integer"},
        "seed": {"type": "integer"},
        "deviator": {"enum": ["none", "best_response_once", "random"]},
        "horizon": {"type": "integer"},
        "mean": _POINT,
        "stderr": _POINT,
        "target": _POINT,
        "left_rounds": _INT_OR_NULL,
        "deviator_player": _INT_OR_NULL,
        "deviator_average": _NUM_OR_NULL,
        "equilibrium_average": _NUM_OR_NULL,
    },
}

_REPRODUCE_CELL = {
    "type": "object",
    "additionalProperties": False,
    "required": ["payoffs", "converged"],
    "properties": {
        "payoffs": _POINT,
        "converged": {"type": "boolean"},
    },
}

_REPRODUCE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["command", "eps", "seed", "games"],
    "properties": {
        "command": {"const": "reproduce"},
        "eps": {"type": "number"},
        "seed": {"type": "integer"},
        "games": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "additionalProperties": _REPRODUCE_CELL,
            },
        },
    },
}

REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "oneOf": [_SOLVE, _ORACLE, _SIMULATE, _REPRODUCE],
}
